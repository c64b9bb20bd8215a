//! Adaptive Gauss-Kronrod quadrature of the decoherence integral.
//!
//! The frequency axis is cut at Ω, ω₀ and 2ω₀, then extended by panels
//! [W, 2W] until an analytic bound on the remaining tail drops below the
//! tail budget. For t > 1 every panel is further cut into pieces no wider
//! than π/(4t) so that each piece sees at most an eighth of an oscillation of
//! cos ωt.

use std::f64::consts::PI;

use super::{spectral_density, DephasingParams};
use crate::{Error, Result};

const MAX_DOUBLINGS: usize = 64;
const SMALL_OMEGA: f64 = 1e-6;

// 15-point Kronrod abscissae (non-negative half) and weights, with the
// embedded 7-point Gauss weights on the odd-indexed nodes.
#[allow(clippy::excessive_precision)]
const XGK: [f64; 8] = [
    0.991_455_371_120_812_639_206_854_697_526_329,
    0.949_107_912_342_758_524_526_189_684_047_851,
    0.864_864_423_359_769_072_789_712_788_640_926,
    0.741_531_185_599_394_439_863_864_773_280_788,
    0.586_087_235_467_691_130_294_144_845_693_013,
    0.405_845_151_377_397_166_906_606_412_076_961,
    0.207_784_955_007_898_467_600_689_403_773_245,
    0.000_000_000_000_000_000_000_000_000_000_000,
];
#[allow(clippy::excessive_precision)]
const WGK: [f64; 8] = [
    0.022_935_322_010_529_224_963_732_008_058_970,
    0.063_092_092_629_978_553_290_700_663_189_204,
    0.104_790_010_322_250_183_839_876_322_541_518,
    0.140_653_259_715_525_918_745_189_590_510_238,
    0.169_004_726_639_267_902_826_583_426_598_550,
    0.190_350_578_064_785_409_913_256_402_421_014,
    0.204_432_940_075_298_892_414_161_999_234_649,
    0.209_482_141_084_727_828_012_999_174_891_714,
];
#[allow(clippy::excessive_precision)]
const WG: [f64; 4] = [
    0.129_484_966_168_869_693_270_611_432_679_082,
    0.279_705_391_489_276_667_901_467_771_423_780,
    0.381_830_050_505_118_944_950_369_775_488_975,
    0.417_959_183_673_469_387_755_102_040_816_327,
];

/// Globally adaptive 7/15-point Gauss-Kronrod integrator.
#[derive(Debug, Clone, Copy)]
pub struct GaussKronrod {
    pub max_evals: usize,
}

impl Default for GaussKronrod {
    fn default() -> Self {
        Self {
            max_evals: 2_000_000,
        }
    }
}

impl GaussKronrod {
    /// One 15-point rule: (Kronrod estimate, |Kronrod − Gauss|).
    fn rule<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> (f64, f64) {
        let center = 0.5 * (a + b);
        let half = 0.5 * (b - a);
        let fc = f(center);
        let mut kronrod = WGK[7] * fc;
        let mut gauss = WG[3] * fc;
        for j in 0..7 {
            let dx = half * XGK[j];
            let pair = f(center - dx) + f(center + dx);
            kronrod += WGK[j] * pair;
            if j % 2 == 1 {
                gauss += WG[j / 2] * pair;
            }
        }
        (kronrod * half, ((kronrod - gauss) * half).abs())
    }

    /// Integrates `f` over [a, b] to absolute error `tol`, returning the
    /// value and the accumulated error estimate.
    pub fn integrate<F: Fn(f64) -> f64>(
        &self,
        f: &F,
        a: f64,
        b: f64,
        tol: f64,
    ) -> Result<(f64, f64)> {
        let mut total = 0.0;
        let mut total_err = 0.0;
        let mut evals = 0;
        let mut stack = vec![(a, b, tol)];
        while let Some((lo, hi, local_tol)) = stack.pop() {
            let (value, err) = Self::rule(f, lo, hi);
            evals += 15;
            let mid = 0.5 * (lo + hi);
            let roundoff = 50.0 * f64::EPSILON * value.abs();
            if err <= local_tol.max(roundoff) || mid <= lo || mid >= hi {
                total += value;
                total_err += err;
                continue;
            }
            if evals >= self.max_evals {
                return Err(Error::Convergence {
                    what: "adaptive quadrature",
                    partial: total + value,
                    achieved_tol: total_err + err,
                });
            }
            stack.push((mid, hi, 0.5 * local_tol));
            stack.push((lo, mid, 0.5 * local_tol));
        }
        Ok((total, total_err))
    }
}

/// J(ω)(1 − cos ωt)/ω² · coth(βω/2), replaced below ω = 1e-6 by its limit
/// κηt²/(βω₀²).
pub fn integrand(omega: f64, t: f64, p: &DephasingParams) -> f64 {
    if omega < SMALL_OMEGA {
        return p.kappa * p.eta * t * t / (p.beta * p.omega0 * p.omega0);
    }
    let one_minus_cos = 2.0 * (0.5 * omega * t).sin().powi(2);
    spectral_density(omega, p) * one_minus_cos / (omega * omega) / (0.5 * p.beta * omega).tanh()
}

/// Upper bound on ∫_W^∞ of the integrand, valid for W ≥ 2ω₀ where
/// (ω² − ω₀²)² ≥ (3ω²/4)².
fn tail_bound(w: f64, p: &DephasingParams) -> f64 {
    let coth = 1.0 / (0.5 * p.beta * w).tanh();
    8.0 / 9.0 * p.kappa * p.eta * p.omega0 * p.omega0 * coth / w.powi(4)
}

/// Γ(t) by direct quadrature, to absolute accuracy `abs_tol`.
pub fn gamma_quadrature(t: f64, p: &DephasingParams, abs_tol: f64) -> Result<f64> {
    if !(t >= 0.0 && t.is_finite()) {
        return Err(Error::param(format!(
            "time must be non-negative and finite, got {t}"
        )));
    }
    if abs_tol.is_nan() || abs_tol <= 0.0 {
        return Err(Error::param(format!(
            "abs_tol must be positive, got {abs_tol}"
        )));
    }
    if t == 0.0 {
        return Ok(0.0);
    }
    let f = |w: f64| integrand(w, t, p);
    let gk = GaussKronrod::default();
    let max_width = if t > 1.0 {
        PI / (4.0 * t)
    } else {
        f64::INFINITY
    };

    // half the budget for the explicit panels, half for the neglected tail;
    // panel k of the doubling sequence gets a geometrically shrinking share
    let mut edges = vec![0.0, p.omega(), p.omega0, 2.0 * p.omega0];
    edges.dedup();
    let mut total = 0.0;
    let mut share = 0.25 * abs_tol;
    for w in edges.windows(2) {
        total += integrate_panel(&gk, &f, w[0], w[1], share / 3.0, max_width)?;
    }
    let mut lo = 2.0 * p.omega0;
    for _ in 0..MAX_DOUBLINGS {
        if tail_bound(lo, p) < 0.5 * abs_tol {
            return Ok(total);
        }
        share *= 0.5;
        total += integrate_panel(&gk, &f, lo, 2.0 * lo, share, max_width)?;
        lo *= 2.0;
    }
    Err(Error::Convergence {
        what: "decoherence quadrature tail",
        partial: total,
        achieved_tol: tail_bound(lo, p),
    })
}

fn integrate_panel<F: Fn(f64) -> f64>(
    gk: &GaussKronrod,
    f: &F,
    a: f64,
    b: f64,
    tol: f64,
    max_width: f64,
) -> Result<f64> {
    let pieces = ((b - a) / max_width).ceil().max(1.0) as usize;
    let width = (b - a) / pieces as f64;
    let piece_tol = tol / pieces as f64;
    let mut sum = 0.0;
    for i in 0..pieces {
        let lo = a + width * i as f64;
        let hi = if i + 1 == pieces { b } else { lo + width };
        sum += gk.integrate(f, lo, hi, piece_tol)?.0;
    }
    Ok(sum)
}
