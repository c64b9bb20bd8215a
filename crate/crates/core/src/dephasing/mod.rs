//! Decoherence function of a qubit coupled to a thermal bosonic bath through
//! an underdamped Lorentzian spectral density
//!
//! ```text
//! J(ω) = κ ω₀² η ω / ((ω² − ω₀²)² + η²ω²)
//! Γ(t) = ∫₀^∞ dω J(ω) (1 − cos ωt)/ω² coth(βω/2)
//! ```
//!
//! Units: ħ = 1 and frequencies, times and β are measured in units of ω₀
//! (resp. 1/ω₀) by the CLI. The library keeps ω₀ explicit.
//!
//! [`gamma_closed`] evaluates Γ by residues: the poles of J(ω)/ω² at
//! ±Ω + iη/2 give two damped oscillating blocks, the pole of coth at the
//! origin gives the linear growth, and the poles of coth at the Matsubara
//! frequencies νₙ = 2πn/β give a convergent series. [`gamma_quadrature`] is the
//! independent numerical route.

mod quadrature;

use std::f64::consts::PI;

use crate::{Error, Result};

pub use quadrature::{gamma_quadrature, integrand, GaussKronrod};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DephasingParams {
    pub kappa: f64,
    pub eta: f64,
    pub omega0: f64,
    pub beta: f64,
}

impl DephasingParams {
    pub fn new(kappa: f64, eta: f64, omega0: f64, beta: f64) -> Result<Self> {
        for (name, value) in [
            ("kappa", kappa),
            ("eta", eta),
            ("omega0", omega0),
            ("beta", beta),
        ] {
            if !(value.is_finite() && value > 0.0) {
                return Err(Error::param(format!(
                    "{name} must be positive and finite, got {value}"
                )));
            }
        }
        omega_resonance(omega0, eta)?;
        Ok(Self {
            kappa,
            eta,
            omega0,
            beta,
        })
    }

    pub fn with_beta(&self, beta: f64) -> Result<Self> {
        Self::new(self.kappa, self.eta, self.omega0, beta)
    }

    pub fn with_kappa(&self, kappa: f64) -> Result<Self> {
        Self::new(kappa, self.eta, self.omega0, self.beta)
    }

    /// Ω = √(ω₀² − η²/4).
    pub fn omega(&self) -> f64 {
        (self.omega0 * self.omega0 - 0.25 * self.eta * self.eta).sqrt()
    }

    /// Period 2π/Ω of the damped oscillation in Γ(t).
    pub fn period(&self) -> f64 {
        2.0 * PI / self.omega()
    }

    /// Coefficient of the term of Γ(t) that grows linearly in t,
    /// πκη/(βω₀²).
    pub fn linear_slope(&self) -> f64 {
        PI * self.kappa * self.eta / (self.beta * self.omega0 * self.omega0)
    }
}

/// Ω = √(ω₀² − η²/4); fails outside the underdamped regime η/2 < ω₀.
pub fn omega_resonance(omega0: f64, eta: f64) -> Result<f64> {
    if eta.is_nan() || omega0.is_nan() || eta / 2.0 >= omega0 {
        return Err(Error::param(format!(
            "overdamped parameters: need eta/2 < omega0, got eta = {eta}, omega0 = {omega0}"
        )));
    }
    Ok((omega0 * omega0 - 0.25 * eta * eta).sqrt())
}

pub fn spectral_density(omega: f64, p: &DephasingParams) -> f64 {
    let w0sq = p.omega0 * p.omega0;
    let detuning = omega * omega - w0sq;
    p.kappa * w0sq * p.eta * omega / (detuning * detuning + p.eta * p.eta * omega * omega)
}

/// Stopping rule for the Matsubara series.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MatsubaraTruncation {
    pub rel_tol: f64,
    pub max_terms: usize,
}

impl MatsubaraTruncation {
    pub fn new(rel_tol: f64, max_terms: usize) -> Result<Self> {
        if !(rel_tol > 0.0 && rel_tol <= 1e-3) {
            return Err(Error::param(format!(
                "rel_tol must lie in (0, 1e-3], got {rel_tol}"
            )));
        }
        if max_terms < 10 {
            return Err(Error::param(format!(
                "max_terms must be at least 10, got {max_terms}"
            )));
        }
        Ok(Self { rel_tol, max_terms })
    }
}

impl Default for MatsubaraTruncation {
    fn default() -> Self {
        Self {
            rel_tol: 1e-12,
            max_terms: 100_000,
        }
    }
}

/// Thermal weights of the two pole blocks:
/// coth(β(Ω + iη/2)/2) = a − ib with
/// a = sinh βΩ / (cosh βΩ − cos(βη/2)) and b = sin(βη/2) / (cosh βΩ − cos(βη/2)).
///
/// Written in terms of e^{−βΩ} so that large β does not overflow.
fn thermal_weights(p: &DephasingParams, omega: f64) -> (f64, f64) {
    let x = p.beta * omega;
    let decay = (-x).exp();
    let (sin_half, cos_half) = (0.5 * p.beta * p.eta).sin_cos();
    let denom = 1.0 + decay * decay - 2.0 * decay * cos_half;
    let a = -(-2.0 * x).exp_m1() / denom;
    let b = 2.0 * decay * sin_half / denom;
    (a, b)
}

/// Γ(t) from the pole expansion.
///
/// ```text
/// Γ(t) = πκ/(2Ωω₀²) { a [e^{−ηt/2}(A cos Ωt − ηΩ sin Ωt) − A]
///                   + b [e^{−ηt/2}(A sin Ωt + ηΩ cos Ωt) − ηΩ] }
///      + πκηt/(βω₀²)
///      + (2πκηω₀²/β) Σₙ (1 − e^{−νₙt}) / (νₙ [(νₙ² + ω₀²)² − η²νₙ²])
/// ```
///
/// with A = η²/4 − Ω². The series is cut when a term drops below
/// `rel_tol` times the running sum.
pub fn gamma_closed(t: f64, p: &DephasingParams, trunc: &MatsubaraTruncation) -> Result<f64> {
    if !(t >= 0.0 && t.is_finite()) {
        return Err(Error::param(format!(
            "time must be non-negative and finite, got {t}"
        )));
    }
    if t == 0.0 {
        return Ok(0.0);
    }
    let omega = p.omega();
    let eta = p.eta;
    let w0sq = p.omega0 * p.omega0;
    let (a, b) = thermal_weights(p, omega);
    let shift = 0.25 * eta * eta - omega * omega;
    let envelope = (-0.5 * eta * t).exp();
    let (s, c) = (omega * t).sin_cos();

    let blocks = PI * p.kappa / (2.0 * omega * w0sq)
        * (a * (envelope * (shift * c - eta * omega * s) - shift)
            + b * (envelope * (shift * s + eta * omega * c) - eta * omega));
    let linear = p.linear_slope() * t;
    let series = matsubara_series(t, p, trunc)?;
    Ok(blocks + linear + 2.0 * PI * p.kappa * eta * w0sq / p.beta * series)
}

fn matsubara_series(t: f64, p: &DephasingParams, trunc: &MatsubaraTruncation) -> Result<f64> {
    let w0sq = p.omega0 * p.omega0;
    let step = 2.0 * PI / p.beta;
    let mut sum = 0.0;
    for n in 1..=trunc.max_terms {
        let nu = step * n as f64;
        let denom = (nu * nu + w0sq).powi(2) - p.eta * p.eta * nu * nu;
        // (ν² + ω₀² − ην)(ν² + ω₀² + ην) ≥ Ω²·(…) > 0 in the underdamped regime
        debug_assert!(denom > 0.0);
        let term = -(-nu * t).exp_m1() / (nu * denom);
        sum += term;
        if term <= trunc.rel_tol * sum {
            return Ok(sum);
        }
    }
    let last_nu = step * trunc.max_terms as f64;
    let last = -(-last_nu * t).exp_m1() / (last_nu * ((last_nu * last_nu + w0sq).powi(2)));
    Err(Error::Convergence {
        what: "Matsubara series",
        partial: sum,
        achieved_tol: last / sum,
    })
}

/// A decoherence function Γ(t) driving the dephasing map.
pub trait Decoherence: Sync {
    fn gamma(&self, t: f64) -> Result<f64>;

    /// Characteristic oscillation period, used to check sampling density.
    fn period(&self) -> Option<f64> {
        None
    }
}

/// Γ(t) of the spin-boson model, evaluated in closed form.
#[derive(Debug, Clone, Copy)]
pub struct SpinBoson {
    pub params: DephasingParams,
    pub truncation: MatsubaraTruncation,
}

impl SpinBoson {
    pub fn new(params: DephasingParams) -> Self {
        Self {
            params,
            truncation: MatsubaraTruncation::default(),
        }
    }
}

impl Decoherence for SpinBoson {
    fn gamma(&self, t: f64) -> Result<f64> {
        gamma_closed(t, &self.params, &self.truncation)
    }

    fn period(&self) -> Option<f64> {
        Some(self.params.period())
    }
}

/// Γ(t) = c·t, the exponent of a dephasing semigroup.
#[derive(Debug, Clone, Copy)]
pub struct LinearGamma(pub f64);

impl Decoherence for LinearGamma {
    fn gamma(&self, t: f64) -> Result<f64> {
        Ok(self.0 * t)
    }
}

/// Any closure `t ↦ Γ(t)` with an optional oscillation period.
pub struct FnGamma<F> {
    f: F,
    period: Option<f64>,
}

impl<F: Fn(f64) -> f64 + Sync> FnGamma<F> {
    pub fn new(f: F, period: Option<f64>) -> Self {
        Self { f, period }
    }
}

impl<F: Fn(f64) -> f64 + Sync> Decoherence for FnGamma<F> {
    fn gamma(&self, t: f64) -> Result<f64> {
        Ok((self.f)(t))
    }

    fn period(&self) -> Option<f64> {
        self.period
    }
}
