//! Revivals of distinguishability and the non-Markovianity measure.
//!
//! Under pure dephasing, every contractive quantifier evaluated on a pair of
//! evolving states is a non-increasing function of Γ alone. Revivals of
//! distinguishability are therefore exactly the intervals on which Γ(t)
//! decreases, for every quantifier and every initial pair. [`RevivalAnalysis`]
//! locates those intervals once on a sampled trajectory and refines their
//! endpoints by golden-section search on Γ. The gain of a window is the
//! change of the chosen quantifier between the refined endpoints.

use std::f64::consts::{LN_2, PI};

use rayon::prelude::*;

use crate::dephasing::{Decoherence, DephasingParams};
use crate::quantifiers::{binary_entropy, evaluate, LogBase, Mu, QuantifierKind};
use crate::qubit::{dephase_by_factor, equatorial_pair, from_bloch, BlochVector, DensityMatrix};
use crate::{Error, Result};

/// Γ decreases smaller than this are treated as numerical noise.
pub const REVIVAL_FLOOR: f64 = 1e-10;
/// Minimum number of samples per oscillation period of Γ.
pub const MIN_SAMPLES_PER_PERIOD: f64 = 40.0;
/// Target for the neglected revivals beyond the default horizon.
pub const TAIL_TARGET: f64 = 1e-8;

const GOLDEN_TOL: f64 = 1e-10;

/// Uniform time grid 0, t_max/steps, …, t_max.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimeGrid {
    pub t_max: f64,
    pub steps: usize,
}

impl TimeGrid {
    pub fn new(t_max: f64, steps: usize) -> Result<Self> {
        if !(t_max > 0.0 && t_max.is_finite()) {
            return Err(Error::param(format!("t_max must be positive, got {t_max}")));
        }
        if steps < 100 {
            return Err(Error::param(format!(
                "steps must be at least 100, got {steps}"
            )));
        }
        Ok(Self { t_max, steps })
    }

    /// Horizon max(20/η, 6·2π/Ω), stretched until [`revival_tail_bound`]
    /// falls below [`TAIL_TARGET`]; 100 samples per period.
    pub fn for_params(p: &DephasingParams) -> Self {
        let period = p.period();
        let mut t_max = (20.0 / p.eta).max(6.0 * period);
        while revival_tail_bound(p, t_max) >= TAIL_TARGET {
            t_max *= 1.25;
        }
        let steps = ((t_max / period) * 100.0).ceil().max(1000.0) as usize;
        Self { t_max, steps }
    }

    pub fn dt(&self) -> f64 {
        self.t_max / self.steps as f64
    }

    pub fn times(&self) -> Vec<f64> {
        (0..=self.steps)
            .map(|i| {
                if i == self.steps {
                    self.t_max
                } else {
                    i as f64 * self.dt()
                }
            })
            .collect()
    }
}

/// Upper bound on the total decrease of Γ after time `t`.
///
/// Only the two damped pole blocks of Γ oscillate; the linear and Matsubara
/// parts are non-decreasing. The oscillating part has amplitude at most
/// `A(t) = πκ/(2Ωω₀²) · |a − ib| · |η²/4 − Ω² + iηΩ| · e^{−ηt/2}`, so each
/// later revival (at most one per period) lowers Γ by at most `2A`. Since
/// |d e^{−Γ}/dΓ| ≤ 1, this also bounds the trace-distance revivals left out.
pub fn revival_tail_bound(p: &DephasingParams, t: f64) -> f64 {
    let omega = p.omega();
    let x = p.beta * omega;
    let decay = (-x).exp();
    let (sin_half, cos_half) = (0.5 * p.beta * p.eta).sin_cos();
    let denom = 1.0 + decay * decay - 2.0 * decay * cos_half;
    let a = -(-2.0 * x).exp_m1() / denom;
    let b = 2.0 * decay * sin_half / denom;
    let shift = 0.25 * p.eta * p.eta - omega * omega;
    let amplitude = PI * p.kappa / (2.0 * omega * p.omega0 * p.omega0)
        * a.hypot(b)
        * shift.hypot(p.eta * omega);
    let per_period = (-0.5 * p.eta * p.period()).exp();
    2.0 * amplitude * (-0.5 * p.eta * t).exp() / (1.0 - per_period)
}

/// Γ sampled on a time grid.
#[derive(Debug, Clone)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub gamma: Vec<f64>,
}

impl Trajectory {
    pub fn sample(grid: &TimeGrid, model: &dyn Decoherence) -> Result<Self> {
        let times = grid.times();
        let gamma = times
            .par_iter()
            .map(|&t| model.gamma(t))
            .collect::<Result<Vec<f64>>>()?;
        Ok(Self { times, gamma })
    }

    pub fn series(&self, kind: QuantifierKind) -> Vec<(f64, f64)> {
        self.times
            .iter()
            .zip(&self.gamma)
            .map(|(&t, &g)| (t, quantifier_of_gamma(kind, g)))
            .collect()
    }
}

/// Distinguishability of the antipodal equatorial pair after dephasing by Γ.
///
/// With r = e^{−Γ} both states are diagonal in the same basis with spectra
/// {(1+r)/2, (1−r)/2} and its reverse, so every quantifier reduces to a
/// function of r. Skew divergences with μ ≠ 1/4 fall back to matrix
/// evaluation.
pub fn quantifier_of_gamma(kind: QuantifierKind, gamma: f64) -> f64 {
    let r = (-gamma.max(0.0)).exp();
    match kind {
        QuantifierKind::TraceDistance => r,
        QuantifierKind::SqrtJensenShannon => (coherent_part(r) / LN_2).max(0.0).sqrt(),
        QuantifierKind::QuantumSkew(mu) if mu == Mu::QUARTER => {
            let (first, second) = quarter_telescopic_terms(r);
            0.25 / 4f64.ln() * first + 0.75 / (4.0f64 / 3.0).ln() * second
        }
        QuantifierKind::HolevoSkew(mu) if mu == Mu::QUARTER => {
            let (first, second) = quarter_telescopic_terms(r);
            (0.25 * first + 0.75 * second) / binary_entropy(0.25, LogBase::Natural)
        }
        _ => {
            let (p1, p2) = equatorial_pair(0.0);
            evaluate(kind, &dephase_by_factor(&p1, r), &dephase_by_factor(&p2, r))
        }
    }
}

/// ln 2 · (1 − H₂({(1+r)/2, (1−r)/2})) = ½[(1+r)ln(1+r) + (1−r)ln(1−r)].
///
/// The two logarithms cancel to O(r²), so small r uses the series
/// Σ r^{2k}/(2k(2k−1)) to keep relative accuracy deep into the tail of Γ.
fn coherent_part(r: f64) -> f64 {
    if r < 0.5 {
        let r2 = r * r;
        let mut power = r2;
        let mut sum = 0.0;
        for k in 1..200 {
            let n = 2.0 * k as f64;
            let term = power / (n * (n - 1.0));
            sum += term;
            if term <= 1e-17 * sum {
                break;
            }
            power *= r2;
        }
        return sum;
    }
    let upper = (1.0 + r) * r.ln_1p();
    let lower = if r >= 1.0 {
        0.0
    } else {
        (1.0 - r) * (-r).ln_1p()
    };
    0.5 * (upper + lower)
}

/// S(ρ¹, ¼ρ¹ + ¾ρ²) and S(ρ², ¾ρ² + ¼ρ¹) for the dephased equatorial pair.
///
/// Both mixtures have spectrum {(1 − r/2)/2, (1 + r/2)/2}, giving
/// `ln2(1 − H₂) − ½ ln(1 − r²/4) ∓ (r/2) ln((1 − r/2)/(1 + r/2))`; the last
/// term is written as −r·artanh(r/2).
fn quarter_telescopic_terms(r: f64) -> (f64, f64) {
    let base = coherent_part(r) - 0.5 * (-0.25 * r * r).ln_1p();
    let odd = -r * (0.5 * r).atanh();
    ((base - odd).max(0.0), (base + odd).max(0.0))
}

/// Sampled 𝔖(t) for the equatorial pair, Γ from `model`.
pub fn distinguishability_series(
    kind: QuantifierKind,
    grid: &TimeGrid,
    model: &dyn Decoherence,
) -> Result<Vec<(f64, f64)>> {
    Ok(Trajectory::sample(grid, model)?.series(kind))
}

/// ∫ max(d𝔖/dt, 0) dt over a sampled series: the sum of positive increments.
pub fn backflow_integral(series: &[(f64, f64)]) -> f64 {
    series
        .windows(2)
        .fold(0.0, |acc, w| acc + (w[1].1 - w[0].1).max(0.0))
}

/// Interval on which Γ decreases, with its refined endpoint values.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GammaWindow {
    pub t_start: f64,
    pub t_end: f64,
    pub gamma_start: f64,
    pub gamma_end: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RevivalWindow {
    pub t_start: f64,
    pub t_end: f64,
    pub gain: f64,
}

/// An initial pair of system states.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum StatePair {
    /// The orthogonal pure states (|1⟩ ± e^{iφ}|0⟩)/√2, evaluated in closed
    /// form (the result does not depend on φ).
    Equatorial { phase: f64 },
    /// Arbitrary states, evaluated by matrix quantifiers.
    Bloch {
        first: BlochVector,
        second: BlochVector,
    },
}

impl StatePair {
    pub fn states(&self) -> Result<(DensityMatrix, DensityMatrix)> {
        match *self {
            StatePair::Equatorial { phase } => Ok(equatorial_pair(phase)),
            StatePair::Bloch { first, second } => Ok((from_bloch(first)?, from_bloch(second)?)),
        }
    }

    fn evaluator(&self, kind: QuantifierKind) -> Result<PairEvaluator> {
        Ok(match self {
            StatePair::Equatorial { .. } => PairEvaluator::ClosedForm(kind),
            StatePair::Bloch { .. } => {
                let (a, b) = self.states()?;
                PairEvaluator::Matrix(kind, a, b)
            }
        })
    }
}

enum PairEvaluator {
    ClosedForm(QuantifierKind),
    Matrix(QuantifierKind, DensityMatrix, DensityMatrix),
}

impl PairEvaluator {
    fn at(&self, gamma: f64) -> f64 {
        match self {
            PairEvaluator::ClosedForm(kind) => quantifier_of_gamma(*kind, gamma),
            PairEvaluator::Matrix(kind, a, b) => {
                let r = (-gamma.max(0.0)).exp();
                evaluate(*kind, &dephase_by_factor(a, r), &dephase_by_factor(b, r))
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MeasureResult {
    pub value: f64,
    pub windows: Vec<RevivalWindow>,
    pub quantifier: QuantifierKind,
    pub pair: StatePair,
}

/// How the supremum over initial pairs is taken.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum PairStrategy {
    /// The antipodal equatorial pair at φ = 0.
    #[default]
    Equatorial,
    /// Maximize over a spherical grid of Bloch-ball points with `resolution`
    /// radial, polar and azimuthal levels.
    BlochGrid { resolution: usize },
}

/// The Γ trajectory of a model together with its decrease windows.
#[derive(Debug, Clone)]
pub struct RevivalAnalysis {
    pub trajectory: Trajectory,
    pub windows: Vec<GammaWindow>,
}

impl RevivalAnalysis {
    pub fn new(grid: &TimeGrid, model: &dyn Decoherence) -> Result<Self> {
        if let Some(period) = model.period() {
            let per_period = period / grid.dt();
            if per_period < MIN_SAMPLES_PER_PERIOD {
                return Err(Error::param(format!(
                    "grid too coarse: {per_period:.1} samples per oscillation period, need {MIN_SAMPLES_PER_PERIOD}"
                )));
            }
        }
        let trajectory = Trajectory::sample(grid, model)?;
        let windows = gamma_windows(&trajectory, model)?;
        Ok(Self {
            trajectory,
            windows,
        })
    }

    pub fn revivals(&self, kind: QuantifierKind, pair: &StatePair) -> Result<Vec<RevivalWindow>> {
        let eval = pair.evaluator(kind)?;
        Ok(self.revivals_with(&eval))
    }

    fn revivals_with(&self, eval: &PairEvaluator) -> Vec<RevivalWindow> {
        self.windows
            .iter()
            .filter_map(|w| {
                let gain = eval.at(w.gamma_end) - eval.at(w.gamma_start);
                (gain > 0.0).then_some(RevivalWindow {
                    t_start: w.t_start,
                    t_end: w.t_end,
                    gain,
                })
            })
            .collect()
    }

    pub fn measure_pair(&self, kind: QuantifierKind, pair: StatePair) -> Result<MeasureResult> {
        let windows = self.revivals(kind, &pair)?;
        Ok(MeasureResult {
            // fold from +0.0: an empty f64 sum is -0.0
            value: windows.iter().fold(0.0, |acc, w| acc + w.gain),
            windows,
            quantifier: kind,
            pair,
        })
    }

    pub fn measure(&self, kind: QuantifierKind, strategy: PairStrategy) -> Result<MeasureResult> {
        match strategy {
            PairStrategy::Equatorial => {
                self.measure_pair(kind, StatePair::Equatorial { phase: 0.0 })
            }
            PairStrategy::BlochGrid { resolution } => self.grid_search(kind, resolution),
        }
    }

    fn grid_search(&self, kind: QuantifierKind, resolution: usize) -> Result<MeasureResult> {
        if resolution < 2 {
            return Err(Error::param("grid search resolution must be at least 2"));
        }
        let points = bloch_grid(resolution);
        // dephasing commutes with rotations about z, so the first state can
        // be taken in the xz half-plane
        let firsts: Vec<BlochVector> = points
            .iter()
            .copied()
            .filter(|v| v.y == 0.0 && v.x >= 0.0)
            .collect();
        let pairs: Vec<(BlochVector, BlochVector)> = firsts
            .iter()
            .flat_map(|&a| points.iter().map(move |&b| (a, b)))
            .collect();
        let values: Vec<f64> = pairs
            .par_iter()
            .map(|&(a, b)| {
                let eval = PairEvaluator::Matrix(
                    kind,
                    from_bloch(a).expect("grid point in ball"),
                    from_bloch(b).expect("grid point in ball"),
                );
                self.revivals_with(&eval).iter().map(|w| w.gain).sum()
            })
            .collect();
        let mut best = 0;
        for (i, &v) in values.iter().enumerate() {
            if v > values[best] {
                best = i;
            }
        }
        let (first, second) = pairs[best];
        self.measure_pair(kind, StatePair::Bloch { first, second })
    }
}

/// Spherical grid: the origin plus `n` radii × (n+1) polar angles ×
/// `n` azimuths (one azimuth at the poles).
fn bloch_grid(n: usize) -> Vec<BlochVector> {
    let mut points = vec![BlochVector::ORIGIN];
    for i in 1..=n {
        let radius = i as f64 / n as f64;
        for j in 0..=n {
            let theta = PI * j as f64 / n as f64;
            let (sin_t, cos_t) = if 2 * j == n {
                (1.0, 0.0)
            } else {
                theta.sin_cos()
            };
            let azimuths = if j == 0 || j == n { 1 } else { n };
            for k in 0..azimuths {
                let phi = 2.0 * PI * k as f64 / n as f64;
                let (sin_p, cos_p) = if 2 * k == n {
                    (0.0, -1.0)
                } else {
                    phi.sin_cos()
                };
                let (x, y) = if k == 0 {
                    (radius * sin_t, 0.0)
                } else {
                    (radius * sin_t * cos_p, radius * sin_t * sin_p)
                };
                points.push(BlochVector::new(x, y, radius * cos_t));
            }
        }
    }
    points
}

fn gamma_windows(traj: &Trajectory, model: &dyn Decoherence) -> Result<Vec<GammaWindow>> {
    let g = &traj.gamma;
    let t = &traj.times;
    let last = g.len() - 1;
    let mut windows = Vec::new();
    let mut i = 0;
    while i < last {
        if g[i + 1] >= g[i] {
            i += 1;
            continue;
        }
        let start = i;
        while i < last && g[i + 1] < g[i] {
            i += 1;
        }
        let end = i;

        let (t_start, gamma_start) = if start == 0 {
            (t[0], g[0])
        } else {
            golden_section(model, t[start - 1], t[start + 1], Extremum::Max)?
        };
        let (t_end, gamma_end) = if end == last {
            (t[last], g[last])
        } else {
            golden_section(model, t[end - 1], t[end + 1], Extremum::Min)?
        };
        if gamma_start - gamma_end > REVIVAL_FLOOR {
            windows.push(GammaWindow {
                t_start,
                t_end,
                gamma_start,
                gamma_end,
            });
        }
    }
    Ok(windows)
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Extremum {
    Min,
    Max,
}

/// Golden-section search for an extremum of Γ bracketed by [lo, hi].
fn golden_section(
    model: &dyn Decoherence,
    mut lo: f64,
    mut hi: f64,
    kind: Extremum,
) -> Result<(f64, f64)> {
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let objective = |t: f64| -> Result<f64> {
        let g = model.gamma(t)?;
        Ok(if kind == Extremum::Max { -g } else { g })
    };
    let mut x1 = hi - inv_phi * (hi - lo);
    let mut x2 = lo + inv_phi * (hi - lo);
    let mut f1 = objective(x1)?;
    let mut f2 = objective(x2)?;
    while hi - lo > GOLDEN_TOL {
        if f1 <= f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - inv_phi * (hi - lo);
            f1 = objective(x1)?;
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + inv_phi * (hi - lo);
            f2 = objective(x2)?;
        }
    }
    let t = 0.5 * (lo + hi);
    Ok((t, model.gamma(t)?))
}

/// Revival windows of `kind` for the equatorial pair.
pub fn find_revivals(
    kind: QuantifierKind,
    grid: &TimeGrid,
    model: &dyn Decoherence,
) -> Result<Vec<RevivalWindow>> {
    RevivalAnalysis::new(grid, model)?.revivals(kind, &StatePair::Equatorial { phase: 0.0 })
}

pub fn measure_for_pair(
    kind: QuantifierKind,
    grid: &TimeGrid,
    model: &dyn Decoherence,
    pair: StatePair,
) -> Result<MeasureResult> {
    RevivalAnalysis::new(grid, model)?.measure_pair(kind, pair)
}

pub fn measure(
    kind: QuantifierKind,
    grid: &TimeGrid,
    model: &dyn Decoherence,
    strategy: PairStrategy,
) -> Result<MeasureResult> {
    RevivalAnalysis::new(grid, model)?.measure(kind, strategy)
}

/// Distinguishability still accessible on the system.
pub fn internal_information(
    kind: QuantifierKind,
    first: &DensityMatrix,
    second: &DensityMatrix,
) -> f64 {
    evaluate(kind, first, second)
}

/// Distinguishability lost from the system since the initial time.
pub fn external_information(
    kind: QuantifierKind,
    first_initial: &DensityMatrix,
    second_initial: &DensityMatrix,
    first_now: &DensityMatrix,
    second_now: &DensityMatrix,
) -> f64 {
    evaluate(kind, first_initial, second_initial) - evaluate(kind, first_now, second_now)
}
