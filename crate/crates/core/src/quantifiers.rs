//! Distinguishability quantifiers on qubit states.
//!
//! All entropies are in natural log. The Jensen-Shannon divergence carries
//! its own `1/(2 ln 2)` normalization so that it lies in [0, 1].
//!
//! | kind | value |
//! |------|-------|
//! | [`QuantifierKind::TraceDistance`] | ½‖ρ − σ‖₁ |
//! | [`QuantifierKind::SqrtJensenShannon`] | √J(ρ, σ) |
//! | [`QuantifierKind::QuantumSkew`] | S_μ(ρ, σ), each telescopic term normalized by its own maximum |
//! | [`QuantifierKind::HolevoSkew`] | K_μ(ρ, σ) = χ({μ, ρ; 1−μ, σ}) / H(μ) |

use std::f64::consts::LN_2;
use std::fmt;

use crate::qubit::DensityMatrix;
use crate::{Error, Result};

/// Eigenvalues below this are treated as zero when checking supports.
const SUPPORT_EPS: f64 = 1e-14;
/// Minimum weight of the first argument on a null direction of the second
/// argument for the relative entropy to be declared infinite.
const SUPPORT_WEIGHT: f64 = 1e-10;

/// Mixing weight strictly inside (0, 1).
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct Mu(f64);

impl Mu {
    pub const QUARTER: Mu = Mu(0.25);
    pub const HALF: Mu = Mu(0.5);

    pub fn new(mu: f64) -> Result<Self> {
        if mu > 0.0 && mu < 1.0 {
            Ok(Mu(mu))
        } else {
            Err(Error::param(format!(
                "mu must lie strictly inside (0,1), got {mu}"
            )))
        }
    }

    pub fn get(self) -> f64 {
        self.0
    }

    pub fn complement(self) -> Mu {
        Mu(1.0 - self.0)
    }
}

impl Default for Mu {
    fn default() -> Self {
        Mu::QUARTER
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum QuantifierKind {
    TraceDistance,
    SqrtJensenShannon,
    QuantumSkew(Mu),
    HolevoSkew(Mu),
}

impl QuantifierKind {
    /// D, √J, K_{1/4}, S_{1/4}: the column order used in reports.
    pub fn standard_set() -> Vec<QuantifierKind> {
        Self::standard_set_with(Mu::QUARTER)
    }

    pub fn standard_set_with(mu: Mu) -> Vec<QuantifierKind> {
        vec![
            QuantifierKind::TraceDistance,
            QuantifierKind::SqrtJensenShannon,
            QuantifierKind::HolevoSkew(mu),
            QuantifierKind::QuantumSkew(mu),
        ]
    }

    /// Parses a short name: `D`, `sqrtJ`, `K` or `S` (skew variants use `mu`).
    pub fn parse(name: &str, mu: Mu) -> Result<QuantifierKind> {
        match name.trim() {
            "D" => Ok(QuantifierKind::TraceDistance),
            "sqrtJ" => Ok(QuantifierKind::SqrtJensenShannon),
            "K" | "K14" => Ok(QuantifierKind::HolevoSkew(mu)),
            "S" | "S14" => Ok(QuantifierKind::QuantumSkew(mu)),
            other => Err(Error::param(format!("unknown quantifier '{other}'"))),
        }
    }

    /// Column label: `D`, `sqrtJ`, `K14`, `S14`; other μ values are spelled
    /// out, e.g. `K0.3`.
    pub fn label(&self) -> String {
        let skew = |prefix: &str, mu: Mu| {
            if mu == Mu::QUARTER {
                format!("{prefix}14")
            } else {
                format!("{prefix}{}", mu.get())
            }
        };
        match *self {
            QuantifierKind::TraceDistance => "D".to_string(),
            QuantifierKind::SqrtJensenShannon => "sqrtJ".to_string(),
            QuantifierKind::HolevoSkew(mu) => skew("K", mu),
            QuantifierKind::QuantumSkew(mu) => skew("S", mu),
        }
    }

    /// The function φ in 𝔖(ρ,σ) − 𝔖(ρ,τ) ≤ φ(𝔖(σ,τ)).
    pub fn triangle_bound(&self) -> TriangleBound {
        match *self {
            QuantifierKind::TraceDistance | QuantifierKind::SqrtJensenShannon => {
                TriangleBound::identity()
            }
            QuantifierKind::QuantumSkew(mu) => TriangleBound {
                shape: BoundShape::ScaledFourthRoot,
                constant: skew_triangle_constant(mu),
            },
            QuantifierKind::HolevoSkew(mu) => TriangleBound {
                shape: BoundShape::ScaledFourthRoot,
                constant: holevo_triangle_constant(mu),
            },
        }
    }
}

impl fmt::Display for QuantifierKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.label())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BoundShape {
    Identity,
    ScaledFourthRoot,
}

/// φ(x) = x, or φ(x) = c·x^{1/4}.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TriangleBound {
    pub shape: BoundShape,
    pub constant: f64,
}

impl TriangleBound {
    pub fn identity() -> Self {
        Self {
            shape: BoundShape::Identity,
            constant: 1.0,
        }
    }

    pub fn apply(&self, x: f64) -> f64 {
        match self.shape {
            BoundShape::Identity => self.constant * x,
            BoundShape::ScaledFourthRoot => self.constant * x.max(0.0).powf(0.25),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LogBase {
    Natural,
    Two,
}

/// x ln x with 0 ln 0 = 0.
fn xlnx(x: f64) -> f64 {
    if x <= 0.0 {
        0.0
    } else {
        x * x.ln()
    }
}

/// Shannon entropy of {p, 1−p}.
pub fn binary_entropy(p: f64, base: LogBase) -> f64 {
    let nats = -xlnx(p) - xlnx(1.0 - p);
    match base {
        LogBase::Natural => nats,
        LogBase::Two => nats / LN_2,
    }
}

pub fn von_neumann_entropy(rho: &DensityMatrix) -> f64 {
    let [a, b] = rho.spectrum();
    -xlnx(a) - xlnx(b)
}

/// Quantum relative entropy S(A, B) = Tr A (ln A − ln B).
///
/// Returns `f64::INFINITY` when the support of `a` is not contained in that of
/// `b`.
pub fn relative_entropy(a: &DensityMatrix, b: &DensityMatrix) -> f64 {
    let ea = a.eigen();
    let eb = b.eigen();
    let av = ea.values.map(|x| x.max(0.0));
    let bv = eb.values.map(|x| x.max(0.0));

    let mut value = xlnx(av[0]) + xlnx(av[1]);
    for (i, &ai) in av.iter().enumerate() {
        if ai <= 0.0 {
            continue;
        }
        for (j, &bj) in bv.iter().enumerate() {
            let overlap = ea.vectors[i].dotc(&eb.vectors[j]).norm_sqr();
            let weight = ai * overlap;
            if weight <= 0.0 {
                continue;
            }
            if bj < SUPPORT_EPS {
                if weight > SUPPORT_WEIGHT {
                    return f64::INFINITY;
                }
                if bj <= 0.0 {
                    continue;
                }
            }
            value -= weight * bj.ln();
        }
    }
    value.max(0.0)
}

/// S(ρ, μρ + (1−μ)σ), bounded by ln(1/μ).
pub fn telescopic(rho: &DensityMatrix, sigma: &DensityMatrix, mu: f64) -> Result<f64> {
    Ok(telescopic_mu(rho, sigma, Mu::new(mu)?))
}

fn telescopic_mu(rho: &DensityMatrix, sigma: &DensityMatrix, mu: Mu) -> f64 {
    let mixture = rho.mix_unchecked(mu.get(), sigma);
    relative_entropy(rho, &mixture)
}

pub fn quantum_skew(rho: &DensityMatrix, sigma: &DensityMatrix, mu: f64) -> Result<f64> {
    Ok(quantum_skew_mu(rho, sigma, Mu::new(mu)?))
}

fn quantum_skew_mu(rho: &DensityMatrix, sigma: &DensityMatrix, mu: Mu) -> f64 {
    let m = mu.get();
    let first = telescopic_mu(rho, sigma, mu);
    let second = telescopic_mu(sigma, rho, mu.complement());
    m / (1.0 / m).ln() * first + (1.0 - m) / (1.0 / (1.0 - m)).ln() * second
}

/// K_μ as the weighted sum of the two telescopic relative entropies.
pub fn holevo_skew(rho: &DensityMatrix, sigma: &DensityMatrix, mu: f64) -> Result<f64> {
    Ok(holevo_skew_mu(rho, sigma, Mu::new(mu)?))
}

fn holevo_skew_mu(rho: &DensityMatrix, sigma: &DensityMatrix, mu: Mu) -> f64 {
    let m = mu.get();
    let first = telescopic_mu(rho, sigma, mu);
    let second = telescopic_mu(sigma, rho, mu.complement());
    (m * first + (1.0 - m) * second) / binary_entropy(m, LogBase::Natural)
}

/// K_μ computed as the normalized Holevo quantity of the ensemble
/// {μ, ρ; 1−μ, σ}: [H(μρ+(1−μ)σ) − μH(ρ) − (1−μ)H(σ)] / H({μ, 1−μ}).
pub fn normalized_holevo_chi(rho: &DensityMatrix, sigma: &DensityMatrix, mu: f64) -> Result<f64> {
    let mu = Mu::new(mu)?.get();
    let mixture = rho.mix_unchecked(mu, sigma);
    let chi = von_neumann_entropy(&mixture)
        - mu * von_neumann_entropy(rho)
        - (1.0 - mu) * von_neumann_entropy(sigma);
    Ok(chi / binary_entropy(mu, LogBase::Natural))
}

/// Quantum Jensen-Shannon divergence in bits.
///
/// Evaluated as S(m) − [S(ρ) + S(σ)]/2, which equals the average relative
/// entropy to the midpoint m but vanishes exactly when ρ = σ; the square root
/// taken by the metric would otherwise turn O(ε) roundoff into O(√ε).
pub fn jensen_shannon(rho: &DensityMatrix, sigma: &DensityMatrix) -> f64 {
    let midpoint = rho.mix_unchecked(0.5, sigma);
    let j = von_neumann_entropy(&midpoint)
        - 0.5 * (von_neumann_entropy(rho) + von_neumann_entropy(sigma));
    j / LN_2
}

/// ½‖ρ − σ‖₁ from the eigenvalues of the Hermitian difference.
pub fn trace_distance(rho: &DensityMatrix, sigma: &DensityMatrix) -> f64 {
    let diff = rho.matrix() - sigma.matrix();
    let eig = crate::qubit::eigendecompose(&diff);
    0.5 * (eig.values[0].abs() + eig.values[1].abs())
}

pub fn evaluate(kind: QuantifierKind, rho: &DensityMatrix, sigma: &DensityMatrix) -> f64 {
    match kind {
        QuantifierKind::TraceDistance => trace_distance(rho, sigma),
        QuantifierKind::SqrtJensenShannon => jensen_shannon(rho, sigma).max(0.0).sqrt(),
        QuantifierKind::QuantumSkew(mu) => quantum_skew_mu(rho, sigma, mu),
        QuantifierKind::HolevoSkew(mu) => holevo_skew_mu(rho, sigma, mu),
    }
}

/// ς_μ, the constant of the fourth-root triangle bound for S_μ.
pub fn sigma_mu(mu: f64) -> Result<f64> {
    Ok(skew_triangle_constant(Mu::new(mu)?))
}

fn skew_triangle_constant(mu: Mu) -> f64 {
    let m = mu.get();
    let h = binary_entropy(m, LogBase::Natural);
    // ln³μ · ln³(1−μ) is a product of two negatives
    let logs = (m.ln() * (1.0 - m).ln()).powi(3);
    (1.0 / (m * (1.0 - m))).ln() * (m * (1.0 - m) / (2.0 * h * logs)).powf(0.25)
}

/// κ_μ, the constant of the fourth-root triangle bound for K_μ.
pub fn kappa_mu(mu: f64) -> Result<f64> {
    Ok(holevo_triangle_constant(Mu::new(mu)?))
}

fn holevo_triangle_constant(mu: Mu) -> f64 {
    let m = mu.get();
    let h = binary_entropy(m, LogBase::Natural);
    (8.0 * m * (1.0 - m) / h.powi(3)).powf(0.25)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qubit::{equatorial_pair, from_bloch, random_state, BlochVector, Mat2};
    use approx::assert_abs_diff_eq;
    use num_complex::Complex64;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn diag(a: f64, b: f64) -> DensityMatrix {
        DensityMatrix::new(Mat2::new(
            Complex64::from(a),
            Complex64::from(0.0),
            Complex64::from(0.0),
            Complex64::from(b),
        ))
        .unwrap()
    }

    /// S(A, B) from Bloch vectors alone: for B = (I + b·σ)/2,
    /// ln B = ½ln((1−|b|²)/4)·I + artanh|b|·(b̂·σ).
    fn bloch_relative_entropy(a: BlochVector, b: BlochVector) -> f64 {
        let tr_a_ln = |v: BlochVector, along: f64| {
            let n = v.norm();
            0.5 * ((1.0 - n * n) / 4.0).ln() + if n > 0.0 { n.atanh() * along / n } else { 0.0 }
        };
        let dot = a.x * b.x + a.y * b.y + a.z * b.z;
        let an = a.norm();
        tr_a_ln(a, an * an) - tr_a_ln(b, dot)
    }

    #[test]
    fn trace_distance_examples() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let rho = random_state(&mut rng);
        assert_eq!(trace_distance(&rho, &rho), 0.0);
        assert_eq!(trace_distance(&diag(1.0, 0.0), &diag(0.0, 1.0)), 1.0);
        let plus = from_bloch(BlochVector::new(1.0, 0.0, 0.0)).unwrap();
        assert_abs_diff_eq!(
            trace_distance(&plus, &DensityMatrix::maximally_mixed()),
            0.5,
            epsilon = 1e-15
        );
    }

    #[test]
    fn trace_distance_is_half_bloch_distance() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for _ in 0..200 {
            let a = random_state(&mut rng);
            let b = random_state(&mut rng);
            let half = 0.5 * crate::qubit::to_bloch(&a).distance(&crate::qubit::to_bloch(&b));
            assert_abs_diff_eq!(trace_distance(&a, &b), half, epsilon = 1e-14);
        }
    }

    #[test]
    fn relative_entropy_examples() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let rho = random_state(&mut rng);
        assert_abs_diff_eq!(relative_entropy(&rho, &rho), 0.0, epsilon = 1e-14);

        let pure = from_bloch(BlochVector::new(0.0, 0.6, 0.8)).unwrap();
        assert_abs_diff_eq!(
            relative_entropy(&pure, &DensityMatrix::maximally_mixed()),
            LN_2,
            epsilon = 1e-14
        );
        assert_eq!(
            relative_entropy(&diag(1.0, 0.0), &diag(0.0, 1.0)),
            f64::INFINITY
        );

        let (p1, p2) = equatorial_pair(0.7);
        assert_eq!(relative_entropy(&p1, &p2), f64::INFINITY);
    }

    #[test]
    fn relative_entropy_matches_bloch_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for _ in 0..500 {
            let a = crate::qubit::random_bloch(&mut rng).scaled(0.999);
            let b = crate::qubit::random_bloch(&mut rng).scaled(0.999);
            let direct = relative_entropy(&from_bloch(a).unwrap(), &from_bloch(b).unwrap());
            let oracle = bloch_relative_entropy(a, b);
            assert!(
                (direct - oracle).abs() <= 1e-10 * (1.0 + oracle),
                "{direct} vs {oracle}"
            );
        }
    }

    #[test]
    fn telescopic_range_and_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..500 {
            let a = crate::qubit::random_bloch(&mut rng);
            let b = crate::qubit::random_bloch(&mut rng);
            let (ra, rb) = (from_bloch(a).unwrap(), from_bloch(b).unwrap());
            let value = telescopic(&ra, &rb, 0.25).unwrap();
            assert!((-1e-12..=4f64.ln() + 1e-12).contains(&value));
            let mix = BlochVector::new(
                0.25 * a.x + 0.75 * b.x,
                0.25 * a.y + 0.75 * b.y,
                0.25 * a.z + 0.75 * b.z,
            );
            // the oracle blows up on exactly pure arguments; samples are interior
            if a.norm() < 0.999999 && mix.norm() < 0.999999 {
                let oracle = bloch_relative_entropy(a, mix);
                assert!((value - oracle).abs() <= 1e-9, "{value} vs {oracle}");
            }
        }
    }

    #[test]
    fn telescopic_saturates_on_orthogonal_states() {
        let (p1, p2) = equatorial_pair(0.0);
        for &mu in &[0.1, 0.25, 0.5, 0.9] {
            assert_abs_diff_eq!(
                telescopic(&p1, &p2, mu).unwrap(),
                (1.0 / mu).ln(),
                epsilon = 1e-12
            );
            assert_abs_diff_eq!(telescopic(&p1, &p1, mu).unwrap(), 0.0, epsilon = 1e-14);
        }
    }

    #[test]
    fn mu_outside_unit_interval_is_rejected() {
        let rho = DensityMatrix::maximally_mixed();
        for &mu in &[0.0, 1.0, -0.5, 1.5, f64::NAN] {
            assert!(matches!(
                telescopic(&rho, &rho, mu),
                Err(Error::InvalidParameter(_))
            ));
            assert!(quantum_skew(&rho, &rho, mu).is_err());
            assert!(holevo_skew(&rho, &rho, mu).is_err());
            assert!(sigma_mu(mu).is_err());
            assert!(kappa_mu(mu).is_err());
            assert!(Mu::new(mu).is_err());
        }
    }

    #[test]
    fn skew_divergences_on_equal_and_orthogonal_pairs() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let rho = random_state(&mut rng);
        let (p1, p2) = equatorial_pair(1.3);
        for &mu in &[0.25, 0.5, 0.8] {
            assert_abs_diff_eq!(quantum_skew(&rho, &rho, mu).unwrap(), 0.0, epsilon = 1e-14);
            assert_abs_diff_eq!(holevo_skew(&rho, &rho, mu).unwrap(), 0.0, epsilon = 1e-14);
            assert_abs_diff_eq!(quantum_skew(&p1, &p2, mu).unwrap(), 1.0, epsilon = 1e-12);
            assert_abs_diff_eq!(holevo_skew(&p1, &p2, mu).unwrap(), 1.0, epsilon = 1e-12);
        }
        assert_abs_diff_eq!(jensen_shannon(&rho, &rho), 0.0, epsilon = 1e-14);
        assert_abs_diff_eq!(jensen_shannon(&p1, &p2), 1.0, epsilon = 1e-12);
    }

    #[test]
    fn quantum_skew_exchange_symmetry() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..100 {
            let a = random_state(&mut rng);
            let b = random_state(&mut rng);
            let mu = rng.gen_range(0.05..0.95);
            let lhs = quantum_skew(&a, &b, mu).unwrap();
            let rhs = quantum_skew(&b, &a, 1.0 - mu).unwrap();
            assert_abs_diff_eq!(lhs, rhs, epsilon = 1e-12);
        }
    }

    #[test]
    fn holevo_skew_dual_formulas_agree() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        for _ in 0..100 {
            let a = random_state(&mut rng);
            let b = random_state(&mut rng);
            let mu = rng.gen_range(0.05..0.95);
            let telescopic_sum = holevo_skew(&a, &b, mu).unwrap();
            let chi = normalized_holevo_chi(&a, &b, mu).unwrap();
            assert_abs_diff_eq!(telescopic_sum, chi, epsilon = 1e-10);
        }
    }

    #[test]
    fn jensen_shannon_is_the_half_skew() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for _ in 0..100 {
            let a = random_state(&mut rng);
            let b = random_state(&mut rng);
            let j = jensen_shannon(&a, &b);
            assert_abs_diff_eq!(j, quantum_skew(&a, &b, 0.5).unwrap(), epsilon = 1e-10);
            assert_abs_diff_eq!(j, holevo_skew(&a, &b, 0.5).unwrap(), epsilon = 1e-10);
        }
    }

    #[test]
    fn evaluate_dispatch() {
        let mut rng = ChaCha8Rng::seed_from_u64(10);
        let rho = random_state(&mut rng);
        let sigma = random_state(&mut rng);
        assert_eq!(evaluate(QuantifierKind::TraceDistance, &rho, &rho), 0.0);
        let (p1, p2) = equatorial_pair(0.0);
        assert_abs_diff_eq!(
            evaluate(QuantifierKind::SqrtJensenShannon, &p1, &p2),
            1.0,
            epsilon = 1e-12
        );
        assert_eq!(
            evaluate(QuantifierKind::HolevoSkew(Mu::QUARTER), &rho, &sigma),
            holevo_skew(&rho, &sigma, 0.25).unwrap()
        );
        assert_eq!(
            evaluate(QuantifierKind::QuantumSkew(Mu::QUARTER), &rho, &sigma),
            quantum_skew(&rho, &sigma, 0.25).unwrap()
        );
        assert_eq!(
            evaluate(QuantifierKind::SqrtJensenShannon, &rho, &sigma),
            jensen_shannon(&rho, &sigma).sqrt()
        );
    }

    #[test]
    fn triangle_constants() {
        // (2 / ln³2)^{1/4}
        let expected = 1.565_447_124_239_213_4;
        assert_abs_diff_eq!(kappa_mu(0.5).unwrap(), expected, epsilon = 1e-12);
        assert_abs_diff_eq!(
            sigma_mu(0.5).unwrap(),
            kappa_mu(0.5).unwrap(),
            epsilon = 1e-12
        );
        for &mu in &[0.25, 0.1, 0.9] {
            let s = sigma_mu(mu).unwrap();
            let k = kappa_mu(mu).unwrap();
            assert!(s.is_finite() && s > 0.0);
            assert!(k.is_finite() && k > 0.0);
        }
        assert_abs_diff_eq!(
            sigma_mu(0.25).unwrap(),
            2.131_410_792_448_2,
            epsilon = 1e-12
        );
        assert_abs_diff_eq!(
            kappa_mu(0.25).unwrap(),
            1.704_222_892_134_404,
            epsilon = 1e-12
        );
        assert_eq!(
            QuantifierKind::TraceDistance.triangle_bound(),
            TriangleBound::identity()
        );
        let bound = QuantifierKind::HolevoSkew(Mu::QUARTER).triangle_bound();
        assert_abs_diff_eq!(bound.apply(16.0), 2.0 * kappa_mu(0.25).unwrap());
    }

    #[test]
    fn binary_entropy_examples() {
        assert_eq!(binary_entropy(0.5, LogBase::Two), 1.0);
        assert_eq!(binary_entropy(0.0, LogBase::Natural), 0.0);
        assert_eq!(binary_entropy(1.0, LogBase::Two), 0.0);
        let direct = -(0.25 * 0.25f64.ln()) - 0.75 * 0.75f64.ln();
        assert_abs_diff_eq!(
            binary_entropy(0.25, LogBase::Natural),
            direct,
            epsilon = 1e-16
        );
    }

    #[test]
    fn labels_and_parsing() {
        let labels: Vec<String> = QuantifierKind::standard_set()
            .iter()
            .map(|k| k.label())
            .collect();
        assert_eq!(labels, ["D", "sqrtJ", "K14", "S14"]);
        assert_eq!(
            QuantifierKind::parse("K", Mu::new(0.3).unwrap())
                .unwrap()
                .label(),
            "K0.3"
        );
        assert!(QuantifierKind::parse("X", Mu::QUARTER).is_err());
    }
}
