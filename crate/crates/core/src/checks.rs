//! Seeded property suites for the quantifier axioms, the triangle-like
//! inequalities and the decoherence function.
//!
//! Every instance draws from its own generator, seeded from the run seed and
//! the instance index on a per-suite stream, so a reported counterexample can
//! be regenerated in isolation with [`instance_rng`].

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::dephasing::{gamma_closed, gamma_quadrature, DephasingParams, MatsubaraTruncation};
use crate::quantifiers::{
    evaluate, jensen_shannon, kappa_mu, relative_entropy, sigma_mu, trace_distance, Mu,
    QuantifierKind,
};
use crate::qubit::{
    from_bloch, random_bloch, random_channel, random_pure_bloch, to_bloch, DensityMatrix,
};

/// Deliberate faults for exercising the harness itself.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Corruption {
    /// Replace 𝔖 by 1 − 𝔖 in the contractivity suite.
    NegateContractivity,
}

#[derive(Debug, Clone)]
pub struct CheckConfig {
    pub seed: u64,
    pub samples: usize,
    pub corruption: Option<Corruption>,
    /// Include the (slower) quadrature cross-check of Γ.
    pub dephasing: bool,
}

impl Default for CheckConfig {
    fn default() -> Self {
        Self {
            seed: 0,
            samples: 1000,
            corruption: None,
            dephasing: true,
        }
    }
}

/// One failed instance. The property asserted is `lhs − rhs ≤ tol`.
#[derive(Debug, Clone, PartialEq)]
pub struct Counterexample {
    pub suite: &'static str,
    pub subject: String,
    pub instance: u64,
    pub lhs: f64,
    pub rhs: f64,
    pub tol: f64,
    /// Human-readable sampled inputs.
    pub inputs: String,
}

impl Counterexample {
    pub fn excess(&self) -> f64 {
        self.lhs - self.rhs
    }
}

/// Pass counts for one subject (a quantifier, or a parameter set) in a suite.
#[derive(Debug, Clone, PartialEq)]
pub struct SubjectCount {
    pub subject: String,
    pub passed: usize,
    pub total: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SuiteReport {
    pub name: &'static str,
    pub counts: Vec<SubjectCount>,
    pub failures: Vec<Counterexample>,
}

impl SuiteReport {
    pub fn passed(&self) -> usize {
        self.counts.iter().map(|c| c.passed).sum()
    }

    pub fn total(&self) -> usize {
        self.counts.iter().map(|c| c.total).sum()
    }

    pub fn ok(&self) -> bool {
        self.failures.is_empty()
    }
}

/// Quantifier suites, in report order.
pub const QUANTIFIER_SUITES: [&str; 12] = [
    "symmetry", "exchange", "bound", "indid", "normorto", "cpcontra", "b1", "b2", "tlikeS",
    "tlikeK", "tlikebis", "triangle",
];
/// Decoherence-function suites, in report order.
pub const DEPHASING_SUITES: [&str; 3] = ["gamma_oracle", "gamma_temperature", "gamma_kappa_linear"];

/// Generator for instance `instance` of suite `suite`.
pub fn instance_rng(seed: u64, suite: &str, instance: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ instance.wrapping_mul(0x9E37_79B9_7F4A_7C15));
    rng.set_stream(suite_stream(suite));
    rng
}

fn suite_stream(name: &str) -> u64 {
    // FNV-1a
    name.bytes().fold(0xcbf2_9ce4_8422_2325, |h, b| {
        (h ^ b as u64).wrapping_mul(0x0000_0100_0000_01b3)
    })
}

/// Half interior states, half pure states.
fn sample_state(rng: &mut ChaCha8Rng) -> DensityMatrix {
    let v = if rng.gen_bool(0.5) {
        random_bloch(rng)
    } else {
        random_pure_bloch(rng)
    };
    from_bloch(v).expect("sample lies in the ball")
}

fn sample_mu(rng: &mut ChaCha8Rng) -> f64 {
    if rng.gen_bool(0.5) {
        0.25
    } else {
        rng.gen_range(0.02..0.98)
    }
}

fn show(states: &[&DensityMatrix]) -> String {
    states
        .iter()
        .map(|s| {
            let v = to_bloch(s);
            format!("[{:e} {:e} {:e}]", v.x, v.y, v.z)
        })
        .collect::<Vec<_>>()
        .join(" ")
}

/// Result of one instance: the property is `lhs − rhs ≤ tol`.
struct Probe {
    lhs: f64,
    rhs: f64,
    inputs: String,
}

fn probe(lhs: f64, rhs: f64, inputs: String) -> Probe {
    Probe { lhs, rhs, inputs }
}

struct Suite<'a> {
    name: &'static str,
    cfg: &'a CheckConfig,
    counts: Vec<SubjectCount>,
    failures: Vec<Counterexample>,
}

impl<'a> Suite<'a> {
    fn new(name: &'static str, cfg: &'a CheckConfig) -> Self {
        Self {
            name,
            cfg,
            counts: Vec::new(),
            failures: Vec::new(),
        }
    }

    fn run<F>(&mut self, subject: String, tol: f64, mut check: F)
    where
        F: FnMut(&mut ChaCha8Rng) -> Probe,
    {
        self.run_n(subject, self.cfg.samples, tol, |rng, _| check(rng));
    }

    fn run_n<F>(&mut self, subject: String, n: usize, tol: f64, mut check: F)
    where
        F: FnMut(&mut ChaCha8Rng, usize) -> Probe,
    {
        let mut passed = 0;
        for i in 0..n {
            let mut rng = instance_rng(self.cfg.seed, self.name, i as u64);
            let p = check(&mut rng, i);
            // NaN fails
            if p.lhs - p.rhs <= tol {
                passed += 1;
            } else {
                self.failures.push(Counterexample {
                    suite: self.name,
                    subject: subject.clone(),
                    instance: i as u64,
                    lhs: p.lhs,
                    rhs: p.rhs,
                    tol,
                    inputs: p.inputs,
                });
            }
        }
        self.counts.push(SubjectCount {
            subject,
            passed,
            total: n,
        });
    }

    fn finish(self) -> SuiteReport {
        SuiteReport {
            name: self.name,
            counts: self.counts,
            failures: self.failures,
        }
    }
}

pub fn run_quantifier_suite(name: &str, cfg: &CheckConfig) -> Option<SuiteReport> {
    let name = *QUANTIFIER_SUITES.iter().find(|&&s| s == name)?;
    let kinds = QuantifierKind::standard_set();
    let mut suite = Suite::new(name, cfg);
    match name {
        "symmetry" => {
            for &kind in &kinds {
                suite.run(kind.label(), 1e-10, |rng| {
                    let (a, b) = (sample_state(rng), sample_state(rng));
                    let diff = (evaluate(kind, &a, &b) - evaluate(kind, &b, &a)).abs();
                    probe(diff, 0.0, show(&[&a, &b]))
                });
            }
        }
        "exchange" => {
            // 𝔖_μ(ρ,σ) = 𝔖_{1−μ}(σ,ρ) for the skew divergences
            for make in [QuantifierKind::HolevoSkew, QuantifierKind::QuantumSkew] {
                suite.run(make(Mu::QUARTER).label(), 1e-10, |rng| {
                    let (a, b) = (sample_state(rng), sample_state(rng));
                    let mu = Mu::new(sample_mu(rng)).expect("mu in (0,1)");
                    let lhs = evaluate(make(mu), &a, &b);
                    let rhs = evaluate(make(mu.complement()), &b, &a);
                    probe(
                        (lhs - rhs).abs(),
                        0.0,
                        format!("{} mu={}", show(&[&a, &b]), mu.get()),
                    )
                });
            }
        }
        "bound" => {
            for &kind in &kinds {
                suite.run(kind.label(), 1e-10, |rng| {
                    let (a, b) = (sample_state(rng), sample_state(rng));
                    let v = evaluate(kind, &a, &b);
                    // distance outside [0, 1]
                    probe((-v).max(v - 1.0).max(0.0), 0.0, show(&[&a, &b]))
                });
            }
        }
        "indid" => {
            for &kind in &kinds {
                suite.run(kind.label(), 1e-8, |rng| {
                    let a = sample_state(rng);
                    probe(evaluate(kind, &a, &a), 0.0, show(&[&a]))
                });
            }
        }
        "normorto" => {
            for &kind in &kinds {
                suite.run(kind.label(), 1e-8, |rng| {
                    let v = random_pure_bloch(rng);
                    let a = from_bloch(v).expect("pure");
                    let b = from_bloch(v.scaled(-1.0)).expect("pure");
                    probe(1.0 - evaluate(kind, &a, &b), 0.0, show(&[&a, &b]))
                });
            }
        }
        "cpcontra" => {
            let corrupt = cfg.corruption == Some(Corruption::NegateContractivity);
            for &kind in &kinds {
                let value = |a: &DensityMatrix, b: &DensityMatrix| {
                    let v = evaluate(kind, a, b);
                    if corrupt {
                        1.0 - v
                    } else {
                        v
                    }
                };
                suite.run(kind.label(), 1e-9, |rng| {
                    let (a, b) = (sample_state(rng), sample_state(rng));
                    let kraus = rng.gen_range(1..=4);
                    let channel = random_channel(rng, kraus).expect("valid Kraus count");
                    let after = value(&channel.apply(&a), &channel.apply(&b));
                    probe(
                        after,
                        value(&a, &b),
                        format!("{} kraus={kraus}", show(&[&a, &b])),
                    )
                });
            }
        }
        "b1" => suite.run("telescopic".into(), 1e-9, |rng| {
            let (s, r1, r2) = (sample_state(rng), sample_state(rng), sample_state(rng));
            let mu = sample_mu(rng);
            let lhs = relative_entropy(&s, &s.mix_unchecked(mu, &r1))
                - relative_entropy(&s, &s.mix_unchecked(mu, &r2));
            let rhs = ((1.0 - mu) / mu * trace_distance(&r1, &r2)).ln_1p();
            probe(lhs, rhs, format!("{} mu={mu}", show(&[&s, &r1, &r2])))
        }),
        "b2" => suite.run("telescopic".into(), 1e-9, |rng| loop {
            let (s, r1, r2) = (sample_state(rng), sample_state(rng), sample_state(rng));
            let d = trace_distance(&r1, &r2);
            if d <= 1e-6 {
                continue;
            }
            let mu = sample_mu(rng);
            let lhs = relative_entropy(&r1, &r1.mix_unchecked(mu, &s))
                - relative_entropy(&r2, &r2.mix_unchecked(mu, &s));
            let rhs = d * ((1.0 - mu) / (mu * d)).ln_1p();
            break probe(lhs, rhs, format!("{} mu={mu}", show(&[&s, &r1, &r2])));
        }),
        "tlikeS" | "tlikeK" => {
            let skew = name == "tlikeS";
            let make = if skew {
                QuantifierKind::QuantumSkew
            } else {
                QuantifierKind::HolevoSkew
            };
            suite.run(make(Mu::QUARTER).label(), 1e-9, |rng| {
                let (a, b, c) = (sample_state(rng), sample_state(rng), sample_state(rng));
                let mu = sample_mu(rng);
                let kind = make(Mu::new(mu).expect("mu in (0,1)"));
                let constant = if skew { sigma_mu(mu) } else { kappa_mu(mu) }.expect("mu in (0,1)");
                let lhs = evaluate(kind, &a, &b) - evaluate(kind, &a, &c);
                let rhs = constant * evaluate(kind, &b, &c).max(0.0).powf(0.25);
                probe(lhs, rhs, format!("{} mu={mu}", show(&[&a, &b, &c])))
            });
        }
        "tlikebis" => suite.run(QuantifierKind::SqrtJensenShannon.label(), 1e-9, |rng| {
            let (a, b, c) = (sample_state(rng), sample_state(rng), sample_state(rng));
            let root = |x: &DensityMatrix, y: &DensityMatrix| jensen_shannon(x, y).max(0.0).sqrt();
            probe(
                root(&a, &b) - root(&a, &c),
                root(&b, &c),
                show(&[&a, &b, &c]),
            )
        }),
        "triangle" => suite.run(QuantifierKind::TraceDistance.label(), 1e-9, |rng| {
            let (a, b, c) = (sample_state(rng), sample_state(rng), sample_state(rng));
            probe(
                (trace_distance(&a, &b) - trace_distance(&a, &c)).abs(),
                trace_distance(&b, &c),
                show(&[&a, &b, &c]),
            )
        }),
        _ => unreachable!("suite list is exhaustive"),
    }
    Some(suite.finish())
}

pub fn run_dephasing_suite(name: &str, cfg: &CheckConfig) -> Option<SuiteReport> {
    let name = *DEPHASING_SUITES.iter().find(|&&s| s == name)?;
    let trunc = MatsubaraTruncation::default();
    let mut suite = Suite::new(name, cfg);
    let params =
        |kappa: f64, beta: f64| DephasingParams::new(kappa, 0.5, 1.0, beta).expect("valid");
    let inputs = |t: f64, kappa: f64, beta: f64| format!("t={t} kappa={kappa} eta=0.5 beta={beta}");
    match name {
        "gamma_oracle" => {
            let mut grid = Vec::new();
            for &t in &[1.0, 5.0, 10.0] {
                for &beta in &[0.1, 1.0, 10.0] {
                    for &kappa in &[0.1, 1.0] {
                        grid.push((t, beta, kappa));
                    }
                }
            }
            // relative error against quadrature
            suite.run_n("closed_vs_quadrature".into(), grid.len(), 1e-6, |_, i| {
                let (t, beta, kappa) = grid[i];
                let p = params(kappa, beta);
                let err = match (gamma_closed(t, &p, &trunc), gamma_quadrature(t, &p, 1e-11)) {
                    (Ok(c), Ok(q)) => (c - q).abs() / q.max(1e-12),
                    _ => f64::INFINITY,
                };
                probe(err, 0.0, inputs(t, kappa, beta))
            });
        }
        "gamma_temperature" => {
            let betas = [0.1, 0.3, 1.0, 3.0, 10.0, 30.0];
            suite.run("kappa=0.1".into(), 1e-10, |rng| {
                let t = rng.gen_range(0.0..50.0);
                let i = rng.gen_range(0..betas.len() - 1);
                let hot = gamma_closed(t, &params(0.1, betas[i]), &trunc);
                let cold = gamma_closed(t, &params(0.1, betas[i + 1]), &trunc);
                let desc = format!("{} beta_cold={}", inputs(t, 0.1, betas[i]), betas[i + 1]);
                match (hot, cold) {
                    (Ok(h), Ok(c)) => probe(c, h, desc),
                    _ => probe(f64::INFINITY, 0.0, desc),
                }
            });
        }
        "gamma_kappa_linear" => {
            suite.run("eta=0.5".into(), 1e-10, |rng| {
                let t = rng.gen_range(0.0..50.0);
                let beta = rng.gen_range(0.1..20.0);
                let kappa = rng.gen_range(0.01..2.0);
                let single = gamma_closed(t, &params(kappa, beta), &trunc);
                let double = gamma_closed(t, &params(2.0 * kappa, beta), &trunc);
                let desc = inputs(t, kappa, beta);
                match (single, double) {
                    // relative deviation from Γ(2κ) = 2Γ(κ)
                    (Ok(s), Ok(d)) => probe((d - 2.0 * s).abs() / (1.0 + s.abs()), 0.0, desc),
                    _ => probe(f64::INFINITY, 0.0, desc),
                }
            });
        }
        _ => unreachable!("suite list is exhaustive"),
    }
    Some(suite.finish())
}

/// Runs every suite in report order.
pub fn run_all(cfg: &CheckConfig) -> Vec<SuiteReport> {
    let mut reports: Vec<SuiteReport> = QUANTIFIER_SUITES
        .iter()
        .filter_map(|name| run_quantifier_suite(name, cfg))
        .collect();
    if cfg.dephasing {
        reports.extend(
            DEPHASING_SUITES
                .iter()
                .filter_map(|name| run_dephasing_suite(name, cfg)),
        );
    }
    reports
}
