//! Exact 2×2 density-matrix algebra.
//!
//! States are stored as validated [`DensityMatrix`] values; every constructor
//! checks hermiticity, unit trace and positivity to `STATE_TOL`. Random states
//! and channels take a caller-owned generator so property tests stay
//! reproducible from a seed.

use nalgebra::{Matrix2, Vector2};
use num_complex::Complex64;
use rand::Rng;

use crate::{Error, Result};

pub type Mat2 = Matrix2<Complex64>;

/// Tolerance on the density-matrix invariants.
pub const STATE_TOL: f64 = 1e-12;
/// Tolerance on Σ K†K = I for Kraus channels.
pub const CHANNEL_TOL: f64 = 1e-10;
/// Eigenvalue gap below which a spectrum is treated as degenerate.
pub const DEGENERACY_GAP: f64 = 1e-14;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// Real Bloch-ball coordinates of a qubit state.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BlochVector {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl BlochVector {
    pub const ORIGIN: BlochVector = BlochVector::new(0.0, 0.0, 0.0);

    pub const fn new(x: f64, y: f64, z: f64) -> Self {
        Self { x, y, z }
    }

    pub fn norm(&self) -> f64 {
        (self.x * self.x + self.y * self.y + self.z * self.z).sqrt()
    }

    pub fn distance(&self, other: &BlochVector) -> f64 {
        let (dx, dy, dz) = (self.x - other.x, self.y - other.y, self.z - other.z);
        (dx * dx + dy * dy + dz * dz).sqrt()
    }

    pub fn scaled(&self, factor: f64) -> Self {
        Self::new(self.x * factor, self.y * factor, self.z * factor)
    }
}

/// A 2×2 Hermitian, positive semidefinite, unit-trace matrix.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DensityMatrix(Mat2);

impl DensityMatrix {
    /// Validates `m` against the state invariants.
    pub fn new(m: Mat2) -> Result<Self> {
        let herm_err = (m - m.adjoint())
            .iter()
            .map(|c| c.norm())
            .fold(0.0, f64::max);
        if !herm_err.is_finite() || herm_err > STATE_TOL {
            return Err(Error::state(format!(
                "not Hermitian (deviation {herm_err:e})"
            )));
        }
        let trace = m.trace();
        if (trace - ONE).norm() > STATE_TOL {
            return Err(Error::state(format!("trace {trace} differs from 1")));
        }
        let eig = eigendecompose(&m);
        if eig.values[1] < -STATE_TOL {
            return Err(Error::state(format!(
                "negative eigenvalue {:e}",
                eig.values[1]
            )));
        }
        Ok(Self(hermitize(&m)))
    }

    /// Hermitizes and renormalizes the trace of `m`, then validates. Used for
    /// outputs of exact maps where rounding could otherwise trip the trace
    /// check.
    pub(crate) fn from_map_output(m: Mat2) -> Result<Self> {
        let h = hermitize(&m);
        let trace = h.trace().re;
        Self::new(h.map(|c| c / trace))
    }

    pub fn maximally_mixed() -> Self {
        Self(Mat2::new(
            Complex64::new(0.5, 0.0),
            ZERO,
            ZERO,
            Complex64::new(0.5, 0.0),
        ))
    }

    /// Pure state |ψ⟩⟨ψ| for a (not necessarily normalized) ket.
    pub fn from_ket(ket: &Vector2<Complex64>) -> Result<Self> {
        let norm2 = ket.norm_squared();
        if norm2 <= 0.0 || !norm2.is_finite() {
            return Err(Error::state("ket has zero or non-finite norm"));
        }
        Self::from_map_output(ket * ket.adjoint())
    }

    pub fn matrix(&self) -> &Mat2 {
        &self.0
    }

    /// Convex combination `weight·self + (1−weight)·other`.
    pub fn mix(&self, weight: f64, other: &DensityMatrix) -> Result<Self> {
        if !(0.0..=1.0).contains(&weight) {
            return Err(Error::param(format!(
                "mixing weight {weight} outside [0,1]"
            )));
        }
        Ok(self.mix_unchecked(weight, other))
    }

    pub(crate) fn mix_unchecked(&self, weight: f64, other: &DensityMatrix) -> Self {
        Self(self.0 * Complex64::from(weight) + other.0 * Complex64::from(1.0 - weight))
    }

    pub fn eigen(&self) -> Eigen {
        eigendecompose(&self.0)
    }

    /// Eigenvalues, descending, with values in [−STATE_TOL, 0) clamped to 0.
    pub fn spectrum(&self) -> [f64; 2] {
        let values = self.eigen().values;
        [values[0].max(0.0), values[1].max(0.0)]
    }

    pub fn purity(&self) -> f64 {
        (self.0 * self.0).trace().re
    }
}

fn hermitize(m: &Mat2) -> Mat2 {
    (m + m.adjoint()).map(|c| c * 0.5)
}

/// Bloch vector to density matrix, ρ = (I + v·σ)/2.
pub fn from_bloch(v: BlochVector) -> Result<DensityMatrix> {
    let norm = v.norm();
    if !norm.is_finite() || norm > 1.0 + STATE_TOL {
        return Err(Error::state(format!("Bloch vector norm {norm} exceeds 1")));
    }
    let m = Mat2::new(
        Complex64::new(0.5 * (1.0 + v.z), 0.0),
        Complex64::new(0.5 * v.x, -0.5 * v.y),
        Complex64::new(0.5 * v.x, 0.5 * v.y),
        Complex64::new(0.5 * (1.0 - v.z), 0.0),
    );
    Ok(DensityMatrix(m))
}

pub fn to_bloch(rho: &DensityMatrix) -> BlochVector {
    let m = rho.matrix();
    let off = m[(1, 0)];
    BlochVector::new(2.0 * off.re, 2.0 * off.im, (m[(0, 0)] - m[(1, 1)]).re)
}

/// Spectral decomposition of a 2×2 Hermitian matrix.
#[derive(Debug, Clone, Copy)]
pub struct Eigen {
    /// Sorted descending.
    pub values: [f64; 2],
    /// Orthonormal eigenvectors matching `values`.
    pub vectors: [Vector2<Complex64>; 2],
}

impl Eigen {
    pub fn projector(&self, i: usize) -> Mat2 {
        self.vectors[i] * self.vectors[i].adjoint()
    }

    pub fn reconstruct(&self) -> Mat2 {
        self.projector(0) * Complex64::from(self.values[0])
            + self.projector(1) * Complex64::from(self.values[1])
    }
}

/// Closed-form eigendecomposition of a Hermitian 2×2 matrix.
///
/// Writing the matrix as `[[m+δ, b], [b*, m−δ]]`, the eigenvalues are
/// `m ± √(δ² + |b|²)`. The eigenvector formula is picked by the sign of `δ` so
/// that no cancellation occurs.
pub fn eigendecompose(h: &Mat2) -> Eigen {
    let a = h[(0, 0)].re;
    let d = h[(1, 1)].re;
    // average the two off-diagonal entries so slightly non-Hermitian inputs
    // still produce an orthonormal basis
    let b = (h[(0, 1)] + h[(1, 0)].conj()) * 0.5;
    let mean = 0.5 * (a + d);
    let delta = 0.5 * (a - d);
    let radius = delta.hypot(b.norm());
    let values = [mean + radius, mean - radius];

    if radius < DEGENERACY_GAP {
        return Eigen {
            values,
            vectors: [Vector2::new(ONE, ZERO), Vector2::new(ZERO, ONE)],
        };
    }

    let upper = if delta >= 0.0 {
        Vector2::new(Complex64::from(delta + radius), b.conj())
    } else {
        Vector2::new(b, Complex64::from(radius - delta))
    };
    let upper = upper.unscale(upper.norm());
    let lower = Vector2::new(-upper[1].conj(), upper[0].conj());
    Eigen {
        values,
        vectors: [upper, lower],
    }
}

/// The two orthogonal pure states (|1⟩ ± e^{iφ}|0⟩)/√2 on the equator.
///
/// The first state has Bloch vector (cos φ, −sin φ, 0), the second its
/// antipode.
pub fn equatorial_pair(phase: f64) -> (DensityMatrix, DensityMatrix) {
    let (s, c) = phase.sin_cos();
    let first = from_bloch(BlochVector::new(c, -s, 0.0)).expect("unit Bloch vector");
    let second = from_bloch(BlochVector::new(-c, s, 0.0)).expect("unit Bloch vector");
    (first, second)
}

/// Pure dephasing: coherences are scaled by e^{−Γ}, populations untouched.
pub fn dephase(rho: &DensityMatrix, gamma: f64) -> Result<DensityMatrix> {
    if gamma.is_nan() || gamma < 0.0 {
        return Err(Error::param(format!(
            "decoherence exponent must be non-negative, got {gamma}"
        )));
    }
    Ok(dephase_by_factor(rho, (-gamma).exp()))
}

/// Dephasing with the coherence factor `e^{−Γ}` given directly.
pub(crate) fn dephase_by_factor(rho: &DensityMatrix, factor: f64) -> DensityMatrix {
    let mut m = *rho.matrix();
    m[(0, 1)] *= factor;
    m[(1, 0)] *= factor;
    DensityMatrix(m)
}

/// Completely positive trace preserving map in Kraus form.
#[derive(Debug, Clone)]
pub struct KrausChannel {
    ops: Vec<Mat2>,
}

impl KrausChannel {
    pub fn new(ops: Vec<Mat2>) -> Result<Self> {
        if ops.is_empty() {
            return Err(Error::param("a channel needs at least one Kraus operator"));
        }
        let sum: Mat2 = ops.iter().map(|k| k.adjoint() * k).sum();
        let err = (sum - Mat2::identity())
            .iter()
            .map(|c| c.norm())
            .fold(0.0, f64::max);
        if !err.is_finite() || err > CHANNEL_TOL {
            return Err(Error::param(format!(
                "Kraus operators are not trace preserving (deviation {err:e})"
            )));
        }
        Ok(Self { ops })
    }

    pub fn kraus_ops(&self) -> &[Mat2] {
        &self.ops
    }

    pub fn apply(&self, rho: &DensityMatrix) -> DensityMatrix {
        let out: Mat2 = self
            .ops
            .iter()
            .map(|k| k * rho.matrix() * k.adjoint())
            .sum();
        DensityMatrix::from_map_output(out).expect("CPTP image of a state is a state")
    }
}

/// Uniform sample from the Bloch ball.
pub fn random_bloch<R: Rng + ?Sized>(rng: &mut R) -> BlochVector {
    loop {
        let v = BlochVector::new(
            rng.gen_range(-1.0..=1.0),
            rng.gen_range(-1.0..=1.0),
            rng.gen_range(-1.0..=1.0),
        );
        if v.norm() <= 1.0 {
            return v;
        }
    }
}

/// Uniform sample from the Bloch sphere (a pure state).
pub fn random_pure_bloch<R: Rng + ?Sized>(rng: &mut R) -> BlochVector {
    loop {
        let v = random_bloch(rng);
        let n = v.norm();
        if n > 1e-3 {
            return v.scaled(1.0 / n);
        }
    }
}

pub fn random_state<R: Rng + ?Sized>(rng: &mut R) -> DensityMatrix {
    from_bloch(random_bloch(rng)).expect("sample lies in the ball")
}

pub fn random_pure_state<R: Rng + ?Sized>(rng: &mut R) -> DensityMatrix {
    from_bloch(random_pure_bloch(rng)).expect("sample lies on the sphere")
}

/// Random channel with `num_kraus` operators.
///
/// Draws complex matrices `G_k` with uniform entries and sets
/// `K_k = G_k S^{-1/2}` with `S = Σ G_k†G_k`, which makes the set trace
/// preserving. Ill-conditioned draws are rejected.
pub fn random_channel<R: Rng + ?Sized>(rng: &mut R, num_kraus: usize) -> Result<KrausChannel> {
    if !(1..=4).contains(&num_kraus) {
        return Err(Error::param(format!(
            "number of Kraus operators must be in 1..=4, got {num_kraus}"
        )));
    }
    loop {
        let raw: Vec<Mat2> = (0..num_kraus)
            .map(|_| {
                Mat2::from_fn(|_, _| {
                    Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
                })
            })
            .collect();
        let gram: Mat2 = raw.iter().map(|g| g.adjoint() * g).sum();
        let eig = eigendecompose(&gram);
        if eig.values[1] < 1e-6 * eig.values[0] {
            continue;
        }
        let inv_sqrt = eig.projector(0) * Complex64::from(eig.values[0].powf(-0.5))
            + eig.projector(1) * Complex64::from(eig.values[1].powf(-0.5));
        let ops = raw.iter().map(|g| g * inv_sqrt).collect();
        return KrausChannel::new(ops);
    }
}
