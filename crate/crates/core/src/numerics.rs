//! Small dense complex linear algebra used throughout the crate.
//!
//! Matrices are tiny (n ≤ 8), so everything is plain `DMatrix<Complex64>`
//! with nalgebra doing the factorizations. Hermitian matrices follow the
//! metric convention `m[(i, j)] = g_{i\bar j}`, so a vector `v` has squared
//! length `vᵀ g v̄`.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type C64 = Complex64;
pub type CMat = DMatrix<C64>;

pub const ZERO: C64 = C64::new(0.0, 0.0);
pub const ONE: C64 = C64::new(1.0, 0.0);

/// Tolerance ladder shared by the whole crate. Every field can be overridden
/// per call site (the CLI exposes them as `--tol-*`).
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Tolerances {
    /// Algebraic identities on exact inputs.
    pub algebraic: f64,
    /// Decompositions: eigen, Cholesky, frames.
    pub decomposition: f64,
    /// Curvature symmetries.
    pub symmetry: f64,
    /// Finite-difference comparisons.
    pub finite_difference: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            algebraic: 1e-12,
            decomposition: 1e-10,
            symmetry: 1e-8,
            finite_difference: 1e-4,
        }
    }
}

/// Smallest eigenvalue accepted as positive definite.
pub const PD_THRESHOLD: f64 = 1e-12;

/// A Hermitian matrix, symmetrized on construction.
#[derive(Clone, Debug, PartialEq)]
pub struct HermitianMatrix(CMat);

impl HermitianMatrix {
    /// Accepts `m` if it is Hermitian within `1e-12` relative to its largest
    /// entry, then replaces it by `(m + m†) / 2`.
    pub fn new(m: CMat) -> Result<Self> {
        Self::with_tolerance(m, Tolerances::default().algebraic)
    }

    pub fn with_tolerance(m: CMat, tol: f64) -> Result<Self> {
        if !m.is_square() {
            return Err(Error::DimensionMismatch {
                expected: m.nrows(),
                got: m.ncols(),
            });
        }
        let scale = m.iter().map(|z| z.norm()).fold(1.0_f64, f64::max);
        let asym = max_asymmetry(&m);
        if asym > tol * scale {
            return Err(Error::NotHermitian {
                asymmetry: asym,
                tolerance: tol * scale,
            });
        }
        Ok(Self::symmetrized(m))
    }

    /// Hermitian part `(m + m†) / 2` of any square matrix.
    pub fn symmetrized(m: CMat) -> Self {
        let adj = m.adjoint();
        Self((m + adj) * C64::new(0.5, 0.0))
    }

    pub fn identity(n: usize) -> Self {
        Self(CMat::identity(n, n))
    }

    pub fn from_real_diagonal(d: &[f64]) -> Self {
        let n = d.len();
        Self(CMat::from_fn(n, n, |i, j| if i == j { C64::new(d[i], 0.0) } else { ZERO }))
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    pub fn matrix(&self) -> &CMat {
        &self.0
    }

    pub fn into_matrix(self) -> CMat {
        self.0
    }

    pub fn get(&self, i: usize, j: usize) -> C64 {
        self.0[(i, j)]
    }

    /// Real part of `vᵀ m v̄`, the squared length of `v` for a metric matrix.
    pub fn norm_sq(&self, v: &[C64]) -> f64 {
        let n = self.dim();
        let mut acc = ZERO;
        for i in 0..n {
            for j in 0..n {
                acc += self.0[(i, j)] * v[i] * v[j].conj();
            }
        }
        acc.re
    }

    pub fn min_eigenvalue(&self) -> f64 {
        eigh(self).values[0]
    }
}

/// Largest `|m_ij - conj(m_ji)|`.
pub fn max_asymmetry(m: &CMat) -> f64 {
    let n = m.nrows().min(m.ncols());
    let mut worst = 0.0_f64;
    for i in 0..n {
        for j in i..n {
            worst = worst.max((m[(i, j)] - m[(j, i)].conj()).norm());
        }
    }
    worst
}

/// Largest entrywise modulus of `a - b`.
pub fn max_abs_diff(a: &CMat, b: &CMat) -> f64 {
    a.iter()
        .zip(b.iter())
        .map(|(x, y)| (x - y).norm())
        .fold(0.0, f64::max)
}

#[derive(Clone, Debug)]
pub struct Eigh {
    /// Ascending.
    pub values: Vec<f64>,
    /// Column `k` is the eigenvector of `values[k]`.
    pub vectors: CMat,
}

impl Eigh {
    pub fn reconstruct(&self) -> CMat {
        let n = self.values.len();
        let d = CMat::from_fn(n, n, |i, j| {
            if i == j {
                C64::new(self.values[i], 0.0)
            } else {
                ZERO
            }
        });
        &self.vectors * d * self.vectors.adjoint()
    }
}

pub fn eigh(m: &HermitianMatrix) -> Eigh {
    let n = m.dim();
    let eig = m.0.clone().symmetric_eigen();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let values = order.iter().map(|&k| eig.eigenvalues[k]).collect();
    let vectors = CMat::from_fn(n, n, |i, j| eig.eigenvectors[(i, order[j])]);
    Eigh { values, vectors }
}

/// Eigenvalues of a real symmetric matrix, ascending.
pub fn real_symmetric_eigenvalues(m: &DMatrix<f64>) -> Vec<f64> {
    let mut v: Vec<f64> = m.clone().symmetric_eigenvalues().iter().copied().collect();
    v.sort_by(f64::total_cmp);
    v
}

/// Inverse of a positive definite Hermitian matrix.
pub fn invert_pd(m: &HermitianMatrix) -> Result<HermitianMatrix> {
    let min = m.min_eigenvalue();
    if !(min > PD_THRESHOLD) {
        return Err(Error::NotPositiveDefinite { min_eigenvalue: min });
    }
    let chol = m
        .0
        .clone()
        .cholesky()
        .ok_or(Error::NotPositiveDefinite { min_eigenvalue: min })?;
    Ok(HermitianMatrix::symmetrized(chol.inverse()))
}

/// Identifies the metric and point a frame (or coordinate tensor) belongs to.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct FrameTag(pub String);

impl FrameTag {
    pub fn new(metric: &str, point: &[C64]) -> Self {
        let coords: Vec<String> = point
            .iter()
            .map(|z| format!("{:?}{:+?}i", z.re, z.im))
            .collect();
        Self(format!("{metric}@({})", coords.join(",")))
    }
}

/// Columns `e_1..e_n` of a frame, orthonormal for the metric it was built from:
/// `Σ g_{i\bar j} E_{iα} conj(E_{jβ}) = δ_{αβ}`.
#[derive(Clone, Debug, PartialEq)]
pub struct UnitaryFrame {
    matrix: CMat,
    tag: FrameTag,
}

impl UnitaryFrame {
    pub fn matrix(&self) -> &CMat {
        &self.matrix
    }

    pub fn tag(&self) -> &FrameTag {
        &self.tag
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    /// The frame `E·U`; still unitary for the same metric when `U` is unitary.
    pub fn rotated(&self, u: &CMat) -> Self {
        Self {
            matrix: &self.matrix * u,
            tag: self.tag.clone(),
        }
    }

    /// Wraps an explicit frame matrix after checking orthonormality against `g`.
    pub fn from_matrix(matrix: CMat, g: &HermitianMatrix, tag: FrameTag) -> Result<Self> {
        let err = frame_gram_error(&matrix, g);
        if err > Tolerances::default().decomposition {
            return Err(Error::FrameMismatch(format!(
                "frame is not unitary for the metric (gram error {err:.3e})"
            )));
        }
        Ok(Self { matrix, tag })
    }
}

/// `Eᵀ g Ē`, the Gram matrix of the frame columns.
pub fn frame_gram(e: &CMat, g: &HermitianMatrix) -> CMat {
    e.transpose() * g.matrix() * e.map(|z| z.conj())
}

pub fn frame_gram_error(e: &CMat, g: &HermitianMatrix) -> f64 {
    let n = e.ncols();
    max_abs_diff(&frame_gram(e, g), &CMat::identity(n, n))
}

/// Deterministic unitary frame: with `conj(g) = L L†` (Cholesky), `E = (L†)⁻¹`.
pub fn unitary_frame(g: &HermitianMatrix, tag: FrameTag) -> Result<UnitaryFrame> {
    let min = g.min_eigenvalue();
    if !(min > PD_THRESHOLD) {
        return Err(Error::NotPositiveDefinite { min_eigenvalue: min });
    }
    let chol = g
        .matrix()
        .map(|z| z.conj())
        .cholesky()
        .ok_or(Error::NotPositiveDefinite { min_eigenvalue: min })?;
    let l_adj = chol.l().adjoint();
    let n = g.dim();
    let e = l_adj
        .solve_upper_triangular(&CMat::identity(n, n))
        .ok_or(Error::NotPositiveDefinite { min_eigenvalue: min })?;
    Ok(UnitaryFrame { matrix: e, tag })
}

/// Standard complex Gaussian matrix (entries with `E|z|² = 1`).
pub fn ginibre<R: Rng + ?Sized>(n: usize, m: usize, rng: &mut R) -> CMat {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    CMat::from_fn(n, m, |_, _| {
        let re: f64 = rng.sample(StandardNormal);
        let im: f64 = rng.sample(StandardNormal);
        C64::new(re * s, im * s)
    })
}

/// Haar-distributed unitary drawn from `rng` (QR of a Ginibre matrix with
/// the phases of `R`'s diagonal moved into `Q`).
pub fn random_unitary_with<R: Rng + ?Sized>(n: usize, rng: &mut R) -> CMat {
    let z = ginibre(n, n, rng);
    let qr = z.qr();
    let (mut q, r) = (qr.q(), qr.r());
    for j in 0..n {
        let d = r[(j, j)];
        let phase = if d.norm() > 0.0 { d / d.norm() } else { ONE };
        for i in 0..n {
            q[(i, j)] *= phase;
        }
    }
    // One Gram-Schmidt sweep to push U†U to machine precision.
    reorthonormalize(&mut q);
    q
}

pub fn random_unitary(n: usize, seed: u64) -> CMat {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    random_unitary_with(n, &mut rng)
}

fn reorthonormalize(q: &mut CMat) {
    let n = q.ncols();
    for j in 0..n {
        for k in 0..j {
            let proj: C64 = (0..q.nrows()).map(|i| q[(i, k)].conj() * q[(i, j)]).sum();
            for i in 0..q.nrows() {
                let v = q[(i, k)];
                q[(i, j)] -= proj * v;
            }
        }
        let norm = (0..q.nrows()).map(|i| q[(i, j)].norm_sqr()).sum::<f64>().sqrt();
        for i in 0..q.nrows() {
            q[(i, j)] /= norm;
        }
    }
}

/// `max |U†U - I|`.
pub fn unitarity_error(u: &CMat) -> f64 {
    let n = u.ncols();
    max_abs_diff(&(u.adjoint() * u), &CMat::identity(n, n))
}

/// Random Hermitian matrix with standard Gaussian entries.
pub fn random_hermitian<R: Rng + ?Sized>(n: usize, rng: &mut R) -> HermitianMatrix {
    let z = ginibre(n, n, rng);
    HermitianMatrix::symmetrized(z)
}

pub fn diag_real(values: &[f64]) -> CMat {
    HermitianMatrix::from_real_diagonal(values).into_matrix()
}

pub fn column(m: &CMat, j: usize) -> Vec<C64> {
    (0..m.nrows()).map(|i| m[(i, j)]).collect()
}

pub fn to_dvector(v: &[C64]) -> DVector<C64> {
    DVector::from_column_slice(v)
}

/// Row-major nested copy, the serialized form of a matrix.
pub fn cmat_rows(m: &CMat) -> Vec<Vec<C64>> {
    (0..m.nrows()).map(|i| (0..m.ncols()).map(|j| m[(i, j)]).collect()).collect()
}
