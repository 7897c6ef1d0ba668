//! Sign certification of the real bisectional curvature form.
//!
//! The form `Q(ξ) = Σ R_{i\bar j k\bar l} ξ_{ij} ξ_{kl}` is studied on unit
//! positive semidefinite Hermitian `ξ`. Lower and upper bounds come from
//! eigenvalues of real symmetric matrices and are rigorous up to round-off;
//! sampling and local optimization only ever produce witnesses.

use std::fmt;

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::Exp1;
use rayon::prelude::*;
use serde::{Deserialize, Serialize, Serializer};

use crate::curvature::{self, ChernTensor};
use crate::error::{Error, Result};
use crate::metric::{MetricSpec, Region};
use crate::numerics::{self, CMat, HermitianMatrix, C64};

/// Margin separating strict from non-strict decisions.
pub const STRICT_MARGIN: f64 = 1e-9;
/// Round-off allowance when a non-strict condition is certified from a bound.
pub const ROUNDOFF_SLACK: f64 = 1e-12;
/// Residual bound for the constant-curvature checks.
pub const CONSTANT_RBC_TOLERANCE: f64 = 1e-8;
/// Samples per random stream.
const CHUNK: usize = 4096;
/// Golden-section iterations for the S-procedure multiplier.
const MULTIPLIER_ITERATIONS: usize = 120;

fn splitmix(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9e37_79b9_7f4a_7c15);
    x = (x ^ (x >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    x ^ (x >> 31)
}

/// Seed for an independent sub-computation.
pub fn derive_seed(seed: u64, purpose: u64) -> u64 {
    splitmix(seed ^ splitmix(purpose))
}

/// A positive semidefinite Hermitian matrix with `tr ξ² = 1`.
#[derive(Clone, Debug, PartialEq)]
pub struct PsdDirection(HermitianMatrix);

impl Serialize for PsdDirection {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        numerics::cmat_rows(self.0.matrix()).serialize(s)
    }
}

impl PsdDirection {
    pub fn new(xi: HermitianMatrix) -> Result<Self> {
        let norm2: f64 = xi.matrix().iter().map(|z| z.norm_sqr()).sum();
        if (norm2 - 1.0).abs() > 1e-10 {
            return Err(Error::InvalidDirection(format!("tr ξ² = {norm2}, expected 1")));
        }
        let min = xi.min_eigenvalue();
        if min < -1e-10 {
            return Err(Error::InvalidDirection(format!("not positive semidefinite: min eigenvalue {min:.3e}")));
        }
        Ok(Self(xi))
    }

    /// Hermitian part of `m`, scaled to unit Frobenius norm.
    pub fn normalized(m: CMat) -> Result<Self> {
        let h = HermitianMatrix::symmetrized(m).into_matrix();
        let norm = h.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if !(norm > 0.0) {
            return Err(Error::InvalidDirection("zero matrix".into()));
        }
        Self::new(HermitianMatrix::symmetrized(h.map(|z| z / norm)))
    }

    /// `U diag(a) U†` for unitary `U` and nonnegative `a`.
    pub fn from_spectral(u: &CMat, a: &[f64]) -> Result<Self> {
        let a = curvature::normalize_weights(a, u.ncols())?;
        Self::normalized(u * numerics::diag_real(&a) * u.adjoint())
    }

    /// `VV†/‖VV†‖_F`.
    pub fn from_factor(v: &CMat) -> Result<Self> {
        Self::normalized(v * v.adjoint())
    }

    pub fn dim(&self) -> usize {
        self.0.dim()
    }

    pub fn matrix(&self) -> &CMat {
        self.0.matrix()
    }

    pub fn hermitian(&self) -> &HermitianMatrix {
        &self.0
    }
}

/// The real quadratic form `ξ ↦ Q(ξ)` on Hermitian matrices, written in the
/// orthonormal basis `E_ii`, `(E_ij + E_ji)/√2`, `i(E_ij − E_ji)/√2` (`i < j`).
#[derive(Clone, Debug)]
pub struct QuadraticModel {
    n: usize,
    qhat: DMatrix<f64>,
}

/// Coordinates of a Hermitian matrix in the orthonormal basis.
pub fn hermitian_coords(xi: &CMat) -> Vec<f64> {
    let n = xi.nrows();
    let s = std::f64::consts::SQRT_2;
    let mut x = Vec::with_capacity(n * n);
    for i in 0..n {
        x.push(xi[(i, i)].re);
    }
    for i in 0..n {
        for j in i + 1..n {
            x.push(s * xi[(i, j)].re);
            x.push(s * xi[(i, j)].im);
        }
    }
    x
}

/// Inverse of [`hermitian_coords`].
pub fn hermitian_from_coords(n: usize, x: &[f64]) -> CMat {
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let mut m = CMat::zeros(n, n);
    for i in 0..n {
        m[(i, i)] = C64::new(x[i], 0.0);
    }
    let mut pos = n;
    for i in 0..n {
        for j in i + 1..n {
            let z = C64::new(x[pos] * h, x[pos + 1] * h);
            m[(i, j)] = z;
            m[(j, i)] = z.conj();
            pos += 2;
        }
    }
    m
}

impl QuadraticModel {
    pub fn new(t: &ChernTensor) -> Self {
        let n = t.dim();
        let dim = n * n;
        let basis: Vec<CMat> = (0..dim)
            .map(|m| {
                let mut e = vec![0.0; dim];
                e[m] = 1.0;
                hermitian_from_coords(n, &e)
            })
            .collect();
        let mut qhat = DMatrix::<f64>::zeros(dim, dim);
        for a in 0..dim {
            for b in a..dim {
                let ab = curvature::quad_form_raw(t, &(&basis[a] + &basis[b])).re;
                let aa = curvature::quad_form_raw(t, &basis[a]).re;
                let bb = curvature::quad_form_raw(t, &basis[b]).re;
                let v = 0.5 * (ab - aa - bb);
                qhat[(a, b)] = v;
                qhat[(b, a)] = v;
            }
        }
        Self { n, qhat }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.qhat
    }

    pub fn eval_coords(&self, x: &[f64]) -> f64 {
        let v = nalgebra::DVector::from_column_slice(x);
        v.dot(&(&self.qhat * &v))
    }

    /// `(tr ξ)² − tr ξ²`, nonnegative on the PSD cone.
    fn trace_gap(&self) -> DMatrix<f64> {
        let dim = self.n * self.n;
        DMatrix::from_fn(dim, dim, |a, b| {
            let ta = if a < self.n { 1.0 } else { 0.0 };
            let tb = if b < self.n { 1.0 } else { 0.0 };
            ta * tb - if a == b { 1.0 } else { 0.0 }
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpectralBounds {
    /// Extreme eigenvalues of `Q̂` over all unit Hermitian matrices.
    pub relaxation_lower: f64,
    pub relaxation_upper: f64,
    /// Bounds tightened with the cone inequality `(tr ξ)² ≥ tr ξ²`.
    pub lower: f64,
    pub upper: f64,
    pub lower_multiplier: f64,
    pub upper_multiplier: f64,
}

fn extreme_eigenvalues(m: &DMatrix<f64>) -> (f64, f64) {
    let ev = numerics::real_symmetric_eigenvalues(m);
    (ev[0], ev[ev.len() - 1])
}

/// Maximizes a concave function of `t` on `[0, hi]` by golden sections,
/// returning the best `(t, f(t))` seen (every value is a valid bound).
fn golden_max(hi: f64, f: impl Fn(f64) -> f64) -> (f64, f64) {
    let mut best = (0.0, f(0.0));
    if !(hi > 0.0) {
        return best;
    }
    let r = (5f64.sqrt() - 1.0) / 2.0;
    let (mut a, mut b) = (0.0, hi);
    let mut c = b - r * (b - a);
    let mut d = a + r * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    for _ in 0..MULTIPLIER_ITERATIONS {
        for (t, v) in [(c, fc), (d, fd)] {
            if v > best.1 {
                best = (t, v);
            }
        }
        if fc >= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - r * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + r * (b - a);
            fd = f(d);
        }
    }
    best
}

/// Bounds on `Q` over the unit PSD sphere.
///
/// The plain relaxation uses all unit Hermitian matrices. The tightened
/// bounds add a multiple of `P(ξ) = (tr ξ)² − tr ξ² ≥ 0`:
/// `min Q ≥ λ_min(Q̂ − sP̂)` and `max Q ≤ λ_max(Q̂ + sP̂)` for every `s ≥ 0`.
pub fn spectral_bounds(t: &ChernTensor) -> SpectralBounds {
    spectral_bounds_of(&QuadraticModel::new(t))
}

pub fn spectral_bounds_of(model: &QuadraticModel) -> SpectralBounds {
    let q = model.matrix();
    let (relaxation_lower, relaxation_upper) = extreme_eigenvalues(q);
    let n = model.dim();
    let p = model.trace_gap();
    // Beyond this multiplier the bound only degrades: P̂ has eigenvalue n − 1
    // on the identity direction.
    let hi = if n > 1 {
        (2.0 * q.norm() + 1.0) / (n as f64 - 1.0)
    } else {
        0.0
    };
    let (lower_multiplier, lower) = golden_max(hi, |s| extreme_eigenvalues(&(q - &p * s)).0);
    let (upper_multiplier, neg_upper) = golden_max(hi, |s| -extreme_eigenvalues(&(q + &p * s)).1);
    SpectralBounds {
        relaxation_lower,
        relaxation_upper,
        lower: lower.max(relaxation_lower),
        upper: (-neg_upper).min(relaxation_upper),
        lower_multiplier,
        upper_multiplier,
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct Extremum {
    pub value: f64,
    pub direction: PsdDirection,
}

#[derive(Clone, Debug, Serialize)]
pub struct SampleExtrema {
    pub count: usize,
    pub min: Extremum,
    pub max: Extremum,
}

/// Spectral sampler: Haar unitary frame with weights `a = √(Dirichlet(1))`.
fn spectral_sample<R: Rng>(n: usize, rng: &mut R) -> CMat {
    let u = numerics::random_unitary_with(n, rng);
    let e: Vec<f64> = (0..n).map(|_| rng.sample::<f64, _>(Exp1)).collect();
    let total: f64 = e.iter().sum();
    let a: Vec<f64> = e.iter().map(|x| (x / total).sqrt()).collect();
    &u * numerics::diag_real(&a) * u.adjoint()
}

/// Gram sampler: `VV†/‖VV†‖_F` with `V` Gaussian of random rank.
fn gram_sample<R: Rng>(n: usize, rng: &mut R) -> CMat {
    let rank = rng.random_range(1..=n);
    let v = numerics::ginibre(n, rank, rng);
    let m = &v * v.adjoint();
    let norm = m.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    m.map(|z| z / norm)
}

/// Deterministic sampling of `Q` over unit PSD directions. Sample `k` always
/// comes from the same random stream position, so a larger `count` sees a
/// superset of the directions.
pub fn sample_extrema(t: &ChernTensor, count: usize, seed: u64) -> SampleExtrema {
    let n = t.dim();
    let count = count.max(1);
    let chunks = count.div_ceil(CHUNK);
    let partial: Vec<(f64, CMat, f64, CMat)> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(c as u64);
            let start = c * CHUNK;
            let end = (start + CHUNK).min(count);
            let mut lo = (f64::INFINITY, CMat::zeros(n, n));
            let mut hi = (f64::NEG_INFINITY, CMat::zeros(n, n));
            for k in start..end {
                let xi = if k % 2 == 0 {
                    spectral_sample(n, &mut rng)
                } else {
                    gram_sample(n, &mut rng)
                };
                let q = curvature::quad_form_raw(t, &xi).re;
                if q < lo.0 {
                    lo = (q, xi.clone());
                }
                if q > hi.0 {
                    hi = (q, xi);
                }
            }
            (lo.0, lo.1, hi.0, hi.1)
        })
        .collect();
    let mut best = partial[0].clone();
    for p in partial.into_iter().skip(1) {
        if p.0 < best.0 {
            best.0 = p.0;
            best.1 = p.1;
        }
        if p.2 > best.2 {
            best.2 = p.2;
            best.3 = p.3;
        }
    }
    let dir = |m: CMat| PsdDirection::normalized(m).expect("sampled directions are unit PSD");
    SampleExtrema {
        count,
        min: Extremum {
            value: best.0,
            direction: dir(best.1),
        },
        max: Extremum {
            value: best.2,
            direction: dir(best.3),
        },
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Direction {
    Min,
    Max,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct OptimizerSettings {
    pub starts: usize,
    pub tol: f64,
    pub max_iterations: usize,
}

impl Default for OptimizerSettings {
    fn default() -> Self {
        Self {
            starts: 32,
            tol: 1e-14,
            max_iterations: 500,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct OptimizerResult {
    pub value: f64,
    pub direction: PsdDirection,
    pub starts: usize,
    pub converged_starts: usize,
    /// Whether the start that produced `value` met the tolerance.
    pub converged: bool,
}

struct Run {
    value: f64,
    v: CMat,
    converged: bool,
}

fn factor_value(model: &QuadraticModel, v: &CMat, sign: f64) -> (f64, Vec<f64>) {
    let x = hermitian_coords(&(v * v.adjoint()));
    let nx: f64 = x.iter().map(|a| a * a).sum();
    (sign * model.eval_coords(&x) / nx, x)
}

fn unit(v: CMat) -> CMat {
    let norm = v.norm();
    v / C64::new(norm, 0.0)
}

/// Projected gradient on `V ↦ sign·Q(VV†)/‖VV†‖²` with Armijo steps.
fn descend(model: &QuadraticModel, mut v: CMat, sign: f64, settings: &OptimizerSettings) -> Run {
    let n = model.dim();
    let qhat = model.matrix();
    let (mut f, mut x) = factor_value(model, &v, sign);
    let mut step = 1.0;
    for _ in 0..settings.max_iterations {
        let nx: f64 = x.iter().map(|a| a * a).sum();
        let xv = nalgebra::DVector::from_column_slice(&x);
        let qx = qhat * &xv;
        let grad: Vec<f64> = (0..x.len()).map(|m| 2.0 * (sign * qx[m] - f * x[m]) / nx).collect();
        let gmat = hermitian_from_coords(n, &grad);
        // Hermitian coordinates are orthonormal, so the matrix gradient is Σ g_m B_m.
        let gv = &gmat * &v * C64::new(2.0, 0.0);
        let gnorm2 = gv.norm_squared();
        if gnorm2 == 0.0 {
            return Run { value: f, v, converged: true };
        }
        let mut accepted = None;
        while step > 1e-18 {
            let cand = unit(&v - &gv * C64::new(step, 0.0));
            let (fc, xc) = factor_value(model, &cand, sign);
            if fc <= f - 1e-4 * step * gnorm2 {
                accepted = Some((cand, fc, xc));
                break;
            }
            step *= 0.5;
        }
        let Some((cand, fc, xc)) = accepted else {
            return Run { value: f, v, converged: true };
        };
        let improvement = f - fc;
        v = cand;
        f = fc;
        x = xc;
        step = (step * 2.0).min(1e6);
        if improvement < settings.tol {
            return Run { value: f, v, converged: true };
        }
    }
    Run { value: f, v, converged: false }
}

/// Multi-start local optimization of `Q` over unit PSD directions.
pub fn optimize_extremum(t: &ChernTensor, direction: Direction, settings: &OptimizerSettings, seed: u64) -> OptimizerResult {
    optimize_model(&QuadraticModel::new(t), direction, settings, seed)
}

pub fn optimize_model(model: &QuadraticModel, direction: Direction, settings: &OptimizerSettings, seed: u64) -> OptimizerResult {
    let n = model.dim();
    let sign = match direction {
        Direction::Min => 1.0,
        Direction::Max => -1.0,
    };
    let starts = settings.starts.max(1);
    let runs: Vec<Run> = (0..starts)
        .into_par_iter()
        .map(|s| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(s as u64);
            // Start 0 is the identity, the remaining ones random factors.
            let v0 = if s == 0 {
                CMat::identity(n, n)
            } else {
                numerics::ginibre(n, n, &mut rng)
            };
            descend(model, unit(v0), sign, settings)
        })
        .collect();
    let converged_starts = runs.iter().filter(|r| r.converged).count();
    let best = runs
        .into_iter()
        .reduce(|a, b| if b.value < a.value { b } else { a })
        .expect("at least one start");
    let direction = PsdDirection::from_factor(&best.v).expect("factor directions are unit PSD");
    OptimizerResult {
        value: sign * best.value,
        direction,
        starts,
        converged_starts,
        converged: best.converged,
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Relation {
    #[serde(rename = ">")]
    Gt,
    #[serde(rename = ">=")]
    Ge,
    #[serde(rename = "<")]
    Lt,
    #[serde(rename = "<=")]
    Le,
}

impl Relation {
    pub fn parse(s: &str) -> Result<Self> {
        Ok(match s.trim() {
            ">" | "gt" => Relation::Gt,
            ">=" | "ge" | "≥" => Relation::Ge,
            "<" | "lt" => Relation::Lt,
            "<=" | "le" | "≤" => Relation::Le,
            other => return Err(Error::Invalid(format!("unknown relation {other:?}"))),
        })
    }

    pub fn symbol(self) -> &'static str {
        match self {
            Relation::Gt => ">",
            Relation::Ge => ">=",
            Relation::Lt => "<",
            Relation::Le => "<=",
        }
    }

    pub fn is_lower(self) -> bool {
        matches!(self, Relation::Gt | Relation::Ge)
    }

    pub fn is_strict(self) -> bool {
        matches!(self, Relation::Gt | Relation::Lt)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Condition {
    pub relation: Relation,
    pub threshold: f64,
}

impl Condition {
    pub fn new(relation: Relation, threshold: f64) -> Self {
        Self { relation, threshold }
    }

    /// Parses `B>0`, `B >= -1`, `<=0.5`, and similar.
    pub fn parse(s: &str) -> Result<Self> {
        let body: String = s.chars().filter(|c| !c.is_whitespace()).collect();
        let body = body.strip_prefix('B').unwrap_or(&body);
        let split = body
            .find(|c: char| !matches!(c, '<' | '>' | '=' | '≥' | '≤'))
            .ok_or_else(|| Error::Invalid(format!("condition {s:?} has no threshold")))?;
        let relation = Relation::parse(&body[..split])?;
        let threshold = body[split..]
            .parse::<f64>()
            .map_err(|_| Error::Invalid(format!("condition {s:?}: bad threshold")))?;
        Ok(Self { relation, threshold })
    }

    /// Whether the value `q` violates the condition by the refutation margin.
    pub fn violated_by(&self, q: f64) -> bool {
        let c = self.threshold;
        match self.relation {
            Relation::Ge => q <= c - STRICT_MARGIN,
            Relation::Gt => q <= c,
            Relation::Le => q >= c + STRICT_MARGIN,
            Relation::Lt => q >= c,
        }
    }

    /// Whether rigorous bounds `[lower, upper]` imply the condition.
    pub fn implied_by(&self, lower: f64, upper: f64) -> bool {
        let c = self.threshold;
        match self.relation {
            Relation::Ge => lower >= c - ROUNDOFF_SLACK,
            Relation::Gt => lower >= c + STRICT_MARGIN,
            Relation::Le => upper <= c + ROUNDOFF_SLACK,
            Relation::Lt => upper <= c - STRICT_MARGIN,
        }
    }
}

impl fmt::Display for Condition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "B{}{}", self.relation.symbol(), self.threshold)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Certified,
    Refuted,
    Inconclusive,
}

/// What a verdict rests on.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Evidence {
    /// Eigenvalue bounds imply the condition.
    SpectralBound,
    /// An explicit direction violates the condition.
    Witness,
    /// Optimized extrema satisfy the condition but no bound proves it.
    OptimizedEnvelope,
    /// Only sampled values are available and they are not decisive.
    Sampling,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Budget {
    pub samples: usize,
    pub starts: usize,
    pub tol: f64,
    pub max_iterations: usize,
    pub seed: u64,
}

impl Default for Budget {
    fn default() -> Self {
        let o = OptimizerSettings::default();
        Self {
            samples: 100_000,
            starts: o.starts,
            tol: o.tol,
            max_iterations: o.max_iterations,
            seed: 0,
        }
    }
}

impl Budget {
    pub fn optimizer(&self) -> OptimizerSettings {
        OptimizerSettings {
            starts: self.starts,
            tol: self.tol,
            max_iterations: self.max_iterations,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct Verdict {
    pub condition: Condition,
    pub status: Status,
    pub evidence: Evidence,
    pub spectral_lower: f64,
    pub spectral_upper: f64,
    pub relaxation_lower: f64,
    pub relaxation_upper: f64,
    pub best_min: f64,
    pub best_max: f64,
    pub witness: Option<PsdDirection>,
    pub witness_value: Option<f64>,
    pub samples: usize,
    pub starts: usize,
    pub seed: u64,
    pub optimizer_converged: bool,
}

/// Decides `condition` for the tensor `t`, which must be in a unitary frame.
pub fn certify_sign(t: &ChernTensor, condition: Condition, budget: &Budget) -> Result<Verdict> {
    if !t.is_unitary() {
        return Err(Error::FrameMismatch("certification requires a unitary-frame tensor".into()));
    }
    let model = QuadraticModel::new(t);
    let bounds = spectral_bounds_of(&model);
    let settings = budget.optimizer();
    let sampled = if budget.samples > 0 {
        Some(sample_extrema(t, budget.samples, derive_seed(budget.seed, 1)))
    } else {
        None
    };
    let opt_min = optimize_model(&model, Direction::Min, &settings, derive_seed(budget.seed, 2));
    let opt_max = optimize_model(&model, Direction::Max, &settings, derive_seed(budget.seed, 3));

    let mut low = Extremum {
        value: opt_min.value,
        direction: opt_min.direction.clone(),
    };
    let mut high = Extremum {
        value: opt_max.value,
        direction: opt_max.direction.clone(),
    };
    if let Some(s) = &sampled {
        if s.min.value < low.value {
            low = s.min.clone();
        }
        if s.max.value > high.value {
            high = s.max.clone();
        }
    }
    // Keep the bounds consistent with what was observed: lowering a lower
    // bound (or raising an upper one) by round-off keeps it valid.
    let spectral_lower = bounds.lower.min(low.value);
    let spectral_upper = bounds.upper.max(high.value);

    let candidate = if condition.relation.is_lower() { &low } else { &high };
    let (status, evidence, witness) = if condition.implied_by(spectral_lower, spectral_upper) {
        (Status::Certified, Evidence::SpectralBound, None)
    } else if condition.violated_by(candidate.value) {
        (Status::Refuted, Evidence::Witness, Some(candidate.clone()))
    } else {
        let envelope_ok = match condition.relation {
            Relation::Ge => low.value >= condition.threshold,
            Relation::Gt => low.value > condition.threshold,
            Relation::Le => high.value <= condition.threshold,
            Relation::Lt => high.value < condition.threshold,
        };
        let evidence = if envelope_ok {
            Evidence::OptimizedEnvelope
        } else {
            Evidence::Sampling
        };
        (Status::Inconclusive, evidence, None)
    };
    let converged = if condition.relation.is_lower() {
        opt_min.converged
    } else {
        opt_max.converged
    };
    Ok(Verdict {
        condition,
        status,
        evidence,
        spectral_lower,
        spectral_upper,
        relaxation_lower: bounds.relaxation_lower,
        relaxation_upper: bounds.relaxation_upper,
        best_min: low.value,
        best_max: high.value,
        witness_value: witness.as_ref().map(|w| w.value),
        witness: witness.map(|w| w.direction),
        samples: budget.samples,
        starts: settings.starts.max(1),
        seed: budget.seed,
        optimizer_converged: converged,
    })
}

/// Extremes of the holomorphic sectional curvature over random directions.
pub fn sample_hsc(t: &ChernTensor, count: usize, seed: u64) -> Result<(f64, f64)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
    for _ in 0..count.max(1) {
        let v = numerics::column(&numerics::ginibre(t.dim(), 1, &mut rng), 0);
        let h = curvature::hsc(t, &v)?;
        lo = lo.min(h);
        hi = hi.max(h);
    }
    Ok((lo, hi))
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ConstantRbcReport {
    pub c: f64,
    pub point: Vec<C64>,
    /// `max|R_{i\bar j k\bar l} + R_{k\bar l i\bar j} − 2c δ_il δ_kj|` in a unitary frame.
    pub pattern_residual: f64,
    /// `Σ_i η_{i,\bar i}`.
    pub eta_trace: C64,
    /// `|Σ_i η_{i,\bar i} + c n(n−1)/2|`.
    pub eta_residual: f64,
    /// Max norms of the three Ricci tensors (reported for `c = 0`).
    pub ricci_norms: Option<[f64; 3]>,
    /// `max|R_{i\bar j k\bar l} + R_{k\bar l i\bar j}|` (reported for `c = 0`).
    pub skew_residual: Option<f64>,
    pub tolerance: f64,
    /// Every residual is within `tolerance`.
    pub consistent: bool,
}

/// Pointwise identities that hold wherever the bisectional form is the
/// constant `c`.
pub fn constant_rbc_check(spec: &MetricSpec, p: &[C64], c: f64) -> Result<ConstantRbcReport> {
    let jet = spec.jet(p)?;
    let t = curvature::unitary_tensor(&jet)?;
    let sym = curvature::symmetry_report(&t, c);
    let n = jet.dim() as f64;
    let eta_trace = curvature::eta_divergence(&jet);
    let eta_residual = (eta_trace + C64::new(0.5 * c * n * (n - 1.0), 0.0)).norm();
    let (ricci_norms, skew_residual) = if c == 0.0 {
        let ric = curvature::ricci(&t)?;
        let norm = |m: &CMat| m.iter().map(|z| z.norm()).fold(0.0, f64::max);
        (Some([norm(ric.ric1.matrix()), norm(ric.ric2.matrix()), norm(&ric.ric3)]), Some(sym.skew))
    } else {
        (None, None)
    };
    let mut worst = sym.constant_pattern.max(eta_residual);
    if let Some(r) = ricci_norms {
        worst = r.iter().copied().fold(worst, f64::max);
    }
    if let Some(s) = skew_residual {
        worst = worst.max(s);
    }
    Ok(ConstantRbcReport {
        c,
        point: p.to_vec(),
        pattern_residual: sym.constant_pattern,
        eta_trace,
        eta_residual,
        ricci_norms,
        skew_residual,
        tolerance: CONSTANT_RBC_TOLERANCE,
        consistent: worst <= CONSTANT_RBC_TOLERANCE,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct PointVerdict {
    pub index: usize,
    pub point: Vec<C64>,
    pub verdict: Verdict,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ScanSummary {
    pub points: usize,
    pub certified: usize,
    pub refuted: usize,
    pub inconclusive: usize,
    /// Points where the strict form of the condition is certified.
    pub strict_certified: usize,
    pub classification: String,
}

#[derive(Clone, Debug, Serialize)]
pub struct ScanReport {
    pub metric: String,
    pub region: Region,
    pub condition: Condition,
    pub results: Vec<PointVerdict>,
    pub summary: ScanSummary,
}

/// Certifies `condition` at every point of `region`, in point order.
pub fn scan(spec: &MetricSpec, region: &Region, condition: Condition, budget: &Budget) -> Result<ScanReport> {
    if let Some(limit) = spec.domain_hint() {
        if region.radius > limit {
            return Err(Error::OutsideDomain {
                radius: region.radius,
                limit,
            });
        }
    }
    let points = region.points(spec.dim(), derive_seed(budget.seed, 4));
    let results = points
        .into_par_iter()
        .enumerate()
        .map(|(index, point)| {
            let t = curvature::unitary_tensor(&spec.jet(&point)?)?;
            let point_budget = Budget {
                seed: derive_seed(budget.seed, 1000 + index as u64),
                ..*budget
            };
            Ok(PointVerdict {
                index,
                verdict: certify_sign(&t, condition, &point_budget)?,
                point,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let summary = summarize(&results, condition);
    Ok(ScanReport {
        metric: spec.name().to_string(),
        region: *region,
        condition,
        results,
        summary,
    })
}

fn summarize(results: &[PointVerdict], condition: Condition) -> ScanSummary {
    let count = |s: Status| results.iter().filter(|r| r.verdict.status == s).count();
    let (certified, refuted, inconclusive) = (count(Status::Certified), count(Status::Refuted), count(Status::Inconclusive));
    let strict = Condition::new(
        match condition.relation {
            Relation::Ge | Relation::Gt => Relation::Gt,
            Relation::Le | Relation::Lt => Relation::Lt,
        },
        condition.threshold,
    );
    let strict_certified = results
        .iter()
        .filter(|r| strict.implied_by(r.verdict.spectral_lower, r.verdict.spectral_upper))
        .count();
    let total = results.len();
    let word = if condition.relation.is_lower() { "positive" } else { "negative" };
    let classification = if refuted > 0 {
        format!("{condition} refuted at {refuted} of {total} points")
    } else if certified == total {
        if strict_certified == total {
            format!("{strict} certified at all {total} points")
        } else if strict_certified > 0 && condition.threshold == 0.0 {
            format!(
                "{condition} certified at all {total} points, strictly at {strict_certified}: evidence for quasi-{word}"
            )
        } else {
            format!("{condition} certified at all {total} points")
        }
    } else {
        format!("{condition} certified at {certified} of {total} points, inconclusive at {inconclusive}")
    };
    ScanSummary {
        points: total,
        certified,
        refuted,
        inconclusive,
        strict_certified,
        classification,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metric::{catalog, params};
    use crate::numerics::ZERO;

    fn tensor(name: &str, p: &[(&str, f64)], n: usize) -> ChernTensor {
        let spec = catalog(name, &params(p)).unwrap();
        curvature::unitary_tensor(&spec.jet(&vec![ZERO; n]).unwrap()).unwrap()
    }

    fn small_budget() -> Budget {
        Budget {
            samples: 20_000,
            starts: 8,
            ..Budget::default()
        }
    }

    #[test]
    fn coordinates_roundtrip() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let h = numerics::random_hermitian(3, &mut rng).into_matrix();
        let x = hermitian_coords(&h);
        assert!(numerics::max_abs_diff(&hermitian_from_coords(3, &x), &h) <= 1e-15);
        let norm2: f64 = h.iter().map(|z| z.norm_sqr()).sum();
        assert!((x.iter().map(|a| a * a).sum::<f64>() - norm2).abs() <= 1e-12);
    }

    #[test]
    fn model_reproduces_quad_form() {
        let t = tensor("example_2_3", &[("b", 1.0)], 2);
        let model = QuadraticModel::new(&t);
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for _ in 0..50 {
            let h = numerics::random_hermitian(2, &mut rng).into_matrix();
            let direct = curvature::quad_form_raw(&t, &h).re;
            assert!((model.eval_coords(&hermitian_coords(&h)) - direct).abs() <= 1e-12);
        }
    }

    #[test]
    fn flat_bounds_and_certificate() {
        let t = tensor("flat", &[("n", 2.0)], 2);
        let b = spectral_bounds(&t);
        assert_eq!((b.lower, b.upper), (0.0, 0.0));
        let v = certify_sign(&t, Condition::new(Relation::Ge, 0.0), &small_budget()).unwrap();
        assert_eq!(v.status, Status::Certified);
        assert_eq!((v.best_min, v.best_max), (0.0, 0.0));
        let strict = certify_sign(&t, Condition::new(Relation::Gt, 0.0), &small_budget()).unwrap();
        assert_eq!(strict.status, Status::Refuted);
    }

    #[test]
    fn example_2_2_bounds_and_refutation() {
        let t = tensor("example_2_2", &[("eps", 0.3)], 2);
        let b = spectral_bounds(&t);
        assert!(b.relaxation_lower <= -0.3 && b.relaxation_upper >= 0.7);
        assert!((b.lower + 0.3).abs() <= 1e-9 && (b.upper - 0.7).abs() <= 1e-9);
        let opt = optimize_extremum(&t, Direction::Min, &OptimizerSettings::default(), 7);
        assert!((opt.value + 0.3).abs() <= 1e-6);
        // The minimizer is I/√n: the uniform-weight direction.
        let target = CMat::identity(2, 2) * C64::new(0.5_f64.sqrt(), 0.0);
        assert!(numerics::max_abs_diff(opt.direction.matrix(), &target) <= 1e-3);
        let v = certify_sign(&t, Condition::new(Relation::Ge, 0.0), &small_budget()).unwrap();
        assert_eq!(v.status, Status::Refuted);
        let w = v.witness.as_ref().unwrap();
        assert!((curvature::quad_form(&t, w).unwrap() - v.witness_value.unwrap()).abs() <= 1e-9);
        assert!((v.witness_value.unwrap() + 0.3).abs() <= 1e-6);
    }

    #[test]
    fn example_2_3_is_certified_positive() {
        let t = tensor("example_2_3", &[("b", 1.0)], 2);
        let b = spectral_bounds(&t);
        assert!(b.relaxation_lower < 0.0);
        assert!((b.lower - 0.25).abs() <= 1e-8, "{}", b.lower);
        let v = certify_sign(&t, Condition::new(Relation::Gt, 0.0), &small_budget()).unwrap();
        assert_eq!(v.status, Status::Certified);
        assert_eq!(v.evidence, Evidence::SpectralBound);
        assert!(v.best_min > 0.0 && (v.best_min - 0.25).abs() <= 1e-6);
        assert!(v.spectral_lower <= v.best_min && v.best_max <= v.spectral_upper);
    }

    #[test]
    fn sampling_is_deterministic_and_monotone() {
        let t = tensor("example_2_2", &[("eps", 0.3), ("n", 3.0)], 3);
        let a = sample_extrema(&t, 10_000, 9);
        let b = sample_extrema(&t, 10_000, 9);
        assert_eq!(a.min.value.to_bits(), b.min.value.to_bits());
        let c = sample_extrema(&t, 20_000, 9);
        assert!(c.min.value <= a.min.value && c.max.value >= a.max.value);
    }

    #[test]
    fn condition_parsing() {
        assert_eq!(Condition::parse("B>=0").unwrap(), Condition::new(Relation::Ge, 0.0));
        assert_eq!(Condition::parse("B < -1.5").unwrap(), Condition::new(Relation::Lt, -1.5));
        assert_eq!(Condition::parse("<=2").unwrap(), Condition::new(Relation::Le, 2.0));
        assert!(Condition::parse("B=0").is_err());
        assert_eq!(Condition::new(Relation::Gt, 0.0).to_string(), "B>0");
    }

    #[test]
    fn direction_validation() {
        assert!(PsdDirection::new(HermitianMatrix::from_real_diagonal(&[1.0, 0.0])).is_ok());
        assert!(PsdDirection::new(HermitianMatrix::from_real_diagonal(&[1.0, 1.0])).is_err());
        let s = 0.5_f64.sqrt();
        assert!(PsdDirection::new(HermitianMatrix::from_real_diagonal(&[s, -s])).is_err());
    }

    #[test]
    fn constant_rbc_checks() {
        let flat = catalog("flat", &params(&[("n", 2.0)])).unwrap();
        let r = constant_rbc_check(&flat, &[C64::new(0.1, 0.2), ZERO], 0.0).unwrap();
        assert!(r.consistent && r.pattern_residual <= 1e-12 && r.eta_trace == ZERO);

        let fs = catalog("fs", &params(&[("n", 2.0)])).unwrap();
        let r = constant_rbc_check(&fs, &[C64::new(0.1, 0.0), ZERO], 2.0).unwrap();
        assert!(!r.consistent && r.pattern_residual > 0.1);

        let e22 = catalog("example_2_2", &params(&[("eps", 0.3)])).unwrap();
        assert!(!constant_rbc_check(&e22, &[ZERO, ZERO], -0.3).unwrap().consistent);
    }

    #[test]
    fn scan_of_flat_region() {
        let flat = catalog("flat", &params(&[("n", 2.0)])).unwrap();
        let budget = Budget {
            samples: 500,
            starts: 2,
            ..Budget::default()
        };
        let rep = scan(&flat, &Region::random(0.5, 5), Condition::new(Relation::Ge, 0.0), &budget).unwrap();
        assert_eq!(rep.summary.certified, 5);
        assert!(rep.results.iter().enumerate().all(|(i, r)| r.index == i));
        let e23 = catalog("example_2_3", &params(&[("b", 1.0)])).unwrap();
        assert!(matches!(
            scan(&e23, &Region::random(0.5, 5), Condition::new(Relation::Gt, 0.0), &budget),
            Err(Error::OutsideDomain { .. })
        ));
    }
}
