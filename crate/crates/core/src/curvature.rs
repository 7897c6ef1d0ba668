//! Chern curvature, connection, torsion and the curvature functionals built
//! from them.

use serde::{Deserialize, Serialize};

use crate::certify::PsdDirection;
use crate::error::{Error, Result};
use crate::metric::{MetricJet, MetricSpec};
use crate::numerics::{self, CMat, FrameTag, HermitianMatrix, UnitaryFrame, C64, ZERO};

/// Factor multiplying `Γ^k_{ij} − Γ^k_{ji}` in the torsion tensor.
///
/// Chosen by [`calibrate_torsion_factor`]: with it, `2 T^k_{ij,\bar l} =
/// R_{j\bar l i\bar k} − R_{i\bar l j\bar k}` holds identically.
pub const TORSION_FACTOR: f64 = 0.5;

/// Candidates tried by [`calibrate_torsion_factor`].
pub const TORSION_FACTOR_CANDIDATES: [f64; 2] = [1.0, 0.5];

#[inline]
fn idx4(n: usize, i: usize, j: usize, k: usize, l: usize) -> usize {
    ((i * n + j) * n + k) * n + l
}

#[inline]
fn idx3(n: usize, k: usize, i: usize, j: usize) -> usize {
    (k * n + i) * n + j
}

#[derive(Clone, Debug)]
pub enum Frame {
    Coordinate,
    Unitary(UnitaryFrame),
}

/// `R_{i\bar j k\bar l}` at one point, in coordinates or in a unitary frame.
#[derive(Clone, Debug)]
pub struct ChernTensor {
    n: usize,
    data: Vec<C64>,
    frame: Frame,
    tag: FrameTag,
    /// Metric matrix in the tensor's frame (the identity for unitary frames).
    metric: HermitianMatrix,
}

impl ChernTensor {
    pub fn from_components(n: usize, data: Vec<C64>, frame: Frame, tag: FrameTag, metric: HermitianMatrix) -> Result<Self> {
        if data.len() != n.pow(4) {
            return Err(Error::DimensionMismatch {
                expected: n.pow(4),
                got: data.len(),
            });
        }
        if metric.dim() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                got: metric.dim(),
            });
        }
        Ok(Self {
            n,
            data,
            frame,
            tag,
            metric,
        })
    }

    /// Tensor given directly in an orthonormal frame of the identity metric.
    pub fn unitary_from_fn(n: usize, f: impl Fn(usize, usize, usize, usize) -> C64) -> Self {
        let mut data = vec![ZERO; n.pow(4)];
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    for l in 0..n {
                        data[idx4(n, i, j, k, l)] = f(i, j, k, l);
                    }
                }
            }
        }
        let g = HermitianMatrix::identity(n);
        let tag = FrameTag("synthetic".into());
        let frame = UnitaryFrame::from_matrix(CMat::identity(n, n), &g, tag.clone()).expect("identity frame");
        Self {
            n,
            data,
            frame: Frame::Unitary(frame),
            tag,
            metric: g,
        }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize, k: usize, l: usize) -> C64 {
        self.data[idx4(self.n, i, j, k, l)]
    }

    pub fn data(&self) -> &[C64] {
        &self.data
    }

    pub fn frame(&self) -> &Frame {
        &self.frame
    }

    pub fn tag(&self) -> &FrameTag {
        &self.tag
    }

    pub fn metric(&self) -> &HermitianMatrix {
        &self.metric
    }

    pub fn is_unitary(&self) -> bool {
        matches!(self.frame, Frame::Unitary(_))
    }

    /// Nested `[i][j][k][l]` view.
    pub fn nested(&self) -> Vec<Vec<Vec<Vec<C64>>>> {
        let n = self.n;
        (0..n)
            .map(|i| (0..n).map(|j| (0..n).map(|k| (0..n).map(|l| self.get(i, j, k, l)).collect()).collect()).collect())
            .collect()
    }

    /// `n²×n²` matrix `M[(i n + j, k n + l)] = R_{i\bar j k\bar l}`, so that
    /// `Q(ξ) = vec(ξ)ᵀ M vec(ξ)` with row-major `vec`.
    pub fn pair_matrix(&self) -> CMat {
        let n2 = self.n * self.n;
        CMat::from_fn(n2, n2, |a, b| self.data[a * n2 + b])
    }

    fn require_unitary(&self) -> Result<&UnitaryFrame> {
        match &self.frame {
            Frame::Unitary(e) => Ok(e),
            Frame::Coordinate => Err(Error::FrameMismatch(
                "operation requires a tensor expressed in a unitary frame".into(),
            )),
        }
    }

    fn require_same_frame(&self, e: &UnitaryFrame) -> Result<()> {
        let own = self.require_unitary()?;
        if own.tag() != e.tag() || numerics::max_abs_diff(own.matrix(), e.matrix()) > 1e-12 {
            return Err(Error::FrameMismatch(format!(
                "tensor frame {} differs from weight frame {}",
                own.tag().0,
                e.tag().0
            )));
        }
        Ok(())
    }
}

/// Curvature in holomorphic coordinates:
/// `R(i,j) = −∂_i∂_{\bar j}g + (∂_i g) g⁻¹ (∂_{\bar j} g)` as matrices over `(k, l)`.
pub fn chern_tensor(jet: &MetricJet) -> ChernTensor {
    let n = jet.dim();
    let mut data = vec![ZERO; n.pow(4)];
    for i in 0..n {
        let left = &jet.dg_hol[i] * jet.g_inv.matrix();
        for j in 0..n {
            let block = &left * &jet.dg_anti[j] - &jet.ddg[i][j];
            for k in 0..n {
                for l in 0..n {
                    data[idx4(n, i, j, k, l)] = block[(k, l)];
                }
            }
        }
    }
    ChernTensor {
        n,
        data,
        frame: Frame::Coordinate,
        tag: jet.tag.clone(),
        metric: jet.g.clone(),
    }
}

/// Contracts every index with the frame: unbarred slots with `E`, barred
/// slots with `Ē`.
pub fn to_frame(t: &ChernTensor, e: &UnitaryFrame) -> Result<ChernTensor> {
    if t.is_unitary() {
        return Err(Error::FrameMismatch("tensor is already in a unitary frame".into()));
    }
    if t.tag != *e.tag() {
        return Err(Error::FrameMismatch(format!(
            "frame for {} applied to tensor at {}",
            e.tag().0,
            t.tag.0
        )));
    }
    if e.dim() != t.n {
        return Err(Error::DimensionMismatch {
            expected: t.n,
            got: e.dim(),
        });
    }
    let n = t.n;
    let m = e.matrix();
    let mc = m.map(|z| z.conj());
    let mut data = t.data.clone();
    for axis in 0..4 {
        let a = if axis % 2 == 0 { m } else { &mc };
        let stride = n.pow(3 - axis as u32);
        let mut next = vec![ZERO; data.len()];
        for (pos, slot) in next.iter_mut().enumerate() {
            let alpha = (pos / stride) % n;
            let base = pos - alpha * stride;
            let mut s = ZERO;
            for i in 0..n {
                s += data[base + i * stride] * a[(i, alpha)];
            }
            *slot = s;
        }
        data = next;
    }
    Ok(ChernTensor {
        n,
        data,
        frame: Frame::Unitary(e.clone()),
        tag: t.tag.clone(),
        metric: HermitianMatrix::identity(n),
    })
}

/// Curvature of `jet` expressed in the canonical unitary frame of `g(p)`.
pub fn unitary_tensor(jet: &MetricJet) -> Result<ChernTensor> {
    let frame = numerics::unitary_frame(&jet.g, jet.tag.clone())?;
    to_frame(&chern_tensor(jet), &frame)
}

/// Connection coefficients, torsion and Gauduchon form at a point.
#[derive(Clone, Debug)]
pub struct TorsionData {
    n: usize,
    gamma: Vec<C64>,
    torsion: Vec<C64>,
    pub eta: Vec<C64>,
}

impl TorsionData {
    pub fn dim(&self) -> usize {
        self.n
    }

    /// `Γ^k_{ij}`.
    pub fn gamma(&self, k: usize, i: usize, j: usize) -> C64 {
        self.gamma[idx3(self.n, k, i, j)]
    }

    /// `T^k_{ij}`.
    pub fn torsion(&self, k: usize, i: usize, j: usize) -> C64 {
        self.torsion[idx3(self.n, k, i, j)]
    }

    pub fn torsion_norm(&self) -> f64 {
        self.torsion.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn eta_norm(&self) -> f64 {
        self.eta.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn gamma_asymmetry(&self) -> f64 {
        let n = self.n;
        let mut worst = 0.0_f64;
        for k in 0..n {
            for i in 0..n {
                for j in 0..n {
                    worst = worst.max((self.gamma(k, i, j) - self.gamma(k, j, i)).norm());
                }
            }
        }
        worst
    }
}

/// `Γ^k_{ij} = g^{k\bar q} ∂_i g_{j\bar q} = (∂_i g · g⁻¹)[(j, k)]`, stored at `(k, i, j)`.
pub fn connection(jet: &MetricJet) -> Vec<C64> {
    let n = jet.dim();
    let mut gamma = vec![ZERO; n.pow(3)];
    for i in 0..n {
        let m = &jet.dg_hol[i] * jet.g_inv.matrix();
        for j in 0..n {
            for k in 0..n {
                gamma[idx3(n, k, i, j)] = m[(j, k)];
            }
        }
    }
    gamma
}

pub fn torsion_eta(jet: &MetricJet) -> TorsionData {
    let n = jet.dim();
    let gamma = connection(jet);
    let mut torsion = vec![ZERO; n.pow(3)];
    for k in 0..n {
        for i in 0..n {
            for j in 0..n {
                torsion[idx3(n, k, i, j)] =
                    (gamma[idx3(n, k, i, j)] - gamma[idx3(n, k, j, i)]) * TORSION_FACTOR;
            }
        }
    }
    let eta = (0..n).map(|j| (0..n).map(|i| torsion[idx3(n, i, i, j)]).sum()).collect();
    TorsionData {
        n,
        gamma,
        torsion,
        eta,
    }
}

/// `∂_{\bar l} Γ^k_{ij}` stored at `[l][(k, i, j)]`.
fn connection_antiderivative(jet: &MetricJet) -> Vec<Vec<C64>> {
    let n = jet.dim();
    let ginv = jet.g_inv.matrix();
    (0..n)
        .map(|l| {
            let dginv = -(ginv * &jet.dg_anti[l] * ginv);
            let mut out = vec![ZERO; n.pow(3)];
            for i in 0..n {
                let m = &jet.ddg[i][l] * ginv + &jet.dg_hol[i] * &dginv;
                for j in 0..n {
                    for k in 0..n {
                        out[idx3(n, k, i, j)] = m[(j, k)];
                    }
                }
            }
            out
        })
        .collect()
}

/// Largest violation of `2·σ·(∂_{\bar l}(Γ^k_{ij} − Γ^k_{ji}))g_{k\bar q} =
/// R_{j\bar l i\bar q} − R_{i\bar l j\bar q}` for the factor `sigma`.
pub fn torsion_identity_residual_with(jet: &MetricJet, sigma: f64) -> f64 {
    let n = jet.dim();
    let r = chern_tensor(jet);
    let d = connection_antiderivative(jet);
    let g = jet.g.matrix();
    let mut worst = 0.0_f64;
    for l in 0..n {
        for i in 0..n {
            for j in 0..n {
                for q in 0..n {
                    let lowered: C64 = (0..n)
                        .map(|k| (d[l][idx3(n, k, i, j)] - d[l][idx3(n, k, j, i)]) * g[(k, q)])
                        .sum();
                    let rhs = r.get(j, l, i, q) - r.get(i, l, j, q);
                    worst = worst.max((lowered * (2.0 * sigma) - rhs).norm());
                }
            }
        }
    }
    worst
}

pub fn torsion_identity_residual(spec: &MetricSpec, p: &[C64]) -> Result<f64> {
    Ok(torsion_identity_residual_with(&spec.jet(p)?, TORSION_FACTOR))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TorsionCalibration {
    pub chosen: f64,
    /// `(candidate, max residual over the points)`.
    pub residuals: Vec<(f64, f64)>,
}

/// Picks the torsion factor from [`TORSION_FACTOR_CANDIDATES`] with the
/// smallest identity residual over `points`.
pub fn calibrate_torsion_factor(spec: &MetricSpec, points: &[Vec<C64>]) -> Result<TorsionCalibration> {
    let jets = points.iter().map(|p| spec.jet(p)).collect::<Result<Vec<_>>>()?;
    let residuals: Vec<(f64, f64)> = TORSION_FACTOR_CANDIDATES
        .iter()
        .map(|&s| {
            let worst = jets.iter().map(|j| torsion_identity_residual_with(j, s)).fold(0.0, f64::max);
            (s, worst)
        })
        .collect();
    let chosen = residuals
        .iter()
        .min_by(|a, b| a.1.total_cmp(&b.1))
        .map(|r| r.0)
        .expect("candidates are non-empty");
    Ok(TorsionCalibration { chosen, residuals })
}

/// `Σ_j Σ_l g^{j\bar l} ∂_{\bar l} η_j`, the trace of `η_{j,\bar l}`; it
/// equals `Σ_α η_{α,\bar α}` in any unitary frame.
pub fn eta_divergence(jet: &MetricJet) -> C64 {
    let n = jet.dim();
    let d = connection_antiderivative(jet);
    let mut total = ZERO;
    for j in 0..n {
        for l in 0..n {
            let deta: C64 = (0..n)
                .map(|i| (d[l][idx3(n, i, i, j)] - d[l][idx3(n, i, j, i)]) * TORSION_FACTOR)
                .sum();
            total += jet.inv_upper(j, l) * deta;
        }
    }
    total
}

/// The three Ricci contractions of a Chern tensor, stored as `Ric[(i, j)] = Ric_{i\bar j}`.
/// The third is not Hermitian unless the metric is Kähler-like.
#[derive(Clone, Debug, PartialEq)]
pub struct RicciTriple {
    pub ric1: HermitianMatrix,
    pub ric2: HermitianMatrix,
    pub ric3: CMat,
}

impl RicciTriple {
    pub fn max_disagreement(&self) -> f64 {
        let (a, b, c) = (self.ric1.matrix(), self.ric2.matrix(), &self.ric3);
        numerics::max_abs_diff(a, b).max(numerics::max_abs_diff(a, c)).max(numerics::max_abs_diff(b, c))
    }

    pub fn max_norm(&self) -> f64 {
        [self.ric1.matrix(), self.ric2.matrix(), &self.ric3]
            .iter()
            .flat_map(|m| m.iter().map(|z| z.norm()))
            .fold(0.0, f64::max)
    }
}

pub fn ricci(t: &ChernTensor) -> Result<RicciTriple> {
    let n = t.n;
    let ginv = numerics::invert_pd(&t.metric)?;
    // g^{k\bar l} = ginv[(l, k)]
    let contract = |f: &dyn Fn(usize, usize, usize, usize) -> C64| -> CMat {
        CMat::from_fn(n, n, |i, j| {
            let mut s = ZERO;
            for k in 0..n {
                for l in 0..n {
                    s += ginv.get(l, k) * f(i, j, k, l);
                }
            }
            s
        })
    };
    Ok(RicciTriple {
        ric1: HermitianMatrix::with_tolerance(contract(&|i, j, k, l| t.get(i, j, k, l)), 1e-8)?,
        ric2: HermitianMatrix::with_tolerance(contract(&|i, j, k, l| t.get(k, l, i, j)), 1e-8)?,
        ric3: contract(&|i, j, k, l| t.get(i, l, k, j)),
    })
}

/// Least-squares constant `c` with `Ric ≈ c·g`, and the residual `max|Ric − c g|`.
pub fn fit_proportional(ric: &HermitianMatrix, g: &HermitianMatrix) -> (f64, f64) {
    let num: f64 = ric.matrix().iter().zip(g.matrix().iter()).map(|(a, b)| (a * b.conj()).re).sum();
    let den: f64 = g.matrix().iter().map(|b| b.norm_sqr()).sum();
    let c = num / den;
    let resid = numerics::max_abs_diff(ric.matrix(), &g.matrix().map(|z| z * c));
    (c, resid)
}

/// `R(v, v̄, v, v̄)` without normalization.
fn rvvvv(t: &ChernTensor, v: &[C64]) -> C64 {
    let n = t.n;
    let vc: Vec<C64> = v.iter().map(|z| z.conj()).collect();
    let mut s = ZERO;
    for i in 0..n {
        for j in 0..n {
            let a = v[i] * vc[j];
            for k in 0..n {
                for l in 0..n {
                    s += t.get(i, j, k, l) * a * v[k] * vc[l];
                }
            }
        }
    }
    s
}

/// Holomorphic sectional curvature `R_{v\bar v v\bar v}/|v|⁴`, with the norm
/// taken in the tensor's own metric.
pub fn hsc(t: &ChernTensor, v: &[C64]) -> Result<f64> {
    if v.len() != t.n {
        return Err(Error::DimensionMismatch {
            expected: t.n,
            got: v.len(),
        });
    }
    let norm2 = t.metric.norm_sq(v);
    if !(norm2.sqrt() > 1e-14) {
        return Err(Error::DegenerateDirection(norm2.max(0.0).sqrt()));
    }
    Ok(rvvvv(t, v).re / (norm2 * norm2))
}

/// A unitary frame with nonnegative unit-norm weights.
#[derive(Clone, Debug)]
pub struct FrameWeights {
    pub frame: UnitaryFrame,
    a: Vec<f64>,
}

impl FrameWeights {
    /// Normalizes `a` to unit length.
    pub fn new(frame: UnitaryFrame, a: &[f64]) -> Result<Self> {
        Ok(Self {
            a: normalize_weights(a, frame.dim())?,
            frame,
        })
    }

    pub fn weights(&self) -> &[f64] {
        &self.a
    }
}

pub fn normalize_weights(a: &[f64], n: usize) -> Result<Vec<f64>> {
    if a.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: a.len(),
        });
    }
    if a.iter().any(|x| !(*x >= 0.0) || !x.is_finite()) {
        return Err(Error::InvalidWeights("weights must be finite and nonnegative".into()));
    }
    let norm = a.iter().map(|x| x * x).sum::<f64>().sqrt();
    if norm == 0.0 {
        return Err(Error::InvalidWeights("weights are all zero".into()));
    }
    Ok(a.iter().map(|x| x / norm).collect())
}

/// `Σ R_{i\bar i j\bar j} a_i a_j / |a|²` with its imaginary residue.
pub fn rbc_value_complex(t: &ChernTensor, w: &FrameWeights) -> Result<C64> {
    t.require_same_frame(&w.frame)?;
    let a = w.weights();
    let mut s = ZERO;
    for i in 0..t.n {
        for j in 0..t.n {
            s += t.get(i, i, j, j) * (a[i] * a[j]);
        }
    }
    Ok(s)
}

pub fn rbc_value(t: &ChernTensor, w: &FrameWeights) -> Result<f64> {
    Ok(rbc_value_complex(t, w)?.re)
}

/// `Σ R_{i\bar j k\bar l} ξ_{ij} ξ_{kl}` for any matrix `ξ`, no checks.
pub fn quad_form_raw(t: &ChernTensor, xi: &CMat) -> C64 {
    let n = t.n;
    let mut s = ZERO;
    for i in 0..n {
        for j in 0..n {
            let x = xi[(i, j)];
            if x == ZERO {
                continue;
            }
            for k in 0..n {
                for l in 0..n {
                    s += t.get(i, j, k, l) * x * xi[(k, l)];
                }
            }
        }
    }
    s
}

/// The real bisectional quadratic form on a unit PSD direction.
pub fn quad_form(t: &ChernTensor, xi: &PsdDirection) -> Result<f64> {
    t.require_unitary()?;
    if xi.dim() != t.n {
        return Err(Error::DimensionMismatch {
            expected: t.n,
            got: xi.dim(),
        });
    }
    Ok(quad_form_raw(t, xi.matrix()).re)
}

/// `Σ_{i,k} (R_{i\bar i k\bar k} + R_{i\bar k k\bar i}) a_i a_k`.
pub fn h_positive_pairsum(t: &ChernTensor, a: &[f64]) -> Result<f64> {
    t.require_unitary()?;
    if a.len() != t.n {
        return Err(Error::DimensionMismatch {
            expected: t.n,
            got: a.len(),
        });
    }
    if a.iter().any(|x| !(*x >= 0.0)) || a.iter().all(|x| *x == 0.0) {
        return Err(Error::InvalidWeights("weights must be nonnegative and not all zero".into()));
    }
    let mut s = ZERO;
    for i in 0..t.n {
        for k in 0..t.n {
            s += (t.get(i, i, k, k) + t.get(i, k, k, i)) * (a[i] * a[k]);
        }
    }
    Ok(s.re)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SymmetryReport {
    /// `max|R_{i\bar j k\bar l} − conj(R_{j\bar i l\bar k})|`.
    pub hermitian_pair: f64,
    /// `max` of `|R_{i\bar j k\bar l} − R_{k\bar j i\bar l}|` and `|R_{i\bar j k\bar l} − R_{i\bar l k\bar j}|`.
    pub kahler_like: f64,
    /// `max|R_{i\bar j k\bar l} + R_{k\bar l i\bar j}|`.
    pub skew: f64,
    /// `max|R_{i\bar j k\bar l} + R_{k\bar l i\bar j} − 2c g_{i\bar l} g_{k\bar j}|`.
    pub constant_pattern: f64,
    pub c: f64,
}

/// Symmetry residuals of `t`; the constant-curvature pattern uses the
/// tensor's metric, which is `δ` in a unitary frame.
pub fn symmetry_report(t: &ChernTensor, c: f64) -> SymmetryReport {
    let n = t.n;
    let g = t.metric.matrix();
    let mut rep = SymmetryReport {
        hermitian_pair: 0.0,
        kahler_like: 0.0,
        skew: 0.0,
        constant_pattern: 0.0,
        c,
    };
    for i in 0..n {
        for j in 0..n {
            for k in 0..n {
                for l in 0..n {
                    let r = t.get(i, j, k, l);
                    let swap = t.get(k, l, i, j);
                    rep.hermitian_pair = rep.hermitian_pair.max((r - t.get(j, i, l, k).conj()).norm());
                    rep.kahler_like = rep
                        .kahler_like
                        .max((r - t.get(k, j, i, l)).norm())
                        .max((r - t.get(i, l, k, j)).norm());
                    rep.skew = rep.skew.max((r + swap).norm());
                    let pattern = g[(i, l)] * g[(k, j)] * (2.0 * c);
                    rep.constant_pattern = rep.constant_pattern.max((r + swap - pattern).norm());
                }
            }
        }
    }
    rep
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metric::{catalog, params, sample_ball};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn d(a: usize, b: usize) -> f64 {
        if a == b {
            1.0
        } else {
            0.0
        }
    }

    fn ex22(n: usize) -> MetricSpec {
        catalog("example_2_2", &params(&[("eps", 0.3), ("n", n as f64)])).unwrap()
    }

    #[test]
    fn example_2_2_components_at_origin() {
        let spec = ex22(2);
        let t = chern_tensor(&spec.jet(&[ZERO, ZERO]).unwrap());
        for i in 0..2 {
            for j in 0..2 {
                for k in 0..2 {
                    for l in 0..2 {
                        let want = -d(i, j) * d(k, l) + 1.7 * d(i, l) * d(k, j);
                        assert!((t.get(i, j, k, l) - c(want, 0.0)).norm() <= 1e-12);
                    }
                }
            }
        }
    }

    #[test]
    fn example_2_3_components_and_ricci() {
        let spec = catalog("example_2_3", &params(&[("b", 1.0)])).unwrap();
        let t = chern_tensor(&spec.jet(&[ZERO, ZERO]).unwrap());
        let expect = [
            ((0, 0, 0, 0), 1.0),
            ((1, 1, 1, 1), 1.0),
            ((0, 0, 1, 1), 5.0),
            ((1, 1, 0, 0), -2.0),
            ((1, 0, 0, 1), -2.0),
            ((0, 1, 1, 0), -2.0),
        ];
        let mut nonzero = 0;
        for (pos, z) in t.data().iter().enumerate() {
            if z.norm() > 1e-14 {
                nonzero += 1;
                let (i, j, k, l) = (pos / 8, (pos / 4) % 2, (pos / 2) % 2, pos % 2);
                let want = expect.iter().find(|e| e.0 == (i, j, k, l)).expect("unexpected component").1;
                assert!((z - c(want, 0.0)).norm() <= 1e-12);
            }
        }
        assert_eq!(nonzero, 6);
        let ric = ricci(&t).unwrap();
        assert_eq!(ric.ric3[(0, 0)], c(-1.0, 0.0));
        assert_eq!(ric.ric1.get(1, 1), c(-1.0, 0.0));
        assert_eq!(ric.ric2.get(0, 0), c(-1.0, 0.0));
    }

    #[test]
    fn flat_is_curvature_free() {
        let spec = catalog("flat", &params(&[("n", 3.0)])).unwrap();
        let jet = spec.jet(&[c(0.1, 0.2), c(0.3, 0.0), c(0.0, -1.0)]).unwrap();
        let t = chern_tensor(&jet);
        assert!(t.data().iter().all(|z| *z == ZERO));
        let tor = torsion_eta(&jet);
        assert_eq!(tor.torsion_norm(), 0.0);
        assert_eq!(eta_divergence(&jet), ZERO);
        assert_eq!(torsion_identity_residual_with(&jet, TORSION_FACTOR), 0.0);
        let rep = symmetry_report(&t, 0.0);
        assert_eq!((rep.hermitian_pair, rep.kahler_like, rep.skew, rep.constant_pattern), (0.0, 0.0, 0.0, 0.0));
    }

    #[test]
    fn fubini_study_connection_in_one_dimension() {
        let spec = catalog("fs", &params(&[("n", 1.0)])).unwrap();
        let jet = spec.jet(&[c(0.5, 0.0)]).unwrap();
        let tor = torsion_eta(&jet);
        assert!((tor.gamma(0, 0, 0) - c(-0.8, 0.0)).norm() <= 1e-14);
    }

    #[test]
    fn fubini_study_is_kahler_einstein_with_constant_hsc() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for n in [2usize, 3] {
            let spec = catalog("fs", &params(&[("n", n as f64)])).unwrap();
            for _ in 0..10 {
                let p = sample_ball(n, 1.5, &mut rng);
                let jet = spec.jet(&p).unwrap();
                let tor = torsion_eta(&jet);
                assert!(tor.torsion_norm() <= 1e-10 && tor.eta_norm() <= 1e-10);
                let t = chern_tensor(&jet);
                assert!(symmetry_report(&t, 0.0).kahler_like <= 1e-8);
                let ric = ricci(&t).unwrap();
                assert!(ric.max_disagreement() <= 1e-8);
                let (k, resid) = fit_proportional(&ric.ric1, &jet.g);
                assert!(resid <= 1e-8 && (k - (n as f64 + 1.0)).abs() <= 1e-8);
                let v: Vec<C64> = numerics::ginibre(n, 1, &mut rng).iter().copied().collect();
                assert!((hsc(&t, &v).unwrap() - 2.0).abs() <= 1e-8);
            }
        }
    }

    #[test]
    fn hsc_is_scale_invariant_and_rejects_zero() {
        let spec = ex22(2);
        let t = chern_tensor(&spec.jet(&[c(0.05, 0.02), c(-0.1, 0.0)]).unwrap());
        let v = [c(0.3, -0.2), c(1.0, 0.5)];
        let w: Vec<C64> = v.iter().map(|z| z * c(-2.0, 3.5)).collect();
        assert!((hsc(&t, &v).unwrap() - hsc(&t, &w).unwrap()).abs() <= 1e-12);
        assert!(matches!(hsc(&t, &[ZERO, ZERO]), Err(Error::DegenerateDirection(_))));
    }

    #[test]
    fn example_2_2_eta_matches_finite_differences() {
        let spec = ex22(2);
        let p = [c(0.1, 0.0), c(0.05, 0.0)];
        let jet = spec.jet(&p).unwrap();
        let tor = torsion_eta(&jet);
        assert!(tor.eta_norm() > 1e-3);
        let n = 2;
        let fd: Vec<Vec<Vec<C64>>> = (0..n)
            .map(|a| (0..n).map(|b| spec.entry(a, b).fd_jet2(&p, 1e-4).unwrap().d1_hol.clone()).collect())
            .collect();
        for k in 0..n {
            for i in 0..n {
                for j in 0..n {
                    let g: C64 = (0..n).map(|q| jet.inv_upper(k, q) * fd[j][q][i]).sum();
                    assert!((g - tor.gamma(k, i, j)).norm() <= 1e-7);
                }
            }
        }
        for j in 0..n {
            let eta: C64 = (0..n)
                .map(|i| {
                    let gij: C64 = (0..n).map(|q| jet.inv_upper(i, q) * fd[j][q][i]).sum();
                    let gji: C64 = (0..n).map(|q| jet.inv_upper(i, q) * fd[i][q][j]).sum();
                    (gij - gji) * TORSION_FACTOR
                })
                .sum();
            assert!((eta - tor.eta[j]).norm() <= 1e-7);
        }
    }

    #[test]
    fn torsion_factor_calibration_picks_one_half() {
        let spec = ex22(2);
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let points: Vec<_> = (0..20).map(|_| sample_ball(2, 0.1, &mut rng)).collect();
        let cal = calibrate_torsion_factor(&spec, &points).unwrap();
        assert_eq!(cal.chosen, TORSION_FACTOR);
        let at = |s: f64| cal.residuals.iter().find(|r| r.0 == s).unwrap().1;
        assert!(at(0.5) <= 1e-8);
        assert!(at(1.0) > 1e-3);
    }

    #[test]
    fn frame_transform_of_identity_is_noop() {
        let spec = ex22(2);
        let jet = spec.jet(&[ZERO, ZERO]).unwrap();
        let t = chern_tensor(&jet);
        let e = numerics::unitary_frame(&jet.g, jet.tag.clone()).unwrap();
        let u = to_frame(&t, &e).unwrap();
        for (a, b) in t.data().iter().zip(u.data()) {
            assert!((a - b).norm() <= 1e-15);
        }
        assert!(matches!(to_frame(&u, &e), Err(Error::FrameMismatch(_))));
        let other = numerics::unitary_frame(&jet.g, FrameTag("elsewhere".into())).unwrap();
        assert!(matches!(to_frame(&t, &other), Err(Error::FrameMismatch(_))));
    }

    #[test]
    fn rbc_values_at_origin() {
        for n in 2..=4 {
            let t = unitary_tensor(&ex22(n).jet(&vec![ZERO; n]).unwrap()).unwrap();
            let Frame::Unitary(e) = t.frame().clone() else { unreachable!() };
            let w = FrameWeights::new(e.clone(), &vec![1.0; n]).unwrap();
            assert!((rbc_value(&t, &w).unwrap() - (-(n as f64) + 2.0 - 0.3)).abs() <= 1e-10);
            let one = FrameWeights::new(e, &{
                let mut a = vec![0.0; n];
                a[0] = 1.0;
                a
            })
            .unwrap();
            let h = hsc(&t, &numerics::column(&CMat::identity(n, n), 0)).unwrap();
            assert!((rbc_value(&t, &one).unwrap() - h).abs() <= 1e-12);
            assert!((h - 0.7).abs() <= 1e-12);
        }
        let spec = catalog("example_2_3", &params(&[("b", 1.0)])).unwrap();
        let t = unitary_tensor(&spec.jet(&[ZERO, ZERO]).unwrap()).unwrap();
        let Frame::Unitary(e) = t.frame().clone() else { unreachable!() };
        // x = y = 1/√2, t = 0 in x² + y² + 3bxy − 2(1+b)|t|².
        let w = FrameWeights::new(e, &[1.0, 1.0]).unwrap();
        assert!((rbc_value(&t, &w).unwrap() - 2.5).abs() <= 1e-12);
    }

    #[test]
    fn rbc_rejects_foreign_frame() {
        let jet = ex22(2).jet(&[ZERO, ZERO]).unwrap();
        let t = unitary_tensor(&jet).unwrap();
        let other = numerics::unitary_frame(&jet.g, FrameTag("x".into())).unwrap();
        let w = FrameWeights::new(other, &[1.0, 0.0]).unwrap();
        assert!(matches!(rbc_value(&t, &w), Err(Error::FrameMismatch(_))));
        assert!(matches!(rbc_value(&chern_tensor(&jet), &w), Err(Error::FrameMismatch(_))));
    }

    #[test]
    fn pairsum_gap_for_example_2_2() {
        let t = unitary_tensor(&ex22(2).jet(&[ZERO, ZERO]).unwrap()).unwrap();
        // (1 − ε)(1 + δ_ik) summed over uniform unit weights.
        let a = [0.5_f64.sqrt(), 0.5_f64.sqrt()];
        let s = h_positive_pairsum(&t, &a).unwrap();
        assert!((s - 0.7 * 3.0 * 0.5 * 2.0).abs() <= 1e-12, "{s}");
        assert!((h_positive_pairsum(&t, &[1.0, 0.0]).unwrap() - 1.4).abs() <= 1e-12);
        assert!(h_positive_pairsum(&t, &[0.0, 0.0]).is_err());
    }

    #[test]
    fn symmetry_reports() {
        let fs = catalog("fs", &params(&[("n", 2.0)])).unwrap();
        let t = unitary_tensor(&fs.jet(&[c(0.3, 0.1), c(0.1, 0.0)]).unwrap()).unwrap();
        let rep = symmetry_report(&t, 0.0);
        assert!(rep.kahler_like <= 1e-8 && rep.hermitian_pair <= 1e-8);
        assert!(rep.skew > 1.0);

        let spec = catalog("example_2_3", &params(&[("b", 1.0)])).unwrap();
        let t = unitary_tensor(&spec.jet(&[ZERO, ZERO]).unwrap()).unwrap();
        assert!(symmetry_report(&t, 0.0).constant_pattern >= 0.1);
    }
}
