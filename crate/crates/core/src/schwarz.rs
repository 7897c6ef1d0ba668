//! Numerical checks of the Schwarz calculation for holomorphic maps between
//! Hermitian charts.
//!
//! For `f: (M, g) → (N, h)` with `u = tr_g f*h`, the Bochner identity reads
//! `□_g u = |∇df|² + Ric⁽²⁾(g)(f*h) − R^h(Ψ, Ψ)` with
//! `Ψ_{αβ} = g^{i\bar j} f^α_i conj(f^β_j)`. The left side is computed by
//! finite differences of the exactly evaluated `u`, the right side from exact
//! jets, so the two are independent.

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::certify::{self, Budget, Condition, Relation, Status};
use crate::curvature;
use crate::error::{Error, Result};
use crate::metric::{MetricJet, MetricSpec};
use crate::numerics::{self, CMat, HermitianMatrix, C64, ZERO};
use crate::wirtinger::Expr;

/// Default finite-difference step for `□u`.
pub const DEFAULT_STEP: f64 = 1e-3;
/// Residual above which the Richardson combination is used.
pub const BOCHNER_TOLERANCE: f64 = 1e-4;
/// `u` below this marks a critical point of `f`.
pub const CRITICAL_U: f64 = 1e-10;
/// Singular values above this count towards the rank of `df`.
pub const RANK_THRESHOLD: f64 = 1e-8;

/// A holomorphic map `C^m → C^n` given by expressions in `z_1..z_m`.
#[derive(Clone, Debug)]
pub struct MapSpec {
    m: usize,
    n: usize,
    sources: Vec<String>,
    components: Vec<Expr>,
    /// `df[α][i] = ∂f_α/∂z_i`.
    df: Vec<Vec<Expr>>,
    /// `d2f[α][i][j] = ∂²f_α/∂z_i∂z_j`.
    d2f: Vec<Vec<Vec<Expr>>>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MapFile {
    pub domain_dim: usize,
    pub target_dim: usize,
    pub components: Vec<String>,
}

impl MapSpec {
    pub fn from_exprs(m: usize, components: Vec<Expr>) -> Result<Self> {
        if m == 0 || components.is_empty() {
            return Err(Error::Invalid("map dimensions must be at least 1".into()));
        }
        for (a, c) in components.iter().enumerate() {
            if !c.is_holomorphic() {
                return Err(Error::NotHolomorphic(a + 1));
            }
            if c.max_var() > m {
                return Err(Error::VariableOutOfRange {
                    index: c.max_var(),
                    dim: m,
                });
            }
        }
        let df: Vec<Vec<Expr>> = components
            .iter()
            .map(|c| (0..m).map(|i| c.derivative(i, false)).collect())
            .collect();
        let d2f = df
            .iter()
            .map(|row| row.iter().map(|d| (0..m).map(|j| d.derivative(j, false)).collect()).collect())
            .collect();
        Ok(Self {
            m,
            n: components.len(),
            sources: components.iter().map(|c| c.to_string()).collect(),
            components,
            df,
            d2f,
        })
    }

    /// Parses one expression per target coordinate.
    pub fn parse(m: usize, n: usize, components: &[String]) -> Result<Self> {
        if components.len() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                got: components.len(),
            });
        }
        let params = BTreeMap::new();
        let exprs = components
            .iter()
            .map(|s| Expr::parse(s, m, &params))
            .collect::<Result<Vec<_>>>()?;
        let mut spec = Self::from_exprs(m, exprs)?;
        spec.sources = components.to_vec();
        Ok(spec)
    }

    pub fn from_file(file: &MapFile) -> Result<Self> {
        Self::parse(file.domain_dim, file.target_dim, &file.components)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let file: MapFile = serde_json::from_str(text).map_err(|e| Error::Invalid(format!("map file: {e}")))?;
        Self::from_file(&file)
    }

    pub fn to_file(&self) -> MapFile {
        MapFile {
            domain_dim: self.m,
            target_dim: self.n,
            components: self.sources.clone(),
        }
    }

    pub fn identity(n: usize) -> Self {
        Self::from_exprs(n, (0..n).map(Expr::z).collect()).expect("identity is holomorphic")
    }

    pub fn constant(m: usize, value: &[C64]) -> Self {
        Self::from_exprs(m, value.iter().map(|c| Expr::Const(*c)).collect()).expect("constants are holomorphic")
    }

    /// `z ↦ A z`.
    pub fn linear(a: &CMat) -> Self {
        let comps = (0..a.nrows())
            .map(|r| {
                (0..a.ncols())
                    .map(|c| Expr::Const(a[(r, c)]) * Expr::z(c))
                    .reduce(|x, y| x + y)
                    .unwrap_or(Expr::num(0.0))
            })
            .collect();
        Self::from_exprs(a.ncols(), comps).expect("linear maps are holomorphic")
    }

    pub fn domain_dim(&self) -> usize {
        self.m
    }

    pub fn target_dim(&self) -> usize {
        self.n
    }

    pub fn sources(&self) -> &[String] {
        &self.sources
    }

    fn check_point(&self, p: &[C64]) -> Result<()> {
        if p.len() != self.m {
            return Err(Error::DimensionMismatch {
                expected: self.m,
                got: p.len(),
            });
        }
        Ok(())
    }

    pub fn eval(&self, p: &[C64]) -> Result<Vec<C64>> {
        self.check_point(p)?;
        self.components.iter().map(|c| c.eval(p)).collect()
    }

    /// `df[(α, i)] = ∂f_α/∂z_i`.
    pub fn jacobian(&self, p: &[C64]) -> Result<CMat> {
        self.check_point(p)?;
        let mut m = CMat::zeros(self.n, self.m);
        for a in 0..self.n {
            for i in 0..self.m {
                m[(a, i)] = self.df[a][i].eval(p)?;
            }
        }
        Ok(m)
    }

    pub fn jet(&self, p: &[C64]) -> Result<MapJet> {
        let fp = self.eval(p)?;
        let df = self.jacobian(p)?;
        let mut d2f = vec![CMat::zeros(self.n, self.m); self.m];
        for (j, mat) in d2f.iter_mut().enumerate() {
            for a in 0..self.n {
                for i in 0..self.m {
                    mat[(a, i)] = self.d2f[a][i][j].eval(p)?;
                }
            }
        }
        Ok(MapJet {
            p: p.to_vec(),
            fp,
            df,
            d2f,
        })
    }
}

/// First and second derivatives of a map at a point.
#[derive(Clone, Debug)]
pub struct MapJet {
    pub p: Vec<C64>,
    pub fp: Vec<C64>,
    /// `df[(α, i)] = f^α_i`.
    pub df: CMat,
    /// `d2f[j][(α, i)] = ∂_j f^α_i`.
    pub d2f: Vec<CMat>,
}

impl MapJet {
    pub fn symmetry_residual(&self) -> f64 {
        let m = self.df.ncols();
        let mut worst = 0.0_f64;
        for i in 0..m {
            for j in 0..m {
                for a in 0..self.df.nrows() {
                    worst = worst.max((self.d2f[j][(a, i)] - self.d2f[i][(a, j)]).norm());
                }
            }
        }
        worst
    }
}

/// `Φ_{p\bar q} = h_{α\bar β} f^α_p conj(f^β_q)`, i.e. `dfᵀ h conj(df)`.
pub fn pullback(h: &HermitianMatrix, df: &CMat) -> CMat {
    df.transpose() * h.matrix() * df.map(|z| z.conj())
}

/// `tr(g⁻¹ Φ)` for a pulled-back form `Φ`.
fn trace_with(ginv: &CMat, phi: &CMat) -> f64 {
    (ginv * phi).trace().re
}

/// `u = g^{i\bar j} h_{α\bar β} f^α_i conj(f^β_j)`.
pub fn trace_u(gj: &MetricJet, hj: &MetricJet, mj: &MapJet) -> f64 {
    trace_with(gj.g_inv.matrix(), &pullback(&hj.g, &mj.df))
}

/// `u` at an arbitrary point, from metric values only.
pub fn u_at(g: &MetricSpec, h: &MetricSpec, f: &MapSpec, z: &[C64]) -> Result<f64> {
    let gz = g.values(z)?;
    let ginv = numerics::invert_pd(&gz)?;
    let hz = h.values(&f.eval(z)?)?;
    Ok(trace_with(ginv.matrix(), &pullback(&hz, &f.jacobian(z)?)))
}

#[derive(Clone, Debug)]
pub struct NablaDf {
    /// `tensor[α][(i, j)] = (∇df)^α_{ij}`.
    pub tensor: Vec<CMat>,
    pub norm_sq: f64,
}

fn check_dims(gj: &MetricJet, hj: &MetricJet, mj: &MapJet) -> Result<()> {
    if gj.dim() != mj.df.ncols() {
        return Err(Error::DimensionMismatch {
            expected: gj.dim(),
            got: mj.df.ncols(),
        });
    }
    if hj.dim() != mj.df.nrows() {
        return Err(Error::DimensionMismatch {
            expected: hj.dim(),
            got: mj.df.nrows(),
        });
    }
    Ok(())
}

/// `(∇df)^α_{ij} = ∂_j f^α_i − Γ^{g,k}_{ji} f^α_k + Γ^{h,α}_{βγ} f^β_j f^γ_i`
/// and its norm with `g⁻¹ ⊗ g⁻¹ ⊗ h`.
pub fn nabla_df(gj: &MetricJet, hj: &MetricJet, mj: &MapJet) -> Result<NablaDf> {
    check_dims(gj, hj, mj)?;
    let (m, n) = (gj.dim(), hj.dim());
    let gg = curvature::torsion_eta(gj);
    let gh = curvature::torsion_eta(hj);
    let f = &mj.df;
    let tensor: Vec<CMat> = (0..n)
        .map(|a| {
            CMat::from_fn(m, m, |i, j| {
                let mut v = mj.d2f[j][(a, i)];
                for k in 0..m {
                    v -= gg.gamma(k, j, i) * f[(a, k)];
                }
                for b in 0..n {
                    for c in 0..n {
                        v += gh.gamma(a, b, c) * f[(b, j)] * f[(c, i)];
                    }
                }
                v
            })
        })
        .collect();
    // g^{i\bar i'} = ginv[(i', i)]
    let ginv = gj.g_inv.matrix();
    let mut total = ZERO;
    for a in 0..n {
        for b in 0..n {
            let hab = hj.g.get(a, b);
            if hab == ZERO {
                continue;
            }
            let mut s = ZERO;
            for i in 0..m {
                for j in 0..m {
                    for i2 in 0..m {
                        for j2 in 0..m {
                            s += tensor[a][(i, j)] * tensor[b][(i2, j2)].conj() * ginv[(i2, i)] * ginv[(j2, j)];
                        }
                    }
                }
            }
            total += hab * s;
        }
    }
    Ok(NablaDf {
        tensor,
        norm_sq: total.re,
    })
}

/// The three terms of the right-hand side of the Bochner identity.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct BochnerTerms {
    pub u: f64,
    pub nabla_sq: f64,
    /// `Ric⁽²⁾_{k\bar l} g^{k\bar q} g^{p\bar l} Φ_{p\bar q}`.
    pub ricci_term: f64,
    /// `R^h_{α\bar β γ\bar δ} Ψ_{αβ} Ψ_{γδ}`.
    pub target_term: f64,
    pub rhs: f64,
}

/// `Ψ_{αβ} = g^{i\bar j} f^α_i conj(f^β_j) = df · conj(g⁻¹) · df†`.
fn target_direction(gj: &MetricJet, df: &CMat) -> CMat {
    df * gj.g_inv.matrix().map(|z| z.conj()) * df.adjoint()
}

pub fn bochner_terms(gj: &MetricJet, hj: &MetricJet, mj: &MapJet) -> Result<BochnerTerms> {
    check_dims(gj, hj, mj)?;
    let ginv = gj.g_inv.matrix();
    let phi = pullback(&hj.g, &mj.df);
    let u = trace_with(ginv, &phi);
    let nabla_sq = nabla_df(gj, hj, mj)?.norm_sq;
    let ric2 = curvature::ricci(&curvature::chern_tensor(gj))?.ric2;
    let ricci_term = (ric2.matrix() * ginv * &phi * ginv).trace().re;
    let rh = curvature::chern_tensor(hj);
    let target_term = curvature::quad_form_raw(&rh, &target_direction(gj, &mj.df)).re;
    Ok(BochnerTerms {
        u,
        nabla_sq,
        ricci_term,
        target_term,
        rhs: nabla_sq + ricci_term - target_term,
    })
}

/// Central-difference `∂_a∂_{\bar b} φ` of a real function on `C^m`.
fn complex_hessian_fd(phi: &dyn Fn(&[C64]) -> Result<f64>, p: &[C64], h: f64) -> Result<CMat> {
    let m = p.len();
    let at = |moves: &[(usize, f64)]| -> Result<f64> {
        let mut q = p.to_vec();
        for &(r, d) in moves {
            q[r / 2] += if r % 2 == 0 { C64::new(d, 0.0) } else { C64::new(0.0, d) };
        }
        phi(&q)
    };
    let f0 = phi(p)?;
    let dims = 2 * m;
    let mut second = vec![vec![0.0; dims]; dims];
    for r in 0..dims {
        second[r][r] = (at(&[(r, h)])? - 2.0 * f0 + at(&[(r, -h)])?) / (h * h);
        for s in r + 1..dims {
            let v = (at(&[(r, h), (s, h)])? - at(&[(r, h), (s, -h)])? - at(&[(r, -h), (s, h)])?
                + at(&[(r, -h), (s, -h)])?)
                / (4.0 * h * h);
            second[r][s] = v;
            second[s][r] = v;
        }
    }
    Ok(CMat::from_fn(m, m, |a, b| {
        let (xa, ya, xb, yb) = (2 * a, 2 * a + 1, 2 * b, 2 * b + 1);
        C64::new(
            0.25 * (second[xa][xb] + second[ya][yb]),
            0.25 * (second[xa][yb] - second[ya][xb]),
        )
    }))
}

/// `∂_a φ` by central differences.
fn complex_gradient_fd(phi: &dyn Fn(&[C64]) -> Result<f64>, p: &[C64], h: f64) -> Result<Vec<C64>> {
    (0..p.len())
        .map(|a| {
            let shifted = |d: C64| {
                let mut q = p.to_vec();
                q[a] += d;
                phi(&q)
            };
            let dx = (shifted(C64::new(h, 0.0))? - shifted(C64::new(-h, 0.0))?) / (2.0 * h);
            let dy = (shifted(C64::new(0.0, h))? - shifted(C64::new(0.0, -h))?) / (2.0 * h);
            Ok(C64::new(0.5 * dx, -0.5 * dy))
        })
        .collect()
}

fn check_step(step: f64) -> Result<()> {
    if !(step > 0.0 && step <= 1e-2) {
        return Err(Error::Invalid(format!("finite-difference step {step} outside (0, 1e-2]")));
    }
    Ok(())
}

/// `g^{i\bar j}(p) ∂_i∂_{\bar j} φ` by central differences.
fn laplacian_fd(g: &MetricSpec, phi: &dyn Fn(&[C64]) -> Result<f64>, p: &[C64], step: f64) -> Result<f64> {
    check_step(step)?;
    let ginv = numerics::invert_pd(&g.values(p)?)?;
    let hess = complex_hessian_fd(phi, p, step)?;
    Ok((ginv.matrix() * hess).trace().re)
}

/// `(4 D(h/2) − D(h)) / 3`.
fn laplacian_richardson(g: &MetricSpec, phi: &dyn Fn(&[C64]) -> Result<f64>, p: &[C64], step: f64) -> Result<f64> {
    let coarse = laplacian_fd(g, phi, p, step)?;
    let fine = laplacian_fd(g, phi, p, step / 2.0)?;
    Ok((4.0 * fine - coarse) / 3.0)
}

fn check_map(g: &MetricSpec, h: &MetricSpec, f: &MapSpec) -> Result<()> {
    if f.domain_dim() != g.dim() {
        return Err(Error::DimensionMismatch {
            expected: g.dim(),
            got: f.domain_dim(),
        });
    }
    if f.target_dim() != h.dim() {
        return Err(Error::DimensionMismatch {
            expected: h.dim(),
            got: f.target_dim(),
        });
    }
    Ok(())
}

/// `□_g u` by finite differences of `u`.
pub fn box_u_fd(g: &MetricSpec, h: &MetricSpec, f: &MapSpec, p: &[C64], step: f64) -> Result<f64> {
    check_map(g, h, f)?;
    laplacian_fd(g, &|z| u_at(g, h, f, z), p, step)
}

pub fn box_u_richardson(g: &MetricSpec, h: &MetricSpec, f: &MapSpec, p: &[C64], step: f64) -> Result<f64> {
    check_map(g, h, f)?;
    laplacian_richardson(g, &|z| u_at(g, h, f, z), p, step)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BochnerReport {
    pub point: Vec<C64>,
    pub terms: BochnerTerms,
    pub box_u: f64,
    pub step: f64,
    pub refined: bool,
    pub residual: f64,
}

pub struct Jets {
    pub g: MetricJet,
    pub h: MetricJet,
    pub map: MapJet,
}

pub fn jets(g: &MetricSpec, h: &MetricSpec, f: &MapSpec, p: &[C64]) -> Result<Jets> {
    check_map(g, h, f)?;
    let map = f.jet(p)?;
    Ok(Jets {
        g: g.jet(p)?,
        h: h.jet(&map.fp)?,
        map,
    })
}

/// `|□u − RHS|`, refining `□u` by Richardson extrapolation when the plain
/// difference misses [`BOCHNER_TOLERANCE`].
pub fn bochner_residual(g: &MetricSpec, h: &MetricSpec, f: &MapSpec, p: &[C64], step: f64) -> Result<BochnerReport> {
    let j = jets(g, h, f, p)?;
    let terms = bochner_terms(&j.g, &j.h, &j.map)?;
    let mut box_u = box_u_fd(g, h, f, p, step)?;
    let mut refined = false;
    if (box_u - terms.rhs).abs() > BOCHNER_TOLERANCE {
        box_u = box_u_richardson(g, h, f, p, step)?;
        refined = true;
    }
    Ok(BochnerReport {
        point: p.to_vec(),
        terms,
        box_u,
        step,
        refined,
        residual: (box_u - terms.rhs).abs(),
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct KatoReport {
    pub point: Vec<C64>,
    pub u: f64,
    pub critical: bool,
    /// `□ log u` (absent at critical points).
    pub box_log_u: Option<f64>,
    /// `(Ric⁽²⁾ term − R^h term)/u`.
    pub lower_bound: Option<f64>,
    /// `box_log_u − lower_bound`; nonnegative up to finite-difference error.
    pub residual: Option<f64>,
    /// `u |∇df|² − |∂u|²_g`, nonnegative by the Kato inequality.
    pub kato_gap: f64,
}

pub fn kato_check(g: &MetricSpec, h: &MetricSpec, f: &MapSpec, p: &[C64], step: f64) -> Result<KatoReport> {
    let j = jets(g, h, f, p)?;
    let terms = bochner_terms(&j.g, &j.h, &j.map)?;
    let u_fn = |z: &[C64]| u_at(g, h, f, z);
    let grad = complex_gradient_fd(&u_fn, p, step)?;
    let ginv = j.g.g_inv.matrix();
    let m = grad.len();
    let mut grad_sq = ZERO;
    for a in 0..m {
        for b in 0..m {
            grad_sq += ginv[(b, a)] * grad[a] * grad[b].conj();
        }
    }
    let kato_gap = terms.u * terms.nabla_sq - grad_sq.re;
    let critical = terms.u < CRITICAL_U;
    let (box_log_u, lower_bound, residual) = if critical {
        (None, None, None)
    } else {
        let log_u = |z: &[C64]| -> Result<f64> {
            let v = u_at(g, h, f, z)?;
            if v <= 0.0 {
                return Err(Error::Invalid("u vanishes near a regular point".into()));
            }
            Ok(v.ln())
        };
        let b = laplacian_richardson(g, &log_u, p, step)?;
        let lb = (terms.ricci_term - terms.target_term) / terms.u;
        (Some(b), Some(lb), Some(b - lb))
    };
    Ok(KatoReport {
        point: p.to_vec(),
        u: terms.u,
        critical,
        box_log_u,
        lower_bound,
        residual,
        kato_gap,
    })
}

/// Constants in the curvature hypotheses: `Ric⁽²⁾(g) ≥ −λ g + μ f*h`,
/// `B_h ≤ −κ`, and optionally the rank `r` of `df`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SchwarzBounds {
    pub lambda: f64,
    pub mu: f64,
    pub kappa: f64,
    pub rank: Option<usize>,
}

impl SchwarzBounds {
    pub fn validate(&self, m: usize, n: usize) -> Result<()> {
        if !(self.mu >= 0.0) {
            return Err(Error::ParameterOutOfRange {
                name: "mu".into(),
                value: self.mu,
                range: "[0, inf)".into(),
            });
        }
        if !(self.kappa >= 0.0) {
            return Err(Error::ParameterOutOfRange {
                name: "kappa".into(),
                value: self.kappa,
                range: "[0, inf)".into(),
            });
        }
        if let Some(r) = self.rank {
            if r == 0 || r > m.min(n) {
                return Err(Error::ParameterOutOfRange {
                    name: "rank".into(),
                    value: r as f64,
                    range: format!("[1, {}]", m.min(n)),
                });
            }
        }
        Ok(())
    }
}

/// `Σ|Φ_{p\bar q}|² − (Σ Φ_{p\bar p})²/m` for `Φ` already in a unitary frame.
pub fn cauchy_schwarz_gap(phi: &CMat) -> f64 {
    let m = phi.nrows() as f64;
    let sq: f64 = phi.iter().map(|z| z.norm_sqr()).sum();
    sq - phi.trace().re.powi(2) / m
}

/// `df` between unitary frames of `g(p)` and `h(f(p))`: `E_h⁻¹ · df · E_g`.
pub fn unitary_differential(j: &Jets) -> Result<CMat> {
    let eg = numerics::unitary_frame(&j.g.g, j.g.tag.clone())?;
    let eh = numerics::unitary_frame(&j.h.g, j.h.tag.clone())?;
    let inv = eh
        .matrix()
        .clone()
        .try_inverse()
        .ok_or_else(|| Error::Invalid("singular target frame".into()))?;
    Ok(inv * &j.map.df * eg.matrix())
}

pub fn singular_values(a: &CMat) -> Vec<f64> {
    let mut s: Vec<f64> = a.clone().svd(false, false).singular_values.iter().copied().collect();
    s.sort_by(|x, y| y.total_cmp(x));
    s
}

pub fn numerical_rank(a: &CMat) -> usize {
    singular_values(a).iter().filter(|s| **s > RANK_THRESHOLD).count()
}

#[derive(Clone, Debug, Serialize)]
pub struct SchwarzPoint {
    pub index: usize,
    pub point: Vec<C64>,
    pub u: f64,
    pub singular_values: Vec<f64>,
    /// Smallest eigenvalue of `Ric⁽²⁾ + λg − μΦ` relative to `g`.
    pub ricci_hypothesis_min: f64,
    pub ricci_hypothesis_ok: bool,
    pub curvature_hypothesis: Status,
    pub curvature_evidence: certify::Evidence,
    pub hypotheses_verified: bool,
    pub cauchy_schwarz_gap: f64,
    /// `Σ R^h_{α\bar α γ\bar γ} λ_α² λ_γ²` in the canonical frames.
    pub rank_bound_lhs: f64,
    /// `−(κ/r)(Σ λ²)²`.
    pub rank_bound_rhs: f64,
    pub box_u: f64,
    pub bochner_residual: f64,
    /// `□u − (−λu + (κ/r + μ/m)u²)`.
    pub conclusion_residual: f64,
    pub box_log_u: Option<f64>,
    /// `□ log u − (−λ + (κ/r + μ/m)u)` off the critical set.
    pub log_conclusion_residual: Option<f64>,
}

#[derive(Clone, Debug, Serialize)]
pub struct SchwarzReport {
    pub bounds: SchwarzBounds,
    pub rank: usize,
    pub step: f64,
    pub points: Vec<SchwarzPoint>,
    pub verified_points: usize,
    /// Smallest conclusion residual over points with verified hypotheses.
    pub min_verified_residual: Option<f64>,
    pub min_verified_log_residual: Option<f64>,
    pub min_cauchy_schwarz_gap: f64,
    /// Largest `lhs − rhs` of the rank bound where the curvature hypothesis holds.
    pub max_rank_bound_excess: Option<f64>,
    pub max_bochner_residual: f64,
    pub notices: Vec<String>,
}

/// Checks the hypotheses and conclusions of the refined Schwarz inequality
/// at each point.
pub fn schwarz_inequality_report(
    g: &MetricSpec,
    h: &MetricSpec,
    f: &MapSpec,
    points: &[Vec<C64>],
    bounds: SchwarzBounds,
    budget: &Budget,
    step: f64,
) -> Result<SchwarzReport> {
    check_map(g, h, f)?;
    check_step(step)?;
    bounds.validate(g.dim(), h.dim())?;
    if points.is_empty() {
        return Err(Error::Invalid("no points to check".into()));
    }
    let m = g.dim();
    let prepared = points
        .par_iter()
        .map(|p| {
            let j = jets(g, h, f, p)?;
            let a = unitary_differential(&j)?;
            Ok((j, a))
        })
        .collect::<Result<Vec<_>>>()?;
    let rank = bounds
        .rank
        .unwrap_or_else(|| prepared.iter().map(|(_, a)| numerical_rank(a)).max().unwrap_or(0));
    let mut notices = Vec::new();
    if rank == 0 {
        notices.push("map is constant at every point: u ≡ 0, log branch skipped".to_string());
    }
    let coef = if rank > 0 { bounds.kappa / rank as f64 } else { 0.0 } + bounds.mu / m as f64;
    let condition = Condition::new(Relation::Le, -bounds.kappa);

    let results = prepared
        .into_par_iter()
        .zip(points.par_iter())
        .enumerate()
        .map(|(index, ((j, a), p))| {
            let terms = bochner_terms(&j.g, &j.h, &j.map)?;
            let u = terms.u;
            let phi = pullback(&j.h.g, &j.map.df);

            let eg = numerics::unitary_frame(&j.g.g, j.g.tag.clone())?;
            let ric2 = curvature::ricci(&curvature::chern_tensor(&j.g))?.ric2;
            let hyp = ric2.matrix() + j.g.g.matrix() * C64::new(bounds.lambda, 0.0) - &phi * C64::new(bounds.mu, 0.0);
            let hyp_frame = eg.matrix().transpose() * hyp * eg.matrix().map(|z| z.conj());
            let ricci_min = HermitianMatrix::with_tolerance(hyp_frame, 1e-8)?.min_eigenvalue();
            let ricci_ok = ricci_min >= -1e-10;

            let th = curvature::unitary_tensor(&j.h)?;
            let point_budget = Budget {
                seed: certify::derive_seed(budget.seed, 1000 + index as u64),
                ..*budget
            };
            let verdict = certify::certify_sign(&th, condition, &point_budget)?;
            let curvature_ok = verdict.status == Status::Certified;

            let phi_frame = eg.matrix().transpose() * &phi * eg.matrix().map(|z| z.conj());
            let cs = cauchy_schwarz_gap(&phi_frame);
            let rank_lhs = curvature::quad_form_raw(&th, &(&a * a.adjoint())).re;
            let rank_rhs = if rank > 0 {
                -(bounds.kappa / rank as f64) * u * u
            } else {
                0.0
            };

            let u_fn = |z: &[C64]| u_at(g, h, f, z);
            let mut box_u = laplacian_fd(g, &u_fn, p, step)?;
            if (box_u - terms.rhs).abs() > BOCHNER_TOLERANCE {
                box_u = laplacian_richardson(g, &u_fn, p, step)?;
            }
            let conclusion = box_u - (-bounds.lambda * u + coef * u * u);
            let (box_log_u, log_res) = if u >= CRITICAL_U && rank > 0 {
                let k = kato_check(g, h, f, p, step)?;
                let b = k.box_log_u.expect("regular point");
                (Some(b), Some(b - (-bounds.lambda + coef * u)))
            } else {
                (None, None)
            };
            Ok(SchwarzPoint {
                index,
                point: p.clone(),
                u,
                singular_values: singular_values(&a),
                ricci_hypothesis_min: ricci_min,
                ricci_hypothesis_ok: ricci_ok,
                curvature_hypothesis: verdict.status,
                curvature_evidence: verdict.evidence,
                hypotheses_verified: ricci_ok && curvature_ok,
                cauchy_schwarz_gap: cs,
                rank_bound_lhs: rank_lhs,
                rank_bound_rhs: rank_rhs,
                box_u,
                bochner_residual: (box_u - terms.rhs).abs(),
                conclusion_residual: conclusion,
                box_log_u,
                log_conclusion_residual: log_res,
            })
        })
        .collect::<Result<Vec<_>>>()?;

    let verified: Vec<&SchwarzPoint> = results.iter().filter(|r| r.hypotheses_verified).collect();
    let min_of = |it: &mut dyn Iterator<Item = f64>| it.fold(None, |acc: Option<f64>, x| Some(acc.map_or(x, |a| a.min(x))));
    let min_verified_residual = min_of(&mut verified.iter().map(|r| r.conclusion_residual));
    let min_verified_log_residual = min_of(&mut verified.iter().filter_map(|r| r.log_conclusion_residual));
    let max_rank_bound_excess = results
        .iter()
        .filter(|r| r.curvature_hypothesis == Status::Certified)
        .map(|r| r.rank_bound_lhs - r.rank_bound_rhs)
        .fold(None, |acc: Option<f64>, x| Some(acc.map_or(x, |a| a.max(x))));
    if verified.is_empty() {
        notices.push("hypotheses not verified at any point: conclusions are reported but not asserted".to_string());
    }
    Ok(SchwarzReport {
        bounds,
        rank,
        step,
        verified_points: verified.len(),
        min_verified_residual,
        min_verified_log_residual,
        min_cauchy_schwarz_gap: results.iter().map(|r| r.cauchy_schwarz_gap).fold(f64::INFINITY, f64::min),
        max_rank_bound_excess,
        max_bochner_residual: results.iter().map(|r| r.bochner_residual).fold(0.0, f64::max),
        points: results,
        notices,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SupBoundReport {
    pub bounds: SchwarzBounds,
    pub rank: usize,
    /// `λ / (κ/r + μ/m)`.
    pub bound: f64,
    pub max_u: f64,
    pub argmax: usize,
    pub samples: usize,
    pub consistent: bool,
    pub classification: String,
}

/// Compares the largest sampled `u` with the bound `λ/(κ/r + μ/m)` implied
/// by the Schwarz inequality. Samples never establish the global statement.
pub fn sup_bound_check(
    g: &MetricSpec,
    h: &MetricSpec,
    f: &MapSpec,
    points: &[Vec<C64>],
    bounds: SchwarzBounds,
) -> Result<SupBoundReport> {
    check_map(g, h, f)?;
    bounds.validate(g.dim(), h.dim())?;
    if points.is_empty() {
        return Err(Error::Invalid("no points to check".into()));
    }
    let jac = points.iter().map(|p| f.jacobian(p)).collect::<Result<Vec<_>>>()?;
    let rank = bounds.rank.unwrap_or_else(|| jac.iter().map(numerical_rank).max().unwrap_or(0));
    let coef = if rank > 0 { bounds.kappa / rank as f64 } else { 0.0 } + bounds.mu / g.dim() as f64;
    if !(coef > 0.0) {
        return Err(Error::Invalid("no bound applicable: κ/r + μ/m must be positive".into()));
    }
    let bound = bounds.lambda / coef;
    let us = points.iter().map(|p| u_at(g, h, f, p)).collect::<Result<Vec<_>>>()?;
    let (argmax, max_u) = us
        .iter()
        .copied()
        .enumerate()
        .fold((0, f64::NEG_INFINITY), |acc, (i, u)| if u > acc.1 { (i, u) } else { acc });
    let consistent = max_u <= bound + 1e-12 * bound.abs().max(1.0);
    let classification = if consistent {
        format!("consistent: max sampled u = {max_u:.6} <= bound {bound:.6}")
    } else {
        format!("violated: max sampled u = {max_u:.6} > bound {bound:.6} (hypotheses likely unmet or region not representative)")
    };
    Ok(SupBoundReport {
        bounds,
        rank,
        bound,
        max_u,
        argmax,
        samples: points.len(),
        consistent,
        classification,
    })
}
