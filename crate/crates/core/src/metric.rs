//! Hermitian metrics on a chart, the built-in catalog, and pointwise jets.

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::{self, CMat, FrameTag, HermitianMatrix, C64, ZERO};
use crate::wirtinger::{Expr, Jet2};

/// Number of points used to check that diagonal entries are real.
const REALITY_SAMPLES: usize = 32;

/// A Hermitian metric `g_{i\bar j}(z, z̄)` on a chart of `C^n`.
///
/// Only the upper triangle `i ≤ j` is stored; `g_{j\bar i}` is always the
/// conjugate expression of `g_{i\bar j}`, so a non-Hermitian spec cannot be
/// built.
#[derive(Clone, Debug)]
pub struct MetricSpec {
    name: String,
    n: usize,
    params: BTreeMap<String, f64>,
    /// Source text of the upper-triangle entries, row-major.
    sources: Vec<String>,
    upper: Vec<Expr>,
    domain_hint: Option<f64>,
}

/// On-disk metric definition.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MetricFile {
    pub name: String,
    pub dimension: usize,
    #[serde(default)]
    pub parameters: BTreeMap<String, f64>,
    /// Row `i` lists `g_{i\bar j}` for `j = i..n`.
    pub entries_upper: Vec<Vec<String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub domain_radius: Option<f64>,
}

fn upper_index(n: usize, i: usize, j: usize) -> usize {
    debug_assert!(i <= j);
    i * n - i * (i + 1) / 2 + j
}

impl MetricSpec {
    /// Builds a spec from row-major upper-triangle sources. Diagonal entries
    /// are checked to be real at sampled points, and `g(0)` must be positive
    /// definite.
    pub fn new(
        name: impl Into<String>,
        n: usize,
        params: BTreeMap<String, f64>,
        entries_upper: &[Vec<String>],
        domain_hint: Option<f64>,
    ) -> Result<Self> {
        if n == 0 {
            return Err(Error::Invalid("metric dimension must be at least 1".into()));
        }
        if entries_upper.len() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                got: entries_upper.len(),
            });
        }
        let mut sources = Vec::with_capacity(n * (n + 1) / 2);
        let mut upper = Vec::with_capacity(n * (n + 1) / 2);
        for (i, row) in entries_upper.iter().enumerate() {
            if row.len() != n - i {
                return Err(Error::DimensionMismatch {
                    expected: n - i,
                    got: row.len(),
                });
            }
            for text in row {
                upper.push(Expr::parse(text, n, &params)?);
                sources.push(text.clone());
            }
        }
        let spec = Self {
            name: name.into(),
            n,
            params,
            sources,
            upper,
            domain_hint,
        };
        spec.check_real_diagonal()?;
        let g0 = spec.values(&vec![ZERO; n])?;
        let min = g0.min_eigenvalue();
        if !(min > numerics::PD_THRESHOLD) {
            return Err(Error::NotPositiveDefinite { min_eigenvalue: min });
        }
        Ok(spec)
    }

    pub fn from_file(file: &MetricFile) -> Result<Self> {
        Self::new(
            file.name.clone(),
            file.dimension,
            file.parameters.clone(),
            &file.entries_upper,
            file.domain_radius,
        )
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let file: MetricFile =
            serde_json::from_str(text).map_err(|e| Error::Invalid(format!("metric file: {e}")))?;
        Self::from_file(&file)
    }

    pub fn to_file(&self) -> MetricFile {
        MetricFile {
            name: self.name.clone(),
            dimension: self.n,
            parameters: self.params.clone(),
            entries_upper: self.upper_sources(),
            domain_radius: self.domain_hint,
        }
    }

    fn check_real_diagonal(&self) -> Result<()> {
        let radius = self.domain_hint.unwrap_or(0.5).min(0.5);
        let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_d1a6);
        for s in 0..REALITY_SAMPLES {
            let p = if s == 0 {
                vec![ZERO; self.n]
            } else {
                sample_ball(self.n, radius, &mut rng)
            };
            for i in 0..self.n {
                // Poles are reported later, at evaluation time.
                if let Ok(v) = self.upper[upper_index(self.n, i, i)].eval(&p) {
                    if v.im.abs() > 1e-12 * v.re.abs().max(1.0) {
                        return Err(Error::NonRealDiagonal { index: i + 1, imag: v.im });
                    }
                }
            }
        }
        Ok(())
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn params(&self) -> &BTreeMap<String, f64> {
        &self.params
    }

    pub fn domain_hint(&self) -> Option<f64> {
        self.domain_hint
    }

    pub fn with_domain_hint(mut self, radius: Option<f64>) -> Self {
        self.domain_hint = radius;
        self
    }

    pub fn upper_sources(&self) -> Vec<Vec<String>> {
        (0..self.n)
            .map(|i| (i..self.n).map(|j| self.sources[upper_index(self.n, i, j)].clone()).collect())
            .collect()
    }

    /// Expression for `g_{i\bar j}` (derived by conjugation below the diagonal).
    pub fn entry(&self, i: usize, j: usize) -> Expr {
        if i <= j {
            self.upper[upper_index(self.n, i, j)].clone()
        } else {
            self.upper[upper_index(self.n, j, i)].conj()
        }
    }

    pub fn tag(&self, p: &[C64]) -> FrameTag {
        FrameTag::new(&self.name, p)
    }

    fn check_point(&self, p: &[C64]) -> Result<()> {
        if p.len() != self.n {
            return Err(Error::DimensionMismatch {
                expected: self.n,
                got: p.len(),
            });
        }
        if let Some(limit) = self.domain_hint {
            let r = euclidean_norm(p);
            if r > limit * (1.0 + 1e-12) {
                return Err(Error::OutsideDomain { radius: r, limit });
            }
        }
        Ok(())
    }

    /// `g(p)` without derivatives and without the domain or PD checks.
    pub fn values(&self, p: &[C64]) -> Result<HermitianMatrix> {
        let n = self.n;
        let mut m = CMat::zeros(n, n);
        for i in 0..n {
            for j in i..n {
                let v = self.upper[upper_index(n, i, j)].eval(p)?;
                m[(i, j)] = v;
                if i != j {
                    m[(j, i)] = v.conj();
                } else {
                    m[(i, i)] = C64::new(v.re, 0.0);
                }
            }
        }
        HermitianMatrix::new(m)
    }

    /// Exact metric jet at `p`.
    pub fn jet(&self, p: &[C64]) -> Result<MetricJet> {
        self.check_point(p)?;
        let n = self.n;
        let mut jets: Vec<Vec<Option<Jet2>>> = vec![vec![None; n]; n];
        for i in 0..n {
            for j in i..n {
                let jet = self.upper[upper_index(n, i, j)].jet2(p)?;
                if i != j {
                    jets[j][i] = Some(jet.conjugate());
                }
                jets[i][j] = Some(jet);
            }
        }
        let at = |i: usize, j: usize| jets[i][j].as_ref().expect("filled above");
        let mut g = CMat::from_fn(n, n, |i, j| at(i, j).value);
        for i in 0..n {
            g[(i, i)].im = 0.0;
        }
        let g = HermitianMatrix::new(g)?;
        let dg_hol = (0..n).map(|a| CMat::from_fn(n, n, |i, j| at(i, j).d1_hol[a])).collect();
        let dg_anti = (0..n).map(|b| CMat::from_fn(n, n, |i, j| at(i, j).d1_anti[b])).collect();
        let ddg = (0..n)
            .map(|a| (0..n).map(|b| CMat::from_fn(n, n, |i, j| at(i, j).d2_mixed[a][b])).collect())
            .collect();
        let g_inv = numerics::invert_pd(&g)?;
        Ok(MetricJet {
            p: p.to_vec(),
            tag: self.tag(p),
            g,
            dg_hol,
            dg_anti,
            ddg,
            g_inv,
        })
    }
}

/// Pointwise metric data: `g`, its first derivatives and mixed second
/// derivatives, and `g⁻¹`.
#[derive(Clone, Debug)]
pub struct MetricJet {
    pub p: Vec<C64>,
    pub tag: FrameTag,
    pub g: HermitianMatrix,
    /// `dg_hol[a] = ∂g/∂z_a`.
    pub dg_hol: Vec<CMat>,
    /// `dg_anti[b] = ∂g/∂z̄_b`.
    pub dg_anti: Vec<CMat>,
    /// `ddg[a][b] = ∂²g/∂z_a∂z̄_b`.
    pub ddg: Vec<Vec<CMat>>,
    /// Matrix inverse of `g`; the contravariant metric is `g^{p\bar q} = g_inv[(q, p)]`.
    pub g_inv: HermitianMatrix,
}

impl MetricJet {
    pub fn dim(&self) -> usize {
        self.g.dim()
    }

    /// `g^{p\bar q}`.
    pub fn inv_upper(&self, p: usize, q: usize) -> C64 {
        self.g_inv.get(q, p)
    }

    /// Largest violation of the jet invariants:
    /// `dg_anti[b] = dg_hol[b]†`, `ddg[a][b] = ddg[b][a]†`, `g·g_inv = I`.
    pub fn invariant_residual(&self) -> f64 {
        let n = self.dim();
        let mut worst = 0.0_f64;
        for a in 0..n {
            worst = worst.max(numerics::max_abs_diff(&self.dg_anti[a], &self.dg_hol[a].adjoint()));
            for b in 0..n {
                worst = worst.max(numerics::max_abs_diff(&self.ddg[a][b], &self.ddg[b][a].adjoint()));
            }
        }
        let prod = self.g.matrix() * self.g_inv.matrix();
        worst.max(numerics::max_abs_diff(&prod, &CMat::identity(n, n)))
    }
}

pub fn euclidean_norm(p: &[C64]) -> f64 {
    p.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// Uniform point in the Euclidean ball of `radius` in `C^n`.
pub fn sample_ball<R: Rng + ?Sized>(n: usize, radius: f64, rng: &mut R) -> Vec<C64> {
    let mut v: Vec<f64> = (0..2 * n).map(|_| rng.sample(StandardNormal)).collect();
    let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt().max(f64::MIN_POSITIVE);
    let u: f64 = rng.random();
    let r = radius * u.powf(1.0 / (2 * n) as f64);
    for x in &mut v {
        *x *= r / norm;
    }
    (0..n).map(|k| C64::new(v[2 * k], v[2 * k + 1])).collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Layout {
    Random,
    Grid,
}

/// A set of sample points in a ball around the chart origin.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Region {
    pub radius: f64,
    pub count: usize,
    pub layout: Layout,
}

impl Region {
    pub fn random(radius: f64, count: usize) -> Self {
        Self {
            radius,
            count,
            layout: Layout::Random,
        }
    }

    pub fn grid(radius: f64, count: usize) -> Self {
        Self {
            radius,
            count,
            layout: Layout::Grid,
        }
    }

    /// Deterministic list of `count` points in `C^n`.
    pub fn points(&self, n: usize, seed: u64) -> Vec<Vec<C64>> {
        match self.layout {
            Layout::Random => {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                (0..self.count).map(|_| sample_ball(n, self.radius, &mut rng)).collect()
            }
            Layout::Grid => self.grid_points(n),
        }
    }

    fn grid_points(&self, n: usize) -> Vec<Vec<C64>> {
        if self.count == 0 {
            return Vec::new();
        }
        let dims = 2 * n;
        let mut k = 2usize;
        loop {
            let inside = grid_in_ball(dims, k, self.radius);
            if inside.len() >= self.count || k > 64 {
                let m = inside.len();
                return (0..self.count.min(m))
                    .map(|i| {
                        let x = &inside[i * m / self.count.min(m)];
                        (0..n).map(|c| C64::new(x[2 * c], x[2 * c + 1])).collect()
                    })
                    .collect();
            }
            k += 1;
        }
    }
}

fn grid_in_ball(dims: usize, k: usize, radius: f64) -> Vec<Vec<f64>> {
    let coord = |i: usize| -radius + 2.0 * radius * i as f64 / (k - 1) as f64;
    let total = k.pow(dims as u32);
    (0..total)
        .map(|mut idx| {
            (0..dims)
                .map(|_| {
                    let c = coord(idx % k);
                    idx /= k;
                    c
                })
                .collect::<Vec<f64>>()
        })
        .filter(|x| x.iter().map(|v| v * v).sum::<f64>() <= radius * radius * (1.0 + 1e-12))
        .collect()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ValidationFailure {
    pub index: usize,
    pub point: Vec<C64>,
    pub reason: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub metric: String,
    pub radius: f64,
    pub samples: usize,
    pub seed: u64,
    /// Smallest eigenvalue of `g` over the points where it could be evaluated.
    pub min_eigenvalue: f64,
    pub max_asymmetry: f64,
    pub first_failure: Option<ValidationFailure>,
}

impl ValidationReport {
    pub fn passed(&self) -> bool {
        self.first_failure.is_none()
    }
}

/// Samples `count` points (the origin first) in the ball of `radius` and
/// reports positive definiteness and Hermitian symmetry of `g`. The spec's
/// own validity radius is deliberately ignored here.
pub fn validate(spec: &MetricSpec, radius: f64, count: usize, seed: u64) -> ValidationReport {
    let n = spec.dim();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut report = ValidationReport {
        metric: spec.name().to_string(),
        radius,
        samples: count,
        seed,
        min_eigenvalue: f64::INFINITY,
        max_asymmetry: 0.0,
        first_failure: None,
    };
    for index in 0..count {
        let p = if index == 0 {
            vec![ZERO; n]
        } else {
            sample_ball(n, radius, &mut rng)
        };
        let mut raw = CMat::zeros(n, n);
        let mut failure = None;
        'fill: for i in 0..n {
            for j in 0..n {
                match spec.entry(i, j).eval(&p) {
                    Ok(v) => raw[(i, j)] = v,
                    Err(e) => {
                        failure = Some(e.to_string());
                        break 'fill;
                    }
                }
            }
        }
        if failure.is_none() {
            report.max_asymmetry = report.max_asymmetry.max(numerics::max_asymmetry(&raw));
            match HermitianMatrix::new(raw) {
                Ok(g) => {
                    let min = g.min_eigenvalue();
                    report.min_eigenvalue = report.min_eigenvalue.min(min);
                    if !(min > numerics::PD_THRESHOLD) {
                        failure = Some(format!("not positive definite: min eigenvalue {min:.6e}"));
                    }
                }
                Err(e) => failure = Some(e.to_string()),
            }
        }
        if let (Some(reason), None) = (failure, &report.first_failure) {
            report.first_failure = Some(ValidationFailure { index, point: p, reason });
        }
    }
    report
}

// ---------------------------------------------------------------------------
// Catalog

/// Default validity radius of the small-ball examples.
pub const SMALL_BALL_RADIUS: f64 = 0.2;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ParamInfo {
    pub name: String,
    pub range: String,
    pub default: Option<f64>,
    pub required: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CatalogEntry {
    pub name: String,
    pub description: String,
    pub formula: String,
    pub parameters: Vec<ParamInfo>,
    pub validity_radius: Option<f64>,
}

fn param(name: &str, range: &str, default: Option<f64>, required: bool) -> ParamInfo {
    ParamInfo {
        name: name.into(),
        range: range.into(),
        default,
        required,
    }
}

/// The six built-in metrics.
pub fn catalog_entries() -> Vec<CatalogEntry> {
    let dim = |required| param("n", "integer >= 1", if required { None } else { Some(2.0) }, required);
    vec![
        CatalogEntry {
            name: "flat".into(),
            description: "Euclidean metric on C^n".into(),
            formula: "g_{i j̄} = δ_ij".into(),
            parameters: vec![dim(true)],
            validity_radius: None,
        },
        CatalogEntry {
            name: "fubini_study_affine".into(),
            description: "Fubini-Study metric on the affine chart of P^n, potential log(1+|z|²)".into(),
            formula: "g_{i j̄} = δ_ij/(1+|z|²) - z̄_i z_j/(1+|z|²)²".into(),
            parameters: vec![dim(true)],
            validity_radius: None,
        },
        CatalogEntry {
            name: "example_2_2".into(),
            description: "U(n)-invariant metric with H > 0 whose real bisectional curvature is not nonnegative".into(),
            formula: "g_{i j̄} = (1+|z|²) δ_ij + (ε-2) z̄_i z_j".into(),
            parameters: vec![param("eps", "(0, 1)", None, true), param("n", "integer >= 2", Some(2.0), false)],
            validity_radius: Some(SMALL_BALL_RADIUS),
        },
        CatalogEntry {
            name: "example_2_2_dual".into(),
            description: "inverse of example_2_2: H < 0 near the origin while B is not nonpositive".into(),
            formula: "h_{i j̄} = δ_ij/(1+|z|²) + (2-ε) z̄_i z_j/((1+|z|²)(1-(1-ε)|z|²))".into(),
            parameters: vec![param("eps", "(0, 1)", None, true), param("n", "integer >= 2", Some(2.0), false)],
            validity_radius: Some(SMALL_BALL_RADIUS),
        },
        CatalogEntry {
            name: "example_2_3".into(),
            description: "metric on C^2 with B > 0 near the origin whose three Ricci tensors are not nonnegative".into(),
            formula: "g_{1 1̄} = 1 - |z1|² + (1+b)|z2|², g_{2 2̄} = 1 - (1+4b)|z1|² - |z2|², g_{1 2̄} = (1+b) z2 z̄1".into(),
            parameters: vec![param("b", "(0, inf)", None, true)],
            validity_radius: Some(SMALL_BALL_RADIUS),
        },
        CatalogEntry {
            name: "product".into(),
            description: "product of flat C^n1 and the Fubini-Study affine chart of dimension n2".into(),
            formula: "g = diag(δ on the first n1 coordinates, Fubini-Study on the last n2)".into(),
            parameters: vec![
                param("n1", "integer >= 1", Some(1.0), false),
                param("n2", "integer >= 1", Some(1.0), false),
            ],
            validity_radius: None,
        },
    ]
}

/// Canonical catalog name for `name`, accepting a few aliases.
pub fn canonical_name(name: &str) -> Option<&'static str> {
    let compact: String = name.chars().filter(|c| !c.is_whitespace()).collect();
    Some(match compact.as_str() {
        "flat" => "flat",
        "fubini_study_affine" | "fubini_study" | "fs" => "fubini_study_affine",
        "example_2_2" => "example_2_2",
        "example_2_2_dual" => "example_2_2_dual",
        "example_2_3" => "example_2_3",
        "product" | "product(flat,fubini_study_affine)" => "product",
        _ => return None,
    })
}

fn get_param(params: &BTreeMap<String, f64>, name: &str, default: Option<f64>) -> Result<f64> {
    params
        .get(name)
        .copied()
        .or(default)
        .ok_or_else(|| Error::MissingParameter(name.to_string()))
}

fn get_dim(params: &BTreeMap<String, f64>, name: &str, default: Option<f64>, min: usize) -> Result<usize> {
    let v = get_param(params, name, default)?;
    if v.fract() != 0.0 || v < min as f64 || v > 16.0 {
        return Err(Error::ParameterOutOfRange {
            name: name.into(),
            value: v,
            range: format!("integer in [{min}, 16]"),
        });
    }
    Ok(v as usize)
}

fn open_unit(params: &BTreeMap<String, f64>, name: &str) -> Result<f64> {
    let v = get_param(params, name, None)?;
    if !(v > 0.0 && v < 1.0) {
        return Err(Error::ParameterOutOfRange {
            name: name.into(),
            value: v,
            range: "(0, 1)".into(),
        });
    }
    Ok(v)
}

fn upper_rows(n: usize, f: impl Fn(usize, usize) -> String) -> Vec<Vec<String>> {
    (0..n).map(|i| (i..n).map(|j| f(i + 1, j + 1)).collect()).collect()
}

/// Fubini-Study entry with `NS` standing for `|z|²`.
fn fs_entry(i: usize, j: usize) -> String {
    let cross = format!("zb{i}*z{j}/(1+NS)^2");
    if i == j {
        format!("1/(1+NS) - {cross}")
    } else {
        format!("-{cross}")
    }
}

/// Catalog metric `name` with the given parameters.
pub fn catalog(name: &str, params: &BTreeMap<String, f64>) -> Result<MetricSpec> {
    let canonical = canonical_name(name).ok_or_else(|| Error::UnknownMetric(name.to_string()))?;
    let mut bound = BTreeMap::new();
    let (n, rows, radius) = match canonical {
        "flat" => {
            let n = get_dim(params, "n", None, 1)?;
            bound.insert("n".into(), n as f64);
            (n, upper_rows(n, |i, j| if i == j { "1".into() } else { "0".into() }), None)
        }
        "fubini_study_affine" => {
            let n = get_dim(params, "n", None, 1)?;
            bound.insert("n".into(), n as f64);
            let rows = upper_rows(n, |i, j| fs_entry(i, j).replace("NS", "normsq(z)"));
            (n, rows, None)
        }
        "example_2_2" => {
            let eps = open_unit(params, "eps")?;
            let n = get_dim(params, "n", Some(2.0), 2)?;
            bound.insert("eps".into(), eps);
            bound.insert("n".into(), n as f64);
            let rows = upper_rows(n, |i, j| {
                if i == j {
                    format!("(1+normsq(z)) + (eps-2)*zb{i}*z{j}")
                } else {
                    format!("(eps-2)*zb{i}*z{j}")
                }
            });
            (n, rows, Some(SMALL_BALL_RADIUS))
        }
        "example_2_2_dual" => {
            let eps = open_unit(params, "eps")?;
            let n = get_dim(params, "n", Some(2.0), 2)?;
            bound.insert("eps".into(), eps);
            bound.insert("n".into(), n as f64);
            let rows = upper_rows(n, |i, j| {
                let cross = format!("(2-eps)*zb{i}*z{j}/((1+normsq(z))*(1-(1-eps)*normsq(z)))");
                if i == j {
                    format!("1/(1+normsq(z)) + {cross}")
                } else {
                    cross
                }
            });
            (n, rows, Some(SMALL_BALL_RADIUS))
        }
        "example_2_3" => {
            let b = get_param(params, "b", None)?;
            if !(b > 0.0) {
                return Err(Error::ParameterOutOfRange {
                    name: "b".into(),
                    value: b,
                    range: "(0, inf)".into(),
                });
            }
            bound.insert("b".into(), b);
            let rows = vec![
                vec!["1 - z1*zb1 + (1+b)*z2*zb2".to_string(), "(1+b)*z2*zb1".to_string()],
                vec!["1 - (1+4*b)*z1*zb1 - z2*zb2".to_string()],
            ];
            (2, rows, Some(SMALL_BALL_RADIUS))
        }
        "product" => {
            let n1 = get_dim(params, "n1", Some(1.0), 1)?;
            let n2 = get_dim(params, "n2", Some(1.0), 1)?;
            bound.insert("n1".into(), n1 as f64);
            bound.insert("n2".into(), n2 as f64);
            let fs_norm: Vec<String> = (n1 + 1..=n1 + n2).map(|k| format!("z{k}*zb{k}")).collect();
            let ns = format!("({})", fs_norm.join(" + "));
            let n = n1 + n2;
            let rows = upper_rows(n, |i, j| {
                if i <= n1 || j <= n1 {
                    if i == j { "1".into() } else { "0".into() }
                } else {
                    fs_entry(i, j).replace("NS", &ns)
                }
            });
            (n, rows, None)
        }
        _ => unreachable!("canonical_name only returns catalog names"),
    };
    MetricSpec::new(canonical, n, bound, &rows, radius)
}

/// Parameters used by `catalog show` and the CLI when none are given.
pub fn default_params(name: &str) -> BTreeMap<String, f64> {
    let mut m = BTreeMap::new();
    match canonical_name(name) {
        Some("flat") | Some("fubini_study_affine") => {
            m.insert("n".into(), 2.0);
        }
        Some("example_2_2") | Some("example_2_2_dual") => {
            m.insert("eps".into(), 0.3);
            m.insert("n".into(), 2.0);
        }
        Some("example_2_3") => {
            m.insert("b".into(), 1.0);
        }
        Some("product") => {
            m.insert("n1".into(), 1.0);
            m.insert("n2".into(), 1.0);
        }
        _ => {}
    }
    m
}

pub fn params(pairs: &[(&str, f64)]) -> BTreeMap<String, f64> {
    pairs.iter().map(|(k, v)| (k.to_string(), *v)).collect()
}
