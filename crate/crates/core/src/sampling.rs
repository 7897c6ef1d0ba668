//! Monte Carlo moments of the uniform measure on the unit sphere of `C^n`
//! and the Berger average of a curvature tensor.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::Serialize;

use crate::curvature::{self, ChernTensor};
use crate::error::{Error, Result};
use crate::numerics::{self, CMat, C64, ZERO};

/// Samples per random stream.
const CHUNK: usize = 16_384;
/// Gates use `3σ` plus this absolute floor.
pub const ABSOLUTE_FLOOR: f64 = 1e-4;
pub const SIGMA_GATE: f64 = 3.0;

fn unit_vector<R: Rng>(n: usize, rng: &mut R) -> Vec<C64> {
    loop {
        let v: Vec<C64> = (0..n)
            .map(|_| C64::new(rng.sample(StandardNormal), rng.sample(StandardNormal)))
            .collect();
        let norm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if norm > 1e-300 {
            return v.into_iter().map(|z| z / norm).collect();
        }
    }
}

/// `count` uniform unit vectors in `C^n` (normalized complex Gaussians).
/// Sample `k` depends only on `seed` and `k`.
pub fn sphere_sample(n: usize, count: usize, seed: u64) -> Vec<Vec<C64>> {
    let chunks = count.div_ceil(CHUNK);
    (0..chunks)
        .into_par_iter()
        .flat_map_iter(|c| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(c as u64);
            let len = CHUNK.min(count - c * CHUNK);
            (0..len).map(move |_| unit_vector(n, &mut rng)).collect::<Vec<_>>()
        })
        .collect()
}

/// Running sums for the mean of a complex quantity.
#[derive(Clone, Copy, Default)]
struct Sums {
    count: usize,
    sum: C64,
    sum_sq: f64,
}

impl Sums {
    fn push(&mut self, x: C64) {
        self.count += 1;
        self.sum += x;
        self.sum_sq += x.norm_sqr();
    }

    fn merge(self, o: Sums) -> Sums {
        Sums {
            count: self.count + o.count,
            sum: self.sum + o.sum,
            sum_sq: self.sum_sq + o.sum_sq,
        }
    }

    fn mean_and_error(&self) -> (C64, f64) {
        let n = self.count as f64;
        let mean = self.sum / n;
        if self.count < 2 {
            return (mean, 0.0);
        }
        let var = ((self.sum_sq - n * mean.norm_sqr()) / (n - 1.0)).max(0.0);
        (mean, (var / n).sqrt())
    }
}

/// Deterministic chunked average of `f` over sphere samples.
fn sphere_average(n: usize, count: usize, seed: u64, f: impl Fn(&[C64]) -> C64 + Sync) -> Sums {
    let count = count.max(1);
    let chunks = count.div_ceil(CHUNK);
    let partial: Vec<Sums> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(c as u64);
            let mut s = Sums::default();
            for _ in 0..CHUNK.min(count - c * CHUNK) {
                s.push(f(&unit_vector(n, &mut rng)));
            }
            s
        })
        .collect();
    partial.into_iter().fold(Sums::default(), Sums::merge)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MomentEstimate {
    pub value: C64,
    pub std_error: f64,
    pub samples: usize,
    pub seed: u64,
    /// `(δ_ij δ_kl + δ_il δ_kj)/(n(n+1))`.
    pub closed_form: f64,
    /// `|value − closed_form| / std_error` (0 when both vanish).
    pub sigmas: f64,
    pub within_gate: bool,
}

/// Closed form of `E[w_i w̄_j w_k w̄_l]` on the unit sphere.
pub fn moment_closed_form(n: usize, [i, j, k, l]: [usize; 4]) -> f64 {
    let d = |a: usize, b: usize| if a == b { 1.0 } else { 0.0 };
    (d(i, j) * d(k, l) + d(i, l) * d(k, j)) / (n * (n + 1)) as f64
}

fn gate(value: C64, target: f64, std_error: f64) -> (f64, bool) {
    let diff = (value - C64::new(target, 0.0)).norm();
    let sigmas = if std_error > 0.0 {
        diff / std_error
    } else if diff == 0.0 {
        0.0
    } else {
        f64::INFINITY
    };
    (sigmas, diff <= SIGMA_GATE * std_error + ABSOLUTE_FLOOR)
}

/// Estimate of `E[w_i w̄_j w_k w̄_l]` with zero-based indices; `transform`
/// applies a fixed matrix to every sample first.
pub fn fs_moment_with(
    n: usize,
    idx: [usize; 4],
    count: usize,
    seed: u64,
    transform: Option<&CMat>,
) -> Result<MomentEstimate> {
    if n == 0 {
        return Err(Error::Invalid("dimension must be at least 1".into()));
    }
    if let Some(&bad) = idx.iter().find(|&&i| i >= n) {
        return Err(Error::VariableOutOfRange { index: bad + 1, dim: n });
    }
    if let Some(u) = transform {
        if u.nrows() != n || u.ncols() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                got: u.nrows(),
            });
        }
    }
    let [i, j, k, l] = idx;
    let sums = sphere_average(n, count, seed, |w| {
        let w: Vec<C64> = match transform {
            Some(u) => (0..n).map(|a| (0..n).map(|b| u[(a, b)] * w[b]).sum()).collect(),
            None => w.to_vec(),
        };
        w[i] * w[j].conj() * w[k] * w[l].conj()
    });
    let (value, std_error) = sums.mean_and_error();
    let closed_form = moment_closed_form(n, idx);
    let (sigmas, within_gate) = gate(value, closed_form, std_error);
    Ok(MomentEstimate {
        value,
        std_error,
        samples: sums.count,
        seed,
        closed_form,
        sigmas,
        within_gate,
    })
}

pub fn fs_moment(n: usize, idx: [usize; 4], count: usize, seed: u64) -> Result<MomentEstimate> {
    fs_moment_with(n, idx, count, seed, None)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BergerReport {
    pub weights: Vec<f64>,
    /// Sphere average of `R(x, x̄, x, x̄)` with `x_i = b_i w_i`.
    pub monte_carlo: C64,
    pub std_error: f64,
    pub samples: usize,
    pub seed: u64,
    /// `Σ_{i,k} (R_{i\bar i k\bar k} + R_{i\bar k k\bar i}) b_i² b_k²`.
    pub pair_sum: f64,
    /// `pair_sum / (n(n+1))`.
    pub closed_form: f64,
    pub sigmas: f64,
    pub agree: bool,
}

/// Compares the sphere average of the curvature form along `b ∘ w` with its
/// closed form.
pub fn berger_check(t: &ChernTensor, b: &[f64], count: usize, seed: u64) -> Result<BergerReport> {
    let n = t.dim();
    if b.len() != n {
        return Err(Error::DimensionMismatch { expected: n, got: b.len() });
    }
    if b.iter().any(|x| !(*x >= 0.0) || !x.is_finite()) {
        return Err(Error::InvalidWeights("weights must be finite and nonnegative".into()));
    }
    let squares: Vec<f64> = b.iter().map(|x| x * x).collect();
    let pair_sum = if squares.iter().all(|x| *x == 0.0) {
        0.0
    } else {
        let mut s = ZERO;
        for i in 0..n {
            for k in 0..n {
                s += (t.get(i, i, k, k) + t.get(i, k, k, i)) * (squares[i] * squares[k]);
            }
        }
        s.re
    };
    let closed_form = pair_sum / (n * (n + 1)) as f64;
    let sums = sphere_average(n, count, seed, |w| {
        let x: Vec<C64> = w.iter().zip(b).map(|(z, s)| z * *s).collect();
        let mut v = ZERO;
        for i in 0..n {
            for j in 0..n {
                let a = x[i] * x[j].conj();
                for k in 0..n {
                    for l in 0..n {
                        v += t.get(i, j, k, l) * a * x[k] * x[l].conj();
                    }
                }
            }
        }
        v
    });
    let (monte_carlo, std_error) = sums.mean_and_error();
    let (sigmas, agree) = gate(monte_carlo, closed_form, std_error);
    Ok(BergerReport {
        weights: b.to_vec(),
        monte_carlo,
        std_error,
        samples: sums.count,
        seed,
        pair_sum,
        closed_form,
        sigmas,
        agree,
    })
}

/// Random tensor with Hermitian pair symmetry `R_{i\bar j k\bar l} =
/// conj(R_{j\bar i l\bar k})`, given in an identity frame.
pub fn synthetic_tensor<R: Rng>(n: usize, rng: &mut R) -> ChernTensor {
    let x = numerics::ginibre(n * n, n * n, rng);
    let at = |i: usize, j: usize, k: usize, l: usize| x[(i * n + j, k * n + l)];
    ChernTensor::unitary_from_fn(n, |i, j, k, l| at(i, j, k, l) + at(j, i, l, k).conj())
}

/// `Σ_{i,k} (R_{i\bar i k\bar k} + R_{i\bar k k\bar i}) a_i a_k` for weights `a = b²`.
pub fn pair_sum_for(t: &ChernTensor, b: &[f64]) -> Result<f64> {
    let squares: Vec<f64> = b.iter().map(|x| x * x).collect();
    curvature::h_positive_pairsum(t, &squares)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn samples_are_unit_and_deterministic() {
        let s = sphere_sample(3, 1000, 4);
        assert!(s.iter().all(|w| (w.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt() - 1.0).abs() <= 1e-14));
        assert_eq!(s, sphere_sample(3, 1000, 4));
        let one = sphere_sample(1, 100, 1);
        assert!(one.iter().all(|w| (w[0].norm() - 1.0).abs() <= 1e-14));
    }

    #[test]
    fn first_and_second_moments() {
        let mean = sphere_average(2, 100_000, 3, |w| w[0]);
        let (m, se) = mean.mean_and_error();
        assert!(m.norm() <= 3.0 * se);
        let sq = sphere_average(2, 100_000, 3, |w| C64::new(w[0].norm_sqr(), 0.0));
        let (m, se) = sq.mean_and_error();
        assert!((m.re - 0.5).abs() <= 3.0 * se);
    }

    #[test]
    fn circle_moment_is_exact() {
        let m = fs_moment(1, [0, 0, 0, 0], 1000, 0).unwrap();
        assert!((m.value - C64::new(1.0, 0.0)).norm() <= 1e-14);
        assert_eq!(m.closed_form, 1.0);
        assert!(m.within_gate);
    }

    #[test]
    fn moment_indices_are_checked() {
        assert!(matches!(fs_moment(2, [0, 0, 2, 0], 10, 0), Err(Error::VariableOutOfRange { .. })));
    }

    #[test]
    fn flat_berger_is_zero() {
        let t = ChernTensor::unitary_from_fn(2, |_, _, _, _| ZERO);
        let r = berger_check(&t, &[0.5, 0.5], 1000, 0).unwrap();
        assert_eq!((r.monte_carlo, r.closed_form), (ZERO, 0.0));
        assert!(r.agree);
    }

    #[test]
    fn doubling_samples_shrinks_error_by_sqrt_two() {
        let a = fs_moment(2, [0, 0, 1, 1], 40_000, 8).unwrap();
        let b = fs_moment(2, [0, 0, 1, 1], 80_000, 8).unwrap();
        let ratio = a.std_error / b.std_error;
        assert!((ratio - 2f64.sqrt()).abs() <= 0.2 * 2f64.sqrt(), "{ratio}");
    }
}
