//! State-space volumes in population coordinates.
//!
//! All volumes use the flat measure `δ(1 - |χ|₁) dχ` on the population
//! simplex, under which the full diagonal-symmetric family has volume `1/N!`.
//!
//! Monte-Carlo estimators split the sample budget into fixed-size chunks.
//! Chunk `c` draws from ChaCha8 stream `c` of the user seed, and chunk
//! results are merged in chunk order, so the estimate depends only on
//! `(n_samples, seed)` and never on thread count or execution policy.

use nalgebra::DMatrix;
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp1};
use serde::{Deserialize, Serialize};

use crate::decomposer::{certify, DEFAULT_EPSILON};
use crate::dicke::{binomial, j_max, GdsState};
use crate::error::Result;
use crate::exec::Execution;
use crate::ppt::{PptEvaluator, DEFAULT_PPT_TOL};

/// Samples per independently seeded chunk.
pub const CHUNK_SIZE: u64 = 1 << 16;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum VolumeMethod {
    #[serde(rename = "MC-indicator")]
    McIndicator,
    #[serde(rename = "MC-jacobian")]
    McJacobian,
    #[serde(rename = "analytic")]
    Analytic,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VolumeEstimate {
    pub mean: f64,
    pub std_error: f64,
    pub n_samples: u64,
    pub seed: Option<u64>,
    pub method: VolumeMethod,
}

impl VolumeEstimate {
    pub fn exact(value: f64) -> Self {
        Self { mean: value, std_error: 0.0, n_samples: 0, seed: None, method: VolumeMethod::Analytic }
    }

    /// `|self - other| / sqrt(σ_self² + σ_other²)`.
    pub fn z_score(&self, other: &VolumeEstimate) -> f64 {
        (self.mean - other.mean).abs() / self.std_error.hypot(other.std_error)
    }
}

/// Running sums of one Monte-Carlo estimator.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct Accumulator {
    pub count: u64,
    pub sum: f64,
    pub sum_sq: f64,
}

impl Accumulator {
    pub fn push(&mut self, v: f64) {
        self.count += 1;
        self.sum += v;
        self.sum_sq += v * v;
    }

    pub fn merge(self, other: Accumulator) -> Accumulator {
        Accumulator {
            count: self.count + other.count,
            sum: self.sum + other.sum,
            sum_sq: self.sum_sq + other.sum_sq,
        }
    }

    /// Mean and standard error, both multiplied by `scale`.
    pub fn estimate(&self, scale: f64, seed: u64, method: VolumeMethod) -> VolumeEstimate {
        let n = self.count as f64;
        let mean = self.sum / n;
        let var = if self.count > 1 {
            ((self.sum_sq - n * mean * mean) / (n - 1.0)).max(0.0)
        } else {
            0.0
        };
        VolumeEstimate {
            mean: mean * scale,
            std_error: (var / n).sqrt() * scale,
            n_samples: self.count,
            seed: Some(seed),
            method,
        }
    }
}

/// Generator for chunk `chunk` of the stream family rooted at `seed`.
pub fn chunk_rng(seed: u64, chunk: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(chunk);
    rng
}

/// Runs `sample` over chunks covering `n_samples` draws and merges the
/// chunk sums in order.
pub fn run_chunked<F>(exec: Execution, n_samples: u64, seed: u64, sample: F) -> Accumulator
where
    F: Fn(&mut ChaCha8Rng) -> f64 + Sync + Send,
{
    let chunks = n_samples.div_ceil(CHUNK_SIZE);
    exec.map_indexed(chunks as usize, |c| {
        let c = c as u64;
        let len = CHUNK_SIZE.min(n_samples - c * CHUNK_SIZE);
        let mut rng = chunk_rng(seed, c);
        let mut acc = Accumulator::default();
        for _ in 0..len {
            acc.push(sample(&mut rng));
        }
        acc
    })
    .into_iter()
    .fold(Accumulator::default(), Accumulator::merge)
}

fn dirichlet_flat<R: Rng + ?Sized>(len: usize, rng: &mut R) -> Vec<f64> {
    let mut v: Vec<f64> = (0..len).map(|_| Exp1.sample(rng)).collect();
    let total: f64 = v.iter().sum();
    v.iter_mut().for_each(|x| *x /= total);
    v
}

/// Uniform draw from the population simplex via normalized exponential
/// spacings.
pub fn sample_gds_simplex<R: Rng + ?Sized>(n: usize, rng: &mut R) -> GdsState {
    GdsState::new(dirichlet_flat(n + 1, rng)).expect("normalized exponentials form a valid state")
}

fn factorial_f64(n: usize) -> f64 {
    (1..=n).map(|i| i as f64).product()
}

/// `(1/N!) · P[indicator(χ)]` for `χ` uniform on the simplex.
pub fn indicator_volume<F>(
    exec: Execution,
    n: usize,
    n_samples: u64,
    seed: u64,
    indicator: F,
) -> VolumeEstimate
where
    F: Fn(&GdsState) -> bool + Sync + Send,
{
    let acc = run_chunked(exec, n_samples, seed, |rng| {
        let chi = sample_gds_simplex(n, rng);
        f64::from(u8::from(indicator(&chi)))
    });
    acc.estimate(1.0 / factorial_f64(n), seed, VolumeMethod::McIndicator)
}

/// Volume of the PPT diagonal-symmetric states.
pub fn ppt_gds_volume(n: usize, n_samples: u64, seed: u64) -> Result<VolumeEstimate> {
    ppt_gds_volume_with(Execution::default(), n, n_samples, seed)
}

pub fn ppt_gds_volume_with(
    exec: Execution,
    n: usize,
    n_samples: u64,
    seed: u64,
) -> Result<VolumeEstimate> {
    let evaluator = PptEvaluator::new(n)?;
    Ok(indicator_volume(exec, n, n_samples, seed, |chi| {
        evaluator.is_ppt(chi.populations(), DEFAULT_PPT_TOL)
    }))
}

/// Volume of the states the decomposer certifies, by the same sampling as
/// [`ppt_gds_volume`].
pub fn certified_volume_with(exec: Execution, n: usize, n_samples: u64, seed: u64) -> VolumeEstimate {
    indicator_volume(exec, n, n_samples, seed, |chi| certify(chi, DEFAULT_EPSILON).is_certified())
}

/// Four-qubit change-of-variables density `96 x1 x2 y1² y2² (y1-y2)⁴`.
///
/// Taken for the pinned node at `y = 0`. The mirrored form with `(1-y)²`
/// factors integrates to the same volume over the unit cube.
pub fn jacobian_n4(x1: f64, x2: f64, y1: f64, y2: f64) -> f64 {
    let d = y1 - y2;
    96.0 * x1 * x2 * (y1 * y2).powi(2) * (d * d).powi(2)
}

/// `|det ∂(χ_0..χ_{N-1}) / ∂(x_1..x_{J-1}, free y)|` with the last weight
/// eliminated by normalization.
///
/// `xs` holds all `j_max` weights; `ys` holds the free amplitudes (all of
/// them for odd `N`, all but the pinned zero for even `N`).
pub fn jacobian_numeric(n: usize, xs: &[f64], ys: &[f64]) -> f64 {
    let jm = j_max(n);
    assert_eq!(xs.len(), jm);
    let mut all_y = ys.to_vec();
    if n.is_multiple_of(2) {
        all_y.push(0.0);
    }
    assert_eq!(all_y.len(), jm);
    let basis = |y: f64, n0: usize| {
        binomial(n, n0) * y.powi(n0 as i32) * (1.0 - y).powi((n - n0) as i32)
    };
    let d_basis = |y: f64, n0: usize| {
        let (a, b) = (n0 as i32, (n - n0) as i32);
        let left = if a > 0 { f64::from(a) * y.powi(a - 1) * (1.0 - y).powi(b) } else { 0.0 };
        let right = if b > 0 { f64::from(b) * y.powi(a) * (1.0 - y).powi(b - 1) } else { 0.0 };
        binomial(n, n0) * (left - right)
    };
    let mut jac = DMatrix::<f64>::zeros(n, n);
    for n0 in 0..n {
        let mut col = 0;
        for j in 0..jm - 1 {
            jac[(n0, col)] = basis(all_y[j], n0) - basis(all_y[jm - 1], n0);
            col += 1;
        }
        for (j, &y) in ys.iter().enumerate() {
            jac[(n0, col)] = xs[j] * d_basis(y, n0);
            col += 1;
        }
    }
    jac.determinant().abs()
}

/// Volume of product mixtures, integrated over mixture parameters with the
/// Jacobian as volume element.
///
/// Weights are uniform on their simplex and free amplitudes uniform on the
/// unit cube. The indicator `x_1 >= x_2 >= ...` over the interchangeable terms
/// makes the parametrization one-to-one; at `N = 4` it reduces to `x_1 >= x_2`.
pub fn sds_volume_mc(n: usize, n_samples: u64, seed: u64) -> VolumeEstimate {
    sds_volume_mc_with(Execution::default(), n, n_samples, seed)
}

pub fn sds_volume_mc_with(exec: Execution, n: usize, n_samples: u64, seed: u64) -> VolumeEstimate {
    let jm = j_max(n);
    let free_y = if n.is_multiple_of(2) { jm - 1 } else { jm };
    // Terms whose labels can be permuted without changing the state.
    let interchangeable = free_y;
    let acc = run_chunked(exec, n_samples, seed, |rng| {
        let xs = dirichlet_flat(jm, rng);
        let ys: Vec<f64> = (0..free_y).map(|_| rng.random::<f64>()).collect();
        if !xs[..interchangeable].windows(2).all(|w| w[0] >= w[1]) {
            return 0.0;
        }
        if n == 4 {
            jacobian_n4(xs[0], xs[1], ys[0], ys[1])
        } else {
            jacobian_numeric(n, &xs, &ys)
        }
    });
    // Flat measure on the weight simplex has total mass 1/(J-1)!.
    acc.estimate(1.0 / factorial_f64(jm - 1), seed, VolumeMethod::McJacobian)
}

fn factorial_big(n: usize) -> BigInt {
    (1..=n).fold(BigInt::one(), |acc, i| acc * BigInt::from(i))
}

/// `Π_{z=1}^{N} z^{z-1} (z-1)! / (2z-1)!` as an exact fraction.
pub fn sds_volume_formula(n: usize) -> BigRational {
    (1..=n).fold(BigRational::one(), |acc, z| {
        let num = BigInt::from(z).pow((z - 1) as u32) * factorial_big(z - 1);
        acc * BigRational::new(num, factorial_big(2 * z - 1))
    })
}

/// `1/N!`.
pub fn gds_volume(n: usize) -> BigRational {
    BigRational::new(BigInt::one(), factorial_big(n))
}

pub fn rational_to_f64(r: &BigRational) -> f64 {
    r.to_f64().unwrap_or(f64::NAN)
}
