//! Random kitchen sink feature map for the Gaussian kernel.
//!
//! `z(x) = sqrt(1/k) [cos(x.w_1) .. cos(x.w_k), sin(x.w_1) .. sin(x.w_k)]`
//! with frequencies `w_j ~ N(0, sigma^-2 I)`, so that
//! `<z(x), z(y)> ~= exp(-|x - y|^2 / (2 sigma^2))`.

use rand::seq::index;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};

/// Identifies the generator and normal sampler used to draw frequencies.
/// Stored alongside every persisted map.
pub const PRNG_ALGORITHM: &str = "chacha20/rand_distr-0.5-ziggurat";

/// Largest sample used by the median heuristic.
pub const MEDIAN_SUBSAMPLE: usize = 1000;

#[derive(Debug, Clone, PartialEq)]
pub struct RksMap {
    input_dim: usize,
    frequencies: usize,
    sigma: f64,
    seed: u64,
    /// Row-major `frequencies x input_dim`; row `j` is frequency `w_j`.
    omega: Vec<f64>,
}

impl RksMap {
    /// Draws `output_dim / 2` frequencies deterministically from `seed`.
    pub fn sample(input_dim: usize, output_dim: usize, sigma: f64, seed: u64) -> Result<Self> {
        if !output_dim.is_multiple_of(2) {
            return Err(Error::invalid(
                "output dimension must be even (cos/sin pairs)",
            ));
        }
        if output_dim < 2 {
            return Err(Error::invalid("output dimension must be >= 2"));
        }
        if input_dim == 0 {
            return Err(Error::invalid("input dimension must be positive"));
        }
        if !(sigma > 0.0 && sigma.is_finite()) {
            return Err(Error::invalid(format!("sigma must be positive, got {sigma}")));
        }
        let frequencies = output_dim / 2;
        let mut rng = ChaCha20Rng::seed_from_u64(seed);
        let inv_sigma = 1.0 / sigma;
        let omega = (0..frequencies * input_dim)
            .map(|_| rng.sample::<f64, _>(StandardNormal) * inv_sigma)
            .collect();
        Ok(RksMap {
            input_dim,
            frequencies,
            sigma,
            seed,
            omega,
        })
    }

    /// Rebuilds a map from persisted parts.
    pub fn from_parts(
        input_dim: usize,
        frequencies: usize,
        sigma: f64,
        seed: u64,
        omega: Vec<f64>,
    ) -> Result<Self> {
        if input_dim == 0 || frequencies == 0 {
            return Err(Error::invalid("empty frequency matrix"));
        }
        if omega.len() != input_dim * frequencies {
            return Err(Error::DimensionMismatch {
                expected: input_dim * frequencies,
                got: omega.len(),
            });
        }
        if !(sigma > 0.0 && sigma.is_finite()) || omega.iter().any(|w| !w.is_finite()) {
            return Err(Error::invalid("non-finite map parameters"));
        }
        Ok(RksMap {
            input_dim,
            frequencies,
            sigma,
            seed,
            omega,
        })
    }

    pub fn input_dim(&self) -> usize {
        self.input_dim
    }

    /// Number of sampled frequencies `k`.
    pub fn frequencies(&self) -> usize {
        self.frequencies
    }

    /// `2k`.
    pub fn output_dim(&self) -> usize {
        2 * self.frequencies
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn omega(&self) -> &[f64] {
        &self.omega
    }

    pub fn frequency(&self, j: usize) -> &[f64] {
        &self.omega[j * self.input_dim..(j + 1) * self.input_dim]
    }

    pub fn transform(&self, x: &[f64]) -> Result<Vec<f64>> {
        let mut z = vec![0.0; self.output_dim()];
        self.transform_into(x, &mut z)?;
        Ok(z)
    }

    pub fn transform_into(&self, x: &[f64], out: &mut [f64]) -> Result<()> {
        if x.len() != self.input_dim {
            return Err(Error::DimensionMismatch {
                expected: self.input_dim,
                got: x.len(),
            });
        }
        let k = self.frequencies;
        let scale = (1.0 / k as f64).sqrt();
        for j in 0..k {
            let proj: f64 = self.frequency(j).iter().zip(x).map(|(w, v)| w * v).sum();
            let (s, c) = proj.sin_cos();
            out[j] = scale * c;
            out[k + j] = scale * s;
        }
        Ok(())
    }

    /// `<z(x), z(y)>`.
    pub fn approx_kernel(&self, x: &[f64], y: &[f64]) -> Result<f64> {
        let zx = self.transform(x)?;
        let zy = self.transform(y)?;
        Ok(zx.iter().zip(&zy).map(|(a, b)| a * b).sum())
    }
}

/// Exact Gaussian kernel `exp(-|x - y|^2 / (2 sigma^2))`.
pub fn gaussian_kernel(x: &[f64], y: &[f64], sigma: f64) -> f64 {
    let d2: f64 = x.iter().zip(y).map(|(a, b)| (a - b) * (a - b)).sum();
    (-d2 / (2.0 * sigma * sigma)).exp()
}

/// Median pairwise Euclidean distance over at most [`MEDIAN_SUBSAMPLE`]
/// vectors, chosen by `seed` when the sample is larger. Falls back to 1 when
/// the median is zero.
pub fn median_heuristic_sigma<V: AsRef<[f64]>>(sample: &[V], seed: u64) -> Result<f64> {
    if sample.len() < 2 {
        return Err(Error::invalid(
            "median heuristic needs at least two vectors",
        ));
    }
    let chosen: Vec<&[f64]> = if sample.len() > MEDIAN_SUBSAMPLE {
        let mut rng = ChaCha20Rng::seed_from_u64(seed);
        let mut idx = index::sample(&mut rng, sample.len(), MEDIAN_SUBSAMPLE).into_vec();
        idx.sort_unstable();
        idx.into_iter().map(|i| sample[i].as_ref()).collect()
    } else {
        sample.iter().map(AsRef::as_ref).collect()
    };

    let mut dists = Vec::with_capacity(chosen.len() * (chosen.len() - 1) / 2);
    for (i, a) in chosen.iter().enumerate() {
        for b in &chosen[i + 1..] {
            let d2: f64 = a.iter().zip(b.iter()).map(|(x, y)| (x - y) * (x - y)).sum();
            dists.push(d2.sqrt());
        }
    }
    let median = median(&mut dists);
    if median > 0.0 && median.is_finite() {
        Ok(median)
    } else {
        Ok(1.0)
    }
}

fn median(values: &mut [f64]) -> f64 {
    let n = values.len();
    let mid = n / 2;
    let (lower, upper, _) = values.select_nth_unstable_by(mid, f64::total_cmp);
    let upper = *upper;
    if n % 2 == 1 {
        upper
    } else {
        let below = lower.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        0.5 * (below + upper)
    }
}
