//! Seeded Monte Carlo oracle for the analytic quantities.
//!
//! Randomness comes from ChaCha8 (`rand_chacha::ChaCha8Rng`). A run with
//! seed `s` is cut into blocks of [`BLOCK_SIZE`] samples; block `i` draws from
//! the generator seeded with `s` and switched to stream `i`. Blocks are
//! generated in parallel and written in block order, so output is bit-identical
//! for a given `(scenario, seed, n)` regardless of thread count.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::counterfactual::{OutcomeSequence, PairCounts};
use crate::error::{check_unit_interval, Error, Result};
use crate::nsbox::NsBox;
use crate::quantum_model::{match_probability, Direction};

pub const RNG_ALGORITHM: &str = "ChaCha8";

/// Samples per independent sub-stream.
pub const BLOCK_SIZE: usize = 4096;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SampleConfig {
    n_samples: usize,
    seed: u64,
}

impl SampleConfig {
    pub fn new(n_samples: usize, seed: u64) -> Result<Self> {
        if n_samples == 0 {
            return Err(Error::ZeroSamples);
        }
        Ok(Self { n_samples, seed })
    }

    pub fn n_samples(&self) -> usize {
        self.n_samples
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Config for the `index`-th independent sub-task of this run (a sweep
    /// grid point, one of several samplers, ...).
    pub fn derive(&self, index: u64) -> Self {
        Self {
            n_samples: self.n_samples,
            seed: splitmix64(self.seed ^ splitmix64(index.wrapping_add(0x5851_F42D_4C95_7F2D))),
        }
    }
}

fn splitmix64(x: u64) -> u64 {
    let mut z = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Generator for sub-stream `stream` of a run seeded with `seed`.
pub fn stream_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

fn generate<T, F>(cfg: &SampleConfig, draw: F) -> Vec<T>
where
    T: Copy + Default + Send,
    F: Fn(&mut ChaCha8Rng) -> T + Sync,
{
    let mut out = vec![T::default(); cfg.n_samples];
    out.par_chunks_mut(BLOCK_SIZE)
        .enumerate()
        .for_each(|(block, chunk)| {
            let mut rng = stream_rng(cfg.seed, block as u64);
            for slot in chunk {
                *slot = draw(&mut rng);
            }
        });
    out
}

fn unzip_pm1(pairs: Vec<(i8, i8)>) -> (OutcomeSequence, OutcomeSequence) {
    let (m, u): (Vec<i8>, Vec<i8>) = pairs.into_iter().unzip();
    (
        OutcomeSequence::from_vec_unchecked(m),
        OutcomeSequence::from_vec_unchecked(u),
    )
}

fn pm1(rng: &mut ChaCha8Rng) -> i8 {
    if rng.random_bool(0.5) {
        1
    } else {
        -1
    }
}

/// `reference` kept with probability `p`, flipped otherwise.
fn follow(rng: &mut ChaCha8Rng, reference: i8, p: f64) -> i8 {
    if rng.random_bool(p) {
        reference
    } else {
        -reference
    }
}

/// A sampled statistic with its standard error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EmpiricalEstimate {
    pub value: f64,
    pub std_error: f64,
    pub n: u64,
}

impl EmpiricalEstimate {
    /// Correlation estimate with the large-sample error `(1 − r²)/√n`.
    pub fn correlation(value: f64, n: u64) -> Self {
        Self {
            value,
            std_error: (1.0 - value * value).max(0.0) / (n as f64).sqrt(),
            n,
        }
    }

    /// Binomial rate estimate, error `√(p̂(1 − p̂)/n)`.
    pub fn proportion(hits: u64, n: u64) -> Self {
        let p = hits as f64 / n as f64;
        Self {
            value: p,
            std_error: (p * (1.0 - p) / n as f64).sqrt(),
            n,
        }
    }

    /// `|value − target| ≤ k·std_error`.
    pub fn within(&self, target: f64, k: f64) -> bool {
        (self.value - target).abs() <= k * self.std_error
    }
}

pub fn estimate_from_counts(counts: &PairCounts) -> Result<EmpiricalEstimate> {
    Ok(EmpiricalEstimate::correlation(counts.pearson()?, counts.n))
}

/// Pearson estimate of two outcome sequences.
pub fn estimate_correlation(m: &OutcomeSequence, u: &OutcomeSequence) -> Result<EmpiricalEstimate> {
    let value = crate::counterfactual::pearson_pm1(m, u)?;
    Ok(EmpiricalEstimate::correlation(value, m.len() as u64))
}

/// Pairs of outcomes along `alpha` (particle 1) and `beta` (particle 2):
/// the first is a fair ±1, the second agrees with it with probability
/// `match_probability(alpha, beta)`.
pub fn sample_pair(
    alpha: Direction,
    beta: Direction,
    cfg: &SampleConfig,
) -> (OutcomeSequence, OutcomeSequence) {
    let p = match_probability(alpha, beta).clamp(0.0, 1.0);
    unzip_pm1(generate(cfg, |rng| {
        let first = pm1(rng);
        (first, follow(rng, first, p))
    }))
}

/// Measured (`a`) and unmeasured (`a′`) local outcomes generated as
/// conditionally independent given a fair remote outcome along `theta`.
pub fn sample_counterfactual_ci(
    theta: Direction,
    a: Direction,
    a_prime: Direction,
    cfg: &SampleConfig,
) -> (OutcomeSequence, OutcomeSequence) {
    let pa = match_probability(theta, a).clamp(0.0, 1.0);
    let pb = match_probability(theta, a_prime).clamp(0.0, 1.0);
    unzip_pm1(generate(cfg, |rng| {
        let remote = pm1(rng);
        let m = follow(rng, remote, pa);
        (m, follow(rng, remote, pb))
    }))
}

/// Correlation between two independent fair ±1 sequences.
pub fn coin_counterfactual(cfg: &SampleConfig) -> Result<EmpiricalEstimate> {
    let (m, u) = unzip_pm1(generate(cfg, |rng| (pm1(rng), pm1(rng))));
    estimate_correlation(&m, &u)
}

/// A box of cubes and spheres, each red or blue. Shape maps to M (cube +1),
/// colour maps to U (red +1).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ShapesMixture {
    pub cube_fraction: f64,
    pub red_given_cube: f64,
    pub blue_given_sphere: f64,
}

impl Default for ShapesMixture {
    /// Half cubes, half spheres; three quarters of cubes red, three quarters
    /// of spheres blue.
    fn default() -> Self {
        Self {
            cube_fraction: 0.5,
            red_given_cube: 0.75,
            blue_given_sphere: 0.75,
        }
    }
}

impl ShapesMixture {
    pub fn new(cube_fraction: f64, red_given_cube: f64, blue_given_sphere: f64) -> Result<Self> {
        Ok(Self {
            cube_fraction: check_unit_interval("cube_fraction", cube_fraction)?,
            red_given_cube: check_unit_interval("red_given_cube", red_given_cube)?,
            blue_given_sphere: check_unit_interval("blue_given_sphere", blue_given_sphere)?,
        })
    }

    /// `(M, U, probability)` for cube/red, cube/blue, sphere/red, sphere/blue.
    pub fn categories(&self) -> [(i8, i8, f64); 4] {
        let c = self.cube_fraction;
        let s = 1.0 - c;
        [
            (1, 1, c * self.red_given_cube),
            (1, -1, c * (1.0 - self.red_given_cube)),
            (-1, 1, s * (1.0 - self.blue_given_sphere)),
            (-1, -1, s * self.blue_given_sphere),
        ]
    }

    /// Exact Pearson coefficient between shape and colour.
    pub fn analytic_rho(&self) -> Result<f64> {
        let cats = self.categories();
        let mean = |f: fn(&(i8, i8, f64)) -> f64| cats.iter().map(|c| f(c) * c.2).sum::<f64>();
        let mu_m = mean(|c| f64::from(c.0));
        let mu_u = mean(|c| f64::from(c.1));
        let e_mu = mean(|c| f64::from(c.0 * c.1));
        let var_m = 1.0 - mu_m * mu_m;
        let var_u = 1.0 - mu_u * mu_u;
        if var_m <= 0.0 || var_u <= 0.0 {
            return Err(Error::DegenerateSequence);
        }
        Ok((e_mu - mu_m * mu_u) / (var_m.sqrt() * var_u.sqrt()))
    }
}

pub fn shapes_box_sample_with(mixture: &ShapesMixture, cfg: &SampleConfig) -> Result<EmpiricalEstimate> {
    let mix = *mixture;
    let (m, u) = unzip_pm1(generate(cfg, move |rng| {
        if rng.random_bool(mix.cube_fraction) {
            (1, if rng.random_bool(mix.red_given_cube) { 1 } else { -1 })
        } else {
            (-1, if rng.random_bool(mix.blue_given_sphere) { -1 } else { 1 })
        }
    }));
    estimate_correlation(&m, &u)
}

/// Shape/colour correlation for the default mixture.
pub fn shapes_box_sample(cfg: &SampleConfig) -> Result<EmpiricalEstimate> {
    shapes_box_sample_with(&ShapesMixture::default(), cfg)
}

/// Output pairs `(A, B)` of `bx` for inputs `(a, b)`, as 0/1 bits.
pub fn sample_nsbox(bx: &NsBox, a: usize, b: usize, cfg: &SampleConfig) -> (Vec<u8>, Vec<u8>) {
    assert!(a < 2 && b < 2, "inputs must be 0 or 1");
    let cells = [(0u8, 0u8), (0, 1), (1, 0), (1, 1)];
    let weights = cells.map(|(x, y)| bx.p(a, b, x as usize, y as usize).max(0.0));
    let last = cells
        .iter()
        .zip(weights)
        .rev()
        .find(|(_, w)| *w > 0.0)
        .map_or((1, 1), |(c, _)| *c);
    let pairs = generate(cfg, |rng| {
        let mut r: f64 = rng.random();
        for (cell, w) in cells.iter().zip(weights) {
            if r < w {
                return *cell;
            }
            r -= w;
        }
        last
    });
    pairs.into_iter().unzip()
}

/// Rate at which sampled outputs satisfy `A ⊕ B = a·b`.
pub fn estimate_target_rate(outs_a: &[u8], outs_b: &[u8], a: usize, b: usize) -> Result<EmpiricalEstimate> {
    if outs_a.len() != outs_b.len() {
        return Err(Error::LengthMismatch {
            left: outs_a.len(),
            right: outs_b.len(),
        });
    }
    if outs_a.is_empty() {
        return Err(Error::EmptySequence);
    }
    let target = (a & b) as u8;
    let hits = outs_a.iter().zip(outs_b).filter(|(x, y)| *x ^ *y == target).count();
    Ok(EmpiricalEstimate::proportion(hits as u64, outs_a.len() as u64))
}
