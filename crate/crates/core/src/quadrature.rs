//! Monte Carlo integration over gauge balls: `|B_r|_p` and the
//! normalization constant `omega_p = |B_1|_p`.
//!
//! Sampling is rejection from the tight bounding box of the ball, with a
//! named, seedable, platform-stable generator (ChaCha8). The sample stream
//! is split into fixed-size chunks whose substreams derive from
//! `(seed, chunk index)`, so the merged estimate is bit-identical for any
//! worker count.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{CarnotError, Result};
use crate::exec::map_indexed;
use crate::gauges::GaugeRho;
use crate::group::Point;
use crate::jets::ScalarField;
use crate::lie::{GroupConfig, MetricMode};
use crate::operators::m_factor_from_jet;

/// Name of the pseudo-random generator, recorded in every report.
pub const RNG_NAME: &str = "chacha8";

/// Samples per deterministic substream chunk.
const CHUNK: u64 = 1 << 16;

/// Relative gauge cutoff below which a sample is rejected and redrawn:
/// jets of the gauge are ill-conditioned in that (measure-zero) core.
const CORE_CUTOFF: f64 = 1e-9;

/// Which gradient norm enters the integrand `||grad rho||^p`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum IntegrandNorm {
    /// The metric-correct `M(rho)` (default).
    Metric,
    /// The plain Euclidean norm of the horizontal gradient.
    Orthonormal,
}

/// A seeded Monte Carlo estimate.
#[derive(Debug, Clone, Serialize)]
pub struct McEstimate {
    pub value: f64,
    pub std_error: f64,
    pub samples: u64,
    pub seed: u64,
    pub rng_name: &'static str,
    /// Which gradient norm the integrand used.
    pub integrand_norm: IntegrandNorm,
    /// Samples where the integrand norm exceeded 1 beyond rounding
    /// (diagnostic: for Heisenberg-type gauges it is bounded by 1).
    pub boundedness_violations: u64,
}

/// Half-widths of the tight bounding box of `B_r`, in coordinate order:
/// `|x_i| <= r / sqrt(w_i)` and `|t| <= r^2 / 4`.
fn ball_box(r: f64, cfg: &GroupConfig) -> Vec<f64> {
    let h = cfg.horizontal_dim();
    let mut half = Vec::with_capacity(h + 1);
    for i in 0..h {
        let w = match cfg.metric_mode {
            MetricMode::MainAssumption => 2.0 * cfg.l_for(i).abs(),
            MetricMode::Orthonormal => 1.0,
        };
        half.push(r / w.sqrt());
    }
    half.push(r * r / 4.0);
    half
}

fn chunk_rng(seed: u64, chunk: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(chunk.wrapping_add(1));
    rng
}

fn draw_in_box<R: Rng>(rng: &mut R, half: &[f64]) -> Point {
    let h = half.len() - 1;
    let x = (0..h).map(|i| rng.gen_range(-half[i]..half[i])).collect();
    let t = rng.gen_range(-half[h]..half[h]);
    Point::new(x, t)
}

/// Draws one point inside the ball by rejection, redrawing samples that
/// land in the near-singular core.
fn draw_in_ball<R: Rng>(rng: &mut R, half: &[f64], rho: &GaugeRho, r: f64) -> Point {
    loop {
        let pt = draw_in_box(rng, half);
        let v = rho.value(&pt);
        if v < r && v >= CORE_CUTOFF * r {
            return pt;
        }
    }
}

/// Uniform (Lebesgue) samples from the gauge ball `B_r`, deterministic
/// given the seed.
pub fn sample_ball(r: f64, cfg: &GroupConfig, count: usize, seed: u64) -> Result<Vec<Point>> {
    if !(r > 0.0) {
        return Err(CarnotError::InvalidParameter(format!(
            "ball radius must be positive, got {}",
            r
        )));
    }
    if count == 0 {
        return Err(CarnotError::InvalidParameter("count must be positive".into()));
    }
    let rho = GaugeRho::new(cfg.clone());
    let half = ball_box(r, cfg);
    let n_chunks = (count as u64).div_ceil(CHUNK);
    let chunks = map_indexed(n_chunks as usize, |c| {
        let mut rng = chunk_rng(seed, c as u64);
        let take = (count as u64 - c as u64 * CHUNK).min(CHUNK) as usize;
        (0..take)
            .map(|_| draw_in_ball(&mut rng, &half, &rho, r))
            .collect::<Vec<_>>()
    });
    Ok(chunks.into_iter().flatten().collect())
}

struct ChunkAccum {
    sum: f64,
    sum_sq: f64,
    violations: u64,
}

/// Monte Carlo estimate of `|B_r|_p = integral over B_r of ||grad rho||^p`.
///
/// The estimator averages `indicator(rho < r) * norm^p` over box draws and
/// scales by the box volume, so the standard error reflects both the
/// rejection and the integrand variance. Core samples (rho below the
/// cutoff) contribute zero, matching their measure-zero neighborhood.
pub fn ball_p_measure(
    r: f64,
    p: f64,
    cfg: &GroupConfig,
    count: u64,
    seed: u64,
    norm: IntegrandNorm,
) -> Result<McEstimate> {
    if !(r > 0.0) {
        return Err(CarnotError::InvalidParameter(format!(
            "ball radius must be positive, got {}",
            r
        )));
    }
    if !(p > 1.0) || !p.is_finite() {
        return Err(CarnotError::InvalidParameter(format!(
            "p must lie in (1, inf), got {}",
            p
        )));
    }
    if count == 0 {
        return Err(CarnotError::InvalidParameter("count must be positive".into()));
    }

    let rho = GaugeRho::new(cfg.clone());
    let half = ball_box(r, cfg);
    let box_volume: f64 = half.iter().map(|h| 2.0 * h).product();
    let h_dim = cfg.horizontal_dim();

    let n_chunks = count.div_ceil(CHUNK);
    let partials = map_indexed(n_chunks as usize, |c| {
        let mut rng = chunk_rng(seed, c as u64);
        let take = (count - c as u64 * CHUNK).min(CHUNK);
        let mut acc = ChunkAccum {
            sum: 0.0,
            sum_sq: 0.0,
            violations: 0,
        };
        for _ in 0..take {
            let pt = draw_in_box(&mut rng, &half);
            let v = rho.value(&pt);
            let g = if v < r && v >= CORE_CUTOFF * r {
                let jet = rho.jet(&pt).expect("off the singular core");
                let norm_val = match norm {
                    IntegrandNorm::Metric => m_factor_from_jet(&jet, &pt, cfg),
                    IntegrandNorm::Orthonormal => {
                        let g2: f64 = (0..h_dim)
                            .map(|j| {
                                let x = crate::jets::x_first(&jet, &pt, cfg, j);
                                x * x
                            })
                            .sum();
                        g2.sqrt()
                    }
                };
                if norm == IntegrandNorm::Metric && norm_val > 1.0 + 1e-9 {
                    acc.violations += 1;
                }
                norm_val.powf(p)
            } else {
                0.0
            };
            acc.sum += g;
            acc.sum_sq += g * g;
        }
        acc
    });

    let mut sum = 0.0;
    let mut sum_sq = 0.0;
    let mut violations = 0;
    for part in partials {
        sum += part.sum;
        sum_sq += part.sum_sq;
        violations += part.violations;
    }
    let nf = count as f64;
    let mean = sum / nf;
    let var = (sum_sq / nf - mean * mean).max(0.0);
    Ok(McEstimate {
        value: box_volume * mean,
        std_error: box_volume * (var / nf).sqrt(),
        samples: count,
        seed,
        rng_name: RNG_NAME,
        integrand_norm: norm,
        boundedness_violations: violations,
    })
}

/// `omega_p = |B_1|_p`, the normalization constant feeding `C_p`.
pub fn omega_p(
    p: f64,
    cfg: &GroupConfig,
    count: u64,
    seed: u64,
    norm: IntegrandNorm,
) -> Result<McEstimate> {
    ball_p_measure(1.0, p, cfg, count, seed, norm)
}
