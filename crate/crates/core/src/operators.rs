//! Horizontal differential operators: gradient, symmetrized Hessian,
//! divergence, the gradient-norm factor, and the p- and infinity-Laplacians.
//!
//! Everything is evaluated in expanded (non-divergence) form from one jet
//! per point. The weights `w_j = ||X_j||^2` unify both metric modes: with
//! `w_j = 1` the formulas reduce to the orthonormal expansions, with
//! `w_j = 2|L_j'|` they are the curvilinear ones.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{CarnotError, Result};
use crate::group::Point;
use crate::jets::{x_first, x_second, Jet2, ScalarField};
use crate::lie::GroupConfig;

/// Which operator a verification run evaluates.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum OperatorSpec {
    PLaplace { p: f64 },
    InfinityLaplace,
}

impl OperatorSpec {
    pub fn p_laplace(p: f64) -> Result<Self> {
        if !(p > 1.0) || !p.is_finite() {
            return Err(CarnotError::InvalidParameter(format!(
                "p must lie in (1, inf), got {}",
                p
            )));
        }
        Ok(OperatorSpec::PLaplace { p })
    }
}

/// The horizontal gradient `(X_0 f, ..., X_{2n-1} f)`.
#[derive(Debug, Clone, PartialEq)]
pub struct HorizontalGradient {
    pub components: Vec<f64>,
}

/// The symmetrized horizontal second-derivative matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct SymmetrizedHessian {
    pub m: DMatrix<f64>,
}

/// Gradient from a jet already evaluated at `pt`.
pub fn horizontal_gradient_from_jet(jet: &Jet2, pt: &Point, cfg: &GroupConfig) -> HorizontalGradient {
    let h = cfg.horizontal_dim();
    HorizontalGradient {
        components: (0..h).map(|j| x_first(jet, pt, cfg, j)).collect(),
    }
}

pub fn horizontal_gradient<F: ScalarField + ?Sized>(
    f: &F,
    pt: &Point,
    cfg: &GroupConfig,
) -> Result<HorizontalGradient> {
    Ok(horizontal_gradient_from_jet(&f.jet(pt)?, pt, cfg))
}

/// Symmetrized Hessian entry `(i, j) = (X_i X_j f + X_j X_i f) / 2`.
pub fn symmetrized_hessian_from_jet(jet: &Jet2, pt: &Point, cfg: &GroupConfig) -> SymmetrizedHessian {
    let h = cfg.horizontal_dim();
    let mut m = DMatrix::zeros(h, h);
    for i in 0..h {
        for j in i..h {
            let v = 0.5 * (x_second(jet, pt, cfg, i, j) + x_second(jet, pt, cfg, j, i));
            m[(i, j)] = v;
            m[(j, i)] = v;
        }
    }
    SymmetrizedHessian { m }
}

pub fn symmetrized_hessian<F: ScalarField + ?Sized>(
    f: &F,
    pt: &Point,
    cfg: &GroupConfig,
) -> Result<SymmetrizedHessian> {
    Ok(symmetrized_hessian_from_jet(&f.jet(pt)?, pt, cfg))
}

/// The metric-correct gradient norm
/// `M(f) = (sum_j (X_j f)^2 / w_j)^(1/2)`,
/// the plain Euclidean norm in orthonormal mode.
pub fn m_factor_from_jet(jet: &Jet2, pt: &Point, cfg: &GroupConfig) -> f64 {
    let h = cfg.horizontal_dim();
    (0..h)
        .map(|j| {
            let g = x_first(jet, pt, cfg, j);
            g * g / cfg.metric_weight(j)
        })
        .sum::<f64>()
        .sqrt()
}

pub fn m_factor<F: ScalarField + ?Sized>(f: &F, pt: &Point, cfg: &GroupConfig) -> Result<f64> {
    Ok(m_factor_from_jet(&f.jet(pt)?, pt, cfg))
}

/// `base^e` via exp/log for non-integer exponents, with the degenerate
/// guard: a negative power of zero is a typed error, never NaN.
fn guarded_power(base: f64, e: f64) -> Result<f64> {
    if base == 0.0 {
        if e > 0.0 {
            return Ok(0.0);
        }
        if e == 0.0 {
            return Ok(1.0);
        }
        return Err(CarnotError::DegeneratePoint { exponent: e });
    }
    Ok((e * base.ln()).exp())
}

/// The p-Laplacian in expanded form from a single jet:
/// `M^(p-2) sum_j X_j X_j f / w_j
///  + (p-2) M^(p-4) sum_{i,j} X_i X_j f X_i f X_j f / (w_i w_j)`.
pub fn p_laplacian_from_jet(
    jet: &Jet2,
    pt: &Point,
    p: f64,
    cfg: &GroupConfig,
) -> Result<f64> {
    if !(p > 1.0) || !p.is_finite() {
        return Err(CarnotError::InvalidParameter(format!(
            "p must lie in (1, inf), got {}",
            p
        )));
    }
    let h = cfg.horizontal_dim();
    let grad: Vec<f64> = (0..h).map(|j| x_first(jet, pt, cfg, j)).collect();
    let m = (0..h)
        .map(|j| grad[j] * grad[j] / cfg.metric_weight(j))
        .sum::<f64>()
        .sqrt();

    let weighted_trace: f64 = (0..h)
        .map(|j| x_second(jet, pt, cfg, j, j) / cfg.metric_weight(j))
        .sum();
    let mut out = guarded_power(m, p - 2.0)? * weighted_trace;

    if p != 2.0 {
        let mut quad = 0.0;
        for i in 0..h {
            for j in 0..h {
                quad += x_second(jet, pt, cfg, i, j) * grad[i] * grad[j]
                    / (cfg.metric_weight(i) * cfg.metric_weight(j));
            }
        }
        out += (p - 2.0) * guarded_power(m, p - 4.0)? * quad;
    }
    Ok(out)
}

pub fn p_laplacian<F: ScalarField + ?Sized>(
    f: &F,
    pt: &Point,
    p: f64,
    cfg: &GroupConfig,
) -> Result<f64> {
    p_laplacian_from_jet(&f.jet(pt)?, pt, p, cfg)
}

/// The infinity-Laplacian
/// `sum_{i,j} X_i X_j f X_i f X_j f / (w_i w_j)`,
/// equal to `<(D^2 f)* grad f, grad f>` in orthonormal mode.
pub fn infinity_laplacian_from_jet(jet: &Jet2, pt: &Point, cfg: &GroupConfig) -> f64 {
    let h = cfg.horizontal_dim();
    let grad: Vec<f64> = (0..h).map(|j| x_first(jet, pt, cfg, j)).collect();
    let mut acc = 0.0;
    for i in 0..h {
        for j in 0..h {
            acc += x_second(jet, pt, cfg, i, j) * grad[i] * grad[j]
                / (cfg.metric_weight(i) * cfg.metric_weight(j));
        }
    }
    acc
}

pub fn infinity_laplacian<F: ScalarField + ?Sized>(
    f: &F,
    pt: &Point,
    cfg: &GroupConfig,
) -> Result<f64> {
    Ok(infinity_laplacian_from_jet(&f.jet(pt)?, pt, cfg))
}

/// Evaluates the configured operator's residual at one point.
pub fn apply_operator<F: ScalarField + ?Sized>(
    f: &F,
    pt: &Point,
    spec: OperatorSpec,
    cfg: &GroupConfig,
) -> Result<f64> {
    let jet = f.jet(pt)?;
    match spec {
        OperatorSpec::PLaplace { p } => p_laplacian_from_jet(&jet, pt, p, cfg),
        OperatorSpec::InfinityLaplace => Ok(infinity_laplacian_from_jet(&jet, pt, cfg)),
    }
}

/// Divergence of the horizontal vector field `F = sum_i g_i X_i`:
/// `sum_i X_i g_i / sqrt(w_i)`.
pub fn divergence<F: ScalarField>(
    components: &[F],
    pt: &Point,
    cfg: &GroupConfig,
) -> Result<f64> {
    let h = cfg.horizontal_dim();
    if components.len() != h {
        return Err(CarnotError::DimensionMismatch {
            expected: h,
            got: components.len(),
        });
    }
    let mut acc = 0.0;
    for (i, g) in components.iter().enumerate() {
        let jet = g.jet(pt)?;
        acc += x_first(&jet, pt, cfg, i) / cfg.metric_weight(i).sqrt();
    }
    Ok(acc)
}
