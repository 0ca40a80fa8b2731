//! Group elements in exponential coordinates, the group law, inverses,
//! dilations, and left translation.

use crate::error::{CarnotError, Result};
use crate::lie::{GroupConfig, LawConvention};

/// A group element `(x_0, ..., x_{2n-1}, t)` in exponential coordinates.
#[derive(Debug, Clone, PartialEq)]
pub struct Point {
    pub x: Vec<f64>,
    pub t: f64,
}

impl Point {
    pub fn new(x: Vec<f64>, t: f64) -> Self {
        Self { x, t }
    }

    pub fn origin(cfg: &GroupConfig) -> Self {
        Self {
            x: vec![0.0; cfg.horizontal_dim()],
            t: 0.0,
        }
    }

    /// Builds a point from the flat coordinate vector `[x_0, ..., x_{2n-1}, t]`.
    pub fn from_flat(coords: &[f64]) -> Result<Self> {
        if coords.len() < 3 || coords.len() % 2 == 0 {
            return Err(CarnotError::DimensionMismatch {
                expected: 3,
                got: coords.len(),
            });
        }
        let (x, t) = coords.split_at(coords.len() - 1);
        Ok(Self {
            x: x.to_vec(),
            t: t[0],
        })
    }

    /// Flat coordinates `[x_0, ..., x_{2n-1}, t]`, the serialization order.
    pub fn to_flat(&self) -> Vec<f64> {
        let mut v = self.x.clone();
        v.push(self.t);
        v
    }

    pub fn is_origin(&self) -> bool {
        self.t == 0.0 && self.x.iter().all(|&c| c == 0.0)
    }

    fn check_dim(&self, cfg: &GroupConfig) -> Result<()> {
        if self.x.len() != cfg.horizontal_dim() {
            return Err(CarnotError::DimensionMismatch {
                expected: cfg.horizontal_dim(),
                got: self.x.len(),
            });
        }
        Ok(())
    }
}

/// Center factor of the group law: 1 for the BCH-derived convention, 2 for
/// the doubled one.
pub fn law_factor(cfg: &GroupConfig) -> f64 {
    match cfg.law_convention {
        LawConvention::BchDerived => 1.0,
        LawConvention::Doubled => 2.0,
    }
}

/// Group product. Horizontal coordinates add; the center picks up the
/// antisymmetric term `kappa * sum_j L_j (x_j y_{j+n} - y_j x_{j+n})`.
pub fn multiply(p: &Point, q: &Point, cfg: &GroupConfig) -> Result<Point> {
    p.check_dim(cfg)?;
    q.check_dim(cfg)?;
    let n = cfg.n();
    let kappa = law_factor(cfg);
    let x: Vec<f64> = p.x.iter().zip(&q.x).map(|(a, b)| a + b).collect();
    let mut twist = 0.0;
    for j in 0..n {
        twist += cfg.anisotropy()[j] * (p.x[j] * q.x[j + n] - q.x[j] * p.x[j + n]);
    }
    Ok(Point {
        x,
        t: p.t + q.t + kappa * twist,
    })
}

/// Group inverse `(-x, -t)`, valid in both law conventions.
pub fn inverse(p: &Point) -> Point {
    Point {
        x: p.x.iter().map(|c| -c).collect(),
        t: -p.t,
    }
}

/// Anisotropic dilation `(x, t) -> (r x, r^2 t)`, a group automorphism.
pub fn dilate(r: f64, p: &Point) -> Result<Point> {
    if !(r > 0.0) {
        return Err(CarnotError::InvalidParameter(format!(
            "dilation factor must be positive, got {}",
            r
        )));
    }
    Ok(Point {
        x: p.x.iter().map(|c| r * c).collect(),
        t: r * r * p.t,
    })
}

/// Jacobian of left translation `q -> p * q` in coordinates, as the dense
/// `(2n+1) x (2n+1)` matrix `A` with `A[i][j] = d(p*q)_i / dq_j`.
///
/// The map is affine in `q`, so `A` is constant: identity on the horizontal
/// block, with the last row carrying `kappa * c_j(x_p)` under the `t` column.
pub fn left_translation_jacobian(p: &Point, cfg: &GroupConfig) -> nalgebra::DMatrix<f64> {
    let d = cfg.dim();
    let h = cfg.horizontal_dim();
    let kappa = law_factor(cfg);
    let mut a = nalgebra::DMatrix::identity(d, d);
    for j in 0..h {
        a[(h, j)] = kappa * cfg.center_coefficient(j, &p.x);
    }
    a
}
