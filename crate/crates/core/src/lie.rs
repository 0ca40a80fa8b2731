//! Stratified Lie algebra of the anisotropic Heisenberg group: bracket
//! table, the two inner products, and the Heisenberg-type test.
//!
//! The algebra is step two with a one-dimensional center: the horizontal
//! layer is spanned by `X_0, ..., X_{2n-1}` and the center by `T`. The only
//! nonzero brackets are `[X_j, X_{j+n}] = 2 L_j T`.

use std::collections::BTreeMap;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{CarnotError, Result};

/// Which inner product the horizontal basis carries.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MetricMode {
    /// `<X_j, X_j> = 1`: the basis is declared orthonormal.
    Orthonormal,
    /// `<X_j, X_j> = 2|L_j|`: orthogonal but rescaled so the group is
    /// Heisenberg-type.
    MainAssumption,
}

/// Which convention the group law's center term uses.
///
/// Expanding the product of exponentials at step two yields the center
/// increment `sum_j L_j (x_j y_{j+n} - y_j x_{j+n})`. A common variant
/// carries an extra factor 2 on that increment; both are kept so the
/// discrepancy can be audited numerically.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum LawConvention {
    /// Center factor 1; the stated vector fields are left-invariant.
    BchDerived,
    /// Center factor 2.
    Doubled,
}

/// Full description of one anisotropic Heisenberg group.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroupConfig {
    n: usize,
    anisotropy: Vec<f64>,
    pub metric_mode: MetricMode,
    pub law_convention: LawConvention,
}

impl GroupConfig {
    pub fn new(
        anisotropy: Vec<f64>,
        metric_mode: MetricMode,
        law_convention: LawConvention,
    ) -> Result<Self> {
        if anisotropy.is_empty() {
            return Err(CarnotError::InvalidConfig("n must be at least 1".into()));
        }
        if let Some(j) = anisotropy.iter().position(|l| *l == 0.0 || !l.is_finite()) {
            return Err(CarnotError::InvalidConfig(format!(
                "anisotropy constant L_{} must be finite and nonzero",
                j
            )));
        }
        Ok(Self {
            n: anisotropy.len(),
            anisotropy,
            metric_mode,
            law_convention,
        })
    }

    /// Half the horizontal dimension.
    pub fn n(&self) -> usize {
        self.n
    }

    /// Horizontal dimension `2n`.
    pub fn horizontal_dim(&self) -> usize {
        2 * self.n
    }

    /// Full topological dimension `2n + 1`.
    pub fn dim(&self) -> usize {
        2 * self.n + 1
    }

    /// The anisotropy constants `L_0, ..., L_{n-1}`.
    pub fn anisotropy(&self) -> &[f64] {
        &self.anisotropy
    }

    /// The constant paired with horizontal index `j` in `0..2n`:
    /// `L_j` for `j < n` and `L_{j-n}` otherwise.
    pub fn l_for(&self, j: usize) -> f64 {
        debug_assert!(j < 2 * self.n);
        if j < self.n {
            self.anisotropy[j]
        } else {
            self.anisotropy[j - self.n]
        }
    }

    /// Squared norm of the basis field `X_j` under the configured metric.
    pub fn metric_weight(&self, j: usize) -> f64 {
        match self.metric_mode {
            MetricMode::Orthonormal => 1.0,
            MetricMode::MainAssumption => 2.0 * self.l_for(j).abs(),
        }
    }

    /// Coefficient of the center direction in `X_j` at horizontal
    /// coordinates `x`: `-L_j x_{j+n}` for `j < n`, `+L_{j-n} x_{j-n}` after.
    pub fn center_coefficient(&self, j: usize, x: &[f64]) -> f64 {
        if j < self.n {
            -self.anisotropy[j] * x[j + self.n]
        } else {
            self.anisotropy[j - self.n] * x[j - self.n]
        }
    }

    /// Partial derivative of `center_coefficient(j, .)` w.r.t. `x_i`.
    pub fn center_coefficient_partial(&self, i: usize, j: usize) -> f64 {
        if j < self.n {
            if i == j + self.n {
                -self.anisotropy[j]
            } else {
                0.0
            }
        } else if i == j - self.n {
            self.anisotropy[j - self.n]
        } else {
            0.0
        }
    }

    /// Homogeneous dimension `Q = 2n + 2`.
    pub fn homogeneous_dimension(&self) -> usize {
        2 * self.n + 2
    }
}

/// An element of the Lie algebra: coefficients on `X_0..X_{2n-1}` plus the
/// coefficient on the center generator `T`.
#[derive(Debug, Clone, PartialEq)]
pub struct AlgebraElement {
    pub horizontal: Vec<f64>,
    pub center: f64,
}

impl AlgebraElement {
    pub fn zero(cfg: &GroupConfig) -> Self {
        Self {
            horizontal: vec![0.0; cfg.horizontal_dim()],
            center: 0.0,
        }
    }

    /// The basis field `X_j`, `j` in `0..2n`.
    pub fn basis_horizontal(j: usize, cfg: &GroupConfig) -> Result<Self> {
        if j >= cfg.horizontal_dim() {
            return Err(CarnotError::IndexOutOfRange {
                index: j,
                dim: cfg.horizontal_dim(),
            });
        }
        let mut horizontal = vec![0.0; cfg.horizontal_dim()];
        horizontal[j] = 1.0;
        Ok(Self {
            horizontal,
            center: 0.0,
        })
    }

    /// The center generator `T`.
    pub fn basis_center(cfg: &GroupConfig) -> Self {
        Self {
            horizontal: vec![0.0; cfg.horizontal_dim()],
            center: 1.0,
        }
    }
}

/// Bracket of two horizontal basis fields: `[X_j, X_k]`.
///
/// Returns `2 L_j T` when `k = j + n`, the negation when swapped, zero
/// otherwise. Indices are zero-based.
pub fn bracket(j: usize, k: usize, cfg: &GroupConfig) -> Result<AlgebraElement> {
    let h = cfg.horizontal_dim();
    if j >= h {
        return Err(CarnotError::IndexOutOfRange { index: j, dim: h });
    }
    if k >= h {
        return Err(CarnotError::IndexOutOfRange { index: k, dim: h });
    }
    let n = cfg.n();
    let mut out = AlgebraElement::zero(cfg);
    if j < n && k == j + n {
        out.center = 2.0 * cfg.anisotropy()[j];
    } else if k < n && j == k + n {
        out.center = -2.0 * cfg.anisotropy()[k];
    }
    Ok(out)
}

/// Bracket of two general algebra elements (bilinear extension; brackets
/// with the center vanish).
pub fn bracket_elements(
    u: &AlgebraElement,
    v: &AlgebraElement,
    cfg: &GroupConfig,
) -> Result<AlgebraElement> {
    let h = cfg.horizontal_dim();
    if u.horizontal.len() != h || v.horizontal.len() != h {
        return Err(CarnotError::DimensionMismatch {
            expected: h,
            got: u.horizontal.len().max(v.horizontal.len()),
        });
    }
    let n = cfg.n();
    let mut center = 0.0;
    for j in 0..n {
        center +=
            2.0 * cfg.anisotropy()[j] * (u.horizontal[j] * v.horizontal[j + n]
                - v.horizontal[j] * u.horizontal[j + n]);
    }
    Ok(AlgebraElement {
        horizontal: vec![0.0; h],
        center,
    })
}

/// Inner product of two algebra elements under the configured metric.
///
/// In both modes the basis is orthogonal, `<T, T> = 1` and `<X_j, T> = 0`;
/// only the horizontal weights differ.
pub fn inner_product(u: &AlgebraElement, v: &AlgebraElement, cfg: &GroupConfig) -> Result<f64> {
    let h = cfg.horizontal_dim();
    if u.horizontal.len() != h || v.horizontal.len() != h {
        return Err(CarnotError::DimensionMismatch {
            expected: h,
            got: u.horizontal.len().max(v.horizontal.len()),
        });
    }
    let mut acc = u.center * v.center;
    for j in 0..h {
        acc += cfg.metric_weight(j) * u.horizontal[j] * v.horizontal[j];
    }
    Ok(acc)
}

/// Matrix of the map `J_T` on the metric-orthonormalized horizontal basis
/// `e_j = X_j / ||X_j||`, defined by `<J_T(v), w> = <T, [v, w]>`.
///
/// Column `k` holds the coordinates of `J_T(e_k)`, so entry `(j, k)` is
/// `<T, [e_k, e_j]>`. Under the rescaled metric with all `L_j > 0` this is
/// the block matrix `[[0, -I], [I, 0]]`.
pub fn jz_matrix(cfg: &GroupConfig) -> DMatrix<f64> {
    let h = cfg.horizontal_dim();
    let n = cfg.n();
    let mut m = DMatrix::zeros(h, h);
    for j in 0..n {
        let k = j + n;
        let norm_j = cfg.metric_weight(j).sqrt();
        let norm_k = cfg.metric_weight(k).sqrt();
        // <T, [e_j, e_k]> = 2 L_j / (||X_j|| ||X_k||)
        let val = 2.0 * cfg.anisotropy()[j] / (norm_j * norm_k);
        m[(k, j)] = val;
        m[(j, k)] = -val;
    }
    m
}

/// Outcome of the Heisenberg-type test with per-check residuals.
#[derive(Debug, Clone, Serialize)]
pub struct HtypeDiagnostics {
    pub is_htype: bool,
    /// Frobenius-norm deviation of each named check.
    pub residuals: BTreeMap<String, f64>,
}

/// Tests whether the configured group is of Heisenberg type.
///
/// Checks, for the unit-norm center generator: (a) `J^T J = I`,
/// (b) `J^2 = -I`, and (c) the horizontal brackets span the center.
pub fn is_heisenberg_type(cfg: &GroupConfig) -> HtypeDiagnostics {
    let h = cfg.horizontal_dim();
    let j = jz_matrix(cfg);
    let eye = DMatrix::<f64>::identity(h, h);

    let orth_residual = (j.transpose() * &j - &eye).norm();
    let square_residual = (&j * &j + &eye).norm();
    // Center is one-dimensional; the brackets span it iff some 2L_j != 0.
    let max_bracket = cfg
        .anisotropy()
        .iter()
        .map(|l| 2.0 * l.abs())
        .fold(0.0_f64, f64::max);
    let span_residual = if max_bracket > 0.0 { 0.0 } else { 1.0 };

    let tol = 1e-12;
    let mut residuals = BTreeMap::new();
    residuals.insert("orthogonality".into(), orth_residual);
    residuals.insert("square_minus_identity".into(), square_residual);
    residuals.insert("center_span".into(), span_residual);

    HtypeDiagnostics {
        is_htype: orth_residual < tol && square_residual < tol && span_residual < tol,
        residuals,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn cfg(l: &[f64], mode: MetricMode) -> GroupConfig {
        GroupConfig::new(l.to_vec(), mode, LawConvention::BchDerived).unwrap()
    }

    #[test]
    fn rejects_zero_anisotropy() {
        assert!(GroupConfig::new(
            vec![0.0, 1.0],
            MetricMode::Orthonormal,
            LawConvention::BchDerived
        )
        .is_err());
        assert!(GroupConfig::new(
            vec![],
            MetricMode::Orthonormal,
            LawConvention::BchDerived
        )
        .is_err());
    }

    #[test]
    fn bracket_table() {
        let c = cfg(&[1.0, 2.0], MetricMode::Orthonormal);
        // [X_0, X_2] = 2 L_0 T
        let b = bracket(0, 2, &c).unwrap();
        assert_eq!(b.center, 2.0);
        assert!(b.horizontal.iter().all(|&v| v == 0.0));
        // non-paired indices commute
        assert_eq!(bracket(0, 1, &c).unwrap().center, 0.0);
        // antisymmetry
        assert_eq!(bracket(2, 0, &c).unwrap().center, -2.0);
        // second pair carries L_1
        assert_eq!(bracket(1, 3, &c).unwrap().center, 4.0);
        assert!(bracket(0, 4, &c).is_err());
    }

    #[test]
    fn bracket_antisymmetric_everywhere() {
        let c = cfg(&[1.0, -2.0, 0.5], MetricMode::MainAssumption);
        for j in 0..6 {
            for k in 0..6 {
                let a = bracket(j, k, &c).unwrap();
                let b = bracket(k, j, &c).unwrap();
                assert_eq!(a.center, -b.center);
            }
        }
    }

    #[test]
    fn center_is_central() {
        let c = cfg(&[1.0, 2.0], MetricMode::Orthonormal);
        let t = AlgebraElement::basis_center(&c);
        for j in 0..4 {
            let x = AlgebraElement::basis_horizontal(j, &c).unwrap();
            let b = bracket_elements(&x, &t, &c).unwrap();
            assert_eq!(b.center, 0.0);
        }
    }

    #[test]
    fn inner_product_modes() {
        let main = cfg(&[2.0], MetricMode::MainAssumption);
        let x1 = AlgebraElement::basis_horizontal(0, &main).unwrap();
        assert_eq!(inner_product(&x1, &x1, &main).unwrap(), 4.0);

        let ortho = cfg(&[2.0], MetricMode::Orthonormal);
        assert_eq!(inner_product(&x1, &x1, &ortho).unwrap(), 1.0);

        let t = AlgebraElement::basis_center(&main);
        assert_eq!(inner_product(&x1, &t, &main).unwrap(), 0.0);
        assert_eq!(inner_product(&x1, &t, &ortho).unwrap(), 0.0);
        assert_eq!(inner_product(&t, &t, &main).unwrap(), 1.0);
    }

    #[test]
    fn jz_matrix_examples() {
        // n=1, L=(1), rescaled metric
        let m = jz_matrix(&cfg(&[1.0], MetricMode::MainAssumption));
        assert_relative_eq!(m[(0, 1)], -1.0);
        assert_relative_eq!(m[(1, 0)], 1.0);
        assert_eq!(m[(0, 0)], 0.0);

        // n=1, L=(1/2), orthonormal: 2 L_0 = 1
        let m = jz_matrix(&cfg(&[0.5], MetricMode::Orthonormal));
        assert_relative_eq!(m[(0, 1)], -1.0);
        assert_relative_eq!(m[(1, 0)], 1.0);

        // n=1, L=(3), orthonormal: 2 L_0 = 6
        let m = jz_matrix(&cfg(&[3.0], MetricMode::Orthonormal));
        assert_relative_eq!(m[(0, 1)], -6.0);
        assert_relative_eq!(m[(1, 0)], 6.0);
    }

    #[test]
    fn jz_matrix_antisymmetric() {
        for l in [[1.0, 2.0], [0.5, -3.0], [-1.0, -2.0]] {
            for mode in [MetricMode::Orthonormal, MetricMode::MainAssumption] {
                let m = jz_matrix(&cfg(&l, mode));
                assert!((m.transpose() + &m).norm() < 1e-15);
            }
        }
    }

    #[test]
    fn htype_classification() {
        // Rescaled metric: always H-type, any sign pattern.
        for l in [vec![1.0], vec![1.0, 2.0], vec![3.0, -2.0], vec![1.0, 0.5, 3.0]] {
            let d = is_heisenberg_type(&cfg(&l, MetricMode::MainAssumption));
            assert!(d.is_htype, "L = {:?}", l);
            assert!(d.residuals["orthogonality"] < 1e-12);
        }
        // Orthonormal: H-type iff all |2 L_j| = 1.
        assert!(!is_heisenberg_type(&cfg(&[1.0, 2.0], MetricMode::Orthonormal)).is_htype);
        assert!(is_heisenberg_type(&cfg(&[0.5], MetricMode::Orthonormal)).is_htype);
        assert!(is_heisenberg_type(&cfg(&[-0.5, 0.5], MetricMode::Orthonormal)).is_htype);
        assert!(!is_heisenberg_type(&cfg(&[0.6], MetricMode::Orthonormal)).is_htype);
    }

    #[test]
    fn orthonormal_htype_criterion_over_grid() {
        for i in 1..20 {
            let l = 0.1 * i as f64;
            let d = is_heisenberg_type(&cfg(&[l], MetricMode::Orthonormal));
            assert_eq!(d.is_htype, (2.0 * l - 1.0).abs() < 1e-12, "L = {}", l);
        }
    }

    #[test]
    fn homogeneous_dimension_formula() {
        assert_eq!(cfg(&[1.0], MetricMode::Orthonormal).homogeneous_dimension(), 4);
        assert_eq!(cfg(&[1.0, 2.0], MetricMode::Orthonormal).homogeneous_dimension(), 6);
        let ten = vec![1.0; 10];
        assert_eq!(cfg(&ten, MetricMode::Orthonormal).homogeneous_dimension(), 22);
    }
}
