//! Exact second-order forward-mode differentiation.
//!
//! A [`Jet2`] carries a value together with all first and second coordinate
//! partials at a point. Arithmetic on jets propagates derivatives through
//! the chain rule, so any scalar field built from the primitives below has
//! an exact gradient and Hessian (up to rounding) with no step-size tuning.
//!
//! The horizontal vector fields `X_j` and their compositions `X_i X_j` are
//! read off a single jet via [`x_first`] and [`x_second`]. An independent
//! central-difference oracle ([`fd_jet`]) backs the test suite.

use nalgebra::{DMatrix, DVector};

use crate::error::{CarnotError, Result};
use crate::group::{left_translation_jacobian, multiply, Point};
use crate::lie::GroupConfig;

/// Value, gradient, and symmetric Hessian of a scalar field at a point,
/// in coordinate order `(x_0, ..., x_{2n-1}, t)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Jet2 {
    pub value: f64,
    pub grad: DVector<f64>,
    pub hess: DMatrix<f64>,
}

impl Jet2 {
    pub fn constant(dim: usize, value: f64) -> Self {
        Self {
            value,
            grad: DVector::zeros(dim),
            hess: DMatrix::zeros(dim, dim),
        }
    }

    /// The coordinate function of variable `k`, seeded for differentiation.
    pub fn variable(dim: usize, k: usize, value: f64) -> Self {
        let mut j = Self::constant(dim, value);
        j.grad[k] = 1.0;
        j
    }

    /// All coordinate jets of a point at once.
    pub fn variables(pt: &Point) -> Vec<Jet2> {
        let flat = pt.to_flat();
        let dim = flat.len();
        flat.iter()
            .enumerate()
            .map(|(k, &v)| Jet2::variable(dim, k, v))
            .collect()
    }

    pub fn dim(&self) -> usize {
        self.grad.len()
    }

    pub fn add(&self, rhs: &Jet2) -> Jet2 {
        Jet2 {
            value: self.value + rhs.value,
            grad: &self.grad + &rhs.grad,
            hess: &self.hess + &rhs.hess,
        }
    }

    pub fn sub(&self, rhs: &Jet2) -> Jet2 {
        Jet2 {
            value: self.value - rhs.value,
            grad: &self.grad - &rhs.grad,
            hess: &self.hess - &rhs.hess,
        }
    }

    pub fn scale(&self, c: f64) -> Jet2 {
        Jet2 {
            value: c * self.value,
            grad: c * &self.grad,
            hess: c * &self.hess,
        }
    }

    pub fn add_scalar(&self, c: f64) -> Jet2 {
        Jet2 {
            value: self.value + c,
            grad: self.grad.clone(),
            hess: self.hess.clone(),
        }
    }

    pub fn mul(&self, rhs: &Jet2) -> Jet2 {
        let cross = &self.grad * rhs.grad.transpose();
        Jet2 {
            value: self.value * rhs.value,
            grad: rhs.value * &self.grad + self.value * &rhs.grad,
            hess: rhs.value * &self.hess
                + self.value * &rhs.hess
                + &cross
                + cross.transpose(),
        }
    }

    /// Chain rule for a smooth `g` applied to this jet, given `g(v)`,
    /// `g'(v)` and `g''(v)`.
    fn compose(&self, g: f64, dg: f64, ddg: f64) -> Jet2 {
        Jet2 {
            value: g,
            grad: dg * &self.grad,
            hess: dg * &self.hess + ddg * (&self.grad * self.grad.transpose()),
        }
    }

    pub fn square(&self) -> Jet2 {
        self.mul(self)
    }

    pub fn recip(&self) -> Result<Jet2> {
        if self.value == 0.0 {
            return Err(CarnotError::Domain("reciprocal of zero".into()));
        }
        let v = 1.0 / self.value;
        Ok(self.compose(v, -v * v, 2.0 * v * v * v))
    }

    pub fn div(&self, rhs: &Jet2) -> Result<Jet2> {
        Ok(self.mul(&rhs.recip()?))
    }

    pub fn sqrt(&self) -> Result<Jet2> {
        if self.value <= 0.0 {
            return Err(CarnotError::Domain(format!(
                "sqrt of non-positive value {}",
                self.value
            )));
        }
        let s = self.value.sqrt();
        Ok(self.compose(s, 0.5 / s, -0.25 / (s * self.value)))
    }

    pub fn ln(&self) -> Result<Jet2> {
        if self.value <= 0.0 {
            return Err(CarnotError::Domain(format!(
                "log of non-positive value {}",
                self.value
            )));
        }
        let v = self.value;
        Ok(self.compose(v.ln(), 1.0 / v, -1.0 / (v * v)))
    }

    /// Real power with arbitrary exponent; requires a positive base.
    pub fn powf(&self, e: f64) -> Result<Jet2> {
        if self.value <= 0.0 {
            return Err(CarnotError::Domain(format!(
                "power {} of non-positive base {}",
                e, self.value
            )));
        }
        let v = self.value;
        let g = v.powf(e);
        Ok(self.compose(g, e * g / v, e * (e - 1.0) * g / (v * v)))
    }

    /// Integer power, defined for any base.
    pub fn powi(&self, e: u32) -> Jet2 {
        match e {
            0 => Jet2::constant(self.dim(), 1.0),
            1 => self.clone(),
            _ => {
                let v = self.value;
                let g = v.powi(e as i32);
                let dg = e as f64 * v.powi(e as i32 - 1);
                let ddg = (e * (e - 1)) as f64 * v.powi(e as i32 - 2);
                self.compose(g, dg, ddg)
            }
        }
    }
}

/// A smooth scalar function on the group, evaluated through jets.
///
/// Implementations must be pure: the harness evaluates one field at many
/// points concurrently.
pub trait ScalarField: Sync {
    /// Plain value; defined even where jets are not (e.g. the gauge at the
    /// origin).
    fn value(&self, pt: &Point) -> f64;

    /// Full second-order jet. Errs inside the field's declared singular set.
    fn jet(&self, pt: &Point) -> Result<Jet2>;
}

impl<F: ScalarField + ?Sized> ScalarField for &F {
    fn value(&self, pt: &Point) -> f64 {
        (**self).value(pt)
    }
    fn jet(&self, pt: &Point) -> Result<Jet2> {
        (**self).jet(pt)
    }
}

/// Evaluates the full jet of `f` at `p`.
pub fn eval_jet<F: ScalarField + ?Sized>(f: &F, p: &Point) -> Result<Jet2> {
    f.jet(p)
}

/// Applies the left-invariant field `X_j` to a jet already evaluated at
/// `pt`: `X_j f = d_{x_j} f + c_j(x) d_t f`.
pub fn x_first(jet: &Jet2, pt: &Point, cfg: &GroupConfig, j: usize) -> f64 {
    let t = cfg.horizontal_dim();
    jet.grad[j] + cfg.center_coefficient(j, &pt.x) * jet.grad[t]
}

/// Applies the composition `X_i (X_j f)` from a single jet at `pt`.
///
/// Expanding the coordinate-dependent coefficients (which do not depend
/// on `t`) gives
/// `X_i X_j f = d_i d_j f + (d_i c_j) d_t f + c_j d_i d_t f
///            + c_i d_j d_t f + c_i c_j d_t d_t f`.
pub fn x_second(jet: &Jet2, pt: &Point, cfg: &GroupConfig, i: usize, j: usize) -> f64 {
    let t = cfg.horizontal_dim();
    let ci = cfg.center_coefficient(i, &pt.x);
    let cj = cfg.center_coefficient(j, &pt.x);
    jet.hess[(i, j)]
        + cfg.center_coefficient_partial(i, j) * jet.grad[t]
        + cj * jet.hess[(i, t)]
        + ci * jet.hess[(j, t)]
        + ci * cj * jet.hess[(t, t)]
}

/// Convenience wrapper: `X_j f` at `p`, evaluating the jet internally.
pub fn apply_x<F: ScalarField + ?Sized>(
    j: usize,
    f: &F,
    p: &Point,
    cfg: &GroupConfig,
) -> Result<f64> {
    check_index(j, cfg)?;
    Ok(x_first(&f.jet(p)?, p, cfg, j))
}

/// Convenience wrapper: `X_i X_j f` at `p`.
pub fn apply_xx<F: ScalarField + ?Sized>(
    i: usize,
    j: usize,
    f: &F,
    p: &Point,
    cfg: &GroupConfig,
) -> Result<f64> {
    check_index(i, cfg)?;
    check_index(j, cfg)?;
    Ok(x_second(&f.jet(p)?, p, cfg, i, j))
}

fn check_index(j: usize, cfg: &GroupConfig) -> Result<()> {
    if j >= cfg.horizontal_dim() {
        return Err(CarnotError::IndexOutOfRange {
            index: j,
            dim: cfg.horizontal_dim(),
        });
    }
    Ok(())
}

/// The default central-difference step for coordinate `c`:
/// `eps^(1/3) * max(1, |c|)`.
pub fn fd_default_step(coord: f64) -> f64 {
    f64::EPSILON.cbrt() * coord.abs().max(1.0)
}

/// Independent finite-difference jet: central differences on the plain
/// values of `f`, error `O(h^2)`. Used to cross-check the forward-mode
/// path; never part of it.
///
/// `step` overrides the per-coordinate default when `Some`.
pub fn fd_jet<F: ScalarField + ?Sized>(f: &F, p: &Point, step: Option<f64>) -> Jet2 {
    let flat = p.to_flat();
    let dim = flat.len();
    let h: Vec<f64> = flat
        .iter()
        .map(|&c| step.unwrap_or_else(|| fd_default_step(c)))
        .collect();

    let at = |coords: &[f64]| f.value(&Point::from_flat(coords).expect("valid stencil point"));
    let f0 = at(&flat);

    let mut grad = DVector::zeros(dim);
    let mut hess = DMatrix::zeros(dim, dim);
    for a in 0..dim {
        let mut up = flat.clone();
        let mut dn = flat.clone();
        up[a] += h[a];
        dn[a] -= h[a];
        let fu = at(&up);
        let fd = at(&dn);
        grad[a] = (fu - fd) / (2.0 * h[a]);
        hess[(a, a)] = (fu - 2.0 * f0 + fd) / (h[a] * h[a]);
    }
    for a in 0..dim {
        for b in (a + 1)..dim {
            let mut pp = flat.clone();
            let mut pm = flat.clone();
            let mut mp = flat.clone();
            let mut mm = flat.clone();
            pp[a] += h[a];
            pp[b] += h[b];
            pm[a] += h[a];
            pm[b] -= h[b];
            mp[a] -= h[a];
            mp[b] += h[b];
            mm[a] -= h[a];
            mm[b] -= h[b];
            let v = (at(&pp) - at(&pm) - at(&mp) + at(&mm)) / (4.0 * h[a] * h[b]);
            hess[(a, b)] = v;
            hess[(b, a)] = v;
        }
    }

    Jet2 {
        value: f0,
        grad,
        hess,
    }
}

/// A field precomposed with an affine coordinate map `q -> A q + b`,
/// evaluated by pulling derivatives back through the constant Jacobian.
pub struct AffinePullback<F> {
    inner: F,
    map: Box<dyn Fn(&Point) -> Point + Sync>,
    jacobian: DMatrix<f64>,
}

impl<F: ScalarField> ScalarField for AffinePullback<F> {
    fn value(&self, pt: &Point) -> f64 {
        self.inner.value(&(self.map)(pt))
    }

    fn jet(&self, pt: &Point) -> Result<Jet2> {
        let inner_jet = self.inner.jet(&(self.map)(pt))?;
        let a = &self.jacobian;
        Ok(Jet2 {
            value: inner_jet.value,
            grad: a.transpose() * &inner_jet.grad,
            hess: a.transpose() * &inner_jet.hess * a,
        })
    }
}

/// Left translation of a field: `q -> f(p * q)`.
///
/// The group law is affine in `q`, so the pullback Jacobian is constant.
pub fn left_translate<F: ScalarField>(
    p: &Point,
    f: F,
    cfg: &GroupConfig,
) -> AffinePullback<F> {
    let jacobian = left_translation_jacobian(p, cfg);
    let p = p.clone();
    let cfg = cfg.clone();
    AffinePullback {
        inner: f,
        map: Box::new(move |q| multiply(&p, q, &cfg).expect("matching dimensions")),
        jacobian,
    }
}

/// A polynomial in the flat coordinates, as a sum of monomial terms.
/// Mostly a test vehicle: random instances drive the invariance checks.
#[derive(Debug, Clone)]
pub struct PolyField {
    /// (coefficient, exponent per coordinate)
    pub terms: Vec<(f64, Vec<u32>)>,
}

impl PolyField {
    pub fn new(terms: Vec<(f64, Vec<u32>)>) -> Self {
        Self { terms }
    }

    /// The coordinate function of variable `k` in dimension `dim`.
    pub fn coordinate(dim: usize, k: usize) -> Self {
        let mut exps = vec![0u32; dim];
        exps[k] = 1;
        Self {
            terms: vec![(1.0, exps)],
        }
    }

    /// A random polynomial with per-variable degree at most `max_deg`.
    pub fn random<R: rand::Rng>(rng: &mut R, dim: usize, n_terms: usize, max_deg: u32) -> Self {
        let terms = (0..n_terms)
            .map(|_| {
                let coef = rng.gen_range(-1.0..1.0);
                let exps = (0..dim).map(|_| rng.gen_range(0..=max_deg)).collect();
                (coef, exps)
            })
            .collect();
        Self { terms }
    }
}

impl ScalarField for PolyField {
    fn value(&self, pt: &Point) -> f64 {
        let flat = pt.to_flat();
        self.terms
            .iter()
            .map(|(c, exps)| {
                c * exps
                    .iter()
                    .zip(&flat)
                    .map(|(&e, &v)| v.powi(e as i32))
                    .product::<f64>()
            })
            .sum()
    }

    fn jet(&self, pt: &Point) -> Result<Jet2> {
        let vars = Jet2::variables(pt);
        let dim = vars.len();
        let mut acc = Jet2::constant(dim, 0.0);
        for (c, exps) in &self.terms {
            let mut term = Jet2::constant(dim, *c);
            for (k, &e) in exps.iter().enumerate() {
                if e > 0 {
                    term = term.mul(&vars[k].powi(e));
                }
            }
            acc = acc.add(&term);
        }
        Ok(acc)
    }
}
