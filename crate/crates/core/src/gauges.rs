//! Closed-form distinguished functions: the homogeneous gauge, the
//! fundamental solution of the p-Laplace equation, and the counterexample
//! norm on R^5.

use serde::Serialize;

use crate::error::{CarnotError, Result};
use crate::jets::{Jet2, ScalarField};
use crate::group::Point;
use crate::lie::{GroupConfig, MetricMode};

/// The homogeneous gauge
/// `rho = ((sum_i w_i x_i^2)^2 + 16 t^2)^(1/4)`,
/// with weights `w_i = 2|L_i'|` under the rescaled metric and `w_i = 1` in
/// orthonormal mode (the classical gauge). Degree-1 homogeneous under the
/// group dilations; singular set is the origin.
#[derive(Debug, Clone)]
pub struct GaugeRho {
    cfg: GroupConfig,
}

impl GaugeRho {
    pub fn new(cfg: GroupConfig) -> Self {
        Self { cfg }
    }

    pub fn cfg(&self) -> &GroupConfig {
        &self.cfg
    }

    fn weight(&self, i: usize) -> f64 {
        match self.cfg.metric_mode {
            MetricMode::MainAssumption => 2.0 * self.cfg.l_for(i).abs(),
            MetricMode::Orthonormal => 1.0,
        }
    }

    /// The fourth power `S^2 + 16 t^2`, a polynomial.
    fn fourth_power_value(&self, pt: &Point) -> f64 {
        let s: f64 = pt
            .x
            .iter()
            .enumerate()
            .map(|(i, &x)| self.weight(i) * x * x)
            .sum();
        s * s + 16.0 * pt.t * pt.t
    }
}

impl ScalarField for GaugeRho {
    fn value(&self, pt: &Point) -> f64 {
        self.fourth_power_value(pt).powf(0.25)
    }

    fn jet(&self, pt: &Point) -> Result<Jet2> {
        let vars = Jet2::variables(pt);
        let dim = vars.len();
        let mut s = Jet2::constant(dim, 0.0);
        for (i, v) in vars.iter().take(dim - 1).enumerate() {
            s = s.add(&v.square().scale(self.weight(i)));
        }
        let t = &vars[dim - 1];
        let rho4 = s.square().add(&t.square().scale(16.0));
        if rho4.value == 0.0 {
            return Err(CarnotError::SingularPoint);
        }
        rho4.powf(0.25)
    }
}

/// Which branch of the fundamental solution applies.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum GammaBranch {
    /// `p != Q`: `C_p rho^((p-Q)/(p-1))`.
    Power,
    /// `p = Q`: `C_p log rho`.
    Log,
}

/// The fundamental solution `Gamma_p` of the p-Laplace equation,
/// `C_p rho^((p-Q)/(p-1))` (or `C_p log rho` at `p = Q`), with the
/// normalization constant built from an externally supplied `omega_p`.
#[derive(Debug, Clone)]
pub struct FundamentalSolution {
    rho: GaugeRho,
    p: f64,
    omega_p: f64,
    c_p: f64,
    branch: GammaBranch,
}

impl FundamentalSolution {
    /// `omega_p` must come from quadrature (or a recorded estimate); it is
    /// never computed implicitly here.
    pub fn new(p: f64, cfg: GroupConfig, omega_p: f64) -> Result<Self> {
        if !(p > 1.0) || !p.is_finite() {
            return Err(CarnotError::InvalidParameter(format!(
                "p must lie in (1, inf), got {}",
                p
            )));
        }
        if !(omega_p > 0.0) {
            return Err(CarnotError::InvalidParameter(format!(
                "omega_p must be positive, got {}",
                omega_p
            )));
        }
        let q = cfg.homogeneous_dimension() as f64;
        let base = (q * omega_p).powf(-1.0 / (p - 1.0));
        let (branch, c_p) = if p == q {
            (GammaBranch::Log, base)
        } else {
            (GammaBranch::Power, (p - 1.0) / (p - q) * base)
        };
        Ok(Self {
            rho: GaugeRho::new(cfg),
            p,
            omega_p,
            c_p,
            branch,
        })
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    pub fn omega_p(&self) -> f64 {
        self.omega_p
    }

    pub fn c_p(&self) -> f64 {
        self.c_p
    }

    pub fn branch(&self) -> GammaBranch {
        self.branch
    }

    /// The gauge exponent `(p - Q)/(p - 1)` of the power branch.
    pub fn exponent(&self) -> f64 {
        let q = self.rho.cfg().homogeneous_dimension() as f64;
        (self.p - q) / (self.p - 1.0)
    }
}

impl ScalarField for FundamentalSolution {
    fn value(&self, pt: &Point) -> f64 {
        let r = self.rho.value(pt);
        match self.branch {
            GammaBranch::Power => self.c_p * r.powf(self.exponent()),
            GammaBranch::Log => self.c_p * r.ln(),
        }
    }

    fn jet(&self, pt: &Point) -> Result<Jet2> {
        let r = self.rho.jet(pt)?;
        let g = match self.branch {
            GammaBranch::Power => r.powf(self.exponent())?,
            GammaBranch::Log => r.ln()?,
        };
        Ok(g.scale(self.c_p))
    }
}

/// The unnormalized harmonicity kernel of `Gamma_p`: the plain power
/// `rho^((p-Q)/(p-1))` (or `log rho` at `p = Q`), without `C_p`.
///
/// Harmonicity checks run on this field so that the stochastic `omega_p`
/// never enters the residual.
#[derive(Debug, Clone)]
pub struct GammaKernel {
    rho: GaugeRho,
    p: f64,
}

impl GammaKernel {
    pub fn new(p: f64, cfg: GroupConfig) -> Result<Self> {
        if !(p > 1.0) || !p.is_finite() {
            return Err(CarnotError::InvalidParameter(format!(
                "p must lie in (1, inf), got {}",
                p
            )));
        }
        Ok(Self {
            rho: GaugeRho::new(cfg),
            p,
        })
    }

    pub fn exponent(&self) -> f64 {
        let q = self.rho.cfg().homogeneous_dimension() as f64;
        (self.p - q) / (self.p - 1.0)
    }

    fn is_log(&self) -> bool {
        self.p == self.rho.cfg().homogeneous_dimension() as f64
    }
}

impl ScalarField for GammaKernel {
    fn value(&self, pt: &Point) -> f64 {
        let r = self.rho.value(pt);
        if self.is_log() {
            r.ln()
        } else {
            r.powf(self.exponent())
        }
    }

    fn jet(&self, pt: &Point) -> Result<Jet2> {
        let r = self.rho.jet(pt)?;
        if self.is_log() {
            r.ln()
        } else {
            r.powf(self.exponent())
        }
    }
}

/// The two quadratic ingredients of the counterexample norm on R^5
/// (`n = 2`, `L_1 = 2 L_0`):
/// `B = |L_0| (x_0^2/2 + x_1^2 + x_2^2/2 + x_3^2)` and
/// `A = |L_0| (x_0^2 + x_1^2 + x_2^2 + x_3^2)`.
pub fn counterexample_ab(x: &[f64; 4], l1: f64) -> (f64, f64) {
    let a = l1.abs() * (x[0] * x[0] + x[1] * x[1] + x[2] * x[2] + x[3] * x[3]);
    let b = l1.abs() * (0.5 * x[0] * x[0] + x[1] * x[1] + 0.5 * x[2] * x[2] + x[3] * x[3]);
    (a, b)
}

/// The counterexample homogeneous norm
/// `N = (B^2 + t^2)^(1/8) (A - B + sqrt(B^2 + t^2))^(3/8)
///     / (B + sqrt(B^2 + t^2))^(1/8)`
/// on the group with `n = 2`, `L = (L_1, 2 L_1)`. `C N^(-4)` is fundamental
/// for the orthonormal 2-Laplacian; the constant is left symbolic, so the
/// exposed `u_2` is the bare `N^(-4)`.
#[derive(Debug, Clone)]
pub struct CounterexampleNorm {
    l1: f64,
    /// Extra power applied on top of `N` (`-4.0` gives `u_2`).
    exponent: f64,
}

impl CounterexampleNorm {
    pub fn new(l1: f64) -> Result<Self> {
        Self::with_exponent(l1, 1.0)
    }

    /// `N^e`; used with `e = -4` for the fundamental-solution check.
    pub fn with_exponent(l1: f64, exponent: f64) -> Result<Self> {
        if l1 == 0.0 || !l1.is_finite() {
            return Err(CarnotError::InvalidParameter(
                "L_1 must be finite and nonzero".into(),
            ));
        }
        Ok(Self { l1, exponent })
    }

    pub fn l1(&self) -> f64 {
        self.l1
    }

    /// The group this norm lives on: `n = 2`, `L = (L_1, 2 L_1)`, with
    /// the orthonormal metric of the original construction.
    pub fn group(&self, law: crate::lie::LawConvention) -> GroupConfig {
        GroupConfig::new(vec![self.l1, 2.0 * self.l1], MetricMode::Orthonormal, law)
            .expect("L_1 != 0 was validated")
    }

    fn xs(pt: &Point) -> [f64; 4] {
        [pt.x[0], pt.x[1], pt.x[2], pt.x[3]]
    }
}

impl ScalarField for CounterexampleNorm {
    fn value(&self, pt: &Point) -> f64 {
        let (a, b) = counterexample_ab(&Self::xs(pt), self.l1);
        let t = pt.t;
        let s = (b * b + t * t).sqrt();
        let n = (b * b + t * t).powf(0.125) * (a - b + s).powf(0.375) / (b + s).powf(0.125);
        if self.exponent == 1.0 {
            n
        } else {
            n.powf(self.exponent)
        }
    }

    fn jet(&self, pt: &Point) -> Result<Jet2> {
        if pt.is_origin() {
            return Err(CarnotError::SingularPoint);
        }
        let vars = Jet2::variables(pt);
        let w = self.l1.abs();
        let sq = |k: usize| vars[k].square();
        let a = sq(0)
            .add(&sq(1))
            .add(&sq(2))
            .add(&sq(3))
            .scale(w);
        let b = sq(0)
            .scale(0.5)
            .add(&sq(1))
            .add(&sq(2).scale(0.5))
            .add(&sq(3))
            .scale(w);
        let t = &vars[4];
        let disc = b.square().add(&t.square());
        let s = disc.sqrt()?;
        let n = disc
            .powf(0.125)?
            .mul(&a.sub(&b).add(&s).powf(0.375)?)
            .mul(&b.add(&s).powf(-0.125)?);
        if self.exponent == 1.0 {
            Ok(n)
        } else {
            n.powf(self.exponent)
        }
    }
}

/// Evaluates the counterexample ingredients at a raw coordinate tuple:
/// `(A, B, N, u_2 = N^(-4))`.
pub fn counterexample_fields(coords: &[f64; 5], l1: f64) -> Result<(f64, f64, f64, f64)> {
    let pt = Point::from_flat(coords)?;
    if pt.is_origin() {
        return Err(CarnotError::SingularPoint);
    }
    let (a, b) = counterexample_ab(&[coords[0], coords[1], coords[2], coords[3]], l1);
    let norm = CounterexampleNorm::new(l1)?;
    let n = norm.value(&pt);
    Ok((a, b, n, n.powf(-4.0)))
}
