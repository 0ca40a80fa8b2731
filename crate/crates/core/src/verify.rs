//! Verification harness: samples gauge-sphere points, evaluates operator
//! residuals against the closed-form claims, audits the group-law
//! convention, and assembles structured reports.

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{CarnotError, Result};
use crate::exec::map_indexed;
use crate::gauges::{CounterexampleNorm, GaugeRho};
use crate::group::{dilate, multiply, Point};
use crate::jets::{apply_x, left_translate, PolyField, ScalarField};
use crate::lie::{is_heisenberg_type, GroupConfig, LawConvention, MetricMode};
use crate::operators::{apply_operator, OperatorSpec};
use crate::quadrature::RNG_NAME;

/// Default tolerance for the infinity-harmonicity of the gauge.
pub const TOL_INF_RHO: f64 = 1e-8;
/// Default tolerance for p-harmonicity of the fundamental-solution kernel.
/// Looser than the gauge check: the kernel's higher powers of rho
/// accumulate more rounding.
pub const TOL_P_GAMMA: f64 = 1e-7;
/// Calibrated exceedance floor for the nonvanishing of the counterexample's
/// infinity-Laplacian on the unit gauge sphere (established by oracle scan).
pub const FLOOR_INF_N: f64 = 1e-4;
/// Default tolerance for the left-invariance audit.
pub const TOL_LEFT_INVARIANCE: f64 = 1e-9;
/// Orthogonality tolerance of the Heisenberg-type classification.
pub const TOL_HTYPE: f64 = 1e-12;

/// How a report's verdict relates `max_abs` to the tolerance.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum CheckKind {
    /// Pass iff `max_abs < tolerance`.
    NearZero,
    /// Pass iff `max_abs > tolerance` (a nonvanishing claim).
    ExceedsFloor,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Verdict {
    Pass,
    Fail,
}

/// One sampled point with its residual and the field value there.
#[derive(Debug, Clone, Serialize)]
pub struct PointResidual {
    /// Flat coordinates `[x_0, ..., x_{2n-1}, t]`.
    pub point: Vec<f64>,
    pub residual: f64,
    pub field_value: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct Summary {
    pub max_abs: f64,
    pub mean_abs: f64,
    pub count: usize,
}

impl Summary {
    pub fn from_points(points: &[PointResidual]) -> Self {
        let count = points.len();
        let max_abs = points
            .iter()
            .map(|p| p.residual.abs())
            .fold(0.0_f64, f64::max);
        let mean_abs = if count == 0 {
            0.0
        } else {
            points.iter().map(|p| p.residual.abs()).sum::<f64>() / count as f64
        };
        Self {
            max_abs,
            mean_abs,
            count,
        }
    }
}

/// Structured outcome of one verification run.
#[derive(Debug, Clone, Serialize)]
pub struct ResidualReport {
    pub check_name: String,
    pub config: GroupConfig,
    pub operator: Option<OperatorSpec>,
    pub check_kind: CheckKind,
    pub tolerance: f64,
    pub points: Vec<PointResidual>,
    pub summary: Summary,
    pub verdict: Verdict,
    pub seed: u64,
    pub rng_name: &'static str,
    /// Degenerate-gradient points excluded from the residual statistics.
    pub degenerate_skipped: usize,
    /// Named scalar diagnostics (classification residuals, calibration).
    pub diagnostics: BTreeMap<String, f64>,
}

impl ResidualReport {
    fn assemble(
        check_name: String,
        config: GroupConfig,
        operator: Option<OperatorSpec>,
        check_kind: CheckKind,
        tolerance: f64,
        points: Vec<PointResidual>,
        seed: u64,
        degenerate_skipped: usize,
        diagnostics: BTreeMap<String, f64>,
    ) -> Self {
        let summary = Summary::from_points(&points);
        let verdict = match check_kind {
            CheckKind::NearZero => {
                if summary.max_abs < tolerance && !points.is_empty() {
                    Verdict::Pass
                } else {
                    Verdict::Fail
                }
            }
            CheckKind::ExceedsFloor => {
                if summary.max_abs > tolerance {
                    Verdict::Pass
                } else {
                    Verdict::Fail
                }
            }
        };
        Self {
            check_name,
            config,
            operator,
            check_kind,
            tolerance,
            points,
            summary,
            verdict,
            seed,
            rng_name: RNG_NAME,
            degenerate_skipped,
            diagnostics,
        }
    }

    pub fn passed(&self) -> bool {
        self.verdict == Verdict::Pass
    }
}

/// Samples `count` points on the unit sphere of a degree-1 homogeneous
/// gauge: rejection into the shell `0.2 <= gauge < 1` inside the given
/// box, then dilation to gauge value 1.
pub fn sample_unit_gauge<G: ScalarField>(
    gauge: &G,
    box_half: &[f64],
    count: usize,
    seed: u64,
) -> Vec<Point> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let h = box_half.len() - 1;
    let mut out = Vec::with_capacity(count);
    while out.len() < count {
        let x: Vec<f64> = (0..h)
            .map(|i| rng.gen_range(-box_half[i]..box_half[i]))
            .collect();
        let t = rng.gen_range(-box_half[h]..box_half[h]);
        let pt = Point::new(x, t);
        let v = gauge.value(&pt);
        if (0.2..1.0).contains(&v) {
            out.push(dilate(1.0 / v, &pt).expect("positive gauge value"));
        }
    }
    out
}

fn rho_box(cfg: &GroupConfig) -> Vec<f64> {
    let h = cfg.horizontal_dim();
    let mut half: Vec<f64> = (0..h)
        .map(|i| {
            let w = match cfg.metric_mode {
                MetricMode::MainAssumption => 2.0 * cfg.l_for(i).abs(),
                MetricMode::Orthonormal => 1.0,
            };
            1.0 / w.sqrt()
        })
        .collect();
    half.push(0.25);
    half
}

fn residuals_over_points<F: ScalarField + Sync + ?Sized>(
    f: &F,
    points: Vec<Point>,
    spec: OperatorSpec,
    cfg: &GroupConfig,
) -> (Vec<PointResidual>, usize) {
    let results = map_indexed(points.len(), |i| {
        let pt = &points[i];
        match apply_operator(f, pt, spec, cfg) {
            Ok(residual) => Some(PointResidual {
                point: pt.to_flat(),
                residual,
                field_value: f.value(pt),
            }),
            Err(CarnotError::DegeneratePoint { .. }) => None,
            Err(e) => panic!("unexpected evaluation error at {:?}: {}", pt.to_flat(), e),
        }
    });
    let mut kept = Vec::with_capacity(results.len());
    let mut skipped = 0;
    for r in results {
        match r {
            Some(p) => kept.push(p),
            None => skipped += 1,
        }
    }
    (kept, skipped)
}

/// Checks that `operator(f) = 0` on `count` seeded unit-gauge points.
///
/// Points are dilated onto the gauge unit sphere so one absolute tolerance
/// is meaningful across configurations.
pub fn verify_harmonic<F: ScalarField + Sync + ?Sized>(
    f: &F,
    spec: OperatorSpec,
    cfg: &GroupConfig,
    count: usize,
    seed: u64,
    tol: f64,
) -> Result<ResidualReport> {
    if count == 0 {
        return Err(CarnotError::InvalidParameter("count must be positive".into()));
    }
    let rho = GaugeRho::new(cfg.clone());
    let points = sample_unit_gauge(&rho, &rho_box(cfg), count, seed);
    let (points, skipped) = residuals_over_points(f, points, spec, cfg);
    let name = match spec {
        OperatorSpec::PLaplace { p } => format!("harmonic:p-laplace:p={}", p),
        OperatorSpec::InfinityLaplace => "harmonic:infinity-laplace".into(),
    };
    Ok(ResidualReport::assemble(
        name,
        cfg.clone(),
        Some(spec),
        CheckKind::NearZero,
        tol,
        points,
        seed,
        skipped,
        BTreeMap::new(),
    ))
}

/// Reproduces the counterexample: on the group `n = 2`, `L = (L_1, 2 L_1)`
/// with orthonormal operators, `N^(-4)` is 2-harmonic while the
/// infinity-Laplacian of `N` does not vanish.
///
/// Both checks run on the `N = 1` sphere. The returned pair is
/// `(2-harmonicity of N^(-4), nonvanishing of the infinity-Laplacian of N)`.
pub fn verify_counterexample(
    l1: f64,
    count: usize,
    seed: u64,
) -> Result<(ResidualReport, ResidualReport)> {
    verify_counterexample_with(l1, count, seed, TOL_P_GAMMA, FLOOR_INF_N)
}

/// [`verify_counterexample`] with explicit tolerance and exceedance floor.
pub fn verify_counterexample_with(
    l1: f64,
    count: usize,
    seed: u64,
    tol_h2: f64,
    floor_hinf: f64,
) -> Result<(ResidualReport, ResidualReport)> {
    if count == 0 {
        return Err(CarnotError::InvalidParameter("count must be positive".into()));
    }
    let norm = CounterexampleNorm::new(l1)?;
    let cfg = norm.group(LawConvention::BchDerived);
    let box_half = vec![1.0; 5];
    let points = sample_unit_gauge(&norm, &box_half, count, seed);

    let u2 = CounterexampleNorm::with_exponent(l1, -4.0)?;
    let (h2_points, h2_skipped) =
        residuals_over_points(&u2, points.clone(), OperatorSpec::PLaplace { p: 2.0 }, &cfg);
    let h2 = ResidualReport::assemble(
        format!("counterexample:2-harmonic:u2:L1={}", l1),
        cfg.clone(),
        Some(OperatorSpec::PLaplace { p: 2.0 }),
        CheckKind::NearZero,
        tol_h2,
        h2_points,
        seed,
        h2_skipped,
        BTreeMap::new(),
    );

    let (hinf_points, hinf_skipped) =
        residuals_over_points(&norm, points, OperatorSpec::InfinityLaplace, &cfg);
    let mut diagnostics = BTreeMap::new();
    diagnostics.insert("exceedance_floor".into(), floor_hinf);
    let hinf = ResidualReport::assemble(
        format!("counterexample:infinity-nonzero:N:L1={}", l1),
        cfg,
        Some(OperatorSpec::InfinityLaplace),
        CheckKind::ExceedsFloor,
        floor_hinf,
        hinf_points,
        seed,
        hinf_skipped,
        diagnostics,
    );
    Ok((h2, hinf))
}

/// Audits left-invariance of the horizontal fields under the configured
/// group-law convention: for random smooth `f`, `p`, `q` the residual is
/// `X_j (f o L_p)(q) - (X_j f)(p q)`.
///
/// Passes under the BCH-derived law and fails by an O(1) margin under the
/// doubled law.
pub fn verify_left_invariance(
    cfg: &GroupConfig,
    count: usize,
    seed: u64,
    tol: f64,
) -> Result<ResidualReport> {
    if count == 0 {
        return Err(CarnotError::InvalidParameter("count must be positive".into()));
    }
    let h = cfg.horizontal_dim();
    let dim = cfg.dim();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut points = Vec::with_capacity(count);
    for _ in 0..count {
        let f = PolyField::random(&mut rng, dim, 6, 2);
        let p = Point::new(
            (0..h).map(|_| rng.gen_range(-1.0..1.0)).collect(),
            rng.gen_range(-1.0..1.0),
        );
        let q = Point::new(
            (0..h).map(|_| rng.gen_range(-1.0..1.0)).collect(),
            rng.gen_range(-1.0..1.0),
        );
        let pq = multiply(&p, &q, cfg)?;
        let translated = left_translate(&p, f.clone(), cfg);
        let mut worst = 0.0_f64;
        for j in 0..h {
            let lhs = apply_x(j, &translated, &q, cfg)?;
            let rhs = apply_x(j, &f, &pq, cfg)?;
            let r = lhs - rhs;
            if r.abs() > worst.abs() {
                worst = r;
            }
        }
        points.push(PointResidual {
            point: q.to_flat(),
            residual: worst,
            field_value: f.value(&q),
        });
    }
    Ok(ResidualReport::assemble(
        format!("left-invariance:{:?}", cfg.law_convention),
        cfg.clone(),
        None,
        CheckKind::NearZero,
        tol,
        points,
        seed,
        0,
        BTreeMap::new(),
    ))
}

/// Classifies the group under both metric modes and checks that the
/// rescaled metric makes it Heisenberg-type while the orthonormal verdict
/// matches the `|2 L_j| = 1` criterion.
pub fn verify_htype_transition(l: &[f64]) -> Result<ResidualReport> {
    let main = GroupConfig::new(
        l.to_vec(),
        MetricMode::MainAssumption,
        LawConvention::BchDerived,
    )?;
    let orth = GroupConfig::new(
        l.to_vec(),
        MetricMode::Orthonormal,
        LawConvention::BchDerived,
    )?;
    let d_main = is_heisenberg_type(&main);
    let d_orth = is_heisenberg_type(&orth);
    let criterion = l.iter().all(|lj| ((2.0 * lj).abs() - 1.0).abs() < TOL_HTYPE);

    let mut diagnostics = BTreeMap::new();
    for (k, v) in &d_main.residuals {
        diagnostics.insert(format!("main_assumption:{}", k), *v);
    }
    for (k, v) in &d_orth.residuals {
        diagnostics.insert(format!("orthonormal:{}", k), *v);
    }
    diagnostics.insert("main_assumption:is_htype".into(), d_main.is_htype as u8 as f64);
    diagnostics.insert("orthonormal:is_htype".into(), d_orth.is_htype as u8 as f64);
    diagnostics.insert("orthonormal:criterion_2l_unit".into(), criterion as u8 as f64);

    let pass = d_main.is_htype && d_orth.is_htype == criterion;
    let mut report = ResidualReport::assemble(
        format!("htype-transition:L={:?}", l),
        main,
        None,
        CheckKind::NearZero,
        TOL_HTYPE,
        vec![PointResidual {
            point: vec![],
            residual: d_main.residuals["orthogonality"],
            field_value: 0.0,
        }],
        0,
        0,
        diagnostics,
    );
    // Verdict combines the classification with the orthonormal agreement,
    // not just the residual magnitude.
    report.verdict = if pass { Verdict::Pass } else { Verdict::Fail };
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gauges::GammaKernel;

    fn cfg(l: &[f64], mode: MetricMode, law: LawConvention) -> GroupConfig {
        GroupConfig::new(l.to_vec(), mode, law).unwrap()
    }

    #[test]
    fn unit_gauge_sampling_lands_on_the_sphere() {
        let c = cfg(&[1.0, 2.0], MetricMode::MainAssumption, LawConvention::BchDerived);
        let rho = GaugeRho::new(c.clone());
        let pts = sample_unit_gauge(&rho, &rho_box(&c), 500, 1);
        assert_eq!(pts.len(), 500);
        for pt in &pts {
            assert!((rho.value(pt) - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn rho_is_infinity_harmonic_under_rescaled_metric() {
        let c = cfg(&[1.0, 2.0], MetricMode::MainAssumption, LawConvention::BchDerived);
        let rho = GaugeRho::new(c.clone());
        let report =
            verify_harmonic(&rho, OperatorSpec::InfinityLaplace, &c, 200, 7, TOL_INF_RHO).unwrap();
        assert!(report.passed(), "max residual {}", report.summary.max_abs);
    }

    #[test]
    fn gamma_kernel_is_p_harmonic() {
        let c = cfg(&[3.0], MetricMode::MainAssumption, LawConvention::BchDerived);
        let kernel = GammaKernel::new(2.0, c.clone()).unwrap();
        let report = verify_harmonic(
            &kernel,
            OperatorSpec::PLaplace { p: 2.0 },
            &c,
            200,
            11,
            TOL_P_GAMMA,
        )
        .unwrap();
        assert!(report.passed(), "max residual {}", report.summary.max_abs);
    }

    #[test]
    fn generic_field_is_not_infinity_harmonic() {
        let c = cfg(&[1.0], MetricMode::MainAssumption, LawConvention::BchDerived);
        // f = x_0 t has a nonzero infinity-Laplacian at generic points.
        let f = PolyField::new(vec![(1.0, vec![1, 0, 1])]);
        let report =
            verify_harmonic(&f, OperatorSpec::InfinityLaplace, &c, 100, 3, 1e-8).unwrap();
        assert!(!report.passed());
        assert!(report.summary.max_abs > 1e-3);
    }

    #[test]
    fn counterexample_verdicts() {
        let (h2, hinf) = verify_counterexample(1.0, 150, 5).unwrap();
        assert!(h2.passed(), "2-harmonic max {}", h2.summary.max_abs);
        assert!(hinf.passed(), "inf-laplace max {}", hinf.summary.max_abs);
        assert!(verify_counterexample(0.0, 10, 1).is_err());
    }

    #[test]
    fn left_invariance_convention_audit() {
        let bch = cfg(&[1.0], MetricMode::Orthonormal, LawConvention::BchDerived);
        let report = verify_left_invariance(&bch, 50, 2, TOL_LEFT_INVARIANCE).unwrap();
        assert!(report.passed(), "max residual {}", report.summary.max_abs);

        let doubled = cfg(&[1.0], MetricMode::Orthonormal, LawConvention::Doubled);
        let report = verify_left_invariance(&doubled, 50, 2, TOL_LEFT_INVARIANCE).unwrap();
        assert!(!report.passed());
        assert!(report.summary.max_abs > 1e-2);
    }

    #[test]
    fn htype_transition_cases() {
        assert!(verify_htype_transition(&[1.0, 2.0]).unwrap().passed());
        assert!(verify_htype_transition(&[0.5]).unwrap().passed());
        let neg = verify_htype_transition(&[-1.0, -2.0]).unwrap();
        // Negative constants: the sign-carrying matrix is still orthogonal.
        assert_eq!(neg.diagnostics["main_assumption:is_htype"], 1.0);
        assert!(neg.passed());
    }

    #[test]
    fn reports_are_deterministic_and_self_consistent() {
        let c = cfg(&[1.0, 2.0], MetricMode::MainAssumption, LawConvention::BchDerived);
        let rho = GaugeRho::new(c.clone());
        let a = verify_harmonic(&rho, OperatorSpec::InfinityLaplace, &c, 100, 9, 1e-8).unwrap();
        let b = verify_harmonic(&rho, OperatorSpec::InfinityLaplace, &c, 100, 9, 1e-8).unwrap();
        assert_eq!(a.summary.max_abs.to_bits(), b.summary.max_abs.to_bits());
        assert_eq!(a.points.len(), b.points.len());
        for (x, y) in a.points.iter().zip(&b.points) {
            assert_eq!(x.residual.to_bits(), y.residual.to_bits());
        }
        // summary recomputable from the point list
        let recomputed = Summary::from_points(&a.points);
        assert_eq!(recomputed.max_abs, a.summary.max_abs);
        assert_eq!(recomputed.mean_abs, a.summary.mean_abs);
        assert_eq!(recomputed.count, a.summary.count);
    }

    #[test]
    fn residual_homogeneity_under_dilation() {
        // Residuals of Delta_inf rho at dilate(r, pt) are r^-1 times those
        // at pt: end-to-end degree bookkeeping.
        let c = cfg(&[1.0, 2.0], MetricMode::MainAssumption, LawConvention::BchDerived);
        let rho = GaugeRho::new(c.clone());
        let pts = sample_unit_gauge(&rho, &rho_box(&c), 20, 17);
        for r in [0.5, 2.0] {
            for pt in &pts {
                let base = apply_operator(&rho, pt, OperatorSpec::InfinityLaplace, &c).unwrap();
                let scaled = apply_operator(
                    &rho,
                    &dilate(r, pt).unwrap(),
                    OperatorSpec::InfinityLaplace,
                    &c,
                )
                .unwrap();
                assert!((scaled - base / r).abs() < 1e-8 * (1.0 + (base / r).abs()));
            }
        }
    }

    #[test]
    fn cross_oracle_verdict_agreement() {
        // Recomputing a handful of points with the finite-difference jet
        // yields the same verdict.
        use crate::jets::{fd_jet, Jet2};
        struct FdField<'a, F: ScalarField>(&'a F);
        impl<F: ScalarField> ScalarField for FdField<'_, F> {
            fn value(&self, pt: &Point) -> f64 {
                self.0.value(pt)
            }
            fn jet(&self, pt: &Point) -> crate::error::Result<Jet2> {
                Ok(fd_jet(self.0, pt, None))
            }
        }

        let c = cfg(&[1.0, 2.0], MetricMode::MainAssumption, LawConvention::BchDerived);
        let rho = GaugeRho::new(c.clone());
        let pts = sample_unit_gauge(&rho, &rho_box(&c), 10, 23);
        let fd_field = FdField(&rho);
        for pt in &pts {
            let fd_res =
                apply_operator(&fd_field, pt, OperatorSpec::InfinityLaplace, &c).unwrap();
            // fd truncation is ~1e-6; the same Pass verdict needs only that scale
            assert!(fd_res.abs() < 1e-4, "fd residual {}", fd_res);
        }

        let f = PolyField::new(vec![(1.0, vec![1, 0, 0, 0, 1])]);
        let fd_field = FdField(&f);
        let mut max = 0.0_f64;
        for pt in &pts {
            let r = apply_operator(&fd_field, pt, OperatorSpec::InfinityLaplace, &c).unwrap();
            max = max.max(r.abs());
        }
        assert!(max > 1e-4, "non-harmonic field should stay non-harmonic");
    }
}
