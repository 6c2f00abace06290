use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::{Arc, OnceLock};

use magicint::analysis::{explicit_constant, BernsteinEllipse, BoundSpec};
use magicint::family::sample_box;
use magicint::linalg::transpose_backward_substitution;
use magicint::models::{
    test_family_exp, CgmyFamily, CgmyFamilySpec, PolynomialFamily, ScaledSineFamily, StftFamily,
    StftFamilySpec,
};
use magicint::quadrature::{integrate_complex, DEFAULT_MAX_EVALS};
use magicint::{
    train, DiscreteDomain, EimError, FnFamily, Interval, MagicModel, ParameterCloud, ParametricFamily,
    QuadConfig, StopReason, TrainConfig, TrainingReport, ValueKind,
};
use num_complex::Complex64;

fn iv(lo: f64, hi: f64) -> Interval {
    Interval::new(lo, hi).unwrap()
}

fn c(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

/// Direct adaptive integral of `h_p` over the family domain.
fn oracle_integral<F: ParametricFamily>(fam: &F, p: &[f64], tol: f64) -> Complex64 {
    let d = fam.domain();
    integrate_complex(|z| fam.eval(p, z), d.lo, d.hi, tol, 0.0, DEFAULT_MAX_EVALS)
        .unwrap()
        .value
}

/// `θ_m` on the training grid from the stored basis: `θ(z) = B^{-T} q(z)`.
fn theta_on_grid(model: &MagicModel) -> Vec<Vec<Complex64>> {
    let m = model.size();
    let basis = model.parts().basis_grid.as_ref().unwrap();
    (0..model.grid().len())
        .map(|k| {
            let q: Vec<Complex64> = (0..m).map(|j| basis[j][k]).collect();
            transpose_backward_substitution(model.b_matrix(), m, &q)
        })
        .collect()
}

/// Structural invariants every trained model must satisfy.
fn check_invariants<F: ParametricFamily>(model: &MagicModel, fam: &F, test_params: &[Vec<f64>]) {
    let m = model.size();
    let sc = model.structure_check();
    assert!(sc.is_unit_lower_triangular(1e-12), "{sc:?}");
    assert!(sc.max_entry <= 1.0 + 1e-10, "{sc:?}");
    for j in 0..m {
        assert_eq!(model.b_matrix()[j * m + j], c(1.0));
    }

    let pts = model.magic_points();
    for a in 0..m {
        for b in a + 1..m {
            assert_ne!(pts[a].index, pts[b].index);
            assert_ne!(model.magic_params()[a], model.magic_params()[b]);
        }
    }

    let basis = model.parts().basis_grid.as_ref().unwrap();
    for (q, mp) in basis.iter().zip(pts) {
        let top = q.iter().map(|v| v.norm()).fold(0.0, f64::max);
        assert!(top <= 1.0 + 1e-12);
        assert_eq!(q[mp.index], c(1.0));
    }

    let zs: Vec<f64> = pts.iter().map(|mp| mp.z).collect();
    for p in test_params {
        let v = model.interpolate(fam, p, &zs).unwrap();
        for (z, iv) in zs.iter().zip(&v) {
            let h = fam.eval(p, *z);
            assert!(
                (iv - h).norm() <= 1e-12 * h.norm().max(1.0),
                "identity at z = {z}"
            );
        }
    }

    for p in model.magic_params() {
        let v = model.interpolate(fam, p, model.grid()).unwrap();
        let mut sup = 0.0f64;
        let mut err = 0.0f64;
        for (z, iv) in model.grid().iter().zip(&v) {
            let h = fam.eval(p, *z);
            sup = sup.max(h.norm());
            err = err.max((iv - h).norm());
        }
        assert!(err <= 1e-10 * sup, "snapshot reproduction {err:e} vs sup {sup:e}");
    }
}

struct CgmyCase {
    fam: CgmyFamily,
    spec: CgmyFamilySpec,
    report: TrainingReport,
    model: MagicModel,
}

/// The reference CGMY model: cloud 4000 (seed 1), grid 1500, tol 1e-12.
fn cgmy() -> &'static CgmyCase {
    static CASE: OnceLock<CgmyCase> = OnceLock::new();
    CASE.get_or_init(|| {
        let spec = CgmyFamilySpec::reference();
        let fam = CgmyFamily::from_spec(&spec);
        let cloud = ParameterCloud::sample_uniform(&spec.bounds, 4000, 1).unwrap();
        let grid = DiscreteDomain::uniform(fam.domain(), 1500).unwrap();
        let report = train(&fam, &cloud, &grid, &TrainConfig::new(Some(1e-12), 100)).unwrap();
        let rule = report
            .model
            .compute_quadrature(&fam, &QuadConfig::new(1e-13))
            .unwrap();
        let model = report.model.clone().with_quadrature(rule).unwrap();
        CgmyCase {
            fam,
            spec,
            report,
            model,
        }
    })
}

#[test]
fn rank_one_sine_family() {
    let fam = ScaledSineFamily {
        omega: iv(0.0, std::f64::consts::PI),
    };
    let cloud = ParameterCloud::from_samples(&[iv(1.0, 3.0)], vec![vec![1.0], vec![2.0], vec![3.0]]).unwrap();
    let grid = DiscreteDomain::uniform(fam.omega, 100).unwrap();
    let rep = train(&fam, &cloud, &grid, &TrainConfig::new(Some(1e-12), 10)).unwrap();
    assert_eq!(rep.model.size(), 1);
    assert!(rep.residual_curve.last().unwrap().1 <= 1e-15);
    assert_eq!(rep.model.magic_params()[0], vec![3.0]);
    check_invariants(&rep.model, &fam, &[vec![1.5], vec![2.5]]);

    // w_1 = ∫ sin / sin(z*_1).
    let w = rep.model.quad_weights(&fam, &QuadConfig::new(1e-14)).unwrap();
    let z1 = rep.model.magic_points()[0].z;
    assert!((w[0] - c(2.0 / z1.sin())).norm() <= 1e-13);
}

#[test]
fn rank_one_weight_on_symmetric_grid() {
    let fam = ScaledSineFamily {
        omega: iv(0.0, std::f64::consts::PI),
    };
    let cloud = ParameterCloud::from_samples(&[iv(1.0, 3.0)], vec![vec![1.0], vec![2.0], vec![3.0]]).unwrap();
    // 101 points put π/2 on the grid.
    let grid = DiscreteDomain::uniform(fam.omega, 101).unwrap();
    let rep = train(&fam, &cloud, &grid, &TrainConfig::new(Some(1e-12), 10)).unwrap();
    assert_eq!(rep.model.magic_points()[0].index, 50);
    let w = rep.model.quad_weights(&fam, &QuadConfig::new(1e-14)).unwrap();
    assert!((w[0] - c(2.0)).norm() <= 1e-13);
}

#[test]
fn constant_family_weight_and_integral() {
    let fam = FnFamily::new("const", 1, iv(0.0, 2.0), ValueKind::Real, |p: &[f64], _z| c(p[0]));
    let cloud = ParameterCloud::sample_uniform(&[iv(1.0, 4.0)], 20, 3).unwrap();
    let grid = DiscreteDomain::uniform(iv(0.0, 2.0), 50).unwrap();
    let rep = train(&fam, &cloud, &grid, &TrainConfig::new(Some(1e-12), 5)).unwrap();
    assert_eq!(rep.model.size(), 1);
    let w = rep.model.quad_weights(&fam, &QuadConfig::new(1e-14)).unwrap();
    assert!((w[0] - c(2.0)).norm() <= 1e-14);
    let v = rep.model.integrate(&w, &fam, &[5.0]).unwrap();
    assert!((v - c(10.0)).norm() <= 1e-13);

    let beta = rep.model.snapshot_coefficients();
    let p1 = rep.model.magic_params()[0][0];
    assert!((beta[0][0] - c(1.0 / p1)).norm() <= 1e-15);
}

#[test]
fn single_basis_beta_is_inverse_pivot() {
    let fam = ScaledSineFamily { omega: iv(0.0, 3.0) };
    let cloud = ParameterCloud::from_samples(&[iv(0.5, 2.0)], vec![vec![0.5], vec![2.0]]).unwrap();
    let grid = DiscreteDomain::uniform(fam.omega, 80).unwrap();
    let rep = train(&fam, &cloud, &grid, &TrainConfig::new(Some(1e-12), 4)).unwrap();
    assert_eq!(rep.model.size(), 1);
    let h = fam.eval(&rep.model.magic_params()[0], rep.model.magic_points()[0].z);
    let beta = rep.model.snapshot_coefficients();
    assert!((beta[0][0] - 1.0 / h).norm() <= 1e-15);
}

#[test]
fn rank_two_polynomial_beta_reconstruction() {
    let fam = PolynomialFamily {
        terms: 2,
        omega: iv(-1.0, 1.0),
    };
    let bounds = [iv(-1.0, 1.0), iv(-1.0, 1.0)];
    let cloud = ParameterCloud::sample_uniform(&bounds, 40, 5).unwrap();
    let grid = DiscreteDomain::uniform(fam.omega, 101).unwrap();
    let rep = train(&fam, &cloud, &grid, &TrainConfig::new(None, 10)).unwrap();
    let model = rep.model;
    assert_eq!(model.size(), 2);
    assert_eq!(rep.stop_reason, StopReason::FamilyExhausted);

    let beta = model.snapshot_coefficients();
    let (z1, z2) = (model.magic_points()[0].z, model.magic_points()[1].z);
    for &z in model.grid() {
        let snaps: Vec<Complex64> = model.magic_params().iter().map(|p| fam.eval(p, z)).collect();
        // θ_1, θ_2 are the linear Lagrange polynomials on the magic points.
        let lagrange = [(z - z2) / (z1 - z2), (z - z1) / (z2 - z1)];
        for (row, exact) in beta.iter().zip(lagrange) {
            let r: Complex64 = row.iter().zip(&snaps).map(|(b, h)| b * h).sum();
            assert!((r - c(exact)).norm() <= 1e-12, "z = {z}");
        }
    }
}

#[test]
fn polynomial_family_exhausts_at_rank() {
    for r in [1usize, 3, 4, 6] {
        let fam = PolynomialFamily {
            terms: r,
            omega: iv(-1.0, 1.0),
        };
        let bounds = vec![iv(-1.0, 1.0); r];
        let cloud = ParameterCloud::sample_uniform(&bounds, 200, 11).unwrap();
        let grid = DiscreteDomain::chebyshev(fam.omega, 300).unwrap();
        let rep = train(&fam, &cloud, &grid, &TrainConfig::new(None, 30)).unwrap();
        assert!(rep.model.size() <= r, "r = {r}: M = {}", rep.model.size());
        assert_eq!(rep.stop_reason, StopReason::FamilyExhausted);
        let tests = sample_box(&bounds, 5, 99).unwrap();
        check_invariants(&rep.model, &fam, &tests);
    }
}

#[test]
fn exp_family_residual_below_bound() {
    let fam = test_family_exp(iv(0.0, 1.0), iv(-1.0, 1.0));
    let samples: Vec<Vec<f64>> = (0..50).map(|k| vec![k as f64 / 49.0]).collect();
    let cloud = ParameterCloud::from_samples(&[fam.p_range], samples).unwrap();
    let grid = DiscreteDomain::chebyshev(fam.omega, 200).unwrap();
    let rep = train(&fam, &cloud, &grid, &TrainConfig::new(Some(1e-13), 30)).unwrap();

    let rho = 8.0;
    let ellipse = BernsteinEllipse::new(fam.omega, rho).unwrap();
    // sup over p ∈ [0,1] and the ellipse of |e^{pz}| is e^{a}, a the semimajor.
    let sup_f1 = ellipse.sup_on_boundary(|z| z.re.max(0.0).exp(), 20_000);
    assert!((sup_f1 - 4.0625f64.exp()).abs() <= 1e-9 * sup_f1);
    let cst = explicit_constant(rho, sup_f1, 1.0);
    assert!((cst - 8.0 / 14.0 * 4.0625f64.exp()).abs() <= 1e-9);
    let spec = BoundSpec::new(rho, cst, 2.0).unwrap();
    for &(m, r) in &rep.residual_curve {
        assert!(r > 0.0);
        assert!(r <= spec.interpolation_bound(m), "M = {m}: {r:e}");
    }
    assert!(rep.model.size() <= 16);
    check_invariants(&rep.model, &fam, &[vec![0.13], vec![0.77]]);

    let rule = rep
        .model
        .compute_quadrature(&fam, &QuadConfig::new(1e-14))
        .unwrap();
    let v = rep.model.integrate(&rule.weights, &fam, &[0.5]).unwrap();
    let exact = (0.5f64.exp() - (-0.5f64).exp()) / 0.5;
    assert!((v - c(exact)).norm() <= 1e-12, "{v}");
}

fn stft_model() -> (StftFamily, MagicModel) {
    let spec = StftFamilySpec::new(
        Arc::new(|t: f64| 1.0 / (1.0 + t * t)),
        iv(0.5, 1.0),
        iv(-1.0, 1.0),
        iv(0.0, 4.0),
    )
    .unwrap();
    let bounds = spec.bounds();
    let fam = StftFamily::new(spec);
    let cloud = ParameterCloud::sample_uniform(&bounds, 400, 2).unwrap();
    let grid = DiscreteDomain::uniform(fam.domain(), 800).unwrap();
    let rep = train(&fam, &cloud, &grid, &TrainConfig::new(Some(1e-10), 120)).unwrap();
    assert_eq!(rep.stop_reason, StopReason::ToleranceReached);
    (fam, rep.model)
}

#[test]
fn stft_model_invariants_and_integrals() {
    let (fam, model) = stft_model();
    let tests = sample_box(&fam.spec().bounds(), 30, 4).unwrap();
    check_invariants(&model, &fam, &tests);
    let w = model.quad_weights(&fam, &QuadConfig::new(1e-11)).unwrap();
    for p in &tests[..10] {
        let got = model.integrate(&w, &fam, p).unwrap();
        let want = oracle_integral(&fam, p, 1e-13);
        assert!((got - want).norm() <= 1e-8, "{p:?}: {got} vs {want}");
    }
}

#[test]
fn cgmy_training_reaches_tolerance() {
    let case = cgmy();
    assert_eq!(case.report.stop_reason, StopReason::ToleranceReached);
    let m = case.model.size();
    assert!((25..=60).contains(&m), "M = {m}");
    assert_eq!(case.report.residual_curve.len(), m);
    assert!(case.report.residual_curve.last().unwrap().1 <= 1e-12);
}

#[test]
fn cgmy_invariants() {
    let case = cgmy();
    let tests = sample_box(&case.spec.bounds, 100, 5).unwrap();
    check_invariants(&case.model, &case.fam, &tests);
}

#[test]
fn cgmy_interpolation_matches_direct_evaluation() {
    let case = cgmy();
    let p = [3.0, 4.0, 4.0, 1.1, 0.0];
    let zs: Vec<f64> = (0..500).map(|k| 75.0 * k as f64 / 499.0).collect();
    let v = case.model.interpolate(&case.fam, &p, &zs).unwrap();
    let err = zs
        .iter()
        .zip(&v)
        .map(|(z, v)| (case.fam.eval(&p, *z) - v).norm())
        .fold(0.0, f64::max);
    assert!(err <= 1e-9, "{err:e}");
}

#[test]
fn cgmy_weights_against_oracle() {
    let case = cgmy();
    let w = case.model.weights().unwrap();
    for p in sample_box(&case.spec.bounds, 100, 31).unwrap() {
        let got = case.model.integrate(w, &case.fam, &p).unwrap();
        let want = oracle_integral(&case.fam, &p, 1e-13);
        assert!((got - want).norm() <= 1e-9, "{p:?}");
    }
    let p = [3.0, 4.0, 4.0, 1.1, 0.0];
    let got = case.model.integrate_stored(&case.fam, &p).unwrap();
    assert!((got - oracle_integral(&case.fam, &p, 1e-13)).norm() <= 1e-9);
}

#[test]
fn quadrature_consistency_with_interpolant() {
    let case = cgmy();
    let model = &case.model;
    let abs_tol = model.quadrature().unwrap().abs_tol;
    for p in sample_box(&case.spec.bounds, 20, 41).unwrap() {
        let coef = model.interpolation_coefficients(&case.fam, &p).unwrap();
        let interpolant = |z: f64| -> Complex64 {
            let q = model.basis_values(&case.fam, z);
            coef.iter().zip(&q).map(|(a, b)| a * b).sum()
        };
        let direct = integrate_complex(interpolant, 0.0, 75.0, abs_tol, 0.0, DEFAULT_MAX_EVALS).unwrap();
        let rule = model.integrate_stored(&case.fam, &p).unwrap();
        assert!(
            (rule - direct.value).norm() <= 10.0 * abs_tol,
            "{p:?}: {:e}",
            (rule - direct.value).norm()
        );
    }
}

#[test]
fn cgmy_beta_reconstruction_on_grid() {
    // |β| grows like the inverse of the last pivot, so the grid identity is
    // checked at 1e-9 on a model whose coefficients stay below ~1e7.
    let case = cgmy();
    let cloud = ParameterCloud::sample_uniform(&case.spec.bounds, 4000, 1).unwrap();
    let grid = DiscreteDomain::uniform(case.fam.domain(), 1500).unwrap();
    let model = train(&case.fam, &cloud, &grid, &TrainConfig::new(Some(1e-12), 25))
        .unwrap()
        .model;
    assert_eq!(model.size(), 25);
    let (err, _) = beta_grid_error(&model, &case.fam);
    assert!(err <= 1e-9, "{err:e}");
}

#[test]
fn cgmy_beta_reconstruction_at_rounding_level() {
    // On the full model the identity holds up to the rounding error of a
    // sum with coefficients as large as max|β|.
    let case = cgmy();
    let (err, beta_max) = beta_grid_error(&case.model, &case.fam);
    let h_max = 1.0 / std::f64::consts::PI;
    assert!(
        err <= 100.0 * f64::EPSILON * beta_max * h_max,
        "{err:e} vs max|β| {beta_max:e}"
    );
}

#[test]
fn cgmy_beta_integral_view() {
    let case = cgmy();
    let cloud = ParameterCloud::sample_uniform(&case.spec.bounds, 4000, 1).unwrap();
    let grid = DiscreteDomain::uniform(case.fam.domain(), 1500).unwrap();
    let model = train(&case.fam, &cloud, &grid, &TrainConfig::new(Some(1e-12), 25))
        .unwrap()
        .model;
    let w = model.quad_weights(&case.fam, &QuadConfig::new(1e-13)).unwrap();
    let beta = model.snapshot_coefficients();
    let snap_int: Vec<Complex64> = model
        .magic_params()
        .iter()
        .map(|p| oracle_integral(&case.fam, p, 1e-14))
        .collect();
    for p in sample_box(&case.spec.bounds, 20, 9).unwrap() {
        let rule = model.integrate(&w, &case.fam, &p).unwrap();
        let h = model.values_at_magic_points(&case.fam, &p);
        let view: Complex64 = h
            .iter()
            .zip(&beta)
            .map(|(hm, row)| hm * row.iter().zip(&snap_int).map(|(b, s)| b * s).sum::<Complex64>())
            .sum();
        assert!((rule - view).norm() <= 1e-9, "{p:?}");
    }
}

fn beta_grid_error<F: ParametricFamily>(model: &MagicModel, fam: &F) -> (f64, f64) {
    let beta = model.snapshot_coefficients();
    let beta_max = beta.iter().flatten().map(|b| b.norm()).fold(0.0, f64::max);
    let theta = theta_on_grid(model);
    let mut err = 0.0f64;
    for (k, &z) in model.grid().iter().enumerate() {
        let snaps: Vec<Complex64> = model.magic_params().iter().map(|p| fam.eval(p, z)).collect();
        for (row, th) in beta.iter().zip(&theta[k]) {
            let r: Complex64 = row.iter().zip(&snaps).map(|(b, h)| b * h).sum();
            err = err.max((r - th).norm());
        }
    }
    (err, beta_max)
}

#[test]
fn double_integral_cases() {
    let case = cgmy();
    let model = &case.model;
    let w = model.weights().unwrap();
    let node = vec![2.0, 3.0, 5.0, 1.1, 0.2];
    let single = model.integrate(w, &case.fam, &node).unwrap();
    let double = model
        .integrate_double(w, &case.fam, std::slice::from_ref(&node), &[1.0])
        .unwrap();
    assert!((single - double).norm() <= 1e-15);

    // Trapezoid rule in C with G, M, Y, x fixed, against nested quadrature.
    let n = 20;
    let nodes: Vec<Vec<f64>> = (0..n)
        .map(|i| vec![1.0 + 4.0 * i as f64 / (n - 1) as f64, 4.0, 6.0, 1.1, 0.3])
        .collect();
    let h = 4.0 / (n - 1) as f64;
    let weights: Vec<f64> = (0..n)
        .map(|i| if i == 0 || i == n - 1 { h / 2.0 } else { h })
        .collect();
    let got = model.integrate_double(w, &case.fam, &nodes, &weights).unwrap();
    let want: Complex64 = nodes
        .iter()
        .zip(&weights)
        .map(|(p, a)| oracle_integral(&case.fam, p, 1e-13) * *a)
        .sum();
    assert!((got - want).norm() <= 1e-8, "{got} vs {want}");

    assert!(matches!(
        model.integrate_double(w, &case.fam, &nodes, &weights[..3]),
        Err(EimError::InvalidConfig(_))
    ));
}

#[test]
fn double_integral_is_linear() {
    let fam = ScaledSineFamily {
        omega: iv(0.0, std::f64::consts::PI),
    };
    let cloud = ParameterCloud::sample_uniform(&[iv(1.0, 3.0)], 10, 1).unwrap();
    let grid = DiscreteDomain::uniform(fam.omega, 101).unwrap();
    let model = train(&fam, &cloud, &grid, &TrainConfig::new(Some(1e-12), 3))
        .unwrap()
        .model;
    let w = model.quad_weights(&fam, &QuadConfig::new(1e-14)).unwrap();
    let a = model.integrate(&w, &fam, &[1.2]).unwrap();
    let b = model.integrate(&w, &fam, &[2.6]).unwrap();
    let d = model
        .integrate_double(&w, &fam, &[vec![1.2], vec![2.6]], &[0.5, 0.5])
        .unwrap();
    assert!((d - 0.5 * (a + b)).norm() <= 1e-14);
}

#[test]
fn snapshots_evaluated_once_and_online_cost_is_m() {
    let calls = Arc::new(AtomicUsize::new(0));
    let counter = calls.clone();
    let fam = FnFamily::new("count", 1, iv(-1.0, 1.0), ValueKind::Real, move |p: &[f64], z| {
        counter.fetch_add(1, Ordering::Relaxed);
        c((p[0] * z).exp())
    });
    let cloud = ParameterCloud::sample_uniform(&[iv(0.0, 1.0)], 60, 4).unwrap();
    let grid = DiscreteDomain::chebyshev(iv(-1.0, 1.0), 120).unwrap();
    let rep = train(&fam, &cloud, &grid, &TrainConfig::new(Some(1e-12), 20)).unwrap();
    assert_eq!(calls.load(Ordering::Relaxed), 60 * 120);

    let w = rep.model.quad_weights(&fam, &QuadConfig::new(1e-13)).unwrap();
    calls.store(0, Ordering::Relaxed);
    rep.model.integrate(&w, &fam, &[0.3]).unwrap();
    assert_eq!(calls.load(Ordering::Relaxed), rep.model.size());
}

#[test]
fn training_is_deterministic_across_thread_counts() {
    let spec = CgmyFamilySpec::reference();
    let fam = CgmyFamily::from_spec(&spec);
    let cloud = ParameterCloud::sample_uniform(&spec.bounds, 300, 7).unwrap();
    let grid = DiscreteDomain::uniform(fam.domain(), 400).unwrap();
    let cfg = TrainConfig::new(Some(1e-10), 60);
    let run = |threads: usize| {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .unwrap();
        pool.install(|| train(&fam, &cloud, &grid, &cfg).unwrap())
    };
    let a = run(1);
    let b = run(4);
    let c2 = run(4);
    for other in [&b, &c2] {
        assert_eq!(a.model.magic_params(), other.model.magic_params());
        assert_eq!(a.model.magic_points(), other.model.magic_points());
        assert_eq!(a.model.b_matrix(), other.model.b_matrix());
        assert_eq!(a.residual_curve, other.residual_curve);
    }
}

#[test]
fn max_m_stop_without_tolerance() {
    let spec = CgmyFamilySpec::reference();
    let fam = CgmyFamily::from_spec(&spec);
    let cloud = ParameterCloud::sample_uniform(&spec.bounds, 200, 3).unwrap();
    let grid = DiscreteDomain::uniform(fam.domain(), 300).unwrap();
    let rep = train(&fam, &cloud, &grid, &TrainConfig::new(None, 5)).unwrap();
    assert_eq!(rep.model.size(), 5);
    assert_eq!(rep.stop_reason, StopReason::MaxIterations);
    assert_eq!(rep.stop_reason.as_str(), "max_M reached");
}

#[test]
fn weight_tolerance_must_be_below_training_tolerance() {
    let fam = test_family_exp(iv(0.0, 1.0), iv(-1.0, 1.0));
    let cloud = ParameterCloud::sample_uniform(&[fam.p_range], 30, 1).unwrap();
    let grid = DiscreteDomain::chebyshev(fam.omega, 100).unwrap();
    let model = train(&fam, &cloud, &grid, &TrainConfig::new(Some(1e-8), 20))
        .unwrap()
        .model;
    assert!(matches!(
        model.quad_weights(&fam, &QuadConfig::new(1e-8)),
        Err(EimError::InvalidConfig(_))
    ));
    assert!(model.quad_weights(&fam, &QuadConfig::new(1e-9)).is_ok());
}

#[test]
fn weight_quadrature_reports_non_convergence() {
    let fam = FnFamily::new("osc", 1, iv(0.0, 10.0), ValueKind::Real, |p: &[f64], z| {
        c((p[0] * z).cos())
    });
    let cloud = ParameterCloud::sample_uniform(&[iv(20.0, 30.0)], 30, 1).unwrap();
    let grid = DiscreteDomain::uniform(iv(0.0, 10.0), 400).unwrap();
    let model = train(&fam, &cloud, &grid, &TrainConfig::new(Some(1e-6), 5))
        .unwrap()
        .model;
    // A single 15-point panel cannot resolve 30 oscillations.
    let cfg = QuadConfig::new(1e-10).with_max_evals(15);
    assert!(matches!(
        model.quad_weights(&fam, &cfg),
        Err(EimError::QuadratureNonConvergence { .. })
    ));
}
