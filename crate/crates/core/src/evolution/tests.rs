use super::*;
use crate::models::{
    build_heat, build_kinetic, build_kolmogorov, build_shear, build_spiral, exact_inviscid, initial_field, InitialDatum,
    KineticModel, KolmogorovModel, Profile, ShearModel, SpiralModel,
};
use crate::spectral::Basis;
use num_complex::Complex64;

fn shear(gamma: f64, m_max: usize) -> ModelProblem {
    build_shear(&ShearModel { profile: Profile::Sin, n0: Some(1), gamma, k: 1, m_max }).unwrap()
}

fn kolmogorov(m_max: usize) -> ModelProblem {
    build_kolmogorov(&KolmogorovModel { l: 2.0, k: 1, m_max }).unwrap()
}

fn spiral(alpha: f64, points: usize) -> ModelProblem {
    build_spiral(&SpiralModel { alpha, k: 1, points }).unwrap()
}

fn kinetic() -> ModelProblem {
    build_kinetic(&KineticModel::new(1, 32)).unwrap()
}

fn h_distance(model: &ModelProblem, a: &Field, b: &Field) -> f64 {
    model.h_sq(a.sub(b).unwrap().coeffs()).sqrt()
}

fn bump(model: &ModelProblem) -> Field {
    initial_field(model, &InitialDatum::GaussianBump).unwrap()
}

#[test]
fn inviscid_shear_step_is_exact() {
    let m = shear(2.0, 64);
    let f = bump(&m);
    let stepped = step_viscous(&m, &f, 0.0, 0.1).unwrap();
    let exact = exact_inviscid(&m, &f, 0.1).unwrap();
    assert!(h_distance(&m, &stepped, &exact) < 1e-14);
}

#[test]
fn pure_diffusion_step_scales_coefficients() {
    let m = build_heat(2, 16).unwrap();
    let f = initial_field(&m, &InitialDatum::Random { seed: 1 }).unwrap();
    let (nu, dt) = (0.3, 0.05);
    let g = step_viscous(&m, &f, nu, dt).unwrap();
    let lam = m.diagonal_a().unwrap();
    for ((a, b), l) in f.coeffs().iter().zip(g.coeffs()).zip(lam) {
        assert!((a * (-nu * l * dt).exp() - b).norm() < 1e-15);
    }
}

#[test]
fn invalid_step_parameters() {
    let m = shear(2.0, 8);
    let f = bump(&m);
    assert!(step_viscous(&m, &f, 0.1, 0.0).is_err());
    assert!(step_viscous(&m, &f, -1.0, 0.1).is_err());
    assert!(step_viscous(&m, &f, f64::NAN, 0.1).is_err());
    let wrong = Field::zeros(Basis::Eigen { len: m.dim() });
    assert!(step_viscous(&m, &wrong, 0.1, 0.1).is_err());
}

/// Global error at `t_end` against a run with `dt / 64`.
fn global_error(m: &ModelProblem, f: &Field, nu: f64, t_end: f64, dt: f64) -> f64 {
    let reference = evolve(m, f, nu, t_end, dt / 64.0, usize::MAX).unwrap().field;
    let coarse = evolve(m, f, nu, t_end, dt, usize::MAX).unwrap().field;
    h_distance(m, &coarse, &reference)
}

#[test]
fn kolmogorov_self_convergence_is_second_order() {
    let m = kolmogorov(32);
    let f = bump(&m);
    let e1 = global_error(&m, &f, 0.05, 1.0, 0.1);
    let e2 = global_error(&m, &f, 0.05, 1.0, 0.05);
    let ratio = e1 / e2;
    assert!((3.5..4.5).contains(&ratio), "error ratio {ratio} ({e1:e} / {e2:e})");
}

#[test]
fn self_convergence_on_every_model() {
    let models = [shear(2.0, 32), shear(1.0, 32), spiral(1.0, 48), spiral(4.0, 48), kinetic()];
    for m in &models {
        let f = bump(m);
        let e1 = global_error(m, &f, 0.05, 1.0, 0.1);
        let e2 = global_error(m, &f, 0.05, 1.0, 0.05);
        let ratio = e1 / e2;
        assert!((3.0..5.0).contains(&ratio), "{:?}: ratio {ratio}", m.descriptor());
    }
}

#[test]
fn zero_length_run_has_one_sample() {
    let m = spiral(1.0, 32);
    let f = bump(&m);
    let evo = evolve(&m, &f, 1e-3, 0.0, 0.01, 1).unwrap();
    assert_eq!(evo.trace.len(), 1);
    assert_eq!(evo.trace.times, vec![0.0]);
    let n = m.norms(&f).unwrap();
    assert!((evo.trace.h_norm[0] - n.h).abs() < 1e-14);
    assert!((evo.trace.h1_norm[0] - n.h1).abs() < 1e-14);
    assert!((evo.trace.hm1_norm[0] - n.hm1).abs() < 1e-14);
    assert!(evolve(&m, &f, 1e-3, -1.0, 0.01, 1).is_err());
    assert!(evolve(&m, &f, 1e-3, 1.0, 0.01, 0).is_err());
}

#[test]
fn trace_norms_match_model_norms() {
    for m in [shear(2.0, 16), kolmogorov(16), spiral(2.0, 32), kinetic()] {
        let f = bump(&m);
        let evo = evolve(&m, &f, 1e-2, 0.5, 0.05, 5).unwrap();
        let n = m.norms(&evo.field).unwrap();
        let last = evo.trace.len() - 1;
        assert_eq!(evo.trace.times[last], 0.5);
        assert!((evo.trace.h_norm[last] - n.h).abs() < 1e-12);
        assert!((evo.trace.h1_norm[last] - n.h1).abs() < 1e-12);
        assert!((evo.trace.hm1_norm[last] - n.hm1).abs() < 1e-12);
    }
}

#[test]
fn spiral_inviscid_run_matches_closed_form() {
    let m = spiral(1.0, 64);
    let f = initial_field(&m, &InitialDatum::Random { seed: 3 }).unwrap();
    let evo = evolve(&m, &f, 0.0, 50.0, 0.01, 1000).unwrap();
    let exact = exact_inviscid(&m, &f, 50.0).unwrap();
    assert!(h_distance(&m, &evo.field, &exact) < 1e-10);
}

#[test]
fn viscous_energy_is_monotone() {
    let m = shear(2.0, 64);
    let evo = evolve(&m, &bump(&m), 1e-3, 200.0, 0.05, 10).unwrap();
    for w in evo.trace.h_norm.windows(2) {
        assert!(w[1] <= w[0]);
    }
}

#[test]
fn inviscid_drift_over_many_steps() {
    let cases = [
        (shear(2.0, 64), 1e-10),
        (spiral(1.0, 64), 1e-10),
        (kolmogorov(64), 1e-8),
        (kinetic(), 1e-8),
    ];
    for (m, tol) in &cases {
        let f = initial_field(m, &InitialDatum::Random { seed: 5 }).unwrap();
        let evo = evolve(m, &f, 0.0, 100.0, 0.01, 1000).unwrap();
        let h0 = evo.trace.h_norm[0];
        let drift = evo.trace.h_norm.iter().fold(0.0f64, |a, h| a.max((h - h0).abs() / h0));
        assert!(drift < *tol, "{:?}: drift {drift:e}", m.descriptor());
    }
}

#[test]
fn energy_residual_for_pure_diffusion() {
    let m = build_heat(1, 32).unwrap();
    let evo = evolve(&m, &bump(&m), 1e-3, 1.0, 1e-3, 1).unwrap();
    let r = energy_residual(&evo.trace).unwrap();
    assert!(r < 1e-8, "residual {r:e}");
}

#[test]
fn energy_residual_vanishes_without_viscosity() {
    let m = spiral(1.0, 32);
    let evo = evolve(&m, &bump(&m), 0.0, 5.0, 0.01, 10).unwrap();
    assert!(energy_residual(&evo.trace).unwrap() < 1e-10);
}

#[test]
fn energy_residual_is_fourth_order_in_sampling() {
    let m = build_heat(1, 32).unwrap();
    let f = initial_field(&m, &InitialDatum::SingleMode { m: 4 }).unwrap();
    let coarse = evolve(&m, &f, 0.1, 2.0, 1e-3, 40).unwrap();
    let fine = evolve(&m, &f, 0.1, 2.0, 1e-3, 20).unwrap();
    let ratio = energy_residual(&coarse.trace).unwrap() / energy_residual(&fine.trace).unwrap();
    assert!((14.0..18.0).contains(&ratio), "ratio {ratio}");
}

#[test]
fn energy_residual_matches_simpson_error_of_a_single_mode() {
    // h^2 = e^{-2 r t} with r = nu lambda; Simpson's error over [t-d, t+d]
    // is (2r)^5 d^4 / 180 relative to the exact rate 2r
    let m = build_heat(1, 32).unwrap();
    let f = initial_field(&m, &InitialDatum::SingleMode { m: 4 }).unwrap();
    let (nu, d): (f64, f64) = (0.1, 0.02);
    let evo = evolve(&m, &f, nu, 1.0, 1e-3, 20).unwrap();
    let r = nu * 17.0;
    let expected = (2.0 * r).powi(5) * d.powi(4) / 180.0 * (-2.0 * r * (d)).exp();
    let got = energy_residual(&evo.trace).unwrap();
    assert!((got / expected - 1.0).abs() < 0.05, "{got:e} vs {expected:e}");
}

#[test]
fn energy_residual_needs_three_samples() {
    let m = spiral(1.0, 16);
    let evo = evolve(&m, &bump(&m), 0.1, 0.1, 0.1, 1).unwrap();
    assert!(matches!(energy_residual(&evo.trace), Err(Error::InsufficientData(_))));
}

#[test]
fn proximity_to_inviscid_flow_shrinks_with_viscosity() {
    let m = spiral(1.0, 64);
    let f = bump(&m);
    let exact = exact_inviscid(&m, &f, 10.0).unwrap();
    let gaps: Vec<f64> = [1e-2, 1e-3, 1e-4]
        .iter()
        .map(|&nu| h_distance(&m, &evolve(&m, &f, nu, 10.0, 0.01, usize::MAX).unwrap().field, &exact))
        .collect();
    assert!(gaps[0] > gaps[1] && gaps[1] > gaps[2], "{gaps:?}");
}

/// `d/dt |f|^2_{gamma/2} + 2 nu |f|^2_{gamma} <= 2 (d + gamma) max|u'| |f|^2_{gamma/2}`
/// checked step by step, with `O(dt)` slack relative to the right-hand side.
#[test]
fn fractional_shear_energy_inequality() {
    for gamma in [0.5, 1.0, 1.5, 2.0] {
        let m = shear(gamma, 64);
        let lam = m.diagonal_a().unwrap().to_vec();
        let seminorms = |x: &[Complex64]| {
            x.iter().zip(&lam).fold((0.0, 0.0), |(a, b), (v, l)| (a + l * v.norm_sqr(), b + l * l * v.norm_sqr()))
        };
        let (nu, dt) = (1e-3, 1e-2);
        let mut p = Propagator::new(&m, nu, dt).unwrap();
        let mut x = p.load(&bump(&m)).unwrap();
        let rhs_factor = 2.0 * (2.0 + gamma) * m.c_b();
        let mut worst = f64::NEG_INFINITY;
        for _ in 0..2000 {
            let (e0, d0) = seminorms(&x);
            p.advance(&mut x, 1).unwrap();
            let (e1, d1) = seminorms(&x);
            let lhs = (e1 - e0) / dt + nu * (d0 + d1);
            let rhs = rhs_factor * 0.5 * (e0 + e1);
            worst = worst.max((lhs - rhs) / rhs);
        }
        assert!(worst <= dt, "gamma {gamma}: relative excess {worst}");
    }
}

#[test]
fn reverse_propagator_is_the_adjoint() {
    for m in [shear(1.5, 16), kolmogorov(16), spiral(1.0, 32), kinetic()] {
        let mut fwd = Propagator::new(&m, 0.02, 0.1).unwrap();
        let mut bwd = Propagator::with_direction(&m, 0.02, 0.1, true).unwrap();
        let mut x = fwd.load(&initial_field(&m, &InitialDatum::Random { seed: 1 }).unwrap()).unwrap();
        let mut y = fwd.load(&initial_field(&m, &InitialDatum::Random { seed: 2 }).unwrap()).unwrap();
        let (x0, y0) = (x.clone(), y.clone());
        fwd.advance(&mut x, 7).unwrap();
        bwd.advance(&mut y, 7).unwrap();
        let dot = |a: &[Complex64], b: &[Complex64]| a.iter().zip(b).map(|(u, v)| u * v.conj()).sum::<Complex64>();
        let (lhs, rhs) = (dot(&x, &y0), dot(&x0, &y));
        assert!((lhs - rhs).norm() < 1e-12 * lhs.norm().max(1e-300), "{:?}", m.descriptor());
    }
}

#[test]
fn trace_csv_roundtrip() {
    let m = kolmogorov(8);
    let evo = evolve(&m, &bump(&m), 1e-2, 1.0, 0.1, 2).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("trace.csv");
    evo.trace.save(&path).unwrap();
    let text = std::fs::read_to_string(&path).unwrap();
    assert!(text.starts_with("t,h,h1,hm1\n"));
    assert!(DecayTrace::sidecar_path(&path).exists());
    let back = DecayTrace::load(&path).unwrap();
    assert_eq!(back, evo.trace);
}

#[test]
fn crossing_is_detected_and_stop_rule_applies() {
    let m = build_heat(1, 8).unwrap();
    let f = initial_field(&m, &InitialDatum::SingleMode { m: 0 }).unwrap();
    let theta = (-1.0f64).exp();
    let evo = evolve_with(
        &m,
        &f,
        0.5,
        &EvolveOptions {
            t_end: 100.0,
            dt: 0.01,
            sample_every: 10,
            stop: Some(StopRule { below: theta, not_before: 3.0 }),
            theta: Some(theta),
        },
    )
    .unwrap();
    // lambda = 1: |f(t)| = e^{-t/2}
    assert!((evo.crossing.unwrap() - 2.0).abs() < 1e-9);
    let t_last = *evo.trace.times.last().unwrap();
    assert!(t_last >= 3.0 && t_last < 3.2, "stopped at {t_last}");
}

#[test]
fn semigroup_norm_of_pure_diffusion() {
    let m = build_heat(2, 8).unwrap();
    let (sigma, datum) = semigroup_norm(&m, 0.1, 3.0, 0.1, 20, 1).unwrap();
    // lambda_1 = 4 (k = 2, m = 0)
    assert!((sigma - (-0.1f64 * 4.0 * 3.0).exp()).abs() < 1e-10);
    assert!(m.h_sq(datum.coeffs()) > 0.0);
}

#[test]
fn worst_case_tau_of_pure_diffusion() {
    let m = build_heat(1, 8).unwrap();
    let theta = (-1.0f64).exp();
    let nu = 0.01;
    // |S(t)| = e^{-nu t}, so tau = 1 / nu
    let upper = bracket_tau(&m, nu, theta, 0.1, 1.0, 0).unwrap();
    assert!((100.0..=200.0).contains(&upper));
    let wc = worst_case_tau(&m, nu, theta, &WorstCaseOptions::new(0.1, upper)).unwrap();
    assert!((wc.tau - 100.0).abs() < 1e-6, "tau {}", wc.tau);
    assert!(worst_case_tau(&m, nu, 1.5, &WorstCaseOptions::new(0.1, upper)).is_err());
}

#[test]
fn worst_case_dominates_named_data() {
    let m = shear(2.0, 32);
    let nu = 1e-3;
    let theta = (-1.0f64).exp();
    let guess = bracket_tau(&m, nu, theta, 0.1, 1.0, 0).unwrap();
    let wc = worst_case_tau(&m, nu, theta, &WorstCaseOptions::new(0.1, guess)).unwrap();
    for d in [InitialDatum::SingleMode { m: 1 }, InitialDatum::GaussianBump, InitialDatum::Random { seed: 2 }] {
        let evo = evolve_with(
            &m,
            &initial_field(&m, &d).unwrap(),
            nu,
            &EvolveOptions { t_end: 1e4, dt: 0.1, sample_every: usize::MAX, stop: None, theta: Some(theta) },
        )
        .unwrap();
        if let Some(t) = evo.crossing {
            assert!(t <= wc.tau * (1.0 + 1e-2), "{d:?} crosses at {t} after {}", wc.tau);
        }
    }
}

#[test]
fn mixing_envelope_dominates_a_datum() {
    let m = shear(2.0, 64);
    let f = bump(&m);
    let times = [1.0, 5.0, 20.0];
    let env = mixing_envelope(&m, &times, 30, 0).unwrap();
    let h1 = m.h1_sq(f.coeffs()).sqrt();
    for (t, v) in times.iter().zip(&env.values) {
        let g = exact_inviscid(&m, &f, *t).unwrap();
        let ratio = m.hm1_sq(g.coeffs()).unwrap().sqrt() / h1;
        assert!(ratio <= v * (1.0 + 1e-6), "t = {t}: datum {ratio} above envelope {v}");
    }
    assert!(env.values.windows(2).all(|w| w[1] < w[0]));
    assert!(matches!(mixing_envelope(&kinetic(), &times, 5, 0), Err(Error::Unsupported(_))));
}
