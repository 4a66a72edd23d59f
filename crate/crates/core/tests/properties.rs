use proptest::prelude::*;

use prandtl4_core::datum::{bump, bump_value};
use prandtl4_core::diagnostics::{
    dissipation_rate, functional_e, functional_f, functional_g, riccati_blowup_bound, xt_norm, EnergyReport,
};
use prandtl4_core::kernel::phi_eval;
use prandtl4_core::kernel::{kernel_profile, kernel_value};
use prandtl4_core::semigroup::{apply_ibp, build_operator, verify_semigroup};
use prandtl4_core::solver::{cumulative_integral, evolve, residual_check, BlowupThreshold, SolverConfig, Termination};
use prandtl4_core::{Grid, KernelKind, PhiKind, Profile, QuadratureSpec};

fn smooth_profile(grid: &Grid, coeffs: &[(f64, f64, f64)]) -> Profile {
    // sums of bumps placed away from the boundary, so every admissible trace is zero
    grid.sample(|y| coeffs.iter().map(|&(a, c, w)| bump_value(y, a, c, w)).sum())
}

fn bumps() -> impl Strategy<Value = Vec<(f64, f64, f64)>> {
    prop::collection::vec((-3.0..3.0f64, 6.0..14.0f64, 1.0..4.0f64), 1..4)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn phi_family_is_bounded(r in 0.0..200.0f64, d in 0usize..8) {
        for kind in PhiKind::ALL {
            // derivatives cycle through the same family up to sign
            prop_assert!(phi_eval(kind, d, r).abs() <= 3.0);
        }
    }

    #[test]
    fn kernel_k_is_symmetric(x in 0.0..6.0f64, z in 0.0..6.0f64) {
        let q = QuadratureSpec::default();
        let a = kernel_profile(x, z, 0, KernelKind::K, &q).unwrap();
        let b = kernel_profile(z, x, 0, KernelKind::K, &q).unwrap();
        prop_assert!((a - b).abs() < 1e-12);
    }

    #[test]
    fn kernel_obeys_self_similar_scaling(
        t in 1e-4..2.0f64, x in 0.0..3.0f64, y in 0.0..3.0f64, m in 0usize..5,
        k in 0usize..4,
    ) {
        let q = QuadratureSpec::default();
        let kind = KernelKind::ALL[k];
        let r = t.powf(-0.25);
        let direct = kernel_value(t, x, y, m, kind, &q).unwrap();
        let scaled = r.powi(m as i32 + 1) * kernel_profile(x * r, y * r, m, kind, &q).unwrap();
        prop_assert!((direct - scaled).abs() <= 1e-13 * (1.0 + direct.abs()));
    }

    #[test]
    fn clamped_row_vanishes(t in 1e-4..2.0f64, y in 0.0..5.0f64, m in 0usize..2) {
        let q = QuadratureSpec::default();
        prop_assert_eq!(kernel_value(t, 0.0, y, m, KernelKind::K, &q).unwrap(), 0.0);
    }

    #[test]
    fn dissipation_is_nonpositive(c in bumps()) {
        let g = Grid::new(20.0, 256).unwrap();
        let a = smooth_profile(&g, &c);
        prop_assert!(dissipation_rate(&a) <= 0.0);
        prop_assert!(functional_f(&a) >= 0.0);
    }

    #[test]
    fn functionals_have_their_homogeneity(c in bumps(), lambda in 0.1..5.0f64) {
        let g = Grid::new(20.0, 256).unwrap();
        let a = smooth_profile(&g, &c);
        let s = a.scaled(lambda);
        let f = functional_f(&a);
        prop_assert!((functional_f(&s) - lambda * lambda * f).abs() <= 1e-12 * (1.0 + f) * lambda * lambda);
        let n = xt_norm(&a);
        prop_assert!((xt_norm(&s) - lambda * n).abs() <= 1e-12 * lambda * (1.0 + n));
    }

    #[test]
    fn g_sign_follows_e(c in bumps()) {
        let g = Grid::new(20.0, 256).unwrap();
        let a = smooth_profile(&g, &c);
        prop_assume!(functional_f(&a) > 1e-8);
        let e = functional_e(&a);
        let gv = functional_g(&a, 1.2).unwrap();
        prop_assert_eq!(gv > 0.0, e < 0.0);
    }

    #[test]
    fn riccati_bound_decreases_in_both_arguments(
        f0 in 0.1..100.0f64, g0 in 0.01..10.0f64, beta in 1.01..1.45f64,
    ) {
        let b = riccati_blowup_bound(f0, g0, beta).unwrap();
        prop_assert!(b > 0.0);
        prop_assert!(riccati_blowup_bound(1.5 * f0, g0, beta).unwrap() < b);
        prop_assert!(riccati_blowup_bound(f0, 1.5 * g0, beta).unwrap() < b);
    }

    #[test]
    fn cumulative_integral_of_constant(c in -10.0..10.0f64) {
        let g = Grid::new(7.0, 99).unwrap();
        let v = cumulative_integral(&g.sample(|_| c));
        for (i, x) in v.values().iter().enumerate() {
            prop_assert!((x - c * g.node(i)).abs() < 1e-12 * (1.0 + c.abs()));
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    #[test]
    fn semigroup_is_linear_and_clamped(c in bumps(), d in bumps(), alpha in -2.0..2.0f64, t in 1e-3..1.0f64) {
        let g = Grid::new(24.0, 192).unwrap();
        let q = QuadratureSpec::default();
        let op = build_operator(&g, t, 0, KernelKind::K, &q).unwrap();
        let f = smooth_profile(&g, &c);
        let h = smooth_profile(&g, &d);
        let lhs = op.apply(&f.combine(alpha, &h, 1.0).unwrap()).unwrap();
        let rhs = op.apply(&f).unwrap().combine(alpha, &op.apply(&h).unwrap(), 1.0).unwrap();
        let scale = 1.0 + f.sup_norm() + h.sup_norm();
        prop_assert!(lhs.sup_distance(&rhs).unwrap() <= 1e-13 * scale);
        let u = op.apply(&f).unwrap();
        prop_assert!(u.trace(0).abs() <= 10.0 * q.abs_tol() * scale);
        // exact boundary derivative from the m = 1 operator, then the stencil estimate
        let du = build_operator(&g, t, 1, KernelKind::K, &q).unwrap().apply(&f).unwrap();
        prop_assert!(du.values()[0].abs() <= 10.0 * q.abs_tol() * scale);
        prop_assert!(u.trace(1).abs() <= 1e-5 * scale);
    }
}

#[test]
fn linear_flow_dissipates_l2() {
    let g = Grid::new(40.0, 512).unwrap();
    let q = QuadratureSpec::default();
    let f = bump(&g, 2.0, 12.0, 4.0);
    let mut last = functional_f(&f);
    for t in [1e-3, 3e-3, 1e-2, 3e-2, 0.1, 0.3, 1.0, 3.0] {
        let now = functional_f(&build_operator(&g, t, 0, KernelKind::K, &q).unwrap().apply(&f).unwrap());
        assert!(now <= last, "L2 grew at t={t}: {now} > {last}");
        last = now;
    }
}

#[test]
fn compact_data_decays_at_the_far_end() {
    let g = Grid::new(60.0, 1024).unwrap();
    let q = QuadratureSpec::default();
    let f = bump(&g, 10.0, 20.0, 10.0);
    for t in [1e-3, 0.1, 1.0] {
        let u = build_operator(&g, t, 0, KernelKind::K, &q).unwrap().apply(&f).unwrap();
        assert!(u.values()[g.points() - 1].abs() <= 1e-10 * f.sup_norm());
    }
}

#[test]
fn short_time_recovers_the_datum() {
    let g = Grid::new(40.0, 2001).unwrap();
    let q = QuadratureSpec::default();
    let f = bump(&g, 1.0, 20.0, 2.0);
    let u = build_operator(&g, 1e-4, 0, KernelKind::K, &q)
        .unwrap()
        .apply(&f)
        .unwrap();
    let skip = (1.0 / g.spacing()) as usize;
    let err = u.values()[skip..]
        .iter()
        .zip(&f.values()[skip..])
        .fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
    assert!(err < 1e-2, "sup error {err}");
}

#[test]
fn fourth_derivative_operator_is_minus_time_derivative() {
    let g = Grid::new(60.0, 1024).unwrap();
    let q = QuadratureSpec::default();
    let f = bump(&g, 10.0, 20.0, 10.0);
    let (t, dt) = (0.05, 1e-4);
    let plus = build_operator(&g, t + dt, 0, KernelKind::K, &q)
        .unwrap()
        .apply(&f)
        .unwrap();
    let minus = build_operator(&g, t - dt, 0, KernelKind::K, &q)
        .unwrap()
        .apply(&f)
        .unwrap();
    let dudt = plus.combine(0.5 / dt, &minus, -0.5 / dt).unwrap();
    let d4 = build_operator(&g, t, 4, KernelKind::K, &q).unwrap().apply(&f).unwrap();
    let scale = d4.sup_norm();
    assert!(d4.combine(1.0, &dudt, 1.0).unwrap().sup_norm() < 1e-5 * scale);

    // and through the integration-by-parts route with all four derivatives on f
    let derivs: Vec<Profile> = (0..=4).map(|k| f.derivative(k)).collect();
    let ibp = apply_ibp(&g, t, 4, &derivs, &q, 1e-8).unwrap();
    assert!(ibp.combine(1.0, &dudt, 1.0).unwrap().sup_norm() < 1e-3 * scale);
}

#[test]
fn ibp_first_order_matches_direct_operator() {
    let g = Grid::new(60.0, 1024).unwrap();
    let q = QuadratureSpec::default();
    let f = bump(&g, 10.0, 20.0, 10.0);
    let derivs: Vec<Profile> = (0..=1).map(|k| f.derivative(k)).collect();
    for t in [1e-3, 0.1, 1.0] {
        let ibp = apply_ibp(&g, t, 1, &derivs, &q, 1e-8).unwrap();
        let direct = build_operator(&g, t, 1, KernelKind::K, &q).unwrap().apply(&f).unwrap();
        assert!(ibp.sup_distance(&direct).unwrap() < 1e-4 * f.sup_norm());
    }
}

#[test]
fn semigroup_discrepancy_stays_at_rounding_under_refinement() {
    // the quartic damping makes the discrete composition spectrally exact, so
    // even an under-resolved grid only shows rounding
    let q = QuadratureSpec::default();
    for n in [64, 128, 256] {
        let g = Grid::new(20.0, n).unwrap();
        let d = verify_semigroup(&bump(&g, 1.0, 10.0, 1.0), 1e-3, 2e-3, &q).unwrap();
        assert!(d < 1e-12, "N={n}: {d:e}");
    }
}

fn short_blowup_run() -> prandtl4_core::EvolutionTrace {
    let g = Grid::new(60.0, 512).unwrap();
    let cfg = SolverConfig {
        blowup_threshold: BlowupThreshold::Relative(4.0),
        ..SolverConfig::default()
    };
    evolve(&bump(&g, 10.0, 20.0, 10.0), 1.0, &cfg, &QuadratureSpec::default()).unwrap()
}

#[test]
fn energy_monotonicity_along_a_blowup_trace() {
    let tr = short_blowup_run();
    assert_eq!(tr.termination, Termination::BlowupDetected);
    let r = &tr.reports;
    for i in 1..r.len() {
        assert!(r[i].e <= r[i - 1].e + 1e-9 * r[i - 1].e.abs(), "E rose at step {i}");
        if r[i - 1].e < 0.0 {
            assert!(
                r[i].g.unwrap() >= r[i - 1].g.unwrap() * (1.0 - 1e-9),
                "G fell at step {i}"
            );
        }
        let df = (r[i].f - r[i - 1].f) / (r[i].t - r[i - 1].t);
        let dt = r[i].t - r[i - 1].t;
        assert!(
            df >= -6.0 * r[i - 1].e.max(r[i].e) - 1e2 * dt * r[i].f,
            "dF/dt below -6E at step {i}"
        );
    }
    assert!(tr.final_time() <= r[0].riccati_bound.unwrap());
}

#[test]
fn snapshots_bracket_their_levels() {
    let tr = short_blowup_run();
    let sup0 = tr.reports[0].sup;
    assert_eq!(tr.doubling_count(), 2);
    for s in tr.snapshots.iter().filter(|s| s.level > 0) {
        let level = sup0 * 2f64.powi(s.level as i32);
        assert!(tr.reports[s.index].sup >= level);
        assert!(tr.reports[s.index - 1].sup < level);
    }
}

#[test]
fn traces_are_deterministic_and_clamped() {
    let a = short_blowup_run();
    let b = short_blowup_run();
    assert_eq!(a.times, b.times);
    for (p, q) in a.profiles.iter().zip(&b.profiles) {
        assert_eq!(p.values(), q.values());
        assert!(p.trace(0).abs() < 1e-9 && p.trace(1).abs() < 1e-6);
    }
    for w in a.times.windows(2) {
        assert!(w[1] > w[0]);
    }
}

#[test]
fn small_data_run_is_consistent_with_the_equation() {
    let g = Grid::new(60.0, 1024).unwrap();
    let a0 = bump(&g, 1e-3, 20.0, 10.0);
    let tr = evolve(&a0, 0.2, &SolverConfig::default(), &QuadratureSpec::default()).unwrap();
    assert_eq!(tr.termination, Termination::TimeReached);
    assert!(tr.profiles.iter().all(|p| p.sup_norm() <= 2.0 * a0.sup_norm()));
    let mid = tr.len() / 2;
    let res = residual_check(&tr, mid).unwrap();
    assert!(res < 1e-3 * tr.profiles[mid].sup_norm(), "residual {res:e}");
}

#[test]
fn zero_datum_report_is_quiet() {
    let g = Grid::new(10.0, 128).unwrap();
    let r = EnergyReport::evaluate(0.0, &g.zeros(), 1.2).unwrap();
    assert_eq!((r.f, r.e, r.dissipation), (0.0, 0.0, 0.0));
    assert!(r.g.is_none() && r.riccati_bound.is_none());
}
