//! Randomized identities of the spectral layer, the solver and the
//! diagnostics.

use cnqg_core::diagnostics::{
    energy_balance, lp_norm, maximum_principle_check, second_moment, uniqueness_class_monitor,
    validate_uniqueness_exponents,
};
use cnqg_core::initial::{centered_bump, lifted, negative_bump, random_smooth};
use cnqg_core::operators::{divergence, fractional_laplacian, gradient, riesz_potential, riesz_transform};
use cnqg_core::oracle::{lambda_alpha_quadrature, virial_rhs, QuadratureSpec};
use cnqg_core::solver::{mollify, run, Stepper};
use cnqg_core::{
    forward_transform, inverse_transform, Error, Grid, Grid32, PhysicalField, PhysicalField32, RunStatus, Scheme,
    SolverConfig, SpectralField,
};
use proptest::prelude::*;

fn grid_for(dim: usize) -> Grid<f64> {
    let m = [0, 64, 16, 8][dim];
    Grid::cube(dim, m, 2.0 * std::f64::consts::PI).unwrap()
}

fn max_diff(a: &PhysicalField<f64>, b: &PhysicalField<f64>) -> f64 {
    a.values().iter().zip(b.values()).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

fn spectral_diff(a: &SpectralField<f64>, b: &SpectralField<f64>) -> f64 {
    a.coeffs().iter().zip(b.coeffs()).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn transform_round_trip(dim in 1usize..=3, seed in any::<u64>()) {
        let g = grid_for(dim);
        let f = random_smooth(&g, seed, 3).unwrap();
        let back = inverse_transform(&forward_transform(&f).unwrap()).unwrap();
        prop_assert!(max_diff(&f, &back) <= 1e-12 * f.max_abs().max(1.0));
    }

    #[test]
    fn parseval(dim in 1usize..=3, seed in any::<u64>()) {
        let g = grid_for(dim);
        let f = random_smooth(&g, seed, 3).unwrap();
        let physical = lp_norm(&f, 2.0).unwrap().powi(2);
        let spectral = forward_transform(&f).unwrap().l2_norm_sq();
        prop_assert!((physical - spectral).abs() <= 1e-12 * physical);
    }

    #[test]
    fn fractional_powers_compose(dim in 1usize..=3, seed in any::<u64>(), s in 0.1f64..1.5, t in 0.1f64..1.5) {
        let g = grid_for(dim);
        let hat = forward_transform(&random_smooth(&g, seed, 3).unwrap()).unwrap().without_mean();
        let two = fractional_laplacian(&fractional_laplacian(&hat, s).unwrap(), t).unwrap();
        let one = fractional_laplacian(&hat, s + t).unwrap();
        prop_assert!(spectral_diff(&two, &one) <= 1e-12 * one.max_abs().max(1e-300));
        let delta = 0.4 * dim as f64;
        let undone = fractional_laplacian(&riesz_potential(&hat, delta).unwrap(), delta).unwrap();
        prop_assert!(spectral_diff(&undone, &hat) <= 1e-12 * hat.max_abs());
    }

    #[test]
    fn divergence_of_riesz_is_lambda(dim in 1usize..=3, seed in any::<u64>()) {
        let g = grid_for(dim);
        let hat = forward_transform(&random_smooth(&g, seed, 3).unwrap()).unwrap();
        let lhs = divergence(&riesz_transform(&hat).unwrap()).unwrap();
        let rhs = fractional_laplacian(&hat, 1.0).unwrap();
        prop_assert!(spectral_diff(&lhs, &rhs) <= 1e-12 * rhs.max_abs());
    }

    #[test]
    fn gradient_norm_matches_lambda_norm(dim in 1usize..=3, seed in any::<u64>()) {
        let g = grid_for(dim);
        let hat = forward_transform(&random_smooth(&g, seed, 3).unwrap()).unwrap();
        let grad = gradient(&hat).unwrap().l2_norm_sq();
        let lam = fractional_laplacian(&hat, 1.0).unwrap().l2_norm_sq();
        prop_assert!((grad - lam).abs() <= 1e-12 * lam);
    }

    #[test]
    fn holder_inequality(seed in any::<u64>(), p in 1.1f64..6.0) {
        let g = grid_for(2);
        let f = random_smooth(&g, seed, 4).unwrap();
        let h = random_smooth(&g, seed ^ 0x5eed, 4).unwrap();
        let q = p / (p - 1.0);
        let prod = PhysicalField::from_values(
            &g,
            1,
            f.values().iter().zip(h.values()).map(|(a, b)| a * b).collect(),
        )
        .unwrap();
        let lhs = lp_norm(&prod, 1.0).unwrap();
        let rhs = lp_norm(&f, p).unwrap() * lp_norm(&h, q).unwrap();
        prop_assert!(lhs <= rhs * (1.0 + 1e-12));
    }

    #[test]
    fn advective_and_divergence_flux_agree(seed in any::<u64>()) {
        // div(u theta) = u . grad theta + theta Lambda theta for band-limited theta.
        let g = Grid::<f64>::cube(2, 32, 2.0 * std::f64::consts::PI).unwrap();
        let cfg = SolverConfig { dealias_fraction: 1.0, ..Default::default() };
        let stepper = Stepper::new(&g, &cfg).unwrap();
        let hat = forward_transform(&random_smooth(&g, seed, 4).unwrap()).unwrap();
        let div_form = stepper.flux(&hat).unwrap().divergence;
        let adv_form = stepper.flux_advective(&hat).unwrap();
        prop_assert!(spectral_diff(&div_form, &adv_form) <= 1e-10 * div_form.max_abs().max(1.0));
    }

    #[test]
    fn quadrature_is_linear(seed in any::<u64>(), a in -2.0f64..2.0, b in -2.0f64..2.0) {
        let g = Grid::<f64>::cube(1, 64, 24.0).unwrap();
        let f = centered_bump(&g, 1.0, 1.5).unwrap();
        let h = cnqg_core::initial::gaussian_bump(&g, 0.5, 1.0, &[10.0 + (seed % 5) as f64]).unwrap();
        let spec = QuadratureSpec::default();
        let combo = f.axpby(a, &h, b).unwrap();
        let lhs = lambda_alpha_quadrature(&combo, 1.0, &spec).unwrap();
        let rhs = lambda_alpha_quadrature(&f, 1.0, &spec)
            .unwrap()
            .axpby(a, &lambda_alpha_quadrature(&h, 1.0, &spec).unwrap(), b)
            .unwrap();
        prop_assert!(max_diff(&lhs, &rhs) <= 1e-12 * lhs.max_abs().max(1.0));
    }
}

#[test]
fn mean_is_conserved_by_both_schemes() {
    let g = Grid::<f64>::cube(2, 32, 12.8).unwrap();
    let theta0 = lifted(&random_smooth(&g, 7, 4).unwrap(), 0.1);
    for scheme in [Scheme::IfEuler, Scheme::Etdrk2] {
        let cfg = SolverConfig {
            alpha: 1.5,
            nu: 0.1,
            scheme,
            t_end: 0.5,
            ..Default::default()
        };
        let traj = run(&theta0, &cfg).unwrap();
        assert!(traj.status.is_completed());
        let drift = (inverse_transform(&traj.final_state).unwrap().mean() - theta0.mean()).abs();
        assert!(drift <= 1e-13 * theta0.max_abs(), "{scheme}: {drift:e}");
    }
}

#[test]
fn constants_are_equilibria() {
    let g = Grid::<f64>::cube(2, 16, 4.0).unwrap();
    let theta0 = PhysicalField::constant(&g, 1.75);
    let cfg = SolverConfig {
        t_end: 0.3,
        ..Default::default()
    };
    let traj = run(&theta0, &cfg).unwrap();
    assert!(max_diff(&inverse_transform(&traj.final_state).unwrap(), &theta0) <= 1e-14);
}

#[test]
fn linear_flow_balances_energy_exactly() {
    let g = Grid::<f64>::cube(2, 32, 12.8).unwrap();
    let theta0 = random_smooth(&g, 11, 5).unwrap();
    let cfg = SolverConfig {
        alpha: 1.0,
        nu: 0.2,
        eps: 0.01,
        nonlinear: false,
        t_end: 1.0,
        record_every: 7,
        ..Default::default()
    };
    let traj = run(&theta0, &cfg).unwrap();
    let e0 = forward_transform(&theta0).unwrap().l2_norm_sq();
    for residual in energy_balance(&traj, &cfg).unwrap() {
        assert!(residual.abs() <= 1e-12 * e0, "{residual:e}");
    }
}

#[test]
fn inviscid_energy_does_not_grow_for_nonnegative_data() {
    let g = Grid::<f64>::cube(2, 64, 16.0).unwrap();
    let theta0 = centered_bump(&g, 1.0, 1.5).unwrap();
    let cfg = SolverConfig {
        alpha: 1.0,
        nu: 0.0,
        dt_max: 2e-3,
        t_end: 0.2,
        record_every: 5,
        ..Default::default()
    };
    let traj = run(&theta0, &cfg).unwrap();
    let energies: Vec<f64> = traj
        .fields()
        .unwrap()
        .iter()
        .map(|f| lp_norm(f, 2.0).unwrap().powi(2))
        .collect();
    assert!(energies.windows(2).all(|w| w[1] <= w[0] * (1.0 + 1e-9)), "{energies:?}");
    assert!(energies.last().unwrap() < &energies[0]);
}

#[test]
fn maximum_principle_on_bump() {
    let g = Grid::<f64>::cube(2, 64, 16.0).unwrap();
    let theta0 = centered_bump(&g, 1.0, 1.5).unwrap();
    let cfg = SolverConfig {
        alpha: 1.5,
        nu: 0.1,
        dt_max: 5e-3,
        t_end: 0.5,
        ..Default::default()
    };
    let traj = run(&theta0, &cfg).unwrap();
    for report in maximum_principle_check(&traj).unwrap() {
        assert!(report.pass, "{report}");
    }
}

#[test]
fn mollifier_preserves_mean_and_sign() {
    let g = Grid::<f64>::cube(2, 64, 16.0).unwrap();
    let theta0 = PhysicalField::from_fn(&g, |x| if (x[0] - 8.0).abs() < 3.0 && (x[1] - 8.0).abs() < 2.0 { 1.0 } else { 0.0 });
    let smooth = mollify(&theta0, 0.75).unwrap();
    assert!((smooth.mean() - theta0.mean()).abs() <= 1e-14);
    assert!(smooth.min() >= -1e-12);
    assert!(smooth.max() <= 1.0 + 1e-12);
    assert!(matches!(mollify(&theta0, 0.2), Err(Error::UnderResolvedMollifier { .. })));
}

#[test]
fn virial_kernel_is_reflection_symmetric() {
    let g = Grid::<f64>::cube(2, 32, 16.0).unwrap();
    let theta = cnqg_core::initial::gaussian_bump(&g, 1.0, 1.0, &[7.0, 9.0]).unwrap();
    let m = 32;
    let reflected = PhysicalField::from_values(
        &g,
        1,
        (0..g.len())
            .map(|p| {
                let idx = g.unravel(p);
                theta.values()[g.ravel(&[(m - idx[0]) % m, idx[1]])]
            })
            .collect(),
    )
    .unwrap();
    let spec = QuadratureSpec::default();
    let a = virial_rhs(&theta, &spec).unwrap();
    let b = virial_rhs(&reflected, &spec).unwrap();
    assert!((a - b).abs() <= 1e-12 * a);
}

#[test]
fn negative_bump_second_moment_shrinks() {
    let g = Grid::<f64>::cube(2, 64, 16.0).unwrap();
    let theta0 = negative_bump(&g, 1.0, 4.0).unwrap();
    let cfg = SolverConfig {
        alpha: 1.0,
        nu: 0.0,
        dt_max: 2e-3,
        t_end: 0.1,
        record_every: 10,
        ..Default::default()
    };
    let traj = run(&theta0, &cfg).unwrap();
    let w: Vec<f64> = traj
        .fields()
        .unwrap()
        .iter()
        .map(|f| second_moment(&f.map(|v| -v)).0)
        .collect();
    assert!(w.windows(2).all(|p| p[1] < p[0]), "{w:?}");
}

#[test]
fn uniqueness_monitor_accepts_scaling_exponents() {
    // alpha = 1.5, N = 2, q = 8: 1/p = 1 - 1/1.5 - 2/12 = 1/6.
    validate_uniqueness_exponents(2, 6.0, 8.0, 1.5).unwrap();
    let g = Grid::<f64>::cube(2, 32, 12.8).unwrap();
    let theta0 = centered_bump(&g, 1.0, 1.0).unwrap();
    let cfg = SolverConfig {
        alpha: 1.5,
        nu: 0.1,
        t_end: 0.2,
        ..Default::default()
    };
    let traj = run(&theta0, &cfg).unwrap();
    let monitor = uniqueness_class_monitor(&traj, 6.0, 8.0, 1.5).unwrap();
    assert!(monitor.integral.windows(2).all(|w| w[1] >= w[0]));
    assert!(monitor.lq.iter().all(|v| v.is_finite() && *v > 0.0));
}

#[test]
fn single_precision_run() {
    let g = Grid32::cube(2, 32, 12.8).unwrap();
    let theta0: PhysicalField32 = centered_bump(&g, 1.0, 1.0).unwrap();
    let cfg = SolverConfig::<f32> {
        alpha: 1.5,
        nu: 0.1,
        t_end: 0.2,
        ..Default::default()
    };
    let traj = run(&theta0, &cfg).unwrap();
    assert!(matches!(traj.status, RunStatus::Completed));
    assert!((inverse_transform(&traj.final_state).unwrap().mean() - theta0.mean()).abs() < 1e-5);
}
