//! Simulation and structure oracles for the spectral Navier-Stokes
//! machinery at small grid sizes (the acceptance suite repeats the
//! structural checks at the full desk-scale grid).

use dda_core::dda::{run, DaSystem, InitialGuess, ObservationOp, RunConfig, Schedule, Verdict};
use dda_core::integrators::{partition, step, StepperConfig};
use dda_core::nse2d::{
    apply_a, attractor_samples, band_forcing, bounds, energy_residual, norms, proj_lambda,
    random_dealiased, random_div_free, FourierGrid, NseParams, NseSolver, SpectralVelocity,
};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn two_pi() -> f64 {
    2.0 * std::f64::consts::PI
}

#[test]
fn parseval_spectral_vs_physical_quadrature() {
    let grid = FourierGrid::new(32, two_pi()).unwrap();
    let params = NseParams::new(grid.clone(), 0.1, band_forcing(&grid, 1.0, 1, 2)).unwrap();
    let mut solver = NseSolver::new(params);
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    for _ in 0..5 {
        let u = random_dealiased(&grid, &mut rng, 2.0);
        let ns = norms(&grid, &u);
        let (u1, u2) = solver.physical_components(&u);
        let cell = (grid.l() / grid.n() as f64).powi(2);
        let quad_l2: f64 = u1
            .iter()
            .zip(&u2)
            .map(|(a, b)| cell * (a * a + b * b))
            .sum();
        assert!(
            (quad_l2.sqrt() - ns.l2).abs() <= 1e-10 * ns.l2,
            "physical quadrature {} vs spectral {}",
            quad_l2.sqrt(),
            ns.l2
        );

        // gradient fields for the h1 norm
        let mut grads_sq = vec![0.0; u1.len()];
        for comp in [u.ux().to_vec(), u.uy().to_vec()] {
            for along_x in [true, false] {
                let mut g = SpectralVelocity::zero(&grid);
                for idx in 0..comp.len() {
                    let (kx, ky) = grid.wavevector(idx);
                    let k = if along_x { kx } else { ky };
                    g.ux_mut()[idx] = num_complex::Complex64::new(0.0, k) * comp[idx];
                }
                let (gp, _) = solver.physical_components(&g);
                for (acc, v) in grads_sq.iter_mut().zip(&gp) {
                    *acc += v * v;
                }
            }
        }
        let quad_h1: f64 = grads_sq.iter().map(|s| cell * s).sum();
        assert!(
            (quad_h1.sqrt() - ns.h1).abs() <= 1e-10 * ns.h1,
            "physical h1 quadrature {} vs spectral {}",
            quad_h1.sqrt(),
            ns.h1
        );
    }
}

#[test]
fn poincare_chain_all_six() {
    let grid = FourierGrid::new(32, two_pi()).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(22);
    let slack = 1.0 + 1e-12;
    for trial in 0..25 {
        let u = random_dealiased(&grid, &mut rng, 1.0 + 0.2 * trial as f64);
        let lambda = [1.0, 2.0, 4.0, 9.0, 16.0][trial % 5];
        let p = proj_lambda(&grid, lambda);
        let lam1 = grid.lambda_1();
        let ns = norms(&grid, &u);
        let np = norms(&grid, &p.project(&u));
        let nq = norms(&grid, &p.complement(&u));
        let nqa = norms(&grid, &apply_a(&grid, &p.complement(&u)));
        let npa = norms(&grid, &apply_a(&grid, &p.project(&u)));
        assert!(ns.l2 <= ns.h1 / lam1.sqrt() * slack);
        assert!(nq.l2 <= nq.h1 / lambda.sqrt() * slack);
        assert!(np.h1 <= lambda.sqrt() * np.l2 * slack);
        assert!(ns.h1 <= ns.h2 / lam1.sqrt() * slack);
        assert!(nq.h1 <= nqa.l2 / lambda.sqrt() * slack);
        assert!(npa.l2 <= lambda.sqrt() * np.h1 * slack);
    }
}

#[test]
fn splitting_inequality() {
    // |Au|^{1/4} <= 2^{1/8} (lambda^{1/8} ||u||^{1/4} + |Q_lambda A u|^{1/4})
    let grid = FourierGrid::new(32, two_pi()).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(23);
    for trial in 0..25 {
        let u = random_dealiased(&grid, &mut rng, 1.5);
        let lambda = [1.0, 3.0, 8.0, 20.0][trial % 4];
        let p = proj_lambda(&grid, lambda);
        let au = apply_a(&grid, &u);
        let qau = p.complement(&au);
        let lhs = norms(&grid, &au).l2.powf(0.25);
        let rhs = 2f64.powf(0.125)
            * (lambda.powf(0.125) * norms(&grid, &u).h1.powf(0.25)
                + norms(&grid, &qau).l2.powf(0.25));
        assert!(
            lhs <= rhs * (1.0 + 1e-12),
            "{lhs} > {rhs} at lambda {lambda}"
        );
    }
}

#[test]
fn spun_up_reference_respects_attractor_bound() {
    let grid = FourierGrid::new(32, two_pi()).unwrap();
    let params = NseParams::new(grid.clone(), 0.1, band_forcing(&grid, 1.0, 1, 2)).unwrap();
    let b = bounds(&params, 4.0, 1.0, 1.0).unwrap();
    let mut solver = NseSolver::new(params);
    let mut rng = ChaCha8Rng::seed_from_u64(24);
    let u0 = random_div_free(&grid, &mut rng, 6.0, 1.0);
    let cfg = StepperConfig::ifrk4(0.02);
    let states = attractor_samples(&mut solver, &u0, 100.0, 5.0, 10, &cfg).unwrap();
    for s in &states {
        let h1 = norms(&grid, s).h1;
        assert!(
            h1 * h1 <= b.k,
            "||U||^2 = {} above the attractor bound K = {}",
            h1 * h1,
            b.k
        );
    }
}

#[test]
fn growth_envelope_along_windows() {
    // ln ||delta(t)||^2 - ln ||delta(t_n)||^2 <= beta (t - t_n) + ln(1 + 1e-4)
    let grid = FourierGrid::new(32, two_pi()).unwrap();
    let params = NseParams::new(grid.clone(), 0.1, band_forcing(&grid, 1.0, 1, 2)).unwrap();
    let b = bounds(&params, 4.0, 1.0, 1.0).unwrap();
    let mut solver = NseSolver::new(params);
    let mut rng = ChaCha8Rng::seed_from_u64(25);
    let u0 = random_div_free(&grid, &mut rng, 6.0, 1.0);
    let cfg = StepperConfig::ifrk4(0.02);
    let mut u_ref = attractor_samples(&mut solver, &u0, 80.0, 1.0, 1, &cfg).unwrap()[0].clone();
    let obs = proj_lambda(&grid, 4.0);
    let mut u = dda_core::dda::assimilate_step(&SpectralVelocity::zero(&grid), &obs, &u_ref);

    let h = 0.25;
    for _ in 0..20 {
        let d_n = norms(&grid, &u_ref.sub(&u)).h1;
        let (n_full, rem) = partition(h, cfg.dt);
        let total = n_full + u64::from(rem > 0.0);
        for i in 0..total {
            let dt_i = if i < n_full { cfg.dt } else { rem };
            let tau = if i < n_full {
                (i + 1) as f64 * cfg.dt
            } else {
                h
            };
            u_ref = step(&mut solver, &u_ref, dt_i, cfg.scheme);
            u = step(&mut solver, &u, dt_i, cfg.scheme);
            let d = norms(&grid, &u_ref.sub(&u)).h1;
            if d_n > 0.0 && d > 0.0 {
                let lhs = 2.0 * (d.ln() - d_n.ln());
                let rhs = b.beta * tau + (1.0 + 1e-4f64).ln();
                assert!(lhs <= rhs, "growth {lhs} above envelope {rhs} at tau {tau}");
            }
        }
        u = dda_core::dda::assimilate_step(&u, &obs, &u_ref);
    }
}

#[test]
fn energy_identity_holds_on_attractor() {
    let grid = FourierGrid::new(32, two_pi()).unwrap();
    let params = NseParams::new(grid.clone(), 0.1, band_forcing(&grid, 1.0, 1, 2)).unwrap();
    let mut solver = NseSolver::new(params.clone());
    let mut rng = ChaCha8Rng::seed_from_u64(26);
    let u0 = random_div_free(&grid, &mut rng, 6.0, 1.0);
    let warm = attractor_samples(&mut solver, &u0, 50.0, 1.0, 1, &StepperConfig::ifrk4(0.02))
        .unwrap()[0]
        .clone();
    let dt = 2e-4;
    let cfg = StepperConfig::ifrk4(dt);
    let u1 = dda_core::integrators::integrate(&mut solver, &warm, 0.0, dt, &cfg).unwrap();
    let u2 = dda_core::integrators::integrate(&mut solver, &u1, 0.0, dt, &cfg).unwrap();
    let res = energy_residual(&params, &warm, &u1, &u2, dt);
    assert!(res <= 1e-6, "energy budget residual {res}");
}

#[test]
fn assimilation_error_series_reports_both_norms() {
    let grid = FourierGrid::new(16, two_pi()).unwrap();
    let params = NseParams::new(grid.clone(), 0.1, band_forcing(&grid, 1.0, 1, 2)).unwrap();
    let mut solver = NseSolver::new(params);
    let mut rng = ChaCha8Rng::seed_from_u64(27);
    let u0 = random_div_free(&grid, &mut rng, 6.0, 1.0);
    let cfg = StepperConfig::ifrk4(0.02);
    let r0 = attractor_samples(&mut solver, &u0, 50.0, 1.0, 1, &cfg).unwrap()[0].clone();
    let obs = proj_lambda(&grid, 4.0);
    let schedule = Schedule::uniform(0.25, 120).unwrap();
    let eta = InitialGuess::zero_like(&r0);
    let series = run(
        &mut solver,
        &r0,
        &obs,
        &schedule,
        &eta,
        &RunConfig::new(cfg),
    )
    .unwrap();
    assert!(series.samples.iter().all(|s| s.err_h1.is_some()));
    assert_eq!(series.verdict, Verdict::Converged);
    // post-update observed component matches the reference bitwise
    let (l2, _) = solver.error_norms(&r0, &obs.project(&r0));
    assert!(l2 > 0.0); // sanity: the projection is proper
}

#[test]
fn perfect_guess_stays_bitwise_identical() {
    let grid = FourierGrid::new(16, two_pi()).unwrap();
    let params = NseParams::new(grid.clone(), 0.1, band_forcing(&grid, 1.0, 1, 2)).unwrap();
    let mut solver = NseSolver::new(params);
    let mut rng = ChaCha8Rng::seed_from_u64(28);
    let r0 = random_div_free(&grid, &mut rng, 6.0, 1.0);
    let obs = proj_lambda(&grid, 2.0);
    let eta = InitialGuess::new(r0.clone(), &obs);
    let schedule = Schedule::uniform(0.1, 20).unwrap();
    let series = run(
        &mut solver,
        &r0,
        &obs,
        &schedule,
        &eta,
        &RunConfig::new(StepperConfig::ifrk4(0.01)),
    )
    .unwrap();
    assert!(series.samples.iter().all(|s| s.err_l2 == 0.0));
}
