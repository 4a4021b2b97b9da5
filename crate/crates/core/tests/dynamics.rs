use num_complex::Complex64;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::f64::consts::PI;
use wgnls::dynamics::*;
use wgnls::fields::*;
use wgnls::lattice::{lambda_f64, LatticeBox, ThetaVector};

fn cz(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn params(k_inner: u32, k_outer: u32, m: f64) -> SystemParams {
    SystemParams { k_inner, k_outer, m, nonlinearity: Nonlinearity::Defocusing, tail_norm: Default::default() }
}

fn random_field(grid: XiGrid, lattice: LatticeBox, support: u32, scale: f64, seed: u64) -> SpectralField {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    SpectralField::from_fn(grid, lattice, |_, p| {
        if p.iter().all(|x| x.unsigned_abs() as u32 <= support) {
            cz(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)) * scale
        } else {
            cz(0.0, 0.0)
        }
    })
}

#[test]
fn zero_field_has_zero_rhs() {
    let t = ThetaVector::sqrt_primes(2).unwrap();
    let sys = QuasiResonantSystem::build(&t, params(0, 2, 2.0)).unwrap();
    let u = SpectralField::zeros(XiGrid::new(1.0, 8).unwrap(), LatticeBox::new(2, 2));
    assert!(rhs_truncated(&u, 0.3, &sys).unwrap().max_abs() == 0.0);
    assert!(rhs_truncated(&u, 0.3, &QuasiResonantSystem::build(&t, params(0, 3, 0.0)).unwrap()).is_err());
}

#[test]
fn single_mode_rhs() {
    let t = ThetaVector::sqrt_primes(2).unwrap();
    let sys = QuasiResonantSystem::build(&t, params(0, 2, 3.0)).unwrap();
    let grid = XiGrid::new(1.0, 8).unwrap();
    let b = LatticeBox::new(2, 2);
    let a = cz(0.3, -0.7);
    let mut u = SpectralField::zeros(grid, b);
    u.set(1, &[1, -2], a).unwrap();
    let du = rhs_truncated(&u, 1.7, &sys).unwrap();
    let expect = cz(0.0, -1.0) * a.norm_sqr() * a;
    assert!((du.get(1, &[1, -2]) - expect).norm() < 1e-15);
    assert!((du.max_abs() - expect.norm()).abs() < 1e-15);
}

#[test]
fn two_mode_rhs_matches_naive_sum() {
    let t = ThetaVector::sqrt_primes(1).unwrap();
    let sys = QuasiResonantSystem::build(&t, params(1, 1, 0.0)).unwrap();
    assert_eq!(sys.resonant.len(), 15);
    let b = LatticeBox::new(1, 1);
    let mut u = SpectralField::zeros(XiGrid::new(1.0, 8).unwrap(), b);
    u.set(0, &[-1], cz(0.4, 0.1)).unwrap();
    u.set(0, &[1], cz(-0.2, 0.5)).unwrap();
    let du = rhs_truncated(&u, 0.0, &sys).unwrap();
    let val = |p: i64| u.get(0, &[p]);
    for p in -1..=1i64 {
        let mut acc = cz(0.0, 0.0);
        for q in -1..=1i64 {
            for r in -1..=1i64 {
                let s = p + r - q;
                if s.abs() <= 1 && p * p + r * r == q * q + s * s {
                    acc += val(q) * val(s) * val(r).conj();
                }
            }
        }
        assert!((du.get(0, &[p]) - cz(0.0, -1.0) * acc).norm() < 1e-15, "p = {p}");
    }
}

#[test]
fn empty_system_gauged_is_linear_rotation() {
    let t = ThetaVector::sqrt_primes(1).unwrap();
    let sys = QuasiResonantSystem::build(&t, params(0, 0, 0.0)).unwrap();
    let grid = XiGrid::new(1.0, 8).unwrap();
    let b = LatticeBox::new(1, 1);
    let v = random_field(grid, b, 1, 1.0, 3);
    let dv = rhs_gauged(&v, 0.0, &sys).unwrap();
    for (j, xi) in grid.nodes().iter().enumerate() {
        for p in [-1i64, 1] {
            let w = xi * xi + lambda_f64(&t, &[p]);
            assert!((dv.get(j, &[p]) - cz(0.0, -w) * v.get(j, &[p])).norm() < 1e-14);
        }
    }
}

#[test]
fn single_mode_closed_forms() {
    let t = ThetaVector::sqrt_primes(2).unwrap();
    let sys = QuasiResonantSystem::build(&t, params(3, 3, 0.0)).unwrap();
    let grid = XiGrid::new(1.0, 8).unwrap();
    let b = LatticeBox::new(2, 3);
    let a = cz(0.6, 0.3);
    let p = [1i64, 1];
    let mut u0 = SpectralField::zeros(grid, b);
    u0.set(0, &p, a).unwrap();
    let mut cfg = IntegratorConfig::rk45(1e-10, (0.0, 3.0), 1.0);
    cfg.keep_states = true;
    let tr = integrate(&sys, &u0, &cfg).unwrap();
    let gauged = integrate_flow(&sys, &u0, &cfg, Flow::Gauged, &NormSpec::for_dim(2)).unwrap();
    let w = grid.node(0).powi(2) + lambda_f64(&t, &p);
    for (i, &time) in tr.times.iter().enumerate() {
        let exact = a * Complex64::from_polar(1.0, -a.norm_sqr() * time);
        assert!((tr.states[i].get(0, &p) - exact).norm() < 1e-8);
        let exact_g = a * Complex64::from_polar(1.0, -(w + a.norm_sqr()) * time);
        assert!((gauged.states[i].get(0, &p) - exact_g).norm() < 1e-8);
    }
}

#[test]
fn gauge_equivalence() {
    let t = ThetaVector::sqrt_primes(2).unwrap();
    let sys = QuasiResonantSystem::build(&t, params(0, 3, 2.0)).unwrap();
    assert!(!sys.quasi.is_empty());
    let grid = XiGrid::new(0.5, 8).unwrap();
    let b = LatticeBox::new(2, 3);
    let u0 = random_field(grid, b, 3, 0.15, 11);
    let cfg = IntegratorConfig::rk45(1e-10, (0.0, 2.0), 1.0);
    let tr = integrate(&sys, &u0, &cfg).unwrap();
    let gv = integrate_flow(&sys, &u0, &cfg, Flow::Gauged, &NormSpec::for_dim(2)).unwrap();
    let v = gv.final_state.unwrap();
    let back = gauge_transform(&v, &t, 2.0, GaugeDirection::Inverse).unwrap();
    let u = tr.final_state.unwrap();
    assert!(back.max_abs_diff(&u) < 1e-6, "{}", back.max_abs_diff(&u));
}

#[test]
fn time_reversal() {
    let t = ThetaVector::sqrt_primes(2).unwrap();
    let sys = QuasiResonantSystem::build(&t, params(0, 2, 2.0)).unwrap();
    let grid = XiGrid::new(1.0, 8).unwrap();
    let b = LatticeBox::new(2, 2);
    let u0 = random_field(grid, b, 2, 0.3, 5);
    let tol = 1e-10;
    let fwd = integrate(&sys, &u0, &IntegratorConfig::rk45(tol, (0.0, 2.0), 2.0)).unwrap();
    let w = fwd.final_state.unwrap().conj();
    let back = integrate(&sys, &w, &IntegratorConfig::rk45(tol, (-2.0, 0.0), 2.0)).unwrap();
    let r = back.final_state.unwrap().conj();
    assert!(r.max_abs_diff(&u0) < 10.0 * tol * 10.0, "{}", r.max_abs_diff(&u0));
}

#[test]
fn slice_mass_is_conserved() {
    let t = ThetaVector::sqrt_primes(2).unwrap();
    let sys = QuasiResonantSystem::build(&t, params(0, 3, 2.0)).unwrap();
    let u0 = random_field(XiGrid::new(1.0, 8).unwrap(), LatticeBox::new(2, 3), 3, 0.2, 9);
    let tr = integrate(&sys, &u0, &IntegratorConfig::rk45(1e-10, (0.0, 5.0), 1.0)).unwrap();
    assert!(tr.drift.slice_mass_drift < 1e-8, "{}", tr.drift.slice_mass_drift);
    assert_eq!(tr.times.len(), 6);
    assert!(tr.times.windows(2).all(|w| w[1] > w[0]));
}

#[test]
fn rk4_agrees_with_rk45() {
    let t = ThetaVector::sqrt_primes(1).unwrap();
    let sys = QuasiResonantSystem::build(&t, params(0, 2, 1.0)).unwrap();
    let u0 = random_field(XiGrid::new(1.0, 8).unwrap(), LatticeBox::new(1, 2), 2, 0.4, 2);
    let a = integrate(&sys, &u0, &IntegratorConfig::rk45(1e-11, (0.0, 1.0), 1.0)).unwrap();
    let b = integrate(&sys, &u0, &IntegratorConfig::rk4(1e-3, (0.0, 1.0), 1.0)).unwrap();
    assert!(a.final_state.unwrap().max_abs_diff(&b.final_state.unwrap()) < 1e-9);
    assert!(IntegratorConfig::rk45(0.1, (0.0, 1.0), 1.0).validate().is_err());
    assert!(IntegratorConfig::rk4(-1.0, (0.0, 1.0), 1.0).validate().is_err());
}

#[test]
fn nan_data_is_rejected() {
    let t = ThetaVector::sqrt_primes(1).unwrap();
    let sys = QuasiResonantSystem::build(&t, params(0, 1, 0.0)).unwrap();
    let mut u0 = SpectralField::zeros(XiGrid::new(1.0, 8).unwrap(), LatticeBox::new(1, 1));
    u0.set(0, &[0], cz(f64::NAN, 0.0)).unwrap();
    assert!(integrate(&sys, &u0, &IntegratorConfig::rk45(1e-8, (0.0, 1.0), 1.0)).is_err());
}

#[test]
fn analyticity_warning() {
    let t = ThetaVector::sqrt_primes(1).unwrap();
    let sys = QuasiResonantSystem::build(&t, params(0, 1, 0.0)).unwrap();
    let mut u0 = SpectralField::zeros(XiGrid::new(1.0, 8).unwrap(), LatticeBox::new(1, 1));
    u0.set(0, &[0], cz(2.0, 0.0)).unwrap();
    let tr = integrate(&sys, &u0, &IntegratorConfig::rk45(1e-8, (0.0, 1.0), 1.0)).unwrap();
    assert!(tr.warnings.iter().any(|w| w.contains("analyticity")));
}

#[test]
fn protected_support_does_not_grow() {
    let t = ThetaVector::sqrt_primes(2).unwrap();
    let sys = QuasiResonantSystem::build(&t, params(6, 6, 1.0)).unwrap();
    let u0 = random_field(XiGrid::new(1.0, 8).unwrap(), LatticeBox::new(2, 6), 2, 0.3, 4);
    let tr = integrate(&sys, &u0, &IntegratorConfig::rk45(1e-10, (0.0, 3.0), 1.0)).unwrap();
    assert_eq!(tr.drift.max_outside_protected, 0.0);
    assert!(tr.support_radius.iter().all(|r| *r == Some(2)));
    for (_, d) in &tr.drift.k_norm_drift {
        assert!(*d < 1e-6);
    }
}

#[test]
fn effective_flow_closed_form_and_composition() {
    let t = ThetaVector::sqrt_primes(1).unwrap();
    let sys = QuasiResonantSystem::build(&t, params(2, 2, 0.0)).unwrap();
    let grid = XiGrid::new(1.0, 8).unwrap();
    let b = LatticeBox::new(1, 2);
    let a = cz(0.5, -0.2);
    let mut g = SpectralField::zeros(grid, b);
    g.set(1, &[1], a).unwrap();
    let m = Method::Rk45 { tol: 1e-11 };
    let (t0, t1, t2) = (2.0, 7.0, 40.0);
    let g2 = effective_flow_step(&g, t0, t2, &sys, m).unwrap();
    let exact = a * Complex64::from_polar(1.0, -PI * a.norm_sqr() * (t2 / t0).ln());
    assert!((g2.get(1, &[1]) - exact).norm() < 1e-9);
    assert_eq!(effective_flow_step(&g, t0, t0, &sys, m).unwrap().amps, g.amps);
    let rich = random_field(grid, b, 2, 0.3, 8);
    let sys_q = QuasiResonantSystem::build(&t, params(0, 2, 0.5)).unwrap();
    let direct = effective_flow_step(&rich, t0, t2, &sys_q, m).unwrap();
    let mid = effective_flow_step(&rich, t0, t1, &sys_q, m).unwrap();
    let two = effective_flow_step(&mid, t1, t2, &sys_q, m).unwrap();
    assert!(direct.max_abs_diff(&two) < 1e-9);
    assert!(effective_flow_step(&g, 0.0, 1.0, &sys, m).is_err());
}

#[test]
fn claim_identity_on_single_mode_is_zero() {
    let t = ThetaVector::sqrt_primes(2).unwrap();
    let sys = QuasiResonantSystem::build(&t, params(6, 6, 0.0)).unwrap();
    let b = LatticeBox::new(2, 6);
    let mut z = vec![cz(0.0, 0.0); b.len()];
    z[b.index_of(&[1, -2]).unwrap()] = cz(0.3, 0.8);
    assert_eq!(claim_identity_check(&z, &b, &sys, 2.5, 0.0).unwrap(), 0.0);
}

#[test]
fn claim_identity_random_slices() {
    let t = ThetaVector::sqrt_primes(2).unwrap();
    let sys = QuasiResonantSystem::build(&t, params(6, 6, 0.0)).unwrap();
    let b = LatticeBox::new(2, 6);
    let mut rng = ChaCha8Rng::seed_from_u64(42);
    for _ in 0..100 {
        let z: Vec<Complex64> = b
            .modes()
            .map(|p| if p.iter().all(|x| x.abs() <= 2) { cz(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)) } else { cz(0.0, 0.0) })
            .collect();
        for k in [0.0, 1.0, 2.5] {
            let d = claim_identity_check(&z, &b, &sys, k, 0.0).unwrap();
            assert!(d <= 1e-12, "k = {k}: {d}");
        }
    }
}

#[test]
fn claim_identity_negative_control() {
    let t = ThetaVector::sqrt_primes(2).unwrap();
    let sys = QuasiResonantSystem::build(&t, params(0, 4, 2.0)).unwrap();
    assert!(!sys.quasi.is_empty());
    let b = LatticeBox::new(2, 4);
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let z: Vec<Complex64> = b.modes().map(|_| cz(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))).collect();
    assert!(claim_identity_check(&z, &b, &sys, 2.5, 0.9).unwrap() > 1e-6);
}

fn small_waveguide(line: LineSpec) -> (ThetaVector, WaveguideGrid) {
    (ThetaVector::sqrt_primes(1).unwrap(), WaveguideGrid { line, torus_points: 8 })
}

#[test]
fn plane_wave_on_torus() {
    let (t, grid) = small_waveguide(LineSpec::Periodic { count: 16, length: 2.0 * PI });
    let wg = Waveguide::new(&t, grid).unwrap();
    let a = cz(0.3, 0.1);
    let p = 2i64;
    let th = t.squares_f64()[0].sqrt();
    let u0 = wg.sample(&t, |_, y| a * Complex64::from_polar(1.0, p as f64 * th * y[0]));
    let cfg = SplitStepConfig { dt: 0.01, steps: 200, record_every: 50, nonlinear: true, nonlinearity: Nonlinearity::Defocusing, start_time: 0.0 };
    let tr = split_step_with(&wg, &u0, &cfg).unwrap();
    let time = 2.0;
    let lam = lambda_f64(&t, &[p]);
    let exact = wg.sample(&t, |_, y| a * Complex64::from_polar(1.0, p as f64 * th * y[0] - (lam + a.norm_sqr()) * time));
    let err = tr.final_physical.iter().zip(&exact).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max);
    assert!(err < 1e-12, "{err}");
    assert_eq!(tr.times.len(), 5);
}

#[test]
fn linear_split_step_matches_free_propagator() {
    let (t, grid) = small_waveguide(LineSpec::Periodic { count: 512, length: 80.0 });
    let wg = Waveguide::new(&t, grid).unwrap();
    let u0 = wg.sample(&t, |x, _| cz((-x * x).exp(), 0.0));
    let cfg = SplitStepConfig { dt: 0.05, steps: 40, record_every: 10, nonlinear: false, nonlinearity: Nonlinearity::Defocusing, start_time: 0.0 };
    let tr = split_step_with(&wg, &u0, &cfg).unwrap();
    let m0 = tr.mass[0];
    assert!(tr.mass.iter().all(|m| ((m - m0) / m0).abs() < 1e-13));
    assert!((m0 - (PI / 2.0).sqrt() * wg.torus_volume()).abs() < 1e-10);
    let time = 2.0;
    let exact = wg.sample(&t, |x, _| {
        let den = cz(1.0, 4.0 * time);
        (-(x * x) / den).exp() / den.sqrt()
    });
    let err = tr.final_physical.iter().zip(&exact).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max);
    assert!(err < 1e-10, "{err}");
    assert!(tr.warnings.is_empty());
}

#[test]
fn hamiltonian_drift_shrinks_with_step() {
    let (t, grid) = small_waveguide(LineSpec::Periodic { count: 256, length: 40.0 });
    let wg = Waveguide::new(&t, grid).unwrap();
    let th = t.squares_f64()[0].sqrt();
    let u0 = wg.sample(&t, |x, y| cz(0.2 * (-x * x / 2.0).exp() * (1.0 + 0.5 * (th * y[0]).cos()), 0.0));
    let run = |dt: f64, steps: u64| {
        let cfg = SplitStepConfig { dt, steps, record_every: steps, nonlinear: true, nonlinearity: Nonlinearity::Defocusing, start_time: 0.0 };
        let tr = split_step_with(&wg, &u0, &cfg).unwrap();
        let h0 = tr.hamiltonian[0];
        (tr.hamiltonian.last().unwrap() - h0).abs() / h0.abs()
    };
    let coarse = run(0.01, 100);
    let fine = run(0.005, 200);
    assert!(fine <= 1e-6, "{fine}");
    assert!(fine < coarse / 3.0, "{coarse} {fine}");
}

#[test]
fn split_step_guards() {
    let (t, grid) = small_waveguide(LineSpec::Periodic { count: 32, length: 4.0 });
    let wg = Waveguide::new(&t, grid).unwrap();
    let big = vec![cz(3.0, 0.0); wg.len()];
    let cfg = SplitStepConfig { dt: 0.1, steps: 1, record_every: 1, nonlinear: true, nonlinearity: Nonlinearity::Defocusing, start_time: 0.0 };
    assert!(matches!(split_step_with(&wg, &big, &cfg), Err(wgnls::Error::AmplitudeTooLarge(_))));
    assert!(split_step_with(&wg, &big[1..], &cfg).is_err());
    let rough = wg.sample(&t, |x, _| cz(if x.abs() < 0.3 { 0.1 } else { 0.0 }, 0.0));
    let tr = split_step_with(&wg, &rough, &cfg).unwrap();
    assert!(tr.warnings.iter().any(|w| w.contains("aliasing")));
    assert!(wg.spectral_field(&rough, 1, 0.0).is_err());
    assert!(Waveguide::new(&t, WaveguideGrid { torus_points: 7, ..grid }).is_err());
}

#[test]
fn matched_grid_round_trip() {
    let t = ThetaVector::sqrt_primes(2).unwrap();
    let xg = XiGrid::new(PI, 32).unwrap();
    let wg = Waveguide::new(&t, WaveguideGrid { line: LineSpec::Matched { grid: xg }, torus_points: 8 }).unwrap();
    let f = random_field(xg, LatticeBox::new(2, 3), 3, 1.0, 1);
    let phys = wg.physical_from_field(&f).unwrap();
    let mut spec = phys.clone();
    wg.to_spectral(&mut spec);
    let back = wg.spectral_field(&spec, 3, 0.0).unwrap();
    assert!(back.max_abs_diff(&f) < 1e-12);
    let l2: f64 = f.amps.iter().map(|z| z.norm_sqr()).sum::<f64>() * xg.spacing() * 2.0 * PI * wg.torus_volume();
    assert!((wg.mass(&phys) - l2).abs() < 1e-10 * l2);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn rhs_is_cubic(seed in 0u64..1000, s in 0.1f64..3.0) {
        let t = ThetaVector::sqrt_primes(2).unwrap();
        let sys = QuasiResonantSystem::build(&t, params(0, 2, 2.0)).unwrap();
        let u = random_field(XiGrid::new(1.0, 8).unwrap(), LatticeBox::new(2, 2), 2, 1.0, seed);
        let mut us = u.clone();
        us.scale(cz(s, 0.0));
        let mut a = rhs_truncated(&u, 0.4, &sys).unwrap();
        a.scale(cz(s * s * s, 0.0));
        let b = rhs_truncated(&us, 0.4, &sys).unwrap();
        prop_assert!(a.max_abs_diff(&b) < 1e-12 * (1.0 + a.max_abs()));
    }
}

#[test]
fn closure_restriction_is_exact() {
    let t = ThetaVector::sqrt_primes(2).unwrap();
    let sys = QuasiResonantSystem::build(&t, params(0, 3, 2.0)).unwrap();
    let b = LatticeBox::new(2, 3);
    let u = random_field(XiGrid::new(1.0, 8).unwrap(), b, 1, 0.5, 21);
    let full = Kernel::new(&sys, &b).unwrap();
    let mut small = Kernel::new(&sys, &b).unwrap();
    let closure = small.restrict_to_closure(&Kernel::support_of(&u));
    assert!(small.quartet_count() < full.quartet_count());
    let mut scratch = vec![Complex64::new(0.0, 0.0); b.len()];
    let mut closure_field = u.clone();
    for j in 0..u.grid.count {
        full.truncated(1.0, u.slice(j), 0.7, &mut scratch);
        let mut other = vec![Complex64::new(0.0, 0.0); b.len()];
        small.truncated(1.0, u.slice(j), 0.7, &mut other);
        assert_eq!(scratch, other);
        closure_field.slice_mut(j).iter_mut().zip(&closure).for_each(|(z, &a)| if !a { assert_eq!(*z, Complex64::new(0.0, 0.0)) });
    }
}
