use nalgebra::{Complex, DMatrix};
use zzfree::devices::builtin;
use zzfree::driven::zz_and_zx;
use zzfree::dynamics::*;
use zzfree::operators::{HilbertSpace, Label};
use zzfree::search::*;
use zzfree::spectral::static_zz;

fn space() -> HilbertSpace {
    HilbertSpace::uniform(3).unwrap()
}

fn genuine_idle(id: usize) -> f64 {
    find_static_zz_zeros(&builtin(id).unwrap().params, &space(), DEFAULT_RANGE).unwrap().genuine().unwrap().wc
}

fn sign_changes(id: usize, omega: f64) -> usize {
    let p = builtin(id).unwrap().params;
    let s = space();
    let z: Vec<f64> = (0..=260)
        .map(|k| zz_and_zx(&p.at_coupler(4.4 + 0.01 * k as f64), &s, omega).unwrap().0)
        .collect();
    z.windows(2).filter(|w| (w[0] < 0.0) != (w[1] < 0.0)).count()
}

#[test]
fn square_zx_pulse_is_zx90() {
    // H = (alpha/2) ZX for 1/(4 alpha) ns, no ZZ, no loss.
    let alpha = 0.005;
    let labels: Vec<Label> = vec![[0, 0, 0], [0, 0, 1], [1, 0, 0], [1, 0, 1]];
    let zx = DMatrix::from_row_slice(4, 4, &[
        0.0, 1.0, 0.0, 0.0,
        1.0, 0.0, 0.0, 0.0,
        0.0, 0.0, 0.0, -1.0,
        0.0, 0.0, -1.0, 0.0,
    ]);
    let run = |t: f64| {
        let inputs: Vec<DMatrix<Complex<f64>>> =
            pauli_basis().iter().map(|p| DMatrix::from_fn(4, 4, |r, c| p[(r, c)])).collect();
        let diss = Dissipator::new(&labels, &CoherenceSpec::closed()).unwrap();
        let x = lindblad_evolve(|_, h| h.copy_from(&(&zx * (alpha / 2.0))), &diss, &Batch::new(&inputs), 0.0, t, 0.01, |_, _| {})
            .unwrap();
        let images: Vec<_> = (0..16).map(|k| nalgebra::Matrix4::from_fn(|r, c| x.get(k)[(r, c)])).collect();
        zx90_process_fidelity(&images).unwrap().0
    };
    let f = run(1.0 / (4.0 * alpha));
    assert!(1.0 - (4.0 * f + 1.0) / 5.0 < 1e-4, "{f}");
    assert!(run(0.5 / (4.0 * alpha)) < 0.9);
}

#[test]
fn idling_populations_follow_t1() {
    let p = builtin(2).unwrap().params;
    let wgi = genuine_idle(2);
    let opts = SolverOptions { check: false, ..Default::default() };
    let model = SimulationModel::new(&p, wgi, wgi, opts).unwrap();
    let t1 = 20.0;
    let coh = CoherenceSpec::uniform(t1);
    let sched = PulseSchedule::switch(wgi, wgi, RampKind::Tanh, 50.0);
    let r = switch_fidelity_loss(&model, &sched, &coh).unwrap();
    let decay = |n: f64| 1.0 - (-n * 100.0 / (t1 * 1e3)).exp();
    assert!((r.losses[0] - decay(1.0)).abs() < 0.02 * decay(1.0), "{:?}", r.losses);
    assert!((r.losses[1] - decay(1.0)).abs() < 0.02 * decay(1.0), "{:?}", r.losses);
    assert!((r.losses[2] - decay(2.0)).abs() < 0.02 * decay(2.0), "{:?}", r.losses);
}

#[test]
fn ground_state_never_leaks() {
    let p = builtin(2).unwrap().params;
    let wgi = genuine_idle(2);
    let opts = SolverOptions { check: false, ..Default::default() };
    let model = SimulationModel::new(&p, wgi, wgi, opts).unwrap();
    let sched = PulseSchedule::switch(wgi, wgi, RampKind::Tanh, 30.0);
    let series = leakage_population(&model, &sched, &CoherenceSpec::uniform(200.0), [0, 0, 0], 5.0).unwrap();
    assert!(series.times.len() >= 12);
    assert!(series.peak().iter().all(|&x| x < 1e-8), "{:?}", series.peak());
}

#[test]
fn slow_switch_reaches_the_decoherence_floor() {
    let p = builtin(2).unwrap().params;
    let wgi = genuine_idle(2);
    let opts = SolverOptions { check: false, ..Default::default() };
    let coh = CoherenceSpec::uniform(200.0);
    let moving = SimulationModel::new(&p, wgi, 4.8, opts).unwrap();
    let parked = SimulationModel::new(&p, wgi, wgi, opts).unwrap();
    let tau0 = 200.0;
    let closed = switch_fidelity_loss(&moving, &PulseSchedule::switch(wgi, 4.8, RampKind::Tanh, tau0), &CoherenceSpec::closed())
        .unwrap();
    assert!(closed.losses.iter().all(|&l| l < 1e-6), "{:?}", closed.losses);
    let open = switch_fidelity_loss(&moving, &PulseSchedule::switch(wgi, 4.8, RampKind::Tanh, tau0), &coh).unwrap();
    let floor = switch_fidelity_loss(&parked, &PulseSchedule::switch(wgi, wgi, RampKind::Tanh, tau0), &coh).unwrap();
    for k in 0..3 {
        assert!((open.losses[k] - floor.losses[k]).abs() < 0.1 * floor.losses[k], "{:?} vs {:?}", open.losses, floor.losses);
    }
}

#[test]
fn operating_points_are_zz_free() {
    let s = space();
    for rec in zzfree::devices::builtin_all() {
        let scan = find_static_zz_zeros(&rec.params, &s, DEFAULT_RANGE).unwrap();
        for pt in &scan.points {
            let z = static_zz(&rec.params.at_coupler(pt.wc), &s).unwrap();
            assert!(z.abs() < 1e-6, "{} at {}: {z}", rec.id, pt.wc);
        }
    }
}

#[test]
fn fringe_is_flat_at_the_genuine_point() {
    let p = builtin(2).unwrap().params;
    let wgi = genuine_idle(2);
    let taus: Vec<f64> = (0..=10).map(|k| 500.0 * k as f64).collect();
    for om in [0.0, 0.01, 0.03, 0.05] {
        let f = ramsey_fringe(&p, &space(), wgi, om, &taus).unwrap();
        assert!(f.iter().all(|x| 1.0 - x < 1e-4), "{om}: {f:?}");
    }
    let away = ramsey_fringe(&p, &space(), 5.0, 0.03, &taus).unwrap();
    assert!(away.iter().any(|x| 1.0 - x > 0.1));
}

#[test]
fn drive_reshapes_the_zero_set() {
    assert_eq!(sign_changes(2, 0.0), 3);
    assert_eq!(sign_changes(2, 0.05), 1);
    assert!(sign_changes(6, 0.06) > sign_changes(6, 0.0));
}

#[test]
fn freedom_gap_and_reach() {
    let s = space();
    let p6 = builtin(6).unwrap().params;
    for wc in [5.15, 5.25, 5.35, 5.45] {
        assert_eq!(freedom_amplitude(&p6.at_coupler(wc), &s).unwrap(), None, "device 6 at {wc}");
    }
    assert!(freedom_amplitude(&p6.at_coupler(4.8), &s).unwrap().is_some());
    let p1 = builtin(1).unwrap().params;
    for wc in [4.8, 5.0, 5.5] {
        let om = freedom_amplitude(&p1.at_coupler(wc), &s).unwrap().expect("device 1 has a freedom amplitude");
        assert!(om < 0.06, "device 1 at {wc}: {om}");
        assert!(zz_and_zx(&p1.at_coupler(wc), &s, om).unwrap().0.abs() < 1e-6);
    }
    assert_eq!(freedom_amplitudes(&builtin(2).unwrap().params.at_coupler(genuine_idle(2)), &s).unwrap(), vec![0.0]);
}

#[test]
fn quadratic_factor_signs() {
    let s = space();
    for id in 1..=4 {
        let p = builtin(id).unwrap().params;
        for k in 0..=15 {
            let wc = 4.5 + 0.1 * k as f64;
            assert!(quadratic_factor(&p.at_coupler(wc), &s).unwrap() < 0.0, "device {id} at {wc}");
        }
    }
    for id in [5, 6] {
        let p = builtin(id).unwrap().params;
        for k in 0..=24 {
            let wc = 4.6 + 0.1 * k as f64;
            assert!(quadratic_factor(&p.at_coupler(wc), &s).unwrap() > 0.0, "device {id} at {wc}");
        }
    }
}

#[test]
fn small_drive_exponents() {
    let p = builtin(2).unwrap().params.at_coupler(4.8);
    let s = space();
    let z0 = static_zz(&p, &s).unwrap();
    let om = log_grid(1e-4, 1e-3, 8);
    let a = leading_exponent(|o| Ok(zz_and_zx(&p, &s, o)?.0 - z0), &om).unwrap();
    let b = leading_exponent(|o| Ok(zz_and_zx(&p, &s, o)?.1), &om).unwrap();
    assert!((a - 2.0).abs() < 0.1, "{a}");
    assert!((b - 1.0).abs() < 0.05, "{b}");
}

#[test]
fn gate_length_from_rate() {
    assert_eq!(gate_length(0.005).unwrap(), (90.0, 50.0));
    assert!(gate_length(-0.001).is_err());
}
