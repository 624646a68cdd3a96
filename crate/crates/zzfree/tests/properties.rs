use nalgebra::{Complex, DMatrix};
use proptest::prelude::*;
use zzfree::circuit::{build_static_hamiltonian, rotating_frame_hamiltonian, CircuitParams, DriveSpec};
use zzfree::devices::{builtin, make_params, parse_device, write_device, DeviceRecord};
use zzfree::driven::{effective_pauli_coefficients, zz_and_zx};
use zzfree::dynamics::{
    coupler_ramp_envelope, cr_pulse_envelope, lindblad_evolve, Batch, CoherenceSpec, Dissipator, PulseSchedule,
    RampKind,
};
use zzfree::export::{Cell, Format, SweepResult};
use zzfree::operators::{HilbertSpace, Label};
use zzfree::search::fit_exponents_with;
use zzfree::spectral::{npad_static_zz, static_zz, zz_swt};

fn space() -> HilbertSpace {
    HilbertSpace::uniform(3).unwrap()
}

fn device_at(id: usize, wc: f64) -> CircuitParams {
    builtin(id).unwrap().params.at_coupler(wc)
}

/// Coupler frequencies at least 300 MHz above both qubits, where every
/// computational label is unambiguous.
fn dispersive_point() -> impl Strategy<Value = (usize, f64)> {
    (1usize..=7, 0.0f64..1.0).prop_map(|(id, u)| {
        let p = builtin(id).unwrap().params;
        let lo = p.w1.max(p.w2) + 0.3;
        (id, lo + u * (7.0 - lo))
    })
}

fn swapped(p: &CircuitParams) -> CircuitParams {
    let mut q = p.clone();
    std::mem::swap(&mut q.w1, &mut q.w2);
    std::mem::swap(&mut q.d1, &mut q.d2);
    std::mem::swap(&mut q.g1c, &mut q.g2c);
    q.geometry = None;
    q
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(50))]

    #[test]
    fn static_hamiltonian_is_symmetric(id in 1usize..=7, wc in 4.4f64..7.0) {
        let h = build_static_hamiltonian(&device_at(id, wc), &space());
        prop_assert!((&h - h.transpose()).amax() == 0.0);
    }

    #[test]
    fn npad_agrees_with_exact((id, wc) in dispersive_point()) {
        let p = device_at(id, wc);
        let s = space();
        let exact = static_zz(&p, &s).unwrap();
        let npad = npad_static_zz(&p, &s).unwrap();
        prop_assert!((exact - npad).abs() < 1e-6, "device {id} at {wc}: {exact} vs {npad}");
    }

    #[test]
    fn qubit_swap_leaves_zz(id in 1usize..=7, wc in 4.7f64..7.0) {
        let p = device_at(id, wc);
        let s = space();
        let a = static_zz(&p, &s).unwrap();
        let b = static_zz(&swapped(&p), &s).unwrap();
        prop_assert!((a - b).abs() < 1e-12, "{a} vs {b}");
    }

    #[test]
    fn la_is_unitary_and_exact(id in 1usize..=7, wc in 4.7f64..7.0, om in 0.0f64..0.06) {
        let d = effective_pauli_coefficients(&device_at(id, wc), &DriveSpec::cr(om), &space()).unwrap();
        prop_assert!(d.unitarity_error < 1e-10, "{}", d.unitarity_error);
        prop_assert!(d.offblock_residual < 1e-10, "{}", d.offblock_residual);
        prop_assert!((d.pauli.reconstruct() - &d.block).amax() < 1e-12);
    }

    #[test]
    fn frame_hamiltonian_is_symmetric(id in 1usize..=7, wc in 4.7f64..7.0, om in 0.0f64..0.06) {
        let f = rotating_frame_hamiltonian(&device_at(id, wc), &DriveSpec::cr(om), &space()).unwrap();
        prop_assert!((&f.hamiltonian - f.hamiltonian.transpose()).amax() < 1e-15);
    }

    #[test]
    fn undriven_limit_is_static(id in 1usize..=7, wc in 4.7f64..7.0) {
        let p = device_at(id, wc);
        let s = space();
        let z0 = static_zz(&p, &s).unwrap();
        let (z, a) = zz_and_zx(&p, &s, 0.0).unwrap();
        prop_assert!((z - z0).abs() < 1e-9);
        prop_assert!(a.abs() < 1e-12);
    }

    #[test]
    fn device_text_roundtrip(
        w1 in 3.5f64..5.5, w2 in 3.5f64..5.5, g12 in 0.0f64..0.02,
        dc in -0.3f64..0.3, d1 in -0.4f64..0.6, d2 in -0.4f64..-0.1,
    ) {
        let rec = DeviceRecord {
            id: "random".into(),
            params: make_params(w1, w2, g12, dc, d1, d2, 0.095, 4.8),
            coupling: 0.095,
            wc_ref: 4.8,
            coherence: Some(CoherenceSpec { t1: [80.0, 5.0, 120.0], t2: [60.0, 3.0, 200.0] }),
            note: String::new(),
        };
        let back = parse_device(&write_device(&rec), "mem").unwrap();
        prop_assert_eq!(back.params, rec.params);
        prop_assert_eq!(back.coherence, rec.coherence);
    }

    #[test]
    fn ramps_stay_between_endpoints(tau0 in 1.0f64..100.0, t in -10.0f64..200.0, gauss in any::<bool>()) {
        let kind = if gauss { RampKind::FlatTopGaussian } else { RampKind::Tanh };
        let w = coupler_ramp_envelope(kind, 6.5, 4.8, tau0, t).unwrap();
        prop_assert!((4.8 - 1e-12..=6.5 + 1e-12).contains(&w));
    }

    #[test]
    fn schedules_are_continuous(
        tau0 in 5.0f64..60.0, rise in 5.0f64..30.0, flat in 0.0f64..80.0, gauss in any::<bool>(),
    ) {
        let kind = if gauss { RampKind::FlatTopGaussian } else { RampKind::Tanh };
        let s = PulseSchedule {
            wc_idle: 6.5, wc_ent: 4.8, ramp: kind, tau0, omega: 0.03, target_amplitude: 0.001,
            rise, fall: rise, flat,
        };
        let n = 4000;
        let h = s.total() / n as f64;
        let (mut c, mut d) = (s.coupler(0.0), s.drive(0.0));
        prop_assert!((c - 6.5).abs() < 1e-12 && d.abs() < 1e-12);
        for k in 1..=n {
            let t = k as f64 * h;
            let (c2, d2) = (s.coupler(t), s.drive(t));
            prop_assert!((c2 - c).abs() < 10.0 * 1.7 / tau0 * h, "coupler jump at {t}");
            prop_assert!((d2 - d).abs() < 0.05, "drive jump at {t}");
            prop_assert!((0.0..=1.0 + 1e-12).contains(&d2));
            c = c2;
            d = d2;
        }
        prop_assert!((c - 6.5).abs() < 1e-9 && d.abs() < 1e-12);
    }

    #[test]
    fn cr_envelope_is_flat_in_the_middle(rise in 1.0f64..30.0, tau in 0.0f64..50.0, u in 0.0f64..1.0) {
        let t = rise + u * tau;
        prop_assert!((cr_pulse_envelope(0.04, rise, rise, tau, t) - 0.04).abs() < 1e-15);
    }

    #[test]
    fn lindblad_preserves_trace_and_positivity(seed in any::<u64>(), t1 in 0.5f64..50.0, ratio in 0.1f64..2.0) {
        let labels: Vec<Label> = vec![[0, 0, 0], [0, 0, 1], [1, 0, 0], [1, 0, 1], [0, 1, 0], [0, 0, 2]];
        let m = labels.len();
        let mut state = seed | 1;
        let mut rnd = move || {
            state ^= state << 13;
            state ^= state >> 7;
            state ^= state << 17;
            (state >> 11) as f64 / (1u64 << 53) as f64 - 0.5
        };
        let a = DMatrix::from_fn(m, m, |_, _| rnd() * 0.2);
        let h0 = &a + a.transpose();
        let psi: Vec<f64> = (0..m).map(|_| rnd()).collect();
        let norm = psi.iter().map(|x| x * x).sum::<f64>().sqrt();
        let psi: Vec<f64> = psi.iter().map(|x| x / norm).collect();
        let coh = CoherenceSpec { t1: [t1; 3], t2: [t1 * ratio; 3] };
        let diss = Dissipator::new(&labels, &coh).unwrap();
        let x0 = Batch::from_real_states(&[psi]);
        let mut worst: f64 = 0.0;
        let x = lindblad_evolve(
            |t, h| { h.copy_from(&(&h0 * (1.0 + 0.5 * (0.3 * t).sin()))) },
            &diss, &x0, 0.0, 40.0, 0.005,
            |_, b| {
                let rho = b.get(0);
                let eig = rho.clone().symmetric_eigen();
                worst = worst.min(eig.eigenvalues.min());
            },
        ).unwrap();
        prop_assert!((x.trace(0) - 1.0).abs() < 1e-8);
        prop_assert!(worst > -1e-8, "eigenvalue {worst}");
        let rho = x.get(0);
        prop_assert!((&rho - rho.adjoint()).iter().all(|z| z.norm() < 1e-12));
    }

    #[test]
    fn export_is_deterministic(xs in prop::collection::vec(-1e6f64..1e6, 1..20)) {
        let mut t = SweepResult::new("prop", "dev", 3, &["i", "x", "tag"]);
        for (i, x) in xs.iter().enumerate() {
            t.push(vec![Cell::from(i), Cell::from(*x), Cell::from(if i % 2 == 0 { "a" } else { "b" })]).unwrap();
        }
        t.note("seed", "fixed");
        for f in [Format::Csv, Format::Json] {
            prop_assert_eq!(t.render(f).unwrap(), t.clone().render(f).unwrap());
        }
        let csv = t.render(Format::Csv).unwrap();
        let rows: Vec<&str> = csv.lines().filter(|l| !l.starts_with('#')).skip(1).collect();
        for (row, x) in rows.iter().zip(&xs) {
            let v: f64 = row.split(',').nth(1).unwrap().parse().unwrap();
            prop_assert!((v - x).abs() <= 1e-11 * x.abs().max(1e-300));
        }
    }
}

#[test]
fn swt_tracks_exact_only_when_dispersive() {
    let s = space();
    let rel = |p: &CircuitParams| {
        let ex = static_zz(p, &s).unwrap();
        let (a, b) = zz_swt(p).unwrap();
        ((a + b - ex) / ex).abs()
    };
    for k in 0..=22 {
        let wc = 4.8 + 0.1 * k as f64;
        assert!(rel(&device_at(1, wc)) < 0.25, "device 1 at {wc}: {}", rel(&device_at(1, wc)));
    }
    for id in 1..=4 {
        assert!(rel(&device_at(id, 4.4)) > 0.25, "device {id} near the qubits");
    }
}

#[test]
fn synthetic_exponent_fit() {
    let om = zzfree::search::log_grid(1e-3, 0.05, 12);
    let f = fit_exponents_with(|w| Ok(-3.0 * w * w + 0.7 * w.powi(4)), |w| Ok(0.4 * w - 2.0 * w.powi(3)), &om).unwrap();
    assert!((f.eta2 + 3.0).abs() < 1e-6);
    assert!((f.a.unwrap() - 4.0).abs() < 0.02);
    assert!((f.eta_a.unwrap() - 0.7).abs() < 0.02);
    assert!((f.b.unwrap() - 3.0).abs() < 0.02);
    assert!(f.mu_b.unwrap() < 0.0);
}

#[test]
fn builtin_devices_roundtrip_bit_identical() {
    for rec in zzfree::devices::builtin_all() {
        let text = write_device(&rec);
        let back = parse_device(&text, "mem").unwrap();
        assert_eq!(back.params, rec.params, "{}", rec.id);
        assert_eq!(write_device(&back), text);
    }
}

#[test]
fn batch_roundtrip() {
    let m = 3;
    let op = DMatrix::from_fn(m, m, |i, j| Complex::new((i + j) as f64, i as f64 - j as f64));
    let b = Batch::new(&[op.clone(), op.adjoint()]);
    assert_eq!(b.get(0), op);
    assert_eq!(b.trace(1), 6.0);
}
