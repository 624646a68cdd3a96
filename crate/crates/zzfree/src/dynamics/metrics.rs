//! Figures of merit computed from full-schedule evolutions.

use super::lindblad::{Batch, CoherenceSpec};
use super::model::{calibrate_flat_top, calibrate_target_tone, PulseSchedule, SimulationModel, SolverOptions, COMPUTATIONAL};
use super::envelope::RampKind;
use crate::circuit::CircuitParams;
use crate::driven::zz_and_zx;
use crate::error::{Error, Result};
use crate::operators::{HilbertSpace, Label};
use crate::search::OMEGA_MAX;
use nalgebra::{Complex, DMatrix, Matrix4};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;
use std::time::Instant;

type C = Complex<f64>;

/// Leakage above which a gate error is reported but marked unreliable.
pub const LEAKAGE_FLAG: f64 = 0.1;

const SWITCH_LABELS: [Label; 3] = [[0, 0, 1], [1, 0, 0], [1, 0, 1]];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SwitchReport {
    pub tau0: f64,
    /// Losses of |01>, |10>, |11>.
    pub losses: [f64; 3],
    pub mean_loss: f64,
    /// Population outside the four dressed computational states.
    pub leakage: [f64; 3],
    /// Largest change when the step is halved.
    pub dt_change: Option<f64>,
    pub wall_seconds: f64,
}

/// OFF-ON-OFF coupler round trip without microwave; loss of each excited
/// computational state against its dressed idle-point counterpart.
pub fn switch_fidelity_loss(
    model: &SimulationModel,
    sched: &PulseSchedule,
    coherence: &CoherenceSpec,
) -> Result<SwitchReport> {
    if sched.omega != 0.0 {
        return Err(Error::InvalidParameter { name: "omega", reason: "switch schedules carry no drive".into() });
    }
    let start = Instant::now();
    let idle = model.dressed(sched.wc_idle)?;
    let states: Vec<Vec<f64>> = SWITCH_LABELS.iter().map(|&l| idle.state(l)).collect();
    let x0 = Batch::from_real_states(&states);
    let (x, dt_change) = model.evolve(sched, coherence, &x0, |_, _| {})?;
    let comp: Vec<Vec<f64>> = COMPUTATIONAL.iter().map(|&l| idle.state(l)).collect();
    let mut losses = [0.0; 3];
    let mut leakage = [0.0; 3];
    for (p, s) in states.iter().enumerate() {
        losses[p] = 1.0 - x.expect_real(p, s);
        leakage[p] = x.trace(p) - comp.iter().map(|c| x.expect_real(p, c)).sum::<f64>();
    }
    Ok(SwitchReport {
        tau0: sched.tau0,
        losses,
        mean_loss: losses.iter().sum::<f64>() / 3.0,
        leakage,
        dt_change,
        wall_seconds: start.elapsed().as_secs_f64(),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GateReport {
    pub schedule: PulseSchedule,
    pub alpha_zx: f64,
    pub zeta: f64,
    pub process_fidelity: f64,
    pub average_fidelity: f64,
    pub error: f64,
    pub leakage: f64,
    /// Leakage above `LEAKAGE_FLAG`.
    pub flagged: bool,
    /// Control Z, target Z after the gate and target Z before it.
    pub z_phases: [f64; 3],
    pub dt_change: Option<f64>,
    pub wall_seconds: f64,
}

fn pauli(k: usize) -> [[C; 2]; 2] {
    let (o, z, i) = (C::new(1.0, 0.0), C::new(0.0, 0.0), C::new(0.0, 1.0));
    match k {
        0 => [[o, z], [z, o]],
        1 => [[z, o], [o, z]],
        2 => [[z, -i], [i, z]],
        _ => [[o, z], [z, -o]],
    }
}

/// Two-qubit Pauli `sigma_a (x) sigma_b`, control first.
fn pauli2(a: usize, b: usize) -> Matrix4<C> {
    let (pa, pb) = (pauli(a), pauli(b));
    Matrix4::from_fn(|r, c| pa[r / 2][c / 2] * pb[r % 2][c % 2])
}

fn zx90(sign: f64) -> Matrix4<C> {
    let zx = pauli2(3, 1);
    let c = C::new((PI / 4.0).cos(), 0.0);
    let s = C::new(0.0, -sign * (PI / 4.0).sin());
    Matrix4::identity() * c + zx * s
}

fn rz2(phi_c: f64, phi_t: f64) -> Matrix4<C> {
    let e = |a: f64| C::from_polar(1.0, -a / 2.0);
    Matrix4::from_diagonal(&nalgebra::Vector4::new(
        e(phi_c) * e(phi_t),
        e(phi_c) * e(-phi_t),
        e(-phi_c) * e(phi_t),
        e(-phi_c) * e(-phi_t),
    ))
}

/// Process fidelity of the measured Pauli images against
/// `Rz(p0) x Rz(p1) . ZX90 . 1 x Rz(p2)`.
fn process_fidelity(images: &[Matrix4<C>], paulis: &[Matrix4<C>], gate: &Matrix4<C>, p: [f64; 3]) -> f64 {
    let u = rz2(p[0], p[1]) * gate * rz2(0.0, p[2]);
    let ud = u.adjoint();
    let mut f = 0.0;
    for (pj, mj) in paulis.iter().zip(images) {
        f += (u * pj * ud * mj).trace().re;
    }
    f / 64.0
}

/// The 16 two-qubit Paulis, index `4a + b` for `sigma_a (x) sigma_b`
/// over (I, X, Y, Z), control first.
pub fn pauli_basis() -> Vec<Matrix4<C>> {
    (0..16).map(|k| pauli2(k / 4, k % 4)).collect()
}

/// Best process fidelity of the images of `pauli_basis()` against a ZX90
/// of either sign, over virtual Z phases.
pub fn zx90_process_fidelity(images: &[Matrix4<C>]) -> Result<(f64, [f64; 3])> {
    if images.len() != 16 {
        return Err(Error::DimensionMismatch { expected: 16, got: images.len() });
    }
    Ok(optimize_phases(images, &pauli_basis()))
}

fn optimize_phases(images: &[Matrix4<C>], paulis: &[Matrix4<C>]) -> (f64, [f64; 3]) {
    let n = 12;
    let mut best = (f64::NEG_INFINITY, [0.0; 3], 1.0);
    for sign in [1.0, -1.0] {
        let gate = zx90(sign);
        for a in 0..n {
            for b in 0..n {
                for c in 0..n {
                    let p = [a, b, c].map(|k| 2.0 * PI * k as f64 / n as f64);
                    let f = process_fidelity(images, paulis, &gate, p);
                    if f > best.0 {
                        best = (f, p, sign);
                    }
                }
            }
        }
    }
    let (mut f, mut p, sign) = best;
    let gate = zx90(sign);
    let mut step = 2.0 * PI / n as f64;
    while step > 1e-9 {
        let mut moved = false;
        for k in 0..3 {
            for d in [step, -step] {
                let mut q = p;
                q[k] += d;
                let g = process_fidelity(images, paulis, &gate, q);
                if g > f {
                    f = g;
                    p = q;
                    moved = true;
                }
            }
        }
        if !moved {
            step /= 2.0;
        }
    }
    (f, p.map(|x| x.rem_euclid(2.0 * PI)))
}

/// Evolve the 16 two-qubit Paulis, embedded on the dressed computational
/// states at the idle point, and compare the block process to a ZX90 up to
/// virtual Z rotations. Leakage counts as loss.
pub fn gate_error(model: &SimulationModel, sched: &PulseSchedule, coherence: &CoherenceSpec) -> Result<GateReport> {
    let start = Instant::now();
    let idle = model.dressed(sched.wc_idle)?;
    let m = model.dim();
    let v = DMatrix::from_fn(m, 4, |i, c| idle.state(COMPUTATIONAL[c])[i]);
    let vc = v.map(|x| C::new(x, 0.0));
    let paulis = pauli_basis();
    let inputs: Vec<DMatrix<C>> = paulis
        .iter()
        .map(|p| {
            let pd = DMatrix::from_fn(4, 4, |r, c| p[(r, c)]);
            &vc * pd * vc.transpose()
        })
        .collect();
    let (x, dt_change) = model.evolve(sched, coherence, &Batch::new(&inputs), |_, _| {})?;
    let images: Vec<Matrix4<C>> = (0..16)
        .map(|k| {
            let out = vc.transpose() * x.get(k) * &vc;
            Matrix4::from_fn(|r, c| out[(r, c)])
        })
        .collect();
    let leakage = 1.0 - images[0].trace().re / 4.0;
    let (fpro, phases) = optimize_phases(&images, &paulis);
    let favg = (4.0 * fpro + 1.0 - leakage) / 5.0;
    let wc_params = model.base.at_coupler(sched.wc_ent);
    let (zeta, alpha) = zz_and_zx(&wc_params, &model.space, sched.omega)?;
    Ok(GateReport {
        schedule: *sched,
        alpha_zx: alpha,
        zeta,
        process_fidelity: fpro,
        average_fidelity: favg,
        error: 1.0 - favg,
        leakage,
        flagged: leakage > LEAKAGE_FLAG,
        z_phases: phases,
        dt_change,
        wall_seconds: start.elapsed().as_secs_f64(),
    })
}

/// Average-gate error of two independent idling qubits over `t` ns.
pub fn coherence_limit(coherence: &CoherenceSpec, t: f64) -> f64 {
    let q = |k: usize| {
        let (t1, t2) = (coherence.t1[k] * 1e3, coherence.t2[k] * 1e3);
        (1.0 + (-t / t1).exp() + 2.0 * (-t / t2).exp()) / 4.0
    };
    let fpro = q(0) * q(2);
    1.0 - (4.0 * fpro + 1.0) / 5.0
}

/// Coupler and CR settings shared by a family of gate schedules.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GateTemplate {
    pub wc_idle: f64,
    pub wc_ent: f64,
    pub ramp: RampKind,
    pub tau0: f64,
    pub rise: f64,
    pub fall: f64,
    /// Null the effective IX term with an in-phase target tone.
    pub cancel_ix: bool,
}

impl GateTemplate {
    pub fn new(wc_idle: f64, wc_ent: f64, ramp: RampKind, tau0: f64) -> Self {
        GateTemplate { wc_idle, wc_ent, ramp, tau0, rise: 20.0, fall: 20.0, cancel_ix: true }
    }
}

/// Schedule at CR amplitude `omega` whose flat top completes a ZX90.
pub fn calibrated_schedule(params: &CircuitParams, space: &HilbertSpace, tpl: &GateTemplate, omega: f64) -> Result<PulseSchedule> {
    let p = params.at_coupler(tpl.wc_ent);
    let o2 = if tpl.cancel_ix { calibrate_target_tone(&p, space, omega)?.0 } else { 0.0 };
    let flat = calibrate_flat_top(&p, space, omega, tpl.rise, tpl.fall, o2)?;
    Ok(PulseSchedule {
        wc_idle: tpl.wc_idle,
        wc_ent: tpl.wc_ent,
        ramp: tpl.ramp,
        tau0: tpl.tau0,
        omega,
        target_amplitude: o2,
        rise: tpl.rise,
        fall: tpl.fall,
        flat,
    })
}

/// CR amplitude whose calibrated schedule lasts `t_g` at the entangling
/// point.
pub fn schedule_for_gate_length(params: &CircuitParams, space: &HilbertSpace, tpl: &GateTemplate, t_g: f64) -> Result<PulseSchedule> {
    let len = |o: f64| calibrated_schedule(params, space, tpl, o).map(|s| s.t_g());
    let (mut lo, mut hi) = (1e-3, OMEGA_MAX);
    let (l_lo, l_hi) = (len(lo)?, len(hi).unwrap_or(0.0));
    if !(t_g <= l_lo && t_g >= l_hi) {
        return Err(Error::InvalidParameter {
            name: "t_g",
            reason: format!("{t_g} ns outside the reachable range [{l_hi:.1}, {l_lo:.1}] ns"),
        });
    }
    for _ in 0..60 {
        let mid = 0.5 * (lo + hi);
        match len(mid) {
            Ok(l) if l > t_g => lo = mid,
            _ => hi = mid,
        }
        if hi - lo < 1e-9 {
            break;
        }
    }
    calibrated_schedule(params, space, tpl, 0.5 * (lo + hi))
}

/// Gate errors for several schedules sharing one model.
pub fn gate_error_sweep(
    model: &SimulationModel,
    schedules: &[PulseSchedule],
    coherence: &CoherenceSpec,
) -> Vec<Result<GateReport>> {
    schedules.par_iter().map(|s| gate_error(model, s, coherence)).collect()
}

/// Build a model whose coupler endpoints match the template.
pub fn model_for(params: &CircuitParams, tpl: &GateTemplate, opts: SolverOptions) -> Result<SimulationModel> {
    SimulationModel::new(params, tpl.wc_idle, tpl.wc_ent, opts)
}

/// `cos(2 pi zeta tau_p)` with the total ZZ at coupler `wc` and CR
/// amplitude `omega`.
pub fn ramsey_fringe(params: &CircuitParams, space: &HilbertSpace, wc: f64, omega: f64, taus: &[f64]) -> Result<Vec<f64>> {
    let (zeta, _) = zz_and_zx(&params.at_coupler(wc), space, omega)?;
    Ok(taus.iter().map(|t| (2.0 * PI * zeta * t).cos()).collect())
}

pub const LEAKAGE_LABELS: [Label; 3] = [[0, 1, 0], [1, 1, 0], [0, 1, 1]];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PopulationSeries {
    pub initial: Label,
    pub times: Vec<f64>,
    /// Populations of |010>, |110>, |011> in the instantaneous dressed basis.
    pub populations: Vec<[f64; 3]>,
}

impl PopulationSeries {
    pub fn peak(&self) -> [f64; 3] {
        let mut out = [0.0f64; 3];
        for p in &self.populations {
            for k in 0..3 {
                out[k] = out[k].max(p[k]);
            }
        }
        out
    }
}

/// Noncomputational populations sampled every `every` ns.
pub fn leakage_population(
    model: &SimulationModel,
    sched: &PulseSchedule,
    coherence: &CoherenceSpec,
    initial: Label,
    every: f64,
) -> Result<PopulationSeries> {
    if !model.labels.contains(&initial) {
        return Err(Error::InvalidParameter { name: "initial", reason: format!("{initial:?} outside the simulated basis") });
    }
    let x0 = Batch::from_real_states(&[model.dressed(sched.wc_idle)?.state(initial)]);
    let mut times = Vec::new();
    let mut populations = Vec::new();
    let mut next = 0.0;
    let mut failure = None;
    model.evolve(sched, coherence, &x0, |t, x| {
        if t + 1e-9 < next || failure.is_some() {
            return;
        }
        next += every;
        match model.dressed(sched.coupler(t)) {
            Ok(st) => {
                times.push(t);
                populations.push(LEAKAGE_LABELS.map(|l| x.expect_real(0, &st.state(l)).max(0.0)));
            }
            Err(e) => failure = Some(e),
        }
    })?;
    if let Some(e) = failure {
        return Err(e);
    }
    Ok(PopulationSeries { initial, times, populations })
}
