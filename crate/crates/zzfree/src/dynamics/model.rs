//! Three-mode circuit in a frame block diagonal in total excitation
//! number, rotating at the drive frequency.
//!
//! `H_bd(wc)` is the least-action block diagonalization of the static
//! Hamiltonian over excitation-number sectors; the `W = exp(-i wd N t)`
//! frame is then exact and only the `|dN| = 1` part of the drive is kept.
//! The frame's own motion `-i T^T dT/dt` couples sectors two apart and is
//! dropped.

use super::envelope::{cr_pulse_envelope, ramp_fraction, RampKind};
use super::lindblad::{add_scaled, lindblad_evolve, Batch, CoherenceSpec, Dissipator};
use crate::circuit::{build_static_hamiltonian, CircuitParams};
use crate::driven::{effective_pauli_coefficients, la_block_diagonalize, LaResult};
use crate::circuit::DriveSpec;
use crate::error::{Error, Result};
use crate::operators::{quadrature, HilbertSpace, Label, Q1, Q2};
use crate::spectral::{greedy_match, sorted_eigh};
use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PulseSchedule {
    pub wc_idle: f64,
    pub wc_ent: f64,
    pub ramp: RampKind,
    /// Coupler rise/fall time, ns.
    pub tau0: f64,
    /// CR flat-top amplitude, GHz.
    pub omega: f64,
    /// In-phase target tone at the same envelope, GHz.
    pub target_amplitude: f64,
    pub rise: f64,
    pub fall: f64,
    /// Flat-top duration, ns.
    pub flat: f64,
}

impl PulseSchedule {
    /// OFF-ON-OFF switch without microwave and no dwell at E.
    pub fn switch(wc_idle: f64, wc_ent: f64, ramp: RampKind, tau0: f64) -> Self {
        PulseSchedule { wc_idle, wc_ent, ramp, tau0, omega: 0.0, target_amplitude: 0.0, rise: 0.0, fall: 0.0, flat: 0.0 }
    }

    /// Time spent at the entangling point.
    pub fn t_g(&self) -> f64 {
        self.rise + self.flat + self.fall
    }

    pub fn total(&self) -> f64 {
        2.0 * self.tau0 + self.t_g()
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.tau0 > 0.0) {
            return Err(Error::InvalidParameter { name: "tau0", reason: format!("{} must be positive", self.tau0) });
        }
        for (name, v) in [("rise", self.rise), ("fall", self.fall), ("flat", self.flat), ("omega", self.omega)] {
            if !(v >= 0.0) {
                return Err(Error::InvalidParameter { name, reason: format!("{v} must be non-negative") });
            }
        }
        if self.omega > 0.0 && (self.rise <= 0.0 || self.fall <= 0.0) {
            return Err(Error::InvalidParameter { name: "rise", reason: "CR pulse needs rise and fall".into() });
        }
        Ok(())
    }

    pub fn coupler(&self, t: f64) -> f64 {
        let total = self.total();
        let f = if t < self.tau0 {
            ramp_fraction(self.ramp, self.tau0, t)
        } else if t <= total - self.tau0 {
            1.0
        } else {
            ramp_fraction(self.ramp, self.tau0, total - t)
        };
        self.wc_idle + (self.wc_ent - self.wc_idle) * f
    }

    /// CR envelope normalized to the flat-top amplitude.
    pub fn drive(&self, t: f64) -> f64 {
        if self.omega == 0.0 {
            return 0.0;
        }
        cr_pulse_envelope(1.0, self.rise, self.fall, self.flat, t - self.tau0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolverOptions {
    pub levels: usize,
    /// Highest total excitation number kept in the simulation.
    pub max_excitations: usize,
    /// ns.
    pub dt: f64,
    /// Repeat at `dt / 2` and report the difference.
    pub check: bool,
    /// Coupler grid for cached frame Hamiltonians, GHz.
    pub cache_step: f64,
    /// Rebuild `H_bd` at every RK4 stage instead of interpolating.
    pub exact_frame: bool,
}

impl Default for SolverOptions {
    fn default() -> Self {
        SolverOptions { levels: 3, max_excitations: 3, dt: 0.005, check: true, cache_step: 1e-3, exact_frame: false }
    }
}

pub const COMPUTATIONAL: [Label; 4] = [[0, 0, 0], [0, 0, 1], [1, 0, 0], [1, 0, 1]];

/// Simulation basis and the cached frame Hamiltonians of one schedule.
pub struct SimulationModel {
    pub base: CircuitParams,
    pub space: HilbertSpace,
    /// Full-space indices kept, ordered as in the full space.
    pub kept: Vec<usize>,
    pub labels: Vec<Label>,
    pub wc_idle: f64,
    pub wc_ent: f64,
    pub drive_frequency: f64,
    grid: Vec<DMatrix<f64>>,
    /// `T^T (a_k + a_k^T) T` at the entangling point, `|dN| = 1` part.
    drive_q1: DMatrix<f64>,
    drive_q2: DMatrix<f64>,
    opts: SolverOptions,
}

fn excitation_blocks(space: &HilbertSpace) -> Vec<Vec<usize>> {
    let max: usize = space.dims().iter().map(|d| d - 1).sum();
    (0..=max)
        .map(|n| (0..space.dim()).filter(|&i| space.excitations(i) == n).collect::<Vec<_>>())
        .filter(|b| !b.is_empty())
        .collect()
}

fn n_frame(params: &CircuitParams, space: &HilbertSpace) -> Result<LaResult> {
    la_block_diagonalize(&build_static_hamiltonian(params, space), &excitation_blocks(space))
}

fn restrict(m: &DMatrix<f64>, kept: &[usize]) -> DMatrix<f64> {
    DMatrix::from_fn(kept.len(), kept.len(), |i, j| m[(kept[i], kept[j])])
}

impl SimulationModel {
    pub fn new(base: &CircuitParams, wc_idle: f64, wc_ent: f64, opts: SolverOptions) -> Result<Self> {
        let space = HilbertSpace::uniform(opts.levels)?;
        let kept: Vec<usize> = (0..space.dim()).filter(|&i| space.excitations(i) <= opts.max_excitations).collect();
        let labels: Vec<Label> = kept.iter().map(|&i| space.label(i)).collect();
        let steps = if wc_idle == wc_ent { 1 } else { ((wc_ent - wc_idle).abs() / opts.cache_step).ceil() as usize };
        let grid = (0..=steps)
            .map(|s| {
                let wc = wc_idle + (wc_ent - wc_idle) * s as f64 / steps as f64;
                Ok(restrict(&n_frame(&base.at_coupler(wc), &space)?.h_bd, &kept))
            })
            .collect::<Result<Vec<_>>>()?;
        let ent = n_frame(&base.at_coupler(wc_ent), &space)?;
        let mask = |m: DMatrix<f64>| {
            let r = restrict(&m, &kept);
            DMatrix::from_fn(kept.len(), kept.len(), |i, j| {
                if space.excitations(kept[i]).abs_diff(space.excitations(kept[j])) == 1 { r[(i, j)] } else { 0.0 }
            })
        };
        let drive_q1 = mask(ent.t.transpose() * quadrature(Q1, &space) * &ent.t);
        let drive_q2 = mask(ent.t.transpose() * quadrature(Q2, &space) * &ent.t);
        let mut model = SimulationModel {
            base: *base,
            space,
            kept,
            labels,
            wc_idle,
            wc_ent,
            drive_frequency: 0.0,
            grid,
            drive_q1,
            drive_q2,
            opts,
        };
        let dressed = model.dressed(wc_ent)?;
        model.drive_frequency = dressed.energy([0, 0, 1]) - dressed.energy([0, 0, 0]);
        Ok(model)
    }

    pub fn dim(&self) -> usize {
        self.kept.len()
    }

    pub fn options(&self) -> &SolverOptions {
        &self.opts
    }

    /// Sector-diagonal static Hamiltonian at coupler frequency `wc`.
    pub fn frame_hamiltonian(&self, wc: f64) -> DMatrix<f64> {
        if self.opts.exact_frame {
            return restrict(&n_frame(&self.base.at_coupler(wc), &self.space).expect("frame").h_bd, &self.kept);
        }
        let steps = self.grid.len() - 1;
        if steps == 0 || self.wc_ent == self.wc_idle {
            return self.grid[0].clone();
        }
        let x = ((wc - self.wc_idle) / (self.wc_ent - self.wc_idle)).clamp(0.0, 1.0) * steps as f64;
        let k = (x.floor() as usize).min(steps - 1);
        let f = x - k as f64;
        if f == 0.0 {
            return self.grid[k].clone();
        }
        &self.grid[k] * (1.0 - f) + &self.grid[k + 1] * f
    }

    /// Dressed states of the frame Hamiltonian at `wc`.
    pub fn dressed(&self, wc: f64) -> Result<FrameStates> {
        let h = self.frame_hamiltonian(wc);
        let (vals, vecs) = sorted_eigh(&h);
        let diag: Vec<f64> = (0..h.nrows()).map(|i| h[(i, i)]).collect();
        let (assign, _, _) = greedy_match(&diag, &vecs);
        Ok(FrameStates { labels: self.labels.clone(), vals, vecs, assign })
    }

    fn fill_hamiltonian(&self, sched: &PulseSchedule, t: f64, out: &mut DMatrix<f64>) {
        out.copy_from(&self.frame_hamiltonian(sched.coupler(t)));
        let env = sched.drive(t);
        for i in 0..self.dim() {
            let n: usize = self.labels[i].iter().sum();
            out[(i, i)] -= self.drive_frequency * n as f64;
        }
        if env != 0.0 {
            add_scaled(out, 0.5 * env * sched.omega, &self.drive_q1);
            if sched.target_amplitude != 0.0 {
                add_scaled(out, 0.5 * env * sched.target_amplitude, &self.drive_q2);
            }
        }
    }

    fn evolve_once(
        &self,
        sched: &PulseSchedule,
        diss: &Dissipator,
        x0: &Batch,
        dt: f64,
        observe: impl FnMut(f64, &Batch),
    ) -> Result<Batch> {
        lindblad_evolve(|t, h| self.fill_hamiltonian(sched, t, h), diss, x0, 0.0, sched.total(), dt, observe)
    }

    /// Evolve a batch through the schedule; with `check` set, also at half
    /// step, returning the largest elementwise change.
    pub fn evolve(
        &self,
        sched: &PulseSchedule,
        coherence: &CoherenceSpec,
        x0: &Batch,
        observe: impl FnMut(f64, &Batch),
    ) -> Result<(Batch, Option<f64>)> {
        sched.validate()?;
        if (sched.wc_idle - self.wc_idle).abs() > 1e-12 || (sched.wc_ent - self.wc_ent).abs() > 1e-12 {
            return Err(Error::InvalidParameter { name: "schedule", reason: "coupler endpoints differ from the model".into() });
        }
        let diss = Dissipator::new(&self.labels, coherence)?;
        let x = self.evolve_once(sched, &diss, x0, self.opts.dt, observe)?;
        if !self.opts.check {
            return Ok((x, None));
        }
        let half = self.evolve_once(sched, &diss, x0, self.opts.dt / 2.0, |_, _| {})?;
        let diff = (&x.re - &half.re).amax().max((&x.im - &half.im).amax());
        Ok((half, Some(diff)))
    }
}

/// Eigenstates of a frame Hamiltonian labeled by the kept basis.
pub struct FrameStates {
    labels: Vec<Label>,
    vals: Vec<f64>,
    vecs: DMatrix<f64>,
    assign: Vec<usize>,
}

impl FrameStates {
    fn pos(&self, label: Label) -> usize {
        self.labels.iter().position(|l| *l == label).expect("label kept")
    }

    pub fn energy(&self, label: Label) -> f64 {
        self.vals[self.assign[self.pos(label)]]
    }

    /// Sign fixed so the overlap with the bare state is positive.
    pub fn state(&self, label: Label) -> Vec<f64> {
        let i = self.pos(label);
        let j = self.assign[i];
        let s = if self.vecs[(i, j)] < 0.0 { -1.0 } else { 1.0 };
        self.vecs.column(j).iter().map(|v| v * s).collect()
    }
}

/// Find the target-tone amplitude that nulls the effective `IX` term at
/// CR amplitude `omega`. Returns `(target_amplitude, alpha_zx, zeta)`.
pub fn calibrate_target_tone(params: &CircuitParams, space: &HilbertSpace, omega: f64) -> Result<(f64, f64, f64)> {
    let ix = |o2: f64| -> Result<(f64, f64, f64)> {
        let d = DriveSpec { target_amplitude: o2, ..DriveSpec::cr(omega) };
        let p = effective_pauli_coefficients(params, &d, space)?.pauli;
        Ok((p.get("IX").unwrap(), p.alpha_zx(), p.zeta()))
    };
    let (mut x0, mut x1) = (0.0, 1e-4);
    let (mut f0, mut f1) = (ix(x0)?.0, ix(x1)?.0);
    for _ in 0..20 {
        if (f1 - f0).abs() < 1e-18 {
            break;
        }
        let x2 = x1 - f1 * (x1 - x0) / (f1 - f0);
        x0 = x1;
        f0 = f1;
        x1 = x2;
        f1 = ix(x1)?.0;
        if f1.abs() < 1e-12 {
            break;
        }
    }
    let (_, a, z) = ix(x1)?;
    Ok((x1, a, z))
}

/// Flat-top duration that makes the whole round-square pulse a ZX90,
/// integrating the ZX rate through the cosine edges.
pub fn calibrate_flat_top(params: &CircuitParams, space: &HilbertSpace, omega: f64, rise: f64, fall: f64, o2: f64) -> Result<f64> {
    let alpha = |s: f64| -> Result<f64> {
        let d = DriveSpec { target_amplitude: o2 * s, ..DriveSpec::cr(omega * s) };
        Ok(effective_pauli_coefficients(params, &d, space)?.pauli.alpha_zx())
    };
    let n = 24;
    let mut edge = 0.0;
    for k in 0..=n {
        let u = k as f64 / n as f64;
        let s = 0.5 * (1.0 - (std::f64::consts::PI * u).cos());
        let w = if k == 0 || k == n { 1.0 } else if k % 2 == 1 { 4.0 } else { 2.0 };
        edge += w * alpha(s)?;
    }
    let edge_area = edge / (3.0 * n as f64) * (rise + fall);
    let full = alpha(1.0)?;
    let flat = (0.25 - edge_area.abs()) / full.abs();
    if !(flat >= 0.0) {
        return Err(Error::InvalidParameter { name: "omega", reason: "edges alone exceed a ZX90".into() });
    }
    Ok(flat)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::devices::builtin;

    #[test]
    fn schedule_shape() {
        let mut s = PulseSchedule::switch(6.577, 4.8, RampKind::Tanh, 30.0);
        s.omega = 0.04;
        s.rise = 20.0;
        s.fall = 20.0;
        s.flat = 40.0;
        assert_eq!(s.total(), 140.0);
        assert!((s.coupler(0.0) - 6.577).abs() < 1e-12);
        assert!((s.coupler(70.0) - 4.8).abs() < 1e-12);
        assert!((s.coupler(140.0) - 6.577).abs() < 1e-12);
        assert_eq!(s.drive(29.0), 0.0);
        assert_eq!(s.drive(70.0), 1.0);
        assert_eq!(s.drive(111.0), 0.0);
    }

    #[test]
    fn cache_matches_exact_frame() {
        let p = builtin(2).unwrap().params;
        let opts = SolverOptions { cache_step: 5e-3, ..Default::default() };
        let m = SimulationModel::new(&p, 6.577, 4.8, opts).unwrap();
        let exact = SimulationModel::new(&p, 6.577, 4.8, SolverOptions { exact_frame: true, ..opts }).unwrap();
        let wc = 5.4321;
        let err = (m.frame_hamiltonian(wc) - exact.frame_hamiltonian(wc)).amax();
        assert!(err < 1e-6, "{err}");
    }

    #[test]
    fn frame_preserves_spectrum() {
        let p = builtin(2).unwrap().params;
        let m = SimulationModel::new(&p, 4.8, 4.8, SolverOptions::default()).unwrap();
        let st = m.dressed(4.8).unwrap();
        let s = crate::spectral::static_zz(&p.at_coupler(4.8), &m.space).unwrap();
        let e = |l| st.energy(l);
        let zz = e([1, 0, 1]) - e([1, 0, 0]) - e([0, 0, 1]) + e([0, 0, 0]);
        assert!((zz - s).abs() < 1e-12);
    }
}
