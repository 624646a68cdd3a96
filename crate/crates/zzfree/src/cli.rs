//! Command surface of the `zzfree` binary. Each command returns a table.

use crate::devices::{load_device, DeviceRecord, AFFINE_PARKS};
use crate::driven::zz_and_zx;
use crate::dynamics::{
    calibrated_schedule, gate_error_sweep, leakage_population, ramsey_fringe, schedule_for_gate_length,
    switch_fidelity_loss, CoherenceSpec, GateTemplate, PulseSchedule, RampKind, SimulationModel, SolverOptions,
    LEAKAGE_LABELS,
};
use crate::error::{Error, Result};
use crate::export::{Cell, Format, SweepResult};
use crate::operators::{HilbertSpace, Label};
use crate::search::{
    find_static_zz_zeros_with, fit_higher_order_exponents, freedom_amplitudes, log_grid, PointKind, ZeroScan,
    DEFAULT_RANGE, ROOT_TOL, SCAN_STEP,
};
use crate::spectral::{
    affine_idle_perturbative, g_eff, genuine_idle_perturbative, npad_static_zz, static_zz, zz_swt,
};
use clap::{Args, Parser, Subcommand, ValueEnum};
use rayon::prelude::*;
use std::path::PathBuf;

/// Directory searched for `<name>.dev` device files.
pub const DEVICE_DIR_ENV: &str = "ZZFREE_DEVICE_DIR";

/// Default entangling coupler frequency of the genuine gate, GHz.
pub const GENUINE_ENTANGLING: f64 = 4.8;

#[derive(Debug, Parser)]
#[command(name = "zzfree", version, about = "ZZ-free operating points of qubit-coupler-qubit circuits")]
pub struct Cli {
    #[command(flatten)]
    pub global: Global,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Args)]
pub struct Global {
    /// Levels kept per mode.
    #[arg(long, global = true, default_value_t = 3)]
    pub levels: usize,
    /// Root tolerance for coupler and amplitude searches, GHz.
    #[arg(long, global = true, default_value_t = ROOT_TOL)]
    pub tolerance: f64,
    /// Worker threads; 0 lets rayon decide.
    #[arg(long, global = true, default_value_t = 0)]
    pub threads: usize,
    #[arg(long, global = true, value_enum, default_value_t = OutFormat::Csv)]
    pub format: OutFormat,
    /// Output file; stdout when absent.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Directory for device files, overriding the environment.
    #[arg(long, global = true, env = DEVICE_DIR_ENV)]
    pub device_dir: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum OutFormat {
    Csv,
    Json,
}

impl From<OutFormat> for Format {
    fn from(f: OutFormat) -> Self {
        match f {
            OutFormat::Csv => Format::Csv,
            OutFormat::Json => Format::Json,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ZzMethod {
    Exact,
    Swt,
    Npad,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum GateKind {
    Genuine,
    Affine,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Ramp {
    Tanh,
    Gaussian,
}

impl From<Ramp> for RampKind {
    fn from(r: Ramp) -> Self {
        match r {
            Ramp::Tanh => RampKind::Tanh,
            Ramp::Gaussian => RampKind::FlatTopGaussian,
        }
    }
}

#[derive(Debug, Clone, Args)]
pub struct CouplerRange {
    /// GHz.
    #[arg(long, default_value_t = DEFAULT_RANGE.0)]
    pub from: f64,
    /// GHz.
    #[arg(long, default_value_t = DEFAULT_RANGE.1)]
    pub to: f64,
    /// GHz.
    #[arg(long, default_value_t = 0.01)]
    pub step: f64,
}

impl CouplerRange {
    fn grid(&self) -> Result<Vec<f64>> {
        if !(self.step > 0.0 && self.to >= self.from) {
            return Err(Error::InvalidParameter {
                name: "range",
                reason: format!("from {} to {} step {}", self.from, self.to, self.step),
            });
        }
        let n = ((self.to - self.from) / self.step + 1e-9).floor() as usize;
        Ok((0..=n).map(|k| self.from + self.step * k as f64).collect())
    }
}

#[derive(Debug, Clone, Args)]
pub struct CoherenceArgs {
    /// Qubit and coupler T1, us.
    #[arg(long, default_value_t = 200.0)]
    pub t1: f64,
    /// Qubit and coupler T2, us.
    #[arg(long, default_value_t = 200.0)]
    pub t2: f64,
    /// Coupler T1 override, us.
    #[arg(long)]
    pub coupler_t1: Option<f64>,
    /// Coupler T2 override, us.
    #[arg(long)]
    pub coupler_t2: Option<f64>,
    /// Ignore any coherence block in the device file.
    #[arg(long)]
    pub closed: bool,
}

impl CoherenceArgs {
    fn resolve(&self, dev: &DeviceRecord) -> Result<CoherenceSpec> {
        if self.closed {
            return Ok(CoherenceSpec::closed());
        }
        let mut c = dev.coherence.unwrap_or(CoherenceSpec { t1: [self.t1; 3], t2: [self.t2; 3] });
        if let Some(t) = self.coupler_t1 {
            c.t1[1] = t;
        }
        if let Some(t) = self.coupler_t2 {
            c.t2[1] = t;
        }
        c.validate()?;
        Ok(c)
    }
}

#[derive(Debug, Clone, Args)]
pub struct GateArgs {
    #[arg(long, value_enum, default_value_t = GateKind::Genuine)]
    pub kind: GateKind,
    #[arg(long, value_enum, default_value_t = Ramp::Tanh)]
    pub ramp: Ramp,
    /// Entangling coupler frequency, GHz. Defaults to 4.8 GHz for genuine
    /// gates and the tabulated park for affine gates on devices 1-4.
    #[arg(long)]
    pub wc_ent: Option<f64>,
    /// Time step, ns.
    #[arg(long, default_value_t = 0.005)]
    pub dt: f64,
    /// Repeat each run at half step and report the change.
    #[arg(long)]
    pub check: bool,
    /// Highest total excitation number simulated.
    #[arg(long, default_value_t = 3)]
    pub max_excitations: usize,
    #[command(flatten)]
    pub coherence: CoherenceArgs,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Static ZZ across a coupler range.
    StaticZz {
        #[arg(long)]
        device: String,
        #[command(flatten)]
        range: CouplerRange,
        #[arg(long, value_enum, num_args = 1.., value_delimiter = ',', default_values_t = [ZzMethod::Exact])]
        method: Vec<ZzMethod>,
    },
    /// Genuine, affine and trivial idle points.
    IdlePoints {
        #[arg(long)]
        device: String,
    },
    /// Freedom amplitude and ZX rate across a coupler range.
    Freedom {
        #[arg(long)]
        device: String,
        #[command(flatten)]
        range: CouplerRange,
    },
    /// Higher-order exponents of the driven ZZ and ZX rate.
    Exponents {
        #[arg(long)]
        device: String,
        #[command(flatten)]
        range: CouplerRange,
        /// Smallest amplitude of the fit grid, GHz.
        #[arg(long, default_value_t = 0.004)]
        omega_min: f64,
        /// Largest amplitude of the fit grid, GHz.
        #[arg(long, default_value_t = 0.04)]
        omega_max: f64,
        #[arg(long, default_value_t = 12)]
        points: usize,
    },
    /// Computational-state loss over an OFF-ON-OFF coupler round trip.
    Switch {
        #[arg(long)]
        device: String,
        #[command(flatten)]
        gate: GateArgs,
        /// Ramp times, ns.
        #[arg(long, value_delimiter = ',', default_values_t = [10.0, 20.0, 30.0, 40.0, 50.0, 60.0])]
        tau0: Vec<f64>,
    },
    /// ZX90 gate error against gate length.
    GateError {
        #[arg(long)]
        device: String,
        #[command(flatten)]
        gate: GateArgs,
        /// Ramp time, ns; defaults to 30 (genuine) or 10 (affine).
        #[arg(long)]
        tau0: Option<f64>,
        /// Gate lengths at the entangling point, ns. Without this, CR
        /// amplitudes from `--omega` are used.
        #[arg(long, value_delimiter = ',')]
        tg: Vec<f64>,
        /// CR amplitudes, GHz.
        #[arg(long, value_delimiter = ',')]
        omega: Vec<f64>,
    },
    /// Ramsey fringe `cos(2 pi zeta tau_p)` across coupler frequencies.
    Fringe {
        #[arg(long)]
        device: String,
        #[command(flatten)]
        range: CouplerRange,
        /// CR amplitude, GHz.
        #[arg(long)]
        omega: f64,
        /// Free-evolution times, ns.
        #[arg(long, value_delimiter = ',', default_values_t = [0.0, 250.0, 500.0, 750.0, 1000.0])]
        tau_p: Vec<f64>,
    },
    /// Noncomputational populations along a switch schedule.
    Leakage {
        #[arg(long)]
        device: String,
        #[command(flatten)]
        gate: GateArgs,
        #[arg(long, default_value_t = 30.0)]
        tau0: f64,
        /// Initial label, e.g. `101`.
        #[arg(long, default_value = "101")]
        initial: String,
        /// Sampling interval, ns.
        #[arg(long, default_value_t = 1.0)]
        every: f64,
    },
}

/// Error class for the process exit code: 2 for usage, 3 for numerics.
pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::InvalidParameter { .. } | Error::Schema { .. } | Error::Io(_) | Error::Unsupported(_) => 2,
        _ => 3,
    }
}

pub fn run(cli: &Cli) -> Result<()> {
    if cli.global.threads > 0 {
        // Fails only if a pool already exists, which is harmless.
        let _ = rayon::ThreadPoolBuilder::new().num_threads(cli.global.threads).build_global();
    }
    let table = execute(&cli.global, &cli.command)?;
    crate::export::export_results(&table, cli.global.format.into(), cli.global.out.as_deref())
}

pub fn execute(g: &Global, cmd: &Command) -> Result<SweepResult> {
    if !(g.tolerance > 0.0) {
        return Err(Error::InvalidParameter { name: "tolerance", reason: format!("{}", g.tolerance) });
    }
    let space = HilbertSpace::uniform(g.levels)?;
    let load = |name: &str| load_device(name, g.device_dir.as_deref());
    match cmd {
        Command::StaticZz { device, range, method } => static_zz_table(&load(device)?, &space, g, range, method),
        Command::IdlePoints { device } => idle_points_table(&load(device)?, &space, g),
        Command::Freedom { device, range } => freedom_table(&load(device)?, &space, g, range),
        Command::Exponents { device, range, omega_min, omega_max, points } => {
            exponents_table(&load(device)?, &space, g, range, *omega_min, *omega_max, *points)
        }
        Command::Switch { device, gate, tau0 } => switch_table(&load(device)?, &space, g, gate, tau0),
        Command::GateError { device, gate, tau0, tg, omega } => {
            gate_table(&load(device)?, &space, g, gate, *tau0, tg, omega)
        }
        Command::Fringe { device, range, omega, tau_p } => fringe_table(&load(device)?, &space, g, range, *omega, tau_p),
        Command::Leakage { device, gate, tau0, initial, every } => {
            leakage_table(&load(device)?, &space, g, gate, *tau0, initial, *every)
        }
    }
}

fn zero_scan(dev: &DeviceRecord, space: &HilbertSpace, g: &Global) -> Result<ZeroScan> {
    find_static_zz_zeros_with(&dev.params, space, DEFAULT_RANGE, SCAN_STEP, g.tolerance)
}

fn static_zz_table(
    dev: &DeviceRecord,
    space: &HilbertSpace,
    g: &Global,
    range: &CouplerRange,
    methods: &[ZzMethod],
) -> Result<SweepResult> {
    let mut cols = vec!["wc_ghz", "g_eff_ghz"];
    for m in methods {
        cols.push(match m {
            ZzMethod::Exact => "zeta_exact_ghz",
            ZzMethod::Swt => "zeta_swt_ghz",
            ZzMethod::Npad => "zeta_npad_ghz",
        });
    }
    let mut t = SweepResult::new("static-zz", &dev.id, g.levels, &cols);
    let rows: Vec<Vec<Cell>> = range
        .grid()?
        .par_iter()
        .map(|&wc| {
            let p = dev.params.at_coupler(wc);
            let mut row = vec![Cell::Num(wc), Cell::Num(g_eff(&p))];
            for m in methods {
                let v = match m {
                    ZzMethod::Exact => static_zz(&p, space).ok(),
                    ZzMethod::Swt => zz_swt(&p).ok().map(|(a, b)| a + b),
                    ZzMethod::Npad => npad_static_zz(&p, space).ok(),
                };
                row.push(v.into());
            }
            row
        })
        .collect();
    for r in rows {
        t.push(r)?;
    }
    let scan = zero_scan(dev, space, g)?;
    for p in &scan.points {
        t.note("zero_crossing", format!("{} {}", crate::export::format_sig(p.wc), p.kind.as_str()));
    }
    for c in &scan.collisions {
        t.note("collision", crate::export::format_sig(*c));
    }
    Ok(t)
}

fn idle_points_table(dev: &DeviceRecord, space: &HilbertSpace, g: &Global) -> Result<SweepResult> {
    let mut t = SweepResult::new(
        "idle-points",
        &dev.id,
        g.levels,
        &["kind", "wc_numeric_ghz", "wc_perturbative_ghz", "g_eff_ghz"],
    );
    let scan = zero_scan(dev, space, g)?;
    let p = &dev.params;
    let gi_pert = p.geometry.and_then(|geo| genuine_idle_perturbative(&geo, p.w1, p.w2));
    let gi = scan.genuine();
    t.push(vec!["genuine".into(), gi.map(|x| x.wc).into(), gi_pert.into(), gi.map(|x| x.g_eff).into()])?;
    let ai = scan.affine();
    let ai_pert = ai.and_then(|_| affine_idle_perturbative(p).ok());
    t.push(vec!["affine".into(), ai.map(|x| x.wc).into(), ai_pert.into(), ai.map(|x| x.g_eff).into()])?;
    for x in scan.points.iter().filter(|x| x.kind == PointKind::Trivial) {
        t.push(vec!["trivial".into(), x.wc.into(), Cell::Missing, x.g_eff.into()])?;
    }
    for c in &scan.collisions {
        t.note("collision", crate::export::format_sig(*c));
    }
    for j in &scan.jumps {
        t.note("jump", crate::export::format_sig(*j));
    }
    Ok(t)
}

fn freedom_table(dev: &DeviceRecord, space: &HilbertSpace, g: &Global, range: &CouplerRange) -> Result<SweepResult> {
    let mut t = SweepResult::new(
        "freedom",
        &dev.id,
        g.levels,
        &["wc_ghz", "omega_star_ghz", "alpha_zx_ghz", "roots"],
    );
    let wcs = range.grid()?;
    let rows: Vec<Result<(f64, Vec<f64>, Option<f64>)>> = wcs
        .par_iter()
        .map(|&wc| {
            let p = dev.params.at_coupler(wc);
            let roots = freedom_amplitudes(&p, space)?;
            let alpha = match roots.first() {
                Some(&o) => Some(zz_and_zx(&p, space, o)?.1),
                None => None,
            };
            Ok((wc, roots, alpha))
        })
        .collect();
    let mut gap: Option<(f64, f64)> = None;
    let mut gaps = Vec::new();
    for r in rows {
        let (wc, roots, alpha) = r?;
        let first = roots.first().copied();
        if first.is_none() {
            gap = Some(gap.map_or((wc, wc), |(a, _)| (a, wc)));
        } else if let Some(gp) = gap.take() {
            gaps.push(gp);
        }
        let list = roots.iter().map(|x| crate::export::format_sig(*x)).collect::<Vec<_>>().join(" ");
        t.push(vec![wc.into(), first.into(), alpha.into(), list.into()])?;
    }
    gaps.extend(gap);
    for (a, b) in gaps {
        t.note("gap", format!("{}-{}", crate::export::format_sig(a), crate::export::format_sig(b)));
    }
    Ok(t)
}

fn exponents_table(
    dev: &DeviceRecord,
    space: &HilbertSpace,
    g: &Global,
    range: &CouplerRange,
    omin: f64,
    omax: f64,
    n: usize,
) -> Result<SweepResult> {
    let mut t = SweepResult::new(
        "exponents",
        &dev.id,
        g.levels,
        &["wc_ghz", "eta2_per_ghz", "a", "mu1", "b"],
    );
    let oms = log_grid(omin, omax, n);
    t.note("omega_grid_ghz", format!("{omin}..{omax} x{n}"));
    for wc in range.grid()? {
        let f = fit_higher_order_exponents(&dev.params.at_coupler(wc), space, &oms)?;
        t.push(vec![wc.into(), f.eta2.into(), f.a.into(), f.mu1.into(), f.b.into()])?;
    }
    Ok(t)
}

/// Idle and entangling coupler frequencies of a gate kind.
pub fn gate_endpoints(
    dev: &DeviceRecord,
    space: &HilbertSpace,
    kind: GateKind,
    wc_ent: Option<f64>,
    tol: f64,
) -> Result<(f64, f64)> {
    let scan = find_static_zz_zeros_with(&dev.params, space, DEFAULT_RANGE, SCAN_STEP, tol)?;
    match kind {
        GateKind::Genuine => {
            let idle = scan.genuine().ok_or_else(|| Error::Unsupported(format!("{} has no genuine idle point", dev.id)))?;
            Ok((idle.wc, wc_ent.unwrap_or(GENUINE_ENTANGLING)))
        }
        GateKind::Affine => {
            let idle = scan.affine().ok_or_else(|| Error::Unsupported(format!("{} has no affine idle point", dev.id)))?;
            let park = dev
                .id
                .strip_prefix("device")
                .and_then(|s| s.parse::<usize>().ok())
                .filter(|i| (1..=4).contains(i))
                .map(|i| AFFINE_PARKS[i - 1]);
            let ent = wc_ent.or(park).ok_or_else(|| Error::InvalidParameter {
                name: "wc-ent",
                reason: format!("no default affine park for {}", dev.id),
            })?;
            Ok((idle.wc, ent))
        }
    }
}

fn solver(g: &Global, gate: &GateArgs) -> SolverOptions {
    SolverOptions {
        levels: g.levels,
        max_excitations: gate.max_excitations,
        dt: gate.dt,
        check: gate.check,
        ..Default::default()
    }
}

fn switch_table(
    dev: &DeviceRecord,
    space: &HilbertSpace,
    g: &Global,
    gate: &GateArgs,
    taus: &[f64],
) -> Result<SweepResult> {
    let (wi, we) = gate_endpoints(dev, space, gate.kind, gate.wc_ent, g.tolerance)?;
    let coh = gate.coherence.resolve(dev)?;
    let model = SimulationModel::new(&dev.params, wi, we, solver(g, gate))?;
    let mut t = SweepResult::new(
        "switch",
        &dev.id,
        g.levels,
        &["tau0_ns", "loss_01", "loss_10", "loss_11", "mean_loss", "leak_01", "leak_10", "leak_11", "dt_change"],
    );
    t.note("wc_idle_ghz", crate::export::format_sig(wi));
    t.note("wc_ent_ghz", crate::export::format_sig(we));
    let reports: Vec<_> = taus
        .par_iter()
        .map(|&tau0| switch_fidelity_loss(&model, &PulseSchedule::switch(wi, we, gate.ramp.into(), tau0), &coh))
        .collect();
    for r in reports {
        let r = r?;
        eprintln!("switch tau0 = {} ns: {:.2} s", r.tau0, r.wall_seconds);
        let mut row: Vec<Cell> = vec![r.tau0.into()];
        row.extend(r.losses.iter().map(|&x| Cell::Num(x)));
        row.push(r.mean_loss.into());
        row.extend(r.leakage.iter().map(|&x| Cell::Num(x)));
        row.push(r.dt_change.into());
        t.push(row)?;
    }
    Ok(t)
}

fn gate_table(
    dev: &DeviceRecord,
    space: &HilbertSpace,
    g: &Global,
    gate: &GateArgs,
    tau0: Option<f64>,
    tgs: &[f64],
    omegas: &[f64],
) -> Result<SweepResult> {
    let (wi, we) = gate_endpoints(dev, space, gate.kind, gate.wc_ent, g.tolerance)?;
    let tau0 = tau0.unwrap_or(match gate.kind {
        GateKind::Genuine => 30.0,
        GateKind::Affine => 10.0,
    });
    let coh = gate.coherence.resolve(dev)?;
    let tpl = GateTemplate::new(wi, we, gate.ramp.into(), tau0);
    let schedules: Vec<PulseSchedule> = if !tgs.is_empty() {
        tgs.par_iter().map(|&tg| schedule_for_gate_length(&dev.params, space, &tpl, tg)).collect::<Result<_>>()?
    } else {
        let oms = if omegas.is_empty() { vec![0.02, 0.025, 0.03, 0.035, 0.04, 0.045, 0.05] } else { omegas.to_vec() };
        oms.par_iter().map(|&o| calibrated_schedule(&dev.params, space, &tpl, o)).collect::<Result<_>>()?
    };
    let model = SimulationModel::new(&dev.params, wi, we, solver(g, gate))?;
    let mut t = SweepResult::new(
        "gate-error",
        &dev.id,
        g.levels,
        &[
            "t_g_ns", "total_ns", "omega_ghz", "target_ghz", "alpha_zx_ghz", "zeta_ghz", "error", "leakage", "flagged",
            "dt_change",
        ],
    );
    t.note("wc_idle_ghz", crate::export::format_sig(wi));
    t.note("wc_ent_ghz", crate::export::format_sig(we));
    t.note("tau0_ns", tau0);
    for r in gate_error_sweep(&model, &schedules, &coh) {
        let r = r?;
        eprintln!("gate t_g = {:.1} ns: {:.2} s", r.schedule.t_g(), r.wall_seconds);
        let s = r.schedule;
        t.push(vec![
            s.t_g().into(),
            s.total().into(),
            s.omega.into(),
            s.target_amplitude.into(),
            r.alpha_zx.into(),
            r.zeta.into(),
            r.error.into(),
            r.leakage.into(),
            if r.flagged { "yes" } else { "no" }.into(),
            r.dt_change.into(),
        ])?;
    }
    Ok(t)
}

fn fringe_table(
    dev: &DeviceRecord,
    space: &HilbertSpace,
    g: &Global,
    range: &CouplerRange,
    omega: f64,
    taus: &[f64],
) -> Result<SweepResult> {
    let mut t = SweepResult::new("fringe", &dev.id, g.levels, &["wc_ghz", "tau_p_ns", "fringe"]);
    t.note("omega_ghz", omega);
    let rows: Vec<Result<(f64, Vec<f64>)>> = range
        .grid()?
        .par_iter()
        .map(|&wc| Ok((wc, ramsey_fringe(&dev.params, space, wc, omega, taus)?)))
        .collect();
    for r in rows {
        let (wc, f) = r?;
        for (tp, v) in taus.iter().zip(f) {
            t.push(vec![wc.into(), (*tp).into(), v.into()])?;
        }
    }
    Ok(t)
}

pub fn parse_label(s: &str) -> Result<Label> {
    let digits: Vec<usize> = s.chars().filter_map(|c| c.to_digit(10).map(|d| d as usize)).collect();
    if digits.len() != 3 || s.chars().count() != 3 {
        return Err(Error::InvalidParameter { name: "initial", reason: format!("`{s}` is not a three-digit label") });
    }
    Ok([digits[0], digits[1], digits[2]])
}

fn leakage_table(
    dev: &DeviceRecord,
    space: &HilbertSpace,
    g: &Global,
    gate: &GateArgs,
    tau0: f64,
    initial: &str,
    every: f64,
) -> Result<SweepResult> {
    let label = parse_label(initial)?;
    let (wi, we) = gate_endpoints(dev, space, gate.kind, gate.wc_ent, g.tolerance)?;
    let coh = gate.coherence.resolve(dev)?;
    let model = SimulationModel::new(&dev.params, wi, we, solver(g, gate))?;
    let sched = PulseSchedule::switch(wi, we, gate.ramp.into(), tau0);
    let series = leakage_population(&model, &sched, &coh, label, every)?;
    let names: Vec<String> = LEAKAGE_LABELS.iter().map(|l| format!("p_{}{}{}", l[0], l[1], l[2])).collect();
    let mut t = SweepResult::new("leakage", &dev.id, g.levels, &["t_ns", &names[0], &names[1], &names[2]]);
    t.note("initial", initial);
    for (tm, p) in series.times.iter().zip(&series.populations) {
        t.push(vec![(*tm).into(), p[0].into(), p[1].into(), p[2].into()])?;
    }
    Ok(t)
}
