//! Open-system evolution through OFF-ON-OFF coupler schedules.

mod envelope;
mod lindblad;
mod metrics;
mod model;

pub use envelope::{coupler_ramp_envelope, cr_pulse_envelope, ramp_fraction, RampKind};
pub use lindblad::{lindblad_evolve, Batch, CoherenceSpec, Dissipator, TRACE_TOL};
pub use metrics::{
    calibrated_schedule, coherence_limit, gate_error, gate_error_sweep, leakage_population, model_for, pauli_basis,
    ramsey_fringe, zx90_process_fidelity,
    schedule_for_gate_length, switch_fidelity_loss, GateReport, GateTemplate, PopulationSeries, SwitchReport,
    LEAKAGE_FLAG, LEAKAGE_LABELS,
};
pub use model::{calibrate_flat_top, calibrate_target_tone, FrameStates, PulseSchedule, SimulationModel, SolverOptions};
