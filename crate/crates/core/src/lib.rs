//! Data-driven outage-probability minimization for IRS-aided MISO downlinks.
//!
//! The crate is organized bottom-up:
//!
//! * [`channel`] draws scenario geometry and path-loss-scaled Rayleigh channel samples.
//! * [`objective`] holds the outage margin, its indicator and sigmoid surrogates,
//!   the sample-average objectives and the complex-to-real lifts.
//! * [`solver`] implements the projected stochastic gradients and the alternating loop.
//! * [`experiments`] runs Monte Carlo realizations, baselines and parameter sweeps.

pub mod channel;
pub mod config;
pub mod error;
pub mod experiments;
pub mod gradcheck;
pub mod objective;
pub mod sample_io;
pub mod seed;
pub mod solver;

pub use channel::{
    dbm_to_watts, draw_user_position, generate_channel_sample, generate_sample_set, path_loss,
    ChannelSample, ChannelSampleSet, Position3D, SampleSetMeta, ScenarioGeometry,
};
pub use error::{OutageError, Result};
pub use experiments::{
    emit_csv, realization_seed, run_method_no_irs, run_method_proposed, run_method_random_phase,
    run_point, run_realization, run_sweep, write_csv, ExperimentConfig, Method, MethodSummary,
    SweepParam, SweepResult, SweepRow, SweepSpec,
};
pub use objective::{
    cascaded_channel, empirical_outage, indicator, lift_v, lift_w, margin, sigmoid,
    surrogate_objective, BeamformingVector, MarginScale, PhaseShiftVector, RealLiftV, RealLiftW,
    SystemParams, TwoColumnMatrix,
};
pub use solver::{
    alternating_sgd, beamforming_sgd, grad_v, grad_w, init_point, inner_loop_v, inner_loop_w,
    project_ball, project_unimodular, DecaySchedule, InnerOutcome, SolverConfig, SolverResult,
};

pub use num_complex::Complex64;
