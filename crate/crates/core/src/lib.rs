//! Surface-code memory experiments under circuit-level depolarizing noise,
//! decoded in batch, with a forward sliding window, or with the parallel
//! sandwich sliding window.
//!
//! The crate is organised bottom-up:
//!
//! * [`surface_code`] builds the rotated layout, the memory circuit and the
//!   detector graphs by propagating every elementary fault.
//! * [`decoders`] holds the inner decoders (weighted union-find and exact
//!   minimum-weight perfect matching) that act on a single window.
//! * [`windows`] cuts a decoder graph into windows, propagates syndromes
//!   across seams and assembles the retained corrections. It also carries
//!   the generic divide-and-conquer recursion the sandwich scheme is an
//!   instance of.
//! * [`sampler`] draws circuit-level noise on the graph with a counter-based
//!   generator, sharing shots across cycle counts.
//! * [`harness`] runs Monte Carlo experiments, schedules window tasks over a
//!   worker pool and fits the logical error rate per `d` cycles.

pub mod decoders;
pub mod error;
pub mod harness;
pub mod sampler;
pub mod surface_code;
pub mod windows;

pub use error::{DecodeError, Error, Result};

pub use decoders::{DecodingGraph, InnerDecoder, InnerKind, MwpmDecoder, UnionFindDecoder};
pub use harness::{
    engine::CellEngine,
    fit::{crossing_point, fit_logical_rate, FitResult, NPoint},
    run_cell, run_experiment,
    scheduler::{schedule_parallel, SchedulerReport},
    sweep::{run_sweep, SweepAxis, SweepDocument},
    CellResult, ExperimentConfig, ResultsDocument,
};
pub use sampler::{ShotRecord, ShotSampler};
pub use surface_code::{
    build_decoder_graph, build_layout, build_memory_circuit, BoundaryState, Circuit, DecoderGraph, DetectorId,
    Layout, PauliType,
};
pub use windows::{
    assemble, CoreStyle, CorrectionSet, PreparedSchedule, Schedule, ScheduleParams, Scheme, TimePartition,
    WindowSpec, WindowType,
};
