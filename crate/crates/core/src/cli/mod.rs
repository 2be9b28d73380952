//! Run configuration, file emission and the command implementations behind the `nfem` binary.

mod commands;
pub mod config;
pub mod output;

pub use commands::{
    exit_code, parse_point, probe, probe_point, reconstruct, selfcheck, selfcheck_config, simulate,
    threads_from_env, Check, ProbeReport, RayPoint, ReconstructReport, SelfcheckReport,
    SimulateReport, CONVERGENCE_TOLERANCE, EXIT_CONFIG, EXIT_DATA_FORMAT, EXIT_FAILURE, EXIT_OK,
    EXIT_SELFCHECK, EXIT_UNSUPPORTED_GEOMETRY, INTERFACE_SAMPLES, INTERFACE_TOLERANCE,
    RECIPROCITY_TOLERANCE,
};
pub use config::RunConfig;
