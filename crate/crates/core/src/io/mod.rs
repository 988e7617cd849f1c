//! Configuration, artifact export and command orchestration.

mod config;
mod export;
mod run;

pub use config::{
    parse_config, ContinuationConfig, ExperimentConfig, FamilyTag, GridConfig, HomotopyConfig, OracleConfig,
    OutputConfig, ProblemConfig, SolverConfig, StartBranch,
};
pub use export::{
    branch_csv, export_branch, export_fields, fields_csv, import_branch, import_fields, BranchRow, FieldRecord,
};
pub use run::{run_command, Command, RunOutcome, EXIT_FAILURE, EXIT_INFEASIBLE, EXIT_IO, EXIT_OK};
