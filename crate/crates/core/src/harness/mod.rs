//! Instance files and generators, plus the experiment runner behind the command-line tool.

pub mod experiment;
pub mod format;
pub mod generate;

pub use experiment::{run_experiment, write_report, Algo, CheckLevel, Fault, RunConfig, RunReport, Status};
pub use format::{parse_instance, parse_str, write_instance, FamilyKind, FileSource};
pub use generate::{generate, GenKind, GenSpec, Generated};
