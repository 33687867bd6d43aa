//! File formats, configuration and the pipeline stages of the `artforge`
//! command line, on top of `artforge-core`.

pub mod commands;
pub mod config;
pub mod feature_table;
pub mod graph_export;
pub mod labels;
pub mod manifest;
pub mod model_file;
pub mod snapshot;
pub mod truth;

pub use commands::CliError;
pub use config::PipelineConfig;
