//! Configuration and stage orchestration for the `polarnet` command.

pub mod config;
pub mod pipeline;

pub use config::PipelineConfig;
pub use pipeline::{run_pipeline, run_stage, Manifest, MissingIntermediate, Stage, StageError};
