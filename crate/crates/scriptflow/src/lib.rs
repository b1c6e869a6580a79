//! Prompt-to-script pipeline, file IO, command line and HTTP service around
//! `scriptflow-core`.

pub mod agents;
pub mod backend;
pub mod cli;
pub mod engine;
pub mod runs;
pub mod service;
