//! File formats, configuration, reports and the `ntuple` command line on top
//! of [`ntuple_core`].

pub mod commands;
pub mod config;
pub mod error;
pub mod exec;
pub mod formats;
pub mod problem;
