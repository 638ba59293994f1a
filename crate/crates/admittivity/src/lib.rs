//! Experiment driver around `admittivity-core`: configuration, the staged
//! pipeline, field I/O, reports and heatmaps.

pub mod config;
pub mod fields;
pub mod heatmap;
pub mod output;
pub mod report;
pub mod runner;
pub mod sweep;
