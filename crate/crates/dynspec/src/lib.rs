//! File formats, parallel scans, experiments and the command-line front end
//! for [`dynspec_core`].

pub mod cli;
pub mod experiments;
pub mod mtx;
pub mod problem;
pub mod render;
pub mod report;
pub mod scan;
