//! Standard-library companion to `envt-core`: mesh and field file formats,
//! a thread-pool executor, run configuration, JSON reports and the `envt`
//! command-line tool.

pub mod cli;
pub mod config;
pub mod exec;
pub mod io;
pub mod report;

pub use exec::Rayon;
pub use io::{load_mesh, save_mesh, IoError};
