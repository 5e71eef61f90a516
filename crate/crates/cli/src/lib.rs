//! Command-line tools, file formats and the acceptance checks for `cle-core`.

pub mod batch;
pub mod cli;
pub mod output;
pub mod patches;
pub mod verify;

pub use cli::run;
