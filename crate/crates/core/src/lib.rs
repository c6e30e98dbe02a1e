pub mod basis;
pub mod cli;
pub mod data;
pub mod exec;
pub mod format;
pub mod kan;
pub mod metrics;
pub mod oracle;
pub mod train;
