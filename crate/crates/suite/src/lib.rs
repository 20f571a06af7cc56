//! Shared pieces of the acceptance suite: a synthetic release, reference
//! implementations written directly from the metric definitions, and the
//! one-line-per-criterion report.

pub mod oracle;
pub mod report;
pub mod synth;
