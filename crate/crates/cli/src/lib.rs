//! Experiment-runner internals: config parsing, dispatch, manifests, and the
//! golden-fixture generator. The `limsup-lab` binary is a thin shell over
//! these modules.

pub mod config;
pub mod fixtures;
pub mod manifest;
pub mod run;
