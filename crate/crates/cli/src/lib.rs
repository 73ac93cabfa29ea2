//! Command implementations behind the `poincare` binary.
pub mod commands;
pub mod suite;
