//! Config parsing, command dispatch and report output behind the
//! `rcircular` binary.

pub mod commands;
pub mod config;
pub mod output;
