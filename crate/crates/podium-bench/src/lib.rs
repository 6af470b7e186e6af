//! Benchmark harness for the `podium` crate: regenerates the shape and
//! relative-efficiency tables, runs seeded privatization experiments, and
//! certifies the privacy ratio bound from the command line.

pub mod commands;
pub mod config;
pub mod input;
