//! File formats, self-test suites and the command-line front end for
//! `stochastic-core`.

pub mod cli;
pub mod encode;
pub mod io;
pub mod selftest;
