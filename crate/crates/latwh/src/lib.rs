//! Lattice Wiener-Hopf toolkit (std side): oracles, solver, IO, CLI.

pub mod cli;
pub mod io;
pub mod oracle;
pub mod solver;
