//! Transistor-level simulation and analysis for CNTFET SRAM cells.
//!
//! The crate stacks up as:
//!
//! - [`device`] — chirality-derived geometry/threshold and a unified
//!   compact I-V model with analytic derivatives;
//! - [`netlist`] — node-indexed circuits, a SPICE-like text format;
//! - [`cells`] — the 4T..10T SRAM cell library with default tube sizing;
//! - [`solver`] — MNA operating points, sweeps and transient integration;
//! - [`analysis`] — read/write/hold protocols, butterfly curves, static
//!   noise margins, write margins and per-source energy accounting;
//! - [`config`] — key=value parameter files tying it all together.

pub mod analysis;
pub mod cells;
pub mod config;
pub mod device;
pub mod netlist;
pub mod solver;
pub mod waveform;
