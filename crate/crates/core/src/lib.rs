//! Reconstruction and analysis of agents behind pseudonymous ledgers.
//!
//! The crate takes a normalized block chain (see the companion CLI crate for
//! the interchange format), rebuilds the agents behind its addresses from
//! behavioral evidence, and quantifies what the reconstruction implies:
//! mining streaks and 51%-attack windows, effective population size,
//! power-law income tails, follow-the-money hop distances, and the
//! evolutionary dynamics of the resulting N-player Centipede dilemma.
//!
//! The crate is `no_std`-compatible (`alloc` required); disable the default
//! `std` feature for embedded or wasm use. All stochastic operations take
//! explicit seeds and are deterministic given them.

#![cfg_attr(not(feature = "std"), no_std)]

extern crate alloc;

pub mod centipede;
pub mod chain;
pub mod decentralize;
pub mod evodyn;
mod fx;
pub mod linker;
pub mod mapviz;
mod math;
pub mod pareto;
pub mod stats;
pub mod synth;
pub mod txgraph;

pub use chain::{Address, Block, Chain, Transaction, TxEntry};
