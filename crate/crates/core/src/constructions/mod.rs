//! The three worked constructions: a uniform/atom mixture, the pair built
//! from halting times, and its smooth variant.

pub mod figure;
pub mod halting;
pub mod mixture;
pub mod smooth;
