//! Numerical laboratory for the least singular value and spectral statistics
//! of random symmetric matrices.

pub mod ensembles;
pub mod rng;
pub mod spectral;
pub mod arithmetic;
pub mod smallball;
pub mod stats;
pub mod experiments;
pub mod cli;
