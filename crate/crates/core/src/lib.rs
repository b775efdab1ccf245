//! Dynamic portfolio optimization with the variational quantum eigensolver.
//!
//! The crate covers the whole pipeline at desk scale:
//!
//! - [`market`]: price ingestion (CSV or a seeded synthetic walk) and the
//!   per-window log-return vectors and covariance matrices.
//! - [`problem`]: the QUBO objective over binary resolution bits, its exact
//!   Ising form, trajectory decoding, objective terms and Sharpe ratios.
//! - [`circuit`]: a small parameterized circuit IR, the four ansatz families
//!   (cyclic, Real Amplitudes, Optimized Real Amplitudes, tailored), logical
//!   depth and a shortest-path SWAP router.
//! - [`sim`]: an exact statevector simulator with diagonal expectation values
//!   and seeded sampling.
//! - [`optimize`]: best2bin differential evolution with elitist
//!   initialization, and a finite-difference conjugate gradient.
//! - [`vqe`]: the estimate/optimize/sample loop and the distribution metrics.
//! - [`baselines`]: exhaustive search, simulated annealing and Trotterized
//!   simulated adiabatic evolution.
//!
//! Bitstrings follow one convention everywhere: character `q` of the string is
//! the value of logical variable `q`. See [`Bitstring`].

pub mod baselines;
pub mod bits;
pub mod circuit;
pub mod market;
pub mod optimize;
pub mod problem;
pub mod seed;
pub mod sim;
pub mod vqe;

pub use bits::Bitstring;
