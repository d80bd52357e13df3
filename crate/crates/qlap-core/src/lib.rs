//! Spectral graph partitioning on two engines.
//!
//! The crate exposes a classical route and a quantum-simulated route to the
//! same object: the eigenstructure of a graph Laplacian.
//!
//! * [`graph`] — edge-list ingestion, Laplacian assembly, power-of-two
//!   padding, normalization, connectivity, cuts.
//! * [`spectral`] — dense symmetric eigensolver used as the exact oracle,
//!   Fiedler extraction, sign bisection, recursive k-way partitioning.
//! * [`qsim`] — a desk-scale statevector simulator with reproducible,
//!   stream-splittable randomness.
//! * [`evolution`] — Laplacian time evolution, either exact (via the oracle
//!   eigenbasis) or as an edge-wise Trotter product.
//! * [`qpe`] — phase-estimation pipeline: eigenvalue histograms,
//!   post-selected eigenvector readout, sign recovery, kernel-degeneracy
//!   counting, and the end-to-end Fiedler partitioner.
//! * [`resources`] — closed-form resource estimates for the quantum route,
//!   computed without building any state.
//! * [`corpus`] — the named and seeded graph families used across the test
//!   suite and shipped as edge-list files.
//!
//! Conventions used throughout: qubit 0 is the least significant bit of a
//! basis index, system qubits occupy the low bits and ancillas the high
//! bits, and evolution time defaults to `t = 2π` so that a normalized
//! eigenvalue equals its phase fraction.

pub mod corpus;
pub mod evolution;
pub mod graph;
pub mod qpe;
pub mod qsim;
pub mod resources;
pub mod spectral;

pub use graph::{Graph, LaplacianMatrix, NormalizationMode, Partition};
pub use num_complex::Complex64;
pub use qsim::{QuantumState, RngStream, Unitary};
