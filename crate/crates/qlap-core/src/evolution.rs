//! Hamiltonian evolution backends for the phase-estimation circuit.
//!
//! Both backends realize `exp(i t L)` for a (possibly normalized) Laplacian
//! `L` acting on the low `k` qubits of a register, where `2^k` is the matrix
//! dimension:
//!
//! * **Exact** — eigendecompose once and synthesize the dense propagator
//!   `V diag(e^{i λ t}) Vᵀ`. Powers come free by scaling `t`.
//! * **Trotter** — product-formula splitting over the edge terms. A single
//!   edge `{u, v}` contributes `L_e` with `L_e² = 2 L_e`, so its exponential
//!   collapses to the closed form `I + β(θ) L_e` with
//!   `β(θ) = (e^{2iθ} − 1)/2`; each factor is a two-amplitude mix applied
//!   directly to the state. Powers repeat the step sequence, keeping the
//!   step angle fixed.
//!
//! Edge factors are swept in ascending edge order; the symmetric order adds
//! the reversed half-sweep, canceling the first-order splitting error.

use crate::graph::LaplacianMatrix;
use crate::qsim::{QuantumState, SimError, Unitary};
use crate::spectral::{eig_sym, SpectralError, SpectralResult};
use num_complex::Complex64;
use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TrotterOrder {
    /// Single forward sweep per step; error falls off linearly in the step.
    First,
    /// Forward plus reversed half-sweeps per step; error falls off
    /// quadratically in the step.
    Symmetric,
}

impl std::fmt::Display for TrotterOrder {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            TrotterOrder::First => write!(f, "first"),
            TrotterOrder::Symmetric => write!(f, "symmetric"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum EvolutionBackend {
    Exact,
    Trotter { steps: usize, order: TrotterOrder },
}

impl std::fmt::Display for EvolutionBackend {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            EvolutionBackend::Exact => write!(f, "exact"),
            EvolutionBackend::Trotter { steps, order } => {
                write!(f, "trotter(steps={steps}, order={order})")
            }
        }
    }
}

#[derive(Debug, Error, PartialEq)]
pub enum EvolutionError {
    #[error("laplacian must be normalized before evolution; raw eigenvalues alias phases")]
    NotNormalized,
    #[error("matrix dimension {dim} is not a power of two; pad the graph first")]
    NonPowerOfTwoDim { dim: usize },
    #[error("trotter step count must be at least 1")]
    ZeroSteps,
    #[error("{steps} steps doubled {power} times overflows the step counter")]
    StepOverflow { steps: usize, power: u32 },
    #[error("control qubit {control} lies inside the {system}-qubit system register")]
    ControlInsideSystem { control: usize, system: usize },
    #[error(transparent)]
    Spectral(#[from] SpectralError),
    #[error(transparent)]
    Sim(#[from] SimError),
}

/// Mixing coefficient `β(θ) = (e^{2iθ} − 1)/2` of the closed-form edge
/// exponential `exp(i θ L_e) = I + β(θ) L_e`.
pub fn edge_mix_coefficient(theta: f64) -> Complex64 {
    (Complex64::from_polar(1.0, 2.0 * theta) - Complex64::new(1.0, 0.0)) * 0.5
}

/// Dense propagator `exp(i t L)` assembled from a precomputed
/// eigendecomposition of `L`.
pub fn exact_propagator_from_eig(eig: &SpectralResult, t: f64) -> Result<Unitary, SimError> {
    let n = eig.eigenvalues.len();
    let phases: Vec<Complex64> = eig
        .eigenvalues
        .iter()
        .map(|&lambda| Complex64::from_polar(1.0, lambda * t))
        .collect();
    let mut data = vec![Complex64::new(0.0, 0.0); n * n];
    for (phase, vec) in phases.iter().zip(&eig.eigenvectors) {
        for (a, &va) in vec.iter().enumerate() {
            let row = phase * va;
            for (b, &vb) in vec.iter().enumerate() {
                data[a * n + b] += row * vb;
            }
        }
    }
    Unitary::new(n, data)
}

/// Dense propagator `exp(i t L)`, diagonalizing `L` on the spot.
/// Rejects unnormalized matrices: with eigenvalues outside `[0, 1)` the
/// phase-to-eigenvalue map of the estimation pipeline would wrap around.
pub fn exact_propagator(l: &LaplacianMatrix, t: f64) -> Result<Unitary, EvolutionError> {
    check_normalized(l)?;
    let eig = eig_sym(l)?;
    Ok(exact_propagator_from_eig(&eig, t)?)
}

fn check_normalized(l: &LaplacianMatrix) -> Result<(), EvolutionError> {
    if !l.is_normalized() {
        return Err(EvolutionError::NotNormalized);
    }
    Ok(())
}

/// Number of system qubits implied by the matrix dimension.
fn system_qubits(l: &LaplacianMatrix) -> Result<usize, EvolutionError> {
    let dim = l.dim();
    if !dim.is_power_of_two() {
        return Err(EvolutionError::NonPowerOfTwoDim { dim });
    }
    Ok(dim.trailing_zeros() as usize)
}

/// Mixes the amplitude pair `{u, v}` of the system sub-index by
/// `I + β L_e`, once per configuration of the high (non-system) bits; with a
/// control, only configurations with the control bit set are touched.
fn apply_edge_rotation(
    state: &mut QuantumState,
    system: usize,
    control: Option<usize>,
    u: usize,
    v: usize,
    beta: Complex64,
) {
    let dim = state.dim();
    let amps = state.amplitudes_mut();
    let control_mask = control.map(|c| 1usize << c).unwrap_or(0);
    for high in 0..(dim >> system) {
        let base = high << system;
        if base & control_mask != control_mask {
            continue;
        }
        let i = base | u;
        let j = base | v;
        let d = beta * (amps[i] - amps[j]);
        amps[i] += d;
        amps[j] -= d;
    }
}

/// Applies `steps` Trotter steps of `exp(i t L)` to the low system qubits of
/// `state`, optionally controlled on a qubit outside the system register.
pub fn apply_trotter(
    state: &mut QuantumState,
    control: Option<usize>,
    l: &LaplacianMatrix,
    t: f64,
    steps: usize,
    order: TrotterOrder,
) -> Result<(), EvolutionError> {
    check_normalized(l)?;
    let system = system_qubits(l)?;
    if steps == 0 {
        return Err(EvolutionError::ZeroSteps);
    }
    if state.num_qubits() < system {
        return Err(SimError::DimensionMismatch {
            got: l.dim(),
            expected: state.dim(),
        }
        .into());
    }
    if let Some(c) = control {
        if c >= state.num_qubits() {
            return Err(SimError::QubitOutOfRange {
                qubit: c,
                n: state.num_qubits(),
            }
            .into());
        }
        if c < system {
            return Err(EvolutionError::ControlInsideSystem { control: c, system });
        }
    }
    let edges = l.edge_pairs();
    let theta = t / (steps as f64 * l.divisor());
    match order {
        TrotterOrder::First => {
            let beta = edge_mix_coefficient(theta);
            for _ in 0..steps {
                for &(u, v) in &edges {
                    apply_edge_rotation(state, system, control, u, v, beta);
                }
            }
        }
        TrotterOrder::Symmetric => {
            let beta = edge_mix_coefficient(theta / 2.0);
            for _ in 0..steps {
                for &(u, v) in &edges {
                    apply_edge_rotation(state, system, control, u, v, beta);
                }
                for &(u, v) in edges.iter().rev() {
                    apply_edge_rotation(state, system, control, u, v, beta);
                }
            }
        }
    }
    Ok(())
}

/// Applies the controlled `2^power`-th power of the evolution `exp(i t L)`.
///
/// The exact backend rescales time; the Trotter backend repeats the step
/// sequence `2^power` times so the step angle — and thus the effective
/// simulated operator — matches the literal circuit. Passing a precomputed
/// eigendecomposition skips re-diagonalizing on the exact path.
pub fn apply_controlled_power(
    state: &mut QuantumState,
    control: usize,
    l: &LaplacianMatrix,
    t: f64,
    power: u32,
    backend: &EvolutionBackend,
    eig: Option<&SpectralResult>,
) -> Result<(), EvolutionError> {
    match *backend {
        EvolutionBackend::Exact => {
            check_normalized(l)?;
            let system = system_qubits(l)?;
            let scaled_t = t * (power as f64).exp2();
            let owned;
            let eig_ref = match eig {
                Some(e) => e,
                None => {
                    owned = eig_sym(l)?;
                    &owned
                }
            };
            let u = exact_propagator_from_eig(eig_ref, scaled_t)?;
            let targets: Vec<usize> = (0..system).collect();
            state.apply_controlled(control, &targets, &u)?;
            Ok(())
        }
        EvolutionBackend::Trotter { steps, order } => {
            let factor = 1usize
                .checked_shl(power)
                .ok_or(EvolutionError::StepOverflow { steps, power })?;
            let total = steps
                .checked_mul(factor)
                .ok_or(EvolutionError::StepOverflow { steps, power })?;
            apply_trotter(state, Some(control), l, t * factor as f64, total, order)
        }
    }
}
