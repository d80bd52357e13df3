//! Phase-estimation pipeline on the normalized Laplacian.
//!
//! With the evolution time fixed at `t = 2π` and eigenvalues scaled into
//! `[0, 1)`, each eigenvalue *is* its phase: `m` ancilla bits read an
//! eigenvalue to one part in `2^m` of the divisor. The pipeline stacks:
//!
//! * [`prepare_state`] — initial-state strategies, from exact injected
//!   eigenvectors (test oracle) to random states deflated against known
//!   directions (the honest default for Fiedler targeting);
//! * [`qpe_run`] — one circuit execution: ancillas in superposition, the
//!   controlled `U^{2^j}` ladder, inverse QFT, ancilla measurement, and the
//!   collapsed system register;
//! * [`eigenvalue_histogram`] — repeated runs aggregated into per-bin counts
//!   with eigenvalue labels in unnormalized units;
//! * [`readout_eigenvector`] / [`recover_signs`] — post-selected eigenvector
//!   magnitude estimation, with signs from a simulator-privileged trace or
//!   from pairwise interference experiments;
//! * [`count_zero_degeneracy`] — kernel dimension (= component count once
//!   ghost padding is subtracted) by repeated orthogonal preparation;
//! * [`quantum_fiedler_partition`] — the end-to-end bisection pipeline.
//!
//! Registers: system on qubits `0..n` (vertex `v` ↔ basis state `|v⟩`),
//! ancilla bit `j` on qubit `n + j`. Every randomized loop derives one
//! child stream per work item from the caller's stream, so parallel and
//! sequential execution aggregate bit-identically.

use crate::evolution::{apply_controlled_power, EvolutionBackend, EvolutionError};
use crate::graph::{Graph, GraphError, LaplacianMatrix, NormalizationMode, Partition};
use crate::qsim::{draw_index, QuantumState, RngStream, SimError, MAX_QUBITS};
use crate::spectral::{eig_sym, oracle_cap, sign_bisect, SpectralError, SpectralResult};
use num_complex::Complex64;
use rayon::prelude::*;
use serde::ser::{SerializeStruct, Serializer};
use serde::Serialize;
use std::collections::BTreeMap;
use thiserror::Error;

/// Fixed evolution time `t = 2π`: normalized eigenvalues map to phases 1:1.
pub const EVOLUTION_TIME: f64 = std::f64::consts::TAU;

/// Default target precision δ (normalized units).
pub const DEFAULT_PRECISION: f64 = 1.0 / 64.0;

/// Default extra ancilla bits beyond `ceil(log2(1/δ))`.
pub const DEFAULT_GUARD_BITS: usize = 2;

pub const DEFAULT_SHOTS: u64 = 4096;
pub const DEFAULT_N_SAMPLES: u64 = 4096;

/// Residual threshold for counting a collapsed state as a new kernel
/// dimension.
pub const DEFAULT_RANK_TOL: f64 = 1e-6;

/// Measurement attempts per degeneracy round before the round counts as a
/// failure to extend.
pub const DEFAULT_RETRY_BUDGET: u64 = 32;

/// Degeneracy counting stops after `factor · dim` consecutive rounds that
/// fail to extend the accepted set.
pub const DEFAULT_MAX_ROUNDS_FACTOR: usize = 4;

/// Re-estimation passes applied to each accepted kernel candidate; every
/// pass multiplies spectral-leakage contamination by another leakage factor.
pub const DEFAULT_CONFIRM_ROUNDS: usize = 2;

/// Post-selection gives up after `factor · n_samples` attempts.
pub const POST_SELECTION_BUDGET_FACTOR: u64 = 100;

const TRACE_SIGN_TOL: f64 = 1e-9;
const PREP_RESIDUAL_TOL: f64 = 1e-6;
const PREP_DRAW_CAP: usize = 64;
const ATTEMPT_CHUNK: u64 = 64;

// Stream categories; each randomized loop derives child streams under its
// own category so no two loops ever share a draw sequence.
const STREAM_SHOT: u64 = 1;
const STREAM_READOUT: u64 = 2;
const STREAM_SIGN: u64 = 3;
const STREAM_DEGEN_PREP: u64 = 4;
const STREAM_DEGEN_MEASURE: u64 = 5;
const STREAM_DEGEN_CONFIRM: u64 = 6;

#[derive(Debug, Error, PartialEq)]
pub enum QpeError {
    #[error("precision delta must lie in (0, 1], got {delta}")]
    InvalidPrecision { delta: f64 },
    #[error("ancilla count must be at least 1 (delta {delta}, guard {guard})")]
    NoAncillas { delta: f64, guard: usize },
    #[error("shot count must be at least 1")]
    ZeroShots,
    #[error("sample budget must be at least 1")]
    ZeroSamples,
    #[error("state preparation expected {expected} amplitudes, got {got}")]
    PrepLength { got: usize, expected: usize },
    #[error("injected vector must be unit norm, got {norm}")]
    NotUnit { norm: f64 },
    #[error("orthogonal preparation impossible: avoid-list spans the whole space")]
    SpanExhausted,
    #[error("laplacian must be normalized for phase estimation")]
    NotNormalized,
    #[error("phase estimation needs {total} qubits, above the {MAX_QUBITS}-qubit simulator cap")]
    TooManyQubits { total: usize },
    #[error("initial state has {got} qubits but the system register needs {expected}")]
    SystemSize { got: usize, expected: usize },
    #[error("bin {bin} out of range for {bins} ancilla outcomes")]
    BinOutOfRange { bin: usize, bins: usize },
    #[error("target bin {bin} not observed often enough within {attempts} post-selection attempts")]
    PostSelectionStarved { bin: usize, attempts: u64 },
    #[error("no nonzero eigenvalue bin above the noise floor {floor}")]
    NoFiedlerSignal { floor: u64 },
    #[error("graph is disconnected ({components} components); partition components separately")]
    Disconnected { components: usize },
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(transparent)]
    Spectral(#[from] SpectralError),
    #[error(transparent)]
    Evolution(#[from] EvolutionError),
    #[error(transparent)]
    Sim(#[from] SimError),
}

/// Initial-state strategy for the system register.
#[derive(Debug, Clone, PartialEq)]
pub enum StatePrep {
    /// Exact basis state `|k⟩`.
    Basis(usize),
    /// `H^{⊗n}|0⟩` — the (normalized) all-ones vector.
    Uniform,
    /// Isotropically random real unit vector, fresh per shot.
    RandomReal,
    /// Random real unit vector orthogonalized against the given vectors
    /// (e.g. the all-ones kernel direction), fresh per shot.
    OrthogonalRandom(Vec<Vec<f64>>),
    /// Exact amplitude encoding of a caller-supplied real unit vector.
    Injected(Vec<f64>),
}

impl StatePrep {
    /// Strategies that produce the same state on every shot.
    pub fn is_deterministic(&self) -> bool {
        matches!(
            self,
            StatePrep::Basis(_) | StatePrep::Uniform | StatePrep::Injected(_)
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReadoutMode {
    /// Read magnitudes and signs directly from the collapsed statevector
    /// (simulator-privileged ground truth).
    Trace,
    /// Estimate magnitudes from post-selected basis-state samples and signs
    /// from pairwise interference experiments.
    Sampling,
}

impl std::fmt::Display for ReadoutMode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            ReadoutMode::Trace => write!(f, "trace"),
            ReadoutMode::Sampling => write!(f, "sampling"),
        }
    }
}

/// How the partition pipeline verifies connectivity before running.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ConnectivityCheck {
    /// Classical union-find (default, free).
    UnionFind,
    /// Quantum degeneracy counting (self-contained but costly).
    Quantum,
}

/// Knobs for the whole pipeline; construct with [`QpeConfig::new`] and
/// override fields as needed. Entry points re-validate before running.
#[derive(Debug, Clone)]
pub struct QpeConfig {
    /// Target eigenvalue precision δ in normalized units, in `(0, 1]`.
    pub delta: f64,
    /// Extra ancilla bits beyond `ceil(log2(1/δ))`.
    pub guard_bits: usize,
    pub backend: EvolutionBackend,
    pub shots: u64,
    pub n_samples: u64,
    pub seed: u64,
    pub state_prep: StatePrep,
    pub normalization: NormalizationMode,
    pub readout: ReadoutMode,
    pub connectivity_check: ConnectivityCheck,
    /// Residual threshold for new kernel dimensions in degeneracy counting.
    pub rank_tol: f64,
    /// Measurement attempts per degeneracy round.
    pub retry_budget: u64,
    /// Consecutive-failure cap is `max_rounds_factor · dim`.
    pub max_rounds_factor: usize,
    /// Purification passes per accepted kernel candidate.
    pub confirm_rounds: usize,
    /// Histogram count below which a bin is treated as noise; `None` uses
    /// [`default_noise_floor`].
    pub noise_floor: Option<u64>,
}

impl QpeConfig {
    pub fn new(delta: f64) -> Result<QpeConfig, QpeError> {
        let cfg = QpeConfig {
            delta,
            guard_bits: DEFAULT_GUARD_BITS,
            backend: EvolutionBackend::Exact,
            shots: DEFAULT_SHOTS,
            n_samples: DEFAULT_N_SAMPLES,
            seed: 0,
            state_prep: StatePrep::Uniform,
            normalization: NormalizationMode::GershgorinPow2,
            readout: ReadoutMode::Trace,
            connectivity_check: ConnectivityCheck::UnionFind,
            rank_tol: DEFAULT_RANK_TOL,
            retry_budget: DEFAULT_RETRY_BUDGET,
            max_rounds_factor: DEFAULT_MAX_ROUNDS_FACTOR,
            confirm_rounds: DEFAULT_CONFIRM_ROUNDS,
            noise_floor: None,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    /// Ancilla count `m = ceil(log2(1/δ)) + guard`; the bin width `2^−m`
    /// is then at most δ.
    pub fn ancilla_bits(&self) -> usize {
        let precision_bits = (1.0 / self.delta).log2().ceil().max(0.0) as usize;
        precision_bits + self.guard_bits
    }

    pub fn validate(&self) -> Result<(), QpeError> {
        if !(self.delta > 0.0 && self.delta <= 1.0) {
            return Err(QpeError::InvalidPrecision { delta: self.delta });
        }
        if self.ancilla_bits() == 0 {
            return Err(QpeError::NoAncillas {
                delta: self.delta,
                guard: self.guard_bits,
            });
        }
        debug_assert!((self.ancilla_bits() as f64).exp2().recip() <= self.delta);
        if self.shots == 0 {
            return Err(QpeError::ZeroShots);
        }
        if self.n_samples == 0 {
            return Err(QpeError::ZeroSamples);
        }
        Ok(())
    }
}

/// 3σ of a uniform-leakage multinomial null (`shots` spread over `2^m`
/// bins), floored at 9 — the self-consistent 3σ point for near-empty bins.
pub fn default_noise_floor(shots: u64, ancilla_bits: usize) -> u64 {
    let bins = (ancilla_bits as f64).exp2();
    let sigma = (shots as f64 / bins).sqrt();
    (3.0 * sigma).ceil().max(9.0) as u64
}

/// Magnitudes at or below this are too faint for sign estimation at the
/// given sample budget (their estimate is within 3σ of zero).
pub fn sign_floor(n_samples: u64) -> f64 {
    3.0 / (n_samples as f64).sqrt()
}

/// Builds the system-register initial state for one shot.
pub fn prepare_state(
    prep: &StatePrep,
    num_qubits: usize,
    rng: &mut RngStream,
) -> Result<QuantumState, QpeError> {
    let dim = 1usize << num_qubits;
    match prep {
        StatePrep::Basis(k) => Ok(QuantumState::basis_state(num_qubits, *k)?),
        StatePrep::Uniform => {
            let amp = 1.0 / (dim as f64).sqrt();
            Ok(QuantumState::from_real_amplitudes(&vec![amp; dim])?)
        }
        StatePrep::RandomReal => Ok(QuantumState::from_real_amplitudes(
            &rng.random_real_unit(dim),
        )?),
        StatePrep::OrthogonalRandom(avoid) => {
            for v in avoid {
                if v.len() != dim {
                    return Err(QpeError::PrepLength {
                        got: v.len(),
                        expected: dim,
                    });
                }
            }
            let basis = orthonormalize_real(avoid);
            if basis.len() >= dim {
                return Err(QpeError::SpanExhausted);
            }
            for _ in 0..PREP_DRAW_CAP {
                let mut w = rng.random_real_unit(dim);
                for b in &basis {
                    let dot: f64 = b.iter().zip(&w).map(|(x, y)| x * y).sum();
                    for (wi, bi) in w.iter_mut().zip(b) {
                        *wi -= dot * bi;
                    }
                }
                let norm = w.iter().map(|x| x * x).sum::<f64>().sqrt();
                if norm > PREP_RESIDUAL_TOL {
                    for wi in w.iter_mut() {
                        *wi /= norm;
                    }
                    return Ok(QuantumState::from_real_amplitudes(&w)?);
                }
            }
            Err(QpeError::SpanExhausted)
        }
        StatePrep::Injected(v) => {
            if v.len() != dim {
                return Err(QpeError::PrepLength {
                    got: v.len(),
                    expected: dim,
                });
            }
            let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
            if (norm - 1.0).abs() > 1e-8 {
                return Err(QpeError::NotUnit { norm });
            }
            let exact: Vec<f64> = v.iter().map(|x| x / norm).collect();
            Ok(QuantumState::from_real_amplitudes(&exact)?)
        }
    }
}

fn orthonormalize_real(vectors: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let mut basis: Vec<Vec<f64>> = Vec::new();
    for v in vectors {
        let mut w = v.clone();
        for b in &basis {
            let dot: f64 = b.iter().zip(&w).map(|(x, y)| x * y).sum();
            for (wi, bi) in w.iter_mut().zip(b) {
                *wi -= dot * bi;
            }
        }
        let norm = w.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm > 1e-9 {
            for wi in w.iter_mut() {
                *wi /= norm;
            }
            basis.push(w);
        }
    }
    basis
}

fn system_bits(l: &LaplacianMatrix) -> Result<usize, QpeError> {
    let dim = l.dim();
    if !dim.is_power_of_two() {
        return Err(QpeError::Evolution(EvolutionError::NonPowerOfTwoDim {
            dim,
        }));
    }
    Ok(dim.trailing_zeros() as usize)
}

/// Fully evolved pre-measurement circuit state: built once, measured as
/// often as needed (repeated measurement of one prepared circuit is
/// distribution-identical to re-running the deterministic circuit).
struct QpeCircuit {
    n: usize,
    m: usize,
    state: QuantumState,
}

impl QpeCircuit {
    fn ancilla_register(&self) -> Vec<usize> {
        (self.n..self.n + self.m).collect()
    }

    fn measure(&self, rng: &mut RngStream) -> Result<(usize, QuantumState), SimError> {
        let (bin, collapsed) = self.state.measure_register(&self.ancilla_register(), rng)?;
        let offset = bin << self.n;
        let sys = collapsed.amplitudes()[offset..offset + (1 << self.n)].to_vec();
        Ok((bin, QuantumState::from_vec_unchecked(self.n, sys)))
    }

    fn ancilla_marginal(&self) -> Vec<f64> {
        self.state
            .register_marginal(&self.ancilla_register())
            .expect("ancilla register is valid by construction")
    }
}

fn run_circuit(
    l: &LaplacianMatrix,
    psi0: &QuantumState,
    cfg: &QpeConfig,
    eig: Option<&SpectralResult>,
) -> Result<QpeCircuit, QpeError> {
    if !l.is_normalized() {
        return Err(QpeError::NotNormalized);
    }
    let n = system_bits(l)?;
    if psi0.num_qubits() != n {
        return Err(QpeError::SystemSize {
            got: psi0.num_qubits(),
            expected: n,
        });
    }
    let m = cfg.ancilla_bits();
    let total = n + m;
    if total > MAX_QUBITS {
        return Err(QpeError::TooManyQubits { total });
    }
    let mut amps = vec![Complex64::new(0.0, 0.0); 1 << total];
    amps[..1 << n].copy_from_slice(psi0.amplitudes());
    let mut state = QuantumState::from_vec_unchecked(total, amps);
    for a in 0..m {
        state.hadamard(n + a)?;
    }
    for j in 0..m {
        apply_controlled_power(
            &mut state,
            n + j,
            l,
            EVOLUTION_TIME,
            j as u32,
            &cfg.backend,
            eig,
        )?;
    }
    let ancillas: Vec<usize> = (n..total).collect();
    state.inverse_qft(&ancillas)?;
    Ok(QpeCircuit { n, m, state })
}

fn backend_eig(
    l: &LaplacianMatrix,
    cfg: &QpeConfig,
) -> Result<Option<SpectralResult>, QpeError> {
    match cfg.backend {
        EvolutionBackend::Exact => Ok(Some(eig_sym(l)?)),
        EvolutionBackend::Trotter { .. } => Ok(None),
    }
}

/// One phase-estimation execution: returns the measured ancilla bin and the
/// collapsed system register.
pub fn qpe_run(
    l: &LaplacianMatrix,
    psi0: &QuantumState,
    cfg: &QpeConfig,
    rng: &mut RngStream,
) -> Result<(usize, QuantumState), QpeError> {
    cfg.validate()?;
    let eig = backend_eig(l, cfg)?;
    let circuit = run_circuit(l, psi0, cfg, eig.as_ref())?;
    Ok(circuit.measure(rng)?)
}

/// Shared per-attempt executor: caches the circuit when the preparation is
/// deterministic, rebuilds it from fresh random draws otherwise.
struct AttemptEngine<'a> {
    l: &'a LaplacianMatrix,
    cfg: &'a QpeConfig,
    n: usize,
    eig: Option<SpectralResult>,
    cached: Option<QpeCircuit>,
}

impl<'a> AttemptEngine<'a> {
    fn new(l: &'a LaplacianMatrix, cfg: &'a QpeConfig) -> Result<Self, QpeError> {
        cfg.validate()?;
        if !l.is_normalized() {
            return Err(QpeError::NotNormalized);
        }
        let n = system_bits(l)?;
        let eig = backend_eig(l, cfg)?;
        let cached = if cfg.state_prep.is_deterministic() {
            let mut unused = RngStream::new(cfg.seed, u64::MAX);
            let psi0 = prepare_state(&cfg.state_prep, n, &mut unused)?;
            Some(run_circuit(l, &psi0, cfg, eig.as_ref())?)
        } else {
            None
        };
        Ok(AttemptEngine {
            l,
            cfg,
            n,
            eig,
            cached,
        })
    }

    fn attempt(&self, stream: &mut RngStream) -> Result<(usize, QuantumState), QpeError> {
        match &self.cached {
            Some(circuit) => Ok(circuit.measure(stream)?),
            None => {
                let psi0 = prepare_state(&self.cfg.state_prep, self.n, stream)?;
                let circuit = run_circuit(self.l, &psi0, self.cfg, self.eig.as_ref())?;
                Ok(circuit.measure(stream)?)
            }
        }
    }
}

/// Ancilla outcome counts with the bin → eigenvalue conversion baked in.
#[derive(Debug, Clone, PartialEq)]
pub struct EigHistogram {
    bin_counts: BTreeMap<usize, u64>,
    total_shots: u64,
    ancilla_bits: usize,
    divisor: f64,
}

impl EigHistogram {
    pub fn counts(&self) -> &BTreeMap<usize, u64> {
        &self.bin_counts
    }

    pub fn total_shots(&self) -> u64 {
        self.total_shots
    }

    pub fn ancilla_bits(&self) -> usize {
        self.ancilla_bits
    }

    pub fn divisor(&self) -> f64 {
        self.divisor
    }

    /// Eigenvalue estimate in unnormalized units: `(bin / 2^m) · c`.
    pub fn eigenvalue_of_bin(&self, bin: usize) -> f64 {
        (bin as f64 / (self.ancilla_bits as f64).exp2()) * self.divisor
    }

    /// Most frequent bin; ties resolve to the smallest bin index.
    pub fn modal_bin(&self) -> Option<usize> {
        self.bin_counts
            .iter()
            .max_by(|a, b| a.1.cmp(b.1).then(b.0.cmp(a.0)))
            .map(|(&bin, _)| bin)
    }

    /// Smallest bin at or above `min_bin` with a count above the floor.
    pub fn first_significant_bin(&self, min_bin: usize, floor: u64) -> Option<usize> {
        self.bin_counts
            .iter()
            .find(|&(&bin, &count)| bin >= min_bin && count >= floor)
            .map(|(&bin, _)| bin)
    }
}

impl Serialize for EigHistogram {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        #[derive(Serialize)]
        struct Bin {
            bin: usize,
            count: u64,
            eigenvalue: f64,
        }
        let bins: Vec<Bin> = self
            .bin_counts
            .iter()
            .map(|(&bin, &count)| Bin {
                bin,
                count,
                eigenvalue: self.eigenvalue_of_bin(bin),
            })
            .collect();
        let mut s = serializer.serialize_struct("EigHistogram", 4)?;
        s.serialize_field("ancilla_bits", &self.ancilla_bits)?;
        s.serialize_field("divisor", &self.divisor)?;
        s.serialize_field("total_shots", &self.total_shots)?;
        s.serialize_field("bins", &bins)?;
        s.end()
    }
}

/// Repeats the circuit `cfg.shots` times (fresh initial state per shot for
/// random strategies) and aggregates ancilla outcomes.
pub fn eigenvalue_histogram(
    l: &LaplacianMatrix,
    cfg: &QpeConfig,
    rng: &RngStream,
) -> Result<EigHistogram, QpeError> {
    let engine = AttemptEngine::new(l, cfg)?;
    let bins: Vec<usize> = if let Some(circuit) = &engine.cached {
        // deterministic preparation: one circuit, independent draws from its
        // ancilla marginal — the same distribution each run would produce
        let probs = circuit.ancilla_marginal();
        (0..cfg.shots)
            .into_par_iter()
            .map(|s| {
                let u = rng.derive(STREAM_SHOT, s).uniform();
                draw_index(&probs, u)
            })
            .collect()
    } else {
        (0..cfg.shots)
            .into_par_iter()
            .map(|s| {
                let mut stream = rng.derive(STREAM_SHOT, s);
                engine.attempt(&mut stream).map(|(bin, _)| bin)
            })
            .collect::<Result<_, _>>()?
    };
    let mut counts: BTreeMap<usize, u64> = BTreeMap::new();
    for b in bins {
        *counts.entry(b).or_insert(0) += 1;
    }
    Ok(EigHistogram {
        bin_counts: counts,
        total_shots: cfg.shots,
        ancilla_bits: cfg.ancilla_bits(),
        divisor: l.divisor(),
    })
}

/// Runs post-selection attempts until `needed` acceptances, evaluating
/// `sample` on each accepted collapse. Attempts execute in parallel chunks
/// but are consumed strictly in attempt order, so results and the
/// attempts-used count match sequential execution exactly.
fn collect_post_selected<T, F>(
    engine: &AttemptEngine,
    target: usize,
    needed: u64,
    budget: u64,
    rng: &RngStream,
    kind: u64,
    offset: u64,
    sample: F,
) -> Result<(Vec<T>, u64), QpeError>
where
    T: Send,
    F: Fn(&QuantumState, &mut RngStream) -> Result<T, QpeError> + Sync,
{
    let mut out: Vec<T> = Vec::with_capacity(needed.min(1 << 20) as usize);
    let mut attempts_used = 0u64;
    let mut base = 0u64;
    while (out.len() as u64) < needed && base < budget {
        let hi = (base + ATTEMPT_CHUNK).min(budget);
        let chunk: Vec<Option<Result<T, QpeError>>> = (base..hi)
            .into_par_iter()
            .map(|a| {
                let mut stream = rng.derive(kind, offset + a);
                match engine.attempt(&mut stream) {
                    Err(e) => Some(Err(e)),
                    Ok((bin, post)) => {
                        if bin == target {
                            Some(sample(&post, &mut stream))
                        } else {
                            None
                        }
                    }
                }
            })
            .collect();
        for item in chunk {
            if (out.len() as u64) == needed {
                break;
            }
            attempts_used += 1;
            if let Some(res) = item {
                out.push(res?);
            }
        }
        base = hi;
    }
    if (out.len() as u64) < needed {
        return Err(QpeError::PostSelectionStarved {
            bin: target,
            attempts: attempts_used,
        });
    }
    Ok((out, attempts_used))
}

/// Per-vertex sign relative to the reference vertex.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sign {
    Plus,
    Minus,
    /// Magnitude too small to estimate a sign at the sample budget.
    Unknown,
}

impl Serialize for Sign {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        match self {
            Sign::Plus => serializer.serialize_i8(1),
            Sign::Minus => serializer.serialize_i8(-1),
            Sign::Unknown => serializer.serialize_none(),
        }
    }
}

/// Eigenvector readout: per-vertex magnitude estimates with sign labels.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReadoutResult {
    pub magnitudes: Vec<f64>,
    pub signs: Vec<Sign>,
    /// Post-selection attempts consumed, rejected runs included (sign
    /// recovery attempts included in sampling mode).
    pub samples_used: u64,
    pub target_bin: usize,
}

/// Post-selected eigenvector readout at `target_bin`.
///
/// Trace mode collapses once and reads the statevector, fixing the global
/// phase so the largest-magnitude element is real positive. Sampling mode
/// draws one basis-state sample per accepted run until `cfg.n_samples`
/// acceptances; magnitudes are square-rooted frequencies and signs come
/// from [`recover_signs`].
pub fn readout_eigenvector(
    l: &LaplacianMatrix,
    cfg: &QpeConfig,
    target_bin: usize,
    rng: &RngStream,
    mode: ReadoutMode,
) -> Result<ReadoutResult, QpeError> {
    let engine = AttemptEngine::new(l, cfg)?;
    let m = cfg.ancilla_bits();
    if target_bin >= (1 << m) {
        return Err(QpeError::BinOutOfRange {
            bin: target_bin,
            bins: 1 << m,
        });
    }
    let budget = POST_SELECTION_BUDGET_FACTOR * cfg.n_samples;
    match mode {
        ReadoutMode::Trace => {
            let (mut states, attempts) = collect_post_selected(
                &engine,
                target_bin,
                1,
                budget,
                rng,
                STREAM_READOUT,
                0,
                |post, _| Ok(post.clone()),
            )?;
            let post = states.pop().expect("one accepted state");
            let (magnitudes, signs) = trace_read(&post);
            Ok(ReadoutResult {
                magnitudes,
                signs,
                samples_used: attempts,
                target_bin,
            })
        }
        ReadoutMode::Sampling => {
            let n = engine.n;
            let system: Vec<usize> = (0..n).collect();
            let (outcomes, attempts) = collect_post_selected(
                &engine,
                target_bin,
                cfg.n_samples,
                budget,
                rng,
                STREAM_READOUT,
                0,
                |post, stream| Ok(post.measure_register(&system, stream)?.0),
            )?;
            let mut counts = vec![0u64; 1 << n];
            for v in outcomes {
                counts[v] += 1;
            }
            let magnitudes: Vec<f64> = counts
                .iter()
                .map(|&c| (c as f64 / cfg.n_samples as f64).sqrt())
                .collect();
            let recovery = recover_signs(l, cfg, target_bin, &magnitudes, rng)?;
            Ok(ReadoutResult {
                magnitudes,
                signs: recovery.signs,
                samples_used: attempts + recovery.samples_used,
                target_bin,
            })
        }
    }
}

/// First index of the largest magnitude: a deterministic reference even
/// when magnitudes tie exactly.
fn reference_vertex(magnitudes: &[f64]) -> usize {
    let mut reference = 0;
    for (i, &m) in magnitudes.iter().enumerate() {
        if m > magnitudes[reference] {
            reference = i;
        }
    }
    reference
}

fn trace_read(post: &QuantumState) -> (Vec<f64>, Vec<Sign>) {
    let amps = post.amplitudes();
    let magnitudes: Vec<f64> = amps.iter().map(|a| a.norm()).collect();
    let reference = reference_vertex(&magnitudes);
    if magnitudes[reference] <= TRACE_SIGN_TOL {
        return (magnitudes.clone(), vec![Sign::Unknown; amps.len()]);
    }
    let phase = amps[reference] / magnitudes[reference];
    let signs = amps
        .iter()
        .zip(&magnitudes)
        .map(|(a, &mag)| {
            if mag <= TRACE_SIGN_TOL {
                Sign::Unknown
            } else if (a * phase.conj()).re >= 0.0 {
                Sign::Plus
            } else {
                Sign::Minus
            }
        })
        .collect();
    (magnitudes, signs)
}

/// Signs plus the post-selection attempts the estimation consumed.
#[derive(Debug, Clone, PartialEq)]
pub struct SignRecovery {
    pub signs: Vec<Sign>,
    pub samples_used: u64,
}

/// Estimates each vertex's sign relative to the largest-magnitude vertex
/// `r` by interference: after collapsing to `target_bin`, mix the `{k, r}`
/// amplitude pair through a two-dimensional Hadamard and estimate
/// `P(k) = |a_k + a_r|²/2` from `cfg.n_samples` accepted runs. `P(k)` above
/// the incoherent value `(|a_k|² + |a_r|²)/2` means aligned signs.
/// Vertices with magnitude at or below [`sign_floor`] stay [`Sign::Unknown`].
pub fn recover_signs(
    l: &LaplacianMatrix,
    cfg: &QpeConfig,
    target_bin: usize,
    magnitudes: &[f64],
    rng: &RngStream,
) -> Result<SignRecovery, QpeError> {
    let engine = AttemptEngine::new(l, cfg)?;
    let dim = l.dim();
    if magnitudes.len() != dim {
        return Err(QpeError::PrepLength {
            got: magnitudes.len(),
            expected: dim,
        });
    }
    let n = engine.n;
    let system: Vec<usize> = (0..n).collect();
    let floor = sign_floor(cfg.n_samples);
    let mut signs = vec![Sign::Unknown; dim];
    let reference = reference_vertex(magnitudes);
    if magnitudes[reference] <= 0.0 {
        return Ok(SignRecovery {
            signs,
            samples_used: 0,
        });
    }
    signs[reference] = Sign::Plus;
    let budget = POST_SELECTION_BUDGET_FACTOR * cfg.n_samples;
    let mut samples_used = 0u64;
    for k in 0..dim {
        if k == reference || magnitudes[k] <= floor {
            continue;
        }
        let (hits, attempts) = collect_post_selected(
            &engine,
            target_bin,
            cfg.n_samples,
            budget,
            rng,
            STREAM_SIGN,
            (k as u64) << 40,
            |post, stream| {
                let mut mixed = post.clone();
                mix_pair(&mut mixed, k, reference);
                Ok(mixed.measure_register(&system, stream)?.0 == k)
            },
        )?;
        samples_used += attempts;
        let p_hat = hits.iter().filter(|&&h| h).count() as f64 / cfg.n_samples as f64;
        let incoherent = (magnitudes[k].powi(2) + magnitudes[reference].powi(2)) / 2.0;
        signs[k] = if p_hat > incoherent {
            Sign::Plus
        } else {
            Sign::Minus
        };
    }
    Ok(SignRecovery {
        signs,
        samples_used,
    })
}

/// Two-dimensional Hadamard on the `{k, r}` amplitude pair.
fn mix_pair(state: &mut QuantumState, k: usize, r: usize) {
    let inv = std::f64::consts::FRAC_1_SQRT_2;
    let amps = state.amplitudes_mut();
    let a = amps[k];
    let b = amps[r];
    amps[k] = (a + b) * inv;
    amps[r] = (a - b) * inv;
}

/// Outcome of quantum kernel-dimension estimation.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DegeneracyReport {
    /// Component estimate: accepted kernel dimensions minus ghost modes.
    pub count: usize,
    /// Orthogonal kernel dimensions the procedure accepted.
    pub accepted_dimensions: usize,
    pub ghost_count: usize,
    /// Preparation rounds executed.
    pub rounds: usize,
    /// Circuit measurements performed (retries and confirmations included).
    pub qpe_runs: u64,
}

/// Counts the multiplicity of eigenvalue 0 — the number of connected
/// components once `ghost_count` padding modes are subtracted.
///
/// Each round prepares a random state orthogonal to everything accepted so
/// far, measures the ancilla register up to `cfg.retry_budget` times, and on
/// a bin-0 outcome re-runs estimation `cfg.confirm_rounds` times on the
/// collapsed state (each pass suppresses spectral leakage from small nonzero
/// eigenvalues by another leakage factor). The purified state joins the
/// accepted set when its Gram-Schmidt residual exceeds `cfg.rank_tol`. The
/// search stops once `max_rounds_factor · dim` consecutive rounds fail to
/// extend the set.
pub fn count_zero_degeneracy(
    l: &LaplacianMatrix,
    ghost_count: usize,
    cfg: &QpeConfig,
    rng: &RngStream,
) -> Result<DegeneracyReport, QpeError> {
    cfg.validate()?;
    if !l.is_normalized() {
        return Err(QpeError::NotNormalized);
    }
    let n = system_bits(l)?;
    let dim = l.dim();
    let eig = backend_eig(l, cfg)?;
    let max_failures = cfg.max_rounds_factor * dim;
    let mut accepted: Vec<Vec<Complex64>> = Vec::new();
    let mut consecutive_failures = 0usize;
    let mut rounds = 0usize;
    let mut qpe_runs = 0u64;
    while accepted.len() < dim && consecutive_failures < max_failures {
        rounds += 1;
        let mut prep_stream = rng.derive(STREAM_DEGEN_PREP, rounds as u64);
        let psi0 = match orthogonal_complex_state(n, &accepted, &mut prep_stream) {
            Some(state) => state,
            None => {
                consecutive_failures += 1;
                continue;
            }
        };
        let circuit = run_circuit(l, &psi0, cfg, eig.as_ref())?;
        let mut extended = false;
        for attempt in 0..cfg.retry_budget {
            qpe_runs += 1;
            let mut stream =
                rng.derive(STREAM_DEGEN_MEASURE, ((rounds as u64) << 20) | attempt);
            let (bin, post) = circuit.measure(&mut stream)?;
            if bin != 0 {
                continue;
            }
            let mut candidate = post;
            let mut confirmed = true;
            for pass in 0..cfg.confirm_rounds {
                qpe_runs += 1;
                let confirm_circuit = run_circuit(l, &candidate, cfg, eig.as_ref())?;
                let mut confirm_stream = rng.derive(
                    STREAM_DEGEN_CONFIRM,
                    ((rounds as u64) << 28) | (attempt << 8) | pass as u64,
                );
                let (confirm_bin, purified) = confirm_circuit.measure(&mut confirm_stream)?;
                if confirm_bin != 0 {
                    confirmed = false;
                    break;
                }
                candidate = purified;
            }
            if !confirmed {
                continue;
            }
            let mut residual = candidate.amplitudes().to_vec();
            for basis in &accepted {
                let dot: Complex64 = basis
                    .iter()
                    .zip(&residual)
                    .map(|(b, v)| b.conj() * v)
                    .sum();
                for (r, b) in residual.iter_mut().zip(basis) {
                    *r -= dot * b;
                }
            }
            let norm = residual.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt();
            if norm > cfg.rank_tol {
                for r in residual.iter_mut() {
                    *r /= norm;
                }
                accepted.push(residual);
                extended = true;
            }
            break;
        }
        if extended {
            consecutive_failures = 0;
        } else {
            consecutive_failures += 1;
        }
    }
    Ok(DegeneracyReport {
        count: accepted.len().saturating_sub(ghost_count),
        accepted_dimensions: accepted.len(),
        ghost_count,
        rounds,
        qpe_runs,
    })
}

/// Random real unit vector orthogonalized (complex inner product) against
/// the accepted set.
fn orthogonal_complex_state(
    num_qubits: usize,
    accepted: &[Vec<Complex64>],
    rng: &mut RngStream,
) -> Option<QuantumState> {
    let dim = 1usize << num_qubits;
    if accepted.len() >= dim {
        return None;
    }
    for _ in 0..PREP_DRAW_CAP {
        let real = rng.random_real_unit(dim);
        let mut w: Vec<Complex64> = real.iter().map(|&x| Complex64::new(x, 0.0)).collect();
        for basis in accepted {
            let dot: Complex64 = basis.iter().zip(&w).map(|(b, v)| b.conj() * v).sum();
            for (wi, bi) in w.iter_mut().zip(basis) {
                *wi -= dot * bi;
            }
        }
        let norm = w.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt();
        if norm > PREP_RESIDUAL_TOL {
            for wi in w.iter_mut() {
                *wi /= norm;
            }
            return Some(QuantumState::from_vec_unchecked(num_qubits, w));
        }
    }
    None
}

/// Agreement report against the classical oracle (only for graphs under
/// the dense-oracle size cap).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OracleComparison {
    pub classical_fiedler_value: f64,
    /// Fiedler eigenvalue within 1e-6 of the next one: the minimizing
    /// eigenvector is not unique, so only cut sizes are comparable.
    pub degenerate_fiedler: bool,
    pub quantum_cut: usize,
    pub classical_cut: usize,
    /// Assignment equality up to block swap for a simple Fiedler value;
    /// cut-size equality under degeneracy.
    pub agreement: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FiedlerDiagnostics {
    pub histogram: EigHistogram,
    pub target_bin: usize,
    /// Eigenvalue estimate for the chosen bin, unnormalized units.
    pub fiedler_estimate: f64,
    pub noise_floor: u64,
    pub readout: ReadoutResult,
    pub oracle: Option<OracleComparison>,
}

/// End-to-end spectral bisection through phase estimation.
///
/// Pads the graph, normalizes the Laplacian, histograms eigenvalues with
/// random initial states deflated against the all-ones kernel direction,
/// picks the smallest nonzero bin above the noise floor, reads out the
/// collapsed eigenvector there, and bisects by sign. Vertices with unknown
/// sign follow the majority sign of their neighbors, ties landing in
/// block 0.
pub fn quantum_fiedler_partition(
    g: &Graph,
    cfg: &QpeConfig,
    rng: &RngStream,
) -> Result<(Partition, FiedlerDiagnostics), QpeError> {
    cfg.validate()?;
    let components = match cfg.connectivity_check {
        ConnectivityCheck::UnionFind => g.connected_components().count,
        ConnectivityCheck::Quantum => {
            let padded = g.pad_to_power_of_two();
            let l = padded.laplacian().normalize(cfg.normalization)?;
            count_zero_degeneracy(&l, padded.ghost_count(), cfg, rng)?.count
        }
    };
    if components != 1 {
        return Err(QpeError::Disconnected { components });
    }
    let padded = g.pad_to_power_of_two();
    let l = padded.laplacian().normalize(cfg.normalization)?;
    let dim = l.dim();
    let ones = vec![1.0 / (dim as f64).sqrt(); dim];
    let mut pipeline_cfg = cfg.clone();
    pipeline_cfg.state_prep = StatePrep::OrthogonalRandom(vec![ones]);
    let histogram = eigenvalue_histogram(&l, &pipeline_cfg, rng)?;
    let floor = cfg
        .noise_floor
        .unwrap_or_else(|| default_noise_floor(cfg.shots, cfg.ancilla_bits()));
    let target_bin = histogram
        .first_significant_bin(1, floor)
        .ok_or(QpeError::NoFiedlerSignal { floor })?;
    let readout = readout_eigenvector(&l, &pipeline_cfg, target_bin, rng, cfg.readout)?;
    let values = signed_values(g, &readout.magnitudes, &readout.signs);
    let partition = sign_bisect(g, &values)?;
    let oracle = oracle_comparison(g, &partition);
    let diagnostics = FiedlerDiagnostics {
        fiedler_estimate: histogram.eigenvalue_of_bin(target_bin),
        histogram,
        target_bin,
        noise_floor: floor,
        readout,
        oracle,
    };
    Ok((partition, diagnostics))
}

/// Signed per-vertex values for bisection; unknown-sign vertices take the
/// majority sign of their sign-carrying neighbors (ties → 0, which the
/// bisection sends to block 0).
fn signed_values(g: &Graph, magnitudes: &[f64], signs: &[Sign]) -> Vec<f64> {
    let real = g.non_ghost_count();
    let mut adjacency: Vec<Vec<usize>> = vec![Vec::new(); real];
    for &(u, v) in g.edges() {
        adjacency[u].push(v);
        adjacency[v].push(u);
    }
    (0..real)
        .map(|v| match signs[v] {
            Sign::Plus => magnitudes[v],
            Sign::Minus => -magnitudes[v],
            Sign::Unknown => {
                let score: i64 = adjacency[v]
                    .iter()
                    .map(|&u| match signs[u] {
                        Sign::Plus => 1,
                        Sign::Minus => -1,
                        Sign::Unknown => 0,
                    })
                    .sum();
                if score > 0 {
                    1.0
                } else if score < 0 {
                    -1.0
                } else {
                    0.0
                }
            }
        })
        .collect()
}

fn oracle_comparison(g: &Graph, quantum: &Partition) -> Option<OracleComparison> {
    if g.non_ghost_count() > oracle_cap() {
        return None;
    }
    let eig = eig_sym(&g.laplacian()).ok()?;
    if eig.num_zero != 1 {
        return None;
    }
    let value = eig.eigenvalues[1];
    let degenerate = eig
        .eigenvalues
        .get(2)
        .map(|&next| next - value < 1e-6)
        .unwrap_or(false);
    let classical = sign_bisect(g, &eig.eigenvectors[1]).ok()?;
    let agreement = if degenerate {
        quantum.cut_edges() == classical.cut_edges()
    } else {
        quantum.equivalent_to(&classical)
    };
    Some(OracleComparison {
        classical_fiedler_value: value,
        degenerate_fiedler: degenerate,
        quantum_cut: quantum.cut_edges(),
        classical_cut: classical.cut_edges(),
        agreement,
    })
}
