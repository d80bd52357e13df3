//! Desk-scale statevector simulator.
//!
//! States are dense complex amplitude vectors over `2^n` basis indices with
//! qubit 0 as the least significant bit. Everything is deterministic given
//! an [`RngStream`]: the generator is counter-based and keyed by
//! `(seed, stream_id)`, so independent shots can each own a stream and a
//! parallel shot loop aggregates to exactly the sequential result.
//!
//! The register ceiling is [`MAX_QUBITS`] (2^22 amplitudes); this is a
//! correctness-first simulator for small spectral problems, not a
//! performance play.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use std::collections::BTreeMap;
use thiserror::Error;

/// Hard cap on register width (amplitude count `2^22`).
pub const MAX_QUBITS: usize = 22;

/// Tolerance for unitarity checks and norm-drift detection.
pub const NORM_TOL: f64 = 1e-10;

#[derive(Debug, Error, PartialEq)]
pub enum SimError {
    #[error("register of {n} qubits exceeds the {MAX_QUBITS}-qubit cap")]
    TooManyQubits { n: usize },
    #[error("basis index {index} out of range for dimension {dim}")]
    IndexOutOfRange { index: usize, dim: usize },
    #[error("qubit {qubit} out of range for a {n}-qubit register")]
    QubitOutOfRange { qubit: usize, n: usize },
    #[error("qubit {qubit} listed more than once")]
    DuplicateQubit { qubit: usize },
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("matrix is not unitary (max deviation {max_dev:.3e})")]
    NonUnitary { max_dev: f64 },
    #[error("vector is not normalized (norm {norm})")]
    NotNormalized { norm: f64 },
    #[error("state norm drifted to {norm}; simulation is no longer trustworthy")]
    NormDrift { norm: f64 },
    #[error("measurement register is empty")]
    EmptyRegister,
    #[error("shot count must be positive")]
    ZeroShots,
}

/// Splittable counter-based random stream keyed by `(seed, stream_id)`.
///
/// Two streams with the same seed and different ids are statistically
/// independent, and a stream's output depends only on its key, never on
/// what other streams have consumed.
#[derive(Debug, Clone)]
pub struct RngStream {
    seed: u64,
    stream_id: u64,
    inner: ChaCha8Rng,
}

impl RngStream {
    pub fn new(seed: u64, stream_id: u64) -> Self {
        let mut inner = ChaCha8Rng::seed_from_u64(seed);
        inner.set_stream(stream_id);
        RngStream {
            seed,
            stream_id,
            inner,
        }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn stream_id(&self) -> u64 {
        self.stream_id
    }

    /// Child stream for work item `index` of category `kind`, keyed by this
    /// stream's id. Pure function of `(seed, stream_id, kind, index)`, so
    /// parallel loops that give each item its own derived stream aggregate
    /// bit-identically to sequential execution.
    pub fn derive(&self, kind: u64, index: u64) -> RngStream {
        // splitmix-style finalizer spreads derived ids across the id space
        let mut x = self
            .stream_id
            .wrapping_add(kind.wrapping_mul(0x9E37_79B9_7F4A_7C15));
        x = x.wrapping_add(index.wrapping_mul(0xD1B5_4A32_D192_ED03));
        x = (x ^ (x >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        x = (x ^ (x >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        x ^= x >> 31;
        RngStream::new(self.seed, x)
    }

    /// Uniform draw from `[0, 1)`.
    pub fn uniform(&mut self) -> f64 {
        self.inner.gen::<f64>()
    }

    /// Standard normal draw.
    pub fn normal(&mut self) -> f64 {
        StandardNormal.sample(&mut self.inner)
    }

    /// Unit vector with isotropically random real direction.
    pub fn random_real_unit(&mut self, len: usize) -> Vec<f64> {
        loop {
            let v: Vec<f64> = (0..len).map(|_| self.normal()).collect();
            let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
            if norm > 1e-6 {
                return v.into_iter().map(|x| x / norm).collect();
            }
        }
    }
}

/// Validated unitary matrix (row-major, dimension a power of two).
#[derive(Debug, Clone)]
pub struct Unitary {
    dim: usize,
    data: Vec<Complex64>,
}

impl Unitary {
    /// Checks `U†U = I` to within [`NORM_TOL`] before accepting the matrix.
    pub fn new(dim: usize, data: Vec<Complex64>) -> Result<Self, SimError> {
        if data.len() != dim * dim {
            return Err(SimError::DimensionMismatch {
                expected: dim * dim,
                got: data.len(),
            });
        }
        if !dim.is_power_of_two() {
            return Err(SimError::DimensionMismatch {
                expected: dim.next_power_of_two(),
                got: dim,
            });
        }
        let mut max_dev = 0.0f64;
        for i in 0..dim {
            for j in 0..dim {
                let mut acc = Complex64::new(0.0, 0.0);
                for k in 0..dim {
                    acc += data[k * dim + i].conj() * data[k * dim + j];
                }
                let expect = if i == j { 1.0 } else { 0.0 };
                max_dev = max_dev.max((acc - Complex64::new(expect, 0.0)).norm());
            }
        }
        if max_dev > NORM_TOL {
            return Err(SimError::NonUnitary { max_dev });
        }
        Ok(Unitary { dim, data })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn entry(&self, i: usize, j: usize) -> Complex64 {
        self.data[i * self.dim + j]
    }
}

/// Pure state of an `n`-qubit register.
#[derive(Debug, Clone, PartialEq)]
pub struct QuantumState {
    num_qubits: usize,
    amps: Vec<Complex64>,
}

impl QuantumState {
    /// Computational basis state `|k⟩`.
    pub fn basis_state(num_qubits: usize, k: usize) -> Result<Self, SimError> {
        if num_qubits > MAX_QUBITS {
            return Err(SimError::TooManyQubits { n: num_qubits });
        }
        let dim = 1usize << num_qubits;
        if k >= dim {
            return Err(SimError::IndexOutOfRange { index: k, dim });
        }
        let mut amps = vec![Complex64::new(0.0, 0.0); dim];
        amps[k] = Complex64::new(1.0, 0.0);
        Ok(QuantumState { num_qubits, amps })
    }

    /// Wraps an explicit amplitude vector; must already be unit norm.
    pub fn from_amplitudes(amps: Vec<Complex64>) -> Result<Self, SimError> {
        if !amps.len().is_power_of_two() {
            return Err(SimError::DimensionMismatch {
                expected: amps.len().next_power_of_two(),
                got: amps.len(),
            });
        }
        let num_qubits = amps.len().trailing_zeros() as usize;
        if num_qubits > MAX_QUBITS {
            return Err(SimError::TooManyQubits { n: num_qubits });
        }
        let norm = amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        if (norm - 1.0).abs() > NORM_TOL {
            return Err(SimError::NotNormalized { norm });
        }
        Ok(QuantumState { num_qubits, amps })
    }

    /// Unit-norm real amplitudes, e.g. an oracle eigenvector.
    pub fn from_real_amplitudes(values: &[f64]) -> Result<Self, SimError> {
        Self::from_amplitudes(values.iter().map(|&x| Complex64::new(x, 0.0)).collect())
    }

    pub(crate) fn from_vec_unchecked(num_qubits: usize, amps: Vec<Complex64>) -> Self {
        debug_assert_eq!(amps.len(), 1 << num_qubits);
        QuantumState { num_qubits, amps }
    }

    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    pub fn dim(&self) -> usize {
        self.amps.len()
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amps
    }

    pub(crate) fn amplitudes_mut(&mut self) -> &mut [Complex64] {
        &mut self.amps
    }

    pub fn norm(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt()
    }

    fn check_qubit(&self, q: usize) -> Result<(), SimError> {
        if q >= self.num_qubits {
            return Err(SimError::QubitOutOfRange {
                qubit: q,
                n: self.num_qubits,
            });
        }
        Ok(())
    }

    fn check_targets(&self, targets: &[usize]) -> Result<(), SimError> {
        for (i, &q) in targets.iter().enumerate() {
            self.check_qubit(q)?;
            if targets[..i].contains(&q) {
                return Err(SimError::DuplicateQubit { qubit: q });
            }
        }
        Ok(())
    }

    /// Inserts zero bits of `base` at the sorted positions `holes`,
    /// producing a full index whose hole bits are all clear.
    fn expand_index(mut base: usize, holes: &[usize]) -> usize {
        for &q in holes {
            let low = base & ((1usize << q) - 1);
            base = ((base >> q) << (q + 1)) | low;
        }
        base
    }

    /// Applies `u` on the listed target qubits (`targets[b]` carries bit `b`
    /// of the local index). Targets need not be contiguous or ordered.
    pub fn apply_unitary(&mut self, targets: &[usize], u: &Unitary) -> Result<(), SimError> {
        self.apply_gate(None, targets, u)
    }

    /// Applies `u` on the targets only where `control` is `|1⟩`.
    pub fn apply_controlled(
        &mut self,
        control: usize,
        targets: &[usize],
        u: &Unitary,
    ) -> Result<(), SimError> {
        self.check_qubit(control)?;
        if targets.contains(&control) {
            return Err(SimError::DuplicateQubit { qubit: control });
        }
        self.apply_gate(Some(control), targets, u)
    }

    fn apply_gate(
        &mut self,
        control: Option<usize>,
        targets: &[usize],
        u: &Unitary,
    ) -> Result<(), SimError> {
        self.check_targets(targets)?;
        let t = targets.len();
        if u.dim() != (1usize << t) {
            return Err(SimError::DimensionMismatch {
                expected: 1 << t,
                got: u.dim(),
            });
        }
        let mut holes = targets.to_vec();
        holes.sort_unstable();
        let masks: Vec<usize> = targets.iter().map(|&q| 1usize << q).collect();
        let cmask = control.map(|c| 1usize << c).unwrap_or(0);
        let groups = self.amps.len() >> t;
        let local_dim = 1usize << t;
        let mut gathered = vec![Complex64::new(0.0, 0.0); local_dim];
        let mut indices = vec![0usize; local_dim];
        for g in 0..groups {
            let base = Self::expand_index(g, &holes);
            if cmask != 0 && base & cmask == 0 {
                continue;
            }
            for (loc, slot) in indices.iter_mut().enumerate() {
                let mut idx = base;
                for (b, &mask) in masks.iter().enumerate() {
                    if loc & (1 << b) != 0 {
                        idx |= mask;
                    }
                }
                *slot = idx;
            }
            for (loc, g_amp) in gathered.iter_mut().enumerate() {
                *g_amp = self.amps[indices[loc]];
            }
            for (row, &idx) in indices.iter().enumerate() {
                let mut acc = Complex64::new(0.0, 0.0);
                for (col, &amp) in gathered.iter().enumerate() {
                    acc += u.entry(row, col) * amp;
                }
                self.amps[idx] = acc;
            }
        }
        Ok(())
    }

    /// In-place Hadamard on one qubit.
    pub fn hadamard(&mut self, q: usize) -> Result<(), SimError> {
        self.check_qubit(q)?;
        let mask = 1usize << q;
        let inv_sqrt2 = std::f64::consts::FRAC_1_SQRT_2;
        for i in 0..self.amps.len() {
            if i & mask == 0 {
                let a = self.amps[i];
                let b = self.amps[i | mask];
                self.amps[i] = (a + b) * inv_sqrt2;
                self.amps[i | mask] = (a - b) * inv_sqrt2;
            }
        }
        Ok(())
    }

    /// Diagonal phase `e^{i·angle}` on amplitudes where both qubits are set.
    pub fn controlled_phase(&mut self, a: usize, b: usize, angle: f64) -> Result<(), SimError> {
        self.check_qubit(a)?;
        self.check_qubit(b)?;
        if a == b {
            return Err(SimError::DuplicateQubit { qubit: a });
        }
        let mask = (1usize << a) | (1usize << b);
        let phase = Complex64::from_polar(1.0, angle);
        for (i, amp) in self.amps.iter_mut().enumerate() {
            if i & mask == mask {
                *amp *= phase;
            }
        }
        Ok(())
    }

    pub fn swap_qubits(&mut self, a: usize, b: usize) -> Result<(), SimError> {
        self.check_qubit(a)?;
        self.check_qubit(b)?;
        if a == b {
            return Ok(());
        }
        let ma = 1usize << a;
        let mb = 1usize << b;
        for i in 0..self.amps.len() {
            if i & ma != 0 && i & mb == 0 {
                let j = (i & !ma) | mb;
                self.amps.swap(i, j);
            }
        }
        Ok(())
    }

    /// Quantum Fourier transform on the listed register (`qubits[b]` holds
    /// bit `b` of the register value): `|k⟩ → 2^{-m/2} Σ_y e^{2πi k y / 2^m} |y⟩`.
    pub fn qft(&mut self, qubits: &[usize]) -> Result<(), SimError> {
        self.check_targets(qubits)?;
        if qubits.is_empty() {
            return Err(SimError::EmptyRegister);
        }
        let m = qubits.len();
        for i in (0..m).rev() {
            self.hadamard(qubits[i])?;
            for j in (0..i).rev() {
                let angle = std::f64::consts::TAU / (1u64 << (i - j + 1)) as f64;
                self.controlled_phase(qubits[j], qubits[i], angle)?;
            }
        }
        for i in 0..m / 2 {
            self.swap_qubits(qubits[i], qubits[m - 1 - i])?;
        }
        Ok(())
    }

    /// Inverse of [`Self::qft`]: after it, the register reads the phase as a
    /// plain binary integer (bit-reversal is handled internally).
    pub fn inverse_qft(&mut self, qubits: &[usize]) -> Result<(), SimError> {
        self.check_targets(qubits)?;
        if qubits.is_empty() {
            return Err(SimError::EmptyRegister);
        }
        let m = qubits.len();
        for i in 0..m / 2 {
            self.swap_qubits(qubits[i], qubits[m - 1 - i])?;
        }
        for i in 0..m {
            for j in 0..i {
                let angle = -std::f64::consts::TAU / (1u64 << (i - j + 1)) as f64;
                self.controlled_phase(qubits[j], qubits[i], angle)?;
            }
            self.hadamard(qubits[i])?;
        }
        Ok(())
    }

    /// Probability of each outcome of the listed register (`2^r` entries).
    pub fn register_marginal(&self, qubits: &[usize]) -> Result<Vec<f64>, SimError> {
        self.check_targets(qubits)?;
        if qubits.is_empty() {
            return Err(SimError::EmptyRegister);
        }
        let mut probs = vec![0.0f64; 1 << qubits.len()];
        for (i, amp) in self.amps.iter().enumerate() {
            let mut val = 0usize;
            for (b, &q) in qubits.iter().enumerate() {
                val |= ((i >> q) & 1) << b;
            }
            probs[val] += amp.norm_sqr();
        }
        Ok(probs)
    }

    /// Born-rule measurement of a sub-register. Returns the outcome and the
    /// collapsed, renormalized post-measurement state; `self` is untouched.
    pub fn measure_register(
        &self,
        qubits: &[usize],
        rng: &mut RngStream,
    ) -> Result<(usize, QuantumState), SimError> {
        let norm = self.norm();
        if (norm - 1.0).abs() > NORM_TOL {
            return Err(SimError::NormDrift { norm });
        }
        let probs = self.register_marginal(qubits)?;
        let outcome = draw_index(&probs, rng.uniform());
        let p = probs[outcome];
        let scale = 1.0 / p.sqrt();
        let mut post = self.amps.clone();
        for (i, amp) in post.iter_mut().enumerate() {
            let mut val = 0usize;
            for (b, &q) in qubits.iter().enumerate() {
                val |= ((i >> q) & 1) << b;
            }
            if val == outcome {
                *amp *= scale;
            } else {
                *amp = Complex64::new(0.0, 0.0);
            }
        }
        Ok((
            outcome,
            QuantumState {
                num_qubits: self.num_qubits,
                amps: post,
            },
        ))
    }

    /// Multinomial sample of full-register outcomes: `shots` independent
    /// basis-state draws from `|ψ|²`, tallied per index.
    pub fn sample_counts(
        &self,
        shots: u64,
        rng: &mut RngStream,
    ) -> Result<BTreeMap<usize, u64>, SimError> {
        if shots == 0 {
            return Err(SimError::ZeroShots);
        }
        let norm = self.norm();
        if (norm - 1.0).abs() > NORM_TOL {
            return Err(SimError::NormDrift { norm });
        }
        let mut cumulative = Vec::with_capacity(self.amps.len());
        let mut acc = 0.0f64;
        for amp in &self.amps {
            acc += amp.norm_sqr();
            cumulative.push(acc);
        }
        let mut counts = BTreeMap::new();
        for _ in 0..shots {
            let u = rng.uniform() * acc;
            let idx = cumulative.partition_point(|&c| c <= u);
            let idx = idx.min(self.amps.len() - 1);
            *counts.entry(idx).or_insert(0u64) += 1;
        }
        Ok(counts)
    }
}

/// `⟨a|b⟩ = Σ_k conj(a_k) · b_k`.
pub fn inner_product(a: &QuantumState, b: &QuantumState) -> Result<Complex64, SimError> {
    if a.dim() != b.dim() {
        return Err(SimError::DimensionMismatch {
            expected: a.dim(),
            got: b.dim(),
        });
    }
    Ok(a.amps
        .iter()
        .zip(&b.amps)
        .map(|(x, y)| x.conj() * y)
        .sum())
}

/// Inverse-CDF draw over a probability vector; `u` is uniform in `[0, 1)`.
/// Rounding residue at the top end falls back to the last nonzero-probability
/// outcome so the draw is always valid.
pub(crate) fn draw_index(probs: &[f64], u: f64) -> usize {
    let mut acc = 0.0f64;
    for (i, &p) in probs.iter().enumerate() {
        acc += p;
        if u < acc {
            return i;
        }
    }
    probs
        .iter()
        .rposition(|&p| p > 0.0)
        .unwrap_or(probs.len() - 1)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn x_gate() -> Unitary {
        Unitary::new(
            2,
            vec![
                Complex64::new(0.0, 0.0),
                Complex64::new(1.0, 0.0),
                Complex64::new(1.0, 0.0),
                Complex64::new(0.0, 0.0),
            ],
        )
        .unwrap()
    }

    fn approx(a: Complex64, b: Complex64, tol: f64) -> bool {
        (a - b).norm() < tol
    }

    #[test]
    fn basis_state_places_single_amplitude() {
        let s = QuantumState::basis_state(2, 2).unwrap();
        assert_eq!(s.amplitudes()[2], Complex64::new(1.0, 0.0));
        assert_eq!(s.amplitudes().iter().filter(|a| a.norm() > 0.0).count(), 1);
        assert_eq!(
            QuantumState::basis_state(1, 5).unwrap_err(),
            SimError::IndexOutOfRange { index: 5, dim: 2 }
        );
    }

    #[test]
    fn qubit_zero_is_least_significant() {
        let mut s = QuantumState::basis_state(2, 0).unwrap();
        s.apply_unitary(&[0], &x_gate()).unwrap();
        assert_eq!(s.amplitudes()[1], Complex64::new(1.0, 0.0));
        let mut s = QuantumState::basis_state(2, 0).unwrap();
        s.apply_unitary(&[1], &x_gate()).unwrap();
        assert_eq!(s.amplitudes()[2], Complex64::new(1.0, 0.0));
    }

    #[test]
    fn cnot_via_controlled_x() {
        // control qubit 1, target qubit 0: |10⟩ (index 2) -> |11⟩ (index 3)
        let mut s = QuantumState::basis_state(2, 2).unwrap();
        s.apply_controlled(1, &[0], &x_gate()).unwrap();
        assert_eq!(s.amplitudes()[3], Complex64::new(1.0, 0.0));
        // control clear: |01⟩ = index 1 is untouched
        let mut s = QuantumState::basis_state(2, 1).unwrap();
        s.apply_controlled(1, &[0], &x_gate()).unwrap();
        assert_eq!(s.amplitudes()[1], Complex64::new(1.0, 0.0));
    }

    #[test]
    fn non_unitary_matrix_rejected() {
        let err = Unitary::new(
            2,
            vec![
                Complex64::new(1.0, 0.0),
                Complex64::new(1.0, 0.0),
                Complex64::new(0.0, 0.0),
                Complex64::new(1.0, 0.0),
            ],
        )
        .unwrap_err();
        assert!(matches!(err, SimError::NonUnitary { .. }));
    }

    #[test]
    fn overlapping_control_and_target_rejected() {
        let mut s = QuantumState::basis_state(2, 0).unwrap();
        assert_eq!(
            s.apply_controlled(0, &[0], &x_gate()).unwrap_err(),
            SimError::DuplicateQubit { qubit: 0 }
        );
    }

    #[test]
    fn qft_matches_dense_dft_oracle() {
        let m = 3;
        let dim = 1usize << m;
        let scale = 1.0 / (dim as f64).sqrt();
        let mut dft = Vec::with_capacity(dim * dim);
        for y in 0..dim {
            for k in 0..dim {
                let angle = std::f64::consts::TAU * (y * k) as f64 / dim as f64;
                dft.push(Complex64::from_polar(scale, angle));
            }
        }
        let dft = Unitary::new(dim, dft).unwrap();
        let mut rng = RngStream::new(11, 0);
        for _ in 0..5 {
            let v = rng.random_real_unit(dim);
            let mut circuit = QuantumState::from_real_amplitudes(&v).unwrap();
            circuit.qft(&[0, 1, 2]).unwrap();
            let mut dense = QuantumState::from_real_amplitudes(&v).unwrap();
            dense.apply_unitary(&[0, 1, 2], &dft).unwrap();
            for (a, b) in circuit.amplitudes().iter().zip(dense.amplitudes()) {
                assert!(approx(*a, *b, 1e-12));
            }
        }
    }

    #[test]
    fn qft_then_inverse_is_identity() {
        let mut rng = RngStream::new(3, 7);
        let v = rng.random_real_unit(8);
        let original = QuantumState::from_real_amplitudes(&v).unwrap();
        let mut s = original.clone();
        s.qft(&[0, 1, 2]).unwrap();
        s.inverse_qft(&[0, 1, 2]).unwrap();
        for (a, b) in s.amplitudes().iter().zip(original.amplitudes()) {
            assert!(approx(*a, *b, 1e-10));
        }
    }

    #[test]
    fn inverse_qft_collapses_uniform_register() {
        let dim = 8;
        let amp = Complex64::new(1.0 / (dim as f64).sqrt(), 0.0);
        let mut s = QuantumState::from_amplitudes(vec![amp; dim]).unwrap();
        s.inverse_qft(&[0, 1, 2]).unwrap();
        assert!(approx(s.amplitudes()[0], Complex64::new(1.0, 0.0), 1e-12));
    }

    #[test]
    fn measuring_a_basis_state_is_certain() {
        let s = QuantumState::basis_state(1, 1).unwrap();
        let mut rng = RngStream::new(0, 0);
        let (outcome, post) = s.measure_register(&[0], &mut rng).unwrap();
        assert_eq!(outcome, 1);
        assert_eq!(post.amplitudes()[1], Complex64::new(1.0, 0.0));
    }

    #[test]
    fn measurement_frequency_matches_born_rule() {
        let amp = std::f64::consts::FRAC_1_SQRT_2;
        let s = QuantumState::from_real_amplitudes(&[amp, amp]).unwrap();
        let mut rng = RngStream::new(42, 0);
        let shots = 10_000;
        let mut ones = 0u64;
        for _ in 0..shots {
            let (outcome, _) = s.measure_register(&[0], &mut rng).unwrap();
            ones += outcome as u64;
        }
        let freq = ones as f64 / shots as f64;
        assert!((freq - 0.5).abs() < 0.02, "frequency {freq}");
    }

    #[test]
    fn partial_measurement_collapses_and_renormalizes() {
        // (|00⟩ + |01⟩ + |11⟩)/√3, measure qubit 0
        let a = 1.0 / 3.0f64.sqrt();
        let s = QuantumState::from_real_amplitudes(&[a, a, 0.0, a]).unwrap();
        let mut rng = RngStream::new(5, 1);
        let (outcome, post) = s.measure_register(&[0], &mut rng).unwrap();
        assert!((post.norm() - 1.0).abs() < 1e-12);
        for (i, amp) in post.amplitudes().iter().enumerate() {
            if i & 1 != outcome {
                assert_eq!(*amp, Complex64::new(0.0, 0.0));
            }
        }
    }

    #[test]
    fn sample_counts_on_uniform_two_qubit_state() {
        let s = QuantumState::from_real_amplitudes(&[0.5, 0.5, 0.5, 0.5]).unwrap();
        let mut rng = RngStream::new(9, 0);
        let shots = 40_000;
        let counts = s.sample_counts(shots, &mut rng).unwrap();
        assert_eq!(counts.values().sum::<u64>(), shots);
        for idx in 0..4 {
            let c = counts.get(&idx).copied().unwrap_or(0) as i64;
            assert!((c - 10_000).abs() <= 450, "index {idx} count {c}");
        }
    }

    #[test]
    fn sample_counts_rejects_zero_shots() {
        let s = QuantumState::basis_state(1, 0).unwrap();
        let mut rng = RngStream::new(0, 0);
        assert_eq!(
            s.sample_counts(0, &mut rng).unwrap_err(),
            SimError::ZeroShots
        );
    }

    #[test]
    fn inner_product_examples() {
        let a = QuantumState::basis_state(2, 1).unwrap();
        let b = QuantumState::basis_state(2, 2).unwrap();
        assert_eq!(inner_product(&a, &b).unwrap(), Complex64::new(0.0, 0.0));
        assert_eq!(inner_product(&a, &a).unwrap(), Complex64::new(1.0, 0.0));
    }

    #[test]
    fn identical_streams_agree_and_distinct_streams_differ() {
        let mut a = RngStream::new(77, 4);
        let mut b = RngStream::new(77, 4);
        let mut c = RngStream::new(77, 5);
        let xs: Vec<f64> = (0..32).map(|_| a.uniform()).collect();
        let ys: Vec<f64> = (0..32).map(|_| b.uniform()).collect();
        let zs: Vec<f64> = (0..32).map(|_| c.uniform()).collect();
        assert_eq!(xs, ys);
        assert_ne!(xs, zs);
    }

    proptest! {
        #[test]
        fn prop_random_circuits_preserve_norm(seed in 0u64..200) {
            let mut rng = RngStream::new(seed, 0);
            let v = rng.random_real_unit(16);
            let mut s = QuantumState::from_real_amplitudes(&v).unwrap();
            for step in 0..24 {
                let q = (rng.uniform() * 4.0) as usize % 4;
                match step % 3 {
                    0 => s.hadamard(q).unwrap(),
                    1 => {
                        let other = (q + 1) % 4;
                        s.controlled_phase(q, other, rng.uniform() * std::f64::consts::TAU).unwrap();
                    }
                    _ => s.swap_qubits(q, (q + 2) % 4).unwrap(),
                }
            }
            prop_assert!((s.norm() - 1.0).abs() < 1e-12);
        }

        #[test]
        fn prop_expand_index_keeps_holes_clear(base in 0usize..64, h1 in 0usize..6, h2 in 0usize..6) {
            prop_assume!(h1 != h2);
            let mut holes = vec![h1, h2];
            holes.sort_unstable();
            let idx = QuantumState::expand_index(base, &holes);
            prop_assert_eq!(idx & (1 << h1), 0);
            prop_assert_eq!(idx & (1 << h2), 0);
        }
    }
}
