//! Dense statevectors and single-qubit rotations.

use crate::error::{Error, Result};
use crate::linalg::{CMatrix, C64, ONE, ZERO};
use crate::pauli::Axis;

/// Largest register a statevector may be created for.
pub const MAX_QUBITS: usize = 20;

const UNITARY_TOL: f64 = 1e-9;

/// `2^n` complex amplitudes; qubit `q` is bit `q` of the basis index.
#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    n_qubits: usize,
    amplitudes: Vec<C64>,
}

impl StateVector {
    /// `|0…0⟩` on `n` qubits.
    pub fn zero_state(n: usize) -> Result<Self> {
        if n == 0 || n > MAX_QUBITS {
            return Err(Error::InvalidConfig(format!(
                "qubit count {n} outside 1..={MAX_QUBITS}"
            )));
        }
        let mut amplitudes = vec![ZERO; 1 << n];
        amplitudes[0] = ONE;
        Ok(Self {
            n_qubits: n,
            amplitudes,
        })
    }

    /// Wraps raw amplitudes; the length must be a power of two. Normalization
    /// is the caller's responsibility.
    pub fn from_amplitudes(amplitudes: Vec<C64>) -> Result<Self> {
        let len = amplitudes.len();
        if len < 2 || !len.is_power_of_two() {
            return Err(Error::DimensionMismatch {
                expected: len.next_power_of_two().max(2),
                found: len,
            });
        }
        Ok(Self {
            n_qubits: len.trailing_zeros() as usize,
            amplitudes,
        })
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn amplitudes(&self) -> &[C64] {
        &self.amplitudes
    }

    pub fn into_amplitudes(self) -> Vec<C64> {
        self.amplitudes
    }

    pub fn norm(&self) -> f64 {
        self.amplitudes.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt()
    }

    /// `R_axis(angle) = exp(-i angle axis / 2)` on one qubit, returning the new state.
    pub fn apply_rotation(&self, qubit: usize, axis: Axis, angle: f64) -> Result<Self> {
        let mut out = self.clone();
        out.rotate_in_place(qubit, axis, angle)?;
        Ok(out)
    }

    pub(crate) fn rotate_in_place(&mut self, qubit: usize, axis: Axis, angle: f64) -> Result<()> {
        if qubit >= self.n_qubits {
            return Err(Error::QubitOutOfRange {
                index: qubit,
                n_qubits: self.n_qubits,
            });
        }
        let gate = rotation_matrix(axis, angle);
        self.apply_single_qubit(qubit, &gate);
        Ok(())
    }

    /// Applies a 2x2 matrix `[[a, b], [c, d]]` to `qubit`.
    pub(crate) fn apply_single_qubit(&mut self, qubit: usize, gate: &[[C64; 2]; 2]) {
        let bit = 1usize << qubit;
        let [[a, b], [c, d]] = *gate;
        for i0 in 0..self.amplitudes.len() {
            if i0 & bit != 0 {
                continue;
            }
            let i1 = i0 | bit;
            let (x0, x1) = (self.amplitudes[i0], self.amplitudes[i1]);
            self.amplitudes[i0] = a * x0 + b * x1;
            self.amplitudes[i1] = c * x0 + d * x1;
        }
    }

    /// `U|ψ⟩` for a dense `2^n x 2^n` unitary.
    pub fn apply_dense_unitary(&self, u: &CMatrix) -> Result<Self> {
        let d = self.dim();
        if u.nrows() != d || u.ncols() != d {
            return Err(Error::DimensionMismatch {
                expected: d,
                found: u.nrows(),
            });
        }
        let deviation = crate::linalg::unitarity_deviation(u);
        if deviation > UNITARY_TOL {
            return Err(Error::NotUnitary { deviation });
        }
        Ok(Self {
            n_qubits: self.n_qubits,
            amplitudes: crate::linalg::mat_vec(u, &self.amplitudes),
        })
    }

    /// `⟨self|other⟩`.
    pub fn inner(&self, other: &StateVector) -> Result<C64> {
        if self.dim() != other.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: other.dim(),
            });
        }
        Ok(self
            .amplitudes
            .iter()
            .zip(&other.amplitudes)
            .map(|(a, b)| a.conj() * b)
            .sum())
    }

    /// `|⟨self|other⟩|`.
    pub fn overlap(&self, other: &StateVector) -> Result<f64> {
        Ok(self.inner(other)?.norm())
    }
}

/// Matrix of `exp(-i θ A / 2)`.
pub fn rotation_matrix(axis: Axis, angle: f64) -> [[C64; 2]; 2] {
    let (s, c) = (angle / 2.0).sin_cos();
    match axis {
        Axis::X => [
            [C64::new(c, 0.0), C64::new(0.0, -s)],
            [C64::new(0.0, -s), C64::new(c, 0.0)],
        ],
        Axis::Y => [
            [C64::new(c, 0.0), C64::new(-s, 0.0)],
            [C64::new(s, 0.0), C64::new(c, 0.0)],
        ],
        Axis::Z => [
            [C64::new(c, -s), ZERO],
            [ZERO, C64::new(c, s)],
        ],
    }
}
