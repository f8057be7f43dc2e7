//! Small dense complex linear algebra on top of `faer`.
//!
//! Every routine runs single-threaded so results are bit-identical regardless
//! of how callers spread work across threads.

use faer::dyn_stack::{MemBuffer, MemStack};
use faer::linalg::evd::{self, ComputeEigenvectors};
use faer::linalg::matmul::matmul as faer_matmul;
use faer::diag::Diag;
use faer::{Accum, Mat, Par};
pub use num_complex::Complex64 as C64;

use crate::error::{Error, Result};

/// Dense complex matrix.
pub type CMatrix = Mat<C64>;

pub const ZERO: C64 = C64 { re: 0.0, im: 0.0 };
pub const ONE: C64 = C64 { re: 1.0, im: 0.0 };
pub const I: C64 = C64 { re: 0.0, im: 1.0 };

/// Eigendecomposition `A = V diag(values) V†` of a Hermitian matrix,
/// eigenvalues ascending.
#[derive(Debug, Clone)]
pub struct HermitianEigen {
    pub values: Vec<f64>,
    pub vectors: CMatrix,
}

impl HermitianEigen {
    pub fn new(a: &CMatrix) -> Result<Self> {
        let n = a.nrows();
        assert_eq!(n, a.ncols(), "eigendecomposition of a non-square matrix");
        let mut vectors = CMatrix::zeros(n, n);
        let mut s = Diag::<C64>::zeros(n);
        let req = evd::self_adjoint_evd_scratch::<C64>(
            n,
            ComputeEigenvectors::Yes,
            Par::Seq,
            Default::default(),
        );
        let mut buf = MemBuffer::new(req);
        evd::self_adjoint_evd(
            a.as_ref(),
            s.as_mut(),
            Some(vectors.as_mut()),
            Par::Seq,
            MemStack::new(&mut buf),
            Default::default(),
        )
        .map_err(|_| Error::Eigen)?;
        let s = s.column_vector();
        let values = (0..n).map(|i| s[i].re).collect();
        Ok(Self { values, vectors })
    }

    pub fn dim(&self) -> usize {
        self.values.len()
    }

    /// `exp(-i A t)` assembled from the spectral decomposition.
    pub fn propagator(&self, t: f64) -> CMatrix {
        let n = self.dim();
        let phases: Vec<C64> = self.values.iter().map(|&l| C64::cis(-l * t)).collect();
        let mut scaled = self.vectors.clone();
        for j in 0..n {
            for i in 0..n {
                scaled[(i, j)] *= phases[j];
            }
        }
        matmul(&scaled, &adjoint(&self.vectors))
    }

    /// Applies `exp(-i A t)` to a vector without forming the matrix.
    pub fn propagate(&self, psi: &[C64], t: f64) -> Vec<C64> {
        let n = self.dim();
        let v = &self.vectors;
        let mut coeffs = vec![ZERO; n];
        for (k, c) in coeffs.iter_mut().enumerate() {
            let mut acc = ZERO;
            for (i, &p) in psi.iter().enumerate() {
                acc += v[(i, k)].conj() * p;
            }
            *c = acc * C64::cis(-self.values[k] * t);
        }
        let mut out = vec![ZERO; n];
        for (i, o) in out.iter_mut().enumerate() {
            let mut acc = ZERO;
            for (k, &c) in coeffs.iter().enumerate() {
                acc += v[(i, k)] * c;
            }
            *o = acc;
        }
        out
    }
}

pub fn identity(n: usize) -> CMatrix {
    CMatrix::from_fn(n, n, |i, j| if i == j { ONE } else { ZERO })
}

pub fn matmul(a: &CMatrix, b: &CMatrix) -> CMatrix {
    assert_eq!(a.ncols(), b.nrows(), "matmul shape mismatch");
    let mut out = CMatrix::zeros(a.nrows(), b.ncols());
    faer_matmul(out.as_mut(), Accum::Replace, a.as_ref(), b.as_ref(), ONE, Par::Seq);
    out
}

pub fn adjoint(a: &CMatrix) -> CMatrix {
    CMatrix::from_fn(a.ncols(), a.nrows(), |i, j| a[(j, i)].conj())
}

pub fn mat_vec(a: &CMatrix, v: &[C64]) -> Vec<C64> {
    assert_eq!(a.ncols(), v.len(), "mat_vec shape mismatch");
    (0..a.nrows())
        .map(|i| {
            let mut acc = ZERO;
            for (j, &x) in v.iter().enumerate() {
                acc += a[(i, j)] * x;
            }
            acc
        })
        .collect()
}

/// `Tr(a† b)` without forming the product.
pub fn trace_adjoint_product(a: &CMatrix, b: &CMatrix) -> C64 {
    assert_eq!(a.nrows(), b.nrows());
    assert_eq!(a.ncols(), b.ncols());
    let mut acc = ZERO;
    for j in 0..a.ncols() {
        for i in 0..a.nrows() {
            acc += a[(i, j)].conj() * b[(i, j)];
        }
    }
    acc
}

/// Kronecker product `a ⊗ b`.
pub fn kron(a: &CMatrix, b: &CMatrix) -> CMatrix {
    let (br, bc) = (b.nrows(), b.ncols());
    CMatrix::from_fn(a.nrows() * br, a.ncols() * bc, |i, j| {
        a[(i / br, j / bc)] * b[(i % br, j % bc)]
    })
}

/// `max |A - A†|` over all entries.
pub fn hermiticity_deviation(a: &CMatrix) -> f64 {
    let mut worst: f64 = 0.0;
    for i in 0..a.nrows() {
        for j in 0..a.ncols() {
            worst = worst.max((a[(i, j)] - a[(j, i)].conj()).norm());
        }
    }
    worst
}

/// `max |U†U - I|` over all entries.
pub fn unitarity_deviation(u: &CMatrix) -> f64 {
    let prod = matmul(&adjoint(u), u);
    let mut worst: f64 = 0.0;
    for i in 0..prod.nrows() {
        for j in 0..prod.ncols() {
            let target = if i == j { ONE } else { ZERO };
            worst = worst.max((prod[(i, j)] - target).norm());
        }
    }
    worst
}

pub fn max_abs_diff(a: &CMatrix, b: &CMatrix) -> f64 {
    assert_eq!(a.nrows(), b.nrows());
    assert_eq!(a.ncols(), b.ncols());
    let mut worst: f64 = 0.0;
    for j in 0..a.ncols() {
        for i in 0..a.nrows() {
            worst = worst.max((a[(i, j)] - b[(i, j)]).norm());
        }
    }
    worst
}
