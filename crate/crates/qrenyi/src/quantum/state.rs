//! Pure states and density matrices.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::tol;

/// Unit-norm complex vector.
#[derive(Clone, Debug, PartialEq)]
pub struct PureState {
    amplitudes: DVector<Complex64>,
}

impl PureState {
    /// Wraps an already-normalized amplitude vector.
    ///
    /// Fails unless the Euclidean norm is 1 within [`tol::NORM_TOL`].
    pub fn new(amplitudes: DVector<Complex64>) -> Result<Self> {
        if amplitudes.is_empty() {
            return Err(Error::InvalidArgument("empty state vector".into()));
        }
        let norm = amplitudes.norm();
        if (norm - 1.0).abs() > tol::NORM_TOL {
            return Err(Error::NotNormalized { norm });
        }
        Ok(Self { amplitudes })
    }

    /// Normalizes an arbitrary nonzero vector to a unit state.
    pub fn normalized(amplitudes: DVector<Complex64>) -> Result<Self> {
        if amplitudes.is_empty() {
            return Err(Error::InvalidArgument("empty state vector".into()));
        }
        let norm = amplitudes.norm();
        if norm <= 0.0 || !norm.is_finite() {
            return Err(Error::NotNormalized { norm });
        }
        Ok(Self {
            amplitudes: amplitudes / Complex64::new(norm, 0.0),
        })
    }

    /// Computational basis state |k⟩.
    pub fn basis_state(dim: usize, k: usize) -> Self {
        assert!(k < dim, "basis index {k} out of range for dim {dim}");
        let mut v = DVector::zeros(dim);
        v[k] = Complex64::new(1.0, 0.0);
        Self { amplitudes: v }
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn amplitudes(&self) -> &DVector<Complex64> {
        &self.amplitudes
    }

    /// ⟨self|other⟩.
    pub fn overlap(&self, other: &PureState) -> Complex64 {
        self.amplitudes.dotc(&other.amplitudes)
    }

    /// Entrywise complex conjugate.
    pub fn conj(&self) -> Self {
        Self {
            amplitudes: self.amplitudes.map(|z| z.conj()),
        }
    }

    /// Product state self ⊗ other, index convention (i · other.dim + j).
    pub fn tensor(&self, other: &PureState) -> Self {
        let n = self.dim() * other.dim();
        let mut v = DVector::zeros(n);
        for i in 0..self.dim() {
            for j in 0..other.dim() {
                v[i * other.dim() + j] = self.amplitudes[i] * other.amplitudes[j];
            }
        }
        Self { amplitudes: v }
    }

    /// Rank-one projector |ψ⟩⟨ψ|.
    pub fn density(&self) -> DensityMatrix {
        let n = self.dim();
        let m = DMatrix::from_fn(n, n, |i, j| self.amplitudes[i] * self.amplitudes[j].conj());
        DensityMatrix { entries: m }
    }
}

/// Hermitian, PSD, trace-one matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct DensityMatrix {
    entries: DMatrix<Complex64>,
}

impl DensityMatrix {
    /// Validates Hermiticity within [`tol::HERMITICITY_TOL`] and unit trace
    /// within [`tol::TRACE_TOL`]. Positivity is enforced when eigenvalues
    /// are extracted.
    pub fn new(entries: DMatrix<Complex64>) -> Result<Self> {
        if entries.nrows() != entries.ncols() || entries.is_empty() {
            return Err(Error::InvalidArgument(format!(
                "density matrix must be square and nonempty, got {}x{}",
                entries.nrows(),
                entries.ncols()
            )));
        }
        let max_dev = hermiticity_deviation(&entries);
        if max_dev > tol::HERMITICITY_TOL {
            return Err(Error::NotHermitian { max_dev });
        }
        let trace = entries.trace();
        if (trace.re - 1.0).abs() > tol::TRACE_TOL || trace.im.abs() > tol::TRACE_TOL {
            return Err(Error::TraceNotOne { trace: trace.re });
        }
        Ok(Self { entries })
    }

    pub fn dim(&self) -> usize {
        self.entries.nrows()
    }

    pub fn entries(&self) -> &DMatrix<Complex64> {
        &self.entries
    }

    pub fn trace(&self) -> f64 {
        self.entries.trace().re
    }

    /// Entrywise complex conjugate (same spectrum).
    pub fn conj(&self) -> Self {
        Self {
            entries: self.entries.map(|z| z.conj()),
        }
    }

    /// Kronecker product self ⊗ other.
    pub fn tensor(&self, other: &DensityMatrix) -> Self {
        Self {
            entries: self.entries.kronecker(&other.entries),
        }
    }
}

/// Max entrywise |M - M†|.
pub(crate) fn hermiticity_deviation(m: &DMatrix<Complex64>) -> f64 {
    let n = m.nrows();
    let mut max_dev: f64 = 0.0;
    for i in 0..n {
        max_dev = max_dev.max(m[(i, i)].im.abs());
        for j in (i + 1)..n {
            max_dev = max_dev.max((m[(i, j)] - m[(j, i)].conj()).norm());
        }
    }
    max_dev
}

/// Averages M with M†, removing rounding-level asymmetry.
pub(crate) fn hermitize(m: &DMatrix<Complex64>) -> DMatrix<Complex64> {
    (m + m.adjoint()).map(|z| z * 0.5)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn rejects_unnormalized_state() {
        let v = DVector::from_vec(vec![c(1.0, 0.0), c(1.0, 0.0)]);
        assert!(PureState::new(v.clone()).is_err());
        let s = PureState::normalized(v).unwrap();
        assert_relative_eq!(s.amplitudes().norm(), 1.0, epsilon = 1e-15);
    }

    #[test]
    fn density_of_basis_state_is_projector() {
        let s = PureState::basis_state(3, 1);
        let rho = s.density();
        assert_relative_eq!(rho.trace(), 1.0, epsilon = 1e-15);
        assert_eq!(rho.entries()[(1, 1)], c(1.0, 0.0));
        assert_eq!(rho.entries()[(0, 0)], c(0.0, 0.0));
    }

    #[test]
    fn rejects_non_hermitian_and_wrong_trace() {
        let bad = DMatrix::from_row_slice(2, 2, &[c(0.5, 0.0), c(0.1, 0.0), c(0.3, 0.0), c(0.5, 0.0)]);
        assert!(matches!(
            DensityMatrix::new(bad),
            Err(Error::NotHermitian { .. })
        ));
        let bad_trace =
            DMatrix::from_row_slice(2, 2, &[c(0.9, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(0.3, 0.0)]);
        assert!(matches!(
            DensityMatrix::new(bad_trace),
            Err(Error::TraceNotOne { .. })
        ));
    }

    #[test]
    fn tensor_index_convention() {
        let a = PureState::basis_state(2, 1);
        let b = PureState::basis_state(3, 2);
        let t = a.tensor(&b);
        assert_eq!(t.dim(), 6);
        assert_eq!(t.amplitudes()[1 * 3 + 2], c(1.0, 0.0));
    }

    #[test]
    fn overlap_conjugates_left_argument() {
        let v = DVector::from_vec(vec![c(0.0, 1.0), c(0.0, 0.0)]);
        let s = PureState::new(v).unwrap();
        let e0 = PureState::basis_state(2, 0);
        // ⟨e0|s⟩ = i
        assert_eq!(e0.overlap(&s), c(0.0, 1.0));
        // ⟨s|e0⟩ = -i
        assert_eq!(s.overlap(&e0), c(0.0, -1.0));
    }
}
