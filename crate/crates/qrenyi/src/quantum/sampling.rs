//! Random sampling primitives: Haar unitaries, uniform pure states,
//! Gaussian-length weight vectors, and the maximally entangled state.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::quantum::rng::RngStream;
use crate::quantum::state::PureState;
use crate::tol;

/// Probability weights wᵢ = lᵢ² of a mixed-unitary channel.
#[derive(Clone, Debug, PartialEq)]
pub struct WeightVector {
    weights: Vec<f64>,
}

impl WeightVector {
    /// Requires non-negative entries summing to 1 within 1e-12.
    pub fn new(weights: Vec<f64>) -> Result<Self> {
        if weights.is_empty() {
            return Err(Error::InvalidWeights {
                reason: "empty weight vector".into(),
            });
        }
        if let Some(w) = weights.iter().find(|&&w| !(w >= 0.0)) {
            return Err(Error::InvalidWeights {
                reason: format!("negative or NaN weight {w}"),
            });
        }
        let sum: f64 = weights.iter().sum();
        if (sum - 1.0).abs() > tol::WEIGHT_SUM_TOL {
            return Err(Error::InvalidWeights {
                reason: format!("weights sum to {sum}, expected 1"),
            });
        }
        Ok(Self { weights })
    }

    pub fn uniform(d: usize) -> Self {
        assert!(d >= 1);
        Self {
            weights: vec![1.0 / d as f64; d],
        }
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }
}

/// One standard complex Gaussian CN(0,1): real and imaginary parts are
/// independent N(0, 1/2).
pub(crate) fn standard_complex<R: Rng>(rng: &mut R) -> Complex64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    Complex64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
}

/// Haar-distributed n×n unitary.
///
/// Ginibre matrix, QR factorization, then each column of Q is multiplied by
/// the phase of the matching diagonal entry of R; plain QR alone is not
/// Haar-distributed.
pub fn haar_unitary(n: usize, stream: &RngStream) -> Result<DMatrix<Complex64>> {
    if n == 0 {
        return Err(Error::InvalidArgument("unitary dimension must be >= 1".into()));
    }
    let mut rng = stream.rng();
    let ginibre = DMatrix::from_fn(n, n, |_, _| standard_complex(&mut rng));
    let qr = ginibre.qr();
    let mut q = qr.q();
    let r = qr.r();
    for j in 0..n {
        let rjj = r[(j, j)];
        let mag = rjj.norm();
        let phase = if mag > 0.0 {
            rjj / Complex64::new(mag, 0.0)
        } else {
            Complex64::new(1.0, 0.0)
        };
        for i in 0..n {
            q[(i, j)] *= phase;
        }
    }
    Ok(q)
}

/// Uniform (Haar) pure state on the n-sphere: normalized i.i.d. complex
/// Gaussian entries.
pub fn random_pure_state(n: usize, stream: &RngStream) -> Result<PureState> {
    if n == 0 {
        return Err(Error::InvalidArgument("state dimension must be >= 1".into()));
    }
    let mut rng = stream.rng();
    loop {
        let v = DVector::from_fn(n, |_, _| standard_complex(&mut rng));
        if v.norm() > 1e-150 {
            return PureState::normalized(v);
        }
    }
}

/// Weights wᵢ = Lᵢ² / Σⱼ Lⱼ² from the squared lengths of D independent
/// complex Gaussian vectors of dimension N. The resulting law is
/// Dirichlet(N, ..., N).
pub fn sample_weights(d: usize, n: usize, stream: &RngStream) -> Result<WeightVector> {
    if d == 0 || n == 0 {
        return Err(Error::InvalidArgument(
            "weight count and Gaussian dimension must be >= 1".into(),
        ));
    }
    let mut rng = stream.rng();
    let mut squared: Vec<f64> = Vec::with_capacity(d);
    for _ in 0..d {
        let mut len2 = 0.0;
        for _ in 0..n {
            len2 += standard_complex(&mut rng).norm_sqr();
        }
        squared.push(len2);
    }
    let total: f64 = squared.iter().sum();
    WeightVector::new(squared.into_iter().map(|l| l / total).collect())
}

/// (1/√n) Σᵢ |i⟩⊗|i⟩ with product index i·n + i.
pub fn maximally_entangled(n: usize) -> PureState {
    assert!(n >= 1);
    let amp = Complex64::new(1.0 / (n as f64).sqrt(), 0.0);
    let mut v = DVector::zeros(n * n);
    for i in 0..n {
        v[i * n + i] = amp;
    }
    PureState::new(v).expect("construction is exactly normalized")
}
