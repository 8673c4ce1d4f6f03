//! Random unitary channels and their derived maps.
//!
//! A channel here is the mixed-unitary form E(ρ) = Σᵢ wᵢ Uᵢ†ρUᵢ. Three maps
//! derive from it: entrywise complex conjugation of the unitaries (E̅), the
//! D-dimensional conjugate output with entries lᵢlⱼ Tr(Uᵢ†ρUⱼ) that shares
//! the nonzero spectrum of E(ρ) on pure inputs, and the tensor product
//! E ⊗ F applied without materializing Kronecker factors.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quantum::{
    haar_unitary, sample_weights, DensityMatrix, PureState, RngStream, WeightVector,
};
use crate::tol;

/// Mixed-unitary channel ρ ↦ Σᵢ wᵢ Uᵢ†ρUᵢ on an N-dimensional system.
#[derive(Clone, Debug, PartialEq)]
pub struct RandomUnitaryChannel {
    unitaries: Vec<DMatrix<Complex64>>,
    weights: WeightVector,
}

impl RandomUnitaryChannel {
    /// Validates each unitary to [`tol::UNITARITY_TOL`] and requires one
    /// weight per unitary.
    pub fn new(unitaries: Vec<DMatrix<Complex64>>, weights: WeightVector) -> Result<Self> {
        if unitaries.is_empty() {
            return Err(Error::InvalidArgument("channel needs at least one unitary".into()));
        }
        if unitaries.len() != weights.len() {
            return Err(Error::DimensionMismatch {
                expected: unitaries.len(),
                actual: weights.len(),
            });
        }
        let n = unitaries[0].nrows();
        for u in &unitaries {
            if u.nrows() != n || u.ncols() != n {
                return Err(Error::DimensionMismatch {
                    expected: n,
                    actual: u.nrows().max(u.ncols()),
                });
            }
            let dev = unitarity_deviation(u);
            if dev > tol::UNITARITY_TOL {
                return Err(Error::NotUnitary { max_dev: dev });
            }
        }
        Ok(Self { unitaries, weights })
    }

    /// System dimension N.
    pub fn dim(&self) -> usize {
        self.unitaries[0].nrows()
    }

    /// Number of unitaries D.
    pub fn kraus_count(&self) -> usize {
        self.unitaries.len()
    }

    pub fn unitaries(&self) -> &[DMatrix<Complex64>] {
        &self.unitaries
    }

    pub fn weights(&self) -> &WeightVector {
        &self.weights
    }

    /// E(ρ) = Σᵢ wᵢ Uᵢ†ρUᵢ.
    pub fn apply(&self, rho: &DensityMatrix) -> Result<DensityMatrix> {
        if rho.dim() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                actual: rho.dim(),
            });
        }
        let n = self.dim();
        let mut out = DMatrix::<Complex64>::zeros(n, n);
        for (u, &w) in self.unitaries.iter().zip(self.weights.weights()) {
            let conjugated = u.adjoint() * rho.entries() * u;
            out += conjugated * Complex64::new(w, 0.0);
        }
        // Remove rounding-level asymmetry before validation.
        out = (&out + out.adjoint()).map(|z| z * 0.5);
        DensityMatrix::new(out)
    }

    /// Channel with every unitary replaced by its entrywise conjugate,
    /// same weights.
    pub fn complex_conjugate(&self) -> Self {
        Self {
            unitaries: self
                .unitaries
                .iter()
                .map(|u| u.map(|z| z.conj()))
                .collect(),
            weights: self.weights.clone(),
        }
    }

    /// Conjugate-channel output on a pure input: the D×D matrix with (i,j)
    /// entry √(wᵢwⱼ) ⟨ψ|UⱼUᵢ†|ψ⟩.
    ///
    /// Computed from the D propagated vectors √wᵢ Uᵢ†ψ as a Gram matrix, so
    /// no N×N intermediate is formed. Shares the nonzero spectrum of
    /// `apply` on the same pure input.
    pub fn conjugate_apply(&self, psi: &PureState) -> Result<DensityMatrix> {
        if psi.dim() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                actual: psi.dim(),
            });
        }
        let v = self.propagate(psi.amplitudes());
        let d = self.kraus_count();
        // (i,j) entry ⟨vⱼ|vᵢ⟩ = √(wᵢwⱼ)⟨ψ|UⱼUᵢ†|ψ⟩.
        let mut out = DMatrix::<Complex64>::zeros(d, d);
        for i in 0..d {
            for j in 0..=i {
                let e = v.column(j).dotc(&v.column(i));
                out[(i, j)] = e;
                out[(j, i)] = e.conj();
            }
        }
        DensityMatrix::new(out)
    }

    /// Samples D Haar unitaries and a Dirichlet(N,...,N) weight vector.
    pub fn sample(d: usize, n: usize, stream: &RngStream) -> Result<Self> {
        if d == 0 || n == 0 {
            return Err(Error::InvalidArgument(
                "channel sizes D and N must be >= 1".into(),
            ));
        }
        let unitaries: Result<Vec<_>> = (0..d)
            .map(|i| haar_unitary(n, &stream.substream(i as u64)))
            .collect();
        let weights = sample_weights(d, n, &stream.substream(d as u64))?;
        Self::new(unitaries?, weights)
    }
}

/// Samples a random unitary channel; see [`RandomUnitaryChannel::sample`].
pub fn sample_channel(d: usize, n: usize, stream: &RngStream) -> Result<RandomUnitaryChannel> {
    RandomUnitaryChannel::sample(d, n, stream)
}

/// (E_A ⊗ E_B)(ρ) = Σᵢⱼ wᵢ w'ⱼ (Uᵢ† ⊗ V'ⱼ†) ρ (Uᵢ ⊗ V'ⱼ).
///
/// Kronecker conjugations are applied column-by-column through the reshaped
/// N_A×N_B coefficient matrices; no N_A N_B × N_A N_B unitary is formed.
pub fn tensor_apply(
    ch_a: &RandomUnitaryChannel,
    ch_b: &RandomUnitaryChannel,
    rho: &DensityMatrix,
) -> Result<DensityMatrix> {
    let (na, nb) = (ch_a.dim(), ch_b.dim());
    let n = na * nb;
    if rho.dim() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            actual: rho.dim(),
        });
    }
    let mut out = DMatrix::<Complex64>::zeros(n, n);
    for (ua, &wa) in ch_a.unitaries().iter().zip(ch_a.weights().weights()) {
        let a = ua.adjoint();
        for (ub, &wb) in ch_b.unitaries().iter().zip(ch_b.weights().weights()) {
            let b = ub.adjoint();
            // (A ⊗ B) ρ (A ⊗ B)† in two passes of column reshapes.
            let left = kron_apply_matrix(&a, &b, rho.entries());
            let term = kron_apply_matrix(&a, &b, &left.adjoint()).adjoint();
            out += term * Complex64::new(wa * wb, 0.0);
        }
    }
    out = (&out + out.adjoint()).map(|z| z * 0.5);
    DensityMatrix::new(out)
}

/// Tensor pair E_A ⊗ E_B held in factored form.
///
/// Applications go through the N_A×N_B reshape of product-space vectors, so
/// the D_A·D_B Kronecker unitaries are never materialized. The adjoint and
/// transpose factors the hot paths need are cached at construction.
#[derive(Clone, Debug)]
pub struct ProductChannel {
    a: RandomUnitaryChannel,
    b: RandomUnitaryChannel,
    a_adj: Vec<DMatrix<Complex64>>,
    b_conj: Vec<DMatrix<Complex64>>,
    b_trans: Vec<DMatrix<Complex64>>,
}

impl ProductChannel {
    pub fn new(a: RandomUnitaryChannel, b: RandomUnitaryChannel) -> Self {
        let a_adj = a.unitaries().iter().map(|u| u.adjoint()).collect();
        let b_conj = b.unitaries().iter().map(|u| u.map(|z| z.conj())).collect();
        let b_trans = b.unitaries().iter().map(|u| u.transpose()).collect();
        Self {
            a,
            b,
            a_adj,
            b_conj,
            b_trans,
        }
    }

    /// The conjugate pair E ⊗ E̅ studied for additivity violations.
    pub fn conjugate_pair(ch: &RandomUnitaryChannel) -> Self {
        Self::new(ch.clone(), ch.complex_conjugate())
    }

    pub fn factor_a(&self) -> &RandomUnitaryChannel {
        &self.a
    }

    pub fn factor_b(&self) -> &RandomUnitaryChannel {
        &self.b
    }

    /// Input/output dimension N_A · N_B.
    pub fn dim(&self) -> usize {
        self.a.dim() * self.b.dim()
    }

    /// Number of product terms D_A · D_B.
    pub fn kraus_count(&self) -> usize {
        self.a.kraus_count() * self.b.kraus_count()
    }

    /// Dense application; see [`tensor_apply`].
    pub fn apply(&self, rho: &DensityMatrix) -> Result<DensityMatrix> {
        tensor_apply(&self.a, &self.b, rho)
    }

    /// Conjugate-channel output of the product map on a pure input: the
    /// (D_A·D_B)-dimensional Gram matrix sharing the nonzero spectrum of
    /// `apply` on |ψ⟩⟨ψ|.
    pub fn conjugate_apply(&self, psi: &PureState) -> Result<DensityMatrix> {
        if psi.dim() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                actual: psi.dim(),
            });
        }
        let v = self.propagate(psi.amplitudes());
        let k = self.kraus_count();
        let mut out = DMatrix::<Complex64>::zeros(k, k);
        for i in 0..k {
            for j in 0..=i {
                let e = v.column(j).dotc(&v.column(i));
                out[(i, j)] = e;
                out[(j, i)] = e.conj();
            }
        }
        DensityMatrix::new(out)
    }
}

/// (A ⊗ B)ψ for a product-space vector, via A·M·Bᵀ on the N_A×N_B reshape
/// M[i][j] = ψ[i·N_B + j].
fn kron_apply_vector(
    a: &DMatrix<Complex64>,
    b: &DMatrix<Complex64>,
    psi: &DVector<Complex64>,
) -> DVector<Complex64> {
    let (na, nb) = (a.nrows(), b.nrows());
    debug_assert_eq!(psi.len(), a.ncols() * b.ncols());
    let m = DMatrix::from_fn(a.ncols(), b.ncols(), |i, j| psi[i * b.ncols() + j]);
    let res = a * m * b.transpose();
    DVector::from_fn(na * nb, |k, _| res[(k / nb, k % nb)])
}

/// (A ⊗ B)M for a product-space matrix, column by column.
fn kron_apply_matrix(
    a: &DMatrix<Complex64>,
    b: &DMatrix<Complex64>,
    m: &DMatrix<Complex64>,
) -> DMatrix<Complex64> {
    let rows = a.nrows() * b.nrows();
    let mut out = DMatrix::zeros(rows, m.ncols());
    for c in 0..m.ncols() {
        let col = kron_apply_vector(a, b, &m.column(c).into_owned());
        out.set_column(c, &col);
    }
    out
}

/// Weighted propagation shared by the entropy objective: the map
/// ψ ↦ V(ψ) whose i-th column is √wᵢ Aᵢψ for the adjoint unitary factors
/// Aᵢ, together with its adjoint Y ↦ Σᵢ √wᵢ Aᵢ†yᵢ.
///
/// The output density factors as V V† and the conjugate output as the Gram
/// matrix of the columns, which is what both the entropy value and its
/// gradient consume.
pub trait UnitaryMixture {
    fn input_dim(&self) -> usize;
    fn term_count(&self) -> usize;
    /// N×K matrix of weighted propagated vectors.
    fn propagate(&self, psi: &DVector<Complex64>) -> DMatrix<Complex64>;
    /// Adjoint of `propagate` applied to an N×K matrix of columns.
    fn pullback(&self, cols: &DMatrix<Complex64>) -> DVector<Complex64>;
}

impl UnitaryMixture for RandomUnitaryChannel {
    fn input_dim(&self) -> usize {
        self.dim()
    }

    fn term_count(&self) -> usize {
        self.kraus_count()
    }

    fn propagate(&self, psi: &DVector<Complex64>) -> DMatrix<Complex64> {
        let n = self.dim();
        let mut v = DMatrix::zeros(n, self.kraus_count());
        for (i, (u, &w)) in self
            .unitaries
            .iter()
            .zip(self.weights.weights())
            .enumerate()
        {
            let col = u.ad_mul(psi) * Complex64::new(w.sqrt(), 0.0);
            v.set_column(i, &col);
        }
        v
    }

    fn pullback(&self, cols: &DMatrix<Complex64>) -> DVector<Complex64> {
        let n = self.dim();
        let mut acc = DVector::zeros(n);
        for (i, (u, &w)) in self
            .unitaries
            .iter()
            .zip(self.weights.weights())
            .enumerate()
        {
            acc += u * cols.column(i) * Complex64::new(w.sqrt(), 0.0);
        }
        acc
    }
}

impl UnitaryMixture for ProductChannel {
    fn input_dim(&self) -> usize {
        self.dim()
    }

    fn term_count(&self) -> usize {
        self.kraus_count()
    }

    fn propagate(&self, psi: &DVector<Complex64>) -> DMatrix<Complex64> {
        let (na, nb) = (self.a.dim(), self.b.dim());
        let (da, db) = (self.a.kraus_count(), self.b.kraus_count());
        let m = DMatrix::from_fn(na, nb, |r, c| psi[r * nb + c]);
        let mut v = DMatrix::zeros(na * nb, da * db);
        for (i, &wa) in self.a.weights().weights().iter().enumerate() {
            // (Uᵢ† ⊗ V'ⱼ†)ψ = vec(Uᵢ†· M · conj(V'ⱼ)); the left factor is
            // shared across j.
            let left = &self.a_adj[i] * &m;
            for (j, &wb) in self.b.weights().weights().iter().enumerate() {
                let res = &left * &self.b_conj[j];
                let scale = Complex64::new((wa * wb).sqrt(), 0.0);
                let mut col = v.column_mut(i * db + j);
                for r in 0..na {
                    for c in 0..nb {
                        col[r * nb + c] = res[(r, c)] * scale;
                    }
                }
            }
        }
        v
    }

    fn pullback(&self, cols: &DMatrix<Complex64>) -> DVector<Complex64> {
        let (na, nb) = (self.a.dim(), self.b.dim());
        let db = self.b.kraus_count();
        let mut acc = DMatrix::<Complex64>::zeros(na, nb);
        for (i, &wa) in self.a.weights().weights().iter().enumerate() {
            // Σⱼ √(wᵢwⱼ)(Uᵢ ⊗ V'ⱼ) y_ij = vec(Uᵢ · Σⱼ √(wᵢwⱼ) Y_ij · V'ⱼᵀ).
            let mut inner = DMatrix::<Complex64>::zeros(na, nb);
            for (j, &wb) in self.b.weights().weights().iter().enumerate() {
                let col = cols.column(i * db + j);
                let y = DMatrix::from_fn(na, nb, |r, c| col[r * nb + c]);
                inner += y * &self.b_trans[j] * Complex64::new((wa * wb).sqrt(), 0.0);
            }
            acc += &self.a.unitaries()[i] * inner;
        }
        DVector::from_fn(na * nb, |k, _| acc[(k / nb, k % nb)])
    }
}

fn unitarity_deviation(u: &DMatrix<Complex64>) -> f64 {
    let n = u.nrows();
    let gram = u.adjoint() * u;
    let mut dev: f64 = 0.0;
    for i in 0..n {
        for j in 0..n {
            let target = if i == j { 1.0 } else { 0.0 };
            dev = dev.max((gram[(i, j)] - Complex64::new(target, 0.0)).norm());
        }
    }
    dev
}

// --------------------------------------------------------------------------
// Channel file format
// --------------------------------------------------------------------------

/// On-disk channel representation:
/// `{ "N": int, "D": int, "weights": [...], "unitaries": [[[[re, im], ...], ...], ...] }`
/// with row-major matrices and [re, im] entry pairs.
#[derive(Serialize, Deserialize)]
struct ChannelFile {
    #[serde(rename = "N")]
    n: usize,
    #[serde(rename = "D")]
    d: usize,
    weights: Vec<f64>,
    unitaries: Vec<Vec<Vec<[f64; 2]>>>,
}

impl RandomUnitaryChannel {
    pub fn to_json(&self) -> Result<String> {
        let file = ChannelFile {
            n: self.dim(),
            d: self.kraus_count(),
            weights: self.weights.weights().to_vec(),
            unitaries: self
                .unitaries
                .iter()
                .map(|u| {
                    (0..u.nrows())
                        .map(|i| (0..u.ncols()).map(|j| [u[(i, j)].re, u[(i, j)].im]).collect())
                        .collect()
                })
                .collect(),
        };
        Ok(serde_json::to_string(&file)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let file: ChannelFile = serde_json::from_str(text)?;
        if file.unitaries.len() != file.d || file.weights.len() != file.d {
            return Err(Error::InvalidArgument(
                "channel file: D does not match weights/unitaries".into(),
            ));
        }
        let mut unitaries = Vec::with_capacity(file.d);
        for rows in &file.unitaries {
            if rows.len() != file.n || rows.iter().any(|r| r.len() != file.n) {
                return Err(Error::InvalidArgument(
                    "channel file: unitary shape does not match N".into(),
                ));
            }
            unitaries.push(DMatrix::from_fn(file.n, file.n, |i, j| {
                Complex64::new(rows[i][j][0], rows[i][j][1])
            }));
        }
        Self::new(unitaries, WeightVector::new(file.weights)?)
    }

    pub fn write_file(&self, path: &std::path::Path) -> Result<()> {
        std::fs::write(path, self.to_json()?)?;
        Ok(())
    }

    pub fn read_file(path: &std::path::Path) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }
}
