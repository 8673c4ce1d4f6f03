//! Eigenvalue spectra and entropy functionals.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::quantum::state::{hermiticity_deviation, hermitize, DensityMatrix};
use crate::tol;

/// Descending, non-negative eigenvalue vector.
#[derive(Clone, Debug, PartialEq)]
pub struct Spectrum {
    values: Vec<f64>,
}

impl Spectrum {
    /// Sorts descending and clips eigenvalues in [-1e-9, 0) to zero.
    /// Anything more negative signals a non-PSD source and is rejected.
    pub fn new(mut values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::InvalidArgument("empty spectrum".into()));
        }
        for v in values.iter_mut() {
            if *v < -tol::EIGENVALUE_CLIP {
                return Err(Error::NegativeEigenvalue { value: *v });
            }
            if *v < 0.0 {
                *v = 0.0;
            }
        }
        values.sort_unstable_by(|a, b| b.partial_cmp(a).expect("NaN eigenvalue"));
        Ok(Self { values })
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn sum(&self) -> f64 {
        self.values.iter().sum()
    }

    /// Entries above `threshold`, still descending.
    pub fn nonzero(&self, threshold: f64) -> Vec<f64> {
        self.values.iter().copied().filter(|&v| v > threshold).collect()
    }

    /// Largest deviation from the flat spectrum 1/len.
    pub fn max_deviation_from_uniform(&self) -> f64 {
        let inv = 1.0 / self.values.len() as f64;
        self.values
            .iter()
            .map(|v| (v - inv).abs())
            .fold(0.0, f64::max)
    }
}

/// Order parameter of the p-Rényi entropy.
///
/// Orders within 1e-6 of 1 are treated as exactly 1 (von Neumann); the
/// 1/(1-p) prefactor is catastrophically ill-conditioned closer in.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RenyiOrder {
    p: f64,
    von_neumann: bool,
}

impl RenyiOrder {
    pub fn new(p: f64) -> Result<Self> {
        if !(p > 0.0) || !p.is_finite() {
            return Err(Error::InvalidOrder { p });
        }
        if (p - 1.0).abs() < tol::RENYI_VN_WINDOW {
            return Ok(Self {
                p: 1.0,
                von_neumann: true,
            });
        }
        Ok(Self {
            p,
            von_neumann: false,
        })
    }

    pub fn von_neumann() -> Self {
        Self {
            p: 1.0,
            von_neumann: true,
        }
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    pub fn is_von_neumann(&self) -> bool {
        self.von_neumann
    }
}

fn check_spectrum_sum(spec: &Spectrum) -> Result<()> {
    let sum = spec.sum();
    if (sum - 1.0).abs() > tol::SPECTRUM_SUM_TOL {
        return Err(Error::SpectrumNotNormalized { sum });
    }
    Ok(())
}

/// H_p(spec) = ln(Σᵢ vᵢ^p) / (1-p) in nats, with 0^p = 0.
///
/// Orders flagged as von Neumann delegate to [`von_neumann_entropy`].
pub fn renyi_entropy(spec: &Spectrum, order: &RenyiOrder) -> Result<f64> {
    if order.is_von_neumann() {
        return von_neumann_entropy(spec);
    }
    check_spectrum_sum(spec)?;
    let p = order.p();
    let sum_p: f64 = spec
        .values()
        .iter()
        .map(|&v| if v > 0.0 { v.powf(p) } else { 0.0 })
        .sum();
    Ok((sum_p.ln() / (1.0 - p)).max(0.0))
}

/// H(spec) = -Σᵢ vᵢ ln vᵢ in nats, with 0 ln 0 = 0.
pub fn von_neumann_entropy(spec: &Spectrum) -> Result<f64> {
    check_spectrum_sum(spec)?;
    let s: f64 = spec
        .values()
        .iter()
        .map(|&v| if v > 0.0 { -v * v.ln() } else { 0.0 })
        .sum();
    Ok(s.max(0.0))
}

/// Descending eigenvalues of a density matrix.
pub fn eigenvalues(dm: &DensityMatrix) -> Result<Spectrum> {
    hermitian_eigenvalues(dm.entries())
}

/// Descending eigenvalues of a Hermitian matrix, validated and clipped per
/// the [`Spectrum`] rules, with sub-[`tol::SPECTRUM_ZERO_CLIP`] entries
/// flattened to exact zeros.
pub(crate) fn hermitian_eigenvalues(m: &DMatrix<Complex64>) -> Result<Spectrum> {
    let max_dev = hermiticity_deviation(m);
    if max_dev > tol::HERMITICITY_TOL {
        return Err(Error::NotHermitian { max_dev });
    }
    let eig = hermitize(m).symmetric_eigen();
    Spectrum::new(
        eig.eigenvalues
            .iter()
            .map(|&v| if v.abs() < tol::SPECTRUM_ZERO_CLIP { 0.0 } else { v })
            .collect(),
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quantum::{random_pure_state, RngStream};
    use approx::assert_relative_eq;
    use nalgebra::DVector;
    use proptest::prelude::*;

    // Frozen reference values, evaluated independently at 40-digit precision
    // (mpmath) from the defining formulas.
    const RENYI_075_025_P05: f64 = 0.6238107163648714;
    const VN_075_025: f64 = 0.5623351446188084;

    #[test]
    fn pure_spectrum_has_zero_entropy() {
        let s = Spectrum::new(vec![1.0, 0.0]).unwrap();
        let order = RenyiOrder::new(0.5).unwrap();
        assert_eq!(renyi_entropy(&s, &order).unwrap(), 0.0);
        assert_eq!(von_neumann_entropy(&s).unwrap(), 0.0);
    }

    #[test]
    fn flat_spectrum_gives_ln_d() {
        let s = Spectrum::new(vec![0.25; 4]).unwrap();
        let order = RenyiOrder::new(0.5).unwrap();
        assert_relative_eq!(
            renyi_entropy(&s, &order).unwrap(),
            4.0_f64.ln(),
            epsilon = 1e-12
        );
        let two = Spectrum::new(vec![0.5, 0.5]).unwrap();
        assert_relative_eq!(
            von_neumann_entropy(&two).unwrap(),
            2.0_f64.ln(),
            epsilon = 1e-12
        );
    }

    #[test]
    fn frozen_two_point_values() {
        let s = Spectrum::new(vec![0.75, 0.25]).unwrap();
        let order = RenyiOrder::new(0.5).unwrap();
        assert_relative_eq!(
            renyi_entropy(&s, &order).unwrap(),
            RENYI_075_025_P05,
            epsilon = 1e-12
        );
        assert_relative_eq!(
            von_neumann_entropy(&s).unwrap(),
            VN_075_025,
            epsilon = 1e-12
        );
    }

    #[test]
    fn rejects_unnormalized_spectrum() {
        let s = Spectrum::new(vec![0.6, 0.3]).unwrap();
        let order = RenyiOrder::new(0.5).unwrap();
        assert!(matches!(
            renyi_entropy(&s, &order),
            Err(Error::SpectrumNotNormalized { .. })
        ));
        assert!(von_neumann_entropy(&s).is_err());
    }

    #[test]
    fn spectrum_clips_small_negatives_and_rejects_large() {
        let s = Spectrum::new(vec![1.0, -0.5e-9]).unwrap();
        assert_eq!(s.values(), &[1.0, 0.0]);
        assert!(matches!(
            Spectrum::new(vec![1.0, -1e-6]),
            Err(Error::NegativeEigenvalue { .. })
        ));
    }

    #[test]
    fn order_near_one_routes_to_von_neumann() {
        let order = RenyiOrder::new(1.0 + 1e-9).unwrap();
        assert!(order.is_von_neumann());
        let order = RenyiOrder::new(1.0 - 1e-4).unwrap();
        assert!(!order.is_von_neumann());
        assert!(RenyiOrder::new(0.0).is_err());
        assert!(RenyiOrder::new(-0.3).is_err());
    }

    /// Two-sided complex Jacobi eigensolver, used only as an independent
    /// cross-check of the production eigendecomposition path.
    fn jacobi_eigenvalues(m: &DMatrix<Complex64>) -> Vec<f64> {
        let n = m.nrows();
        let mut a = m.clone();
        for _sweep in 0..100 {
            let mut off = 0.0_f64;
            for i in 0..n {
                for j in (i + 1)..n {
                    off += a[(i, j)].norm_sqr();
                }
            }
            if off < 1e-28 {
                break;
            }
            for p in 0..n {
                for q in (p + 1)..n {
                    let apq = a[(p, q)];
                    if apq.norm() < 1e-30 {
                        continue;
                    }
                    // Unitary 2x2 rotation diagonalizing the (p,q) block.
                    let app = a[(p, p)].re;
                    let aqq = a[(q, q)].re;
                    let phase = apq / Complex64::new(apq.norm(), 0.0);
                    let theta = 0.5 * (2.0 * apq.norm()).atan2(aqq - app);
                    let c = Complex64::new(theta.cos(), 0.0);
                    let s = phase * Complex64::new(theta.sin(), 0.0);
                    // Columns.
                    for k in 0..n {
                        let akp = a[(k, p)];
                        let akq = a[(k, q)];
                        a[(k, p)] = akp * c - akq * s.conj();
                        a[(k, q)] = akp * s + akq * c;
                    }
                    // Rows.
                    for k in 0..n {
                        let apk = a[(p, k)];
                        let aqk = a[(q, k)];
                        a[(p, k)] = apk * c.conj() - aqk * s;
                        a[(q, k)] = apk * s.conj() + aqk * c.conj();
                    }
                }
            }
        }
        let mut vals: Vec<f64> = (0..n).map(|i| a[(i, i)].re).collect();
        vals.sort_unstable_by(|x, y| y.partial_cmp(x).unwrap());
        vals
    }

    #[test]
    fn eigenvalues_match_independent_jacobi_solver() {
        let stream = RngStream::new(2024);
        for trial in 0..20 {
            let psi = random_pure_state(4, &stream.substream(trial)).unwrap();
            // Mix three projectors into a generic rank-3 density matrix.
            let a = random_pure_state(4, &stream.substream(100 + trial)).unwrap();
            let b = random_pure_state(4, &stream.substream(200 + trial)).unwrap();
            let m = psi.density().entries() * Complex64::new(0.5, 0.0)
                + a.density().entries() * Complex64::new(0.3, 0.0)
                + b.density().entries() * Complex64::new(0.2, 0.0);
            let dm = DensityMatrix::new(m.clone()).unwrap();
            let spec = eigenvalues(&dm).unwrap();
            let oracle = jacobi_eigenvalues(&m);
            for (x, y) in spec.values().iter().zip(oracle.iter()) {
                assert!((x - y).abs() < 1e-10, "eigensolver mismatch: {x} vs {y}");
            }
        }
    }

    #[test]
    fn eigenvalues_of_simple_matrices() {
        let half = DMatrix::from_diagonal(&DVector::from_vec(vec![
            Complex64::new(0.5, 0.0),
            Complex64::new(0.5, 0.0),
        ]));
        let dm = DensityMatrix::new(half).unwrap();
        assert_eq!(eigenvalues(&dm).unwrap().values(), &[0.5, 0.5]);

        let proj = crate::quantum::PureState::basis_state(2, 0).density();
        let spec = eigenvalues(&proj).unwrap();
        assert!((spec.values()[0] - 1.0).abs() < 1e-14);
        assert!(spec.values()[1].abs() < 1e-14);
    }

    #[test]
    fn renyi_is_continuous_at_one() {
        let stream = RngStream::new(5);
        for trial in 0..50 {
            let mut rng = stream.substream(trial).rng();
            let len = 2 + (trial as usize % 15);
            let mut v: Vec<f64> = (0..len).map(|_| rand::Rng::random::<f64>(&mut rng)).collect();
            let s: f64 = v.iter().sum();
            v.iter_mut().for_each(|x| *x /= s);
            let spec = Spectrum::new(v).unwrap();
            let hvn = von_neumann_entropy(&spec).unwrap();
            for p in [1.0 - 1e-4, 1.0 + 1e-4] {
                let h = renyi_entropy(&spec, &RenyiOrder::new(p).unwrap()).unwrap();
                assert!(
                    (h - hvn).abs() <= 5e-4,
                    "H_{p} = {h} vs H_1 = {hvn} drifted"
                );
            }
        }
    }

    proptest! {
        /// ln d ≥ H_p ≥ H_1 ≥ 0 for p in (0,1): Rényi entropy decreases in p.
        #[test]
        fn renyi_monotonicity_in_p(
            raw in proptest::collection::vec(1e-4..1.0f64, 2..12),
            p in 0.01..0.99f64,
        ) {
            let sum: f64 = raw.iter().sum();
            let spec = Spectrum::new(raw.iter().map(|x| x / sum).collect()).unwrap();
            let d = spec.len() as f64;
            let hp = renyi_entropy(&spec, &RenyiOrder::new(p).unwrap()).unwrap();
            let h1 = von_neumann_entropy(&spec).unwrap();
            prop_assert!(hp <= d.ln() + 1e-12);
            prop_assert!(hp >= h1 - 1e-12);
            prop_assert!(h1 >= 0.0);
        }
    }
}
