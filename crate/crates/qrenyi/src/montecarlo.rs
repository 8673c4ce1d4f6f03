//! Monte Carlo experiments for the eigenvalue concentration of
//! conjugate-channel outputs.
//!
//! Conjugate outputs of Haar channels concentrate around the flat spectrum
//! 1/D at the scale √(ln N / N). The experiments here measure that scale,
//! estimate the per-channel probability P_{E,λ} of being λ-maximally mixed
//! and the channel-ensemble failure rate Q_λ, and fit how a random input's
//! output spectrum interpolates between a reference spectrum and the flat
//! one.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::channels::{sample_channel, RandomUnitaryChannel};
use crate::error::{Error, Result};
use crate::quantum::{eigenvalues, random_pure_state, PureState, RngStream, Spectrum};

/// Deviation-from-uniform data for one (D, N) cell.
///
/// `scaled_median` divides by √(ln N / N); concentration at that scale
/// makes it roughly N-independent.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ConcentrationReport {
    pub d: usize,
    pub n: usize,
    pub trials: usize,
    /// Per-trial maxᵢ |qᵢ - 1/D|.
    pub deviations: Vec<f64>,
    pub median_deviation: f64,
    pub scaled_median: f64,
}

/// Interpolation fits q ≈ y·p + (1-y)/D for random inputs.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct NearEventReport {
    pub trials: usize,
    /// Per-trial minimizer y* ∈ [0,1] of the uniform residual.
    pub fitted_y: Vec<f64>,
    /// Per-trial minimal uniform residual maxᵢ |qᵢ - (y*pᵢ + (1-y*)/D)|.
    pub residuals: Vec<f64>,
    pub fraction_above_y0: f64,
}

fn median(values: &[f64]) -> f64 {
    let mut sorted = values.to_vec();
    sorted.sort_unstable_by(|a, b| a.partial_cmp(b).unwrap());
    let n = sorted.len();
    if n % 2 == 1 {
        sorted[n / 2]
    } else {
        0.5 * (sorted[n / 2 - 1] + sorted[n / 2])
    }
}

/// Concentration scale λ-criteria are measured against.
pub fn concentration_scale(n: usize) -> f64 {
    ((n as f64).ln() / n as f64).sqrt()
}

/// Deviation of one fresh (channel, state) draw.
fn one_deviation(d: usize, n: usize, stream: &RngStream) -> Result<f64> {
    let ch = sample_channel(d, n, &stream.substream(0))?;
    let chi = random_pure_state(n, &stream.substream(1))?;
    let spec = eigenvalues(&ch.conjugate_apply(&chi)?)?;
    Ok(spec.max_deviation_from_uniform())
}

/// Per N in `n_list`: `trials` independent draws of a fresh channel and a
/// fresh pure input, recording maxᵢ |qᵢ - 1/D| of the conjugate output.
pub fn concentration_experiment(
    d: usize,
    n_list: &[usize],
    trials: usize,
    rng: &RngStream,
) -> Result<Vec<ConcentrationReport>> {
    if trials == 0 {
        return Err(Error::InvalidArgument("trials must be >= 1".into()));
    }
    for &n in n_list {
        if n <= d {
            return Err(Error::InvalidArgument(format!(
                "need N > D, got N = {n}, D = {d}"
            )));
        }
    }
    n_list
        .iter()
        .enumerate()
        .map(|(m, &n)| {
            let cell = rng.substream(m as u64);
            let deviations: Result<Vec<f64>> = (0..trials)
                .into_par_iter()
                .map(|t| one_deviation(d, n, &cell.substream(t as u64)))
                .collect();
            let deviations = deviations?;
            let median_deviation = median(&deviations);
            Ok(ConcentrationReport {
                d,
                n,
                trials,
                scaled_median: median_deviation / concentration_scale(n),
                median_deviation,
                deviations,
            })
        })
        .collect()
}

/// Fraction of random pure inputs whose conjugate output is λ-maximally
/// mixed for this channel: maxᵢ |qᵢ - 1/D| ≤ λ√(ln N / N).
pub fn estimate_p_lambda(
    ch: &RandomUnitaryChannel,
    lambda: f64,
    trials: usize,
    rng: &RngStream,
) -> Result<f64> {
    if trials == 0 {
        return Err(Error::InvalidArgument("trials must be >= 1".into()));
    }
    if !(lambda >= 0.0) {
        return Err(Error::OutOfRange {
            name: "lambda",
            value: lambda,
            range: "[0, inf)",
        });
    }
    let threshold = lambda * concentration_scale(ch.dim());
    let hits: Result<Vec<bool>> = (0..trials)
        .into_par_iter()
        .map(|t| {
            let chi = random_pure_state(ch.dim(), &rng.substream(t as u64))?;
            let spec = eigenvalues(&ch.conjugate_apply(&chi)?)?;
            Ok(spec.max_deviation_from_uniform() <= threshold)
        })
        .collect();
    let hits = hits?;
    Ok(hits.iter().filter(|&&h| h).count() as f64 / trials as f64)
}

/// Fraction of freshly sampled channels whose estimated P_{E,λ} falls
/// below 1/2.
pub fn estimate_q_lambda(
    d: usize,
    n: usize,
    lambda: f64,
    n_channels: usize,
    trials_per_channel: usize,
    rng: &RngStream,
) -> Result<f64> {
    if n_channels == 0 {
        return Err(Error::InvalidArgument("n_channels must be >= 1".into()));
    }
    let mut failures = 0usize;
    for c in 0..n_channels {
        let cell = rng.substream(c as u64);
        let ch = sample_channel(d, n, &cell.substream(0))?;
        let p_hat = estimate_p_lambda(&ch, lambda, trials_per_channel, &cell.substream(1))?;
        if p_hat < 0.5 {
            failures += 1;
        }
    }
    Ok(failures as f64 / n_channels as f64)
}

/// Splits χ as √(1-x²)·ψ₀ + x·φ with φ ⊥ ψ₀, after adjusting the global
/// phase of χ so that ⟨ψ₀|χ⟩ ≥ 0.
///
/// Returns x = √(1 - |⟨ψ₀|χ⟩|²) and, when x > 1e-12, the unit-norm
/// orthogonal component φ; below that χ is ψ₀ up to phase and φ is
/// undetermined.
pub fn decompose_relative(chi: &PureState, psi0: &PureState) -> Result<(f64, Option<PureState>)> {
    if chi.dim() != psi0.dim() {
        return Err(Error::DimensionMismatch {
            expected: psi0.dim(),
            actual: chi.dim(),
        });
    }
    let overlap = psi0.overlap(chi);
    let mag = overlap.norm();
    let phase = if mag > 0.0 {
        overlap.conj() / num_complex::Complex64::new(mag, 0.0)
    } else {
        num_complex::Complex64::new(1.0, 0.0)
    };
    let adjusted = chi.amplitudes() * phase;
    // x = √(1 - |⟨ψ₀|χ⟩|²) evaluated as the orthogonal-complement norm,
    // which stays accurate when χ is close to ψ₀.
    let mut ortho = &adjusted - psi0.amplitudes() * num_complex::Complex64::new(mag, 0.0);
    let x = ortho.norm().clamp(0.0, 1.0);
    if x <= 1e-12 {
        return Ok((x, None));
    }
    // One reorthogonalization pass keeps φ ⊥ ψ₀ at machine precision even
    // for small x.
    let residual = psi0.amplitudes().dotc(&ortho);
    ortho -= psi0.amplitudes() * residual;
    Ok((x, Some(PureState::normalized(ortho)?)))
}

/// P(x² ≤ x₀) = x₀^{n-1} for the squared orthogonal mass of a Haar state
/// against a fixed reference in dimension n.
pub fn overlap_cdf(x0: f64, n: usize) -> Result<f64> {
    if !(0.0..=1.0).contains(&x0) {
        return Err(Error::OutOfRange {
            name: "x0",
            value: x0,
            range: "[0, 1]",
        });
    }
    if n == 0 {
        return Err(Error::InvalidArgument("dimension must be >= 1".into()));
    }
    Ok(x0.powi(n as i32 - 1))
}

/// Uniform-residual interpolation fit: minimizes
/// g(y) = maxᵢ |qᵢ - (y·pᵢ + (1-y)/D)| over y ∈ [0,1] by golden section
/// (g is convex piecewise-linear). Returns (y*, g(y*)).
pub fn fit_interpolation_minmax(q: &Spectrum, p: &Spectrum) -> (f64, f64) {
    assert_eq!(q.len(), p.len());
    let d = q.len() as f64;
    let g = |y: f64| -> f64 {
        q.values()
            .iter()
            .zip(p.values())
            .map(|(&qi, &pi)| (qi - (y * pi + (1.0 - y) / d)).abs())
            .fold(0.0, f64::max)
    };
    let inv_phi = 0.5 * (5.0_f64.sqrt() - 1.0);
    let (mut lo, mut hi) = (0.0f64, 1.0f64);
    let mut x1 = hi - inv_phi * (hi - lo);
    let mut x2 = lo + inv_phi * (hi - lo);
    let (mut f1, mut f2) = (g(x1), g(x2));
    while hi - lo > 1e-12 {
        if f1 > f2 {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + inv_phi * (hi - lo);
            f2 = g(x2);
        } else {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - inv_phi * (hi - lo);
            f1 = g(x1);
        }
    }
    // Endpoints can be exact minimizers; keep the best candidate.
    let mut best = (0.5 * (lo + hi), g(0.5 * (lo + hi)));
    for cand in [0.0, 1.0] {
        let v = g(cand);
        if v < best.1 {
            best = (cand, v);
        }
    }
    best
}

/// Least-squares counterpart of [`fit_interpolation_minmax`]: closed-form
/// y* clamped to [0,1] and the root-mean-square residual there.
pub fn fit_interpolation_least_squares(q: &Spectrum, p: &Spectrum) -> (f64, f64) {
    assert_eq!(q.len(), p.len());
    let d = q.len() as f64;
    let mut num = 0.0;
    let mut den = 0.0;
    for (&qi, &pi) in q.values().iter().zip(p.values()) {
        let a = pi - 1.0 / d;
        let b = qi - 1.0 / d;
        num += a * b;
        den += a * a;
    }
    let y = if den > 0.0 { (num / den).clamp(0.0, 1.0) } else { 0.0 };
    let mse: f64 = q
        .values()
        .iter()
        .zip(p.values())
        .map(|(&qi, &pi)| {
            let r = qi - (y * pi + (1.0 - y) / d);
            r * r
        })
        .sum::<f64>()
        / d;
    (y, mse.sqrt())
}

/// For a fixed channel and reference input ψ₀ with conjugate spectrum p:
/// draws `trials` random inputs, fits each output spectrum q to the
/// interpolation y·p + (1-y)/D in the uniform norm, and reports the
/// fraction of fits with y* ≥ y₀.
pub fn near_event_experiment(
    ch: &RandomUnitaryChannel,
    psi0: &PureState,
    y0: f64,
    trials: usize,
    rng: &RngStream,
) -> Result<NearEventReport> {
    if psi0.dim() != ch.dim() {
        return Err(Error::DimensionMismatch {
            expected: ch.dim(),
            actual: psi0.dim(),
        });
    }
    if trials == 0 {
        return Err(Error::InvalidArgument("trials must be >= 1".into()));
    }
    let p_spec = eigenvalues(&ch.conjugate_apply(psi0)?)?;
    let fits: Result<Vec<(f64, f64)>> = (0..trials)
        .into_par_iter()
        .map(|t| {
            let chi = random_pure_state(ch.dim(), &rng.substream(t as u64))?;
            let q_spec = eigenvalues(&ch.conjugate_apply(&chi)?)?;
            Ok(fit_interpolation_minmax(&q_spec, &p_spec))
        })
        .collect();
    let fits = fits?;
    let fitted_y: Vec<f64> = fits.iter().map(|f| f.0).collect();
    let residuals: Vec<f64> = fits.iter().map(|f| f.1).collect();
    let fraction_above_y0 =
        fitted_y.iter().filter(|&&y| y >= y0).count() as f64 / trials as f64;
    Ok(NearEventReport {
        trials,
        fitted_y,
        residuals,
        fraction_above_y0,
    })
}
