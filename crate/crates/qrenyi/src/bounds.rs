//! Closed-form additivity bounds, the entropy-deficit rate functions, and
//! the critical exponent p₀.
//!
//! For a mixed-unitary channel with weights w and 0 < p < 1, the output of
//! E ⊗ E̅ at the maximally entangled input is a mixture whose spectrum is
//! majorized by the mixing weights; Schur concavity of H_p then gives
//!
//!   H_p((E ⊗ E̅)(|Φ⟩⟨Φ|)) ≤ ln((Σᵢwᵢ²)^p + Σ_{i≠j}(wᵢwⱼ)^p)/(1-p)
//!                         ≤ 2 ln D + ln(1 - D⁻¹ + D^{p-2})/(1-p),
//!
//! the second step by Hölder, with equality at uniform weights.

use crate::error::{Error, Result};
use crate::quantum::{Spectrum, WeightVector};

/// Maximizer data of h(y) = 2y²/(-ln(1-y)) and the derived exponent
/// p₀ = (1 - √(1-h₀))/2 bounding the proven non-additivity window
/// (0, p₀) ∪ (1-p₀, 1).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CriticalConstants {
    pub y0: f64,
    pub h0: f64,
    pub p0: f64,
}

fn check_p_open_unit(p: f64) -> Result<()> {
    if !(p > 0.0 && p < 1.0) {
        return Err(Error::OutOfRange {
            name: "p",
            value: p,
            range: "(0, 1)",
        });
    }
    Ok(())
}

/// Mixture-spectrum bound ln((Σᵢwᵢ²)^p + Σ_{i≠j}(wᵢwⱼ)^p)/(1-p).
pub fn mixture_bound(w: &WeightVector, p: f64) -> Result<f64> {
    check_p_open_unit(p)?;
    let ws = w.weights();
    let sum_sq: f64 = ws.iter().map(|x| x * x).sum();
    let sum_p: f64 = ws.iter().map(|x| x.powf(p)).sum();
    let sum_2p: f64 = ws.iter().map(|x| x.powf(2.0 * p)).sum();
    // Σ_{i≠j}(wᵢwⱼ)^p = (Σᵢwᵢ^p)² − Σᵢwᵢ^{2p}.
    let off_diagonal = sum_p * sum_p - sum_2p;
    Ok((sum_sq.powf(p) + off_diagonal).ln() / (1.0 - p))
}

/// Weight-free bound 2 ln D + ln(1 - D⁻¹ + D^{p-2})/(1-p).
pub fn lemma1_bound(d: usize, p: f64) -> Result<f64> {
    if d == 0 {
        return Err(Error::InvalidArgument("D must be >= 1".into()));
    }
    check_p_open_unit(p)?;
    let df = d as f64;
    Ok(2.0 * df.ln() + (1.0 - 1.0 / df + df.powf(p - 2.0)).ln() / (1.0 - p))
}

/// h(y) = 2y²/(-ln(1-y)), positive on (0,1).
///
/// The sign convention divides by -ln(1-y); the raw ratio 2y²/ln(1-y) is
/// negative on the whole interval and cannot attain the positive maximum
/// h₀ ≈ 0.8145 that defines p₀.
pub fn h(y: f64) -> Result<f64> {
    if !(y > 0.0 && y < 1.0) {
        return Err(Error::OutOfRange {
            name: "y",
            value: y,
            range: "(0, 1)",
        });
    }
    Ok(2.0 * y * y / (-(-y).ln_1p()))
}

/// Locates the maximum of [`h`] by a 10⁴-point grid followed by
/// golden-section refinement to interval width 1e-12, and derives
/// p₀ = (1 - √(1-h₀))/2.
pub fn find_critical() -> CriticalConstants {
    const GRID: usize = 10_000;
    let eval = |y: f64| h(y).expect("grid stays inside (0,1)");

    let mut best_i = 1;
    let mut best_v = f64::NEG_INFINITY;
    let mut values = Vec::with_capacity(GRID);
    for i in 1..GRID {
        let y = i as f64 / GRID as f64;
        let v = eval(y);
        values.push(v);
        if v > best_v {
            best_v = v;
            best_i = i;
        }
    }
    // The discrete differences change sign exactly once, so the bracketing
    // interval around the grid argmax contains the global maximum.
    debug_assert_eq!(
        values
            .windows(2)
            .map(|w| w[1] - w[0])
            .collect::<Vec<_>>()
            .windows(2)
            .filter(|d| d[0] > 0.0 && d[1] <= 0.0)
            .count(),
        1
    );

    let mut lo = (best_i.saturating_sub(1)).max(1) as f64 / GRID as f64;
    let mut hi = ((best_i + 1).min(GRID - 1)) as f64 / GRID as f64;
    let inv_phi = 0.5 * (5.0_f64.sqrt() - 1.0);
    let mut x1 = hi - inv_phi * (hi - lo);
    let mut x2 = lo + inv_phi * (hi - lo);
    let mut f1 = eval(x1);
    let mut f2 = eval(x2);
    while hi - lo > 1e-12 {
        if f1 < f2 {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + inv_phi * (hi - lo);
            f2 = eval(x2);
        } else {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - inv_phi * (hi - lo);
            f1 = eval(x1);
        }
    }
    let y0 = 0.5 * (lo + hi);
    let h0 = eval(y0);
    let p0 = 0.5 * (1.0 - (1.0 - h0).sqrt());
    CriticalConstants { y0, h0, p0 }
}

/// True iff p lies in the proven non-additivity window
/// (0, p₀) ∪ (1-p₀, 1).
pub fn in_violation_window(p: f64, c: &CriticalConstants) -> bool {
    (p > 0.0 && p < c.p0) || (p > 1.0 - c.p0 && p < 1.0)
}

/// Entropy deficit ΔS solving (D^{1-p} - ΔS)² = (D² - D + D^p) D^{-2p},
/// i.e. the deficit below the flat-output value at which the bound
/// ln(D^{1-p} - ΔS)·2/(1-p) meets [`lemma1_bound`].
pub fn deltas_threshold(d: usize, p: f64) -> Result<f64> {
    if d < 2 {
        return Err(Error::InvalidArgument("D must be >= 2".into()));
    }
    check_p_open_unit(p)?;
    let df = d as f64;
    Ok(df.powf(1.0 - p) - df.powf(-p) * (df * df - df + df.powf(p)).sqrt())
}

/// Leading-order squared eigenvalue deviation Δ = 2 D^p ΔS / (p(1-p))
/// matching an entropy deficit ΔS.
pub fn delta_from_deltas(d: usize, p: f64, ds: f64) -> Result<f64> {
    if d == 0 {
        return Err(Error::InvalidArgument("D must be >= 1".into()));
    }
    check_p_open_unit(p)?;
    if !(ds >= 0.0) {
        return Err(Error::OutOfRange {
            name: "dS",
            value: ds,
            range: "[0, inf)",
        });
    }
    Ok(2.0 * (d as f64).powf(p) * ds / (p * (1.0 - p)))
}

/// Per-(N-D) exponential rate D^p ΔS / (p(1-p)) of the entropy-deficit
/// density exp(-(N-D) · rate).
pub fn deficit_rate(p: f64, d: usize, ds: f64) -> Result<f64> {
    Ok(0.5 * delta_from_deltas(d, p, ds)?)
}

/// Log of the non-constant factor of the eigenvalue joint density,
/// (N-D) Σᵢ (ln(D qᵢ) + 1 - D qᵢ).
///
/// The overall O(N)^O(D²) normalization is not computed; the value is only
/// meaningful in ratios or rank comparisons. Zero eigenvalues yield -inf.
pub fn log_density_exponent(q: &Spectrum, n: usize, d: usize) -> Result<f64> {
    if q.len() != d {
        return Err(Error::DimensionMismatch {
            expected: d,
            actual: q.len(),
        });
    }
    if n <= d {
        return Err(Error::InvalidArgument(format!(
            "need N > D, got N = {n}, D = {d}"
        )));
    }
    let sum = q.sum();
    if (sum - 1.0).abs() > crate::tol::SPECTRUM_SUM_TOL {
        return Err(Error::SpectrumNotNormalized { sum });
    }
    let df = d as f64;
    let mut acc = 0.0;
    for &qi in q.values() {
        if qi <= 0.0 {
            return Ok(f64::NEG_INFINITY);
        }
        acc += (df * qi).ln() + 1.0 - df * qi;
    }
    Ok((n - d) as f64 * acc)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quantum::{sample_weights, RngStream};
    use approx::assert_relative_eq;

    // Frozen reference values, evaluated independently at 40-digit precision
    // (mpmath) from the defining formulas; the critical constants come from
    // the stationarity condition -2 ln(1-y) = y/(1-y) refined by findroot.
    const LEMMA1_D2_P05: f64 = 1.0695999934791407;
    const H_AT_HALF: f64 = 0.7213475204444817;
    const Y0_ORACLE: f64 = 0.7153318629591615;
    const H0_ORACLE: f64 = 0.8145287551781475;
    const P0_ORACLE: f64 = 0.2846681370408385;
    const DELTAS_D2_P05: f64 = 0.10765059749671852;
    const DELTA_D2_P05_DS01: f64 = 1.131370849898476;
    const RATE_P05_D2_DS01: f64 = 0.565685424949238;
    const LOGDENS_06_04_N10_D2: f64 = -0.32657595616204104;

    #[test]
    fn lemma1_bound_values() {
        for p in [0.1, 0.5, 0.9] {
            assert_eq!(lemma1_bound(1, p).unwrap(), 0.0);
        }
        assert_relative_eq!(
            lemma1_bound(2, 0.5).unwrap(),
            LEMMA1_D2_P05,
            epsilon = 1e-12
        );
        // Strictly below the flat-output value 2 ln D for p < 1.
        for d in [2usize, 4, 8, 16, 32, 64] {
            let mut p = 0.05;
            while p < 0.96 {
                assert!(lemma1_bound(d, p).unwrap() < 2.0 * (d as f64).ln());
                p += 0.05;
            }
        }
        assert!(lemma1_bound(3, 1.2).is_err());
        assert!(lemma1_bound(3, 0.0).is_err());
    }

    #[test]
    fn mixture_bound_matches_lemma1_at_uniform_weights() {
        for d in 2..=8 {
            let w = WeightVector::uniform(d);
            for p in [0.1, 0.2855, 0.5, 0.9] {
                let m = mixture_bound(&w, p).unwrap();
                let l = lemma1_bound(d, p).unwrap();
                assert!((m - l).abs() <= 1e-12, "D={d}, p={p}: {m} vs {l}");
            }
        }
        let single = WeightVector::uniform(1);
        assert_eq!(mixture_bound(&single, 0.5).unwrap(), 0.0);
    }

    #[test]
    fn mixture_bound_never_exceeds_lemma1() {
        let stream = RngStream::new(71);
        let mut k = 0u64;
        for d in 2..=6 {
            for _ in 0..20 {
                let w = sample_weights(d, 3, &stream.substream(k)).unwrap();
                k += 1;
                for p in [0.1, 0.5, 0.9] {
                    let m = mixture_bound(&w, p).unwrap();
                    let l = lemma1_bound(d, p).unwrap();
                    assert!(m <= l + 1e-12, "D={d}, p={p}: {m} > {l}");
                }
                // Strict inequality away from uniform weights.
                let dev = w
                    .weights()
                    .iter()
                    .map(|x| (x - 1.0 / d as f64).abs())
                    .fold(0.0, f64::max);
                if dev > 1e-3 {
                    assert!(mixture_bound(&w, 0.5).unwrap() < lemma1_bound(d, 0.5).unwrap());
                }
            }
        }
    }

    #[test]
    fn h_values_and_window() {
        assert!(h(1e-6).unwrap() < 3e-6);
        assert_relative_eq!(h(0.5).unwrap(), H_AT_HALF, epsilon = 1e-12);
        // Quoted rounded maximum location gives h ≈ 0.8145.
        assert!((h(0.7106).unwrap() - 0.8145).abs() < 1e-3);
        assert!(h(0.0).is_err());
        assert!(h(1.0).is_err());
    }

    #[test]
    fn critical_constants_match_fine_grid_oracle() {
        let c = find_critical();
        assert!((c.y0 - Y0_ORACLE).abs() <= 1e-6, "y0 = {}", c.y0);
        assert!((c.h0 - H0_ORACLE).abs() <= 1e-6, "h0 = {}", c.h0);
        assert!((c.p0 - P0_ORACLE).abs() <= 1e-6, "p0 = {}", c.p0);
        // Rounded literature values.
        assert!((c.p0 - 0.2855).abs() <= 2e-3);
        assert!((c.h0 - 0.8145).abs() <= 1e-3);
        assert!((c.y0 - 0.7106).abs() <= 6e-3);
        // Internal consistency of the derived exponent.
        assert!((c.p0 - 0.5 * (1.0 - (1.0 - c.h0).sqrt())).abs() <= 1e-12);
        assert!(c.p0 < 0.5);
    }

    #[test]
    fn h_is_unimodal_on_coarse_grid() {
        let grid = 10_000;
        let values: Vec<f64> = (1..grid)
            .map(|i| h(i as f64 / grid as f64).unwrap())
            .collect();
        let mut sign_changes = 0;
        for w in values.windows(3) {
            let d0 = w[1] - w[0];
            let d1 = w[2] - w[1];
            if d0 > 0.0 && d1 <= 0.0 {
                sign_changes += 1;
            }
            if d0 <= 0.0 && d1 > 0.0 {
                sign_changes += 10; // any re-increase disproves unimodality
            }
        }
        assert_eq!(sign_changes, 1);
    }

    #[test]
    fn violation_window_is_symmetric() {
        let c = find_critical();
        assert!(in_violation_window(0.1, &c));
        assert!(!in_violation_window(0.5, &c));
        assert!(in_violation_window(0.9, &c));
        assert!(!in_violation_window(c.p0, &c));
        for p in [0.01, 0.15, 0.3, 0.45] {
            assert_eq!(
                in_violation_window(p, &c),
                in_violation_window(1.0 - p, &c)
            );
        }
    }

    #[test]
    fn deltas_threshold_values_and_consistency() {
        assert_relative_eq!(
            deltas_threshold(2, 0.5).unwrap(),
            DELTAS_D2_P05,
            epsilon = 1e-12
        );
        for d in [2usize, 4, 8, 16, 32, 64] {
            let mut p = 0.05;
            while p < 0.96 {
                let ds = deltas_threshold(d, p).unwrap();
                assert!(ds > 0.0, "D={d}, p={p}");
                // 2 ln(D^{1-p} - ΔS)/(1-p) recovers the weight-free bound.
                let recovered = 2.0 * ((d as f64).powf(1.0 - p) - ds).ln() / (1.0 - p);
                assert!((recovered - lemma1_bound(d, p).unwrap()).abs() <= 1e-10);
                p += 0.05;
            }
        }
        assert!(deltas_threshold(1, 0.5).is_err());
    }

    #[test]
    fn delta_and_rate_formulas() {
        assert_eq!(delta_from_deltas(2, 0.5, 0.0).unwrap(), 0.0);
        assert_relative_eq!(
            delta_from_deltas(2, 0.5, 0.1).unwrap(),
            DELTA_D2_P05_DS01,
            epsilon = 1e-12
        );
        // Linear in dS.
        let once = delta_from_deltas(3, 0.3, 0.05).unwrap();
        let twice = delta_from_deltas(3, 0.3, 0.1).unwrap();
        assert_relative_eq!(twice, 2.0 * once, epsilon = 1e-14);

        assert_eq!(deficit_rate(0.5, 2, 0.0).unwrap(), 0.0);
        assert_relative_eq!(
            deficit_rate(0.5, 2, 0.1).unwrap(),
            RATE_P05_D2_DS01,
            epsilon = 1e-12
        );
        assert!(deficit_rate(0.01, 2, 0.1).unwrap() > deficit_rate(0.5, 2, 0.1).unwrap());
        assert!(delta_from_deltas(2, 0.5, -0.1).is_err());
    }

    #[test]
    fn log_density_exponent_values() {
        let uniform = Spectrum::new(vec![0.25; 4]).unwrap();
        assert!(log_density_exponent(&uniform, 16, 4).unwrap().abs() <= 1e-12);

        let q = Spectrum::new(vec![0.6, 0.4]).unwrap();
        assert_relative_eq!(
            log_density_exponent(&q, 10, 2).unwrap(),
            LOGDENS_06_04_N10_D2,
            epsilon = 1e-12
        );
        // ln x ≤ x - 1 with equality only at x = 1: non-uniform q is negative.
        assert!(log_density_exponent(&q, 10, 2).unwrap() < 0.0);

        let degenerate = Spectrum::new(vec![1.0, 0.0]).unwrap();
        assert_eq!(
            log_density_exponent(&degenerate, 10, 2).unwrap(),
            f64::NEG_INFINITY
        );
        assert!(log_density_exponent(&q, 2, 2).is_err());
    }
}
