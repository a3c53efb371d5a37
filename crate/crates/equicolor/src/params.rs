//! Derivation of every scalar the coloring pipeline needs from `(k, a, eps)`:
//! the palette size `t`, the slack `gamma`, the sampling probabilities
//! `(p, q)`, and the thresholds used by the four partial-coloring conditions.
//!
//! `t` is chosen as the largest integer in the window
//! `[k/((1+eps^2/4) a ln k), k/((1+eps^2/8) a ln k)]` and `gamma` is
//! back-solved as `k/(t a ln k) - 1`, so `t = k/((1+gamma) a ln k)` holds
//! exactly and `p*t + q = 1` is an identity rather than an approximation.

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum ParamsError {
    #[error("invalid input: {0}")]
    InvalidInput(&'static str),
    #[error("no integer palette size in [{lo}, {hi}]: k too small for this eps")]
    NoIntegerInWindow { lo: f64, hi: f64 },
    #[error("gamma = {gamma} is not positive: t leaves no uncolored mass")]
    GammaNonPositive { gamma: f64 },
    #[error("gamma = {gamma} outside [{lo}, {hi}]")]
    GammaOutsideWindow { gamma: f64, lo: f64, hi: f64 },
    #[error("t - s = {t} - {s} leaves no classes after rebalancing")]
    SacrificeExceedsPalette { t: usize, s: usize },
    #[error("t - s = {t_minus_s} does not exceed the color-count target {target}: k too small")]
    ColorCountShortfall { t_minus_s: isize, target: f64 },
}

/// Every derived scalar of the coloring setup. Thresholds are kept as exact
/// reals; later modules compare integer counts against them directly, never
/// against rounded values.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ColoringParams {
    /// Edge cardinality of the target hypergraph.
    pub k: usize,
    /// Degree exponent: inputs are assumed to satisfy max degree <= k^a.
    pub a: f64,
    /// Target slack; absent on the window-waived override path.
    pub eps: Option<f64>,
    /// Back-solved slack, `k/(t a ln k) - 1`.
    pub gamma: f64,
    /// Palette size.
    pub t: usize,
    /// Probability of each individual color in the partial sampling.
    pub p: f64,
    /// Probability of staying uncolored, `1 - p t = gamma/(2(1+gamma))`.
    pub q: f64,
    /// Condition-3 threshold, `ceil(k^(1 - a gamma / 4))`.
    pub z: usize,
    /// Classes sacrificed while rebalancing, `ceil(sqrt(gamma) k/(a ln k))`.
    pub s: usize,
    /// Condition-1 floor on uncolored vertices per edge, `k gamma / 5`.
    pub thresh_uncolored: f64,
    /// Condition-2 cap on missing colors per edge, `ceil(10/gamma)`.
    pub thresh_missing: usize,
    /// Cap on per-vertex support size, `ceil(10/gamma) * (z - 1)`.
    pub support_cap: usize,
    /// Finite-branch cap on below-floor classes, `3 k^(1 - gamma^2/33)`.
    pub finite_r_cap: f64,
    /// True when the `[eps^2/8, eps^2/4]` window check was skipped.
    pub window_waived: bool,
}

impl ColoringParams {
    /// Condition-4 class-size floor for an instance with `n` vertices:
    /// `n (1 + gamma/4) a ln k / k`.
    pub fn class_floor(&self, n: usize) -> f64 {
        n as f64 * (1.0 + self.gamma / 4.0) * self.a * (self.k as f64).ln() / self.k as f64
    }

    /// The threshold separating the finite branch (`n < 2 k ln k`) from the
    /// general one.
    pub fn finite_cutoff(&self) -> f64 {
        2.0 * self.k as f64 * (self.k as f64).ln()
    }

    /// Replaces `s`, marking the window as waived. Desk-scale escape hatch:
    /// at small `k` the derived `s` can swallow the whole palette.
    pub fn with_s(mut self, s: usize) -> Self {
        self.s = s;
        self.window_waived = true;
        self
    }

    /// Replaces `z` and recomputes the support cap that depends on it.
    pub fn with_z(mut self, z: usize) -> Self {
        self.z = z;
        self.support_cap = self.thresh_missing * (z - 1);
        self.window_waived = true;
        self
    }

    fn from_t(k: usize, a: f64, eps: Option<f64>, t: usize, waived: bool) -> Result<Self, ParamsError> {
        let kf = k as f64;
        let ln_k = kf.ln();
        let gamma = kf / (t as f64 * a * ln_k) - 1.0;
        if gamma <= 0.0 {
            return Err(ParamsError::GammaNonPositive { gamma });
        }
        let p = (1.0 + gamma / 2.0) * a * ln_k / kf;
        let q = 1.0 - p * t as f64;
        // k^x is positive for every real x, so z >= 1; the max guards the
        // f64 underflow to zero at very negative exponents.
        let z = kf.powf(1.0 - a * gamma / 4.0).ceil().max(1.0) as usize;
        let s = (gamma.sqrt() * kf / (a * ln_k)).ceil() as usize;
        let thresh_missing = (10.0 / gamma).ceil() as usize;
        let params = ColoringParams {
            k,
            a,
            eps,
            gamma,
            t,
            p,
            q,
            z,
            s,
            thresh_uncolored: kf * gamma / 5.0,
            thresh_missing,
            support_cap: thresh_missing * (z - 1),
            finite_r_cap: 3.0 * kf.powf(1.0 - gamma * gamma / 33.0),
            window_waived: waived,
        };
        debug_assert!((params.p * params.t as f64 + params.q - 1.0).abs() < 1e-12);
        debug_assert!((params.q - gamma / (2.0 * (1.0 + gamma))).abs() < 1e-12);
        Ok(params)
    }
}

fn check_inputs(k: usize, a: f64, eps: f64) -> Result<(), ParamsError> {
    if k < 3 {
        return Err(ParamsError::InvalidInput("k must be at least 3"));
    }
    if a.is_nan() || a < 1.0 {
        return Err(ParamsError::InvalidInput("a must be at least 1"));
    }
    if !(eps > 0.0 && eps < 1.0) {
        return Err(ParamsError::InvalidInput("eps must lie in (0, 1)"));
    }
    Ok(())
}

/// The window of admissible palette sizes for `(k, a, eps)`.
fn t_window(k: usize, a: f64, eps: f64) -> (f64, f64) {
    let ln_k = (k as f64).ln();
    let lo = k as f64 / ((1.0 + eps * eps / 4.0) * a * ln_k);
    let hi = k as f64 / ((1.0 + eps * eps / 8.0) * a * ln_k);
    (lo, hi)
}

/// Derives all parameters for `(k, a, eps)`, choosing the largest integer
/// palette size in the admissible window. Fails when the window contains no
/// integer, or when the resulting `t - s` cannot deliver more than
/// `(1 - eps) k / (a ln k)` classes; both mean k is too small for this eps.
pub fn derive_params(k: usize, a: f64, eps: f64) -> Result<ColoringParams, ParamsError> {
    check_inputs(k, a, eps)?;
    let (lo, hi) = t_window(k, a, eps);
    let t = hi.floor();
    if t < lo || t < 1.0 {
        return Err(ParamsError::NoIntegerInWindow { lo, hi });
    }
    finish_derived(k, a, eps, t as usize)
}

/// As [`derive_params`] but with the palette size forced by the caller; the
/// window check still applies to the back-solved gamma.
pub fn derive_params_forced(k: usize, a: f64, eps: f64, t: usize) -> Result<ColoringParams, ParamsError> {
    check_inputs(k, a, eps)?;
    if t < 1 {
        return Err(ParamsError::InvalidInput("t must be at least 1"));
    }
    finish_derived(k, a, eps, t)
}

fn finish_derived(k: usize, a: f64, eps: f64, t: usize) -> Result<ColoringParams, ParamsError> {
    let params = ColoringParams::from_t(k, a, Some(eps), t, false)?;
    let (w_lo, w_hi) = (eps * eps / 8.0, eps * eps / 4.0);
    // Tiny slack absorbs floating-point wiggle at the window endpoints.
    let tol = 1e-9 * w_hi;
    if params.gamma < w_lo - tol || params.gamma > w_hi + tol {
        return Err(ParamsError::GammaOutsideWindow {
            gamma: params.gamma,
            lo: w_lo,
            hi: w_hi,
        });
    }
    if params.t <= params.s {
        return Err(ParamsError::SacrificeExceedsPalette {
            t: params.t,
            s: params.s,
        });
    }
    let target = (1.0 - eps) * k as f64 / (a * (k as f64).ln());
    let t_minus_s = params.t as isize - params.s as isize;
    if t_minus_s as f64 <= target {
        return Err(ParamsError::ColorCountShortfall { t_minus_s, target });
    }
    Ok(params)
}

/// Derives parameters from an explicit palette size with the eps-window check
/// waived entirely. This is the desk-scale path: small k cannot satisfy the
/// window at any eps, but the pipeline is still well defined for any `t`
/// with positive back-solved gamma. The result is flagged `window_waived`.
pub fn params_with_override(k: usize, a: f64, t: usize) -> Result<ColoringParams, ParamsError> {
    if k < 2 {
        return Err(ParamsError::InvalidInput("k must be at least 2"));
    }
    if a.is_nan() || a < 1.0 {
        return Err(ParamsError::InvalidInput("a must be at least 1"));
    }
    if t < 1 {
        return Err(ParamsError::InvalidInput("t must be at least 1"));
    }
    ColoringParams::from_t(k, a, None, t, true)
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Independent recomputation of the closed forms, organized differently
    /// from the implementation: the palette size is found by scanning all
    /// integers instead of flooring the upper endpoint.
    pub(crate) fn oracle_recompute(k: usize, a: f64, eps: f64) -> Option<(usize, f64, f64, f64, usize, usize)> {
        let kf = k as f64;
        let ln_k = kf.ln();
        let lo = kf / ((1.0 + eps * eps / 4.0) * a * ln_k);
        let hi = kf / ((1.0 + eps * eps / 8.0) * a * ln_k);
        let t = (1..=k).filter(|&i| i as f64 >= lo && i as f64 <= hi).max()?;
        let gamma = kf / (t as f64 * a * ln_k) - 1.0;
        let p = (1.0 + gamma / 2.0) * a * ln_k / kf;
        let q = gamma / (2.0 * (1.0 + gamma));
        let z = ((1.0 - a * gamma / 4.0) * ln_k).exp().ceil() as usize;
        let s = (gamma.sqrt() * kf / (a * ln_k)).ceil() as usize;
        Some((t, gamma, p, q, z, s))
    }

    #[test]
    fn derive_k1000_matches_oracle() {
        let params = derive_params(1000, 1.0, 0.5).unwrap();
        let (t, gamma, p, q, z, s) = oracle_recompute(1000, 1.0, 0.5).unwrap();
        assert_eq!(params.t, 140);
        assert_eq!(params.t, t);
        assert_eq!(params.z, z);
        assert_eq!(params.s, s);
        assert!((params.gamma - gamma).abs() <= 1e-9);
        assert!((params.p - p).abs() <= 1e-9);
        assert!((params.q - q).abs() <= 1e-9);
        assert!((params.p * params.t as f64 + params.q - 1.0).abs() <= 1e-12);
    }

    #[test]
    fn derive_k20_eps01_has_no_integer() {
        // Both endpoints fall strictly between 6 and 7.
        let err = derive_params(20, 1.0, 0.1).unwrap_err();
        match err {
            ParamsError::NoIntegerInWindow { lo, hi } => {
                assert!(lo > 6.0 && hi < 7.0, "window [{lo}, {hi}]");
            }
            other => panic!("unexpected error {other:?}"),
        }
    }

    #[test]
    fn forced_t_outside_window_rejected() {
        // t = k forces gamma = 1/(a ln k) - 1 < 0 for k >= 3.
        assert!(matches!(
            derive_params_forced(1000, 1.0, 0.5, 1000),
            Err(ParamsError::GammaNonPositive { .. })
        ));
        // t = 150 gives gamma ~ -0.035 < 0; t = 120 gives gamma ~ 0.206,
        // far above eps^2/4 = 0.0625.
        assert!(matches!(
            derive_params_forced(1000, 1.0, 0.5, 120),
            Err(ParamsError::GammaOutsideWindow { .. })
        ));
    }

    #[test]
    fn override_k50_t8() {
        let params = params_with_override(50, 1.0, 8).unwrap();
        let expect = 50.0 / (8.0 * 50f64.ln()) - 1.0;
        assert!((params.gamma - expect).abs() < 1e-12);
        assert!((params.gamma - 0.5975).abs() < 1e-3);
        assert!((params.q - params.gamma / (2.0 * (1.0 + params.gamma))).abs() < 1e-12);
        assert!(params.window_waived);
    }

    #[test]
    fn override_k50_t13_rejected() {
        assert!(matches!(
            params_with_override(50, 1.0, 13),
            Err(ParamsError::GammaNonPositive { .. })
        ));
    }

    #[test]
    fn override_single_color_palette() {
        let params = params_with_override(50, 1.0, 1).unwrap();
        let ln50 = 50f64.ln();
        assert!((params.p - (1.0 + params.gamma / 2.0) * ln50 / 50.0).abs() < 1e-12);
        assert!((params.q - (1.0 - params.p)).abs() < 1e-12);
    }

    #[test]
    fn t_monotone_in_k() {
        let mut last = 0usize;
        for k in 100..3000 {
            if let Ok(params) = derive_params(k, 1.0, 0.5) {
                assert!(params.t >= last, "t regressed at k={k}");
                last = params.t;
            }
        }
        assert!(last > 0);
    }

    #[test]
    fn color_count_beats_target_when_derivation_succeeds() {
        for k in [200usize, 500, 1000, 5000, 20000] {
            for eps in [0.3, 0.5, 0.7, 0.9] {
                for a in [1.0, 1.5, 2.0] {
                    if let Ok(params) = derive_params(k, a, eps) {
                        let target = (1.0 - eps) * k as f64 / (a * (k as f64).ln());
                        assert!((params.t - params.s) as f64 > target, "k={k} eps={eps} a={a}");
                    }
                }
            }
        }
    }

    #[test]
    fn class_floor_scales_with_n() {
        let params = params_with_override(32, 1.0, 8).unwrap();
        let f1 = params.class_floor(4096);
        let f2 = params.class_floor(8192);
        assert!((f2 - 2.0 * f1).abs() < 1e-9);
    }
}
