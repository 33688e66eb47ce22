//! Theoretical convergence-rate calculators, the deterministic-target
//! toolkit (triangle function and its Fourier transform), and empirical
//! Gram eigen-decay estimation.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::designs::Design;
use crate::kernels::Kernel;
use crate::regress::{self, RegressError};

#[derive(Debug, Error)]
pub enum RateError {
    #[error("invalid rate specification: {0}")]
    Invalid(String),
    #[error(transparent)]
    Regress(#[from] RegressError),
}

/// Smoothness relation between the true exponent `m0` and the imposed `m`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Regime {
    Oversmoothed,
    WellSpecified,
    Undersmoothed,
}

/// A (true smoothness, imposed smoothness, dimension) triple.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RateSpec {
    pub m0: f64,
    pub m: f64,
    pub d: usize,
    pub regime: Regime,
}

impl RateSpec {
    pub fn new(m0: f64, m: f64, d: usize) -> Result<Self, RateError> {
        let half_d = d as f64 / 2.0;
        if d == 0 {
            return Err(RateError::Invalid("dimension must be >= 1".into()));
        }
        if m0.is_nan() || m.is_nan() || m0 <= half_d || m <= half_d {
            return Err(RateError::Invalid(format!(
                "smoothness exponents must exceed d/2 = {half_d}, got m0 = {m0}, m = {m}"
            )));
        }
        let regime = if m > m0 {
            Regime::Oversmoothed
        } else if m < m0 {
            Regime::Undersmoothed
        } else {
            Regime::WellSpecified
        };
        Ok(Self { m0, m, d, regime })
    }
}

/// Predicted log-log slope of the mean squared L2 error of Gaussian process
/// regression: `(2 min(m0, m) - d) / (2 min(m0, m))`.
pub fn theoretical_gp_slope(spec: &RateSpec) -> f64 {
    let eff = spec.m0.min(spec.m);
    (2.0 * eff - spec.d as f64) / (2.0 * eff)
}

/// A kernel ridge regression L2-error rate exponent.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KrrRate {
    /// `|f - fhat| = O_P(n^-exponent)` (times a sub-polynomial factor when
    /// flagged).
    pub exponent: f64,
    /// Whether the rate carries a `Q(n)` factor for targets outside
    /// `H^{m0(f)}`; the strongly undersmoothed branch does not.
    pub q_factor_applies: bool,
}

/// L2 rate exponent for kernel ridge regression with target smoothness
/// `m0f` and imposed smoothness `m`:
/// `m0f / (2 m0f + d)` when `m >= m0f / 2`, `2m / (4m + d)` when
/// `d/2 < m < m0f / 2`.
pub fn theoretical_krr_rate(m0f: f64, m: f64, d: usize) -> Result<KrrRate, RateError> {
    let half_d = d as f64 / 2.0;
    if m0f.is_nan() || m0f <= half_d {
        return Err(RateError::Invalid(format!(
            "target smoothness must exceed d/2, got {m0f}"
        )));
    }
    if m.is_nan() || m <= half_d {
        return Err(RateError::Invalid(format!(
            "imposed smoothness must exceed d/2, got {m}"
        )));
    }
    let d = d as f64;
    if m >= m0f / 2.0 {
        Ok(KrrRate {
            exponent: m0f / (2.0 * m0f + d),
            q_factor_applies: true,
        })
    } else {
        Ok(KrrRate {
            exponent: 2.0 * m / (4.0 * m + d),
            q_factor_applies: false,
        })
    }
}

/// Which deterministic target function is being recovered.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TargetKind {
    Triangle,
    Zero,
}

/// A deterministic regression target on `[0, 1]` with known smoothness.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DeterministicTarget {
    pub kind: TargetKind,
    pub smoothness: f64,
    pub in_sobolev_at_smoothness: bool,
}

impl DeterministicTarget {
    pub fn eval(&self, x: f64) -> f64 {
        match self.kind {
            // hat function on [-1, 1] mapped onto [0, 1] by t = 2x - 1
            TargetKind::Triangle => (1.0 - (2.0 * x - 1.0).abs()).max(0.0),
            TargetKind::Zero => 0.0,
        }
    }

    pub fn name(&self) -> &'static str {
        match self.kind {
            TargetKind::Triangle => "triangle",
            TargetKind::Zero => "zero",
        }
    }
}

/// The triangle target: smoothness 3/2, not attained.
pub fn triangle_target() -> DeterministicTarget {
    DeterministicTarget {
        kind: TargetKind::Triangle,
        smoothness: 1.5,
        in_sobolev_at_smoothness: false,
    }
}

/// The identically-zero target (degenerate control case; any claimed
/// smoothness holds, slope checks are meaningless for it).
pub fn zero_target() -> DeterministicTarget {
    DeterministicTarget {
        kind: TargetKind::Zero,
        smoothness: f64::INFINITY,
        in_sobolev_at_smoothness: true,
    }
}

/// Fourier transform of the unit triangle on `[-1, 1]` under the normalized
/// convention: `4 sin^2(w/2) / (sqrt(2 pi) w^2)`, with the `w = 0` limit
/// `1 / sqrt(2 pi)`.
pub fn triangle_fourier(omega: f64) -> f64 {
    let c = (2.0 * std::f64::consts::PI).sqrt();
    if omega == 0.0 {
        return 1.0 / c;
    }
    let s = (omega / 2.0).sin();
    4.0 * s * s / (c * omega * omega)
}

/// OLS slope, intercept and R^2 of `ys` on `xs`.
///
/// A constant response is reported as slope 0 with R^2 = 1 (the fit is
/// exact).
pub(crate) fn ols(xs: &[f64], ys: &[f64]) -> (f64, f64, f64) {
    let n = xs.len() as f64;
    let mean_x = xs.iter().sum::<f64>() / n;
    let mean_y = ys.iter().sum::<f64>() / n;
    let mut sxx = 0.0;
    let mut sxy = 0.0;
    for (x, y) in xs.iter().zip(ys) {
        sxx += (x - mean_x) * (x - mean_x);
        sxy += (x - mean_x) * (y - mean_y);
    }
    let slope = if sxx > 0.0 { sxy / sxx } else { 0.0 };
    let intercept = mean_y - slope * mean_x;
    let mut ss_res = 0.0;
    let mut ss_tot = 0.0;
    for (x, y) in xs.iter().zip(ys) {
        let fitted = slope * x + intercept;
        ss_res += (y - fitted) * (y - fitted);
        ss_tot += (y - mean_y) * (y - mean_y);
    }
    let r2 = if ss_tot > 0.0 {
        (1.0 - ss_res / ss_tot).clamp(0.0, 1.0)
    } else {
        1.0
    };
    (slope, intercept, r2)
}

/// Fitted algebraic decay of the leading Gram eigenvalues.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EigenDecayEstimate {
    pub k_lo: usize,
    pub k_hi: usize,
    /// OLS slope of `log lambda_k` on `log k`; an algebraic decay
    /// `lambda_k ~ k^-p` shows up as slope `-p`.
    pub slope: f64,
    pub r2: f64,
}

/// Eigen-decay of `(1/n) Gram` over the index window `[k_lo, k_hi]`
/// (1-indexed, eigenvalues sorted descending).
pub fn estimate_eigendecay(
    kernel: &Kernel,
    design: &Design,
    k_lo: usize,
    k_hi: usize,
) -> Result<EigenDecayEstimate, RateError> {
    if k_lo < 2 || k_lo >= k_hi || k_hi > design.n() {
        return Err(RateError::Invalid(format!(
            "need 2 <= k_lo < k_hi <= n, got [{k_lo}, {k_hi}] with n = {}",
            design.n()
        )));
    }
    let gram = regress::gram_matrix(kernel, design)?;
    let scaled: DMatrix<f64> = gram / design.n() as f64;
    let mut eigenvalues: Vec<f64> = scaled.symmetric_eigen().eigenvalues.iter().copied().collect();
    eigenvalues.sort_by(|a, b| b.total_cmp(a));
    eigendecay_from_eigenvalues(&eigenvalues, k_lo, k_hi)
}

/// Decay fit on an explicit (descending) eigenvalue sequence.
pub fn eigendecay_from_eigenvalues(
    eigenvalues: &[f64],
    k_lo: usize,
    k_hi: usize,
) -> Result<EigenDecayEstimate, RateError> {
    if k_lo < 2 || k_lo >= k_hi || k_hi > eigenvalues.len() {
        return Err(RateError::Invalid(format!(
            "need 2 <= k_lo < k_hi <= len, got [{k_lo}, {k_hi}]"
        )));
    }
    let mut log_k = Vec::with_capacity(k_hi - k_lo + 1);
    let mut log_l = Vec::with_capacity(k_hi - k_lo + 1);
    for k in k_lo..=k_hi {
        let lambda = eigenvalues[k - 1];
        if lambda.is_nan() || lambda <= 0.0 {
            return Err(RateError::Invalid(format!(
                "eigenvalue {k} is not positive ({lambda}); window reaches numerical noise"
            )));
        }
        log_k.push((k as f64).ln());
        log_l.push(lambda.ln());
    }
    let (slope, _intercept, r2) = ols(&log_k, &log_l);
    Ok(EigenDecayEstimate {
        k_lo,
        k_hi,
        slope,
        r2,
    })
}
