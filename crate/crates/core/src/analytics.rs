//! Closed-form quantities: process parameters, expected degree trajectory,
//! error envelopes, tail-bound evaluators and the cover-size formulas.
//!
//! All logarithms are natural.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Default coefficient `c` in `k = floor(c * log(pn) / p)`.
pub const DEFAULT_K_COEF: f64 = 0.5;

/// Scale applied to `epsilon` to obtain the coefficient of the asymptotic
/// regime: `k = epsilon * 2^-10 * log(pn) / p`.
pub const ASYMPTOTIC_K_SCALE: f64 = 1.0 / 1024.0;

/// Parameters of one process configuration together with the derived
/// error quantities.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ParamSet {
    pub n: usize,
    pub p: f64,
    /// Coefficient `c` in `k = floor(c * log(pn) / p)`.
    pub k_coef: f64,
    /// Process length.
    pub k: usize,
    /// Initial error `4 log n * sqrt(log(pn)/(pn) + p)`.
    pub f0: f64,
    /// Codegree cap `4 p^2 n + 2^7 log n`.
    pub delta2: f64,
    /// Recorded when the coefficient was given as `epsilon * 2^-10`.
    pub epsilon: Option<f64>,
}

/// Degree and active-set envelopes at one step.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnvelopePoint {
    pub i: usize,
    pub d_tilde: f64,
    pub f_i: f64,
    pub lower: f64,
    pub upper: f64,
    pub active_lower: f64,
    pub active_upper: f64,
}

impl EnvelopePoint {
    #[inline]
    pub fn contains_degree(&self, d: f64) -> bool {
        self.lower <= d && d <= self.upper
    }

    #[inline]
    pub fn contains_active_size(&self, size: f64) -> bool {
        self.active_lower <= size && size <= self.active_upper
    }
}

/// Cover-size formulas and the lower bound they are compared against.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundFormulas {
    /// Sets per partition, `ceil(n / k)`.
    pub s_pdim: usize,
    /// Number of partitions, `ceil(c_eps * n log n / k)`.
    pub t_pdim: usize,
    /// Number of independent sets, `ceil(6 n^2 log n / k^2)`.
    pub t_theta1: usize,
    /// `pn log(1/p) / (5 log n)`.
    pub mrss_lower: f64,
    pub c_eps: f64,
}

/// Numerical sanity report for a parameter set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegimeCheck {
    /// `(log n)^(2+eps)/n <= p < n^-eps` with `eps < 2^-10`; only decidable
    /// when `epsilon` is recorded.
    pub in_asymptotic_range: bool,
    pub f_k: f64,
    pub f_k_below_one: bool,
    /// `delta2 < f_1 * d_tilde_1`.
    pub delta2_below_first_width: bool,
    pub warnings: Vec<String>,
}

impl ParamSet {
    /// Derives `k`, `f0` and `delta2` from `(n, p, k_coef)`.
    pub fn derive(n: usize, p: f64, k_coef: f64) -> Result<Self> {
        if n < 2 {
            return Err(Error::ParameterDomain(format!("n = {n} must be at least 2")));
        }
        if !(p > 0.0 && p < 1.0) {
            return Err(Error::ParameterDomain(format!("p = {p} must lie in (0, 1)")));
        }
        if !(k_coef > 0.0 && k_coef.is_finite()) {
            return Err(Error::ParameterDomain(format!("k_coef = {k_coef} must be positive")));
        }
        let nf = n as f64;
        let pn = p * nf;
        if pn <= 1.0 {
            return Err(Error::LogPnNonpositive { pn });
        }
        let log_pn = pn.ln();
        let raw = k_coef * log_pn / p;
        let k = raw.floor();
        if k < 1.0 {
            return Err(Error::DegenerateProcess { raw });
        }
        let log_n = nf.ln();
        Ok(ParamSet {
            n,
            p,
            k_coef,
            k: k as usize,
            f0: 4.0 * log_n * (log_pn / pn + p).sqrt(),
            delta2: 4.0 * p * p * nf + 128.0 * log_n,
            epsilon: None,
        })
    }

    /// Parameters with the asymptotic-regime coefficient `epsilon * 2^-10`.
    /// At desk scale this usually fails with [`Error::DegenerateProcess`].
    pub fn asymptotic(n: usize, p: f64, epsilon: f64) -> Result<Self> {
        if !(epsilon > 0.0 && epsilon < 1.0) {
            return Err(Error::ParameterDomain(format!("epsilon = {epsilon} must lie in (0, 1)")));
        }
        let mut ps = Self::derive(n, p, epsilon * ASYMPTOTIC_K_SCALE)?;
        ps.epsilon = Some(epsilon);
        Ok(ps)
    }

    /// Same parameters with the process length replaced by `k`.
    pub fn with_process_length(mut self, k: usize) -> Result<Self> {
        if k < 1 {
            return Err(Error::DegenerateProcess { raw: k as f64 });
        }
        self.k = k;
        Ok(self)
    }

    /// Multiplies `f0` (hence every `f_i`) and `delta2` by `factor`, to make
    /// the typicality checks non-vacuous at small `n`.
    pub fn rescaled(mut self, factor: f64) -> Result<Self> {
        if !(factor > 0.0 && factor.is_finite()) {
            return Err(Error::ParameterDomain(format!("scale factor {factor} must be positive")));
        }
        self.f0 *= factor;
        self.delta2 *= factor;
        Ok(self)
    }

    #[inline]
    pub fn pn(&self) -> f64 {
        self.p * self.n as f64
    }

    #[inline]
    pub fn log_n(&self) -> f64 {
        (self.n as f64).ln()
    }

    /// Per-step growth factor of the error, `(1 + 16p) / (1 - p)`.
    #[inline]
    pub fn growth_ratio(&self) -> f64 {
        (1.0 + 16.0 * self.p) / (1.0 - self.p)
    }

    /// `(1 - p)^i p n` for any `i`.
    #[inline]
    pub fn trajectory_degree(&self, i: usize) -> f64 {
        (i as f64 * (-self.p).ln_1p()).exp() * self.pn()
    }

    /// `((1 + 16p)/(1 - p))^i f0` for any `i`.
    #[inline]
    pub fn error_factor(&self, i: usize) -> f64 {
        let log_ratio = (16.0 * self.p).ln_1p() - (-self.p).ln_1p();
        (i as f64 * log_ratio).exp() * self.f0
    }

    /// `(1 - p)^i n`, the expected size of the active set after `i` steps.
    #[inline]
    pub fn trajectory_active(&self, i: usize) -> f64 {
        (i as f64 * (-self.p).ln_1p()).exp() * self.n as f64
    }

    fn check_step(&self, i: usize) -> Result<()> {
        if i > self.k {
            return Err(Error::Domain(format!("step {i} exceeds process length k = {}", self.k)));
        }
        Ok(())
    }

    /// Expected induced degree after `i` steps, `0 <= i <= k`.
    pub fn expected_degree(&self, i: usize) -> Result<f64> {
        self.check_step(i)?;
        Ok(self.trajectory_degree(i))
    }

    /// Error factor `f_i`, `0 <= i <= k`.
    pub fn error_f(&self, i: usize) -> Result<f64> {
        self.check_step(i)?;
        Ok(self.error_factor(i))
    }

    pub fn envelope(&self, i: usize) -> Result<EnvelopePoint> {
        self.check_step(i)?;
        Ok(self.envelope_unchecked(i))
    }

    pub(crate) fn envelope_unchecked(&self, i: usize) -> EnvelopePoint {
        let d_tilde = self.trajectory_degree(i);
        let f_i = self.error_factor(i);
        let active = self.trajectory_active(i);
        EnvelopePoint {
            i,
            d_tilde,
            f_i,
            lower: (1.0 - f_i) * d_tilde,
            upper: (1.0 + f_i) * d_tilde,
            active_lower: (1.0 - f_i) * active,
            active_upper: (1.0 + f_i) * active,
        }
    }

    /// Cap `2^9 (p^3 n^2 + pn log n)` on the quadratic variation of the
    /// tracked degree processes.
    pub fn variation_cap(&self) -> f64 {
        let nf = self.n as f64;
        512.0 * (self.p.powi(3) * nf * nf + self.pn() * self.log_n())
    }

    /// Deterministic cap `6 p^2 n + 2^7 log n` on a single increment.
    pub fn increment_cap(&self) -> f64 {
        6.0 * self.p * self.p * self.n as f64 + 128.0 * self.log_n()
    }

    /// Cap `3 p d_tilde_{i-1}` on the conditional mean absolute increment at
    /// step `i >= 1`.
    pub fn mean_increment_cap(&self, i: usize) -> f64 {
        3.0 * self.p * self.trajectory_degree(i.saturating_sub(1))
    }

    /// `n^(-2^-11 log pn)`, clamped to `[0, 1]`.
    pub fn failure_prob_bound(&self) -> f64 {
        let exponent = -self.pn().ln() / 2048.0;
        clamp_prob((self.n as f64).powf(exponent))
    }

    pub fn bound_formulas(&self, c_eps: f64) -> Result<BoundFormulas> {
        if !(c_eps > 0.0 && c_eps.is_finite()) {
            return Err(Error::ParameterDomain(format!("c_eps = {c_eps} must be positive")));
        }
        let nf = self.n as f64;
        let kf = self.k as f64;
        let log_n = self.log_n();
        Ok(BoundFormulas {
            s_pdim: self.n.div_ceil(self.k),
            t_pdim: (c_eps * nf * log_n / kf).ceil() as usize,
            t_theta1: (6.0 * nf * nf * log_n / (kf * kf)).ceil() as usize,
            mrss_lower: self.pn() * (1.0 / self.p).ln() / (5.0 * log_n),
            c_eps,
        })
    }

    pub fn regime_check(&self) -> RegimeCheck {
        let nf = self.n as f64;
        let log_n = self.log_n();
        let in_asymptotic_range = match self.epsilon {
            Some(eps) if eps < ASYMPTOTIC_K_SCALE => {
                log_n.powf(2.0 + eps) / nf <= self.p && self.p < nf.powf(-eps)
            }
            _ => false,
        };
        let f_k = self.error_factor(self.k);
        let width_1 = self.error_factor(1) * self.trajectory_degree(1);
        let delta2_below_first_width = self.delta2 < width_1;
        let mut warnings = Vec::new();
        if !delta2_below_first_width {
            warnings.push(format!(
                "delta2 = {:.4} is not below f_1 * d_tilde_1 = {:.4}",
                self.delta2, width_1
            ));
        }
        if f_k >= 1.0 {
            warnings.push(format!(
                "f_k = {f_k:.4e} >= 1: the degree envelope is vacuous at this scale"
            ));
        }
        if in_asymptotic_range && !delta2_below_first_width {
            warnings.push("asymptotic range but delta2 dominates the envelope width".into());
        }
        RegimeCheck {
            in_asymptotic_range,
            f_k,
            f_k_below_one: f_k < 1.0,
            delta2_below_first_width,
            warnings,
        }
    }
}

#[inline]
fn clamp_prob(x: f64) -> f64 {
    x.clamp(0.0, 1.0)
}

/// Freedman tail bound `exp(-t^2 / (2 (s + r t)))`, clamped to `[0, 1]`.
///
/// `t` is the deviation, `s` the cap on the quadratic variation and `r` the
/// cap on a single increment.
pub fn freedman_bound(t: f64, s: f64, r: f64) -> Result<f64> {
    if !(t > 0.0) || !(s > 0.0) || !(r >= 0.0) {
        return Err(Error::Domain(format!(
            "freedman_bound needs t > 0, s > 0, r >= 0 (got t = {t}, s = {s}, r = {r})"
        )));
    }
    Ok(clamp_prob((-t * t / (2.0 * (s + r * t))).exp()))
}

/// Two-sided Chernoff bound `2 exp(-t^2 / (2 mean + t))` on
/// `|Y - mean| >= t` for a binomial `Y`, clamped to `[0, 1]`.
pub fn chernoff_bound(mean: f64, t: f64) -> Result<f64> {
    if !(mean >= 0.0) || !(t >= 0.0) {
        return Err(Error::Domain(format!(
            "chernoff_bound needs mean >= 0, t >= 0 (got mean = {mean}, t = {t})"
        )));
    }
    if t == 0.0 {
        return Ok(1.0);
    }
    Ok(clamp_prob(2.0 * (-t * t / (2.0 * mean + t)).exp()))
}
