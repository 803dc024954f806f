//! Three-state Markov model of repeated checks: states are "error detected",
//! "undetected error" and "no error".

use crate::error::{invalid, Result};

/// Per-check probabilities of a detectable check-gate error, an undetectable
/// one, and none at all.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CheckRates {
    pub t_d: f64,
    pub t_u: f64,
    pub t_ok: f64,
}

impl CheckRates {
    pub fn new(t_d: f64, t_u: f64, t_ok: f64) -> Result<CheckRates> {
        let ok = |v: f64| (0.0..=1.0).contains(&v);
        if !ok(t_d) || !ok(t_u) || !ok(t_ok) || (t_d + t_u + t_ok - 1.0).abs() > 1e-12 {
            return invalid(format!("check rates ({t_d}, {t_u}, {t_ok}) are not a distribution"));
        }
        Ok(CheckRates { t_d, t_u, t_ok })
    }

    pub fn noiseless() -> CheckRates {
        CheckRates { t_d: 0.0, t_u: 0.0, t_ok: 1.0 }
    }
}

/// Rates for a check made of `k` two-qubit gates, each with depolarizing
/// noise `eps`: every gate flips the syndrome with probability `8ε/15`.
pub fn check_rates(k: usize, eps: f64) -> Result<CheckRates> {
    if !(0.0..=1.0).contains(&eps) {
        return invalid(format!("eps must lie in [0, 1], got {eps}"));
    }
    let p = 8.0 * eps / 15.0;
    let t_d = 0.5 * (1.0 - (1.0 - 2.0 * p).powi(k as i32));
    let t_ok = (1.0 - eps).powi(k as i32);
    let t_u = (1.0 - t_d - t_ok).max(0.0);
    Ok(CheckRates { t_d, t_u, t_ok })
}

/// Probabilities of (detected, undetected, no error).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CpcState(pub [f64; 3]);

impl CpcState {
    /// State before any check: the payload alone fails with `eps_pl`.
    pub fn initial(eps_pl: f64) -> Result<CpcState> {
        if !(0.0..=1.0).contains(&eps_pl) {
            return invalid(format!("payload error must lie in [0, 1], got {eps_pl}"));
        }
        Ok(CpcState([0.0, eps_pl, 1.0 - eps_pl]))
    }

    pub fn postselect(&self) -> f64 {
        self.0[1] + self.0[2]
    }

    /// Undetected errors among accepted shots; `None` if nothing is accepted.
    pub fn logical_error(&self) -> Option<f64> {
        let p = self.postselect();
        (p > 0.0).then(|| self.0[1] / p)
    }
}

pub fn markov_step(s: CpcState, r: CheckRates) -> CpcState {
    let [d, u, ok] = s.0;
    CpcState([d + 0.5 * u + r.t_d * ok, 0.5 * u + r.t_u * ok, r.t_ok * ok])
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CurvePoint {
    pub checks: usize,
    pub postselect: f64,
    /// `None` when the post-selection rate is zero.
    pub logical_error: Option<f64>,
}

/// Rates after `0..=m_max` identical checks.
pub fn cpc_curve(eps_pl: f64, rates: CheckRates, m_max: usize) -> Result<Vec<CurvePoint>> {
    cpc_curve_with(eps_pl, &vec![rates; m_max])
}

/// Rates after each prefix of a sequence of checks with their own rates.
pub fn cpc_curve_with(eps_pl: f64, rates: &[CheckRates]) -> Result<Vec<CurvePoint>> {
    let mut s = CpcState::initial(eps_pl)?;
    let point = |checks, s: &CpcState| CurvePoint { checks, postselect: s.postselect(), logical_error: s.logical_error() };
    let mut out = vec![point(0, &s)];
    for (i, r) in rates.iter().enumerate() {
        s = markov_step(s, *r);
        out.push(point(i + 1, &s));
    }
    Ok(out)
}

/// Limit of the logical error rate under infinitely many identical checks:
/// `t_u / (1/2 − t_d)` when `t_ok > 1/2` and `eps_pl < 1`, otherwise 1.
pub fn asymptotic_error(r: CheckRates, eps_pl: f64) -> f64 {
    if r.t_ok > 0.5 && eps_pl < 1.0 {
        r.t_u / (0.5 - r.t_d)
    } else {
        1.0
    }
}

/// Asymptotic ratio of successive post-selection rates; `None` unless
/// `t_ok > 1/2`.
pub fn asymptotic_postselect_factor(r: CheckRates) -> Option<f64> {
    (r.t_ok > 0.5).then_some(r.t_ok)
}
