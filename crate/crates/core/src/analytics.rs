//! Closed-form analysis of routing-candidate availability under uniform churn.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Probability that a uniformly placed node falls strictly inside a random
/// search interval: `(1/n^2) * sum_x sum_{t>=x} (t - x) / (n - x + 1)` over
/// `0 <= x <= t <= n`.
pub fn candidate_probability(n: u64) -> f64 {
    assert!(n >= 1, "n must be positive");
    let nf = n as f64;
    let mut total = 0.0;
    for x in 0..=n {
        // sum_{t=x}^{n} (t - x) = m (m + 1) / 2 with m = n - x.
        let m = (n - x) as f64;
        total += m * (m + 1.0) / 2.0 / (m + 1.0);
    }
    total / (nf * nf)
}

/// Same sum, evaluated term by term.
pub fn candidate_probability_naive(n: u64) -> f64 {
    let nf = n as f64;
    let mut total = 0.0;
    for x in 0..=n {
        let denom = (n - x + 1) as f64;
        for t in x..=n {
            total += (t - x) as f64 / denom;
        }
    }
    total / (nf * nf)
}

pub fn effective_probability(p: f64, q: f64) -> f64 {
    (p * (1.0 - q)).clamp(0.0, 1.0)
}

/// Probability that none of `b` backup entries is an online routing candidate.
pub fn failure_probability(p_eff: f64, b: u32) -> f64 {
    (1.0 - p_eff).powi(b as i32)
}

pub fn expected_failure_path(p_f: f64) -> f64 {
    1.0 / p_f
}

pub fn expected_online(n: u64, q: f64) -> f64 {
    (1.0 - q) * n as f64
}

/// Smallest `b` whose expected failure-free path reaches `target_path`.
pub fn estimate_backup_size(n: u64, q: f64, target_path: f64) -> Result<u32> {
    if q >= 1.0 {
        return Err(Error::NoOnlineCandidates);
    }
    if target_path <= 1.0 {
        return Ok(0);
    }
    let p_eff = effective_probability(candidate_probability(n), q);
    if p_eff <= 0.0 {
        return Err(Error::NoOnlineCandidates);
    }
    // Closed form gives a starting point; the loop settles rounding.
    let mut b = ((target_path.ln() / -(1.0 - p_eff).ln()).floor() as u32).saturating_sub(1);
    while expected_failure_path(failure_probability(p_eff, b)) < target_path {
        b += 1;
    }
    Ok(b)
}

/// Upper bound on the search path length with `online` nodes.
pub fn estimate_search_path_bound(online: u64) -> u32 {
    if online <= 1 {
        return 0;
    }
    64 - (online - 1).leading_zeros()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct AnalyticalReport {
    pub n: u64,
    pub q: f64,
    pub p: f64,
    pub p_effective: f64,
    pub backup_size: u32,
    pub failure_probability: f64,
    pub expected_failure_path: f64,
    pub expected_online: f64,
    pub search_path_bound: u32,
    pub estimated_backup_size: Option<u32>,
    pub target_failure_path: Option<f64>,
}

/// The whole chain for `(n, q)` at backup size `b`, plus the size estimate
/// when a target path length is given.
pub fn analyze(n: u64, q: f64, b: u32, target_path: Option<f64>) -> Result<AnalyticalReport> {
    if n == 0 {
        return Err(Error::config("n", "must be positive"));
    }
    if !(0.0..=1.0).contains(&q) {
        return Err(Error::config("q", "must lie in [0, 1]"));
    }
    let p = candidate_probability(n);
    let p_effective = effective_probability(p, q);
    let p_f = failure_probability(p_effective, b);
    let online = expected_online(n, q);
    Ok(AnalyticalReport {
        n,
        q,
        p,
        p_effective,
        backup_size: b,
        failure_probability: p_f,
        expected_failure_path: expected_failure_path(p_f),
        expected_online: online,
        search_path_bound: estimate_search_path_bound(online.round() as u64),
        estimated_backup_size: target_path.map(|t| estimate_backup_size(n, q, t)).transpose()?,
        target_failure_path: target_path,
    })
}
