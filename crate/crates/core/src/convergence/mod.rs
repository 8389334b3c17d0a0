//! Complete-convergence diagnostics.
//!
//! A scan estimates the terms `μ{|M(0, L_n) f| >= δ}` for `n = 1..=N` and
//! their partial sums. Finite scans cannot decide whether the series
//! converges, so each δ gets a log-log slope diagnostic over the last decade
//! and a verdict string that may honestly read "inconclusive".

mod bernoulli;
mod hoeffding;
mod iid;
mod scan;

pub use bernoulli::{cofb_decomposition_scan, DecompositionReport};
pub use hoeffding::{hoeffding_bound, hoeffding_empirical, HoeffdingBound, HoeffdingCheck};
pub use iid::{
    erdos_block_demo, iid_exceedance_scan, rademacher_exceedance_exact, ErdosReport, IidDistribution,
    IidSampler, AGGREGATE_MIN,
};
pub use scan::{exceedance_scan, ScanOptions};

use crate::error::{Error, Result};
use rayon::prelude::*;
use serde::Serialize;

/// Slope at or above which partial sums are called diverging.
pub const DIVERGING_SLOPE: f64 = 0.2;
/// Slope at or below which partial sums may be called saturating.
pub const SATURATING_SLOPE: f64 = 0.02;
/// Largest final term compatible with a saturating verdict.
pub const SATURATING_INCREMENT: f64 = 1e-3;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum SeriesVerdict {
    Diverging,
    Saturating,
    Inconclusive,
}

impl SeriesVerdict {
    pub fn as_str(&self) -> &'static str {
        match self {
            SeriesVerdict::Diverging => "diverging",
            SeriesVerdict::Saturating => "saturating",
            SeriesVerdict::Inconclusive => "inconclusive",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SlopeDiagnostic {
    /// Least-squares slope of `ln S(n)` against `ln n` for `n` in
    /// `[N/10, N]`, over the points with `S(n) > 0`.
    pub slope: f64,
    /// `S(N) - S(N-1)`, the last estimated term.
    pub final_increment: f64,
    pub verdict: SeriesVerdict,
}

/// Slope verdict for partial sums `S(1), .., S(N)`.
pub fn slope_diagnostic(partial_sums: &[f64]) -> SlopeDiagnostic {
    let n = partial_sums.len();
    if n == 0 || partial_sums[n - 1] <= 0.0 {
        return SlopeDiagnostic {
            slope: 0.0,
            final_increment: 0.0,
            verdict: SeriesVerdict::Saturating,
        };
    }
    let final_increment = if n >= 2 {
        partial_sums[n - 1] - partial_sums[n - 2]
    } else {
        partial_sums[0]
    };
    let first = (n as f64 / 10.0).ceil().max(1.0) as usize;
    let pts: Vec<(f64, f64)> = (first..=n)
        .filter(|&k| partial_sums[k - 1] > 0.0)
        .map(|k| ((k as f64).ln(), partial_sums[k - 1].ln()))
        .collect();
    let slope = if pts.len() < 2 {
        0.0
    } else {
        let m = pts.len() as f64;
        let mx = pts.iter().map(|p| p.0).sum::<f64>() / m;
        let my = pts.iter().map(|p| p.1).sum::<f64>() / m;
        let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
        let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
        if sxx > 0.0 {
            sxy / sxx
        } else {
            0.0
        }
    };
    let verdict = if slope >= DIVERGING_SLOPE {
        SeriesVerdict::Diverging
    } else if slope <= SATURATING_SLOPE && final_increment < SATURATING_INCREMENT {
        SeriesVerdict::Saturating
    } else {
        SeriesVerdict::Inconclusive
    };
    SlopeDiagnostic {
        slope,
        final_increment,
        verdict,
    }
}

/// Estimated exceedance series for one or more thresholds.
///
/// Arrays are indexed `[delta_index][n - 1]`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ExceedanceScan {
    pub deltas: Vec<f64>,
    pub lengths: Vec<u64>,
    pub estimates: Vec<Vec<f64>>,
    pub stderrs: Vec<Vec<f64>>,
    pub partial_sums: Vec<Vec<f64>>,
    pub partial_sum_stderrs: Vec<Vec<f64>>,
    pub diagnostics: Vec<SlopeDiagnostic>,
    /// Monte Carlo trials, or the number of enumerated points when exact.
    pub samples: u64,
    pub exact: bool,
}

impl ExceedanceScan {
    fn from_exact(deltas: &[f64], lengths: &[u64], estimates: Vec<Vec<f64>>, samples: u64) -> Self {
        let partial_sums: Vec<Vec<f64>> = estimates.iter().map(|e| cumulative(e)).collect();
        let zeros = vec![vec![0.0; lengths.len()]; deltas.len()];
        let diagnostics = partial_sums.iter().map(|s| slope_diagnostic(s)).collect();
        Self {
            deltas: deltas.to_vec(),
            lengths: lengths.to_vec(),
            estimates,
            stderrs: zeros.clone(),
            partial_sums,
            partial_sum_stderrs: zeros,
            diagnostics,
            samples,
            exact: true,
        }
    }

    fn from_counts(deltas: &[f64], lengths: &[u64], acc: &TrialCounts, trials: u64) -> Self {
        let t = trials as f64;
        let n = lengths.len();
        let mut estimates: Vec<Vec<f64>> = Vec::with_capacity(deltas.len());
        let mut stderrs: Vec<Vec<f64>> = Vec::with_capacity(deltas.len());
        let mut partial_sums: Vec<Vec<f64>> = Vec::with_capacity(deltas.len());
        let mut partial_sum_stderrs: Vec<Vec<f64>> = Vec::with_capacity(deltas.len());
        for d in 0..deltas.len() {
            let row = d * n..(d + 1) * n;
            let p: Vec<f64> = acc.hits[row.clone()].iter().map(|&h| h as f64 / t).collect();
            stderrs.push(p.iter().map(|&q| (q * (1.0 - q) / t).sqrt()).collect());
            partial_sums.push(acc.cum[row.clone()].iter().map(|&c| c as f64 / t).collect());
            partial_sum_stderrs.push(
                acc.cum[row.clone()]
                    .iter()
                    .zip(&acc.cum_sq[row])
                    .map(|(&s, &sq)| {
                        if trials < 2 {
                            return 0.0;
                        }
                        let mean = s as f64 / t;
                        let var = ((sq as f64 - s as f64 * mean) / (t - 1.0)).max(0.0);
                        (var / t).sqrt()
                    })
                    .collect(),
            );
            estimates.push(p);
        }
        let diagnostics = partial_sums.iter().map(|s| slope_diagnostic(s)).collect();
        Self {
            deltas: deltas.to_vec(),
            lengths: lengths.to_vec(),
            estimates,
            stderrs,
            partial_sums,
            partial_sum_stderrs,
            diagnostics,
            samples: trials,
            exact: false,
        }
    }

    /// Final partial sum for the `d`-th threshold.
    pub fn final_sum(&self, d: usize) -> f64 {
        self.partial_sums[d].last().copied().unwrap_or(0.0)
    }
}

fn cumulative(v: &[f64]) -> Vec<f64> {
    v.iter()
        .scan(0.0, |acc, x| {
            *acc += x;
            Some(*acc)
        })
        .collect()
}

/// Integer tallies over trials, so parallel reduction order cannot change
/// the result.
#[derive(Clone, Debug)]
struct TrialCounts {
    n_terms: usize,
    /// Trials with `|window sum| >= δ L_n`.
    hits: Vec<u64>,
    /// Sum over trials of the trial's running exceedance count up to `n`.
    cum: Vec<u64>,
    cum_sq: Vec<u128>,
}

impl TrialCounts {
    fn new(n_deltas: usize, n_terms: usize) -> Self {
        let len = n_deltas * n_terms;
        Self {
            n_terms,
            hits: vec![0; len],
            cum: vec![0; len],
            cum_sq: vec![0; len],
        }
    }

    fn record(&mut self, deltas: &[f64], lengths: &[u64], sums: &[f64]) {
        let n = self.n_terms;
        for (d, &delta) in deltas.iter().enumerate() {
            let mut running = 0u64;
            for (j, (&s, &l)) in sums.iter().zip(lengths).enumerate() {
                let idx = d * n + j;
                if s.abs() >= delta * l as f64 {
                    self.hits[idx] += 1;
                    running += 1;
                }
                self.cum[idx] += running;
                self.cum_sq[idx] += (running as u128) * (running as u128);
            }
        }
    }

    fn merge(mut self, other: Self) -> Self {
        for (a, b) in self.hits.iter_mut().zip(other.hits) {
            *a += b;
        }
        for (a, b) in self.cum.iter_mut().zip(other.cum) {
            *a += b;
        }
        for (a, b) in self.cum_sq.iter_mut().zip(other.cum_sq) {
            *a += b;
        }
        self
    }
}

/// Runs `trial(t)` for every trial, each returning the window sums
/// `Σ_{i=1}^{L_n}` for `n = 1..=N`, and tallies exceedances.
fn tally_trials<F>(deltas: &[f64], lengths: &[u64], trials: u64, trial: F) -> Result<TrialCounts>
where
    F: Fn(u64) -> Result<Vec<f64>> + Sync,
{
    let n = lengths.len();
    (0..trials)
        .into_par_iter()
        .try_fold(
            || TrialCounts::new(deltas.len(), n),
            |mut acc, t| {
                let sums = trial(t)?;
                acc.record(deltas, lengths, &sums);
                Ok::<_, Error>(acc)
            },
        )
        .try_reduce(|| TrialCounts::new(deltas.len(), n), |a, b| Ok(a.merge(b)))
}

pub(crate) fn validate_scan_inputs(deltas: &[f64], lengths: &[u64]) -> Result<()> {
    if deltas.is_empty() || deltas.iter().any(|d| !(*d > 0.0 && d.is_finite())) {
        return Err(Error::invalid("every δ must be a positive finite real"));
    }
    if lengths.is_empty() {
        return Err(Error::invalid("scan needs at least one length"));
    }
    if lengths[0] == 0 || lengths.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::invalid(
            "lengths must be positive and strictly increasing",
        ));
    }
    Ok(())
}
