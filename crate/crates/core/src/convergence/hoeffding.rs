use crate::error::{Error, Result};
use crate::rng::{stream, trial_rng};
use rand_distr::{Binomial, Distribution};
use rayon::prelude::*;
use serde::Serialize;

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct HoeffdingBound {
    pub value: f64,
    /// Every range `b_i - a_i` is zero, so the sum is constant.
    pub degenerate: bool,
}

/// `2 exp(-2 t² / Σ (b_i - a_i)²)` for a sum of independent variables with
/// `a_i <= X_i <= b_i`, bounding `P(|S - E S| >= t)`.
pub fn hoeffding_bound(a: &[f64], b: &[f64], t: f64) -> Result<HoeffdingBound> {
    if a.len() != b.len() || a.is_empty() {
        return Err(Error::invalid("need matching, nonempty range vectors"));
    }
    if !(t > 0.0) {
        return Err(Error::invalid(format!("deviation t = {t} must be positive")));
    }
    if a.iter().zip(b).any(|(lo, hi)| !(hi >= lo)) {
        return Err(Error::invalid("every range needs b_i >= a_i"));
    }
    let spread: f64 = a.iter().zip(b).map(|(lo, hi)| (hi - lo).powi(2)).sum();
    if spread == 0.0 {
        return Ok(HoeffdingBound {
            value: 0.0,
            degenerate: true,
        });
    }
    Ok(HoeffdingBound {
        value: 2.0 * (-2.0 * t * t / spread).exp(),
        degenerate: false,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct HoeffdingCheck {
    pub n: u64,
    pub t: f64,
    pub bound: f64,
    pub empirical: f64,
    pub sigma: f64,
    /// `empirical <= bound + 3 sigma`.
    pub holds: bool,
}

/// Simulated `P(|S_n| >= t)` for Rademacher sums against the bound
/// `2 exp(-t² / (2n))`. `sigma` is the larger of the binomial standard
/// errors at the bound and at the observed frequency.
pub fn hoeffding_empirical(n: u64, t: f64, trials: u64, seed: u64) -> Result<HoeffdingCheck> {
    if n == 0 || trials == 0 {
        return Err(Error::invalid("need n >= 1 and at least one trial"));
    }
    let bound = hoeffding_bound(&vec![-1.0; n as usize], &vec![1.0; n as usize], t)?.value;
    let binom = Binomial::new(n, 0.5).map_err(|e| Error::invalid(e.to_string()))?;
    let hits: u64 = (0..trials)
        .into_par_iter()
        .map(|k| {
            let mut rng = trial_rng(seed, stream::HOEFFDING, k);
            let s = 2.0 * binom.sample(&mut rng) as f64 - n as f64;
            u64::from(s.abs() >= t)
        })
        .sum();
    let tr = trials as f64;
    let empirical = hits as f64 / tr;
    let clamp = bound.min(1.0);
    let sigma = (clamp * (1.0 - clamp) / tr)
        .sqrt()
        .max((empirical * (1.0 - empirical) / tr).sqrt());
    Ok(HoeffdingCheck {
        n,
        t,
        bound,
        empirical,
        sigma,
        holds: empirical <= bound + 3.0 * sigma,
    })
}
