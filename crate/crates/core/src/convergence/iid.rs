use super::{tally_trials, validate_scan_inputs, ExceedanceScan};
use crate::error::{Error, Result};
use crate::rng::{stream, trial_rng};
use rand::Rng;
use rand_distr::{Binomial, Distribution, Normal};
use rayon::prelude::*;
use serde::Serialize;

/// Block sizes from which Rademacher and Pareto block sums are drawn in
/// aggregate instead of term by term.
pub const AGGREGATE_MIN: u64 = 256;

/// Upper bound on individually drawn variates in one scan.
const SAMPLE_BUDGET: u128 = 1 << 34;

/// Mean-zero laws for the IID laboratory.
#[derive(Clone, Debug, PartialEq)]
pub enum IidDistribution {
    /// `±1` with probability `1/2` each.
    Rademacher,
    /// Uniform on `[-1, 1]`.
    UniformCentered,
    /// `X - α/(α-1)` with `P(X > x) = x^{-α}` for `x >= 1`; needs `α > 1`.
    ParetoCentered { alpha: f64 },
    /// `values[j]` with probability `probs[j]`.
    Discrete { values: Vec<f64>, probs: Vec<f64> },
}

#[derive(Clone, Debug, PartialEq)]
pub struct IidSampler {
    dist: IidDistribution,
    seed: u64,
    cumulative: Vec<f64>,
}

impl IidSampler {
    pub fn new(dist: IidDistribution, seed: u64) -> Result<Self> {
        let mut cumulative = Vec::new();
        match &dist {
            IidDistribution::ParetoCentered { alpha } if !(*alpha > 1.0 && alpha.is_finite()) => {
                return Err(Error::invalid(format!(
                    "pareto-centered needs α > 1 for a finite mean, got {alpha}"
                )))
            }
            IidDistribution::Discrete { values, probs } => {
                if values.is_empty() || values.len() != probs.len() {
                    return Err(Error::invalid("discrete table needs matching values and probs"));
                }
                if probs.iter().any(|p| !(*p >= 0.0)) {
                    return Err(Error::invalid("discrete probabilities must be nonnegative"));
                }
                let total: f64 = probs.iter().sum();
                if (total - 1.0).abs() > 1e-12 {
                    return Err(Error::invalid(format!("discrete probabilities sum to {total}")));
                }
                let mut acc = 0.0;
                cumulative = probs
                    .iter()
                    .map(|p| {
                        acc += p;
                        acc
                    })
                    .collect();
                *cumulative.last_mut().unwrap() = f64::INFINITY;
            }
            _ => {}
        }
        Ok(Self {
            dist,
            seed,
            cumulative,
        })
    }

    pub fn distribution(&self) -> &IidDistribution {
        &self.dist
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn mean(&self) -> f64 {
        match &self.dist {
            IidDistribution::Discrete { values, probs } => {
                values.iter().zip(probs).map(|(v, p)| v * p).sum()
            }
            _ => 0.0,
        }
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match &self.dist {
            IidDistribution::Rademacher => {
                if rng.random::<bool>() {
                    1.0
                } else {
                    -1.0
                }
            }
            IidDistribution::UniformCentered => rng.random_range(-1.0..=1.0),
            IidDistribution::ParetoCentered { alpha } => {
                // 1 - u lies in (0, 1], so the power is finite.
                let u: f64 = rng.random();
                (1.0 - u).powf(-1.0 / alpha) - alpha / (alpha - 1.0)
            }
            IidDistribution::Discrete { values, .. } => {
                let u: f64 = rng.random();
                values[self.cumulative.partition_point(|&c| c <= u)]
            }
        }
    }

    /// Whether blocks of size `m` are drawn in aggregate.
    pub fn aggregates(&self, m: u64) -> bool {
        m >= AGGREGATE_MIN
            && matches!(
                self.dist,
                IidDistribution::Rademacher | IidDistribution::ParetoCentered { .. }
            )
    }

    /// Sum of `m` independent draws.
    ///
    /// Large Rademacher blocks use the exact law `2 Bin(m, 1/2) - m`. Large
    /// Pareto blocks split at `u = (m/4)^{1/α}`: the number of draws above
    /// `u` is `Bin(m, u^{-α})` and those draws are sampled exactly from the
    /// conditional tail, while the bounded remainder is replaced by a normal
    /// variable with the exact truncated mean and variance.
    pub fn block_sum<R: Rng + ?Sized>(&self, rng: &mut R, m: u64) -> f64 {
        if !self.aggregates(m) {
            return (0..m).map(|_| self.sample(rng)).sum();
        }
        match self.dist {
            IidDistribution::Rademacher => {
                let b = Binomial::new(m, 0.5).unwrap().sample(rng);
                2.0 * b as f64 - m as f64
            }
            IidDistribution::ParetoCentered { alpha } => pareto_block(rng, m, alpha),
            _ => unreachable!(),
        }
    }
}

fn pareto_block<R: Rng + ?Sized>(rng: &mut R, m: u64, alpha: f64) -> f64 {
    let u = (m as f64 / 4.0).powf(1.0 / alpha);
    let q = u.powf(-alpha);
    let big = Binomial::new(m, q).unwrap().sample(rng);
    let mut total = 0.0;
    for _ in 0..big {
        let w: f64 = rng.random();
        total += u * (1.0 - w).powf(-1.0 / alpha);
    }
    let rest = (m - big) as f64;
    let norm = alpha / (1.0 - q);
    let mean = norm * (1.0 - u.powf(1.0 - alpha)) / (alpha - 1.0);
    let second = if (alpha - 2.0).abs() < 1e-12 {
        norm * u.ln()
    } else {
        norm * (u.powf(2.0 - alpha) - 1.0) / (2.0 - alpha)
    };
    let var = (second - mean * mean).max(0.0);
    if rest > 0.0 {
        let bulk = Normal::new(rest * mean, (rest * var).sqrt()).unwrap();
        total += bulk.sample(rng);
    }
    total - m as f64 * alpha / (alpha - 1.0)
}

/// `P(|S_n| >= δ n)` for a Rademacher walk, summed from the binomial law in
/// log space. At `δ = 1` only the two constant paths qualify: `2^{1-n}`.
pub fn rademacher_exceedance_exact(n: u64, delta: f64) -> f64 {
    let ln_fact = ln_factorials(n);
    rademacher_exceedance_with(&ln_fact, n, delta)
}

fn ln_factorials(n: u64) -> Vec<f64> {
    let mut t = Vec::with_capacity(n as usize + 1);
    t.push(0.0);
    let mut acc = 0.0;
    for k in 1..=n {
        acc += (k as f64).ln();
        t.push(acc);
    }
    t
}

fn rademacher_exceedance_with(ln_fact: &[f64], n: u64, delta: f64) -> f64 {
    let ln2 = std::f64::consts::LN_2;
    let threshold = delta * n as f64;
    let mut total = 0.0;
    for k in 0..=n {
        let s = (2 * k as i64 - n as i64).abs() as f64;
        if s >= threshold {
            let ln_p = ln_fact[n as usize] - ln_fact[k as usize] - ln_fact[(n - k) as usize]
                - n as f64 * ln2;
            total += ln_p.exp();
        }
    }
    total.min(1.0)
}

/// Exceedance scan over fresh IID sequences `X_1, X_2, ..`, with
/// `M(0, L) = (1/L) Σ_{i=1}^{L} X_i`.
///
/// `exact` selects binomial enumeration and is only available for the
/// Rademacher law. Monte Carlo trials draw independent sequences from
/// per-trial seeds, so the result is independent of thread scheduling.
pub fn iid_exceedance_scan(
    sampler: &IidSampler,
    lengths: &[u64],
    deltas: &[f64],
    trials: u64,
    exact: bool,
) -> Result<ExceedanceScan> {
    validate_scan_inputs(deltas, lengths)?;
    if exact {
        if sampler.dist != IidDistribution::Rademacher {
            return Err(Error::invalid("exact mode is only available for rademacher"));
        }
        let ln_fact = ln_factorials(*lengths.last().unwrap());
        let estimates = deltas
            .iter()
            .map(|&d| {
                lengths
                    .iter()
                    .map(|&l| rademacher_exceedance_with(&ln_fact, l, d))
                    .collect()
            })
            .collect();
        return Ok(ExceedanceScan::from_exact(deltas, lengths, estimates, 0));
    }
    if trials < 100 {
        return Err(Error::invalid(format!(
            "Monte Carlo scans need at least 100 trials, got {trials}"
        )));
    }
    let mut draws_per_trial = 0u128;
    let mut prev = 0u64;
    for &l in lengths {
        let m = l - prev;
        draws_per_trial += if sampler.aggregates(m) { 64 } else { m as u128 };
        prev = l;
    }
    let needed = draws_per_trial * trials as u128;
    if needed > SAMPLE_BUDGET {
        return Err(Error::BudgetExceeded {
            needed,
            budget: SAMPLE_BUDGET,
        });
    }
    let counts = tally_trials(deltas, lengths, trials, |t| {
        let mut rng = trial_rng(sampler.seed, stream::IID, t);
        let mut s = 0.0;
        let mut prev = 0u64;
        Ok(lengths
            .iter()
            .map(|&l| {
                s += sampler.block_sum(&mut rng, l - prev);
                prev = l;
                s
            })
            .collect())
    })?;
    Ok(ExceedanceScan::from_counts(deltas, lengths, &counts, trials))
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ErdosReport {
    /// Per trial, how many `n <= n_max` had `|M(v_n, n)| > 1`.
    pub counts: Vec<u64>,
    /// Mean over trials of the count restricted to `n' <= n`.
    pub mean_count_by_n: Vec<f64>,
    pub disjoint: bool,
    /// Largest `|corr(M(v_n, n), M(v_{n+1}, n+1))|` over the first pairs.
    pub max_abs_correlation: f64,
    pub correlation_threshold: f64,
}

/// Averages over the consecutive blocks `v_n + 1 ..= v_n + n` with
/// `v_n = n(n+1)/2`. The blocks are disjoint, so the averages of an IID
/// sequence over them are independent.
pub fn erdos_block_demo(sampler: &IidSampler, n_max: u64, trials: u64) -> Result<ErdosReport> {
    if n_max == 0 || trials < 2 {
        return Err(Error::invalid("need n_max >= 1 and at least two trials"));
    }
    if sampler.mean().abs() > 1e-12 {
        return Err(Error::invalid("Erdős blocks need a mean-zero sampler"));
    }
    // Block n ends at v_n + n and block n+1 starts at v_{n+1} + 1.
    let disjoint = (1..n_max).all(|n| n * (n + 1) / 2 + n < (n + 1) * (n + 2) / 2 + 1);
    let pairs = (n_max - 1).min(10) as usize;
    let per_trial: Vec<(Vec<bool>, Vec<f64>)> = (0..trials)
        .into_par_iter()
        .map(|t| {
            let mut rng = trial_rng(sampler.seed, stream::IID ^ 0xE4D0, t);
            let mut hits = Vec::with_capacity(n_max as usize);
            let mut head = Vec::with_capacity(pairs + 1);
            for n in 1..=n_max {
                let m = sampler.block_sum(&mut rng, n) / n as f64;
                hits.push(m.abs() > 1.0);
                if head.len() <= pairs {
                    head.push(m);
                }
            }
            (hits, head)
        })
        .collect();

    let counts: Vec<u64> = per_trial
        .iter()
        .map(|(h, _)| h.iter().filter(|&&b| b).count() as u64)
        .collect();
    let mut running = vec![0u64; n_max as usize];
    for (h, _) in &per_trial {
        let mut c = 0u64;
        for (slot, &b) in running.iter_mut().zip(h) {
            c += u64::from(b);
            *slot += c;
        }
    }
    let mean_count_by_n = running
        .into_iter()
        .map(|c| c as f64 / trials as f64)
        .collect();
    let max_abs_correlation = (0..pairs)
        .map(|j| {
            let a: Vec<f64> = per_trial.iter().map(|(_, h)| h[j]).collect();
            let b: Vec<f64> = per_trial.iter().map(|(_, h)| h[j + 1]).collect();
            correlation(&a, &b).abs()
        })
        .fold(0.0, f64::max);
    Ok(ErdosReport {
        counts,
        mean_count_by_n,
        disjoint,
        max_abs_correlation,
        correlation_threshold: 4.0 / (trials as f64).sqrt(),
    })
}

pub(crate) fn correlation(a: &[f64], b: &[f64]) -> f64 {
    let n = a.len() as f64;
    let ma = a.iter().sum::<f64>() / n;
    let mb = b.iter().sum::<f64>() / n;
    let cov: f64 = a.iter().zip(b).map(|(x, y)| (x - ma) * (y - mb)).sum();
    let va: f64 = a.iter().map(|x| (x - ma).powi(2)).sum();
    let vb: f64 = b.iter().map(|y| (y - mb).powi(2)).sum();
    if va == 0.0 || vb == 0.0 {
        0.0
    } else {
        cov / (va * vb).sqrt()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::convergence::SeriesVerdict;

    #[test]
    fn exact_rademacher_at_delta_one() {
        for n in 1..=30 {
            let p = rademacher_exceedance_exact(n, 1.0);
            assert!((p - 2f64.powi(1 - n as i32)).abs() < 1e-15 * p.max(1e-300) + 1e-17);
        }
        let lengths: Vec<u64> = (1..=200).collect();
        let s = IidSampler::new(IidDistribution::Rademacher, 0).unwrap();
        let scan = iid_exceedance_scan(&s, &lengths, &[1.0], 0, true).unwrap();
        let oracle: f64 = (1..=200).map(|n| 2f64.powi(1 - n)).sum();
        assert!((scan.final_sum(0) - oracle).abs() < 1e-12);
        assert_eq!(scan.diagnostics[0].verdict, SeriesVerdict::Saturating);
    }

    #[test]
    fn exact_mode_small_binomial() {
        // n = 4, δ = 0.5: |S| >= 2 when k ∈ {0, 1, 3, 4} → 10/16.
        assert!((rademacher_exceedance_exact(4, 0.5) - 10.0 / 16.0).abs() < 1e-15);
    }

    #[test]
    fn pareto_needs_finite_mean() {
        assert!(IidSampler::new(IidDistribution::ParetoCentered { alpha: 1.0 }, 0).is_err());
        assert!(IidSampler::new(IidDistribution::ParetoCentered { alpha: 0.5 }, 0).is_err());
    }

    #[test]
    fn pareto_centering_and_tail() {
        let alpha = 2.5;
        let s = IidSampler::new(IidDistribution::ParetoCentered { alpha }, 1).unwrap();
        let mut rng = trial_rng(1, 0, 0);
        let n = 200_000;
        let shift = alpha / (alpha - 1.0);
        let draws: Vec<f64> = (0..n).map(|_| s.sample(&mut rng)).collect();
        let mean = draws.iter().sum::<f64>() / n as f64;
        // Variance of a Pareto(2.5) is 2.5/(1.5^2 * 0.5) ≈ 2.22.
        assert!(mean.abs() < 4.0 * (2.23f64 / n as f64).sqrt(), "{mean}");
        let over = draws.iter().filter(|&&x| x + shift > 3.0).count() as f64 / n as f64;
        let p = 3f64.powf(-alpha);
        assert!((over - p).abs() < 4.0 * (p * (1.0 - p) / n as f64).sqrt());
    }

    #[test]
    fn aggregated_blocks_match_termwise_law() {
        // Compare P(block sum > t) between aggregate and term-by-term draws.
        let alpha = 1.5;
        let s = IidSampler::new(IidDistribution::ParetoCentered { alpha }, 2).unwrap();
        let m = 1024u64;
        let t = 0.5 * m as f64;
        let trials = 20_000;
        let (mut agg, mut direct) = (0u64, 0u64);
        for k in 0..trials {
            let mut r1 = trial_rng(5, 1, k);
            let mut r2 = trial_rng(5, 2, k);
            if s.block_sum(&mut r1, m) > t {
                agg += 1;
            }
            let d: f64 = (0..m).map(|_| s.sample(&mut r2)).sum();
            if d > t {
                direct += 1;
            }
        }
        let (pa, pd) = (agg as f64 / trials as f64, direct as f64 / trials as f64);
        let se = ((pa * (1.0 - pa) + pd * (1.0 - pd)) / trials as f64).sqrt();
        assert!((pa - pd).abs() < 4.0 * se + 1e-3, "aggregate {pa}, direct {pd}");
    }

    #[test]
    fn rademacher_block_law() {
        let s = IidSampler::new(IidDistribution::Rademacher, 0).unwrap();
        let mut rng = trial_rng(0, 0, 0);
        for m in [256u64, 257, 1000] {
            let b = s.block_sum(&mut rng, m);
            assert_eq!(b.fract(), 0.0);
            assert_eq!((b as i64 + m as i64) % 2, 0);
            assert!(b.abs() <= m as f64);
        }
    }

    #[test]
    fn discrete_table_validation_and_mean() {
        let s = IidSampler::new(
            IidDistribution::Discrete {
                values: vec![-2.0, 1.0],
                probs: vec![1.0 / 3.0, 2.0 / 3.0],
            },
            0,
        )
        .unwrap();
        assert!(s.mean().abs() < 1e-15);
        assert!(IidSampler::new(
            IidDistribution::Discrete {
                values: vec![1.0],
                probs: vec![0.5]
            },
            0
        )
        .is_err());
    }

    #[test]
    fn erdos_blocks_are_disjoint_and_uncorrelated() {
        let s = IidSampler::new(IidDistribution::Rademacher, 11).unwrap();
        let r = erdos_block_demo(&s, 50, 4000).unwrap();
        assert!(r.disjoint);
        assert!(r.max_abs_correlation <= r.correlation_threshold);
        assert_eq!(r.counts.len(), 4000);
        // |M| > 1 is impossible for ±1 draws.
        assert!(r.counts.iter().all(|&c| c == 0));
    }
}
