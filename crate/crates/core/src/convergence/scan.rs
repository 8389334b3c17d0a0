use super::{tally_trials, validate_scan_inputs, ExceedanceScan};
use crate::averaging::CycleSums;
use crate::error::{Error, Result};
use crate::observables::Observable;
use crate::systems::{PointHandle, System};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ScanOptions {
    pub trials: u64,
    pub seed: u64,
    /// Work units (orbit evaluations or window lookups) a scan may spend.
    pub budget: u128,
    /// Enumerate every point of a cycle when the budget allows.
    pub allow_exact: bool,
}

impl Default for ScanOptions {
    fn default() -> Self {
        Self {
            trials: 10_000,
            seed: 0,
            budget: 1 << 32,
            allow_exact: true,
        }
    }
}

/// Estimates `μ{|M(0, L_n) f| >= δ}` for every `L_n` and `δ`.
///
/// On a cycle small enough that `N_points * n_terms` fits the budget, every
/// point is enumerated and the terms are exact. Otherwise points are sampled
/// with [`System::sample_point`]; the same sampled orbits serve every `δ`,
/// so estimates are nonincreasing in `δ` by construction.
pub fn exceedance_scan(
    system: &System,
    f: &Observable,
    lengths: &[u64],
    deltas: &[f64],
    opts: &ScanOptions,
) -> Result<ExceedanceScan> {
    validate_scan_inputs(deltas, lengths)?;
    f.check_compatible(system)?;
    let n_terms = lengths.len();
    let l_max = *lengths.last().unwrap();

    if let System::Cyclic(c) = system {
        let sums = CycleSums::new(c, &f.cyclic_values(system)?);
        let points = c.size();
        if opts.allow_exact && points as u128 * n_terms as u128 <= opts.budget {
            let mut hits = vec![vec![0u64; n_terms]; deltas.len()];
            for (j, &l) in lengths.iter().enumerate() {
                for q in 0..points {
                    let s = sums.window_sum_at(q, 1, l).abs();
                    for (d, &delta) in deltas.iter().enumerate() {
                        if s >= delta * l as f64 {
                            hits[d][j] += 1;
                        }
                    }
                }
            }
            let estimates = hits
                .into_iter()
                .map(|row| row.into_iter().map(|h| h as f64 / points as f64).collect())
                .collect();
            return Ok(ExceedanceScan::from_exact(deltas, lengths, estimates, points));
        }
        check_trials(opts)?;
        check_budget(opts.trials as u128 * n_terms as u128, opts.budget)?;
        let counts = tally_trials(deltas, lengths, opts.trials, |t| {
            let PointHandle::Cyclic(x) = system.sample_point(opts.seed, t) else {
                unreachable!()
            };
            let q = c.orbit_position(x);
            Ok(lengths.iter().map(|&l| sums.window_sum_at(q, 1, l)).collect())
        })?;
        return Ok(ExceedanceScan::from_counts(deltas, lengths, &counts, opts.trials));
    }

    check_trials(opts)?;
    check_budget(opts.trials as u128 * l_max as u128, opts.budget)?;
    let hi = i64::try_from(l_max).map_err(|_| Error::IndexOverflow(format!("length {l_max}")))?;
    let counts = tally_trials(deltas, lengths, opts.trials, |t| {
        let x = system.sample_point(opts.seed, t);
        let vals = system.orbit_values(f, &x, 1, hi)?;
        Ok(window_sums(&vals, lengths))
    })?;
    Ok(ExceedanceScan::from_counts(deltas, lengths, &counts, opts.trials))
}

/// `Σ_{i<L_n} vals[i]` for each `n`, from one running sum.
pub(crate) fn window_sums(vals: &[f64], lengths: &[u64]) -> Vec<f64> {
    let mut out = Vec::with_capacity(lengths.len());
    let mut acc = 0.0;
    let mut at = 0usize;
    for &l in lengths {
        while at < l as usize {
            acc += vals[at];
            at += 1;
        }
        out.push(acc);
    }
    out
}

fn check_trials(opts: &ScanOptions) -> Result<()> {
    if opts.trials < 100 {
        return Err(Error::invalid(format!(
            "Monte Carlo scans need at least 100 trials, got {}",
            opts.trials
        )));
    }
    Ok(())
}

fn check_budget(needed: u128, budget: u128) -> Result<()> {
    if needed > budget {
        return Err(Error::BudgetExceeded { needed, budget });
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::observables::{
        build_fp_function, coboundary_from_transfer, CylinderObservable, FpFamily, GrowthFamily,
        MassRule, StepObservable, TransferSpec,
    };
    use crate::systems::{CyclicSystem, ShiftSystem};

    #[test]
    fn zero_function_never_exceeds() {
        let sys: System = ShiftSystem::uniform(2, 1).unwrap().into();
        let scan = exceedance_scan(
            &sys,
            &Observable::Constant(0.0),
            &[1, 2, 4, 8],
            &[0.1],
            &ScanOptions {
                trials: 200,
                ..Default::default()
            },
        )
        .unwrap();
        assert!(scan.estimates[0].iter().all(|&e| e == 0.0));
    }

    #[test]
    fn coboundary_terms_vanish_past_the_sup_bound() {
        let sys: System = CyclicSystem::unit(97).unwrap().into();
        let g: Vec<f64> = (0..97).map(|i| ((i * 31) % 17) as f64 / 4.0).collect();
        let max_g = g.iter().cloned().fold(0.0, f64::max);
        let f = coboundary_from_transfer(&TransferSpec::Step(StepObservable::new(g)), &sys).unwrap();
        let lengths: Vec<u64> = (1..=60).collect();
        let delta = 0.3;
        let scan = exceedance_scan(&sys, &f, &lengths, &[delta], &ScanOptions::default()).unwrap();
        assert!(scan.exact);
        for (j, &l) in lengths.iter().enumerate() {
            if l as f64 > 2.0 * max_g / delta {
                assert_eq!(scan.estimates[0][j], 0.0, "L = {l}");
            }
        }
    }

    #[test]
    fn monte_carlo_cycle_tracks_exact() {
        let sys: System = CyclicSystem::unit(5000).unwrap().into();
        let fam = FpFamily {
            growth: GrowthFamily::Exponential { rate: 1.0 },
            masses: MassRule::Critical,
        };
        let (f, _) = build_fp_function(&fam, 2.0, 0.5, 3, sys.as_cyclic().unwrap()).unwrap();
        let f = Observable::Step(f);
        let lengths: Vec<u64> = (1..=30).collect();
        let exact = exceedance_scan(&sys, &f, &lengths, &[0.5], &ScanOptions::default()).unwrap();
        let mc = exceedance_scan(
            &sys,
            &f,
            &lengths,
            &[0.5],
            &ScanOptions {
                trials: 20_000,
                seed: 3,
                allow_exact: false,
                ..Default::default()
            },
        )
        .unwrap();
        assert!(!mc.exact);
        let diff = (exact.final_sum(0) - mc.final_sum(0)).abs();
        assert!(diff <= 4.0 * mc.partial_sum_stderrs[0][29] + 1e-12, "{diff}");
    }

    #[test]
    fn estimates_decrease_in_delta() {
        let shift = ShiftSystem::new(vec![0.5, 0.5], 4).unwrap();
        let sys: System = shift.into();
        let f = Observable::Cylinder(CylinderObservable::new(2, 0, vec![-1.0, 1.0]).unwrap());
        let scan = exceedance_scan(
            &sys,
            &f,
            &(1..=40).collect::<Vec<_>>(),
            &[0.1, 0.3, 0.6],
            &ScanOptions {
                trials: 500,
                seed: 1,
                ..Default::default()
            },
        )
        .unwrap();
        for j in 0..40 {
            assert!(scan.estimates[0][j] >= scan.estimates[1][j]);
            assert!(scan.estimates[1][j] >= scan.estimates[2][j]);
        }
        assert!(scan.partial_sums[0].windows(2).all(|w| w[1] >= w[0]));
    }

    #[test]
    fn budget_and_trial_floor() {
        let sys: System = ShiftSystem::uniform(2, 1).unwrap().into();
        let opts = ScanOptions {
            trials: 100,
            budget: 10,
            ..Default::default()
        };
        let r = exceedance_scan(&sys, &Observable::Constant(0.0), &[1, 2], &[1.0], &opts);
        assert!(matches!(r, Err(Error::BudgetExceeded { .. })));
        let few = ScanOptions {
            trials: 99,
            ..Default::default()
        };
        assert!(exceedance_scan(&sys, &Observable::Constant(0.0), &[1], &[1.0], &few).is_err());
    }
}
