use super::{
    backward_stopping_times, bad_windows_by_start, build_bad_scheme, greedy_cover,
    quantization_tau, union_length, vitali_disjointify, BadScheme, CoverPlan,
};
use crate::averaging::{orbit_order, CycleSums};
use crate::error::{Error, Result};
use crate::observables::{build_fp_function, FpFamily, Observable};
use crate::systems::{CyclicSystem, PointHandle, System};
use rayon::prelude::*;
use serde::Serialize;

/// Orbit evaluations allowed for [`limsup_estimate`] off cycles.
pub const LIMSUP_BUDGET: u128 = 1 << 34;

const QUANTILES: [f64; 5] = [0.1, 0.25, 0.5, 0.75, 0.9];

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LimsupReport {
    /// `max_n M(v_n, L_n) f(x)` for each sampled `x`.
    pub maxima: Vec<f64>,
    pub threshold: f64,
    /// Share of sampled points whose maximum reaches `threshold`.
    pub fraction_above: f64,
    /// `(level, value)` pairs of the empirical distribution of maxima.
    pub quantiles: Vec<(f64, f64)>,
}

/// For `points` sampled `x`, the largest average along the scheme prefix
/// `pairs`, and the share of points where it reaches `threshold`.
pub fn limsup_estimate(
    system: &System,
    f: &Observable,
    pairs: &[(i64, u64)],
    points: u64,
    seed: u64,
    threshold: f64,
) -> Result<LimsupReport> {
    if pairs.is_empty() {
        return Err(Error::invalid("scheme prefix is empty"));
    }
    if points == 0 {
        return Err(Error::invalid("limsup estimate needs at least one point"));
    }
    if let Some(i) = pairs.iter().position(|p| p.1 == 0) {
        return Err(Error::invalid(format!("pair {} has zero length", i + 1)));
    }
    f.check_compatible(system)?;

    let maxima: Vec<f64> = if let System::Cyclic(c) = system {
        let sums = CycleSums::new(c, &f.cyclic_values(system)?);
        (0..points)
            .into_par_iter()
            .map(|t| {
                let PointHandle::Cyclic(x) = system.sample_point(seed, t) else {
                    unreachable!()
                };
                let q = c.orbit_position(x);
                pairs
                    .iter()
                    .map(|&(v, l)| sums.window_sum_at(q, v + 1, l) / l as f64)
                    .fold(f64::NEG_INFINITY, f64::max)
            })
            .collect()
    } else {
        let work: u128 = pairs.iter().map(|p| p.1 as u128).sum::<u128>() * points as u128;
        if work > LIMSUP_BUDGET {
            return Err(Error::BudgetExceeded {
                needed: work,
                budget: LIMSUP_BUDGET,
            });
        }
        (0..points)
            .into_par_iter()
            .map(|t| {
                let x = system.sample_point(seed, t);
                let mut best = f64::NEG_INFINITY;
                for &(v, l) in pairs {
                    let lo = v
                        .checked_add(1)
                        .ok_or_else(|| Error::IndexOverflow(format!("offset {v} + 1")))?;
                    let hi = i64::try_from(l)
                        .ok()
                        .and_then(|l| lo.checked_add(l - 1))
                        .ok_or_else(|| Error::IndexOverflow(format!("window ({v}, {l})")))?;
                    let vals = system.orbit_values(f, &x, lo, hi)?;
                    best = best.max(vals.iter().sum::<f64>() / l as f64);
                }
                Ok(best)
            })
            .collect::<Result<_>>()?
    };

    let above = maxima.iter().filter(|&&m| m >= threshold).count();
    let mut sorted = maxima.clone();
    sorted.sort_by(f64::total_cmp);
    let quantiles = QUANTILES
        .iter()
        .map(|&qq| {
            let rank = ((qq * sorted.len() as f64).ceil() as usize).clamp(1, sorted.len());
            (qq, sorted[rank - 1])
        })
        .collect();
    Ok(LimsupReport {
        maxima,
        threshold,
        fraction_above: above as f64 / points as f64,
        quantiles,
    })
}

/// Parameters of the end-to-end bad-function construction on a cycle.
#[derive(Clone, Debug, PartialEq)]
pub struct BadFunctionSetup {
    pub size: u64,
    pub step: i64,
    pub family: FpFamily,
    pub p: f64,
    /// `Σ a_n μ(A_n)` of the laid-out function.
    pub target: f64,
    pub n_max: usize,
    /// Which peak block `A_n` drives the construction.
    pub level: usize,
    pub eta: f64,
    /// Longest bad window searched; `None` means half the cycle.
    pub window_cap: Option<u64>,
    pub points: u64,
    pub seed: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct StoppingSummary {
    /// Peak points whose backward stopping time is within the cap.
    pub stopped: usize,
    pub peak_points: usize,
    pub selected: usize,
    pub selected_length: u64,
    pub union_length: u64,
    /// `Σ |U_j| / N` over the Vitali selection.
    pub selected_mass: f64,
    /// `a_n μ(A_n) / 18`.
    pub mass_floor: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BadFunctionReport {
    pub size: u64,
    pub level: usize,
    pub a_n: f64,
    pub peak_mass: f64,
    pub eta: f64,
    pub delta: f64,
    pub tau: u64,
    pub min_window: u64,
    pub max_window: u64,
    /// Points with a bad window, as a share of the cycle.
    pub bad_mass: f64,
    pub stopping: StoppingSummary,
    pub cover: CoverPlan,
    pub scheme_len: usize,
    pub classes: usize,
    /// Every `L_i >= i^{1/(p-1)}` (checked while building).
    pub growth_ok: bool,
    pub monotone: bool,
    pub limsup: LimsupReport,
}

/// Lays out an `F_p` function, finds its bad windows, covers the cycle with
/// shifted copies of their start set, quantizes a scheme and measures how
/// many points see an average of at least `eta / 8` along it.
pub fn run_bad_function(setup: &BadFunctionSetup) -> Result<(BadFunctionReport, BadScheme)> {
    let c = CyclicSystem::new(setup.size, setup.step)?;
    let n = c.size();
    if setup.level == 0 || setup.level > setup.n_max {
        return Err(Error::invalid(format!(
            "level {} outside 1..={}",
            setup.level, setup.n_max
        )));
    }
    let (f, spec) = build_fp_function(&setup.family, setup.p, setup.target, setup.n_max, &c)?;
    let a_n = spec.heights[setup.level - 1];
    let tau = quantization_tau(setup.eta, setup.p, a_n)?;
    let orbit = orbit_order(&c, f.values());

    let block_lo = spec.block_starts[setup.level - 1];
    let block_hi = spec.block_starts[setup.level];
    let peak_positions: Vec<u64> = (block_lo..block_hi).map(|x| c.orbit_position(x)).collect();
    let stops = backward_stopping_times(&orbit, &peak_positions, 0.5, n)?;
    let intervals: Vec<(i64, u64)> = peak_positions
        .iter()
        .zip(&stops)
        .filter_map(|(&q, k)| k.map(|k| (q as i64 - k as i64 + 1, k)))
        .collect();
    let picked = if intervals.is_empty() {
        Vec::new()
    } else {
        vitali_disjointify(&intervals)?
    };
    let selected_length: u64 = picked.iter().map(|&i| intervals[i].1).sum();
    let stopping = StoppingSummary {
        stopped: intervals.len(),
        peak_points: peak_positions.len(),
        selected: picked.len(),
        selected_length,
        union_length: union_length(&intervals),
        selected_mass: selected_length as f64 / n as f64,
        mass_floor: a_n * spec.masses[setup.level - 1] / 18.0,
    };

    let max_window = setup.window_cap.unwrap_or(n / 2).clamp(1, n);
    let min_window = (setup.eta * a_n).floor() as u64 + 1;
    if min_window > max_window {
        return Err(Error::invalid(format!(
            "window cap {max_window} below eta * a_n = {}",
            setup.eta * a_n
        )));
    }
    let mut unrolled = orbit.clone();
    unrolled.extend_from_slice(&orbit[..max_window as usize - 1]);
    let windows: Vec<_> = bad_windows_by_start(&unrolled, setup.eta, min_window, max_window)?
        .into_iter()
        .filter(|w| w.start < n)
        .collect();
    if windows.is_empty() {
        return Err(Error::invalid(format!(
            "no window of length in [{min_window}, {max_window}] has mean above {}",
            setup.eta
        )));
    }
    let starts: Vec<u64> = windows.iter().map(|w| c.apply(0, w.start as i64)).collect();
    let cover = greedy_cover(&c, &[starts], tau as usize)?;
    let scheme = build_bad_scheme(&windows, setup.eta, setup.p, a_n, &cover)?;

    let system = System::from(c);
    let limsup = limsup_estimate(
        &system,
        &Observable::Step(f),
        scheme.pairs(),
        setup.points,
        setup.seed,
        setup.eta / 8.0,
    )?;
    let report = BadFunctionReport {
        size: n,
        level: setup.level,
        a_n,
        peak_mass: spec.masses[setup.level - 1],
        eta: setup.eta,
        delta: scheme.delta,
        tau,
        min_window,
        max_window,
        bad_mass: windows.len() as f64 / n as f64,
        stopping,
        cover,
        scheme_len: scheme.len(),
        classes: scheme.classes.len(),
        growth_ok: true,
        monotone: scheme.monotone_violations.is_empty(),
        limsup,
    };
    Ok((report, scheme))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::observables::{coboundary_from_transfer, GrowthFamily, MassRule, TransferSpec};
    use crate::systems::ShiftSystem;

    #[test]
    fn zero_function_has_zero_maxima() {
        let sys = System::from(CyclicSystem::unit(100).unwrap());
        let r = limsup_estimate(&sys, &Observable::Constant(0.0), &[(0, 3), (5, 7)], 50, 1, 0.1)
            .unwrap();
        assert!(r.maxima.iter().all(|&m| m == 0.0));
        assert_eq!(r.fraction_above, 0.0);
    }

    #[test]
    fn coboundary_maxima_shrink_with_length() {
        let step = TransferSpec::Step(crate::observables::StepObservable::new(
            (0..64).map(|i| ((i * 13) % 7) as f64 - 3.0).collect(),
        ));
        let cyc = System::from(CyclicSystem::new(64, 5).unwrap());
        let f = coboundary_from_transfer(&step, &cyc).unwrap();
        for &len in &[8u64, 32, 128, 512] {
            let pairs: Vec<(i64, u64)> = (0..4).map(|k| (k * 11, len + k as u64)).collect();
            let r = limsup_estimate(&cyc, &f, &pairs, 64, 2, 0.0).unwrap();
            let top = r.maxima.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            assert!(top <= 6.0 / len as f64 + 1e-12, "len {len}: {top}");
        }
    }

    #[test]
    fn generic_path_on_shift() {
        let sys = System::from(ShiftSystem::uniform(2, 9).unwrap());
        let r = limsup_estimate(&sys, &Observable::Constant(1.5), &[(-3, 4)], 10, 0, 1.0).unwrap();
        assert!(r.maxima.iter().all(|&m| (m - 1.5).abs() < 1e-15));
        assert_eq!(r.fraction_above, 1.0);
        assert_eq!(r.quantiles.len(), 5);
    }

    #[test]
    fn small_pipeline_runs() {
        let setup = BadFunctionSetup {
            size: 20_000,
            step: 1,
            family: FpFamily {
                growth: GrowthFamily::Exponential { rate: 1.0 },
                masses: MassRule::Critical,
            },
            p: 2.0,
            target: 0.5,
            n_max: 5,
            level: 5,
            eta: 0.5,
            window_cap: None,
            points: 200,
            seed: 3,
        };
        let (rep, scheme) = run_bad_function(&setup).unwrap();
        assert_eq!(rep.tau, 2);
        for (i, &(_, l)) in scheme.pairs().iter().enumerate() {
            assert!(l >= i as u64 + 1);
        }
        assert!(rep.cover.leftover.windows(2).all(|w| w[1] <= w[0]));
        assert!(rep.limsup.fraction_above > 0.0);
    }
}
