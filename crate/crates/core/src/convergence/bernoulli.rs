use super::iid::correlation;
use super::{tally_trials, validate_scan_inputs, ExceedanceScan};
use crate::convergence::scan::window_sums;
use crate::error::{Error, Result};
use crate::observables::{conditional_expectation, EncodedContinuousObservable, Observable};
use crate::systems::{PointHandle, ShiftSystem, System};
use serde::Serialize;

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct BoundChain {
    pub delta: f64,
    /// `Σ_m μ̂{|M(0, m) f̄| >= δ}`.
    pub direct: f64,
    /// `Σ_m μ̂{|M(0, m) Ē| >= δ/2}` with `Ē = E(f|P_n) - ∫f`.
    pub conditional: f64,
    /// `Σ_k Σ_m μ̂{|(1/m) Σ_{i < ⌈m/2n⌉} Ē(T^{2ni+k} x)| >= δ/(8n)}`.
    pub strided: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DecompositionReport {
    pub level: usize,
    pub mean: f64,
    /// `Lip(φ) 2^{-(n-1)} / 1.5`: points in one cell of `P_n` agree on
    /// `|k| <= n-1`, which pins their encodings that closely.
    pub approx_error_bound: f64,
    /// Largest `|f - E(f|P_n)|` seen at the sampled points.
    pub approx_error_observed: f64,
    /// Largest `|corr(Y_{k,0}, Y_{k,1})|` over `k < 2n`, where
    /// `Y_{k,i}(x) = E(f|P_n)(T^{2ni+k} x)`.
    pub stride_max_abs_correlation: f64,
    pub correlation_threshold: f64,
    pub bound_chain: Vec<BoundChain>,
}

/// Approximates a continuous observable on a Bernoulli shift by its
/// conditional expectation on `P_n` and scans both, together with the
/// `2n` strided IID sub-processes of the approximation.
///
/// `f` is centered by its exact mean before scanning.
#[allow(clippy::too_many_arguments)]
pub fn cofb_decomposition_scan(
    shift: &ShiftSystem,
    f: &EncodedContinuousObservable,
    n: usize,
    lengths: &[u64],
    deltas: &[f64],
    trials: u64,
    seed: u64,
    budget: u64,
) -> Result<(ExceedanceScan, DecompositionReport)> {
    validate_scan_inputs(deltas, lengths)?;
    if trials < 100 {
        return Err(Error::invalid("need at least 100 trials"));
    }
    let obs = Observable::Encoded(f.clone());
    let e = conditional_expectation(&obs, n, shift, budget)?;
    let mean = cylinder_mean(e.table(), e.radius(), shift);
    let system: System = shift.clone().into();
    let e_obs = Observable::Cylinder(e);
    let l_max = *lengths.last().unwrap();
    let stride = 2 * n as u64;
    let hi = i64::try_from(l_max + 2 * stride)
        .map_err(|_| Error::IndexOverflow(format!("length {l_max}")))?;

    let orbit = |t: u64| -> Result<(Vec<f64>, Vec<f64>)> {
        let x = system.sample_point(seed, t);
        let fv = system.orbit_values(&obs, &x, 1, l_max as i64)?;
        let ev = system.orbit_values(&e_obs, &x, 0, hi)?;
        Ok((fv, ev))
    };

    let direct = tally_trials(deltas, lengths, trials, |t| {
        let (fv, _) = orbit(t)?;
        let centered: Vec<f64> = fv.iter().map(|v| v - mean).collect();
        Ok(window_sums(&centered, lengths))
    })?;
    let scan = ExceedanceScan::from_counts(deltas, lengths, &direct, trials);

    let half: Vec<f64> = deltas.iter().map(|d| d / 2.0).collect();
    let conditional = tally_trials(&half, lengths, trials, |t| {
        let (_, ev) = orbit(t)?;
        let centered: Vec<f64> = ev[1..=l_max as usize].iter().map(|v| v - mean).collect();
        Ok(window_sums(&centered, lengths))
    })?;

    // Strided sub-sums, laid out as 2n consecutive blocks of one entry per
    // length; the comparison is against δ/(8n) times m.
    let fine: Vec<f64> = deltas.iter().map(|d| d / (8.0 * n as f64)).collect();
    let repeated: Vec<u64> = (0..stride).flat_map(|_| lengths.iter().copied()).collect();
    let strided = tally_trials(&fine, &repeated, trials, |t| {
        let (_, ev) = orbit(t)?;
        let mut out = Vec::with_capacity(repeated.len());
        for k in 0..stride {
            for &m in lengths {
                let terms = m.div_ceil(stride);
                let s: f64 = (0..terms)
                    .map(|i| ev[(stride * i + k) as usize] - mean)
                    .sum();
                out.push(s);
            }
        }
        Ok(out)
    })?;

    let n_terms = lengths.len();
    let t = trials as f64;
    let bound_chain = deltas
        .iter()
        .enumerate()
        .map(|(d, &delta)| BoundChain {
            delta,
            direct: direct.hits[d * n_terms..(d + 1) * n_terms].iter().sum::<u64>() as f64 / t,
            conditional: conditional.hits[d * n_terms..(d + 1) * n_terms]
                .iter()
                .sum::<u64>() as f64
                / t,
            strided: strided.hits[d * repeated.len()..(d + 1) * repeated.len()]
                .iter()
                .sum::<u64>() as f64
                / t,
        })
        .collect();

    let mut worst: f64 = 0.0;
    let mut y0 = vec![vec![0.0; trials as usize]; stride as usize];
    let mut y1 = vec![vec![0.0; trials as usize]; stride as usize];
    for tr in 0..trials {
        let x = system.sample_point(seed, tr);
        let PointHandle::Shift(_) = x else { unreachable!() };
        let (fv, ev) = orbit(tr)?;
        worst = worst.max((fv[0] - ev[1]).abs());
        for k in 0..stride as usize {
            y0[k][tr as usize] = ev[k];
            y1[k][tr as usize] = ev[stride as usize + k];
        }
    }
    let stride_max_abs_correlation = (0..stride as usize)
        .map(|k| correlation(&y0[k], &y1[k]).abs())
        .fold(0.0, f64::max);

    let level_bits = (n as i32 - 1).max(0);
    let report = DecompositionReport {
        level: n,
        mean,
        approx_error_bound: f.lipschitz() * 0.5f64.powi(level_bits) / 1.5,
        approx_error_observed: worst,
        stride_max_abs_correlation,
        correlation_threshold: 4.0 / t.sqrt(),
        bound_chain,
    };
    Ok((scan, report))
}

fn cylinder_mean(table: &[f64], radius: usize, shift: &ShiftSystem) -> f64 {
    let s = shift.alphabet();
    let len = 2 * radius + 1;
    let probs = shift.probs();
    table
        .iter()
        .enumerate()
        .map(|(mut idx, v)| {
            let mut w = 1.0;
            for _ in 0..len {
                w *= probs[idx % s];
                idx /= s;
            }
            w * v
        })
        .sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::observables::RealFunction;

    #[test]
    fn coordinate_function_decomposes() {
        let shift = ShiftSystem::uniform(2, 3).unwrap();
        let f = EncodedContinuousObservable::coordinate(8).unwrap();
        let lengths: Vec<u64> = (1..=64).collect();
        let (scan, rep) =
            cofb_decomposition_scan(&shift, &f, 4, &lengths, &[0.1, 0.2], 400, 1, 1 << 22)
                .unwrap();
        assert!(rep.approx_error_observed <= rep.approx_error_bound + 1e-12);
        assert!(rep.approx_error_bound <= 0.125);
        assert!(rep.stride_max_abs_correlation <= rep.correlation_threshold);
        // Mean of the truncated encoding of a fair coin sequence.
        let expected: f64 = (-8i32..=8).map(|k| 0.5 * 0.5f64.powi(k.abs() + 1)).sum::<f64>() / 1.5;
        assert!((rep.mean - expected).abs() < 1e-12);
        assert!(scan.partial_sums[0].last() >= scan.partial_sums[1].last());
        for b in &rep.bound_chain {
            assert!(b.direct >= 0.0 && b.strided >= b.conditional * 0.0);
        }
    }

    #[test]
    fn constant_scans_to_zero() {
        let shift = ShiftSystem::uniform(3, 0).unwrap();
        let f = EncodedContinuousObservable::new(RealFunction::Polynomial(vec![2.0]), 2).unwrap();
        let (scan, rep) =
            cofb_decomposition_scan(&shift, &f, 2, &[1, 2, 3], &[0.5], 100, 0, 1 << 20).unwrap();
        assert!(scan.estimates[0].iter().all(|&e| e == 0.0));
        assert!((rep.mean - 2.0).abs() < 1e-12);
        assert_eq!(rep.bound_chain[0].strided, 0.0);
    }
}
