use super::StepObservable;
use crate::error::{Error, Result};
use crate::systems::CyclicSystem;
use std::f64::consts::PI;

/// Peak heights `a_n > 2`.
#[derive(Clone, Debug, PartialEq)]
pub enum GrowthFamily {
    /// `a_n = exp(rate * n)`.
    Exponential { rate: f64 },
    /// `a_1, a_2, ..` listed.
    Explicit(Vec<f64>),
}

impl GrowthFamily {
    pub fn height(&self, n: usize) -> Result<f64> {
        let a = match self {
            GrowthFamily::Exponential { rate } => (rate * n as f64).exp(),
            GrowthFamily::Explicit(v) => *v.get(n - 1).ok_or_else(|| {
                Error::invalid(format!("explicit growth sequence has no term {n}"))
            })?,
        };
        if !(a > 2.0 && a.is_finite()) {
            return Err(Error::invalid(format!("a_{n} = {a} must be a finite real > 2")));
        }
        Ok(a)
    }
}

/// Unscaled masses of the peak sets.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum MassRule {
    /// `n / a_n^p`, so `a_n^p μ(A_n)` grows linearly in `n`.
    Critical,
    /// `3 / (π² a_n n²)`, so `Σ a_n μ(A_n)` converges independently of `a_n`.
    PolynomialRate,
}

impl MassRule {
    fn raw(&self, n: usize, a: f64, p: f64) -> f64 {
        let n = n as f64;
        match self {
            MassRule::Critical => n / a.powf(p),
            MassRule::PolynomialRate => 3.0 / (PI * PI * a * n * n),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct FpFamily {
    pub growth: GrowthFamily,
    pub masses: MassRule,
}

/// What was laid out on the cycle: peaks `a_n` on `A_n`, `-1` on `B`.
#[derive(Clone, Debug, PartialEq)]
pub struct FpSpec {
    pub heights: Vec<f64>,
    /// Scaled masses before quantization.
    pub requested_masses: Vec<f64>,
    /// Masses actually laid out, multiples of `1/N`.
    pub masses: Vec<f64>,
    pub counts: Vec<u64>,
    pub mass_b: f64,
    pub p: f64,
    pub n_max: usize,
    pub scale: f64,
    pub target: f64,
    pub quantization_error: f64,
    /// First index of each block `A_n` on the cycle, then of `B`.
    pub block_starts: Vec<u64>,
}

impl FpSpec {
    /// `a_n^p μ(A_n)` for `n = 1..=n_max`.
    pub fn peak_weights(&self) -> Vec<f64> {
        self.weights(self.p)
    }

    fn weights(&self, q: f64) -> Vec<f64> {
        self.heights
            .iter()
            .zip(&self.masses)
            .map(|(a, m)| a.powf(q) * m)
            .collect()
    }

    /// Partial sums of `a_n^q μ(A_n)`, the peak part of `∫ |f|^q`.
    pub fn moment_partial_sums(&self, q: f64) -> Vec<f64> {
        self.weights(q)
            .into_iter()
            .scan(0.0, |acc, w| {
                *acc += w;
                Some(*acc)
            })
            .collect()
    }

    /// `Σ a_n μ(A_n)` over the laid-out prefix.
    pub fn positive_mass(&self) -> f64 {
        self.heights.iter().zip(&self.masses).map(|(a, m)| a * m).sum()
    }

    /// Whether `a_n^p μ(A_n)` at `n_max` exceeds `factor` times its value at
    /// `n_max / 2`: the stored prefix's witness of unbounded peak weight.
    pub fn escapes(&self, factor: f64) -> bool {
        let w = self.peak_weights();
        if self.n_max < 2 {
            return false;
        }
        w[self.n_max - 1] > factor * w[self.n_max / 2 - 1]
    }
}

/// Lays out a mean-zero member of the `F_p` family on a cycle.
///
/// Raw masses from `family.masses` are scaled by `c` with
/// `Σ a_n μ(A_n) = target`, then floored to whole points. Blocks
/// `A_1, .., A_{n_max}` are contiguous from index 0, followed by `B`:
/// `⌊S⌋` points of value `-1` and one point of value `-frac(S)` where
/// `S = Σ a_n |A_n|`, so the cycle sum vanishes.
pub fn build_fp_function(
    family: &FpFamily,
    p: f64,
    target: f64,
    n_max: usize,
    system: &CyclicSystem,
) -> Result<(StepObservable, FpSpec)> {
    if !(p > 1.0) {
        return Err(Error::invalid(format!("exponent p = {p} must exceed 1")));
    }
    if !(target > 0.0 && target <= 0.5) {
        return Err(Error::invalid(format!("target mass {target} not in (0, 1/2]")));
    }
    let size = system.size();
    let heights = (1..=n_max)
        .map(|n| family.growth.height(n))
        .collect::<Result<Vec<_>>>()?;
    let raw: Vec<f64> = heights
        .iter()
        .enumerate()
        .map(|(j, &a)| family.masses.raw(j + 1, a, p))
        .collect();
    let weighted: f64 = heights.iter().zip(&raw).map(|(a, r)| a * r).sum();
    let scale = if n_max == 0 { 0.0 } else { target / weighted };
    let requested: Vec<f64> = raw.iter().map(|r| scale * r).collect();

    let mut counts = Vec::with_capacity(n_max);
    for (j, &m) in requested.iter().enumerate() {
        let c = (m * size as f64).floor() as u64;
        if c == 0 {
            return Err(Error::ResolutionTooCoarse {
                index: j + 1,
                mass: m,
                cells: size,
            });
        }
        counts.push(c);
    }
    let masses: Vec<f64> = counts.iter().map(|&c| c as f64 / size as f64).collect();
    let s: f64 = heights.iter().zip(&counts).map(|(a, &c)| a * c as f64).sum();
    let whole = s.floor() as u64;
    let frac = s - whole as f64;
    let b_points = whole + u64::from(frac > 0.0);
    let used: u64 = counts.iter().sum::<u64>() + b_points;
    if used > size {
        return Err(Error::invalid(format!(
            "layout needs {used} points, cycle has {size}"
        )));
    }

    let mut values = vec![0.0; size as usize];
    let mut block_starts = Vec::with_capacity(n_max + 1);
    let mut at = 0usize;
    for (&a, &c) in heights.iter().zip(&counts) {
        block_starts.push(at as u64);
        values[at..at + c as usize].fill(a);
        at += c as usize;
    }
    block_starts.push(at as u64);
    values[at..at + whole as usize].fill(-1.0);
    if frac > 0.0 {
        values[at + whole as usize] = -frac;
    }

    let quantization_error = requested
        .iter()
        .zip(&masses)
        .map(|(r, m)| (r - m).abs())
        .fold(0.0, f64::max);
    let spec = FpSpec {
        heights,
        requested_masses: requested,
        masses,
        counts,
        mass_b: s / size as f64,
        p,
        n_max,
        scale,
        target,
        quantization_error,
        block_starts,
    };
    Ok((StepObservable::new(values), spec))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::observables::neumaier_sum;

    fn critical() -> FpFamily {
        FpFamily {
            growth: GrowthFamily::Exponential { rate: 1.0 },
            masses: MassRule::Critical,
        }
    }

    #[test]
    fn scaling_constant_matches_partial_sum() {
        let sys = CyclicSystem::unit(200_000).unwrap();
        let (f, spec) = build_fp_function(&critical(), 2.0, 0.5, 6, &sys).unwrap();
        let oracle = 0.5 / (1..=6).map(|n| n as f64 * (-(n as f64)).exp()).sum::<f64>();
        assert!((spec.scale - oracle).abs() < 1e-14 * oracle);
        let mean = neumaier_sum(f.values().iter().copied()) / 200_000.0;
        assert!(mean.abs() < 1e-12, "mean {mean}");
        assert!(spec.positive_mass() <= 0.5);
        assert!((spec.mass_b - spec.positive_mass()).abs() < 1e-12);
        assert!(spec.quantization_error <= 1.0 / 200_000.0);
    }

    #[test]
    fn names_first_coarse_block() {
        let sys = CyclicSystem::unit(200_000).unwrap();
        let err = build_fp_function(&critical(), 2.0, 0.5, 7, &sys).unwrap_err();
        assert!(matches!(err, Error::ResolutionTooCoarse { index: 7, .. }), "{err}");
    }

    #[test]
    fn empty_family_is_zero() {
        let sys = CyclicSystem::unit(10).unwrap();
        let (f, spec) = build_fp_function(&critical(), 2.0, 0.5, 0, &sys).unwrap();
        assert!(f.values().iter().all(|&v| v == 0.0));
        assert!(spec.heights.is_empty());
    }

    #[test]
    fn lower_moments_converge_for_critical_masses() {
        let sys = CyclicSystem::unit(1 << 20).unwrap();
        let (_, spec) = build_fp_function(&critical(), 2.0, 0.5, 7, &sys).unwrap();
        // a_n^{1.5} μ(A_n) ∝ n e^{-n/2}: term ratios settle below 1.
        let w = spec.weights(1.5);
        for n in 3..w.len() {
            assert!(w[n] < w[n - 1], "term {n} did not shrink");
        }
        // a_n^2 μ(A_n) ∝ n keeps growing.
        let w2 = spec.peak_weights();
        assert!(w2.windows(2).all(|p| p[1] > p[0]));
    }

    #[test]
    fn polynomial_rate_escapes() {
        let sys = CyclicSystem::unit(1 << 22).unwrap();
        let fam = FpFamily {
            growth: GrowthFamily::Exponential { rate: 1.0 },
            masses: MassRule::PolynomialRate,
        };
        let (_, spec) = build_fp_function(&fam, 2.0, 0.5, 8, &sys).unwrap();
        assert!(spec.escapes(10.0));
    }

    #[test]
    fn rejects_bad_parameters() {
        let sys = CyclicSystem::unit(100).unwrap();
        assert!(build_fp_function(&critical(), 1.0, 0.5, 1, &sys).is_err());
        assert!(build_fp_function(&critical(), 2.0, 0.6, 1, &sys).is_err());
        let small = FpFamily {
            growth: GrowthFamily::Explicit(vec![2.0]),
            masses: MassRule::Critical,
        };
        assert!(build_fp_function(&small, 2.0, 0.5, 1, &sys).is_err());
    }
}
