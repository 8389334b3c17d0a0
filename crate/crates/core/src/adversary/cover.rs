use crate::error::{Error, Result};
use crate::rng::{self, stream};
use crate::systems::CyclicSystem;
use rustfft::num_complex::Complex;
use rustfft::FftPlanner;
use serde::Serialize;

/// Largest cycle on which every shift is scored (by FFT cross-correlation).
pub const EXHAUSTIVE_MAX: u64 = 1 << 22;
/// Shifts scored per step on larger cycles.
pub const SAMPLED_SHIFTS: u64 = 1 << 14;

/// Shifts `m_k` chosen so that `∪ T^{m_k} E_k` eats the space.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CoverPlan {
    /// Nondecreasing shifts, one per step.
    pub shifts: Vec<u64>,
    /// Uncovered points after each step.
    pub leftover_counts: Vec<u64>,
    /// Uncovered mass after each step.
    pub leftover: Vec<f64>,
    /// `Π_{i<=k} (1 - μ(E_i))`.
    pub product_bound: Vec<f64>,
    /// Whether every shift was scored at every step.
    pub exhaustive: bool,
    /// Points of the cycle, by orbit position, covered at the end.
    #[serde(skip)]
    pub covered: Vec<bool>,
}

/// Greedy covering: step `k` uses `sets[k % sets.len()]` (point indices of
/// the cycle) and picks the shift `m` maximizing `|T^m E ∩ uncovered|`,
/// smallest `m` on ties.
///
/// Summing the overlap over all `N` shifts gives `|E| |uncovered|`, so the
/// best shift leaves at most `(1 - μ(E)) |uncovered|`; on exhaustively
/// scanned cycles this is checked in integers at every step. Shifts are
/// lifted by multiples of `N` to keep the sequence nondecreasing.
pub fn greedy_cover(system: &CyclicSystem, sets: &[Vec<u64>], steps: usize) -> Result<CoverPlan> {
    let n = system.size();
    if sets.is_empty() && steps > 0 {
        return Err(Error::invalid("cover needs at least one set"));
    }
    let mut members: Vec<Vec<usize>> = Vec::with_capacity(sets.len());
    for (i, set) in sets.iter().enumerate() {
        if set.is_empty() {
            return Err(Error::invalid(format!("set {i} is empty")));
        }
        let mut pos = Vec::with_capacity(set.len());
        let mut seen = vec![false; n as usize];
        for &x in set {
            if x >= n {
                return Err(Error::invalid(format!("point {x} outside cycle of {n}")));
            }
            let p = system.orbit_position(x) as usize;
            if !seen[p] {
                seen[p] = true;
                pos.push(p);
            }
        }
        members.push(pos);
    }

    let exhaustive = n <= EXHAUSTIVE_MAX;
    let mut scorer = exhaustive.then(|| Correlator::new(n as usize));
    let mut covered = vec![false; n as usize];
    let mut uncovered = n;
    let mut plan = CoverPlan {
        shifts: Vec::with_capacity(steps),
        leftover_counts: Vec::with_capacity(steps),
        leftover: Vec::with_capacity(steps),
        product_bound: Vec::with_capacity(steps),
        exhaustive,
        covered: Vec::new(),
    };
    let mut bound = 1.0;
    let mut last_shift = 0u64;
    for k in 0..steps {
        let set = &members[k % members.len()];
        let m = match scorer.as_mut() {
            Some(c) => c.best_shift(&covered, set),
            None => sampled_best_shift(&covered, set, n, k as u64),
        };
        let mut gained = 0u64;
        for &p in set {
            let q = (p + m as usize) % n as usize;
            if !covered[q] {
                covered[q] = true;
                gained += 1;
            }
        }
        let before = uncovered;
        uncovered -= gained;
        if exhaustive
            && (uncovered as u128) * (n as u128) > (before as u128) * ((n - set.len() as u64) as u128)
        {
            return Err(Error::Invariant(format!(
                "cover step {k}: {uncovered} left of {before}, set size {}",
                set.len()
            )));
        }
        let lifted = if k == 0 {
            m
        } else {
            let base = last_shift - last_shift % n + m;
            if base < last_shift { base + n } else { base }
        };
        last_shift = lifted;
        bound *= 1.0 - set.len() as f64 / n as f64;
        plan.shifts.push(lifted);
        plan.leftover_counts.push(uncovered);
        plan.leftover.push(uncovered as f64 / n as f64);
        plan.product_bound.push(bound);
    }
    plan.covered = covered;
    Ok(plan)
}

/// Overlap counts `c[m] = Σ_p U[p] E[p - m]` for all `m` via FFT.
struct Correlator {
    n: usize,
    forward: std::sync::Arc<dyn rustfft::Fft<f64>>,
    inverse: std::sync::Arc<dyn rustfft::Fft<f64>>,
}

impl Correlator {
    fn new(n: usize) -> Self {
        let mut planner = FftPlanner::new();
        Self {
            n,
            forward: planner.plan_fft_forward(n),
            inverse: planner.plan_fft_inverse(n),
        }
    }

    fn best_shift(&mut self, covered: &[bool], set: &[usize]) -> u64 {
        let n = self.n;
        let mut u: Vec<Complex<f64>> = covered
            .iter()
            .map(|&c| Complex::new(if c { 0.0 } else { 1.0 }, 0.0))
            .collect();
        let mut e = vec![Complex::new(0.0, 0.0); n];
        for &p in set {
            e[p].re = 1.0;
        }
        self.forward.process(&mut u);
        self.forward.process(&mut e);
        for (a, b) in u.iter_mut().zip(&e) {
            *a *= b.conj();
        }
        self.inverse.process(&mut u);
        let mut best = (0i64, 0usize);
        for (m, c) in u.iter().enumerate() {
            let count = (c.re / n as f64).round() as i64;
            if count > best.0 {
                best = (count, m);
            }
        }
        best.1 as u64
    }
}

fn sampled_best_shift(covered: &[bool], set: &[usize], n: u64, step: u64) -> u64 {
    let mut best = (0u64, 0u64);
    for s in 0..SAMPLED_SHIFTS {
        let m = rng::index_below(rng::mix3(stream::COVER ^ n, step, s), n);
        let count = set
            .iter()
            .filter(|&&p| !covered[(p + m as usize) % n as usize])
            .count() as u64;
        if count > best.0 || (count == best.0 && m < best.1) {
            best = (count, m);
        }
    }
    best.1
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn whole_space_in_one_step() {
        let c = CyclicSystem::unit(64).unwrap();
        let plan = greedy_cover(&c, &[(0..64).collect()], 1).unwrap();
        assert_eq!(plan.leftover_counts, vec![0]);
        assert_eq!(plan.shifts, vec![0]);
    }

    #[test]
    fn halves_meet_product_bound() {
        let c = CyclicSystem::new(1000, 7).unwrap();
        let sets: Vec<Vec<u64>> = (0..6u64)
            .map(|k| {
                let mut xs: Vec<u64> = (0..1000).collect();
                xs.sort_by_key(|&x| rng::mix2(k, x));
                xs.truncate(500);
                xs
            })
            .collect();
        let plan = greedy_cover(&c, &sets, 6).unwrap();
        for (k, &left) in plan.leftover_counts.iter().enumerate() {
            assert!(left as f64 <= 1000.0 * 0.5f64.powi(k as i32 + 1));
        }
        assert!(plan.leftover.windows(2).all(|w| w[1] <= w[0]));
        assert!(plan.shifts.windows(2).all(|w| w[1] >= w[0]));
    }

    #[test]
    fn fft_choice_matches_direct_count() {
        let n = 97usize;
        let c = CyclicSystem::new(n as u64, 5).unwrap();
        let sets = vec![vec![0, 3, 4, 10, 50], vec![1, 2, 60], vec![7, 8, 9, 11]];
        let plan = greedy_cover(&c, &sets, 5).unwrap();
        // Replay with a direct O(N |E|) scan.
        let mut covered = vec![false; n];
        for (k, &m) in plan.shifts.iter().enumerate() {
            let set: Vec<usize> = sets[k % 3].iter().map(|&x| c.orbit_position(x) as usize).collect();
            let score = |m: usize| set.iter().filter(|&&p| !covered[(p + m) % n]).count();
            let best = (0..n).max_by_key(|&m| (score(m), std::cmp::Reverse(m))).unwrap();
            assert_eq!(m as usize % n, best, "step {k}");
            for &p in &set {
                covered[(p + best) % n] = true;
            }
        }
    }

    #[test]
    fn empty_set_rejected() {
        let c = CyclicSystem::unit(8).unwrap();
        assert!(greedy_cover(&c, &[vec![]], 1).is_err());
    }
}
