//! Cross-sections of unions of 90° cones.
//!
//! The cone over a window `(v, L)` is `{(x, y) : y >= L, |x - v| <= y - L}`.
//! Its slice at height `λ` is `[v - (λ - L), v + (λ - L)]`, and `C(λ)` is the
//! length of the union of all slices. A scheme satisfies the cone bound with
//! constant `K` when `C(λ) <= K λ` for every `λ`; a finite prefix can only
//! give evidence for or against that, so profiles carry a verdict string.

use crate::averaging::WindowScheme;
use crate::error::{Error, Result};
use serde::Serialize;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct Cone {
    pub v: i64,
    pub len: u64,
}

impl Cone {
    pub fn new(v: i64, len: u64) -> Self {
        Self { v, len }
    }

    /// The slice at height `lambda`, if the cone reaches it.
    pub fn slice(&self, lambda: f64) -> Option<(f64, f64)> {
        let h = lambda - self.len as f64;
        (h >= 0.0).then(|| (self.v as f64 - h, self.v as f64 + h))
    }
}

pub fn cones_of(scheme: &WindowScheme) -> Vec<Cone> {
    scheme.pairs().iter().map(|&(v, l)| Cone::new(v, l)).collect()
}

/// `C(λ)` by sort-and-sweep over the slices. Boundaries count as inside,
/// which changes nothing measure-theoretically.
pub fn cross_section_length(cones: &[Cone], lambda: f64) -> f64 {
    let mut slices: Vec<(f64, f64)> = cones.iter().filter_map(|c| c.slice(lambda)).collect();
    union_length(&mut slices)
}

/// Total length of a union of closed intervals; sorts `intervals` in place.
pub fn union_length(intervals: &mut [(f64, f64)]) -> f64 {
    intervals.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut total = 0.0;
    let mut current: Option<(f64, f64)> = None;
    for &(a, b) in intervals.iter() {
        current = match current {
            Some((s, e)) if a <= e => Some((s, e.max(b))),
            Some((s, e)) => {
                total += e - s;
                Some((a, b))
            }
            None => Some((a, b)),
        };
    }
    if let Some((s, e)) = current {
        total += e - s;
    }
    total
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ConeVerdict {
    /// The ratio in the last decade of the range is more than 1.5 times the
    /// largest ratio seen below a tenth of the range.
    GrowthDetected,
    BoundedOnRange,
}

impl ConeVerdict {
    pub fn as_str(&self) -> &'static str {
        match self {
            ConeVerdict::GrowthDetected => "growth-detected",
            ConeVerdict::BoundedOnRange => "bounded-on-range",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ConeProfile {
    pub lambdas: Vec<f64>,
    pub c_values: Vec<f64>,
    pub max_ratio: f64,
    pub witness_lambda: f64,
    pub verdict: ConeVerdict,
}

impl ConeProfile {
    pub fn ratios(&self) -> impl Iterator<Item = f64> + '_ {
        self.lambdas.iter().zip(&self.c_values).map(|(l, c)| c / l)
    }

    /// `C(λ)/λ` at the grid point nearest to `lambda`.
    pub fn ratio_near(&self, lambda: f64) -> f64 {
        let j = self
            .lambdas
            .iter()
            .enumerate()
            .min_by(|a, b| (a.1 - lambda).abs().total_cmp(&(b.1 - lambda).abs()))
            .map(|(j, _)| j)
            .unwrap_or(0);
        self.c_values[j] / self.lambdas[j]
    }

    /// Largest ratio with `λ` in `[lo, hi]`.
    pub fn max_ratio_in(&self, lo: f64, hi: f64) -> f64 {
        self.lambdas
            .iter()
            .zip(self.ratios())
            .filter(|(l, _)| **l >= lo && **l <= hi)
            .map(|(_, r)| r)
            .fold(0.0, f64::max)
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LambdaGrid {
    pub per_decade: usize,
    /// Defaults to the smallest length.
    pub lambda_min: Option<f64>,
    /// Defaults to the largest length, the highest `λ` at which the prefix
    /// determines `C(λ)` exactly.
    pub lambda_max: Option<f64>,
}

impl Default for LambdaGrid {
    fn default() -> Self {
        Self {
            per_decade: 64,
            lambda_min: None,
            lambda_max: None,
        }
    }
}

/// Log-spaced fill plus every length breakpoint plus the heights where
/// neighbouring slices (in center order) first touch. Between such events
/// `C` is affine in `λ`, so `C(λ)/λ` is monotone there.
fn grid_points(cones: &[Cone], lo: f64, hi: f64, per_decade: usize) -> Vec<f64> {
    let mut pts = Vec::new();
    if hi > lo {
        let steps = ((hi / lo).log10() * per_decade as f64).ceil() as usize;
        for k in 0..=steps {
            pts.push((lo * 10f64.powf(k as f64 / per_decade as f64)).min(hi));
        }
    }
    pts.push(lo);
    pts.push(hi);
    pts.extend(cones.iter().map(|c| c.len as f64));
    let mut by_v: Vec<&Cone> = cones.iter().collect();
    by_v.sort_by_key(|c| (c.v, c.len));
    for w in by_v.windows(2) {
        let gap = (w[1].v as f64 - w[0].v as f64).abs();
        pts.push((gap + w[0].len as f64 + w[1].len as f64) / 2.0);
    }
    pts.retain(|&l| l >= lo && l <= hi && l > 0.0);
    pts.sort_by(f64::total_cmp);
    pts.dedup();
    pts
}

fn profile_of(cones: &[Cone], grid: &LambdaGrid) -> Result<ConeProfile> {
    if cones.is_empty() {
        return Err(Error::invalid("profile needs at least one cone"));
    }
    let lo = grid
        .lambda_min
        .unwrap_or_else(|| cones.iter().map(|c| c.len).min().unwrap() as f64);
    let hi = grid
        .lambda_max
        .unwrap_or_else(|| cones.iter().map(|c| c.len).max().unwrap() as f64);
    if !(lo > 0.0 && hi >= lo) {
        return Err(Error::invalid(format!("bad λ range [{lo}, {hi}]")));
    }
    let lambdas = grid_points(cones, lo, hi, grid.per_decade.max(1));
    let c_values: Vec<f64> = lambdas
        .iter()
        .map(|&l| cross_section_length(cones, l))
        .collect();
    let (mut max_ratio, mut witness_lambda) = (0.0, lambdas[0]);
    for (l, c) in lambdas.iter().zip(&c_values) {
        if c / l > max_ratio {
            max_ratio = c / l;
            witness_lambda = *l;
        }
    }
    let mut profile = ConeProfile {
        lambdas,
        c_values,
        max_ratio,
        witness_lambda,
        verdict: ConeVerdict::BoundedOnRange,
    };
    let early = profile.max_ratio_in(lo, hi / 10.0);
    let late = profile.max_ratio_in(hi / 10.0, hi);
    if early > 0.0 && late > 1.5 * early {
        profile.verdict = ConeVerdict::GrowthDetected;
    }
    Ok(profile)
}

/// `C(λ)/λ` over a grid for the first `n_max` pairs of `scheme`.
pub fn ratio_profile(scheme: &WindowScheme, n_max: usize, grid: &LambdaGrid) -> Result<ConeProfile> {
    if n_max == 0 || n_max > scheme.len() {
        return Err(Error::invalid(format!(
            "n_max = {n_max} outside the generated prefix 1..={}",
            scheme.len()
        )));
    }
    profile_of(&cones_of(scheme)[..n_max], grid)
}

/// Profile of an arbitrary cone set.
pub fn cone_set_profile(cones: &[Cone], grid: &LambdaGrid) -> Result<ConeProfile> {
    profile_of(cones, grid)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FailingOffsets {
    pub offsets: Vec<i64>,
    pub witness_lambda: f64,
    pub achieved_ratio: f64,
}

/// Offsets `v_n` that make the given lengths violate `C(λ) <= K λ`.
///
/// Lengths are split into consecutive groups of sizes 1, 2, 3, ... Group
/// `k` gets witness height `λ_k = 2 L_last`, so each of its slices has
/// length at least `λ_k`. Its centers are spaced more than `2 λ_k` apart,
/// making its slices pairwise disjoint at `λ_k`, hence `C(λ_k) >= k λ_k`.
/// The achieved ratio is measured, not assumed.
pub fn failing_offsets(lengths: &[u64], k_target: f64) -> Result<FailingOffsets> {
    if lengths.is_empty() {
        return Err(Error::invalid("no lengths given"));
    }
    if lengths.windows(2).any(|w| w[1] <= w[0]) || lengths[0] == 0 {
        return Err(Error::invalid("lengths must be positive and strictly increasing"));
    }
    let overflow = || Error::IndexOverflow("offsets exceed 64 bits".into());
    let mut offsets = Vec::with_capacity(lengths.len());
    let mut witnesses = Vec::new();
    let mut cursor: i64 = 0;
    let mut start = 0usize;
    let mut k = 1usize;
    while start < lengths.len() {
        let end = (start + k).min(lengths.len());
        let lambda = 2 * lengths[end - 1];
        let gap = i64::try_from(2 * lambda + 1).map_err(|_| overflow())?;
        for _ in start..end {
            offsets.push(cursor);
            cursor = cursor.checked_add(gap).ok_or_else(overflow)?;
        }
        witnesses.push(lambda as f64);
        start = end;
        k += 1;
    }
    let cones: Vec<Cone> = offsets
        .iter()
        .zip(lengths)
        .map(|(&v, &l)| Cone::new(v, l))
        .collect();
    let (mut best, mut witness) = (0.0, witnesses[0]);
    for &l in &witnesses {
        let r = cross_section_length(&cones, l) / l;
        if r > best {
            best = r;
            witness = l;
        }
    }
    if best < k_target {
        return Err(Error::TargetUnreachable {
            target: k_target,
            best,
        });
    }
    Ok(FailingOffsets {
        offsets,
        witness_lambda: witness,
        achieved_ratio: best,
    })
}

/// Greedy subsequence with `C(λ)/λ <= k` on the tested grid.
///
/// Index `n` (1-based) is kept if the profile of the kept cones plus cone
/// `n`, evaluated up to twice the larger of the tallest length and the
/// spread of offsets (beyond which slices have merged and the ratio falls
/// toward 2), stays at or below `k`.
pub fn good_subsequence(scheme: &WindowScheme, k: f64, n_max: usize) -> Result<Vec<usize>> {
    if !(k > 2.0) {
        return Err(Error::invalid(format!("K = {k} must exceed 2")));
    }
    if n_max > scheme.len() {
        return Err(Error::invalid("n_max beyond the generated prefix"));
    }
    let all = cones_of(scheme);
    let mut kept: Vec<Cone> = Vec::new();
    let mut indices = Vec::new();
    for (j, cone) in all.iter().take(n_max).enumerate() {
        kept.push(*cone);
        if max_ratio_closed(&kept)? <= k {
            indices.push(j + 1);
        } else {
            kept.pop();
        }
    }
    Ok(indices)
}

/// Largest `C(λ)/λ` over heights where the whole set matters.
pub fn max_ratio_closed(cones: &[Cone]) -> Result<f64> {
    let lo = cones.iter().map(|c| c.len).min().unwrap_or(1) as f64;
    let tallest = cones.iter().map(|c| c.len).max().unwrap_or(1) as f64;
    let vmin = cones.iter().map(|c| c.v).min().unwrap_or(0) as f64;
    let vmax = cones.iter().map(|c| c.v).max().unwrap_or(0) as f64;
    let hi = 2.0 * tallest.max(vmax - vmin).max(lo);
    let grid = LambdaGrid {
        per_decade: 64,
        lambda_min: Some(lo),
        lambda_max: Some(hi),
    };
    Ok(profile_of(cones, &grid)?.max_ratio)
}
