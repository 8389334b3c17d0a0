use super::{BadWindow, CoverPlan};
use crate::averaging::WindowScheme;
use crate::error::{Error, Result};
use serde::Serialize;

/// Most pairs a single quantized scheme may emit.
pub const PAIR_BUDGET: u128 = 1 << 26;

/// The finite moving average built from quantized bad windows.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BadScheme {
    /// `(v_i, L_i)` for `i = 1..=t*tau`.
    pub pairs: Vec<(i64, u64)>,
    pub eta: f64,
    pub p: f64,
    pub a_n: f64,
    /// `(eta^2 / 16)^{1/(p-1)}`.
    pub delta: f64,
    /// `floor((a_n delta)^{p-1})`.
    pub tau: u64,
    /// Quantization classes `r_1 < .. < r_t`.
    pub classes: Vec<u64>,
    /// Indices `i` (1-based) with `L_{i+1} <= L_i`. Always empty for `p <= 2`.
    pub monotone_violations: Vec<usize>,
}

impl BadScheme {
    pub fn pairs(&self) -> &[(i64, u64)] {
        &self.pairs
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    /// As a [`WindowScheme`]; fails when lengths are not strictly increasing.
    pub fn to_window_scheme(&self) -> Result<WindowScheme> {
        WindowScheme::explicit(self.pairs.clone())
    }
}

/// `floor((a_n delta)^{p-1})` with `delta = (eta^2 / 16)^{1/(p-1)}`; zero
/// is an error.
pub fn quantization_tau(eta: f64, p: f64, a_n: f64) -> Result<u64> {
    let delta = (eta * eta / 16.0).powf(1.0 / (p - 1.0));
    let value = (a_n * delta).powf(p - 1.0);
    if !(value >= 1.0) {
        return Err(Error::QuantizationTooSmall { value });
    }
    Ok(value.floor() as u64)
}

/// `min { r >= 1 : scale * r^{1/(p-1)} >= len }`.
pub fn quantization_class(len: u64, scale: f64, p: f64) -> u64 {
    let e = 1.0 / (p - 1.0);
    let reaches = |r: u64| scale * (r as f64).powf(e) >= len as f64;
    let mut r = ((len as f64 / scale).powf(p - 1.0).ceil() as u64).max(1);
    while r > 1 && reaches(r - 1) {
        r -= 1;
    }
    while !reaches(r) {
        r += 1;
    }
    r
}

/// Quantizes window lengths into classes and emits, for class `j` and shift
/// index `k < tau`, the pair
/// `v_{j tau - k} = -m_k - 1`,
/// `L_{j tau - k} = ceil(a_n delta r_j^{1/(p-1)}) + ceil(eta^2 a_n^{p-1} / 8) - k`.
///
/// The offset reads the window from `T^{-m_k} x`, the point that the cover
/// step `k` moved onto `x`. Every emitted `L_i >= i^{1/(p-1)}` is checked.
pub fn build_bad_scheme(
    windows: &[BadWindow],
    eta: f64,
    p: f64,
    a_n: f64,
    cover: &CoverPlan,
) -> Result<BadScheme> {
    if !(p > 1.0 && p.is_finite()) {
        return Err(Error::invalid(format!("exponent p = {p} must exceed 1")));
    }
    if !(eta > 0.0 && eta < 1.0) {
        return Err(Error::invalid(format!("η = {eta} not in (0, 1)")));
    }
    if !(a_n > 0.0 && a_n.is_finite()) {
        return Err(Error::invalid(format!("peak height {a_n} must be positive")));
    }
    if windows.is_empty() {
        return Err(Error::invalid("no bad windows to quantize"));
    }
    let delta = (eta * eta / 16.0).powf(1.0 / (p - 1.0));
    let scale = a_n * delta;
    let tau = quantization_tau(eta, p, a_n)?;
    if (cover.shifts.len() as u64) < tau {
        return Err(Error::invalid(format!(
            "cover has {} shifts, quantization needs tau = {tau}",
            cover.shifts.len()
        )));
    }

    let mut classes: Vec<u64> = windows
        .iter()
        .map(|w| quantization_class(w.len, scale, p))
        .collect();
    classes.sort_unstable();
    classes.dedup();
    let t = classes.len() as u64;
    let total = t as u128 * tau as u128;
    if total > PAIR_BUDGET {
        return Err(Error::BudgetExceeded {
            needed: total,
            budget: PAIR_BUDGET,
        });
    }

    let pad = (eta * eta * a_n.powf(p - 1.0) / 8.0).ceil() as u64;
    let e = 1.0 / (p - 1.0);
    let mut offsets = Vec::with_capacity(tau as usize);
    for &m in &cover.shifts[..tau as usize] {
        let m = i64::try_from(m).map_err(|_| Error::IndexOverflow(format!("shift {m}")))?;
        offsets.push(-m - 1);
    }
    let mut pairs = Vec::with_capacity(total as usize);
    for i in 1..=t * tau {
        let j = i.div_ceil(tau);
        let k = j * tau - i;
        let r = classes[(j - 1) as usize];
        let head = (scale * (r as f64).powf(e)).ceil() as u64;
        let len = head + pad - k;
        if (len as f64) < (i as f64).powf(e) {
            return Err(Error::Invariant(format!(
                "L_{i} = {len} below i^(1/(p-1)) = {}",
                (i as f64).powf(e)
            )));
        }
        pairs.push((offsets[k as usize], len));
    }

    let monotone_violations: Vec<usize> = pairs
        .windows(2)
        .enumerate()
        .filter(|(_, w)| w[1].1 <= w[0].1)
        .map(|(i, _)| i + 1)
        .collect();
    if p <= 2.0 && !monotone_violations.is_empty() {
        return Err(Error::Invariant(format!(
            "lengths not increasing at {:?} with p = {p}",
            &monotone_violations[..monotone_violations.len().min(5)]
        )));
    }

    Ok(BadScheme {
        pairs,
        eta,
        p,
        a_n,
        delta,
        tau,
        classes,
        monotone_violations,
    })
}
