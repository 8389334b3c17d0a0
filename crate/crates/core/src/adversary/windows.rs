use crate::error::{Error, Result};
use serde::Serialize;

/// A window `[start, start + len)` of an array whose mean beats the
/// search threshold.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct BadWindow {
    pub start: u64,
    pub len: u64,
    pub average: f64,
}

/// Minimum segment tree answering "leftmost index in a range holding a
/// value below `x`".
struct MinTree {
    size: usize,
    node: Vec<f64>,
}

impl MinTree {
    fn new(values: &[f64]) -> Self {
        let size = values.len().next_power_of_two().max(1);
        let mut node = vec![f64::INFINITY; 2 * size];
        node[size..size + values.len()].copy_from_slice(values);
        for i in (1..size).rev() {
            node[i] = node[2 * i].min(node[2 * i + 1]);
        }
        Self { size, node }
    }

    fn leftmost_below(&self, lo: usize, hi: usize, x: f64) -> Option<usize> {
        if lo > hi {
            return None;
        }
        self.descend(1, 0, self.size - 1, lo, hi, x)
    }

    fn descend(&self, k: usize, nl: usize, nr: usize, lo: usize, hi: usize, x: f64) -> Option<usize> {
        if nr < lo || nl > hi || self.node[k] >= x {
            return None;
        }
        if nl == nr {
            return Some(nl);
        }
        let mid = (nl + nr) / 2;
        self.descend(2 * k, nl, mid, lo, hi, x)
            .or_else(|| self.descend(2 * k + 1, mid + 1, nr, lo, hi, x))
    }
}

fn prefix_sums(values: &[f64]) -> Vec<f64> {
    let mut p = Vec::with_capacity(values.len() + 1);
    let mut s = 0.0;
    p.push(0.0);
    for &v in values {
        s += v;
        p.push(s);
    }
    p
}

fn check_search(eta: f64, min_len: u64, max_len: u64) -> Result<()> {
    if !(eta.is_finite() && eta > 0.0) {
        return Err(Error::invalid(format!("threshold η = {eta} must be positive")));
    }
    if min_len == 0 {
        return Err(Error::invalid("minimum window length must be at least 1"));
    }
    if max_len < min_len {
        return Err(Error::invalid(format!(
            "maximum window length {max_len} below minimum {min_len}"
        )));
    }
    Ok(())
}

/// For every end index, the longest window ending there with mean `> eta`
/// and length at least `min_len`.
///
/// Windows are found with prefix sums: `[i, j)` qualifies iff
/// `Q[i] < Q[j]` where `Q[k] = P[k] - eta * k`, so each end costs one
/// segment-tree descent. Results are ordered by end index.
pub fn bad_window_search(values: &[f64], eta: f64, min_len: u64) -> Result<Vec<BadWindow>> {
    bad_windows_capped(values, eta, min_len, u64::MAX)
}

/// [`bad_window_search`] with window lengths also capped at `max_len`.
pub fn bad_windows_capped(
    values: &[f64],
    eta: f64,
    min_len: u64,
    max_len: u64,
) -> Result<Vec<BadWindow>> {
    check_search(eta, min_len, max_len)?;
    let p = prefix_sums(values);
    let q: Vec<f64> = p.iter().enumerate().map(|(k, s)| s - eta * k as f64).collect();
    let tree = MinTree::new(&q);
    let mut out = Vec::new();
    for j in 1..p.len() {
        if (j as u64) < min_len {
            continue;
        }
        let hi = j - min_len as usize;
        let lo = j.saturating_sub(max_len.min(j as u64) as usize);
        if let Some(i) = tree.leftmost_below(lo, hi, q[j]) {
            let len = (j - i) as u64;
            out.push(BadWindow {
                start: i as u64,
                len,
                average: (p[j] - p[i]) / len as f64,
            });
        }
    }
    Ok(out)
}

/// For every start index, the longest window starting there with mean
/// `> eta` and length in `[min_len, max_len]`. Results are ordered by start.
pub fn bad_windows_by_start(
    values: &[f64],
    eta: f64,
    min_len: u64,
    max_len: u64,
) -> Result<Vec<BadWindow>> {
    let reversed: Vec<f64> = values.iter().rev().copied().collect();
    let n = values.len() as u64;
    let mut out: Vec<BadWindow> = bad_windows_capped(&reversed, eta, min_len, max_len)?
        .into_iter()
        .map(|w| BadWindow {
            start: n - (w.start + w.len),
            ..w
        })
        .collect();
    out.reverse();
    Ok(out)
}

/// Backward stopping times along one cycle of values: for each position
/// `x`, the least `k >= 1` with `Σ_{i<k} values[x - i] < threshold * k`
/// (indices mod the cycle length), or `None` if no `k <= cap` qualifies.
pub fn backward_stopping_times(
    values: &[f64],
    positions: &[u64],
    threshold: f64,
    cap: u64,
) -> Result<Vec<Option<u64>>> {
    let n = values.len() as u64;
    if n == 0 {
        return Err(Error::invalid("empty cycle"));
    }
    positions
        .iter()
        .map(|&x| {
            if x >= n {
                return Err(Error::invalid(format!("position {x} outside cycle of {n}")));
            }
            let mut sum = 0.0;
            let mut at = x;
            for k in 1..=cap {
                sum += values[at as usize];
                if sum < threshold * k as f64 {
                    return Ok(Some(k));
                }
                at = if at == 0 { n - 1 } else { at - 1 };
            }
            Ok(None)
        })
        .collect()
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;

    /// Quadratic oracle: per end, scan lengths from longest to shortest.
    pub(crate) fn brute_force(values: &[f64], eta: f64, min_len: u64, max_len: u64) -> Vec<BadWindow> {
        let mut out = Vec::new();
        for j in 1..=values.len() {
            let top = (j as u64).min(max_len);
            let mut len = top;
            while len >= min_len && len > 0 {
                let i = j - len as usize;
                let s: f64 = values[i..j].iter().sum();
                if s > eta * len as f64 {
                    out.push(BadWindow {
                        start: i as u64,
                        len,
                        average: s / len as f64,
                    });
                    break;
                }
                len -= 1;
            }
        }
        out
    }

    #[test]
    fn small_example() {
        let w = bad_window_search(&[-1.0, 1.0, 0.0, 0.0], 0.4, 1).unwrap();
        assert!(w.contains(&BadWindow { start: 1, len: 1, average: 1.0 }));
        assert_eq!(w, brute_force(&[-1.0, 1.0, 0.0, 0.0], 0.4, 1, u64::MAX));
    }

    #[test]
    fn zeros_have_no_windows() {
        assert!(bad_window_search(&[0.0; 50], 0.25, 1).unwrap().is_empty());
    }

    #[test]
    fn constant_above_threshold_reaches_full_range() {
        let w = bad_window_search(&[1.0; 16], 0.5, 1).unwrap();
        assert_eq!(w.len(), 16);
        assert!(w.iter().all(|b| b.start == 0));
        assert_eq!(w.last().unwrap().len, 16);
    }

    #[test]
    fn capped_and_by_start_match_oracle() {
        let vals: Vec<f64> = (0..300)
            .map(|i| (((i * 37 + 11) % 17) as f64 - 8.0) * 0.25)
            .collect();
        for &(eta, lo, hi) in &[(0.25, 1, u64::MAX), (0.5, 3, 40), (0.125, 10, 10)] {
            let fast = bad_windows_capped(&vals, eta, lo, hi).unwrap();
            assert_eq!(fast, brute_force(&vals, eta, lo, hi));
        }
        let rev: Vec<f64> = vals.iter().rev().copied().collect();
        let by_start = bad_windows_by_start(&vals, 0.5, 3, 40).unwrap();
        let mut mirrored: Vec<BadWindow> = brute_force(&rev, 0.5, 3, 40)
            .into_iter()
            .map(|w| BadWindow { start: 300 - w.start - w.len, ..w })
            .collect();
        mirrored.reverse();
        assert_eq!(by_start, mirrored);
    }

    #[test]
    fn stopping_times_wrap_backwards() {
        // Backward from index 1: 3, 0, then wraps to -2 at k = 3.
        let vals = [0.0, 3.0, -2.0, -2.0];
        let k = backward_stopping_times(&vals, &[1, 0, 2], 0.5, 10).unwrap();
        assert_eq!(k, vec![Some(3), Some(1), Some(1)]);
        assert_eq!(backward_stopping_times(&vals, &[1], 0.5, 2).unwrap(), vec![None]);
    }
}
