use crate::error::{Error, Result};
use std::collections::BTreeMap;

/// An integer interval `[start, start + len)`.
pub type Interval = (i64, u64);

/// Total length of the union of `intervals`, by a sort-and-sweep.
pub fn union_length(intervals: &[Interval]) -> u64 {
    let mut spans: Vec<(i128, i128)> = intervals
        .iter()
        .filter(|iv| iv.1 > 0)
        .map(|&(s, l)| (s as i128, s as i128 + l as i128))
        .collect();
    spans.sort_unstable();
    let mut total: i128 = 0;
    let mut cur: Option<(i128, i128)> = None;
    for (a, b) in spans {
        match cur {
            Some((ca, cb)) if a <= cb => cur = Some((ca, cb.max(b))),
            Some((ca, cb)) => {
                total += cb - ca;
                cur = Some((a, b));
            }
            None => cur = Some((a, b)),
        }
    }
    if let Some((a, b)) = cur {
        total += b - a;
    }
    total as u64
}

/// Greedy Vitali selection: longest first (ties by start, then input
/// order), keeping each interval that misses everything kept so far.
///
/// Returns indices into `intervals` in selection order. The selected family
/// is checked to be pairwise disjoint with total length at least a third of
/// the union; a failed check is an [`Error::Invariant`].
pub fn vitali_disjointify(intervals: &[Interval]) -> Result<Vec<usize>> {
    if let Some(i) = intervals.iter().position(|iv| iv.1 == 0) {
        return Err(Error::invalid(format!("interval {i} has zero length")));
    }
    let mut order: Vec<usize> = (0..intervals.len()).collect();
    order.sort_by(|&i, &j| {
        let (si, li) = intervals[i];
        let (sj, lj) = intervals[j];
        lj.cmp(&li).then(si.cmp(&sj)).then(i.cmp(&j))
    });

    // start -> end of every kept interval; kept intervals never overlap, so
    // the predecessor and successor by start are the only candidates to hit.
    let mut kept: BTreeMap<i128, i128> = BTreeMap::new();
    let mut picked = Vec::new();
    for i in order {
        let (s, l) = intervals[i];
        let (a, b) = (s as i128, s as i128 + l as i128);
        let hits_before = kept.range(..=a).next_back().is_some_and(|(_, &e)| e > a);
        let hits_after = kept.range(a..).next().is_some_and(|(&st, _)| st < b);
        if !hits_before && !hits_after {
            kept.insert(a, b);
            picked.push(i);
        }
    }

    let mut prev_end: Option<i128> = None;
    for (&a, &b) in &kept {
        if prev_end.is_some_and(|e| e > a) {
            return Err(Error::Invariant("vitali selection overlaps".into()));
        }
        prev_end = Some(b);
    }
    let selected: u128 = picked.iter().map(|&i| intervals[i].1 as u128).sum();
    let union = union_length(intervals) as u128;
    if 3 * selected < union {
        return Err(Error::Invariant(format!(
            "vitali selection covers {selected} of union {union}"
        )));
    }
    Ok(picked)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn disjoint_input_is_kept_whole() {
        let ivs = [(0, 2), (5, 1), (2, 3)];
        let mut got = vitali_disjointify(&ivs).unwrap();
        got.sort();
        assert_eq!(got, vec![0, 1, 2]);
        assert_eq!(union_length(&ivs), 6);
    }

    #[test]
    fn nested_keeps_longest() {
        let ivs = [(3, 2), (0, 10), (2, 5)];
        assert_eq!(vitali_disjointify(&ivs).unwrap(), vec![1]);
    }

    #[test]
    fn chain_of_overlaps() {
        // Middle interval is longest and blocks both neighbours.
        let ivs = [(0, 4), (3, 5), (7, 4)];
        assert_eq!(vitali_disjointify(&ivs).unwrap(), vec![1]);
        assert_eq!(union_length(&ivs), 11);
    }

    #[test]
    fn zero_length_rejected() {
        assert!(vitali_disjointify(&[(0, 0)]).is_err());
    }
}
