//! Exact evaluation of `|M(r, c)|`.
//!
//! Three independent counters live here:
//!
//! * [`count_brute_force`] enumerates every 0-1 matrix of the given shape;
//! * [`count_dp`] sweeps columns, tracking the multiset of residual row sums;
//! * [`count_by_rows`] inserts rows one at a time over explicit column subsets,
//!   memoized on the sorted residual column sums.
//!
//! The last two agree with the first wherever it can run, and with each other
//! beyond that.

use std::collections::HashMap;

use num_bigint::BigUint;
use num_traits::{One, Zero};
use serde::{Serialize, Serializer};

use crate::error::{Error, Result};
use crate::independence::log_heuristic;
use crate::margins::{gale_ryser, MarginPair};
use crate::numeric::ln_biguint;

/// Largest `m·n` accepted by [`count_brute_force`].
pub const BRUTE_FORCE_MAX_CELLS: usize = 25;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CountResult {
    #[serde(serialize_with = "decimal")]
    pub count: BigUint,
    /// `ln(count)`, or `-inf` when the count is zero.
    pub log_count: f64,
}

fn decimal<S: Serializer>(x: &BigUint, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_str(&x.to_str_radix(10))
}

impl CountResult {
    pub fn new(count: BigUint) -> Self {
        let log_count = ln_biguint(&count);
        Self { count, log_count }
    }

    pub fn is_zero(&self) -> bool {
        self.count.is_zero()
    }
}

/// Counts by checking all `2^{mn}` binary matrices.
pub fn count_brute_force(margins: &MarginPair) -> Result<CountResult> {
    let (m, n) = (margins.m(), margins.n());
    let cells = m * n;
    if cells > BRUTE_FORCE_MAX_CELLS {
        return Err(Error::SizeLimit {
            what: "brute-force enumeration",
            size: cells,
            cap: BRUTE_FORCE_MAX_CELLS,
        });
    }
    let total = margins.total() as u32;
    let row_masks: Vec<u32> = (0..m).map(|i| ((1u32 << n) - 1) << (i * n)).collect();
    let col_masks: Vec<u32> = (0..n)
        .map(|j| (0..m).fold(0u32, |acc, i| acc | (1 << (i * n + j))))
        .collect();

    let mut count = 0u64;
    for mask in 0u32..(1u32 << cells) {
        if mask.count_ones() != total {
            continue;
        }
        let rows_ok = row_masks
            .iter()
            .zip(margins.rows())
            .all(|(&rm, &r)| (mask & rm).count_ones() == r);
        if rows_ok
            && col_masks
                .iter()
                .zip(margins.cols())
                .all(|(&cm, &c)| (mask & cm).count_ones() == c)
        {
            count += 1;
        }
    }
    Ok(CountResult::new(BigUint::from(count)))
}

#[derive(Debug, Clone, Copy)]
pub struct DpOptions {
    /// Maximum number of distinct residual states held for one column.
    pub state_cap: usize,
}

impl Default for DpOptions {
    fn default() -> Self {
        Self {
            state_cap: 2_000_000,
        }
    }
}

/// Column-by-column dynamic program over residual row-sum multisets.
///
/// Columns are processed in decreasing order of their sums. A state is the
/// multiset of positive residual row sums, stored sorted descending. Placing
/// a column of sum `c` chooses how many ones go to each block of equal
/// residuals, weighted by the product of binomials `C(block size, k)`. Every
/// state is checked against Gale–Ryser for the columns still to come, so
/// dead ends are dropped immediately.
pub fn count_dp(margins: &MarginPair, opts: &DpOptions) -> Result<CountResult> {
    let m = margins.m();
    let mut cols = margins.cols().to_vec();
    cols.sort_unstable_by(|a, b| b.cmp(a));

    let mut start: Vec<u32> = margins.rows().iter().copied().filter(|&r| r > 0).collect();
    start.sort_unstable_by(|a, b| b.cmp(a));
    if !gale_ryser(&start, &cols) {
        return Ok(CountResult::new(BigUint::zero()));
    }

    let pascal = pascal_table(m);
    let suffix = SuffixCapacity::new(&cols, m);

    let mut states: HashMap<Vec<u32>, BigUint> = HashMap::new();
    states.insert(start, BigUint::one());

    for (t, &c) in cols.iter().enumerate() {
        let mut next: HashMap<Vec<u32>, BigUint> = HashMap::with_capacity(states.len());
        for (state, weight) in &states {
            let runs = runs_of(state);
            let mut picks = vec![0u32; runs.len()];
            distribute(&runs, 0, c, &mut picks, &mut |picks| {
                let child = apply_picks(&runs, picks);
                if !suffix.admits(t + 1, &child) {
                    return;
                }
                let mut w = weight.clone();
                for (&(_, size), &k) in runs.iter().zip(picks.iter()) {
                    if k > 0 && k < size {
                        w *= &pascal[size as usize][k as usize];
                    }
                }
                *next.entry(child).or_insert_with(BigUint::zero) += w;
            });
            if next.len() > opts.state_cap {
                return Err(Error::StateSpaceCap {
                    cap: opts.state_cap,
                });
            }
        }
        states = next;
    }

    let count = states.remove(&Vec::new()).unwrap_or_else(BigUint::zero);
    Ok(CountResult::new(count))
}

/// Blocks of equal values `(value, multiplicity)` of a descending vector.
fn runs_of(state: &[u32]) -> Vec<(u32, u32)> {
    let mut runs: Vec<(u32, u32)> = Vec::new();
    for &v in state {
        match runs.last_mut() {
            Some((value, size)) if *value == v => *size += 1,
            _ => runs.push((v, 1)),
        }
    }
    runs
}

/// Calls `emit` for every `picks` with `picks[t] ≤ runs[t].1` summing to `left`.
fn distribute(
    runs: &[(u32, u32)],
    t: usize,
    left: u32,
    picks: &mut [u32],
    emit: &mut impl FnMut(&[u32]),
) {
    if t == runs.len() {
        if left == 0 {
            emit(picks);
        }
        return;
    }
    let capacity_after: u32 = runs[t + 1..].iter().map(|&(_, s)| s).sum();
    let lo = left.saturating_sub(capacity_after);
    let hi = left.min(runs[t].1);
    for k in lo..=hi {
        picks[t] = k;
        distribute(runs, t + 1, left - k, picks, emit);
    }
    picks[t] = 0;
}

fn apply_picks(runs: &[(u32, u32)], picks: &[u32]) -> Vec<u32> {
    let mut child = Vec::new();
    for (&(v, size), &k) in runs.iter().zip(picks) {
        child.extend(std::iter::repeat_n(v, (size - k) as usize));
        if v > 1 {
            child.extend(std::iter::repeat_n(v - 1, k as usize));
        }
    }
    child
}

fn pascal_table(m: usize) -> Vec<Vec<BigUint>> {
    let mut table: Vec<Vec<BigUint>> = Vec::with_capacity(m + 1);
    for a in 0..=m {
        let mut row = vec![BigUint::one(); a + 1];
        for b in 1..a {
            row[b] = &table[a - 1][b - 1] + &table[a - 1][b];
        }
        table.push(row);
    }
    table
}

/// `cap[t][k] = Σ_{j ≥ t} min(c_j, k)` for the descending column order, the
/// right-hand side of the Gale–Ryser inequalities for the columns from `t` on.
struct SuffixCapacity {
    cap: Vec<Vec<u64>>,
}

impl SuffixCapacity {
    fn new(cols: &[u32], m: usize) -> Self {
        let n = cols.len();
        let mut cap = vec![vec![0u64; m + 1]; n + 1];
        for t in (0..n).rev() {
            for k in 0..=m {
                cap[t][k] = cap[t + 1][k] + u64::from(cols[t]).min(k as u64);
            }
        }
        Self { cap }
    }

    /// Whether a descending residual vector can be completed by columns `t..`.
    fn admits(&self, t: usize, residual: &[u32]) -> bool {
        let row = &self.cap[t];
        let mut prefix = 0u64;
        for (k, &r) in residual.iter().enumerate() {
            prefix += u64::from(r);
            if prefix > row[k + 1] {
                return false;
            }
        }
        // totals: residual sum must use up the remaining columns exactly
        prefix == row[row.len() - 1]
    }
}

/// Row-insertion counter: each row picks an explicit subset of columns with
/// positive residual. Memoized on `(row index, sorted residual columns)`.
pub fn count_by_rows(margins: &MarginPair, opts: &DpOptions) -> Result<CountResult> {
    let mut cols = margins.cols().to_vec();
    cols.sort_unstable_by(|a, b| b.cmp(a));
    let mut memo: HashMap<(usize, Vec<u32>), BigUint> = HashMap::new();
    let count = rows_rec(margins.rows(), 0, cols, &mut memo, opts.state_cap)?;
    Ok(CountResult::new(count))
}

fn rows_rec(
    rows: &[u32],
    i: usize,
    residual: Vec<u32>,
    memo: &mut HashMap<(usize, Vec<u32>), BigUint>,
    cap: usize,
) -> Result<BigUint> {
    if i == rows.len() {
        return Ok(if residual.iter().all(|&c| c == 0) {
            BigUint::one()
        } else {
            BigUint::zero()
        });
    }
    let key = (i, residual);
    if let Some(v) = memo.get(&key) {
        return Ok(v.clone());
    }
    let residual = key.1.clone();
    let positive: Vec<usize> = (0..residual.len()).filter(|&j| residual[j] > 0).collect();
    let r = rows[i] as usize;
    let mut total = BigUint::zero();
    if r <= positive.len() {
        let mut chosen = Vec::with_capacity(r);
        let mut subsets = Vec::new();
        subsets_of(&positive, r, 0, &mut chosen, &mut subsets);
        for subset in subsets {
            let mut child = residual.clone();
            for &j in &subset {
                child[j] -= 1;
            }
            child.sort_unstable_by(|a, b| b.cmp(a));
            total += rows_rec(rows, i + 1, child, memo, cap)?;
        }
    }
    if memo.len() >= cap {
        return Err(Error::StateSpaceCap { cap });
    }
    memo.insert(key, total.clone());
    Ok(total)
}

fn subsets_of(
    pool: &[usize],
    k: usize,
    from: usize,
    chosen: &mut Vec<usize>,
    out: &mut Vec<Vec<usize>>,
) {
    if chosen.len() == k {
        out.push(chosen.clone());
        return;
    }
    let need = k - chosen.len();
    for idx in from..pool.len() {
        if pool.len() - idx < need {
            break;
        }
        chosen.push(pool[idx]);
        subsets_of(pool, k, idx + 1, chosen, out);
        chosen.pop();
    }
}

/// `ln(|M(r,c)| / I(r,c))` from the exact dynamic-program count.
pub fn log_correlation_ratio_exact(margins: &MarginPair, opts: &DpOptions) -> Result<f64> {
    if margins.has_zero_margin() {
        return Err(Error::Domain(
            "the independence estimate presumes positive margins".into(),
        ));
    }
    let count = count_dp(margins, opts)?;
    Ok(count.log_count - log_heuristic(margins).log_estimate)
}

/// `ρ = |M(r,c)| / I(r,c)`, formed in log space.
pub fn correlation_ratio_exact(margins: &MarginPair, opts: &DpOptions) -> Result<f64> {
    log_correlation_ratio_exact(margins, opts).map(f64::exp)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn mp(rows: &[u32], cols: &[u32]) -> MarginPair {
        MarginPair::new(rows.to_vec(), cols.to_vec()).unwrap()
    }

    fn dp(m: &MarginPair) -> u64 {
        let c = count_dp(m, &DpOptions::default()).unwrap().count;
        c.try_into().unwrap()
    }

    #[test]
    fn brute_force_examples() {
        let bf = |r: &[u32], c: &[u32]| -> u64 {
            count_brute_force(&mp(r, c))
                .unwrap()
                .count
                .try_into()
                .unwrap()
        };
        assert_eq!(bf(&[1, 1], &[1, 1]), 2);
        assert_eq!(bf(&[2, 1], &[1, 1, 1]), 3);
        assert_eq!(bf(&[2, 2], &[2, 1, 1]), 2);
        assert_eq!(bf(&[2, 2, 2], &[2, 2, 2]), 6);
        assert_eq!(bf(&[3, 0], &[1, 1, 1]), 1);
    }

    #[test]
    fn brute_force_size_cap() {
        let m = mp(&[1; 6], &[1; 6]);
        assert!(matches!(
            count_brute_force(&m),
            Err(Error::SizeLimit { size: 36, .. })
        ));
        // 5x5 is the largest accepted square
        let m = mp(&[1; 5], &[1; 5]);
        assert_eq!(count_brute_force(&m).unwrap().count, BigUint::from(120u32));
    }

    #[test]
    fn dp_examples() {
        assert_eq!(dp(&mp(&[2, 2, 2], &[2, 2, 2])), 6);
        assert_eq!(dp(&mp(&[3, 0], &[1, 1, 1])), 1);
        assert_eq!(dp(&mp(&[1, 1], &[1, 1])), 2);
        assert_eq!(dp(&mp(&[2, 2, 2, 0], &[4, 1, 1])), 0);
        // permutation matrices
        assert_eq!(dp(&mp(&[1; 7], &[1; 7])), 5040);
    }

    #[test]
    fn zero_count_has_neg_inf_log() {
        let r = count_dp(&mp(&[2, 2, 2, 0], &[4, 1, 1]), &DpOptions::default()).unwrap();
        assert!(r.is_zero());
        assert_eq!(r.log_count, f64::NEG_INFINITY);
    }

    #[test]
    fn family_instance_two_routes() {
        let m = mp(&[1, 1, 2, 2, 2, 2], &[1, 1, 2, 2, 2, 2]);
        let a = count_dp(&m, &DpOptions::default()).unwrap();
        let b = count_by_rows(&m, &DpOptions::default()).unwrap();
        assert_eq!(a.count, b.count);
        assert_eq!(a.count, BigUint::from(9_876u32)); // python enumeration over row patterns
    }

    #[test]
    fn state_cap_reports_resource_error() {
        let m = mp(&[4; 8], &[4; 8]);
        let err = count_dp(&m, &DpOptions { state_cap: 2 }).unwrap_err();
        assert_eq!(err, Error::StateSpaceCap { cap: 2 });
    }

    #[test]
    fn log_count_precision() {
        let m = mp(&[1; 7], &[1; 7]);
        let r = count_dp(&m, &DpOptions::default()).unwrap();
        assert!((r.log_count - 5040f64.ln()).abs() < 1e-12 * 5040f64.ln());
    }

    #[test]
    fn correlation_ratio_examples() {
        let opts = DpOptions::default();
        let rho = correlation_ratio_exact(&mp(&[1, 1], &[1, 1]), &opts).unwrap();
        assert!((rho - 0.75).abs() < 1e-12);
        let rho = correlation_ratio_exact(&mp(&[2, 2, 2], &[2, 2, 2]), &opts).unwrap();
        assert!((rho - 6.0 * 84.0 / 729.0).abs() < 1e-12);
        assert!(matches!(
            correlation_ratio_exact(&mp(&[3, 0], &[1, 1, 1]), &opts),
            Err(Error::Domain(_))
        ));
    }

    #[test]
    fn count_serializes_as_decimal_string() {
        let r = CountResult::new(BigUint::from(7245u32));
        let v = serde_json::to_value(&r).unwrap();
        assert_eq!(v["count"], "7245");
    }
}
