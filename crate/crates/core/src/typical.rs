//! Maximum-entropy ("typical") tables over the binary transportation polytope.
//!
//! The typical table maximizes `g(X) = Σ f(X_ij)` over real matrices with
//! entries in `[0, 1]` and the prescribed margins, where `f` is the Bernoulli
//! entropy. We solve the convex dual
//!
//! ```text
//! min  Σ_ij log(1 + e^{α_i + β_j}) − Σ_i r_i α_i − Σ_j c_j β_j
//! ```
//!
//! by exact coordinate updates: with all `β` fixed, each `α_i` solves the
//! monotone equation `Σ_j logistic(α_i + β_j) = r_i`, and vice versa. The
//! primal table is then `z_ij = logistic(α_i + β_j)`.
//!
//! Rows and columns with equal margins have equal duals at the optimum, so
//! by default they are collapsed into weighted classes. For the two-level
//! family margins this leaves 2 + 2 unknowns regardless of `n`.

use std::collections::HashMap;
use std::time::{Duration, Instant};

use serde::Serialize;

use crate::error::{Error, Result};
use crate::margins::{gale_ryser, gale_ryser_slack, MarginPair};
use crate::numeric::{logistic, stable_sum};

/// Bernoulli entropy `f(x) = x log(1/x) + (1−x) log(1/(1−x))`, with
/// `f(0) = f(1) = 0`.
pub fn bernoulli_entropy(x: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&x) {
        return Err(Error::Domain(format!("Bernoulli entropy of {x}")));
    }
    Ok(entropy_term(x))
}

/// `f(x)` without the domain check; `x` must lie in `[0, 1]`.
pub(crate) fn entropy_term(x: f64) -> f64 {
    let mut h = 0.0;
    if x > 0.0 {
        h -= x * x.ln();
    }
    if x < 1.0 {
        h -= (1.0 - x) * (-x).ln_1p();
    }
    h
}

#[derive(Debug, Clone, Copy)]
pub struct SolverOptions {
    /// Maximum allowed margin violation.
    pub tolerance: f64,
    /// Maximum number of full (rows then columns) sweeps.
    pub max_iterations: usize,
    /// Merge equal-margin rows/columns into weighted classes.
    pub collapse: bool,
    /// Wall-clock limit for one solve.
    pub time_budget: Option<Duration>,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self {
            tolerance: 1e-10,
            max_iterations: 100_000,
            collapse: true,
            time_budget: Some(Duration::from_secs(60)),
        }
    }
}

/// The solved typical table with its dual certificate.
///
/// Forced rows/columns (margin `0` or full) carry infinite duals; every other
/// entry equals `logistic(row_duals[i] + col_duals[j])` exactly.
#[derive(Debug, Clone)]
pub struct TypicalTable {
    m: usize,
    n: usize,
    entries: Vec<f64>,
    pub row_duals: Vec<f64>,
    pub col_duals: Vec<f64>,
    pub entropy_value: f64,
    /// Largest margin violation of `entries`.
    pub residual: f64,
    pub iterations: usize,
    row_margins: Vec<u32>,
    col_margins: Vec<u32>,
}

/// Entries sharing the same (row margin, column margin) pair.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Block {
    pub row_margin: u32,
    pub col_margin: u32,
    pub value: f64,
    pub multiplicity: usize,
}

impl TypicalTable {
    pub fn m(&self) -> usize {
        self.m
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn entry(&self, i: usize, j: usize) -> f64 {
        self.entries[i * self.n + j]
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.entries[i * self.n..(i + 1) * self.n]
    }

    /// Row-major entries.
    pub fn entries(&self) -> &[f64] {
        &self.entries
    }

    /// Distinct margin-class blocks in order of first appearance. The value
    /// is the block mean; it is exact for the collapsed solve.
    pub fn blocks(&self) -> Vec<Block> {
        let mut order: Vec<(u32, u32)> = Vec::new();
        let mut acc: HashMap<(u32, u32), (f64, usize)> = HashMap::new();
        for i in 0..self.m {
            for j in 0..self.n {
                let key = (self.row_margins[i], self.col_margins[j]);
                let slot = acc.entry(key).or_insert_with(|| {
                    order.push(key);
                    (0.0, 0)
                });
                slot.0 += self.entry(i, j);
                slot.1 += 1;
            }
        }
        order
            .into_iter()
            .map(|key| {
                let (sum, count) = acc[&key];
                Block {
                    row_margin: key.0,
                    col_margin: key.1,
                    value: sum / count as f64,
                    multiplicity: count,
                }
            })
            .collect()
    }

    /// Value of the first entry whose row and column carry these margins.
    pub fn block_value(&self, row_margin: u32, col_margin: u32) -> Option<f64> {
        let i = self.row_margins.iter().position(|&r| r == row_margin)?;
        let j = self.col_margins.iter().position(|&c| c == col_margin)?;
        Some(self.entry(i, j))
    }

    /// Largest `|log((1−z)/z) + α_i + β_j|` over entries with finite duals.
    pub fn kkt_residual(&self) -> f64 {
        let mut worst = 0.0f64;
        for i in 0..self.m {
            for j in 0..self.n {
                let (a, b) = (self.row_duals[i], self.col_duals[j]);
                if !(a.is_finite() && b.is_finite()) {
                    continue;
                }
                let z = self.entry(i, j);
                let gradient = ((1.0 - z) / z).ln();
                worst = worst.max((gradient + a + b).abs());
            }
        }
        worst
    }

    /// Largest `|z_ij − logistic(α_i + β_j)|` over entries with finite duals.
    pub fn dual_mismatch(&self) -> f64 {
        let mut worst = 0.0f64;
        for i in 0..self.m {
            for j in 0..self.n {
                let (a, b) = (self.row_duals[i], self.col_duals[j]);
                if a.is_finite() && b.is_finite() {
                    worst = worst.max((self.entry(i, j) - logistic(a + b)).abs());
                }
            }
        }
        worst
    }

    pub fn report(&self) -> TypicalReport {
        let finite = |v: &Vec<f64>| -> Vec<Option<f64>> {
            v.iter().map(|x| x.is_finite().then_some(*x)).collect()
        };
        TypicalReport {
            m: self.m,
            n: self.n,
            row_duals: finite(&self.row_duals),
            col_duals: finite(&self.col_duals),
            blocks: self.blocks(),
            entropy_value: self.entropy_value,
            residual: self.residual,
            iterations: self.iterations,
        }
    }
}

/// JSON form of a [`TypicalTable`]; forced rows/columns have `null` duals.
#[derive(Debug, Clone, Serialize)]
pub struct TypicalReport {
    pub m: usize,
    pub n: usize,
    pub row_duals: Vec<Option<f64>>,
    pub col_duals: Vec<Option<f64>>,
    pub blocks: Vec<Block>,
    pub entropy_value: f64,
    pub residual: f64,
    pub iterations: usize,
}

/// `g(Z) = Σ f(z_ij)`.
pub fn entropy(table: &TypicalTable) -> f64 {
    stable_sum(table.entries.iter().map(|&z| entropy_term(z)))
}

/// Margins left after peeling off rows/columns whose entries are forced.
struct Reduction {
    /// `Some(v)` for a forced entry.
    forced: Vec<Option<f64>>,
    row_dual: Vec<Option<f64>>,
    col_dual: Vec<Option<f64>>,
    free_rows: Vec<usize>,
    free_cols: Vec<usize>,
    row_target: Vec<u32>,
    col_target: Vec<u32>,
}

fn reduce(margins: &MarginPair) -> Reduction {
    let (m, n) = (margins.m(), margins.n());
    let mut r: Vec<u32> = margins.rows().to_vec();
    let mut c: Vec<u32> = margins.cols().to_vec();
    let mut row_alive = vec![true; m];
    let mut col_alive = vec![true; n];
    let mut forced = vec![None; m * n];
    let mut row_dual = vec![None; m];
    let mut col_dual = vec![None; n];
    let (mut live_rows, mut live_cols) = (m as u32, n as u32);

    loop {
        let mut changed = false;
        for i in 0..m {
            if !row_alive[i] || (r[i] != 0 && r[i] != live_cols) {
                continue;
            }
            let full = r[i] == live_cols;
            for j in (0..n).filter(|&j| col_alive[j]) {
                forced[i * n + j] = Some(if full { 1.0 } else { 0.0 });
                if full {
                    c[j] -= 1;
                }
            }
            row_alive[i] = false;
            row_dual[i] = Some(if full {
                f64::INFINITY
            } else {
                f64::NEG_INFINITY
            });
            live_rows -= 1;
            changed = true;
        }
        for j in 0..n {
            if !col_alive[j] || (c[j] != 0 && c[j] != live_rows) {
                continue;
            }
            let full = c[j] == live_rows;
            for i in (0..m).filter(|&i| row_alive[i]) {
                forced[i * n + j] = Some(if full { 1.0 } else { 0.0 });
                if full {
                    r[i] -= 1;
                }
            }
            col_alive[j] = false;
            col_dual[j] = Some(if full {
                f64::INFINITY
            } else {
                f64::NEG_INFINITY
            });
            live_cols -= 1;
            changed = true;
        }
        if !changed {
            break;
        }
    }

    let free_rows: Vec<usize> = (0..m).filter(|&i| row_alive[i]).collect();
    let free_cols: Vec<usize> = (0..n).filter(|&j| col_alive[j]).collect();
    Reduction {
        forced,
        row_dual,
        col_dual,
        row_target: free_rows.iter().map(|&i| r[i]).collect(),
        col_target: free_cols.iter().map(|&j| c[j]).collect(),
        free_rows,
        free_cols,
    }
}

/// True iff, after removing forced rows and columns, the polytope has a point
/// with every remaining entry strictly inside `(0, 1)`.
///
/// Equivalently, every strict-prefix Gale–Ryser inequality on the reduced
/// margins holds with positive slack; a tight one forces a block of entries.
pub fn has_interior(margins: &MarginPair) -> bool {
    if !is_feasible_margins(margins) {
        return false;
    }
    let red = reduce(margins);
    let k = red.row_target.len();
    if k == 0 || red.col_target.is_empty() {
        return true;
    }
    let slack = gale_ryser_slack(&red.row_target, &red.col_target);
    slack[..k - 1].iter().all(|&s| s > 0)
}

fn is_feasible_margins(margins: &MarginPair) -> bool {
    gale_ryser(margins.rows(), margins.cols())
}

/// Equal-target groups: `(target, member indices)` in first-appearance order.
fn classes(targets: &[u32], collapse: bool) -> Vec<(u32, Vec<usize>)> {
    if !collapse {
        return targets
            .iter()
            .enumerate()
            .map(|(k, &t)| (t, vec![k]))
            .collect();
    }
    let mut out: Vec<(u32, Vec<usize>)> = Vec::new();
    for (k, &t) in targets.iter().enumerate() {
        match out.iter_mut().find(|(v, _)| *v == t) {
            Some((_, members)) => members.push(k),
            None => out.push((t, vec![k])),
        }
    }
    out
}

/// Solves `Σ_k w_k · logistic(x + o_k) = target` for `x`, starting at `x0`.
///
/// The left side is strictly increasing in `x`, so a bracket is grown
/// geometrically from `x0` and then refined by Newton steps that fall back
/// to bisection whenever they leave the bracket.
fn solve_shift(target: f64, weights: &[f64], offsets: &[f64], x0: f64) -> f64 {
    let eval = |x: f64| -> (f64, f64) {
        let mut value = 0.0;
        let mut slope = 0.0;
        for (&w, &o) in weights.iter().zip(offsets) {
            let s = logistic(x + o);
            value += w * s;
            slope += w * s * (1.0 - s);
        }
        (value - target, slope)
    };

    let (f0, _) = eval(x0);
    if f0 == 0.0 {
        return x0;
    }
    let (mut lo, mut hi);
    let mut step = 1.0;
    if f0 < 0.0 {
        lo = x0;
        hi = x0 + step;
        while eval(hi).0 < 0.0 {
            lo = hi;
            step *= 2.0;
            hi += step;
        }
    } else {
        hi = x0;
        lo = x0 - step;
        while eval(lo).0 > 0.0 {
            hi = lo;
            step *= 2.0;
            lo -= step;
        }
    }

    let mut x = x0.clamp(lo, hi);
    for _ in 0..200 {
        let (f, d) = eval(x);
        if f == 0.0 {
            return x;
        }
        if f < 0.0 {
            lo = x;
        } else {
            hi = x;
        }
        let newton = x - f / d;
        let next = if d > 0.0 && newton > lo && newton < hi {
            newton
        } else {
            0.5 * (lo + hi)
        };
        if (next - x).abs() <= 1e-15 * (1.0 + x.abs()) || hi - lo <= 1e-15 * (1.0 + x.abs()) {
            return next;
        }
        x = next;
    }
    x
}

/// Computes the typical table of `margins`.
///
/// Rows and columns with margin `0` or full margin are fixed first. The rest
/// must leave a polytope with non-empty interior, otherwise
/// [`Error::NoInterior`] is returned.
pub fn solve_typical_table(margins: &MarginPair, opts: &SolverOptions) -> Result<TypicalTable> {
    if !is_feasible_margins(margins) {
        return Err(Error::Infeasible);
    }
    if !has_interior(margins) {
        return Err(Error::NoInterior);
    }
    let (m, n) = (margins.m(), margins.n());
    let red = reduce(margins);

    let row_classes = classes(&red.row_target, opts.collapse);
    let col_classes = classes(&red.col_target, opts.collapse);
    let row_w: Vec<f64> = row_classes.iter().map(|(_, v)| v.len() as f64).collect();
    let col_w: Vec<f64> = col_classes.iter().map(|(_, v)| v.len() as f64).collect();
    let row_t: Vec<f64> = row_classes.iter().map(|(t, _)| f64::from(*t)).collect();
    let col_t: Vec<f64> = col_classes.iter().map(|(t, _)| f64::from(*t)).collect();

    let (alpha, beta, iterations) = if row_classes.is_empty() {
        (Vec::new(), Vec::new(), 0)
    } else {
        let width = red.free_cols.len() as f64;
        let mut alpha: Vec<f64> = row_t.iter().map(|&t| (t / (width - t)).ln()).collect();
        let mut beta = vec![0.0; col_classes.len()];

        let started = Instant::now();
        let mut iterations = 0;
        loop {
            for a in 0..alpha.len() {
                alpha[a] = solve_shift(row_t[a], &col_w, &beta, alpha[a]);
            }
            for k in 0..beta.len() {
                beta[k] = solve_shift(col_t[k], &row_w, &alpha, beta[k]);
            }
            iterations += 1;

            let residual = class_residual(&alpha, &beta, &row_w, &col_w, &row_t, &col_t);
            if residual <= opts.tolerance {
                break;
            }
            if iterations >= opts.max_iterations {
                return Err(Error::NonConvergence {
                    iterations,
                    residual,
                });
            }
            if let Some(budget) = opts.time_budget {
                if started.elapsed() > budget {
                    return Err(Error::Timeout {
                        seconds: budget.as_secs_f64(),
                        residual,
                    });
                }
            }
        }

        // mean of the column duals over free columns is zero
        let shift =
            beta.iter().zip(&col_w).map(|(b, w)| b * w).sum::<f64>() / col_w.iter().sum::<f64>();
        beta.iter_mut().for_each(|b| *b -= shift);
        alpha.iter_mut().for_each(|a| *a += shift);
        (alpha, beta, iterations)
    };

    let mut row_duals: Vec<f64> = red.row_dual.iter().map(|d| d.unwrap_or(0.0)).collect();
    let mut col_duals: Vec<f64> = red.col_dual.iter().map(|d| d.unwrap_or(0.0)).collect();
    for (class, (_, members)) in row_classes.iter().enumerate() {
        for &k in members {
            row_duals[red.free_rows[k]] = alpha[class];
        }
    }
    for (class, (_, members)) in col_classes.iter().enumerate() {
        for &k in members {
            col_duals[red.free_cols[k]] = beta[class];
        }
    }

    let entries: Vec<f64> = (0..m * n)
        .map(|cell| match red.forced[cell] {
            Some(v) => v,
            None => logistic(row_duals[cell / n] + col_duals[cell % n]),
        })
        .collect();

    let mut residual = 0.0f64;
    for (i, &r) in margins.rows().iter().enumerate() {
        let s = stable_sum(entries[i * n..(i + 1) * n].iter().copied());
        residual = residual.max((s - f64::from(r)).abs());
    }
    for (j, &c) in margins.cols().iter().enumerate() {
        let s = stable_sum((0..m).map(|i| entries[i * n + j]));
        residual = residual.max((s - f64::from(c)).abs());
    }

    let mut table = TypicalTable {
        m,
        n,
        entries,
        row_duals,
        col_duals,
        entropy_value: 0.0,
        residual,
        iterations,
        row_margins: margins.rows().to_vec(),
        col_margins: margins.cols().to_vec(),
    };
    table.entropy_value = entropy(&table);
    Ok(table)
}

fn class_residual(
    alpha: &[f64],
    beta: &[f64],
    row_w: &[f64],
    col_w: &[f64],
    row_t: &[f64],
    col_t: &[f64],
) -> f64 {
    let mut worst = 0.0f64;
    for (a, &t) in alpha.iter().zip(row_t) {
        let s: f64 = beta
            .iter()
            .zip(col_w)
            .map(|(b, w)| w * logistic(a + b))
            .sum();
        worst = worst.max((s - t).abs());
    }
    for (b, &t) in beta.iter().zip(col_t) {
        let s: f64 = alpha
            .iter()
            .zip(row_w)
            .map(|(a, w)| w * logistic(a + b))
            .sum();
        worst = worst.max((s - t).abs());
    }
    worst
}

/// Log-scale bounds `g(Z) − γ(m+n)ln(mn) ≤ ln|M(r,c)| ≤ g(Z)`.
///
/// The constant `γ` has no known value; it is always supplied explicitly.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BarvinokBounds {
    pub lower_log: f64,
    pub upper_log: f64,
    pub gamma: f64,
}

pub fn barvinok_bounds(
    margins: &MarginPair,
    gamma: f64,
    opts: &SolverOptions,
) -> Result<BarvinokBounds> {
    if !(gamma.is_finite() && gamma >= 0.0) {
        return Err(Error::Domain(format!(
            "gamma = {gamma} must be non-negative"
        )));
    }
    let table = solve_typical_table(margins, opts)?;
    Ok(bounds_from_entropy(margins, table.entropy_value, gamma))
}

pub fn bounds_from_entropy(margins: &MarginPair, entropy_value: f64, gamma: f64) -> BarvinokBounds {
    let (m, n) = (margins.m() as f64, margins.n() as f64);
    BarvinokBounds {
        lower_log: entropy_value - gamma * (m + n) * (m * n).ln(),
        upper_log: entropy_value,
        gamma,
    }
}
