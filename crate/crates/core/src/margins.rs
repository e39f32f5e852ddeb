//! Margin vectors, the Gale–Ryser feasibility test, and the two-level
//! `(n, δ, B, C)` margin family.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Row and column sums of an `m × n` 0-1 matrix.
///
/// Margins are kept in the order given. Zero margins are allowed and simply
/// force an empty row or column.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "RawMargins")]
pub struct MarginPair {
    rows: Vec<u32>,
    cols: Vec<u32>,
}

#[derive(Deserialize)]
struct RawMargins {
    rows: Vec<u32>,
    cols: Vec<u32>,
}

impl TryFrom<RawMargins> for MarginPair {
    type Error = Error;

    fn try_from(raw: RawMargins) -> Result<Self> {
        MarginPair::new(raw.rows, raw.cols)
    }
}

/// Non-empty vectors with equal totals.
fn check_shape(rows: &[u32], cols: &[u32]) -> Result<()> {
    if rows.is_empty() || cols.is_empty() {
        return Err(Error::InvalidMargins(
            "need at least one row and one column".into(),
        ));
    }
    let row_total: u64 = rows.iter().map(|&r| u64::from(r)).sum();
    let col_total: u64 = cols.iter().map(|&c| u64::from(c)).sum();
    if row_total != col_total {
        return Err(Error::InvalidMargins(format!(
            "row total {row_total} differs from column total {col_total}"
        )));
    }
    Ok(())
}

impl MarginPair {
    pub fn new(rows: Vec<u32>, cols: Vec<u32>) -> Result<Self> {
        check_shape(&rows, &cols)?;
        let (m, n) = (rows.len() as u64, cols.len() as u64);
        if let Some(r) = rows.iter().find(|&&r| u64::from(r) > n) {
            return Err(Error::InvalidMargins(format!(
                "row sum {r} exceeds the number of columns {n}"
            )));
        }
        if let Some(c) = cols.iter().find(|&&c| u64::from(c) > m) {
            return Err(Error::InvalidMargins(format!(
                "column sum {c} exceeds the number of rows {m}"
            )));
        }
        Ok(Self { rows, cols })
    }

    /// Like [`MarginPair::new`], but a line sum larger than the opposite
    /// dimension gives `Ok(None)`: the input is well formed and simply has
    /// no 0-1 tables.
    pub fn new_or_infeasible(rows: Vec<u32>, cols: Vec<u32>) -> Result<Option<Self>> {
        check_shape(&rows, &cols)?;
        let (m, n) = (rows.len() as u64, cols.len() as u64);
        if rows.iter().any(|&r| u64::from(r) > n) || cols.iter().any(|&c| u64::from(c) > m) {
            return Ok(None);
        }
        Ok(Some(Self { rows, cols }))
    }

    pub fn rows(&self) -> &[u32] {
        &self.rows
    }

    pub fn cols(&self) -> &[u32] {
        &self.cols
    }

    /// Number of rows `m`.
    pub fn m(&self) -> usize {
        self.rows.len()
    }

    /// Number of columns `n`.
    pub fn n(&self) -> usize {
        self.cols.len()
    }

    /// Total number of ones `N`.
    pub fn total(&self) -> u64 {
        self.rows.iter().map(|&r| u64::from(r)).sum()
    }

    pub fn transpose(&self) -> Self {
        Self {
            rows: self.cols.clone(),
            cols: self.rows.clone(),
        }
    }

    /// Margins of the bit-flipped tables: `r_i → n − r_i`, `c_j → m − c_j`.
    pub fn complement(&self) -> Self {
        let (m, n) = (self.m() as u32, self.n() as u32);
        Self {
            rows: self.rows.iter().map(|&r| n - r).collect(),
            cols: self.cols.iter().map(|&c| m - c).collect(),
        }
    }

    pub fn has_zero_margin(&self) -> bool {
        self.rows.contains(&0) || self.cols.contains(&0)
    }
}

/// Slack of the Gale–Ryser inequalities, one entry per `k = 1..=rows.len()`:
/// `Σ_j min(c_j, k) − (sum of the k largest rows)`.
///
/// The margins are feasible iff the totals agree and every slack is `≥ 0`.
pub(crate) fn gale_ryser_slack(rows: &[u32], cols: &[u32]) -> Vec<i64> {
    let mut sorted = rows.to_vec();
    sorted.sort_unstable_by(|a, b| b.cmp(a));

    // conjugate[k-1] = #{j : c_j >= k}
    let m = rows.len();
    let mut conjugate = vec![0i64; m + 1];
    for &c in cols {
        let c = (c as usize).min(m);
        if c > 0 {
            conjugate[c - 1] += 1;
        }
    }
    for k in (0..m).rev() {
        conjugate[k] += conjugate[k + 1];
    }

    let mut row_prefix = 0i64;
    let mut col_prefix = 0i64;
    sorted
        .iter()
        .enumerate()
        .map(|(k, &r)| {
            row_prefix += i64::from(r);
            col_prefix += conjugate[k];
            col_prefix - row_prefix
        })
        .collect()
}

pub(crate) fn gale_ryser(rows: &[u32], cols: &[u32]) -> bool {
    let row_total: u64 = rows.iter().map(|&r| u64::from(r)).sum();
    let col_total: u64 = cols.iter().map(|&c| u64::from(c)).sum();
    row_total == col_total && gale_ryser_slack(rows, cols).iter().all(|&s| s >= 0)
}

/// True iff at least one 0-1 matrix has these margins.
pub fn is_feasible(margins: &MarginPair) -> bool {
    gale_ryser(&margins.rows, &margins.cols)
}

/// Parameters `(n, δ, B, C)` of the two-level margin family.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FamilyParams {
    pub n: u32,
    pub delta: f64,
    #[serde(rename = "B")]
    pub b: f64,
    #[serde(rename = "C")]
    pub c: f64,
}

impl FamilyParams {
    pub fn new(n: u32, delta: f64, b: f64, c: f64) -> Result<Self> {
        let p = Self { n, delta, b, c };
        p.validate()?;
        Ok(p)
    }

    /// Basic admissibility: `n ≥ 1`, `0 < δ < 1`, `B > 0`, `C > 0`.
    pub fn validate(&self) -> Result<()> {
        if self.n == 0 {
            return Err(Error::Domain("n must be positive".into()));
        }
        if !(self.delta > 0.0 && self.delta < 1.0) {
            return Err(Error::Domain(format!(
                "delta = {} outside (0, 1)",
                self.delta
            )));
        }
        if !(self.b.is_finite() && self.b > 0.0) {
            return Err(Error::Domain(format!("B = {} must be positive", self.b)));
        }
        if !(self.c.is_finite() && self.c > 0.0) {
            return Err(Error::Domain(format!("C = {} must be positive", self.c)));
        }
        Ok(())
    }

    /// Number of heavy (or light) leading rows, `⌊n^δ⌋`.
    pub fn lead_count(&self) -> u32 {
        snapped_floor(f64::from(self.n).powf(self.delta)) as u32
    }

    /// Margin of the leading rows, `⌊BCn⌋`.
    pub fn lead_margin(&self) -> u32 {
        snapped_floor(self.b * self.c * f64::from(self.n)) as u32
    }

    /// Margin of the bulk rows, `⌊Cn⌋`.
    pub fn bulk_margin(&self) -> u32 {
        snapped_floor(self.c * f64::from(self.n)) as u32
    }
}

/// Floor that treats values within rounding of an integer as that integer,
/// so e.g. `(1/3)·9` and `9^0.5` floor to 3.
fn snapped_floor(x: f64) -> f64 {
    let nearest = x.round();
    if (x - nearest).abs() <= 1e-9 * nearest.abs().max(1.0) {
        nearest
    } else {
        x.floor()
    }
}

/// Row and column margins `(⌊BCn⌋ × ⌊n^δ⌋, ⌊Cn⌋ × n)`, identical on both sides.
pub fn build_family_margins(params: &FamilyParams) -> Result<MarginPair> {
    params.validate()?;
    let lead = params.lead_count();
    let a = params.lead_margin();
    let b = params.bulk_margin();
    if lead == 0 {
        return Err(Error::Domain(format!(
            "floor(n^delta) = 0 for n = {}",
            params.n
        )));
    }
    if a == 0 || b == 0 {
        return Err(Error::Domain(format!(
            "family margins must be positive, got floor(BCn) = {a}, floor(Cn) = {b}"
        )));
    }
    let side: Vec<u32> = std::iter::repeat_n(a, lead as usize)
        .chain(std::iter::repeat_n(b, params.n as usize))
        .collect();
    let width = side.len() as u32;
    if a > width || b > width {
        return Err(Error::Domain(format!(
            "margin exceeds table side {width} (floor(BCn) = {a}, floor(Cn) = {b})"
        )));
    }
    MarginPair::new(side.clone(), side)
}

/// Upper end of the admissible `B` range, `1 / (sqrt(C/3 − C²/3) + C)`.
pub fn bmax(c: f64) -> Result<f64> {
    if !(c > 0.0 && c < 0.75) {
        return Err(Error::Domain(format!("C = {c} outside (0, 3/4)")));
    }
    Ok(1.0 / ((c / 3.0 - c * c / 3.0).sqrt() + c))
}
