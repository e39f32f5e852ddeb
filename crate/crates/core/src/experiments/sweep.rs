use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::asymptotics::{
    check_admissible, delta, delta_bounds, gamma_c, log_count_expansion, log_heuristic_expansion,
    x_value,
};
use crate::error::{Error, Result};
use crate::margins::{bmax, FamilyParams};

use super::output::{fmt_float, CsvRecord};

/// A `(B, C)` grid. For each `C`, `B` runs over `b_values` when given,
/// otherwise over `bmax(C)·(j+1)/(b_steps+1)` for `j < b_steps`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepConfig {
    #[serde(rename = "C")]
    pub c_values: Vec<f64>,
    pub b_steps: usize,
    #[serde(rename = "B", default, skip_serializing_if = "Option::is_none")]
    pub b_values: Option<Vec<f64>>,
}

impl SweepConfig {
    /// `c_steps × b_steps` grid strictly inside the admissible region.
    pub fn uniform(c_steps: usize, b_steps: usize) -> Self {
        Self {
            c_values: uniform_c_values(c_steps),
            b_steps,
            b_values: None,
        }
    }

    fn points(&self) -> Vec<(f64, f64)> {
        let mut points = Vec::new();
        for &c in &self.c_values {
            match (&self.b_values, bmax(c)) {
                (Some(bs), _) => points.extend(bs.iter().map(|&b| (b, c))),
                (None, Ok(top)) => points.extend(
                    (0..self.b_steps)
                        .map(|j| (top * (j + 1) as f64 / (self.b_steps + 1) as f64, c)),
                ),
                // inadmissible C: one flagged row
                (None, Err(_)) => points.push((f64::NAN, c)),
            }
        }
        points
    }
}

/// `C = 0.75·(i+1)/(steps+1)` for `i < steps`.
pub fn uniform_c_values(steps: usize) -> Vec<f64> {
    (0..steps)
        .map(|i| 0.75 * (i + 1) as f64 / (steps + 1) as f64)
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRow {
    #[serde(rename = "B")]
    pub b: f64,
    #[serde(rename = "C")]
    pub c: f64,
    pub delta: f64,
    pub lower_bound: f64,
    pub gamma_c: f64,
    pub x_value: f64,
    /// `Δ − (c_n2d(count) − c_n2d(heuristic))`
    pub identity_residual: f64,
    /// `lower_bound < Δ`
    pub lower_ok: bool,
    /// `Δ ≤ 0`
    pub upper_ok: bool,
    pub status: String,
}

impl SweepRow {
    pub fn is_ok(&self) -> bool {
        self.status == "ok"
    }
}

impl CsvRecord for SweepRow {
    fn header() -> &'static [&'static str] {
        &[
            "B",
            "C",
            "delta",
            "lower_bound",
            "gamma_c",
            "x_value",
            "identity_residual",
            "lower_ok",
            "upper_ok",
            "status",
        ]
    }

    fn fields(&self) -> Vec<String> {
        vec![
            fmt_float(self.b),
            fmt_float(self.c),
            fmt_float(self.delta),
            fmt_float(self.lower_bound),
            fmt_float(self.gamma_c),
            fmt_float(self.x_value),
            fmt_float(self.identity_residual),
            self.lower_ok.to_string(),
            self.upper_ok.to_string(),
            self.status.clone(),
        ]
    }
}

fn evaluate(b: f64, c: f64) -> Result<SweepRow> {
    check_admissible(b, c)?;
    let params = FamilyParams::new(1, 0.5, b, c)?;
    let d = delta(b, c)?;
    let gap = log_count_expansion(&params)?.c_n2d - log_heuristic_expansion(&params)?.c_n2d;
    let bounds = delta_bounds(c)?;
    Ok(SweepRow {
        b,
        c,
        delta: d,
        lower_bound: bounds.lower,
        gamma_c: gamma_c(c)?,
        x_value: x_value(b, c),
        identity_residual: d - gap,
        lower_ok: bounds.lower < d,
        upper_ok: d <= bounds.upper,
        status: "ok".into(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SweepSummary {
    pub points: usize,
    pub skipped: usize,
    pub max_identity_residual: f64,
    pub lower_violations: usize,
    pub upper_violations: usize,
}

impl SweepSummary {
    pub fn of(rows: &[SweepRow]) -> Self {
        let ok: Vec<&SweepRow> = rows.iter().filter(|r| r.is_ok()).collect();
        Self {
            points: rows.len(),
            skipped: rows.len() - ok.len(),
            max_identity_residual: ok
                .iter()
                .map(|r| r.identity_residual.abs())
                .fold(0.0, f64::max),
            lower_violations: ok.iter().filter(|r| !r.lower_ok).count(),
            upper_violations: ok.iter().filter(|r| !r.upper_ok).count(),
        }
    }
}

/// Evaluates every grid point; inadmissible points become flagged rows.
pub fn run_sweep(config: &SweepConfig) -> Result<Vec<SweepRow>> {
    let points = config.points();
    if config.c_values.is_empty()
        || points.is_empty()
        || (config.b_values.is_none() && config.b_steps == 0)
    {
        return Err(Error::Domain("empty sweep grid".into()));
    }
    Ok(points
        .par_iter()
        .map(|&(b, c)| {
            evaluate(b, c).unwrap_or_else(|e| SweepRow {
                b,
                c,
                delta: f64::NAN,
                lower_bound: f64::NAN,
                gamma_c: f64::NAN,
                x_value: f64::NAN,
                identity_residual: f64::NAN,
                lower_ok: false,
                upper_ok: false,
                status: e.to_string(),
            })
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_grid_is_an_error() {
        assert!(run_sweep(&SweepConfig::uniform(0, 10)).is_err());
        assert!(run_sweep(&SweepConfig::uniform(10, 0)).is_err());
    }

    #[test]
    fn flagged_rows_for_bad_points() {
        let config = SweepConfig {
            c_values: vec![0.5, 0.9],
            b_steps: 0,
            b_values: Some(vec![0.5, 5.0]),
        };
        let rows = run_sweep(&config).unwrap();
        assert_eq!(rows.len(), 4);
        assert!(rows[0].is_ok());
        assert!(!rows[1].is_ok());
        assert!(!rows[2].is_ok() && !rows[3].is_ok());
        let s = SweepSummary::of(&rows);
        assert_eq!(s.skipped, 3);
    }

    #[test]
    fn order_is_grid_order() {
        let rows = run_sweep(&SweepConfig::uniform(3, 4)).unwrap();
        let cs: Vec<f64> = rows.iter().map(|r| r.c).collect();
        assert!(cs.windows(2).all(|w| w[0] <= w[1]));
        assert_eq!(rows.len(), 12);
    }
}
