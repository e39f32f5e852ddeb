use serde::Serialize;

use crate::error::{Error, Result};
use crate::exact::{count_dp, CountResult, DpOptions};
use crate::independence::log_heuristic;
use crate::margins::{is_feasible, MarginPair};
use crate::typical::{bounds_from_entropy, solve_typical_table, SolverOptions};

use super::output::{fmt_float, CsvRecord};

/// Everything known about one instance: exact count, entropy bounds, the
/// independence estimate and their ratio.
#[derive(Debug, Clone, Serialize)]
pub struct CountReport {
    pub rows: Vec<u32>,
    pub cols: Vec<u32>,
    pub feasible: bool,
    #[serde(flatten)]
    pub count: CountResult,
    /// `g(Z)`, the entropy upper bound on `ln count`.
    pub upper_log: Option<f64>,
    pub lower_log: Option<f64>,
    pub gamma: f64,
    pub log_heuristic: f64,
    /// `ln ρ = ln count − ln I`, when all margins are positive.
    pub log_rho: Option<f64>,
    pub rho: Option<f64>,
    pub notes: Vec<String>,
}

/// Missing values are written as empty fields.
impl CsvRecord for CountReport {
    fn header() -> &'static [&'static str] {
        &[
            "rows",
            "cols",
            "feasible",
            "count",
            "ln_count",
            "gZ",
            "lower_log",
            "gamma",
            "lnI",
            "rho",
        ]
    }

    fn fields(&self) -> Vec<String> {
        let join = |v: &[u32]| v.iter().map(u32::to_string).collect::<Vec<_>>().join(" ");
        let opt = |v: Option<f64>| fmt_float(v.unwrap_or(f64::NAN));
        vec![
            join(&self.rows),
            join(&self.cols),
            self.feasible.to_string(),
            self.count.count.to_string(),
            fmt_float(self.count.log_count),
            opt(self.upper_log),
            opt(self.lower_log),
            fmt_float(self.gamma),
            fmt_float(self.log_heuristic),
            opt(self.rho),
        ]
    }
}

/// Builds the report for raw margin vectors. Vectors that are well formed
/// but have a line sum above the opposite dimension get a zero count.
pub fn count_report(
    rows: &[u32],
    cols: &[u32],
    gamma: f64,
    dp: &DpOptions,
    solver: &SolverOptions,
) -> Result<CountReport> {
    if !(gamma.is_finite() && gamma >= 0.0) {
        return Err(Error::Domain(format!(
            "gamma = {gamma} must be non-negative"
        )));
    }
    match MarginPair::new_or_infeasible(rows.to_vec(), cols.to_vec())? {
        Some(margins) => report_for(&margins, gamma, dp, solver),
        None => Ok(CountReport {
            rows: rows.to_vec(),
            cols: cols.to_vec(),
            feasible: false,
            count: CountResult::new(0u32.into()),
            upper_log: None,
            lower_log: None,
            gamma,
            log_heuristic: f64::NEG_INFINITY,
            log_rho: None,
            rho: None,
            notes: vec!["a line sum exceeds the opposite dimension".to_string()],
        }),
    }
}

fn report_for(
    margins: &MarginPair,
    gamma: f64,
    dp: &DpOptions,
    solver: &SolverOptions,
) -> Result<CountReport> {
    let feasible = is_feasible(margins);
    let count = count_dp(margins, dp)?;
    let mut notes = Vec::new();

    let (upper_log, lower_log) = if !feasible {
        notes.push("infeasible margins".to_string());
        (None, None)
    } else {
        match solve_typical_table(margins, solver) {
            Ok(table) => {
                let b = bounds_from_entropy(margins, table.entropy_value, gamma);
                (Some(b.upper_log), Some(b.lower_log))
            }
            Err(Error::NoInterior) => {
                notes.push("polytope has empty interior; no entropy bound".to_string());
                (None, None)
            }
            Err(e) => return Err(e),
        }
    };

    let log_heuristic = log_heuristic(margins).log_estimate;
    let log_rho = if margins.has_zero_margin() {
        notes.push("zero margin: correlation ratio undefined".to_string());
        None
    } else {
        Some(count.log_count - log_heuristic)
    };

    Ok(CountReport {
        rows: margins.rows().to_vec(),
        cols: margins.cols().to_vec(),
        feasible,
        count,
        upper_log,
        lower_log,
        gamma,
        log_heuristic,
        rho: log_rho.map(f64::exp),
        log_rho,
        notes,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn report(rows: &[u32], cols: &[u32]) -> CountReport {
        count_report(
            rows,
            cols,
            1.0,
            &DpOptions::default(),
            &SolverOptions::default(),
        )
        .unwrap()
    }

    #[test]
    fn three_by_three() {
        let r = report(&[2, 2, 2], &[2, 2, 2]);
        assert_eq!(r.count.count, 6u32.into());
        assert!((r.log_heuristic - 2.160_857).abs() < 1e-6);
        assert!((r.rho.unwrap() - 0.691_358).abs() < 1e-6);
        assert!((r.upper_log.unwrap() - 5.728_628).abs() < 1e-6);
    }

    #[test]
    fn infeasible_reports_zero() {
        for (rows, cols) in [(&[2, 2, 2, 0][..], &[4, 1, 1][..]), (&[2, 2], &[3, 1])] {
            let r = report(rows, cols);
            assert!(!r.feasible);
            assert!(r.count.is_zero());
            assert!(r.upper_log.is_none());
        }
    }

    #[test]
    fn malformed_vectors_are_errors() {
        let opts = (DpOptions::default(), SolverOptions::default());
        assert!(count_report(&[2, 2], &[3, 2], 1.0, &opts.0, &opts.1).is_err());
        assert!(count_report(&[1], &[1], -1.0, &opts.0, &opts.1).is_err());
    }
}
