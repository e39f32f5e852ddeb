use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::asymptotics::{
    check_admissible, empirical_block_constants, finite_n_typical_prediction, log_count_expansion,
    EmpiricalConstants,
};
use crate::error::{Error, Result};
use crate::margins::{build_family_margins, FamilyParams};
use crate::typical::{entropy_term, solve_typical_table, SolverOptions};

use super::output::{fmt_float, CsvRecord};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceConfig {
    #[serde(rename = "B")]
    pub b: f64,
    #[serde(rename = "C")]
    pub c: f64,
    pub delta: f64,
    pub ns: Vec<u32>,
    pub tolerance: f64,
    pub max_iterations: usize,
    /// Solve on the full `m × m` table instead of the collapsed classes.
    pub generic: bool,
    pub time_budget_secs: f64,
}

impl Default for ConvergenceConfig {
    fn default() -> Self {
        Self {
            b: 0.5,
            c: 0.5,
            delta: 0.5,
            ns: vec![50, 100, 200, 400],
            tolerance: 1e-10,
            max_iterations: 100_000,
            generic: false,
            time_budget_secs: 60.0,
        }
    }
}

impl ConvergenceConfig {
    fn params(&self, n: u32) -> Result<FamilyParams> {
        FamilyParams::new(n, self.delta, self.b, self.c)
    }

    pub fn validate(&self) -> Result<()> {
        if self.ns.is_empty() {
            return Err(Error::Domain("convergence needs at least one n".into()));
        }
        check_admissible(self.b, self.c)?;
        if !(self.tolerance > 0.0) {
            return Err(Error::Domain("tolerance must be positive".into()));
        }
        for &n in &self.ns {
            build_family_margins(&self.params(n)?)?;
        }
        Ok(())
    }

    fn solver(&self) -> SolverOptions {
        SolverOptions {
            tolerance: self.tolerance,
            max_iterations: self.max_iterations,
            collapse: !self.generic,
            time_budget: Some(std::time::Duration::from_secs_f64(self.time_budget_secs)),
        }
    }
}

/// One solved family instance compared with its limits and expansion.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConvergenceRow {
    pub n: u32,
    /// Corner, mixed and bulk block entries of the typical table.
    pub z1: f64,
    pub z2: f64,
    pub z3: f64,
    /// `|z − limit| · n^{1−δ}` for each block.
    pub z1_scaled_err: f64,
    pub z2_scaled_err: f64,
    pub z3_scaled_err: f64,
    pub g: f64,
    pub expansion: f64,
    /// `|g − expansion| / max(n^{3δ−1}, n)`
    pub scaled_residual: f64,
    /// `|g − (n² f(z₃) + 2n⌊n^δ⌋ f(z₂) + ⌊n^δ⌋² f(z₁))|`
    pub block_identity_gap: f64,
    /// `|z₃ − C| ≤ BC · n^{δ−1}`
    pub bulk_bound_ok: bool,
    pub solver_residual: f64,
    pub status: String,
}

impl ConvergenceRow {
    fn failed(n: u32, err: &Error) -> Self {
        Self {
            n,
            z1: f64::NAN,
            z2: f64::NAN,
            z3: f64::NAN,
            z1_scaled_err: f64::NAN,
            z2_scaled_err: f64::NAN,
            z3_scaled_err: f64::NAN,
            g: f64::NAN,
            expansion: f64::NAN,
            scaled_residual: f64::NAN,
            block_identity_gap: f64::NAN,
            bulk_bound_ok: false,
            solver_residual: f64::NAN,
            status: err.to_string(),
        }
    }

    pub fn is_ok(&self) -> bool {
        self.status == "ok"
    }
}

impl CsvRecord for ConvergenceRow {
    fn header() -> &'static [&'static str] {
        &[
            "n",
            "z1",
            "z2",
            "z3",
            "z1_err_scaled",
            "z2_err_scaled",
            "z3_err_scaled",
            "gZ",
            "expansion_prediction",
            "scaled_residual",
            "block_identity_gap",
            "bulk_bound_ok",
            "solver_residual",
            "status",
        ]
    }

    fn fields(&self) -> Vec<String> {
        vec![
            self.n.to_string(),
            fmt_float(self.z1),
            fmt_float(self.z2),
            fmt_float(self.z3),
            fmt_float(self.z1_scaled_err),
            fmt_float(self.z2_scaled_err),
            fmt_float(self.z3_scaled_err),
            fmt_float(self.g),
            fmt_float(self.expansion),
            fmt_float(self.scaled_residual),
            fmt_float(self.block_identity_gap),
            self.bulk_bound_ok.to_string(),
            fmt_float(self.solver_residual),
            self.status.clone(),
        ]
    }
}

fn one_row(config: &ConvergenceConfig, n: u32) -> Result<ConvergenceRow> {
    let params = config.params(n)?;
    let margins = build_family_margins(&params)?;
    let table = solve_typical_table(&margins, &config.solver())?;

    let (lead, a, b) = (
        params.lead_count(),
        params.lead_margin(),
        params.bulk_margin(),
    );
    let z1 = table.block_value(a, a).expect("corner block");
    let z2 = table.block_value(a, b).expect("mixed block");
    let z3 = table.block_value(b, b).expect("bulk block");

    let limits = finite_n_typical_prediction(&params)?;
    let scale = f64::from(n).powf(1.0 - config.delta);
    let expansion = log_count_expansion(&params)?.evaluate(f64::from(n));
    let nf = f64::from(n);
    let lf = f64::from(lead);
    let blocks =
        nf * nf * entropy_term(z3) + 2.0 * nf * lf * entropy_term(z2) + lf * lf * entropy_term(z1);
    let error_scale = nf.powf(3.0 * config.delta - 1.0).max(nf);

    Ok(ConvergenceRow {
        n,
        z1,
        z2,
        z3,
        z1_scaled_err: (z1 - limits.corner).abs() * scale,
        z2_scaled_err: (z2 - limits.edge).abs() * scale,
        z3_scaled_err: (z3 - limits.bulk).abs() * scale,
        g: table.entropy_value,
        expansion,
        scaled_residual: (table.entropy_value - expansion).abs() / error_scale,
        block_identity_gap: (table.entropy_value - blocks).abs(),
        bulk_bound_ok: (z3 - limits.bulk).abs() <= limits.bulk_bound(),
        solver_residual: table.residual,
        status: "ok".into(),
    })
}

/// Solves the family typical table for each `n`. Solver failures are
/// recorded in the row's `status` and the run continues.
pub fn run_convergence(config: &ConvergenceConfig) -> Result<Vec<ConvergenceRow>> {
    config.validate()?;
    Ok(config
        .ns
        .par_iter()
        .map(|&n| one_row(config, n).unwrap_or_else(|e| ConvergenceRow::failed(n, &e)))
        .collect())
}

/// Empirical `γ₁, γ₂` (and the observed bulk constant) over the successful rows.
pub fn empirical_constants(
    config: &ConvergenceConfig,
    rows: &[ConvergenceRow],
) -> Result<EmpiricalConstants> {
    let samples: Vec<(u32, f64, f64, f64)> = rows
        .iter()
        .filter(|r| r.is_ok())
        .map(|r| (r.n, r.z1, r.z2, r.z3))
        .collect();
    empirical_block_constants(config.b, config.c, config.delta, &samples)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn uniform_case_has_equal_blocks() {
        let config = ConvergenceConfig {
            b: 1.0,
            ns: vec![16, 36],
            ..ConvergenceConfig::default()
        };
        let rows = run_convergence(&config).unwrap();
        for r in &rows {
            assert!(r.is_ok());
            assert!((r.z1 - r.z2).abs() < 1e-12 && (r.z2 - r.z3).abs() < 1e-12);
            assert!(r.block_identity_gap < 1e-8);
        }
    }

    #[test]
    fn empty_list_rejected() {
        let config = ConvergenceConfig {
            ns: vec![],
            ..ConvergenceConfig::default()
        };
        assert!(run_convergence(&config).is_err());
    }

    #[test]
    fn failures_are_recorded() {
        let config = ConvergenceConfig {
            ns: vec![50, 100],
            tolerance: 1e-15,
            max_iterations: 1,
            ..ConvergenceConfig::default()
        };
        let rows = run_convergence(&config).unwrap();
        assert_eq!(rows.len(), 2);
        assert!(rows.iter().all(|r| r.status.contains("did not converge")));
        assert!(rows[0].g.is_nan());
    }
}
