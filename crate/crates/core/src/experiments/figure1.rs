use serde::{Deserialize, Serialize};

use crate::asymptotics::{check_admissible, delta};
use crate::error::{Error, Result};
use crate::margins::bmax;

use super::output::{fmt_float, CsvRecord};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Figure1Config {
    #[serde(rename = "C")]
    pub c_values: Vec<f64>,
    /// Number of uniformly spaced interior `B` samples per curve.
    pub resolution: usize,
}

impl Default for Figure1Config {
    fn default() -> Self {
        Self {
            c_values: vec![0.5, 0.25, 0.625, 0.125],
            resolution: 200,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Figure1Row {
    #[serde(rename = "C")]
    pub c: f64,
    #[serde(rename = "B")]
    pub b: f64,
    pub delta: f64,
}

impl CsvRecord for Figure1Row {
    fn header() -> &'static [&'static str] {
        &["C", "B", "delta"]
    }

    fn fields(&self) -> Vec<String> {
        vec![fmt_float(self.c), fmt_float(self.b), fmt_float(self.delta)]
    }
}

/// `B` samples for one curve: `bmax·k/(resolution+1)` for
/// `k = 1..=resolution`, plus `B = 1` exactly, in increasing order.
pub fn b_samples(c: f64, resolution: usize) -> Result<Vec<f64>> {
    let top = bmax(c)?;
    let mut bs: Vec<f64> = (1..=resolution)
        .map(|k| top * k as f64 / (resolution + 1) as f64)
        .filter(|&b| check_admissible(b, c).is_ok())
        .collect();
    if !bs.contains(&1.0) {
        bs.push(1.0);
    }
    bs.sort_by(f64::total_cmp);
    Ok(bs)
}

/// `Δ_{B,C}` against `B` for each requested `C`.
pub fn figure1(config: &Figure1Config) -> Result<Vec<Figure1Row>> {
    if config.c_values.is_empty() || config.resolution == 0 {
        return Err(Error::Domain(
            "figure1 needs at least one C and one B sample".into(),
        ));
    }
    for &c in &config.c_values {
        check_admissible(1.0, c)?;
    }
    let mut rows = Vec::new();
    for &c in &config.c_values {
        for b in b_samples(c, config.resolution)? {
            rows.push(Figure1Row {
                c,
                b,
                delta: delta(b, c)?,
            });
        }
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn includes_b_one_and_stays_inside() {
        let rows = figure1(&Figure1Config {
            c_values: vec![0.125],
            resolution: 50,
        })
        .unwrap();
        assert_eq!(rows.len(), 51);
        let at_one = rows.iter().find(|r| r.b == 1.0).unwrap();
        assert_eq!(at_one.delta, 0.0);
        assert!(rows.iter().all(|r| r.b > 0.0 && r.b < bmax(0.125).unwrap()));
        assert!(rows.iter().filter(|r| r.b != 1.0).all(|r| r.delta < 0.0));
    }

    #[test]
    fn rejects_bad_input() {
        assert!(figure1(&Figure1Config {
            c_values: vec![],
            resolution: 10
        })
        .is_err());
        assert!(figure1(&Figure1Config {
            c_values: vec![0.5, 0.8],
            resolution: 10
        })
        .is_err());
    }
}
