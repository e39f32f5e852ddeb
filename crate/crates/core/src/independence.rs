//! The independence estimate
//! `I(r, c) = C(mn, N)^{-1} · Π_i C(n, r_i) · Π_j C(m, c_j)`.

use num_bigint::BigUint;
use num_traits::One;
use serde::Serialize;

use crate::margins::MarginPair;
use crate::numeric::{binomial_big, ln_biguint, ln_binomial};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct HeuristicResult {
    /// `ln I(r, c)`
    pub log_estimate: f64,
    /// Total number of ones `N`.
    #[serde(rename = "N")]
    pub total: u64,
}

/// `ln I(r, c)` through log-gamma; scales to tables with millions of cells.
pub fn log_heuristic(margins: &MarginPair) -> HeuristicResult {
    let (m, n) = (margins.m() as u64, margins.n() as u64);
    let total = margins.total();
    if total == 0 || total == m * n {
        return HeuristicResult {
            log_estimate: 0.0,
            total,
        };
    }
    let rows: f64 = margins
        .rows()
        .iter()
        .map(|&r| ln_binomial(n, u64::from(r)))
        .sum();
    let cols: f64 = margins
        .cols()
        .iter()
        .map(|&c| ln_binomial(m, u64::from(c)))
        .sum();
    HeuristicResult {
        log_estimate: rows + cols - ln_binomial(m * n, total),
        total,
    }
}

/// `I(r, c)` as an exact fraction `(numerator, denominator)`, unreduced.
pub fn heuristic_fraction(margins: &MarginPair) -> (BigUint, BigUint) {
    let (m, n) = (margins.m() as u64, margins.n() as u64);
    let mut num = BigUint::one();
    for &r in margins.rows() {
        num *= binomial_big(n, u64::from(r));
    }
    for &c in margins.cols() {
        num *= binomial_big(m, u64::from(c));
    }
    (num, binomial_big(m * n, margins.total()))
}

/// `ln I(r, c)` from the exact fraction. Intended for small instances.
pub fn log_heuristic_exact(margins: &MarginPair) -> f64 {
    let (num, den) = heuristic_fraction(margins);
    ln_biguint(&num) - ln_biguint(&den)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn mp(rows: &[u32], cols: &[u32]) -> MarginPair {
        MarginPair::new(rows.to_vec(), cols.to_vec()).unwrap()
    }

    #[test]
    fn examples() {
        let h = log_heuristic(&mp(&[1, 1], &[1, 1]));
        assert!((h.log_estimate - (8.0f64 / 3.0).ln()).abs() < 1e-12);
        assert!((h.log_estimate - 0.980_829).abs() < 1e-6);
        assert_eq!(h.total, 2);

        let h = log_heuristic(&mp(&[2, 2, 2], &[2, 2, 2]));
        assert!((h.log_estimate - (729.0f64 / 84.0).ln()).abs() < 1e-12);
        assert!((h.log_estimate - 2.160_857).abs() < 1e-6);

        let h = log_heuristic(&mp(&[5], &[1; 5]));
        assert_eq!(h.log_estimate, 0.0);
    }

    #[test]
    fn exact_fraction() {
        let (num, den) = heuristic_fraction(&mp(&[1, 1], &[1, 1]));
        assert_eq!(num, BigUint::from(16u32));
        assert_eq!(den, BigUint::from(6u32));
    }

    #[test]
    fn empty_and_full_are_zero() {
        assert_eq!(log_heuristic(&mp(&[0, 0], &[0, 0, 0])).log_estimate, 0.0);
        assert_eq!(log_heuristic(&mp(&[3, 3], &[2, 2, 2])).log_estimate, 0.0);
        assert!(log_heuristic_exact(&mp(&[3, 3], &[2, 2, 2])).abs() < 1e-15);
    }

    #[test]
    fn transposition_and_complement() {
        let a = mp(&[3, 1, 2, 0], &[2, 2, 1, 1, 0]);
        let h = log_heuristic(&a).log_estimate;
        assert!((log_heuristic(&a.transpose()).log_estimate - h).abs() < 1e-12);
        assert!((log_heuristic(&a.complement()).log_estimate - h).abs() < 1e-12);
    }
}
