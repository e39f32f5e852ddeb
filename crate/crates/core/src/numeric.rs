use num_bigint::BigUint;
use num_traits::{ToPrimitive, Zero};
use statrs::function::gamma::ln_gamma;

/// Natural logarithm of a big integer; `-inf` for zero.
pub fn ln_biguint(x: &BigUint) -> f64 {
    if x.is_zero() {
        return f64::NEG_INFINITY;
    }
    let bits = x.bits();
    if bits <= 1000 {
        return x.to_f64().expect("fits in f64").ln();
    }
    // keep the top 64 bits, account for the rest as a power of two
    let shift = bits - 64;
    let top = (x >> shift).to_f64().expect("64-bit value");
    top.ln() + shift as f64 * std::f64::consts::LN_2
}

/// `ln C(n, k)` via log-gamma.
pub fn ln_binomial(n: u64, k: u64) -> f64 {
    debug_assert!(k <= n);
    if k == 0 || k == n {
        return 0.0;
    }
    ln_gamma(n as f64 + 1.0) - ln_gamma(k as f64 + 1.0) - ln_gamma((n - k) as f64 + 1.0)
}

pub fn binomial_big(n: u64, k: u64) -> BigUint {
    num_integer::binomial(BigUint::from(n), BigUint::from(k))
}

/// Logistic function `e^t / (1 + e^t)`, evaluated without overflow.
pub fn logistic(t: f64) -> f64 {
    if t >= 0.0 {
        1.0 / (1.0 + (-t).exp())
    } else {
        let e = t.exp();
        e / (1.0 + e)
    }
}

/// Compensated (Neumaier) summation.
pub fn stable_sum<I: IntoIterator<Item = f64>>(values: I) -> f64 {
    let (mut sum, mut comp) = (0.0f64, 0.0f64);
    for v in values {
        let t = sum + v;
        if sum.abs() >= v.abs() {
            comp += (sum - t) + v;
        } else {
            comp += (v - t) + sum;
        }
        sum = t;
    }
    sum + comp
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ln_big_matches_small_and_huge() {
        assert_eq!(ln_biguint(&BigUint::from(1u32)), 0.0);
        assert!((ln_biguint(&BigUint::from(6u32)) - 6f64.ln()).abs() < 1e-15);
        let big = BigUint::from(3u32).pow(2000);
        let expect = 2000.0 * 3f64.ln();
        assert!((ln_biguint(&big) - expect).abs() / expect < 1e-14);
        assert_eq!(ln_biguint(&BigUint::zero()), f64::NEG_INFINITY);
    }

    #[test]
    fn ln_binomial_agrees_with_exact() {
        for (n, k) in [(4u64, 2u64), (9, 6), (60, 30), (200, 73)] {
            let exact = ln_biguint(&binomial_big(n, k));
            assert!((ln_binomial(n, k) - exact).abs() < 1e-10 * exact.max(1.0));
        }
    }

    #[test]
    fn compensated_sum_recovers_small_terms() {
        let xs = [1e16, 1.0, -1e16, 1.0];
        assert_eq!(stable_sum(xs), 2.0);
        assert_eq!(stable_sum(std::iter::repeat(0.1).take(10)), 1.0);
    }

    #[test]
    fn logistic_tails() {
        assert_eq!(logistic(0.0), 0.5);
        assert!(logistic(800.0) == 1.0);
        assert!(logistic(-800.0) == 0.0);
        assert!((logistic(2.0) + logistic(-2.0) - 1.0).abs() < 1e-15);
    }
}
