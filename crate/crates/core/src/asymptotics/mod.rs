//! Closed-form asymptotics for the two-level margin family.
//!
//! For margins with `⌊n^δ⌋` lines of sum `⌊BCn⌋` and `n` lines of sum `⌊Cn⌋`,
//! both `ln |M|` and `ln I` expand as
//! `c₂ n² + c₁ n^{1+δ} + c₀ n^{2δ} + O(n^{3δ−1} + n log n)`.
//! The first two coefficients coincide; the gap in the third is `Δ_{B,C}`.
//!
//! Each coefficient is produced twice: by its closed form and by truncated
//! series arithmetic in `ε = n^{δ−1}` ([`series`]). Tests hold the two routes
//! to `1e-12`.

pub mod series;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::margins::{bmax, FamilyParams};
use crate::typical::entropy_term;

use self::series::Series2;

/// Strict-inequality margin on every admissibility check.
pub const ADMISSIBILITY_EPS: f64 = 1e-9;

/// Checks `0 < C < 3/4` and `0 < B < bmax(C)`, each with margin
/// [`ADMISSIBILITY_EPS`].
pub fn check_admissible(b: f64, c: f64) -> Result<()> {
    let eps = ADMISSIBILITY_EPS;
    if !(c > eps && c < 0.75 - eps) {
        return Err(Error::Domain(format!("C = {c} outside (0, 3/4)")));
    }
    let top = bmax(c)?;
    if !(b > eps && b < top - eps) {
        return Err(Error::Domain(format!(
            "B = {b} outside (0, {top}) for C = {c}"
        )));
    }
    Ok(())
}

/// The weaker domain of the independence-estimate expansion:
/// `0 < C < 1`, `0 < B < 1/C`.
pub fn check_heuristic_domain(b: f64, c: f64) -> Result<()> {
    let eps = ADMISSIBILITY_EPS;
    if !(c > eps && c < 1.0 - eps) {
        return Err(Error::Domain(format!("C = {c} outside (0, 1)")));
    }
    if !(b > eps && b * c < 1.0 - eps) {
        return Err(Error::Domain(format!(
            "B = {b} outside (0, 1/C) for C = {c}"
        )));
    }
    Ok(())
}

fn check_delta(delta: f64) -> Result<()> {
    if delta > 0.0 && delta < 1.0 {
        Ok(())
    } else {
        Err(Error::Domain(format!("delta = {delta} outside (0, 1)")))
    }
}

/// Limit of the corner entry of the typical table,
/// `z₁₁* = B²(1−C) / (B² − 2B + 1/C)`.
pub fn z11_star(b: f64, c: f64) -> Result<f64> {
    check_admissible(b, c)?;
    Ok(z11_unchecked(b, c))
}

fn z11_unchecked(b: f64, c: f64) -> f64 {
    b * b * (1.0 - c) / (b * b - 2.0 * b + 1.0 / c)
}

/// `log((1−a)/a)`, the derivative of the Bernoulli entropy.
fn entropy_slope(a: f64) -> f64 {
    ((1.0 - a) / a).ln()
}

/// Coefficients of `n²`, `n^{1+δ}`, `n^{2δ}` in a log-count expansion.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExpansionCoeffs {
    pub c_n2: f64,
    pub c_n1d: f64,
    pub c_n2d: f64,
    /// Exponents of the remainder `O(n^{3δ−1} + n log n)`: `(3δ − 1, 1)`.
    pub error_exponents: (f64, f64),
    /// The second remainder term carries an extra `log n`.
    pub n_log_n: bool,
    /// `2δ ≤ 1`: the `n^{2δ}` term is no larger than the remainder.
    pub dominated_by_error: bool,
    pub delta: f64,
}

impl ExpansionCoeffs {
    fn new(c_n2: f64, c_n1d: f64, c_n2d: f64, delta: f64) -> Self {
        Self {
            c_n2,
            c_n1d,
            c_n2d,
            error_exponents: (3.0 * delta - 1.0, 1.0),
            n_log_n: true,
            dominated_by_error: 2.0 * delta <= 1.0,
            delta,
        }
    }

    /// `c₂ n² + c₁ n^{1+δ} + c₀ n^{2δ}`
    pub fn evaluate(&self, n: f64) -> f64 {
        self.c_n2 * n * n
            + self.c_n1d * n.powf(1.0 + self.delta)
            + self.c_n2d * n.powf(2.0 * self.delta)
    }

    /// JSON record keyed by the power of `n`.
    pub fn record(&self) -> ExpansionRecord {
        ExpansionRecord {
            terms: Terms {
                n2: self.c_n2,
                n1d: self.c_n1d,
                n2d: self.c_n2d,
            },
            exponents: Exponents {
                n2: 2.0,
                n1d: 1.0 + self.delta,
                n2d: 2.0 * self.delta,
            },
            error_exponents: [self.error_exponents.0, self.error_exponents.1],
            n_log_n: self.n_log_n,
            dominated_by_error: self.dominated_by_error,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ExpansionRecord {
    pub terms: Terms,
    pub exponents: Exponents,
    pub error_exponents: [f64; 2],
    pub n_log_n: bool,
    pub dominated_by_error: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct Terms {
    #[serde(rename = "n^2")]
    pub n2: f64,
    #[serde(rename = "n^(1+delta)")]
    pub n1d: f64,
    #[serde(rename = "n^(2delta)")]
    pub n2d: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct Exponents {
    #[serde(rename = "n^2")]
    pub n2: f64,
    #[serde(rename = "n^(1+delta)")]
    pub n1d: f64,
    #[serde(rename = "n^(2delta)")]
    pub n2d: f64,
}

/// Leading-order expansion of `ln |M_{n,δ}(B, C)|`.
pub fn log_count_expansion(params: &FamilyParams) -> Result<ExpansionCoeffs> {
    check_delta(params.delta)?;
    let (b, c) = (params.b, params.c);
    check_admissible(b, c)?;
    let bc = b * c;
    let z = z11_unchecked(b, c);
    let c_n1d = 2.0 * entropy_term(bc) - bc * ((1.0 - c) / c).ln();
    let c_n2d = entropy_term(z) + z * ((1.0 - c) / c * (bc * bc) / ((1.0 - bc) * (1.0 - bc))).ln()
        - b * b * c / (2.0 * (1.0 - c));
    Ok(ExpansionCoeffs::new(
        entropy_term(c),
        c_n1d,
        c_n2d,
        params.delta,
    ))
}

/// Same coefficients as [`log_count_expansion`], assembled by expanding
/// `g(Z)/n² = f(z₃) + 2ε f(z₂) + ε² f(z₁)` in `ε = n^{δ−1}` with the block
/// entries `z₃ = C − BCε + z₁₁*ε²`, `z₂ = BC − z₁₁*ε`, `z₁ = z₁₁*`.
pub fn log_count_expansion_taylor(params: &FamilyParams) -> Result<ExpansionCoeffs> {
    check_delta(params.delta)?;
    let (b, c) = (params.b, params.c);
    check_admissible(b, c)?;
    let bc = b * c;
    let z = z11_unchecked(b, c);

    let bulk = Series2::new(c, -bc, z).bernoulli_entropy();
    let edge = Series2::new(bc, -z, 0.0)
        .bernoulli_entropy()
        .scale(2.0)
        .shift();
    let corner = Series2::constant(entropy_term(z)).shift().shift();
    let g = bulk + edge + corner;
    Ok(ExpansionCoeffs::new(g.c0, g.c1, g.c2, params.delta))
}

/// Same coefficients as [`log_count_expansion`], built directly from the
/// first- and second-order Taylor coefficients of `f` at `C`, `BC`, `z₁₁*`.
pub fn log_count_expansion_taylor_steps(params: &FamilyParams) -> Result<ExpansionCoeffs> {
    check_delta(params.delta)?;
    let (b, c) = (params.b, params.c);
    check_admissible(b, c)?;
    let bc = b * c;
    let z = z11_unchecked(b, c);
    let curvature = |a: f64| 1.0 / (2.0 * (a - 1.0) * a);

    // f(z₃) = f(C) + f'(C)(−BCε + z*ε²) + ½f''(C)(BCε)² + …
    // 2ε f(z₂) = 2ε f(BC) − 2 f'(BC) z* ε² + …
    let c_n1d = 2.0 * entropy_term(bc) - entropy_slope(c) * bc;
    let c_n2d = entropy_slope(c) * z + curvature(c) * bc * bc - 2.0 * entropy_slope(bc) * z
        + entropy_term(z);
    Ok(ExpansionCoeffs::new(
        entropy_term(c),
        c_n1d,
        c_n2d,
        params.delta,
    ))
}

/// Leading-order expansion of `ln I_{n,δ}(B, C)`.
pub fn log_heuristic_expansion(params: &FamilyParams) -> Result<ExpansionCoeffs> {
    check_delta(params.delta)?;
    let (b, c) = (params.b, params.c);
    check_heuristic_domain(b, c)?;
    let bc = b * c;
    let c_n1d = 2.0 * entropy_term(bc) - bc * ((1.0 - c) / c).ln();
    let c_n2d = (b * b * c - 4.0 * bc + 2.0 * c) / (2.0 * (1.0 - c)) + (1.0 - c).ln()
        - 2.0 * (1.0 - bc).ln();
    Ok(ExpansionCoeffs::new(
        entropy_term(c),
        c_n1d,
        c_n2d,
        params.delta,
    ))
}

/// Same coefficients as [`log_heuristic_expansion`], from the Stirling form
///
/// ```text
/// ln I ≈ N ln N + (M−N) ln(M−N) − Σ_i [r_i ln r_i + (m−r_i) ln(m−r_i)]
///                               − Σ_j [c_j ln c_j + (m−c_j) ln(m−c_j)]
/// ```
///
/// with `m = n(1+ε)`, `M = m²`, `N = n²(C + BCε)`, expanded in `ε`. The
/// `ln n` parts cancel identically.
pub fn log_heuristic_expansion_stirling(params: &FamilyParams) -> Result<ExpansionCoeffs> {
    check_delta(params.delta)?;
    let (b, c) = (params.b, params.c);
    check_heuristic_domain(b, c)?;
    let bc = b * c;

    let ones = Series2::new(c, bc, 0.0).xlnx();
    let zeros = Series2::new(1.0 - c, 2.0 - bc, 1.0).xlnx();
    let lead = (Series2::constant(bc).xlnx() + Series2::new(1.0 - bc, 1.0, 0.0).xlnx())
        .shift()
        .scale(-2.0);
    let bulk = (Series2::constant(c).xlnx() + Series2::new(1.0 - c, 1.0, 0.0).xlnx()).scale(-2.0);
    let total = ones + zeros + lead + bulk;
    Ok(ExpansionCoeffs::new(
        total.c0,
        total.c1,
        total.c2,
        params.delta,
    ))
}

/// `x = (B²C − 2BC + 1)/(1 − C)`, in terms of which `Δ = 1 − x + ln x`.
pub fn x_value(b: f64, c: f64) -> f64 {
    (b * b * c - 2.0 * b * c + 1.0) / (1.0 - c)
}

/// `Δ_{B,C} = 1 − (B²C − 2BC + 1)/(1−C) − ln((1−C)/(B²C − 2BC + 1))`.
///
/// At `B = 1` both the ratio and the log argument are exactly 1 in floating
/// point, so the result is exactly 0.
pub fn delta(b: f64, c: f64) -> Result<f64> {
    check_admissible(b, c)?;
    let q = b * b * c - 2.0 * b * c + 1.0;
    Ok(1.0 - q / (1.0 - c) - ((1.0 - c) / q).ln())
}

/// `1 − x + ln x`
pub fn delta_from_x(x: f64) -> f64 {
    1.0 - x + x.ln()
}

/// `γ_c` with `b = sqrt(C/3 − C²/3) + C`:
/// `(C − 2Cb + b²) / ((1−C) b²)`.
pub fn gamma_c(c: f64) -> Result<f64> {
    if !(c > 0.0 && c < 0.75) {
        return Err(Error::Domain(format!("C = {c} outside (0, 3/4)")));
    }
    let b = (c / 3.0 - c * c / 3.0).sqrt() + c;
    Ok((c - 2.0 * c * b + b * b) / ((1.0 - c) * b * b))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DeltaBounds {
    /// `min` of the two candidates below.
    pub lower: f64,
    pub upper: f64,
    /// `−1/C + ln(1/C) + 1`
    pub small_b_candidate: f64,
    /// `−γ_c + ln γ_c + 1`
    pub edge_candidate: f64,
}

/// The stated sandwich `min{−1/C + ln(1/C) + 1, −γ_c + ln γ_c + 1} < Δ ≤ 0`.
///
/// For `1/2 < C < 3/4` the lower value is not a true lower bound near `B = 0`;
/// see [`delta_infimum`].
pub fn delta_bounds(c: f64) -> Result<DeltaBounds> {
    let g = gamma_c(c)?;
    let small_b_candidate = delta_from_x(1.0 / c);
    let edge_candidate = delta_from_x(g);
    Ok(DeltaBounds {
        lower: small_b_candidate.min(edge_candidate),
        upper: 0.0,
        small_b_candidate,
        edge_candidate,
    })
}

/// Exact infimum of `Δ(·, C)` over `0 < B < bmax(C)`.
///
/// `x(B)` is a parabola with minimum 1 at `B = 1`, so the infimum of
/// `1 − x + ln x` is reached at an end of the range: `x(0) = 1/(1−C)` or
/// `x(bmax) = γ_c`.
pub fn delta_infimum(c: f64) -> Result<f64> {
    let g = gamma_c(c)?;
    Ok(delta_from_x(1.0 / (1.0 - c)).min(delta_from_x(g)))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DeltaResult {
    pub delta: f64,
    pub lower_bound: f64,
    pub gamma_c: f64,
}

pub fn delta_result(b: f64, c: f64) -> Result<DeltaResult> {
    Ok(DeltaResult {
        delta: delta(b, c)?,
        lower_bound: delta_bounds(c)?.lower,
        gamma_c: gamma_c(c)?,
    })
}

/// Limits of the three distinct typical-table entries of the family.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BlockPrediction {
    /// Corner block, `z₁₁*`.
    pub corner: f64,
    /// Mixed block, `BC`.
    pub edge: f64,
    /// Bulk block, `C`.
    pub bulk: f64,
    /// Rate `n^{δ−1}` at which the blocks approach their limits.
    pub rate: f64,
    /// Explicit constant of the bulk bound `|z₃ − C| ≤ BC n^{δ−1}`.
    pub bulk_constant: f64,
}

impl BlockPrediction {
    pub fn bulk_bound(&self) -> f64 {
        self.bulk_constant * self.rate
    }
}

pub fn finite_n_typical_prediction(params: &FamilyParams) -> Result<BlockPrediction> {
    params.validate()?;
    let (b, c) = (params.b, params.c);
    check_admissible(b, c)?;
    Ok(BlockPrediction {
        corner: z11_unchecked(b, c),
        edge: b * c,
        bulk: c,
        rate: f64::from(params.n).powf(params.delta - 1.0),
        bulk_constant: b * c,
    })
}

/// Empirical constants `sup_n |z(n) − limit| · n^{1−δ}` for the three blocks.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EmpiricalConstants {
    pub corner: f64,
    pub edge: f64,
    pub bulk: f64,
}

/// `samples` are `(n, corner, edge, bulk)` block values of solved tables.
pub fn empirical_block_constants(
    b: f64,
    c: f64,
    delta: f64,
    samples: &[(u32, f64, f64, f64)],
) -> Result<EmpiricalConstants> {
    check_admissible(b, c)?;
    check_delta(delta)?;
    let z = z11_unchecked(b, c);
    let mut k = EmpiricalConstants {
        corner: 0.0,
        edge: 0.0,
        bulk: 0.0,
    };
    for &(n, z1, z2, z3) in samples {
        let scale = f64::from(n).powf(1.0 - delta);
        k.corner = k.corner.max((z1 - z).abs() * scale);
        k.edge = k.edge.max((z2 - b * c).abs() * scale);
        k.bulk = k.bulk.max((z3 - c).abs() * scale);
    }
    Ok(k)
}
