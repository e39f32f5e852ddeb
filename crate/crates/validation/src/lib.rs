//! Test-only oracles for `bintab`: random margin generators, explicit table
//! enumeration, a primal maximizer of the entropy and an independent
//! peeling of forced lines. The property tests live in this crate too.

use bintab::MarginPair;
use rand::Rng;

/// Margins of a random 0-1 matrix of density `p`.
pub fn random_margins<R: Rng>(rng: &mut R, m: usize, n: usize, p: f64) -> MarginPair {
    let mut rows = vec![0u32; m];
    let mut cols = vec![0u32; n];
    for r in rows.iter_mut() {
        for c in cols.iter_mut() {
            if rng.gen_bool(p) {
                *r += 1;
                *c += 1;
            }
        }
    }
    MarginPair::new(rows, cols).unwrap()
}

/// Random vectors with equal totals and entries in range; often infeasible.
pub fn random_vectors<R: Rng>(rng: &mut R, m: usize, n: usize) -> MarginPair {
    loop {
        let rows: Vec<u32> = (0..m).map(|_| rng.gen_range(0..=n as u32)).collect();
        let cols: Vec<u32> = (0..n).map(|_| rng.gen_range(0..=m as u32)).collect();
        if let Ok(mp) = MarginPair::new(rows, cols) {
            return mp;
        }
    }
}

/// Every 0-1 matrix with the given margins, row-major.
pub fn enumerate_tables(margins: &MarginPair) -> Vec<Vec<u8>> {
    fn go(
        i: usize,
        margins: &MarginPair,
        residual: &mut Vec<u32>,
        current: &mut Vec<u8>,
        out: &mut Vec<Vec<u8>>,
    ) {
        let n = margins.n();
        if i == margins.m() {
            if residual.iter().all(|&c| c == 0) {
                out.push(current.clone());
            }
            return;
        }
        let r = margins.rows()[i] as usize;
        for subset in 0u32..(1 << n) {
            if subset.count_ones() as usize != r
                || (0..n).any(|j| subset >> j & 1 == 1 && residual[j] == 0)
            {
                continue;
            }
            for j in 0..n {
                let bit = (subset >> j & 1) as u8;
                current.push(bit);
                residual[j] -= u32::from(bit);
            }
            go(i + 1, margins, residual, current, out);
            for j in (0..n).rev() {
                let bit = current.pop().unwrap();
                residual[j] += u32::from(bit);
            }
        }
    }
    let mut out = Vec::new();
    go(
        0,
        margins,
        &mut margins.cols().to_vec(),
        &mut Vec::new(),
        &mut out,
    );
    out
}

pub fn entropy_of(x: &[f64]) -> f64 {
    x.iter()
        .map(|&z| bintab::bernoulli_entropy(z.clamp(0.0, 1.0)).unwrap())
        .sum()
}

/// Primal maximizer of `Σ f(x_ij)` by gradient ascent inside the polytope:
/// the gradient is projected onto the zero-margin subspace and steps are
/// backtracked so iterates stay in `(0,1)` and the objective increases.
/// Only valid when the maximizer is interior.
pub fn projected_gradient(margins: &MarginPair, tol: f64, max_steps: usize) -> Vec<f64> {
    let (m, n) = (margins.m(), margins.n());
    // r_i c_j / N satisfies the margins
    let total = margins.total() as f64;
    let mut x: Vec<f64> = (0..m * n)
        .map(|k| f64::from(margins.rows()[k / n]) * f64::from(margins.cols()[k % n]) / total)
        .collect();
    assert!(
        x.iter().all(|&z| z > 0.0 && z < 1.0),
        "start point not interior"
    );
    let mut eta = 1.0;
    for _ in 0..max_steps {
        let grad: Vec<f64> = x.iter().map(|&z| ((1.0 - z) / z).ln()).collect();
        let d = project_zero_margins(&grad, m, n);
        let norm = d.iter().map(|v| v * v).sum::<f64>().sqrt();
        if norm < tol {
            break;
        }
        let g0 = entropy_of(&x);
        let slope: f64 = d.iter().zip(&grad).map(|(a, b)| a * b).sum();
        eta *= 2.0;
        loop {
            let y: Vec<f64> = x.iter().zip(&d).map(|(a, b)| a + eta * b).collect();
            if y.iter().all(|&z| z > 0.0 && z < 1.0) && entropy_of(&y) >= g0 + 1e-4 * eta * slope {
                x = y;
                break;
            }
            eta *= 0.5;
            if eta < 1e-300 {
                return x;
            }
        }
    }
    x
}

/// Orthogonal projection onto `{D : D·1 = 0, Dᵀ·1 = 0}`.
pub fn project_zero_margins(v: &[f64], m: usize, n: usize) -> Vec<f64> {
    let row: Vec<f64> = (0..m)
        .map(|i| v[i * n..(i + 1) * n].iter().sum::<f64>() / n as f64)
        .collect();
    let col: Vec<f64> = (0..n)
        .map(|j| (0..m).map(|i| v[i * n + j]).sum::<f64>() / m as f64)
        .collect();
    let all = v.iter().sum::<f64>() / (m * n) as f64;
    (0..m * n)
        .map(|k| v[k] - row[k / n] - col[k % n] + all)
        .collect()
}

/// Rows and columns left after repeatedly removing lines whose residual
/// margin is 0 or full.
pub fn unforced_lines(margins: &MarginPair) -> (Vec<usize>, Vec<usize>) {
    let mut rows: Vec<usize> = (0..margins.m()).collect();
    let mut cols: Vec<usize> = (0..margins.n()).collect();
    let mut r: Vec<i64> = margins.rows().iter().map(|&v| i64::from(v)).collect();
    let mut c: Vec<i64> = margins.cols().iter().map(|&v| i64::from(v)).collect();
    loop {
        if let Some(pos) = rows
            .iter()
            .position(|&i| r[i] == 0 || r[i] == cols.len() as i64)
        {
            let i = rows.remove(pos);
            if r[i] > 0 {
                cols.iter().for_each(|&j| c[j] -= 1);
            }
            continue;
        }
        if let Some(pos) = cols
            .iter()
            .position(|&j| c[j] == 0 || c[j] == rows.len() as i64)
        {
            let j = cols.remove(pos);
            if c[j] > 0 {
                rows.iter().for_each(|&i| r[i] -= 1);
            }
            continue;
        }
        return (rows, cols);
    }
}

#[cfg(test)]
mod properties;
