#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn normals(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    (0..n).map(|_| rng.sample(StandardNormal)).collect()
}

/// Gaussian elimination with partial pivoting on a dense copy.
#[allow(clippy::needless_range_loop)]
pub fn gauss_solve(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Vec<f64> {
    let n = b.len();
    for col in 0..n {
        let pivot = (col..n)
            .max_by(|&i, &j| a[i][col].abs().partial_cmp(&a[j][col].abs()).unwrap())
            .unwrap();
        a.swap(col, pivot);
        b.swap(col, pivot);
        for row in col + 1..n {
            let f = a[row][col] / a[col][col];
            for k in col..n {
                a[row][k] -= f * a[col][k];
            }
            b[row] -= f * b[col];
        }
    }
    let mut x = vec![0.0; n];
    for row in (0..n).rev() {
        let s: f64 = (row + 1..n).map(|k| a[row][k] * x[k]).sum();
        x[row] = (b[row] - s) / a[row][row];
    }
    x
}

/// `(AᵀB)` for column-major inputs.
pub fn cross(a: &[Vec<f64>], b: &[Vec<f64>]) -> Vec<Vec<f64>> {
    a.iter()
        .map(|ai| {
            b.iter()
                .map(|bj| ai.iter().zip(bj).map(|(x, y)| x * y).sum())
                .collect()
        })
        .collect()
}

pub fn cross_vec(a: &[Vec<f64>], y: &[f64]) -> Vec<f64> {
    a.iter()
        .map(|ai| ai.iter().zip(y).map(|(x, v)| x * v).sum())
        .collect()
}

/// Normal-equations least squares on columns `x`.
pub fn ols_oracle(y: &[f64], x: &[Vec<f64>]) -> Vec<f64> {
    gauss_solve(cross(x, x), cross_vec(x, y))
}

/// `(ZᵀX)⁻¹Zᵀy`.
pub fn just_identified_iv_oracle(y: &[f64], x: &[Vec<f64>], z: &[Vec<f64>]) -> Vec<f64> {
    gauss_solve(cross(z, x), cross_vec(z, y))
}
