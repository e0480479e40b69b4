//! Textbook penalized logistic regression by Newton-Raphson, with its own
//! dense Gaussian elimination. Shares no code with the library solver.

#![allow(dead_code, clippy::needless_range_loop)]

fn solve(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Vec<f64> {
    let n = b.len();
    for col in 0..n {
        let piv = (col..n).max_by(|&i, &j| a[i][col].abs().partial_cmp(&a[j][col].abs()).unwrap()).unwrap();
        a.swap(col, piv);
        b.swap(col, piv);
        for row in col + 1..n {
            let factor = a[row][col] / a[col][col];
            for k in col..n {
                a[row][k] -= factor * a[col][k];
            }
            b[row] -= factor * b[col];
        }
    }
    let mut x = vec![0.0; n];
    for i in (0..n).rev() {
        let s: f64 = (i + 1..n).map(|k| a[i][k] * x[k]).sum();
        x[i] = (b[i] - s) / a[i][i];
    }
    x
}

/// Rows of `x` include the leading intercept column. Returns intercept first.
pub fn logistic_irls(x: &[Vec<f64>], y: &[u8], lambda: f64, iters: usize) -> Vec<f64> {
    let p = x[0].len();
    let mut beta = vec![0.0; p];
    for _ in 0..iters {
        let mut h = vec![vec![0.0; p]; p];
        let mut g = vec![0.0; p];
        for (row, &yi) in x.iter().zip(y) {
            let eta: f64 = row.iter().zip(&beta).map(|(a, b)| a * b).sum();
            let mu = 1.0 / (1.0 + (-eta).exp());
            let w = mu * (1.0 - mu);
            for j in 0..p {
                g[j] += row[j] * (f64::from(yi) - mu);
                for k in 0..p {
                    h[j][k] += w * row[j] * row[k];
                }
            }
        }
        for j in 1..p {
            g[j] -= lambda * beta[j];
            h[j][j] += lambda;
        }
        let step = solve(h, g);
        let mut done = true;
        for j in 0..p {
            beta[j] += step[j];
            done &= step[j].abs() < 1e-14 * (1.0 + beta[j].abs());
        }
        if done {
            break;
        }
    }
    beta
}
