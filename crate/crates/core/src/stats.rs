//! Small least-squares helpers.

/// Ordinary least-squares fit `y ≈ intercept + slope·x`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinearFit {
    pub slope: f64,
    pub intercept: f64,
    pub slope_stderr: f64,
    pub r_squared: f64,
}

pub fn linear_fit(x: &[f64], y: &[f64]) -> LinearFit {
    let fit = least_squares(&x.iter().map(|&v| vec![1.0, v]).collect::<Vec<_>>(), y);
    LinearFit { slope: fit.coef[1], intercept: fit.coef[0], slope_stderr: fit.stderr[1], r_squared: fit.r_squared }
}

/// Result of a multiple regression.
#[derive(Debug, Clone, PartialEq)]
pub struct LeastSquares {
    pub coef: Vec<f64>,
    pub stderr: Vec<f64>,
    pub r_squared: f64,
}

/// Solves the normal equations for `y ≈ X·coef` (rows of `design` are
/// observations). Callers should centre their regressors when conditioning matters.
pub fn least_squares(design: &[Vec<f64>], y: &[f64]) -> LeastSquares {
    let n = y.len();
    let k = design.first().map_or(0, Vec::len);
    assert!(n == design.len() && n >= k && k > 0, "least_squares: shape mismatch");
    let mut xtx = vec![vec![0.0; k]; k];
    let mut xty = vec![0.0; k];
    for (row, &yi) in design.iter().zip(y) {
        for a in 0..k {
            xty[a] += row[a] * yi;
            for b in 0..k {
                xtx[a][b] += row[a] * row[b];
            }
        }
    }
    let inv = invert(&xtx);
    let coef: Vec<f64> = (0..k).map(|a| (0..k).map(|b| inv[a][b] * xty[b]).sum()).collect();
    let mean = y.iter().sum::<f64>() / n as f64;
    let mut ss_res = 0.0;
    let mut ss_tot = 0.0;
    for (row, &yi) in design.iter().zip(y) {
        let pred: f64 = row.iter().zip(&coef).map(|(x, c)| x * c).sum();
        ss_res += (yi - pred).powi(2);
        ss_tot += (yi - mean).powi(2);
    }
    let dof = n.saturating_sub(k).max(1) as f64;
    let sigma2 = ss_res / dof;
    let stderr = (0..k).map(|a| (sigma2 * inv[a][a]).max(0.0).sqrt()).collect();
    let r_squared = if ss_tot > 0.0 { 1.0 - ss_res / ss_tot } else { 1.0 };
    LeastSquares { coef, stderr, r_squared }
}

/// Gauss–Jordan inverse with partial pivoting.
fn invert(m: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let k = m.len();
    let mut a: Vec<Vec<f64>> = m
        .iter()
        .enumerate()
        .map(|(i, row)| {
            let mut r = row.clone();
            r.extend((0..k).map(|j| if i == j { 1.0 } else { 0.0 }));
            r
        })
        .collect();
    for col in 0..k {
        let pivot = (col..k).max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs())).unwrap();
        a.swap(col, pivot);
        let p = a[col][col];
        for v in a[col].iter_mut() {
            *v /= p;
        }
        for r in 0..k {
            if r != col {
                let f = a[r][col];
                if f != 0.0 {
                    for c in 0..2 * k {
                        a[r][c] -= f * a[col][c];
                    }
                }
            }
        }
    }
    a.into_iter().map(|r| r[k..].to_vec()).collect()
}
