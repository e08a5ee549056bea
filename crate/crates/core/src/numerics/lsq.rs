//! Small dense linear least squares (Householder QR) and straight-line regression.

#[derive(Debug, Clone)]
pub struct LsqSolution {
    pub coef: Vec<f64>,
    pub residual_norm: f64,
    /// Ratio of largest to smallest |R_ii| after column scaling.
    pub condition: f64,
}

/// Minimizes ||A x - b|| for a tall matrix given by rows.
pub fn solve(rows: &[Vec<f64>], b: &[f64]) -> Option<LsqSolution> {
    let m = rows.len();
    let n = rows.first()?.len();
    if m < n || n == 0 {
        return None;
    }
    let mut scale = vec![0.0f64; n];
    for r in rows {
        for j in 0..n {
            scale[j] = scale[j].max(r[j].abs());
        }
    }
    if scale.iter().any(|&s| s == 0.0) {
        return None;
    }
    let mut a: Vec<Vec<f64>> = rows.iter().map(|r| (0..n).map(|j| r[j] / scale[j]).collect()).collect();
    let mut rhs = b.to_vec();
    for j in 0..n {
        let norm = (j..m).map(|i| a[i][j] * a[i][j]).sum::<f64>().sqrt();
        if norm == 0.0 {
            return None;
        }
        let alpha = if a[j][j] > 0.0 { -norm } else { norm };
        let mut v: Vec<f64> = (j..m).map(|i| a[i][j]).collect();
        v[0] -= alpha;
        let vnorm2: f64 = v.iter().map(|x| x * x).sum();
        if vnorm2 > 0.0 {
            for c in j..n {
                let dot: f64 = (j..m).map(|i| v[i - j] * a[i][c]).sum();
                let f = 2.0 * dot / vnorm2;
                for i in j..m {
                    a[i][c] -= f * v[i - j];
                }
            }
            let dot: f64 = (j..m).map(|i| v[i - j] * rhs[i]).sum();
            let f = 2.0 * dot / vnorm2;
            for i in j..m {
                rhs[i] -= f * v[i - j];
            }
        }
    }
    let diag: Vec<f64> = (0..n).map(|j| a[j][j].abs()).collect();
    let dmax = diag.iter().cloned().fold(0.0, f64::max);
    let dmin = diag.iter().cloned().fold(f64::INFINITY, f64::min);
    let mut x = vec![0.0; n];
    for j in (0..n).rev() {
        let s: f64 = (j + 1..n).map(|c| a[j][c] * x[c]).sum();
        x[j] = (rhs[j] - s) / a[j][j];
    }
    let residual_norm = rhs[n..].iter().map(|r| r * r).sum::<f64>().sqrt();
    for j in 0..n {
        x[j] /= scale[j];
    }
    Some(LsqSolution { coef: x, residual_norm, condition: dmax / dmin })
}

#[derive(Debug, Clone, Copy)]
pub struct LineFit {
    pub slope: f64,
    pub intercept: f64,
    pub slope_stderr: f64,
    pub intercept_stderr: f64,
    pub r_squared: f64,
    pub rss: f64,
}

/// Ordinary least-squares line y = intercept + slope * x.
pub fn line_fit(x: &[f64], y: &[f64]) -> Option<LineFit> {
    let n = x.len();
    if n < 3 || y.len() != n {
        return None;
    }
    let nf = n as f64;
    let mx = x.iter().sum::<f64>() / nf;
    let my = y.iter().sum::<f64>() / nf;
    let sxx: f64 = x.iter().map(|v| (v - mx).powi(2)).sum();
    let syy: f64 = y.iter().map(|v| (v - my).powi(2)).sum();
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    if sxx == 0.0 {
        return None;
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let rss: f64 = x.iter().zip(y).map(|(a, b)| (b - intercept - slope * a).powi(2)).sum();
    let s2 = rss / (nf - 2.0);
    let slope_stderr = (s2 / sxx).sqrt();
    let intercept_stderr = (s2 * (1.0 / nf + mx * mx / sxx)).sqrt();
    let r_squared = if syy > 0.0 { 1.0 - rss / syy } else { 1.0 };
    Some(LineFit { slope, intercept, slope_stderr, intercept_stderr, r_squared, rss })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn recovers_exact_combination() {
        let rows: Vec<Vec<f64>> = (0..20).map(|i| {
            let t = i as f64 * 0.1;
            vec![(-t).exp(), (-3.0 * t).exp(), 1e-3 * t]
        }).collect();
        let b: Vec<f64> = rows.iter().map(|r| 2.0 * r[0] - 0.5 * r[1] + 7.0 * r[2]).collect();
        let s = solve(&rows, &b).unwrap();
        assert!((s.coef[0] - 2.0).abs() < 1e-10);
        assert!((s.coef[1] + 0.5).abs() < 1e-10);
        assert!((s.coef[2] - 7.0).abs() < 1e-8);
        assert!(s.residual_norm < 1e-12);
    }

    #[test]
    fn line_fit_exact() {
        let x: Vec<f64> = (0..10).map(|i| i as f64).collect();
        let y: Vec<f64> = x.iter().map(|v| 3.0 - 2.0 * v).collect();
        let f = line_fit(&x, &y).unwrap();
        assert!((f.slope + 2.0).abs() < 1e-13 && (f.intercept - 3.0).abs() < 1e-12);
        assert!((f.r_squared - 1.0).abs() < 1e-14);
    }
}
