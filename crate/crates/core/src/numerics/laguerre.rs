//! Generalized Laguerre polynomials by three-term recurrence.

/// L_0^{(a)}(z), ..., L_n^{(a)}(z).
pub fn laguerre_all(n: usize, alpha: f64, z: f64) -> Vec<f64> {
    let mut out = Vec::with_capacity(n + 1);
    out.push(1.0);
    if n == 0 {
        return out;
    }
    out.push(1.0 + alpha - z);
    for m in 1..n {
        let mf = m as f64;
        let next = ((2.0 * mf + 1.0 + alpha - z) * out[m] - (mf + alpha) * out[m - 1]) / (mf + 1.0);
        out.push(next);
    }
    out
}

pub fn laguerre(n: usize, alpha: f64, z: f64) -> f64 {
    let mut p0 = 1.0;
    if n == 0 {
        return p0;
    }
    let mut p1 = 1.0 + alpha - z;
    for m in 1..n {
        let mf = m as f64;
        let p2 = ((2.0 * mf + 1.0 + alpha - z) * p1 - (mf + alpha) * p0) / (mf + 1.0);
        p0 = p1;
        p1 = p2;
    }
    p1
}

/// First derivative in z: -L_{n-1}^{(a+1)}(z).
pub fn laguerre_d1(n: usize, alpha: f64, z: f64) -> f64 {
    if n == 0 {
        0.0
    } else {
        -laguerre(n - 1, alpha + 1.0, z)
    }
}

/// Second derivative in z: L_{n-2}^{(a+2)}(z).
pub fn laguerre_d2(n: usize, alpha: f64, z: f64) -> f64 {
    if n < 2 {
        0.0
    } else {
        laguerre(n - 2, alpha + 2.0, z)
    }
}

/// L_n^{(a)}(0) = Gamma(n+1+a) / (n! Gamma(1+a)), evaluated through log-gamma.
pub fn laguerre_at_zero(n: usize, alpha: f64) -> f64 {
    use statrs::function::gamma::ln_gamma;
    (ln_gamma(n as f64 + 1.0 + alpha) - ln_gamma(n as f64 + 1.0) - ln_gamma(1.0 + alpha)).exp()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn explicit_low_orders() {
        let a = 0.5;
        let z = 1.3;
        assert!((laguerre(2, a, z) - 0.5 * (z * z - 2.0 * (a + 2.0) * z + (a + 1.0) * (a + 2.0))).abs() < 1e-14);
        let all = laguerre_all(5, a, z);
        for (n, v) in all.iter().enumerate() {
            assert!((v - laguerre(n, a, z)).abs() < 1e-13);
        }
    }

    #[test]
    fn derivative_identities_by_differences() {
        let (n, a, z, h) = (6, 1.7, 2.4, 1e-5);
        let fd1 = (laguerre(n, a, z + h) - laguerre(n, a, z - h)) / (2.0 * h);
        assert!((fd1 - laguerre_d1(n, a, z)).abs() < 1e-7);
        let fd2 = (laguerre(n, a, z + h) - 2.0 * laguerre(n, a, z) + laguerre(n, a, z - h)) / (h * h);
        assert!((fd2 - laguerre_d2(n, a, z)).abs() < 1e-4);
    }

    #[test]
    fn value_at_origin() {
        for n in 0..10 {
            assert!((laguerre(n, 0.5, 0.0) - laguerre_at_zero(n, 0.5)).abs() < 1e-12 * laguerre_at_zero(n, 0.5));
        }
    }
}
