//! One-dimensional minimization.

const INV_PHI: f64 = 0.618_033_988_749_894_8;

/// Golden-section search for a minimum of `f` on [a, b]; returns (argmin, min).
pub fn golden_min<F: FnMut(f64) -> f64>(mut f: F, mut a: f64, mut b: f64, tol: f64) -> (f64, f64) {
    let mut c = b - INV_PHI * (b - a);
    let mut d = a + INV_PHI * (b - a);
    let mut fc = f(c);
    let mut fd = f(d);
    while (b - a).abs() > tol * (1.0 + c.abs().min(d.abs())) {
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - INV_PHI * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + INV_PHI * (b - a);
            fd = f(d);
        }
    }
    if fc < fd { (c, fc) } else { (d, fd) }
}

/// Golden-section search on a log scale, for positive arguments spanning decades.
pub fn golden_min_log<F: FnMut(f64) -> f64>(mut f: F, a: f64, b: f64, tol: f64) -> (f64, f64) {
    let (la, fmin) = golden_min(|l| f(l.exp()), a.ln(), b.ln(), tol);
    (la.exp(), fmin)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn finds_parabola_minimum() {
        let (x, fx) = golden_min(|x| (x - 1.234).powi(2) + 0.5, -3.0, 4.0, 1e-10);
        assert!((x - 1.234).abs() < 1e-6);
        assert!((fx - 0.5).abs() < 1e-12);
        let (y, _) = golden_min_log(|x| (x.ln() + 20.0).powi(2), 1e-15, 1.0, 1e-12);
        assert!((y.ln() + 20.0).abs() < 1e-5);
    }
}
