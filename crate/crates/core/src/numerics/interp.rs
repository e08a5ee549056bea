//! Piecewise cubic Hermite interpolation on a strictly increasing grid.

#[derive(Debug, Clone)]
pub struct Hermite {
    x: Vec<f64>,
    y: Vec<f64>,
    m: Vec<f64>,
}

impl Hermite {
    /// Builds the interpolant from values and slopes; slopes are limited
    /// (Fritsch-Carlson) so that monotone data yield a monotone interpolant.
    pub fn new(x: Vec<f64>, y: Vec<f64>, mut m: Vec<f64>) -> Self {
        assert!(x.len() >= 2 && x.len() == y.len() && y.len() == m.len());
        for i in 0..x.len() - 1 {
            let h = x[i + 1] - x[i];
            assert!(h > 0.0, "grid must be strictly increasing");
            let delta = (y[i + 1] - y[i]) / h;
            if delta == 0.0 {
                m[i] = 0.0;
                m[i + 1] = 0.0;
                continue;
            }
            let a = m[i] / delta;
            let b = m[i + 1] / delta;
            if a < 0.0 {
                m[i] = 0.0;
            }
            if b < 0.0 {
                m[i + 1] = 0.0;
            }
            let s = a * a + b * b;
            if s > 9.0 {
                let tau = 3.0 / s.sqrt();
                m[i] = tau * a * delta;
                m[i + 1] = tau * b * delta;
            }
        }
        Self { x, y, m }
    }

    pub fn x_min(&self) -> f64 {
        self.x[0]
    }

    pub fn x_max(&self) -> f64 {
        *self.x.last().unwrap()
    }

    fn locate(&self, t: f64) -> usize {
        match self.x.binary_search_by(|v| v.partial_cmp(&t).unwrap()) {
            Ok(i) => i.min(self.x.len() - 2),
            Err(0) => 0,
            Err(i) => (i - 1).min(self.x.len() - 2),
        }
    }

    pub fn eval(&self, t: f64) -> f64 {
        self.eval_with_slope(t).0
    }

    /// Value and first derivative.
    pub fn eval_with_slope(&self, t: f64) -> (f64, f64) {
        let i = self.locate(t);
        let h = self.x[i + 1] - self.x[i];
        let s = (t - self.x[i]) / h;
        let (y0, y1, m0, m1) = (self.y[i], self.y[i + 1], self.m[i] * h, self.m[i + 1] * h);
        let s2 = s * s;
        let s3 = s2 * s;
        let h00 = 2.0 * s3 - 3.0 * s2 + 1.0;
        let h10 = s3 - 2.0 * s2 + s;
        let h01 = -2.0 * s3 + 3.0 * s2;
        let h11 = s3 - s2;
        let v = h00 * y0 + h10 * m0 + h01 * y1 + h11 * m1;
        let dv = (6.0 * s2 - 6.0 * s) * y0 + (3.0 * s2 - 4.0 * s + 1.0) * m0 + (-6.0 * s2 + 6.0 * s) * y1 + (3.0 * s2 - 2.0 * s) * m1;
        (v, dv / h)
    }
}
