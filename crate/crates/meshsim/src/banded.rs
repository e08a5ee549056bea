//! Banded matrices with partial-pivoting LU, in LAPACK band layout.

#[derive(Debug, Clone)]
pub struct BandMatrix {
    n: usize,
    kl: usize,
    ku: usize,
    ldab: usize,
    ab: Vec<f64>,
    ipiv: Vec<usize>,
    factored: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Singular {
    pub column: usize,
}

impl BandMatrix {
    pub fn zeros(n: usize, kl: usize, ku: usize) -> Self {
        let ldab = 2 * kl + ku + 1;
        Self { n, kl, ku, ldab, ab: vec![0.0; ldab * n], ipiv: vec![0; n], factored: false }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn bandwidth(&self) -> (usize, usize) {
        (self.kl, self.ku)
    }

    pub fn in_band(&self, i: usize, j: usize) -> bool {
        i < self.n && j < self.n && i <= j + self.kl && j <= i + self.ku
    }

    fn idx(&self, i: usize, j: usize) -> usize {
        (self.kl + self.ku + i - j) + j * self.ldab
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        if self.in_band(i, j) {
            self.ab[self.idx(i, j)]
        } else {
            0.0
        }
    }

    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        assert!(self.in_band(i, j), "({i},{j}) outside band");
        let k = self.idx(i, j);
        self.ab[k] = v;
        self.factored = false;
    }

    pub fn fill_zero(&mut self) {
        self.ab.iter_mut().for_each(|x| *x = 0.0);
        self.factored = false;
    }

    /// y = A x (before factorization).
    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        assert!(!self.factored);
        (0..self.n)
            .map(|i| {
                let lo = i.saturating_sub(self.kl);
                let hi = (i + self.ku).min(self.n - 1);
                (lo..=hi).map(|j| self.get(i, j) * x[j]).sum()
            })
            .collect()
    }

    /// In-place LU factorization with row interchanges.
    pub fn factor(&mut self) -> Result<(), Singular> {
        let (n, kl, ku) = (self.n, self.kl, self.ku);
        let kv = kl + ku;
        let ld = self.ldab;
        let at = |r: usize, c: usize| r + c * ld;
        let mut ju = 0usize;
        for k in 0..n {
            if k + kv < n {
                for i in 0..kl {
                    self.ab[at(i, k + kv)] = 0.0;
                }
            }
            let km = kl.min(n - 1 - k);
            let mut jp = 0;
            let mut best = self.ab[at(kv, k)].abs();
            for i in 1..=km {
                let v = self.ab[at(kv + i, k)].abs();
                if v > best {
                    best = v;
                    jp = i;
                }
            }
            self.ipiv[k] = k + jp;
            if best == 0.0 || !best.is_finite() {
                return Err(Singular { column: k });
            }
            ju = ju.max((k + ku + jp).min(n - 1));
            if jp != 0 {
                for c in 0..=(ju - k) {
                    self.ab.swap(at(kv + jp - c, k + c), at(kv - c, k + c));
                }
            }
            if km > 0 {
                let inv = 1.0 / self.ab[at(kv, k)];
                for i in 1..=km {
                    self.ab[at(kv + i, k)] *= inv;
                }
                for c in 1..=(ju - k) {
                    let t = self.ab[at(kv - c, k + c)];
                    if t != 0.0 {
                        for i in 1..=km {
                            let l = self.ab[at(kv + i, k)];
                            self.ab[at(kv + i - c, k + c)] -= l * t;
                        }
                    }
                }
            }
        }
        self.factored = true;
        Ok(())
    }

    /// Solves A x = b in place after `factor`.
    pub fn solve(&self, b: &mut [f64]) {
        assert!(self.factored, "solve before factor");
        let (n, kl) = (self.n, self.kl);
        let kv = self.kl + self.ku;
        let ld = self.ldab;
        let at = |r: usize, c: usize| r + c * ld;
        for j in 0..n.saturating_sub(1) {
            let l = self.ipiv[j];
            if l != j {
                b.swap(l, j);
            }
            let lm = kl.min(n - 1 - j);
            let bj = b[j];
            for i in 1..=lm {
                b[j + i] -= self.ab[at(kv + i, j)] * bj;
            }
        }
        for j in (0..n).rev() {
            b[j] /= self.ab[at(kv, j)];
            let bj = b[j];
            for i in 1..=kv.min(j) {
                b[j - i] -= self.ab[at(kv - i, j)] * bj;
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn dense_solve(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Vec<f64> {
        let n = b.len();
        for k in 0..n {
            let p = (k..n).max_by(|&i, &j| a[i][k].abs().partial_cmp(&a[j][k].abs()).unwrap()).unwrap();
            a.swap(k, p);
            b.swap(k, p);
            for i in k + 1..n {
                let f = a[i][k] / a[k][k];
                for j in k..n {
                    a[i][j] -= f * a[k][j];
                }
                b[i] -= f * b[k];
            }
        }
        for k in (0..n).rev() {
            let s: f64 = (k + 1..n).map(|j| a[k][j] * b[j]).sum();
            b[k] = (b[k] - s) / a[k][k];
        }
        b
    }

    proptest! {
        #[test]
        fn matches_dense_solver(n in 1usize..40, kl in 0usize..5, ku in 0usize..5, seed in any::<u64>()) {
            let mut state = seed | 1;
            let mut rnd = || { state ^= state << 13; state ^= state >> 7; state ^= state << 17; (state % 2001) as f64 / 1000.0 - 1.0 };
            let mut m = BandMatrix::zeros(n, kl, ku);
            let mut dense = vec![vec![0.0; n]; n];
            for i in 0..n {
                for j in 0..n {
                    if m.in_band(i, j) {
                        // weak diagonal forces pivoting
                        let v = if i == j { 0.1 * rnd() + 1e-3 } else { rnd() };
                        m.set(i, j, v);
                        dense[i][j] = v;
                    }
                }
            }
            let b: Vec<f64> = (0..n).map(|_| rnd()).collect();
            let expect = dense_solve(dense.clone(), b.clone());
            let ax = m.mul_vec(&expect);
            prop_assume!(ax.iter().zip(&b).all(|(x, y)| (x - y).abs() < 1e-8));
            m.factor().unwrap();
            let mut x = b.clone();
            m.solve(&mut x);
            let scale = expect.iter().fold(1.0f64, |a, v| a.max(v.abs()));
            for (u, v) in x.iter().zip(&expect) {
                prop_assert!((u - v).abs() < 1e-8 * scale, "{} vs {}", u, v);
            }
        }
    }

    #[test]
    fn singular_detected() {
        let mut m = BandMatrix::zeros(3, 1, 1);
        m.set(0, 0, 1.0);
        m.set(1, 1, 1.0);
        assert_eq!(m.factor(), Err(Singular { column: 2 }));
    }
}
