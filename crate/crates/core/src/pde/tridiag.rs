use crate::error::{Error, Result};

/// A square tridiagonal matrix stored by diagonals.
///
/// `sub[i]` multiplies `x[i - 1]` in row `i` (so `sub[0]` is unused) and
/// `sup[i]` multiplies `x[i + 1]` (so `sup[n - 1]` is unused).
#[derive(Debug, Clone, PartialEq)]
pub struct Tridiagonal {
    pub sub: Vec<f64>,
    pub diag: Vec<f64>,
    pub sup: Vec<f64>,
}

impl Tridiagonal {
    pub fn new(sub: Vec<f64>, diag: Vec<f64>, sup: Vec<f64>) -> Result<Self> {
        let n = diag.len();
        if sub.len() != n || sup.len() != n || n == 0 {
            return Err(Error::GridMismatch(format!(
                "diagonal lengths {} / {} / {}",
                sub.len(),
                n,
                sup.len()
            )));
        }
        Ok(Self { sub, diag, sup })
    }

    pub fn len(&self) -> usize {
        self.diag.len()
    }

    pub fn is_empty(&self) -> bool {
        self.diag.is_empty()
    }

    /// `out = self * x`.
    pub fn apply(&self, x: &[f64], out: &mut [f64]) {
        let n = self.len();
        debug_assert!(x.len() == n && out.len() == n);
        if n == 1 {
            out[0] = self.diag[0] * x[0];
            return;
        }
        out[0] = self.diag[0] * x[0] + self.sup[0] * x[1];
        for i in 1..n - 1 {
            out[i] = self.sub[i] * x[i - 1] + self.diag[i] * x[i] + self.sup[i] * x[i + 1];
        }
        out[n - 1] = self.sub[n - 1] * x[n - 2] + self.diag[n - 1] * x[n - 1];
    }

    /// Sum of each row, useful for checking conservation properties.
    pub fn row_sums(&self) -> Vec<f64> {
        let n = self.len();
        (0..n)
            .map(|i| {
                let l = if i > 0 { self.sub[i] } else { 0.0 };
                let r = if i + 1 < n { self.sup[i] } else { 0.0 };
                l + self.diag[i] + r
            })
            .collect()
    }

    /// True when every row satisfies `|diag| > |sub| + |sup|`.
    pub fn strictly_diagonally_dominant(&self) -> bool {
        let n = self.len();
        (0..n).all(|i| {
            let l = if i > 0 { self.sub[i].abs() } else { 0.0 };
            let r = if i + 1 < n { self.sup[i].abs() } else { 0.0 };
            self.diag[i].abs() > l + r
        })
    }

    /// `max_i |(self * x - b)_i|`.
    pub fn residual_inf(&self, x: &[f64], b: &[f64]) -> f64 {
        let mut r = vec![0.0; self.len()];
        self.apply(x, &mut r);
        r.iter()
            .zip(b)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }
}

/// Thomas algorithm with reusable scratch storage.
#[derive(Debug, Clone, Default)]
pub struct ThomasSolver {
    c_prime: Vec<f64>,
    d_prime: Vec<f64>,
}

impl ThomasSolver {
    pub fn new(n: usize) -> Self {
        Self {
            c_prime: vec![0.0; n],
            d_prime: vec![0.0; n],
        }
    }

    /// Solves `m * out = rhs`.
    #[allow(clippy::needless_range_loop)]
    pub fn solve(&mut self, m: &Tridiagonal, rhs: &[f64], out: &mut [f64]) -> Result<()> {
        let n = m.len();
        if rhs.len() != n || out.len() != n {
            return Err(Error::GridMismatch(format!(
                "operator of size {n}, right-hand side {}, output {}",
                rhs.len(),
                out.len()
            )));
        }
        self.c_prime.resize(n, 0.0);
        self.d_prime.resize(n, 0.0);
        let mut denom = m.diag[0];
        if denom == 0.0 || !denom.is_finite() {
            return Err(Error::SingularOperator { row: 0 });
        }
        self.c_prime[0] = if n > 1 { m.sup[0] / denom } else { 0.0 };
        self.d_prime[0] = rhs[0] / denom;
        for i in 1..n {
            denom = m.diag[i] - m.sub[i] * self.c_prime[i - 1];
            if denom == 0.0 || !denom.is_finite() {
                return Err(Error::SingularOperator { row: i });
            }
            self.c_prime[i] = if i + 1 < n { m.sup[i] / denom } else { 0.0 };
            self.d_prime[i] = (rhs[i] - m.sub[i] * self.d_prime[i - 1]) / denom;
        }
        out[n - 1] = self.d_prime[n - 1];
        for i in (0..n - 1).rev() {
            out[i] = self.d_prime[i] - self.c_prime[i] * out[i + 1];
        }
        Ok(())
    }
}

/// Solves `m * x = rhs` with a temporary solver.
pub fn thomas_solve(m: &Tridiagonal, rhs: &[f64]) -> Result<Vec<f64>> {
    let mut out = vec![0.0; m.len()];
    ThomasSolver::new(m.len()).solve(m, rhs, &mut out)?;
    Ok(out)
}
