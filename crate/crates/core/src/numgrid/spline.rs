use crate::error::{Error, Result};

/// Natural cubic spline (zero second derivative at both ends) through
/// strictly increasing nodes.
#[derive(Debug, Clone, PartialEq)]
pub struct NaturalSpline {
    x: Vec<f64>,
    y: Vec<f64>,
    m: Vec<f64>,
}

impl NaturalSpline {
    pub fn new(x: Vec<f64>, y: Vec<f64>) -> Result<Self> {
        let n = x.len();
        if n != y.len() {
            return Err(Error::InputShape(format!("{} abscissae vs {} ordinates", n, y.len())));
        }
        if n < 3 {
            return Err(Error::InputShape(format!("spline needs at least 3 nodes, got {n}")));
        }
        if x.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::InputShape("spline nodes must be strictly increasing".into()));
        }
        if let Some(k) = y.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite { r: x[k] });
        }

        // Tridiagonal system for interior second derivatives, Thomas algorithm.
        let mut m = vec![0.0; n];
        let mut diag = vec![0.0; n];
        let mut rhs = vec![0.0; n];
        let mut upper = vec![0.0; n];
        for i in 1..n - 1 {
            let h0 = x[i] - x[i - 1];
            let h1 = x[i + 1] - x[i];
            diag[i] = (h0 + h1) / 3.0;
            upper[i] = h1 / 6.0;
            rhs[i] = (y[i + 1] - y[i]) / h1 - (y[i] - y[i - 1]) / h0;
        }
        for i in 2..n - 1 {
            let lower = (x[i] - x[i - 1]) / 6.0;
            let w = lower / diag[i - 1];
            diag[i] -= w * upper[i - 1];
            rhs[i] -= w * rhs[i - 1];
        }
        for i in (1..n - 1).rev() {
            let next = if i + 1 < n - 1 { m[i + 1] } else { 0.0 };
            m[i] = (rhs[i] - upper[i] * next) / diag[i];
        }
        Ok(Self { x, y, m })
    }

    pub fn x_min(&self) -> f64 {
        self.x[0]
    }

    pub fn x_max(&self) -> f64 {
        self.x[self.x.len() - 1]
    }

    pub fn nodes(&self) -> (&[f64], &[f64]) {
        (&self.x, &self.y)
    }

    fn locate(&self, r: f64) -> Result<usize> {
        if !(r >= self.x_min() && r <= self.x_max()) {
            return Err(Error::OutOfRange { r, r_min: self.x_min(), r_max: self.x_max() });
        }
        let k = self.x.partition_point(|&xi| xi <= r);
        Ok(k.saturating_sub(1).min(self.x.len() - 2))
    }

    pub fn eval(&self, r: f64) -> Result<f64> {
        let k = self.locate(r)?;
        if r == self.x[k] {
            return Ok(self.y[k]);
        }
        let h = self.x[k + 1] - self.x[k];
        let a = (self.x[k + 1] - r) / h;
        let b = 1.0 - a;
        Ok(a * self.y[k]
            + b * self.y[k + 1]
            + ((a * a * a - a) * self.m[k] + (b * b * b - b) * self.m[k + 1]) * h * h / 6.0)
    }

    pub fn derivative(&self, r: f64) -> Result<f64> {
        let k = self.locate(r)?;
        let h = self.x[k + 1] - self.x[k];
        let a = (self.x[k + 1] - r) / h;
        let b = 1.0 - a;
        Ok((self.y[k + 1] - self.y[k]) / h
            - (3.0 * a * a - 1.0) / 6.0 * h * self.m[k]
            + (3.0 * b * b - 1.0) / 6.0 * h * self.m[k + 1])
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reproduces_linear_data() {
        let x: Vec<f64> = (0..20).map(|k| 1.0 + 0.37 * k as f64).collect();
        let y: Vec<f64> = x.iter().map(|v| 3.0 * v - 2.0).collect();
        let s = NaturalSpline::new(x.clone(), y).unwrap();
        for w in x.windows(2) {
            let mid = 0.5 * (w[0] + w[1]);
            assert!((s.eval(mid).unwrap() - (3.0 * mid - 2.0)).abs() < 1e-12);
            assert!((s.derivative(mid).unwrap() - 3.0).abs() < 1e-12);
        }
    }

    #[test]
    fn out_of_range_is_an_error() {
        let s = NaturalSpline::new(vec![0.0, 1.0, 2.0], vec![0.0, 1.0, 0.0]).unwrap();
        assert!(matches!(s.eval(2.5), Err(Error::OutOfRange { .. })));
        assert!(matches!(s.eval(-0.1), Err(Error::OutOfRange { .. })));
        assert!(s.eval(f64::NAN).is_err());
    }

    #[test]
    fn rejects_unsorted_nodes() {
        assert!(NaturalSpline::new(vec![0.0, 2.0, 1.0], vec![0.0; 3]).is_err());
    }
}
