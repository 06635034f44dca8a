use crate::error::{Error, Result};

/// Uniform radial grid on `[r_min, r_max]` in bohr.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RadialGrid {
    r_min: f64,
    r_max: f64,
    n_points: usize,
}

impl RadialGrid {
    pub fn new(r_min: f64, r_max: f64, n_points: usize) -> Result<Self> {
        if !(r_min.is_finite() && r_max.is_finite()) {
            return Err(Error::InvalidGrid("bounds must be finite".into()));
        }
        if r_min <= 0.0 {
            return Err(Error::InvalidGrid(format!("r_min must be positive, got {r_min}")));
        }
        if r_max <= r_min {
            return Err(Error::InvalidGrid(format!("r_max ({r_max}) must exceed r_min ({r_min})")));
        }
        if n_points < 3 {
            return Err(Error::InvalidGrid(format!("need at least 3 points, got {n_points}")));
        }
        Ok(Self { r_min, r_max, n_points })
    }

    /// 4 to 20 bohr with 2001 points, sized for alkali-dimer wells.
    pub fn lirb_default() -> Self {
        Self { r_min: 4.0, r_max: 20.0, n_points: 2001 }
    }

    pub fn r_min(&self) -> f64 {
        self.r_min
    }

    pub fn r_max(&self) -> f64 {
        self.r_max
    }

    pub fn len(&self) -> usize {
        self.n_points
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn spacing(&self) -> f64 {
        (self.r_max - self.r_min) / (self.n_points - 1) as f64
    }

    #[inline]
    pub fn r(&self, k: usize) -> f64 {
        if k + 1 == self.n_points {
            self.r_max
        } else {
            self.r_min + k as f64 * self.spacing()
        }
    }

    pub fn points(&self) -> impl ExactSizeIterator<Item = f64> + '_ {
        (0..self.n_points).map(move |k| self.r(k))
    }

    pub fn to_vec(&self) -> Vec<f64> {
        self.points().collect()
    }

    /// Same interval with a different point count.
    pub fn with_points(&self, n_points: usize) -> Result<Self> {
        Self::new(self.r_min, self.r_max, n_points)
    }

    pub fn contains(&self, r: f64) -> bool {
        r >= self.r_min && r <= self.r_max
    }

    /// Samples `f` at every grid point.
    pub fn sample(&self, f: impl Fn(f64) -> f64) -> Vec<f64> {
        self.points().map(f).collect()
    }

    /// Definite integral over `[r_min, r_max]` of a function sampled at the
    /// grid points.
    ///
    /// Composite Simpson when the point count is odd, composite trapezoid
    /// otherwise.
    pub fn integrate(&self, f: &[f64]) -> Result<f64> {
        self.check_len(f)?;
        Ok(self.weighted_sum(f.iter().copied()))
    }

    /// ∫ f·g dR with the same rule as [`RadialGrid::integrate`].
    pub fn integrate_product(&self, f: &[f64], g: &[f64]) -> Result<f64> {
        self.check_len(f)?;
        self.check_len(g)?;
        Ok(self.weighted_sum(f.iter().zip(g).map(|(a, b)| a * b)))
    }

    /// Quadrature weight of grid point `k`.
    pub fn weight(&self, k: usize) -> f64 {
        let n = self.n_points;
        let h = self.spacing();
        if k == 0 || k == n - 1 {
            return if n % 2 == 1 { h / 3.0 } else { h / 2.0 };
        }
        if n % 2 == 1 {
            if k % 2 == 1 {
                4.0 * h / 3.0
            } else {
                2.0 * h / 3.0
            }
        } else {
            h
        }
    }

    pub fn weights(&self) -> Vec<f64> {
        (0..self.n_points).map(|k| self.weight(k)).collect()
    }

    fn weighted_sum(&self, values: impl Iterator<Item = f64>) -> f64 {
        values.enumerate().map(|(k, v)| self.weight(k) * v).sum()
    }

    pub(crate) fn check_len(&self, f: &[f64]) -> Result<()> {
        if f.len() != self.n_points {
            return Err(Error::InputShape(format!(
                "expected {} samples, got {}",
                self.n_points,
                f.len()
            )));
        }
        Ok(())
    }
}
