//! Symmetric banded Hamiltonian with a Toeplitz kinetic part, plus the two
//! factorizations the eigen-solver needs: an unpivoted LDLᵀ used only for its
//! inertia (Sturm count), and a partially pivoted band LU for inverse
//! iteration.

/// Central-difference stencil for d²/dR² of the given accuracy order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum FdOrder {
    Second,
    Fourth,
    Sixth,
    #[default]
    Eighth,
}

impl FdOrder {
    /// Coefficients c₀, c₁, … with f'' ≈ (c₀f₀ + Σₖ cₖ(f₋ₖ + fₖ)) / h².
    pub fn coefficients(self) -> &'static [f64] {
        match self {
            FdOrder::Second => &[-2.0, 1.0],
            FdOrder::Fourth => &[-5.0 / 2.0, 4.0 / 3.0, -1.0 / 12.0],
            FdOrder::Sixth => &[-49.0 / 18.0, 3.0 / 2.0, -3.0 / 20.0, 1.0 / 90.0],
            FdOrder::Eighth => &[-205.0 / 72.0, 8.0 / 5.0, -1.0 / 5.0, 8.0 / 315.0, -1.0 / 560.0],
        }
    }

    pub fn bandwidth(self) -> usize {
        self.coefficients().len() - 1
    }
}

/// H = −1/(2μ) d²/dR² + V on a uniform grid with Dirichlet ends.
#[derive(Debug, Clone)]
pub struct BandedHamiltonian {
    diag: Vec<f64>,
    /// band[k-1] is the constant k-th off-diagonal, k = 1..=p.
    band: Vec<f64>,
    /// Smallest pivot magnitude tolerated in the Sturm count.
    pivmin: f64,
}

impl BandedHamiltonian {
    pub fn new(potential: &[f64], spacing: f64, mass: f64, order: FdOrder) -> Self {
        let c = order.coefficients();
        let scale = -1.0 / (2.0 * mass * spacing * spacing);
        let diag = potential.iter().map(|v| v + scale * c[0]).collect();
        let band = c[1..].iter().map(|ck| scale * ck).collect();
        let mut h = Self { diag, band, pivmin: 0.0 };
        let (lo, hi) = h.spectral_bounds();
        h.pivmin = f64::EPSILON * lo.abs().max(hi.abs()).max(1e-300);
        h
    }

    pub fn len(&self) -> usize {
        self.diag.len()
    }

    pub fn is_empty(&self) -> bool {
        self.diag.is_empty()
    }

    pub fn bandwidth(&self) -> usize {
        self.band.len()
    }

    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        let n = self.len();
        let mut y: Vec<f64> = self.diag.iter().zip(x).map(|(d, xi)| d * xi).collect();
        for (k, &b) in self.band.iter().enumerate() {
            let off = k + 1;
            for i in 0..n.saturating_sub(off) {
                y[i] += b * x[i + off];
                y[i + off] += b * x[i];
            }
        }
        y
    }

    /// xᵀHx / xᵀx.
    pub fn rayleigh_quotient(&self, x: &[f64]) -> f64 {
        let hx = self.apply(x);
        let num: f64 = x.iter().zip(&hx).map(|(a, b)| a * b).sum();
        let den: f64 = x.iter().map(|a| a * a).sum();
        num / den
    }

    /// Gershgorin interval containing the whole spectrum.
    /// Rayleigh quotient ρ of `x` and the residual ‖Hx − ρx‖ / ‖x‖.
    pub fn residual(&self, x: &[f64]) -> (f64, f64) {
        let hx = self.apply(x);
        let xx: f64 = x.iter().map(|a| a * a).sum();
        let rho = x.iter().zip(&hx).map(|(a, b)| a * b).sum::<f64>() / xx;
        let rr: f64 = hx.iter().zip(x).map(|(b, a)| (b - rho * a).powi(2)).sum();
        (rho, (rr / xx).sqrt())
    }

    pub fn spectral_bounds(&self) -> (f64, f64) {
        let radius: f64 = 2.0 * self.band.iter().map(|b| b.abs()).sum::<f64>();
        let lo = self.diag.iter().copied().fold(f64::INFINITY, f64::min) - radius;
        let hi = self.diag.iter().copied().fold(f64::NEG_INFINITY, f64::max) + radius;
        (lo, hi)
    }

    /// Number of eigenvalues strictly below `sigma`, from the inertia of
    /// LDLᵀ = H − σI (Sylvester's law).
    pub fn count_below(&self, sigma: f64) -> usize {
        let n = self.len();
        let p = self.bandwidth();
        // Row i of l holds L[i][i-p..i]; u is the same scaled by D.
        let mut l = vec![0.0; n * p];
        let mut u = vec![0.0; n * p];
        let mut dinv = vec![0.0; n];
        let mut count = 0;
        for i in 0..n {
            let j0 = i.saturating_sub(p);
            for j in j0..i {
                let mut s = self.band[i - j - 1];
                for k in j0..j {
                    s -= u[i * p + k + p - i] * l[j * p + k + p - j];
                }
                u[i * p + j + p - i] = s;
                l[i * p + j + p - i] = s * dinv[j];
            }
            let mut di = self.diag[i] - sigma;
            for o in (j0 + p - i)..p {
                di -= u[i * p + o] * l[i * p + o];
            }
            if di.abs() < self.pivmin {
                di = -self.pivmin;
            }
            if di < 0.0 {
                count += 1;
            }
            dinv[i] = 1.0 / di;
        }
        count
    }

    /// k-th smallest eigenvalue (0-based) by Sturm-count bisection inside
    /// `[lo, hi]`.
    pub fn bisect_eigenvalue(&self, k: usize, lo: f64, hi: f64) -> f64 {
        let (lo, hi) = self.bracket_eigenvalue(k, lo, hi, 4.0 * f64::EPSILON);
        0.5 * (lo + hi)
    }

    /// Narrows `[lo, hi]` around the k-th eigenvalue (0-based) by Sturm-count
    /// bisection until it is narrower than `rel_tol` × its magnitude.
    pub fn bracket_eigenvalue(&self, k: usize, mut lo: f64, mut hi: f64, rel_tol: f64) -> (f64, f64) {
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if hi - lo <= rel_tol * lo.abs().max(hi.abs()) {
                break;
            }
            if self.count_below(mid) > k {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        (lo, hi)
    }

    pub fn shifted_lu(&self, sigma: f64) -> BandLu {
        BandLu::factor(self, sigma)
    }
}

/// LU factorization with partial pivoting of a banded matrix H − σI,
/// stored with the extra super-diagonals pivoting can fill in.
#[derive(Debug, Clone)]
pub struct BandLu {
    n: usize,
    p: usize,
    width: usize,
    ab: Vec<f64>,
    piv: Vec<usize>,
}

impl BandLu {
    #[inline]
    fn idx(&self, i: usize, j: usize) -> usize {
        i * self.width + (j + self.p - i)
    }

    fn factor(h: &BandedHamiltonian, sigma: f64) -> Self {
        let n = h.len();
        let p = h.bandwidth();
        let width = 3 * p + 1;
        let mut lu = Self { n, p, width, ab: vec![0.0; n * width], piv: vec![0; n] };
        for i in 0..n {
            let at = lu.idx(i, i);
            lu.ab[at] = h.diag[i] - sigma;
            for k in 1..=p {
                if i + k < n {
                    let a = lu.idx(i, i + k);
                    lu.ab[a] = h.band[k - 1];
                }
                if i >= k {
                    let a = lu.idx(i, i - k);
                    lu.ab[a] = h.band[k - 1];
                }
            }
        }
        let (lo, hi) = h.spectral_bounds();
        let tiny = f64::EPSILON * lo.abs().max(hi.abs()).max(1e-300);
        for k in 0..n {
            let last_row = (k + p).min(n - 1);
            let last_col = (k + 2 * p).min(n - 1);
            let mut r = k;
            let mut best = lu.ab[lu.idx(k, k)].abs();
            for i in k + 1..=last_row {
                let v = lu.ab[lu.idx(i, k)].abs();
                if v > best {
                    best = v;
                    r = i;
                }
            }
            lu.piv[k] = r;
            if r != k {
                for j in k..=last_col {
                    let (a, b) = (lu.idx(k, j), lu.idx(r, j));
                    lu.ab.swap(a, b);
                }
            }
            let kk = lu.idx(k, k);
            if lu.ab[kk].abs() < tiny {
                lu.ab[kk] = if lu.ab[kk] < 0.0 { -tiny } else { tiny };
            }
            let pivot = lu.ab[kk];
            for i in k + 1..=last_row {
                let ik = lu.idx(i, k);
                let l = lu.ab[ik] / pivot;
                lu.ab[ik] = l;
                if l != 0.0 {
                    for j in k + 1..=last_col {
                        let (a, b) = (lu.idx(i, j), lu.idx(k, j));
                        lu.ab[a] -= l * lu.ab[b];
                    }
                }
            }
        }
        lu
    }

    pub fn solve_in_place(&self, b: &mut [f64]) {
        let (n, p) = (self.n, self.p);
        for k in 0..n {
            let r = self.piv[k];
            if r != k {
                b.swap(k, r);
            }
            let bk = b[k];
            for i in k + 1..=(k + p).min(n - 1) {
                b[i] -= self.ab[self.idx(i, k)] * bk;
            }
        }
        for i in (0..n).rev() {
            let mut s = b[i];
            for j in i + 1..=(i + 2 * p).min(n - 1) {
                s -= self.ab[self.idx(i, j)] * b[j];
            }
            b[i] = s / self.ab[self.idx(i, i)];
        }
    }
}
