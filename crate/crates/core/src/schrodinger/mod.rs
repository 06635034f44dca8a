//! Bound rovibrational eigenstates of a 1D effective potential
//! V(R) + J(J+1)/(2μR²).
//!
//! The Hamiltonian is discretized with a symmetric central-difference stencil
//! (eighth order by default) on the uniform grid. Eigenvalues come from
//! Sturm-count bisection on the banded matrix and eigenvectors from inverse
//! iteration, so only the requested lowest states are ever computed.

mod banded;
mod io;

pub use banded::{BandedHamiltonian, FdOrder};
pub use io::{format_state, parse_state, StateDump};

use crate::error::{Error, Result};
use crate::numgrid::{PotentialCurve, RadialGrid};
use crate::units::{to_invcm, ReducedMass};

/// Amplitude above which a state touching the box edge is flagged.
pub const EDGE_AMPLITUDE_LIMIT: f64 = 1e-6;
/// Accepted eigen-residual ‖Hψ − ρψ‖ relative to the spectral width.
const RESIDUAL_TOLERANCE: f64 = 1e-12;
/// Samples below this magnitude are ignored when counting nodes.
pub const NODE_AMPLITUDE_FLOOR: f64 = 1e-8;

#[derive(Debug, Clone)]
pub struct EffectivePotentialSpec {
    pub electronic: PotentialCurve,
    pub mass: ReducedMass,
    pub j: u32,
}

impl EffectivePotentialSpec {
    pub fn new(electronic: PotentialCurve, mass: ReducedMass, j: u32) -> Result<Self> {
        if !(mass.0 > 0.0 && mass.0.is_finite()) {
            return Err(Error::Config(format!("reduced mass must be positive, got {}", mass.0)));
        }
        Ok(Self { electronic, mass, j })
    }

    pub fn grid(&self) -> &RadialGrid {
        self.electronic.grid()
    }

    pub fn centrifugal(&self, r: f64) -> f64 {
        let jj = self.j as f64 * (self.j as f64 + 1.0);
        jj / (2.0 * self.mass.0 * r * r)
    }

    /// Electronic plus centrifugal term at every grid point (hartree).
    pub fn effective_values(&self) -> Vec<f64> {
        self.grid()
            .points()
            .zip(self.electronic.values())
            .map(|(r, v)| v + self.centrifugal(r))
            .collect()
    }

    pub fn hamiltonian(&self, order: FdOrder) -> BandedHamiltonian {
        BandedHamiltonian::new(&self.effective_values(), self.grid().spacing(), self.mass.0, order)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum StateWarning {
    /// |ψ| at a grid edge exceeds [`EDGE_AMPLITUDE_LIMIT`].
    BoxContaminated { edge_amplitude: f64 },
}

/// One bound eigenstate. Normalized so that ∫ψ² dR = 1 under the grid
/// quadrature and signed so the innermost lobe is positive.
#[derive(Debug, Clone)]
pub struct RovibState {
    pub v: usize,
    pub j: u32,
    /// Hartree.
    pub energy: f64,
    pub grid: RadialGrid,
    pub wavefunction: Vec<f64>,
    pub warnings: Vec<StateWarning>,
}

impl RovibState {
    pub fn energy_invcm(&self) -> f64 {
        to_invcm(self.energy)
    }

    pub fn is_box_contaminated(&self) -> bool {
        self.warnings.iter().any(|w| matches!(w, StateWarning::BoxContaminated { .. }))
    }

    pub fn nodes(&self) -> usize {
        count_nodes(&self.wavefunction)
    }
}

/// Strict sign changes between consecutive samples whose magnitude exceeds
/// [`NODE_AMPLITUDE_FLOOR`].
pub fn count_nodes(psi: &[f64]) -> usize {
    let mut last_sign = 0.0;
    let mut nodes = 0;
    for &x in psi.iter().filter(|x| x.abs() > NODE_AMPLITUDE_FLOOR) {
        let s = x.signum();
        if last_sign != 0.0 && s != last_sign {
            nodes += 1;
        }
        last_sign = s;
    }
    nodes
}

/// Lowest `v_max + 1` states of `spec` with the default stencil.
pub fn solve_bound_states(spec: &EffectivePotentialSpec, v_max: usize) -> Result<Vec<RovibState>> {
    solve_bound_states_with(spec, v_max, FdOrder::default())
}

pub fn solve_bound_states_with(
    spec: &EffectivePotentialSpec,
    v_max: usize,
    order: FdOrder,
) -> Result<Vec<RovibState>> {
    let grid = *spec.grid();
    let effective = spec.effective_values();
    let asymptote = effective[effective.len() - 1];
    let h = BandedHamiltonian::new(&effective, grid.spacing(), spec.mass.0, order);
    let wanted = v_max + 1;

    let found = h.count_below(asymptote);
    if found < wanted {
        return Err(Error::TooFewBoundStates { requested: wanted, found });
    }

    // the central-difference kinetic matrix is positive semidefinite, so no
    // eigenvalue lies below the potential minimum
    let v_min = effective.iter().copied().fold(f64::INFINITY, f64::min);
    let lo = h.spectral_bounds().0.max(v_min - 1e-12 * v_min.abs().max(1.0));
    let weights = grid.weights();
    let mut states: Vec<RovibState> = Vec::with_capacity(wanted);
    let mut bracket_lo = lo;
    let (spec_lo, spec_hi) = h.spectral_bounds();
    let residual_limit = RESIDUAL_TOLERANCE * (spec_hi - spec_lo);
    for v in 0..wanted {
        // Bisect only until inverse iteration converges from the bracket
        // midpoint; tighten further when the residual says it did not.
        let (mut lo_k, mut hi_k) = (bracket_lo, asymptote);
        let mut tol = 1e-6;
        let (mut psi, energy) = loop {
            (lo_k, hi_k) = h.bracket_eigenvalue(v, lo_k, hi_k, tol);
            let lambda = 0.5 * (lo_k + hi_k);
            let psi = inverse_iteration(&h, lambda, &states);
            let (rq, residual) = h.residual(&psi);
            if residual <= residual_limit || tol <= 4.0 * f64::EPSILON {
                break (psi, rq);
            }
            tol = (tol * 1e-3).max(4.0 * f64::EPSILON);
        };
        bracket_lo = energy - 1e-8 * energy.abs().max(1e-12);

        let norm = psi.iter().zip(&weights).map(|(p, w)| w * p * p).sum::<f64>().sqrt();
        psi.iter_mut().for_each(|p| *p /= norm);
        fix_sign(&mut psi);

        let mut warnings = Vec::new();
        let edge = psi[0].abs().max(psi[psi.len() - 1].abs());
        if edge > EDGE_AMPLITUDE_LIMIT {
            warnings.push(StateWarning::BoxContaminated { edge_amplitude: edge });
        }
        states.push(RovibState { v, j: spec.j, energy, grid, wavefunction: psi, warnings });
    }
    Ok(states)
}

fn inverse_iteration(h: &BandedHamiltonian, lambda: f64, previous: &[RovibState]) -> Vec<f64> {
    let n = h.len();
    let lu = h.shifted_lu(lambda);
    let mut x: Vec<f64> = (0..n).map(|i| 1.0 + 0.25 * (0.173 * i as f64).sin()).collect();
    // States closer than this in energy can mix under inverse iteration.
    let near = 1e-7 * lambda.abs().max(1e-6);
    for _ in 0..4 {
        lu.solve_in_place(&mut x);
        for prev in previous.iter().filter(|s| (s.energy - lambda).abs() < near) {
            let pn: f64 = prev.wavefunction.iter().map(|p| p * p).sum();
            let dot: f64 = prev.wavefunction.iter().zip(&x).map(|(p, q)| p * q).sum();
            x.iter_mut().zip(&prev.wavefunction).for_each(|(q, p)| *q -= dot / pn * p);
        }
        let norm = x.iter().map(|q| q * q).sum::<f64>().sqrt();
        x.iter_mut().for_each(|q| *q /= norm);
    }
    x
}

fn fix_sign(psi: &mut [f64]) {
    let peak = psi.iter().fold(0.0f64, |m, p| m.max(p.abs()));
    if let Some(first) = psi.iter().find(|p| p.abs() > 1e-3 * peak) {
        if *first < 0.0 {
            psi.iter_mut().for_each(|p| *p = -*p);
        }
    }
}
