//! Morse model V(R) = Tₑ + Dₑ(e^{−2β(R−Rₑ)} − 2e^{−β(R−Rₑ)}), its closed-form
//! levels, and the two-stage fit used for weak-line regeneration: (Tₑ, Dₑ, β)
//! from the lowest band origins, then Rₑ from the measured intensity profile.

use std::collections::BTreeMap;

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::numgrid::{PotentialCurve, RadialGrid};
use crate::schrodinger::{solve_bound_states, EffectivePotentialSpec, RovibState};
use crate::spectrum::{franck_condon_amplitude, Band, LowerStates, SpectrumDataset};
use crate::units::{to_hartree, to_invcm, ReducedMass};

/// Morse parameters, stored in atomic units.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MorseParams {
    /// Asymptote (hartree).
    pub t_e: f64,
    /// Well depth (hartree).
    pub d_e: f64,
    /// Range parameter (bohr⁻¹).
    pub beta: f64,
    /// Equilibrium distance (bohr).
    pub r_e: f64,
}

impl MorseParams {
    pub fn new(t_e: f64, d_e: f64, beta: f64, r_e: f64) -> Result<Self> {
        let p = Self { t_e, d_e, beta, r_e };
        p.validate()?;
        Ok(p)
    }

    /// Tₑ and Dₑ in cm⁻¹, β in bohr⁻¹, Rₑ in bohr. Panics on invalid input;
    /// meant for literals.
    pub fn from_invcm(t_e: f64, d_e: f64, beta: f64, r_e: f64) -> Self {
        Self::new(to_hartree(t_e), to_hartree(d_e), beta, r_e).expect("invalid Morse literal")
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.d_e > 0.0 && self.beta > 0.0 && self.r_e > 0.0 && self.t_e.is_finite()) {
            return Err(Error::Config(format!("invalid Morse parameters {self:?}")));
        }
        Ok(())
    }

    pub fn with_r_e(self, r_e: f64) -> Self {
        Self { r_e, ..self }
    }

    pub fn t_e_invcm(&self) -> f64 {
        to_invcm(self.t_e)
    }

    pub fn d_e_invcm(&self) -> f64 {
        to_invcm(self.d_e)
    }

    /// Potential at `r` (hartree).
    pub fn eval(&self, r: f64) -> f64 {
        let x = (-self.beta * (r - self.r_e)).exp();
        self.t_e + self.d_e * (x * x - 2.0 * x)
    }

    pub fn eval_invcm(&self, r: f64) -> f64 {
        to_invcm(self.eval(r))
    }

    pub fn derivative(&self, r: f64) -> f64 {
        let x = (-self.beta * (r - self.r_e)).exp();
        2.0 * self.beta * self.d_e * (x - x * x)
    }

    pub fn curve(&self, grid: RadialGrid) -> Result<PotentialCurve> {
        PotentialCurve::from_fn(grid, |r| self.eval(r))
    }

    /// Harmonic frequency ωₑ = β√(2Dₑ/μ) (hartree).
    pub fn omega_e(&self, mass: ReducedMass) -> f64 {
        self.beta * (2.0 * self.d_e / mass.0).sqrt()
    }

    /// Anharmonicity ωₑxₑ = β²/(2μ) (hartree).
    pub fn omega_e_xe(&self, mass: ReducedMass) -> f64 {
        self.beta * self.beta / (2.0 * mass.0)
    }

    /// Closed-form J = 0 level Eᵥ (hartree).
    pub fn level(&self, v: usize, mass: ReducedMass) -> f64 {
        let x = v as f64 + 0.5;
        self.t_e - self.d_e + self.omega_e(mass) * x - self.omega_e_xe(mass) * x * x
    }

    pub fn level_invcm(&self, v: usize, mass: ReducedMass) -> f64 {
        to_invcm(self.level(v, mass))
    }

    /// Number of bound J = 0 levels of the untruncated well.
    pub fn bound_level_count(&self, mass: ReducedMass) -> usize {
        let vmax = self.omega_e(mass) / (2.0 * self.omega_e_xe(mass)) - 0.5;
        if vmax < 0.0 {
            0
        } else {
            vmax.floor() as usize + 1
        }
    }

    /// Eigenstates on `grid` for each requested band, grouped by J so each J
    /// is solved once.
    pub fn band_states(&self, grid: RadialGrid, mass: ReducedMass, bands: &[Band]) -> Result<Vec<RovibState>> {
        let curve = self.curve(grid)?;
        let mut by_j: BTreeMap<u32, usize> = BTreeMap::new();
        for b in bands {
            let e = by_j.entry(b.j).or_insert(0);
            *e = (*e).max(b.v);
        }
        let mut solved: BTreeMap<u32, Vec<RovibState>> = BTreeMap::new();
        for (j, vmax) in by_j {
            let spec = EffectivePotentialSpec::new(curve.clone(), mass, j)?;
            solved.insert(j, solve_bound_states(&spec, vmax)?);
        }
        Ok(bands.iter().map(|b| solved[&b.j][b.v].clone()).collect())
    }
}

/// Upper-state energy of one band, in cm⁻¹ relative to the ground minimum.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BandOrigin {
    pub v: usize,
    pub j: u32,
    pub energy_invcm: f64,
}

/// Band origins recovered from line positions: Eₛ = ω + Eᵢ averaged over the
/// band's lines.
pub fn band_origins_from_spectrum(spectrum: &SpectrumDataset, lower: &LowerStates) -> Result<Vec<BandOrigin>> {
    let mut out = Vec::new();
    for band in &spectrum.bands {
        let states = lower.for_j(band.j)?;
        let mut sum = 0.0;
        let mut n = 0usize;
        for line in spectrum.lines_for(*band) {
            let state = states.get(line.v_lower).ok_or_else(|| {
                Error::InputShape(format!("line to v''={} but only {} lower states", line.v_lower, states.len()))
            })?;
            sum += line.omega_invcm + state.energy_invcm();
            n += 1;
        }
        if n == 0 {
            return Err(Error::InsufficientData(format!("band v'={} J'={} has no lines", band.v, band.j)));
        }
        out.push(BandOrigin { v: band.v, j: band.j, energy_invcm: sum / n as f64 });
    }
    Ok(out)
}

#[derive(Debug, Clone)]
pub struct LevelResidual {
    pub v: usize,
    pub j: u32,
    pub input_invcm: f64,
    pub model_invcm: f64,
}

impl LevelResidual {
    pub fn residual(&self) -> f64 {
        self.input_invcm - self.model_invcm
    }
}

/// Outcome of [`fit_morse_energies`]. `params.r_e` is the Rₑ the re-solve
/// used.
#[derive(Debug, Clone)]
pub struct EnergyFit {
    pub params: MorseParams,
    /// Grid re-solve of each input level at its own J.
    pub residuals: Vec<LevelResidual>,
    /// Closed-form J = 0 levels v = 0..=10 of the fitted model (cm⁻¹).
    pub predicted_levels_invcm: Vec<f64>,
    pub iterations: usize,
}

impl EnergyFit {
    pub fn max_abs_residual(&self) -> f64 {
        self.residuals.iter().map(|r| r.residual().abs()).fold(0.0, f64::max)
    }
}

/// Solves Eᵥ = (Tₑ−Dₑ) + ωₑ(v+½) − ωₑxₑ(v+½)² for (Tₑ, Dₑ, β) in the least
/// squares sense (exactly for three levels).
pub fn morse_from_levels(levels: &[(usize, f64)], mass: ReducedMass) -> Result<(f64, f64, f64)> {
    let mut vs: Vec<usize> = levels.iter().map(|l| l.0).collect();
    vs.sort_unstable();
    vs.dedup();
    if vs.len() < 3 {
        return Err(Error::InsufficientData(format!("need three distinct levels, got {}", vs.len())));
    }
    let a = DMatrix::from_fn(levels.len(), 3, |i, k| {
        let x = levels[i].0 as f64 + 0.5;
        [1.0, x, -x * x][k]
    });
    let b = DVector::from_iterator(levels.len(), levels.iter().map(|l| l.1));
    let sol = a
        .svd(true, true)
        .solve(&b, 1e-14)
        .map_err(|e| Error::FitInfeasible(e.to_string()))?;
    let (offset, we, wexe) = (sol[0], sol[1], sol[2]);
    if !(wexe > 1e-10 * we.abs()) {
        return Err(Error::FitInfeasible(format!(
            "non-positive anharmonicity ωₑxₑ = {:.3e} cm⁻¹",
            to_invcm(wexe)
        )));
    }
    if !(we > 0.0) {
        return Err(Error::FitInfeasible(format!("non-positive ωₑ = {:.3e} cm⁻¹", to_invcm(we))));
    }
    let beta = (2.0 * mass.0 * wexe).sqrt();
    let d_e = we * we / (4.0 * wexe);
    Ok((offset + d_e, d_e, beta))
}

/// Fits (Tₑ, Dₑ, β) to band origins so that the grid eigenvalues of the
/// model at each origin's own J reproduce the inputs. The closed-form fit is
/// iterated against grid re-solves, which absorbs the centrifugal shift for
/// the given `r_e`.
pub fn fit_morse_energies(
    origins: &[BandOrigin],
    mass: ReducedMass,
    grid: RadialGrid,
    r_e: f64,
) -> Result<EnergyFit> {
    if origins.len() < 3 {
        return Err(Error::InsufficientData(format!("need at least three band origins, got {}", origins.len())));
    }
    let inputs: Vec<f64> = origins.iter().map(|o| to_hartree(o.energy_invcm)).collect();
    // Rigid-rotor estimate of the rotational energy seeds the first closed-form
    // fit; the grid re-solve corrects the remainder.
    let mut targets: Vec<f64> = origins
        .iter()
        .zip(&inputs)
        .map(|(o, e)| {
            let jj = o.j as f64 * (o.j as f64 + 1.0);
            e - jj / (2.0 * mass.0 * r_e * r_e)
        })
        .collect();
    let bands: Vec<Band> = origins.iter().map(|o| Band { v: o.v, j: o.j }).collect();
    let mut params;
    let mut model: Vec<f64>;
    let mut iterations = 0;
    loop {
        iterations += 1;
        let levels: Vec<(usize, f64)> = origins.iter().zip(&targets).map(|(o, &t)| (o.v, t)).collect();
        let (t_e, d_e, beta) = morse_from_levels(&levels, mass)?;
        params = MorseParams::new(t_e, d_e, beta, r_e)?;
        model = params.band_states(grid, mass, &bands)?.iter().map(|s| s.energy).collect();
        let worst = inputs.iter().zip(&model).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        if to_invcm(worst) < 1e-6 || iterations >= 25 {
            break;
        }
        for ((t, inp), m) in targets.iter_mut().zip(&inputs).zip(&model) {
            *t += inp - m;
        }
    }
    let residuals = origins
        .iter()
        .zip(&model)
        .map(|(o, &m)| LevelResidual { v: o.v, j: o.j, input_invcm: o.energy_invcm, model_invcm: to_invcm(m) })
        .collect();
    let predicted_levels_invcm = (0..=10).map(|v| params.level_invcm(v, mass)).collect();
    Ok(EnergyFit { params, residuals, predicted_levels_invcm, iterations })
}

/// Rₑ scan window: `steps` equally spaced candidates on `[lo, hi]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReSearch {
    pub lo: f64,
    pub hi: f64,
    pub steps: usize,
}

impl ReSearch {
    pub fn candidates(&self) -> Vec<f64> {
        let n = self.steps.max(3);
        (0..n).map(|k| self.lo + (self.hi - self.lo) * k as f64 / (n - 1) as f64).collect()
    }
}

#[derive(Debug, Clone)]
pub struct ReFit {
    pub r_e: f64,
    pub misfit: f64,
    /// (Rₑ, misfit) at every scan candidate.
    pub misfit_curve: Vec<(f64, f64)>,
}

pub const RE_TOLERANCE: f64 = 1e-4;

/// Least-squares misfit between the model intensities of a Morse upper
/// state and the measured lines, both normalized to their maximum.
pub fn intensity_misfit(
    params: &MorseParams,
    spectrum: &SpectrumDataset,
    lower: &LowerStates,
    mass: ReducedMass,
) -> Result<f64> {
    let grid = *lower.grid();
    let upper = params.band_states(grid, mass, &spectrum.bands)?;
    let mut pairs = Vec::with_capacity(spectrum.lines.len());
    for (band, phi) in spectrum.bands.iter().zip(&upper) {
        let chis = lower.for_j(band.j)?;
        for line in spectrum.lines_for(*band) {
            let chi = chis.get(line.v_lower).ok_or_else(|| {
                Error::InputShape(format!("line to v''={} but only {} lower states", line.v_lower, chis.len()))
            })?;
            let f = franck_condon_amplitude(chi, phi)?;
            pairs.push((f * f, line.intensity));
        }
    }
    if pairs.is_empty() {
        return Err(Error::InsufficientData("no measured lines to match".into()));
    }
    let model_max = pairs.iter().map(|p| p.0).fold(0.0, f64::max);
    let meas_max = pairs.iter().map(|p| p.1).fold(0.0, f64::max);
    if !(model_max > 0.0 && meas_max > 0.0) {
        return Err(Error::InsufficientData("all intensities vanish".into()));
    }
    Ok(pairs
        .iter()
        .map(|(m, d)| (m / model_max - d / meas_max).powi(2))
        .sum())
}

/// Scans Rₑ across `search` (in parallel, reduced in scan order), then
/// refines the best bracket by golden-section search to [`RE_TOLERANCE`].
pub fn fit_morse_re(
    partial: &MorseParams,
    spectrum: &SpectrumDataset,
    lower: &LowerStates,
    mass: ReducedMass,
    search: ReSearch,
) -> Result<ReFit> {
    if !(search.hi > search.lo && search.lo > 0.0) {
        return Err(Error::Config(format!("bad Rₑ window [{}, {}]", search.lo, search.hi)));
    }
    let misfit_at = |r_e: f64| intensity_misfit(&partial.with_r_e(r_e), spectrum, lower, mass);
    let cands = search.candidates();
    let values: Vec<f64> = cands.par_iter().map(|&r| misfit_at(r)).collect::<Result<_>>()?;
    let curve: Vec<(f64, f64)> = cands.iter().copied().zip(values.iter().copied()).collect();

    // strict < keeps the smallest Rₑ on ties
    let mut best = 0;
    for (k, &v) in values.iter().enumerate() {
        if v < values[best] {
            best = k;
        }
    }
    if best == 0 || best == cands.len() - 1 {
        return Err(Error::BoundaryHit { r_e: cands[best], lo: search.lo, hi: search.hi });
    }
    let (r_e, misfit) = golden_section_min(misfit_at, cands[best - 1], cands[best + 1], RE_TOLERANCE)?;
    let (r_e, misfit) = if misfit <= values[best] { (r_e, misfit) } else { (cands[best], values[best]) };
    Ok(ReFit { r_e, misfit, misfit_curve: curve })
}

/// Golden-section minimization of a unimodal function on `[a, b]` until the
/// bracket is narrower than `tol`.
pub fn golden_section_min(
    f: impl Fn(f64) -> Result<f64>,
    mut a: f64,
    mut b: f64,
    tol: f64,
) -> Result<(f64, f64)> {
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let mut fc = f(c)?;
    let mut fd = f(d)?;
    while (b - a).abs() > tol {
        if fc <= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = f(c)?;
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = f(d)?;
        }
    }
    Ok(if fc <= fd { (c, fc) } else { (d, fd) })
}
