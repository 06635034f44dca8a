use std::fmt::Write as _;
use std::str::FromStr;

use super::{NaturalSpline, RadialGrid};
use crate::error::{Error, Result};
use crate::units::{to_hartree, to_invcm, ANGSTROM_TO_BOHR, HARTREE_TO_INVCM};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LengthUnit {
    Bohr,
    Angstrom,
}

impl LengthUnit {
    pub fn to_bohr(self, r: f64) -> f64 {
        match self {
            LengthUnit::Bohr => r,
            LengthUnit::Angstrom => r * ANGSTROM_TO_BOHR,
        }
    }
}

impl FromStr for LengthUnit {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "bohr" | "a0" | "au" => Ok(LengthUnit::Bohr),
            "angstrom" | "ang" | "a" => Ok(LengthUnit::Angstrom),
            other => Err(Error::Config(format!("unknown length unit '{other}'"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EnergyUnit {
    InvCm,
    Hartree,
}

impl EnergyUnit {
    pub fn to_hartree(self, e: f64) -> f64 {
        match self {
            EnergyUnit::InvCm => to_hartree(e),
            EnergyUnit::Hartree => e,
        }
    }
}

impl FromStr for EnergyUnit {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "cm-1" | "cm^-1" | "invcm" | "wavenumber" => Ok(EnergyUnit::InvCm),
            "hartree" | "eh" | "au" => Ok(EnergyUnit::Hartree),
            other => Err(Error::Config(format!("unknown energy unit '{other}'"))),
        }
    }
}

/// A potential tabulated on a uniform radial grid, in hartree, evaluated
/// between nodes by a natural cubic spline.
#[derive(Debug, Clone)]
pub struct PotentialCurve {
    grid: RadialGrid,
    values: Vec<f64>,
    spline: NaturalSpline,
}

impl PotentialCurve {
    pub fn new(grid: RadialGrid, values: Vec<f64>) -> Result<Self> {
        grid.check_len(&values)?;
        if let Some(k) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite { r: grid.r(k) });
        }
        let spline = NaturalSpline::new(grid.to_vec(), values.clone())?;
        Ok(Self { grid, values, spline })
    }

    pub fn from_fn(grid: RadialGrid, f: impl Fn(f64) -> f64) -> Result<Self> {
        Self::new(grid, grid.sample(f))
    }

    /// Builds a curve from arbitrary increasing samples (bohr, hartree).
    /// With `target = None` a uniform input keeps its own grid and a
    /// non-uniform one is resampled onto a uniform grid of the same span and
    /// point count.
    pub fn from_samples(r: Vec<f64>, v: Vec<f64>, target: Option<RadialGrid>) -> Result<Self> {
        let n = r.len();
        if n < 3 {
            return Err(Error::InputShape(format!("need at least 3 samples, got {n}")));
        }
        let native = RadialGrid::new(r[0], r[n - 1], n)?;
        let uniform = r
            .iter()
            .enumerate()
            .all(|(k, &rk)| (rk - native.r(k)).abs() <= 1e-9 * rk.abs().max(1.0));
        match target {
            None if uniform => Self::new(native, v),
            None => Self::from_spline(&NaturalSpline::new(r, v)?, native),
            Some(grid) => Self::from_spline(&NaturalSpline::new(r, v)?, grid),
        }
    }

    fn from_spline(s: &NaturalSpline, grid: RadialGrid) -> Result<Self> {
        let values = grid.points().map(|r| s.eval(r)).collect::<Result<Vec<_>>>()?;
        Self::new(grid, values)
    }

    pub fn grid(&self) -> &RadialGrid {
        &self.grid
    }

    /// Values in hartree, one per grid point.
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_invcm(&self) -> Vec<f64> {
        self.values.iter().map(|&v| to_invcm(v)).collect()
    }

    pub fn interpolate(&self, r: f64) -> Result<f64> {
        self.spline.eval(r)
    }

    pub fn derivative(&self, r: f64) -> Result<f64> {
        self.spline.derivative(r)
    }

    pub fn resample(&self, grid: RadialGrid) -> Result<Self> {
        if grid == self.grid {
            return Ok(self.clone());
        }
        Self::from_spline(&self.spline, grid)
    }

    /// Smallest tabulated value and the index where it occurs.
    pub fn minimum(&self) -> (usize, f64) {
        self.values
            .iter()
            .copied()
            .enumerate()
            .fold((0, f64::INFINITY), |best, (k, v)| if v < best.1 { (k, v) } else { best })
    }

    /// Pointwise map over the tabulated values.
    pub fn map(&self, f: impl Fn(f64, f64) -> f64) -> Result<Self> {
        let values = self.grid.points().zip(&self.values).map(|(r, &v)| f(r, v)).collect();
        Self::new(self.grid, values)
    }

    pub fn shifted(&self, delta_hartree: f64) -> Result<Self> {
        self.map(|_, v| v + delta_hartree)
    }

    /// Parses the two-column potential text format. Lines starting with `#`
    /// are comments; a `# units: <R-unit> <E-unit>` line declares units
    /// (default `bohr cm-1`). `length_override` forces the R unit.
    pub fn parse(text: &str, length_override: Option<LengthUnit>, target: Option<RadialGrid>) -> Result<Self> {
        let (r, v) = parse_two_column(text, length_override)?;
        Self::from_samples(r, v, target)
    }

    /// Writes the curve in bohr and cm⁻¹.
    pub fn to_text(&self) -> String {
        let mut out = String::from("# units: bohr cm-1\n");
        for (r, v) in self.grid.points().zip(&self.values) {
            let _ = writeln!(out, "{:.10} {:.10}", r, v * HARTREE_TO_INVCM);
        }
        out
    }
}

fn parse_two_column(text: &str, length_override: Option<LengthUnit>) -> Result<(Vec<f64>, Vec<f64>)> {
    let mut r_unit = LengthUnit::Bohr;
    let mut e_unit = EnergyUnit::InvCm;
    let mut pairs = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = raw.trim();
        let lineno = idx + 1;
        if line.is_empty() {
            continue;
        }
        if let Some(comment) = line.strip_prefix('#') {
            if let Some(spec) = comment.trim().strip_prefix("units:") {
                let mut it = spec.split_whitespace();
                let (Some(ru), Some(eu)) = (it.next(), it.next()) else {
                    return Err(Error::Parse { line: lineno, msg: "units header needs <R-unit> <E-unit>".into() });
                };
                r_unit = ru.parse().map_err(|e: Error| Error::Parse { line: lineno, msg: e.to_string() })?;
                e_unit = eu.parse().map_err(|e: Error| Error::Parse { line: lineno, msg: e.to_string() })?;
            }
            continue;
        }
        let mut it = line.split_whitespace();
        let parse = |tok: Option<&str>| -> Result<f64> {
            tok.ok_or_else(|| Error::Parse { line: lineno, msg: "expected two columns".into() })?
                .parse::<f64>()
                .map_err(|e| Error::Parse { line: lineno, msg: e.to_string() })
        };
        let r = parse(it.next())?;
        let v = parse(it.next())?;
        if it.next().is_some() {
            return Err(Error::Parse { line: lineno, msg: "expected exactly two columns".into() });
        }
        pairs.push((lineno, r, v));
    }
    let r_unit = length_override.unwrap_or(r_unit);
    let mut rs = Vec::with_capacity(pairs.len());
    let mut vs = Vec::with_capacity(pairs.len());
    for (lineno, r, v) in pairs {
        let r = r_unit.to_bohr(r);
        if let Some(&last) = rs.last() {
            if r <= last {
                return Err(Error::Parse { line: lineno, msg: "R values must be strictly increasing".into() });
            }
        }
        rs.push(r);
        vs.push(e_unit.to_hartree(v));
    }
    Ok((rs, vs))
}
