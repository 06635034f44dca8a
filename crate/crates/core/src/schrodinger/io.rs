//! Eigenstate dump: a `# v J energy_cm-1` header, one value line, a grid
//! line, then one amplitude per line.

use std::fmt::Write as _;

use super::RovibState;
use crate::error::{Error, Result};
use crate::numgrid::RadialGrid;
use crate::units::to_hartree;

#[derive(Debug, Clone, PartialEq)]
pub struct StateDump {
    pub v: usize,
    pub j: u32,
    pub energy_invcm: f64,
    pub grid: RadialGrid,
    pub amplitudes: Vec<f64>,
}

impl StateDump {
    pub fn energy_hartree(&self) -> f64 {
        to_hartree(self.energy_invcm)
    }
}

pub fn format_state(state: &RovibState) -> String {
    let mut out = String::from("# v J energy_cm-1\n");
    let _ = writeln!(out, "# {} {} {:.8}", state.v, state.j, state.energy_invcm());
    let g = state.grid;
    let _ = writeln!(out, "# grid {} {} {}", g.r_min(), g.r_max(), g.len());
    for a in &state.wavefunction {
        let _ = writeln!(out, "{a:.12e}");
    }
    out
}

pub fn parse_state(text: &str) -> Result<StateDump> {
    let mut header: Option<(usize, u32, f64)> = None;
    let mut grid: Option<RadialGrid> = None;
    let mut amplitudes = Vec::new();
    let perr = |line: usize, msg: String| Error::Parse { line, msg };
    for (idx, raw) in text.lines().enumerate() {
        let lineno = idx + 1;
        let line = raw.trim();
        if line.is_empty() {
            continue;
        }
        if let Some(c) = line.strip_prefix('#') {
            let toks: Vec<&str> = c.split_whitespace().collect();
            match toks.as_slice() {
                ["v", "J", "energy_cm-1"] => {}
                ["grid", a, b, n] => {
                    let a = a.parse::<f64>().map_err(|e| perr(lineno, e.to_string()))?;
                    let b = b.parse::<f64>().map_err(|e| perr(lineno, e.to_string()))?;
                    let n = n.parse::<usize>().map_err(|e| perr(lineno, e.to_string()))?;
                    grid = Some(RadialGrid::new(a, b, n)?);
                }
                [v, j, e] if header.is_none() => {
                    let v = v.parse().map_err(|_| perr(lineno, format!("bad v '{v}'")))?;
                    let j = j.parse().map_err(|_| perr(lineno, format!("bad J '{j}'")))?;
                    let e = e.parse().map_err(|_| perr(lineno, format!("bad energy '{e}'")))?;
                    header = Some((v, j, e));
                }
                _ => {}
            }
            continue;
        }
        amplitudes.push(line.parse::<f64>().map_err(|e| perr(lineno, e.to_string()))?);
    }
    let (v, j, energy_invcm) = header.ok_or_else(|| perr(0, "missing '# v J energy' line".into()))?;
    let grid = grid.ok_or_else(|| perr(0, "missing '# grid' line".into()))?;
    grid.check_len(&amplitudes)?;
    Ok(StateDump { v, j, energy_invcm, grid, amplitudes })
}
