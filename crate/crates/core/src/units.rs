//! Unit conversions. Internally everything is in atomic units (hartree, bohr,
//! electron masses); file and command-line I/O use cm⁻¹ and bohr.

/// Fixed conversion constants (CODATA 2018).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UnitSystem {
    pub hartree_to_invcm: f64,
    pub amu_to_electron_mass: f64,
    pub angstrom_to_bohr: f64,
}

pub const UNITS: UnitSystem = UnitSystem {
    hartree_to_invcm: 219474.6313632,
    amu_to_electron_mass: 1822.888486209,
    angstrom_to_bohr: 1.0 / 0.529177210903,
};

pub const HARTREE_TO_INVCM: f64 = UNITS.hartree_to_invcm;
pub const AMU_TO_ME: f64 = UNITS.amu_to_electron_mass;
pub const ANGSTROM_TO_BOHR: f64 = UNITS.angstrom_to_bohr;

/// Atomic mass of ⁷Li in unified atomic mass units.
pub const MASS_LI7_AMU: f64 = 7.016_003_436_6;
/// Atomic mass of ⁸⁵Rb in unified atomic mass units.
pub const MASS_RB85_AMU: f64 = 84.911_789_737_9;

#[inline]
pub fn to_invcm(hartree: f64) -> f64 {
    hartree * HARTREE_TO_INVCM
}

#[inline]
pub fn to_hartree(invcm: f64) -> f64 {
    invcm / HARTREE_TO_INVCM
}

/// Reduced mass of a pair of atoms given in amu, returned in amu.
pub fn reduced_mass_amu(m1: f64, m2: f64) -> f64 {
    m1 * m2 / (m1 + m2)
}

/// Reduced mass of ⁷Li⁸⁵Rb in amu.
pub fn lirb_reduced_mass_amu() -> f64 {
    reduced_mass_amu(MASS_LI7_AMU, MASS_RB85_AMU)
}

/// Reduced mass in electron masses.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct ReducedMass(pub f64);

impl ReducedMass {
    pub fn from_amu(amu: f64) -> Self {
        ReducedMass(amu * AMU_TO_ME)
    }

    pub fn amu(self) -> f64 {
        self.0 / AMU_TO_ME
    }

    pub fn lirb() -> Self {
        Self::from_amu(lirb_reduced_mass_amu())
    }
}
