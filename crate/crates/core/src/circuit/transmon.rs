use nalgebra::{DMatrix, SymmetricEigen};
use serde::Serialize;

use crate::error::{Error, Result};

/// Cooper-pair-box parameters in Hz (energies over h).
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct TransmonParams {
    pub e_j: f64,
    pub e_c: f64,
    pub n_g: f64,
    /// Half-width of the charge basis, `n in [-cutoff, cutoff]`. `None`
    /// selects `ceil(sqrt(E_J/E_C)) + 20`.
    pub charge_cutoff: Option<usize>,
}

const MIN_CUTOFF: usize = 10;
const MAX_CUTOFF: usize = 400;
const LEVELS: usize = 5;

impl TransmonParams {
    pub fn new(e_j: f64, e_c: f64, n_g: f64) -> Result<Self> {
        let p = Self { e_j, e_c, n_g, charge_cutoff: None };
        p.validate()?;
        Ok(p)
    }

    pub fn with_cutoff(mut self, cutoff: usize) -> Result<Self> {
        self.charge_cutoff = Some(cutoff);
        self.validate()?;
        Ok(self)
    }

    fn validate(&self) -> Result<()> {
        if !(self.e_j.is_finite() && self.e_j > 0.0 && self.e_c.is_finite() && self.e_c > 0.0) {
            return Err(Error::InvalidParameter(format!("E_J = {}, E_C = {} must be > 0", self.e_j, self.e_c)));
        }
        if !self.n_g.is_finite() {
            return Err(Error::InvalidParameter("offset charge must be finite".into()));
        }
        if let Some(c) = self.charge_cutoff {
            if c < MIN_CUTOFF {
                return Err(Error::InvalidParameter(format!("charge cutoff {c} < {MIN_CUTOFF}")));
            }
        }
        Ok(())
    }

    pub fn ej_over_ec(&self) -> f64 {
        self.e_j / self.e_c
    }

    /// True iff `E_J/E_C > 50`.
    pub fn transmon_regime(&self) -> bool {
        self.ej_over_ec() > 50.0
    }

    fn default_cutoff(&self) -> usize {
        self.charge_cutoff.unwrap_or_else(|| (self.ej_over_ec().sqrt().ceil() as usize + 20).max(MIN_CUTOFF))
    }
}

/// Lowest levels of the Cooper-pair box, Hz, ground level at 0.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TransmonSpectrum {
    pub levels: Vec<f64>,
    pub cutoff: usize,
}

impl TransmonSpectrum {
    pub fn omega01(&self) -> f64 {
        self.levels[1] - self.levels[0]
    }

    pub fn omega12(&self) -> f64 {
        self.levels[2] - self.levels[1]
    }

    /// `f_12 - f_01`, Hz.
    pub fn anharmonicity(&self) -> f64 {
        self.omega12() - self.omega01()
    }
}

fn diagonalize(p: &TransmonParams, cutoff: usize) -> Vec<f64> {
    let size = 2 * cutoff + 1;
    let mut h = DMatrix::<f64>::zeros(size, size);
    for k in 0..size {
        let n = k as f64 - cutoff as f64;
        h[(k, k)] = 4.0 * p.e_c * (n - p.n_g).powi(2);
        if k + 1 < size {
            h[(k, k + 1)] = -p.e_j / 2.0;
            h[(k + 1, k)] = -p.e_j / 2.0;
        }
    }
    let mut ev: Vec<f64> = SymmetricEigen::new(h).eigenvalues.iter().copied().collect();
    ev.sort_by(|a, b| a.total_cmp(b));
    let ground = ev[0];
    ev.truncate(LEVELS);
    ev.iter().map(|e| e - ground).collect()
}

/// Charge-basis diagonalisation of `4 E_C (n - n_g)^2 - E_J/2 (|n><n+1| + h.c.)`.
///
/// The cutoff is extended in steps of 5 until `f_01` moves by less than 1 Hz.
pub fn transmon_spectrum(p: &TransmonParams) -> Result<TransmonSpectrum> {
    p.validate()?;
    let mut cutoff = p.default_cutoff();
    let mut levels = diagonalize(p, cutoff);
    while cutoff + 5 <= MAX_CUTOFF {
        let next = diagonalize(p, cutoff + 5);
        let change = ((next[1] - next[0]) - (levels[1] - levels[0])).abs();
        if change < 1.0 {
            return Ok(TransmonSpectrum { levels, cutoff });
        }
        cutoff += 5;
        levels = next;
    }
    Err(Error::Convergence(format!("f_01 still moving at charge cutoff {cutoff}")))
}
