use serde::Serialize;

use crate::error::{Error, Result};
use crate::units::{ELEMENTARY_CHARGE, FLUX_QUANTUM, HBAR, PLANCK};

/// Capacitances (F) and inductances (H) of the aperture-transmon coupling
/// circuit: island-to-opposite-wall gap `c_g`, island-to-lower-wall annulus
/// `c_p`, junction `c_j`, and the cavity mode's `c` and `l`, plus the
/// junction inductance `l_j`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct CapacitanceNetwork {
    pub c_g: f64,
    pub c_p: f64,
    pub c_j: f64,
    pub c: f64,
    pub l: f64,
    pub l_j: f64,
}

impl CapacitanceNetwork {
    /// `c_p` and `c_j` may be zero (degenerate divider); everything else must
    /// be strictly positive and finite.
    pub fn new(c_g: f64, c_p: f64, c_j: f64, c: f64, l: f64, l_j: f64) -> Result<Self> {
        let positive = [("c_g", c_g), ("c", c), ("l", l), ("l_j", l_j)];
        for (name, v) in positive {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::InvalidParameter(format!("{name} must be > 0, got {v}")));
            }
        }
        for (name, v) in [("c_p", c_p), ("c_j", c_j)] {
            if !(v.is_finite() && v >= 0.0) {
                return Err(Error::InvalidParameter(format!("{name} must be >= 0, got {v}")));
            }
        }
        let net = Self { c_g, c_p, c_j, c, l, l_j };
        let w = net.cavity_omega();
        if !(w.is_finite() && w > 0.0) {
            return Err(Error::InvalidParameter(format!("cavity frequency 1/sqrt(LC) = {w} is not finite")));
        }
        Ok(net)
    }

    /// Cavity angular frequency `1/sqrt(L C)`.
    pub fn cavity_omega(&self) -> f64 {
        1.0 / (self.l * self.c).sqrt()
    }
}

/// Capacitive division ratio `C_g / (C_g + C_p + C_j)`.
pub fn beta(net: &CapacitanceNetwork) -> f64 {
    net.c_g / (net.c_g + net.c_p + net.c_j)
}

/// Zero-point voltage `sqrt(hbar omega / 2C)` of the cavity mode, V.
pub fn zero_point_voltage(net: &CapacitanceNetwork) -> f64 {
    (HBAR * net.cavity_omega() / (2.0 * net.c)).sqrt()
}

/// Qubit–cavity coupling `g = e V0 beta / hbar`, rad/s.
pub fn coupling_g(net: &CapacitanceNetwork) -> f64 {
    ELEMENTARY_CHARGE * zero_point_voltage(net) * beta(net) / HBAR
}

/// Josephson energy over h, Hz: `(Phi0 / 2 pi)^2 / (L_J h)`.
pub fn ej_from_lj(l_j: f64) -> Result<f64> {
    if !(l_j > 0.0) {
        return Err(Error::InvalidParameter(format!("junction inductance must be > 0, got {l_j}")));
    }
    let reduced_flux = FLUX_QUANTUM / (2.0 * std::f64::consts::PI);
    Ok(reduced_flux * reduced_flux / (l_j * PLANCK))
}
