//! Lumped-element coupling model, transmon spectrum and the multimode
//! dispersive Hamiltonian.

mod dispersive;
mod network;
mod transmon;

pub use dispersive::{
    build_hamiltonian, cavity_self_kerr, chi_from_g, chi_from_g_transmon, dephasing_time_from_t1_t2, g_from_chi,
    DispersiveSystem, ModeSpec,
};
pub use network::{beta, coupling_g, ej_from_lj, zero_point_voltage, CapacitanceNetwork};
pub use transmon::{transmon_spectrum, TransmonParams, TransmonSpectrum};
