use nalgebra::SymmetricEigen;

use super::{creation, ladder, CMatrix, CVector, ModeSpace, Operator, C64, MAX_DENSE_DIM};
use crate::error::{Error, Result};

const TRACE_TOL: f64 = 1e-9;
const PSD_TOL: f64 = 1e-9;

/// Density-matrix state on a [`ModeSpace`].
#[derive(Clone, Debug, PartialEq)]
pub struct State {
    space: ModeSpace,
    density: CMatrix,
}

impl State {
    /// Validated constructor: unit trace, Hermitian and positive semidefinite
    /// within 1e-9.
    pub fn from_density(space: ModeSpace, density: CMatrix) -> Result<Self> {
        let n = space.total_dim();
        if density.nrows() != n || density.ncols() != n {
            return Err(Error::DimensionMismatch { expected: n, actual: density.nrows() });
        }
        let state = Self { space, density };
        let tr = state.trace();
        if (tr.re - 1.0).abs() > TRACE_TOL || tr.im.abs() > TRACE_TOL {
            return Err(Error::InvalidState(format!("trace {tr} != 1")));
        }
        let herm = state.hermiticity_error();
        if herm > TRACE_TOL {
            return Err(Error::InvalidState(format!("not Hermitian ({herm:e})")));
        }
        let min_eig = state.min_eigenvalue();
        if min_eig < -PSD_TOL {
            return Err(Error::InvalidState(format!("negative eigenvalue {min_eig:e}")));
        }
        Ok(state)
    }

    pub(crate) fn from_density_unchecked(space: ModeSpace, density: CMatrix) -> Self {
        Self { space, density }
    }

    /// Pure state `|psi><psi|`; `psi` is normalised first.
    pub fn pure(space: ModeSpace, psi: &CVector) -> Result<Self> {
        let n = space.total_dim();
        if n > MAX_DENSE_DIM {
            return Err(Error::DimensionOverflow(n));
        }
        if psi.len() != n {
            return Err(Error::DimensionMismatch { expected: n, actual: psi.len() });
        }
        let norm = psi.norm();
        if norm == 0.0 {
            return Err(Error::InvalidState("zero state vector".into()));
        }
        let psi = psi / C64::new(norm, 0.0);
        let density = &psi * psi.adjoint();
        Ok(Self { space, density })
    }

    /// Product of per-mode pure states, in mode order.
    pub fn product(space: ModeSpace, factors: &[CVector]) -> Result<Self> {
        if factors.len() != space.n_modes() {
            return Err(Error::DimensionMismatch { expected: space.n_modes(), actual: factors.len() });
        }
        let mut psi = CVector::from_element(1, C64::new(1.0, 0.0));
        for (f, &d) in factors.iter().zip(space.dims()) {
            if f.len() != d {
                return Err(Error::DimensionMismatch { expected: d, actual: f.len() });
            }
            psi = psi.kronecker(f);
        }
        Self::pure(space, &psi)
    }

    /// Product Fock state with the given occupations.
    pub fn fock(space: ModeSpace, levels: &[usize]) -> Result<Self> {
        let idx = space.basis_index(levels)?;
        let mut psi = CVector::zeros(space.total_dim());
        psi[idx] = C64::new(1.0, 0.0);
        Self::pure(space, &psi)
    }

    pub fn vacuum(space: ModeSpace) -> Result<Self> {
        let levels = vec![0; space.n_modes()];
        Self::fock(space, &levels)
    }

    pub fn space(&self) -> &ModeSpace {
        &self.space
    }

    pub fn density(&self) -> &CMatrix {
        &self.density
    }

    pub fn trace(&self) -> C64 {
        self.density.trace()
    }

    /// `Tr(rho^2)`.
    pub fn purity(&self) -> f64 {
        // Tr(rho rho) = sum_ij rho_ij rho_ji = sum_ij |rho_ij|^2 for Hermitian rho
        self.density.iter().map(|z| z.norm_sqr()).sum()
    }

    pub fn hermiticity_error(&self) -> f64 {
        let n = self.density.nrows();
        let mut worst = 0.0f64;
        for j in 0..n {
            for i in 0..=j {
                worst = worst.max((self.density[(i, j)] - self.density[(j, i)].conj()).norm());
            }
        }
        worst
    }

    /// Smallest eigenvalue of the Hermitian part of the density matrix.
    pub fn min_eigenvalue(&self) -> f64 {
        let herm = (&self.density + self.density.adjoint()) * C64::new(0.5, 0.0);
        SymmetricEigen::new(herm).eigenvalues.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn expect(&self, op: &Operator) -> C64 {
        assert_eq!(&self.space, op.space(), "state/operator spaces differ");
        // Tr(rho A) = sum_ij rho_ij A_ji
        let n = self.density.nrows();
        let mut acc = C64::new(0.0, 0.0);
        for j in 0..n {
            for i in 0..n {
                acc += self.density[(i, j)] * op.matrix()[(j, i)];
            }
        }
        acc
    }

    /// Photon-number distribution of `mode` (diagonal of the reduced state).
    pub fn populations(&self, mode: usize) -> Result<Vec<f64>> {
        self.space.check_mode(mode)?;
        let mut p = vec![0.0; self.space.dims()[mode]];
        for i in 0..self.density.nrows() {
            p[self.space.level(i, mode)] += self.density[(i, i)].re;
        }
        Ok(p)
    }

    pub fn mean_number(&self, mode: usize) -> Result<f64> {
        Ok(self.populations(mode)?.iter().enumerate().map(|(n, p)| n as f64 * p).sum())
    }

    /// `U rho U^dag`.
    pub fn transform(&self, unitary: &Operator) -> Self {
        assert_eq!(&self.space, unitary.space(), "state/operator spaces differ");
        let u = unitary.matrix();
        Self { space: self.space.clone(), density: u * &self.density * u.adjoint() }
    }

    /// Uhlmann fidelity `(Tr sqrt(sqrt(rho) sigma sqrt(rho)))^2`.
    pub fn fidelity(&self, other: &Self) -> f64 {
        assert_eq!(self.space, other.space, "state spaces differ");
        let s = psd_sqrt(&self.density);
        let inner = &s * &other.density * &s;
        let herm = (&inner + inner.adjoint()) * C64::new(0.5, 0.0);
        let tr: f64 = SymmetricEigen::new(herm).eigenvalues.iter().map(|&l| l.max(0.0).sqrt()).sum();
        tr * tr
    }
}

fn psd_sqrt(m: &CMatrix) -> CMatrix {
    let herm = (m + m.adjoint()) * C64::new(0.5, 0.0);
    let eig = SymmetricEigen::new(herm);
    let d = eig.eigenvalues.map(|l| C64::new(l.max(0.0).sqrt(), 0.0));
    &eig.eigenvectors * CMatrix::from_diagonal(&d) * eig.eigenvectors.adjoint()
}

fn check_truncation(dim: usize, alpha: C64) -> Result<()> {
    let mean = alpha.norm_sqr();
    let limit = dim as f64 / 4.0;
    if mean > limit {
        Err(Error::Truncation { mean_photons: mean, limit })
    } else {
        Ok(())
    }
}

/// Renormalised coherent-state amplitudes `<n|alpha>` for `n < dim`.
pub fn coherent_amplitudes(dim: usize, alpha: C64) -> Result<CVector> {
    check_truncation(dim, alpha)?;
    let mut amps = CVector::zeros(dim);
    let mut c = C64::new((-alpha.norm_sqr() / 2.0).exp(), 0.0);
    amps[0] = c;
    for n in 1..dim {
        c = c * alpha / (n as f64).sqrt();
        amps[n] = c;
    }
    let norm = amps.norm();
    Ok(amps / C64::new(norm, 0.0))
}

/// Coherent state `|alpha>` on `mode`, every other mode in its ground state.
pub fn coherent_state(space: &ModeSpace, mode: usize, alpha: C64) -> Result<State> {
    space.check_mode(mode)?;
    let factors: Vec<CVector> = space
        .dims()
        .iter()
        .enumerate()
        .map(|(m, &d)| {
            if m == mode {
                coherent_amplitudes(d, alpha)
            } else {
                let mut v = CVector::zeros(d);
                v[0] = C64::new(1.0, 0.0);
                Ok(v)
            }
        })
        .collect::<Result<_>>()?;
    State::product(space.clone(), &factors)
}

/// `exp(alpha a^dag - alpha^* a)` for `mode`, via the matrix exponential of
/// the truncated generator.
pub fn displacement_operator(space: &ModeSpace, mode: usize, alpha: C64) -> Result<Operator> {
    space.check_mode(mode)?;
    let d = space.dims()[mode];
    check_truncation(d, alpha)?;
    let single_space = ModeSpace::from_dims(&[d])?;
    let a = ladder(&single_space, 0)?;
    let ad = creation(&single_space, 0)?;
    let generator = ad.scale(alpha) - a.scale(alpha.conj());
    let single = generator.matrix().exp();
    Operator::embed(space, mode, &single)
}

/// Displaces `mode` of `state` by `alpha`.
pub fn displace(state: &State, mode: usize, alpha: C64) -> Result<State> {
    let d = displacement_operator(state.space(), mode, alpha)?;
    Ok(state.transform(&d))
}
