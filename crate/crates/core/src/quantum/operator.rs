use std::ops::{Add, Mul, Sub};

use super::{CMatrix, ModeSpace, C64, MAX_DENSE_DIM};
use crate::error::{Error, Result};

/// Dense operator on a [`ModeSpace`].
#[derive(Clone, Debug, PartialEq)]
pub struct Operator {
    space: ModeSpace,
    matrix: CMatrix,
}

impl Operator {
    pub fn new(space: ModeSpace, matrix: CMatrix) -> Result<Self> {
        let n = space.total_dim();
        if matrix.nrows() != n || matrix.ncols() != n {
            return Err(Error::DimensionMismatch { expected: n, actual: matrix.nrows().max(matrix.ncols()) });
        }
        Ok(Self { space, matrix })
    }

    pub fn zeros(space: &ModeSpace) -> Result<Self> {
        let n = checked_dim(space)?;
        Ok(Self { space: space.clone(), matrix: CMatrix::zeros(n, n) })
    }

    pub fn identity(space: &ModeSpace) -> Result<Self> {
        let n = checked_dim(space)?;
        Ok(Self { space: space.clone(), matrix: CMatrix::identity(n, n) })
    }

    /// Diagonal operator with real entries.
    pub fn from_diagonal(space: &ModeSpace, diag: &[f64]) -> Result<Self> {
        let n = checked_dim(space)?;
        if diag.len() != n {
            return Err(Error::DimensionMismatch { expected: n, actual: diag.len() });
        }
        let matrix = CMatrix::from_fn(n, n, |i, j| if i == j { C64::new(diag[i], 0.0) } else { C64::new(0.0, 0.0) });
        Ok(Self { space: space.clone(), matrix })
    }

    /// Embeds a single-mode matrix acting on `mode` into the composite space.
    pub fn embed(space: &ModeSpace, mode: usize, single: &CMatrix) -> Result<Self> {
        space.check_mode(mode)?;
        let d = space.dims()[mode];
        if single.nrows() != d || single.ncols() != d {
            return Err(Error::DimensionMismatch { expected: d, actual: single.nrows() });
        }
        let n = checked_dim(space)?;
        let stride = space.stride(mode);
        let mut matrix = CMatrix::zeros(n, n);
        for col in 0..n {
            let lc = space.level(col, mode);
            let base = col - lc * stride;
            for lr in 0..d {
                let v = single[(lr, lc)];
                if v != C64::new(0.0, 0.0) {
                    matrix[(base + lr * stride, col)] = v;
                }
            }
        }
        Ok(Self { space: space.clone(), matrix })
    }

    pub fn space(&self) -> &ModeSpace {
        &self.space
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> CMatrix {
        self.matrix
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn adjoint(&self) -> Self {
        Self { space: self.space.clone(), matrix: self.matrix.adjoint() }
    }

    /// Largest entry of `|A - A^dag|`.
    pub fn hermiticity_error(&self) -> f64 {
        let n = self.dim();
        let mut worst = 0.0f64;
        for j in 0..n {
            for i in 0..=j {
                worst = worst.max((self.matrix[(i, j)] - self.matrix[(j, i)].conj()).norm());
            }
        }
        worst
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.hermiticity_error() < tol
    }

    /// Largest absolute entry.
    pub fn max_abs(&self) -> f64 {
        self.matrix.iter().fold(0.0f64, |m, z| m.max(z.norm()))
    }

    /// Largest absolute off-diagonal entry.
    pub fn off_diagonal_max(&self) -> f64 {
        let n = self.dim();
        let mut worst = 0.0f64;
        for j in 0..n {
            for i in 0..n {
                if i != j {
                    worst = worst.max(self.matrix[(i, j)].norm());
                }
            }
        }
        worst
    }

    pub fn is_diagonal(&self) -> bool {
        self.off_diagonal_max() == 0.0
    }

    pub fn commutator(&self, other: &Self) -> Self {
        self * other - other * self
    }

    pub fn scale(&self, s: C64) -> Self {
        Self { space: self.space.clone(), matrix: &self.matrix * s }
    }

    pub fn scale_real(&self, s: f64) -> Self {
        self.scale(C64::new(s, 0.0))
    }
}

fn checked_dim(space: &ModeSpace) -> Result<usize> {
    let n = space.total_dim();
    if n > MAX_DENSE_DIM {
        Err(Error::DimensionOverflow(n))
    } else {
        Ok(n)
    }
}

impl<'a> Mul<&'a Operator> for &'a Operator {
    type Output = Operator;
    fn mul(self, rhs: &'a Operator) -> Operator {
        assert_eq!(self.space, rhs.space, "operator spaces differ");
        Operator { space: self.space.clone(), matrix: &self.matrix * &rhs.matrix }
    }
}

impl<'a> Add<&'a Operator> for &'a Operator {
    type Output = Operator;
    fn add(self, rhs: &'a Operator) -> Operator {
        assert_eq!(self.space, rhs.space, "operator spaces differ");
        Operator { space: self.space.clone(), matrix: &self.matrix + &rhs.matrix }
    }
}

impl<'a> Sub<&'a Operator> for &'a Operator {
    type Output = Operator;
    fn sub(self, rhs: &'a Operator) -> Operator {
        assert_eq!(self.space, rhs.space, "operator spaces differ");
        Operator { space: self.space.clone(), matrix: &self.matrix - &rhs.matrix }
    }
}

impl Sub for Operator {
    type Output = Operator;
    fn sub(self, rhs: Operator) -> Operator {
        &self - &rhs
    }
}

impl Add for Operator {
    type Output = Operator;
    fn add(self, rhs: Operator) -> Operator {
        &self + &rhs
    }
}

fn single_ladder(d: usize) -> CMatrix {
    let mut m = CMatrix::zeros(d, d);
    for n in 1..d {
        m[(n - 1, n)] = C64::new((n as f64).sqrt(), 0.0);
    }
    m
}

/// Annihilation operator `a` of `mode`: `a|n> = sqrt(n)|n-1>`.
pub fn ladder(space: &ModeSpace, mode: usize) -> Result<Operator> {
    space.check_mode(mode)?;
    Operator::embed(space, mode, &single_ladder(space.dims()[mode]))
}

/// Creation operator `a^dag` of `mode`.
pub fn creation(space: &ModeSpace, mode: usize) -> Result<Operator> {
    Ok(ladder(space, mode)?.adjoint())
}

/// Number operator `a^dag a` of `mode`.
pub fn number_op(space: &ModeSpace, mode: usize) -> Result<Operator> {
    space.check_mode(mode)?;
    let n = checked_dim(space)?;
    let diag: Vec<f64> = (0..n).map(|i| space.level(i, mode) as f64).collect();
    Operator::from_diagonal(space, &diag)
}

/// Instantaneous rotation by `theta` about the equatorial axis at azimuth
/// `phi` acting on levels {0, 1} of `mode`; higher levels are untouched.
///
/// `phi = 0` is the x axis: `R = exp(-i theta/2 sigma_x)`.
pub fn qubit_rotation(space: &ModeSpace, mode: usize, theta: f64, phi: f64) -> Result<Operator> {
    space.check_mode(mode)?;
    let d = space.dims()[mode];
    let mut m = CMatrix::identity(d, d);
    let c = (theta / 2.0).cos();
    let s = (theta / 2.0).sin();
    let minus_i = C64::new(0.0, -1.0);
    m[(0, 0)] = C64::new(c, 0.0);
    m[(1, 1)] = C64::new(c, 0.0);
    // -i sin(theta/2) (cos phi sigma_x + sin phi sigma_y)
    m[(0, 1)] = minus_i * s * C64::from_polar(1.0, -phi);
    m[(1, 0)] = minus_i * s * C64::from_polar(1.0, phi);
    Operator::embed(space, mode, &m)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn kron(a: &CMatrix, b: &CMatrix) -> CMatrix {
        // Independent Kronecker product oracle.
        let (ra, ca) = a.shape();
        let (rb, cb) = b.shape();
        CMatrix::from_fn(ra * rb, ca * cb, |i, j| a[(i / rb, j / cb)] * b[(i % rb, j % cb)])
    }

    #[test]
    fn ladder_two_level_is_sigma_minus() {
        let s = ModeSpace::from_dims(&[2]).unwrap();
        let a = ladder(&s, 0).unwrap();
        assert_eq!(a.matrix()[(0, 1)], C64::new(1.0, 0.0));
        assert_eq!(a.matrix().iter().filter(|z| z.norm() > 0.0).count(), 1);
    }

    #[test]
    fn ladder_three_level() {
        let s = ModeSpace::from_dims(&[3]).unwrap();
        let a = ladder(&s, 0).unwrap();
        assert!((a.matrix()[(0, 1)].re - 1.0).abs() < 1e-15);
        assert!((a.matrix()[(1, 2)].re - 2f64.sqrt()).abs() < 1e-15);
        assert_eq!(a.matrix().iter().filter(|z| z.norm() > 0.0).count(), 2);
    }

    #[test]
    fn ladder_embedding_matches_kronecker() {
        let s = ModeSpace::from_dims(&[2, 3]).unwrap();
        let a = ladder(&s, 1).unwrap();
        let oracle = kron(&CMatrix::identity(2, 2), &single_ladder(3));
        assert_eq!(a.matrix(), &oracle);
        let a0 = ladder(&s, 0).unwrap();
        let oracle0 = kron(&single_ladder(2), &CMatrix::identity(3, 3));
        assert_eq!(a0.matrix(), &oracle0);
    }

    #[test]
    fn ladder_rejects_bad_index() {
        let s = ModeSpace::from_dims(&[2, 3]).unwrap();
        assert!(matches!(ladder(&s, 2), Err(Error::ModeIndex { .. })));
        assert!(number_op(&s, 5).is_err());
    }

    #[test]
    fn number_operator_diagonals() {
        let s = ModeSpace::from_dims(&[4]).unwrap();
        let n = number_op(&s, 0).unwrap();
        for i in 0..4 {
            assert_eq!(n.matrix()[(i, i)].re, i as f64);
        }
        let s2 = ModeSpace::from_dims(&[2, 2]).unwrap();
        let n0 = number_op(&s2, 0).unwrap();
        let d: Vec<f64> = (0..4).map(|i| n0.matrix()[(i, i)].re).collect();
        assert_eq!(d, vec![0.0, 0.0, 1.0, 1.0]);
    }

    #[test]
    fn number_is_adag_a() {
        let s = ModeSpace::from_dims(&[5]).unwrap();
        let a = ladder(&s, 0).unwrap();
        let n = &a.adjoint() * &a;
        let diff = &n - &number_op(&s, 0).unwrap();
        assert!(diff.max_abs() < 1e-14);
    }

    #[test]
    fn pi_rotation_flips() {
        let s = ModeSpace::from_dims(&[2]).unwrap();
        let r = qubit_rotation(&s, 0, std::f64::consts::PI, 0.0).unwrap();
        assert!((r.matrix()[(1, 0)].norm() - 1.0).abs() < 1e-15);
        let u = &r * &r.adjoint();
        assert!((&u - &Operator::identity(&s).unwrap()).max_abs() < 1e-15);
    }
}
