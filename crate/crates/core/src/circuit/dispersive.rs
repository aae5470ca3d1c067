use serde::Serialize;

use crate::error::{Error, Result};
use crate::quantum::{creation, ladder, number_op, ModeSpace, Operator, MAX_DENSE_DIM};

/// One bosonic or qubit mode. Frequencies are angular (rad/s), times in s.
///
/// `t1 = None` means no relaxation channel is defined; `Some(f64::INFINITY)`
/// is an explicit zero rate.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ModeSpec {
    pub label: String,
    pub omega: f64,
    pub anharmonicity: f64,
    pub t1: Option<f64>,
    /// Ramsey dephasing time.
    pub t2: Option<f64>,
    /// Hahn-echo dephasing time; echo simulations fall back to `t2`.
    pub t2_echo: Option<f64>,
    pub n_thermal: f64,
    pub dim: usize,
}

impl ModeSpec {
    pub fn new(label: impl Into<String>, omega: f64, dim: usize) -> Self {
        Self { label: label.into(), omega, anharmonicity: 0.0, t1: None, t2: None, t2_echo: None, n_thermal: 0.0, dim }
    }

    pub fn with_anharmonicity(mut self, alpha: f64) -> Self {
        self.anharmonicity = alpha;
        self
    }

    pub fn with_t1(mut self, t1: f64) -> Self {
        self.t1 = Some(t1);
        self
    }

    pub fn with_t2(mut self, t2: f64) -> Self {
        self.t2 = Some(t2);
        self
    }

    pub fn with_t2_echo(mut self, t2e: f64) -> Self {
        self.t2_echo = Some(t2e);
        self
    }

    pub fn with_thermal(mut self, n_th: f64) -> Self {
        self.n_thermal = n_th;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.dim < 2 {
            return Err(Error::InvalidParameter(format!("mode {}: dim {} < 2", self.label, self.dim)));
        }
        if !self.omega.is_finite() || !self.anharmonicity.is_finite() {
            return Err(Error::InvalidParameter(format!("mode {}: non-finite frequency", self.label)));
        }
        if !(self.n_thermal >= 0.0 && self.n_thermal.is_finite()) {
            return Err(Error::InvalidParameter(format!("mode {}: n_thermal must be >= 0", self.label)));
        }
        for (name, t) in [("T1", self.t1), ("T2", self.t2), ("T2echo", self.t2_echo)] {
            if let Some(t) = t {
                if !(t > 0.0) {
                    return Err(Error::InvalidParameter(format!("mode {}: {name} must be > 0", self.label)));
                }
            }
        }
        if let Some(t1) = self.t1 {
            for t2 in [self.t2, self.t2_echo].into_iter().flatten() {
                if t2 > 2.0 * t1 {
                    return Err(Error::DephasingBound { t2, limit: 2.0 * t1 });
                }
            }
        }
        Ok(())
    }
}

/// Modes plus the symmetric cross-Kerr matrix `chi` (rad/s, zero diagonal).
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DispersiveSystem {
    modes: Vec<ModeSpec>,
    chi: Vec<Vec<f64>>,
}

impl DispersiveSystem {
    pub fn new(modes: Vec<ModeSpec>) -> Result<Self> {
        for m in &modes {
            m.validate()?;
        }
        ModeSpace::new(modes.iter().map(|m| m.dim).collect(), modes.iter().map(|m| m.label.clone()).collect())?;
        let n = modes.len();
        Ok(Self { modes, chi: vec![vec![0.0; n]; n] })
    }

    /// Sets `chi_ij = chi_ji`. Self-pairs are rejected.
    pub fn set_chi(&mut self, i: usize, j: usize, chi: f64) -> Result<()> {
        let n = self.modes.len();
        if i >= n || j >= n {
            return Err(Error::ModeIndex { index: i.max(j), modes: n });
        }
        if i == j {
            return Err(Error::InvalidParameter("cross-Kerr diagonal must stay zero".into()));
        }
        if !chi.is_finite() {
            return Err(Error::InvalidParameter("cross-Kerr must be finite".into()));
        }
        self.chi[i][j] = chi;
        self.chi[j][i] = chi;
        Ok(())
    }

    pub fn with_chi(mut self, a: &str, b: &str, chi: f64) -> Result<Self> {
        let i = self.require(a)?;
        let j = self.require(b)?;
        self.set_chi(i, j, chi)?;
        Ok(self)
    }

    pub fn modes(&self) -> &[ModeSpec] {
        &self.modes
    }

    pub fn mode(&self, i: usize) -> Result<&ModeSpec> {
        self.modes.get(i).ok_or(Error::ModeIndex { index: i, modes: self.modes.len() })
    }

    pub fn chi(&self, i: usize, j: usize) -> f64 {
        self.chi[i][j]
    }

    pub fn chi_matrix(&self) -> &[Vec<f64>] {
        &self.chi
    }

    pub fn index_of(&self, label: &str) -> Option<usize> {
        self.modes.iter().position(|m| m.label == label)
    }

    pub fn require(&self, label: &str) -> Result<usize> {
        self.index_of(label).ok_or_else(|| Error::MissingParameter(format!("mode {label:?}")))
    }

    pub fn space(&self) -> ModeSpace {
        ModeSpace::new(self.modes.iter().map(|m| m.dim).collect(), self.modes.iter().map(|m| m.label.clone()).collect())
            .expect("validated on construction")
    }

    /// Restriction to the listed modes (in that order), keeping their
    /// pairwise cross-Kerr terms.
    pub fn subsystem(&self, indices: &[usize]) -> Result<Self> {
        let modes = indices.iter().map(|&i| self.mode(i).cloned()).collect::<Result<Vec<_>>>()?;
        let mut sub = Self::new(modes)?;
        for (a, &i) in indices.iter().enumerate() {
            for (b, &j) in indices.iter().enumerate() {
                if a != b {
                    sub.chi[a][b] = self.chi[i][j];
                }
            }
        }
        Ok(sub)
    }

    /// Same system with mode `i` truncated to `dim`.
    pub fn with_dim(&self, i: usize, dim: usize) -> Result<Self> {
        let mut out = self.clone();
        out.modes.get_mut(i).ok_or(Error::ModeIndex { index: i, modes: self.modes.len() })?.dim = dim;
        out.modes[i].validate()?;
        Ok(out)
    }

    /// Same system with mode `i` edited by `f` and re-validated.
    pub fn with_mode(&self, i: usize, f: impl FnOnce(&mut ModeSpec)) -> Result<Self> {
        let mut out = self.clone();
        let m = out.modes.get_mut(i).ok_or(Error::ModeIndex { index: i, modes: self.modes.len() })?;
        f(m);
        m.validate()?;
        Ok(out)
    }

    /// Frame offsets equal to every mode's own frequency.
    pub fn mode_frame(&self) -> Vec<f64> {
        self.modes.iter().map(|m| m.omega).collect()
    }

    /// Collapse channels for every mode: relaxation `sqrt((1+n_th)/T1) a`,
    /// thermal excitation `sqrt(n_th/T1) a^dag` and pure dephasing
    /// `sqrt(2/T_phi) a^dag a`, with `T_phi` from T1 and the Ramsey (or, when
    /// `echo`, the echo) T2.
    pub fn collapse_operators(&self, echo: bool) -> Result<Vec<(Operator, f64)>> {
        let space = self.space();
        let mut out = Vec::new();
        for (i, m) in self.modes.iter().enumerate() {
            let Some(t1) = m.t1 else { continue };
            let gamma = 1.0 / t1;
            if gamma > 0.0 {
                out.push((ladder(&space, i)?, gamma * (1.0 + m.n_thermal)));
                if m.n_thermal > 0.0 {
                    out.push((creation(&space, i)?, gamma * m.n_thermal));
                }
            }
            let t2 = if echo { m.t2_echo.or(m.t2) } else { m.t2 };
            if let Some(t2) = t2 {
                if let Some(t_phi) = dephasing_time_from_t1_t2(t1, t2)? {
                    out.push((number_op(&space, i)?, 2.0 / t_phi));
                }
            }
        }
        Ok(out)
    }
}

/// Dispersive Hamiltonian over hbar, rad/s:
///
/// `sum_i (w_i - f_i) n_i - sum_{i<j} chi_ij n_i n_j - sum_i alpha_i/2 a_i^dag^2 a_i^2`
///
/// where `f_i` are the rotating-frame offsets. Each unordered pair enters
/// once, so the shift of mode `i` per excitation of mode `j` is `-chi_ij`.
pub fn build_hamiltonian(sys: &DispersiveSystem, frame_offsets: &[f64]) -> Result<Operator> {
    let space = sys.space();
    let n = space.total_dim();
    if n > MAX_DENSE_DIM {
        return Err(Error::DimensionOverflow(n));
    }
    let k = sys.modes.len();
    if frame_offsets.len() != k {
        return Err(Error::DimensionMismatch { expected: k, actual: frame_offsets.len() });
    }
    let diag: Vec<f64> = (0..n)
        .map(|idx| {
            let levels = space.levels(idx);
            let mut e = 0.0;
            for (i, m) in sys.modes.iter().enumerate() {
                let ni = levels[i] as f64;
                e += (m.omega - frame_offsets[i]) * ni;
                e -= m.anharmonicity / 2.0 * ni * (ni - 1.0);
                for (chi, &nj) in sys.chi[i].iter().zip(levels.iter()).skip(i + 1) {
                    e -= chi * ni * nj as f64;
                }
            }
            e
        })
        .collect();
    Operator::from_diagonal(&space, &diag)
}

/// Coupling from a measured dispersive shift, `g = sqrt(|chi * delta|)`.
pub fn g_from_chi(chi: f64, delta: f64) -> Result<f64> {
    if delta == 0.0 || !delta.is_finite() {
        return Err(Error::InvalidParameter("detuning must be non-zero".into()));
    }
    Ok((chi * delta).abs().sqrt())
}

/// Two-level dispersive shift `chi = g^2 / delta`.
///
/// Logs a warning when `|g / delta| > 0.1` (outside the dispersive regime).
pub fn chi_from_g(g: f64, delta: f64) -> Result<f64> {
    if delta == 0.0 || !delta.is_finite() {
        return Err(Error::InvalidParameter("detuning must be non-zero".into()));
    }
    if (g / delta).abs() > 0.1 {
        log::warn!("|g/delta| = {:.3} > 0.1: outside the dispersive regime", (g / delta).abs());
    }
    Ok(g * g / delta)
}

/// Transmon-corrected dispersive shift `g^2 alpha / (delta (delta + alpha))`,
/// which reduces to [`chi_from_g`] when `|alpha| >> |delta|`.
pub fn chi_from_g_transmon(g: f64, delta: f64, alpha: f64) -> Result<f64> {
    if delta == 0.0 || delta + alpha == 0.0 {
        return Err(Error::InvalidParameter("straddling-regime pole: delta or delta + alpha is zero".into()));
    }
    Ok(g * g * alpha / (delta * (delta + alpha)))
}

/// Cavity self-Kerr `chi_q^2 / (4 alpha_q)`.
pub fn cavity_self_kerr(chi_q: f64, alpha_q: f64) -> Result<f64> {
    if alpha_q == 0.0 {
        return Err(Error::InvalidParameter("qubit anharmonicity must be non-zero".into()));
    }
    Ok(chi_q * chi_q / (4.0 * alpha_q))
}

/// Pure-dephasing time from `1/T2 = 1/(2 T1) + 1/T_phi`. `None` when
/// `T2 = 2 T1` (no pure dephasing).
pub fn dephasing_time_from_t1_t2(t1: f64, t2: f64) -> Result<Option<f64>> {
    if !(t1 > 0.0 && t2 > 0.0) {
        return Err(Error::InvalidParameter("T1 and T2 must be > 0".into()));
    }
    if t2 > 2.0 * t1 * (1.0 + 1e-12) {
        return Err(Error::DephasingBound { t2, limit: 2.0 * t1 });
    }
    let rate = 1.0 / t2 - 1.0 / (2.0 * t1);
    if rate <= 1e-12 / t2 {
        Ok(None)
    } else {
        Ok(Some(1.0 / rate))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::units::hz_to_angular;

    fn mhz(x: f64) -> f64 {
        hz_to_angular(x * 1e6)
    }

    #[test]
    fn rotating_frame_identity() {
        let sys = DispersiveSystem::new(vec![ModeSpec::new("c", mhz(9377.2), 5)]).unwrap();
        let h = build_hamiltonian(&sys, &sys.mode_frame()).unwrap();
        assert_eq!(h.max_abs(), 0.0);
    }

    #[test]
    fn qubit_cavity_diagonal_oracle() {
        let chi = mhz(-1.17);
        let sys = DispersiveSystem::new(vec![ModeSpec::new("q", mhz(7351.4), 2), ModeSpec::new("s", mhz(9377.2), 3)])
            .unwrap()
            .with_chi("q", "s", chi)
            .unwrap();
        let h = build_hamiltonian(&sys, &sys.mode_frame()).unwrap();
        assert!(h.off_diagonal_max() < 1e-12);
        // explicit 6x6 oracle: |q, n> -> -chi q n
        for q in 0..2 {
            for n in 0..3 {
                let idx = q * 3 + n;
                let oracle = -chi * (q * n) as f64;
                assert!((h.matrix()[(idx, idx)].re - oracle).abs() < 1e-6);
            }
        }
        // |e, n> sits at +2 pi 1.17 MHz n
        assert!((h.matrix()[(5, 5)].re - 2.0 * mhz(1.17)).abs() < 1e-6);
    }

    #[test]
    fn kerr_ladder() {
        let alpha = hz_to_angular(-2e3);
        let sys = DispersiveSystem::new(vec![ModeSpec::new("c", 0.0, 4).with_anharmonicity(alpha)]).unwrap();
        let h = build_hamiltonian(&sys, &[0.0]).unwrap();
        for n in 0..4 {
            let nf = n as f64;
            assert!((h.matrix()[(n, n)].re + alpha / 2.0 * nf * (nf - 1.0)).abs() < 1e-9);
        }
    }

    #[test]
    fn g_chi_conversions() {
        let g = g_from_chi(mhz(-1.17), mhz(-2030.0)).unwrap();
        assert!((g / mhz(48.7) - 1.0).abs() < 0.01);
        let g2 = g_from_chi(mhz(-3.84), mhz(378.0)).unwrap();
        assert!((g2 / mhz(38.1) - 1.0).abs() < 0.01);
        assert_eq!(chi_from_g(0.0, mhz(100.0)).unwrap(), 0.0);
        assert!(g_from_chi(1.0, 0.0).is_err());
        assert!(chi_from_g(1.0, 0.0).is_err());
        // round trip when chi and delta share a sign
        let chi = mhz(-1.17);
        let delta = mhz(-2030.0);
        let back = chi_from_g(g_from_chi(chi, delta).unwrap(), delta).unwrap();
        assert!((back - chi).abs() < 1e-9 * chi.abs());
    }

    #[test]
    fn transmon_correction_limit() {
        let g = mhz(50.0);
        let delta = mhz(-2000.0);
        let two_level = chi_from_g(g, delta).unwrap();
        let corrected = chi_from_g_transmon(g, delta, mhz(-1e9)).unwrap();
        assert!((corrected / two_level - 1.0).abs() < 1e-5);
    }

    #[test]
    fn self_kerr_values() {
        let k = cavity_self_kerr(mhz(-1.17), mhz(-209.8)).unwrap();
        assert!((k / hz_to_angular(-1.631e3) - 1.0).abs() < 1e-3, "{}", k / mhz(1.0));
        assert!((k / mhz(1.0) * 1e3).round() / 1e3 == -0.002);
        let k2 = cavity_self_kerr(mhz(-3.22), mhz(-204.3)).unwrap();
        assert!((k2 / hz_to_angular(-12.69e3) - 1.0).abs() < 1e-3);
        assert_eq!(cavity_self_kerr(0.0, mhz(-200.0)).unwrap(), 0.0);
        assert!(cavity_self_kerr(1.0, 0.0).is_err());
    }

    #[test]
    fn dephasing_values() {
        let tphi = dephasing_time_from_t1_t2(6.4e-6, 11.7e-6).unwrap().unwrap();
        assert!((tphi - 136.1e-6).abs() < 0.5e-6, "{tphi}");
        assert_eq!(dephasing_time_from_t1_t2(6.4e-6, 12.8e-6).unwrap(), None);
        let t = dephasing_time_from_t1_t2(5e-6, 5e-6).unwrap().unwrap();
        assert!((t - 10e-6).abs() < 1e-15);
        assert!(matches!(dephasing_time_from_t1_t2(5e-6, 11e-6), Err(Error::DephasingBound { .. })));
    }

    #[test]
    fn system_invariants() {
        let bad = ModeSpec::new("q", 1.0, 2).with_t1(1e-6).with_t2(3e-6);
        assert!(DispersiveSystem::new(vec![bad]).is_err());
        let mut sys = DispersiveSystem::new(vec![ModeSpec::new("a", 1.0, 2), ModeSpec::new("b", 1.0, 2)]).unwrap();
        assert!(sys.set_chi(0, 0, 1.0).is_err());
        sys.set_chi(0, 1, -3.0).unwrap();
        assert_eq!(sys.chi(1, 0), -3.0);
        assert!(DispersiveSystem::new(vec![ModeSpec::new("a", 1.0, 2), ModeSpec::new("a", 1.0, 2)]).is_err());
    }

    #[test]
    fn dimension_overflow() {
        let modes = (0..4).map(|i| ModeSpec::new(format!("m{i}"), 1.0, 10)).collect();
        let sys = DispersiveSystem::new(modes).unwrap();
        assert!(matches!(build_hamiltonian(&sys, &[0.0; 4]), Err(Error::DimensionOverflow(_))));
    }
}
