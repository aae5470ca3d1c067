//! Seam-loss accounting: seam admittance and conductance, lifetime limits,
//! analytic TE101 admittance, conductance regression and Purcell estimates.
//!
//! A seam of conductance per length `g` presented with admittance per length
//! `y` by a mode of frequency `w` limits that mode to `Q = g / y` and
//! `T1 = g / (y w)`. Fields are peak amplitudes throughout.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::fitting;
use crate::units::{MU_0, SPEED_OF_LIGHT};

/// One seam: label, admittance per length for each mode (1/(Ω·m)) and
/// conductance per length (1/(Ω·m)). Inactive seams are reported but left
/// out of the combined totals.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SeamSpec {
    pub label: String,
    pub y: BTreeMap<String, f64>,
    pub g: f64,
    pub active: bool,
}

impl SeamSpec {
    pub fn new(label: impl Into<String>, g: f64, y: impl IntoIterator<Item = (String, f64)>) -> Result<Self> {
        let s = Self { label: label.into(), y: y.into_iter().collect(), g, active: true };
        s.validate()?;
        Ok(s)
    }

    pub fn inactive(mut self) -> Self {
        self.active = false;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.g > 0.0 && self.g.is_finite()) {
            return Err(Error::InvalidParameter(format!("seam {}: g must be > 0", self.label)));
        }
        for (mode, &y) in &self.y {
            if !(y >= 0.0 && y.is_finite()) {
                return Err(Error::InvalidParameter(format!("seam {}: y[{mode}] must be >= 0", self.label)));
            }
        }
        Ok(())
    }
}

/// Internal quality factor `g / y` set by a seam alone.
pub fn q_from_seam(y: f64, g: f64) -> Result<f64> {
    if !(g > 0.0) || y < 0.0 {
        return Err(Error::InvalidParameter(format!("need g > 0 and y >= 0 (g = {g}, y = {y})")));
    }
    if y == 0.0 {
        return Err(Error::Unbounded("seam-limited Q (zero admittance)".into()));
    }
    Ok(g / y)
}

/// Lifetime limit `g / (y w)`, seconds.
pub fn t1_limit_from_seam(y: f64, g: f64, omega: f64) -> Result<f64> {
    if !(omega > 0.0) {
        return Err(Error::InvalidParameter(format!("omega must be > 0, got {omega}")));
    }
    Ok(q_from_seam(y, g)? / omega)
}

/// Rectangular box resonator: `a` (x) and `d` (z) lateral extents and
/// height `b`, metres.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct RectangularCavity {
    pub a: f64,
    pub d: f64,
    pub b: f64,
}

impl RectangularCavity {
    pub fn new(a: f64, d: f64, b: f64) -> Result<Self> {
        if !(a > 0.0 && d > 0.0 && b > 0.0) {
            return Err(Error::InvalidParameter("cavity dimensions must be > 0".into()));
        }
        Ok(Self { a, d, b })
    }

    /// `f_TE101 = (c/2) sqrt(1/a^2 + 1/d^2)`, Hz.
    pub fn te101_frequency(&self) -> f64 {
        SPEED_OF_LIGHT / 2.0 * (1.0 / (self.a * self.a) + 1.0 / (self.d * self.d)).sqrt()
    }

    pub fn te101_omega(&self) -> f64 {
        2.0 * PI * self.te101_frequency()
    }
}

/// Seam admittance of the TE101 mode for a seam running around the lid
/// perimeter, at the mode's own frequency.
pub fn te101_seam_admittance(cav: &RectangularCavity) -> f64 {
    te101_seam_admittance_at(cav, cav.te101_omega())
}

/// Closed form `4 (a^3 + d^3) / (w mu0 b a d (a^2 + d^2))`.
pub fn te101_seam_admittance_at(cav: &RectangularCavity, omega: f64) -> f64 {
    let RectangularCavity { a, d, b } = *cav;
    4.0 * (a.powi(3) + d.powi(3)) / (omega * MU_0 * b * a * d * (a * a + d * d))
}

type Vec3 = [f64; 3];

fn cross(u: Vec3, v: Vec3) -> Vec3 {
    [u[1] * v[2] - u[2] * v[1], u[2] * v[0] - u[0] * v[2], u[0] * v[1] - u[1] * v[0]]
}

fn norm_sqr(u: Vec3) -> f64 {
    u.iter().map(|c| c * c).sum()
}

/// Gauss–Legendre nodes and weights on [-1, 1].
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            let pn = if n == 0 {
                1.0
            } else if n == 1 {
                x
            } else {
                p1
            };
            let pnm1 = if n == 1 { 1.0 } else { p0 };
            dp = n as f64 * (x * pn - pnm1) / (x * x - 1.0);
            let dx = pn / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    (nodes, weights)
}

fn integrate_1d(lo: f64, hi: f64, rule: &(Vec<f64>, Vec<f64>), f: impl Fn(f64) -> f64) -> f64 {
    let half = (hi - lo) / 2.0;
    let mid = (hi + lo) / 2.0;
    rule.0.iter().zip(&rule.1).map(|(&x, &w)| w * f(mid + half * x)).sum::<f64>() * half
}

/// Direct quadrature of the seam-admittance integrals
/// `int |J_s x l|^2 dl / (w mu0 int |H|^2 dV)` with the TE101 fields, for the
/// same lid-perimeter seam as [`te101_seam_admittance_at`].
pub fn te101_seam_admittance_quadrature(cav: &RectangularCavity, omega: f64, nodes: usize) -> f64 {
    let RectangularCavity { a, d, b } = *cav;
    let e0 = 1.0;
    // E = y_hat E0 sin(pi x/a) sin(pi z/d); H = curl E / (-i w mu0), magnitudes.
    let h_field = |x: f64, z: f64| -> Vec3 {
        let k = e0 / (omega * MU_0);
        [
            -k * PI / d * (PI * x / a).sin() * (PI * z / d).cos(),
            0.0,
            k * PI / a * (PI * x / a).cos() * (PI * z / d).sin(),
        ]
    };
    let rule = gauss_legendre(nodes);

    let energy = integrate_1d(0.0, b, &rule, |_y| {
        integrate_1d(0.0, a, &rule, |x| integrate_1d(0.0, d, &rule, |z| norm_sqr(h_field(x, z))))
    });

    // Lid at y = b, inward normal -y. The seam runs along the four edges.
    let normal: Vec3 = [0.0, -1.0, 0.0];
    let current = |x: f64, z: f64| cross(normal, h_field(x, z));
    let along_z: Vec3 = [0.0, 0.0, 1.0];
    let along_x: Vec3 = [1.0, 0.0, 0.0];
    let edges = [
        integrate_1d(0.0, d, &rule, |z| norm_sqr(cross(current(0.0, z), along_z))),
        integrate_1d(0.0, d, &rule, |z| norm_sqr(cross(current(a, z), along_z))),
        integrate_1d(0.0, a, &rule, |x| norm_sqr(cross(current(x, 0.0), along_x))),
        integrate_1d(0.0, a, &rule, |x| norm_sqr(cross(current(x, d), along_x))),
    ];
    edges.iter().sum::<f64>() / (omega * MU_0 * energy)
}

/// Measured `(y_seam, Q_internal)` pairs.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct QMeasurementSet {
    samples: Vec<(f64, f64)>,
}

impl QMeasurementSet {
    pub fn new(samples: Vec<(f64, f64)>) -> Result<Self> {
        if samples.len() < 2 {
            return Err(Error::InvalidParameter(format!("need at least 2 samples, got {}", samples.len())));
        }
        if let Some(&(y, q)) = samples.iter().find(|&&(y, q)| !(y > 0.0 && q > 0.0 && y.is_finite() && q.is_finite())) {
            return Err(Error::InvalidParameter(format!("non-positive sample (y = {y}, Q = {q})")));
        }
        Ok(Self { samples })
    }

    pub fn samples(&self) -> &[(f64, f64)] {
        &self.samples
    }

    pub fn scaled_q(&self, c: f64) -> Result<Self> {
        Self::new(self.samples.iter().map(|&(y, q)| (y, q * c)).collect())
    }
}

/// Seam conductance from a unit-slope log-log fit, with the 1-sigma interval
/// `g exp(-/+ sigma_log)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SeamConductanceFit {
    pub g_seam: f64,
    pub lower: f64,
    pub upper: f64,
    pub sigma_log: f64,
}

pub fn fit_seam_conductance(data: &QMeasurementSet) -> Result<SeamConductanceFit> {
    let fit = fitting::fit_loglog_intercept(data)?;
    Ok(SeamConductanceFit {
        g_seam: fit.value("g_seam").expect("loglog fit reports g_seam"),
        lower: fit.diagnostics["g_lower"],
        upper: fit.diagnostics["g_upper"],
        sigma_log: fit.diagnostics["sigma_log"],
    })
}

/// Single-mode Purcell estimate `(delta/g)^2 / kappa`, seconds.
pub fn purcell_t1_estimate(g: f64, delta: f64, kappa: f64) -> Result<f64> {
    if kappa < 0.0 || g < 0.0 {
        return Err(Error::InvalidParameter("g and kappa must be >= 0".into()));
    }
    if kappa == 0.0 || g == 0.0 {
        return Err(Error::Unbounded("Purcell-limited T1".into()));
    }
    if delta.abs() < 10.0 * g {
        log::warn!("|delta| = {:.3e} is not >> g = {:.3e}; Purcell estimate unreliable", delta.abs(), g);
    }
    Ok((delta / g).powi(2) / kappa)
}

/// Parallel loss channels: `1/T = sum_i 1/T_i`.
pub fn combine_t1_budget(limits: &[f64]) -> Result<f64> {
    if limits.is_empty() {
        return Err(Error::InvalidParameter("no lifetime limits to combine".into()));
    }
    if let Some(t) = limits.iter().find(|&&t| !(t > 0.0)) {
        return Err(Error::InvalidParameter(format!("lifetime limit {t} must be > 0")));
    }
    Ok(1.0 / limits.iter().map(|t| 1.0 / t).sum::<f64>())
}

/// An extra loss channel for one mode (e.g. Purcell decay).
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ExtraChannel {
    pub label: String,
    pub mode: String,
    pub t1_limit: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SeamReport {
    pub label: String,
    pub active: bool,
    pub g: f64,
    pub y: BTreeMap<String, f64>,
    /// Seconds; `None` when the admittance is zero.
    pub t1_limit: BTreeMap<String, Option<f64>>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BudgetReport {
    /// Mode frequencies used, Hz.
    pub frequencies_hz: BTreeMap<String, f64>,
    pub seams: Vec<SeamReport>,
    pub extra_channels: Vec<ExtraChannel>,
    /// Combined limit per mode over active seams and extra channels, seconds.
    pub combined_t1: BTreeMap<String, f64>,
}

/// Builds the per-seam and combined lifetime budget. `omegas` maps mode
/// label to angular frequency.
pub fn budget_report(
    seams: &[SeamSpec],
    omegas: &BTreeMap<String, f64>,
    extra: &[ExtraChannel],
) -> Result<BudgetReport> {
    let mut reports = Vec::with_capacity(seams.len());
    let mut channels: BTreeMap<String, Vec<f64>> = BTreeMap::new();
    for seam in seams {
        seam.validate()?;
        let mut t1 = BTreeMap::new();
        for (mode, &y) in &seam.y {
            let omega = *omegas
                .get(mode)
                .ok_or_else(|| Error::MissingParameter(format!("frequency for mode {mode:?} (seam {})", seam.label)))?;
            let limit = match t1_limit_from_seam(y, seam.g, omega) {
                Ok(t) => Some(t),
                Err(Error::Unbounded(_)) => None,
                Err(e) => return Err(e),
            };
            if seam.active {
                if let Some(t) = limit {
                    channels.entry(mode.clone()).or_default().push(t);
                }
            }
            t1.insert(mode.clone(), limit);
        }
        reports.push(SeamReport {
            label: seam.label.clone(),
            active: seam.active,
            g: seam.g,
            y: seam.y.clone(),
            t1_limit: t1,
        });
    }
    for ch in extra {
        channels.entry(ch.mode.clone()).or_default().push(ch.t1_limit);
    }
    let combined_t1 =
        channels.into_iter().map(|(mode, limits)| Ok((mode, combine_t1_budget(&limits)?))).collect::<Result<_>>()?;
    Ok(BudgetReport {
        frequencies_hz: omegas.iter().map(|(k, w)| (k.clone(), w / (2.0 * PI))).collect(),
        seams: reports,
        extra_channels: extra.to_vec(),
        combined_t1,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::units::hz_to_angular;
    use proptest::prelude::*;

    #[test]
    fn q_values() {
        assert_eq!(q_from_seam(16.0, 1e8).unwrap(), 6.25e6);
        assert_eq!(q_from_seam(3.0, 3.0).unwrap(), 1.0);
        assert_eq!(q_from_seam(2.0, 8.0).unwrap() * 2.0, q_from_seam(2.0, 16.0).unwrap());
        assert!(matches!(q_from_seam(0.0, 1e8), Err(Error::Unbounded(_))));
    }

    #[test]
    fn t1_limits_from_table_rows() {
        let t = t1_limit_from_seam(15.96, 1e8, hz_to_angular(9.25e9)).unwrap();
        assert_eq!((t * 1e6).round(), 108.0);
        let tq = t1_limit_from_seam(0.524, 4.2e5, hz_to_angular(7.3e9)).unwrap();
        assert!((tq * 1e6 - 17.5).abs() < 0.05);
        let ts = t1_limit_from_seam(0.172, 4.2e5, hz_to_angular(9.25e9)).unwrap();
        assert_eq!((ts * 1e6).round(), 42.0);
    }

    #[test]
    fn circle_r175_storage_cell_uses_qubit_frequency() {
        // y = 0.161 at 9.25 GHz gives 44.9 us; the tabulated 57 us is what
        // the qubit frequency (7.3 GHz) produces.
        let storage = t1_limit_from_seam(0.161, 4.2e5, hz_to_angular(9.25e9)).unwrap() * 1e6;
        assert!((storage - 44.9).abs() < 0.05, "{storage}");
        let at_qubit = t1_limit_from_seam(0.161, 4.2e5, hz_to_angular(7.3e9)).unwrap() * 1e6;
        assert_eq!(at_qubit.round(), 57.0);
    }

    #[test]
    fn te101_symmetric_reduction() {
        let cav = RectangularCavity::new(0.02, 0.02, 3e-4).unwrap();
        let w = cav.te101_omega();
        let y = te101_seam_admittance_at(&cav, w);
        assert!((y - 4.0 / (w * MU_0 * 0.02 * 3e-4)).abs() < 1e-12 * y);
    }

    #[test]
    fn te101_height_scaling() {
        let a = RectangularCavity::new(0.022, 0.024, 3e-4).unwrap();
        let b = RectangularCavity::new(0.022, 0.024, 6e-4).unwrap();
        let w = hz_to_angular(9.25e9);
        assert!((te101_seam_admittance_at(&a, w) / te101_seam_admittance_at(&b, w) - 2.0).abs() < 1e-12);
    }

    #[test]
    fn te101_quadrature_agrees() {
        for (a, d, b) in [(0.022, 0.024, 3e-4), (0.01, 0.03, 1e-3), (0.02, 0.02, 5e-4)] {
            let cav = RectangularCavity::new(a, d, b).unwrap();
            let w = cav.te101_omega();
            let closed = te101_seam_admittance_at(&cav, w);
            let quad = te101_seam_admittance_quadrature(&cav, w, 48);
            assert!((closed / quad - 1.0).abs() < 1e-6, "{closed} vs {quad}");
        }
    }

    #[test]
    fn reference_cavity_frequency() {
        let cav = RectangularCavity::new(0.022, 0.024, 3e-4).unwrap();
        assert!((cav.te101_frequency() - 9.244e9).abs() < 5e6);
    }

    #[test]
    fn gauss_legendre_exact_for_polynomials() {
        let rule = gauss_legendre(5);
        // exact through degree 9
        let v = integrate_1d(0.0, 2.0, &rule, |x| x.powi(9));
        assert!((v - 2f64.powi(10) / 10.0).abs() < 1e-11);
        assert!((rule.1.iter().sum::<f64>() - 2.0).abs() < 1e-14);
    }

    #[test]
    fn purcell_values() {
        let t = purcell_t1_estimate(hz_to_angular(38e6), hz_to_angular(378e6), 1.0 / 1.0e-6).unwrap();
        assert!((t * 1e6 - 98.95).abs() < 0.1, "{}", t * 1e6);
        let t2 = purcell_t1_estimate(hz_to_angular(38e6), hz_to_angular(756e6), 1e6).unwrap();
        assert!((t2 / t - 4.0).abs() < 1e-12);
        assert!(matches!(purcell_t1_estimate(1.0, 100.0, 0.0), Err(Error::Unbounded(_))));
    }

    #[test]
    fn combine_values() {
        assert!((combine_t1_budget(&[100e-6]).unwrap() - 100e-6).abs() < 1e-18);
        assert!((combine_t1_budget(&[100e-6, 100e-6]).unwrap() - 50e-6).abs() < 1e-18);
        let t = combine_t1_budget(&[100e-6, 40e-6]).unwrap();
        assert!((t * 1e6 - 28.571).abs() < 1e-3);
        assert!(t < 34.3e-6);
        assert!(combine_t1_budget(&[]).is_err());
        assert!(combine_t1_budget(&[1.0, 0.0]).is_err());
    }

    #[test]
    fn report_single_seam_equals_its_limit() {
        let seam = SeamSpec::new("In/In", 1e8, [("storage".to_string(), 15.96)]).unwrap();
        let omegas = BTreeMap::from([("storage".to_string(), hz_to_angular(9.25e9))]);
        let r = budget_report(&[seam], &omegas, &[]).unwrap();
        let lim = r.seams[0].t1_limit["storage"].unwrap();
        assert_eq!(r.combined_t1["storage"], combine_t1_budget(&[lim]).unwrap());
    }

    #[test]
    fn report_skips_inactive_and_zero_admittance() {
        let a = SeamSpec::new("a", 1e8, [("q".to_string(), 0.0)]).unwrap();
        let b = SeamSpec::new("b", 1e5, [("q".to_string(), 1.0)]).unwrap().inactive();
        let c = SeamSpec::new("c", 1e5, [("q".to_string(), 2.0)]).unwrap();
        let omegas = BTreeMap::from([("q".to_string(), 1e10)]);
        let r = budget_report(&[a, b, c], &omegas, &[]).unwrap();
        assert_eq!(r.seams[0].t1_limit["q"], None);
        assert!((r.combined_t1["q"] - 1e5 / 2.0 / 1e10).abs() < 1e-18);
        let missing = SeamSpec::new("d", 1.0, [("x".to_string(), 1.0)]).unwrap();
        assert!(budget_report(&[missing], &omegas, &[]).is_err());
    }

    #[test]
    fn measurement_set_validation() {
        assert!(QMeasurementSet::new(vec![(1.0, 1.0)]).is_err());
        assert!(QMeasurementSet::new(vec![(1.0, 1.0), (0.0, 2.0)]).is_err());
        assert!(QMeasurementSet::new(vec![(1.0, 1.0), (2.0, -2.0)]).is_err());
    }

    proptest! {
        #[test]
        fn lifetime_times_omega_is_q(y in 1e-3f64..100.0, g in 1e3f64..1e9, w in 1e9f64..1e11) {
            let t = t1_limit_from_seam(y, g, w).unwrap();
            let q = q_from_seam(y, g).unwrap();
            prop_assert!((t * w - q).abs() <= 1e-12 * q);
        }
    }
}
