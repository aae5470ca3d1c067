//! Parameter extraction for the measurement traces.
//!
//! Nonlinear models go through [`lm::levenberg_marquardt`]. Initial guesses
//! are derived from the data so that every fitter is equivariant under a
//! rescaling of `x`: exponential rates from a log-linear regression over the
//! upper half of the excursion, fringe frequencies from the strongest bin of
//! a zero-padded discrete spectrum, Lorentzian centres from the most
//! prominent local maxima with widths from their half-prominence crossings.
//!
//! Units in [`FitParam::unit`] are written relative to the trace: `x` means
//! "same unit as the abscissa", `1/x` its inverse and `y` the ordinate.
//! [`FitResult::with_x_unit`] substitutes a concrete unit.

pub mod lm;

use std::collections::BTreeMap;
use std::f64::consts::PI;

use num_complex::Complex64;
use serde::Serialize;

use crate::budget::QMeasurementSet;
use crate::error::{Error, Result};
use lm::{levenberg_marquardt, LmOptions, LmOutcome, Model};

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FitParam {
    pub value: f64,
    pub std_err: Option<f64>,
    pub unit: String,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FitResult {
    pub model: String,
    pub params: BTreeMap<String, FitParam>,
    pub residual_rms: f64,
    pub converged: bool,
    /// MINPACK gradient cosine at the returned iterate.
    pub gradient_norm: f64,
    pub iterations: usize,
    pub flags: Vec<String>,
    pub diagnostics: BTreeMap<String, f64>,
}

impl FitResult {
    pub fn value(&self, name: &str) -> Option<f64> {
        self.params.get(name).map(|p| p.value)
    }

    pub fn has_flag(&self, flag: &str) -> bool {
        self.flags.iter().any(|f| f == flag)
    }

    pub fn with_x_unit(mut self, unit: &str) -> Self {
        for p in self.params.values_mut() {
            p.unit = match p.unit.as_str() {
                "x" => unit.to_string(),
                "1/x" if unit == "s" => "Hz".to_string(),
                "1/x" if unit == "Hz" => "s".to_string(),
                "1/x" => format!("1/{unit}"),
                other => other.to_string(),
            };
        }
        self
    }
}

/// Names accepted by [`fit_named`].
pub const MODELS: &[&str] =
    &["exponential", "poissonian_decay", "damped_fringes", "lorentzian_multiplet[:N]", "revival", "line"];

/// Dispatches on a model name. `lorentzian_multiplet:N` fixes the peak
/// count; without `:N` every local maximum above 1% of the tallest
/// prominence is fitted.
pub fn fit_named(model: &str, x: &[f64], y: &[f64]) -> Result<FitResult> {
    match model {
        "exponential" => fit_exponential(x, y),
        "poissonian_decay" => fit_poissonian_decay(x, y),
        "damped_fringes" => fit_damped_fringes(x, y),
        "revival" => fit_revival(x, y),
        "line" => fit_line(x, y),
        "lorentzian_multiplet" => {
            check_trace(x, y, 8)?;
            let peaks = find_peaks(y);
            let top = peaks.iter().map(|p| p.prominence).fold(0.0, f64::max);
            let n = peaks.iter().filter(|p| p.prominence >= 0.01 * top).count().max(1);
            fit_lorentzian_multiplet(x, y, n)
        }
        other => {
            if let Some(n) = other.strip_prefix("lorentzian_multiplet:") {
                let n: usize =
                    n.parse().map_err(|_| Error::InvalidParameter(format!("bad peak count in {other:?}")))?;
                return fit_lorentzian_multiplet(x, y, n);
            }
            Err(Error::InvalidParameter(format!("unknown model {other:?}; available: {}", MODELS.join(", "))))
        }
    }
}

fn check_trace(x: &[f64], y: &[f64], min_points: usize) -> Result<()> {
    if x.len() != y.len() {
        return Err(Error::DimensionMismatch { expected: x.len(), actual: y.len() });
    }
    if x.len() < min_points {
        return Err(Error::InvalidParameter(format!("need at least {min_points} points, got {}", x.len())));
    }
    if x.iter().chain(y).any(|v| !v.is_finite()) {
        return Err(Error::InvalidParameter("trace contains non-finite values".into()));
    }
    if x.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidGrid("x must be strictly increasing".into()));
    }
    Ok(())
}

fn span(x: &[f64]) -> f64 {
    x[x.len() - 1] - x[0]
}

fn is_constant(y: &[f64]) -> bool {
    let (lo, hi) = y.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &v| (a.min(v), b.max(v)));
    hi - lo <= 1e-12 * hi.abs().max(lo.abs()).max(1.0)
}

fn mean(v: &[f64]) -> f64 {
    v.iter().sum::<f64>() / v.len() as f64
}

/// Ordinary least-squares `(intercept, slope)`.
fn regress(x: &[f64], y: &[f64]) -> Option<(f64, f64)> {
    if x.len() < 2 {
        return None;
    }
    let (mx, my) = (mean(x), mean(y));
    let sxx: f64 = x.iter().map(|v| (v - mx).powi(2)).sum();
    if sxx == 0.0 {
        return None;
    }
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let slope = sxy / sxx;
    Some((my - slope * mx, slope))
}

fn best_of<M: Model>(m: &M, x: &[f64], y: &[f64], starts: &[Vec<f64>]) -> LmOutcome {
    let opts = LmOptions::default();
    starts
        .iter()
        .map(|p0| levenberg_marquardt(m, x, y, p0, &opts))
        .filter(|o| o.sum_sq.is_finite())
        .min_by(|a, b| a.sum_sq.total_cmp(&b.sum_sq))
        .expect("at least one start")
}

struct Assembler {
    result: FitResult,
}

impl Assembler {
    fn new(model: &str, out: &LmOutcome, n_points: usize) -> Self {
        Self {
            result: FitResult {
                model: model.to_string(),
                params: BTreeMap::new(),
                residual_rms: (out.sum_sq / n_points as f64).sqrt(),
                converged: out.converged,
                gradient_norm: out.gradient_cosine,
                iterations: out.iterations,
                flags: Vec::new(),
                diagnostics: BTreeMap::new(),
            },
        }
    }

    fn exact(model: &str) -> Self {
        Self {
            result: FitResult {
                model: model.to_string(),
                params: BTreeMap::new(),
                residual_rms: 0.0,
                converged: true,
                gradient_norm: 0.0,
                iterations: 0,
                flags: Vec::new(),
                diagnostics: BTreeMap::new(),
            },
        }
    }

    fn param(&mut self, name: &str, value: f64, std_err: Option<f64>, unit: &str) -> &mut Self {
        self.result.params.insert(name.to_string(), FitParam { value, std_err, unit: unit.to_string() });
        self
    }

    fn flag(&mut self, f: &str) -> &mut Self {
        self.result.flags.push(f.to_string());
        self
    }

    fn finish(self) -> FitResult {
        self.result
    }
}

fn std_err(out: &LmOutcome, j: usize) -> Option<f64> {
    out.variance.as_ref().map(|v| v[j].sqrt())
}

/// `1/k` with its propagated error.
fn inverse_rate(out: &LmOutcome, j: usize) -> (f64, Option<f64>) {
    let k = out.params[j];
    (1.0 / k, std_err(out, j).map(|s| s / (k * k)))
}

// ---------------------------------------------------------------------------
// Exponential

struct Exponential;

impl Model for Exponential {
    fn n_params(&self) -> usize {
        3
    }
    fn eval(&self, x: f64, p: &[f64]) -> f64 {
        p[0] * (-p[1] * x).exp() + p[2]
    }
    fn grad(&self, x: f64, p: &[f64], out: &mut [f64]) {
        let e = (-p[1] * x).exp();
        out[0] = e;
        out[1] = -p[0] * x * e;
        out[2] = 1.0;
    }
}

/// `A exp(-t/T) + offset`. A constant trace yields `A = 0`, `T = inf` and
/// the `T_unbounded` flag.
pub fn fit_exponential(x: &[f64], y: &[f64]) -> Result<FitResult> {
    check_trace(x, y, 8)?;
    if is_constant(y) {
        let mut a = Assembler::exact("exponential");
        a.param("A", 0.0, None, "y")
            .param("T", f64::INFINITY, None, "x")
            .param("offset", mean(y), None, "y")
            .flag("T_unbounded");
        return Ok(a.finish());
    }
    let s = span(x);
    let c0 = y[y.len() - 1];
    let a0 = y[0] - c0;
    let upper: Vec<(f64, f64)> = x
        .iter()
        .zip(y)
        .filter(|&(_, &v)| (v - c0).abs() >= 0.5 * a0.abs() && (v - c0) * a0 > 0.0)
        .map(|(&t, &v)| (t, (v - c0).abs().ln()))
        .collect();
    let (ts, ls): (Vec<f64>, Vec<f64>) = upper.into_iter().unzip();
    let k_reg = regress(&ts, &ls).map(|(_, m)| -m).filter(|k| *k > 0.0 && k.is_finite());
    let mut starts = Vec::new();
    for k in [k_reg.unwrap_or(2.0 / s), 0.3 / s, 3.0 / s, 10.0 / s] {
        starts.push(vec![a0 * (k * x[0]).exp(), k, c0]);
    }
    let out = best_of(&Exponential, x, y, &starts);
    let (t, t_err) = inverse_rate(&out, 1);
    let mut a = Assembler::new("exponential", &out, x.len());
    a.param("A", out.params[0], std_err(&out, 0), "y").param("T", t, t_err, "x").param(
        "offset",
        out.params[2],
        std_err(&out, 2),
        "y",
    );
    if out.params[1] <= 0.0 {
        a.flag("non_decaying");
    }
    Ok(a.finish())
}

// ---------------------------------------------------------------------------
// Poissonian decay

struct Poissonian;

impl Model for Poissonian {
    fn n_params(&self) -> usize {
        4
    }
    fn eval(&self, x: f64, p: &[f64]) -> f64 {
        p[0] * (-p[1] * (-p[2] * x).exp()).exp() + p[3]
    }
    fn grad(&self, x: f64, p: &[f64], out: &mut [f64]) {
        let e = (-p[2] * x).exp();
        let f = (-p[1] * e).exp();
        out[0] = f;
        out[1] = -p[0] * e * f;
        out[2] = p[0] * f * p[1] * x * e;
        out[3] = 1.0;
    }
}

/// `A exp(-n0 exp(-t/T1)) + offset`, the vacuum probability of a decaying
/// coherent state. A flat trace is degenerate (`n0 = 0`, flagged).
pub fn fit_poissonian_decay(x: &[f64], y: &[f64]) -> Result<FitResult> {
    check_trace(x, y, 8)?;
    if is_constant(y) {
        let mut a = Assembler::exact("poissonian_decay");
        a.param("A", mean(y), None, "y")
            .param("n0", 0.0, None, "")
            .param("T1", f64::INFINITY, None, "x")
            .param("offset", 0.0, None, "y")
            .flag("degenerate_flat");
        return Ok(a.finish());
    }
    let s = span(x);
    let top = y.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let pts: Vec<(f64, f64)> = x
        .iter()
        .zip(y)
        .filter_map(|(&t, &v)| {
            let r = v / top;
            (r > 1e-6 && r < 0.95).then(|| (t, (-r.ln()).ln()))
        })
        .collect();
    let (ts, zs): (Vec<f64>, Vec<f64>) = pts.into_iter().unzip();
    let (n_init, k_init) = match regress(&ts, &zs) {
        Some((icpt, slope)) if slope < 0.0 && icpt.is_finite() => (icpt.exp(), -slope),
        _ => (1.0, 2.0 / s),
    };
    let starts: Vec<Vec<f64>> = [1.0, 0.3, 3.0].iter().map(|m| vec![top, n_init, k_init * m, 0.0]).collect();
    let out = best_of(&Poissonian, x, y, &starts);
    let (t1, t1_err) = inverse_rate(&out, 2);
    let mut a = Assembler::new("poissonian_decay", &out, x.len());
    a.param("A", out.params[0], std_err(&out, 0), "y")
        .param("n0", out.params[1], std_err(&out, 1), "")
        .param("T1", t1, t1_err, "x")
        .param("offset", out.params[3], std_err(&out, 3), "y");
    if out.params[1].abs() < 1e-6 {
        a.flag("degenerate_flat");
    }
    Ok(a.finish())
}

// ---------------------------------------------------------------------------
// Damped fringes

struct Fringes;

impl Model for Fringes {
    fn n_params(&self) -> usize {
        5
    }
    fn eval(&self, x: f64, p: &[f64]) -> f64 {
        p[0] * (-p[1] * x).exp() * (2.0 * PI * p[2] * x + p[3]).cos() + p[4]
    }
    fn grad(&self, x: f64, p: &[f64], out: &mut [f64]) {
        let e = (-p[1] * x).exp();
        let th = 2.0 * PI * p[2] * x + p[3];
        let (s, c) = th.sin_cos();
        out[0] = e * c;
        out[1] = -p[0] * x * e * c;
        out[2] = -p[0] * e * s * 2.0 * PI * x;
        out[3] = -p[0] * e * s;
        out[4] = 1.0;
    }
}

/// Strongest component of the mean-subtracted trace on a grid 8x finer
/// than `1/span`, up to the mean-spacing Nyquist frequency.
fn dominant_frequency(x: &[f64], y: &[f64]) -> (f64, Complex64) {
    let s = span(x);
    let m = mean(y);
    let f_max = 0.5 * (x.len() - 1) as f64 / s;
    let df = 1.0 / (8.0 * s);
    let bins = (f_max / df).floor() as usize;
    let spectrum =
        |f: f64| -> Complex64 { x.iter().zip(y).map(|(&t, &v)| Complex64::from_polar(v - m, -2.0 * PI * f * t)).sum() };
    (1..=bins)
        .map(|i| {
            let f = i as f64 * df;
            (f, spectrum(f))
        })
        .max_by(|a, b| a.1.norm().total_cmp(&b.1.norm()))
        .unwrap_or((0.0, Complex64::new(0.0, 0.0)))
}

/// `A exp(-t/T2) cos(2 pi f t + phi) + offset`. At least four periods must
/// be covered. When the strongest spectral component is below that and a
/// plain exponential explains the trace, the exponential fit is returned
/// with `frequency = 0` and the `zero_frequency_fallback` flag.
pub fn fit_damped_fringes(x: &[f64], y: &[f64]) -> Result<FitResult> {
    check_trace(x, y, 16)?;
    let s = span(x);
    let (f0, bin) = if is_constant(y) { (0.0, Complex64::new(0.0, 0.0)) } else { dominant_frequency(x, y) };
    if f0 * s < 4.0 {
        let exp = fit_exponential(x, y)?;
        let sd = {
            let m = mean(y);
            (y.iter().map(|v| (v - m).powi(2)).sum::<f64>() / y.len() as f64).sqrt()
        };
        if exp.residual_rms <= 0.1 * sd || sd == 0.0 {
            let mut r = exp;
            r.model = "damped_fringes".into();
            let t = r.params.remove("T").expect("exponential has T");
            r.params.insert("T2".into(), t);
            r.params.insert("frequency".into(), FitParam { value: 0.0, std_err: None, unit: "1/x".into() });
            r.params.insert("phase".into(), FitParam { value: 0.0, std_err: None, unit: "rad".into() });
            r.flags.push("zero_frequency_fallback".into());
            return Ok(r);
        }
        return Err(Error::Fit(format!(
            "under-resolved frequency: dominant component covers {:.2} periods (need >= 4)",
            f0 * s
        )));
    }
    let c0 = mean(y);
    let phi0 = bin.arg();
    let a_flat = 2.0 * bin.norm() / y.len() as f64;
    let starts: Vec<Vec<f64>> = [0.5, 2.0, 8.0]
        .iter()
        .map(|&ks| {
            let k = ks / s;
            // undo the envelope's attenuation of the spectral amplitude
            let gain = ks / (1.0 - (-ks).exp());
            vec![a_flat * gain * (k * x[0]).exp(), k, f0, phi0, c0]
        })
        .collect();
    let out = best_of(&Fringes, x, y, &starts);
    let mut p = out.params.clone();
    // canonical form: A > 0, f > 0, phase in (-pi, pi]
    if p[2] < 0.0 {
        p[2] = -p[2];
        p[3] = -p[3];
    }
    if p[0] < 0.0 {
        p[0] = -p[0];
        p[3] += PI;
    }
    p[3] = (p[3] + PI).rem_euclid(2.0 * PI) - PI;
    let (t2, t2_err) = inverse_rate(&out, 1);
    let mut a = Assembler::new("damped_fringes", &out, x.len());
    a.param("A", p[0], std_err(&out, 0), "y")
        .param("T2", t2, t2_err, "x")
        .param("frequency", p[2], std_err(&out, 2), "1/x")
        .param("phase", p[3], std_err(&out, 3), "rad")
        .param("offset", p[4], std_err(&out, 4), "y");
    Ok(a.finish())
}

// ---------------------------------------------------------------------------
// Lorentzian multiplet

struct Multiplet {
    n: usize,
}

impl Model for Multiplet {
    fn n_params(&self) -> usize {
        1 + 3 * self.n
    }
    fn eval(&self, x: f64, p: &[f64]) -> f64 {
        p[0] + (0..self.n)
            .map(|k| {
                let (a, c, g) = (p[1 + 3 * k], p[2 + 3 * k], p[3 + 3 * k]);
                a * g * g / ((x - c).powi(2) + g * g)
            })
            .sum::<f64>()
    }
    fn grad(&self, x: f64, p: &[f64], out: &mut [f64]) {
        out[0] = 1.0;
        for k in 0..self.n {
            let (a, c, g) = (p[1 + 3 * k], p[2 + 3 * k], p[3 + 3 * k]);
            let u = x - c;
            let d = u * u + g * g;
            out[1 + 3 * k] = g * g / d;
            out[2 + 3 * k] = a * g * g * 2.0 * u / (d * d);
            out[3 + 3 * k] = a * 2.0 * g * u * u / (d * d);
        }
    }
}

#[derive(Clone, Copy, Debug)]
struct Peak {
    index: usize,
    prominence: f64,
}

fn find_peaks(y: &[f64]) -> Vec<Peak> {
    let n = y.len();
    let mut peaks = Vec::new();
    for i in 1..n.saturating_sub(1) {
        if !(y[i] > y[i - 1] && y[i] >= y[i + 1]) {
            continue;
        }
        let mut left_min = y[i];
        for j in (0..i).rev() {
            if y[j] > y[i] {
                break;
            }
            left_min = left_min.min(y[j]);
        }
        let mut right_min = y[i];
        for &v in &y[i + 1..] {
            if v > y[i] {
                break;
            }
            right_min = right_min.min(v);
        }
        peaks.push(Peak { index: i, prominence: y[i] - left_min.max(right_min) });
    }
    peaks
}

/// Distance from a peak to where the trace first drops by half its
/// prominence, taking the nearer side.
fn half_prominence_width(x: &[f64], y: &[f64], p: Peak) -> f64 {
    let level = y[p.index] - 0.5 * p.prominence;
    let crossing = |range: &mut dyn Iterator<Item = usize>| -> Option<f64> {
        let mut prev = p.index;
        for j in range {
            if y[j] <= level {
                let frac = (y[prev] - level) / (y[prev] - y[j]);
                return Some((x[prev] + frac * (x[j] - x[prev]) - x[p.index]).abs());
            }
            prev = j;
        }
        None
    };
    let l = crossing(&mut (0..p.index).rev());
    let r = crossing(&mut (p.index + 1..x.len()));
    match (l, r) {
        (Some(a), Some(b)) => a.min(b),
        (Some(a), None) | (None, Some(a)) => a,
        (None, None) => span(x) / 10.0,
    }
}

/// Sum of `n_peaks` Lorentzians (HWHM `width_k`) on a constant offset.
/// Centres are reported sorted; `weight_k` is the area fraction of peak
/// `k`. With two or more peaks the mean adjacent spacing and its standard
/// deviation are reported as `spacing_mean` / `spacing_spread`.
pub fn fit_lorentzian_multiplet(x: &[f64], y: &[f64], n_peaks: usize) -> Result<FitResult> {
    if n_peaks == 0 {
        return Err(Error::InvalidParameter("n_peaks must be >= 1".into()));
    }
    check_trace(x, y, 8.max(3 * n_peaks + 2))?;
    let mut peaks = find_peaks(y);
    if peaks.len() < n_peaks {
        return Err(Error::Fit(format!(
            "overlapping or unresolved peaks: found {} local maxima, asked for {n_peaks}",
            peaks.len()
        )));
    }
    peaks.sort_by(|a, b| b.prominence.total_cmp(&a.prominence));
    peaks.truncate(n_peaks);
    let base = y.iter().cloned().fold(f64::INFINITY, f64::min);
    let mut p0 = vec![base];
    for p in &peaks {
        p0.extend([y[p.index] - base, x[p.index], half_prominence_width(x, y, *p)]);
    }
    let model = Multiplet { n: n_peaks };
    let out = levenberg_marquardt(&model, x, y, &p0, &LmOptions::default());

    let mut order: Vec<usize> = (0..n_peaks).collect();
    order.sort_by(|&a, &b| out.params[2 + 3 * a].total_cmp(&out.params[2 + 3 * b]));
    let area: Vec<f64> = (0..n_peaks).map(|k| out.params[1 + 3 * k] * out.params[3 + 3 * k].abs()).collect();
    let total_area: f64 = area.iter().sum();

    let mut a = Assembler::new("lorentzian_multiplet", &out, x.len());
    a.param("offset", out.params[0], std_err(&out, 0), "y");
    for (rank, &k) in order.iter().enumerate() {
        a.param(&format!("center_{rank}"), out.params[2 + 3 * k], std_err(&out, 2 + 3 * k), "x")
            .param(&format!("width_{rank}"), out.params[3 + 3 * k].abs(), std_err(&out, 3 + 3 * k), "x")
            .param(&format!("amplitude_{rank}"), out.params[1 + 3 * k], std_err(&out, 1 + 3 * k), "y")
            .param(&format!("weight_{rank}"), area[k] / total_area, None, "");
    }
    let centers: Vec<f64> = order.iter().map(|&k| out.params[2 + 3 * k]).collect();
    let widths: Vec<f64> = order.iter().map(|&k| out.params[3 + 3 * k].abs()).collect();
    if n_peaks >= 2 {
        let gaps: Vec<f64> = centers.windows(2).map(|w| w[1] - w[0]).collect();
        let m = mean(&gaps);
        let spread = (gaps.iter().map(|g| (g - m).powi(2)).sum::<f64>() / gaps.len() as f64).sqrt();
        a.result.diagnostics.insert("spacing_mean".into(), m);
        a.result.diagnostics.insert("spacing_spread".into(), spread);
        if gaps.iter().zip(widths.windows(2)).any(|(g, w)| *g < w[0] + w[1]) {
            a.flag("overlapping_peaks");
        }
    }
    Ok(a.finish())
}

// ---------------------------------------------------------------------------
// Coherent-state revivals

struct Revival;

impl Model for Revival {
    fn n_params(&self) -> usize {
        4
    }
    fn eval(&self, x: f64, p: &[f64]) -> f64 {
        p[0] * (p[1] * ((2.0 * PI * p[2] * x).cos() - 1.0)).exp() + p[3]
    }
    fn grad(&self, x: f64, p: &[f64], out: &mut [f64]) {
        let th = 2.0 * PI * p[2] * x;
        let (s, c) = th.sin_cos();
        let f = (p[1] * (c - 1.0)).exp();
        out[0] = f;
        out[1] = p[0] * f * (c - 1.0);
        out[2] = -p[0] * f * p[1] * s * 2.0 * PI * x;
        out[3] = 1.0;
    }
}

/// Ramsey contrast of a qubit entangled with a coherent state,
/// `A exp(n (cos(2 pi t / T) - 1)) + offset`; `T` is the revival period.
pub fn fit_revival(x: &[f64], y: &[f64]) -> Result<FitResult> {
    check_trace(x, y, 16)?;
    if is_constant(y) {
        return Err(Error::Fit("flat trace: no collapse, revival period undefined".into()));
    }
    let (lo, hi) = y.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &v| (a.min(v), b.max(v)));
    let mid = 0.5 * (lo + hi);
    let mut maxima: Vec<f64> = find_peaks(y).into_iter().filter(|p| y[p.index] > mid).map(|p| x[p.index]).collect();
    if y[0] > mid && y[0] >= y[1] {
        maxima.insert(0, x[0]);
    }
    let period = match maxima.len() {
        0 => span(x),
        1 => maxima[0].max(span(x) / 4.0),
        n => (maxima[n - 1] - maxima[0]) / (n - 1) as f64,
    };
    let nbar0 = if lo > 0.0 && hi > 0.0 { (0.5 * (hi / lo).ln()).clamp(0.05, 30.0) } else { 3.0 };
    let starts: Vec<Vec<f64>> = [1.0, 0.5, 2.0].iter().map(|m| vec![hi - lo, nbar0, m / period, lo]).collect();
    let out = best_of(&Revival, x, y, &starts);
    let (t, t_err) = inverse_rate(&out, 2);
    let mut a = Assembler::new("revival", &out, x.len());
    a.param("A", out.params[0], std_err(&out, 0), "y")
        .param("nbar", out.params[1], std_err(&out, 1), "")
        .param("period", t.abs(), t_err, "x")
        .param("offset", out.params[3], std_err(&out, 3), "y");
    Ok(a.finish())
}

// ---------------------------------------------------------------------------
// Linear models

/// Ordinary least-squares line `slope x + intercept`.
pub fn fit_line(x: &[f64], y: &[f64]) -> Result<FitResult> {
    check_trace(x, y, 2)?;
    let (icpt, slope) = regress(x, y).ok_or_else(|| Error::Fit("degenerate abscissa".into()))?;
    let n = x.len() as f64;
    let ss: f64 = x.iter().zip(y).map(|(a, b)| (icpt + slope * a - b).powi(2)).sum();
    let mx = mean(x);
    let sxx: f64 = x.iter().map(|v| (v - mx).powi(2)).sum();
    let s2 = if x.len() > 2 { ss / (n - 2.0) } else { 0.0 };
    let mut a = Assembler::exact("line");
    a.result.residual_rms = (ss / n).sqrt();
    a.param("slope", slope, Some((s2 / sxx).sqrt()), "y/x").param(
        "intercept",
        icpt,
        Some((s2 * (1.0 / n + mx * mx / sxx)).sqrt()),
        "y",
    );
    Ok(a.finish())
}

/// Intercept-only regression of `log Q = log g - log y` (slope fixed at -1).
/// `g_lower` / `g_upper` are `g exp(-/+ s / sqrt(N))` with `s` the residual
/// standard deviation; the free-slope estimate is reported as
/// `free_slope` for diagnosis only.
pub fn fit_loglog_intercept(data: &QMeasurementSet) -> Result<FitResult> {
    let samples = data.samples();
    if samples.len() < 2 {
        return Err(Error::InvalidParameter("need at least 2 samples".into()));
    }
    let n = samples.len() as f64;
    let logs: Vec<f64> = samples.iter().map(|&(y, q)| q.ln() + y.ln()).collect();
    let log_g = mean(&logs);
    let var = logs.iter().map(|l| (l - log_g).powi(2)).sum::<f64>() / (n - 1.0);
    let sigma = (var / n).sqrt();
    let g = log_g.exp();

    let ly: Vec<f64> = samples.iter().map(|s| s.0.ln()).collect();
    let lq: Vec<f64> = samples.iter().map(|s| s.1.ln()).collect();

    let mut a = Assembler::exact("loglog_intercept");
    a.result.residual_rms = (logs.iter().map(|l| (l - log_g).powi(2)).sum::<f64>() / n).sqrt();
    a.param("g_seam", g, Some(g * sigma), "1/(Ohm m)");
    let d = &mut a.result.diagnostics;
    d.insert("g_lower".into(), (log_g - sigma).exp());
    d.insert("g_upper".into(), (log_g + sigma).exp());
    d.insert("sigma_log".into(), sigma);
    if let Some((_, slope)) = regress(&ly, &lq) {
        d.insert("free_slope".into(), slope);
    }
    Ok(a.finish())
}
