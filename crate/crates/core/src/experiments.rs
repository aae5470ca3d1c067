//! Simulated measurement protocols.
//!
//! Every protocol runs in the frame where each mode rotates at its own
//! frequency, so only detunings, cross-Kerr and self-Kerr terms remain in
//! the Hamiltonian. The output is a [`TraceSeries`] that the matching
//! [`fitting`] routine reduces to the generating parameter.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::fmt::Write as _;
use std::str::FromStr;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::Serialize;

use crate::circuit::{build_hamiltonian, DispersiveSystem};
use crate::error::{Error, Result};
use crate::fitting::{self, FitResult};
use crate::quantum::{
    coherent_amplitudes, coherent_state, displace, evolve_lindblad, ladder, qubit_rotation, CMatrix, CVector,
    ModeSpace, Operator, State, C64,
};
use crate::sweep;

/// Minimum number of grid points for a protocol sweep.
pub const MIN_GRID_POINTS: usize = 16;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Quantity {
    /// Probability in [0, 1].
    Population,
    /// Normalised coherence magnitude in [0, 1].
    Contrast,
    /// Frequency shift, Hz.
    Shift,
    /// Anything else, including noisy populations.
    Signal,
}

impl Quantity {
    pub fn name(self) -> &'static str {
        match self {
            Quantity::Population => "population",
            Quantity::Contrast => "contrast",
            Quantity::Shift => "shift",
            Quantity::Signal => "signal",
        }
    }

    fn is_probability(self) -> bool {
        matches!(self, Quantity::Population | Quantity::Contrast)
    }
}

impl FromStr for Quantity {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "population" => Quantity::Population,
            "contrast" => Quantity::Contrast,
            "shift" => Quantity::Shift,
            "signal" => Quantity::Signal,
            other => return Err(Error::InvalidParameter(format!("unknown quantity {other:?}"))),
        })
    }
}

/// One simulated or measured sweep. `x` is strictly increasing.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TraceSeries {
    x: Vec<f64>,
    values: Vec<f64>,
    x_unit: String,
    quantity: Quantity,
    protocol: String,
    meta: BTreeMap<String, String>,
    /// Additional named columns sharing `x`.
    extra: Vec<(String, Vec<f64>)>,
}

impl TraceSeries {
    pub fn new(
        protocol: impl Into<String>,
        x: Vec<f64>,
        values: Vec<f64>,
        x_unit: impl Into<String>,
        quantity: Quantity,
    ) -> Result<Self> {
        if x.len() != values.len() {
            return Err(Error::DimensionMismatch { expected: x.len(), actual: values.len() });
        }
        if x.is_empty() {
            return Err(Error::InvalidGrid("empty trace".into()));
        }
        if x.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::InvalidGrid("x must be strictly increasing".into()));
        }
        if x.iter().chain(&values).any(|v| !v.is_finite()) {
            return Err(Error::InvalidParameter("trace contains non-finite values".into()));
        }
        if quantity.is_probability() {
            if let Some(v) = values.iter().find(|v| **v < -1e-6 || **v > 1.0 + 1e-6) {
                return Err(Error::InvalidState(format!("{} value {v} outside [0, 1]", quantity.name())));
            }
        }
        Ok(Self {
            x,
            values,
            x_unit: x_unit.into(),
            quantity,
            protocol: protocol.into(),
            meta: BTreeMap::new(),
            extra: Vec::new(),
        })
    }

    pub fn x(&self) -> &[f64] {
        &self.x
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn x_unit(&self) -> &str {
        &self.x_unit
    }

    pub fn quantity(&self) -> Quantity {
        self.quantity
    }

    pub fn protocol(&self) -> &str {
        &self.protocol
    }

    pub fn meta(&self) -> &BTreeMap<String, String> {
        &self.meta
    }

    pub fn extra(&self) -> &[(String, Vec<f64>)] {
        &self.extra
    }

    pub fn len(&self) -> usize {
        self.x.len()
    }

    pub fn is_empty(&self) -> bool {
        self.x.is_empty()
    }

    pub fn with_meta(mut self, key: impl Into<String>, value: impl ToString) -> Self {
        self.meta.insert(key.into(), value.to_string());
        self
    }

    pub fn with_column(mut self, name: impl Into<String>, values: Vec<f64>) -> Result<Self> {
        if values.len() != self.x.len() {
            return Err(Error::DimensionMismatch { expected: self.x.len(), actual: values.len() });
        }
        self.extra.push((name.into(), values));
        Ok(self)
    }

    /// Adds seeded i.i.d. Gaussian noise; the result is a plain signal.
    pub fn with_noise(&self, sigma: f64, seed: u64) -> Result<Self> {
        if !(sigma >= 0.0 && sigma.is_finite()) {
            return Err(Error::InvalidParameter(format!("noise sigma must be >= 0, got {sigma}")));
        }
        let mut out = self.clone();
        if sigma == 0.0 {
            return Ok(out);
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let dist = Normal::new(0.0, sigma).map_err(|e| Error::InvalidParameter(e.to_string()))?;
        for v in &mut out.values {
            *v += dist.sample(&mut rng);
        }
        out.quantity = Quantity::Signal;
        out.meta.insert("noise_sigma".into(), sigma.to_string());
        out.meta.insert("noise_seed".into(), seed.to_string());
        Ok(out)
    }

    /// CSV with `#`-prefixed metadata, a header row and one sample per line.
    /// Numbers use the shortest round-trip representation.
    pub fn to_csv(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "# protocol: {}", self.protocol);
        let _ = writeln!(s, "# quantity: {}", self.quantity.name());
        let _ = writeln!(s, "# x_unit: {}", self.x_unit);
        for (k, v) in &self.meta {
            let _ = writeln!(s, "# {k}: {v}");
        }
        s.push_str("x,value");
        for (name, _) in &self.extra {
            s.push(',');
            s.push_str(name);
        }
        s.push('\n');
        for i in 0..self.x.len() {
            let _ = write!(s, "{:e},{:e}", self.x[i], self.values[i]);
            for (_, col) in &self.extra {
                let _ = write!(s, ",{:e}", col[i]);
            }
            s.push('\n');
        }
        s
    }

    /// Parses [`TraceSeries::to_csv`] output. The header must start with
    /// `x,value`; errors carry the 1-based line number.
    pub fn from_csv(text: &str) -> Result<Self> {
        let mut meta = BTreeMap::new();
        let mut header: Option<Vec<String>> = None;
        let mut cols: Vec<Vec<f64>> = Vec::new();
        for (i, line) in text.lines().enumerate() {
            let lineno = i + 1;
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            if let Some(rest) = line.strip_prefix('#') {
                if let Some((k, v)) = rest.split_once(':') {
                    meta.insert(k.trim().to_string(), v.trim().to_string());
                }
                continue;
            }
            match &header {
                None => {
                    let names: Vec<String> = line.split(',').map(|c| c.trim().to_string()).collect();
                    if names.len() < 2 || names[0] != "x" || names[1] != "value" {
                        return Err(Error::InvalidParameter(format!(
                            "line {lineno}: expected header starting with \"x,value\", got {line:?}"
                        )));
                    }
                    cols = vec![Vec::new(); names.len()];
                    header = Some(names);
                }
                Some(names) => {
                    let fields: Vec<&str> = line.split(',').collect();
                    if fields.len() != names.len() {
                        return Err(Error::InvalidParameter(format!(
                            "line {lineno}: expected {} fields, found {}",
                            names.len(),
                            fields.len()
                        )));
                    }
                    for (c, f) in fields.iter().enumerate() {
                        let v: f64 = f.trim().parse().map_err(|_| {
                            Error::InvalidParameter(format!("line {lineno}: cannot parse {:?} as a number", f.trim()))
                        })?;
                        cols[c].push(v);
                    }
                }
            }
        }
        let names = header.ok_or_else(|| Error::InvalidParameter("no header row found".into()))?;
        let protocol = meta.remove("protocol").unwrap_or_else(|| "external".into());
        let quantity = match meta.remove("quantity") {
            Some(q) => q.parse()?,
            None => Quantity::Signal,
        };
        let x_unit = meta.remove("x_unit").unwrap_or_default();
        let mut cols = cols.into_iter();
        let x = cols.next().unwrap_or_default();
        let values = cols.next().unwrap_or_default();
        let mut trace = Self::new(protocol, x, values, x_unit, quantity)?;
        trace.meta = meta;
        for (name, col) in names.into_iter().skip(2).zip(cols) {
            trace = trace.with_column(name, col)?;
        }
        Ok(trace)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Protocol {
    T1Decay,
    Ramsey,
    HahnEcho,
    NumberSplitting,
    Revival,
    CavityDecay,
    StarkSlope,
}

impl Protocol {
    pub const ALL: [Protocol; 7] = [
        Protocol::T1Decay,
        Protocol::Ramsey,
        Protocol::HahnEcho,
        Protocol::NumberSplitting,
        Protocol::Revival,
        Protocol::CavityDecay,
        Protocol::StarkSlope,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Protocol::T1Decay => "t1_decay",
            Protocol::Ramsey => "ramsey",
            Protocol::HahnEcho => "hahn_echo",
            Protocol::NumberSplitting => "number_splitting",
            Protocol::Revival => "revival",
            Protocol::CavityDecay => "cavity_decay",
            Protocol::StarkSlope => "stark_slope",
        }
    }

    /// Fitter applied to this protocol's trace.
    pub fn fit_model(self) -> &'static str {
        match self {
            Protocol::T1Decay => "exponential",
            Protocol::Ramsey | Protocol::HahnEcho => "damped_fringes",
            Protocol::NumberSplitting => "lorentzian_multiplet",
            Protocol::Revival => "revival",
            Protocol::CavityDecay => "poissonian_decay",
            Protocol::StarkSlope => "line",
        }
    }

    fn needs_cavity(self) -> bool {
        matches!(self, Protocol::NumberSplitting | Protocol::Revival | Protocol::CavityDecay | Protocol::StarkSlope)
    }
}

impl FromStr for Protocol {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Protocol::ALL.into_iter().find(|p| p.name() == s).ok_or_else(|| {
            let names: Vec<&str> = Protocol::ALL.iter().map(|p| p.name()).collect();
            Error::InvalidParameter(format!("unknown protocol {s:?}; available: {}", names.join(", ")))
        })
    }
}

/// Evenly spaced sweep `start..=stop`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Grid {
    pub start: f64,
    pub stop: f64,
    pub points: usize,
}

impl Grid {
    pub fn new(start: f64, stop: f64, points: usize) -> Result<Self> {
        let g = Self { start, stop, points };
        g.validate()?;
        Ok(g)
    }

    pub fn validate(&self) -> Result<()> {
        if self.points < MIN_GRID_POINTS {
            return Err(Error::InvalidGrid(format!("{} points < minimum {MIN_GRID_POINTS}", self.points)));
        }
        if !(self.stop > self.start) || !self.start.is_finite() || !self.stop.is_finite() {
            return Err(Error::InvalidGrid(format!("need start < stop, got {}..{}", self.start, self.stop)));
        }
        Ok(())
    }

    pub fn values(&self) -> Vec<f64> {
        let n = self.points - 1;
        (0..=n).map(|i| self.start + (self.stop - self.start) * i as f64 / n as f64).collect()
    }

    pub fn step(&self) -> f64 {
        (self.stop - self.start) / (self.points - 1) as f64
    }
}

/// One protocol to run against a device. Times in seconds, frequencies in
/// Hz (not angular), `kappa_r` in 1/s.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ProtocolConfig {
    pub name: String,
    pub protocol: Protocol,
    pub qubit: String,
    pub cavity: Option<String>,
    /// Readout mode for the Stark measurement.
    pub readout: Option<String>,
    /// Ramsey / echo detuning.
    pub detuning: f64,
    /// Delay grid (s), frequency grid (Hz) or, for stark_slope, drive
    /// powers in arbitrary units.
    pub grid: Grid,
    /// Initial cavity displacement (real amplitude).
    pub alpha: f64,
    /// Include dissipation in the revival simulation.
    pub decoherence: bool,
    /// Length of the photon-number-selective pulse.
    pub pulse_length: Option<f64>,
    pub n_peaks: Option<usize>,
    pub kappa_r: Option<f64>,
    /// Stark tone detuning from the readout mode.
    pub drive_detuning: f64,
    /// Gaussian noise sigma added before fitting.
    pub noise: f64,
}

impl ProtocolConfig {
    pub fn new(name: impl Into<String>, protocol: Protocol, qubit: impl Into<String>, grid: Grid) -> Self {
        Self {
            name: name.into(),
            protocol,
            qubit: qubit.into(),
            cavity: None,
            readout: None,
            detuning: 0.0,
            grid,
            alpha: 0.0,
            decoherence: false,
            pulse_length: None,
            n_peaks: None,
            kappa_r: None,
            drive_detuning: 0.0,
            noise: 0.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.grid.validate()?;
        let missing = |what: &str| Error::MissingParameter(format!("protocol {}: {what}", self.name));
        if self.protocol.needs_cavity() && self.cavity.is_none() {
            return Err(missing("cavity"));
        }
        if self.protocol == Protocol::StarkSlope {
            if self.readout.is_none() {
                return Err(missing("readout"));
            }
            if self.kappa_r.is_none() {
                return Err(missing("kappa_r"));
            }
            if self.grid.start <= 0.0 {
                return Err(Error::InvalidGrid("drive powers must be positive".into()));
            }
        }
        if matches!(
            self.protocol,
            Protocol::Ramsey | Protocol::HahnEcho | Protocol::T1Decay | Protocol::CavityDecay | Protocol::Revival
        ) && self.grid.start < 0.0
        {
            return Err(Error::InvalidGrid("delays must be >= 0".into()));
        }
        if !(self.noise >= 0.0) {
            return Err(Error::InvalidParameter("noise must be >= 0".into()));
        }
        Ok(())
    }
}

/// Output of [`run_protocol`]: the trace, the fit and the headline numbers.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ProtocolRun {
    pub name: String,
    pub protocol: Protocol,
    pub trace: TraceSeries,
    pub fit: FitResult,
    pub summary: BTreeMap<String, f64>,
}

/// Simulates `cfg` on `sys`, adds seeded noise when requested and applies
/// the matching fitter.
pub fn run_protocol(sys: &DispersiveSystem, cfg: &ProtocolConfig, seed: u64) -> Result<ProtocolRun> {
    cfg.validate()?;
    let grid = cfg.grid.values();
    let cavity = || cfg.cavity.as_deref().expect("validated");
    let mut summary = BTreeMap::new();
    let trace = match cfg.protocol {
        Protocol::T1Decay => sim_t1(sys, &cfg.qubit, &grid)?,
        Protocol::Ramsey => sim_ramsey(sys, &cfg.qubit, cfg.detuning, &grid, false)?,
        Protocol::HahnEcho => sim_ramsey(sys, &cfg.qubit, cfg.detuning, &grid, true)?,
        Protocol::NumberSplitting => sim_number_splitting(sys, &cfg.qubit, cavity(), cfg.alpha, &grid)?,
        Protocol::Revival => sim_revival(sys, &cfg.qubit, cavity(), cfg.alpha, &grid, cfg.decoherence)?,
        Protocol::CavityDecay => sim_cavity_decay(sys, &cfg.qubit, cavity(), cfg.alpha, &grid, cfg.pulse_length)?,
        Protocol::StarkSlope => {
            let q = sys.require(&cfg.qubit)?;
            let r = sys.require(cfg.readout.as_deref().expect("validated"))?;
            let c = sys.require(cavity())?;
            let kappa = cfg.kappa_r.expect("validated");
            let stark = sim_stark_slopes(&grid, kappa, sys.chi(q, r), sys.chi(r, c), 2.0 * PI * cfg.drive_detuning)?;
            summary.insert("slope_qubit".into(), stark.slope_q);
            summary.insert("slope_storage".into(), stark.slope_mu);
            summary.insert("ratio".into(), stark.ratio.unwrap_or(f64::INFINITY));
            stark.trace
        }
    };
    let trace = trace.with_noise(cfg.noise, seed)?;
    let model = match (cfg.protocol, cfg.n_peaks) {
        (Protocol::NumberSplitting, Some(n)) => format!("lorentzian_multiplet:{n}"),
        (Protocol::NumberSplitting, None) => {
            let n = trace.meta().get("n_peaks").and_then(|v| v.parse::<usize>().ok()).unwrap_or(1);
            format!("lorentzian_multiplet:{n}")
        }
        (p, _) => p.fit_model().to_string(),
    };
    let fit = fitting::fit_named(&model, trace.x(), trace.values())?.with_x_unit(trace.x_unit());
    let headline = match cfg.protocol {
        Protocol::T1Decay => fit.value("T").map(|v| ("T1", v)),
        Protocol::Ramsey | Protocol::HahnEcho => fit.value("T2").map(|v| ("T2", v)),
        Protocol::NumberSplitting => fit.diagnostics.get("spacing_mean").map(|v| ("spacing_hz", v.abs())),
        Protocol::Revival => fit.value("period").map(|v| ("revival_period", v)),
        Protocol::CavityDecay => fit.value("T1").map(|v| ("T1", v)),
        Protocol::StarkSlope => None,
    };
    if let Some((k, v)) = headline {
        summary.insert(k.to_string(), v);
    }
    Ok(ProtocolRun { name: cfg.name.clone(), protocol: cfg.protocol, trace, fit, summary })
}

// ---------------------------------------------------------------------------
// Simulators

/// Evolves on an arbitrary non-negative grid (the integrator wants t = 0
/// first).
fn evolve_on(state: &State, h: &Operator, ops: &[(Operator, f64)], grid: &[f64]) -> Result<Vec<State>> {
    if grid.first().is_some_and(|&t| t < 0.0) {
        return Err(Error::InvalidGrid("times must be >= 0".into()));
    }
    if grid.first() == Some(&0.0) {
        return evolve_lindblad(state, h, ops, grid);
    }
    let mut full = Vec::with_capacity(grid.len() + 1);
    full.push(0.0);
    full.extend_from_slice(grid);
    let mut out = evolve_lindblad(state, h, ops, &full)?;
    out.remove(0);
    Ok(out)
}

fn excited_population(state: &State, mode: usize) -> Result<f64> {
    let p = state.populations(mode)?;
    Ok((1.0 - p[0]).clamp(0.0, 1.0))
}

fn check_probability(states: &[State]) -> Result<()> {
    for s in states {
        let dev = (s.trace().re - 1.0).abs();
        if dev > 1e-6 {
            return Err(Error::InvalidState(format!("trace drifted by {dev:.2e}")));
        }
    }
    Ok(())
}

fn single_mode(sys: &DispersiveSystem, label: &str) -> Result<DispersiveSystem> {
    sys.subsystem(&[sys.require(label)?])
}

/// Excited-state population after preparing `|1>` on `mode` and waiting.
pub fn sim_t1(sys: &DispersiveSystem, mode: &str, grid: &[f64]) -> Result<TraceSeries> {
    let sub = single_mode(sys, mode)?;
    let spec = &sub.modes()[0];
    let t1 = spec.t1.ok_or_else(|| Error::MissingParameter(format!("T1 of mode {mode:?}")))?;
    let h = build_hamiltonian(&sub, &sub.mode_frame())?;
    // relaxation only: pure dephasing does not touch populations
    let ops: Vec<(Operator, f64)> =
        sub.collapse_operators(false)?.into_iter().filter(|(op, _)| !op.is_diagonal()).collect();
    let states = evolve_on(&State::fock(sub.space(), &[1])?, &h, &ops, grid)?;
    check_probability(&states)?;
    let values = states.iter().map(|s| excited_population(s, 0)).collect::<Result<_>>()?;
    Ok(TraceSeries::new("t1_decay", grid.to_vec(), values, "s", Quantity::Population)?
        .with_meta("mode", mode)
        .with_meta("t1_input", t1)
        .with_meta("n_thermal", spec.n_thermal))
}

/// Ramsey or Hahn-echo fringes. The pulses are instantaneous rotations in
/// a frame detuned by `detuning` (Hz) from the qubit. For the echo, a pi
/// pulse sits at `t/2` and the final pi/2 carries the virtual phase
/// `2 pi detuning t` so the refocused signal still oscillates at the
/// detuning.
pub fn sim_ramsey(sys: &DispersiveSystem, mode: &str, detuning: f64, grid: &[f64], echo: bool) -> Result<TraceSeries> {
    let sub = single_mode(sys, mode)?;
    let spec = &sub.modes()[0];
    if spec.t1.is_none() {
        return Err(Error::MissingParameter(format!("T1 of mode {mode:?}")));
    }
    let t2 = if echo { spec.t2_echo.or(spec.t2) } else { spec.t2 };
    if t2.is_none() {
        return Err(Error::MissingParameter(format!("{} of mode {mode:?}", if echo { "T2echo" } else { "T2" })));
    }
    if grid.first().is_some_and(|&t| t < 0.0) {
        return Err(Error::InvalidGrid("delays must be >= 0".into()));
    }
    let space = sub.space();
    let frame = vec![spec.omega - 2.0 * PI * detuning];
    let h = build_hamiltonian(&sub, &frame)?;
    let ops = sub.collapse_operators(echo)?;
    let half_pi = qubit_rotation(&space, 0, PI / 2.0, 0.0)?;
    let start = State::fock(space.clone(), &[0])?.transform(&half_pi);

    let values: Vec<f64> = if echo {
        let pi_pulse = qubit_rotation(&space, 0, PI, 0.0)?;
        sweep::try_map(grid, |&t| {
            let mid = if t > 0.0 {
                evolve_lindblad(&start, &h, &ops, &[0.0, t / 2.0])?.pop().expect("two points")
            } else {
                start.clone()
            };
            let flipped = mid.transform(&pi_pulse);
            let end = if t > 0.0 {
                evolve_lindblad(&flipped, &h, &ops, &[0.0, t / 2.0])?.pop().expect("two points")
            } else {
                flipped
            };
            check_probability(std::slice::from_ref(&end))?;
            let last = qubit_rotation(&space, 0, PI / 2.0, 2.0 * PI * detuning * t)?;
            excited_population(&end.transform(&last), 0)
        })?
    } else {
        let states = evolve_on(&start, &h, &ops, grid)?;
        check_probability(&states)?;
        states.iter().map(|s| excited_population(&s.transform(&half_pi), 0)).collect::<Result<_>>()?
    };
    let protocol = if echo { "hahn_echo" } else { "ramsey" };
    Ok(TraceSeries::new(protocol, grid.to_vec(), values, "s", Quantity::Population)?
        .with_meta("mode", mode)
        .with_meta("detuning_hz", detuning)
        .with_meta("t2_input", t2.expect("checked")))
}

/// Photon-number distribution of the cavity after displacing vacuum by
/// `alpha` with the truncated displacement operator.
pub fn displaced_number_weights(dim: usize, alpha: f64) -> Result<Vec<f64>> {
    let space = ModeSpace::from_dims(&[dim])?;
    let vac = State::vacuum(space)?;
    displace(&vac, 0, C64::new(alpha, 0.0))?.populations(0)
}

fn qubit_linewidth_hz(sys: &DispersiveSystem, q: usize) -> Result<f64> {
    let spec = sys.mode(q)?;
    let t2 = spec
        .t2
        .or(spec.t1.map(|t1| 2.0 * t1))
        .ok_or_else(|| Error::MissingParameter(format!("T2 or T1 of mode {:?}", spec.label)))?;
    Ok(1.0 / (2.0 * PI * t2))
}

/// Weak-probe qubit spectrum with the cavity displaced to `|alpha>`: a
/// Lorentzian (HWHM `1/(2 pi T2)`) for each photon number `n`, centred at
/// the qubit's dispersive shift `-chi n / 2 pi` and weighted by `P(n)`.
/// `freq_grid` is the probe detuning from the bare qubit, Hz.
pub fn sim_number_splitting(
    sys: &DispersiveSystem,
    qubit: &str,
    cavity: &str,
    alpha: f64,
    freq_grid: &[f64],
) -> Result<TraceSeries> {
    let q = sys.require(qubit)?;
    let c = sys.require(cavity)?;
    let chi = sys.chi(q, c);
    let hwhm = qubit_linewidth_hz(sys, q)?;
    let spacing = chi.abs() / (2.0 * PI);
    if spacing <= 4.0 * hwhm {
        return Err(Error::InvalidParameter(format!(
            "not strongly dispersive: |chi|/2pi = {spacing:.3e} Hz vs linewidth {hwhm:.3e} Hz"
        )));
    }
    let weights = displaced_number_weights(sys.mode(c)?.dim, alpha)?;
    let centers: Vec<f64> = (0..weights.len()).map(|n| -chi * n as f64 / (2.0 * PI)).collect();
    let values: Vec<f64> = sweep::map(freq_grid, |&f| {
        weights.iter().zip(&centers).map(|(w, c)| w * hwhm * hwhm / ((f - c).powi(2) + hwhm * hwhm)).sum::<f64>()
    });
    let significant = weights.iter().filter(|&&w| w > 1e-3).count().max(1);
    let mut trace = TraceSeries::new("number_splitting", freq_grid.to_vec(), values, "Hz", Quantity::Population)?
        .with_meta("qubit", qubit)
        .with_meta("cavity", cavity)
        .with_meta("alpha", alpha)
        .with_meta("chi_hz", chi / (2.0 * PI))
        .with_meta("hwhm_hz", hwhm)
        .with_meta("n_peaks", significant);
    for (n, w) in weights.iter().enumerate().take(significant) {
        trace = trace.with_meta(format!("weight_n{n}"), w);
    }
    Ok(trace)
}

/// Lindblad cross-check of the spectroscopy line shape: steady-state
/// excited population of the qubit driven at `probe_detuning` (Hz, from
/// the bare qubit) with Rabi rate `rabi` (rad/s) while the cavity holds
/// `n` photons. Cavity loss is switched off so the photon number is fixed.
pub fn probe_response(
    sys: &DispersiveSystem,
    qubit: &str,
    cavity: &str,
    n: usize,
    probe_detuning: f64,
    rabi: f64,
    settle: f64,
) -> Result<f64> {
    let q = sys.require(qubit)?;
    let c = sys.require(cavity)?;
    let sub = sys.subsystem(&[q, c])?.with_dim(0, 2)?.with_dim(1, n + 2)?.with_mode(1, |m| {
        m.t1 = None;
        m.t2 = None;
        m.t2_echo = None;
    })?;
    let space = sub.space();
    let mut frame = sub.mode_frame();
    frame[0] += 2.0 * PI * probe_detuning;
    let a = ladder(&space, 0)?;
    let drive = (&a + &a.adjoint()).scale_real(rabi / 2.0);
    let h = &build_hamiltonian(&sub, &frame)? + &drive;
    let ops = sub.collapse_operators(false)?;
    let start = State::fock(space, &[0, n])?;
    let end = evolve_lindblad(&start, &h, &ops, &[0.0, settle])?.pop().expect("two points");
    excited_population(&end, 0)
}

/// Ramsey contrast `2 |<sigma_->|` after preparing
/// `|alpha> (|g> + |e>)/sqrt 2`. Without decoherence the evolution is the
/// exact diagonal propagator.
pub fn sim_revival(
    sys: &DispersiveSystem,
    qubit: &str,
    cavity: &str,
    alpha: f64,
    grid: &[f64],
    decoherence: bool,
) -> Result<TraceSeries> {
    let q = sys.require(qubit)?;
    let c = sys.require(cavity)?;
    let sub = sys.subsystem(&[q, c])?;
    let space = sub.space();
    let chi = sub.chi(0, 1);
    let h = build_hamiltonian(&sub, &sub.mode_frame())?;
    let ops = if decoherence { sub.collapse_operators(false)? } else { Vec::new() };
    let dq = space.dims()[0];
    let mut qv = CVector::zeros(dq);
    qv[0] = C64::new(1.0, 0.0);
    qv[1] = C64::new(1.0, 0.0);
    let cav = coherent_amplitudes(space.dims()[1], C64::new(alpha, 0.0))?;
    let start = State::product(space.clone(), &[qv, cav])?;
    let states = evolve_on(&start, &h, &ops, grid)?;
    check_probability(&states)?;
    let sm = ladder(&space, 0)?;
    let values: Vec<f64> = states.iter().map(|s| (2.0 * s.expect(&sm).norm()).min(1.0)).collect();
    let mut trace = TraceSeries::new("revival", grid.to_vec(), values, "s", Quantity::Contrast)?
        .with_meta("qubit", qubit)
        .with_meta("cavity", cavity)
        .with_meta("alpha", alpha)
        .with_meta("decoherence", decoherence);
    if chi != 0.0 {
        trace = trace.with_meta("expected_period_s", 2.0 * PI / chi.abs());
    }
    Ok(trace)
}

/// Probability that a photon-number-selective pi pulse flips the qubit,
/// `P(n = 0)`, after displacing the cavity by `alpha0` and waiting. The
/// pulse is an instantaneous projector-conditioned flip; when its
/// bandwidth `1/pulse_length` is not below `|chi|/2pi` a `selectivity_warning`
/// is recorded in the metadata.
pub fn sim_cavity_decay(
    sys: &DispersiveSystem,
    qubit: &str,
    cavity: &str,
    alpha0: f64,
    grid: &[f64],
    pulse_length: Option<f64>,
) -> Result<TraceSeries> {
    let q = sys.require(qubit)?;
    let c = sys.require(cavity)?;
    let spec = sys.mode(c)?;
    let t1 = spec.t1.ok_or_else(|| Error::MissingParameter(format!("T1 of mode {cavity:?}")))?;
    let sub = sys.subsystem(&[c])?;
    let h = build_hamiltonian(&sub, &sub.mode_frame())?;
    let ops = sub.collapse_operators(false)?;
    let start = coherent_state(&sub.space(), 0, C64::new(alpha0, 0.0))?;
    let states = evolve_on(&start, &h, &ops, grid)?;
    check_probability(&states)?;
    let values: Vec<f64> =
        states.iter().map(|s| s.populations(0).map(|p| p[0].clamp(0.0, 1.0))).collect::<Result<_>>()?;
    let chi_hz = sys.chi(q, c).abs() / (2.0 * PI);
    let mut trace = TraceSeries::new("cavity_decay", grid.to_vec(), values, "s", Quantity::Population)?
        .with_meta("qubit", qubit)
        .with_meta("cavity", cavity)
        .with_meta("alpha0", alpha0)
        .with_meta("t1_input", t1);
    if let Some(len) = pulse_length {
        let bandwidth = 1.0 / len;
        trace = trace.with_meta("pulse_bandwidth_hz", bandwidth);
        if bandwidth >= chi_hz {
            log::warn!("selective pulse bandwidth {bandwidth:.3e} Hz >= |chi|/2pi {chi_hz:.3e} Hz");
            trace = trace.with_meta("selectivity_warning", "pulse bandwidth >= |chi|/2pi");
        }
    }
    Ok(trace)
}

/// Slow validation path for the selective pulse: a Gaussian pi pulse
/// (standard deviation `sigma`, truncated at +/-3 sigma) resonant with the
/// zero-photon qubit line, integrated as piecewise-constant unitaries on
/// the qubit-cavity space. Returns the flipped population when the cavity
/// starts in `|alpha>`.
pub fn selective_flip_driven(sys: &DispersiveSystem, qubit: &str, cavity: &str, alpha: f64, sigma: f64) -> Result<f64> {
    if !(sigma > 0.0) {
        return Err(Error::InvalidParameter("pulse sigma must be > 0".into()));
    }
    let q = sys.require(qubit)?;
    let c = sys.require(cavity)?;
    let sub = sys.subsystem(&[q, c])?.with_dim(0, 2)?;
    let space = sub.space();
    let h0 = build_hamiltonian(&sub, &sub.mode_frame())?;
    let a = ladder(&space, 0)?;
    let x = &a + &a.adjoint();
    let mut qv = CVector::zeros(2);
    qv[0] = C64::new(1.0, 0.0);
    let cav = coherent_amplitudes(space.dims()[1], C64::new(alpha, 0.0))?;
    let mut psi = State::product(space.clone(), &[qv, cav])?;
    // amplitude normalised so the truncated envelope has area pi
    let slices = 400;
    let total = 6.0 * sigma;
    let dt = total / slices as f64;
    let env = |t: f64| (-(t - 3.0 * sigma).powi(2) / (2.0 * sigma * sigma)).exp();
    let area: f64 = (0..slices).map(|k| env((k as f64 + 0.5) * dt) * dt).sum();
    let omega0 = PI / area;
    for k in 0..slices {
        let rabi = omega0 * env((k as f64 + 0.5) * dt);
        let h = &h0 + &x.scale_real(rabi / 2.0);
        let u: CMatrix = (h.matrix() * C64::new(0.0, -dt)).exp();
        psi = psi.transform(&Operator::new(space.clone(), u)?);
    }
    excited_population(&psi, 0)
}

/// Result of [`sim_stark_slopes`]. Slopes are in rad/s per unit power; the
/// ratio is `None` when the storage slope vanishes.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct StarkSlopes {
    pub slope_q: f64,
    pub slope_mu: f64,
    pub ratio: Option<f64>,
    pub trace: TraceSeries,
}

/// AC Stark shifts from a tone `drive_detuning` (rad/s) away from the
/// readout mode. The steady-state readout population is taken as
/// `P / (drive_detuning^2 + (kappa_r/2)^2)` in arbitrary units; the qubit
/// shifts by `-chi_qr n` and the storage mode by `-chi_rmu n`. Slopes come
/// from straight-line fits to the shifts.
pub fn sim_stark_slopes(
    powers: &[f64],
    kappa_r: f64,
    chi_qr: f64,
    chi_rmu: f64,
    drive_detuning: f64,
) -> Result<StarkSlopes> {
    if powers.len() < 2 || powers.iter().any(|p| !(*p > 0.0)) {
        return Err(Error::InvalidParameter("need at least two positive powers".into()));
    }
    if !(kappa_r >= 0.0) {
        return Err(Error::NegativeRate(kappa_r));
    }
    let denom = drive_detuning.powi(2) + (kappa_r / 2.0).powi(2);
    if denom == 0.0 {
        return Err(Error::Unbounded("resonant drive with zero readout linewidth".into()));
    }
    let nbar: Vec<f64> = powers.iter().map(|p| p / denom).collect();
    let shift_q: Vec<f64> = nbar.iter().map(|n| -chi_qr * n).collect();
    let shift_mu: Vec<f64> = nbar.iter().map(|n| -chi_rmu * n).collect();
    let slope_q = fitting::fit_line(powers, &shift_q)?.value("slope").expect("line has slope");
    let slope_mu = fitting::fit_line(powers, &shift_mu)?.value("slope").expect("line has slope");
    let ratio = (slope_mu != 0.0).then(|| slope_q / slope_mu);
    let to_hz = |v: &[f64]| v.iter().map(|w| w / (2.0 * PI)).collect::<Vec<_>>();
    let trace = TraceSeries::new("stark_slope", powers.to_vec(), to_hz(&shift_q), "au", Quantity::Shift)?
        .with_column("storage_shift", to_hz(&shift_mu))?
        .with_meta("kappa_r", kappa_r)
        .with_meta("drive_detuning_hz", drive_detuning / (2.0 * PI));
    Ok(StarkSlopes { slope_q, slope_mu, ratio, trace })
}

/// Quality factor `w T1`.
pub fn q_from_lifetime(omega: f64, t1: f64) -> Result<f64> {
    if !(omega > 0.0) || !(t1 >= 0.0) {
        return Err(Error::InvalidParameter(format!("need omega > 0 and T1 >= 0 (omega = {omega}, T1 = {t1})")));
    }
    Ok(omega * t1)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::ModeSpec;
    use crate::units::hz_to_angular;

    fn qubit_only(t1: f64, t2: Option<f64>, t2e: Option<f64>) -> DispersiveSystem {
        let mut m = ModeSpec::new("qubit", hz_to_angular(7.3514e9), 2).with_t1(t1);
        m.t2 = t2;
        m.t2_echo = t2e;
        DispersiveSystem::new(vec![m]).unwrap()
    }

    fn linspace(a: f64, b: f64, n: usize) -> Vec<f64> {
        Grid::new(a, b, n).unwrap().values()
    }

    #[test]
    fn t1_trace_is_exponential() {
        let sys = qubit_only(6.4e-6, None, None);
        let grid = linspace(0.0, 30e-6, 40);
        let tr = sim_t1(&sys, "qubit", &grid).unwrap();
        for (t, v) in grid.iter().zip(tr.values()) {
            assert!((v - (-t / 6.4e-6).exp()).abs() < 1e-6);
        }
    }

    #[test]
    fn t1_infinite_is_flat() {
        let sys = qubit_only(f64::INFINITY, None, None);
        let tr = sim_t1(&sys, "qubit", &linspace(0.0, 1e-5, 16)).unwrap();
        assert!(tr.values().iter().all(|v| (v - 1.0).abs() < 1e-12));
    }

    #[test]
    fn t1_thermal_steady_state() {
        let m = ModeSpec::new("qubit", 1.0, 2).with_t1(1e-6).with_thermal(0.03);
        let sys = DispersiveSystem::new(vec![m]).unwrap();
        let tr = sim_t1(&sys, "qubit", &linspace(0.0, 40e-6, 16)).unwrap();
        let last = *tr.values().last().unwrap();
        assert!((last - 0.03 / 1.06).abs() < 1e-4, "{last}");
    }

    #[test]
    fn t1_missing_is_error() {
        let sys = DispersiveSystem::new(vec![ModeSpec::new("qubit", 1.0, 2)]).unwrap();
        assert!(matches!(sim_t1(&sys, "qubit", &linspace(0.0, 1.0, 16)), Err(Error::MissingParameter(_))));
    }

    #[test]
    fn ramsey_matches_bloch_oracle() {
        let sys = qubit_only(6.4e-6, Some(9.5e-6), None);
        let grid = linspace(0.0, 20e-6, 60);
        let tr = sim_ramsey(&sys, "qubit", 400e3, &grid, false).unwrap();
        for (t, v) in grid.iter().zip(tr.values()) {
            let oracle = 0.5 * (1.0 + (-t / 9.5e-6).exp() * (2.0 * PI * 400e3 * t).cos());
            assert!((v - oracle).abs() < 1e-6, "t={t} {v} vs {oracle}");
        }
    }

    #[test]
    fn echo_matches_bloch_oracle() {
        let sys = qubit_only(6.4e-6, Some(9.5e-6), Some(11.7e-6));
        let grid = linspace(0.0, 20e-6, 40);
        let tr = sim_ramsey(&sys, "qubit", 300e3, &grid, true).unwrap();
        for (t, v) in grid.iter().zip(tr.values()) {
            let oracle = 0.5 * (1.0 - (-t / 11.7e-6).exp() * (2.0 * PI * 300e3 * t).cos());
            assert!((v - oracle).abs() < 1e-6, "t={t} {v} vs {oracle}");
        }
    }

    #[test]
    fn ramsey_without_detuning_or_decay_is_constant() {
        let sys = qubit_only(f64::INFINITY, None, None);
        let mut sys2 = sys.clone();
        sys2 = sys2.with_mode(0, |m| m.t2 = Some(f64::INFINITY)).unwrap();
        let tr = sim_ramsey(&sys2, "qubit", 0.0, &linspace(0.0, 1e-5, 16), false).unwrap();
        assert!(tr.values().iter().all(|v| (v - 1.0).abs() < 1e-12));
    }

    #[test]
    fn ramsey_rejects_t2_above_bound() {
        let m = ModeSpec::new("qubit", 1.0, 2).with_t1(1e-6).with_t2(3e-6);
        assert!(matches!(DispersiveSystem::new(vec![m]), Err(Error::DephasingBound { .. })));
    }

    fn qubit_cavity(dim: usize) -> DispersiveSystem {
        DispersiveSystem::new(vec![
            ModeSpec::new("qubit", hz_to_angular(7.3514e9), 2).with_t1(6.4e-6).with_t2(9.5e-6),
            ModeSpec::new("storage", hz_to_angular(9.3772e9), dim).with_t1(34.3e-6),
        ])
        .unwrap()
        .with_chi("qubit", "storage", hz_to_angular(-1.17e6))
        .unwrap()
    }

    #[test]
    fn number_weights_poisson() {
        let w = displaced_number_weights(30, 3f64.sqrt()).unwrap();
        let mut p = (-3.0f64).exp();
        for (n, wn) in w.iter().enumerate().take(10) {
            if n > 0 {
                p *= 3.0 / n as f64;
            }
            assert!((wn - p).abs() < 1e-3, "n={n}");
        }
        let argmax = w.iter().enumerate().max_by(|a, b| a.1.total_cmp(b.1)).unwrap().0;
        assert!(argmax == 2 || argmax == 3);
        assert!((w.iter().sum::<f64>() - 1.0).abs() < 1e-9);
    }

    #[test]
    fn number_splitting_vacuum_single_peak() {
        let sys = qubit_cavity(10);
        let grid = linspace(-1e6, 6e6, 700);
        let tr = sim_number_splitting(&sys, "qubit", "storage", 0.0, &grid).unwrap();
        assert_eq!(tr.meta()["n_peaks"], "1");
        let imax = tr.values().iter().enumerate().max_by(|a, b| a.1.total_cmp(b.1)).unwrap().0;
        assert!(grid[imax].abs() <= 1e4);
    }

    #[test]
    fn number_splitting_peaks_at_chi_multiples() {
        let sys = qubit_cavity(20);
        let grid = linspace(-1e6, 7e6, 1601);
        let tr = sim_number_splitting(&sys, "qubit", "storage", 1.0, &grid).unwrap();
        // value at the n-th centre is dominated by P(n)
        for n in 0..3 {
            let f = 1.17e6 * n as f64;
            let i = grid.iter().position(|g| (g - f).abs() < 2.6e3).unwrap();
            let p = (-1.0f64).exp() / (1..=n).map(|k| k as f64).product::<f64>();
            assert!((tr.values()[i] - p).abs() < 2e-3, "n={n}");
        }
    }

    #[test]
    fn probe_response_matches_bloch_steady_state() {
        let sys = qubit_cavity(6);
        let (t1, t2) = (6.4e-6, 9.5e-6);
        let rabi = 2.0 * PI * 5e3;
        for (n, det) in [(0usize, 0.0), (1, 1.17e6), (1, 1.17e6 + 20e3), (2, 2.34e6 - 10e3)] {
            let p = probe_response(&sys, "qubit", "storage", n, det, rabi, 200e-6).unwrap();
            let delta = 2.0 * PI * (det - 1.17e6 * n as f64);
            let s = rabi * rabi * t1 * t2;
            let oracle = 0.5 * s / (1.0 + s + delta * delta * t2 * t2);
            assert!((p - oracle).abs() < 1e-4 * oracle.max(1e-3), "n={n} det={det}: {p} vs {oracle}");
        }
    }

    #[test]
    fn revival_oracle() {
        let sys = qubit_cavity(30);
        let period = 1.0 / 1.17e6;
        let grid = linspace(0.0, 2.0 * period, 201);
        let tr = sim_revival(&sys, "qubit", "storage", 3f64.sqrt(), &grid, false).unwrap();
        for (t, v) in grid.iter().zip(tr.values()) {
            let oracle = (3.0 * ((2.0 * PI * 1.17e6 * t).cos() - 1.0)).exp();
            assert!((v - oracle).abs() < 1e-6, "t={t}");
        }
    }

    #[test]
    fn revival_vacuum_is_constant() {
        let sys = qubit_cavity(10);
        let tr = sim_revival(&sys, "qubit", "storage", 0.0, &linspace(0.0, 2e-6, 32), false).unwrap();
        assert!(tr.values().iter().all(|v| (v - 1.0).abs() < 1e-12));
    }

    #[test]
    fn cavity_decay_closed_form() {
        let sys = qubit_cavity(20);
        let grid = linspace(0.0, 150e-6, 31);
        let tr = sim_cavity_decay(&sys, "qubit", "storage", 3f64.sqrt(), &grid, Some(2e-6)).unwrap();
        for (t, v) in grid.iter().zip(tr.values()) {
            let oracle = (-3.0 * (-t / 34.3e-6).exp()).exp();
            assert!((v - oracle).abs() < 1e-3, "t={t}");
        }
        assert!(!tr.meta().contains_key("selectivity_warning"));
        let fast = sim_cavity_decay(&sys, "qubit", "storage", 1.0, &grid, Some(0.5e-6)).unwrap();
        assert!(fast.meta().contains_key("selectivity_warning"));
        let empty = sim_cavity_decay(&sys, "qubit", "storage", 0.0, &grid, None).unwrap();
        assert!(empty.values().iter().all(|v| (v - 1.0).abs() < 1e-9));
    }

    #[test]
    fn driven_selective_flip_tracks_vacuum_probability() {
        let sys = qubit_cavity(12);
        let p = selective_flip_driven(&sys, "qubit", "storage", 1.0, 0.6e-6).unwrap();
        let p0 = (-1.0f64).exp();
        assert!((p - p0).abs() < 5e-3, "{p} vs {p0}");
    }

    #[test]
    fn stark_ratio_and_linearity() {
        let powers: Vec<f64> = (1..=16).map(|p| p as f64).collect();
        let k = 1.0 / 1e-6;
        let chi_qr = hz_to_angular(-3.84e6);
        let chi_rmu = hz_to_angular(-20e3);
        let s = sim_stark_slopes(&powers, k, chi_qr, chi_rmu, hz_to_angular(3e6)).unwrap();
        assert!((s.ratio.unwrap() - 192.0).abs() < 1e-9);
        let doubled: Vec<f64> = powers.iter().map(|p| 2.0 * p).collect();
        let s2 = sim_stark_slopes(&doubled, k, chi_qr, chi_rmu, hz_to_angular(3e6)).unwrap();
        assert!((s2.ratio.unwrap() - s.ratio.unwrap()).abs() < 1e-9);
        let z = sim_stark_slopes(&powers, k, chi_qr, 0.0, hz_to_angular(3e6)).unwrap();
        assert_eq!(z.slope_mu, 0.0);
        assert!(z.ratio.is_none());
    }

    #[test]
    fn q_lifetime_values() {
        let q = q_from_lifetime(hz_to_angular(9.3772e9), 34.3e-6).unwrap();
        assert!((q / 2.02e6 - 1.0).abs() < 0.005);
        assert_eq!(q_from_lifetime(1.0, 0.0).unwrap(), 0.0);
        let qr = q_from_lifetime(hz_to_angular(6.9734e9), 1.0e-6).unwrap();
        assert!((qr / 4.38e4 - 1.0).abs() < 0.002);
    }

    #[test]
    fn csv_round_trip() {
        let tr = TraceSeries::new(
            "t1_decay",
            vec![0.0, 1e-6, 2.5e-6],
            vec![1.0, 0.5, 0.1 + 1e-17],
            "s",
            Quantity::Population,
        )
        .unwrap()
        .with_meta("mode", "qubit")
        .with_column("aux", vec![1.0, 2.0, 3.0])
        .unwrap();
        let back = TraceSeries::from_csv(&tr.to_csv()).unwrap();
        assert_eq!(back, tr);
    }

    #[test]
    fn csv_errors_carry_line_numbers() {
        let err = TraceSeries::from_csv("# a: b\nx,value\n0,1\n1,oops\n").unwrap_err();
        assert!(err.to_string().contains("line 4"), "{err}");
        let err = TraceSeries::from_csv("t,y\n0,1\n").unwrap_err();
        assert!(err.to_string().contains("line 1"));
        let err = TraceSeries::from_csv("x,value\n0,1,2\n").unwrap_err();
        assert!(err.to_string().contains("line 2"));
    }

    #[test]
    fn trace_validation() {
        assert!(TraceSeries::new("p", vec![0.0, 0.0], vec![0.1, 0.2], "s", Quantity::Signal).is_err());
        assert!(TraceSeries::new("p", vec![0.0, 1.0], vec![0.1, 1.1], "s", Quantity::Population).is_err());
        assert!(TraceSeries::new("p", vec![0.0, 1.0], vec![0.1, 1.1], "s", Quantity::Signal).is_ok());
    }

    #[test]
    fn protocol_names_round_trip() {
        for p in Protocol::ALL {
            assert_eq!(p.name().parse::<Protocol>().unwrap(), p);
        }
        let err = "rabi".parse::<Protocol>().unwrap_err().to_string();
        assert!(err.contains("t1_decay") && err.contains("stark_slope"));
    }

    #[test]
    fn grid_validation() {
        assert!(Grid::new(0.0, 1.0, 15).is_err());
        assert!(Grid::new(1.0, 1.0, 20).is_err());
        let g = Grid::new(0.0, 1.5, 16).unwrap();
        assert_eq!(g.values().len(), 16);
        assert_eq!(*g.values().last().unwrap(), 1.5);
    }
}
