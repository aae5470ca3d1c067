//! Run configuration: a TOML file with unit-suffixed quantities and strict
//! key checking. See `configs/default.toml` for the full layout.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::de::Error as _;
use serde::{Deserialize, Deserializer};

use cqed_core::budget::{ExtraChannel, SeamSpec};
use cqed_core::circuit::{ej_from_lj, CapacitanceNetwork, DispersiveSystem, ModeSpec, TransmonParams};
use cqed_core::experiments::{Grid, Protocol, ProtocolConfig};
use cqed_core::units::hz_to_angular;

use crate::units::{parse_as, Dim};
use crate::CliError;

/// The configuration bundled with the binary.
pub const DEFAULT_CONFIG: &str = include_str!("../configs/default.toml");

/// A TOML scalar: numbers are dimensionless, strings carry a unit suffix.
#[derive(Clone, Debug, Deserialize, PartialEq)]
#[serde(untagged)]
pub enum Scalar {
    Number(f64),
    Text(String),
}

impl Scalar {
    pub fn to_si(&self, dim: Dim) -> Result<f64, String> {
        match self {
            Scalar::Number(v) if dim == Dim::Dimensionless => Ok(*v),
            Scalar::Number(v) => Err(format!("{v} needs a unit suffix: expected a {dim}")),
            Scalar::Text(s) => parse_as(s, dim),
        }
    }
}

macro_rules! quantity {
    ($req:ident, $opt:ident, $dim:expr) => {
        #[allow(dead_code)]
        fn $req<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
            Scalar::deserialize(d)?.to_si($dim).map_err(D::Error::custom)
        }

        #[allow(dead_code)]
        fn $opt<'de, D: Deserializer<'de>>(d: D) -> Result<Option<f64>, D::Error> {
            Option::<Scalar>::deserialize(d)?.map(|s| s.to_si($dim)).transpose().map_err(D::Error::custom)
        }
    };
}

quantity!(time, opt_time, Dim::Time);
quantity!(freq, opt_freq, Dim::Frequency);
quantity!(cap, opt_cap, Dim::Capacitance);
quantity!(ind, opt_ind, Dim::Inductance);
quantity!(cond, opt_cond, Dim::ConductancePerLength);
quantity!(rate, opt_rate, Dim::Rate);

fn cond_map<'de, D: Deserializer<'de>>(d: D) -> Result<BTreeMap<String, f64>, D::Error> {
    BTreeMap::<String, Scalar>::deserialize(d)?
        .into_iter()
        .map(|(k, s)| s.to_si(Dim::ConductancePerLength).map(|v| (k, v)))
        .collect::<Result<_, _>>()
        .map_err(D::Error::custom)
}

fn freq_map<'de, D: Deserializer<'de>>(d: D) -> Result<BTreeMap<String, f64>, D::Error> {
    BTreeMap::<String, Scalar>::deserialize(d)?
        .into_iter()
        .map(|(k, s)| s.to_si(Dim::Frequency).map(|v| (k, v)))
        .collect::<Result<_, _>>()
        .map_err(D::Error::custom)
}

#[derive(Clone, Debug, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub output_dir: Option<PathBuf>,
    /// Base seed for noise generators; `--seed` overrides it.
    pub seed: Option<u64>,
    pub device: Option<DeviceConfig>,
    pub circuit: Option<CircuitConfig>,
    #[serde(default)]
    pub seams: Vec<SeamConfig>,
    pub budget: Option<BudgetConfig>,
    #[serde(default)]
    pub protocols: Vec<ProtocolEntry>,
}

/// Mode parameters in Hz (f/2π) and seconds.
#[derive(Clone, Debug, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct DeviceConfig {
    pub modes: Vec<ModeConfig>,
    #[serde(default)]
    pub chi: Vec<ChiConfig>,
}

#[derive(Clone, Debug, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct ModeConfig {
    pub label: String,
    #[serde(deserialize_with = "freq")]
    pub frequency: f64,
    pub dim: usize,
    #[serde(default, deserialize_with = "opt_freq")]
    pub anharmonicity: Option<f64>,
    #[serde(default, deserialize_with = "opt_time")]
    pub t1: Option<f64>,
    #[serde(default, deserialize_with = "opt_time")]
    pub t2: Option<f64>,
    #[serde(default, deserialize_with = "opt_time")]
    pub t2_echo: Option<f64>,
    #[serde(default)]
    pub n_thermal: f64,
}

#[derive(Clone, Debug, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct ChiConfig {
    pub modes: [String; 2],
    #[serde(deserialize_with = "freq")]
    pub value: f64,
}

/// Every field is optional at parse time so that missing ones can be
/// reported together.
#[derive(Clone, Debug, Default, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct CircuitConfig {
    pub qubit: Option<String>,
    #[serde(default, deserialize_with = "opt_freq")]
    pub e_j: Option<f64>,
    #[serde(default, deserialize_with = "opt_ind")]
    pub l_j: Option<f64>,
    #[serde(default, deserialize_with = "opt_freq")]
    pub e_c: Option<f64>,
    #[serde(default)]
    pub n_g: f64,
    pub charge_cutoff: Option<usize>,
    #[serde(default)]
    pub couplers: Vec<CouplerConfig>,
}

/// Capacitive divider between the transmon and one cavity.
#[derive(Clone, Debug, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct CouplerConfig {
    pub cavity: String,
    #[serde(deserialize_with = "cap")]
    pub c_g: f64,
    #[serde(deserialize_with = "cap")]
    pub c_p: f64,
    #[serde(deserialize_with = "cap")]
    pub c_j: f64,
    #[serde(deserialize_with = "cap")]
    pub c: f64,
    /// Defaults to the value that puts `1/sqrt(LC)` on the device frequency.
    #[serde(default, deserialize_with = "opt_ind")]
    pub l: Option<f64>,
}

#[derive(Clone, Debug, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct SeamConfig {
    pub label: String,
    #[serde(deserialize_with = "cond")]
    pub g: f64,
    #[serde(deserialize_with = "cond_map")]
    pub y: BTreeMap<String, f64>,
    #[serde(default = "yes")]
    pub active: bool,
}

fn yes() -> bool {
    true
}

#[derive(Clone, Debug, Default, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct BudgetConfig {
    /// Mode frequencies for the seam limits; missing modes fall back to the
    /// device section.
    #[serde(default, deserialize_with = "freq_map")]
    pub frequencies: BTreeMap<String, f64>,
    #[serde(default)]
    pub channels: Vec<ChannelConfig>,
    pub purcell: Option<PurcellConfig>,
}

#[derive(Clone, Debug, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct ChannelConfig {
    pub label: String,
    pub mode: String,
    #[serde(deserialize_with = "time")]
    pub t1: f64,
}

/// Single-mode Purcell estimate of `mode` decaying through `readout`.
#[derive(Clone, Debug, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct PurcellConfig {
    pub mode: String,
    pub readout: String,
    /// g/2π; defaults to the coupler design value for `readout`.
    #[serde(default, deserialize_with = "opt_freq")]
    pub g: Option<f64>,
    /// Readout energy decay rate; defaults to 1/T1 of the readout mode.
    #[serde(default, deserialize_with = "opt_rate")]
    pub kappa: Option<f64>,
}

#[derive(Clone, Debug, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    pub start: Scalar,
    pub stop: Scalar,
    pub points: usize,
}

#[derive(Clone, Debug, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct ProtocolEntry {
    pub name: String,
    /// Protocol type; defaults to `name`.
    pub kind: Option<String>,
    #[serde(default = "default_qubit")]
    pub qubit: String,
    pub cavity: Option<String>,
    pub readout: Option<String>,
    #[serde(default, deserialize_with = "opt_freq")]
    pub detuning: Option<f64>,
    pub grid: GridConfig,
    #[serde(default)]
    pub alpha: f64,
    #[serde(default)]
    pub decoherence: bool,
    #[serde(default, deserialize_with = "opt_time")]
    pub pulse_length: Option<f64>,
    pub n_peaks: Option<usize>,
    #[serde(default, deserialize_with = "opt_rate")]
    pub kappa_r: Option<f64>,
    #[serde(default, deserialize_with = "opt_freq")]
    pub drive_detuning: Option<f64>,
    #[serde(default)]
    pub noise: f64,
}

fn default_qubit() -> String {
    "qubit".into()
}

impl RunConfig {
    pub fn parse(text: &str) -> Result<Self, CliError> {
        toml::from_str(text).map_err(|e| CliError::Input(format!("config: {e}")))
    }

    /// Reads `path`, or the bundled configuration when `path` is `None`.
    pub fn load(path: Option<&Path>) -> Result<Self, CliError> {
        match path {
            None => Self::parse(DEFAULT_CONFIG),
            Some(p) => {
                let text =
                    std::fs::read_to_string(p).map_err(|source| CliError::Io { path: p.to_path_buf(), source })?;
                Self::parse(&text).map_err(|e| CliError::Input(format!("{}: {e}", p.display())))
            }
        }
    }

    fn section<'a, T>(&self, name: &str, s: &'a Option<T>) -> Result<&'a T, CliError> {
        s.as_ref().ok_or_else(|| CliError::Input(format!("config has no [{name}] section")))
    }

    /// Dispersive system with frequencies and couplings converted to rad/s.
    pub fn system(&self) -> Result<DispersiveSystem, CliError> {
        let dev = self.section("device", &self.device)?;
        if dev.modes.is_empty() {
            return Err(CliError::Input("[device] lists no modes".into()));
        }
        let modes = dev
            .modes
            .iter()
            .map(|m| {
                let mut spec = ModeSpec::new(&m.label, hz_to_angular(m.frequency), m.dim)
                    .with_anharmonicity(hz_to_angular(m.anharmonicity.unwrap_or(0.0)))
                    .with_thermal(m.n_thermal);
                spec.t1 = m.t1;
                spec.t2 = m.t2;
                spec.t2_echo = m.t2_echo;
                spec
            })
            .collect();
        let mut sys = DispersiveSystem::new(modes)?;
        for c in &dev.chi {
            sys = sys.with_chi(&c.modes[0], &c.modes[1], hz_to_angular(c.value))?;
        }
        Ok(sys)
    }

    /// Device frequency of `label` in Hz.
    pub fn mode_frequency(&self, label: &str) -> Option<f64> {
        self.device.as_ref()?.modes.iter().find(|m| m.label == label).map(|m| m.frequency)
    }

    pub fn mode(&self, label: &str) -> Option<&ModeConfig> {
        self.device.as_ref()?.modes.iter().find(|m| m.label == label)
    }

    pub fn circuit(&self) -> Result<ResolvedCircuit, CliError> {
        let c = self.section("circuit", &self.circuit)?;
        let mut missing = Vec::new();
        if c.e_j.is_none() && c.l_j.is_none() {
            missing.push("e_j (or l_j)");
        }
        if c.e_c.is_none() {
            missing.push("e_c");
        }
        if c.couplers.is_empty() {
            missing.push("couplers");
        }
        if !missing.is_empty() {
            return Err(CliError::Input(format!("[circuit] is missing: {}", missing.join(", "))));
        }
        let qubit = c.qubit.clone().unwrap_or_else(default_qubit);
        let e_j = match (c.e_j, c.l_j) {
            (Some(e), None) => e,
            (None, Some(l)) => ej_from_lj(l)?,
            _ => return Err(CliError::Input("[circuit] give either e_j or l_j, not both".into())),
        };
        let e_c = c.e_c.expect("checked above");
        let mut transmon = TransmonParams::new(e_j, e_c, c.n_g)?;
        if let Some(cut) = c.charge_cutoff {
            transmon = transmon.with_cutoff(cut)?;
        }
        // Junction inductance (Phi0/2pi)^2 / (h E_J); only enters the network
        // record, not g.
        let l_j = c.l_j.unwrap_or_else(|| {
            let phi = cqed_core::units::FLUX_QUANTUM / (2.0 * std::f64::consts::PI);
            phi * phi / (cqed_core::units::PLANCK * e_j)
        });
        let mut couplers = Vec::with_capacity(c.couplers.len());
        for cp in &c.couplers {
            let l = match cp.l {
                Some(l) => l,
                None => {
                    let f = self.mode_frequency(&cp.cavity).ok_or_else(|| {
                        CliError::Input(format!(
                            "coupler for {:?}: give l or list the cavity under [device]",
                            cp.cavity
                        ))
                    })?;
                    let w = hz_to_angular(f);
                    1.0 / (w * w * cp.c)
                }
            };
            let net = CapacitanceNetwork::new(cp.c_g, cp.c_p, cp.c_j, cp.c, l, l_j)?;
            couplers.push((cp.cavity.clone(), net));
        }
        Ok(ResolvedCircuit { qubit, transmon, couplers })
    }

    pub fn seams(&self) -> Result<Vec<SeamSpec>, CliError> {
        self.seams
            .iter()
            .map(|s| {
                let spec = SeamSpec::new(&s.label, s.g, s.y.clone())?;
                Ok(if s.active { spec } else { spec.inactive() })
            })
            .collect()
    }

    pub fn extra_channels(&self) -> Vec<ExtraChannel> {
        self.budget
            .iter()
            .flat_map(|b| &b.channels)
            .map(|c| ExtraChannel { label: c.label.clone(), mode: c.mode.clone(), t1_limit: c.t1 })
            .collect()
    }

    pub fn protocol_names(&self) -> Vec<&str> {
        self.protocols.iter().map(|p| p.name.as_str()).collect()
    }

    /// Converts every protocol entry, in file order.
    pub fn protocols(&self) -> Result<Vec<ProtocolConfig>, CliError> {
        let mut seen = std::collections::BTreeSet::new();
        for p in &self.protocols {
            if !seen.insert(p.name.as_str()) {
                return Err(CliError::Input(format!("protocol name {:?} appears twice", p.name)));
            }
        }
        self.protocols.iter().map(|p| p.resolve()).collect()
    }
}

impl ProtocolEntry {
    pub fn resolve(&self) -> Result<ProtocolConfig, CliError> {
        let kind: Protocol = self.kind.as_deref().unwrap_or(&self.name).parse()?;
        let dim = match kind {
            Protocol::NumberSplitting => Dim::Frequency,
            Protocol::StarkSlope => Dim::Dimensionless,
            _ => Dim::Time,
        };
        let bound = |s: &Scalar, which: &str| {
            s.to_si(dim).map_err(|e| CliError::Input(format!("protocol {:?}: grid.{which}: {e}", self.name)))
        };
        let grid = Grid::new(bound(&self.grid.start, "start")?, bound(&self.grid.stop, "stop")?, self.grid.points)
            .map_err(|e| CliError::Input(format!("protocol {:?}: {e}", self.name)))?;
        let mut cfg = ProtocolConfig::new(&self.name, kind, &self.qubit, grid);
        cfg.cavity = self.cavity.clone();
        cfg.readout = self.readout.clone();
        cfg.detuning = self.detuning.unwrap_or(0.0);
        cfg.alpha = self.alpha;
        cfg.decoherence = self.decoherence;
        cfg.pulse_length = self.pulse_length;
        cfg.n_peaks = self.n_peaks;
        cfg.kappa_r = self.kappa_r;
        cfg.drive_detuning = self.drive_detuning.unwrap_or(0.0);
        cfg.noise = self.noise;
        cfg.validate().map_err(|e| CliError::Input(e.to_string()))?;
        Ok(cfg)
    }
}

/// Circuit section with defaults filled in and networks built.
#[derive(Clone, Debug)]
pub struct ResolvedCircuit {
    pub qubit: String,
    pub transmon: TransmonParams,
    pub couplers: Vec<(String, CapacitanceNetwork)>,
}
