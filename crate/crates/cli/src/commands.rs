use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::Serialize;

use cqed_core::budget::{budget_report, purcell_t1_estimate, BudgetReport, ExtraChannel};
use cqed_core::circuit::{
    beta, chi_from_g, chi_from_g_transmon, coupling_g, g_from_chi, transmon_spectrum, zero_point_voltage,
    TransmonParams,
};
use cqed_core::experiments::{run_protocol, Protocol, ProtocolConfig, TraceSeries};
use cqed_core::fitting::{fit_named, FitResult, MODELS};
use cqed_core::units::{angular_to_hz, hz_to_angular};
use cqed_core::{sweep, verify};

use crate::config::RunConfig;
use crate::CliError;

/// Flags shared by every verb.
#[derive(Clone, Debug, Default)]
pub struct Options {
    pub config: Option<PathBuf>,
    pub out: Option<PathBuf>,
    pub seed: Option<u64>,
    /// Worker threads; 0 uses the default pool.
    pub jobs: usize,
}

impl Options {
    pub fn load(&self) -> Result<RunConfig, CliError> {
        RunConfig::load(self.config.as_deref())
    }

    fn out_dir(&self, cfg: &RunConfig) -> Result<PathBuf, CliError> {
        let dir = self.out.clone().or_else(|| cfg.output_dir.clone()).unwrap_or_else(|| PathBuf::from("out"));
        std::fs::create_dir_all(&dir).map_err(|source| CliError::Io { path: dir.clone(), source })?;
        Ok(dir)
    }
}

fn write_file(path: &Path, contents: &str) -> Result<(), CliError> {
    std::fs::write(path, contents).map_err(|source| CliError::Io { path: path.to_path_buf(), source })
}

fn to_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("report types serialise");
    s.push('\n');
    s
}

// ---------------------------------------------------------------------------
// design

#[derive(Clone, Debug, Serialize)]
pub struct TransmonReport {
    pub e_j_hz: f64,
    pub e_c_hz: f64,
    pub ej_over_ec: f64,
    pub transmon_regime: bool,
    pub charge_cutoff: usize,
    pub f01_hz: f64,
    pub anharmonicity_hz: f64,
    /// `sqrt(8 E_J E_C) - E_C`.
    pub asymptotic_f01_hz: f64,
    /// Spread of `f_01` between offset charge 0 and 1/2.
    pub charge_dispersion_hz: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct CouplerReport {
    pub cavity: String,
    pub beta: f64,
    pub v0_volts: f64,
    pub g_hz: f64,
    pub cavity_frequency_hz: f64,
    /// Qubit minus cavity; the qubit frequency is the device value when the
    /// device section lists it, otherwise the diagonalised `f_01`.
    pub detuning_hz: f64,
    pub chi_two_level_hz: f64,
    pub chi_transmon_hz: f64,
    pub measured_chi_hz: Option<f64>,
    pub g_from_measured_chi_hz: Option<f64>,
}

#[derive(Clone, Debug, Serialize)]
pub struct DesignReport {
    pub qubit: String,
    pub qubit_frequency_hz: f64,
    pub transmon: TransmonReport,
    pub couplers: Vec<CouplerReport>,
}

pub fn design_report(cfg: &RunConfig) -> Result<DesignReport, CliError> {
    let circuit = cfg.circuit()?;
    let p = circuit.transmon;
    let spec = transmon_spectrum(&p)?;
    let half = TransmonParams { n_g: p.n_g + 0.5, ..p };
    let dispersion = (transmon_spectrum(&half)?.omega01() - spec.omega01()).abs();
    let transmon = TransmonReport {
        e_j_hz: p.e_j,
        e_c_hz: p.e_c,
        ej_over_ec: p.ej_over_ec(),
        transmon_regime: p.transmon_regime(),
        charge_cutoff: spec.cutoff,
        f01_hz: spec.omega01(),
        anharmonicity_hz: spec.anharmonicity(),
        asymptotic_f01_hz: (8.0 * p.e_j * p.e_c).sqrt() - p.e_c,
        charge_dispersion_hz: dispersion,
    };
    let f_q = cfg.mode_frequency(&circuit.qubit).unwrap_or(spec.omega01());
    let system = cfg.device.as_ref().map(|_| cfg.system()).transpose()?;
    let mut couplers = Vec::new();
    for (cavity, net) in &circuit.couplers {
        let g = angular_to_hz(coupling_g(net));
        let f_c = angular_to_hz(net.cavity_omega());
        let delta = f_q - f_c;
        let measured = system.as_ref().and_then(|s| {
            let (q, c) = (s.index_of(&circuit.qubit)?, s.index_of(cavity)?);
            let chi = s.chi(q, c);
            (chi != 0.0).then(|| angular_to_hz(chi))
        });
        couplers.push(CouplerReport {
            cavity: cavity.clone(),
            beta: beta(net),
            v0_volts: zero_point_voltage(net),
            g_hz: g,
            cavity_frequency_hz: f_c,
            detuning_hz: delta,
            chi_two_level_hz: chi_from_g(g, delta)?,
            chi_transmon_hz: chi_from_g_transmon(g, delta, spec.anharmonicity())?,
            measured_chi_hz: measured,
            g_from_measured_chi_hz: measured.map(|chi| g_from_chi(chi, delta)).transpose()?,
        });
    }
    Ok(DesignReport { qubit: circuit.qubit, qubit_frequency_hz: f_q, transmon, couplers })
}

pub fn cmd_design(opts: &Options) -> Result<DesignReport, CliError> {
    let cfg = opts.load()?;
    let report = design_report(&cfg)?;
    let dir = opts.out_dir(&cfg)?;
    write_file(&dir.join("design.json"), &to_json(&report))?;
    let t = &report.transmon;
    println!("E_J/h = {:.4} GHz, E_C/h = {:.2} MHz, E_J/E_C = {:.1}", t.e_j_hz / 1e9, t.e_c_hz / 1e6, t.ej_over_ec);
    println!(
        "f01 = {:.4} GHz (asymptote {:.4} GHz), alpha = {:.2} MHz, charge dispersion = {:.3e} Hz",
        t.f01_hz / 1e9,
        t.asymptotic_f01_hz / 1e9,
        t.anharmonicity_hz / 1e6,
        t.charge_dispersion_hz
    );
    for c in &report.couplers {
        println!(
            "{}: beta = {:.4}, V0 = {:.3} uV, g/2pi = {:.2} MHz, detuning = {:.1} MHz, chi = {:.3} MHz (two-level) / {:.3} MHz (transmon)",
            c.cavity,
            c.beta,
            c.v0_volts * 1e6,
            c.g_hz / 1e6,
            c.detuning_hz / 1e6,
            c.chi_two_level_hz / 1e6,
            c.chi_transmon_hz / 1e6
        );
    }
    Ok(report)
}

// ---------------------------------------------------------------------------
// budget

#[derive(Clone, Debug, Serialize)]
pub struct PurcellReport {
    pub mode: String,
    pub readout: String,
    pub g_hz: f64,
    pub detuning_hz: f64,
    pub kappa_per_s: f64,
    pub t1_limit: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct BudgetOutput {
    #[serde(flatten)]
    pub report: BudgetReport,
    pub purcell: Option<PurcellReport>,
}

fn purcell(cfg: &RunConfig) -> Result<Option<PurcellReport>, CliError> {
    let Some(p) = cfg.budget.as_ref().and_then(|b| b.purcell.as_ref()) else {
        return Ok(None);
    };
    let freq = |label: &str| {
        cfg.mode_frequency(label).ok_or_else(|| CliError::Input(format!("purcell: mode {label:?} is not in [device]")))
    };
    let delta = freq(&p.mode)? - freq(&p.readout)?;
    let g_hz = match p.g {
        Some(g) => g,
        None => {
            let circuit = cfg.circuit()?;
            let net = circuit.couplers.iter().find(|(c, _)| c == &p.readout).map(|(_, n)| n).ok_or_else(|| {
                CliError::Input(format!("purcell: give g or a [[circuit.couplers]] entry for {:?}", p.readout))
            })?;
            angular_to_hz(coupling_g(net))
        }
    };
    let kappa = match p.kappa {
        Some(k) => k,
        None => {
            let t1 = cfg.mode(&p.readout).and_then(|m| m.t1).ok_or_else(|| {
                CliError::Input(format!("purcell: give kappa or a t1 for readout mode {:?}", p.readout))
            })?;
            1.0 / t1
        }
    };
    let t1 = purcell_t1_estimate(hz_to_angular(g_hz), hz_to_angular(delta), kappa)?;
    Ok(Some(PurcellReport {
        mode: p.mode.clone(),
        readout: p.readout.clone(),
        g_hz,
        detuning_hz: delta,
        kappa_per_s: kappa,
        t1_limit: t1,
    }))
}

pub fn budget(cfg: &RunConfig) -> Result<BudgetOutput, CliError> {
    let seams = cfg.seams()?;
    if seams.is_empty() && cfg.budget.is_none() {
        return Err(CliError::Input("config has neither [[seams]] nor [budget]".into()));
    }
    let mut omegas: BTreeMap<String, f64> = BTreeMap::new();
    if let Some(dev) = &cfg.device {
        for m in &dev.modes {
            omegas.insert(m.label.clone(), hz_to_angular(m.frequency));
        }
    }
    if let Some(b) = &cfg.budget {
        for (mode, f) in &b.frequencies {
            omegas.insert(mode.clone(), hz_to_angular(*f));
        }
    }
    let mut extra = cfg.extra_channels();
    let purcell = purcell(cfg)?;
    if let Some(p) = &purcell {
        extra.push(ExtraChannel {
            label: format!("Purcell via {}", p.readout),
            mode: p.mode.clone(),
            t1_limit: p.t1_limit,
        });
    }
    let report = budget_report(&seams, &omegas, &extra)?;
    Ok(BudgetOutput { report, purcell })
}

pub fn cmd_budget(opts: &Options) -> Result<BudgetOutput, CliError> {
    let cfg = opts.load()?;
    let out = budget(&cfg)?;
    let dir = opts.out_dir(&cfg)?;
    let json = to_json(&out);
    write_file(&dir.join("budget.json"), &json)?;
    print!("{json}");
    Ok(out)
}

// ---------------------------------------------------------------------------
// simulate

#[derive(Clone, Debug, Serialize)]
pub struct SimulationRecord {
    pub name: String,
    pub protocol: Protocol,
    pub seed: u64,
    pub trace_file: String,
    pub points: usize,
    pub summary: BTreeMap<String, f64>,
    pub fit: FitResult,
}

/// Runs one named protocol, or every protocol for `"all"`, writing
/// `<name>.csv` and `<name>.json` per run. Independent protocols run
/// concurrently on `opts.jobs` threads.
pub fn cmd_simulate(opts: &Options, name: &str) -> Result<Vec<SimulationRecord>, CliError> {
    let cfg = opts.load()?;
    let protocols = cfg.protocols()?;
    let base_seed = opts.seed.or(cfg.seed).unwrap_or(0);
    // Seeds depend only on the position in the file, never on scheduling.
    let selected: Vec<(u64, &ProtocolConfig)> = protocols
        .iter()
        .enumerate()
        .filter(|(_, p)| name == "all" || p.name == name)
        .map(|(i, p)| (base_seed.wrapping_add(i as u64), p))
        .collect();
    if selected.is_empty() {
        let names = cfg.protocol_names();
        return Err(CliError::Input(format!(
            "unknown protocol {name:?}; available: {}",
            if names.is_empty() { "(none configured)".to_string() } else { names.join(", ") }
        )));
    }
    let system = cfg.system()?;
    let dir = opts.out_dir(&cfg)?;
    let runs = sweep::with_jobs(opts.jobs, || {
        sweep::map(&selected, |(seed, p)| run_protocol(&system, p, *seed).map(|r| (*seed, r)))
    });
    let mut records = Vec::with_capacity(runs.len());
    let mut unconverged = Vec::new();
    for run in runs {
        let (seed, run) = run?;
        let csv = format!("{}.csv", run.name);
        write_file(&dir.join(&csv), &run.trace.to_csv())?;
        let record = SimulationRecord {
            name: run.name.clone(),
            protocol: run.protocol,
            seed,
            trace_file: csv,
            points: run.trace.len(),
            summary: run.summary,
            fit: run.fit,
        };
        write_file(&dir.join(format!("{}.json", record.name)), &to_json(&record))?;
        let headline: Vec<String> = record.summary.iter().map(|(k, v)| format!("{k} = {v:.6e}")).collect();
        println!(
            "{}: model {} {} {}",
            record.name,
            record.fit.model,
            if record.fit.converged { "converged" } else { "NOT converged" },
            headline.join(", ")
        );
        if !record.fit.converged {
            unconverged.push(record.name.clone());
        }
        records.push(record);
    }
    if !unconverged.is_empty() {
        return Err(CliError::NotConverged(unconverged.join(", ")));
    }
    Ok(records)
}

// ---------------------------------------------------------------------------
// fit

fn check_model(model: &str) -> Result<(), CliError> {
    let known = matches!(model, "exponential" | "poissonian_decay" | "damped_fringes" | "revival" | "line")
        || model == "lorentzian_multiplet"
        || model.strip_prefix("lorentzian_multiplet:").is_some_and(|n| n.parse::<usize>().is_ok_and(|n| n > 0));
    if known {
        Ok(())
    } else {
        Err(CliError::Input(format!("unknown model {model:?}; available: {}", MODELS.join(", "))))
    }
}

/// Fits `model` to the trace stored in `path`.
pub fn fit_file(path: &Path, model: &str) -> Result<FitResult, CliError> {
    check_model(model)?;
    let text = std::fs::read_to_string(path).map_err(|source| CliError::Io { path: path.to_path_buf(), source })?;
    let trace = TraceSeries::from_csv(&text).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
    Ok(fit_named(model, trace.x(), trace.values())?.with_x_unit(trace.x_unit()))
}

/// Prints the fit as JSON; with `--out` it is also written to
/// `<out>/<file stem>.<model>.json`.
pub fn cmd_fit(opts: &Options, path: &Path, model: &str) -> Result<FitResult, CliError> {
    let fit = fit_file(path, model)?;
    let json = to_json(&fit);
    if let Some(dir) = &opts.out {
        std::fs::create_dir_all(dir).map_err(|source| CliError::Io { path: dir.clone(), source })?;
        let stem = path.file_stem().and_then(|s| s.to_str()).unwrap_or("trace");
        write_file(&dir.join(format!("{stem}.{}.json", model.replace(':', "_"))), &json)?;
    }
    print!("{json}");
    if !fit.converged {
        return Err(CliError::NotConverged(format!("{model} on {}", path.display())));
    }
    Ok(fit)
}

// ---------------------------------------------------------------------------
// verify

pub fn cmd_verify(opts: &Options) -> Result<Vec<verify::CriterionOutcome>, CliError> {
    let outcomes = sweep::with_jobs(opts.jobs, verify::run_all);
    for o in &outcomes {
        println!("{}", o.line());
    }
    let failed: Vec<u8> = outcomes.iter().filter(|o| !o.passed).map(|o| o.id).collect();
    println!("{} of {} criteria passed", outcomes.len() - failed.len(), outcomes.len());
    if failed.is_empty() {
        Ok(outcomes)
    } else {
        Err(CliError::VerifyFailed(failed))
    }
}
