//! Acceptance checks with their reference values and tolerances. Shared by
//! the `acceptance` test target and `cqed verify`.

use std::f64::consts::PI;
use std::time::Instant;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::Serialize;

use crate::budget::{
    fit_seam_conductance, t1_limit_from_seam, te101_seam_admittance_at, te101_seam_admittance_quadrature,
    QMeasurementSet, RectangularCavity,
};
use crate::circuit::{g_from_chi, transmon_spectrum, DispersiveSystem, ModeSpec, TransmonParams};
use crate::experiments::{
    q_from_lifetime, run_protocol, sim_number_splitting, sim_revival, sim_stark_slopes, Grid, Protocol, ProtocolConfig,
};
use crate::fitting;
use crate::quantum::{evolve_lindblad, ladder, number_op, qubit_rotation, CVector, ModeSpace, Operator, State, C64};
use crate::units::hz_to_angular;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CriterionOutcome {
    pub id: u8,
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
    pub seconds: f64,
}

impl CriterionOutcome {
    pub fn line(&self) -> String {
        format!(
            "criterion {:>2} {:<28} {}  ({:.2} s) {}",
            self.id,
            self.name,
            if self.passed { "PASS" } else { "FAIL" },
            self.seconds,
            self.detail
        )
    }
}

struct Checks {
    ok: bool,
    notes: Vec<String>,
}

impl Checks {
    fn new() -> Self {
        Self { ok: true, notes: Vec::new() }
    }

    fn check(&mut self, pass: bool, note: String) {
        self.ok &= pass;
        self.notes.push(if pass { note } else { format!("[x] {note}") });
    }

    fn finish(self, id: u8, name: &'static str, start: Instant) -> CriterionOutcome {
        CriterionOutcome {
            id,
            name,
            passed: self.ok,
            detail: self.notes.join("; "),
            seconds: start.elapsed().as_secs_f64(),
        }
    }

    fn fail(&mut self, note: String) {
        self.check(false, note);
    }
}

fn rel(a: f64, b: f64) -> f64 {
    (a / b - 1.0).abs()
}

/// Reference device: qubit, storage cavity and readout cavity with the
/// measured couplings. Dimensions suit the protocol simulations.
pub fn reference_device(storage_dim: usize) -> DispersiveSystem {
    DispersiveSystem::new(vec![
        ModeSpec::new("qubit", hz_to_angular(7.3514e9), 2).with_t1(6.4e-6).with_t2(9.5e-6).with_t2_echo(11.7e-6),
        ModeSpec::new("storage", hz_to_angular(9.3772e9), storage_dim).with_t1(34.3e-6),
        ModeSpec::new("readout", hz_to_angular(6.9734e9), 2).with_t1(1.0e-6),
    ])
    .and_then(|s| s.with_chi("qubit", "storage", hz_to_angular(-1.17e6)))
    .and_then(|s| s.with_chi("qubit", "readout", hz_to_angular(-3.84e6)))
    .and_then(|s| s.with_chi("readout", "storage", hz_to_angular(-20e3)))
    .expect("table values are valid")
}

pub fn criterion_1() -> CriterionOutcome {
    let start = Instant::now();
    let mut c = Checks::new();
    for (chi, delta, want) in [(-1.17e6, -2.03e9, 48.7e6), (-3.84e6, 378e6, 38.1e6)] {
        match g_from_chi(chi, delta) {
            Ok(g) => c.check(
                rel(g, want) < 0.01,
                format!("g({:.2} MHz, {:.0} MHz) = {:.2} MHz", chi / 1e6, delta / 1e6, g / 1e6),
            ),
            Err(e) => c.fail(e.to_string()),
        }
    }
    c.finish(1, "dispersive conversion", start)
}

/// Table rows: label, y_q, y_mu, printed T1 limits (qubit, storage) as
/// printed, and the seam conductance.
pub const SEAM_TABLE: [(&str, f64, f64, &str, &str, f64); 7] = [
    ("circle r=1.00 mm", 7.955, 0.0114, "1.1", "640", 4.2e5),
    ("circle r=1.25 mm", 1.565, 0.0467, "5.8", "160", 4.2e5),
    ("circle r=1.75 mm", 0.382, 0.161, "24", "57", 4.2e5),
    ("square 3x3 mm", 0.524, 0.172, "17", "42", 4.2e5),
    ("square 4x4 mm", 0.187, 0.398, "49", "18", 4.2e5),
    ("square 5x5 mm", 0.096, 0.756, "96", "9.6", 4.2e5),
    ("In/In perimeter", 0.0239, 15.96, "91000", "108", 1e8),
];

/// One unit in the last printed place: `"9.6"` -> 0.1, `"640"` -> 10,
/// `"91000"` -> 1000.
pub fn printed_unit(s: &str) -> f64 {
    match s.split_once('.') {
        Some((_, frac)) => 10f64.powi(-(frac.len() as i32)),
        None => 10f64.powi(s.len() as i32 - s.trim_end_matches('0').len() as i32),
    }
}

pub fn criterion_2() -> CriterionOutcome {
    let start = Instant::now();
    let mut c = Checks::new();
    let (wq, wmu) = (hz_to_angular(7.3e9), hz_to_angular(9.25e9));
    for (label, yq, ymu, tq, tmu, g) in SEAM_TABLE {
        for (mode, y, w, printed) in [("q", yq, wq, tq), ("mu", ymu, wmu, tmu)] {
            let want: f64 = printed.parse().expect("table literal");
            match t1_limit_from_seam(y, g, w) {
                Ok(t) => {
                    let us = t * 1e6;
                    c.check(
                        (us - want).abs() <= printed_unit(printed),
                        format!("{label} {mode}: {us:.3} us vs {printed}"),
                    );
                }
                Err(e) => c.fail(format!("{label} {mode}: {e}")),
            }
        }
    }
    c.finish(2, "seam table arithmetic", start)
}

pub fn criterion_3() -> CriterionOutcome {
    let start = Instant::now();
    let mut c = Checks::new();
    for t1 in [34.3e-6, 34.7e-6] {
        match q_from_lifetime(hz_to_angular(9.3772e9), t1) {
            Ok(q) => c.check(rel(q, 2e6) < 0.05, format!("Q({:.1} us) = {:.3e}", t1 * 1e6, q)),
            Err(e) => c.fail(e.to_string()),
        }
    }
    c.finish(3, "Q-lifetime identity", start)
}

pub fn criterion_4() -> CriterionOutcome {
    let start = Instant::now();
    let mut c = Checks::new();
    let sys = reference_device(30);
    let period = 1.0 / 1.17e6;
    let Ok(grid) = Grid::new(0.0, 3.6e-6, 1441) else { unreachable!() };
    let step = grid.step();
    c.check(step <= 5e-9, format!("grid step {:.2} ns", step * 1e9));
    let x = grid.values();
    match sim_revival(&sys, "qubit", "storage", 3f64.sqrt(), &x, false) {
        Ok(tr) => {
            let v = tr.values();
            for k in 1..=4usize {
                let target = k as f64 * period;
                // largest sample within a quarter period of the expected revival
                let (imax, _) = x
                    .iter()
                    .enumerate()
                    .filter(|(_, t)| (*t - target).abs() < period / 4.0)
                    .max_by(|a, b| v[a.0].total_cmp(&v[b.0]))
                    .expect("grid covers revival");
                let off = (x[imax] - target).abs();
                c.check(off <= step, format!("revival {k} at {:.4} us (offset {:.2} ns)", x[imax] * 1e6, off * 1e9));
            }
            let (imin, _) = x
                .iter()
                .enumerate()
                .filter(|(_, t)| **t < period)
                .min_by(|a, b| v[a.0].total_cmp(&v[b.0]))
                .expect("grid covers first period");
            let depth = v[imin];
            let oracle = (-6.0f64).exp();
            c.check((depth - oracle).abs() < 1e-3, format!("collapse depth {depth:.5} vs exp(-6) = {oracle:.5}"));
        }
        Err(e) => c.fail(e.to_string()),
    }
    let secs = start.elapsed().as_secs_f64();
    c.check(secs < 10.0, format!("runtime {secs:.2} s"));
    c.finish(4, "revival timing", start)
}

pub fn criterion_5() -> CriterionOutcome {
    let start = Instant::now();
    let mut c = Checks::new();
    let sys = reference_device(20);
    let Ok(grid) = Grid::new(-1.0e6, 7.5e6, 2001) else { unreachable!() };
    let result = sim_number_splitting(&sys, "qubit", "storage", 1.0, &grid.values())
        .and_then(|tr| fitting::fit_lorentzian_multiplet(tr.x(), tr.values(), 6));
    match result {
        Ok(fit) => {
            let spacing = fit.diagnostics.get("spacing_mean").copied().unwrap_or(f64::NAN).abs();
            c.check(rel(spacing, 1.17e6) < 0.02, format!("spacing {:.4} MHz", spacing / 1e6));
            let mut worst: f64 = 0.0;
            // centres ascend with photon number because chi < 0
            for n in 0..6 {
                let p = (-1.0f64).exp() / (1..=n).map(|k| k as f64).product::<f64>();
                let w = fit.value(&format!("weight_{n}")).unwrap_or(f64::NAN);
                worst = worst.max(rel(w, p));
            }
            c.check(worst < 0.02, format!("worst weight error {:.2e} (relative)", worst));
        }
        Err(e) => c.fail(e.to_string()),
    }
    let secs = start.elapsed().as_secs_f64();
    c.check(secs < 10.0, format!("runtime {secs:.2} s"));
    c.finish(5, "number splitting", start)
}

/// Protocol configurations used for the round-trip criterion.
pub fn round_trip_configs() -> Vec<(ProtocolConfig, &'static str, f64)> {
    let grid = |a: f64, b: f64, n: usize| Grid::new(a, b, n).expect("static grid");
    let mut ramsey = ProtocolConfig::new("ramsey", Protocol::Ramsey, "qubit", grid(0.0, 20e-6, 201));
    ramsey.detuning = 400e3;
    let mut echo = ProtocolConfig::new("hahn_echo", Protocol::HahnEcho, "qubit", grid(0.0, 24e-6, 201));
    echo.detuning = 300e3;
    let mut cav = ProtocolConfig::new("cavity_decay", Protocol::CavityDecay, "qubit", grid(0.0, 200e-6, 101));
    cav.cavity = Some("storage".into());
    cav.alpha = 3f64.sqrt();
    cav.pulse_length = Some(2e-6);
    vec![
        (ProtocolConfig::new("t1_decay", Protocol::T1Decay, "qubit", grid(0.0, 32e-6, 101)), "T", 6.4e-6),
        (ramsey, "T2", 9.5e-6),
        (echo, "T2", 11.7e-6),
        (cav, "T1", 34.3e-6),
    ]
}

pub fn criterion_6() -> CriterionOutcome {
    let start = Instant::now();
    let mut c = Checks::new();
    let sys = reference_device(20);
    let cases = round_trip_configs();
    let runs = crate::sweep::map(&cases, |(cfg, key, want)| {
        let clean = run_protocol(&sys, cfg, 0);
        let mut noisy_cfg = cfg.clone();
        noisy_cfg.noise = 0.02;
        let noisy = run_protocol(&sys, &noisy_cfg, 2024);
        (cfg.name.clone(), *key, *want, clean, noisy)
    });
    for (name, key, want, clean, noisy) in runs {
        for (label, run, tol) in [("clean", clean, 0.02), ("2% noise", noisy, 0.05)] {
            match run {
                Ok(r) => {
                    let got = r.fit.value(key).unwrap_or(f64::NAN);
                    c.check(
                        rel(got, want) < tol && r.fit.converged,
                        format!("{name} {label}: {key} = {:.3} us", got * 1e6),
                    );
                }
                Err(e) => c.fail(format!("{name} {label}: {e}")),
            }
        }
    }
    let secs = start.elapsed().as_secs_f64();
    c.check(secs < 60.0, format!("runtime {secs:.2} s"));
    c.finish(6, "protocol round trips", start)
}

pub fn criterion_7() -> CriterionOutcome {
    let start = Instant::now();
    let mut c = Checks::new();
    let powers: Vec<f64> = (1..=20).map(|p| p as f64 * 0.5).collect();
    match sim_stark_slopes(&powers, 1.0 / 1.0e-6, hz_to_angular(-3.84e6), hz_to_angular(-20e3), hz_to_angular(3e6)) {
        Ok(s) => match s.ratio {
            Some(r) => c.check((r - 192.0).abs() < 1e-9, format!("ratio {r:.12}")),
            None => c.fail("ratio unbounded".into()),
        },
        Err(e) => c.fail(e.to_string()),
    }
    c.finish(7, "Stark slope ratio", start)
}

pub fn criterion_8() -> CriterionOutcome {
    let start = Instant::now();
    let mut c = Checks::new();
    let (ej, ec) = (39e9, 204e6);
    let spectra = TransmonParams::new(ej, ec, 0.0)
        .and_then(|p| transmon_spectrum(&p))
        .and_then(|s0| Ok((s0, transmon_spectrum(&TransmonParams::new(ej, ec, 0.5)?)?)));
    match spectra {
        Ok((s0, s5)) => {
            let alpha = s0.anharmonicity();
            c.check(rel(alpha, -204e6) < 0.05, format!("alpha {:.2} MHz vs -204 MHz", alpha / 1e6));
            let disp = (s0.omega01() - s5.omega01()).abs() / s0.omega01();
            c.check(disp < 1e-8, format!("charge dispersion {disp:.1e}"));
            let asym = (8.0 * ej * ec).sqrt() - ec;
            c.check(
                rel(s0.omega01(), asym) < 0.01,
                format!("f01 {:.4} GHz vs asymptote {:.4} GHz", s0.omega01() / 1e9, asym / 1e9),
            );
        }
        Err(e) => c.fail(e.to_string()),
    }
    let secs = start.elapsed().as_secs_f64();
    c.check(secs < 1.0, format!("runtime {secs:.3} s"));
    c.finish(8, "transmon spectrum", start)
}

pub fn criterion_9() -> CriterionOutcome {
    let start = Instant::now();
    let mut c = Checks::new();
    let w = hz_to_angular(9.25e9);
    let Ok(chip) = RectangularCavity::new(22e-3, 24e-3, 300e-6) else { unreachable!() };
    for cav in [chip, RectangularCavity { a: 10e-3, d: 30e-3, b: 1e-3 }] {
        let closed = te101_seam_admittance_at(&cav, w);
        let quad = te101_seam_admittance_quadrature(&cav, w, 48);
        c.check(rel(closed, quad) < 1e-6, format!("closed/quadrature - 1 = {:.1e}", closed / quad - 1.0));
    }
    let y = te101_seam_admittance_at(&chip, w);
    let ratio = 16.0 / y;
    c.check((1.0 / 2.5..=2.5).contains(&ratio), format!("y = {y:.2} /Ohm m, 16.0 / y = {ratio:.2}"));
    c.finish(9, "TE101 seam admittance", start)
}

pub fn criterion_10() -> CriterionOutcome {
    let start = Instant::now();
    let mut c = Checks::new();
    let exact = QMeasurementSet::new([0.1, 1.0, 10.0].iter().map(|&y| (y, 4.2e5 / y)).collect());
    let mut rng = ChaCha8Rng::seed_from_u64(42);
    let noise = Normal::<f64>::new(0.0, 0.1).expect("valid sigma");
    let noisy = QMeasurementSet::new(
        (0..20)
            .map(|i| {
                let y = 10f64.powf(-2.0 + 4.0 * i as f64 / 19.0);
                (y, 4.2e5 / y * noise.sample(&mut rng).exp())
            })
            .collect(),
    );
    match (exact, noisy) {
        (Ok(exact), Ok(noisy)) => {
            match fit_seam_conductance(&exact) {
                Ok(f) => c.check(rel(f.g_seam, 4.2e5) < 1e-12, format!("noiseless g = {:.6e}", f.g_seam)),
                Err(e) => c.fail(e.to_string()),
            }
            match fit_seam_conductance(&noisy) {
                Ok(f) => c.check(rel(f.g_seam, 4.2e5) < 0.10, format!("10% noise g = {:.4e}", f.g_seam)),
                Err(e) => c.fail(e.to_string()),
            }
            let scaled = noisy.scaled_q(7.5).and_then(|s| fit_seam_conductance(&s));
            match (fit_seam_conductance(&noisy), scaled) {
                (Ok(a), Ok(b)) => c.check(
                    rel(b.g_seam, 7.5 * a.g_seam) < 1e-12,
                    format!("equivariance error {:.1e}", rel(b.g_seam, 7.5 * a.g_seam)),
                ),
                (Err(e), _) | (_, Err(e)) => c.fail(e.to_string()),
            }
        }
        (Err(e), _) | (_, Err(e)) => c.fail(e.to_string()),
    }
    c.finish(10, "conductance regression", start)
}

/// Seeded random pure state.
fn random_state(space: &ModeSpace, rng: &mut ChaCha8Rng) -> crate::Result<State> {
    let n = Normal::new(0.0, 1.0).expect("unit normal");
    let psi = CVector::from_fn(space.total_dim(), |_, _| C64::new(n.sample(rng), n.sample(rng)));
    State::pure(space.clone(), &psi)
}

/// Coupled qubit-cavity test problem with a non-diagonal Hamiltonian so the
/// adaptive integrator is exercised.
fn driven_problem(space: &ModeSpace) -> crate::Result<(Operator, Vec<(Operator, f64)>)> {
    let a = ladder(space, 1)?;
    let sm = ladder(space, 0)?;
    let nq = number_op(space, 0)?;
    let nc = number_op(space, 1)?;
    let w = 2.0 * PI * 1e6;
    let h = &(&nq * &nc).scale_real(-0.5 * w) + &(&sm + &sm.adjoint()).scale_real(0.3 * w);
    let h = &h + &(&a + &a.adjoint()).scale_real(0.2 * w);
    let h = &h + &nc.scale_real(0.1 * w);
    let ops = vec![(sm, 1.0 / 5e-6), (a, 1.0 / 20e-6), (nq, 1.0 / 30e-6)];
    Ok((h, ops))
}

pub fn criterion_11() -> CriterionOutcome {
    let start = Instant::now();
    let mut c = Checks::new();
    let mut run = || -> crate::Result<()> {
        let space = ModeSpace::new(vec![2, 6], vec!["qubit", "cavity"])?;
        let (h, ops) = driven_problem(&space)?;
        let grid: Vec<f64> = (0..=40).map(|i| i as f64 * 0.25e-6).collect();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let (mut trace_err, mut min_eig, mut purity_err) = (0.0f64, 0.0f64, 0.0f64);
        for _ in 0..4 {
            let s0 = random_state(&space, &mut rng)?;
            for s in evolve_lindblad(&s0, &h, &ops, &grid)? {
                trace_err = trace_err.max((s.trace() - C64::new(1.0, 0.0)).norm());
                min_eig = min_eig.min(s.min_eigenvalue());
            }
            for s in evolve_lindblad(&s0, &h, &[], &grid)? {
                purity_err = purity_err.max((s.purity() - 1.0).abs());
            }
        }
        c.check(trace_err < 1e-6, format!("trace error {trace_err:.1e}"));
        c.check(min_eig > -1e-6, format!("min eigenvalue {min_eig:.1e}"));
        c.check(purity_err < 1e-8, format!("unitary purity drift {purity_err:.1e}"));

        // excited-state decay against exp(-t/T1)
        let q = ModeSpace::from_dims(&[2])?;
        let t1 = 6.4e-6;
        let x = qubit_rotation(&q, 0, PI, 0.0)?;
        let excited = State::vacuum(q.clone())?.transform(&x);
        let h0 = Operator::zeros(&q)?;
        let dt: Vec<f64> = (0..=50).map(|i| i as f64 * 0.6e-6).collect();
        // generic RK path: a negligible dephasing channel keeps the fast path off
        let ops = vec![(ladder(&q, 0)?, 1.0 / t1), (number_op(&q, 0)?, 1e-30)];
        let mut worst: f64 = 0.0;
        for (t, s) in dt.iter().zip(evolve_lindblad(&excited, &h0, &ops, &dt)?) {
            worst = worst.max((s.populations(0)?[1] - (-t / t1).exp()).abs());
        }
        c.check(worst < 1e-4, format!("T1 decay error {worst:.1e}"));
        Ok(())
    };
    if let Err(e) = run() {
        c.fail(e.to_string());
    }
    let secs = start.elapsed().as_secs_f64();
    c.check(secs < 120.0, format!("runtime {secs:.2} s"));
    c.finish(11, "Lindblad engine properties", start)
}

pub fn criterion(id: u8) -> Option<CriterionOutcome> {
    Some(match id {
        1 => criterion_1(),
        2 => criterion_2(),
        3 => criterion_3(),
        4 => criterion_4(),
        5 => criterion_5(),
        6 => criterion_6(),
        7 => criterion_7(),
        8 => criterion_8(),
        9 => criterion_9(),
        10 => criterion_10(),
        11 => criterion_11(),
        _ => return None,
    })
}

/// Runs all criteria in order, sequentially so the runtime figures are
/// meaningful.
pub fn run_all() -> Vec<CriterionOutcome> {
    (1..=11).filter_map(criterion).collect()
}
