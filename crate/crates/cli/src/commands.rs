//! One function per subcommand. Each turns its arguments into tables and
//! reports whether every point met its quality bar.

use anyhow::{bail, Context, Result};
use anyspeed_core::magnus::{solve, MagnusOrder};
use anyspeed_core::optimizer::log_grid;
use anyspeed_core::pulse::spectrum;
use anyspeed_core::seeders::transition_cases;
use anyspeed_core::{
    entanglement_fidelity, entanglement_infidelity, optimize_point, plan_gate_in_frame, propagate_lab, propagate_rot,
    seed_rwa, seed_subcycle, sweep_many, verify_plan, EnvelopeKind, GateLibrary, OptimizeSettings, PulseSpec,
    SeedResult, SeedSource, Spinor, SweepJob, SweepRecord, UnitarySU2, VirtualFrame, OMEGA0, T0,
};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::args::{
    Command, GatesetArgs, OptimizeArgs, RegimeChoice, SeedArgs, SpectraArgs, SweepArgs, TrajectoryArgs,
};
use crate::table::{Cell, Table};
use crate::UsageError;

/// Largest entanglement infidelity a planned gate may show and still count as verified.
pub const GATE_TOLERANCE: f64 = 1e-9;

/// Tables of one run and whether every point met its quality bar.
#[derive(Debug)]
pub struct Outcome {
    pub tables: Vec<Table>,
    /// Human-readable reasons the run is not clean; empty when it is.
    pub problems: Vec<String>,
}

impl Outcome {
    fn clean(tables: Vec<Table>) -> Self {
        Self { tables, problems: Vec::new() }
    }
}

pub fn run(command: &Command) -> Result<Outcome> {
    match command {
        Command::Seed(a) => seed(a),
        Command::Optimize(a) => optimize(a),
        Command::Sweep(a) => sweep(a),
        Command::Spectra(a) => spectra(a),
        Command::Trajectory(a) => trajectory(a),
        Command::Transitions(_) => transitions(),
        Command::Gateset(a) => gateset(a),
    }
}

/// Analytic `(Ωτ_d, ωτ_d)` for the regime `tau_d` (internal units) falls in.
fn analytic_seed(envelope: EnvelopeKind, ratio: f64, theta: f64, tau_d: f64) -> Result<(SeedResult, SeedSource)> {
    let sub = seed_subcycle(envelope, ratio, theta)?;
    let tau0 = sub.phi.expect("subcycle seeds carry φ") / OMEGA0;
    if tau_d < tau0 {
        Ok((sub, SeedSource::Subcycle))
    } else {
        Ok((seed_rwa(envelope, ratio, theta, tau_d)?, SeedSource::Rwa))
    }
}

fn seed(a: &SeedArgs) -> Result<Outcome> {
    let (envelope, ratio, theta) = (a.pulse.envelope, a.pulse.ratio(), a.pulse.theta.radians());
    let tau_d = a.tau_d.map(|p| p * T0);
    let mut seeds = Vec::new();
    if matches!(a.regime, RegimeChoice::Subcycle | RegimeChoice::Both) {
        seeds.push(seed_subcycle(envelope, ratio, theta)?);
    }
    if matches!(a.regime, RegimeChoice::Rwa | RegimeChoice::Both) {
        match tau_d {
            Some(t) => seeds.push(seed_rwa(envelope, ratio, theta, t)?),
            None if a.regime == RegimeChoice::Rwa => bail!(UsageError("the rwa seed needs --tau-d".into())),
            None => {}
        }
    }
    let mut table = Table::new(
        "seed/v1",
        format!("seed_{envelope}_{}", a.pulse.theta.slug()),
        &[
            "regime",
            "envelope",
            "ratio",
            "theta",
            "Omega_tau_d",
            "omega_tau_d",
            "tau_d_over_T0",
            "Omega_over_omega0",
            "omega_over_omega0",
            "phi",
            "tau0_over_T0",
            "s0",
            "s",
            "s1s_residual",
        ],
    );
    for s in seeds {
        let per = |area: f64| tau_d.map(|t| area / t / OMEGA0);
        table.push(vec![
            s.regime.to_string().into(),
            envelope.name().into(),
            ratio.into(),
            theta.into(),
            s.rabi_tau_d.into(),
            s.carrier_tau_d.into(),
            Cell::opt(a.tau_d),
            Cell::opt(per(s.rabi_tau_d)),
            Cell::opt(per(s.carrier_tau_d)),
            Cell::opt(s.phi),
            Cell::opt(s.transition_periods()),
            s.diagnostics.s0.into(),
            s.diagnostics.s.into(),
            s.diagnostics.s1s_residual.into(),
        ]);
    }
    Ok(Outcome::clean(vec![table]))
}

const RECORD_COLUMNS: [&str; 10] = [
    "tau_d_over_T0",
    "omega_over_omega0",
    "Omega_tau_d",
    "omega_tau_d",
    "Omega_over_omega0",
    "infidelity",
    "g_res_over_theta",
    "iterations",
    "converged",
    "seed_source",
];

fn record_cells(r: &SweepRecord) -> Vec<Cell> {
    vec![
        r.tau_d_over_t0.into(),
        r.omega_over_omega0.into(),
        r.rabi_tau_d.into(),
        r.carrier_tau_d.into(),
        r.rabi_over_omega0().into(),
        r.infidelity.into(),
        Cell::opt(r.g_res_over_theta),
        Cell::Int(r.iterations as i64),
        r.converged.into(),
        r.seed_source.tag().into(),
    ]
}

fn unconverged(label: &str, records: &[SweepRecord]) -> Vec<String> {
    records
        .iter()
        .filter(|r| !r.converged)
        .map(|r| format!("{label}: τ_d = {} T₀ did not converge (1 − F = {:.3e})", r.tau_d_over_t0, r.infidelity))
        .collect()
}

fn optimize(a: &OptimizeArgs) -> Result<Outcome> {
    let (envelope, ratio, theta) = (a.pulse.envelope, a.pulse.ratio(), a.pulse.theta.radians());
    let tau_d = a.tau_d * T0;
    let settings = a.solver.settings();
    let (initial, source) = match (a.start_rabi_tau_d, a.start_carrier_tau_d) {
        (Some(rabi), Some(carrier)) => ((rabi, carrier), SeedSource::Manual),
        _ => {
            let (s, source) = analytic_seed(envelope, ratio, theta, tau_d)?;
            let s = s.at_duration(tau_d);
            ((s.rabi_tau_d, s.carrier_tau_d), source)
        }
    };
    let mut record = optimize_point(envelope, ratio, theta, tau_d, initial, &settings)?;
    record.seed_source = source;
    let mut table = Table::new("optimize/v1", format!("optimize_{envelope}_{}", a.pulse.theta.slug()), &RECORD_COLUMNS);
    table.push(record_cells(&record));
    let problems = unconverged("optimize", &[record]);
    Ok(Outcome { tables: vec![table], problems })
}

fn sweep(a: &SweepArgs) -> Result<Outcome> {
    if a.points < 2 {
        bail!(UsageError(format!("--points must be at least 2, got {}", a.points)));
    }
    if a.tau_min >= a.tau_max {
        bail!(UsageError(format!("--tau-min {} must be below --tau-max {}", a.tau_min, a.tau_max)));
    }
    let settings = OptimizeSettings {
        grid: log_grid(a.tau_min, a.tau_max, a.points),
        direction: a.direction,
        ..a.solver.settings()
    };
    let mut jobs = Vec::new();
    let mut labels = Vec::new();
    for &envelope in &a.envelope {
        for theta in &a.theta {
            let ratio = a.ratio.unwrap_or_else(|| envelope.canonical_ratio());
            jobs.push(SweepJob { envelope, ratio, theta: theta.radians() });
            labels.push(format!("sweep_{envelope}_{}", theta.slug()));
        }
    }
    let order = a.magnus_order.map(MagnusOrder::from_number).transpose()?;
    let mut header = vec![
        "tau_d_over_T0",
        "omega_over_omega0",
        "Omega_tau_d",
        "infidelity",
        "g_res_over_theta",
        "converged",
        "seed_source",
    ];
    if order.is_some() {
        header.extend([
            "magnus_Omega_tau_d",
            "magnus_omega_over_omega0",
            "magnus_g_res_over_theta",
            "magnus_entanglement_infidelity",
        ]);
    }

    let mut tables = Vec::new();
    let mut problems = Vec::new();
    for ((job, label), result) in jobs.iter().zip(&labels).zip(sweep_many(&jobs, &settings)) {
        let records = result.with_context(|| format!("{label} failed"))?;
        problems.extend(unconverged(label, &records));
        let mut table = Table::new("sweep/v1", label.clone(), &header);
        for r in &records {
            let mut row: Vec<Cell> = vec![
                r.tau_d_over_t0.into(),
                r.omega_over_omega0.into(),
                r.rabi_tau_d.into(),
                r.infidelity.into(),
                Cell::opt(r.g_res_over_theta.filter(|_| a.emit_fourier)),
                r.converged.into(),
                r.seed_source.tag().into(),
            ];
            if let Some(order) = order {
                row.extend(magnus_cells(order, job, r.tau_d()));
            }
            table.push(row);
        }
        tables.push(table);
    }
    Ok(Outcome { tables, problems })
}

/// Magnus prediction at `tau_d`; blank when the expansion has no solution there.
fn magnus_cells(order: MagnusOrder, job: &SweepJob, tau_d: f64) -> Vec<Cell> {
    let evaluate = || -> anyspeed_core::Result<[f64; 4]> {
        let m = solve(order, job.envelope, job.ratio, job.theta, tau_d)?;
        let u = propagate_rot(&m.pulse(job.envelope, job.ratio))?.unitary;
        Ok([
            m.rabi_tau_d,
            m.carrier_tau_d / tau_d / OMEGA0,
            m.resonant_component() / job.theta,
            entanglement_infidelity(&UnitarySU2::rx(job.theta), &u),
        ])
    };
    match evaluate() {
        Ok(values) => values.into_iter().map(Cell::Num).collect(),
        Err(_) => vec![Cell::Empty; 4],
    }
}

fn spectra(a: &SpectraArgs) -> Result<Outcome> {
    if a.probes < 2 {
        bail!(UsageError(format!("--probes must be at least 2, got {}", a.probes)));
    }
    let (envelope, ratio, theta) = (a.pulse.envelope, a.pulse.ratio(), a.pulse.theta.radians());
    let settings = a.solver.settings();
    let probes: Vec<f64> = (0..a.probes).map(|k| a.probe_max * OMEGA0 * k as f64 / (a.probes - 1) as f64).collect();
    let mut table = Table::new(
        "spectra/v1",
        format!("spectra_{envelope}_{}", a.pulse.theta.slug()),
        &["tau_d_over_T0", "probe_over_omega0", "g", "g_over_theta"],
    );
    let mut problems = Vec::new();
    for &periods in &a.tau_d {
        let tau_d = periods * T0;
        let (s, _) = analytic_seed(envelope, ratio, theta, tau_d)?;
        let pulse = if a.seed_only {
            s.pulse(tau_d)
        } else {
            let s = s.at_duration(tau_d);
            let record = optimize_point(envelope, ratio, theta, tau_d, (s.rabi_tau_d, s.carrier_tau_d), &settings)?;
            problems.extend(unconverged("spectra", &[record]));
            record.pulse(envelope, ratio)
        };
        for p in spectrum(&pulse, &probes)? {
            table.push(vec![periods.into(), (p.probe / OMEGA0).into(), p.value.into(), (p.value / theta).into()]);
        }
    }
    Ok(Outcome { tables: vec![table], problems })
}

fn trajectory(a: &TrajectoryArgs) -> Result<Outcome> {
    let (envelope, ratio, theta) = (a.pulse.envelope, a.pulse.ratio(), a.pulse.theta.radians());
    let tau_d = a.tau_d * T0;
    let (rabi, carrier) = match (a.omega, a.freq) {
        (Some(rabi), Some(carrier)) => (rabi * OMEGA0, carrier * OMEGA0),
        (rabi, carrier) => {
            let seeded = analytic_seed(envelope, ratio, theta, tau_d)?.0.at_duration(tau_d);
            (
                rabi.map_or(seeded.rabi_tau_d / tau_d, |r| r * OMEGA0),
                carrier.map_or(seeded.carrier_tau_d / tau_d, |w| w * OMEGA0),
            )
        }
    };
    let spec = PulseSpec::new(envelope, tau_d, rabi, carrier).with_ratio(ratio).with_cep(a.cep);
    let samples = propagate_lab(&spec, &Spinor::ground(), a.samples)?;
    let mut table = Table::new("trajectory/v1", format!("trajectory_{envelope}"), &["t_over_T0", "x", "y", "z"]);
    for s in samples {
        let [x, y, z] = s.bloch;
        table.push(vec![(s.t / T0).into(), x.into(), y.into(), z.into()]);
    }
    Ok(Outcome::clean(vec![table]))
}

fn transitions() -> Result<Outcome> {
    let mut table = Table::new("transitions/v1", "transitions", &["envelope", "T_over_tau_d", "theta", "tau0_over_T0"]);
    for (envelope, ratio, theta) in transition_cases() {
        let periods = seed_subcycle(envelope, ratio, theta)?.transition_periods().expect("subcycle seeds carry φ");
        table.push(vec![envelope.name().into(), ratio.into(), theta.into(), periods.into()]);
    }
    Ok(Outcome::clean(vec![table]))
}

/// Mean state fidelity over `samples` Haar-random inputs, and its standard error.
fn monte_carlo(expected: &UnitarySU2, realized: &UnitarySU2, samples: usize, rng: &mut ChaCha8Rng) -> (f64, f64) {
    let fidelities: Vec<f64> = (0..samples)
        .map(|_| {
            // a uniform point on S³ is a Haar-random SU(2) element
            let q: [f64; 4] = std::array::from_fn(|_| StandardNormal.sample(rng));
            let v = UnitarySU2::from_quaternion(q).expect("Gaussian quaternions are nonzero");
            let psi = v.apply(&Spinor::ground());
            expected.apply(&psi).fidelity(&realized.apply(&psi))
        })
        .collect();
    let n = fidelities.len() as f64;
    let mean = fidelities.iter().sum::<f64>() / n;
    let var = fidelities.iter().map(|f| (f - mean).powi(2)).sum::<f64>() / (n - 1.0).max(1.0);
    (mean, (var / n).sqrt())
}

fn gateset(a: &GatesetArgs) -> Result<Outcome> {
    let mut angles: Vec<f64> = Vec::new();
    for t in a.target.iter().filter(|t| t.axis != anyspeed_core::Axis::Z) {
        let m = t.angle.radians().abs();
        if m == 0.0 || m > std::f64::consts::PI + 1e-9 {
            bail!(UsageError(format!("target {t}: angle must satisfy 0 < |θ| ≤ π")));
        }
        if !angles.iter().any(|x| (x - m).abs() <= 1e-9) {
            angles.push(m);
        }
    }
    let ratio = a.ratio();
    let (library, records) = if angles.is_empty() {
        (GateLibrary::new(), Vec::new())
    } else {
        GateLibrary::optimize(a.envelope, ratio, a.tau_d * T0, &angles, &a.solver.settings())?
    };
    let mut problems = unconverged("gateset library", &records);

    let mut header = vec![
        "target",
        "axis",
        "angle",
        "virtual",
        "quarter",
        "delay_over_T0",
        "rabi_sign",
        "frame_phase",
        "Omega_tau_d",
        "omega_tau_d",
        "entanglement_infidelity",
        "verified",
    ];
    if a.mc_samples > 0 {
        header.extend(["mc_average_fidelity", "mc_stderr", "expected_average_fidelity"]);
    }
    let mut table = Table::new("gateset/v1", "gateset", &header);
    let mut frame = VirtualFrame::new();
    let mut rng = ChaCha8Rng::seed_from_u64(a.seed);
    for t in &a.target {
        let plan = plan_gate_in_frame(t.target(), &library, &mut frame, a.policy.into())?;
        let report = verify_plan(&plan)?;
        let infidelity = 1.0 - report.entanglement_fidelity;
        let verified = infidelity < GATE_TOLERANCE;
        if !verified {
            problems.push(format!("{t}: 1 − F_e = {infidelity:.3e} exceeds {GATE_TOLERANCE:e}"));
        }
        let mut row: Vec<Cell> = vec![
            t.to_string().into(),
            t.axis.label().into(),
            t.angle.radians().into(),
            plan.is_virtual().into(),
            plan.quarter.map_or(Cell::Empty, |m| Cell::Int(m as i64)),
            Cell::opt(report.delay.map(|d| d / T0)),
            plan.rabi_sign.into(),
            plan.frame_phase.into(),
            Cell::opt(plan.pulse.map(|p| p.rabi_tau_d())),
            Cell::opt(plan.pulse.map(|p| p.carrier_tau_d())),
            infidelity.into(),
            verified.into(),
        ];
        if a.mc_samples > 0 {
            let (mean, stderr) = monte_carlo(&report.expected, &report.realized, a.mc_samples, &mut rng);
            let expected = (2.0 * entanglement_fidelity(&report.expected, &report.realized) + 1.0) / 3.0;
            row.extend([mean.into(), stderr.into(), expected.into()]);
        }
        table.push(row);
    }
    Ok(Outcome { tables: vec![table], problems })
}
