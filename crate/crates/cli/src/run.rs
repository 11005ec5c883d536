//! Experiment execution. Sweep points run on a bounded rayon pool and are
//! collected in input order, so output does not depend on the worker count.

use std::time::{Instant, SystemTime, UNIX_EPOCH};

use qle_core::dynamics::{evolve, steady_state, two_atom_reference, StateVector, TWO_ATOM_DIGITS};
use qle_core::generator::{
    assemble_with, fitted_couplings, AssembleOptions, DriveSpec, Generator, MediumSpec, DEFAULT_N_CAP,
};
use qle_core::longrange_fit::fit_powerlaw;
use qle_core::observables::{
    equal_time_correlation, excitation_profile, exponential_decay_fit, reflection, scaling_exponent, transmission,
};
use qle_core::scattering::single_photon;
use qle_core::spin_ops::{brute_force_generator, longrange_mpo, OperatorLabel};
use qle_core::QleError;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde_json::{json, Value};

use crate::config::{Command, Experiment, ExperimentConfig, InitialState};
use crate::error::{CliError, Result};
use crate::output::{num, site_columns, write_outputs, Metadata, Table};

#[derive(Clone, Copy, Debug)]
pub struct RunOptions {
    pub workers: usize,
    pub n_cap: usize,
}

impl Default for RunOptions {
    fn default() -> Self {
        let workers = std::thread::available_parallelism().map_or(1, |n| n.get());
        Self { workers, n_cap: DEFAULT_N_CAP }
    }
}

/// Table and summaries produced by one experiment.
#[derive(Clone, Debug)]
pub struct RunOutput {
    pub table: Table,
    pub derived: Value,
    pub summary: Value,
    /// Failed checks of a `validate` run; zero otherwise.
    pub failures: usize,
}

impl Experiment {
    pub fn command(&self) -> Command {
        match self {
            Experiment::Steady => Command::Steady,
            Experiment::Transient { .. } => Command::Transient,
            Experiment::FrequencySweep { .. } => Command::SweepFreq,
            Experiment::PowerSweep { .. } => Command::SweepPower,
            Experiment::LengthScaling { .. } => Command::Scaling,
            Experiment::SinglePhoton { .. } => Command::Scatter,
            Experiment::LongRangeFit { .. } => Command::FitLongrange,
            Experiment::Validate { .. } => Command::Validate,
        }
    }
}

/// Runs the experiment and writes the CSV and its metadata sidecar. Failed
/// validation checks are reported in [`RunOutput::failures`], not as errors.
pub fn run(cfg: &ExperimentConfig, opts: &RunOptions) -> Result<RunOutput> {
    let started_at = SystemTime::now().duration_since(UNIX_EPOCH).map_or(0.0, |d| d.as_secs_f64());
    let clock = Instant::now();
    let out = execute(cfg, opts)?;
    let meta = Metadata {
        tool: "qle",
        version: env!("CARGO_PKG_VERSION"),
        command: cfg.experiment.command().name(),
        config: cfg,
        derived: out.derived.clone(),
        summary: out.summary.clone(),
        columns: &out.table.columns,
        rows: out.table.rows.len(),
        workers: opts.workers,
        n_cap: opts.n_cap,
        started_at,
        wall_time_s: clock.elapsed().as_secs_f64(),
    };
    write_outputs(&cfg.output, &out.table, &meta)?;
    Ok(out)
}

/// Runs the experiment without touching the filesystem.
pub fn execute(cfg: &ExperimentConfig, opts: &RunOptions) -> Result<RunOutput> {
    let pool = rayon::ThreadPoolBuilder::new().num_threads(opts.workers.max(1)).build()?;
    let derived = derived(cfg)?;
    let ctx = Ctx { spec: &cfg.medium, drive: &cfg.drive, n_cap: opts.n_cap };
    let (table, summary, failures) = pool.install(|| -> Result<(Table, Value, usize)> {
        Ok(match &cfg.experiment {
            Experiment::Steady => (ctx.steady()?, Value::Null, 0),
            Experiment::Transient { t_end, dt_out, initial } => {
                (ctx.transient(*t_end, *dt_out, *initial)?, Value::Null, 0)
            }
            Experiment::FrequencySweep { omega_p } => (ctx.sweep_freq(omega_p)?, Value::Null, 0),
            Experiment::PowerSweep { intensity } => (ctx.sweep_power(intensity)?, Value::Null, 0),
            Experiment::LengthScaling { ns, jz, fit_window } => {
                let (t, s) = ctx.scaling(ns, jz, *fit_window)?;
                (t, s, 0)
            }
            Experiment::SinglePhoton { ns, omega_p } => (ctx.scatter(ns, omega_p)?, Value::Null, 0),
            Experiment::LongRangeFit { u, terms, rmax } => (fit_table(u, terms, *rmax)?, Value::Null, 0),
            Experiment::Validate { draws, max_n } => {
                let t = validate(cfg.seed, *draws, *max_n)?;
                let failures = t.column("passed").map_or(0, |c| c.iter().filter(|v| **v != "true").count());
                (t, Value::Null, failures)
            }
        })
    })?;
    Ok(RunOutput { table, derived, summary, failures })
}

fn derived(cfg: &ExperimentConfig) -> Result<Value> {
    let spec = &cfg.medium;
    let mut d = json!({
        "rabi": cfg.drive.rabi(spec.gamma_l)?,
        "amplitude": cfg.drive.amplitude(),
    });
    if let Some((fx, fz)) = fitted_couplings(spec)? {
        let chi =
            if spec.n() >= 2 { Some(longrange_mpo(spec, cfg.drive.omega_p, &fx, &fz)?.bond_dimension()) } else { None };
        d["long_range"] = json!({
            "chi": chi,
            "hopping_fit": fx,
            "interaction_fit": fz,
        });
    }
    Ok(d)
}

struct Ctx<'a> {
    spec: &'a MediumSpec,
    drive: &'a DriveSpec,
    n_cap: usize,
}

impl Ctx<'_> {
    fn assemble(&self, spec: &MediumSpec, drive: &DriveSpec) -> Result<Generator> {
        Ok(assemble_with(spec, drive, &AssembleOptions { n_cap: self.n_cap, ..Default::default() })?)
    }

    fn check_cap(&self, n: usize) -> Result<()> {
        if n > self.n_cap {
            return Err(QleError::SizeCap { n, cap: self.n_cap }.into());
        }
        Ok(())
    }

    fn solve(&self, spec: &MediumSpec, drive: &DriveSpec) -> Result<StateVector> {
        Ok(steady_state(&self.assemble(spec, drive)?)?)
    }

    /// The medium with `n` sites; only homogeneous chains can be resized.
    fn resized(&self, n: usize) -> Result<MediumSpec> {
        if n == self.spec.n() {
            return Ok(self.spec.clone());
        }
        if !self.spec.is_homogeneous() {
            return Err(CliError::field("medium.omega", "length scans need a homogeneous chain"));
        }
        let mut spec = self.spec.clone();
        spec.omega = vec![spec.omega[0]; n];
        Ok(spec)
    }

    fn steady(&self) -> Result<Table> {
        let n = self.spec.n();
        self.check_cap(n)?;
        let s = self.solve(self.spec, self.drive)?;
        let mut table = Table::new(
            ["n", "omega_p", "intensity", "rabi", "transmission", "reflection", "corr_1n"]
                .map(String::from)
                .into_iter()
                .chain(site_columns(n)),
        );
        let sites: Vec<usize> = if n == 1 { vec![1] } else { vec![1, n] };
        let mut row = vec![
            n.to_string(),
            num(self.drive.omega_p),
            num(self.drive.intensity),
            num(self.drive.rabi(self.spec.gamma_l)?),
            num(transmission(&s, self.spec, self.drive)?),
            num(reflection(&s, self.spec, self.drive)?),
            num(equal_time_correlation(&s, &sites)?),
        ];
        row.extend(excitation_profile(&s).into_iter().map(num));
        table.push(row);
        Ok(table)
    }

    fn transient(&self, t_end: f64, dt_out: f64, initial: InitialState) -> Result<Table> {
        let n = self.spec.n();
        self.check_cap(n)?;
        let gen = self.assemble(self.spec, self.drive)?;
        let s0 = match initial {
            InitialState::Ground => StateVector::ground(&gen),
            InitialState::Excited => StateVector::excited(&gen),
        };
        let traj = evolve(&gen, &s0, t_end, dt_out)?;
        let mut table =
            Table::new(["t", "transmission", "reflection"].map(String::from).into_iter().chain(site_columns(n)));
        for (t, s) in traj.times.iter().zip(&traj.states) {
            let mut row =
                vec![num(*t), num(transmission(s, self.spec, self.drive)?), num(reflection(s, self.spec, self.drive)?)];
            row.extend(excitation_profile(s).into_iter().map(num));
            table.push(row);
        }
        Ok(table)
    }

    fn sweep_freq(&self, grid: &[f64]) -> Result<Table> {
        let n = self.spec.n();
        self.check_cap(n)?;
        let rows = grid
            .par_iter()
            .map(|&w| -> Result<Vec<String>> {
                let drive = self.drive.with_omega_p(w);
                let s = self.solve(self.spec, &drive)?;
                let linear = single_photon(self.spec, w)?.transmission();
                let mut row = vec![
                    num(w),
                    num(transmission(&s, self.spec, &drive)?),
                    num(reflection(&s, self.spec, &drive)?),
                    num(linear),
                ];
                row.extend(excitation_profile(&s).into_iter().map(num));
                Ok(row)
            })
            .collect::<Result<Vec<_>>>()?;
        let mut table = Table::new(
            ["omega_p", "transmission", "reflection", "linear_transmission"]
                .map(String::from)
                .into_iter()
                .chain(site_columns(n)),
        );
        rows.into_iter().for_each(|r| table.push(r));
        Ok(table)
    }

    fn sweep_power(&self, grid: &[f64]) -> Result<Table> {
        let n = self.spec.n();
        self.check_cap(n)?;
        let rows = grid
            .par_iter()
            .map(|&i| -> Result<Vec<String>> {
                let drive = DriveSpec { intensity: i, ..*self.drive };
                let s = self.solve(self.spec, &drive)?;
                let mut row = vec![
                    num(i),
                    num(drive.rabi(self.spec.gamma_l)?),
                    num(transmission(&s, self.spec, &drive)?),
                    num(reflection(&s, self.spec, &drive)?),
                ];
                row.extend(excitation_profile(&s).into_iter().map(num));
                Ok(row)
            })
            .collect::<Result<Vec<_>>>()?;
        let mut table = Table::new(
            ["intensity", "rabi", "transmission", "reflection"].map(String::from).into_iter().chain(site_columns(n)),
        );
        rows.into_iter().for_each(|r| table.push(r));
        Ok(table)
    }

    fn scaling(&self, ns: &[usize], jzs: &[f64], window: [usize; 2]) -> Result<(Table, Value)> {
        self.check_cap(*ns.last().expect("nonempty"))?;
        let jobs: Vec<(f64, usize)> = jzs.iter().flat_map(|&jz| ns.iter().map(move |&n| (jz, n))).collect();
        let points = jobs
            .par_iter()
            .map(|&(jz, n)| -> Result<(f64, f64)> {
                let spec = self.resized(n)?.with_couplings(self.spec.jx, jz);
                let s = self.solve(&spec, self.drive)?;
                Ok((transmission(&s, &spec, self.drive)?, reflection(&s, &spec, self.drive)?))
            })
            .collect::<Result<Vec<_>>>()?;
        let mut table = Table::new(["jz", "n", "transmission", "reflection"]);
        for (&(jz, n), &(t, r)) in jobs.iter().zip(&points) {
            table.push(vec![num(jz), n.to_string(), num(t), num(r)]);
        }
        let mut fits = Vec::new();
        for (chunk, &jz) in points.chunks(ns.len()).zip(jzs) {
            let all: Vec<(usize, f64)> = ns.iter().copied().zip(chunk.iter().map(|p| p.0)).collect();
            let inside: Vec<(usize, f64)> =
                all.iter().copied().filter(|&(n, _)| n >= window[0] && n <= window[1]).collect();
            let power = scaling_exponent(&inside).ok();
            let decay = exponential_decay_fit(&all).ok();
            fits.push(json!({
                "jz": jz,
                "jz_over_jx": if self.spec.jx != 0.0 { Some(jz / self.spec.jx) } else { None },
                "fit_window": window,
                "kappa": power.as_ref().map(|f| f.kappa),
                "log_rms": power.as_ref().map(|f| f.rms),
                "decay_rate": decay.as_ref().map(|f| f.rate),
                "decay_r_squared": decay.as_ref().map(|f| f.r_squared),
            }));
        }
        Ok((table, json!({ "fits": fits })))
    }

    fn scatter(&self, ns: &[usize], grid: &[f64]) -> Result<Table> {
        let jobs: Vec<(usize, f64)> = ns.iter().flat_map(|&n| grid.iter().map(move |&w| (n, w))).collect();
        let rows = jobs
            .par_iter()
            .map(|&(n, w)| -> Result<Vec<String>> {
                let res = single_photon(&self.resized(n)?, w)?;
                Ok(vec![
                    n.to_string(),
                    num(w),
                    num(res.transmission()),
                    num(res.reflection()),
                    num(res.t.re),
                    num(res.t.im),
                    num(res.r.re),
                    num(res.r.im),
                ])
            })
            .collect::<Result<Vec<_>>>()?;
        let mut table = Table::new(["n", "omega_p", "transmission", "reflection", "t_re", "t_im", "r_re", "r_im"]);
        rows.into_iter().for_each(|r| table.push(r));
        Ok(table)
    }
}

fn fit_table(us: &[f64], terms: &[usize], rmax: usize) -> Result<Table> {
    let jobs: Vec<(f64, usize)> = us.iter().flat_map(|&u| terms.iter().map(move |&l| (u, l))).collect();
    let fits = jobs.par_iter().map(|&(u, l)| fit_powerlaw(u, l, rmax)).collect::<Result<Vec<_>, _>>()?;
    let mut table = Table::new([
        "u",
        "terms",
        "rmax",
        "k",
        "gamma",
        "delta",
        "residual",
        "max_abs_error",
        "converged",
        "iterations",
    ]);
    for fit in fits.iter().map(|f| f.canonical()) {
        for (k, (g, d)) in fit.gamma().iter().zip(fit.delta()).enumerate() {
            table.push(vec![
                num(fit.u()),
                fit.terms().to_string(),
                fit.rmax().to_string(),
                (k + 1).to_string(),
                num(*g),
                num(*d),
                num(fit.residual()),
                num(fit.max_abs_error()),
                fit.converged().to_string(),
                fit.iterations().to_string(),
            ]);
        }
    }
    Ok(table)
}

/// Names and tolerances of the self-test checks.
pub const CHECKS: [(&str, f64); 3] =
    [("generator-vs-brute-force", 1e-13), ("two-atom-transcription", 1e-14), ("flux-conservation", 1e-8)];

fn random_medium(rng: &mut ChaCha8Rng, n: usize, losses: bool) -> MediumSpec {
    let omega = (0..n).map(|_| rng.gen_range(0.8..1.2)).collect();
    let mut spec = MediumSpec::uniform(n, 1.0)
        .with_couplings(rng.gen_range(0.0..0.2), rng.gen_range(0.0..0.2))
        .with_baths(rng.gen_range(0.02..0.3), rng.gen_range(0.02..0.3));
    spec.omega = omega;
    if losses {
        spec = spec.with_losses(rng.gen_range(0.0..0.1), rng.gen_range(0.0..0.1));
    }
    spec
}

fn random_drive(rng: &mut ChaCha8Rng) -> Result<DriveSpec> {
    Ok(DriveSpec::from_intensity(rng.gen_range(0.8..1.2), rng.gen_range(1e-4..0.3))?)
}

fn check_error(check: usize, n: usize, rng: &mut ChaCha8Rng) -> Result<f64> {
    let losses = rng.gen_bool(0.5);
    let opts = AssembleOptions { n_cap: n, ..Default::default() };
    Ok(match check {
        0 => {
            let spec = random_medium(rng, n, losses);
            let drive = random_drive(rng)?;
            let gen = assemble_with(&spec, &drive, &opts)?;
            let oracle = brute_force_generator(&spec, &drive)?;
            let dw = gen.omega().iter().zip(&oracle.omega).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
            gen.z().max_abs_diff_dense(&oracle.z).max(dw)
        }
        1 => {
            let spec = random_medium(rng, 2, losses);
            let drive = random_drive(rng)?;
            let gen = assemble_with(&spec, &drive, &opts)?;
            let (z2, w2) = two_atom_reference(&spec, &drive)?;
            let perm = TWO_ATOM_DIGITS
                .iter()
                .map(|&(a, b)| {
                    let label = OperatorLabel::from_digits(&[a, b])?;
                    gen.map().index_of(&label).ok_or(QleError::InvalidDigit(a))
                })
                .collect::<Result<Vec<_>, _>>()?;
            let mut worst: f64 = 0.0;
            for (a, &ra) in perm.iter().enumerate() {
                worst = worst.max((gen.omega()[ra] - w2[a]).norm());
                for (b, &rb) in perm.iter().enumerate() {
                    worst = worst.max((gen.z().get(ra, rb) - z2[(a, b)]).norm());
                }
            }
            worst
        }
        _ => {
            let spec = random_medium(rng, n, false);
            let drive = random_drive(rng)?;
            let s = steady_state(&assemble_with(&spec, &drive, &opts)?)?;
            (transmission(&s, &spec, &drive)? + reflection(&s, &spec, &drive)? - 1.0).abs()
        }
    })
}

fn validate(seed: u64, draws: usize, max_n: usize) -> Result<Table> {
    let mut jobs = Vec::new();
    for (check, _) in CHECKS.iter().enumerate() {
        let ns: Vec<usize> = if check == 1 { vec![2] } else { (1..=max_n).collect() };
        jobs.extend(ns.into_iter().map(|n| (check, n)));
    }
    let errors = jobs
        .par_iter()
        .enumerate()
        .map(|(stream, &(check, n))| -> Result<f64> {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(stream as u64);
            let mut worst: f64 = 0.0;
            for _ in 0..draws {
                worst = worst.max(check_error(check, n, &mut rng)?);
            }
            Ok(worst)
        })
        .collect::<Result<Vec<_>>>()?;
    let mut table = Table::new(["check", "n", "draws", "max_error", "tolerance", "passed"]);
    for (&(check, n), err) in jobs.iter().zip(errors) {
        let (name, tol) = CHECKS[check];
        table.push(vec![
            name.to_string(),
            n.to_string(),
            draws.to_string(),
            num(err),
            num(tol),
            (err <= tol).to_string(),
        ]);
    }
    Ok(table)
}
