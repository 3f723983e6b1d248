//! Command implementations behind the `taskalloc` binary.
//!
//! Each `run_*` returns the report text and the exit status it implies;
//! writing files under `--out` happens here too, so the binary only prints.
//! Reports contain no timings or paths that vary between runs.

use std::fmt::Write as _;
use std::fs;
use std::io;
use std::path::{Path, PathBuf};

use taskalloc::drd::{
    self, initial_state, simulate_with_reference, DrdConfig, InitStrategy, Trajectory,
};
use taskalloc::instances::ExampleId;
use taskalloc::io::{fmt_num, parse_problem, write_oracle_csv, write_trajectory_csv};
use taskalloc::lambda_solver::{self, compare_and_select, solve_lambda, CompareConfig};
use taskalloc::verify::{
    self, grid_min, kkt_check, monte_carlo_samples, monte_carlo_with, MonteCarloConfig,
};
use taskalloc::{AllocationProblem, Error};

mod report;
pub mod reproduce;

use report::{allocation_table, breakpoint_table, certificate_lines, key_label};

pub const EXIT_OK: i32 = 0;
pub const EXIT_MISMATCH: i32 = 5;
pub const EXIT_NUMERICAL: i32 = 4;

/// Default relative allowance for "solver cost <= oracle cost".
pub const DEFAULT_GAP_TOL: f64 = 1e-9;
pub const DEFAULT_SAMPLES: u64 = 1_000_000;
pub const DEFAULT_SEED: u64 = 1;
/// Grid points per axis used when `--grid` is not given, before the budget cap.
const GRID_POINTS_PER_AXIS: f64 = 2000.0;
const GRID_POINT_BUDGET: f64 = 1e7;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Solve,
    Simulate,
    Verify,
    Reproduce,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub command: Command,
    /// Problem file; alternative to `example` for solve/simulate/verify.
    pub input: Option<PathBuf>,
    /// Built-in instance id, or `all` for reproduce.
    pub example: Option<String>,
    pub output_dir: Option<PathBuf>,
    pub dt: Option<f64>,
    pub max_steps: Option<u64>,
    /// KKT multiplier tolerance (solve), residual tolerance (simulate) or
    /// relative gap allowance (verify).
    pub tol: Option<f64>,
    pub samples: u64,
    pub seed: u64,
    pub grid: Option<f64>,
    /// Number of raw Monte Carlo samples to dump to `oracle.csv`.
    pub dump_samples: Option<u64>,
}

impl RunConfig {
    pub fn new(command: Command) -> Self {
        RunConfig {
            command,
            input: None,
            example: None,
            output_dir: None,
            dt: None,
            max_steps: None,
            tol: None,
            samples: DEFAULT_SAMPLES,
            seed: DEFAULT_SEED,
            grid: None,
            dump_samples: None,
        }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error(transparent)]
    Core(#[from] Error),
    #[error("{source}\nsuggestion: rerun with --dt {suggested_dt:e}")]
    Overflow { source: Error, suggested_dt: f64 },
    #[error("cannot read {}: {source}", path.display())]
    Read { path: PathBuf, source: io::Error },
    #[error("cannot write {}: {source}", path.display())]
    Write { path: PathBuf, source: io::Error },
    #[error("{0}")]
    Usage(String),
}

impl CliError {
    pub fn code(&self) -> &'static str {
        match self {
            CliError::Core(e) | CliError::Overflow { source: e, .. } => e.code(),
            CliError::Read { .. } | CliError::Write { .. } => "E_IO",
            CliError::Usage(_) => "E_USAGE",
        }
    }

    pub fn exit_status(&self) -> i32 {
        match self {
            CliError::Core(e) | CliError::Overflow { source: e, .. } => e.exit_status(),
            _ => 2,
        }
    }

    /// Machine-readable code line followed by the message.
    pub fn render(&self) -> String {
        format!("error-code: {}\n{}\n", self.code(), self)
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;

/// Report text together with the exit status it implies.
#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    pub status: i32,
    pub report: String,
}

pub fn run(cfg: &RunConfig) -> CliResult<Outcome> {
    match cfg.command {
        Command::Solve => run_solve(cfg),
        Command::Simulate => run_simulate(cfg),
        Command::Verify => run_verify(cfg),
        Command::Reproduce => run_reproduce(cfg),
    }
}

struct Loaded {
    label: String,
    example: Option<ExampleId>,
    problem: AllocationProblem,
}

fn load(cfg: &RunConfig) -> CliResult<Loaded> {
    match (&cfg.input, &cfg.example) {
        (Some(_), Some(_)) => Err(CliError::Usage(
            "give either --input or --example, not both".into(),
        )),
        (None, None) => Err(CliError::Usage(
            "missing --input <path> (or --example <id>)".into(),
        )),
        (Some(path), None) => {
            let text = fs::read_to_string(path).map_err(|source| CliError::Read {
                path: path.clone(),
                source,
            })?;
            let label = path
                .file_name()
                .map(|s| s.to_string_lossy().into_owned())
                .unwrap_or_else(|| path.display().to_string());
            Ok(Loaded {
                label,
                example: None,
                problem: parse_problem(&text)?,
            })
        }
        (None, Some(id)) => {
            let id: ExampleId = id.parse()?;
            Ok(Loaded {
                label: id.name().to_string(),
                example: Some(id),
                problem: id.problem(),
            })
        }
    }
}

fn write_file(dir: &Path, name: &str, contents: &[u8]) -> CliResult<()> {
    fs::create_dir_all(dir).map_err(|source| CliError::Write {
        path: dir.to_path_buf(),
        source,
    })?;
    let path = dir.join(name);
    fs::write(&path, contents).map_err(|source| CliError::Write { path, source })
}

fn header(out: &mut String, command: &str, l: &Loaded) {
    let p = &l.problem;
    let family = p
        .uniform_family()
        .map(|f| f.to_string())
        .unwrap_or_else(|| "mixed".to_string());
    let _ = writeln!(out, "taskalloc {command}");
    let _ = writeln!(
        out,
        "instance: {} ({} agents, {} edges, total {}, {family} costs)",
        l.label,
        p.n(),
        p.graph().edge_count(),
        fmt_num(p.total())
    );
}

pub fn run_solve(cfg: &RunConfig) -> CliResult<Outcome> {
    let l = load(cfg)?;
    let p = &l.problem;
    let tol = cfg.tol.unwrap_or(verify::MULTIPLIER_TOL);
    let mut out = String::new();
    header(&mut out, "solve", &l);
    out.push('\n');

    match lambda_solver::breakpoints(p) {
        Ok(table) => {
            out.push_str(&breakpoint_table(&table));
            if table.scale == taskalloc::KeyScale::Log {
                // Logarithmic keys are usually printed, and tabulated, at three decimals.
                out.push('\n');
                let _ = writeln!(out, "with keys rounded to 3 decimals:");
                out.push_str(&breakpoint_table(&lambda_solver::breakpoints_rounded(
                    p, 3,
                )?));
            }
        }
        Err(Error::MixedFamilies) => out.push_str(
            "breakpoints: not tabulated for mixed families; solved by bisection on lambda\n",
        ),
        Err(e) => return Err(e.into()),
    }
    let sol = solve_lambda(p)?;
    let _ = writeln!(out);
    let _ = writeln!(out, "method: {:?}", sol.method);
    if let Some(j) = sol.bracket {
        let _ = writeln!(out, "bracket: {} -> {}", j + 1, j + 2);
    }
    let _ = writeln!(out, "{} = {}", key_label(sol.scale), fmt_num(sol.key));
    let _ = writeln!(out, "lambda = {}", fmt_num(sol.lambda()));
    out.push('\n');
    out.push_str(&allocation_table(p, &sol.allocation));
    let _ = writeln!(out, "sum: {}", fmt_num(sol.allocation.sum()));
    let _ = writeln!(out, "cost: {}", fmt_num(p.total_cost(&sol.allocation)?));
    out.push('\n');

    let cert = kkt_check(p, &sol.allocation, tol)?;
    out.push_str(&certificate_lines(&cert, tol));

    if let Some(dir) = &cfg.output_dir {
        write_file(dir, "solve.txt", out.as_bytes())?;
    }
    let status = if cert.passed { EXIT_OK } else { EXIT_MISMATCH };
    Ok(Outcome {
        status,
        report: out,
    })
}

pub fn run_simulate(cfg: &RunConfig) -> CliResult<Outcome> {
    let l = load(cfg)?;
    let p = &l.problem;
    let dt = cfg.dt.unwrap_or_else(|| {
        l.example
            .map(ExampleId::default_dt)
            .unwrap_or(DrdConfig::default().step)
    });
    let mut drd_cfg = DrdConfig::with_step(dt);
    if let Some(m) = cfg.max_steps {
        drd_cfg.max_steps = m;
    }
    if let Some(t) = cfg.tol {
        drd_cfg.residual_tol = t;
    }
    let w0 = initial_state(p, InitStrategy::Uniform);

    // The solver output is the replicator limit exactly when it is interior.
    let sol = solve_lambda(p)?;
    let reference = sol.all_interior().then_some(&sol.allocation);
    let traj = match reference {
        Some(r) => simulate_with_reference(p, &w0, &drd_cfg, r),
        None => drd::simulate(p, &w0, &drd_cfg),
    }
    .map_err(|e| match e {
        Error::StepOverflow { .. } => CliError::Overflow {
            source: e,
            suggested_dt: dt / 2.0,
        },
        other => other.into(),
    })?;

    let mut csv = Vec::new();
    write_trajectory_csv(&mut csv, &traj).expect("writing to memory");
    let dir = cfg.output_dir.clone().unwrap_or_else(|| PathBuf::from("."));
    write_file(&dir, "trajectory.csv", &csv)?;

    let mut out = String::new();
    header(&mut out, "simulate", &l);
    let _ = writeln!(
        out,
        "dt: {}, max steps: {}, residual tol: {}, start: uniform",
        fmt_num(dt),
        drd_cfg.max_steps,
        fmt_num(drd_cfg.residual_tol)
    );
    out.push('\n');
    let _ = writeln!(
        out,
        "converged: {}",
        if traj.converged { "yes" } else { "no" }
    );
    let _ = writeln!(out, "steps: {}", traj.steps);
    let _ = writeln!(out, "t final: {}", fmt_num(traj.steps as f64 * dt));
    let _ = writeln!(out, "final residual: {}", fmt_num(traj.final_residual()));
    let _ = writeln!(out, "final cost: {}", fmt_num(traj.final_cost()));
    let _ = writeln!(
        out,
        "cost nonincreasing over recorded samples: {}",
        if Trajectory::is_nonincreasing(&traj.costs, 1e-9) {
            "yes"
        } else {
            "no"
        }
    );
    let _ = writeln!(
        out,
        "max |sum W - w|: {}",
        fmt_num(traj.max_sum_drift(p.total()))
    );
    let _ = writeln!(
        out,
        "left boxes: {}",
        if traj.left_boxes { "yes" } else { "no" }
    );
    let fitness: Vec<f64> = p
        .agents()
        .iter()
        .zip(traj.final_state.loads())
        .map(|(c, &x)| c.fitness(x))
        .collect();
    let fmin = fitness.iter().cloned().fold(f64::INFINITY, f64::min);
    let fmax = fitness.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let _ = writeln!(
        out,
        "final fitness range: [{}, {}]",
        fmt_num(fmin),
        fmt_num(fmax)
    );
    let _ = writeln!(
        out,
        "lyapunov reference: {}",
        if reference.is_some() {
            "solver output (interior)"
        } else {
            "none (solver output on a bound)"
        }
    );
    out.push('\n');
    out.push_str(&allocation_table(p, &traj.final_state));

    let sel = compare_and_select(
        p,
        &traj.final_state,
        &sol.allocation,
        &CompareConfig::default(),
    )?;
    out.push('\n');
    let _ = writeln!(
        out,
        "selection: {:?} (replicator limit feasible: {}, accumulated {} vs {}, totals {} vs {})",
        sel.chosen,
        if sel.nash_feasible { "yes" } else { "no" },
        fmt_num(sel.accumulated.0),
        fmt_num(sel.accumulated.1),
        fmt_num(sel.totals.0),
        fmt_num(sel.totals.1)
    );
    let _ = writeln!(
        out,
        "trajectory: trajectory.csv ({} rows)",
        traj.times.len()
    );
    write_file(&dir, "summary.txt", out.as_bytes())?;

    let status = if traj.converged {
        EXIT_OK
    } else {
        EXIT_NUMERICAL
    };
    Ok(Outcome {
        status,
        report: out,
    })
}

/// Grid spacing used when none is requested: a fixed number of points per
/// axis, reduced so the whole lattice stays within the point budget.
pub fn default_grid_resolution(p: &AllocationProblem) -> f64 {
    let axes = p.n().saturating_sub(1).max(1) as f64;
    let per_axis = GRID_POINTS_PER_AXIS.min(GRID_POINT_BUDGET.powf(1.0 / axes));
    let widest = p.agents().iter().map(|c| c.width()).fold(0.0, f64::max);
    if widest > 0.0 {
        widest / per_axis
    } else {
        1.0
    }
}

pub fn run_verify(cfg: &RunConfig) -> CliResult<Outcome> {
    let l = load(cfg)?;
    let p = &l.problem;
    let gap_tol = cfg.tol.unwrap_or(DEFAULT_GAP_TOL);
    let mut out = String::new();
    header(&mut out, "verify", &l);
    out.push('\n');

    let sol = solve_lambda(p)?;
    let c_star = p.total_cost(&sol.allocation)?;
    out.push_str(&allocation_table(p, &sol.allocation));
    let _ = writeln!(out, "solver cost: {}", fmt_num(c_star));
    out.push('\n');
    let cert = kkt_check(p, &sol.allocation, verify::MULTIPLIER_TOL)?;
    out.push_str(&certificate_lines(&cert, verify::MULTIPLIER_TOL));
    out.push('\n');

    let mc_cfg = MonteCarloConfig::new(cfg.samples, cfg.seed);
    let mc = monte_carlo_with(p, &mc_cfg)?;
    let mut ok = cert.passed;
    let _ = writeln!(
        out,
        "monte carlo: {} samples, seed {}, sampler {:?}{}",
        mc.samples,
        mc.seed,
        mc.sampler,
        mc.acceptance_rate
            .map(|r| format!(", pilot acceptance {}", fmt_num(r)))
            .unwrap_or_default()
    );
    ok &= oracle_lines(&mut out, "monte carlo", c_star, mc.best_cost, gap_tol);
    let _ = writeln!(out, "  best sample: {}", join(mc.best.loads()));

    if p.n() <= verify::GRID_MAX_DIM {
        let res = cfg.grid.unwrap_or_else(|| default_grid_resolution(p));
        out.push('\n');
        match grid_min(p, res) {
            Ok(g) => {
                let _ = writeln!(out, "grid: resolution {}", fmt_num(res));
                ok &= oracle_lines(&mut out, "grid", c_star, g.best_cost, gap_tol);
                let _ = writeln!(out, "  grid minimizer: {}", join(g.best.loads()));
                let _ = writeln!(
                    out,
                    "  max |grid - solver| per coordinate: {}",
                    fmt_num(g.best.max_abs_diff(&sol.allocation))
                );
            }
            Err(Error::EmptyGrid(r)) => {
                let _ = writeln!(
                    out,
                    "grid: no lattice point on the sum plane at resolution {}",
                    fmt_num(r)
                );
            }
            Err(e) => return Err(e.into()),
        }
    } else if let Some(res) = cfg.grid {
        let _ = writeln!(
            out,
            "grid: skipped at resolution {} (n = {} > {})",
            fmt_num(res),
            p.n(),
            verify::GRID_MAX_DIM
        );
    }

    out.push('\n');
    let _ = writeln!(out, "verdict: {}", if ok { "verified" } else { "MISMATCH" });

    if let Some(dir) = &cfg.output_dir {
        if let Some(count) = cfg.dump_samples {
            let dump_cfg = MonteCarloConfig::new(count, cfg.seed);
            let samples = monte_carlo_samples(p, &dump_cfg)?;
            let mut csv = Vec::new();
            write_oracle_csv(&mut csv, p, &samples).expect("writing to memory");
            write_file(dir, "oracle.csv", &csv)?;
        }
        write_file(dir, "verify.txt", out.as_bytes())?;
    } else if cfg.dump_samples.is_some() {
        return Err(CliError::Usage("--dump-samples needs --out <dir>".into()));
    }

    let status = if ok { EXIT_OK } else { EXIT_MISMATCH };
    Ok(Outcome {
        status,
        report: out,
    })
}

/// Writes the gap lines and returns whether the solver is not beaten.
fn oracle_lines(out: &mut String, name: &str, c_star: f64, best: f64, gap_tol: f64) -> bool {
    let gap = (best - c_star) / c_star.abs().max(f64::MIN_POSITIVE);
    let ok = c_star <= best + gap_tol * c_star.abs();
    let _ = writeln!(out, "  {name} best cost: {}", fmt_num(best));
    let _ = writeln!(
        out,
        "  relative gap (oracle - solver) / solver: {} -> {}",
        fmt_num(gap),
        if ok {
            "solver not beaten"
        } else {
            "ORACLE BEATS SOLVER"
        }
    );
    ok
}

pub(crate) fn join(v: &[f64]) -> String {
    v.iter().map(|&x| fmt_num(x)).collect::<Vec<_>>().join(", ")
}

pub fn run_reproduce(cfg: &RunConfig) -> CliResult<Outcome> {
    if cfg.input.is_some() {
        return Err(CliError::Usage(
            "reproduce runs built-in instances; use --example".into(),
        ));
    }
    let id = cfg
        .example
        .as_deref()
        .ok_or_else(|| CliError::Usage("missing --example <fig2|fig3|tab1|tab3|all>".into()))?;
    let ids: Vec<ExampleId> = if id == "all" {
        ExampleId::ALL.to_vec()
    } else {
        vec![id.parse()?]
    };
    let mut out = String::new();
    let mut all_pass = true;
    for (k, id) in ids.iter().enumerate() {
        if k > 0 {
            out.push('\n');
        }
        let section = reproduce::reproduce(*id, cfg)?;
        all_pass &= section.passed;
        out.push_str(&section.text);
    }
    let _ = writeln!(out, "\noverall: {}", if all_pass { "PASS" } else { "FAIL" });
    if let Some(dir) = &cfg.output_dir {
        write_file(dir, &format!("reproduce_{id}.txt"), out.as_bytes())?;
    }
    let status = if all_pass { EXIT_OK } else { EXIT_MISMATCH };
    Ok(Outcome {
        status,
        report: out,
    })
}

/// Runs the dynamics used by `reproduce` for a replicator example.
pub(crate) fn reproduce_run(
    p: &AllocationProblem,
    id: ExampleId,
    cfg: &RunConfig,
) -> CliResult<Trajectory> {
    let dt = cfg.dt.unwrap_or(id.default_dt());
    let mut drd_cfg = DrdConfig::with_step(dt);
    if let Some(m) = cfg.max_steps {
        drd_cfg.max_steps = m;
    }
    let w0 = initial_state(p, InitStrategy::Uniform);
    drd::simulate(p, &w0, &drd_cfg).map_err(|e| match e {
        Error::StepOverflow { .. } => CliError::Overflow {
            source: e,
            suggested_dt: dt / 2.0,
        },
        other => other.into(),
    })
}
