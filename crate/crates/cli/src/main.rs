//! `lap`: command-line front end for the periodic Helmholtz/Maxwell solvers.
//!
//! Exit codes: 0 on success, 1 for usage, configuration and admissibility
//! errors, 2 for numerical failures (resonance, non-convergence, failed probes).

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_complex::Complex64;
use num_traits::ToPrimitive;

use lap_core::exponents::{
    check_compactness_conditions, check_derivative_conditions, check_gutierrez, check_maxwell_conditions,
    check_simplified_compactness, find_maxwell_bracket, scaling_exponent, CheckResult, LebesgueExponent,
};
use lap_core::grid::{lp_norm, read_field, write_field};
use lap_core::helmholtz::{min_singular_value_probe, solve_lippmann_schwinger, Potential, ProbeOptions, SolveOptions};
use lap_core::maxwell::{
    constant_coefficient_oracle, divergence_relation_check, injectivity_identity_rhs, poynting_identity_check,
    prepare_currents, reduction_residual, solve_maxwell, EMState, MaxwellReport,
};
use lap_core::resolvent::{apply_free_resolvent, operator_norm_lower_bound, SpectralParameter};
use lap_core::sweep::{run_lap_sweep, MediumFamily, ProblemConfig, SweepConfig};
use lap_core::{Grid, LapError, Result};

#[derive(Parser)]
#[command(name = "lap", version, about = "Limiting absorption for periodic Helmholtz and Maxwell problems")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Exponent admissibility checks
    #[command(subcommand)]
    Exponents(ExponentsCmd),
    /// Free resolvent R0(zeta)
    #[command(subcommand)]
    Resolvent(ResolventCmd),
    /// Lippmann–Schwinger solves and the I - K singular value probe
    #[command(subcommand)]
    Helmholtz(HelmholtzCmd),
    /// Maxwell solves, constant-coefficient oracle and identity checks
    #[command(subcommand)]
    Maxwell(MaxwellCmd),
    /// Limiting-absorption sweeps
    #[command(subcommand)]
    Lap(LapCmd),
}

#[derive(Clone, Copy, ValueEnum)]
enum System {
    Gutierrez,
    Maxwell,
    Compactness,
    Simplified,
    Derivative,
}

#[derive(Subcommand)]
enum ExponentsCmd {
    /// Check one inequality system; exit 1 when violated
    Check {
        #[arg(long, value_enum)]
        system: System,
        #[arg(long)]
        p: Option<LebesgueExponent>,
        #[arg(long)]
        ptilde: Option<LebesgueExponent>,
        #[arg(long)]
        q: Option<LebesgueExponent>,
        #[arg(long)]
        q1: Option<LebesgueExponent>,
        #[arg(long)]
        q2: Option<LebesgueExponent>,
        #[arg(long)]
        kappa: Option<LebesgueExponent>,
        #[arg(long = "kappa-tilde")]
        kappa_tilde: Option<LebesgueExponent>,
        #[arg(long, default_value_t = 3)]
        n: u32,
    },
    /// Scan for a Maxwell bracket q1 <= q <= q2 over reciprocals k / den
    Scan {
        #[arg(long)]
        p: LebesgueExponent,
        #[arg(long)]
        ptilde: LebesgueExponent,
        #[arg(long)]
        q: LebesgueExponent,
        #[arg(long, default_value_t = 60)]
        den: u32,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Limit {
    Plus,
    Minus,
}

/// `zeta = re + i im`, or `lambda +- i0` evaluated at the surrogate `lambda +- i delta`.
#[derive(Args)]
struct Spectral {
    #[arg(long = "zeta-re", allow_hyphen_values = true)]
    zeta_re: f64,
    #[arg(long = "zeta-im", default_value_t = 0.0, allow_hyphen_values = true)]
    zeta_im: f64,
    /// Treat `zeta-re` as lambda > 0 approached from above or below
    #[arg(long, value_enum)]
    limit: Option<Limit>,
    #[arg(long, requires = "limit")]
    delta: Option<f64>,
}

impl Spectral {
    fn parameter(&self) -> Result<SpectralParameter> {
        match self.limit {
            None => SpectralParameter::interior(Complex64::new(self.zeta_re, self.zeta_im)),
            Some(limit) => {
                if self.zeta_im != 0.0 {
                    return Err(LapError::Usage("--limit takes a real --zeta-re only".into()));
                }
                let delta = self
                    .delta
                    .ok_or_else(|| LapError::Usage("--limit needs a surrogate --delta".into()))?;
                let z = match limit {
                    Limit::Plus => SpectralParameter::plus_i0(self.zeta_re)?,
                    Limit::Minus => SpectralParameter::minus_i0(self.zeta_re)?,
                };
                z.with_surrogate(delta)
            }
        }
    }
}

#[derive(Subcommand)]
enum ResolventCmd {
    /// Apply R0(zeta) to a field snapshot
    Apply {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        output: PathBuf,
        #[command(flatten)]
        spectral: Spectral,
    },
    /// Probe ||R0(zeta)||_{p->q} |zeta|^-s along a ray, s the scaling exponent
    Scaling {
        #[arg(long, default_value_t = 3)]
        n: usize,
        #[arg(long = "points", default_value_t = 64)]
        points: usize,
        #[arg(long = "length", default_value_t = 40.0)]
        length: f64,
        #[arg(long, default_value = "4/3")]
        p: LebesgueExponent,
        #[arg(long, default_value = "4")]
        q: LebesgueExponent,
        #[arg(long = "zeta-min", default_value_t = 1.0)]
        zeta_min: f64,
        #[arg(long = "zeta-max", default_value_t = 64.0)]
        zeta_max: f64,
        #[arg(long, default_value_t = 7)]
        count: usize,
        /// arg(zeta) in radians
        #[arg(long, default_value_t = std::f64::consts::FRAC_PI_2)]
        angle: f64,
        #[arg(long, default_value_t = 4)]
        trials: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

#[derive(Args)]
struct Solver {
    #[arg(long, default_value_t = 1e-10)]
    tol: f64,
    #[arg(long = "max-iter", default_value_t = 500)]
    max_iter: usize,
}

impl Solver {
    fn options(&self) -> SolveOptions {
        SolveOptions {
            tol: self.tol,
            max_iter: self.max_iter,
        }
    }
}

#[derive(Subcommand)]
enum HelmholtzCmd {
    /// Solve (I - K(zeta)) u = R0(zeta) f; the potential is an m^2-component snapshot
    Solve {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        potential: PathBuf,
        #[arg(long)]
        output: PathBuf,
        #[command(flatten)]
        spectral: Spectral,
        #[command(flatten)]
        solver: Solver,
    },
    /// Estimate the smallest singular value of I - K(zeta)
    Probe {
        #[arg(long)]
        potential: PathBuf,
        #[command(flatten)]
        spectral: Spectral,
        #[arg(long, default_value_t = ProbeOptions::default().block)]
        block: usize,
        #[arg(long, default_value_t = ProbeOptions::default().steps)]
        steps: usize,
        #[arg(long, default_value_t = ProbeOptions::default().seed)]
        seed: u64,
    },
}

#[derive(Args)]
struct MaxwellProblem {
    /// TOML file with [grid], [medium] and [currents]
    #[arg(long)]
    config: PathBuf,
    #[arg(long = "zeta-re", allow_hyphen_values = true)]
    zeta_re: f64,
    #[arg(long = "zeta-im", default_value_t = 0.0, allow_hyphen_values = true)]
    zeta_im: f64,
    /// Gaussian mollification width applied before the Leray projection
    #[arg(long, default_value_t = 0.0)]
    sigma: f64,
    /// Exponent of the reported L^q norms
    #[arg(long, default_value = "4")]
    q: LebesgueExponent,
}

impl MaxwellProblem {
    fn zeta(&self) -> Complex64 {
        Complex64::new(self.zeta_re, self.zeta_im)
    }
}

#[derive(Subcommand)]
enum MaxwellCmd {
    /// Solve the Maxwell system; writes E.lapf, H.lapf and report.csv
    Solve {
        #[command(flatten)]
        problem: MaxwellProblem,
        #[command(flatten)]
        solver: Solver,
        #[arg(long = "out-dir")]
        out_dir: PathBuf,
    },
    /// Mode-by-mode solution for a constant medium; writes E.lapf and H.lapf
    Oracle {
        #[command(flatten)]
        problem: MaxwellProblem,
        #[arg(long = "out-dir")]
        out_dir: PathBuf,
    },
    /// Solve and print every identity check
    Verify {
        #[command(flatten)]
        problem: MaxwellProblem,
        #[command(flatten)]
        solver: Solver,
    },
}

#[derive(Subcommand)]
enum LapCmd {
    /// Run a delta -> 0 sweep and write the CSV report
    Sweep {
        #[arg(long)]
        config: PathBuf,
        /// CSV destination; standard output when absent
        #[arg(long)]
        output: Option<PathBuf>,
        /// Directory for per-delta E/H snapshots
        #[arg(long = "save-fields")]
        save_fields: Option<PathBuf>,
    },
}

/// How a command finished when it did not fail outright.
enum Outcome {
    Done,
    /// A check ran and came out negative.
    Rejected,
    NumericalFailure,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    match run(cli.command) {
        Ok(Outcome::Done) => ExitCode::SUCCESS,
        Ok(Outcome::Rejected) => ExitCode::from(1),
        Ok(Outcome::NumericalFailure) => ExitCode::from(2),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_numerical() { 2 } else { 1 })
        }
    }
}

fn run(command: Command) -> Result<Outcome> {
    match command {
        Command::Exponents(cmd) => exponents(cmd),
        Command::Resolvent(cmd) => resolvent(cmd),
        Command::Helmholtz(cmd) => helmholtz(cmd),
        Command::Maxwell(cmd) => maxwell(cmd),
        Command::Lap(LapCmd::Sweep {
            config,
            output,
            save_fields,
        }) => sweep(&config, output.as_deref(), save_fields.as_deref()),
    }
}

fn need(value: Option<LebesgueExponent>, flag: &str) -> Result<LebesgueExponent> {
    value.ok_or_else(|| LapError::Usage(format!("this system needs --{flag}")))
}

fn exponents(cmd: ExponentsCmd) -> Result<Outcome> {
    match cmd {
        ExponentsCmd::Check {
            system,
            p,
            ptilde,
            q,
            q1,
            q2,
            kappa,
            kappa_tilde,
            n,
        } => {
            let result: CheckResult = match system {
                System::Gutierrez => check_gutierrez(&need(p, "p")?, &need(q, "q")?, n)?,
                System::Maxwell => check_maxwell_conditions(&need(p, "p")?, &need(ptilde, "ptilde")?, &need(q, "q")?),
                System::Compactness => check_compactness_conditions(
                    &need(q1, "q1")?,
                    &need(q2, "q2")?,
                    &need(kappa, "kappa")?,
                    &need(kappa_tilde, "kappa-tilde")?,
                    n,
                )?,
                System::Simplified => check_simplified_compactness(&need(q, "q")?, &need(kappa_tilde, "kappa-tilde")?, n)?,
                System::Derivative => {
                    check_derivative_conditions(&need(p, "p")?, &need(ptilde, "ptilde")?, &need(q, "q")?, n)?
                }
            };
            if result.admissible() {
                println!("admissible");
                Ok(Outcome::Done)
            } else {
                println!("not admissible");
                for v in &result.violations {
                    println!("violated: {v}");
                }
                Ok(Outcome::Rejected)
            }
        }
        ExponentsCmd::Scan { p, ptilde, q, den } => {
            match find_maxwell_bracket(&p, &ptilde, &q, den)? {
                Some(b) => println!("q1 = {}\nq2 = {}", b.q1, b.q2),
                None => println!("degenerate: only q1 = q2 = {q}"),
            }
            Ok(Outcome::Done)
        }
    }
}

fn resolvent(cmd: ResolventCmd) -> Result<Outcome> {
    match cmd {
        ResolventCmd::Apply {
            input,
            output,
            spectral,
        } => {
            let f = read_field(&input)?;
            let u = apply_free_resolvent(&f, &spectral.parameter()?)?;
            write_field(&u, &output)?;
            Ok(Outcome::Done)
        }
        ResolventCmd::Scaling {
            n,
            points,
            length,
            p,
            q,
            zeta_min,
            zeta_max,
            count,
            angle,
            trials,
            seed,
        } => {
            if !(zeta_min > 0.0 && zeta_max >= zeta_min && count >= 1) {
                return Err(LapError::Usage("need 0 < zeta-min <= zeta-max and count >= 1".into()));
            }
            let grid = Grid::new(n, points, length)?;
            let s = scaling_exponent(&p, &q, n as u32)?;
            let s = s.to_f64().expect("finite rational");
            println!("abs_zeta,norm_ratio,scaled");
            for k in 0..count {
                let t = if count == 1 { 0.0 } else { k as f64 / (count - 1) as f64 };
                let r = zeta_min * (zeta_max / zeta_min).powf(t);
                let z = SpectralParameter::interior(Complex64::from_polar(r, angle))?;
                let ratio = operator_norm_lower_bound(&z, &p, &q, trials, &grid, seed)?;
                println!("{r:.12e},{ratio:.12e},{:.12e}", ratio * r.powf(-s));
            }
            Ok(Outcome::Done)
        }
    }
}

fn helmholtz(cmd: HelmholtzCmd) -> Result<Outcome> {
    match cmd {
        HelmholtzCmd::Solve {
            input,
            potential,
            output,
            spectral,
            solver,
        } => {
            let f = read_field(&input)?;
            let v = Potential::from_field(&read_field(&potential)?)?;
            let report = solve_lippmann_schwinger(&f, &spectral.parameter()?, &v, solver.options())?;
            write_field(&report.solution, &output)?;
            println!("method = {:?}", report.method);
            println!("iterations = {}", report.iterations);
            println!("relative_residual = {:e}", report.relative_residual);
            Ok(Outcome::Done)
        }
        HelmholtzCmd::Probe {
            potential,
            spectral,
            block,
            steps,
            seed,
        } => {
            let v = Potential::from_field(&read_field(&potential)?)?;
            let sigma = min_singular_value_probe(&spectral.parameter()?, &v, ProbeOptions { block, steps, seed })?;
            println!("sigma_min = {sigma:.12e}");
            Ok(Outcome::Done)
        }
    }
}

struct Prepared {
    med: lap_core::maxwell::MediumProfile,
    currents: lap_core::maxwell::CurrentPair,
    family: MediumFamily,
    eps0: f64,
    mu0: f64,
}

fn prepare(problem: &MaxwellProblem) -> Result<Prepared> {
    let cfg = ProblemConfig::load(&problem.config)?;
    let (med, je, jm) = cfg.build()?;
    let currents = prepare_currents(&je, &jm, problem.sigma)?;
    Ok(Prepared {
        family: cfg.medium.family,
        eps0: cfg.medium.eps.unwrap_or(cfg.medium.eps_inf),
        mu0: cfg.medium.mu.unwrap_or(cfg.medium.mu_inf),
        med,
        currents,
    })
}

fn write_state(state: &EMState, dir: &Path) -> Result<()> {
    fs::create_dir_all(dir)?;
    write_field(&state.e, dir.join("E.lapf"))?;
    write_field(&state.h, dir.join("H.lapf"))
}

fn maxwell(cmd: MaxwellCmd) -> Result<Outcome> {
    match cmd {
        MaxwellCmd::Solve {
            problem,
            solver,
            out_dir,
        } => {
            let p = prepare(&problem)?;
            let zeta = problem.zeta();
            let (state, report) = solve_maxwell(&p.med, &p.currents, zeta, solver.options())?;
            write_state(&state, &out_dir)?;
            let row = report_row(&p, &state, &report, zeta, &problem.q)?;
            fs::write(out_dir.join("report.csv"), &row)?;
            print!("{row}");
            Ok(Outcome::Done)
        }
        MaxwellCmd::Oracle { problem, out_dir } => {
            let p = prepare(&problem)?;
            if p.family != MediumFamily::Constant {
                return Err(LapError::Usage("the oracle needs a constant medium".into()));
            }
            let state = constant_coefficient_oracle(p.eps0, p.mu0, &p.currents, problem.zeta())?;
            write_state(&state, &out_dir)?;
            println!("norm_E_q = {:.12e}", lp_norm(&state.e, &problem.q));
            println!("norm_H_q = {:.12e}", lp_norm(&state.h, &problem.q));
            Ok(Outcome::Done)
        }
        MaxwellCmd::Verify { problem, solver } => {
            let p = prepare(&problem)?;
            let zeta = problem.zeta();
            let (state, report) = solve_maxwell(&p.med, &p.currents, zeta, solver.options())?;
            let poynting = poynting_identity_check(&p.med, &state, &p.currents, zeta)?;
            let (div_e, div_h) = divergence_relation_check(&p.med, &state)?;
            let u = state.helmholtz_variable(&p.med)?;
            let assembly = lap_core::maxwell::assemble_potentials(&p.med, zeta)?;
            let direct = lap_core::helmholtz::injectivity_functional(&u, &assembly.potential)?;
            let formula = injectivity_identity_rhs(&p.med, &u, zeta)?;
            println!("iterations = {}", report.solve.iterations);
            println!("helmholtz_residual = {:e}", report.solve.relative_residual);
            println!("res1 = {:e}", report.r1);
            println!("res2 = {:e}", report.r2);
            println!("amplification = {:e}", report.amplification);
            println!("reduction_residual = {:e}", reduction_residual(&p.med, &state, &p.currents, zeta)?);
            println!("poynting_lhs = {:e}", poynting.lhs);
            println!("poynting_rhs = {:e}", poynting.rhs);
            println!("poynting_gap = {:e}", poynting.gap);
            println!("divergence_relation_E = {div_e:e}");
            println!("divergence_relation_H = {div_h:e}");
            println!("im_u_Vu = {direct:e}");
            println!("im_u_Vu_formula = {formula:e}");
            Ok(Outcome::Done)
        }
    }
}

fn report_row(p: &Prepared, state: &EMState, report: &MaxwellReport, zeta: Complex64, q: &LebesgueExponent) -> Result<String> {
    let poynting = poynting_identity_check(&p.med, state, &p.currents, zeta)?;
    let reduction = reduction_residual(&p.med, state, &p.currents, zeta)?;
    let (div_e, div_h) = divergence_relation_check(&p.med, state)?;
    let cells = [
        zeta.re,
        zeta.im,
        report.solve.iterations as f64,
        report.r1,
        report.r2,
        reduction,
        poynting.gap,
        div_e,
        div_h,
        lp_norm(&state.e, q),
        lp_norm(&state.h, q),
    ];
    let line: Vec<String> = cells.iter().map(|v| format!("{v:.12e}")).collect();
    Ok(format!(
        "zeta_re,zeta_im,iterations,res1,res2,reduction_residual,poynting_gap,div_E,div_H,norm_E_q,norm_H_q\n{}\n",
        line.join(",")
    ))
}

fn sweep(config: &Path, output: Option<&Path>, save_fields: Option<&Path>) -> Result<Outcome> {
    let cfg = SweepConfig::load(config)?;
    let report = run_lap_sweep(&cfg)?;
    let csv = report.to_csv();
    match output {
        Some(path) => fs::write(path, &csv)?,
        None => std::io::stdout().write_all(csv.as_bytes())?,
    }
    if let Some(dir) = save_fields {
        fs::create_dir_all(dir)?;
        for (k, row) in report.rows.iter().enumerate() {
            write_field(&row.state.e, dir.join(format!("E_{k:02}.lapf")))?;
            write_field(&row.state.h, dir.join(format!("H_{k:02}.lapf")))?;
        }
        if let Some(limit) = &report.limit {
            write_field(&limit.e, dir.join("E_limit.lapf"))?;
            write_field(&limit.h, dir.join("H_limit.lapf"))?;
        }
    }
    match &report.failure {
        None => Ok(Outcome::Done),
        Some(f) => {
            eprintln!("error: sweep stopped at delta = {:e}: {}", f.delta, f.message);
            Ok(if f.numerical { Outcome::NumericalFailure } else { Outcome::Rejected })
        }
    }
}
