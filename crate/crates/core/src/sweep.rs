//! Limiting-absorption sweeps `zeta = omega +- i delta_k`, `delta_k = delta0 ratio^k`,
//! with power-law fitting of successor differences and Richardson extrapolation
//! of the limit field.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Deserialize;

use crate::error::{LapError, Result};
use crate::exponents::{check_maxwell_conditions, LebesgueExponent};
use crate::grid::{lp_norm, random_band_limited, read_field, Field, Grid};
use crate::helmholtz::SolveOptions;
use crate::maxwell::{
    poynting_identity_check, prepare_currents, solve_maxwell_lap, ApproachSign, Bump, CurrentPair, EMState,
    MediumProfile, MediumSpec,
};

/// Default boundary-cell threshold on `|eps mu - eps_inf mu_inf| / (eps_inf mu_inf)`.
pub const DEFAULT_DECAY_THRESHOLD: f64 = 0.05;

#[derive(Debug, Clone, Copy, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    #[serde(default = "three")]
    pub n: usize,
    #[serde(rename = "N")]
    pub points: usize,
    #[serde(rename = "L")]
    pub length: f64,
}

fn three() -> usize {
    3
}

impl GridConfig {
    pub fn build(&self) -> Result<Grid> {
        if self.n != 3 {
            return Err(LapError::Config(format!("Maxwell sweeps need n = 3, got {}", self.n)));
        }
        Grid::new(self.n, self.points, self.length)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MediumFamily {
    Constant,
    Bumps,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MediumConfig {
    pub family: MediumFamily,
    #[serde(default = "one")]
    pub eps_inf: f64,
    #[serde(default = "one")]
    pub mu_inf: f64,
    /// Constant family only; defaults to `eps_inf`.
    pub eps: Option<f64>,
    /// Constant family only; defaults to `mu_inf`.
    pub mu: Option<f64>,
    #[serde(default)]
    pub eps_bumps: Vec<Bump>,
    #[serde(default)]
    pub mu_bumps: Vec<Bump>,
    /// Relative boundary mismatch allowed by the decay check.
    pub decay_threshold: Option<f64>,
}

fn one() -> f64 {
    1.0
}

impl MediumConfig {
    pub fn build(&self, grid: Grid) -> Result<MediumProfile> {
        let med = match self.family {
            MediumFamily::Constant => {
                if !(self.eps_bumps.is_empty() && self.mu_bumps.is_empty()) {
                    return Err(LapError::Config("bumps given for a constant medium".into()));
                }
                MediumProfile::constant(
                    grid,
                    self.eps.unwrap_or(self.eps_inf),
                    self.mu.unwrap_or(self.mu_inf),
                    self.eps_inf,
                    self.mu_inf,
                )?
            }
            MediumFamily::Bumps => {
                if self.eps.is_some() || self.mu.is_some() {
                    return Err(LapError::Config("eps/mu constants given for a bump medium".into()));
                }
                let spec = MediumSpec {
                    eps_inf: self.eps_inf,
                    mu_inf: self.mu_inf,
                    eps_bumps: self.eps_bumps.clone(),
                    mu_bumps: self.mu_bumps.clone(),
                };
                MediumProfile::from_spec(grid, &spec)?
            }
        };
        let threshold = self.decay_threshold.unwrap_or(DEFAULT_DECAY_THRESHOLD);
        med.check_decay(threshold * self.eps_inf * self.mu_inf)?;
        Ok(med)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CurrentFamily {
    /// `pol_e cos(xi . x)`, `pol_m cos(xi . x)` for the lattice mode `xi = 2 pi k / L`.
    Mode,
    /// Gaussian-localized `pol g(x - c)`, periodized.
    Gaussian,
    /// Random band-limited fields.
    Random,
    /// LAPF snapshots.
    Files,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CurrentConfig {
    pub family: CurrentFamily,
    #[serde(default)]
    pub pol_e: [f64; 3],
    #[serde(default)]
    pub pol_m: [f64; 3],
    pub mode: Option<[i64; 3]>,
    pub center: Option<[f64; 3]>,
    pub width: Option<f64>,
    pub bandwidth: Option<usize>,
    /// Seed of the random family; falls back to the sweep seed.
    pub seed: Option<u64>,
    pub je: Option<PathBuf>,
    pub jm: Option<PathBuf>,
    /// Apply the mollification schedule `sigma = delta^1/2 h`.
    #[serde(default = "yes")]
    pub smoothing: bool,
}

fn yes() -> bool {
    true
}

impl CurrentConfig {
    /// Raw (unprojected, unsmoothed) currents; relative file paths resolve against `base`.
    pub fn build(&self, grid: Grid, fallback_seed: u64, base: &Path) -> Result<(Field, Field)> {
        let missing = |what: &str| LapError::Config(format!("currents of this family need `{what}`"));
        match self.family {
            CurrentFamily::Mode => {
                let k = self.mode.ok_or_else(|| missing("mode"))?;
                let step = grid.frequency_step();
                let build = |pol: [f64; 3]| {
                    Field::from_fn(grid, 3, |x, c| {
                        let phase: f64 = (0..3).map(|a| k[a] as f64 * step * x[a]).sum();
                        Complex64::new(pol[c] * phase.cos(), 0.0)
                    })
                };
                Ok((build(self.pol_e), build(self.pol_m)))
            }
            CurrentFamily::Gaussian => {
                let width = self.width.ok_or_else(|| missing("width"))?;
                let center = self.center.unwrap_or([grid.length() / 2.0; 3]);
                let bump = Bump {
                    amplitude: 1.0,
                    center,
                    width,
                };
                let profile: Vec<f64> = (0..grid.len()).map(|i| bump.eval(&grid.position(i), grid.length())).collect();
                let build = |pol: [f64; 3]| {
                    Field::from_fn(grid, 3, |_, c| Complex64::new(pol[c], 0.0)).weighted(&profile)
                };
                Ok((build(self.pol_e)?, build(self.pol_m)?))
            }
            CurrentFamily::Random => {
                let bandwidth = self.bandwidth.ok_or_else(|| missing("bandwidth"))?;
                let mut rng = ChaCha8Rng::seed_from_u64(self.seed.unwrap_or(fallback_seed));
                let je = random_band_limited(&grid, 3, bandwidth, &mut rng);
                let jm = random_band_limited(&grid, 3, bandwidth, &mut rng);
                Ok((je, jm))
            }
            CurrentFamily::Files => {
                let load = |p: &Option<PathBuf>, name: &str| -> Result<Field> {
                    let p = p.as_ref().ok_or_else(|| missing(name))?;
                    let f = read_field(base.join(p))?;
                    if f.grid() != &grid || f.components() != 3 {
                        return Err(LapError::Config(format!(
                            "{} does not hold a 3-component field on the configured grid",
                            p.display()
                        )));
                    }
                    Ok(f)
                };
                Ok((load(&self.je, "je")?, load(&self.jm, "jm")?))
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExponentConfig {
    pub p: String,
    pub ptilde: String,
    pub q: String,
    pub q1: Option<String>,
    pub q2: Option<String>,
}

/// Parsed exponents of a sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepExponents {
    pub p: LebesgueExponent,
    pub p_tilde: LebesgueExponent,
    pub q: LebesgueExponent,
    pub q1: Option<LebesgueExponent>,
    pub q2: Option<LebesgueExponent>,
}

impl ExponentConfig {
    pub fn parse(&self) -> Result<SweepExponents> {
        let opt = |s: &Option<String>| s.as_deref().map(LebesgueExponent::parse).transpose();
        Ok(SweepExponents {
            p: LebesgueExponent::parse(&self.p)?,
            p_tilde: LebesgueExponent::parse(&self.ptilde)?,
            q: LebesgueExponent::parse(&self.q)?,
            q1: opt(&self.q1)?,
            q2: opt(&self.q2)?,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
pub enum SignConfig {
    #[serde(rename = "+")]
    Plus,
    #[serde(rename = "-")]
    Minus,
}

impl From<SignConfig> for ApproachSign {
    fn from(s: SignConfig) -> Self {
        match s {
            SignConfig::Plus => ApproachSign::Plus,
            SignConfig::Minus => ApproachSign::Minus,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepParams {
    pub omega: f64,
    #[serde(default = "plus")]
    pub sign: SignConfig,
    pub delta0: f64,
    pub ratio: f64,
    pub count: usize,
    #[serde(default = "default_tol")]
    pub tol: f64,
    #[serde(default = "default_max_iter")]
    pub max_iter: usize,
    #[serde(default)]
    pub seed: u64,
    /// Floor constant: every `delta_k` must be at least `c_floor / L`.
    /// Defaults to `2 |omega| (eps_inf mu_inf)^1/2`.
    pub c_floor: Option<f64>,
}

fn plus() -> SignConfig {
    SignConfig::Plus
}

fn default_tol() -> f64 {
    SolveOptions::default().tol
}

fn default_max_iter() -> usize {
    SolveOptions::default().max_iter
}

/// The physical problem of a config file: grid, medium and currents. Other
/// sections are ignored, so a sweep config doubles as a single-solve config.
#[derive(Debug, Clone, PartialEq, Deserialize)]
pub struct ProblemConfig {
    pub grid: GridConfig,
    pub medium: MediumConfig,
    pub currents: CurrentConfig,
    #[serde(skip)]
    pub base_dir: PathBuf,
}

impl ProblemConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| LapError::Config(e.to_string()))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let (text, base_dir) = read_config(path.as_ref())?;
        Ok(Self {
            base_dir,
            ..Self::from_toml(&text)?
        })
    }

    /// Medium and raw currents (before projection and smoothing).
    pub fn build(&self) -> Result<(MediumProfile, Field, Field)> {
        let grid = self.grid.build()?;
        let med = self.medium.build(grid)?;
        let (je, jm) = self.currents.build(grid, 0, &self.base_dir)?;
        Ok((med, je, jm))
    }
}

fn read_config(path: &Path) -> Result<(String, PathBuf)> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| LapError::Config(format!("cannot read {}: {e}", path.display())))?;
    Ok((text, path.parent().map(Path::to_path_buf).unwrap_or_default()))
}

/// A whole sweep configuration, as read from TOML.
#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    pub grid: GridConfig,
    pub medium: MediumConfig,
    pub currents: CurrentConfig,
    pub exponents: ExponentConfig,
    pub sweep: SweepParams,
    /// Directory that relative paths in the config resolve against.
    #[serde(skip)]
    pub base_dir: PathBuf,
}

impl SweepConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| LapError::Config(e.to_string()))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let (text, base_dir) = read_config(path.as_ref())?;
        Ok(Self {
            base_dir,
            ..Self::from_toml(&text)?
        })
    }

    pub fn deltas(&self) -> Vec<f64> {
        let s = &self.sweep;
        (0..s.count).map(|k| s.delta0 * s.ratio.powi(k as i32)).collect()
    }

    pub fn c_floor(&self) -> f64 {
        self.sweep
            .c_floor
            .unwrap_or(2.0 * self.sweep.omega.abs() * (self.medium.eps_inf * self.medium.mu_inf).sqrt())
    }

    /// Checks every parameter that can be checked without solving.
    pub fn validate(&self) -> Result<()> {
        let s = &self.sweep;
        if !(s.omega.is_finite() && s.omega != 0.0) {
            return Err(LapError::Config(format!("omega = {} must be finite and nonzero", s.omega)));
        }
        if !(s.delta0 > 0.0 && s.delta0.is_finite()) {
            return Err(LapError::Config(format!("delta0 = {} must be positive", s.delta0)));
        }
        if !(s.ratio > 0.0 && s.ratio < 1.0) {
            return Err(LapError::Config(format!("ratio = {} must lie in (0, 1)", s.ratio)));
        }
        if s.count < 3 {
            return Err(LapError::Config(format!("count = {} is below 3", s.count)));
        }
        if !(s.tol > 0.0) {
            return Err(LapError::Config("tol must be positive".into()));
        }
        let c_floor = self.c_floor();
        if !(c_floor >= 0.0) {
            return Err(LapError::Config(format!("c_floor = {c_floor} must be nonnegative")));
        }
        let floor = c_floor / self.grid.length;
        let last = *self.deltas().last().expect("count >= 3");
        if last < floor {
            return Err(LapError::Config(format!(
                "delta = {last:e} falls below the periodization floor c_floor / L = {floor:e}"
            )));
        }
        Ok(())
    }
}

/// Least-squares line through `(log x, log y)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PowerLawFit {
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
}

pub fn fit_power_law(xs: &[f64], ys: &[f64]) -> Result<PowerLawFit> {
    if xs.len() != ys.len() {
        return Err(LapError::Shape(format!("{} abscissae for {} values", xs.len(), ys.len())));
    }
    if xs.len() < 3 {
        return Err(LapError::Domain("a power-law fit needs at least 3 points".into()));
    }
    if let Some(bad) = xs.iter().chain(ys).find(|v| !(**v > 0.0 && v.is_finite())) {
        return Err(LapError::Domain(format!("power-law data must be positive and finite, found {bad}")));
    }
    let lx: Vec<f64> = xs.iter().map(|x| x.ln()).collect();
    let ly: Vec<f64> = ys.iter().map(|y| y.ln()).collect();
    let n = lx.len() as f64;
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxx: f64 = lx.iter().map(|x| (x - mx).powi(2)).sum();
    if sxx == 0.0 {
        return Err(LapError::Domain("abscissae must not all coincide".into()));
    }
    let sxy: f64 = lx.iter().zip(&ly).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ss_tot: f64 = ly.iter().map(|y| (y - my).powi(2)).sum();
    let ss_res: f64 = lx.iter().zip(&ly).map(|(x, y)| (y - intercept - slope * x).powi(2)).sum();
    let r_squared = if ss_tot == 0.0 { 1.0 } else { 1.0 - ss_res / ss_tot };
    Ok(PowerLawFit {
        slope,
        intercept,
        r_squared,
    })
}

/// One solve of the sweep.
#[derive(Debug, Clone)]
pub struct SweepRow {
    pub delta: f64,
    /// `||u||_q`, `u = (eps^1/2 E, mu^1/2 H)`
    pub norm_u_q: f64,
    /// `||E||_q + ||H||_q`
    pub norm_eh_q: f64,
    pub res1: f64,
    pub res2: f64,
    pub poynting_gap: f64,
    /// `||u_k - u_{k-1}||_q`; NaN on the first row.
    pub diff_prev: f64,
    /// `||J_e||_p + ||J_m||_p + ||J_e||_ptilde + ||J_m||_ptilde` for this row's currents.
    pub current_norm: f64,
    pub iterations: usize,
    pub state: EMState,
    pub u: Field,
}

impl SweepRow {
    /// `(||E||_q + ||H||_q) / (||J||_p + ||J||_ptilde)`; NaN for vanishing currents.
    pub fn resolvent_constant(&self) -> f64 {
        if self.current_norm == 0.0 {
            f64::NAN
        } else {
            self.norm_eh_q / self.current_norm
        }
    }
}

/// A solve that failed part-way through the sweep.
#[derive(Debug, Clone)]
pub struct SweepFailure {
    pub delta: f64,
    pub message: String,
    pub numerical: bool,
}

#[derive(Debug, Clone)]
pub struct SweepReport {
    /// Sorted by decreasing `delta`.
    pub rows: Vec<SweepRow>,
    pub failure: Option<SweepFailure>,
    /// Fitted exponent of `diff_prev` against `delta`; NaN when the fit is impossible.
    pub rate: f64,
    pub rate_fit: Option<PowerLawFit>,
    /// Empirical resolvent constant at the last `delta`; NaN (0/0) for zero currents.
    pub c_omega: f64,
    /// Two-point Richardson extrapolation of `(E, H)` to `delta = 0`.
    pub limit: Option<EMState>,
    pub ratio: f64,
}

impl SweepReport {
    pub fn is_complete(&self) -> bool {
        self.failure.is_none()
    }

    /// Relative change of the empirical constant over the last two rows.
    pub fn c_omega_drift(&self) -> f64 {
        match self.rows.as_slice() {
            [.., a, b] => (b.resolvent_constant() - a.resolvent_constant()).abs() / b.resolvent_constant().abs(),
            _ => f64::NAN,
        }
    }

    /// CSV with columns
    /// `delta, norm_u_q, norm_EH_q, res1, res2, poynting_gap, diff_prev`,
    /// then footer rows `rate` and `C_omega` (and `failed` when a solve failed).
    pub fn to_csv(&self) -> String {
        let mut out = String::from("delta,norm_u_q,norm_EH_q,res1,res2,poynting_gap,diff_prev\n");
        for r in &self.rows {
            let cells = [r.delta, r.norm_u_q, r.norm_eh_q, r.res1, r.res2, r.poynting_gap, r.diff_prev];
            let line: Vec<String> = cells.iter().map(|v| fmt_num(*v)).collect();
            let _ = writeln!(out, "{}", line.join(","));
        }
        let _ = writeln!(out, "rate,{}", fmt_num(self.rate));
        let _ = writeln!(out, "C_omega,{}", fmt_num(self.c_omega));
        if let Some(f) = &self.failure {
            let _ = writeln!(out, "failed,{},\"{}\"", fmt_num(f.delta), f.message.replace('"', "'"));
        }
        out
    }
}

fn fmt_num(v: f64) -> String {
    if v.is_nan() {
        "NaN".into()
    } else {
        format!("{v:.12e}")
    }
}

/// Mollification width `sigma = delta^1/2 h` of the sweep.
pub fn smoothing_sigma(delta: f64, h: f64) -> f64 {
    delta.sqrt() * h
}

/// Runs the sweep. Configuration and admissibility errors surface before any
/// solve; a failed solve ends the sweep with a partial report.
pub fn run_lap_sweep(cfg: &SweepConfig) -> Result<SweepReport> {
    let exps = cfg.exponents.parse()?;
    check_maxwell_conditions(&exps.p, &exps.p_tilde, &exps.q).require("maxwell")?;
    cfg.validate()?;
    let grid = cfg.grid.build()?;
    let med = cfg.medium.build(grid)?;
    let (raw_je, raw_jm) = cfg.currents.build(grid, cfg.sweep.seed, &cfg.base_dir)?;
    let opts = SolveOptions {
        tol: cfg.sweep.tol,
        max_iter: cfg.sweep.max_iter,
    };
    let sign: ApproachSign = cfg.sweep.sign.into();
    let omega = cfg.sweep.omega;
    let q = &exps.q;

    let mut rows: Vec<SweepRow> = Vec::new();
    let mut failure = None;
    for delta in cfg.deltas() {
        let sigma = if cfg.currents.smoothing {
            smoothing_sigma(delta, grid.spacing())
        } else {
            0.0
        };
        let outcome = prepare_currents(&raw_je, &raw_jm, sigma).and_then(|j| {
            let (state, report) = solve_maxwell_lap(&med, &j, omega, delta, sign, opts)?;
            let poynting = poynting_identity_check(&med, &state, &j, state.zeta)?;
            Ok((j, state, report, poynting))
        });
        let (j, state, report, poynting) = match outcome {
            Ok(v) => v,
            Err(e) => {
                failure = Some(SweepFailure {
                    delta,
                    numerical: e.is_numerical(),
                    message: e.to_string(),
                });
                break;
            }
        };
        let u = report.solve.solution;
        let diff_prev = rows
            .last()
            .map(|prev| lp_norm(&u.sub(&prev.u).expect("same shape"), q))
            .unwrap_or(f64::NAN);
        let current_norm = current_norm(&j, &exps.p) + current_norm(&j, &exps.p_tilde);
        rows.push(SweepRow {
            delta,
            norm_u_q: lp_norm(&u, q),
            norm_eh_q: lp_norm(&state.e, q) + lp_norm(&state.h, q),
            res1: report.r1,
            res2: report.r2,
            poynting_gap: poynting.gap,
            diff_prev,
            current_norm,
            iterations: report.solve.iterations,
            state,
            u,
        });
    }

    let rate_fit = {
        let (xs, ys): (Vec<f64>, Vec<f64>) = rows.iter().skip(1).map(|r| (r.delta, r.diff_prev)).unzip();
        fit_power_law(&xs, &ys).ok()
    };
    let rate = rate_fit.map_or(f64::NAN, |f| f.slope);
    let c_omega = rows.last().map_or(f64::NAN, SweepRow::resolvent_constant);
    let limit = match (rows.as_slice(), rate_fit) {
        ([.., a, b], Some(fit)) if fit.slope > 0.0 => {
            let factor = 1.0 / (cfg.sweep.ratio.powf(-fit.slope) - 1.0);
            let u0 = b.u.sub(&a.u.sub(&b.u)?.scale(Complex64::new(factor, 0.0)))?;
            Some(EMState::from_helmholtz_variable(&med, &u0, Complex64::new(omega, 0.0))?)
        }
        _ => None,
    };
    Ok(SweepReport {
        rows,
        failure,
        rate,
        rate_fit,
        c_omega,
        limit,
        ratio: cfg.sweep.ratio,
    })
}

fn current_norm(j: &CurrentPair, p: &LebesgueExponent) -> f64 {
    lp_norm(j.je(), p) + lp_norm(j.jm(), p)
}

#[cfg(test)]
mod tests {
    use rand::Rng;

    use super::*;

    const BASE: &str = r#"
[grid]
N = 8
L = 6.283185307179586

[medium]
family = "constant"

[currents]
family = "mode"
mode = [3, 0, 0]
pol_e = [0.0, 1.0, 0.0]

[exponents]
p = "6/5"
ptilde = "2"
q = "4"

[sweep]
omega = 1.0
delta0 = 0.5
ratio = 0.5
count = 4
"#;

    #[test]
    fn power_law_examples() {
        let xs: Vec<f64> = (1..=6).map(|k| k as f64 * 0.7).collect();
        let fit = fit_power_law(&xs, &xs).unwrap();
        assert!((fit.slope - 1.0).abs() < 1e-14 && (fit.r_squared - 1.0).abs() < 1e-14);
        let ys: Vec<f64> = xs.iter().map(|x| 3.0 * x.powf(0.25)).collect();
        let fit = fit_power_law(&xs, &ys).unwrap();
        assert!((fit.slope - 0.25).abs() < 1e-10);
        assert!((fit.intercept - 3f64.ln()).abs() < 1e-10);

        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let xs: Vec<f64> = (0..10).map(|k| 1.5f64.powi(k)).collect();
        let ys: Vec<f64> = xs.iter().map(|x| x.powf(0.25) * (1.0 + rng.random_range(-0.05..0.05))).collect();
        let fit = fit_power_law(&xs, &ys).unwrap();
        assert!((0.2..=0.3).contains(&fit.slope), "{}", fit.slope);

        assert!(fit_power_law(&[1.0, 2.0, 3.0], &[1.0, 0.0, 2.0]).is_err());
        assert!(fit_power_law(&[1.0, 2.0], &[1.0, 2.0]).is_err());
    }

    #[test]
    fn config_round_trip_and_floor() {
        let cfg = SweepConfig::from_toml(BASE).unwrap();
        assert_eq!(cfg.deltas(), vec![0.5, 0.25, 0.125, 0.0625]);
        // default floor 2 omega / L = 1 / pi > 0.0625
        assert!(matches!(cfg.validate(), Err(LapError::Config(_))));
        let lowered = BASE.replace("count = 4", "count = 4\nc_floor = 0.1");
        SweepConfig::from_toml(&lowered).unwrap().validate().unwrap();
        let bad = SweepConfig::from_toml(&BASE.replace("ratio = 0.5", "ratio = 1.5")).unwrap();
        assert!(bad.validate().is_err());
        assert!(SweepConfig::from_toml("[grid]\nN = 8").is_err());
    }

    #[test]
    fn constant_medium_sweep_is_analytic() {
        // on 8^3 the schedule sigma = delta^1/2 h is far from its linear regime; switch it off
        let text = BASE
            .replace("count = 4", "count = 4\nc_floor = 0.1")
            .replace("pol_e = [0.0, 1.0, 0.0]", "pol_e = [0.0, 1.0, 0.0]\nsmoothing = false");
        let cfg = SweepConfig::from_toml(&text).unwrap();
        let report = run_lap_sweep(&cfg).unwrap();
        assert!(report.is_complete());
        assert_eq!(report.rows.len(), 4);
        assert!(report.rows[0].diff_prev.is_nan());
        for w in report.rows.windows(2).skip(1) {
            assert!(w[1].diff_prev < w[0].diff_prev);
        }
        assert!((report.rate - 1.0).abs() < 0.15, "{}", report.rate);
        assert!(report.limit.is_some());
        let csv = report.to_csv();
        assert!(csv.starts_with("delta,norm_u_q,norm_EH_q,res1,res2,poynting_gap,diff_prev\n"));
        assert!(csv.contains("\nrate,") && csv.contains("\nC_omega,"));
        // determinism
        assert_eq!(run_lap_sweep(&cfg).unwrap().to_csv(), csv);
    }

    #[test]
    fn zero_currents_report_sentinels() {
        let text = BASE
            .replace("pol_e = [0.0, 1.0, 0.0]", "")
            .replace("count = 4", "count = 3\nc_floor = 0.1");
        let report = run_lap_sweep(&SweepConfig::from_toml(&text).unwrap()).unwrap();
        assert!(report.rows.iter().all(|r| r.norm_u_q == 0.0));
        assert!(report.rows.iter().skip(1).all(|r| r.diff_prev == 0.0));
        assert!(report.c_omega.is_nan());
        assert!(report.rate.is_nan());
    }

    #[test]
    fn inadmissible_exponents_fail_before_solving() {
        let text = BASE.replace("q = \"4\"", "q = \"2\"");
        let err = run_lap_sweep(&SweepConfig::from_toml(&text).unwrap()).unwrap_err();
        assert!(matches!(err, LapError::Admissibility { .. }));
    }
}
