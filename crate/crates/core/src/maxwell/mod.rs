//! Time-harmonic isotropic Maxwell equations
//!
//! ```text
//! i zeta eps E - curl H = -J_e,    i zeta mu H + curl E = J_m
//! ```
//!
//! solved through the 6-component Helmholtz system for `u = (eps^1/2 E, mu^1/2 H)`:
//! `(Delta + zeta^2 eps_inf mu_inf) u + V(zeta) u = L1(zeta) J~ + L2 J~` with
//! `J~ = (mu^1/2 J_e, eps^1/2 J_m)`.

mod medium;

use num_complex::Complex64;

pub use medium::{Bump, MediumProfile, MediumSpec, MIN_WIDTH_SPACINGS, RESOLVED_WIDTH_SPACINGS};

use crate::error::{LapError, Result};
use crate::grid::{
    apply_scalar_multiplier, curl, divergence, leray_project, spectral_laplacian, upsample, Field,
    Transformed,
};
use crate::helmholtz::{solve_at, Potential, SolveOptions, SolveReport};
use crate::resolvent::check_resonance;

const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };
const ZERO: Complex64 = Complex64 { re: 0.0, im: 0.0 };

fn c(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

fn require_vector(f: &Field, name: &str) -> Result<()> {
    if f.grid().dim() != 3 || f.components() != 3 {
        return Err(LapError::Shape(format!("{name} must be a 3-component field on a 3-D grid")));
    }
    Ok(())
}

/// Divergence-free electric and magnetic currents.
#[derive(Debug, Clone, PartialEq)]
pub struct CurrentPair {
    je: Field,
    jm: Field,
}

impl CurrentPair {
    pub fn zeros(grid: crate::grid::Grid) -> Self {
        Self {
            je: Field::zeros(grid, 3),
            jm: Field::zeros(grid, 3),
        }
    }

    pub fn je(&self) -> &Field {
        &self.je
    }

    pub fn jm(&self) -> &Field {
        &self.jm
    }

    pub fn grid(&self) -> &crate::grid::Grid {
        self.je.grid()
    }

    pub fn is_zero(&self) -> bool {
        self.je.max_norm() == 0.0 && self.jm.max_norm() == 0.0
    }

    /// Largest `||div J||_2 / ||J||_2` over the two currents.
    pub fn divergence_defect(&self) -> f64 {
        [&self.je, &self.jm]
            .iter()
            .map(|j| {
                let n = j.l2_norm();
                if n == 0.0 {
                    0.0
                } else {
                    divergence(j).expect("3 components").l2_norm() / n
                }
            })
            .fold(0.0, f64::max)
    }

    /// Spectral interpolation onto a grid `factor` times finer.
    pub fn refined(&self, factor: usize) -> Result<Self> {
        Ok(Self {
            je: upsample(&self.je, factor)?,
            jm: upsample(&self.jm, factor)?,
        })
    }

    pub fn scale(&self, factor: Complex64) -> Self {
        Self {
            je: self.je.scale(factor),
            jm: self.jm.scale(factor),
        }
    }
}

/// Optional Gaussian mollification `exp(-|xi|^2 sigma^2)` followed by the Leray projection.
pub fn prepare_currents(raw_je: &Field, raw_jm: &Field, sigma: f64) -> Result<CurrentPair> {
    require_vector(raw_je, "J_e")?;
    require_vector(raw_jm, "J_m")?;
    raw_je.same_shape(raw_jm)?;
    if !(sigma >= 0.0 && sigma.is_finite()) {
        return Err(LapError::Parameter(format!("smoothing sigma = {sigma} must be >= 0")));
    }
    let smooth = |f: &Field| -> Result<Field> {
        if sigma == 0.0 {
            return Ok(f.clone());
        }
        apply_scalar_multiplier(f, |freq| c((-freq.norm_sqr * sigma * sigma).exp()))
    };
    Ok(CurrentPair {
        je: leray_project(&smooth(raw_je)?)?,
        jm: leray_project(&smooth(raw_jm)?)?,
    })
}

/// Electromagnetic field pair at spectral parameter `zeta`.
#[derive(Debug, Clone, PartialEq)]
pub struct EMState {
    pub e: Field,
    pub h: Field,
    pub zeta: Complex64,
}

impl EMState {
    /// `u = (eps^1/2 E, mu^1/2 H)`.
    pub fn helmholtz_variable(&self, med: &MediumProfile) -> Result<Field> {
        let se: Vec<f64> = med.eps().iter().map(|v| v.sqrt()).collect();
        let sm: Vec<f64> = med.mu().iter().map(|v| v.sqrt()).collect();
        Field::stack(&[&self.e.weighted(&se)?, &self.h.weighted(&sm)?])
    }

    /// Inverse of [`EMState::helmholtz_variable`].
    pub fn from_helmholtz_variable(med: &MediumProfile, u: &Field, zeta: Complex64) -> Result<Self> {
        if u.components() != 6 {
            return Err(LapError::Shape("Helmholtz variable has 6 components".into()));
        }
        let ie: Vec<f64> = med.eps().iter().map(|v| 1.0 / v.sqrt()).collect();
        let im: Vec<f64> = med.mu().iter().map(|v| 1.0 / v.sqrt()).collect();
        Ok(Self {
            e: u.components_range(0, 3).weighted(&ie)?,
            h: u.components_range(3, 3).weighted(&im)?,
            zeta,
        })
    }

    pub fn refined(&self, factor: usize) -> Result<Self> {
        Ok(Self {
            e: upsample(&self.e, factor)?,
            h: upsample(&self.h, factor)?,
            zeta: self.zeta,
        })
    }
}

/// `v x` as a row-major 3x3 matrix.
fn cross_matrix(v: &[f64; 3]) -> [f64; 9] {
    [0.0, -v[2], v[1], v[2], 0.0, -v[0], -v[1], v[0], 0.0]
}

/// The assembled `6 x 6` coefficient fields of the Helmholtz system at one `zeta`.
#[derive(Debug, Clone)]
pub struct PotentialAssembly {
    pub zeta: Complex64,
    /// `V(zeta) = [[V1, -i zeta v x], [i zeta v x, V2]]`
    pub potential: Potential,
    /// `L1(zeta) = [[i zeta (eps mu)^1/2, -1/2 grad log eps x], [-1/2 grad log mu x, -i zeta (eps mu)^1/2]]`
    pub l1: Potential,
}

impl PotentialAssembly {
    /// `L2 J~ = (-curl J~_m, -curl J~_e)`, applied spectrally.
    pub fn apply_l2(&self, jt: &Field) -> Result<Field> {
        apply_l2(jt)
    }
}

fn apply_l2(jt: &Field) -> Result<Field> {
    if jt.components() != 6 {
        return Err(LapError::Shape("L2 acts on 6-component fields".into()));
    }
    let minus = c(-1.0);
    let top = curl(&jt.components_range(3, 3))?.scale(minus);
    let bottom = curl(&jt.components_range(0, 3))?.scale(minus);
    Field::stack(&[&top, &bottom])
}

/// Builds `V(zeta)` and `L1(zeta)` from the medium's spectral derivatives.
pub fn assemble_potentials(med: &MediumProfile, zeta: Complex64) -> Result<PotentialAssembly> {
    let grid = *med.grid();
    let len = grid.len();
    let background = med.eps_inf() * med.mu_inf();
    let zeta2 = zeta * zeta;
    let mut v = vec![ZERO; 36 * len];
    let mut l1 = vec![ZERO; 36 * len];
    for i in 0..len {
        let (eps, mu) = (med.eps()[i], med.mu()[i]);
        let shift = -zeta2 * (background - eps * mu);
        let block = &mut v[36 * i..36 * (i + 1)];
        let blocks = [
            (0, &med.hess_log_eps[i], med.lap_ratio_eps[i]),
            (3, &med.hess_log_mu[i], med.lap_ratio_mu[i]),
        ];
        for (offset, hess, lap_ratio) in blocks {
            for r in 0..3 {
                for col in 0..3 {
                    let mut value = c(hess[r * 3 + col]);
                    if r == col {
                        value += -lap_ratio + shift;
                    }
                    block[(offset + r) * 6 + offset + col] = value;
                }
            }
        }
        let vx = cross_matrix(&med.v[i]);
        for r in 0..3 {
            for col in 0..3 {
                block[r * 6 + 3 + col] = -I * zeta * vx[r * 3 + col];
                block[(3 + r) * 6 + col] = I * zeta * vx[r * 3 + col];
            }
        }

        let root = (eps * mu).sqrt();
        let block = &mut l1[36 * i..36 * (i + 1)];
        let ge = cross_matrix(&med.grad_log_eps[i]);
        let gm = cross_matrix(&med.grad_log_mu[i]);
        for r in 0..3 {
            block[r * 6 + r] = I * zeta * root;
            block[(3 + r) * 6 + 3 + r] = -I * zeta * root;
            for col in 0..3 {
                block[r * 6 + 3 + col] = c(-0.5 * ge[r * 3 + col]);
                block[(3 + r) * 6 + col] = c(-0.5 * gm[r * 3 + col]);
            }
        }
    }
    Ok(PotentialAssembly {
        zeta,
        potential: Potential::detect(grid, 6, v)?,
        l1: Potential::detect(grid, 6, l1)?,
    })
}

/// `J~ = (mu^1/2 J_e, eps^1/2 J_m)`.
pub fn scaled_currents(med: &MediumProfile, j: &CurrentPair) -> Result<Field> {
    let sm: Vec<f64> = med.mu().iter().map(|v| v.sqrt()).collect();
    let se: Vec<f64> = med.eps().iter().map(|v| v.sqrt()).collect();
    Field::stack(&[&j.je.weighted(&sm)?, &j.jm.weighted(&se)?])
}

/// Right-hand side `L1(zeta) J~ + L2 J~` of the Helmholtz system.
pub fn maxwell_to_helmholtz_rhs(med: &MediumProfile, j: &CurrentPair, zeta: Complex64) -> Result<Field> {
    let assembly = assemble_potentials(med, zeta)?;
    rhs_with(&assembly, med, j)
}

fn rhs_with(assembly: &PotentialAssembly, med: &MediumProfile, j: &CurrentPair) -> Result<Field> {
    if j.grid() != med.grid() {
        return Err(LapError::Shape("currents and medium live on different grids".into()));
    }
    let jt = scaled_currents(med, j)?;
    assembly.l1.apply(&jt)?.add(&assembly.apply_l2(&jt)?)
}

/// `zeta^2 eps_inf mu_inf`, the spectral parameter of the Helmholtz system.
pub fn helmholtz_parameter(med: &MediumProfile, zeta: Complex64) -> Complex64 {
    zeta * zeta * med.eps_inf() * med.mu_inf()
}

/// Which side of the real axis `zeta = omega +- i delta` approaches from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ApproachSign {
    Plus,
    Minus,
}

impl ApproachSign {
    pub fn factor(self) -> f64 {
        match self {
            Self::Plus => 1.0,
            Self::Minus => -1.0,
        }
    }
}

#[derive(Debug, Clone)]
pub struct MaxwellReport {
    /// The Helmholtz solve; `solution` is `u = (eps^1/2 E, mu^1/2 H)`.
    pub solve: SolveReport,
    /// `||i zeta eps E - curl H + J_e||_2`
    pub r1: f64,
    /// `||i zeta mu H + curl E - J_m||_2`
    pub r2: f64,
    /// `||J_e||_2 + ||J_m||_2`
    pub current_norm: f64,
    /// `max(r1, r2) / (tol (||J_e|| + ||J_m||))`: how much the solver tolerance is
    /// amplified on the way back to the Maxwell equations.
    pub amplification: f64,
}

/// Solves the Maxwell system at a complex `zeta` (any `zeta != 0` with a
/// resonance-free Helmholtz parameter).
pub fn solve_maxwell(
    med: &MediumProfile,
    j: &CurrentPair,
    zeta: Complex64,
    opts: SolveOptions,
) -> Result<(EMState, MaxwellReport)> {
    if zeta == ZERO {
        return Err(LapError::Parameter("zeta must be nonzero".into()));
    }
    let kappa = helmholtz_parameter(med, zeta);
    check_resonance(med.grid(), kappa)?;
    let assembly = assemble_potentials(med, zeta)?;
    let f = rhs_with(&assembly, med, j)?;
    let solve = solve_at(&f, kappa, &assembly.potential, opts)?;
    let state = EMState::from_helmholtz_variable(med, &solve.solution, zeta)?;
    let (r1, r2) = maxwell_residuals(med, &state, j)?;
    let current_norm = j.je.l2_norm() + j.jm.l2_norm();
    let amplification = if current_norm == 0.0 {
        0.0
    } else {
        r1.max(r2) / (opts.tol * current_norm)
    };
    Ok((
        state,
        MaxwellReport {
            solve,
            r1,
            r2,
            current_norm,
            amplification,
        },
    ))
}

/// Approximating problem at `zeta = omega +- i delta`.
pub fn solve_maxwell_lap(
    med: &MediumProfile,
    j: &CurrentPair,
    omega: f64,
    delta: f64,
    sign: ApproachSign,
    opts: SolveOptions,
) -> Result<(EMState, MaxwellReport)> {
    if !(omega != 0.0 && omega.is_finite()) {
        return Err(LapError::Parameter(format!("omega = {omega} must be finite and nonzero")));
    }
    if !(delta > 0.0 && delta.is_finite()) {
        return Err(LapError::Parameter(format!("delta = {delta} must be positive")));
    }
    solve_maxwell(med, j, Complex64::new(omega, sign.factor() * delta), opts)
}

/// Discrete residuals `(r1, r2)` of the two Maxwell equations.
pub fn maxwell_residuals(med: &MediumProfile, state: &EMState, j: &CurrentPair) -> Result<(f64, f64)> {
    let z = state.zeta;
    let r1 = state
        .e
        .weighted(med.eps())?
        .scale(I * z)
        .sub(&curl(&state.h)?)?
        .add(&j.je)?
        .l2_norm();
    let r2 = state
        .h
        .weighted(med.mu())?
        .scale(I * z)
        .add(&curl(&state.e)?)?
        .sub(&j.jm)?
        .l2_norm();
    Ok((r1, r2))
}

/// Mode-by-mode solution of the Maxwell system in a homogeneous medium `(eps0, mu0)`.
///
/// With `d` the first-derivative wavevector, eliminating `H` gives
/// `(zeta^2 eps0 mu0 - |d|^2) E = i zeta mu0 J_e - i d x J_m - d (d.E)` and
/// `d.E = i d.J_e / (zeta eps0)`; then `H = (J_m - i d x E) / (i zeta mu0)`.
pub fn constant_coefficient_oracle(eps0: f64, mu0: f64, j: &CurrentPair, zeta: Complex64) -> Result<EMState> {
    if !(eps0 > 0.0 && mu0 > 0.0) {
        return Err(LapError::Medium("eps0 and mu0 must be positive".into()));
    }
    if zeta == ZERO {
        return Err(LapError::Parameter("zeta must be nonzero".into()));
    }
    let grid = *j.grid();
    let len = grid.len();
    let te = Transformed::of(&j.je);
    let tm = Transformed::of(&j.jm);
    let mut e_hat = Transformed::of(&Field::zeros(grid, 3));
    let mut h_hat = e_hat.clone();
    let target = zeta * zeta * eps0 * mu0;
    for k in 0..len {
        let d = grid.derivative_wavevector(k);
        let je = [0, 1, 2].map(|a| te.coefficients()[a * len + k]);
        let jm = [0, 1, 2].map(|a| tm.coefficients()[a * len + k]);
        if je.iter().chain(&jm).all(|v| *v == ZERO) {
            continue;
        }
        let d2 = d[0] * d[0] + d[1] * d[1] + d[2] * d[2];
        let denom = target - d2;
        if denom.norm() <= 1e-12 {
            return Err(LapError::Resonance {
                shell: d2,
                distance: denom.norm(),
            });
        }
        let d_dot_je: Complex64 = (0..3).map(|a| je[a] * d[a]).sum();
        let d_dot_e = I * d_dot_je / (zeta * eps0);
        let d_cross_jm = cross(&d, &jm);
        let e: [Complex64; 3] =
            [0, 1, 2].map(|a| (I * zeta * mu0 * je[a] - I * d_cross_jm[a] - d_dot_e * d[a]) / denom);
        let d_cross_e = cross(&d, &e);
        let h: [Complex64; 3] = [0, 1, 2].map(|a| (jm[a] - I * d_cross_e[a]) / (I * zeta * mu0));
        for a in 0..3 {
            e_hat.coefficients_mut()[a * len + k] = e[a];
            h_hat.coefficients_mut()[a * len + k] = h[a];
        }
    }
    Ok(EMState {
        e: e_hat.into_field(),
        h: h_hat.into_field(),
        zeta,
    })
}

fn cross(d: &[f64; 3], v: &[Complex64; 3]) -> [Complex64; 3] {
    [
        v[2] * d[1] - v[1] * d[2],
        v[0] * d[2] - v[2] * d[0],
        v[1] * d[0] - v[0] * d[1],
    ]
}

/// Oversampling factor for [`reduction_residual`].
pub const RESIDUAL_OVERSAMPLING: usize = 2;

/// `||(Delta + zeta^2 eps_inf mu_inf) u + V(zeta) u - L1 J~ - L2 J~||_2 / ||u||_2`.
///
/// The state and currents are interpolated onto a grid [`RESIDUAL_OVERSAMPLING`]
/// times finer and the medium is resampled there, so the number measures how well
/// the discrete solution satisfies the continuous system rather than repeating
/// the equation the solver already enforced on its own grid.
pub fn reduction_residual(med: &MediumProfile, state: &EMState, j: &CurrentPair, zeta: Complex64) -> Result<f64> {
    let fine_med = med.refined(RESIDUAL_OVERSAMPLING)?;
    let fine_state = state.refined(RESIDUAL_OVERSAMPLING)?;
    let fine_j = j.refined(RESIDUAL_OVERSAMPLING)?;
    reduction_residual_on_grid(&fine_med, &fine_state, &fine_j, zeta)
}

/// [`reduction_residual`] evaluated on the state's own grid.
pub fn reduction_residual_on_grid(
    med: &MediumProfile,
    state: &EMState,
    j: &CurrentPair,
    zeta: Complex64,
) -> Result<f64> {
    let u = state.helmholtz_variable(med)?;
    let assembly = assemble_potentials(med, zeta)?;
    let lhs = spectral_laplacian(&u)
        .add(&u.scale(helmholtz_parameter(med, zeta)))?
        .add(&assembly.potential.apply(&u)?)?;
    let residual = lhs.sub(&rhs_with(&assembly, med, j)?)?.l2_norm();
    let norm = u.l2_norm();
    Ok(if norm == 0.0 { residual } else { residual / norm })
}

/// `sum_x s(x) h^n` for a pointwise real density.
fn integrate(grid: &crate::grid::Grid, density: impl Iterator<Item = f64>) -> f64 {
    density.sum::<f64>() * grid.cell_volume()
}

/// `int v . Re(u_m x conj(u_e))`.
fn cross_term(med: &MediumProfile, u: &Field) -> f64 {
    let len = med.grid().len();
    let vals = u.values();
    integrate(
        med.grid(),
        (0..len).map(|i| {
            let ue = [0, 1, 2].map(|a| vals[a * len + i].conj());
            let um = [3, 4, 5].map(|a| vals[a * len + i]);
            let x = [
                um[1] * ue[2] - um[2] * ue[1],
                um[2] * ue[0] - um[0] * ue[2],
                um[0] * ue[1] - um[1] * ue[0],
            ];
            let v = med.v()[i];
            v[0] * x[0].re + v[1] * x[1].re + v[2] * x[2].re
        }),
    )
}

/// `int (eps mu - eps_inf mu_inf) |u|^2`.
fn weighted_mass(med: &MediumProfile, u: &Field) -> f64 {
    let w = med.contrast();
    integrate(med.grid(), (0..med.grid().len()).map(|i| w[i] * u.pointwise_norm(i).powi(2)))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PoyntingCheck {
    pub lhs: f64,
    pub rhs: f64,
    /// `|lhs - rhs| / max(|lhs|, |rhs|)`, or 0 when both vanish.
    pub gap: f64,
}

/// Energy-flux identity for solutions:
/// `int v . Re(u_m x conj u_e) = Im(zeta) int w |u|^2 + int w Re(mu^-1/2 conj(J_m) . u_m - eps^-1/2 J_e . conj(u_e))`,
/// `w = eps mu - eps_inf mu_inf`.
pub fn poynting_identity_check(
    med: &MediumProfile,
    state: &EMState,
    j: &CurrentPair,
    zeta: Complex64,
) -> Result<PoyntingCheck> {
    let u = state.helmholtz_variable(med)?;
    let lhs = cross_term(med, &u);
    let w = med.contrast();
    let len = med.grid().len();
    let (uv, je, jm) = (u.values(), j.je.values(), j.jm.values());
    let source = integrate(
        med.grid(),
        (0..len).map(|i| {
            let (se, sm) = (med.eps()[i].sqrt(), med.mu()[i].sqrt());
            let mut acc = 0.0;
            for a in 0..3 {
                acc += (jm[a * len + i].conj() * uv[(3 + a) * len + i]).re / sm;
                acc -= (je[a * len + i] * uv[a * len + i].conj()).re / se;
            }
            w[i] * acc
        }),
    );
    let rhs = zeta.im * weighted_mass(med, &u) + source;
    let scale = lhs.abs().max(rhs.abs());
    Ok(PoyntingCheck {
        lhs,
        rhs,
        gap: if scale == 0.0 { 0.0 } else { (lhs - rhs).abs() / scale },
    })
}

/// `Im(zeta^2) int w |u|^2 - 2 Re(zeta) int v . Re(u_m x conj u_e)`, which equals
/// `Im <u, V(zeta) u>` for every `u`.
pub fn injectivity_identity_rhs(med: &MediumProfile, u: &Field, zeta: Complex64) -> Result<f64> {
    if u.components() != 6 || u.grid() != med.grid() {
        return Err(LapError::Shape("u must be a 6-component field on the medium grid".into()));
    }
    Ok((zeta * zeta).im * weighted_mass(med, u) - 2.0 * zeta.re * cross_term(med, u))
}

/// `(||div E + eps^-1 grad eps . E|| / ||E||, ||div H + mu^-1 grad mu . H|| / ||H||)`.
///
/// Both vanish for exact solutions with divergence-free currents, since
/// `div(eps E) = 0` and `div(mu H) = 0`.
pub fn divergence_relation_check(med: &MediumProfile, state: &EMState) -> Result<(f64, f64)> {
    let relation = |f: &Field, grad_log: &[[f64; 3]]| -> Result<f64> {
        let len = f.grid().len();
        let div = divergence(f)?;
        let vals = f.values();
        let combined: Vec<Complex64> = (0..len)
            .map(|i| div.values()[i] + (0..3).map(|a| vals[a * len + i] * grad_log[i][a]).sum::<Complex64>())
            .collect();
        let norm = f.l2_norm();
        let res = Field::from_values(*f.grid(), 1, combined)?.l2_norm();
        Ok(if norm == 0.0 { res } else { res / norm })
    };
    Ok((relation(&state.e, &med.grad_log_eps)?, relation(&state.h, &med.grad_log_mu)?))
}
