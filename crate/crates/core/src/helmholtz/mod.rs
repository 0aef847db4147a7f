//! Birman–Schwinger operator `K(zeta) = -R0(zeta) V` and the Lippmann–Schwinger
//! equation `(I - K(zeta)) u = R0(zeta) f` for `m`-component Helmholtz systems.

mod krylov;
mod potential;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub use potential::Potential;

use crate::error::{LapError, Result};
use crate::exponents::LebesgueExponent;
use crate::grid::{band_limit, random_band_limited, Field, Transformed};
use crate::resolvent::{check_resonance, free_resolvent_at, nearest_shell, SpectralParameter};

use krylov::{dot, gmres, norm};

pub const GMRES_RESTART: usize = 50;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SolveMethod {
    /// `V = 0`: the answer is `R0(zeta) f`.
    FreeResolvent,
    /// Fixed-point iteration; used when `||K|| < 1/2` is guaranteed.
    Neumann,
    Gmres,
}

#[derive(Debug, Clone)]
pub struct SolveReport {
    pub solution: Field,
    pub iterations: usize,
    /// `||(I - K) u - R0 f||_2 / ||R0 f||_2`, recomputed from the returned solution.
    pub relative_residual: f64,
    pub near_singular: bool,
    pub method: SolveMethod,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolveOptions {
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for SolveOptions {
    fn default() -> Self {
        Self {
            tol: 1e-10,
            max_iter: 500,
        }
    }
}

/// `V = V1 + V2` with `V2` small in `L^kappa_tilde`.
#[derive(Debug, Clone)]
pub struct PotentialSplit {
    pub v1: Potential,
    pub v2: Potential,
    /// Points with `|V(x)| > threshold` go to `V1`.
    pub threshold: f64,
    pub kappa: LebesgueExponent,
    pub kappa_tilde: LebesgueExponent,
    pub v2_norm: f64,
}

/// Magnitude-threshold split `V1 = V 1{|V| > t}`, `V2 = V - V1`, with the largest
/// `t` for which `||V2||_kappa_tilde <= eta`.
///
/// The norm of `V2` only changes where `t` crosses a value of `|V(x)|`, so the
/// optimal threshold is found exactly by a prefix scan over the sorted magnitudes.
pub fn decompose_potential(
    v: &Potential,
    kappa: &LebesgueExponent,
    kappa_tilde: &LebesgueExponent,
    eta: f64,
) -> Result<PotentialSplit> {
    if !(eta.is_finite() && eta > 0.0) {
        return Err(LapError::Parameter(format!("eta = {eta} must be positive")));
    }
    let norms = v.pointwise_norms();
    let mut sorted = norms.clone();
    sorted.sort_by(f64::total_cmp);
    let cell = v.grid().cell_volume();
    let exponent = kappa_tilde.to_f64();
    let budget = exponent.map(|k| eta.powf(k) / cell);
    let fits = |acc: f64, value: f64| match (exponent, budget) {
        (Some(k), Some(b)) => acc + value.powf(k) <= b,
        _ => value <= eta,
    };
    // grow V2 from the smallest magnitudes while the budget allows
    let mut acc = 0.0;
    let mut count = 0;
    while count < sorted.len() && fits(acc, sorted[count]) {
        if let Some(k) = exponent {
            acc += sorted[count].powf(k);
        }
        count += 1;
    }
    // ties must go together
    while count > 0 && count < sorted.len() && sorted[count] == sorted[count - 1] {
        count -= 1;
    }
    let threshold = if count == sorted.len() {
        sorted.last().copied().unwrap_or(0.0)
    } else if count == 0 {
        // the smallest magnitude is already too large: everything moves to V1
        0.0
    } else {
        sorted[count - 1]
    };
    let v1 = v.masked(|i| norms[i] > threshold);
    let v2 = v.masked(|i| norms[i] <= threshold);
    let v2_norm = v2.lebesgue_norm(kappa_tilde);
    Ok(PotentialSplit {
        v1,
        v2,
        threshold,
        kappa: kappa.clone(),
        kappa_tilde: kappa_tilde.clone(),
        v2_norm,
    })
}

fn require_shape(u: &Field, v: &Potential) -> Result<()> {
    if u.grid() != v.grid() || u.components() != v.size() {
        return Err(LapError::Shape(format!(
            "field has {} components on {:?}, potential is {}x{} on {:?}",
            u.components(),
            u.grid(),
            v.size(),
            v.size(),
            v.grid()
        )));
    }
    Ok(())
}

pub(crate) fn bs_at(u: &Field, zeta: Complex64, v: &Potential) -> Result<Field> {
    Ok(free_resolvent_at(&v.apply(u)?, zeta)?.scale(Complex64::new(-1.0, 0.0)))
}

/// `K(zeta) u = -R0(zeta)(V u)`.
pub fn apply_bs_operator(u: &Field, z: &SpectralParameter, v: &Potential) -> Result<Field> {
    require_shape(u, v)?;
    let zeta = z.effective()?;
    check_resonance(u.grid(), zeta)?;
    bs_at(u, zeta, v)
}

/// `(I - K(zeta))^* w = w + V^* R0(conj zeta) w`.
pub fn apply_bs_adjoint(w: &Field, z: &SpectralParameter, v: &Potential) -> Result<Field> {
    require_shape(w, v)?;
    let zeta = z.effective()?;
    check_resonance(w.grid(), zeta)?;
    w.add(&v.apply_adjoint(&free_resolvent_at(w, zeta.conj())?)?)
}

/// Upper bound on `||K(zeta)||_{2 -> 2}` from the symbol sup and `sup |V|`.
pub fn bs_norm_bound(zeta: Complex64, v: &Potential) -> f64 {
    let (distance, _) = nearest_shell(v.grid(), zeta);
    v.sup_norm() / distance
}

fn field_like(template: &Field, values: Vec<Complex64>) -> Field {
    Field::from_values(*template.grid(), template.components(), values).expect("finite iterate")
}

/// Solves `(I - K(zeta)) u = R0(zeta) f`.
///
/// Uses plain fixed-point iteration when `||K|| < 1/2` is guaranteed and restarted
/// GMRES (restart [`GMRES_RESTART`]) otherwise. Not reaching `tol` within
/// `max_iter` products is reported as [`LapError::NonConvergence`].
pub fn solve_lippmann_schwinger(
    f: &Field,
    z: &SpectralParameter,
    v: &Potential,
    opts: SolveOptions,
) -> Result<SolveReport> {
    require_shape(f, v)?;
    let zeta = z.effective()?;
    check_resonance(f.grid(), zeta)?;
    solve_at(f, zeta, v, opts)
}

pub(crate) fn solve_at(f: &Field, zeta: Complex64, v: &Potential, opts: SolveOptions) -> Result<SolveReport> {
    if !(opts.tol > 0.0) {
        return Err(LapError::Parameter(format!("tolerance {} must be positive", opts.tol)));
    }
    let rhs = free_resolvent_at(f, zeta)?;
    if v.is_zero() {
        return Ok(SolveReport {
            solution: rhs,
            iterations: 0,
            relative_residual: 0.0,
            near_singular: false,
            method: SolveMethod::FreeResolvent,
        });
    }
    let rhs_norm = rhs.l2_norm();
    let residual_of = |u: &Field| -> Result<f64> {
        if rhs_norm == 0.0 {
            return Ok(u.l2_norm());
        }
        let lhs = u.sub(&bs_at(u, zeta, v)?)?;
        Ok(lhs.sub(&rhs)?.l2_norm() / rhs_norm)
    };

    if bs_norm_bound(zeta, v) < 0.5 {
        let mut u = rhs.clone();
        let mut iterations = 0;
        let mut rel = residual_of(&u)?;
        while rel > opts.tol && iterations < opts.max_iter {
            u = rhs.add(&bs_at(&u, zeta, v)?)?;
            iterations += 1;
            rel = residual_of(&u)?;
        }
        return finish(u, iterations, rel, opts, SolveMethod::Neumann);
    }

    let outcome = gmres(
        |x| {
            let u = field_like(&rhs, x.to_vec());
            let ku = bs_at(&u, zeta, v)?;
            Ok(x.iter().zip(ku.values()).map(|(a, b)| a - b).collect())
        },
        rhs.values(),
        rhs.values().to_vec(),
        opts.tol,
        opts.max_iter,
        GMRES_RESTART,
    )?;
    let u = field_like(&rhs, outcome.x);
    let rel = residual_of(&u)?;
    finish(u, outcome.iterations, rel, opts, SolveMethod::Gmres)
}

fn finish(u: Field, iterations: usize, rel: f64, opts: SolveOptions, method: SolveMethod) -> Result<SolveReport> {
    let converged = rel <= opts.tol;
    let report = SolveReport {
        solution: u,
        iterations,
        relative_residual: rel,
        near_singular: !converged,
        method,
    };
    if converged {
        Ok(report)
    } else {
        Err(LapError::NonConvergence {
            report: Box::new(report),
        })
    }
}

/// `Im sum_x conj(u(x)) . V(x) u(x) h^n`.
pub fn injectivity_functional(u: &Field, v: &Potential) -> Result<f64> {
    require_shape(u, v)?;
    Ok(u.inner(&v.apply(u)?)?.im)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ShellTrace {
    pub value: f64,
    /// Lattice modes inside the shell; zero means the shell was empty.
    pub modes: usize,
}

/// Shell-averaged sphere trace `(1/2w) sum_{||xi_k| - sqrt(lambda)| <= w} |g^(xi_k)|^2 (2 pi/L)^n`,
/// with `g^` the continuous-transform surrogate `h^n F[k]`.
pub fn sphere_trace_l2(g: &Field, lambda: f64, width: f64) -> Result<ShellTrace> {
    if !(lambda > 0.0) {
        return Err(LapError::Parameter(format!("lambda = {lambda} must be positive")));
    }
    let spacing = g.grid().frequency_step();
    if !(width >= spacing * (1.0 - 1e-12)) {
        return Err(LapError::Parameter(format!(
            "shell width {width} is below the lattice spacing {spacing}"
        )));
    }
    let t = Transformed::of(g);
    let radius = lambda.sqrt();
    let weight = spacing.powi(g.grid().dim() as i32) / (2.0 * width);
    let mut value = 0.0;
    let mut modes = 0;
    for k in 0..g.grid().len() {
        if (t.frequency(k).norm() - radius).abs() <= width {
            modes += 1;
            value += (0..g.components()).map(|c| t.continuous(c, k).norm_sqr()).sum::<f64>();
        }
    }
    Ok(ShellTrace {
        value: value * weight,
        modes,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ImIdentityRow {
    pub delta: f64,
    /// `-Im <R0(lambda + i delta) g, g>` with `<a, b> = sum a conj(b) h^n`.
    pub lhs: f64,
    pub trace: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ImIdentityTable {
    pub lambda: f64,
    pub rows: Vec<ImIdentityRow>,
}

impl ImIdentityTable {
    /// `lhs / (sqrt(lambda) trace)` per row.
    pub fn ratios(&self) -> Vec<f64> {
        let root = self.lambda.sqrt();
        self.rows.iter().map(|r| r.lhs / (root * r.trace)).collect()
    }

    /// The fitted constant (mean ratio over the last half of the rows) and the
    /// relative spread `(max - min) / mean` there.
    pub fn fitted_constant(&self) -> (f64, f64) {
        let ratios = self.ratios();
        let tail = &ratios[ratios.len() / 2..];
        let mean = tail.iter().sum::<f64>() / tail.len() as f64;
        let max = tail.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let min = tail.iter().cloned().fold(f64::INFINITY, f64::min);
        (mean, (max - min) / mean.abs())
    }
}

/// Tabulates both sides of the identity `-Im <R0(lambda + i0) g, g> = c sqrt(lambda) trace`
/// over the surrogate distances `deltas`; the shell width is `width`.
pub fn verify_im_resolvent_identity(g: &Field, lambda: f64, deltas: &[f64], width: f64) -> Result<ImIdentityTable> {
    if deltas.is_empty() {
        return Err(LapError::Parameter("empty delta list".into()));
    }
    let trace = sphere_trace_l2(g, lambda, width)?.value;
    let base = SpectralParameter::plus_i0(lambda)?;
    let mut rows = Vec::with_capacity(deltas.len());
    for &delta in deltas {
        let z = base.with_surrogate(delta)?;
        let zeta = z.effective()?;
        check_resonance(g.grid(), zeta)?;
        let r = free_resolvent_at(g, zeta)?;
        let lhs = -g.inner(&r)?.im;
        rows.push(ImIdentityRow { delta, lhs, trace });
    }
    Ok(ImIdentityTable { lambda, rows })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProbeOptions {
    /// Block size of the random starting subspace.
    pub block: usize,
    /// Number of block Krylov extensions.
    pub steps: usize,
    pub seed: u64,
}

impl Default for ProbeOptions {
    fn default() -> Self {
        Self {
            block: 4,
            steps: 12,
            seed: 0x5eed,
        }
    }
}

/// Estimate of the smallest singular value of `I - K(zeta)` on band-limited fields
/// (bandwidth `N/4`).
///
/// Builds a block Krylov space of `P (I - K)^* (I - K) P` from seeded random
/// band-limited fields and returns `min ||(I - K) w|| / ||w||` over that space
/// (Rayleigh–Ritz). Every value returned is attained by an explicit field, so it is
/// an upper bound on the true smallest singular value over the band-limited space.
pub fn min_singular_value_probe(z: &SpectralParameter, v: &Potential, opts: ProbeOptions) -> Result<f64> {
    if opts.block == 0 {
        return Err(LapError::Parameter("probe block size must be positive".into()));
    }
    let zeta = z.effective()?;
    let grid = *v.grid();
    check_resonance(&grid, zeta)?;
    let m = v.size();
    let bandwidth = grid.points() / 4;
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);

    let apply = |w: &Field| -> Result<Field> { w.sub(&bs_at(w, zeta, v)?) };
    let adjoint = |w: &Field| -> Result<Field> { w.add(&v.apply_adjoint(&free_resolvent_at(w, zeta.conj())?)?) };

    let mut basis: Vec<Vec<Complex64>> = Vec::new();
    let mut images: Vec<Vec<Complex64>> = Vec::new();
    let mut block: Vec<Field> = (0..opts.block)
        .map(|_| random_band_limited(&grid, m, bandwidth, &mut rng))
        .collect();
    let mut estimate = f64::INFINITY;
    for _ in 0..=opts.steps {
        let mut added = Vec::new();
        for w in block {
            let mut x = w.into_values();
            for _ in 0..2 {
                for q in &basis {
                    let c = dot(q, &x);
                    x.iter_mut().zip(q).for_each(|(a, b)| *a -= c * b);
                }
            }
            let nx = norm(&x);
            if !nx.is_finite() {
                return Err(LapError::ProbeFailure("non-finite probe vector".into()));
            }
            if nx < 1e-10 {
                continue;
            }
            x.iter_mut().for_each(|a| *a /= nx);
            let q = field_like_grid(&grid, m, x.clone());
            let aq = apply(&q)?;
            basis.push(x);
            images.push(aq.values().to_vec());
            added.push(aq);
        }
        if added.is_empty() {
            break;
        }
        let k = basis.len();
        let gram = DMatrix::from_fn(k, k, |i, j| dot(&images[i], &images[j]));
        let eig = gram.symmetric_eigen();
        let smallest = eig.eigenvalues.iter().cloned().fold(f64::INFINITY, f64::min);
        if !smallest.is_finite() {
            return Err(LapError::ProbeFailure("non-finite Ritz value".into()));
        }
        estimate = smallest.max(0.0).sqrt();
        block = added
            .iter()
            .map(|aq| adjoint(aq).map(|w| band_limit(&w, bandwidth)))
            .collect::<Result<_>>()?;
    }
    if !estimate.is_finite() {
        return Err(LapError::ProbeFailure("probe subspace collapsed".into()));
    }
    Ok(estimate)
}

fn field_like_grid(grid: &crate::grid::Grid, m: usize, values: Vec<Complex64>) -> Field {
    Field::from_values(*grid, m, values).expect("finite probe vector")
}

#[cfg(test)]
mod tests;
