//! The free resolvent `R0(zeta) = (Delta + zeta)^-1` on the periodic grid.
//!
//! One sign convention throughout: the symbol is `1 / (zeta - |xi|^2)`, so a plane
//! wave `exp(i xi.x)` is mapped to itself divided by `zeta - |xi|^2`. Texts that
//! write `1 / (|xi|^2 - zeta)` describe the same operator up to a global sign.

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{LapError, Result};
use crate::exponents::{check_gutierrez, LebesgueExponent};
use crate::grid::{apply_scalar_multiplier, lp_norm, random_band_limited, Field, Frequency, Grid};

const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };

/// Smallest admissible `|zeta - |xi_k|^2|` over the lattice.
pub const RESONANCE_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LimitTag {
    Interior,
    PlusI0,
    MinusI0,
}

/// Spectral parameter `zeta`, or a real `lambda > 0` approached as `lambda +- i0`.
///
/// Limits are never evaluated at the axis: a tagged parameter needs a surrogate
/// `delta > 0` and is evaluated at `lambda +- i delta`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpectralParameter {
    zeta: Complex64,
    tag: LimitTag,
    surrogate: Option<f64>,
}

impl SpectralParameter {
    pub fn interior(zeta: Complex64) -> Result<Self> {
        if !(zeta.re.is_finite() && zeta.im.is_finite()) {
            return Err(LapError::Parameter(format!("zeta = {zeta} is not finite")));
        }
        if zeta.im == 0.0 && zeta.re >= 0.0 {
            return Err(LapError::Parameter(format!(
                "zeta = {zeta} lies on [0, inf); use a +-i0 limit with a surrogate delta"
            )));
        }
        Ok(Self {
            zeta,
            tag: LimitTag::Interior,
            surrogate: None,
        })
    }

    pub fn plus_i0(lambda: f64) -> Result<Self> {
        Self::limit(lambda, LimitTag::PlusI0)
    }

    pub fn minus_i0(lambda: f64) -> Result<Self> {
        Self::limit(lambda, LimitTag::MinusI0)
    }

    fn limit(lambda: f64, tag: LimitTag) -> Result<Self> {
        if !(lambda.is_finite() && lambda > 0.0) {
            return Err(LapError::Parameter(format!("lambda = {lambda} must be positive")));
        }
        Ok(Self {
            zeta: Complex64::new(lambda, 0.0),
            tag,
            surrogate: None,
        })
    }

    /// Attaches the surrogate distance `delta` to the real axis.
    pub fn with_surrogate(mut self, delta: f64) -> Result<Self> {
        if !(delta.is_finite() && delta > 0.0) {
            return Err(LapError::Parameter(format!("surrogate delta = {delta} must be positive")));
        }
        self.surrogate = Some(delta);
        Ok(self)
    }

    pub fn zeta(&self) -> Complex64 {
        self.zeta
    }

    pub fn tag(&self) -> LimitTag {
        self.tag
    }

    pub fn surrogate(&self) -> Option<f64> {
        self.surrogate
    }

    /// The point actually evaluated: `zeta`, or `lambda +- i delta`.
    pub fn effective(&self) -> Result<Complex64> {
        let sign = match self.tag {
            LimitTag::Interior => return Ok(self.zeta),
            LimitTag::PlusI0 => 1.0,
            LimitTag::MinusI0 => -1.0,
        };
        let delta = self.surrogate.ok_or_else(|| {
            LapError::Usage("a +-i0 spectral parameter needs an explicit surrogate delta".into())
        })?;
        Ok(Complex64::new(self.zeta.re, sign * delta))
    }

    /// Square root `mu` with `mu^2 = zeta`, on the branch the Green's kernel uses.
    pub fn kernel_root(&self) -> Complex64 {
        match self.tag {
            LimitTag::Interior => {
                let mu = self.zeta.sqrt();
                if mu.im < 0.0 {
                    -mu
                } else {
                    mu
                }
            }
            LimitTag::PlusI0 => Complex64::new(self.zeta.re.sqrt(), 0.0),
            LimitTag::MinusI0 => Complex64::new(-self.zeta.re.sqrt(), 0.0),
        }
    }
}

/// Radial cutoff: 1 on `r <= 2`, 0 on `r >= 3`, quintic smoothstep in between.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CutoffProfile {
    pub inner: f64,
    pub outer: f64,
}

impl Default for CutoffProfile {
    fn default() -> Self {
        Self { inner: 2.0, outer: 3.0 }
    }
}

impl CutoffProfile {
    pub fn value(&self, r: f64) -> f64 {
        if r <= self.inner {
            return 1.0;
        }
        if r >= self.outer {
            return 0.0;
        }
        let t = (r - self.inner) / (self.outer - self.inner);
        1.0 - t * t * t * (10.0 - 15.0 * t + 6.0 * t * t)
    }

    /// `chi_zeta(xi) = chi(|zeta|^-1/2 |xi|)`.
    pub fn dilated(&self, xi_norm: f64, zeta_abs: f64) -> f64 {
        self.value(xi_norm / zeta_abs.sqrt())
    }
}

/// Distance from `zeta` to the nearest lattice shell `|xi_k|^2`, and that shell.
pub fn nearest_shell(grid: &Grid, zeta: Complex64) -> (f64, f64) {
    // shells only depend on the index magnitudes per axis
    let step = grid.frequency_step();
    let half = grid.points() as i64 / 2;
    let squares: Vec<i64> = (0..=half).map(|k| k * k).collect();
    let mut best = (f64::INFINITY, 0.0);
    let mut visit = |sum: i64| {
        let shell = step * step * sum as f64;
        let dist = (zeta - shell).norm();
        if dist < best.0 {
            best = (dist, shell);
        }
    };
    for a in &squares {
        for b in &squares {
            if grid.dim() == 2 {
                visit(a + b);
            } else {
                for c in &squares {
                    visit(a + b + c);
                }
            }
        }
    }
    best
}

/// Fails with a resonance error when some lattice shell is within
/// [`RESONANCE_TOLERANCE`] of `zeta`.
pub fn check_resonance(grid: &Grid, zeta: Complex64) -> Result<()> {
    let (distance, shell) = nearest_shell(grid, zeta);
    if distance <= RESONANCE_TOLERANCE {
        return Err(LapError::Resonance { shell, distance });
    }
    Ok(())
}

pub(crate) fn resolvent_symbol(zeta: Complex64, freq: &Frequency) -> Complex64 {
    (zeta - freq.norm_sqr).inv()
}

/// `R0(zeta_eff) f` at an already resolved, resonance-checked point.
pub(crate) fn free_resolvent_at(f: &Field, zeta: Complex64) -> Result<Field> {
    apply_scalar_multiplier(f, |freq| resolvent_symbol(zeta, freq))
}

/// `R0(zeta) f`, componentwise.
pub fn apply_free_resolvent(f: &Field, z: &SpectralParameter) -> Result<Field> {
    let zeta = z.effective()?;
    check_resonance(f.grid(), zeta)?;
    free_resolvent_at(f, zeta)
}

/// Outgoing (for `Im zeta > 0`) Green's kernel `-exp(i mu |z|) / (4 pi |z|)` of
/// `Delta + zeta` in three dimensions.
pub fn greens_kernel(z_point: [f64; 3], zeta: &SpectralParameter) -> Result<Complex64> {
    let r = (z_point[0] * z_point[0] + z_point[1] * z_point[1] + z_point[2] * z_point[2]).sqrt();
    if r == 0.0 {
        return Err(LapError::Singularity);
    }
    let mu = zeta.kernel_root();
    Ok(-(I * mu * r).exp() / (4.0 * PI * r))
}

/// Regime bound on `|G_zeta(z) - G_zeta~(z)|` with the implicit constant set to 1.
///
/// Meaningful for `Re mu, Im mu > 0`; the regimes split at `|z| = 1/|mu|` and
/// `|z| = 1/|mu - mu~|`.
pub fn kernel_difference_bound(mu: Complex64, mu_tilde: Complex64, z_norm: f64, n: u32) -> f64 {
    let n = n as f64;
    let gap = (mu - mu_tilde).norm();
    let m = mu.norm();
    if z_norm <= 1.0 / m {
        gap * z_norm.powf(3.0 - n)
    } else if gap == 0.0 || z_norm <= 1.0 / gap {
        gap * m.powf((n - 3.0) / 2.0) * z_norm.powf((3.0 - n) / 2.0)
    } else {
        m.powf((n - 3.0) / 2.0) * z_norm.powf((1.0 - n) / 2.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DerivativeMode {
    Direct,
    Split,
}

/// `R0(zeta) d_j f` for axis `j`.
///
/// `Split` evaluates the low/high-frequency decomposition
/// `chi_zeta i xi_j / (zeta - |xi|^2)  -  i |zeta|^-1/2 m(eta) (1 + |eta|^2)^-1/2`,
/// `eta = xi / |zeta|^1/2`, where the second factor is a dilated Bessel potential
/// and `m(eta) = (1 - chi(eta)) eta_j (1 + |eta|^2)^1/2 / (|eta|^2 - zeta/|zeta|)`
/// is the Mikhlin symbol. It equals `Direct` mode by mode.
pub fn apply_free_resolvent_derivative(
    f: &Field,
    z: &SpectralParameter,
    axis: usize,
    mode: DerivativeMode,
) -> Result<Field> {
    if axis >= f.grid().dim() {
        return Err(LapError::Parameter(format!("axis {axis} out of range")));
    }
    let zeta = z.effective()?;
    check_resonance(f.grid(), zeta)?;
    match mode {
        DerivativeMode::Direct => {
            apply_scalar_multiplier(f, |freq| I * freq.d[axis] * resolvent_symbol(zeta, freq))
        }
        DerivativeMode::Split => {
            let scale = zeta.norm();
            if scale == 0.0 {
                return Err(LapError::Parameter("split mode needs zeta != 0".into()));
            }
            let chi = CutoffProfile::default();
            let low = apply_scalar_multiplier(f, |freq| {
                chi.dilated(freq.norm(), scale) * I * freq.d[axis] * resolvent_symbol(zeta, freq)
            })?;
            let root = scale.sqrt();
            let phase = zeta / scale;
            let smoothed = dilated_bessel_potential(f, root)?;
            let high = apply_scalar_multiplier(&smoothed, |freq| {
                let eta_norm = freq.norm() / root;
                let eta_j = freq.d[axis] / root;
                let m = mikhlin_symbol(chi.value(eta_norm), eta_j, eta_norm, phase);
                -I * m / root
            })?;
            low.add(&high)
        }
    }
}

fn mikhlin_symbol(chi: f64, eta_j: f64, eta_norm: f64, phase: Complex64) -> Complex64 {
    if chi == 1.0 {
        return Complex64::new(0.0, 0.0);
    }
    let eta2 = eta_norm * eta_norm;
    (1.0 - chi) * eta_j * (1.0 + eta2).sqrt() / (eta2 - phase)
}

fn dilated_bessel_potential(f: &Field, scale: f64) -> Result<Field> {
    apply_scalar_multiplier(f, |freq| {
        Complex64::new((1.0 + freq.norm_sqr / (scale * scale)).powf(-0.5), 0.0)
    })
}

/// Bessel potential of order one: symbol `(1 + |xi|^2)^-1/2`.
pub fn bessel_potential(f: &Field) -> Field {
    dilated_bessel_potential(f, 1.0).expect("Bessel symbol is finite")
}

/// Empirical Mikhlin constant `max |xi|^|alpha| |d^alpha s(xi)|` over `|alpha| <= order`.
///
/// Derivatives are central differences with step `1e-4 |xi|`; `order` is at most 2
/// and only the first `dim` axes are differentiated.
pub fn mikhlin_bound_estimate(
    symbol: impl Fn(&[f64; 3]) -> Complex64,
    order: usize,
    dim: usize,
    samples: &[[f64; 3]],
) -> Result<f64> {
    if order > 2 {
        return Err(LapError::Parameter(format!("derivative order {order} above 2")));
    }
    let shifted = |xi: &[f64; 3], axis: usize, step: f64| {
        let mut y = *xi;
        y[axis] += step;
        y
    };
    let mut best = 0.0f64;
    for xi in samples {
        let r = (xi[0] * xi[0] + xi[1] * xi[1] + xi[2] * xi[2]).sqrt();
        if r < 1e-3 {
            return Err(LapError::Parameter(format!("sample {xi:?} is within 1e-3 of the origin")));
        }
        let h = 1e-4 * r;
        let s0 = symbol(xi);
        let mut values = vec![s0.norm()];
        if order >= 1 {
            for j in 0..dim {
                let d = (symbol(&shifted(xi, j, h)) - symbol(&shifted(xi, j, -h))) / (2.0 * h);
                values.push(r * d.norm());
            }
        }
        if order >= 2 {
            for j in 0..dim {
                for k in j..dim {
                    let d = if j == k {
                        (symbol(&shifted(xi, j, h)) - 2.0 * s0 + symbol(&shifted(xi, j, -h))) / (h * h)
                    } else {
                        let pp = symbol(&shifted(&shifted(xi, j, h), k, h));
                        let pm = symbol(&shifted(&shifted(xi, j, h), k, -h));
                        let mp = symbol(&shifted(&shifted(xi, j, -h), k, h));
                        let mm = symbol(&shifted(&shifted(xi, j, -h), k, -h));
                        (pp - pm - mp + mm) / (4.0 * h * h)
                    };
                    values.push(r * r * d.norm());
                }
            }
        }
        for v in values {
            if !v.is_finite() {
                return Err(LapError::NonFiniteSymbol { xi: xi.to_vec() });
            }
            best = best.max(v);
        }
    }
    Ok(best)
}

/// `||R0(zeta) f||_q / ||f||_p`.
pub fn resolvent_norm_ratio(
    f: &Field,
    z: &SpectralParameter,
    p: &LebesgueExponent,
    q: &LebesgueExponent,
) -> Result<f64> {
    let denom = lp_norm(f, p);
    if denom == 0.0 {
        return Err(LapError::Parameter("test field is zero".into()));
    }
    Ok(lp_norm(&apply_free_resolvent(f, z)?, q) / denom)
}

/// Number of deterministic profiles tried before random fields.
pub const DETERMINISTIC_PROBES: usize = 4;

/// The `trial`-th deterministic probe for `|zeta| = zeta_abs`: centred Gaussians and
/// Herglotz-type profiles `exp(-r^2/2w^2) sinc(rho r)` on the length scale `|zeta|^-1/2`.
pub fn probe_profile(grid: &Grid, zeta_abs: f64, trial: usize) -> Field {
    let s = zeta_abs.sqrt();
    let centre = grid.length() / 2.0;
    let floor = 1.5 * grid.spacing();
    let (width, rho) = match trial % DETERMINISTIC_PROBES {
        0 => ((1.0 / s).max(floor), 0.0),
        1 => ((2.0 / s).max(floor), 0.0),
        2 => ((4.0 / s).max(floor), s),
        _ => ((8.0 / s).max(floor), s),
    };
    Field::scalar(*grid, |x| {
        let r2: f64 = (0..grid.dim()).map(|a| (x[a] - centre).powi(2)).sum();
        let r = r2.sqrt();
        let sinc = if rho * r < 1e-12 { 1.0 } else { (rho * r).sin() / (rho * r) };
        (-r2 / (2.0 * width * width)).exp() * sinc
    })
}

/// Lower bound on the discrete `L^p -> L^q` norm of `R0(zeta)`: the largest ratio over
/// `trials` probes (deterministic profiles first, then seeded random band-limited fields).
pub fn operator_norm_lower_bound(
    z: &SpectralParameter,
    p: &LebesgueExponent,
    q: &LebesgueExponent,
    trials: usize,
    grid: &Grid,
    seed: u64,
) -> Result<f64> {
    check_gutierrez(p, q, grid.dim() as u32)?.require("gutierrez")?;
    let zeta_abs = z.effective()?.norm();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut best = 0.0f64;
    for t in 0..trials {
        let f = if t < DETERMINISTIC_PROBES {
            probe_profile(grid, zeta_abs, t)
        } else {
            random_band_limited(grid, 1, grid.points() / 4, &mut rng)
        };
        best = best.max(resolvent_norm_ratio(&f, z, p, q)?);
    }
    Ok(best)
}
