use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{LapError, Result};
use crate::grid::{spectral_gradient, spectral_hessian, spectral_laplacian, upsample, Field, Grid};

/// Narrowest admissible bump width, in grid spacings.
pub const MIN_WIDTH_SPACINGS: f64 = 2.0;
/// Bumps at least this many spacings wide count as resolved.
pub const RESOLVED_WIDTH_SPACINGS: f64 = 6.0;

/// One periodized Gaussian `a exp(-|x - c|^2 / 2 w^2)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Bump {
    pub amplitude: f64,
    pub center: [f64; 3],
    pub width: f64,
}

impl Bump {
    pub(crate) fn eval(&self, x: &[f64; 3], length: f64) -> f64 {
        let mut total = 0.0;
        for sx in -1..=1 {
            for sy in -1..=1 {
                for sz in -1..=1 {
                    let shift = [sx, sy, sz];
                    let r2: f64 = (0..3)
                        .map(|a| (x[a] - self.center[a] - shift[a] as f64 * length).powi(2))
                        .sum();
                    total += (-r2 / (2.0 * self.width * self.width)).exp();
                }
            }
        }
        self.amplitude * total
    }
}

/// Analytic description `eps = eps_inf (1 + sum bumps)`, `mu = mu_inf (1 + sum bumps)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MediumSpec {
    pub eps_inf: f64,
    pub mu_inf: f64,
    #[serde(default)]
    pub eps_bumps: Vec<Bump>,
    #[serde(default)]
    pub mu_bumps: Vec<Bump>,
}

impl MediumSpec {
    pub fn homogeneous(eps_inf: f64, mu_inf: f64) -> Self {
        Self {
            eps_inf,
            mu_inf,
            eps_bumps: Vec::new(),
            mu_bumps: Vec::new(),
        }
    }

    fn bumps(&self) -> impl Iterator<Item = &Bump> {
        self.eps_bumps.iter().chain(&self.mu_bumps)
    }
}

/// Isotropic medium `(eps, mu)` on a 3-D grid, with the spectral derivatives the
/// Helmholtz reduction needs.
#[derive(Debug, Clone)]
pub struct MediumProfile {
    grid: Grid,
    eps: Vec<f64>,
    mu: Vec<f64>,
    eps_inf: f64,
    mu_inf: f64,
    spec: Option<MediumSpec>,
    resolved: bool,
    pub(crate) grad_log_eps: Vec<[f64; 3]>,
    pub(crate) grad_log_mu: Vec<[f64; 3]>,
    pub(crate) hess_log_eps: Vec<[f64; 9]>,
    pub(crate) hess_log_mu: Vec<[f64; 9]>,
    /// `eps^-1/2 Delta(eps^1/2)`
    pub(crate) lap_ratio_eps: Vec<f64>,
    pub(crate) lap_ratio_mu: Vec<f64>,
    /// `v = 2 grad (eps mu)^1/2`
    pub(crate) v: Vec<[f64; 3]>,
}

fn real_field(grid: Grid, values: &[f64]) -> Field {
    Field::from_values(grid, 1, values.iter().map(|v| Complex64::new(*v, 0.0)).collect())
        .expect("finite medium values")
}

fn vectors(f: &Field) -> Vec<[f64; 3]> {
    let len = f.grid().len();
    let v = f.values();
    (0..len).map(|i| [v[i].re, v[len + i].re, v[2 * len + i].re]).collect()
}

fn matrices(f: &Field) -> Vec<[f64; 9]> {
    let len = f.grid().len();
    let v = f.values();
    (0..len)
        .map(|i| {
            let mut m = [0.0; 9];
            for (e, slot) in m.iter_mut().enumerate() {
                *slot = v[e * len + i].re;
            }
            m
        })
        .collect()
}

impl MediumProfile {
    /// Samples the analytic medium; bump widths must be at least
    /// [`MIN_WIDTH_SPACINGS`] grid spacings.
    pub fn from_spec(grid: Grid, spec: &MediumSpec) -> Result<Self> {
        if grid.dim() != 3 {
            return Err(LapError::Medium("Maxwell media live on 3-D grids".into()));
        }
        let h = grid.spacing();
        let mut resolved = true;
        for b in spec.bumps() {
            if !(b.width >= MIN_WIDTH_SPACINGS * h) {
                return Err(LapError::Medium(format!(
                    "bump width {} is below {MIN_WIDTH_SPACINGS} grid spacings ({})",
                    b.width,
                    MIN_WIDTH_SPACINGS * h
                )));
            }
            resolved &= b.width >= RESOLVED_WIDTH_SPACINGS * h;
        }
        let l = grid.length();
        let sample = |bumps: &[Bump], inf: f64| -> Vec<f64> {
            (0..grid.len())
                .map(|i| {
                    let x = grid.position(i);
                    inf * (1.0 + bumps.iter().map(|b| b.eval(&x, l)).sum::<f64>())
                })
                .collect()
        };
        let eps = sample(&spec.eps_bumps, spec.eps_inf);
        let mu = sample(&spec.mu_bumps, spec.mu_inf);
        let mut m = Self::build(grid, eps, mu, spec.eps_inf, spec.mu_inf)?;
        m.spec = Some(spec.clone());
        m.resolved = resolved;
        Ok(m)
    }

    /// Medium from sampled real, positive `eps` and `mu` fields.
    pub fn from_fields(eps: &Field, mu: &Field, eps_inf: f64, mu_inf: f64) -> Result<Self> {
        eps.same_shape(mu)?;
        if eps.components() != 1 {
            return Err(LapError::Medium("eps and mu must be scalar fields".into()));
        }
        let real = |f: &Field, name: &str| -> Result<Vec<f64>> {
            f.values()
                .iter()
                .map(|v| {
                    if v.im.abs() > 1e-12 * v.re.abs() {
                        Err(LapError::Medium(format!("{name} must be real, found {v}")))
                    } else {
                        Ok(v.re)
                    }
                })
                .collect()
        };
        Self::build(*eps.grid(), real(eps, "eps")?, real(mu, "mu")?, eps_inf, mu_inf)
    }

    pub fn constant(grid: Grid, eps0: f64, mu0: f64, eps_inf: f64, mu_inf: f64) -> Result<Self> {
        let n = grid.len();
        Self::build(grid, vec![eps0; n], vec![mu0; n], eps_inf, mu_inf)
    }

    fn build(grid: Grid, eps: Vec<f64>, mu: Vec<f64>, eps_inf: f64, mu_inf: f64) -> Result<Self> {
        if grid.dim() != 3 {
            return Err(LapError::Medium("Maxwell media live on 3-D grids".into()));
        }
        if !(eps_inf > 0.0 && mu_inf > 0.0) {
            return Err(LapError::Medium("background constants must be positive".into()));
        }
        for (name, values) in [("eps", &eps), ("mu", &mu)] {
            let min = values.iter().cloned().fold(f64::INFINITY, f64::min);
            if !(min > 0.0 && min.is_finite()) {
                return Err(LapError::Medium(format!("{name} is not uniformly positive (min {min})")));
            }
        }
        let n = grid.len();
        // spectral derivatives of a constant are roundoff; make them exact
        let is_constant = |values: &[f64]| values.iter().all(|v| *v == values[0]);
        let derived = |values: &[f64]| {
            if is_constant(values) {
                return (vec![[0.0; 3]; n], vec![[0.0; 9]; n], vec![0.0; n]);
            }
            let log = real_field(grid, &values.iter().map(|v| v.ln()).collect::<Vec<_>>());
            let root: Vec<f64> = values.iter().map(|v| v.sqrt()).collect();
            let lap = spectral_laplacian(&real_field(grid, &root));
            let ratio: Vec<f64> = lap.values().iter().zip(&root).map(|(l, r)| l.re / r).collect();
            let grad = spectral_gradient(&log, 1).expect("order 1");
            (vectors(&grad), matrices(&spectral_hessian(&log)), ratio)
        };
        let (grad_log_eps, hess_log_eps, lap_ratio_eps) = derived(&eps);
        let (grad_log_mu, hess_log_mu, lap_ratio_mu) = derived(&mu);
        let root_product: Vec<f64> = eps.iter().zip(&mu).map(|(e, m)| (e * m).sqrt()).collect();
        let v = if is_constant(&root_product) {
            vec![[0.0; 3]; n]
        } else {
            let grad = spectral_gradient(&real_field(grid, &root_product), 1).expect("order 1");
            vectors(&grad).into_iter().map(|g| [2.0 * g[0], 2.0 * g[1], 2.0 * g[2]]).collect()
        };
        Ok(Self {
            grid,
            eps,
            mu,
            eps_inf,
            mu_inf,
            spec: None,
            resolved: true,
            grad_log_eps,
            grad_log_mu,
            hess_log_eps,
            hess_log_mu,
            lap_ratio_eps,
            lap_ratio_mu,
            v,
        })
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn eps(&self) -> &[f64] {
        &self.eps
    }

    pub fn mu(&self) -> &[f64] {
        &self.mu
    }

    pub fn eps_inf(&self) -> f64 {
        self.eps_inf
    }

    pub fn mu_inf(&self) -> f64 {
        self.mu_inf
    }

    pub fn spec(&self) -> Option<&MediumSpec> {
        self.spec.as_ref()
    }

    /// False when some bump is narrower than [`RESOLVED_WIDTH_SPACINGS`] spacings.
    pub fn is_resolved(&self) -> bool {
        self.resolved
    }

    /// `v = 2 grad (eps mu)^1/2` at every point.
    pub fn v(&self) -> &[[f64; 3]] {
        &self.v
    }

    pub fn eps_field(&self) -> Field {
        real_field(self.grid, &self.eps)
    }

    pub fn mu_field(&self) -> Field {
        real_field(self.grid, &self.mu)
    }

    /// `eps mu - eps_inf mu_inf` at every point.
    pub fn contrast(&self) -> Vec<f64> {
        let background = self.eps_inf * self.mu_inf;
        self.eps.iter().zip(&self.mu).map(|(e, m)| e * m - background).collect()
    }

    /// True when `eps mu = eps_inf mu_inf` everywhere and `v = 0`.
    pub fn is_background(&self) -> bool {
        self.contrast().iter().all(|c| c.abs() <= 1e-14 * self.eps_inf * self.mu_inf)
            && self.v.iter().all(|v| v.iter().all(|c| *c == 0.0))
    }

    /// Largest `|eps mu - eps_inf mu_inf|` over cells touching the box boundary.
    pub fn boundary_mismatch(&self) -> f64 {
        let n = self.grid.points();
        let contrast = self.contrast();
        (0..self.grid.len())
            .filter(|&i| self.grid.multi_index(i).iter().any(|&j| j == 0 || j == n - 1))
            .map(|i| contrast[i].abs())
            .fold(0.0, f64::max)
    }

    /// Periodic stand-in for decay at infinity: fails when the boundary mismatch exceeds `threshold`.
    pub fn check_decay(&self, threshold: f64) -> Result<()> {
        let mismatch = self.boundary_mismatch();
        if mismatch > threshold {
            return Err(LapError::Medium(format!(
                "|eps mu - eps_inf mu_inf| reaches {mismatch:e} at the box boundary (threshold {threshold:e})"
            )));
        }
        Ok(())
    }

    /// The same medium on a grid `factor` times finer: resampled from the analytic
    /// description when there is one, trigonometrically interpolated otherwise.
    pub fn refined(&self, factor: usize) -> Result<Self> {
        let fine = self.grid.refined(factor)?;
        match &self.spec {
            Some(spec) => Self::from_spec(fine, spec),
            None => Self::from_fields(
                &real_part(&upsample(&self.eps_field(), factor)?),
                &real_part(&upsample(&self.mu_field(), factor)?),
                self.eps_inf,
                self.mu_inf,
            ),
        }
    }
}

fn real_part(f: &Field) -> Field {
    Field::from_values(
        *f.grid(),
        f.components(),
        f.values().iter().map(|v| Complex64::new(v.re, 0.0)).collect(),
    )
    .expect("finite")
}
