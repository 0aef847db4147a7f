//! Fourier multipliers, derivatives, norms, and the Leray projection.

use num_complex::Complex64;
use rand::Rng;

use super::{fft, Field, Grid};
use crate::error::{LapError, Result};
use crate::exponents::LebesgueExponent;

const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };

/// One lattice frequency as seen by a symbol.
#[derive(Debug, Clone, Copy)]
pub struct Frequency {
    /// Full lattice wavevector, Nyquist included.
    pub xi: [f64; 3],
    /// First-derivative wavevector: `xi` with Nyquist components zeroed.
    pub d: [f64; 3],
    /// `|xi|^2` with the full Nyquist magnitude.
    pub norm_sqr: f64,
}

impl Frequency {
    fn at(grid: &Grid, flat: usize) -> Self {
        let xi = grid.wavevector(flat);
        Self {
            xi,
            d: grid.derivative_wavevector(flat),
            norm_sqr: xi[0] * xi[0] + xi[1] * xi[1] + xi[2] * xi[2],
        }
    }

    pub fn norm(&self) -> f64 {
        self.norm_sqr.sqrt()
    }
}

/// Spectral samples of a field (forward DFT of every component).
#[derive(Debug, Clone)]
pub struct Transformed {
    grid: Grid,
    components: usize,
    spectrum: Vec<Complex64>,
}

impl Transformed {
    pub fn of(field: &Field) -> Self {
        let mut spectrum = field.values().to_vec();
        fft::forward(field.grid(), &mut spectrum);
        Self {
            grid: *field.grid(),
            components: field.components(),
            spectrum,
        }
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn components(&self) -> usize {
        self.components
    }

    /// Raw DFT coefficients, component-major.
    pub fn coefficients(&self) -> &[Complex64] {
        &self.spectrum
    }

    pub fn coefficients_mut(&mut self) -> &mut [Complex64] {
        &mut self.spectrum
    }

    /// Continuous-transform surrogate `h^n * F[k]` of component `c` at flat index `k`.
    pub fn continuous(&self, c: usize, k: usize) -> Complex64 {
        self.spectrum[c * self.grid.len() + k] * self.grid.cell_volume()
    }

    pub fn frequency(&self, k: usize) -> Frequency {
        Frequency::at(&self.grid, k)
    }

    pub fn into_field(self) -> Field {
        let mut values = self.spectrum;
        fft::inverse(&self.grid, &mut values);
        Field::from_raw(self.grid, self.components, values)
    }

    /// `h^n`-weighted Fourier-side squared L^2 norm (Parseval's right-hand side).
    pub fn l2_norm_sqr(&self) -> f64 {
        let n = self.grid.len() as f64;
        self.spectrum.iter().map(|v| v.norm_sqr()).sum::<f64>() * self.grid.cell_volume() / n
    }
}

fn check_symbol(value: Complex64, freq: &Frequency) -> Result<()> {
    if value.re.is_finite() && value.im.is_finite() {
        Ok(())
    } else {
        Err(LapError::NonFiniteSymbol { xi: freq.xi.to_vec() })
    }
}

/// Applies a scalar symbol to every component.
pub fn apply_scalar_multiplier(f: &Field, symbol: impl Fn(&Frequency) -> Complex64) -> Result<Field> {
    let mut t = Transformed::of(f);
    let len = f.grid().len();
    for k in 0..len {
        let freq = Frequency::at(f.grid(), k);
        let s = symbol(&freq);
        check_symbol(s, &freq)?;
        for c in 0..f.components() {
            t.spectrum[c * len + k] *= s;
        }
    }
    Ok(t.into_field())
}

/// Applies an `m x m` matrix symbol (row-major, written into the scratch slice) at every frequency.
pub fn apply_fourier_multiplier(
    f: &Field,
    symbol: impl Fn(&Frequency, &mut [Complex64]),
) -> Result<Field> {
    let m = f.components();
    let len = f.grid().len();
    let mut t = Transformed::of(f);
    let mut mat = vec![Complex64::new(0.0, 0.0); m * m];
    let mut column = vec![Complex64::new(0.0, 0.0); m];
    for k in 0..len {
        let freq = Frequency::at(f.grid(), k);
        mat.iter_mut().for_each(|v| *v = Complex64::new(0.0, 0.0));
        symbol(&freq, &mut mat);
        for &s in &mat {
            check_symbol(s, &freq)?;
        }
        for c in 0..m {
            column[c] = t.spectrum[c * len + k];
        }
        for r in 0..m {
            let row = &mat[r * m..(r + 1) * m];
            t.spectrum[r * len + k] = row.iter().zip(&column).map(|(a, b)| a * b).sum();
        }
    }
    Ok(t.into_field())
}

/// Discrete `L^p` norm `(sum |f(x)|^p h^n)^(1/p)` with `|f(x)|` the Euclidean length over components.
pub fn lp_norm(f: &Field, p: &LebesgueExponent) -> f64 {
    let len = f.grid().len();
    match p.to_f64() {
        None => f.max_norm(),
        Some(p) => {
            let h = f.grid().cell_volume();
            // scale by the max to keep large p from overflowing
            let scale = f.max_norm();
            if scale == 0.0 {
                return 0.0;
            }
            let sum: f64 = (0..len).map(|i| (f.pointwise_norm(i) / scale).powf(p)).sum();
            scale * (sum * h).powf(1.0 / p)
        }
    }
}

/// Leray projection onto divergence-free fields.
///
/// Uses the first-derivative wavevector, so the projected field has exactly zero
/// [`divergence`] on the grid. The zero mode (and pure-Nyquist modes, where that
/// wavevector vanishes) pass through unchanged.
pub fn leray_project(f: &Field) -> Result<Field> {
    let n = f.grid().dim();
    if f.components() != n {
        return Err(LapError::Shape(format!(
            "Leray projection needs {n} components, got {}",
            f.components()
        )));
    }
    let len = f.grid().len();
    let mut t = Transformed::of(f);
    for k in 0..len {
        let d = f.grid().derivative_wavevector(k);
        let d2: f64 = d[..n].iter().map(|x| x * x).sum();
        if d2 == 0.0 {
            continue;
        }
        let dot: Complex64 = (0..n).map(|c| t.spectrum[c * len + k] * d[c]).sum();
        let coef = dot / d2;
        for c in 0..n {
            t.spectrum[c * len + k] -= coef * d[c];
        }
    }
    Ok(t.into_field())
}

/// First (`order = 1`) or second (`order = 2`) partial derivatives of every component.
///
/// Order 1 returns `m*n` components ordered `(component, axis)`; order 2 returns
/// `m*n*n` components ordered `(component, axis_j, axis_k)`.
pub fn spectral_gradient(f: &Field, order: usize) -> Result<Field> {
    match order {
        1 => Ok(gradient(f)),
        2 => Ok(spectral_hessian(f)),
        _ => Err(LapError::Parameter(format!("derivative order must be 1 or 2, got {order}"))),
    }
}

fn gradient(f: &Field) -> Field {
    let grid = *f.grid();
    let n = grid.dim();
    let len = grid.len();
    let t = Transformed::of(f);
    let mut out = vec![Complex64::new(0.0, 0.0); f.components() * n * len];
    for c in 0..f.components() {
        for axis in 0..n {
            let slot = &mut out[(c * n + axis) * len..(c * n + axis + 1) * len];
            for (k, v) in slot.iter_mut().enumerate() {
                *v = t.spectrum[c * len + k] * I * grid.derivative_wavevector(k)[axis];
            }
        }
    }
    fft::inverse(&grid, &mut out);
    Field::from_raw(grid, f.components() * n, out)
}

/// All second partials; pure second derivatives use the full Nyquist magnitude.
pub fn spectral_hessian(f: &Field) -> Field {
    let grid = *f.grid();
    let n = grid.dim();
    let len = grid.len();
    let t = Transformed::of(f);
    let m = f.components();
    let mut out = vec![Complex64::new(0.0, 0.0); m * n * n * len];
    for c in 0..m {
        for j in 0..n {
            for l in 0..n {
                let slot = (c * n + j) * n + l;
                let dst = &mut out[slot * len..(slot + 1) * len];
                for (k, v) in dst.iter_mut().enumerate() {
                    let s = if j == l {
                        let xi = grid.wavevector(k);
                        -xi[j] * xi[j]
                    } else {
                        let d = grid.derivative_wavevector(k);
                        -d[j] * d[l]
                    };
                    *v = t.spectrum[c * len + k] * s;
                }
            }
        }
    }
    fft::inverse(&grid, &mut out);
    Field::from_raw(grid, m * n * n, out)
}

/// Laplacian with symbol `-|xi|^2`.
pub fn spectral_laplacian(f: &Field) -> Field {
    apply_scalar_multiplier(f, |freq| Complex64::new(-freq.norm_sqr, 0.0))
        .expect("laplacian symbol is finite")
}

/// Divergence of an `n`-component field.
pub fn divergence(f: &Field) -> Result<Field> {
    let grid = *f.grid();
    let n = grid.dim();
    if f.components() != n {
        return Err(LapError::Shape(format!("divergence needs {n} components")));
    }
    let len = grid.len();
    let t = Transformed::of(f);
    let mut out = vec![Complex64::new(0.0, 0.0); len];
    for (k, v) in out.iter_mut().enumerate() {
        let d = grid.derivative_wavevector(k);
        *v = (0..n).map(|c| t.spectrum[c * len + k] * I * d[c]).sum();
    }
    fft::inverse(&grid, &mut out);
    Ok(Field::from_raw(grid, 1, out))
}

/// Curl of a three-component field on a three-dimensional grid.
pub fn curl(f: &Field) -> Result<Field> {
    let grid = *f.grid();
    if grid.dim() != 3 || f.components() != 3 {
        return Err(LapError::Shape("curl needs a 3-component field on a 3-D grid".into()));
    }
    apply_fourier_multiplier(f, |freq, m| {
        let d = freq.d;
        // (i d) x  as a matrix
        m[1] = -I * d[2];
        m[2] = I * d[1];
        m[3] = I * d[2];
        m[5] = -I * d[0];
        m[6] = -I * d[1];
        m[7] = I * d[0];
    })
}

/// Zeroes every mode with an axis index above `bandwidth`.
pub fn band_limit(f: &Field, bandwidth: usize) -> Field {
    let grid = *f.grid();
    let len = grid.len();
    let mut t = Transformed::of(f);
    for k in 0..len {
        if !grid.within_band(k, bandwidth) {
            for c in 0..f.components() {
                t.spectrum[c * len + k] = Complex64::new(0.0, 0.0);
            }
        }
    }
    t.into_field()
}

/// Trigonometric interpolation onto a grid with `factor` times as many points per axis.
///
/// Nyquist coefficients are split evenly between the two fine-grid modes they
/// alias, which keeps real fields real.
pub fn upsample(f: &Field, factor: usize) -> Result<Field> {
    let coarse = *f.grid();
    if factor == 1 {
        return Ok(f.clone());
    }
    let fine = coarse.refined(factor)?;
    let n = coarse.dim();
    let nc = coarse.points() as i64;
    let nf = fine.points() as i64;
    let t = Transformed::of(f);
    let len_c = coarse.len();
    let len_f = fine.len();
    let mut out = vec![Complex64::new(0.0, 0.0); f.components() * len_f];
    let gain = (factor as f64).powi(n as i32);
    let wrap = |k: i64| -> usize { ((k + nf) % nf) as usize };
    for kc in 0..len_c {
        let idx = coarse.multi_index(kc);
        // candidate fine indices per axis
        let mut choices: Vec<Vec<(i64, f64)>> = Vec::with_capacity(n);
        for &i in idx.iter().take(n) {
            let s = coarse.signed_index(i);
            if s == -nc / 2 {
                choices.push(vec![(-nc / 2, 0.5), (nc / 2, 0.5)]);
            } else {
                choices.push(vec![(s, 1.0)]);
            }
        }
        let mut stack = vec![(0usize, 0usize, 1.0f64)];
        while let Some((axis, flat, w)) = stack.pop() {
            if axis == n {
                for c in 0..f.components() {
                    out[c * len_f + flat] += t.spectrum[c * len_c + kc] * (w * gain);
                }
                continue;
            }
            for &(k, wk) in &choices[axis] {
                stack.push((axis + 1, flat * fine.points() + wrap(k), w * wk));
            }
        }
    }
    fft::inverse(&fine, &mut out);
    Ok(Field::from_raw(fine, f.components(), out))
}

/// Random field with spectral support on axis indices `|k_j| <= bandwidth`,
/// normalized to unit discrete `L^2` norm.
pub fn random_band_limited<R: Rng + ?Sized>(grid: &Grid, components: usize, bandwidth: usize, rng: &mut R) -> Field {
    let len = grid.len();
    let bandwidth = bandwidth.min(grid.points() / 2 - 1);
    let mut spectrum = vec![Complex64::new(0.0, 0.0); components * len];
    for c in 0..components {
        for k in 0..len {
            if grid.within_band(k, bandwidth) {
                spectrum[c * len + k] = Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
            }
        }
    }
    fft::inverse(grid, &mut spectrum);
    let field = Field::from_raw(*grid, components, spectrum);
    let norm = field.l2_norm();
    if norm > 0.0 {
        field.scale(Complex64::new(1.0 / norm, 0.0))
    } else {
        field
    }
}
