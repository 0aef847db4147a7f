//! Periodic sampling boxes and the complex vector fields that live on them.
//!
//! A [`Grid`] samples the box `[0, L)^n` with `N` points per axis. A [`Field`]
//! stores `m` complex components at every grid point, component-major and in
//! C order (axis 0 slowest). All field operations are pure and return new
//! fields.

mod fft;
mod snapshot;
mod spectral;

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{LapError, Result};

pub use snapshot::{read_field, read_field_from, write_field, write_field_to, LAPF_MAGIC, LAPF_VERSION};
pub use spectral::{
    apply_fourier_multiplier, apply_scalar_multiplier, band_limit, curl, divergence, leray_project,
    lp_norm, random_band_limited, spectral_gradient, spectral_hessian, spectral_laplacian, upsample,
    Frequency, Transformed,
};


/// Periodic `n`-dimensional sampling box with `N` points per axis and edge `L`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid {
    dim: usize,
    points: usize,
    length: f64,
}

impl Grid {
    pub fn new(dim: usize, points: usize, length: f64) -> Result<Self> {
        if !(2..=3).contains(&dim) {
            return Err(LapError::Grid(format!("dimension must be 2 or 3, got {dim}")));
        }
        if points < 8 || points % 2 != 0 {
            return Err(LapError::Grid(format!(
                "points per axis must be even and >= 8, got {points}"
            )));
        }
        if !(length.is_finite() && length > 0.0) {
            return Err(LapError::Grid(format!("box length must be positive, got {length}")));
        }
        Ok(Self { dim, points, length })
    }

    /// Three-dimensional grid; the common case for everything Maxwell-related.
    pub fn cube(points: usize, length: f64) -> Result<Self> {
        Self::new(3, points, length)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn points(&self) -> usize {
        self.points
    }

    pub fn length(&self) -> f64 {
        self.length
    }

    pub fn spacing(&self) -> f64 {
        self.length / self.points as f64
    }

    /// `h^n`, the quadrature weight of one sample.
    pub fn cell_volume(&self) -> f64 {
        self.spacing().powi(self.dim as i32)
    }

    /// Spacing of the frequency lattice, `2*pi/L`.
    pub fn frequency_step(&self) -> f64 {
        2.0 * PI / self.length
    }

    /// Number of samples per component, `N^n`.
    pub fn len(&self) -> usize {
        self.points.pow(self.dim as u32)
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Signed lattice index `k` in `[-N/2, N/2)` of the storage index `j`.
    pub fn signed_index(&self, j: usize) -> i64 {
        let n = self.points as i64;
        let j = j as i64;
        if j < n / 2 {
            j
        } else {
            j - n
        }
    }

    /// Multi-index of a flat sample index (unused trailing axes are zero).
    pub fn multi_index(&self, flat: usize) -> [usize; 3] {
        let mut idx = [0usize; 3];
        let mut rest = flat;
        for axis in (0..self.dim).rev() {
            idx[axis] = rest % self.points;
            rest /= self.points;
        }
        idx
    }

    /// Physical position of a sample; unused trailing coordinates are zero.
    pub fn position(&self, flat: usize) -> [f64; 3] {
        let idx = self.multi_index(flat);
        let h = self.spacing();
        let mut x = [0.0; 3];
        for axis in 0..self.dim {
            x[axis] = idx[axis] as f64 * h;
        }
        x
    }

    /// Lattice wavevector `xi_k = 2*pi*k/L` of a flat spectral index.
    pub fn wavevector(&self, flat: usize) -> [f64; 3] {
        let idx = self.multi_index(flat);
        let step = self.frequency_step();
        let mut xi = [0.0; 3];
        for axis in 0..self.dim {
            xi[axis] = step * self.signed_index(idx[axis]) as f64;
        }
        xi
    }

    /// Wavevector used by first-derivative multipliers: identical to
    /// [`Grid::wavevector`] except that Nyquist components are zero, so that
    /// derivatives of real fields stay real.
    pub fn derivative_wavevector(&self, flat: usize) -> [f64; 3] {
        let idx = self.multi_index(flat);
        let step = self.frequency_step();
        let mut xi = [0.0; 3];
        for axis in 0..self.dim {
            if idx[axis] != self.points / 2 {
                xi[axis] = step * self.signed_index(idx[axis]) as f64;
            }
        }
        xi
    }

    /// True when every axis index of the spectral sample is at most `bandwidth` in magnitude.
    pub fn within_band(&self, flat: usize, bandwidth: usize) -> bool {
        let idx = self.multi_index(flat);
        (0..self.dim).all(|axis| self.signed_index(idx[axis]).unsigned_abs() as usize <= bandwidth)
    }

    /// Same dimension and points, box scaled by `factor`.
    pub fn scaled(&self, factor: f64) -> Result<Self> {
        Self::new(self.dim, self.points, self.length * factor)
    }

    /// Same box with `factor` times as many points per axis.
    pub fn refined(&self, factor: usize) -> Result<Self> {
        Self::new(self.dim, self.points * factor, self.length)
    }
}

/// `m`-component complex field sampled on a [`Grid`].
#[derive(Debug, Clone, PartialEq)]
pub struct Field {
    grid: Grid,
    components: usize,
    values: Vec<Complex64>,
}

impl Field {
    pub fn zeros(grid: Grid, components: usize) -> Self {
        assert!(components >= 1, "a field needs at least one component");
        Self {
            grid,
            components,
            values: vec![Complex64::new(0.0, 0.0); components * grid.len()],
        }
    }

    /// Builds a field from owned samples, rejecting wrong lengths and non-finite values.
    pub fn from_values(grid: Grid, components: usize, values: Vec<Complex64>) -> Result<Self> {
        if components == 0 {
            return Err(LapError::Shape("component count must be >= 1".into()));
        }
        if values.len() != components * grid.len() {
            return Err(LapError::Shape(format!(
                "expected {} samples for {} components, got {}",
                components * grid.len(),
                components,
                values.len()
            )));
        }
        if let Some(index) = values.iter().position(|v| !(v.re.is_finite() && v.im.is_finite())) {
            return Err(LapError::NonFinite { index });
        }
        Ok(Self { grid, components, values })
    }

    /// Samples `f(x, component)` at every grid point.
    pub fn from_fn(grid: Grid, components: usize, f: impl Fn(&[f64; 3], usize) -> Complex64) -> Self {
        let mut out = Self::zeros(grid, components);
        let len = grid.len();
        for c in 0..components {
            let slot = &mut out.values[c * len..(c + 1) * len];
            for (i, v) in slot.iter_mut().enumerate() {
                *v = f(&grid.position(i), c);
            }
        }
        out
    }

    /// Real scalar field from a function of position.
    pub fn scalar(grid: Grid, f: impl Fn(&[f64; 3]) -> f64) -> Self {
        Self::from_fn(grid, 1, |x, _| Complex64::new(f(x), 0.0))
    }

    pub(crate) fn from_raw(grid: Grid, components: usize, values: Vec<Complex64>) -> Self {
        debug_assert_eq!(values.len(), components * grid.len());
        Self { grid, components, values }
    }

    /// Stacks single-or-multi component fields into one field.
    pub fn stack(parts: &[&Field]) -> Result<Self> {
        let first = parts
            .first()
            .ok_or_else(|| LapError::Shape("cannot stack zero fields".into()))?;
        let grid = first.grid;
        let mut values = Vec::new();
        let mut components = 0;
        for p in parts {
            if p.grid != grid {
                return Err(LapError::Shape("stacked fields live on different grids".into()));
            }
            values.extend_from_slice(&p.values);
            components += p.components;
        }
        Ok(Self { grid, components, values })
    }

    /// Components `start..start+count` as a new field.
    pub fn components_range(&self, start: usize, count: usize) -> Self {
        assert!(start + count <= self.components, "component range out of bounds");
        let len = self.grid.len();
        Self {
            grid: self.grid,
            components: count,
            values: self.values[start * len..(start + count) * len].to_vec(),
        }
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn components(&self) -> usize {
        self.components
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [Complex64] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<Complex64> {
        self.values
    }

    pub fn component(&self, c: usize) -> &[Complex64] {
        let len = self.grid.len();
        &self.values[c * len..(c + 1) * len]
    }

    pub fn component_mut(&mut self, c: usize) -> &mut [Complex64] {
        let len = self.grid.len();
        &mut self.values[c * len..(c + 1) * len]
    }

    /// Euclidean length of the component vector at sample `i`.
    pub fn pointwise_norm(&self, i: usize) -> f64 {
        let len = self.grid.len();
        (0..self.components)
            .map(|c| self.values[c * len + i].norm_sqr())
            .sum::<f64>()
            .sqrt()
    }

    pub fn is_finite(&self) -> bool {
        self.values.iter().all(|v| v.re.is_finite() && v.im.is_finite())
    }

    pub fn same_shape(&self, other: &Field) -> Result<()> {
        if self.grid != other.grid {
            return Err(LapError::Shape(format!(
                "grid mismatch: {:?} vs {:?}",
                self.grid, other.grid
            )));
        }
        if self.components != other.components {
            return Err(LapError::Shape(format!(
                "component mismatch: {} vs {}",
                self.components, other.components
            )));
        }
        Ok(())
    }

    pub fn add(&self, other: &Field) -> Result<Field> {
        self.same_shape(other)?;
        let values = self.values.iter().zip(&other.values).map(|(a, b)| a + b).collect();
        Ok(Self::from_raw(self.grid, self.components, values))
    }

    pub fn sub(&self, other: &Field) -> Result<Field> {
        self.same_shape(other)?;
        let values = self.values.iter().zip(&other.values).map(|(a, b)| a - b).collect();
        Ok(Self::from_raw(self.grid, self.components, values))
    }

    pub fn scale(&self, factor: Complex64) -> Field {
        let values = self.values.iter().map(|v| v * factor).collect();
        Self::from_raw(self.grid, self.components, values)
    }

    /// Pointwise product with a real weight (same weight on every component).
    pub fn weighted(&self, weight: &[f64]) -> Result<Field> {
        let len = self.grid.len();
        if weight.len() != len {
            return Err(LapError::Shape("weight length does not match the grid".into()));
        }
        let mut out = self.clone();
        for c in 0..self.components {
            for (v, w) in out.component_mut(c).iter_mut().zip(weight) {
                *v *= w;
            }
        }
        Ok(out)
    }

    /// Sesquilinear inner product `sum conj(a) * b * h^n`.
    pub fn inner(&self, other: &Field) -> Result<Complex64> {
        self.same_shape(other)?;
        let s: Complex64 = self.values.iter().zip(&other.values).map(|(a, b)| a.conj() * b).sum();
        Ok(s * self.grid.cell_volume())
    }

    /// Complex-bilinear pairing `sum a * b * h^n`.
    pub fn pairing(&self, other: &Field) -> Result<Complex64> {
        self.same_shape(other)?;
        let s: Complex64 = self.values.iter().zip(&other.values).map(|(a, b)| a * b).sum();
        Ok(s * self.grid.cell_volume())
    }

    /// Discrete L^2 norm with cell volume `h^n`.
    pub fn l2_norm(&self) -> f64 {
        (self.values.iter().map(|v| v.norm_sqr()).sum::<f64>() * self.grid.cell_volume()).sqrt()
    }

    /// Largest pointwise Euclidean length.
    pub fn max_norm(&self) -> f64 {
        (0..self.grid.len()).map(|i| self.pointwise_norm(i)).fold(0.0, f64::max)
    }

    /// Real parts of a single-component field.
    pub fn real_parts(&self) -> Vec<f64> {
        self.values.iter().map(|v| v.re).collect()
    }
}
