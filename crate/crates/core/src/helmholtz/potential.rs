use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{LapError, Result};
use crate::exponents::LebesgueExponent;
use crate::grid::{Field, Grid};

const ZERO: Complex64 = Complex64 { re: 0.0, im: 0.0 };

/// An `m x m` complex matrix at every grid point, stored point-major and row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct Potential {
    grid: Grid,
    m: usize,
    values: Vec<Complex64>,
    hermitian: bool,
}

impl Potential {
    /// Builds a potential; a `hermitian` flag is verified against the data.
    pub fn new(grid: Grid, m: usize, values: Vec<Complex64>, hermitian: bool) -> Result<Self> {
        if m == 0 || values.len() != m * m * grid.len() {
            return Err(LapError::Shape(format!(
                "potential with m = {m} needs {} values, got {}",
                m * m * grid.len(),
                values.len()
            )));
        }
        if let Some(index) = values.iter().position(|v| !(v.re.is_finite() && v.im.is_finite())) {
            return Err(LapError::NonFinite { index });
        }
        let v = Self {
            grid,
            m,
            values,
            hermitian: false,
        };
        if hermitian {
            let defect = v.hermitian_defect();
            let scale = v.sup_norm();
            if defect > 1e-12 * scale {
                return Err(LapError::Parameter(format!(
                    "potential flagged Hermitian has defect {defect:e} (sup norm {scale:e})"
                )));
            }
        }
        Ok(Self { hermitian, ..v })
    }

    /// Like [`Potential::new`], with the Hermitian flag read off the data.
    pub fn detect(grid: Grid, m: usize, values: Vec<Complex64>) -> Result<Self> {
        let mut v = Self::new(grid, m, values, false)?;
        v.hermitian = v.hermitian_defect() <= 1e-12 * v.sup_norm();
        Ok(v)
    }

    pub fn zero(grid: Grid, m: usize) -> Self {
        Self {
            grid,
            m,
            values: vec![ZERO; m * m * grid.len()],
            hermitian: true,
        }
    }

    /// `V(x) = c I_m` everywhere.
    pub fn constant_identity(grid: Grid, m: usize, c: Complex64) -> Self {
        Self::scalar_times_identity(&Field::from_fn(grid, 1, |_, _| c), m)
            .expect("scalar field has one component")
    }

    /// `V(x) = w(x) I_m` for a scalar field `w`.
    pub fn scalar_times_identity(weight: &Field, m: usize) -> Result<Self> {
        if weight.components() != 1 {
            return Err(LapError::Shape("weight must be a scalar field".into()));
        }
        let grid = *weight.grid();
        let mut values = vec![ZERO; m * m * grid.len()];
        for (i, w) in weight.values().iter().enumerate() {
            for r in 0..m {
                values[(i * m + r) * m + r] = *w;
            }
        }
        let hermitian = weight.values().iter().all(|w| w.im == 0.0);
        Ok(Self {
            grid,
            m,
            values,
            hermitian,
        })
    }

    /// Fills each point's matrix from its position.
    pub fn from_fn(grid: Grid, m: usize, f: impl Fn(&[f64; 3], &mut [Complex64])) -> Result<Self> {
        let mut values = vec![ZERO; m * m * grid.len()];
        for (i, block) in values.chunks_mut(m * m).enumerate() {
            f(&grid.position(i), block);
        }
        Self::detect(grid, m, values)
    }

    /// Reads an `m^2`-component field as an `m x m` potential (component `r*m + c` is entry `(r, c)`).
    pub fn from_field(field: &Field) -> Result<Self> {
        let comps = field.components();
        let m = (comps as f64).sqrt().round() as usize;
        if m * m != comps {
            return Err(LapError::Shape(format!("{comps} components is not a square")));
        }
        let grid = *field.grid();
        let len = grid.len();
        let mut values = vec![ZERO; comps * len];
        for e in 0..comps {
            for (i, v) in field.component(e).iter().enumerate() {
                values[i * comps + e] = *v;
            }
        }
        Self::detect(grid, m, values)
    }

    pub fn to_field(&self) -> Field {
        let comps = self.m * self.m;
        let len = self.grid.len();
        let mut out = vec![ZERO; comps * len];
        for i in 0..len {
            for e in 0..comps {
                out[e * len + i] = self.values[i * comps + e];
            }
        }
        Field::from_values(self.grid, comps, out).expect("finite by construction")
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn size(&self) -> usize {
        self.m
    }

    pub fn is_hermitian(&self) -> bool {
        self.hermitian
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn matrix_at(&self, i: usize) -> &[Complex64] {
        let mm = self.m * self.m;
        &self.values[i * mm..(i + 1) * mm]
    }

    pub fn is_zero(&self) -> bool {
        self.values.iter().all(|v| *v == ZERO)
    }

    /// `max_x max_{r,c} |V_rc(x) - conj(V_cr(x))|`.
    pub fn hermitian_defect(&self) -> f64 {
        let m = self.m;
        let mut worst = 0.0f64;
        for block in self.values.chunks(m * m) {
            for r in 0..m {
                for c in r..m {
                    worst = worst.max((block[r * m + c] - block[c * m + r].conj()).norm());
                }
            }
        }
        worst
    }

    /// Largest singular value of `V(x_i)`.
    pub fn pointwise_norm(&self, i: usize) -> f64 {
        let block = self.matrix_at(i);
        if self.m == 1 {
            return block[0].norm();
        }
        if block.iter().all(|v| *v == ZERO) {
            return 0.0;
        }
        let mat = DMatrix::from_row_slice(self.m, self.m, block);
        mat.singular_values().max()
    }

    pub fn pointwise_norms(&self) -> Vec<f64> {
        (0..self.grid.len()).map(|i| self.pointwise_norm(i)).collect()
    }

    pub fn sup_norm(&self) -> f64 {
        self.pointwise_norms().into_iter().fold(0.0, f64::max)
    }

    /// Discrete `L^kappa` norm of the pointwise operator norm.
    pub fn lebesgue_norm(&self, kappa: &LebesgueExponent) -> f64 {
        lebesgue_norm_of(&self.pointwise_norms(), kappa, self.grid.cell_volume())
    }

    /// Pointwise `V(x) u(x)`.
    pub fn apply(&self, u: &Field) -> Result<Field> {
        self.apply_with(u, false)
    }

    /// Pointwise `V(x)^* u(x)`.
    pub fn apply_adjoint(&self, u: &Field) -> Result<Field> {
        self.apply_with(u, true)
    }

    fn apply_with(&self, u: &Field, adjoint: bool) -> Result<Field> {
        if u.grid() != &self.grid || u.components() != self.m {
            return Err(LapError::Shape(format!(
                "potential is {m}x{m} on {:?}, field has {} components on {:?}",
                self.grid,
                u.components(),
                u.grid(),
                m = self.m
            )));
        }
        let m = self.m;
        let len = self.grid.len();
        let src = u.values();
        let mut out = vec![ZERO; m * len];
        for i in 0..len {
            let block = &self.values[i * m * m..(i + 1) * m * m];
            for r in 0..m {
                let mut acc = ZERO;
                for c in 0..m {
                    let entry = if adjoint { block[c * m + r].conj() } else { block[r * m + c] };
                    acc += entry * src[c * len + i];
                }
                out[r * len + i] = acc;
            }
        }
        Ok(Field::from_values(self.grid, m, out).expect("finite inputs"))
    }

    /// Keeps the matrices where `keep(i)` holds and zeroes the rest.
    pub(crate) fn masked(&self, keep: impl Fn(usize) -> bool) -> Self {
        let mm = self.m * self.m;
        let mut values = self.values.clone();
        for (i, block) in values.chunks_mut(mm).enumerate() {
            if !keep(i) {
                block.iter_mut().for_each(|v| *v = ZERO);
            }
        }
        Self {
            values,
            ..self.clone()
        }
    }

    pub fn add(&self, other: &Potential) -> Result<Potential> {
        if self.grid != other.grid || self.m != other.m {
            return Err(LapError::Shape("potentials differ in grid or size".into()));
        }
        let values: Vec<Complex64> = self.values.iter().zip(&other.values).map(|(a, b)| a + b).collect();
        let mut v = Self::new(self.grid, self.m, values, false)?;
        v.hermitian = self.hermitian && other.hermitian;
        Ok(v)
    }
}

pub(crate) fn lebesgue_norm_of(pointwise: &[f64], kappa: &LebesgueExponent, cell: f64) -> f64 {
    let scale = pointwise.iter().cloned().fold(0.0, f64::max);
    match kappa.to_f64() {
        None => scale,
        Some(_) if scale == 0.0 => 0.0,
        Some(k) => {
            let sum: f64 = pointwise.iter().map(|a| (a / scale).powf(k)).sum();
            scale * (sum * cell).powf(1.0 / k)
        }
    }
}
