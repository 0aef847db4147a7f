//! Restarted GMRES on flat complex vectors with a matrix-free operator.

use num_complex::Complex64;

use crate::error::Result;

const ZERO: Complex64 = Complex64 { re: 0.0, im: 0.0 };

pub(crate) fn dot(a: &[Complex64], b: &[Complex64]) -> Complex64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

pub(crate) fn norm(a: &[Complex64]) -> f64 {
    a.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt()
}

pub(crate) struct KrylovOutcome {
    pub x: Vec<Complex64>,
    pub iterations: usize,
}

/// Solves `A x = b` to `||b - A x|| <= tol ||b||`, restarting every `restart` steps.
///
/// The residual is recomputed from scratch at every restart, and convergence is
/// only declared on that true residual.
pub(crate) fn gmres(
    mut apply: impl FnMut(&[Complex64]) -> Result<Vec<Complex64>>,
    b: &[Complex64],
    x0: Vec<Complex64>,
    tol: f64,
    max_iter: usize,
    restart: usize,
) -> Result<KrylovOutcome> {
    let b_norm = norm(b);
    let mut x = x0;
    if b_norm == 0.0 {
        return Ok(KrylovOutcome {
            x: vec![ZERO; b.len()],
            iterations: 0,
        });
    }
    let residual = |ax: Vec<Complex64>| -> Vec<Complex64> { b.iter().zip(ax).map(|(bi, ai)| bi - ai).collect() };
    let mut r = residual(apply(&x)?);
    let mut rel = norm(&r) / b_norm;
    let mut iterations = 0;
    while rel > tol && iterations < max_iter {
        let beta = norm(&r);
        let steps = restart.min(max_iter - iterations);
        let mut basis: Vec<Vec<Complex64>> = vec![r.iter().map(|v| v / beta).collect()];
        // Hessenberg columns after Givens rotation, i.e. the upper-triangular factor
        let mut h: Vec<Vec<Complex64>> = Vec::with_capacity(steps);
        let mut cs: Vec<f64> = Vec::with_capacity(steps);
        let mut sn: Vec<Complex64> = Vec::with_capacity(steps);
        let mut g = vec![Complex64::new(beta, 0.0)];
        for j in 0..steps {
            let mut w = apply(&basis[j])?;
            iterations += 1;
            let mut col = vec![ZERO; j + 2];
            for (i, v) in basis.iter().enumerate() {
                let hij = dot(v, &w);
                col[i] = hij;
                for (wk, vk) in w.iter_mut().zip(v) {
                    *wk -= hij * vk;
                }
            }
            // one reorthogonalization pass keeps the basis orthonormal at tight tolerances
            for (i, v) in basis.iter().enumerate() {
                let corr = dot(v, &w);
                col[i] += corr;
                for (wk, vk) in w.iter_mut().zip(v) {
                    *wk -= corr * vk;
                }
            }
            let wn = norm(&w);
            col[j + 1] = Complex64::new(wn, 0.0);
            for i in 0..j {
                let (c, s) = (cs[i], sn[i]);
                let a = col[i];
                let bb = col[i + 1];
                col[i] = c * a + s * bb;
                col[i + 1] = -s.conj() * a + c * bb;
            }
            let (c, s) = givens(col[j], col[j + 1]);
            col[j] = c * col[j] + s * col[j + 1];
            col[j + 1] = ZERO;
            cs.push(c);
            sn.push(s);
            let gj = g[j];
            g[j] = c * gj;
            g.push(-s.conj() * gj);
            h.push(col);
            let estimate = g[j + 1].norm() / b_norm;
            if wn == 0.0 || estimate <= tol * 0.5 {
                break;
            }
            basis.push(w.iter().map(|v| v / wn).collect());
        }
        // back substitution on the triangular factor
        let k = h.len();
        let mut y = vec![ZERO; k];
        for i in (0..k).rev() {
            let mut acc = g[i];
            for (l, yl) in y.iter().enumerate().skip(i + 1) {
                acc -= h[l][i] * yl;
            }
            y[i] = acc / h[i][i];
        }
        for (yi, v) in y.iter().zip(&basis) {
            for (xk, vk) in x.iter_mut().zip(v) {
                *xk += yi * vk;
            }
        }
        r = residual(apply(&x)?);
        rel = norm(&r) / b_norm;
    }
    Ok(KrylovOutcome {
        x,
        iterations,
    })
}

/// Complex Givens rotation `(c, s)` zeroing `b` in `[c s; -conj(s) c] (a, b)`.
fn givens(a: Complex64, b: Complex64) -> (f64, Complex64) {
    let (an, bn) = (a.norm(), b.norm());
    if bn == 0.0 {
        return (1.0, ZERO);
    }
    if an == 0.0 {
        return (0.0, b.conj() / bn);
    }
    let r = (an * an + bn * bn).sqrt();
    let phase = a / an;
    (an / r, phase * b.conj() / r)
}
