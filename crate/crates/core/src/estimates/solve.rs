use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::psdo::{FamilyOperator, LinearOperator, ParameterFamily};
use crate::ro::pow_exact;
use crate::spectral::SpectralField;
use crate::sum::pairwise_sum;

/// Relative size below which `|σ(ξ, λ)|` counts as zero, measured against
/// `⟨ξ⟩^{mq} + |λ|^q`.
pub const DEGENERACY_RATIO: f64 = 1e-14;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolveConfig {
    /// Target relative residual `‖A(λ)u − f‖/‖f‖`.
    pub tol: f64,
    pub restart: usize,
    pub max_iters: usize,
}

impl Default for SolveConfig {
    fn default() -> Self {
        SolveConfig {
            tol: 1e-10,
            restart: 50,
            max_iters: 500,
        }
    }
}

#[derive(Debug, Clone)]
pub struct Solution {
    pub u: SpectralField,
    /// True relative residual of the returned `u`.
    pub residual: f64,
    /// Krylov iterations (0 on the exact multiplier path).
    pub iterations: usize,
    pub history: Vec<f64>,
}

pub(crate) fn l2(v: &[Complex64]) -> f64 {
    let sq: Vec<f64> = v.iter().map(|z| z.norm_sqr()).collect();
    pairwise_sum(&sq).sqrt()
}

fn dot(a: &[Complex64], b: &[Complex64]) -> Complex64 {
    // conj(a)·b
    let (re, im): (Vec<f64>, Vec<f64>) = a
        .iter()
        .zip(b)
        .map(|(x, y)| {
            let p = x.conj() * y;
            (p.re, p.im)
        })
        .unzip();
    Complex64::new(pairwise_sum(&re), pairwise_sum(&im))
}

/// Scale `⟨ξ⟩^{mq} + |λ|^q` per lattice point.
pub(crate) fn natural_scale(op: &FamilyOperator) -> Vec<f64> {
    let fam = op.family();
    let g = op.grid();
    let lq = op.lambda().norm().powi(fam.q() as i32);
    let table = g
        .radial_table(|t| Ok::<_, Error>(pow_exact(t, fam.order()) + lq))
        .unwrap_or_default();
    g.norm_sq_all().iter().map(|&k| table[k as usize]).collect()
}

/// Fails with the first lattice point where `|sym| < DEGENERACY_RATIO·scale`.
pub(crate) fn check_degeneracy(op: &FamilyOperator, sym: &[Complex64]) -> Result<()> {
    let scale = natural_scale(op);
    for (k, (s, w)) in sym.iter().zip(&scale).enumerate() {
        let threshold = DEGENERACY_RATIO * w;
        if !(s.norm() >= threshold) {
            return Err(Error::NearSingular {
                frequency: op.grid().frequency(k),
                modulus: s.norm(),
                threshold,
            });
        }
    }
    Ok(())
}

/// Relative residual `‖A(λ)u − f‖/‖f‖` (absolute if `f = 0`).
pub fn relative_residual(op: &FamilyOperator, u: &SpectralField, f: &SpectralField) -> Result<f64> {
    let r = op.apply(u)?.sub(f)?;
    let nf = f.l2_norm();
    Ok(if nf == 0.0 { r.l2_norm() } else { r.l2_norm() / nf })
}

/// Solves `A(λ)u = f` on the grid of `f`.
pub fn solve(fam: &ParameterFamily, lambda: Complex64, f: &SpectralField, cfg: &SolveConfig) -> Result<Solution> {
    let op = fam.compile(f.grid())?.at(lambda);
    solve_with(&op, f, cfg)
}

/// Exact per-frequency division for multiplier families, otherwise
/// restarted GMRES right-preconditioned by the `x`-averaged symbol.
pub fn solve_with(op: &FamilyOperator, f: &SpectralField, cfg: &SolveConfig) -> Result<Solution> {
    let sym = op.mean_symbol();
    check_degeneracy(op, sym)?;
    if op.is_multiplier() {
        let u = f.map(|k, c| c / sym[k]);
        let residual = relative_residual(op, &u, f)?;
        return Ok(Solution {
            u,
            residual,
            iterations: 0,
            history: vec![residual],
        });
    }
    if f.is_zero() {
        return Ok(Solution {
            u: f.clone(),
            residual: 0.0,
            iterations: 0,
            history: Vec::new(),
        });
    }
    gmres(op, f, cfg)
}

fn precondition(sym: &[Complex64], v: &[Complex64]) -> Vec<Complex64> {
    v.iter().zip(sym).map(|(a, s)| a / s).collect()
}

fn apply_vec(op: &FamilyOperator, v: Vec<Complex64>) -> Result<Vec<Complex64>> {
    Ok(op.apply(&SpectralField::from_coeffs(op.grid(), v)?)?.into_coeffs())
}

fn gmres(op: &FamilyOperator, f: &SpectralField, cfg: &SolveConfig) -> Result<Solution> {
    let sym = op.mean_symbol();
    let n = f.coeffs().len();
    let b = f.coeffs();
    let bnorm = l2(b);
    let restart = cfg.restart.max(1);
    let zero = Complex64::new(0.0, 0.0);

    // Iterate on y with u = M⁻¹ y.
    let mut y = vec![zero; n];
    let mut r = b.to_vec();
    let mut history = vec![1.0];
    let mut iterations = 0;

    while iterations < cfg.max_iters {
        let beta = l2(&r);
        if beta / bnorm <= cfg.tol {
            break;
        }
        let mut basis: Vec<Vec<Complex64>> = vec![r.iter().map(|z| z / beta).collect()];
        let mut h: Vec<Vec<Complex64>> = Vec::new();
        let mut cs: Vec<Complex64> = Vec::new();
        let mut sn: Vec<Complex64> = Vec::new();
        let mut g = vec![Complex64::new(beta, 0.0)];

        for j in 0..restart {
            if iterations >= cfg.max_iters {
                break;
            }
            iterations += 1;
            let mut w = apply_vec(op, precondition(sym, &basis[j]))?;
            let mut col = vec![zero; j + 2];
            for (i, v) in basis.iter().enumerate() {
                let hij = dot(v, &w);
                col[i] = hij;
                for (a, b) in w.iter_mut().zip(v) {
                    *a -= hij * b;
                }
            }
            let wn = l2(&w);
            col[j + 1] = Complex64::new(wn, 0.0);
            for i in 0..j {
                let t = cs[i].conj() * col[i] + sn[i].conj() * col[i + 1];
                col[i + 1] = -sn[i] * col[i] + cs[i] * col[i + 1];
                col[i] = t;
            }
            let (a, bb) = (col[j], col[j + 1]);
            let d = (a.norm_sqr() + bb.norm_sqr()).sqrt();
            let (c, s) = if d == 0.0 {
                (Complex64::new(1.0, 0.0), zero)
            } else {
                (a / d, bb / d)
            };
            col[j] = c.conj() * a + s.conj() * bb;
            col[j + 1] = zero;
            cs.push(c);
            sn.push(s);
            let gj = g[j];
            g[j] = c.conj() * gj;
            g.push(-s * gj);
            h.push(col);
            let est = g[j + 1].norm() / bnorm;
            history.push(est);
            if est <= cfg.tol || wn == 0.0 {
                break;
            }
            basis.push(w.iter().map(|z| z / wn).collect());
        }

        // Back substitution on the triangular system.
        let k = h.len();
        let mut coef = vec![zero; k];
        for i in (0..k).rev() {
            let mut s = g[i];
            for (l, c) in coef.iter().enumerate().skip(i + 1) {
                s -= h[l][i] * c;
            }
            coef[i] = s / h[i][i];
        }
        for (c, v) in coef.iter().zip(&basis) {
            for (a, b) in y.iter_mut().zip(v) {
                *a += c * b;
            }
        }
        let ay = apply_vec(op, precondition(sym, &y))?;
        r = b.iter().zip(&ay).map(|(a, c)| a - c).collect();
    }

    let u = SpectralField::from_coeffs(f.grid(), precondition(sym, &y))?;
    let residual = relative_residual(op, &u, f)?;
    if !(residual <= cfg.tol) {
        return Err(Error::Convergence {
            iterations,
            residual,
            history,
        });
    }
    Ok(Solution {
        u,
        residual,
        iterations,
        history,
    })
}
