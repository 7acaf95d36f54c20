//! Preconditioned Krylov drivers over abstract operator actions.
//!
//! All three methods start from `x = 0` and stop on the true relative
//! residual `||g - A x||_2 / ||g||_2 < tol`. Recurrence residuals only
//! trigger the check; the final residual is always recomputed.

use serde::{Deserialize, Serialize};

use crate::error::{check_len, Error, Result};
use crate::linalg::{axpy, dot, norm2};
use crate::sparse_la::SparseMatrix;

/// Action of a square linear operator.
pub trait LinearOperator {
    fn dim(&self) -> usize;

    /// Overwrites `y` with `Op x`.
    fn apply(&self, x: &[f64], y: &mut [f64]);
}

impl<T: LinearOperator + ?Sized> LinearOperator for &T {
    fn dim(&self) -> usize {
        (**self).dim()
    }

    fn apply(&self, x: &[f64], y: &mut [f64]) {
        (**self).apply(x, y)
    }
}

impl LinearOperator for SparseMatrix {
    fn dim(&self) -> usize {
        self.n_rows()
    }

    fn apply(&self, x: &[f64], y: &mut [f64]) {
        y.fill(0.0);
        self.mul_acc(1.0, x, y);
    }
}

#[derive(Debug, Clone, Copy)]
pub struct Identity(pub usize);

impl LinearOperator for Identity {
    fn dim(&self) -> usize {
        self.0
    }

    fn apply(&self, x: &[f64], y: &mut [f64]) {
        y.copy_from_slice(x);
    }
}

/// Wraps a closure `(x, y)` as an operator.
pub struct FnOperator<F> {
    dim: usize,
    f: F,
}

impl<F: Fn(&[f64], &mut [f64])> FnOperator<F> {
    pub fn new(dim: usize, f: F) -> Self {
        Self { dim, f }
    }
}

impl<F: Fn(&[f64], &mut [f64])> LinearOperator for FnOperator<F> {
    fn dim(&self) -> usize {
        self.dim
    }

    fn apply(&self, x: &[f64], y: &mut [f64]) {
        (self.f)(x, y)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum KrylovMethod {
    Pcg,
    Gmres,
    Bicgstab,
}

impl KrylovMethod {
    pub fn name(self) -> &'static str {
        match self {
            KrylovMethod::Pcg => "pcg",
            KrylovMethod::Gmres => "gmres",
            KrylovMethod::Bicgstab => "bicgstab",
        }
    }
}

impl std::str::FromStr for KrylovMethod {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "pcg" | "cg" => Ok(KrylovMethod::Pcg),
            "gmres" => Ok(KrylovMethod::Gmres),
            "bicgstab" => Ok(KrylovMethod::Bicgstab),
            other => Err(Error::invalid(format!("unknown Krylov method `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KrylovConfig {
    pub method: KrylovMethod,
    pub tol: f64,
    pub max_iters: usize,
    /// GMRES restart length; `None` runs unrestarted.
    pub restart: Option<usize>,
}

impl KrylovConfig {
    pub fn new(method: KrylovMethod, tol: f64) -> Self {
        Self {
            method,
            tol,
            max_iters: 1000,
            restart: None,
        }
    }

    pub fn with_max_iters(mut self, max_iters: usize) -> Self {
        self.max_iters = max_iters;
        self
    }

    fn validate(&self) -> Result<()> {
        if !(self.tol > 0.0) {
            return Err(Error::invalid(format!("tolerance must be positive, got {}", self.tol)));
        }
        if self.max_iters == 0 {
            return Err(Error::invalid("max_iters must be at least 1"));
        }
        if self.restart == Some(0) {
            return Err(Error::invalid("GMRES restart length must be at least 1"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KrylovResult {
    pub solution: Vec<f64>,
    /// Iteration count; BiCGStab reports half steps as `.5`.
    pub iterations: f64,
    /// True relative residual of `solution`.
    pub final_rel_residual: f64,
    pub converged: bool,
    /// Relative residual after each (half) iteration as seen by the recurrence.
    pub history: Vec<f64>,
    /// Set when PCG stopped on a vanishing curvature `p^T A p`.
    pub breakdown: bool,
}

fn true_residual<A: LinearOperator + ?Sized>(a: &A, g: &[f64], x: &[f64]) -> Vec<f64> {
    let mut r = vec![0.0; g.len()];
    a.apply(x, &mut r);
    for (ri, gi) in r.iter_mut().zip(g) {
        *ri = gi - *ri;
    }
    r
}

fn check_dims<A: LinearOperator + ?Sized, M: LinearOperator + ?Sized>(a: &A, m: &M, g: &[f64]) -> Result<()> {
    check_len(a.dim(), g.len())?;
    check_len(a.dim(), m.dim())
}

fn trivial_result(n: usize) -> KrylovResult {
    KrylovResult {
        solution: vec![0.0; n],
        iterations: 0.0,
        final_rel_residual: 0.0,
        converged: true,
        history: Vec::new(),
        breakdown: false,
    }
}

pub fn solve<A, M>(a: &A, m: &M, g: &[f64], config: &KrylovConfig) -> Result<KrylovResult>
where
    A: LinearOperator + ?Sized,
    M: LinearOperator + ?Sized,
{
    match config.method {
        KrylovMethod::Pcg => pcg(a, m, g, config),
        KrylovMethod::Gmres => gmres(a, m, g, config),
        KrylovMethod::Bicgstab => bicgstab(a, m, g, config),
    }
}

/// Preconditioned conjugate gradients.
///
/// Negative curvature on indefinite systems is tolerated; the iteration
/// only stops early when `|p^T A p|` or `|r^T z|` vanishes relative to the
/// vector norms, in which case `breakdown` is set.
pub fn pcg<A, M>(a: &A, m: &M, g: &[f64], config: &KrylovConfig) -> Result<KrylovResult>
where
    A: LinearOperator + ?Sized,
    M: LinearOperator + ?Sized,
{
    check_dims(a, m, g)?;
    config.validate()?;
    let n = g.len();
    let gn = norm2(g);
    if gn == 0.0 {
        return Ok(trivial_result(n));
    }
    let mut x = vec![0.0; n];
    let mut r = g.to_vec();
    let mut z = vec![0.0; n];
    let mut q = vec![0.0; n];
    m.apply(&r, &mut z);
    let mut p = z.clone();
    let mut rz = dot(&r, &z);
    let mut history = Vec::new();
    let mut converged = false;
    let mut breakdown = false;
    let mut iterations = 0;

    while iterations < config.max_iters {
        if rz.abs() <= 1e-14 * norm2(&r) * norm2(&z) {
            breakdown = true;
            break;
        }
        a.apply(&p, &mut q);
        let pq = dot(&p, &q);
        if pq.abs() <= 1e-14 * norm2(&p) * norm2(&q) || pq == 0.0 {
            breakdown = true;
            break;
        }
        iterations += 1;
        let alpha = rz / pq;
        axpy(alpha, &p, &mut x);
        axpy(-alpha, &q, &mut r);
        let rel = norm2(&r) / gn;
        if !rel.is_finite() {
            return Err(Error::Divergence {
                iteration: iterations as f64,
            });
        }
        history.push(rel);
        if rel < config.tol {
            let rt = true_residual(a, g, &x);
            if norm2(&rt) / gn < config.tol {
                converged = true;
                break;
            }
            r = rt;
        }
        m.apply(&r, &mut z);
        let rz_new = dot(&r, &z);
        let beta = rz_new / rz;
        for (pi, zi) in p.iter_mut().zip(&z) {
            *pi = zi + beta * *pi;
        }
        rz = rz_new;
    }
    let final_rel_residual = norm2(&true_residual(a, g, &x)) / gn;
    Ok(KrylovResult {
        solution: x,
        iterations: iterations as f64,
        final_rel_residual,
        converged: converged || final_rel_residual < config.tol,
        history,
        breakdown,
    })
}

/// Left-preconditioned GMRES on `M A x = M g`.
///
/// The Arnoldi process minimizes the preconditioned residual, but
/// convergence is declared on the true residual, which is tracked from the
/// stored products `A v_j` without extra operator applications. `history`
/// holds the preconditioned residual estimates, relative to `||M r0||`.
pub fn gmres<A, M>(a: &A, m: &M, g: &[f64], config: &KrylovConfig) -> Result<KrylovResult>
where
    A: LinearOperator + ?Sized,
    M: LinearOperator + ?Sized,
{
    check_dims(a, m, g)?;
    config.validate()?;
    let n = g.len();
    let gn = norm2(g);
    if gn == 0.0 {
        return Ok(trivial_result(n));
    }
    let restart = config.restart.unwrap_or(config.max_iters).min(config.max_iters);
    let mut x = vec![0.0; n];
    let mut history = Vec::new();
    let mut iterations = 0usize;
    let mut converged = false;
    let mut w = vec![0.0; n];

    'outer: while iterations < config.max_iters {
        let r0 = true_residual(a, g, &x);
        if norm2(&r0) / gn < config.tol {
            converged = true;
            break;
        }
        let mut z = vec![0.0; n];
        m.apply(&r0, &mut z);
        let beta = norm2(&z);
        if beta == 0.0 || !beta.is_finite() {
            return Err(Error::Divergence {
                iteration: iterations as f64,
            });
        }
        let mut basis: Vec<Vec<f64>> = vec![z.iter().map(|v| v / beta).collect()];
        let mut products: Vec<Vec<f64>> = Vec::new();
        // Hessenberg columns, rotated in place
        let mut h: Vec<Vec<f64>> = Vec::new();
        let mut cs: Vec<f64> = Vec::new();
        let mut sn: Vec<f64> = Vec::new();
        let mut s = vec![beta];

        for j in 0..restart {
            if iterations >= config.max_iters {
                break;
            }
            let mut av = vec![0.0; n];
            a.apply(&basis[j], &mut av);
            m.apply(&av, &mut w);
            products.push(av);
            let mut col = vec![0.0; j + 2];
            // classical Gram-Schmidt, applied twice
            for _ in 0..2 {
                for (i, v) in basis.iter().enumerate() {
                    let c = dot(&w, v);
                    col[i] += c;
                    axpy(-c, v, &mut w);
                }
            }
            let wn = norm2(&w);
            col[j + 1] = wn;
            for i in 0..j {
                let t = cs[i] * col[i] + sn[i] * col[i + 1];
                col[i + 1] = -sn[i] * col[i] + cs[i] * col[i + 1];
                col[i] = t;
            }
            let denom = col[j].hypot(col[j + 1]);
            let (c, sv) = if denom == 0.0 { (1.0, 0.0) } else { (col[j] / denom, col[j + 1] / denom) };
            col[j] = denom;
            col[j + 1] = 0.0;
            cs.push(c);
            sn.push(sv);
            s.push(-sv * s[j]);
            s[j] *= c;
            h.push(col);
            iterations += 1;

            let est = s[j + 1].abs() / beta;
            if !est.is_finite() {
                return Err(Error::Divergence {
                    iteration: iterations as f64,
                });
            }
            history.push(est);

            // back substitution for the current least-squares coefficients
            let k = j + 1;
            let mut y = vec![0.0; k];
            for i in (0..k).rev() {
                let mut t = s[i];
                for l in i + 1..k {
                    t -= h[l][i] * y[l];
                }
                y[i] = if h[i][i] != 0.0 { t / h[i][i] } else { 0.0 };
            }
            let mut r = r0.clone();
            for (yl, av) in y.iter().zip(&products) {
                axpy(-yl, av, &mut r);
            }
            let done = norm2(&r) / gn < config.tol;
            let happy = wn <= 1e-14 * beta;
            if done || happy || k == restart || iterations >= config.max_iters {
                for (yl, v) in y.iter().zip(&basis) {
                    axpy(*yl, v, &mut x);
                }
                if done {
                    converged = true;
                    break 'outer;
                }
                if happy && est == 0.0 && iterations < config.max_iters {
                    // exact in the preconditioned norm yet not below tol: nothing left to gain
                    break 'outer;
                }
                continue 'outer;
            }
            basis.push(w.iter().map(|v| v / wn).collect());
        }
    }
    let final_rel_residual = norm2(&true_residual(a, g, &x)) / gn;
    Ok(KrylovResult {
        solution: x,
        iterations: iterations as f64,
        final_rel_residual,
        converged: converged || final_rel_residual < config.tol,
        history,
        breakdown: false,
    })
}

/// Preconditioned BiCGStab with convergence checked after each half step.
pub fn bicgstab<A, M>(a: &A, m: &M, g: &[f64], config: &KrylovConfig) -> Result<KrylovResult>
where
    A: LinearOperator + ?Sized,
    M: LinearOperator + ?Sized,
{
    check_dims(a, m, g)?;
    config.validate()?;
    let n = g.len();
    let gn = norm2(g);
    if gn == 0.0 {
        return Ok(trivial_result(n));
    }
    let mut x = vec![0.0; n];
    let mut r = g.to_vec();
    let r_hat = r.clone();
    let rh_norm = norm2(&r_hat);
    let mut p = vec![0.0; n];
    let mut v = vec![0.0; n];
    let mut p_hat = vec![0.0; n];
    let mut s_hat = vec![0.0; n];
    let mut t = vec![0.0; n];
    let (mut rho, mut alpha, mut omega) = (1.0, 1.0, 1.0);
    let mut history = Vec::new();
    let mut half_steps = 0usize;

    let finish = |x: Vec<f64>, half_steps: usize, history: Vec<f64>, converged: bool| {
        let final_rel_residual = norm2(&true_residual(a, g, &x)) / gn;
        KrylovResult {
            solution: x,
            iterations: half_steps as f64 / 2.0,
            final_rel_residual,
            converged: converged || final_rel_residual < config.tol,
            history,
            breakdown: false,
        }
    };
    let breakdown = |reason: &str, x: Vec<f64>, half_steps: usize, history: Vec<f64>| {
        let partial = finish(x, half_steps, history, false);
        if partial.converged {
            return Ok(partial);
        }
        Err(Error::Breakdown {
            reason: reason.to_string(),
            partial: Box::new(partial),
        })
    };

    for it in 1..=config.max_iters {
        let rho_new = dot(&r_hat, &r);
        if rho_new.abs() <= 1e-14 * rh_norm * norm2(&r) {
            return breakdown("rho vanished", x, half_steps, history);
        }
        if it == 1 {
            p.copy_from_slice(&r);
        } else {
            let beta = (rho_new / rho) * (alpha / omega);
            for i in 0..n {
                p[i] = r[i] + beta * (p[i] - omega * v[i]);
            }
        }
        m.apply(&p, &mut p_hat);
        a.apply(&p_hat, &mut v);
        let rv = dot(&r_hat, &v);
        if rv.abs() <= 1e-14 * rh_norm * norm2(&v) || rv == 0.0 {
            return breakdown("r_hat . v vanished", x, half_steps, history);
        }
        alpha = rho_new / rv;
        axpy(alpha, &p_hat, &mut x);
        axpy(-alpha, &v, &mut r);
        half_steps += 1;
        let rel = norm2(&r) / gn;
        if !rel.is_finite() {
            return Err(Error::Divergence {
                iteration: half_steps as f64 / 2.0,
            });
        }
        history.push(rel);
        if rel < config.tol {
            let rt = true_residual(a, g, &x);
            if norm2(&rt) / gn < config.tol {
                return Ok(finish(x, half_steps, history, true));
            }
            r = rt;
        }

        m.apply(&r, &mut s_hat);
        a.apply(&s_hat, &mut t);
        let tt = dot(&t, &t);
        if tt == 0.0 {
            return breakdown("t vanished", x, half_steps, history);
        }
        omega = dot(&t, &r) / tt;
        axpy(omega, &s_hat, &mut x);
        axpy(-omega, &t, &mut r);
        half_steps += 1;
        let rel = norm2(&r) / gn;
        if !rel.is_finite() {
            return Err(Error::Divergence {
                iteration: half_steps as f64 / 2.0,
            });
        }
        history.push(rel);
        if rel < config.tol {
            let rt = true_residual(a, g, &x);
            if norm2(&rt) / gn < config.tol {
                return Ok(finish(x, half_steps, history, true));
            }
            r = rt;
        }
        if omega.abs() <= 1e-14 {
            return breakdown("omega vanished", x, half_steps, history);
        }
        rho = rho_new;
    }
    Ok(finish(x, half_steps, history, false))
}
