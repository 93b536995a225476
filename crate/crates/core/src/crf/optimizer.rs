//! Limited-memory quasi-Newton minimization with orthant-wise L1 handling.
//!
//! Minimizes `f(x) + l1 * |x|_1` for smooth `f`. With `l1 == 0` this is plain
//! L-BFGS with a backtracking Armijo line search and no orthant projection,
//! so no coordinate is ever clamped to zero.

use std::collections::VecDeque;

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct OptimConfig {
    /// Stop when the relative objective change of one iteration drops below this.
    pub tol: f64,
    pub max_iter: usize,
    /// Number of correction pairs kept.
    pub memory: usize,
}

impl Default for OptimConfig {
    fn default() -> Self {
        Self { tol: 1e-6, max_iter: 500, memory: 6 }
    }
}

#[derive(Clone, Copy, Debug)]
pub struct IterationInfo {
    pub iteration: usize,
    pub objective: f64,
    pub pseudo_grad_norm: f64,
    pub step: f64,
    pub nonzero: usize,
}

#[derive(Clone, Debug)]
pub struct Outcome {
    pub x: Vec<f64>,
    pub objective: f64,
    pub iterations: usize,
    pub converged: bool,
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn l1_norm(x: &[f64]) -> f64 {
    x.iter().map(|v| v.abs()).sum()
}

fn pseudo_gradient(x: &[f64], g: &[f64], l1: f64, out: &mut [f64]) {
    if l1 == 0.0 {
        out.copy_from_slice(g);
        return;
    }
    for i in 0..x.len() {
        out[i] = if x[i] > 0.0 {
            g[i] + l1
        } else if x[i] < 0.0 {
            g[i] - l1
        } else if g[i] + l1 < 0.0 {
            g[i] + l1
        } else if g[i] - l1 > 0.0 {
            g[i] - l1
        } else {
            0.0
        };
    }
}

struct Correction {
    s: Vec<f64>,
    y: Vec<f64>,
    rho: f64,
}

/// Two-loop recursion: returns `-H * v`.
fn direction(history: &VecDeque<Correction>, v: &[f64]) -> Vec<f64> {
    let mut q = v.to_vec();
    let mut a = vec![0.0; history.len()];
    for (k, c) in history.iter().enumerate().rev() {
        a[k] = c.rho * dot(&c.s, &q);
        for (qi, yi) in q.iter_mut().zip(&c.y) {
            *qi -= a[k] * yi;
        }
    }
    if let Some(c) = history.back() {
        let gamma = dot(&c.s, &c.y) / dot(&c.y, &c.y);
        for qi in &mut q {
            *qi *= gamma;
        }
    }
    for (k, c) in history.iter().enumerate() {
        let b = c.rho * dot(&c.y, &q);
        for (qi, si) in q.iter_mut().zip(&c.s) {
            *qi += si * (a[k] - b);
        }
    }
    for qi in &mut q {
        *qi = -*qi;
    }
    q
}

/// Minimizes `f + l1 * |x|_1` starting from `x0`.
///
/// `f` writes the gradient of the smooth part into its second argument and
/// returns the smooth value. `log` is called after every accepted step.
pub fn minimize<F>(
    x0: Vec<f64>,
    l1: f64,
    config: &OptimConfig,
    mut f: F,
    log: &mut dyn FnMut(&IterationInfo),
) -> Result<Outcome>
where
    F: FnMut(&[f64], &mut [f64]) -> Result<f64>,
{
    let dim = x0.len();
    let mut x = x0;
    let mut g = vec![0.0; dim];
    let mut fx = f(&x, &mut g)? + l1 * l1_norm(&x);
    if !fx.is_finite() {
        return Err(Error::Diverged(0));
    }
    let mut pg = vec![0.0; dim];
    let mut xn = vec![0.0; dim];
    let mut gn = vec![0.0; dim];
    let mut history: VecDeque<Correction> = VecDeque::with_capacity(config.memory);
    let mut converged = false;
    let mut iterations = 0;

    for k in 1..=config.max_iter {
        iterations = k;
        pseudo_gradient(&x, &g, l1, &mut pg);
        let pg_norm = dot(&pg, &pg).sqrt();
        if pg_norm == 0.0 {
            converged = true;
            break;
        }

        let mut d = direction(&history, &pg);
        if l1 > 0.0 {
            for i in 0..dim {
                if d[i] * pg[i] >= 0.0 {
                    d[i] = 0.0;
                }
            }
        }
        if dot(&d, &pg) >= 0.0 {
            history.clear();
            d = pg.iter().map(|v| -v).collect();
        }
        let orthant: Vec<f64> = if l1 > 0.0 {
            x.iter()
                .zip(&pg)
                .map(|(&xi, &pgi)| if xi != 0.0 { xi.signum() } else if pgi != 0.0 { -pgi.signum() } else { 0.0 })
                .collect()
        } else {
            Vec::new()
        };

        let mut step = if history.is_empty() { 1.0 / dot(&d, &d).sqrt() } else { 1.0 };
        let mut accepted = None;
        for _ in 0..60 {
            for i in 0..dim {
                xn[i] = x[i] + step * d[i];
            }
            if l1 > 0.0 {
                for i in 0..dim {
                    if xn[i] * orthant[i] <= 0.0 {
                        xn[i] = 0.0;
                    }
                }
            }
            let fnew = f(&xn, &mut gn)? + l1 * l1_norm(&xn);
            let decrease: f64 = (0..dim).map(|i| pg[i] * (xn[i] - x[i])).sum();
            if fnew.is_finite() && fnew <= fx + 1e-4 * decrease {
                accepted = Some(fnew);
                break;
            }
            step *= 0.5;
        }
        let Some(fnew) = accepted else {
            if !history.is_empty() {
                history.clear();
                continue;
            }
            if !fx.is_finite() {
                return Err(Error::Diverged(k));
            }
            // No descent along steepest direction: treat as a stationary point.
            converged = true;
            break;
        };

        let s: Vec<f64> = xn.iter().zip(&x).map(|(a, b)| a - b).collect();
        let y: Vec<f64> = gn.iter().zip(&g).map(|(a, b)| a - b).collect();
        let sy = dot(&s, &y);
        if sy > 1e-16 {
            if history.len() == config.memory {
                history.pop_front();
            }
            history.push_back(Correction { s, y, rho: 1.0 / sy });
        }
        let rel = (fx - fnew).abs() / fx.abs().max(1.0);
        std::mem::swap(&mut x, &mut xn);
        std::mem::swap(&mut g, &mut gn);
        fx = fnew;
        log(&IterationInfo {
            iteration: k,
            objective: fx,
            pseudo_grad_norm: pg_norm,
            step,
            nonzero: x.iter().filter(|v| **v != 0.0).count(),
        });
        if rel < config.tol {
            converged = true;
            break;
        }
    }
    Ok(Outcome { x, objective: fx, iterations, converged })
}
