//! Geometric programs in log variables, solved by a log-barrier method with
//! damped Newton steps.
//!
//! A GP minimizes a posynomial `f0(x)` subject to `f_i(x) <= 1` over `x > 0`.
//! With `x = exp(y)` every `log f_i` is a log-sum-exp of affine functions of
//! `y`, hence smooth and convex.

use crate::error::{Error, Result};
use crate::numerics::cholesky_solve_real;

/// `coeff * prod_j x_j^exps[j]`, `coeff > 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct Monomial {
    pub coeff: f64,
    pub exps: Vec<f64>,
}

impl Monomial {
    pub fn new(coeff: f64, exps: Vec<f64>) -> Self {
        Monomial { coeff, exps }
    }

    /// `coeff * prod x_j^e_j` for the sparse exponent list `(j, e_j)`.
    pub fn sparse(n: usize, coeff: f64, exps: &[(usize, f64)]) -> Self {
        let mut e = vec![0.0; n];
        for &(j, v) in exps {
            e[j] += v;
        }
        Monomial { coeff, exps: e }
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        self.coeff * self.exps.iter().zip(x).map(|(e, x)| x.powf(*e)).product::<f64>()
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Posynomial {
    pub terms: Vec<Monomial>,
}

impl Posynomial {
    pub fn new(terms: Vec<Monomial>) -> Self {
        Posynomial { terms }
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        self.terms.iter().map(|t| t.eval(x)).sum()
    }

    /// `log f(exp(y))` with its gradient and (row-major) Hessian.
    fn log_eval(&self, y: &[f64], hess: bool) -> (f64, Vec<f64>, Vec<f64>) {
        let n = y.len();
        let z: Vec<f64> = self
            .terms
            .iter()
            .map(|t| t.coeff.ln() + t.exps.iter().zip(y).map(|(e, y)| e * y).sum::<f64>())
            .collect();
        let zmax = z.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let w: Vec<f64> = z.iter().map(|v| (v - zmax).exp()).collect();
        let total: f64 = w.iter().sum();
        let value = zmax + total.ln();
        let mut grad = vec![0.0; n];
        for (t, wi) in self.terms.iter().zip(&w) {
            for (g, e) in grad.iter_mut().zip(&t.exps) {
                *g += wi / total * e;
            }
        }
        let mut h = Vec::new();
        if hess {
            h = vec![0.0; n * n];
            for (t, wi) in self.terms.iter().zip(&w) {
                let p = wi / total;
                for i in 0..n {
                    if t.exps[i] == 0.0 {
                        continue;
                    }
                    for j in 0..n {
                        h[i * n + j] += p * t.exps[i] * t.exps[j];
                    }
                }
            }
            for i in 0..n {
                for j in 0..n {
                    h[i * n + j] -= grad[i] * grad[j];
                }
            }
        }
        (value, grad, h)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GeometricProgram {
    pub vars: usize,
    pub objective: Posynomial,
    /// Each entry is a constraint `f_i(x) <= 1`.
    pub constraints: Vec<Posynomial>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GpSolution {
    pub x: Vec<f64>,
    pub objective: f64,
    /// Largest `f_i(x)`; at most 1.
    pub max_constraint: f64,
    /// Norm of the Lagrangian gradient in log variables with the barrier
    /// multipliers, relative to the norms of the terms it sums.
    pub stationarity: f64,
    pub newton_steps: usize,
}

/// Solver settings.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GpOptions {
    pub max_newton: usize,
    /// Target duality gap `m / t`.
    pub gap_tol: f64,
    pub stationarity_tol: f64,
}

impl Default for GpOptions {
    fn default() -> Self {
        GpOptions {
            max_newton: 500,
            gap_tol: 1e-7,
            stationarity_tol: 1e-6,
        }
    }
}

const BARRIER_GROWTH: f64 = 20.0;
const ARMIJO: f64 = 0.01;
const BACKTRACK: f64 = 0.5;
/// Half the squared Newton decrement at which centering stops.
const CENTERING_TOL: f64 = 1e-18;
/// Below this decrement full Newton steps are taken without line search.
const PURE_NEWTON: f64 = 1e-3;

struct Barrier<'a> {
    gp: &'a GeometricProgram,
    /// Phase I stops as soon as this variable (the slack) is negative.
    stop_below_zero: Option<usize>,
}

enum Outcome {
    Converged(Vec<f64>, usize, f64),
    EarlyStop(Vec<f64>, usize),
}

impl Barrier<'_> {
    fn constraint_values(&self, y: &[f64]) -> Vec<f64> {
        self.gp.constraints.iter().map(|c| c.log_eval(y, false).0).collect()
    }

    fn value(&self, y: &[f64], t: f64) -> f64 {
        let mut v = t * self.gp.objective.log_eval(y, false).0;
        for f in self.constraint_values(y) {
            if f >= 0.0 {
                return f64::INFINITY;
            }
            v -= (-f).ln();
        }
        v
    }

    fn derivatives(&self, y: &[f64], t: f64) -> (Vec<f64>, Vec<f64>, Vec<f64>) {
        let n = y.len();
        let (_, g0, h0) = self.gp.objective.log_eval(y, true);
        let mut g: Vec<f64> = g0.iter().map(|v| t * v).collect();
        let mut h: Vec<f64> = h0.iter().map(|v| t * v).collect();
        // Lagrangian gradient with multipliers 1 / (t (-f_i)), scaled by t.
        let mut lag = g.clone();
        for c in &self.gp.constraints {
            let (f, gi, hi) = c.log_eval(y, true);
            let s = -f;
            for i in 0..n {
                g[i] += gi[i] / s;
                lag[i] += gi[i] / s;
                for j in 0..n {
                    h[i * n + j] += hi[i * n + j] / s + gi[i] * gi[j] / (s * s);
                }
            }
        }
        (g, h, lag)
    }

    /// `|grad L| / (|grad f0| + sum_i lambda_i |grad f_i|)` with the barrier
    /// multipliers `lambda_i = 1 / (t (-f_i))`.
    fn relative_stationarity(&self, y: &[f64], t: f64) -> f64 {
        let norm = |v: &[f64]| v.iter().map(|a| a * a).sum::<f64>().sqrt();
        let (_, _, lag) = self.derivatives(y, t);
        let (_, g0, _) = self.gp.objective.log_eval(y, true);
        let mut scale = t * norm(&g0);
        for c in &self.gp.constraints {
            let (f, gi, _) = c.log_eval(y, true);
            scale += norm(&gi) / -f;
        }
        norm(&lag) / scale.max(f64::MIN_POSITIVE)
    }

    fn run(&self, y0: &[f64], opts: &GpOptions) -> Result<Outcome> {
        let n = y0.len();
        let m = self.gp.constraints.len().max(1) as f64;
        let mut y = y0.to_vec();
        let mut t = 1.0;
        let mut steps = 0;
        loop {
            // Centering.
            let mut prev = f64::INFINITY;
            loop {
                if let Some(idx) = self.stop_below_zero {
                    if y[idx] < 0.0 {
                        return Ok(Outcome::EarlyStop(y, steps));
                    }
                }
                let (g, h, _) = self.derivatives(&y, t);
                let neg: Vec<f64> = g.iter().map(|v| -v).collect();
                let dir = newton_direction(&h, n, &neg)?;
                let decrement: f64 = -g.iter().zip(&dir).map(|(a, b)| a * b).sum::<f64>();
                // Inside the quadratic region a decrement that stops shrinking
                // has reached the rounding floor.
                if !(decrement / 2.0 > CENTERING_TOL) || (decrement < PURE_NEWTON && decrement >= 0.5 * prev) {
                    break;
                }
                prev = decrement;
                steps += 1;
                if steps > opts.max_newton {
                    return Err(Error::NonConvergence {
                        iterations: opts.max_newton,
                        context: format!("GP barrier method at t = {t:e}"),
                    });
                }
                let f0 = self.value(&y, t);
                let mut step = 1.0;
                loop {
                    let cand: Vec<f64> = y.iter().zip(&dir).map(|(a, b)| a + step * b).collect();
                    let fc = self.value(&cand, t);
                    let pure = decrement < PURE_NEWTON && step == 1.0 && fc.is_finite();
                    if pure || fc <= f0 - ARMIJO * step * decrement {
                        y = cand;
                        break;
                    }
                    step *= BACKTRACK;
                    if step < 1e-14 {
                        break;
                    }
                }
                if step < 1e-14 {
                    break;
                }
            }
            if m / t < opts.gap_tol {
                return Ok(Outcome::Converged(y.clone(), steps, self.relative_stationarity(&y, t)));
            }
            t *= BARRIER_GROWTH;
        }
    }
}

fn newton_direction(h: &[f64], n: usize, rhs: &[f64]) -> Result<Vec<f64>> {
    match cholesky_solve_real(h, n, rhs) {
        Ok(d) => Ok(d),
        Err(_) => {
            let scale = (0..n).map(|i| h[i * n + i].abs()).fold(1e-300, f64::max);
            let mut reg = h.to_vec();
            for i in 0..n {
                reg[i * n + i] += 1e-10 * scale;
            }
            cholesky_solve_real(&reg, n, rhs)
        }
    }
}

fn log_vars(x: &[f64]) -> Result<Vec<f64>> {
    x.iter()
        .map(|&v| {
            if v > 0.0 && v.is_finite() {
                Ok(v.ln())
            } else {
                Err(Error::Domain(format!("GP starting point entry {v} must be positive")))
            }
        })
        .collect()
}

/// Solves `gp` from the positive starting point `x0`. An infeasible start
/// triggers a phase-I problem that minimizes the largest constraint value;
/// if that stays at or above zero the program is reported infeasible.
pub fn solve_gp(gp: &GeometricProgram, x0: &[f64], opts: &GpOptions) -> Result<GpSolution> {
    if x0.len() != gp.vars {
        return Err(Error::DimensionMismatch(format!("{} starting values for {} variables", x0.len(), gp.vars)));
    }
    for p in std::iter::once(&gp.objective).chain(&gp.constraints) {
        if p.terms.is_empty() || p.terms.iter().any(|t| !(t.coeff > 0.0) || t.exps.len() != gp.vars) {
            return Err(Error::Domain("posynomial terms need positive coefficients and one exponent per variable".into()));
        }
    }
    let mut y = log_vars(x0)?;
    let worst = gp.constraints.iter().map(|c| c.log_eval(&y, false).0).fold(f64::NEG_INFINITY, f64::max);
    let mut steps = 0;
    if worst >= 0.0 {
        let (start, used) = phase_one(gp, &y, worst, opts)?;
        y = start;
        steps += used;
    }
    let barrier = Barrier { gp, stop_below_zero: None };
    let rest = GpOptions {
        max_newton: opts.max_newton.saturating_sub(steps),
        ..*opts
    };
    match barrier.run(&y, &rest)? {
        Outcome::Converged(y, used, stationarity) => {
            let x: Vec<f64> = y.iter().map(|v| v.exp()).collect();
            let max_constraint = gp.constraints.iter().map(|c| c.eval(&x)).fold(0.0, f64::max);
            if stationarity > opts.stationarity_tol {
                return Err(Error::NonConvergence {
                    iterations: steps + used,
                    context: format!("GP stationarity residual {stationarity:e}"),
                });
            }
            Ok(GpSolution {
                objective: gp.objective.eval(&x),
                x,
                max_constraint,
                stationarity,
                newton_steps: steps + used,
            })
        }
        Outcome::EarlyStop(..) => unreachable!("phase II has no early stop"),
    }
}

/// Minimizes `s` subject to `f_i(x) <= e^s` and `s >= -1`; returns a
/// strictly feasible point as soon as `s < 0`.
fn phase_one(gp: &GeometricProgram, y: &[f64], worst: f64, opts: &GpOptions) -> Result<(Vec<f64>, usize)> {
    let n = gp.vars;
    let extend = |m: &Monomial, slack_exp: f64| {
        let mut e = m.exps.clone();
        e.push(slack_exp);
        Monomial::new(m.coeff, e)
    };
    let mut constraints: Vec<Posynomial> = gp
        .constraints
        .iter()
        .map(|c| Posynomial::new(c.terms.iter().map(|t| extend(t, -1.0)).collect()))
        .collect();
    constraints.push(Posynomial::new(vec![Monomial::sparse(n + 1, (-1.0f64).exp(), &[(n, -1.0)])]));
    let aux = GeometricProgram {
        vars: n + 1,
        objective: Posynomial::new(vec![Monomial::sparse(n + 1, 1.0, &[(n, 1.0)])]),
        constraints,
    };
    let mut y1 = y.to_vec();
    y1.push(worst.max(0.0) + 1.0);
    let barrier = Barrier {
        gp: &aux,
        stop_below_zero: Some(n),
    };
    match barrier.run(&y1, opts)? {
        Outcome::EarlyStop(mut y, used) => {
            y.pop();
            Ok((y, used))
        }
        Outcome::Converged(mut y, used, _) if y[n] < 0.0 => {
            y.pop();
            Ok((y, used))
        }
        Outcome::Converged(y, ..) => Err(Error::Infeasible(format!(
            "GP has no strictly feasible point (phase I optimum {:.3e})",
            y[n]
        ))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn mono(n: usize, c: f64, e: &[(usize, f64)]) -> Monomial {
        Monomial::sparse(n, c, e)
    }

    #[test]
    fn box_corner() {
        // minimize 1/(x y) over 0.1 <= x <= 2, 0.1 <= y <= 3
        let gp = GeometricProgram {
            vars: 2,
            objective: Posynomial::new(vec![mono(2, 1.0, &[(0, -1.0), (1, -1.0)])]),
            constraints: vec![
                Posynomial::new(vec![mono(2, 0.5, &[(0, 1.0)])]),
                Posynomial::new(vec![mono(2, 1.0 / 3.0, &[(1, 1.0)])]),
                Posynomial::new(vec![mono(2, 0.1, &[(0, -1.0)])]),
                Posynomial::new(vec![mono(2, 0.1, &[(1, -1.0)])]),
            ],
        };
        let s = solve_gp(&gp, &[1.0, 1.0], &GpOptions::default()).unwrap();
        assert!((s.x[0] - 2.0).abs() < 1e-6 && (s.x[1] - 3.0).abs() < 1e-6, "{:?}", s.x);
        assert!(s.max_constraint <= 1.0 + 1e-8);
    }

    #[test]
    fn budget_split() {
        // minimize 1/(x y) s.t. x + y <= 1, optimum x = y = 1/2
        let gp = GeometricProgram {
            vars: 2,
            objective: Posynomial::new(vec![mono(2, 1.0, &[(0, -1.0), (1, -1.0)])]),
            constraints: vec![Posynomial::new(vec![mono(2, 1.0, &[(0, 1.0)]), mono(2, 1.0, &[(1, 1.0)])])],
        };
        let s = solve_gp(&gp, &[0.1, 0.2], &GpOptions::default()).unwrap();
        assert!((s.x[0] - 0.5).abs() < 1e-6 && (s.x[1] - 0.5).abs() < 1e-6);
        assert!((s.objective - 4.0).abs() < 1e-5);
        assert!(s.stationarity < 1e-6);
        // Grid oracle.
        let mut best = f64::INFINITY;
        for i in 1..1000 {
            let x = i as f64 / 1000.0;
            best = best.min(1.0 / (x * (1.0 - x)));
        }
        assert!(s.objective <= best * (1.0 + 1e-6));
    }

    #[test]
    fn infeasible_start_uses_phase_one() {
        let gp = GeometricProgram {
            vars: 2,
            objective: Posynomial::new(vec![mono(2, 1.0, &[(0, -1.0), (1, -1.0)])]),
            constraints: vec![Posynomial::new(vec![mono(2, 1.0, &[(0, 1.0)]), mono(2, 1.0, &[(1, 1.0)])])],
        };
        let s = solve_gp(&gp, &[5.0, 5.0], &GpOptions::default()).unwrap();
        assert!((s.x[0] - 0.5).abs() < 1e-6);
    }

    #[test]
    fn infeasible_program() {
        // x <= 1 and 2 / x <= 1 cannot hold together
        let gp = GeometricProgram {
            vars: 1,
            objective: Posynomial::new(vec![mono(1, 1.0, &[(0, 1.0)])]),
            constraints: vec![
                Posynomial::new(vec![mono(1, 1.0, &[(0, 1.0)])]),
                Posynomial::new(vec![mono(1, 2.0, &[(0, -1.0)])]),
            ],
        };
        assert!(matches!(solve_gp(&gp, &[1.0], &GpOptions::default()), Err(Error::Infeasible(_))));
    }

    #[test]
    fn rejects_bad_input() {
        let gp = GeometricProgram {
            vars: 1,
            objective: Posynomial::new(vec![mono(1, 1.0, &[(0, 1.0)])]),
            constraints: vec![Posynomial::new(vec![mono(1, -1.0, &[(0, 1.0)])])],
        };
        assert!(solve_gp(&gp, &[1.0], &GpOptions::default()).is_err());
        assert!(solve_gp(&gp, &[1.0, 2.0], &GpOptions::default()).is_err());
    }
}
