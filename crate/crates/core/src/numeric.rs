//! Floating-point refinement for sampled probes. Exact identities never go through here.

use nalgebra::{DMatrix, DVector};

use crate::poly::{to_f64, Polynomial};

/// A polynomial with `f64` coefficients and sparse exponents, for fast evaluation.
#[derive(Debug, Clone)]
pub struct F64Poly {
    terms: Vec<(f64, Vec<(usize, i32)>)>,
}

impl F64Poly {
    pub fn new(p: &Polynomial) -> Self {
        let terms = p
            .terms()
            .map(|(m, c)| {
                let e = m.exponents().iter().enumerate().filter(|(_, &k)| k > 0).map(|(i, &k)| (i, k as i32));
                (to_f64(c), e.collect())
            })
            .collect();
        F64Poly { terms }
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        self.terms
            .iter()
            .map(|(c, e)| e.iter().fold(*c, |acc, &(i, k)| acc * x[i].powi(k)))
            .sum()
    }
}

/// A square-or-overdetermined polynomial system with its symbolic Jacobian.
#[derive(Debug, Clone)]
pub struct PolySystem {
    polys: Vec<Polynomial>,
    fast: Vec<F64Poly>,
    jac: Vec<Vec<F64Poly>>,
}

/// Residual vector and Jacobian columns, as needed by the solvers below.
pub trait Residuals {
    fn residual(&self, x: &[f64]) -> DVector<f64>;
    fn jacobian(&self, x: &[f64], free: &[usize]) -> DMatrix<f64>;
}

impl Residuals for PolySystem {
    fn residual(&self, x: &[f64]) -> DVector<f64> {
        PolySystem::residual(self, x)
    }

    fn jacobian(&self, x: &[f64], free: &[usize]) -> DMatrix<f64> {
        PolySystem::jacobian(self, x, free)
    }
}

/// Gradient rows of a polynomial map, evaluated numerically.
#[derive(Debug, Clone)]
pub struct GradientRows {
    rows: Vec<Vec<F64Poly>>,
}

impl GradientRows {
    pub fn new(polys: &[Polynomial]) -> Self {
        GradientRows { rows: polys.iter().map(|p| p.gradient().iter().map(F64Poly::new).collect()).collect() }
    }

    pub fn eval(&self, x: &[f64]) -> DMatrix<f64> {
        let cols = self.rows.first().map_or(0, Vec::len);
        DMatrix::from_fn(self.rows.len(), cols, |i, j| self.rows[i][j].eval(x))
    }

    /// `σ_min / σ_max` of the evaluated matrix (0 for the zero matrix).
    pub fn conditioning(&self, x: &[f64]) -> f64 {
        let sv = self.eval(x).singular_values();
        let max = sv.max();
        if max == 0.0 {
            0.0
        } else {
            sv.min() / max
        }
    }
}

impl PolySystem {
    pub fn new(polys: Vec<Polynomial>) -> Self {
        let fast = polys.iter().map(F64Poly::new).collect();
        let jac = polys.iter().map(|p| p.gradient().iter().map(F64Poly::new).collect()).collect();
        PolySystem { polys, fast, jac }
    }

    pub fn polys(&self) -> &[Polynomial] {
        &self.polys
    }

    pub fn residual(&self, x: &[f64]) -> DVector<f64> {
        DVector::from_iterator(self.fast.len(), self.fast.iter().map(|p| p.eval(x)))
    }

    /// Jacobian restricted to the columns in `free`.
    pub fn jacobian(&self, x: &[f64], free: &[usize]) -> DMatrix<f64> {
        DMatrix::from_fn(self.polys.len(), free.len(), |i, j| self.jac[i][free[j]].eval(x))
    }

    /// Largest [`scaled_residual`] over the system.
    pub fn scaled_residual(&self, x: &[f64]) -> f64 {
        self.polys.iter().map(|p| scaled_residual(p, x)).fold(0.0, f64::max)
    }
}

/// `|p(x)| / Σ|c·xᵃ|`: the residual relative to the size of the terms that cancel.
pub fn scaled_residual(p: &Polynomial, x: &[f64]) -> f64 {
    let mut sum = 0.0;
    let mut abs = 0.0;
    for (m, c) in p.terms() {
        let mut t = to_f64(c);
        for (xi, &e) in x.iter().zip(m.exponents()) {
            t *= xi.powi(e as i32);
        }
        sum += t;
        abs += t.abs();
    }
    if abs == 0.0 {
        0.0
    } else {
        sum.abs() / abs
    }
}

#[derive(Debug, Clone, Copy)]
pub struct SolveOptions {
    pub max_iter: usize,
    /// Stop once the step is below `step_tol·(1 + ‖x‖)`.
    pub step_tol: f64,
}

impl Default for SolveOptions {
    fn default() -> Self {
        SolveOptions { max_iter: 200, step_tol: 1e-15 }
    }
}

#[derive(Debug, Clone)]
pub struct Solve {
    pub x: Vec<f64>,
    pub residual_norm: f64,
    pub iterations: usize,
}

/// Levenberg–Marquardt on `‖r(x)‖²`, moving only the coordinates in `free`.
pub fn levenberg_marquardt<S: Residuals + ?Sized>(sys: &S, x0: &[f64], free: &[usize], opts: SolveOptions) -> Solve {
    let mut x = x0.to_vec();
    let mut r = sys.residual(&x);
    let mut cost = r.norm_squared();
    let mut mu = 1e-3;
    let mut it = 0;
    while it < opts.max_iter && cost > 0.0 {
        it += 1;
        let j = sys.jacobian(&x, free);
        let jt = j.transpose();
        let jtj = &jt * &j;
        let g = &jt * &r;
        let mut accepted = false;
        for _ in 0..30 {
            let mut a = jtj.clone();
            for k in 0..free.len() {
                a[(k, k)] += mu * (1.0 + jtj[(k, k)]);
            }
            let Some(step) = a.lu().solve(&(-&g)) else {
                mu *= 10.0;
                continue;
            };
            let mut trial = x.clone();
            for (k, &i) in free.iter().enumerate() {
                trial[i] += step[k];
            }
            let rt = sys.residual(&trial);
            let ct = rt.norm_squared();
            if ct.is_finite() && ct < cost {
                let small = step.norm() <= opts.step_tol * (1.0 + norm(&x));
                x = trial;
                r = rt;
                cost = ct;
                mu = (mu / 3.0).max(1e-12);
                accepted = true;
                if small {
                    return Solve { x, residual_norm: cost.sqrt(), iterations: it };
                }
                break;
            }
            mu *= 4.0;
        }
        if !accepted {
            break;
        }
    }
    Solve { x, residual_norm: cost.sqrt(), iterations: it }
}

/// Gauss–Newton with minimum-norm steps: from `x0`, walks to a nearby zero of the
/// system. On a smooth zero set the limit is close to the orthogonal projection.
pub fn gauss_newton_project<S: Residuals + ?Sized>(sys: &S, x0: &[f64], opts: SolveOptions) -> Solve {
    let m = x0.len();
    let free: Vec<usize> = (0..m).collect();
    let mut x = x0.to_vec();
    let mut it = 0;
    while it < opts.max_iter {
        it += 1;
        let r = sys.residual(&x);
        if r.norm() == 0.0 {
            break;
        }
        let j = sys.jacobian(&x, &free);
        let svd = j.svd(true, true);
        let Ok(step) = svd.solve(&r, 1e-14) else { break };
        for i in 0..m {
            x[i] -= step[i];
        }
        if step.norm() <= opts.step_tol * (1.0 + norm(&x)) {
            break;
        }
    }
    let residual_norm = sys.residual(&x).norm();
    Solve { x, residual_norm, iterations: it }
}

pub fn norm(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum::<f64>().sqrt()
}

pub fn distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(p, q)| (p - q) * (p - q)).sum::<f64>().sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dsl::parse_polynomial;
    use crate::poly::VarContext;

    #[test]
    fn projects_onto_circle() {
        let ctx = VarContext::new(&["x", "y"]).unwrap();
        let sys = PolySystem::new(vec![parse_polynomial("x^2 + y^2 - 1", &ctx).unwrap()]);
        let s = gauss_newton_project(&sys, &[2.0, 0.0], SolveOptions::default());
        assert!((s.x[0] - 1.0).abs() < 1e-12 && s.x[1].abs() < 1e-12);
        let s = levenberg_marquardt(&sys, &[0.3, 0.5], &[0], SolveOptions::default());
        assert!((s.x[0] - 0.75f64.sqrt()).abs() < 1e-10, "{:?}", s.x);
        assert_eq!(s.x[1], 0.5);
    }

    #[test]
    fn double_root_still_converges() {
        let ctx = VarContext::new(&["v"]).unwrap();
        let sys = PolySystem::new(vec![parse_polynomial("v^2", &ctx).unwrap()]);
        let s = gauss_newton_project(&sys, &[1e-3], SolveOptions::default());
        assert!(s.x[0].abs() < 1e-12);
    }

    #[test]
    fn scaled() {
        let ctx = VarContext::new(&["x", "y"]).unwrap();
        let p = parse_polynomial("x^2 - y^2", &ctx).unwrap();
        assert_eq!(scaled_residual(&p, &[1e-5, 1e-5]), 0.0);
        assert!((scaled_residual(&p, &[1.0, 0.0]) - 1.0).abs() < 1e-15);
    }
}
