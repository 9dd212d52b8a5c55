use nalgebra::DMatrix;
use rayon::prelude::*;

use crate::error::{Error, Result};

/// `sign(x) * max(|x| - t, 0)`
pub fn soft_threshold(x: f64, t: f64) -> f64 {
    if x > t {
        x - t
    } else if x < -t {
        x + t
    } else {
        0.0
    }
}

fn check_pair(w: &DMatrix<f64>, v: &DMatrix<f64>) -> Result<()> {
    if w.nrows() != v.nrows() {
        return Err(Error::Dimension(format!(
            "{} word rows vs {} visual rows",
            w.nrows(),
            v.nrows()
        )));
    }
    if w.nrows() == 0 || w.ncols() == 0 || v.ncols() == 0 {
        return Err(Error::Invalid("empty training matrices".into()));
    }
    if w.iter().chain(v.iter()).any(|x| !x.is_finite()) {
        return Err(Error::Invalid("non-finite training value".into()));
    }
    Ok(())
}

/// `M = (W^T W + lambda2 I)^-1 W^T V` for `lambda2 > 0`.
pub fn ridge_closed_form(w: &DMatrix<f64>, v: &DMatrix<f64>, lambda2: f64) -> Result<DMatrix<f64>> {
    check_pair(w, v)?;
    if lambda2.is_nan() || lambda2 <= 0.0 {
        return Err(Error::Invalid(format!("ridge needs lambda2 > 0, got {lambda2}")));
    }
    let mut system = w.transpose() * w;
    for j in 0..system.nrows() {
        system[(j, j)] += lambda2;
    }
    let rhs = w.transpose() * v;
    let chol = system
        .cholesky()
        .ok_or_else(|| Error::Singular("ridge normal equations are not positive definite".into()))?;
    Ok(chol.solve(&rhs))
}

/// Least-squares `M` minimizing `||W M - V||_F`; for rank-deficient `W` the
/// minimum-norm solution, or an error when `allow_rank_deficient` is false.
pub fn least_squares_min_norm(
    w: &DMatrix<f64>,
    v: &DMatrix<f64>,
    allow_rank_deficient: bool,
) -> Result<DMatrix<f64>> {
    check_pair(w, v)?;
    let svd = w.clone().svd(true, true);
    let s_max = svd.singular_values.max();
    let eps = w.nrows().max(w.ncols()) as f64 * f64::EPSILON * s_max;
    let rank = svd.singular_values.iter().filter(|&&s| s > eps).count();
    if rank < w.ncols() && !allow_rank_deficient {
        return Err(Error::Singular(format!(
            "W^T W has rank {rank} < {} and the minimum-norm fallback is disabled",
            w.ncols()
        )));
    }
    svd.solve(v, eps).map_err(|e| Error::Singular(e.to_string()))
}

/// Cyclic coordinate descent on the elastic-net objective, one independent
/// problem per output column.
///
/// Works on the covariance form: with `G = W^T W` and `C = W^T V`, the update
/// of coefficient `(j, k)` is
/// `m_jk <- soft(C_jk - sum_{l != j} G_jl m_lk, lambda1) / (G_jj + lambda2)`.
/// Columns advance in lock-step, one full sweep per [`sweep`](Self::sweep)
/// call, and a column stops once its largest coefficient change in a sweep
/// is within tolerance. Each column's arithmetic is sequential, so results
/// do not depend on the thread schedule.
pub struct CoordinateDescent {
    gram: DMatrix<f64>,
    cross: DMatrix<f64>,
    target_energy: Vec<f64>,
    coef: DMatrix<f64>,
    lambda1: f64,
    lambda2: f64,
    active: Vec<bool>,
    sweeps: usize,
}

#[derive(Clone, Debug)]
pub struct CdOutcome {
    pub coefficients: DMatrix<f64>,
    pub sweeps: usize,
    pub converged: bool,
    /// Objective after each sweep.
    pub trace: Vec<f64>,
}

impl CoordinateDescent {
    pub fn new(w: &DMatrix<f64>, v: &DMatrix<f64>, lambda1: f64, lambda2: f64) -> Result<Self> {
        check_pair(w, v)?;
        if !(lambda1 >= 0.0 && lambda2 >= 0.0) || !lambda1.is_finite() || !lambda2.is_finite() {
            return Err(Error::Invalid(format!(
                "penalties must be finite and non-negative, got {lambda1}, {lambda2}"
            )));
        }
        let gram = w.transpose() * w;
        let cross = w.transpose() * v;
        let target_energy = v.column_iter().map(|c| c.norm_squared()).collect();
        Ok(CoordinateDescent {
            coef: DMatrix::zeros(w.ncols(), v.ncols()),
            active: vec![true; v.ncols()],
            gram,
            cross,
            target_energy,
            lambda1,
            lambda2,
            sweeps: 0,
        })
    }

    pub fn coefficients(&self) -> &DMatrix<f64> {
        &self.coef
    }

    pub fn sweeps(&self) -> usize {
        self.sweeps
    }

    pub fn is_converged(&self) -> bool {
        self.active.iter().all(|a| !a)
    }

    /// One pass over every coefficient of every still-active column. Returns
    /// the largest absolute coefficient change.
    pub fn sweep(&mut self, tol: f64) -> f64 {
        let d1 = self.gram.nrows();
        let gram = &self.gram;
        let cross = &self.cross;
        let (l1, l2) = (self.lambda1, self.lambda2);
        let max_delta = self
            .coef
            .as_mut_slice()
            .par_chunks_mut(d1)
            .zip(self.active.par_iter_mut())
            .enumerate()
            .map(|(k, (m, active))| {
                if !*active {
                    return 0.0;
                }
                let mut delta = 0.0f64;
                for j in 0..d1 {
                    let g = gram.column(j);
                    let fitted: f64 = g.iter().zip(m.iter()).map(|(a, b)| a * b).sum();
                    let gjj = g[j];
                    let rho = cross[(j, k)] - fitted + gjj * m[j];
                    let denom = gjj + l2;
                    let new = if denom > 0.0 {
                        soft_threshold(rho, l1) / denom
                    } else {
                        0.0
                    };
                    delta = delta.max((new - m[j]).abs());
                    m[j] = new;
                }
                if delta <= tol {
                    *active = false;
                }
                delta
            })
            .reduce(|| 0.0, f64::max);
        self.sweeps += 1;
        max_delta
    }

    /// Objective of the current coefficients, from the covariance form.
    pub fn objective(&self) -> f64 {
        self.coef
            .column_iter()
            .enumerate()
            .map(|(k, m)| {
                let gm = &self.gram * m;
                let quad = m.dot(&gm) - 2.0 * m.dot(&self.cross.column(k)) + self.target_energy[k];
                let l1: f64 = m.iter().map(|x| x.abs()).sum();
                0.5 * quad.max(0.0) + self.lambda1 * l1 + 0.5 * self.lambda2 * m.norm_squared()
            })
            .sum()
    }

    pub fn solve(mut self, tol: f64, max_sweeps: usize) -> CdOutcome {
        let mut trace = Vec::new();
        while self.sweeps < max_sweeps && !self.is_converged() {
            self.sweep(tol);
            trace.push(self.objective());
        }
        CdOutcome {
            converged: self.is_converged(),
            sweeps: self.sweeps,
            coefficients: self.coef,
            trace,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::crossmodal::objective;
    use crate::rng;

    fn gaussian(r: &mut rng::SplitMix64, n: usize, m: usize) -> DMatrix<f64> {
        DMatrix::from_vec(n, m, rng::gaussian_vec(r, n * m))
    }

    #[test]
    fn soft_threshold_cases() {
        assert_eq!(soft_threshold(1.0, 0.4), 0.6);
        assert_eq!(soft_threshold(-1.0, 0.4), -0.6);
        assert_eq!(soft_threshold(0.4, 0.4), 0.0);
    }

    #[test]
    fn ridge_identity() {
        let i = DMatrix::<f64>::identity(2, 2);
        let m = ridge_closed_form(&i, &i, 1.0).unwrap();
        assert!((m - DMatrix::identity(2, 2) * 0.5).norm() < 1e-15);
    }

    #[test]
    fn one_dimensional_lasso() {
        let one = DMatrix::from_element(1, 1, 1.0);
        let out = CoordinateDescent::new(&one, &one, 0.4, 0.0).unwrap().solve(1e-12, 100);
        assert!((out.coefficients[(0, 0)] - 0.6).abs() < 1e-15);
        assert!(out.converged);
    }

    #[test]
    fn min_norm_on_wide_system() {
        // One equation, two unknowns: x + y = 2 -> minimum norm (1, 1).
        let w = DMatrix::from_row_slice(1, 2, &[1.0, 1.0]);
        let v = DMatrix::from_element(1, 1, 2.0);
        let m = least_squares_min_norm(&w, &v, true).unwrap();
        assert!((m[(0, 0)] - 1.0).abs() < 1e-12 && (m[(1, 0)] - 1.0).abs() < 1e-12);
        assert!(matches!(least_squares_min_norm(&w, &v, false), Err(Error::Singular(_))));
    }

    #[test]
    fn covariance_objective_agrees_with_residual_form() {
        let mut r = rng::seeded(11);
        let w = gaussian(&mut r, 12, 5);
        let v = gaussian(&mut r, 12, 3);
        let mut cd = CoordinateDescent::new(&w, &v, 0.2, 0.3).unwrap();
        for _ in 0..3 {
            cd.sweep(0.0);
            let direct = objective(cd.coefficients(), &w, &v, 0.2, 0.3).unwrap();
            assert!((cd.objective() - direct).abs() <= 1e-10 * direct);
        }
    }

    #[test]
    fn lasso_kill_condition() {
        let mut r = rng::seeded(3);
        let w = gaussian(&mut r, 10, 4);
        let v = gaussian(&mut r, 10, 2);
        let max_corr = (w.transpose() * &v).amax();
        let out = CoordinateDescent::new(&w, &v, max_corr, 0.0).unwrap().solve(1e-10, 100);
        assert!(out.coefficients.iter().all(|&x| x == 0.0));
    }

    #[test]
    fn zero_column_gets_zero_coefficient() {
        let w = DMatrix::from_row_slice(3, 2, &[1.0, 0.0, 2.0, 0.0, 3.0, 0.0]);
        let v = DMatrix::from_row_slice(3, 1, &[1.0, 2.0, 3.0]);
        let out = CoordinateDescent::new(&w, &v, 0.1, 0.0).unwrap().solve(1e-12, 100);
        assert_eq!(out.coefficients[(1, 0)], 0.0);
    }
}
