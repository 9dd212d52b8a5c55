use nalgebra::DMatrix;
use rand::seq::SliceRandom;

use super::fit::{fit_mapping, FitOptions};
use super::model::Variant;
use crate::error::{Error, Result};
use crate::rng;

/// Outcome of a k-fold grid search over `(lambda1, lambda2)`.
#[derive(Clone, Debug, PartialEq)]
pub struct CvReport {
    pub grid: Vec<(f64, f64)>,
    /// `fold_errors[g][f]`: mean squared validation error of grid point `g`
    /// on fold `f`.
    pub fold_errors: Vec<Vec<f64>>,
    pub chosen: (f64, f64),
}

impl CvReport {
    pub fn mean_errors(&self) -> Vec<f64> {
        self.fold_errors
            .iter()
            .map(|f| f.iter().sum::<f64>() / f.len() as f64)
            .collect()
    }

    /// CSV with header `lambda1,lambda2,mean_mse,chosen,fold0,...`.
    pub fn to_csv(&self) -> String {
        let k = self.fold_errors.first().map_or(0, Vec::len);
        let mut out = String::from("lambda1,lambda2,mean_mse,chosen");
        for f in 0..k {
            out.push_str(&format!(",fold{f}"));
        }
        out.push('\n');
        for ((&(l1, l2), folds), mean) in self.grid.iter().zip(&self.fold_errors).zip(self.mean_errors()) {
            let chosen = (l1, l2) == self.chosen;
            out.push_str(&format!("{l1},{l2},{mean},{}", u8::from(chosen)));
            for e in folds {
                out.push_str(&format!(",{e}"));
            }
            out.push('\n');
        }
        out
    }
}

/// Fold index per row: rows are shuffled with the seed and dealt
/// round-robin into `k` folds.
pub fn assign_folds(n: usize, k: usize, seed: u64) -> Vec<usize> {
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut rng::stream(seed, rng::purpose::CV_FOLDS));
    let mut fold = vec![0; n];
    for (pos, &row) in order.iter().enumerate() {
        fold[row] = pos % k;
    }
    fold
}

/// Picks the grid point with the lowest mean validation error; ties go to the
/// larger `lambda1 + lambda2`.
pub fn cross_validate(
    w: &DMatrix<f64>,
    v: &DMatrix<f64>,
    variant: Variant,
    grid: &[(f64, f64)],
    k: usize,
    seed: u64,
    opts: &FitOptions,
) -> Result<CvReport> {
    let n = w.nrows();
    if k < 2 {
        return Err(Error::Invalid(format!("need at least 2 folds, got {k}")));
    }
    if n < k {
        return Err(Error::Invalid(format!("{n} rows cannot fill {k} folds")));
    }
    if grid.is_empty() {
        return Err(Error::Invalid("empty hyperparameter grid".into()));
    }
    for &(l1, l2) in grid {
        variant.check_lambdas(l1, l2)?;
    }
    if v.nrows() != n {
        return Err(Error::Dimension(format!("{n} word rows vs {} visual rows", v.nrows())));
    }

    let folds = assign_folds(n, k, seed);
    let mut fold_errors = vec![Vec::with_capacity(k); grid.len()];
    for f in 0..k {
        let train: Vec<usize> = (0..n).filter(|&i| folds[i] != f).collect();
        let held: Vec<usize> = (0..n).filter(|&i| folds[i] == f).collect();
        let (wt, vt) = (w.select_rows(&train), v.select_rows(&train));
        let (wh, vh) = (w.select_rows(&held), v.select_rows(&held));
        for (g, &(l1, l2)) in grid.iter().enumerate() {
            let model = fit_mapping(&wt, &vt, variant, l1, l2, opts)?;
            let mut pred = &wh * model.weights();
            if let Some(o) = model.offset() {
                for mut row in pred.row_iter_mut() {
                    for (x, b) in row.iter_mut().zip(o) {
                        *x += b;
                    }
                }
            }
            let mse = (pred - &vh).norm_squared() / (vh.nrows() * vh.ncols()) as f64;
            fold_errors[g].push(mse);
        }
    }

    let mut report = CvReport {
        grid: grid.to_vec(),
        fold_errors,
        chosen: grid[0],
    };
    let means = report.mean_errors();
    let mut best = 0;
    for g in 1..grid.len() {
        let strength = |i: usize| grid[i].0 + grid[i].1;
        if means[g] < means[best] || (means[g] == means[best] && strength(g) > strength(best)) {
            best = g;
        }
    }
    report.chosen = grid[best];
    Ok(report)
}
