use nalgebra::DMatrix;

use super::model::{MappingModel, TrainMeta, Variant};
use super::objective::objective;
use super::solve::{least_squares_min_norm, ridge_closed_form, CoordinateDescent};
use crate::corpus::VectorTable;
use crate::error::{Error, Result};
use crate::provenance::SeenLabels;

#[derive(Clone, Debug)]
pub struct FitOptions {
    /// Coordinate-descent stop: largest coefficient change in a sweep.
    pub tol: f64,
    /// Coordinate-descent sweep limit. Hitting it is not an error; the model
    /// records `converged = false`.
    pub max_iters: usize,
    /// Standardize word-space columns (zero mean, unit variance) before the
    /// fit and fold the transform back into the model.
    pub standardize: bool,
    /// Use the minimum-norm solution for rank-deficient plain regression
    /// instead of failing.
    pub min_norm_fallback: bool,
}

impl Default for FitOptions {
    fn default() -> Self {
        FitOptions {
            tol: 1e-8,
            max_iters: 10_000,
            standardize: false,
            min_norm_fallback: true,
        }
    }
}

struct Standardization {
    means: Vec<f64>,
    scales: Vec<f64>,
}

fn standardize(w: &DMatrix<f64>) -> (DMatrix<f64>, Standardization) {
    let n = w.nrows() as f64;
    let mut out = w.clone();
    let mut means = Vec::with_capacity(w.ncols());
    let mut scales = Vec::with_capacity(w.ncols());
    for (j, mut col) in out.column_iter_mut().enumerate() {
        let mean = w.column(j).sum() / n;
        let var = w.column(j).iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / n;
        let scale = if var > 0.0 { var.sqrt() } else { 1.0 };
        for x in col.iter_mut() {
            *x = (*x - mean) / scale;
        }
        means.push(mean);
        scales.push(scale);
    }
    (out, Standardization { means, scales })
}

/// Fits `M` on row-aligned `W` (`n x d1`) and `V` (`n x d2`).
pub fn fit_mapping(
    w: &DMatrix<f64>,
    v: &DMatrix<f64>,
    variant: Variant,
    lambda1: f64,
    lambda2: f64,
    opts: &FitOptions,
) -> Result<MappingModel> {
    variant.check_lambdas(lambda1, lambda2)?;
    if opts.tol.is_nan() || opts.tol <= 0.0 {
        return Err(Error::Invalid(format!("tolerance must be positive, got {}", opts.tol)));
    }
    let (design, transform) = if opts.standardize {
        let (d, t) = standardize(w);
        (d, Some(t))
    } else {
        (w.clone(), None)
    };

    let (coef, iterations, converged) = match variant {
        Variant::Plain => (least_squares_min_norm(&design, v, opts.min_norm_fallback)?, 0, true),
        Variant::Ridge => (ridge_closed_form(&design, v, lambda2)?, 0, true),
        Variant::Lasso | Variant::SymElastic => {
            let out = CoordinateDescent::new(&design, v, lambda1, lambda2)?.solve(opts.tol, opts.max_iters);
            if !out.converged {
                log::warn!(
                    "coordinate descent stopped after {} sweeps without reaching tol {}",
                    out.sweeps,
                    opts.tol
                );
            }
            (out.coefficients, out.sweeps, out.converged)
        }
    };
    let final_objective = objective(&coef, &design, v, lambda1, lambda2)?;
    let meta = TrainMeta {
        n_train: w.nrows(),
        final_objective,
        iterations,
        converged,
        seen: SeenLabels::default(),
    };

    let (weights, offset) = match transform {
        None => (coef, None),
        Some(t) => {
            let mut weights = coef;
            let mut offset = vec![0.0; weights.ncols()];
            for j in 0..weights.nrows() {
                let shift = t.means[j] / t.scales[j];
                for k in 0..weights.ncols() {
                    offset[k] -= shift * weights[(j, k)];
                    weights[(j, k)] /= t.scales[j];
                }
            }
            (weights, Some(offset))
        }
    };
    MappingModel::new(weights, offset, variant, lambda1, lambda2, meta)
}

/// Label intersection of a word table and a visual table.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Alignment {
    /// Shared labels, in word-table order.
    pub labels: Vec<String>,
    pub dropped_words: Vec<String>,
    pub dropped_visual: Vec<String>,
}

/// Row-aligned `(W, V)` over the labels both tables contain.
pub fn align_tables(
    words: &VectorTable,
    visual: &VectorTable,
) -> Result<(Alignment, DMatrix<f64>, DMatrix<f64>)> {
    let (labels, dropped_words): (Vec<String>, Vec<String>) = words
        .labels()
        .iter()
        .cloned()
        .partition(|l| visual.contains(l));
    let dropped_visual = visual
        .labels()
        .iter()
        .filter(|l| !words.contains(l))
        .cloned()
        .collect();
    if labels.is_empty() {
        return Err(Error::Invalid(
            "word and visual tables share no labels".into(),
        ));
    }
    let w = words.subset(&labels)?.to_matrix();
    let v = visual.subset(&labels)?.to_matrix();
    Ok((
        Alignment {
            labels,
            dropped_words,
            dropped_visual,
        },
        w,
        v,
    ))
}

/// Aligns the tables, fits, and records the training labels in the model.
pub fn fit_tables(
    words: &VectorTable,
    visual: &VectorTable,
    variant: Variant,
    lambda1: f64,
    lambda2: f64,
    opts: &FitOptions,
) -> Result<(MappingModel, Alignment)> {
    let (alignment, w, v) = align_tables(words, visual)?;
    let model = fit_mapping(&w, &v, variant, lambda1, lambda2, opts)?
        .with_seen(SeenLabels::from_labels(&alignment.labels));
    Ok((model, alignment))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng;

    fn gaussian(r: &mut rng::SplitMix64, n: usize, m: usize) -> DMatrix<f64> {
        DMatrix::from_vec(n, m, rng::gaussian_vec(r, n * m))
    }

    fn rel(a: &DMatrix<f64>, b: &DMatrix<f64>) -> f64 {
        (a - b).norm() / b.norm().max(f64::MIN_POSITIVE)
    }

    #[test]
    fn ridge_on_identity() {
        let i = DMatrix::<f64>::identity(2, 2);
        let m = fit_mapping(&i, &i, Variant::Ridge, 0.0, 1.0, &FitOptions::default()).unwrap();
        assert!((m.weights() - DMatrix::identity(2, 2) * 0.5).amax() < 1e-15);
    }

    #[test]
    fn lasso_scalar() {
        let one = DMatrix::from_element(1, 1, 1.0);
        let m = fit_mapping(&one, &one, Variant::Lasso, 0.4, 0.0, &FitOptions::default()).unwrap();
        assert!((m.weights()[(0, 0)] - 0.6).abs() < 1e-15);
    }

    #[test]
    fn plain_interpolates_when_underdetermined() {
        let mut r = rng::seeded(21);
        let w = gaussian(&mut r, 4, 6);
        let v = gaussian(&mut r, 4, 3);
        let m = fit_mapping(&w, &v, Variant::Plain, 0.0, 0.0, &FitOptions::default()).unwrap();
        for i in 0..4 {
            let row: Vec<f64> = w.row(i).iter().copied().collect();
            let p = m.predict(&row).unwrap();
            for k in 0..3 {
                assert!((p[k] - v[(i, k)]).abs() < 1e-6);
            }
        }
    }

    #[test]
    fn rejects_inconsistent_lambdas_and_nan() {
        let i = DMatrix::<f64>::identity(2, 2);
        assert!(fit_mapping(&i, &i, Variant::Ridge, 0.1, 0.1, &FitOptions::default()).is_err());
        let mut bad = i.clone();
        bad[(0, 0)] = f64::NAN;
        assert!(fit_mapping(&bad, &i, Variant::Plain, 0.0, 0.0, &FitOptions::default()).is_err());
    }

    #[test]
    fn sweep_limit_is_flagged_not_fatal() {
        let mut r = rng::seeded(2);
        let w = gaussian(&mut r, 20, 8);
        let v = gaussian(&mut r, 20, 2);
        let opts = FitOptions { tol: 1e-15, max_iters: 2, ..FitOptions::default() };
        let m = fit_mapping(&w, &v, Variant::Lasso, 0.01, 0.0, &opts).unwrap();
        assert!(!m.meta().converged);
        assert_eq!(m.meta().iterations, 2);
    }

    #[test]
    fn standardization_is_folded_into_predict() {
        let mut r = rng::seeded(8);
        let mut w = gaussian(&mut r, 30, 4);
        for i in 0..30 {
            w[(i, 0)] = 5.0 + 10.0 * w[(i, 0)];
        }
        let v = gaussian(&mut r, 30, 2);
        let opts = FitOptions { standardize: true, ..FitOptions::default() };
        let m = fit_mapping(&w, &v, Variant::Ridge, 0.0, 0.5, &opts).unwrap();
        assert!(m.offset().is_some());
        // Same prediction as fitting on explicitly standardized inputs.
        let (ws, t) = standardize(&w);
        let plain = fit_mapping(&ws, &v, Variant::Ridge, 0.0, 0.5, &FitOptions::default()).unwrap();
        let row: Vec<f64> = w.row(3).iter().copied().collect();
        let row_s: Vec<f64> = row.iter().enumerate().map(|(j, x)| (x - t.means[j]) / t.scales[j]).collect();
        let (a, b) = (m.predict(&row).unwrap(), plain.predict(&row_s).unwrap());
        for k in 0..2 {
            assert!((a[k] - b[k]).abs() < 1e-12);
        }
    }

    #[test]
    fn row_permutation_invariance() {
        let mut r = rng::seeded(4);
        let w = gaussian(&mut r, 25, 5);
        let v = gaussian(&mut r, 25, 3);
        let perm: Vec<usize> = (0..25).rev().collect();
        let wp = w.select_rows(&perm);
        let vp = v.select_rows(&perm);
        let opts = FitOptions { tol: 1e-12, ..FitOptions::default() };
        for variant in Variant::ALL {
            let (l1, l2) = variant.lambdas(0.3);
            let a = fit_mapping(&w, &v, variant, l1, l2, &opts).unwrap();
            let b = fit_mapping(&wp, &vp, variant, l1, l2, &opts).unwrap();
            assert!(rel(a.weights(), b.weights()) < 1e-9, "{variant}");
        }
    }

    #[test]
    fn table_alignment() {
        let words = VectorTable::new(
            vec!["a".into(), "b".into(), "c".into()],
            vec![vec![1.0], vec![2.0], vec![3.0]],
        )
        .unwrap();
        let visual = VectorTable::new(vec!["c".into(), "a".into(), "z".into()], vec![vec![3.0], vec![1.0], vec![9.0]]).unwrap();
        let (al, w, v) = align_tables(&words, &visual).unwrap();
        assert_eq!(al.labels, ["a", "c"]);
        assert_eq!(al.dropped_words, ["b"]);
        assert_eq!(al.dropped_visual, ["z"]);
        assert_eq!(w, v);
        let (m, _) = fit_tables(&words, &visual, Variant::Plain, 0.0, 0.0, &FitOptions::default()).unwrap();
        assert!(m.meta().seen.contains("a") && !m.meta().seen.contains("b"));

        let other = VectorTable::new(vec!["q".into()], vec![vec![1.0]]).unwrap();
        assert!(align_tables(&words, &other).is_err());
    }
}
