use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

/// Allowed deviation of a dictionary column norm from 1.
pub const UNIT_NORM_TOLERANCE: f64 = 1e-9;

/// Pursuit stops once the residual norm is at or below this value.
const RESIDUAL_FLOOR: f64 = 1e-12;

/// Pursuit also stops when no remaining atom correlates with the residual
/// beyond this fraction of the residual norm (the residual is orthogonal to
/// the dictionary's span).
const STALL_RATIO: f64 = 1e-10;

/// Sparse coefficient vector: `support` strictly increasing, `values`
/// matching.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct SparseCode {
    pub support: Vec<usize>,
    pub values: Vec<f64>,
}

impl SparseCode {
    pub fn nnz(&self) -> usize {
        self.support.len()
    }

    pub fn dense(&self, len: usize) -> Vec<f64> {
        let mut out = vec![0.0; len];
        for (&i, &v) in self.support.iter().zip(&self.values) {
            out[i] = v;
        }
        out
    }

    /// `dict * code`
    pub fn reconstruct(&self, dict: &DMatrix<f64>) -> DVector<f64> {
        let mut out = DVector::zeros(dict.nrows());
        for (&i, &v) in self.support.iter().zip(&self.values) {
            out.axpy(v, &dict.column(i), 1.0);
        }
        out
    }
}

/// A pursuit run with its selection history.
#[derive(Clone, Debug, PartialEq)]
pub struct OmpTrace {
    pub code: SparseCode,
    /// Atoms in the order they were selected.
    pub order: Vec<usize>,
    /// Residual norm before the first selection and after each one.
    pub residual_norms: Vec<f64>,
}

fn check_unit_columns(dict: &DMatrix<f64>) -> Result<()> {
    for (j, col) in dict.column_iter().enumerate() {
        let n = col.norm();
        if (n - 1.0).abs() > UNIT_NORM_TOLERANCE {
            return Err(Error::Invalid(format!(
                "dictionary column {j} has norm {n}, expected 1"
            )));
        }
    }
    Ok(())
}

/// Orthogonal matching pursuit of `y` over the unit-norm columns of `dict`
/// with at most `sparsity` atoms.
pub fn omp(y: &[f64], dict: &DMatrix<f64>, sparsity: usize) -> Result<SparseCode> {
    omp_traced(y, dict, sparsity).map(|t| t.code)
}

pub fn omp_traced(y: &[f64], dict: &DMatrix<f64>, sparsity: usize) -> Result<OmpTrace> {
    if y.len() != dict.nrows() {
        return Err(Error::Dimension(format!(
            "signal of length {} for a dictionary with {} rows",
            y.len(),
            dict.nrows()
        )));
    }
    if sparsity > dict.ncols() {
        return Err(Error::Invalid(format!(
            "sparsity {sparsity} exceeds the {} dictionary atoms",
            dict.ncols()
        )));
    }
    check_unit_columns(dict)?;
    Ok(pursue(dict, &DVector::from_column_slice(y), sparsity))
}

/// Least-squares coefficients of `y` on the selected columns.
fn refit(dict: &DMatrix<f64>, selected: &[usize], y: &DVector<f64>) -> DVector<f64> {
    let sub = dict.select_columns(selected);
    let svd = sub.svd(true, true);
    let eps = selected.len().max(dict.nrows()) as f64 * f64::EPSILON * svd.singular_values.max();
    svd.solve(y, eps)
        .expect("both singular vector sets were computed")
}

/// Greedy pursuit without input validation. Columns with zero norm are
/// never selected.
pub(crate) fn pursue(dict: &DMatrix<f64>, y: &DVector<f64>, sparsity: usize) -> OmpTrace {
    let mut residual = y.clone();
    let mut norm = residual.norm();
    let mut residual_norms = vec![norm];
    let mut order: Vec<usize> = Vec::with_capacity(sparsity);
    let mut coefs = DVector::zeros(0);
    while order.len() < sparsity && norm > RESIDUAL_FLOOR {
        let corr = dict.tr_mul(&residual);
        let mut best: Option<(usize, f64)> = None;
        for (j, c) in corr.iter().enumerate() {
            if order.contains(&j) {
                continue;
            }
            let a = c.abs();
            if best.is_none_or(|(_, b)| a > b) {
                best = Some((j, a));
            }
        }
        let Some((j, a)) = best else { break };
        if a <= STALL_RATIO * norm {
            break;
        }
        order.push(j);
        coefs = refit(dict, &order, y);
        residual = y - dict.select_columns(&order) * &coefs;
        norm = residual.norm();
        residual_norms.push(norm);
    }
    let mut pairs: Vec<(usize, f64)> = order.iter().copied().zip(coefs.iter().copied()).collect();
    pairs.sort_by_key(|p| p.0);
    OmpTrace {
        code: SparseCode {
            support: pairs.iter().map(|p| p.0).collect(),
            values: pairs.iter().map(|p| p.1).collect(),
        },
        order,
        residual_norms,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng;

    fn unit_columns(mut m: DMatrix<f64>) -> DMatrix<f64> {
        for mut c in m.column_iter_mut() {
            let n = c.norm();
            c /= n;
        }
        m
    }

    #[test]
    fn identity_dictionary() {
        let code = omp(&[3.0, 0.0], &DMatrix::identity(2, 2), 1).unwrap();
        assert_eq!(code.support, [0]);
        assert_eq!(code.values, [3.0]);
    }

    #[test]
    fn exact_atom_is_recovered() {
        let mut r = rng::seeded(12);
        let dict = unit_columns(DMatrix::from_vec(6, 8, rng::gaussian_vec(&mut r, 48)));
        let y: Vec<f64> = dict.column(3).iter().map(|v| 2.0 * v).collect();
        for t in 1..=4 {
            let tr = omp_traced(&y, &dict, t).unwrap();
            assert_eq!(tr.code.support, [3]);
            assert!((tr.code.values[0] - 2.0).abs() < 1e-12);
            assert!(*tr.residual_norms.last().unwrap() < 1e-12);
        }
    }

    #[test]
    fn zero_signal_gives_empty_code() {
        let code = omp(&[0.0, 0.0], &DMatrix::identity(2, 2), 2).unwrap();
        assert_eq!(code, SparseCode::default());
    }

    #[test]
    fn validation() {
        let id = DMatrix::<f64>::identity(2, 2);
        assert!(omp(&[1.0], &id, 1).is_err());
        assert!(omp(&[1.0, 0.0], &id, 3).is_err());
        assert!(omp(&[1.0, 0.0], &(id * 2.0), 1).is_err());
    }

    #[test]
    fn orthonormal_full_sparsity_is_exact() {
        let mut r = rng::seeded(5);
        let q = DMatrix::from_vec(6, 6, rng::gaussian_vec(&mut r, 36)).qr().q();
        let y = rng::gaussian_vec(&mut r, 6);
        let code = omp(&y, &q, 6).unwrap();
        let back = code.reconstruct(&q);
        let err = (back - DVector::from_vec(y)).norm();
        assert!(err <= 1e-9);
    }

    #[test]
    fn ties_go_to_lowest_index() {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let dict = DMatrix::from_row_slice(2, 3, &[1.0, 0.0, s, 0.0, 1.0, s]);
        let tr = omp_traced(&[1.0, 1.0], &dict, 1).unwrap();
        assert_eq!(tr.order, [2]);
        let dict = DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, 1.0]);
        assert_eq!(omp_traced(&[1.0, 1.0], &dict, 1).unwrap().order, [0]);
    }
}
