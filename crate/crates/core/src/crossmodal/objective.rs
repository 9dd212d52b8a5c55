use nalgebra::DMatrix;

use crate::error::{Error, Result};

/// `1/2 ||W M - V||_F^2 + lambda1 ||M||_1 + lambda2/2 ||M||_F^2`, evaluated
/// from the explicit residual.
pub fn objective(
    m: &DMatrix<f64>,
    w: &DMatrix<f64>,
    v: &DMatrix<f64>,
    lambda1: f64,
    lambda2: f64,
) -> Result<f64> {
    if w.ncols() != m.nrows() || w.nrows() != v.nrows() || m.ncols() != v.ncols() {
        return Err(Error::Dimension(format!(
            "W {}x{}, M {}x{}, V {}x{}",
            w.nrows(),
            w.ncols(),
            m.nrows(),
            m.ncols(),
            v.nrows(),
            v.ncols()
        )));
    }
    let residual = w * m - v;
    let loss = 0.5 * residual.norm_squared();
    let l1: f64 = m.iter().map(|x| x.abs()).sum();
    Ok(loss + lambda1 * l1 + 0.5 * lambda2 * m.norm_squared())
}
