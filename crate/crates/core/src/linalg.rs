//! Small dense solvers shared by the estimators.

use nalgebra::{DMatrix, DVector};

/// Relative pivot size below which a system is treated as singular.
pub(crate) const SINGULAR_TOL: f64 = 1e-10;

/// Least-squares solution of `x * beta = y` with its residual sum of squares.
///
/// Returns `None` when the design is rank deficient.
pub(crate) fn ols(x: &DMatrix<f64>, y: &DVector<f64>) -> Option<(DVector<f64>, f64)> {
    let k = x.ncols();
    if k == 0 {
        return Some((DVector::zeros(0), y.norm_squared()));
    }
    if x.nrows() < k {
        return None;
    }
    let qr = x.clone().qr();
    let r = qr.r();
    let max_diag = (0..k).map(|i| r[(i, i)].abs()).fold(0.0, f64::max);
    if max_diag == 0.0 || (0..k).any(|i| r[(i, i)].abs() <= SINGULAR_TOL * max_diag) {
        return None;
    }
    let qty = qr.q().transpose() * y;
    let beta = r.solve_upper_triangular(&qty.rows(0, k).into_owned())?;
    let resid = y - x * &beta;
    Some((beta, resid.norm_squared()))
}

/// Diagonal of `(x' x)^-1`, for coefficient standard errors.
pub(crate) fn xtx_inv_diag(x: &DMatrix<f64>) -> Option<Vec<f64>> {
    let k = x.ncols();
    let xtx = x.transpose() * x;
    let inv = xtx.try_inverse()?;
    Some((0..k).map(|i| inv[(i, i)]).collect())
}

/// Solves a square system by fully pivoted LU, rejecting near-singular matrices.
pub(crate) fn solve(a: DMatrix<f64>, b: &DVector<f64>) -> Option<DVector<f64>> {
    let n = a.nrows();
    let lu = a.full_piv_lu();
    let u = lu.u();
    let max_diag = (0..n).map(|i| u[(i, i)].abs()).fold(0.0, f64::max);
    if max_diag == 0.0 || (0..n).any(|i| u[(i, i)].abs() <= SINGULAR_TOL * max_diag) {
        return None;
    }
    lu.solve(b)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ols_recovers_exact_coefficients() {
        let x = DMatrix::from_row_slice(4, 2, &[1.0, 0.0, 0.0, 1.0, 1.0, 1.0, 2.0, 1.0]);
        let y = DVector::from_vec(vec![2.0, -1.0, 1.0, 3.0]);
        let (beta, rss) = ols(&x, &y).unwrap();
        assert!((beta[0] - 2.0).abs() < 1e-12 && (beta[1] + 1.0).abs() < 1e-12);
        assert!(rss < 1e-20);
    }

    #[test]
    fn ols_flags_collinear_design() {
        let x = DMatrix::from_row_slice(3, 2, &[1.0, 2.0, 2.0, 4.0, 3.0, 6.0]);
        let y = DVector::from_vec(vec![1.0, 2.0, 3.0]);
        assert!(ols(&x, &y).is_none());
    }

    #[test]
    fn solve_rejects_singular() {
        let a = DMatrix::from_row_slice(2, 2, &[1.0, 1.0, 1.0, 1.0]);
        assert!(solve(a, &DVector::from_vec(vec![1.0, 2.0])).is_none());
    }
}
