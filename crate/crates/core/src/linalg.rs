//! Dense solves for the handful of unknowns the fitter deals with.

use crate::scalar::Scalar;

/// Solves `m x = rhs` by Gaussian elimination with partial pivoting.
/// `m` is row-major `n x n`. Returns `None` when a pivot vanishes.
pub(crate) fn solve<T: Scalar>(mut m: Vec<T>, mut rhs: Vec<T>) -> Option<Vec<T>> {
    let n = rhs.len();
    debug_assert_eq!(m.len(), n * n);
    let scale = m.iter().fold(T::zero(), |acc, v| acc.max(v.abs()));
    let tiny = scale * T::epsilon() * T::lit(n as f64);
    for col in 0..n {
        let pivot = (col..n)
            .max_by(|&i, &j| {
                m[i * n + col]
                    .abs()
                    .partial_cmp(&m[j * n + col].abs())
                    .unwrap()
            })
            .unwrap();
        if !(m[pivot * n + col].abs() > tiny) {
            return None;
        }
        if pivot != col {
            for k in 0..n {
                m.swap(col * n + k, pivot * n + k);
            }
            rhs.swap(col, pivot);
        }
        for row in col + 1..n {
            let factor = m[row * n + col] / m[col * n + col];
            if factor == T::zero() {
                continue;
            }
            for k in col..n {
                let v = m[col * n + k];
                m[row * n + k] = m[row * n + k] - factor * v;
            }
            rhs[row] = rhs[row] - factor * rhs[col];
        }
    }
    let mut x = vec![T::zero(); n];
    for row in (0..n).rev() {
        let mut acc = rhs[row];
        for k in row + 1..n {
            acc = acc - m[row * n + k] * x[k];
        }
        x[row] = acc / m[row * n + row];
    }
    Some(x)
}

/// Ordinary least squares `min |X b - y|` via the normal equations.
/// `rows` holds the regressors of each observation.
pub(crate) fn least_squares<T: Scalar>(rows: &[Vec<T>], y: &[T]) -> Option<Vec<T>> {
    let p = rows.first()?.len();
    let mut xtx = vec![T::zero(); p * p];
    let mut xty = vec![T::zero(); p];
    for (row, &yi) in rows.iter().zip(y) {
        for i in 0..p {
            xty[i] = xty[i] + row[i] * yi;
            for j in 0..p {
                xtx[i * p + j] = xtx[i * p + j] + row[i] * row[j];
            }
        }
    }
    solve(xtx, xty)
}
