//! Dense permanent (Ryser) and determinant (LU with partial pivoting).

use ndarray::Array2;
use num_complex::Complex64;

use crate::oracle::OracleError;

/// Largest matrix accepted by [`ryser_permanent`].
pub const MAX_PERMANENT_SIZE: usize = 20;

/// Ryser's inclusion–exclusion formula, visiting column subsets in Gray
/// code order so each step updates the row sums by one column.
pub fn ryser_permanent(a: &Array2<Complex64>) -> Result<Complex64, OracleError> {
    let n = a.nrows();
    if a.ncols() != n {
        return Err(OracleError::DimensionMismatch {
            expected: n,
            found: a.ncols(),
        });
    }
    if n > MAX_PERMANENT_SIZE {
        return Err(OracleError::SizeCapExceeded {
            size: n,
            cap: MAX_PERMANENT_SIZE,
        });
    }
    if n == 0 {
        return Ok(Complex64::new(1.0, 0.0));
    }
    let mut row_sums = vec![Complex64::new(0.0, 0.0); n];
    let mut total = Complex64::new(0.0, 0.0);
    let mut gray: u64 = 0;
    for step in 1u64..(1u64 << n) {
        let next = step ^ (step >> 1);
        let col = (next ^ gray).trailing_zeros() as usize;
        let added = next & (1 << col) != 0;
        gray = next;
        for (i, s) in row_sums.iter_mut().enumerate() {
            if added {
                *s += a[(i, col)];
            } else {
                *s -= a[(i, col)];
            }
        }
        let prod: Complex64 = row_sums.iter().product();
        if gray.count_ones().is_multiple_of(2) {
            total += prod;
        } else {
            total -= prod;
        }
    }
    if n % 2 == 1 {
        total = -total;
    }
    Ok(total)
}

/// Determinant by LU decomposition with partial pivoting; singular matrices
/// give zero.
pub fn dense_determinant(a: &Array2<Complex64>) -> Result<Complex64, OracleError> {
    let n = a.nrows();
    if a.ncols() != n {
        return Err(OracleError::DimensionMismatch {
            expected: n,
            found: a.ncols(),
        });
    }
    let mut lu = a.clone();
    let mut det = Complex64::new(1.0, 0.0);
    for k in 0..n {
        let mut p = k;
        let mut best = lu[(k, k)].norm();
        for r in k + 1..n {
            let v = lu[(r, k)].norm();
            if v > best {
                best = v;
                p = r;
            }
        }
        if best == 0.0 {
            return Ok(Complex64::new(0.0, 0.0));
        }
        if p != k {
            for c in 0..n {
                lu.swap((p, c), (k, c));
            }
            det = -det;
        }
        let pivot = lu[(k, k)];
        det *= pivot;
        for r in k + 1..n {
            let l = lu[(r, k)] / pivot;
            lu[(r, k)] = l;
            for c in k + 1..n {
                let t = lu[(k, c)];
                lu[(r, c)] -= l * t;
            }
        }
    }
    Ok(det)
}
