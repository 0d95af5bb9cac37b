use super::Matrix;
use crate::error::{Error, Result};

const TAYLOR_DEGREE: usize = 18;

/// `e^{A t}` by scaling and squaring.
///
/// `A t` is scaled by `2^-k` until its 1-norm is at most 0.5, the
/// exponential of the scaled matrix is taken from a degree-18 Taylor
/// polynomial (truncation error below `0.5^19 / 19!`), and the result is
/// squared `k` times.
pub fn expm(a: &Matrix, t: f64) -> Result<Matrix> {
    if !t.is_finite() || !a.is_finite() {
        return Err(Error::NonFinite { what: "expm argument" });
    }
    let n = a.n();
    let at = a.scale(t);
    let norm = at.norm_1();
    if norm == 0.0 {
        return Ok(Matrix::identity(n));
    }

    let k = if norm > 0.5 { (norm / 0.5).log2().ceil() as i32 } else { 0 };
    if k > 1000 {
        return Err(Error::ExpmOverflow { norm });
    }
    let x = at.scale(0.5f64.powi(k));

    // Horner: I + X(I + X/2(I + X/3(...)))
    let id = Matrix::identity(n);
    let mut acc = id.clone();
    for j in (1..=TAYLOR_DEGREE).rev() {
        acc = &id + &(&x * &acc).scale(1.0 / j as f64);
    }
    for _ in 0..k {
        acc = &acc * &acc;
        if !acc.is_finite() {
            return Err(Error::ExpmOverflow { norm });
        }
    }
    if !acc.is_finite() {
        return Err(Error::ExpmOverflow { norm });
    }
    Ok(acc)
}
