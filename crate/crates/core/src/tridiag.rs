//! Thomas algorithm for complex tridiagonal systems.

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Solves `T y = rhs` where `T` has sub-diagonal `lower`, main diagonal
/// `diag` and super-diagonal `upper`.
///
/// No pivoting is performed; a vanishing pivot is reported as
/// [`Error::SingularPivot`].
pub fn solve_tridiagonal(
    lower: &[Complex64],
    diag: &[Complex64],
    upper: &[Complex64],
    rhs: &[Complex64],
) -> Result<Vec<Complex64>> {
    let mut out = vec![Complex64::new(0.0, 0.0); diag.len()];
    let mut scratch = vec![Complex64::new(0.0, 0.0); diag.len()];
    solve_tridiagonal_into(lower, diag, upper, rhs, &mut scratch, &mut out)?;
    Ok(out)
}

/// Allocation-free variant; `scratch` and `out` must have the length of `diag`.
pub fn solve_tridiagonal_into(
    lower: &[Complex64],
    diag: &[Complex64],
    upper: &[Complex64],
    rhs: &[Complex64],
    scratch: &mut [Complex64],
    out: &mut [Complex64],
) -> Result<()> {
    let n = diag.len();
    if n == 0 {
        return Err(Error::InvalidState("empty tridiagonal system".into()));
    }
    if lower.len() + 1 != n || upper.len() + 1 != n || rhs.len() != n {
        return Err(Error::InvalidState(format!(
            "tridiagonal shapes inconsistent: lower {}, diag {}, upper {}, rhs {}",
            lower.len(),
            n,
            upper.len(),
            rhs.len()
        )));
    }
    assert_eq!(scratch.len(), n);
    assert_eq!(out.len(), n);

    let pivot_ok = |p: Complex64| p.norm_sqr() > 0.0 && p.re.is_finite() && p.im.is_finite();

    // Forward sweep: scratch holds the modified super-diagonal.
    let mut pivot = diag[0];
    if !pivot_ok(pivot) {
        return Err(Error::SingularPivot { row: 0 });
    }
    out[0] = rhs[0] / pivot;
    for i in 1..n {
        scratch[i - 1] = upper[i - 1] / pivot;
        pivot = diag[i] - lower[i - 1] * scratch[i - 1];
        if !pivot_ok(pivot) {
            return Err(Error::SingularPivot { row: i });
        }
        out[i] = (rhs[i] - lower[i - 1] * out[i - 1]) / pivot;
    }
    for i in (0..n - 1).rev() {
        let next = out[i + 1];
        out[i] -= scratch[i] * next;
    }
    Ok(())
}
