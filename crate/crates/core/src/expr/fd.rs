//! Central finite differences of a field. Used as an oracle against the
//! symbolic derivatives; it only ever calls `eval`.

use super::{EvalError, Jet2, Point4, ScalarField, Var};

pub const DEFAULT_FD_STEP: f64 = 1e-4;

/// Second-order central-difference estimate of the 2-jet of `f` at `pt`.
///
/// Panics if `h` is not a positive finite number.
pub fn fd_jet2(f: &ScalarField, pt: &Point4, h: f64) -> Result<Jet2, EvalError> {
    assert!(h > 0.0 && h.is_finite(), "finite-difference step must be positive");
    let at = |shifts: &[(Var, f64)]| {
        let q = shifts.iter().fold(*pt, |acc, &(v, d)| acc.shifted(v, d));
        f.eval(&q)
    };
    let value = f.eval(pt)?;
    let mut gradient = [0.0; 4];
    let mut hessian = [[0.0; 4]; 4];
    for (i, vi) in Var::ALL.into_iter().enumerate() {
        let plus = at(&[(vi, h)])?;
        let minus = at(&[(vi, -h)])?;
        gradient[i] = (plus - minus) / (2.0 * h);
        hessian[i][i] = (plus - 2.0 * value + minus) / (h * h);
        for (j, vj) in Var::ALL.into_iter().enumerate().skip(i + 1) {
            let pp = at(&[(vi, h), (vj, h)])?;
            let pm = at(&[(vi, h), (vj, -h)])?;
            let mp = at(&[(vi, -h), (vj, h)])?;
            let mm = at(&[(vi, -h), (vj, -h)])?;
            let mixed = (pp - pm - mp + mm) / (4.0 * h * h);
            hessian[i][j] = mixed;
            hessian[j][i] = mixed;
        }
    }
    Ok(Jet2 {
        value,
        gradient,
        hessian,
    })
}
