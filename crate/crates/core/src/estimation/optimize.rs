//! Bracketed univariate minimization: golden-section search with successive
//! parabolic interpolation (Brent's `fmin`).

use crate::error::{Result, SwdftError};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Minimum {
    pub x: f64,
    pub value: f64,
    pub iterations: usize,
    pub converged: bool,
}

/// Minimizes `f` on `[lower, upper]` to absolute tolerance `tol` in `x`.
///
/// Returns [`SwdftError::NumericalFailure`] as soon as the objective yields a
/// non-finite value.
pub fn brent_minimize<F>(mut f: F, lower: f64, upper: f64, tol: f64, max_iter: usize) -> Result<Minimum>
where
    F: FnMut(f64) -> Result<f64>,
{
    if lower.partial_cmp(&upper) != Some(std::cmp::Ordering::Less) || !tol.is_finite() || tol <= 0.0 {
        return Err(SwdftError::InvalidInput(format!(
            "bad bracket [{lower}, {upper}] or tolerance {tol}"
        )));
    }
    let mut eval = |x: f64| -> Result<f64> {
        let v = f(x)?;
        if !v.is_finite() {
            return Err(SwdftError::NumericalFailure(format!("objective is {v} at {x}")));
        }
        Ok(v)
    };

    // (3 - sqrt 5) / 2
    let golden = 0.381_966_011_250_105_1;
    let eps = f64::EPSILON.sqrt();

    let (mut a, mut b) = (lower, upper);
    let mut x = a + golden * (b - a);
    let (mut v, mut w) = (x, x);
    let mut fx = eval(x)?;
    let (mut fv, mut fw) = (fx, fx);
    let mut d: f64 = 0.0;
    let mut e: f64 = 0.0;

    for iter in 0..max_iter {
        let xm = 0.5 * (a + b);
        let tol1 = eps * x.abs() + tol / 3.0;
        let tol2 = 2.0 * tol1;
        if (x - xm).abs() <= tol2 - 0.5 * (b - a) {
            return Ok(Minimum {
                x,
                value: fx,
                iterations: iter,
                converged: true,
            });
        }

        let mut p = 0.0;
        let mut q = 0.0;
        let mut r = 0.0;
        if e.abs() > tol1 {
            r = (x - w) * (fx - fv);
            q = (x - v) * (fx - fw);
            p = (x - v) * q - (x - w) * r;
            q = 2.0 * (q - r);
            if q > 0.0 {
                p = -p;
            } else {
                q = -q;
            }
            r = e;
            e = d;
        }

        if p.abs() >= (0.5 * q * r).abs() || p <= q * (a - x) || p >= q * (b - x) {
            e = if x < xm { b - x } else { a - x };
            d = golden * e;
        } else {
            d = p / q;
            let u = x + d;
            if u - a < tol2 || b - u < tol2 {
                d = if x < xm { tol1 } else { -tol1 };
            }
        }

        let u = if d.abs() >= tol1 {
            x + d
        } else if d > 0.0 {
            x + tol1
        } else {
            x - tol1
        };
        let fu = eval(u)?;

        if fu <= fx {
            if u < x {
                b = x;
            } else {
                a = x;
            }
            v = w;
            fv = fw;
            w = x;
            fw = fx;
            x = u;
            fx = fu;
        } else {
            if u < x {
                a = u;
            } else {
                b = u;
            }
            if fu <= fw || w == x {
                v = w;
                fv = fw;
                w = u;
                fw = fu;
            } else if fu <= fv || v == x || v == w {
                v = u;
                fv = fu;
            }
        }
    }
    Ok(Minimum {
        x,
        value: fx,
        iterations: max_iter,
        converged: false,
    })
}
