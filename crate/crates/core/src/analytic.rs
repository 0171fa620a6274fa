//! Closed-form SWDFT coefficients for local periodic signals and steps.
//!
//! Every expression here is derived from the Euler expansion of the cosine
//! and the finite geometric-sum identity
//!
//! ```text
//! sum_{j=a}^{b} e^{i j x} = e^{i x (a+b)/2} D_{b-a+1}(x)
//! ```
//!
//! With the window at position `p` (first index `p_hat = p - n + 1`) and the
//! window offsets `j0..=j1` that fall on the oscillating part, the coefficient
//! of `A cos(2 pi F t / N + phi)` is
//!
//! ```text
//! a_{k,p} = A / (2 sqrt n) * [ e^{ i phi} e^{ i 2 pi f p_hat / n} e^{-i pi (k - f)(j0 + j1) / n} D_q(2 pi (k - f) / n)
//!                            + e^{-i phi} e^{-i 2 pi f p_hat / n} e^{-i pi (k + f)(j0 + j1) / n} D_q(2 pi (k + f) / n) ]
//! ```
//!
//! where `f = nF/N` and `q = j1 - j0 + 1` is the overlap. The five window
//! states only differ in `(j0, j1)`:
//!
//! | state | window vs. support | `(j0, j1)` |
//! |-------|--------------------|------------|
//! | 1, 5  | disjoint           | empty      |
//! | 2     | entering           | `(n - q, n - 1)` |
//! | 3     | inside             | `(0, n - 1)` |
//! | 4     | exiting            | `(0, q - 1)` |
//!
//! All forms are certified against [`crate::transform::swdft_direct`] in the
//! tests below and in the acceptance suite.

use std::f64::consts::{PI, TAU};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Result, SwdftError};
use crate::signals::{cycles_per_window, synth_local, synth_step, LocalSignalSpec, StepSpec};
use crate::transform::{swdft_direct, ComplexCoef, RealSignal};

const SINGULAR_TOL: f64 = 1e-12;

/// Dirichlet kernel `D_n(x) = sin(n x / 2) / sin(x / 2)` with its removable
/// singularities filled in.
///
/// At `x = 2 pi m` the limit is `n (-1)^{m (n - 1)}`; for even `n` this is
/// `n` for even `m` and `-n` for odd `m`.
pub fn dirichlet(n: usize, x: f64) -> f64 {
    let nf = n as f64;
    let m = (x / TAU).round();
    let eps = x - m * TAU;
    let negative = n.is_multiple_of(2) && m.rem_euclid(2.0) == 1.0;
    let sign = if negative { -1.0 } else { 1.0 };
    if eps.abs() <= SINGULAR_TOL {
        return sign * nf;
    }
    // zeros at x = 2 pi m / n, m not a multiple of n
    let r = nf * eps / TAU;
    if (r - r.round()).abs() <= SINGULAR_TOL {
        return 0.0;
    }
    sign * (nf * eps / 2.0).sin() / (eps / 2.0).sin()
}

/// Dirichlet weight `e^{-i x (n-1)/2} D_n(x)`, equal to `sum_{j=0}^{n-1} e^{-i j x}`.
pub fn dirichlet_weight(n: usize, x: f64) -> ComplexCoef {
    Complex64::from_polar(1.0, -x * (n as f64 - 1.0) / 2.0) * dirichlet(n, x)
}

/// Position of a window relative to a local signal's support.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum State {
    /// Window entirely before the support.
    Before,
    /// Window covers the start of the support.
    Entering,
    /// Window entirely on the support.
    Inside,
    /// Window covers the end of the support.
    Exiting,
    /// Window entirely after the support.
    After,
}

impl State {
    /// The conventional state number, 1 through 5.
    pub fn number(self) -> u8 {
        match self {
            State::Before => 1,
            State::Entering => 2,
            State::Inside => 3,
            State::Exiting => 4,
            State::After => 5,
        }
    }
}

/// Window state together with the overlap count `q`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct WindowState {
    pub state: State,
    pub q: usize,
}

impl WindowState {
    /// Window offsets `(j0, j1)` lying on the support, `None` when disjoint.
    fn offsets(&self, n: usize) -> Option<(usize, usize)> {
        match self.state {
            State::Before | State::After => None,
            State::Entering => Some((n - self.q, n - 1)),
            State::Inside => Some((0, n - 1)),
            State::Exiting => Some((0, self.q - 1)),
        }
    }
}

/// Classifies window position `p` for a local signal with `L >= n`.
pub fn window_state(spec: &LocalSignalSpec, n: usize, p: usize) -> Result<WindowState> {
    if n == 0 {
        return Err(SwdftError::InvalidWindow { n, len: 0 });
    }
    if spec.length() < n {
        return Err(SwdftError::Unsupported(format!(
            "closed form requires L >= n (L={}, n={n})",
            spec.length()
        )));
    }
    let s = spec.start();
    let e = spec.end();
    let ws = if p < s {
        WindowState {
            state: State::Before,
            q: 0,
        }
    } else if p < s + n - 1 {
        WindowState {
            state: State::Entering,
            q: p - s + 1,
        }
    } else if p <= e {
        WindowState {
            state: State::Inside,
            q: n,
        }
    } else if p < e + n {
        WindowState {
            state: State::Exiting,
            q: e + n - p,
        }
    } else {
        WindowState {
            state: State::After,
            q: 0,
        }
    };
    Ok(ws)
}

/// Coefficient of `A cos(2 pi f t / n + phi)` restricted to window offsets `j0..=j1`.
#[allow(clippy::too_many_arguments)]
fn partial_window_coef(
    amplitude: f64,
    f: f64,
    phase: f64,
    n: usize,
    k: usize,
    p_hat: usize,
    j0: usize,
    j1: usize,
) -> ComplexCoef {
    let nf = n as f64;
    let q = j1 - j0 + 1;
    let kf = k as f64;
    let mid = (j0 + j1) as f64;
    let carrier = TAU * f * p_hat as f64 / nf;

    let minus =
        Complex64::from_polar(1.0, phase + carrier - PI * (kf - f) * mid / nf) * dirichlet(q, TAU * (kf - f) / nf);
    let plus =
        Complex64::from_polar(1.0, -phase - carrier - PI * (kf + f) * mid / nf) * dirichlet(q, TAU * (kf + f) / nf);
    (minus + plus) * (amplitude / (2.0 * nf.sqrt()))
}

fn check_kp(len: usize, n: usize, k: usize, p: usize) -> Result<()> {
    if n == 0 || n > len {
        return Err(SwdftError::InvalidWindow { n, len });
    }
    if k >= n {
        return Err(SwdftError::IndexOutOfRange { index: k, bound: n });
    }
    if p + 1 < n || p >= len {
        return Err(SwdftError::InvalidInput(format!(
            "window position {p} outside {}..={}",
            n - 1,
            len - 1
        )));
    }
    Ok(())
}

/// Exact SWDFT coefficient of a local periodic signal (requires `L >= n`).
pub fn swdft_local_closed(spec: &LocalSignalSpec, len: usize, n: usize, k: usize, p: usize) -> Result<ComplexCoef> {
    spec.validate(len)?;
    check_kp(len, n, k, p)?;
    let ws = window_state(spec, n, p)?;
    let Some((j0, j1)) = ws.offsets(n) else {
        return Ok(Complex64::new(0.0, 0.0));
    };
    let f = cycles_per_window(spec.frequency(), len, n);
    Ok(partial_window_coef(
        spec.amplitude(),
        f,
        spec.phase(),
        n,
        k,
        p + 1 - n,
        j0,
        j1,
    ))
}

/// Exact SWDFT coefficient of the global signal `A cos(2 pi F t / N + phi)`.
///
/// Both Dirichlet terms are kept, so the `k = f = n/2` case, where the
/// second term does not vanish, needs no special branch.
pub fn swdft_global_closed(
    amplitude: f64,
    frequency: f64,
    phase: f64,
    len: usize,
    n: usize,
    k: usize,
    p: usize,
) -> Result<ComplexCoef> {
    check_kp(len, n, k, p)?;
    let f = cycles_per_window(frequency, len, n);
    Ok(partial_window_coef(amplitude, f, phase, n, k, p + 1 - n, 0, n - 1))
}

/// Exact SWDFT coefficient of the unit step at `d`.
pub fn swdft_step_closed(len: usize, n: usize, d: usize, k: usize, p: usize) -> Result<ComplexCoef> {
    check_kp(len, n, k, p)?;
    if d >= len {
        return Err(SwdftError::InvalidSpec(format!("step location {d} outside 0..{len}")));
    }
    let sqrt_n = (n as f64).sqrt();
    if p < d {
        return Ok(Complex64::new(0.0, 0.0));
    }
    if p > d + n - 1 {
        return Ok(if k == 0 {
            Complex64::new(sqrt_n, 0.0)
        } else {
            Complex64::new(0.0, 0.0)
        });
    }
    let ones = p - d + 1;
    if k == 0 {
        return Ok(Complex64::new(ones as f64 / sqrt_n, 0.0));
    }
    // w^{-m} with integer exponents reduced mod n
    let w = |m: usize| Complex64::from_polar(1.0, -TAU * ((m * k) % n) as f64 / n as f64);
    let lead = d + n - 1 - p;
    Ok(w(lead) * (Complex64::new(1.0, 0.0) - w(ones)) / (Complex64::new(1.0, 0.0) - w(1)) / sqrt_n)
}

/// Which closed form a comparison table covers.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ClosedFormCase {
    Local(LocalSignalSpec),
    Global { amplitude: f64, frequency: f64, phase: f64 },
    Step { d: usize },
}

/// One row of a closed-form vs. direct comparison.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ComparisonRow {
    pub k: usize,
    pub p: usize,
    pub state: u8,
    pub q: usize,
    pub closed: ComplexCoef,
    pub direct: ComplexCoef,
}

impl ComparisonRow {
    pub fn abs_diff(&self) -> f64 {
        (self.closed - self.direct).norm()
    }
}

/// Evaluates the closed form at every `(k, p)` alongside the direct transform.
///
/// For the step, states are 1 (before), 2 (window covers the step, `q` ones
/// in the window) and 3 (after).
pub fn compare_closed_form(case: &ClosedFormCase, len: usize, n: usize) -> Result<Vec<ComparisonRow>> {
    let signal: RealSignal = match case {
        ClosedFormCase::Local(spec) => synth_local(spec, len)?,
        ClosedFormCase::Global {
            amplitude,
            frequency,
            phase,
        } => {
            let spec = LocalSignalSpec::new(0, len, *amplitude, *frequency, *phase)?;
            synth_local(&spec, len)?
        }
        ClosedFormCase::Step { d } => synth_step(&StepSpec { len, d: *d })?,
    };
    let grid = swdft_direct(&signal, n)?;
    let mut rows = Vec::with_capacity(n * grid.positions());
    for (k, p, direct) in grid.iter() {
        let (closed, state, q) = match case {
            ClosedFormCase::Local(spec) => {
                let ws = window_state(spec, n, p)?;
                (swdft_local_closed(spec, len, n, k, p)?, ws.state.number(), ws.q)
            }
            ClosedFormCase::Global {
                amplitude,
                frequency,
                phase,
            } => (
                swdft_global_closed(*amplitude, *frequency, *phase, len, n, k, p)?,
                State::Inside.number(),
                n,
            ),
            ClosedFormCase::Step { d } => {
                let (state, q) = if p < *d {
                    (1, 0)
                } else if p > d + n - 1 {
                    (3, n)
                } else {
                    (2, p - d + 1)
                };
                (swdft_step_closed(len, n, *d, k, p)?, state, q)
            }
        };
        rows.push(ComparisonRow {
            k,
            p,
            state,
            q,
            closed,
            direct,
        });
    }
    Ok(rows)
}
