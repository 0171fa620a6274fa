//! DFT and sliding-window DFT kernels.
//!
//! All transforms use the unitary `1/sqrt(n)` normalization. Window position
//! `p` covers the trailing samples `[p - n + 1, p]`, so a length-`N` signal
//! yields `P = N - n + 1` positions, `p = n - 1 ..= N - 1`.
//!
//! The grid is stored row-major: one row per frequency index `k`, one column
//! per window position.

use std::f64::consts::TAU;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Result, SwdftError};

/// A single transform coefficient.
pub type ComplexCoef = Complex64;

/// Number of recurrence steps between direct re-initializations of a row in
/// the sliding kernel.
pub const RESYNC_INTERVAL: usize = 4096;

/// A finite, non-empty, unit-spaced real signal.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RealSignal(Vec<f64>);

impl RealSignal {
    pub fn new(samples: Vec<f64>) -> Result<Self> {
        if samples.is_empty() {
            return Err(SwdftError::InvalidInput("empty signal".into()));
        }
        if let Some(t) = samples.iter().position(|v| !v.is_finite()) {
            return Err(SwdftError::InvalidInput(format!("non-finite sample at t={t}")));
        }
        Ok(Self(samples))
    }

    pub fn samples(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }

    /// Multiplies every sample by `c`.
    pub fn scaled(&self, c: f64) -> Result<Self> {
        Self::new(self.0.iter().map(|v| v * c).collect())
    }
}

impl TryFrom<Vec<f64>> for RealSignal {
    type Error = SwdftError;

    fn try_from(v: Vec<f64>) -> Result<Self> {
        Self::new(v)
    }
}

/// `n x P` array of SWDFT coefficients.
#[derive(Debug, Clone, PartialEq)]
pub struct SwdftGrid {
    window: usize,
    signal_len: usize,
    coefs: Vec<Complex64>,
}

impl SwdftGrid {
    fn zeros(window: usize, signal_len: usize) -> Self {
        let cols = signal_len - window + 1;
        Self {
            window,
            signal_len,
            coefs: vec![Complex64::new(0.0, 0.0); window * cols],
        }
    }

    /// Window size `n`; also the number of frequency rows.
    pub fn window_size(&self) -> usize {
        self.window
    }

    /// Length `N` of the transformed signal.
    pub fn signal_len(&self) -> usize {
        self.signal_len
    }

    /// Number of window positions `P = N - n + 1`.
    pub fn positions(&self) -> usize {
        self.signal_len - self.window + 1
    }

    /// First window position, `n - 1`.
    pub fn first_position(&self) -> usize {
        self.window - 1
    }

    /// Coefficient at frequency `k` and absolute window position `p`.
    ///
    /// Panics when `(k, p)` is outside the grid.
    pub fn get(&self, k: usize, p: usize) -> Complex64 {
        assert!(k < self.window, "frequency {k} out of range");
        assert!(
            p >= self.window - 1 && p < self.signal_len,
            "window position {p} out of range"
        );
        self.coefs[k * self.positions() + (p + 1 - self.window)]
    }

    /// Row `k` in window-position order.
    pub fn row(&self, k: usize) -> &[Complex64] {
        let cols = self.positions();
        &self.coefs[k * cols..(k + 1) * cols]
    }

    /// All `n` coefficients at absolute window position `p`.
    pub fn column(&self, p: usize) -> Vec<Complex64> {
        (0..self.window).map(|k| self.get(k, p)).collect()
    }

    /// Row-major coefficient storage.
    pub fn as_slice(&self) -> &[Complex64] {
        &self.coefs
    }

    /// Iterates `(k, p, coef)` ordered by `k` then `p`.
    pub fn iter(&self) -> impl Iterator<Item = (usize, usize, Complex64)> + '_ {
        let cols = self.positions();
        let first = self.first_position();
        self.coefs
            .iter()
            .enumerate()
            .map(move |(i, c)| (i / cols, first + i % cols, *c))
    }

    /// Elementwise sum of two grids of equal shape.
    pub fn try_add(&self, other: &SwdftGrid) -> Result<SwdftGrid> {
        if self.window != other.window || self.signal_len != other.signal_len {
            return Err(SwdftError::InvalidInput("grid shapes differ".into()));
        }
        Ok(SwdftGrid {
            window: self.window,
            signal_len: self.signal_len,
            coefs: self.coefs.iter().zip(&other.coefs).map(|(a, b)| a + b).collect(),
        })
    }

    /// Largest absolute coefficient difference against `other`.
    pub fn max_abs_diff(&self, other: &SwdftGrid) -> f64 {
        assert_eq!(self.coefs.len(), other.coefs.len(), "grid shapes differ");
        self.coefs
            .iter()
            .zip(&other.coefs)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }
}

/// How a coefficient is presented.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CoefView {
    Complex,
    RealPart,
    ImagPart,
    SquaredModulus,
    Phase,
}

impl std::str::FromStr for CoefView {
    type Err = SwdftError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "complex" => Ok(Self::Complex),
            "real" | "real-part" | "re" => Ok(Self::RealPart),
            "imag" | "imag-part" | "im" => Ok(Self::ImagPart),
            "mod2" | "squared-modulus" => Ok(Self::SquaredModulus),
            "phase" | "arg" => Ok(Self::Phase),
            other => Err(SwdftError::InvalidInput(format!("unknown view '{other}'"))),
        }
    }
}

/// Output of [`view`]: same `n x P` row-major shape as the grid.
#[derive(Debug, Clone, PartialEq)]
pub enum ViewData {
    Complex(Vec<Complex64>),
    Real(Vec<f64>),
}

impl ViewData {
    pub fn len(&self) -> usize {
        match self {
            ViewData::Complex(v) => v.len(),
            ViewData::Real(v) => v.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn as_real(&self) -> Option<&[f64]> {
        match self {
            ViewData::Real(v) => Some(v),
            ViewData::Complex(_) => None,
        }
    }
}

/// Applies a scalar view to one coefficient; `None` for the complex view.
pub fn view_scalar(c: Complex64, kind: CoefView) -> Option<f64> {
    match kind {
        CoefView::Complex => None,
        CoefView::RealPart => Some(c.re),
        CoefView::ImagPart => Some(c.im),
        CoefView::SquaredModulus => Some(c.re * c.re + c.im * c.im),
        CoefView::Phase => Some(phase(c)),
    }
}

// atan2 returns -pi for (-0.0, negative); fold it onto +pi so the range is (-pi, pi].
fn phase(c: Complex64) -> f64 {
    let a = c.im.atan2(c.re);
    if a == -std::f64::consts::PI {
        std::f64::consts::PI
    } else {
        a
    }
}

pub fn view(g: &SwdftGrid, kind: CoefView) -> ViewData {
    match kind {
        CoefView::Complex => ViewData::Complex(g.coefs.clone()),
        _ => ViewData::Real(g.coefs.iter().map(|&c| view_scalar(c, kind).unwrap()).collect()),
    }
}

/// The frequency-`k` time-series `[a_{k,n-1}, ..., a_{k,N-1}]`.
pub fn frequency_series(g: &SwdftGrid, k: usize) -> Result<Vec<Complex64>> {
    if k >= g.window {
        return Err(SwdftError::IndexOutOfRange {
            index: k,
            bound: g.window,
        });
    }
    Ok(g.row(k).to_vec())
}

/// `e^{-i 2 pi m / n}` for `m = 0..n`. Indexing by `(j * k) % n` keeps the
/// argument reduced, which matters for large `j * k`.
fn twiddles(n: usize) -> Vec<Complex64> {
    (0..n)
        .map(|m| {
            let theta = TAU * m as f64 / n as f64;
            Complex64::new(theta.cos(), -theta.sin())
        })
        .collect()
}

fn check_window(n: usize, len: usize) -> Result<()> {
    if n == 0 || n > len {
        return Err(SwdftError::InvalidWindow { n, len });
    }
    Ok(())
}

/// Direct single coefficient over `window` (length `n`).
fn dft_coef(window: &[f64], k: usize, tw: &[Complex64]) -> Complex64 {
    let n = window.len();
    let mut acc = Complex64::new(0.0, 0.0);
    for (j, &v) in window.iter().enumerate() {
        acc += tw[(j * k) % n] * v;
    }
    acc / (n as f64).sqrt()
}

/// Unitary DFT of the whole signal.
pub fn dft(x: &RealSignal) -> Vec<Complex64> {
    let n = x.len();
    let tw = twiddles(n);
    (0..n).map(|k| dft_coef(x.samples(), k, &tw)).collect()
}

/// SWDFT by direct evaluation of every window, `O(N n^2)`.
pub fn swdft_direct(x: &RealSignal, n: usize) -> Result<SwdftGrid> {
    check_window(n, x.len())?;
    let mut grid = SwdftGrid::zeros(n, x.len());
    let cols = grid.positions();
    let tw = twiddles(n);
    let samples = x.samples();
    grid.coefs.par_chunks_mut(cols).enumerate().for_each(|(k, row)| {
        for (c, slot) in row.iter_mut().enumerate() {
            *slot = dft_coef(&samples[c..c + n], k, &tw);
        }
    });
    Ok(grid)
}

/// SWDFT by the per-frequency sliding recurrence, `O(N n)`.
///
/// `a_{k,p+1} = w^k (a_{k,p} + (x_{p+1} - x_{p-n+1}) / sqrt(n))`, with each
/// row re-seeded from a direct evaluation every [`RESYNC_INTERVAL`] steps.
pub fn swdft_sliding(x: &RealSignal, n: usize) -> Result<SwdftGrid> {
    check_window(n, x.len())?;
    let mut grid = SwdftGrid::zeros(n, x.len());
    let cols = grid.positions();
    let tw = twiddles(n);
    let samples = x.samples();
    grid.coefs
        .par_chunks_mut(cols)
        .enumerate()
        .for_each(|(k, row)| fill_row(samples, n, k, &tw, row));
    Ok(grid)
}

fn fill_row(samples: &[f64], n: usize, k: usize, tw: &[Complex64], row: &mut [Complex64]) {
    let scale = 1.0 / (n as f64).sqrt();
    // w^k = conj(w^{-k})
    let step = tw[k % n].conj();
    let mut acc = dft_coef(&samples[..n], k, tw);
    row[0] = acc;
    for c in 1..row.len() {
        if c % RESYNC_INTERVAL == 0 {
            acc = dft_coef(&samples[c..c + n], k, tw);
        } else {
            // window for column c covers samples[c .. c + n]
            let delta = (samples[c + n - 1] - samples[c - 1]) * scale;
            acc = step * (acc + delta);
        }
        row[c] = acc;
    }
}

/// Reusable single-frequency sliding kernel.
///
/// Holds the twiddle table for window size `n` so repeated rows (the
/// estimator's design columns) avoid recomputing it.
#[derive(Debug, Clone)]
pub struct RowKernel {
    n: usize,
    k: usize,
    tw: Vec<Complex64>,
}

impl RowKernel {
    pub fn new(n: usize, k: usize) -> Result<Self> {
        if n == 0 {
            return Err(SwdftError::InvalidWindow { n, len: 0 });
        }
        if k >= n {
            return Err(SwdftError::IndexOutOfRange { index: k, bound: n });
        }
        Ok(Self { n, k, tw: twiddles(n) })
    }

    pub fn window_size(&self) -> usize {
        self.n
    }

    pub fn frequency(&self) -> usize {
        self.k
    }

    /// Writes row `k` of the SWDFT of `samples` into `out`, which must hold
    /// exactly `samples.len() - n + 1` values.
    pub fn row_into(&self, samples: &[f64], out: &mut [Complex64]) -> Result<()> {
        check_window(self.n, samples.len())?;
        if out.len() != samples.len() - self.n + 1 {
            return Err(SwdftError::InvalidInput(format!(
                "output buffer holds {} values, need {}",
                out.len(),
                samples.len() - self.n + 1
            )));
        }
        fill_row(samples, self.n, self.k, &self.tw, out);
        Ok(())
    }
}

/// A single frequency row of the SWDFT, computed with the sliding recurrence.
pub fn sliding_row(samples: &[f64], n: usize, k: usize) -> Result<Vec<Complex64>> {
    check_window(n, samples.len())?;
    let kernel = RowKernel::new(n, k)?;
    let mut row = vec![Complex64::new(0.0, 0.0); samples.len() - n + 1];
    kernel.row_into(samples, &mut row)?;
    Ok(row)
}
