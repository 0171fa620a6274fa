//! Least-squares recovery of one local periodic signal from its SWDFT.
//!
//! For fixed support `(S, L)` and frequency `F` the model is linear in
//! `beta1 = A cos(phi)` and `beta2 = -A sin(phi)`:
//!
//! ```text
//! b_{k,p} = beta1 * C1_{k,p} + beta2 * C2_{k,p}
//! ```
//!
//! where `C1`/`C2` are row `k` of the SWDFT of the cosine/sine templates on
//! `[S, S+L-1]`. The estimator picks a row `k*`, searches `(S, L)` over a
//! grid, minimizes the residual over `f in [k* - 1/2, k* + 1/2]` for each
//! cell, and solves the 2x2 normal equations innermost.

mod optimize;

use std::f64::consts::TAU;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Result, SwdftError};
use crate::signals::{wrap_phase, LocalSignalSpec};
use crate::transform::{RowKernel, SwdftGrid};

pub use optimize::{brent_minimize, Minimum};

/// Row `k` of the SWDFT of the cosine (`c1`) and sine (`c2`) templates, one
/// entry per window position.
#[derive(Debug, Clone, PartialEq)]
pub struct DesignColumns {
    pub c1: Vec<Complex64>,
    pub c2: Vec<Complex64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BetaPair {
    pub beta1: f64,
    pub beta2: f64,
}

/// Regression coefficients plus a flag raised when both predictors vanish.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BetaSolution {
    pub betas: BetaPair,
    pub degenerate: bool,
}

/// Which parts of the complex coefficients enter the regression.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Regression {
    /// `Re(b) ~ Re(C1) + Re(C2)`.
    #[default]
    RealPart,
    /// Real and imaginary parts stacked into one regression.
    Stacked,
}

/// How the frequency row to search is chosen.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum KSelection {
    /// Largest squared modulus anywhere in the row.
    #[default]
    Option1,
    /// Largest reduction in squared error relative to a mean-only fit.
    Option2,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SearchMode {
    /// Every feasible `(S, L)`.
    #[default]
    Exhaustive,
    /// `budget` cells drawn uniformly (with replacement) from the feasible set.
    Randomized { budget: usize, seed: u64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EstimateOptions {
    pub k_selection: KSelection,
    /// Smallest support length searched.
    pub min_length: usize,
    /// Inclusive start range; `None` means `0..=N-2`.
    pub start_range: Option<(usize, usize)>,
    pub search: SearchMode,
    pub regression: Regression,
    /// Absolute tolerance of the frequency search, cycles per window.
    pub f_tol: f64,
    pub max_iter: usize,
    /// Spread the `(S, L)` search over the rayon pool. Results do not depend on it.
    pub parallel: bool,
}

impl Default for EstimateOptions {
    fn default() -> Self {
        Self {
            k_selection: KSelection::Option1,
            min_length: 8,
            start_range: None,
            search: SearchMode::Exhaustive,
            regression: Regression::RealPart,
            f_tol: 1e-6,
            max_iter: 200,
            parallel: true,
        }
    }
}

/// Recovered parameters of one local periodic signal.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EstimateResult {
    pub k_star: usize,
    pub start: usize,
    pub length: usize,
    pub amplitude: f64,
    /// Cycles per length-`N` signal.
    pub frequency: f64,
    /// Cycles per length-`n` window.
    pub cycles_per_window: f64,
    /// Radians in `[0, 2 pi)`.
    pub phase: f64,
    pub mse_a: f64,
    pub mse_b: f64,
    pub mse_c: f64,
    /// Observed row or winning design carried no information.
    pub degenerate: bool,
}

impl EstimateResult {
    /// Phase expressed in cycles, `[0, 1)`.
    pub fn phase_cycles(&self) -> f64 {
        self.phase / TAU
    }

    pub fn to_spec(&self) -> Result<LocalSignalSpec> {
        LocalSignalSpec::new(self.start, self.length, self.amplitude, self.frequency, self.phase)
    }
}

/// Candidate rows `1 ..= ceil(n/2) - 1`: the DC row has no model term and the
/// `n/2` row is excluded.
pub fn candidate_frequencies(n: usize) -> std::ops::Range<usize> {
    1..n.div_ceil(2)
}

fn check_candidates(n: usize) -> Result<()> {
    if candidate_frequencies(n).is_empty() {
        return Err(SwdftError::Unsupported(format!(
            "window size {n} leaves no candidate frequency between 0 and n/2"
        )));
    }
    Ok(())
}

/// Reusable buffers for repeated design-column construction and fits.
struct Fitter<'a> {
    observed: &'a [Complex64],
    n: usize,
    kernel: RowKernel,
    regression: Regression,
    cos_t: Vec<f64>,
    sin_t: Vec<f64>,
    c1: Vec<Complex64>,
    c2: Vec<Complex64>,
}

impl<'a> Fitter<'a> {
    fn new(observed: &'a [Complex64], len: usize, n: usize, k: usize, regression: Regression) -> Result<Self> {
        let kernel = RowKernel::new(n, k)?;
        let cols = len + 1 - n;
        if observed.len() != cols {
            return Err(SwdftError::InvalidInput(format!(
                "observed row has {} positions, expected {cols}",
                observed.len()
            )));
        }
        Ok(Self {
            observed,
            n,
            kernel,
            regression,
            cos_t: vec![0.0; len],
            sin_t: vec![0.0; len],
            c1: vec![Complex64::new(0.0, 0.0); cols],
            c2: vec![Complex64::new(0.0, 0.0); cols],
        })
    }

    /// Fills `c1`, `c2` for support `[start, start+length-1]` and angular
    /// frequency `omega` radians per sample.
    fn build(&mut self, start: usize, length: usize, omega: f64) -> Result<()> {
        self.cos_t.fill(0.0);
        self.sin_t.fill(0.0);
        for t in start..start + length {
            let (s, c) = (omega * t as f64).sin_cos();
            self.cos_t[t] = c;
            self.sin_t[t] = s;
        }
        self.kernel.row_into(&self.cos_t, &mut self.c1)?;
        self.kernel.row_into(&self.sin_t, &mut self.c2)
    }

    fn fit_cycles(&mut self, start: usize, length: usize, f: f64) -> Result<(BetaSolution, f64)> {
        self.build(start, length, TAU * f / self.n as f64)?;
        let sol = solve_parts(self.observed, &self.c1, &self.c2, self.regression);
        let rss = rss_parts(self.observed, &self.c1, &self.c2, sol.betas, self.regression);
        Ok((sol, rss))
    }

    fn design(&self) -> DesignColumns {
        DesignColumns {
            c1: self.c1.clone(),
            c2: self.c2.clone(),
        }
    }
}

/// Builds the design columns for support `(start, length)` and frequency
/// `frequency` in cycles per length-`len` signal.
pub fn design_columns(
    start: usize,
    length: usize,
    frequency: f64,
    len: usize,
    n: usize,
    k: usize,
) -> Result<DesignColumns> {
    LocalSignalSpec::new(start, length, 1.0, frequency, 0.0)?.validate(len)?;
    if n == 0 || n > len {
        return Err(SwdftError::InvalidWindow { n, len });
    }
    let zeros = vec![Complex64::new(0.0, 0.0); len + 1 - n];
    let mut fitter = Fitter::new(&zeros, len, n, k, Regression::RealPart)?;
    fitter.build(start, length, TAU * frequency / len as f64)?;
    Ok(fitter.design())
}

/// Iterates the `(response, predictor1, predictor2)` triples of a regression.
fn observations<'a>(
    b: &'a [Complex64],
    c1: &'a [Complex64],
    c2: &'a [Complex64],
    regression: Regression,
) -> impl Iterator<Item = (f64, f64, f64)> + 'a {
    let re = b.iter().zip(c1).zip(c2).map(|((b, u), v)| (b.re, u.re, v.re));
    let im = b
        .iter()
        .zip(c1)
        .zip(c2)
        .map(|((b, u), v)| (b.im, u.im, v.im))
        .take(if regression == Regression::Stacked { b.len() } else { 0 });
    re.chain(im)
}

// Gram traces below this are treated as an all-zero design.
const ZERO_DESIGN: f64 = 1e-20;
// det / trace^2 below this switches to the rank-one pseudo-inverse.
const RANK_ONE: f64 = 1e-12;

fn solve_parts(b: &[Complex64], c1: &[Complex64], c2: &[Complex64], regression: Regression) -> BetaSolution {
    let (mut s11, mut s12, mut s22, mut r1, mut r2) = (0.0, 0.0, 0.0, 0.0, 0.0);
    for (y, u, v) in observations(b, c1, c2, regression) {
        s11 += u * u;
        s12 += u * v;
        s22 += v * v;
        r1 += u * y;
        r2 += v * y;
    }
    let trace = s11 + s22;
    if trace <= ZERO_DESIGN {
        return BetaSolution {
            betas: BetaPair { beta1: 0.0, beta2: 0.0 },
            degenerate: true,
        };
    }
    let det = s11 * s22 - s12 * s12;
    let betas = if det > RANK_ONE * trace * trace {
        BetaPair {
            beta1: (s22 * r1 - s12 * r2) / det,
            beta2: (s11 * r2 - s12 * r1) / det,
        }
    } else {
        // Gram ~ trace * v v^T; pinv = v v^T / trace
        let (vx, vy) = if s11 >= s22 { (s11, s12) } else { (s12, s22) };
        let norm = vx.hypot(vy);
        let (vx, vy) = (vx / norm, vy / norm);
        let proj = (vx * r1 + vy * r2) / trace;
        BetaPair {
            beta1: vx * proj,
            beta2: vy * proj,
        }
    };
    BetaSolution {
        betas,
        degenerate: false,
    }
}

fn rss_parts(b: &[Complex64], c1: &[Complex64], c2: &[Complex64], betas: BetaPair, regression: Regression) -> f64 {
    observations(b, c1, c2, regression)
        .map(|(y, u, v)| {
            let r = y - betas.beta1 * u - betas.beta2 * v;
            r * r
        })
        .sum()
}

/// Ordinary least squares of `Re(b)` on `[Re(c1), Re(c2)]`, no intercept.
///
/// Solved through the 2x2 normal equations. A rank-one Gram matrix falls back
/// to the Moore-Penrose pseudo-inverse; an all-zero design returns `(0, 0)`
/// flagged as degenerate.
pub fn solve_betas(b: &[Complex64], d: &DesignColumns) -> Result<BetaSolution> {
    solve_betas_with(b, d, Regression::RealPart)
}

pub fn solve_betas_with(b: &[Complex64], d: &DesignColumns, regression: Regression) -> Result<BetaSolution> {
    if b.len() != d.c1.len() || b.len() != d.c2.len() {
        return Err(SwdftError::InvalidInput(format!(
            "length mismatch: row {}, design {}/{}",
            b.len(),
            d.c1.len(),
            d.c2.len()
        )));
    }
    Ok(solve_parts(b, &d.c1, &d.c2, regression))
}

/// Residual sum of squares of a fit (`MSE_B`).
pub fn residual_sum_squares(b: &[Complex64], d: &DesignColumns, betas: BetaPair, regression: Regression) -> f64 {
    rss_parts(b, &d.c1, &d.c2, betas, regression)
}

/// Sum of squared deviations from the mean (`MSE_A`).
pub fn mean_only_sse(b: &[Complex64], regression: Regression) -> f64 {
    let centered = |vals: &mut dyn Iterator<Item = f64>| -> f64 {
        let v: Vec<f64> = vals.collect();
        if v.is_empty() {
            return 0.0;
        }
        let mean = v.iter().sum::<f64>() / v.len() as f64;
        v.iter().map(|x| (x - mean) * (x - mean)).sum()
    };
    let re = centered(&mut b.iter().map(|c| c.re));
    match regression {
        Regression::RealPart => re,
        Regression::Stacked => re + centered(&mut b.iter().map(|c| c.im)),
    }
}

/// `A = |beta|`, `phi = atan2(-beta2, beta1)` wrapped to `[0, 2 pi)`.
pub fn betas_to_amp_phase(bp: BetaPair) -> (f64, f64) {
    let amplitude = bp.beta1.hypot(bp.beta2);
    if amplitude == 0.0 {
        return (0.0, 0.0);
    }
    (amplitude, wrap_phase((-bp.beta2).atan2(bp.beta1)))
}

/// Row with the largest squared modulus among the candidates; ties go to the
/// smaller `k`.
pub fn select_k_option1(g: &SwdftGrid) -> Result<usize> {
    check_candidates(g.window_size())?;
    let mut best = (f64::NEG_INFINITY, 0);
    for k in candidate_frequencies(g.window_size()) {
        let peak = g.row(k).iter().map(|c| c.norm_sqr()).fold(0.0, f64::max);
        if peak > best.0 {
            best = (peak, k);
        }
    }
    Ok(best.1)
}

/// Row whose best `(S, L)` fit at `f = k` minimizes `MSE_C = MSE_B - MSE_A`.
///
/// Returns `(k*, MSE_C)`; ties go to the smaller `k`.
pub fn select_k_option2(g: &SwdftGrid, cells: &[(usize, usize)], regression: Regression) -> Result<(usize, f64)> {
    let n = g.window_size();
    let len = g.signal_len();
    check_candidates(n)?;
    if cells.is_empty() {
        return Err(SwdftError::Unsupported("empty (S, L) search grid".into()));
    }
    let mut best: Option<(f64, usize)> = None;
    for k in candidate_frequencies(n) {
        let row = g.row(k);
        let mse_a = mean_only_sse(row, regression);
        let mut fitter = Fitter::new(row, len, n, k, regression)?;
        let mut best_b = f64::INFINITY;
        for &(s, l) in cells {
            let (_, rss) = fitter.fit_cycles(s, l, k as f64)?;
            if rss < best_b {
                best_b = rss;
            }
        }
        let mse_c = best_b - mse_a;
        if best.is_none_or(|(c, _)| mse_c < c) {
            best = Some((mse_c, k));
        }
    }
    let (mse_c, k) = best.expect("candidate set is non-empty");
    Ok((k, mse_c))
}

/// Minimizes the inner residual over `f in [k* - 1/2, k* + 1/2]` for fixed
/// `(S, L)`. Returns `(f_hat, rss)`.
pub fn optimize_f(
    row: &[Complex64],
    start: usize,
    length: usize,
    len: usize,
    n: usize,
    k_star: usize,
    opts: &EstimateOptions,
) -> Result<(f64, f64)> {
    LocalSignalSpec::new(start, length, 1.0, 0.0, 0.0)?.validate(len)?;
    let mut fitter = Fitter::new(row, len, n, k_star, opts.regression)?;
    optimize_cell(&mut fitter, start, length, k_star, opts)
}

fn optimize_cell(
    fitter: &mut Fitter<'_>,
    start: usize,
    length: usize,
    k_star: usize,
    opts: &EstimateOptions,
) -> Result<(f64, f64)> {
    let centre = k_star as f64;
    let m = brent_minimize(
        |f| fitter.fit_cycles(start, length, f).map(|(_, rss)| rss),
        centre - 0.5,
        centre + 0.5,
        opts.f_tol,
        opts.max_iter,
    )?;
    Ok((m.x, m.value))
}

/// The `(S, L)` cells searched for a length-`len` signal.
pub fn search_cells(len: usize, opts: &EstimateOptions) -> Result<Vec<(usize, usize)>> {
    if len < 2 {
        return Err(SwdftError::InvalidInput(format!("signal length {len} too short")));
    }
    let (lo, hi) = opts.start_range.unwrap_or((0, len - 2));
    let hi = hi.min(len - 2);
    let min_len = opts.min_length.max(1);
    let mut cells = Vec::new();
    for s in lo..=hi {
        for l in min_len..=(len - s) {
            cells.push((s, l));
        }
    }
    if cells.is_empty() {
        return Err(SwdftError::Unsupported(format!(
            "no (S, L) cell with L >= {min_len} fits in N={len}"
        )));
    }
    match opts.search {
        SearchMode::Exhaustive => Ok(cells),
        SearchMode::Randomized { budget, seed } => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            Ok((0..budget.max(1))
                .map(|_| cells[rng.random_range(0..cells.len())])
                .collect())
        }
    }
}

#[derive(Debug, Clone, Copy)]
struct Candidate {
    rss: f64,
    start: usize,
    length: usize,
    f: f64,
}

impl Candidate {
    fn better_than(&self, other: &Candidate) -> bool {
        // rss is always finite here; the minimizer rejects anything else
        (self.rss, self.start, self.length) < (other.rss, other.start, other.length)
    }
}

/// Single local periodic signal estimation from an observed grid.
pub fn estimate_local_signal(g: &SwdftGrid, opts: &EstimateOptions) -> Result<EstimateResult> {
    let n = g.window_size();
    let len = g.signal_len();
    check_candidates(n)?;
    let cells = search_cells(len, opts)?;

    let (k_star, _) = match opts.k_selection {
        KSelection::Option1 => (select_k_option1(g)?, None),
        KSelection::Option2 => {
            let (k, c) = select_k_option2(g, &cells, opts.regression)?;
            (k, Some(c))
        }
    };
    let row = g.row(k_star);

    let eval = |fitter: &mut Fitter<'_>, (s, l): (usize, usize)| -> Result<Candidate> {
        let (f, rss) = optimize_cell(fitter, s, l, k_star, opts)?;
        Ok(Candidate {
            rss,
            start: s,
            length: l,
            f,
        })
    };
    let results: Vec<Result<Candidate>> = if opts.parallel {
        cells
            .par_iter()
            .map_init(
                || Fitter::new(row, len, n, k_star, opts.regression),
                |fitter, &cell| match fitter {
                    Ok(fitter) => eval(fitter, cell),
                    Err(e) => Err(e.clone()),
                },
            )
            .collect()
    } else {
        let mut fitter = Fitter::new(row, len, n, k_star, opts.regression)?;
        cells.iter().map(|&cell| eval(&mut fitter, cell)).collect()
    };

    // Reduce in cell order so the winner never depends on the schedule.
    let mut best: Option<Candidate> = None;
    for r in results {
        let c = r?;
        if best.as_ref().is_none_or(|b| c.better_than(b)) {
            best = Some(c);
        }
    }
    let best = best.expect("search grid is non-empty");

    let mut fitter = Fitter::new(row, len, n, k_star, opts.regression)?;
    let (sol, rss) = fitter.fit_cycles(best.start, best.length, best.f)?;
    let (amplitude, phase) = betas_to_amp_phase(sol.betas);
    let mse_a = mean_only_sse(row, opts.regression);
    let silent = row.iter().all(|c| c.re == 0.0 && c.im == 0.0);

    Ok(EstimateResult {
        k_star,
        start: best.start,
        length: best.length,
        amplitude,
        frequency: best.f * len as f64 / n as f64,
        cycles_per_window: best.f,
        phase,
        mse_a,
        mse_b: rss,
        mse_c: rss - mse_a,
        degenerate: sol.degenerate || silent,
    })
}
