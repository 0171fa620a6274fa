//! Signal families: local periodic signals, sums of them, step functions and
//! seeded Gaussian noise.

use std::f64::consts::TAU;

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha20Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Result, SwdftError};
use crate::transform::RealSignal;

/// Wraps an angle in radians onto `[0, 2 pi)`.
pub fn wrap_phase(phi: f64) -> f64 {
    let w = phi.rem_euclid(TAU);
    // rem_euclid can round up to exactly TAU for tiny negative inputs
    if w >= TAU {
        0.0
    } else {
        w
    }
}

/// Signed circular difference `a - b` folded into `[-pi, pi)`.
pub fn circular_diff(a: f64, b: f64) -> f64 {
    (a - b + std::f64::consts::PI).rem_euclid(TAU) - std::f64::consts::PI
}

/// One local periodic signal: `A cos(2 pi F t / N + phi)` on `t in [S, S+L-1]`, zero elsewhere.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LocalSignalSpec {
    start: usize,
    length: usize,
    amplitude: f64,
    frequency: f64,
    phase: f64,
}

impl LocalSignalSpec {
    /// `frequency` is in cycles per length-`N` signal; `phase` in radians
    /// (stored wrapped to `[0, 2 pi)`).
    pub fn new(start: usize, length: usize, amplitude: f64, frequency: f64, phase: f64) -> Result<Self> {
        if !(amplitude.is_finite() && amplitude >= 0.0) {
            return Err(SwdftError::InvalidSpec(format!(
                "amplitude must be finite and >= 0, got {amplitude}"
            )));
        }
        if !(frequency.is_finite() && frequency >= 0.0) {
            return Err(SwdftError::InvalidSpec(format!(
                "frequency must be finite and >= 0, got {frequency}"
            )));
        }
        if !phase.is_finite() {
            return Err(SwdftError::InvalidSpec("phase must be finite".into()));
        }
        if length == 0 {
            return Err(SwdftError::InvalidSpec("length must be >= 1".into()));
        }
        Ok(Self {
            start,
            length,
            amplitude,
            frequency,
            phase: wrap_phase(phase),
        })
    }

    pub fn start(&self) -> usize {
        self.start
    }

    pub fn length(&self) -> usize {
        self.length
    }

    /// Last index of the support, `S + L - 1`.
    pub fn end(&self) -> usize {
        self.start + self.length - 1
    }

    pub fn amplitude(&self) -> f64 {
        self.amplitude
    }

    pub fn frequency(&self) -> f64 {
        self.frequency
    }

    pub fn phase(&self) -> f64 {
        self.phase
    }

    /// Checks `0 <= S <= N-2` and `1 <= L <= N-S`.
    pub fn validate(&self, len: usize) -> Result<()> {
        if len < 2 || self.start > len - 2 {
            return Err(SwdftError::InvalidSpec(format!(
                "start {} outside 0..={} for N={len}",
                self.start,
                len.saturating_sub(2)
            )));
        }
        if self.length > len - self.start {
            return Err(SwdftError::InvalidSpec(format!(
                "length {} exceeds N - S = {}",
                self.length,
                len - self.start
            )));
        }
        Ok(())
    }

    /// Value of the underlying global signal `g_t` at time `t`.
    pub fn global_value(&self, t: usize, len: usize) -> f64 {
        self.amplitude * (TAU * self.frequency * t as f64 / len as f64 + self.phase).cos()
    }

    fn add_into(&self, out: &mut [f64]) {
        let len = out.len();
        for (t, v) in out.iter_mut().enumerate().take(self.end() + 1).skip(self.start) {
            *v += self.global_value(t, len);
        }
    }
}

pub fn synth_local(spec: &LocalSignalSpec, len: usize) -> Result<RealSignal> {
    spec.validate(len)?;
    let mut x = vec![0.0; len];
    spec.add_into(&mut x);
    RealSignal::new(x)
}

/// Sum of local signals plus iid `N(0, sigma^2)` noise.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CompositeSpec {
    pub components: Vec<LocalSignalSpec>,
    pub len: usize,
    pub sigma: f64,
    pub seed: u64,
}

impl CompositeSpec {
    pub fn validate(&self) -> Result<()> {
        if self.components.is_empty() {
            return Err(SwdftError::InvalidSpec("at least one component required".into()));
        }
        if !(self.sigma.is_finite() && self.sigma >= 0.0) {
            return Err(SwdftError::InvalidSpec(format!(
                "sigma must be >= 0, got {}",
                self.sigma
            )));
        }
        for c in &self.components {
            c.validate(self.len)?;
        }
        Ok(())
    }
}

pub fn synth_composite(c: &CompositeSpec) -> Result<RealSignal> {
    c.validate()?;
    let mut x = vec![0.0; c.len];
    for comp in &c.components {
        comp.add_into(&mut x);
    }
    if c.sigma > 0.0 {
        let mut noise = GaussianNoise::new(c.seed);
        for v in x.iter_mut() {
            *v += c.sigma * noise.next_standard();
        }
    }
    RealSignal::new(x)
}

/// Unit step at `d`: `s_t = 1` for `t >= d`, else 0.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct StepSpec {
    pub len: usize,
    pub d: usize,
}

pub fn synth_step(s: &StepSpec) -> Result<RealSignal> {
    if s.d >= s.len {
        return Err(SwdftError::InvalidSpec(format!(
            "step location {} outside 0..{}",
            s.d, s.len
        )));
    }
    RealSignal::new((0..s.len).map(|t| if t >= s.d { 1.0 } else { 0.0 }).collect())
}

/// Standard normal generator: ChaCha20 stream, 53-bit uniforms, Box-Muller
/// (both variates of each pair are used). Fixed so simulation tables are
/// reproducible bit-for-bit.
#[derive(Debug, Clone)]
pub struct GaussianNoise {
    rng: ChaCha20Rng,
    spare: Option<f64>,
}

impl GaussianNoise {
    pub fn new(seed: u64) -> Self {
        Self {
            rng: ChaCha20Rng::seed_from_u64(seed),
            spare: None,
        }
    }

    // (0, 1]
    fn uniform_open0(&mut self) -> f64 {
        ((self.rng.next_u64() >> 11) + 1) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    pub fn next_standard(&mut self) -> f64 {
        if let Some(z) = self.spare.take() {
            return z;
        }
        let u1 = self.uniform_open0();
        let u2 = self.uniform_open0();
        let r = (-2.0 * u1.ln()).sqrt();
        let theta = TAU * u2;
        self.spare = Some(r * theta.sin());
        r * theta.cos()
    }
}

/// Folds a frequency in cycles per sample onto the principal range `[0, 1/2]`.
pub fn principal_alias(f: f64) -> Result<f64> {
    if !(f.is_finite() && f >= 0.0) {
        return Err(SwdftError::InvalidInput(format!(
            "frequency must be finite and >= 0, got {f}"
        )));
    }
    let folded = (f - f.round()).abs();
    Ok(folded.min(0.5))
}

/// Converts cycles per length-`N` signal to cycles per length-`n` window, `f = nF/N`.
pub fn cycles_per_window(frequency: f64, len: usize, n: usize) -> f64 {
    n as f64 * frequency / len as f64
}
