//! Randomized invariants shared by the property suite and the acceptance run.

#![allow(dead_code)]

use num_complex::Complex64;
use proptest::prelude::*;
use proptest::test_runner::{Config, TestCaseError, TestRng, TestRunner};

use swdft_core::transform::{dft, swdft_sliding, RealSignal};

/// `(signal, n)` with `1 <= n <= N <= 96`.
pub fn signal_and_window() -> impl Strategy<Value = (Vec<f64>, usize)> {
    (1usize..=96).prop_flat_map(|len| (prop::collection::vec(-10.0f64..10.0, len), 1..=len))
}

fn close(a: Complex64, b: Complex64, tol: f64) -> bool {
    (a - b).norm() <= tol * (1.0 + a.norm().max(b.norm()))
}

/// Each column carries the energy of its window.
pub fn parseval(x: Vec<f64>, n: usize) -> Result<(), TestCaseError> {
    let sig = RealSignal::new(x.clone()).unwrap();
    let g = swdft_sliding(&sig, n).unwrap();
    for p in g.first_position()..g.signal_len() {
        let energy: f64 = g.column(p).iter().map(|c| c.norm_sqr()).sum();
        let window: f64 = x[p + 1 - n..=p].iter().map(|v| v * v).sum();
        prop_assert!(
            (energy - window).abs() <= 1e-9 * (1.0 + window),
            "p={p}: {energy} vs {window}"
        );
    }
    let full: f64 = dft(&sig).iter().map(|c| c.norm_sqr()).sum();
    let total: f64 = x.iter().map(|v| v * v).sum();
    prop_assert!((full - total).abs() <= 1e-9 * (1.0 + total));
    Ok(())
}

/// Real input gives `a[n-k] = conj(a[k])`.
pub fn conjugate_symmetry(x: Vec<f64>, n: usize) -> Result<(), TestCaseError> {
    let g = swdft_sliding(&RealSignal::new(x).unwrap(), n).unwrap();
    for k in 0..n {
        let mirror = (n - k) % n;
        for p in g.first_position()..g.signal_len() {
            prop_assert!(close(g.get(mirror, p), g.get(k, p).conj(), 1e-9), "k={k} p={p}");
        }
    }
    Ok(())
}

pub fn scale_equivariance(x: Vec<f64>, n: usize, c: f64) -> Result<(), TestCaseError> {
    let sig = RealSignal::new(x).unwrap();
    let g = swdft_sliding(&sig, n).unwrap();
    let gs = swdft_sliding(&sig.scaled(c).unwrap(), n).unwrap();
    for (a, b) in g.as_slice().iter().zip(gs.as_slice()) {
        prop_assert!(close(a * c, *b, 1e-9));
    }
    Ok(())
}

/// Dropping the first `s` samples shifts columns by `s`, and every column is
/// the DFT of its window.
pub fn shift_consistency(x: Vec<f64>, n: usize, s: usize) -> Result<(), TestCaseError> {
    let s = s % (x.len() - n + 1);
    let g = swdft_sliding(&RealSignal::new(x.clone()).unwrap(), n).unwrap();
    let h = swdft_sliding(&RealSignal::new(x[s..].to_vec()).unwrap(), n).unwrap();
    for p in h.first_position()..h.signal_len() {
        for k in 0..n {
            prop_assert!(close(h.get(k, p), g.get(k, p + s), 1e-9), "k={k} p={p} s={s}");
        }
    }
    let p = g.signal_len() - 1;
    let window = dft(&RealSignal::new(x[p + 1 - n..=p].to_vec()).unwrap());
    for (k, w) in window.iter().enumerate() {
        prop_assert!(close(g.get(k, p), *w, 1e-9));
    }
    Ok(())
}

/// Runs the four invariants for `cases` trials each and returns the number of
/// trials actually executed.
pub fn run_core_properties(cases: u32) -> Result<u32, String> {
    let cfg = Config {
        cases,
        failure_persistence: None,
        ..Config::default()
    };
    // a runner's case budget is shared across `run` calls, so each property gets its own
    let runner = || TestRunner::new_with_rng(cfg.clone(), TestRng::deterministic_rng(cfg.rng_algorithm));
    let trials = std::cell::Cell::new(0u32);
    let count = || trials.set(trials.get() + 1);
    runner()
        .run(&signal_and_window(), |(x, n)| {
            count();
            parseval(x, n)
        })
        .map_err(|e| format!("parseval: {e}"))?;
    runner()
        .run(&signal_and_window(), |(x, n)| {
            count();
            conjugate_symmetry(x, n)
        })
        .map_err(|e| format!("conjugate symmetry: {e}"))?;
    runner()
        .run(&(signal_and_window(), -5.0f64..5.0), |((x, n), c)| {
            count();
            scale_equivariance(x, n, c)
        })
        .map_err(|e| format!("scale equivariance: {e}"))?;
    runner()
        .run(&(signal_and_window(), 0usize..64), |((x, n), s)| {
            count();
            shift_consistency(x, n, s)
        })
        .map_err(|e| format!("shift consistency: {e}"))?;
    Ok(trials.get())
}
