//! Fixtures shared by the criterion benches.

use swdft_core::signals::{synth_composite, CompositeSpec, LocalSignalSpec};
use swdft_core::RealSignal;

/// Noisy local cosine of length `len`, active on the middle half.
pub fn noisy_local(len: usize, seed: u64) -> RealSignal {
    let spec = LocalSignalSpec::new(len / 4, len / 2, 1.0, len as f64 / 8.0, 1.0).expect("valid spec");
    synth_composite(&CompositeSpec {
        components: vec![spec],
        len,
        sigma: 0.5,
        seed,
    })
    .expect("valid composite")
}

/// The 64-sample study signal: `S = 17`, `L = 31`, `A = 1`, `phi = 1`.
pub fn study_signal(frequency: f64, sigma: f64, seed: u64) -> RealSignal {
    let spec = LocalSignalSpec::new(17, 31, 1.0, frequency, 1.0).expect("valid spec");
    synth_composite(&CompositeSpec {
        components: vec![spec],
        len: 64,
        sigma,
        seed,
    })
    .expect("valid composite")
}
