//! Acceptance run: one PASS/FAIL line per criterion on standard output.
//!
//! Run with `cargo test -p swdft-core --test acceptance -- --test-threads=1`
//! to keep the lines in order.

mod common;

use std::f64::consts::{PI, TAU};
use std::io::Write;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use swdft_core::analytic::{compare_closed_form, swdft_global_closed, window_state, ClosedFormCase, State};
use swdft_core::montecarlo::{run_cell, run_study, StudyConfig};
use swdft_core::signals::{
    cycles_per_window, principal_alias, synth_composite, synth_local, synth_step, CompositeSpec, LocalSignalSpec,
    StepSpec,
};
use swdft_core::transform::{swdft_direct, swdft_sliding, RealSignal, SwdftGrid};

/// Writes straight to the process stdout so the line shows without `--nocapture`.
fn report(id: u32, name: &str, pass: bool, detail: &str) {
    let verdict = if pass { "PASS" } else { "FAIL" };
    let line = format!("criterion {id:>2} [{verdict}] {name}: {detail}\n");
    let mut out = std::io::stdout().lock();
    let _ = out.write_all(line.as_bytes());
    let _ = out.flush();
    assert!(pass, "criterion {id} failed: {detail}");
}

fn rel_diff(a: &SwdftGrid, b: &SwdftGrid) -> f64 {
    let scale = a.as_slice().iter().map(|c| c.norm()).fold(1.0, f64::max);
    a.max_abs_diff(b) / scale
}

fn global(len: usize, amplitude: f64, frequency: f64, phase: f64) -> RealSignal {
    synth_local(&LocalSignalSpec::new(0, len, amplitude, frequency, phase).unwrap(), len).unwrap()
}

#[test]
fn c01_sliding_matches_direct() {
    let started = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut worst: f64 = 0.0;
    for i in 0..100 {
        let n = [8, 16, 32, 64][i % 4];
        let len = rng.random_range(n..=512);
        let x = RealSignal::new((0..len).map(|_| rng.random_range(-10.0..10.0)).collect()).unwrap();
        worst = worst.max(rel_diff(&swdft_direct(&x, n).unwrap(), &swdft_sliding(&x, n).unwrap()));
    }
    let mut edge = vec![
        synth_step(&StepSpec { len: 300, d: 0 }).unwrap(),
        synth_step(&StepSpec { len: 300, d: 150 }).unwrap(),
        synth_step(&StepSpec { len: 300, d: 299 }).unwrap(),
        synth_local(&LocalSignalSpec::new(0, 1, 1.0, 3.0, 0.0).unwrap(), 200).unwrap(),
        synth_local(&LocalSignalSpec::new(17, 31, 1.0, 8.0, 1.0).unwrap(), 64).unwrap(),
        synth_local(&LocalSignalSpec::new(31, 64, 2.0, 16.0, 0.0).unwrap(), 128).unwrap(),
        synth_local(&LocalSignalSpec::new(400, 112, 1.0, 256.0, 0.3).unwrap(), 512).unwrap(),
    ];
    edge.push(RealSignal::new(vec![1e6; 512]).unwrap());
    for x in &edge {
        for n in [1, 8, 16, 32, 64] {
            worst = worst.max(rel_diff(&swdft_direct(x, n).unwrap(), &swdft_sliding(x, n).unwrap()));
        }
    }
    let elapsed = started.elapsed();
    report(
        1,
        "sliding equals direct",
        worst <= 1e-9 && elapsed < Duration::from_secs(10),
        &format!("max relative diff {worst:.2e}, {:.2} s", elapsed.as_secs_f64()),
    );
}

#[test]
fn c02_no_leakage_plateau() {
    // Literal target: A^2 n / 2 at k = f inside the support.
    let mut worst_plateau: f64 = 0.0;
    let mut worst_off: f64 = 0.0;
    let mut observed = Vec::new();
    for (n, f, amplitude) in [
        (8usize, 2usize, 1.0),
        (8, 1, 1.5),
        (16, 3, 2.0),
        (16, 5, 1.0),
        (32, 7, 0.5),
    ] {
        let len = 8 * n;
        let spec = LocalSignalSpec::new(n, 4 * n, amplitude, (f * len / n) as f64, 0.7).unwrap();
        let g = swdft_direct(&synth_local(&spec, len).unwrap(), n).unwrap();
        let target = amplitude * amplitude * n as f64 / 2.0;
        for p in g.first_position()..len {
            if window_state(&spec, n, p).unwrap().state != State::Inside {
                continue;
            }
            let at_f = g.get(f, p).norm_sqr();
            if p == spec.end() {
                observed.push(format!("n={n} A={amplitude}: {at_f:.6} vs {target}"));
            }
            worst_plateau = worst_plateau.max((at_f - target).abs());
            for k in 0..n {
                if k != f && k != n - f && 2 * k != n {
                    worst_off = worst_off.max(g.get(k, p).norm_sqr());
                }
            }
        }
    }
    report(
        2,
        "no-leakage plateau equals A^2 n / 2",
        worst_plateau <= 1e-9 && worst_off < 1e-18,
        &format!(
            "max |plateau - A^2 n/2| {worst_plateau:.3e}, max off-frequency {worst_off:.1e}; {}",
            observed.join("; ")
        ),
    );
}

#[test]
fn c03_closed_forms_match_direct() {
    let started = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut worst: f64 = 0.0;
    let mut cases = 0;
    for n in [4usize, 8, 16, 32] {
        let len = 4 * n + 10;
        for _ in 0..12 {
            let length = rng.random_range(n..=len - n);
            let start = rng.random_range(0..=len - length);
            let frequency = if rng.random_bool(0.5) {
                rng.random_range(0..len) as f64
            } else {
                rng.random_range(0.0..len as f64)
            };
            let spec = LocalSignalSpec::new(
                start,
                length,
                rng.random_range(0.1..3.0),
                frequency,
                rng.random_range(0.0..TAU),
            )
            .unwrap();
            for case in [
                ClosedFormCase::Local(spec),
                ClosedFormCase::Global {
                    amplitude: spec.amplitude(),
                    frequency,
                    phase: spec.phase(),
                },
                ClosedFormCase::Step {
                    d: rng.random_range(0..len),
                },
            ] {
                let rows = compare_closed_form(&case, len, n).unwrap();
                worst = rows.iter().map(|r| r.abs_diff()).fold(worst, f64::max);
                cases += 1;
            }
        }
        // k = f = n/2: the conjugate term does not vanish
        let len = 8 * n;
        let frequency = (len / 2) as f64;
        let x = global(len, 1.3, frequency, 0.4);
        let g = swdft_direct(&x, n).unwrap();
        for p in g.first_position()..len {
            let c = swdft_global_closed(1.3, frequency, 0.4, len, n, n / 2, p).unwrap();
            worst = worst.max((c - g.get(n / 2, p)).norm());
            assert!(c.norm() > 1.0);
        }
        cases += 1;
    }
    let elapsed = started.elapsed();
    report(
        3,
        "closed forms match direct transform",
        worst <= 1e-8 && elapsed < Duration::from_secs(30),
        &format!(
            "{cases} cases, max abs diff {worst:.2e}, {:.2} s",
            elapsed.as_secs_f64()
        ),
    );
}

#[test]
fn c04_linearity() {
    let len = 128;
    type Part = (usize, usize, f64, f64, f64);
    let setups: [&[Part]; 4] = [
        &[(10, 40, 1.0, 10.0, 0.0), (70, 40, 2.0, 25.0, 1.0)],
        &[(10, 60, 1.0, 10.0, 0.0), (40, 60, 2.0, 25.0, 1.0)],
        &[
            (0, 30, 1.0, 5.0, 0.0),
            (40, 30, 0.5, 12.0, 2.0),
            (80, 40, 1.5, 30.0, 4.0),
        ],
        &[
            (0, 90, 1.0, 5.0, 0.0),
            (20, 60, 0.5, 12.5, 2.0),
            (50, 70, 1.5, 30.0, 4.0),
        ],
    ];
    let mut worst: f64 = 0.0;
    for parts in setups {
        let components: Vec<LocalSignalSpec> = parts
            .iter()
            .map(|&(s, l, a, f, phi)| LocalSignalSpec::new(s, l, a, f, phi).unwrap())
            .collect();
        let spec = CompositeSpec {
            components: components.clone(),
            len,
            sigma: 0.0,
            seed: 0,
        };
        for n in [8, 16, 32] {
            let total = swdft_sliding(&synth_composite(&spec).unwrap(), n).unwrap();
            let sum = components
                .iter()
                .map(|c| swdft_sliding(&synth_local(c, len).unwrap(), n).unwrap())
                .reduce(|a, b| a.try_add(&b).unwrap())
                .unwrap();
            worst = worst.max(total.max_abs_diff(&sum));
        }
    }
    report(
        4,
        "transform of a sum is the sum of transforms",
        worst <= 1e-10,
        &format!("max abs diff {worst:.2e}"),
    );
}

#[test]
fn c05_aliasing() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let (len, n) = (128usize, 16usize);
    let (mut worst_cos, mut worst_sin, mut worst_fold): (f64, f64, f64) = (0.0, 0.0, 0.0);
    for _ in 0..50 {
        let frequency = rng.random_range(0.0..len as f64);
        let mirror = len as f64 - frequency;
        let folded = principal_alias(frequency / len as f64).unwrap() * len as f64;
        let phase = rng.random_range(0.0..TAU);
        let base = swdft_sliding(&global(len, 1.0, frequency, 0.0), n).unwrap();
        worst_cos = worst_cos.max(base.max_abs_diff(&swdft_sliding(&global(len, 1.0, mirror, 0.0), n).unwrap()));
        worst_cos = worst_cos.max(base.max_abs_diff(&swdft_sliding(&global(len, 1.0, folded, 0.0), n).unwrap()));
        // sin(2 pi F t / N) is the cosine with phase -pi/2
        let sine = swdft_sliding(&global(len, 1.0, frequency, -PI / 2.0), n).unwrap();
        let flipped = swdft_sliding(&global(len, 1.0, mirror, -PI / 2.0), n)
            .unwrap()
            .as_slice()
            .to_vec();
        for (a, b) in sine.as_slice().iter().zip(&flipped) {
            worst_sin = worst_sin.max((a + b).norm());
        }
        let x = global(len, 1.0, frequency, phase);
        let y = global(
            len,
            1.0,
            folded,
            if (frequency / len as f64).fract() > 0.5 {
                -phase
            } else {
                phase
            },
        );
        for (a, b) in x.samples().iter().zip(y.samples()) {
            worst_fold = worst_fold.max((a - b).abs());
        }
    }
    report(
        5,
        "aliased frequencies give identical grids",
        worst_cos <= 1e-10 && worst_sin <= 1e-12 && worst_fold <= 1e-10,
        &format!("cosine {worst_cos:.2e}, sine sign flip {worst_sin:.2e}, fold {worst_fold:.2e}"),
    );
}

#[test]
fn c06_leakage_ordering() {
    // mean energy over window positions of a global cosine, n = 8, N = 80
    let (len, n) = (80usize, 8usize);
    let mut e2 = Vec::new();
    let mut e3 = Vec::new();
    for i in 0..10 {
        let f = 2.0 + 0.1 * i as f64;
        let g = swdft_direct(&global(len, 1.0, f * len as f64 / n as f64, 0.0), n).unwrap();
        let mean = |k: usize| g.row(k).iter().map(|c| c.norm_sqr()).sum::<f64>() / g.positions() as f64;
        e2.push(mean(2));
        e3.push(mean(3));
    }
    let dec = e2.windows(2).all(|w| w[1] < w[0]);
    let inc = e3.windows(2).all(|w| w[1] > w[0]);
    let split = (e2[5] - e3[5]).abs() / e2[5].max(e3[5]);
    report(
        6,
        "leakage shifts energy from k=2 to k=3",
        dec && inc && split <= 0.05,
        &format!(
            "k=2 decreasing {dec}, k=3 increasing {inc}, split at f=2.5 {:.2}%",
            100.0 * split
        ),
    );
}

#[test]
fn c07_noiseless_recovery() {
    let started = Instant::now();
    let cfg = StudyConfig {
        sigma_list: vec![0.0],
        ..StudyConfig::default()
    };
    let mut ok = true;
    let mut notes = Vec::new();
    for n in [16usize, 32] {
        for frequency in [8.0, 11.0] {
            let cell = run_cell(&cfg, n, 0.0, frequency).unwrap();
            let f_true = cycles_per_window(frequency, cfg.len, n);
            for r in &cell.replicates {
                let e = r.estimate.as_ref().expect("replicate succeeded");
                let phase_err = swdft_core::signals::circular_diff(e.phase, cfg.phase).abs();
                ok &= e.start == cfg.start
                    && e.length == cfg.length
                    && (e.amplitude - 1.0).abs() <= 1e-4
                    && (e.cycles_per_window - f_true).abs() <= 1e-3
                    && phase_err <= 1e-3;
            }
            ok &= cell.summary.correct_k_fraction == 1.0;
            notes.push(format!(
                "n={n} F={frequency}: mseA {:.0e} mseS {} mseL {} k {:.2}",
                cell.summary.mse_amplitude,
                cell.summary.mse_start,
                cell.summary.mse_length,
                cell.summary.correct_k_fraction
            ));
        }
    }
    let elapsed = started.elapsed();
    report(
        7,
        "noiseless recovery for n in {16, 32}",
        ok && elapsed < Duration::from_secs(120),
        &format!("{}; {:.1} s", notes.join("; "), elapsed.as_secs_f64()),
    );
}

#[test]
fn c08_leakage_failure_mode() {
    let cfg = StudyConfig {
        sigma_list: vec![0.0],
        ..StudyConfig::default()
    };
    let cell = run_cell(&cfg, 8, 0.0, 11.0).unwrap();
    let s = cell.summary;
    let within = cell.replicates.iter().all(|r| {
        let e = r.estimate.as_ref().expect("replicate succeeded");
        e.start.abs_diff(cfg.start) <= 6 && e.length.abs_diff(cfg.length) <= 6
    });
    report(
        8,
        "n=8, F=11 noiseless misses S and L",
        s.mse_start > 0.0 && s.mse_length > 0.0 && within,
        &format!("mseS {:.2}, mseL {:.2}, within +-6 {within}", s.mse_start, s.mse_length),
    );
}

#[test]
fn c09_noisy_trends() {
    let smoke_started = Instant::now();
    run_study(&StudyConfig {
        reps: 5,
        ..StudyConfig::default()
    })
    .unwrap();
    let smoke = smoke_started.elapsed();

    let cfg = StudyConfig::default();
    let started = Instant::now();
    let rep = run_study(&cfg).unwrap();
    let full = started.elapsed();

    let (lo, hi) = (cfg.sigma_list[0], *cfg.sigma_list.last().unwrap());
    let mut ok = smoke < Duration::from_secs(120) && full < Duration::from_secs(900);
    let mut notes = Vec::new();
    for &n in &cfg.n_list {
        for &frequency in &cfg.f_list {
            let a = rep.cell(n, lo, frequency).unwrap().summary;
            let b = rep.cell(n, hi, frequency).unwrap().summary;
            let cell_ok = b.correct_k_fraction <= a.correct_k_fraction
                && b.mse_amplitude >= a.mse_amplitude
                && b.mean_amplitude >= 1.0;
            ok &= cell_ok;
            notes.push(format!(
                "n={n} F={frequency}: k {:.2}->{:.2}, mseA {:.2}->{:.2}, mean A {:.2}",
                a.correct_k_fraction, b.correct_k_fraction, a.mse_amplitude, b.mse_amplitude, b.mean_amplitude
            ));
        }
    }
    report(
        9,
        "noise degrades k selection and inflates amplitude",
        ok,
        &format!(
            "{}; smoke {:.1} s, full {:.1} s",
            notes.join("; "),
            smoke.as_secs_f64(),
            full.as_secs_f64()
        ),
    );
}

#[test]
fn c10_property_suites() {
    let started = Instant::now();
    let result = common::run_core_properties(250);
    let elapsed = started.elapsed();
    let detail = match &result {
        Ok(trials) => format!("{trials} trials in {:.2} s", elapsed.as_secs_f64()),
        Err(e) => e.clone(),
    };
    report(
        10,
        "transform invariants hold",
        result.as_ref().is_ok_and(|t| *t >= 1000) && elapsed < Duration::from_secs(60),
        &detail,
    );
}
