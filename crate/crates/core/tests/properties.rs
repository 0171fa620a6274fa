mod common;

use proptest::prelude::*;

use swdft_core::signals::{principal_alias, synth_composite, synth_local, CompositeSpec, LocalSignalSpec};
use swdft_core::transform::swdft_sliding;

use common::*;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(250))]

    #[test]
    fn column_energy_matches_window((x, n) in signal_and_window()) {
        parseval(x, n)?;
    }

    #[test]
    fn real_input_is_conjugate_symmetric((x, n) in signal_and_window()) {
        conjugate_symmetry(x, n)?;
    }

    #[test]
    fn scaling_commutes((x, n) in signal_and_window(), c in -5.0f64..5.0) {
        scale_equivariance(x, n, c)?;
    }

    #[test]
    fn shifting_moves_columns((x, n) in signal_and_window(), s in 0usize..64) {
        shift_consistency(x, n, s)?;
    }
}

fn component(len: usize) -> impl Strategy<Value = LocalSignalSpec> {
    (0..len - 1)
        .prop_flat_map(move |s| (Just(s), 1..=len - s, 0.0f64..3.0, 0.0f64..(len as f64), 0.0f64..7.0))
        .prop_map(|(s, l, a, f, phi)| LocalSignalSpec::new(s, l, a, f, phi).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn transform_of_sum_is_sum_of_transforms(
        parts in prop::collection::vec(component(64), 1..=4),
        n in prop::sample::select(vec![4usize, 8, 16, 32]),
    ) {
        let spec = CompositeSpec { components: parts.clone(), len: 64, sigma: 0.0, seed: 0 };
        let total = swdft_sliding(&synth_composite(&spec).unwrap(), n).unwrap();
        let mut sum = swdft_sliding(&synth_local(&parts[0], 64).unwrap(), n).unwrap();
        for c in &parts[1..] {
            sum = sum.try_add(&swdft_sliding(&synth_local(c, 64).unwrap(), n).unwrap()).unwrap();
        }
        prop_assert!(total.max_abs_diff(&sum) <= 1e-10);
    }

    #[test]
    fn principal_alias_folds_into_half_band(f in 0.0f64..20.0) {
        let a = principal_alias(f).unwrap();
        prop_assert!((0.0..=0.5).contains(&a));
        let t = 7.0;
        let lhs = (std::f64::consts::TAU * f * t).cos();
        let rhs = (std::f64::consts::TAU * a * t).cos();
        prop_assert!((lhs - rhs).abs() <= 1e-9);
    }
}
