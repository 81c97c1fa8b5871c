mod common;

use common::oracle::{fos_trace, Oracle};
use common::{orthogonal_dataset, random_dataset, soft};
use fos_core::selector::support_threshold;
use fos_core::{av_test, build_grid, fos_run, Coefficients, Dataset, ModelConstants};
use proptest::prelude::*;

#[test]
fn scripted_orthogonal_trace_matches_oracle() {
    let ds = orthogonal_dataset(20, &[2.0, -1.5, 0.0, 0.4, 0.0], 1.0, 11);
    let grid = build_grid(&ds, 100, 1000.0).unwrap();
    let mut stopped_early = false;
    for c in [0.75, 0.45, 0.3] {
        let k = ModelConstants::new(c, 1.0).unwrap();
        let expected = Oracle::new(&ds).run(&grid, &k);
        let actual = fos_trace(&ds, &grid, &k);
        assert_eq!(actual, expected, "c = {c}");
        stopped_early |= expected.r_tilde_index < grid.len();
    }
    assert!(stopped_early, "script should exercise a rejection");
}

#[test]
fn strong_orthogonal_signal_is_recovered() {
    // ||X beta||^2 / n = 5 with two active features
    let b = 2.5f64.sqrt();
    let ds = orthogonal_dataset(20, &[b, 0.0, -b, 0.0, 0.0], 0.0, 3);
    let grid = build_grid(&ds, 100, 1000.0).unwrap();
    let report = fos_run(&ds, &grid, &ModelConstants::default(), 10_000).unwrap();
    assert_eq!(report.support, vec![1, 3]);
}

#[test]
fn orthogonal_response_gives_degenerate_grid() {
    let x = common::orthogonal_design(6, 2, 5);
    // the constant vector is orthogonal to every centered column
    let ds = Dataset::from_standardized(x, vec![1.0; 6]).unwrap();
    assert!(matches!(build_grid(&ds, 10, 100.0), Err(fos_core::Error::DegenerateGrid { .. })));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn report_invariants(n in 10usize..40, p in 2usize..30, seed in any::<u64>()) {
        let ds = random_dataset(n, p, seed);
        let k = ModelConstants::default();
        let grid = build_grid(&ds, 40, 500.0).unwrap();
        let report = fos_run(&ds, &grid, &k, 10_000).unwrap();
        let cutoff = support_threshold(report.r_tilde, &k, n);
        prop_assert_eq!(report.threshold, cutoff);
        let expected: Vec<usize> = (1..=p).filter(|&j| report.beta_tilde.0[j - 1].abs() >= cutoff).collect();
        prop_assert_eq!(&report.support, &expected);
        prop_assert_eq!(report.r_tilde, grid.get(report.r_tilde_index - 1));
        if report.path_exhausted {
            prop_assert_eq!(report.r_tilde_index, grid.len());
        } else {
            // stops right after the first rejection
            prop_assert_eq!(report.r_tilde_index, report.stats_it() - 1);
            let outcomes: Vec<bool> = report.per_grid.iter().map(|s| s.test_passed.unwrap()).collect();
            prop_assert!(outcomes[..outcomes.len() - 1].iter().all(|&t| t));
            prop_assert!(!outcomes[outcomes.len() - 1]);
        }
        for step in &report.per_grid {
            prop_assert!(step.max_iters_hit || step.trace.final_gap <= step.gap_bound);
        }
        let again = fos_run(&ds, &grid, &k, 10_000).unwrap();
        prop_assert_eq!(again.beta_tilde, report.beta_tilde);
        prop_assert_eq!(again.per_grid, report.per_grid);
    }

    #[test]
    fn exact_orthogonal_path_never_rejects(
        n in 10usize..40,
        seed in any::<u64>(),
        beta in proptest::collection::vec(-3.0f64..3.0, 5),
    ) {
        // |T_a(z) - T_b(z)| <= |a - b| so every comparison stays below (r_s + r_k) / 2n
        let ds = orthogonal_dataset(n, &beta, 1.0, seed);
        let grid = build_grid(&ds, 30, 1000.0).unwrap();
        let z: Vec<f64> = ds.xty().iter().map(|v| v / n as f64).collect();
        let path: Vec<Coefficients> = grid
            .values()
            .iter()
            .map(|r| Coefficients(soft(&z, r / (2.0 * n as f64))))
            .collect();
        for s in 2..=grid.len() {
            prop_assert!(av_test(&path, &grid, s, &ModelConstants::default(), n).unwrap());
        }
    }
}
