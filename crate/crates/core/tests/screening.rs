use iscore::dataset::LabeledDataset;
use iscore::influence::subset_iscore;
use iscore::screening::{bda_run, bda_search, BdaConfig};
use iscore::seed;
use iscore::simlab::{run_toy_experiment, ToyConfig};
use rand::Rng;

fn null_dataset(rep: u64, n: usize, p: usize) -> LabeledDataset<f64> {
    let mut rng = seed::rng(seed::derive_indexed(77, "null-screening", rep));
    let cols: Vec<Vec<f64>> = (0..p)
        .map(|_| (0..n).map(|_| f64::from(u8::from(rng.gen_bool(0.5)))).collect())
        .collect();
    let y = (0..n).map(|_| f64::from(u8::from(rng.gen_bool(0.5)))).collect();
    LabeledDataset::from_columns(cols, y).unwrap()
}

/// Under the null, dropping a fixed variable from a fixed subset lowers the
/// expected score: the mean over reps falls with the subset size.
#[test]
fn null_score_of_nested_subsets_falls_in_expectation() {
    let reps = 300;
    let mut means = vec![0.0; 5];
    for r in 0..reps {
        let ds = null_dataset(r, 1000, 5);
        for k in 1..=5 {
            let subset: Vec<usize> = (0..k).collect();
            means[k - 1] += subset_iscore(&ds, &subset).unwrap().normalized / reps as f64;
        }
    }
    for w in means.windows(2) {
        assert!(w[0] < w[1], "{means:?}");
    }
}

#[test]
fn bda_trace_steps_shrink_by_one() {
    let ds = null_dataset(0, 500, 8);
    let trace = bda_run(&ds, &[0, 2, 4, 6, 7]).unwrap();
    assert_eq!(trace.steps.len(), 5);
    for (i, (s, _)) in trace.steps.iter().enumerate() {
        assert_eq!(s.len(), 5 - i);
    }
    let best = trace.steps.iter().map(|(_, v)| *v).fold(f64::NEG_INFINITY, f64::max);
    assert_eq!(trace.return_score, best);
}

#[test]
fn bda_search_is_deterministic_across_thread_counts() {
    let ds = null_dataset(1, 400, 10);
    let cfg = BdaConfig {
        subset_size: 4,
        num_draws: 40,
        seed: 5,
    };
    let run = |threads: usize| {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .unwrap()
            .install(|| bda_search(&ds, &cfg).unwrap())
    };
    assert_eq!(run(1), run(3));
}

#[test]
fn toy_report_is_deterministic_across_thread_counts() {
    let cfg = ToyConfig {
        n: 400,
        reps: 6,
        seed: 9,
        ..ToyConfig::default()
    };
    let run = |threads: usize| {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .unwrap()
            .install(|| run_toy_experiment(&cfg).unwrap())
    };
    assert_eq!(run(1), run(4));
}
