use std::f64::consts::PI;

use spherecut::continuous::{estimate_cut_measure, paired_cut_difference, sample_continuous_pairs, SideSet};
use spherecut::sphere::{cap_measure, dot};
use statrs::distribution::{ChiSquared, ContinuousCDF};

fn north(d: usize) -> Vec<f64> {
    let mut v = vec![0.0; d];
    v[0] = 1.0;
    v
}

#[test]
fn retained_fraction_matches_cap_measure() {
    let s = sample_continuous_pairs(3, 2.0 * PI / 3.0, 1_000_000, 2).unwrap();
    let est = s.edge_measure();
    assert!((est.value - 0.25).abs() <= 3.0 * est.stderr, "{est:?}");
    let near_pi = sample_continuous_pairs(3, PI - 1e-3, 100_000, 2).unwrap();
    assert!(near_pi.edge_measure().value < 1e-4);
}

#[test]
fn hemisphere_matches_mean_angle() {
    let s = sample_continuous_pairs(3, 2.0 * PI / 3.0, 1_000_000, 4).unwrap();
    let hemi = SideSet::Hemisphere { normal: north(3) };
    // per pair: (cut indicator) - angle/π has mean zero
    let diffs: Vec<f64> = (0..s.retained())
        .map(|i| {
            let (x, y) = s.pair(i);
            let cut = (hemi.contains(x) != hemi.contains(y)) as u8 as f64;
            cut - s.angles()[i] / PI
        })
        .collect();
    let k = diffs.len() as f64;
    let mean = diffs.iter().sum::<f64>() / k;
    let var = diffs.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (k - 1.0);
    let se = (var / k).sqrt();
    let cut = estimate_cut_measure(&s, &hemi).unwrap();
    let oracle = s.hyperplane_expectation().unwrap();
    assert!((cut.value - oracle.value - mean).abs() < 1e-12);
    assert!(mean.abs() <= 3.0 * se, "{} vs {}", cut.value, oracle.value);
}

#[test]
fn hemisphere_beats_smaller_caps() {
    let s = sample_continuous_pairs(3, 2.0 * PI / 3.0, 1_000_000, 6).unwrap();
    let hemi = SideSet::cap_of_measure(north(3), 0.5).unwrap();
    for measure in [0.3, 0.25, 0.4] {
        let cap = SideSet::cap_of_measure(vec![0.0, 0.6, 0.8], measure).unwrap();
        let diff = paired_cut_difference(&s, &hemi, &cap).unwrap();
        assert!(diff.value >= -3.0 * diff.stderr, "measure {measure}: {diff:?}");
    }
    let self_diff = paired_cut_difference(&s, &hemi, &hemi).unwrap();
    assert_eq!(self_diff.value, 0.0);
}

#[test]
fn retained_angles_follow_sine_density() {
    let (d, theta) = (5, 0.6 * PI);
    let s = sample_continuous_pairs(d, theta, 1_000_000, 12).unwrap();
    let bins = 20;
    let width = (PI - theta) / bins as f64;
    let mut counts = vec![0usize; bins];
    for &a in s.angles() {
        counts[(((a - theta) / width) as usize).min(bins - 1)] += 1;
    }
    let tail = 1.0 - cap_measure(d, theta).unwrap();
    let total = s.retained() as f64;
    let stat: f64 = (0..bins)
        .map(|b| {
            let lo = theta + b as f64 * width;
            let hi = (lo + width).min(PI);
            let p = (cap_measure(d, hi).unwrap() - cap_measure(d, lo).unwrap()) / tail;
            let expected = p * total;
            (counts[b] as f64 - expected).powi(2) / expected
        })
        .sum();
    let critical = ChiSquared::new((bins - 1) as f64).unwrap().inverse_cdf(0.99);
    assert!(stat <= critical, "chi-square {stat} above {critical}");
}

#[test]
fn sampling_ignores_thread_count() {
    let run = |threads| {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .unwrap()
            .install(|| sample_continuous_pairs(4, 2.0, 50_000, 21).unwrap())
    };
    let (a, b) = (run(1), run(4));
    assert_eq!(a.angles(), b.angles());
    for i in 0..a.retained() {
        assert_eq!(a.pair(i), b.pair(i));
    }
}

#[test]
fn cap_unions_and_cell_colorings_are_sets() {
    let s = sample_continuous_pairs(3, 2.0, 20_000, 3).unwrap();
    let union = SideSet::CapUnion(vec![(north(3), 0.5), (vec![0.0, 0.0, 1.0], 0.7)]);
    let (x, _) = s.pair(0);
    let inside = dot(x, &north(3)) >= 0.5f64.cos() || x[2] >= 0.7f64.cos();
    assert_eq!(union.contains(x), inside);
    let p = spherecut::partition::partition_sphere(3, 0.8, Default::default()).unwrap();
    let all_red = SideSet::CellColoring {
        partition: &p,
        red: vec![true; p.n()],
    };
    assert_eq!(estimate_cut_measure(&s, &all_red).unwrap().value, 0.0);
    let wrong = SideSet::CellColoring {
        partition: &p,
        red: vec![true; 3],
    };
    assert!(estimate_cut_measure(&s, &wrong).is_err());
}
