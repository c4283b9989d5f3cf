use kcenter_lifetimes::harness::{self, Algorithm, QuerySchedule, RunConfig};
use kcenter_lifetimes::io::{matrix_sidecar, read_matrix, read_stream, write_matrix, write_stream};
use kcenter_lifetimes::oracle::{exact_kcenter, radius};
use kcenter_lifetimes::streamgen::{adversarial_quadratic_stream, random_lifetime_stream};
use kcenter_lifetimes::{MetricKind, SixApproxClustering, Solution, TimedPoint, TwoApproxClustering};
use proptest::prelude::*;

#[test]
fn stream_files_replay_identically() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("s.jsonl");
    let g = random_lifetime_stream(80, 3, 9, 17).unwrap();
    write_stream(&path, &g.stream.points).unwrap();
    let back = read_stream(&path).unwrap();
    assert_eq!(back, g.stream.points);

    let mut cfg = RunConfig::new(Algorithm::Six, 3, 0.5);
    cfg.schedule = QuerySchedule::AtTimes(vec![20, 40, 80]);
    let a = harness::run(&cfg, g.stream.points.clone(), g.metric.fork()).unwrap();
    let b = harness::run(&cfg, back, g.metric.fork()).unwrap();
    assert_eq!(a.to_csv(), b.to_csv());
    assert_eq!(a.rows.len(), 3);
}

#[test]
fn matrix_streams_round_trip_through_the_sidecar() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("adv.jsonl");
    let g = adversarial_quadratic_stream(6, 1.0).unwrap();
    let MetricKind::Matrix(table) = g.metric.kind() else {
        panic!("adversarial streams use a matrix")
    };
    write_stream(&path, &g.stream.points).unwrap();
    write_matrix(matrix_sidecar(&path), table).unwrap();
    let metric = read_matrix(matrix_sidecar(&path)).unwrap();
    assert_eq!(metric.kind(), g.metric.kind());

    let mut cfg = RunConfig::new(Algorithm::Two, 2, 1.0);
    cfg.single_guess = Some(1.0);
    let v = harness::verify(&cfg, read_stream(&path).unwrap(), metric).unwrap();
    assert!(v.ok(), "{}", v.summary());
}

fn check(solution: &Solution, k: usize, factor: f64, active: &[TimedPoint], metric: &kcenter_lifetimes::Metric) {
    assert!(solution.centers.len() <= k);
    assert!(solution.centers.iter().all(|c| active.iter().any(|p| p.id == c.id)));
    let r_star = exact_kcenter(metric, active, k).unwrap().radius.unwrap_or(0.0);
    let r = radius(metric, &solution.centers, active).unwrap();
    assert!(r <= factor * r_star + 1e-12, "radius {r} vs optimum {r_star}");
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn two_approx_stays_within_factor(
        n in 3usize..40, life in 2u64..9, k in 1usize..4, eps in 0.25f64..2.0, seed in any::<u64>(),
    ) {
        let g = random_lifetime_stream(n, 2, life, seed).unwrap();
        let oracle = g.metric.fork();
        let mut c = TwoApproxClustering::new(k, eps, g.stream.d_min, g.stream.d_max, g.metric.fork()).unwrap();
        for p in &g.stream.points {
            let t = p.t_arr;
            c.insert(p.clone()).unwrap();
            let active = g.stream.active_at(t);
            check(&c.query(t).unwrap(), k, 2.0 + eps, &active, &oracle);
        }
    }

    #[test]
    fn six_approx_stays_within_factor(
        n in 3usize..40, life in 2u64..9, k in 1usize..4, eps in 0.25f64..2.0, seed in any::<u64>(),
    ) {
        let g = random_lifetime_stream(n, 2, life, seed).unwrap();
        let oracle = g.metric.fork();
        let mut c = SixApproxClustering::new(k, eps, g.stream.d_min, g.stream.d_max, g.metric.fork()).unwrap();
        for p in &g.stream.points {
            let t = p.t_arr;
            c.update(p.clone()).unwrap();
            let active = g.stream.active_at(t);
            check(&c.query(t).unwrap(), k, 6.0 + eps, &active, &oracle);
        }
    }

    #[test]
    fn parallel_dispatch_changes_nothing(n in 5usize..60, seed in any::<u64>()) {
        let g = random_lifetime_stream(n, 2, 7, seed).unwrap();
        for algo in [Algorithm::Two, Algorithm::Six] {
            let mut cfg = RunConfig::new(algo, 2, 1.0);
            let serial = harness::run(&cfg, g.stream.points.clone(), g.metric.fork()).unwrap();
            cfg.parallel = true;
            let parallel = harness::run(&cfg, g.stream.points.clone(), g.metric.fork()).unwrap();
            prop_assert_eq!(serial.to_csv(), parallel.to_csv());
        }
    }
}
