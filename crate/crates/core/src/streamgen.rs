//! Seeded stream generators and the H-order measurement.
//!
//! Every random quantity comes from its own ChaCha stream (coordinates,
//! lifetimes, block permutations), each seeded from the same `seed`, so a
//! generator called with `n` yields a prefix of what it yields with `2n`
//! and two calls with equal arguments produce identical streams.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::metric::Metric;
use crate::model::{EventStream, Payload, Time, TimedPoint};
use crate::oracle::pairwise_extremes;

const COORD_STREAM: u64 = 1;
const LIFETIME_STREAM: u64 = 2;
const PERMUTATION_STREAM: u64 = 3;

/// Extra lifetime of H-bounded streams beyond the minimum `h + 1`.
pub const H_BOUNDED_SLACK: Time = 16;

/// A generated stream with its metric.
#[derive(Debug)]
pub struct GeneratedStream {
    pub stream: EventStream,
    pub metric: Metric,
    /// H-order guaranteed by construction, when the generator controls it.
    pub declared_h: Option<usize>,
    pub seed: Option<u64>,
}

fn rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut r = ChaCha8Rng::seed_from_u64(seed);
    r.set_stream(stream);
    r
}

/// `n` points uniform in `[0,1]^dim`.
pub fn uniform_payloads(n: usize, dim: usize, seed: u64) -> Vec<Payload> {
    let mut r = rng(seed, COORD_STREAM);
    (0..n)
        .map(|_| Payload::Coords((0..dim).map(|_| r.random::<f64>()).collect()))
        .collect()
}

/// Exact pairwise distance range, or `(1, 1)` below two points.
pub fn observed_bounds(metric: &Metric, points: &[TimedPoint]) -> Result<(f64, f64)> {
    if points.len() < 2 {
        return Ok((1.0, 1.0));
    }
    let probe = metric.fork();
    let (lo, hi) = pairwise_extremes(&probe, points)?;
    if lo <= 0.0 {
        return Err(Error::InvalidParameter(
            "stream contains two points at distance zero".into(),
        ));
    }
    Ok((lo, hi))
}

fn finish(
    points: Vec<TimedPoint>,
    metric: Metric,
    declared_h: Option<usize>,
    seed: Option<u64>,
) -> Result<GeneratedStream> {
    let (d_min, d_max) = observed_bounds(&metric, &points)?;
    Ok(GeneratedStream {
        stream: EventStream {
            points,
            d_min,
            d_max,
        },
        metric,
        declared_h,
        seed,
    })
}

fn check_dim(dim: usize) -> Result<()> {
    if dim == 0 {
        return Err(Error::InvalidParameter("dimension must be at least 1".into()));
    }
    Ok(())
}

/// Point `i` (id `i`) is active during `[i+1, i+1+window)`.
pub fn sliding_window_stream(
    payloads: Vec<Payload>,
    window: Time,
    metric: Metric,
) -> Result<GeneratedStream> {
    if window == 0 {
        return Err(Error::InvalidParameter("window must be at least 1".into()));
    }
    let points = payloads
        .into_iter()
        .enumerate()
        .map(|(i, payload)| {
            let t = i as Time + 1;
            TimedPoint::new(i as u64, payload, t, t + window)
        })
        .collect();
    finish(points, metric, Some(0), None)
}

/// A sliding window over uniform random points.
pub fn sliding_window_random(n: usize, dim: usize, window: Time, seed: u64) -> Result<GeneratedStream> {
    check_dim(dim)?;
    let mut g = sliding_window_stream(uniform_payloads(n, dim, seed), window, Metric::euclidean(dim))?;
    g.seed = Some(seed);
    Ok(g)
}

/// Uniform points, each living `1..=max_life` steps drawn uniformly.
pub fn random_lifetime_stream(n: usize, dim: usize, max_life: Time, seed: u64) -> Result<GeneratedStream> {
    check_dim(dim)?;
    if max_life == 0 {
        return Err(Error::InvalidParameter("max_life must be at least 1".into()));
    }
    let mut lives = rng(seed, LIFETIME_STREAM);
    let points = uniform_payloads(n, dim, seed)
        .into_iter()
        .enumerate()
        .map(|(i, payload)| {
            let t = i as Time + 1;
            TimedPoint::new(i as u64, payload, t, t + lives.random_range(1..=max_life))
        })
        .collect();
    finish(points, Metric::euclidean(dim), None, Some(seed))
}

/// Deletion order follows arrival order except inside consecutive blocks of
/// `h + 1` arrivals, where it is a seeded permutation. Any out-of-order pair
/// therefore lies in one block, fewer than `h` arrivals apart.
pub fn h_bounded_stream(n: usize, h: usize, dim: usize, seed: u64) -> Result<GeneratedStream> {
    let mut perm = rng(seed, PERMUTATION_STREAM);
    h_bounded_with(n, h, dim, seed, |block| block.shuffle(&mut perm))
}

/// Like [`h_bounded_stream`] but every block expires in reverse arrival
/// order, which realizes the largest disorder the block size allows.
pub fn reversed_blocks_stream(n: usize, h: usize, dim: usize, seed: u64) -> Result<GeneratedStream> {
    h_bounded_with(n, h, dim, seed, |block| block.reverse())
}

fn h_bounded_with(
    n: usize,
    h: usize,
    dim: usize,
    seed: u64,
    mut permute: impl FnMut(&mut [usize]),
) -> Result<GeneratedStream> {
    check_dim(dim)?;
    if h >= n {
        return Err(Error::InvalidH { h, n });
    }
    let block = h + 1;
    let life = block as Time + H_BOUNDED_SLACK;
    let mut rank: Vec<usize> = (0..n).collect();
    for chunk in rank.chunks_mut(block) {
        permute(chunk);
    }
    let points = uniform_payloads(n, dim, seed)
        .into_iter()
        .enumerate()
        .map(|(i, payload)| {
            let t_arr = i as Time + 1;
            let t_del = rank[i] as Time + 1 + life;
            TimedPoint::new(i as u64, payload, t_arr, t_del)
        })
        .collect();
    finish(points, Metric::euclidean(dim), Some(h), Some(seed))
}

/// The sequence that makes rebalancing necessary: with reclustering off
/// the points `p_2..p_n` keep being moved between clusters.
///
/// `2n` points over a matrix metric, ids and rows `0..2n`, arriving at
/// times `1..=2n`:
///
/// - `p_1` lives `n + 1` steps;
/// - `p_2..p_n` are `1.5γ` from `p_1`, `0.1γ` apart, and live `2n − 1` steps;
/// - `p_{n+1}..p_{2n}` are `2.5γ` from `p_1` and from each other, `1.5γ`
///   from `p_2..p_n`, and live 2 steps.
pub fn adversarial_quadratic_stream(n: usize, gamma: f64) -> Result<GeneratedStream> {
    if n < 3 {
        return Err(Error::InvalidParameter(format!("adversarial stream needs n >= 3, got {n}")));
    }
    if !(gamma > 0.0 && gamma.is_finite()) {
        return Err(Error::InvalidParameter(format!("gamma must be positive, got {gamma}")));
    }
    let size = 2 * n;
    let group = |i: usize| match i {
        0 => 0,
        i if i < n => 1,
        _ => 2,
    };
    let rows: Vec<Vec<f64>> = (0..size)
        .map(|i| {
            (0..size)
                .map(|j| {
                    if i == j {
                        return 0.0;
                    }
                    let factor = match (group(i), group(j)) {
                        (1, 1) => 0.1,
                        (0, 1) | (1, 0) | (1, 2) | (2, 1) => 1.5,
                        _ => 2.5,
                    };
                    factor * gamma
                })
                .collect()
        })
        .collect();
    let metric = Metric::matrix(rows)?;
    let n_t = n as Time;
    let points = (0..size)
        .map(|i| {
            let t_arr = i as Time + 1;
            let life = match group(i) {
                0 => n_t + 1,
                1 => 2 * n_t - 1,
                _ => 2,
            };
            TimedPoint::indexed(i as u64, i, t_arr, t_arr + life)
        })
        .collect();
    Ok(GeneratedStream {
        stream: EventStream {
            points,
            d_min: 0.1 * gamma,
            d_max: 2.5 * gamma,
        },
        metric,
        declared_h: None,
        seed: None,
    })
}

/// Smallest H for which the stream is H-ordered.
///
/// A pair `p` before `q` in arrival order with `p` expiring no earlier than
/// `q` and `m` arrivals strictly between them forces `H ≥ m + 1`. Quadratic.
pub fn measure_h(stream: &EventStream) -> usize {
    let mut pts: Vec<&TimedPoint> = stream.points.iter().collect();
    pts.sort_by_key(|p| p.t_arr);
    let mut h = 0;
    for i in 0..pts.len() {
        // only gaps larger than the current answer can raise it
        for j in (i + 1 + h)..pts.len() {
            if pts[i].key() > pts[j].key() {
                h = j - i;
            }
        }
    }
    h
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::validate_stream;

    fn brute_h(stream: &EventStream) -> usize {
        let p = &stream.points;
        let mut h = 0;
        for i in 0..p.len() {
            for j in i + 1..p.len() {
                if p[i].key() > p[j].key() {
                    h = h.max(j - i);
                }
            }
        }
        h
    }

    fn is_h_ordered(stream: &EventStream, h: usize) -> bool {
        let p = &stream.points;
        (0..p.len()).all(|i| ((i + 1)..p.len()).all(|j| j - i - 1 < h || p[i].key() < p[j].key()))
    }

    fn lifetimes(g: &GeneratedStream) -> Vec<(Time, Time)> {
        g.stream.points.iter().map(|p| (p.t_arr, p.t_del)).collect()
    }

    #[test]
    fn sliding_window_lifetimes() {
        let g = sliding_window_random(3, 2, 2, 1).unwrap();
        assert_eq!(lifetimes(&g), vec![(1, 3), (2, 4), (3, 5)]);
        assert_eq!(measure_h(&g.stream), 0);
        assert_eq!(measure_h(&sliding_window_random(1, 2, 9, 1).unwrap().stream), 0);
        assert_eq!(measure_h(&sliding_window_random(5, 2, 1, 1).unwrap().stream), 0);
    }

    #[test]
    fn random_lifetimes_are_reproducible() {
        let a = random_lifetime_stream(50, 2, 50, 7).unwrap();
        let b = random_lifetime_stream(50, 2, 50, 7).unwrap();
        assert_eq!(a.stream, b.stream);
        let h = measure_h(&a.stream);
        assert!(h <= 49);
        assert_eq!(h, brute_h(&a.stream));
        assert_eq!(measure_h(&random_lifetime_stream(1, 2, 5, 7).unwrap().stream), 0);
        assert_ne!(a.stream, random_lifetime_stream(50, 2, 50, 8).unwrap().stream);
    }

    #[test]
    fn shorter_streams_are_prefixes() {
        let short = random_lifetime_stream(20, 3, 9, 11).unwrap();
        let long = random_lifetime_stream(40, 3, 9, 11).unwrap();
        assert_eq!(short.stream.points, long.stream.points[..20]);
        let short = h_bounded_stream(20, 4, 2, 3).unwrap();
        let long = h_bounded_stream(40, 4, 2, 3).unwrap();
        assert_eq!(short.stream.points, long.stream.points[..20]);
    }

    #[test]
    fn h_bounded_respects_declared_order() {
        assert_eq!(measure_h(&h_bounded_stream(30, 0, 2, 5).unwrap().stream), 0);
        for h in [1, 3, 7] {
            let g = h_bounded_stream(60, h, 2, 5).unwrap();
            assert!(measure_h(&g.stream) <= h);
        }
        let g = reversed_blocks_stream(10, 9, 2, 5).unwrap();
        assert_eq!(measure_h(&g.stream), 9);
        assert_eq!(h_bounded_stream(5, 5, 2, 1).unwrap_err(), Error::InvalidH { h: 5, n: 5 });
    }

    #[test]
    fn reversed_order_gives_n_minus_one() {
        let n = 12;
        let points: Vec<TimedPoint> = (0..n)
            .map(|i| TimedPoint::at(i, vec![i as f64], i + 1, 2 * n + 5 - i))
            .collect();
        let s = validate_stream(points, &Metric::euclidean(1), 1.0, 100.0).unwrap();
        assert_eq!(measure_h(&s), n as usize - 1);
    }

    #[test]
    fn adversarial_layout() {
        let g = adversarial_quadratic_stream(3, 1.0).unwrap();
        let t_arr: Vec<Time> = g.stream.points.iter().map(|p| p.t_arr).collect();
        let life: Vec<Time> = g.stream.points.iter().map(|p| p.t_del - p.t_arr).collect();
        assert_eq!(t_arr, vec![1, 2, 3, 4, 5, 6]);
        assert_eq!(life, vec![4, 5, 5, 2, 2, 2]);
        let m = &g.metric;
        let p = &g.stream.points;
        assert_eq!(m.distance(&p[0], &p[1]).unwrap(), 1.5);
        assert_eq!(m.distance(&p[1], &p[2]).unwrap(), 0.1);
        assert_eq!(m.distance(&p[0], &p[4]).unwrap(), 2.5);
        assert_eq!(m.distance(&p[3], &p[5]).unwrap(), 2.5);
        assert_eq!(m.distance(&p[2], &p[3]).unwrap(), 1.5);
        assert_eq!(adversarial_quadratic_stream(3, 1.0).unwrap().stream, g.stream);
    }

    #[test]
    fn generators_pass_validation() {
        let gens = [
            sliding_window_random(40, 2, 6, 2).unwrap(),
            random_lifetime_stream(40, 3, 10, 2).unwrap(),
            h_bounded_stream(40, 5, 2, 2).unwrap(),
            adversarial_quadratic_stream(10, 2.0).unwrap(),
        ];
        for g in gens {
            let s = g.stream;
            validate_stream(s.points.clone(), &g.metric, s.d_min, s.d_max).unwrap();
        }
    }

    proptest::proptest! {
        #[test]
        fn measure_h_is_the_exact_minimum(lives in proptest::collection::vec(1u64..30, 1..40)) {
            let points: Vec<TimedPoint> = lives
                .iter()
                .enumerate()
                .map(|(i, l)| TimedPoint::at(i as u64, vec![i as f64], i as u64 + 1, i as u64 + 1 + l))
                .collect();
            let s = EventStream { points, d_min: 1.0, d_max: 100.0 };
            let h = measure_h(&s);
            proptest::prop_assert_eq!(h, brute_h(&s));
            proptest::prop_assert!(is_h_ordered(&s, h));
            if h > 0 {
                proptest::prop_assert!(!is_h_ordered(&s, h - 1));
            }
        }
    }
}
