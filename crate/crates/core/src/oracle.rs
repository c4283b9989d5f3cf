//! Exact and greedy k-center computations on explicit point sets.

use itertools::Itertools;

use crate::error::{Error, Result};
use crate::metric::Metric;
use crate::model::TimedPoint;

/// Default cap on the number of points [`exact_kcenter`] will enumerate over.
pub const DEFAULT_ENUMERATION_CAP: usize = 16;

/// A set of at most `k` centers.
#[derive(Debug, Clone, PartialEq)]
pub struct Solution {
    pub centers: Vec<TimedPoint>,
    /// Radius over the evaluated point set; `None` when the producer did not
    /// evaluate it (the streaming algorithms do not keep the full active set).
    pub radius: Option<f64>,
    /// Guess that produced the centers, for solutions coming from a ladder.
    pub guess_used: Option<f64>,
}

impl Solution {
    pub fn empty() -> Self {
        Self {
            centers: Vec::new(),
            radius: Some(0.0),
            guess_used: None,
        }
    }

    pub fn is_empty(&self) -> bool {
        self.centers.is_empty()
    }

    pub fn center_ids(&self) -> Vec<u64> {
        self.centers.iter().map(|c| c.id).collect()
    }

    /// Radius of these centers over `points`; zero for an empty point set.
    pub fn evaluate(&self, metric: &Metric, points: &[TimedPoint]) -> Result<f64> {
        if points.is_empty() {
            return Ok(0.0);
        }
        radius(metric, &self.centers, points)
    }
}

/// `max_{p ∈ points} min_{c ∈ centers} d(p, c)`.
pub fn radius(metric: &Metric, centers: &[TimedPoint], points: &[TimedPoint]) -> Result<f64> {
    if centers.is_empty() {
        return Err(Error::EmptyCenters);
    }
    if points.is_empty() {
        return Err(Error::EmptyPoints);
    }
    let mut worst = 0.0f64;
    for p in points {
        let mut nearest = f64::INFINITY;
        for c in centers {
            nearest = nearest.min(metric.distance(p, c)?);
        }
        worst = worst.max(nearest);
    }
    Ok(worst)
}

pub fn exact_kcenter(metric: &Metric, points: &[TimedPoint], k: usize) -> Result<Solution> {
    exact_kcenter_with_cap(metric, points, k, DEFAULT_ENUMERATION_CAP)
}

/// Optimal k-center by enumerating every center set of size `min(k, n)`.
///
/// Among optimal sets the one whose sorted id tuple is lexicographically
/// smallest wins.
pub fn exact_kcenter_with_cap(
    metric: &Metric,
    points: &[TimedPoint],
    k: usize,
    cap: usize,
) -> Result<Solution> {
    if k == 0 {
        return Err(Error::InvalidK);
    }
    if points.len() > cap {
        return Err(Error::TooLargeForEnumeration {
            n: points.len(),
            cap,
        });
    }
    let mut sorted: Vec<&TimedPoint> = points.iter().collect();
    sorted.sort_by_key(|p| p.id);
    let n = sorted.len();
    if n <= k {
        return Ok(Solution {
            centers: sorted.into_iter().cloned().collect(),
            radius: Some(0.0),
            guess_used: None,
        });
    }

    let mut table = vec![0.0; n * n];
    for i in 0..n {
        for j in (i + 1)..n {
            let d = metric.distance(sorted[i], sorted[j])?;
            table[i * n + j] = d;
            table[j * n + i] = d;
        }
    }

    let mut best: Option<(f64, Vec<usize>)> = None;
    for combo in (0..n).combinations(k) {
        let r = (0..n)
            .map(|p| {
                combo
                    .iter()
                    .map(|&c| table[p * n + c])
                    .fold(f64::INFINITY, f64::min)
            })
            .fold(0.0, f64::max);
        if best.as_ref().is_none_or(|(b, _)| r < *b) {
            best = Some((r, combo));
        }
    }
    let (r, combo) = best.expect("at least one combination when n > k >= 1");
    Ok(Solution {
        centers: combo.into_iter().map(|i| sorted[i].clone()).collect(),
        radius: Some(r),
        guess_used: None,
    })
}

/// Outcome of [`greedy_cover`].
#[derive(Debug, Clone, PartialEq)]
pub enum Cover {
    Centers(Solution),
    TooMany,
}

/// Single-pass threshold covering: a point becomes a center when it is
/// farther than `threshold` from every center picked so far.
///
/// Scans in the given order and gives up as soon as more than `k` centers
/// are needed.
pub fn greedy_cover<'a, I>(metric: &Metric, points: I, threshold: f64, k: usize) -> Result<Cover>
where
    I: IntoIterator<Item = &'a TimedPoint>,
    I::IntoIter: Clone,
{
    let points = points.into_iter();
    let mut centers: Vec<TimedPoint> = Vec::new();
    for q in points.clone() {
        let mut far = true;
        for c in &centers {
            if metric.distance(q, c)? <= threshold {
                far = false;
                break;
            }
        }
        if far {
            centers.push(q.clone());
            if centers.len() > k {
                return Ok(Cover::TooMany);
            }
        }
    }
    let evaluated: Vec<TimedPoint> = points.cloned().collect();
    let r = if evaluated.is_empty() {
        0.0
    } else {
        radius(metric, &centers, &evaluated)?
    };
    Ok(Cover::Centers(Solution {
        centers,
        radius: Some(r),
        guess_used: None,
    }))
}

/// Minimum and maximum pairwise distance by exhaustive scan.
pub fn pairwise_extremes(metric: &Metric, points: &[TimedPoint]) -> Result<(f64, f64)> {
    if points.len() < 2 {
        return Err(Error::TooFewPoints(points.len()));
    }
    let mut lo = f64::INFINITY;
    let mut hi = 0.0f64;
    for (i, a) in points.iter().enumerate() {
        for b in &points[i + 1..] {
            let d = metric.distance(a, b)?;
            lo = lo.min(d);
            hi = hi.max(d);
        }
    }
    Ok((lo, hi))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn line(xs: &[f64]) -> Vec<TimedPoint> {
        xs.iter()
            .enumerate()
            .map(|(i, &x)| TimedPoint::at(i as u64, vec![x], i as u64 + 1, 100))
            .collect()
    }

    #[test]
    fn radius_examples() {
        let m = Metric::euclidean(1);
        let pts = line(&[0.0, 3.0]);
        assert_eq!(radius(&m, &pts[..1], &pts).unwrap(), 3.0);
        assert_eq!(radius(&m, &pts, &pts).unwrap(), 0.0);
        let pts = line(&[0.0, 4.0, 10.0]);
        let centers = [pts[0].clone(), pts[2].clone()];
        assert_eq!(radius(&m, &centers, &pts).unwrap(), 4.0);
        assert_eq!(radius(&m, &[], &pts).unwrap_err(), Error::EmptyCenters);
        assert_eq!(radius(&m, &centers, &[]).unwrap_err(), Error::EmptyPoints);
    }

    #[test]
    fn exact_examples() {
        let m = Metric::euclidean(1);
        let s = exact_kcenter(&m, &line(&[0.0, 10.0]), 2).unwrap();
        assert_eq!(s.radius, Some(0.0));
        let s = exact_kcenter(&m, &line(&[0.0, 1.0, 2.0]), 1).unwrap();
        assert_eq!((s.center_ids(), s.radius), (vec![1], Some(1.0)));
        let s = exact_kcenter(&m, &line(&[0.0, 4.0, 10.0]), 2).unwrap();
        assert_eq!(s.radius, Some(4.0));
        // {0,10} and {4,10} both reach 4; ids (0,2) sort first
        assert_eq!(s.center_ids(), vec![0, 2]);
    }

    #[test]
    fn exact_respects_cap() {
        let m = Metric::euclidean(1);
        let pts = line(&[0.0, 1.0, 2.0, 3.0]);
        assert_eq!(
            exact_kcenter_with_cap(&m, &pts, 1, 3).unwrap_err(),
            Error::TooLargeForEnumeration { n: 4, cap: 3 }
        );
    }

    #[test]
    fn greedy_examples() {
        let m = Metric::euclidean(1);
        let none: Vec<TimedPoint> = Vec::new();
        match greedy_cover(&m, &none, 4.0, 1).unwrap() {
            Cover::Centers(s) => assert!(s.is_empty() && s.radius == Some(0.0)),
            Cover::TooMany => panic!(),
        }
        match greedy_cover(&m, &line(&[0.0, 1.0]), 4.0, 1).unwrap() {
            Cover::Centers(s) => assert_eq!(s.center_ids(), vec![0]),
            Cover::TooMany => panic!(),
        }
        assert_eq!(greedy_cover(&m, &line(&[0.0, 5.0]), 4.0, 1).unwrap(), Cover::TooMany);
    }

    #[test]
    fn extremes() {
        let m = Metric::euclidean(1);
        assert_eq!(pairwise_extremes(&m, &line(&[0.0, 3.0])).unwrap(), (3.0, 3.0));
        assert_eq!(pairwise_extremes(&m, &line(&[0.0, 1.0, 10.0])).unwrap(), (1.0, 10.0));
        assert_eq!(pairwise_extremes(&m, &line(&[2.0, 2.0])).unwrap(), (0.0, 0.0));
        assert_eq!(pairwise_extremes(&m, &line(&[2.0])).unwrap_err(), Error::TooFewPoints(1));
    }
}
