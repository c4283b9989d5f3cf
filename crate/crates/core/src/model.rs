//! Points with lifetimes, the deletion order, and validated event streams.

use std::cmp::Reverse;
use std::collections::{BinaryHeap, HashSet};

use crate::error::{Error, Result};
use crate::metric::Metric;

pub type PointId = u64;
pub type Time = u64;

/// Where a point lives in its metric space.
#[derive(Debug, Clone, PartialEq)]
pub enum Payload {
    /// Coordinates for the Euclidean metric.
    Coords(Vec<f64>),
    /// Row of a distance matrix.
    Index(usize),
}

/// A metric-space element that is active during `[t_arr, t_del)`.
#[derive(Debug, Clone, PartialEq)]
pub struct TimedPoint {
    pub id: PointId,
    pub payload: Payload,
    pub t_arr: Time,
    pub t_del: Time,
}

impl TimedPoint {
    pub fn new(id: PointId, payload: Payload, t_arr: Time, t_del: Time) -> Self {
        Self {
            id,
            payload,
            t_arr,
            t_del,
        }
    }

    /// A Euclidean point.
    pub fn at(id: PointId, coords: impl Into<Vec<f64>>, t_arr: Time, t_del: Time) -> Self {
        Self::new(id, Payload::Coords(coords.into()), t_arr, t_del)
    }

    /// A point of a matrix metric, addressed by its row.
    pub fn indexed(id: PointId, index: usize, t_arr: Time, t_del: Time) -> Self {
        Self::new(id, Payload::Index(index), t_arr, t_del)
    }

    pub fn key(&self) -> DeletionKey {
        DeletionKey {
            t_del: self.t_del,
            t_arr: self.t_arr,
        }
    }

    pub fn is_active_at(&self, t: Time) -> bool {
        self.t_arr <= t && t < self.t_del
    }
}

/// Total order on points by deletion time, ties broken by arrival time.
///
/// Field order matters: the derived `Ord` is lexicographic.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct DeletionKey {
    pub t_del: Time,
    pub t_arr: Time,
}

/// Min-priority queue of handles keyed by [`DeletionKey`].
///
/// The handle is whatever the owner uses to reach a point's entries in its
/// own structures in constant time (an arena slot, typically).
#[derive(Debug, Clone)]
pub struct DeletionQueue<H: Ord> {
    heap: BinaryHeap<Reverse<(DeletionKey, H)>>,
}

impl<H: Ord> Default for DeletionQueue<H> {
    fn default() -> Self {
        Self {
            heap: BinaryHeap::new(),
        }
    }
}

impl<H: Ord + Copy> DeletionQueue<H> {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, key: DeletionKey, handle: H) {
        self.heap.push(Reverse((key, handle)));
    }

    pub fn peek(&self) -> Option<(DeletionKey, H)> {
        self.heap.peek().map(|Reverse(entry)| *entry)
    }

    pub fn pop(&mut self) -> Option<(DeletionKey, H)> {
        self.heap.pop().map(|Reverse(entry)| entry)
    }

    /// Pops the minimum entry if its deletion time is at most `t`.
    pub fn pop_expired(&mut self, t: Time) -> Option<(DeletionKey, H)> {
        match self.peek() {
            Some((key, _)) if key.t_del <= t => self.pop(),
            _ => None,
        }
    }

    pub fn len(&self) -> usize {
        self.heap.len()
    }

    pub fn is_empty(&self) -> bool {
        self.heap.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (DeletionKey, H)> + '_ {
        self.heap.iter().map(|Reverse(entry)| *entry)
    }
}

/// An arrival-ordered stream whose pairwise distances are known to lie in
/// `[d_min, d_max]`.
#[derive(Debug, Clone, PartialEq)]
pub struct EventStream {
    pub points: Vec<TimedPoint>,
    pub d_min: f64,
    pub d_max: f64,
}

impl EventStream {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// The first `n` arrivals, keeping the declared bounds (still valid for a subset).
    pub fn prefix(&self, n: usize) -> EventStream {
        EventStream {
            points: self.points[..n.min(self.points.len())].to_vec(),
            d_min: self.d_min,
            d_max: self.d_max,
        }
    }

    /// Largest number of simultaneously active points.
    pub fn max_concurrent(&self) -> usize {
        let mut deletions: BinaryHeap<Reverse<Time>> = BinaryHeap::new();
        let mut best = 0;
        for p in &self.points {
            while deletions.peek().is_some_and(|Reverse(t)| *t <= p.t_arr) {
                deletions.pop();
            }
            deletions.push(Reverse(p.t_del));
            best = best.max(deletions.len());
        }
        best
    }

    /// Points active at time `t`.
    pub fn active_at(&self, t: Time) -> Vec<TimedPoint> {
        self.points
            .iter()
            .filter(|p| p.is_active_at(t))
            .cloned()
            .collect()
    }
}

/// Knobs for [`validate_stream_with`].
#[derive(Debug, Clone, Copy)]
pub struct ValidateOptions {
    /// Pairwise distances are checked only for streams up to this length.
    pub pairwise_check_limit: usize,
}

impl Default for ValidateOptions {
    fn default() -> Self {
        Self {
            pairwise_check_limit: 2000,
        }
    }
}

pub fn validate_stream(
    points: Vec<TimedPoint>,
    metric: &Metric,
    d_min: f64,
    d_max: f64,
) -> Result<EventStream> {
    validate_stream_with(points, metric, d_min, d_max, ValidateOptions::default())
}

/// Sorts `points` by arrival and checks every stream-level precondition the
/// clustering structures rely on.
pub fn validate_stream_with(
    mut points: Vec<TimedPoint>,
    metric: &Metric,
    d_min: f64,
    d_max: f64,
    options: ValidateOptions,
) -> Result<EventStream> {
    if !(d_min > 0.0 && d_min <= d_max && d_max.is_finite()) {
        return Err(Error::InvalidBounds { d_min, d_max });
    }
    points.sort_by_key(|p| p.t_arr);
    let mut ids = HashSet::with_capacity(points.len());
    for (i, p) in points.iter().enumerate() {
        if p.t_arr >= p.t_del {
            return Err(Error::InvertedLifetime {
                id: p.id,
                t_arr: p.t_arr,
                t_del: p.t_del,
            });
        }
        if i > 0 && points[i - 1].t_arr == p.t_arr {
            return Err(Error::DuplicateArrival { t_arr: p.t_arr });
        }
        if !ids.insert(p.id) {
            return Err(Error::DuplicateId { id: p.id });
        }
        metric.check(&p.payload)?;
    }
    if points.len() <= options.pairwise_check_limit {
        let probe = metric.fork();
        for (i, a) in points.iter().enumerate() {
            for b in &points[i + 1..] {
                let distance = probe.distance(a, b)?;
                if distance < d_min || distance > d_max {
                    return Err(Error::DistanceOutOfRange {
                        a: a.id,
                        b: b.id,
                        distance,
                        d_min,
                        d_max,
                    });
                }
            }
        }
    }
    Ok(EventStream {
        points,
        d_min,
        d_max,
    })
}
