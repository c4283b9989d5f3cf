//! Metric spaces with a built-in distance-evaluation counter.

use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::model::{Payload, TimedPoint};

/// Matrices above this size skip the exhaustive triangle-inequality check.
pub const TRIANGLE_CHECK_LIMIT: usize = 500;

#[derive(Debug, Clone, PartialEq)]
pub enum MetricKind {
    Euclidean { dimension: usize },
    Matrix(Arc<DistanceMatrix>),
}

/// Symmetric, zero-diagonal distance table stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct DistanceMatrix {
    n: usize,
    data: Vec<f64>,
}

impl DistanceMatrix {
    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.n + j]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> {
        self.data.chunks(self.n.max(1))
    }
}

/// A metric space plus a counter of every distance evaluated through it.
///
/// The counter is atomic so per-guess work can run on several threads and
/// still add up to one total. [`Metric::fork`] gives an independent counter
/// over the same space, which is how verification code keeps its own
/// evaluations out of an algorithm's tally.
#[derive(Debug)]
pub struct Metric {
    kind: MetricKind,
    evaluations: AtomicU64,
}

impl Metric {
    pub fn euclidean(dimension: usize) -> Self {
        Self::from_kind(MetricKind::Euclidean { dimension })
    }

    /// Builds a matrix metric, checking symmetry, the zero diagonal,
    /// non-negativity and (up to [`TRIANGLE_CHECK_LIMIT`] rows) the triangle
    /// inequality over all triples.
    pub fn matrix(rows: Vec<Vec<f64>>) -> Result<Self> {
        let n = rows.len();
        let mut data = Vec::with_capacity(n * n);
        for (i, row) in rows.into_iter().enumerate() {
            if row.len() != n {
                return Err(Error::InvalidMatrix(format!(
                    "row {i} has {} entries, expected {n}",
                    row.len()
                )));
            }
            data.extend(row);
        }
        let m = DistanceMatrix { n, data };
        for i in 0..n {
            if m.get(i, i) != 0.0 {
                return Err(Error::InvalidMatrix(format!("diagonal entry {i} is nonzero")));
            }
            for j in 0..n {
                let d = m.get(i, j);
                if !(d >= 0.0 && d.is_finite()) {
                    return Err(Error::InvalidMatrix(format!("entry ({i},{j}) = {d}")));
                }
                if d != m.get(j, i) {
                    return Err(Error::InvalidMatrix(format!("entries ({i},{j}) and ({j},{i}) differ")));
                }
            }
        }
        if n <= TRIANGLE_CHECK_LIMIT {
            if let Some((a, b, c)) = triangle_violation(&m) {
                return Err(Error::InvalidMatrix(format!(
                    "triangle inequality fails for d({a},{c}) > d({a},{b}) + d({b},{c})"
                )));
            }
        }
        Ok(Self::from_kind(MetricKind::Matrix(Arc::new(m))))
    }

    fn from_kind(kind: MetricKind) -> Self {
        Self {
            kind,
            evaluations: AtomicU64::new(0),
        }
    }

    pub fn kind(&self) -> &MetricKind {
        &self.kind
    }

    /// Same space, fresh counter.
    pub fn fork(&self) -> Self {
        Self::from_kind(self.kind.clone())
    }

    pub fn evaluations(&self) -> u64 {
        self.evaluations.load(Ordering::Relaxed)
    }

    pub fn reset_evaluations(&self) {
        self.evaluations.store(0, Ordering::Relaxed);
    }

    /// Checks that a payload belongs to this space.
    pub fn check(&self, payload: &Payload) -> Result<()> {
        match (&self.kind, payload) {
            (MetricKind::Euclidean { dimension }, Payload::Coords(c)) if c.len() == *dimension => {
                Ok(())
            }
            (MetricKind::Euclidean { dimension }, Payload::Coords(c)) => Err(Error::DimensionMismatch {
                expected: *dimension,
                found: c.len(),
            }),
            (MetricKind::Matrix(m), Payload::Index(i)) if *i < m.len() => Ok(()),
            (MetricKind::Matrix(m), Payload::Index(i)) => Err(Error::IndexOutOfRange {
                index: *i,
                size: m.len(),
            }),
            _ => Err(Error::PayloadMismatch),
        }
    }

    pub fn distance(&self, p: &TimedPoint, q: &TimedPoint) -> Result<f64> {
        self.check(&p.payload)?;
        self.check(&q.payload)?;
        Ok(self.dist(p, q))
    }

    /// Distance between points already known to belong to this space.
    ///
    /// Panics on a foreign payload; the clustering structures check every
    /// point once on entry and then use this.
    pub(crate) fn dist(&self, p: &TimedPoint, q: &TimedPoint) -> f64 {
        self.evaluations.fetch_add(1, Ordering::Relaxed);
        match (&self.kind, &p.payload, &q.payload) {
            (MetricKind::Euclidean { .. }, Payload::Coords(a), Payload::Coords(b)) => a
                .iter()
                .zip(b)
                .map(|(x, y)| (x - y) * (x - y))
                .sum::<f64>()
                .sqrt(),
            (MetricKind::Matrix(m), Payload::Index(i), Payload::Index(j)) => m.get(*i, *j),
            _ => panic!("payload does not belong to the metric space"),
        }
    }
}

fn triangle_violation(m: &DistanceMatrix) -> Option<(usize, usize, usize)> {
    let n = m.len();
    for a in 0..n {
        for c in (a + 1)..n {
            let direct = m.get(a, c);
            for b in 0..n {
                if direct > m.get(a, b) + m.get(b, c) {
                    return Some((a, b, c));
                }
            }
        }
    }
    None
}
