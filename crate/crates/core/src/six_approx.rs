//! Space-efficient (6+ε)-approximate k-center for points with known lifetimes.
//!
//! Each guess γ keeps up to `k+1` *attractors*, pairwise farther than 2γ
//! apart, and for each of them a *representative*: the latest-expiring point
//! that arrived after the attractor within 2γ of it. Representatives outlive
//! the attractors that chose them and are then called orphans. When a new
//! attractor would make `k+2`, the earliest-expiring attractor is dropped,
//! and with `k+1` attractors any representative expiring before all of them
//! is dropped as well. Queries run a greedy 2γ covering over the stored
//! representatives of the smallest guess with at most `k` attractors.
//!
//! Nothing here keeps the full active set; the storage per guess is bounded
//! by `k` plus how far the stream is from expiring in arrival order.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::ladder::GuessLadder;
use crate::metric::Metric;
use crate::model::{PointId, Time, TimedPoint};
use crate::oracle::Solution;

#[derive(Debug, Clone)]
struct Attractor {
    point: TimedPoint,
    rep: PointId,
}

#[derive(Debug, Clone)]
struct Representative {
    point: TimedPoint,
    /// `None` once the attractor has left.
    attractor: Option<PointId>,
}

#[derive(Debug, Clone)]
struct GuessState {
    gamma: f64,
    threshold: f64,
    attractors: Vec<Attractor>,
    reps: Vec<Representative>,
    ops: u64,
    peak_stored: usize,
}

impl GuessState {
    fn new(gamma: f64) -> Self {
        Self {
            gamma,
            threshold: 2.0 * gamma,
            attractors: Vec::new(),
            reps: Vec::new(),
            ops: 0,
            peak_stored: 0,
        }
    }

    fn stored(&self) -> usize {
        self.attractors.len() + self.reps.len()
    }

    fn purge(&mut self, t: Time) {
        self.ops += self.stored() as u64;
        let mut gone = Vec::new();
        self.attractors.retain(|a| {
            let keep = a.point.t_del > t;
            if !keep {
                gone.push(a.point.id);
            }
            keep
        });
        self.reps.retain(|r| r.point.t_del > t);
        if !gone.is_empty() {
            for r in &mut self.reps {
                if r.attractor.is_some_and(|a| gone.contains(&a)) {
                    r.attractor = None;
                }
            }
        }
    }

    fn insert(&mut self, metric: &Metric, k: usize, p: &TimedPoint) {
        let key = p.key();
        let mut chosen: Option<usize> = None;
        let mut any_close = false;
        for (i, a) in self.attractors.iter().enumerate() {
            self.ops += 1;
            if metric.dist(&a.point, p) > self.threshold {
                continue;
            }
            any_close = true;
            let rep_key = self
                .reps
                .iter()
                .find(|r| r.point.id == a.rep)
                .map(|r| r.point.key());
            // a representative dropped by cleanup cannot beat anything
            let eligible = rep_key.is_none_or(|rk| rk < key);
            if eligible && chosen.is_none_or(|c| a.point.id < self.attractors[c].point.id) {
                chosen = Some(i);
            }
        }

        if !any_close {
            self.ops += 1;
            self.attractors.push(Attractor {
                point: p.clone(),
                rep: p.id,
            });
            self.reps.push(Representative {
                point: p.clone(),
                attractor: Some(p.id),
            });
            self.cleanup(k);
        } else if let Some(i) = chosen {
            let aid = self.attractors[i].point.id;
            let old = self.attractors[i].rep;
            self.ops += self.reps.len() as u64;
            self.reps
                .retain(|r| !(r.point.id == old && r.attractor == Some(aid)));
            self.reps.push(Representative {
                point: p.clone(),
                attractor: Some(aid),
            });
            self.attractors[i].rep = p.id;
        }
        self.peak_stored = self.peak_stored.max(self.stored());
    }

    fn cleanup(&mut self, k: usize) {
        let k_plus_one = k + 1;
        self.ops += self.stored() as u64;
        if self.attractors.len() > k_plus_one {
            let (i, _) = self
                .attractors
                .iter()
                .enumerate()
                .min_by_key(|(_, a)| a.point.key())
                .expect("attractors present");
            let evicted = self.attractors.remove(i);
            for r in &mut self.reps {
                if r.attractor == Some(evicted.point.id) {
                    r.attractor = None;
                }
            }
        }
        if self.attractors.len() == k_plus_one {
            let t_min = self
                .attractors
                .iter()
                .map(|a| a.point.t_del)
                .min()
                .expect("attractors present");
            self.reps.retain(|r| r.point.t_del >= t_min);
        }
    }
}

impl GuessState {
    fn greedy(&mut self, metric: &Metric, k: usize) -> Option<Vec<TimedPoint>> {
        let mut order: Vec<&TimedPoint> = self.reps.iter().map(|r| &r.point).collect();
        order.sort_by_key(|p| p.id);
        let mut centers: Vec<TimedPoint> = Vec::new();
        let mut ops = 0u64;
        for q in order {
            let mut covered = false;
            for c in &centers {
                ops += 1;
                if metric.dist(q, c) <= self.threshold {
                    covered = true;
                    break;
                }
            }
            if !covered {
                centers.push(q.clone());
                if centers.len() > k {
                    self.ops += ops;
                    return None;
                }
            }
        }
        self.ops += ops;
        Some(centers)
    }

    fn snapshot(&self) -> SixGuessSnapshot {
        let mut attractors: Vec<(TimedPoint, PointId)> = self
            .attractors
            .iter()
            .map(|a| (a.point.clone(), a.rep))
            .collect();
        attractors.sort_by_key(|(a, _)| a.id);
        let mut representatives: Vec<(TimedPoint, Option<PointId>)> = self
            .reps
            .iter()
            .map(|r| (r.point.clone(), r.attractor))
            .collect();
        representatives.sort_by_key(|(r, _)| r.id);
        SixGuessSnapshot {
            gamma: self.gamma,
            attractors,
            representatives,
        }
    }
}

/// Read-only copy of one guess: attractors with the id of their current
/// representative, and representatives with their attractor (`None` for
/// orphans), both sorted by id.
#[derive(Debug, Clone, PartialEq)]
pub struct SixGuessSnapshot {
    pub gamma: f64,
    pub attractors: Vec<(TimedPoint, PointId)>,
    pub representatives: Vec<(TimedPoint, Option<PointId>)>,
}

impl SixGuessSnapshot {
    pub fn attractor_points(&self) -> impl Iterator<Item = &TimedPoint> {
        self.attractors.iter().map(|(a, _)| a)
    }

    pub fn representative_points(&self) -> impl Iterator<Item = &TimedPoint> {
        self.representatives.iter().map(|(r, _)| r)
    }
}

/// The (6+ε)-approximation over all guesses of a ladder.
#[derive(Debug)]
pub struct SixApproxClustering {
    k: usize,
    ladder: GuessLadder,
    metric: Metric,
    guesses: Vec<GuessState>,
    /// The `k+1` latest-expiring points seen, so that a query over at most
    /// `k` active points can return them exactly.
    survivors: Vec<TimedPoint>,
    last_arrival: Option<Time>,
    parallel: bool,
}

impl SixApproxClustering {
    /// Guesses are spaced by `1 + ε/6`.
    pub fn new(k: usize, epsilon: f64, d_min: f64, d_max: f64, metric: Metric) -> Result<Self> {
        if !(epsilon > 0.0 && epsilon.is_finite()) {
            return Err(Error::InvalidEpsilon(epsilon));
        }
        let ladder = GuessLadder::new(d_min, d_max, epsilon / 6.0)?;
        Self::with_ladder(k, ladder, metric)
    }

    pub fn with_ladder(k: usize, ladder: GuessLadder, metric: Metric) -> Result<Self> {
        if k == 0 {
            return Err(Error::InvalidK);
        }
        let guesses = ladder.guesses().iter().map(|&g| GuessState::new(g)).collect();
        Ok(Self {
            k,
            ladder,
            metric,
            guesses,
            survivors: Vec::new(),
            last_arrival: None,
            parallel: false,
        })
    }

    pub fn single_guess(k: usize, gamma: f64, metric: Metric) -> Result<Self> {
        Self::with_ladder(k, GuessLadder::single(gamma)?, metric)
    }

    pub fn with_parallel(mut self, enabled: bool) -> Self {
        self.parallel = enabled;
        self
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn ladder(&self) -> &GuessLadder {
        &self.ladder
    }

    pub fn metric(&self) -> &Metric {
        &self.metric
    }

    pub fn guess_count(&self) -> usize {
        self.guesses.len()
    }

    pub fn distance_evaluations(&self) -> u64 {
        self.metric.evaluations()
    }

    pub fn ops_per_guess(&self) -> Vec<u64> {
        self.guesses.iter().map(|g| g.ops).collect()
    }

    pub fn total_ops(&self) -> u64 {
        self.guesses.iter().map(|g| g.ops).sum()
    }

    pub fn peak_stored_per_guess(&self) -> Vec<usize> {
        self.guesses.iter().map(|g| g.peak_stored).collect()
    }

    pub fn snapshot(&self, guess: usize) -> SixGuessSnapshot {
        self.guesses[guess].snapshot()
    }

    /// Current `(|A|, |R|)` for every guess; also folds them into the peaks.
    pub fn audit_space(&mut self) -> Vec<(usize, usize)> {
        self.guesses
            .iter_mut()
            .map(|g| {
                g.peak_stored = g.peak_stored.max(g.stored());
                (g.attractors.len(), g.reps.len())
            })
            .collect()
    }

    /// Drops expired points, then offers `p` to every guess.
    pub fn update(&mut self, p: TimedPoint) -> Result<()> {
        if let Some(last) = self.last_arrival {
            if p.t_arr <= last {
                return Err(Error::NonMonotoneArrival { last, got: p.t_arr });
            }
        }
        if p.t_del <= p.t_arr {
            return Err(Error::InvertedLifetime {
                id: p.id,
                t_arr: p.t_arr,
                t_del: p.t_del,
            });
        }
        self.metric.check(&p.payload)?;
        self.last_arrival = Some(p.t_arr);
        let t = p.t_arr;

        let (metric, k) = (&self.metric, self.k);
        let step = |g: &mut GuessState| {
            g.purge(t);
            g.insert(metric, k, &p);
        };
        if self.parallel {
            self.guesses.par_iter_mut().for_each(step);
        } else {
            self.guesses.iter_mut().for_each(step);
        }

        self.survivors.retain(|s| s.t_del > t);
        self.survivors.push(p);
        if self.survivors.len() > self.k + 1 {
            let (i, _) = self
                .survivors
                .iter()
                .enumerate()
                .min_by_key(|(_, s)| s.key())
                .expect("non-empty");
            self.survivors.swap_remove(i);
        }
        Ok(())
    }

    /// Drops every stored point with deletion time at most `t`.
    pub fn advance(&mut self, t: Time) {
        if self.parallel {
            self.guesses.par_iter_mut().for_each(|g| g.purge(t));
        } else {
            self.guesses.iter_mut().for_each(|g| g.purge(t));
        }
        self.survivors.retain(|s| s.t_del > t);
    }

    /// Greedy 2γ cover of the representatives of the smallest guess that has
    /// at most `k` attractors and admits a cover by `k` of them.
    ///
    /// If at most `k` points are active they are returned as they are. The
    /// radius is left unevaluated.
    pub fn query(&mut self, t: Time) -> Result<Solution> {
        self.advance(t);
        if self.survivors.len() <= self.k {
            if self.survivors.is_empty() {
                return Ok(Solution::empty());
            }
            let mut centers = self.survivors.clone();
            centers.sort_by_key(|p| p.id);
            return Ok(Solution {
                centers,
                radius: Some(0.0),
                guess_used: None,
            });
        }
        for g in &mut self.guesses {
            if g.attractors.len() > self.k {
                continue;
            }
            if let Some(centers) = g.greedy(&self.metric, self.k) {
                return Ok(Solution {
                    centers,
                    radius: None,
                    guess_used: Some(g.gamma),
                });
            }
        }
        Err(Error::NoFeasibleGuess)
    }
}
