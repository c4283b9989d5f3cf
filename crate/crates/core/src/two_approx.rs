//! Fully dynamic (2+ε)-approximate k-center for points with known lifetimes.
//!
//! For every guess γ of the ladder the structure keeps an ordered list of at
//! most `k` centers pairwise farther than 2γ apart, one cluster per center
//! holding points within 2γ of it (each point in the lowest-indexed cluster
//! that can take it), and a set `U` of unclustered points that is only
//! non-empty when all `k` clusters exist. A query returns the centers of the
//! smallest guess whose `U` is empty.
//!
//! Lifetimes make deletions cheap on average: a clustered point is
//! *persistent* when it outlives its center and *vanishing* otherwise, and
//! whenever the persistent points of a cluster suffix outnumber the
//! vanishing and unclustered ones, the suffix is rebuilt around the
//! latest-expiring points so that every rebuilt point becomes vanishing.
//! Only persistent points ever move when a center expires, so this keeps
//! the total work linear in the number of updates per guess.
//!
//! All points live once in a slot arena; every guess threads its lists
//! through its own link array indexed by the same slots, and the deletion
//! queue stores slots, so an expiring point is found in O(1) in every guess.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::ladder::GuessLadder;
use crate::list::{ListHead, Links};
use crate::metric::Metric;
use crate::model::{DeletionQueue, Time, TimedPoint};
use crate::oracle::Solution;

type Slot = u32;

#[derive(Debug, Default)]
struct PointArena {
    slots: Vec<Option<TimedPoint>>,
    free: Vec<Slot>,
    live: usize,
}

impl PointArena {
    fn insert(&mut self, p: TimedPoint) -> Slot {
        self.live += 1;
        match self.free.pop() {
            Some(s) => {
                self.slots[s as usize] = Some(p);
                s
            }
            None => {
                self.slots.push(Some(p));
                (self.slots.len() - 1) as Slot
            }
        }
    }

    fn remove(&mut self, s: Slot) -> Option<TimedPoint> {
        let p = self.slots[s as usize].take();
        if p.is_some() {
            self.live -= 1;
            self.free.push(s);
        }
        p
    }

    fn get(&self, s: Slot) -> &TimedPoint {
        self.slots[s as usize]
            .as_ref()
            .expect("slot refers to a live point")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Owner {
    Cluster(u32),
    Unclustered,
}

#[derive(Debug, Clone)]
struct Cluster {
    center: Slot,
    members: ListHead,
    persistent: usize,
    vanishing: usize,
}

/// Shared read-only context for per-guess work.
struct Ctx<'a> {
    metric: &'a Metric,
    points: &'a PointArena,
    k: usize,
    reclustering: bool,
}

impl Ctx<'_> {
    /// Persistent means the point outlives the center; a tie counts as vanishing.
    fn is_persistent(&self, x: Slot, center: Slot) -> bool {
        self.points.get(center).t_del < self.points.get(x).t_del
    }
}

#[derive(Debug, Clone)]
struct GuessState {
    gamma: f64,
    threshold: f64,
    links: Links<Owner>,
    slab: Vec<Option<Cluster>>,
    free_clusters: Vec<u32>,
    /// Cluster ids in index order.
    order: Vec<u32>,
    unclustered: ListHead,
    ops: u64,
    peak_stored: usize,
    skip_recluster: u32,
}

impl GuessState {
    fn new(gamma: f64) -> Self {
        Self {
            gamma,
            threshold: 2.0 * gamma,
            links: Links::new(),
            slab: Vec::new(),
            free_clusters: Vec::new(),
            order: Vec::new(),
            unclustered: ListHead::default(),
            ops: 0,
            peak_stored: 0,
            skip_recluster: 0,
        }
    }

    fn cluster(&self, cid: u32) -> &Cluster {
        self.slab[cid as usize].as_ref().expect("live cluster id")
    }

    fn cluster_mut(&mut self, cid: u32) -> &mut Cluster {
        self.slab[cid as usize].as_mut().expect("live cluster id")
    }

    fn within(&self, ctx: &Ctx<'_>, a: Slot, b: Slot) -> bool {
        ctx.metric.dist(ctx.points.get(a), ctx.points.get(b)) <= self.threshold
    }

    fn stored(&self) -> usize {
        self.order
            .iter()
            .map(|&cid| self.cluster(cid).members.len())
            .sum::<usize>()
            + self.unclustered.len()
    }

    /// Appends a new last cluster centered at `center`.
    fn open_cluster(&mut self, center: Slot) -> u32 {
        self.ops += 1;
        let mut cluster = Cluster {
            center,
            members: ListHead::default(),
            persistent: 0,
            vanishing: 1,
        };
        let cid = match self.free_clusters.pop() {
            Some(cid) => cid,
            None => {
                self.slab.push(None);
                (self.slab.len() - 1) as u32
            }
        };
        self.links
            .push_back(&mut cluster.members, center, Owner::Cluster(cid));
        self.slab[cid as usize] = Some(cluster);
        self.order.push(cid);
        cid
    }

    fn close_cluster(&mut self, cid: u32) {
        self.slab[cid as usize] = None;
        self.free_clusters.push(cid);
    }

    fn add_member(&mut self, ctx: &Ctx<'_>, cid: u32, x: Slot) {
        self.ops += 1;
        let cluster = self.slab[cid as usize].as_mut().expect("live cluster id");
        self.links
            .push_back(&mut cluster.members, x, Owner::Cluster(cid));
        if ctx.is_persistent(x, cluster.center) {
            cluster.persistent += 1;
        } else {
            cluster.vanishing += 1;
        }
    }

    fn remove_member(&mut self, ctx: &Ctx<'_>, cid: u32, x: Slot) {
        self.ops += 1;
        let cluster = self.slab[cid as usize].as_mut().expect("live cluster id");
        self.links.unlink(&mut cluster.members, x);
        if ctx.is_persistent(x, cluster.center) {
            cluster.persistent -= 1;
        } else {
            cluster.vanishing -= 1;
        }
    }

    fn push_unclustered(&mut self, x: Slot) {
        self.ops += 1;
        self.links
            .push_back(&mut self.unclustered, x, Owner::Unclustered);
    }

    fn insert(&mut self, ctx: &Ctx<'_>, x: Slot) {
        self.links.ensure(x);
        let mut target = None;
        for pos in 0..self.order.len() {
            self.ops += 1;
            let cid = self.order[pos];
            if self.within(ctx, x, self.cluster(cid).center) {
                target = Some(cid);
                break;
            }
        }
        match target {
            Some(cid) => self.add_member(ctx, cid, x),
            None if self.order.len() < ctx.k => {
                self.open_cluster(x);
            }
            None => self.push_unclustered(x),
        }
        self.recluster(ctx);
    }

    fn delete(&mut self, ctx: &Ctx<'_>, x: Slot) -> Result<()> {
        match self.links.owner(x) {
            None => {
                return Err(Error::PointNotFound {
                    id: ctx.points.get(x).id,
                    guess: usize::MAX,
                })
            }
            Some(Owner::Unclustered) => {
                self.ops += 1;
                self.links.unlink(&mut self.unclustered, x);
            }
            Some(Owner::Cluster(cid)) if self.cluster(cid).center != x => {
                self.remove_member(ctx, cid, x);
            }
            Some(Owner::Cluster(cid)) => self.delete_center(ctx, cid, x),
        }
        self.recluster(ctx);
        Ok(())
    }

    fn delete_center(&mut self, ctx: &Ctx<'_>, cid: u32, center: Slot) {
        let index = self
            .order
            .iter()
            .position(|&c| c == cid)
            .expect("center's cluster is ordered");
        self.ops += index as u64 + 1;

        let mut members = std::mem::take(&mut self.cluster_mut(cid).members);
        let displaced = self.links.drain(&mut members);
        self.ops += displaced.len() as u64;

        // Each displaced point goes where it would have gone without this
        // center: the first later cluster within 2γ. The loop bound is
        // re-read so clusters opened along the way are candidates too.
        for x in displaced.into_iter().filter(|&x| x != center) {
            let mut target = None;
            let mut pos = index + 1;
            while pos < self.order.len() {
                self.ops += 1;
                let other = self.order[pos];
                if self.within(ctx, x, self.cluster(other).center) {
                    target = Some(other);
                    break;
                }
                pos += 1;
            }
            match target {
                Some(other) => self.add_member(ctx, other, x),
                // the dying cluster still counts toward k here
                None if self.order.len() < ctx.k => {
                    self.open_cluster(x);
                }
                None => self.push_unclustered(x),
            }
        }

        self.order.remove(index);
        self.close_cluster(cid);

        if !self.unclustered.is_empty() {
            let pool = self.links.drain(&mut self.unclustered);
            self.ops += pool.len() as u64;
            let pick = latest_expiring(ctx, &pool);
            let u = pool[pick];
            let ncid = self.open_cluster(u);
            for (i, &y) in pool.iter().enumerate() {
                if i == pick {
                    continue;
                }
                if self.within(ctx, y, u) {
                    self.add_member(ctx, ncid, y);
                } else {
                    self.push_unclustered(y);
                }
            }
        }
    }

    /// Smallest cluster index whose suffix has more persistent points than
    /// vanishing plus unclustered ones.
    fn unbalanced_suffix(&mut self) -> Option<usize> {
        let u = self.unclustered.len();
        let (mut persistent, mut vanishing) = (0usize, 0usize);
        let mut found = None;
        for pos in (0..self.order.len()).rev() {
            self.ops += 1;
            let c = self.cluster(self.order[pos]);
            persistent += c.persistent;
            vanishing += c.vanishing;
            if persistent > u + vanishing {
                found = Some(pos);
            }
        }
        found
    }

    fn recluster(&mut self, ctx: &Ctx<'_>) {
        if !ctx.reclustering {
            return;
        }
        if self.skip_recluster > 0 {
            self.skip_recluster -= 1;
            return;
        }
        let Some(start) = self.unbalanced_suffix() else {
            return;
        };

        let mut pool = self.links.drain(&mut self.unclustered);
        let rebuilt: Vec<u32> = self.order.drain(start..).collect();
        for cid in rebuilt {
            let mut members = std::mem::take(&mut self.cluster_mut(cid).members);
            pool.extend(self.links.drain(&mut members));
            self.close_cluster(cid);
        }
        self.ops += pool.len() as u64;

        for _ in start..ctx.k {
            if pool.is_empty() {
                break;
            }
            self.ops += pool.len() as u64;
            let center = pool.swap_remove(latest_expiring(ctx, &pool));
            let cid = self.open_cluster(center);
            let mut rest = Vec::with_capacity(pool.len());
            for y in pool {
                if self.within(ctx, y, center) {
                    self.add_member(ctx, cid, y);
                } else {
                    rest.push(y);
                }
            }
            pool = rest;
        }
        for y in pool {
            self.push_unclustered(y);
        }
    }

    fn snapshot(&self, points: &PointArena) -> GuessSnapshot {
        GuessSnapshot {
            gamma: self.gamma,
            clusters: self
                .order
                .iter()
                .map(|&cid| {
                    let c = self.cluster(cid);
                    ClusterSnapshot {
                        center: points.get(c.center).clone(),
                        members: self
                            .links
                            .iter(&c.members)
                            .map(|s| points.get(s).clone())
                            .collect(),
                        persistent_count: c.persistent,
                        vanishing_count: c.vanishing,
                    }
                })
                .collect(),
            unclustered: self
                .links
                .iter(&self.unclustered)
                .map(|s| points.get(s).clone())
                .collect(),
        }
    }
}

/// Position of the point with the largest deletion key.
fn latest_expiring(ctx: &Ctx<'_>, pool: &[Slot]) -> usize {
    pool.iter()
        .enumerate()
        .max_by_key(|(_, &s)| ctx.points.get(s).key())
        .map(|(i, _)| i)
        .expect("non-empty pool")
}

/// Read-only copy of one guess's clusters, for audits and inspection.
#[derive(Debug, Clone, PartialEq)]
pub struct GuessSnapshot {
    pub gamma: f64,
    pub clusters: Vec<ClusterSnapshot>,
    pub unclustered: Vec<TimedPoint>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ClusterSnapshot {
    pub center: TimedPoint,
    /// All points of the cluster, the center included.
    pub members: Vec<TimedPoint>,
    pub persistent_count: usize,
    pub vanishing_count: usize,
}

/// Points certifying that no `k` centers reach radius `gamma`.
#[derive(Debug, Clone, PartialEq)]
pub struct Witness {
    pub gamma: f64,
    pub points: Vec<TimedPoint>,
}

/// Deliberate corruptions used to show that the audits catch them.
#[doc(hidden)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Fault {
    /// Shift one cluster's persistent counter.
    PerturbPersistent {
        guess: usize,
        cluster: usize,
        delta: isize,
    },
    /// Skip the next rebalancing call in one guess.
    SkipNextRecluster { guess: usize },
}

/// The (2+ε)-approximation over all guesses of a ladder.
#[derive(Debug)]
pub struct TwoApproxClustering {
    k: usize,
    ladder: GuessLadder,
    metric: Metric,
    arena: PointArena,
    queue: DeletionQueue<Slot>,
    guesses: Vec<GuessState>,
    last_arrival: Option<Time>,
    reclustering: bool,
    parallel: bool,
    peak_active: usize,
}

impl TwoApproxClustering {
    /// Guesses are spaced by `1 + ε/2`.
    pub fn new(k: usize, epsilon: f64, d_min: f64, d_max: f64, metric: Metric) -> Result<Self> {
        if !(epsilon > 0.0 && epsilon.is_finite()) {
            return Err(Error::InvalidEpsilon(epsilon));
        }
        let ladder = GuessLadder::new(d_min, d_max, epsilon / 2.0)?;
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
            arena: PointArena::default(),
            queue: DeletionQueue::new(),
            guesses,
            last_arrival: None,
            reclustering: true,
            parallel: false,
            peak_active: 0,
        })
    }

    /// One structure at a single radius guess.
    pub fn single_guess(k: usize, gamma: f64, metric: Metric) -> Result<Self> {
        Self::with_ladder(k, GuessLadder::single(gamma)?, metric)
    }

    /// Turning rebalancing off keeps every invariant except balance, but
    /// loses the amortized update bound.
    pub fn with_reclustering(mut self, enabled: bool) -> Self {
        self.reclustering = enabled;
        self
    }

    /// Process guesses on the rayon pool.
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

    pub fn reclustering_enabled(&self) -> bool {
        self.reclustering
    }

    pub fn guess_count(&self) -> usize {
        self.guesses.len()
    }

    pub fn active_len(&self) -> usize {
        self.queue.len()
    }

    /// Active points currently stored, by ascending id.
    pub fn active_points(&self) -> Vec<TimedPoint> {
        let mut pts: Vec<TimedPoint> = self
            .queue
            .iter()
            .map(|(_, s)| self.arena.get(s).clone())
            .collect();
        pts.sort_by_key(|p| p.id);
        pts
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

    /// Points held per guess right now.
    pub fn stored_per_guess(&self) -> Vec<usize> {
        self.guesses.iter().map(GuessState::stored).collect()
    }

    pub fn peak_stored_per_guess(&self) -> Vec<usize> {
        self.guesses.iter().map(|g| g.peak_stored).collect()
    }

    pub fn peak_active(&self) -> usize {
        self.peak_active
    }

    pub fn snapshot(&self, guess: usize) -> GuessSnapshot {
        self.guesses[guess].snapshot(&self.arena)
    }

    pub fn insert(&mut self, p: TimedPoint) -> Result<()> {
        let t = p.t_arr;
        self.update(Some(p), t)
    }

    /// Expires everything with deletion time at most `t`.
    pub fn advance(&mut self, t: Time) -> Result<()> {
        self.update(None, t)
    }

    /// Removes every point with `t_del <= t`, in deletion-key order, then
    /// inserts `p` (whose arrival must be `t`) into every guess.
    pub fn update(&mut self, p: Option<TimedPoint>, t: Time) -> Result<()> {
        if let Some(p) = &p {
            if p.t_arr != t {
                return Err(Error::InvalidParameter(format!(
                    "insertion time {t} differs from arrival time {}",
                    p.t_arr
                )));
            }
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
        }

        let mut expired = Vec::new();
        while let Some((_, s)) = self.queue.pop_expired(t) {
            expired.push(s);
        }
        let arrival = p.map(|p| {
            self.last_arrival = Some(p.t_arr);
            let key = p.key();
            (self.arena.insert(p), key)
        });

        let ctx = Ctx {
            metric: &self.metric,
            points: &self.arena,
            k: self.k,
            reclustering: self.reclustering,
        };
        let step = |(gi, g): (usize, &mut GuessState)| -> Result<()> {
            for &s in &expired {
                g.delete(&ctx, s).map_err(|e| match e {
                    Error::PointNotFound { id, .. } => Error::PointNotFound { id, guess: gi },
                    other => other,
                })?;
            }
            if let Some((s, _)) = arrival {
                g.insert(&ctx, s);
            }
            g.peak_stored = g.peak_stored.max(g.stored());
            Ok(())
        };
        if self.parallel {
            self.guesses.par_iter_mut().enumerate().try_for_each(step)?;
        } else {
            self.guesses.iter_mut().enumerate().try_for_each(step)?;
        }

        for s in expired {
            self.arena.remove(s);
        }
        if let Some((s, key)) = arrival {
            self.queue.push(key, s);
        }
        self.peak_active = self.peak_active.max(self.queue.len());
        Ok(())
    }

    fn expire_through(&mut self, t: Time) -> Result<()> {
        if self.queue.peek().is_some_and(|(key, _)| key.t_del <= t) {
            self.update(None, t)?;
        }
        Ok(())
    }

    /// Index of the smallest guess with no unclustered point.
    pub fn feasible_guess(&self) -> Option<usize> {
        self.guesses.iter().position(|g| g.unclustered.is_empty())
    }

    /// Centers of the smallest guess whose unclustered set is empty.
    ///
    /// Expired points are removed first. With at most `k` active points the
    /// active set itself is returned (radius zero). The solution's radius is
    /// left unevaluated; see [`Solution::evaluate`].
    pub fn query(&mut self, t: Time) -> Result<Solution> {
        self.expire_through(t)?;
        if self.queue.is_empty() {
            return Ok(Solution::empty());
        }
        if self.queue.len() <= self.k {
            return Ok(Solution {
                centers: self.active_points(),
                radius: Some(0.0),
                guess_used: None,
            });
        }
        let gi = self.feasible_guess().ok_or(Error::NoFeasibleGuess)?;
        let g = &self.guesses[gi];
        Ok(Solution {
            centers: g
                .order
                .iter()
                .map(|&cid| self.arena.get(g.cluster(cid).center).clone())
                .collect(),
            radius: None,
            guess_used: Some(g.gamma),
        })
    }

    /// `k + 1` points pairwise farther than `2γ'` apart, where `γ'` is the
    /// guess just below the one a query would use. `None` when the query
    /// guess is already the smallest.
    pub fn witness(&mut self, t: Time) -> Result<Option<Witness>> {
        self.expire_through(t)?;
        let gi = self.feasible_guess().ok_or(Error::NoFeasibleGuess)?;
        if gi == 0 {
            return Ok(None);
        }
        let g = &self.guesses[gi - 1];
        let mut points: Vec<TimedPoint> = g
            .order
            .iter()
            .map(|&cid| self.arena.get(g.cluster(cid).center).clone())
            .collect();
        let u = g
            .unclustered
            .first()
            .expect("guess below the feasible one has U non-empty");
        points.push(self.arena.get(u).clone());
        Ok(Some(Witness {
            gamma: g.gamma,
            points,
        }))
    }

    #[doc(hidden)]
    pub fn inject_fault(&mut self, fault: Fault) {
        match fault {
            Fault::PerturbPersistent {
                guess,
                cluster,
                delta,
            } => {
                let g = &mut self.guesses[guess];
                let cid = g.order[cluster];
                let c = g.cluster_mut(cid);
                c.persistent = c.persistent.saturating_add_signed(delta);
            }
            Fault::SkipNextRecluster { guess } => self.guesses[guess].skip_recluster += 1,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pt(id: u64, x: f64, t_arr: Time, t_del: Time) -> TimedPoint {
        TimedPoint::at(id, vec![x], t_arr, t_del)
    }

    fn ids(v: &[TimedPoint]) -> Vec<u64> {
        v.iter().map(|p| p.id).collect()
    }

    fn layout(s: &GuessSnapshot) -> (Vec<Vec<u64>>, Vec<u64>) {
        (
            s.clusters.iter().map(|c| ids(&c.members)).collect(),
            ids(&s.unclustered),
        )
    }

    #[test]
    fn constructor_ladders() {
        let c = TwoApproxClustering::new(1, 2.0, 1.0, 4.0, Metric::euclidean(1)).unwrap();
        assert_eq!(c.ladder().guesses(), &[1.0, 2.0, 4.0]);
        assert_eq!(c.guess_count(), 3);
        // 5 is not a power of 1.5, so the floor and ceiling exponents differ
        let c = TwoApproxClustering::new(3, 1.0, 5.0, 5.0, Metric::euclidean(1)).unwrap();
        assert_eq!(c.guess_count(), 2);
        let c = TwoApproxClustering::new(3, 2.0, 4.0, 4.0, Metric::euclidean(1)).unwrap();
        assert_eq!(c.guess_count(), 1);
        assert!(TwoApproxClustering::new(1, 0.0, 1.0, 4.0, Metric::euclidean(1)).is_err());
        assert_eq!(
            TwoApproxClustering::new(0, 1.0, 1.0, 4.0, Metric::euclidean(1)).unwrap_err(),
            Error::InvalidK
        );
    }

    #[test]
    fn two_point_trace() {
        let mut c = TwoApproxClustering::new(1, 2.0, 1.0, 4.0, Metric::euclidean(1)).unwrap();
        c.update(Some(pt(1, 0.0, 1, 10)), 1).unwrap();
        for g in 0..3 {
            assert_eq!(layout(&c.snapshot(g)), (vec![vec![1]], vec![]));
        }
        c.update(Some(pt(2, 4.0, 2, 20)), 2).unwrap();
        assert_eq!(layout(&c.snapshot(0)), (vec![vec![1]], vec![2]));
        assert_eq!(layout(&c.snapshot(1)), (vec![vec![1, 2]], vec![]));
        assert_eq!(layout(&c.snapshot(2)), (vec![vec![1, 2]], vec![]));

        let q = c.query(2).unwrap();
        assert_eq!((ids(&q.centers), q.guess_used), (vec![1], Some(2.0)));
        let w = c.witness(2).unwrap().unwrap();
        assert_eq!((ids(&w.points), w.gamma), (vec![1, 2], 1.0));

        c.update(None, 10).unwrap();
        for g in 0..3 {
            assert_eq!(layout(&c.snapshot(g)), (vec![vec![2]], vec![]));
        }
        assert_eq!(c.active_len(), 1);
        assert_eq!(c.witness(10).unwrap(), None);
    }

    #[test]
    fn lowest_index_cluster_wins() {
        let mut c = TwoApproxClustering::single_guess(2, 1.0, Metric::euclidean(1)).unwrap();
        c.insert(pt(1, 0.0, 1, 100)).unwrap();
        c.insert(pt(2, 3.0, 2, 100)).unwrap();
        c.insert(pt(3, 1.5, 3, 50)).unwrap();
        assert_eq!(layout(&c.snapshot(0)), (vec![vec![1, 3], vec![2]], vec![]));
    }

    #[test]
    fn full_structure_sends_far_points_to_unclustered() {
        let mut c = TwoApproxClustering::single_guess(1, 1.0, Metric::euclidean(1)).unwrap();
        c.insert(pt(1, 0.0, 1, 100)).unwrap();
        c.insert(pt(2, 5.0, 2, 50)).unwrap();
        assert_eq!(layout(&c.snapshot(0)), (vec![vec![1]], vec![2]));
    }

    #[test]
    fn equal_deletion_time_counts_as_vanishing() {
        let mut c = TwoApproxClustering::single_guess(1, 1.0, Metric::euclidean(1)).unwrap();
        c.insert(pt(1, 0.0, 1, 30)).unwrap();
        c.insert(pt(2, 1.0, 2, 30)).unwrap();
        let s = c.snapshot(0);
        assert_eq!((s.clusters[0].persistent_count, s.clusters[0].vanishing_count), (0, 2));
    }

    #[test]
    fn deleting_plain_member_only_unlinks() {
        let mut c = TwoApproxClustering::single_guess(1, 1.0, Metric::euclidean(1)).unwrap();
        c.insert(pt(1, 0.0, 1, 100)).unwrap();
        c.insert(pt(2, 1.0, 2, 5)).unwrap();
        c.advance(5).unwrap();
        let s = c.snapshot(0);
        assert_eq!(layout(&s), (vec![vec![1]], vec![]));
        assert_eq!(s.clusters[0].vanishing_count, 1);
    }

    #[test]
    fn lone_survivor_becomes_center() {
        let mut c = TwoApproxClustering::single_guess(1, 1.0, Metric::euclidean(1))
            .unwrap()
            .with_reclustering(false);
        c.insert(pt(1, 0.0, 1, 5)).unwrap();
        c.insert(pt(2, 1.0, 2, 50)).unwrap();
        c.advance(5).unwrap();
        let s = c.snapshot(0);
        assert_eq!(layout(&s), (vec![vec![2]], vec![]));
        assert_eq!(s.clusters[0].center.id, 2);
    }

    #[test]
    fn latest_unclustered_point_is_promoted() {
        // U = {u1 (t_del 30), u2 (t_del 20)} close together, far from c1.
        let mut c = TwoApproxClustering::single_guess(1, 1.0, Metric::euclidean(1))
            .unwrap()
            .with_reclustering(false);
        c.insert(pt(1, 0.0, 1, 10)).unwrap();
        c.insert(pt(2, 10.0, 2, 30)).unwrap();
        c.insert(pt(3, 11.0, 3, 20)).unwrap();
        assert_eq!(layout(&c.snapshot(0)), (vec![vec![1]], vec![2, 3]));
        c.advance(10).unwrap();
        let s = c.snapshot(0);
        assert_eq!(s.clusters[0].center.id, 2);
        assert_eq!(layout(&s), (vec![vec![2, 3]], vec![]));
    }

    #[test]
    fn rebalancing_moves_center_to_latest_point() {
        let mut c = TwoApproxClustering::single_guess(1, 1.0, Metric::euclidean(1)).unwrap();
        c.insert(pt(1, 0.0, 1, 5)).unwrap();
        c.insert(pt(2, 0.5, 2, 50)).unwrap();
        // one persistent vs one vanishing (the center): balanced
        assert_eq!(c.snapshot(0).clusters[0].center.id, 1);
        c.insert(pt(3, 1.0, 3, 40)).unwrap();
        let s = c.snapshot(0);
        assert_eq!(s.clusters[0].center.id, 2);
        assert_eq!(s.clusters[0].persistent_count, 0);
        assert_eq!(s.clusters[0].vanishing_count, 3);
    }

    #[test]
    fn rebalancing_leaves_far_points_unclustered() {
        let mut c = TwoApproxClustering::single_guess(1, 1.0, Metric::euclidean(1)).unwrap();
        c.insert(pt(1, 0.0, 1, 5)).unwrap();
        c.insert(pt(2, 9.0, 2, 6)).unwrap();
        c.insert(pt(3, 0.5, 3, 50)).unwrap();
        c.insert(pt(4, 1.0, 4, 40)).unwrap();
        // two persistent against one vanishing plus one unclustered: balanced
        assert_eq!(c.snapshot(0).clusters[0].center.id, 1);
        c.insert(pt(5, 0.2, 5, 45)).unwrap();
        let s = c.snapshot(0);
        assert_eq!(s.clusters[0].center.id, 3);
        assert_eq!(ids(&s.unclustered), vec![2]);
    }

    #[test]
    fn rejects_out_of_order_arrivals() {
        let mut c = TwoApproxClustering::single_guess(1, 1.0, Metric::euclidean(1)).unwrap();
        c.insert(pt(1, 0.0, 5, 10)).unwrap();
        assert_eq!(
            c.insert(pt(2, 0.0, 5, 10)).unwrap_err(),
            Error::NonMonotoneArrival { last: 5, got: 5 }
        );
        assert!(c.update(Some(pt(3, 0.0, 7, 10)), 6).is_err());
    }

    #[test]
    fn query_degenerate_cases() {
        let mut c = TwoApproxClustering::new(1, 2.0, 1.0, 4.0, Metric::euclidean(1)).unwrap();
        assert!(c.query(0).unwrap().is_empty());
        c.insert(pt(1, 0.0, 1, 3)).unwrap();
        let q = c.query(2).unwrap();
        assert_eq!((ids(&q.centers), q.radius), (vec![1], Some(0.0)));
        assert!(c.query(3).unwrap().is_empty());
    }

    #[test]
    fn parallel_matches_sequential() {
        let pts: Vec<TimedPoint> = (0..200u64)
            .map(|i| pt(i, ((i * 37) % 101) as f64, i + 1, i + 1 + (i * 13) % 29 + 1))
            .collect();
        let mut a = TwoApproxClustering::new(3, 0.5, 1.0, 100.0, Metric::euclidean(1)).unwrap();
        let mut b = TwoApproxClustering::new(3, 0.5, 1.0, 100.0, Metric::euclidean(1))
            .unwrap()
            .with_parallel(true);
        for p in pts {
            a.insert(p.clone()).unwrap();
            b.insert(p).unwrap();
        }
        for g in 0..a.guess_count() {
            assert_eq!(a.snapshot(g), b.snapshot(g));
        }
        assert_eq!(a.ops_per_guess(), b.ops_per_guess());
        assert_eq!(a.distance_evaluations(), b.distance_evaluations());
    }
}
