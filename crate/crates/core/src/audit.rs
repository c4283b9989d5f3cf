//! Independent checks of the structural invariants both algorithms promise.
//!
//! Audits look only at snapshots and recompute everything from distances,
//! so they share no bookkeeping with the code they check. Pass them a
//! forked metric to keep their distance evaluations out of the algorithm's
//! counters.

use std::collections::HashMap;
use std::fmt;

use crate::metric::Metric;
use crate::model::{PointId, Time, TimedPoint};
use crate::six_approx::SixGuessSnapshot;
use crate::two_approx::GuessSnapshot;

/// Every property the audits know how to check.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Invariant {
    CenterSeparation,
    MembershipRadius,
    FirstFit,
    UnclusteredSeparation,
    Fullness,
    CounterCorrectness,
    Balance,
    VanishingMonotonicity,
    WitnessSeparation,
    AttractorCount,
    AttractorSeparation,
    RepresentativeValidity,
    CoverageAllActive,
    CoverageLateExpiring,
    SpaceBound,
    Approximation,
}

impl Invariant {
    pub const ALL: [Invariant; 16] = [
        Invariant::CenterSeparation,
        Invariant::MembershipRadius,
        Invariant::FirstFit,
        Invariant::UnclusteredSeparation,
        Invariant::Fullness,
        Invariant::CounterCorrectness,
        Invariant::Balance,
        Invariant::VanishingMonotonicity,
        Invariant::WitnessSeparation,
        Invariant::AttractorCount,
        Invariant::AttractorSeparation,
        Invariant::RepresentativeValidity,
        Invariant::CoverageAllActive,
        Invariant::CoverageLateExpiring,
        Invariant::SpaceBound,
        Invariant::Approximation,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Invariant::CenterSeparation => "center-separation",
            Invariant::MembershipRadius => "membership-radius",
            Invariant::FirstFit => "first-fit",
            Invariant::UnclusteredSeparation => "unclustered-separation",
            Invariant::Fullness => "fullness",
            Invariant::CounterCorrectness => "counter-correctness",
            Invariant::Balance => "balance",
            Invariant::VanishingMonotonicity => "vanishing-monotonicity",
            Invariant::WitnessSeparation => "witness-separation",
            Invariant::AttractorCount => "attractor-count",
            Invariant::AttractorSeparation => "attractor-separation",
            Invariant::RepresentativeValidity => "representative-validity",
            Invariant::CoverageAllActive => "coverage-all-active",
            Invariant::CoverageLateExpiring => "coverage-late-expiring",
            Invariant::SpaceBound => "space-bound",
            Invariant::Approximation => "approximation",
        }
    }

    /// The checks [`audit_two_guess`] performs.
    pub const CLUSTERING: [Invariant; 7] = [
        Invariant::CenterSeparation,
        Invariant::MembershipRadius,
        Invariant::FirstFit,
        Invariant::UnclusteredSeparation,
        Invariant::Fullness,
        Invariant::CounterCorrectness,
        Invariant::Balance,
    ];

    /// The checks [`audit_six_guess`] performs.
    pub const ATTRACTORS: [Invariant; 5] = [
        Invariant::AttractorCount,
        Invariant::AttractorSeparation,
        Invariant::RepresentativeValidity,
        Invariant::CoverageAllActive,
        Invariant::CoverageLateExpiring,
    ];
}

impl fmt::Display for Invariant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// A failed check, with enough context to find the offending state.
#[derive(Debug, Clone, PartialEq)]
pub struct Violation {
    pub invariant: Invariant,
    pub guess: Option<usize>,
    pub time: Option<Time>,
    pub detail: String,
}

impl Violation {
    pub fn new(invariant: Invariant, detail: impl Into<String>) -> Self {
        Self {
            invariant,
            guess: None,
            time: None,
            detail: detail.into(),
        }
    }

    pub fn at(mut self, guess: Option<usize>, time: Time) -> Self {
        self.guess = guess.or(self.guess);
        self.time = Some(time);
        self
    }
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} violated", self.invariant)?;
        if let Some(g) = self.guess {
            write!(f, " in guess {g}")?;
        }
        if let Some(t) = self.time {
            write!(f, " at time {t}")?;
        }
        write!(f, ": {}", self.detail)
    }
}

impl std::error::Error for Violation {}

type Check = std::result::Result<(), Violation>;

fn fail(invariant: Invariant, detail: String) -> Check {
    Err(Violation::new(invariant, detail))
}

/// Checks the clustering invariants of one guess of the (2+ε) structure.
///
/// `ℓ` centers pairwise farther than `2γ`; members within `2γ` of their
/// center and absent from every earlier cluster's ball; unclustered points
/// farther than `2γ` from all centers, and only when `ℓ = k`; counters equal
/// to a recount; no cluster suffix where persistent points outnumber
/// vanishing plus unclustered ones.
pub fn audit_two_guess(snapshot: &GuessSnapshot, k: usize, metric: &Metric) -> Check {
    let two_gamma = 2.0 * snapshot.gamma;
    let centers: Vec<&TimedPoint> = snapshot.clusters.iter().map(|c| &c.center).collect();
    let d = |a: &TimedPoint, b: &TimedPoint| metric.distance(a, b).expect("audited points belong to the metric");

    if centers.len() > k {
        return fail(Invariant::Fullness, format!("{} centers for k = {k}", centers.len()));
    }
    for (i, a) in centers.iter().enumerate() {
        for (j, b) in centers.iter().enumerate().skip(i + 1) {
            let dist = d(a, b);
            if dist <= two_gamma {
                return fail(
                    Invariant::CenterSeparation,
                    format!("centers {} (#{i}) and {} (#{j}) are {dist} apart", a.id, b.id),
                );
            }
        }
    }

    for (i, cluster) in snapshot.clusters.iter().enumerate() {
        if !cluster.members.iter().any(|m| m.id == cluster.center.id) {
            return fail(
                Invariant::MembershipRadius,
                format!("center {} missing from its own cluster #{i}", cluster.center.id),
            );
        }
        let mut persistent = 0;
        for x in &cluster.members {
            let dist = d(x, &cluster.center);
            if dist > two_gamma {
                return fail(
                    Invariant::MembershipRadius,
                    format!("point {} is {dist} from its center {}", x.id, cluster.center.id),
                );
            }
            if let Some(j) = centers[..i].iter().position(|c| d(x, c) <= two_gamma) {
                return fail(
                    Invariant::FirstFit,
                    format!("point {} sits in cluster #{i} but fits cluster #{j}", x.id),
                );
            }
            if cluster.center.t_del < x.t_del {
                persistent += 1;
            }
        }
        let vanishing = cluster.members.len() - persistent;
        if (cluster.persistent_count, cluster.vanishing_count) != (persistent, vanishing) {
            return fail(
                Invariant::CounterCorrectness,
                format!(
                    "cluster #{i} stores (persistent, vanishing) = ({}, {}), recount gives ({persistent}, {vanishing})",
                    cluster.persistent_count, cluster.vanishing_count
                ),
            );
        }
    }

    if !snapshot.unclustered.is_empty() && centers.len() < k {
        return fail(
            Invariant::Fullness,
            format!(
                "{} unclustered points with only {} of {k} centers",
                snapshot.unclustered.len(),
                centers.len()
            ),
        );
    }
    for x in &snapshot.unclustered {
        if let Some(c) = centers.iter().find(|c| d(x, c) <= two_gamma) {
            return fail(
                Invariant::UnclusteredSeparation,
                format!("unclustered point {} lies within 2γ of center {}", x.id, c.id),
            );
        }
    }

    let (mut p_sum, mut v_sum) = (0usize, 0usize);
    let u = snapshot.unclustered.len();
    for (i, cluster) in snapshot.clusters.iter().enumerate().rev() {
        p_sum += cluster.persistent_count;
        v_sum += cluster.vanishing_count;
        if p_sum > u + v_sum {
            return fail(
                Invariant::Balance,
                format!("suffix from cluster #{i} has {p_sum} persistent vs {v_sum} vanishing + {u} unclustered"),
            );
        }
    }
    Ok(())
}

/// Remembers which points were vanishing in which guess and reports any
/// point that later turns persistent.
#[derive(Debug, Default, Clone)]
pub struct VanishingTracker {
    seen: Vec<HashMap<PointId, bool>>,
}

impl VanishingTracker {
    pub fn new() -> Self {
        Self::default()
    }

    /// Records the classification of every stored point of one guess.
    /// Unclustered points count as vanishing.
    pub fn observe(&mut self, guess: usize, snapshot: &GuessSnapshot) -> Check {
        if self.seen.len() <= guess {
            self.seen.resize_with(guess + 1, HashMap::new);
        }
        let mut now = HashMap::with_capacity(self.seen[guess].len());
        for cluster in &snapshot.clusters {
            for x in &cluster.members {
                now.insert(x.id, cluster.center.t_del >= x.t_del);
            }
        }
        for x in &snapshot.unclustered {
            now.insert(x.id, true);
        }
        for (&id, &vanishing) in &now {
            if !vanishing && self.seen[guess].get(&id) == Some(&true) {
                return Err(Violation::new(
                    Invariant::VanishingMonotonicity,
                    format!("point {id} went from vanishing to persistent"),
                )
                .at(Some(guess), 0));
            }
        }
        self.seen[guess] = now;
        Ok(())
    }
}

/// Checks one guess of the (6+ε) structure against the true active set.
///
/// At most `k + 1` attractors, pairwise farther than `2γ`; each attractor's
/// representative arrived no earlier and lies within `2γ`; and every active
/// point is within `4γ` of a stored representative, where with `k + 1`
/// attractors only points expiring no earlier than every attractor count.
pub fn audit_six_guess(
    snapshot: &SixGuessSnapshot,
    k: usize,
    active: &[TimedPoint],
    metric: &Metric,
) -> Check {
    let two_gamma = 2.0 * snapshot.gamma;
    let d = |a: &TimedPoint, b: &TimedPoint| metric.distance(a, b).expect("audited points belong to the metric");
    let attractors: Vec<&TimedPoint> = snapshot.attractor_points().collect();
    let reps: Vec<&TimedPoint> = snapshot.representative_points().collect();

    if attractors.len() > k + 1 {
        return fail(
            Invariant::AttractorCount,
            format!("{} attractors for k = {k}", attractors.len()),
        );
    }
    for (i, a) in attractors.iter().enumerate() {
        for b in &attractors[i + 1..] {
            let dist = d(a, b);
            if dist <= two_gamma {
                return fail(
                    Invariant::AttractorSeparation,
                    format!("attractors {} and {} are {dist} apart", a.id, b.id),
                );
            }
        }
    }
    for (a, rep_id) in &snapshot.attractors {
        let Some(r) = reps.iter().find(|r| r.id == *rep_id) else {
            return fail(
                Invariant::RepresentativeValidity,
                format!("representative {rep_id} of attractor {} is not stored", a.id),
            );
        };
        if r.t_arr < a.t_arr || d(r, a) > two_gamma {
            return fail(
                Invariant::RepresentativeValidity,
                format!("representative {} is not attracted by {}", r.id, a.id),
            );
        }
    }
    for (r, owner) in &snapshot.representatives {
        if let Some(a) = owner {
            if !snapshot.attractors.iter().any(|(x, rep)| x.id == *a && rep == &r.id) {
                return fail(
                    Invariant::RepresentativeValidity,
                    format!("representative {} names attractor {a}, which does not name it back", r.id),
                );
            }
        }
    }

    let (invariant, threshold) = match attractors.len() {
        n if n <= k => (Invariant::CoverageAllActive, None),
        _ => (
            Invariant::CoverageLateExpiring,
            attractors.iter().map(|a| a.t_del).min(),
        ),
    };
    let four_gamma = 4.0 * snapshot.gamma;
    for x in active {
        if threshold.is_some_and(|t| x.t_del < t) {
            continue;
        }
        if !reps.iter().any(|r| d(x, r) <= four_gamma) {
            return fail(
                invariant,
                format!("active point {} is farther than 4γ from every representative", x.id),
            );
        }
    }
    Ok(())
}

/// `k + 1` points pairwise farther than `2γ'` apart.
pub fn check_witness(witness: &[TimedPoint], k: usize, gamma_below: f64, metric: &Metric) -> Check {
    if witness.len() != k + 1 {
        return fail(
            Invariant::WitnessSeparation,
            format!("witness has {} points, expected {}", witness.len(), k + 1),
        );
    }
    for (i, a) in witness.iter().enumerate() {
        for b in &witness[i + 1..] {
            let dist = metric.distance(a, b).expect("witness points belong to the metric");
            if dist <= 2.0 * gamma_below {
                return fail(
                    Invariant::WitnessSeparation,
                    format!("witness points {} and {} are {dist} apart, 2γ' = {}", a.id, b.id, 2.0 * gamma_below),
                );
            }
        }
    }
    Ok(())
}

/// Per-guess storage never above `3k + 3 + h`.
pub fn space_bound(k: usize, h: usize) -> usize {
    3 * k + 3 + h
}

pub fn check_space(stored: &[usize], k: usize, h: usize) -> Check {
    let bound = space_bound(k, h);
    match stored.iter().enumerate().find(|(_, &s)| s > bound) {
        Some((g, &s)) => Err(Violation::new(
            Invariant::SpaceBound,
            format!("{s} points stored, bound 3k+3+H = {bound}"),
        )
        .at(Some(g), 0)),
        None => Ok(()),
    }
}
