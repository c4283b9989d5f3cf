//! Replaying streams through either algorithm, with optional verification
//! and operation counting.
//!
//! The harness keeps the active set itself. Radii, oracle values and the
//! coverage audits are computed against that copy with a forked metric, so
//! neither the memory nor the distance counters of the algorithm under test
//! include them.

use std::collections::BTreeMap;
use std::io::Write;
use std::time::Instant;

use serde::Serialize;

use crate::audit::{self, Invariant, Violation, VanishingTracker};
use crate::error::{Error, Result};
use crate::metric::Metric;
use crate::model::{validate_stream, Time, TimedPoint};
use crate::oracle::{exact_kcenter_with_cap, Solution, DEFAULT_ENUMERATION_CAP};
use crate::six_approx::SixApproxClustering;
use crate::streamgen::{measure_h, observed_bounds, GeneratedStream};
use crate::two_approx::TwoApproxClustering;

/// Streams longer than this skip the quadratic H measurement.
pub const MEASURE_H_LIMIT: usize = 20_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Algorithm {
    Two,
    Six,
}

impl Algorithm {
    /// Guaranteed approximation factor for a tolerance `epsilon`.
    pub fn factor(self, epsilon: f64) -> f64 {
        match self {
            Algorithm::Two => 2.0 + epsilon,
            Algorithm::Six => 6.0 + epsilon,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum QuerySchedule {
    /// After every arrival, at its arrival time.
    EveryUpdate,
    /// Once, at the last arrival time.
    AtEnd,
    /// At the given times, interleaved with arrivals (a query at `t` runs
    /// after the arrival at `t`, if any).
    AtTimes(Vec<Time>),
}

#[derive(Debug, Clone)]
pub struct RunConfig {
    pub algorithm: Algorithm,
    pub k: usize,
    pub epsilon: f64,
    /// Declared `(d_min, d_max)`; `None` scans the stream for them.
    pub bounds: Option<(f64, f64)>,
    /// Run a single guess at this radius instead of a full ladder.
    pub single_guess: Option<f64>,
    pub schedule: QuerySchedule,
    pub reclustering: bool,
    pub parallel: bool,
    pub verify: bool,
    pub oracle_cap: usize,
}

impl RunConfig {
    pub fn new(algorithm: Algorithm, k: usize, epsilon: f64) -> Self {
        Self {
            algorithm,
            k,
            epsilon,
            bounds: None,
            single_guess: None,
            schedule: QuerySchedule::EveryUpdate,
            reclustering: true,
            parallel: false,
            verify: false,
            oracle_cap: DEFAULT_ENUMERATION_CAP,
        }
    }
}

/// One executed query. Empty CSV cells stand for absent values.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReportRow {
    pub t: Time,
    pub active: usize,
    pub radius: f64,
    pub oracle_radius: Option<f64>,
    pub ratio: Option<f64>,
    pub gamma: Option<f64>,
    pub distance_evals: u64,
    pub ops: u64,
    /// Largest number of points currently held by one guess.
    pub stored: usize,
    /// Largest number of points ever held by one guess.
    pub peak_stored: usize,
    pub measured_h: Option<usize>,
}

/// Column names of the CSV report, in order.
pub const REPORT_COLUMNS: [&str; 11] = [
    "t",
    "active",
    "radius",
    "oracle_radius",
    "ratio",
    "gamma",
    "distance_evals",
    "ops",
    "stored",
    "peak_stored",
    "measured_h",
];

#[derive(Debug, Clone, PartialEq)]
pub struct RunReport {
    pub rows: Vec<ReportRow>,
    pub points: usize,
    pub d_min: f64,
    pub d_max: f64,
    pub guesses: usize,
    pub measured_h: Option<usize>,
    pub distance_evals: u64,
    pub ops: u64,
    pub ops_per_guess: Vec<u64>,
    pub peak_stored_per_guess: Vec<usize>,
}

impl RunReport {
    pub fn write_csv(&self, w: impl Write) -> Result<()> {
        let mut out = csv::Writer::from_writer(w);
        let err = |e: csv::Error| Error::Io {
            path: "report".into(),
            message: e.to_string(),
        };
        if self.rows.is_empty() {
            out.write_record(REPORT_COLUMNS).map_err(err)?;
        }
        for row in &self.rows {
            out.serialize(row).map_err(err)?;
        }
        out.flush().map_err(|e| Error::Io {
            path: "report".into(),
            message: e.to_string(),
        })
    }

    pub fn to_csv(&self) -> String {
        let mut buf = Vec::new();
        self.write_csv(&mut buf).expect("writing to memory");
        String::from_utf8(buf).expect("csv output is utf-8")
    }

    pub fn max_ratio(&self) -> Option<f64> {
        self.rows.iter().filter_map(|r| r.ratio).reduce(f64::max)
    }
}

/// Outcome of a verified replay.
#[derive(Debug, Clone)]
pub struct VerificationReport {
    pub run: RunReport,
    /// How many times each invariant was checked and held.
    pub passed: BTreeMap<Invariant, u64>,
    pub first_failure: Option<Violation>,
    /// Debug dump of the offending guess at the first failure.
    pub state_dump: Option<String>,
}

impl VerificationReport {
    pub fn ok(&self) -> bool {
        self.first_failure.is_none()
    }

    /// One line per invariant, then the failure if any.
    pub fn summary(&self) -> String {
        let mut s = String::new();
        for (inv, n) in &self.passed {
            s.push_str(&format!("{:<24} {n} checks passed\n", inv.name()));
        }
        match &self.first_failure {
            Some(v) => s.push_str(&format!("FAILED: {v}\n")),
            None => s.push_str("all checks passed\n"),
        }
        s
    }
}

enum Engine {
    Two(TwoApproxClustering),
    Six(SixApproxClustering),
}

impl Engine {
    fn build(config: &RunConfig, d_min: f64, d_max: f64, metric: Metric) -> Result<Self> {
        let parallel = config.parallel && !config.verify;
        Ok(match (config.algorithm, config.single_guess) {
            (Algorithm::Two, gamma) => {
                let c = match gamma {
                    Some(g) => TwoApproxClustering::single_guess(config.k, g, metric)?,
                    None => TwoApproxClustering::new(config.k, config.epsilon, d_min, d_max, metric)?,
                };
                Engine::Two(c.with_reclustering(config.reclustering).with_parallel(parallel))
            }
            (Algorithm::Six, gamma) => {
                let c = match gamma {
                    Some(g) => SixApproxClustering::single_guess(config.k, g, metric)?,
                    None => SixApproxClustering::new(config.k, config.epsilon, d_min, d_max, metric)?,
                };
                Engine::Six(c.with_parallel(parallel))
            }
        })
    }

    fn metric(&self) -> &Metric {
        match self {
            Engine::Two(c) => c.metric(),
            Engine::Six(c) => c.metric(),
        }
    }

    fn insert(&mut self, p: TimedPoint) -> Result<()> {
        match self {
            Engine::Two(c) => c.insert(p),
            Engine::Six(c) => c.update(p),
        }
    }

    fn query(&mut self, t: Time) -> Result<Solution> {
        match self {
            Engine::Two(c) => c.query(t),
            Engine::Six(c) => c.query(t),
        }
    }

    fn guess_count(&self) -> usize {
        match self {
            Engine::Two(c) => c.guess_count(),
            Engine::Six(c) => c.guess_count(),
        }
    }

    fn distance_evals(&self) -> u64 {
        match self {
            Engine::Two(c) => c.distance_evaluations(),
            Engine::Six(c) => c.distance_evaluations(),
        }
    }

    fn ops_per_guess(&self) -> Vec<u64> {
        match self {
            Engine::Two(c) => c.ops_per_guess(),
            Engine::Six(c) => c.ops_per_guess(),
        }
    }

    fn stored_per_guess(&mut self) -> Vec<usize> {
        match self {
            Engine::Two(c) => c.stored_per_guess(),
            Engine::Six(c) => c.audit_space().into_iter().map(|(a, r)| a + r).collect(),
        }
    }

    fn peak_stored_per_guess(&self) -> Vec<usize> {
        match self {
            Engine::Two(c) => c.peak_stored_per_guess(),
            Engine::Six(c) => c.peak_stored_per_guess(),
        }
    }
}

struct Verifier {
    k: usize,
    factor: f64,
    /// Single-guess runs are held to `radius <= c * gamma` instead.
    single_guess: Option<(f64, f64)>,
    cap: usize,
    space_h: Option<usize>,
    passed: BTreeMap<Invariant, u64>,
    tracker: VanishingTracker,
    failure: Option<(Violation, Option<String>)>,
}

impl Verifier {
    fn record(&mut self, invariant: Invariant, outcome: std::result::Result<(), Violation>, dump: impl FnOnce() -> Option<String>) {
        match outcome {
            Ok(()) => *self.passed.entry(invariant).or_default() += 1,
            Err(v) => {
                if self.failure.is_none() {
                    self.failure = Some((v, dump()));
                }
            }
        }
    }

    fn failed(&self) -> bool {
        self.failure.is_some()
    }

    fn audit_structure(&mut self, engine: &mut Engine, active: &[TimedPoint], t: Time) {
        let probe = engine.metric().fork();
        let k = self.k;
        match engine {
            Engine::Two(c) => {
                for g in 0..c.guess_count() {
                    let snap = c.snapshot(g);
                    let outcome = audit::audit_two_guess(&snap, k, &probe).map_err(|v| v.at(Some(g), t));
                    let inv = outcome.as_ref().err().map_or(Invariant::CenterSeparation, |v| v.invariant);
                    if outcome.is_ok() {
                        for i in Invariant::CLUSTERING {
                            *self.passed.entry(i).or_default() += 1;
                        }
                    } else {
                        self.record(inv, outcome, || Some(format!("{snap:#?}")));
                    }
                    let outcome = self.tracker.observe(g, &snap).map_err(|v| v.at(Some(g), t));
                    self.record(Invariant::VanishingMonotonicity, outcome, || Some(format!("{snap:#?}")));
                    if self.failed() {
                        return;
                    }
                }
            }
            Engine::Six(c) => {
                let sizes = c.audit_space();
                for g in 0..c.guess_count() {
                    let snap = c.snapshot(g);
                    let outcome = audit::audit_six_guess(&snap, k, active, &probe).map_err(|v| v.at(Some(g), t));
                    match outcome {
                        Ok(()) => {
                            *self.passed.entry(Invariant::AttractorCount).or_default() += 1;
                            *self.passed.entry(Invariant::AttractorSeparation).or_default() += 1;
                            *self.passed.entry(Invariant::RepresentativeValidity).or_default() += 1;
                            let cov = if snap.attractors.len() <= k {
                                Invariant::CoverageAllActive
                            } else {
                                Invariant::CoverageLateExpiring
                            };
                            *self.passed.entry(cov).or_default() += 1;
                        }
                        Err(v) => self.record(v.invariant, Err(v), || Some(format!("{snap:#?}"))),
                    }
                    if self.failed() {
                        return;
                    }
                }
                if let Some(h) = self.space_h {
                    let stored: Vec<usize> = sizes.iter().map(|(a, r)| a + r).collect();
                    let outcome = audit::check_space(&stored, k, h).map_err(|v| v.at(None, t));
                    self.record(Invariant::SpaceBound, outcome, || Some(format!("{sizes:?}")));
                }
            }
        }
    }

    fn check_query(&mut self, engine: &mut Engine, radius: f64, oracle: f64, t: Time) -> Result<()> {
        let (bound, against) = match self.single_guess {
            Some((c, gamma)) => (c * gamma, format!("{c} × gamma")),
            None => (self.factor * oracle, format!("{} × r*", self.factor)),
        };
        let outcome = if radius <= bound {
            Ok(())
        } else {
            Err(Violation::new(
                Invariant::Approximation,
                format!("radius {radius} exceeds {against} = {bound}"),
            )
            .at(None, t))
        };
        self.record(Invariant::Approximation, outcome, || None);
        if let Engine::Two(c) = engine {
            if let Some(w) = c.witness(t)? {
                let probe = c.metric().fork();
                let mut outcome = audit::check_witness(&w.points, self.k, w.gamma, &probe);
                if outcome.is_ok() && oracle <= w.gamma {
                    outcome = Err(Violation::new(
                        Invariant::WitnessSeparation,
                        format!("r* = {oracle} does not exceed γ' = {}", w.gamma),
                    ));
                }
                let outcome = outcome.map_err(|v| v.at(None, t));
                self.record(Invariant::WitnessSeparation, outcome, || Some(format!("{w:#?}")));
            }
        }
        Ok(())
    }
}

fn ratio(radius: f64, oracle: f64) -> f64 {
    if oracle > 0.0 {
        radius / oracle
    } else if radius == 0.0 {
        1.0
    } else {
        f64::INFINITY
    }
}

struct Replay<'a> {
    config: &'a RunConfig,
    engine: Engine,
    active: Vec<TimedPoint>,
    probe: Metric,
    rows: Vec<ReportRow>,
    measured_h: Option<usize>,
    verifier: Option<Verifier>,
}

impl Replay<'_> {
    fn query(&mut self, t: Time) -> Result<()> {
        let solution = self.engine.query(t)?;
        self.active.retain(|p| p.t_del > t);
        let radius = match solution.radius {
            Some(r) => r,
            None => solution.evaluate(&self.probe, &self.active)?,
        };
        let oracle = match &self.verifier {
            Some(v) => exact_kcenter_with_cap(&self.probe, &self.active, self.config.k, v.cap)?.radius,
            None => None,
        };
        if let (Some(v), Some(r_star)) = (self.verifier.as_mut(), oracle) {
            v.check_query(&mut self.engine, radius, r_star, t)?;
            v.audit_structure(&mut self.engine, &self.active, t);
        }
        let stored = self.engine.stored_per_guess();
        self.rows.push(ReportRow {
            t,
            active: self.active.len(),
            radius,
            oracle_radius: oracle,
            ratio: oracle.map(|o| ratio(radius, o)),
            gamma: solution.guess_used,
            distance_evals: self.engine.distance_evals(),
            ops: self.engine.ops_per_guess().iter().sum(),
            stored: stored.iter().copied().max().unwrap_or(0),
            peak_stored: self.engine.peak_stored_per_guess().into_iter().max().unwrap_or(0),
            measured_h: self.measured_h,
        });
        Ok(())
    }

    fn stopped(&self) -> bool {
        self.verifier.as_ref().is_some_and(Verifier::failed)
    }
}

fn replay(config: &RunConfig, points: Vec<TimedPoint>, metric: Metric) -> Result<(RunReport, Option<Verifier>)> {
    if config.k == 0 {
        return Err(Error::InvalidK);
    }
    let (d_min, d_max) = match config.bounds {
        Some(b) => b,
        None => {
            let mut sorted = points.clone();
            sorted.sort_by_key(|p| p.t_arr);
            observed_bounds(&metric, &sorted)?
        }
    };
    let stream = validate_stream(points, &metric, d_min, d_max)?;
    let measured_h = (stream.len() <= MEASURE_H_LIMIT).then(|| measure_h(&stream));

    let verifier = if config.verify {
        let concurrent = stream.max_concurrent();
        if concurrent > config.oracle_cap {
            return Err(Error::InvalidParameter(format!(
                "verification needs at most {} simultaneously active points, the stream reaches {concurrent}",
                config.oracle_cap
            )));
        }
        Some(Verifier {
            k: config.k,
            factor: config.algorithm.factor(config.epsilon),
            single_guess: config.single_guess.map(|g| (config.algorithm.factor(0.0), g)),
            cap: config.oracle_cap,
            space_h: measured_h,
            passed: BTreeMap::new(),
            tracker: VanishingTracker::new(),
            failure: None,
        })
    } else {
        None
    };

    let engine = Engine::build(config, d_min, d_max, metric)?;
    let mut run = Replay {
        config,
        probe: engine.metric().fork(),
        engine,
        active: Vec::new(),
        rows: Vec::new(),
        measured_h,
        verifier,
    };

    let mut pending: Vec<Time> = match &config.schedule {
        QuerySchedule::AtTimes(ts) => {
            let mut ts = ts.clone();
            ts.sort_unstable();
            ts.dedup();
            ts.reverse();
            ts
        }
        _ => Vec::new(),
    };
    let last_arrival = stream.points.last().map(|p| p.t_arr);
    let n_points = stream.len();

    for p in stream.points {
        let t = p.t_arr;
        while pending.last().is_some_and(|&q| q < t) {
            let q = pending.pop().expect("checked");
            run.query(q)?;
            if run.stopped() {
                break;
            }
        }
        if run.stopped() {
            break;
        }
        run.engine.insert(p.clone())?;
        run.active.retain(|a| a.t_del > t);
        run.active.push(p);
        if let Some(v) = run.verifier.as_mut() {
            v.audit_structure(&mut run.engine, &run.active, t);
        }
        if run.stopped() {
            break;
        }
        let due = match &config.schedule {
            QuerySchedule::EveryUpdate => true,
            QuerySchedule::AtEnd => Some(t) == last_arrival,
            QuerySchedule::AtTimes(_) => {
                let due = pending.last() == Some(&t);
                if due {
                    pending.pop();
                }
                due
            }
        };
        if due {
            run.query(t)?;
        }
    }
    while let Some(q) = pending.pop() {
        if run.stopped() {
            break;
        }
        run.query(q)?;
    }

    let ops_per_guess = run.engine.ops_per_guess();
    let report = RunReport {
        rows: run.rows,
        points: n_points,
        d_min,
        d_max,
        guesses: run.engine.guess_count(),
        measured_h,
        distance_evals: run.engine.distance_evals(),
        ops: ops_per_guess.iter().sum(),
        ops_per_guess,
        peak_stored_per_guess: run.engine.peak_stored_per_guess(),
    };
    Ok((report, run.verifier))
}

/// Replays `points` (sorted by arrival first) and runs the scheduled queries.
pub fn run(config: &RunConfig, points: Vec<TimedPoint>, metric: Metric) -> Result<RunReport> {
    let mut config = config.clone();
    config.verify = false;
    replay(&config, points, metric).map(|(report, _)| report)
}

/// Like [`run`], but audits every invariant after every update and query,
/// compares each query against the exact optimum, and stops at the first
/// failure. Always single-threaded.
pub fn verify(config: &RunConfig, points: Vec<TimedPoint>, metric: Metric) -> Result<VerificationReport> {
    let mut config = config.clone();
    config.verify = true;
    config.parallel = false;
    let (run, verifier) = replay(&config, points, metric)?;
    let v = verifier.expect("verification enabled");
    let (first_failure, state_dump) = match v.failure {
        Some((violation, dump)) => (Some(violation), dump),
        None => (None, None),
    };
    Ok(VerificationReport {
        run,
        passed: v.passed,
        first_failure,
        state_dump,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BenchRow {
    pub n: usize,
    pub guesses: usize,
    pub ops: u64,
    pub max_guess_ops: u64,
    pub distance_evals: u64,
    pub peak_stored: usize,
    pub wall_ms: f64,
    /// `ops` divided by the previous row's `ops`.
    pub growth: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BenchReport {
    pub rows: Vec<BenchRow>,
}

impl BenchReport {
    pub fn growth_ratios(&self) -> Vec<f64> {
        self.rows.iter().filter_map(|r| r.growth).collect()
    }

    pub fn to_csv(&self) -> String {
        let mut out = csv::Writer::from_writer(Vec::new());
        for row in &self.rows {
            out.serialize(row).expect("writing to memory");
        }
        String::from_utf8(out.into_inner().expect("writing to memory")).expect("utf-8")
    }
}

/// Replays each stream once, queried only at the end, and reports counters.
pub fn bench<I>(config: &RunConfig, streams: I) -> Result<BenchReport>
where
    I: IntoIterator<Item = (Vec<TimedPoint>, Metric)>,
{
    let mut config = config.clone();
    config.verify = false;
    config.schedule = QuerySchedule::AtEnd;
    let mut rows: Vec<BenchRow> = Vec::new();
    for (points, metric) in streams {
        let n = points.len();
        let start = Instant::now();
        let report = run(&config, points, metric)?;
        let wall_ms = start.elapsed().as_secs_f64() * 1e3;
        let growth = rows.last().map(|prev: &BenchRow| report.ops as f64 / prev.ops as f64);
        rows.push(BenchRow {
            n,
            guesses: report.guesses,
            ops: report.ops,
            max_guess_ops: report.ops_per_guess.iter().copied().max().unwrap_or(0),
            distance_evals: report.distance_evals,
            peak_stored: report.peak_stored_per_guess.iter().copied().max().unwrap_or(0),
            wall_ms,
            growth,
        });
    }
    Ok(BenchReport { rows })
}

/// Benchmarks prefixes of one stream, all with the bounds of the full
/// stream so every size runs the same ladder.
pub fn bench_prefixes(config: &RunConfig, stream: &GeneratedStream, sizes: &[usize]) -> Result<BenchReport> {
    let mut config = config.clone();
    if config.bounds.is_none() {
        config.bounds = Some((stream.stream.d_min, stream.stream.d_max));
    }
    bench(
        &config,
        sizes
            .iter()
            .map(|&n| (stream.stream.prefix(n).points, stream.metric.fork())),
    )
}
