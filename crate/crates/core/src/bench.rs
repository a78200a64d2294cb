//! Stress-test harness: a query mix run from concurrent clients, with QPS
//! per query and the penalized average QPS over the mix.
//!
//! Every run of query `i` takes `t` seconds of wall time, or `penalty`
//! seconds if it failed or exceeded the timeout. With `t̄ᵢ` the mean of
//! those penalized times, `pAvgQPS = (1/n) Σᵢ 1/t̄ᵢ`.

use std::collections::hash_map::DefaultHasher;
use std::fmt::Write as _;
use std::hash::{Hash, Hasher};
use std::time::{Duration, Instant};

use crate::engine::EngineConfig;
use crate::store::Store;

/// Something that answers query text. The payload is only hashed, to check
/// that repeated runs agree.
pub trait QueryRunner: Sync {
    fn run(&self, query: &str, deadline: Instant) -> Result<String, String>;
}

impl QueryRunner for Store {
    fn run(&self, query: &str, deadline: Instant) -> Result<String, String> {
        let cfg = EngineConfig {
            deadline: Some(deadline),
            fault: None,
        };
        self.execute(query, &cfg)
            .map(|exec| exec.response.serialize())
            .map_err(|e| e.to_string())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum BenchError {
    #[error("at least one client is required")]
    NoClients,
    #[error("the penalty ({penalty:?}) must not be shorter than the timeout ({timeout:?})")]
    PenaltyBelowTimeout {
        penalty: Duration,
        timeout: Duration,
    },
    #[error("the timeout must be positive")]
    ZeroTimeout,
    #[error("the query mix is empty")]
    EmptyMix,
    #[error("repetitions must be at least 1")]
    NoRepetitions,
}

/// How long each client keeps issuing queries.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BenchLength {
    /// Every client runs the whole mix this many times.
    Repetitions(usize),
    /// Every client cycles through the mix until this much time has passed.
    Duration(Duration),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BenchConfig {
    pub clients: usize,
    pub length: BenchLength,
    pub timeout: Duration,
    pub penalty: Duration,
    pub warmup: bool,
}

impl Default for BenchConfig {
    fn default() -> Self {
        BenchConfig {
            clients: 1,
            length: BenchLength::Repetitions(1),
            timeout: Duration::from_secs(180),
            penalty: Duration::from_secs(180),
            warmup: true,
        }
    }
}

impl BenchConfig {
    pub fn validate(&self) -> Result<(), BenchError> {
        if self.clients == 0 {
            return Err(BenchError::NoClients);
        }
        if self.timeout.is_zero() {
            return Err(BenchError::ZeroTimeout);
        }
        if self.penalty < self.timeout {
            return Err(BenchError::PenaltyBelowTimeout {
                penalty: self.penalty,
                timeout: self.timeout,
            });
        }
        if self.length == BenchLength::Repetitions(0) {
            return Err(BenchError::NoRepetitions);
        }
        Ok(())
    }
}

/// One measured execution: its wall time and whether it succeeded in time.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Run {
    pub time: Duration,
    pub ok: bool,
}

/// Measurements of one query of the mix.
#[derive(Debug, Clone, PartialEq)]
pub struct QueryStats {
    pub id: String,
    pub executions: usize,
    pub successes: usize,
    pub failures: usize,
    /// Every measured run in the order it finished per client.
    pub runs: Vec<Run>,
    /// Whether every successful run returned the same payload.
    pub consistent: bool,
    payload: Option<u64>,
}

impl QueryStats {
    fn new(id: &str) -> Self {
        QueryStats {
            id: id.to_owned(),
            executions: 0,
            successes: 0,
            failures: 0,
            runs: Vec::new(),
            consistent: true,
            payload: None,
        }
    }

    fn record(&mut self, elapsed: Duration, outcome: Option<u64>) {
        self.executions += 1;
        self.runs.push(Run {
            time: elapsed,
            ok: outcome.is_some(),
        });
        match outcome {
            Some(hash) => {
                self.successes += 1;
                match self.payload {
                    None => self.payload = Some(hash),
                    Some(first) if first != hash => self.consistent = false,
                    Some(_) => {}
                }
            }
            None => self.failures += 1,
        }
    }

    fn merge(&mut self, other: QueryStats) {
        self.executions += other.executions;
        self.successes += other.successes;
        self.failures += other.failures;
        self.runs.extend(other.runs);
        self.consistent &= other.consistent;
        match (self.payload, other.payload) {
            (None, p) => self.payload = p,
            (Some(a), Some(b)) if a != b => self.consistent = false,
            _ => {}
        }
    }

    /// Successful executions per second of time spent on them; 0 without
    /// successes.
    pub fn qps(&self) -> f64 {
        let spent: f64 = self
            .runs
            .iter()
            .filter(|r| r.ok)
            .map(|r| r.time.as_secs_f64())
            .sum();
        if self.successes == 0 || spent <= 0.0 {
            0.0
        } else {
            self.successes as f64 / spent
        }
    }

    /// `(seconds, succeeded)` per run, failed runs charged at the penalty.
    fn penalized(&self, penalty: Duration) -> impl Iterator<Item = (f64, bool)> + '_ {
        self.runs.iter().map(move |r| {
            if r.ok {
                (r.time.as_secs_f64(), true)
            } else {
                (penalty.as_secs_f64(), false)
            }
        })
    }

    /// Mean runtime in seconds with failures charged at `penalty`.
    pub fn penalized_mean(&self, penalty: Duration) -> f64 {
        if self.executions == 0 {
            return penalty.as_secs_f64();
        }
        self.penalized(penalty).map(|(t, _)| t).sum::<f64>() / self.executions as f64
    }
}

/// `(1/n) Σ 1/t̄ᵢ` over per-query penalized mean runtimes in seconds.
pub fn pavgqps(penalized_means: &[f64]) -> f64 {
    if penalized_means.is_empty() {
        return 0.0;
    }
    penalized_means.iter().map(|t| 1.0 / t).sum::<f64>() / penalized_means.len() as f64
}

#[derive(Debug, Clone, PartialEq)]
pub struct BenchReport {
    pub queries: Vec<QueryStats>,
    pub penalty: Duration,
    pub clients: usize,
    pub elapsed: Duration,
}

impl BenchReport {
    pub fn pavgqps(&self) -> f64 {
        let means: Vec<f64> = self
            .queries
            .iter()
            .map(|q| q.penalized_mean(self.penalty))
            .collect();
        pavgqps(&means)
    }

    /// Human-readable table.
    pub fn table(&self) -> String {
        let mut out = String::new();
        let width = self
            .queries
            .iter()
            .map(|q| q.id.len())
            .max()
            .unwrap_or(5)
            .max(5);
        let _ = writeln!(
            out,
            "{:<width$}  {:>6}  {:>6}  {:>6}  {:>12}  {:>12}",
            "query", "runs", "ok", "failed", "mean (s)", "qps"
        );
        for q in &self.queries {
            let _ = writeln!(
                out,
                "{:<width$}  {:>6}  {:>6}  {:>6}  {:>12.6}  {:>12.3}{}",
                q.id,
                q.executions,
                q.successes,
                q.failures,
                q.penalized_mean(self.penalty),
                q.qps(),
                if q.consistent {
                    ""
                } else {
                    "  (payload changed)"
                }
            );
        }
        let _ = writeln!(
            out,
            "pAvgQPS {:.6} over {} queries, {} client(s), {:.2?}",
            self.pavgqps(),
            self.queries.len(),
            self.clients,
            self.elapsed
        );
        out
    }

    /// One tagged line per metric: `qps <query-id> <value>` and
    /// `pavgqps <value>`.
    pub fn tagged_lines(&self) -> String {
        let mut out = String::new();
        for q in &self.queries {
            let _ = writeln!(out, "qps {} {}", q.id, q.qps());
        }
        let _ = writeln!(out, "pavgqps {}", self.pavgqps());
        out
    }
}

fn hash_payload(payload: &str) -> u64 {
    let mut h = DefaultHasher::new();
    payload.hash(&mut h);
    h.finish()
}

fn run_once(runner: &dyn QueryRunner, query: &str, timeout: Duration) -> (Duration, Option<u64>) {
    let start = Instant::now();
    let result = runner.run(query, start + timeout);
    let elapsed = start.elapsed();
    let outcome = match result {
        Ok(payload) if elapsed <= timeout => Some(hash_payload(&payload)),
        _ => None,
    };
    (elapsed, outcome)
}

/// Runs the mix `(id, query text)` as configured. Each client works through
/// the mix starting at its own offset.
pub fn run_bench(
    runner: &dyn QueryRunner,
    mix: &[(String, String)],
    cfg: &BenchConfig,
) -> Result<BenchReport, BenchError> {
    cfg.validate()?;
    if mix.is_empty() {
        return Err(BenchError::EmptyMix);
    }
    if cfg.warmup {
        for (_, query) in mix {
            let _ = run_once(runner, query, cfg.timeout);
        }
    }
    let start = Instant::now();
    let per_client: Vec<Vec<QueryStats>> = std::thread::scope(|scope| {
        let handles: Vec<_> = (0..cfg.clients)
            .map(|client| {
                scope.spawn(move || {
                    let mut stats: Vec<QueryStats> =
                        mix.iter().map(|(id, _)| QueryStats::new(id)).collect();
                    let mut step = 0usize;
                    loop {
                        match cfg.length {
                            BenchLength::Repetitions(r) if step >= r * mix.len() => break,
                            BenchLength::Duration(d) if step > 0 && start.elapsed() >= d => break,
                            _ => {}
                        }
                        let i = (client + step) % mix.len();
                        let (elapsed, outcome) = run_once(runner, &mix[i].1, cfg.timeout);
                        stats[i].record(elapsed, outcome);
                        step += 1;
                    }
                    stats
                })
            })
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("bench client panicked"))
            .collect()
    });
    let mut queries: Vec<QueryStats> = mix.iter().map(|(id, _)| QueryStats::new(id)).collect();
    for client in per_client {
        for (total, part) in queries.iter_mut().zip(client) {
            total.merge(part);
        }
    }
    Ok(BenchReport {
        queries,
        penalty: cfg.penalty,
        clients: cfg.clients,
        elapsed: start.elapsed(),
    })
}
