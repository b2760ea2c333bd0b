//! Monte Carlo experiment harness: capacity sweeps, capped-versus-
//! unconstrained policy comparisons, comparison against a no-interview
//! benchmark, and match-rate heatmaps over both capacities.
//!
//! Replications are the unit of parallelism. Replication `r` always reads
//! random stream `r` of the master seed and all per-replication results are
//! collected in replication order before any aggregation, so outputs are
//! identical — byte for byte — for any thread count. Within a replication,
//! the same market instance is shared across every capacity under study
//! (a paired design, so policy contrasts are not washed out by sampling
//! noise between arms).

use crate::engines::{doctor_da, two_step};
use crate::market::{compare_welfare, Arrangement, InterviewMatching, Side};
use crate::prefgen::{sample_market_for_replication, GenParams};
use crate::stability::{blocking_pairs, match_rate};
use rayon::prelude::*;
use std::fmt;

/// How many worker threads to use.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum Parallelism {
    /// Let the thread pool size itself to the machine.
    Auto,
    Threads(usize),
}

/// Run `work` inside a dedicated thread pool of the requested size.
fn with_pool<T: Send>(parallelism: Parallelism, work: impl FnOnce() -> T + Send) -> T {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Parallelism::Threads(n) = parallelism {
        builder = builder.num_threads(n.max(1));
    }
    let pool = builder.build().expect("thread pool construction cannot fail here");
    pool.install(work)
}

/// A sweep of the uniform doctor capacity `k` with the hospital capacity
/// fixed at `l`.
#[derive(Clone, Debug)]
pub struct SweepConfig {
    pub gen: GenParams,
    pub l: usize,
    pub k_min: usize,
    pub k_max: usize,
    pub replications: usize,
    pub parallelism: Parallelism,
}

impl SweepConfig {
    pub fn validate(&self) {
        self.gen.validate();
        assert!(self.l >= 1, "hospital capacity must be at least one");
        assert!(
            1 <= self.k_min && self.k_min <= self.k_max,
            "need 1 <= k_min <= k_max"
        );
        assert!(self.replications >= 1, "need at least one replication");
    }
}

/// One pipeline run within a sweep.
#[derive(Clone, PartialEq, Debug)]
pub struct SweepRow {
    pub k: usize,
    pub replication: u64,
    pub match_rate: f64,
    pub blocking_pairs: usize,
    pub doctors_zero_interviews: usize,
    pub mean_interviews_per_doctor: f64,
}

/// Per-`k` summary of a sweep.
#[derive(Clone, PartialEq, Debug)]
pub struct AggRow {
    pub k: usize,
    pub mean_match_rate: f64,
    pub sd_match_rate: f64,
    pub mean_blocking_pairs: f64,
    pub sd_blocking_pairs: f64,
    pub n_reps: usize,
}

fn zero_interview_doctors(nu: &InterviewMatching) -> usize {
    (0..nu.n_doctors()).filter(|&d| nu.of_doctor(d).is_empty()).count()
}

/// Run the pipeline for every `(k, replication)` pair of the sweep. Rows
/// come back sorted by replication, then `k`.
pub fn sweep_k(config: &SweepConfig) -> Vec<SweepRow> {
    config.validate();
    with_pool(config.parallelism, || {
        (0..config.replications as u64)
            .into_par_iter()
            .map(|replication| {
                let (market, _) = sample_market_for_replication(&config.gen, replication);
                (config.k_min..=config.k_max)
                    .map(|k| {
                        let arrangement = Arrangement::homogeneous(config.l, k, &market);
                        let outcome = two_step(&market, &arrangement);
                        SweepRow {
                            k,
                            replication,
                            match_rate: match_rate(&outcome.matching),
                            blocking_pairs: blocking_pairs(&market, &outcome.matching).count(),
                            doctors_zero_interviews: zero_interview_doctors(&outcome.interviews),
                            mean_interviews_per_doctor: outcome.interviews.pair_count() as f64
                                / market.n_doctors() as f64,
                        }
                    })
                    .collect::<Vec<_>>()
            })
            .collect::<Vec<_>>()
            .into_iter()
            .flatten()
            .collect()
    })
}

fn mean_and_sd(values: &[f64]) -> (f64, f64) {
    let n = values.len();
    let mean = values.iter().sum::<f64>() / n as f64;
    let sd = if n < 2 {
        0.0
    } else {
        let ss = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>();
        (ss / (n - 1) as f64).sqrt()
    };
    (mean, sd)
}

/// Collapse sweep rows to per-`k` means and sample standard deviations,
/// sorted by `k`.
pub fn aggregate(rows: &[SweepRow]) -> Vec<AggRow> {
    let mut ks: Vec<usize> = rows.iter().map(|r| r.k).collect();
    ks.sort_unstable();
    ks.dedup();
    ks.into_iter()
        .map(|k| {
            let mut rates = Vec::new();
            let mut blocking = Vec::new();
            for row in rows.iter().filter(|r| r.k == k) {
                rates.push(row.match_rate);
                blocking.push(row.blocking_pairs as f64);
            }
            let (mean_match_rate, sd_match_rate) = mean_and_sd(&rates);
            let (mean_blocking_pairs, sd_blocking_pairs) = mean_and_sd(&blocking);
            AggRow {
                k,
                mean_match_rate,
                sd_match_rate,
                mean_blocking_pairs,
                sd_blocking_pairs,
                n_reps: rates.len(),
            }
        })
        .collect()
}

/// Which policy arm a histogram row belongs to.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Debug)]
pub enum Arm {
    Capped,
    Uncapped,
}

impl fmt::Display for Arm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Arm::Capped => "capped",
            Arm::Uncapped => "uncapped",
        })
    }
}

/// One bar of an interview-count histogram: in `replication`, under `arm`,
/// exactly `doctor_count` doctors attended `interviews` interviews.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub struct HistRow {
    pub arm: Arm,
    pub interviews: usize,
    pub doctor_count: usize,
    pub replication: u64,
}

/// Per-replication contrast between a capped and an unconstrained doctor
/// search, on the same market.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub struct CompareRow {
    pub replication: u64,
    pub doctors_prefer_capped: usize,
    pub doctors_prefer_uncapped: usize,
    pub hospitals_prefer_capped: usize,
    pub hospitals_prefer_uncapped: usize,
    /// Blocking pairs of the uncapped outcome minus the capped outcome.
    pub excess_blocking_pairs: i64,
}

fn histogram_rows(arm: Arm, nu: &InterviewMatching, replication: u64) -> Vec<HistRow> {
    let mut counts = std::collections::BTreeMap::new();
    for d in 0..nu.n_doctors() {
        *counts.entry(nu.of_doctor(d).len()).or_insert(0usize) += 1;
    }
    counts
        .into_iter()
        .map(|(interviews, doctor_count)| HistRow { arm, interviews, doctor_count, replication })
        .collect()
}

/// Compare the `(l, k_cap)` pipeline against the same pipeline with doctors
/// unconstrained (capacity = number of hospitals), replication by
/// replication. Also returns the interview-count histograms of both arms.
pub fn compare_policies(
    gen: &GenParams,
    l: usize,
    k_cap: usize,
    replications: usize,
    parallelism: Parallelism,
) -> (Vec<CompareRow>, Vec<HistRow>) {
    gen.validate();
    assert!(l >= 1 && k_cap >= 1 && replications >= 1);
    let per_rep: Vec<(CompareRow, Vec<HistRow>)> = with_pool(parallelism, || {
        (0..replications as u64)
            .into_par_iter()
            .map(|replication| {
                let (market, _) = sample_market_for_replication(gen, replication);
                let capped = two_step(&market, &Arrangement::homogeneous(l, k_cap, &market));
                let uncapped =
                    two_step(&market, &Arrangement::homogeneous(l, market.n_hospitals(), &market));
                let doctors =
                    compare_welfare(&capped.matching, &uncapped.matching, &market, Side::Doctor);
                let hospitals =
                    compare_welfare(&capped.matching, &uncapped.matching, &market, Side::Hospital);
                let row = CompareRow {
                    replication,
                    doctors_prefer_capped: doctors.prefers_a,
                    doctors_prefer_uncapped: doctors.prefers_b,
                    hospitals_prefer_capped: hospitals.prefers_a,
                    hospitals_prefer_uncapped: hospitals.prefers_b,
                    excess_blocking_pairs: blocking_pairs(&market, &uncapped.matching).count()
                        as i64
                        - blocking_pairs(&market, &capped.matching).count() as i64,
                };
                let mut hist = histogram_rows(Arm::Capped, &capped.interviews, replication);
                hist.extend(histogram_rows(Arm::Uncapped, &uncapped.interviews, replication));
                (row, hist)
            })
            .collect()
    });
    let mut rows = Vec::with_capacity(per_rep.len());
    let mut hist = Vec::new();
    for (row, h) in per_rep {
        rows.push(row);
        hist.extend(h);
    }
    (rows, hist)
}

/// Per-replication contrast between the capped pipeline and a world with no
/// interview bottleneck at all (one-to-one deferred acceptance straight on
/// the full preference profile).
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub struct IdealRow {
    pub replication: u64,
    pub doctors_prefer_capped: usize,
    pub doctors_prefer_ideal: usize,
    pub hospitals_prefer_capped: usize,
    pub hospitals_prefer_ideal: usize,
}

/// Compare the `(l, k_cap)` pipeline against matching directly on the full
/// profile, replication by replication.
pub fn ideal_comparison(
    gen: &GenParams,
    l: usize,
    k_cap: usize,
    replications: usize,
    parallelism: Parallelism,
) -> Vec<IdealRow> {
    gen.validate();
    assert!(l >= 1 && k_cap >= 1 && replications >= 1);
    with_pool(parallelism, || {
        (0..replications as u64)
            .into_par_iter()
            .map(|replication| {
                let (market, _) = sample_market_for_replication(gen, replication);
                let capped = two_step(&market, &Arrangement::homogeneous(l, k_cap, &market));
                let ideal = doctor_da(&market);
                let doctors = compare_welfare(&capped.matching, &ideal, &market, Side::Doctor);
                let hospitals = compare_welfare(&capped.matching, &ideal, &market, Side::Hospital);
                IdealRow {
                    replication,
                    doctors_prefer_capped: doctors.prefers_a,
                    doctors_prefer_ideal: doctors.prefers_b,
                    hospitals_prefer_capped: hospitals.prefers_a,
                    hospitals_prefer_ideal: hospitals.prefers_b,
                }
            })
            .collect()
    })
}

/// One cell of a capacity heatmap.
#[derive(Clone, PartialEq, Debug)]
pub struct HeatCell {
    pub l: usize,
    pub k: usize,
    pub mean_match_rate: f64,
    pub n_reps: usize,
}

/// Mean match rate for every `(l, k)` in the given ranges, each replication
/// reusing one market across the whole grid. Cells come back sorted by `l`,
/// then `k`.
pub fn heatmap_lk(
    gen: &GenParams,
    l_range: &[usize],
    k_range: &[usize],
    replications: usize,
    parallelism: Parallelism,
) -> Vec<HeatCell> {
    gen.validate();
    assert!(!l_range.is_empty() && !k_range.is_empty() && replications >= 1);
    assert!(l_range.iter().chain(k_range).all(|&c| c >= 1));
    let per_rep: Vec<Vec<f64>> = with_pool(parallelism, || {
        (0..replications as u64)
            .into_par_iter()
            .map(|replication| {
                let (market, _) = sample_market_for_replication(gen, replication);
                let mut rates = Vec::with_capacity(l_range.len() * k_range.len());
                for &l in l_range {
                    for &k in k_range {
                        let outcome = two_step(&market, &Arrangement::homogeneous(l, k, &market));
                        rates.push(match_rate(&outcome.matching));
                    }
                }
                rates
            })
            .collect()
    });
    // sum in replication order so the result is thread-count independent
    let cells = l_range.len() * k_range.len();
    let mut sums = vec![0.0f64; cells];
    for rates in &per_rep {
        for (s, r) in sums.iter_mut().zip(rates) {
            *s += r;
        }
    }
    let mut out = Vec::with_capacity(cells);
    for (i, &l) in l_range.iter().enumerate() {
        for (j, &k) in k_range.iter().enumerate() {
            out.push(HeatCell {
                l,
                k,
                mean_match_rate: sums[i * k_range.len() + j] / replications as f64,
                n_reps: replications,
            });
        }
    }
    out
}
