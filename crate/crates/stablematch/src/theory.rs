//! Markets where everyone on each side shares the same ranking, plus the
//! closed forms and exhaustive enumerators that describe exactly how the
//! two-step pipeline behaves on them.
//!
//! With shared rankings and homogeneous capacities (every hospital may run
//! `l` interviews, every doctor may attend `k`), the interview stage settles
//! into consecutive blocks: the best doctors soak up all the interview slots
//! of the best hospitals, the next tier takes the next tier, and so on. The
//! final matching and its blocking pairs can then be counted in closed form,
//! which [`predict_common`] does exactly and [`naive_blocking_sum`] does in
//! a simpler first-cut way that miscounts at block boundaries (it is kept
//! so oracle reports can quantify that discrepancy).

use crate::engines::two_step;
use crate::market::{Arrangement, Market, MarketError, Preference};
use crate::stability::{blocking_pairs, is_adequate};
use rayon::prelude::*;
use thiserror::Error;

/// A market in which every doctor ranks hospitals `0, 1, 2, …` and every
/// hospital ranks doctors `0, 1, 2, …`, with everyone acceptable.
pub fn common_market(n_doctors: usize, n_hospitals: usize) -> Result<Market, MarketError> {
    let prefs_doctors = (0..n_doctors)
        .map(|_| Preference::all_acceptable((0..n_hospitals).collect()))
        .collect();
    let prefs_hospitals = (0..n_hospitals)
        .map(|_| Preference::all_acceptable((0..n_doctors).collect()))
        .collect();
    Market::new(prefs_doctors, prefs_hospitals)
}

/// What the block structure of a shared-ranking market implies for the
/// pipeline under homogeneous capacities: `m` full blocks, a partial block
/// of size `n`, and the resulting matched-hospital and blocking-pair counts.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub struct ClosedFormPrediction {
    /// Number of complete blocks (tiers in which every interview slot on the
    /// scarcer side fills up).
    pub m: usize,
    /// Matched pairs produced by the final, partial block.
    pub n: usize,
    /// Matched hospitals in the final matching.
    pub matched_count: usize,
    /// Blocking pairs of the final matching on the full profile.
    pub blocking_count: usize,
}

/// Exact closed-form outcome of the pipeline on
/// [`common_market`]`(n_doctors, n_hospitals)` under homogeneous capacities
/// (`l` interviews per hospital, `k` per doctor).
///
/// Derivation sketch: in block `r` (1-based), with `k > l`, doctors
/// `(r−1)l … rl−1` interview at hospitals `(r−1)k … rk−1` and the block's
/// top `l` hospitals match; every lower hospital in the block is left
/// wanting each doctor ranked below the block, which is where the blocking
/// pairs come from. The partial block matches
/// `n = min(|H|−mk, |D|−ml, min(l,k))` pairs. The `k < l` case mirrors this
/// with the sides swapped; at `k = l` blocks are square and the outcome is
/// the unique stable matching.
pub fn predict_common(l: usize, k: usize, n_doctors: usize, n_hospitals: usize) -> ClosedFormPrediction {
    assert!(l >= 1 && k >= 1, "capacities must be at least one");
    let d = n_doctors;
    let h = n_hospitals;
    let m = (h / k).min(d / l);
    let n = (h - m * k).min(d - m * l).min(l.min(k));
    let matched_count = m * l.min(k) + n;
    let blocking_count = if k > l {
        let full: usize = (1..=m).map(|r| (k - l) * (d - r * l)).sum();
        full + (h - m * k - n) * (d - m * l - n)
    } else if k < l {
        let full: usize = (1..=m).map(|r| (l - k) * (h - r * k)).sum();
        full + (h - m * k - n) * (d - m * l - n)
    } else {
        0
    };
    ClosedFormPrediction { m, n, matched_count, blocking_count }
}

/// First-cut nested-sum count of blocking pairs for the same setting as
/// [`predict_common`]. It prices each surplus interview slot in block `r`
/// as if the block always started at doctor `rk` (or hospital `rl`), which
/// over- or under-counts once blocks stop aligning; it can even go negative.
/// Kept so the oracle report can tabulate where it diverges from the exact
/// count.
pub fn naive_blocking_sum(l: usize, k: usize, n_doctors: usize, n_hospitals: usize) -> i64 {
    assert!(l >= 1 && k >= 1, "capacities must be at least one");
    let d = n_doctors as i64;
    let m = ((n_hospitals / k).min(n_doctors / l)) as i64;
    if k > l {
        let (k, l) = (k as i64, l as i64);
        (0..m).map(|r| ((l + 1)..=k).map(|i| d - (r * k + i)).sum::<i64>()).sum()
    } else if k < l {
        let (k, l) = (k as i64, l as i64);
        (0..m).map(|r| ((k + 1)..=l).map(|i| d - (r * l + i)).sum::<i64>()).sum()
    } else {
        0
    }
}

/// Matched-hospital and blocking-pair counts from actually running the
/// pipeline on a shared-ranking market with homogeneous capacities.
pub fn observed_common(l: usize, k: usize, n_doctors: usize, n_hospitals: usize) -> (usize, usize) {
    let market = common_market(n_doctors, n_hospitals).expect("sizes are at least two");
    let arrangement = Arrangement::homogeneous(l, k, &market);
    let outcome = two_step(&market, &arrangement);
    let report = blocking_pairs(&market, &outcome.matching);
    (outcome.matching.matched_count(), report.count())
}

#[derive(Error, Debug)]
pub enum TheoryError {
    #[error("exhaustive adequacy enumeration would take ~{estimate} pipeline runs (budget {budget}); pick smaller sizes or raise the budget")]
    BudgetExceeded { estimate: u128, budget: u128 },
}

/// Default work bound for [`global_adequacy_enumerate`]: roughly how many
/// pipeline runs we are willing to spend.
pub const DEFAULT_ADEQUACY_BUDGET: u128 = 2_000_000;

/// All capacity arrangements (every capacity between 1 and
/// `capacity_bound`) that are adequate at *every* strict preference profile
/// of an `n_doctors` × `n_hospitals` market — profiles range over all
/// orderings of the partner list with the stay-unmatched option slotted
/// anywhere. Returns arrangements in lexicographic `(iota, kappa)` order.
pub fn global_adequacy_enumerate(
    n_doctors: usize,
    n_hospitals: usize,
    capacity_bound: usize,
) -> Result<Vec<Arrangement>, TheoryError> {
    global_adequacy_enumerate_with_budget(
        n_doctors,
        n_hospitals,
        capacity_bound,
        DEFAULT_ADEQUACY_BUDGET,
    )
}

/// As [`global_adequacy_enumerate`] with an explicit work budget.
pub fn global_adequacy_enumerate_with_budget(
    n_doctors: usize,
    n_hospitals: usize,
    capacity_bound: usize,
    budget: u128,
) -> Result<Vec<Arrangement>, TheoryError> {
    assert!(n_doctors >= 2 && n_hospitals >= 2 && capacity_bound >= 1);
    let orderings_per_doctor = factorial(n_hospitals + 1);
    let orderings_per_hospital = factorial(n_doctors + 1);
    let profile_count = orderings_per_doctor
        .checked_pow(n_doctors as u32)
        .and_then(|a| orderings_per_hospital.checked_pow(n_hospitals as u32).and_then(|b| a.checked_mul(b)));
    let arrangement_count = (capacity_bound as u128).checked_pow((n_doctors + n_hospitals) as u32);
    let estimate = match (profile_count, arrangement_count) {
        (Some(p), Some(a)) => p.checked_mul(a).unwrap_or(u128::MAX),
        _ => u128::MAX,
    };
    if estimate > budget {
        return Err(TheoryError::BudgetExceeded { estimate, budget });
    }
    let profile_count = profile_count.expect("estimate fit the budget") as u64;
    let arrangement_count = arrangement_count.expect("estimate fit the budget") as usize;

    let arrangements: Vec<Arrangement> = (0..arrangement_count)
        .map(|mut idx| {
            let mut caps = vec![0usize; n_hospitals + n_doctors];
            for c in caps.iter_mut().rev() {
                *c = idx % capacity_bound + 1;
                idx /= capacity_bound;
            }
            let kappa = caps.split_off(n_hospitals);
            Arrangement { iota: caps, kappa }
        })
        .collect();

    // For each profile, mark which arrangements are adequate there, then
    // intersect across profiles. Conjunction is order-independent, so the
    // parallel fold is deterministic.
    let surviving = (0..profile_count)
        .into_par_iter()
        .fold(
            || vec![true; arrangement_count],
            |mut alive, profile_idx| {
                if alive.iter().any(|&a| a) {
                    let market = decode_profile(profile_idx, n_doctors, n_hospitals);
                    for (slot, arr) in alive.iter_mut().zip(&arrangements) {
                        if *slot && !is_adequate(&market, arr) {
                            *slot = false;
                        }
                    }
                }
                alive
            },
        )
        .reduce(
            || vec![true; arrangement_count],
            |mut a, b| {
                for (x, y) in a.iter_mut().zip(b) {
                    *x &= y;
                }
                a
            },
        );

    Ok(arrangements
        .into_iter()
        .zip(surviving)
        .filter_map(|(arr, alive)| alive.then_some(arr))
        .collect())
}

fn factorial(n: usize) -> u128 {
    (1..=n as u128).product()
}

/// Decode a profile index into a market: each agent independently gets one
/// of the `(partners + 1)!` orderings of its partner list plus the
/// stay-unmatched option.
fn decode_profile(mut idx: u64, n_doctors: usize, n_hospitals: usize) -> Market {
    let per_doctor = factorial(n_hospitals + 1) as u64;
    let per_hospital = factorial(n_doctors + 1) as u64;
    let mut prefs_doctors = Vec::with_capacity(n_doctors);
    for _ in 0..n_doctors {
        prefs_doctors.push(unrank_preference((idx % per_doctor) as usize, n_hospitals));
        idx /= per_doctor;
    }
    let mut prefs_hospitals = Vec::with_capacity(n_hospitals);
    for _ in 0..n_hospitals {
        prefs_hospitals.push(unrank_preference((idx % per_hospital) as usize, n_doctors));
        idx /= per_hospital;
    }
    Market::new(prefs_doctors, prefs_hospitals).expect("decoded profile is well-formed")
}

/// The `rank`-th permutation (factorial number system) of the items
/// `0..n_partners` plus a stay-unmatched marker, folded into a
/// [`Preference`]: partners before the marker are acceptable in order,
/// partners after it are listed but unacceptable.
fn unrank_preference(mut rank: usize, n_partners: usize) -> Preference {
    const OUTSIDE: usize = usize::MAX;
    let mut pool: Vec<usize> = (0..n_partners).chain([OUTSIDE]).collect();
    let mut ordering = Vec::with_capacity(pool.len());
    for slot in (1..=pool.len()).rev() {
        let f = factorial(slot - 1) as usize;
        ordering.push(pool.remove(rank / f));
        rank %= f;
    }
    let cut = ordering.iter().position(|&x| x == OUTSIDE).expect("marker present");
    let ranked: Vec<usize> = ordering.iter().copied().filter(|&x| x != OUTSIDE).collect();
    Preference { ranked, acceptable_count: cut }
}

/// One cell of the oracle report: closed forms against the pipeline, plus
/// the first-cut blocking sum for the discrepancy tally.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub struct OracleRow {
    pub l: usize,
    pub k: usize,
    pub predicted_matched: usize,
    pub observed_matched: usize,
    pub predicted_blocking: usize,
    pub observed_blocking: usize,
    pub n_doctors: usize,
    pub n_hospitals: usize,
    pub naive_blocking: i64,
}

/// Evaluate [`predict_common`], the pipeline, and [`naive_blocking_sum`] on
/// every size pair in `2..=max_size` and capacity pair in `1..=max_cap`.
/// Rows are ordered by `(n_doctors, n_hospitals, l, k)`.
pub fn oracle_grid(max_size: usize, max_cap: usize) -> Vec<OracleRow> {
    assert!(max_size >= 2 && max_cap >= 1);
    let sizes: Vec<(usize, usize)> = (2..=max_size)
        .flat_map(|nd| (2..=max_size).map(move |nh| (nd, nh)))
        .collect();
    sizes
        .into_par_iter()
        .map(|(nd, nh)| {
            let mut rows = Vec::with_capacity(max_cap * max_cap);
            for l in 1..=max_cap {
                for k in 1..=max_cap {
                    let p = predict_common(l, k, nd, nh);
                    let (observed_matched, observed_blocking) = observed_common(l, k, nd, nh);
                    rows.push(OracleRow {
                        l,
                        k,
                        predicted_matched: p.matched_count,
                        observed_matched,
                        predicted_blocking: p.blocking_count,
                        observed_blocking,
                        n_doctors: nd,
                        n_hospitals: nh,
                        naive_blocking: naive_blocking_sum(l, k, nd, nh),
                    });
                }
            }
            rows
        })
        .collect::<Vec<_>>()
        .into_iter()
        .flatten()
        .collect()
}

/// One sampled point of a capacity sweep on a shared-ranking market.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub struct DegradationRow {
    pub k: usize,
    pub matched: usize,
    pub blocking: usize,
}

/// Run the pipeline on [`common_market`] for each doctor capacity in `ks`
/// (hospital capacity fixed at `l`) and report whether outcomes degrade
/// monotonically as `k` moves away from `l` on each side: matched count
/// non-increasing, blocking count non-decreasing.
pub fn monotone_degradation_check(
    l: usize,
    ks: &[usize],
    n_doctors: usize,
    n_hospitals: usize,
) -> (Vec<DegradationRow>, bool) {
    let rows: Vec<DegradationRow> = ks
        .iter()
        .map(|&k| {
            let (matched, blocking) = observed_common(l, k, n_doctors, n_hospitals);
            DegradationRow { k, matched, blocking }
        })
        .collect();

    let mut monotone = true;
    for side in [true, false] {
        let mut arm: Vec<&DegradationRow> = rows
            .iter()
            .filter(|r| if side { r.k >= l } else { r.k <= l })
            .collect();
        arm.sort_by_key(|r| if side { r.k } else { l - r.k });
        for w in arm.windows(2) {
            if w[1].matched > w[0].matched || w[1].blocking < w[0].blocking {
                monotone = false;
            }
        }
    }
    (rows, monotone)
}
