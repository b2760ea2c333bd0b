//! Stability diagnostics: blocking pairs, adequacy of an interview
//! arrangement, match rates, and small brute-force oracles used to
//! cross-check the engines.

use crate::engines::{doctor_da, interview_da_traced, two_step, TraceOutcome};
use crate::market::{
    assignment_key_doctor, assignment_key_hospital, Arrangement, InterviewMatching, Market,
    Matching,
};

/// The blocking pairs of a matching, sorted by `(doctor, hospital)`.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct BlockReport {
    pub pairs: Vec<(usize, usize)>,
}

impl BlockReport {
    pub fn count(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_stable(&self) -> bool {
        self.pairs.is_empty()
    }
}

/// All pairs `(d, h)` where both sides strictly prefer each other to their
/// assignments under `matching`, judged on the full preference profile.
pub fn blocking_pairs(market: &Market, matching: &Matching) -> BlockReport {
    let mut pairs = Vec::new();
    for d in 0..market.n_doctors() {
        let cur = assignment_key_doctor(market, d, matching.of_doctor(d));
        let pref = market.doctor_pref(d);
        for &h in &pref.ranked[..pref.acceptable_count] {
            if market.doctor_key(d, h) >= cur {
                break;
            }
            let hcur = assignment_key_hospital(market, h, matching.of_hospital(h));
            if market.hospital_key(h, d) < hcur {
                pairs.push((d, h));
            }
        }
    }
    pairs.sort_unstable();
    BlockReport { pairs }
}

/// Whether `matching` has no blocking pair on the full profile (early exit).
pub fn is_stable(market: &Market, matching: &Matching) -> bool {
    for d in 0..market.n_doctors() {
        let cur = assignment_key_doctor(market, d, matching.of_doctor(d));
        let pref = market.doctor_pref(d);
        for &h in &pref.ranked[..pref.acceptable_count] {
            if market.doctor_key(d, h) >= cur {
                break;
            }
            let hcur = assignment_key_hospital(market, h, matching.of_hospital(h));
            if market.hospital_key(h, d) < hcur {
                return false;
            }
        }
    }
    true
}

/// Pairs `(d, h)` outside `nu` that block it in the pairwise many-to-many
/// sense: each side either has slack capacity or would drop its worst held
/// partner for the other.
pub fn interview_blocking_pairs(
    market: &Market,
    arrangement: &Arrangement,
    nu: &InterviewMatching,
) -> Vec<(usize, usize)> {
    let nd = market.n_doctors();
    let nh = market.n_hospitals();
    // What a new partner's key must beat for the agent to want the deal.
    let doctor_threshold: Vec<u32> = (0..nd)
        .map(|d| {
            let held = nu.of_doctor(d);
            if held.len() < arrangement.kappa[d] {
                market.doctor_outside_key(d)
            } else {
                held.iter().map(|&h| market.doctor_key(d, h)).max().unwrap_or_else(|| market.doctor_outside_key(d))
            }
        })
        .collect();
    let hospital_threshold: Vec<u32> = (0..nh)
        .map(|h| {
            let held = nu.of_hospital(h);
            if held.len() < arrangement.iota[h] {
                market.hospital_outside_key(h)
            } else {
                held.iter().map(|&d| market.hospital_key(h, d)).max().unwrap_or_else(|| market.hospital_outside_key(h))
            }
        })
        .collect();

    let mut pairs = Vec::new();
    for d in 0..nd {
        let pref = market.doctor_pref(d);
        for &h in &pref.ranked[..pref.acceptable_count] {
            if nu.contains(d, h) {
                continue;
            }
            if market.doctor_key(d, h) < doctor_threshold[d]
                && market.hospital_key(h, d) < hospital_threshold[h]
            {
                pairs.push((d, h));
            }
        }
    }
    pairs.sort_unstable();
    pairs
}

/// Whether the two-step pipeline under `arrangement` yields a matching with
/// no blocking pairs on the full profile.
pub fn is_adequate(market: &Market, arrangement: &Arrangement) -> bool {
    let outcome = two_step(market, arrangement);
    is_stable(market, &outcome.matching)
}

/// Fraction of hospitals that end up matched.
pub fn match_rate(matching: &Matching) -> f64 {
    matching.matched_count() as f64 / matching.n_hospitals() as f64
}

/// Every stable matching of `market`, found by exhaustive enumeration.
/// Only for cross-checking the engines; sides are capped at 6 agents.
pub fn stable_matchings_bruteforce(market: &Market) -> Vec<Matching> {
    assert!(
        market.n_doctors() <= 6 && market.n_hospitals() <= 6,
        "exhaustive enumeration is limited to six agents per side"
    );
    let nd = market.n_doctors();
    let nh = market.n_hospitals();
    let mut found = Vec::new();
    let mut assigned: Vec<Option<usize>> = vec![None; nd];
    let mut used = vec![false; nh];

    fn recurse(
        market: &Market,
        d: usize,
        assigned: &mut Vec<Option<usize>>,
        used: &mut Vec<bool>,
        found: &mut Vec<Matching>,
    ) {
        if d == market.n_doctors() {
            let m = Matching::from_doctor_assignments(market.n_hospitals(), assigned.clone())
                .expect("enumeration respects injectivity");
            if is_stable(market, &m) {
                found.push(m);
            }
            return;
        }
        recurse(market, d + 1, assigned, used, found);
        for h in 0..market.n_hospitals() {
            if !used[h] && market.mutually_acceptable(d, h) {
                used[h] = true;
                assigned[d] = Some(h);
                recurse(market, d + 1, assigned, used, found);
                assigned[d] = None;
                used[h] = false;
            }
        }
    }
    recurse(market, 0, &mut assigned, &mut used, &mut found);
    let _ = (nd, nh);
    found
}

/// Every pairwise-stable interview matching of `market` under
/// `arrangement`, by enumerating subsets of the mutually acceptable pairs.
/// Only for tiny instances (at most 20 such pairs).
pub fn stable_interview_matchings_bruteforce(
    market: &Market,
    arrangement: &Arrangement,
) -> Vec<InterviewMatching> {
    let mut acceptable_pairs = Vec::new();
    for d in 0..market.n_doctors() {
        for h in 0..market.n_hospitals() {
            if market.mutually_acceptable(d, h) {
                acceptable_pairs.push((d, h));
            }
        }
    }
    assert!(
        acceptable_pairs.len() <= 20,
        "exhaustive enumeration is limited to 20 mutually acceptable pairs"
    );
    let mut found = Vec::new();
    'subsets: for mask in 0u32..(1 << acceptable_pairs.len()) {
        let chosen: Vec<(usize, usize)> = acceptable_pairs
            .iter()
            .enumerate()
            .filter(|&(i, _)| mask & (1 << i) != 0)
            .map(|(_, &p)| p)
            .collect();
        let nu = InterviewMatching::from_pairs(market.n_doctors(), market.n_hospitals(), &chosen)
            .expect("subset of distinct pairs");
        for d in 0..market.n_doctors() {
            if nu.of_doctor(d).len() > arrangement.kappa[d] {
                continue 'subsets;
            }
        }
        for h in 0..market.n_hospitals() {
            if nu.of_hospital(h).len() > arrangement.iota[h] {
                continue 'subsets;
            }
        }
        if interview_blocking_pairs(market, arrangement, &nu).is_empty() {
            found.push(nu);
        }
    }
    found
}

/// What changed when doctors' interview capacities were raised, holding the
/// hospital capacities and the market fixed. Produced by
/// [`audit_capacity_raise`]; each field records the violations of one
/// comparative-statics regularity between the base run and the raised run.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct CapacityRaiseAudit {
    /// Pairs `(d, h)` where, in the raised run, doctor `d` rejected a
    /// hospital she had interviewed with in the base run.
    pub rejected_prior_interviews: Vec<(usize, usize)>,
    /// Pairs `(d, h)` where `h` is a new interview for `d` (in the raised
    /// run only) that `d` strictly prefers to her base final assignment —
    /// for an unmatched doctor, any new acceptable interview qualifies.
    pub upgraded_new_interviews: Vec<(usize, usize)>,
    /// As above, restricted to doctors matched in the base final matching.
    pub upgraded_new_interviews_matched_only: Vec<(usize, usize)>,
    /// Triples `(h, d, d_prior)` where `h` interviews `d` in the raised run
    /// yet dropped the better-liked `d_prior` it interviewed in the base
    /// run.
    pub dropped_better_partner: Vec<(usize, usize, usize)>,
    /// Doctors strictly preferring their raised-run final assignment.
    pub doctors_better_off: usize,
    /// The base-run final matching.
    pub base_matching: Matching,
    /// The raised-run final matching.
    pub raised_matching: Matching,
}

impl CapacityRaiseAudit {
    /// No doctor ever rejected a hospital she had already interviewed with.
    pub fn keeps_prior_interviews(&self) -> bool {
        self.rejected_prior_interviews.is_empty()
    }

    /// No *matched* doctor gained a new interview she likes better than her
    /// base final assignment.
    pub fn new_interviews_are_downgrades_for_matched(&self) -> bool {
        self.upgraded_new_interviews_matched_only.is_empty()
    }

    /// Every hospital kept any base interview it likes better than a raised
    /// interview it holds.
    pub fn keeps_preferred_partners(&self) -> bool {
        self.dropped_better_partner.is_empty()
    }
}

/// Run the pipeline under `base` and under `raised` (same `iota`, weakly
/// larger doctor capacities) and audit how the raised run treats the base
/// run's interviews and assignments.
pub fn audit_capacity_raise(
    market: &Market,
    base: &Arrangement,
    raised: &Arrangement,
) -> CapacityRaiseAudit {
    assert!(
        base.doctor_caps_dominated_by(raised),
        "raised arrangement must keep iota and weakly increase kappa"
    );
    let base_outcome = two_step(market, base);
    let nu = &base_outcome.interviews;
    let mu = &base_outcome.matching;

    let (nu_raised, trace) = interview_da_traced(market, raised);
    let restricted = market.restrict(&nu_raised).expect("interview matching fits its market");
    let mu_raised = doctor_da(&restricted);

    let mut rejected_prior_interviews = Vec::new();
    for ev in &trace {
        if ev.outcome == TraceOutcome::Rejected && nu.contains(ev.proposee, ev.proposer.index) {
            rejected_prior_interviews.push((ev.proposee, ev.proposer.index));
        }
    }
    rejected_prior_interviews.sort_unstable();
    rejected_prior_interviews.dedup();

    let mut upgraded_new_interviews = Vec::new();
    let mut upgraded_new_interviews_matched_only = Vec::new();
    for d in 0..market.n_doctors() {
        let base_key = assignment_key_doctor(market, d, mu.of_doctor(d));
        for &h in nu_raised.of_doctor(d) {
            if !nu.contains(d, h) && market.doctor_key(d, h) < base_key {
                upgraded_new_interviews.push((d, h));
                if mu.of_doctor(d).is_some() {
                    upgraded_new_interviews_matched_only.push((d, h));
                }
            }
        }
    }

    let mut dropped_better_partner = Vec::new();
    for h in 0..market.n_hospitals() {
        for &d in nu_raised.of_hospital(h) {
            for &d_prior in nu.of_hospital(h) {
                if market.hospital_key(h, d_prior) < market.hospital_key(h, d)
                    && !nu_raised.contains(d_prior, h)
                {
                    dropped_better_partner.push((h, d, d_prior));
                }
            }
        }
    }
    dropped_better_partner.sort_unstable();
    dropped_better_partner.dedup();

    let doctors_better_off =
        crate::market::compare_welfare(&mu_raised, mu, market, crate::market::Side::Doctor)
            .prefers_a;

    CapacityRaiseAudit {
        rejected_prior_interviews,
        upgraded_new_interviews,
        upgraded_new_interviews_matched_only,
        dropped_better_partner,
        doctors_better_off,
        base_matching: base_outcome.matching,
        raised_matching: mu_raised,
    }
}

/// Whether hospital `h` weakly prefers holding set `a` to set `b`, comparing
/// slot by slot after sorting each set best-first (and never preferring to
/// hold fewer partners, since all held partners are acceptable).
pub fn hospital_weakly_prefers_set(market: &Market, h: usize, a: &[usize], b: &[usize]) -> bool {
    let mut ka: Vec<u32> = a.iter().map(|&d| market.hospital_key(h, d)).collect();
    let mut kb: Vec<u32> = b.iter().map(|&d| market.hospital_key(h, d)).collect();
    ka.sort_unstable();
    kb.sort_unstable();
    if ka.len() < kb.len() {
        return false;
    }
    ka.iter().zip(kb.iter()).all(|(x, y)| x <= y)
}
