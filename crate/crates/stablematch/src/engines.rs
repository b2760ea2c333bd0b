//! The two deferred-acceptance engines.
//!
//! Step one is hospital-proposing and many-to-many: each round, every
//! hospital with unfilled interview slots proposes to its best acceptable
//! doctors not yet approached, and every doctor then keeps the best offers
//! that fit her capacity (possibly displacing offers held from earlier
//! rounds). Step two is the classic doctor-proposing one-to-one round over
//! whatever market it is given — typically the profile restricted to the
//! interview assignment.
//!
//! Rounds are synchronous: all proposers act, then all receivers choose.
//! Because the receivers' choice rule is a pure function of the offer set,
//! the outcome is independent of agent ordering; tests relabel agents to
//! check this. Both engines can record a replayable trace of every proposal
//! and every (immediate or displacing) rejection.

use crate::market::{
    AgentId, Arrangement, InterviewMatching, Market, Matching, Side,
};

/// What happened to a proposal (or to a previously accepted offer, when a
/// later round displaces it).
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum TraceOutcome {
    Accepted,
    Rejected,
}

/// One trace record: in `round`, `proposer` had its offer to `proposee`
/// accepted or rejected. A displaced offer appears twice — accepted in its
/// original round, rejected in the displacing one.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub struct TraceEvent {
    pub round: u32,
    pub proposer: AgentId,
    pub proposee: usize,
    pub outcome: TraceOutcome,
}

/// Replay a trace: the pairs whose most recent event is an acceptance.
/// For an interview-stage trace this reconstructs the interview matching.
pub fn replay_interviews(
    trace: &[TraceEvent],
    n_doctors: usize,
    n_hospitals: usize,
) -> InterviewMatching {
    let mut live = std::collections::BTreeMap::new();
    for ev in trace {
        debug_assert_eq!(ev.proposer.side, Side::Hospital);
        let pair = (ev.proposee, ev.proposer.index);
        match ev.outcome {
            TraceOutcome::Accepted => {
                live.insert(pair, ());
            }
            TraceOutcome::Rejected => {
                live.remove(&pair);
            }
        }
    }
    let pairs: Vec<(usize, usize)> = live.into_keys().collect();
    InterviewMatching::from_pairs(n_doctors, n_hospitals, &pairs)
        .expect("trace replay produced an invalid interview matching")
}

/// Replay a matching-stage trace: each doctor ends up at the hospital whose
/// most recent event for the pair is an acceptance.
pub fn replay_matching(trace: &[TraceEvent], n_doctors: usize, n_hospitals: usize) -> Matching {
    let mut live = std::collections::BTreeMap::new();
    for ev in trace {
        debug_assert_eq!(ev.proposer.side, Side::Doctor);
        let pair = (ev.proposer.index, ev.proposee);
        match ev.outcome {
            TraceOutcome::Accepted => {
                live.insert(pair, ());
            }
            TraceOutcome::Rejected => {
                live.remove(&pair);
            }
        }
    }
    let mut assigned = vec![None; n_doctors];
    for (d, h) in live.into_keys() {
        assert!(assigned[d].is_none(), "trace replay assigned a doctor twice");
        assigned[d] = Some(h);
    }
    Matching::from_doctor_assignments(n_hospitals, assigned)
        .expect("trace replay produced an invalid matching")
}

/// Hospital-proposing many-to-many deferred acceptance under interview
/// capacities. Returns the hospital-optimal pairwise-stable interview
/// matching.
pub fn interview_da(market: &Market, arrangement: &Arrangement) -> InterviewMatching {
    interview_da_impl(market, arrangement, None)
}

/// As [`interview_da`], also returning the full round trace.
pub fn interview_da_traced(
    market: &Market,
    arrangement: &Arrangement,
) -> (InterviewMatching, Vec<TraceEvent>) {
    let mut trace = Vec::new();
    let nu = interview_da_impl(market, arrangement, Some(&mut trace));
    (nu, trace)
}

fn interview_da_impl(
    market: &Market,
    arrangement: &Arrangement,
    mut trace: Option<&mut Vec<TraceEvent>>,
) -> InterviewMatching {
    arrangement.validate(market).expect("arrangement does not fit the market");
    let nd = market.n_doctors();
    let nh = market.n_hospitals();

    // Offers each doctor currently holds, sorted best-first by her key.
    let mut held: Vec<Vec<(u32, usize)>> = vec![Vec::new(); nd];
    // Per hospital: accepted-so-far count and cursor into its acceptable list.
    let mut accepted: Vec<usize> = vec![0; nh];
    let mut cursor: Vec<usize> = vec![0; nh];
    let mut offers: Vec<Vec<usize>> = vec![Vec::new(); nd];

    let mut round = 0u32;
    loop {
        round += 1;
        let mut proposed_any = false;
        for h in 0..nh {
            let acceptable = &market.hospital_pref(h).ranked[..market.hospital_pref(h).acceptable_count];
            let mut slack = arrangement.iota[h].saturating_sub(accepted[h]);
            while slack > 0 && cursor[h] < acceptable.len() {
                let d = acceptable[cursor[h]];
                cursor[h] += 1;
                offers[d].push(h);
                proposed_any = true;
                slack -= 1;
            }
        }
        if !proposed_any {
            break;
        }

        for d in 0..nd {
            if offers[d].is_empty() {
                continue;
            }
            let mut fresh: Vec<(u32, usize)> = Vec::with_capacity(offers[d].len());
            for &h in &offers[d] {
                let key = market.doctor_key(d, h);
                if key >= market.doctor_outside_key(d) {
                    if let Some(t) = trace.as_deref_mut() {
                        t.push(TraceEvent {
                            round,
                            proposer: AgentId::hospital(h),
                            proposee: d,
                            outcome: TraceOutcome::Rejected,
                        });
                    }
                    continue;
                }
                let entry = (key, h);
                let pos = held[d].binary_search(&entry).unwrap_err();
                held[d].insert(pos, entry);
                accepted[h] += 1;
                fresh.push(entry);
            }
            while held[d].len() > arrangement.kappa[d] {
                let (key, h) = held[d].pop().expect("non-empty by loop guard");
                accepted[h] -= 1;
                if let Some(t) = trace.as_deref_mut() {
                    t.push(TraceEvent {
                        round,
                        proposer: AgentId::hospital(h),
                        proposee: d,
                        outcome: TraceOutcome::Rejected,
                    });
                }
                if let Some(i) = fresh.iter().position(|&e| e == (key, h)) {
                    fresh.swap_remove(i);
                }
            }
            if let Some(t) = trace.as_deref_mut() {
                fresh.sort_unstable();
                for (_, h) in fresh {
                    t.push(TraceEvent {
                        round,
                        proposer: AgentId::hospital(h),
                        proposee: d,
                        outcome: TraceOutcome::Accepted,
                    });
                }
            }
            offers[d].clear();
        }
    }

    let mut pairs = Vec::new();
    for (d, hs) in held.iter().enumerate() {
        for &(_, h) in hs {
            pairs.push((d, h));
        }
    }
    InterviewMatching::from_pairs(nd, nh, &pairs)
        .expect("engine produced an invalid interview matching")
}

/// Doctor-proposing one-to-one deferred acceptance. Returns the
/// doctor-optimal stable matching of the given market (run it on a
/// restricted profile to finish the two-step pipeline).
pub fn doctor_da(market: &Market) -> Matching {
    doctor_da_impl(market, None)
}

/// As [`doctor_da`], also returning the full round trace.
pub fn doctor_da_traced(market: &Market) -> (Matching, Vec<TraceEvent>) {
    let mut trace = Vec::new();
    let mu = doctor_da_impl(market, Some(&mut trace));
    (mu, trace)
}

fn doctor_da_impl(market: &Market, mut trace: Option<&mut Vec<TraceEvent>>) -> Matching {
    let nd = market.n_doctors();
    let nh = market.n_hospitals();
    let mut cursor = vec![0usize; nd];
    // best proposer each hospital currently holds, by its key
    let mut holding: Vec<Option<(u32, usize)>> = vec![None; nh];
    let mut assigned: Vec<Option<usize>> = vec![None; nd];
    let mut free: Vec<usize> = (0..nd).collect();

    let mut round = 0u32;
    while !free.is_empty() {
        round += 1;
        let mut offers: Vec<(usize, usize)> = Vec::new(); // (hospital, doctor)
        for &d in &free {
            let pref = market.doctor_pref(d);
            while cursor[d] < pref.acceptable_count {
                let h = pref.ranked[cursor[d]];
                cursor[d] += 1;
                if market.hospital_accepts(h, d) {
                    offers.push((h, d));
                    break;
                } else if let Some(t) = trace.as_deref_mut() {
                    t.push(TraceEvent {
                        round,
                        proposer: AgentId::doctor(d),
                        proposee: h,
                        outcome: TraceOutcome::Rejected,
                    });
                }
            }
        }
        if offers.is_empty() {
            break;
        }
        // Resolve each hospital's offers as a batch so that an offer beaten
        // within its own round is recorded as a single rejection.
        offers.sort_unstable();
        let mut next_free = Vec::new();
        let mut i = 0;
        while i < offers.len() {
            let h = offers[i].0;
            let mut j = i;
            while j < offers.len() && offers[j].0 == h {
                j += 1;
            }
            let batch = &offers[i..j];
            i = j;
            let incumbent = holding[h];
            let winner = batch
                .iter()
                .map(|&(_, d)| (market.hospital_key(h, d), d))
                .chain(incumbent)
                .min()
                .expect("batch is non-empty");
            for &(_, d) in batch {
                let entry = (market.hospital_key(h, d), d);
                if entry == winner {
                    continue;
                }
                next_free.push(d);
                if let Some(t) = trace.as_deref_mut() {
                    t.push(TraceEvent {
                        round,
                        proposer: AgentId::doctor(d),
                        proposee: h,
                        outcome: TraceOutcome::Rejected,
                    });
                }
            }
            if incumbent != Some(winner) {
                if let Some((_, old)) = incumbent {
                    assigned[old] = None;
                    next_free.push(old);
                    if let Some(t) = trace.as_deref_mut() {
                        t.push(TraceEvent {
                            round,
                            proposer: AgentId::doctor(old),
                            proposee: h,
                            outcome: TraceOutcome::Rejected,
                        });
                    }
                }
                holding[h] = Some(winner);
                assigned[winner.1] = Some(h);
                if let Some(t) = trace.as_deref_mut() {
                    t.push(TraceEvent {
                        round,
                        proposer: AgentId::doctor(winner.1),
                        proposee: h,
                        outcome: TraceOutcome::Accepted,
                    });
                }
            }
        }
        // a doctor out of acceptable hospitals simply drops out
        let still_searching: Vec<usize> = free
            .iter()
            .copied()
            .filter(|&d| assigned[d].is_none() && cursor[d] < market.doctor_pref(d).acceptable_count)
            .collect();
        let mut f: Vec<usize> = next_free
            .into_iter()
            .filter(|&d| assigned[d].is_none() && cursor[d] < market.doctor_pref(d).acceptable_count)
            .chain(still_searching)
            .collect();
        f.sort_unstable();
        f.dedup();
        free = f;
    }

    Matching::from_doctor_assignments(nh, assigned)
        .expect("engine produced an invalid matching")
}

/// The interview-then-match pipeline outcome.
#[derive(Clone, Debug)]
pub struct PipelineOutcome {
    pub interviews: InterviewMatching,
    pub matching: Matching,
}

/// Run the full two-step pipeline: interview stage under the arrangement,
/// then doctor-proposing deferred acceptance on the restricted profile.
pub fn two_step(market: &Market, arrangement: &Arrangement) -> PipelineOutcome {
    let interviews = interview_da(market, arrangement);
    let restricted = market.restrict(&interviews).expect("interview matching fits its market");
    let matching = doctor_da(&restricted);
    PipelineOutcome { interviews, matching }
}
