//! Cross-checks of both deferred-acceptance engines against exhaustive
//! enumeration on small random markets.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use stablematch::engines::{doctor_da, interview_da, two_step};
use stablematch::fixtures::{random_arrangement, random_market};
use stablematch::market::Market;
use stablematch::stability::{
    blocking_pairs, hospital_weakly_prefers_set, stable_interview_matchings_bruteforce,
    stable_matchings_bruteforce,
};

/// A doctor's preference key for an assignment, with `None` priced at her
/// outside option — lower is better.
fn doctor_rank(market: &Market, d: usize, h: Option<usize>) -> u32 {
    match h {
        Some(h) => market.doctor_key(d, h),
        None => market.doctor_outside_key(d),
    }
}

#[test]
fn doctor_da_returns_the_doctor_optimal_stable_matching() {
    let mut rng = ChaCha8Rng::seed_from_u64(0x0DDC0DE);
    for trial in 0..300 {
        let market = random_market(&mut rng, 5);
        let mu = doctor_da(&market);
        let all = stable_matchings_bruteforce(&market);
        assert!(all.contains(&mu), "trial {trial}: engine output not in the stable set");
        for other in &all {
            for d in 0..market.n_doctors() {
                let engine_key = doctor_rank(&market, d, mu.of_doctor(d));
                let other_key = doctor_rank(&market, d, other.of_doctor(d));
                assert!(
                    engine_key <= other_key,
                    "trial {trial}: doctor {d} prefers another stable matching"
                );
            }
        }
    }
}

#[test]
fn interview_stage_is_hospital_optimal_among_pairwise_stable_matchings() {
    let mut rng = ChaCha8Rng::seed_from_u64(0x1A7E);
    for trial in 0..150 {
        let market = random_market(&mut rng, 4);
        let arrangement = random_arrangement(&mut rng, &market, 3);
        let nu = interview_da(&market, &arrangement);
        let all = stable_interview_matchings_bruteforce(&market, &arrangement);
        assert!(all.contains(&nu), "trial {trial}: engine interviews not pairwise stable");
        for other in &all {
            for h in 0..market.n_hospitals() {
                assert!(
                    hospital_weakly_prefers_set(&market, h, nu.of_hospital(h), other.of_hospital(h)),
                    "trial {trial}: hospital {h} prefers another pairwise-stable set"
                );
            }
        }
    }
}

#[test]
fn pipeline_output_is_always_stable_within_the_interviewed_market() {
    // interview congestion can destabilize the outcome against the full
    // profile, but never against the preferences restricted to who actually
    // interviewed whom
    let mut rng = ChaCha8Rng::seed_from_u64(0x57AB1E);
    for _ in 0..400 {
        let market = random_market(&mut rng, 6);
        let arrangement = random_arrangement(&mut rng, &market, 4);
        let outcome = two_step(&market, &arrangement);
        let restricted = market.restrict(&outcome.interviews).unwrap();
        assert!(blocking_pairs(&restricted, &outcome.matching).is_stable());
    }
}

#[test]
fn restricting_to_full_interview_coverage_changes_nothing() {
    // when capacities are loose enough that everyone interviews everyone
    // mutually acceptable, the pipeline collapses to plain one-to-one
    // deferred acceptance on the full market
    let mut rng = ChaCha8Rng::seed_from_u64(0xF0CA);
    for _ in 0..200 {
        let market = random_market(&mut rng, 5);
        let n = market.n_doctors().max(market.n_hospitals());
        let arrangement = stablematch::market::Arrangement::homogeneous(n, n, &market);
        let outcome = two_step(&market, &arrangement);
        assert_eq!(outcome.matching, doctor_da(&market));
    }
}
