//! Small hand-checked markets and random-instance generators shared by the
//! test suites and the CLI demo.

use crate::market::{Arrangement, Market, Preference};
use rand::seq::SliceRandom;
use rand::Rng;

/// A four-doctor, four-hospital market whose two-step outcome was worked out
/// by hand. Raising the second doctor's interview capacity from one to two
/// in this market leaves her unmatched and creates blocking pairs — the
/// companion to [`demo_arrangements`].
pub fn demo_market() -> Market {
    Market::new(
        vec![
            Preference::all_acceptable(vec![0, 1, 3, 2]),
            Preference::all_acceptable(vec![1, 2, 0, 3]),
            Preference::all_acceptable(vec![1, 0, 2, 3]),
            Preference::all_acceptable(vec![0, 1, 2, 3]),
        ],
        vec![
            Preference::all_acceptable(vec![0, 1, 2, 3]),
            Preference::all_acceptable(vec![0, 1, 3, 2]),
            Preference::all_acceptable(vec![1, 0, 2, 3]),
            Preference::all_acceptable(vec![0, 3, 2, 1]),
        ],
    )
    .expect("demo market is well-formed")
}

/// The two interview arrangements studied on [`demo_market`]: the base one,
/// and the same one with the first doctor's capacity raised by one.
pub fn demo_arrangements() -> (Arrangement, Arrangement) {
    let base = Arrangement { iota: vec![1, 1, 2, 2], kappa: vec![1, 2, 1, 1] };
    let raised = Arrangement { iota: vec![1, 1, 2, 2], kappa: vec![2, 2, 1, 1] };
    (base, raised)
}

/// A three-doctor, two-hospital market where raising one doctor's interview
/// capacity hands a previously unmatched doctor an interview at a hospital
/// that had already rejected her — the smallest instance we found of the
/// final matching not simply extending when search widens.
///
/// Returns the market, the base arrangement, and the arrangement with the
/// second doctor's capacity raised from one to two.
pub fn capacity_gain_fixture() -> (Market, Arrangement, Arrangement) {
    let market = Market::new(
        vec![
            Preference::all_acceptable(vec![1, 0]),
            Preference::all_acceptable(vec![1, 0]),
            Preference::all_acceptable(vec![0, 1]),
        ],
        vec![
            Preference::all_acceptable(vec![2, 0, 1]),
            Preference::all_acceptable(vec![2, 0, 1]),
        ],
    )
    .expect("fixture market is well-formed");
    let base = Arrangement { iota: vec![2, 2], kappa: vec![1, 1, 1] };
    let raised = Arrangement { iota: vec![2, 2], kappa: vec![1, 2, 1] };
    (market, base, raised)
}

/// A random market with 2 to `max_side` agents per side. Each agent ranks a
/// uniformly shuffled order of the other side and, half the time, truncates
/// it at a uniform point (possibly finding everyone unacceptable).
pub fn random_market<R: Rng>(rng: &mut R, max_side: usize) -> Market {
    assert!(max_side >= 2);
    let nd = rng.gen_range(2..=max_side);
    let nh = rng.gen_range(2..=max_side);
    let side = |rng: &mut R, n_own: usize, n_other: usize| {
        (0..n_own)
            .map(|_| {
                let mut ranked: Vec<usize> = (0..n_other).collect();
                ranked.shuffle(rng);
                let acceptable_count =
                    if rng.gen_bool(0.5) { n_other } else { rng.gen_range(0..=n_other) };
                Preference { ranked, acceptable_count }
            })
            .collect::<Vec<_>>()
    };
    let prefs_doctors = side(rng, nd, nh);
    let prefs_hospitals = side(rng, nh, nd);
    Market::new(prefs_doctors, prefs_hospitals).expect("generated market is well-formed")
}

/// A random arrangement for `market` with every capacity drawn uniformly
/// from 1 to `max_cap`.
pub fn random_arrangement<R: Rng>(rng: &mut R, market: &Market, max_cap: usize) -> Arrangement {
    assert!(max_cap >= 1);
    Arrangement {
        iota: (0..market.n_hospitals()).map(|_| rng.gen_range(1..=max_cap)).collect(),
        kappa: (0..market.n_doctors()).map(|_| rng.gen_range(1..=max_cap)).collect(),
    }
}
