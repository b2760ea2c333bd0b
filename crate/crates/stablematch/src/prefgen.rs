//! Random-utility market generation.
//!
//! Each agent carries two latent traits drawn uniformly from `[0,1]`: a
//! common-quality score `xC` everyone values the same way, and a fit
//! coordinate `xF` valued through squared distance. Doctor `d` scores
//! hospital `h` as `beta * xC_h - gamma * (xF_h - xF_d)^2 + eps`, and
//! hospitals score doctors symmetrically, with every `eps` an independent
//! standard-logistic draw. Preference lists sort partners by descending
//! utility (ties broken toward the lower index) and everyone is acceptable,
//! so unmatched outcomes can only come from interview congestion.
//!
//! All randomness flows from a ChaCha8 generator (`rand_chacha`'s
//! `ChaCha8Rng`), chosen because it is a portable, explicitly specified
//! algorithm with cheap independent streams: replication `r` reads stream
//! `r` of the master seed, so a replication's market is identical whether
//! replications run serially or in parallel, on any platform.
//!
//! Draw order (fixed for reproducibility): doctor `xC`s, doctor `xF`s,
//! hospital `xC`s, hospital `xF`s, then doctor-side noise in doctor-major
//! order, then hospital-side noise in hospital-major order.

use crate::market::{Market, Preference};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Parameters of the random-utility generator.
#[derive(Clone, Copy, PartialEq, Debug)]
pub struct GenParams {
    /// Weight on the partner's common-quality trait.
    pub beta: f64,
    /// Weight on squared fit distance.
    pub gamma: f64,
    pub n_doctors: usize,
    pub n_hospitals: usize,
    /// Master seed; replications index independent streams of it.
    pub seed: u64,
}

impl GenParams {
    pub fn validate(&self) {
        assert!(self.n_doctors >= 2 && self.n_hospitals >= 2, "sizes must be at least two");
        assert!(self.beta >= 0.0 && self.gamma >= 0.0, "weights must be non-negative");
    }
}

/// The latent traits and noise behind one generated market, kept for audit.
#[derive(Clone, PartialEq, Debug)]
pub struct LatentDraw {
    pub xc_doctors: Vec<f64>,
    pub xf_doctors: Vec<f64>,
    pub xc_hospitals: Vec<f64>,
    pub xf_hospitals: Vec<f64>,
    /// Noise in doctor `d`'s utility for hospital `h`, at `d * n_hospitals + h`.
    pub eps_doctors: Vec<f64>,
    /// Noise in hospital `h`'s utility for doctor `d`, at `h * n_doctors + d`.
    pub eps_hospitals: Vec<f64>,
}

/// A standard-logistic draw via the inverse CDF `ln(u / (1 - u))`,
/// discarding the measure-zero endpoint the uniform sampler can emit.
pub fn standard_logistic<R: Rng>(rng: &mut R) -> f64 {
    loop {
        let u: f64 = rng.gen();
        if u > 0.0 {
            return (u / (1.0 - u)).ln();
        }
    }
}

/// Generate the market for one replication: stream `replication` of the
/// master seed. Stream 0 is the plain [`sample_market`] draw.
pub fn sample_market_for_replication(params: &GenParams, replication: u64) -> (Market, LatentDraw) {
    params.validate();
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    rng.set_stream(replication);
    sample_with(params, &mut rng)
}

/// Generate a market from the master seed directly (replication stream 0).
pub fn sample_market(params: &GenParams) -> (Market, LatentDraw) {
    sample_market_for_replication(params, 0)
}

fn sample_with(params: &GenParams, rng: &mut ChaCha8Rng) -> (Market, LatentDraw) {
    let nd = params.n_doctors;
    let nh = params.n_hospitals;
    let uniform = |rng: &mut ChaCha8Rng, n: usize| (0..n).map(|_| rng.gen::<f64>()).collect::<Vec<f64>>();
    let xc_doctors = uniform(rng, nd);
    let xf_doctors = uniform(rng, nd);
    let xc_hospitals = uniform(rng, nh);
    let xf_hospitals = uniform(rng, nh);
    let eps_doctors: Vec<f64> = (0..nd * nh).map(|_| standard_logistic(rng)).collect();
    let eps_hospitals: Vec<f64> = (0..nh * nd).map(|_| standard_logistic(rng)).collect();

    let rank_by_utility = |utilities: &[f64]| {
        let mut order: Vec<usize> = (0..utilities.len()).collect();
        order.sort_by(|&a, &b| {
            utilities[b]
                .partial_cmp(&utilities[a])
                .expect("utilities are finite")
                .then(a.cmp(&b))
        });
        Preference::all_acceptable(order)
    };

    let prefs_doctors: Vec<Preference> = (0..nd)
        .map(|d| {
            let utilities: Vec<f64> = (0..nh)
                .map(|h| {
                    let fit = xf_hospitals[h] - xf_doctors[d];
                    params.beta * xc_hospitals[h] - params.gamma * fit * fit
                        + eps_doctors[d * nh + h]
                })
                .collect();
            rank_by_utility(&utilities)
        })
        .collect();
    let prefs_hospitals: Vec<Preference> = (0..nh)
        .map(|h| {
            let utilities: Vec<f64> = (0..nd)
                .map(|d| {
                    let fit = xf_hospitals[h] - xf_doctors[d];
                    params.beta * xc_doctors[d] - params.gamma * fit * fit
                        + eps_hospitals[h * nd + d]
                })
                .collect();
            rank_by_utility(&utilities)
        })
        .collect();

    let market = Market::new(prefs_doctors, prefs_hospitals).expect("generated lists are complete");
    let draw = LatentDraw {
        xc_doctors,
        xf_doctors,
        xc_hospitals,
        xf_hospitals,
        eps_doctors,
        eps_hospitals,
    };
    (market, draw)
}
