//! Market domain types: strict preferences with acceptability cutoffs,
//! interview arrangements, interview matchings, and one-to-one matchings.
//!
//! Rank lookups are precomputed so that all pairwise comparisons are O(1);
//! a full blocking-pair scan is O(|D|·|H|).

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Which side of the market an agent belongs to.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug, Serialize, Deserialize)]
pub enum Side {
    Doctor,
    Hospital,
}

impl Side {
    /// The opposite side.
    pub fn other(self) -> Side {
        match self {
            Side::Doctor => Side::Hospital,
            Side::Hospital => Side::Doctor,
        }
    }
}

/// An agent, identified by its side and index within that side.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug, Serialize, Deserialize)]
pub struct AgentId {
    pub side: Side,
    pub index: usize,
}

impl AgentId {
    pub fn doctor(index: usize) -> AgentId {
        AgentId { side: Side::Doctor, index }
    }

    pub fn hospital(index: usize) -> AgentId {
        AgentId { side: Side::Hospital, index }
    }
}

/// A strict ranking over the opposite side with an acceptability cutoff.
///
/// `ranked[..acceptable_count]` are the acceptable partners in descending
/// order of preference; the option of staying unmatched sits immediately
/// after them, and any remaining entries of `ranked` (plus all unlisted
/// partners) are unacceptable.
#[derive(Clone, PartialEq, Eq, Debug, Serialize, Deserialize)]
pub struct Preference {
    pub ranked: Vec<usize>,
    pub acceptable_count: usize,
}

impl Preference {
    /// A preference that finds everyone acceptable, in the given order.
    pub fn all_acceptable(ranked: Vec<usize>) -> Preference {
        let acceptable_count = ranked.len();
        Preference { ranked, acceptable_count }
    }

    fn validate(&self, n_partners: usize) -> Result<(), MarketError> {
        if self.acceptable_count > self.ranked.len() {
            return Err(MarketError::InvalidPreference(
                "acceptable_count exceeds list length".into(),
            ));
        }
        let mut seen = vec![false; n_partners];
        for &p in &self.ranked {
            if p >= n_partners {
                return Err(MarketError::InvalidPreference(format!(
                    "ranked partner {p} out of range (n = {n_partners})"
                )));
            }
            if seen[p] {
                return Err(MarketError::InvalidPreference(format!(
                    "partner {p} listed twice"
                )));
            }
            seen[p] = true;
        }
        Ok(())
    }
}

/// Comparison key for a partner: lower is better. The outside option (staying
/// unmatched) has key `acceptable_count`; listed-but-unacceptable partners
/// sit just below it and unlisted partners at the very bottom.
const UNLISTED_KEY: u32 = u32::MAX;

fn pref_keys(pref: &Preference, n_partners: usize) -> Vec<u32> {
    let mut keys = vec![UNLISTED_KEY; n_partners];
    for (pos, &p) in pref.ranked.iter().enumerate() {
        keys[p] = if pos < pref.acceptable_count {
            pos as u32
        } else {
            pos as u32 + 1
        };
    }
    keys
}

/// Serialized form of a [`Market`]: just the sizes and preference lists.
#[derive(Clone, Serialize, Deserialize)]
pub struct MarketDoc {
    pub n_doctors: usize,
    pub n_hospitals: usize,
    pub prefs_doctors: Vec<Preference>,
    pub prefs_hospitals: Vec<Preference>,
}

/// A two-sided market: doctors and hospitals, each with a strict preference
/// over the other side plus an outside option.
#[derive(Clone, PartialEq, Debug, Serialize, Deserialize)]
#[serde(try_from = "MarketDoc", into = "MarketDoc")]
pub struct Market {
    n_doctors: usize,
    n_hospitals: usize,
    prefs_doctors: Vec<Preference>,
    prefs_hospitals: Vec<Preference>,
    keys_doctors: Vec<Vec<u32>>,
    keys_hospitals: Vec<Vec<u32>>,
}

impl Market {
    pub fn new(
        prefs_doctors: Vec<Preference>,
        prefs_hospitals: Vec<Preference>,
    ) -> Result<Market, MarketError> {
        let n_doctors = prefs_doctors.len();
        let n_hospitals = prefs_hospitals.len();
        if n_doctors < 2 || n_hospitals < 2 {
            return Err(MarketError::TooSmall { n_doctors, n_hospitals });
        }
        for p in &prefs_doctors {
            p.validate(n_hospitals)?;
        }
        for p in &prefs_hospitals {
            p.validate(n_doctors)?;
        }
        let keys_doctors = prefs_doctors.iter().map(|p| pref_keys(p, n_hospitals)).collect();
        let keys_hospitals = prefs_hospitals.iter().map(|p| pref_keys(p, n_doctors)).collect();
        Ok(Market {
            n_doctors,
            n_hospitals,
            prefs_doctors,
            prefs_hospitals,
            keys_doctors,
            keys_hospitals,
        })
    }

    pub fn n_doctors(&self) -> usize {
        self.n_doctors
    }

    pub fn n_hospitals(&self) -> usize {
        self.n_hospitals
    }

    pub fn doctor_pref(&self, d: usize) -> &Preference {
        &self.prefs_doctors[d]
    }

    pub fn hospital_pref(&self, h: usize) -> &Preference {
        &self.prefs_hospitals[h]
    }

    /// Comparison key of hospital `h` for doctor `d` (lower is better).
    #[inline]
    pub fn doctor_key(&self, d: usize, h: usize) -> u32 {
        self.keys_doctors[d][h]
    }

    /// Key of doctor `d`'s outside option.
    #[inline]
    pub fn doctor_outside_key(&self, d: usize) -> u32 {
        self.prefs_doctors[d].acceptable_count as u32
    }

    /// Whether doctor `d` finds hospital `h` acceptable.
    #[inline]
    pub fn doctor_accepts(&self, d: usize, h: usize) -> bool {
        self.doctor_key(d, h) < self.doctor_outside_key(d)
    }

    /// Comparison key of doctor `d` for hospital `h` (lower is better).
    #[inline]
    pub fn hospital_key(&self, h: usize, d: usize) -> u32 {
        self.keys_hospitals[h][d]
    }

    /// Key of hospital `h`'s outside option.
    #[inline]
    pub fn hospital_outside_key(&self, h: usize) -> u32 {
        self.prefs_hospitals[h].acceptable_count as u32
    }

    /// Whether hospital `h` finds doctor `d` acceptable.
    #[inline]
    pub fn hospital_accepts(&self, h: usize, d: usize) -> bool {
        self.hospital_key(h, d) < self.hospital_outside_key(h)
    }

    /// Whether `d` and `h` find each other acceptable.
    #[inline]
    pub fn mutually_acceptable(&self, d: usize, h: usize) -> bool {
        self.doctor_accepts(d, h) && self.hospital_accepts(h, d)
    }

    /// Restriction of the preference profile to an interview matching: each
    /// agent keeps only the partners it interviewed (those it found
    /// acceptable, in the original relative order); everyone else is removed
    /// entirely.
    pub fn restrict(&self, nu: &InterviewMatching) -> Result<Market, MarketError> {
        if nu.of_doctor.len() != self.n_doctors || nu.of_hospital.len() != self.n_hospitals {
            return Err(MarketError::DimensionMismatch {
                expected: (self.n_doctors, self.n_hospitals),
                got: (nu.of_doctor.len(), nu.of_hospital.len()),
            });
        }
        let restrict_one = |pref: &Preference, kept: &[usize]| {
            let ranked: Vec<usize> = pref.ranked[..pref.acceptable_count]
                .iter()
                .copied()
                .filter(|p| kept.binary_search(p).is_ok())
                .collect();
            Preference::all_acceptable(ranked)
        };
        let prefs_doctors = self
            .prefs_doctors
            .iter()
            .zip(&nu.of_doctor)
            .map(|(p, kept)| restrict_one(p, kept))
            .collect();
        let prefs_hospitals = self
            .prefs_hospitals
            .iter()
            .zip(&nu.of_hospital)
            .map(|(p, kept)| restrict_one(p, kept))
            .collect();
        Market::new(prefs_doctors, prefs_hospitals)
    }
}

impl TryFrom<MarketDoc> for Market {
    type Error = MarketError;

    fn try_from(doc: MarketDoc) -> Result<Market, MarketError> {
        if doc.prefs_doctors.len() != doc.n_doctors || doc.prefs_hospitals.len() != doc.n_hospitals
        {
            return Err(MarketError::DimensionMismatch {
                expected: (doc.n_doctors, doc.n_hospitals),
                got: (doc.prefs_doctors.len(), doc.prefs_hospitals.len()),
            });
        }
        Market::new(doc.prefs_doctors, doc.prefs_hospitals)
    }
}

impl From<Market> for MarketDoc {
    fn from(m: Market) -> MarketDoc {
        MarketDoc {
            n_doctors: m.n_doctors,
            n_hospitals: m.n_hospitals,
            prefs_doctors: m.prefs_doctors,
            prefs_hospitals: m.prefs_hospitals,
        }
    }
}

/// Interview capacities: `iota[h]` slots per hospital, `kappa[d]` per doctor.
#[derive(Clone, PartialEq, Eq, Debug, Serialize, Deserialize)]
pub struct Arrangement {
    pub iota: Vec<usize>,
    pub kappa: Vec<usize>,
}

impl Arrangement {
    /// The homogeneous arrangement: every hospital gets `l` interview slots
    /// and every doctor `k`.
    pub fn homogeneous(l: usize, k: usize, market: &Market) -> Arrangement {
        Arrangement {
            iota: vec![l; market.n_hospitals()],
            kappa: vec![k; market.n_doctors()],
        }
    }

    pub fn validate(&self, market: &Market) -> Result<(), MarketError> {
        if self.iota.len() != market.n_hospitals() || self.kappa.len() != market.n_doctors() {
            return Err(MarketError::DimensionMismatch {
                expected: (market.n_doctors(), market.n_hospitals()),
                got: (self.kappa.len(), self.iota.len()),
            });
        }
        if self.iota.iter().chain(&self.kappa).any(|&c| c == 0) {
            return Err(MarketError::ZeroCapacity);
        }
        Ok(())
    }

    /// Whether `self` raises no capacity of `other` and both copies agree in
    /// the hospital capacities — i.e. `other` is `self` with (weakly) larger
    /// doctor capacities.
    pub fn doctor_caps_dominated_by(&self, other: &Arrangement) -> bool {
        self.iota == other.iota
            && self.kappa.len() == other.kappa.len()
            && self.kappa.iter().zip(&other.kappa).all(|(a, b)| a <= b)
    }
}

/// A many-to-many interview assignment. Mutuality (`h ∈ ν(d)` iff
/// `d ∈ ν(h)`) holds by construction; both index lists are kept sorted.
#[derive(Clone, PartialEq, Eq, Debug, Serialize, Deserialize)]
pub struct InterviewMatching {
    of_doctor: Vec<Vec<usize>>,
    of_hospital: Vec<Vec<usize>>,
}

impl InterviewMatching {
    /// Build from mutual pairs. Duplicate pairs are rejected.
    pub fn from_pairs(
        n_doctors: usize,
        n_hospitals: usize,
        pairs: &[(usize, usize)],
    ) -> Result<InterviewMatching, MarketError> {
        let mut of_doctor = vec![Vec::new(); n_doctors];
        let mut of_hospital = vec![Vec::new(); n_hospitals];
        for &(d, h) in pairs {
            if d >= n_doctors || h >= n_hospitals {
                return Err(MarketError::DimensionMismatch {
                    expected: (n_doctors, n_hospitals),
                    got: (d + 1, h + 1),
                });
            }
            of_doctor[d].push(h);
            of_hospital[h].push(d);
        }
        for v in of_doctor.iter_mut().chain(of_hospital.iter_mut()) {
            v.sort_unstable();
            if v.windows(2).any(|w| w[0] == w[1]) {
                return Err(MarketError::InvalidPreference("duplicate interview pair".into()));
            }
        }
        Ok(InterviewMatching { of_doctor, of_hospital })
    }

    pub fn of_doctor(&self, d: usize) -> &[usize] {
        &self.of_doctor[d]
    }

    pub fn of_hospital(&self, h: usize) -> &[usize] {
        &self.of_hospital[h]
    }

    pub fn n_doctors(&self) -> usize {
        self.of_doctor.len()
    }

    pub fn n_hospitals(&self) -> usize {
        self.of_hospital.len()
    }

    pub fn contains(&self, d: usize, h: usize) -> bool {
        self.of_doctor[d].binary_search(&h).is_ok()
    }

    /// Total number of interview pairs.
    pub fn pair_count(&self) -> usize {
        self.of_doctor.iter().map(Vec::len).sum()
    }

    /// All pairs, sorted by (doctor, hospital).
    pub fn pairs(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::with_capacity(self.pair_count());
        for (d, hs) in self.of_doctor.iter().enumerate() {
            for &h in hs {
                out.push((d, h));
            }
        }
        out
    }

    /// Check capacities and mutual acceptability against a market.
    pub fn validate(&self, market: &Market, arrangement: &Arrangement) -> Result<(), MarketError> {
        if self.of_doctor.len() != market.n_doctors()
            || self.of_hospital.len() != market.n_hospitals()
        {
            return Err(MarketError::DimensionMismatch {
                expected: (market.n_doctors(), market.n_hospitals()),
                got: (self.of_doctor.len(), self.of_hospital.len()),
            });
        }
        for (d, hs) in self.of_doctor.iter().enumerate() {
            if hs.len() > arrangement.kappa[d] {
                return Err(MarketError::CapacityExceeded(AgentId::doctor(d)));
            }
            for &h in hs {
                if !market.mutually_acceptable(d, h) {
                    return Err(MarketError::NotMutuallyAcceptable { doctor: d, hospital: h });
                }
            }
        }
        for (h, ds) in self.of_hospital.iter().enumerate() {
            if ds.len() > arrangement.iota[h] {
                return Err(MarketError::CapacityExceeded(AgentId::hospital(h)));
            }
        }
        Ok(())
    }
}

/// A one-to-one matching with explicit unmatched states. Mutuality
/// (`μ(d) = h` iff `μ(h) = d`) holds by construction.
#[derive(Clone, PartialEq, Eq, Debug, Serialize, Deserialize)]
pub struct Matching {
    of_doctor: Vec<Option<usize>>,
    of_hospital: Vec<Option<usize>>,
}

impl Matching {
    /// Build from per-doctor assignments; hospitals may be used at most once.
    pub fn from_doctor_assignments(
        n_hospitals: usize,
        of_doctor: Vec<Option<usize>>,
    ) -> Result<Matching, MarketError> {
        let mut of_hospital = vec![None; n_hospitals];
        for (d, &h) in of_doctor.iter().enumerate() {
            if let Some(h) = h {
                if h >= n_hospitals {
                    return Err(MarketError::DimensionMismatch {
                        expected: (of_doctor.len(), n_hospitals),
                        got: (d, h + 1),
                    });
                }
                if of_hospital[h].is_some() {
                    return Err(MarketError::HospitalReused(h));
                }
                of_hospital[h] = Some(d);
            }
        }
        Ok(Matching { of_doctor, of_hospital })
    }

    pub fn of_doctor(&self, d: usize) -> Option<usize> {
        self.of_doctor[d]
    }

    pub fn of_hospital(&self, h: usize) -> Option<usize> {
        self.of_hospital[h]
    }

    pub fn n_doctors(&self) -> usize {
        self.of_doctor.len()
    }

    pub fn n_hospitals(&self) -> usize {
        self.of_hospital.len()
    }

    pub fn doctor_assignments(&self) -> &[Option<usize>] {
        &self.of_doctor
    }

    /// Matched pairs, sorted by doctor index.
    pub fn pairs(&self) -> Vec<(usize, usize)> {
        self.of_doctor
            .iter()
            .enumerate()
            .filter_map(|(d, h)| h.map(|h| (d, h)))
            .collect()
    }

    pub fn matched_count(&self) -> usize {
        self.of_doctor.iter().flatten().count()
    }
}

/// Outcome of a per-agent welfare comparison between two matchings.
#[derive(Clone, Copy, PartialEq, Eq, Debug, Default)]
pub struct WelfareSplit {
    pub prefers_a: usize,
    pub prefers_b: usize,
    pub same: usize,
}

/// Classify every agent on `side` by strict preference between its
/// assignments under `mu_a` and `mu_b`; unmatched ranks at the agent's
/// outside option.
pub fn compare_welfare(
    mu_a: &Matching,
    mu_b: &Matching,
    market: &Market,
    side: Side,
) -> WelfareSplit {
    let n = match side {
        Side::Doctor => market.n_doctors(),
        Side::Hospital => market.n_hospitals(),
    };
    let mut split = WelfareSplit::default();
    for i in 0..n {
        let (ka, kb) = match side {
            Side::Doctor => (
                assignment_key_doctor(market, i, mu_a.of_doctor(i)),
                assignment_key_doctor(market, i, mu_b.of_doctor(i)),
            ),
            Side::Hospital => (
                assignment_key_hospital(market, i, mu_a.of_hospital(i)),
                assignment_key_hospital(market, i, mu_b.of_hospital(i)),
            ),
        };
        match ka.cmp(&kb) {
            std::cmp::Ordering::Less => split.prefers_a += 1,
            std::cmp::Ordering::Greater => split.prefers_b += 1,
            std::cmp::Ordering::Equal => split.same += 1,
        }
    }
    split
}

#[inline]
pub(crate) fn assignment_key_doctor(market: &Market, d: usize, h: Option<usize>) -> u32 {
    match h {
        Some(h) => market.doctor_key(d, h),
        None => market.doctor_outside_key(d),
    }
}

#[inline]
pub(crate) fn assignment_key_hospital(market: &Market, h: usize, d: Option<usize>) -> u32 {
    match d {
        Some(d) => market.hospital_key(h, d),
        None => market.hospital_outside_key(h),
    }
}

#[derive(Error, Debug)]
pub enum MarketError {
    #[error("market sides must each have at least two agents (got {n_doctors}x{n_hospitals})")]
    TooSmall { n_doctors: usize, n_hospitals: usize },
    #[error("dimension mismatch: expected {expected:?}, got {got:?}")]
    DimensionMismatch { expected: (usize, usize), got: (usize, usize) },
    #[error("invalid preference: {0}")]
    InvalidPreference(String),
    #[error("capacities must be at least one")]
    ZeroCapacity,
    #[error("capacity exceeded for {0:?}")]
    CapacityExceeded(AgentId),
    #[error("pair ({doctor}, {hospital}) is not mutually acceptable")]
    NotMutuallyAcceptable { doctor: usize, hospital: usize },
    #[error("hospital {0} assigned to two doctors")]
    HospitalReused(usize),
}
