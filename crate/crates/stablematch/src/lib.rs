//! Two-sided matching with a capacity-constrained interview stage.
//!
//! The pipeline models a market of doctors and hospitals that runs in two
//! steps: hospitals first offer a limited number of interviews (a
//! hospital-proposing, many-to-many deferred-acceptance round where doctors
//! can hold only so many interviews at once), and the final one-to-one match
//! is then computed by doctor-proposing deferred acceptance over the
//! interview graph alone. The crate provides:
//!
//! - domain types for markets, preferences with acceptability cutoffs,
//!   interview arrangements, and matchings ([`market`]);
//! - the capacity-constrained choice rule used by the interview stage
//!   ([`choice`]);
//! - both deferred-acceptance engines with replayable round traces
//!   ([`engines`]);
//! - stability diagnostics: blocking pairs, adequacy, match rate, and a
//!   brute-force stable-set oracle for small instances ([`stability`]);
//! - closed-form predictions and exhaustive enumerators for markets where
//!   both sides share a common ranking ([`theory`]);
//! - a seeded random-utility market generator ([`prefgen`]);
//! - a Monte Carlo harness for capacity sweeps, policy comparisons, and
//!   capacity heatmaps ([`experiments`]), with CSV emission ([`csv`]).
//!
//! All randomness flows from explicit 64-bit seeds through ChaCha8 streams,
//! so every result in the crate — including parallel sweeps — is exactly
//! reproducible.

pub mod choice;
pub mod csv;
pub mod engines;
pub mod experiments;
pub mod fixtures;
pub mod market;
pub mod prefgen;
pub mod stability;
pub mod theory;

pub use market::{AgentId, Arrangement, InterviewMatching, Market, Matching, Preference, Side};
