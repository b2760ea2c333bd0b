//! The capacity-constrained choice rule used by the interview stage.
//!
//! An agent offered a set of partners keeps every acceptable one if they fit
//! within its capacity, and otherwise exactly the `capacity` best acceptable
//! ones. The rule is a pure function of the offered set — no path dependence —
//! which is what makes the round-based interview engine order-independent.

use crate::market::{AgentId, Market, Side};

/// Select the best acceptable partners from `offered`, at most `capacity`
/// of them. The result is sorted by the agent's preference, best first.
/// Unacceptable offers are never chosen.
pub fn choose(agent: AgentId, offered: &[usize], market: &Market, capacity: usize) -> Vec<usize> {
    let key = |p: usize| match agent.side {
        Side::Doctor => market.doctor_key(agent.index, p),
        Side::Hospital => market.hospital_key(agent.index, p),
    };
    let outside = match agent.side {
        Side::Doctor => market.doctor_outside_key(agent.index),
        Side::Hospital => market.hospital_outside_key(agent.index),
    };
    let mut keyed: Vec<(u32, usize)> =
        offered.iter().map(|&p| (key(p), p)).filter(|&(k, _)| k < outside).collect();
    keyed.sort_unstable();
    keyed.truncate(capacity);
    keyed.into_iter().map(|(_, p)| p).collect()
}
