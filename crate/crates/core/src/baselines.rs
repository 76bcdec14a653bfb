//! Delivery schemes used for comparison.

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::model::{Instance, Packet, Schedule, Subfile, UserSet};

/// Every subfile in its own packet.
pub fn uncoded(instance: &Instance) -> Schedule {
    Schedule::from_packets(instance.subfiles().iter().map(|&s| Packet::single(s)).collect())
}

/// Greedy coded multicast: for every user set `S`, in decreasing size and then
/// lexicographic order, send `{W[k, S \ {k}] : k ∈ S}` restricted to the
/// subfiles present.
///
/// Each subfile `W[k, A]` belongs to exactly one such packet (`S = A ∪ {k}`),
/// so grouping subfiles by `S` gives the same packets as sweeping all `2^K`
/// sets.
pub fn gcm(instance: &Instance) -> Schedule {
    let mut by_set: BTreeMap<UserSet, Vec<Subfile>> = BTreeMap::new();
    for &s in instance.subfiles() {
        by_set.entry(s.cache_set().with(s.owner())).or_default().push(s);
    }
    let mut groups: Vec<(UserSet, Vec<Subfile>)> = by_set.into_iter().collect();
    // BTreeMap already yields lexicographic order; the stable sort keeps it
    // within each size class.
    groups.sort_by_key(|(set, _)| std::cmp::Reverse(set.len()));
    Schedule::from_packets(
        groups.into_iter().map(|(_, members)| Packet::new(members).expect("one subfile per user of S")).collect(),
    )
}

/// Greedy clique partition in canonical subfile order.
pub fn gccm_canonical(instance: &Instance) -> Schedule {
    let order: Vec<usize> = (0..instance.len()).collect();
    gccm(instance, &order).expect("identity is a valid order")
}

/// Greedy clique partition of the side-information graph.
///
/// `order` is a permutation of instance positions. Vertices are scanned in that
/// order; each uncovered vertex opens a packet that absorbs every later
/// uncovered vertex adjacent to all current members.
pub fn gccm(instance: &Instance, order: &[usize]) -> Result<Schedule> {
    let n = instance.len();
    if order.len() != n {
        return Err(Error::InvalidOrder(format!("expected {n} entries, got {}", order.len())));
    }
    let mut seen = vec![false; n];
    for &i in order {
        if i >= n || seen[i] {
            return Err(Error::InvalidOrder(format!("entry {i} is out of range or repeated")));
        }
        seen[i] = true;
    }

    let subfiles = instance.subfiles();
    let mut covered = vec![false; n];
    let mut packets = Vec::new();
    for (pos, &v) in order.iter().enumerate() {
        if covered[v] {
            continue;
        }
        covered[v] = true;
        let mut members = vec![subfiles[v]];
        for &u in &order[pos + 1..] {
            if !covered[u] && members.iter().all(|m| m.compatible_with(&subfiles[u])) {
                covered[u] = true;
                members.push(subfiles[u]);
            }
        }
        packets.push(Packet::new(members).expect("adjacent subfiles have distinct owners"));
    }
    Ok(Schedule::from_packets(packets))
}
