//! Size-aware coded multicast (SACM).
//!
//! The inner optimizer (SBO) finds a clique with the most members per bit
//! without enumerating cliques: for each user group `T` it picks, per member
//! `j`, the smallest subfile among the candidates `L(j, T)`, and scores the
//! group by `|T| / cost` where cost is the largest of those representatives.
//! The outer loop sends the winning packet, drops its subfiles, and repeats.
//!
//! Tie-breaking is fixed: higher ratio, then larger group, then the
//! lexicographically smaller group; inside a candidate list, the smaller size
//! then the smaller cache-set bitmask. Ratios are compared by cross
//! multiplication, never in floating point.

mod incremental;

use std::cmp::Ordering;
use std::ops::ControlFlow;

use crate::error::{Error, Result};
use crate::exec::Exec;
use crate::groups::GroupWalker;
use crate::model::{cmp_ratio, Instance, Packet, Schedule, Subfile, UserSet};

/// Instances with at most this many users run on the incremental engine.
pub const INCREMENTAL_MAX_USERS: usize = 16;

/// The winning group of one SBO call.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SboCandidate {
    pub group: UserSet,
    /// Minimum-size candidate of each member, ascending by user.
    pub representatives: Vec<Subfile>,
    /// Largest representative size.
    pub cost: u64,
}

impl SboCandidate {
    /// `(|T|, cost)`; the score is their quotient.
    pub fn ratio(&self) -> (usize, u64) {
        (self.group.len(), self.cost)
    }

    pub fn packet(&self) -> Packet {
        Packet::new(self.representatives.clone()).expect("one representative per user")
    }
}

fn cmp_candidates(a: &SboCandidate, b: &SboCandidate) -> Ordering {
    let (na, nb) = (a.group.len() as u64, b.group.len() as u64);
    cmp_ratio(na, a.cost, nb, b.cost).then_with(|| na.cmp(&nb)).then_with(|| b.group.cmp(&a.group))
}

fn representative(subfiles: &[Subfile], list: &[usize]) -> Subfile {
    let i = *list
        .iter()
        .min_by_key(|&&i| (subfiles[i].size(), subfiles[i].cache_set().bits()))
        .expect("candidate lists handed out by the walker are nonempty");
    subfiles[i]
}

/// Best-ratio packet over `remaining`.
pub fn sbo(remaining: &[Subfile]) -> Result<Packet> {
    sbo_candidate(remaining, Exec::default()).map(|c| c.packet())
}

/// SBO with the full group record. Branches of the group search can run in
/// parallel; the reduction uses the total tie-break order, so the answer does
/// not depend on scheduling.
pub fn sbo_candidate(remaining: &[Subfile], exec: Exec) -> Result<SboCandidate> {
    if remaining.is_empty() {
        return Err(Error::EmptyInput);
    }
    let walker = GroupWalker::new(remaining);
    let per_root = exec.map_indexed(walker.roots(), |r| {
        let mut best: Option<SboCandidate> = None;
        let _ = walker.walk_root::<(), _>(r, &mut |group, lists| {
            let representatives: Vec<Subfile> = lists.iter().map(|l| representative(remaining, l)).collect();
            let cost = representatives.iter().map(Subfile::size).max().unwrap_or(0);
            let cand = SboCandidate { group, representatives, cost };
            if best.as_ref().is_none_or(|b| cmp_candidates(&cand, b) == Ordering::Greater) {
                best = Some(cand);
            }
            ControlFlow::Continue(())
        });
        best
    });
    Ok(per_root
        .into_iter()
        .flatten()
        .max_by(cmp_candidates)
        .expect("a nonempty input has at least one singleton group"))
}

/// The SACM schedule for `instance`.
pub fn sacm(instance: &Instance) -> Schedule {
    if instance.num_users() <= INCREMENTAL_MAX_USERS {
        incremental::run(instance)
    } else {
        sacm_reference(instance, Exec::default())
    }
}

/// SACM recomputing SBO from scratch every round. Same output as [`sacm`];
/// kept as the independent route for cross-checks and for instances beyond
/// [`INCREMENTAL_MAX_USERS`].
pub fn sacm_reference(instance: &Instance, exec: Exec) -> Schedule {
    let mut remaining = instance.subfiles().to_vec();
    let mut packets = Vec::new();
    while !remaining.is_empty() {
        let cand = sbo_candidate(&remaining, exec).expect("remaining is nonempty");
        remaining.retain(|s| !cand.representatives.contains(s));
        packets.push(cand.packet());
    }
    Schedule::from_packets(packets)
}
