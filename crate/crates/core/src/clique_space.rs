//! Explicit clique enumeration and the two enumeration-based greedy covers.
//!
//! Every clique of the side-information graph serves exactly one user group
//! `T`: it holds one subfile per member `j`, drawn from the candidate list
//! `L(j, T)` of subfiles of `j` cached by all of `T \ {j}`. The cliques of a
//! group are therefore the cartesian product of its candidate lists, and the
//! groups partition the clique space. This is the desk-scale path; the scalable
//! path is [`crate::sacm`].

use std::cmp::Ordering;
use std::ops::ControlFlow;
use std::sync::atomic::{AtomicU64, Ordering as AtomicOrdering};

use crate::bitset::ElementSet;
use crate::error::{Error, Result};
use crate::exec::Exec;
use crate::groups::GroupWalker;
use crate::model::{cmp_ratio, Instance, Packet, Schedule, Subfile, UserSet};

/// Default bound on the number of enumerated cliques.
pub const DEFAULT_CLIQUE_CAP: u64 = 10_000_000;

/// Subfiles of `user` whose cache set contains every other member of `group`.
pub fn build_l(subfiles: &[Subfile], group: UserSet, user: usize) -> Result<Vec<Subfile>> {
    if !group.contains(user) {
        return Err(Error::InvalidGroup(format!("user {} is not in {group:?}", user + 1)));
    }
    let rest = group.without(user);
    Ok(subfiles.iter().filter(|s| s.owner() == user && rest.is_subset_of(s.cache_set())).copied().collect())
}

/// All cliques serving exactly `group`: one candidate per member.
pub fn enumerate_q_t(subfiles: &[Subfile], group: UserSet) -> Result<Vec<Packet>> {
    if group.is_empty() {
        return Err(Error::InvalidGroup("empty group".into()));
    }
    let lists = group.iter().map(|j| build_l(subfiles, group, j)).collect::<Result<Vec<_>>>()?;
    let mut out = Vec::new();
    for_each_product(&lists, |pick| out.push(Packet::new(pick.to_vec()).expect("distinct owners")));
    Ok(out)
}

/// Calls `f` with every combination taking one element from each list.
fn for_each_product<T: Copy, F: FnMut(&[T])>(lists: &[Vec<T>], mut f: F) {
    if lists.iter().any(Vec::is_empty) {
        return;
    }
    let mut idx = vec![0usize; lists.len()];
    let mut pick: Vec<T> = lists.iter().map(|l| l[0]).collect();
    loop {
        f(&pick);
        let mut d = lists.len();
        loop {
            if d == 0 {
                return;
            }
            d -= 1;
            idx[d] += 1;
            if idx[d] < lists[d].len() {
                pick[d] = lists[d][idx[d]];
                break;
            }
            idx[d] = 0;
            pick[d] = lists[d][0];
        }
    }
}

/// Cliques of one user group.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CliqueGroup {
    pub users: UserSet,
    pub cliques: Vec<Packet>,
}

/// The full clique space of a subfile set, grouped by served users.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct CliqueFamily {
    groups: Vec<CliqueGroup>,
    total: usize,
}

impl CliqueFamily {
    /// Nonempty groups in lexicographic order of their member lists.
    pub fn groups(&self) -> &[CliqueGroup] {
        &self.groups
    }

    pub fn group(&self, users: UserSet) -> Option<&[Packet]> {
        self.groups.binary_search_by(|g| g.users.cmp(&users)).ok().map(|i| self.groups[i].cliques.as_slice())
    }

    /// Total number of cliques.
    pub fn len(&self) -> usize {
        self.total
    }

    pub fn is_empty(&self) -> bool {
        self.total == 0
    }

    pub fn iter(&self) -> impl Iterator<Item = &Packet> {
        self.groups.iter().flat_map(|g| g.cliques.iter())
    }
}

/// Enumerates all cliques under the default cap.
pub fn enumerate_all_cliques(subfiles: &[Subfile]) -> Result<CliqueFamily> {
    enumerate_all_cliques_with(subfiles, DEFAULT_CLIQUE_CAP, Exec::default())
}

/// Enumerates all cliques, refusing with [`Error::CapExceeded`] when more than
/// `cap` would be produced. Branches of the group search may run in parallel;
/// the result is identical either way.
pub fn enumerate_all_cliques_with(subfiles: &[Subfile], cap: u64, exec: Exec) -> Result<CliqueFamily> {
    let walker = GroupWalker::new(subfiles);

    let counted = AtomicU64::new(0);
    let over = exec.map_indexed(walker.roots(), |r| {
        walker
            .walk_root(r, &mut |_, lists| {
                let n = lists.iter().fold(1u64, |acc, l| acc.saturating_mul(l.len() as u64));
                let total = counted.fetch_add(n, AtomicOrdering::Relaxed).saturating_add(n);
                if total > cap {
                    ControlFlow::Break(total)
                } else {
                    ControlFlow::Continue(())
                }
            })
            .break_value()
    });
    if let Some(projected) = over.into_iter().flatten().max() {
        return Err(Error::CapExceeded { projected, cap });
    }

    let per_root = exec.map_indexed(walker.roots(), |r| {
        let mut groups = Vec::new();
        let _ = walker.walk_root::<(), _>(r, &mut |users, lists| {
            let mut cliques = Vec::new();
            for_each_product(lists, |pick| {
                let members = pick.iter().map(|&i| subfiles[i]).collect();
                cliques.push(Packet::new(members).expect("distinct owners"));
            });
            groups.push(CliqueGroup { users, cliques });
            ControlFlow::Continue(())
        });
        groups
    });
    let groups: Vec<CliqueGroup> = per_root.into_iter().flatten().collect();
    let total = groups.iter().map(|g| g.cliques.len()).sum();
    Ok(CliqueFamily { groups, total })
}

/// Preference among candidate packets: higher members-per-bit, then more
/// members, then the lexicographically smaller member list.
fn cmp_packets(a: &Packet, b: &Packet) -> Ordering {
    cmp_ratio(a.len() as u64, a.cost(), b.len() as u64, b.cost())
        .then_with(|| a.len().cmp(&b.len()))
        .then_with(|| b.members().cmp(a.members()))
}

/// The clique maximizing members per bit.
pub fn pbo(family: &CliqueFamily) -> Result<Packet> {
    pbo_among(family.iter())
}

/// [`pbo`] over an arbitrary collection of packets.
pub fn pbo_among<'a, I: IntoIterator<Item = &'a Packet>>(packets: I) -> Result<Packet> {
    packets.into_iter().filter(|p| !p.is_empty()).max_by(|a, b| cmp_packets(a, b)).cloned().ok_or(Error::EmptyInput)
}

/// A clique as a set over instance positions.
struct Column {
    packet: Packet,
    cost: u64,
    cover: ElementSet,
    members: Vec<usize>,
}

fn columns(instance: &Instance, family: &CliqueFamily) -> Vec<Column> {
    let n = instance.len();
    family
        .iter()
        .map(|p| {
            let members: Vec<usize> = p
                .members()
                .iter()
                .map(|m| instance.position(m.id()).expect("clique member belongs to the instance"))
                .collect();
            Column {
                packet: p.clone(),
                cost: p.cost(),
                cover: ElementSet::from_indices(n, members.iter().copied()),
                members,
            }
        })
        .collect()
}

/// Packet-based greedy: repeatedly send the best clique among those disjoint
/// from everything sent so far.
pub fn algorithm1(instance: &Instance) -> Result<Schedule> {
    algorithm1_with(instance, DEFAULT_CLIQUE_CAP, Exec::default())
}

pub fn algorithm1_with(instance: &Instance, cap: u64, exec: Exec) -> Result<Schedule> {
    let family = enumerate_all_cliques_with(instance.subfiles(), cap, exec)?;
    let cols = columns(instance, &family);
    let mut alive: Vec<usize> = (0..cols.len()).collect();
    let mut uncovered = ElementSet::full(instance.len());
    let mut packets = Vec::new();
    while !uncovered.is_empty() {
        let best = *alive
            .iter()
            .max_by(|&&a, &&b| {
                let (a, b) = (&cols[a], &cols[b]);
                cmp_ratio(a.members.len() as u64, a.cost, b.members.len() as u64, b.cost)
                    .then_with(|| a.members.len().cmp(&b.members.len()))
                    .then_with(|| b.members.cmp(&a.members))
            })
            .expect("uncovered subfiles keep their singleton cliques alive");
        let chosen = &cols[best].cover;
        uncovered.remove_all(chosen);
        packets.push(cols[best].packet.clone());
        alive.retain(|&c| !cols[c].cover.intersects(chosen));
    }
    Ok(Schedule::from_packets(packets))
}

/// Chvátal's greedy weighted set cover over the full clique family. Each set
/// is scored by its still-uncovered members over its original cost, and the
/// chosen set is sent as originally enumerated.
pub fn chvatal_cover(instance: &Instance) -> Result<Schedule> {
    chvatal_cover_with(instance, DEFAULT_CLIQUE_CAP, Exec::default())
}

pub fn chvatal_cover_with(instance: &Instance, cap: u64, exec: Exec) -> Result<Schedule> {
    let family = enumerate_all_cliques_with(instance.subfiles(), cap, exec)?;
    let cols = columns(instance, &family);
    let mut residual: Vec<ElementSet> = cols.iter().map(|c| c.cover.clone()).collect();
    let mut residual_len: Vec<usize> = cols.iter().map(|c| c.members.len()).collect();
    let mut uncovered = ElementSet::full(instance.len());
    let mut packets = Vec::new();
    while !uncovered.is_empty() {
        let mut best = None::<usize>;
        for k in 0..cols.len() {
            if residual_len[k] == 0 {
                continue;
            }
            let Some(b) = best else {
                best = Some(k);
                continue;
            };
            let ord = cmp_ratio(residual_len[k] as u64, cols[k].cost, residual_len[b] as u64, cols[b].cost)
                .then_with(|| residual_len[k].cmp(&residual_len[b]))
                .then_with(|| residual[b].iter().cmp(residual[k].iter()));
            if ord == Ordering::Greater {
                best = Some(k);
            }
        }
        let j = best.expect("an uncovered element still has a set");
        let chosen = cols[j].cover.clone();
        uncovered.remove_all(&chosen);
        packets.push(cols[j].packet.clone());
        for (r, len) in residual.iter_mut().zip(residual_len.iter_mut()) {
            if *len > 0 && r.intersects(&chosen) {
                r.remove_all(&chosen);
                *len = r.len();
            }
        }
    }
    Ok(Schedule::from_packets(packets))
}
