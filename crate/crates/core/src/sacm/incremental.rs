//! SACM with incrementally maintained representatives.
//!
//! For every user `j` and user set `B` (not containing `j`) the engine keeps
//! the smallest remaining subfile of `j` whose cache set contains `B`, ordered
//! by `(size, cache-set bitmask)`. The cost of group `T` is the maximum of
//! these minima over `j ∈ T` with `B = T \ {j}`. Groups are kept in an ordered
//! set under the SBO preference, so each round pops the winner directly.
//!
//! Removing `W[j, A]` can only change minima at subsets of `A`, and only where
//! that subfile was the minimum. That region is closed upward inside `A`, so a
//! top-down walk from `A` touches exactly the entries that change.

use std::cmp::Ordering;
use std::collections::BTreeSet;

use crate::model::{cmp_ratio, Instance, Packet, Schedule, Subfile, UserSet};

const NONE: u64 = u64::MAX;

/// Ordered-set key of a servable group; larger is preferred.
#[derive(Clone, Copy, PartialEq, Eq)]
struct GroupKey {
    card: u64,
    cost: u64,
    /// Bit-reversed group mask. Among equal-size groups, the lexicographically
    /// smaller member list has the larger reversed mask.
    rev: u64,
}

impl GroupKey {
    fn new(group: u64, cost: u64) -> Self {
        GroupKey { card: group.count_ones() as u64, cost, rev: group.reverse_bits() }
    }

    fn group(self) -> u64 {
        self.rev.reverse_bits()
    }
}

impl Ord for GroupKey {
    fn cmp(&self, other: &Self) -> Ordering {
        cmp_ratio(self.card, self.cost, other.card, other.cost)
            .then_with(|| self.card.cmp(&other.card))
            .then_with(|| self.rev.cmp(&other.rev))
    }
}

impl PartialOrd for GroupKey {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

struct Engine {
    users: usize,
    width: usize,
    own: Vec<u64>,
    best_size: Vec<u64>,
    best_mask: Vec<u32>,
    cost: Vec<u64>,
    queue: BTreeSet<GroupKey>,
    stamp: Vec<u32>,
    generation: u32,
}

impl Engine {
    fn new(instance: &Instance) -> Self {
        let users = instance.num_users();
        assert!(users <= super::INCREMENTAL_MAX_USERS);
        let width = 1usize << users;
        let mut own = vec![NONE; users * width];
        for s in instance.subfiles() {
            own[s.owner() * width + s.cache_set().bits() as usize] = s.size();
        }
        let mut engine = Engine {
            users,
            width,
            own,
            best_size: vec![NONE; users * width],
            best_mask: vec![0; users * width],
            cost: vec![NONE; width],
            queue: BTreeSet::new(),
            stamp: vec![0; width],
            generation: 0,
        };
        for j in 0..users {
            for b in (0..width).rev() {
                if b >> j & 1 == 0 {
                    engine.recompute(j, b);
                }
            }
        }
        for t in 1..width {
            engine.refresh_group(t);
        }
        engine
    }

    /// Re-derives the minimum at `(j, b)` from the exact entry and the
    /// one-larger supersets, which must already be current.
    fn recompute(&mut self, j: usize, b: usize) {
        let base = j * self.width;
        let mut size = self.own[base + b];
        let mut mask = b as u32;
        for i in 0..self.users {
            if i == j || b >> i & 1 == 1 {
                continue;
            }
            let s = b | 1 << i;
            let (cs, cm) = (self.best_size[base + s], self.best_mask[base + s]);
            if cs < size || (cs == size && cs != NONE && cm < mask) {
                size = cs;
                mask = cm;
            }
        }
        self.best_size[base + b] = size;
        self.best_mask[base + b] = mask;
    }

    fn group_cost(&self, t: usize) -> u64 {
        let mut cost = 0;
        let mut bits = t;
        while bits != 0 {
            let j = bits.trailing_zeros() as usize;
            bits &= bits - 1;
            let s = self.best_size[j * self.width + (t & !(1 << j))];
            if s == NONE {
                return NONE;
            }
            cost = cost.max(s);
        }
        cost
    }

    fn refresh_group(&mut self, t: usize) {
        let new = self.group_cost(t);
        let old = self.cost[t];
        if new == old {
            return;
        }
        if old != NONE {
            self.queue.remove(&GroupKey::new(t as u64, old));
        }
        if new != NONE {
            self.queue.insert(GroupKey::new(t as u64, new));
        }
        self.cost[t] = new;
    }

    fn remove(&mut self, j: usize, a: usize) {
        let base = j * self.width;
        self.own[base + a] = NONE;
        if self.best_mask[base + a] as usize != a {
            self.recompute(j, a);
            return;
        }
        self.generation += 1;
        let generation = self.generation;
        let mut level = vec![a];
        self.stamp[a] = generation;
        while !level.is_empty() {
            let mut next = Vec::new();
            for &b in &level {
                for i in 0..self.users {
                    if b >> i & 1 == 0 {
                        continue;
                    }
                    let c = b & !(1 << i);
                    if self.stamp[c] != generation
                        && self.best_mask[base + c] as usize == a
                        && self.best_size[base + c] != NONE
                    {
                        self.stamp[c] = generation;
                        next.push(c);
                    }
                }
            }
            for &b in &level {
                self.recompute(j, b);
                self.refresh_group(b | 1 << j);
            }
            level = next;
        }
    }

    fn pop(&mut self) -> Option<Packet> {
        let key = *self.queue.last()?;
        let t = key.group() as usize;
        let mut members = Vec::with_capacity(t.count_ones() as usize);
        let mut bits = t;
        while bits != 0 {
            let j = bits.trailing_zeros() as usize;
            bits &= bits - 1;
            let idx = j * self.width + (t & !(1 << j));
            let subfile = Subfile::new(j, UserSet::from_bits(self.best_mask[idx] as u64), self.best_size[idx])
                .expect("engine only tracks valid subfiles");
            members.push(subfile);
        }
        for m in &members {
            self.remove(m.owner(), m.cache_set().bits() as usize);
        }
        Some(Packet::new(members).expect("one subfile per user"))
    }
}

pub(super) fn run(instance: &Instance) -> Schedule {
    let mut engine = Engine::new(instance);
    let mut packets = Vec::new();
    while let Some(p) = engine.pop() {
        packets.push(p);
    }
    debug_assert_eq!(packets.iter().map(Packet::len).sum::<usize>(), instance.len());
    Schedule::from_packets(packets)
}
