//! Subfiles, instances, packets and schedules.
//!
//! A subfile `W[k, A]` is the part of the file requested by user `k` that is
//! cached exactly at the users in `A`. Users are 0-based here; JSON files use
//! 1-based indices (see [`crate::io`]).

use std::cmp::Ordering;
use std::collections::HashSet;
use std::fmt;

use crate::error::{Error, Result};

/// Largest supported number of users; cache sets are `u64` bitmasks.
pub const MAX_USERS: usize = 63;

/// A set of users stored as a bitmask, bit `i` standing for user `i`.
///
/// `Ord` is the lexicographic order of the ascending member lists, which is the
/// canonical order used for tie-breaking everywhere.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Default)]
pub struct UserSet(u64);

impl UserSet {
    pub const EMPTY: UserSet = UserSet(0);

    pub const fn from_bits(bits: u64) -> Self {
        UserSet(bits)
    }

    /// All users `0..n`.
    pub fn full(n: usize) -> Self {
        debug_assert!(n <= 64);
        if n >= 64 {
            UserSet(u64::MAX)
        } else {
            UserSet((1u64 << n) - 1)
        }
    }

    pub fn single(user: usize) -> Self {
        UserSet(1u64 << user)
    }

    pub fn from_users<I: IntoIterator<Item = usize>>(users: I) -> Self {
        UserSet(users.into_iter().fold(0, |m, u| m | (1u64 << u)))
    }

    pub const fn bits(self) -> u64 {
        self.0
    }

    pub fn contains(self, user: usize) -> bool {
        user < 64 && self.0 >> user & 1 == 1
    }

    pub fn with(self, user: usize) -> Self {
        UserSet(self.0 | 1u64 << user)
    }

    pub fn without(self, user: usize) -> Self {
        UserSet(self.0 & !(1u64 << user))
    }

    pub fn union(self, other: UserSet) -> Self {
        UserSet(self.0 | other.0)
    }

    pub fn difference(self, other: UserSet) -> Self {
        UserSet(self.0 & !other.0)
    }

    pub fn is_subset_of(self, other: UserSet) -> bool {
        self.0 & !other.0 == 0
    }

    pub fn len(self) -> usize {
        self.0.count_ones() as usize
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    /// Highest user index plus one, or 0 for the empty set.
    pub fn span(self) -> usize {
        64 - self.0.leading_zeros() as usize
    }

    /// Members in ascending order.
    pub fn iter(self) -> impl Iterator<Item = usize> {
        let mut bits = self.0;
        std::iter::from_fn(move || {
            if bits == 0 {
                None
            } else {
                let i = bits.trailing_zeros() as usize;
                bits &= bits - 1;
                Some(i)
            }
        })
    }

    pub fn to_vec(self) -> Vec<usize> {
        self.iter().collect()
    }

    /// 1-based member list, as written in files and messages.
    pub fn to_one_based(self) -> Vec<usize> {
        self.iter().map(|u| u + 1).collect()
    }
}

impl Ord for UserSet {
    fn cmp(&self, other: &Self) -> Ordering {
        let diff = self.0 ^ other.0;
        if diff == 0 {
            return Ordering::Equal;
        }
        // Both lists agree below the lowest differing user `i`. The list holding
        // `i` is smaller unless the other list has nothing left after that point.
        let i = diff.trailing_zeros();
        let above = if i >= 63 { 0 } else { u64::MAX << (i + 1) };
        let self_holds = self.0 >> i & 1 == 1;
        let lacks = if self_holds { other.0 } else { self.0 };
        let holder_is_smaller = lacks & above != 0;
        match (self_holds, holder_is_smaller) {
            (true, true) | (false, false) => Ordering::Less,
            _ => Ordering::Greater,
        }
    }
}

impl PartialOrd for UserSet {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Debug for UserSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_set().entries(self.to_one_based()).finish()
    }
}

/// Identity of a subfile: requesting user and the users caching it.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SubfileId {
    pub owner: usize,
    pub cache_set: UserSet,
}

impl fmt::Debug for SubfileId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "W[{}, {:?}]", self.owner + 1, self.cache_set)
    }
}

/// A nonzero subfile `W[owner, cache_set]` of `size` bits.
#[derive(Clone, Copy, PartialEq, Eq, Hash)]
pub struct Subfile {
    owner: usize,
    cache_set: UserSet,
    size: u64,
}

impl Subfile {
    pub fn new(owner: usize, cache_set: UserSet, size: u64) -> Result<Self> {
        if owner >= MAX_USERS {
            return Err(Error::UserOutOfRange { user: owner, num_users: MAX_USERS });
        }
        if cache_set.contains(owner) {
            return Err(Error::OwnerInCacheSet { owner });
        }
        if size == 0 {
            return Err(Error::ZeroSize { owner });
        }
        Ok(Subfile { owner, cache_set, size })
    }

    /// Convenience constructor from 0-based user lists; panics on invalid input.
    pub fn of(owner: usize, cache_set: &[usize], size: u64) -> Self {
        Subfile::new(owner, UserSet::from_users(cache_set.iter().copied()), size).expect("valid subfile")
    }

    pub fn owner(&self) -> usize {
        self.owner
    }

    pub fn cache_set(&self) -> UserSet {
        self.cache_set
    }

    pub fn size(&self) -> u64 {
        self.size
    }

    pub fn id(&self) -> SubfileId {
        SubfileId { owner: self.owner, cache_set: self.cache_set }
    }

    /// Edge test of the side-information graph: each owner caches the other subfile.
    pub fn compatible_with(&self, other: &Subfile) -> bool {
        self.owner != other.owner && other.cache_set.contains(self.owner) && self.cache_set.contains(other.owner)
    }
}

impl Ord for Subfile {
    fn cmp(&self, other: &Self) -> Ordering {
        self.owner
            .cmp(&other.owner)
            .then_with(|| self.cache_set.cmp(&other.cache_set))
            .then_with(|| self.size.cmp(&other.size))
    }
}

impl PartialOrd for Subfile {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Debug for Subfile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "W[{}, {:?}]({})", self.owner + 1, self.cache_set, self.size)
    }
}

/// The set of subfiles the server has to deliver to `num_users` users.
///
/// Subfiles are kept in canonical order, so positions are stable indices.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct Instance {
    num_users: usize,
    subfiles: Vec<Subfile>,
}

impl Instance {
    pub fn new(num_users: usize, mut subfiles: Vec<Subfile>) -> Result<Self> {
        if num_users == 0 || num_users > MAX_USERS {
            return Err(Error::UserCount(num_users));
        }
        let all = UserSet::full(num_users);
        for s in &subfiles {
            if s.owner >= num_users {
                return Err(Error::UserOutOfRange { user: s.owner, num_users });
            }
            if let Some(u) = s.cache_set.difference(all).iter().next() {
                return Err(Error::UserOutOfRange { user: u, num_users });
            }
        }
        subfiles.sort();
        if let Some(w) = subfiles.windows(2).find(|w| w[0].id() == w[1].id()) {
            return Err(Error::DuplicateSubfile { owner: w[0].owner, cache_set: w[0].cache_set.to_one_based() });
        }
        Ok(Instance { num_users, subfiles })
    }

    pub fn num_users(&self) -> usize {
        self.num_users
    }

    pub fn subfiles(&self) -> &[Subfile] {
        &self.subfiles
    }

    pub fn len(&self) -> usize {
        self.subfiles.len()
    }

    pub fn is_empty(&self) -> bool {
        self.subfiles.is_empty()
    }

    /// Bits sent when every subfile goes out on its own.
    pub fn total_size(&self) -> u64 {
        self.subfiles.iter().map(|s| s.size).sum()
    }

    pub fn position(&self, id: SubfileId) -> Option<usize> {
        self.subfiles.binary_search_by(|s| s.owner.cmp(&id.owner).then_with(|| s.cache_set.cmp(&id.cache_set))).ok()
    }

    pub fn get(&self, id: SubfileId) -> Option<&Subfile> {
        self.position(id).map(|i| &self.subfiles[i])
    }
}

/// A candidate XOR packet: at most one subfile per requesting user.
#[derive(Clone, PartialEq, Eq, Hash, Default)]
pub struct Packet {
    members: Vec<Subfile>,
}

impl Packet {
    pub fn new(mut members: Vec<Subfile>) -> Result<Self> {
        members.sort();
        let mut owners = UserSet::EMPTY;
        for m in &members {
            if owners.contains(m.owner) {
                return Err(Error::DuplicateOwner(m.owner));
            }
            owners = owners.with(m.owner);
        }
        Ok(Packet { members })
    }

    pub fn single(subfile: Subfile) -> Self {
        Packet { members: vec![subfile] }
    }

    pub fn members(&self) -> &[Subfile] {
        &self.members
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn owners(&self) -> UserSet {
        UserSet::from_users(self.members.iter().map(|m| m.owner))
    }

    pub fn contains(&self, id: SubfileId) -> bool {
        self.members.iter().any(|m| m.id() == id)
    }

    /// Largest member size; 0 for the empty packet.
    pub fn cost(&self) -> u64 {
        self.members.iter().map(|m| m.size).max().unwrap_or(0)
    }
}

impl fmt::Debug for Packet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_set().entries(&self.members).finish()
    }
}

/// True iff every member's owner caches every other member.
pub fn is_feasible(packet: &Packet) -> bool {
    let owners = packet.owners();
    packet.members.iter().all(|m| owners.without(m.owner).is_subset_of(m.cache_set))
}

/// Bits on the wire for a packet: its largest member, shorter ones zero-padded.
pub fn packet_size(packet: &Packet) -> Result<u64> {
    packet.members.iter().map(|m| m.size).max().ok_or(Error::EmptyPacket)
}

/// Members of `p1` absent from `p2`. A nonempty result of two cliques is a clique.
pub fn packet_subtract(p1: &Packet, p2: &Packet) -> Packet {
    let members: Vec<Subfile> = p1.members.iter().filter(|m| !p2.contains(m.id())).copied().collect();
    let out = Packet { members };
    debug_assert!(
        !(is_feasible(p1) && is_feasible(p2)) || out.is_empty() || is_feasible(&out),
        "difference of feasible packets must be feasible"
    );
    out
}

/// Compares `n1 / c1` with `n2 / c2` exactly; costs are positive.
pub(crate) fn cmp_ratio(n1: u64, c1: u64, n2: u64, c2: u64) -> Ordering {
    (n1 as u128 * c2 as u128).cmp(&(n2 as u128 * c1 as u128))
}

/// An ordered sequence of packets and the bits it claims to use.
#[derive(Clone, PartialEq, Eq, Debug, Default)]
pub struct Schedule {
    pub packets: Vec<Packet>,
    pub total_bits: u64,
}

impl Schedule {
    pub fn from_packets(packets: Vec<Packet>) -> Self {
        let total_bits = packets.iter().map(Packet::cost).sum();
        Schedule { packets, total_bits }
    }

    pub fn recomputed_bits(&self) -> u64 {
        self.packets.iter().map(Packet::cost).sum()
    }

    /// Sizes of the packets in transmission order.
    pub fn packet_sizes(&self) -> Vec<u64> {
        self.packets.iter().map(Packet::cost).collect()
    }
}

/// First reason a schedule fails to be a valid clique cover.
#[derive(Clone, PartialEq, Eq, Debug)]
pub enum ScheduleViolation {
    EmptyPacket { packet: usize },
    InfeasiblePacket { packet: usize },
    UnknownSubfile { packet: usize, subfile: SubfileId },
    Uncovered { subfile: SubfileId },
    TotalMismatch { claimed: u64, actual: u64 },
}

impl fmt::Display for ScheduleViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ScheduleViolation::EmptyPacket { packet } => write!(f, "packet {packet} is empty"),
            ScheduleViolation::InfeasiblePacket { packet } => {
                write!(f, "packet {packet} is not a clique")
            }
            ScheduleViolation::UnknownSubfile { packet, subfile } => {
                write!(f, "packet {packet} carries {subfile:?}, which is not in the instance")
            }
            ScheduleViolation::Uncovered { subfile } => write!(f, "{subfile:?} is never sent"),
            ScheduleViolation::TotalMismatch { claimed, actual } => {
                write!(f, "schedule claims {claimed} bits but its packets cost {actual}")
            }
        }
    }
}

/// Checks feasibility of every packet, full coverage and the claimed total.
pub fn validate_schedule(instance: &Instance, schedule: &Schedule) -> std::result::Result<(), ScheduleViolation> {
    let mut covered = HashSet::with_capacity(instance.len());
    for (i, p) in schedule.packets.iter().enumerate() {
        if p.is_empty() {
            return Err(ScheduleViolation::EmptyPacket { packet: i });
        }
        for m in &p.members {
            if instance.get(m.id()) != Some(m) {
                return Err(ScheduleViolation::UnknownSubfile { packet: i, subfile: m.id() });
            }
            covered.insert(m.id());
        }
        if !is_feasible(p) {
            return Err(ScheduleViolation::InfeasiblePacket { packet: i });
        }
    }
    if let Some(s) = instance.subfiles.iter().find(|s| !covered.contains(&s.id())) {
        return Err(ScheduleViolation::Uncovered { subfile: s.id() });
    }
    let actual = schedule.recomputed_bits();
    if actual != schedule.total_bits {
        return Err(ScheduleViolation::TotalMismatch { claimed: schedule.total_bits, actual });
    }
    Ok(())
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;

    /// The 12-subfile, three-user placement where `W[1,{2,3}]` and `W[2,{1}]`
    /// are 300 bits and everything else is 10 bits (users 0-based here).
    pub(crate) fn example_one() -> Instance {
        let mut subfiles = Vec::new();
        for owner in 0..3 {
            let others: Vec<usize> = (0..3).filter(|&u| u != owner).collect();
            for mask in 0..4u32 {
                let set: Vec<usize> =
                    others.iter().enumerate().filter(|(b, _)| mask >> b & 1 == 1).map(|(_, &u)| u).collect();
                let big = (owner == 0 && set == [1, 2]) || (owner == 1 && set == [0]);
                subfiles.push(Subfile::of(owner, &set, if big { 300 } else { 10 }));
            }
        }
        Instance::new(3, subfiles).unwrap()
    }

    fn w(owner: usize, set: &[usize], size: u64) -> Subfile {
        Subfile::of(owner, set, size)
    }

    #[test]
    fn user_set_order_is_lexicographic() {
        let lists: Vec<Vec<usize>> =
            vec![vec![], vec![0], vec![0, 1], vec![0, 1, 2], vec![0, 2], vec![1], vec![1, 2], vec![2]];
        for (i, a) in lists.iter().enumerate() {
            for (j, b) in lists.iter().enumerate() {
                let ua = UserSet::from_users(a.iter().copied());
                let ub = UserSet::from_users(b.iter().copied());
                assert_eq!(ua.cmp(&ub), i.cmp(&j), "{a:?} vs {b:?}");
                assert_eq!(ua.cmp(&ub), a.cmp(b));
            }
        }
    }

    #[test]
    fn full_triangle_is_feasible() {
        let p = Packet::new(vec![w(0, &[1, 2], 1), w(1, &[0, 2], 1), w(2, &[0, 1], 1)]).unwrap();
        assert!(is_feasible(&p));
    }

    #[test]
    fn singletons_are_feasible() {
        for k in 0..5 {
            assert!(is_feasible(&Packet::single(w(k, &[], 7))));
        }
    }

    #[test]
    fn broken_pair_is_infeasible() {
        let p = Packet::new(vec![w(0, &[1], 1), w(1, &[2], 1)]).unwrap();
        assert!(!is_feasible(&p));
    }

    #[test]
    fn duplicate_owner_rejected() {
        let err = Packet::new(vec![w(0, &[1], 1), w(0, &[2], 1)]).unwrap_err();
        assert!(matches!(err, Error::DuplicateOwner(0)));
    }

    #[test]
    fn packet_size_is_largest_member() {
        let p = Packet::new(vec![w(0, &[1], 10), w(1, &[0, 2], 10)]).unwrap();
        assert_eq!(packet_size(&p).unwrap(), 10);
        let p = Packet::new(vec![w(0, &[1, 2], 300), w(1, &[0], 300)]).unwrap();
        assert_eq!(packet_size(&p).unwrap(), 300);
        assert_eq!(packet_size(&Packet::single(w(3, &[], 42))).unwrap(), 42);
        assert!(matches!(packet_size(&Packet::default()), Err(Error::EmptyPacket)));
    }

    #[test]
    fn subtract_cases() {
        let tri = Packet::new(vec![w(0, &[1, 2], 1), w(1, &[0, 2], 1), w(2, &[0, 1], 1)]).unwrap();
        assert!(packet_subtract(&tri, &tri).is_empty());
        let mid = Packet::single(w(1, &[0, 2], 1));
        let rest = packet_subtract(&tri, &mid);
        assert_eq!(rest.members(), &[w(0, &[1, 2], 1), w(2, &[0, 1], 1)]);
        assert!(is_feasible(&rest));
        let other = Packet::single(w(1, &[], 1));
        assert_eq!(packet_subtract(&tri, &other), tri);
    }

    #[test]
    fn instance_validation() {
        assert!(matches!(Instance::new(0, vec![]), Err(Error::UserCount(0))));
        assert!(matches!(Instance::new(64, vec![]), Err(Error::UserCount(64))));
        assert!(matches!(Instance::new(2, vec![w(2, &[], 1)]), Err(Error::UserOutOfRange { user: 2, .. })));
        assert!(matches!(Instance::new(2, vec![w(0, &[3], 1)]), Err(Error::UserOutOfRange { user: 3, .. })));
        assert!(matches!(
            Instance::new(2, vec![w(0, &[1], 1), w(0, &[1], 5)]),
            Err(Error::DuplicateSubfile { owner: 0, .. })
        ));
        assert!(matches!(Subfile::new(1, UserSet::single(1), 3), Err(Error::OwnerInCacheSet { owner: 1 })));
        assert!(matches!(Subfile::new(1, UserSet::EMPTY, 0), Err(Error::ZeroSize { owner: 1 })));
    }

    #[test]
    fn example_one_shape() {
        let inst = example_one();
        assert_eq!(inst.len(), 12);
        assert_eq!(inst.total_size(), 700);
        let big = inst.subfiles().iter().filter(|s| s.size() == 300).count();
        assert_eq!(big, 2);
    }

    fn p(members: &[(usize, &[usize])], inst: &Instance) -> Packet {
        let m = members
            .iter()
            .map(|(o, s)| {
                *inst.get(SubfileId { owner: *o, cache_set: UserSet::from_users(s.iter().copied()) }).unwrap()
            })
            .collect();
        Packet::new(m).unwrap()
    }

    /// The eight-packet optimum listed for the three-user example.
    pub(crate) fn example_one_optimum(inst: &Instance) -> Schedule {
        Schedule::from_packets(vec![
            p(&[(0, &[1]), (1, &[0, 2])], inst),
            p(&[(0, &[2]), (2, &[0])], inst),
            p(&[(1, &[2]), (2, &[1])], inst),
            p(&[(2, &[0, 1])], inst),
            p(&[(0, &[])], inst),
            p(&[(1, &[])], inst),
            p(&[(2, &[])], inst),
            p(&[(0, &[1, 2]), (1, &[0])], inst),
        ])
    }

    #[test]
    fn validate_listed_optimum() {
        let inst = example_one();
        let s = example_one_optimum(&inst);
        assert_eq!(s.total_bits, 370);
        assert_eq!(validate_schedule(&inst, &s), Ok(()));
    }

    #[test]
    fn validate_rejects_bad_schedules() {
        let inst = example_one();
        let empty = Schedule::default();
        assert!(matches!(validate_schedule(&inst, &empty), Err(ScheduleViolation::Uncovered { .. })));

        let mut bad = example_one_optimum(&inst);
        bad.packets.push(p(&[(0, &[1]), (1, &[2])], &inst));
        bad.total_bits = bad.recomputed_bits();
        assert_eq!(validate_schedule(&inst, &bad), Err(ScheduleViolation::InfeasiblePacket { packet: 8 }));

        let mut wrong_total = example_one_optimum(&inst);
        wrong_total.total_bits = 360;
        assert!(matches!(
            validate_schedule(&inst, &wrong_total),
            Err(ScheduleViolation::TotalMismatch { claimed: 360, actual: 370 })
        ));
    }
}
