//! Bit-level delivery simulation.
//!
//! Subfile contents are filled with pseudorandom bits, every packet is sent as
//! the XOR of its members zero-padded at the tail to the longest member, and
//! each user decodes using only the subfiles its cache holds: user `u` caches
//! `W[k, A]` exactly when `u ∈ A`.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::model::{Instance, Packet, Schedule, SubfileId};

/// Bit string; bit `i` lives in word `i / 64` at position `i % 64`, and bits
/// past `len` are zero.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Bits {
    len: u64,
    words: Vec<u64>,
}

fn word_count(len: u64) -> usize {
    len.div_ceil(64) as usize
}

impl Bits {
    pub fn zeros(len: u64) -> Self {
        Bits { len, words: vec![0; word_count(len)] }
    }

    pub fn random<R: Rng>(len: u64, rng: &mut R) -> Self {
        let mut bits = Bits { len, words: (0..word_count(len)).map(|_| rng.random()).collect() };
        bits.clear_tail();
        bits
    }

    pub fn from_bools(bools: &[bool]) -> Self {
        let mut bits = Bits::zeros(bools.len() as u64);
        for (i, &b) in bools.iter().enumerate() {
            if b {
                bits.words[i / 64] |= 1 << (i % 64);
            }
        }
        bits
    }

    pub fn len(&self) -> u64 {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn get(&self, i: u64) -> bool {
        assert!(i < self.len, "bit {i} out of range for length {}", self.len);
        self.words[(i / 64) as usize] >> (i % 64) & 1 == 1
    }

    /// XOR `other`, zero-padded at the tail, into `self`. `other` must not be
    /// longer than `self`.
    pub fn xor_padded(&mut self, other: &Bits) {
        assert!(other.len <= self.len, "cannot pad {} bits down to {}", other.len, self.len);
        for (w, o) in self.words.iter_mut().zip(&other.words) {
            *w ^= o;
        }
    }

    /// The first `len` bits.
    pub fn truncated(&self, len: u64) -> Bits {
        assert!(len <= self.len);
        let mut bits = Bits { len, words: self.words[..word_count(len)].to_vec() };
        bits.clear_tail();
        bits
    }

    fn clear_tail(&mut self) {
        let rem = self.len % 64;
        if rem != 0 {
            if let Some(last) = self.words.last_mut() {
                *last &= (1u64 << rem) - 1;
            }
        }
    }
}

impl fmt::Debug for Bits {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Bits[{}](", self.len)?;
        for i in 0..self.len.min(64) {
            write!(f, "{}", self.get(i) as u8)?;
        }
        if self.len > 64 {
            write!(f, "…")?;
        }
        write!(f, ")")
    }
}

/// Contents of every subfile of an instance.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BitStore {
    contents: BTreeMap<SubfileId, Bits>,
}

impl BitStore {
    pub fn get(&self, id: SubfileId) -> Option<&Bits> {
        self.contents.get(&id)
    }

    pub fn len(&self) -> usize {
        self.contents.len()
    }

    pub fn is_empty(&self) -> bool {
        self.contents.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&SubfileId, &Bits)> {
        self.contents.iter()
    }

    /// Subfiles held in the cache of `user`.
    pub fn cache_of(&self, user: usize) -> BTreeMap<SubfileId, &Bits> {
        self.contents.iter().filter(|(id, _)| id.cache_set.contains(user)).map(|(id, b)| (*id, b)).collect()
    }
}

/// Fills subfiles in canonical order from one ChaCha8 stream seeded by `seed`.
pub fn materialize(instance: &Instance, seed: u64) -> BitStore {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let contents = instance.subfiles().iter().map(|s| (s.id(), Bits::random(s.size(), &mut rng))).collect();
    BitStore { contents }
}

/// XOR of the members' contents, each zero-padded to the packet size.
pub fn transmit(packet: &Packet, store: &BitStore) -> Result<Bits> {
    if packet.is_empty() {
        return Err(Error::EmptyPacket);
    }
    let mut out = Bits::zeros(packet.cost());
    for m in packet.members() {
        let bits = store
            .get(m.id())
            .ok_or_else(|| Error::UnknownSubfile { owner: m.owner(), cache_set: m.cache_set().to_vec() })?;
        out.xor_padded(bits);
    }
    Ok(out)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum DecodeFailure {
    /// The subfile is in no packet.
    Undelivered {
        subfile: SubfileId,
    },
    /// A packet member is not part of the instance, or has the wrong size.
    UnknownSubfile {
        packet: usize,
        subfile: SubfileId,
    },
    /// The owner of `subfile` lacks `missing` and cannot cancel it.
    MissingSideInformation {
        packet: usize,
        subfile: SubfileId,
        missing: SubfileId,
    },
    /// Decoding completed but produced the wrong bits.
    Mismatch {
        packet: usize,
        subfile: SubfileId,
    },
    EmptyPacket {
        packet: usize,
    },
}

fn show(id: &SubfileId) -> String {
    let set: Vec<String> = id.cache_set.to_one_based().iter().map(usize::to_string).collect();
    format!("W[{},{{{}}}]", id.owner + 1, set.join(","))
}

impl fmt::Display for DecodeFailure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DecodeFailure::Undelivered { subfile } => write!(f, "{} is never transmitted", show(subfile)),
            DecodeFailure::UnknownSubfile { packet, subfile } => {
                write!(f, "packet {packet} carries {} which is not in the instance", show(subfile))
            }
            DecodeFailure::MissingSideInformation { packet, subfile, missing } => write!(
                f,
                "packet {packet}: user {} cannot decode {} without {}",
                subfile.owner + 1,
                show(subfile),
                show(missing)
            ),
            DecodeFailure::Mismatch { packet, subfile } => {
                write!(f, "packet {packet}: decoded {} does not match its contents", show(subfile))
            }
            DecodeFailure::EmptyPacket { packet } => write!(f, "packet {packet} is empty"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DecodeReport {
    pub packets: usize,
    /// Successful (packet, member) decodes.
    pub decoded: usize,
    pub failure: Option<DecodeFailure>,
}

impl DecodeReport {
    pub fn passed(&self) -> bool {
        self.failure.is_none()
    }
}

/// Decodes every member of every packet at its owner and checks that every
/// subfile is delivered. Stops at the first failure.
pub fn verify_decode(instance: &Instance, schedule: &Schedule, seed: u64) -> DecodeReport {
    let store = materialize(instance, seed);
    let mut report = DecodeReport { packets: schedule.packets.len(), decoded: 0, failure: None };
    let mut delivered = BTreeSet::new();
    let mut caches: BTreeMap<usize, BTreeMap<SubfileId, &Bits>> = BTreeMap::new();

    for (p, packet) in schedule.packets.iter().enumerate() {
        if packet.is_empty() {
            report.failure = Some(DecodeFailure::EmptyPacket { packet: p });
            return report;
        }
        let unknown =
            |m: &&crate::model::Subfile| instance.position(m.id()).map(|i| instance.subfiles()[i]) != Some(**m);
        if let Some(m) = packet.members().iter().find(unknown) {
            report.failure = Some(DecodeFailure::UnknownSubfile { packet: p, subfile: m.id() });
            return report;
        }
        let signal = transmit(packet, &store).expect("members checked above");
        for target in packet.members() {
            let cache = caches.entry(target.owner()).or_insert_with(|| store.cache_of(target.owner()));
            let mut buf = signal.clone();
            for other in packet.members().iter().filter(|o| o.id() != target.id()) {
                match cache.get(&other.id()) {
                    Some(bits) => buf.xor_padded(bits),
                    None => {
                        report.failure = Some(DecodeFailure::MissingSideInformation {
                            packet: p,
                            subfile: target.id(),
                            missing: other.id(),
                        });
                        return report;
                    }
                }
            }
            if &buf.truncated(target.size()) != store.get(target.id()).expect("member checked above") {
                report.failure = Some(DecodeFailure::Mismatch { packet: p, subfile: target.id() });
                return report;
            }
            report.decoded += 1;
            delivered.insert(target.id());
        }
    }
    if let Some(s) = instance.subfiles().iter().find(|s| !delivered.contains(&s.id())) {
        report.failure = Some(DecodeFailure::Undelivered { subfile: s.id() });
    }
    report
}

/// Adds a packet that violates the side-information condition: two members
/// whose owners do not cache each other's subfile. Returns `None` when the
/// instance has no such pair.
pub fn inject_infeasible(instance: &Instance, schedule: &Schedule) -> Option<Schedule> {
    let subs = instance.subfiles();
    for (i, a) in subs.iter().enumerate() {
        for b in &subs[i + 1..] {
            if a.owner() != b.owner() && !a.compatible_with(b) {
                let mut packets = schedule.packets.clone();
                packets.push(Packet::new(vec![*a, *b]).expect("distinct owners"));
                return Some(Schedule::from_packets(packets));
            }
        }
    }
    None
}
