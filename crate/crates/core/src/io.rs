//! JSON file formats.
//!
//! Instance:
//!
//! ```json
//! {"num_users": 3, "subfiles": [{"owner": 1, "cache_set": [2, 3], "size": 300}]}
//! ```
//!
//! Schedule:
//!
//! ```json
//! {"packets": [[{"owner": 1, "cache_set": [2, 3]}, {"owner": 3, "cache_set": [1, 2]}]], "total_bits": 300}
//! ```
//!
//! Users are 1-based and cache sets are sorted arrays. Sizes must be positive
//! integers; fractional sizes fail to parse.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{Instance, Packet, Schedule, Subfile, SubfileId, UserSet, MAX_USERS};

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct InstanceFile {
    num_users: usize,
    subfiles: Vec<SubfileRecord>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct SubfileRecord {
    owner: usize,
    cache_set: Vec<usize>,
    size: u64,
}

#[derive(Serialize, Deserialize, Clone, PartialEq, Eq, Debug)]
#[serde(deny_unknown_fields)]
pub struct SubfileRef {
    pub owner: usize,
    pub cache_set: Vec<usize>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ScheduleFile {
    packets: Vec<Vec<SubfileRef>>,
    total_bits: u64,
}

fn user_from_file(u: usize, num_users: usize) -> Result<usize> {
    if u == 0 || u > num_users {
        // 0 is not a valid 1-based index; report it as one past the range.
        return Err(Error::UserOutOfRange { user: u.wrapping_sub(1).min(MAX_USERS), num_users });
    }
    Ok(u - 1)
}

impl SubfileRef {
    pub fn from_id(id: SubfileId) -> Self {
        SubfileRef { owner: id.owner + 1, cache_set: id.cache_set.to_one_based() }
    }

    pub fn to_id(&self, num_users: usize) -> Result<SubfileId> {
        let owner = user_from_file(self.owner, num_users)?;
        let mut cache_set = UserSet::EMPTY;
        for &u in &self.cache_set {
            cache_set = cache_set.with(user_from_file(u, num_users)?);
        }
        Ok(SubfileId { owner, cache_set })
    }
}

impl Instance {
    pub fn from_json(text: &str) -> Result<Self> {
        let file: InstanceFile = serde_json::from_str(text)?;
        if file.num_users == 0 || file.num_users > MAX_USERS {
            return Err(Error::UserCount(file.num_users));
        }
        let mut subfiles = Vec::with_capacity(file.subfiles.len());
        for r in file.subfiles {
            let owner = user_from_file(r.owner, file.num_users)?;
            let mut cache_set = UserSet::EMPTY;
            for u in r.cache_set {
                let u = user_from_file(u, file.num_users)?;
                if cache_set.contains(u) {
                    return Err(Error::InvalidConfig(format!(
                        "cache set of a subfile of user {} repeats user {}",
                        owner + 1,
                        u + 1
                    )));
                }
                cache_set = cache_set.with(u);
            }
            subfiles.push(Subfile::new(owner, cache_set, r.size)?);
        }
        Instance::new(file.num_users, subfiles)
    }

    /// Canonical pretty-printed JSON; parsing it back and re-emitting is byte-identical.
    pub fn to_json(&self) -> String {
        let file = InstanceFile {
            num_users: self.num_users(),
            subfiles: self
                .subfiles()
                .iter()
                .map(|s| SubfileRecord {
                    owner: s.owner() + 1,
                    cache_set: s.cache_set().to_one_based(),
                    size: s.size(),
                })
                .collect(),
        };
        serde_json::to_string_pretty(&file).expect("instance serializes")
    }
}

impl Schedule {
    /// Parses a schedule, resolving subfile sizes against `instance`.
    ///
    /// The stored `total_bits` is kept as written so that validation can
    /// detect a wrong claim.
    pub fn from_json(text: &str, instance: &Instance) -> Result<Self> {
        let file: ScheduleFile = serde_json::from_str(text)?;
        let mut packets = Vec::with_capacity(file.packets.len());
        for refs in file.packets {
            let mut members = Vec::with_capacity(refs.len());
            for r in refs {
                let id = r.to_id(instance.num_users())?;
                let s = instance
                    .get(id)
                    .ok_or_else(|| Error::UnknownSubfile { owner: id.owner, cache_set: id.cache_set.to_one_based() })?;
                members.push(*s);
            }
            packets.push(Packet::new(members)?);
        }
        Ok(Schedule { packets, total_bits: file.total_bits })
    }

    pub fn to_json(&self) -> String {
        let file = ScheduleFile {
            packets: self
                .packets
                .iter()
                .map(|p| p.members().iter().map(|m| SubfileRef::from_id(m.id())).collect())
                .collect(),
            total_bits: self.total_bits,
        };
        serde_json::to_string_pretty(&file).expect("schedule serializes")
    }
}

/// Reads a vertex order file: a JSON array of subfile references.
pub fn order_from_json(text: &str, instance: &Instance) -> Result<Vec<usize>> {
    let refs: Vec<SubfileRef> = serde_json::from_str(text)?;
    refs.iter()
        .map(|r| {
            let id = r.to_id(instance.num_users())?;
            instance
                .position(id)
                .ok_or_else(|| Error::UnknownSubfile { owner: id.owner, cache_set: id.cache_set.to_one_based() })
        })
        .collect()
}

pub fn order_to_json(order: &[usize], instance: &Instance) -> String {
    let refs: Vec<SubfileRef> = order.iter().map(|&i| SubfileRef::from_id(instance.subfiles()[i].id())).collect();
    serde_json::to_string_pretty(&refs).expect("order serializes")
}
