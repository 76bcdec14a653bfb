//! Clique cover delivery for coded caching under arbitrary cache placements.
//!
//! Given which subfiles every user already holds, the server must broadcast
//! every missing subfile. A packet XORs subfiles of distinct users
//! (zero-padding shorter ones to the longest), so the cost of a packet is the
//! size of its largest member. This crate computes delivery schedules that keep
//! the total number of broadcast bits small:
//!
//! * [`sacm`](crate::sacm::sacm): the size-aware greedy, with a `(1 + ln K)`
//!   approximation guarantee and no clique enumeration.
//! * [`clique_space`]: explicit clique enumeration, the packet-based greedy and
//!   the classic weighted set cover greedy it is equivalent to.
//! * [`exact`]: a branch-and-bound optimum for small instances.
//! * [`baselines`]: uncoded, subset-sweep (GCM) and greedy clique partition (GCCM) delivery.
//! * [`generators`]: random placements, worst-case families and graph imports.
//! * [`decode`]: bit-level XOR simulation proving every user can decode.
//! * [`experiment`]: Monte Carlo sweeps written as CSV.
//!
//! Users are 0-based in the API and 1-based in every file format.

pub mod baselines;
pub mod bitset;
pub mod clique_space;
pub mod decode;
pub mod error;
pub mod exact;
pub mod exec;
pub mod experiment;
pub mod generators;
mod groups;
pub mod io;
pub mod model;
pub mod sacm;

pub use error::{Error, Result};
pub use exec::Exec;
pub use model::{
    is_feasible, packet_size, packet_subtract, validate_schedule, Instance, Packet, Schedule, ScheduleViolation,
    Subfile, SubfileId, UserSet, MAX_USERS,
};
