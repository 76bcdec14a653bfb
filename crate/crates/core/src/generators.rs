//! Instance construction: random placements, worst-case families for the
//! baselines, and the reduction from graph clique cover.
//!
//! Random instances use ChaCha8. Sample `i` of a configuration with seed `s`
//! and `tau` subfiles draws from `ChaCha8Rng::seed_from_u64(s)` on stream
//! `(tau << 32) | i`, so every (tau, sample) pair has its own independent,
//! platform-independent stream and samples can be generated in any order.

use std::collections::BTreeSet;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{Instance, Subfile, UserSet, MAX_USERS};

/// Monte Carlo sweep parameters for one `(K, tau)` point.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub num_users: usize,
    pub tau: u64,
    pub size_min: u64,
    pub size_max: u64,
    pub samples: u32,
    pub seed: u64,
}

impl ExperimentConfig {
    /// Subfile sizes drawn uniformly from 1 to 1000 bits, 100 samples.
    pub fn new(num_users: usize, tau: u64, seed: u64) -> Self {
        ExperimentConfig { num_users, tau, size_min: 1, size_max: 1000, samples: 100, seed }
    }

    pub fn validate(&self) -> Result<()> {
        let k = self.num_users;
        if k == 0 || k > MAX_USERS {
            return Err(Error::UserCount(k));
        }
        let max = candidate_count(k);
        if (self.tau as u128) < k as u128 || self.tau as u128 > max {
            return Err(Error::InvalidConfig(format!("tau must lie in [{k}, {max}], got {}", self.tau)));
        }
        if self.tau > u32::MAX as u64 {
            return Err(Error::InvalidConfig(format!("tau {} exceeds the supported 2^32 - 1", self.tau)));
        }
        if self.size_min == 0 || self.size_min > self.size_max {
            return Err(Error::InvalidConfig(format!(
                "size range must satisfy 1 <= min <= max, got {}..={}",
                self.size_min, self.size_max
            )));
        }
        Ok(())
    }
}

/// Number of possible subfiles `K * 2^(K-1)`.
pub fn candidate_count(num_users: usize) -> u128 {
    (num_users as u128) << (num_users - 1)
}

/// The candidate with index `c`: owner `c / 2^(K-1)`, cache set given by the
/// remaining bits with a zero inserted at the owner's position.
pub fn candidate(num_users: usize, c: u128) -> (usize, UserSet) {
    let per_owner = 1u128 << (num_users - 1);
    let owner = (c / per_owner) as usize;
    let rest = (c % per_owner) as u64;
    let low = rest & ((1u64 << owner) - 1);
    let high = (rest >> owner) << (owner + 1);
    (owner, UserSet::from_bits(low | high))
}

fn sample_rng(config: &ExperimentConfig, index: u32) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    rng.set_stream(config.tau << 32 | index as u64);
    rng
}

/// Sample 0 of `config`.
pub fn random_instance(config: &ExperimentConfig) -> Result<Instance> {
    random_instance_sample(config, 0)
}

/// `tau` distinct subfiles drawn uniformly without replacement, with sizes
/// independent and uniform in `[size_min, size_max]`.
pub fn random_instance_sample(config: &ExperimentConfig, index: u32) -> Result<Instance> {
    config.validate()?;
    let k = config.num_users;
    let n = candidate_count(k);
    let mut rng = sample_rng(config, index);

    // Floyd's algorithm: one draw per chosen element.
    let mut chosen = BTreeSet::new();
    for j in n - config.tau as u128..n {
        let t = rng.random_range(0..=j);
        if !chosen.insert(t) {
            chosen.insert(j);
        }
    }
    let subfiles = chosen
        .into_iter()
        .map(|c| {
            let (owner, cache_set) = candidate(k, c);
            let size = rng.random_range(config.size_min..=config.size_max);
            Subfile::new(owner, cache_set, size)
        })
        .collect::<Result<Vec<_>>>()?;
    Instance::new(k, subfiles)
}

fn check_family(num_users: usize, min_users: usize, big: u64, eps: Option<u64>) -> Result<()> {
    if num_users < min_users || num_users > MAX_USERS {
        return Err(Error::InvalidConfig(format!("need {min_users} <= K <= {MAX_USERS}, got {num_users}")));
    }
    if big == 0 {
        return Err(Error::InvalidConfig("B must be positive".into()));
    }
    if let Some(eps) = eps {
        if eps == 0 || eps >= big {
            return Err(Error::InvalidConfig(format!("need 0 < eps < B, got eps={eps}, B={big}")));
        }
    }
    Ok(())
}

/// Every user caches every other user's subfile: `W[k, [K] \ {k}]` of size `B`.
/// Uncoded delivery sends `K * B` bits where one packet of `B` bits suffices.
pub fn adversarial_uncoded(num_users: usize, big: u64) -> Result<Instance> {
    check_family(num_users, 2, big, None)?;
    let all = UserSet::full(num_users);
    let subfiles = (0..num_users).map(|k| Subfile::new(k, all.without(k), big)).collect::<Result<Vec<_>>>()?;
    Instance::new(num_users, subfiles)
}

/// Size-`B` subfiles `W[l, [K-l+1] \ {l}]` for `l = 1..=l*`, `l* = (K+1)/2`
/// (users 1-based), plus size-`eps` subfiles `W[k, [K] \ {k}]` for `k > l*`.
/// The size-`B` part is one clique, so the optimum is `B + eps`, while the
/// subset sweep sends `l*` packets of `B` bits.
pub fn adversarial_gcm(num_users: usize, big: u64, eps: u64) -> Result<Instance> {
    check_family(num_users, 3, big, Some(eps))?;
    let k = num_users;
    let l_star = k.div_ceil(2);
    let mut subfiles = Vec::with_capacity(k);
    for l in 0..l_star {
        subfiles.push(Subfile::new(l, UserSet::full(k - l).without(l), big)?);
    }
    for j in l_star..k {
        subfiles.push(Subfile::new(j, UserSet::full(k).without(j), eps)?);
    }
    Instance::new(k, subfiles)
}

/// Size-`B` subfiles `W[k, [K] \ {k}]` plus the size-`eps` ring
/// `W[1,{2}], W[2,{3}], ..., W[K,{1}]`, with the vertex order that scans the
/// ring first. Each ring vertex then absorbs one size-`B` vertex, so the
/// greedy partition sends `K * B` bits against an optimum of `B + K * eps`.
pub fn adversarial_gccm(num_users: usize, big: u64, eps: u64) -> Result<(Instance, Vec<usize>)> {
    check_family(num_users, 3, big, Some(eps))?;
    let k = num_users;
    let ring: Vec<Subfile> =
        (0..k).map(|j| Subfile::new(j, UserSet::single((j + 1) % k), eps)).collect::<Result<Vec<_>>>()?;
    let full: Vec<Subfile> =
        (0..k).map(|j| Subfile::new(j, UserSet::full(k).without(j), big)).collect::<Result<Vec<_>>>()?;
    let instance = Instance::new(k, ring.iter().chain(&full).copied().collect())?;
    let order = ring.iter().chain(&full).map(|s| instance.position(s.id()).expect("just inserted")).collect();
    Ok((instance, order))
}

/// Simple undirected graph on at most [`MAX_USERS`] vertices.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Graph {
    adjacency: Vec<u64>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct GraphFile {
    vertices: usize,
    /// 1-based endpoint pairs.
    edges: Vec<(usize, usize)>,
}

impl Graph {
    pub fn empty(vertices: usize) -> Result<Self> {
        if vertices == 0 || vertices > MAX_USERS {
            return Err(Error::UserCount(vertices));
        }
        Ok(Graph { adjacency: vec![0; vertices] })
    }

    /// Edges use 0-based endpoints.
    pub fn from_edges(vertices: usize, edges: &[(usize, usize)]) -> Result<Self> {
        let mut g = Graph::empty(vertices)?;
        for &(a, b) in edges {
            g.add_edge(a, b)?;
        }
        Ok(g)
    }

    /// Each pair is an edge independently with probability `p`.
    pub fn random<R: Rng>(vertices: usize, p: f64, rng: &mut R) -> Result<Self> {
        let mut g = Graph::empty(vertices)?;
        for a in 0..vertices {
            for b in a + 1..vertices {
                if rng.random_bool(p) {
                    g.add_edge(a, b)?;
                }
            }
        }
        Ok(g)
    }

    pub fn add_edge(&mut self, a: usize, b: usize) -> Result<()> {
        let n = self.vertices();
        for v in [a, b] {
            if v >= n {
                return Err(Error::UserOutOfRange { user: v, num_users: n });
            }
        }
        if a == b {
            return Err(Error::InvalidConfig(format!("self-loop at vertex {}", a + 1)));
        }
        self.adjacency[a] |= 1 << b;
        self.adjacency[b] |= 1 << a;
        Ok(())
    }

    pub fn vertices(&self) -> usize {
        self.adjacency.len()
    }

    pub fn neighbors(&self, v: usize) -> UserSet {
        UserSet::from_bits(self.adjacency[v])
    }

    pub fn has_edge(&self, a: usize, b: usize) -> bool {
        self.adjacency[a] >> b & 1 == 1
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let file: GraphFile = serde_json::from_str(text)?;
        let mut g = Graph::empty(file.vertices)?;
        for (a, b) in file.edges {
            if a == 0 || b == 0 {
                return Err(Error::InvalidConfig("vertices are numbered from 1".into()));
            }
            g.add_edge(a - 1, b - 1)?;
        }
        Ok(g)
    }

    pub fn to_json(&self) -> String {
        let mut edges = Vec::new();
        for a in 0..self.vertices() {
            for b in a + 1..self.vertices() {
                if self.has_edge(a, b) {
                    edges.push((a + 1, b + 1));
                }
            }
        }
        serde_json::to_string_pretty(&GraphFile { vertices: self.vertices(), edges }).expect("plain data")
    }
}

/// One unit-size subfile `W[k, N(k)]` per vertex. Two such subfiles are
/// compatible exactly when their vertices are adjacent, so a minimum clique
/// cover of the graph is a minimum-bit delivery.
pub fn from_graph(graph: &Graph) -> Instance {
    let k = graph.vertices();
    let subfiles = (0..k).map(|v| Subfile::new(v, graph.neighbors(v), 1).expect("no self-loops")).collect();
    Instance::new(k, subfiles).expect("one subfile per vertex")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::baselines::{gccm, gcm, uncoded};
    use crate::model::{is_feasible, Packet};

    #[test]
    fn candidates_enumerate_every_subfile_once() {
        for k in 1..=5 {
            let n = candidate_count(k);
            let seen: BTreeSet<(usize, u64)> = (0..n)
                .map(|c| {
                    let (o, a) = candidate(k, c);
                    assert!(!a.contains(o) && a.is_subset_of(UserSet::full(k)));
                    (o, a.bits())
                })
                .collect();
            assert_eq!(seen.len() as u128, n);
        }
    }

    #[test]
    fn full_tau_gives_every_subfile() {
        let cfg = ExperimentConfig { tau: 12, ..ExperimentConfig::new(3, 12, 7) };
        let inst = random_instance(&cfg).unwrap();
        assert_eq!(inst.len(), 12);
        assert!(inst.subfiles().iter().all(|s| (1..=1000).contains(&s.size())));
    }

    #[test]
    fn same_seed_same_instance() {
        let cfg = ExperimentConfig::new(6, 40, 99);
        assert_eq!(random_instance_sample(&cfg, 3).unwrap(), random_instance_sample(&cfg, 3).unwrap());
        assert_ne!(random_instance_sample(&cfg, 3).unwrap(), random_instance_sample(&cfg, 4).unwrap());
    }

    #[test]
    fn config_validation() {
        assert!(ExperimentConfig::new(3, 2, 0).validate().is_err());
        assert!(ExperimentConfig::new(3, 13, 0).validate().is_err());
        assert!(ExperimentConfig { size_min: 0, ..ExperimentConfig::new(3, 5, 0) }.validate().is_err());
        assert!(ExperimentConfig { size_min: 5, size_max: 4, ..ExperimentConfig::new(3, 5, 0) }.validate().is_err());
        assert!(ExperimentConfig::new(0, 1, 0).validate().is_err());
        assert!(ExperimentConfig::new(63, 63, 0).validate().is_ok());
    }

    #[test]
    fn large_user_counts_sample() {
        let inst = random_instance(&ExperimentConfig::new(63, 100, 1)).unwrap();
        assert_eq!(inst.len(), 100);
    }

    #[test]
    fn uniform_marginals() {
        let draws = 10_000;
        let mut counts = [0u32; 12];
        for i in 0..draws {
            let inst = random_instance_sample(&ExperimentConfig::new(3, 4, 2024), i).unwrap();
            for s in inst.subfiles() {
                let rest = s.cache_set().bits();
                let low = rest & ((1 << s.owner()) - 1);
                let high = rest >> (s.owner() + 1) << s.owner();
                counts[s.owner() * 4 + (low | high) as usize] += 1;
            }
        }
        for c in counts {
            let freq = c as f64 / draws as f64;
            assert!((freq - 4.0 / 12.0).abs() <= 0.02, "frequency {freq}");
        }
    }

    #[test]
    fn adversarial_uncoded_shape() {
        let inst = adversarial_uncoded(3, 10).unwrap();
        assert_eq!(inst.len(), 3);
        assert!(inst.subfiles().iter().all(|s| s.size() == 10 && s.cache_set().len() == 2));
        assert_eq!(uncoded(&inst).total_bits, 30);
        let pair = adversarial_uncoded(2, 5).unwrap();
        assert!(is_feasible(&Packet::new(pair.subfiles().to_vec()).unwrap()));
    }

    #[test]
    fn adversarial_gcm_shape() {
        let inst = adversarial_gcm(5, 100, 1).unwrap();
        let big: Vec<_> = inst.subfiles().iter().filter(|s| s.size() == 100).map(|s| s.id()).collect();
        assert_eq!(
            big,
            vec![
                Subfile::of(0, &[1, 2, 3, 4], 1).id(),
                Subfile::of(1, &[0, 2, 3], 1).id(),
                Subfile::of(2, &[0, 1], 1).id(),
            ]
        );
        assert_eq!(gcm(&inst).total_bits, 300);
        for k in 3..=20 {
            let inst = adversarial_gcm(k, 10, 1).unwrap();
            let w1: Vec<Subfile> = inst.subfiles().iter().filter(|s| s.size() == 10).copied().collect();
            assert_eq!(w1.len(), k.div_ceil(2));
            assert!(is_feasible(&Packet::new(w1).unwrap()), "K={k}");
        }
    }

    #[test]
    fn adversarial_gccm_order_costs_k_b() {
        let (inst, order) = adversarial_gccm(6, 1000, 1).unwrap();
        assert_eq!(inst.len(), 12);
        assert_eq!(gccm(&inst, &order).unwrap().total_bits, 6000);
    }

    #[test]
    fn family_preconditions() {
        assert!(adversarial_uncoded(1, 5).is_err());
        assert!(adversarial_gcm(2, 5, 1).is_err());
        assert!(adversarial_gcm(4, 5, 5).is_err());
        assert!(adversarial_gccm(3, 5, 0).is_err());
    }

    #[test]
    fn graph_reduction() {
        let path = Graph::from_edges(3, &[(0, 1), (1, 2)]).unwrap();
        let inst = from_graph(&path);
        assert_eq!(inst.subfiles()[1].cache_set(), UserSet::from_users([0, 2]));
        assert!(Graph::from_edges(3, &[(1, 1)]).is_err());
        assert!(Graph::from_edges(3, &[(0, 3)]).is_err());
        let json = path.to_json();
        assert_eq!(Graph::from_json(&json).unwrap(), path);
        assert!(Graph::from_json(r#"{"vertices": 2, "edges": [[0, 1]]}"#).is_err());
    }
}
