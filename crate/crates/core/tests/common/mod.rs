//! Brute-force oracles shared by the integration tests. None of them call into
//! the clique enumeration, set cover or search code they check.

#![allow(dead_code)]

use proptest::prelude::*;
use sacm::generators::Graph;
use sacm::{Instance, Subfile, UserSet};

/// Side-information edge written directly from raw bitmasks.
pub fn adjacent(a: &Subfile, b: &Subfile) -> bool {
    let (ka, kb) = (a.owner(), b.owner());
    ka != kb && b.cache_set().bits() >> ka & 1 == 1 && a.cache_set().bits() >> kb & 1 == 1
}

/// Adjacency matrix of the side-information graph.
pub fn adjacency(subfiles: &[Subfile]) -> Vec<Vec<bool>> {
    subfiles.iter().map(|a| subfiles.iter().map(|b| adjacent(a, b)).collect()).collect()
}

/// Every clique (as ascending index lists) by extending in index order.
pub fn all_cliques(subfiles: &[Subfile]) -> Vec<Vec<usize>> {
    let adj = adjacency(subfiles);
    let mut out = Vec::new();
    let mut stack = Vec::new();
    fn extend(adj: &[Vec<bool>], from: usize, stack: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        for v in from..adj.len() {
            if stack.iter().all(|&u| adj[u][v]) {
                stack.push(v);
                out.push(stack.clone());
                extend(adj, v + 1, stack, out);
                stack.pop();
            }
        }
    }
    extend(&adj, 0, &mut stack, &mut out);
    out
}

/// Minimum total bits over all clique covers, by dynamic programming over
/// covered-subfile masks. Practical for up to about 16 subfiles.
pub fn optimal_cover_bits(instance: &Instance) -> u64 {
    let subs = instance.subfiles();
    let n = subs.len();
    assert!(n <= 20, "oracle limited to 20 subfiles");
    let cliques: Vec<(u32, u64)> = all_cliques(subs)
        .into_iter()
        .map(|c| (c.iter().fold(0u32, |m, &i| m | 1 << i), c.iter().map(|&i| subs[i].size()).max().unwrap()))
        .collect();
    let full = (1u32 << n) - 1;
    // best[m] = cheapest way to cover the complement of m.
    let mut best = vec![u64::MAX; 1 << n];
    best[full as usize] = 0;
    for m in (0..full).rev() {
        let first = (!m).trailing_zeros();
        let mut b = u64::MAX;
        for &(mask, cost) in &cliques {
            if mask >> first & 1 == 1 {
                let rest = best[(m | mask) as usize];
                if rest != u64::MAX {
                    b = b.min(rest + cost);
                }
            }
        }
        best[m as usize] = b;
    }
    best[0]
}

/// Minimum number of cliques partitioning the vertex set.
pub fn clique_cover_number(graph: &Graph) -> usize {
    let n = graph.vertices();
    let is_clique = |mask: usize| {
        (0..n).all(|a| mask >> a & 1 == 0 || (a + 1..n).all(|b| mask >> b & 1 == 0 || graph.has_edge(a, b)))
    };
    let cliques: Vec<usize> = (1..1usize << n).filter(|&m| is_clique(m)).collect();
    let mut best = vec![usize::MAX; 1 << n];
    best[0] = 0;
    for m in 1..1usize << n {
        let low = m & m.wrapping_neg();
        for &c in &cliques {
            if c & low != 0 && c & !m == 0 && best[m & !c] != usize::MAX {
                best[m] = best[m].min(best[m & !c] + 1);
            }
        }
    }
    best[(1 << n) - 1]
}

/// Random instance with `num_users` users, a random subset of all possible
/// subfiles and sizes in `1..=max_size`.
pub fn instance_strategy(users: std::ops::RangeInclusive<usize>, max_size: u64) -> impl Strategy<Value = Instance> {
    users.prop_flat_map(move |k| {
        let n = k << (k - 1);
        proptest::collection::vec(proptest::option::weighted(0.6, 1..=max_size), n).prop_filter_map(
            "at least one subfile",
            move |sizes| {
                let subfiles: Vec<Subfile> = sizes
                    .iter()
                    .enumerate()
                    .filter_map(|(c, s)| s.map(|size| (c, size)))
                    .map(|(c, size)| {
                        let owner = c >> (k - 1);
                        let rest = (c & ((1 << (k - 1)) - 1)) as u64;
                        let low = rest & ((1 << owner) - 1);
                        let high = (rest >> owner) << (owner + 1);
                        Subfile::new(owner, UserSet::from_bits(low | high), size).unwrap()
                    })
                    .collect();
                (!subfiles.is_empty()).then(|| Instance::new(k, subfiles).unwrap())
            },
        )
    })
}

/// Instance restricted to a random subset of its subfiles.
pub fn sub_instance(instance: &Instance, keep: &[bool]) -> Option<Instance> {
    let subs: Vec<Subfile> =
        instance.subfiles().iter().zip(keep.iter().cycle()).filter(|(_, &k)| k).map(|(s, _)| *s).collect();
    (!subs.is_empty()).then(|| Instance::new(instance.num_users(), subs).unwrap())
}
