//! Exact minimum-bit clique cover for small instances.
//!
//! The problem is a weighted set cover: rows are subfiles, columns are cliques
//! weighted by their largest member. Columns come from full clique
//! enumeration, dominated columns are dropped, and a depth-first
//! branch-and-bound finishes the job. The search branches on the
//! lowest-index uncovered subfile, tries covering columns by ascending cost,
//! and starts from the SACM schedule as incumbent.

use crate::bitset::ElementSet;
use crate::clique_space::{enumerate_all_cliques_with, DEFAULT_CLIQUE_CAP};
use crate::error::{Error, Result};
use crate::exec::Exec;
use crate::model::{Instance, Packet, Schedule, Subfile};
use crate::sacm::sacm;

pub const DEFAULT_NODE_BUDGET: u64 = 20_000_000;

#[derive(Clone, Debug)]
pub struct CoverColumn {
    pub packet: Packet,
    pub cost: u64,
    /// Rows this column covers.
    pub cover: ElementSet,
}

#[derive(Clone, Debug)]
pub struct CoverProblem {
    num_users: usize,
    elements: Vec<Subfile>,
    columns: Vec<CoverColumn>,
    enumerated: usize,
}

impl CoverProblem {
    /// Rows, in canonical subfile order.
    pub fn elements(&self) -> &[Subfile] {
        &self.elements
    }

    /// Columns left after dominance pruning, in enumeration order.
    pub fn columns(&self) -> &[CoverColumn] {
        &self.columns
    }

    /// Number of cliques before pruning.
    pub fn enumerated_columns(&self) -> usize {
        self.enumerated
    }

    pub fn num_users(&self) -> usize {
        self.num_users
    }
}

pub fn build_cover_problem(instance: &Instance) -> Result<CoverProblem> {
    build_cover_problem_with(instance, DEFAULT_CLIQUE_CAP, Exec::default())
}

pub fn build_cover_problem_with(instance: &Instance, cap: u64, exec: Exec) -> Result<CoverProblem> {
    let family = enumerate_all_cliques_with(instance.subfiles(), cap, exec)?;
    let n = instance.len();
    let all: Vec<CoverColumn> = family
        .iter()
        .map(|p| CoverColumn {
            packet: p.clone(),
            cost: p.cost(),
            cover: ElementSet::from_indices(
                n,
                p.members().iter().map(|m| instance.position(m.id()).expect("member of instance")),
            ),
        })
        .collect();
    let enumerated = all.len();

    // Distinct cliques have distinct covers, so a column is dominated exactly
    // when some strict superset column costs no more. Dominance chains end at
    // undominated columns, so at least one optimal cover survives.
    let lens: Vec<usize> = all.iter().map(|c| c.cover.len()).collect();
    let keep = exec.map_indexed(all.len(), |s| {
        !all.iter().enumerate().any(|(t, other)| {
            t != s && lens[t] > lens[s] && other.cost <= all[s].cost && all[s].cover.is_subset_of(&other.cover)
        })
    });
    let columns = all.into_iter().zip(keep).filter(|(_, k)| *k).map(|(c, _)| c).collect();
    Ok(CoverProblem { num_users: instance.num_users(), elements: instance.subfiles().to_vec(), columns, enumerated })
}

/// Result of the exact search.
#[derive(Clone, Debug)]
pub struct ExactOutcome {
    pub schedule: Schedule,
    /// False when the node budget ran out; the schedule is then the best found.
    pub optimal: bool,
    pub nodes: u64,
}

pub fn solve_exact(problem: &CoverProblem) -> Result<ExactOutcome> {
    solve_exact_with(problem, DEFAULT_NODE_BUDGET)
}

/// Enumerate, prune and solve in one call.
pub fn solve_instance(instance: &Instance) -> Result<ExactOutcome> {
    solve_exact(&build_cover_problem(instance)?)
}

/// Lower bound on the cost of covering all rows: every row pays at least the
/// cheapest per-row price `cost / |cover|` among the columns containing it.
pub fn root_lower_bound(problem: &CoverProblem) -> f64 {
    let all = ElementSet::full(problem.elements.len());
    let search = Search::new(problem, u64::MAX, 0);
    search.lower_bound(&all)
}

pub fn solve_exact_with(problem: &CoverProblem, node_budget: u64) -> Result<ExactOutcome> {
    if problem.elements.is_empty() {
        return Err(Error::EmptyInput);
    }
    let instance = Instance::new(problem.num_users, problem.elements.clone())?;
    let incumbent = sacm(&instance);

    let mut search = Search::new(problem, node_budget, incumbent.total_bits);
    let all = ElementSet::full(problem.elements.len());
    search.dfs(&all, 0);

    let schedule = match search.best {
        Some(cols) => Schedule::from_packets(cols.into_iter().map(|c| problem.columns[c].packet.clone()).collect()),
        None => incumbent,
    };
    Ok(ExactOutcome { schedule, optimal: !search.exhausted, nodes: search.nodes })
}

struct Search<'a> {
    columns: &'a [CoverColumn],
    by_element: Vec<Vec<usize>>,
    budget: u64,
    nodes: u64,
    exhausted: bool,
    best_cost: u64,
    best: Option<Vec<usize>>,
    chosen: Vec<usize>,
    overlap: Vec<usize>,
}

impl<'a> Search<'a> {
    fn new(problem: &'a CoverProblem, budget: u64, incumbent_cost: u64) -> Self {
        let mut by_element = vec![Vec::new(); problem.elements.len()];
        for (c, col) in problem.columns.iter().enumerate() {
            for e in col.cover.iter() {
                by_element[e].push(c);
            }
        }
        for list in &mut by_element {
            list.sort_by_key(|&c| (problem.columns[c].cost, c));
        }
        Search {
            columns: &problem.columns,
            by_element,
            budget,
            nodes: 0,
            exhausted: false,
            best_cost: incumbent_cost,
            best: None,
            chosen: Vec::new(),
            overlap: vec![0; problem.columns.len()],
        }
    }

    fn lower_bound(&self, uncovered: &ElementSet) -> f64 {
        let overlap: Vec<usize> = self.columns.iter().map(|c| c.cover.intersection_len(uncovered)).collect();
        self.bound_with(uncovered, &overlap)
    }

    fn bound_with(&self, uncovered: &ElementSet, overlap: &[usize]) -> f64 {
        uncovered
            .iter()
            .map(|e| {
                self.by_element[e]
                    .iter()
                    .map(|&c| self.columns[c].cost as f64 / overlap[c] as f64)
                    .fold(f64::INFINITY, f64::min)
            })
            .sum()
    }

    fn dfs(&mut self, uncovered: &ElementSet, cost: u64) {
        if self.exhausted {
            return;
        }
        self.nodes += 1;
        if self.nodes > self.budget {
            self.exhausted = true;
            return;
        }
        let Some(e) = uncovered.first() else {
            if cost < self.best_cost {
                self.best_cost = cost;
                self.best = Some(self.chosen.clone());
            }
            return;
        };

        for (c, col) in self.columns.iter().enumerate() {
            self.overlap[c] = col.cover.intersection_len(uncovered);
        }
        let lb = self.bound_with(uncovered, &self.overlap);
        // Costs are integers: a subtree whose bound exceeds best - 1 cannot
        // contain a strictly cheaper cover. The margin absorbs rounding.
        if cost as f64 + lb > self.best_cost as f64 - 1.0 + 1e-6 {
            return;
        }

        let candidates = self.by_element[e].clone();
        for c in candidates {
            let next_cost = cost + self.columns[c].cost;
            if next_cost >= self.best_cost {
                break;
            }
            let mut rest = uncovered.clone();
            rest.remove_all(&self.columns[c].cover);
            self.chosen.push(c);
            self.dfs(&rest, next_cost);
            self.chosen.pop();
            if self.exhausted {
                return;
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::tests::example_one;
    use crate::model::{validate_schedule, UserSet};

    #[test]
    fn example_one_optimum_is_370() {
        let inst = example_one();
        let problem = build_cover_problem(&inst).unwrap();
        assert_eq!(problem.elements().len(), 12);
        assert_eq!(problem.enumerated_columns(), 25);
        assert!(problem.columns().len() <= 25);
        let out = solve_exact(&problem).unwrap();
        assert!(out.optimal);
        assert_eq!(out.schedule.total_bits, 370);
        assert_eq!(validate_schedule(&inst, &out.schedule), Ok(()));
        assert!(root_lower_bound(&problem) <= 370.0);
    }

    #[test]
    fn single_subfile_problem() {
        let inst = Instance::new(1, vec![Subfile::of(0, &[], 8)]).unwrap();
        let problem = build_cover_problem(&inst).unwrap();
        assert_eq!(problem.columns().len(), 1);
        let out = solve_exact(&problem).unwrap();
        assert_eq!(out.schedule.total_bits, 8);
    }

    #[test]
    fn complete_side_information_costs_one_packet() {
        let k = 5;
        let subfiles = (0..k).map(|j| Subfile::new(j, UserSet::full(k).without(j), 1000).unwrap()).collect();
        let inst = Instance::new(k, subfiles).unwrap();
        assert_eq!(solve_instance(&inst).unwrap().schedule.total_bits, 1000);
    }

    #[test]
    fn tiny_budget_reports_non_optimal() {
        let inst = example_one();
        let problem = build_cover_problem(&inst).unwrap();
        let out = solve_exact_with(&problem, 1).unwrap();
        assert!(!out.optimal);
        assert_eq!(validate_schedule(&inst, &out.schedule), Ok(()));
    }

    #[test]
    fn empty_problem_is_an_error() {
        let inst = Instance::new(2, vec![]).unwrap();
        let problem = build_cover_problem(&inst).unwrap();
        assert!(matches!(solve_exact(&problem), Err(Error::EmptyInput)));
    }
}
