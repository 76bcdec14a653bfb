//! Depth-first walk over user groups `T` whose candidate lists are all nonempty.
//!
//! For a group `T` and member `j`, the candidates are the subfiles of `j` whose
//! cache set contains `T \ {j}`. Every clique over the subfiles picks exactly
//! one candidate per member of some group, and adding a user to `T` can only
//! shrink the lists, so a group with an empty list prunes its whole subtree.
//! Groups are visited in lexicographic order of their sorted member lists.

use std::ops::ControlFlow;

use crate::model::{Subfile, UserSet};

pub(crate) struct GroupWalker<'a> {
    subfiles: &'a [Subfile],
    by_owner: Vec<Vec<usize>>,
    present: Vec<usize>,
}

/// Candidate lists of a group, one per member in ascending user order.
/// Entries index the slice given to [`GroupWalker::new`].
pub(crate) type Candidates = [Vec<usize>];

impl<'a> GroupWalker<'a> {
    pub fn new(subfiles: &'a [Subfile]) -> Self {
        let span = subfiles.iter().map(|s| s.owner() + 1).max().unwrap_or(0);
        let mut by_owner = vec![Vec::new(); span];
        for (i, s) in subfiles.iter().enumerate() {
            by_owner[s.owner()].push(i);
        }
        let present = (0..span).filter(|&u| !by_owner[u].is_empty()).collect();
        GroupWalker { subfiles, by_owner, present }
    }

    /// Number of top-level branches; branch `r` covers groups whose smallest
    /// member is the `r`-th user that owns a subfile.
    pub fn roots(&self) -> usize {
        self.present.len()
    }

    #[cfg(test)]
    pub fn walk<B, F>(&self, visit: &mut F) -> ControlFlow<B>
    where
        F: FnMut(UserSet, &Candidates) -> ControlFlow<B>,
    {
        for r in 0..self.roots() {
            self.walk_root(r, visit)?;
        }
        ControlFlow::Continue(())
    }

    pub fn walk_root<B, F>(&self, root: usize, visit: &mut F) -> ControlFlow<B>
    where
        F: FnMut(UserSet, &Candidates) -> ControlFlow<B>,
    {
        let Some((group, lists)) = self.extend_by(UserSet::EMPTY, &[], self.present[root]) else {
            return ControlFlow::Continue(());
        };
        visit(group, &lists)?;
        self.descend(root + 1, group, &lists, visit)
    }

    fn descend<B, F>(&self, next: usize, group: UserSet, lists: &Candidates, visit: &mut F) -> ControlFlow<B>
    where
        F: FnMut(UserSet, &Candidates) -> ControlFlow<B>,
    {
        for pi in next..self.present.len() {
            if let Some((g, l)) = self.extend_by(group, lists, self.present[pi]) {
                visit(g, &l)?;
                self.descend(pi + 1, g, &l, visit)?;
            }
        }
        ControlFlow::Continue(())
    }

    fn extend_by(&self, group: UserSet, lists: &Candidates, user: usize) -> Option<(UserSet, Vec<Vec<usize>>)> {
        let own: Vec<usize> =
            self.by_owner[user].iter().copied().filter(|&s| group.is_subset_of(self.subfiles[s].cache_set())).collect();
        if own.is_empty() {
            return None;
        }
        let mut next = Vec::with_capacity(lists.len() + 1);
        for l in lists {
            let kept: Vec<usize> = l.iter().copied().filter(|&s| self.subfiles[s].cache_set().contains(user)).collect();
            if kept.is_empty() {
                return None;
            }
            next.push(kept);
        }
        next.push(own);
        Some((group.with(user), next))
    }
}
