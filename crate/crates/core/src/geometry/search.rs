//! Explicit-state search over the integer grid: breadth-first reachability
//! with witness paths, and exhaustive enumeration of bottom-to-top paths.

use std::collections::VecDeque;

use thiserror::Error;

use super::{Grid, LatticePath, State};
use crate::model::Program;

pub const DEFAULT_MAX_STATES: u64 = 100_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SearchLimits {
    /// Largest grid (number of integer states) a search may allocate.
    pub max_states: u64,
}

impl Default for SearchLimits {
    fn default() -> Self {
        Self {
            max_states: DEFAULT_MAX_STATES,
        }
    }
}

impl SearchLimits {
    pub fn with_max_states(max_states: u64) -> Self {
        Self { max_states }
    }

    pub(crate) fn check(&self, needed: u128) -> Result<(), SearchError> {
        if needed > self.max_states as u128 {
            Err(SearchError::StateLimit {
                needed,
                limit: self.max_states,
            })
        } else {
            Ok(())
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SearchError {
    #[error("search needs {needed} grid states, above the limit of {limit}")]
    StateLimit { needed: u128, limit: u64 },
    #[error("more than {limit} items; instance too large for exhaustive enumeration")]
    ItemLimit { limit: u64 },
    #[error("state {0} is outside the program's grid")]
    OutOfRange(State),
}

/// Mixed-radix indexing of the box `[0, upper_0] x ... x [0, upper_{n-1}]`.
#[derive(Debug, Clone)]
pub(crate) struct Indexer {
    pub radix: Vec<usize>,
    pub strides: Vec<usize>,
    pub size: usize,
}

impl Indexer {
    pub fn new(upper: &[usize], limits: &SearchLimits) -> Result<Self, SearchError> {
        let needed = upper
            .iter()
            .fold(1u128, |acc, &u| acc.saturating_mul(u as u128 + 1));
        limits.check(needed)?;
        let radix: Vec<usize> = upper.iter().map(|&u| u + 1).collect();
        let mut strides = vec![0; upper.len()];
        let mut acc = 1usize;
        for i in (0..upper.len()).rev() {
            strides[i] = acc;
            acc *= radix[i];
        }
        Ok(Self {
            radix,
            strides,
            size: needed as usize,
        })
    }

    pub fn index(&self, x: &[usize]) -> usize {
        x.iter().zip(&self.strides).map(|(&v, &s)| v * s).sum()
    }

    pub fn decode_into(&self, mut idx: usize, x: &mut [usize]) {
        for (i, slot) in x.iter_mut().enumerate() {
            *slot = idx / self.strides[i];
            idx %= self.strides[i];
        }
    }

    pub fn contains(&self, x: &[usize]) -> bool {
        x.len() == self.radix.len() && x.iter().zip(&self.radix).all(|(&v, &r)| v < r)
    }
}

const UNSEEN: u16 = 0;
const ROOT: u16 = u16::MAX;

/// Forward breadth-first exploration from the bottom state, restricted to
/// states below an upper bound. Successors are expanded in ascending
/// coordinate order, so witness paths are reproducible.
#[derive(Debug, Clone)]
pub struct Reachability {
    indexer: Indexer,
    /// `UNSEEN`, `ROOT`, or `coord + 1` of the step that first reached it.
    parent: Vec<u16>,
    visited: usize,
}

impl Reachability {
    pub fn explore(grid: &Grid, upper: &[usize], limits: &SearchLimits) -> Result<Self, SearchError> {
        let n = grid.dims();
        assert_eq!(upper.len(), n, "bound has wrong dimension");
        assert!(n < ROOT as usize - 1, "too many threads");
        let upper: Vec<usize> = upper
            .iter()
            .zip(grid.tops())
            .map(|(&u, &t)| u.min(t))
            .collect();
        let indexer = Indexer::new(&upper, limits)?;
        let mut parent = vec![UNSEEN; indexer.size];
        let mut queue = VecDeque::new();
        parent[0] = ROOT;
        queue.push_back(0usize);
        let mut visited = 1;
        let mut x = vec![0usize; n];
        let mut usage = vec![0u32; grid.resource_count()];
        while let Some(idx) = queue.pop_front() {
            indexer.decode_into(idx, &mut x);
            grid.add_usage(&x, &mut usage);
            for c in 0..n {
                if x[c] < upper[c] && grid.can_step(&x, &usage, c) {
                    let next = idx + indexer.strides[c];
                    if parent[next] == UNSEEN {
                        parent[next] = c as u16 + 1;
                        visited += 1;
                        queue.push_back(next);
                    }
                }
            }
        }
        Ok(Self {
            indexer,
            parent,
            visited,
        })
    }

    /// Explores the whole grid.
    pub fn full(grid: &Grid, limits: &SearchLimits) -> Result<Self, SearchError> {
        Self::explore(grid, grid.tops(), limits)
    }

    pub fn contains(&self, x: &[usize]) -> bool {
        self.indexer.contains(x) && self.parent[self.indexer.index(x)] != UNSEEN
    }

    /// Number of reached states.
    pub fn visited(&self) -> usize {
        self.visited
    }

    /// Witness path from the bottom to `x`, following first-discovery parents.
    pub fn path_to(&self, x: &[usize]) -> Option<LatticePath> {
        if !self.contains(x) {
            return None;
        }
        let mut idx = self.indexer.index(x);
        let mut steps = Vec::new();
        loop {
            match self.parent[idx] {
                ROOT => break,
                UNSEEN => unreachable!("parent chain leaves the reached set"),
                c => {
                    let c = c as usize - 1;
                    steps.push(c);
                    idx -= self.indexer.strides[c];
                }
            }
        }
        steps.reverse();
        Some(LatticePath::new(x.len(), steps))
    }

    /// All reached states in ascending index (lexicographic) order.
    pub fn states(&self) -> impl Iterator<Item = State> + '_ {
        let n = self.indexer.radix.len();
        self.parent
            .iter()
            .enumerate()
            .filter(|(_, &p)| p != UNSEEN)
            .map(move |(idx, _)| {
                let mut x = vec![0; n];
                self.indexer.decode_into(idx, &mut x);
                State(x)
            })
    }
}

/// Admissible single steps from `s`, paired with the resulting state.
pub fn successors(p: &Program, s: &State) -> Vec<(usize, State)> {
    let grid = Grid::new(p);
    (0..s.len())
        .filter(|&c| grid.edge_admissible(s, c))
        .map(|c| (c, s.stepped(c)))
        .collect()
}

/// Witness path from the bottom to `target` through admissible states and
/// steps, or `None` when `target` is unreachable.
pub fn reachable(
    p: &Program,
    target: &State,
    limits: &SearchLimits,
) -> Result<Option<LatticePath>, SearchError> {
    if !target.in_range(p) {
        return Err(SearchError::OutOfRange(target.clone()));
    }
    let grid = Grid::new(p);
    let reach = Reachability::explore(&grid, target, limits)?;
    Ok(reach.path_to(target))
}

/// States that are both reachable from the bottom and can still reach the top.
pub(crate) fn live_states(grid: &Grid, limits: &SearchLimits) -> Result<(Indexer, Vec<bool>), SearchError> {
    let n = grid.dims();
    let indexer = Indexer::new(grid.tops(), limits)?;
    let mut reach = vec![false; indexer.size];
    let mut x = vec![0usize; n];
    let mut usage = vec![0u32; grid.resource_count()];
    reach[0] = true;
    // steps only increase the index, so one ascending sweep suffices
    for idx in 0..indexer.size {
        if !reach[idx] {
            continue;
        }
        indexer.decode_into(idx, &mut x);
        grid.add_usage(&x, &mut usage);
        for c in 0..n {
            if grid.can_step(&x, &usage, c) {
                reach[idx + indexer.strides[c]] = true;
            }
        }
    }
    let top = indexer.size - 1;
    let mut live = vec![false; indexer.size];
    live[top] = reach[top];
    for idx in (0..top).rev() {
        if !reach[idx] {
            continue;
        }
        indexer.decode_into(idx, &mut x);
        grid.add_usage(&x, &mut usage);
        live[idx] = (0..n).any(|c| grid.can_step(&x, &usage, c) && live[idx + indexer.strides[c]]);
    }
    Ok((indexer, live))
}

/// Depth-first enumeration of all bottom-to-top paths in lexicographic order
/// of their step sequences. Yields an error instead of the `limit + 1`-th path.
pub struct DipathIter {
    grid: Grid,
    indexer: Indexer,
    live: Vec<bool>,
    x: Vec<usize>,
    usage: Vec<u32>,
    idx: usize,
    steps: Vec<usize>,
    /// Next coordinate to try at each depth.
    stack: Vec<usize>,
    yielded: u64,
    limit: u64,
    done: bool,
}

impl Iterator for DipathIter {
    type Item = Result<LatticePath, SearchError>;

    fn next(&mut self) -> Option<Self::Item> {
        if self.done {
            return None;
        }
        let n = self.x.len();
        let top = self.indexer.size - 1;
        loop {
            let Some(&from) = self.stack.last() else {
                self.done = true;
                return None;
            };
            self.grid.add_usage(&self.x, &mut self.usage);
            let found = (from..n).find(|&c| {
                self.grid.can_step(&self.x, &self.usage, c)
                    && self.live[self.idx + self.indexer.strides[c]]
            });
            match found {
                Some(c) => {
                    *self.stack.last_mut().unwrap() = c + 1;
                    self.x[c] += 1;
                    self.idx += self.indexer.strides[c];
                    self.steps.push(c);
                    if self.idx == top {
                        let path = LatticePath::new(n, self.steps.clone());
                        self.steps.pop();
                        self.x[c] -= 1;
                        self.idx -= self.indexer.strides[c];
                        self.yielded += 1;
                        if self.yielded > self.limit {
                            self.done = true;
                            return Some(Err(SearchError::ItemLimit { limit: self.limit }));
                        }
                        return Some(Ok(path));
                    }
                    self.stack.push(0);
                }
                None => {
                    self.stack.pop();
                    if let Some(c) = self.steps.pop() {
                        self.x[c] -= 1;
                        self.idx -= self.indexer.strides[c];
                    }
                }
            }
        }
    }
}

/// All admissible bottom-to-top lattice paths, at most `limit` of them.
pub fn enumerate_dipaths(
    p: &Program,
    limit: u64,
    limits: &SearchLimits,
) -> Result<DipathIter, SearchError> {
    let grid = Grid::new(p);
    let (indexer, live) = live_states(&grid, limits)?;
    let n = grid.dims();
    let has_any = live[0];
    let usage = vec![0; grid.resource_count()];
    Ok(DipathIter {
        grid,
        indexer,
        live,
        x: vec![0; n],
        usage,
        idx: 0,
        steps: Vec::new(),
        stack: if has_any { vec![0] } else { Vec::new() },
        yielded: 0,
        limit,
        done: !has_any,
    })
}

/// Collects [`enumerate_dipaths`] into a vector.
pub fn collect_dipaths(
    p: &Program,
    limit: u64,
    limits: &SearchLimits,
) -> Result<Vec<LatticePath>, SearchError> {
    enumerate_dipaths(p, limit, limits)?.collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parse::parse_source;

    fn program(src: &str, name: &str) -> Program {
        parse_source(src).unwrap().program(name).unwrap()
    }

    const EX3: &str = "resource a cap 1\nresource b cap 1\nthread T1 = Pa Pb Vb Va\nthread T2 = Pb Pa Va Vb\nprogram m = T1 | T2\n";
    const FIG2: &str = "resource a cap 1\nresource b cap 1\nresource c cap 1\nthread T = Pa Pb Va Pc Vb Pa Vc Va\nprogram m3 = T^3\n";

    #[test]
    fn deadlock_state_has_no_successors() {
        let p = program(EX3, "m");
        assert!(successors(&p, &State(vec![2, 2])).is_empty());
        assert_eq!(successors(&p, &State(vec![0, 0])).len(), 2);
        assert!(successors(&p, &State::top(&p)).is_empty());
    }

    #[test]
    fn witness_path_is_reproducible() {
        let p = program(EX3, "m");
        let path = reachable(&p, &State(vec![2, 2]), &SearchLimits::default())
            .unwrap()
            .unwrap();
        let states: Vec<Vec<usize>> = path.states().into_iter().map(State::into_inner).collect();
        assert_eq!(
            states,
            vec![vec![0, 0], vec![1, 0], vec![2, 0], vec![2, 1], vec![2, 2]]
        );
    }

    #[test]
    fn bottom_is_reached_by_the_empty_path() {
        let p = program(EX3, "m");
        let path = reachable(&p, &State(vec![0, 0]), &SearchLimits::default())
            .unwrap()
            .unwrap();
        assert!(path.is_empty());
    }

    #[test]
    fn three_thread_deadlock_is_reachable() {
        let p = program(FIG2, "m3");
        let grid = Grid::new(&p);
        let path = reachable(&p, &State(vec![6, 2, 4]), &SearchLimits::default())
            .unwrap()
            .unwrap();
        assert!(path.is_admissible(&grid));
        assert_eq!(path.end(), State(vec![6, 2, 4]));

        // the piecewise serial route given as a witness is admissible
        let serial = LatticePath::serial_to(&State(vec![6, 2, 4]), &[0, 2, 1]);
        assert!(serial.is_admissible(&grid));
        // while the other order overloads `a` at (2,2,0)
        let bad = LatticePath::serial_to(&State(vec![6, 2, 4]), &[1, 0, 2]);
        assert!(!bad.is_admissible(&grid));
    }

    #[test]
    fn out_of_range_target() {
        let p = program(EX3, "m");
        assert!(matches!(
            reachable(&p, &State(vec![9, 0]), &SearchLimits::default()),
            Err(SearchError::OutOfRange(_))
        ));
    }

    #[test]
    fn state_limit_is_enforced() {
        let p = program(FIG2, "m3");
        let err = reachable(&p, &State(vec![6, 2, 4]), &SearchLimits::with_max_states(10)).unwrap_err();
        assert_eq!(
            err,
            SearchError::StateLimit {
                needed: 7 * 3 * 5,
                limit: 10
            }
        );
    }

    #[test]
    fn single_thread_has_one_path() {
        let p = program("resource a cap 1\nthread T = Pa Va\nprogram m = T", "m");
        let paths = collect_dipaths(&p, 10, &SearchLimits::default()).unwrap();
        assert_eq!(paths, vec![LatticePath::new(1, vec![0, 0, 0])]);
    }

    #[test]
    fn mutex_paths_avoid_the_forbidden_square() {
        let p = program("resource a cap 1\nthread T = Pa Va\nprogram m = T^2", "m");
        let grid = Grid::new(&p);
        let paths = collect_dipaths(&p, 1000, &SearchLimits::default()).unwrap();
        // the forbidden box ]1,2[^2 contains no grid point or unit edge, so
        // all C(6,3) monotone paths are admissible; it only blocks one square
        assert_eq!(paths.len(), 20);
        for path in &paths {
            assert!(path.is_admissible(&grid));
            for w in path.states().windows(2) {
                assert!(w[1].iter().zip(w[0].iter()).all(|(b, a)| b >= a));
            }
        }
        let mut sorted = paths.clone();
        sorted.sort();
        assert_eq!(sorted, paths, "enumeration is lexicographic");
    }

    #[test]
    fn enumeration_limit_signals_overflow() {
        let p = program("resource a cap 2\nthread T = Pa Va\nprogram m = T^2", "m");
        let res = collect_dipaths(&p, 5, &SearchLimits::default());
        assert_eq!(res, Err(SearchError::ItemLimit { limit: 5 }));
    }

    #[test]
    fn enumerated_paths_stop_short_of_deadlock() {
        let p = program(EX3, "m");
        let paths = collect_dipaths(&p, 1_000_000, &SearchLimits::default()).unwrap();
        assert!(!paths.is_empty());
        for path in &paths {
            assert!(!path.states().contains(&State(vec![2, 2])));
        }
    }
}
