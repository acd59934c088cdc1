//! Discrete geometric model of a PV program.
//!
//! A state is an integer vector with one coordinate per thread. The forbidden
//! region is a union of open boxes (one per resource and choice of
//! `capacity + 1` threads with one hold interval each). Execution steps move
//! one coordinate by `+1`; a step, or a unit square spanned by two steps, is
//! admissible when no resource is over capacity anywhere in its interior.

pub(crate) mod search;

use std::fmt;
use std::ops::Deref;

use serde::{Deserialize, Serialize};

use crate::model::{HoldInterval, Program, ResourceId};

pub use search::{
    collect_dipaths, enumerate_dipaths, reachable, successors, DipathIter, Reachability,
    SearchError, SearchLimits, DEFAULT_MAX_STATES,
};

/// Integer position vector, one coordinate per thread.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct State(pub Vec<usize>);

impl State {
    /// All threads at their start.
    pub fn bottom(n: usize) -> Self {
        State(vec![0; n])
    }

    /// All threads at their end.
    pub fn top(p: &Program) -> Self {
        State(p.threads().iter().map(|t| t.top()).collect())
    }

    pub fn is_top(&self, p: &Program) -> bool {
        self.0.iter().zip(p.threads()).all(|(&x, t)| x == t.top())
    }

    pub fn in_range(&self, p: &Program) -> bool {
        self.0.len() == p.len() && self.0.iter().zip(p.threads()).all(|(&x, t)| x <= t.top())
    }

    /// Same state with coordinate `c` advanced by one.
    pub fn stepped(&self, c: usize) -> Self {
        let mut next = self.0.clone();
        next[c] += 1;
        State(next)
    }

    pub fn into_inner(self) -> Vec<usize> {
        self.0
    }
}

impl Deref for State {
    type Target = [usize];
    fn deref(&self) -> &[usize] {
        &self.0
    }
}

impl From<Vec<usize>> for State {
    fn from(v: Vec<usize>) -> Self {
        State(v)
    }
}

impl fmt::Display for State {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, x) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{x}")?;
        }
        write!(f, ")")
    }
}

/// Monotone lattice path starting at the bottom state, stored as the
/// sequence of coordinates stepped.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct LatticePath {
    dims: usize,
    steps: Vec<usize>,
}

impl LatticePath {
    pub fn new(dims: usize, steps: Vec<usize>) -> Self {
        debug_assert!(steps.iter().all(|&c| c < dims));
        Self { dims, steps }
    }

    pub fn empty(dims: usize) -> Self {
        Self::new(dims, Vec::new())
    }

    /// Path through the given states; `None` unless they start at the bottom
    /// and each step advances exactly one coordinate by one.
    pub fn from_states(states: &[State]) -> Option<Self> {
        let first = states.first()?;
        if first.iter().any(|&x| x != 0) {
            return None;
        }
        let dims = first.len();
        let mut steps = Vec::with_capacity(states.len().saturating_sub(1));
        for w in states.windows(2) {
            let (a, b) = (&w[0], &w[1]);
            if a.len() != dims || b.len() != dims {
                return None;
            }
            let mut moved = None;
            for c in 0..dims {
                match b[c] as isize - a[c] as isize {
                    0 => {}
                    1 if moved.is_none() => moved = Some(c),
                    _ => return None,
                }
            }
            steps.push(moved?);
        }
        Some(Self { dims, steps })
    }

    /// Serial path from the bottom to `target`, one coordinate at a time in
    /// the given order.
    pub fn serial_to(target: &State, order: &[usize]) -> Self {
        let mut steps = Vec::new();
        for &c in order {
            steps.extend(std::iter::repeat_n(c, target[c]));
        }
        Self::new(target.len(), steps)
    }

    pub fn dims(&self) -> usize {
        self.dims
    }

    pub fn steps(&self) -> &[usize] {
        &self.steps
    }

    /// Number of steps.
    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    pub fn end(&self) -> State {
        let mut x = vec![0; self.dims];
        for &c in &self.steps {
            x[c] += 1;
        }
        State(x)
    }

    /// Visited states, bottom first.
    pub fn states(&self) -> Vec<State> {
        let mut x = vec![0; self.dims];
        let mut out = Vec::with_capacity(self.steps.len() + 1);
        out.push(State(x.clone()));
        for &c in &self.steps {
            x[c] += 1;
            out.push(State(x.clone()));
        }
        out
    }

    /// Appends `other`'s steps after this path.
    pub fn then(&self, other: &LatticePath) -> Self {
        let mut steps = self.steps.clone();
        steps.extend_from_slice(&other.steps);
        Self::new(self.dims, steps)
    }

    /// Every state and every step of the path is admissible.
    pub fn is_admissible(&self, grid: &Grid) -> bool {
        let mut x = vec![0; self.dims];
        if !grid.state_admissible(&x) {
            return false;
        }
        for &c in &self.steps {
            if x[c] >= grid.top(c) || !grid.edge_admissible(&x, c) {
                return false;
            }
            x[c] += 1;
        }
        true
    }
}

/// Open box `prod_k ]a_k, b_k[` over the legs, full range elsewhere.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct ForbiddenRectangle {
    pub resource: ResourceId,
    /// Legs by ascending thread index.
    pub legs: Vec<(usize, HoldInterval)>,
}

impl ForbiddenRectangle {
    pub fn leg(&self, coord: usize) -> Option<HoldInterval> {
        self.legs.iter().find(|(c, _)| *c == coord).map(|&(_, h)| h)
    }

    pub fn contains(&self, x: &[usize]) -> bool {
        self.legs.iter().all(|&(c, h)| h.holds_at_point(x[c]))
    }
}

/// Enumerates every forbidden box of the program: for each resource, each
/// set of `capacity + 1` threads (ascending) and each choice of one hold
/// interval per chosen thread (ascending).
pub fn forbidden_rectangles(p: &Program) -> Vec<ForbiddenRectangle> {
    let mut out = Vec::new();
    for (r, _, cap) in p.caps().iter() {
        let holders: Vec<usize> = (0..p.len())
            .filter(|&i| !p.thread(i).holds(r).is_empty())
            .collect();
        let k = cap as usize + 1;
        if holders.len() < k {
            continue;
        }
        for combo in combinations(holders.len(), k) {
            let coords: Vec<usize> = combo.iter().map(|&i| holders[i]).collect();
            let sizes: Vec<usize> = coords.iter().map(|&c| p.thread(c).holds(r).len()).collect();
            let mut choice = vec![0usize; k];
            loop {
                out.push(ForbiddenRectangle {
                    resource: r,
                    legs: coords
                        .iter()
                        .zip(&choice)
                        .map(|(&c, &j)| (c, p.thread(c).holds(r)[j]))
                        .collect(),
                });
                if !advance_odometer(&mut choice, &sizes) {
                    break;
                }
            }
        }
    }
    out
}

/// Advances a mixed-radix counter, last digit fastest. Returns false after
/// the last value.
pub(crate) fn advance_odometer(digits: &mut [usize], radix: &[usize]) -> bool {
    for i in (0..digits.len()).rev() {
        digits[i] += 1;
        if digits[i] < radix[i] {
            return true;
        }
        digits[i] = 0;
    }
    false
}

/// All `k`-subsets of `0..n` in lexicographic order.
pub(crate) fn combinations(n: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    if k > n {
        return out;
    }
    let mut idx: Vec<usize> = (0..k).collect();
    loop {
        out.push(idx.clone());
        let Some(i) = (0..k).rev().find(|&i| idx[i] < n - k + i) else {
            return out;
        };
        idx[i] += 1;
        for j in i + 1..k {
            idx[j] = idx[j - 1] + 1;
        }
    }
}

/// Per-thread lookup tables for fast admissibility checks.
#[derive(Debug, Clone)]
pub struct Grid {
    caps: Vec<u32>,
    tops: Vec<usize>,
    /// `point[t][p]`: resources held at integer point `p`.
    point: Vec<Vec<Vec<usize>>>,
    /// `request[t][p]`: resource acquired by the action at `p`.
    request: Vec<Vec<Option<usize>>>,
}

impl Grid {
    pub fn new(p: &Program) -> Self {
        let caps = p.caps().iter().map(|(_, _, c)| c).collect();
        let mut tops = Vec::with_capacity(p.len());
        let mut point = Vec::with_capacity(p.len());
        let mut request = Vec::with_capacity(p.len());
        for t in p.threads() {
            tops.push(t.top());
            point.push(
                (0..=t.top())
                    .map(|pos| {
                        p.caps()
                            .ids()
                            .filter(|&r| t.holds(r).iter().any(|h| h.holds_at_point(pos)))
                            .map(|r| r.0)
                            .collect()
                    })
                    .collect(),
            );
            request.push((0..=t.top()).map(|pos| t.request_at(pos).map(|r| r.0)).collect());
        }
        Self {
            caps,
            tops,
            point,
            request,
        }
    }

    pub fn dims(&self) -> usize {
        self.tops.len()
    }

    pub fn top(&self, c: usize) -> usize {
        self.tops[c]
    }

    pub fn tops(&self) -> &[usize] {
        &self.tops
    }

    pub fn capacity(&self, r: usize) -> u32 {
        self.caps[r]
    }

    pub fn resource_count(&self) -> usize {
        self.caps.len()
    }

    /// Resources held by thread `t` at point `pos`.
    pub fn held_at(&self, t: usize, pos: usize) -> &[usize] {
        &self.point[t][pos]
    }

    /// Resource requested by thread `t` at point `pos`.
    pub fn request(&self, t: usize, pos: usize) -> Option<usize> {
        self.request[t][pos]
    }

    pub fn in_range(&self, x: &[usize]) -> bool {
        x.len() == self.tops.len() && x.iter().zip(&self.tops).all(|(&v, &t)| v <= t)
    }

    /// Summed point use per resource.
    pub fn usage(&self, x: &[usize]) -> Vec<u32> {
        let mut u = vec![0u32; self.caps.len()];
        self.add_usage(x, &mut u);
        u
    }

    pub(crate) fn add_usage(&self, x: &[usize], u: &mut [u32]) {
        for v in u.iter_mut() {
            *v = 0;
        }
        for (t, &pos) in x.iter().enumerate() {
            for &r in &self.point[t][pos] {
                u[r] += 1;
            }
        }
    }

    fn within_caps(&self, u: &[u32]) -> bool {
        u.iter().zip(&self.caps).all(|(&v, &c)| v <= c)
    }

    pub fn state_admissible(&self, x: &[usize]) -> bool {
        self.within_caps(&self.usage(x))
    }

    /// The open unit segment from `x` in direction `c` stays within capacity.
    /// Uses point use for the other coordinates and segment use for `c`.
    pub fn edge_admissible(&self, x: &[usize], c: usize) -> bool {
        if x[c] >= self.tops[c] {
            return false;
        }
        let mut u = self.usage(x);
        if let Some(r) = self.request[c][x[c]] {
            u[r] += 1;
        }
        self.within_caps(&u)
    }

    /// The open unit square spanned from `x` by directions `i` and `j` stays
    /// within capacity.
    pub fn square_admissible(&self, x: &[usize], i: usize, j: usize) -> bool {
        if i == j || x[i] >= self.tops[i] || x[j] >= self.tops[j] {
            return false;
        }
        let mut u = self.usage(x);
        for c in [i, j] {
            if let Some(r) = self.request[c][x[c]] {
                u[r] += 1;
            }
        }
        self.within_caps(&u)
    }

    /// Coordinates that can take an admissible step from `x`.
    pub fn steppable(&self, x: &[usize]) -> Vec<usize> {
        let u = self.usage(x);
        self.steppable_with(x, &u)
    }

    pub(crate) fn steppable_with(&self, x: &[usize], u: &[u32]) -> Vec<usize> {
        (0..x.len())
            .filter(|&c| self.can_step(x, u, c))
            .collect()
    }

    /// Fast step test given the precomputed usage of an admissible `x`.
    #[inline]
    pub(crate) fn can_step(&self, x: &[usize], u: &[u32], c: usize) -> bool {
        if x[c] >= self.tops[c] {
            return false;
        }
        match self.request[c][x[c]] {
            Some(r) => u[r] < self.caps[r],
            None => true,
        }
    }
}

/// Summed point use is within capacity for every resource.
pub fn state_admissible(p: &Program, s: &State) -> bool {
    Grid::new(p).state_admissible(s)
}

pub fn edge_admissible(p: &Program, s: &State, coord: usize) -> bool {
    Grid::new(p).edge_admissible(s, coord)
}

pub fn square_admissible(p: &Program, s: &State, i: usize, j: usize) -> bool {
    Grid::new(p).square_admissible(s, i, j)
}
