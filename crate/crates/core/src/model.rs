//! PV threads and programs: resources with capacities, acquire/release
//! actions, validity, and the per-position resource-use functions.
//!
//! Positions follow the usual convention: action `w_i` sits at position `i`
//! (1-based), position `0` is the start of the thread and `l + 1` its end.
//! A hold interval `(acquire, release)` means the resource is held strictly
//! between the two positions, so a thread sitting at an acquire position has
//! requested but not yet obtained the resource.

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Index of a resource inside a [`CapacityMap`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct ResourceId(pub usize);

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CapacityError {
    #[error("resource name must not be empty")]
    EmptyName,
    #[error("resource `{0}` declared twice")]
    Duplicate(String),
    #[error("resource `{name}` has capacity {cap}; capacities must be at least 1")]
    ZeroCapacity { name: String, cap: u32 },
}

/// Named resources with positive capacities, in declaration order.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct CapacityMap {
    names: Vec<String>,
    caps: Vec<u32>,
}

impl CapacityMap {
    pub fn new() -> Self {
        Self::default()
    }

    /// Builds a map from `(name, capacity)` pairs.
    pub fn from_pairs<'a, I>(pairs: I) -> Result<Self, CapacityError>
    where
        I: IntoIterator<Item = (&'a str, u32)>,
    {
        let mut map = Self::new();
        for (name, cap) in pairs {
            map.insert(name, cap)?;
        }
        Ok(map)
    }

    pub fn insert(&mut self, name: &str, cap: u32) -> Result<ResourceId, CapacityError> {
        if name.is_empty() {
            return Err(CapacityError::EmptyName);
        }
        if self.lookup(name).is_some() {
            return Err(CapacityError::Duplicate(name.to_string()));
        }
        if cap == 0 {
            return Err(CapacityError::ZeroCapacity {
                name: name.to_string(),
                cap,
            });
        }
        self.names.push(name.to_string());
        self.caps.push(cap);
        Ok(ResourceId(self.names.len() - 1))
    }

    pub fn lookup(&self, name: &str) -> Option<ResourceId> {
        self.names.iter().position(|n| n == name).map(ResourceId)
    }

    pub fn capacity(&self, r: ResourceId) -> u32 {
        self.caps[r.0]
    }

    pub fn name(&self, r: ResourceId) -> &str {
        &self.names[r.0]
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn ids(&self) -> impl Iterator<Item = ResourceId> + '_ {
        (0..self.names.len()).map(ResourceId)
    }

    pub fn iter(&self) -> impl Iterator<Item = (ResourceId, &str, u32)> + '_ {
        self.names
            .iter()
            .zip(&self.caps)
            .enumerate()
            .map(|(i, (n, &c))| (ResourceId(i), n.as_str(), c))
    }

    /// Sum of all capacities.
    pub fn total(&self) -> usize {
        self.caps.iter().map(|&c| c as usize).sum()
    }

    /// Sum of capacities over a subset of resources.
    pub fn total_of(&self, used: impl IntoIterator<Item = ResourceId>) -> usize {
        used.into_iter().map(|r| self.caps[r.0] as usize).sum()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ActionKind {
    Acquire,
    Release,
}

/// A single `P` (acquire) or `V` (release) action.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Action {
    pub kind: ActionKind,
    pub resource: ResourceId,
}

impl Action {
    pub fn acquire(resource: ResourceId) -> Self {
        Self {
            kind: ActionKind::Acquire,
            resource,
        }
    }

    pub fn release(resource: ResourceId) -> Self {
        Self {
            kind: ActionKind::Release,
            resource,
        }
    }

    pub fn is_acquire(&self) -> bool {
        self.kind == ActionKind::Acquire
    }

    /// Mnemonic such as `Pa` or `Vb`.
    pub fn mnemonic(&self, caps: &CapacityMap) -> String {
        let letter = match self.kind {
            ActionKind::Acquire => 'P',
            ActionKind::Release => 'V',
        };
        format!("{letter}{}", caps.name(self.resource))
    }
}

/// Open interval `]acquire, release[` on which a thread holds a resource.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct HoldInterval {
    pub acquire: usize,
    pub release: usize,
}

impl HoldInterval {
    pub fn new(acquire: usize, release: usize) -> Self {
        Self { acquire, release }
    }

    /// Held at the integer point `p` (open interval rule).
    pub fn holds_at_point(&self, p: usize) -> bool {
        self.acquire < p && p < self.release
    }

    /// Held along the unit segment `]p, p+1[`.
    pub fn holds_on_segment(&self, p: usize) -> bool {
        self.acquire <= p && p < self.release
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ViolationKind {
    /// The running use went above one.
    BoundExceeded,
    /// The running use went below zero (release without acquire).
    Negative,
    /// The resource is still held after the last action.
    NonzeroAtEnd,
    /// The action names a resource missing from the capacity map.
    UnknownResource,
}

/// One reason a sequence of actions is not a valid thread.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Violation {
    pub resource: ResourceId,
    /// 1-based action position, or `l + 1` for [`ViolationKind::NonzeroAtEnd`].
    pub position: usize,
    /// Running use after the offending action.
    pub use_value: i64,
    pub kind: ViolationKind,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.kind {
            ViolationKind::BoundExceeded => write!(
                f,
                "resource #{} reaches use {} at position {}",
                self.resource.0, self.use_value, self.position
            ),
            ViolationKind::Negative => write!(
                f,
                "resource #{} drops to use {} at position {}",
                self.resource.0, self.use_value, self.position
            ),
            ViolationKind::NonzeroAtEnd => write!(
                f,
                "resource #{} is still held at the end (use {})",
                self.resource.0, self.use_value
            ),
            ViolationKind::UnknownResource => write!(
                f,
                "unknown resource #{} at position {}",
                self.resource.0, self.position
            ),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("invalid thread: {}", .violations.iter().map(|v| v.to_string()).collect::<Vec<_>>().join("; "))]
pub struct InvalidThread {
    pub violations: Vec<Violation>,
}

impl InvalidThread {
    /// Smallest offending position.
    pub fn first_position(&self) -> usize {
        self.violations.iter().map(|v| v.position).min().unwrap_or(0)
    }
}

/// A valid PV thread: per resource the use stays in `{0, 1}` and ends at 0.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Thread {
    actions: Vec<Action>,
    /// Hold intervals indexed by resource id, ascending.
    holds: Vec<Vec<HoldInterval>>,
}

impl Thread {
    /// Validates `actions` against `caps` and derives the hold intervals.
    pub fn new(actions: Vec<Action>, caps: &CapacityMap) -> Result<Self, InvalidThread> {
        validate_thread(actions, caps)
    }

    pub fn actions(&self) -> &[Action] {
        &self.actions
    }

    /// Number of actions `l`.
    pub fn len(&self) -> usize {
        self.actions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.actions.is_empty()
    }

    /// The end position `l + 1`.
    pub fn top(&self) -> usize {
        self.actions.len() + 1
    }

    /// Action at 1-based position `p`, if `p` is an action position.
    pub fn action_at(&self, p: usize) -> Option<Action> {
        if p == 0 {
            None
        } else {
            self.actions.get(p - 1).copied()
        }
    }

    /// Resource requested at `p` when `p` is an acquire position.
    pub fn request_at(&self, p: usize) -> Option<ResourceId> {
        self.action_at(p)
            .filter(Action::is_acquire)
            .map(|a| a.resource)
    }

    pub fn holds(&self, r: ResourceId) -> &[HoldInterval] {
        self.holds.get(r.0).map(Vec::as_slice).unwrap_or(&[])
    }

    /// Resources with at least one hold interval.
    pub fn used_resources(&self) -> impl Iterator<Item = ResourceId> + '_ {
        self.holds
            .iter()
            .enumerate()
            .filter(|(_, h)| !h.is_empty())
            .map(|(i, _)| ResourceId(i))
    }

    /// No resource is ever acquired.
    pub fn is_trivial(&self) -> bool {
        self.holds.iter().all(Vec::is_empty)
    }

    /// Number of resource slots this thread was validated against.
    pub fn resource_count(&self) -> usize {
        self.holds.len()
    }

    /// Resource use at the integer point `p`: 1 iff some hold interval has
    /// `acquire < p < release`.
    pub fn point_use(&self, p: usize) -> Result<Vec<u8>, PositionOutOfRange> {
        if p > self.top() {
            return Err(PositionOutOfRange {
                position: p,
                max: self.top(),
            });
        }
        Ok(self
            .holds
            .iter()
            .map(|hs| hs.iter().any(|h| h.holds_at_point(p)) as u8)
            .collect())
    }

    /// Resource use along the edge `p -> p + 1`: 1 iff some hold interval has
    /// `acquire <= p < release`.
    pub fn segment_use(&self, p: usize) -> Result<Vec<u8>, PositionOutOfRange> {
        if p > self.len() {
            return Err(PositionOutOfRange {
                position: p,
                max: self.len(),
            });
        }
        Ok(self
            .holds
            .iter()
            .map(|hs| hs.iter().any(|h| h.holds_on_segment(p)) as u8)
            .collect())
    }

    /// Every resource has at most one hold interval.
    pub fn single_access(&self) -> bool {
        self.holds.iter().all(|h| h.len() <= 1)
    }

    /// Mnemonic for a position: `⊥`, `⊤`, or the action such as `Pa`.
    pub fn label(&self, p: usize, caps: &CapacityMap) -> String {
        if p == 0 {
            "⊥".to_string()
        } else if p >= self.top() {
            "⊤".to_string()
        } else {
            self.actions[p - 1].mnemonic(caps)
        }
    }

    /// Space-separated action mnemonics, e.g. `Pa Pb Vb Va`.
    pub fn display(&self, caps: &CapacityMap) -> String {
        self.actions
            .iter()
            .map(|a| a.mnemonic(caps))
            .collect::<Vec<_>>()
            .join(" ")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
#[error("position {position} out of range 0..={max}")]
pub struct PositionOutOfRange {
    pub position: usize,
    pub max: usize,
}

/// Checks validity of an action sequence and computes hold intervals from
/// the acquire/release sequence of each resource.
pub fn validate_thread(actions: Vec<Action>, caps: &CapacityMap) -> Result<Thread, InvalidThread> {
    let nres = caps.len();
    let mut violations = Vec::new();
    let mut running = vec![0i64; nres];
    let mut reported = vec![false; nres];
    let mut open: Vec<Option<usize>> = vec![None; nres];
    let mut holds = vec![Vec::new(); nres];

    for (idx, action) in actions.iter().enumerate() {
        let pos = idx + 1;
        let r = action.resource.0;
        if r >= nres {
            violations.push(Violation {
                resource: action.resource,
                position: pos,
                use_value: 0,
                kind: ViolationKind::UnknownResource,
            });
            continue;
        }
        match action.kind {
            ActionKind::Acquire => {
                running[r] += 1;
                if running[r] == 1 {
                    open[r] = Some(pos);
                }
            }
            ActionKind::Release => {
                running[r] -= 1;
                if running[r] == 0 {
                    if let Some(start) = open[r].take() {
                        holds[r].push(HoldInterval::new(start, pos));
                    }
                }
            }
        }
        if !reported[r] && !(0..=1).contains(&running[r]) {
            reported[r] = true;
            violations.push(Violation {
                resource: action.resource,
                position: pos,
                use_value: running[r],
                kind: if running[r] > 1 {
                    ViolationKind::BoundExceeded
                } else {
                    ViolationKind::Negative
                },
            });
        }
    }
    for (r, &value) in running.iter().enumerate() {
        if value != 0 && !reported[r] {
            violations.push(Violation {
                resource: ResourceId(r),
                position: actions.len() + 1,
                use_value: value,
                kind: ViolationKind::NonzeroAtEnd,
            });
        }
    }
    if violations.is_empty() {
        Ok(Thread { actions, holds })
    } else {
        violations.sort_by_key(|v| (v.position, v.resource));
        Err(InvalidThread { violations })
    }
}

/// Sequential composition of threads. Validity is preserved because every
/// part returns all resource use to zero.
pub fn concat_threads(threads: &[Thread]) -> Thread {
    let nres = threads.iter().map(|t| t.holds.len()).max().unwrap_or(0);
    let mut actions = Vec::new();
    let mut holds = vec![Vec::new(); nres];
    for t in threads {
        let offset = actions.len();
        actions.extend_from_slice(&t.actions);
        for (r, hs) in t.holds.iter().enumerate() {
            holds[r].extend(
                hs.iter()
                    .map(|h| HoldInterval::new(h.acquire + offset, h.release + offset)),
            );
        }
    }
    Thread { actions, holds }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ProgramError {
    #[error("a program needs at least one thread")]
    Empty,
    #[error("thread {index} was validated against {found} resources but the program has {expected}")]
    ResourceMismatch {
        index: usize,
        found: usize,
        expected: usize,
    },
}

/// Parallel composition `T1 | T2 | ... | Tn` over a shared capacity map.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Program {
    caps: CapacityMap,
    threads: Vec<Thread>,
}

impl Program {
    pub fn new(caps: CapacityMap, threads: Vec<Thread>) -> Result<Self, ProgramError> {
        if threads.is_empty() {
            return Err(ProgramError::Empty);
        }
        for (index, t) in threads.iter().enumerate() {
            if t.holds.len() != caps.len() {
                return Err(ProgramError::ResourceMismatch {
                    index,
                    found: t.holds.len(),
                    expected: caps.len(),
                });
            }
        }
        Ok(Self { caps, threads })
    }

    /// `n` copies of the same thread.
    pub fn power(caps: CapacityMap, thread: &Thread, n: usize) -> Result<Self, ProgramError> {
        Self::new(caps, vec![thread.clone(); n])
    }

    pub fn caps(&self) -> &CapacityMap {
        &self.caps
    }

    pub fn threads(&self) -> &[Thread] {
        &self.threads
    }

    pub fn thread(&self, i: usize) -> &Thread {
        &self.threads[i]
    }

    /// Number of threads `n`.
    pub fn len(&self) -> usize {
        self.threads.len()
    }

    pub fn is_empty(&self) -> bool {
        self.threads.is_empty()
    }

    /// Resources acquired by at least one thread, ascending.
    pub fn used_resources(&self) -> Vec<ResourceId> {
        let mut used: Vec<ResourceId> = self
            .threads
            .iter()
            .flat_map(|t| t.used_resources())
            .collect();
        used.sort();
        used.dedup();
        used
    }

    /// Sub-program made of the threads at `indices`, in that order.
    pub fn select(&self, indices: &[usize]) -> Result<Self, ProgramError> {
        Self::new(
            self.caps.clone(),
            indices.iter().map(|&i| self.threads[i].clone()).collect(),
        )
    }

    /// Number of grid points `prod (l_i + 2)`, saturating.
    pub fn grid_size(&self) -> u128 {
        self.threads
            .iter()
            .fold(1u128, |acc, t| acc.saturating_mul(t.top() as u128 + 1))
    }
}
