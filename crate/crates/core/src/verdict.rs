//! Verdicts for whole families of programs (every number of thread copies).

use serde::{Deserialize, Serialize};

use crate::geometry::{LatticePath, State};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Property {
    DeadlockFreedom,
    Serializability,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Answer {
    Yes,
    No,
    Inconclusive,
}

/// The result a verdict rests on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Theorem {
    /// No resource is acquired twice, so no copy count deadlocks.
    SingleAccess,
    /// The thread acquires nothing.
    TrivialThread,
    /// `T^n` deadlocks for some `n` iff `T^M` does, `M` the capacity sum.
    DeadlockCutoff,
    /// A program deadlocks iff one of its `M`-thread sub-programs does.
    SubprogramCutoff,
    /// With unit capacities, `T^n` is serializable for all `n` iff `T^2` is.
    PairCutoff,
    /// No local choice point in `T^(M+1)` implies serializability for all `n`.
    ChoicePointCutoff,
    /// No potential deadlock in `T^(M+2)` implies serializability for all `n`.
    PotentialDeadlockCutoff,
    /// Unit and larger capacities mixed: no cut-off applies.
    MixedCapacity,
}

/// Serializability of one concrete copy count, when it was decided.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PerCopyResult {
    pub copies: usize,
    /// `None` when the instance was too large to classify.
    pub serializable: Option<bool>,
    pub classes: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FamilyVerdict {
    pub property: Property,
    pub holds_for_all_n: Answer,
    /// Number of copies the verdict was decided on.
    pub cutoff: usize,
    /// Offending states in the cut-off instance.
    pub witnesses: Vec<State>,
    /// An execution exhibiting the violation, when one applies.
    pub witness_path: Option<LatticePath>,
    /// Smallest copy count at which the violation appears.
    pub manifests_at: Option<usize>,
    pub theorem: Theorem,
    pub note: Option<String>,
    #[serde(skip_serializing_if = "Vec::is_empty", default)]
    pub per_n: Vec<PerCopyResult>,
}

impl FamilyVerdict {
    pub(crate) fn new(property: Property, answer: Answer, cutoff: usize, theorem: Theorem) -> Self {
        Self {
            property,
            holds_for_all_n: answer,
            cutoff,
            witnesses: Vec::new(),
            witness_path: None,
            manifests_at: None,
            theorem,
            note: None,
            per_n: Vec::new(),
        }
    }

    pub(crate) fn with_note(mut self, note: impl Into<String>) -> Self {
        self.note = Some(note.into());
        self
    }
}
