//! JSON payloads. Field names are camelCase; states are lists of
//! `{thread, name, position, action}` slots.

use serde::Serialize;
use serde_json::Value;
use sha2::{Digest, Sha256};

use pvguard_core::model::Program;
use pvguard_core::LatticePath;

#[derive(Debug, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct ReportEnvelope {
    pub tool_version: &'static str,
    pub source_digest: String,
    pub command: String,
    pub result: Value,
    pub timing_ms: u64,
}

pub fn digest(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

#[derive(Debug, Clone, Serialize)]
pub struct Slot {
    pub thread: usize,
    pub name: String,
    pub position: usize,
    pub action: String,
}

/// A state both as plain positions and as labelled slots.
#[derive(Debug, Clone, Serialize)]
pub struct StateView {
    pub positions: Vec<usize>,
    pub state: Vec<Slot>,
}

/// Program together with the display name of each thread.
pub struct Named<'a> {
    pub program: &'a Program,
    pub names: Vec<String>,
}

impl<'a> Named<'a> {
    pub fn new(program: &'a Program, names: Vec<String>) -> Self {
        Self { program, names }
    }

    /// Every thread called `name`.
    pub fn uniform(program: &'a Program, name: &str) -> Self {
        Self::new(program, vec![name.to_string(); program.len()])
    }

    pub fn view(&self, x: &[usize]) -> StateView {
        let caps = self.program.caps();
        StateView {
            positions: x.to_vec(),
            state: x
                .iter()
                .enumerate()
                .map(|(c, &p)| Slot {
                    thread: c,
                    name: self.names[c].clone(),
                    position: p,
                    action: self.program.thread(c).label(p, caps),
                })
                .collect(),
        }
    }

    pub fn views<'s>(&self, xs: impl IntoIterator<Item = &'s pvguard_core::State>) -> Vec<StateView> {
        xs.into_iter().map(|x| self.view(x)).collect()
    }
}

/// A path as the thread index of each step.
pub fn steps(path: &LatticePath) -> Vec<usize> {
    path.steps().to_vec()
}

/// Compact `(2,2,5)` rendering.
pub fn tuple(x: &[usize]) -> String {
    let parts: Vec<String> = x.iter().map(|v| v.to_string()).collect();
    format!("({})", parts.join(","))
}

/// Text rendering of a state with action labels.
pub fn labelled(n: &Named, x: &[usize]) -> String {
    let parts: Vec<String> = n
        .view(x)
        .state
        .iter()
        .map(|s| format!("{}@{}:{}", s.name, s.position, s.action))
        .collect();
    format!("{}  [{}]", tuple(x), parts.join(" "))
}

#[cfg(test)]
mod tests {
    use super::*;
    use pvguard_core::parse_source;

    #[test]
    fn digest_is_sha256_hex() {
        assert_eq!(
            digest(b"abc"),
            "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad"
        );
    }

    #[test]
    fn views_label_ends() {
        let m = parse_source("resource a cap 1\nthread T = Pa Va\nprogram m = T^2").unwrap();
        let p = m.program("m").unwrap();
        let n = Named::uniform(&p, "T");
        let v = n.view(&[0, 3]);
        assert_eq!(v.state[0].action, "⊥");
        assert_eq!(v.state[1].action, "⊤");
        assert_eq!(n.view(&[1, 2]).state[0].action, "Pa");
        assert_eq!(tuple(&[2, 2, 5]), "(2,2,5)");
    }
}
