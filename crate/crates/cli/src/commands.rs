use std::fmt::Write as _;

use serde::Serialize;
use serde_json::{json, Value};

use pvguard_core::deadlock::{
    deadsharp_witness, family_deadlock_verdict, find_deadlocks, potential_deadlocks, program_deadlock_verdict,
    SharpWitness,
};
use pvguard_core::serial::{
    dihomotopy_classes, family_serializability_by_potential_deadlocks, family_serializability_verdict,
    lcp_cutoff, lcp_to_potential_deadlock, local_choice_points, sharpserializable_witness,
};
use pvguard_core::{
    parse_source, Answer, CapacityMap, FamilyVerdict, Grid, ParseError, Program, SearchError, SearchLimits,
    SourceModel,
};

use crate::ascii;
use crate::report::{labelled, steps, tuple, Named, StateView};

pub mod exit {
    pub const CLEAN: i32 = 0;
    pub const VIOLATED: i32 = 1;
    pub const INPUT: i32 = 2;
    pub const OVERFLOW: i32 = 3;
    pub const INCONCLUSIVE: i32 = 4;
}

/// What a command produced: exit code, JSON payload and text rendering.
pub struct Outcome {
    pub code: i32,
    pub result: Value,
    pub text: String,
}

#[derive(Debug)]
pub enum Failure {
    Input { message: String, detail: Value },
    Overflow(SearchError),
}

impl Failure {
    pub fn input(message: impl Into<String>) -> Self {
        Failure::Input {
            message: message.into(),
            detail: Value::Null,
        }
    }

    pub fn code(&self) -> i32 {
        match self {
            Failure::Input { .. } => exit::INPUT,
            Failure::Overflow(_) => exit::OVERFLOW,
        }
    }

    pub fn message(&self) -> String {
        match self {
            Failure::Input { message, .. } => message.clone(),
            Failure::Overflow(e) => e.to_string(),
        }
    }

    pub fn payload(&self) -> Value {
        match self {
            Failure::Input { message, detail } => json!({ "error": { "kind": "input", "message": message, "detail": detail } }),
            Failure::Overflow(e) => json!({ "error": { "kind": "overflow", "message": e.to_string() } }),
        }
    }
}

impl From<SearchError> for Failure {
    fn from(e: SearchError) -> Self {
        Failure::Overflow(e)
    }
}

fn parse_failure(e: &ParseError) -> Failure {
    let mut detail = json!({ "line": e.line, "column": e.column });
    if let pvguard_core::parse::ParseErrorKind::InvalidThread { name, position, .. } = &e.kind {
        detail["thread"] = json!(name);
        detail["position"] = json!(position);
    }
    Failure::Input {
        message: e.to_string(),
        detail,
    }
}

pub fn load(text: &str) -> Result<SourceModel, Failure> {
    parse_source(text).map_err(|e| parse_failure(&e))
}

fn lookup_program(m: &SourceModel, name: &str) -> Result<(Program, Vec<String>), Failure> {
    let program = m
        .program(name)
        .ok_or_else(|| Failure::input(format!("unknown program `{name}`")))?;
    let names = m
        .program_members(name)
        .expect("program exists")
        .into_iter()
        .map(str::to_string)
        .collect();
    Ok((program, names))
}

fn to_value<T: Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("payload serializes")
}

#[derive(Serialize)]
#[serde(rename_all = "camelCase")]
struct ResourceInfo {
    name: String,
    capacity: u32,
}

#[derive(Serialize)]
#[serde(rename_all = "camelCase")]
struct ThreadInfo {
    name: String,
    actions: String,
    length: usize,
    single_access: bool,
}

#[derive(Serialize)]
#[serde(rename_all = "camelCase")]
struct ProgramInfo {
    name: String,
    threads: Vec<String>,
    grid_states: String,
}

pub fn check(m: &SourceModel) -> Outcome {
    let resources: Vec<ResourceInfo> = m
        .caps
        .iter()
        .map(|(_, name, capacity)| ResourceInfo {
            name: name.to_string(),
            capacity,
        })
        .collect();
    let threads: Vec<ThreadInfo> = m
        .threads
        .iter()
        .map(|t| ThreadInfo {
            name: t.name.clone(),
            actions: t.thread.display(&m.caps),
            length: t.thread.len(),
            single_access: t.thread.single_access(),
        })
        .collect();
    let programs: Vec<ProgramInfo> = m
        .programs
        .iter()
        .map(|p| ProgramInfo {
            name: p.name.clone(),
            threads: m.program_members(&p.name).unwrap().into_iter().map(str::to_string).collect(),
            grid_states: m.program(&p.name).map_or(0, |q| q.grid_size()).to_string(),
        })
        .collect();
    let mut text = format!(
        "ok: {} resources, {} threads, {} programs\n",
        resources.len(),
        threads.len(),
        programs.len()
    );
    for t in &threads {
        let _ = writeln!(text, "  thread {} = {}", t.name, t.actions);
    }
    for p in &programs {
        let _ = writeln!(text, "  program {} = {}", p.name, p.threads.join(" | "));
    }
    Outcome {
        code: exit::CLEAN,
        result: json!({ "valid": true, "resources": resources, "threads": threads, "programs": programs }),
        text,
    }
}

#[derive(Serialize)]
#[serde(rename_all = "camelCase")]
struct DeadlockEntry {
    #[serde(flatten)]
    state: StateView,
    path: Vec<usize>,
}

pub fn deadlocks(m: &SourceModel, name: &str, potential: bool, limits: &SearchLimits) -> Result<Outcome, Failure> {
    let (p, names) = lookup_program(m, name)?;
    let named = Named::new(&p, names);
    if potential {
        let found = potential_deadlocks(&p, limits)?;
        let grid = Grid::new(&p);
        let entries: Vec<Value> = found
            .iter()
            .map(|s| {
                let mut v = to_value(&named.view(s));
                v["admissible"] = json!(grid.state_admissible(s));
                v
            })
            .collect();
        let mut text = format!("{}: {} potential deadlocks\n", name, found.len());
        for s in &found {
            let _ = writeln!(text, "  {}", labelled(&named, s));
        }
        return Ok(Outcome {
            code: if found.is_empty() { exit::CLEAN } else { exit::VIOLATED },
            result: json!({
                "program": name,
                "threads": named.names,
                "potentialDeadlocks": entries,
            }),
            text,
        });
    }

    let report = find_deadlocks(&p, limits)?;
    let entries: Vec<DeadlockEntry> = report
        .deadlocks
        .iter()
        .map(|(s, path)| DeadlockEntry {
            state: named.view(s),
            path: steps(path),
        })
        .collect();
    let mut text = if report.is_deadlock_free() {
        format!("{name}: deadlock free\n")
    } else {
        format!("{}: {} deadlocks\n", name, report.deadlocks.len())
    };
    for (s, path) in &report.deadlocks {
        let _ = writeln!(text, "  {}", labelled(&named, s));
        let route: Vec<String> = path.states().iter().map(|x| tuple(x)).collect();
        let _ = writeln!(text, "    via {}", route.join(" "));
    }
    let _ = writeln!(
        text,
        "  {} potential deadlocks, {} states explored of {}",
        report.potential_deadlocks.len(),
        report.searched.explored_states,
        report.searched.grid_states
    );
    if let Some(pic) = ascii::draw(&p, report.deadlocks.first().map(|(_, path)| path), &report.deadlock_states()) {
        text.push('\n');
        text.push_str(&pic);
    }
    Ok(Outcome {
        code: if report.is_deadlock_free() { exit::CLEAN } else { exit::VIOLATED },
        result: json!({
            "program": name,
            "threads": named.names,
            "deadlockFree": report.is_deadlock_free(),
            "deadlocks": entries,
            "potentialDeadlocks": named.views(&report.potential_deadlocks),
            "gridStates": report.searched.grid_states.to_string(),
            "candidates": report.searched.candidates,
            "exploredStates": report.searched.explored_states,
        }),
        text,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum PropertyArg {
    Deadlock,
    Serializability,
}

fn verdict_code(a: Answer) -> i32 {
    match a {
        Answer::Yes => exit::CLEAN,
        Answer::No => exit::VIOLATED,
        Answer::Inconclusive => exit::INCONCLUSIVE,
    }
}

fn verdict_outcome(subject: &str, v: &FamilyVerdict, named: &Named) -> Outcome {
    let per_n: Vec<Value> = v
        .per_n
        .iter()
        .map(|r| json!({ "copies": r.copies, "serializable": r.serializable, "classes": r.classes }))
        .collect();
    let result = json!({
        "subject": subject,
        "property": v.property,
        "holdsForAllN": v.holds_for_all_n,
        "cutoff": v.cutoff,
        "theorem": v.theorem,
        "witnesses": named.views(&v.witnesses),
        "witnessPath": v.witness_path.as_ref().map(steps),
        "manifestsAt": v.manifests_at,
        "note": v.note,
        "perN": per_n,
    });
    let answer = match v.holds_for_all_n {
        Answer::Yes => "yes",
        Answer::No => "no",
        Answer::Inconclusive => "inconclusive",
    };
    let theorem = serde_json::to_value(v.theorem).unwrap();
    let mut text = format!(
        "{subject}: holds for all n: {answer} (decided on {} copies, {})\n",
        v.cutoff,
        theorem.as_str().unwrap_or_default()
    );
    if let Some(n) = v.manifests_at {
        let _ = writeln!(text, "  first fails at {n} copies");
    }
    for w in v.witnesses.iter().take(20) {
        let _ = writeln!(text, "  witness {}", labelled(named, w));
    }
    if v.witnesses.len() > 20 {
        let _ = writeln!(text, "  ... {} witnesses in total", v.witnesses.len());
    }
    for r in &v.per_n {
        let s = match r.serializable {
            Some(true) => "serializable",
            Some(false) => "not serializable",
            None => "too large",
        };
        let _ = writeln!(text, "  {} copies: {}", r.copies, s);
    }
    if let Some(note) = &v.note {
        let _ = writeln!(text, "  note: {note}");
    }
    Outcome {
        code: verdict_code(v.holds_for_all_n),
        result,
        text,
    }
}

pub fn family(
    m: &SourceModel,
    name: &str,
    property: PropertyArg,
    program: bool,
    by_potential: bool,
    limits: &SearchLimits,
) -> Result<Outcome, Failure> {
    if program {
        if property != PropertyArg::Deadlock {
            return Err(Failure::input("sub-program verdicts exist for deadlock freedom only"));
        }
        let (p, names) = lookup_program(m, name)?;
        let v = program_deadlock_verdict(&p, limits);
        return Ok(verdict_outcome(name, &v, &Named::new(&p, names)));
    }
    let t = m
        .thread(name)
        .ok_or_else(|| Failure::input(format!("unknown thread `{name}`")))?;
    let v = match property {
        PropertyArg::Deadlock => family_deadlock_verdict(t, &m.caps, limits),
        PropertyArg::Serializability if by_potential => {
            family_serializability_by_potential_deadlocks(t, &m.caps, limits)
        }
        PropertyArg::Serializability => family_serializability_verdict(t, &m.caps, limits),
    };
    let copies = Program::power(m.caps.clone(), t, v.cutoff.max(1)).expect("thread fits its capacities");
    Ok(verdict_outcome(name, &v, &Named::uniform(&copies, name)))
}

pub fn classes(m: &SourceModel, name: &str, limit: u64, limits: &SearchLimits) -> Result<Outcome, Failure> {
    let (p, names) = lookup_program(m, name)?;
    let r = dihomotopy_classes(&p, limit, limits)?;
    let reps: Vec<Vec<usize>> = r.representatives.iter().map(steps).collect();
    let mut text = format!(
        "{}: {} classes, {} with a serial execution; {}\n",
        name,
        r.class_count,
        r.serial_classes_covered,
        if r.serializable { "serializable" } else { "not serializable" }
    );
    for path in r.representatives.iter().take(24) {
        let order: Vec<String> = path.steps().iter().map(|c| c.to_string()).collect();
        let _ = writeln!(text, "  {}", order.join(""));
    }
    if r.representatives.len() > 24 {
        let _ = writeln!(text, "  ...");
    }
    Ok(Outcome {
        code: if r.serializable { exit::CLEAN } else { exit::VIOLATED },
        result: json!({
            "program": name,
            "threads": names,
            "classCount": r.class_count,
            "serializable": r.serializable,
            "serialClassesCovered": r.serial_classes_covered,
            "serialPaths": r.serial_paths.to_string(),
            "representatives": reps,
        }),
        text,
    })
}

pub fn lcp(m: &SourceModel, name: &str, limits: &SearchLimits) -> Result<Outcome, Failure> {
    let (p, names) = lookup_program(m, name)?;
    let named = Named::new(&p, names);
    let found = local_choice_points(&p, limits)?;
    let mut entries = Vec::new();
    let mut text = format!("{}: {} local choice points\n", name, found.len());
    for cp in &found {
        let lifted = lcp_to_potential_deadlock(&p, cp);
        let mut v = to_value(&named.view(&cp.state));
        v["resource"] = json!(p.caps().name(cp.resource));
        v["contenders"] = json!(cp.contenders);
        v["reachable"] = json!(cp.reachable);
        v["path"] = json!(cp.path.as_ref().map(steps));
        v["liftedTo"] = match &lifted {
            Ok(l) => json!({ "copied": l.copied, "positions": l.state.0 }),
            Err(e) => json!({ "error": e.to_string() }),
        };
        entries.push(v);
        let reach = match cp.reachable {
            Some(true) => "reachable",
            Some(false) => "unreachable",
            None => "reachability unknown",
        };
        let _ = writeln!(
            text,
            "  {} on {} ({})",
            labelled(&named, &cp.state),
            p.caps().name(cp.resource),
            reach
        );
        if let Ok(l) = &lifted {
            let _ = writeln!(text, "    potential deadlock {} with thread {} copied", tuple(&l.state), l.copied);
        }
    }
    Ok(Outcome {
        code: if found.is_empty() { exit::CLEAN } else { exit::VIOLATED },
        result: json!({ "program": name, "threads": named.names, "choicePoints": entries }),
        text,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum WitnessKind {
    Deadlock,
    Lcp,
}

/// `name:capacity` pairs in order.
pub fn parse_capacities(args: &[String]) -> Result<CapacityMap, Failure> {
    let mut caps = CapacityMap::new();
    for a in args {
        let (name, cap) = a
            .split_once(':')
            .ok_or_else(|| Failure::input(format!("expected name:capacity, found `{a}`")))?;
        let cap: u32 = cap
            .parse()
            .map_err(|_| Failure::input(format!("bad capacity in `{a}`")))?;
        caps.insert(name, cap).map_err(|e| Failure::input(e.to_string()))?;
    }
    Ok(caps)
}

/// Source text declaring the capacities, the thread and its power.
pub fn witness_source(kind: WitnessKind, caps: &CapacityMap, w: &SharpWitness) -> String {
    let mut s = String::new();
    for (_, name, cap) in caps.iter() {
        let _ = writeln!(s, "resource {name} cap {cap}");
    }
    let _ = writeln!(s, "thread T = {}", w.thread.display(caps));
    let _ = writeln!(s, "program witness = T^{}", w.copies);
    if kind == WitnessKind::Lcp {
        let _ = writeln!(s, "program cutoff = T^{}", lcp_cutoff(caps));
    }
    s
}

pub fn witness(kind: WitnessKind, args: &[String]) -> Result<(Outcome, String), Failure> {
    let caps = parse_capacities(args)?;
    let w = match kind {
        WitnessKind::Deadlock => deadsharp_witness(&caps),
        WitnessKind::Lcp => sharpserializable_witness(&caps),
    }
    .map_err(|e| Failure::input(e.to_string()))?;
    let source = witness_source(kind, &caps, &w);
    let p = Program::power(caps.clone(), &w.thread, w.copies).expect("witness fits its capacities");
    let named = Named::uniform(&p, "T");
    let cutoff = match kind {
        WitnessKind::Deadlock => caps.total(),
        WitnessKind::Lcp => lcp_cutoff(&caps),
    };
    let what = match kind {
        WitnessKind::Deadlock => "deadlock",
        WitnessKind::Lcp => "local choice point",
    };
    let text = format!(
        "{source}# expected {what} in T^{}: {}\n# cut-off {cutoff}\n",
        w.copies,
        labelled(&named, &w.expected)
    );
    let result = json!({
        "kind": kind_name(kind),
        "thread": w.thread.display(&caps),
        "copies": w.copies,
        "cutoff": cutoff,
        "expected": named.view(&w.expected),
        "source": source,
    });
    Ok((
        Outcome {
            code: exit::CLEAN,
            result,
            text,
        },
        source,
    ))
}

fn kind_name(k: WitnessKind) -> &'static str {
    match k {
        WitnessKind::Deadlock => "deadlock",
        WitnessKind::Lcp => "lcp",
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const LIM: SearchLimits = SearchLimits { max_states: 10_000_000 };

    const CROSSED: &str = "resource a cap 1
resource b cap 1
thread T1 = Pa Pb Vb Va
thread T2 = Pb Pa Va Vb
program m = T1 | T2
";

    #[test]
    fn capacities_from_args() {
        let c = parse_capacities(&["a:1".into(), "b:2".into()]).unwrap();
        assert_eq!(c.total(), 3);
        assert!(parse_capacities(&["a".into()]).is_err());
        assert!(parse_capacities(&["a:x".into()]).is_err());
        assert!(parse_capacities(&["a:0".into()]).is_err());
        assert!(parse_capacities(&["a:1".into(), "a:1".into()]).is_err());
    }

    #[test]
    fn parse_errors_carry_positions() {
        let Err(f) = load("resource a cap 1\nthread T = Pa Pa Va Va\n") else {
            panic!("accepted an invalid thread")
        };
        let v = f.payload();
        assert_eq!(v["error"]["detail"]["position"], 2);
        assert_eq!(v["error"]["detail"]["line"], 2);
        assert_eq!(f.code(), exit::INPUT);
    }

    #[test]
    fn deadlock_payload() {
        let m = load(CROSSED).unwrap();
        let o = deadlocks(&m, "m", false, &LIM).unwrap();
        assert_eq!(o.code, exit::VIOLATED);
        assert_eq!(o.result["deadlocks"][0]["positions"], json!([2, 2]));
        assert_eq!(o.result["deadlocks"][0]["state"][1]["action"], "Pa");
        assert!(o.text.contains('#'));
        let o = deadlocks(&m, "m", true, &LIM).unwrap();
        assert_eq!(o.code, exit::VIOLATED);
        assert!(deadlocks(&m, "nope", false, &LIM).is_err());
    }

    #[test]
    fn witness_sources_parse_back() {
        let (o, src) = witness(WitnessKind::Deadlock, &["a:1".into(), "b:1".into()]).unwrap();
        assert_eq!(o.result["thread"], "Pa Pb Va Pa Vb Va");
        assert_eq!(o.result["expected"]["positions"], json!([4, 2]));
        let m = load(&src).unwrap();
        assert_eq!(m.program("witness").unwrap().len(), 2);
        let (o, src) = witness(WitnessKind::Lcp, &["a:2".into(), "b:2".into()]).unwrap();
        assert_eq!(o.result["expected"]["positions"], json!([4, 2, 2]));
        assert_eq!(load(&src).unwrap().program("cutoff").unwrap().len(), 5);
        assert!(witness(WitnessKind::Lcp, &["a:1".into(), "b:2".into()]).is_err());
    }

    #[test]
    fn family_on_programs_is_deadlock_only() {
        let m = load(CROSSED).unwrap();
        let o = family(&m, "m", PropertyArg::Deadlock, true, false, &LIM).unwrap();
        assert_eq!(o.code, exit::VIOLATED);
        assert!(family(&m, "m", PropertyArg::Serializability, true, false, &LIM).is_err());
    }
}
