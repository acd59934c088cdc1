//! Line-oriented source format for PV programs.
//!
//! ```text
//! # comment
//! resource a cap 1
//! resource b cap 1
//! thread T1 = Pa Pb Vb Va
//! thread T2 = P b P a V a V b
//! program m = T1 | T2
//! program sym = T1^3
//! ```

use std::fmt;

use thiserror::Error;

use crate::model::{
    Action, CapacityError, CapacityMap, InvalidThread, Program, ProgramError, Thread,
    ViolationKind,
};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParseErrorKind {
    #[error("{0}")]
    Syntax(String),
    #[error("unknown resource `{0}`")]
    UnknownResource(String),
    #[error("unknown thread `{0}`")]
    UnknownThread(String),
    #[error("unknown program `{0}`")]
    UnknownProgram(String),
    #[error("{0}")]
    Capacity(#[from] CapacityError),
    #[error("thread `{0}` declared twice")]
    DuplicateThread(String),
    #[error("program `{0}` declared twice")]
    DuplicateProgram(String),
    #[error("thread `{name}` is invalid at position {position}: {detail}")]
    InvalidThread {
        name: String,
        position: usize,
        detail: String,
        violations: InvalidThread,
    },
    #[error("{0}")]
    Program(#[from] ProgramError),
}

/// Error with a 1-based line and column.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub struct ParseError {
    pub line: usize,
    pub column: usize,
    pub kind: ParseErrorKind,
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}: {}", self.line, self.column, self.kind)
    }
}

/// A named thread from the source.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NamedThread {
    pub name: String,
    pub thread: Thread,
}

/// A named program as a list of indices into [`SourceModel::threads`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NamedProgram {
    pub name: String,
    pub members: Vec<usize>,
}

/// Fully resolved contents of a source file.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SourceModel {
    pub caps: CapacityMap,
    pub threads: Vec<NamedThread>,
    pub programs: Vec<NamedProgram>,
}

impl SourceModel {
    pub fn thread(&self, name: &str) -> Option<&Thread> {
        self.threads
            .iter()
            .find(|t| t.name == name)
            .map(|t| &t.thread)
    }

    pub fn program(&self, name: &str) -> Option<Program> {
        let p = self.programs.iter().find(|p| p.name == name)?;
        let threads = p
            .members
            .iter()
            .map(|&i| self.threads[i].thread.clone())
            .collect();
        Program::new(self.caps.clone(), threads).ok()
    }

    /// Thread names of a program, one per member.
    pub fn program_members(&self, name: &str) -> Option<Vec<&str>> {
        let p = self.programs.iter().find(|p| p.name == name)?;
        Some(
            p.members
                .iter()
                .map(|&i| self.threads[i].name.as_str())
                .collect(),
        )
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Tok {
    Word(String),
    Eq,
    Bar,
    Caret,
}

#[derive(Debug, Clone)]
struct Spanned {
    tok: Tok,
    col: usize,
}

fn is_word_char(c: char) -> bool {
    c.is_alphanumeric() || c == '_'
}

fn lex(line: &str, lineno: usize) -> Result<Vec<Spanned>, ParseError> {
    let mut out = Vec::new();
    let chars: Vec<(usize, char)> = line.chars().enumerate().collect();
    let mut i = 0;
    while i < chars.len() {
        let (col, c) = chars[i];
        let col = col + 1;
        match c {
            '#' => break,
            c if c.is_whitespace() => i += 1,
            '=' => {
                out.push(Spanned { tok: Tok::Eq, col });
                i += 1;
            }
            '|' => {
                out.push(Spanned { tok: Tok::Bar, col });
                i += 1;
            }
            '^' => {
                out.push(Spanned {
                    tok: Tok::Caret,
                    col,
                });
                i += 1;
            }
            c if is_word_char(c) => {
                let start = i;
                while i < chars.len() && is_word_char(chars[i].1) {
                    i += 1;
                }
                let word: String = chars[start..i].iter().map(|&(_, c)| c).collect();
                out.push(Spanned {
                    tok: Tok::Word(word),
                    col,
                });
            }
            other => {
                return Err(ParseError {
                    line: lineno,
                    column: col,
                    kind: ParseErrorKind::Syntax(format!("unexpected character `{other}`")),
                })
            }
        }
    }
    Ok(out)
}

struct Line {
    no: usize,
    toks: Vec<Spanned>,
    end_col: usize,
}

impl Line {
    fn err(&self, col: usize, kind: ParseErrorKind) -> ParseError {
        ParseError {
            line: self.no,
            column: col,
            kind,
        }
    }

    fn syntax(&self, col: usize, msg: impl Into<String>) -> ParseError {
        self.err(col, ParseErrorKind::Syntax(msg.into()))
    }

    fn word(&self, i: usize, what: &str) -> Result<(&str, usize), ParseError> {
        match self.toks.get(i) {
            Some(Spanned {
                tok: Tok::Word(w),
                col,
            }) => Ok((w.as_str(), *col)),
            Some(s) => Err(self.syntax(s.col, format!("expected {what}"))),
            None => Err(self.syntax(self.end_col, format!("expected {what}"))),
        }
    }

    fn expect(&self, i: usize, tok: Tok, what: &str) -> Result<usize, ParseError> {
        match self.toks.get(i) {
            Some(s) if s.tok == tok => Ok(s.col),
            Some(s) => Err(self.syntax(s.col, format!("expected {what}"))),
            None => Err(self.syntax(self.end_col, format!("expected {what}"))),
        }
    }

    fn col(&self, i: usize) -> usize {
        self.toks.get(i).map_or(self.end_col, |s| s.col)
    }
}

fn parse_count(line: &Line, i: usize, what: &str) -> Result<u32, ParseError> {
    let (w, col) = line.word(i, what)?;
    match w.parse::<u32>() {
        Ok(v) if v >= 1 => Ok(v),
        _ => Err(line.syntax(col, format!("expected {what}, found `{w}`"))),
    }
}

struct ThreadDecl {
    name: String,
    col: usize,
    line: usize,
    /// (is_acquire, resource name, column)
    actions: Vec<(bool, String, usize)>,
}

struct ProgramDecl {
    name: String,
    col: usize,
    line: usize,
    /// (thread name, copies, column)
    parts: Vec<(String, usize, usize)>,
}

/// Parses and resolves a PV source file.
pub fn parse_source(text: &str) -> Result<SourceModel, ParseError> {
    let mut caps = CapacityMap::new();
    let mut thread_decls = Vec::new();
    let mut program_decls = Vec::new();

    for (idx, raw) in text.lines().enumerate() {
        let no = idx + 1;
        let toks = lex(raw, no)?;
        if toks.is_empty() {
            continue;
        }
        let line = Line {
            no,
            toks,
            end_col: raw.chars().count() + 1,
        };
        let (keyword, kcol) = line.word(0, "a declaration")?;
        match keyword {
            "resource" => {
                let (name, ncol) = line.word(1, "a resource name")?;
                let (cap_kw, ccol) = line.word(2, "`cap`")?;
                if cap_kw != "cap" {
                    return Err(line.syntax(ccol, "expected `cap`"));
                }
                let cap = parse_count(&line, 3, "a capacity of at least 1")?;
                if line.toks.len() > 4 {
                    return Err(line.syntax(line.col(4), "unexpected trailing input"));
                }
                caps.insert(name, cap)
                    .map_err(|e| line.err(ncol, ParseErrorKind::Capacity(e)))?;
            }
            "thread" => {
                let (name, ncol) = line.word(1, "a thread name")?;
                line.expect(2, Tok::Eq, "`=`")?;
                let mut actions = Vec::new();
                let mut i = 3;
                while i < line.toks.len() {
                    let (w, col) = line.word(i, "an action")?;
                    let mut chars = w.chars();
                    let acquire = match chars.next() {
                        Some('P') => true,
                        Some('V') => false,
                        _ => {
                            return Err(
                                line.syntax(col, format!("expected P<res> or V<res>, found `{w}`"))
                            )
                        }
                    };
                    let rest = chars.as_str();
                    let res = if rest.is_empty() {
                        i += 1;
                        line.word(i, "a resource name after P/V")?.0.to_string()
                    } else {
                        rest.to_string()
                    };
                    actions.push((acquire, res, col));
                    i += 1;
                }
                thread_decls.push(ThreadDecl {
                    name: name.to_string(),
                    col: ncol,
                    line: no,
                    actions,
                });
            }
            "program" => {
                let (name, ncol) = line.word(1, "a program name")?;
                line.expect(2, Tok::Eq, "`=`")?;
                let mut parts = Vec::new();
                let mut i = 3;
                loop {
                    let (tname, tcol) = line.word(i, "a thread name")?;
                    i += 1;
                    let mut copies = 1usize;
                    if matches!(line.toks.get(i), Some(s) if s.tok == Tok::Caret) {
                        copies = parse_count(&line, i + 1, "a copy count of at least 1")? as usize;
                        i += 2;
                    }
                    parts.push((tname.to_string(), copies, tcol));
                    match line.toks.get(i) {
                        None => break,
                        Some(s) if s.tok == Tok::Bar => i += 1,
                        Some(s) => return Err(line.syntax(s.col, "expected `|` or end of line")),
                    }
                }
                program_decls.push(ProgramDecl {
                    name: name.to_string(),
                    col: ncol,
                    line: no,
                    parts,
                });
            }
            other => {
                return Err(line.syntax(
                    kcol,
                    format!("expected `resource`, `thread` or `program`, found `{other}`"),
                ))
            }
        }
    }

    let mut threads: Vec<NamedThread> = Vec::new();
    for decl in thread_decls {
        if threads.iter().any(|t| t.name == decl.name) {
            return Err(ParseError {
                line: decl.line,
                column: decl.col,
                kind: ParseErrorKind::DuplicateThread(decl.name),
            });
        }
        let mut actions = Vec::with_capacity(decl.actions.len());
        for (acquire, res, col) in &decl.actions {
            let r = caps.lookup(res).ok_or_else(|| ParseError {
                line: decl.line,
                column: *col,
                kind: ParseErrorKind::UnknownResource(res.clone()),
            })?;
            actions.push(if *acquire {
                Action::acquire(r)
            } else {
                Action::release(r)
            });
        }
        let thread = Thread::new(actions, &caps).map_err(|err| {
            let first = err
                .violations
                .iter()
                .min_by_key(|v| v.position)
                .expect("invalid thread has a violation");
            let position = first.position;
            let rname = caps.name(first.resource).to_string();
            let detail = match first.kind {
                ViolationKind::BoundExceeded => {
                    format!("use of `{rname}` reaches {}", first.use_value)
                }
                ViolationKind::Negative => {
                    format!("use of `{rname}` drops to {}", first.use_value)
                }
                ViolationKind::NonzeroAtEnd => format!("`{rname}` is never released"),
                ViolationKind::UnknownResource => "unknown resource".to_string(),
            };
            let column = decl
                .actions
                .get(position.saturating_sub(1))
                .map_or(decl.col, |a| a.2);
            ParseError {
                line: decl.line,
                column,
                kind: ParseErrorKind::InvalidThread {
                    name: decl.name.clone(),
                    position,
                    detail,
                    violations: err.clone(),
                },
            }
        })?;
        threads.push(NamedThread {
            name: decl.name,
            thread,
        });
    }

    let mut programs: Vec<NamedProgram> = Vec::new();
    for decl in program_decls {
        if programs.iter().any(|p| p.name == decl.name) {
            return Err(ParseError {
                line: decl.line,
                column: decl.col,
                kind: ParseErrorKind::DuplicateProgram(decl.name),
            });
        }
        let mut members = Vec::new();
        for (tname, copies, col) in &decl.parts {
            let idx = threads
                .iter()
                .position(|t| &t.name == tname)
                .ok_or_else(|| ParseError {
                    line: decl.line,
                    column: *col,
                    kind: ParseErrorKind::UnknownThread(tname.clone()),
                })?;
            members.extend(std::iter::repeat_n(idx, *copies));
        }
        programs.push(NamedProgram {
            name: decl.name,
            members,
        });
    }

    Ok(SourceModel {
        caps,
        threads,
        programs,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::ResourceId;

    #[test]
    fn smallest_program() {
        let m = parse_source("resource a cap 1\nthread T = Pa Va\nprogram m = T^2").unwrap();
        let p = m.program("m").unwrap();
        assert_eq!(p.len(), 2);
        assert_eq!(p.thread(0).display(&m.caps), "Pa Va");
        assert_eq!(p.thread(0), p.thread(1));
    }

    #[test]
    fn two_thread_program() {
        let src = "resource a cap 1\nresource b cap 1\nthread T1 = Pa Pb Vb Va\nthread T2 = Pb Pa Va Vb\nprogram m = T1 | T2\n";
        let m = parse_source(src).unwrap();
        let p = m.program("m").unwrap();
        assert_eq!(p.len(), 2);
        assert_eq!(p.thread(1).display(&m.caps), "Pb Pa Va Vb");
        assert_eq!(m.program_members("m").unwrap(), vec!["T1", "T2"]);
    }

    #[test]
    fn split_tokens_and_tight_operators() {
        let src = "# header\nresource a cap 2 # trailing\nthread T = P a V a\nprogram m=T^2|T";
        let m = parse_source(src).unwrap();
        assert_eq!(m.caps.capacity(ResourceId(0)), 2);
        assert_eq!(m.program("m").unwrap().len(), 3);
    }

    #[test]
    fn invalid_thread_reports_position() {
        let err = parse_source("resource a cap 1\nthread T = Pa Pa Va Va\n").unwrap_err();
        assert_eq!(err.line, 2);
        match err.kind {
            ParseErrorKind::InvalidThread { position, .. } => assert_eq!(position, 2),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn unknown_resource() {
        let err = parse_source("thread T = Pa Va\n").unwrap_err();
        assert_eq!(err.kind, ParseErrorKind::UnknownResource("a".into()));
        assert_eq!((err.line, err.column), (1, 12));
    }

    #[test]
    fn unknown_thread() {
        let err = parse_source("resource a cap 1\nprogram m = T^2\n").unwrap_err();
        assert_eq!(err.kind, ParseErrorKind::UnknownThread("T".into()));
    }

    #[test]
    fn duplicate_resource() {
        let err = parse_source("resource a cap 1\nresource a cap 2\n").unwrap_err();
        assert!(matches!(
            err.kind,
            ParseErrorKind::Capacity(CapacityError::Duplicate(_))
        ));
    }

    #[test]
    fn syntax_errors() {
        assert!(parse_source("resource a cap 0").is_err());
        assert!(parse_source("resource a capacity 1").is_err());
        assert!(parse_source("resource a cap 1\nthread T = Xa").is_err());
        assert!(parse_source("resource a cap 1\nthread T = Pa Va\nprogram m = T^0").is_err());
        assert!(parse_source("resource a cap 1\nthread T = Pa Va\nprogram m = T |").is_err());
        assert!(parse_source("widget x").is_err());
        assert!(parse_source("resource a cap 1\nthread T = Pa Va\nthread T = Pa Va").is_err());
    }

    #[test]
    fn empty_thread_allowed() {
        let m = parse_source("resource a cap 1\nthread E =\nprogram m = E").unwrap();
        assert!(m.thread("E").unwrap().is_empty());
    }
}
