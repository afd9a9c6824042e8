//! Text-level application of an injection profile and the resulting bug log.

use std::collections::{BTreeSet, HashMap, HashSet};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::front::{self, ContractKind, LineMap, SourceUnit, Stmt, StmtKind, TokenKind};
use crate::locator::{content_hash, InjectionProfile, SiteKind, WeakenShape};
use crate::pool::{declared_names, instantiate, BugPool, BugType, SnippetForm, TransformPattern};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Approach {
    FullSnippet,
    CodeTransformation,
    WeakenSecurity,
}

/// Ground-truth record of one injected bug. Positions refer to the output file.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
pub struct BugLogEntry {
    pub bug_id: String,
    pub bug_type: BugType,
    pub approach: Approach,
    /// Pool entry (snippet, pattern or rule) that produced the bug.
    pub snippet_id: Option<String>,
    pub file: String,
    pub start_line: usize,
    pub end_line: usize,
    pub byte_start: usize,
    pub byte_end: usize,
}

impl BugLogEntry {
    pub fn contains_line(&self, line: usize) -> bool {
        self.start_line <= line && line <= self.end_line
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct InjectionResult {
    pub buggy_source: String,
    pub log: Vec<BugLogEntry>,
    pub counter_start: u64,
    /// First counter value left unused.
    pub counter_end: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum InjectError {
    #[error("profile was computed for content {expected}, source hashes to {found}")]
    StaleProfile { expected: String, found: String },
    #[error("edits at bytes {first_start}..{first_end} and {second_start}..{second_end} overlap")]
    EditConflict {
        first_start: usize,
        first_end: usize,
        second_start: usize,
        second_end: usize,
    },
    #[error("injected identifier `{0}` already occurs in the source")]
    IdentifierCollision(String),
    #[error("pool has no entry `{0}`")]
    UnknownPoolEntry(String),
    #[error("pool has no {form:?} snippet for {bug_type}")]
    NoSnippet {
        bug_type: BugType,
        form: SnippetForm,
    },
    #[error("source does not parse: {0}")]
    Syntax(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub enum LogFormat {
    Json,
    Csv,
}

#[derive(Debug, Error)]
pub enum LogIoError {
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub fn emit_bug_log(log: &[BugLogEntry], format: LogFormat) -> Result<Vec<u8>, LogIoError> {
    match format {
        LogFormat::Json => {
            let mut out = serde_json::to_vec_pretty(log)?;
            out.push(b'\n');
            Ok(out)
        }
        LogFormat::Csv => {
            let mut w = csv::Writer::from_writer(Vec::new());
            if log.is_empty() {
                w.write_record([
                    "bugId",
                    "bugType",
                    "approach",
                    "snippetId",
                    "file",
                    "startLine",
                    "endLine",
                    "byteStart",
                    "byteEnd",
                ])?;
            }
            for e in log {
                w.serialize(e)?;
            }
            w.into_inner().map_err(|e| LogIoError::Io(e.into_error()))
        }
    }
}

pub fn parse_bug_log(bytes: &[u8], format: LogFormat) -> Result<Vec<BugLogEntry>, LogIoError> {
    match format {
        LogFormat::Json => Ok(serde_json::from_slice(bytes)?),
        LogFormat::Csv => csv::Reader::from_reader(bytes)
            .deserialize()
            .collect::<Result<_, _>>()
            .map_err(Into::into),
    }
}

struct Edit {
    start: usize,
    end: usize,
    text: String,
    site: usize,
    /// Part of `text` that counts as injected, excluding framing whitespace.
    logged: (usize, usize),
}

impl Edit {
    fn whole(start: usize, end: usize, text: String, site: usize) -> Self {
        let len = text.len();
        Edit {
            start,
            end,
            text,
            site,
            logged: (0, len),
        }
    }
}

fn line_indent(text: &str, lines: &LineMap, offset: usize) -> String {
    let line = lines.line_of(offset).unwrap_or(1);
    let start = lines.line_start(line).unwrap_or(0);
    text[start..]
        .chars()
        .take_while(|c| *c == ' ' || *c == '\t')
        .collect()
}

/// Bytes after `offset` up to the end of its line.
fn rest_of_line(text: &str, offset: usize) -> &str {
    let rest = &text[offset..];
    &rest[..rest.find('\n').unwrap_or(rest.len())]
}

fn reindent(text: &str, indent: &str) -> String {
    text.lines()
        .map(|l| {
            if l.trim().is_empty() {
                String::new()
            } else {
                format!("{indent}{l}")
            }
        })
        .collect::<Vec<_>>()
        .join("\n")
}

/// Indentation for snippets inserted at each statement or member boundary:
/// that of the neighbouring sibling, or of the opening line when the
/// block is empty.
fn boundary_indents(unit: &SourceUnit) -> HashMap<usize, String> {
    let text = &unit.raw_text;
    let lines = &unit.line_map;
    let mut map = HashMap::new();
    let mut record = |open: usize, starts: &[usize], ends: &[usize]| {
        let open_indent = line_indent(text, lines, open.saturating_sub(1));
        let first = starts
            .first()
            .filter(|s| lines.line_of(**s).ok() != lines.line_of(open.saturating_sub(1)).ok())
            .map(|s| line_indent(text, lines, *s));
        map.insert(open, first.unwrap_or(open_indent));
        for (s, e) in starts.iter().zip(ends) {
            map.insert(*e, line_indent(text, lines, *s));
        }
    };
    fn walk(stmts: &[Stmt], open: usize, rec: &mut impl FnMut(usize, &[usize], &[usize])) {
        let starts: Vec<_> = stmts.iter().map(|s| s.span.start).collect();
        let ends: Vec<_> = stmts.iter().map(|s| s.span.end).collect();
        rec(open, &starts, &ends);
        for s in stmts {
            nested(s, rec);
        }
    }
    fn nested(s: &Stmt, rec: &mut impl FnMut(usize, &[usize], &[usize])) {
        if s.opaque {
            return;
        }
        match s.kind {
            StmtKind::Block => walk(&s.children, s.span.start + 1, rec),
            StmtKind::IfStmt | StmtKind::ForStmt | StmtKind::WhileStmt => {
                for arm in &s.children {
                    nested(arm, rec);
                }
            }
            _ => {}
        }
    }
    for c in &unit.contracts {
        let starts: Vec<_> = c.members.iter().map(|m| m.span().start).collect();
        let ends: Vec<_> = c.members.iter().map(|m| m.span().end).collect();
        record(c.body_span.start, &starts, &ends);
        for m in &c.members {
            if let Some(body) = m.body() {
                walk(&body.statements, body.span.start, &mut record);
            }
        }
    }
    map
}

fn contract_at(unit: &SourceUnit, offset: usize) -> Option<&str> {
    unit.contracts
        .iter()
        .find(|c| {
            c.kind == ContractKind::Contract && c.span.start <= offset && offset <= c.span.end
        })
        .map(|c| c.name.as_str())
}

/// Replacement text for a transform match, reusing the match's own spacing
/// when the token counts agree.
fn transform_text(unit: &SourceUnit, matched: &front::Span, pattern: &TransformPattern) -> String {
    let toks: Vec<_> = unit
        .tokens
        .iter()
        .filter(|t| !t.is_trivia() && matched.contains(&t.span))
        .collect();
    let repl = pattern.replace_tokens();
    if toks.len() == repl.len() {
        let mut out = String::new();
        for (i, r) in repl.iter().enumerate() {
            out.push_str(r);
            if let Some(next) = toks.get(i + 1) {
                out.push_str(&unit.raw_text[toks[i].span.end..next.span.start]);
            }
        }
        out
    } else {
        let mut out = String::new();
        for (i, r) in repl.iter().enumerate() {
            if i > 0 && r != "." && repl[i - 1] != "." {
                out.push(' ');
            }
            out.push_str(r);
        }
        out
    }
}

/// Applies every site of `profile` to `source` and logs one entry per site.
pub fn inject_all(
    source: &str,
    profile: &InjectionProfile,
    pool: &BugPool,
    counter_start: u64,
    file: &str,
) -> Result<InjectionResult, InjectError> {
    let found = content_hash(source);
    if found != profile.content_hash {
        return Err(InjectError::StaleProfile {
            expected: profile.content_hash.clone(),
            found,
        });
    }
    if profile.sites.is_empty() {
        return Ok(InjectionResult {
            buggy_source: source.to_string(),
            log: Vec::new(),
            counter_start,
            counter_end: counter_start,
        });
    }
    let unit = front::parse(source).map_err(|e| InjectError::Syntax(e.to_string()))?;
    let existing: HashSet<&str> = unit
        .tokens
        .iter()
        .filter(|t| t.kind == TokenKind::Identifier)
        .map(|t| t.text.as_str())
        .collect();
    let indents = boundary_indents(&unit);
    let bug_type = profile.bug_type;

    let mut edits = Vec::new();
    let mut meta = Vec::new();
    let mut ordinals: HashMap<SnippetForm, usize> = HashMap::new();
    let mut placed_context: BTreeSet<(String, String)> = BTreeSet::new();

    for (idx, site) in profile.sites.iter().enumerate() {
        let counter = counter_start + idx as u64;
        let bug_id = format!("{}{}", bug_type.id_prefix(), counter);
        let (approach, entry_id) = match &site.kind {
            SiteKind::Snippet { form, offset, .. } => {
                let candidates: Vec<_> = pool
                    .snippets_for(bug_type)
                    .iter()
                    .filter(|s| s.form == *form)
                    .collect();
                if candidates.is_empty() {
                    return Err(InjectError::NoSnippet {
                        bug_type,
                        form: *form,
                    });
                }
                let ord = ordinals.entry(*form).or_default();
                let snippet = candidates[*ord % candidates.len()];
                *ord += 1;
                let body = instantiate(snippet, counter);
                for name in declared_names(*form, &body).map_err(InjectError::Syntax)? {
                    if existing.contains(name.as_str()) {
                        return Err(InjectError::IdentifierCollision(name));
                    }
                }
                let indent = indents
                    .get(offset)
                    .cloned()
                    .unwrap_or_else(|| line_indent(source, &unit.line_map, *offset));
                let mut payload = String::new();
                let contract = contract_at(&unit, *offset).unwrap_or("").to_string();
                for ctx in &snippet.required_context {
                    if placed_context.insert((contract.clone(), ctx.clone())) {
                        for name in declared_names(SnippetForm::FunctionDefinition, ctx)
                            .map_err(InjectError::Syntax)?
                        {
                            if existing.contains(name.as_str()) {
                                return Err(InjectError::IdentifierCollision(name));
                            }
                        }
                        payload.push_str(&reindent(ctx, &indent));
                        payload.push('\n');
                    }
                }
                payload.push_str(&reindent(&body, &indent));
                let mut text = String::from("\n");
                text.push_str(&payload);
                let logged = (1, text.len());
                if !rest_of_line(source, *offset).trim().is_empty() {
                    text.push('\n');
                }
                edits.push(Edit {
                    start: *offset,
                    end: *offset,
                    text,
                    site: idx,
                    logged,
                });
                (Approach::FullSnippet, snippet.id.clone())
            }
            SiteKind::Transform {
                pattern_id, span, ..
            } => {
                let pattern = pool
                    .transform(pattern_id)
                    .ok_or_else(|| InjectError::UnknownPoolEntry(pattern_id.clone()))?;
                let text = transform_text(&unit, span, pattern);
                edits.push(Edit::whole(span.start, span.end, text, idx));
                (Approach::CodeTransformation, pattern_id.clone())
            }
            SiteKind::Weaken {
                rule_id,
                shape,
                guard_span,
                span,
                arm_span,
                ..
            } => {
                if pool.weakening(rule_id).is_none() {
                    return Err(InjectError::UnknownPoolEntry(rule_id.clone()));
                }
                weaken_edits(
                    source,
                    &unit.line_map,
                    *shape,
                    guard_span,
                    span,
                    arm_span,
                    idx,
                    &mut edits,
                );
                (Approach::WeakenSecurity, rule_id.clone())
            }
        };
        meta.push((bug_id, approach, entry_id));
    }

    // Zero-width insertions sort before a replacement starting at the same byte.
    edits.sort_by_key(|e| (e.start, e.end > e.start, e.site));
    for w in edits.windows(2) {
        if w[1].start < w[0].end {
            return Err(InjectError::EditConflict {
                first_start: w[0].start,
                first_end: w[0].end,
                second_start: w[1].start,
                second_end: w[1].end,
            });
        }
    }

    // Output position of each edit: its original start shifted by the size
    // changes of every edit before it.
    let mut out_starts = Vec::with_capacity(edits.len());
    let mut delta: isize = 0;
    for e in &edits {
        out_starts.push((e.start as isize + delta) as usize);
        delta += e.text.len() as isize - (e.end - e.start) as isize;
    }

    let mut buggy = source.to_string();
    for e in edits.iter().rev() {
        buggy.replace_range(e.start..e.end, &e.text);
    }

    let mut ranges: Vec<Option<(usize, usize)>> = vec![None; profile.sites.len()];
    for (e, out) in edits.iter().zip(&out_starts) {
        let (a, b) = (out + e.logged.0, out + e.logged.1);
        let r = &mut ranges[e.site];
        *r = Some(match *r {
            Some((x, y)) => (x.min(a), y.max(b)),
            None => (a, b),
        });
    }
    let out_lines = LineMap::new(&buggy);
    let log = meta
        .into_iter()
        .zip(ranges)
        .map(|((bug_id, approach, entry_id), range)| {
            let (a, b) = range.expect("every site produces an edit");
            let span = out_lines.span(a, b);
            BugLogEntry {
                bug_id,
                bug_type,
                approach,
                snippet_id: Some(entry_id),
                file: file.to_string(),
                start_line: span.start_line,
                end_line: span.end_line,
                byte_start: a,
                byte_end: b,
            }
        })
        .collect();
    Ok(InjectionResult {
        buggy_source: buggy,
        log,
        counter_start,
        counter_end: counter_start + profile.sites.len() as u64,
    })
}

/// Length of the run of spaces and tabs starting at `offset`.
fn blank_run(text: &str, offset: usize) -> usize {
    text[offset..]
        .bytes()
        .take_while(|b| *b == b' ' || *b == b'\t')
        .count()
}

/// True when code (not just a comment) follows `offset` on its line.
fn code_follows(text: &str, offset: usize) -> bool {
    let rest = rest_of_line(text, offset).trim();
    !rest.is_empty() && !rest.starts_with("//")
}

#[allow(clippy::too_many_arguments)]
fn weaken_edits(
    source: &str,
    lines: &LineMap,
    shape: WeakenShape,
    guard: &front::Span,
    stmt: &front::Span,
    arm: &front::Span,
    site: usize,
    edits: &mut Vec<Edit>,
) {
    let indent = line_indent(source, lines, stmt.start);
    match shape {
        WeakenShape::RequireCall => {
            let text = stmt.slice(source);
            let open = text.find('(').map_or(0, |i| i + 1);
            let close = text.rfind(')').unwrap_or(text.len());
            let call = text[open..close].trim();
            let mut out = format!("{call};\n{indent}//{}", comment_continuations(text));
            let mut end = stmt.end;
            if code_follows(source, stmt.end) {
                end += blank_run(source, stmt.end);
                out.push('\n');
                out.push_str(&indent);
            }
            edits.push(Edit::whole(stmt.start, end, out, site));
        }
        WeakenShape::FailureBranch => {
            let commented = format!("//{}", comment_continuations(stmt.slice(source)));
            if arm == stmt {
                let guard_indent = line_indent(source, lines, guard.start);
                let text = format!("{{ {commented}\n{guard_indent}}}");
                edits.push(Edit::whole(stmt.start, stmt.end, text, site));
            } else {
                let mut text = commented;
                let mut end = stmt.end;
                if code_follows(source, stmt.end) {
                    end += blank_run(source, stmt.end);
                    text.push('\n');
                    text.push_str(&indent);
                }
                edits.push(Edit::whole(stmt.start, end, text, site));
            }
        }
    }
}

/// Prefixes every line after the first with `//`, after its indentation.
fn comment_continuations(text: &str) -> String {
    let mut lines = text.split('\n');
    let mut out = lines.next().unwrap_or("").to_string();
    for l in lines {
        let cut = l.len() - l.trim_start_matches([' ', '\t']).len();
        out.push('\n');
        out.push_str(&l[..cut]);
        out.push_str("//");
        out.push_str(&l[cut..]);
    }
    out
}
