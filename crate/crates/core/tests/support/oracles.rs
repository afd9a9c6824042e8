//! Independent checks shared by the integration and acceptance tests.
#![allow(dead_code)]

use std::collections::BTreeSet;

use solbugsmith::front::{parse, tokenize, Member, Stmt, TokenKind};
use solbugsmith::{BugLogEntry, InjectionProfile, InjectionResult, SiteKind, SnippetForm};

const PROBE: &str = "uint256 __probe;";

fn holds_probe(stmts: &[Stmt], text: &str) -> bool {
    let mut found = false;
    for s in stmts {
        s.walk(&mut |x| {
            if !x.opaque && x.text(text) == PROBE {
                found = true;
            }
        });
    }
    found
}

/// Offsets where a declaration statement can be spliced in, found by
/// trying every offset after a `{`, `;` or `}` and reparsing.
pub fn probe_statement_offsets(source: &str) -> BTreeSet<usize> {
    let tokens = tokenize(source).expect("source lexes");
    let mut out = BTreeSet::new();
    for t in tokens
        .iter()
        .filter(|t| t.kind == TokenKind::Punctuator && matches!(t.text.as_str(), "{" | ";" | "}"))
    {
        let at = t.span.end;
        let probed = format!("{}{PROBE}{}", &source[..at], &source[at..]);
        let Ok(unit) = parse(&probed) else { continue };
        let hit = unit
            .contracts
            .iter()
            .flat_map(|c| &c.members)
            .any(|m| match m {
                Member::Function(_) | Member::Constructor(_) | Member::Modifier(_) => m
                    .body()
                    .is_some_and(|b| holds_probe(&b.statements, &probed)),
                _ => false,
            });
        if hit {
            out.insert(at);
        }
    }
    out
}

pub fn simple_statement_sites(profile: &InjectionProfile) -> BTreeSet<usize> {
    profile
        .sites
        .iter()
        .filter_map(|s| match &s.kind {
            SiteKind::Snippet {
                form: SnippetForm::SimpleStatement,
                offset,
                ..
            } => Some(*offset),
            _ => None,
        })
        .collect()
}

fn strip_ws(s: &str) -> String {
    s.chars().filter(|c| !c.is_whitespace()).collect()
}

fn remove_ranges(text: &str, mut ranges: Vec<(usize, usize)>) -> String {
    ranges.sort();
    let mut out = String::new();
    let mut last = 0;
    for (a, b) in ranges {
        let a = a.max(last);
        out.push_str(&text[last..a.max(last)]);
        last = last.max(b);
    }
    out.push_str(&text[last..]);
    out
}

fn line_of(text: &str, offset: usize) -> usize {
    1 + text.as_bytes()[..offset]
        .iter()
        .filter(|b| **b == b'\n')
        .count()
}

/// Checks every log entry against the output file. Returns a description
/// of the first problem.
pub fn check_log_lines(
    original: &str,
    profile: &InjectionProfile,
    result: &InjectionResult,
) -> Result<(), String> {
    let out = &result.buggy_source;
    if result.log.len() != profile.sites.len() {
        return Err(format!(
            "{} sites but {} entries",
            profile.sites.len(),
            result.log.len()
        ));
    }
    for e in &result.log {
        check_entry(out, e)?;
    }
    let touched: Vec<(usize, usize)> = profile
        .sites
        .iter()
        .map(|s| match &s.kind {
            SiteKind::Snippet { offset, .. } => (*offset, *offset),
            SiteKind::Transform { span, .. } => (span.start, span.end),
            SiteKind::Weaken { span, .. } => (span.start, span.end),
        })
        .collect();
    let logged: Vec<(usize, usize)> = result
        .log
        .iter()
        .map(|e| (e.byte_start, e.byte_end))
        .collect();
    let before = strip_ws(&remove_ranges(original, touched));
    let after = strip_ws(&remove_ranges(out, logged));
    if before != after {
        let at = before
            .chars()
            .zip(after.chars())
            .take_while(|(a, b)| a == b)
            .count();
        return Err(format!(
            "injected bytes outside the logged ranges near `{}`",
            after
                .chars()
                .skip(at.saturating_sub(20))
                .take(60)
                .collect::<String>()
        ));
    }
    Ok(())
}

fn check_entry(out: &str, e: &BugLogEntry) -> Result<(), String> {
    if e.byte_start >= e.byte_end || e.byte_end > out.len() {
        return Err(format!("{}: empty or out-of-range bytes", e.bug_id));
    }
    let first = line_of(out, e.byte_start);
    let last = line_of(out, e.byte_end - 1);
    if (first, last) != (e.start_line, e.end_line) {
        return Err(format!(
            "{}: logged lines {}-{}, bytes sit on {first}-{last}",
            e.bug_id, e.start_line, e.end_line
        ));
    }
    let lines: Vec<&str> = out.split_inclusive('\n').collect();
    let slice: String = lines[e.start_line - 1..e.end_line].concat();
    if !slice.contains(&out[e.byte_start..e.byte_end]) {
        return Err(format!("{}: line slice misses the injected text", e.bug_id));
    }
    Ok(())
}
