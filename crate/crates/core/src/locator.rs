//! Enumeration of every valid injection site for a (source, bug type) pair.

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::front::{ContractKind, Member, SourceUnit, Span, Stmt, StmtKind, Token, TokenKind};
use crate::pool::{BugPool, BugType, Protection, SnippetForm, TransformPattern, WeakeningRule};

/// How a weakening site disables its protection.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub enum WeakenShape {
    /// `if (!x.send(..)) { revert(); }`: the protection is commented out.
    FailureBranch,
    /// `require(x.send(..));`: the call is kept and the require dropped.
    RequireCall,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "camelCase")]
pub enum SiteKind {
    #[serde(rename_all = "camelCase")]
    Snippet {
        form: SnippetForm,
        offset: usize,
        line: usize,
    },
    #[serde(rename_all = "camelCase")]
    Transform {
        pattern_id: String,
        span: Span,
        line: usize,
    },
    #[serde(rename_all = "camelCase")]
    Weaken {
        rule_id: String,
        shape: WeakenShape,
        guard_span: Span,
        /// The protection statement itself.
        span: Span,
        /// The failure arm holding the protection; equal to `span` when the
        /// arm is the bare statement.
        arm_span: Span,
        line: usize,
    },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct InjectionSite {
    #[serde(flatten)]
    pub kind: SiteKind,
    /// Contract, member and statement path leading to the site.
    pub enclosing: Vec<String>,
}

impl InjectionSite {
    /// First byte the site touches.
    pub fn start(&self) -> usize {
        match &self.kind {
            SiteKind::Snippet { offset, .. } => *offset,
            SiteKind::Transform { span, .. } | SiteKind::Weaken { span, .. } => span.start,
        }
    }

    pub fn line(&self) -> usize {
        match &self.kind {
            SiteKind::Snippet { line, .. }
            | SiteKind::Transform { line, .. }
            | SiteKind::Weaken { line, .. } => *line,
        }
    }

    fn order_key(&self) -> (usize, u8, Option<SnippetForm>) {
        match &self.kind {
            SiteKind::Snippet { form, offset, .. } => (*offset, 0, Some(*form)),
            SiteKind::Transform { span, .. } => (span.start, 1, None),
            SiteKind::Weaken { span, .. } => (span.start, 2, None),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct InjectionProfile {
    pub source_id: String,
    pub bug_type: BugType,
    /// SHA-256 of the source the profile was computed from.
    pub content_hash: String,
    pub sites: Vec<InjectionSite>,
}

impl InjectionProfile {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("profile serializes")
    }
}

pub fn content_hash(text: &str) -> String {
    hex::encode(Sha256::digest(text.as_bytes()))
}

/// All snippet, transformation and weakening sites for `bug_type`.
pub fn find_all_potential_locations(
    unit: &SourceUnit,
    bug_type: BugType,
    pool: &BugPool,
    source_id: &str,
) -> InjectionProfile {
    let mut sites = Vec::new();
    for form in pool.forms_for(bug_type) {
        sites.extend(walk_for_form(unit, form));
    }
    sites.extend(find_security_mechanisms(unit, pool, bug_type));
    sites.extend(find_transformable_code(unit, pool.transforms_for(bug_type)));
    sites.sort_by_key(InjectionSite::order_key);
    InjectionProfile {
        source_id: source_id.to_string(),
        bug_type,
        content_hash: content_hash(&unit.raw_text),
        sites,
    }
}

fn member_label(m: &Member) -> String {
    match m {
        Member::Function(f) if f.name.is_empty() => "function()".to_string(),
        Member::Modifier(d) => format!("modifier {}", d.name),
        _ => m.name().unwrap_or("?").to_string(),
    }
}

/// Boundaries where a snippet of `form` may be inserted.
pub fn walk_for_form(unit: &SourceUnit, form: SnippetForm) -> Vec<InjectionSite> {
    let mut out = Vec::new();
    let mut push = |offset: usize, enclosing: Vec<String>| {
        out.push(InjectionSite {
            kind: SiteKind::Snippet {
                form,
                offset,
                line: unit.line_of(offset).unwrap_or(1),
            },
            enclosing,
        })
    };
    for c in &unit.contracts {
        if form == SnippetForm::FunctionDefinition {
            // Snippets may declare state variables, which interfaces and
            // libraries cannot hold.
            if c.kind != ContractKind::Contract {
                continue;
            }
            push(c.body_span.start, vec![c.name.clone()]);
            for m in &c.members {
                push(m.span().end, vec![c.name.clone()]);
            }
            continue;
        }
        for m in &c.members {
            let Some(body) = m.body() else { continue };
            let path = vec![c.name.clone(), member_label(m)];
            statement_boundaries(body.span.start, &body.statements, &path, &mut push);
        }
    }
    out.sort_by_key(InjectionSite::order_key);
    out
}

fn statement_boundaries(
    open: usize,
    stmts: &[Stmt],
    path: &[String],
    push: &mut impl FnMut(usize, Vec<String>),
) {
    push(open, path.to_vec());
    for (i, s) in stmts.iter().enumerate() {
        let mut here = path.to_vec();
        here.push(i.to_string());
        if !s.opaque {
            descend(s, &here, push);
        }
        push(s.span.end, path.to_vec());
    }
}

/// Visits the statement lists nested in `s`, including those reached
/// through non-block arms such as `else if` or a loop whose body is an `if`.
fn descend(s: &Stmt, path: &[String], push: &mut impl FnMut(usize, Vec<String>)) {
    match s.kind {
        StmtKind::Block => statement_boundaries(s.span.start + 1, &s.children, path, push),
        StmtKind::IfStmt | StmtKind::ForStmt | StmtKind::WhileStmt => {
            for (j, arm) in s.children.iter().enumerate() {
                if arm.opaque {
                    continue;
                }
                let mut inner = path.to_vec();
                inner.push(match (s.kind, j) {
                    (StmtKind::IfStmt, 0) => "then".to_string(),
                    (StmtKind::IfStmt, _) => "else".to_string(),
                    _ => "body".to_string(),
                });
                if arm.kind == StmtKind::Block {
                    statement_boundaries(arm.span.start + 1, &arm.children, &inner, push);
                } else {
                    descend(arm, &inner, push);
                }
            }
        }
        _ => {}
    }
}

fn significant(tokens: &[Token], span: &Span) -> Vec<Token> {
    tokens
        .iter()
        .filter(|t| !t.is_trivia() && span.contains(&t.span))
        .cloned()
        .collect()
}

/// True when `tokens` contain `.name(` or `.name.` for a send-like name.
fn has_send_like(tokens: &[Token], send_like: &[String]) -> bool {
    tokens.windows(3).any(|w| {
        w[0].is(".")
            && w[1].kind == TokenKind::Identifier
            && send_like.contains(&w[1].text)
            && (w[2].is("(") || w[2].is("."))
    })
}

fn protection_of(unit: &SourceUnit, s: &Stmt) -> Option<Protection> {
    if s.opaque {
        return None;
    }
    let text = unit.text(&s.span);
    match s.kind {
        StmtKind::RevertStmt if text.starts_with("throw") => Some(Protection::Throw),
        StmtKind::RevertStmt => Some(Protection::Revert),
        StmtKind::RequireStmt => {
            let toks = significant(&unit.tokens, &s.span);
            let args: Vec<_> = toks.iter().map(|t| t.text.as_str()).collect();
            (args == ["require", "(", "false", ")", ";"]).then_some(Protection::RequireFalse)
        }
        _ => None,
    }
}

/// The branch taken when the guarded call fails.
fn failure_arm<'s>(unit: &SourceUnit, s: &'s Stmt) -> Option<&'s Stmt> {
    let cond = s.condition?;
    let toks = significant(&unit.tokens, &cond);
    let negated = toks.first().is_some_and(|t| t.is("!"))
        || toks.len() >= 2 && toks[toks.len() - 2].is("==") && toks[toks.len() - 1].is("false");
    if negated {
        s.then_arm()
    } else {
        s.else_arm()
    }
}

/// Guarded send-like calls whose failure branch carries a protection.
pub fn find_security_mechanisms(
    unit: &SourceUnit,
    pool: &BugPool,
    bug_type: BugType,
) -> Vec<InjectionSite> {
    let mut out = Vec::new();
    for rule in pool.weakenings_for(bug_type) {
        for c in &unit.contracts {
            for m in &c.members {
                let Some(body) = m.body() else { continue };
                let path = vec![c.name.clone(), member_label(m)];
                for s in &body.statements {
                    s.walk(&mut |st| {
                        if let Some(site) = weaken_site(unit, rule, st, &path) {
                            out.push(site);
                        }
                    });
                }
            }
        }
    }
    out.sort_by_key(InjectionSite::order_key);
    out.dedup_by_key(|s| s.start());
    out
}

fn weaken_site(
    unit: &SourceUnit,
    rule: &WeakeningRule,
    st: &Stmt,
    path: &[String],
) -> Option<InjectionSite> {
    if st.opaque {
        return None;
    }
    let shape = &rule.guard_shape;
    let site = |kind_shape, span: Span, arm_span| InjectionSite {
        kind: SiteKind::Weaken {
            rule_id: rule.id.clone(),
            shape: kind_shape,
            guard_span: st.span,
            span,
            arm_span,
            line: span.start_line,
        },
        enclosing: path.to_vec(),
    };
    match st.kind {
        StmtKind::IfStmt => {
            let cond = significant(&unit.tokens, &st.condition?);
            if !has_send_like(&cond, &shape.send_like) {
                return None;
            }
            let arm = failure_arm(unit, st)?;
            let candidates: &[Stmt] = if arm.kind == StmtKind::Block {
                &arm.children
            } else {
                std::slice::from_ref(arm)
            };
            let hit = candidates
                .iter()
                .find(|c| protection_of(unit, c).is_some_and(|p| shape.protections.contains(&p)))?;
            Some(site(WeakenShape::FailureBranch, hit.span, arm.span))
        }
        StmtKind::RequireStmt if is_require_of_send(unit, st, &shape.send_like) => {
            Some(site(WeakenShape::RequireCall, st.span, st.span))
        }
        _ => None,
    }
}

/// `require(a.b.send(x));` with the call as the only argument.
fn is_require_of_send(unit: &SourceUnit, st: &Stmt, send_like: &[String]) -> bool {
    let toks = significant(&unit.tokens, &st.span);
    // require ( <arg> ) ;
    if toks.len() < 5 || !toks[toks.len() - 2].is(")") {
        return false;
    }
    let arg = &toks[2..toks.len() - 2];
    if !has_send_like(arg, send_like) || !arg.last().is_some_and(|t| t.is(")")) {
        return false;
    }
    // Depth-zero tokens must form a plain call chain.
    let mut depth = 0usize;
    let mut prev_word = false;
    for t in arg {
        match t.text.as_str() {
            "(" | "[" if t.kind == TokenKind::Punctuator => depth += 1,
            ")" | "]" if t.kind == TokenKind::Punctuator => {
                depth -= 1;
                prev_word = true;
                continue;
            }
            _ if depth > 0 => {}
            "." if t.kind == TokenKind::Punctuator => prev_word = false,
            _ if matches!(t.kind, TokenKind::Identifier | TokenKind::Keyword) && !prev_word => {
                prev_word = true
            }
            _ => return false,
        }
    }
    depth == 0
}

/// Token-level matches of `patterns`, leftmost-longest, outside opaque nodes.
pub fn find_transformable_code(
    unit: &SourceUnit,
    patterns: &[TransformPattern],
) -> Vec<InjectionSite> {
    if patterns.is_empty() {
        return Vec::new();
    }
    let compiled: Vec<(&TransformPattern, Vec<String>)> =
        patterns.iter().map(|p| (p, p.match_tokens())).collect();
    let opaque = unit.opaque_spans();
    let sig: Vec<&Token> = unit.tokens.iter().filter(|t| !t.is_trivia()).collect();
    let mut out = Vec::new();
    let mut i = 0;
    while i < sig.len() {
        let mut best: Option<&(&TransformPattern, Vec<String>)> = None;
        for cand in &compiled {
            let fits = cand.1.len() <= sig.len() - i
                && cand.1.iter().zip(&sig[i..]).all(|(want, t)| t.is(want));
            // Strictly longer only, so the earliest pattern wins ties.
            if fits && best.is_none_or(|b| cand.1.len() > b.1.len()) {
                best = Some(cand);
            }
        }
        let Some((pattern, toks)) = best else {
            i += 1;
            continue;
        };
        let last = sig[i + toks.len() - 1];
        let span = unit.line_map.span(sig[i].span.start, last.span.end);
        if opaque.iter().any(|o| o.overlaps(&span)) {
            i += 1;
            continue;
        }
        out.push(InjectionSite {
            kind: SiteKind::Transform {
                pattern_id: pattern.id.clone(),
                span,
                line: span.start_line,
            },
            enclosing: enclosing_path(unit, span.start),
        });
        i += toks.len();
    }
    out
}

fn enclosing_path(unit: &SourceUnit, offset: usize) -> Vec<String> {
    let mut path = Vec::new();
    for c in &unit.contracts {
        if c.span.start <= offset && offset < c.span.end {
            path.push(c.name.clone());
            if let Some(m) = c
                .members
                .iter()
                .find(|m| m.span().start <= offset && offset < m.span().end)
            {
                path.push(member_label(m));
            }
        }
    }
    path
}
