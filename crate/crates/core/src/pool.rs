//! Registry of bug snippets, transformation patterns and weakening rules.

use std::collections::{BTreeMap, BTreeSet, HashSet};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use serde_json::Value;
use thiserror::Error;

use crate::front::{self, lexer, Member, Stmt, StmtKind, TokenKind};

const DEFAULT_POOL: &str = include_str!("../data/default_pool.json");

/// Placeholder replaced by the per-bug counter.
pub const COUNTER_PLACEHOLDER: &str = "{N}";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum BugType {
    Reentrancy,
    TimestampDependency,
    UncheckedSend,
    UnhandledException,
    TOD,
    IntegerOverflowUnderflow,
    TxOrigin,
}

impl BugType {
    pub const ALL: [BugType; 7] = [
        BugType::Reentrancy,
        BugType::TimestampDependency,
        BugType::UncheckedSend,
        BugType::UnhandledException,
        BugType::TOD,
        BugType::IntegerOverflowUnderflow,
        BugType::TxOrigin,
    ];

    pub fn name(self) -> &'static str {
        match self {
            BugType::Reentrancy => "Reentrancy",
            BugType::TimestampDependency => "TimestampDependency",
            BugType::UncheckedSend => "UncheckedSend",
            BugType::UnhandledException => "UnhandledException",
            BugType::TOD => "TOD",
            BugType::IntegerOverflowUnderflow => "IntegerOverflowUnderflow",
            BugType::TxOrigin => "TxOrigin",
        }
    }

    /// Prefix of the bug ids written to the log, e.g. `bug_reEntrancy`.
    pub fn id_prefix(self) -> &'static str {
        match self {
            BugType::Reentrancy => "bug_reEntrancy",
            BugType::TimestampDependency => "bug_tmstmp",
            BugType::UncheckedSend => "bug_unchkSend",
            BugType::UnhandledException => "bug_unhandled",
            BugType::TOD => "bug_tod",
            BugType::IntegerOverflowUnderflow => "bug_intou",
            BugType::TxOrigin => "bug_txorigin",
        }
    }
}

impl fmt::Display for BugType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("unknown bug type `{0}`")]
pub struct UnknownBugType(pub String);

impl FromStr for BugType {
    type Err = UnknownBugType;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        BugType::ALL
            .into_iter()
            .find(|t| t.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| UnknownBugType(s.to_string()))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum SnippetForm {
    SimpleStatement,
    NonFunctionBlock,
    FunctionDefinition,
}

impl SnippetForm {
    pub const ALL: [SnippetForm; 3] = [
        SnippetForm::SimpleStatement,
        SnippetForm::NonFunctionBlock,
        SnippetForm::FunctionDefinition,
    ];

    pub fn is_statement(self) -> bool {
        self != SnippetForm::FunctionDefinition
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
pub struct BugSnippet {
    pub id: String,
    pub bug_type: BugType,
    pub form: SnippetForm,
    pub template: String,
    /// Declarations shared by every instance in one contract.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub required_context: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
pub struct TransformPattern {
    pub id: String,
    pub bug_type: BugType,
    #[serde(rename = "match")]
    pub pattern: String,
    pub replace: String,
}

impl TransformPattern {
    /// Significant token texts of the pattern.
    pub fn match_tokens(&self) -> Vec<String> {
        token_texts(&self.pattern)
    }

    pub fn replace_tokens(&self) -> Vec<String> {
        token_texts(&self.replace)
    }
}

fn token_texts(text: &str) -> Vec<String> {
    lexer::tokenize(text)
        .map(|ts| {
            ts.into_iter()
                .filter(|t| !t.is_trivia())
                .map(|t| t.text)
                .collect()
        })
        .unwrap_or_default()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub enum Protection {
    Revert,
    Throw,
    RequireFalse,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
pub struct GuardShape {
    /// Member names treated as send-like calls, e.g. `send`.
    pub send_like: Vec<String>,
    pub protections: Vec<Protection>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub enum WeakenAction {
    CommentOutStatement,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
pub struct WeakeningRule {
    pub id: String,
    pub bug_type: BugType,
    pub guard_shape: GuardShape,
    pub action: WeakenAction,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("pool entry `{entry_id}`: {reason}")]
pub struct PoolError {
    pub entry_id: String,
    pub reason: String,
}

impl PoolError {
    fn new(entry_id: impl Into<String>, reason: impl Into<String>) -> Self {
        PoolError {
            entry_id: entry_id.into(),
            reason: reason.into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BugPool {
    pub snippets: BTreeMap<BugType, Vec<BugSnippet>>,
    pub transforms: BTreeMap<BugType, Vec<TransformPattern>>,
    pub weakenings: BTreeMap<BugType, Vec<WeakeningRule>>,
}

#[derive(Serialize)]
struct PoolDoc<'a> {
    snippets: Vec<&'a BugSnippet>,
    transforms: Vec<&'a TransformPattern>,
    weakenings: Vec<&'a WeakeningRule>,
}

impl Default for BugPool {
    fn default() -> Self {
        fn keyed<T>() -> BTreeMap<BugType, Vec<T>> {
            BugType::ALL.into_iter().map(|t| (t, Vec::new())).collect()
        }
        BugPool {
            snippets: keyed(),
            transforms: keyed(),
            weakenings: keyed(),
        }
    }
}

impl BugPool {
    pub fn snippets_for(&self, bug_type: BugType) -> &[BugSnippet] {
        self.snippets.get(&bug_type).map_or(&[], Vec::as_slice)
    }

    pub fn transforms_for(&self, bug_type: BugType) -> &[TransformPattern] {
        self.transforms.get(&bug_type).map_or(&[], Vec::as_slice)
    }

    pub fn weakenings_for(&self, bug_type: BugType) -> &[WeakeningRule] {
        self.weakenings.get(&bug_type).map_or(&[], Vec::as_slice)
    }

    /// Snippet forms present for `bug_type`, in declaration order of the enum.
    pub fn forms_for(&self, bug_type: BugType) -> Vec<SnippetForm> {
        let present: BTreeSet<_> = self.snippets_for(bug_type).iter().map(|s| s.form).collect();
        present.into_iter().collect()
    }

    pub fn snippet(&self, id: &str) -> Option<&BugSnippet> {
        self.snippets.values().flatten().find(|s| s.id == id)
    }

    pub fn transform(&self, id: &str) -> Option<&TransformPattern> {
        self.transforms.values().flatten().find(|s| s.id == id)
    }

    pub fn weakening(&self, id: &str) -> Option<&WeakeningRule> {
        self.weakenings.values().flatten().find(|s| s.id == id)
    }

    /// Serializes to the config document accepted by [`load_pool`].
    pub fn to_json(&self) -> String {
        let doc = PoolDoc {
            snippets: self.snippets.values().flatten().collect(),
            transforms: self.transforms.values().flatten().collect(),
            weakenings: self.weakenings.values().flatten().collect(),
        };
        serde_json::to_string_pretty(&doc).expect("pool serializes")
    }
}

/// Replaces every counter placeholder with `counter`.
pub fn instantiate(snippet: &BugSnippet, counter: u64) -> String {
    snippet
        .template
        .replace(COUNTER_PLACEHOLDER, &counter.to_string())
}

pub fn default_pool() -> BugPool {
    load_pool(DEFAULT_POOL).expect("bundled pool is valid")
}

fn entries<'v>(doc: &'v Value, key: &str) -> Result<Vec<(String, &'v Value)>, PoolError> {
    match doc.get(key) {
        None | Some(Value::Null) => Ok(Vec::new()),
        Some(Value::Array(items)) => Ok(items
            .iter()
            .enumerate()
            .map(|(i, v)| {
                let id = v
                    .get("id")
                    .and_then(Value::as_str)
                    .map_or_else(|| format!("{key}[{i}]"), str::to_string);
                (id, v)
            })
            .collect()),
        Some(_) => Err(PoolError::new(key, "expected an array")),
    }
}

fn decode<T: serde::de::DeserializeOwned>(id: &str, v: &Value) -> Result<T, PoolError> {
    T::deserialize(v).map_err(|e| PoolError::new(id, e.to_string()))
}

/// Parses and validates a pool config document.
pub fn load_pool(config: &str) -> Result<BugPool, PoolError> {
    let doc: Value = if config.trim().is_empty() {
        Value::Object(Default::default())
    } else {
        serde_json::from_str(config).map_err(|e| PoolError::new("<document>", e.to_string()))?
    };
    if !doc.is_object() {
        return Err(PoolError::new("<document>", "expected a JSON object"));
    }
    let mut pool = BugPool::default();
    let mut ids = HashSet::new();
    let mut claim = |id: &str| {
        if ids.insert(id.to_string()) {
            Ok(())
        } else {
            Err(PoolError::new(id, "duplicate id"))
        }
    };
    for (id, v) in entries(&doc, "snippets")? {
        let s: BugSnippet = decode(&id, v)?;
        claim(&s.id)?;
        check_snippet(&s)?;
        pool.snippets.entry(s.bug_type).or_default().push(s);
    }
    for (id, v) in entries(&doc, "transforms")? {
        let t: TransformPattern = decode(&id, v)?;
        claim(&t.id)?;
        check_transform(&t)?;
        pool.transforms.entry(t.bug_type).or_default().push(t);
    }
    for (id, v) in entries(&doc, "weakenings")? {
        let w: WeakeningRule = decode(&id, v)?;
        claim(&w.id)?;
        if w.guard_shape.send_like.is_empty() || w.guard_shape.protections.is_empty() {
            return Err(PoolError::new(
                &w.id,
                "guard shape needs send-like calls and protections",
            ));
        }
        pool.weakenings.entry(w.bug_type).or_default().push(w);
    }
    check_contexts(&pool)?;
    Ok(pool)
}

const SNIPPET_CONTRACT: &str = "__Snippet";
const SNIPPET_FUNCTION: &str = "__snippetHost";

/// Wraps instantiated snippet text in a minimal contract.
pub fn wrap_snippet(form: SnippetForm, text: &str, context: &[String]) -> String {
    let ctx = context.join("\n");
    if form == SnippetForm::FunctionDefinition {
        format!("contract {SNIPPET_CONTRACT} {{\n{ctx}\n{text}\n}}\n")
    } else {
        format!(
            "contract {SNIPPET_CONTRACT} {{\n{ctx}\nfunction {SNIPPET_FUNCTION}() public {{\n{text}\n}}\n}}\n"
        )
    }
}

/// Names that an instantiated snippet adds to its enclosing scope: member
/// names for function definitions, local variables for statements.
pub fn declared_names(form: SnippetForm, text: &str) -> Result<Vec<String>, String> {
    if form == SnippetForm::FunctionDefinition {
        let members = front::parse_members(text).map_err(|e| e.to_string())?;
        Ok(members
            .iter()
            .filter_map(|m| m.name().filter(|n| !n.is_empty()).map(str::to_string))
            .filter(|n| n != "constructor")
            .collect())
    } else {
        let stmts = front::parse_statements(text).map_err(|e| e.to_string())?;
        let mut out = Vec::new();
        for s in &stmts {
            s.walk(&mut |st| {
                if st.kind == StmtKind::LocalVarDecl {
                    out.extend(local_names(st.text(text)));
                }
            });
        }
        Ok(out)
    }
}

/// Variable names introduced by one local declaration statement.
pub(crate) fn local_names(decl: &str) -> Vec<String> {
    let Ok(tokens) = lexer::tokenize(decl) else {
        return Vec::new();
    };
    let sig: Vec<_> = tokens.iter().filter(|t| !t.is_trivia()).collect();
    let end = sig
        .iter()
        .position(|t| t.is("=") || t.is(";"))
        .unwrap_or(sig.len());
    let head = &sig[..end];
    if head.first().is_some_and(|t| t.is("(")) {
        head.windows(2)
            .filter(|w| w[0].kind == TokenKind::Identifier && (w[1].is(",") || w[1].is(")")))
            .map(|w| w[0].text.clone())
            .collect()
    } else {
        head.last()
            .filter(|t| t.kind == TokenKind::Identifier)
            .map(|t| vec![t.text.clone()])
            .unwrap_or_default()
    }
}

fn leaf_count(stmts: &[Stmt]) -> Option<StmtKind> {
    match stmts {
        [s] if !s.kind.is_compound() && !s.opaque => Some(s.kind),
        _ => None,
    }
}

fn check_snippet(s: &BugSnippet) -> Result<(), PoolError> {
    let fail = |reason: String| PoolError::new(&s.id, reason);
    if !s.template.contains(COUNTER_PLACEHOLDER) {
        return Err(fail(format!(
            "template has no {COUNTER_PLACEHOLDER} placeholder"
        )));
    }
    if !s.required_context.is_empty() && s.form != SnippetForm::FunctionDefinition {
        return Err(fail(
            "required context is only supported for function definitions".into(),
        ));
    }
    for ctx in &s.required_context {
        let members = front::parse_members(ctx).map_err(|e| fail(format!("context: {e}")))?;
        if members.iter().any(|m| matches!(m, Member::Opaque(_))) {
            return Err(fail("context must be plain member declarations".into()));
        }
    }
    let text = instantiate(s, 0);
    match s.form {
        SnippetForm::FunctionDefinition => {
            let members = front::parse_members(&text).map_err(|e| fail(e.to_string()))?;
            if members.is_empty() || members.iter().any(|m| matches!(m, Member::Opaque(_))) {
                return Err(fail("expected one or more member definitions".into()));
            }
        }
        SnippetForm::SimpleStatement | SnippetForm::NonFunctionBlock => {
            let stmts = front::parse_statements(&text).map_err(|e| fail(e.to_string()))?;
            let mut opaque = false;
            for st in &stmts {
                st.walk(&mut |x| opaque |= x.opaque);
            }
            if stmts.is_empty() || opaque {
                return Err(fail("expected supported statements".into()));
            }
            let single = leaf_count(&stmts).is_some();
            if single != (s.form == SnippetForm::SimpleStatement) {
                return Err(fail(if single {
                    "a single simple statement must use the SimpleStatement form".into()
                } else {
                    "SimpleStatement form needs exactly one non-compound statement".into()
                }));
            }
            if stmts.iter().any(|st| st.kind == StmtKind::ReturnStmt) {
                return Err(fail("statement snippets must not return".into()));
            }
        }
    }
    let wrapped = wrap_snippet(s.form, &text, &s.required_context);
    front::validate(&wrapped).map_err(|d| fail(d[0].to_string()))?;
    let zero: BTreeSet<_> = declared_names(s.form, &text)
        .map_err(fail)?
        .into_iter()
        .collect();
    let one: BTreeSet<_> = declared_names(s.form, &instantiate(s, 1))
        .map_err(fail)?
        .into_iter()
        .collect();
    if let Some(fixed) = zero.intersection(&one).next() {
        return Err(fail(format!(
            "declared identifier `{fixed}` lacks the {COUNTER_PLACEHOLDER} placeholder"
        )));
    }
    Ok(())
}

/// Whether `text` reads as a type and whether it reads as an expression.
/// Dotted names such as `a.b` are both.
fn categories(text: &str) -> (bool, bool) {
    let is_type = front::parse_members(&format!("{text} __probe;"))
        .is_ok_and(|m| matches!(m.as_slice(), [Member::StateVar(_)]));
    let elementary = front::lexer::is_elementary_type(text.trim());
    let is_expr = !elementary
        && front::parse_statements(&format!("__probe = {text};"))
            .is_ok_and(|s| matches!(s.as_slice(), [s] if s.kind == StmtKind::Assignment));
    (is_type, is_expr)
}

fn check_transform(t: &TransformPattern) -> Result<(), PoolError> {
    let fail = |reason: &str| PoolError::new(&t.id, reason);
    if t.match_tokens().is_empty() || t.replace_tokens().is_empty() {
        return Err(fail("match and replace must be non-empty token sequences"));
    }
    let from = categories(&t.pattern);
    let to = categories(&t.replace);
    if from == (false, false) {
        return Err(fail("match is neither a type nor an expression"));
    }
    if to == (false, false) {
        return Err(fail("replace is neither a type nor an expression"));
    }
    if !(from.0 && to.0 || from.1 && to.1) {
        return Err(fail(
            "match and replace have different syntactic categories",
        ));
    }
    Ok(())
}

/// Contexts from different snippets that declare the same name must be the
/// same text, so that one copy can serve both.
fn check_contexts(pool: &BugPool) -> Result<(), PoolError> {
    let mut by_name: BTreeMap<String, (&str, &str)> = BTreeMap::new();
    for s in pool.snippets.values().flatten() {
        for ctx in &s.required_context {
            let names = declared_names(SnippetForm::FunctionDefinition, ctx)
                .map_err(|e| PoolError::new(&s.id, e))?;
            for n in names {
                match by_name.get(&n) {
                    Some((text, _)) if *text != ctx.as_str() => {
                        return Err(PoolError::new(
                            &s.id,
                            format!("context for `{n}` differs from the one declared elsewhere"),
                        ))
                    }
                    _ => {
                        by_name.insert(n, (ctx.as_str(), s.id.as_str()));
                    }
                }
            }
        }
    }
    Ok(())
}
