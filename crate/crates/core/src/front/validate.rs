use std::collections::HashMap;
use std::fmt;

use serde::Serialize;

use super::ast::{ContractDef, Member, Param, SourceUnit};
use super::lexer::TokenKind;
use super::parser::{parse, SyntaxError};

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Diagnostic {
    pub line: usize,
    pub column: usize,
    pub message: String,
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}: {}", self.line, self.column, self.message)
    }
}

impl From<&SyntaxError> for Diagnostic {
    fn from(e: &SyntaxError) -> Self {
        let (line, column) = e.position();
        let message = match e {
            SyntaxError::Lex(l) => l.message.clone(),
            SyntaxError::Parse(p) => {
                if p.found == "nested function definition" {
                    p.found.clone()
                } else {
                    let mut m = format!("expected {}, found {}", p.expected, p.found);
                    if let Some((l, c)) = p.unclosed {
                        m.push_str(&format!(" (unclosed delimiter opened at {l}:{c})"));
                    }
                    m
                }
            }
        };
        Diagnostic {
            line,
            column,
            message,
        }
    }
}

/// Validates raw bytes, rejecting anything that is not UTF-8.
pub fn validate_bytes(bytes: &[u8]) -> Result<(), Vec<Diagnostic>> {
    match std::str::from_utf8(bytes) {
        Ok(text) => validate(text),
        Err(e) => {
            let offset = e.valid_up_to();
            let line = 1 + bytes[..offset].iter().filter(|b| **b == b'\n').count();
            let line_start = bytes[..offset]
                .iter()
                .rposition(|b| *b == b'\n')
                .map_or(0, |i| i + 1);
            Err(vec![Diagnostic {
                line,
                column: offset - line_start + 1,
                message: "source is not valid UTF-8".to_string(),
            }])
        }
    }
}

/// Accepts a source iff it parses, its delimiters balance, and no contract
/// declares the same name twice.
pub fn validate(source: &str) -> Result<(), Vec<Diagnostic>> {
    let unit = parse(source).map_err(|e| vec![Diagnostic::from(&e)])?;
    let mut diags = delimiter_balance(&unit);
    diags.extend(duplicates(&unit));
    if diags.is_empty() {
        Ok(())
    } else {
        Err(diags)
    }
}

fn delimiter_balance(unit: &SourceUnit) -> Vec<Diagnostic> {
    let mut stack = Vec::new();
    let mut diags = Vec::new();
    let at = |offset: usize, message: String| {
        let (line, column) = unit.line_map.line_col(offset).unwrap_or((0, 0));
        Diagnostic {
            line,
            column,
            message,
        }
    };
    for t in unit
        .tokens
        .iter()
        .filter(|t| t.kind == TokenKind::Punctuator)
    {
        match t.text.as_str() {
            "(" | "[" | "{" => stack.push(t),
            close @ (")" | "]" | "}") => {
                let want = match close {
                    ")" => "(",
                    "]" => "[",
                    _ => "{",
                };
                match stack.pop() {
                    Some(open) if open.text == want => {}
                    _ => diags.push(at(t.span.start, format!("unbalanced `{close}`"))),
                }
            }
            _ => {}
        }
    }
    for open in stack {
        diags.push(at(open.span.start, format!("unclosed `{}`", open.text)));
    }
    diags
}

fn param_types(params: &[Param]) -> Vec<String> {
    params.iter().map(|p| p.type_name.clone()).collect()
}

fn duplicates(unit: &SourceUnit) -> Vec<Diagnostic> {
    let mut diags = Vec::new();
    let mut contracts: HashMap<&str, usize> = HashMap::new();
    for c in &unit.contracts {
        if contracts.insert(&c.name, c.span.start).is_some() {
            diags.push(Diagnostic {
                line: c.span.start_line,
                column: 1,
                message: format!("duplicate declaration of contract `{}`", c.name),
            });
        }
        diags.extend(member_duplicates(c));
    }
    diags
}

/// Member kind and, for overloadable kinds, parameter types.
type Declared = (&'static str, Option<Vec<String>>);

/// Functions and events may share a name when their parameter types
/// differ; every other name must be unique in its contract.
fn member_duplicates(c: &ContractDef) -> Vec<Diagnostic> {
    let mut seen: HashMap<&str, Vec<Declared>> = HashMap::new();
    let mut diags = Vec::new();
    for m in &c.members {
        let (name, entry) = match m {
            Member::StateVar(v) => (v.name.as_str(), ("var", None)),
            Member::Function(f) if !f.name.is_empty() => {
                (f.name.as_str(), ("function", Some(param_types(&f.params))))
            }
            Member::Modifier(d) => (d.name.as_str(), ("modifier", None)),
            Member::Event(e) => (e.name.as_str(), ("event", Some(param_types(&e.params)))),
            _ => continue,
        };
        let prior = seen.entry(name).or_default();
        let clash = prior.iter().any(|(kind, sig)| match (sig, &entry.1) {
            (Some(a), Some(b)) if *kind == entry.0 => a == b,
            _ => true,
        });
        if clash {
            diags.push(Diagnostic {
                line: m.span().start_line,
                column: 1,
                message: format!("duplicate declaration of `{name}` in `{}`", c.name),
            });
        }
        prior.push(entry);
    }
    diags
}
