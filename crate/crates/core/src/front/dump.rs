use serde_json::{json, Value};

use super::ast::{Member, SourceUnit, Stmt};
use super::span::Span;

fn node(kind: &str, span: &Span, name: Option<&str>, children: Vec<Value>) -> Value {
    let mut v = json!({ "kind": kind, "span": span, "children": children });
    if let Some(name) = name {
        v["name"] = Value::from(name);
    }
    v
}

fn stmt(s: &Stmt) -> Value {
    let kind = if s.opaque {
        "opaqueStmt".to_string()
    } else {
        serde_json::to_value(s.kind)
            .ok()
            .and_then(|v| v.as_str().map(str::to_string))
            .unwrap_or_default()
    };
    node(&kind, &s.span, None, s.children.iter().map(stmt).collect())
}

fn member(m: &Member) -> Value {
    let children = m
        .body()
        .map(|b| b.statements.iter().map(stmt).collect())
        .unwrap_or_default();
    node(m.kind_name(), &m.span(), m.name(), children)
}

/// The AST as nested `{kind, span, children}` objects.
pub fn ast_json(unit: &SourceUnit) -> Value {
    let full = unit.line_map.span(0, unit.raw_text.len());
    let mut children: Vec<Value> = unit
        .opaque_items
        .iter()
        .map(|s| node("opaqueItem", s, None, Vec::new()))
        .collect();
    children.extend(unit.contracts.iter().map(|c| {
        node(
            "contractDef",
            &c.span,
            Some(&c.name),
            c.members.iter().map(member).collect(),
        )
    }));
    children.sort_by_key(|v| v["span"]["start"].as_u64());
    let mut root = node("sourceUnit", &full, None, children);
    if let Some(p) = &unit.pragma {
        root["pragma"] = Value::from(p.as_str());
    }
    root
}
