use serde::Serialize;

use super::lexer::Token;
use super::span::{LineMap, OutOfRange, Span};

/// Parsed form of one Solidity file.
#[derive(Debug, Clone)]
pub struct SourceUnit {
    pub pragma: Option<String>,
    pub contracts: Vec<ContractDef>,
    /// Top-level items outside the supported subset (imports, free structs).
    pub opaque_items: Vec<Span>,
    pub line_map: LineMap,
    pub raw_text: String,
    pub tokens: Vec<Token>,
}

impl SourceUnit {
    pub fn line_of(&self, offset: usize) -> Result<usize, OutOfRange> {
        self.line_map.line_of(offset)
    }

    pub fn text(&self, span: &Span) -> &str {
        span.slice(&self.raw_text)
    }

    /// Spans of every opaque member and statement, in source order.
    pub fn opaque_spans(&self) -> Vec<Span> {
        let mut out = self.opaque_items.clone();
        for c in &self.contracts {
            for m in &c.members {
                match m {
                    Member::Opaque(o) => out.push(o.span),
                    _ => {
                        if let Some(body) = m.body() {
                            for s in &body.statements {
                                s.walk(&mut |st| {
                                    if st.opaque {
                                        out.push(st.span);
                                    }
                                });
                            }
                        }
                    }
                }
            }
        }
        out.sort();
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "camelCase")]
pub enum ContractKind {
    Contract,
    Interface,
    Library,
}

#[derive(Debug, Clone)]
pub struct ContractDef {
    pub kind: ContractKind,
    pub name: String,
    pub bases: Vec<String>,
    pub span: Span,
    /// Bytes strictly between the braces.
    pub body_span: Span,
    pub members: Vec<Member>,
}

#[derive(Debug, Clone)]
pub enum Member {
    StateVar(StateVarDecl),
    Function(FunctionDef),
    Constructor(FunctionDef),
    Modifier(ModifierDef),
    Event(EventDef),
    Opaque(OpaqueNode),
}

impl Member {
    pub fn span(&self) -> Span {
        match self {
            Member::StateVar(v) => v.span,
            Member::Function(f) | Member::Constructor(f) => f.span,
            Member::Modifier(m) => m.span,
            Member::Event(e) => e.span,
            Member::Opaque(o) => o.span,
        }
    }

    pub fn name(&self) -> Option<&str> {
        match self {
            Member::StateVar(v) => Some(&v.name),
            Member::Function(f) => Some(&f.name),
            Member::Constructor(_) => Some("constructor"),
            Member::Modifier(m) => Some(&m.name),
            Member::Event(e) => Some(&e.name),
            Member::Opaque(_) => None,
        }
    }

    pub fn kind_name(&self) -> &'static str {
        match self {
            Member::StateVar(_) => "stateVarDecl",
            Member::Function(_) => "functionDef",
            Member::Constructor(_) => "constructorDef",
            Member::Modifier(_) => "modifierDef",
            Member::Event(_) => "eventDef",
            Member::Opaque(_) => "opaqueMember",
        }
    }

    pub fn body(&self) -> Option<&Body> {
        match self {
            Member::Function(f) | Member::Constructor(f) => f.body.as_ref(),
            Member::Modifier(m) => m.body.as_ref(),
            _ => None,
        }
    }
}

#[derive(Debug, Clone)]
pub struct StateVarDecl {
    pub type_name: String,
    pub name: String,
    pub span: Span,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Param {
    pub type_name: String,
    pub name: Option<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "camelCase")]
pub enum Visibility {
    Public,
    Private,
    Internal,
    External,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
#[serde(rename_all = "camelCase")]
pub enum Mutability {
    #[default]
    None,
    Payable,
    View,
    Pure,
}

#[derive(Debug, Clone)]
pub struct FunctionDef {
    /// Empty for the unnamed fallback function.
    pub name: String,
    pub params: Vec<Param>,
    pub visibility: Option<Visibility>,
    pub mutability: Mutability,
    pub modifiers: Vec<String>,
    pub returns: Option<Vec<Param>>,
    pub span: Span,
    pub body: Option<Body>,
}

#[derive(Debug, Clone)]
pub struct ModifierDef {
    pub name: String,
    pub params: Vec<Param>,
    pub span: Span,
    pub body: Option<Body>,
}

#[derive(Debug, Clone)]
pub struct EventDef {
    pub name: String,
    pub params: Vec<Param>,
    pub span: Span,
}

#[derive(Debug, Clone)]
pub struct OpaqueNode {
    pub leading: String,
    pub span: Span,
}

/// A function, constructor or modifier body.
#[derive(Debug, Clone)]
pub struct Body {
    /// Bytes strictly between the braces.
    pub span: Span,
    pub statements: Vec<Stmt>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "camelCase")]
pub enum StmtKind {
    LocalVarDecl,
    Assignment,
    ExpressionStmt,
    IfStmt,
    ForStmt,
    WhileStmt,
    ReturnStmt,
    RequireStmt,
    RevertStmt,
    EmitStmt,
    Block,
}

impl StmtKind {
    pub fn is_compound(self) -> bool {
        matches!(
            self,
            StmtKind::IfStmt | StmtKind::ForStmt | StmtKind::WhileStmt | StmtKind::Block
        )
    }
}

#[derive(Debug, Clone)]
pub struct Stmt {
    pub kind: StmtKind,
    pub span: Span,
    /// For `if`: then-arm, then the optional else-arm. For loops: the body.
    /// For blocks: the contained statements.
    pub children: Vec<Stmt>,
    /// Parenthesised condition of `if`/`while`, without the parentheses.
    pub condition: Option<Span>,
    /// Retained verbatim; outside the supported grammar.
    pub opaque: bool,
}

impl Stmt {
    pub fn text<'a>(&self, source: &'a str) -> &'a str {
        self.span.slice(source)
    }

    pub fn walk<'s>(&'s self, f: &mut impl FnMut(&'s Stmt)) {
        f(self);
        for c in &self.children {
            c.walk(f);
        }
    }

    pub fn then_arm(&self) -> Option<&Stmt> {
        (self.kind == StmtKind::IfStmt).then(|| &self.children[0])
    }

    pub fn else_arm(&self) -> Option<&Stmt> {
        if self.kind == StmtKind::IfStmt {
            self.children.get(1)
        } else {
            None
        }
    }
}
