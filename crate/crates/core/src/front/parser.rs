use thiserror::Error;

use super::ast::*;
use super::lexer::{self, is_elementary_type, LexError, Token, TokenKind, ETHER_UNITS};
use super::span::{LineMap, Span};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("{line}:{column}: expected {expected}, found {found}")]
pub struct ParseError {
    pub line: usize,
    pub column: usize,
    pub expected: String,
    pub found: String,
    /// Position of the opening delimiter when a closing one is missing.
    pub unclosed: Option<(usize, usize)>,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SyntaxError {
    #[error("lex error at {0}")]
    Lex(#[from] LexError),
    #[error("parse error at {0}")]
    Parse(#[from] ParseError),
}

impl SyntaxError {
    pub fn position(&self) -> (usize, usize) {
        match self {
            SyntaxError::Lex(e) => (e.line, e.column),
            SyntaxError::Parse(e) => (e.line, e.column),
        }
    }
}

type PResult<T> = Result<T, ParseError>;

/// Parses a whole file.
pub fn parse(source: &str) -> Result<SourceUnit, SyntaxError> {
    let tokens = lexer::tokenize(source)?;
    let line_map = LineMap::new(source);
    let (pragma, contracts, opaque_items) = {
        let mut p = Parser::new(source, &tokens, &line_map);
        p.source_unit()?
    };
    Ok(SourceUnit {
        pragma,
        contracts,
        opaque_items,
        line_map,
        raw_text: source.to_string(),
        tokens,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Shape {
    Assign,
    Call,
    Other,
}

const PREFIX_BP: u8 = 25;

fn infix_bp(op: &str) -> Option<(u8, u8)> {
    Some(match op {
        "=" | "+=" | "-=" | "*=" | "/=" | "%=" | "|=" | "&=" | "^=" | "<<=" | ">>=" => (2, 1),
        "?" => (4, 3),
        "||" => (5, 6),
        "&&" => (7, 8),
        "==" | "!=" => (9, 10),
        "<" | ">" | "<=" | ">=" => (11, 12),
        "|" => (13, 14),
        "^" => (15, 16),
        "&" => (17, 18),
        "<<" | ">>" => (19, 20),
        "+" | "-" => (21, 22),
        "*" | "/" | "%" => (23, 24),
        "**" => (27, 26),
        _ => return None,
    })
}

fn is_assign_op(op: &str) -> bool {
    matches!(infix_bp(op), Some((2, 1)))
}

pub(crate) struct Parser<'a> {
    src: &'a str,
    tokens: &'a [Token],
    sig: Vec<usize>,
    pos: usize,
    lines: &'a LineMap,
    tuple_decl: bool,
}

impl<'a> Parser<'a> {
    pub(crate) fn new(src: &'a str, tokens: &'a [Token], lines: &'a LineMap) -> Self {
        let sig = tokens
            .iter()
            .enumerate()
            .filter(|(_, t)| !t.is_trivia())
            .map(|(i, _)| i)
            .collect();
        Parser {
            src,
            tokens,
            sig,
            pos: 0,
            lines,
            tuple_decl: false,
        }
    }

    fn peek(&self, ahead: usize) -> Option<&'a Token> {
        self.sig.get(self.pos + ahead).map(|&i| &self.tokens[i])
    }

    fn cur(&self) -> Option<&'a Token> {
        self.peek(0)
    }

    fn at(&self, text: &str) -> bool {
        self.cur().is_some_and(|t| t.is(text))
    }

    fn at_kind(&self, kind: TokenKind) -> bool {
        self.cur().is_some_and(|t| t.kind == kind)
    }

    fn bump(&mut self) -> &'a Token {
        let t = self.cur().expect("bump past end of input");
        self.pos += 1;
        t
    }

    fn cur_start(&self) -> usize {
        self.cur().map_or(self.src.len(), |t| t.span.start)
    }

    fn prev_end(&self) -> usize {
        if self.pos == 0 {
            0
        } else {
            self.tokens[self.sig[self.pos - 1]].span.end
        }
    }

    fn span_from(&self, start: usize) -> Span {
        self.lines.span(start, self.prev_end().max(start))
    }

    fn error(&self, expected: impl Into<String>) -> ParseError {
        let (found, at) = match self.cur() {
            Some(t) => (format!("`{}`", t.text), t.span.start),
            None => ("end of input".to_string(), self.src.len()),
        };
        self.error_at(at, expected, found)
    }

    fn error_at(&self, at: usize, expected: impl Into<String>, found: String) -> ParseError {
        let (line, column) = self.lines.line_col(at).unwrap_or((0, 0));
        ParseError {
            line,
            column,
            expected: expected.into(),
            found,
            unclosed: None,
        }
    }

    fn expect(&mut self, text: &str) -> PResult<&'a Token> {
        if self.at(text) {
            Ok(self.bump())
        } else {
            Err(self.error(format!("`{text}`")))
        }
    }

    /// Expects the delimiter closing `open`, pointing the error at `open`.
    fn expect_close(&mut self, text: &str, open: &Token) -> PResult<&'a Token> {
        self.expect(text).map_err(|mut e| {
            e.unclosed = self.lines.line_col(open.span.start).ok();
            e
        })
    }

    /// Fails with an unclosed-delimiter error when the next token cannot
    /// continue the list opened by `open`.
    fn inside(&self, open: &Token) -> PResult<()> {
        match self.cur() {
            Some(t)
                if !(t.kind == TokenKind::Punctuator
                    && matches!(t.text.as_str(), "}" | ";" | ")" | "]")) =>
            {
                Ok(())
            }
            _ => {
                let close = match open.text.as_str() {
                    "(" => ")",
                    "[" => "]",
                    _ => "}",
                };
                let mut e = self.error(format!("`{close}`"));
                e.unclosed = self.lines.line_col(open.span.start).ok();
                Err(e)
            }
        }
    }

    fn ident(&mut self, what: &str) -> PResult<&'a Token> {
        if self.at_kind(TokenKind::Identifier) {
            Ok(self.bump())
        } else {
            Err(self.error(what.to_string()))
        }
    }

    // ---- top level -------------------------------------------------------

    #[allow(clippy::type_complexity)]
    fn source_unit(&mut self) -> PResult<(Option<String>, Vec<ContractDef>, Vec<Span>)> {
        let mut pragma = None;
        let mut contracts = Vec::new();
        let mut opaque = Vec::new();
        while let Some(t) = self.cur() {
            if t.kind == TokenKind::PragmaDirective {
                self.bump();
                pragma.get_or_insert_with(|| t.text.clone());
                continue;
            }
            match t.text.as_str() {
                "contract" | "interface" | "library" | "abstract" => {
                    contracts.push(self.contract()?)
                }
                "import" | "struct" | "enum" | "using" => {
                    let start = t.span.start;
                    self.scan_opaque(false)?;
                    opaque.push(self.span_from(start));
                }
                _ => return Err(self.error("contract definition")),
            }
        }
        Ok((pragma, contracts, opaque))
    }

    fn contract(&mut self) -> PResult<ContractDef> {
        let start = self.cur_start();
        if self.at("abstract") {
            self.bump();
        }
        let kind = match self.cur().map(|t| t.text.as_str()) {
            Some("contract") => ContractKind::Contract,
            Some("interface") => ContractKind::Interface,
            Some("library") => ContractKind::Library,
            _ => return Err(self.error("`contract`")),
        };
        self.bump();
        let name = self.ident("contract name")?.text.clone();
        let mut bases = Vec::new();
        if self.at("is") {
            self.bump();
            loop {
                bases.push(self.path()?);
                if self.at("(") {
                    self.call_args()?;
                }
                if self.at(",") {
                    self.bump();
                } else {
                    break;
                }
            }
        }
        let open = self.expect("{")?;
        let mut members = Vec::new();
        while !self.at("}") {
            if self.cur().is_none() {
                return Err(self.expect_close("}", open).unwrap_err());
            }
            members.push(self.member()?);
        }
        let close = self.bump();
        Ok(ContractDef {
            kind,
            name,
            bases,
            span: self.span_from(start),
            body_span: self.lines.span(open.span.end, close.span.start),
            members,
        })
    }

    fn path(&mut self) -> PResult<String> {
        let mut name = self.ident("identifier")?.text.clone();
        while self.at(".")
            && self
                .peek(1)
                .is_some_and(|t| t.kind == TokenKind::Identifier)
        {
            self.bump();
            name.push('.');
            name.push_str(&self.bump().text);
        }
        Ok(name)
    }

    // ---- members ---------------------------------------------------------

    fn member(&mut self) -> PResult<Member> {
        let t = self.cur().ok_or_else(|| self.error("contract member"))?;
        match t.text.as_str() {
            "function" if t.kind == TokenKind::Keyword => {
                self.function(false).map(Member::Function)
            }
            "constructor" => self.function(true).map(Member::Constructor),
            "modifier" => self.modifier(),
            "event" => self.event(),
            "struct" | "enum" | "using" => self.opaque_member(),
            "receive" | "fallback" if self.peek(1).is_some_and(|n| n.is("(")) => {
                self.opaque_member()
            }
            _ => self.state_var(),
        }
    }

    fn opaque_member(&mut self) -> PResult<Member> {
        let start = self.cur_start();
        let leading = self.cur().map(|t| t.text.clone()).unwrap_or_default();
        self.scan_opaque(false)?;
        Ok(Member::Opaque(OpaqueNode {
            leading,
            span: self.span_from(start),
        }))
    }

    fn function(&mut self, is_constructor: bool) -> PResult<FunctionDef> {
        let start = self.cur_start();
        self.bump();
        let name = if is_constructor {
            "constructor".to_string()
        } else if self.at_kind(TokenKind::Identifier) {
            self.bump().text.clone()
        } else {
            String::new()
        };
        let params = self.params(false)?;
        let mut visibility = None;
        let mut mutability = Mutability::None;
        let mut modifiers = Vec::new();
        let mut returns = None;
        let body = loop {
            let t = self.cur().ok_or_else(|| self.error("function body"))?;
            match t.text.as_str() {
                "public" => visibility = Some(Visibility::Public),
                "private" => visibility = Some(Visibility::Private),
                "internal" => visibility = Some(Visibility::Internal),
                "external" => visibility = Some(Visibility::External),
                "payable" => mutability = Mutability::Payable,
                "view" | "constant" => mutability = Mutability::View,
                "pure" => mutability = Mutability::Pure,
                "virtual" => {}
                "override" => {
                    self.bump();
                    self.override_list()?;
                    continue;
                }
                "returns" => {
                    self.bump();
                    returns = Some(self.params(false)?);
                    continue;
                }
                "{" => break Some(self.body()?),
                ";" => {
                    self.bump();
                    break None;
                }
                _ if t.kind == TokenKind::Identifier => {
                    modifiers.push(self.path()?);
                    if self.at("(") {
                        self.call_args()?;
                    }
                    continue;
                }
                _ => return Err(self.error("function body")),
            }
            self.bump();
        };
        Ok(FunctionDef {
            name,
            params,
            visibility,
            mutability,
            modifiers,
            returns,
            span: self.span_from(start),
            body,
        })
    }

    fn override_list(&mut self) -> PResult<()> {
        if self.at("(") {
            let open = self.bump();
            loop {
                self.path()?;
                if self.at(",") {
                    self.bump();
                } else {
                    break;
                }
            }
            self.expect_close(")", open)?;
        }
        Ok(())
    }

    fn modifier(&mut self) -> PResult<Member> {
        let start = self.cur_start();
        self.bump();
        let name = self.ident("modifier name")?.text.clone();
        let params = if self.at("(") {
            self.params(false)?
        } else {
            Vec::new()
        };
        loop {
            if self.at("virtual") {
                self.bump();
            } else if self.at("override") {
                self.bump();
                self.override_list()?;
            } else {
                break;
            }
        }
        let body = if self.at(";") {
            self.bump();
            None
        } else {
            Some(self.body()?)
        };
        Ok(Member::Modifier(ModifierDef {
            name,
            params,
            span: self.span_from(start),
            body,
        }))
    }

    fn event(&mut self) -> PResult<Member> {
        let start = self.cur_start();
        self.bump();
        let name = self.ident("event name")?.text.clone();
        let params = self.params(true)?;
        if self.at("anonymous") {
            self.bump();
        }
        self.expect(";")?;
        Ok(Member::Event(EventDef {
            name,
            params,
            span: self.span_from(start),
        }))
    }

    fn state_var(&mut self) -> PResult<Member> {
        let start = self.cur_start();
        let type_name = self.type_name().map_err(|_| {
            let mut e = self.error("contract member");
            e.unclosed = None;
            e
        })?;
        while let Some(t) = self.cur() {
            match t.text.as_str() {
                "public" | "private" | "internal" | "constant" | "immutable" => {
                    self.bump();
                }
                "override" => {
                    self.bump();
                    self.override_list()?;
                }
                _ => break,
            }
        }
        let name = self.ident("state variable name")?.text.clone();
        if self.at("=") {
            self.bump();
            self.expression()?;
        }
        self.expect(";")?;
        Ok(Member::StateVar(StateVarDecl {
            type_name,
            name,
            span: self.span_from(start),
        }))
    }

    fn params(&mut self, event: bool) -> PResult<Vec<Param>> {
        let open = self.expect("(")?;
        let mut params = Vec::new();
        if !self.at(")") {
            loop {
                self.inside(open)?;
                let type_name = self.type_name()?;
                if self.at("memory") || self.at("storage") || self.at("calldata") {
                    self.bump();
                }
                if event && self.at("indexed") {
                    self.bump();
                }
                let name = if self.at_kind(TokenKind::Identifier) {
                    Some(self.bump().text.clone())
                } else {
                    None
                };
                params.push(Param { type_name, name });
                if self.at(",") {
                    self.bump();
                } else {
                    break;
                }
            }
        }
        self.expect_close(")", open)?;
        Ok(params)
    }

    fn type_name(&mut self) -> PResult<String> {
        let start = self.cur_start();
        let t = self.cur().ok_or_else(|| self.error("type name"))?;
        if t.is("mapping") {
            self.bump();
            let open = self.expect("(")?;
            self.type_name()?;
            self.expect("=>")?;
            self.type_name()?;
            self.expect_close(")", open)?;
        } else if t.kind == TokenKind::Keyword && is_elementary_type(&t.text) {
            self.bump();
            if t.text == "address" && self.at("payable") {
                self.bump();
            }
        } else if t.kind == TokenKind::Identifier {
            self.path()?;
        } else {
            return Err(self.error("type name"));
        }
        while self.at("[") {
            let open = self.bump();
            if !self.at("]") {
                self.expression()?;
            }
            self.expect_close("]", open)?;
        }
        let text = &self.src[start..self.prev_end()];
        Ok(text.split_whitespace().collect::<Vec<_>>().join(" "))
    }

    /// Speculatively checks whether a variable declaration starts here.
    fn at_declaration(&mut self) -> bool {
        if self.at("mapping") || self.at("var") {
            return true;
        }
        let starts_type = self.cur().is_some_and(|t| {
            t.kind == TokenKind::Identifier
                || (t.kind == TokenKind::Keyword && is_elementary_type(&t.text))
        });
        if !starts_type {
            return false;
        }
        let saved = self.pos;
        let ok = self.type_name().is_ok()
            && self.cur().is_some_and(|t| {
                t.kind == TokenKind::Identifier
                    || t.is("memory")
                    || t.is("storage")
                    || t.is("calldata")
            });
        self.pos = saved;
        ok
    }

    // ---- statements ------------------------------------------------------

    fn body(&mut self) -> PResult<Body> {
        let open = self.expect("{")?;
        let mut statements = Vec::new();
        while !self.at("}") {
            if self.cur().is_none() {
                return Err(self.expect_close("}", open).unwrap_err());
            }
            statements.push(self.statement()?);
        }
        let close = self.bump();
        Ok(Body {
            span: self.lines.span(open.span.end, close.span.start),
            statements,
        })
    }

    fn leaf(&self, kind: StmtKind, start: usize) -> Stmt {
        Stmt {
            kind,
            span: self.span_from(start),
            children: Vec::new(),
            condition: None,
            opaque: false,
        }
    }

    fn statement(&mut self) -> PResult<Stmt> {
        let t = self.cur().ok_or_else(|| self.error("statement"))?;
        let start = t.span.start;
        let word = if t.kind == TokenKind::Keyword || t.kind == TokenKind::Punctuator {
            t.text.as_str()
        } else {
            ""
        };
        match word {
            "{" => {
                let body = self.body()?;
                Ok(Stmt {
                    kind: StmtKind::Block,
                    span: self.span_from(start),
                    children: body.statements,
                    condition: None,
                    opaque: false,
                })
            }
            "if" => {
                self.bump();
                let condition = self.condition()?;
                let mut children = vec![self.statement()?];
                if self.at("else") {
                    self.bump();
                    children.push(self.statement()?);
                }
                Ok(Stmt {
                    kind: StmtKind::IfStmt,
                    span: self.span_from(start),
                    children,
                    condition: Some(condition),
                    opaque: false,
                })
            }
            "while" => {
                self.bump();
                let condition = self.condition()?;
                let body = self.statement()?;
                Ok(Stmt {
                    kind: StmtKind::WhileStmt,
                    span: self.span_from(start),
                    children: vec![body],
                    condition: Some(condition),
                    opaque: false,
                })
            }
            "for" => {
                self.bump();
                let open = self.expect("(")?;
                if self.at(";") {
                    self.bump();
                } else {
                    self.simple_statement()?;
                }
                if !self.at(";") {
                    self.expression()?;
                }
                self.expect(";")?;
                if !self.at(")") {
                    self.expression()?;
                }
                self.expect_close(")", open)?;
                let body = self.statement()?;
                Ok(Stmt {
                    kind: StmtKind::ForStmt,
                    span: self.span_from(start),
                    children: vec![body],
                    condition: None,
                    opaque: false,
                })
            }
            "return" => {
                self.bump();
                if !self.at(";") {
                    self.expression()?;
                }
                self.expect(";")?;
                Ok(self.leaf(StmtKind::ReturnStmt, start))
            }
            "emit" => {
                self.bump();
                self.expression()?;
                self.expect(";")?;
                Ok(self.leaf(StmtKind::EmitStmt, start))
            }
            "throw" => {
                self.bump();
                self.expect(";")?;
                Ok(self.leaf(StmtKind::RevertStmt, start))
            }
            "assembly" | "unchecked" | "try" | "do" | "break" | "continue" => {
                self.scan_opaque(word == "do" || word == "break" || word == "continue")?;
                let mut s = self.leaf(StmtKind::ExpressionStmt, start);
                s.opaque = true;
                Ok(s)
            }
            "function" => {
                Err(self.error_at(start, "statement", "nested function definition".to_string()))
            }
            "contract" | "interface" | "library" | "modifier" | "event" | "constructor"
            | "struct" | "enum" | "using" | "else" | "}" => Err(self.error("statement")),
            _ => {
                let kind = self.simple_statement()?;
                Ok(self.leaf(kind, start))
            }
        }
    }

    fn condition(&mut self) -> PResult<Span> {
        let open = self.expect("(")?;
        let start = self.cur_start();
        self.expression()?;
        let span = self.span_from(start);
        self.expect_close(")", open)?;
        Ok(span)
    }

    /// Declaration or expression statement, including the trailing `;`.
    fn simple_statement(&mut self) -> PResult<StmtKind> {
        if self.at_declaration() {
            if self.at("var") {
                self.bump();
            } else {
                self.type_name()?;
            }
            if self.at("memory") || self.at("storage") || self.at("calldata") {
                self.bump();
            }
            self.ident("variable name")?;
            if self.at("=") {
                self.bump();
                self.expression()?;
            }
            self.expect(";")?;
            return Ok(StmtKind::LocalVarDecl);
        }
        self.tuple_decl = false;
        let first = self.cur().map(|t| (t.kind, t.text.clone()));
        let second_paren = self.peek(1).is_some_and(|t| t.is("("));
        let shape = self.expression()?;
        self.expect(";")?;
        Ok(match (shape, first) {
            _ if self.tuple_decl => StmtKind::LocalVarDecl,
            (Shape::Assign, _) => StmtKind::Assignment,
            (Shape::Call, Some((TokenKind::Identifier, name)))
                if second_paren && name == "require" =>
            {
                StmtKind::RequireStmt
            }
            (Shape::Call, Some((TokenKind::Identifier, name)))
                if second_paren && name == "revert" =>
            {
                StmtKind::RevertStmt
            }
            _ => StmtKind::ExpressionStmt,
        })
    }

    /// Skips a brace- or semicolon-delimited construct outside the grammar.
    /// With `semicolon_only`, only a `;` at depth zero terminates it.
    fn scan_opaque(&mut self, semicolon_only: bool) -> PResult<()> {
        let first = self.cur().ok_or_else(|| self.error("statement"))?;
        let mut stack: Vec<&Token> = Vec::new();
        loop {
            let Some(t) = self.cur() else {
                return Err(match stack.last() {
                    Some(open) => {
                        let close = match open.text.as_str() {
                            "(" => ")",
                            "[" => "]",
                            _ => "}",
                        };
                        let mut e = self.error(format!("`{close}`"));
                        e.unclosed = self.lines.line_col(open.span.start).ok();
                        e
                    }
                    None => self.error("`;`"),
                });
            };
            if t.kind == TokenKind::Punctuator {
                match t.text.as_str() {
                    "(" | "[" | "{" => stack.push(t),
                    ")" | "]" | "}" => {
                        let Some(open) = stack.pop() else {
                            return Err(self.error(format!("end of `{}`", first.text)));
                        };
                        let want = match open.text.as_str() {
                            "(" => ")",
                            "[" => "]",
                            _ => "}",
                        };
                        if t.text != want {
                            let mut e = self.error(format!("`{want}`"));
                            e.unclosed = self.lines.line_col(open.span.start).ok();
                            return Err(e);
                        }
                        if stack.is_empty() && t.text == "}" && !semicolon_only {
                            self.bump();
                            // `try ... {} catch ... {}` continues with its clauses.
                            if self.at("catch") || self.at("else") && first.is("try") {
                                continue;
                            }
                            return Ok(());
                        }
                    }
                    ";" if stack.is_empty() => {
                        self.bump();
                        return Ok(());
                    }
                    _ => {}
                }
            }
            self.bump();
        }
    }

    // ---- expressions -----------------------------------------------------

    fn expression(&mut self) -> PResult<Shape> {
        self.expr_bp(0)
    }

    fn expr_bp(&mut self, min_bp: u8) -> PResult<Shape> {
        let mut shape = self.unary()?;
        while let Some(t) = self.cur() {
            if t.kind != TokenKind::Punctuator {
                break;
            }
            let Some((l_bp, r_bp)) = infix_bp(&t.text) else {
                break;
            };
            if l_bp < min_bp {
                break;
            }
            self.bump();
            if t.text == "?" {
                self.expr_bp(0)?;
                self.expect(":")?;
                self.expr_bp(r_bp)?;
                shape = Shape::Other;
                continue;
            }
            self.expr_bp(r_bp)?;
            shape = if is_assign_op(&t.text) {
                Shape::Assign
            } else {
                Shape::Other
            };
        }
        Ok(shape)
    }

    fn unary(&mut self) -> PResult<Shape> {
        if let Some(t) = self.cur() {
            if matches!(
                t.text.as_str(),
                "!" | "-" | "~" | "++" | "--" | "+" | "delete"
            ) && t.kind != TokenKind::StringLiteral
            {
                self.bump();
                self.expr_bp(PREFIX_BP)?;
                return Ok(Shape::Other);
            }
        }
        self.postfix()
    }

    fn postfix(&mut self) -> PResult<Shape> {
        let mut shape = self.primary()?;
        while let Some(t) = self.cur() {
            match t.text.as_str() {
                "." if t.kind == TokenKind::Punctuator => {
                    self.bump();
                    match self.cur() {
                        Some(n) if matches!(n.kind, TokenKind::Identifier | TokenKind::Keyword) => {
                            self.bump();
                        }
                        _ => return Err(self.error("member name")),
                    }
                }
                "[" if t.kind == TokenKind::Punctuator => {
                    let open = self.bump();
                    if !self.at("]") && !self.at(":") {
                        self.expression()?;
                    }
                    if self.at(":") {
                        self.bump();
                        if !self.at("]") {
                            self.expression()?;
                        }
                    }
                    self.expect_close("]", open)?;
                }
                "(" if t.kind == TokenKind::Punctuator => {
                    self.call_args()?;
                    shape = Shape::Call;
                    continue;
                }
                "++" | "--" if t.kind == TokenKind::Punctuator => {
                    self.bump();
                }
                _ => break,
            }
            shape = Shape::Other;
        }
        Ok(shape)
    }

    fn call_args(&mut self) -> PResult<()> {
        let open = self.expect("(")?;
        if self.at("{") {
            let brace = self.bump();
            if !self.at("}") {
                loop {
                    self.ident("argument name")?;
                    self.expect(":")?;
                    self.expression()?;
                    if self.at(",") {
                        self.bump();
                    } else {
                        break;
                    }
                }
            }
            self.expect_close("}", brace)?;
        } else if !self.at(")") {
            loop {
                self.inside(open)?;
                self.expression()?;
                if self.at(",") {
                    self.bump();
                } else {
                    break;
                }
            }
        }
        self.expect_close(")", open)?;
        Ok(())
    }

    fn primary(&mut self) -> PResult<Shape> {
        let t = self.cur().ok_or_else(|| self.error("expression"))?;
        match t.kind {
            TokenKind::NumberLiteral => {
                self.bump();
                if self.cur().is_some_and(|u| {
                    u.kind == TokenKind::Keyword && ETHER_UNITS.contains(&u.text.as_str())
                }) {
                    self.bump();
                }
            }
            TokenKind::StringLiteral => {
                while self.at_kind(TokenKind::StringLiteral) {
                    self.bump();
                }
            }
            TokenKind::Identifier => {
                self.bump();
            }
            TokenKind::Keyword => match t.text.as_str() {
                "true" | "false" | "this" | "payable" => {
                    self.bump();
                }
                "new" => {
                    self.bump();
                    self.type_name()?;
                }
                w if is_elementary_type(w) => {
                    self.bump();
                    if w == "address" && self.at("payable") {
                        self.bump();
                    }
                }
                _ => return Err(self.error("expression")),
            },
            TokenKind::Punctuator if t.text == "(" => {
                let open = self.bump();
                while !self.at(")") {
                    if self.at(",") {
                        self.bump();
                        continue;
                    }
                    self.inside(open)?;
                    if self.at_declaration() {
                        self.type_name()?;
                        if self.at("memory") || self.at("storage") || self.at("calldata") {
                            self.bump();
                        }
                        self.ident("variable name")?;
                        self.tuple_decl = true;
                    } else {
                        self.expression()?;
                    }
                    if !self.at(")") {
                        self.expect(",")?;
                    }
                }
                self.expect_close(")", open)?;
            }
            TokenKind::Punctuator if t.text == "[" => {
                let open = self.bump();
                if !self.at("]") {
                    loop {
                        self.expression()?;
                        if self.at(",") {
                            self.bump();
                        } else {
                            break;
                        }
                    }
                }
                self.expect_close("]", open)?;
            }
            _ => return Err(self.error("expression")),
        }
        Ok(Shape::Other)
    }
}

/// Parses `text` as a sequence of contract members, as if it sat directly
/// inside a contract body.
pub fn parse_members(text: &str) -> Result<Vec<Member>, SyntaxError> {
    let tokens = lexer::tokenize(text)?;
    let lines = LineMap::new(text);
    let mut p = Parser::new(text, &tokens, &lines);
    let mut out = Vec::new();
    while p.cur().is_some() {
        out.push(p.member()?);
    }
    Ok(out)
}

/// Parses `text` as a sequence of statements, as if it sat inside a
/// function body.
pub fn parse_statements(text: &str) -> Result<Vec<Stmt>, SyntaxError> {
    let tokens = lexer::tokenize(text)?;
    let lines = LineMap::new(text);
    let mut p = Parser::new(text, &tokens, &lines);
    let mut out = Vec::new();
    while p.cur().is_some() {
        out.push(p.statement()?);
    }
    Ok(out)
}
