use serde::Serialize;
use thiserror::Error;

use super::span::{LineMap, Span};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "camelCase")]
pub enum TokenKind {
    Identifier,
    Keyword,
    NumberLiteral,
    StringLiteral,
    Punctuator,
    Comment,
    PragmaDirective,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Token {
    pub kind: TokenKind,
    pub text: String,
    pub span: Span,
}

impl Token {
    pub fn is(&self, text: &str) -> bool {
        self.text == text
            && self.kind != TokenKind::StringLiteral
            && self.kind != TokenKind::Comment
    }

    pub fn is_trivia(&self) -> bool {
        self.kind == TokenKind::Comment
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("{line}:{column}: {message}")]
pub struct LexError {
    pub line: usize,
    pub column: usize,
    pub message: String,
}

const KEYWORDS: &[&str] = &[
    "abstract",
    "anonymous",
    "assembly",
    "break",
    "calldata",
    "catch",
    "constant",
    "constructor",
    "continue",
    "contract",
    "delete",
    "do",
    "else",
    "emit",
    "enum",
    "event",
    "external",
    "false",
    "for",
    "function",
    "if",
    "immutable",
    "import",
    "indexed",
    "interface",
    "internal",
    "is",
    "library",
    "mapping",
    "memory",
    "modifier",
    "new",
    "override",
    "payable",
    "private",
    "public",
    "pure",
    "return",
    "returns",
    "storage",
    "struct",
    "this",
    "throw",
    "true",
    "try",
    "unchecked",
    "using",
    "var",
    "view",
    "virtual",
    "while",
];

pub(crate) const ETHER_UNITS: &[&str] = &[
    "wei", "gwei", "szabo", "finney", "ether", "seconds", "minutes", "hours", "days", "weeks",
    "years",
];

/// Elementary type names: `address`, `bool`, `string`, `byte`, `bytes`,
/// `bytesN`, `intN`, `uintN`, `fixed`, `ufixed`.
pub fn is_elementary_type(word: &str) -> bool {
    match word {
        "address" | "bool" | "string" | "byte" | "bytes" | "int" | "uint" | "fixed" | "ufixed" => {
            return true
        }
        _ => {}
    }
    let sized = |prefix: &str, lo: u32, hi: u32, step: u32| {
        word.strip_prefix(prefix)
            .filter(|d| !d.is_empty() && !d.starts_with('0'))
            .and_then(|d| d.parse::<u32>().ok())
            .is_some_and(|n| n >= lo && n <= hi && n % step == 0)
    };
    sized("bytes", 1, 32, 1) || sized("uint", 8, 256, 8) || sized("int", 8, 256, 8)
}

pub fn is_keyword(word: &str) -> bool {
    KEYWORDS.binary_search(&word).is_ok() || ETHER_UNITS.contains(&word) || is_elementary_type(word)
}

const PUNCTUATORS: &[&str] = &[
    "<<=", ">>=", "...", "==", "!=", "<=", ">=", "&&", "||", "++", "--", "+=", "-=", "*=", "/=",
    "%=", "|=", "&=", "^=", "<<", ">>", "**", "=>", "->", ":=", "{", "}", "(", ")", "[", "]", ";",
    ",", ".", "=", "+", "-", "*", "/", "%", "<", ">", "!", "&", "|", "^", "~", "?", ":",
];

struct Lexer<'a> {
    src: &'a str,
    bytes: &'a [u8],
    pos: usize,
    lines: LineMap,
    out: Vec<Token>,
}

/// Splits `source` into tokens. Comments are kept as tokens; whitespace is
/// the only thing dropped, so the token texts and the gaps between them
/// rebuild the source exactly.
pub fn tokenize(source: &str) -> Result<Vec<Token>, LexError> {
    let mut lx = Lexer {
        src: source,
        bytes: source.as_bytes(),
        pos: 0,
        lines: LineMap::new(source),
        out: Vec::new(),
    };
    lx.run()?;
    Ok(lx.out)
}

impl<'a> Lexer<'a> {
    fn error(&self, at: usize, message: impl Into<String>) -> LexError {
        let (line, column) = self.lines.line_col(at).unwrap_or((0, 0));
        LexError {
            line,
            column,
            message: message.into(),
        }
    }

    fn push(&mut self, kind: TokenKind, start: usize) {
        self.out.push(Token {
            kind,
            text: self.src[start..self.pos].to_string(),
            span: self.lines.span(start, self.pos),
        });
    }

    fn peek(&self, ahead: usize) -> Option<u8> {
        self.bytes.get(self.pos + ahead).copied()
    }

    fn run(&mut self) -> Result<(), LexError> {
        while let Some(c) = self.peek(0) {
            let start = self.pos;
            match c {
                b' ' | b'\t' | b'\r' | b'\n' | 0x0c => self.pos += 1,
                b'/' if self.peek(1) == Some(b'/') => {
                    while self.peek(0).is_some_and(|b| b != b'\n') {
                        self.pos += 1;
                    }
                    // Keep the carriage return outside a `//` comment.
                    if self.pos > start + 2 && self.bytes[self.pos - 1] == b'\r' {
                        self.pos -= 1;
                    }
                    self.push(TokenKind::Comment, start);
                }
                b'/' if self.peek(1) == Some(b'*') => {
                    match self.src[start + 2..].find("*/") {
                        Some(rel) => self.pos = start + 2 + rel + 2,
                        None => return Err(self.error(start, "unterminated block comment")),
                    }
                    self.push(TokenKind::Comment, start);
                }
                b'"' | b'\'' => {
                    self.string(c)?;
                    self.push(TokenKind::StringLiteral, start);
                }
                b'0'..=b'9' => {
                    self.number();
                    self.push(TokenKind::NumberLiteral, start);
                }
                c if c.is_ascii_alphabetic() || c == b'_' || c == b'$' => {
                    while self
                        .peek(0)
                        .is_some_and(|b| b.is_ascii_alphanumeric() || b == b'_' || b == b'$')
                    {
                        self.pos += 1;
                    }
                    let word = &self.src[start..self.pos];
                    if word == "pragma" {
                        match self.src[self.pos..].find(';') {
                            Some(rel) => self.pos += rel + 1,
                            None => return Err(self.error(start, "unterminated pragma directive")),
                        }
                        self.push(TokenKind::PragmaDirective, start);
                    } else if (word == "hex" || word == "unicode")
                        && matches!(self.peek(0), Some(b'"') | Some(b'\''))
                    {
                        let quote = self.bytes[self.pos];
                        self.string(quote)?;
                        self.push(TokenKind::StringLiteral, start);
                    } else if is_keyword(word) {
                        self.push(TokenKind::Keyword, start);
                    } else {
                        self.push(TokenKind::Identifier, start);
                    }
                }
                _ => {
                    let rest = &self.src[start..];
                    match PUNCTUATORS.iter().find(|p| rest.starts_with(**p)) {
                        Some(p) => {
                            self.pos += p.len();
                            self.push(TokenKind::Punctuator, start);
                        }
                        None => {
                            let ch = rest.chars().next().unwrap_or('?');
                            return Err(self.error(start, format!("illegal character {ch:?}")));
                        }
                    }
                }
            }
        }
        Ok(())
    }

    fn string(&mut self, quote: u8) -> Result<(), LexError> {
        let open = self.pos;
        self.pos += 1;
        loop {
            match self.peek(0) {
                None | Some(b'\n') => return Err(self.error(open, "unterminated string literal")),
                Some(b'\\') => {
                    self.pos += 1;
                    if self.peek(0).is_none() {
                        return Err(self.error(open, "unterminated string literal"));
                    }
                    // Step over a whole (possibly multi-byte) escaped character.
                    let ch = self.src[self.pos..]
                        .chars()
                        .next()
                        .map_or(1, char::len_utf8);
                    self.pos += ch;
                }
                Some(b) if b == quote => {
                    self.pos += 1;
                    return Ok(());
                }
                Some(_) => {
                    let ch = self.src[self.pos..]
                        .chars()
                        .next()
                        .map_or(1, char::len_utf8);
                    self.pos += ch;
                }
            }
        }
    }

    fn number(&mut self) {
        if self.peek(0) == Some(b'0') && matches!(self.peek(1), Some(b'x') | Some(b'X')) {
            self.pos += 2;
            while self
                .peek(0)
                .is_some_and(|b| b.is_ascii_hexdigit() || b == b'_')
            {
                self.pos += 1;
            }
            return;
        }
        let digits = |lx: &mut Self| {
            while lx.peek(0).is_some_and(|b| b.is_ascii_digit() || b == b'_') {
                lx.pos += 1;
            }
        };
        digits(self);
        if self.peek(0) == Some(b'.') && self.peek(1).is_some_and(|b| b.is_ascii_digit()) {
            self.pos += 1;
            digits(self);
        }
        if matches!(self.peek(0), Some(b'e') | Some(b'E')) {
            let signed = self.peek(1) == Some(b'-');
            let first = if signed { self.peek(2) } else { self.peek(1) };
            if first.is_some_and(|b| b.is_ascii_digit()) {
                self.pos += if signed { 2 } else { 1 };
                digits(self);
            }
        }
    }
}

/// Rebuilds the source from a token stream using the original gaps.
pub fn reassemble(source: &str, tokens: &[Token]) -> String {
    let mut out = String::with_capacity(source.len());
    let mut last = 0;
    for t in tokens {
        out.push_str(&source[last..t.span.start]);
        out.push_str(&t.text);
        last = t.span.end;
    }
    out.push_str(&source[last..]);
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn kinds(src: &str) -> Vec<(TokenKind, String)> {
        tokenize(src)
            .unwrap()
            .into_iter()
            .map(|t| (t.kind, t.text))
            .collect()
    }

    #[test]
    fn keywords_are_sorted_for_binary_search() {
        let mut sorted = KEYWORDS.to_vec();
        sorted.sort_unstable();
        assert_eq!(sorted, KEYWORDS);
    }

    #[test]
    fn empty_input() {
        assert!(tokenize("").unwrap().is_empty());
    }

    #[test]
    fn minimal_contract() {
        use TokenKind::*;
        assert_eq!(
            kinds("contract A {}"),
            vec![
                (Keyword, "contract".to_string()),
                (Identifier, "A".to_string()),
                (Punctuator, "{".to_string()),
                (Punctuator, "}".to_string()),
            ]
        );
    }

    #[test]
    fn comments_and_pragma_are_tokens() {
        let toks = kinds("pragma solidity ^0.5.0;\n// hi\n/* a\n b */ x");
        assert_eq!(toks[0].0, TokenKind::PragmaDirective);
        assert_eq!(toks[0].1, "pragma solidity ^0.5.0;");
        assert_eq!(toks[1], (TokenKind::Comment, "// hi".to_string()));
        assert_eq!(toks[2], (TokenKind::Comment, "/* a\n b */".to_string()));
        assert_eq!(toks[3].0, TokenKind::Identifier);
    }

    #[test]
    fn numbers_and_operators() {
        let toks = kinds("x += 0xFF * 1e18 - 2.5 ether >= y");
        let texts: Vec<&str> = toks.iter().map(|t| t.1.as_str()).collect();
        assert_eq!(
            texts,
            ["x", "+=", "0xFF", "*", "1e18", "-", "2.5", "ether", ">=", "y"]
        );
        assert_eq!(toks[7].0, TokenKind::Keyword);
    }

    #[test]
    fn elementary_types() {
        for t in [
            "uint", "uint8", "uint256", "int128", "bytes1", "bytes32", "address",
        ] {
            assert!(is_elementary_type(t), "{t}");
        }
        for t in ["uint7", "uint264", "bytes33", "bytes0", "uint08", "owner"] {
            assert!(!is_elementary_type(t), "{t}");
        }
    }

    #[test]
    fn unterminated_string_reports_position() {
        let err = tokenize("x = \"abc\n").unwrap_err();
        assert_eq!((err.line, err.column), (1, 5));
        assert!(err.message.contains("unterminated string"));
    }

    #[test]
    fn unterminated_comment() {
        let err = tokenize("a /* b").unwrap_err();
        assert_eq!((err.line, err.column), (1, 3));
    }

    #[test]
    fn illegal_character() {
        let err = tokenize("a\n  # b").unwrap_err();
        assert_eq!((err.line, err.column), (2, 3));
        assert!(err.message.contains("illegal"));
    }

    #[test]
    fn escapes_in_strings() {
        let toks = kinds(r#"'it\'s' "a\"b" hex"00ff""#);
        assert_eq!(toks.len(), 3);
        assert!(toks.iter().all(|t| t.0 == TokenKind::StringLiteral));
    }

    proptest::proptest! {
        #[test]
        fn reassembly_is_lossless(src in r#"([a-z_]{1,4}|[0-9]{1,3}|[ \t\n]{1,2}|[-+*/=<>!&|^~?:;,.(){}\[\]]|"[a-z ]{0,4}"|//[a-z ]{0,5}\n|/\*[a-z\n]{0,5}\*/){0,40}"#) {
            if let Ok(tokens) = tokenize(&src) {
                proptest::prop_assert_eq!(reassemble(&src, &tokens), src.clone());
                // Gaps between tokens hold nothing but whitespace.
                let mut last = 0;
                for t in &tokens {
                    proptest::prop_assert!(src[last..t.span.start].chars().all(char::is_whitespace));
                    last = t.span.end;
                }
                proptest::prop_assert!(src[last..].chars().all(char::is_whitespace));
            }
        }
    }
}
