//! Reader and writer for the Turtle subset used by ground-truth files.
//!
//! Supported: `@prefix` declarations, `<absolute-iri>`, prefixed names, the
//! `a` keyword, single- and double-quoted single-line strings, bare numeric
//! and boolean literals, `#` comments, and one `.`-terminated triple per
//! statement. Blank nodes, collections, `;`/`,` lists, language tags and
//! datatypes are rejected with a syntax error.

use std::collections::BTreeSet;
use std::fmt::Write as _;

use super::term::{escape_literal, PrefixTable, Term, Triple, RDF_TYPE};
use super::KnowledgeGraph;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum TurtleError {
    #[error("syntax error at {line}:{column}: {message}")]
    Syntax { line: usize, column: usize, message: String },
    #[error("unknown prefix `{prefix}:` at {line}:{column}")]
    UnknownPrefix { prefix: String, line: usize, column: usize },
}

#[derive(Debug, Clone, PartialEq)]
enum Token {
    PrefixDirective,
    IriRef(String),
    PName { prefix: String, local: String },
    Str(String),
    Plain(String),
    A,
    Dot,
}

#[derive(Debug, Clone, Copy)]
struct Pos {
    line: usize,
    column: usize,
}

struct Lexer {
    chars: Vec<char>,
    idx: usize,
    line: usize,
    column: usize,
}

impl Lexer {
    fn new(input: &str) -> Self {
        Self { chars: input.chars().collect(), idx: 0, line: 1, column: 1 }
    }

    fn peek(&self) -> Option<char> {
        self.chars.get(self.idx).copied()
    }

    fn peek_at(&self, offset: usize) -> Option<char> {
        self.chars.get(self.idx + offset).copied()
    }

    fn bump(&mut self) -> Option<char> {
        let c = self.chars.get(self.idx).copied()?;
        self.idx += 1;
        if c == '\n' {
            self.line += 1;
            self.column = 1;
        } else {
            self.column += 1;
        }
        Some(c)
    }

    fn pos(&self) -> Pos {
        Pos { line: self.line, column: self.column }
    }

    fn error(pos: Pos, message: impl Into<String>) -> TurtleError {
        TurtleError::Syntax { line: pos.line, column: pos.column, message: message.into() }
    }

    fn skip_trivia(&mut self) {
        while let Some(c) = self.peek() {
            if c.is_whitespace() {
                self.bump();
            } else if c == '#' {
                while let Some(c) = self.peek() {
                    if c == '\n' {
                        break;
                    }
                    self.bump();
                }
            } else {
                break;
            }
        }
    }

    fn next_token(&mut self) -> Result<Option<(Token, Pos)>, TurtleError> {
        self.skip_trivia();
        let pos = self.pos();
        let Some(c) = self.peek() else {
            return Ok(None);
        };
        let token = match c {
            '<' => self.iri_ref(pos)?,
            '"' | '\'' => self.string(pos, c)?,
            '@' => {
                self.bump();
                let word = self.take_while(|c| c.is_ascii_alphabetic());
                if word == "prefix" {
                    Token::PrefixDirective
                } else {
                    return Err(Self::error(pos, format!("unsupported directive `@{word}`")));
                }
            }
            '.' => {
                self.bump();
                Token::Dot
            }
            c if c.is_ascii_digit() || c == '+' || c == '-' => self.number(pos)?,
            c if c.is_alphabetic() || c == '_' || c == ':' => self.name(pos)?,
            ';' | ',' => {
                return Err(Self::error(pos, format!("`{c}` predicate/object lists are not supported")))
            }
            '[' | '(' => return Err(Self::error(pos, "blank nodes and collections are not supported")),
            other => return Err(Self::error(pos, format!("unexpected character `{other}`"))),
        };
        Ok(Some((token, pos)))
    }

    fn take_while(&mut self, f: impl Fn(char) -> bool) -> String {
        let mut out = String::new();
        while let Some(c) = self.peek() {
            if !f(c) {
                break;
            }
            out.push(c);
            self.bump();
        }
        out
    }

    fn iri_ref(&mut self, pos: Pos) -> Result<Token, TurtleError> {
        self.bump();
        let mut iri = String::new();
        loop {
            match self.bump() {
                Some('>') => break,
                Some(c) if c.is_whitespace() => {
                    return Err(Self::error(pos, "whitespace inside IRI reference"))
                }
                Some(c) => iri.push(c),
                None => return Err(Self::error(pos, "unterminated IRI reference")),
            }
        }
        if iri.is_empty() || !iri.contains(':') {
            return Err(Self::error(pos, format!("relative IRI `<{iri}>` is not supported")));
        }
        Ok(Token::IriRef(iri))
    }

    fn string(&mut self, pos: Pos, quote: char) -> Result<Token, TurtleError> {
        self.bump();
        if self.peek() == Some(quote) && self.peek_at(1) == Some(quote) {
            return Err(Self::error(pos, "multi-line literals are not supported"));
        }
        let mut value = String::new();
        loop {
            let c = self.bump().ok_or_else(|| Self::error(pos, "unterminated string literal"))?;
            match c {
                c if c == quote => break,
                '\n' | '\r' => return Err(Self::error(pos, "multi-line literals are not supported")),
                '\\' => {
                    let esc_pos = self.pos();
                    let e = self.bump().ok_or_else(|| Self::error(esc_pos, "dangling escape"))?;
                    match e {
                        't' => value.push('\t'),
                        'n' => value.push('\n'),
                        'r' => value.push('\r'),
                        'b' => value.push('\u{8}'),
                        'f' => value.push('\u{c}'),
                        '"' | '\'' | '\\' => value.push(e),
                        'u' | 'U' => {
                            let width = if e == 'u' { 4 } else { 8 };
                            let hex: String = (0..width).filter_map(|_| self.bump()).collect();
                            let ch = u32::from_str_radix(&hex, 16)
                                .ok()
                                .filter(|_| hex.len() == width)
                                .and_then(char::from_u32)
                                .ok_or_else(|| Self::error(esc_pos, "invalid unicode escape"))?;
                            value.push(ch);
                        }
                        other => {
                            return Err(Self::error(esc_pos, format!("unknown escape `\\{other}`")))
                        }
                    }
                }
                c => value.push(c),
            }
        }
        if matches!(self.peek(), Some('@') | Some('^')) {
            return Err(Self::error(self.pos(), "language tags and datatypes are not supported"));
        }
        Ok(Token::Str(value))
    }

    fn number(&mut self, pos: Pos) -> Result<Token, TurtleError> {
        let mut text = String::new();
        if let Some(sign @ ('+' | '-')) = self.peek() {
            text.push(sign);
            self.bump();
        }
        text.push_str(&self.take_while(|c| c.is_ascii_digit()));
        if self.peek() == Some('.') && self.peek_at(1).is_some_and(|c| c.is_ascii_digit()) {
            self.bump();
            text.push('.');
            text.push_str(&self.take_while(|c| c.is_ascii_digit()));
        }
        if matches!(self.peek(), Some('e' | 'E')) {
            text.push(self.bump().unwrap_or('e'));
            if let Some(sign @ ('+' | '-')) = self.peek() {
                text.push(sign);
                self.bump();
            }
            let exp = self.take_while(|c| c.is_ascii_digit());
            if exp.is_empty() {
                return Err(Self::error(pos, "malformed exponent"));
            }
            text.push_str(&exp);
        }
        if !text.chars().any(|c| c.is_ascii_digit()) {
            return Err(Self::error(pos, format!("malformed number `{text}`")));
        }
        Ok(Token::Plain(text))
    }

    fn name(&mut self, pos: Pos) -> Result<Token, TurtleError> {
        let mut raw =
            self.take_while(|c| c.is_alphanumeric() || matches!(c, '_' | '-' | '.' | ':' | '%'));
        // A name never ends with '.', so trailing dots are statement terminators.
        while raw.ends_with('.') {
            raw.pop();
            self.idx -= 1;
            self.column -= 1;
        }
        if let Some((prefix, local)) = raw.split_once(':') {
            return Ok(Token::PName { prefix: prefix.to_string(), local: local.to_string() });
        }
        match raw.as_str() {
            "a" => Ok(Token::A),
            "true" | "false" => Ok(Token::Plain(raw)),
            _ => Err(Self::error(pos, format!("unexpected bare word `{raw}`"))),
        }
    }
}

#[derive(Clone, Copy)]
enum Slot {
    Subject,
    Predicate,
    Object,
}

/// Parses `input`, resolving prefixed names against `prefixes` plus any
/// declarations found in the document. Returns the triple set together with
/// the merged prefix table.
pub fn parse_turtle(
    input: &str,
    prefixes: Option<&PrefixTable>,
) -> Result<(BTreeSet<Triple>, PrefixTable), TurtleError> {
    let mut table = prefixes.cloned().unwrap_or_default();
    let mut triples = BTreeSet::new();
    let mut lexer = Lexer::new(input);

    let expect = |lexer: &mut Lexer, what: &str| -> Result<(Token, Pos), TurtleError> {
        let pos = lexer.pos();
        lexer
            .next_token()?
            .ok_or_else(|| Lexer::error(pos, format!("unexpected end of input, expected {what}")))
    };

    while let Some((token, pos)) = lexer.next_token()? {
        if token == Token::PrefixDirective {
            let (name, name_pos) = expect(&mut lexer, "prefix name")?;
            let Token::PName { prefix, local } = name else {
                return Err(Lexer::error(name_pos, "expected prefix name like `ex:`"));
            };
            if !local.is_empty() {
                return Err(Lexer::error(name_pos, "prefix name must end with `:`"));
            }
            let (iri, iri_pos) = expect(&mut lexer, "IRI")?;
            let Token::IriRef(base) = iri else {
                return Err(Lexer::error(iri_pos, "expected `<iri>` in prefix declaration"));
            };
            let (dot, dot_pos) = expect(&mut lexer, "`.`")?;
            if dot != Token::Dot {
                return Err(Lexer::error(dot_pos, "expected `.` after prefix declaration"));
            }
            table.insert(prefix, base);
            continue;
        }

        let subject = term_for(token, pos, Slot::Subject, &table)?;
        let (tok, p) = expect(&mut lexer, "predicate")?;
        let predicate = term_for(tok, p, Slot::Predicate, &table)?;
        let (tok, p) = expect(&mut lexer, "object")?;
        let object = term_for(tok, p, Slot::Object, &table)?;
        let (dot, dot_pos) = expect(&mut lexer, "`.`")?;
        if dot != Token::Dot {
            return Err(Lexer::error(dot_pos, "expected `.` terminating the statement"));
        }
        let triple = Triple::new(subject, predicate, object)
            .map_err(|e| Lexer::error(pos, e.to_string()))?;
        triples.insert(triple);
    }
    Ok((triples, table))
}

fn term_for(token: Token, pos: Pos, slot: Slot, table: &PrefixTable) -> Result<Term, TurtleError> {
    let iri = match token {
        Token::IriRef(iri) => iri,
        Token::PName { prefix, local } => match table.get(&prefix) {
            Some(base) => format!("{base}{local}"),
            None => {
                return Err(TurtleError::UnknownPrefix {
                    prefix,
                    line: pos.line,
                    column: pos.column,
                })
            }
        },
        Token::A if matches!(slot, Slot::Predicate) => RDF_TYPE.to_string(),
        Token::Str(value) | Token::Plain(value) if matches!(slot, Slot::Object) => {
            return Ok(Term::Literal(value))
        }
        other => {
            let what = match slot {
                Slot::Subject => "subject",
                Slot::Predicate => "predicate",
                Slot::Object => "object",
            };
            return Err(Lexer::error(pos, format!("unexpected {other:?} in {what} position")));
        }
    };
    Term::iri(iri).map_err(|e| Lexer::error(pos, e.to_string()))
}

/// Writes the graph's prefix declarations followed by one line per triple,
/// sorted by subject, predicate, object.
pub fn serialize_turtle(graph: &KnowledgeGraph) -> String {
    write_turtle(graph.triples(), graph.prefixes())
}

pub fn write_turtle<'a>(triples: impl IntoIterator<Item = &'a Triple>, prefixes: &PrefixTable) -> String {
    let mut out = String::new();
    for (prefix, base) in prefixes.iter() {
        let _ = writeln!(out, "@prefix {prefix}: <{base}> .");
    }
    let mut sorted: Vec<&Triple> = triples.into_iter().collect();
    sorted.sort();
    if !prefixes.is_empty() && !sorted.is_empty() {
        out.push('\n');
    }
    for t in sorted {
        let _ = writeln!(
            out,
            "{} {} {} .",
            render(t.subject(), prefixes),
            render(t.predicate(), prefixes),
            render(t.object(), prefixes)
        );
    }
    out
}

fn render(term: &Term, prefixes: &PrefixTable) -> String {
    match term {
        Term::Iri(iri) => prefixes.compact(iri).unwrap_or_else(|| format!("<{iri}>")),
        Term::Literal(v) => format!("\"{}\"", escape_literal(v)),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(input: &str) -> Result<BTreeSet<Triple>, TurtleError> {
        parse_turtle(input, None).map(|(t, _)| t)
    }

    #[test]
    fn single_statement() {
        let t = parse("@prefix : <http://ex/> . :a :b :c .").unwrap();
        let expected = Triple::iris("http://ex/a", "http://ex/b", "http://ex/c").unwrap();
        assert_eq!(t.into_iter().collect::<Vec<_>>(), vec![expected]);
    }

    #[test]
    fn empty_document() {
        assert!(parse("").unwrap().is_empty());
        assert!(parse("  # only a comment\n").unwrap().is_empty());
    }

    #[test]
    fn duplicates_collapse() {
        let t = parse("<http://a> <http://b> <http://c> .\n<http://a> <http://b> <http://c> .").unwrap();
        assert_eq!(t.len(), 1);
    }

    #[test]
    fn a_keyword_and_literals() {
        let doc = r#"@prefix ex: <http://ex/> .
ex:x a ex:Thing .
ex:x ex:label "say \"hi\"\tnow" .
ex:x ex:alt 'single' .
ex:x ex:count 42 .
ex:x ex:ratio -0.5e3 .
ex:x ex:flag true .
"#;
        let t = parse(doc).unwrap();
        let objects: Vec<_> = t.iter().map(|t| t.object().clone()).collect();
        assert!(t.iter().any(|t| t.predicate().value() == RDF_TYPE));
        assert!(objects.contains(&Term::literal("say \"hi\"\tnow")));
        assert!(objects.contains(&Term::literal("single")));
        assert!(objects.contains(&Term::literal("42")));
        assert!(objects.contains(&Term::literal("-0.5e3")));
        assert!(objects.contains(&Term::literal("true")));
    }

    #[test]
    fn name_followed_by_dot_without_space() {
        let t = parse("@prefix : <http://ex/> .\n:a :b :c.").unwrap();
        assert_eq!(t.iter().next().unwrap().object().value(), "http://ex/c");
    }

    #[test]
    fn unknown_prefix_reports_position() {
        let err = parse("@prefix : <http://ex/> .\n:a zz:b :c .").unwrap_err();
        assert_eq!(err, TurtleError::UnknownPrefix { prefix: "zz".into(), line: 2, column: 4 });
    }

    #[test]
    fn syntax_errors_carry_line_and_column() {
        let err = parse("<http://a> <http://b> <http://c>\n<http://d> <http://e> <http://f> .").unwrap_err();
        assert!(matches!(err, TurtleError::Syntax { line: 2, column: 1, .. }), "{err:?}");

        for bad in [
            "<http://a> <http://b> [] .",
            "<http://a> <http://b> <http://c> ; <http://d> <http://e> .",
            "<http://a> <http://b> \"x\"@en .",
            "<http://a> <http://b> \"\"\"long\"\"\" .",
            "<http://a> <http://b> \"line\nbreak\" .",
            "<rel> <http://b> <http://c> .",
            "\"lit\" <http://b> <http://c> .",
            "<http://a> \"lit\" <http://c> .",
            "<http://a> <http://b> <http://c>",
            "@base <http://x/> .",
        ] {
            assert!(matches!(parse(bad), Err(TurtleError::Syntax { .. })), "accepted: {bad}");
        }
    }

    #[test]
    fn external_prefix_table_is_used_and_returned() {
        let mut p = PrefixTable::new();
        p.insert("ex", "http://ex/");
        let (t, table) = parse_turtle("@prefix y: <http://y/> . ex:a y:b ex:c .", Some(&p)).unwrap();
        assert_eq!(t.len(), 1);
        assert_eq!(table.get("ex"), Some("http://ex/"));
        assert_eq!(table.get("y"), Some("http://y/"));
    }

    #[test]
    fn serializer_compacts_and_escapes() {
        let mut prefixes = PrefixTable::new();
        prefixes.insert("", "http://ex/");
        let t = Triple::new(
            Term::iri("http://ex/a").unwrap(),
            Term::iri("http://other/p q".replace(' ', "")).unwrap(),
            Term::literal("x\"y\nz"),
        )
        .unwrap();
        let text = write_turtle([&t], &prefixes);
        assert_eq!(text, "@prefix : <http://ex/> .\n\n:a <http://other/pq> \"x\\\"y\\nz\" .\n");
        let (back, _) = parse_turtle(&text, None).unwrap();
        assert_eq!(back.into_iter().next().unwrap(), t);
    }
}
