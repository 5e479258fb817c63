//! The three text formats: specification files, episode files and domain
//! files, plus the canonical printers.
//!
//! All grammars are s-expressions over identifiers (letters, digits, `-`,
//! `_`, `/`). A `;` starts a comment that runs to the end of the line.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use crate::error::{ParseError, ParseErrorKind, Position, SpecError};
use crate::model::{
    is_ident_char, AbstractUtterance, DialogExpr, DialogType, Domains, EnumeratedSpec, Episode,
    QuestionId, Response, ResponseDomain, SpecUnion, Term,
};

struct Cursor<'a> {
    src: &'a str,
    offset: usize,
    line: usize,
    column: usize,
}

impl<'a> Cursor<'a> {
    fn new(src: &'a str) -> Self {
        Self {
            src,
            offset: 0,
            line: 1,
            column: 1,
        }
    }

    fn pos(&self) -> Position {
        Position {
            offset: self.offset,
            line: self.line,
            column: self.column,
        }
    }

    fn peek(&self) -> Option<char> {
        self.src[self.offset..].chars().next()
    }

    fn bump(&mut self) -> Option<char> {
        let c = self.peek()?;
        self.offset += c.len_utf8();
        if c == '\n' {
            self.line += 1;
            self.column = 1;
        } else {
            self.column += 1;
        }
        Some(c)
    }

    fn skip_ws(&mut self) {
        while let Some(c) = self.peek() {
            if c.is_whitespace() {
                self.bump();
            } else if c == ';' {
                while let Some(c) = self.bump() {
                    if c == '\n' {
                        break;
                    }
                }
            } else {
                break;
            }
        }
    }

    fn at_end(&self) -> bool {
        self.offset >= self.src.len()
    }

    fn err<T>(&self, kind: ParseErrorKind) -> Result<T, ParseError> {
        Err(ParseError {
            kind,
            pos: self.pos(),
        })
    }

    fn syntax<T>(&self, msg: impl Into<String>) -> Result<T, ParseError> {
        self.err(ParseErrorKind::Syntax(msg.into()))
    }

    fn describe_next(&self) -> String {
        match self.peek() {
            None => "end of input".to_string(),
            Some(c) => format!("`{c}`"),
        }
    }

    fn expect(&mut self, want: char) -> Result<(), ParseError> {
        if self.peek() == Some(want) {
            self.bump();
            Ok(())
        } else {
            self.syntax(format!("expected `{want}`, found {}", self.describe_next()))
        }
    }

    fn ident(&mut self) -> Result<&'a str, ParseError> {
        let start = self.offset;
        while self.peek().is_some_and(is_ident_char) {
            self.bump();
        }
        if start == self.offset {
            return self.syntax(format!(
                "expected identifier, found {}",
                self.describe_next()
            ));
        }
        Ok(&self.src[start..self.offset])
    }

    fn question(&mut self) -> Result<QuestionId, ParseError> {
        let s = self.ident()?;
        Ok(QuestionId::new(s).expect("ident chars checked"))
    }

    fn response(&mut self) -> Result<Response, ParseError> {
        let s = self.ident()?;
        Ok(Response::new(s).expect("ident chars checked"))
    }
}

/// Parses a specification file: one or more expressions whose union is the
/// dialog.
pub fn parse_spec(text: &str) -> Result<SpecUnion, ParseError> {
    let mut cur = Cursor::new(text);
    let mut exprs = Vec::new();
    cur.skip_ws();
    let start = cur.pos();
    while !cur.at_end() {
        exprs.push(parse_expr(&mut cur)?);
        cur.skip_ws();
    }
    if exprs.is_empty() {
        return cur.syntax("expected `(`, found end of input");
    }
    SpecUnion::new(exprs).map_err(|e| ParseError {
        kind: e.into(),
        pos: start,
    })
}

/// Parses a single expression (no trailing input allowed).
pub fn parse_expr_str(text: &str) -> Result<DialogExpr, ParseError> {
    let mut cur = Cursor::new(text);
    cur.skip_ws();
    let e = parse_expr(&mut cur)?;
    cur.skip_ws();
    if !cur.at_end() {
        return cur.syntax(format!("unexpected {}", cur.describe_next()));
    }
    Ok(e)
}

fn parse_expr(cur: &mut Cursor<'_>) -> Result<DialogExpr, ParseError> {
    let start = cur.pos();
    cur.expect('(')?;
    cur.skip_ws();
    cur.expect('"')?;
    let tag_pos = cur.pos();
    let tag_start = cur.offset;
    while cur.peek().is_some_and(|c| c != '"' && c != '\n') {
        cur.bump();
    }
    let tag = &cur.src[tag_start..cur.offset];
    cur.expect('"')?;
    let numerator = DialogType::from_tag(tag).ok_or(ParseError {
        kind: ParseErrorKind::UnknownTag(tag.to_string()),
        pos: tag_pos,
    })?;
    let mut terms = Vec::new();
    loop {
        let before = cur.offset;
        cur.skip_ws();
        match cur.peek() {
            Some(')') => {
                cur.bump();
                break;
            }
            Some('(') => {
                if before == cur.offset {
                    return cur.syntax("expected whitespace before term");
                }
                terms.push(Term::Expr(parse_expr(cur)?));
            }
            Some(_) => {
                if before == cur.offset {
                    return cur.syntax(format!(
                        "expected whitespace, found {}",
                        cur.describe_next()
                    ));
                }
                terms.push(Term::Question(cur.question()?));
            }
            None => return cur.syntax("unclosed `(`"),
        }
    }
    if terms.is_empty() {
        return Err(ParseError {
            kind: ParseErrorKind::Syntax(format!("\"{tag}\" needs at least one term")),
            pos: start,
        });
    }
    DialogExpr::new(numerator, terms).map_err(|e| ParseError {
        kind: e.into(),
        pos: start,
    })
}

/// Parses an episodes file: a parenthesized list of episodes, each a list of
/// questions or parenthesized multi-question utterances.
pub fn parse_episodes(text: &str) -> Result<EnumeratedSpec, ParseError> {
    let mut cur = Cursor::new(text);
    cur.skip_ws();
    cur.expect('(')?;
    let mut parsed: Vec<(Position, Episode)> = Vec::new();
    loop {
        cur.skip_ws();
        match cur.peek() {
            Some(')') => {
                cur.bump();
                break;
            }
            Some('(') => {
                let pos = cur.pos();
                parsed.push((pos, parse_episode(&mut cur)?));
            }
            None => return cur.syntax("unclosed episode list"),
            Some(_) => return cur.syntax(format!("expected `(`, found {}", cur.describe_next())),
        }
    }
    cur.skip_ws();
    if !cur.at_end() {
        return cur.syntax(format!(
            "unexpected {} after episode list",
            cur.describe_next()
        ));
    }
    let Some((_, first)) = parsed.first() else {
        return cur.syntax("episode list is empty");
    };
    let order = crate::model::first_seen_order(first);
    let questions: BTreeSet<_> = order.iter().cloned().collect();
    let mut episodes = BTreeSet::new();
    for (pos, ep) in parsed {
        if ep.question_set() != questions {
            return Err(ParseError {
                kind: SpecError::InconsistentCoverage.into(),
                pos,
            });
        }
        episodes.insert(ep);
    }
    EnumeratedSpec::new(order, episodes).map_err(|e| ParseError {
        kind: e.into(),
        pos: Position::default(),
    })
}

fn parse_episode(cur: &mut Cursor<'_>) -> Result<Episode, ParseError> {
    cur.expect('(')?;
    let mut seen = BTreeSet::new();
    let mut utterances = Vec::new();
    loop {
        cur.skip_ws();
        let pos = cur.pos();
        match cur.peek() {
            Some(')') => {
                cur.bump();
                break;
            }
            Some('(') => {
                cur.bump();
                let mut group = Vec::new();
                loop {
                    cur.skip_ws();
                    if cur.peek() == Some(')') {
                        cur.bump();
                        break;
                    }
                    if cur.at_end() {
                        return cur.syntax("unclosed utterance group");
                    }
                    group.push((cur.pos(), cur.question()?));
                }
                if group.len() < 2 {
                    return Err(ParseError {
                        kind: ParseErrorKind::Syntax(
                            "a parenthesized utterance needs at least two questions".to_string(),
                        ),
                        pos,
                    });
                }
                for (p, x) in &group {
                    if !seen.insert(x.clone()) {
                        return Err(ParseError {
                            kind: SpecError::OverlappingUtterances(x.clone()).into(),
                            pos: *p,
                        });
                    }
                }
                utterances.push(AbstractUtterance::new(group.into_iter().map(|(_, x)| x)).unwrap());
            }
            Some(_) => {
                let x = cur.question()?;
                if !seen.insert(x.clone()) {
                    return Err(ParseError {
                        kind: SpecError::OverlappingUtterances(x).into(),
                        pos,
                    });
                }
                utterances.push(AbstractUtterance::single(x));
            }
            None => return cur.syntax("unclosed episode"),
        }
    }
    if utterances.is_empty() {
        return cur.syntax("an episode needs at least one utterance");
    }
    Ok(Episode::new(utterances))
}

/// Parses a domains file: `(domain q (v1 v2 ...))` forms.
pub fn parse_domains(text: &str) -> Result<Domains, ParseError> {
    let mut cur = Cursor::new(text);
    let mut out = BTreeMap::new();
    cur.skip_ws();
    if cur.at_end() {
        return cur.syntax("expected `(domain ...)`, found end of input");
    }
    while !cur.at_end() {
        let start = cur.pos();
        cur.expect('(')?;
        cur.skip_ws();
        let kw = cur.ident()?;
        if kw != "domain" {
            return Err(ParseError {
                kind: ParseErrorKind::Syntax(format!("expected `domain`, found `{kw}`")),
                pos: start,
            });
        }
        cur.skip_ws();
        let question = cur.question()?;
        cur.skip_ws();
        cur.expect('(')?;
        let mut values = BTreeSet::new();
        loop {
            cur.skip_ws();
            let pos = cur.pos();
            match cur.peek() {
                Some(')') => {
                    cur.bump();
                    break;
                }
                None => return cur.syntax("unclosed value list"),
                Some(_) => {
                    let v = cur.response()?;
                    if !values.insert(v.clone()) {
                        return Err(ParseError {
                            kind: ParseErrorKind::Syntax(format!("response `{v}` listed twice")),
                            pos,
                        });
                    }
                }
            }
        }
        cur.skip_ws();
        cur.expect(')')?;
        let Some(domain) = ResponseDomain::new(question.clone(), values) else {
            return Err(ParseError {
                kind: ParseErrorKind::EmptyDomain(question),
                pos: start,
            });
        };
        if out.insert(question.clone(), domain).is_some() {
            return Err(ParseError {
                kind: ParseErrorKind::DuplicateDomain(question),
                pos: start,
            });
        }
        cur.skip_ws();
    }
    Ok(out)
}

/// Canonical printer: one expression per line.
pub fn render_spec(u: &SpecUnion) -> String {
    let mut s = String::new();
    for e in u.exprs() {
        s.push_str(&format!("{e}\n"));
    }
    s
}

/// Episodes sorted by their rendered form.
pub fn sorted_episode_lines(spec: &EnumeratedSpec) -> Vec<String> {
    let mut lines: Vec<String> = spec.episodes().iter().map(|e| format!("{e}")).collect();
    lines.sort();
    lines
}

/// Renders a parseable episodes file, one episode per line.
pub fn render_episodes(spec: &EnumeratedSpec) -> String {
    let mut s = String::from("(\n");
    for line in sorted_episode_lines(spec) {
        s.push(' ');
        s.push_str(&line);
        s.push('\n');
    }
    s.push_str(")\n");
    s
}

/// Renders a domains file.
pub fn render_domains(domains: &Domains) -> String {
    let mut s = String::new();
    for d in domains.values() {
        s.push_str(&format!("(domain {} (", d.question));
        for (i, v) in d.allowed().iter().enumerate() {
            if i > 0 {
                s.push(' ');
            }
            s.push_str(v.as_str());
        }
        s.push_str("))\n");
    }
    s
}
