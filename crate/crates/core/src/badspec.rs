//! Bad-behavior specifications: a bounded regular expression or an explicit
//! word list, compiled to a finite-language automaton.
//!
//! ```text
//! regex: <ANY>* pause <ANY - resume>* send <ANY>*
//! maxlen: 10
//! ```
//!
//! Clauses are separated by newlines or `;`. A `list:` clause takes words
//! separated by `,` or on the following lines; a word written `eps` is the
//! empty word.

use std::fmt;

use thiserror::Error;

use crate::automata::{
    self, Alphabet, AutomataError, Label, Nfa, StateId, Symbol, Word, EPS_TOKEN,
};
use crate::parse::ParseError;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum BadSpecError {
    #[error("{0}")]
    Parse(#[from] ParseError),
    #[error("missing maxlen clause")]
    MissingMaxlen,
    #[error("missing regex or list clause")]
    MissingPattern,
    #[error("minlen {minlen} exceeds maxlen {maxlen}")]
    EmptyWindow { minlen: usize, maxlen: usize },
    #[error(transparent)]
    Automata(#[from] AutomataError),
}

pub type Result<T, E = BadSpecError> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Regex {
    Atom(Symbol),
    /// `<ANY>`
    Any,
    /// `<ANY - a b>`
    AnyExcept(Vec<Symbol>),
    Concat(Vec<Regex>),
    Alt(Vec<Regex>),
    Star(Box<Regex>),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum BadPattern {
    Regex(Regex),
    List(Vec<Word>),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BadSpec {
    pub pattern: BadPattern,
    pub alphabet: Alphabet,
    pub minlen: usize,
    pub maxlen: usize,
}

impl BadSpec {
    /// Same pattern and alphabet, different length window.
    pub fn with_window(&self, minlen: usize, maxlen: usize) -> BadSpec {
        BadSpec {
            minlen,
            maxlen,
            ..self.clone()
        }
    }

    pub fn compile(&self) -> Result<Nfa> {
        compile_badspec(self)
    }
}

// ---------------------------------------------------------------------------
// Parsing

#[derive(Debug, Clone, Copy)]
struct Span<'a> {
    line: usize,
    column: usize,
    text: &'a str,
}

impl<'a> Span<'a> {
    fn error(&self, message: impl Into<String>) -> BadSpecError {
        BadSpecError::Parse(ParseError::new(self.line, self.column, message))
    }

    fn advance(&self, bytes: usize) -> Span<'a> {
        Span {
            line: self.line,
            column: self.column + self.text[..bytes].chars().count(),
            text: &self.text[bytes..],
        }
    }

    fn trim(&self) -> Span<'a> {
        let start = self.text.len() - self.text.trim_start().len();
        let s = self.advance(start);
        Span {
            text: s.text.trim_end(),
            ..s
        }
    }
}

enum ClauseKind {
    Regex,
    List,
    Minlen,
    Maxlen,
}

/// Parses a bad-spec file against the system alphabet.
pub fn parse_badspec(text: &str, alphabet: &Alphabet) -> Result<BadSpec> {
    let mut clauses: Vec<(Span<'_>, ClauseKind, Vec<Span<'_>>)> = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let content = raw.split('#').next().unwrap_or("");
        let mut rest = Span {
            line: i + 1,
            column: 1,
            text: content,
        };
        let mut first = true;
        loop {
            let (piece, next) = match rest.text.find(';') {
                Some(k) => (
                    Span {
                        text: &rest.text[..k],
                        ..rest
                    },
                    Some(rest.advance(k + 1)),
                ),
                None => (rest, None),
            };
            let piece = piece.trim();
            if !piece.text.is_empty() {
                let keyword = ["regex:", "list:", "minlen:", "maxlen:"]
                    .into_iter()
                    .find(|k| piece.text.starts_with(k));
                match keyword {
                    Some(k) => {
                        let kind = match k {
                            "regex:" => ClauseKind::Regex,
                            "list:" => ClauseKind::List,
                            "minlen:" => ClauseKind::Minlen,
                            _ => ClauseKind::Maxlen,
                        };
                        clauses.push((piece, kind, vec![piece.advance(k.len()).trim()]));
                    }
                    None => match clauses.last_mut() {
                        // Continuation of the previous clause on a new line.
                        Some((_, ClauseKind::List | ClauseKind::Regex, body)) if first => {
                            body.push(piece)
                        }
                        _ => return Err(piece.error("expected regex:, list:, minlen: or maxlen:")),
                    },
                }
            }
            first = false;
            match next {
                Some(n) => rest = n,
                None => break,
            }
        }
    }

    let mut pattern: Option<BadPattern> = None;
    let mut minlen: Option<usize> = None;
    let mut maxlen: Option<usize> = None;
    for (head, kind, body) in clauses {
        match kind {
            ClauseKind::Regex | ClauseKind::List if pattern.is_some() => {
                return Err(head.error("only one regex or list clause is allowed"))
            }
            ClauseKind::Regex => {
                pattern = Some(BadPattern::Regex(parse_regex(&body, alphabet, head)?))
            }
            ClauseKind::List => pattern = Some(BadPattern::List(parse_list(&body, alphabet)?)),
            ClauseKind::Minlen | ClauseKind::Maxlen => {
                let slot = if matches!(kind, ClauseKind::Minlen) {
                    &mut minlen
                } else {
                    &mut maxlen
                };
                if slot.is_some() {
                    return Err(head.error("duplicate length clause"));
                }
                let value = body[0];
                *slot = Some(value.text.parse().map_err(|_| {
                    value.error(format!("expected a length, found {:?}", value.text))
                })?);
            }
        }
    }
    let pattern = pattern.ok_or(BadSpecError::MissingPattern)?;
    let maxlen = maxlen.ok_or(BadSpecError::MissingMaxlen)?;
    let minlen = minlen.unwrap_or(0);
    if minlen > maxlen {
        return Err(BadSpecError::EmptyWindow { minlen, maxlen });
    }
    Ok(BadSpec {
        pattern,
        alphabet: alphabet.clone(),
        minlen,
        maxlen,
    })
}

fn lookup(span: Span<'_>, alphabet: &Alphabet) -> Result<Symbol> {
    match alphabet.index_of_name(span.text) {
        Some(i) => Ok(alphabet.symbol(i).clone()),
        None => Err(span.error(format!("unknown action {:?}", span.text))),
    }
}

fn parse_list(body: &[Span<'_>], alphabet: &Alphabet) -> Result<Vec<Word>> {
    let mut words = Vec::new();
    for segment in body {
        if segment.text.is_empty() {
            continue;
        }
        let mut rest = *segment;
        loop {
            let (piece, next) = match rest.text.find(',') {
                Some(k) => (
                    Span {
                        text: &rest.text[..k],
                        ..rest
                    },
                    Some(rest.advance(k + 1)),
                ),
                None => (rest, None),
            };
            let piece = piece.trim();
            if piece.text.is_empty() {
                return Err(piece.error("empty word in list; write eps for the empty word"));
            }
            let mut word = Word::new();
            if piece.text != EPS_TOKEN {
                let mut offset = 0;
                for token in piece.text.split_whitespace() {
                    let at = piece.text[offset..].find(token).unwrap() + offset;
                    offset = at + token.len();
                    let span = Span {
                        text: token,
                        ..piece.advance(at)
                    };
                    if token == EPS_TOKEN {
                        return Err(span.error("eps must stand alone"));
                    }
                    word.push(lookup(span, alphabet)?);
                }
            }
            words.push(word);
            match next {
                Some(n) => rest = n,
                None => break,
            }
        }
    }
    Ok(words)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Tok<'a> {
    LParen,
    RParen,
    Bar,
    Star,
    LAngle,
    RAngle,
    Name(&'a str),
}

fn lex<'a>(body: &[Span<'a>]) -> Vec<(Span<'a>, Tok<'a>)> {
    let mut out = Vec::new();
    for segment in body {
        let text = segment.text;
        let mut start: Option<usize> = None;
        let flush = |start: &mut Option<usize>, end: usize, out: &mut Vec<(Span<'a>, Tok<'a>)>| {
            if let Some(s) = start.take() {
                let span = Span {
                    text: &text[s..end],
                    ..segment.advance(s)
                };
                out.push((span, Tok::Name(span.text)));
            }
        };
        for (i, ch) in text.char_indices() {
            let tok = match ch {
                '(' => Some(Tok::LParen),
                ')' => Some(Tok::RParen),
                '|' => Some(Tok::Bar),
                '*' => Some(Tok::Star),
                '<' => Some(Tok::LAngle),
                '>' => Some(Tok::RAngle),
                _ => None,
            };
            if ch.is_whitespace() || tok.is_some() {
                flush(&mut start, i, &mut out);
                if let Some(t) = tok {
                    let span = Span {
                        text: &text[i..i + 1],
                        ..segment.advance(i)
                    };
                    out.push((span, t));
                }
            } else if start.is_none() {
                start = Some(i);
            }
        }
        flush(&mut start, text.len(), &mut out);
    }
    out
}

struct RegexParser<'a, 'b> {
    tokens: Vec<(Span<'a>, Tok<'a>)>,
    pos: usize,
    alphabet: &'b Alphabet,
    end: Span<'a>,
}

impl<'a> RegexParser<'a, '_> {
    fn peek(&self) -> Option<Tok<'a>> {
        self.tokens.get(self.pos).map(|t| t.1)
    }

    fn here(&self) -> Span<'a> {
        self.tokens.get(self.pos).map_or(self.end, |t| t.0)
    }

    fn expect(&mut self, tok: Tok<'a>, what: &str) -> Result<()> {
        if self.peek() == Some(tok) {
            self.pos += 1;
            Ok(())
        } else {
            Err(self.here().error(format!("expected {what}")))
        }
    }

    fn expr(&mut self) -> Result<Regex> {
        let mut terms = vec![self.term()?];
        while self.peek() == Some(Tok::Bar) {
            self.pos += 1;
            terms.push(self.term()?);
        }
        Ok(if terms.len() == 1 {
            terms.pop().unwrap()
        } else {
            Regex::Alt(terms)
        })
    }

    fn term(&mut self) -> Result<Regex> {
        let mut factors = Vec::new();
        while matches!(self.peek(), Some(Tok::Name(_) | Tok::LParen | Tok::LAngle)) {
            factors.push(self.factor()?);
        }
        match factors.len() {
            0 => Err(self.here().error("expected an action, <ANY> or (")),
            1 => Ok(factors.pop().unwrap()),
            _ => Ok(Regex::Concat(factors)),
        }
    }

    fn factor(&mut self) -> Result<Regex> {
        let mut atom = self.atom()?;
        while self.peek() == Some(Tok::Star) {
            self.pos += 1;
            atom = Regex::Star(Box::new(atom));
        }
        Ok(atom)
    }

    fn atom(&mut self) -> Result<Regex> {
        let span = self.here();
        match self.peek() {
            Some(Tok::Name(_)) => {
                self.pos += 1;
                Ok(Regex::Atom(lookup(span, self.alphabet)?))
            }
            Some(Tok::LParen) => {
                self.pos += 1;
                let inner = self.expr()?;
                self.expect(Tok::RParen, ")")?;
                Ok(inner)
            }
            Some(Tok::LAngle) => {
                self.pos += 1;
                self.expect(Tok::Name("ANY"), "ANY after <")?;
                match self.peek() {
                    Some(Tok::RAngle) => {
                        self.pos += 1;
                        Ok(Regex::Any)
                    }
                    Some(Tok::Name("-")) => {
                        self.pos += 1;
                        let mut excluded = Vec::new();
                        while let Some(Tok::Name(_)) = self.peek() {
                            excluded.push(lookup(self.here(), self.alphabet)?);
                            self.pos += 1;
                        }
                        if excluded.is_empty() {
                            return Err(self.here().error("expected actions after -"));
                        }
                        self.expect(Tok::RAngle, ">")?;
                        excluded.sort();
                        excluded.dedup();
                        Ok(Regex::AnyExcept(excluded))
                    }
                    _ => Err(self.here().error("expected > or -")),
                }
            }
            _ => Err(span.error("expected an action, <ANY> or (")),
        }
    }
}

fn parse_regex(body: &[Span<'_>], alphabet: &Alphabet, head: Span<'_>) -> Result<Regex> {
    let tokens = lex(body);
    let last = body.last().copied().unwrap_or(head);
    let end = last.advance(last.text.len());
    let mut p = RegexParser {
        tokens,
        pos: 0,
        alphabet,
        end,
    };
    let regex = p.expr()?;
    if p.pos < p.tokens.len() {
        return Err(p.here().error("unexpected token"));
    }
    Ok(regex)
}

// ---------------------------------------------------------------------------
// Compilation

struct Thompson<'a> {
    nfa: Nfa,
    alphabet: &'a Alphabet,
}

impl Thompson<'_> {
    fn fragment(&mut self, regex: &Regex) -> (StateId, StateId) {
        let start = self.nfa.add_state();
        let end = self.nfa.add_state();
        let edge = |nfa: &mut Nfa, s, l, t| nfa.add_edge(s, l, t).expect("fresh states");
        match regex {
            Regex::Atom(s) => {
                let c = self.alphabet.index_of(s).expect("checked at parse") as u32;
                edge(&mut self.nfa, start, Label::Sym(c), end);
            }
            Regex::Any | Regex::AnyExcept(_) => {
                let excluded: &[Symbol] = match regex {
                    Regex::AnyExcept(xs) => xs,
                    _ => &[],
                };
                for (c, s) in self.alphabet.iter().enumerate() {
                    if !excluded.contains(s) {
                        edge(&mut self.nfa, start, Label::Sym(c as u32), end);
                    }
                }
            }
            Regex::Concat(parts) => {
                let mut cur = start;
                for part in parts {
                    let (s, t) = self.fragment(part);
                    edge(&mut self.nfa, cur, Label::Eps, s);
                    cur = t;
                }
                edge(&mut self.nfa, cur, Label::Eps, end);
            }
            Regex::Alt(parts) => {
                for part in parts {
                    let (s, t) = self.fragment(part);
                    edge(&mut self.nfa, start, Label::Eps, s);
                    edge(&mut self.nfa, t, Label::Eps, end);
                }
            }
            Regex::Star(inner) => {
                let (s, t) = self.fragment(inner);
                edge(&mut self.nfa, start, Label::Eps, end);
                edge(&mut self.nfa, start, Label::Eps, s);
                edge(&mut self.nfa, t, Label::Eps, s);
                edge(&mut self.nfa, t, Label::Eps, end);
            }
        }
        (start, end)
    }
}

/// Unbounded automaton of a regex.
pub fn regex_to_nfa(regex: &Regex, alphabet: &Alphabet) -> Nfa {
    let mut t = Thompson {
        nfa: Nfa::new(alphabet.clone()),
        alphabet,
    };
    let (s, e) = t.fragment(regex);
    t.nfa.add_edge(0, Label::Eps, s).expect("fresh states");
    t.nfa.set_accepting(e, true).expect("fresh states");
    t.nfa
}

/// `M_Bad`: the pattern's words whose length lies in the window, canonical.
pub fn compile_badspec(spec: &BadSpec) -> Result<Nfa> {
    let raw = match &spec.pattern {
        BadPattern::Regex(r) => regex_to_nfa(r, &spec.alphabet),
        BadPattern::List(words) => automata::from_word_set(words, &spec.alphabet)?,
    };
    let window = Nfa::length_window(spec.alphabet.clone(), spec.minlen, spec.maxlen);
    Ok(automata::normalize(&automata::intersect(&raw, &window)?))
}

// ---------------------------------------------------------------------------
// Printing

impl fmt::Display for Regex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fn prec(r: &Regex) -> u8 {
            match r {
                Regex::Alt(_) => 0,
                Regex::Concat(_) => 1,
                _ => 2,
            }
        }
        fn wrapped(f: &mut fmt::Formatter<'_>, r: &Regex, min: u8) -> fmt::Result {
            if prec(r) < min {
                write!(f, "({r})")
            } else {
                write!(f, "{r}")
            }
        }
        match self {
            Regex::Atom(s) => write!(f, "{s}"),
            Regex::Any => write!(f, "<ANY>"),
            Regex::AnyExcept(xs) => {
                write!(f, "<ANY -")?;
                for x in xs {
                    write!(f, " {x}")?;
                }
                write!(f, ">")
            }
            Regex::Concat(parts) => {
                for (i, p) in parts.iter().enumerate() {
                    if i > 0 {
                        write!(f, " ")?;
                    }
                    wrapped(f, p, 2)?;
                }
                Ok(())
            }
            Regex::Alt(parts) => {
                for (i, p) in parts.iter().enumerate() {
                    if i > 0 {
                        write!(f, " | ")?;
                    }
                    wrapped(f, p, 1)?;
                }
                Ok(())
            }
            Regex::Star(inner) => {
                // `(a*)*` needs the parens to survive the round trip unchanged.
                if matches!(**inner, Regex::Star(_)) || prec(inner) < 2 {
                    write!(f, "({inner})*")
                } else {
                    write!(f, "{inner}*")
                }
            }
        }
    }
}

impl fmt::Display for BadSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.pattern {
            BadPattern::Regex(r) => writeln!(f, "regex: {r}")?,
            BadPattern::List(words) => {
                writeln!(f, "list:")?;
                for w in words {
                    if w.is_empty() {
                        writeln!(f, "{EPS_TOKEN}")?;
                    } else {
                        writeln!(f, "{}", automata::format_word(w))?;
                    }
                }
            }
        }
        if self.minlen > 0 {
            writeln!(f, "minlen: {}", self.minlen)?;
        }
        writeln!(f, "maxlen: {}", self.maxlen)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::automata::{count_words, enumerate, parse_word};

    fn ab() -> Alphabet {
        Alphabet::from_names(["a", "b"]).unwrap()
    }

    fn words(nfa: &Nfa) -> Vec<String> {
        enumerate(nfa)
            .unwrap()
            .map(|w| automata::format_word(&w))
            .collect()
    }

    #[test]
    fn single_atom() {
        let spec = parse_badspec("regex: a ; maxlen: 3", &ab()).unwrap();
        assert_eq!(
            spec.pattern,
            BadPattern::Regex(Regex::Atom(Symbol::new("a").unwrap()))
        );
        assert_eq!((spec.minlen, spec.maxlen), (0, 3));
    }

    #[test]
    fn star_window() {
        let a = Alphabet::from_names(["a"]).unwrap();
        let m = parse_badspec("regex: a*\nmaxlen: 2", &a)
            .unwrap()
            .compile()
            .unwrap();
        assert_eq!(words(&m), ["", "a", "a a"]);
    }

    #[test]
    fn window_can_exclude_everything() {
        let m = parse_badspec("regex: a | b; minlen: 2; maxlen: 2", &ab())
            .unwrap()
            .compile()
            .unwrap();
        assert!(automata::is_empty_language(&m));
    }

    #[test]
    fn any_except() {
        let abc = Alphabet::from_names(["a", "b", "c"]).unwrap();
        let m = parse_badspec("regex: a <ANY - a c> <ANY>; minlen: 3; maxlen: 3", &abc)
            .unwrap()
            .compile()
            .unwrap();
        assert_eq!(words(&m), ["a b a", "a b b", "a b c"]);
    }

    #[test]
    fn list_form() {
        let text = "list: a b, b\n  a\neps\nmaxlen: 2";
        let spec = parse_badspec(text, &ab()).unwrap();
        let m = spec.compile().unwrap();
        assert_eq!(words(&m), ["", "a", "b", "a b"]);
        let empty = parse_badspec("list:\nmaxlen: 4", &ab())
            .unwrap()
            .compile()
            .unwrap();
        assert_eq!(count_words(&empty).unwrap(), 0u32.into());
    }

    #[test]
    fn list_respects_window() {
        let m = parse_badspec("list: a a a, b; maxlen: 2", &ab())
            .unwrap()
            .compile()
            .unwrap();
        assert_eq!(words(&m), ["b"]);
    }

    #[test]
    fn errors_carry_positions() {
        let err = |text: &str| match parse_badspec(text, &ab()) {
            Err(BadSpecError::Parse(e)) => (e.line, e.column),
            other => panic!("{other:?}"),
        };
        assert_eq!(err("regex: a c\nmaxlen: 1"), (1, 10));
        assert_eq!(err("maxlen: 1\nregex: (a b"), (2, 12));
        assert_eq!(err("regex: a\nmaxlen: x"), (2, 9));
        assert_eq!(err("regex: a ; bogus: 3"), (1, 12));
        assert_eq!(err("regex: <ANY - > \nmaxlen: 1"), (1, 15));
        assert_eq!(
            parse_badspec("regex: a", &ab()),
            Err(BadSpecError::MissingMaxlen)
        );
        assert_eq!(
            parse_badspec("regex: a; minlen: 3; maxlen: 2", &ab()),
            Err(BadSpecError::EmptyWindow {
                minlen: 3,
                maxlen: 2
            })
        );
    }

    #[test]
    fn multiline_regex() {
        let spec = parse_badspec("regex: a\n  b*\nmaxlen: 2", &ab()).unwrap();
        assert_eq!(
            spec.pattern,
            parse_badspec("regex: a b*; maxlen: 2", &ab())
                .unwrap()
                .pattern
        );
    }

    #[test]
    fn display_round_trips() {
        for text in [
            "regex: (a | b)* a (b a)* | <ANY - b> (a*)*\nminlen: 1\nmaxlen: 4\n",
            "list:\neps\na b\nmaxlen: 3\n",
        ] {
            let spec = parse_badspec(text, &ab()).unwrap();
            assert_eq!(spec.to_string(), text);
            assert_eq!(parse_badspec(&spec.to_string(), &ab()).unwrap(), spec);
        }
    }

    #[test]
    fn pause_send_is_a_case1_word() {
        let sigma = Alphabet::from_names([
            "ack", "cerr", "data", "fail", "fire", "msg", "nack", "ok", "pause", "resume", "send",
            "serr",
        ])
        .unwrap();
        let m = parse_badspec(
            "regex: <ANY>* pause <ANY - resume>* send <ANY>* ; maxlen: 10",
            &sigma,
        )
        .unwrap()
        .compile()
        .unwrap();
        assert!(automata::accepts(&m, &parse_word("pause send").unwrap()).unwrap());
        assert!(!automata::accepts(&m, &parse_word("pause resume send").unwrap()).unwrap());
        assert_eq!(automata::max_word_length(&m).unwrap(), 10);
    }
}
