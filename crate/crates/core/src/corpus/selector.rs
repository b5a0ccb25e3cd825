//! Reference selector expressions.
//!
//! ```text
//! selector := term ('|' term)*
//! term     := 'none' | 'all' | refkey | 'R' levels pe?
//! levels   := NUMBER | 'x' | '{' item (',' item)* '}'
//! item     := (NUMBER | 'x') pe?
//! pe       := '^PE' ('(' filter (',' filter)* ')')?
//! filter   := proficiency (':' editor_id)?
//! refkey   := 'R' NUMBER '+' proficiency ':' editor_id
//! ```
//!
//! Examples: `R3`, `R{3,4}`, `Rx`, `Rx^PE`, `R1^PE(layman)`, `R{1,1^PE}`,
//! `R3+layman:a07|R4`, `all` (every original and post-edit), `none`
//! (reference-free metrics).
//!
//! A selection is a per-segment set: duplicates collapse and the order is the
//! corpus's canonical reference order.

use std::fmt;
use std::str::FromStr;

use super::{Corpus, Level, Proficiency, RefKey, Reference};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct Selector {
    expr: String,
    terms: Vec<Term>,
}

#[derive(Debug, Clone, PartialEq)]
enum Term {
    NoReference,
    Exact(RefKey),
    /// `levels == None` means any level (`x`).
    Group {
        levels: Option<Vec<Level>>,
        kind: Kind,
    },
}

#[derive(Debug, Clone, PartialEq)]
enum Kind {
    Original,
    /// Empty filter list accepts every editor.
    PostEdit(Vec<(Proficiency, Option<String>)>),
}

impl Kind {
    fn accepts(&self, r: &Reference) -> bool {
        match (self, &r.editor) {
            (Kind::Original, None) => true,
            (Kind::PostEdit(filters), Some(e)) => {
                filters.is_empty()
                    || filters
                        .iter()
                        .any(|(p, id)| *p == e.proficiency && id.as_ref().is_none_or(|id| *id == e.id))
            }
            _ => false,
        }
    }
}

impl Term {
    fn accepts(&self, r: &Reference) -> bool {
        match self {
            Term::NoReference => false,
            Term::Exact(key) => r.key() == *key,
            Term::Group { levels, kind } => levels.as_ref().is_none_or(|ls| ls.contains(&r.level)) && kind.accepts(r),
        }
    }
}

impl Selector {
    pub fn parse(expr: &str) -> Result<Self> {
        let err = |message: String| Error::Selector {
            expr: expr.to_string(),
            message,
        };
        let mut terms = Vec::new();
        for part in expr.split('|') {
            let part = part.trim();
            match part {
                "" => return Err(err("empty term".into())),
                "none" => terms.push(Term::NoReference),
                "all" => {
                    terms.push(Term::Group {
                        levels: None,
                        kind: Kind::Original,
                    });
                    terms.push(Term::Group {
                        levels: None,
                        kind: Kind::PostEdit(Vec::new()),
                    });
                }
                p if p.contains('+') => terms.push(Term::Exact(p.parse().map_err(|e: Error| err(e.to_string()))?)),
                p => terms.extend(TermParser::new(p).group().map_err(err)?),
            }
        }
        Ok(Selector {
            expr: expr.to_string(),
            terms,
        })
    }

    /// Exactly the original reference of one level.
    pub fn level(level: Level) -> Self {
        Selector {
            expr: level.to_string(),
            terms: vec![Term::Group {
                levels: Some(vec![level]),
                kind: Kind::Original,
            }],
        }
    }

    pub fn expr(&self) -> &str {
        &self.expr
    }

    /// Resolves against every segment; fails if some segment gets nothing.
    pub fn select(&self, corpus: &Corpus) -> Result<Selection> {
        let include_none = self.terms.contains(&Term::NoReference);
        let mut per_segment = Vec::with_capacity(corpus.segments().len());
        for seg in corpus.segments() {
            let mut keys = Vec::new();
            if include_none {
                keys.push(RefKey::NoReference);
            }
            keys.extend(
                seg.references
                    .iter()
                    .filter(|r| self.terms.iter().any(|t| t.accepts(r)))
                    .map(Reference::key),
            );
            if keys.is_empty() {
                return Err(Error::EmptySelection {
                    selector: self.expr.clone(),
                    segment: seg.id.clone(),
                });
            }
            per_segment.push(keys);
        }
        Ok(Selection {
            name: self.expr.clone(),
            per_segment,
        })
    }
}

impl FromStr for Selector {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Selector::parse(s)
    }
}

impl fmt::Display for Selector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.expr)
    }
}

struct TermParser<'a> {
    src: &'a str,
    pos: usize,
}

impl<'a> TermParser<'a> {
    fn new(src: &'a str) -> Self {
        TermParser { src, pos: 0 }
    }

    fn rest(&self) -> &'a str {
        &self.src[self.pos..]
    }

    fn eat(&mut self, token: &str) -> bool {
        if self.rest().starts_with(token) {
            self.pos += token.len();
            true
        } else {
            false
        }
    }

    fn expect(&mut self, token: &str) -> Result<(), String> {
        if self.eat(token) {
            Ok(())
        } else {
            Err(format!("expected `{token}` at offset {}", self.pos))
        }
    }

    fn group(mut self) -> Result<Vec<Term>, String> {
        self.expect("R")?;
        let mut items: Vec<(Option<Level>, Option<Kind>)> = Vec::new();
        if self.eat("{") {
            loop {
                let level = self.level()?;
                let kind = self.pe()?;
                items.push((level, kind));
                if self.eat("}") {
                    break;
                }
                self.expect(",")?;
            }
        } else {
            items.push((self.level()?, None));
        }
        let suffix = self.pe()?;
        if !self.rest().is_empty() {
            return Err(format!("unexpected `{}`", self.rest()));
        }
        Ok(items
            .into_iter()
            .map(|(level, kind)| Term::Group {
                levels: level.map(|l| vec![l]),
                kind: kind.or_else(|| suffix.clone()).unwrap_or(Kind::Original),
            })
            .collect())
    }

    /// `None` stands for `x`, any level.
    fn level(&mut self) -> Result<Option<Level>, String> {
        if self.eat("x") {
            return Ok(None);
        }
        let digits: String = self.rest().chars().take_while(char::is_ascii_digit).collect();
        if digits.is_empty() {
            return Err(format!("expected level number or `x` at offset {}", self.pos));
        }
        self.pos += digits.len();
        digits
            .parse::<u8>()
            .map(|n| Some(Level::new(n)))
            .map_err(|_| format!("level number `{digits}` out of range"))
    }

    fn pe(&mut self) -> Result<Option<Kind>, String> {
        if !self.eat("^PE") {
            return Ok(None);
        }
        let mut filters = Vec::new();
        if self.eat("(") {
            let end = self.rest().find(')').ok_or_else(|| "unclosed `(`".to_string())?;
            let body = &self.rest()[..end];
            for f in body.split(',') {
                let f = f.trim();
                let (prof, id) = match f.split_once(':') {
                    Some((p, id)) if !id.is_empty() => (p, Some(id.to_string())),
                    Some(_) => return Err(format!("empty editor id in `{f}`")),
                    None => (f, None),
                };
                let prof: Proficiency = prof.parse().map_err(|e: Error| e.to_string())?;
                filters.push((prof, id));
            }
            self.pos += end + 1;
        }
        Ok(Some(Kind::PostEdit(filters)))
    }
}

/// Per-segment reference keys, aligned with [`Corpus::segments`].
#[derive(Debug, Clone, PartialEq)]
pub struct Selection {
    pub name: String,
    pub per_segment: Vec<Vec<RefKey>>,
}

impl Selection {
    pub fn new(name: impl Into<String>, per_segment: Vec<Vec<RefKey>>) -> Self {
        Selection {
            name: name.into(),
            per_segment,
        }
    }

    pub fn max_len(&self) -> usize {
        self.per_segment.iter().map(Vec::len).max().unwrap_or(0)
    }

    pub fn min_len(&self) -> usize {
        self.per_segment.iter().map(Vec::len).min().unwrap_or(0)
    }
}
