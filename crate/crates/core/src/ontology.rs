//! EL+ abstract syntax, symbol interning and the `.elt` text format.
//!
//! A file is a sequence of statements:
//!
//! ```text
//! # comment
//! Endocarditis <= Inflammation and (hasLoc some Endocardium)
//! HeartDisease == Disease and (hasLoc some Heart)
//! hasLoc o contIn <= hasLoc
//! ```
//!
//! `X <= Y` with two bare names is a role inclusion only when both names
//! were already used in role position; otherwise it is a concept inclusion.

use std::fmt;

use indexmap::IndexSet;
use thiserror::Error;

/// Interned concept name. Id 0 is the top concept.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ConceptId(pub u32);

impl ConceptId {
    pub const TOP: ConceptId = ConceptId(0);

    pub fn index(self) -> usize {
        self.0 as usize
    }

    pub fn is_top(self) -> bool {
        self == Self::TOP
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct RoleId(pub u32);

impl RoleId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

/// Identifier of a statement of the source ontology (dense, source order).
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct AxiomId(pub usize);

const TOP_NAME: &str = "top";
const KEYWORDS: [&str; 4] = ["top", "and", "some", "o"];

/// Concept and role names in first-occurrence order.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SymbolTable {
    concepts: IndexSet<String>,
    roles: IndexSet<String>,
}

impl Default for SymbolTable {
    fn default() -> Self {
        let mut concepts = IndexSet::new();
        concepts.insert(TOP_NAME.to_string());
        SymbolTable {
            concepts,
            roles: IndexSet::new(),
        }
    }
}

impl SymbolTable {
    pub fn new() -> Self {
        Self::default()
    }

    /// Number of concepts, including top.
    pub fn concept_count(&self) -> usize {
        self.concepts.len()
    }

    pub fn role_count(&self) -> usize {
        self.roles.len()
    }

    pub fn concept(&self, name: &str) -> Option<ConceptId> {
        self.concepts
            .get_index_of(name)
            .map(|i| ConceptId(i as u32))
    }

    pub fn role(&self, name: &str) -> Option<RoleId> {
        self.roles.get_index_of(name).map(|i| RoleId(i as u32))
    }

    pub fn concept_name(&self, id: ConceptId) -> &str {
        &self.concepts[id.index()]
    }

    pub fn role_name(&self, id: RoleId) -> &str {
        &self.roles[id.index()]
    }

    /// Interns a concept name. Panics if the name is already a role; the
    /// parser checks this before calling.
    pub fn intern_concept(&mut self, name: &str) -> ConceptId {
        assert!(self.role(name).is_none(), "`{name}` is already a role");
        let (i, _) = self.concepts.insert_full(name.to_string());
        ConceptId(i as u32)
    }

    pub fn intern_role(&mut self, name: &str) -> RoleId {
        assert!(
            self.concept(name).is_none(),
            "`{name}` is already a concept"
        );
        let (i, _) = self.roles.insert_full(name.to_string());
        RoleId(i as u32)
    }

    /// Concept ids other than top, in id order.
    pub fn concept_ids(&self) -> impl Iterator<Item = ConceptId> + '_ {
        (1..self.concepts.len()).map(|i| ConceptId(i as u32))
    }

    pub fn role_ids(&self) -> impl Iterator<Item = RoleId> + '_ {
        (0..self.roles.len()).map(|i| RoleId(i as u32))
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum ConceptExpr {
    Top,
    Name(ConceptId),
    Conj(Box<ConceptExpr>, Box<ConceptExpr>),
    Exists(RoleId, Box<ConceptExpr>),
}

impl ConceptExpr {
    pub fn name(id: ConceptId) -> Self {
        if id.is_top() {
            ConceptExpr::Top
        } else {
            ConceptExpr::Name(id)
        }
    }

    pub fn conj(left: ConceptExpr, right: ConceptExpr) -> Self {
        ConceptExpr::Conj(Box::new(left), Box::new(right))
    }

    pub fn exists(role: RoleId, filler: ConceptExpr) -> Self {
        ConceptExpr::Exists(role, Box::new(filler))
    }

    /// The concept id if this is an atomic concept (a name or top).
    pub fn as_atom(&self) -> Option<ConceptId> {
        match self {
            ConceptExpr::Top => Some(ConceptId::TOP),
            ConceptExpr::Name(c) => Some(*c),
            _ => None,
        }
    }

    /// Number of nodes in the expression tree.
    pub fn size(&self) -> usize {
        match self {
            ConceptExpr::Top | ConceptExpr::Name(_) => 1,
            ConceptExpr::Conj(l, r) => 1 + l.size() + r.size(),
            ConceptExpr::Exists(_, f) => 1 + f.size(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum AxiomKind {
    Gci { lhs: ConceptExpr, rhs: ConceptExpr },
    Equiv { lhs: ConceptExpr, rhs: ConceptExpr },
    RoleInc { chain: Vec<RoleId>, sup: RoleId },
}

impl AxiomKind {
    pub fn size(&self) -> usize {
        match self {
            AxiomKind::Gci { lhs, rhs } | AxiomKind::Equiv { lhs, rhs } => lhs.size() + rhs.size(),
            AxiomKind::RoleInc { chain, .. } => chain.len() + 1,
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash)]
pub struct Span {
    pub line: usize,
    pub col: usize,
}

impl fmt::Display for Span {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.line, self.col)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SourceAxiom {
    pub id: AxiomId,
    pub kind: AxiomKind,
    pub span: Span,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Ontology {
    pub symbols: SymbolTable,
    pub axioms: Vec<SourceAxiom>,
}

impl Ontology {
    pub fn len(&self) -> usize {
        self.axioms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.axioms.is_empty()
    }

    /// Total AST node count over all axioms.
    pub fn size(&self) -> usize {
        self.axioms.iter().map(|a| a.kind.size()).sum()
    }

    /// Appends an axiom built outside the parser, assigning the next id.
    pub fn push(&mut self, kind: AxiomKind) -> AxiomId {
        let id = AxiomId(self.axioms.len());
        self.axioms.push(SourceAxiom {
            id,
            kind,
            span: Span::default(),
        });
        id
    }

    pub fn render_axiom(&self, id: AxiomId) -> Result<String, crate::Error> {
        let axiom = self
            .axioms
            .get(id.0)
            .ok_or(crate::Error::AxiomOutOfRange(id.0))?;
        Ok(render_kind(&self.symbols, &axiom.kind))
    }

    /// Renders the whole ontology, one statement per line.
    pub fn render(&self) -> String {
        let mut out = String::new();
        for a in &self.axioms {
            out.push_str(&render_kind(&self.symbols, &a.kind));
            out.push('\n');
        }
        out
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ParseError {
    #[error("{span}: expected {expected}, found {found}")]
    Syntax {
        span: Span,
        expected: String,
        found: String,
    },
    #[error("{span}: `{name}` is used both as a concept and as a role")]
    NameClash { span: Span, name: String },
    #[error("unknown concept name `{0}`")]
    UnknownName(String),
    #[error("queries must have the form `Name <= Name`")]
    ComplexQuery,
}

// ---------------------------------------------------------------------------
// Rendering

pub fn render_concept(symbols: &SymbolTable, c: &ConceptExpr) -> String {
    let mut out = String::new();
    write_concept(symbols, c, &mut out);
    out
}

fn write_concept(symbols: &SymbolTable, c: &ConceptExpr, out: &mut String) {
    match c {
        ConceptExpr::Top => out.push_str(TOP_NAME),
        ConceptExpr::Name(id) => out.push_str(symbols.concept_name(*id)),
        ConceptExpr::Conj(l, r) => {
            // Conjunction is right-nested by the parser, so a conjunction on
            // the left needs parentheses to survive a round trip.
            if matches!(**l, ConceptExpr::Conj(..)) {
                out.push('(');
                write_concept(symbols, l, out);
                out.push(')');
            } else {
                write_concept(symbols, l, out);
            }
            out.push_str(" and ");
            write_concept(symbols, r, out);
        }
        ConceptExpr::Exists(role, filler) => {
            out.push('(');
            out.push_str(symbols.role_name(*role));
            out.push_str(" some ");
            write_concept(symbols, filler, out);
            out.push(')');
        }
    }
}

pub fn render_kind(symbols: &SymbolTable, kind: &AxiomKind) -> String {
    match kind {
        AxiomKind::Gci { lhs, rhs } => format!(
            "{} <= {}",
            render_concept(symbols, lhs),
            render_concept(symbols, rhs)
        ),
        AxiomKind::Equiv { lhs, rhs } => format!(
            "{} == {}",
            render_concept(symbols, lhs),
            render_concept(symbols, rhs)
        ),
        AxiomKind::RoleInc { chain, sup } => {
            let chain: Vec<&str> = chain.iter().map(|r| symbols.role_name(*r)).collect();
            format!("{} <= {}", chain.join(" o "), symbols.role_name(*sup))
        }
    }
}

// ---------------------------------------------------------------------------
// Lexing

#[derive(Clone, Debug, PartialEq, Eq)]
enum Tok {
    Name(String),
    Top,
    And,
    Some,
    O,
    Le,
    Eq,
    LParen,
    RParen,
    Eof,
}

impl fmt::Display for Tok {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Tok::Name(n) => write!(f, "name `{n}`"),
            Tok::Top => f.write_str("`top`"),
            Tok::And => f.write_str("`and`"),
            Tok::Some => f.write_str("`some`"),
            Tok::O => f.write_str("`o`"),
            Tok::Le => f.write_str("`<=`"),
            Tok::Eq => f.write_str("`==`"),
            Tok::LParen => f.write_str("`(`"),
            Tok::RParen => f.write_str("`)`"),
            Tok::Eof => f.write_str("end of input"),
        }
    }
}

fn lex(text: &str) -> Result<Vec<(Tok, Span)>, ParseError> {
    let mut toks = Vec::new();
    let mut chars = text.chars().peekable();
    let (mut line, mut col) = (1usize, 1usize);

    while let Some(&c) = chars.peek() {
        let span = Span { line, col };
        if c == '\n' {
            chars.next();
            line += 1;
            col = 1;
            continue;
        }
        if c.is_whitespace() {
            chars.next();
            col += 1;
            continue;
        }
        if c == '#' {
            while let Some(&c) = chars.peek() {
                if c == '\n' {
                    break;
                }
                chars.next();
            }
            continue;
        }
        if c.is_ascii_alphabetic() || c == '_' {
            let mut word = String::new();
            while let Some(&c) = chars.peek() {
                if c.is_ascii_alphanumeric() || c == '_' {
                    word.push(c);
                    chars.next();
                    col += 1;
                } else {
                    break;
                }
            }
            let tok = match word.as_str() {
                "top" => Tok::Top,
                "and" => Tok::And,
                "some" => Tok::Some,
                "o" => Tok::O,
                _ => Tok::Name(word),
            };
            toks.push((tok, span));
            continue;
        }
        chars.next();
        col += 1;
        let tok = match c {
            '(' => Tok::LParen,
            ')' => Tok::RParen,
            '<' | '=' => {
                let want = if c == '<' { Tok::Le } else { Tok::Eq };
                if chars.peek() == Some(&'=') {
                    chars.next();
                    col += 1;
                    want
                } else {
                    return Err(ParseError::Syntax {
                        span,
                        expected: format!("{want}"),
                        found: format!("`{c}`"),
                    });
                }
            }
            other => {
                return Err(ParseError::Syntax {
                    span,
                    expected: "a name, keyword, `(`, `)`, `<=` or `==`".into(),
                    found: format!("`{other}`"),
                })
            }
        };
        toks.push((tok, span));
    }
    toks.push((Tok::Eof, Span { line, col }));
    Ok(toks)
}

// ---------------------------------------------------------------------------
// Parsing

/// Concept syntax before names are resolved into one namespace or the other.
enum Raw {
    Top,
    Name(String, Span),
    Conj(Box<Raw>, Box<Raw>),
    Exists(String, Span, Box<Raw>),
}

struct Parser<'s> {
    toks: Vec<(Tok, Span)>,
    pos: usize,
    symbols: &'s mut SymbolTable,
}

impl Parser<'_> {
    fn peek(&self) -> &Tok {
        &self.toks[self.pos].0
    }

    fn peek_at(&self, k: usize) -> &Tok {
        let i = (self.pos + k).min(self.toks.len() - 1);
        &self.toks[i].0
    }

    fn span(&self) -> Span {
        self.toks[self.pos].1
    }

    fn bump(&mut self) -> (Tok, Span) {
        let t = self.toks[self.pos].clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn unexpected<T>(&self, expected: &str) -> Result<T, ParseError> {
        Err(ParseError::Syntax {
            span: self.span(),
            expected: expected.to_string(),
            found: self.peek().to_string(),
        })
    }

    fn expect(&mut self, tok: Tok) -> Result<Span, ParseError> {
        if *self.peek() == tok {
            Ok(self.bump().1)
        } else {
            self.unexpected(&tok.to_string())
        }
    }

    fn name(&mut self) -> Result<(String, Span), ParseError> {
        match self.peek().clone() {
            Tok::Name(n) => {
                let span = self.bump().1;
                Ok((n, span))
            }
            _ => self.unexpected("a name"),
        }
    }

    fn concept(&mut self) -> Result<Raw, ParseError> {
        let first = self.term()?;
        if *self.peek() == Tok::And {
            self.bump();
            let rest = self.concept()?;
            Ok(Raw::Conj(Box::new(first), Box::new(rest)))
        } else {
            Ok(first)
        }
    }

    fn term(&mut self) -> Result<Raw, ParseError> {
        match self.peek().clone() {
            Tok::Top => {
                self.bump();
                Ok(Raw::Top)
            }
            Tok::Name(n) => {
                let span = self.bump().1;
                Ok(Raw::Name(n, span))
            }
            Tok::LParen => {
                self.bump();
                let inner = if matches!(self.peek(), Tok::Name(_)) && *self.peek_at(1) == Tok::Some
                {
                    let (role, span) = self.name()?;
                    self.bump();
                    let filler = self.concept()?;
                    Raw::Exists(role, span, Box::new(filler))
                } else {
                    self.concept()?
                };
                self.expect(Tok::RParen)?;
                Ok(inner)
            }
            _ => self.unexpected("`top`, a name or `(`"),
        }
    }

    fn resolve_concept(&mut self, raw: Raw) -> Result<ConceptExpr, ParseError> {
        Ok(match raw {
            Raw::Top => ConceptExpr::Top,
            Raw::Name(n, span) => ConceptExpr::Name(self.concept_id(&n, span)?),
            Raw::Conj(l, r) => {
                let l = self.resolve_concept(*l)?;
                let r = self.resolve_concept(*r)?;
                ConceptExpr::conj(l, r)
            }
            Raw::Exists(role, span, filler) => {
                let role = self.role_id(&role, span)?;
                ConceptExpr::exists(role, self.resolve_concept(*filler)?)
            }
        })
    }

    fn concept_id(&mut self, name: &str, span: Span) -> Result<ConceptId, ParseError> {
        if self.symbols.role(name).is_some() {
            return Err(ParseError::NameClash {
                span,
                name: name.to_string(),
            });
        }
        Ok(self.symbols.intern_concept(name))
    }

    fn role_id(&mut self, name: &str, span: Span) -> Result<RoleId, ParseError> {
        if self.symbols.concept(name).is_some() {
            return Err(ParseError::NameClash {
                span,
                name: name.to_string(),
            });
        }
        Ok(self.symbols.intern_role(name))
    }

    fn statement(&mut self) -> Result<(AxiomKind, Span), ParseError> {
        let start = self.span();

        if matches!(self.peek(), Tok::Name(_)) && *self.peek_at(1) == Tok::O {
            let mut chain = vec![self.name()?];
            while *self.peek() == Tok::O {
                self.bump();
                chain.push(self.name()?);
            }
            self.expect(Tok::Le)?;
            let (sup, sup_span) = self.name()?;
            let chain = chain
                .into_iter()
                .map(|(n, s)| self.role_id(&n, s))
                .collect::<Result<Vec<_>, _>>()?;
            let sup = self.role_id(&sup, sup_span)?;
            return Ok((AxiomKind::RoleInc { chain, sup }, start));
        }

        let lhs = self.concept()?;
        let equiv = match self.peek() {
            Tok::Le => false,
            Tok::Eq => true,
            _ => return self.unexpected("`<=`, `==`, `and` or `o`"),
        };
        self.bump();
        let rhs = self.concept()?;

        if !equiv {
            if let (Raw::Name(l, ls), Raw::Name(r, rs)) = (&lhs, &rhs) {
                if self.symbols.role(l).is_some() && self.symbols.role(r).is_some() {
                    let sub = self.role_id(l, *ls)?;
                    let sup = self.role_id(r, *rs)?;
                    return Ok((
                        AxiomKind::RoleInc {
                            chain: vec![sub],
                            sup,
                        },
                        start,
                    ));
                }
            }
        }

        let lhs = self.resolve_concept(lhs)?;
        let rhs = self.resolve_concept(rhs)?;
        let kind = if equiv {
            AxiomKind::Equiv { lhs, rhs }
        } else {
            AxiomKind::Gci { lhs, rhs }
        };
        Ok((kind, start))
    }
}

/// Parses an ontology in the `.elt` text format.
pub fn parse_ontology(text: &str) -> Result<Ontology, ParseError> {
    parse_ontology_with(text, SymbolTable::new())
}

/// Parses with a pre-populated symbol table, so that names (in particular
/// roles) already known keep their ids and namespace.
pub fn parse_ontology_with(text: &str, symbols: SymbolTable) -> Result<Ontology, ParseError> {
    let mut symbols = symbols;
    let mut axioms = Vec::new();
    {
        let mut p = Parser {
            toks: lex(text)?,
            pos: 0,
            symbols: &mut symbols,
        };
        while *p.peek() != Tok::Eof {
            let (kind, span) = p.statement()?;
            axioms.push(SourceAxiom {
                id: AxiomId(axioms.len()),
                kind,
                span,
            });
        }
    }
    Ok(Ontology { symbols, axioms })
}

/// Parses a `Name <= Name` subsumption query against known concept names.
pub fn parse_query(
    text: &str,
    symbols: &SymbolTable,
) -> Result<(ConceptId, ConceptId), ParseError> {
    let toks = lex(text)?;
    let atom = |t: &Tok| -> Result<ConceptId, ParseError> {
        match t {
            Tok::Top => Ok(ConceptId::TOP),
            Tok::Name(n) => symbols
                .concept(n)
                .ok_or_else(|| ParseError::UnknownName(n.clone())),
            _ => Err(ParseError::ComplexQuery),
        }
    };
    match toks.as_slice() {
        [(a, _), (Tok::Le, _), (b, _), (Tok::Eof, _)] => Ok((atom(a)?, atom(b)?)),
        [(Tok::Eof, span)] => Err(ParseError::Syntax {
            span: *span,
            expected: "a query `Name <= Name`".into(),
            found: Tok::Eof.to_string(),
        }),
        _ => Err(ParseError::ComplexQuery),
    }
}

/// Whether `name` is usable as a NAME token (not a keyword, valid charset).
pub fn is_valid_name(name: &str) -> bool {
    let mut chars = name.chars();
    match chars.next() {
        Some(c) if c.is_ascii_alphabetic() || c == '_' => {}
        _ => return false,
    }
    chars.all(|c| c.is_ascii_alphanumeric() || c == '_') && !KEYWORDS.contains(&name)
}
