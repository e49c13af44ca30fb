use std::fmt;

use serde::{Serialize, Serializer};
use thiserror::Error;

use crate::vocab::{rdf, xsd};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TermError {
    #[error("not an absolute IRI: {0:?}")]
    InvalidIri(String),
    #[error("cannot resolve {reference:?} against {base:?}")]
    Resolution { base: String, reference: String },
    #[error("invalid blank node label: {0:?}")]
    InvalidBlankLabel(String),
    #[error("invalid language tag: {0:?}")]
    InvalidLanguageTag(String),
    #[error("literal datatype {0} is reserved for language-tagged strings")]
    LangStringWithoutTag(String),
    #[error("triple subject must be an IRI or blank node, got {0}")]
    LiteralSubject(String),
    #[error("triple predicate must be an IRI, got {0}")]
    NonIriPredicate(String),
}

/// An absolute IRI.
///
/// Validation is syntactic: a scheme followed by `:`, and none of the
/// characters that cannot appear unescaped in an IRI (whitespace, controls,
/// `<>"{}|\^` and backtick).
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Iri(String);

impl Iri {
    pub fn new(value: impl Into<String>) -> Result<Self, TermError> {
        let value = value.into();
        if is_absolute_iri(&value) {
            Ok(Iri(value))
        } else {
            Err(TermError::InvalidIri(value))
        }
    }

    /// For vocabulary constants. Panics on an invalid IRI.
    pub fn from_static(value: &'static str) -> Self {
        assert!(is_absolute_iri(value), "invalid IRI constant {value}");
        Iri(value.to_owned())
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }

    pub fn into_string(self) -> String {
        self.0
    }

    pub fn fragment(&self) -> Option<&str> {
        self.0.split_once('#').map(|(_, f)| f)
    }

    /// The IRI with any `#fragment` removed.
    pub fn without_fragment(&self) -> Iri {
        match self.0.split_once('#') {
            Some((stem, _)) => Iri(stem.to_owned()),
            None => self.clone(),
        }
    }

    /// Resolves a (possibly relative) reference against this IRI.
    ///
    /// References that are already absolute are returned verbatim.
    pub fn resolve(&self, reference: &str) -> Result<Iri, TermError> {
        let reference = reference.trim();
        if is_absolute_iri(reference) {
            return Ok(Iri(reference.to_owned()));
        }
        let err = || TermError::Resolution {
            base: self.0.clone(),
            reference: reference.to_owned(),
        };
        let base = oxiri::Iri::parse(self.0.as_str()).map_err(|_| err())?;
        let resolved = base.resolve(reference).map_err(|_| err())?;
        Iri::new(resolved.into_inner()).map_err(|_| err())
    }
}

impl fmt::Display for Iri {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl AsRef<str> for Iri {
    fn as_ref(&self) -> &str {
        &self.0
    }
}

impl std::str::FromStr for Iri {
    type Err = TermError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Iri::new(s)
    }
}

impl Serialize for Iri {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_str(&self.0)
    }
}

pub(crate) fn is_absolute_iri(value: &str) -> bool {
    let Some((scheme, _)) = value.split_once(':') else {
        return false;
    };
    let mut chars = scheme.chars();
    let scheme_ok = chars.next().is_some_and(|c| c.is_ascii_alphabetic())
        && chars.all(|c| c.is_ascii_alphanumeric() || matches!(c, '+' | '-' | '.'));
    scheme_ok
        && !value.chars().any(|c| {
            c.is_whitespace() || c.is_control() || matches!(c, '<' | '>' | '"' | '{' | '}' | '|' | '\\' | '^' | '`')
        })
}

/// A blank node label matching `[A-Za-z][A-Za-z0-9]*`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct BlankNode(String);

impl BlankNode {
    pub fn new(label: impl Into<String>) -> Result<Self, TermError> {
        let label = label.into();
        if is_blank_label(&label) {
            Ok(BlankNode(label))
        } else {
            Err(TermError::InvalidBlankLabel(label))
        }
    }

    pub fn label(&self) -> &str {
        &self.0
    }
}

pub(crate) fn is_blank_label(label: &str) -> bool {
    let mut chars = label.chars();
    chars.next().is_some_and(|c| c.is_ascii_alphabetic()) && chars.all(|c| c.is_ascii_alphanumeric())
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Literal {
    lexical: String,
    datatype: Iri,
    language: Option<String>,
}

impl Literal {
    /// A plain string literal (`xsd:string`).
    pub fn string(lexical: impl Into<String>) -> Self {
        Literal {
            lexical: lexical.into(),
            datatype: Iri::from_static(xsd::STRING),
            language: None,
        }
    }

    pub fn typed(lexical: impl Into<String>, datatype: Iri) -> Result<Self, TermError> {
        if datatype.as_str() == rdf::LANG_STRING {
            return Err(TermError::LangStringWithoutTag(datatype.into_string()));
        }
        Ok(Literal {
            lexical: lexical.into(),
            datatype,
            language: None,
        })
    }

    pub fn lang(lexical: impl Into<String>, language: impl Into<String>) -> Result<Self, TermError> {
        let language = language.into();
        if !is_language_tag(&language) {
            return Err(TermError::InvalidLanguageTag(language));
        }
        Ok(Literal {
            lexical: lexical.into(),
            datatype: Iri::from_static(rdf::LANG_STRING),
            language: Some(language),
        })
    }

    pub fn lexical(&self) -> &str {
        &self.lexical
    }

    pub fn datatype(&self) -> &Iri {
        &self.datatype
    }

    pub fn language(&self) -> Option<&str> {
        self.language.as_deref()
    }

    /// True for a literal with the default `xsd:string` datatype and no language.
    pub fn is_plain(&self) -> bool {
        self.language.is_none() && self.datatype.as_str() == xsd::STRING
    }
}

fn is_language_tag(tag: &str) -> bool {
    let mut parts = tag.split('-');
    let primary_ok = parts
        .next()
        .is_some_and(|p| (1..=8).contains(&p.len()) && p.chars().all(|c| c.is_ascii_alphabetic()));
    primary_ok && parts.all(|p| (1..=8).contains(&p.len()) && p.chars().all(|c| c.is_ascii_alphanumeric()))
}

/// An RDF term. The derived ordering (IRI < blank node < literal, then
/// lexicographic) is the fixed total order used for graph iteration.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Term {
    Iri(Iri),
    BlankNode(BlankNode),
    Literal(Literal),
}

impl Term {
    pub fn iri(value: impl Into<String>) -> Result<Self, TermError> {
        Iri::new(value).map(Term::Iri)
    }

    pub fn blank(label: impl Into<String>) -> Result<Self, TermError> {
        BlankNode::new(label).map(Term::BlankNode)
    }

    pub fn string(lexical: impl Into<String>) -> Self {
        Term::Literal(Literal::string(lexical))
    }

    pub fn as_iri(&self) -> Option<&Iri> {
        match self {
            Term::Iri(iri) => Some(iri),
            _ => None,
        }
    }

    pub fn as_blank(&self) -> Option<&BlankNode> {
        match self {
            Term::BlankNode(b) => Some(b),
            _ => None,
        }
    }

    pub fn as_literal(&self) -> Option<&Literal> {
        match self {
            Term::Literal(l) => Some(l),
            _ => None,
        }
    }

    pub fn is_blank(&self) -> bool {
        matches!(self, Term::BlankNode(_))
    }
}

impl From<Iri> for Term {
    fn from(iri: Iri) -> Self {
        Term::Iri(iri)
    }
}

impl From<BlankNode> for Term {
    fn from(b: BlankNode) -> Self {
        Term::BlankNode(b)
    }
}

impl From<Literal> for Term {
    fn from(l: Literal) -> Self {
        Term::Literal(l)
    }
}

/// N-Triples syntax.
impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Term::Iri(iri) => write!(f, "<{iri}>"),
            Term::BlankNode(b) => write!(f, "_:{}", b.0),
            Term::Literal(l) => {
                f.write_str("\"")?;
                for c in l.lexical.chars() {
                    match c {
                        '"' => f.write_str("\\\"")?,
                        '\\' => f.write_str("\\\\")?,
                        '\n' => f.write_str("\\n")?,
                        '\r' => f.write_str("\\r")?,
                        '\t' => f.write_str("\\t")?,
                        c if c.is_control() => write!(f, "\\u{:04X}", c as u32)?,
                        c => write!(f, "{c}")?,
                    }
                }
                f.write_str("\"")?;
                match &l.language {
                    Some(lang) => write!(f, "@{lang}"),
                    None if l.is_plain() => Ok(()),
                    None => write!(f, "^^<{}>", l.datatype),
                }
            }
        }
    }
}

impl Serialize for Term {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

/// An RDF statement. Subjects are never literals and predicates are always IRIs.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Triple {
    subject: Term,
    predicate: Term,
    object: Term,
}

impl Triple {
    pub fn new(
        subject: impl Into<Term>,
        predicate: impl Into<Term>,
        object: impl Into<Term>,
    ) -> Result<Self, TermError> {
        let (subject, predicate, object) = (subject.into(), predicate.into(), object.into());
        if let Term::Literal(_) = subject {
            return Err(TermError::LiteralSubject(subject.to_string()));
        }
        if !matches!(predicate, Term::Iri(_)) {
            return Err(TermError::NonIriPredicate(predicate.to_string()));
        }
        Ok(Triple {
            subject,
            predicate,
            object,
        })
    }

    /// Builds a triple from parts whose positions are already known to be valid.
    pub(crate) fn from_valid(subject: Term, predicate: Iri, object: Term) -> Self {
        debug_assert!(!matches!(subject, Term::Literal(_)));
        Triple {
            subject,
            predicate: Term::Iri(predicate),
            object,
        }
    }

    pub fn subject(&self) -> &Term {
        &self.subject
    }

    pub fn predicate(&self) -> &Term {
        &self.predicate
    }

    pub fn predicate_iri(&self) -> &Iri {
        match &self.predicate {
            Term::Iri(iri) => iri,
            _ => unreachable!("predicate is always an IRI"),
        }
    }

    pub fn object(&self) -> &Term {
        &self.object
    }

    pub fn has_blank(&self) -> bool {
        self.subject.is_blank() || self.object.is_blank()
    }

    /// Applies `f` to every IRI in any position; literal datatypes are left alone.
    pub fn map_iris(&self, mut f: impl FnMut(&Iri) -> Iri) -> Triple {
        let mut map = |t: &Term| match t {
            Term::Iri(i) => Term::Iri(f(i)),
            other => other.clone(),
        };
        Triple {
            subject: map(&self.subject),
            predicate: map(&self.predicate),
            object: map(&self.object),
        }
    }

    /// Applies `f` to every blank node in subject and object position.
    pub fn map_blanks(&self, mut f: impl FnMut(&BlankNode) -> BlankNode) -> Triple {
        let mut map = |t: &Term| match t {
            Term::BlankNode(b) => Term::BlankNode(f(b)),
            other => other.clone(),
        };
        Triple {
            subject: map(&self.subject),
            predicate: self.predicate.clone(),
            object: map(&self.object),
        }
    }
}

impl fmt::Display for Triple {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {} {} .", self.subject, self.predicate, self.object)
    }
}

impl Serialize for Triple {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}
