//! Turtle subset: documents, parsing, canonical emission, and the mapping
//! between documents, vocabulary stores and workflows.
//!
//! Supported: `@prefix`, prefixed names, `a`, `;` and `,` lists, nested
//! anonymous blank nodes, quoted strings with escapes, integers, decimals,
//! doubles, booleans and `#` comments. Collections, language tags, typed
//! literals and bare IRIs outside `@prefix` are rejected.

mod emit;
mod mapping;
mod parser;

use std::collections::BTreeMap;

use thiserror::Error;

use crate::ontology::{rdf_type, ClassId, Literal, STANDARD_PREFIXES};

pub use emit::emit_ttl;
pub use mapping::{doc_to_store, triples_to_workflow, workflow_to_triples};
pub use parser::parse_ttl;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum TtlError {
    #[error("{line}:{col}: syntax error, expected {expected}")]
    SyntaxError { line: usize, col: usize, expected: String },
    #[error("{line}:{col}: prefix `{prefix}:` is not declared")]
    UnknownPrefix { prefix: String, line: usize, col: usize },
    #[error("vocabulary violation: {0}")]
    VocabularyViolation(String),
    #[error("structural error: {0}")]
    StructuralError(String),
}

impl TtlError {
    /// (line, column) of parse errors.
    pub fn position(&self) -> Option<(usize, usize)> {
        match self {
            TtlError::SyntaxError { line, col, .. } | TtlError::UnknownPrefix { line, col, .. } => Some((*line, *col)),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Term {
    Name(ClassId),
    Literal(Literal),
    /// Anonymous blank node `[ ... ]`.
    Blank(Vec<PredicateObjects>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct PredicateObjects {
    /// `a` is stored as `rdf:type`.
    pub predicate: ClassId,
    pub objects: Vec<Term>,
}

#[derive(Debug, Clone)]
pub struct Statement {
    pub subject: ClassId,
    pub predicates: Vec<PredicateObjects>,
    /// 1-based source line of the subject; 0 for constructed statements.
    pub line: usize,
}

impl PartialEq for Statement {
    fn eq(&self, other: &Self) -> bool {
        self.subject == other.subject && self.predicates == other.predicates
    }
}

impl Statement {
    pub fn new(subject: ClassId) -> Self {
        Statement {
            subject,
            predicates: Vec::new(),
            line: 0,
        }
    }

    pub fn push(&mut self, predicate: ClassId, object: Term) {
        match self.predicates.iter_mut().find(|p| p.predicate == predicate) {
            Some(p) => p.objects.push(object),
            None => self.predicates.push(PredicateObjects {
                predicate,
                objects: vec![object],
            }),
        }
    }

    pub fn objects<'a>(&'a self, predicate: &ClassId) -> impl Iterator<Item = &'a Term> + 'a {
        let predicate = predicate.clone();
        self.predicates
            .iter()
            .filter(move |p| p.predicate == predicate)
            .flat_map(|p| p.objects.iter())
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct TtlDocument {
    pub prefixes: BTreeMap<String, String>,
    pub statements: Vec<Statement>,
}

impl TtlDocument {
    /// Empty document declaring the standard prefixes.
    pub fn with_standard_prefixes() -> Self {
        TtlDocument {
            prefixes: STANDARD_PREFIXES
                .iter()
                .map(|(p, iri)| (p.to_string(), iri.to_string()))
                .collect(),
            statements: Vec::new(),
        }
    }

    /// Normal form: standard prefixes merged in, statements with equal
    /// subjects merged and sorted, `a` first, remaining predicates sorted,
    /// objects sorted by their serialized form.
    pub fn canonical(&self) -> TtlDocument {
        let mut prefixes = TtlDocument::with_standard_prefixes().prefixes;
        prefixes.extend(self.prefixes.clone());
        let mut merged: BTreeMap<ClassId, Statement> = BTreeMap::new();
        for s in &self.statements {
            let entry = merged.entry(s.subject.clone()).or_insert_with(|| Statement {
                subject: s.subject.clone(),
                predicates: Vec::new(),
                line: s.line,
            });
            for po in &s.predicates {
                for o in &po.objects {
                    entry.push(po.predicate.clone(), o.clone());
                }
            }
        }
        let statements = merged
            .into_values()
            .filter(|s| !s.predicates.is_empty())
            .map(|mut s| {
                s.predicates = canonical_predicates(&s.predicates);
                s
            })
            .collect();
        TtlDocument { prefixes, statements }
    }

    /// Equality up to statement order, predicate order and object order.
    pub fn structurally_eq(&self, other: &TtlDocument) -> bool {
        self.canonical() == other.canonical()
    }

    pub fn statement(&self, subject: &ClassId) -> Option<&Statement> {
        self.statements.iter().find(|s| s.subject == *subject)
    }

    /// Source line of the first statement about `subject`, if known.
    pub fn line_of(&self, subject: &ClassId) -> Option<usize> {
        self.statement(subject).map(|s| s.line).filter(|l| *l > 0)
    }
}

fn canonical_predicates(pos: &[PredicateObjects]) -> Vec<PredicateObjects> {
    let mut merged: Vec<PredicateObjects> = Vec::new();
    for po in pos {
        match merged.iter_mut().find(|m| m.predicate == po.predicate) {
            Some(m) => m.objects.extend(po.objects.iter().cloned()),
            None => merged.push(po.clone()),
        }
    }
    for m in &mut merged {
        for o in &mut m.objects {
            if let Term::Blank(inner) = o {
                *inner = canonical_predicates(inner);
            }
        }
        m.objects.sort_by_cached_key(emit::term_key);
    }
    let ty = rdf_type();
    merged.sort_by(|a, b| (a.predicate != ty, &a.predicate).cmp(&(b.predicate != ty, &b.predicate)));
    merged
}

#[cfg(test)]
mod tests;
