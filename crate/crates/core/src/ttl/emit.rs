//! Canonical serializer with three-space continuation indent.

use std::fmt::Write;

use crate::ontology::{rdf_type, ClassId, Literal};

use super::{PredicateObjects, Term, TtlDocument};

const INDENT: &str = "   ";

fn escape(s: &str) -> String {
    let mut out = String::with_capacity(s.len() + 2);
    out.push('"');
    for c in s.chars() {
        match c {
            '"' => out.push_str("\\\""),
            '\\' => out.push_str("\\\\"),
            '\n' => out.push_str("\\n"),
            '\r' => out.push_str("\\r"),
            '\t' => out.push_str("\\t"),
            c if (c as u32) < 0x20 || c == '\u{7f}' => {
                let _ = write!(out, "\\u{:04X}", c as u32);
            }
            c => out.push(c),
        }
    }
    out.push('"');
    out
}

fn name(id: &ClassId) -> String {
    id.to_string()
}

fn literal(l: &Literal) -> String {
    match l {
        Literal::String(s) | Literal::ExternalRef(s) => escape(s),
        Literal::Boolean(b) => b.to_string(),
        Literal::Integer(i) => i.to_string(),
        Literal::Real(f) => format!("{f:?}"),
        Literal::DateTime(d) => escape(&d.format("%Y-%m-%dT%H:%M:%S%.f").to_string()),
        Literal::Quantity { value, unit } => escape(&format!("{value:?} {unit}")),
    }
}

fn predicate(p: &ClassId) -> String {
    if *p == rdf_type() {
        "a".to_string()
    } else {
        name(p)
    }
}

/// One-line rendering used as a sort key.
pub(crate) fn term_key(t: &Term) -> String {
    match t {
        Term::Name(id) => name(id),
        Term::Literal(l) => literal(l),
        Term::Blank(pos) => {
            let inner: Vec<String> = pos
                .iter()
                .map(|po| {
                    let objs: Vec<String> = po.objects.iter().map(term_key).collect();
                    format!("{} {}", predicate(&po.predicate), objs.join(", "))
                })
                .collect();
            format!("[ {} ]", inner.join("; "))
        }
    }
}

fn write_term(out: &mut String, t: &Term, depth: usize) {
    match t {
        Term::Name(id) => out.push_str(&name(id)),
        Term::Literal(l) => out.push_str(&literal(l)),
        Term::Blank(pos) if pos.is_empty() => out.push_str("[]"),
        Term::Blank(pos) => {
            out.push_str("[\n");
            write_predicates(out, pos, depth + 1, true);
            out.push('\n');
            out.push_str(&INDENT.repeat(depth));
            out.push(']');
        }
    }
}

/// Predicate-object list; the first line is indented only when `indent_first`.
fn write_predicates(out: &mut String, pos: &[PredicateObjects], depth: usize, indent_first: bool) {
    for (i, po) in pos.iter().enumerate() {
        if i > 0 {
            out.push_str(";\n");
        }
        if i > 0 || indent_first {
            out.push_str(&INDENT.repeat(depth));
        }
        out.push_str(&predicate(&po.predicate));
        out.push(' ');
        for (k, o) in po.objects.iter().enumerate() {
            if k > 0 {
                out.push_str(", ");
            }
            write_term(out, o, depth);
        }
    }
}

/// Serializes the canonical form of `doc`: sorted prefixes (standard ones
/// always present), subjects sorted, `a` first, LF line endings.
pub fn emit_ttl(doc: &TtlDocument) -> String {
    let doc = doc.canonical();
    let mut out = String::new();
    for (p, iri) in &doc.prefixes {
        let _ = writeln!(out, "@prefix {p}: <{iri}> .");
    }
    for s in &doc.statements {
        out.push('\n');
        out.push_str(&name(&s.subject));
        out.push(' ');
        write_predicates(&mut out, &s.predicates, 1, false);
        out.push_str(" .\n");
    }
    out
}
