#![allow(dead_code)]

use std::collections::BTreeMap;
use std::path::PathBuf;

use osmoflow::ontology::{ClassId, Literal};
use osmoflow::ttl::{PredicateObjects, Statement, Term, TtlDocument};
use osmoflow::wms::{DagModel, DagTask};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub const METADYNAMICS: &str = include_str!("../data/metadynamics.ttl");

pub fn data(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/data").join(name)
}

/// Documents that must fail with a positioned syntax error.
pub const MALFORMED: [(&str, &str); 24] = [
    ("missing final dot", "@prefix : <u#> .\n:s :p :o"),
    ("dangling semicolon object", "@prefix : <u#> .\n:s :p\n  ;"),
    ("unterminated string", "@prefix : <u#> .\n:s :p \"open"),
    ("unclosed blank node", "@prefix : <u#> .\n:s :p [ :q :r ."),
    ("stray closing bracket", "@prefix : <u#> .\n:s :p :o ] ."),
    ("prefix without iri", "@prefix : ."),
    ("prefix without dot", "@prefix : <u#>\n:s :p :o ."),
    ("unterminated iri", "@prefix : <u#\n:s :p :o ."),
    ("unknown directive", "@base <u#> ."),
    ("missing object", "@prefix : <u#> .\n:s :p ."),
    ("missing predicate", "@prefix : <u#> .\n:s ."),
    ("double comma", "@prefix : <u#> .\n:s :p :a,, :b ."),
    ("literal subject", "@prefix : <u#> .\n\"s\" :p :o ."),
    ("literal predicate", "@prefix : <u#> .\n:s 3 :o ."),
    ("bare word", "@prefix : <u#> .\n:s :p hello ."),
    ("bad escape", "@prefix : <u#> .\n:s :p \"a\\qb\" ."),
    ("collection", "@prefix : <u#> .\n:s :p ( :a :b ) ."),
    ("language tag", "@prefix : <u#> .\n:s :p \"x\"@en ."),
    ("typed literal", "@prefix : <u#> .\n:s :p \"1\"^^:int ."),
    ("bare iri term", "@prefix : <u#> .\n:s :p <http://x/y> ."),
    ("bad number", "@prefix : <u#> .\n:s :p 1.2.3 ."),
    ("lone dot", "."),
    ("blank without predicate", "@prefix : <u#> .\n:s :p [ :q ] ."),
    ("unicode junk", "@prefix : <u#> .\n:s :p :o § ."),
];

fn name(rng: &mut ChaCha8Rng) -> ClassId {
    let prefix = ["", "osmo", "ex"][rng.random_range(0..3)];
    let len = rng.random_range(1..=6);
    let mut local = String::new();
    local.push(rng.random_range(b'a'..=b'z') as char);
    for _ in 1..len {
        let c = b"abcdefghijklmnopqrstuvwxyz0123456789_"[rng.random_range(0..37)];
        local.push(c as char);
    }
    ClassId::new(prefix, local)
}

fn literal(rng: &mut ChaCha8Rng) -> Literal {
    match rng.random_range(0..4) {
        0 => Literal::Boolean(rng.random()),
        1 => Literal::Integer(rng.random()),
        2 => Literal::Real(rng.random_range(-1e6..1e6) * 10f64.powi(rng.random_range(-20..20))),
        _ => {
            let chars = ['a', 'Z', ' ', '"', '\\', '\n', '\t', 'é', '#', '.'];
            Literal::String((0..rng.random_range(0..8)).map(|_| chars[rng.random_range(0..chars.len())]).collect())
        }
    }
}

fn term(rng: &mut ChaCha8Rng, depth: u32) -> Term {
    match rng.random_range(0..if depth > 0 { 3 } else { 2 }) {
        0 => Term::Name(name(rng)),
        1 => Term::Literal(literal(rng)),
        _ => Term::Blank(predicate_objects(rng, depth - 1, 0)),
    }
}

fn predicate_objects(rng: &mut ChaCha8Rng, depth: u32, min: usize) -> Vec<PredicateObjects> {
    (0..rng.random_range(min..=3))
        .map(|_| PredicateObjects {
            predicate: name(rng),
            objects: (0..rng.random_range(1..=2)).map(|_| term(rng, depth)).collect(),
        })
        .collect()
}

/// Random document over the standard prefixes plus `:` and `ex:`.
pub fn random_document(seed: u64) -> TtlDocument {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut doc = TtlDocument::with_standard_prefixes();
    doc.prefixes.insert(String::new(), "urn:x-test#".into());
    doc.prefixes.insert("ex".into(), "http://example.org/ns#".into());
    doc.statements = (0..rng.random_range(0..=5))
        .map(|_| Statement {
            subject: name(&mut rng),
            predicates: predicate_objects(&mut rng, 2, 1),
            line: 0,
        })
        .collect();
    doc
}

pub fn params(kv: &[(&str, f64)]) -> BTreeMap<String, f64> {
    kv.iter().map(|(k, v)| (k.to_string(), *v)).collect()
}

/// Random DAG whose task `i` depends on earlier tasks with probability 0.2.
pub fn random_dag(rng: &mut ChaCha8Rng, n: usize, max_np: u32) -> DagModel {
    let tasks = (0..n)
        .map(|i| DagTask {
            label: format!("t{i}"),
            params: params(&[("cost", 0.0), ("i", i as f64)]),
            np: rng.random_range(1..=max_np),
            cost: rng.random_range(0.5..10.0),
            preds: (0..i).filter(|_| rng.random_bool(0.2)).collect(),
        })
        .map(|mut t| {
            t.params.insert("cost".into(), t.cost);
            t
        })
        .collect();
    DagModel::new("random", tasks)
}

/// Every permutation of `0..n` that respects `preds`.
pub fn linear_extensions(preds: &[Vec<usize>]) -> Vec<Vec<usize>> {
    fn go(preds: &[Vec<usize>], used: &mut Vec<bool>, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == preds.len() {
            out.push(cur.clone());
            return;
        }
        for i in 0..preds.len() {
            if !used[i] && preds[i].iter().all(|p| used[*p]) {
                used[i] = true;
                cur.push(i);
                go(preds, used, cur, out);
                cur.pop();
                used[i] = false;
            }
        }
    }
    let mut out = Vec::new();
    go(preds, &mut vec![false; preds.len()], &mut Vec::new(), &mut out);
    out
}

/// `tau^n delta^m d^(n+m) a / dtau^n ddelta^m` by nested central differences
/// with relative step `h`.
pub fn fd_anm(a: &dyn Fn(f64, f64) -> f64, n: u32, m: u32, tau: f64, delta: f64, h: f64) -> f64 {
    fn d(f: &dyn Fn(f64, f64) -> f64, n: u32, m: u32, x: f64, y: f64, h: f64) -> f64 {
        if n > 0 {
            let hx = h * x;
            (d(f, n - 1, m, x + hx, y, h) - d(f, n - 1, m, x - hx, y, h)) / (2.0 * hx)
        } else if m > 0 {
            let hy = h * y;
            (d(f, 0, m - 1, x, y + hy, h) - d(f, 0, m - 1, x, y - hy, h)) / (2.0 * hy)
        } else {
            f(x, y)
        }
    }
    tau.powi(n as i32) * delta.powi(m as i32) * d(a, n, m, tau, delta, h)
}

/// `fd_anm` with Richardson extrapolation over `h` and `h/2`, cancelling the
/// `h^2` truncation term.
pub fn fd_anm_richardson(a: &dyn Fn(f64, f64) -> f64, n: u32, m: u32, tau: f64, delta: f64, h: f64) -> f64 {
    (4.0 * fd_anm(a, n, m, tau, delta, h / 2.0) - fd_anm(a, n, m, tau, delta, h)) / 3.0
}

/// Runs the command line in-process and returns (exit code, stdout, stderr).
pub fn cli(args: &[&str]) -> (u8, String, String) {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let argv = std::iter::once("osmoflow").chain(args.iter().copied());
    let code = osmoflow::cli::run_args(argv, &mut out, &mut err);
    (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
}
