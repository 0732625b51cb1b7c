//! Graphviz rendering in LDT notation.
//!
//! Sections are ellipses, logical resources triangles (filled when
//! interactive), concrete graphs dashed boxes and virtual graphs bold boxes.
//! A starting point is an open circle, the simulation outcome a filled bullet.

use std::fmt::Write;

use super::{GraphKind, ResourceRef, SimulationWorkflow};

fn quote(s: &str) -> String {
    format!("\"{}\"", s.replace('\\', "\\\\").replace('"', "\\\""))
}

struct Emitter<'a> {
    wf: &'a SimulationWorkflow,
    out: String,
}

impl Emitter<'_> {
    fn line(&mut self, depth: usize, text: &str) {
        let _ = writeln!(self.out, "{}{}", "  ".repeat(depth), text);
    }

    fn resource(&mut self, depth: usize, r: &ResourceRef) {
        match r {
            ResourceRef::Section(s) => {
                self.line(depth, &format!("{} [shape=ellipse, label={}];", quote(s), quote(s)));
            }
            ResourceRef::Logical(l) => {
                let interactive = self.wf.resources.get(l).is_some_and(|r| r.interactive);
                let style = if interactive {
                    ", style=filled, fillcolor=green"
                } else {
                    ""
                };
                self.line(depth, &format!("{} [shape=triangle, label={}{style}];", quote(l), quote(l)));
            }
            ResourceRef::Graph(g) => self.graph(depth, g),
        }
    }

    fn graph(&mut self, depth: usize, id: &str) {
        let Some(g) = self.wf.graphs.get(id) else { return };
        if g.is_node() {
            self.resource(depth, &g.contained[0]);
            return;
        }
        self.line(depth, &format!("subgraph {} {{", quote(&format!("cluster_{id}"))));
        let style = match g.kind {
            GraphKind::Concrete => "dashed",
            GraphKind::Virtual => "bold",
        };
        self.line(depth + 1, &format!("label={}; style={style};", quote(id)));
        self.line(depth + 1, &format!("{} [shape=none, label=\"\"];", quote(&format!("{id}__anchor"))));
        for r in &g.contained {
            self.resource(depth + 1, r);
        }
        if let Some(c) = &g.instantiated_by {
            self.graph(depth + 1, c);
        }
        self.line(depth, "}");
    }

    /// Drawable endpoint for a graph plus an optional cluster attribute.
    fn anchor(&self, id: &str) -> (String, Option<String>) {
        match self.wf.graphs.get(id) {
            Some(g) if g.is_node() => match &g.contained[0] {
                ResourceRef::Graph(inner) => self.anchor(inner),
                r => (r.id().clone(), None),
            },
            _ => (format!("{id}__anchor"), Some(format!("cluster_{id}"))),
        }
    }

    fn edge(&mut self, from: &str, to: &str, attrs: &str) {
        let (a, ta) = self.anchor(from);
        let (b, hb) = self.anchor(to);
        let mut extra = String::new();
        if let Some(t) = ta {
            extra.push_str(&format!(", ltail={}", quote(&t)));
        }
        if let Some(h) = hb {
            extra.push_str(&format!(", lhead={}", quote(&h)));
        }
        self.line(1, &format!("{} -> {} [{attrs}{extra}];", quote(&a), quote(&b)));
    }
}

/// Renders `wf` as a DOT digraph. Output is deterministic.
pub fn to_dot(wf: &SimulationWorkflow) -> String {
    let mut e = Emitter { wf, out: String::new() };
    e.line(0, &format!("digraph {} {{", quote(&wf.name)));
    e.line(1, "compound=true;");
    e.line(1, "rankdir=LR;");
    let instantiating: Vec<&String> = wf.graphs.values().filter_map(|g| g.instantiated_by.as_ref()).collect();
    for g in wf.graphs.values() {
        let r = ResourceRef::Graph(g.id.clone());
        if wf.container_of(&r).is_none() && !instantiating.contains(&&g.id) {
            e.graph(1, &g.id);
        }
    }
    let loose = wf
        .sections
        .keys()
        .map(|s| ResourceRef::Section(s.clone()))
        .chain(wf.resources.keys().map(|l| ResourceRef::Logical(l.clone())))
        .filter(|r| wf.container_of(r).is_none())
        .collect::<Vec<_>>();
    for r in &loose {
        e.resource(1, r);
    }
    for (s, g) in &wf.applies_to {
        let (b, hb) = e.anchor(g);
        let lhead = hb.map(|h| format!(", lhead={}", quote(&h))).unwrap_or_default();
        e.line(1, &format!("{} -> {} [color=blue{lhead}];", quote(s), quote(&b)));
    }
    for (a, b) in &wf.causal_edges {
        e.edge(a, b, "color=green");
    }
    for (a, b) in wf.coupling_edges.iter().filter(|(a, b)| a < b) {
        e.edge(a, b, "color=green, dir=both");
    }
    for acc in wf.accesses.values() {
        let flags = acc.flags.entries();
        let label = |read: bool| {
            flags
                .iter()
                .filter(|(_, short, on)| *on && short.starts_with(if read { 'r' } else { 'w' }))
                .map(|(_, short, _)| *short)
                .collect::<Vec<_>>()
                .join(",")
        };
        let (sec, res) = (quote(&acc.access_point), quote(&acc.resource));
        if acc.flags.reads() {
            e.line(1, &format!("{res} -> {sec} [label={}];", quote(&label(true))));
        }
        if acc.flags.writes() {
            e.line(1, &format!("{sec} -> {res} [label={}];", quote(&label(false))));
        }
    }
    for g in wf.graphs.values() {
        for p in &g.starting_points {
            let start = format!("start__{}__{p}", g.id);
            e.line(1, &format!("{} [shape=circle, label=\"\", width=0.15, color=green];", quote(&start)));
            let (b, _) = e.anchor(p);
            e.line(1, &format!("{} -> {} [color=green];", quote(&start), quote(&b)));
        }
    }
    for o in &wf.simulation_outcome {
        let bullet = format!("outcome__{o}");
        e.line(1, &format!("{} [shape=point, width=0.15, color=green];", quote(&bullet)));
        let (a, _) = e.anchor(o);
        e.line(1, &format!("{} -> {} [color=green];", quote(&a), quote(&bullet)));
    }
    e.line(0, "}");
    e.out
}
