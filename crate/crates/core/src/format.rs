//! Plain-text file formats.
//!
//! ```text
//! # tree-semilattice (.tsl)
//! tsl <n> <k>
//! <id> <parent|-1> <color bitmask> <weight>
//!
//! # partition dump
//! partition <node count> <part count> <epsilon>
//! part <id> type <1-4> attach <v> [cut <w>] members <v> ...
//!
//! # graph
//! graph <n>
//! edge <u> <v>
//! weight <v> <weight>
//!
//! # cotree (.ctr)
//! ctr <node count> <m>
//! leaf <id> <parent|-1> <color>
//! node <id> <parent|-1> <m*m bits, row-major>
//! ```
//!
//! Blank lines and `#` comments are ignored. Weights are rationals `n/d`,
//! integers or terminating decimals.

use std::fmt::Write as _;

use crate::cograph::{AdjacencyFn, Cotree, CotreeLabel, SimpleGraph};
use crate::error::{Error, Result};
use crate::partition::{EpsPartition, Part, PartType};
use crate::rational::{parse_rational, Rational};
use crate::reduction::{ReductionMap, ReductionTower};
use crate::tree::{ColorSet, NodeId, TreeSemilattice};

fn lines(text: &str) -> impl Iterator<Item = (usize, Vec<&str>)> {
    text.lines().enumerate().filter_map(|(i, l)| {
        let l = l.split('#').next().unwrap_or("").trim();
        (!l.is_empty()).then(|| (i + 1, l.split_whitespace().collect()))
    })
}

fn perr<T>(line: usize, msg: impl Into<String>) -> Result<T> {
    Err(Error::Parse { line, msg: msg.into() })
}

fn num<T: std::str::FromStr>(line: usize, s: &str, what: &str) -> Result<T> {
    s.parse().map_err(|_| Error::Parse { line, msg: format!("invalid {what} `{s}`") })
}

fn parent_field(line: usize, s: &str) -> Result<Option<NodeId>> {
    if s == "-1" {
        Ok(None)
    } else {
        num(line, s, "parent").map(Some)
    }
}

fn rational(line: usize, s: &str) -> Result<Rational> {
    parse_rational(s).map_err(|_| Error::Parse { line, msg: format!("invalid weight `{s}`") })
}

/// Places `value` at slot `id`, rejecting duplicates and out-of-range ids.
fn place<T>(slots: &mut [Option<T>], line: usize, id: usize, value: T) -> Result<()> {
    match slots.get_mut(id) {
        None => perr(line, format!("node id {id} out of range 0..{}", slots.len())),
        Some(Some(_)) => perr(line, format!("node {id} defined twice")),
        Some(slot) => {
            *slot = Some(value);
            Ok(())
        }
    }
}

fn collect<T>(slots: Vec<Option<T>>) -> Result<Vec<T>> {
    slots
        .into_iter()
        .enumerate()
        .map(|(i, s)| s.ok_or_else(|| Error::Input(format!("node {i} is missing"))))
        .collect()
}

pub fn read_tsl(text: &str) -> Result<TreeSemilattice> {
    let mut it = lines(text);
    let (hl, header) = it.next().ok_or_else(|| Error::Parse { line: 1, msg: "empty input".into() })?;
    if header.len() != 3 || header[0] != "tsl" {
        return perr(hl, "expected header `tsl <n> <k>`");
    }
    let n: usize = num(hl, header[1], "node count")?;
    let k: usize = num(hl, header[2], "color count")?;
    let mut rows: Vec<Option<(Option<NodeId>, ColorSet, Rational)>> = (0..n).map(|_| None).collect();
    for (line, f) in it {
        if f.len() != 4 {
            return perr(line, "expected `<id> <parent|-1> <bitmask> <weight>`");
        }
        let id: usize = num(line, f[0], "node id")?;
        let parent = parent_field(line, f[1])?;
        let bits: u32 = num(line, f[2], "color bitmask")?;
        let w = rational(line, f[3])?;
        place(&mut rows, line, id, (parent, ColorSet(bits), w))?;
    }
    let rows = collect(rows)?;
    let (mut parent, mut colors, mut weights) = (vec![], vec![], vec![]);
    for (p, c, w) in rows {
        parent.push(p);
        colors.push(c);
        weights.push(w);
    }
    TreeSemilattice::new(parent, colors, weights, k)
}

pub fn write_tsl(t: &TreeSemilattice) -> String {
    let mut s = format!("tsl {} {}\n", t.len(), t.k());
    for v in 0..t.len() {
        let p = t.parent(v).map_or("-1".to_string(), |p| p.to_string());
        writeln!(s, "{v} {p} {} {}", t.color(v).bits(), t.weight(v)).unwrap();
    }
    s
}

pub fn write_partition(p: &EpsPartition) -> String {
    let mut s = format!("partition {} {} {}\n", p.part_of.len(), p.len(), p.epsilon);
    for (i, part) in p.parts.iter().enumerate() {
        write!(s, "part {i} type {} attach {}", part.kind.number(), part.attach).unwrap();
        if let Some(w) = part.cut {
            write!(s, " cut {w}").unwrap();
        }
        s.push_str(" members");
        for v in &part.members {
            write!(s, " {v}").unwrap();
        }
        s.push('\n');
    }
    s
}

/// Reads a partition dump for `t`. Type-4 spines are recomputed from the
/// attachment and cut vertices.
pub fn read_partition(text: &str, t: &TreeSemilattice) -> Result<EpsPartition> {
    let mut it = lines(text);
    let (hl, header) = it.next().ok_or_else(|| Error::Parse { line: 1, msg: "empty input".into() })?;
    if header.len() != 4 || header[0] != "partition" {
        return perr(hl, "expected header `partition <nodes> <parts> <epsilon>`");
    }
    let n: usize = num(hl, header[1], "node count")?;
    let count: usize = num(hl, header[2], "part count")?;
    let eps = rational(hl, header[3])?;
    if n != t.len() {
        return perr(hl, format!("partition covers {n} nodes, structure has {}", t.len()));
    }
    let mut parts: Vec<Option<Part>> = (0..count).map(|_| None).collect();
    for (line, f) in it {
        if f.len() < 7 || f[0] != "part" || f[2] != "type" || f[4] != "attach" {
            return perr(line, "expected `part <id> type <t> attach <v> [cut <w>] members ...`");
        }
        let id: usize = num(line, f[1], "part id")?;
        let kind = num::<u8>(line, f[3], "part type")
            .ok()
            .and_then(PartType::from_number)
            .ok_or_else(|| Error::Parse { line, msg: format!("part type must be 1-4, got `{}`", f[3]) })?;
        let attach: NodeId = num(line, f[5], "attachment vertex")?;
        let (cut, rest) = if f[6] == "cut" {
            if f.len() < 9 {
                return perr(line, "truncated part line");
            }
            (Some(num::<NodeId>(line, f[7], "cut vertex")?), &f[8..])
        } else {
            (None, &f[6..])
        };
        if rest.first() != Some(&"members") {
            return perr(line, "expected `members`");
        }
        let mut members: Vec<NodeId> =
            rest[1..].iter().map(|s| num(line, s, "member")).collect::<Result<_>>()?;
        members.sort_unstable();
        if members.iter().any(|&v| v >= n) || attach >= n || cut.is_some_and(|w| w >= n) {
            return perr(line, "node id out of range");
        }
        let spine = match (kind, cut) {
            (PartType::Segment, Some(w)) => spine(t, attach, w)
                .ok_or_else(|| Error::Parse { line, msg: "cut vertex is not below the attachment".into() })?,
            (PartType::Segment, None) => return perr(line, "type-4 part needs a cut vertex"),
            _ => vec![],
        };
        place(&mut parts, line, id, Part { kind, attach, cut, spine, members })
            .map_err(|_| Error::Parse { line, msg: format!("part {id} duplicated or out of range") })?;
    }
    let parts = collect(parts).map_err(|_| Error::Input("part lines missing".into()))?;
    let mut seen = vec![false; n];
    for part in &parts {
        for &v in &part.members {
            if std::mem::replace(&mut seen[v], true) {
                return Err(Error::Input(format!("node {v} is in two parts")));
            }
        }
    }
    if let Some(v) = seen.iter().position(|s| !s) {
        return Err(Error::Input(format!("node {v} is in no part")));
    }
    Ok(EpsPartition::from_parts(eps, n, parts))
}

fn spine(t: &TreeSemilattice, v: NodeId, w: NodeId) -> Option<Vec<NodeId>> {
    if v == w || !t.leq(v, w) {
        return None;
    }
    let mut path = vec![];
    let mut u = t.parent(w)?;
    loop {
        path.push(u);
        if u == v {
            break;
        }
        u = t.parent(u)?;
    }
    path.reverse();
    Some(path)
}

pub fn write_reduction(r: &ReductionMap) -> String {
    let mut s = format!("reduction {} {} {}\n", r.source.len(), r.target.len(), r.epsilon);
    for (x, &z) in r.pi.iter().enumerate() {
        writeln!(s, "map {x} -> {z}").unwrap();
    }
    s.push_str(&write_tsl(&r.target));
    s
}

pub fn write_tower(tower: &ReductionTower) -> String {
    let mut s = String::new();
    for (i, r) in tower.levels.iter().enumerate() {
        writeln!(s, "level {i}").unwrap();
        s.push_str(&write_reduction(r));
    }
    for (i, p) in tower.connecting.iter().enumerate() {
        writeln!(s, "connect {} -> {i}", i + 1).unwrap();
        for (z, &y) in p.iter().enumerate() {
            writeln!(s, "map {z} -> {y}").unwrap();
        }
    }
    s
}

pub fn read_graph(text: &str) -> Result<SimpleGraph> {
    let mut it = lines(text);
    let (hl, header) = it.next().ok_or_else(|| Error::Parse { line: 1, msg: "empty input".into() })?;
    if header.len() != 2 || header[0] != "graph" {
        return perr(hl, "expected header `graph <n>`");
    }
    let n: usize = num(hl, header[1], "vertex count")?;
    let mut edges = vec![];
    let mut weights: Vec<Option<Rational>> = vec![None; n];
    let mut weighted = false;
    for (line, f) in it {
        match (f.first().copied(), f.len()) {
            (Some("edge"), 3) => {
                let u: usize = num(line, f[1], "vertex")?;
                let v: usize = num(line, f[2], "vertex")?;
                if u >= n || v >= n || u == v {
                    return perr(line, format!("bad edge {u} {v}"));
                }
                edges.push((u, v));
            }
            (Some("weight"), 3) => {
                let v: usize = num(line, f[1], "vertex")?;
                let w = rational(line, f[2])?;
                weighted = true;
                place(&mut weights, line, v, w)?;
            }
            _ => return perr(line, "expected `edge <u> <v>` or `weight <v> <w>`"),
        }
    }
    let mut g = SimpleGraph::from_edges(n, &edges)?;
    if weighted {
        g.set_weights(collect(weights)?)?;
    }
    Ok(g)
}

pub fn write_graph(g: &SimpleGraph) -> String {
    let mut s = format!("graph {}\n", g.len());
    for (u, v) in g.edges() {
        writeln!(s, "edge {u} {v}").unwrap();
    }
    if g.is_weighted() {
        for (v, w) in g.weights().iter().enumerate() {
            writeln!(s, "weight {v} {w}").unwrap();
        }
    }
    s
}

pub fn read_cotree(text: &str) -> Result<Cotree> {
    let mut it = lines(text);
    let (hl, header) = it.next().ok_or_else(|| Error::Parse { line: 1, msg: "empty input".into() })?;
    if header.len() != 3 || header[0] != "ctr" {
        return perr(hl, "expected header `ctr <node count> <m>`");
    }
    let n: usize = num(hl, header[1], "node count")?;
    let m: usize = num(hl, header[2], "m")?;
    let mut rows: Vec<Option<(Option<NodeId>, CotreeLabel)>> = (0..n).map(|_| None).collect();
    for (line, f) in it {
        if f.len() != 4 {
            return perr(line, "expected `leaf <id> <parent> <color>` or `node <id> <parent> <bits>`");
        }
        let id: usize = num(line, f[1], "node id")?;
        let parent = parent_field(line, f[2])?;
        let label = match f[0] {
            "leaf" => CotreeLabel::Leaf(num(line, f[3], "leaf color")?),
            "node" => CotreeLabel::Internal(
                AdjacencyFn::parse(m, f[3]).map_err(|e| Error::Parse { line, msg: e.to_string() })?,
            ),
            other => return perr(line, format!("unknown line kind `{other}`")),
        };
        place(&mut rows, line, id, (parent, label))?;
    }
    let (parent, labels) = collect(rows)?.into_iter().unzip();
    Cotree::new(m, parent, labels)
}

pub fn write_cotree(ct: &Cotree) -> String {
    let mut s = format!("ctr {} {}\n", ct.len(), ct.m());
    for (v, (p, label)) in ct.parents().iter().zip(ct.labels()).enumerate() {
        let p = p.map_or("-1".to_string(), |p| p.to_string());
        match label {
            CotreeLabel::Leaf(c) => writeln!(s, "leaf {v} {p} {c}").unwrap(),
            CotreeLabel::Internal(f) => writeln!(s, "node {v} {p} {}", f.bitstring()).unwrap(),
        }
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::partition::eps_partition;
    use crate::rational::ratio;

    #[test]
    fn tsl_round_trip() {
        let text = "# star\ntsl 4 2\n0 -1 0 1/4\n1 0 1 1/4\n2 0 2 0.25\n3 0 3 1/4\n";
        let t = read_tsl(text).unwrap();
        assert_eq!(t.len(), 4);
        assert_eq!(t.color(3), ColorSet::from_colors([1, 2]));
        assert_eq!(read_tsl(&write_tsl(&t)).unwrap().parents(), t.parents());
    }

    #[test]
    fn tsl_errors() {
        assert!(matches!(read_tsl("tsl 2 0\n0 -1 0 1/2\n1 0 0 1/4\n"), Err(Error::Input(_))));
        assert!(matches!(read_tsl("tsl 2 0\n0 -1 0 1/2\n1 5 0 1/2\n"), Err(Error::Input(_))));
        assert!(matches!(read_tsl("tsl 2 0\n0 -1 0 1/2\n0 -1 0 1/2\n"), Err(Error::Parse { line: 3, .. })));
        assert!(matches!(read_tsl("tree 2 0\n"), Err(Error::Parse { line: 1, .. })));
        assert!(matches!(read_tsl("tsl 1 0\n0 -1 0 x\n"), Err(Error::Parse { line: 2, .. })));
    }

    #[test]
    fn partition_round_trip() {
        let t = TreeSemilattice::chain(10);
        let p = eps_partition(&t, &ratio(1, 2)).unwrap();
        let text = write_partition(&p);
        assert!(text.contains("cut 5"));
        assert_eq!(read_partition(&text, &t).unwrap(), p);
    }

    #[test]
    fn graph_and_cotree_round_trip() {
        let g = read_graph("graph 3\nedge 0 1\nedge 1 2\nweight 0 1/2\nweight 1 1/4\nweight 2 1/4\n").unwrap();
        assert_eq!(g.edges(), vec![(0, 1), (1, 2)]);
        assert_eq!(read_graph(&write_graph(&g)).unwrap(), g);
        assert!(read_graph("graph 2\nedge 0 0\n").is_err());

        let text = "ctr 5 1\nnode 0 -1 1\nleaf 1 0 1\nnode 2 0 0\nleaf 3 2 1\nleaf 4 2 1\n";
        let ct = read_cotree(text).unwrap();
        assert_eq!(write_cotree(&ct), text);
        assert!(read_cotree("ctr 2 2\nnode 0 -1 0100\nleaf 1 0 1\n").is_err());
    }
}
