//! Validation of real dessins given as combinatorial maps on the sphere.
//!
//! A map is a set of darts with a counter-clockwise rotation at each vertex
//! and an edge involution pairing the two darts of every edge. Edges are
//! oriented and carry one of three kinds, the three arcs into which the
//! marked points `0`, `1`, `∞` cut the real projective line:
//!
//! * `K3` runs from a `•` vertex to a `○` vertex,
//! * `K2` runs from a `○` vertex to a `×` vertex,
//! * `K1` runs from a `×` vertex to a `•` vertex.
//!
//! Text format, one item per line, `#` starts a comment:
//!
//! ```text
//! vertex <name> <bullet|circ|cross|plain> <dart> <dart> ...
//! edge <tail dart> <head dart> <K1|K2|K3>
//! equator <dart> <dart> ...
//! symmetry <dart>:<dart> ...
//! ```
//!
//! Darts are listed counter-clockwise around their vertex. The equator is a
//! closed walk given by the dart used to leave each vertex. Darts missing
//! from the symmetry lines are fixed by it.

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::str::FromStr;

use serde::Serialize;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum Color {
    Bullet,
    Circ,
    Cross,
    Plain,
}

impl FromStr for Color {
    type Err = Error;

    fn from_str(s: &str) -> Result<Color> {
        match s.to_ascii_lowercase().as_str() {
            "bullet" | "•" => Ok(Color::Bullet),
            "circ" | "○" => Ok(Color::Circ),
            "cross" | "×" => Ok(Color::Cross),
            "plain" => Ok(Color::Plain),
            _ => Err(Error::MalformedMap(format!("unknown vertex color {s:?}"))),
        }
    }
}

impl fmt::Display for Color {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Color::Bullet => "bullet",
            Color::Circ => "circ",
            Color::Cross => "cross",
            Color::Plain => "plain",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum Kind {
    K1,
    K2,
    K3,
}

impl Kind {
    /// Kind of the next arc met when walking along edge orientations.
    fn forward_successor(self) -> Kind {
        match self {
            Kind::K3 => Kind::K2,
            Kind::K2 => Kind::K1,
            Kind::K1 => Kind::K3,
        }
    }
}

impl FromStr for Kind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Kind> {
        match s.to_ascii_uppercase().as_str() {
            "K1" => Ok(Kind::K1),
            "K2" => Ok(Kind::K2),
            "K3" => Ok(Kind::K3),
            _ => Err(Error::MalformedMap(format!("unknown edge kind {s:?}"))),
        }
    }
}

impl fmt::Display for Kind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Kind::K1 => "K1",
            Kind::K2 => "K2",
            Kind::K3 => "K3",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
struct Dart {
    name: String,
    vertex: usize,
    edge: usize,
    tail: bool,
}

#[derive(Debug, Clone, PartialEq, Eq)]
struct Vertex {
    name: String,
    color: Color,
    darts: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
struct Edge {
    tail: usize,
    head: usize,
    kind: Kind,
}

/// A structurally well-formed planar map candidate.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DessinMap {
    darts: Vec<Dart>,
    vertices: Vec<Vertex>,
    edges: Vec<Edge>,
    equator: Vec<usize>,
    symmetry: Vec<usize>,
    /// Counter-clockwise successor of each dart at its vertex.
    sigma: Vec<usize>,
}

impl DessinMap {
    pub fn parse(text: &str) -> Result<DessinMap> {
        let mut vertices: Vec<(String, Color, Vec<String>)> = Vec::new();
        let mut edges: Vec<(String, String, Kind)> = Vec::new();
        let mut equator: Vec<String> = Vec::new();
        let mut symmetry: Vec<(String, String)> = Vec::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let toks: Vec<&str> = line.split_whitespace().collect();
            let err = |m: &str| Error::MalformedMap(format!("line {}: {m}", lineno + 1));
            match toks[0] {
                "vertex" => {
                    if toks.len() < 4 {
                        return Err(err("vertex needs a name, a color and darts"));
                    }
                    let darts = toks[3..].iter().map(|s| s.to_string()).collect();
                    vertices.push((toks[1].to_string(), toks[2].parse()?, darts));
                }
                "edge" => {
                    if toks.len() != 4 {
                        return Err(err("edge needs tail, head and kind"));
                    }
                    edges.push((toks[1].to_string(), toks[2].to_string(), toks[3].parse()?));
                }
                "equator" => equator.extend(toks[1..].iter().map(|s| s.to_string())),
                "symmetry" => {
                    for t in &toks[1..] {
                        let (a, b) = t.split_once(':').ok_or_else(|| err("expected a:b"))?;
                        symmetry.push((a.to_string(), b.to_string()));
                    }
                }
                other => return Err(err(&format!("unknown item {other:?}"))),
            }
        }
        DessinMap::new(vertices, edges, equator, symmetry)
    }

    /// Builds a map from named vertices (with counter-clockwise dart lists),
    /// edges as `(tail, head, kind)`, the equator walk and symmetry pairs.
    pub fn new(
        vertices: Vec<(String, Color, Vec<String>)>,
        edges: Vec<(String, String, Kind)>,
        equator: Vec<String>,
        symmetry: Vec<(String, String)>,
    ) -> Result<DessinMap> {
        let bad = |m: String| Error::MalformedMap(m);
        let mut index: HashMap<String, usize> = HashMap::new();
        let mut darts = Vec::new();
        let mut vs = Vec::new();
        let mut vnames = HashMap::new();
        for (vi, (name, color, dlist)) in vertices.into_iter().enumerate() {
            if vnames.insert(name.clone(), vi).is_some() {
                return Err(bad(format!("duplicate vertex {name}")));
            }
            let mut ids = Vec::new();
            for dn in dlist {
                if index.insert(dn.clone(), darts.len()).is_some() {
                    return Err(bad(format!("dart {dn} listed twice")));
                }
                ids.push(darts.len());
                darts.push(Dart {
                    name: dn,
                    vertex: vi,
                    edge: usize::MAX,
                    tail: false,
                });
            }
            vs.push(Vertex {
                name,
                color,
                darts: ids,
            });
        }
        let lookup = |n: &str| index.get(n).copied().ok_or_else(|| bad(format!("unknown dart {n}")));
        let mut es = Vec::new();
        for (t, h, kind) in edges {
            let (ti, hi) = (lookup(&t)?, lookup(&h)?);
            if ti == hi {
                return Err(bad(format!("edge {t} {h} uses one dart twice")));
            }
            for (di, is_tail) in [(ti, true), (hi, false)] {
                if darts[di].edge != usize::MAX {
                    return Err(bad(format!("dart {} is on two edges", darts[di].name)));
                }
                darts[di].edge = es.len();
                darts[di].tail = is_tail;
            }
            es.push(Edge {
                tail: ti,
                head: hi,
                kind,
            });
        }
        if let Some(d) = darts.iter().find(|d| d.edge == usize::MAX) {
            return Err(bad(format!("dart {} is on no edge", d.name)));
        }
        let equator = equator.iter().map(|n| lookup(n)).collect::<Result<Vec<_>>>()?;
        let mut tau: Vec<usize> = (0..darts.len()).collect();
        let mut assigned = vec![false; darts.len()];
        for (a, b) in &symmetry {
            let (ai, bi) = (lookup(a)?, lookup(b)?);
            for (x, y) in [(ai, bi), (bi, ai)] {
                if assigned[x] && tau[x] != y {
                    return Err(bad(format!("symmetry maps {} twice", darts[x].name)));
                }
                assigned[x] = true;
                tau[x] = y;
            }
        }
        let mut sigma = vec![0; darts.len()];
        for v in &vs {
            for (i, &d) in v.darts.iter().enumerate() {
                sigma[d] = v.darts[(i + 1) % v.darts.len()];
            }
        }
        Ok(DessinMap {
            darts,
            vertices: vs,
            edges: es,
            equator,
            symmetry: tau,
            sigma,
        })
    }

    pub fn vertex_count(&self) -> usize {
        self.vertices.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn dart_count(&self) -> usize {
        self.darts.len()
    }

    fn alpha(&self, d: usize) -> usize {
        let e = &self.edges[self.darts[d].edge];
        if e.tail == d {
            e.head
        } else {
            e.tail
        }
    }

    fn kind(&self, d: usize) -> Kind {
        self.edges[self.darts[d].edge].kind
    }

    fn color(&self, d: usize) -> Color {
        self.vertices[self.darts[d].vertex].color
    }

    /// Faces as dart cycles of `σ∘α`; each dart leaves its vertex along
    /// the face boundary.
    fn faces(&self) -> Vec<Vec<usize>> {
        let mut seen = vec![false; self.darts.len()];
        let mut faces = Vec::new();
        for start in 0..self.darts.len() {
            if seen[start] {
                continue;
            }
            let mut face = Vec::new();
            let mut d = start;
            while !seen[d] {
                seen[d] = true;
                face.push(d);
                d = self.sigma[self.alpha(d)];
            }
            faces.push(face);
        }
        faces
    }

    fn is_connected(&self) -> bool {
        if self.vertices.is_empty() {
            return true;
        }
        let mut seen = vec![false; self.vertices.len()];
        let mut stack = vec![0];
        seen[0] = true;
        while let Some(v) = stack.pop() {
            for &d in &self.vertices[v].darts {
                let w = self.darts[self.alpha(d)].vertex;
                if !seen[w] {
                    seen[w] = true;
                    stack.push(w);
                }
            }
        }
        seen.into_iter().all(|s| s)
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let name = |d: usize| self.darts[d].name.as_str();
        for v in &self.vertices {
            let ds: Vec<&str> = v.darts.iter().map(|&d| name(d)).collect();
            out += &format!("vertex {} {} {}\n", v.name, v.color, ds.join(" "));
        }
        for e in &self.edges {
            out += &format!("edge {} {} {}\n", name(e.tail), name(e.head), e.kind);
        }
        if !self.equator.is_empty() {
            let ds: Vec<&str> = self.equator.iter().map(|&d| name(d)).collect();
            out += &format!("equator {}\n", ds.join(" "));
        }
        let pairs: Vec<String> = (0..self.darts.len())
            .filter(|&d| self.symmetry[d] > d)
            .map(|d| format!("{}:{}", name(d), name(self.symmetry[d])))
            .collect();
        if !pairs.is_empty() {
            out += &format!("symmetry {}\n", pairs.join(" "));
        }
        out
    }
}

impl FromStr for DessinMap {
    type Err = Error;

    fn from_str(s: &str) -> Result<DessinMap> {
        DessinMap::parse(s)
    }
}

/// Outcome of the six realizability conditions, in order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct DessinReport {
    pub conditions: [bool; 6],
    pub vertices: usize,
    pub edges: usize,
    pub faces: usize,
}

impl DessinReport {
    /// Whether condition `i` (numbered from 1) holds.
    pub fn holds(&self, i: usize) -> bool {
        self.conditions[i - 1]
    }

    /// Failing conditions, numbered from 1.
    pub fn failing(&self) -> Vec<usize> {
        (1..=6).filter(|&i| !self.holds(i)).collect()
    }

    pub fn all_pass(&self) -> bool {
        self.conditions.iter().all(|&c| c)
    }

    pub fn euler(&self) -> i64 {
        self.vertices as i64 - self.edges as i64 + self.faces as i64
    }
}

impl fmt::Display for DessinReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, ok) in self.conditions.iter().enumerate() {
            writeln!(f, "condition {}: {}", i + 1, if *ok { "pass" } else { "fail" })?;
        }
        write!(f, "V={} E={} F={}", self.vertices, self.edges, self.faces)
    }
}

pub fn validate_dessin(g: &DessinMap) -> DessinReport {
    let faces = g.faces();
    let conditions = [
        symmetry_ok(g),
        alternating(g, Color::Bullet, 6, (Kind::K1, Kind::K3)),
        alternating(g, Color::Circ, 4, (Kind::K3, Kind::K2)),
        crosses_ok(g),
        plain_ok(g),
        faces_ok(g, &faces),
    ];
    DessinReport {
        conditions,
        vertices: g.vertices.len(),
        edges: g.edges.len(),
        faces: faces.len(),
    }
}

fn symmetry_ok(g: &DessinMap) -> bool {
    let tau = &g.symmetry;
    let n = g.darts.len();
    let mut inv_sigma = vec![0; n];
    for d in 0..n {
        inv_sigma[g.sigma[d]] = d;
    }
    let structural = (0..n).all(|d| {
        let t = tau[d];
        tau[t] == d
            && tau[g.alpha(d)] == g.alpha(t)
            && tau[g.sigma[t]] == inv_sigma[d]
            && g.color(t) == g.color(d)
            && g.kind(t) == g.kind(d)
            && g.darts[t].tail == g.darts[d].tail
    });
    if !structural || g.equator.is_empty() {
        return false;
    }
    let walk_closed = (0..g.equator.len()).all(|i| {
        let next = g.equator[(i + 1) % g.equator.len()];
        g.darts[g.alpha(g.equator[i])].vertex == g.darts[next].vertex
    });
    let mut on_equator = vec![false; n];
    for &d in &g.equator {
        on_equator[d] = true;
        on_equator[g.alpha(d)] = true;
    }
    walk_closed && (0..n).all(|d| (tau[d] == d) == on_equator[d])
}

/// Valency divisible by `modulus`, darts alternating between incoming
/// edges of kind `kinds.0` and outgoing edges of kind `kinds.1`.
fn alternating(g: &DessinMap, color: Color, modulus: usize, kinds: (Kind, Kind)) -> bool {
    g.vertices.iter().filter(|v| v.color == color).all(|v| {
        let k = v.darts.len();
        if k == 0 || k % modulus != 0 {
            return false;
        }
        let pattern = |d: usize| (g.darts[d].tail, g.kind(d));
        let a = (false, kinds.0);
        let b = (true, kinds.1);
        let first = pattern(v.darts[0]);
        if first != a && first != b {
            return false;
        }
        v.darts.iter().enumerate().all(|(i, &d)| {
            let expected = if (i % 2 == 0) == (first == a) { a } else { b };
            pattern(d) == expected
        })
    })
}

fn crosses_ok(g: &DessinMap) -> bool {
    g.vertices.iter().filter(|v| v.color == Color::Cross).all(|v| {
        if v.darts.len() != 2 {
            return false;
        }
        let mut seen: Vec<(bool, Kind)> = v.darts.iter().map(|&d| (g.darts[d].tail, g.kind(d))).collect();
        seen.sort();
        seen == [(false, Kind::K2), (true, Kind::K1)]
    })
}

fn plain_ok(g: &DessinMap) -> bool {
    g.vertices.iter().filter(|v| v.color == Color::Plain).all(|v| {
        !v.darts.is_empty()
            && v.darts.len() % 2 == 0
            && v.darts.iter().all(|&d| g.kind(d) == g.kind(v.darts[0]))
    })
}

fn faces_ok(g: &DessinMap, faces: &[Vec<usize>]) -> bool {
    let euler = g.vertices.len() as i64 - g.edges.len() as i64 + faces.len() as i64;
    if euler != 2 || !g.is_connected() {
        return false;
    }
    let mut face_of = vec![0; g.darts.len()];
    let mut forward = Vec::with_capacity(faces.len());
    for (fi, face) in faces.iter().enumerate() {
        for &d in face {
            face_of[d] = fi;
        }
        let dir = g.darts[face[0]].tail;
        if face.iter().any(|&d| g.darts[d].tail != dir) {
            return false;
        }
        // merge runs of equal kind, then check the cyclic order of arcs
        let mut runs: Vec<Kind> = Vec::new();
        for &d in face {
            if runs.last() != Some(&g.kind(d)) {
                runs.push(g.kind(d));
            }
        }
        while runs.len() > 1 && runs.first() == runs.last() {
            runs.pop();
        }
        if runs.len() % 3 != 0 {
            return false;
        }
        let ordered = (0..runs.len()).all(|i| {
            let (a, b) = (runs[i], runs[(i + 1) % runs.len()]);
            if dir {
                a.forward_successor() == b
            } else {
                b.forward_successor() == a
            }
        });
        if !ordered {
            return false;
        }
        forward.push(dir);
    }
    g.edges
        .iter()
        .all(|e| forward[face_of[e.tail]] != forward[face_of[e.head]])
}

/// Per-vertex summary used in diagnostics.
pub fn valencies(g: &DessinMap) -> BTreeMap<String, (Color, usize)> {
    g.vertices
        .iter()
        .map(|v| (v.name.clone(), (v.color, v.darts.len())))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::seq::SliceRandom;
    use rand::{Rng, SeedableRng};

    /// Real dessin of `x⁶/(x⁶−1)`: a bullet at 0, a circ at ∞ and six
    /// crosses at the sixth roots of unity, on twelve rays.
    pub(crate) fn sextic() -> String {
        let mut s = String::new();
        let c: Vec<String> = (0..12).map(|k| format!("c{k}")).collect();
        let o: Vec<String> = (0..12).rev().map(|k| format!("o{k}")).collect();
        s += &format!("vertex zero bullet {}\n", c.join(" "));
        s += &format!("vertex inf circ {}\n", o.join(" "));
        for k in (0..12).step_by(2) {
            s += &format!("vertex x{k} cross xi{k} xo{k}\n");
        }
        for k in 0..12 {
            if k % 2 == 1 {
                s += &format!("edge c{k} o{k} K3\n");
            } else {
                s += &format!("edge xi{k} c{k} K1\nedge o{k} xo{k} K2\n");
            }
        }
        s += "equator c0 xo0 o6 xi6\nsymmetry";
        for k in 1..6 {
            let j = 12 - k;
            s += &format!(" c{k}:c{j} o{k}:o{j}");
            if k % 2 == 0 {
                s += &format!(" xi{k}:xi{j} xo{k}:xo{j}");
            }
        }
        s += "\n";
        s
    }

    fn recolor(text: &str, vertex: &str, color: &str) -> String {
        text.lines()
            .map(|l| {
                let toks: Vec<&str> = l.split_whitespace().collect();
                if toks.len() > 2 && toks[0] == "vertex" && toks[1] == vertex {
                    let mut t = toks.clone();
                    t[2] = color;
                    t.join(" ")
                } else {
                    l.to_string()
                }
            })
            .collect::<Vec<_>>()
            .join("\n")
    }

    #[test]
    fn sextic_passes_everything() {
        let g = DessinMap::parse(&sextic()).unwrap();
        let r = validate_dessin(&g);
        assert_eq!((r.vertices, r.edges, r.faces), (8, 18, 12));
        assert_eq!(r.euler(), 2);
        assert!(r.all_pass(), "{r}");
    }

    #[test]
    fn recolored_vertices_fail_one_condition() {
        let base = sextic();
        let cases = [("x0", "plain", 5), ("zero", "cross", 4), ("zero", "circ", 3)];
        for (v, c, cond) in cases {
            let g = DessinMap::parse(&recolor(&base, v, c)).unwrap();
            assert_eq!(validate_dessin(&g).failing(), vec![cond], "{v} as {c}");
        }
    }

    #[test]
    fn broken_symmetry_and_topology() {
        let text = sextic().replace(" c1:c11", " c1:c10");
        let g = DessinMap::parse(&text);
        // c10 is also paired with c2, so the table is inconsistent
        assert!(matches!(g, Err(Error::MalformedMap(_))));
        let no_equator = sextic().replace("equator c0 xo0 o6 xi6\n", "");
        let r = validate_dessin(&DessinMap::parse(&no_equator).unwrap());
        assert_eq!(r.failing(), vec![1]);
        let partial = sextic().replace(" c1:c11 o1:o11", "");
        let r = validate_dessin(&DessinMap::parse(&partial).unwrap());
        assert_eq!(r.failing(), vec![1]);
    }

    #[test]
    fn doubled_cross_loop_fails_four() {
        let g = DessinMap::parse("vertex x cross a b\nedge a b K1\n").unwrap();
        let r = validate_dessin(&g);
        assert!(!r.holds(4));
        assert_eq!(r.faces, 2);
    }

    #[test]
    fn disconnected_map_fails_six() {
        let text = format!("{}vertex y cross p q\nedge p q K1\n", sextic());
        let r = validate_dessin(&DessinMap::parse(&text).unwrap());
        assert!(!r.holds(6));
    }

    #[test]
    fn malformed_inputs() {
        for bad in [
            "vertex a bullet d1\n",
            "vertex a bullet d1 d2\nedge d1 d3 K1\n",
            "vertex a bullet d1 d1\n",
            "vertex a blue d1 d2\nedge d1 d2 K1\n",
            "vertex a bullet d1 d2\nedge d1 d2 K4\n",
            "vertex a bullet d1 d2\nedge d1 d2 K1\nedge d1 d2 K1\n",
            "face a\n",
        ] {
            assert!(matches!(DessinMap::parse(bad), Err(Error::MalformedMap(_))), "{bad}");
        }
    }

    #[test]
    fn text_round_trip() {
        let g = DessinMap::parse(&sextic()).unwrap();
        let again = DessinMap::parse(&g.to_text()).unwrap();
        assert_eq!(validate_dessin(&again), validate_dessin(&g));
        assert_eq!(again.to_text(), g.to_text());
    }

    fn relabel(text: &str, seed: u64) -> String {
        let mut rng = rand::rngs::StdRng::seed_from_u64(seed);
        let g = DessinMap::parse(text).unwrap();
        let mut names: Vec<usize> = (0..g.dart_count()).collect();
        names.shuffle(&mut rng);
        let rename: HashMap<&str, String> = g
            .darts
            .iter()
            .enumerate()
            .map(|(i, d)| (d.name.as_str(), format!("d{}", names[i])))
            .collect();
        let mut lines: Vec<String> = Vec::new();
        for line in text.lines() {
            let mut toks: Vec<String> = line.split_whitespace().map(String::from).collect();
            if toks.is_empty() {
                continue;
            }
            let skip = match toks[0].as_str() {
                "vertex" => 3,
                "edge" => 1,
                _ => 1,
            };
            let end = if toks[0] == "edge" { 3 } else { toks.len() };
            for t in toks.iter_mut().take(end).skip(skip) {
                *t = match t.split_once(':') {
                    Some((a, b)) => format!("{}:{}", rename[a], rename[b]),
                    None => rename[t.as_str()].clone(),
                };
            }
            if toks[0] == "vertex" {
                // the rotation is cyclic, so any starting dart is allowed
                let k = rng.gen_range(0..toks.len() - 3);
                toks[3..].rotate_left(k);
            }
            lines.push(toks.join(" "));
        }
        lines.shuffle(&mut rng);
        lines.join("\n")
    }

    proptest! {
        #[test]
        fn relabeling_preserves_report(seed in any::<u64>(), which in 0usize..4) {
            let base = sextic();
            let text = match which {
                0 => base,
                1 => recolor(&base, "x0", "plain"),
                2 => recolor(&base, "zero", "cross"),
                _ => recolor(&base, "zero", "circ"),
            };
            let expected = validate_dessin(&DessinMap::parse(&text).unwrap());
            let got = validate_dessin(&DessinMap::parse(&relabel(&text, seed)).unwrap());
            prop_assert_eq!(got, expected);
        }
    }
}
