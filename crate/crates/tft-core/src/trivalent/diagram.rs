//! Planar trivalent diagrams as rotation systems, and the morphism operations on them.
//!
//! Vertex 0 is the boundary of the disk; its half-edges are the boundary points in
//! counterclockwise order around the disk. Every other vertex lists its half-edges in
//! counterclockwise order in the plane. A vertex of degree 4 is a crossing whose over-strand
//! joins slots 0 and 2.
//!
//! As a morphism `m → k` the boundary reads `[in_0, …, in_{m-1}, out_{k-1}, …, out_0]`: inputs
//! along the bottom from left to right, outputs along the top.

use std::collections::{HashMap, VecDeque};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::tensorlab::{r, C64};

const NONE: usize = usize::MAX;

/// A planar diagram with an explicit count of free loops.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Diagram {
    pub(crate) verts: Vec<Vec<usize>>,
    pub(crate) pair: Vec<usize>,
    pub(crate) loops: u32,
}

/// How a removed half-edge is reconnected by [`Diagram::rewire`].
#[derive(Clone, Copy, Debug)]
pub(crate) enum Link {
    /// The strand continues through another removed half-edge.
    Port(usize),
    /// The strand ends at a freshly created half-edge.
    Half(usize),
}

/// A vertex slot: `(vertex, slot)`, with vertex 0 the boundary.
pub type End = (usize, usize);

/// Incremental construction of a diagram from vertices and edges.
#[derive(Clone, Debug)]
pub struct Builder {
    degrees: Vec<usize>,
    edges: Vec<(End, End)>,
    loops: u32,
}

impl Builder {
    /// A diagram with `n` boundary points.
    pub fn new(n: usize) -> Self {
        Builder { degrees: vec![n], edges: Vec::new(), loops: 0 }
    }

    /// Add an internal vertex of degree 3 (or 4 for a crossing); returns its index.
    pub fn vertex(&mut self, degree: usize) -> usize {
        self.degrees.push(degree);
        self.degrees.len() - 1
    }

    pub fn edge(&mut self, a: End, b: End) -> &mut Self {
        self.edges.push((a, b));
        self
    }

    pub fn loops(&mut self, n: u32) -> &mut Self {
        self.loops += n;
        self
    }

    pub fn build(&self) -> Result<Diagram> {
        let mut offset = Vec::with_capacity(self.degrees.len());
        let mut total = 0;
        for &k in &self.degrees {
            offset.push(total);
            total += k;
        }
        for (v, &k) in self.degrees.iter().enumerate().skip(1) {
            if k != 3 && k != 4 {
                return Err(Error::Shape(format!("vertex {v} has degree {k}; only 3 and 4 are allowed")));
            }
        }
        let id = |(v, s): End| -> Result<usize> {
            match self.degrees.get(v) {
                Some(&k) if s < k => Ok(offset[v] + s),
                _ => Err(Error::Shape(format!("no slot {s} at vertex {v}"))),
            }
        };
        let mut pair = vec![NONE; total];
        for &(a, b) in &self.edges {
            let (x, y) = (id(a)?, id(b)?);
            if x == y || pair[x] != NONE || pair[y] != NONE {
                return Err(Error::Shape(format!("slot {a:?} or {b:?} is used twice")));
            }
            pair[x] = y;
            pair[y] = x;
        }
        if let Some(h) = pair.iter().position(|&p| p == NONE) {
            return Err(Error::Shape(format!("half-edge {h} is not connected")));
        }
        let verts = self.degrees.iter().zip(&offset).map(|(&k, &o)| (o..o + k).collect()).collect();
        Ok(Diagram { verts, pair, loops: self.loops })
    }
}

impl Diagram {
    /// The empty diagram, value 1.
    pub fn empty() -> Self {
        Diagram { verts: vec![Vec::new()], pair: Vec::new(), loops: 0 }
    }

    /// `n` free loops.
    pub fn loops(n: u32) -> Self {
        Diagram { loops: n, ..Diagram::empty() }
    }

    pub fn boundary_len(&self) -> usize {
        self.verts[0].len()
    }

    /// Number of internal vertices.
    pub fn vertex_count(&self) -> usize {
        self.verts.len() - 1
    }

    pub fn free_loops(&self) -> u32 {
        self.loops
    }

    pub fn is_empty(&self) -> bool {
        self.verts.len() == 1 && self.verts[0].is_empty()
    }

    pub fn has_crossings(&self) -> bool {
        self.verts.iter().skip(1).any(|v| v.len() == 4)
    }

    /// `(vertex, slot)` of every half-edge.
    pub(crate) fn owners(&self) -> Vec<End> {
        let mut own = vec![(NONE, NONE); self.pair.len()];
        for (v, hs) in self.verts.iter().enumerate() {
            for (s, &h) in hs.iter().enumerate() {
                own[h] = (v, s);
            }
        }
        own
    }

    /// Next half-edge counterclockwise around its vertex, as seen from inside the disk.
    pub(crate) fn sigma(&self, own: &[End], h: usize) -> usize {
        let (v, s) = own[h];
        let k = self.verts[v].len();
        if v == 0 {
            self.verts[0][(s + k - 1) % k]
        } else {
            self.verts[v][(s + 1) % k]
        }
    }

    /// Face orbits of `h ↦ σ(α(h))`.
    pub(crate) fn faces(&self, own: &[End]) -> (Vec<Vec<usize>>, Vec<usize>) {
        let mut face_of = vec![NONE; self.pair.len()];
        let mut faces = Vec::new();
        for start in 0..self.pair.len() {
            if face_of[start] != NONE || own[start].0 == NONE {
                continue;
            }
            let mut orbit = Vec::new();
            let mut h = start;
            loop {
                face_of[h] = faces.len();
                orbit.push(h);
                h = self.sigma(own, self.pair[h]);
                if h == start {
                    break;
                }
            }
            faces.push(orbit);
        }
        (faces, face_of)
    }

    /// Remove the half-edges `ports` from the strand structure, joining their partners as
    /// prescribed by `links`. Closed strands become free loops. Ports must be removed from their
    /// vertices by the caller.
    pub(crate) fn rewire(&mut self, ports: &[usize], links: &[Link]) {
        let index: HashMap<usize, usize> = ports.iter().enumerate().map(|(i, &h)| (h, i)).collect();
        let ext = |i: usize| self.pair[ports[i]];
        let mut visited = vec![false; ports.len()];
        let mut joins = Vec::new();
        // Walk from port `i`, having arrived through its external side (`via_ext`) or its link side.
        let walk = |mut i: usize, mut via_ext: bool, visited: &mut Vec<bool>| -> usize {
            loop {
                visited[i] = true;
                if via_ext {
                    match links[i] {
                        Link::Half(h) => return h,
                        Link::Port(j) => {
                            i = j;
                            via_ext = false;
                        }
                    }
                } else {
                    let q = ext(i);
                    match index.get(&q) {
                        Some(&j) => {
                            i = j;
                            via_ext = true;
                        }
                        None => return q,
                    }
                }
            }
        };
        for i in 0..ports.len() {
            if visited[i] {
                continue;
            }
            let q = ext(i);
            if !index.contains_key(&q) {
                let end = walk(i, true, &mut visited);
                joins.push((q, end));
            }
        }
        for i in 0..ports.len() {
            if visited[i] {
                continue;
            }
            if let Link::Half(h) = links[i] {
                let end = walk(i, false, &mut visited);
                joins.push((h, end));
            }
        }
        for i in 0..ports.len() {
            if visited[i] {
                continue;
            }
            // A closed strand through ports only.
            let mut j = i;
            let mut via_ext = true;
            loop {
                visited[j] = true;
                if via_ext {
                    if let Link::Port(k) = links[j] {
                        j = k;
                    }
                    via_ext = false;
                } else {
                    j = index[&ext(j)];
                    via_ext = true;
                }
                if j == i && via_ext {
                    break;
                }
            }
            self.loops += 1;
        }
        for &h in ports {
            self.pair[h] = NONE;
        }
        for (a, b) in joins {
            self.pair[a] = b;
            self.pair[b] = a;
        }
    }

    /// Append a vertex with fresh, unpaired half-edges.
    pub(crate) fn add_vertex(&mut self, degree: usize) -> Vec<usize> {
        let start = self.pair.len();
        let hs: Vec<usize> = (start..start + degree).collect();
        self.pair.extend(std::iter::repeat_n(NONE, degree));
        self.verts.push(hs.clone());
        hs
    }

    /// Drop vertices whose slot lists were cleared and renumber half-edges.
    pub(crate) fn compact(&mut self, dead: &[usize]) {
        let mut keep = vec![true; self.verts.len()];
        for &v in dead {
            keep[v] = false;
        }
        keep[0] = true;
        let mut new_id = vec![NONE; self.pair.len()];
        let mut verts = Vec::new();
        let mut next = 0;
        for (v, hs) in self.verts.iter().enumerate() {
            if !keep[v] {
                continue;
            }
            let mut out = Vec::with_capacity(hs.len());
            for &h in hs {
                new_id[h] = next;
                out.push(next);
                next += 1;
            }
            verts.push(out);
        }
        let mut pair = vec![NONE; next];
        for (old, &new) in new_id.iter().enumerate() {
            if new != NONE {
                pair[new] = new_id[self.pair[old]];
            }
        }
        debug_assert!(pair.iter().all(|&p| p != NONE), "dangling half-edge after compaction");
        self.verts = verts;
        self.pair = pair;
    }

    /// Connected components as sets of vertices; the boundary vertex is always in the first one.
    pub(crate) fn components(&self) -> Vec<Vec<usize>> {
        let own = self.owners();
        let n = self.verts.len();
        let mut comp = vec![NONE; n];
        let mut out = Vec::new();
        for s in 0..n {
            if comp[s] != NONE {
                continue;
            }
            let id = out.len();
            let mut members = vec![s];
            comp[s] = id;
            let mut queue = VecDeque::from([s]);
            while let Some(v) = queue.pop_front() {
                for &h in &self.verts[v] {
                    let w = own[self.pair[h]].0;
                    if comp[w] == NONE {
                        comp[w] = id;
                        members.push(w);
                        queue.push_back(w);
                    }
                }
            }
            out.push(members);
        }
        out
    }

    /// The closed diagram formed by a set of internal vertices.
    pub(crate) fn extract(&self, vs: &[usize]) -> Diagram {
        let mut d = Diagram::empty();
        let mut map = HashMap::new();
        for &v in vs {
            for &h in &self.verts[v] {
                map.insert(h, map.len());
            }
        }
        d.pair = vec![NONE; map.len()];
        for &v in vs {
            d.verts.push(self.verts[v].iter().map(|h| map[h]).collect());
            for &h in &self.verts[v] {
                d.pair[map[&h]] = map[&self.pair[h]];
            }
        }
        d
    }

    /// A canonical string for diagrams whose components all touch the boundary.
    pub fn canonical_key(&self) -> String {
        let own = self.owners();
        let n = self.verts.len();
        let mut label = vec![NONE; n];
        let mut start = vec![0usize; n];
        let mut order = Vec::new();
        let mut queue = VecDeque::new();
        label[0] = 0;
        order.push(0);
        queue.push_back(0);
        while let Some(v) = queue.pop_front() {
            let k = self.verts[v].len();
            for i in 0..k {
                let h = self.verts[v][(start[v] + i) % k];
                let (w, s) = own[self.pair[h]];
                if label[w] == NONE {
                    label[w] = order.len();
                    start[w] = s;
                    order.push(w);
                    queue.push_back(w);
                }
            }
        }
        let mut key = format!("L{}", self.loops);
        for &v in &order {
            let k = self.verts[v].len();
            key.push('|');
            for i in 0..k {
                let h = self.verts[v][(start[v] + i) % k];
                let (w, s) = own[self.pair[h]];
                let kw = self.verts[w].len();
                key.push_str(&format!("{}.{},", label[w], (s + kw - start[w]) % kw));
            }
        }
        if order.len() < n {
            // Unreached closed components: fall back to the raw structure.
            key.push_str(&format!("#{:?}{:?}", self.verts, self.pair));
        }
        key
    }

    /// Mirror image: every cyclic order is reversed, the boundary list read backwards.
    pub fn mirror(&self) -> Diagram {
        let mut d = self.clone();
        for hs in d.verts.iter_mut() {
            hs.reverse();
        }
        d
    }
}

/// A complex linear combination of diagrams.
#[derive(Clone, Debug, Default)]
pub struct DiagramSum {
    pub terms: Vec<(C64, Diagram)>,
}

impl DiagramSum {
    pub fn zero() -> Self {
        DiagramSum { terms: Vec::new() }
    }

    pub fn single(d: Diagram) -> Self {
        DiagramSum { terms: vec![(r(1.0), d)] }
    }

    pub fn scalar(c: C64) -> Self {
        DiagramSum { terms: vec![(c, Diagram::empty())] }
    }

    pub fn scale(mut self, c: C64) -> Self {
        for t in self.terms.iter_mut() {
            t.0 *= c;
        }
        self
    }

    pub fn add(mut self, other: DiagramSum) -> Self {
        self.terms.extend(other.terms);
        self
    }

    /// Merge terms with equal diagrams.
    pub fn collect(self) -> Self {
        let mut keys: Vec<String> = Vec::new();
        let mut out: Vec<(C64, Diagram)> = Vec::new();
        for (c, d) in self.terms {
            let k = d.canonical_key();
            match keys.iter().position(|x| *x == k) {
                Some(i) => out[i].0 += c,
                None => {
                    keys.push(k);
                    out.push((c, d));
                }
            }
        }
        out.retain(|(c, _)| *c != r(0.0));
        DiagramSum { terms: out }
    }

    /// The value of a sum of empty diagrams; `None` if some term still has structure.
    pub fn as_scalar(&self) -> Option<C64> {
        let mut s = r(0.0);
        for (c, d) in &self.terms {
            if !d.is_empty() || d.loops != 0 {
                return None;
            }
            s += c;
        }
        Some(s)
    }

    /// Apply a bilinear diagram operation termwise.
    pub fn bilinear(&self, other: &DiagramSum, f: impl Fn(&Diagram, &Diagram) -> Result<Diagram>) -> Result<Self> {
        let mut out = Vec::with_capacity(self.terms.len() * other.terms.len());
        for (a, x) in &self.terms {
            for (b, y) in &other.terms {
                out.push((a * b, f(x, y)?));
            }
        }
        Ok(DiagramSum { terms: out })
    }
}

/// A diagram sum viewed as a morphism `dom → cod`.
#[derive(Clone, Debug)]
pub struct Morphism {
    pub dom: usize,
    pub cod: usize,
    pub sum: DiagramSum,
}

impl Morphism {
    pub fn new(dom: usize, cod: usize, sum: DiagramSum) -> Result<Self> {
        for (_, d) in &sum.terms {
            if d.boundary_len() != dom + cod {
                return Err(Error::Shape(format!(
                    "diagram with {} boundary points cannot be a morphism {dom} → {cod}",
                    d.boundary_len()
                )));
            }
        }
        Ok(Morphism { dom, cod, sum })
    }

    pub fn from_diagram(dom: usize, cod: usize, d: Diagram) -> Result<Self> {
        Morphism::new(dom, cod, DiagramSum::single(d))
    }

    /// The identity on `n` strands.
    pub fn identity(n: usize) -> Self {
        let mut b = Builder::new(2 * n);
        for i in 0..n {
            b.edge((0, i), (0, 2 * n - 1 - i));
        }
        Morphism::from_diagram(n, n, b.build().expect("valid identity")).expect("arity")
    }

    /// The cup-cap `E` on two strands.
    pub fn cup_cap() -> Self {
        let mut b = Builder::new(4);
        b.edge((0, 0), (0, 1)).edge((0, 2), (0, 3));
        Morphism::from_diagram(2, 2, b.build().expect("valid cup-cap")).expect("arity")
    }

    /// `self ∘ g`: `g` first.
    pub fn compose(&self, g: &Morphism) -> Result<Morphism> {
        if g.cod != self.dom {
            return Err(Error::Composition(format!("cannot compose {}→{} after {}→{}", self.dom, self.cod, g.dom, g.cod)));
        }
        let (m, k) = (g.dom, g.cod);
        let sum = g.sum.bilinear(&self.sum, |x, y| Ok(compose_diagrams(y, x, m, k)))?;
        Ok(Morphism { dom: g.dom, cod: self.cod, sum })
    }

    /// `self ⊗ g`, with `self` on the left.
    pub fn tensor(&self, g: &Morphism) -> Morphism {
        let sum = self
            .sum
            .bilinear(&g.sum, |x, y| Ok(tensor_diagrams(x, y, self.dom, g.dom)))
            .expect("tensor cannot fail");
        Morphism { dom: self.dom + g.dom, cod: self.cod + g.cod, sum }
    }

    /// Reflection in a horizontal line with conjugated coefficients.
    pub fn dagger(&self) -> Morphism {
        let terms = self.sum.terms.iter().map(|(c, d)| (c.conj(), d.mirror())).collect();
        Morphism { dom: self.cod, cod: self.dom, sum: DiagramSum { terms } }
    }

    /// Closure connecting each output to the matching input on the right.
    pub fn trace(&self) -> Result<DiagramSum> {
        if self.dom != self.cod {
            return Err(Error::Composition(format!("trace of a non-square morphism {}→{}", self.dom, self.cod)));
        }
        let n = self.dom;
        let terms = self.sum.terms.iter().map(|(c, d)| (*c, trace_diagram(d, n))).collect();
        Ok(DiagramSum { terms })
    }

    pub fn scale(&self, c: C64) -> Morphism {
        Morphism { sum: self.sum.clone().scale(c), ..self.clone() }
    }

    pub fn add(&self, other: &Morphism) -> Result<Morphism> {
        if (self.dom, self.cod) != (other.dom, other.cod) {
            return Err(Error::Shape("cannot add morphisms of different types".into()));
        }
        Ok(Morphism { sum: self.sum.clone().add(other.sum.clone()), ..self.clone() })
    }
}

/// Disjoint union of two diagrams' internal vertices with a boundary given by `boundary`,
/// a list of `(which, position)` picking boundary points of `a` (0) or `b` (1).
fn merge(a: &Diagram, b: &Diagram) -> (Diagram, usize) {
    let off = a.pair.len();
    let mut d = Diagram { verts: vec![Vec::new()], pair: Vec::new(), loops: a.loops + b.loops };
    d.pair.extend(a.pair.iter().copied());
    d.pair.extend(b.pair.iter().map(|p| p + off));
    d.verts.extend(a.verts.iter().skip(1).cloned());
    d.verts.extend(b.verts.iter().skip(1).map(|hs| hs.iter().map(|h| h + off).collect()));
    (d, off)
}

/// Glue the outputs of `g` (`m → k`) to the inputs of `f`.
fn compose_diagrams(f: &Diagram, g: &Diagram, m: usize, k: usize) -> Diagram {
    let (mut d, off) = merge(g, f);
    let gb = &g.verts[0];
    let fb: Vec<usize> = f.verts[0].iter().map(|h| h + off).collect();
    let mut boundary: Vec<usize> = gb[..m].to_vec();
    boundary.extend_from_slice(&fb[k..]);
    let mut ports = Vec::with_capacity(2 * k);
    for i in 0..k {
        ports.push(gb[m + k - 1 - i]);
    }
    ports.extend_from_slice(&fb[..k]);
    let links: Vec<Link> = (0..2 * k).map(|i| Link::Port(if i < k { i + k } else { i - k })).collect();
    d.verts[0] = boundary;
    d.rewire(&ports, &links);
    d.compact(&[]);
    d
}

fn tensor_diagrams(f: &Diagram, g: &Diagram, m1: usize, m2: usize) -> Diagram {
    let (mut d, off) = merge(f, g);
    let fb = &f.verts[0];
    let gb: Vec<usize> = g.verts[0].iter().map(|h| h + off).collect();
    let mut boundary = fb[..m1].to_vec();
    boundary.extend_from_slice(&gb);
    boundary.extend_from_slice(&fb[m1..]);
    let _ = m2;
    d.verts[0] = boundary;
    d
}

fn trace_diagram(d: &Diagram, n: usize) -> Diagram {
    let mut d = d.clone();
    let b = std::mem::take(&mut d.verts[0]);
    let ports: Vec<usize> = b.clone();
    let links: Vec<Link> = (0..2 * n).map(|i| Link::Port(2 * n - 1 - i)).collect();
    d.rewire(&ports, &links);
    d.compact(&[]);
    d
}

/// Glue two diagrams with equal boundary counts along their boundaries, point `i` to point `i`,
/// after mirroring the first one.
pub fn glue(d1: &Diagram, d2: &Diagram) -> Result<Diagram> {
    let n = d1.boundary_len();
    if d2.boundary_len() != n {
        return Err(Error::Shape(format!("boundary counts differ: {n} and {}", d2.boundary_len())));
    }
    let a = d1.mirror();
    let (mut d, off) = merge(&a, d2);
    let mut ports: Vec<usize> = a.verts[0].iter().rev().copied().collect();
    ports.extend(d2.verts[0].iter().map(|h| h + off));
    let links: Vec<Link> = (0..2 * n).map(|i| Link::Port(if i < n { i + n } else { i - n })).collect();
    d.rewire(&ports, &links);
    d.compact(&[]);
    Ok(d)
}

/// Serialized form: `vertices` lists internal vertex degrees, `half_edges[h] = [v, slot]` with
/// `v = 0` the boundary, and `pairing[h]` is the partner of `h`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct DiagramJson {
    pub boundary: usize,
    pub vertices: Vec<usize>,
    pub half_edges: Vec<[usize; 2]>,
    pub pairing: Vec<usize>,
    #[serde(default)]
    pub loops: u32,
}

impl Diagram {
    pub fn from_json(s: &str) -> Result<Diagram> {
        let j: DiagramJson = serde_json::from_str(s).map_err(|e| Error::Parse(e.to_string()))?;
        Diagram::from_json_value(&j)
    }

    pub fn from_json_value(j: &DiagramJson) -> Result<Diagram> {
        if j.half_edges.len() != j.pairing.len() {
            return Err(Error::Shape("half_edges and pairing have different lengths".into()));
        }
        let mut b = Builder::new(j.boundary);
        for &k in &j.vertices {
            b.vertex(k);
        }
        b.loops(j.loops);
        for (h, &p) in j.pairing.iter().enumerate() {
            if p >= j.pairing.len() || j.pairing[p] != h {
                return Err(Error::Shape(format!("pairing is not an involution at {h}")));
            }
            if h < p {
                let [v, s] = j.half_edges[h];
                let [w, t] = j.half_edges[p];
                b.edge((v, s), (w, t));
            }
        }
        b.build()
    }

    pub fn to_json_value(&self) -> DiagramJson {
        let own = self.owners();
        DiagramJson {
            boundary: self.boundary_len(),
            vertices: self.verts.iter().skip(1).map(|v| v.len()).collect(),
            half_edges: own.iter().map(|&(v, s)| [v, s]).collect(),
            pairing: self.pair.clone(),
            loops: self.loops,
        }
    }
}
