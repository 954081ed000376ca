//! Local reduction moves: loops, lollipops, bigons, triangles, squares and crossings.

use std::collections::VecDeque;

use super::diagram::{glue, Diagram, DiagramSum, Link};
use super::{square_window, TrivalentParams};
use crate::error::{Error, Result};
use crate::tensorlab::{r, C64};

/// Picks one of `n` applicable moves; used to randomize the reduction order.
pub type Chooser<'a> = &'a mut dyn FnMut(usize) -> usize;

/// Cap on the number of intermediate terms.
const MAX_TERMS: usize = 1 << 20;

#[derive(Clone, Debug)]
struct Face {
    /// Half-edges `h_i` from vertex `v_i` to `v_{i+1}`.
    edges: Vec<usize>,
    /// External half-edges `x_i` at `v_i`.
    externals: Vec<usize>,
    vertices: Vec<usize>,
}

enum Scan {
    Zero,
    Moves(Vec<Face>),
}

/// Resolve every crossing by `X = (s₀s₃ ∪ s₁s₂) + q (s₀s₁ ∪ s₂s₃)`, slots `[s₀, s₁, s₂, s₃]`
/// counterclockwise with the over-strand on `s₀, s₂`.
pub fn resolve_crossings(s: &DiagramSum, q: C64) -> DiagramSum {
    let mut out = Vec::new();
    let mut stack: Vec<(C64, Diagram)> = s.terms.clone();
    while let Some((c, d)) = stack.pop() {
        match d.verts.iter().skip(1).position(|v| v.len() == 4).map(|i| i + 1) {
            None => out.push((c, d)),
            Some(v) => {
                let ports = d.verts[v].clone();
                for (coef, links) in [
                    (r(1.0), [Link::Port(3), Link::Port(2), Link::Port(1), Link::Port(0)]),
                    (q, [Link::Port(1), Link::Port(0), Link::Port(3), Link::Port(2)]),
                ] {
                    let mut e = d.clone();
                    e.rewire(&ports, &links);
                    e.compact(&[v]);
                    stack.push((c * coef, e));
                }
            }
        }
    }
    DiagramSum { terms: out }.collect()
}

impl Diagram {
    fn scan(&self) -> Scan {
        let own = self.owners();
        let (faces, _) = self.faces(&own);
        let mut moves = Vec::new();
        for orbit in faces {
            if orbit.iter().any(|&h| own[h].0 == 0) {
                continue;
            }
            if orbit.len() == 1 {
                return Scan::Zero;
            }
            if orbit.len() > 4 {
                continue;
            }
            let vertices: Vec<usize> = orbit.iter().map(|&h| own[h].0).collect();
            let mut sorted = vertices.clone();
            sorted.sort_unstable();
            sorted.dedup();
            if sorted.len() != vertices.len() || vertices.iter().any(|&v| self.verts[v].len() != 3) {
                continue;
            }
            let externals = orbit.iter().map(|&h| self.sigma(&own, h)).collect();
            moves.push(Face { edges: orbit, externals, vertices });
        }
        if self.has_bridge(&own) {
            return Scan::Zero;
        }
        moves.sort_by_key(|f| (f.edges.len(), *f.edges.iter().min().expect("nonempty")));
        Scan::Moves(moves)
    }

    /// Whether some edge disconnects the diagram; the side away from the boundary is then a
    /// one-point diagram and vanishes.
    fn has_bridge(&self, own: &[(usize, usize)]) -> bool {
        for h in 0..self.pair.len() {
            let g = self.pair[h];
            if h > g {
                continue;
            }
            let (a, b) = (own[h].0, own[g].0);
            if a == b {
                continue;
            }
            let mut seen = vec![false; self.verts.len()];
            seen[a] = true;
            let mut queue = VecDeque::from([a]);
            let mut connected = false;
            'bfs: while let Some(v) = queue.pop_front() {
                for &x in &self.verts[v] {
                    if x == h || x == g {
                        continue;
                    }
                    let w = own[self.pair[x]].0;
                    if w == b {
                        connected = true;
                        break 'bfs;
                    }
                    if !seen[w] {
                        seen[w] = true;
                        queue.push_back(w);
                    }
                }
            }
            if !connected {
                return true;
            }
        }
        false
    }

    /// Replace the face's vertices by the terms of the corresponding relation.
    fn apply(&self, face: &Face, p: &TrivalentParams) -> Result<Vec<(C64, Diagram)>> {
        let ports = &face.externals;
        let port = |i: usize| Link::Port(i);
        let mut out = Vec::new();
        let finish = |mut d: Diagram, links: &[Link], extra: &[(usize, usize)]| -> Diagram {
            d.rewire(ports, links);
            for &(x, y) in extra {
                d.pair[x] = y;
                d.pair[y] = x;
            }
            d.compact(&face.vertices);
            d
        };
        match ports.len() {
            2 => out.push((p.b, finish(self.clone(), &[port(1), port(0)], &[]))),
            3 => {
                let mut d = self.clone();
                let v = d.add_vertex(3);
                let links = [Link::Half(v[0]), Link::Half(v[2]), Link::Half(v[1])];
                out.push((p.t, finish(d, &links, &[])));
            }
            4 => {
                let sw = square_window(p)?;
                for (i, &c) in sw.coefficients.iter().enumerate() {
                    let mut d = self.clone();
                    let term = match i {
                        0 => finish(d, &[port(3), port(2), port(1), port(0)], &[]),
                        1 => finish(d, &[port(1), port(0), port(3), port(2)], &[]),
                        2 => {
                            let x = d.add_vertex(3);
                            let y = d.add_vertex(3);
                            let links = [Link::Half(x[0]), Link::Half(x[2]), Link::Half(y[1]), Link::Half(y[0])];
                            finish(d, &links, &[(x[1], y[2])])
                        }
                        _ => {
                            let x = d.add_vertex(3);
                            let y = d.add_vertex(3);
                            let links = [Link::Half(y[0]), Link::Half(x[1]), Link::Half(x[0]), Link::Half(y[1])];
                            finish(d, &links, &[(x[2], y[2])])
                        }
                    };
                    out.push((c, term));
                }
            }
            _ => unreachable!("faces larger than four sides are never selected"),
        }
        Ok(out)
    }

    /// Split off components that do not touch the boundary. A closed diagram keeps its first
    /// component as the remainder.
    fn closed_parts(&self) -> Option<(Diagram, Vec<Diagram>)> {
        let comps = self.components();
        let closed_diagram = self.boundary_len() == 0;
        let keep = if closed_diagram { 2 } else { 1 };
        if comps.len() <= keep {
            return None;
        }
        let parts = comps[keep..].iter().map(|c| self.extract(c)).collect();
        let rest = if closed_diagram {
            Diagram { loops: self.loops, ..self.extract(&comps[1]) }
        } else {
            let mut rest = self.clone();
            rest.compact(&comps[1..].concat());
            rest
        };
        Some((rest, parts))
    }
}

/// Reduce every term to a fixed point of the local moves, smallest face first.
pub fn reduce(s: &DiagramSum, p: &TrivalentParams) -> Result<DiagramSum> {
    reduce_inner(s, p, &mut None)
}

/// As [`reduce`], with `choose(n)` picking which of the `n` applicable moves to apply.
pub fn reduce_with(s: &DiagramSum, p: &TrivalentParams, choose: Chooser<'_>) -> Result<DiagramSum> {
    reduce_inner(s, p, &mut Some(choose))
}

fn reduce_inner(s: &DiagramSum, p: &TrivalentParams, choose: &mut Option<Chooser<'_>>) -> Result<DiagramSum> {
    p.validate()?;
    let mut stack: Vec<(C64, Diagram)> = s.terms.clone();
    let mut done = Vec::new();
    let mut steps = 0usize;
    while let Some((mut c, mut d)) = stack.pop() {
        steps += 1;
        if steps > MAX_TERMS {
            return Err(Error::Resource("reduction exceeded the term budget".into()));
        }
        if d.has_crossings() {
            return Err(Error::Shape("resolve crossings before reducing".into()));
        }
        if d.loops > 0 {
            c *= p.d.powu(d.loops);
            d.loops = 0;
        }
        if c == r(0.0) {
            continue;
        }
        if let Some((rest, closed)) = d.closed_parts() {
            for part in closed {
                let value = reduce_inner(&DiagramSum::single(part), p, choose)?;
                c *= value.as_scalar().expect("closed diagrams reduce to scalars");
            }
            stack.push((c, rest));
            continue;
        }
        if d.vertex_count() == 0 {
            done.push((c, d));
            continue;
        }
        let moves = match d.scan() {
            Scan::Zero => continue,
            Scan::Moves(m) => m,
        };
        if moves.is_empty() {
            if d.boundary_len() == 0 {
                return Err(Error::Irreducible(format!(
                    "closed diagram with {} vertices has no face with at most four sides",
                    d.vertex_count()
                )));
            }
            done.push((c, d));
            continue;
        }
        let pick = match choose {
            Some(f) => f(moves.len()) % moves.len(),
            None => 0,
        };
        for (k, e) in d.apply(&moves[pick], p)? {
            stack.push((c * k, e));
        }
    }
    Ok(DiagramSum { terms: done }.collect())
}

/// The scalar value of a sum of closed diagrams.
pub fn evaluate(s: &DiagramSum, p: &TrivalentParams) -> Result<C64> {
    scalar(reduce(s, p)?)
}

/// As [`evaluate`] with a move chooser.
pub fn evaluate_with(s: &DiagramSum, p: &TrivalentParams, choose: Chooser<'_>) -> Result<C64> {
    scalar(reduce_with(s, p, choose)?)
}

fn scalar(s: DiagramSum) -> Result<C64> {
    s.as_scalar().ok_or_else(|| Error::Shape("diagram has boundary points and does not reduce to a scalar".into()))
}

/// `⟨x, y⟩`: reflect `x`, glue boundaries point by point and evaluate. Bilinear.
pub fn inner_product(x: &DiagramSum, y: &DiagramSum, p: &TrivalentParams) -> Result<C64> {
    let mut total = r(0.0);
    for (a, dx) in &x.terms {
        for (b, dy) in &y.terms {
            let closed = glue(dx, dy)?;
            total += a * b * evaluate(&DiagramSum::single(closed), p)?;
        }
    }
    Ok(total)
}
