//! Standard small diagrams. Four-point diagrams are elements of `C₄` with boundary list
//! `[p₃, p₂, p₁, p₀]`.

use super::diagram::{glue, Builder, Diagram, Morphism};
use crate::error::{Error, Result};

/// Names accepted by [`named_diagram`].
pub const NAMED_DIAGRAMS: [&str; 9] = ["circle", "theta", "lollipop", "beta1", "beta2", "beta3", "beta4", "f4", "window"];

/// Boundary position of `p_i` in a four-point diagram.
fn pos(i: usize) -> (usize, usize) {
    (0, 3 - i)
}

/// Two vertices joined by three edges.
pub fn theta() -> Diagram {
    let mut b = Builder::new(0);
    let (u, v) = (b.vertex(3), b.vertex(3));
    b.edge((u, 0), (v, 2)).edge((u, 1), (v, 1)).edge((u, 2), (v, 0));
    b.build().expect("valid theta")
}

/// A loop on a stem whose end is joined back: a vertex with a self-loop and a circle on its stem.
pub fn lollipop() -> Diagram {
    let mut b = Builder::new(0);
    let (u, v) = (b.vertex(3), b.vertex(3));
    b.edge((u, 0), (u, 1)).edge((u, 2), (v, 0)).edge((v, 1), (v, 2));
    b.build().expect("valid lollipop")
}

/// `β⁴₁ = {p₀p₃, p₁p₂}`, `β⁴₂ = {p₀p₁, p₂p₃}`, `β⁴₃` an edge separating `p₀p₁ | p₂p₃`, and
/// `β⁴₄` an edge separating `p₁p₂ | p₃p₀`.
pub fn beta4(i: usize) -> Diagram {
    let mut b = Builder::new(4);
    match i {
        1 => {
            b.edge(pos(0), pos(3)).edge(pos(1), pos(2));
        }
        2 => {
            b.edge(pos(0), pos(1)).edge(pos(2), pos(3));
        }
        3 => {
            let (x, y) = (b.vertex(3), b.vertex(3));
            b.edge((x, 0), pos(1)).edge((x, 1), pos(0)).edge((x, 2), (y, 2));
            b.edge((y, 0), pos(3)).edge((y, 1), pos(2));
        }
        4 => {
            let (x, y) = (b.vertex(3), b.vertex(3));
            b.edge((x, 0), pos(2)).edge((x, 1), pos(1)).edge((x, 2), (y, 2));
            b.edge((y, 0), pos(0)).edge((y, 1), pos(3));
        }
        _ => panic!("β⁴ has four elements"),
    }
    b.build().expect("valid β⁴")
}

/// The square with one leg at each corner.
pub fn f4() -> Diagram {
    let mut b = Builder::new(4);
    let v: Vec<usize> = (0..4).map(|_| b.vertex(3)).collect();
    for i in 0..4 {
        // Corner i: slots (towards v_{i+1}, p_i, towards v_{i-1}).
        b.edge((v[i], 1), pos(i));
        b.edge((v[i], 0), (v[(i + 1) % 4], 2));
    }
    b.build().expect("valid f₄")
}

/// `⟨f₄, f₄⟩` as a closed diagram.
pub fn window() -> Diagram {
    glue(&f4(), &f4()).expect("equal boundaries")
}

/// The 2 → 2 diagram with an internal edge from the inputs to the outputs.
pub fn i_move() -> Morphism {
    let mut b = Builder::new(4);
    let (lo, hi) = (b.vertex(3), b.vertex(3));
    b.edge((lo, 0), (0, 0)).edge((lo, 1), (0, 1)).edge((lo, 2), (hi, 2));
    b.edge((hi, 0), (0, 2)).edge((hi, 1), (0, 3));
    Morphism::from_diagram(2, 2, b.build().expect("valid I")).expect("arity")
}

/// The 2 → 2 diagram with an internal edge between the two strands.
pub fn h_move() -> Morphism {
    let mut b = Builder::new(4);
    let (l, rt) = (b.vertex(3), b.vertex(3));
    b.edge((l, 0), (0, 0)).edge((l, 1), (rt, 2)).edge((l, 2), (0, 3));
    b.edge((rt, 0), (0, 1)).edge((rt, 1), (0, 2));
    Morphism::from_diagram(2, 2, b.build().expect("valid H")).expect("arity")
}

/// The 2 → 2 crossing with the strand from input 0 to output 1 on top.
pub fn crossing() -> Morphism {
    let mut b = Builder::new(4);
    let x = b.vertex(4);
    for s in 0..4 {
        b.edge((x, s), (0, s));
    }
    Morphism::from_diagram(2, 2, b.build().expect("valid crossing")).expect("arity")
}

pub fn named_diagram(name: &str) -> Result<Diagram> {
    match name {
        "circle" => Ok(Diagram::loops(1)),
        "theta" => Ok(theta()),
        "lollipop" => Ok(lollipop()),
        "beta1" => Ok(beta4(1)),
        "beta2" => Ok(beta4(2)),
        "beta3" => Ok(beta4(3)),
        "beta4" => Ok(beta4(4)),
        "f4" => Ok(f4()),
        "window" => Ok(window()),
        _ => Err(Error::Parse(format!("unknown diagram {name:?}; known: {}", NAMED_DIAGRAMS.join(", ")))),
    }
}
