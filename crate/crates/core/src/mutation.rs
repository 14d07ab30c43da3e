//! Directed mutation patterns on {rock, paper, scissors}.
//!
//! A pattern is a set of edges `i -> j` ("strategy `i` mutates into `j`"),
//! all running at one shared rate `μ`. The six possible edges are named by
//! indicator coefficients: `alpha_*` for edges out of rock (`x`), `beta_*`
//! out of paper (`y`), `gamma_*` out of scissors (`z`), with the suffix
//! naming the target.

use serde::{Deserialize, Serialize};
use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::simplex::SimplexState;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct MutationPattern {
    /// x -> y
    pub alpha_y: bool,
    /// x -> z
    pub alpha_z: bool,
    /// y -> x
    pub beta_x: bool,
    /// y -> z
    pub beta_z: bool,
    /// z -> x
    pub gamma_x: bool,
    /// z -> y
    pub gamma_y: bool,
}

/// Named patterns used throughout the figures and tables.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum PatternPreset {
    None,
    Global,
    SingleXy,
    SingleYx,
    /// z -> y and x -> y: one edge with the flow, one against it.
    DoubleOpposing,
    /// z -> x and x -> y: both edges with the direction of circulation.
    DoubleSameDirection,
    /// x -> y and y -> x.
    DoubleBidirectional,
    /// Two-edge centroid-preserving pattern (x <-> y).
    Table4Two,
    /// Three-edge centroid-preserving pattern: the cycle x -> y -> z -> x.
    Table4Three,
    /// Four-edge centroid-preserving pattern: x <-> y and y <-> z.
    Table4Four,
}

impl PatternPreset {
    pub const ALL: [PatternPreset; 10] = [
        PatternPreset::None,
        PatternPreset::Global,
        PatternPreset::SingleXy,
        PatternPreset::SingleYx,
        PatternPreset::DoubleOpposing,
        PatternPreset::DoubleSameDirection,
        PatternPreset::DoubleBidirectional,
        PatternPreset::Table4Two,
        PatternPreset::Table4Three,
        PatternPreset::Table4Four,
    ];

    pub fn name(self) -> &'static str {
        match self {
            PatternPreset::None => "none",
            PatternPreset::Global => "global",
            PatternPreset::SingleXy => "single_xy",
            PatternPreset::SingleYx => "single_yx",
            PatternPreset::DoubleOpposing => "double_opposing",
            PatternPreset::DoubleSameDirection => "double_same_direction",
            PatternPreset::DoubleBidirectional => "double_bidirectional",
            PatternPreset::Table4Two => "table4_two",
            PatternPreset::Table4Three => "table4_three",
            PatternPreset::Table4Four => "table4_four",
        }
    }

    pub fn from_name(name: &str) -> Option<PatternPreset> {
        let norm = name.trim().to_ascii_lowercase().replace('-', "_");
        Self::ALL.into_iter().find(|p| p.name() == norm)
    }

    pub fn pattern(self) -> MutationPattern {
        use Node::*;
        let edges: &[(Node, Node)] = match self {
            PatternPreset::None => &[],
            PatternPreset::Global => &[(X, Y), (X, Z), (Y, X), (Y, Z), (Z, X), (Z, Y)],
            PatternPreset::SingleXy => &[(X, Y)],
            PatternPreset::SingleYx => &[(Y, X)],
            PatternPreset::DoubleOpposing => &[(Z, Y), (X, Y)],
            PatternPreset::DoubleSameDirection => &[(Z, X), (X, Y)],
            PatternPreset::DoubleBidirectional | PatternPreset::Table4Two => &[(X, Y), (Y, X)],
            PatternPreset::Table4Three => &[(X, Y), (Y, Z), (Z, X)],
            PatternPreset::Table4Four => &[(X, Y), (Y, X), (Y, Z), (Z, Y)],
        };
        MutationPattern::from_edges(edges.iter().copied())
    }
}

/// Vertex of the mutation graph; `x`, `y`, `z` are rock, paper, scissors.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Node {
    X,
    Y,
    Z,
}

impl Node {
    pub const ALL: [Node; 3] = [Node::X, Node::Y, Node::Z];

    pub fn index(self) -> usize {
        self as usize
    }

    fn parse(tok: &str) -> Option<Node> {
        match tok.trim().to_ascii_lowercase().as_str() {
            "x" | "r" => Some(Node::X),
            "y" | "p" => Some(Node::Y),
            "z" | "s" => Some(Node::Z),
            _ => None,
        }
    }

    /// x -> y -> z -> x
    pub fn rotate(self) -> Node {
        Node::ALL[(self.index() + 1) % 3]
    }

    fn letter(self) -> char {
        ['x', 'y', 'z'][self.index()]
    }
}

impl MutationPattern {
    pub fn none() -> Self {
        Self::default()
    }

    pub fn global() -> Self {
        PatternPreset::Global.pattern()
    }

    pub fn from_edges(edges: impl IntoIterator<Item = (Node, Node)>) -> Self {
        let mut p = Self::default();
        for (from, to) in edges {
            p.set_edge(from, to, true);
        }
        p
    }

    fn slot(&mut self, from: Node, to: Node) -> Option<&mut bool> {
        use Node::*;
        match (from, to) {
            (X, Y) => Some(&mut self.alpha_y),
            (X, Z) => Some(&mut self.alpha_z),
            (Y, X) => Some(&mut self.beta_x),
            (Y, Z) => Some(&mut self.beta_z),
            (Z, X) => Some(&mut self.gamma_x),
            (Z, Y) => Some(&mut self.gamma_y),
            _ => None,
        }
    }

    /// Sets an edge; self-edges are ignored.
    pub fn set_edge(&mut self, from: Node, to: Node, on: bool) {
        if let Some(s) = self.slot(from, to) {
            *s = on;
        }
    }

    pub fn has_edge(&self, from: Node, to: Node) -> bool {
        let mut copy = *self;
        copy.slot(from, to).map(|s| *s).unwrap_or(false)
    }

    /// Active edges in a fixed order (xy, xz, yx, yz, zx, zy).
    pub fn edges(&self) -> Vec<(Node, Node)> {
        let mut out = Vec::new();
        for from in Node::ALL {
            for to in Node::ALL {
                if self.has_edge(from, to) {
                    out.push((from, to));
                }
            }
        }
        out
    }

    /// Number of active pathways `α_y + α_z + β_x + β_z + γ_x + γ_y`.
    pub fn mutation_count(&self) -> usize {
        [
            self.alpha_y,
            self.alpha_z,
            self.beta_x,
            self.beta_z,
            self.gamma_x,
            self.gamma_y,
        ]
        .iter()
        .filter(|&&b| b)
        .count()
    }

    /// All 64 patterns, ordered by their bit encoding.
    pub fn enumerate_all() -> Vec<MutationPattern> {
        (0u8..64)
            .map(|bits| MutationPattern {
                alpha_y: bits & 1 != 0,
                alpha_z: bits & 2 != 0,
                beta_x: bits & 4 != 0,
                beta_z: bits & 8 != 0,
                gamma_x: bits & 16 != 0,
                gamma_y: bits & 32 != 0,
            })
            .collect()
    }

    /// Generator `M` of the mutation flux, `flux = μ M p`: column `i` holds
    /// `-outdeg(i)` on the diagonal and `1` in each target row.
    pub fn generator(&self) -> [[f64; 3]; 3] {
        let mut m = [[0.0; 3]; 3];
        for (from, to) in self.edges() {
            m[to.index()][from.index()] += 1.0;
            m[from.index()][from.index()] -= 1.0;
        }
        m
    }

    /// Pattern with every edge relabelled by x -> y -> z -> x.
    pub fn rotate(&self) -> Self {
        Self::from_edges(
            self.edges()
                .into_iter()
                .map(|(a, b)| (a.rotate(), b.rotate())),
        )
    }

    /// Whether the centroid stays an equilibrium for every `μ`: inflow
    /// equals outflow at each vertex of the mutation graph.
    pub fn is_centroid_preserving(&self) -> bool {
        let b = |v: bool| v as i32;
        let (ay, az, bx, bz, gx, gy) = (
            b(self.alpha_y),
            b(self.alpha_z),
            b(self.beta_x),
            b(self.beta_z),
            b(self.gamma_x),
            b(self.gamma_y),
        );
        bx + gx == ay + az && ay + gy == bx + bz && az + bz == gx + gy
    }

    pub fn is_single_xy(&self) -> bool {
        *self == PatternPreset::SingleXy.pattern()
    }

    pub fn is_single_yx(&self) -> bool {
        *self == PatternPreset::SingleYx.pattern()
    }

    /// Preset that matches this pattern exactly, if any. The Table IV
    /// aliases resolve to their figure names.
    pub fn preset(&self) -> Option<PatternPreset> {
        PatternPreset::ALL
            .into_iter()
            .find(|p| p.pattern() == *self)
    }
}

impl fmt::Display for MutationPattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let edges = self.edges();
        if edges.is_empty() {
            return f.write_str("none");
        }
        let parts: Vec<String> = edges
            .iter()
            .map(|(a, b)| format!("{}>{}", a.letter(), b.letter()))
            .collect();
        f.write_str(&parts.join(","))
    }
}

impl FromStr for MutationPattern {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        parse_pattern(s)
    }
}

/// Parses a preset name or a comma-separated edge list such as `x>y,y>x`.
/// `r`, `p`, `s` are accepted for `x`, `y`, `z`.
pub fn parse_pattern(spec: &str) -> Result<MutationPattern> {
    if let Some(p) = PatternPreset::from_name(spec) {
        return Ok(p.pattern());
    }
    let mut pattern = MutationPattern::default();
    for raw in spec.split(',') {
        let edge = raw.trim();
        if edge.is_empty() {
            return Err(Error::Pattern {
                token: raw.to_string(),
                reason: "empty edge".into(),
            });
        }
        let Some((a, b)) = edge.split_once('>') else {
            return Err(Error::Pattern {
                token: edge.to_string(),
                reason: "expected a preset name or an edge `a>b`".into(),
            });
        };
        let node = |t: &str| {
            Node::parse(t).ok_or_else(|| Error::Pattern {
                token: t.trim().to_string(),
                reason: "unknown node (use x/y/z or r/p/s)".into(),
            })
        };
        let (from, to) = (node(a)?, node(b)?);
        if from == to {
            return Err(Error::Pattern {
                token: edge.to_string(),
                reason: "self-mutation is not representable".into(),
            });
        }
        pattern.set_edge(from, to, true);
    }
    Ok(pattern)
}

/// Mutation part of `(ẋ, ẏ, ż)`.
pub fn mutation_flux(pattern: &MutationPattern, state: &SimplexState, mu: f64) -> [f64; 3] {
    let p = state.as_array();
    let mut flux = [0.0; 3];
    for (from, to) in pattern.edges() {
        let moved = mu * p[from.index()];
        flux[from.index()] -= moved;
        flux[to.index()] += moved;
    }
    flux
}
