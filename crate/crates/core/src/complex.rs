//! Group presentations, finite connected 2-complexes and their mod-p
//! (co)homology.
//!
//! Generators are single lowercase letters; the uppercase letter is the
//! inverse. Relators are kept verbatim, without free or cyclic reduction.

use std::collections::VecDeque;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{kernel_basis, FpMatrix, FpVector, PrimeModulus};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Letter {
    pub generator: usize,
    pub inverse: bool,
}

pub type Word = Vec<Letter>;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GroupPresentation {
    generators: Vec<char>,
    relators: Vec<Word>,
}

impl GroupPresentation {
    pub fn new(generators: Vec<char>, relators: Vec<Word>) -> Result<Self> {
        if generators.is_empty() {
            return Err(Error::Parse {
                line: 0,
                message: "presentation needs at least one generator".into(),
            });
        }
        for (i, &g) in generators.iter().enumerate() {
            if !g.is_ascii_lowercase() {
                return Err(Error::Parse {
                    line: 0,
                    message: format!("generator {g:?} is not a lowercase letter"),
                });
            }
            if generators[..i].contains(&g) {
                return Err(Error::Parse {
                    line: 0,
                    message: format!("generator {g:?} listed twice"),
                });
            }
        }
        for w in &relators {
            if let Some(l) = w.iter().find(|l| l.generator >= generators.len()) {
                return Err(Error::Parse {
                    line: 0,
                    message: format!("relator letter index {} out of range", l.generator),
                });
            }
        }
        Ok(GroupPresentation {
            generators,
            relators,
        })
    }

    /// `parse("a b", &["abAB"])`.
    pub fn parse(generators: &str, relators: &[&str]) -> Result<Self> {
        let gens: Vec<char> = generators
            .split_whitespace()
            .map(|s| {
                let mut cs = s.chars();
                match (cs.next(), cs.next()) {
                    (Some(c), None) => Ok(c),
                    _ => Err(Error::Parse {
                        line: 0,
                        message: format!("generator {s:?} is not a single letter"),
                    }),
                }
            })
            .collect::<Result<_>>()?;
        let mut pres = GroupPresentation::new(gens, Vec::new())?;
        for r in relators {
            let w = pres.parse_word(r)?;
            pres.relators.push(w);
        }
        Ok(pres)
    }

    pub fn parse_word(&self, s: &str) -> Result<Word> {
        s.chars()
            .filter(|c| !c.is_whitespace())
            .map(|c| {
                let lower = c.to_ascii_lowercase();
                match self.generators.iter().position(|&g| g == lower) {
                    Some(generator) if c.is_ascii_alphabetic() => Ok(Letter {
                        generator,
                        inverse: c.is_ascii_uppercase(),
                    }),
                    _ => Err(Error::Parse {
                        line: 0,
                        message: format!("unknown symbol {c:?}"),
                    }),
                }
            })
            .collect()
    }

    pub fn format_word(&self, w: &[Letter]) -> String {
        w.iter()
            .map(|l| {
                let g = self.generators[l.generator];
                if l.inverse {
                    g.to_ascii_uppercase()
                } else {
                    g
                }
            })
            .collect()
    }

    pub fn generators(&self) -> &[char] {
        &self.generators
    }

    pub fn relators(&self) -> &[Word] {
        &self.relators
    }

    pub fn relator_count(&self) -> usize {
        self.relators.len()
    }
}

/// Parses the line-oriented presentation format:
///
/// ```text
/// # genus-2 surface
/// p = 2
/// gens = a b c d
/// rel = abABcdCD
/// ```
pub fn parse_presentation_file(text: &str) -> Result<(GroupPresentation, PrimeModulus)> {
    let mut p = None;
    let mut gens: Option<(usize, String)> = None;
    let mut rels: Vec<(usize, String)> = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let Some((key, value)) = line.split_once('=') else {
            return Err(Error::Parse {
                line: line_no,
                message: format!("expected `key = value`, found {line:?}"),
            });
        };
        let value = value.trim();
        match key.trim() {
            "p" => {
                let q: u64 = value.parse().map_err(|_| Error::Parse {
                    line: line_no,
                    message: format!("modulus {value:?} is not an integer"),
                })?;
                let pm = PrimeModulus::new(q).map_err(|_| Error::Parse {
                    line: line_no,
                    message: format!("modulus {q} is not prime"),
                })?;
                p = Some(pm);
            }
            "gens" => gens = Some((line_no, value.to_string())),
            "rel" => rels.push((line_no, value.to_string())),
            other => {
                return Err(Error::Parse {
                    line: line_no,
                    message: format!("unknown key {other:?}"),
                })
            }
        }
    }
    let p = p.ok_or(Error::Parse {
        line: 0,
        message: "missing `p = <prime>`".into(),
    })?;
    let (gens_line, gens) = gens.ok_or(Error::Parse {
        line: 0,
        message: "missing `gens = ...`".into(),
    })?;
    let with_line = |line: usize| {
        move |e: Error| match e {
            Error::Parse { message, .. } => Error::Parse { line, message },
            other => other,
        }
    };
    let mut pres = GroupPresentation::parse(&gens, &[]).map_err(with_line(gens_line))?;
    for (line, r) in rels {
        let w = pres.parse_word(&r).map_err(with_line(line))?;
        pres.relators.push(w);
    }
    Ok((pres, p))
}

/// Inverse of [`parse_presentation_file`].
pub fn format_presentation_file(pres: &GroupPresentation, p: PrimeModulus) -> String {
    let mut out = format!("p = {p}\ngens =");
    for g in pres.generators() {
        out.push(' ');
        out.push(*g);
    }
    out.push('\n');
    for r in pres.relators() {
        out.push_str("rel = ");
        out.push_str(&pres.format_word(r));
        out.push('\n');
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Edge {
    pub init: usize,
    pub term: usize,
}

/// One traversal of an edge, along (`forward`) or against its orientation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Step {
    pub edge: usize,
    pub forward: bool,
}

impl Step {
    pub fn reversed(self) -> Step {
        Step {
            edge: self.edge,
            forward: !self.forward,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct EdgePath {
    pub start: usize,
    pub steps: Vec<Step>,
}

impl EdgePath {
    pub fn empty(start: usize) -> Self {
        EdgePath {
            start,
            steps: Vec::new(),
        }
    }

    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    /// The same path walked backwards; `end` is this path's end vertex.
    pub fn reversed(&self, end: usize) -> EdgePath {
        EdgePath {
            start: end,
            steps: self.steps.iter().rev().map(|s| s.reversed()).collect(),
        }
    }

    /// Appends `other`, which must start where `self` ends.
    pub fn concat(mut self, other: &EdgePath) -> EdgePath {
        self.steps.extend_from_slice(&other.steps);
        self
    }
}

impl fmt::Display for EdgePath {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "v{}:", self.start)?;
        for s in &self.steps {
            write!(f, " {}{}", if s.forward { '+' } else { '-' }, s.edge)?;
        }
        Ok(())
    }
}

/// A 1-cochain with F_p values, indexed by the edges of some complex.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Cochain {
    pub p: PrimeModulus,
    pub values: FpVector,
}

impl Cochain {
    pub fn zero(p: PrimeModulus, num_edges: usize) -> Self {
        Cochain {
            p,
            values: FpVector::zeros(num_edges),
        }
    }

    pub fn new(p: PrimeModulus, values: Vec<u32>) -> Self {
        let values = values.into_iter().map(|x| x % p.get()).collect();
        Cochain {
            p,
            values: FpVector(values),
        }
    }

    pub fn from_signed(p: PrimeModulus, values: &[i64]) -> Self {
        Cochain {
            p,
            values: FpVector(values.iter().map(|&x| p.reduce(x)).collect()),
        }
    }

    pub fn indicator(p: PrimeModulus, num_edges: usize, edge: usize) -> Self {
        let mut c = Cochain::zero(p, num_edges);
        c.values.0[edge] = 1;
        c
    }

    #[inline]
    pub fn get(&self, edge: usize) -> u32 {
        self.values.0[edge]
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn as_slice(&self) -> &[u32] {
        self.values.as_slice()
    }

    pub fn support(&self) -> Vec<usize> {
        self.values.support()
    }

    pub fn is_zero(&self) -> bool {
        self.values.is_zero()
    }

    pub fn add(&self, other: &Cochain) -> Cochain {
        let p = self.p;
        let values = self
            .as_slice()
            .iter()
            .zip(other.as_slice())
            .map(|(&a, &b)| p.add(a, b))
            .collect();
        Cochain {
            p,
            values: FpVector(values),
        }
    }

    pub fn scale(&self, k: u32) -> Cochain {
        let p = self.p;
        let values = self.as_slice().iter().map(|&a| p.mul(a, k % p.get())).collect();
        Cochain {
            p,
            values: FpVector(values),
        }
    }
}

/// Integer-valued 1-cochain, used for homomorphisms onto Z.
pub type IntegerCochain = Vec<i64>;

/// A finite connected 2-complex with a basepoint and a breadth-first
/// spanning tree of its 1-skeleton.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TwoComplex {
    num_vertices: usize,
    edges: Vec<Edge>,
    faces: Vec<EdgePath>,
    basepoint: usize,
    /// Step from the BFS parent into each vertex (`None` at the basepoint).
    parent: Vec<Option<Step>>,
    bfs_order: Vec<usize>,
    in_tree: Vec<bool>,
    non_tree: Vec<usize>,
}

impl TwoComplex {
    pub fn new(
        num_vertices: usize,
        edges: Vec<Edge>,
        faces: Vec<EdgePath>,
        basepoint: usize,
    ) -> Result<Self> {
        if basepoint >= num_vertices {
            return Err(Error::InvalidComplex(format!(
                "basepoint {basepoint} is not one of {num_vertices} vertices"
            )));
        }
        if let Some(e) = edges
            .iter()
            .position(|e| e.init >= num_vertices || e.term >= num_vertices)
        {
            return Err(Error::InvalidComplex(format!("edge {e} has an invalid endpoint")));
        }
        for (i, f) in faces.iter().enumerate() {
            let end = walk(&edges, f).map_err(|_| {
                Error::InvalidComplex(format!("attaching path of face {i} is not a path"))
            })?;
            if end != f.start || f.start >= num_vertices {
                return Err(Error::InvalidComplex(format!(
                    "attaching path of face {i} is not closed"
                )));
            }
        }

        let mut adj: Vec<Vec<Step>> = vec![Vec::new(); num_vertices];
        for (i, e) in edges.iter().enumerate() {
            adj[e.init].push(Step {
                edge: i,
                forward: true,
            });
            if e.term != e.init {
                adj[e.term].push(Step {
                    edge: i,
                    forward: false,
                });
            }
        }
        let mut parent = vec![None; num_vertices];
        let mut seen = vec![false; num_vertices];
        let mut in_tree = vec![false; edges.len()];
        let mut bfs_order = Vec::with_capacity(num_vertices);
        let mut queue = VecDeque::from([basepoint]);
        seen[basepoint] = true;
        while let Some(v) = queue.pop_front() {
            bfs_order.push(v);
            for &s in &adj[v] {
                let e = edges[s.edge];
                let w = if s.forward { e.term } else { e.init };
                if !seen[w] {
                    seen[w] = true;
                    parent[w] = Some(s);
                    in_tree[s.edge] = true;
                    queue.push_back(w);
                }
            }
        }
        if bfs_order.len() != num_vertices {
            return Err(Error::InvalidComplex("1-skeleton is disconnected".into()));
        }
        let non_tree = (0..edges.len()).filter(|&e| !in_tree[e]).collect();
        Ok(TwoComplex {
            num_vertices,
            edges,
            faces,
            basepoint,
            parent,
            bfs_order,
            in_tree,
            non_tree,
        })
    }

    pub fn num_vertices(&self) -> usize {
        self.num_vertices
    }

    pub fn num_edges(&self) -> usize {
        self.edges.len()
    }

    pub fn num_faces(&self) -> usize {
        self.faces.len()
    }

    pub fn num_cells(&self) -> usize {
        self.num_vertices + self.edges.len() + self.faces.len()
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn edge(&self, e: usize) -> Edge {
        self.edges[e]
    }

    pub fn faces(&self) -> &[EdgePath] {
        &self.faces
    }

    pub fn basepoint(&self) -> usize {
        self.basepoint
    }

    pub fn euler_characteristic(&self) -> i64 {
        self.num_vertices as i64 - self.edges.len() as i64 + self.faces.len() as i64
    }

    pub fn is_tree_edge(&self, e: usize) -> bool {
        self.in_tree[e]
    }

    pub fn spanning_tree(&self) -> Vec<usize> {
        (0..self.edges.len()).filter(|&e| self.in_tree[e]).collect()
    }

    /// Edges outside the spanning tree, in index order. Each one closes up
    /// to a fundamental loop; together they freely generate the
    /// fundamental group of the 1-skeleton.
    pub fn non_tree_edges(&self) -> &[usize] {
        &self.non_tree
    }

    /// Vertices in breadth-first order from the basepoint.
    pub fn bfs_order(&self) -> &[usize] {
        &self.bfs_order
    }

    /// Tree step entering `v` from its parent.
    pub fn parent_step(&self, v: usize) -> Option<Step> {
        self.parent[v]
    }

    /// Endpoint reached by following `s` from its tail.
    pub fn step_head(&self, s: Step) -> usize {
        let e = self.edges[s.edge];
        if s.forward {
            e.term
        } else {
            e.init
        }
    }

    pub fn step_tail(&self, s: Step) -> usize {
        let e = self.edges[s.edge];
        if s.forward {
            e.init
        } else {
            e.term
        }
    }

    /// Path in the spanning tree from the basepoint to `v`.
    pub fn tree_path(&self, v: usize) -> EdgePath {
        let mut steps = Vec::new();
        let mut cur = v;
        while let Some(s) = self.parent[cur] {
            steps.push(s);
            cur = self.step_tail(s);
        }
        steps.reverse();
        EdgePath {
            start: self.basepoint,
            steps,
        }
    }

    /// Based loop: tree path to `init(e)`, then `e`, then back through the tree.
    pub fn fundamental_loop(&self, e: usize) -> EdgePath {
        let Edge { init, term } = self.edges[e];
        let mut path = self.tree_path(init);
        path.steps.push(Step {
            edge: e,
            forward: true,
        });
        path.concat(&self.tree_path(term).reversed(term))
    }

    /// End vertex of `path`, or an error naming the first non-incident step.
    pub fn path_end(&self, path: &EdgePath) -> Result<usize> {
        if path.start >= self.num_vertices {
            return Err(Error::InvalidPath { step: 0 });
        }
        walk(&self.edges, path)
    }

    pub fn evaluate(&self, c: &Cochain, path: &EdgePath) -> Result<u32> {
        self.path_end(path)?;
        Ok(evaluate_steps(c, &path.steps))
    }

    /// Face index with nonzero boundary evaluation, if any.
    pub fn cocycle_defect(&self, c: &Cochain) -> Option<usize> {
        self.faces
            .iter()
            .position(|f| evaluate_steps(c, &f.steps) != 0)
    }

    pub fn is_cocycle(&self, c: &Cochain) -> bool {
        c.len() == self.num_edges() && self.cocycle_defect(c).is_none()
    }

    pub fn check_cocycle(&self, c: &Cochain) -> Result<()> {
        if c.len() != self.num_edges() {
            return Err(Error::LengthMismatch {
                expected: self.num_edges(),
                found: c.len(),
            });
        }
        match self.cocycle_defect(c) {
            Some(face) => Err(Error::NotCocycle { face }),
            None => Ok(()),
        }
    }

    /// `(delta f)(e) = f(term e) - f(init e)`.
    pub fn coboundary(&self, p: PrimeModulus, f: &[u32]) -> Cochain {
        assert_eq!(f.len(), self.num_vertices);
        let values = self
            .edges
            .iter()
            .map(|e| p.sub(f[e.term] % p.get(), f[e.init] % p.get()))
            .collect();
        Cochain {
            p,
            values: FpVector(values),
        }
    }

    /// Evaluation of `c` along the tree path from the basepoint to each vertex.
    pub fn potential(&self, c: &Cochain) -> Vec<u32> {
        let p = c.p;
        let mut pot = vec![0u32; self.num_vertices];
        for &v in &self.bfs_order[1..] {
            let s = self.parent[v].expect("non-root vertex has a parent");
            let x = c.get(s.edge);
            let from = pot[self.step_tail(s)];
            pot[v] = if s.forward { p.add(from, x) } else { p.sub(from, x) };
        }
        pot
    }

    /// Values of `c` on the fundamental loops, in [`Self::non_tree_edges`]
    /// order. For cocycles this is a faithful coordinate system on H^1.
    pub fn class_coordinates(&self, c: &Cochain) -> Vec<u32> {
        let p = c.p;
        let pot = self.potential(c);
        self.non_tree
            .iter()
            .map(|&e| {
                let Edge { init, term } = self.edges[e];
                p.sub(p.add(pot[init], c.get(e)), pot[term])
            })
            .collect()
    }

    /// The cocycle vanishing on the spanning tree with the given values on
    /// the non-tree edges.
    pub fn cochain_from_class_coordinates(&self, p: PrimeModulus, coords: &[u32]) -> Cochain {
        assert_eq!(coords.len(), self.non_tree.len());
        let mut values = vec![0u32; self.num_edges()];
        for (&e, &x) in self.non_tree.iter().zip(coords) {
            values[e] = x % p.get();
        }
        Cochain {
            p,
            values: FpVector(values),
        }
    }

    /// Boundary map of the quotient by the spanning tree: one row per face,
    /// one column per non-tree edge, entries are signed occurrence counts.
    pub fn face_matrix(&self, p: PrimeModulus) -> FpMatrix {
        let mut col = vec![usize::MAX; self.num_edges()];
        for (j, &e) in self.non_tree.iter().enumerate() {
            col[e] = j;
        }
        let mut m = FpMatrix::zeros(self.faces.len(), self.non_tree.len());
        for (i, f) in self.faces.iter().enumerate() {
            for s in &f.steps {
                let j = col[s.edge];
                if j != usize::MAX {
                    let x = m.get(i, j);
                    let y = if s.forward { p.add(x, 1) } else { p.sub(x, 1) };
                    m.set(i, j, y);
                }
            }
        }
        m
    }
}

fn walk(edges: &[Edge], path: &EdgePath) -> Result<usize> {
    let mut cur = path.start;
    for (i, s) in path.steps.iter().enumerate() {
        let e = edges.get(s.edge).ok_or(Error::InvalidPath { step: i })?;
        let (tail, head) = if s.forward {
            (e.init, e.term)
        } else {
            (e.term, e.init)
        };
        if tail != cur {
            return Err(Error::InvalidPath { step: i });
        }
        cur = head;
    }
    Ok(cur)
}

/// Signed sum of `c` over the steps, without checking incidence.
pub fn evaluate_steps(c: &Cochain, steps: &[Step]) -> u32 {
    let p = c.p;
    steps.iter().fold(0, |acc, s| {
        let x = c.get(s.edge);
        if s.forward {
            p.add(acc, x)
        } else {
            p.sub(acc, x)
        }
    })
}

/// Standard presentation complex: one vertex, a loop per generator, a face
/// per relator spelling the relator.
pub fn build_presentation_complex(pres: &GroupPresentation) -> TwoComplex {
    let edges = vec![Edge { init: 0, term: 0 }; pres.generators().len()];
    let faces = pres
        .relators()
        .iter()
        .map(|w| EdgePath {
            start: 0,
            steps: w
                .iter()
                .map(|l| Step {
                    edge: l.generator,
                    forward: !l.inverse,
                })
                .collect(),
        })
        .collect();
    TwoComplex::new(1, edges, faces, 0).expect("presentation complex is well formed")
}

/// `dim H_1(K; F_p)`, computed on the quotient by the spanning tree where
/// the 1-chains are the non-tree edges and the first boundary vanishes.
pub fn homology_dim_p(k: &TwoComplex, p: PrimeModulus) -> usize {
    let m = k.face_matrix(p);
    k.non_tree_edges().len() - m.rank(p)
}

/// Cocycles vanishing on the spanning tree whose classes form a basis of
/// `H^1(K; F_p)`, in echelon order of their non-tree values.
pub fn h1_cocycle_basis(k: &TwoComplex, p: PrimeModulus) -> Vec<Cochain> {
    let m = k.face_matrix(p);
    kernel_basis(&m, p)
        .basis()
        .rows()
        .map(|coords| k.cochain_from_class_coordinates(p, coords))
        .collect()
}

pub fn evaluate_on_path(k: &TwoComplex, c: &Cochain, path: &EdgePath) -> Result<u32> {
    k.evaluate(c, path)
}
