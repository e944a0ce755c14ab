//! Relative size of classes, Cheeger constants of 1-skeleta, and the
//! inequality between them on a cover that kills the class.

use num_rational::Ratio;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::complex::{Cochain, TwoComplex};
use crate::covers::{c_value_table, CoveringMap};
use crate::error::{Error, Result};

/// Largest vertex count accepted by exhaustive Cheeger search.
pub const EXACT_CHEEGER_MAX_VERTICES: usize = 24;

/// Largest number of potentials visited by exact relative size.
pub const EXACT_RELSIZE_CAP: u128 = 1 << 20;

pub fn format_ratio(r: &Ratio<u64>) -> String {
    if *r.denom() == 1 {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

fn serialize_ratio<S: serde::Serializer>(r: &Ratio<u64>, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_str(&format_ratio(r))
}

/// Undirected multigraph; loops are kept but never cross a cut.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SkeletonGraph {
    num_vertices: usize,
    edges: Vec<(usize, usize)>,
    /// Neighbours of each vertex through non-loop edges, with repetition.
    adjacency: Vec<Vec<usize>>,
}

impl SkeletonGraph {
    pub fn new(num_vertices: usize, edges: Vec<(usize, usize)>) -> Result<Self> {
        if num_vertices == 0 {
            return Err(Error::EmptyGraph);
        }
        let mut adjacency = vec![Vec::new(); num_vertices];
        for &(a, b) in &edges {
            if a >= num_vertices || b >= num_vertices {
                return Err(Error::InvalidComplex(format!(
                    "edge ({a}, {b}) has an endpoint outside 0..{num_vertices}"
                )));
            }
            if a != b {
                adjacency[a].push(b);
                adjacency[b].push(a);
            }
        }
        Ok(SkeletonGraph {
            num_vertices,
            edges,
            adjacency,
        })
    }

    pub fn from_complex(k: &TwoComplex) -> Self {
        let edges = k.edges().iter().map(|e| (e.init, e.term)).collect();
        SkeletonGraph::new(k.num_vertices(), edges).expect("complex edges are valid")
    }

    pub fn num_vertices(&self) -> usize {
        self.num_vertices
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn is_connected(&self) -> bool {
        let mut seen = vec![false; self.num_vertices];
        let mut stack = vec![0];
        seen[0] = true;
        let mut count = 1;
        while let Some(v) = stack.pop() {
            for &w in &self.adjacency[v] {
                if !seen[w] {
                    seen[w] = true;
                    count += 1;
                    stack.push(w);
                }
            }
        }
        count == self.num_vertices
    }

    /// Number of edges with exactly one endpoint in `set`.
    pub fn boundary_size(&self, set: &[bool]) -> usize {
        self.edges
            .iter()
            .filter(|&&(a, b)| set[a] != set[b])
            .count()
    }

    /// The same graph with vertex `v` renamed to `perm[v]`.
    pub fn relabel(&self, perm: &[usize]) -> Result<Self> {
        let edges = self.edges.iter().map(|&(a, b)| (perm[a], perm[b])).collect();
        SkeletonGraph::new(self.num_vertices, edges)
    }

    fn check_cheeger_input(&self) -> Result<()> {
        if self.num_vertices < 2 {
            return Err(Error::EmptyGraph);
        }
        if !self.is_connected() {
            return Err(Error::DisconnectedGraph);
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CheegerMode {
    Exact,
    /// Sweep cuts of an approximate Fiedler vector; an upper bound.
    Heuristic { seed: u64 },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CheegerValue {
    #[serde(serialize_with = "serialize_ratio")]
    pub value: Ratio<u64>,
    /// False when `value` is only an upper bound.
    pub exact: bool,
    /// A vertex set attaining `value`.
    pub witness: Vec<usize>,
}

/// `min |dA| / |A|` over vertex sets with `0 < |A| <= |V|/2`.
pub fn cheeger_constant(g: &SkeletonGraph, mode: CheegerMode) -> Result<CheegerValue> {
    g.check_cheeger_input()?;
    match mode {
        CheegerMode::Exact => exact_cheeger(g),
        CheegerMode::Heuristic { seed } => Ok(sweep_cheeger(g, seed)),
    }
}

fn better(a: (u64, u64, u64), b: (u64, u64, u64)) -> bool {
    // (boundary, size, mask): smaller ratio, then smaller mask
    let lhs = a.0 * b.1;
    let rhs = b.0 * a.1;
    lhs < rhs || (lhs == rhs && a.2 < b.2)
}

fn exact_cheeger(g: &SkeletonGraph) -> Result<CheegerValue> {
    let n = g.num_vertices;
    if n > EXACT_CHEEGER_MAX_VERTICES {
        return Err(Error::Mode(format!(
            "exact Cheeger search needs at most {EXACT_CHEEGER_MAX_VERTICES} vertices, got {n}"
        )));
    }
    let half = (n / 2) as u32;
    let high_bits = n.min(6);
    let low_bits = n - high_bits;
    let best = (0u64..1 << high_bits)
        .into_par_iter()
        .map(|high| {
            // Gray code over the low bits, high bits fixed.
            let mut mask = high << low_bits;
            let mut inside: Vec<bool> = (0..n).map(|v| mask >> v & 1 == 1).collect();
            let mut boundary = g.boundary_size(&inside) as u64;
            let mut best: Option<(u64, u64, u64)> = None;
            let mut consider = |mask: u64, boundary: u64| {
                let size = mask.count_ones();
                if size > 0 && size <= half {
                    let cand = (boundary, size as u64, mask);
                    if best.is_none_or(|b| better(cand, b)) {
                        best = Some(cand);
                    }
                }
            };
            consider(mask, boundary);
            for step in 1u64..1 << low_bits {
                let v = step.trailing_zeros() as usize;
                for &w in &g.adjacency[v] {
                    if inside[w] == inside[v] {
                        boundary += 1;
                    } else {
                        boundary -= 1;
                    }
                }
                inside[v] = !inside[v];
                mask ^= 1 << v;
                consider(mask, boundary);
            }
            best
        })
        .reduce(
            || None,
            |a, b| match (a, b) {
                (Some(x), Some(y)) => Some(if better(y, x) { y } else { x }),
                (x, None) => x,
                (None, y) => y,
            },
        )
        .expect("a graph with two vertices has a proper subset");
    Ok(CheegerValue {
        value: Ratio::new(best.0, best.1),
        exact: true,
        witness: (0..n).filter(|&v| best.2 >> v & 1 == 1).collect(),
    })
}

fn sweep_cheeger(g: &SkeletonGraph, seed: u64) -> CheegerValue {
    let n = g.num_vertices;
    let fiedler = fiedler_vector(g, seed);
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| fiedler[a].total_cmp(&fiedler[b]).then(a.cmp(&b)));
    let mut inside = vec![false; n];
    let mut boundary: i64 = 0;
    let mut best: Option<(u64, u64, Vec<usize>)> = None;
    for (k, &v) in order.iter().enumerate().take(n - 1) {
        for &w in &g.adjacency[v] {
            boundary += if inside[w] { -1 } else { 1 };
        }
        inside[v] = true;
        let size = k + 1;
        let (side, small) = if size <= n / 2 {
            (order[..=k].to_vec(), size)
        } else {
            (order[k + 1..].to_vec(), n - size)
        };
        let b = boundary as u64;
        let s = small as u64;
        if best.as_ref().is_none_or(|(bb, bs, _)| b * bs < bb * s) {
            let mut side = side;
            side.sort_unstable();
            best = Some((b, s, side));
        }
    }
    let (b, s, witness) = best.expect("at least two vertices");
    CheegerValue {
        value: Ratio::new(b, s),
        exact: false,
        witness,
    }
}

/// Approximate eigenvector for the second smallest Laplacian eigenvalue,
/// by power iteration on `cI - L` orthogonal to the constants.
fn fiedler_vector(g: &SkeletonGraph, seed: u64) -> Vec<f64> {
    let n = g.num_vertices;
    let degree: Vec<f64> = g.adjacency.iter().map(|a| a.len() as f64).collect();
    let shift = 2.0 * degree.iter().cloned().fold(0.0, f64::max) + 1.0;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut x: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
    let center = |x: &mut Vec<f64>| {
        let mean = x.iter().sum::<f64>() / n as f64;
        x.iter_mut().for_each(|t| *t -= mean);
        let norm = x.iter().map(|t| t * t).sum::<f64>().sqrt();
        if norm > 0.0 {
            x.iter_mut().for_each(|t| *t /= norm);
        }
    };
    center(&mut x);
    for _ in 0..2000 {
        let mut y: Vec<f64> = (0..n)
            .map(|v| {
                let lx = degree[v] * x[v] - g.adjacency[v].iter().map(|&w| x[w]).sum::<f64>();
                shift * x[v] - lx
            })
            .collect();
        center(&mut y);
        let delta = y.iter().zip(&x).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        x = y;
        if delta < 1e-12 {
            break;
        }
    }
    x
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RelsizeMode {
    /// Every potential with the basepoint pinned to 0.
    Exact,
    /// Greedy single-vertex potential moves; an upper bound.
    Upper,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RelativeSize {
    pub value: Ratio<u64>,
    pub support: usize,
    pub num_edges: usize,
    /// A cocycle in the class of smallest support found.
    pub representative: Cochain,
    /// False when `value` is only an upper bound.
    pub exact: bool,
}

/// `min |supp(alpha + delta f)| / |E(K)|`.
pub fn relative_size(k: &TwoComplex, alpha: &Cochain, mode: RelsizeMode) -> Result<RelativeSize> {
    k.check_cocycle(alpha)?;
    if k.class_coordinates(alpha).iter().all(|&x| x == 0) {
        return Err(Error::TrivialClass);
    }
    let (representative, exact) = match mode {
        RelsizeMode::Exact => (exact_min_representative(k, alpha)?, true),
        RelsizeMode::Upper => (greedy_representative(k, alpha), false),
    };
    let support = representative.support().len();
    debug_assert!(support > 0);
    Ok(RelativeSize {
        value: Ratio::new(support as u64, k.num_edges() as u64),
        support,
        num_edges: k.num_edges(),
        representative,
        exact,
    })
}

fn exact_min_representative(k: &TwoComplex, alpha: &Cochain) -> Result<Cochain> {
    let p = alpha.p;
    let free: Vec<usize> = (0..k.num_vertices()).filter(|&v| v != k.basepoint()).collect();
    let count = p
        .checked_power(free.len() as u32)
        .filter(|&c| c <= EXACT_RELSIZE_CAP)
        .ok_or_else(|| {
            Error::Mode(format!(
                "exact relative size needs p^(|V|-1) <= {EXACT_RELSIZE_CAP}; |V| = {}",
                k.num_vertices()
            ))
        })?;
    let q = p.get() as u128;
    let potential = |mut index: u128| {
        let mut f = vec![0u32; k.num_vertices()];
        for &v in &free {
            f[v] = (index % q) as u32;
            index /= q;
        }
        f
    };
    let (_, index) = (0..count)
        .into_par_iter()
        .map(|i| (alpha.add(&k.coboundary(p, &potential(i))).support().len(), i))
        .min()
        .expect("at least one potential");
    Ok(alpha.add(&k.coboundary(p, &potential(index))))
}

fn greedy_representative(k: &TwoComplex, alpha: &Cochain) -> Cochain {
    let p = alpha.p;
    let mut incident: Vec<Vec<usize>> = vec![Vec::new(); k.num_vertices()];
    for (e, edge) in k.edges().iter().enumerate() {
        if edge.init != edge.term {
            incident[edge.init].push(e);
            incident[edge.term].push(e);
        }
    }
    let mut c = alpha.clone();
    loop {
        let mut best: Option<(i64, usize, u32)> = None;
        for (v, edges) in incident.iter().enumerate() {
            for t in 1..p.get() {
                // adding t at v changes each incident edge by +t (head) or -t (tail)
                let gain: i64 = edges
                    .iter()
                    .map(|&e| {
                        let edge = k.edge(e);
                        let old = c.get(e);
                        let new = if edge.term == v { p.add(old, t) } else { p.sub(old, t) };
                        (old != 0) as i64 - (new != 0) as i64
                    })
                    .sum();
                if gain > 0 && best.is_none_or(|(g, _, _)| gain > g) {
                    best = Some((gain, v, t));
                }
            }
        }
        let Some((_, v, t)) = best else { break };
        let mut f = vec![0u32; k.num_vertices()];
        f[v] = t;
        c = c.add(&k.coboundary(p, &f));
    }
    c
}

/// Both sides of `h(X~) <= (|E(K)| / (|V(K)|/p)) relsize(alpha)` on a cover
/// on which `alpha` pulls back to a coboundary, with the counting steps
/// behind it.
#[derive(Debug, Clone, Serialize)]
pub struct CheegerRelsizeReport {
    pub cheeger: CheegerValue,
    #[serde(serialize_with = "serialize_ratio")]
    pub relsize: Ratio<u64>,
    #[serde(serialize_with = "serialize_ratio")]
    pub rhs: Ratio<u64>,
    pub holds: bool,
    pub equality: bool,
    /// Number of total vertices with each c-value.
    pub fiber_counts: Vec<usize>,
    pub fibers_balanced: bool,
    /// `|dA|` for `A` the c-value-0 vertices.
    pub cut_boundary: usize,
    /// `degree * |supp(c)|`.
    pub cut_bound: usize,
    pub cut_ok: bool,
}

impl CheegerRelsizeReport {
    pub fn all_ok(&self) -> bool {
        self.holds && self.fibers_balanced && self.cut_ok
    }
}

/// Checks the Cheeger bound for `alpha` on `cov`. `alpha` must be a
/// nontrivial class on the base whose pullback is exact on the total space.
pub fn cheeger_relsize_check(
    cov: &CoveringMap,
    alpha: &Cochain,
    mode: CheegerMode,
) -> Result<CheegerRelsizeReport> {
    let base = cov.base();
    let total = cov.total();
    let p = alpha.p;
    let rel = relative_size(base, alpha, RelsizeMode::Exact)?;
    let c = &rel.representative;

    let values = c_value_table(cov, c)?;
    let mut fiber_counts = vec![0usize; p.get() as usize];
    for &x in &values {
        fiber_counts[x as usize] += 1;
    }
    let nv = total.num_vertices();
    let fibers_balanced = nv.is_multiple_of(p.get() as usize)
        && fiber_counts.iter().all(|&n| n == nv / p.get() as usize);

    let graph = SkeletonGraph::from_complex(total);
    let zero: Vec<bool> = values.iter().map(|&x| x == 0).collect();
    let cut_boundary = graph.boundary_size(&zero);
    let cut_bound = cov.degree() * rel.support;

    let mode = match mode {
        CheegerMode::Exact if nv > EXACT_CHEEGER_MAX_VERTICES => CheegerMode::Heuristic { seed: 0 },
        m => m,
    };
    let cheeger = cheeger_constant(&graph, mode)?;
    let rhs = Ratio::new(p.get() as u64 * rel.support as u64, base.num_vertices() as u64);
    Ok(CheegerRelsizeReport {
        holds: cheeger.value <= rhs,
        equality: cheeger.exact && cheeger.value == rhs,
        cheeger,
        relsize: rel.value,
        rhs,
        fiber_counts,
        fibers_balanced,
        cut_boundary,
        cut_bound,
        cut_ok: cut_boundary <= cut_bound,
    })
}
