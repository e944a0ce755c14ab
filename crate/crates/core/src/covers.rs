//! Finite regular covers of 2-complexes with abelian deck group.
//!
//! A cover is described by a shift in the deck group `Z/m_1 x ... x Z/m_k`
//! for every base edge. The total complex has one vertex `(v, a)` per base
//! vertex `v` and deck label `a`, and the lift of `e: u -> v` starting at
//! `(u, a)` ends at `(v, a + shift(e))`. Cells of the total complex are
//! numbered lexicographically by (base index, deck label), with the first
//! label coordinate most significant.

use std::sync::Arc;

use crate::complex::{Cochain, Edge, EdgePath, IntegerCochain, Step, TwoComplex};
use crate::error::{Error, Result};
use crate::linalg::{kernel_basis, FpMatrix, FpVector, PrimeModulus};

/// How the cover was specified.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum CoverKind {
    /// Deck group `F_p^n`; the shift of `e` is `(c_1(e), ..., c_n(e))`.
    ElementaryAbelian { p: PrimeModulus, classes: Vec<Cochain> },
    /// Deck group `Z/order`; the shift of `e` is `weights[e] mod order`.
    Cyclic { weights: IntegerCochain, order: u64 },
}

#[derive(Debug, Clone)]
pub struct CoveringMap {
    base: Arc<TwoComplex>,
    total: Arc<TwoComplex>,
    kind: CoverKind,
    moduli: Vec<u64>,
    shifts: Vec<Vec<u64>>,
    degree: usize,
    vertex_fiber: Vec<Vec<usize>>,
    vertex_projection: Vec<usize>,
    edge_projection: Vec<usize>,
    face_projection: Vec<usize>,
    deck_labels: Vec<usize>,
}

impl CoveringMap {
    pub fn base(&self) -> &Arc<TwoComplex> {
        &self.base
    }

    pub fn total(&self) -> &Arc<TwoComplex> {
        &self.total
    }

    pub fn kind(&self) -> &CoverKind {
        &self.kind
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    /// Orders of the cyclic factors of the deck group.
    pub fn deck_moduli(&self) -> &[u64] {
        &self.moduli
    }

    /// The defining classes of an elementary abelian cover.
    pub fn classes(&self) -> Option<&[Cochain]> {
        match &self.kind {
            CoverKind::ElementaryAbelian { classes, .. } => Some(classes),
            CoverKind::Cyclic { .. } => None,
        }
    }

    pub fn fiber(&self, base_vertex: usize) -> &[usize] {
        &self.vertex_fiber[base_vertex]
    }

    pub fn vertex_projection(&self, v: usize) -> usize {
        self.vertex_projection[v]
    }

    pub fn edge_projection(&self, e: usize) -> usize {
        self.edge_projection[e]
    }

    pub fn face_projection(&self, f: usize) -> usize {
        self.face_projection[f]
    }

    /// Deck label of a total vertex, encoded lexicographically.
    pub fn deck_code(&self, v: usize) -> usize {
        self.deck_labels[v]
    }

    /// Deck label of a total vertex as a tuple.
    pub fn deck_label(&self, v: usize) -> Vec<u64> {
        decode(&self.moduli, self.deck_labels[v])
    }

    /// Total vertex over `base_vertex` with the given deck label code.
    pub fn lift_vertex(&self, base_vertex: usize, code: usize) -> usize {
        base_vertex * self.degree + code
    }

    /// `c o q`, the pullback of a base cochain.
    pub fn pullback(&self, c: &Cochain) -> Cochain {
        let values = self.edge_projection.iter().map(|&e| c.get(e)).collect();
        Cochain {
            p: c.p,
            values: FpVector(values),
        }
    }

    /// Lifts `path` (in the base) to the path of the total complex that
    /// starts at `start`.
    pub fn lift_path(&self, path: &EdgePath, start: usize) -> Result<EdgePath> {
        self.base.path_end(path)?;
        if self.vertex_projection.get(start) != Some(&path.start) {
            return Err(Error::InvalidPath { step: 0 });
        }
        let mut cur = start;
        let mut steps = Vec::with_capacity(path.len());
        for &s in &path.steps {
            let step = self.lift_step(cur, s);
            cur = self.total.step_head(step);
            steps.push(step);
        }
        Ok(EdgePath { start, steps })
    }

    /// Lift of base step `s` at total vertex `at`, which must lie over the
    /// tail of `s`.
    fn lift_step(&self, at: usize, s: Step) -> Step {
        let d = self.degree;
        if s.forward {
            let code = self.deck_labels[at];
            Step {
                edge: s.edge * d + code,
                forward: true,
            }
        } else {
            // the lift of e ending at `at` starts at label - shift(e)
            let start_code = self.shift_code(self.deck_labels[at], s.edge, false);
            Step {
                edge: s.edge * d + start_code,
                forward: false,
            }
        }
    }

    fn shift_code(&self, code: usize, base_edge: usize, forward: bool) -> usize {
        let e = &self.shifts[base_edge];
        let mut label = decode(&self.moduli, code);
        for (i, x) in label.iter_mut().enumerate() {
            let m = self.moduli[i];
            *x = if forward {
                (*x + e[i]) % m
            } else {
                (*x + m - e[i]) % m
            };
        }
        encode(&self.moduli, &label)
    }

    /// Deck group element by which the lifts of `base_edge` move labels.
    pub fn edge_shift(&self, base_edge: usize) -> &[u64] {
        &self.shifts[base_edge]
    }
}

fn encode(moduli: &[u64], label: &[u64]) -> usize {
    moduli
        .iter()
        .zip(label)
        .fold(0usize, |acc, (&m, &x)| acc * m as usize + x as usize)
}

fn decode(moduli: &[u64], mut code: usize) -> Vec<u64> {
    let mut label = vec![0u64; moduli.len()];
    for i in (0..moduli.len()).rev() {
        let m = moduli[i] as usize;
        label[i] = (code % m) as u64;
        code /= m;
    }
    label
}

fn build_cover(
    base: Arc<TwoComplex>,
    kind: CoverKind,
    moduli: Vec<u64>,
    shifts: Vec<Vec<u64>>,
) -> Result<CoveringMap> {
    let degree = moduli
        .iter()
        .try_fold(1usize, |acc, &m| acc.checked_mul(m as usize))
        .filter(|&d| d.checked_mul(base.num_cells().max(1)).is_some())
        .ok_or_else(|| Error::Precondition("cover degree overflows".into()))?;
    let labels: Vec<Vec<u64>> = (0..degree).map(|c| decode(&moduli, c)).collect();
    let add = |label: &[u64], shift: &[u64], forward: bool| -> usize {
        let moved: Vec<u64> = label
            .iter()
            .zip(shift)
            .zip(&moduli)
            .map(|((&x, &s), &m)| if forward { (x + s) % m } else { (x + m - s) % m })
            .collect();
        encode(&moduli, &moved)
    };

    let nv = base.num_vertices();
    let mut vertex_fiber = vec![Vec::with_capacity(degree); nv];
    let mut vertex_projection = Vec::with_capacity(nv * degree);
    let mut deck_labels = Vec::with_capacity(nv * degree);
    for (v, fiber) in vertex_fiber.iter_mut().enumerate() {
        for code in 0..degree {
            fiber.push(v * degree + code);
            vertex_projection.push(v);
            deck_labels.push(code);
        }
    }

    let mut edges = Vec::with_capacity(base.num_edges() * degree);
    let mut edge_projection = Vec::with_capacity(base.num_edges() * degree);
    for (e, Edge { init, term }) in base.edges().iter().enumerate() {
        for (code, label) in labels.iter().enumerate() {
            edges.push(Edge {
                init: init * degree + code,
                term: term * degree + add(label, &shifts[e], true),
            });
            edge_projection.push(e);
        }
    }

    let mut faces = Vec::with_capacity(base.num_faces() * degree);
    let mut face_projection = Vec::with_capacity(base.num_faces() * degree);
    for (f, path) in base.faces().iter().enumerate() {
        for label in &labels {
            let mut cur = label.clone();
            let start = path.start * degree + encode(&moduli, &cur);
            let mut steps = Vec::with_capacity(path.len());
            for s in &path.steps {
                let sh = &shifts[s.edge];
                if s.forward {
                    steps.push(Step {
                        edge: s.edge * degree + encode(&moduli, &cur),
                        forward: true,
                    });
                    cur = decode(&moduli, add(&cur, sh, true));
                } else {
                    cur = decode(&moduli, add(&cur, sh, false));
                    steps.push(Step {
                        edge: s.edge * degree + encode(&moduli, &cur),
                        forward: false,
                    });
                }
            }
            faces.push(EdgePath { start, steps });
            face_projection.push(f);
        }
    }

    let basepoint = base.basepoint() * degree;
    let total = TwoComplex::new(nv * degree, edges, faces, basepoint)?;
    Ok(CoveringMap {
        base,
        total: Arc::new(total),
        kind,
        moduli,
        shifts,
        degree,
        vertex_fiber,
        vertex_projection,
        edge_projection,
        face_projection,
        deck_labels,
    })
}

/// Cover with deck group `F_p^n` determined by `n` cocycles whose classes
/// are independent in `H^1(K; F_p)`.
pub fn build_abelian_p_cover(
    base: Arc<TwoComplex>,
    classes: &[Cochain],
    p: PrimeModulus,
) -> Result<CoveringMap> {
    for c in classes {
        if c.p != p {
            return Err(Error::ModulusMismatch(c.p.get(), p.get()));
        }
        base.check_cocycle(c)?;
    }
    let n_loops = base.non_tree_edges().len();
    let coords = FpMatrix::from_rows(p, n_loops, classes.iter().map(|c| base.class_coordinates(c)))?;
    if coords.rank(p) < classes.len() {
        let relations = kernel_basis(&coords.transpose(), p);
        return Err(Error::DependentClasses {
            combination: relations.basis().row(0).to_vec(),
        });
    }
    let moduli = vec![p.get() as u64; classes.len()];
    let shifts = (0..base.num_edges())
        .map(|e| classes.iter().map(|c| c.get(e) as u64).collect())
        .collect();
    build_cover(
        base,
        CoverKind::ElementaryAbelian {
            p,
            classes: classes.to_vec(),
        },
        moduli,
        shifts,
    )
}

/// Cyclic cover of degree `order` induced by an integer cocycle, i.e. by a
/// homomorphism to Z reduced mod `order`.
pub fn build_cyclic_cover(
    base: Arc<TwoComplex>,
    weights: &[i64],
    order: u64,
) -> Result<CoveringMap> {
    if weights.len() != base.num_edges() {
        return Err(Error::LengthMismatch {
            expected: base.num_edges(),
            found: weights.len(),
        });
    }
    if order == 0 {
        return Err(Error::Precondition("cyclic cover of order 0".into()));
    }
    for (face, f) in base.faces().iter().enumerate() {
        let value = integer_evaluation(weights, &f.steps);
        if value != 0 {
            return Err(Error::NotIntegerCocycle { face, value });
        }
    }
    let g = integer_class_coordinates(&base, weights)
        .into_iter()
        .fold(order, |acc, x| gcd(acc, x.unsigned_abs()));
    if g != 1 {
        return Err(Error::NotSurjective { order, gcd: g });
    }
    let shifts = weights
        .iter()
        .map(|&w| vec![w.rem_euclid(order as i64) as u64])
        .collect();
    build_cover(
        base,
        CoverKind::Cyclic {
            weights: weights.to_vec(),
            order,
        },
        vec![order],
        shifts,
    )
}

pub(crate) fn integer_evaluation(weights: &[i64], steps: &[Step]) -> i64 {
    steps
        .iter()
        .map(|s| if s.forward { weights[s.edge] } else { -weights[s.edge] })
        .sum()
}

/// Integer values of `weights` on the fundamental loops.
pub fn integer_class_coordinates(k: &TwoComplex, weights: &[i64]) -> Vec<i64> {
    let mut pot = vec![0i64; k.num_vertices()];
    for &v in &k.bfs_order()[1..] {
        let s = k.parent_step(v).expect("non-root vertex has a parent");
        let w = weights[s.edge];
        pot[v] = pot[k.step_tail(s)] + if s.forward { w } else { -w };
    }
    k.non_tree_edges()
        .iter()
        .map(|&e| {
            let Edge { init, term } = k.edge(e);
            pot[init] + weights[e] - pot[term]
        })
        .collect()
}

fn gcd(a: u64, b: u64) -> u64 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

/// c-value of every total vertex: the evaluation of `c` on the projection
/// of any path from the basepoint lift. Fails, with a witness loop in the
/// total complex, when `c` is nonzero on some loop of the cover.
pub fn c_value_table(cov: &CoveringMap, c: &Cochain) -> Result<Vec<u32>> {
    let base = cov.base();
    if c.len() != base.num_edges() {
        return Err(Error::LengthMismatch {
            expected: base.num_edges(),
            found: c.len(),
        });
    }
    let total = cov.total();
    let lifted = cov.pullback(c);
    let values = total.potential(&lifted);
    let p = c.p;
    for (e, Edge { init, term }) in total.edges().iter().enumerate() {
        let jump = p.sub(p.add(values[*init], lifted.get(e)), values[*term]);
        if jump != 0 {
            return Err(Error::NotConstantOnFiber {
                value: jump,
                witness: total.fundamental_loop(e),
            });
        }
    }
    Ok(values)
}

/// One total face per deck orbit: the lift with deck label 0 of each base face.
pub fn deck_orbit_representatives(cov: &CoveringMap) -> Vec<usize> {
    (0..cov.base().num_faces())
        .map(|f| f * cov.degree())
        .collect()
}

/// All total faces in the deck orbit of `face`.
pub fn deck_orbit(cov: &CoveringMap, face: usize) -> Vec<usize> {
    let f = cov.face_projection(face);
    (0..cov.degree()).map(|code| f * cov.degree() + code).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::complex::{build_presentation_complex, homology_dim_p, GroupPresentation};

    fn p(n: u64) -> PrimeModulus {
        PrimeModulus::new(n).unwrap()
    }

    fn complex(gens: &str, rels: &[&str]) -> Arc<TwoComplex> {
        Arc::new(build_presentation_complex(
            &GroupPresentation::parse(gens, rels).unwrap(),
        ))
    }

    fn indicators(q: PrimeModulus, k: &TwoComplex) -> Vec<Cochain> {
        (0..k.num_edges())
            .map(|e| Cochain::indicator(q, k.num_edges(), e))
            .collect()
    }

    #[test]
    fn wedge_of_two_circles_full_cover() {
        let f2 = p(2);
        let k = complex("a b", &[]);
        let cov = build_abelian_p_cover(k.clone(), &indicators(f2, &k), f2).unwrap();
        let t = cov.total();
        assert_eq!((t.num_vertices(), t.num_edges(), t.num_faces()), (4, 8, 0));
        assert_eq!(t.euler_characteristic(), -4);
        assert_eq!(homology_dim_p(t, f2), 5);
    }

    #[test]
    fn wedge_of_three_circles_full_cover() {
        let f2 = p(2);
        let k = complex("x y z", &[]);
        let cov = build_abelian_p_cover(k.clone(), &indicators(f2, &k), f2).unwrap();
        assert_eq!(cov.degree(), 8);
        assert_eq!(cov.total().num_vertices(), 8);
        assert_eq!(cov.total().num_edges(), 24);
    }

    #[test]
    fn torus_double_cover() {
        let f2 = p(2);
        let k = complex("a b", &["abAB"]);
        let a = Cochain::indicator(f2, 2, 0);
        let cov = build_abelian_p_cover(k, &[a], f2).unwrap();
        let t = cov.total();
        assert_eq!((t.num_vertices(), t.num_edges(), t.num_faces()), (2, 4, 2));
        assert_eq!(t.euler_characteristic(), 0);
    }

    #[test]
    fn dependent_and_non_cocycle_inputs() {
        let f2 = p(2);
        let k = complex("a b", &[]);
        let a = Cochain::indicator(f2, 2, 0);
        let err = build_abelian_p_cover(k, &[a.clone(), a], f2).unwrap_err();
        assert_eq!(err, Error::DependentClasses { combination: vec![1, 1] });

        let z3 = complex("a", &["aaa"]);
        let f2c = Cochain::indicator(f2, 1, 0);
        assert_eq!(
            build_abelian_p_cover(z3, &[f2c], f2).unwrap_err(),
            Error::NotCocycle { face: 0 }
        );
    }

    #[test]
    fn cyclic_covers() {
        let f2 = p(2);
        let wedge = complex("a b", &[]);
        let cov = build_cyclic_cover(wedge.clone(), &[1, 0], 3).unwrap();
        let t = cov.total();
        assert_eq!((t.num_vertices(), t.num_edges()), (3, 6));
        assert_eq!(homology_dim_p(t, f2), 4);

        let id = build_cyclic_cover(wedge.clone(), &[1, 0], 1).unwrap();
        assert_eq!(id.degree(), 1);
        assert_eq!(id.total().num_edges(), 2);

        let torus = complex("a b", &["abAB"]);
        let cov = build_cyclic_cover(torus, &[1, 0], 4).unwrap();
        assert_eq!(cov.total().euler_characteristic(), 0);
        assert_eq!(homology_dim_p(cov.total(), f2), 2);

        assert!(matches!(
            build_cyclic_cover(wedge.clone(), &[2, 0], 4),
            Err(Error::NotSurjective { gcd: 2, .. })
        ));
        assert!(matches!(
            build_cyclic_cover(wedge, &[0, 0], 2),
            Err(Error::NotSurjective { .. })
        ));
        let z = complex("a b", &["ab"]);
        assert!(matches!(
            build_cyclic_cover(z, &[1, 0], 2),
            Err(Error::NotIntegerCocycle { face: 0, value: 1 })
        ));
    }

    #[test]
    fn c_values_single_class() {
        let f2 = p(2);
        let k = complex("x y", &[]);
        let x = Cochain::indicator(f2, 2, 0);
        let cov = build_abelian_p_cover(k, std::slice::from_ref(&x), f2).unwrap();
        assert_eq!(c_value_table(&cov, &x).unwrap(), vec![0, 1]);
        let y = Cochain::indicator(f2, 2, 1);
        assert!(matches!(
            c_value_table(&cov, &y),
            Err(Error::NotConstantOnFiber { value: 1, .. })
        ));
    }

    #[test]
    fn c_values_of_coboundary_are_potential_differences() {
        let f3 = p(3);
        let k = complex("x y", &[]);
        let x = Cochain::indicator(f3, 2, 0);
        let first = build_abelian_p_cover(k, &[x], f3).unwrap();
        let base = first.total().clone();
        let classes = crate::complex::h1_cocycle_basis(&base, f3);
        let cov = build_abelian_p_cover(base.clone(), &classes[..1], f3).unwrap();
        let f = vec![1, 2, 0];
        let db = base.coboundary(f3, &f);
        let values = c_value_table(&cov, &db).unwrap();
        assert_eq!(values[cov.total().basepoint()], 0);
        for (t, &val) in values.iter().enumerate() {
            let v = cov.vertex_projection(t);
            assert_eq!(val, f3.sub(f[v], f[base.basepoint()]));
        }
    }

    #[test]
    fn orbit_representatives() {
        let f2 = p(2);
        let torus = complex("a b", &["abAB"]);
        let cov = build_cyclic_cover(torus.clone(), &[1, 0], 4).unwrap();
        assert_eq!(cov.total().num_faces(), 4);
        assert_eq!(deck_orbit_representatives(&cov), vec![0]);
        assert_eq!(deck_orbit(&cov, 2), vec![0, 1, 2, 3]);

        let id = build_cyclic_cover(torus, &[1, 0], 1).unwrap();
        assert_eq!(deck_orbit_representatives(&id), vec![0]);

        let g2 = complex("a b c d", &["abABcdCD"]);
        let cov = build_abelian_p_cover(g2.clone(), &indicators(f2, &g2), f2).unwrap();
        assert_eq!(cov.total().num_faces(), 16);
        assert_eq!(deck_orbit_representatives(&cov).len(), 1);
    }

    #[test]
    fn lifted_paths_project_back() {
        let f3 = p(3);
        let k = complex("a b", &["abAB"]);
        let cov = build_abelian_p_cover(k.clone(), &indicators(f3, &k), f3).unwrap();
        let path = k.faces()[0].clone();
        for start in cov.fiber(0).to_vec() {
            let lifted = cov.lift_path(&path, start).unwrap();
            let end = cov.total().path_end(&lifted).unwrap();
            assert_eq!(end, start, "face boundaries lift to loops");
            for (s, t) in path.steps.iter().zip(&lifted.steps) {
                assert_eq!(cov.edge_projection(t.edge), s.edge);
                assert_eq!(s.forward, t.forward);
            }
        }
    }
}
