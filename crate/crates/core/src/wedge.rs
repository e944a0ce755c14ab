//! Wedge cochains on elementary abelian p-covers.
//!
//! For cocycles `c1`, `c2` on the base with `c2` trivial on the loops of the
//! cover, `c1 ^ c2` assigns to a lifted edge `e` the value
//! `c1(q(e)) * c2(i(e))`, where `c2(i(e))` is the c-value of the initial
//! vertex of `e`. Its value on the lift of a commutator `g h g^-1 h^-1` is
//! `c1(h) c2(g) - c1(g) c2(h)`, and its value on a face boundary is constant
//! along deck orbits, so cocycle conditions need one face per orbit.

use rayon::prelude::*;

use crate::complex::{evaluate_steps, Cochain, EdgePath, TwoComplex};
use crate::covers::{c_value_table, deck_orbit_representatives, CoveringMap};
use crate::error::{Error, Result};
use crate::linalg::{kernel_basis, solve, FpMatrix, FpSubspace, FpVector, PrimeModulus};

/// `c1 ^ c2` on the total complex of `cov`.
pub fn wedge_cochain(cov: &CoveringMap, c1: &Cochain, c2: &Cochain) -> Result<Cochain> {
    cov.base().check_cocycle(c1)?;
    cov.base().check_cocycle(c2)?;
    let c_values = c_value_table(cov, c2)?;
    Ok(wedge_from_values(cov, c1, &c_values))
}

fn wedge_from_values(cov: &CoveringMap, c1: &Cochain, c_values: &[u32]) -> Cochain {
    let p = c1.p;
    let total = cov.total();
    let values = total
        .edges()
        .iter()
        .enumerate()
        .map(|(e, edge)| p.mul(c1.get(cov.edge_projection(e)), c_values[edge.init]))
        .collect();
    Cochain {
        p,
        values: FpVector(values),
    }
}

/// Rank of the classes of `cochains` in `H^1(K; F_p)`.
pub fn class_rank(k: &TwoComplex, p: PrimeModulus, cochains: &[Cochain]) -> usize {
    let coords = FpMatrix::from_rows(
        p,
        k.non_tree_edges().len(),
        cochains.iter().map(|c| k.class_coordinates(c)),
    )
    .expect("class coordinates have one entry per non-tree edge");
    coords.rank(p)
}

/// Lower bound `(n - u) u - r` on the size of the cocycle family.
pub fn family_size_bound(n: usize, u: usize, r: usize) -> i64 {
    (n as i64 - u as i64) * u as i64 - r as i64
}

/// Cocycles on a cover built from wedges `u ^ c`, `u` in `U`, `c` in `C`.
#[derive(Debug, Clone)]
pub struct WedgeFamily {
    /// Base cocycles `U`.
    pub u: Vec<Cochain>,
    /// Base cocycles `C`: a basis of a complement of `span(U)` inside the
    /// span of the covering classes, taken from the covering classes.
    pub c: Vec<Cochain>,
    /// `u_i ^ c_j` at index `i * |C| + j`.
    pub span_basis: Vec<Cochain>,
    /// Echelon basis, in wedge-index coordinates, of the combinations that
    /// are cocycles.
    pub coefficients: FpSubspace,
    /// `Z^1(total) ∩ <U ^ C>`, one cochain per row of `coefficients`.
    pub cocycle_basis: Vec<Cochain>,
    /// One face per deck orbit, the faces the cocycle condition was solved on.
    pub orbit_faces: Vec<usize>,
    /// Rank of the cover's deck group.
    pub n: usize,
}

impl WedgeFamily {
    pub fn len(&self) -> usize {
        self.cocycle_basis.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cocycle_basis.is_empty()
    }

    /// `(n - u) u - r` for this family, `r` the number of base faces.
    pub fn size_bound(&self, base_faces: usize) -> i64 {
        family_size_bound(self.n, self.u.len(), base_faces)
    }

    /// Evaluation of every wedge `u_a ^ c_b` on lifts of the commutators
    /// `[l_j, l_i]` of loops dual to `U ∪ C`. Rows and columns are both in
    /// wedge-index order; the result is the identity exactly when the wedges
    /// are independent modulo coboundaries in the way the dual loops certify.
    pub fn commutator_certificate(&self, cov: &CoveringMap) -> Result<FpMatrix> {
        let base = cov.base();
        let p = self.u.first().map(|c| c.p).ok_or_else(|| {
            Error::Precondition("empty family has no certificate".into())
        })?;
        let classes: Vec<Cochain> = self.u.iter().chain(&self.c).cloned().collect();
        let loops = dual_loops(base, p, &classes)?;
        let (nu, nc) = (self.u.len(), self.c.len());
        let mut m = FpMatrix::zeros(nu * nc, nu * nc);
        let start = cov.total().basepoint();
        for i in 0..nu {
            for j in 0..nc {
                let comm = commutator(base, &loops[nu + j], &loops[i]);
                let lifted = cov.lift_path(&comm, start)?;
                for (row, w) in self.span_basis.iter().enumerate() {
                    m.set(row, i * nc + j, evaluate_steps(w, &lifted.steps));
                }
            }
        }
        Ok(m)
    }
}

/// Based loops `l_i` with `c_j(l_i) = [i == j]` for cocycles with
/// independent classes, built as products of fundamental loops.
pub fn dual_loops(k: &TwoComplex, p: PrimeModulus, classes: &[Cochain]) -> Result<Vec<EdgePath>> {
    let n_loops = k.non_tree_edges().len();
    let coords = FpMatrix::from_rows(p, n_loops, classes.iter().map(|c| k.class_coordinates(c)))?;
    let fundamental: Vec<EdgePath> = k
        .non_tree_edges()
        .iter()
        .map(|&e| k.fundamental_loop(e))
        .collect();
    let mut loops = Vec::with_capacity(classes.len());
    for i in 0..classes.len() {
        let mut target = vec![0u32; classes.len()];
        target[i] = 1;
        let exps = solve(&coords, &target, p).ok_or_else(|| {
            let relations = kernel_basis(&coords.transpose(), p);
            Error::DependentClasses {
                combination: relations.basis().row(0).to_vec(),
            }
        })?;
        let mut path = EdgePath::empty(k.basepoint());
        for (t, &x) in exps.iter().enumerate() {
            for _ in 0..x {
                path = path.concat(&fundamental[t]);
            }
        }
        loops.push(path);
    }
    Ok(loops)
}

/// `g h g^-1 h^-1` for loops based at the basepoint of `k`.
pub fn commutator(k: &TwoComplex, g: &EdgePath, h: &EdgePath) -> EdgePath {
    let b = k.basepoint();
    g.clone()
        .concat(h)
        .concat(&g.reversed(b))
        .concat(&h.reversed(b))
}

/// The family of cocycles on the total complex of `cov` obtained from the
/// base cocycles `u_cocycles`: span of all wedges `u ^ c` intersected with
/// the cocycles. Its classes are independent in `H^1(total)`, its support
/// lies over `supp(U)`, and it has at least `(n - u) u - r` members.
pub fn wedge_cocycle_family(cov: &CoveringMap, u_cocycles: &[Cochain]) -> Result<WedgeFamily> {
    let Some(cover_classes) = cov.classes() else {
        return Err(Error::UnsupportedCover);
    };
    let base = cov.base();
    let p = match cov.kind() {
        crate::covers::CoverKind::ElementaryAbelian { p, .. } => *p,
        crate::covers::CoverKind::Cyclic { .. } => unreachable!(),
    };
    for c in u_cocycles {
        if c.p != p {
            return Err(Error::ModulusMismatch(c.p.get(), p.get()));
        }
        base.check_cocycle(c)?;
    }
    let n_loops = base.non_tree_edges().len();
    let u_coords: Vec<Vec<u32>> = u_cocycles.iter().map(|c| base.class_coordinates(c)).collect();
    let v1 = FpSubspace::from_generators(p, n_loops, &u_coords)?;
    if v1.dim() < u_cocycles.len() {
        let m = FpMatrix::from_rows(p, n_loops, &u_coords)?;
        let relations = kernel_basis(&m.transpose(), p);
        return Err(Error::DependentClasses {
            combination: relations.basis().row(0).to_vec(),
        });
    }
    let cover_coords: Vec<Vec<u32>> =
        cover_classes.iter().map(|c| base.class_coordinates(c)).collect();
    let v2 = FpSubspace::from_generators(p, n_loops, &cover_coords)?;

    // greedy extension of an echelon basis of V1 ∩ V2 to V2
    let mut spanned = v1.intersection(&v2);
    let mut complement = Vec::new();
    for (c, coords) in cover_classes.iter().zip(&cover_coords) {
        if spanned.dim() == v2.dim() {
            break;
        }
        if !spanned.contains(coords) {
            spanned = spanned.sum(&FpSubspace::from_generators(p, n_loops, [coords])?);
            complement.push(c.clone());
        }
    }

    let c_values: Vec<Vec<u32>> = complement
        .iter()
        .map(|c| c_value_table(cov, c))
        .collect::<Result<_>>()?;
    let pairs: Vec<(usize, usize)> = (0..u_cocycles.len())
        .flat_map(|i| (0..complement.len()).map(move |j| (i, j)))
        .collect();
    let span_basis: Vec<Cochain> = pairs
        .par_iter()
        .map(|&(i, j)| wedge_from_values(cov, &u_cocycles[i], &c_values[j]))
        .collect();

    let total = cov.total();
    let orbit_faces = deck_orbit_representatives(cov);
    let m = span_basis.len();
    let mut constraints = FpMatrix::zeros(orbit_faces.len(), m);
    for (row, &f) in orbit_faces.iter().enumerate() {
        let steps = &total.faces()[f].steps;
        for (col, w) in span_basis.iter().enumerate() {
            constraints.set(row, col, evaluate_steps(w, steps));
        }
    }
    let coefficients = kernel_basis(&constraints, p);
    let cocycle_basis = coefficients
        .basis()
        .rows()
        .map(|x| combine(p, total.num_edges(), &span_basis, x))
        .collect();

    Ok(WedgeFamily {
        u: u_cocycles.to_vec(),
        c: complement,
        span_basis,
        coefficients,
        cocycle_basis,
        orbit_faces,
        n: cover_classes.len(),
    })
}

fn combine(p: PrimeModulus, len: usize, cochains: &[Cochain], coeffs: &[u32]) -> Cochain {
    let mut acc = vec![0u32; len];
    for (c, &x) in cochains.iter().zip(coeffs) {
        crate::linalg::axpy(p, &mut acc, x, c.as_slice());
    }
    Cochain {
        p,
        values: FpVector(acc),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::complex::{build_presentation_complex, h1_cocycle_basis, GroupPresentation};
    use crate::covers::build_abelian_p_cover;
    use std::sync::Arc;

    fn p(n: u64) -> PrimeModulus {
        PrimeModulus::new(n).unwrap()
    }

    fn complex(gens: &str, rels: &[&str]) -> Arc<TwoComplex> {
        Arc::new(build_presentation_complex(
            &GroupPresentation::parse(gens, rels).unwrap(),
        ))
    }

    fn word_loop(k: &TwoComplex, pres: &str, word: &str) -> EdgePath {
        let pres = GroupPresentation::parse(pres, &[]).unwrap();
        let w = pres.parse_word(word).unwrap();
        EdgePath {
            start: k.basepoint(),
            steps: w
                .iter()
                .map(|l| crate::complex::Step {
                    edge: l.generator,
                    forward: !l.inverse,
                })
                .collect(),
        }
    }

    #[test]
    fn figure_two_support() {
        let f2 = p(2);
        let k = complex("x y z", &[]);
        let classes = h1_cocycle_basis(&k, f2);
        let cov = build_abelian_p_cover(k.clone(), &classes, f2).unwrap();
        let w = wedge_cochain(&cov, &classes[0], &classes[1]).unwrap();
        let supp = w.support();
        assert_eq!(supp.len(), 4);
        let y_values = c_value_table(&cov, &classes[1]).unwrap();
        for &e in &supp {
            assert_eq!(cov.edge_projection(e), 0);
            assert_eq!(y_values[cov.total().edge(e).init], 1);
        }
        // lift of [x, y]
        let comm = word_loop(&k, "x y z", "xyXY");
        let lifted = cov.lift_path(&comm, cov.total().basepoint()).unwrap();
        assert_eq!(cov.total().evaluate(&w, &lifted).unwrap(), 1);
    }

    #[test]
    fn zero_c_values_give_zero_wedge() {
        let f2 = p(2);
        let k = complex("x y", &[]);
        let x = Cochain::indicator(f2, 2, 0);
        let y = Cochain::indicator(f2, 2, 1);
        // cover by y only; the x-lifts are loops at vertices with y-value 0 and 1
        let cov = build_abelian_p_cover(k, std::slice::from_ref(&y), f2).unwrap();
        let w = wedge_cochain(&cov, &y, &y).unwrap();
        // y-lifts start at both y-values, so only the one starting at 1 survives
        assert_eq!(w.support().len(), 1);
        let w = wedge_cochain(&cov, &x, &Cochain::zero(f2, 2)).unwrap();
        assert!(w.is_zero());
    }

    #[test]
    fn genus_two_family() {
        let f2 = p(2);
        let k = complex("a b c d", &["abABcdCD"]);
        let classes = h1_cocycle_basis(&k, f2);
        let cov = build_abelian_p_cover(k.clone(), &classes, f2).unwrap();
        let fam = wedge_cocycle_family(&cov, &classes[..1]).unwrap();
        assert_eq!(fam.c.len(), 3);
        assert!(fam.len() as i64 >= fam.size_bound(1));
        assert!(fam.len() >= 2);
        let total = cov.total();
        for c in &fam.cocycle_basis {
            assert!(total.is_cocycle(c));
        }
        assert_eq!(class_rank(total, f2, &fam.cocycle_basis), fam.len());
        let cert = fam.commutator_certificate(&cov).unwrap();
        assert_eq!(cert, FpMatrix::identity(3));
    }

    #[test]
    fn free_group_family_has_no_face_constraints() {
        let f2 = p(2);
        let k = complex("x y", &[]);
        let classes = h1_cocycle_basis(&k, f2);
        let cov = build_abelian_p_cover(k, &classes, f2).unwrap();
        let fam = wedge_cocycle_family(&cov, &classes[..1]).unwrap();
        assert_eq!(fam.len(), 1);
        for e in fam.cocycle_basis[0].support() {
            assert_eq!(cov.edge_projection(e), 0);
        }
    }

    #[test]
    fn empty_complement_gives_empty_family() {
        let f2 = p(2);
        let k = complex("x y", &[]);
        let classes = h1_cocycle_basis(&k, f2);
        let cov = build_abelian_p_cover(k, &classes, f2).unwrap();
        let fam = wedge_cocycle_family(&cov, &classes).unwrap();
        assert!(fam.c.is_empty());
        assert!(fam.is_empty());
        assert!(fam.size_bound(0) <= 0);
    }

    #[test]
    fn family_preconditions() {
        let f2 = p(2);
        let k = complex("x y", &[]);
        let classes = h1_cocycle_basis(&k, f2);
        let cov = build_abelian_p_cover(k.clone(), &classes, f2).unwrap();
        let dup = vec![classes[0].clone(), classes[0].clone()];
        assert!(matches!(
            wedge_cocycle_family(&cov, &dup),
            Err(Error::DependentClasses { .. })
        ));
        let cyc = crate::covers::build_cyclic_cover(k, &[1, 0], 2).unwrap();
        assert_eq!(
            wedge_cocycle_family(&cyc, &classes[..1]).unwrap_err(),
            Error::UnsupportedCover
        );
    }
}
