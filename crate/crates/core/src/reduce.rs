//! Support reduction for subspaces of F_p^E.
//!
//! A `v`-dimensional subspace `V` has a hyperplane `W` with
//! `|supp(W)| <= (p^v - p)/(p^v - 1) |supp(V)|`, because the average of
//! `|supp(W)|` over all hyperplanes is exactly that. Iterating down to
//! dimension `w` gives the factor `(p^v - p^(v-w))/(p^v - 1)`, which is at
//! most `(p^(w+1) - p)/(p^(w+1) - 1)`; for `w = 1` this is the Plotkin bound
//! on the minimum weight of a linear code.
//!
//! Hyperplanes of `V` are kernels of nonzero functionals on the echelon
//! coordinates of `V`, one per projective class, normalized so the first
//! nonzero coefficient is 1. A coordinate `e` drops out of the support of
//! `ker(f)` exactly when the column of the basis at `e` is a nonzero
//! multiple of `f`, so the best hyperplane is the one whose functional is
//! the most frequent projective class among the basis columns.

use std::collections::BTreeMap;
use std::fmt;

use num_bigint::BigUint;
use num_traits::{One, ToPrimitive};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::linalg::{FpSubspace, PrimeModulus};

/// Default cap on the number of hyperplanes visited by explicit enumeration.
pub const HYPERPLANE_CAP: u128 = 1 << 20;

/// Default number of functionals drawn in sampled mode.
pub const DEFAULT_SAMPLES: usize = 4096;

/// An exact rational factor `num / den`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BoundFactor {
    num: BigUint,
    den: BigUint,
}

fn big_pow(p: PrimeModulus, k: usize) -> BigUint {
    num_traits::pow(BigUint::from(p.get()), k)
}

impl BoundFactor {
    /// `(p^v - p^(v-w)) / (p^v - 1)` for `0 <= w <= v`, `v >= 1`.
    pub fn subspace(p: PrimeModulus, v: usize, w: usize) -> Self {
        assert!(v >= 1 && w <= v);
        let pv = big_pow(p, v);
        BoundFactor {
            num: &pv - big_pow(p, v - w),
            den: pv - BigUint::one(),
        }
    }

    /// `(p^v - p) / (p^v - 1)`.
    pub fn hyperplane(p: PrimeModulus, v: usize) -> Self {
        BoundFactor::subspace(p, v, v - 1)
    }

    /// `(p^(w+1) - p) / (p^(w+1) - 1)`, independent of the starting dimension.
    pub fn uniform(p: PrimeModulus, w: usize) -> Self {
        BoundFactor::subspace(p, w + 1, w)
    }

    /// `achieved <= self * reference`.
    pub fn allows(&self, achieved: u64, reference: u64) -> bool {
        BigUint::from(achieved) * &self.den <= &self.num * BigUint::from(reference)
    }

    /// `self <= other`.
    pub fn le(&self, other: &BoundFactor) -> bool {
        &self.num * &other.den <= &other.num * &self.den
    }

    pub fn numerator(&self) -> &BigUint {
        &self.num
    }

    pub fn denominator(&self) -> &BigUint {
        &self.den
    }

    pub fn to_f64(&self) -> f64 {
        let bits = self.num.bits().max(self.den.bits());
        let shift = bits.saturating_sub(960);
        let n = (&self.num >> shift).to_f64().unwrap_or(f64::NAN);
        let d = (&self.den >> shift).to_f64().unwrap_or(f64::NAN);
        n / d
    }
}

impl fmt::Display for BoundFactor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.num, self.den)
    }
}

/// How hyperplanes are searched.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum HyperplaneSearch {
    /// Exact: group basis columns by projective class and drop the most
    /// frequent one.
    #[default]
    ColumnClasses,
    /// Exact: visit every hyperplane in lexicographic order of its
    /// functional and compute its support from an echelon basis. Falls back
    /// to sampling beyond `cap` hyperplanes.
    Enumerate { cap: u128, samples: usize, seed: u64 },
    /// Best of `samples` uniformly random functionals.
    Sampled { samples: usize, seed: u64 },
}

impl HyperplaneSearch {
    pub fn enumerate() -> Self {
        HyperplaneSearch::Enumerate {
            cap: HYPERPLANE_CAP,
            samples: DEFAULT_SAMPLES,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone)]
pub struct HyperplaneChoice {
    pub subspace: FpSubspace,
    /// Normalized functional in the echelon coordinates of the input.
    pub functional: Vec<u32>,
    pub support: usize,
    pub input_support: usize,
    /// Every hyperplane was considered.
    pub exact: bool,
    /// `support <= (p^v - p)/(p^v - 1) * input_support` holds.
    pub bound_certified: bool,
}

/// Number of hyperplanes of a `v`-dimensional space, `(p^v - 1)/(p - 1)`.
pub fn hyperplane_count(p: PrimeModulus, v: usize) -> Option<u128> {
    let pv = p.checked_power(v as u32)?;
    Some((pv - 1) / (p.get() as u128 - 1))
}

/// The hyperplane `ker(f)` of `v`, for a normalized functional `f`.
pub fn hyperplane_subspace(v: &FpSubspace, functional: &[u32]) -> FpSubspace {
    let p = v.modulus();
    let lead = functional
        .iter()
        .position(|&x| x != 0)
        .expect("functional is nonzero");
    let inv = p.inv(functional[lead]);
    let basis = v.basis();
    let gens: Vec<Vec<u32>> = (0..v.dim())
        .filter(|&j| j != lead)
        .map(|j| {
            // e_j - (f_j / f_lead) e_lead
            let mut row = basis.row(j).to_vec();
            let factor = p.neg(p.mul(functional[j], inv));
            crate::linalg::axpy(p, &mut row, factor, basis.row(lead));
            row
        })
        .collect();
    FpSubspace::from_generators(p, v.ambient_dim(), gens).expect("ambient length")
}

fn normalize(p: PrimeModulus, f: &mut [u32]) -> bool {
    let Some(lead) = f.iter().position(|&x| x != 0) else {
        return false;
    };
    let inv = p.inv(f[lead]);
    for x in f.iter_mut() {
        *x = p.mul(*x, inv);
    }
    true
}

/// Projective classes of the nonzero columns of the basis, with counts.
fn column_classes(v: &FpSubspace) -> BTreeMap<Vec<u32>, usize> {
    let p = v.modulus();
    let basis = v.basis();
    let mut counts = BTreeMap::new();
    for e in 0..v.ambient_dim() {
        let mut col = basis.column(e);
        if normalize(p, &mut col) {
            *counts.entry(col).or_insert(0) += 1;
        }
    }
    counts
}

/// `index`-th normalized functional of length `v` in lexicographic order.
fn functional_at(p: PrimeModulus, v: usize, mut index: u128) -> Vec<u32> {
    let q = p.get() as u128;
    let mut f = vec![0u32; v];
    for lead in (0..v).rev() {
        let block = q.pow((v - 1 - lead) as u32);
        if index < block {
            f[lead] = 1;
            for j in (lead + 1..v).rev() {
                f[j] = (index % q) as u32;
                index /= q;
            }
            return f;
        }
        index -= block;
    }
    unreachable!("index beyond the number of hyperplanes")
}

/// A codimension-one subspace of `v` of small support; exact modes return
/// the smallest support, ties broken by the lexicographically first
/// functional.
pub fn best_hyperplane(v: &FpSubspace, search: HyperplaneSearch) -> Result<HyperplaneChoice> {
    let dim = v.dim();
    if dim < 2 {
        return Err(Error::Dimension(format!(
            "need dimension at least 2 for a hyperplane search, got {dim}"
        )));
    }
    let p = v.modulus();
    let input_support = v.support().len();
    let bound = BoundFactor::hyperplane(p, dim);

    let (functional, support, exact) = match search {
        HyperplaneSearch::ColumnClasses => {
            let counts = column_classes(v);
            let (f, count) = counts
                .iter()
                .fold(None::<(&Vec<u32>, usize)>, |best, (f, &c)| match best {
                    Some((_, bc)) if bc >= c => best,
                    _ => Some((f, c)),
                })
                .expect("nonzero subspace has a nonzero column");
            (f.clone(), input_support - count, true)
        }
        HyperplaneSearch::Enumerate { cap, samples, seed } => {
            match hyperplane_count(p, dim).filter(|&n| n <= cap) {
                Some(n) => {
                    let (support, index) = (0..n)
                        .into_par_iter()
                        .map(|i| {
                            let f = functional_at(p, dim, i);
                            (hyperplane_subspace(v, &f).support().len(), i)
                        })
                        .min()
                        .expect("at least one hyperplane");
                    (functional_at(p, dim, index), support, true)
                }
                None => sample(v, samples, seed, input_support),
            }
        }
        HyperplaneSearch::Sampled { samples, seed } => sample(v, samples, seed, input_support),
    };
    let subspace = hyperplane_subspace(v, &functional);
    debug_assert_eq!(subspace.support().len(), support);
    Ok(HyperplaneChoice {
        subspace,
        functional,
        support,
        input_support,
        exact,
        bound_certified: bound.allows(support as u64, input_support as u64),
    })
}

fn sample(v: &FpSubspace, samples: usize, seed: u64, input_support: usize) -> (Vec<u32>, usize, bool) {
    let p = v.modulus();
    let counts = column_classes(v);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut best: Option<(usize, Vec<u32>)> = None;
    let mut drawn = 0;
    while drawn < samples.max(1) {
        let mut f: Vec<u32> = (0..v.dim()).map(|_| rng.gen_range(0..p.get())).collect();
        if !normalize(p, &mut f) {
            continue;
        }
        drawn += 1;
        let support = input_support - counts.get(&f).copied().unwrap_or(0);
        if best.as_ref().is_none_or(|(s, bf)| (support, &f) < (*s, bf)) {
            best = Some((support, f));
        }
    }
    let (support, f) = best.expect("at least one sample");
    (f, support, false)
}

#[derive(Debug, Clone)]
pub struct Reduction {
    pub subspace: FpSubspace,
    pub input_dim: usize,
    pub input_support: usize,
    pub achieved_support: usize,
    /// Support after each hyperplane step.
    pub step_supports: Vec<usize>,
    /// `(p^v - p^(v-w))/(p^v - 1)`.
    pub chain_bound: BoundFactor,
    /// `(p^(w+1) - p)/(p^(w+1) - 1)`.
    pub uniform_bound: BoundFactor,
    /// Every step searched all hyperplanes.
    pub exact: bool,
    /// `achieved_support <= chain_bound * input_support`.
    pub bound_certified: bool,
}

/// A `w`-dimensional subspace of `v` reached by `dim(v) - w` best-hyperplane
/// steps.
pub fn reduce_to_dimension(v: &FpSubspace, w: usize, search: HyperplaneSearch) -> Result<Reduction> {
    let dim = v.dim();
    if w < 1 || w >= dim {
        return Err(Error::Dimension(format!(
            "target dimension {w} must satisfy 1 <= w < {dim}"
        )));
    }
    let p = v.modulus();
    let input_support = v.support().len();
    let mut current = v.clone();
    let mut step_supports = Vec::with_capacity(dim - w);
    let mut exact = true;
    while current.dim() > w {
        let choice = best_hyperplane(&current, search)?;
        exact &= choice.exact;
        step_supports.push(choice.support);
        current = choice.subspace;
    }
    let achieved_support = current.support().len();
    let chain_bound = BoundFactor::subspace(p, dim, w);
    let bound_certified = chain_bound.allows(achieved_support as u64, input_support as u64);
    Ok(Reduction {
        subspace: current,
        input_dim: dim,
        input_support,
        achieved_support,
        step_supports,
        chain_bound,
        uniform_bound: BoundFactor::uniform(p, w),
        exact,
        bound_certified,
    })
}
