//! Dense linear algebra over the prime field F_p.
//!
//! Residues are stored canonically in `[0, p)` as `u32`; products are taken
//! in `u64`, which is exact for every admissible modulus (`p <= 2^16`).
//! Elimination always picks the first nonzero entry of the leftmost
//! remaining column, scanning rows top-down, so every echelon form and
//! kernel basis produced here is a deterministic function of the input.

use std::fmt;

use num_rational::Ratio;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest number of subspace elements [`support_sum_oracle`] will visit.
pub const ENUMERATION_CAP: u128 = 1 << 20;

/// A prime `p` with `2 <= p <= 2^16`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "u64", into = "u32")]
pub struct PrimeModulus(u32);

impl PrimeModulus {
    pub fn new(p: u64) -> Result<Self> {
        if !(2..=1 << 16).contains(&p) {
            return Err(Error::NotPrime(p));
        }
        let mut d = 2;
        while d * d <= p {
            if p.is_multiple_of(d) {
                return Err(Error::NotPrime(p));
            }
            d += 1;
        }
        Ok(PrimeModulus(p as u32))
    }

    #[inline]
    pub fn get(self) -> u32 {
        self.0
    }

    #[inline]
    pub fn add(self, a: u32, b: u32) -> u32 {
        let s = a + b;
        if s >= self.0 {
            s - self.0
        } else {
            s
        }
    }

    #[inline]
    pub fn sub(self, a: u32, b: u32) -> u32 {
        if a >= b {
            a - b
        } else {
            a + self.0 - b
        }
    }

    #[inline]
    pub fn neg(self, a: u32) -> u32 {
        if a == 0 {
            0
        } else {
            self.0 - a
        }
    }

    #[inline]
    pub fn mul(self, a: u32, b: u32) -> u32 {
        ((a as u64 * b as u64) % self.0 as u64) as u32
    }

    pub fn pow(self, mut base: u32, mut exp: u64) -> u32 {
        let mut acc = 1 % self.0;
        while exp > 0 {
            if exp & 1 == 1 {
                acc = self.mul(acc, base);
            }
            base = self.mul(base, base);
            exp >>= 1;
        }
        acc
    }

    /// Multiplicative inverse. Panics on zero.
    pub fn inv(self, a: u32) -> u32 {
        assert!(!a.is_multiple_of(self.0), "zero has no inverse mod {}", self.0);
        self.pow(a, self.0 as u64 - 2)
    }

    #[inline]
    pub fn reduce(self, a: i64) -> u32 {
        a.rem_euclid(self.0 as i64) as u32
    }

    /// `p^k` as an exact integer, `None` on overflow.
    pub fn checked_power(self, k: u32) -> Option<u128> {
        (self.0 as u128).checked_pow(k)
    }
}

impl TryFrom<u64> for PrimeModulus {
    type Error = Error;
    fn try_from(p: u64) -> Result<Self> {
        PrimeModulus::new(p)
    }
}

impl From<PrimeModulus> for u32 {
    fn from(p: PrimeModulus) -> u32 {
        p.0
    }
}

impl fmt::Display for PrimeModulus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// A vector of residues indexed by a finite ground set.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
pub struct FpVector(pub Vec<u32>);

impl FpVector {
    pub fn zeros(len: usize) -> Self {
        FpVector(vec![0; len])
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[u32] {
        &self.0
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|&x| x == 0)
    }

    pub fn support(&self) -> Vec<usize> {
        support(&self.0)
    }

    pub fn weight(&self) -> usize {
        weight(&self.0)
    }
}

impl From<Vec<u32>> for FpVector {
    fn from(v: Vec<u32>) -> Self {
        FpVector(v)
    }
}

/// Indices of the nonzero coordinates.
pub fn support(v: &[u32]) -> Vec<usize> {
    v.iter()
        .enumerate()
        .filter(|(_, &x)| x != 0)
        .map(|(i, _)| i)
        .collect()
}

/// Number of nonzero coordinates.
pub fn weight(v: &[u32]) -> usize {
    v.iter().filter(|&&x| x != 0).count()
}

/// `acc += factor * row` over F_p.
#[inline]
pub fn axpy(p: PrimeModulus, acc: &mut [u32], factor: u32, row: &[u32]) {
    if factor == 0 {
        return;
    }
    let m = p.get() as u64;
    let f = factor as u64;
    for (a, &r) in acc.iter_mut().zip(row) {
        if r != 0 {
            *a = ((*a as u64 + f * r as u64) % m) as u32;
        }
    }
}

/// Row-major dense matrix over F_p.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct FpMatrix {
    nrows: usize,
    ncols: usize,
    data: Vec<u32>,
}

impl FpMatrix {
    pub fn zeros(nrows: usize, ncols: usize) -> Self {
        FpMatrix {
            nrows,
            ncols,
            data: vec![0; nrows * ncols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = FpMatrix::zeros(n, n);
        for i in 0..n {
            m.set(i, i, 1);
        }
        m
    }

    /// Builds a matrix from rows of equal length `ncols`, reducing entries mod `p`.
    pub fn from_rows<I, R>(p: PrimeModulus, ncols: usize, rows: I) -> Result<Self>
    where
        I: IntoIterator<Item = R>,
        R: AsRef<[u32]>,
    {
        let mut data = Vec::new();
        let mut nrows = 0;
        for row in rows {
            let row = row.as_ref();
            if row.len() != ncols {
                return Err(Error::LengthMismatch {
                    expected: ncols,
                    found: row.len(),
                });
            }
            data.extend(row.iter().map(|&x| x % p.get()));
            nrows += 1;
        }
        Ok(FpMatrix { nrows, ncols, data })
    }

    pub fn nrows(&self) -> usize {
        self.nrows
    }

    pub fn ncols(&self) -> usize {
        self.ncols
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> u32 {
        self.data[i * self.ncols + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, x: u32) {
        self.data[i * self.ncols + j] = x;
    }

    pub fn row(&self, i: usize) -> &[u32] {
        &self.data[i * self.ncols..(i + 1) * self.ncols]
    }

    pub fn row_mut(&mut self, i: usize) -> &mut [u32] {
        &mut self.data[i * self.ncols..(i + 1) * self.ncols]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[u32]> + '_ {
        (0..self.nrows).map(move |i| self.row(i))
    }

    pub fn column(&self, j: usize) -> Vec<u32> {
        (0..self.nrows).map(|i| self.get(i, j)).collect()
    }

    pub fn transpose(&self) -> FpMatrix {
        let mut t = FpMatrix::zeros(self.ncols, self.nrows);
        for i in 0..self.nrows {
            for j in 0..self.ncols {
                t.set(j, i, self.get(i, j));
            }
        }
        t
    }

    /// `self * x`.
    pub fn mul_vec(&self, p: PrimeModulus, x: &[u32]) -> Vec<u32> {
        assert_eq!(x.len(), self.ncols);
        self.rows()
            .map(|row| {
                row.iter()
                    .zip(x)
                    .fold(0u32, |acc, (&a, &b)| p.add(acc, p.mul(a, b)))
            })
            .collect()
    }

    /// `x^T * self`, i.e. the linear combination of rows with coefficients `x`.
    pub fn combine_rows(&self, p: PrimeModulus, x: &[u32]) -> Vec<u32> {
        assert_eq!(x.len(), self.nrows);
        let mut acc = vec![0; self.ncols];
        for (i, &c) in x.iter().enumerate() {
            axpy(p, &mut acc, c, self.row(i));
        }
        acc
    }

    fn swap_rows(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        let n = self.ncols;
        let (lo, hi) = if a < b { (a, b) } else { (b, a) };
        let (head, tail) = self.data.split_at_mut(hi * n);
        head[lo * n..(lo + 1) * n].swap_with_slice(&mut tail[..n]);
    }

    /// Reduces `self` to reduced row-echelon form in place and returns the
    /// pivot columns. Zero rows end up at the bottom.
    pub fn rref_in_place(&mut self, p: PrimeModulus) -> Vec<usize> {
        let mut pivots = Vec::new();
        let mut lead = 0;
        let n = self.ncols;
        let mut pivot_row = vec![0u32; n];
        let mut nz: Vec<usize> = Vec::with_capacity(n);
        for col in 0..n {
            if lead == self.nrows {
                break;
            }
            let Some(found) = (lead..self.nrows).find(|&i| self.get(i, col) != 0) else {
                continue;
            };
            self.swap_rows(lead, found);
            let inv = p.inv(self.get(lead, col));
            {
                let row = self.row_mut(lead);
                for x in row[col..].iter_mut() {
                    if *x != 0 {
                        *x = p.mul(*x, inv);
                    }
                }
            }
            pivot_row.copy_from_slice(self.row(lead));
            nz.clear();
            nz.extend((col..n).filter(|&j| pivot_row[j] != 0));
            let m = p.get() as u64;
            for i in 0..self.nrows {
                if i == lead {
                    continue;
                }
                let f = self.get(i, col);
                if f == 0 {
                    continue;
                }
                let neg = m - f as u64;
                let row = self.row_mut(i);
                for &j in &nz {
                    row[j] = ((row[j] as u64 + neg * pivot_row[j] as u64) % m) as u32;
                }
            }
            pivots.push(col);
            lead += 1;
        }
        pivots
    }

    /// Drops all rows after the first `k`.
    pub fn truncate_rows(&mut self, k: usize) {
        if k < self.nrows {
            self.nrows = k;
            self.data.truncate(k * self.ncols);
        }
    }

    pub fn rank(&self, p: PrimeModulus) -> usize {
        rref_rank(self, p).1
    }
}

/// Reduced row-echelon form of `m` and its rank.
pub fn rref_rank(m: &FpMatrix, p: PrimeModulus) -> (FpMatrix, usize) {
    let mut e = m.clone();
    let pivots = e.rref_in_place(p);
    (e, pivots.len())
}

/// The null space `{x : m x = 0}`.
pub fn kernel_basis(m: &FpMatrix, p: PrimeModulus) -> FpSubspace {
    let (e, rank) = rref_rank(m, p);
    let pivots: Vec<usize> = (0..rank)
        .map(|i| (0..e.ncols()).find(|&j| e.get(i, j) != 0).unwrap())
        .collect();
    let mut is_pivot = vec![false; m.ncols()];
    for &c in &pivots {
        is_pivot[c] = true;
    }
    let mut rows = Vec::new();
    for free in (0..m.ncols()).filter(|&j| !is_pivot[j]) {
        let mut x = vec![0u32; m.ncols()];
        x[free] = 1;
        for (i, &pc) in pivots.iter().enumerate() {
            x[pc] = p.neg(e.get(i, free));
        }
        rows.push(x);
    }
    FpSubspace::from_generators(p, m.ncols(), rows).expect("kernel vectors have ambient length")
}

/// Some `x` with `a x = b`, or `None` if the system is inconsistent.
pub fn solve(a: &FpMatrix, b: &[u32], p: PrimeModulus) -> Option<Vec<u32>> {
    assert_eq!(b.len(), a.nrows());
    let n = a.ncols();
    let mut aug = FpMatrix::zeros(a.nrows(), n + 1);
    for i in 0..a.nrows() {
        aug.row_mut(i)[..n].copy_from_slice(a.row(i));
        aug.set(i, n, b[i] % p.get());
    }
    let pivots = aug.rref_in_place(p);
    if pivots.last() == Some(&n) {
        return None;
    }
    let mut x = vec![0u32; n];
    for (i, &c) in pivots.iter().enumerate() {
        x[c] = aug.get(i, n);
    }
    Some(x)
}

/// A subspace of F_p^E held as a reduced row-echelon basis.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct FpSubspace {
    p: PrimeModulus,
    basis: FpMatrix,
    pivots: Vec<usize>,
}

impl FpSubspace {
    pub fn zero(p: PrimeModulus, ambient_dim: usize) -> Self {
        FpSubspace {
            p,
            basis: FpMatrix::zeros(0, ambient_dim),
            pivots: Vec::new(),
        }
    }

    pub fn full(p: PrimeModulus, ambient_dim: usize) -> Self {
        FpSubspace {
            p,
            basis: FpMatrix::identity(ambient_dim),
            pivots: (0..ambient_dim).collect(),
        }
    }

    /// The span of `rows`.
    pub fn from_generators<I, R>(p: PrimeModulus, ambient_dim: usize, rows: I) -> Result<Self>
    where
        I: IntoIterator<Item = R>,
        R: AsRef<[u32]>,
    {
        let mut m = FpMatrix::from_rows(p, ambient_dim, rows)?;
        let pivots = m.rref_in_place(p);
        m.truncate_rows(pivots.len());
        Ok(FpSubspace {
            p,
            basis: m,
            pivots,
        })
    }

    pub fn modulus(&self) -> PrimeModulus {
        self.p
    }

    pub fn dim(&self) -> usize {
        self.basis.nrows()
    }

    pub fn ambient_dim(&self) -> usize {
        self.basis.ncols()
    }

    /// Echelon basis, one row per dimension.
    pub fn basis(&self) -> &FpMatrix {
        &self.basis
    }

    pub fn pivots(&self) -> &[usize] {
        &self.pivots
    }

    /// Coordinates of `v` in the echelon basis, if `v` lies in the subspace.
    pub fn coordinates(&self, v: &[u32]) -> Option<Vec<u32>> {
        if v.len() != self.ambient_dim() {
            return None;
        }
        let coords: Vec<u32> = self.pivots.iter().map(|&c| v[c] % self.p.get()).collect();
        let back = self.basis.combine_rows(self.p, &coords);
        (back.iter().zip(v).all(|(&a, &b)| a == b % self.p.get())).then_some(coords)
    }

    pub fn contains(&self, v: &[u32]) -> bool {
        self.coordinates(v).is_some()
    }

    pub fn is_subspace_of(&self, other: &FpSubspace) -> bool {
        self.basis.rows().all(|r| other.contains(r))
    }

    /// The element with the given coordinates.
    pub fn element(&self, coords: &[u32]) -> Vec<u32> {
        self.basis.combine_rows(self.p, coords)
    }

    pub fn sum(&self, other: &FpSubspace) -> FpSubspace {
        FpSubspace::from_generators(
            self.p,
            self.ambient_dim(),
            self.basis.rows().chain(other.basis.rows()),
        )
        .expect("equal ambient dimension")
    }

    pub fn intersection(&self, other: &FpSubspace) -> FpSubspace {
        assert_eq!(self.ambient_dim(), other.ambient_dim());
        let (a, b) = (self.dim(), other.dim());
        if a == 0 || b == 0 {
            return FpSubspace::zero(self.p, self.ambient_dim());
        }
        // (x, y) with x.A + y.B = 0 gives x.A in both.
        let stacked = FpMatrix::from_rows(
            self.p,
            self.ambient_dim(),
            self.basis.rows().chain(other.basis.rows()),
        )
        .expect("equal ambient dimension");
        let relations = kernel_basis(&stacked.transpose(), self.p);
        let gens: Vec<Vec<u32>> = relations
            .basis()
            .rows()
            .map(|rel| self.basis.combine_rows(self.p, &rel[..a]))
            .collect();
        FpSubspace::from_generators(self.p, self.ambient_dim(), gens).expect("ambient length")
    }

    /// Number of elements, `None` if it does not fit in `u128`.
    pub fn cardinality(&self) -> Option<u128> {
        self.p.checked_power(self.dim() as u32)
    }

    /// Calls `f` on every element, in odometer order of the coordinates.
    /// Refuses if there are more than `cap` elements.
    pub fn for_each_element(&self, cap: u128, mut f: impl FnMut(&[u32])) -> Result<()> {
        let count = self.cardinality().unwrap_or(u128::MAX);
        if count > cap {
            return Err(Error::EnumerationRefused { count, cap });
        }
        let d = self.dim();
        let mut coords = vec![0u32; d];
        let mut v = vec![0u32; self.ambient_dim()];
        loop {
            f(&v);
            // increment coords, updating v incrementally
            let mut k = 0;
            loop {
                if k == d {
                    return Ok(());
                }
                axpy(self.p, &mut v, 1, self.basis.row(k));
                coords[k] += 1;
                if coords[k] < self.p.get() {
                    break;
                }
                coords[k] = 0;
                k += 1;
            }
        }
    }

    /// `supp(W)`: union of the supports of all elements, read off the basis.
    pub fn support(&self) -> Vec<usize> {
        subspace_support(self)
    }
}

/// Union of the supports of the echelon basis rows.
pub fn subspace_support(w: &FpSubspace) -> Vec<usize> {
    (0..w.ambient_dim())
        .filter(|&j| (0..w.dim()).any(|i| w.basis.get(i, j) != 0))
        .collect()
}

/// `sum_{phi in W} |supp(phi)| / ((p - 1) p^(dim W - 1))`, computed by full
/// enumeration of `W`. Equals `|supp(W)|` for nonzero `W`; the zero subspace
/// yields 0.
pub fn support_sum_oracle(w: &FpSubspace) -> Result<Ratio<u64>> {
    if w.dim() == 0 {
        return Ok(Ratio::from_integer(0));
    }
    let mut total: u64 = 0;
    w.for_each_element(ENUMERATION_CAP, |phi| total += weight(phi) as u64)?;
    let p = w.modulus().get() as u64;
    let denom = (p - 1) * p.pow(w.dim() as u32 - 1);
    Ok(Ratio::new(total, denom))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn p(n: u64) -> PrimeModulus {
        PrimeModulus::new(n).unwrap()
    }

    fn mat(pm: PrimeModulus, rows: &[&[u32]]) -> FpMatrix {
        FpMatrix::from_rows(pm, rows[0].len(), rows.iter().copied()).unwrap()
    }

    #[test]
    fn primality() {
        for q in [2, 3, 5, 7, 65521] {
            assert!(PrimeModulus::new(q).is_ok());
        }
        for q in [0, 1, 4, 9, 65536, 65537 * 2, 1 << 17] {
            assert!(PrimeModulus::new(q).is_err(), "{q}");
        }
    }

    #[test]
    fn field_ops() {
        let f = p(7);
        for a in 1..7 {
            assert_eq!(f.mul(a, f.inv(a)), 1);
            assert_eq!(f.add(a, f.neg(a)), 0);
        }
        assert_eq!(f.reduce(-1), 6);
        assert_eq!(f.sub(2, 5), 4);
    }

    #[test]
    fn rank_identity_and_equal_rows() {
        let f2 = p(2);
        assert_eq!(rref_rank(&FpMatrix::identity(3), f2).1, 3);
        assert_eq!(rref_rank(&mat(f2, &[&[1, 1], &[1, 1]]), f2).1, 1);
    }

    #[test]
    fn kernel_examples() {
        let f2 = p(2);
        assert_eq!(kernel_basis(&FpMatrix::zeros(2, 3), f2).dim(), 3);
        let k = kernel_basis(&mat(f2, &[&[1, 1, 0], &[0, 1, 1]]), f2);
        assert_eq!(k.dim(), 1);
        assert_eq!(k.basis().row(0), &[1, 1, 1]);
        let f5 = p(5);
        let inv = mat(f5, &[&[1, 2, 0], &[0, 1, 3], &[4, 0, 2]]);
        assert_eq!(rref_rank(&inv, f5).1, 3);
        assert_eq!(kernel_basis(&inv, f5).dim(), 0);
    }

    #[test]
    fn support_examples() {
        let f2 = p(2);
        let w = FpSubspace::from_generators(f2, 3, [[1, 1, 0], [0, 1, 1]]).unwrap();
        assert_eq!(w.support(), vec![0, 1, 2]);
        assert!(FpSubspace::zero(f2, 4).support().is_empty());
        let line = FpSubspace::from_generators(p(3), 5, [[0, 2, 0, 1, 0]]).unwrap();
        assert_eq!(line.support(), vec![1, 3]);
    }

    #[test]
    fn oracle_examples() {
        let f3 = p(3);
        let line = FpSubspace::from_generators(f3, 5, [[0, 2, 0, 1, 1]]).unwrap();
        assert_eq!(support_sum_oracle(&line).unwrap(), Ratio::from_integer(3));
        let f2 = p(2);
        let disjoint =
            FpSubspace::from_generators(f2, 6, [[1, 1, 0, 0, 0, 0], [0, 0, 1, 1, 1, 0]]).unwrap();
        assert_eq!(support_sum_oracle(&disjoint).unwrap(), Ratio::from_integer(5));
        let big = FpSubspace::full(f2, 21);
        assert!(matches!(
            support_sum_oracle(&big),
            Err(Error::EnumerationRefused { .. })
        ));
    }

    #[test]
    fn solve_and_intersection() {
        let f3 = p(3);
        let a = mat(f3, &[&[1, 2, 0], &[0, 1, 1]]);
        let x = solve(&a, &[2, 1], f3).unwrap();
        assert_eq!(a.mul_vec(f3, &x), vec![2, 1]);
        let singular = mat(f3, &[&[1, 1], &[2, 2]]);
        assert!(solve(&singular, &[1, 0], f3).is_none());

        let u = FpSubspace::from_generators(f3, 3, [[1, 0, 0], [0, 1, 0]]).unwrap();
        let w = FpSubspace::from_generators(f3, 3, [[0, 1, 0], [0, 0, 1]]).unwrap();
        let i = u.intersection(&w);
        assert_eq!(i.dim(), 1);
        assert!(i.contains(&[0, 2, 0]));
        assert_eq!(u.sum(&w).dim(), 3);
    }

    fn arb_matrix() -> impl Strategy<Value = (u64, Vec<Vec<u32>>)> {
        (prop_oneof![Just(2u64), Just(3), Just(5), Just(7)], 1usize..6, 1usize..8).prop_flat_map(
            |(q, r, c)| {
                (
                    Just(q),
                    proptest::collection::vec(
                        proptest::collection::vec(0..q as u32, c..=c),
                        r..=r,
                    ),
                )
            },
        )
    }

    proptest! {
        #[test]
        fn rref_is_idempotent((q, rows) in arb_matrix()) {
            let f = p(q);
            let m = FpMatrix::from_rows(f, rows[0].len(), &rows).unwrap();
            let (e, r) = rref_rank(&m, f);
            let (e2, r2) = rref_rank(&e, f);
            prop_assert_eq!(&e, &e2);
            prop_assert_eq!(r, r2);
        }

        #[test]
        fn kernel_rank_nullity((q, rows) in arb_matrix()) {
            let f = p(q);
            let m = FpMatrix::from_rows(f, rows[0].len(), &rows).unwrap();
            let k = kernel_basis(&m, f);
            prop_assert_eq!(k.dim() + m.rank(f), m.ncols());
            for v in k.basis().rows() {
                prop_assert!(m.mul_vec(f, v).iter().all(|&x| x == 0));
            }
        }

        #[test]
        fn support_matches_enumeration((q, rows) in arb_matrix()) {
            let f = p(q);
            let w = FpSubspace::from_generators(f, rows[0].len(), &rows).unwrap();
            let mut hit = vec![false; w.ambient_dim()];
            w.for_each_element(ENUMERATION_CAP, |phi| {
                for j in support(phi) { hit[j] = true; }
            }).unwrap();
            let brute: Vec<usize> = (0..hit.len()).filter(|&j| hit[j]).collect();
            prop_assert_eq!(w.support(), brute.clone());
            if w.dim() > 0 {
                prop_assert_eq!(support_sum_oracle(&w).unwrap(), Ratio::from_integer(brute.len() as u64));
            }
        }
    }
}
