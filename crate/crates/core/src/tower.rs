//! Towers of elementary abelian p-covers and the support-descent pipeline.
//!
//! Starting from `u` independent classes `U_1` on the presentation complex,
//! each level builds the next cover of the series, forms the wedge cocycle
//! family of `U_i` on it, and shrinks the family's span back to dimension
//! `u` with the least support it can find. The ratio
//! `|supp(U_i)| / |E(K_i)|` then drops by a factor depending only on `u`
//! and `p` at every level.

use std::collections::HashSet;
use std::sync::Arc;

use num_rational::Ratio;
use serde::Serialize;

use crate::complex::{
    build_presentation_complex, h1_cocycle_basis, homology_dim_p, Cochain, GroupPresentation,
    TwoComplex,
};
use crate::covers::{build_abelian_p_cover, build_cyclic_cover, integer_class_coordinates};
use crate::error::{Error, Result};
use crate::linalg::{FpSubspace, FpVector, PrimeModulus};
use crate::reduce::{reduce_to_dimension, BoundFactor, HyperplaneSearch};
use crate::wedge::{class_rank, wedge_cocycle_family};

/// How the classes defining each cover of the series are chosen.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SeriesKind {
    /// All of `H^1(K_i; F_p)`: the derived p-series.
    DerivedP,
    /// The first `k` echelon classes of `H^1(K_i; F_p)`. Inside the descent
    /// pipeline, classes in the span of the current `U_i` are skipped.
    CustomRank(usize),
    /// Cochain values for each level, on the edges of that level's complex.
    Explicit(Vec<Vec<Vec<u32>>>),
}

impl SeriesKind {
    pub fn label(&self) -> String {
        match self {
            SeriesKind::DerivedP => "derived".into(),
            SeriesKind::CustomRank(k) => format!("rank:{k}"),
            SeriesKind::Explicit(levels) => format!("explicit:{}", levels.len()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SeriesSpec {
    pub kind: SeriesKind,
    /// Number of complexes `K_1, ..., K_depth` in the tower.
    pub depth: usize,
    pub p: PrimeModulus,
    /// Largest total cell count allowed for a cover.
    pub cell_budget: u64,
}

impl SeriesSpec {
    fn validate(&self) -> Result<()> {
        if self.depth == 0 {
            return Err(Error::Precondition("depth must be at least 1".into()));
        }
        Ok(())
    }
}

/// The classes defining the cover of `k` at `level` (1-based), or `None`
/// when an explicit series has no entry for it.
pub fn series_classes(
    k: &TwoComplex,
    spec: &SeriesSpec,
    level: usize,
    avoid: &[Cochain],
) -> Result<Option<Vec<Cochain>>> {
    let p = spec.p;
    match &spec.kind {
        SeriesKind::DerivedP => Ok(Some(h1_cocycle_basis(k, p))),
        SeriesKind::CustomRank(rank) => {
            let n_loops = k.non_tree_edges().len();
            let mut spanned = FpSubspace::from_generators(
                p,
                n_loops,
                avoid.iter().map(|c| k.class_coordinates(c)),
            )?;
            let mut chosen = Vec::with_capacity(*rank);
            for c in h1_cocycle_basis(k, p) {
                if chosen.len() == *rank {
                    break;
                }
                let coords = k.class_coordinates(&c);
                if !spanned.contains(&coords) {
                    spanned = spanned.sum(&FpSubspace::from_generators(p, n_loops, [coords])?);
                    chosen.push(c);
                }
            }
            if chosen.len() < *rank {
                return Err(Error::Precondition(format!(
                    "level {level} has only {} classes available, {rank} requested",
                    chosen.len()
                )));
            }
            Ok(Some(chosen))
        }
        SeriesKind::Explicit(levels) => {
            let Some(rows) = levels.get(level - 1) else {
                return Ok(None);
            };
            rows.iter()
                .map(|row| {
                    if row.len() != k.num_edges() {
                        return Err(Error::LengthMismatch {
                            expected: k.num_edges(),
                            found: row.len(),
                        });
                    }
                    Ok(Cochain::new(p, row.clone()))
                })
                .collect::<Result<Vec<_>>>()
                .map(Some)
        }
    }
}

/// `(d - 1) * degree + 1`, the largest possible `d_p` of a normal cover of
/// p-power degree `degree` of a complex with `d_p = d`.
pub fn cover_rank_upper_bound(d: usize, degree: u64) -> i128 {
    (d as i128 - 1) * degree as i128 + 1
}

fn power(p: PrimeModulus, n: usize) -> Option<u64> {
    p.checked_power(n as u32).and_then(|x| u64::try_from(x).ok())
}

/// One complex of a tower.
#[derive(Debug, Clone, Serialize)]
pub struct SeriesLevel {
    pub level: usize,
    pub index: u64,
    pub vertices: usize,
    pub edges: usize,
    pub faces: usize,
    pub euler_characteristic: i64,
    pub d_p: usize,
    /// Rank of the deck group of the next cover.
    pub quotient_rank: Option<usize>,
    /// `(d_p(K_{i-1}) - 1) [K_{i-1}:K_i] + 1`; absent at the first level.
    pub rank_upper_bound: Option<i128>,
}

#[derive(Debug, Clone)]
pub struct SeriesTower {
    pub levels: Vec<SeriesLevel>,
    pub complexes: Vec<Arc<TwoComplex>>,
    pub budget_exhausted: bool,
}

/// The complexes `K_1, ..., K_depth` of a series, stopping early when the
/// next cover would exceed the cell budget.
pub fn series_tower(pres: &GroupPresentation, spec: &SeriesSpec) -> Result<SeriesTower> {
    spec.validate()?;
    let p = spec.p;
    let mut k = Arc::new(build_presentation_complex(pres));
    let mut index = 1u64;
    let mut levels = Vec::new();
    let mut complexes = Vec::new();
    let mut previous_d: Option<(usize, u64)> = None;
    let mut budget_exhausted = false;
    for level in 1..=spec.depth {
        let d_p = homology_dim_p(&k, p);
        let classes = series_classes(&k, spec, level, &[])?;
        levels.push(SeriesLevel {
            level,
            index,
            vertices: k.num_vertices(),
            edges: k.num_edges(),
            faces: k.num_faces(),
            euler_characteristic: k.euler_characteristic(),
            d_p,
            quotient_rank: classes.as_ref().map(Vec::len),
            rank_upper_bound: previous_d.map(|(d, deg)| cover_rank_upper_bound(d, deg)),
        });
        complexes.push(k.clone());
        if level == spec.depth {
            break;
        }
        let Some(classes) = classes else { break };
        let degree = power(p, classes.len());
        let cells = degree.and_then(|deg| deg.checked_mul(k.num_cells() as u64));
        if cells.is_none_or(|c| c > spec.cell_budget) {
            budget_exhausted = true;
            break;
        }
        let degree = degree.expect("checked above");
        let cov = build_abelian_p_cover(k.clone(), &classes, p)?;
        previous_d = Some((d_p, degree));
        index *= degree;
        k = cov.total().clone();
    }
    Ok(SeriesTower {
        levels,
        complexes,
        budget_exhausted,
    })
}

/// Index and quotient rank of one level of a series.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LevelRank {
    pub index: u64,
    pub quotient_rank: usize,
}

/// `lambda = min (n_i - 2) / [G:G_i]` over the prefix and
/// `u = max(1, ceil(4 |R| / lambda))`.
pub fn choose_parameters(
    pres: &GroupPresentation,
    prefix: &[LevelRank],
) -> Result<(Ratio<i64>, usize)> {
    let lambda = prefix
        .iter()
        .map(|l| Ratio::new(l.quotient_rank as i64 - 2, l.index as i64))
        .min()
        .ok_or_else(|| Error::Precondition("parameter choice needs a nonempty prefix".into()))?;
    u_from_lambda(pres.relator_count(), lambda).map(|u| (lambda, u))
}

pub fn u_from_lambda(relators: usize, lambda: Ratio<i64>) -> Result<usize> {
    if lambda <= Ratio::from(0) {
        return Err(Error::NotRapidlyDescending {
            lambda: ratio_i64_string(&lambda),
        });
    }
    let u = (Ratio::from(4 * relators as i64) / lambda).ceil().to_integer();
    Ok(u.max(1) as usize)
}

fn ratio_i64_string(r: &Ratio<i64>) -> String {
    if r.is_integer() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

fn ratio_u64_string(num: u64, den: u64) -> String {
    let r = Ratio::new(num, den);
    crate::tau::format_ratio(&r)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    DecayCertified,
    BoundViolated,
    BudgetExhausted,
}

impl Verdict {
    pub fn as_str(self) -> &'static str {
        match self {
            Verdict::DecayCertified => "decay-certified",
            Verdict::BoundViolated => "bound-violated",
            Verdict::BudgetExhausted => "budget-exhausted",
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct TowerRecord {
    pub level: usize,
    /// `[G:G_i]`, the degree of `K_i` over `K_1`.
    pub index: u64,
    /// `n_i`, the rank of the deck group of `K_{i+1} -> K_i`.
    pub quotient_rank: Option<usize>,
    pub d_p: usize,
    /// `|supp(U_i)|`; absent when no `U_i` was formed at this level.
    pub supp: Option<usize>,
    pub edges: usize,
    /// `r_i`, the face count of `K_i`.
    pub faces: usize,
    /// `|supp(U_i)| / |E(K_i)|`.
    pub relsize_upper: Option<String>,
    /// `(p^v - p^(v-u)) / (p^v - 1)` for the reduction that produced `U_i`.
    pub bound_factor: Option<String>,
    pub reduction_exact: Option<bool>,
    /// `relsize_upper_i / relsize_upper_(i-1)`.
    pub decay_ratio: Option<String>,
    /// The ratio is below 1 and at most `(p^(u+1) - p) / (p^(u+1) - 1)`.
    pub decay_ok: Option<bool>,
    /// `U_i` vanishes off the preimage of `supp(U_(i-1))`.
    pub support_contained: Option<bool>,
    /// The classes of `U_i` are independent in `H^1(K_i)`.
    pub independent: Option<bool>,
    /// `d_p(K_i)` is at most `(d_p(K_(i-1)) - 1) p^(n_(i-1)) + 1`.
    pub rank_growth_ok: Option<bool>,
    /// Size of the wedge cocycle family of `U_i` on `K_(i+1)`.
    pub wedge_count: Option<usize>,
    /// `(n_i - u) u - r_i`.
    pub wedge_bound: Option<i64>,
    /// `lambda * index > 4u` and `(n_i - 2) / index > lambda / 2`.
    pub parameter_hypotheses: Option<bool>,
    /// `(n_i - u) u - r_i >= 2u`, reported when the hypotheses hold.
    pub parameter_conclusion: Option<bool>,
    #[serde(skip)]
    supp_edges: Option<(u64, u64)>,
}

impl TowerRecord {
    /// `relsize_upper` as a float.
    pub fn relsize_value(&self) -> Option<f64> {
        self.supp_edges.map(|(s, e)| s as f64 / e as f64)
    }

    pub fn level_rank(&self) -> Option<LevelRank> {
        self.quotient_rank.map(|n| LevelRank {
            index: self.index,
            quotient_rank: n,
        })
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct DescentReport {
    pub p: u32,
    pub u: usize,
    pub series: String,
    pub depth: usize,
    pub cell_budget: u64,
    /// `min (n_i - 2) / [G:G_i]` over recorded levels.
    pub lambda_estimate: Option<String>,
    /// `(p^(u+1) - p) / (p^(u+1) - 1)`.
    pub uniform_factor: String,
    pub records: Vec<TowerRecord>,
    pub verdict: Verdict,
    pub note: String,
}

/// Runs the descent pipeline for `depth` levels or until a stopping
/// condition.
pub fn run_descent_pipeline(
    pres: &GroupPresentation,
    spec: &SeriesSpec,
    u: usize,
    search: HyperplaneSearch,
) -> Result<DescentReport> {
    spec.validate()?;
    if u == 0 {
        return Err(Error::Precondition("u must be at least 1".into()));
    }
    let p = spec.p;
    let mut k = Arc::new(build_presentation_complex(pres));
    let h1 = h1_cocycle_basis(&k, p);
    if h1.len() < u {
        return Err(Error::Precondition(format!(
            "H^1 has dimension {} < u = {u}",
            h1.len()
        )));
    }
    let mut current_u: Vec<Cochain> = h1[..u].to_vec();
    let uniform = BoundFactor::uniform(p, u);
    let mut records: Vec<TowerRecord> = Vec::new();
    let mut index = 1u64;
    let mut carried = Carried::default();
    let mut verdict = None;

    for level in 1..=spec.depth {
        let d_p = homology_dim_p(&k, p);
        let classes = series_classes(&k, spec, level, &current_u)?;
        let supp = support_of(&current_u);
        let mut record = TowerRecord {
            level,
            index,
            quotient_rank: classes.as_ref().map(Vec::len),
            d_p,
            supp: Some(supp.len()),
            edges: k.num_edges(),
            faces: k.num_faces(),
            relsize_upper: Some(ratio_u64_string(supp.len() as u64, k.num_edges() as u64)),
            bound_factor: carried.bound_factor.take(),
            reduction_exact: carried.reduction_exact.take(),
            decay_ratio: None,
            decay_ok: None,
            support_contained: carried.support_contained.take(),
            independent: carried.independent.take(),
            rank_growth_ok: carried.previous_d.map(|(d, deg)| {
                d_p as i128 <= cover_rank_upper_bound(d, deg)
            }),
            wedge_count: None,
            wedge_bound: None,
            parameter_hypotheses: None,
            parameter_conclusion: None,
            supp_edges: Some((supp.len() as u64, k.num_edges() as u64)),
        };
        if let Some(prev) = records.last().and_then(|r| r.supp_edges) {
            let (s0, e0) = prev;
            let (s1, e1) = (supp.len() as u64, k.num_edges() as u64);
            record.decay_ratio = Some(ratio_u64_string(s1 * e0, s0 * e1));
            record.decay_ok = Some(s1 * e0 < s0 * e1 && uniform.allows(s1 * e0, s0 * e1));
        }
        if level == spec.depth {
            records.push(record);
            break;
        }
        let Some(classes) = classes else {
            records.push(record);
            return Err(Error::MalformedTower(format!(
                "explicit series has no classes for level {level}"
            )));
        };

        let degree = power(p, classes.len());
        let cells = degree.and_then(|deg| deg.checked_mul(k.num_cells() as u64));
        if cells.is_none_or(|c| c > spec.cell_budget) {
            records.push(record);
            verdict = Some(Verdict::BudgetExhausted);
            break;
        }
        let degree = degree.expect("checked above");
        let cov = build_abelian_p_cover(k.clone(), &classes, p)?;
        let family = wedge_cocycle_family(&cov, &current_u)?;
        record.wedge_count = Some(family.len());
        record.wedge_bound = Some(family.size_bound(k.num_faces()));
        records.push(record);

        let total = cov.total().clone();
        carried.previous_d = Some((d_p, degree));
        index *= degree;
        if family.len() <= u {
            records.push(TowerRecord {
                level: level + 1,
                index,
                quotient_rank: None,
                d_p: homology_dim_p(&total, p),
                supp: None,
                edges: total.num_edges(),
                faces: total.num_faces(),
                relsize_upper: None,
                bound_factor: None,
                reduction_exact: None,
                decay_ratio: None,
                decay_ok: None,
                support_contained: None,
                independent: None,
                rank_growth_ok: carried.previous_d.map(|(d, deg)| {
                    homology_dim_p(&total, p) as i128 <= cover_rank_upper_bound(d, deg)
                }),
                wedge_count: None,
                wedge_bound: None,
                parameter_hypotheses: None,
                parameter_conclusion: None,
                supp_edges: None,
            });
            verdict = Some(Verdict::BoundViolated);
            break;
        }

        let span = FpSubspace::from_generators(
            p,
            total.num_edges(),
            family.cocycle_basis.iter().map(|c| c.as_slice()),
        )?;
        let reduction = reduce_to_dimension(&span, u, search)?;
        let next_u: Vec<Cochain> = reduction
            .subspace
            .basis()
            .rows()
            .map(|row| Cochain {
                p,
                values: FpVector(row.to_vec()),
            })
            .collect();
        let below: HashSet<usize> = supp.iter().copied().collect();
        carried.support_contained = Some(
            support_of(&next_u)
                .iter()
                .all(|&e| below.contains(&cov.edge_projection(e))),
        );
        carried.independent = Some(
            next_u.iter().all(|c| total.is_cocycle(c)) && class_rank(&total, p, &next_u) == u,
        );
        carried.bound_factor = Some(reduction.chain_bound.to_string());
        carried.reduction_exact = Some(reduction.exact && reduction.bound_certified);
        current_u = next_u;
        k = total;
    }

    let lambda = records
        .iter()
        .filter_map(TowerRecord::level_rank)
        .map(|l| Ratio::new(l.quotient_rank as i64 - 2, l.index as i64))
        .min();
    if let Some(lambda) = lambda {
        let r0 = pres.relator_count() as i64;
        for rec in &mut records {
            let Some(n) = rec.quotient_rank else { continue };
            let index = Ratio::from(rec.index as i64);
            let hyp = lambda * index > Ratio::from(4 * u as i64)
                && Ratio::new(n as i64 - 2, rec.index as i64) > lambda / 2;
            rec.parameter_hypotheses = Some(hyp);
            if hyp {
                let r = r0 * rec.index as i64;
                let bound = (n as i64 - u as i64) * u as i64 - r;
                rec.parameter_conclusion = Some(bound >= 2 * u as i64);
            }
        }
    }

    let verdict = verdict.unwrap_or_else(|| {
        let certified = records.iter().skip(1).all(|r| {
            r.decay_ok == Some(true)
                && r.reduction_exact == Some(true)
                && r.support_contained == Some(true)
                && r.independent == Some(true)
        });
        if certified {
            Verdict::DecayCertified
        } else {
            Verdict::BoundViolated
        }
    });
    let note = match verdict {
        Verdict::DecayCertified => format!(
            "relative support of U_i fell by at least {} per level; small relative \
             support bounds the Cheeger constants of the covers from above. \
             No largeness claim is made.",
            uniform
        ),
        Verdict::BoundViolated => {
            "a wedge family had at most u members or a decay check failed".into()
        }
        Verdict::BudgetExhausted => "the next cover exceeds the cell budget".into(),
    };
    Ok(DescentReport {
        p: p.get(),
        u,
        series: spec.kind.label(),
        depth: spec.depth,
        cell_budget: spec.cell_budget,
        lambda_estimate: lambda.map(|l| ratio_i64_string(&l)),
        uniform_factor: uniform.to_string(),
        records,
        verdict,
        note,
    })
}

#[derive(Default)]
struct Carried {
    bound_factor: Option<String>,
    reduction_exact: Option<bool>,
    support_contained: Option<bool>,
    independent: Option<bool>,
    previous_d: Option<(usize, u64)>,
}

fn support_of(cochains: &[Cochain]) -> Vec<usize> {
    let len = cochains.first().map_or(0, Cochain::len);
    (0..len)
        .filter(|&e| cochains.iter().any(|c| c.get(e) != 0))
        .collect()
}

/// Finite-prefix view of the conditions on an abelian series under which a
/// group is large. Consistency flags never prove anything.
#[derive(Debug, Clone, Serialize)]
pub struct CriteriaReport {
    pub p: u32,
    pub indices: Vec<u64>,
    pub quotient_ranks: Vec<usize>,
    /// `log [G_i : G_(i+1)] / [G:G_i] = n_i log p / [G:G_i]`.
    pub log_index_ratios: Vec<f64>,
    /// `n_i / [G:G_i]`.
    pub rank_ratios: Vec<String>,
    /// Running infimum of `rank_ratios`, the rapid-descent statistic.
    pub running_infimum: Vec<String>,
    /// Quotients are abelian: true for every series built here.
    pub abelian_quotients: bool,
    /// The last log ratio is the largest so far.
    pub log_ratio_growing: bool,
    /// Every rank ratio is positive.
    pub rank_ratio_positive: bool,
    pub note: String,
}

pub fn largeness_criteria_report(records: &[LevelRank], p: PrimeModulus) -> Result<CriteriaReport> {
    if records.is_empty() {
        return Err(Error::MalformedTower("no levels".into()));
    }
    if let Some(w) = records.windows(2).find(|w| w[1].index <= w[0].index) {
        return Err(Error::MalformedTower(format!(
            "indices must increase strictly, got {} then {}",
            w[0].index, w[1].index
        )));
    }
    let logp = (p.get() as f64).ln();
    let log_index_ratios: Vec<f64> = records
        .iter()
        .map(|r| r.quotient_rank as f64 * logp / r.index as f64)
        .collect();
    let ratios: Vec<Ratio<u64>> = records
        .iter()
        .map(|r| Ratio::new(r.quotient_rank as u64, r.index))
        .collect();
    let mut running = Vec::with_capacity(ratios.len());
    let mut inf: Option<Ratio<u64>> = None;
    for r in &ratios {
        let m = inf.map_or(*r, |i| i.min(*r));
        inf = Some(m);
        running.push(crate::tau::format_ratio(&m));
    }
    let last = *log_index_ratios.last().expect("nonempty");
    Ok(CriteriaReport {
        p: p.get(),
        indices: records.iter().map(|r| r.index).collect(),
        quotient_ranks: records.iter().map(|r| r.quotient_rank).collect(),
        log_ratio_growing: log_index_ratios.iter().all(|&x| x <= last),
        log_index_ratios,
        rank_ratio_positive: ratios.iter().all(|r| *r.numer() > 0),
        rank_ratios: ratios.iter().map(crate::tau::format_ratio).collect(),
        running_infimum: running,
        abelian_quotients: true,
        note: "finite-prefix diagnostic: consistency with a limit condition is not a proof".into(),
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct CyclicPoint {
    pub i: u64,
    pub d_p: usize,
    pub ratio: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct CyclicGrowthReport {
    pub p: u32,
    pub points: Vec<CyclicPoint>,
    /// `(d(max) - d(ceil(max/2))) / (max - ceil(max/2))`, the growth rate
    /// of `d_p(K_i)` over the second half of the prefix.
    pub slope: String,
    /// The slope is positive, as it is when `d_p(K_i) / i` has a positive
    /// limit.
    pub positive_limit_signal: bool,
    pub note: String,
}

/// `d_p` of the cyclic covers `K_i` for the homomorphism to Z given by
/// `weights`, for `i = 1..=max_i`.
pub fn cyclic_growth_report(
    pres: &GroupPresentation,
    weights: &[i64],
    p: PrimeModulus,
    max_i: u64,
) -> Result<CyclicGrowthReport> {
    let k = Arc::new(build_presentation_complex(pres));
    if weights.len() != k.num_edges() {
        return Err(Error::LengthMismatch {
            expected: k.num_edges(),
            found: weights.len(),
        });
    }
    if integer_class_coordinates(&k, weights).iter().all(|&x| x == 0) {
        return Err(Error::ZeroHomomorphism);
    }
    if max_i == 0 {
        return Err(Error::Precondition("max_i must be at least 1".into()));
    }
    let points: Vec<CyclicPoint> = (1..=max_i)
        .map(|i| {
            let cov = build_cyclic_cover(k.clone(), weights, i)?;
            let d = homology_dim_p(cov.total(), p);
            Ok(CyclicPoint {
                i,
                d_p: d,
                ratio: ratio_u64_string(d as u64, i),
            })
        })
        .collect::<Result<_>>()?;
    let hi = max_i;
    let lo = hi.div_ceil(2);
    let d_of = |i: u64| points[(i - 1) as usize].d_p as i64;
    let slope = if hi > lo {
        Ratio::new(d_of(hi) - d_of(lo), (hi - lo) as i64)
    } else {
        Ratio::from(0)
    };
    Ok(CyclicGrowthReport {
        p: p.get(),
        points,
        slope: ratio_i64_string(&slope),
        positive_limit_signal: slope > Ratio::from(0),
        note: "finite-prefix diagnostic: d_p(K_i)/i has a positive limit exactly when d_p(K_i) is unbounded".into(),
    })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct QuasiAdditiveLimit {
    /// `max (f(i) - k) / i`; the limit is at least this.
    pub lower: String,
    /// `min (f(i) + k) / i`; the limit is at most this.
    pub upper: String,
    /// Midpoint of the bracket.
    pub estimate: String,
    /// Every sampled `|f(i)| <= 2k`.
    pub bounded: bool,
    #[serde(skip)]
    pub bracket: (Ratio<i64>, Ratio<i64>),
}

/// Brackets `lim f(i)/i` for a sequence with
/// `|f(i+j) - f(i) - f(j)| <= k`, using that `f + k` is subadditive and
/// `f - k` superadditive.
pub fn quasi_additive_limit(values: &[(u64, i64)], k: u64) -> Result<QuasiAdditiveLimit> {
    if values.is_empty() {
        return Err(Error::Precondition("no values".into()));
    }
    if values.iter().any(|&(i, _)| i == 0) {
        return Err(Error::Precondition("indices start at 1".into()));
    }
    let table: std::collections::BTreeMap<u64, i64> = values.iter().copied().collect();
    let k = k as i64;
    for (&i, &fi) in &table {
        for (&j, &fj) in table.range(i..) {
            if let Some(&sum) = table.get(&(i + j)) {
                let gap = sum - fi - fj;
                if gap.abs() > k {
                    return Err(Error::NotQuasiAdditive {
                        k: k as u64,
                        i,
                        j,
                        sum,
                        gap,
                    });
                }
            }
        }
    }
    let lower = table
        .iter()
        .map(|(&i, &f)| Ratio::new(f - k, i as i64))
        .max()
        .expect("nonempty");
    let upper = table
        .iter()
        .map(|(&i, &f)| Ratio::new(f + k, i as i64))
        .min()
        .expect("nonempty");
    let estimate = (lower + upper) / 2;
    Ok(QuasiAdditiveLimit {
        lower: ratio_i64_string(&lower),
        upper: ratio_i64_string(&upper),
        estimate: ratio_i64_string(&estimate),
        bounded: table.values().all(|f| f.abs() <= 2 * k),
        bracket: (lower, upper),
    })
}
