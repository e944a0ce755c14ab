//! Acceptance suite: one line per criterion, nonzero exit if any fails.

use std::cell::RefCell;
use std::process::Command;
use std::sync::Arc;
use std::time::{Duration, Instant};

use descent_core::complex::{build_presentation_complex, h1_cocycle_basis, homology_dim_p, Step};
use descent_core::covers::{build_abelian_p_cover, build_cyclic_cover};
use descent_core::linalg::{subspace_support, support_sum_oracle, FpSubspace, PrimeModulus};
use descent_core::reduce::{
    best_hyperplane, hyperplane_subspace, reduce_to_dimension, BoundFactor, HyperplaneSearch,
};
use descent_core::tau::{cheeger_relsize_check, CheegerMode};
use descent_core::tower::{
    cover_rank_upper_bound, cyclic_growth_report, run_descent_pipeline, SeriesKind, SeriesSpec,
    Verdict,
};
use descent_core::wedge::{class_rank, commutator, wedge_cochain, wedge_cocycle_family};
use descent_core::{Cochain, CoveringMap, EdgePath, GroupPresentation, TwoComplex};
use num_rational::Ratio;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;

fn p(q: u64) -> PrimeModulus {
    PrimeModulus::new(q).unwrap()
}

fn complex(gens: &str, rels: &[&str]) -> Arc<TwoComplex> {
    Arc::new(build_presentation_complex(&GroupPresentation::parse(gens, rels).unwrap()))
}

/// Every normal p-cover built by the suite, checked against the rank bound
/// `d_p(cover) <= (d_p(base) - 1) degree + 1`.
#[derive(Default)]
struct RankLedger {
    checked: usize,
    violations: Vec<String>,
}

thread_local! {
    static LEDGER: RefCell<RankLedger> = RefCell::new(RankLedger::default());
}

fn record_cover(cov: &CoveringMap, q: PrimeModulus, what: &str) {
    let d = homology_dim_p(cov.base(), q);
    let dt = homology_dim_p(cov.total(), q);
    let bound = cover_rank_upper_bound(d, cov.degree() as u64);
    LEDGER.with(|l| {
        let mut l = l.borrow_mut();
        l.checked += 1;
        if dt as i128 > bound {
            l.violations.push(format!("{what}: d_p = {dt} > {bound}"));
        }
    });
}

fn abelian_cover(k: &Arc<TwoComplex>, classes: &[Cochain], q: PrimeModulus, what: &str) -> CoveringMap {
    let cov = build_abelian_p_cover(k.clone(), classes, q).unwrap();
    record_cover(&cov, q, what);
    cov
}

fn random_subspace(rng: &mut ChaCha8Rng, q: u64, dim: usize, ambient: usize) -> FpSubspace {
    let rows: Vec<Vec<u32>> = (0..dim)
        .map(|_| (0..ambient).map(|_| rng.gen_range(0..q as u32)).collect())
        .collect();
    FpSubspace::from_generators(p(q), ambient, rows).unwrap()
}

fn normalized_functionals(q: u32, v: usize) -> Vec<Vec<u32>> {
    let mut out = Vec::new();
    for lead in 0..v {
        let tail = v - lead - 1;
        for code in 0..q.pow(tail as u32) {
            let mut f = vec![0u32; v];
            f[lead] = 1;
            let mut c = code;
            for j in (lead + 1..v).rev() {
                f[j] = c % q;
                c /= q;
            }
            out.push(f);
        }
    }
    out
}

fn free_group_ranks() -> Outcome {
    let mut cases = Vec::new();
    for n in [2usize, 3] {
        for q in [2u64, 3] {
            let gens: Vec<String> = "xyz".chars().take(n).map(String::from).collect();
            let k = complex(&gens.join(" "), &[]);
            let h1 = h1_cocycle_basis(&k, p(q));
            let cov = abelian_cover(&k, &h1, p(q), "free derived level");
            let degree = (q as usize).pow(n as u32);
            let d = homology_dim_p(cov.total(), p(q));
            if cov.degree() != degree || d != degree * (n - 1) + 1 {
                return Err(format!("n={n} p={q}: degree {} d_p {d}", cov.degree()));
            }
            cases.push(format!("({degree},{d})"));
        }
    }
    Ok(format!("(degree, d_p) = {}", cases.join(" ")))
}

fn support_oracle() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    for trial in 0..500 {
        let q = [2u64, 3, 5][trial % 3];
        let ambient = rng.gen_range(1..=10);
        let dim = rng.gen_range(1..=4);
        let w = random_subspace(&mut rng, q, dim, ambient);
        let oracle = support_sum_oracle(&w).unwrap();
        let direct = subspace_support(&w).len() as u64;
        if oracle != Ratio::from(direct) {
            return Err(format!("trial {trial}: oracle {oracle} vs support {direct}"));
        }
    }
    Ok("500 subspaces".into())
}

fn averaging_identity() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut seen = 0;
    while seen < 200 {
        let q = [2u64, 3, 5][rng.gen_range(0..3)];
        let ambient = rng.gen_range(2..=10);
        let dim = rng.gen_range(2..=ambient.min(6));
        let v = random_subspace(&mut rng, q, dim, ambient);
        let vd = v.dim();
        if vd < 2 || (q as u128).pow(vd as u32) > 1 << 12 {
            continue;
        }
        seen += 1;
        let total: u64 = normalized_functionals(q as u32, vd)
            .iter()
            .map(|f| hyperplane_subspace(&v, f).support().len() as u64)
            .sum();
        let qv = q.pow(vd as u32);
        let supp = v.support().len() as u64;
        if total * (q - 1) != (qv - q) * supp {
            return Err(format!("p={q} v={vd}: sum {total}, supp {supp}"));
        }
        let best = best_hyperplane(&v, HyperplaneSearch::default()).unwrap();
        if !BoundFactor::hyperplane(v.modulus(), vd).allows(best.support as u64, supp) {
            return Err(format!("best hyperplane misses its bound: {} of {supp}", best.support));
        }
    }
    Ok("200 subspaces".into())
}

fn reduction_bound() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut seen = 0;
    while seen < 200 {
        let q = [2u64, 3, 5][rng.gen_range(0..3)];
        let ambient = rng.gen_range(2..=12);
        let dim = rng.gen_range(2..=6usize.min(ambient));
        let v = random_subspace(&mut rng, q, dim, ambient);
        if v.dim() < 2 {
            continue;
        }
        seen += 1;
        let w = rng.gen_range(1..v.dim());
        let r = reduce_to_dimension(&v, w, HyperplaneSearch::default()).unwrap();
        let bound = BoundFactor::subspace(v.modulus(), v.dim(), w);
        if r.subspace.dim() != w
            || !r.subspace.is_subspace_of(&v)
            || !bound.allows(r.achieved_support as u64, r.input_support as u64)
            || !r.exact
        {
            return Err(format!(
                "p={q} v={} w={w}: {} of {}",
                v.dim(),
                r.achieved_support,
                r.input_support
            ));
        }
    }
    Ok("200 reductions".into())
}

fn commutator_identity() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut summary = Vec::new();
    for (gens, q) in [("x y", 2u64), ("x y z", 2), ("x y", 3)] {
        let pm = p(q);
        let k = complex(gens, &[]);
        let h1 = h1_cocycle_basis(&k, pm);
        let cov = abelian_cover(&k, &h1, pm, "commutator cover");
        let combo = |rng: &mut ChaCha8Rng| {
            h1.iter().fold(Cochain::zero(pm, k.num_edges()), |acc, c| {
                acc.add(&c.scale(rng.gen_range(0..q as u32)))
            })
        };
        let word = |rng: &mut ChaCha8Rng| EdgePath {
            start: 0,
            steps: (0..rng.gen_range(0..8))
                .map(|_| Step {
                    edge: rng.gen_range(0..k.num_edges()),
                    forward: rng.gen(),
                })
                .collect(),
        };
        for _ in 0..100 {
            let (c1, c2) = (combo(&mut rng), combo(&mut rng));
            let (g, h) = (word(&mut rng), word(&mut rng));
            let w = wedge_cochain(&cov, &c1, &c2).unwrap();
            let lifted = cov.lift_path(&commutator(&k, &g, &h), cov.total().basepoint()).unwrap();
            let lhs = cov.total().evaluate(&w, &lifted).unwrap();
            let ev = |c: &Cochain, path: &EdgePath| k.evaluate(c, path).unwrap();
            let rhs = pm.sub(pm.mul(ev(&c1, &h), ev(&c2, &g)), pm.mul(ev(&c1, &g), ev(&c2, &h)));
            if lhs != rhs {
                return Err(format!("degree {}: {lhs} != {rhs} on g={g}, h={h}", cov.degree()));
            }
        }
        summary.push(cov.degree().to_string());
    }
    Ok(format!("100 pairs on degrees {}", summary.join(", ")))
}

fn wedge_family_contract() -> Outcome {
    let q = p(2);
    let k = complex("a b c d", &["abABcdCD"]);
    let h1 = h1_cocycle_basis(&k, q);
    let cov = abelian_cover(&k, &h1, q, "genus-2 derived cover");
    let mut sizes = Vec::new();
    for u in [1usize, 2] {
        let fam = wedge_cocycle_family(&cov, &h1[..u]).unwrap();
        let bound = fam.size_bound(k.num_faces());
        let below: Vec<usize> = (0..k.num_edges())
            .filter(|&e| h1[..u].iter().any(|c| c.get(e) != 0))
            .collect();
        let total = cov.total();
        let cocycles = fam.cocycle_basis.iter().all(|c| total.is_cocycle(c));
        let independent = class_rank(total, q, &fam.cocycle_basis) == fam.len();
        let contained = fam.cocycle_basis.iter().all(|c| {
            c.support()
                .iter()
                .all(|&e| below.contains(&cov.edge_projection(e)))
        });
        if (fam.len() as i64) < bound || !cocycles || !independent || !contained {
            return Err(format!(
                "u={u}: size {} bound {bound} cocycles {cocycles} independent {independent} contained {contained}",
                fam.len()
            ));
        }
        sizes.push(format!("u={u}: {} >= {bound}", fam.len()));
    }
    Ok(sizes.join(", "))
}

fn descent_decay() -> Outcome {
    let pres = GroupPresentation::parse("a b c d", &["abABcdCD"]).unwrap();
    let spec = SeriesSpec {
        kind: SeriesKind::CustomRank(2),
        depth: 5,
        p: p(2),
        cell_budget: 1_000_000,
    };
    let report = run_descent_pipeline(&pres, &spec, 2, HyperplaneSearch::default())
        .map_err(|e| e.to_string())?;
    let factor = Ratio::new(6u64, 7);
    let mut ratios = Vec::new();
    for rec in report.records.iter().skip(1) {
        let ratio: Ratio<u64> = rec
            .decay_ratio
            .as_deref()
            .ok_or("missing ratio")?
            .parse()
            .map_err(|_| "bad ratio")?;
        if ratio >= Ratio::from(1) || ratio > factor || rec.rank_growth_ok != Some(true) {
            return Err(format!("level {}: ratio {ratio}", rec.level));
        }
        ratios.push(ratio.to_string());
    }
    if report.records.len() < 2 || report.verdict != Verdict::DecayCertified {
        return Err(format!(
            "{} levels, verdict {}",
            report.records.len(),
            report.verdict.as_str()
        ));
    }
    LEDGER.with(|l| l.borrow_mut().checked += report.records.len() - 1);
    let last = report.records.last().unwrap();
    Ok(format!(
        "{} levels, ratios {}, final relsize {}",
        report.records.len(),
        ratios.join(" "),
        last.relsize_upper.as_deref().unwrap_or("-")
    ))
}

fn cheeger_relsize() -> Outcome {
    let bases: [(&str, &[&str]); 5] = [
        ("x y", &[]),
        ("x y z", &[]),
        ("a b", &["abAB"]),
        ("a b", &["abAb"]),
        ("a b c d", &["abABcdCD"]),
    ];
    let mut pairs = 0;
    let mut tight = false;
    for (gens, rels) in bases {
        let k = complex(gens, rels);
        for q in [2u64, 3] {
            let pm = p(q);
            let h1 = h1_cocycle_basis(&k, pm);
            for mask in 1u32..1 << h1.len() {
                let classes: Vec<Cochain> = (0..h1.len())
                    .filter(|i| mask >> i & 1 == 1)
                    .map(|i| h1[i].clone())
                    .collect();
                let degree = (q as usize).pow(classes.len() as u32);
                if degree * k.num_vertices() > 16 {
                    continue;
                }
                let cov = abelian_cover(&k, &classes, pm, "small cover");
                let n = classes.len() as u32;
                for code in 1..q.pow(n) {
                    let mut c = code;
                    let alpha = classes.iter().fold(Cochain::zero(pm, k.num_edges()), |acc, cl| {
                        let x = (c % q) as u32;
                        c /= q;
                        acc.add(&cl.scale(x))
                    });
                    let r = cheeger_relsize_check(&cov, &alpha, CheegerMode::Exact)
                        .map_err(|e| e.to_string())?;
                    if !r.cheeger.exact || !r.holds || !r.fibers_balanced || !r.cut_ok {
                        return Err(format!(
                            "{gens} / {rels:?} p={q} mask={mask}: h {} rhs {} fibers {:?}",
                            r.cheeger.value, r.rhs, r.fiber_counts
                        ));
                    }
                    pairs += 1;
                    if gens == "x y" && q == 2 && mask == 1 && code == 1 {
                        tight = r.equality && r.rhs == Ratio::from(2);
                    }
                }
            }
        }
    }
    if !tight {
        return Err("two-sheeted cover of the wedge of two circles is not tight".into());
    }
    Ok(format!("{pairs} (cover, class) pairs, two-sheeted wedge tight at 2"))
}

fn cyclic_diagnostic() -> Outcome {
    let f2 = GroupPresentation::parse("a b", &[]).unwrap();
    let r = cyclic_growth_report(&f2, &[1, 0], p(2), 8).map_err(|e| e.to_string())?;
    let exact = r.points.iter().all(|pt| pt.d_p as u64 == pt.i + 1);
    if !exact || r.slope != "1" || !r.positive_limit_signal {
        return Err(format!("free group: slope {} points {:?}", r.slope, r.points));
    }
    let torus = GroupPresentation::parse("a b", &["abAB"]).unwrap();
    let t = cyclic_growth_report(&torus, &[1, 0], p(2), 8).map_err(|e| e.to_string())?;
    if t.points.iter().any(|pt| pt.d_p != 2) || t.positive_limit_signal {
        return Err(format!("torus: {:?}", t.points));
    }
    // cyclic covers of 2-power order are normal 2-covers too
    for (gens, rels) in [("a b", &[][..]), ("a b", &["abAB"][..])] {
        let k = complex(gens, rels);
        for order in [2u64, 4, 8] {
            let cov = build_cyclic_cover(k.clone(), &[1, 0], order).unwrap();
            record_cover(&cov, p(2), "cyclic 2-cover");
        }
    }
    let (checked, violations) = LEDGER.with(|l| {
        let l = l.borrow();
        (l.checked, l.violations.clone())
    });
    if !violations.is_empty() {
        return Err(violations.join("; "));
    }
    Ok(format!(
        "d_2(K_i) = i + 1 for i <= 8, slope 1; torus constant 2; rank bound on {checked} covers"
    ))
}

fn determinism() -> Outcome {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let input = dir.path().join("genus2.txt");
    std::fs::write(&input, "# genus 2\np = 2\ngens = a b c d\nrel = abABcdCD\n")
        .map_err(|e| e.to_string())?;
    let runs: [&[&str]; 3] = [
        &["descend", "--series", "rank:2", "--u", "2", "--depth", "3", "--mode", "heuristic", "--seed", "11"],
        &["cheeger", "--depth", "2", "--mode", "heuristic", "--seed", "5"],
        &["cover", "--depth", "2"],
    ];
    for args in runs {
        let mut outputs = Vec::new();
        for round in 0..2 {
            let out = dir.path().join(format!("{}-{round}.json", args[0]));
            let status = Command::new(env!("CARGO_BIN_EXE_descent"))
                .args(args)
                .arg(&input)
                .arg("--out")
                .arg(&out)
                .status()
                .map_err(|e| e.to_string())?;
            if !status.success() {
                return Err(format!("{} exited with {status}", args[0]));
            }
            outputs.push(std::fs::read(&out).map_err(|e| e.to_string())?);
        }
        if outputs[0] != outputs[1] {
            return Err(format!("{} output differs between runs", args[0]));
        }
    }
    Ok("descend, cheeger, cover byte-identical across runs".into())
}

struct Criterion {
    id: u32,
    name: &'static str,
    limit: Duration,
    run: fn() -> Outcome,
}

fn main() {
    let criteria = [
        Criterion { id: 1, name: "free-group derived ranks", limit: Duration::from_secs(1), run: free_group_ranks },
        Criterion { id: 2, name: "support oracle", limit: Duration::from_secs(10), run: support_oracle },
        Criterion { id: 3, name: "hyperplane averaging", limit: Duration::from_secs(30), run: averaging_identity },
        Criterion { id: 4, name: "chain reduction bound", limit: Duration::from_secs(30), run: reduction_bound },
        Criterion { id: 5, name: "commutator identity", limit: Duration::from_secs(10), run: commutator_identity },
        Criterion { id: 6, name: "wedge family contract", limit: Duration::from_secs(30), run: wedge_family_contract },
        Criterion { id: 7, name: "relative support decay", limit: Duration::from_secs(300), run: descent_decay },
        Criterion { id: 8, name: "Cheeger vs relative size", limit: Duration::from_secs(30), run: cheeger_relsize },
        Criterion { id: 9, name: "cyclic growth and rank bound", limit: Duration::from_secs(5), run: cyclic_diagnostic },
        Criterion { id: 10, name: "CLI determinism", limit: Duration::from_secs(60), run: determinism },
    ];
    let mut failed = 0;
    for c in &criteria {
        let start = Instant::now();
        let outcome = (c.run)();
        let elapsed = start.elapsed();
        let (ok, detail) = match outcome {
            Ok(d) if elapsed <= c.limit => (true, d),
            Ok(d) => (false, format!("{d}; over time limit {:?}", c.limit)),
            Err(e) => (false, e),
        };
        if !ok {
            failed += 1;
        }
        println!(
            "criterion {:>2} {:<30} {} ({:.2?}) {}",
            c.id,
            c.name,
            if ok { "PASS" } else { "FAIL" },
            elapsed,
            detail
        );
    }
    println!("acceptance: {} of {} passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
