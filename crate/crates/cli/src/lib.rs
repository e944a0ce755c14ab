//! Driver behind the `descent` binary: reads inputs, runs one library
//! operation and renders its report as JSON or as a fixed-column table.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use descent_core::complex::format_presentation_file;
use descent_core::covers::build_abelian_p_cover;
use descent_core::reduce::{reduce_to_dimension, HyperplaneSearch, DEFAULT_SAMPLES};
use descent_core::tau::{
    cheeger_constant, cheeger_relsize_check, relative_size, CheegerMode, CheegerRelsizeReport,
    CheegerValue, RelsizeMode, SkeletonGraph,
};
use descent_core::tower::{
    choose_parameters, cyclic_growth_report, largeness_criteria_report, run_descent_pipeline,
    series_classes, series_tower, CriteriaReport, CyclicGrowthReport, DescentReport, LevelRank,
    SeriesKind, SeriesLevel, SeriesSpec, Verdict,
};
use descent_core::{
    build_presentation_complex, parse_presentation_file, Cochain, FpSubspace, GroupPresentation,
    PrimeModulus,
};
use serde::Serialize;

#[derive(Debug, thiserror::Error)]
pub enum Failure {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("{0}")]
    Input(#[from] descent_core::Error),
    #[error("{0}")]
    Usage(String),
}

impl Failure {
    pub fn exit_code(&self) -> i32 {
        match self {
            Failure::Io { .. } => 1,
            Failure::Input(_) | Failure::Usage(_) => 2,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Descend,
    Cyclic,
    Criteria,
    Reduce,
    Cheeger,
    Relsize,
    Cover,
    Echo,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Descend => "descend",
            Command::Cyclic => "cyclic",
            Command::Criteria => "criteria",
            Command::Reduce => "reduce",
            Command::Cheeger => "cheeger",
            Command::Relsize => "relsize",
            Command::Cover => "cover",
            Command::Echo => "echo",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Json,
    Table,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    Exact,
    Heuristic,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SeriesArg {
    Derived,
    Rank(usize),
    File(PathBuf),
}

impl std::str::FromStr for SeriesArg {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        if s == "derived" {
            return Ok(SeriesArg::Derived);
        }
        if let Some(k) = s.strip_prefix("rank:") {
            return k
                .parse()
                .map(SeriesArg::Rank)
                .map_err(|_| format!("bad rank in {s:?}"));
        }
        if let Some(path) = s.strip_prefix("file:") {
            return Ok(SeriesArg::File(path.into()));
        }
        Err(format!("expected derived, rank:<k> or file:<path>, got {s:?}"))
    }
}

#[derive(Debug, Clone)]
pub struct RunConfig {
    pub command: Command,
    pub input: PathBuf,
    pub p: Option<u64>,
    pub series: SeriesArg,
    pub depth: usize,
    pub u: Option<usize>,
    pub cell_budget: u64,
    pub seed: u64,
    pub mode: Mode,
    pub format: Format,
    pub weights: Option<Vec<i64>>,
    pub max_i: u64,
    pub w: Option<usize>,
    pub class: Option<Vec<u32>>,
}

impl RunConfig {
    pub fn new(command: Command, input: impl Into<PathBuf>) -> Self {
        RunConfig {
            command,
            input: input.into(),
            p: None,
            series: SeriesArg::Derived,
            depth: 2,
            u: None,
            cell_budget: 1_000_000,
            seed: 0,
            mode: Mode::Exact,
            format: Format::Json,
            weights: None,
            max_i: 8,
            w: None,
            class: None,
        }
    }
}

/// A rendered report and the exit status it calls for.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Outcome {
    pub document: String,
    pub exit_code: i32,
}

fn read(path: &Path) -> Result<String, Failure> {
    std::fs::read_to_string(path).map_err(|source| Failure::Io {
        path: path.to_path_buf(),
        source,
    })
}

fn load_presentation(cfg: &RunConfig) -> Result<(GroupPresentation, PrimeModulus), Failure> {
    let (pres, p) = parse_presentation_file(&read(&cfg.input)?)?;
    match cfg.p {
        Some(q) => Ok((pres, PrimeModulus::new(q)?)),
        None => Ok((pres, p)),
    }
}

/// Parses a series file: `level` starts the class list of the next level,
/// `class = v0 v1 ...` adds one cochain to it.
pub fn parse_series_file(text: &str) -> Result<Vec<Vec<Vec<u32>>>, Failure> {
    let mut levels: Vec<Vec<Vec<u32>>> = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        if line == "level" {
            levels.push(Vec::new());
            continue;
        }
        let bad = |msg: &str| descent_core::Error::Parse {
            line: idx + 1,
            message: msg.to_string(),
        };
        let Some(("class", values)) = line.split_once('=').map(|(k, v)| (k.trim(), v)) else {
            return Err(bad("expected `level` or `class = ...`").into());
        };
        let Some(current) = levels.last_mut() else {
            return Err(bad("`class` before the first `level`").into());
        };
        current.push(parse_numbers(values).map_err(|m| bad(&m))?);
    }
    Ok(levels)
}

fn parse_numbers<T: std::str::FromStr>(s: &str) -> Result<Vec<T>, String> {
    s.split(|c: char| c.is_whitespace() || c == ',')
        .filter(|t| !t.is_empty())
        .map(|t| t.parse().map_err(|_| format!("not a number: {t:?}")))
        .collect()
}

/// Parses a matrix file with `p = q` and one `row = ...` line per row.
pub fn parse_matrix_file(text: &str) -> Result<FpSubspace, Failure> {
    let mut p = None;
    let mut rows: Vec<Vec<u32>> = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let bad = |msg: String| descent_core::Error::Parse {
            line: idx + 1,
            message: msg,
        };
        let Some((key, value)) = line.split_once('=') else {
            return Err(bad(format!("expected `key = value`, found {line:?}")).into());
        };
        match key.trim() {
            "p" => {
                let q: u64 = value.trim().parse().map_err(|_| bad("bad modulus".into()))?;
                p = Some(PrimeModulus::new(q).map_err(|e| bad(e.to_string()))?);
            }
            "row" => rows.push(parse_numbers(value).map_err(bad)?),
            other => return Err(bad(format!("unknown key {other:?}")).into()),
        }
    }
    let p = p.ok_or_else(|| Failure::Usage("matrix file has no `p = ...` line".into()))?;
    let width = rows.first().map_or(0, Vec::len);
    if let Some(row) = rows.iter().find(|r| r.len() != width) {
        return Err(descent_core::Error::LengthMismatch {
            expected: width,
            found: row.len(),
        }
        .into());
    }
    let rows = rows
        .into_iter()
        .map(|r| r.into_iter().map(|x| x % p.get()).collect::<Vec<_>>());
    Ok(FpSubspace::from_generators(p, width, rows)?)
}

fn series_spec(cfg: &RunConfig, p: PrimeModulus) -> Result<SeriesSpec, Failure> {
    let kind = match &cfg.series {
        SeriesArg::Derived => SeriesKind::DerivedP,
        SeriesArg::Rank(k) => SeriesKind::CustomRank(*k),
        SeriesArg::File(path) => SeriesKind::Explicit(parse_series_file(&read(path)?)?),
    };
    if cfg.depth == 0 {
        return Err(Failure::Usage("--depth must be at least 1".into()));
    }
    Ok(SeriesSpec {
        kind,
        depth: cfg.depth,
        p,
        cell_budget: cfg.cell_budget,
    })
}

fn search(cfg: &RunConfig) -> HyperplaneSearch {
    match cfg.mode {
        Mode::Exact => HyperplaneSearch::ColumnClasses,
        Mode::Heuristic => HyperplaneSearch::Sampled {
            samples: DEFAULT_SAMPLES,
            seed: cfg.seed,
        },
    }
}

#[derive(Serialize)]
struct Document<'a, T: Serialize> {
    command: &'a str,
    #[serde(flatten)]
    report: &'a T,
}

fn json<T: Serialize>(command: Command, report: &T) -> String {
    let mut s = serde_json::to_string_pretty(&Document {
        command: command.name(),
        report,
    })
    .expect("reports serialize");
    s.push('\n');
    s
}

fn opt<T: ToString>(x: &Option<T>) -> String {
    x.as_ref().map_or_else(|| "-".to_string(), T::to_string)
}

/// Runs the configured command.
pub fn run(cfg: &RunConfig) -> Result<Outcome, Failure> {
    match cfg.command {
        Command::Descend => descend(cfg),
        Command::Cyclic => cyclic(cfg),
        Command::Criteria => criteria(cfg),
        Command::Reduce => reduce(cfg),
        Command::Cheeger => cheeger(cfg),
        Command::Relsize => relsize(cfg),
        Command::Cover => cover(cfg),
        Command::Echo => echo(cfg),
    }
}

fn descend(cfg: &RunConfig) -> Result<Outcome, Failure> {
    let (pres, p) = load_presentation(cfg)?;
    let spec = series_spec(cfg, p)?;
    let u = match cfg.u {
        Some(u) => u,
        None => {
            let k1 = build_presentation_complex(&pres);
            let n1 = series_classes(&k1, &spec, 1, &[])?.map_or(0, |c| c.len());
            choose_parameters(&pres, &[LevelRank { index: 1, quotient_rank: n1 }])?.1
        }
    };
    let report = run_descent_pipeline(&pres, &spec, u, search(cfg))?;
    let exit_code = if report.verdict == Verdict::BudgetExhausted { 3 } else { 0 };
    let document = match cfg.format {
        Format::Json => json(cfg.command, &report),
        Format::Table => descent_table(&report),
    };
    Ok(Outcome { document, exit_code })
}

/// Fixed-column rendering of a descent report.
pub fn descent_table(r: &DescentReport) -> String {
    let mut s = String::new();
    writeln!(
        s,
        "{:>5} {:>10} {:>4} {:>8} {:>8} {:>10} {:>14} {:>12} {:>7} {:>9}",
        "level", "index", "n", "d_p", "supp", "edges", "relsize_upper", "bound", "wedges", "ratio"
    )
    .unwrap();
    for rec in &r.records {
        writeln!(
            s,
            "{:>5} {:>10} {:>4} {:>8} {:>8} {:>10} {:>14} {:>12} {:>7} {:>9}",
            rec.level,
            rec.index,
            opt(&rec.quotient_rank),
            rec.d_p,
            opt(&rec.supp),
            rec.edges,
            opt(&rec.relsize_upper),
            opt(&rec.bound_factor),
            opt(&rec.wedge_count),
            opt(&rec.decay_ratio),
        )
        .unwrap();
    }
    writeln!(
        s,
        "p = {}  u = {}  series = {}  lambda = {}  factor = {}",
        r.p,
        r.u,
        r.series,
        opt(&r.lambda_estimate),
        r.uniform_factor
    )
    .unwrap();
    writeln!(s, "verdict: {}", r.verdict.as_str()).unwrap();
    s
}

fn cyclic(cfg: &RunConfig) -> Result<Outcome, Failure> {
    let (pres, p) = load_presentation(cfg)?;
    let weights = cfg
        .weights
        .clone()
        .ok_or_else(|| Failure::Usage("cyclic needs --weights".into()))?;
    let report = cyclic_growth_report(&pres, &weights, p, cfg.max_i)?;
    let document = match cfg.format {
        Format::Json => json(cfg.command, &report),
        Format::Table => cyclic_table(&report),
    };
    Ok(Outcome { document, exit_code: 0 })
}

pub fn cyclic_table(r: &CyclicGrowthReport) -> String {
    let mut s = format!("{:>6} {:>8} {:>10}\n", "i", "d_p", "d_p/i");
    for pt in &r.points {
        writeln!(s, "{:>6} {:>8} {:>10}", pt.i, pt.d_p, pt.ratio).unwrap();
    }
    writeln!(
        s,
        "slope = {}  positive limit signal: {}",
        r.slope, r.positive_limit_signal
    )
    .unwrap();
    s
}

fn criteria(cfg: &RunConfig) -> Result<Outcome, Failure> {
    let (pres, p) = load_presentation(cfg)?;
    let spec = series_spec(cfg, p)?;
    let tower = series_tower(&pres, &spec)?;
    let ranks: Vec<LevelRank> = tower
        .levels
        .iter()
        .filter_map(|l| {
            l.quotient_rank.map(|n| LevelRank {
                index: l.index,
                quotient_rank: n,
            })
        })
        .collect();
    let report = largeness_criteria_report(&ranks, p)?;
    let document = match cfg.format {
        Format::Json => json(cfg.command, &report),
        Format::Table => criteria_table(&report),
    };
    Ok(Outcome {
        document,
        exit_code: if tower.budget_exhausted { 3 } else { 0 },
    })
}

pub fn criteria_table(r: &CriteriaReport) -> String {
    let mut s = format!(
        "{:>10} {:>6} {:>16} {:>10} {:>10}\n",
        "index", "n", "n log p / index", "n / index", "inf"
    );
    for i in 0..r.indices.len() {
        writeln!(
            s,
            "{:>10} {:>6} {:>16.6} {:>10} {:>10}",
            r.indices[i],
            r.quotient_ranks[i],
            r.log_index_ratios[i],
            r.rank_ratios[i],
            r.running_infimum[i]
        )
        .unwrap();
    }
    writeln!(
        s,
        "abelian quotients: {}  log ratio growing: {}  rank ratio positive: {}",
        r.abelian_quotients, r.log_ratio_growing, r.rank_ratio_positive
    )
    .unwrap();
    writeln!(s, "{}", r.note).unwrap();
    s
}

#[derive(Debug, Clone, Serialize)]
pub struct ReduceReport {
    pub p: u32,
    pub ambient: usize,
    pub input_dim: usize,
    pub target_dim: usize,
    pub input_support: usize,
    pub achieved_support: usize,
    pub step_supports: Vec<usize>,
    pub chain_bound: String,
    pub uniform_bound: String,
    pub exact: bool,
    pub bound_certified: bool,
    pub basis: Vec<Vec<u32>>,
}

fn reduce(cfg: &RunConfig) -> Result<Outcome, Failure> {
    let v = parse_matrix_file(&read(&cfg.input)?)?;
    let w = cfg.w.unwrap_or(v.dim().saturating_sub(1));
    let r = reduce_to_dimension(&v, w, search(cfg))?;
    let report = ReduceReport {
        p: v.modulus().get(),
        ambient: v.ambient_dim(),
        input_dim: r.input_dim,
        target_dim: w,
        input_support: r.input_support,
        achieved_support: r.achieved_support,
        step_supports: r.step_supports.clone(),
        chain_bound: r.chain_bound.to_string(),
        uniform_bound: r.uniform_bound.to_string(),
        exact: r.exact,
        bound_certified: r.bound_certified,
        basis: r.subspace.basis().rows().map(<[u32]>::to_vec).collect(),
    };
    let document = match cfg.format {
        Format::Json => json(cfg.command, &report),
        Format::Table => {
            let mut s = format!(
                "{:>4} {:>8} {:>4} {:>4} {:>8} {:>8} {:>12} {:>6} {:>9}\n",
                "p", "ambient", "v", "w", "supp(V)", "supp(W)", "bound", "exact", "certified"
            );
            writeln!(
                s,
                "{:>4} {:>8} {:>4} {:>4} {:>8} {:>8} {:>12} {:>6} {:>9}",
                report.p,
                report.ambient,
                report.input_dim,
                report.target_dim,
                report.input_support,
                report.achieved_support,
                report.chain_bound,
                report.exact,
                report.bound_certified
            )
            .unwrap();
            for row in &report.basis {
                let cells: Vec<String> = row.iter().map(u32::to_string).collect();
                writeln!(s, "row = {}", cells.join(" ")).unwrap();
            }
            s
        }
    };
    Ok(Outcome { document, exit_code: 0 })
}

#[derive(Debug, Clone, Serialize)]
pub struct CheegerReport {
    pub level: usize,
    pub vertices: usize,
    pub edges: usize,
    pub cheeger: CheegerValue,
}

fn cheeger(cfg: &RunConfig) -> Result<Outcome, Failure> {
    let (pres, p) = load_presentation(cfg)?;
    let spec = series_spec(cfg, p)?;
    let tower = series_tower(&pres, &spec)?;
    let k = tower.complexes.last().expect("at least one level");
    let graph = SkeletonGraph::from_complex(k);
    let mode = match cfg.mode {
        Mode::Exact => CheegerMode::Exact,
        Mode::Heuristic => CheegerMode::Heuristic { seed: cfg.seed },
    };
    let report = CheegerReport {
        level: tower.levels.len(),
        vertices: k.num_vertices(),
        edges: k.num_edges(),
        cheeger: cheeger_constant(&graph, mode)?,
    };
    let document = match cfg.format {
        Format::Json => json(cfg.command, &report),
        Format::Table => format!(
            "{:>5} {:>8} {:>8} {:>10} {:>6}\n{:>5} {:>8} {:>8} {:>10} {:>6}\n",
            "level",
            "vertices",
            "edges",
            "h",
            "exact",
            report.level,
            report.vertices,
            report.edges,
            descent_core::tau::format_ratio(&report.cheeger.value),
            report.cheeger.exact
        ),
    };
    Ok(Outcome {
        document,
        exit_code: if tower.budget_exhausted { 3 } else { 0 },
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct RelsizeReport {
    pub edges: usize,
    pub support: usize,
    pub relsize: String,
    pub exact: bool,
    pub representative: Vec<u32>,
    /// The Cheeger bound on the degree-p cover defined by the class.
    pub cover_check: Option<CheegerRelsizeReport>,
}

fn relsize(cfg: &RunConfig) -> Result<Outcome, Failure> {
    let (pres, p) = load_presentation(cfg)?;
    let values = cfg
        .class
        .clone()
        .ok_or_else(|| Failure::Usage("relsize needs --class".into()))?;
    let k = Arc::new(build_presentation_complex(&pres));
    if values.len() != k.num_edges() {
        return Err(descent_core::Error::LengthMismatch {
            expected: k.num_edges(),
            found: values.len(),
        }
        .into());
    }
    let alpha = Cochain::new(p, values.iter().map(|x| x % p.get()).collect());
    let (mode, check) = match cfg.mode {
        Mode::Exact => (RelsizeMode::Exact, true),
        Mode::Heuristic => (RelsizeMode::Upper, false),
    };
    let rel = relative_size(&k, &alpha, mode)?;
    let cover_check = if check {
        let cov = build_abelian_p_cover(k.clone(), std::slice::from_ref(&alpha), p)?;
        Some(cheeger_relsize_check(&cov, &alpha, CheegerMode::Exact)?)
    } else {
        None
    };
    let report = RelsizeReport {
        edges: rel.num_edges,
        support: rel.support,
        relsize: descent_core::tau::format_ratio(&rel.value),
        exact: rel.exact,
        representative: rel.representative.as_slice().to_vec(),
        cover_check,
    };
    let document = match cfg.format {
        Format::Json => json(cfg.command, &report),
        Format::Table => {
            let mut s = format!(
                "{:>6} {:>8} {:>10} {:>6}\n{:>6} {:>8} {:>10} {:>6}\n",
                "edges", "support", "relsize", "exact", report.edges, report.support,
                report.relsize, report.exact
            );
            if let Some(c) = &report.cover_check {
                writeln!(
                    s,
                    "cover: h = {}  rhs = {}  holds = {}  fibers = {:?}",
                    descent_core::tau::format_ratio(&c.cheeger.value),
                    descent_core::tau::format_ratio(&c.rhs),
                    c.holds,
                    c.fiber_counts
                )
                .unwrap();
            }
            s
        }
    };
    Ok(Outcome { document, exit_code: 0 })
}

#[derive(Debug, Clone, Serialize)]
pub struct CoverReport {
    pub p: u32,
    pub series: String,
    pub levels: Vec<SeriesLevel>,
    pub budget_exhausted: bool,
}

fn cover(cfg: &RunConfig) -> Result<Outcome, Failure> {
    let (pres, p) = load_presentation(cfg)?;
    let spec = series_spec(cfg, p)?;
    let tower = series_tower(&pres, &spec)?;
    let report = CoverReport {
        p: p.get(),
        series: spec.kind.label(),
        levels: tower.levels,
        budget_exhausted: tower.budget_exhausted,
    };
    let document = match cfg.format {
        Format::Json => json(cfg.command, &report),
        Format::Table => {
            let mut s = format!(
                "{:>5} {:>10} {:>9} {:>9} {:>9} {:>8} {:>8} {:>4} {:>10}\n",
                "level", "index", "vertices", "edges", "faces", "euler", "d_p", "n", "d_p max"
            );
            for l in &report.levels {
                writeln!(
                    s,
                    "{:>5} {:>10} {:>9} {:>9} {:>9} {:>8} {:>8} {:>4} {:>10}",
                    l.level,
                    l.index,
                    l.vertices,
                    l.edges,
                    l.faces,
                    l.euler_characteristic,
                    l.d_p,
                    opt(&l.quotient_rank),
                    opt(&l.rank_upper_bound)
                )
                .unwrap();
            }
            s
        }
    };
    Ok(Outcome {
        document,
        exit_code: if report.budget_exhausted { 3 } else { 0 },
    })
}

fn echo(cfg: &RunConfig) -> Result<Outcome, Failure> {
    let (pres, p) = load_presentation(cfg)?;
    Ok(Outcome {
        document: format_presentation_file(&pres, p),
        exit_code: 0,
    })
}
