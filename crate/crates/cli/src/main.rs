use std::f64::consts::PI;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rand::Rng;
use serde_json::{json, Value};
use spherecut::coloring::{
    chi_vec_upper_with_starts, default_rank, expected_hyperplane_cut, hyperplane_round,
    theta_complement_upper, Embedding, Schedule, StrictSchedule,
};
use spherecut::construction::{build_construction, Overrides};
use spherecut::continuous::{SideSet, DEFAULT_PAIRS};
use spherecut::graph::{edwards_bound, maxcut_exact, maxcut_local_search, surplus, DEFAULT_EXACT_LIMIT};
use spherecut::partition::{CellPartition, PartitionLimits, PointSet, DEFAULT_MAX_CELLS, DEFAULT_MAX_DIMENSION};
use spherecut::rng::{substream, unit_vector, Stream};
use spherecut::sphere::choose_dimension;
use spherecut::verify::{
    check_surplus_bound, check_construction, check_hemisphere_optimality, check_numerical_lemma, open_grid,
    ratio_sweep, records_csv, reports_csv, summary_json, CheckReport, CheckSettings, Family,
    LOCAL_SEARCH_RESTARTS,
};
use spherecut::Graph;

#[derive(Parser)]
#[command(name = "spherecut", version, about = "Sphere threshold graphs, MaxCut surplus and vector colorings")]
struct Cli {
    /// Worker threads. Results do not depend on it.
    #[arg(long, global = true)]
    jobs: Option<usize>,
    /// Output directory.
    #[arg(long, global = true, env = "SPHERECUT_OUT_DIR", default_value = "spherecut-out")]
    out: PathBuf,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone, Default)]
struct ThetaArg {
    /// Threshold angle in radians, strictly between π/2 and π.
    #[arg(long, conflicts_with = "theta_frac")]
    theta: Option<f64>,
    /// Threshold angle as a fraction of π, strictly between 1/2 and 1.
    #[arg(long)]
    theta_frac: Option<f64>,
}

impl ThetaArg {
    fn get(&self) -> Option<f64> {
        self.theta.or(self.theta_frac.map(|f| f * PI))
    }

    fn require(&self, what: &str) -> Result<f64, Failure> {
        self.get()
            .ok_or_else(|| Failure::Usage(format!("{what} needs --theta or --theta-frac")))
    }
}

#[derive(Subcommand)]
enum Command {
    /// Build G(θ, ε) and write its edge list and points.
    Construct {
        #[command(flatten)]
        theta: ThetaArg,
        #[arg(long)]
        epsilon: f64,
        /// Sphere dimension (points live in R^d).
        #[arg(long)]
        d: Option<usize>,
        /// Cell diameter target.
        #[arg(long)]
        gamma: Option<f64>,
        /// Recorded only; the construction is deterministic.
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long, default_value_t = DEFAULT_MAX_DIMENSION)]
        max_dimension: usize,
        #[arg(long, default_value_t = DEFAULT_MAX_CELLS)]
        max_cells: usize,
    },
    /// Upper-bound the vector chromatic number of a graph file.
    Solve {
        #[arg(long)]
        graph: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
        /// Point file used as an extra starting embedding.
        #[arg(long)]
        points: Option<PathBuf>,
        #[arg(long)]
        rank: Option<usize>,
        #[arg(long)]
        restarts: Option<usize>,
        /// Hyperplane rounding trials on the final embedding.
        #[arg(long, default_value_t = 0)]
        trials: usize,
        /// Also bound the strict variant (equal inner products on edges).
        #[arg(long)]
        strict: bool,
    },
    /// Maximum cut of a graph file, exact up to --exact-limit vertices.
    Maxcut {
        #[arg(long)]
        graph: PathBuf,
        #[arg(long, default_value_t = DEFAULT_EXACT_LIMIT)]
        exact_limit: usize,
        /// Needed when the graph is too large for exact search.
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long, default_value_t = LOCAL_SEARCH_RESTARTS)]
        restarts: usize,
    },
    /// Run check suites; exits 1 when a required check fails.
    Verify(VerifyArgs),
    /// Tabulate m / (sp (κ - 1)) over a graph family.
    Sweep {
        #[arg(long, value_enum)]
        family: FamilyArg,
        /// Sizes: `3..9` (inclusive), `3,5,7` or `4`.
        #[arg(long, value_parser = parse_sizes)]
        n: Option<Sizes>,
        /// Second side for complete-bipartite (defaults to the first).
        #[arg(long)]
        other: Option<usize>,
        #[command(flatten)]
        theta: ThetaArg,
        #[arg(long)]
        epsilon: Option<f64>,
        #[arg(long)]
        d: Option<usize>,
        #[arg(long)]
        gamma: Option<f64>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long, default_value_t = DEFAULT_EXACT_LIMIT)]
        exact_limit: usize,
    },
    /// Merge JSON outputs into report.json.
    Report {
        /// Files to merge; defaults to every other .json in the output directory.
        inputs: Vec<PathBuf>,
    },
}

#[derive(Args)]
struct VerifyArgs {
    #[arg(long = "suite", value_enum, required = true)]
    suites: Vec<Suite>,
    /// Grid size for the numerical lemma.
    #[arg(long, default_value_t = 1000)]
    grid: usize,
    #[command(flatten)]
    theta: ThetaArg,
    #[arg(long)]
    epsilon: Option<f64>,
    #[arg(long)]
    delta: Option<f64>,
    #[arg(long)]
    d: Option<usize>,
    #[arg(long)]
    gamma: Option<f64>,
    /// Sampled point pairs for the hemisphere suite.
    #[arg(long, default_value_t = DEFAULT_PAIRS)]
    samples: usize,
    /// Random cell colorings tried against the hemisphere.
    #[arg(long, default_value_t = 5)]
    colorings: usize,
    /// Graph file for the surplus-bound suite.
    #[arg(long)]
    graph: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long, default_value_t = DEFAULT_EXACT_LIMIT)]
    exact_limit: usize,
}

#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, ValueEnum)]
enum Suite {
    NumericalLemma,
    Construction,
    Hemisphere,
    SurplusBound,
}

#[derive(Clone, Copy, ValueEnum)]
enum FamilyArg {
    Complete,
    CompleteBipartite,
    Cycle,
    Petersen,
    Constructed,
}

#[derive(Clone, Debug)]
struct Sizes(Vec<usize>);

fn parse_sizes(s: &str) -> Result<Sizes, String> {
    let num = |t: &str| t.trim().parse::<usize>().map_err(|_| format!("{t:?} is not a size"));
    if let Some((a, b)) = s.split_once("..") {
        let (a, b) = (num(a)?, num(b.trim_start_matches('='))?);
        if a > b {
            return Err(format!("empty range {s}"));
        }
        return Ok(Sizes((a..=b).collect()));
    }
    s.split(',').map(num).collect::<Result<_, _>>().map(Sizes)
}

enum Failure {
    Usage(String),
    Io(String),
    Run(String),
    /// A required check failed; outputs were still written.
    Checks(usize),
}

impl From<spherecut::Error> for Failure {
    fn from(e: spherecut::Error) -> Self {
        use spherecut::Error::*;
        match e {
            Input(_) | Size { .. } => Failure::Usage(e.to_string()),
            Io(_) | Parse { .. } => Failure::Io(e.to_string()),
            _ => Failure::Run(e.to_string()),
        }
    }
}

/// Parameters echoed at the top of every output.
struct Config {
    command: &'static str,
    entries: Vec<(String, String)>,
}

impl Config {
    fn new(command: &'static str) -> Self {
        Self {
            command,
            entries: Vec::new(),
        }
    }

    fn set(&mut self, key: &str, value: impl ToString) -> &mut Self {
        self.entries.push((key.to_string(), value.to_string()));
        self
    }

    fn opt<T: ToString>(&mut self, key: &str, value: Option<T>) -> &mut Self {
        if let Some(v) = value {
            self.set(key, v);
        }
        self
    }

    fn header(&self) -> String {
        let mut out = format!("# spherecut {} {}\n", self.command, env!("CARGO_PKG_VERSION"));
        for (k, v) in &self.entries {
            out.push_str(&format!("# {k} = {v}\n"));
        }
        out
    }

    fn json(&self) -> Value {
        let mut map = serde_json::Map::new();
        map.insert("command".into(), self.command.into());
        for (k, v) in &self.entries {
            map.insert(k.clone(), v.clone().into());
        }
        Value::Object(map)
    }
}

struct Output {
    dir: PathBuf,
}

impl Output {
    fn write(&self, name: &str, body: &str) -> Result<(), Failure> {
        fs::create_dir_all(&self.dir)
            .map_err(|e| Failure::Io(format!("creating {}: {e}", self.dir.display())))?;
        let path = self.dir.join(name);
        fs::write(&path, body).map_err(|e| Failure::Io(format!("writing {}: {e}", path.display())))
    }

    fn text(&self, name: &str, config: &Config, body: &str) -> Result<(), Failure> {
        self.write(name, &format!("{}{body}", config.header()))
    }

    fn json(&self, name: &str, config: &Config, mut body: Value) -> Result<(), Failure> {
        body.as_object_mut()
            .expect("json outputs are objects")
            .insert("config".into(), config.json());
        let text = serde_json::to_string_pretty(&body).expect("json values serialize");
        self.write(name, &(text + "\n"))
    }
}

fn read_file(path: &Path) -> Result<fs::File, Failure> {
    fs::File::open(path).map_err(|e| Failure::Io(format!("reading {}: {e}", path.display())))
}

fn read_graph(path: &Path) -> Result<Graph, Failure> {
    Ok(Graph::read_edge_list(std::io::BufReader::new(read_file(path)?))?)
}

fn need_seed(seed: Option<u64>, why: &str) -> Result<u64, Failure> {
    seed.ok_or_else(|| Failure::Usage(format!("--seed is required: {why}")))
}

fn construct(
    out: &Output,
    theta: &ThetaArg,
    epsilon: f64,
    d: Option<usize>,
    gamma: Option<f64>,
    seed: Option<u64>,
    limits: PartitionLimits,
) -> Result<(), Failure> {
    let theta = theta.require("construct")?;
    let mut config = Config::new("construct");
    config
        .set("theta", theta)
        .set("epsilon", epsilon)
        .opt("d", d)
        .opt("gamma", gamma)
        .opt("seed", seed)
        .set("max_dimension", limits.max_dimension)
        .set("max_cells", limits.max_cells);
    let gg = build_construction(
        theta,
        epsilon,
        Overrides {
            d,
            gamma,
            limits: Some(limits),
        },
    )?;
    let params = gg.params.clone().expect("construction records its parameters");
    out.text("graph.txt", &config, &gg.graph.to_edge_list())?;
    out.text("points.txt", &config, &gg.points_file().to_text())?;
    out.json(
        "construction.json",
        &config,
        json!({
            "n": gg.graph.n(),
            "m": gg.graph.m(),
            "params": params,
            "certified": params.certified(),
            "max_edge_dot": gg.max_edge_dot(),
            "identity_kappa": 1.0 - 1.0 / theta.cos(),
        }),
    )?;
    println!(
        "n = {}, m = {}, d = {}, gamma = {}, certified = {}",
        gg.graph.n(),
        gg.graph.m(),
        params.d,
        params.gamma,
        params.certified()
    );
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn solve(
    out: &Output,
    graph_path: &Path,
    seed: Option<u64>,
    points: Option<&Path>,
    rank: Option<usize>,
    restarts: Option<usize>,
    trials: usize,
    strict: bool,
) -> Result<(), Failure> {
    let seed = need_seed(seed, "solve uses random starting embeddings")?;
    let g = read_graph(graph_path)?;
    if g.m() == 0 {
        return Err(Failure::Usage("graph has no edges; every κ works".into()));
    }
    let warm = match points {
        Some(p) => {
            let set = PointSet::read(std::io::BufReader::new(read_file(p)?))?;
            Some(Embedding::new(set.points, &g)?)
        }
        None => None,
    };
    let rank = rank
        .unwrap_or_else(|| default_rank(&g))
        .max(warm.as_ref().map_or(0, Embedding::r));
    let mut schedule = Schedule::default();
    if let Some(r) = restarts {
        schedule.restarts = r;
    }
    let mut config = Config::new("solve");
    config
        .set("graph", graph_path.display())
        .set("seed", seed)
        .opt("points", points.map(|p| p.display().to_string()))
        .set("rank", rank)
        .set("restarts", schedule.restarts)
        .set("trials", trials)
        .set("strict", strict);
    let starts: Vec<&Embedding> = warm.iter().collect();
    let res = chi_vec_upper_with_starts(&g, rank, seed, &schedule, &starts)?;
    let mut body = json!({
        "n": g.n(),
        "m": g.m(),
        "kappa_upper": res.kappa_upper,
        "kappa_spectral_lower": res.kappa_spectral_lower,
        "converged": res.converged,
        "iterations": res.iterations,
        "restart": res.restart,
        "max_edge_dot": res.embedding.max_edge_dot(),
        "expected_hyperplane_cut": expected_hyperplane_cut(&res.embedding, &g),
    });
    if trials > 0 {
        let s = hyperplane_round(&res.embedding, &g, trials, seed)?;
        body["rounding"] = json!({
            "trials": s.trials,
            "mean": s.mean,
            "stderr": s.stderr,
            "max": s.max,
        });
    }
    if strict {
        let s = theta_complement_upper(&g, rank, seed, &StrictSchedule::default())?;
        body["strict"] = json!({
            "kappa": s.kappa,
            "spread": s.spread,
            "iterations": s.iterations,
            "converged": s.converged,
        });
    }
    out.text("embedding.txt", &config, &res.embedding.to_text())?;
    out.json("kappa.json", &config, body)?;
    println!(
        "kappa in [{}, {}], converged = {}",
        res.kappa_spectral_lower, res.kappa_upper, res.converged
    );
    if !res.converged {
        eprintln!("warning: the solver did not converge; the upper bound is not certified");
    }
    Ok(())
}

fn maxcut(out: &Output, graph_path: &Path, exact_limit: usize, seed: Option<u64>, restarts: usize) -> Result<(), Failure> {
    let g = read_graph(graph_path)?;
    let mut config = Config::new("maxcut");
    config
        .set("graph", graph_path.display())
        .set("exact_limit", exact_limit)
        .opt("seed", seed);
    let cut = if g.n() <= exact_limit {
        maxcut_exact(&g, exact_limit)?
    } else {
        let seed = need_seed(
            seed,
            &format!("n = {} exceeds --exact-limit {exact_limit}, so local search runs", g.n()),
        )?;
        config.set("restarts", restarts);
        maxcut_local_search(&g, seed, restarts)?
    };
    let sp = surplus(g.m(), cut.value)?;
    let body = format!(
        "{}m {}\nsurplus {sp}\nedwards_bound {}\n",
        cut.to_text(),
        g.m(),
        edwards_bound(g.m())
    );
    out.text("cut.txt", &config, &body)?;
    println!("mc = {} (exact = {}), m = {}, sp = {sp}", cut.value, cut.exact, g.m());
    Ok(())
}

/// Caps of measure 0.25 and 0.4, three random two-cap unions and `colorings`
/// random colorings of a 64-cell partition.
fn hemisphere_alternatives(d: usize, seed: u64, colorings: usize, cells: &CellPartition) -> Result<Vec<(String, SideSet<'_>)>, Failure> {
    let mut rng = substream(seed, Stream::Experiment, 0);
    let mut out = Vec::new();
    for measure in [0.25, 0.4] {
        out.push((format!("cap_{measure}"), SideSet::cap_of_measure(unit_vector(&mut rng, d), measure)?));
    }
    for k in 0..3 {
        let caps = (0..2)
            .map(|_| (unit_vector(&mut rng, d), rng.random_range(0.4..1.4)))
            .collect();
        out.push((format!("two_caps_{k}"), SideSet::CapUnion(caps)));
    }
    for k in 0..colorings {
        let red = (0..cells.n()).map(|_| rng.random::<bool>()).collect();
        out.push((
            format!("cells_{k}"),
            SideSet::CellColoring {
                partition: cells,
                red,
            },
        ));
    }
    Ok(out)
}

fn verify(out: &Output, a: &VerifyArgs) -> Result<(), Failure> {
    let mut suites = a.suites.clone();
    suites.sort();
    suites.dedup();
    let mut config = Config::new("verify");
    let names: Vec<String> = suites
        .iter()
        .map(|s| s.to_possible_value().expect("suites have names").get_name().to_string())
        .collect();
    config.set("suites", names.join(","));
    let mut reports: Vec<CheckReport> = Vec::new();
    for suite in &suites {
        match suite {
            Suite::NumericalLemma => {
                if a.grid == 0 {
                    return Err(Failure::Usage("--grid must be at least 1".into()));
                }
                config.set("grid", a.grid);
                reports.extend(check_numerical_lemma(&open_grid(1e-3, 1.0 - 1e-3, a.grid))?);
            }
            Suite::Construction => {
                let theta = a.theta.require("the construction suite")?;
                let epsilon = a
                    .epsilon
                    .ok_or_else(|| Failure::Usage("the construction suite needs --epsilon".into()))?;
                let seed = need_seed(a.seed, "the construction suite runs the vector coloring solver")?;
                config
                    .set("theta", theta)
                    .set("epsilon", epsilon)
                    .opt("d", a.d)
                    .opt("gamma", a.gamma)
                    .opt("delta", a.delta)
                    .set("seed", seed)
                    .set("exact_limit", a.exact_limit);
                let settings = CheckSettings {
                    seed,
                    exact_limit: a.exact_limit,
                    ..Default::default()
                };
                let overrides = Overrides {
                    d: a.d,
                    gamma: a.gamma,
                    limits: None,
                };
                reports.extend(check_construction(theta, epsilon, overrides, a.delta, &settings)?);
            }
            Suite::Hemisphere => {
                let theta = a.theta.require("the hemisphere suite")?;
                let seed = need_seed(a.seed, "the hemisphere suite samples point pairs")?;
                let d = match (a.d, a.epsilon) {
                    (Some(d), _) => d,
                    (None, Some(eps)) => choose_dimension(theta, eps)?,
                    (None, None) => {
                        return Err(Failure::Usage("the hemisphere suite needs --d or --epsilon".into()))
                    }
                };
                config
                    .set("theta", theta)
                    .opt("epsilon", a.epsilon)
                    .set("hemisphere_d", d)
                    .set("samples", a.samples)
                    .set("colorings", a.colorings)
                    .set("seed", seed);
                let cells = CellPartition::with_cells(d, 64)?;
                let candidates = hemisphere_alternatives(d, seed, a.colorings, &cells)?;
                reports.extend(check_hemisphere_optimality(d, theta, a.samples, seed, &candidates, a.epsilon)?);
            }
            Suite::SurplusBound => {
                let path = a
                    .graph
                    .as_ref()
                    .ok_or_else(|| Failure::Usage("the surplus-bound suite needs --graph".into()))?;
                let seed = need_seed(a.seed, "the surplus-bound suite runs the vector coloring solver")?;
                config.set("graph", path.display()).set("seed", seed).set("exact_limit", a.exact_limit);
                let g = read_graph(path)?;
                let settings = CheckSettings {
                    seed,
                    exact_limit: a.exact_limit,
                    ..Default::default()
                };
                let label = path.file_name().map_or("graph".into(), |f| f.to_string_lossy().into_owned());
                reports.push(check_surplus_bound(&label, &g, &settings)?);
            }
        }
    }
    out.text("verify.csv", &config, &reports_csv(&reports))?;
    out.json("verify.json", &config, summary_json(&reports))?;
    let failures = reports.iter().filter(|r| r.is_failure()).count();
    let skipped = reports.iter().filter(|r| r.skipped.is_some()).count();
    println!(
        "{} checks, {failures} required failures, {skipped} skipped",
        reports.len()
    );
    for r in reports.iter().filter(|r| r.is_failure()) {
        println!("FAIL {}: lhs {} rhs {} margin {}", r.name, r.lhs, r.rhs, r.margin);
    }
    if failures > 0 {
        return Err(Failure::Checks(failures));
    }
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn sweep(
    out: &Output,
    family: FamilyArg,
    n: Option<Sizes>,
    other: Option<usize>,
    theta: &ThetaArg,
    epsilon: Option<f64>,
    d: Option<usize>,
    gamma: Option<f64>,
    seed: Option<u64>,
    exact_limit: usize,
) -> Result<(), Failure> {
    let mut config = Config::new("sweep");
    config.set(
        "family",
        family.to_possible_value().expect("families have names").get_name().to_string(),
    );
    let sizes = |n: Option<Sizes>| {
        n.map(|s| s.0)
            .ok_or_else(|| Failure::Usage("this family needs --n".into()))
    };
    let (fam, solver) = match family {
        FamilyArg::Complete => (Family::Complete(sizes(n)?), false),
        FamilyArg::CompleteBipartite => {
            let parts: Vec<(usize, usize)> = sizes(n)?.into_iter().map(|a| (a, other.unwrap_or(a))).collect();
            config.opt("other", other);
            (Family::CompleteBipartite(parts), false)
        }
        FamilyArg::Cycle => (Family::Cycle(sizes(n)?), true),
        FamilyArg::Petersen => (Family::Petersen, true),
        FamilyArg::Constructed => {
            let theta = theta.require("the constructed family")?;
            let epsilon = epsilon.ok_or_else(|| Failure::Usage("the constructed family needs --epsilon".into()))?;
            config.set("theta", theta).set("epsilon", epsilon).opt("d", d).opt("gamma", gamma);
            (
                Family::Constructed {
                    theta,
                    epsilon,
                    d,
                    gamma,
                },
                true,
            )
        }
    };
    if let Family::Complete(ns) | Family::Cycle(ns) = &fam {
        let list: Vec<String> = ns.iter().map(|n| n.to_string()).collect();
        config.set("n", list.join(","));
    }
    let large = match &fam {
        Family::Complete(ns) | Family::Cycle(ns) => ns.iter().any(|&n| n > exact_limit),
        Family::CompleteBipartite(ps) => ps.iter().any(|&(a, b)| a + b > exact_limit),
        _ => false,
    };
    let seed = if solver || large {
        need_seed(seed, "this sweep runs the solver or local search")?
    } else {
        seed.unwrap_or(1)
    };
    config.set("seed", seed).set("exact_limit", exact_limit);
    let settings = CheckSettings {
        seed,
        exact_limit,
        ..Default::default()
    };
    let summary = ratio_sweep(&[fam], &settings)?;
    out.text("sweep.csv", &config, &records_csv(&summary.records))?;
    out.json("sweep.json", &config, serde_json::to_value(&summary).expect("summary serializes"))?;
    for r in &summary.records {
        let exact = r.ratio_exact.map(|q| format!(" = {q}")).unwrap_or_default();
        println!(
            "{:<40} m = {:<6} sp = {:<8} kappa = {:<10.6} ratio = {:.6}{exact} [{}]",
            r.graph,
            r.m,
            r.sp.to_string(),
            r.kappa,
            r.ratio,
            r.kappa_source.as_str()
        );
    }
    Ok(())
}

fn report(out: &Output, inputs: Vec<PathBuf>) -> Result<(), Failure> {
    let inputs = if inputs.is_empty() {
        let entries = fs::read_dir(&out.dir)
            .map_err(|e| Failure::Io(format!("listing {}: {e}", out.dir.display())))?;
        let mut found: Vec<PathBuf> = entries
            .filter_map(|e| e.ok().map(|e| e.path()))
            .filter(|p| p.extension().is_some_and(|x| x == "json") && p.file_name().is_some_and(|f| f != "report.json"))
            .collect();
        found.sort();
        found
    } else {
        inputs
    };
    if inputs.is_empty() {
        return Err(Failure::Usage(format!("no JSON outputs in {}", out.dir.display())));
    }
    let mut sources = Vec::new();
    let mut failures = 0u64;
    let mut checks = 0usize;
    for path in &inputs {
        let text = fs::read_to_string(path).map_err(|e| Failure::Io(format!("reading {}: {e}", path.display())))?;
        let value: Value = serde_json::from_str(&text)
            .map_err(|e| Failure::Io(format!("{} is not JSON: {e}", path.display())))?;
        failures += value["failures"].as_u64().unwrap_or(0);
        checks += value["checks"].as_array().map_or(0, Vec::len);
        let name = path.file_name().map_or_else(|| path.display().to_string(), |f| f.to_string_lossy().into_owned());
        sources.push(json!({ "file": name, "content": value }));
    }
    let mut config = Config::new("report");
    config.set("inputs", sources.len());
    out.json(
        "report.json",
        &config,
        json!({
            "pass": failures == 0,
            "checks": checks,
            "failures": failures,
            "sources": sources,
        }),
    )?;
    println!("{} files, {checks} checks, {failures} required failures", inputs.len());
    if failures > 0 {
        return Err(Failure::Checks(failures as usize));
    }
    Ok(())
}

fn run(cli: Cli) -> Result<(), Failure> {
    if let Some(jobs) = cli.jobs {
        if jobs == 0 {
            return Err(Failure::Usage("--jobs must be at least 1".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(jobs)
            .build_global()
            .map_err(|e| Failure::Run(e.to_string()))?;
    }
    let out = Output { dir: cli.out };
    match cli.command {
        Command::Construct {
            theta,
            epsilon,
            d,
            gamma,
            seed,
            max_dimension,
            max_cells,
        } => construct(
            &out,
            &theta,
            epsilon,
            d,
            gamma,
            seed,
            PartitionLimits {
                max_dimension,
                max_cells,
            },
        ),
        Command::Solve {
            graph,
            seed,
            points,
            rank,
            restarts,
            trials,
            strict,
        } => solve(&out, &graph, seed, points.as_deref(), rank, restarts, trials, strict),
        Command::Maxcut {
            graph,
            exact_limit,
            seed,
            restarts,
        } => maxcut(&out, &graph, exact_limit, seed, restarts),
        Command::Verify(args) => verify(&out, &args),
        Command::Sweep {
            family,
            n,
            other,
            theta,
            epsilon,
            d,
            gamma,
            seed,
            exact_limit,
        } => sweep(&out, family, n, other, &theta, epsilon, d, gamma, seed, exact_limit),
        Command::Report { inputs } => report(&out, inputs),
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Checks(n)) => {
            eprintln!("{n} required checks failed");
            ExitCode::from(1)
        }
        Err(Failure::Usage(msg)) => {
            eprintln!("usage error: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Io(msg)) => {
            eprintln!("i/o error: {msg}");
            ExitCode::from(3)
        }
        Err(Failure::Run(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(4)
        }
    }
}
