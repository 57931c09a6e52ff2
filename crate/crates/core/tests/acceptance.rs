//! Acceptance suite: one pass/fail line per criterion. Runs as a plain
//! binary so the lines show up in `cargo test` output.

use std::f64::consts::PI;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::{Duration, Instant};

use num_rational::Ratio;
use rand::Rng;
use spherecut::coloring::{
    chi_vec_upper, default_rank, expected_hyperplane_cut, hyperplane_round, Embedding, Schedule,
};
use spherecut::construction::Overrides;
use spherecut::continuous::SideSet;
use spherecut::graph::families::{complete, complete_bipartite, cycle, gnp, path, petersen};
use spherecut::graph::{edwards_bound_exact, maxcut_exact, surplus};
use spherecut::partition::{partition_sphere, PartitionLimits};
use spherecut::rng::{substream, unit_vector, Stream};
use spherecut::sphere::{cap_measure, choose_dimension};
use spherecut::verify::{
    check_surplus_bound, check_construction, check_hemisphere_optimality, check_numerical_lemma, open_grid,
    ratio_sweep, CheckReport, CheckSettings, Family,
};
use spherecut::Graph;

type Outcome = Result<String, String>;
type Criterion<'a> = (&'static str, Box<dyn Fn() -> Outcome + 'a>);

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> std::result::Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn within(limit: Duration, start: Instant) -> std::result::Result<(), String> {
    let spent = start.elapsed();
    ensure(spent < limit, || format!("took {spent:?}, limit {limit:?}"))
}

/// Constructions with at most 30 vertices, over three thresholds.
fn small_constructions() -> Vec<(f64, f64, Overrides)> {
    let shapes = [(2, 0.25), (2, 0.3), (3, 1.0), (3, 1.1), (3, 1.3), (4, 1.5)];
    let mut out = Vec::new();
    for (d, gamma) in shapes {
        for frac in [0.6, 2.0 / 3.0, 0.8] {
            out.push((
                frac * PI,
                0.1,
                Overrides {
                    d: Some(d),
                    gamma: Some(gamma),
                    limits: None,
                },
            ));
        }
    }
    out
}

fn edwards_tightness() -> Outcome {
    let start = Instant::now();
    for n in [5usize, 7, 9] {
        let g = complete(n);
        let sp = surplus(g.m(), maxcut_exact(&g, 30).map_err(|e| e.to_string())?.value)
            .map_err(|e| e.to_string())?;
        let bound = edwards_bound_exact(g.m()).ok_or("8m+1 not a square")?;
        ensure(sp.as_ratio() == bound, || format!("K_{n}: sp {sp} vs bound {bound}"))?;
    }
    within(Duration::from_secs(1), start)?;
    Ok(format!("sp(K_5, K_7, K_9) = 1, 3/2, 2 exactly ({:?})", start.elapsed()))
}

fn surplus_bound_suite(construction_reports: &[Vec<CheckReport>]) -> Outcome {
    let start = Instant::now();
    let settings = CheckSettings::default();
    let mut graphs: Vec<(String, Graph)> = Vec::new();
    for n in 2..=10 {
        graphs.push((format!("K_{n}"), complete(n)));
    }
    for (a, b) in [(1, 3), (2, 2), (2, 3), (3, 3), (3, 4), (4, 4), (2, 6)] {
        graphs.push((format!("K_{a},{b}"), complete_bipartite(a, b)));
    }
    for n in (3..=15).step_by(2) {
        graphs.push((format!("C_{n}"), cycle(n)));
    }
    graphs.push(("petersen".into(), petersen()));
    for seed in 0..20u64 {
        let n = 8 + (seed as usize % 13);
        let p = 0.25 + 0.05 * (seed % 8) as f64;
        graphs.push((format!("gnp({n},{p:.2},{seed})"), gnp(n, p, seed)));
    }
    let mut checked = 0;
    let mut worst = f64::INFINITY;
    for (name, g) in &graphs {
        if g.m() == 0 {
            continue;
        }
        let r = check_surplus_bound(name, g, &settings).map_err(|e| e.to_string())?;
        ensure(r.skipped.is_none(), || format!("{name}: skipped ({:?})", r.skipped))?;
        ensure(r.margin >= -1e-9, || format!("{name}: margin {}", r.margin))?;
        worst = worst.min(r.margin);
        checked += 1;
    }
    let mut constructed = 0;
    for reports in construction_reports {
        let r = reports
            .iter()
            .find(|r| r.name.starts_with("surplus_bound["))
            .ok_or("constructed instance without a surplus check")?;
        ensure(r.margin >= -1e-9, || format!("{}: margin {}", r.name, r.margin))?;
        worst = worst.min(r.margin);
        constructed += 1;
    }
    ensure(constructed >= 10, || format!("only {constructed} constructed instances"))?;
    ensure(checked + constructed >= 50, || format!("only {} graphs", checked + constructed))?;
    within(Duration::from_secs(600), start)?;
    Ok(format!(
        "{} graphs ({constructed} constructed), smallest margin {worst:.4} ({:?})",
        checked + constructed,
        start.elapsed()
    ))
}

fn identity_bound(construction_reports: &[Vec<CheckReport>]) -> Outcome {
    let mut count = 0;
    let mut worst = f64::INFINITY;
    for reports in construction_reports {
        let r = reports
            .iter()
            .find(|r| r.name.starts_with("kappa_identity_bound"))
            .ok_or("missing κ report")?;
        ensure(r.skipped.is_none(), || format!("{}: solver did not converge", r.name))?;
        ensure(r.lhs <= r.rhs + 1e-4, || format!("{}: κ {} vs {}", r.name, r.lhs, r.rhs))?;
        worst = worst.min(r.margin);
        count += 1;
    }
    Ok(format!("{count} constructions, smallest margin {worst:.2e}"))
}

fn coloring_exactness() -> Outcome {
    for n in 3..=8 {
        let g = complete(n);
        let res = chi_vec_upper(&g, default_rank(&g), 1, &Schedule::default()).map_err(|e| e.to_string())?;
        ensure(res.converged && (res.kappa_upper - n as f64).abs() < 1e-3, || {
            format!("K_{n}: κ {}", res.kappa_upper)
        })?;
        ensure(res.kappa_upper - res.kappa_spectral_lower < 1e-3, || {
            format!("K_{n}: sandwich open {} .. {}", res.kappa_spectral_lower, res.kappa_upper)
        })?;
    }
    let bipartite = [
        complete_bipartite(3, 3),
        complete_bipartite(2, 5),
        cycle(6),
        cycle(12),
        path(9),
    ];
    for g in &bipartite {
        let res = chi_vec_upper(g, default_rank(g), 1, &Schedule::default()).map_err(|e| e.to_string())?;
        ensure(res.converged && (res.kappa_upper - 2.0).abs() <= 1e-6, || {
            format!("bipartite graph on {} vertices: κ {}", g.n(), res.kappa_upper)
        })?;
    }
    Ok("K_3..K_8 within 1e-3 (spectral sandwich closed), 5 bipartite graphs within 1e-6".into())
}

fn rounding_calibration() -> Outcome {
    let edge = Graph::from_edges(2, [(0, 1)]).unwrap();
    let trials = 100_000;
    for frac in [0.55, 0.7, 0.9] {
        let theta: f64 = frac * PI;
        let e = Embedding::new(vec![vec![1.0, 0.0], vec![theta.cos(), theta.sin()]], &edge)
            .map_err(|e| e.to_string())?;
        let s = hyperplane_round(&e, &edge, trials, 31).map_err(|e| e.to_string())?;
        let sigma = (frac * (1.0 - frac) / trials as f64).sqrt();
        ensure((s.mean - frac).abs() <= 3.0 * sigma, || {
            format!("θ = {frac}π: frequency {} vs {frac}", s.mean)
        })?;
    }
    let graphs = [
        complete(4),
        complete(7),
        complete_bipartite(3, 4),
        cycle(5),
        cycle(9),
        petersen(),
        path(5),
        gnp(12, 0.4, 1),
        gnp(14, 0.3, 2),
        gnp(16, 0.5, 3),
    ];
    for (i, g) in graphs.iter().enumerate() {
        let res = chi_vec_upper(g, default_rank(g), 2, &Schedule::default()).map_err(|e| e.to_string())?;
        let want = expected_hyperplane_cut(&res.embedding, g);
        let s = hyperplane_round(&res.embedding, g, 20_000, 40 + i as u64).map_err(|e| e.to_string())?;
        // some embeddings give every hyperplane the same cut
        ensure((s.mean - want).abs() <= 3.0 * s.stderr + 1e-9, || {
            format!("graph {i}: mean {} vs expected {want} (se {})", s.mean, s.stderr)
        })?;
    }
    Ok("single edges at 0.55π, 0.7π, 0.9π and 10 graphs within 3σ".into())
}

fn opt_c_bound() -> Outcome {
    let start = Instant::now();
    let (theta, epsilon) = (2.0 * PI / 3.0, 0.2);
    let d = choose_dimension(theta, epsilon).map_err(|e| e.to_string())?;
    let reports = check_hemisphere_optimality(d, theta, 1_000_000, 17, &[], Some(epsilon))
        .map_err(|e| e.to_string())?;
    let r = reports
        .iter()
        .find(|r| r.name == "hemisphere_cut_bound")
        .ok_or("missing bound report")?;
    ensure(r.required && r.pass, || {
        format!("cut ratio {} vs {} (tol {})", r.lhs, r.rhs, r.tolerance)
    })?;
    within(Duration::from_secs(60), start)?;
    Ok(format!(
        "d = {d}: hemisphere ratio {:.4} ≤ θ/π + 2ε = {:.4} ({:?})",
        r.lhs,
        r.rhs,
        start.elapsed()
    ))
}

fn hemisphere_optimality() -> Outcome {
    let d = 3;
    let theta = 2.0 * PI / 3.0;
    let partition = partition_sphere(d, 0.5, PartitionLimits::default()).map_err(|e| e.to_string())?;
    let mut rng = substream(77, Stream::Experiment, 0);
    let mut candidates = vec![
        ("cap_0.25".to_string(), SideSet::cap_of_measure(unit_vector(&mut rng, d), 0.25).unwrap()),
        ("cap_0.4".to_string(), SideSet::cap_of_measure(unit_vector(&mut rng, d), 0.4).unwrap()),
    ];
    for k in 0..3 {
        let caps = (0..2)
            .map(|_| (unit_vector(&mut rng, d), rng.random_range(0.4..1.4)))
            .collect();
        candidates.push((format!("two_caps_{k}"), SideSet::CapUnion(caps)));
    }
    for k in 0..5 {
        let red = (0..partition.n()).map(|_| rng.random::<bool>()).collect();
        candidates.push((
            format!("cells_{k}"),
            SideSet::CellColoring {
                partition: &partition,
                red,
            },
        ));
    }
    let reports = check_hemisphere_optimality(d, theta, 1_000_000, 23, &candidates, None)
        .map_err(|e| e.to_string())?;
    for r in &reports {
        ensure(r.pass, || format!("{}: margin {} < -{}", r.name, r.margin, r.tolerance))?;
    }
    let closest = reports.iter().map(|r| r.margin).fold(f64::INFINITY, f64::min);
    Ok(format!("{} alternatives, smallest lead {closest:.4}", reports.len()))
}

fn numerical_lemma() -> Outcome {
    let start = Instant::now();
    let reports = check_numerical_lemma(&open_grid(1e-3, 1.0 - 1e-3, 1000)).map_err(|e| e.to_string())?;
    for r in &reports {
        ensure(r.pass && r.margin >= 0.0, || format!("{}: margin {}", r.name, r.margin))?;
    }
    within(Duration::from_secs(1), start)?;
    let smallest = reports.iter().map(|r| r.margin).fold(f64::INFINITY, f64::min);
    Ok(format!("1000 grid points, smallest margin {smallest:.3e} ({:?})", start.elapsed()))
}

fn naive_maxcut(g: &Graph) -> usize {
    (0u32..1 << g.n())
        .map(|mask| {
            g.edges()
                .iter()
                .filter(|&&(u, v)| (mask >> u & 1) != (mask >> v & 1))
                .count()
        })
        .max()
        .unwrap()
}

fn oracle_equivalence() -> Outcome {
    for seed in 0..100u64 {
        let n = 2 + (seed as usize % 15);
        let g = gnp(n, 0.45, 1000 + seed);
        let exact = maxcut_exact(&g, 30).map_err(|e| e.to_string())?.value;
        ensure(exact == naive_maxcut(&g), || format!("seed {seed}: mismatch"))?;
    }
    let mut worst: f64 = 0.0;
    for i in 0..1000 {
        let phi = PI * i as f64 / 999.0;
        worst = worst.max((cap_measure(2, phi).unwrap() - phi / PI).abs());
        worst = worst.max((cap_measure(3, phi).unwrap() - (1.0 - phi.cos()) / 2.0).abs());
    }
    ensure(worst <= 1e-10, || format!("cap measure error {worst}"))?;
    Ok(format!("100 random graphs agree; cap measure max error {worst:.1e}"))
}

fn ratio_sweep_check() -> Outcome {
    let summary = ratio_sweep(
        &[
            Family::Complete((3..=11).collect()),
            Family::Constructed {
                theta: 0.7 * PI,
                epsilon: 0.2,
                d: Some(2),
                gamma: Some(0.3),
            },
            Family::Constructed {
                theta: 2.0 * PI / 3.0,
                epsilon: 0.1,
                d: Some(3),
                gamma: Some(1.1),
            },
        ],
        &CheckSettings::default(),
    )
    .map_err(|e| e.to_string())?;
    let mut complete_count = 0;
    for r in &summary.records {
        if let Some(n) = r.graph.strip_prefix("K_").and_then(|s| s.parse::<i64>().ok()) {
            // odd n: 2n/(n-1); even n: the surplus is n/4 and the ratio is 2
            let want = if n % 2 == 1 { Ratio::new(2 * n, n - 1) } else { Ratio::from_integer(2) };
            ensure(r.ratio_exact == Some(want), || format!("{}: {:?} vs {want}", r.graph, r.ratio_exact))?;
            complete_count += 1;
        } else {
            ensure(r.mc_exact, || format!("{}: heuristic MaxCut", r.graph))?;
            ensure((r.ratio - r.recomputed_ratio()).abs() < 1e-12, || format!("{}: ratio drift", r.graph))?;
        }
    }
    let constructed: Vec<String> = summary
        .records
        .iter()
        .filter(|r| r.graph.starts_with("G("))
        .map(|r| format!("{:.3} [{}]", r.ratio, r.kappa_source.as_str()))
        .collect();
    ensure(constructed.len() == 2, || "missing constructed records".into())?;
    Ok(format!(
        "{complete_count} complete graphs exact; constructed ratios {}",
        constructed.join(", ")
    ))
}

fn main() {
    let start = Instant::now();
    let settings = CheckSettings::default();
    let construction_reports: Vec<Vec<CheckReport>> = small_constructions()
        .into_iter()
        .map(|(theta, epsilon, ov)| check_construction(theta, epsilon, ov, None, &settings).expect("construction check"))
        .collect();
    let mut large = construction_reports.clone();
    large.push(
        check_construction(
            2.0 * PI / 3.0,
            0.3,
            Overrides {
                d: Some(3),
                ..Default::default()
            },
            None,
            &settings,
        )
        .expect("construction check"),
    );
    let criteria: Vec<Criterion> = vec![
        ("edwards tightness on odd complete graphs", Box::new(edwards_tightness)),
        ("surplus lower bound from vector colorings", Box::new(|| surplus_bound_suite(&construction_reports))),
        ("identity-embedding bound on constructions", Box::new(|| identity_bound(&large))),
        ("vector chromatic number where known", Box::new(coloring_exactness)),
        ("hyperplane rounding calibration", Box::new(rounding_calibration)),
        ("hemisphere cut ratio at the chosen dimension", Box::new(opt_c_bound)),
        ("hemisphere beats alternative sets", Box::new(hemisphere_optimality)),
        ("arcsine estimate on the delta grid", Box::new(numerical_lemma)),
        ("exact MaxCut and cap measure oracles", Box::new(oracle_equivalence)),
        ("ratio sweep", Box::new(ratio_sweep_check)),
    ];
    let mut failures = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let outcome = catch_unwind(AssertUnwindSafe(run)).unwrap_or_else(|_| Err("panicked".into()));
        match outcome {
            Ok(detail) => println!("acceptance {:>2} PASS  {name}: {detail}", i + 1),
            Err(why) => {
                failures += 1;
                println!("acceptance {:>2} FAIL  {name}: {why}", i + 1);
            }
        }
    }
    println!(
        "acceptance: {} passed, {failures} failed ({:?})",
        criteria.len() - failures,
        start.elapsed()
    );
    if failures > 0 {
        std::process::exit(1);
    }
}
