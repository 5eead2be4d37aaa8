//! Command-line surface over the library: build duals, run checks, drive
//! the curtain pipeline, and emit deterministic JSON reports.
//!
//! Exit codes: 0 pass, 1 bound violated, 2 input error, 3 cap exceeded.

use clap::{Args, Parser, Subcommand};
use std::process::ExitCode;
use std::sync::Arc;
use walldual::chains::{self, ChainSystem, SearchCaps};
use walldual::curtains::{build_curtains, universal_comparison, BuildBudget};
use walldual::dual::{self, DualSpace};
use walldual::error::Error;
use walldual::geometry;
use walldual::io as wio;
use walldual::paths;
use walldual::report::{rat_str, CheckReport, RunConfig};
use walldual::wallspace::Orientation;

#[derive(Parser)]
#[command(name = "walldual", version, about = "dual metric spaces for finite sets with walls")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct InputArgs {
    /// Input file (wallspace JSON, or graph edge list / JSON)
    #[arg(long)]
    input: String,
    /// System: all_subsets | all_chains
    #[arg(long, default_value = "all_chains")]
    system: String,
    /// Output file (stdout when omitted)
    #[arg(long)]
    out: Option<String>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Cap on enumerated dual vertices
    #[arg(long, default_value_t = dual::DEFAULT_VERTEX_CAP)]
    vertex_cap: usize,
}

#[derive(Subcommand)]
enum Command {
    /// Build the dual space of a wallspace and write it as JSON
    Build(InputArgs),
    /// Run a named check against a wallspace dual
    Check {
        /// median_graph | median_axioms | helly | four_point |
        /// rough_geodesic | bicombing | coarse_injectivity | gluable |
        /// l_separated | gates
        name: String,
        #[command(flatten)]
        input: InputArgs,
        /// Gluing constant m
        #[arg(long, default_value_t = 0)]
        m: usize,
        /// Separation constant L
        #[arg(long, short = 'L', default_value_t = 0)]
        l: usize,
        #[arg(long, default_value_t = 4)]
        family_cap: usize,
        #[arg(long, default_value_t = 100_000)]
        quadruple_cap: usize,
        #[arg(long, default_value_t = 100_000)]
        budget: usize,
        #[arg(long, default_value_t = 12)]
        chain_cap: usize,
    },
    /// Synthesize curtains from a graph, grade them, and compare metrics
    Curtains {
        #[command(flatten)]
        input: InputArgs,
        /// Largest contraction constant D to search
        #[arg(long, default_value_t = 3)]
        d_max: usize,
        /// Number of grading levels (default: graph diameter)
        #[arg(long)]
        r_max: Option<usize>,
        /// Geodesic enumeration budget
        #[arg(long, default_value_t = 4_000)]
        budget: usize,
    },
    /// Distance between two points (indices or sign strings) in the dual
    Dist {
        #[command(flatten)]
        input: InputArgs,
        #[arg(long)]
        from: String,
        #[arg(long)]
        to: String,
    },
    /// Normal wall path between two points, as sign strings
    Path {
        #[command(flatten)]
        input: InputArgs,
        #[arg(long)]
        from: String,
        #[arg(long)]
        to: String,
    },
    /// Run the checks named in a JSON config and emit a combined report
    Report {
        #[arg(long)]
        config: String,
    },
}

fn main() -> ExitCode {
    if let Ok(threads) = std::env::var("WALLDUAL_THREADS") {
        if let Ok(n) = threads.parse::<usize>() {
            let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
        }
    }
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            match e {
                Error::StateExplosion { .. } | Error::SearchCap { .. } => ExitCode::from(3),
                _ => ExitCode::from(2),
            }
        }
    }
}

fn read_input(path: &str) -> Result<String, Error> {
    std::fs::read_to_string(path).map_err(|e| Error::Invalid(format!("cannot read {path}: {e}")))
}

fn emit(out: &Option<String>, text: &str) -> Result<(), Error> {
    match out {
        Some(path) => std::fs::write(path, text).map_err(|e| Error::Invalid(format!("cannot write {path}: {e}"))),
        None => {
            println!("{text}");
            Ok(())
        }
    }
}

fn system_of(name: &str) -> Result<ChainSystem, Error> {
    match name {
        "all_subsets" => Ok(ChainSystem::all_subsets()),
        "all_chains" => Ok(ChainSystem::all_chains()),
        other => Err(Error::Invalid(format!(
            "unknown system {other:?} (expected all_subsets or all_chains)"
        ))),
    }
}

fn load_dual(args: &InputArgs) -> Result<DualSpace, Error> {
    let ws = wio::parse_wallspace(&read_input(&args.input)?)?;
    let cs = system_of(&args.system)?;
    DualSpace::enumerate(Arc::new(ws), cs, args.vertex_cap)
}

fn resolve_vertex(d: &DualSpace, spec: &str) -> Result<Orientation, Error> {
    if let Ok(idx) = spec.parse::<usize>() {
        return d.ws.principal_ultrafilter(idx);
    }
    let o = Orientation::from_sign_string(spec)
        .ok_or_else(|| Error::Invalid(format!("{spec:?} is neither a point index nor a sign string")))?;
    if o.signs.len() != d.ws.n_walls() {
        return Err(Error::Invalid(format!(
            "sign string {spec:?} has wrong length (walls: {})",
            d.ws.n_walls()
        )));
    }
    Ok(o)
}

fn run(cli: Cli) -> Result<ExitCode, Error> {
    match cli.command {
        Command::Build(args) => {
            let d = load_dual(&args)?;
            emit(&args.out, &wio::dual_to_json(&d).to_string())?;
            Ok(ExitCode::SUCCESS)
        }
        Command::Check {
            name,
            input,
            m,
            l,
            family_cap,
            quadruple_cap,
            budget,
            chain_cap,
        } => {
            let report = run_check(&name, &input, m, l, family_cap, quadruple_cap, budget, chain_cap)?;
            let pass = report.pass;
            emit(&input.out, &serde_json::to_string_pretty(&report).unwrap())?;
            Ok(if pass { ExitCode::SUCCESS } else { ExitCode::from(1) })
        }
        Command::Curtains {
            input,
            d_max,
            r_max,
            budget,
        } => {
            let g = Arc::new(wio::parse_graph(&read_input(&input.input)?)?);
            let cw = build_curtains(
                g.clone(),
                1..=d_max,
                BuildBudget {
                    total_geodesics: budget,
                    ..BuildBudget::default()
                },
            )?;
            let mut out = wio::curtains_to_json(&cw);
            if cw.curtains.is_empty() {
                out["note"] = serde_json::json!("no contracting geodesics of length 20D: curtain set is empty");
            } else {
                let gs = cw.assemble_graded(r_max);
                let n = g.n_vertices();
                let mut pairs = Vec::new();
                for s in 0..n {
                    for t in (s + 1)..n {
                        if (s + t) % ((n / 24).max(1)) == 0 {
                            pairs.push((s, t));
                        }
                    }
                }
                pairs.truncate(512);
                let cmp = universal_comparison(&cw, &gs, &pairs);
                out["levels"] = serde_json::json!(gs.levels.len());
                out["lambda_total"] = serde_json::json!(rat_str(&gs.lambda_total));
                out["dist_diameter"] = serde_json::json!(rat_str(&cmp.dist_diameter));
                out["max_geodesic_slack"] = serde_json::json!(rat_str(&cmp.max_geodesic_slack));
                out["comparison"] = serde_json::json!(cmp
                    .rows
                    .iter()
                    .map(|r| serde_json::json!({
                        "s": r.s,
                        "t": r.t,
                        "graph_dist": r.graph_dist,
                        "graded_dist": rat_str(&r.graded_dist),
                    }))
                    .collect::<Vec<_>>());
            }
            emit(&input.out, &out.to_string())?;
            Ok(ExitCode::SUCCESS)
        }
        Command::Dist { input, from, to } => {
            let d = load_dual(&input)?;
            let x = resolve_vertex(&d, &from)?;
            let y = resolve_vertex(&d, &to)?;
            let value = chains::dist(&d.system, &d.ws, &x, &y);
            emit(&input.out, &serde_json::json!({ "dist": value }).to_string())?;
            Ok(ExitCode::SUCCESS)
        }
        Command::Path { input, from, to } => {
            let d = load_dual(&input)?;
            let x = resolve_vertex(&d, &from)?;
            let y = resolve_vertex(&d, &to)?;
            let p = paths::normal_wall_path(&d.ws, &d.system, &x, &y)?;
            let steps: Vec<String> = p.steps.iter().map(|s| s.sign_string()).collect();
            emit(&input.out, &serde_json::json!({ "steps": steps }).to_string())?;
            Ok(ExitCode::SUCCESS)
        }
        Command::Report { config } => {
            let cfg: RunConfig = serde_json::from_str(&read_input(&config)?)
                .map_err(|e| Error::Invalid(format!("config parse error: {e}")))?;
            let mut reports = Vec::new();
            let mut all_pass = true;
            let args = InputArgs {
                input: cfg.input.clone(),
                system: cfg.system.clone(),
                out: None,
                seed: cfg.seed,
                vertex_cap: cfg.caps.vertex_cap,
            };
            for name in &cfg.checks {
                let r = run_check(
                    name,
                    &args,
                    0,
                    0,
                    cfg.caps.family_cap,
                    cfg.caps.quadruple_cap,
                    cfg.caps.sample_budget,
                    cfg.caps.chain_len_cap,
                )?;
                all_pass &= r.pass;
                reports.push(r);
            }
            let combined = serde_json::json!({
                "config": cfg,
                "reports": reports,
            });
            emit(&cfg.output, &serde_json::to_string_pretty(&combined).unwrap())?;
            Ok(if all_pass { ExitCode::SUCCESS } else { ExitCode::from(1) })
        }
    }
}

#[allow(clippy::too_many_arguments)]
fn run_check(
    name: &str,
    input: &InputArgs,
    m: usize,
    l: usize,
    family_cap: usize,
    quadruple_cap: usize,
    budget: usize,
    chain_cap: usize,
) -> Result<CheckReport, Error> {
    let caps = SearchCaps {
        chain_len: chain_cap,
        member_budget: budget,
        pair_budget: budget,
    };
    match name {
        "median_graph" => {
            let d = load_dual(input)?;
            let r = dual::verify_median_graph(&d);
            Ok(CheckReport::new("median_graph", r.passed)
                .seed(input.seed)
                .cap("triples", r.triples_checked as u64))
        }
        "median_axioms" => {
            let d = load_dual(input)?;
            let ws = &d.ws;
            let mut pass = true;
            let vs = d.vertices();
            for a in vs {
                for b in vs {
                    pass &= &ws.median(a, a, b) == a;
                    for c in vs {
                        let mu = ws.median(a, b, c);
                        pass &= mu == ws.median(b, c, a) && ws.is_consistent(&mu);
                    }
                }
            }
            Ok(CheckReport::new("median_axioms", pass).seed(input.seed))
        }
        "helly" => {
            let d = load_dual(input)?;
            let r = dual::verify_helly(&d, family_cap, budget, input.seed);
            Ok(CheckReport::new("helly", r.passed)
                .bound_int(0)
                .observed_int(if r.passed { 0 } else { 1 })
                .seed(input.seed)
                .cap("family_cap", family_cap as u64)
                .cap("tuple_budget", budget as u64))
        }
        "coarse_injectivity" => {
            let d = load_dual(input)?;
            let r = geometry::check_coarse_injectivity(&d, m, family_cap, budget, input.seed);
            Ok(CheckReport::new("coarse_injectivity", r.passed)
                .bound_int(2 * m as i64)
                .seed(input.seed)
                .cap("family_cap", family_cap as u64))
        }
        "four_point" => {
            let d = load_dual(input)?;
            let bound = 22 * (l + m + 1);
            let r = geometry::four_point_delta_dual(&d, Some(bound), quadruple_cap, input.seed);
            Ok(CheckReport::new("four_point", r.passed.unwrap_or(true))
                .bound_int(bound as i64)
                .observed_int(r.delta)
                .seed(input.seed)
                .cap("quadruple_cap", quadruple_cap as u64)
                .witness(serde_json::json!(r.worst_quadruple)))
        }
        "gluable" => {
            let d = load_dual(input)?;
            let r = chains::check_gluable(&d.system, &d.ws, m, &caps)?;
            let mut report = CheckReport::new("gluable", r.passed)
                .bound_int(m as i64)
                .seed(input.seed)
                .cap("chain_len", caps.chain_len as u64)
                .cap("pairs_checked", r.pairs_checked as u64);
            if let Some((c1, c2)) = r.counterexample {
                report = report.witness(serde_json::json!({ "c1": c1, "c2": c2 }));
            }
            Ok(report)
        }
        "l_separated" => {
            let d = load_dual(input)?;
            let r = chains::check_l_separated(&d.system, &d.ws, l, &caps)?;
            Ok(CheckReport::new("l_separated", r.passed)
                .bound_int(l as i64)
                .observed_int(r.longest_crossing as i64)
                .seed(input.seed)
                .cap("chain_len", caps.chain_len as u64))
        }
        "rough_geodesic" => {
            let d = load_dual(input)?;
            let mut pass = true;
            let mut max_defect = 0usize;
            for i in 0..d.n_vertices() {
                for j in 0..d.n_vertices() {
                    let p = paths::normal_wall_path(&d.ws, &d.system, d.vertex(i), d.vertex(j))?;
                    let r = paths::check_rough_geodesic(&d.ws, &d.system, &p, m);
                    pass &= r.passed;
                    max_defect = max_defect.max(r.max_step_defect);
                }
            }
            Ok(CheckReport::new("rough_geodesic", pass)
                .bound_int(3 * m as i64)
                .observed_int(max_defect as i64)
                .seed(input.seed))
        }
        "bicombing" => {
            let d = load_dual(input)?;
            use rand::Rng;
            use rand::SeedableRng;
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(input.seed);
            let n = d.n_vertices();
            let quads: Vec<_> = (0..budget.min(500))
                .map(|_| {
                    (
                        d.vertex(rng.gen_range(0..n)).clone(),
                        d.vertex(rng.gen_range(0..n)).clone(),
                        d.vertex(rng.gen_range(0..n)).clone(),
                        d.vertex(rng.gen_range(0..n)).clone(),
                    )
                })
                .collect();
            let r = paths::check_bicombing(&d.ws, &d.system, &quads, m)?;
            Ok(CheckReport::new("bicombing", r.passed)
                .bound_int(3 * m as i64)
                .observed_int(r.max_excess as i64)
                .seed(input.seed)
                .cap("quadruples", r.quadruples_checked as u64))
        }
        "gates" => {
            let d = load_dual(input)?;
            let ws = &d.ws;
            use rand::Rng;
            use rand::SeedableRng;
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(input.seed);
            let n = d.n_vertices();
            let mut pass = true;
            for _ in 0..200 {
                let k = rng.gen_range(1..=3);
                let targets: Vec<Orientation> =
                    (0..k).map(|_| d.vertex(rng.gen_range(0..n)).clone()).collect();
                let x = d.vertex(rng.gen_range(0..n));
                let hull = dual::PConvexSet::hull(ws.n_walls(), &targets);
                let g1 = dual::gate(ws, &hull, x)?;
                let g2 = dual::gate_via_medians(ws, &targets, x);
                pass &= g1 == g2;
                pass &= dual::gate(ws, &hull, &g1)? == g1;
            }
            Ok(CheckReport::new("gates", pass).seed(input.seed).cap("instances", 200))
        }
        other => Err(Error::Invalid(format!("unknown check {other:?}"))),
    }
}
