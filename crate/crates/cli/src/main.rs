//! `edgeh2` — H2 analysis of weighted, time-scaled consensus networks from
//! plain-text graph files: closed-form norms with a Lyapunov oracle, the
//! minimum-H2 spanning tree, edge-addition planning, a consistency battery,
//! and Monte Carlo estimation.

mod parse;
mod verify;

use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;

use edgeh2_core::{
    brute_force_min_tree, find_spanning_tree, h2_closed_form, h2_lyapunov,
    min_h2_spanning_tree_from, rank_candidates, CandidateEdge, Error as CoreError, Graph,
    NoiseModel, OutputModel, SimConfig, SpanningTree,
};

#[derive(Parser)]
#[command(name = "edgeh2", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum ModelArg {
    Full,
    Tree,
}

impl From<ModelArg> for OutputModel {
    fn from(m: ModelArg) -> Self {
        match m {
            ModelArg::Full => OutputModel::Full,
            ModelArg::Tree => OutputModel::Tree,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum FormatArg {
    Table,
    Csv,
    Json,
}

#[derive(Args)]
struct NoiseArgs {
    /// Process-noise intensity sigma_omega
    #[arg(long = "sigma-omega", default_value_t = 1.0)]
    sigma_omega: f64,
    /// Edge measurement-noise intensity sigma_v
    #[arg(long = "sigma-v", default_value_t = 1.0)]
    sigma_v: f64,
}

#[derive(Subcommand)]
enum Command {
    /// Squared H2 norm of a graph file with its weight/time-scale split
    H2 {
        file: String,
        #[arg(long, value_enum, default_value = "tree")]
        model: ModelArg,
        /// Spanning tree as "u,v;u,v;..." edge pairs, or "auto"
        #[arg(long, default_value = "auto")]
        tree: String,
        #[command(flatten)]
        noise: NoiseArgs,
        /// Also run the Lyapunov oracle and print the relative deviation
        #[arg(long)]
        oracle: bool,
        #[arg(long, value_enum, default_value = "table")]
        format: FormatArg,
    },
    /// Minimum-H2 spanning tree via greedy frontier expansion
    Mst {
        file: String,
        #[command(flatten)]
        noise: NoiseArgs,
        /// Seed vertex label for the greedy expansion (default: first declared)
        #[arg(long = "seed-vertex")]
        seed_vertex: Option<u64>,
        /// Cross-check the greedy value against exhaustive enumeration
        #[arg(long = "brute-force")]
        brute_force: bool,
        #[arg(long, value_enum, default_value = "table")]
        format: FormatArg,
    },
    /// Rank candidate edge additions to a tree by their H2 effect
    Plan {
        file: String,
        /// Base spanning tree as "u,v;..." when the file carries extra edges
        #[arg(long)]
        tree: Option<String>,
        /// Candidates as "u,v,weight;u,v,weight;..."
        #[arg(long)]
        candidates: String,
        #[arg(long, value_enum, default_value = "tree")]
        model: ModelArg,
        /// How many edges to pick greedily (default: all candidates)
        #[arg(short)]
        k: Option<usize>,
        #[command(flatten)]
        noise: NoiseArgs,
        #[arg(long, value_enum, default_value = "table")]
        format: FormatArg,
    },
    /// Run the cross-validation battery (closed forms vs oracles)
    Verify {
        file: String,
        /// Number of random instances per check family
        #[arg(long, default_value_t = 20)]
        trials: usize,
        /// Spanning tree to verify against, as "u,v;..."
        #[arg(long)]
        tree: Option<String>,
        #[command(flatten)]
        noise: NoiseArgs,
    },
    /// Monte Carlo estimate of the squared H2 norm
    Simulate {
        file: String,
        #[arg(long, value_enum, default_value = "tree")]
        model: ModelArg,
        #[arg(long, default_value = "auto")]
        tree: String,
        #[arg(long, default_value_t = 1e-3)]
        dt: f64,
        #[arg(long, default_value_t = 100_000)]
        steps: usize,
        #[arg(long = "burn-in", default_value_t = 10_000)]
        burn_in: usize,
        #[arg(long, default_value_t = 50)]
        trials: usize,
        #[arg(long, default_value_t = 42)]
        seed: u64,
        #[command(flatten)]
        noise: NoiseArgs,
        #[arg(long, value_enum, default_value = "table")]
        format: FormatArg,
    },
}

const EXIT_PARSE: u8 = 1;
const EXIT_DISCONNECTED: u8 = 2;
const EXIT_NUMERIC: u8 = 3;
const EXIT_VERIFY: u8 = 4;

fn main() -> ExitCode {
    match run() {
        Ok(()) => ExitCode::SUCCESS,
        Err(code) => ExitCode::from(code),
    }
}

fn fail(code: u8, msg: impl std::fmt::Display) -> u8 {
    eprintln!("error: {msg}");
    code
}

fn core_exit(e: CoreError) -> u8 {
    let code = match e {
        CoreError::Disconnected => EXIT_DISCONNECTED,
        _ => EXIT_NUMERIC,
    };
    fail(code, e)
}

fn load_graph(path: &str) -> Result<Graph, u8> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| fail(EXIT_PARSE, format!("{path}: {e}")))?;
    parse::parse_graph_text(&text).map_err(|e| fail(EXIT_PARSE, format!("{path}: {e}")))
}

fn parse_pairs(s: &str) -> Result<Vec<(u64, u64)>, String> {
    s.split(';')
        .filter(|p| !p.trim().is_empty())
        .map(|pair| {
            let parts: Vec<&str> = pair.split(',').map(str::trim).collect();
            if parts.len() != 2 {
                return Err(format!("expected 'u,v', got '{pair}'"));
            }
            let u = parts[0].parse().map_err(|_| format!("bad vertex '{}'", parts[0]))?;
            let v = parts[1].parse().map_err(|_| format!("bad vertex '{}'", parts[1]))?;
            Ok((u, v))
        })
        .collect()
}

fn tree_from_arg(g: &Graph, arg: &str) -> Result<SpanningTree, u8> {
    if arg == "auto" {
        return find_spanning_tree(g).map_err(core_exit);
    }
    let pairs = parse_pairs(arg).map_err(|e| fail(EXIT_NUMERIC, format!("--tree: {e}")))?;
    let mut positions = Vec::with_capacity(pairs.len());
    for (u, v) in pairs {
        let iu = g.index_of(u).map_err(core_exit)?;
        let iv = g.index_of(v).map_err(core_exit)?;
        let pos = g.edge_position(iu, iv).ok_or_else(|| {
            fail(EXIT_NUMERIC, format!("--tree: edge {u}-{v} not in the graph"))
        })?;
        positions.push(pos);
    }
    SpanningTree::from_edges(g, &positions).map_err(core_exit)
}

fn parse_candidates(s: &str) -> Result<Vec<CandidateEdge>, String> {
    s.split(';')
        .filter(|p| !p.trim().is_empty())
        .map(|triple| {
            let parts: Vec<&str> = triple.split(',').map(str::trim).collect();
            if parts.len() != 3 {
                return Err(format!("expected 'u,v,weight', got '{triple}'"));
            }
            Ok(CandidateEdge {
                u: parts[0].parse().map_err(|_| format!("bad vertex '{}'", parts[0]))?,
                v: parts[1].parse().map_err(|_| format!("bad vertex '{}'", parts[1]))?,
                weight: parts[2].parse().map_err(|_| format!("bad weight '{}'", parts[2]))?,
            })
        })
        .collect()
}

fn edge_labels(g: &Graph, t: &SpanningTree) -> Vec<(u64, u64)> {
    t.tree_edges
        .iter()
        .map(|&p| {
            let (u, v, _) = g.edge(p);
            (g.label_of(u), g.label_of(v))
        })
        .collect()
}

fn edges_str(edges: &[(u64, u64)]) -> String {
    edges
        .iter()
        .map(|(u, v)| format!("{u},{v}"))
        .collect::<Vec<_>>()
        .join(";")
}

fn noise_model(args: &NoiseArgs) -> Result<NoiseModel, u8> {
    NoiseModel::structured(args.sigma_omega, args.sigma_v).map_err(core_exit)
}

fn run() -> Result<(), u8> {
    match Cli::parse().command {
        Command::H2 {
            file,
            model,
            tree,
            noise,
            oracle,
            format,
        } => cmd_h2(&file, model.into(), &tree, &noise, oracle, format),
        Command::Mst {
            file,
            noise,
            seed_vertex,
            brute_force,
            format,
        } => cmd_mst(&file, &noise, seed_vertex, brute_force, format),
        Command::Plan {
            file,
            tree,
            candidates,
            model,
            k,
            noise,
            format,
        } => cmd_plan(&file, tree.as_deref(), &candidates, model.into(), k, &noise, format),
        Command::Verify {
            file,
            trials,
            tree,
            noise,
        } => cmd_verify(&file, trials, tree.as_deref(), &noise),
        Command::Simulate {
            file,
            model,
            tree,
            dt,
            steps,
            burn_in,
            trials,
            seed,
            noise,
            format,
        } => cmd_simulate(
            &file,
            model.into(),
            &tree,
            SimConfig {
                dt,
                burn_in_steps: burn_in,
                sample_steps: steps,
                trials,
                seed,
            },
            &noise,
            format,
        ),
    }
}

fn emit(format: FormatArg, value: serde_json::Value, table: String, csv: String) {
    match format {
        FormatArg::Table => println!("{table}"),
        FormatArg::Csv => println!("{csv}"),
        FormatArg::Json => println!("{}", serde_json::to_string_pretty(&value).unwrap()),
    }
}

fn cmd_h2(
    file: &str,
    model: OutputModel,
    tree_arg: &str,
    noise_args: &NoiseArgs,
    oracle: bool,
    format: FormatArg,
) -> Result<(), u8> {
    let g = load_graph(file)?;
    let noise = noise_model(noise_args)?;
    let t = tree_from_arg(&g, tree_arg)?;
    let report = h2_closed_form(&g, &t, &noise, model).map_err(core_exit)?;
    let (wt, ts) = (report.weight_term.unwrap(), report.timescale_term.unwrap());
    let deviation = if oracle {
        let ly = h2_lyapunov(&g, &t, &noise, model).map_err(core_exit)?;
        Some(
            (report.total_sq - ly.total_sq).abs()
                / report.total_sq.abs().max(ly.total_sq.abs()).max(f64::MIN_POSITIVE),
        )
    } else {
        None
    };
    let tree_edges = edge_labels(&g, &t);
    let mut value = json!({
        "model": report.model.as_str(),
        "method": report.method.as_str(),
        "total_sq": report.total_sq,
        "weight_term": wt,
        "timescale_term": ts,
        "tree": edges_str(&tree_edges),
    });
    let mut table = format!(
        "model:          {}\nmethod:         {}\ntree:           {}\ntotal_sq:       {:.6}\nweight_term:    {:.6}\ntimescale_term: {:.6}",
        report.model.as_str(),
        report.method.as_str(),
        edges_str(&tree_edges),
        report.total_sq,
        wt,
        ts
    );
    let mut csv_header = String::from("model,method,total_sq,weight_term,timescale_term");
    let mut csv_row = format!(
        "{},{},{},{},{}",
        report.model.as_str(),
        report.method.as_str(),
        report.total_sq,
        wt,
        ts
    );
    if let Some(dev) = deviation {
        value["oracle_deviation"] = json!(dev);
        table.push_str(&format!("\noracle_deviation: {dev:.3e}"));
        csv_header.push_str(",oracle_deviation");
        csv_row.push_str(&format!(",{dev}"));
    }
    emit(format, value, table, format!("{csv_header}\n{csv_row}"));
    Ok(())
}

fn cmd_mst(
    file: &str,
    noise_args: &NoiseArgs,
    seed_vertex: Option<u64>,
    brute_force: bool,
    format: FormatArg,
) -> Result<(), u8> {
    let g = load_graph(file)?;
    let noise = noise_model(noise_args)?;
    let seed = match seed_vertex {
        Some(label) => g.index_of(label).map_err(core_exit)?,
        None => 0,
    };
    let (tree, report) = min_h2_spanning_tree_from(&g, &noise, seed).map_err(core_exit)?;
    let tree_edges = edge_labels(&g, &tree);
    let mut value = json!({
        "model": report.model.as_str(),
        "method": report.method.as_str(),
        "total_sq": report.total_sq,
        "weight_term": report.weight_term.unwrap(),
        "timescale_term": report.timescale_term.unwrap(),
        "tree": edges_str(&tree_edges),
    });
    let mut table = format!(
        "tree:           {}\ntotal_sq:       {:.6}\nweight_term:    {:.6}\ntimescale_term: {:.6}",
        edges_str(&tree_edges),
        report.total_sq,
        report.weight_term.unwrap(),
        report.timescale_term.unwrap()
    );
    let mut csv_header = String::from("tree,total_sq,weight_term,timescale_term");
    let mut csv_row = format!(
        "{},{},{},{}",
        edges_str(&tree_edges),
        report.total_sq,
        report.weight_term.unwrap(),
        report.timescale_term.unwrap()
    );
    if brute_force {
        let (_bt, bv) = brute_force_min_tree(&g, &noise).map_err(core_exit)?;
        if (report.total_sq - bv).abs() > 1e-12 {
            return Err(fail(
                EXIT_VERIFY,
                format!("greedy value {} != brute-force value {bv}", report.total_sq),
            ));
        }
        value["brute_force_value"] = json!(bv);
        table.push_str(&format!("\nbrute_force_value: {bv:.6}"));
        csv_header.push_str(",brute_force_value");
        csv_row.push_str(&format!(",{bv}"));
    }
    emit(format, value, table, format!("{csv_header}\n{csv_row}"));
    Ok(())
}

fn cmd_plan(
    file: &str,
    tree_arg: Option<&str>,
    candidates: &str,
    model: OutputModel,
    k: Option<usize>,
    noise_args: &NoiseArgs,
    format: FormatArg,
) -> Result<(), u8> {
    let g = load_graph(file)?;
    let noise = noise_model(noise_args)?;
    let base = match tree_arg {
        Some(arg) => {
            let t = tree_from_arg(&g, arg)?;
            t.as_graph(&g)
        }
        None => g,
    };
    let cands =
        parse_candidates(candidates).map_err(|e| fail(EXIT_NUMERIC, format!("--candidates: {e}")))?;
    let k = k.unwrap_or(cands.len());
    let reports = rank_candidates(&base, &cands, &noise, model, k).map_err(core_exit)?;
    let rows: Vec<serde_json::Value> = reports
        .iter()
        .map(|r| {
            json!({
                "u": r.candidate.u,
                "v": r.candidate.v,
                "weight": r.candidate.weight,
                "cycle": edges_str(&r.cycle_edges),
                "delta_tree_model": r.delta_tree_model,
                "delta_full_weight": r.delta_full_weight,
                "delta_full_timescale": r.delta_full_timescale,
                "delta_full_total": r.delta_full_total,
            })
        })
        .collect();
    let value = json!({
        "model": model.as_str(),
        "method": "closed_form",
        "ranked": rows,
    });
    let mut table = format!(
        "{:<10} {:>8} {:>16} {:>18} {:>20} {:>16}",
        "edge", "weight", "delta_tree", "delta_full_weight", "delta_full_timescale", "delta_full"
    );
    for r in &reports {
        table.push_str(&format!(
            "\n{:<10} {:>8} {:>16.6} {:>18.6} {:>20.6} {:>16.6}",
            format!("{},{}", r.candidate.u, r.candidate.v),
            r.candidate.weight,
            r.delta_tree_model,
            r.delta_full_weight,
            r.delta_full_timescale,
            r.delta_full_total
        ));
    }
    let mut csv = String::from(
        "u,v,weight,cycle,delta_tree_model,delta_full_weight,delta_full_timescale,delta_full_total",
    );
    for r in &reports {
        csv.push_str(&format!(
            "\n{},{},{},{},{},{},{},{}",
            r.candidate.u,
            r.candidate.v,
            r.candidate.weight,
            edges_str(&r.cycle_edges).replace(',', "-"),
            r.delta_tree_model,
            r.delta_full_weight,
            r.delta_full_timescale,
            r.delta_full_total
        ));
    }
    emit(format, value, table, csv);
    Ok(())
}

fn cmd_verify(
    file: &str,
    trials: usize,
    tree_arg: Option<&str>,
    noise_args: &NoiseArgs,
) -> Result<(), u8> {
    let g = load_graph(file)?;
    let noise = noise_model(noise_args)?;
    let tree = match tree_arg {
        Some(arg) => match tree_from_arg(&g, arg) {
            Ok(t) => t,
            Err(_) => {
                println!("FAIL input: supplied tree is not a spanning tree of the graph");
                return Err(EXIT_VERIFY);
            }
        },
        None => find_spanning_tree(&g).map_err(core_exit)?,
    };
    let checks = verify::run_battery(&g, &tree, &noise, trials);
    let mut failures = 0usize;
    for c in &checks {
        let status = if c.pass { "PASS" } else { "FAIL" };
        println!("{status} {} ({})", c.name, c.detail);
        if !c.pass {
            failures += 1;
        }
    }
    println!(
        "{} checks, {} failed",
        checks.len(),
        failures
    );
    if failures > 0 {
        Err(EXIT_VERIFY)
    } else {
        Ok(())
    }
}

fn cmd_simulate(
    file: &str,
    model: OutputModel,
    tree_arg: &str,
    cfg: SimConfig,
    noise_args: &NoiseArgs,
    format: FormatArg,
) -> Result<(), u8> {
    let g = load_graph(file)?;
    let noise = noise_model(noise_args)?;
    let t = tree_from_arg(&g, tree_arg)?;
    let (report, est) =
        edgeh2_core::empirical_h2(&g, &t, &noise, model, &cfg).map_err(core_exit)?;
    let value = json!({
        "model": report.model.as_str(),
        "method": report.method.as_str(),
        "total_sq": report.total_sq,
        "std_error": est.std_error,
        "trials": est.trials,
        "dt": cfg.dt,
        "seed": cfg.seed,
    });
    let table = format!(
        "model:     {}\nmethod:    {}\ntotal_sq:  {:.6}\nstd_error: {:.6}\ntrials:    {}",
        report.model.as_str(),
        report.method.as_str(),
        report.total_sq,
        est.std_error,
        est.trials
    );
    let csv = format!(
        "model,method,total_sq,std_error,trials\n{},{},{},{},{}",
        report.model.as_str(),
        report.method.as_str(),
        report.total_sq,
        est.std_error,
        est.trials
    );
    emit(format, value, table, csv);
    Ok(())
}
