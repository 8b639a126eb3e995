//! `dirlap`: command-line front end for the directed Laplacian toolkit.
//!
//! Graphs are Matrix Market coordinate files whose entry `i j w` is the
//! directed edge `i -> j`. Vectors hold one value per line after an
//! optional `%` comment header.

use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Parser, Subcommand, ValueEnum};
use dirlap_core::io::{read_mtx, read_vector, write_mtx, write_vector};
use dirlap_core::vector::{center, norm2, sub};
use dirlap_core::{DirectedLaplacian, Error, ErrorClass, Kind, SparseGraph};
use dirlap_decompose::{find_decomposition_with, DecompositionConfig};
use dirlap_oracle::generators;
use dirlap_reduce_apps::{
    compute_stationary_with, personalized_pagerank_with, solve_full_with, FullConfig, PageRankConfig,
    StationaryConfig,
};
use dirlap_solver::{solve_eulerian_with, ChainSolver, Schedule, SolverConfig};
use dirlap_sparsify::{sparsify_eulerian_with, sparsify_square_with, EulerianConfig, SquareConfig};
use serde_json::{json, Value};

/// Version of the JSON report layout.
const REPORT_VERSION: u32 = 1;

const EXIT_VALIDATION: u8 = 2;
const EXIT_NUMERICAL: u8 = 3;
const EXIT_USAGE: u8 = 64;

#[derive(Parser, Debug)]
#[command(name = "dirlap", version, about = "Sparsifiers and solvers for directed Laplacians")]
struct Cli {
    /// Seed for every randomized step.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Write a JSON run report to this path.
    #[arg(long, global = true)]
    report: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Sparsify a strongly connected Eulerian graph.
    Sparsify {
        #[arg(long)]
        eps: f64,
        #[arg(long, default_value_t = 0.01)]
        p: f64,
        input: PathBuf,
        output: PathBuf,
    },
    /// Sparsify the square `D − W D⁻¹ W` of a balanced nonnegative matrix `W`.
    SparsifySquare {
        #[arg(long)]
        eps: f64,
        #[arg(long, default_value_t = 0.01)]
        p: f64,
        input: PathBuf,
        output: PathBuf,
    },
    /// Expander-style decomposition; prints one line per piece.
    Decompose {
        #[arg(long)]
        phi: Option<f64>,
        input: PathBuf,
        /// Directory receiving `piece-K.mtx` for every piece.
        #[arg(long)]
        pieces: Option<PathBuf>,
    },
    /// Solve `L x = b` for an Eulerian Laplacian.
    SolveEulerian {
        #[arg(long)]
        eps: f64,
        #[arg(long, value_enum, default_value_t = ScheduleArg::Calibrated)]
        schedule: ScheduleArg,
        graph: PathBuf,
        rhs: PathBuf,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Solve `L x = b` for any strongly connected directed Laplacian.
    Solve {
        #[arg(long)]
        eps: f64,
        graph: PathBuf,
        rhs: PathBuf,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Stationary distribution of the random walk.
    Stationary {
        #[arg(long)]
        alpha: f64,
        graph: PathBuf,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Personalized PageRank from one seed vertex (1-indexed).
    Pagerank {
        #[arg(long)]
        beta: f64,
        #[arg(long)]
        seed_vertex: usize,
        #[arg(long, default_value_t = 1e-8)]
        eps: f64,
        graph: PathBuf,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Time build and solve on random Eulerian graphs of growing size.
    Bench {
        #[arg(long, value_delimiter = ',', default_values_t = vec![1024usize, 4096, 16384])]
        sizes: Vec<usize>,
        #[arg(long, default_value_t = 1e-6)]
        eps: f64,
    },
    /// Dense reference computations for small inputs.
    Oracle {
        #[command(subcommand)]
        query: OracleQuery,
    },
}

#[derive(Subcommand, Debug)]
enum OracleQuery {
    /// Asymmetric approximation norm of `approx` against `reference`.
    ApproxNorm { reference: PathBuf, approx: PathBuf },
    /// Exact stationary distribution.
    Stationary { graph: PathBuf },
    /// `L† b` by a dense pseudoinverse.
    Solve { graph: PathBuf, rhs: PathBuf },
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum ScheduleArg {
    Calibrated,
    Analytic,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    if let Err(msg) = configure_threads() {
        eprintln!("error: {msg}");
        return ExitCode::from(EXIT_USAGE);
    }
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}

fn exit_code(e: &Error) -> u8 {
    match e.class() {
        ErrorClass::Numerical => EXIT_NUMERICAL,
        ErrorClass::Validation | ErrorClass::Io => EXIT_VALIDATION,
    }
}

/// Caps the worker pool at `DIRLAP_THREADS` when set.
fn configure_threads() -> Result<(), String> {
    let Ok(v) = std::env::var("DIRLAP_THREADS") else { return Ok(()) };
    let n: usize = v.trim().parse().map_err(|_| format!("DIRLAP_THREADS = `{v}` is not a thread count"))?;
    if n == 0 {
        return Err("DIRLAP_THREADS must be positive".into());
    }
    rayon::ThreadPoolBuilder::new().num_threads(n).build_global().map_err(|e| e.to_string())
}

fn run(cli: &Cli) -> dirlap_core::Result<()> {
    let seed = cli.seed;
    let body = match &cli.command {
        Command::Sparsify { eps, p, input, output } => {
            let l = read_laplacian(input)?;
            let (out, rep) = sparsify_eulerian_with(&l, *p, *eps, seed, &EulerianConfig::default())?;
            write_graph(out.adjacency(), output)?;
            json!({
                "params": { "eps": eps, "p": p, "seed": seed,
                    "c_sample": EulerianConfig::default().subgraph.c_sample, "phi_target": rep.phi_target },
                "skipped_decomposition": rep.skipped_decomposition,
                "pieces": rep.pieces,
                "sampled_pieces": rep.sampled_pieces,
                "alpha": rep.alpha,
                "beta": rep.beta,
                "piece_eps": rep.piece_eps,
                "nnz_in": rep.nnz_in,
                "nnz_out": rep.nnz_out,
            })
        }
        Command::SparsifySquare { eps, p, input, output } => {
            let w = read_mtx(open(input)?, Kind::Matrix)?;
            let cfg = SquareConfig::default();
            let (out, rep) = sparsify_square_with(&w, *p, *eps, seed, &cfg)?;
            write_graph(&out, output)?;
            json!({
                "params": { "eps": eps, "p": p, "seed": seed,
                    "c_sample": cfg.eulerian.subgraph.c_sample, "phi_target": rep.eulerian.phi_target },
                "exact_pieces": rep.exact_pieces,
                "sampled_pieces": rep.sampled_pieces,
                "nnz_products": rep.nnz_products,
                "nnz_in": w.nnz(),
                "nnz_out": rep.nnz_out,
                "materialized_square": rep.materialized_square,
            })
        }
        Command::Decompose { phi, input, pieces } => {
            let l = read_laplacian(input)?;
            let cfg = DecompositionConfig { phi_target: *phi, ..Default::default() };
            let dec = find_decomposition_with(&l, &cfg, seed)?;
            let stdout = std::io::stdout();
            let mut out = stdout.lock();
            for (k, piece) in dec.pieces.iter().enumerate() {
                writeln!(
                    out,
                    "piece {k}: {} vertices, {} edges, bucket {}, round {}, phi {}",
                    piece.vertices.len(),
                    piece.laplacian.nnz(),
                    piece.bucket,
                    piece.round,
                    piece.certified_phi
                )?;
                if let Some(dir) = pieces {
                    std::fs::create_dir_all(dir)?;
                    write_graph(piece.laplacian.adjacency(), &dir.join(format!("piece-{k}.mtx")))?;
                }
            }
            json!({
                "params": { "phi_target": dec.phi_target, "seed": seed },
                "pieces": dec.pieces.len(),
                "alpha": dec.alpha,
                "beta": dec.beta,
                "total_support": dec.total_support,
                "buckets": dec.buckets,
                "nonempty_buckets": dec.nonempty_buckets,
                "rounds": dec.rounds,
                "progress": dec.progress,
            })
        }
        Command::SolveEulerian { eps, schedule, graph, rhs, output } => {
            let l = read_laplacian(graph)?;
            let b = read_rhs(rhs, l.n())?;
            let cfg = SolverConfig {
                schedule: match schedule {
                    ScheduleArg::Calibrated => Schedule::Calibrated,
                    ScheduleArg::Analytic => Schedule::Analytic,
                },
                seed,
                ..Default::default()
            };
            let (x, rep) = solve_eulerian_with(&l, &b, *eps, &cfg)?;
            emit_vector(&x, "solution x of L x = b", output.as_deref())?;
            json!({ "params": { "eps": eps, "seed": seed }, "solve": serde_json::to_value(&rep).map_err(json_err)? })
        }
        Command::Solve { eps, graph, rhs, output } => {
            let l = read_laplacian(graph)?;
            let b = read_rhs(rhs, l.n())?;
            let inner = ChainSolver::new(SolverConfig { seed, ..Default::default() });
            let cfg = FullConfig::default();
            let (x, rep) = solve_full_with(&l, &b, *eps, &inner, &cfg)?;
            emit_vector(&x, "solution x of L x = b", output.as_deref())?;
            json!({
                "params": { "eps": eps, "seed": seed, "c_pert": cfg.c_pert,
                    "c_stat": cfg.stationary.c_stat, "stationary_exponent": cfg.stationary.exponent },
                "solve": serde_json::to_value(&rep).map_err(json_err)?,
            })
        }
        Command::Stationary { alpha, graph, output } => {
            let l = read_laplacian(graph)?;
            let inner = ChainSolver::new(SolverConfig { seed, ..Default::default() });
            let cfg = StationaryConfig::default();
            let st = compute_stationary_with(&l, *alpha, &inner, &cfg)?;
            emit_vector(&st.distribution, "stationary distribution", output.as_deref())?;
            json!({
                "params": { "alpha": alpha, "seed": seed, "c_stat": cfg.c_stat, "exponent": cfg.exponent },
                "iterations": st.iterations,
                "residual": st.residual,
                "restarts": st.restarts,
                "inner_eps": st.inner_eps,
            })
        }
        Command::Pagerank { beta, seed_vertex, eps, graph, output } => {
            let l = read_laplacian(graph)?;
            let n = l.n();
            if *seed_vertex == 0 || *seed_vertex > n {
                return Err(Error::InvalidParameter(format!("seed vertex {seed_vertex} is not in 1..={n}")));
            }
            let mut u = vec![0.0; n];
            u[seed_vertex - 1] = 1.0;
            let inner = ChainSolver::new(SolverConfig { seed, ..Default::default() });
            let p = personalized_pagerank_with(&l, *beta, &u, *eps, &inner, &PageRankConfig::default())?;
            emit_vector(&p, "personalized pagerank", output.as_deref())?;
            json!({ "params": { "beta": beta, "seed_vertex": seed_vertex, "eps": eps, "seed": seed } })
        }
        Command::Bench { sizes, eps } => bench(sizes, *eps, seed)?,
        Command::Oracle { query } => oracle(query)?,
    };
    if let Some(path) = &cli.report {
        let mut report = json!({ "version": REPORT_VERSION, "command": command_name(&cli.command) });
        if let (Value::Object(dst), Value::Object(src)) = (&mut report, body) {
            dst.extend(src);
        }
        let mut w = BufWriter::new(File::create(path)?);
        serde_json::to_writer_pretty(&mut w, &report).map_err(json_err)?;
        writeln!(w)?;
    }
    Ok(())
}

fn command_name(c: &Command) -> &'static str {
    match c {
        Command::Sparsify { .. } => "sparsify",
        Command::SparsifySquare { .. } => "sparsify-square",
        Command::Decompose { .. } => "decompose",
        Command::SolveEulerian { .. } => "solve-eulerian",
        Command::Solve { .. } => "solve",
        Command::Stationary { .. } => "stationary",
        Command::Pagerank { .. } => "pagerank",
        Command::Bench { .. } => "bench",
        Command::Oracle { .. } => "oracle",
    }
}

fn json_err(e: serde_json::Error) -> Error {
    Error::Io(std::io::Error::other(e))
}

fn open(path: &Path) -> dirlap_core::Result<BufReader<File>> {
    Ok(BufReader::new(File::open(path).map_err(|e| {
        std::io::Error::new(e.kind(), format!("{}: {e}", path.display()))
    })?))
}

fn read_laplacian(path: &Path) -> dirlap_core::Result<DirectedLaplacian> {
    DirectedLaplacian::validate(read_mtx(open(path)?, Kind::Adjacency)?)
}

/// Reads a demand vector and projects it onto `1⊥`; the projection is
/// reported on stderr when it moved the input by more than `1e−12` relative.
fn read_rhs(path: &Path, n: usize) -> dirlap_core::Result<Vec<f64>> {
    let b = read_vector(open(path)?)?;
    if b.len() != n {
        return Err(Error::DimensionMismatch { expected: n, got: b.len() });
    }
    if let Some(i) = b.iter().position(|v| !v.is_finite()) {
        return Err(Error::NonFinite { row: i, col: 0 });
    }
    let mut bp = b.clone();
    center(&mut bp);
    if norm2(&sub(&b, &bp)) > 1e-12 * norm2(&b) {
        eprintln!("note: demand projected onto the image of L (entries now sum to zero)");
    }
    Ok(bp)
}

fn write_graph(g: &SparseGraph, path: &Path) -> dirlap_core::Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    write_mtx(g, &mut w)?;
    w.flush()?;
    Ok(())
}

/// Writes to `path` with a `%` header, or to stdout one value per line.
fn emit_vector(v: &[f64], comment: &str, path: Option<&Path>) -> dirlap_core::Result<()> {
    match path {
        Some(p) => {
            let mut w = BufWriter::new(File::create(p)?);
            write_vector(v, comment, &mut w)?;
            w.flush()?;
        }
        None => {
            let stdout = std::io::stdout();
            let mut out = stdout.lock();
            for x in v {
                writeln!(out, "{x:?}")?;
            }
        }
    }
    Ok(())
}

/// One solve per size on a random Eulerian graph with weights in `[1, 10]`,
/// followed by the least-squares slope of `ln(time)` against `ln(nnz)`.
fn bench(sizes: &[usize], eps: f64, seed: u64) -> dirlap_core::Result<Value> {
    if sizes.is_empty() || sizes.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidParameter("sizes must be nonempty and strictly ascending".into()));
    }
    let mut rows = Vec::new();
    let mut points = Vec::new();
    println!("{:>8} {:>10} {:>10} {:>10} {:>14} {:>12}", "n", "nnz", "build_s", "solve_s", "applications", "chain_nnz");
    for (k, &n) in sizes.iter().enumerate() {
        let s = dirlap_core::seed::child_seed(seed, k as u64);
        let l = generators::random_eulerian(n, 2 * n, 8, 1.0, 10.0, s);
        let mut b: Vec<f64> = (0..n).map(|i| ((i * 7919) % 101) as f64 / 50.0 - 1.0).collect();
        center(&mut b);
        let t = Instant::now();
        let (_, rep) = solve_eulerian_with(&l, &b, eps, &SolverConfig { seed: s, ..Default::default() })?;
        let total = t.elapsed().as_secs_f64();
        let chain_nnz: usize = rep.chain_nnz.iter().sum();
        println!(
            "{:>8} {:>10} {:>10.3} {:>10.3} {:>14} {:>12}",
            n, rep.nnz, rep.build_seconds, rep.solve_seconds, rep.operator_applications, chain_nnz
        );
        points.push(((rep.nnz as f64).ln(), total.ln()));
        rows.push(json!({
            "n": n,
            "nnz": rep.nnz,
            "build_seconds": rep.build_seconds,
            "solve_seconds": rep.solve_seconds,
            "seconds": total,
            "operator_applications": rep.operator_applications,
            "chain_nnz": rep.chain_nnz,
            "residual": rep.residual,
            "d": rep.d,
            "lambda_hat": rep.lambda_hat,
        }));
    }
    let slope = loglog_slope(&points);
    match slope {
        Some(s) => println!("log-log slope of time vs nnz: {s:.3}"),
        None => println!("log-log slope omitted: a single size"),
    }
    Ok(json!({ "params": { "sizes": sizes, "eps": eps, "seed": seed }, "runs": rows, "slope": slope }))
}

fn loglog_slope(points: &[(f64, f64)]) -> Option<f64> {
    if points.len() < 2 {
        return None;
    }
    let k = points.len() as f64;
    let mx = points.iter().map(|p| p.0).sum::<f64>() / k;
    let my = points.iter().map(|p| p.1).sum::<f64>() / k;
    let sxy: f64 = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = points.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
    Some(sxy / sxx)
}

fn oracle(q: &OracleQuery) -> dirlap_core::Result<Value> {
    match q {
        OracleQuery::ApproxNorm { reference, approx } => {
            let a = read_laplacian(reference)?;
            let b = read_laplacian(approx)?;
            if a.n() != b.n() {
                return Err(Error::DimensionMismatch { expected: a.n(), got: b.n() });
            }
            let norm = dirlap_oracle::approx_norm_laplacians(&a, &b)?;
            println!("{norm:?}");
            Ok(json!({ "approx_norm": norm }))
        }
        OracleQuery::Stationary { graph } => {
            let pi = dirlap_oracle::exact_stationary(&read_laplacian(graph)?)?;
            emit_vector(&pi, "exact stationary distribution", None)?;
            Ok(json!({}))
        }
        OracleQuery::Solve { graph, rhs } => {
            let l = read_laplacian(graph)?;
            let b = read_rhs(rhs, l.n())?;
            let pinv = dirlap_oracle::dense_pinv(&dirlap_oracle::laplacian(&l)?)?;
            let x = dirlap_oracle::mat_vec(&pinv, &b);
            emit_vector(&x, "dense solution", None)?;
            Ok(json!({}))
        }
    }
}
