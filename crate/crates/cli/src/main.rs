//! `essence`: PageRank completion, spectral checks and centrality-conforming
//! chains from the command line.
//!
//! Exit codes: 0 success, 1 I/O failure, 2 invalid input or arguments (the
//! message names the violated precondition), 3 a verification ran but one of
//! its checks failed.

use std::fs;
use std::io::{self, Read, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};
use serde_json::json;
use thiserror::Error;

use essence::clustering::{cheeger_check, cheeger_vector, fiedler_vector, local_cluster, sweep};
use essence::completion::{
    pagerank_completion, random_rayleigh_ratios, simultaneous_diagonalization_check,
    spectral_similarity, verify_completion, Completion, DIAGONALIZATION_TOL,
};
use essence::markov::random_walk_chain;
use essence::models::{
    borda_weights, glove_game, ic_sample, incentive_chain, influence_chain,
    influence_spread_exact, influence_spread_mc, pagerank_preferences, pagerank_utility_game,
    preference_centrality, preference_chain, shapley_exact, shapley_monte_carlo, spread_game,
    IncentiveNetwork, InfluenceInstance, InfluenceMode, OrderedPartition, PreferenceProfile,
    WeightVector, DEFAULT_TIE_TOL,
};
use essence::pagerank::{pagerank_centrality, personalized_pagerank, ppr_matrix};
use essence::WeightedGraph;

#[derive(Parser)]
#[command(name = "essence", version, about = "PageRank completion and network-model toolkit")]
struct Cli {
    /// Output format; each command has its own default.
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Edgelist,
    Tsv,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Mode {
    Exact,
    Mc,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Game {
    Glove3,
    PagerankUtility,
    InfluenceSpread,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum ScoreVector {
    Cheeger,
    Fiedler,
}

#[derive(Args)]
struct GraphArgs {
    /// Edge list `u v w`, one edge per line; `-` reads stdin.
    input: PathBuf,
}

#[derive(Args)]
struct Sampling {
    #[arg(long, value_enum, default_value = "exact")]
    mode: Mode,
    /// Monte Carlo sample count.
    #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
    samples: Option<u64>,
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Subcommand)]
enum Command {
    /// Personalized PageRank from one node, or the full PPR matrix.
    Ppr {
        #[command(flatten)]
        graph: GraphArgs,
        #[arg(long)]
        alpha: f64,
        #[arg(long)]
        node: Option<String>,
    },
    /// PageRank centrality (sums to n).
    Centrality {
        #[command(flatten)]
        graph: GraphArgs,
        #[arg(long)]
        alpha: f64,
    },
    /// The PageRank completion W̄ = D·PPR (edge list by default).
    Complete {
        #[command(flatten)]
        graph: GraphArgs,
        #[arg(long)]
        alpha: f64,
    },
    /// Check the completion guarantees; `--completion` re-reads a stored W̄.
    Verify {
        #[command(flatten)]
        graph: GraphArgs,
        #[arg(long)]
        alpha: f64,
        #[arg(long)]
        completion: Option<PathBuf>,
    },
    /// Rayleigh ratios of W̄/(1−α) against W, and the shared-eigenbasis check.
    Similarity {
        #[command(flatten)]
        graph: GraphArgs,
        #[arg(long)]
        alpha: f64,
        /// Also test this many random vectors.
        #[arg(long)]
        samples: Option<usize>,
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Sweep cut over a spectral vector or a score file.
    Sweep {
        #[command(flatten)]
        graph: GraphArgs,
        #[arg(long, value_enum, default_value = "cheeger")]
        by: ScoreVector,
        /// JSON array of scores, overriding `--by`.
        #[arg(long)]
        scores: Option<PathBuf>,
    },
    /// Sweep over D⁻¹ p_seed.
    LocalCluster {
        #[command(flatten)]
        graph: GraphArgs,
        #[arg(long)]
        alpha: f64,
        #[arg(long)]
        node: String,
    },
    /// Cheeger inequality for the sweep cut; `--alpha` adds the completion's vector.
    Cheeger {
        #[command(flatten)]
        graph: GraphArgs,
        #[arg(long)]
        alpha: Option<f64>,
    },
    /// PageRank preference profile (node indices, best block first).
    Preferences {
        #[command(flatten)]
        graph: GraphArgs,
        #[arg(long)]
        alpha: f64,
        /// Tie tolerance.
        #[arg(long, default_value_t = DEFAULT_TIE_TOL)]
        tol: f64,
    },
    /// Weighted preference chain of a JSON profile.
    PreferenceChain {
        /// JSON list of block-lists per node, or the output of `preferences`.
        profile: PathBuf,
        /// JSON weight vector; normalized Borda when omitted.
        #[arg(long)]
        weights: Option<PathBuf>,
    },
    /// Shapley values of a built-in game.
    Shapley {
        #[arg(long, value_enum)]
        game: Game,
        #[command(flatten)]
        sampling: Sampling,
        /// Graph for `pagerank-utility` and `influence-spread`.
        input: Option<PathBuf>,
        #[arg(long)]
        alpha: Option<f64>,
    },
    /// Shapley chain of the PageRank incentive model.
    IncentiveChain {
        #[command(flatten)]
        graph: GraphArgs,
        #[arg(long)]
        alpha: f64,
    },
    /// Expected independent-cascade spread; weights are probabilities.
    InfluenceSpread {
        #[command(flatten)]
        graph: GraphArgs,
        #[arg(long)]
        set: String,
        #[command(flatten)]
        sampling: Sampling,
    },
    /// One cascade sample.
    InfluenceSample {
        #[command(flatten)]
        graph: GraphArgs,
        #[arg(long)]
        set: String,
        #[arg(long)]
        seed: u64,
    },
    /// Social-influence chain.
    InfluenceChain {
        #[command(flatten)]
        graph: GraphArgs,
        #[command(flatten)]
        sampling: Sampling,
    },
    /// Markovian symmetrizations of the random walk on the graph.
    Symmetrize {
        #[command(flatten)]
        graph: GraphArgs,
        #[arg(long)]
        alpha: Option<f64>,
        /// Detailed-balance tolerance.
        #[arg(long, default_value_t = 1e-9)]
        tol: f64,
    },
}

#[derive(Debug, Error)]
enum CliError {
    #[error("cannot read {path}: {source}")]
    Io { path: String, source: io::Error },
    #[error("cannot write output: {0}")]
    Output(io::Error),
    #[error("{name}: {source}")]
    Core { name: &'static str, source: essence::Error },
    #[error("invalid JSON in {path}: {source}")]
    Json { path: String, source: serde_json::Error },
    #[error("usage: {0}")]
    Usage(String),
    #[error("check failed: {0}")]
    CheckFailed(String),
}

impl From<essence::Error> for CliError {
    fn from(source: essence::Error) -> Self {
        CliError::Core { name: error_name(&source), source }
    }
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Io { .. } | CliError::Output(_) => 1,
            CliError::Core { .. } | CliError::Json { .. } | CliError::Usage(_) => 2,
            CliError::CheckFailed(_) => 3,
        }
    }
}

fn error_name(e: &essence::Error) -> &'static str {
    use essence::Error::*;
    match e {
        NegativeWeight { .. } => "NegativeWeight",
        DuplicateEdge { .. } => "DuplicateEdge",
        MalformedLine { .. } => "MalformedLine",
        InvalidMatrix(_) => "InvalidMatrix",
        AsymmetricInput => "AsymmetricInput",
        EmptyOrFullSet => "EmptyOrFullSet",
        ZeroVolume => "ZeroVolume",
        Disconnected => "Disconnected",
        Reducible => "Reducible",
        DanglingNode(_) => "DanglingNode",
        AlphaOutOfRange(_) => "AlphaOutOfRange",
        NotADistribution(_) => "NotADistribution",
        DimensionMismatch { .. } => "DimensionMismatch",
        NodeOutOfRange { .. } => "NodeOutOfRange",
        UnknownNode(_) => "UnknownNode",
        TooDense { .. } => "TooDense",
        TooManyPlayers { .. } => "TooManyPlayers",
        TooManyEdges { .. } => "TooManyEdges",
        TooLarge(_) => "TooLarge",
        NotMonotone { .. } => "NotMonotone",
        NegativeUtility { .. } => "NegativeUtility",
        NotNormalized { .. } => "NotNormalized",
        InvalidPartition(_) => "InvalidPartition",
        InvalidWeights(_) => "InvalidWeights",
        InvalidProbability(_) => "InvalidProbability",
        InvalidParameter(_) => "InvalidParameter",
    }
}

type CliResult<T> = std::result::Result<T, CliError>;

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn"))
        .format_timestamp(None)
        .init();
    let cli = Cli::parse();
    let mut out = String::new();
    let result = run(cli, &mut out);
    if let Err(e) = io::stdout().lock().write_all(out.as_bytes()) {
        let e = CliError::Output(e);
        eprintln!("error: {e}");
        return ExitCode::from(e.exit_code());
    }
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}

fn read_text(path: &Path) -> CliResult<String> {
    let io_err = |source| CliError::Io { path: path.display().to_string(), source };
    if path == Path::new("-") {
        let mut s = String::new();
        io::stdin().read_to_string(&mut s).map_err(io_err)?;
        Ok(s)
    } else {
        fs::read_to_string(path).map_err(io_err)
    }
}

fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> CliResult<T> {
    serde_json::from_str(&read_text(path)?)
        .map_err(|source| CliError::Json { path: path.display().to_string(), source })
}

fn load(args: &GraphArgs) -> CliResult<WeightedGraph> {
    Ok(WeightedGraph::load_graph(&read_text(&args.input)?)?)
}

/// Influence instances keep dangling nodes as they are.
fn load_instance(path: &Path) -> CliResult<InfluenceInstance> {
    let g = WeightedGraph::parse_edge_list(&read_text(path)?)?;
    Ok(InfluenceInstance::from_graph(&g)?)
}

fn parse_set(labels: &[String], list: &str) -> CliResult<Vec<usize>> {
    list.split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| {
            labels
                .iter()
                .position(|l| l == s)
                .ok_or_else(|| essence::Error::UnknownNode(s.to_string()).into())
        })
        .collect()
}

fn rows(m: &DMatrix<f64>) -> Vec<Vec<f64>> {
    m.row_iter().map(|r| r.iter().copied().collect()).collect()
}

fn json_text(value: &impl Serialize) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("reports serialize");
    s.push('\n');
    s
}

fn tsv_vector(labels: &[String], values: &[f64]) -> String {
    labels.iter().zip(values).map(|(l, v)| format!("{l}\t{v}\n")).collect()
}

fn tsv_matrix(labels: &[String], m: &DMatrix<f64>) -> String {
    let mut s = format!("\t{}\n", labels.join("\t"));
    for (u, row) in m.row_iter().enumerate() {
        let cells: Vec<String> = row.iter().map(|x| x.to_string()).collect();
        s.push_str(&format!("{}\t{}\n", labels[u], cells.join("\t")));
    }
    s
}

fn unsupported(command: &str, format: Format) -> CliError {
    let name = match format {
        Format::Json => "json",
        Format::Edgelist => "edgelist",
        Format::Tsv => "tsv",
    };
    CliError::Usage(format!("{command} does not support --format {name}"))
}

/// Picks the requested format or the command's default and renders it.
struct Render<'a> {
    command: &'a str,
    format: Format,
}

impl Render<'_> {
    fn emit(
        &self,
        out: &mut String,
        json: impl FnOnce() -> String,
        tsv: Option<&dyn Fn() -> String>,
        edgelist: Option<&dyn Fn() -> String>,
    ) -> CliResult<()> {
        let text = match self.format {
            Format::Json => json(),
            Format::Tsv => tsv.ok_or_else(|| unsupported(self.command, self.format))?(),
            Format::Edgelist => edgelist.ok_or_else(|| unsupported(self.command, self.format))?(),
        };
        out.push_str(&text);
        Ok(())
    }
}

fn sampling_mode(s: &Sampling) -> CliResult<InfluenceMode> {
    match s.mode {
        Mode::Exact => Ok(InfluenceMode::Exact),
        Mode::Mc => {
            let (samples, seed) = mc_params(s)?;
            Ok(InfluenceMode::MonteCarlo { samples, seed })
        }
    }
}

fn mc_params(s: &Sampling) -> CliResult<(u64, u64)> {
    match (s.samples, s.seed) {
        (Some(samples), Some(seed)) => Ok((samples, seed)),
        _ => Err(CliError::Usage("--mode mc needs --samples and --seed".into())),
    }
}

#[derive(Deserialize)]
#[serde(untagged)]
enum ProfileInput {
    Bare(PreferenceProfile),
    Labelled { labels: Vec<String>, profile: PreferenceProfile },
}

fn run(cli: Cli, out: &mut String) -> CliResult<()> {
    let default_format = match cli.command {
        Command::Complete { .. } => Format::Edgelist,
        Command::Verify { .. } => Format::Tsv,
        _ => Format::Json,
    };
    let format = cli.format.unwrap_or(default_format);

    match cli.command {
        Command::Ppr { graph, alpha, node } => {
            let r = Render { command: "ppr", format };
            let g = load(&graph)?;
            let labels = g.labels().to_vec();
            match node {
                Some(label) => {
                    let s = g.index_of(&label)?;
                    let mut start = vec![0.0; g.n()];
                    start[s] = 1.0;
                    let p = personalized_pagerank(&g, alpha, &start)?;
                    r.emit(
                        out,
                        || json_text(&json!({ "alpha": alpha, "node": label, "labels": labels, "ppr": p })),
                        Some(&|| tsv_vector(&labels, &p)),
                        None,
                    )
                }
                None => {
                    let ppr = ppr_matrix(&g, alpha)?;
                    r.emit(
                        out,
                        || json_text(&json!({ "alpha": alpha, "labels": labels, "matrix": rows(ppr.matrix()) })),
                        Some(&|| tsv_matrix(&labels, ppr.matrix())),
                        None,
                    )
                }
            }
        }

        Command::Centrality { graph, alpha } => {
            let g = load(&graph)?;
            let pr = pagerank_centrality(&g, alpha)?;
            let labels = g.labels();
            Render { command: "centrality", format }.emit(
                out,
                || json_text(&json!({ "alpha": alpha, "labels": labels, "pagerank": pr })),
                Some(&|| tsv_vector(labels, &pr)),
                None,
            )
        }

        Command::Complete { graph, alpha } => {
            let g = load(&graph)?;
            let c = pagerank_completion(&g, alpha)?;
            let w = c.matrix();
            Render { command: "complete", format }.emit(
                out,
                || json_text(&json!({ "alpha": alpha, "labels": g.labels(), "matrix": rows(&w) })),
                Some(&|| tsv_matrix(g.labels(), &w)),
                Some(&|| c.graph().to_edge_list()),
            )
        }

        Command::Verify { graph, alpha, completion } => {
            let g = load(&graph)?;
            let c = match completion {
                None => pagerank_completion(&g, alpha)?,
                Some(path) => {
                    let stored = WeightedGraph::parse_edge_list(&read_text(&path)?)?;
                    Completion::from_parts(g.clone(), align(&g, &stored)?, alpha)?
                }
            };
            let report = verify_completion(&c);
            Render { command: "verify", format }.emit(
                out,
                || json_text(&report),
                Some(&|| {
                    report
                        .conditions
                        .iter()
                        .map(|k| {
                            let status = if k.passed { "PASS" } else { "FAIL" };
                            format!("{status}\t{}\t{}\t{:e}\t{:e}\n", k.condition, k.name, k.residual, k.tolerance)
                        })
                        .collect()
                }),
                None,
            )?;
            if report.all_passed() {
                Ok(())
            } else {
                Err(CliError::CheckFailed("completion conditions".into()))
            }
        }

        Command::Similarity { graph, alpha, samples, seed } => {
            let g = load(&graph)?;
            let c = pagerank_completion(&g, alpha)?;
            let report = spectral_similarity(&c)?;
            let diag = simultaneous_diagonalization_check(&c)?;
            let random = match (samples, seed) {
                (None, _) => None,
                (Some(k), Some(seed)) => Some(random_rayleigh_ratios(&c, k, seed)?),
                (Some(_), None) => return Err(CliError::Usage("--samples needs --seed".into())),
            };
            let random_ok = random.as_ref().is_none_or(|rs| {
                rs.iter().all(|&r| r >= report.bound_lo - 1e-8 && r <= report.bound_hi + 1e-8)
            });
            let passed = report.within_bounds && diag <= DIAGONALIZATION_TOL && random_ok;
            let body = json!({
                "report": report,
                "diagonalization_residual": diag,
                "random_ratios": random,
                "passed": passed,
            });
            Render { command: "similarity", format }.emit(
                out,
                || json_text(&body),
                Some(&|| {
                    let mut s = String::from("lambda\tmeasured\tpredicted\n");
                    for ((l, m), p) in report.eigenvalues.iter().zip(&report.eigen_ratios).zip(&report.predicted_ratios) {
                        s.push_str(&format!("{l}\t{m}\t{p}\n"));
                    }
                    s
                }),
                None,
            )?;
            if passed {
                Ok(())
            } else {
                Err(CliError::CheckFailed("spectral similarity".into()))
            }
        }

        Command::Sweep { graph, by, scores } => {
            let g = load(&graph)?;
            let v = match scores {
                Some(path) => read_json::<Vec<f64>>(&path)?,
                None => match by {
                    ScoreVector::Cheeger => cheeger_vector(&g)?,
                    ScoreVector::Fiedler => fiedler_vector(&g)?,
                },
            };
            emit_sweep(out, format, "sweep", &g, &sweep(&g, &v)?)
        }

        Command::LocalCluster { graph, alpha, node } => {
            let g = load(&graph)?;
            let seed = g.index_of(&node)?;
            emit_sweep(out, format, "local-cluster", &g, &local_cluster(&g, alpha, seed)?)
        }

        Command::Cheeger { graph, alpha } => {
            let g = load(&graph)?;
            let report = cheeger_check(&g, alpha)?;
            let cluster: Vec<&str> = report.cluster.iter().map(|&u| g.labels()[u].as_str()).collect();
            Render { command: "cheeger", format }.emit(
                out,
                || json_text(&json!({ "report": report, "cluster_labels": cluster })),
                None,
                None,
            )?;
            if report.passed {
                Ok(())
            } else {
                Err(CliError::CheckFailed("cheeger inequality".into()))
            }
        }

        Command::Preferences { graph, alpha, tol } => {
            let g = load(&graph)?;
            let profile = pagerank_preferences(&g, alpha, tol)?;
            Render { command: "preferences", format }.emit(
                out,
                || json_text(&json!({ "alpha": alpha, "labels": g.labels(), "profile": profile })),
                Some(&|| {
                    profile
                        .rankings()
                        .iter()
                        .enumerate()
                        .map(|(u, r)| format!("{}\t{}\n", g.labels()[u], blocks_text(g.labels(), r)))
                        .collect()
                }),
                None,
            )
        }

        Command::PreferenceChain { profile, weights } => {
            let (labels, profile) = match read_json::<ProfileInput>(&profile)? {
                ProfileInput::Bare(p) => ((0..p.n()).map(|i| i.to_string()).collect(), p),
                ProfileInput::Labelled { labels, profile } => {
                    if labels.len() != profile.n() {
                        return Err(essence::Error::DimensionMismatch {
                            expected: profile.n(),
                            found: labels.len(),
                        }
                        .into());
                    }
                    (labels, profile)
                }
            };
            let w = match weights {
                Some(path) => read_json::<WeightVector>(&path)?,
                None => borda_weights(profile.n())?,
            };
            let chain = preference_chain(&profile, &w)?;
            let centrality = preference_centrality(&profile, &w)?;
            Render { command: "preference-chain", format }.emit(
                out,
                || {
                    json_text(&json!({
                        "labels": labels,
                        "weights": w,
                        "matrix": rows(chain.matrix()),
                        "centrality": centrality,
                    }))
                },
                Some(&|| tsv_matrix(&labels, chain.matrix())),
                None,
            )
        }

        Command::Shapley { game, sampling, input, alpha } => {
            let need_input = || {
                input.as_deref().ok_or_else(|| CliError::Usage("this game needs an input graph".into()))
            };
            let (labels, values, std_errors): (Vec<String>, Vec<f64>, Option<Vec<f64>>) = match game {
                Game::Glove3 => {
                    let g = glove_game(3, 0b001, 0b110)?;
                    let labels = (1..=3).map(|i| i.to_string()).collect();
                    shapley_values(&g, &sampling, labels)?
                }
                Game::PagerankUtility => {
                    let alpha = alpha.ok_or_else(|| CliError::Usage("pagerank-utility needs --alpha".into()))?;
                    let g = load(&GraphArgs { input: need_input()?.to_path_buf() })?;
                    let ppr = ppr_matrix(&g, alpha)?;
                    let game = pagerank_utility_game(&ppr)?;
                    shapley_values(&game, &sampling, g.labels().to_vec())?
                }
                Game::InfluenceSpread => {
                    let inst = load_instance(need_input()?)?;
                    match sampling_mode(&sampling)? {
                        InfluenceMode::Exact => {
                            (inst.labels().to_vec(), shapley_exact(&spread_game(&inst)?)?, None)
                        }
                        mode => {
                            // the chain's column sums are the spread game's Shapley value
                            let ch = influence_chain(&inst, mode)?;
                            (inst.labels().to_vec(), ch.centrality, ch.std_errors)
                        }
                    }
                }
            };
            let (samples, seed) = match sampling.mode {
                Mode::Exact => (None, None),
                Mode::Mc => (sampling.samples, sampling.seed),
            };
            let mode = if sampling.mode == Mode::Exact { "exact" } else { "mc" };
            Render { command: "shapley", format }.emit(
                out,
                || {
                    json_text(&json!({
                        "mode": mode,
                        "samples": samples,
                        "seed": seed,
                        "labels": labels,
                        "values": values,
                        "std_errors": std_errors,
                    }))
                },
                Some(&|| tsv_vector(&labels, &values)),
                None,
            )
        }

        Command::IncentiveChain { graph, alpha } => {
            let g = load(&graph)?;
            let net = IncentiveNetwork::from_ppr(&ppr_matrix(&g, alpha)?)?;
            let (chain, centrality) = incentive_chain(&net)?;
            Render { command: "incentive-chain", format }.emit(
                out,
                || {
                    json_text(&json!({
                        "alpha": alpha,
                        "labels": g.labels(),
                        "matrix": rows(chain.matrix()),
                        "centrality": centrality,
                    }))
                },
                Some(&|| tsv_matrix(g.labels(), chain.matrix())),
                None,
            )
        }

        Command::InfluenceSpread { graph, set, sampling } => {
            let inst = load_instance(&graph.input)?;
            let seeds = parse_set(inst.labels(), &set)?;
            let body = match sampling_mode(&sampling)? {
                InfluenceMode::Exact => {
                    json!({ "mode": "exact", "spread": influence_spread_exact(&inst, &seeds)? })
                }
                InfluenceMode::MonteCarlo { samples, seed } => {
                    let est = influence_spread_mc(&inst, &seeds, samples, seed)?;
                    json!({
                        "mode": "mc",
                        "samples": samples,
                        "seed": seed,
                        "spread": est.mean,
                        "std_error": est.std_error,
                    })
                }
            };
            Render { command: "influence-spread", format }.emit(out, || json_text(&body), None, None)
        }

        Command::InfluenceSample { graph, set, seed } => {
            let inst = load_instance(&graph.input)?;
            let seeds = parse_set(inst.labels(), &set)?;
            let active: Vec<&str> =
                ic_sample(&inst, &seeds, seed)?.into_iter().map(|u| inst.labels()[u].as_str()).collect();
            Render { command: "influence-sample", format }.emit(
                out,
                || json_text(&json!({ "seed": seed, "active": active })),
                Some(&|| active.iter().map(|l| format!("{l}\n")).collect()),
                None,
            )
        }

        Command::InfluenceChain { graph, sampling } => {
            let inst = load_instance(&graph.input)?;
            let mode = sampling_mode(&sampling)?;
            let ch = influence_chain(&inst, mode)?;
            let (mode_name, samples, seed) = match mode {
                InfluenceMode::Exact => ("exact", None, None),
                InfluenceMode::MonteCarlo { samples, seed } => ("mc", Some(samples), Some(seed)),
            };
            Render { command: "influence-chain", format }.emit(
                out,
                || {
                    json_text(&json!({
                        "mode": mode_name,
                        "samples": samples,
                        "seed": seed,
                        "labels": inst.labels(),
                        "matrix": rows(ch.chain.matrix()),
                        "centrality": ch.centrality,
                        "std_errors": ch.std_errors,
                    }))
                },
                Some(&|| tsv_matrix(inst.labels(), ch.chain.matrix())),
                None,
            )
        }

        Command::Symmetrize { graph, alpha, tol } => {
            let g = load(&graph)?;
            let chain = random_walk_chain(&g)?;
            let residual = chain.detailed_balance_residual()?;
            let stationary = chain.stationary()?.to_vec();
            let markovian = chain.markovian_symmetrization()?;
            let pagerank = match alpha {
                Some(a) => {
                    let (first, second) = chain.pagerank_markovian_symmetrization(a)?;
                    Some(json!({
                        "alpha": a,
                        "series_of_chain": rows(first.matrix()),
                        "series_of_symmetrized_walk": rows(second.matrix()),
                    }))
                }
                None => None,
            };
            let body = json!({
                "labels": g.labels(),
                "stationary": stationary,
                "detailed_balance_residual": residual,
                "detailed_balanced": residual <= tol,
                "markovian": rows(markovian.matrix()),
                "pagerank": pagerank,
            });
            Render { command: "symmetrize", format }.emit(
                out,
                || json_text(&body),
                Some(&|| tsv_matrix(g.labels(), markovian.matrix())),
                None,
            )
        }
    }
}

fn shapley_values(
    game: &impl essence::models::CharacteristicFunction,
    sampling: &Sampling,
    labels: Vec<String>,
) -> CliResult<(Vec<String>, Vec<f64>, Option<Vec<f64>>)> {
    match sampling.mode {
        Mode::Exact => Ok((labels, shapley_exact(game)?, None)),
        Mode::Mc => {
            let (samples, seed) = mc_params(sampling)?;
            let est = shapley_monte_carlo(game, samples, seed)?;
            Ok((labels, est.values, Some(est.std_errors)))
        }
    }
}

fn blocks_text(labels: &[String], r: &OrderedPartition) -> String {
    r.blocks()
        .iter()
        .map(|b| b.iter().map(|&v| labels[v].as_str()).collect::<Vec<_>>().join(","))
        .collect::<Vec<_>>()
        .join(" > ")
}

/// Reorders a re-read completion so node indices follow the source graph.
fn align(source: &WeightedGraph, stored: &WeightedGraph) -> CliResult<WeightedGraph> {
    let n = source.n();
    if stored.n() != n {
        return Err(essence::Error::DimensionMismatch { expected: n, found: stored.n() }.into());
    }
    let index: Vec<usize> = stored
        .labels()
        .iter()
        .map(|l| source.index_of(l))
        .collect::<essence::Result<_>>()?;
    let mut w = DMatrix::zeros(n, n);
    for u in 0..n {
        for &(v, x) in stored.neighbors(u) {
            w[(index[u], index[v])] = x;
        }
    }
    Ok(WeightedGraph::from_dense(Some(source.labels().to_vec()), &w)?)
}

fn emit_sweep(
    out: &mut String,
    format: Format,
    command: &str,
    g: &WeightedGraph,
    result: &essence::SweepResult,
) -> CliResult<()> {
    let cluster: Vec<&str> = result.cluster().iter().map(|&u| g.labels()[u].as_str()).collect();
    Render { command, format }.emit(
        out,
        || json_text(&json!({ "sweep": result, "cluster_labels": cluster })),
        Some(&|| {
            let mut s = String::from("k\tconductance\n");
            for (k, phi) in result.profile.iter().enumerate() {
                s.push_str(&format!("{}\t{phi}\n", k + 1));
            }
            s
        }),
        None,
    )
}
