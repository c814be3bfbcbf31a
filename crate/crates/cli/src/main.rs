//! `dpsketch` command-line tool.
//!
//! Exit codes: 0 success, 1 usage error, 2 data or format error,
//! 3 failed privacy audit.

use std::collections::HashMap;
use std::fs::File;
use std::io::{self, Read, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use dpsketch::baselines::{compare_mse, matrix_publish, rr_publish, MseConfig, RRParams};
use dpsketch::eval::{
    adjusted_rand_index, dp_audit, gen_planted_clusters, kmeans_on_sketches, knn_recall, random_record,
    worst_case_neighbor, AuditConfig, KMeansConfig, PlantedClusterSpec,
};
use dpsketch::io::{self as fmt, KMeansRun};
use dpsketch::{
    attribute_query_distance, estimate_sq_distance, publish_with, Dataset, Mechanism, PrivacyBudget, PublishOptions,
};

#[derive(Debug, Parser)]
#[command(
    name = "dpsketch",
    version,
    about = "Private distance-preserving sketches of binary user data"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Generate a planted-cluster dataset.
    Gen(GenArgs),
    /// Publish perturbed sketches of a dataset as a bundle.
    Publish(PublishArgs),
    /// Apply per-bit randomized response to a dataset.
    Rr(RrArgs),
    /// Publish the Laplace-perturbed pairwise distance matrix.
    MatrixNoise(MatrixArgs),
    /// Estimate the squared distance between two users in a bundle.
    Dist(DistArgs),
    /// Distances from every user to attribute query vectors.
    Query(QueryArgs),
    /// MSE sweep of mechanisms over true distances.
    CompareMse(CompareArgs),
    /// k-means on bundle sketches, scored against ground-truth labels.
    EvalKmeans(KmeansArgs),
    /// Nearest-neighbor recall of bundle sketches against raw data.
    EvalKnn(KnnArgs),
    /// Empirical privacy-loss audit on a random record and a neighbor.
    Audit(AuditArgs),
}

#[derive(Debug, Args)]
struct Output {
    /// Output file; standard output when omitted.
    #[arg(long, short)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct GenArgs {
    #[arg(long)]
    n: usize,
    #[arg(long)]
    d: usize,
    #[arg(long)]
    c: usize,
    #[arg(long, default_value_t = 0.05)]
    flip: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Also write ground-truth labels here.
    #[arg(long)]
    labels: Option<PathBuf>,
    #[command(flatten)]
    output: Output,
}

#[derive(Debug, Args)]
struct PublishArgs {
    /// Dataset file; standard input when omitted or `-`.
    #[arg(long, short)]
    input: Option<PathBuf>,
    #[arg(long)]
    k: usize,
    #[arg(long)]
    epsilon: f64,
    #[arg(long)]
    delta: f64,
    #[arg(long)]
    matrix_seed: u64,
    #[arg(long)]
    noise_seed: u64,
    /// Multiplier on the calibrated sigma (0 disables noise).
    #[arg(long, default_value_t = 1.0)]
    noise_scale: f64,
    #[command(flatten)]
    output: Output,
}

#[derive(Debug, Args)]
struct RrArgs {
    #[arg(long, short)]
    input: Option<PathBuf>,
    #[arg(long)]
    epsilon: f64,
    #[arg(long)]
    seed: u64,
    #[command(flatten)]
    output: Output,
}

#[derive(Debug, Args)]
struct MatrixArgs {
    #[arg(long, short)]
    input: Option<PathBuf>,
    #[arg(long)]
    epsilon: f64,
    #[arg(long)]
    seed: u64,
    #[command(flatten)]
    output: Output,
}

#[derive(Debug, Args)]
struct DistArgs {
    #[arg(long)]
    bundle: PathBuf,
    #[arg(long)]
    a: String,
    #[arg(long)]
    b: String,
}

#[derive(Debug, Args)]
struct QueryArgs {
    #[arg(long)]
    bundle: PathBuf,
    /// Query vectors in dataset format (one row per query).
    #[arg(long)]
    queries: PathBuf,
    #[command(flatten)]
    output: Output,
}

#[derive(Debug, Args)]
struct CompareArgs {
    #[arg(long)]
    d: usize,
    #[arg(long)]
    k: usize,
    #[arg(long)]
    epsilon: f64,
    #[arg(long)]
    delta: f64,
    /// Comma-separated true Hamming distances.
    #[arg(long, value_delimiter = ',', required = true)]
    grid: Vec<usize>,
    #[arg(long)]
    trials: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, value_delimiter = ',', default_value = "projection,rr")]
    mechanisms: Vec<String>,
    #[arg(long, default_value_t = 1.0)]
    noise_scale: f64,
    /// User count assumed by the matrix mechanism.
    #[arg(long, default_value_t = 1000)]
    population: usize,
    #[command(flatten)]
    output: Output,
}

#[derive(Debug, Args)]
struct KmeansArgs {
    #[arg(long)]
    bundle: PathBuf,
    #[arg(long)]
    labels: PathBuf,
    #[arg(long)]
    c: usize,
    #[arg(long, default_value_t = 100)]
    max_iters: usize,
    #[arg(long, default_value_t = 4)]
    n_init: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Runs use seeds `seed, seed + 1, ...`.
    #[arg(long, default_value_t = 1)]
    runs: u64,
    #[command(flatten)]
    output: Output,
}

#[derive(Debug, Args)]
struct KnnArgs {
    #[arg(long)]
    dataset: PathBuf,
    #[arg(long)]
    bundle: PathBuf,
    #[arg(long)]
    m: usize,
    #[command(flatten)]
    output: Output,
}

#[derive(Debug, Args)]
struct AuditArgs {
    /// projection, rr or matrix.
    #[arg(long)]
    mechanism: String,
    #[arg(long)]
    d: usize,
    #[arg(long, default_value_t = 1)]
    k: usize,
    #[arg(long)]
    epsilon: f64,
    #[arg(long, default_value_t = 1e-2)]
    delta: f64,
    #[arg(long)]
    samples: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Attribute to flip; defaults to the worst-case row for projection, 0 otherwise.
    #[arg(long)]
    bit: Option<usize>,
    #[arg(long, default_value_t = 1.0)]
    noise_scale: f64,
    #[arg(long, default_value_t = 3)]
    peers: usize,
    #[command(flatten)]
    output: Output,
}

#[derive(Debug)]
enum Failure {
    Data(String),
    AuditFailed,
}

impl From<dpsketch::Error> for Failure {
    fn from(e: dpsketch::Error) -> Self {
        Failure::Data(e.to_string())
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure::Data(e.to_string())
    }
}

type CliResult<T> = Result<T, Failure>;

fn read_input(path: Option<&Path>) -> CliResult<Vec<u8>> {
    let mut buf = Vec::new();
    match path {
        None => io::stdin().read_to_end(&mut buf)?,
        Some(p) if p == Path::new("-") => io::stdin().read_to_end(&mut buf)?,
        Some(p) => File::open(p)
            .map_err(|e| Failure::Data(format!("{}: {e}", p.display())))?
            .read_to_end(&mut buf)?,
    };
    Ok(buf)
}

/// Writes to a temporary file next to `path` and renames it into place.
fn write_output(output: &Output, bytes: &[u8]) -> CliResult<()> {
    match &output.out {
        None => {
            let mut stdout = io::stdout().lock();
            stdout.write_all(bytes)?;
            stdout.flush()?;
        }
        Some(path) => {
            let dir = match path.parent() {
                Some(p) if !p.as_os_str().is_empty() => p,
                _ => Path::new("."),
            };
            let mut tmp =
                tempfile::NamedTempFile::new_in(dir).map_err(|e| Failure::Data(format!("{}: {e}", dir.display())))?;
            tmp.write_all(bytes)?;
            tmp.as_file().sync_all()?;
            tmp.persist(path)
                .map_err(|e| Failure::Data(format!("{}: {}", path.display(), e.error)))?;
        }
    }
    Ok(())
}

fn load_dataset(path: Option<&Path>) -> CliResult<Dataset> {
    Ok(fmt::read_dataset(read_input(path)?.as_slice())?)
}

fn load_bundle(path: &Path) -> CliResult<dpsketch::PublishedBundle> {
    Ok(fmt::bundle_from_bytes(&read_input(Some(path))?)?)
}

fn run(command: Command) -> CliResult<()> {
    match command {
        Command::Gen(a) => {
            let spec = PlantedClusterSpec {
                n: a.n,
                d: a.d,
                c: a.c,
                flip_noise: a.flip,
                seed: a.seed,
            };
            let (dataset, labels) = gen_planted_clusters(&spec)?;
            if let Some(path) = &a.labels {
                let ids: Vec<&str> = dataset.records().iter().map(|r| r.user_id()).collect();
                let mut buf = Vec::new();
                fmt::write_labels(&ids, &labels, &mut buf)?;
                write_output(
                    &Output {
                        out: Some(path.clone()),
                    },
                    &buf,
                )?;
            }
            write_output(&a.output, &fmt::dataset_to_bytes(&dataset)?)
        }
        Command::Publish(a) => {
            let dataset = load_dataset(a.input.as_deref())?;
            let budget = PrivacyBudget::new(a.epsilon, a.delta)?;
            let options = PublishOptions {
                noise_scale: a.noise_scale,
                attribute_names: None,
            };
            let bundle = publish_with(&dataset, a.k, budget, a.matrix_seed, a.noise_seed, &options)?;
            write_output(&a.output, &fmt::bundle_to_bytes(&bundle)?)
        }
        Command::Rr(a) => {
            let dataset = load_dataset(a.input.as_deref())?;
            let params = RRParams::new(a.epsilon)?;
            let records = rr_publish(&dataset, params, a.seed)
                .into_iter()
                .map(|r| r.into_record())
                .collect();
            let out = Dataset::new(dataset.dim(), records)?;
            write_output(&a.output, &fmt::dataset_to_bytes(&out)?)
        }
        Command::MatrixNoise(a) => {
            let dataset = load_dataset(a.input.as_deref())?;
            let matrix = matrix_publish(&dataset, a.epsilon, a.seed)?;
            write_output(&a.output, &fmt::matrix_report(&matrix, a.seed).to_bytes()?)
        }
        Command::Dist(a) => {
            let bundle = load_bundle(&a.bundle)?;
            let find = |id: &str| {
                bundle
                    .sketch(id)
                    .ok_or_else(|| Failure::Data(format!("unknown user id `{id}`")))
            };
            let est = estimate_sq_distance(find(&a.a)?, find(&a.b)?, bundle.noise)?;
            let text = format!(
                "user_a,user_b,raw,clamped\n{},{},{},{}\n",
                a.a,
                a.b,
                est.value,
                est.clamped()
            );
            write_output(&Output { out: None }, text.as_bytes())
        }
        Command::Query(a) => {
            let bundle = load_bundle(&a.bundle)?;
            let queries = load_dataset(Some(&a.queries))?;
            let mut rows = Vec::new();
            for s in &bundle.sketches {
                for q in queries.records() {
                    let est = attribute_query_distance(s, q.bits(), &bundle.projection, bundle.noise)?;
                    rows.push((s.user_id.clone(), q.user_id().to_string(), est));
                }
            }
            write_output(&a.output, &fmt::query_report(&bundle, &rows).to_bytes()?)
        }
        Command::CompareMse(a) => {
            let mechanisms = a
                .mechanisms
                .iter()
                .map(|m| m.parse::<Mechanism>())
                .collect::<Result<Vec<_>, _>>()?;
            let config = MseConfig {
                mechanisms,
                d: a.d,
                k: a.k,
                budget: PrivacyBudget::new(a.epsilon, a.delta)?,
                distance_grid: a.grid,
                trials: a.trials,
                seed: a.seed,
                noise_scale: a.noise_scale,
                population: a.population,
            };
            let rows = compare_mse(&config)?;
            write_output(&a.output, &fmt::mse_report(&config, &rows).to_bytes()?)
        }
        Command::EvalKmeans(a) => {
            let bundle = load_bundle(&a.bundle)?;
            let by_id: HashMap<String, usize> = fmt::read_labels(read_input(Some(&a.labels))?.as_slice())?
                .into_iter()
                .collect();
            let truth = bundle
                .sketches
                .iter()
                .map(|s| {
                    by_id
                        .get(&s.user_id)
                        .copied()
                        .ok_or_else(|| Failure::Data(format!("no label for user `{}`", s.user_id)))
                })
                .collect::<CliResult<Vec<usize>>>()?;
            let base = KMeansConfig {
                clusters: a.c,
                max_iters: a.max_iters,
                n_init: a.n_init,
                seed: a.seed,
            };
            let runs = (0..a.runs)
                .map(|r| {
                    let seed = a.seed.wrapping_add(r);
                    let result = kmeans_on_sketches(&bundle, &KMeansConfig { seed, ..base })?;
                    Ok(KMeansRun {
                        seed,
                        ari: adjusted_rand_index(&result.assignments, &truth),
                        inertia: result.inertia,
                        iterations: result.iterations,
                    })
                })
                .collect::<CliResult<Vec<_>>>()?;
            write_output(&a.output, &fmt::kmeans_report(&bundle, &base, &runs).to_bytes()?)
        }
        Command::EvalKnn(a) => {
            let dataset = load_dataset(Some(&a.dataset))?;
            let bundle = load_bundle(&a.bundle)?;
            let recall = knn_recall(&dataset, &bundle, a.m)?;
            write_output(&a.output, &fmt::knn_report(&bundle, a.m, recall).to_bytes()?)
        }
        Command::Audit(a) => {
            let mechanism: Mechanism = a.mechanism.parse()?;
            let mut config = AuditConfig::new(mechanism, PrivacyBudget::new(a.epsilon, a.delta)?, a.samples, a.seed);
            config.k = a.k;
            config.noise_scale = a.noise_scale;
            config.matrix_peers = a.peers;
            let x = random_record("x", a.d, a.seed)?;
            let neighbor = match (a.bit, mechanism) {
                (Some(bit), _) => x.with_flipped(bit)?,
                (None, Mechanism::Projection) => worst_case_neighbor(&x, &config)?,
                (None, _) => x.with_flipped(0)?,
            };
            let bit = x
                .bits()
                .iter()
                .zip(neighbor.bits())
                .position(|(p, q)| p != q)
                .expect("neighbor differs in one bit");
            let report = dp_audit(&x, &neighbor, &config)?;
            write_output(&a.output, &fmt::audit_report(&config, a.d, bit, &report).to_bytes()?)?;
            if report.passed {
                Ok(())
            } else {
                Err(Failure::AuditFailed)
            }
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Data(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::AuditFailed) => {
            eprintln!("audit failed: violation rate above the allowed rate");
            ExitCode::from(3)
        }
    }
}
