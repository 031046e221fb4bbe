//! Staged command-line driver: `index` → `cluster` → `search` / `eval` /
//! `compare`, plus `fixture` for generating small test collections.
//!
//! Every option can come from a flat TOML file passed with `--config`;
//! command-line flags of the same name take precedence.

pub mod fixtures;

use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{anyhow, bail, Context};
use clap::{Parser, Subcommand};
use rayon::prelude::*;
use serde::Deserialize;

use crate::corpus::{parse_smart_docs, parse_smart_queries, Analyzer, StopList};
use crate::evalkit::{
    classic_ir_rank, comparison_csv, ga_ir_rank, interpolated_precision_row, load_qrels,
    parse_precision_row, EvalReport, PrecisionRow,
};
use crate::hpga::{
    run_hpga_traced, trace_to_text, CrossoverSpace, GaConfig, Generations, RankedList, TraceRow,
    DEFAULT_GENERATIONS, DEFAULT_MIGRATION_INTERVAL,
};
use crate::kmeans::{
    default_selected, kmeans_cluster, select_relevant_clusters, ClusterSet, DEFAULT_K,
    DEFAULT_MAX_ITER,
};
use crate::vsm::{tokens_vector, Index, TermVector};

pub const INDEX_FILE: &str = "index.bin";
pub const STOPLIST_FILE: &str = "stoplist.txt";
pub const CLUSTERS_FILE: &str = "clusters.tsv";

#[derive(Debug, Parser)]
#[command(
    name = "clusterir",
    version,
    about = "Cluster-based retrieval with a hierarchical parallel GA"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Flat TOML file with defaults for any of the options below.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    #[command(flatten)]
    options: Options,
}

#[derive(Debug, Clone, Copy, Subcommand)]
enum Command {
    /// Parse a SMART collection and write the TF-IDF index.
    Index,
    /// Partition the indexed documents with k-means.
    Cluster,
    /// Rank documents for one query.
    Search,
    /// Nine-level precision table over a query set.
    Eval,
    /// Precision tables of two engines plus the improvement row.
    Compare,
    /// Write a synthetic collection or the reference precision tables.
    Fixture,
}

/// Options shared by all subcommands. Field names double as config keys.
#[derive(Debug, Clone, Default, clap::Args, Deserialize)]
#[serde(default, rename_all = "kebab-case", deny_unknown_fields)]
pub struct Options {
    #[arg(long, global = true)]
    pub docs: Option<PathBuf>,
    #[arg(long, global = true)]
    pub queries: Option<PathBuf>,
    #[arg(long, global = true)]
    pub qrels: Option<PathBuf>,
    #[arg(long, global = true)]
    pub stoplist: Option<PathBuf>,
    /// Number of k-means clusters.
    #[arg(long, global = true)]
    pub k: Option<usize>,
    /// Clusters handed to the search (default ceil(k/2)).
    #[arg(long, global = true)]
    pub m: Option<usize>,
    #[arg(long = "max-iter", global = true)]
    pub max_iter: Option<usize>,
    /// A count, or "population-size".
    #[arg(long, global = true)]
    pub generations: Option<String>,
    #[arg(long = "migration-interval", global = true)]
    pub migration_interval: Option<usize>,
    #[arg(long = "migration-count", global = true)]
    pub migration_count: Option<usize>,
    /// "support" (default) or "vocabulary".
    #[arg(long, global = true)]
    pub crossover: Option<String>,
    #[arg(long, global = true)]
    pub mutation: bool,
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// hpga, classic or ga.
    #[arg(long, global = true)]
    pub engine: Option<String>,
    #[arg(long = "engine-a", global = true)]
    pub engine_a: Option<String>,
    #[arg(long = "engine-b", global = true)]
    pub engine_b: Option<String>,
    /// Compare two existing eval reports instead of running engines.
    #[arg(long = "report-a", global = true)]
    pub report_a: Option<PathBuf>,
    #[arg(long = "report-b", global = true)]
    pub report_b: Option<PathBuf>,
    #[arg(long = "query-text", global = true)]
    pub query_text: Option<String>,
    #[arg(long = "query-id", global = true)]
    pub query_id: Option<u32>,
    #[arg(long = "top-n", global = true)]
    pub top_n: Option<usize>,
    /// Worker threads (0 = all cores). Output does not depend on it.
    #[arg(long, global = true)]
    pub workers: Option<usize>,
    /// Artifact directory.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Also write one precision row per query.
    #[arg(long = "per-query", global = true)]
    pub per_query: bool,
    /// Full-precision numbers instead of the two-decimal table layout.
    #[arg(long, global = true)]
    pub exact: bool,
    /// Write the per-generation fitness trace next to the ranking.
    #[arg(long, global = true)]
    pub trace: bool,
    /// Fixture to generate: duplicates, disjoint, separated, topics or tables.
    #[arg(long, global = true)]
    pub kind: Option<String>,
}

impl Options {
    /// Fills unset fields from `other`.
    fn or(self, other: Options) -> Options {
        Options {
            docs: self.docs.or(other.docs),
            queries: self.queries.or(other.queries),
            qrels: self.qrels.or(other.qrels),
            stoplist: self.stoplist.or(other.stoplist),
            k: self.k.or(other.k),
            m: self.m.or(other.m),
            max_iter: self.max_iter.or(other.max_iter),
            generations: self.generations.or(other.generations),
            migration_interval: self.migration_interval.or(other.migration_interval),
            migration_count: self.migration_count.or(other.migration_count),
            crossover: self.crossover.or(other.crossover),
            mutation: self.mutation || other.mutation,
            seed: self.seed.or(other.seed),
            engine: self.engine.or(other.engine),
            engine_a: self.engine_a.or(other.engine_a),
            engine_b: self.engine_b.or(other.engine_b),
            report_a: self.report_a.or(other.report_a),
            report_b: self.report_b.or(other.report_b),
            query_text: self.query_text.or(other.query_text),
            query_id: self.query_id.or(other.query_id),
            top_n: self.top_n.or(other.top_n),
            workers: self.workers.or(other.workers),
            out: self.out.or(other.out),
            per_query: self.per_query || other.per_query,
            exact: self.exact || other.exact,
            trace: self.trace || other.trace,
            kind: self.kind.or(other.kind),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Engine {
    Hpga,
    Classic,
    Ga,
}

impl Engine {
    pub fn parse(s: &str) -> anyhow::Result<Engine> {
        match s {
            "hpga" => Ok(Engine::Hpga),
            "classic" => Ok(Engine::Classic),
            "ga" => Ok(Engine::Ga),
            other => bail!("unknown engine {other:?} (expected hpga, classic or ga)"),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Engine::Hpga => "hpga",
            Engine::Classic => "classic",
            Engine::Ga => "ga",
        }
    }
}

/// Resolved settings for one invocation.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub opts: Options,
    pub out: PathBuf,
    pub k: usize,
    pub m: Option<usize>,
    pub max_iter: usize,
    pub ga: GaConfig,
    pub top_n: usize,
    pub workers: usize,
}

impl RunConfig {
    pub fn resolve(opts: Options) -> anyhow::Result<Self> {
        let generations = match opts.generations.as_deref() {
            None => Generations::Fixed(DEFAULT_GENERATIONS),
            Some("population-size") => Generations::PopulationSize,
            Some(n) => Generations::Fixed(n.parse().map_err(|_| {
                anyhow!("--generations must be a count or \"population-size\", got {n:?}")
            })?),
        };
        let crossover = match opts.crossover.as_deref() {
            None | Some("support") => CrossoverSpace::Support,
            // the vocabulary size is filled in once the index is loaded
            Some("vocabulary") => CrossoverSpace::Vocabulary(0),
            Some(other) => {
                bail!("unknown crossover space {other:?} (expected support or vocabulary)")
            }
        };
        let ga = GaConfig {
            generations,
            migration_interval: opts
                .migration_interval
                .unwrap_or(DEFAULT_MIGRATION_INTERVAL),
            migration_count: opts.migration_count,
            seed: opts.seed.unwrap_or(0),
            mutation_enabled: opts.mutation,
            crossover_space: crossover,
            ..GaConfig::default()
        };
        ga.validate()?;
        let max_iter = opts.max_iter.unwrap_or(DEFAULT_MAX_ITER);
        if max_iter == 0 {
            bail!("--max-iter must be at least 1");
        }
        Ok(RunConfig {
            out: opts.out.clone().unwrap_or_else(|| PathBuf::from("out")),
            k: opts.k.unwrap_or(DEFAULT_K),
            m: opts.m,
            max_iter,
            ga,
            top_n: opts.top_n.unwrap_or(10),
            workers: opts.workers.unwrap_or(0),
            opts,
        })
    }

    fn artifact(&self, name: &str) -> PathBuf {
        self.out.join(name)
    }

    fn engine(&self) -> anyhow::Result<Engine> {
        Engine::parse(self.opts.engine.as_deref().unwrap_or("hpga"))
    }
}

/// Parses arguments and runs one subcommand.
pub fn run<I, T>(args: I) -> anyhow::Result<()>
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => {
            print!("{e}");
            return Ok(());
        }
        Err(e) => {
            let rendered = e.to_string();
            let first = rendered.lines().next().unwrap_or("invalid arguments");
            bail!("{}", first.trim_start_matches("error: "));
        }
    };
    let mut opts = cli.options;
    if let Some(path) = &cli.config {
        let text = fs::read_to_string(path)
            .with_context(|| format!("reading config {}", path.display()))?;
        let file: Options =
            toml::from_str(&text).with_context(|| format!("parsing config {}", path.display()))?;
        opts = opts.or(file);
    }
    let cfg = RunConfig::resolve(opts)?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.workers)
        .build()
        .context("starting worker pool")?;
    pool.install(|| match cli.command {
        Command::Index => cmd_index(&cfg),
        Command::Cluster => cmd_cluster(&cfg),
        Command::Search => cmd_search(&cfg),
        Command::Eval => cmd_eval(&cfg),
        Command::Compare => cmd_compare(&cfg),
        Command::Fixture => cmd_fixture(&cfg),
    })
}

fn write_file(path: &Path, contents: impl AsRef<[u8]>) -> anyhow::Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    }
    fs::write(path, contents).with_context(|| format!("writing {}", path.display()))
}

fn require<'a>(value: &'a Option<PathBuf>, flag: &str) -> anyhow::Result<&'a Path> {
    value.as_deref().ok_or_else(|| anyhow!("missing --{flag}"))
}

fn load_index(cfg: &RunConfig) -> anyhow::Result<Index> {
    let path = cfg.artifact(INDEX_FILE);
    if !path.exists() {
        bail!(
            "index {} not found; run `clusterir index` first",
            path.display()
        );
    }
    Ok(Index::read(&path)?)
}

fn load_clusters(cfg: &RunConfig, index: &Index) -> anyhow::Result<ClusterSet> {
    let path = cfg.artifact(CLUSTERS_FILE);
    if !path.exists() {
        bail!(
            "cluster file {} not found; run `clusterir cluster` first",
            path.display()
        );
    }
    let text = fs::read_to_string(&path).with_context(|| format!("reading {}", path.display()))?;
    Ok(ClusterSet::from_dump(
        &text,
        &path.display().to_string(),
        &index.vectors,
    )?)
}

/// The stoplist saved at index time, unless one is given explicitly.
fn analyzer(cfg: &RunConfig) -> anyhow::Result<Analyzer> {
    let stoplist = match &cfg.opts.stoplist {
        Some(p) => StopList::from_file(p)?,
        None => {
            let saved = cfg.artifact(STOPLIST_FILE);
            if saved.exists() {
                StopList::from_file(&saved)?
            } else {
                StopList::standard()
            }
        }
    };
    Ok(Analyzer::new(stoplist))
}

pub fn cmd_index(cfg: &RunConfig) -> anyhow::Result<()> {
    let docs_path = require(&cfg.opts.docs, "docs")?;
    let stoplist = match &cfg.opts.stoplist {
        Some(p) => StopList::from_file(p)?,
        None => StopList::standard(),
    };
    let analyzer = Analyzer::new(stoplist);
    let docs = parse_smart_docs(docs_path, &analyzer)?;
    if docs.is_empty() {
        bail!("{}: no documents found", docs_path.display());
    }
    let index = Index::build(&docs)?;
    write_file(&cfg.artifact(INDEX_FILE), index.to_bytes())?;
    write_file(&cfg.artifact(STOPLIST_FILE), analyzer.stoplist.to_text())?;
    println!(
        "indexed {} docs, {} terms",
        index.vectors.len(),
        index.vocab.len()
    );
    Ok(())
}

pub fn cmd_cluster(cfg: &RunConfig) -> anyhow::Result<()> {
    let index = load_index(cfg)?;
    let n = index.vectors.len();
    if cfg.k == 0 || cfg.k > n {
        bail!("k={} must lie in 1..={n}", cfg.k);
    }
    let cs = kmeans_cluster(&index.vectors, cfg.k, cfg.ga.seed, cfg.max_iter)?;
    write_file(&cfg.artifact(CLUSTERS_FILE), cs.to_dump())?;
    let sizes: Vec<String> = cs.sizes().iter().map(usize::to_string).collect();
    println!(
        "clustered {n} docs into {} clusters in {} iterations; sizes {}",
        cs.k(),
        cs.iterations_run(),
        sizes.join(" ")
    );
    Ok(())
}

/// Everything a ranking run needs, loaded once.
struct Searcher {
    index: Index,
    clusters: Option<ClusterSet>,
    ga: GaConfig,
    m: Option<usize>,
}

impl Searcher {
    fn load(cfg: &RunConfig, engines: &[Engine]) -> anyhow::Result<Self> {
        let index = load_index(cfg)?;
        let clusters = if engines.contains(&Engine::Hpga) {
            Some(load_clusters(cfg, &index)?)
        } else {
            None
        };
        let mut ga = cfg.ga.clone();
        if let CrossoverSpace::Vocabulary(_) = ga.crossover_space {
            ga.crossover_space = CrossoverSpace::Vocabulary(index.vocab.len() as u32);
        }
        if let (Some(cs), Some(m)) = (&clusters, cfg.m) {
            if m == 0 || m > cs.k() {
                bail!("m={m} must lie in 1..={}", cs.k());
            }
        }
        Ok(Searcher {
            index,
            clusters,
            ga,
            m: cfg.m,
        })
    }

    fn rank(&self, engine: Engine, q: &TermVector) -> anyhow::Result<(RankedList, Vec<TraceRow>)> {
        Ok(match engine {
            Engine::Classic => (classic_ir_rank(q, &self.index.vectors), Vec::new()),
            Engine::Ga => (ga_ir_rank(q, &self.index.vectors, &self.ga)?, Vec::new()),
            Engine::Hpga => {
                let cs = self.clusters.as_ref().ok_or_else(|| {
                    anyhow!("hpga needs {CLUSTERS_FILE}; run `clusterir cluster` first")
                })?;
                let m = self.m.unwrap_or_else(|| default_selected(cs.k()));
                let selected = select_relevant_clusters(cs, q, m)?;
                run_hpga_traced(&self.index.vectors, cs, &selected, q, &self.ga)?
            }
        })
    }
}

pub fn cmd_search(cfg: &RunConfig) -> anyhow::Result<()> {
    let engine = cfg.engine()?;
    let searcher = Searcher::load(cfg, &[engine])?;
    let analyzer = analyzer(cfg)?;
    let (query_id, tokens) = match (&cfg.opts.query_text, cfg.opts.query_id) {
        (Some(text), _) => (None, analyzer.analyze(text)),
        (None, Some(id)) => {
            let path = require(&cfg.opts.queries, "queries")?;
            let queries = parse_smart_queries(path, &analyzer)?;
            let q = queries
                .into_iter()
                .find(|q| q.id == id)
                .ok_or_else(|| anyhow!("query {id} not found in {}", path.display()))?;
            (Some(id), q.tokens)
        }
        (None, None) => bail!("search needs --query-text or --query-id"),
    };
    let qv = tokens_vector(&tokens, &searcher.index.vocab);
    let (mut ranked, trace) = searcher.rank(engine, &qv)?;
    ranked.query_id = query_id;

    let path = cfg.artifact(&format!("ranked-{}.csv", engine.name()));
    write_file(&path, ranked.to_csv())?;
    if cfg.opts.trace && !trace.is_empty() {
        write_file(
            &cfg.artifact(&format!("trace-{}.csv", engine.name())),
            trace_to_text(&trace),
        )?;
    }
    for (i, (d, s)) in ranked.entries.iter().take(cfg.top_n).enumerate() {
        println!("{:>4}  {:>6}  {:.6}", i + 1, d, s);
    }
    println!(
        "{} documents ranked; full list in {}",
        ranked.len(),
        path.display()
    );
    Ok(())
}

fn evaluate(cfg: &RunConfig, searcher: &Searcher, engine: Engine) -> anyhow::Result<EvalReport> {
    let analyzer = analyzer(cfg)?;
    let queries = parse_smart_queries(require(&cfg.opts.queries, "queries")?, &analyzer)?;
    let qrels_path = require(&cfg.opts.qrels, "qrels")?;
    if !qrels_path.exists() {
        bail!("qrels file {} not found", qrels_path.display());
    }
    let qrels = load_qrels(qrels_path)?;
    let judged: Vec<_> = queries
        .iter()
        .filter(|q| qrels.relevant(q.id).is_some_and(|r| !r.is_empty()))
        .collect();
    let skipped = queries.len() - judged.len();
    let rows = judged
        .par_iter()
        .map(|q| {
            let qv = tokens_vector(&q.tokens, &searcher.index.vocab);
            let (mut ranked, _) = searcher.rank(engine, &qv)?;
            ranked.query_id = Some(q.id);
            let relevant = qrels.relevant(q.id).expect("filtered above");
            Ok((q.id, interpolated_precision_row(&ranked, relevant)?))
        })
        .collect::<anyhow::Result<Vec<(u32, PrecisionRow)>>>()?;
    Ok(EvalReport::from_rows(engine.name(), rows, skipped))
}

pub fn cmd_eval(cfg: &RunConfig) -> anyhow::Result<()> {
    let engine = cfg.engine()?;
    let searcher = Searcher::load(cfg, &[engine])?;
    let report = evaluate(cfg, &searcher, engine)?;
    let csv = report.to_csv(cfg.opts.per_query, cfg.opts.exact);
    let path = cfg.artifact(&format!("eval-{}.csv", engine.name()));
    write_file(&path, &csv)?;
    print!("{}", report.to_csv(false, false));
    println!("report written to {}", path.display());
    Ok(())
}

pub fn cmd_compare(cfg: &RunConfig) -> anyhow::Result<()> {
    let (a_label, a, b_label, b) = match (&cfg.opts.report_a, &cfg.opts.report_b) {
        (Some(ra), Some(rb)) => {
            let read = |p: &PathBuf| -> anyhow::Result<(String, PrecisionRow)> {
                let text =
                    fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))?;
                let label = p
                    .file_stem()
                    .map_or("report".into(), |s| s.to_string_lossy().into_owned());
                Ok((label, parse_precision_row(&text, &p.display().to_string())?))
            };
            let (la, a) = read(ra)?;
            let (lb, b) = read(rb)?;
            (la, a, lb, b)
        }
        (None, None) => {
            let ea = Engine::parse(cfg.opts.engine_a.as_deref().unwrap_or("hpga"))?;
            let eb = Engine::parse(cfg.opts.engine_b.as_deref().unwrap_or("classic"))?;
            let searcher = Searcher::load(cfg, &[ea, eb])?;
            let ra = evaluate(cfg, &searcher, ea)?;
            let rb = evaluate(cfg, &searcher, eb)?;
            (
                ea.name().to_string(),
                ra.averaged,
                eb.name().to_string(),
                rb.averaged,
            )
        }
        _ => bail!("--report-a and --report-b must be given together"),
    };
    let csv = comparison_csv(&a_label, &a, &b_label, &b, cfg.opts.exact);
    let path = cfg.artifact(&format!("compare-{a_label}-vs-{b_label}.csv"));
    write_file(&path, &csv)?;
    print!("{}", comparison_csv(&a_label, &a, &b_label, &b, false));
    println!("comparison written to {}", path.display());
    Ok(())
}

pub fn cmd_fixture(cfg: &RunConfig) -> anyhow::Result<()> {
    let kind = cfg.opts.kind.as_deref().ok_or_else(|| {
        anyhow!("fixture needs --kind (duplicates, disjoint, separated, topics or tables)")
    })?;
    let files = fixtures::generate(kind, cfg.opts.seed.unwrap_or(0))?;
    for (name, contents) in &files {
        write_file(&cfg.artifact(name), contents)?;
    }
    println!("wrote {} files to {}", files.len(), cfg.out.display());
    Ok(())
}
