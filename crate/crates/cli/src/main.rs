//! Command-line surface: ingest records and read logs, build derived
//! state, run newsletters and alerts, analyze, and serve public links.

use std::fs;
use std::io::Write;
use std::path::PathBuf;

use chrono::{NaiveDate, Utc};
use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand};
use vjournal::analytics::{concordance_stats, group_rows};
use vjournal::corpus::match_concordance;
use vjournal::index::build_index;
use vjournal::newsletter::{
    generate_daily, generate_weekly, render_daily, render_newsletter, RenderFormat, Snapshots,
};
use vjournal::profile::{Profile, ProfileStore};
use vjournal::readstats::{compute_coread, ingest_reads};
use vjournal::refgraph::{build_citation_graph, resolve_references};
use vjournal::{Error, IngestReport, Result, SeedOrder, Thresholds};

mod server;
mod state;

use server::NewsletterServer;
use state::State;

#[derive(Parser, Debug)]
#[command(
    name = "vjournal",
    version,
    about = "Virtual-journal pipeline: bibliographic ingestion, citation statistics, and personalized newsletters"
)]
struct Cli {
    #[command(flatten)]
    config: ConfigArgs,
    #[command(subcommand)]
    command: Commands,
}

#[derive(Args, Debug)]
struct ConfigArgs {
    #[arg(long, global = true, default_value = "data/corpus", env = "VJOURNAL_CORPUS_DIR")]
    corpus_dir: PathBuf,
    #[arg(long, global = true, default_value = "data/profiles", env = "VJOURNAL_PROFILES_DIR")]
    profiles_dir: PathBuf,
    #[arg(long, global = true, default_value = "out", env = "VJOURNAL_OUT_DIR")]
    out_dir: PathBuf,
    #[arg(long, global = true, default_value_t = 0.75, env = "VJOURNAL_THETA_CONC")]
    theta_conc: f64,
    #[arg(long, global = true, default_value_t = 0.6, env = "VJOURNAL_THETA_REF")]
    theta_ref: f64,
    #[arg(long, global = true, default_value_t = 0.05, env = "VJOURNAL_REF_MARGIN")]
    ref_margin: f64,
    #[arg(long, global = true, default_value_t = 200, env = "VJOURNAL_S_MAX")]
    s_max: usize,
    #[arg(long, global = true, default_value_t = 10, env = "VJOURNAL_LIST_CAP")]
    list_cap: usize,
    #[arg(long, global = true, default_value_t = 100, env = "VJOURNAL_SEED_CAP")]
    seed_cap: usize,
    #[arg(long, global = true, default_value = "reads", env = "VJOURNAL_SEED_ORDER")]
    seed_order: SeedOrder,
}

impl ConfigArgs {
    fn thresholds(&self) -> Result<Thresholds> {
        let thresholds = Thresholds {
            theta_conc: self.theta_conc,
            theta_ref: self.theta_ref,
            ref_margin: self.ref_margin,
            s_max: self.s_max,
            list_cap: self.list_cap,
            seed_cap: self.seed_cap,
            seed_order: self.seed_order,
        };
        thresholds.validate()?;
        Ok(thresholds)
    }
}

#[derive(Subcommand, Debug)]
enum Commands {
    /// Ingest a record file and optionally a reads log.
    Ingest(IngestArgs),
    /// Link concordances, resolve references, build graph and co-read stats.
    Build(BuildArgs),
    /// Generate weekly newsletters or daily alerts.
    Run(RunArgs),
    /// Report e-print fraction and reads/cites statistics.
    Analyze(AnalyzeArgs),
    /// Serve rendered newsletters at their public links.
    Serve(ServeArgs),
}

#[derive(Args, Debug)]
struct IngestArgs {
    /// Line-delimited JSON record file.
    #[arg(long)]
    records: Option<PathBuf>,
    /// CSV reads log (session,record,timestamp).
    #[arg(long)]
    reads: Option<PathBuf>,
    /// Ingestion date stamped on records lacking date_added.
    #[arg(long, env = "VJOURNAL_NOW")]
    as_of: Option<NaiveDate>,
}

#[derive(Args, Debug)]
struct BuildArgs {
    /// Write a resolution audit line per reference string.
    #[arg(long)]
    audit: bool,
}

#[derive(Args, Debug)]
#[group(id = "cadence", required = true, multiple = false)]
struct CadenceArgs {
    /// Generate weekly newsletters.
    #[arg(long, group = "cadence")]
    weekly: bool,
    /// Generate daily alerts.
    #[arg(long, group = "cadence")]
    daily: bool,
}

#[derive(Args, Debug)]
struct RunArgs {
    #[command(flatten)]
    cadence: CadenceArgs,
    /// Run a single profile.
    #[arg(long, conflicts_with = "all")]
    profile: Option<String>,
    /// Run every stored profile.
    #[arg(long)]
    all: bool,
    /// Pinned clock; defaults to today.
    #[arg(long, env = "VJOURNAL_NOW")]
    now: Option<NaiveDate>,
}

#[derive(Args, Debug)]
struct AnalyzeArgs {
    /// How many top-cited groups to inspect.
    #[arg(long)]
    top_n: usize,
    /// Optional per-group CSV output path.
    #[arg(long)]
    csv: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct ServeArgs {
    #[arg(long, default_value = "127.0.0.1:8787", env = "VJOURNAL_BIND")]
    bind: String,
}

fn today() -> NaiveDate {
    Utc::now().date_naive()
}

fn print_report(context: &str, report: &IngestReport) {
    println!("{context}: {} added, {} rejected", report.added, report.rejected.len());
    for (line, reason) in &report.rejected {
        eprintln!("{context}: line {line}: {reason}");
    }
}

fn run_ingest(config: &ConfigArgs, args: &IngestArgs) -> Result<()> {
    if args.records.is_none() && args.reads.is_none() {
        return Err(Error::Validation("nothing to ingest: pass --records and/or --reads".into()));
    }
    fs::create_dir_all(&config.corpus_dir)?;
    let mut state = State::load(&config.corpus_dir)?;
    let as_of = args.as_of.unwrap_or_else(today);

    if let Some(records) = &args.records {
        let report = state.store.ingest_records(records, as_of)?;
        print_report("records", &report);
    }
    if let Some(reads) = &args.reads {
        let snap = state.store.snapshot();
        let (events, report) = ingest_reads(reads, &snap)?;
        let added = state.merge_reads(events);
        print_report("reads", &report);
        if added < report.added {
            println!("reads: {} already known", report.added - added);
        }
    }
    state.save()
}

fn run_build(config: &ConfigArgs, args: &BuildArgs) -> Result<()> {
    let thresholds = config.thresholds()?;
    let mut state = State::load(&config.corpus_dir)?;

    let outcome = match_concordance(&mut state.store, &thresholds);
    println!("concordance: {} linked, {} ambiguous", outcome.linked.len(), outcome.ambiguous.len());
    for pair in &outcome.ambiguous {
        let tied: Vec<String> = pair.candidates.iter().map(|(id, s)| format!("{id} ({s:.3})")).collect();
        eprintln!("concordance: {} is ambiguous between {}", pair.eprint, tied.join(", "));
    }

    let snap = state.store.snapshot();
    let idx = build_index(&snap);
    let run = resolve_references(&snap, &idx, &thresholds);
    let resolved_refs: usize = run.resolved.values().map(Vec::len).sum();
    println!("resolution: {} of {} references resolved", resolved_refs, run.audit.len());

    if args.audit {
        fs::create_dir_all(state.derived_dir())?;
        let mut file = fs::File::create(state.derived_dir().join(state::AUDIT_FILE))?;
        for row in &run.audit {
            let line = serde_json::to_string(row).expect("audit row serializes");
            writeln!(file, "{line}")?;
        }
        println!("audit: {} rows", run.audit.len());
    }

    let ids: Vec<_> = state.store.records().map(|r| r.id.clone()).collect();
    for id in ids {
        let targets = run.resolved.get(&id).cloned().unwrap_or_default();
        state.store.set_resolved_refs(&id, targets)?;
    }

    let snap = state.store.snapshot();
    let graph = build_citation_graph(&snap);
    let coread = compute_coread(&state.reads, &snap, &thresholds);
    println!(
        "graph: {} citing groups; coread: {} pairs over {} sessions' reads",
        graph.edges().len(),
        coread.pairs().len(),
        state.reads.len()
    );

    state.save()?;
    state.save_derived(&graph, &coread)
}

fn run_run(config: &ConfigArgs, args: &RunArgs) -> Result<()> {
    let thresholds = config.thresholds()?;
    let state = State::load(&config.corpus_dir)?;
    let profiles = ProfileStore::open(&config.profiles_dir)?;
    let now = args.now.unwrap_or_else(today);

    let selected: Vec<Profile> = if args.all {
        profiles.load_all()?
    } else {
        match &args.profile {
            Some(id) => vec![profiles.load(id)?],
            None => return Err(Error::Validation("pass --profile <id> or --all".into())),
        }
    };

    let snap = state.store.snapshot();
    let idx = build_index(&snap);
    let (graph, coread) = state.load_derived(&snap, &thresholds)?;
    fs::create_dir_all(&config.out_dir)?;

    for profile in &selected {
        if args.cadence.weekly {
            let snapshots = Snapshots { corpus: &snap, index: &idx, graph: &graph, coread: &coread };
            let doc = generate_weekly(profile, snapshots, now, &thresholds)?;
            let html_path = config.out_dir.join(format!("{}.html", doc.public_token));
            fs::write(&html_path, render_newsletter(&doc, RenderFormat::Html))?;
            fs::write(
                config.out_dir.join(format!("{}.txt", doc.public_token)),
                render_newsletter(&doc, RenderFormat::Text),
            )?;
            profiles.set_last_run(&profile.profile_id, now)?;
            println!("weekly {} -> {}", profile.profile_id, html_path.display());
        } else {
            let alert = generate_daily(profile, &snap, &idx, now, &thresholds)?;
            let base = format!("daily-{}-{now}", profile.profile_id);
            let html_path = config.out_dir.join(format!("{base}.html"));
            fs::write(&html_path, render_daily(&alert, RenderFormat::Html))?;
            fs::write(config.out_dir.join(format!("{base}.txt")), render_daily(&alert, RenderFormat::Text))?;
            println!("daily {} -> {}", profile.profile_id, html_path.display());
        }
    }
    Ok(())
}

fn run_analyze(config: &ConfigArgs, args: &AnalyzeArgs) -> Result<()> {
    let thresholds = config.thresholds()?;
    let state = State::load(&config.corpus_dir)?;
    let snap = state.store.snapshot();
    let (graph, coread) = state.load_derived(&snap, &thresholds)?;

    let stats = concordance_stats(&snap, &graph, &coread, args.top_n)?;
    println!("{}", serde_json::to_string_pretty(&stats).expect("stats serialize"));

    if let Some(csv_path) = &args.csv {
        let mut body = String::from("group,cites,reads,eprinted\n");
        for row in group_rows(&snap, &graph, &coread) {
            body.push_str(&format!("{},{},{},{}\n", row.group, row.cites, row.reads, row.eprinted));
        }
        fs::write(csv_path, body)?;
        println!("csv -> {}", csv_path.display());
    }
    Ok(())
}

fn run_serve(config: &ConfigArgs, args: &ServeArgs) -> Result<()> {
    if !config.out_dir.is_dir() {
        return Err(Error::Validation(format!(
            "output directory {} does not exist; run `vjournal run` first",
            config.out_dir.display()
        )));
    }
    let server = NewsletterServer::bind(&args.bind, &config.out_dir)?;
    println!("serving {} on http://{}", config.out_dir.display(), server.local_addr()?);
    server.run()?;
    Ok(())
}

fn dispatch(cli: Cli) -> Result<()> {
    match &cli.command {
        Commands::Ingest(args) => run_ingest(&cli.config, args),
        Commands::Build(args) => run_build(&cli.config, args),
        Commands::Run(args) => run_run(&cli.config, args),
        Commands::Analyze(args) => run_analyze(&cli.config, args),
        Commands::Serve(args) => run_serve(&cli.config, args),
    }
}

fn main() {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(err) if matches!(err.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) => {
            let _ = err.print();
            return;
        }
        Err(err) => {
            let _ = err.print();
            std::process::exit(1);
        }
    };
    if let Err(err) = dispatch(cli) {
        eprintln!("error: {err}");
        std::process::exit(if err.is_io() { 2 } else { 1 });
    }
}
