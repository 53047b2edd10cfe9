use std::collections::BTreeMap;
use std::fs;
use std::io::Write;
use std::net::SocketAddr;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;

use anyhow::{bail, Context};
use clap::{Parser, Subcommand};
use lectures_core::ontology::emit_ontology;
use lectures_core::query::{self, Pattern};
use lectures_core::rdf::{self, Vocabulary};
use lectures_server::config::Config;
use lectures_server::http::{router, AppState};
use lectures_server::pipeline;
use lectures_server::repo::{Change, CommitOutcome, Repository};

#[derive(Parser)]
#[command(name = "lectures", version, about = "Compile semantic lecture notes and serve them as Linked Data")]
struct Cli {
    /// TOML file with `base_uri`, `ontology_ns` and `port`.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Overrides `base_uri` from the config.
    #[arg(long, global = true)]
    base: Option<String>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Compile every .stex file under a directory and write the artifacts.
    Build {
        dir: PathBuf,
        #[arg(long, default_value = "out")]
        out: PathBuf,
    },
    /// Check a directory of sources without writing anything.
    Validate { dir: PathBuf },
    /// Serve a repository over HTTP.
    Serve {
        #[arg(long)]
        root: PathBuf,
        #[arg(long)]
        port: Option<u16>,
        /// Directory served under /static.
        #[arg(long = "static")]
        static_dir: Option<PathBuf>,
    },
    /// Commit files into a repository; each file is stored under its file name
    /// unless given as `repo/path=local/path`.
    Commit {
        repo: PathBuf,
        files: Vec<String>,
        #[arg(short, long, default_value = "")]
        message: String,
        #[arg(long, default_value = "")]
        author: String,
        /// Repository paths to delete.
        #[arg(long)]
        delete: Vec<String>,
    },
    /// Print a source file as committed at a revision.
    Checkout {
        repo: PathBuf,
        path: String,
        #[arg(long)]
        rev: Option<u64>,
    },
    /// Run a query against a repository's HEAD.
    Query {
        repo: PathBuf,
        #[arg(long)]
        gaps: bool,
        #[arg(long, value_name = "THEORY")]
        examples_for: Option<String>,
        #[arg(long, value_name = "THEORY")]
        prereq: Vec<String>,
        /// Conjunctive pattern such as `?e o:exemplifies ?c`.
        #[arg(long)]
        select: Option<String>,
    },
    /// Print the ontology as Turtle.
    Ontology,
}

fn main() -> ExitCode {
    tracing_subscriber::fmt()
        .with_env_filter(
            tracing_subscriber::EnvFilter::try_from_default_env().unwrap_or_else(|_| "info".into()),
        )
        .with_writer(std::io::stderr)
        .init();
    match run(Cli::parse()) {
        Ok(code) => code,
        // A reader that stops early, such as `head`, is not an error.
        Err(e) if e.downcast_ref::<std::io::Error>().is_some_and(|e| e.kind() == std::io::ErrorKind::BrokenPipe) => {
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}

fn load_config(cli: &Cli) -> anyhow::Result<Config> {
    let mut config = match &cli.config {
        Some(path) => Config::load(path)?,
        None => Config::default(),
    };
    if let Some(base) = &cli.base {
        config = config.with_base_uri(base);
    }
    Ok(config)
}

fn report(problems: &[pipeline::Problem]) -> ExitCode {
    for p in problems {
        eprintln!("{p}");
    }
    ExitCode::FAILURE
}

fn run(cli: Cli) -> anyhow::Result<ExitCode> {
    let config = load_config(&cli)?;
    match cli.command {
        Command::Build { dir, out } => {
            let files = pipeline::read_dir(&dir)?;
            let build = match pipeline::build(&files, &config) {
                Ok(b) => b,
                Err(problems) => return Ok(report(&problems)),
            };
            fs::create_dir_all(&out).with_context(|| format!("creating {}", out.display()))?;
            fs::write(out.join("collection.omdoc"), &build.collection_xml)?;
            fs::write(out.join("collection.nt"), rdf::to_ntriples(&build.triples))?;
            for (id, a) in &build.theories {
                fs::write(out.join(format!("{id}.omdoc")), &a.omdoc)?;
                fs::write(out.join(format!("{id}.xhtml")), &a.xhtml)?;
                fs::write(out.join(format!("{id}.nt")), rdf::to_ntriples(&a.triples))?;
            }
            eprintln!(
                "built {} theories, {} triples into {}",
                build.theories.len(),
                build.triples.len(),
                out.display()
            );
            Ok(ExitCode::SUCCESS)
        }
        Command::Validate { dir } => {
            let files = pipeline::read_dir(&dir)?;
            match pipeline::build(&files, &config) {
                Ok(b) => {
                    eprintln!("ok: {} theories", b.theories.len());
                    Ok(ExitCode::SUCCESS)
                }
                Err(problems) => Ok(report(&problems)),
            }
        }
        Command::Serve { root, port, static_dir } => {
            let port = port.unwrap_or(config.port);
            let repo = Arc::new(Repository::open(root, config)?);
            serve(repo, port, static_dir)
        }
        Command::Commit {
            repo,
            files,
            message,
            author,
            delete,
        } => {
            let repo = Repository::open(repo, config)?;
            let mut changes = BTreeMap::new();
            for spec in files {
                let (target, local) = match spec.split_once('=') {
                    Some((t, l)) => (t.to_string(), PathBuf::from(l)),
                    None => {
                        let local = PathBuf::from(&spec);
                        let name = file_name(&local)?;
                        (name, local)
                    }
                };
                let text = fs::read_to_string(&local).with_context(|| format!("reading {}", local.display()))?;
                changes.insert(target, Change::Put(text));
            }
            for path in delete {
                changes.insert(path, Change::Delete);
            }
            match repo.commit(&changes, &author, &message)? {
                CommitOutcome::Accepted(n) => {
                    writeln!(std::io::stdout().lock(), "{n}")?;
                    Ok(ExitCode::SUCCESS)
                }
                CommitOutcome::Rejected(rejections) => {
                    for r in rejections {
                        eprintln!("{r}");
                    }
                    Ok(ExitCode::FAILURE)
                }
            }
        }
        Command::Checkout { repo, path, rev } => {
            let repo = Repository::open(repo, config)?;
            write!(std::io::stdout().lock(), "{}", repo.checkout(&path, rev)?)?;
            Ok(ExitCode::SUCCESS)
        }
        Command::Query {
            repo,
            gaps,
            examples_for,
            prereq,
            select,
        } => {
            let repo = Repository::open(repo, config)?;
            let head = repo.head();
            let uris = head.build.collection.uris();
            let theory = |t: &str| if t.contains("://") { t.to_string() } else { uris.theory(t) };
            if gaps {
                writeln!(std::io::stdout().lock(), "{}", serde_json::to_string_pretty(&query::find_gaps(&head.store))?)?;
            } else if let Some(topic) = examples_for {
                let prereqs: Vec<String> = prereq.iter().map(|p| theory(p)).collect();
                for (concept, example) in
                    query::examples_for(&head.store, &theory(&topic), prereqs.iter().map(String::as_str))
                {
                    writeln!(std::io::stdout().lock(), "{concept}\t{example}")?;
                }
            } else if let Some(text) = select {
                let pattern = Pattern::parse(&text)?;
                let vars = pattern.variables();
                writeln!(std::io::stdout().lock(), "{}", vars.join("\t"))?;
                for row in head.store.select(&pattern)? {
                    let cells: Vec<&str> = vars.iter().map(|v| row[v].value()).collect();
                    writeln!(std::io::stdout().lock(), "{}", cells.join("\t"))?;
                }
            } else {
                bail!("choose one of --gaps, --examples-for or --select");
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Ontology => {
            write!(std::io::stdout().lock(), "{}", emit_ontology(&Vocabulary::new(config.ontology_ns)))?;
            Ok(ExitCode::SUCCESS)
        }
    }
}

fn file_name(path: &Path) -> anyhow::Result<String> {
    path.file_name()
        .map(|n| n.to_string_lossy().into_owned())
        .with_context(|| format!("{} has no file name", path.display()))
}

fn serve(repo: Arc<Repository>, port: u16, static_dir: Option<PathBuf>) -> anyhow::Result<ExitCode> {
    let runtime = tokio::runtime::Runtime::new()?;
    runtime.block_on(async move {
        let app = router(AppState { repo: Arc::clone(&repo) }, static_dir);
        let addr = SocketAddr::from(([0, 0, 0, 0], port));
        let listener = tokio::net::TcpListener::bind(addr)
            .await
            .with_context(|| format!("binding {addr}"))?;
        tracing::info!(%addr, head = repo.head().info.number, "serving");
        axum::serve(listener, app)
            .with_graceful_shutdown(async {
                let _ = tokio::signal::ctrl_c().await;
            })
            .await?;
        Ok(ExitCode::SUCCESS)
    })
}
