//! Append-only revision store with a build gate on every commit.
//!
//! On-disk layout under the repository root:
//!
//! ```text
//! manifest.json              {"base_uri", "ontology_ns", "head"}
//! revs/{n}/revision.json     number, author, message, timestamp, paths
//! revs/{n}/src/...           committed sources, byte for byte
//! revs/{n}/derived/...       collection.omdoc, collection.nt, {theory}.omdoc|.xhtml|.nt
//! ```
//!
//! A revision directory is written under a temporary name and renamed into
//! place before the manifest is replaced, so a crash never exposes a
//! half-written revision.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Component, Path, PathBuf};
use std::sync::{Arc, Mutex, RwLock};

use lectures_core::omdoc;
use lectures_core::query::Store;
use lectures_core::rdf::{self, TripleSet, Vocabulary};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::config::Config;
use crate::pipeline::{self, Artifacts, Build, Problem};

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Change {
    Put(String),
    Delete,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct RevisionInfo {
    pub number: u64,
    pub author: String,
    pub message: String,
    pub timestamp: String,
    pub paths: Vec<String>,
}

/// A revision with its sources, derived artifacts and loaded triple store.
#[derive(Debug)]
pub struct Snapshot {
    pub info: RevisionInfo,
    pub files: BTreeMap<String, String>,
    pub build: Build,
    pub store: Store,
}

impl Snapshot {
    fn new(info: RevisionInfo, files: BTreeMap<String, String>, build: Build, config: &Config) -> Self {
        let mut store = Store::new(&Vocabulary::new(config.ontology_ns.clone()));
        store.load(&build.triples);
        Snapshot {
            info,
            files,
            build,
            store,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Rejection {
    EmptyCommit,
    InvalidPath { path: String, reason: String },
    MissingPath { path: String },
    Build { problem: Problem },
}

impl std::fmt::Display for Rejection {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Rejection::EmptyCommit => write!(f, "commit contains no changes"),
            Rejection::InvalidPath { path, reason } => write!(f, "invalid path `{path}`: {reason}"),
            Rejection::MissingPath { path } => write!(f, "cannot delete `{path}`: no such file"),
            Rejection::Build { problem } => write!(f, "{problem}"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum CommitOutcome {
    Accepted(u64),
    Rejected(Vec<Rejection>),
}

#[derive(Debug, Error)]
pub enum RepoError {
    #[error("no revision {0}")]
    NoSuchRevision(u64),
    #[error("`{path}` does not exist at revision {rev}")]
    NoSuchPath { path: String, rev: u64 },
    #[error("repository is corrupt: {0}")]
    Corrupt(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

#[derive(Clone, Debug, Serialize, Deserialize)]
struct Manifest {
    base_uri: String,
    ontology_ns: String,
    head: u64,
}

pub struct Repository {
    root: PathBuf,
    config: Config,
    head: RwLock<Arc<Snapshot>>,
    commit_lock: Mutex<()>,
    history: Mutex<BTreeMap<u64, Arc<Snapshot>>>,
}

impl std::fmt::Debug for Repository {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Repository")
            .field("root", &self.root)
            .field("head", &self.head().info.number)
            .finish()
    }
}

/// Checks a repository-relative path: `/`-separated normal components only.
pub fn check_path(path: &str) -> Result<(), String> {
    if path.is_empty() {
        return Err("empty path".into());
    }
    if path.contains('\\') {
        return Err("use `/` as separator".into());
    }
    for part in path.split('/') {
        if part.is_empty() || part == "." || part == ".." {
            return Err("path components must be non-empty names".into());
        }
    }
    let ok = Path::new(path)
        .components()
        .all(|c| matches!(c, Component::Normal(_)));
    if !ok {
        return Err("path must be relative".into());
    }
    Ok(())
}

fn write_file(path: &Path, contents: &str) -> std::io::Result<()> {
    if let Some(parent) = path.parent() {
        fs::create_dir_all(parent)?;
    }
    fs::write(path, contents)
}

impl Repository {
    /// Opens the repository at `root`, creating an empty one if needed.
    pub fn open(root: impl Into<PathBuf>, config: Config) -> Result<Self, RepoError> {
        let root = root.into();
        let manifest_path = root.join("manifest.json");
        let manifest = if manifest_path.exists() {
            serde_json::from_str::<Manifest>(&fs::read_to_string(&manifest_path)?)?
        } else {
            fs::create_dir_all(root.join("revs"))?;
            let m = Manifest {
                base_uri: config.base_uri.clone(),
                ontology_ns: config.ontology_ns.clone(),
                head: 0,
            };
            write_manifest(&root, &m)?;
            m
        };
        let repo = Repository {
            head: RwLock::new(Arc::new(Snapshot::new(
                RevisionInfo::default(),
                BTreeMap::new(),
                Build::empty(&config),
                &config,
            ))),
            root,
            config,
            commit_lock: Mutex::new(()),
            history: Mutex::new(BTreeMap::new()),
        };
        if manifest.head > 0 {
            let cache_valid =
                manifest.base_uri == repo.config.base_uri && manifest.ontology_ns == repo.config.ontology_ns;
            let snapshot = Arc::new(repo.load(manifest.head, cache_valid)?);
            *repo.head.write().expect("head lock") = snapshot;
        }
        Ok(repo)
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    pub fn config(&self) -> &Config {
        &self.config
    }

    pub fn head(&self) -> Arc<Snapshot> {
        Arc::clone(&self.head.read().expect("head lock"))
    }

    fn rev_dir(&self, n: u64) -> PathBuf {
        self.root.join("revs").join(n.to_string())
    }

    /// HEAD for `None`, otherwise the requested revision.
    pub fn snapshot(&self, rev: Option<u64>) -> Result<Arc<Snapshot>, RepoError> {
        let head = self.head();
        let Some(n) = rev else {
            return Ok(head);
        };
        if n == head.info.number {
            return Ok(head);
        }
        if n == 0 || n > head.info.number {
            return Err(RepoError::NoSuchRevision(n));
        }
        if let Some(s) = self.history.lock().expect("history lock").get(&n) {
            return Ok(Arc::clone(s));
        }
        let manifest: Manifest = serde_json::from_str(&fs::read_to_string(self.root.join("manifest.json"))?)?;
        let cache_valid =
            manifest.base_uri == self.config.base_uri && manifest.ontology_ns == self.config.ontology_ns;
        let snapshot = Arc::new(self.load(n, cache_valid)?);
        self.history
            .lock()
            .expect("history lock")
            .insert(n, Arc::clone(&snapshot));
        Ok(snapshot)
    }

    /// Exact committed text of `path` at `rev` (HEAD for `None`).
    pub fn checkout(&self, path: &str, rev: Option<u64>) -> Result<String, RepoError> {
        let snapshot = self.snapshot(rev)?;
        snapshot
            .files
            .get(path)
            .cloned()
            .ok_or_else(|| RepoError::NoSuchPath {
                path: path.to_string(),
                rev: snapshot.info.number,
            })
    }

    /// Revision metadata, oldest first.
    pub fn log(&self) -> Result<Vec<RevisionInfo>, RepoError> {
        let head = self.head().info.number;
        (1..=head)
            .map(|n| {
                let text = fs::read_to_string(self.rev_dir(n).join("revision.json"))?;
                Ok(serde_json::from_str(&text)?)
            })
            .collect()
    }

    /// Applies `changes` on top of HEAD and keeps the result only if the
    /// whole corpus builds. Commits are serialized.
    pub fn commit(
        &self,
        changes: &BTreeMap<String, Change>,
        author: &str,
        message: &str,
    ) -> Result<CommitOutcome, RepoError> {
        let _guard = self.commit_lock.lock().expect("commit lock");
        let head = self.head();

        let mut rejections = Vec::new();
        if changes.is_empty() {
            rejections.push(Rejection::EmptyCommit);
        }
        let mut files = head.files.clone();
        for (path, change) in changes {
            if let Err(reason) = check_path(path) {
                rejections.push(Rejection::InvalidPath {
                    path: path.clone(),
                    reason,
                });
                continue;
            }
            match change {
                Change::Put(text) => {
                    files.insert(path.clone(), text.clone());
                }
                Change::Delete => {
                    if files.remove(path).is_none() {
                        rejections.push(Rejection::MissingPath { path: path.clone() });
                    }
                }
            }
        }
        if !rejections.is_empty() {
            return Ok(CommitOutcome::Rejected(rejections));
        }

        let build = match pipeline::build(&files, &self.config) {
            Ok(b) => b,
            Err(problems) => {
                return Ok(CommitOutcome::Rejected(
                    problems
                        .into_iter()
                        .map(|problem| Rejection::Build { problem })
                        .collect(),
                ))
            }
        };

        let number = head.info.number + 1;
        let info = RevisionInfo {
            number,
            author: author.to_string(),
            message: message.to_string(),
            timestamp: chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Secs, true),
            paths: files.keys().cloned().collect(),
        };
        self.write_revision(&info, &files, &build)?;
        write_manifest(
            &self.root,
            &Manifest {
                base_uri: self.config.base_uri.clone(),
                ontology_ns: self.config.ontology_ns.clone(),
                head: number,
            },
        )?;

        let snapshot = Arc::new(Snapshot::new(info, files, build, &self.config));
        self.history
            .lock()
            .expect("history lock")
            .insert(head.info.number, Arc::clone(&head));
        *self.head.write().expect("head lock") = snapshot;
        Ok(CommitOutcome::Accepted(number))
    }

    fn write_revision(
        &self,
        info: &RevisionInfo,
        files: &BTreeMap<String, String>,
        build: &Build,
    ) -> Result<(), RepoError> {
        let revs = self.root.join("revs");
        let tmp = revs.join(format!(".tmp-{}", info.number));
        if tmp.exists() {
            fs::remove_dir_all(&tmp)?;
        }
        for (path, text) in files {
            write_file(&tmp.join("src").join(path), text)?;
        }
        let derived = tmp.join("derived");
        fs::create_dir_all(&derived)?;
        write_file(&derived.join("collection.omdoc"), &build.collection_xml)?;
        write_file(&derived.join("collection.nt"), &rdf::to_ntriples(&build.triples))?;
        for (id, a) in &build.theories {
            write_file(&derived.join(format!("{id}.omdoc")), &a.omdoc)?;
            write_file(&derived.join(format!("{id}.xhtml")), &a.xhtml)?;
            write_file(&derived.join(format!("{id}.nt")), &rdf::to_ntriples(&a.triples))?;
        }
        write_file(&tmp.join("revision.json"), &serde_json::to_string_pretty(info)?)?;

        let target = self.rev_dir(info.number);
        if target.exists() {
            // Left over from a commit that died before the manifest moved on.
            fs::remove_dir_all(&target)?;
        }
        fs::rename(&tmp, &target)?;
        Ok(())
    }

    fn load(&self, n: u64, cache_valid: bool) -> Result<Snapshot, RepoError> {
        let dir = self.rev_dir(n);
        let info: RevisionInfo = serde_json::from_str(&fs::read_to_string(dir.join("revision.json"))?)?;
        let mut files = BTreeMap::new();
        for path in &info.paths {
            let text = fs::read_to_string(dir.join("src").join(path))?;
            files.insert(path.clone(), text);
        }
        let cached = if cache_valid { read_derived(&dir.join("derived")) } else { None };
        let build = match cached {
            Some(b) => b,
            None => pipeline::build(&files, &self.config).map_err(|problems| {
                RepoError::Corrupt(format!(
                    "revision {n} no longer builds: {}",
                    problems.first().map(ToString::to_string).unwrap_or_default()
                ))
            })?,
        };
        Ok(Snapshot::new(info, files, build, &self.config))
    }
}

/// Reads cached artifacts; `None` if anything is missing or unreadable.
fn read_derived(dir: &Path) -> Option<Build> {
    let collection_xml = fs::read_to_string(dir.join("collection.omdoc")).ok()?;
    let collection = omdoc::from_xml(&collection_xml).ok()?;
    let triples = rdf::parse_ntriples(&fs::read_to_string(dir.join("collection.nt")).ok()?).ok()?;
    let mut theories = BTreeMap::new();
    for id in collection.theories.keys() {
        let read = |ext: &str| fs::read_to_string(dir.join(format!("{id}.{ext}"))).ok();
        let theory_triples: TripleSet = rdf::parse_ntriples(&read("nt")?).ok()?;
        theories.insert(
            id.clone(),
            Artifacts {
                omdoc: read("omdoc")?,
                xhtml: read("xhtml")?,
                triples: theory_triples,
            },
        );
    }
    Some(Build {
        collection,
        collection_xml,
        theories,
        triples,
    })
}

fn write_manifest(root: &Path, manifest: &Manifest) -> Result<(), RepoError> {
    let tmp = root.join("manifest.json.tmp");
    fs::write(&tmp, serde_json::to_string_pretty(manifest)?)?;
    fs::rename(&tmp, root.join("manifest.json"))?;
    Ok(())
}
