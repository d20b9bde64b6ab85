//! File-directory persistence for models and instances.
//!
//! ```text
//! <root>/models/<name>.dm        DSL source, first line `-- revision N`
//! <root>/instances/<id>.json     instance document
//! ```
//!
//! Every write goes to a temporary file that is renamed into place, so
//! readers never see a partial artifact. Writes to one artifact are
//! serialised; readers take no locks.

use std::collections::HashMap;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::{Arc, Mutex};

use explaineo::engine::{
    decode_inputs, evaluate, DecisionInstance, EvalError, InstanceDocument, InstanceError, Status,
};
use explaineo::model::{parse_model, DecisionModel, ParseError};
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub const DEFAULT_DIR: &str = ".explaineo";

#[derive(Debug, Error)]
pub enum WorkspaceError {
    #[error("`{0}` is not a valid name; use letters, digits, `_`, `-` and `.`")]
    BadName(String),
    #[error("unknown model `{0}`")]
    UnknownModel(String),
    #[error("unknown instance `{0}`")]
    UnknownInstance(String),
    #[error("model source has {} error(s); first: {}", .0.len(), .0[0])]
    Invalid(Vec<ParseError>),
    #[error("model declares the name `{declared}` but is stored as `{name}`")]
    NameMismatch { name: String, declared: String },
    #[error("instance `{id}`: {source}")]
    Instance {
        id: String,
        #[source]
        source: InstanceError,
    },
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: {source}")]
    Json {
        path: PathBuf,
        #[source]
        source: serde_json::Error,
    },
}

type Result<T, E = WorkspaceError> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ModelSummary {
    pub name: String,
    pub version: Option<String>,
    pub revision: u64,
}

#[derive(Debug, Clone)]
pub struct StoredModel {
    pub summary: ModelSummary,
    pub source: String,
    pub model: Arc<DecisionModel>,
}

/// An instance document as stored, with its id and the model revision it
/// was evaluated against.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StoredInstance {
    pub id: String,
    pub model_revision: u64,
    pub status: Status,
    #[serde(flatten)]
    pub document: InstanceDocument,
}

pub fn valid_name(name: &str) -> bool {
    !name.is_empty()
        && !name.starts_with('.')
        && name.len() <= 128
        && name
            .chars()
            .all(|c| c.is_ascii_alphanumeric() || matches!(c, '_' | '-' | '.'))
}

fn check_name(name: &str) -> Result<()> {
    if valid_name(name) {
        Ok(())
    } else {
        Err(WorkspaceError::BadName(name.to_string()))
    }
}

fn io(path: &Path) -> impl FnOnce(std::io::Error) -> WorkspaceError + '_ {
    move |source| WorkspaceError::Io {
        path: path.to_path_buf(),
        source,
    }
}

/// Splits `-- revision N` off stored model text.
fn split_revision(text: &str) -> (u64, &str) {
    let Some((first, rest)) = text.split_once('\n') else {
        return (0, text);
    };
    match first
        .strip_prefix("-- revision ")
        .and_then(|n| n.trim().parse().ok())
    {
        Some(rev) => (rev, rest),
        None => (0, text),
    }
}

#[derive(Debug)]
pub struct Workspace {
    root: PathBuf,
    locks: Mutex<HashMap<PathBuf, Arc<Mutex<()>>>>,
}

impl Workspace {
    pub fn open(root: impl Into<PathBuf>) -> Result<Workspace> {
        let root = root.into();
        for sub in ["models", "instances"] {
            let dir = root.join(sub);
            std::fs::create_dir_all(&dir).map_err(io(&dir))?;
        }
        Ok(Workspace {
            root,
            locks: Mutex::new(HashMap::new()),
        })
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    fn model_path(&self, name: &str) -> PathBuf {
        self.root.join("models").join(format!("{name}.dm"))
    }

    fn instance_path(&self, id: &str) -> PathBuf {
        self.root.join("instances").join(format!("{id}.json"))
    }

    fn lock(&self, path: &Path) -> Arc<Mutex<()>> {
        let mut locks = self.locks.lock().unwrap_or_else(|e| e.into_inner());
        locks.entry(path.to_path_buf()).or_default().clone()
    }

    fn write_atomic(&self, path: &Path, contents: &[u8]) -> Result<()> {
        let dir = path.parent().expect("artifact paths have a parent");
        let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(io(dir))?;
        tmp.write_all(contents).map_err(io(path))?;
        tmp.as_file().sync_all().map_err(io(path))?;
        tmp.persist(path).map_err(|e| WorkspaceError::Io {
            path: path.to_path_buf(),
            source: e.error,
        })?;
        Ok(())
    }

    /// Validates and stores model source under `name`, replacing any previous
    /// model of that name with the next revision.
    pub fn put_model(&self, name: &str, source: &str) -> Result<ModelSummary> {
        check_name(name)?;
        let model = parse_model(source).map_err(WorkspaceError::Invalid)?;
        if model.name != name {
            return Err(WorkspaceError::NameMismatch {
                name: name.to_string(),
                declared: model.name,
            });
        }
        let path = self.model_path(name);
        let lock = self.lock(&path);
        let _guard = lock.lock().unwrap_or_else(|e| e.into_inner());
        let revision = match std::fs::read_to_string(&path) {
            Ok(text) => split_revision(&text).0 + 1,
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => 1,
            Err(e) => return Err(io(&path)(e)),
        };
        self.write_atomic(
            &path,
            format!("-- revision {revision}\n{source}").as_bytes(),
        )?;
        Ok(ModelSummary {
            name: name.to_string(),
            version: model.version,
            revision,
        })
    }

    pub fn model(&self, name: &str) -> Result<StoredModel> {
        check_name(name)?;
        let path = self.model_path(name);
        let text = match std::fs::read_to_string(&path) {
            Ok(t) => t,
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => {
                return Err(WorkspaceError::UnknownModel(name.to_string()))
            }
            Err(e) => return Err(io(&path)(e)),
        };
        let (revision, source) = split_revision(&text);
        let model = parse_model(source).map_err(WorkspaceError::Invalid)?;
        Ok(StoredModel {
            summary: ModelSummary {
                name: name.to_string(),
                version: model.version.clone(),
                revision,
            },
            source: source.to_string(),
            model: Arc::new(model),
        })
    }

    /// Stored models sorted by name. Files that no longer validate are skipped.
    pub fn models(&self) -> Result<Vec<ModelSummary>> {
        let dir = self.root.join("models");
        let mut out = Vec::new();
        for entry in std::fs::read_dir(&dir).map_err(io(&dir))? {
            let path = entry.map_err(io(&dir))?.path();
            let Some(name) = path
                .file_name()
                .and_then(|n| n.to_str())
                .and_then(|n| n.strip_suffix(".dm"))
            else {
                continue;
            };
            if let Ok(m) = self.model(name) {
                out.push(m.summary);
            }
        }
        out.sort_by(|a, b| a.name.cmp(&b.name));
        Ok(out)
    }

    /// Evaluates raw JSON inputs against a stored model and stores the
    /// instance under `id`, or under the next free `<model>-<n>`.
    pub fn put_instance(
        &self,
        model_name: &str,
        id: Option<&str>,
        inputs: &std::collections::BTreeMap<String, serde_json::Value>,
    ) -> Result<StoredInstance> {
        let stored = self.model(model_name)?;
        let decoded = decode_inputs(&stored.model, inputs)?;
        let instance = evaluate(&stored.model, &decoded)?;

        let id_lock = self.lock(&self.root.join("instances"));
        let _ids = match id {
            Some(_) => None,
            None => Some(id_lock.lock().unwrap_or_else(|e| e.into_inner())),
        };
        let id = match id {
            Some(id) => {
                check_name(id)?;
                id.to_string()
            }
            None => (1..)
                .map(|n| format!("{model_name}-{n}"))
                .find(|c| !self.instance_path(c).exists())
                .expect("some id is free"),
        };
        let record = StoredInstance {
            id: id.clone(),
            model_revision: stored.summary.revision,
            status: instance.status(),
            document: instance.to_document(),
        };
        let path = self.instance_path(&id);
        let lock = self.lock(&path);
        let _guard = lock.lock().unwrap_or_else(|e| e.into_inner());
        let json = serde_json::to_string_pretty(&record).expect("instances serialize");
        self.write_atomic(&path, format!("{json}\n").as_bytes())?;
        Ok(record)
    }

    pub fn instance_record(&self, id: &str) -> Result<StoredInstance> {
        check_name(id)?;
        let path = self.instance_path(id);
        let text = match std::fs::read_to_string(&path) {
            Ok(t) => t,
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => {
                return Err(WorkspaceError::UnknownInstance(id.to_string()))
            }
            Err(e) => return Err(io(&path)(e)),
        };
        serde_json::from_str(&text).map_err(|source| WorkspaceError::Json { path, source })
    }

    /// Loads an instance and re-evaluates it against the current revision of
    /// its model; the stored derived values must still hold.
    pub fn instance(&self, id: &str) -> Result<(StoredModel, DecisionInstance)> {
        let record = self.instance_record(id)?;
        let stored = self.model(&record.document.model)?;
        let instance = DecisionInstance::from_document(stored.model.clone(), &record.document)
            .map_err(|source| WorkspaceError::Instance {
                id: id.to_string(),
                source,
            })?;
        Ok((stored, instance))
    }
}
