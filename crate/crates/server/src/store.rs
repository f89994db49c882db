//! JSON-file persistence.
//!
//! Layout under the root directory:
//!
//! ```text
//! concept_maps/<id>.json
//! pathways/<pathway_id>/rev-<n>.json   immutable, one file per revision
//! pathways/<pathway_id>/pool.json
//! sessions/<session_id>.json           session with its chat and notes
//! traces/<trace_id>.json
//! ```
//!
//! Every write goes to a temporary file in the target directory and is
//! renamed into place, so a reader sees either the old or the new aggregate.

use std::fs;
use std::io::{ErrorKind, Write};
use std::path::{Path, PathBuf};

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use tempfile::NamedTempFile;
use thiserror::Error;
use waypoint_core::engine::{CandidatePool, PipelineTrace};
use waypoint_core::model::{ConceptMap, LearnerSession, Pathway, PlanningPreferences};

#[derive(Debug, Error)]
pub enum StoreError {
    #[error("{kind} {id} not found")]
    NotFound { kind: &'static str, id: String },
    #[error("{0}")]
    Conflict(String),
    #[error("integrity violation: {0}")]
    Integrity(String),
    #[error("{path}: {message}")]
    Io { path: PathBuf, message: String },
    #[error("{path} is not a valid document: {message}")]
    Corrupt { path: PathBuf, message: String },
}

/// A concept map as previewed, with the preferences that produced it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StoredConceptMap {
    pub concept_map_id: String,
    pub preferences: PlanningPreferences,
    #[serde(flatten)]
    pub concept_map: ConceptMap,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StoredTrace {
    pub trace_id: String,
    pub pathway_id: String,
    pub trace: PipelineTrace,
}

pub struct FileStore {
    root: PathBuf,
}

/// Ids become file names; anything else is treated as unknown.
fn safe_id(id: &str) -> bool {
    !id.is_empty() && id.len() <= 128 && id.chars().all(|c| c.is_ascii_alphanumeric() || c == '_' || c == '-')
}

fn io(path: &Path, e: std::io::Error) -> StoreError {
    StoreError::Io {
        path: path.to_path_buf(),
        message: e.to_string(),
    }
}

impl FileStore {
    pub fn open(root: impl Into<PathBuf>) -> Result<Self, StoreError> {
        let root = root.into();
        for sub in ["concept_maps", "pathways", "sessions", "traces"] {
            let dir = root.join(sub);
            fs::create_dir_all(&dir).map_err(|e| io(&dir, e))?;
        }
        Ok(Self { root })
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    fn path(&self, kind: &'static str, dir: &str, id: &str) -> Result<PathBuf, StoreError> {
        if !safe_id(id) {
            return Err(StoreError::NotFound { kind, id: id.to_string() });
        }
        Ok(self.root.join(dir).join(format!("{id}.json")))
    }

    fn pathway_dir(&self, id: &str) -> Result<PathBuf, StoreError> {
        if !safe_id(id) {
            return Err(StoreError::NotFound {
                kind: "pathway",
                id: id.to_string(),
            });
        }
        Ok(self.root.join("pathways").join(id))
    }

    fn temp_in(dir: &Path, bytes: &[u8]) -> Result<NamedTempFile, StoreError> {
        fs::create_dir_all(dir).map_err(|e| io(dir, e))?;
        let mut tmp = NamedTempFile::new_in(dir).map_err(|e| io(dir, e))?;
        tmp.write_all(bytes).map_err(|e| io(tmp.path(), e))?;
        tmp.as_file().sync_all().map_err(|e| io(tmp.path(), e))?;
        Ok(tmp)
    }

    fn write<T: Serialize>(path: &Path, value: &T) -> Result<(), StoreError> {
        let bytes = serde_json::to_vec_pretty(value).expect("documents serialize");
        let tmp = Self::temp_in(path.parent().expect("store paths have parents"), &bytes)?;
        tmp.persist(path).map_err(|e| io(path, e.error))?;
        Ok(())
    }

    fn read<T: DeserializeOwned>(path: &Path, kind: &'static str, id: &str) -> Result<T, StoreError> {
        let bytes = match fs::read(path) {
            Ok(b) => b,
            Err(e) if e.kind() == ErrorKind::NotFound => {
                return Err(StoreError::NotFound { kind, id: id.to_string() })
            }
            Err(e) => return Err(io(path, e)),
        };
        serde_json::from_slice(&bytes).map_err(|e| StoreError::Corrupt {
            path: path.to_path_buf(),
            message: e.to_string(),
        })
    }

    pub fn save_concept_map(&self, map: &StoredConceptMap) -> Result<(), StoreError> {
        Self::write(&self.path("concept map", "concept_maps", &map.concept_map_id)?, map)
    }

    pub fn load_concept_map(&self, id: &str) -> Result<StoredConceptMap, StoreError> {
        Self::read(&self.path("concept map", "concept_maps", id)?, "concept map", id)
    }

    /// Writes one pathway revision. Revisions are immutable: writing an
    /// existing revision succeeds only if the content is identical.
    pub fn save_pathway(&self, pathway: &Pathway) -> Result<(), StoreError> {
        let dir = self.pathway_dir(&pathway.pathway_id)?;
        let path = dir.join(format!("rev-{}.json", pathway.revision));
        let bytes = serde_json::to_vec_pretty(pathway).expect("documents serialize");
        let tmp = Self::temp_in(&dir, &bytes)?;
        match tmp.persist_noclobber(&path) {
            Ok(_) => Ok(()),
            Err(e) if e.error.kind() == ErrorKind::AlreadyExists => {
                let existing: Pathway = Self::read(&path, "pathway", &pathway.pathway_id)?;
                if &existing == pathway {
                    Ok(())
                } else {
                    Err(StoreError::Conflict(format!(
                        "pathway {} revision {} already exists",
                        pathway.pathway_id, pathway.revision
                    )))
                }
            }
            Err(e) => Err(io(&path, e.error)),
        }
    }

    /// Revision numbers stored for a pathway, ascending.
    pub fn revisions(&self, id: &str) -> Result<Vec<u32>, StoreError> {
        let dir = self.pathway_dir(id)?;
        let entries = match fs::read_dir(&dir) {
            Ok(e) => e,
            Err(e) if e.kind() == ErrorKind::NotFound => {
                return Err(StoreError::NotFound { kind: "pathway", id: id.to_string() })
            }
            Err(e) => return Err(io(&dir, e)),
        };
        let mut revs: Vec<u32> = entries
            .filter_map(|e| e.ok())
            .filter_map(|e| {
                let name = e.file_name().to_string_lossy().into_owned();
                name.strip_prefix("rev-")?.strip_suffix(".json")?.parse().ok()
            })
            .collect();
        revs.sort_unstable();
        if revs.is_empty() {
            return Err(StoreError::NotFound { kind: "pathway", id: id.to_string() });
        }
        Ok(revs)
    }

    /// The given revision, or the latest.
    pub fn load_pathway(&self, id: &str, revision: Option<u32>) -> Result<Pathway, StoreError> {
        let rev = match revision {
            Some(r) => r,
            None => *self.revisions(id)?.last().expect("revisions is non-empty"),
        };
        let path = self.pathway_dir(id)?.join(format!("rev-{rev}.json"));
        let p: Pathway = Self::read(&path, "pathway revision", &format!("{id}@{rev}"))?;
        if p.pathway_id != id || p.revision != rev {
            return Err(StoreError::Integrity(format!(
                "{} holds {}@{}",
                path.display(),
                p.pathway_id,
                p.revision
            )));
        }
        Ok(p)
    }

    pub fn save_pool(&self, pathway_id: &str, pool: &CandidatePool) -> Result<(), StoreError> {
        Self::write(&self.pathway_dir(pathway_id)?.join("pool.json"), pool)
    }

    pub fn load_pool(&self, pathway_id: &str) -> Result<CandidatePool, StoreError> {
        Self::read(&self.pathway_dir(pathway_id)?.join("pool.json"), "candidate pool", pathway_id)
    }

    pub fn save_trace(&self, trace: &StoredTrace) -> Result<(), StoreError> {
        Self::write(&self.path("trace", "traces", &trace.trace_id)?, trace)
    }

    pub fn load_trace(&self, id: &str) -> Result<StoredTrace, StoreError> {
        Self::read(&self.path("trace", "traces", id)?, "trace", id)
    }

    /// Saves a session; the pathway revision it follows must exist.
    pub fn save_session(&self, session: &LearnerSession) -> Result<(), StoreError> {
        match self.load_pathway(&session.pathway_id, Some(session.pathway_revision)) {
            Ok(_) => {}
            Err(StoreError::NotFound { .. }) => {
                return Err(StoreError::Integrity(format!(
                    "session {} refers to missing pathway {}@{}",
                    session.session_id, session.pathway_id, session.pathway_revision
                )))
            }
            Err(e) => return Err(e),
        }
        Self::write(&self.path("session", "sessions", &session.session_id)?, session)
    }

    pub fn load_session(&self, id: &str) -> Result<LearnerSession, StoreError> {
        Self::read(&self.path("session", "sessions", id)?, "session", id)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unsafe_ids_are_unknown() {
        let dir = tempfile::tempdir().unwrap();
        let store = FileStore::open(dir.path()).unwrap();
        for id in ["../etc", "a/b", "", "x.json"] {
            assert!(matches!(store.load_session(id), Err(StoreError::NotFound { .. })), "{id}");
        }
        assert!(matches!(store.load_pathway("nope", None), Err(StoreError::NotFound { .. })));
    }

    #[test]
    fn corrupt_files_are_reported() {
        let dir = tempfile::tempdir().unwrap();
        let store = FileStore::open(dir.path()).unwrap();
        fs::write(dir.path().join("sessions/s_1.json"), "{").unwrap();
        assert!(matches!(store.load_session("s_1"), Err(StoreError::Corrupt { .. })));
    }
}
