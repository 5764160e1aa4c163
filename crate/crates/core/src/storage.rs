//! Case files on disk: a DSL or canonical JSON document plus sidecars named
//! after its stem (`robotaxi.eaa`, `robotaxi.benefits.csv`, ...).

use std::fs;
use std::io::{self, Write as _};
use std::path::{Path, PathBuf};

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::canonical::{canonical_pretty, decode, encode, DecodeError};
use crate::diag::Diagnostic;
use crate::dsl::{parse_bytes, print};
use crate::equilibrium::SessionLog;
use crate::matrices::csv::{
    read_autonomy, read_benefits, read_risks, write_autonomy, write_benefits, write_risks, CsvError,
};
use crate::matrices::{Matrices, ResolutionAnnotation, RoleRuleConfig, SummaryRow};
use crate::model::AssuranceCase;
use crate::stakeholder::StakeholderRegistry;

pub const CASE_DIR_VAR: &str = "EAA_CASE_DIR";

#[derive(Debug, Error)]
pub enum StorageError {
    #[error("{}: {source}", path.display())]
    Io { path: PathBuf, source: io::Error },
    #[error("{}: not found", .0.display())]
    NotFound(PathBuf),
    #[error("{}: {} parse error(s)", path.display(), diagnostics.len())]
    Parse { path: PathBuf, diagnostics: Vec<Diagnostic> },
    #[error("{}: {source}", path.display())]
    Decode { path: PathBuf, source: DecodeError },
    #[error("{}: {message}", path.display())]
    Json { path: PathBuf, message: String },
    #[error("{}: {source}", path.display())]
    Csv { path: PathBuf, source: CsvError },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CaseFormat {
    Dsl,
    Json,
}

/// Authored summaries and rule settings, stored next to the CSV matrices.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SummariesDoc {
    #[serde(default)]
    pub benefits: Vec<SummaryRow>,
    #[serde(default)]
    pub risks: Vec<SummaryRow>,
    #[serde(default)]
    pub rules: RoleRuleConfig,
}

/// Everything kept outside the argument itself.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Sidecars {
    pub stakeholders: StakeholderRegistry,
    pub matrices: Matrices,
    pub annotations: Vec<ResolutionAnnotation>,
    pub session: Option<SessionLog>,
}

/// Writes through a temporary file in the same directory and renames it into
/// place, so readers never see a partial file.
pub fn write_atomic(path: &Path, contents: &str) -> Result<(), StorageError> {
    let io_err = |source| StorageError::Io {
        path: path.to_path_buf(),
        source,
    };
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(io_err)?;
    tmp.write_all(contents.as_bytes()).map_err(io_err)?;
    tmp.as_file().sync_all().map_err(io_err)?;
    tmp.persist(path).map_err(|e| io_err(e.error))?;
    Ok(())
}

fn read(path: &Path) -> Result<Vec<u8>, StorageError> {
    fs::read(path).map_err(|source| StorageError::Io {
        path: path.to_path_buf(),
        source,
    })
}

fn read_text(path: &Path) -> Result<String, StorageError> {
    String::from_utf8(read(path)?).map_err(|e| StorageError::Json {
        path: path.to_path_buf(),
        message: format!("invalid UTF-8: {e}"),
    })
}

pub fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T, StorageError> {
    let text = read_text(path)?;
    let de = &mut serde_json::Deserializer::from_str(&text);
    serde_path_to_error::deserialize(de).map_err(|e| StorageError::Json {
        path: path.to_path_buf(),
        message: format!("at {}: {}", e.path(), e.inner()),
    })
}

fn read_optional<T>(
    path: &Path,
    load: impl FnOnce(&Path) -> Result<T, StorageError>,
) -> Result<Option<T>, StorageError> {
    if path.is_file() {
        load(path).map(Some)
    } else {
        Ok(None)
    }
}

fn read_csv<T>(path: &Path, parse: fn(&str) -> Result<T, CsvError>) -> Result<T, StorageError> {
    parse(&read_text(path)?).map_err(|source| StorageError::Csv {
        path: path.to_path_buf(),
        source,
    })
}

/// Resolves a user-supplied path. When the case directory is given, a
/// relative path is looked up there first, then by file name alone, and only
/// then relative to the working directory.
pub fn resolve(path: &Path, case_dir: Option<&Path>) -> Result<PathBuf, StorageError> {
    let mut candidates = Vec::new();
    if let Some(dir) = case_dir.filter(|_| path.is_relative()) {
        candidates.push(dir.join(path));
        if let Some(name) = path.file_name() {
            candidates.push(dir.join(name));
        }
    }
    candidates.push(path.to_path_buf());
    candidates
        .into_iter()
        .find(|p| p.exists())
        .ok_or_else(|| StorageError::NotFound(path.to_path_buf()))
}

/// [`resolve`] with the case directory taken from the environment.
pub fn resolve_env(path: &Path) -> Result<PathBuf, StorageError> {
    let dir = std::env::var_os(CASE_DIR_VAR).map(PathBuf::from);
    resolve(path, dir.as_deref())
}

/// The file set belonging to one case.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CaseFiles {
    pub source: PathBuf,
    pub format: CaseFormat,
    dir: PathBuf,
    stem: String,
}

impl CaseFiles {
    /// `path` is the main document; `.json` means canonical JSON, anything
    /// else is DSL. A bare stem (no extension) also names a sidecar set.
    pub fn new(path: &Path) -> Self {
        let format = match path.extension().and_then(|e| e.to_str()) {
            Some("json") => CaseFormat::Json,
            _ => CaseFormat::Dsl,
        };
        let dir = match path.parent() {
            Some(p) if !p.as_os_str().is_empty() => p.to_path_buf(),
            _ => PathBuf::from("."),
        };
        let name = path.file_name().and_then(|n| n.to_str()).unwrap_or_default();
        let stem = match format {
            CaseFormat::Json => name.strip_suffix(".json").unwrap_or(name),
            CaseFormat::Dsl => name.strip_suffix(".eaa").unwrap_or(name),
        };
        Self {
            source: path.to_path_buf(),
            format,
            dir,
            stem: stem.to_string(),
        }
    }

    /// Sidecar path, e.g. `sidecar("benefits.csv")`.
    pub fn sidecar(&self, suffix: &str) -> PathBuf {
        self.dir.join(format!("{}.{suffix}", self.stem))
    }

    pub fn load_sidecars(&self) -> Result<Sidecars, StorageError> {
        let stakeholders = read_optional(&self.sidecar("stakeholders.json"), read_json)?.unwrap_or_default();
        let mut matrices = Matrices::default();
        if let Some(rows) = read_optional(&self.sidecar("benefits.csv"), |p| read_csv(p, read_benefits))? {
            matrices.benefits = rows;
        }
        if let Some(rows) = read_optional(&self.sidecar("risks.csv"), |p| read_csv(p, read_risks))? {
            matrices.risks = rows;
        }
        if let Some(rows) = read_optional(&self.sidecar("autonomy.csv"), |p| read_csv(p, read_autonomy))? {
            matrices.autonomy = rows;
        }
        if let Some(doc) = read_optional(&self.sidecar("summaries.json"), read_json::<SummariesDoc>)? {
            matrices.benefit_summaries = doc.benefits;
            matrices.risk_summaries = doc.risks;
            matrices.rules = doc.rules;
        }
        let annotations = read_optional(&self.sidecar("annotations.json"), read_json)?.unwrap_or_default();
        let session = read_optional(&self.sidecar("session.json"), read_json)?;
        Ok(Sidecars {
            stakeholders,
            matrices,
            annotations,
            session,
        })
    }

    pub fn load(&self) -> Result<AssuranceCase, StorageError> {
        match self.format {
            CaseFormat::Json => {
                let text = read_text(&self.source)?;
                decode(&text).map_err(|source| StorageError::Decode {
                    path: self.source.clone(),
                    source,
                })
            }
            CaseFormat::Dsl => {
                let bytes = read(&self.source)?;
                let file = self.source.display().to_string();
                let mut case = parse_bytes(&file, &bytes).map_err(|diagnostics| StorageError::Parse {
                    path: self.source.clone(),
                    diagnostics,
                })?;
                let side = self.load_sidecars()?;
                case.stakeholders = side.stakeholders;
                case.matrices = side.matrices;
                case.annotations = side.annotations;
                case.sessions = side.session.into_iter().collect();
                Ok(case)
            }
        }
    }

    pub fn save_matrices(&self, matrices: &Matrices) -> Result<(), StorageError> {
        write_atomic(&self.sidecar("benefits.csv"), &write_benefits(&matrices.benefits))?;
        write_atomic(&self.sidecar("risks.csv"), &write_risks(&matrices.risks))?;
        write_atomic(&self.sidecar("autonomy.csv"), &write_autonomy(&matrices.autonomy))?;
        let summaries = SummariesDoc {
            benefits: matrices.benefit_summaries.clone(),
            risks: matrices.risk_summaries.clone(),
            rules: matrices.rules,
        };
        write_atomic(&self.sidecar("summaries.json"), &canonical_pretty(&summaries))
    }

    pub fn save_annotations(&self, annotations: &[ResolutionAnnotation]) -> Result<(), StorageError> {
        write_atomic(&self.sidecar("annotations.json"), &canonical_pretty(&annotations))
    }

    pub fn save_session(&self, log: &SessionLog) -> Result<(), StorageError> {
        write_atomic(&self.sidecar("session.json"), &canonical_pretty(log))
    }

    /// Persists the parts of `case` that may change outside the DSL. For a
    /// JSON case the whole document is rewritten.
    pub fn save_state(&self, case: &AssuranceCase) -> Result<(), StorageError> {
        match self.format {
            CaseFormat::Json => write_atomic(&self.source, &encode(case)),
            CaseFormat::Dsl => {
                self.save_matrices(&case.matrices)?;
                self.save_annotations(&case.annotations)?;
                if let Some(log) = case.sessions.first() {
                    self.save_session(log)?;
                }
                Ok(())
            }
        }
    }

    /// Writes the argument and every sidecar.
    pub fn save_all(&self, case: &AssuranceCase) -> Result<(), StorageError> {
        if self.format == CaseFormat::Dsl {
            write_atomic(&self.source, &print(case))?;
            write_atomic(&self.sidecar("stakeholders.json"), &canonical_pretty(&case.stakeholders))?;
        }
        self.save_state(case)
    }
}
