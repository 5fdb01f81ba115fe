//! Chunked scan execution with resumable checkpoints.
//!
//! Pairs are classified in ascending order, `chunk` pairs at a time. After
//! each chunk the checkpoint file is rewritten (via a temporary file and a
//! rename) with the last completed `p`, running counts and the records so
//! far, so a resumed run assembles exactly the report an uninterrupted run
//! would.

use std::fs;
use std::path::{Path, PathBuf};

use primesquare::certificate::CertConfig;
use primesquare::primes::consecutive_pairs;
use primesquare::proofcheck::{classify_pairs, ConjectureScanReport, ScanCounts};
use primesquare::search::{Bounds, ClassificationRecord};
use serde::{Deserialize, Serialize};

use crate::error::CliError;

pub const CHECKPOINT_EVERY: usize = 1000;
pub const CHECKPOINT_VERSION: u32 = 1;

/// Inputs that determine a scan's result.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScanJob {
    pub limit: u64,
    pub bounds: Bounds,
    pub cert: CertConfig,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Checkpoint {
    pub checkpoint_version: u32,
    pub job: ScanJob,
    pub last_p: u64,
    pub counts: ScanCounts,
    pub records: Vec<ClassificationRecord>,
}

impl Checkpoint {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let bad = |reason: String| CliError::Checkpoint {
            path: path.to_path_buf(),
            reason,
        };
        let text = fs::read_to_string(path).map_err(|e| bad(e.to_string()))?;
        let cp: Checkpoint = serde_json::from_str(&text).map_err(|e| bad(e.to_string()))?;
        if cp.checkpoint_version != CHECKPOINT_VERSION {
            return Err(bad(format!(
                "unsupported version {}",
                cp.checkpoint_version
            )));
        }
        let mut counts = ScanCounts::default();
        for r in &cp.records {
            counts.record(&r.verdict);
        }
        if counts != cp.counts {
            return Err(bad("counts disagree with stored records".into()));
        }
        if cp.records.last().map_or(0, |r| r.pair.p()) != cp.last_p {
            return Err(bad("last_p disagrees with stored records".into()));
        }
        if let Some(r) = cp.records.iter().find(|r| !r.revalidate()) {
            return Err(bad(format!("record for {} does not re-validate", r.pair)));
        }
        Ok(cp)
    }

    fn store(&self, path: &Path) -> Result<(), CliError> {
        let io = |source| CliError::Io {
            path: path.to_path_buf(),
            source,
        };
        let mut tmp = PathBuf::from(path);
        tmp.as_mut_os_string().push(".tmp");
        let text = serde_json::to_string(self).expect("checkpoint serializes");
        fs::write(&tmp, text).map_err(io)?;
        fs::rename(&tmp, path).map_err(io)
    }
}

pub enum ScanOutcome {
    Complete(ConjectureScanReport),
    /// Stopped after the requested number of chunks; the checkpoint holds
    /// the progress.
    Interrupted {
        completed_pairs: usize,
    },
}

/// Runs (or resumes) a scan. When `checkpoint` names an existing file its
/// progress is loaded first; the file is updated after every chunk.
/// `stop_after_chunks` cuts the run short for testing interruption.
pub fn execute(
    job: &ScanJob,
    workers: usize,
    checkpoint: Option<&Path>,
    chunk: usize,
    stop_after_chunks: Option<usize>,
) -> Result<ScanOutcome, CliError> {
    let pairs = consecutive_pairs(job.limit);
    let mut records: Vec<ClassificationRecord> = Vec::with_capacity(pairs.len());
    let mut counts = ScanCounts::default();

    if let Some(path) = checkpoint.filter(|p| p.exists()) {
        let cp = Checkpoint::load(path)?;
        if cp.job != *job {
            return Err(CliError::Checkpoint {
                path: path.to_path_buf(),
                reason: "checkpoint was written for a different scan configuration".into(),
            });
        }
        let expected: Vec<_> = pairs.iter().take(cp.records.len()).collect();
        if expected.len() != cp.records.len()
            || expected.iter().zip(&cp.records).any(|(a, r)| **a != r.pair)
        {
            return Err(CliError::Checkpoint {
                path: path.to_path_buf(),
                reason: "stored records are not a prefix of the pair sequence".into(),
            });
        }
        counts = cp.counts;
        records = cp.records;
    }

    let mut chunks_done = 0;
    while records.len() < pairs.len() {
        if stop_after_chunks.is_some_and(|n| chunks_done >= n) {
            return Ok(ScanOutcome::Interrupted {
                completed_pairs: records.len(),
            });
        }
        let end = (records.len() + chunk.max(1)).min(pairs.len());
        let batch = classify_pairs(&pairs[records.len()..end], &job.bounds, &job.cert, workers);
        for r in &batch {
            counts.record(&r.verdict);
        }
        records.extend(batch);
        chunks_done += 1;
        if let Some(path) = checkpoint {
            Checkpoint {
                checkpoint_version: CHECKPOINT_VERSION,
                job: *job,
                last_p: records.last().map_or(0, |r| r.pair.p()),
                counts,
                records: records.clone(),
            }
            .store(path)?;
        }
    }

    Ok(ScanOutcome::Complete(ConjectureScanReport::assemble(
        job.limit, job.bounds, job.cert, records,
    )))
}
