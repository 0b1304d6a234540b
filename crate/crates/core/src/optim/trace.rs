use std::path::Path;

use serde::Serialize;

use crate::error::{Error, Result};

/// One optimizer iteration. `level` is the pyramid level (0 = coarsest) for
/// flow registration and always 0 for affine registration.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TraceEntry {
    pub iteration: usize,
    pub level: usize,
    pub loss: f64,
}

/// Per-iteration loss history of one registration.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct LossTrace {
    entries: Vec<TraceEntry>,
}

impl LossTrace {
    pub(crate) fn push(&mut self, iteration: usize, level: usize, loss: f64) {
        self.entries.push(TraceEntry {
            iteration,
            level,
            loss,
        });
    }

    pub fn entries(&self) -> &[TraceEntry] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Running minimum of the loss within each level.
    pub fn best_so_far(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.entries.len());
        let mut best = f64::INFINITY;
        let mut level = usize::MAX;
        for e in &self.entries {
            if e.level != level {
                level = e.level;
                best = f64::INFINITY;
            }
            best = best.min(e.loss);
            out.push(best);
        }
        out
    }

    /// Writes `iteration,level,loss` rows with a header line.
    pub fn write_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let mut w = csv::Writer::from_path(path).map_err(|e| match e.into_kind() {
            csv::ErrorKind::Io(io) => Error::io(path, io),
            other => Error::Header {
                path: path.to_path_buf(),
                message: format!("{other:?}"),
            },
        })?;
        for e in &self.entries {
            w.serialize(e)?;
        }
        w.flush().map_err(|e| Error::io(path, e))?;
        Ok(())
    }
}
