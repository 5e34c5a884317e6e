//! Archive of mutually non-dominated solutions.

use serde::{Deserialize, Serialize};

use crate::solution::Objectives;

/// Where an archive entry came from.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Provenance {
    Initial,
    WelfareCostAlns,
    CostWelfareAlns,
    WelfareMove,
    CostMove,
    Exact,
    Enumeration,
    Imported,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ArchiveEntry<T> {
    pub objectives: Objectives,
    pub payload: T,
    pub provenance: Provenance,
}

/// Entries are kept sorted by cost ascending, which makes welfare strictly
/// descending. Duplicated objective pairs keep the first representative.
#[derive(Clone, Debug, PartialEq)]
pub struct ParetoArchive<T> {
    entries: Vec<ArchiveEntry<T>>,
}

impl<T> Default for ParetoArchive<T> {
    fn default() -> Self {
        Self { entries: Vec::new() }
    }
}

impl<T> ParetoArchive<T> {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn entries(&self) -> &[ArchiveEntry<T>] {
        &self.entries
    }

    pub fn iter(&self) -> impl Iterator<Item = &ArchiveEntry<T>> {
        self.entries.iter()
    }

    pub fn into_entries(self) -> Vec<ArchiveEntry<T>> {
        self.entries
    }

    /// True when some entry dominates or equals `o`.
    pub fn covers(&self, o: Objectives) -> bool {
        let pos = self.entries.partition_point(|e| e.objectives.cost <= o.cost);
        pos > 0 && self.entries[pos - 1].objectives.welfare <= o.welfare
    }

    /// Inserts `payload` unless it is dominated or duplicated, removing every
    /// entry it dominates. Returns whether the archive changed.
    pub fn update(&mut self, objectives: Objectives, payload: T, provenance: Provenance) -> bool {
        if self.covers(objectives) {
            return false;
        }
        let start = self.entries.partition_point(|e| e.objectives.cost < objectives.cost);
        let dominated = self.entries[start..].iter().take_while(|e| e.objectives.welfare >= objectives.welfare).count();
        self.entries.splice(start..start + dominated, [ArchiveEntry { objectives, payload, provenance }]);
        true
    }

    /// Same as [`update`](Self::update) but builds the payload only when it is kept.
    pub fn update_with(&mut self, objectives: Objectives, provenance: Provenance, payload: impl FnOnce() -> T) -> bool {
        if self.covers(objectives) {
            return false;
        }
        self.update(objectives, payload(), provenance)
    }

    /// Objective pairs, cost ascending and welfare strictly descending.
    pub fn front(&self) -> Vec<Objectives> {
        self.entries.iter().map(|e| e.objectives).collect()
    }

    pub fn get(&self, index: usize) -> Option<&ArchiveEntry<T>> {
        self.entries.get(index)
    }
}

impl ParetoArchive<()> {
    pub fn from_points(points: impl IntoIterator<Item = Objectives>) -> Self {
        let mut a = Self::new();
        for p in points {
            a.update(p, (), Provenance::Imported);
        }
        a
    }
}
