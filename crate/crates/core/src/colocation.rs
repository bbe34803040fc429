//! Online co-location throughput table.
//!
//! Entries map (subject workload, multiset of co-located workloads) to the normalized throughput
//! the subject was observed to reach. Unseen sets are estimated as the product of pairwise entries,
//! with unseen pairs defaulting to a tunable value.

use std::collections::BTreeMap;
use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::task::{Task, TaskId, WorkloadId};

pub const DEFAULT_PAIRWISE_THROUGHPUT: f64 = 0.95;

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct CoLocationKey {
    pub subject: WorkloadId,
    /// Sorted, so that keys compare as multisets.
    pub companions: Vec<WorkloadId>,
}

impl CoLocationKey {
    pub fn new(subject: WorkloadId, mut companions: Vec<WorkloadId>) -> Self {
        companions.sort_unstable();
        CoLocationKey {
            subject,
            companions,
        }
    }

    fn pair(subject: &WorkloadId, other: &WorkloadId) -> Self {
        CoLocationKey {
            subject: subject.clone(),
            companions: vec![other.clone()],
        }
    }
}

/// A task and the tasks sharing its instance.
#[derive(Debug, Clone, Copy)]
pub struct Placement<'a> {
    pub task: &'a Task,
    pub companions: &'a [&'a Task],
}

#[derive(Debug, Clone, PartialEq)]
pub struct CoLocationTable {
    entries: BTreeMap<CoLocationKey, f64>,
    default_pairwise: f64,
}

impl Default for CoLocationTable {
    fn default() -> Self {
        CoLocationTable::new(DEFAULT_PAIRWISE_THROUGHPUT).expect("default is in range")
    }
}

fn check(tput: f64) -> Result<()> {
    if tput > 0.0 && tput <= 1.0 {
        Ok(())
    } else {
        Err(Error::ThroughputOutOfRange(tput))
    }
}

#[derive(Debug, Serialize, Deserialize)]
struct TableRow {
    subject_workload: String,
    companions_sorted_semicolon_list: String,
    throughput: f64,
}

impl CoLocationTable {
    pub fn new(default_pairwise: f64) -> Result<Self> {
        check(default_pairwise)?;
        Ok(CoLocationTable {
            entries: BTreeMap::new(),
            default_pairwise,
        })
    }

    pub fn default_pairwise(&self) -> f64 {
        self.default_pairwise
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn entries(&self) -> impl Iterator<Item = (&CoLocationKey, f64)> {
        self.entries.iter().map(|(k, v)| (k, *v))
    }

    pub fn get(&self, key: &CoLocationKey) -> Option<f64> {
        self.entries.get(key).copied()
    }

    /// Estimated normalized throughput of `subject` when sharing an instance with `companions`.
    pub fn lookup(&self, subject: &WorkloadId, companions: &[&WorkloadId]) -> f64 {
        if companions.is_empty() {
            return 1.0;
        }
        let key = CoLocationKey::new(
            subject.clone(),
            companions.iter().map(|w| (*w).clone()).collect(),
        );
        if let Some(v) = self.entries.get(&key) {
            return *v;
        }
        // sorted order keeps the floating-point product independent of how companions are listed
        key.companions
            .iter()
            .map(|c| {
                self.entries
                    .get(&CoLocationKey::pair(subject, c))
                    .copied()
                    .unwrap_or(self.default_pairwise)
            })
            .product()
    }

    pub fn lookup_tasks(&self, subject: &Task, companions: &[&Task]) -> f64 {
        let ws: Vec<&WorkloadId> = companions.iter().map(|t| &t.workload_id).collect();
        self.lookup(&subject.workload_id, &ws)
    }

    /// Stores an observation for a task of a single-task job. Latest observation wins. Standalone
    /// observations carry no information and are ignored.
    pub fn record_single_task(
        &mut self,
        subject: &Task,
        companions: &[&Task],
        observed: f64,
    ) -> Result<()> {
        check(observed)?;
        if companions.is_empty() {
            return Ok(());
        }
        let key = key_of(subject, companions);
        self.entries.insert(key, observed);
        Ok(())
    }

    /// Attributes one observed job throughput of a multi-task job to a single placement and
    /// updates that entry only. Returns the key that was written, or `None` when no task of the
    /// job shares its instance.
    pub fn record_multi_task(
        &mut self,
        placements: &[Placement<'_>],
        observed_job_tput: f64,
    ) -> Result<Option<CoLocationKey>> {
        check(observed_job_tput)?;
        // (task id, companion count, key, recorded value)
        let mut candidates: Vec<(TaskId, usize, CoLocationKey, Option<f64>)> = placements
            .iter()
            .filter(|p| !p.companions.is_empty())
            .map(|p| {
                let key = key_of(p.task, p.companions);
                let recorded = self.entries.get(&key).copied();
                (p.task.id, p.companions.len(), key, recorded)
            })
            .collect();
        if candidates.is_empty() {
            return Ok(None);
        }
        candidates.sort_by_key(|c| c.0);

        let most_companions =
            |pool: &mut dyn Iterator<Item = &(TaskId, usize, CoLocationKey, Option<f64>)>| {
                pool.fold(
                    None::<&(TaskId, usize, CoLocationKey, Option<f64>)>,
                    |best, c| match best {
                        Some(b) if b.1 >= c.1 => Some(b),
                        _ => Some(c),
                    },
                )
                .map(|c| c.2.clone())
            };
        let lowest_recorded = candidates.iter().filter_map(|c| c.3.map(|v| (v, c))).fold(
            None::<(f64, &(TaskId, usize, CoLocationKey, Option<f64>))>,
            |best, (v, c)| match best {
                Some((bv, _)) if bv <= v => best,
                _ => Some((v, c)),
            },
        );

        let target = match lowest_recorded {
            // nothing recorded yet: blame the most crowded placement
            None => most_companions(&mut candidates.iter()),
            // a recorded value is below what the job achieved, so it can be raised
            Some((low, c)) if low < observed_job_tput => Some(c.2.clone()),
            // every recorded value is at least the observation: the straggler is unrecorded
            Some((_, c)) => most_companions(&mut candidates.iter().filter(|c| c.3.is_none()))
                .or_else(|| Some(c.2.clone())),
        };
        let key = target.expect("candidates is non-empty");
        self.entries.insert(key.clone(), observed_job_tput);
        Ok(Some(key))
    }

    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        for (k, v) in &self.entries {
            let companions: Vec<&str> = k.companions.iter().map(|c| c.as_str()).collect();
            w.serialize(TableRow {
                subject_workload: k.subject.0.clone(),
                companions_sorted_semicolon_list: companions.join(";"),
                throughput: *v,
            })?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn read_csv<R: Read>(reader: R, default_pairwise: f64) -> Result<Self> {
        let mut table = CoLocationTable::new(default_pairwise)?;
        let mut rdr = csv::ReaderBuilder::new()
            .trim(csv::Trim::All)
            .from_reader(reader);
        for (i, row) in rdr.deserialize::<TableRow>().enumerate() {
            let parse_err = |reason: String| Error::Parse {
                what: "co-location table",
                line: i + 2,
                reason,
            };
            let row = row.map_err(|e| parse_err(e.to_string()))?;
            check(row.throughput).map_err(|e| parse_err(e.to_string()))?;
            let companions: Vec<WorkloadId> = row
                .companions_sorted_semicolon_list
                .split(';')
                .filter(|s| !s.is_empty())
                .map(WorkloadId::new)
                .collect();
            if companions.is_empty() {
                return Err(parse_err("empty companion list".into()));
            }
            table.entries.insert(
                CoLocationKey::new(WorkloadId::new(row.subject_workload), companions),
                row.throughput,
            );
        }
        Ok(table)
    }
}

fn key_of(subject: &Task, companions: &[&Task]) -> CoLocationKey {
    CoLocationKey::new(
        subject.workload_id.clone(),
        companions.iter().map(|t| t.workload_id.clone()).collect(),
    )
}
