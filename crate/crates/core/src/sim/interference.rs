//! Ground-truth co-location throughput used by the simulated cloud.

use std::collections::BTreeMap;
use std::io::{Read, Write};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::task::WorkloadId;

/// Normalized throughput of workload `a` when sharing an instance with workload `b`. Pairs
/// without an entry resolve to `fallback`. A task with several companions runs at the product of
/// its pairwise values.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroundTruthInterference {
    pairwise: BTreeMap<(WorkloadId, WorkloadId), f64>,
    fallback: Option<f64>,
}

fn check(v: f64) -> Result<f64> {
    if v > 0.0 && v <= 1.0 {
        Ok(v)
    } else {
        Err(Error::ThroughputOutOfRange(v))
    }
}

impl GroundTruthInterference {
    /// Every pair runs at `g`.
    pub fn uniform(g: f64) -> Result<Self> {
        Ok(GroundTruthInterference {
            pairwise: BTreeMap::new(),
            fallback: Some(check(g)?),
        })
    }

    pub fn from_pairs(
        pairs: impl IntoIterator<Item = (WorkloadId, WorkloadId, f64)>,
        fallback: Option<f64>,
    ) -> Result<Self> {
        let mut pairwise = BTreeMap::new();
        for (a, b, v) in pairs {
            pairwise.insert((a, b), check(v)?);
        }
        let fallback = fallback.map(check).transpose()?;
        Ok(GroundTruthInterference { pairwise, fallback })
    }

    /// A reproducible asymmetric matrix over `workloads` with every value drawn uniformly from
    /// `[min, 1]`.
    pub fn synthetic(workloads: &[WorkloadId], min: f64, seed: u64) -> Result<Self> {
        check(min)?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut pairwise = BTreeMap::new();
        for a in workloads {
            for b in workloads {
                pairwise.insert((a.clone(), b.clone()), rng.random_range(min..=1.0));
            }
        }
        Ok(GroundTruthInterference {
            pairwise,
            fallback: None,
        })
    }

    pub fn pairs(&self) -> impl Iterator<Item = (&WorkloadId, &WorkloadId, f64)> {
        self.pairwise.iter().map(|((a, b), v)| (a, b, *v))
    }

    pub fn pair(&self, a: &WorkloadId, b: &WorkloadId) -> Option<f64> {
        self.pairwise
            .get(&(a.clone(), b.clone()))
            .copied()
            .or(self.fallback)
    }

    /// Throughput of `subject` next to `companions`; 1.0 when alone.
    pub fn throughput<'a>(
        &self,
        subject: &WorkloadId,
        companions: impl IntoIterator<Item = &'a WorkloadId>,
    ) -> f64 {
        let mut sorted: Vec<&WorkloadId> = companions.into_iter().collect();
        sorted.sort();
        sorted
            .iter()
            .map(|c| self.pair(subject, c).unwrap_or(1.0))
            .product()
    }

    /// Errors unless every ordered pair of `workloads`, the diagonal included, resolves.
    pub fn check_covers<'a>(
        &self,
        workloads: impl IntoIterator<Item = &'a WorkloadId>,
    ) -> Result<()> {
        let ws: Vec<&WorkloadId> = workloads.into_iter().collect();
        for a in &ws {
            for b in &ws {
                if self.pair(a, b).is_none() {
                    return Err(Error::InvalidInput(format!(
                        "interference matrix has no entry for ({a}, {b})"
                    )));
                }
            }
        }
        Ok(())
    }

    pub fn read_csv<R: Read>(reader: R, fallback: Option<f64>) -> Result<Self> {
        let mut rdr = csv::Reader::from_reader(reader);
        let headers = rdr.headers()?.clone();
        if headers.iter().collect::<Vec<_>>() != ["workload_a", "workload_b", "tput_a_given_b"] {
            return Err(Error::Parse {
                what: "interference",
                line: 1,
                reason: "expected header workload_a,workload_b,tput_a_given_b".into(),
            });
        }
        let mut pairs = Vec::new();
        for (i, rec) in rdr.records().enumerate() {
            let rec = rec?;
            let line = i + 2;
            let bad = |reason: String| Error::Parse {
                what: "interference",
                line,
                reason,
            };
            if rec.len() != 3 {
                return Err(bad(format!("expected 3 fields, got {}", rec.len())));
            }
            let v: f64 = rec[2]
                .trim()
                .parse()
                .map_err(|e| bad(format!("throughput: {e}")))?;
            check(v).map_err(|_| bad(format!("throughput {v} outside (0, 1]")))?;
            pairs.push((
                WorkloadId::new(rec[0].trim()),
                WorkloadId::new(rec[1].trim()),
                v,
            ));
        }
        Self::from_pairs(pairs, fallback)
    }

    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        w.write_record(["workload_a", "workload_b", "tput_a_given_b"])?;
        for ((a, b), v) in &self.pairwise {
            w.write_record([a.as_str(), b.as_str(), &v.to_string()])?;
        }
        w.flush()?;
        Ok(())
    }
}
