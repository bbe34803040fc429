//! Instance types and the catalog they are provisioned from.

use std::fmt;
use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::resources::ResourceVector;

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct InstanceTypeId(pub String);

impl InstanceTypeId {
    pub fn new(id: impl Into<String>) -> Self {
        InstanceTypeId(id.into())
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for InstanceTypeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

pub const GHOST_TYPE_ID: &str = "__ghost__";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InstanceType {
    pub id: InstanceTypeId,
    pub capacity: ResourceVector,
    /// Dollars per hour.
    pub hourly_cost: f64,
}

impl InstanceType {
    pub fn new(id: impl Into<String>, capacity: ResourceVector, hourly_cost: f64) -> Result<Self> {
        let id = id.into();
        if id == GHOST_TYPE_ID {
            return Err(Error::InvalidInput("the ghost type id is reserved".into()));
        }
        if !hourly_cost.is_finite() || hourly_cost < 0.0 {
            return Err(Error::InvalidInput(format!(
                "type {id}: hourly cost must be >= 0, got {hourly_cost}"
            )));
        }
        if capacity.is_zero() {
            return Err(Error::InvalidInput(format!(
                "type {id}: capacity must have a positive component"
            )));
        }
        Ok(InstanceType {
            id: InstanceTypeId(id),
            capacity,
            hourly_cost,
        })
    }

    /// Zero-cost, zero-capacity type standing for an instance slot that is never provisioned.
    pub fn ghost() -> Self {
        InstanceType {
            id: InstanceTypeId(GHOST_TYPE_ID.to_string()),
            capacity: ResourceVector::ZERO,
            hourly_cost: 0.0,
        }
    }

    pub fn is_ghost(&self) -> bool {
        self.id.0 == GHOST_TYPE_ID
    }
}

/// The immutable set of non-ghost instance types available for a run.
#[derive(Debug, Clone, PartialEq)]
pub struct Catalog {
    types: Vec<InstanceType>,
}

#[derive(Debug, Serialize, Deserialize)]
struct CatalogRow {
    type_id: String,
    gpu: u32,
    cpu: u32,
    ram_gb: f64,
    hourly_cost: f64,
}

impl Catalog {
    pub fn new(types: Vec<InstanceType>) -> Result<Self> {
        if types.is_empty() {
            return Err(Error::InvalidInput("catalog is empty".into()));
        }
        for (i, t) in types.iter().enumerate() {
            if t.is_ghost() {
                return Err(Error::InvalidInput(
                    "the ghost type must not appear in a catalog".into(),
                ));
            }
            if types[..i].iter().any(|o| o.id == t.id) {
                return Err(Error::InvalidInput(format!(
                    "duplicate instance type {}",
                    t.id
                )));
            }
        }
        Ok(Catalog { types })
    }

    pub fn types(&self) -> &[InstanceType] {
        &self.types
    }

    pub fn get(&self, id: &InstanceTypeId) -> Option<&InstanceType> {
        self.types.iter().find(|t| &t.id == id)
    }

    /// Types sorted by hourly cost, most expensive first; ties by id.
    pub fn by_cost_descending(&self) -> Vec<&InstanceType> {
        let mut sorted: Vec<&InstanceType> = self.types.iter().collect();
        sorted.sort_by(|a, b| {
            b.hourly_cost
                .total_cmp(&a.hourly_cost)
                .then_with(|| a.id.cmp(&b.id))
        });
        sorted
    }

    /// Cheapest type whose capacity holds `demand`; ties by id.
    pub fn cheapest_fitting(&self, demand: &ResourceVector) -> Option<&InstanceType> {
        self.types
            .iter()
            .filter(|t| demand.fits(&t.capacity))
            .min_by(|a, b| {
                a.hourly_cost
                    .total_cmp(&b.hourly_cost)
                    .then_with(|| a.id.cmp(&b.id))
            })
    }

    pub fn read_csv<R: Read>(reader: R) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new()
            .trim(csv::Trim::All)
            .from_reader(reader);
        let mut types = Vec::new();
        for (i, row) in rdr.deserialize::<CatalogRow>().enumerate() {
            let row = row.map_err(|e| Error::Parse {
                what: "catalog",
                line: i + 2,
                reason: e.to_string(),
            })?;
            let capacity = ResourceVector::new(row.gpu, row.cpu, row.ram_gb)?;
            types.push(InstanceType::new(row.type_id, capacity, row.hourly_cost)?);
        }
        Catalog::new(types)
    }

    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        for t in &self.types {
            w.serialize(CatalogRow {
                type_id: t.id.0.clone(),
                gpu: t.capacity.gpu() as u32,
                cpu: t.capacity.cpu() as u32,
                ram_gb: t.capacity.ram_gb(),
                hourly_cost: t.hourly_cost,
            })?;
        }
        w.flush()?;
        Ok(())
    }
}
