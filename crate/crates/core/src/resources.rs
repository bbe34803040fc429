//! Multi-resource demand and capacity vectors.

use std::fmt;
use std::ops::{Add, AddAssign};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// RAM is stored in thousandths of a gigabyte so that component arithmetic stays exact.
const RAM_SCALE: f64 = 1000.0;

/// A resource dimension. Adding a resource means adding a variant and bumping [`NUM_RESOURCES`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Resource {
    Gpu,
    Cpu,
    Ram,
}

pub const NUM_RESOURCES: usize = 3;

impl Resource {
    pub const ALL: [Resource; NUM_RESOURCES] = [Resource::Gpu, Resource::Cpu, Resource::Ram];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn name(self) -> &'static str {
        match self {
            Resource::Gpu => "gpu",
            Resource::Cpu => "cpu",
            Resource::Ram => "ram",
        }
    }
}

/// GPU and CPU counts plus RAM in gigabytes, held as an indexed vector of integer units.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub struct ResourceVector {
    units: [u64; NUM_RESOURCES],
}

impl ResourceVector {
    pub const ZERO: ResourceVector = ResourceVector {
        units: [0; NUM_RESOURCES],
    };

    /// Builds a vector from GPU count, CPU count and RAM in GB. RAM is rounded to the nearest MB.
    pub fn new(gpu: u32, cpu: u32, ram_gb: f64) -> Result<Self> {
        if !ram_gb.is_finite() || ram_gb < 0.0 {
            return Err(Error::InvalidInput(format!(
                "ram_gb must be a non-negative number, got {ram_gb}"
            )));
        }
        Ok(ResourceVector {
            units: [gpu as u64, cpu as u64, (ram_gb * RAM_SCALE).round() as u64],
        })
    }

    /// Infallible constructor for integer RAM amounts.
    pub const fn whole(gpu: u32, cpu: u32, ram_gb: u32) -> Self {
        ResourceVector {
            units: [gpu as u64, cpu as u64, ram_gb as u64 * RAM_SCALE as u64],
        }
    }

    pub fn gpu(&self) -> u64 {
        self.units[Resource::Gpu.index()]
    }

    pub fn cpu(&self) -> u64 {
        self.units[Resource::Cpu.index()]
    }

    pub fn ram_gb(&self) -> f64 {
        self.units[Resource::Ram.index()] as f64 / RAM_SCALE
    }

    /// Amount of one resource in natural units (RAM in GB).
    pub fn amount(&self, resource: Resource) -> f64 {
        match resource {
            Resource::Ram => self.ram_gb(),
            _ => self.units[resource.index()] as f64,
        }
    }

    pub fn is_zero(&self) -> bool {
        self.units.iter().all(|&u| u == 0)
    }

    /// True iff every component of `self` is at most the matching component of `capacity`.
    pub fn fits(&self, capacity: &ResourceVector) -> bool {
        self.units
            .iter()
            .zip(capacity.units.iter())
            .all(|(d, c)| d <= c)
    }

    pub fn checked_sub(&self, other: &ResourceVector) -> Option<ResourceVector> {
        let mut units = [0; NUM_RESOURCES];
        for (i, slot) in units.iter_mut().enumerate() {
            *slot = self.units[i].checked_sub(other.units[i])?;
        }
        Some(ResourceVector { units })
    }

    pub fn sum<'a>(items: impl IntoIterator<Item = &'a ResourceVector>) -> ResourceVector {
        items
            .into_iter()
            .fold(ResourceVector::ZERO, |acc, v| acc + *v)
    }
}

/// Free-function form of [`ResourceVector::fits`].
pub fn fits(demand: &ResourceVector, capacity: &ResourceVector) -> bool {
    demand.fits(capacity)
}

impl Add for ResourceVector {
    type Output = ResourceVector;

    fn add(mut self, rhs: ResourceVector) -> ResourceVector {
        self += rhs;
        self
    }
}

impl AddAssign for ResourceVector {
    fn add_assign(&mut self, rhs: ResourceVector) {
        for (a, b) in self.units.iter_mut().zip(rhs.units.iter()) {
            *a += b;
        }
    }
}

impl fmt::Display for ResourceVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {}, {})", self.gpu(), self.cpu(), self.ram_gb())
    }
}

impl Serialize for ResourceVector {
    fn serialize<S: serde::Serializer>(
        &self,
        serializer: S,
    ) -> std::result::Result<S::Ok, S::Error> {
        (self.gpu(), self.cpu(), self.ram_gb()).serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for ResourceVector {
    fn deserialize<D: serde::Deserializer<'de>>(
        deserializer: D,
    ) -> std::result::Result<Self, D::Error> {
        let (gpu, cpu, ram): (u32, u32, f64) = Deserialize::deserialize(deserializer)?;
        ResourceVector::new(gpu, cpu, ram).map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn table_examples() {
        let it1 = ResourceVector::whole(4, 16, 244);
        assert!(fits(&ResourceVector::whole(2, 8, 24), &it1));
        assert!(ResourceVector::ZERO.fits(&ResourceVector::ZERO));
        // tau3 against what is left of it1 after tau1 and tau2: CPU 6 > 4
        let left = ResourceVector::whole(1, 4, 210);
        assert!(!ResourceVector::whole(0, 6, 20).fits(&left));
    }

    #[test]
    fn fractional_ram_is_exact() {
        let a = ResourceVector::new(0, 1, 0.1).unwrap();
        let b = ResourceVector::new(0, 1, 0.2).unwrap();
        assert_eq!(a + b, ResourceVector::new(0, 2, 0.3).unwrap());
        assert!(ResourceVector::new(0, 0, -1.0).is_err());
        assert!(ResourceVector::new(0, 0, f64::NAN).is_err());
    }

    fn arb_vec() -> impl Strategy<Value = ResourceVector> {
        (0u32..5, 0u32..20, 0u32..300).prop_map(|(g, c, r)| ResourceVector::whole(g, c, r))
    }

    proptest! {
        #[test]
        fn fits_is_a_partial_order(a in arb_vec(), b in arb_vec(), c in arb_vec()) {
            prop_assert!(a.fits(&a));
            if a.fits(&b) && b.fits(&a) {
                prop_assert_eq!(a, b);
            }
            if a.fits(&b) && b.fits(&c) {
                prop_assert!(a.fits(&c));
            }
        }

        #[test]
        fn sub_inverts_add(a in arb_vec(), b in arb_vec()) {
            prop_assert_eq!((a + b).checked_sub(&b), Some(a));
            prop_assert!(a.fits(&(a + b)));
        }
    }
}
