//! Binary SCF checkpoints.
//!
//! Layout (little-endian): magic `MRHF1`, `u32` version, `f64` cell length,
//! `u32` grid points, `u8` mode (0 molecular, 1 periodic), `u32` orbital
//! count, then per orbital the up and down components as interleaved
//! `(re, im)` `f64` pairs, the occupations, and the three components of `A`.

use std::path::Path;

use crate::density::DensityMatrix;
use crate::error::{Error, Result};
use crate::fields::{Cell, ScalarField, SpinorField, VectorField, C64};
use crate::io::record::write_atomic;
use crate::pauli::{BoundaryMode, MagneticPotential, SystemSpec};
use crate::scf::{ScfState, WarmStart};

pub const MAGIC: &[u8; 5] = b"MRHF1";
pub const VERSION: u32 = 1;

/// Raw checkpoint contents.
#[derive(Clone, Debug, PartialEq)]
pub struct Checkpoint {
    pub cell: Cell,
    pub mode: BoundaryMode,
    pub orbitals: Vec<SpinorField>,
    pub occupations: Vec<f64>,
    pub a: VectorField,
}

impl Checkpoint {
    pub fn from_state(state: &ScfState) -> Self {
        Self {
            cell: *state.gamma.cell(),
            mode: state.gamma.mode(),
            orbitals: state.gamma.orbitals().to_vec(),
            occupations: state.gamma.occupations().to_vec(),
            a: state.a.a().clone(),
        }
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let n3 = self.cell.len();
        let mut out = Vec::with_capacity(26 + self.orbitals.len() * (32 * n3 + 8) + 24 * n3);
        out.extend_from_slice(MAGIC);
        out.extend_from_slice(&VERSION.to_le_bytes());
        out.extend_from_slice(&self.cell.length().to_le_bytes());
        out.extend_from_slice(&(self.cell.points() as u32).to_le_bytes());
        out.push(match self.mode {
            BoundaryMode::Molecular => 0,
            BoundaryMode::Periodic => 1,
        });
        out.extend_from_slice(&(self.orbitals.len() as u32).to_le_bytes());
        for phi in &self.orbitals {
            for s in 0..2 {
                for z in phi.component(s) {
                    out.extend_from_slice(&z.re.to_le_bytes());
                    out.extend_from_slice(&z.im.to_le_bytes());
                }
            }
        }
        for o in &self.occupations {
            out.extend_from_slice(&o.to_le_bytes());
        }
        for c in self.a.components() {
            for v in c.values() {
                out.extend_from_slice(&v.to_le_bytes());
            }
        }
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        let mut r = Reader { bytes, pos: 0 };
        if r.take(5)? != MAGIC {
            return Err(Error::Checkpoint("bad magic bytes".into()));
        }
        let version = r.u32()?;
        if version != VERSION {
            return Err(Error::Checkpoint(format!("unsupported version {version}")));
        }
        let length = r.f64()?;
        let points = r.u32()? as usize;
        let cell = Cell::new(length, points).map_err(|e| Error::Checkpoint(format!("invalid cell: {e}")))?;
        let mode = match r.take(1)?[0] {
            0 => BoundaryMode::Molecular,
            1 => BoundaryMode::Periodic,
            m => return Err(Error::Checkpoint(format!("unknown mode byte {m}"))),
        };
        let count = r.u32()? as usize;
        let n3 = cell.len();
        let needed = count
            .checked_mul(32 * n3 + 8)
            .and_then(|v| v.checked_add(24 * n3))
            .ok_or_else(|| Error::Checkpoint("orbital count overflows".into()))?;
        if r.remaining() != needed {
            return Err(Error::Checkpoint(format!(
                "expected {needed} payload bytes, found {}",
                r.remaining()
            )));
        }
        let mut orbitals = Vec::with_capacity(count);
        for _ in 0..count {
            let mut comps = [Vec::with_capacity(n3), Vec::with_capacity(n3)];
            for comp in &mut comps {
                for _ in 0..n3 {
                    let re = r.f64()?;
                    comp.push(C64::new(re, r.f64()?));
                }
            }
            let [up, down] = comps;
            orbitals.push(SpinorField::from_components(cell, up, down)?);
        }
        let occupations = (0..count).map(|_| r.f64()).collect::<Result<Vec<_>>>()?;
        let mut comps = Vec::with_capacity(3);
        for _ in 0..3 {
            let v = (0..n3).map(|_| r.f64()).collect::<Result<Vec<_>>>()?;
            comps.push(ScalarField::from_values(cell, v)?);
        }
        let comps: [ScalarField; 3] = comps.try_into().map_err(|_| Error::Checkpoint("bad A field".into()))?;
        Ok(Self {
            cell,
            mode,
            orbitals,
            occupations,
            a: VectorField::from_components(comps)?,
        })
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        write_atomic(path, &self.to_bytes())
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_bytes(&std::fs::read(path)?)
    }

    /// Warm start for `spec`; the cell and boundary mode must match.
    pub fn warm_start(&self, spec: &SystemSpec) -> Result<WarmStart> {
        if self.cell != *spec.cell() {
            return Err(Error::CellMismatch {
                left: self.cell.to_string(),
                right: spec.cell().to_string(),
            });
        }
        if self.mode != spec.mode() {
            return Err(Error::Checkpoint(format!(
                "checkpoint mode {} does not match configured mode {}",
                self.mode.as_str(),
                spec.mode().as_str()
            )));
        }
        let gamma = DensityMatrix::new(self.orbitals.clone(), self.occupations.clone(), self.mode)?;
        let a = MagneticPotential::new(self.a.clone(), spec.zero_mean_gauge());
        Ok(WarmStart::new(gamma, a))
    }
}

struct Reader<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8]> {
        if self.pos + n > self.bytes.len() {
            return Err(Error::Checkpoint("truncated file".into()));
        }
        let s = &self.bytes[self.pos..self.pos + n];
        self.pos += n;
        Ok(s)
    }

    fn remaining(&self) -> usize {
        self.bytes.len() - self.pos
    }

    fn u32(&mut self) -> Result<u32> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().expect("4 bytes")))
    }

    fn f64(&mut self) -> Result<f64> {
        Ok(f64::from_le_bytes(self.take(8)?.try_into().expect("8 bytes")))
    }
}
