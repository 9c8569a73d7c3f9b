//! Pyramid ("light-cone") meshes pumped from a single input waveguide.
//!
//! Column `c` (1-based) holds `c` MZIs on its `2c` local modes; MZI `j` of
//! that column acts on local modes `(2j, 2j+1)`. Between columns, local mode
//! `i` becomes local mode `i + 1`, so the cone widens by one mode on each
//! side. Everything is expressed in the frame of the last column, where local
//! mode `i` of column `c` sits at mode `i + C − c`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::mzi::{mzi_block, CouplerPair, MziSettings};
use super::ComplexMatrix;
use crate::error::{PufError, Result};

/// Position of one MZI in a pyramid.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MziSlot {
    /// 1-based column.
    pub column: usize,
    /// 0-based position within the column, top to bottom.
    pub row: usize,
    /// Upper mode in the output frame; the lower mode is `mode + 1`.
    pub mode: usize,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MeshLayout {
    columns: usize,
    slots: Vec<MziSlot>,
}

/// Number of MZIs in a pyramid with `columns` columns.
pub const fn pyramid_mzi_count(columns: usize) -> usize {
    columns * (columns + 1) / 2
}

/// Builds the pyramid with slots in column-major, top-to-bottom order.
pub fn build_mesh(columns: usize) -> Result<MeshLayout> {
    if columns == 0 {
        return Err(PufError::Domain("mesh needs at least one column".into()));
    }
    let mut slots = Vec::with_capacity(pyramid_mzi_count(columns));
    for column in 1..=columns {
        let offset = columns - column;
        for row in 0..column {
            slots.push(MziSlot {
                column,
                row,
                mode: offset + 2 * row,
            });
        }
    }
    Ok(MeshLayout { columns, slots })
}

impl MeshLayout {
    pub fn columns(&self) -> usize {
        self.columns
    }

    pub fn mzi_count(&self) -> usize {
        self.slots.len()
    }

    pub fn output_modes(&self) -> usize {
        2 * self.columns
    }

    /// Mode receiving the pump: local mode 0 of column 1.
    pub fn input_mode(&self) -> usize {
        self.columns - 1
    }

    pub fn slots(&self) -> &[MziSlot] {
        &self.slots
    }

    /// Slot index of the MZI at `(column, row)`, if it exists.
    pub fn slot_index(&self, column: usize, row: usize) -> Option<usize> {
        (column >= 1 && column <= self.columns && row < column).then(|| pyramid_mzi_count(column - 1) + row)
    }

    /// Pairs of slots that are nearest neighbours on the (column, row) grid.
    /// Each pair appears once with the smaller index first.
    pub fn grid_neighbours(&self) -> Vec<(usize, usize)> {
        let mut pairs = Vec::new();
        for (idx, slot) in self.slots.iter().enumerate() {
            if let Some(below) = self.slot_index(slot.column, slot.row + 1) {
                pairs.push((idx, below));
            }
            if let Some(next) = self.slot_index(slot.column + 1, slot.row) {
                pairs.push((idx, next));
            }
        }
        pairs.sort_unstable();
        pairs
    }

    fn check_lengths(&self, settings: &[MziSettings], couplers: &[CouplerPair]) -> Result<()> {
        for len in [settings.len(), couplers.len()] {
            if len != self.mzi_count() {
                return Err(PufError::LengthMismatch {
                    expected: self.mzi_count(),
                    actual: len,
                });
            }
        }
        couplers.iter().try_for_each(CouplerPair::validate)
    }
}

/// Normalized output powers, one per output mode.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IntensityVector(pub Vec<f64>);

impl IntensityVector {
    pub fn total(&self) -> f64 {
        self.0.iter().sum()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }
}

/// Full `2C × 2C` transfer matrix of the mesh.
pub fn mesh_transfer_matrix(
    layout: &MeshLayout,
    settings: &[MziSettings],
    couplers: &[CouplerPair],
) -> Result<ComplexMatrix> {
    layout.check_lengths(settings, couplers)?;
    let mut t = ComplexMatrix::identity(layout.output_modes());
    for ((slot, s), k) in layout.slots.iter().zip(settings).zip(couplers) {
        t.mix_rows(slot.mode, slot.mode + 1, &mzi_block(*s, *k));
    }
    Ok(t)
}

/// Injects unit amplitude at the input mode and returns output powers.
pub fn propagate(layout: &MeshLayout, settings: &[MziSettings], couplers: &[CouplerPair]) -> Result<IntensityVector> {
    layout.check_lengths(settings, couplers)?;
    let mut field = vec![Complex64::new(0.0, 0.0); layout.output_modes()];
    field[layout.input_mode()] = Complex64::new(1.0, 0.0);
    for ((slot, s), k) in layout.slots.iter().zip(settings).zip(couplers) {
        let u = mzi_block(*s, *k);
        let (a, b) = (field[slot.mode], field[slot.mode + 1]);
        field[slot.mode] = u[0][0] * a + u[0][1] * b;
        field[slot.mode + 1] = u[1][0] * a + u[1][1] * b;
    }
    Ok(IntensityVector(field.iter().map(|z| z.norm_sqr()).collect()))
}
