//! Per-iteration records of the quantities MINRES monitors, with CSV output.

use std::io::Write;

use serde::Serialize;

use crate::error::Result;
use crate::scalar::Real;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IterationRecord<T> {
    pub k: usize,
    /// `φ_k`
    pub phi: T,
    /// `φ_k / β_1`
    pub rel_residual: T,
    /// `−φ²_{k-1} c_{k-1} γ⁽¹⁾_k`, i.e. `⟨r_{k-1}, A r_{k-1}⟩`.
    pub curvature: Option<T>,
    /// `m(x_k) = ⟨x_k, A x_k⟩/2 − ⟨b, x_k⟩`
    pub m_x: T,
    pub x_norm: T,
    pub x_dot_b: T,
    pub x_dot_r: T,
    pub npc: bool,
    /// `λ_min(T_k)`, diagnostics only.
    pub lambda_min: Option<T>,
    /// `‖b − A x_k‖`, diagnostics only.
    pub explicit_residual: Option<T>,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize)]
pub struct IterationTrace<T> {
    pub records: Vec<IterationRecord<T>>,
}

/// Shortest round-trip decimal; blank for missing values.
fn cell<T: Real>(x: Option<T>) -> String {
    x.map(|v| v.to_f64_lossy().to_string()).unwrap_or_default()
}

impl<T: Real> IterationTrace<T> {
    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    /// First iteration whose NPC flag is set.
    pub fn first_npc(&self) -> Option<usize> {
        self.records.iter().find(|r| r.npc).map(|r| r.k)
    }

    /// Every monitored quantity, one row per iteration.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record([
            "k",
            "phi",
            "rel_residual",
            "curvature",
            "m_x",
            "x_norm",
            "x_dot_b",
            "x_dot_r",
            "npc_flag",
            "lambda_min_T",
            "explicit_residual",
        ])?;
        for r in &self.records {
            w.write_record([
                r.k.to_string(),
                cell(Some(r.phi)),
                cell(Some(r.rel_residual)),
                cell(r.curvature),
                cell(Some(r.m_x)),
                cell(Some(r.x_norm)),
                cell(Some(r.x_dot_b)),
                cell(Some(r.x_dot_r)),
                u8::from(r.npc).to_string(),
                cell(r.lambda_min),
                cell(r.explicit_residual),
            ])?;
        }
        w.flush()
            .map_err(|e| crate::error::Error::io("<csv writer>", e))?;
        Ok(())
    }

    /// The six plotted quantities of the spectral experiment plus the
    /// iteration counter and NPC mark.
    pub fn write_figure_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record([
            "k",
            "lambda_min_T",
            "x_dot_r",
            "m_x",
            "x_norm",
            "x_dot_b",
            "rel_residual",
            "npc_flag",
        ])?;
        for r in &self.records {
            w.write_record([
                r.k.to_string(),
                cell(r.lambda_min),
                cell(Some(r.x_dot_r)),
                cell(Some(r.m_x)),
                cell(Some(r.x_norm)),
                cell(Some(r.x_dot_b)),
                cell(Some(r.rel_residual)),
                u8::from(r.npc).to_string(),
            ])?;
        }
        w.flush()
            .map_err(|e| crate::error::Error::io("<csv writer>", e))?;
        Ok(())
    }
}
