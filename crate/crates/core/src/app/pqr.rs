//! PQR charge files: whitespace-separated `ATOM`/`HETATM` records whose last
//! five fields are `x y z charge radius`. Other records are skipped.

use crate::mesh::Point3;
use crate::model::{ChargeSystem, PointCharge};

#[derive(Debug, thiserror::Error, PartialEq)]
#[error("line {line}: {message}")]
pub struct PqrError {
    pub line: usize,
    pub message: String,
}

/// One atom record.
#[derive(Clone, Debug, PartialEq)]
pub struct PqrAtom {
    pub name: String,
    pub position: Point3,
    pub charge: f64,
    pub radius: f64,
}

pub fn parse_pqr_atoms(text: &str) -> Result<Vec<PqrAtom>, PqrError> {
    let mut atoms = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let fields: Vec<&str> = raw.split_whitespace().collect();
        match fields.first() {
            Some(&"ATOM") | Some(&"HETATM") => {}
            _ => continue,
        }
        // Record, serial, atom and residue names, residue number, then x y z q r.
        if fields.len() < 10 {
            return Err(PqrError { line, message: format!("expected at least 10 fields, found {}", fields.len()) });
        }
        let tail = &fields[fields.len() - 5..];
        let names = ["x", "y", "z", "charge", "radius"];
        let mut vals = [0.0; 5];
        for k in 0..5 {
            vals[k] = tail[k]
                .parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .ok_or_else(|| PqrError { line, message: format!("{} column `{}` is not a number", names[k], tail[k]) })?;
        }
        if vals[4] < 0.0 {
            return Err(PqrError { line, message: format!("negative radius {}", vals[4]) });
        }
        atoms.push(PqrAtom {
            name: fields[2].to_string(),
            position: Point3::new(vals[0], vals[1], vals[2]),
            charge: vals[3],
            radius: vals[4],
        });
    }
    Ok(atoms)
}

/// Charges of every atom record; radii are validated but unused.
pub fn parse_pqr(text: &str) -> Result<ChargeSystem, PqrError> {
    let atoms = parse_pqr_atoms(text)?;
    if atoms.is_empty() {
        log::warn!("PQR input contains no atom records");
    }
    Ok(ChargeSystem::new(atoms.into_iter().map(|a| PointCharge { position: a.position, charge: a.charge }).collect()))
}
