//! JSON-lines form of witness lists: one
//! `{"kind", "location", "tuple_indices", "depth"}` object per line.
//!
//! Kinds are `interior_local_min`, `interior_crossing`,
//! `face_critical:<label>` and `vertex:<label>`, where the label gives each
//! axis as `*` (free), `-` (low side) or `+` (high side).

use std::io::{BufRead, Write};

use serde::{Deserialize, Serialize};

use super::{VacancyWitness, WitnessKind};
use crate::error::{invalid, Result};
use crate::geom::Point;
use crate::region::FaceId;

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct Line {
    kind: String,
    location: Vec<f64>,
    tuple_indices: Vec<usize>,
    depth: usize,
}

fn kind_label(kind: &WitnessKind, dim: usize) -> String {
    match kind {
        WitnessKind::InteriorLocalMin => "interior_local_min".into(),
        WitnessKind::InteriorCrossing => "interior_crossing".into(),
        WitnessKind::FaceCritical(id) => format!("face_critical:{}", id.label(dim)),
        WitnessKind::Vertex(id) => format!("vertex:{}", id.label(dim)),
    }
}

fn parse_kind(s: &str, dim: usize) -> Result<WitnessKind> {
    let face = |label: &str| {
        FaceId::parse(label)
            .filter(|_| label.len() == dim)
            .ok_or_else(|| invalid(format!("bad face label '{label}'")))
    };
    match s.split_once(':') {
        None if s == "interior_local_min" => Ok(WitnessKind::InteriorLocalMin),
        None if s == "interior_crossing" => Ok(WitnessKind::InteriorCrossing),
        Some(("face_critical", l)) => Ok(WitnessKind::FaceCritical(face(l)?)),
        Some(("vertex", l)) => Ok(WitnessKind::Vertex(face(l)?)),
        _ => Err(invalid(format!("unknown witness kind '{s}'"))),
    }
}

pub fn write_witness_lines<const D: usize, W: Write>(out: &mut W, witnesses: &[VacancyWitness<D>]) -> Result<()> {
    for w in witnesses {
        let line = Line {
            kind: kind_label(&w.kind, D),
            location: w.location.0.to_vec(),
            tuple_indices: w.tuple_indices.clone(),
            depth: w.depth,
        };
        serde_json::to_writer(&mut *out, &line)?;
        out.write_all(b"\n")?;
    }
    Ok(())
}

pub fn read_witness_lines<const D: usize, R: BufRead>(input: R) -> Result<Vec<VacancyWitness<D>>> {
    let mut out = Vec::new();
    for line in input.lines() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let l: Line = serde_json::from_str(&line)?;
        let location: [f64; D] = l
            .location
            .try_into()
            .map_err(|v: Vec<f64>| invalid(format!("location has {} coordinates, expected {D}", v.len())))?;
        out.push(VacancyWitness {
            location: Point(location),
            tuple_indices: l.tuple_indices,
            depth: l.depth,
            kind: parse_kind(&l.kind, D)?,
        });
    }
    Ok(out)
}
