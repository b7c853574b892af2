//! Pareto dominance, front merging and exact three-objective hypervolume.

use std::io;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::decoder::ObjectiveVector;

/// Multiplier applied to the per-objective maxima of a reference front.
pub const REFERENCE_SCALE: f64 = 1.1;

#[derive(Debug, Error)]
pub enum MetricsError {
    #[error("cannot derive a reference point from an empty front")]
    EmptyFront,
    #[error("reference coordinate {0} is not positive and finite")]
    BadReference(f64),
    #[error("front CSV: {0}")]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Io(#[from] io::Error),
}

/// Minimisation dominance: `a <= b` everywhere and `a != b`.
pub fn dominates(a: &ObjectiveVector, b: &ObjectiveVector) -> bool {
    dominates_f(&a.to_f64(), &b.to_f64())
}

pub fn dominates_f(a: &[f64; 3], b: &[f64; 3]) -> bool {
    a.iter().zip(b).all(|(x, y)| x <= y) && a != b
}

/// Sorted, deduplicated set of mutually non-dominated vectors.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Front {
    points: Vec<ObjectiveVector>,
}

#[derive(Serialize, Deserialize)]
struct CsvRow {
    f1: u64,
    f2: u64,
    f3: u64,
}

impl Front {
    pub fn points(&self) -> &[ObjectiveVector] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn contains(&self, v: &ObjectiveVector) -> bool {
        self.points.binary_search(v).is_ok()
    }

    pub fn write_csv<W: io::Write>(&self, writer: W) -> Result<(), MetricsError> {
        let mut w = csv::Writer::from_writer(writer);
        for p in &self.points {
            w.serialize(CsvRow {
                f1: p.makespan,
                f2: p.total_workload,
                f3: p.critical_workload,
            })?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn to_csv(&self) -> String {
        let mut buf = Vec::new();
        self.write_csv(&mut buf).expect("writing to memory");
        if self.points.is_empty() {
            buf = b"f1,f2,f3\n".to_vec();
        }
        String::from_utf8(buf).expect("csv is ascii")
    }

    /// Reads `f1,f2,f3` rows and applies [`nd_filter`].
    pub fn read_csv<R: io::Read>(reader: R) -> Result<Front, MetricsError> {
        let mut r = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
        let mut points = Vec::new();
        for row in r.deserialize() {
            let row: CsvRow = row?;
            points.push(ObjectiveVector::new(row.f1, row.f2, row.f3));
        }
        Ok(nd_filter(points))
    }
}

impl FromIterator<ObjectiveVector> for Front {
    fn from_iter<I: IntoIterator<Item = ObjectiveVector>>(iter: I) -> Self {
        nd_filter(iter)
    }
}

/// Removes dominated and duplicate vectors.
pub fn nd_filter<I: IntoIterator<Item = ObjectiveVector>>(points: I) -> Front {
    let mut pts: Vec<ObjectiveVector> = points.into_iter().collect();
    pts.sort_unstable();
    pts.dedup();
    // Lexicographic order means a dominator always precedes what it dominates.
    let mut kept: Vec<ObjectiveVector> = Vec::with_capacity(pts.len());
    for p in pts {
        if !kept.iter().any(|k| dominates(k, &p)) {
            kept.push(p);
        }
    }
    Front { points: kept }
}

pub fn merge_runs<'a, I: IntoIterator<Item = &'a Front>>(fronts: I) -> Front {
    nd_filter(fronts.into_iter().flat_map(|f| f.points.iter().copied()))
}

/// Hypervolume reference. With `normalize` set, coordinates are divided by
/// `point` so the measured region is the unit cube.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HvReference {
    pub point: [f64; 3],
    pub normalize: bool,
}

impl HvReference {
    pub fn new(point: [f64; 3]) -> Result<Self, MetricsError> {
        if let Some(&bad) = point.iter().find(|c| !(c.is_finite() && **c > 0.0)) {
            return Err(MetricsError::BadReference(bad));
        }
        Ok(Self { point, normalize: true })
    }

    pub fn raw(self) -> Self {
        Self {
            normalize: false,
            ..self
        }
    }
}

/// `REFERENCE_SCALE` times the per-objective maximum of `front`.
pub fn reference_point(front: &Front) -> Result<HvReference, MetricsError> {
    reference_from_points(front.points())
}

pub fn reference_from_points(points: &[ObjectiveVector]) -> Result<HvReference, MetricsError> {
    if points.is_empty() {
        return Err(MetricsError::EmptyFront);
    }
    let mut max = [0.0f64; 3];
    for p in points {
        for (m, v) in max.iter_mut().zip(p.to_f64()) {
            *m = m.max(v);
        }
    }
    // Zero maxima only occur on degenerate instances; keep the box non-empty.
    HvReference::new(max.map(|m| if m > 0.0 { REFERENCE_SCALE * m } else { 1.0 }))
}

pub fn hypervolume3(points: &[ObjectiveVector], reference: &HvReference) -> f64 {
    let pts: Vec<[f64; 3]> = points
        .iter()
        .map(|p| {
            let v = p.to_f64();
            if reference.normalize {
                [0, 1, 2].map(|i| v[i] / reference.point[i])
            } else {
                v
            }
        })
        .collect();
    let r = if reference.normalize {
        [1.0; 3]
    } else {
        reference.point
    };
    hypervolume3_raw(&pts, r)
}

/// Exact volume dominated by `points` inside the box bounded by `reference`.
/// Points with any coordinate at or beyond the reference are ignored.
pub fn hypervolume3_raw(points: &[[f64; 3]], reference: [f64; 3]) -> f64 {
    let mut pts: Vec<[f64; 3]> = points
        .iter()
        .copied()
        .filter(|p| p.iter().zip(&reference).all(|(a, r)| a < r))
        .collect();
    if pts.is_empty() {
        return 0.0;
    }
    pts.sort_by(|a, b| a[2].total_cmp(&b[2]));
    let mut volume = 0.0;
    let mut slab: Vec<[f64; 2]> = Vec::with_capacity(pts.len());
    for (i, p) in pts.iter().enumerate() {
        slab.push([p[0], p[1]]);
        let top = pts.get(i + 1).map_or(reference[2], |q| q[2]);
        if top > p[2] {
            volume += area2(&mut slab, [reference[0], reference[1]]) * (top - p[2]);
        }
    }
    volume
}

fn area2(points: &mut [[f64; 2]], reference: [f64; 2]) -> f64 {
    points.sort_by(|a, b| a[0].total_cmp(&b[0]).then(a[1].total_cmp(&b[1])));
    let mut area = 0.0;
    let mut best_y = reference[1];
    for p in points.iter() {
        if p[1] < best_y {
            area += (reference[0] - p[0]) * (best_y - p[1]);
            best_y = p[1];
        }
    }
    area
}
