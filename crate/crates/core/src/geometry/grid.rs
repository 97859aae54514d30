use std::sync::OnceLock;

use super::{angle_between, Direction, Triangulation, UnitVector, POLE_EPS_DEG};
use crate::error::{Error, Result};

/// Points within this many degrees of elevation share a ring; the same
/// tolerance in azimuth defines a column.
pub const PLANE_TOL_DEG: f64 = 0.01;

/// Points of one constant-elevation ring, ordered by azimuth.
#[derive(Debug, Clone)]
pub struct Ring {
    pub elevation: f64,
    pub members: Vec<usize>,
}

/// Points of one constant-azimuth column, ordered by elevation. Pole points
/// belong to every column.
#[derive(Debug, Clone)]
pub struct Column {
    pub azimuth: f64,
    pub members: Vec<usize>,
}

const NEAREST_TIE_DEG: f64 = 1e-12;

/// A fixed list of directions with lazily built lookup structures.
#[derive(Debug, Clone)]
pub struct DirectionGrid {
    directions: Vec<Direction>,
    vectors: Vec<UnitVector>,
    rings: OnceLock<Vec<Ring>>,
    columns: OnceLock<Vec<Column>>,
    triangulation: OnceLock<std::result::Result<Triangulation, usize>>,
}

impl DirectionGrid {
    pub fn new(directions: Vec<Direction>) -> Self {
        let vectors = directions.iter().map(Direction::to_cartesian).collect();
        DirectionGrid {
            directions,
            vectors,
            rings: OnceLock::new(),
            columns: OnceLock::new(),
            triangulation: OnceLock::new(),
        }
    }

    pub fn len(&self) -> usize {
        self.directions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.directions.is_empty()
    }

    pub fn directions(&self) -> &[Direction] {
        &self.directions
    }

    pub fn direction(&self, i: usize) -> Direction {
        self.directions[i]
    }

    pub fn vector(&self, i: usize) -> &UnitVector {
        &self.vectors[i]
    }

    /// Index of the closest point by great-circle angle and that angle in
    /// degrees. Distances within 1e-12 degrees tie and go to the lowest index.
    pub fn nearest(&self, d: Direction) -> (usize, f64) {
        let q = d.to_cartesian();
        let mut best = (0, f64::INFINITY);
        for (i, v) in self.vectors.iter().enumerate() {
            let a = angle_between(&q, v);
            if a < best.1 - NEAREST_TIE_DEG {
                best = (i, a);
            }
        }
        best
    }

    pub fn triangulation(&self) -> Result<&Triangulation> {
        self.triangulation
            .get_or_init(|| {
                Triangulation::build(&self.directions).map_err(|e| match e {
                    Error::InsufficientPoints { found } => found,
                    _ => self.directions.len(),
                })
            })
            .as_ref()
            .map_err(|&found| Error::InsufficientPoints { found })
    }

    pub fn rings(&self) -> &[Ring] {
        self.rings.get_or_init(|| build_rings(&self.directions))
    }

    pub fn columns(&self) -> &[Column] {
        self.columns.get_or_init(|| build_columns(&self.directions))
    }

    /// The ring closest in elevation to `elevation` that has at least two
    /// members.
    pub fn nearest_ring(&self, elevation: f64) -> Option<&Ring> {
        self.rings()
            .iter()
            .filter(|r| r.members.len() >= 2)
            .fold(None, |best: Option<&Ring>, r| match best {
                Some(b) if (b.elevation - elevation).abs() <= (r.elevation - elevation).abs() => Some(b),
                _ => Some(r),
            })
    }

    /// The column closest in azimuth (around the circle) with at least two
    /// members.
    pub fn nearest_column(&self, azimuth: f64) -> Option<&Column> {
        self.columns()
            .iter()
            .filter(|c| c.members.len() >= 2)
            .fold(None, |best: Option<&Column>, c| match best {
                Some(b) if azimuth_gap(b.azimuth, azimuth) <= azimuth_gap(c.azimuth, azimuth) => Some(b),
                _ => Some(c),
            })
    }
}

/// Absolute azimuth difference around the circle, in `[0, 180]`.
pub fn azimuth_gap(a: f64, b: f64) -> f64 {
    let d = (a - b).rem_euclid(360.0);
    d.min(360.0 - d)
}

fn build_rings(dirs: &[Direction]) -> Vec<Ring> {
    let mut order: Vec<usize> = (0..dirs.len()).collect();
    order.sort_by(|&a, &b| dirs[a].elevation().total_cmp(&dirs[b].elevation()).then(a.cmp(&b)));
    let mut rings: Vec<Ring> = Vec::new();
    for i in order {
        let el = dirs[i].elevation();
        match rings.last_mut() {
            Some(r) if el - r.elevation <= PLANE_TOL_DEG => r.members.push(i),
            _ => rings.push(Ring {
                elevation: el,
                members: vec![i],
            }),
        }
    }
    for r in &mut rings {
        r.members
            .sort_by(|&a, &b| dirs[a].azimuth().total_cmp(&dirs[b].azimuth()).then(a.cmp(&b)));
    }
    rings
}

fn build_columns(dirs: &[Direction]) -> Vec<Column> {
    let is_pole = |d: &Direction| d.elevation().abs() >= 90.0 - POLE_EPS_DEG;
    let poles: Vec<usize> = (0..dirs.len()).filter(|&i| is_pole(&dirs[i])).collect();
    let mut order: Vec<usize> = (0..dirs.len()).filter(|&i| !is_pole(&dirs[i])).collect();
    order.sort_by(|&a, &b| dirs[a].azimuth().total_cmp(&dirs[b].azimuth()).then(a.cmp(&b)));
    let mut cols: Vec<Column> = Vec::new();
    for i in order {
        let az = dirs[i].azimuth();
        match cols.last_mut() {
            Some(c) if az - c.azimuth <= PLANE_TOL_DEG => c.members.push(i),
            _ => cols.push(Column {
                azimuth: az,
                members: vec![i],
            }),
        }
    }
    // join a column straddling the 0/360 seam
    if cols.len() > 1 {
        let first_az = cols[0].azimuth;
        let last = cols.last().unwrap();
        if last.members.iter().all(|&i| first_az + 360.0 - dirs[i].azimuth() <= PLANE_TOL_DEG) {
            let last = cols.pop().unwrap();
            cols[0].members.extend(last.members);
        }
    }
    for c in &mut cols {
        c.members.extend(&poles);
        c.members
            .sort_by(|&a, &b| dirs[a].elevation().total_cmp(&dirs[b].elevation()).then(a.cmp(&b)));
    }
    if cols.is_empty() && !poles.is_empty() {
        cols.push(Column {
            azimuth: 0.0,
            members: poles,
        });
    }
    cols
}
