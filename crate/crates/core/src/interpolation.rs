//! Resolving a requested direction to weighted stored points.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::geometry::{
    angular_distance, find_enclosing_triangle, Direction, DirectionGrid, UnitVector,
};
use crate::ir_store::{IrPoint, IrSet};

/// Distances below this many degrees count as coincident.
pub const COINCIDENT_DEG: f64 = 1e-9;
pub const DEFAULT_SNAP_DEG: f64 = 2.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum InterpolationMode {
    Nearest,
    TwoPoint,
    Planar,
    ThreePoint,
    Auto,
}

impl InterpolationMode {
    /// The concrete modes in tie-break order.
    pub const CONCRETE: [InterpolationMode; 4] = [
        InterpolationMode::Nearest,
        InterpolationMode::TwoPoint,
        InterpolationMode::Planar,
        InterpolationMode::ThreePoint,
    ];
    pub const NAMES: [&'static str; 5] = ["nearest", "planar", "two_point", "three_point", "auto"];

    pub fn as_str(self) -> &'static str {
        match self {
            InterpolationMode::Nearest => "nearest",
            InterpolationMode::TwoPoint => "two_point",
            InterpolationMode::Planar => "planar",
            InterpolationMode::ThreePoint => "three_point",
            InterpolationMode::Auto => "auto",
        }
    }
}

impl fmt::Display for InterpolationMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for InterpolationMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "nearest" => Ok(InterpolationMode::Nearest),
            "planar" => Ok(InterpolationMode::Planar),
            "two_point" => Ok(InterpolationMode::TwoPoint),
            "three_point" => Ok(InterpolationMode::ThreePoint),
            "auto" => Ok(InterpolationMode::Auto),
            _ => Err(Error::InvalidArgument(format!(
                "unknown interpolation mode {s:?}; expected one of {}",
                Self::NAMES.join(", ")
            ))),
        }
    }
}

/// How weights are derived from the chosen points.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum WeightLaw {
    /// Normalized reciprocal chord distance.
    #[default]
    InverseDistance,
    /// Linear coordinates: barycentric in the enclosing triangle, or the
    /// fractional position along a bracketing pair.
    Barycentric,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PlanOptions {
    pub snap_threshold_deg: f64,
    pub weight_law: WeightLaw,
}

impl Default for PlanOptions {
    fn default() -> Self {
        PlanOptions {
            snap_threshold_deg: DEFAULT_SNAP_DEG,
            weight_law: WeightLaw::InverseDistance,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct InterpolationPlan {
    /// Never [`InterpolationMode::Auto`].
    pub mode_used: InterpolationMode,
    pub entries: Vec<(usize, f64)>,
    pub achieved_direction: Direction,
    pub achieved_error_deg: f64,
    pub warnings: Vec<String>,
}

impl InterpolationPlan {
    pub fn weight_sum(&self) -> f64 {
        self.entries.iter().map(|e| e.1).sum()
    }
}

/// Plans a requested direction against the points of an IR set.
pub fn plan(set: &IrSet, requested: Direction, mode: InterpolationMode, options: &PlanOptions) -> Result<InterpolationPlan> {
    plan_on_grid(set.grid(), requested, mode, options)
}

/// Same as [`plan`] for any direction grid, such as speaker positions.
pub fn plan_on_grid(
    grid: &DirectionGrid,
    requested: Direction,
    mode: InterpolationMode,
    options: &PlanOptions,
) -> Result<InterpolationPlan> {
    if grid.is_empty() {
        return Err(Error::InsufficientPoints { found: 0 });
    }
    if options.snap_threshold_deg.is_nan() || options.snap_threshold_deg < 0.0 {
        return Err(Error::InvalidArgument(format!(
            "snap threshold must be non-negative, got {}",
            options.snap_threshold_deg
        )));
    }
    let (idx, dist) = grid.nearest(requested);
    if dist <= options.snap_threshold_deg {
        return finish(grid, requested, InterpolationMode::Nearest, vec![(idx, 1.0)], Vec::new());
    }
    match mode {
        InterpolationMode::Auto => plan_auto(grid, requested, options),
        m => plan_concrete(grid, requested, m, options),
    }
}

fn plan_auto(grid: &DirectionGrid, requested: Direction, options: &PlanOptions) -> Result<InterpolationPlan> {
    let mut best: Option<InterpolationPlan> = None;
    let mut last_err = None;
    for m in InterpolationMode::CONCRETE {
        let candidate = match plan_concrete(grid, requested, m, options) {
            Ok(p) => p,
            Err(e) => {
                last_err = Some(e);
                continue;
            }
        };
        let better = match &best {
            None => true,
            Some(b) => {
                candidate.achieved_error_deg < b.achieved_error_deg
                    || (candidate.achieved_error_deg == b.achieved_error_deg
                        && candidate.entries.len() < b.entries.len())
            }
        };
        if better {
            best = Some(candidate);
        }
    }
    best.ok_or_else(|| last_err.expect("nearest never fails on a non-empty grid"))
}

fn plan_concrete(
    grid: &DirectionGrid,
    requested: Direction,
    mode: InterpolationMode,
    options: &PlanOptions,
) -> Result<InterpolationPlan> {
    let law = options.weight_law;
    let pair = match mode {
        InterpolationMode::Nearest => {
            let (idx, _) = grid.nearest(requested);
            return finish(grid, requested, mode, vec![(idx, 1.0)], Vec::new());
        }
        InterpolationMode::ThreePoint => return three_point(grid, requested, law, Vec::new()),
        InterpolationMode::Planar => ring_pair(grid, requested, law),
        InterpolationMode::TwoPoint => {
            let ring = ring_pair(grid, requested, law);
            let column = column_pair(grid, requested, law);
            let score = |p: &Option<Vec<(usize, f64)>>| {
                p.as_ref()
                    .and_then(|e| centroid(grid, e))
                    .map(|d| angular_distance(requested, d))
            };
            match (score(&ring), score(&column)) {
                (Some(r), Some(c)) => if c < r { column } else { ring },
                (Some(_), None) => ring,
                (None, Some(_)) => column,
                (None, None) => None,
            }
        }
        InterpolationMode::Auto => unreachable!("auto is resolved by the caller"),
    };
    match pair.filter(|e| centroid(grid, e).is_some()) {
        Some(entries) => finish(grid, requested, mode, entries, Vec::new()),
        None => {
            let warning = format!("{mode} has no usable point pair near {requested}; using three_point");
            log::warn!("{warning}");
            three_point(grid, requested, law, vec![warning])
        }
    }
}

fn three_point(grid: &DirectionGrid, requested: Direction, law: WeightLaw, mut warnings: Vec<String>) -> Result<InterpolationPlan> {
    let triangulation = match grid.triangulation() {
        Ok(t) => t,
        Err(e) => {
            // a single ring (such as a horizontal speaker layout) has no
            // triangles; its bracketing pair is the natural stand-in
            let pair = ring_pair(grid, requested, law).filter(|p| centroid(grid, p).is_some());
            let Some(entries) = pair else { return Err(e) };
            let warning = format!("three_point has no triangulation ({e}); using planar");
            log::warn!("{warning}");
            warnings.push(warning);
            return finish(grid, requested, InterpolationMode::Planar, entries, warnings);
        }
    };
    let tri = find_enclosing_triangle(triangulation, requested)?;
    let idx = tri.vertex_indices;
    let weights = match law {
        WeightLaw::InverseDistance => inverse_distance(grid, requested, &idx),
        WeightLaw::Barycentric => {
            let w = tri.barycentric.map(|w| w.max(0.0));
            let sum: f64 = w.iter().sum();
            idx.iter().zip(w).map(|(&i, w)| (i, w / sum)).collect()
        }
    };
    finish(grid, requested, InterpolationMode::ThreePoint, weights, warnings)
}

/// The two ring members bracketing the requested azimuth on the ring
/// nearest in elevation.
fn ring_pair(grid: &DirectionGrid, requested: Direction, law: WeightLaw) -> Option<Vec<(usize, f64)>> {
    let ring = grid.nearest_ring(requested.elevation())?;
    let m = &ring.members;
    let az = requested.azimuth();
    // members are sorted by azimuth; lower is the last one at or before az
    let k = m.iter().rposition(|&i| grid.direction(i).azimuth() <= az).unwrap_or(m.len() - 1);
    let (lo, hi) = (m[k], m[(k + 1) % m.len()]);
    Some(match law {
        WeightLaw::InverseDistance => inverse_distance(grid, requested, &[lo, hi]),
        WeightLaw::Barycentric => {
            let span = (grid.direction(hi).azimuth() - grid.direction(lo).azimuth()).rem_euclid(360.0);
            let span = if span == 0.0 { 360.0 } else { span };
            let t = (az - grid.direction(lo).azimuth()).rem_euclid(360.0) / span;
            linear_pair(lo, hi, t)
        }
    })
}

/// The two column members bracketing the requested elevation on the
/// column nearest in azimuth. Outside the column's span the two closest
/// members are used.
fn column_pair(grid: &DirectionGrid, requested: Direction, law: WeightLaw) -> Option<Vec<(usize, f64)>> {
    let col = grid.nearest_column(requested.azimuth())?;
    let m = &col.members;
    let el = requested.elevation();
    let k = m
        .iter()
        .rposition(|&i| grid.direction(i).elevation() <= el)
        .unwrap_or(0)
        .min(m.len() - 2);
    let (lo, hi) = (m[k], m[k + 1]);
    Some(match law {
        WeightLaw::InverseDistance => inverse_distance(grid, requested, &[lo, hi]),
        WeightLaw::Barycentric => {
            let (a, b) = (grid.direction(lo).elevation(), grid.direction(hi).elevation());
            let t = if b > a { ((el - a) / (b - a)).clamp(0.0, 1.0) } else { 0.5 };
            linear_pair(lo, hi, t)
        }
    })
}

fn linear_pair(lo: usize, hi: usize, t: f64) -> Vec<(usize, f64)> {
    vec![(lo, 1.0 - t), (hi, t)]
}

/// Normalized `1 / chord` weights; a coincident point takes all the weight.
fn inverse_distance(grid: &DirectionGrid, requested: Direction, idx: &[usize]) -> Vec<(usize, f64)> {
    let q = requested.to_cartesian();
    if let Some(&i) = idx
        .iter()
        .find(|&&i| angular_distance(requested, grid.direction(i)) < COINCIDENT_DEG)
    {
        return vec![(i, 1.0)];
    }
    let inv: Vec<f64> = idx.iter().map(|&i| 1.0 / q.chord(grid.vector(i))).collect();
    let sum: f64 = inv.iter().sum();
    idx.iter().zip(inv).map(|(&i, w)| (i, w / sum)).collect()
}

/// Weighted mean of the entries' unit vectors projected back onto the
/// sphere; `None` when the mean vanishes.
fn centroid(grid: &DirectionGrid, entries: &[(usize, f64)]) -> Option<Direction> {
    let mut s = [0.0; 3];
    for &(i, w) in entries {
        let UnitVector { x, y, z } = *grid.vector(i);
        s[0] += w * x;
        s[1] += w * y;
        s[2] += w * z;
    }
    let norm = (s[0] * s[0] + s[1] * s[1] + s[2] * s[2]).sqrt();
    if norm < 1e-12 {
        return None;
    }
    Direction::from_cartesian(s[0], s[1], s[2]).ok()
}

fn finish(
    grid: &DirectionGrid,
    requested: Direction,
    mode_used: InterpolationMode,
    mut entries: Vec<(usize, f64)>,
    warnings: Vec<String>,
) -> Result<InterpolationPlan> {
    entries.retain(|e| e.1 > 0.0);
    if entries.is_empty() {
        return Err(Error::InvalidArgument(format!("{mode_used} produced no weights for {requested}")));
    }
    let achieved_direction = if entries.len() == 1 {
        grid.direction(entries[0].0)
    } else {
        centroid(grid, &entries).ok_or_else(|| {
            Error::InvalidArgument(format!("{mode_used} points around {requested} cancel out"))
        })?
    };
    Ok(InterpolationPlan {
        mode_used,
        entries,
        achieved_error_deg: angular_distance(requested, achieved_direction),
        achieved_direction,
        warnings,
    })
}

/// Weighted sample-wise sum of the planned IR pairs.
pub fn blend(set: &IrSet, plan: &InterpolationPlan) -> Result<IrPoint> {
    if let Some(&(bad, _)) = plan.entries.iter().find(|e| e.0 >= set.len()) {
        return Err(Error::InvalidArgument(format!(
            "plan refers to point {bad} but the set has {} points",
            set.len()
        )));
    }
    if let [(i, w)] = plan.entries[..] {
        if w == 1.0 {
            let p = set.point(i);
            return IrPoint::new(plan.achieved_direction, p.left.clone(), p.right.clone());
        }
    }
    let n = set.ir_len();
    let (mut left, mut right) = (vec![0.0; n], vec![0.0; n]);
    for &(i, w) in &plan.entries {
        let p = set.point(i);
        for k in 0..n {
            left[k] += w * p.left[k];
            right[k] += w * p.right[k];
        }
    }
    IrPoint::new(plan.achieved_direction, left, right)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::lebedev::lebedev50;
    use crate::ir_store::{synthesize_ir_set, Distribution};

    fn dir(az: f64, el: f64) -> Direction {
        Direction::new(az, el).unwrap()
    }

    fn opts() -> PlanOptions {
        PlanOptions::default()
    }

    #[test]
    fn mode_names() {
        for name in InterpolationMode::NAMES {
            assert_eq!(name.parse::<InterpolationMode>().unwrap().as_str(), name);
        }
        assert_eq!("Three_Point".parse::<InterpolationMode>().unwrap(), InterpolationMode::ThreePoint);
        assert!("threepoint".parse::<InterpolationMode>().is_err());
    }

    #[test]
    fn stored_point_is_exact_in_every_mode() {
        let g = DirectionGrid::new(lebedev50());
        for m in InterpolationMode::NAMES.map(|n| n.parse().unwrap()) {
            for snap in [0.0, 2.0] {
                let o = PlanOptions { snap_threshold_deg: snap, ..opts() };
                let p = plan_on_grid(&g, g.direction(7), m, &o).unwrap();
                assert_eq!(p.entries, vec![(7, 1.0)]);
                assert_eq!(p.achieved_error_deg, 0.0);
            }
        }
    }

    #[test]
    fn within_two_degrees_snaps() {
        let g = DirectionGrid::new(lebedev50());
        let p = plan_on_grid(&g, dir(1.5, 0.0), InterpolationMode::ThreePoint, &opts()).unwrap();
        assert_eq!(p.mode_used, InterpolationMode::Nearest);
        assert_eq!(p.entries, vec![(0, 1.0)]);
    }

    #[test]
    fn ring_midpoint_is_split_evenly() {
        let g = DirectionGrid::new((0..8).map(|k| dir(k as f64 * 45.0, 0.0)).chain([dir(0.0, 60.0)]).collect());
        let p = plan_on_grid(&g, dir(22.5, 0.0), InterpolationMode::TwoPoint, &opts()).unwrap();
        assert_eq!(p.entries.len(), 2);
        // oracle: both chords equal by symmetry
        let q = dir(22.5, 0.0).to_cartesian();
        let (a, b) = (q.chord(g.vector(0)), q.chord(g.vector(1)));
        let wa = (1.0 / a) / (1.0 / a + 1.0 / b);
        assert!((p.entries[0].1 - wa).abs() < 1e-9 && (p.entries[0].1 - 0.5).abs() < 1e-9);
        assert!(p.achieved_error_deg < 1e-9);
    }

    #[test]
    fn planar_wraps_across_the_seam() {
        let g = DirectionGrid::new((0..8).map(|k| dir(k as f64 * 45.0, 10.0)).collect());
        let p = plan_on_grid(&g, dir(340.0, 0.0), InterpolationMode::Planar, &opts()).unwrap();
        let mut idx: Vec<usize> = p.entries.iter().map(|e| e.0).collect();
        idx.sort();
        assert_eq!(idx, vec![0, 7]);
    }

    #[test]
    fn two_point_uses_the_column_when_it_is_closer() {
        let g = DirectionGrid::new(vec![
            dir(0.0, -40.0), dir(0.0, 40.0), dir(120.0, 0.0), dir(240.0, 0.0), dir(0.0, 90.0),
        ]);
        let p = plan_on_grid(&g, dir(0.0, 10.0), InterpolationMode::TwoPoint, &opts()).unwrap();
        let mut idx: Vec<usize> = p.entries.iter().map(|e| e.0).collect();
        idx.sort();
        assert_eq!(idx, vec![0, 1]);
    }

    #[test]
    fn degenerate_pair_falls_back_to_three_point() {
        // the only ring holds two antipodal points
        let g = DirectionGrid::new(vec![dir(0.0, 0.0), dir(180.0, 0.0), dir(90.0, 50.0), dir(270.0, -50.0)]);
        let p = plan_on_grid(&g, dir(90.0, 0.0), InterpolationMode::Planar, &opts()).unwrap();
        assert_eq!(p.mode_used, InterpolationMode::ThreePoint);
        assert_eq!(p.warnings.len(), 1);
    }

    #[test]
    fn flat_ring_three_point_uses_planar() {
        let g = DirectionGrid::new((0..6).map(|k| dir(k as f64 * 60.0, 0.0)).collect());
        let p = plan_on_grid(&g, dir(30.0, 10.0), InterpolationMode::ThreePoint, &opts()).unwrap();
        assert_eq!(p.mode_used, InterpolationMode::Planar);
        assert_eq!(p.entries.len(), 2);
        assert_eq!(p.warnings.len(), 1);
    }

    #[test]
    fn auto_is_never_worse() {
        let g = DirectionGrid::new(lebedev50());
        for k in 0..200 {
            let d = dir(k as f64 * 37.3, (k as f64 * 13.7) % 180.0 - 90.0);
            let a = plan_on_grid(&g, d, InterpolationMode::Auto, &opts()).unwrap();
            assert_ne!(a.mode_used, InterpolationMode::Auto);
            for m in InterpolationMode::CONCRETE {
                let p = plan_on_grid(&g, d, m, &opts()).unwrap();
                assert!(a.achieved_error_deg <= p.achieved_error_deg);
            }
        }
    }

    #[test]
    fn barycentric_law_sums_to_one() {
        let g = DirectionGrid::new(lebedev50());
        let o = PlanOptions { weight_law: WeightLaw::Barycentric, ..opts() };
        for m in InterpolationMode::CONCRETE {
            let p = plan_on_grid(&g, dir(20.0, 20.0), m, &o).unwrap();
            assert!((p.weight_sum() - 1.0).abs() < 1e-9);
            assert!(p.entries.iter().all(|e| (0.0..=1.0).contains(&e.1)));
        }
    }

    #[test]
    fn blend_matches_naive_sum() {
        let set = synthesize_ir_set(&Distribution::Lebedev50, 48000, 64, 3).unwrap();
        let single = plan(&set, set.point(4).direction, InterpolationMode::Nearest, &opts()).unwrap();
        let b = blend(&set, &single).unwrap();
        assert_eq!((b.left.as_slice(), b.right.as_slice()), (set.point(4).left.as_slice(), set.point(4).right.as_slice()));

        let p = plan(&set, dir(20.0, 20.0), InterpolationMode::ThreePoint, &opts()).unwrap();
        assert_eq!(p.entries.len(), 3);
        let b = blend(&set, &p).unwrap();
        for k in 0..set.ir_len() {
            let mut l = 0.0;
            for &(i, w) in &p.entries {
                l += w * set.point(i).left[k];
            }
            assert!((b.left[k] - l).abs() < 1e-12);
        }
        assert_eq!(b.direction, p.achieved_direction);

        let bad = InterpolationPlan { entries: vec![(99, 1.0)], ..p };
        assert!(blend(&set, &bad).is_err());
    }
}
