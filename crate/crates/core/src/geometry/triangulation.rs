//! Delaunay triangulation of directions in the equirectangular
//! (azimuth, elevation) plane, with rotated frames for queries that fall
//! outside the planar mesh.
//!
//! The plane is not periodic, so a query near the azimuth seam or near a
//! pole can land outside the hull. Such queries are retried in frames where
//! the sphere has been rotated: azimuth shifted by 180 degrees, the sphere
//! tilted 90 degrees over the interaural axis (poles moved onto the
//! horizon), and both. A frame's mesh is rebuilt from the rotated points the
//! first time it is needed and cached.

use std::collections::HashMap;
use std::sync::OnceLock;

use super::{angular_distance, delaunay, Direction};
use crate::error::{Error, Result};

/// Points closer than this are merged before triangulating.
pub const DUPLICATE_TOL_DEG: f64 = 0.01;

/// Slack for point-in-triangle tests.
pub const CONTAINMENT_SLACK: f64 = 1e-9;

/// A rotation of the sphere applied before projecting.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub struct Frame {
    pub rotated_azimuth: bool,
    pub rotated_elevation: bool,
}

impl Frame {
    pub const IDENTITY: Frame = Frame {
        rotated_azimuth: false,
        rotated_elevation: false,
    };

    /// Fallback order: azimuth shift, elevation tilt, both.
    pub const ALL: [Frame; 4] = [
        Frame::IDENTITY,
        Frame {
            rotated_azimuth: true,
            rotated_elevation: false,
        },
        Frame {
            rotated_azimuth: false,
            rotated_elevation: true,
        },
        Frame {
            rotated_azimuth: true,
            rotated_elevation: true,
        },
    ];

    fn slot(self) -> usize {
        self.rotated_azimuth as usize + 2 * self.rotated_elevation as usize
    }

    /// Rotates `d` into this frame.
    pub fn rotate(self, d: Direction) -> Direction {
        let mut d = d;
        if self.rotated_elevation {
            // 90 degree turn about the y axis: (x, y, z) -> (-z, y, x)
            let c = d.to_cartesian();
            d = Direction::from_cartesian(-c.z, c.y, c.x).expect("unit vector");
        }
        if self.rotated_azimuth {
            d = Direction::new(d.azimuth() + 180.0, d.elevation()).expect("finite");
        }
        d
    }

    /// Plane coordinates `[azimuth, elevation]` of `d` in this frame. Poles
    /// project to azimuth 0.
    pub fn project(self, d: Direction) -> [f64; 2] {
        let r = self.rotate(d).canonical();
        [r.azimuth(), r.elevation()]
    }
}

/// The planar mesh for one frame.
#[derive(Debug, Clone)]
pub struct FrameMesh {
    frame: Frame,
    /// Projected coordinates, one per vertex of the parent triangulation.
    points: Vec<[f64; 2]>,
    /// Counter-clockwise triples of vertex indices.
    triangles: Vec<[usize; 3]>,
}

impl FrameMesh {
    pub fn frame(&self) -> Frame {
        self.frame
    }

    pub fn points(&self) -> &[[f64; 2]] {
        &self.points
    }

    pub fn triangles(&self) -> &[[usize; 3]] {
        &self.triangles
    }

    /// Barycentric coordinates of `q` in triangle `t`.
    pub fn barycentric(&self, t: usize, q: [f64; 2]) -> [f64; 3] {
        let [a, b, c] = self.triangles[t].map(|i| self.points[i]);
        barycentric(a, b, c, q)
    }

    fn locate(&self, q: [f64; 2]) -> Option<(usize, [f64; 3])> {
        (0..self.triangles.len()).find_map(|t| {
            let w = self.barycentric(t, q);
            w.iter().all(|&x| x >= -CONTAINMENT_SLACK).then_some((t, w))
        })
    }
}

pub(crate) fn barycentric(a: [f64; 2], b: [f64; 2], c: [f64; 2], q: [f64; 2]) -> [f64; 3] {
    let area = |p: [f64; 2], r: [f64; 2], s: [f64; 2]| {
        (r[0] - p[0]) * (s[1] - p[1]) - (r[1] - p[1]) * (s[0] - p[0])
    };
    let total = area(a, b, c);
    [
        area(q, b, c) / total,
        area(a, q, c) / total,
        area(a, b, q) / total,
    ]
}

/// Delaunay triangulation of a set of directions.
#[derive(Debug, Clone)]
pub struct Triangulation {
    vertices: Vec<Direction>,
    /// (dropped vertex, vertex it was merged into)
    merged: Vec<(usize, usize)>,
    frames: [OnceLock<Option<FrameMesh>>; 4],
}

impl Triangulation {
    /// Triangulates `points` in the identity frame.
    ///
    /// Points within 0.01 degrees of an earlier point are merged into it and
    /// take no part in any triangle. All pole points count as one direction.
    pub fn build(points: &[Direction]) -> Result<Self> {
        let merged = find_duplicates(points);
        for &(dup, kept) in &merged {
            log::warn!(
                "merging duplicate direction #{dup} {} into #{kept} {}",
                points[dup],
                points[kept]
            );
        }
        let t = Triangulation {
            vertices: points.to_vec(),
            merged,
            frames: Default::default(),
        };
        let mesh = t.mesh_for(Frame::IDENTITY)?;
        t.frames[0]
            .set(Some(mesh))
            .expect("fresh triangulation has no identity mesh yet");
        Ok(t)
    }

    pub fn vertices(&self) -> &[Direction] {
        &self.vertices
    }

    pub fn merged(&self) -> &[(usize, usize)] {
        &self.merged
    }

    /// Triangles of the identity frame.
    pub fn triangles(&self) -> &[[usize; 3]] {
        self.identity().triangles()
    }

    pub fn identity(&self) -> &FrameMesh {
        self.frames[0]
            .get()
            .and_then(Option::as_ref)
            .expect("identity mesh is built eagerly")
    }

    /// The mesh for `frame`, built on first use. `None` when the rotated
    /// points are degenerate in that projection.
    pub fn frame_mesh(&self, frame: Frame) -> Option<&FrameMesh> {
        self.frames[frame.slot()]
            .get_or_init(|| match self.mesh_for(frame) {
                Ok(m) => Some(m),
                Err(e) => {
                    log::warn!("no mesh in frame {frame:?}: {e}");
                    None
                }
            })
            .as_ref()
    }

    fn mesh_for(&self, frame: Frame) -> Result<FrameMesh> {
        let dropped: Vec<bool> = {
            let mut v = vec![false; self.vertices.len()];
            for &(d, _) in &self.merged {
                v[d] = true;
            }
            v
        };
        let points: Vec<[f64; 2]> = self.vertices.iter().map(|&d| frame.project(d)).collect();
        let kept: Vec<usize> = (0..points.len()).filter(|&i| !dropped[i]).collect();
        let kept_pts: Vec<[f64; 2]> = kept.iter().map(|&i| points[i]).collect();
        let triangles = delaunay::triangulate(&kept_pts)?
            .into_iter()
            .map(|t| t.map(|i| kept[i]))
            .collect();
        Ok(FrameMesh {
            frame,
            points,
            triangles,
        })
    }
}

/// Pairs `(later, earlier)` of points closer than [`DUPLICATE_TOL_DEG`].
pub(crate) fn find_duplicates(points: &[Direction]) -> Vec<(usize, usize)> {
    let bucket = |d: &Direction| (d.elevation() / DUPLICATE_TOL_DEG).floor() as i64;
    let mut buckets: HashMap<i64, Vec<usize>> = HashMap::new();
    let mut merged = Vec::new();
    for (i, d) in points.iter().enumerate() {
        let b = bucket(d);
        let hit = (b - 1..=b + 1)
            .filter_map(|k| buckets.get(&k))
            .flatten()
            .copied()
            .filter(|&j| angular_distance(*d, points[j]) < DUPLICATE_TOL_DEG)
            .min();
        match hit {
            Some(j) => merged.push((i, j)),
            None => buckets.entry(b).or_default().push(i),
        }
    }
    merged
}

/// The triangle that contains a query, and the frame it was found in.
#[derive(Debug, Clone, PartialEq)]
pub struct EnclosingTriangle {
    pub vertex_indices: [usize; 3],
    pub rotated_azimuth: bool,
    pub rotated_elevation: bool,
    /// Barycentric coordinates of the query in the frame used.
    pub barycentric: [f64; 3],
}

impl EnclosingTriangle {
    pub fn frame(&self) -> Frame {
        Frame {
            rotated_azimuth: self.rotated_azimuth,
            rotated_elevation: self.rotated_elevation,
        }
    }
}

pub fn build_triangulation(points: &[Direction]) -> Result<Triangulation> {
    Triangulation::build(points)
}

/// Finds a triangle containing `query`, trying the identity frame first and
/// then each rotated frame in turn.
pub fn find_enclosing_triangle(t: &Triangulation, query: Direction) -> Result<EnclosingTriangle> {
    for frame in Frame::ALL {
        let Some(mesh) = t.frame_mesh(frame) else {
            continue;
        };
        if let Some((tri, w)) = mesh.locate(frame.project(query)) {
            return Ok(EnclosingTriangle {
                vertex_indices: mesh.triangles[tri],
                rotated_azimuth: frame.rotated_azimuth,
                rotated_elevation: frame.rotated_elevation,
                barycentric: w,
            });
        }
    }
    Err(Error::NoEnclosingTriangle {
        azimuth: query.azimuth(),
        elevation: query.elevation(),
    })
}
