//! Incremental Bowyer–Watson triangulation in the plane.
//!
//! The convex hull is closed with ghost triangles that share a single vertex
//! at infinity, so no finite super-triangle is needed and hull triangles are
//! never lost. Orientation and in-circle tests use adaptive exact predicates.

use std::collections::{HashMap, HashSet};

use robust::{incircle, orient2d, Coord};

use crate::error::{Error, Result};

const GHOST: usize = usize::MAX;
const NONE: usize = usize::MAX;

#[derive(Debug, Clone)]
struct Tri {
    /// Counter-clockwise. A ghost stores its vertex at infinity in slot 2.
    v: [usize; 3],
    /// `n[i]` is the neighbour across edge `(v[i], v[i + 1])`.
    n: [usize; 3],
    alive: bool,
}

impl Tri {
    fn is_ghost(&self) -> bool {
        self.v[2] == GHOST
    }
}

struct Mesh<'a> {
    pts: &'a [[f64; 2]],
    tris: Vec<Tri>,
    last: usize,
}

fn coord(p: [f64; 2]) -> Coord<f64> {
    Coord { x: p[0], y: p[1] }
}

fn orient(a: [f64; 2], b: [f64; 2], c: [f64; 2]) -> f64 {
    orient2d(coord(a), coord(b), coord(c))
}

/// Triangulates distinct planar points. Returns counter-clockwise index
/// triples. Insertion follows input order, so equal input gives equal output.
pub(crate) fn triangulate(pts: &[[f64; 2]]) -> Result<Vec<[usize; 3]>> {
    if pts.len() < 3 {
        return Err(Error::InsufficientPoints { found: pts.len() });
    }
    let (a, b) = (0, 1);
    let c = (2..pts.len())
        .find(|&i| orient(pts[a], pts[b], pts[i]) != 0.0)
        .ok_or(Error::InsufficientPoints { found: pts.len() })?;
    let mut mesh = Mesh::seed(pts, a, b, c);
    for i in 0..pts.len() {
        if i != a && i != b && i != c {
            mesh.insert(i);
        }
    }
    Ok(mesh
        .tris
        .into_iter()
        .filter(|t| t.alive && !t.is_ghost())
        .map(|t| t.v)
        .collect())
}

impl<'a> Mesh<'a> {
    fn seed(pts: &'a [[f64; 2]], a: usize, b: usize, c: usize) -> Self {
        let (a, b, c) = if orient(pts[a], pts[b], pts[c]) > 0.0 {
            (a, b, c)
        } else {
            (a, c, b)
        };
        // 0: real (a,b,c); 1..=3: ghosts outside edges ab, bc, ca
        let tris = vec![
            Tri {
                v: [a, b, c],
                n: [1, 2, 3],
                alive: true,
            },
            Tri {
                v: [b, a, GHOST],
                n: [0, 3, 2],
                alive: true,
            },
            Tri {
                v: [c, b, GHOST],
                n: [0, 1, 3],
                alive: true,
            },
            Tri {
                v: [a, c, GHOST],
                n: [0, 2, 1],
                alive: true,
            },
        ];
        Mesh { pts, tris, last: 0 }
    }

    fn p(&self, i: usize) -> [f64; 2] {
        self.pts[i]
    }

    /// Whether `q` lies strictly inside the circumcircle of triangle `t`.
    /// For a ghost the "circle" is the open outer half-plane of its hull
    /// edge plus the open edge segment itself.
    fn in_conflict(&self, t: usize, q: usize) -> bool {
        let tri = &self.tris[t];
        let qp = self.p(q);
        if tri.is_ghost() {
            let (u, v) = (self.p(tri.v[0]), self.p(tri.v[1]));
            let o = orient(u, v, qp);
            if o > 0.0 {
                return true;
            }
            if o < 0.0 {
                return false;
            }
            let d = (qp[0] - u[0]) * (v[0] - u[0]) + (qp[1] - u[1]) * (v[1] - u[1]);
            let len2 = (v[0] - u[0]).powi(2) + (v[1] - u[1]).powi(2);
            d > 0.0 && d < len2
        } else {
            let [a, b, c] = tri.v;
            incircle(coord(self.p(a)), coord(self.p(b)), coord(self.p(c)), coord(qp)) > 0.0
        }
    }

    /// Visibility walk to a triangle in conflict with `q`.
    fn locate(&self, q: usize) -> usize {
        let qp = self.p(q);
        let mut t = self.last;
        if !self.tris[t].alive {
            t = self.tris.iter().position(|t| t.alive && !t.is_ghost()).unwrap_or(0);
        }
        if self.tris[t].is_ghost() {
            t = self.tris[t].n[0];
        }
        let limit = 4 * self.tris.len() + 16;
        'walk: for step in 0..limit {
            let tri = &self.tris[t];
            if tri.is_ghost() {
                return t;
            }
            for k in 0..3 {
                let e = (k + step) % 3;
                let (u, v) = (tri.v[e], tri.v[(e + 1) % 3]);
                if orient(self.p(u), self.p(v), qp) < 0.0 {
                    t = tri.n[e];
                    continue 'walk;
                }
            }
            return t;
        }
        // walks terminate on Delaunay meshes; scan as a last resort
        (0..self.tris.len())
            .find(|&i| self.tris[i].alive && self.in_conflict(i, q))
            .expect("some triangle always conflicts with a new distinct point")
    }

    fn insert(&mut self, q: usize) {
        let start = self.locate(q);
        debug_assert!(self.in_conflict(start, q));

        let mut cavity = vec![start];
        let mut in_cavity = HashSet::from([start]);
        let mut i = 0;
        while i < cavity.len() {
            let t = cavity[i];
            i += 1;
            for k in 0..3 {
                let nb = self.tris[t].n[k];
                if !in_cavity.contains(&nb) && self.in_conflict(nb, q) {
                    in_cavity.insert(nb);
                    cavity.push(nb);
                }
            }
        }

        // boundary edges (u, v) seen from inside the cavity, with the outside neighbour
        let mut boundary = Vec::new();
        for &t in &cavity {
            let tri = &self.tris[t];
            for k in 0..3 {
                let nb = tri.n[k];
                if !in_cavity.contains(&nb) {
                    boundary.push((tri.v[k], tri.v[(k + 1) % 3], nb));
                }
            }
        }
        for &t in &cavity {
            self.tris[t].alive = false;
        }

        let mut by_start: HashMap<usize, usize> = HashMap::with_capacity(boundary.len());
        let mut created = Vec::with_capacity(boundary.len());
        for &(u, v, outside) in &boundary {
            // keep the infinite vertex in slot 2 so ghosts stay recognisable
            let (verts, outer_slot) = if u == GHOST {
                ([v, q, GHOST], 2)
            } else if v == GHOST {
                ([q, u, GHOST], 1)
            } else {
                ([u, v, q], 0)
            };
            let id = self.tris.len();
            let mut n = [NONE; 3];
            n[outer_slot] = outside;
            self.tris.push(Tri {
                v: verts,
                n,
                alive: true,
            });
            let back = &mut self.tris[outside];
            for k in 0..3 {
                if back.v[k] == v && back.v[(k + 1) % 3] == u {
                    back.n[k] = id;
                }
            }
            by_start.insert(u, id);
            created.push((u, v, id));
        }
        // stitch new triangles to each other around q
        for &(_, v, id) in &created {
            let next = by_start[&v];
            let tri = &self.tris[id];
            let slot_a = (0..3)
                .find(|&k| tri.v[k] == v && tri.v[(k + 1) % 3] == q)
                .or_else(|| (0..3).find(|&k| tri.v[k] == q && tri.v[(k + 1) % 3] == v));
            let nt = &self.tris[next];
            let slot_b = (0..3)
                .find(|&k| nt.v[k] == q && nt.v[(k + 1) % 3] == v)
                .or_else(|| (0..3).find(|&k| nt.v[k] == v && nt.v[(k + 1) % 3] == q));
            if let (Some(a), Some(b)) = (slot_a, slot_b) {
                self.tris[id].n[a] = next;
                self.tris[next].n[b] = id;
            }
        }
        self.last = created
            .iter()
            .map(|&(_, _, id)| id)
            .find(|&id| !self.tris[id].is_ghost())
            .unwrap_or(created[0].2);
    }
}
