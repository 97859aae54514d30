//! The 50-point Lebedev grid (degree 11), used by sparse BRIR measurements.

use super::Direction;

// l = 3 / sqrt(11), m = sqrt(1 - 2 l^2)
const B_L: f64 = 0.301_511_344_577_763_6;
const B_M: f64 = 0.904_534_033_733_290_9;

/// Cartesian nodes in a fixed order: octahedron vertices, edge midpoints,
/// cube vertices, then the 24 `(l, l, m)` nodes.
pub fn lebedev50_cartesian() -> Vec<[f64; 3]> {
    let mut pts = Vec::with_capacity(50);
    for axis in 0..3 {
        for s in [1.0, -1.0] {
            let mut p = [0.0; 3];
            p[axis] = s;
            pts.push(p);
        }
    }
    let h = std::f64::consts::FRAC_1_SQRT_2;
    for (i, j) in [(0, 1), (0, 2), (1, 2)] {
        for si in [1.0, -1.0] {
            for sj in [1.0, -1.0] {
                let mut p = [0.0; 3];
                p[i] = si * h;
                p[j] = sj * h;
                pts.push(p);
            }
        }
    }
    let c = 1.0 / 3f64.sqrt();
    for sx in [1.0, -1.0] {
        for sy in [1.0, -1.0] {
            for sz in [1.0, -1.0] {
                pts.push([sx * c, sy * c, sz * c]);
            }
        }
    }
    for big in 0..3 {
        for s0 in [1.0, -1.0] {
            for s1 in [1.0, -1.0] {
                for s2 in [1.0, -1.0] {
                    let signs = [s0, s1, s2];
                    let mut p = [0.0; 3];
                    for k in 0..3 {
                        p[k] = signs[k] * if k == big { B_M } else { B_L };
                    }
                    pts.push(p);
                }
            }
        }
    }
    pts
}

pub fn lebedev50() -> Vec<Direction> {
    lebedev50_cartesian()
        .into_iter()
        .map(|[x, y, z]| {
            let d = Direction::from_cartesian(x, y, z).expect("unit node");
            snap_exact(d)
        })
        .collect()
}

/// Removes trigonometric round-off so symmetric nodes share exact ring
/// elevations and column azimuths.
fn snap_exact(d: Direction) -> Direction {
    let round = |v: f64| {
        let r = (v * 1e9).round() / 1e9;
        if r == -0.0 {
            0.0
        } else {
            r
        }
    };
    Direction::new(round(d.azimuth()), round(d.elevation())).expect("finite")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fifty_unit_nodes() {
        let pts = lebedev50_cartesian();
        assert_eq!(pts.len(), 50);
        for p in &pts {
            let n = p[0] * p[0] + p[1] * p[1] + p[2] * p[2];
            assert!((n - 1.0).abs() < 1e-12);
        }
        assert!((B_M * B_M + 2.0 * B_L * B_L - 1.0).abs() < 1e-15);
    }

    #[test]
    fn integrates_low_order_polynomials() {
        // standard weights for the degree-11 rule
        let w = [
            (0..6, 0.012_698_412_698_412_698),
            (6..18, 0.022_574_955_908_289_24),
            (18..26, 0.021_093_750_000_000_0),
            (26..50, 0.020_173_335_537_918_87),
        ];
        let pts = lebedev50_cartesian();
        let integrate = |f: &dyn Fn([f64; 3]) -> f64| -> f64 {
            w.iter()
                .map(|(r, wt)| r.clone().map(|i| wt * f(pts[i])).sum::<f64>())
                .sum()
        };
        assert!((integrate(&|_| 1.0) - 1.0).abs() < 1e-12);
        // mean of x^2 over the sphere is 1/3, of x^2 y^2 z^2 is 1/105
        assert!((integrate(&|p| p[0] * p[0]) - 1.0 / 3.0).abs() < 1e-12);
        assert!((integrate(&|p| (p[0] * p[1] * p[2]).powi(2)) - 1.0 / 105.0).abs() < 1e-12);
    }

    #[test]
    fn directions_are_distinct() {
        let d = lebedev50();
        for i in 0..d.len() {
            for j in 0..i {
                assert!(crate::geometry::angular_distance(d[i], d[j]) > 10.0);
            }
        }
    }
}
