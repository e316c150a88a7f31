//! Planar polygon helpers.

/// Convex hull of planar points, counter-clockwise, without repeated or
/// collinear points (monotone chain). A single point or a segment's two
/// endpoints are returned for degenerate inputs.
pub fn convex_hull(points: &[[f64; 2]]) -> Vec<[f64; 2]> {
    let mut pts = points.to_vec();
    pts.sort_by(|a, b| a[0].total_cmp(&b[0]).then(a[1].total_cmp(&b[1])));
    pts.dedup();
    if pts.len() <= 2 {
        return pts;
    }
    let cross = |o: [f64; 2], a: [f64; 2], b: [f64; 2]| {
        (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])
    };
    let mut hull: Vec<[f64; 2]> = Vec::with_capacity(2 * pts.len());
    for &p in &pts {
        while hull.len() >= 2 && cross(hull[hull.len() - 2], hull[hull.len() - 1], p) <= 0.0 {
            hull.pop();
        }
        hull.push(p);
    }
    let lower = hull.len() + 1;
    for &p in pts.iter().rev().skip(1) {
        while hull.len() >= lower && cross(hull[hull.len() - 2], hull[hull.len() - 1], p) <= 0.0 {
            hull.pop();
        }
        hull.push(p);
    }
    hull.pop();
    hull
}

/// Outward normal angles of the polygon's edges (CCW input).
pub(crate) fn edge_normal_angles(hull: &[[f64; 2]]) -> Vec<f64> {
    let m = hull.len();
    if m < 2 {
        return Vec::new();
    }
    let edges = if m == 2 { 2 } else { m };
    (0..edges)
        .map(|i| {
            let a = hull[i];
            let b = hull[(i + 1) % m];
            let (ex, ey) = (b[0] - a[0], b[1] - a[1]);
            ey.atan2(ex) - std::f64::consts::FRAC_PI_2
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hull_drops_interior_and_collinear_points() {
        let pts = [
            [0.0, 0.0],
            [1.0, 0.0],
            [2.0, 0.0],
            [1.0, 1.0],
            [0.5, 0.2],
            [2.0, 2.0],
            [0.0, 2.0],
        ];
        let h = convex_hull(&pts);
        assert_eq!(h, vec![[0.0, 0.0], [2.0, 0.0], [2.0, 2.0], [0.0, 2.0]]);
    }

    #[test]
    fn degenerate_hulls() {
        assert_eq!(convex_hull(&[[1.0, 1.0], [1.0, 1.0]]), vec![[1.0, 1.0]]);
        assert_eq!(
            convex_hull(&[[0.0, 0.0], [1.0, 1.0], [2.0, 2.0]]),
            vec![[0.0, 0.0], [2.0, 2.0]]
        );
    }

    #[test]
    fn square_normals_point_outward() {
        let h = convex_hull(&[[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]]);
        let n: Vec<(f64, f64)> = edge_normal_angles(&h)
            .into_iter()
            .map(|a| (a.cos().round(), a.sin().round()))
            .collect();
        assert_eq!(n, vec![(0.0, -1.0), (1.0, 0.0), (0.0, 1.0), (-1.0, 0.0)]);
    }
}
