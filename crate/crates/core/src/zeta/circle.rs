use super::{FixedPoint, ZetaError, DEGENERACY_TOL};
use crate::flow::FiberMap;

/// `det(A^n - I)` style enumeration: the fixed points of `A^n` on
/// `R^2 / Z^2` are `B^-1 m` for lattice points `m` in `B [0,1)^2`,
/// `B = A^n - I`, each of index `sgn det(I - A^n)`.
pub(super) fn linear_torus_counts(a: [[i64; 2]; 2], order: usize) -> Result<Vec<i64>, ZetaError> {
    let mut p = [[1i128, 0], [0, 1]];
    let a = a.map(|r| r.map(|v| v as i128));
    let mut out = Vec::with_capacity(order);
    for n in 1..=order {
        p = [
            [p[0][0] * a[0][0] + p[0][1] * a[1][0], p[0][0] * a[0][1] + p[0][1] * a[1][1]],
            [p[1][0] * a[0][0] + p[1][1] * a[1][0], p[1][0] * a[0][1] + p[1][1] * a[1][1]],
        ];
        let b = [[p[0][0] - 1, p[0][1]], [p[1][0], p[1][1] - 1]];
        let d = b[0][0] * b[1][1] - b[0][1] * b[1][0];
        if d == 0 {
            return Err(ZetaError::DegenerateFixedPoint {
                n,
                at: vec![0.0, 0.0],
                reason: "A^n - I is singular: fixed points are not isolated".into(),
            });
        }
        // x = adj(B) m / d lies in [0,1)^2
        let adj = [[b[1][1], -b[0][1]], [-b[1][0], b[0][0]]];
        let corners = [[0, 0], [1, 0], [0, 1], [1, 1]].map(|c: [i128; 2]| [b[0][0] * c[0] + b[0][1] * c[1], b[1][0] * c[0] + b[1][1] * c[1]]);
        let lo = [0, 1].map(|i| corners.iter().map(|c| c[i]).min().unwrap());
        let hi = [0, 1].map(|i| corners.iter().map(|c| c[i]).max().unwrap());
        let inside = |u: i128| if d > 0 { (0..d).contains(&u) } else { u <= 0 && u > d };
        let mut count: i64 = 0;
        for m0 in lo[0]..=hi[0] {
            for m1 in lo[1]..=hi[1] {
                let u0 = adj[0][0] * m0 + adj[0][1] * m1;
                let u1 = adj[1][0] * m0 + adj[1][1] * m1;
                if inside(u0) && inside(u1) {
                    count += 1;
                }
            }
        }
        // det(I - A^n) = det(B) for 2x2 matrices
        out.push(count * d.signum() as i64);
    }
    Ok(out)
}

fn iterate(g: &FiberMap, x: f64, n: usize) -> (f64, f64) {
    let mut y = x;
    let mut d = 1.0;
    for _ in 0..n {
        d *= g.jacobian(&[y])[0][0];
        y = g.apply(&[y])[0];
    }
    (y, d)
}

/// Fixed points of the iterates of a circle map, bracketed on a uniform
/// grid and refined by bisection on the lift.
pub(super) fn circle_map_counts(g: &FiberMap, order: usize, resolution: usize) -> Result<(Vec<i64>, Vec<FixedPoint>), ZetaError> {
    let mut counts = Vec::with_capacity(order);
    let mut points = Vec::new();
    for n in 1..=order {
        let disp: Vec<f64> = (0..=resolution)
            .map(|i| {
                let x = i as f64 / resolution as f64;
                iterate(g, x, n).0 - x
            })
            .collect();
        if let Some(w) = disp.windows(2).find(|w| (w[1] - w[0]).abs() > 0.5) {
            return Err(ZetaError::ResolutionTooCoarse(format!(
                "displacement of iterate {n} changes by {:.3} between samples",
                (w[1] - w[0]).abs()
            )));
        }
        let mut fps = Vec::new();
        for i in 0..resolution {
            let (d0, d1) = (disp[i], disp[i + 1]);
            for k in (d0.min(d1).floor() as i64)..=(d0.max(d1).ceil() as i64) {
                let k = k as f64;
                // half-open bracket [x_i, x_{i+1}) so a root on a grid point counts once
                let (s0, s1) = (d0 - k, d1 - k);
                if !(s0 == 0.0 || s0 * s1 < 0.0) {
                    continue;
                }
                let (mut lo, mut hi) = (i as f64 / resolution as f64, (i + 1) as f64 / resolution as f64);
                if s0 != 0.0 {
                    for _ in 0..80 {
                        let mid = 0.5 * (lo + hi);
                        let sm = iterate(g, mid, n).0 - mid - k;
                        if (sm < 0.0) == (s0 < 0.0) {
                            lo = mid;
                        } else {
                            hi = mid;
                        }
                    }
                }
                let x = if s0 == 0.0 { lo } else { 0.5 * (lo + hi) };
                let d = iterate(g, x, n).1;
                if (d - 1.0).abs() < DEGENERACY_TOL {
                    return Err(ZetaError::DegenerateFixedPoint { n, at: vec![x], reason: format!("derivative {d}") });
                }
                fps.push(FixedPoint { n, at: vec![x], derivative: d, index: (1.0 - d).signum() as i64, reliable: true });
            }
        }
        if fps.is_empty() && disp.iter().all(|d| (d - d.round()).abs() < DEGENERACY_TOL) {
            return Err(ZetaError::DegenerateFixedPoint { n, at: vec![0.0], reason: "every point is fixed".into() });
        }
        counts.push(fps.iter().map(|f| f.index).sum());
        points.extend(fps);
    }
    Ok((counts, points))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cat_map_counts_match_trace_recurrence() {
        // tr A^(n+1) = 3 tr A^n - tr A^(n-1), tr A^0 = 2, tr A = 3
        let mut tr = vec![2i64, 3];
        for n in 1..8 {
            tr.push(3 * tr[n] - tr[n - 1]);
        }
        let expected: Vec<i64> = (1..=8).map(|n| 2 - tr[n]).collect();
        assert_eq!(&expected[..3], &[-1, -5, -16]);
        assert_eq!(linear_torus_counts([[2, 1], [1, 1]], 8).unwrap(), expected);
    }

    #[test]
    fn identity_torus_is_degenerate() {
        assert!(matches!(linear_torus_counts([[1, 0], [0, 1]], 3), Err(ZetaError::DegenerateFixedPoint { n: 1, .. })));
    }

    #[test]
    fn quarter_turn_torus_map() {
        let c = linear_torus_counts([[0, -1], [1, 0]], 3).unwrap();
        // det(I - A^n) = 2 - tr A^n with tr A^n = 0, -2, 0
        assert_eq!(c, vec![2, 4, 2]);
    }

    #[test]
    fn doubling_map_counts() {
        let g = FiberMap::Circle { degree: 2, a: 0.3 };
        let (c, pts) = circle_map_counts(&g, 8, 4096).unwrap();
        let expected: Vec<i64> = (1..=8).map(|n| 1 - (1i64 << n)).collect();
        assert_eq!(c, expected);
        assert_eq!(pts.iter().filter(|p| p.n == 3).count(), 7);
    }

    #[test]
    fn identity_circle_is_degenerate() {
        let g = FiberMap::Circle { degree: 1, a: 0.0 };
        assert!(matches!(circle_map_counts(&g, 2, 512), Err(ZetaError::DegenerateFixedPoint { .. })));
    }
}
