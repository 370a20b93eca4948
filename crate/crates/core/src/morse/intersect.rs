//! Signed crossings of planar polylines in the universal cover of a flat
//! chart.

pub type Pt = [f64; 2];

/// Smallest crossing angle sine accepted as transverse.
pub const MIN_SINE: f64 = 1e-6;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Crossing {
    /// Lattice translate of the second polyline that is crossed.
    pub shift: [i64; 2],
    /// `sgn det(a', b')`.
    pub sign: i64,
    pub at: Pt,
    /// Arc parameter along the first polyline, as segment index plus fraction.
    pub param: f64,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Graze {
    pub at: Pt,
    pub sine: f64,
}

fn bbox(p: &[Pt]) -> (Pt, Pt) {
    let mut lo = [f64::INFINITY; 2];
    let mut hi = [f64::NEG_INFINITY; 2];
    for q in p {
        for i in 0..2 {
            lo[i] = lo[i].min(q[i]);
            hi[i] = hi[i].max(q[i]);
        }
    }
    (lo, hi)
}

fn cross(a: Pt, b: Pt) -> f64 {
    a[0] * b[1] - a[1] * b[0]
}

/// Crossings of `a` with every lattice translate of `b` (only the zero
/// translate when `periodic` is false). Segments are half open at their
/// end, so a crossing through a shared vertex counts once. Crossings whose
/// angle has sine below `min_sine` are returned as grazes.
pub fn crossings(a: &[Pt], b: &[Pt], periodic: bool, min_sine: f64) -> Result<Vec<Crossing>, Graze> {
    let mut out = Vec::new();
    if a.len() < 2 || b.len() < 2 {
        return Ok(out);
    }
    let (alo, ahi) = bbox(a);
    let (blo, bhi) = bbox(b);
    let range = |i: usize| -> (i64, i64) {
        if periodic {
            ((alo[i] - bhi[i]).floor() as i64, (ahi[i] - blo[i]).ceil() as i64)
        } else {
            (0, 0)
        }
    };
    let (x0, x1) = range(0);
    let (y0, y1) = range(1);
    for sx in x0..=x1 {
        for sy in y0..=y1 {
            let off = [sx as f64, sy as f64];
            if blo[0] + off[0] > ahi[0] || bhi[0] + off[0] < alo[0] || blo[1] + off[1] > ahi[1] || bhi[1] + off[1] < alo[1] {
                continue;
            }
            for (i, sa) in a.windows(2).enumerate() {
                let (p, r) = (sa[0], [sa[1][0] - sa[0][0], sa[1][1] - sa[0][1]]);
                let (slo, shi) = ([p[0].min(sa[1][0]), p[1].min(sa[1][1])], [p[0].max(sa[1][0]), p[1].max(sa[1][1])]);
                for sb in b.windows(2) {
                    let q = [sb[0][0] + off[0], sb[0][1] + off[1]];
                    let qe = [sb[1][0] + off[0], sb[1][1] + off[1]];
                    if q[0].max(qe[0]) < slo[0] || q[0].min(qe[0]) > shi[0] || q[1].max(qe[1]) < slo[1] || q[1].min(qe[1]) > shi[1] {
                        continue;
                    }
                    let s = [qe[0] - q[0], qe[1] - q[1]];
                    let den = cross(r, s);
                    let qp = [q[0] - p[0], q[1] - p[1]];
                    if den == 0.0 {
                        if cross(qp, r) == 0.0 {
                            return Err(Graze { at: p, sine: 0.0 });
                        }
                        continue;
                    }
                    let u = cross(qp, s) / den;
                    let v = cross(qp, r) / den;
                    if (0.0..1.0).contains(&u) && (0.0..1.0).contains(&v) {
                        let at = [p[0] + u * r[0], p[1] + u * r[1]];
                        let sine = den.abs() / ((r[0].hypot(r[1])) * (s[0].hypot(s[1])));
                        if sine < min_sine {
                            return Err(Graze { at, sine });
                        }
                        out.push(Crossing { shift: [sx, sy], sign: den.signum() as i64, at, param: i as f64 + u });
                    }
                }
            }
        }
    }
    out.sort_by(|x, y| x.param.partial_cmp(&y.param).unwrap().then(x.shift.cmp(&y.shift)));
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn square_diagonals() {
        let a = [[0.0, 0.0], [1.0, 1.0]];
        let b = [[1.0, 0.0], [0.0, 1.0]];
        let c = crossings(&a, &b, false, 1e-6).unwrap();
        assert_eq!(c.len(), 1);
        assert_eq!(c[0].sign, 1);
        let c = crossings(&b, &a, false, 1e-6).unwrap();
        assert_eq!(c[0].sign, -1);
    }

    #[test]
    fn lattice_translates() {
        // horizontal line of length 2 crosses two translates of a vertical unit segment
        let a = [[-0.3, 0.5], [1.7, 0.5]];
        let b = [[0.2, 0.0], [0.2, 1.0]];
        let c = crossings(&a, &b, true, 1e-6).unwrap();
        let shifts: Vec<_> = c.iter().map(|c| c.shift).collect();
        assert_eq!(shifts, vec![[0, 0], [1, 0]]);
        assert!(c.iter().all(|c| c.sign == 1));
    }

    #[test]
    fn shared_vertex_counts_once() {
        let a = [[-1.0, 0.0], [0.0, 0.0], [1.0, 0.0]];
        let b = [[0.0, -1.0], [0.0, 0.0], [0.0, 1.0]];
        assert_eq!(crossings(&a, &b, false, 1e-6).unwrap().len(), 1);
    }

    #[test]
    fn collinear_overlap_is_a_graze() {
        let a = [[0.0, 0.0], [1.0, 0.0]];
        let b = [[0.5, 0.0], [2.0, 0.0]];
        assert!(crossings(&a, &b, false, 1e-6).is_err());
    }
}
