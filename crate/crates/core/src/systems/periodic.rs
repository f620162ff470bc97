//! Exact enumeration of periodic points of toral automorphisms.
//!
//! The fixed points of `T^q` are the cosets of `Z^2` in `A^{-1} Z^2` with
//! `A = T^q - I`. A Hermite normal form of `A` gives a canonical set of coset
//! representatives, so every point is produced exactly once.

use serde::Serialize;

use super::toral::ToralAutomorphism;
use crate::error::{Error, Result};
use crate::geometry::{LineSegment, TorusPoint};

/// Largest supported period.
pub const MAX_PERIOD: u32 = 30;

/// Refuse to enumerate more points than this.
pub const MAX_POINT_COUNT: u64 = 10_000_000;

type Mat = [[i64; 2]; 2];

fn mat_mul(x: Mat, y: Mat) -> Option<Mat> {
    let e = |i: usize, j: usize| -> Option<i64> {
        x[i][0].checked_mul(y[0][j])?.checked_add(x[i][1].checked_mul(y[1][j])?)
    };
    Some([[e(0, 0)?, e(0, 1)?], [e(1, 0)?, e(1, 1)?]])
}

/// `T^q` with overflow checks.
pub fn matrix_power(m: Mat, q: u32) -> Result<Mat> {
    let mut acc = [[1, 0], [0, 1]];
    for _ in 0..q {
        acc = mat_mul(acc, m)
            .ok_or_else(|| Error::Range(format!("T^{q} overflows 64-bit integers")))?;
    }
    Ok(acc)
}

fn shifted(m: Mat, q: u32) -> Result<Mat> {
    let mut a = matrix_power(m, q)?;
    a[0][0] -= 1;
    a[1][1] -= 1;
    Ok(a)
}

fn det(a: Mat) -> Result<i64> {
    a[0][0]
        .checked_mul(a[1][1])
        .zip(a[0][1].checked_mul(a[1][0]))
        .and_then(|(x, y)| x.checked_sub(y))
        .ok_or_else(|| Error::Range("determinant overflows".into()))
}

/// `|det(T^q - I)|`, the number of points fixed by `T^q`.
pub fn lefschetz_count(map: &ToralAutomorphism, q: u32) -> Result<u64> {
    check_period(q)?;
    Ok(det(shifted(map.matrix(), q)?)?.unsigned_abs())
}

fn check_period(q: u32) -> Result<()> {
    if q == 0 {
        return Err(Error::Domain("period must be at least 1".into()));
    }
    if q > MAX_PERIOD {
        return Err(Error::Range(format!("period {q} exceeds the cap {MAX_PERIOD}")));
    }
    Ok(())
}

fn ext_gcd(a: i64, b: i64) -> (i64, i64, i64) {
    // returns (g, u, v) with u a + v b = g >= 0
    let (mut r0, mut r1) = (a as i128, b as i128);
    let (mut u0, mut u1) = (1i128, 0i128);
    let (mut v0, mut v1) = (0i128, 1i128);
    while r1 != 0 {
        let k = r0.div_euclid(r1);
        (r0, r1) = (r1, r0 - k * r1);
        (u0, u1) = (u1, u0 - k * u1);
        (v0, v1) = (v1, v0 - k * v1);
    }
    if r0 < 0 {
        (r0, u0, v0) = (-r0, -u0, -v0);
    }
    (r0 as i64, u0 as i64, v0 as i64)
}

/// Lower-triangular `(h11, h21, h22)` with `A Z^2 = span{(h11, h21), (0, h22)}`.
fn hermite_lower(a: Mat) -> (i128, i128, i128) {
    let [[p, q], [r, s]] = a.map(|row| row.map(|e| e as i128));
    let (g, u, v) = ext_gcd(a[0][0], a[0][1]);
    let g = g as i128;
    let (u, v) = (u as i128, v as i128);
    // A * [[u, -q/g], [v, p/g]] has first row (g, 0)
    let h21 = r * u + s * v;
    let mut h22 = -r * q / g + s * p / g;
    if h22 < 0 {
        h22 = -h22;
    }
    (g, h21.rem_euclid(h22), h22)
}

/// A fixed point of `T^q` with exact rational coordinates `numer / denom`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct RationalPoint {
    pub numer: [i64; 2],
    pub denom: i64,
}

impl RationalPoint {
    pub fn to_torus(&self) -> TorusPoint {
        let d = self.denom as f64;
        TorusPoint::from_wrapped(vec![self.numer[0] as f64 / d, self.numer[1] as f64 / d])
    }

    pub fn xy(&self) -> [f64; 2] {
        let d = self.denom as f64;
        [self.numer[0] as f64 / d, self.numer[1] as f64 / d]
    }
}

/// All solutions of `T^q x = x` on the torus, as exact rationals.
pub fn periodic_points_exact(map: &ToralAutomorphism, q: u32) -> Result<Vec<RationalPoint>> {
    check_period(q)?;
    let a = shifted(map.matrix(), q)?;
    let d = det(a)?;
    if d == 0 {
        return Err(Error::Domain(format!("det(T^{q} - I) = 0, fixed set is not finite")));
    }
    let count = d.unsigned_abs();
    if count > MAX_POINT_COUNT {
        return Err(Error::Range(format!(
            "T^{q} has {count} fixed points, above the enumeration cap {MAX_POINT_COUNT}"
        )));
    }
    let (h11, _, h22) = hermite_lower(a);
    debug_assert_eq!((h11 * h22) as u64, count);
    let dd = count as i128;
    let sign = d.signum() as i128;
    // adj(A) = [[s, -q], [-r, p]]
    let [[p, qq], [r, s]] = a.map(|row| row.map(|e| e as i128));
    let mut out = Vec::with_capacity(count as usize);
    for i in 0..h11 {
        for j in 0..h22 {
            let x = (sign * (s * i - qq * j)).rem_euclid(dd);
            let y = (sign * (-r * i + p * j)).rem_euclid(dd);
            out.push(RationalPoint {
                numer: [x as i64, y as i64],
                denom: count as i64,
            });
        }
    }
    Ok(out)
}

/// All points with `T^q x = x`, including those of period strictly dividing `q`.
pub fn find_periodic_points(map: &ToralAutomorphism, q: u32) -> Result<Vec<TorusPoint>> {
    Ok(periodic_points_exact(map, q)?
        .iter()
        .map(RationalPoint::to_torus)
        .collect())
}

/// Smallest `p` with `T^p x = x`, checked exactly.
pub fn prime_period(map: &ToralAutomorphism, x: &RationalPoint) -> Result<u32> {
    let m = map.matrix();
    let d = x.denom as i128;
    let step = |v: [i128; 2]| -> [i128; 2] {
        [
            (m[0][0] as i128 * v[0] + m[0][1] as i128 * v[1]).rem_euclid(d),
            (m[1][0] as i128 * v[0] + m[1][1] as i128 * v[1]).rem_euclid(d),
        ]
    };
    let start = [x.numer[0] as i128, x.numer[1] as i128];
    let mut v = step(start);
    for p in 1..=MAX_PERIOD {
        if v == start {
            return Ok(p);
        }
        v = step(v);
    }
    Err(Error::Range(format!("prime period exceeds {MAX_PERIOD}")))
}

/// A periodic point found on the line through a segment.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PeriodicHit {
    pub point: RationalPoint,
    /// Prime period.
    pub q: u32,
    /// Line parameter of the matching lift: the lift is `p1 + t direction`.
    pub t: f64,
    pub on_segment: bool,
}

const LINE_TOL: f64 = 1e-10;

/// First periodic point (by period) lying on the projected line through `seg`.
///
/// The projection of a full line with irrational slope is dense, so only lifts
/// with parameter within `max(length, 1)` of the segment are considered.
pub fn segment_periodic_intersection(
    seg: &LineSegment,
    map: &ToralAutomorphism,
    q_max: u32,
) -> Result<Option<PeriodicHit>> {
    let l = seg.length();
    let window = l.max(1.0);
    let (t_lo, t_hi) = (-window, l + window);
    let p1 = seg.p1();
    let dir = seg.direction();
    let mut best: Option<PeriodicHit> = None;
    for q in 1..=q_max.min(MAX_PERIOD) {
        for pt in periodic_points_exact(map, q)? {
            let xy = pt.xy();
            let rel = [xy[0] - p1[0], xy[1] - p1[1]];
            for_each_lift(rel, dir, t_lo, t_hi, |t, perp| {
                if perp.abs() <= LINE_TOL {
                    let better = match &best {
                        None => true,
                        Some(b) => (b.on_segment, -(b.t.abs())) < (in_range(t, l), -(t.abs())),
                    };
                    if better {
                        best = Some(PeriodicHit {
                            point: pt,
                            q: 0,
                            t,
                            on_segment: in_range(t, l),
                        });
                    }
                }
            });
        }
        if let Some(mut hit) = best.take() {
            hit.q = prime_period(map, &hit.point)?;
            return Ok(Some(hit));
        }
    }
    Ok(None)
}

fn in_range(t: f64, l: f64) -> bool {
    t >= -LINE_TOL && t <= l + LINE_TOL
}

/// Visit lifts `rel + k`, `k` in `Z^2`, whose foot on the line `t dir` lies in `[t_lo, t_hi]`,
/// passing the foot parameter and the signed perpendicular offset.
fn for_each_lift(rel: [f64; 2], dir: [f64; 2], t_lo: f64, t_hi: f64, mut f: impl FnMut(f64, f64)) {
    let normal = [-dir[1], dir[0]];
    // every lift within perpendicular distance 1 of the window lies in this box
    let xs = [t_lo * dir[0], t_hi * dir[0]];
    let ys = [t_lo * dir[1], t_hi * dir[1]];
    let (x0, x1) = (xs[0].min(xs[1]) - 1.0, xs[0].max(xs[1]) + 1.0);
    let (y0, y1) = (ys[0].min(ys[1]) - 1.0, ys[0].max(ys[1]) + 1.0);
    let kx = ((x0 - rel[0]).floor() as i64)..=((x1 - rel[0]).ceil() as i64);
    for i in kx {
        let px = rel[0] + i as f64;
        let ky = ((y0 - rel[1]).floor() as i64)..=((y1 - rel[1]).ceil() as i64);
        for j in ky {
            let py = rel[1] + j as f64;
            let perp = px * normal[0] + py * normal[1];
            if perp.abs() > 1.0 {
                continue;
            }
            let t = px * dir[0] + py * dir[1];
            if t >= t_lo && t <= t_hi {
                f(t, perp);
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cat() -> ToralAutomorphism {
        ToralAutomorphism::cat_map()
    }

    fn sorted(v: Vec<RationalPoint>) -> Vec<(i64, i64, i64)> {
        let mut out: Vec<_> = v.iter().map(|p| (p.numer[0], p.numer[1], p.denom)).collect();
        out.sort();
        out
    }

    #[test]
    fn cat_map_small_periods() {
        let pts = periodic_points_exact(&cat(), 1).unwrap();
        assert_eq!(pts.len(), 1);
        assert_eq!(pts[0].numer, [0, 0]);

        let pts = periodic_points_exact(&cat(), 2).unwrap();
        assert_eq!(pts.len(), 5);
        let mut fifths: Vec<_> = pts.iter().map(|p| (p.numer[0], p.numer[1], p.denom)).collect();
        fifths.sort();
        assert_eq!(fifths, vec![(0, 0, 5), (1, 2, 5), (2, 4, 5), (3, 1, 5), (4, 3, 5)]);
        assert!(matches!(find_periodic_points(&cat(), 0), Err(Error::Domain(_))));
        assert!(matches!(find_periodic_points(&cat(), 31), Err(Error::Range(_))));
    }

    /// Brute-force oracle: scan all points with denominator `D` and keep the fixed ones.
    fn brute(map: &ToralAutomorphism, q: u32) -> Vec<RationalPoint> {
        let a = shifted(map.matrix(), q).unwrap();
        let d = det(a).unwrap().abs();
        let mut out = vec![];
        for x in 0..d {
            for y in 0..d {
                let ax = (a[0][0] * x + a[0][1] * y).rem_euclid(d);
                let ay = (a[1][0] * x + a[1][1] * y).rem_euclid(d);
                if ax == 0 && ay == 0 {
                    out.push(RationalPoint { numer: [x, y], denom: d });
                }
            }
        }
        out
    }

    #[test]
    fn matches_brute_force_scan() {
        for m in [[[2, 1], [1, 1]], [[3, 1], [2, 1]], [[1, 1], [1, 2]], [[5, 2], [2, 1]]] {
            let t = ToralAutomorphism::new(m).unwrap();
            for q in 1..=3 {
                assert_eq!(
                    sorted(periodic_points_exact(&t, q).unwrap()),
                    sorted(brute(&t, q)),
                    "{m:?} q={q}"
                );
            }
        }
    }

    #[test]
    fn lefschetz_and_iteration() {
        let c = cat();
        for q in 1..=6 {
            let pts = periodic_points_exact(&c, q).unwrap();
            assert_eq!(pts.len() as u64, lefschetz_count(&c, q).unwrap());
            for p in &pts {
                let mut x = p.xy();
                for _ in 0..q {
                    x = c.step_xy(x);
                }
                let y = p.xy();
                let dx = crate::geometry::wrap_centered(x[0] - y[0]);
                let dy = crate::geometry::wrap_centered(x[1] - y[1]);
                assert!(dx.abs() < 1e-12 && dy.abs() < 1e-12, "q={q} {p:?}");
                assert_eq!(q % prime_period(&c, p).unwrap(), 0);
            }
        }
        // Lucas numbers: |det(T^q - I)| = L_{2q} - 2
        assert_eq!(lefschetz_count(&c, 12).unwrap(), 103_680);
    }

    #[test]
    fn overflow_is_a_range_error() {
        let t = ToralAutomorphism::new([[1000, 999], [1, 1]]).unwrap();
        assert!(matches!(matrix_power(t.matrix(), 30), Err(Error::Range(_))));
        assert!(matches!(periodic_points_exact(&cat(), 30), Err(Error::Range(_))));
    }

    #[test]
    fn intersection_examples() {
        let c = cat();
        let v = c.v_plus();
        let seg = LineSegment::centered([0.2, 0.4], v, 0.5).unwrap();
        let hit = segment_periodic_intersection(&seg, &c, 4).unwrap().unwrap();
        assert_eq!((hit.point.numer, hit.point.denom, hit.q, hit.on_segment), ([1, 2], 5, 2, true));
        assert!((hit.t - 0.25).abs() < 1e-12);

        // fixed point on the continuation, 0.3 line units behind the start
        let seg = LineSegment::new([0.3 * v[0], 0.3 * v[1]], v, 0.4).unwrap();
        let hit = segment_periodic_intersection(&seg, &c, 1).unwrap().unwrap();
        assert_eq!((hit.point.numer, hit.q, hit.on_segment), ([0, 0], 1, false));
        assert!((hit.t + 0.3).abs() < 1e-12);

        let seg = LineSegment::new([0.137_281_93, 0.291_734_55], v, 0.3).unwrap();
        assert!(segment_periodic_intersection(&seg, &c, 6).unwrap().is_none());
    }

    /// Oracle for the empty case: every periodic point up to q=6, all lifts in a wide box.
    #[test]
    fn empty_intersection_exhaustive() {
        let c = cat();
        let v = c.v_minus();
        let p1 = [0.613_207_1, 0.058_431_9];
        let seg = LineSegment::new(p1, v, 0.7).unwrap();
        let mut min_perp = f64::INFINITY;
        for q in 1..=6 {
            for p in periodic_points_exact(&c, q).unwrap() {
                let xy = p.xy();
                for i in -4..=4 {
                    for j in -4..=4 {
                        let r = [xy[0] + i as f64 - p1[0], xy[1] + j as f64 - p1[1]];
                        let t = r[0] * v[0] + r[1] * v[1];
                        if (-1.0..=1.7).contains(&t) {
                            min_perp = min_perp.min((r[0] * v[1] - r[1] * v[0]).abs());
                        }
                    }
                }
            }
        }
        assert!(min_perp > 1e-6);
        assert!(segment_periodic_intersection(&seg, &c, 6).unwrap().is_none());
    }
}
