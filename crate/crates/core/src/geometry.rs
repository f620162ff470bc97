//! Points on the torus, lifted line segments and alignment with eigendirections.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Reduces a real number mod 1 into `[0, 1)`.
#[inline]
pub fn wrap_unit(x: f64) -> f64 {
    let r = x - x.floor();
    // x slightly below an integer can round up to exactly 1.0
    if r >= 1.0 {
        0.0
    } else {
        r
    }
}

/// Representative of `x` mod 1 in `[-1/2, 1/2)`.
#[inline]
pub fn wrap_centered(x: f64) -> f64 {
    let r = x - (x + 0.5).floor();
    if r >= 0.5 {
        r - 1.0
    } else {
        r
    }
}

/// Distance between two points of the circle `R/Z`.
#[inline]
pub fn circle_distance(a: f64, b: f64) -> f64 {
    wrap_centered(a - b).abs()
}

/// A point of the torus `T^m`, every coordinate in `[0, 1)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TorusPoint {
    coords: Vec<f64>,
}

impl TorusPoint {
    /// Builds a point from coordinates already in the fundamental domain.
    pub fn new(coords: Vec<f64>) -> Result<Self> {
        if coords.iter().any(|c| !(0.0..1.0).contains(c)) {
            return Err(Error::Domain(format!(
                "torus coordinates must lie in [0,1): {coords:?}"
            )));
        }
        Ok(Self { coords })
    }

    pub(crate) fn from_wrapped(coords: Vec<f64>) -> Self {
        debug_assert!(coords.iter().all(|c| (0.0..1.0).contains(c)));
        Self { coords }
    }

    pub fn coords(&self) -> &[f64] {
        &self.coords
    }

    pub(crate) fn coords_mut(&mut self) -> &mut [f64] {
        &mut self.coords
    }

    pub fn dim(&self) -> usize {
        self.coords.len()
    }

    pub fn into_coords(self) -> Vec<f64> {
        self.coords
    }
}

/// Projects a point of `R^m` onto the torus.
pub fn wrap(x: &[f64]) -> Result<TorusPoint> {
    if x.iter().any(|c| !c.is_finite()) {
        return Err(Error::Domain(format!("non-finite coordinate in {x:?}")));
    }
    Ok(TorusPoint::from_wrapped(x.iter().map(|&c| wrap_unit(c)).collect()))
}

/// A segment in the universal cover `R^2`, `p1 + t * direction` for `t` in `[0, length]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LineSegment {
    p1: [f64; 2],
    direction: [f64; 2],
    length: f64,
}

impl LineSegment {
    /// `direction` need not be normalized; it must be finite and non-zero.
    pub fn new(p1: [f64; 2], direction: [f64; 2], length: f64) -> Result<Self> {
        let norm = direction[0].hypot(direction[1]);
        if !(norm.is_finite() && norm > 0.0) {
            return Err(Error::Config(format!("segment direction {direction:?} is degenerate")));
        }
        if !(length.is_finite() && length > 0.0) {
            return Err(Error::Config(format!("segment length must be positive, got {length}")));
        }
        if !(p1[0].is_finite() && p1[1].is_finite()) {
            return Err(Error::Config(format!("segment anchor {p1:?} is not finite")));
        }
        Ok(Self {
            p1,
            direction: [direction[0] / norm, direction[1] / norm],
            length,
        })
    }

    /// Segment of the given length whose midpoint is `center`.
    pub fn centered(center: [f64; 2], direction: [f64; 2], length: f64) -> Result<Self> {
        let s = Self::new(center, direction, length)?;
        let h = 0.5 * length;
        Ok(Self {
            p1: [center[0] - h * s.direction[0], center[1] - h * s.direction[1]],
            ..s
        })
    }

    pub fn p1(&self) -> [f64; 2] {
        self.p1
    }

    pub fn p2(&self) -> [f64; 2] {
        self.point_at(self.length)
    }

    pub fn direction(&self) -> [f64; 2] {
        self.direction
    }

    pub fn length(&self) -> f64 {
        self.length
    }

    pub fn point_at(&self, t: f64) -> [f64; 2] {
        [self.p1[0] + t * self.direction[0], self.p1[1] + t * self.direction[1]]
    }

    /// Same segment traversed from `p2` back to `p1`.
    pub fn reversed(&self) -> Self {
        Self {
            p1: self.p2(),
            direction: [-self.direction[0], -self.direction[1]],
            length: self.length,
        }
    }

    /// Sub-segments used by the distance computation, as `(midpoint, half_length)`.
    fn pieces(&self) -> impl Iterator<Item = ([f64; 2], f64)> + '_ {
        let count = if self.length < 1.0 {
            1
        } else {
            (self.length / 0.49).ceil() as usize
        };
        let piece = self.length / count as f64;
        (0..count).map(move |i| (self.point_at((i as f64 + 0.5) * piece), 0.5 * piece))
    }
}

/// Distance on `T^2` from `x` to the projection of `segment`.
///
/// The segment is cut into pieces shorter than one (half a unit once the
/// segment is at least one long), and for each piece the minimum is taken
/// over the nine lattice translates around the wrapped offset.
pub fn segment_distance(x: &TorusPoint, segment: &LineSegment) -> f64 {
    debug_assert_eq!(x.dim(), 2);
    segment_distance_xy([x.coords[0], x.coords[1]], segment)
}

pub(crate) fn segment_distance_xy(x: [f64; 2], segment: &LineSegment) -> f64 {
    let [ux, uy] = segment.direction;
    let mut best = f64::INFINITY;
    for (mid, half) in segment.pieces() {
        let dx = wrap_centered(x[0] - mid[0]);
        let dy = wrap_centered(x[1] - mid[1]);
        for kx in [-1.0, 0.0, 1.0] {
            for ky in [-1.0, 0.0, 1.0] {
                let px = dx + kx;
                let py = dy + ky;
                let t = (px * ux + py * uy).clamp(-half, half);
                let d = (px - t * ux).hypot(py - t * uy);
                if d < best {
                    best = d;
                }
            }
        }
    }
    best
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum AlignmentTag {
    Unstable,
    Stable,
    Transverse,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AlignmentClass {
    pub tag: AlignmentTag,
    /// Angle in `[0, pi/2]` between the segment's line and the matched
    /// eigendirection; for transverse segments the smaller of the two.
    pub angle_to_eigendirection: f64,
}

/// |sin| of the angle between two unit vectors, which ignores orientation.
#[inline]
fn abs_sin(a: [f64; 2], b: [f64; 2]) -> f64 {
    (a[0] * b[1] - a[1] * b[0]).abs()
}

/// Classifies a segment against the unstable and stable eigendirections.
pub fn classify_alignment(
    segment: &LineSegment,
    v_plus: [f64; 2],
    v_minus: [f64; 2],
    tol: f64,
) -> Result<AlignmentClass> {
    if !(tol > 0.0) {
        return Err(Error::Config(format!("alignment tolerance must be positive, got {tol}")));
    }
    let d = segment.direction();
    let s_plus = abs_sin(d, v_plus).min(1.0);
    let s_minus = abs_sin(d, v_minus).min(1.0);
    let (tag, s) = if s_plus <= tol {
        (AlignmentTag::Unstable, s_plus)
    } else if s_minus <= tol {
        (AlignmentTag::Stable, s_minus)
    } else {
        (AlignmentTag::Transverse, s_plus.min(s_minus))
    };
    Ok(AlignmentClass {
        tag,
        angle_to_eigendirection: s.asin(),
    })
}
