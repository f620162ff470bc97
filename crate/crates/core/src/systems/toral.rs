use serde::Serialize;

use crate::error::{Error, Result};
use crate::geometry::{wrap_unit, TorusPoint};

/// Eigenvalues and unit eigenvectors of a hyperbolic 2x2 integer matrix.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EigenData {
    pub lambda_plus: f64,
    pub lambda_minus: f64,
    pub v_plus: [f64; 2],
    pub v_minus: [f64; 2],
}

/// Unit eigenvector of `[[a, b], [c, d]]` for eigenvalue `lambda`, first
/// non-zero component positive.
fn unit_eigenvector(m: [[i64; 2]; 2], lambda: f64) -> [f64; 2] {
    let [[a, b], [c, d]] = m.map(|r| r.map(|e| e as f64));
    // both rows of (M - lambda I) annihilate v; use the better conditioned one
    let r1 = [b, lambda - a];
    let r2 = [lambda - d, c];
    let v = if r1[0].hypot(r1[1]) >= r2[0].hypot(r2[1]) { r1 } else { r2 };
    let n = v[0].hypot(v[1]);
    let mut v = [v[0] / n, v[1] / n];
    if v[0] < 0.0 || (v[0] == 0.0 && v[1] < 0.0) {
        v = [-v[0], -v[1]];
    }
    v
}

/// Eigen-decomposition of a hyperbolic toral automorphism with positive eigenvalues.
pub fn eigen_data(matrix: [[i64; 2]; 2]) -> Result<EigenData> {
    let [[a, b], [c, d]] = matrix;
    let det = a
        .checked_mul(d)
        .zip(b.checked_mul(c))
        .and_then(|(x, y)| x.checked_sub(y))
        .ok_or_else(|| Error::Range(format!("determinant of {matrix:?} overflows")))?;
    if det.abs() != 1 {
        return Err(Error::UnsupportedSystem(format!(
            "toral automorphism needs |det| = 1, {matrix:?} has det {det}"
        )));
    }
    let tr = (a + d) as f64;
    let disc = tr * tr - 4.0 * det as f64;
    if disc <= 0.0 {
        return Err(Error::UnsupportedSystem(format!("{matrix:?} is not hyperbolic")));
    }
    let root = disc.sqrt();
    let big = (tr.abs() + root) / 2.0;
    let (l1, l2) = if tr >= 0.0 { (big, det as f64 / big) } else { (-big, det as f64 / -big) };
    if l1 <= 0.0 || l2 <= 0.0 {
        return Err(Error::UnsupportedSystem(format!(
            "{matrix:?} has eigenvalues {l1} and {l2}; both must be positive"
        )));
    }
    let (lambda_plus, lambda_minus) = if l1 > l2 { (l1, l2) } else { (l2, l1) };
    Ok(EigenData {
        lambda_plus,
        lambda_minus,
        v_plus: unit_eigenvector(matrix, lambda_plus),
        v_minus: unit_eigenvector(matrix, lambda_minus),
    })
}

/// A hyperbolic automorphism of `T^2` induced by an integer matrix.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ToralAutomorphism {
    matrix: [[i64; 2]; 2],
    eigen: EigenData,
}

impl ToralAutomorphism {
    pub fn new(matrix: [[i64; 2]; 2]) -> Result<Self> {
        Ok(Self {
            matrix,
            eigen: eigen_data(matrix)?,
        })
    }

    /// Arnold's cat map `[[2, 1], [1, 1]]`.
    pub fn cat_map() -> Self {
        Self::new([[2, 1], [1, 1]]).expect("cat map is hyperbolic")
    }

    pub fn matrix(&self) -> [[i64; 2]; 2] {
        self.matrix
    }

    pub fn eigen(&self) -> &EigenData {
        &self.eigen
    }

    pub fn lambda_plus(&self) -> f64 {
        self.eigen.lambda_plus
    }

    pub fn lambda_minus(&self) -> f64 {
        self.eigen.lambda_minus
    }

    pub fn v_plus(&self) -> [f64; 2] {
        self.eigen.v_plus
    }

    pub fn v_minus(&self) -> [f64; 2] {
        self.eigen.v_minus
    }

    #[inline]
    pub(crate) fn step_xy(&self, x: [f64; 2]) -> [f64; 2] {
        let [[a, b], [c, d]] = self.matrix.map(|r| r.map(|e| e as f64));
        [wrap_unit(a * x[0] + b * x[1]), wrap_unit(c * x[0] + d * x[1])]
    }

    /// Linear action on the universal cover, no reduction mod 1.
    pub fn apply_lift(&self, x: [f64; 2]) -> [f64; 2] {
        let [[a, b], [c, d]] = self.matrix.map(|r| r.map(|e| e as f64));
        [a * x[0] + b * x[1], c * x[0] + d * x[1]]
    }
}

/// One application of the automorphism on the torus.
pub fn toral_step(map: &ToralAutomorphism, x: &TorusPoint) -> TorusPoint {
    debug_assert_eq!(x.dim(), 2);
    let y = map.step_xy([x.coords()[0], x.coords()[1]]);
    TorusPoint::from_wrapped(y.to_vec())
}
