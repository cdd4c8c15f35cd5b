//! Eigendecomposition of symmetric 3×3 matrices by cyclic Jacobi rotations.

use crate::geom::{Mat3, Vec3};

/// Sweeps stop once the off-diagonal Frobenius norm falls below this fraction of the matrix norm.
pub const OFF_DIAGONAL_TOLERANCE: f64 = 1e-13;
pub const MAX_SWEEPS: usize = 32;
/// Relative asymmetry above which a matrix is rejected.
pub const SYMMETRY_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, thiserror::Error)]
pub enum EigenError {
    #[error("matrix is not symmetric (max |a_ij - a_ji| = {0:e})")]
    NotSymmetric(f64),
    #[error("matrix has non-finite entries")]
    NonFinite,
}

/// Eigenvalues in descending order with matching orthonormal eigenvectors.
///
/// Each eigenvector is signed so that its largest-magnitude component is
/// non-negative (lowest axis wins ties).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SymEigen {
    pub values: [f64; 3],
    pub vectors: [Vec3; 3],
}

impl SymEigen {
    /// `Σ λ_k e_k e_kᵀ`
    pub fn reconstruct(&self) -> Mat3 {
        compose(self.values, self.vectors)
    }
}

/// `Σ w_k e_k e_kᵀ` for the given weights and directions.
pub fn compose(weights: [f64; 3], vectors: [Vec3; 3]) -> Mat3 {
    let mut m = Mat3::ZERO;
    for k in 0..3 {
        m += Mat3::outer(vectors[k], vectors[k]).scale(weights[k]);
    }
    m
}

fn off_diagonal_norm(a: &[[f64; 3]; 3]) -> f64 {
    libm::sqrt(2.0 * (a[0][1] * a[0][1] + a[0][2] * a[0][2] + a[1][2] * a[1][2]))
}

pub fn eigen_sym3(m: &Mat3) -> Result<SymEigen, EigenError> {
    if !m.is_finite() {
        return Err(EigenError::NonFinite);
    }
    let norm = m.frobenius_norm();
    let asym = m.asymmetry();
    if asym > SYMMETRY_TOLERANCE * norm {
        return Err(EigenError::NotSymmetric(asym));
    }

    // Work on the symmetrized upper triangle.
    let mut a = m.0;
    for r in 0..3 {
        for c in (r + 1)..3 {
            let v = 0.5 * (a[r][c] + a[c][r]);
            a[r][c] = v;
            a[c][r] = v;
        }
    }
    let mut v = Mat3::IDENTITY.0;

    for _ in 0..MAX_SWEEPS {
        if off_diagonal_norm(&a) <= OFF_DIAGONAL_TOLERANCE * norm {
            break;
        }
        for (p, q) in [(0usize, 1usize), (0, 2), (1, 2)] {
            let apq = a[p][q];
            if apq == 0.0 {
                continue;
            }
            let theta = (a[q][q] - a[p][p]) / (2.0 * apq);
            let t = {
                let mag = 1.0 / (libm::fabs(theta) + libm::sqrt(theta * theta + 1.0));
                if theta < 0.0 {
                    -mag
                } else {
                    mag
                }
            };
            let c = 1.0 / libm::sqrt(t * t + 1.0);
            let s = t * c;

            // A ← Jᵀ A J with J the Givens rotation in the (p, q) plane.
            for k in 0..3 {
                let akp = a[k][p];
                let akq = a[k][q];
                a[k][p] = c * akp - s * akq;
                a[k][q] = s * akp + c * akq;
            }
            for k in 0..3 {
                let apk = a[p][k];
                let aqk = a[q][k];
                a[p][k] = c * apk - s * aqk;
                a[q][k] = s * apk + c * aqk;
            }
            a[p][q] = 0.0;
            a[q][p] = 0.0;

            for row in &mut v {
                let vp = row[p];
                let vq = row[q];
                row[p] = c * vp - s * vq;
                row[q] = s * vp + c * vq;
            }
        }
    }

    let vm = Mat3(v);
    let mut pairs = [
        (a[0][0], vm.column(0)),
        (a[1][1], vm.column(1)),
        (a[2][2], vm.column(2)),
    ];
    // Stable sort keeps the axis order for exactly equal eigenvalues.
    pairs.sort_by(|x, y| y.0.total_cmp(&x.0));

    let mut values = [0.0; 3];
    let mut vectors = [Vec3::ZERO; 3];
    for (k, (val, vec)) in pairs.into_iter().enumerate() {
        values[k] = val;
        vectors[k] = canonical_sign(vec);
    }
    Ok(SymEigen { values, vectors })
}

fn canonical_sign(v: Vec3) -> Vec3 {
    if v[v.max_abs_axis()] < 0.0 {
        -v
    } else {
        v
    }
}
