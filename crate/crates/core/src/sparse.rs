//! Thin wrapper over sparse LDLᵀ factorization for the symmetric
//! positive-definite systems assembled by the elliptic oracles.

use crate::error::{Error, Result};
use sprs::{CsMat, FillInReduction, SymmetryCheck, TriMat};
use sprs_ldl::Ldl;

/// Assembled SPD system with a cached factorization.
pub struct SymmetricSystem {
    mat: CsMat<f64>,
    factor: sprs_ldl::LdlNumeric<f64, usize>,
}

impl SymmetricSystem {
    /// Builds from (row, col, value) triplets; duplicate entries accumulate.
    /// Both triangles must be present (the matrix is stored fully).
    pub fn from_triplets(n: usize, triplets: &[(usize, usize, f64)]) -> Result<Self> {
        let mut tri = TriMat::new((n, n));
        for &(r, c, v) in triplets {
            tri.add_triplet(r, c, v);
        }
        let mat: CsMat<f64> = tri.to_csr();
        let factor = Ldl::new()
            .check_symmetry(SymmetryCheck::DontCheckSymmetry)
            .fill_in_reduction(FillInReduction::ReverseCuthillMcKee)
            .numeric(mat.view())
            .map_err(|e| Error::Solver(format!("LDL factorization failed: {e}")))?;
        Ok(Self { mat, factor })
    }

    /// Solves A x = b and verifies the relative residual is ≤ 1e-10.
    pub fn solve(&self, rhs: &[f64]) -> Result<Vec<f64>> {
        let x = self.factor.solve(rhs);
        let r = residual_norms(&self.mat, &x, rhs);
        if r.0 > 1e-10 * r.1.max(1e-300) {
            return Err(Error::Solver(format!(
                "direct solve residual {:.3e} exceeds 1e-10 relative to |b| = {:.3e}",
                r.0, r.1
            )));
        }
        Ok(x)
    }

    #[cfg(test)]
    fn matrix(&self) -> &CsMat<f64> {
        &self.mat
    }
}

/// (‖A x − b‖₂, ‖b‖₂).
fn residual_norms(mat: &CsMat<f64>, x: &[f64], b: &[f64]) -> (f64, f64) {
    let ax = mul_vec(mat, x);
    let mut rr = 0.0;
    let mut bb = 0.0;
    for i in 0..b.len() {
        rr += (ax[i] - b[i]) * (ax[i] - b[i]);
        bb += b[i] * b[i];
    }
    (rr.sqrt(), bb.sqrt())
}

/// y = A x for CSR A.
pub fn mul_vec(mat: &CsMat<f64>, x: &[f64]) -> Vec<f64> {
    let mut y = vec![0.0; mat.rows()];
    for (row, vec) in mat.outer_iterator().enumerate() {
        let mut acc = 0.0;
        for (col, &v) in vec.iter() {
            acc += v * x[col];
        }
        y[row] = acc;
    }
    y
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn solves_small_spd_system() {
        // tridiagonal [2, -1] system, n = 5
        let n = 5;
        let mut t = Vec::new();
        for i in 0..n {
            t.push((i, i, 2.0));
            if i + 1 < n {
                t.push((i, i + 1, -1.0));
                t.push((i + 1, i, -1.0));
            }
        }
        let sys = SymmetricSystem::from_triplets(n, &t).unwrap();
        let b = vec![1.0; n];
        let x = sys.solve(&b).unwrap();
        let ax = mul_vec(sys.matrix(), &x);
        for i in 0..n {
            assert!((ax[i] - b[i]).abs() < 1e-12);
        }
    }

    #[test]
    fn duplicate_triplets_accumulate() {
        let t = vec![(0, 0, 1.0), (0, 0, 1.0), (1, 1, 2.0)];
        let sys = SymmetricSystem::from_triplets(2, &t).unwrap();
        let x = sys.solve(&[2.0, 2.0]).unwrap();
        assert!((x[0] - 1.0).abs() < 1e-14);
        assert!((x[1] - 1.0).abs() < 1e-14);
    }
}
