//! Small dense helpers and a thin wrapper over the sparse direct solver.

use faer::linalg::solvers::Solve;
use faer::sparse::linalg::solvers::{Lu, SymbolicLu};
use faer::sparse::{SparseColMat, Triplet};
use faer::Mat;
use nalgebra::{Matrix3, Vector3};
use std::collections::hash_map::DefaultHasher;
use std::hash::{Hash, Hasher};

use crate::error::{Error, Result};

/// Cross-product matrix: `skew(a) * b == a.cross(&b)`.
pub fn skew(a: &Vector3<f64>) -> Matrix3<f64> {
    Matrix3::new(0.0, -a.z, a.y, a.z, 0.0, -a.x, -a.y, a.x, 0.0)
}

/// Rotation about the z axis.
pub fn rot_z(theta: f64) -> Matrix3<f64> {
    let (s, c) = theta.sin_cos();
    Matrix3::new(c, -s, 0.0, s, c, 0.0, 0.0, 0.0, 1.0)
}

/// Triplet accumulator for a square sparse matrix.
#[derive(Debug, Clone, Default)]
pub struct SparseBuilder {
    n: usize,
    entries: Vec<Triplet<usize, usize, f64>>,
}

impl SparseBuilder {
    pub fn new(n: usize) -> Self {
        Self { n, entries: Vec::with_capacity(16 * n) }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    /// Adds `v` at `(r, c)`; duplicates are summed. Zeros are kept so the
    /// sparsity pattern depends only on the assembly code path.
    #[inline]
    pub fn add(&mut self, r: usize, c: usize, v: f64) {
        debug_assert!(r < self.n && c < self.n);
        self.entries.push(Triplet::new(r, c, v));
    }

    /// Copy embedded in a larger square matrix.
    pub fn with_dim(&self, n: usize) -> Self {
        assert!(n >= self.n, "cannot shrink a sparse builder");
        Self { n, entries: self.entries.clone() }
    }

    pub fn build(&self) -> Result<SparseMatrix> {
        let m = SparseColMat::<usize, f64>::try_new_from_triplets(self.n, self.n, &self.entries)
            .map_err(|e| Error::Solver(format!("matrix assembly: {e:?}")))?;
        Ok(SparseMatrix { m })
    }
}

/// Assembled sparse matrix.
#[derive(Debug, Clone)]
pub struct SparseMatrix {
    m: SparseColMat<usize, f64>,
}

impl SparseMatrix {
    pub fn dim(&self) -> usize {
        self.m.nrows()
    }

    /// `y = A x`.
    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; self.m.nrows()];
        let cp = self.m.symbolic().col_ptr();
        let ri = self.m.symbolic().row_idx();
        let vals = self.m.val();
        for (j, xj) in x.iter().enumerate() {
            for k in cp[j]..cp[j + 1] {
                y[ri[k]] += vals[k] * xj;
            }
        }
        y
    }

    /// Hash of the sparsity pattern, used to reuse symbolic factorizations.
    pub fn pattern_key(&self) -> u64 {
        let mut h = DefaultHasher::new();
        self.m.nrows().hash(&mut h);
        self.m.symbolic().col_ptr().hash(&mut h);
        self.m.symbolic().row_idx().hash(&mut h);
        h.finish()
    }

    /// Relative residual `|A x - b|_inf / max(|b|_inf, |A|_inf |x|_inf)`.
    pub fn relative_residual(&self, x: &[f64], b: &[f64]) -> f64 {
        let ax = self.mul_vec(x);
        let r = ax.iter().zip(b).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        let scale_b = b.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
        let scale_ax = ax.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
        let s = scale_b.max(scale_ax);
        if s == 0.0 {
            r
        } else {
            r / s
        }
    }
}

/// A factorized sparse matrix ready for repeated solves.
pub struct Factorization {
    matrix: SparseMatrix,
    lu: Lu<usize, f64>,
}

impl std::fmt::Debug for Factorization {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Factorization").field("dim", &self.matrix.dim()).finish()
    }
}

/// Relative residual above which a solve is reported as failed.
pub const RESIDUAL_TOL: f64 = 1e-10;

impl Factorization {
    pub fn new(matrix: SparseMatrix) -> Result<Self> {
        let lu = matrix
            .m
            .sp_lu()
            .map_err(|e| Error::Solver(format!("sparse LU failed: {e:?}")))?;
        Ok(Self { matrix, lu })
    }

    /// Factorizes reusing a symbolic analysis of an identical pattern.
    pub fn with_symbolic(matrix: SparseMatrix, symbolic: &mut SymbolicCache) -> Result<Self> {
        let key = matrix.pattern_key();
        let sym = match symbolic.entries.iter().find(|(k, _)| *k == key) {
            Some((_, s)) => s.clone(),
            None => {
                let s = SymbolicLu::try_new(matrix.m.symbolic())
                    .map_err(|e| Error::Solver(format!("symbolic LU failed: {e:?}")))?;
                if symbolic.entries.len() >= 8 {
                    symbolic.entries.remove(0);
                }
                symbolic.entries.push((key, s.clone()));
                s
            }
        };
        let lu = Lu::try_new_with_symbolic(sym, matrix.m.as_ref())
            .map_err(|e| Error::Solver(format!("sparse LU failed: {e:?}")))?;
        Ok(Self { matrix, lu })
    }

    pub fn matrix(&self) -> &SparseMatrix {
        &self.matrix
    }

    /// Solves without checking the residual.
    pub fn solve_unchecked(&self, b: &[f64]) -> Vec<f64> {
        let n = b.len();
        let rhs = Mat::<f64>::from_fn(n, 1, |i, _| b[i]);
        let x = self.lu.solve(&rhs);
        (0..n).map(|i| x[(i, 0)]).collect()
    }

    /// Solves and checks the relative residual against [`RESIDUAL_TOL`],
    /// with up to two steps of iterative refinement.
    pub fn solve(&self, b: &[f64]) -> Result<Vec<f64>> {
        let mut x = self.solve_unchecked(b);
        if x.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("linear solve".into()));
        }
        let mut r = self.matrix.relative_residual(&x, b);
        for _ in 0..2 {
            if r <= RESIDUAL_TOL {
                break;
            }
            let ax = self.matrix.mul_vec(&x);
            let res: Vec<f64> = b.iter().zip(&ax).map(|(b, a)| b - a).collect();
            let dx = self.solve_unchecked(&res);
            let cand: Vec<f64> = x.iter().zip(&dx).map(|(x, d)| x + d).collect();
            let rc = self.matrix.relative_residual(&cand, b);
            if !(rc < r) {
                break;
            }
            x = cand;
            r = rc;
        }
        if r > RESIDUAL_TOL {
            return Err(Error::Solver(format!("relative residual {r:e} exceeds {RESIDUAL_TOL:e}")));
        }
        Ok(x)
    }
}

/// Symbolic factorizations keyed by sparsity pattern.
#[derive(Default, Clone)]
pub struct SymbolicCache {
    entries: Vec<(u64, SymbolicLu<usize>)>,
}

impl std::fmt::Debug for SymbolicCache {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("SymbolicCache").field("len", &self.entries.len()).finish()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn skew_matches_cross() {
        let a = Vector3::new(1.0, -2.0, 0.5);
        let b = Vector3::new(0.3, 4.0, -1.0);
        assert!((skew(&a) * b - a.cross(&b)).norm() < 1e-15);
    }

    #[test]
    fn solves_small_system() {
        let mut sb = SparseBuilder::new(3);
        for (r, c, v) in [(0, 0, 4.0), (0, 1, 1.0), (1, 0, 1.0), (1, 1, 3.0), (2, 2, 2.0), (2, 0, 1.0)] {
            sb.add(r, c, v);
        }
        let f = Factorization::new(sb.build().unwrap()).unwrap();
        let x = f.solve(&[1.0, 2.0, 3.0]).unwrap();
        let ax = f.matrix().mul_vec(&x);
        for (a, b) in ax.iter().zip([1.0, 2.0, 3.0]) {
            assert!((a - b).abs() < 1e-14);
        }
        let mut cache = SymbolicCache::default();
        let g = Factorization::with_symbolic(f.matrix().clone(), &mut cache).unwrap();
        let y = g.solve(&[1.0, 2.0, 3.0]).unwrap();
        assert_eq!(x.len(), y.len());
    }
}
