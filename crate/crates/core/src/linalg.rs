//! Sparse direct solves backed by faer's supernodal LU.

use std::sync::Once;

use faer::linalg::solvers::Solve;
use faer::sparse::linalg::LuError;
use faer::sparse::{SparseColMat, Triplet};
use faer::Mat;

use crate::error::{Error, Result};
use crate::fem::sparse::{norm_inf, SparseMatrix};

/// Relative residual bound every solve must meet.
pub const RESIDUAL_TOL: f64 = 1e-10;

static SEQUENTIAL: Once = Once::new();

/// A reusable factorization of a square sparse matrix. Solves only read the
/// factors, so one value may be shared between threads.
pub struct Factorization {
    matrix: SparseMatrix,
    lu: faer::sparse::linalg::solvers::Lu<usize, f64>,
    norm: f64,
}

impl std::fmt::Debug for Factorization {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Factorization")
            .field("n", &self.matrix.nrows())
            .field("nnz", &self.matrix.nnz())
            .finish()
    }
}

/// Factorizes `a`. Fails with [`Error::SingularMatrix`] when the matrix is
/// structurally or numerically singular.
pub fn factorize(a: &SparseMatrix) -> Result<Factorization> {
    // faer's parallel kernels do not promise bitwise reproducible sums
    SEQUENTIAL.call_once(|| faer::set_global_parallelism(faer::Par::Seq));
    let n = a.nrows();
    if a.ncols() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: a.ncols(),
        });
    }
    if a.values().iter().any(|v| !v.is_finite()) {
        return Err(Error::Solver("matrix has non-finite entries".into()));
    }
    let trips: Vec<Triplet<usize, usize, f64>> =
        a.iter().map(|(i, j, v)| Triplet::new(i, j, v)).collect();
    let csc = SparseColMat::<usize, f64>::try_new_from_triplets(n, n, &trips)
        .map_err(|e| Error::Solver(format!("{e:?}")))?;
    let lu = csc.sp_lu().map_err(|e| match e {
        LuError::SymbolicSingular { index } => Error::SingularMatrix { pivot: index },
        LuError::Generic(g) => Error::Solver(format!("{g:?}")),
    })?;
    let f = Factorization {
        matrix: a.clone(),
        lu,
        norm: a.norm_inf(),
    };
    // The LU does not report zero pivots, they surface as inf/NaN. A probe
    // solve with a known answer catches both exact and numerical singularity.
    if n > 0 {
        let ones = vec![1.0; n];
        let b = a.matvec(&ones);
        match f.solve(&b) {
            Ok(_) => {}
            Err(Error::Solver(msg)) => {
                return Err(Error::Solver(format!("matrix is numerically singular: {msg}")))
            }
            Err(e) => return Err(e),
        }
    }
    Ok(f)
}

impl Factorization {
    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> &SparseMatrix {
        &self.matrix
    }

    fn raw_solve(&self, b: &[f64]) -> Result<Vec<f64>> {
        let mut m = Mat::<f64>::from_fn(b.len(), 1, |i, _| b[i]);
        self.lu.solve_in_place(m.as_mut());
        let x: Vec<f64> = (0..b.len()).map(|i| m[(i, 0)]).collect();
        if let Some(pivot) = x.iter().position(|v| !v.is_finite()) {
            return Err(Error::SingularMatrix { pivot });
        }
        Ok(x)
    }

    fn residual(&self, x: &[f64], b: &[f64]) -> (Vec<f64>, bool) {
        let mut r = b.to_vec();
        self.matrix.matvec_add(x, -1.0, &mut r);
        let ok = norm_inf(&r) <= RESIDUAL_TOL * (self.norm * norm_inf(x) + norm_inf(b));
        (r, ok)
    }

    /// Solves `A x = b`, refining once when the first residual misses
    /// [`RESIDUAL_TOL`].
    pub fn solve(&self, b: &[f64]) -> Result<Vec<f64>> {
        if b.len() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                got: b.len(),
            });
        }
        let mut x = self.raw_solve(b)?;
        let (r, ok) = self.residual(&x, b);
        if ok {
            return Ok(x);
        }
        let dx = self.raw_solve(&r)?;
        x.iter_mut().zip(&dx).for_each(|(a, d)| *a += d);
        let (r, ok) = self.residual(&x, b);
        if !ok {
            return Err(Error::Solver(format!(
                "residual {:.3e} above tolerance after refinement",
                norm_inf(&r)
            )));
        }
        Ok(x)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fem::{apply_dirichlet, assemble_scalar_stiffness, Degree, DofMap, Field};
    use crate::mesh::{build_rect_mesh, Region};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn identity_returns_rhs() {
        let f = factorize(&SparseMatrix::identity(5)).unwrap();
        let b = vec![1.0, -2.0, 3.5, 0.0, 7.0];
        assert_eq!(f.solve(&b).unwrap(), b);
    }

    #[test]
    fn permutation_needs_pivoting() {
        let a = SparseMatrix::from_dense(&[vec![0.0, 1.0], vec![1.0, 0.0]]);
        let f = factorize(&a).unwrap();
        assert_eq!(f.solve(&[1.0, 2.0]).unwrap(), vec![2.0, 1.0]);
    }

    #[test]
    fn singular_matrices_fail() {
        let a = SparseMatrix::from_dense(&[vec![1.0, 0.0], vec![0.0, 0.0]]);
        assert!(matches!(factorize(&a), Err(Error::SingularMatrix { .. }) | Err(Error::Solver(_))));
        let b = SparseMatrix::from_dense(&[vec![1.0, 2.0], vec![2.0, 4.0]]);
        assert!(factorize(&b).is_err());
        let empty_row = SparseMatrix::from_dense(&[vec![1.0, 1.0], vec![0.0, 0.0]]);
        assert!(factorize(&empty_row).is_err());
    }

    #[test]
    fn dimension_mismatch() {
        let f = factorize(&SparseMatrix::identity(3)).unwrap();
        assert!(matches!(f.solve(&[1.0]), Err(Error::DimensionMismatch { .. })));
    }

    #[test]
    fn stiffness_with_dirichlet_row() {
        let m = build_rect_mesh(4, Region::Poro).unwrap();
        let d = DofMap::new(&m, Field::PorePressure, Degree::P1, 1, false);
        let k = assemble_scalar_stiffness(&m, &d, [[1.0, 0.0], [0.0, 1.0]]).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let mut b: Vec<f64> = (0..d.len()).map(|_| rng.random_range(-1.0..1.0)).collect();
        let a = apply_dirichlet(&k, &mut b, &[0], &[0.0]).unwrap();
        let f = factorize(&a).unwrap();
        let x = f.solve(&b).unwrap();
        let mut r = b.clone();
        a.matvec_add(&x, -1.0, &mut r);
        assert!(norm_inf(&r) <= 1e-12 * (a.norm_inf() * norm_inf(&x) + norm_inf(&b)));

        let xs: Vec<f64> = (0..d.len()).map(|i| if i == 0 { 0.0 } else { (i as f64).sin() }).collect();
        let y = f.solve(&a.matvec(&xs)).unwrap();
        for (u, v) in xs.iter().zip(&y) {
            assert!((u - v).abs() <= 1e-10 * norm_inf(&xs));
        }
    }

    #[test]
    fn repeat_and_threaded_solves_agree() {
        let m = build_rect_mesh(6, Region::Fluid).unwrap();
        let d = DofMap::new(&m, Field::FluidPressure, Degree::P1, 1, false);
        let k = assemble_scalar_stiffness(&m, &d, [[2.0, 0.3], [0.3, 1.0]]).unwrap();
        let mut b: Vec<f64> = (0..d.len()).map(|i| (i as f64 * 0.37).cos()).collect();
        let a = apply_dirichlet(&k, &mut b, &[0, 5], &[1.0, -1.0]).unwrap();
        let f = factorize(&a).unwrap();
        let x1 = f.solve(&b).unwrap();
        let x2 = f.solve(&b).unwrap();
        assert_eq!(x1, x2);
        let (y1, y2) = std::thread::scope(|s| {
            let h1 = s.spawn(|| f.solve(&b).unwrap());
            let h2 = s.spawn(|| f.solve(&b).unwrap());
            (h1.join().unwrap(), h2.join().unwrap())
        });
        assert_eq!(x1, y1);
        assert_eq!(x1, y2);
        let g = factorize(&a).unwrap();
        assert_eq!(g.solve(&b).unwrap(), x1);
    }
}
