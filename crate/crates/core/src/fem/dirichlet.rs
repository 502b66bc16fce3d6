//! Essential boundary conditions by row replacement and column elimination.

use crate::error::{invalid, Error, Result};
use crate::fem::sparse::{SparseMatrix, Triplets};

/// Records which columns were eliminated from a system so the matching
/// right-hand side correction can be applied at every time step without
/// touching the matrix again.
#[derive(Debug, Clone)]
pub struct DirichletElimination {
    dofs: Vec<usize>,
    mask: Vec<bool>,
    /// Entry `(i, k)` holds `A[i, dofs[k]]` for free rows `i`.
    coupling: SparseMatrix,
}

impl DirichletElimination {
    /// Returns the reduced matrix: constrained rows become identity rows and
    /// constrained columns are zeroed in the free rows.
    pub fn new(a: &SparseMatrix, dofs: &[usize]) -> Result<(SparseMatrix, Self)> {
        let n = a.nrows();
        if a.ncols() != n {
            return invalid("Dirichlet elimination needs a square matrix");
        }
        let mut mask = vec![false; n];
        let mut slot = vec![usize::MAX; n];
        for (k, &d) in dofs.iter().enumerate() {
            if d >= n {
                return invalid(format!("constrained index {d} out of range {n}"));
            }
            if mask[d] {
                return invalid(format!("constrained index {d} listed twice"));
            }
            mask[d] = true;
            slot[d] = k;
        }
        let mut reduced = Triplets::new(n, n);
        let mut coupling = Triplets::new(n, dofs.len());
        for i in 0..n {
            if mask[i] {
                reduced.push(i, i, 1.0);
                continue;
            }
            let (cols, vals) = a.row(i);
            for (&j, &v) in cols.iter().zip(vals) {
                if mask[j] {
                    coupling.push(i, slot[j], v);
                } else {
                    reduced.push(i, j, v);
                }
            }
        }
        Ok((
            reduced.into_csr(),
            Self {
                dofs: dofs.to_vec(),
                mask,
                coupling: coupling.into_csr(),
            },
        ))
    }

    pub fn dofs(&self) -> &[usize] {
        &self.dofs
    }

    pub fn is_constrained(&self, i: usize) -> bool {
        self.mask[i]
    }

    /// Moves the known columns to the right-hand side and writes the
    /// prescribed values into the constrained rows. `values[k]` belongs to
    /// `dofs()[k]`.
    pub fn apply_rhs(&self, rhs: &mut [f64], values: &[f64]) -> Result<()> {
        if rhs.len() != self.mask.len() {
            return Err(Error::DimensionMismatch {
                expected: self.mask.len(),
                got: rhs.len(),
            });
        }
        if values.len() != self.dofs.len() {
            return Err(Error::DimensionMismatch {
                expected: self.dofs.len(),
                got: values.len(),
            });
        }
        self.coupling.matvec_add(values, -1.0, rhs);
        for (&d, &v) in self.dofs.iter().zip(values) {
            rhs[d] = v;
        }
        Ok(())
    }
}

/// One-shot form of [`DirichletElimination`]: returns the modified matrix
/// and updates `rhs` in place.
pub fn apply_dirichlet(
    a: &SparseMatrix,
    rhs: &mut [f64],
    dofs: &[usize],
    values: &[f64],
) -> Result<SparseMatrix> {
    let (reduced, elim) = DirichletElimination::new(a, dofs)?;
    elim.apply_rhs(rhs, values)?;
    Ok(reduced)
}
