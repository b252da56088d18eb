//! Operators acting on a subset of an assembly's subsystems.
//!
//! A [`LocalOperator`] stores a dense matrix on the tensor product of its
//! target subsystems (in the listed order, left-major) and applies it to a
//! joint state without ever forming the joint matrix. The joint matrix can
//! still be materialized for small layouts.

use crate::error::{Error, Result};
use crate::linalg::{unitarity_defect, CMatrix, CVector, C64};

/// Largest joint dimension for which [`LocalOperator::to_dense`] is allowed.
pub const DENSE_MATRIX_LIMIT: usize = 4096;

#[derive(Clone, Debug, PartialEq)]
pub struct LocalOperator {
    layout: Vec<usize>,
    targets: Vec<usize>,
    matrix: CMatrix,
}

fn strides(layout: &[usize]) -> Vec<usize> {
    let mut s = vec![1usize; layout.len()];
    for i in (0..layout.len().saturating_sub(1)).rev() {
        s[i] = s[i + 1] * layout[i + 1];
    }
    s
}

/// Offsets into the joint vector for every multi-index over `positions`.
fn offsets(layout: &[usize], strides: &[usize], positions: &[usize]) -> Vec<usize> {
    let mut out = vec![0usize];
    for &p in positions {
        let mut next = Vec::with_capacity(out.len() * layout[p]);
        for &base in &out {
            for digit in 0..layout[p] {
                next.push(base + digit * strides[p]);
            }
        }
        out = next;
    }
    out
}

impl LocalOperator {
    pub fn new(layout: Vec<usize>, targets: Vec<usize>, matrix: CMatrix) -> Result<Self> {
        if targets.is_empty() {
            return Err(Error::invalid("operator needs at least one target"));
        }
        for (i, &t) in targets.iter().enumerate() {
            if t >= layout.len() {
                return Err(Error::invalid(format!("target {t} outside layout")));
            }
            if targets[..i].contains(&t) {
                return Err(Error::invalid(format!("target {t} listed twice")));
            }
        }
        let local: usize = targets.iter().map(|&t| layout[t]).product();
        if matrix.shape() != (local, local) {
            return Err(Error::DimensionMismatch {
                expected: local,
                actual: matrix.nrows(),
            });
        }
        Ok(LocalOperator {
            layout,
            targets,
            matrix,
        })
    }

    pub fn layout(&self) -> &[usize] {
        &self.layout
    }

    pub fn targets(&self) -> &[usize] {
        &self.targets
    }

    pub fn local_matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn total_dim(&self) -> usize {
        self.layout.iter().product()
    }

    /// `max |M^H M - I|` of the local matrix, which equals that of the joint operator.
    pub fn unitarity_defect(&self) -> f64 {
        unitarity_defect(&self.matrix)
    }

    pub fn apply(&self, x: &CVector) -> Result<CVector> {
        let total = self.total_dim();
        if x.len() != total {
            return Err(Error::DimensionMismatch {
                expected: total,
                actual: x.len(),
            });
        }
        let st = strides(&self.layout);
        let local = offsets(&self.layout, &st, &self.targets);
        let rest_positions: Vec<usize> = (0..self.layout.len())
            .filter(|p| !self.targets.contains(p))
            .collect();
        let rest = offsets(&self.layout, &st, &rest_positions);

        let n = local.len();
        let mut y = CVector::zeros(total);
        let mut buf = CVector::zeros(n);
        let mut out = CVector::zeros(n);
        for &base in &rest {
            for (l, &off) in local.iter().enumerate() {
                buf[l] = x[base + off];
            }
            out.gemv(C64::new(1.0, 0.0), &self.matrix, &buf, C64::new(0.0, 0.0));
            for (l, &off) in local.iter().enumerate() {
                y[base + off] = out[l];
            }
        }
        Ok(y)
    }

    /// Joint matrix on the whole layout.
    pub fn to_dense(&self) -> Result<CMatrix> {
        let total = self.total_dim();
        if total > DENSE_MATRIX_LIMIT {
            return Err(Error::BudgetExceeded {
                dim: total,
                budget: DENSE_MATRIX_LIMIT,
            });
        }
        let mut m = CMatrix::zeros(total, total);
        let mut e = CVector::zeros(total);
        for c in 0..total {
            e[c] = C64::new(1.0, 0.0);
            let col = self.apply(&e)?;
            m.set_column(c, &col);
            e[c] = C64::new(0.0, 0.0);
        }
        Ok(m)
    }

    /// The operator "apply `self`, then `next`" as one local operator on the
    /// union of both target lists.
    pub fn then(&self, next: &LocalOperator) -> Result<LocalOperator> {
        if self.layout != next.layout {
            return Err(Error::invalid("operators act on different layouts"));
        }
        let mut union = self.targets.clone();
        for &t in &next.targets {
            if !union.contains(&t) {
                union.push(t);
            }
        }
        let sub_layout: Vec<usize> = union.iter().map(|&t| self.layout[t]).collect();
        let relocate = |op: &LocalOperator| -> Result<LocalOperator> {
            let targets = op
                .targets
                .iter()
                .map(|t| union.iter().position(|u| u == t).expect("target in union"))
                .collect();
            LocalOperator::new(sub_layout.clone(), targets, op.matrix.clone())
        };
        let first = relocate(self)?;
        let second = relocate(next)?;
        let dim: usize = sub_layout.iter().product();
        let mut m = CMatrix::zeros(dim, dim);
        let mut e = CVector::zeros(dim);
        for c in 0..dim {
            e[c] = C64::new(1.0, 0.0);
            let col = second.apply(&first.apply(&e)?)?;
            m.set_column(c, &col);
            e[c] = C64::new(0.0, 0.0);
        }
        LocalOperator::new(self.layout.clone(), union, m)
    }
}
