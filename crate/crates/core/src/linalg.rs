//! Complex linear algebra substrate.
//!
//! Vectors and matrices are `nalgebra` dense types over `Complex64`.
//! Tensor products use a left-major convention throughout the crate: in
//! `u ⊗ v` the index of `u` is the slow one, so `(u ⊗ v)[i * dim(v) + j] =
//! u[i] * v[j]`.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::seed;

pub type C64 = Complex64;
pub type CMatrix = DMatrix<C64>;
pub type CVector = DVector<C64>;

/// Tolerance on `F^H F - I` for frames and isometries.
pub const ORTHONORMAL_TOL: f64 = 1e-10;
/// Tolerance on `|norm² - 1|` for vectors flagged as normalized.
pub const NORMALIZED_TOL: f64 = 1e-10;
/// Tolerance on projector hermiticity and idempotence.
pub const PROJECTOR_TOL: f64 = 1e-10;
/// Tolerance on projector trace being an integer.
pub const TRACE_TOL: f64 = 1e-8;

/// A labeled Hilbert space of fixed dimension.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SpaceLabel {
    id: String,
    dim: usize,
}

impl SpaceLabel {
    pub fn new(id: impl Into<String>, dim: usize) -> Result<Self> {
        if dim == 0 {
            return Err(Error::invalid("space dimension must be at least 1"));
        }
        Ok(SpaceLabel { id: id.into(), dim })
    }

    pub fn id(&self) -> &str {
        &self.id
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Label of `self ⊗ other`.
    pub fn tensor(&self, other: &SpaceLabel) -> SpaceLabel {
        SpaceLabel {
            id: format!("{}⊗{}", self.id, other.id),
            dim: self.dim * other.dim,
        }
    }

    pub(crate) fn ensure_same(&self, other: &SpaceLabel) -> Result<()> {
        if self.dim != other.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                actual: other.dim,
            });
        }
        if self.id != other.id {
            return Err(Error::SpaceMismatch {
                left: self.id.clone(),
                right: other.id.clone(),
            });
        }
        Ok(())
    }
}

/// A vector of complex amplitudes in a labeled space.
#[derive(Clone, Debug, PartialEq)]
pub struct StateVector {
    space: SpaceLabel,
    amplitudes: CVector,
}

impl StateVector {
    pub fn new(space: SpaceLabel, amplitudes: CVector) -> Result<Self> {
        if amplitudes.len() != space.dim {
            return Err(Error::DimensionMismatch {
                expected: space.dim,
                actual: amplitudes.len(),
            });
        }
        if amplitudes.iter().any(|a| !a.re.is_finite() || !a.im.is_finite()) {
            return Err(Error::invalid("amplitudes must be finite"));
        }
        Ok(StateVector { space, amplitudes })
    }

    pub fn from_slice(space: SpaceLabel, amplitudes: &[C64]) -> Result<Self> {
        Self::new(space, CVector::from_column_slice(amplitudes))
    }

    pub fn zeros(space: SpaceLabel) -> Self {
        let amplitudes = CVector::zeros(space.dim);
        StateVector { space, amplitudes }
    }

    /// Computational basis vector `e_index`.
    pub fn basis(space: SpaceLabel, index: usize) -> Result<Self> {
        if index >= space.dim {
            return Err(Error::invalid(format!(
                "basis index {index} out of range for dimension {}",
                space.dim
            )));
        }
        let mut v = Self::zeros(space);
        v.amplitudes[index] = C64::new(1.0, 0.0);
        Ok(v)
    }

    pub fn space(&self) -> &SpaceLabel {
        &self.space
    }

    pub fn dim(&self) -> usize {
        self.space.dim
    }

    pub fn amplitudes(&self) -> &CVector {
        &self.amplitudes
    }

    pub fn into_amplitudes(self) -> CVector {
        self.amplitudes
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes.iter().map(|a| a.norm_sqr()).sum()
    }

    pub fn norm(&self) -> f64 {
        self.norm_sqr().sqrt()
    }

    pub fn is_normalized(&self) -> bool {
        (self.norm_sqr() - 1.0).abs() <= NORMALIZED_TOL
    }

    pub fn normalized(&self) -> Result<Self> {
        let n = self.norm();
        if n == 0.0 {
            return Err(Error::invalid("cannot normalize the zero vector"));
        }
        Ok(self.scaled(C64::new(1.0 / n, 0.0)))
    }

    pub fn scaled(&self, factor: C64) -> Self {
        StateVector {
            space: self.space.clone(),
            amplitudes: &self.amplitudes * factor,
        }
    }

    /// `self + other`, both in the same space.
    pub fn add(&self, other: &StateVector) -> Result<Self> {
        self.space.ensure_same(&other.space)?;
        Ok(StateVector {
            space: self.space.clone(),
            amplitudes: &self.amplitudes + &other.amplitudes,
        })
    }

    pub fn sub(&self, other: &StateVector) -> Result<Self> {
        self.space.ensure_same(&other.space)?;
        Ok(StateVector {
            space: self.space.clone(),
            amplitudes: &self.amplitudes - &other.amplitudes,
        })
    }

    /// Reinterpret the amplitudes in another space of the same dimension.
    pub fn relabel(self, space: SpaceLabel) -> Result<Self> {
        Self::new(space, self.amplitudes)
    }
}

/// `⟨u|v⟩`, conjugate-linear in `u`.
pub fn inner_product(u: &StateVector, v: &StateVector) -> Result<C64> {
    u.space.ensure_same(&v.space)?;
    Ok(u.amplitudes.dotc(&v.amplitudes))
}

/// `u ⊗ v` with `u` as the major index.
pub fn tensor_product(u: &StateVector, v: &StateVector) -> StateVector {
    StateVector {
        space: u.space.tensor(&v.space),
        amplitudes: u.amplitudes.kronecker(&v.amplitudes),
    }
}

pub(crate) fn complex_gaussian<R: Rng + ?Sized>(rng: &mut R) -> C64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    C64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
}

/// Matrix of i.i.d. standard complex Gaussians, filled column by column.
pub fn gaussian_matrix<R: Rng + ?Sized>(rows: usize, cols: usize, rng: &mut R) -> CMatrix {
    CMatrix::from_fn(rows, cols, |_, _| complex_gaussian(rng))
}

/// Haar-like random unit vector: complex Gaussian components, normalized.
pub fn random_state(space: &SpaceLabel, seed: u64) -> StateVector {
    let mut rng = seed::rng(seed);
    random_state_with(space, &mut rng)
}

pub(crate) fn random_state_with<R: Rng + ?Sized>(space: &SpaceLabel, rng: &mut R) -> StateVector {
    loop {
        let amplitudes = CVector::from_fn(space.dim, |_, _| complex_gaussian(rng));
        let n = amplitudes.norm();
        if n > 0.0 {
            return StateVector {
                space: space.clone(),
                amplitudes: amplitudes.unscale(n),
            };
        }
    }
}

/// Orthonormalize the columns of a full-column-rank matrix.
///
/// The QR factor is corrected by the phases of `diag(R)`, which makes the
/// result Haar-distributed when the input is complex Gaussian.
pub fn orthonormalize(m: CMatrix) -> CMatrix {
    let (rows, cols) = m.shape();
    assert!(cols <= rows, "cannot orthonormalize {cols} columns in dimension {rows}");
    let qr = m.qr();
    let r = qr.r();
    let mut q = qr.q();
    for j in 0..cols {
        let d = r[(j, j)];
        let n = d.norm();
        if n > 0.0 {
            let phase = d / n;
            for i in 0..rows {
                q[(i, j)] *= phase;
            }
        }
    }
    q
}

/// Haar-random `n × n` unitary.
pub fn random_unitary(n: usize, seed: u64) -> CMatrix {
    let mut rng = seed::rng(seed);
    orthonormalize(gaussian_matrix(n, n, &mut rng))
}

/// Largest entry magnitude of `M^H M - I`.
pub fn unitarity_defect(m: &CMatrix) -> f64 {
    let g = m.adjoint() * m;
    max_abs_diff_identity(&g)
}

pub(crate) fn max_abs_diff_identity(g: &CMatrix) -> f64 {
    let mut worst = 0.0f64;
    for j in 0..g.ncols() {
        for i in 0..g.nrows() {
            let target = if i == j { 1.0 } else { 0.0 };
            worst = worst.max((g[(i, j)] - C64::new(target, 0.0)).norm());
        }
    }
    worst
}

pub fn max_abs_entry(m: &CMatrix) -> f64 {
    m.iter().fold(0.0f64, |acc, z| acc.max(z.norm()))
}

/// Spectral norm (largest singular value).
pub fn operator_norm(m: &CMatrix) -> f64 {
    m.clone()
        .svd(false, false)
        .singular_values
        .iter()
        .fold(0.0f64, |a, &s| a.max(s))
}

pub fn kron(a: &CMatrix, b: &CMatrix) -> CMatrix {
    a.kronecker(b)
}

/// A subspace stored as a frame of orthonormal columns.
#[derive(Clone, Debug, PartialEq)]
pub struct Subspace {
    ambient: SpaceLabel,
    frame: CMatrix,
}

impl Subspace {
    pub fn new(ambient: SpaceLabel, frame: CMatrix) -> Result<Self> {
        if frame.nrows() != ambient.dim {
            return Err(Error::DimensionMismatch {
                expected: ambient.dim,
                actual: frame.nrows(),
            });
        }
        if frame.ncols() == 0 || frame.ncols() > ambient.dim {
            return Err(Error::invalid(format!(
                "subspace dimension {} not in 1..={}",
                frame.ncols(),
                ambient.dim
            )));
        }
        let defect = unitarity_defect(&frame);
        if defect > ORTHONORMAL_TOL {
            return Err(Error::NotOrthonormal { defect });
        }
        Ok(Subspace { ambient, frame })
    }

    /// Span of the given computational basis vectors.
    pub fn coordinate(ambient: SpaceLabel, indices: &[usize]) -> Result<Self> {
        let mut frame = CMatrix::zeros(ambient.dim, indices.len());
        for (col, &i) in indices.iter().enumerate() {
            if i >= ambient.dim {
                return Err(Error::invalid(format!(
                    "basis index {i} out of range for dimension {}",
                    ambient.dim
                )));
            }
            frame[(i, col)] = C64::new(1.0, 0.0);
        }
        Self::new(ambient, frame)
    }

    /// Span of `len` consecutive basis vectors starting at `start`.
    pub fn block(ambient: SpaceLabel, start: usize, len: usize) -> Result<Self> {
        let indices: Vec<usize> = (start..start + len).collect();
        Self::coordinate(ambient, &indices)
    }

    /// Span of the given vectors, which must already be orthonormal.
    pub fn from_vectors(ambient: SpaceLabel, vectors: &[CVector]) -> Result<Self> {
        if vectors.is_empty() {
            return Err(Error::invalid("subspace needs at least one vector"));
        }
        let frame = CMatrix::from_columns(vectors);
        Self::new(ambient, frame)
    }

    /// Haar-like random `k`-dimensional subspace.
    pub fn random(ambient: SpaceLabel, k: usize, seed: u64) -> Result<Self> {
        if k == 0 || k > ambient.dim {
            return Err(Error::invalid(format!(
                "subspace dimension {k} not in 1..={}",
                ambient.dim
            )));
        }
        let mut rng = seed::rng(seed);
        let frame = orthonormalize(gaussian_matrix(ambient.dim, k, &mut rng));
        Self::new(ambient, frame)
    }

    pub fn ambient(&self) -> &SpaceLabel {
        &self.ambient
    }

    pub fn dim(&self) -> usize {
        self.frame.ncols()
    }

    pub fn frame(&self) -> &CMatrix {
        &self.frame
    }

    /// `U · frame` for a unitary `U` on the ambient space.
    pub fn rotated(&self, unitary: &CMatrix) -> Result<Self> {
        Self::new(self.ambient.clone(), unitary * &self.frame)
    }

    /// Ambient vector with the given frame coordinates.
    pub fn embed(&self, coords: &CVector) -> Result<StateVector> {
        if coords.len() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                actual: coords.len(),
            });
        }
        StateVector::new(self.ambient.clone(), &self.frame * coords)
    }

    /// Random unit vector inside the subspace.
    pub fn random_member(&self, seed: u64) -> StateVector {
        let mut rng = seed::rng(seed);
        self.random_member_with(&mut rng)
    }

    pub(crate) fn random_member_with<R: Rng + ?Sized>(&self, rng: &mut R) -> StateVector {
        let coords = CVector::from_fn(self.dim(), |_, _| complex_gaussian(rng));
        let n = coords.norm();
        let v = &self.frame * coords.unscale(n);
        StateVector {
            space: self.ambient.clone(),
            amplitudes: v,
        }
    }

    /// Frame coordinates `F^H v`.
    pub fn coordinates(&self, v: &StateVector) -> Result<CVector> {
        self.ambient.ensure_same(&v.space)?;
        Ok(self.frame.adjoint() * &v.amplitudes)
    }
}

/// An orthogonal projector on a labeled space.
#[derive(Clone, Debug, PartialEq)]
pub struct Projector {
    ambient: SpaceLabel,
    matrix: CMatrix,
    rank: usize,
}

impl Projector {
    pub fn new(ambient: SpaceLabel, matrix: CMatrix) -> Result<Self> {
        let n = ambient.dim;
        if matrix.shape() != (n, n) {
            return Err(Error::DimensionMismatch {
                expected: n,
                actual: matrix.nrows(),
            });
        }
        let herm = max_abs_entry(&(&matrix - matrix.adjoint()));
        if herm > PROJECTOR_TOL {
            return Err(Error::invalid(format!("projector is not Hermitian ({herm:e})")));
        }
        let idem = max_abs_entry(&(&matrix * &matrix - &matrix));
        if idem > PROJECTOR_TOL {
            return Err(Error::invalid(format!("projector is not idempotent ({idem:e})")));
        }
        let trace = matrix.trace().re;
        let rank = trace.round();
        if (trace - rank).abs() > TRACE_TOL {
            return Err(Error::invalid(format!("projector trace {trace} is not an integer")));
        }
        Ok(Projector {
            ambient,
            matrix,
            rank: rank as usize,
        })
    }

    pub fn ambient(&self) -> &SpaceLabel {
        &self.ambient
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn apply(&self, v: &StateVector) -> Result<StateVector> {
        self.ambient.ensure_same(&v.space)?;
        Ok(StateVector {
            space: self.ambient.clone(),
            amplitudes: &self.matrix * &v.amplitudes,
        })
    }

    /// `⟨ψ|P|ψ⟩`.
    pub fn expectation(&self, psi: &StateVector) -> Result<f64> {
        Ok(self.apply(psi)?.norm_sqr())
    }
}

/// `P = F F^H` for the frame `F` of `s`.
pub fn projector_from_subspace(s: &Subspace) -> Projector {
    let matrix = &s.frame * s.frame.adjoint();
    Projector {
        ambient: s.ambient.clone(),
        matrix,
        rank: s.dim(),
    }
}

/// An inner-product-preserving map between two subspaces of equal dimension.
///
/// `matrix` acts on frame coordinates; the ambient action is
/// `to.frame · matrix · from.frame^H`.
#[derive(Clone, Debug, PartialEq)]
pub struct Isometry {
    from: Subspace,
    to: Subspace,
    matrix: CMatrix,
}

impl Isometry {
    pub fn new(from: Subspace, to: Subspace, matrix: CMatrix) -> Result<Self> {
        if from.dim() != to.dim() {
            return Err(Error::DimensionMismatch {
                expected: from.dim(),
                actual: to.dim(),
            });
        }
        if matrix.shape() != (to.dim(), from.dim()) {
            return Err(Error::DimensionMismatch {
                expected: to.dim(),
                actual: matrix.nrows(),
            });
        }
        let defect = unitarity_defect(&matrix);
        if defect > ORTHONORMAL_TOL {
            return Err(Error::NotUnitary { defect });
        }
        Ok(Isometry { from, to, matrix })
    }

    pub fn from(&self) -> &Subspace {
        &self.from
    }

    pub fn to(&self) -> &Subspace {
        &self.to
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    /// The map as a matrix from the `from` ambient space to the `to` ambient space.
    pub fn ambient_matrix(&self) -> CMatrix {
        &self.to.frame * &self.matrix * self.from.frame.adjoint()
    }

    /// Apply to an ambient vector of the `from` space.
    pub fn apply(&self, v: &StateVector) -> Result<StateVector> {
        let coords = self.from.coordinates(v)?;
        self.to.embed(&(&self.matrix * coords))
    }
}

/// Seeded random isometry `from → to`: orthonormalized complex Gaussian matrix.
pub fn random_isometry(from: &Subspace, to: &Subspace, seed: u64) -> Result<Isometry> {
    if from.dim() != to.dim() {
        return Err(Error::DimensionMismatch {
            expected: to.dim(),
            actual: from.dim(),
        });
    }
    let k = to.dim();
    let mut rng = seed::rng(seed);
    let matrix = orthonormalize(gaussian_matrix(k, k, &mut rng));
    Isometry::new(from.clone(), to.clone(), matrix)
}

/// Pairwise-orthogonality certificate for a list of subspaces.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DirectSumReport {
    pub pass: bool,
    pub max_overlap: f64,
    /// Indices of the pair attaining `max_overlap`, when there is more than one part.
    pub worst_pair: Option<(usize, usize)>,
    pub tolerance: f64,
}

/// Check that the frames of `parts` are mutually orthogonal.
///
/// `max_overlap` is the largest `|⟨f_i|g_j⟩|` over columns of distinct parts.
pub fn direct_sum_frames(parts: &[&Subspace], tolerance: f64) -> Result<DirectSumReport> {
    if let Some(first) = parts.first() {
        for p in &parts[1..] {
            first.ambient.ensure_same(&p.ambient)?;
        }
    }
    let mut max_overlap = 0.0f64;
    let mut worst_pair = None;
    for i in 0..parts.len() {
        for j in (i + 1)..parts.len() {
            let cross = parts[i].frame.adjoint() * &parts[j].frame;
            let o = max_abs_entry(&cross);
            if worst_pair.is_none() || o > max_overlap {
                max_overlap = o;
                worst_pair = Some((i, j));
            }
        }
    }
    Ok(DirectSumReport {
        pass: max_overlap <= tolerance,
        max_overlap,
        worst_pair,
        tolerance,
    })
}

/// A complete family of mutually orthogonal projectors on one space,
/// indexed by outcome label.
#[derive(Clone, Debug, PartialEq)]
pub struct ProjectorFamily {
    ambient: SpaceLabel,
    members: Vec<(String, Projector)>,
}

impl ProjectorFamily {
    /// Validates pairwise orthogonality and `Σ P = I`, both to [`PROJECTOR_TOL`].
    pub fn new(ambient: SpaceLabel, members: Vec<(String, Projector)>) -> Result<Self> {
        if members.is_empty() {
            return Err(Error::invalid("projector family is empty"));
        }
        let n = ambient.dim;
        let mut sum = CMatrix::zeros(n, n);
        for (i, (label, p)) in members.iter().enumerate() {
            ambient.ensure_same(&p.ambient)?;
            if members[..i].iter().any(|(l, _)| l == label) {
                return Err(Error::invalid(format!("duplicate outcome label `{label}`")));
            }
            for (other, q) in &members[..i] {
                let overlap = max_abs_entry(&(p.matrix() * q.matrix()));
                if overlap > PROJECTOR_TOL {
                    return Err(Error::OverlappingSubspaces {
                        first: other.clone(),
                        second: label.clone(),
                        overlap,
                    });
                }
            }
            sum += p.matrix();
        }
        let defect = max_abs_diff_identity(&sum);
        if defect > PROJECTOR_TOL {
            return Err(Error::IncompleteFamily { defect });
        }
        Ok(ProjectorFamily { ambient, members })
    }

    pub fn from_subspaces(ambient: SpaceLabel, parts: Vec<(String, Subspace)>) -> Result<Self> {
        let members = parts
            .into_iter()
            .map(|(l, s)| (l, projector_from_subspace(&s)))
            .collect();
        Self::new(ambient, members)
    }

    /// Random complete family: a Haar-random basis split into consecutive
    /// groups of the given ranks.
    pub fn random(ambient: SpaceLabel, labels: &[&str], ranks: &[usize], seed: u64) -> Result<Self> {
        if labels.len() != ranks.len() || ranks.iter().sum::<usize>() != ambient.dim {
            return Err(Error::invalid("ranks must match labels and sum to the dimension"));
        }
        let u = random_unitary(ambient.dim, seed);
        let mut start = 0;
        let mut parts = Vec::with_capacity(labels.len());
        for (label, &r) in labels.iter().zip(ranks) {
            let frame = u.columns(start, r).into_owned();
            parts.push((label.to_string(), Subspace::new(ambient.clone(), frame)?));
            start += r;
        }
        Self::from_subspaces(ambient, parts)
    }

    pub fn ambient(&self) -> &SpaceLabel {
        &self.ambient
    }

    pub fn members(&self) -> &[(String, Projector)] {
        &self.members
    }

    pub fn labels(&self) -> Vec<String> {
        self.members.iter().map(|(l, _)| l.clone()).collect()
    }

    pub fn get(&self, label: &str) -> Result<&Projector> {
        self.members
            .iter()
            .find(|(l, _)| l == label)
            .map(|(_, p)| p)
            .ok_or_else(|| Error::UnknownLabel(label.to_string()))
    }
}
