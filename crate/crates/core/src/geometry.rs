//! Rank-based affine geometry.
//!
//! Every dimension query in this module — span dimension, affine-hull
//! dimension, the independence and disjointness predicates — reduces to the
//! numerical rank of a generator matrix, so a single SVD cutoff rule governs
//! all of them. Affine-hull dimensions are computed through the homogeneous
//! embedding `x ↦ [x; 1]` rather than by differencing against an anchor
//! point, which keeps the computation anchor-free.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

/// Relative cutoff for numerical-rank decisions.
///
/// A singular value counts toward the rank when it exceeds
/// `relative_eps * sigma_max * max(rows, cols)`. The model dimensions this
/// crate works with are exact integers, so the cutoff only has to separate
/// true zeros from round-off.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RankTolerance {
    relative_eps: f64,
}

impl RankTolerance {
    pub fn new(relative_eps: f64) -> Result<Self> {
        if !(relative_eps.is_finite() && relative_eps > 0.0 && relative_eps < 1.0) {
            return Err(Error::InvalidParameter(format!(
                "rank tolerance must lie in (0, 1), got {relative_eps}"
            )));
        }
        Ok(Self { relative_eps })
    }

    pub fn relative_eps(self) -> f64 {
        self.relative_eps
    }
}

impl Default for RankTolerance {
    fn default() -> Self {
        Self { relative_eps: 1e-10 }
    }
}

fn ensure_finite(m: &DMatrix<f64>) -> Result<()> {
    if m.iter().all(|v| v.is_finite()) {
        Ok(())
    } else {
        Err(Error::InvalidMatrix)
    }
}

/// Number of singular values above the relative cutoff.
///
/// Returns 0 for the all-zero matrix and for matrices with an empty side.
pub fn numerical_rank(m: &DMatrix<f64>, tol: RankTolerance) -> Result<usize> {
    ensure_finite(m)?;
    if m.nrows() == 0 || m.ncols() == 0 {
        return Ok(0);
    }
    let sv = m.singular_values();
    let sigma_max = sv.iter().fold(0.0_f64, |a, &b| a.max(b));
    if sigma_max == 0.0 {
        return Ok(0);
    }
    let cutoff = tol.relative_eps() * sigma_max * (m.nrows().max(m.ncols()) as f64);
    Ok(sv.iter().filter(|&&s| s > cutoff).count())
}

/// Appends a row of ones: column `x` becomes `[x; 1]`.
pub fn homogeneous_embed(x: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    ensure_finite(x)?;
    let (d, n) = (x.nrows(), x.ncols());
    let mut out = DMatrix::zeros(d + 1, n);
    out.view_mut((0, 0), (d, n)).copy_from(x);
    out.row_mut(d).fill(1.0);
    Ok(out)
}

/// Dimension of the linear span of the given points (columns of `points`).
pub fn span_dim(points: &DMatrix<f64>, tol: RankTolerance) -> Result<usize> {
    if points.ncols() == 0 {
        return Err(Error::EmptyInput);
    }
    numerical_rank(points, tol)
}

/// Dimension of the affine hull of the given points (columns of `points`).
///
/// Computed as `rank([points; 1]) - 1`, so a single point has affine
/// dimension 0 and the result never depends on which point anchors the hull.
pub fn aff_dim(points: &DMatrix<f64>, tol: RankTolerance) -> Result<usize> {
    if points.ncols() == 0 {
        return Err(Error::EmptyInput);
    }
    let embedded = homogeneous_embed(points)?;
    // rank >= 1 because the ones row is nonzero.
    Ok(numerical_rank(&embedded, tol)? - 1)
}

/// An affine subspace `offset + span(basis)` of `R^D`.
///
/// The basis must have full column rank at the construction tolerance; a
/// basis that loses rank is rejected here rather than silently re-ranked.
#[derive(Debug, Clone)]
pub struct AffineSubspace {
    offset: DVector<f64>,
    basis: DMatrix<f64>,
    ortho: DMatrix<f64>,
}

impl AffineSubspace {
    pub fn new(offset: DVector<f64>, basis: DMatrix<f64>, tol: RankTolerance) -> Result<Self> {
        if !offset.iter().all(|v| v.is_finite()) {
            return Err(Error::InvalidMatrix);
        }
        ensure_finite(&basis)?;
        let ambient = offset.len();
        if ambient == 0 {
            return Err(Error::EmptyInput);
        }
        if basis.nrows() != ambient {
            return Err(Error::DimensionMismatch(format!(
                "offset lives in R^{ambient} but basis rows are {}",
                basis.nrows()
            )));
        }
        let dim = basis.ncols();
        if dim > 0 && numerical_rank(&basis, tol)? != dim {
            return Err(Error::DegenerateBasis);
        }
        if dim >= ambient {
            return Err(Error::InvalidSpec(format!(
                "subspace dimension {dim} must be below ambient dimension {ambient}"
            )));
        }
        let ortho = if dim == 0 {
            DMatrix::zeros(ambient, 0)
        } else {
            basis.clone().qr().q()
        };
        Ok(Self { offset, basis, ortho })
    }

    /// Zero-dimensional subspace consisting of a single point.
    pub fn point(offset: DVector<f64>) -> Result<Self> {
        let ambient = offset.len();
        Self::new(offset, DMatrix::zeros(ambient, 0), RankTolerance::default())
    }

    pub fn ambient_dim(&self) -> usize {
        self.offset.len()
    }

    pub fn dim(&self) -> usize {
        self.basis.ncols()
    }

    pub fn offset(&self) -> &DVector<f64> {
        &self.offset
    }

    pub fn basis(&self) -> &DMatrix<f64> {
        &self.basis
    }

    /// Orthonormal basis of the direction subspace (the translate-free span
    /// of the stored basis). Equal to the subspace itself exactly when the
    /// subspace passes through the origin.
    pub fn direction_subspace(&self) -> &DMatrix<f64> {
        &self.ortho
    }

    /// Points `{offset, offset + b_1, ..., offset + b_d}` whose affine hull
    /// is the subspace.
    pub fn affine_generators(&self) -> DMatrix<f64> {
        let d = self.dim();
        let mut gens = DMatrix::zeros(self.ambient_dim(), d + 1);
        gens.set_column(0, &self.offset);
        for j in 0..d {
            gens.set_column(j + 1, &(&self.offset + self.basis.column(j)));
        }
        gens
    }

    /// Vectors `{offset, b_1, ..., b_d}` whose linear span equals the span
    /// of the subspace as a point set.
    pub fn span_generators(&self) -> DMatrix<f64> {
        let d = self.dim();
        let mut gens = DMatrix::zeros(self.ambient_dim(), d + 1);
        gens.set_column(0, &self.offset);
        for j in 0..d {
            gens.set_column(j + 1, &self.basis.column(j).into_owned());
        }
        gens
    }

    /// Distance from `x` to the subspace.
    pub fn membership_residual(&self, x: &DVector<f64>) -> f64 {
        let centered = x - &self.offset;
        let projected = &self.ortho * (self.ortho.transpose() * &centered);
        (centered - projected).norm()
    }
}

/// Outcome of a dimension-equality predicate, keeping both sides of the
/// comparison so a failed check can report which side moved.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DimCheck {
    pub holds: bool,
    pub lhs: usize,
    pub rhs: usize,
}

fn common_ambient(subspaces: &[AffineSubspace]) -> Result<usize> {
    let first = subspaces.first().ok_or(Error::EmptyInput)?;
    let ambient = first.ambient_dim();
    for s in subspaces {
        if s.ambient_dim() != ambient {
            return Err(Error::DimensionMismatch(format!(
                "ambient dimensions differ: {} vs {}",
                ambient,
                s.ambient_dim()
            )));
        }
    }
    Ok(ambient)
}

fn concat_columns(blocks: &[DMatrix<f64>]) -> DMatrix<f64> {
    let rows = blocks[0].nrows();
    let cols = blocks.iter().map(|b| b.ncols()).sum();
    let mut out = DMatrix::zeros(rows, cols);
    let mut at = 0;
    for b in blocks {
        out.view_mut((0, at), (rows, b.ncols())).copy_from(b);
        at += b.ncols();
    }
    out
}

fn union_affine_generators(subspaces: &[AffineSubspace]) -> Result<DMatrix<f64>> {
    common_ambient(subspaces)?;
    let blocks: Vec<_> = subspaces.iter().map(|s| s.affine_generators()).collect();
    Ok(concat_columns(&blocks))
}

/// Tests whether two affine subspaces neither intersect nor share direction:
/// `lhs` is the affine dimension of the hull of their union, `rhs` is
/// `dim(A) + dim(B) + 1`, and the pair is affinely disjoint iff they agree.
pub fn is_affinely_disjoint(
    a: &AffineSubspace,
    b: &AffineSubspace,
    tol: RankTolerance,
) -> Result<DimCheck> {
    let pair = [a.clone(), b.clone()];
    let union = union_affine_generators(&pair)?;
    let lhs = aff_dim(&union, tol)?;
    let rhs = a.dim() + b.dim() + 1;
    Ok(DimCheck { holds: lhs == rhs, lhs, rhs })
}

/// Tests whether the hull of the union attains its maximal dimension:
/// `lhs = aff_dim(union) + 1`, `rhs = sum(dim) + count`. `lhs <= rhs` always.
pub fn is_affinely_independent(
    subspaces: &[AffineSubspace],
    tol: RankTolerance,
) -> Result<DimCheck> {
    let union = union_affine_generators(subspaces)?;
    let lhs = aff_dim(&union, tol)? + 1;
    let rhs = subspaces.iter().map(|s| s.dim()).sum::<usize>() + subspaces.len();
    Ok(DimCheck { holds: lhs == rhs, lhs, rhs })
}

/// Tests linear independence of the spans.
///
/// With `embed = false` the spans of the subspaces as point sets are tested:
/// `lhs = dim(span(union))`, `rhs = sum(dim(span(A_l)))`. With `embed = true`
/// the same test is applied to the spans of the homogeneously embedded
/// subspaces, where every summand becomes `dim(A_l) + 1`.
pub fn spans_linearly_independent(
    subspaces: &[AffineSubspace],
    tol: RankTolerance,
    embed: bool,
) -> Result<DimCheck> {
    common_ambient(subspaces)?;
    let gens: Vec<DMatrix<f64>> = if embed {
        subspaces
            .iter()
            .map(|s| homogeneous_embed(&s.affine_generators()))
            .collect::<Result<_>>()?
    } else {
        subspaces.iter().map(|s| s.span_generators()).collect()
    };
    let mut rhs = 0;
    for g in &gens {
        rhs += span_dim(g, tol)?;
    }
    let lhs = span_dim(&concat_columns(&gens), tol)?;
    Ok(DimCheck { holds: lhs == rhs, lhs, rhs })
}

/// Tests whether the origin lies in the affine hull of the union: appending
/// the zero vector leaves the hull dimension unchanged exactly when it does.
/// `lhs` is the hull dimension with the origin appended, `rhs` without.
pub fn origin_in_affine_hull(
    subspaces: &[AffineSubspace],
    tol: RankTolerance,
) -> Result<DimCheck> {
    let ambient = common_ambient(subspaces)?;
    let union = union_affine_generators(subspaces)?;
    let with_origin = concat_columns(&[union.clone(), DMatrix::zeros(ambient, 1)]);
    let lhs = aff_dim(&with_origin, tol)?;
    let rhs = aff_dim(&union, tol)?;
    Ok(DimCheck { holds: lhs == rhs, lhs, rhs })
}
