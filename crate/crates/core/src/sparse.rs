//! Thresholded numerical rank and the `AX ≈_δ Y` sparse least-squares
//! solver.
//!
//! Every column of `Y` is solved independently by orthogonal matching
//! pursuit: greedily pick the column of `A` most correlated with the
//! residual, re-fit on the accumulated support, stop when the residual
//! falls to `δ·‖y‖` or the support reaches `rk_δ(A)`.
//!
//! The returned [`SparseSolveReport`] carries a certificate
//! `‖AX̂ − Y‖_F ≤ α·δ + β·‖(I − Q)Y‖_F` where `Q` projects onto the span of
//! all selected columns of `A`, `β = 1` and `α` is the smallest value that
//! makes the inequality hold in floating point.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

/// Singular values at or below this fraction of the largest one count as zero.
pub const RELATIVE_ZERO: f64 = 1e-12;

/// Vectors whose orthogonalised norm drops below this fraction of their
/// original norm are treated as linearly dependent.
const DEPENDENCE_TOL: f64 = 1e-10;

/// Correlations within this relative margin of the current best count as ties.
const TIE_TOL: f64 = 1e-12;

/// `rk_δ(A)` together with the spectrum it was computed from.
#[derive(Clone, Debug, PartialEq)]
pub struct ThresholdedRank {
    pub delta: f64,
    /// Singular values, descending.
    pub singular_values: Vec<f64>,
    pub rank: usize,
}

/// Singular values of `a`, sorted descending.
pub fn singular_values(a: &DMatrix<f64>) -> Vec<f64> {
    if a.is_empty() {
        return Vec::new();
    }
    let mut s = to_faer(a)
        .singular_values()
        .unwrap_or_else(|_| vec![f64::NAN; a.nrows().min(a.ncols())]);
    s.sort_by(|x, y| y.total_cmp(x));
    s
}

pub(crate) fn to_faer(a: &DMatrix<f64>) -> faer::Mat<f64> {
    faer::Mat::from_fn(a.nrows(), a.ncols(), |i, j| a[(i, j)])
}

fn rank_of(singular_values: &[f64], delta: f64) -> usize {
    let floor = singular_values.first().map_or(0.0, |s| s * RELATIVE_ZERO);
    singular_values
        .iter()
        .filter(|&&s| s > delta && s > floor)
        .count()
}

/// `rk_δ(A)`: the number of singular values strictly above `δ`.
pub fn thresholded_rank(a: &DMatrix<f64>, delta: f64) -> Result<ThresholdedRank> {
    if a.is_empty() {
        return Err(Error::Shape("thresholded rank of an empty matrix".into()));
    }
    if !(delta > 0.0) {
        return Err(Error::Range(format!("delta must be positive, got {delta}")));
    }
    let singular_values = singular_values(a);
    let rank = rank_of(&singular_values, delta);
    Ok(ThresholdedRank {
        delta,
        singular_values,
        rank,
    })
}

/// Solution of `AX ≈_δ Y` plus its residual certificate.
#[derive(Clone, Debug, PartialEq)]
pub struct SparseSolveReport {
    /// `X̂`, `n × p`.
    pub solution: DMatrix<f64>,
    /// Entries of `X̂` that are exactly nonzero.
    pub nnz: usize,
    /// `‖AX̂ − Y‖_F`.
    pub residual_frobenius: f64,
    pub delta: f64,
    pub certificate_alpha: f64,
    pub certificate_beta: f64,
    /// `‖(I − Q)Y‖_F`.
    pub projected_residual: f64,
    /// `rk_δ(A)`, the per-column support cap.
    pub rank: usize,
    /// Selected columns of `A` for each column of `Y`, in selection order.
    pub supports: Vec<Vec<usize>>,
}

impl SparseSolveReport {
    /// Checks `‖AX̂ − Y‖_F ≤ α·δ + β·‖(I − Q)Y‖_F` exactly as stored.
    pub fn certificate_holds(&self) -> bool {
        self.residual_frobenius
            <= self.certificate_alpha * self.delta
                + self.certificate_beta * self.projected_residual
    }
}

/// Incrementally built orthonormal basis (modified Gram–Schmidt with one
/// reorthogonalisation pass). Keeps the triangular factor so coefficients
/// on the original vectors can be recovered.
#[derive(Default)]
struct OrthoBasis {
    q: Vec<DVector<f64>>,
    /// Column `k` holds the coordinates of the `k`-th accepted vector in `q`.
    r: Vec<Vec<f64>>,
}

impl OrthoBasis {
    fn len(&self) -> usize {
        self.q.len()
    }

    /// Adds `v` if it is numerically independent of the current span.
    fn push(&mut self, v: &DVector<f64>) -> bool {
        let norm0 = v.norm();
        if norm0 == 0.0 {
            return false;
        }
        let mut w = v.clone();
        let mut coords = vec![0.0; self.q.len()];
        for _ in 0..2 {
            for (qi, c) in self.q.iter().zip(coords.iter_mut()) {
                let proj = qi.dot(&w);
                w.axpy(-proj, qi, 1.0);
                *c += proj;
            }
        }
        let norm = w.norm();
        if norm <= DEPENDENCE_TOL * norm0 {
            return false;
        }
        coords.push(norm);
        self.q.push(w / norm);
        self.r.push(coords);
        true
    }

    /// Least-squares coefficients of `y` on the accepted vectors.
    fn solve(&self, y: &DVector<f64>) -> Vec<f64> {
        let k = self.q.len();
        let rhs: Vec<f64> = self.q.iter().map(|q| q.dot(y)).collect();
        let mut x = vec![0.0; k];
        for i in (0..k).rev() {
            let mut acc = rhs[i];
            for (rj, xj) in self.r[i + 1..].iter().zip(&x[i + 1..]) {
                acc -= rj[i] * xj;
            }
            x[i] = acc / self.r[i][i];
        }
        x
    }

    /// `‖(I − QQᵀ)y‖`.
    fn residual_norm(&self, y: &DVector<f64>) -> f64 {
        let mut w = y.clone();
        for _ in 0..2 {
            for q in &self.q {
                let proj = q.dot(&w);
                w.axpy(-proj, q, 1.0);
            }
        }
        w.norm()
    }
}

struct ColumnFit {
    support: Vec<usize>,
    coeffs: Vec<f64>,
}

fn omp_column(
    a: &DMatrix<f64>,
    columns: &[DVector<f64>],
    col_norms: &[f64],
    y: &DVector<f64>,
    delta: f64,
    cap: usize,
) -> ColumnFit {
    let y_norm = y.norm();
    let mut basis = OrthoBasis::default();
    let mut support: Vec<usize> = Vec::new();
    let mut coeffs: Vec<f64> = Vec::new();
    let mut blocked = vec![false; columns.len()];
    let mut residual = y.clone();

    while support.len() < cap {
        let res_norm = residual.norm();
        if res_norm <= delta * y_norm {
            break;
        }
        // Highest normalised correlation; near-ties keep the lowest index.
        let mut best: Option<(usize, f64)> = None;
        for (j, col) in columns.iter().enumerate() {
            if blocked[j] || col_norms[j] == 0.0 {
                continue;
            }
            let c = col.dot(&residual).abs() / col_norms[j];
            if best.is_none_or(|(_, b)| c > b * (1.0 + TIE_TOL)) {
                best = Some((j, c));
            }
        }
        let Some((j, corr)) = best else { break };
        if corr <= DEPENDENCE_TOL * res_norm * 1e-3 {
            break;
        }
        blocked[j] = true;
        if !basis.push(&columns[j]) {
            continue;
        }
        support.push(j);
        let trial = basis.solve(y);
        let mut fitted = DVector::zeros(a.nrows());
        for (&s, &c) in support.iter().zip(&trial) {
            fitted.axpy(c, &columns[s], 1.0);
        }
        residual = y - fitted;
        coeffs = trial;
    }
    ColumnFit { support, coeffs }
}

/// Sparse solution of `AX ≈_δ Y`.
///
/// `max_nnz_per_column` further caps the per-column support below `rk_δ(A)`.
pub fn sparse_lsq(
    a: &DMatrix<f64>,
    y: &DMatrix<f64>,
    delta: f64,
    max_nnz_per_column: Option<usize>,
) -> Result<SparseSolveReport> {
    if a.nrows() != y.nrows() {
        return Err(Error::Shape(format!(
            "A has {} rows but Y has {}",
            a.nrows(),
            y.nrows()
        )));
    }
    if a.is_empty() || y.ncols() == 0 {
        return Err(Error::Shape("empty system".into()));
    }
    let rank = thresholded_rank(a, delta)?.rank;
    if rank == 0 {
        return Err(Error::RankDeficient { delta });
    }
    let cap = max_nnz_per_column.map_or(rank, |m| m.min(rank));

    let columns: Vec<DVector<f64>> = a.column_iter().map(|c| c.into_owned()).collect();
    let col_norms: Vec<f64> = columns.iter().map(|c| c.norm()).collect();

    let n = a.ncols();
    let p = y.ncols();
    let mut solution = DMatrix::zeros(n, p);
    let mut supports = Vec::with_capacity(p);
    for k in 0..p {
        let yk: DVector<f64> = y.column(k).into_owned();
        let fit = omp_column(a, &columns, &col_norms, &yk, delta, cap);
        for (&j, &c) in fit.support.iter().zip(&fit.coeffs) {
            solution[(j, k)] = c;
        }
        supports.push(fit.support);
    }

    let residual_frobenius = (a * &solution - y).norm();

    let mut union: Vec<usize> = supports.iter().flatten().copied().collect();
    union.sort_unstable();
    union.dedup();
    let mut span = OrthoBasis::default();
    for &j in &union {
        span.push(&columns[j]);
    }
    debug_assert!(span.len() <= union.len());
    let projected_residual = y
        .column_iter()
        .map(|c| span.residual_norm(&c.into_owned()).powi(2))
        .sum::<f64>()
        .sqrt();

    let certificate_beta = 1.0;
    let mut certificate_alpha = ((residual_frobenius - projected_residual) / delta).max(0.0);
    while residual_frobenius > certificate_alpha * delta + certificate_beta * projected_residual {
        certificate_alpha = if certificate_alpha == 0.0 {
            f64::MIN_POSITIVE
        } else {
            certificate_alpha.next_up()
        };
    }

    let nnz = solution.iter().filter(|v| **v != 0.0).count();
    Ok(SparseSolveReport {
        solution,
        nnz,
        residual_frobenius,
        delta,
        certificate_alpha,
        certificate_beta,
        projected_residual,
        rank,
        supports,
    })
}

/// Sparse re-representation of a linear map on the data: given an `L × K` trajectory
/// matrix `H` and an `L × M` matrix `A`, finds `Â` with
/// `Hᵀ Â ≈_δ Hᵀ A` and at most `M · rk_δ(H)` nonzeros.
pub fn sparsify_matrix(h: &DMatrix<f64>, a: &DMatrix<f64>, delta: f64) -> Result<SparseSolveReport> {
    if h.nrows() != a.nrows() {
        return Err(Error::Shape(format!(
            "H has {} rows but A has {}",
            h.nrows(),
            a.nrows()
        )));
    }
    let ht = h.transpose();
    let target = &ht * a;
    sparse_lsq(&ht, &target, delta, None)
}

/// Minimum-norm dense least squares via SVD, zeroing singular values at or
/// below [`RELATIVE_ZERO`] times the largest.
pub fn dense_lsq(a: &DMatrix<f64>, y: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    if a.nrows() != y.nrows() {
        return Err(Error::Shape(format!(
            "A has {} rows but Y has {}",
            a.nrows(),
            y.nrows()
        )));
    }
    if a.is_empty() {
        return Err(Error::Shape("empty system".into()));
    }
    let svd = to_faer(a)
        .thin_svd()
        .map_err(|e| Error::Degenerate(format!("SVD failed: {e:?}")))?;
    let (u, s, v) = (svd.U(), svd.S().column_vector(), svd.V());
    let cutoff = s[0] * RELATIVE_ZERO;
    let mut x = DMatrix::zeros(a.ncols(), y.ncols());
    for k in 0..s.nrows() {
        if !(s[k] > cutoff) {
            continue;
        }
        for c in 0..y.ncols() {
            let coef = (0..a.nrows()).map(|i| u[(i, k)] * y[(i, c)]).sum::<f64>() / s[k];
            for j in 0..a.ncols() {
                x[(j, c)] += coef * v[(j, k)];
            }
        }
    }
    Ok(x)
}
