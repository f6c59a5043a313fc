//! Krylov sections of the AR companion matrix and their spectra.
//!
//! Starting from an anchor window `x = x_L(s)` the Arnoldi process builds an
//! orthonormal basis `W` of `span{x, Cx, ..., C^{T-1}x}` and compresses `C`
//! to the `k × k` section `Wᵀ C W`. When the linear model reproduces a
//! `T`-periodic tail, the section's eigenvalues sit near the `T`-th roots
//! of unity and its `T`-th power is close to the identity.

use nalgebra::{Complex, DMatrix, DVector};

use crate::error::{Error, Result};
use crate::linear::{companion, matrix_power, ArCoefficients, CompanionMatrix};
use crate::sparse::{singular_values, to_faer};
use crate::signal::{estimate_period, window, AepProfile, TimeSeries, WindowVector};

/// Arnoldi stops once an orthogonalised vector keeps less than this
/// fraction of its norm.
const BREAKDOWN_TOL: f64 = 1e-10;

/// Slack on the unit-disk test for rounding.
pub const UNIT_DISK_TOL: f64 = 1e-8;

/// Compression of a companion matrix onto a Krylov subspace.
#[derive(Clone, Debug, PartialEq)]
pub struct ApSection {
    /// `L × k`, orthonormal columns.
    pub basis: DMatrix<f64>,
    /// `k × k`, `Wᵀ C W`.
    pub section: DMatrix<f64>,
    /// Approximate period `T` the subspace was grown for.
    pub period: usize,
    /// Anchor index `s` of the start window.
    pub anchor: usize,
}

impl ApSection {
    /// Section dimension `k`.
    pub fn dim(&self) -> usize {
        self.section.nrows()
    }

    /// `‖WᵀW − I_k‖_max`.
    pub fn orthonormality_defect(&self) -> f64 {
        let k = self.dim();
        (self.basis.transpose() * &self.basis - DMatrix::<f64>::identity(k, k)).amax()
    }
}

/// Builds the section from the window `x` (start vector) and period `T`.
pub fn krylov_section(c: &CompanionMatrix, x: &WindowVector, period: usize) -> Result<ApSection> {
    krylov_section_from(c.data(), x.entries(), period, x.t())
}

pub(crate) fn krylov_section_from(
    c: &DMatrix<f64>,
    x: &[f64],
    period: usize,
    anchor: usize,
) -> Result<ApSection> {
    let l = c.nrows();
    if x.len() != l {
        return Err(Error::Shape(format!(
            "start vector of length {} for a {l}x{l} matrix",
            x.len()
        )));
    }
    if period == 0 {
        return Err(Error::Range("period T must be >= 1".into()));
    }
    let x = DVector::from_column_slice(x);
    let norm = x.norm();
    if norm == 0.0 || !norm.is_finite() {
        return Err(Error::Degenerate("zero start vector for the Krylov section".into()));
    }
    let mut vs: Vec<DVector<f64>> = vec![x / norm];
    while vs.len() < period.min(l) {
        let mut w = c * vs.last().expect("nonempty");
        let before = w.norm();
        for _ in 0..2 {
            for v in &vs {
                let p = v.dot(&w);
                w.axpy(-p, v, 1.0);
            }
        }
        let after = w.norm();
        if after <= BREAKDOWN_TOL * before || after == 0.0 {
            break;
        }
        vs.push(w / after);
    }
    let basis = DMatrix::from_columns(&vs);
    let section = basis.transpose() * c * &basis;
    Ok(ApSection {
        basis,
        section,
        period,
        anchor,
    })
}

/// Spectral summary of a section.
#[derive(Clone, Debug, PartialEq)]
pub struct SpectrumReport {
    pub period: usize,
    /// Eigenvalues of the section, sorted by `(re, im)`.
    pub eigenvalues: Vec<Complex<f64>>,
    /// Eigenvalues of the section's `T`-th power, sorted by `(re, im)`.
    pub power_eigenvalues: Vec<Complex<f64>>,
    /// `max_z |z^T − 1|`.
    pub max_unit_root_defect: f64,
    /// Spectral norm of `section^T − I_k`.
    pub mimicry_norm: f64,
    pub spectral_radius: f64,
    /// `spectral_radius ≤ 1 + UNIT_DISK_TOL`.
    pub inside_unit_disk: bool,
}

/// Eigenvalues of a real square matrix, sorted by `(re, im)`.
pub fn eigenvalues(m: &DMatrix<f64>) -> Result<Vec<Complex<f64>>> {
    let n = m.nrows();
    if n != m.ncols() {
        return Err(Error::Shape(format!("eigenvalues of a {n}x{} matrix", m.ncols())));
    }
    if n == 0 {
        return Ok(Vec::new());
    }
    let mut z: Vec<Complex<f64>> = to_faer(m)
        .eigenvalues()
        .map_err(|_| Error::Eigen(n))?
        .into_iter()
        .map(|v| Complex::new(v.re, v.im))
        .collect();
    if z.iter().any(|v| !v.re.is_finite() || !v.im.is_finite()) {
        return Err(Error::Eigen(n));
    }
    z.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
    Ok(z)
}

pub fn spectrum_report(sec: &ApSection) -> Result<SpectrumReport> {
    let k = sec.dim();
    let t = sec.period;
    let eig = eigenvalues(&sec.section)?;
    let power = matrix_power(&sec.section, t);
    let power_eig = eigenvalues(&power)?;
    let one = Complex::new(1.0, 0.0);
    let max_unit_root_defect = eig
        .iter()
        .map(|z| (z.powu(t as u32) - one).norm())
        .fold(0.0, f64::max);
    let diff = power - DMatrix::<f64>::identity(k, k);
    let mimicry_norm = singular_values(&diff).first().copied().unwrap_or(0.0);
    let spectral_radius = eig.iter().map(|z| z.norm()).fold(0.0, f64::max);
    Ok(SpectrumReport {
        period: t,
        eigenvalues: eig,
        power_eigenvalues: power_eig,
        max_unit_root_defect,
        mimicry_norm,
        spectral_radius,
        inside_unit_disk: spectral_radius <= 1.0 + UNIT_DISK_TOL,
    })
}

/// Full approximate-periodicity diagnosis of a linear component.
#[derive(Clone, Debug, PartialEq)]
pub struct ApDiagnosis {
    pub profile: AepProfile,
    /// `false` when no approximately periodic tail was found.
    pub tail_detected: bool,
    /// `s = S + L − 1`, or `N` when that falls outside the sample.
    pub anchor: usize,
    /// The anchor had to be moved to the last full window.
    pub anchor_fallback: bool,
    pub section: ApSection,
    pub spectrum: SpectrumReport,
}

/// Estimates `(T, S)`, anchors at `x_L(S + L − 1)` and reports the section spectrum.
pub fn ap_diagnose(coeffs: &ArCoefficients, series: &TimeSeries, epsilon: f64) -> Result<ApDiagnosis> {
    let lag = coeffs.lag();
    let n = series.len();
    if n < lag {
        return Err(Error::Range(format!(
            "diagnosis needs at least L = {lag} samples, got {n}"
        )));
    }
    let profile = estimate_period(series, epsilon);
    let wanted = profile.tail_start + lag - 1;
    let (anchor, anchor_fallback) = if profile.satisfied && wanted <= n {
        (wanted, false)
    } else {
        (n, true)
    };
    let x = window(series, lag, anchor)?;
    let section = krylov_section(&companion(coeffs), &x, profile.period)?;
    let spectrum = spectrum_report(&section)?;
    Ok(ApDiagnosis {
        profile,
        tail_detected: profile.satisfied,
        anchor,
        anchor_fallback,
        section,
        spectrum,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cm(rows: usize, v: &[f64]) -> CompanionMatrix {
        CompanionMatrix::from_matrix(DMatrix::from_row_slice(rows, rows, v)).unwrap()
    }

    #[test]
    fn swap_matrix_section() {
        let c = cm(2, &[0., 1., 1., 0.]);
        let x = WindowVector::from_entries(vec![1.0, 0.0], 2).unwrap();
        let sec = krylov_section(&c, &x, 2).unwrap();
        assert_eq!(sec.dim(), 2);
        assert!((sec.section.abs() - c.data().abs()).amax() < 1e-14);
        let rep = spectrum_report(&sec).unwrap();
        assert!((rep.eigenvalues[0] - Complex::new(-1.0, 0.0)).norm() < 1e-12);
        assert!((rep.eigenvalues[1] - Complex::new(1.0, 0.0)).norm() < 1e-12);
        assert!(rep.max_unit_root_defect < 1e-12);
        assert!(rep.mimicry_norm < 1e-12);
    }

    #[test]
    fn scalar_section() {
        let c = cm(1, &[-1.0]);
        let x = WindowVector::from_entries(vec![1.0], 1).unwrap();
        let sec = krylov_section(&c, &x, 2).unwrap();
        assert_eq!(sec.dim(), 1);
        assert_eq!(sec.section[(0, 0)], -1.0);
        let rep = spectrum_report(&sec).unwrap();
        assert_eq!(rep.max_unit_root_defect, 0.0);
    }

    #[test]
    fn eigenvector_start_breaks_down() {
        let c = cm(2, &[2., 0., 0., 3.]);
        let x = WindowVector::from_entries(vec![0.0, 5.0], 2).unwrap();
        let sec = krylov_section(&c, &x, 4).unwrap();
        assert_eq!(sec.dim(), 1);
        assert!((sec.section[(0, 0)] - 3.0).abs() < 1e-14);
    }

    #[test]
    fn zero_start_rejected() {
        let c = cm(2, &[0., 1., 1., 0.]);
        let x = WindowVector::from_entries(vec![0.0, 0.0], 2).unwrap();
        assert!(matches!(krylov_section(&c, &x, 2), Err(Error::Degenerate(_))));
    }

    #[test]
    fn unstable_scalar() {
        let sec = ApSection {
            basis: DMatrix::from_element(1, 1, 1.0),
            section: DMatrix::from_element(1, 1, 1.1),
            period: 4,
            anchor: 1,
        };
        let rep = spectrum_report(&sec).unwrap();
        assert!((rep.max_unit_root_defect - 0.4641).abs() < 1e-12);
        assert!(!rep.inside_unit_disk);
    }

    #[test]
    fn cyclic_shift_eigenvalues() {
        let l = 24;
        let mut c = DMatrix::zeros(l, l);
        for i in 0..l - 1 {
            c[(i, i + 1)] = 1.0;
        }
        c[(l - 1, 0)] = 1.0;
        let z = eigenvalues(&c).unwrap();
        assert_eq!(z.len(), l);
        for v in &z {
            assert!((v.powu(l as u32) - Complex::new(1.0, 0.0)).norm() < 1e-10);
        }
    }
}
