//! Small dense complex matrices, the matrix exponential and time-ordered
//! propagator products.
//!
//! Everything here works on [`ComplexMatrix`], a thin checked wrapper around
//! `nalgebra::DMatrix<Complex64>`. Binary operations return `Result` so that a
//! dimension mismatch surfaces as an [`Error::Dimension`] instead of a panic.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type C64 = Complex64;

/// The imaginary unit.
pub const I: C64 = C64::new(0.0, 1.0);

/// Dense complex matrix with finite entries.
#[derive(Clone, Debug, PartialEq)]
pub struct ComplexMatrix {
    inner: DMatrix<C64>,
}

impl ComplexMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self { inner: DMatrix::zeros(rows, cols) }
    }

    pub fn identity(n: usize) -> Self {
        Self { inner: DMatrix::identity(n, n) }
    }

    pub fn from_diagonal(diag: &[C64]) -> Self {
        let n = diag.len();
        Self { inner: DMatrix::from_fn(n, n, |i, j| if i == j { diag[i] } else { C64::new(0.0, 0.0) }) }
    }

    /// Builds a matrix from a row-major slice of entries.
    pub fn from_row_slice(rows: usize, cols: usize, entries: &[C64]) -> Result<Self> {
        if entries.len() != rows * cols {
            return Err(Error::Dimension(format!(
                "{} entries supplied for a {rows}x{cols} matrix",
                entries.len()
            )));
        }
        Self::from_dmatrix(DMatrix::from_row_slice(rows, cols, entries))
    }

    pub fn from_fn(rows: usize, cols: usize, f: impl FnMut(usize, usize) -> C64) -> Result<Self> {
        Self::from_dmatrix(DMatrix::from_fn(rows, cols, f))
    }

    /// Wraps an nalgebra matrix, rejecting NaN or infinite entries.
    pub fn from_dmatrix(inner: DMatrix<C64>) -> Result<Self> {
        let m = Self { inner };
        m.check_finite()?;
        Ok(m)
    }

    pub fn as_dmatrix(&self) -> &DMatrix<C64> {
        &self.inner
    }

    pub fn into_dmatrix(self) -> DMatrix<C64> {
        self.inner
    }

    pub fn rows(&self) -> usize {
        self.inner.nrows()
    }

    pub fn cols(&self) -> usize {
        self.inner.ncols()
    }

    pub fn is_square(&self) -> bool {
        self.rows() == self.cols()
    }

    /// Entry at (row, col), zero-based.
    pub fn get(&self, row: usize, col: usize) -> C64 {
        self.inner[(row, col)]
    }

    pub fn row(&self, row: usize) -> Vec<C64> {
        self.inner.row(row).iter().copied().collect()
    }

    pub fn diagonal(&self) -> Vec<C64> {
        self.inner.diagonal().iter().copied().collect()
    }

    /// Copy with the diagonal set to zero.
    pub fn off_diagonal(&self) -> Self {
        let mut inner = self.inner.clone();
        inner.fill_diagonal(C64::new(0.0, 0.0));
        Self { inner }
    }

    pub fn is_finite(&self) -> bool {
        self.inner.iter().all(|z| z.re.is_finite() && z.im.is_finite())
    }

    fn check_finite(&self) -> Result<()> {
        if self.is_finite() {
            Ok(())
        } else {
            Err(Error::Domain("matrix has non-finite entries".into()))
        }
    }

    pub fn mul(&self, rhs: &ComplexMatrix) -> Result<ComplexMatrix> {
        if self.cols() != rhs.rows() {
            return Err(Error::Dimension(format!(
                "cannot multiply {}x{} by {}x{}",
                self.rows(),
                self.cols(),
                rhs.rows(),
                rhs.cols()
            )));
        }
        Self::from_dmatrix(&self.inner * &rhs.inner)
    }

    pub fn add(&self, rhs: &ComplexMatrix) -> Result<ComplexMatrix> {
        self.same_shape(rhs, "add")?;
        Self::from_dmatrix(&self.inner + &rhs.inner)
    }

    pub fn sub(&self, rhs: &ComplexMatrix) -> Result<ComplexMatrix> {
        self.same_shape(rhs, "subtract")?;
        Self::from_dmatrix(&self.inner - &rhs.inner)
    }

    pub fn scale(&self, factor: C64) -> Result<ComplexMatrix> {
        Self::from_dmatrix(&self.inner * factor)
    }

    /// Matrix-vector product.
    pub fn apply(&self, v: &[C64]) -> Result<Vec<C64>> {
        if v.len() != self.cols() {
            return Err(Error::Dimension(format!(
                "vector of length {} against {} columns",
                v.len(),
                self.cols()
            )));
        }
        Ok((0..self.rows())
            .map(|i| (0..self.cols()).map(|j| self.inner[(i, j)] * v[j]).sum())
            .collect())
    }

    pub fn adjoint(&self) -> ComplexMatrix {
        Self { inner: self.inner.adjoint() }
    }

    pub fn transpose(&self) -> ComplexMatrix {
        Self { inner: self.inner.transpose() }
    }

    /// Largest entry magnitude.
    pub fn max_abs(&self) -> f64 {
        self.inner.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// Induced 1-norm (maximum absolute column sum).
    pub fn norm_one(&self) -> f64 {
        self.inner
            .column_iter()
            .map(|c| c.iter().map(|z| z.norm()).sum::<f64>())
            .fold(0.0, f64::max)
    }

    /// Largest entry-wise difference magnitude. Shapes must agree.
    pub fn max_abs_diff(&self, other: &ComplexMatrix) -> Result<f64> {
        self.same_shape(other, "compare")?;
        Ok(self
            .inner
            .iter()
            .zip(other.inner.iter())
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max))
    }

    fn same_shape(&self, rhs: &ComplexMatrix, what: &str) -> Result<()> {
        if self.rows() != rhs.rows() || self.cols() != rhs.cols() {
            return Err(Error::Dimension(format!(
                "cannot {what} {}x{} and {}x{}",
                self.rows(),
                self.cols(),
                rhs.rows(),
                rhs.cols()
            )));
        }
        Ok(())
    }
}

/// Matrix exponential `e^a`.
///
/// Backed by nalgebra's scaling-and-squaring Padé implementation.
pub fn expm(a: &ComplexMatrix) -> Result<ComplexMatrix> {
    if !a.is_square() {
        return Err(Error::Dimension(format!(
            "expm needs a square matrix, got {}x{}",
            a.rows(),
            a.cols()
        )));
    }
    a.check_finite()?;
    let out = ComplexMatrix::from_dmatrix(a.inner.exp())
        .map_err(|_| Error::Numeric("matrix exponential overflowed".into()))?;
    Ok(out)
}

/// Where in each time step the generator is sampled.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum SamplePoint {
    /// `t_j + dt/2`, second order in `dt`.
    #[default]
    Midpoint,
    /// `t_j`, the first-order left-endpoint product.
    LeftEndpoint,
}

impl SamplePoint {
    fn time(self, t0: f64, dt: f64, j: usize) -> f64 {
        match self {
            SamplePoint::Midpoint => t0 + (j as f64 + 0.5) * dt,
            SamplePoint::LeftEndpoint => t0 + j as f64 * dt,
        }
    }
}

/// The single-step factors `exp(-i M(s_j) dt)` for `j = 0..steps`, in time
/// order, where `s_j` is picked by `point`.
pub fn step_factors<F>(
    m_of_t: F,
    t0: f64,
    t1: f64,
    steps: usize,
    point: SamplePoint,
) -> Result<Vec<ComplexMatrix>>
where
    F: Fn(f64) -> Result<ComplexMatrix>,
{
    check_grid(t0, t1, steps)?;
    let dt = (t1 - t0) / steps as f64;
    let minus_i_dt = C64::new(0.0, -dt);
    let mut factors = Vec::with_capacity(steps);
    let mut dim = None;
    for j in 0..steps {
        let m = m_of_t(point.time(t0, dt, j))?;
        match dim {
            None => dim = Some(m.rows()),
            Some(d) if d != m.rows() || !m.is_square() => {
                return Err(Error::Dimension(format!(
                    "generator changed shape from {d}x{d} to {}x{}",
                    m.rows(),
                    m.cols()
                )))
            }
            _ => {}
        }
        factors.push(expm(&m.scale(minus_i_dt)?)?);
    }
    Ok(factors)
}

/// Time-ordered exponential `T exp(-i ∫ M dt)` over `[t0, t1]`, built as the
/// right-to-left product of `steps` single-step exponentials with the
/// generator sampled at step midpoints.
pub fn ordered_propagator<F>(m_of_t: F, t0: f64, t1: f64, steps: usize) -> Result<ComplexMatrix>
where
    F: Fn(f64) -> Result<ComplexMatrix>,
{
    ordered_propagator_with(m_of_t, t0, t1, steps, SamplePoint::Midpoint)
}

pub fn ordered_propagator_with<F>(
    m_of_t: F,
    t0: f64,
    t1: f64,
    steps: usize,
    point: SamplePoint,
) -> Result<ComplexMatrix>
where
    F: Fn(f64) -> Result<ComplexMatrix>,
{
    let factors = step_factors(m_of_t, t0, t1, steps, point)?;
    chain(&factors)
}

/// Product `F_{n-1} ... F_1 F_0` of time-ordered factors.
pub fn chain(factors: &[ComplexMatrix]) -> Result<ComplexMatrix> {
    let n = factors
        .first()
        .map(|f| f.rows())
        .ok_or_else(|| Error::Domain("empty factor list".into()))?;
    factors
        .iter()
        .try_fold(ComplexMatrix::identity(n), |acc, f| f.mul(&acc))
}

fn check_grid(t0: f64, t1: f64, steps: usize) -> Result<()> {
    if !(t0.is_finite() && t1.is_finite()) {
        return Err(Error::Domain("non-finite time bounds".into()));
    }
    if t1 < t0 {
        return Err(Error::Interval { t0, t1 });
    }
    if steps == 0 {
        return Err(Error::Domain("at least one time step is required".into()));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn rabi(g: f64) -> ComplexMatrix {
        ComplexMatrix::from_row_slice(2, 2, &[c(0.0, 0.0), c(g, 0.0), c(g, 0.0), c(0.0, 0.0)]).unwrap()
    }

    #[test]
    fn expm_of_zero_is_identity() {
        let e = expm(&ComplexMatrix::zeros(3, 3)).unwrap();
        assert_eq!(e.max_abs_diff(&ComplexMatrix::identity(3)).unwrap(), 0.0);
    }

    #[test]
    fn expm_diagonal_phases() {
        let (t1, t2) = (0.7, -2.3);
        let a = ComplexMatrix::from_diagonal(&[c(0.0, -t1), c(0.0, -t2)]);
        let e = expm(&a).unwrap();
        let want = ComplexMatrix::from_diagonal(&[C64::from_polar(1.0, -t1), C64::from_polar(1.0, -t2)]);
        assert!(e.max_abs_diff(&want).unwrap() < 1e-14);
    }

    #[test]
    fn expm_rabi_rotation() {
        let (g, t) = (1.3, 2.1);
        let e = expm(&rabi(g).scale(c(0.0, -t)).unwrap()).unwrap();
        let (co, si) = ((g * t).cos(), (g * t).sin());
        let want = ComplexMatrix::from_row_slice(2, 2, &[c(co, 0.0), c(0.0, -si), c(0.0, -si), c(co, 0.0)])
            .unwrap();
        assert!(e.max_abs_diff(&want).unwrap() < 1e-13);
    }

    #[test]
    fn expm_rejects_bad_input() {
        assert!(matches!(expm(&ComplexMatrix::zeros(2, 3)), Err(Error::Dimension(_))));
        let bad = ComplexMatrix { inner: DMatrix::from_element(2, 2, c(f64::NAN, 0.0)) };
        assert!(matches!(expm(&bad), Err(Error::Domain(_))));
    }

    #[test]
    fn from_dmatrix_rejects_infinity() {
        let m = DMatrix::from_element(2, 2, c(f64::INFINITY, 0.0));
        assert!(ComplexMatrix::from_dmatrix(m).is_err());
    }

    #[test]
    fn binary_ops_check_shapes() {
        let a = ComplexMatrix::zeros(2, 3);
        let b = ComplexMatrix::zeros(2, 3);
        assert!(a.mul(&b).is_err());
        assert!(a.add(&b).is_ok());
        assert!(a.sub(&ComplexMatrix::zeros(3, 2)).is_err());
        assert!(a.apply(&[c(1.0, 0.0); 2]).is_err());
    }

    #[test]
    fn propagator_of_constant_generator() {
        let m = ComplexMatrix::from_row_slice(
            3,
            3,
            &[c(0.0, -0.05), c(1.0, 0.0), c(0.0, 0.0), c(1.0, 0.0), c(0.0, -0.2), c(0.4, 0.0), c(0.0, 0.0), c(0.4, 0.0), c(0.0, 0.0)],
        )
        .unwrap();
        let p = ordered_propagator(|_| Ok(m.clone()), 0.5, 3.0, 37).unwrap();
        let want = expm(&m.scale(c(0.0, -2.5)).unwrap()).unwrap();
        assert!(p.max_abs_diff(&want).unwrap() < 1e-10);
    }

    #[test]
    fn propagator_of_commuting_family() {
        // M(t) = f(t) A, so T exp(-i ∫M) = exp(-i A ∫f).
        let a = rabi(1.0);
        let f = |t: f64| 1.0 + 0.5 * t;
        let p = ordered_propagator(|t| a.scale(c(f(t), 0.0)), 0.0, 2.0, 400).unwrap();
        let integral = 2.0 + 0.25 * 4.0;
        let want = expm(&a.scale(c(0.0, -integral)).unwrap()).unwrap();
        // the midpoint rule is exact for a linear f
        assert!(p.max_abs_diff(&want).unwrap() < 1e-10);
    }

    #[test]
    fn zero_length_interval_is_identity() {
        let p = ordered_propagator(|_| Ok(rabi(3.0)), 1.0, 1.0, 4).unwrap();
        assert_abs_diff_eq!(p.max_abs_diff(&ComplexMatrix::identity(2)).unwrap(), 0.0);
    }

    #[test]
    fn propagator_rejects_bad_grid() {
        let m = |_: f64| Ok(rabi(1.0));
        assert!(matches!(ordered_propagator(m, 1.0, 0.0, 10), Err(Error::Interval { .. })));
        assert!(matches!(ordered_propagator(m, 0.0, 1.0, 0), Err(Error::Domain(_))));
    }

    #[test]
    fn generator_shape_change_is_an_error() {
        let m = |t: f64| {
            if t < 0.5 {
                Ok(ComplexMatrix::zeros(2, 2))
            } else {
                Ok(ComplexMatrix::zeros(3, 3))
            }
        };
        assert!(matches!(ordered_propagator(m, 0.0, 1.0, 4), Err(Error::Dimension(_))));
    }

    #[test]
    fn left_endpoint_and_midpoint_sample_times() {
        assert_eq!(SamplePoint::Midpoint.time(1.0, 0.5, 2), 2.25);
        assert_eq!(SamplePoint::LeftEndpoint.time(1.0, 0.5, 2), 2.0);
    }
}
