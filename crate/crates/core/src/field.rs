//! Time-dependent vector fields `X: S^1 x R^n -> R^n` with spatial Jacobians,
//! including the closed-form families used as analytic oracles.

use nalgebra::{DMatrix, DVector};
use std::f64::consts::PI;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::fourier::PeriodicMap;

pub type EvalFn = Arc<dyn Fn(f64, &DVector<f64>) -> DVector<f64> + Send + Sync>;
pub type JacFn = Arc<dyn Fn(f64, &DVector<f64>) -> DMatrix<f64> + Send + Sync>;
pub type ScalarFn = Arc<dyn Fn(f64, &DVector<f64>) -> f64 + Send + Sync>;
pub type GradFn = Arc<dyn Fn(f64, &DVector<f64>) -> DVector<f64> + Send + Sync>;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FamilyTag {
    LinearAffine,
    PolynomialPeriodic,
    Custom,
}

#[derive(Clone)]
pub struct VectorFieldSpec {
    pub dim: usize,
    pub eval: EvalFn,
    pub jac: JacFn,
    pub family_tag: FamilyTag,
}

impl VectorFieldSpec {
    pub fn new(dim: usize, eval: EvalFn, jac: JacFn, family_tag: FamilyTag) -> Self {
        Self { dim, eval, jac, family_tag }
    }

    pub fn eval(&self, t: f64, y: &DVector<f64>) -> DVector<f64> {
        (self.eval)(t.rem_euclid(1.0), y)
    }

    pub fn jac(&self, t: f64, y: &DVector<f64>) -> DMatrix<f64> {
        (self.jac)(t.rem_euclid(1.0), y)
    }

    /// Zero field in `dim` dimensions.
    pub fn zero(dim: usize) -> Self {
        Self::new(
            dim,
            Arc::new(move |_, _| DVector::zeros(dim)),
            Arc::new(move |_, _| DMatrix::zeros(dim, dim)),
            FamilyTag::Custom,
        )
    }

    /// `X_t(y) = B y + b(t)` with `b` given as a periodic map.
    pub fn linear_affine(matrix: DMatrix<f64>, forcing: PeriodicMap) -> Self {
        let dim = matrix.nrows();
        assert_eq!(matrix.ncols(), dim);
        assert_eq!(forcing.dim(), dim);
        let b = matrix.clone();
        let eval: EvalFn = Arc::new(move |t, y| {
            let f = forcing.eval(t);
            &b * y + DVector::from_vec(f)
        });
        let jac: JacFn = Arc::new(move |_, _| matrix.clone());
        Self::new(dim, eval, jac, FamilyTag::LinearAffine)
    }

    /// Scalar logistic field with periodic forcing: `X_t(y) = a y (1 - y) + c cos(2 pi t)`.
    pub fn logistic(a: f64, c: f64) -> Self {
        let eval: EvalFn = Arc::new(move |t, y| {
            DVector::from_element(1, a * y[0] * (1.0 - y[0]) + c * (2.0 * PI * t).cos())
        });
        let jac: JacFn =
            Arc::new(move |_, y| DMatrix::from_element(1, 1, a * (1.0 - 2.0 * y[0])));
        Self::new(1, eval, jac, FamilyTag::PolynomialPeriodic)
    }

    /// Planar `X_t(y) = B y + eps (cos 2 pi t, sin 2 pi t)`.
    pub fn forced_rotation(matrix: DMatrix<f64>, eps: f64) -> Self {
        assert_eq!(matrix.nrows(), 2);
        assert_eq!(matrix.ncols(), 2);
        let b = matrix.clone();
        let eval: EvalFn = Arc::new(move |t, y| {
            let angle = 2.0 * PI * t;
            &b * y + eps * DVector::from_vec(vec![angle.cos(), angle.sin()])
        });
        let jac: JacFn = Arc::new(move |_, _| matrix.clone());
        Self::new(2, eval, jac, FamilyTag::PolynomialPeriodic)
    }

    /// Autonomous planar field with the unit circle as a period-1 limit cycle:
    /// `X(y) = 2 pi J y + (1 - |y|^2) y`.
    pub fn limit_cycle() -> Self {
        let eval: EvalFn = Arc::new(|_, y| {
            let r2 = y.norm_squared();
            DVector::from_vec(vec![
                -2.0 * PI * y[1] + (1.0 - r2) * y[0],
                2.0 * PI * y[0] + (1.0 - r2) * y[1],
            ])
        });
        let jac: JacFn = Arc::new(|_, y| {
            let r2 = y.norm_squared();
            DMatrix::from_row_slice(
                2,
                2,
                &[
                    1.0 - r2 - 2.0 * y[0] * y[0],
                    -2.0 * PI - 2.0 * y[0] * y[1],
                    2.0 * PI - 2.0 * y[1] * y[0],
                    1.0 - r2 - 2.0 * y[1] * y[1],
                ],
            )
        });
        Self::new(2, eval, jac, FamilyTag::PolynomialPeriodic)
    }

    /// Max relative mismatch of `jac` against central finite differences of
    /// `eval` at `probes` random points. Fails above 1e-5.
    pub fn self_test_jacobian(&self, rng: &mut impl rand::Rng, probes: usize) -> Result<f64> {
        let h = 1e-5;
        let mut worst = 0.0_f64;
        for _ in 0..probes {
            let t: f64 = rng.gen_range(0.0..1.0);
            let y = DVector::from_fn(self.dim, |_, _| rng.gen_range(-1.0..1.0));
            let analytic = self.jac(t, &y);
            let scale = 1.0 + analytic.norm();
            for c in 0..self.dim {
                let mut yp = y.clone();
                let mut ym = y.clone();
                yp[c] += h;
                ym[c] -= h;
                let col = (self.eval(t, &yp) - self.eval(t, &ym)) / (2.0 * h);
                for r in 0..self.dim {
                    let diff = (col[r] - analytic[(r, c)]).abs() / scale;
                    worst = worst.max(diff);
                }
            }
        }
        if worst > 1e-5 {
            return Err(Error::JacobianMismatch(worst));
        }
        Ok(worst)
    }
}

/// Delayed-coefficient form: `dx/dt = f_t(x(t - tau)) * X_t(x(t))` in a flat chart.
#[derive(Clone)]
pub struct DelayCoefficientField {
    pub base: VectorFieldSpec,
    pub coeff: ScalarFn,
    pub coeff_grad: GradFn,
}

impl DelayCoefficientField {
    pub fn new(base: VectorFieldSpec, coeff: ScalarFn, coeff_grad: GradFn) -> Self {
        Self { base, coeff, coeff_grad }
    }

    pub fn coeff(&self, t: f64, y: &DVector<f64>) -> f64 {
        (self.coeff)(t.rem_euclid(1.0), y)
    }

    pub fn coeff_grad(&self, t: f64, y: &DVector<f64>) -> DVector<f64> {
        (self.coeff_grad)(t.rem_euclid(1.0), y)
    }

    pub fn self_test_gradient(&self, rng: &mut impl rand::Rng, probes: usize) -> Result<f64> {
        let h = 1e-5;
        let dim = self.base.dim;
        let mut worst = 0.0_f64;
        for _ in 0..probes {
            let t: f64 = rng.gen_range(0.0..1.0);
            let y = DVector::from_fn(dim, |_, _| rng.gen_range(-1.0..1.0));
            let analytic = self.coeff_grad(t, &y);
            let scale = 1.0 + analytic.norm();
            for c in 0..dim {
                let mut yp = y.clone();
                let mut ym = y.clone();
                yp[c] += h;
                ym[c] -= h;
                let fd = (self.coeff(t, &yp) - self.coeff(t, &ym)) / (2.0 * h);
                worst = worst.max((fd - analytic[c]).abs() / scale);
            }
        }
        if worst > 1e-5 {
            return Err(Error::JacobianMismatch(worst));
        }
        Ok(worst)
    }
}

/// Padded grid size for pseudospectral composition: smallest odd `M >= 3N/2`.
pub fn dealiased_grid(k_max: usize) -> usize {
    let n = 2 * k_max + 1;
    let mut m = (3 * n).div_ceil(2);
    if m.is_multiple_of(2) {
        m += 1;
    }
    m
}

/// Pointwise composition `t -> X_t(x(t))` on a dealiased grid, truncated back
/// to the truncation of `x`.
pub fn eval_on_orbit(field: &VectorFieldSpec, x: &PeriodicMap) -> Result<PeriodicMap> {
    if field.dim != x.dim() {
        return Err(Error::DimensionMismatch { expected: field.dim, got: x.dim() });
    }
    let m = dealiased_grid(x.k_max());
    let samples = x.to_samples(m);
    let mut out = vec![0.0; field.dim * m];
    for i in 0..m {
        let t = i as f64 / m as f64;
        let y = DVector::from_fn(field.dim, |j, _| samples[j * m + i]);
        let v = field.eval(t, &y);
        for j in 0..field.dim {
            out[j * m + i] = v[j];
        }
    }
    Ok(PeriodicMap::from_samples(field.dim, &out)?.with_k_max(x.k_max()))
}

/// `t_i -> dX_{t_i}(x(t_i))` sampled on the collocation grid of `x`.
pub fn jacobian_on_orbit(field: &VectorFieldSpec, x: &PeriodicMap) -> Result<Vec<DMatrix<f64>>> {
    if field.dim != x.dim() {
        return Err(Error::DimensionMismatch { expected: field.dim, got: x.dim() });
    }
    let n = x.grid_size();
    let mut out = Vec::with_capacity(n);
    for i in 0..n {
        let t = i as f64 / n as f64;
        let y = DVector::from_vec(x.eval(t));
        out.push(field.jac(t, &y));
    }
    Ok(out)
}
