//! The nonlinear section whose zero set is the space of periodic delay
//! orbits, together with its linearization, discrete Jacobians in the real
//! coefficient basis, and kernel-dimension diagnostics.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::field::{self, DelayCoefficientField, GradFn, ScalarFn, VectorFieldSpec};
use crate::fourier::PeriodicMap;

#[derive(Clone)]
pub enum SectionForm {
    /// `dx/dt = X_t(x(t - tau))`
    PlainDelay,
    /// `dx/dt = f_t(x(t - tau)) * X_t(x(t))` in a flat chart
    DelayCoefficient { coeff: ScalarFn, coeff_grad: GradFn },
}

#[derive(Clone)]
pub struct SectionProblem {
    pub field: VectorFieldSpec,
    pub form: SectionForm,
    pub k_max: usize,
}

/// A direction `(T, xhat)` in delay-cross-orbit space.
#[derive(Clone)]
pub struct TangentVector {
    pub dtau: f64,
    pub dx: PeriodicMap,
}

#[derive(Debug, Clone, serde::Serialize, serde::Deserialize)]
pub struct IndexReport {
    pub kernel_dim_full: usize,
    pub kernel_dim_x_only: usize,
    pub smallest_singular_values: Vec<f64>,
}

/// Singular values below this fraction of the largest count as zero.
pub const KERNEL_SV_THRESHOLD: f64 = 1e-8;

impl SectionProblem {
    pub fn plain(field: VectorFieldSpec, k_max: usize) -> Self {
        assert!(k_max >= 4, "truncation too small");
        Self { field, form: SectionForm::PlainDelay, k_max }
    }

    pub fn delay_coefficient(field: DelayCoefficientField, k_max: usize) -> Self {
        assert!(k_max >= 4, "truncation too small");
        Self {
            field: field.base,
            form: SectionForm::DelayCoefficient {
                coeff: field.coeff,
                coeff_grad: field.coeff_grad,
            },
        k_max,
        }
    }

    pub fn dim(&self) -> usize {
        self.field.dim
    }

    /// Total number of real unknowns `n * (2K + 1)`.
    pub fn real_dim(&self) -> usize {
        self.dim() * (2 * self.k_max + 1)
    }

    fn check_dims(&self, x: &PeriodicMap) -> Result<()> {
        if x.dim() != self.dim() {
            return Err(Error::DimensionMismatch { expected: self.dim(), got: x.dim() });
        }
        Ok(())
    }

    /// `s(tau, x) = dx/dt - X(shift(x, tau))`, or the delayed-coefficient
    /// variant, as a periodic map at the problem truncation.
    pub fn residual(&self, tau: f64, x: &PeriodicMap) -> Result<PeriodicMap> {
        self.check_dims(x)?;
        let dx = x.derivative();
        match &self.form {
            SectionForm::PlainDelay => {
                let rhs = field::eval_on_orbit(&self.field, &x.shift(tau))?;
                Ok(dx.sub(&rhs))
            }
            SectionForm::DelayCoefficient { coeff, .. } => {
                let n = self.dim();
                let m = field::dealiased_grid(x.k_max());
                let shifted = x.shift(tau).to_samples(m);
                let plain = x.to_samples(m);
                let mut out = vec![0.0; n * m];
                for i in 0..m {
                    let t = i as f64 / m as f64;
                    let ys = DVector::from_fn(n, |j, _| shifted[j * m + i]);
                    let y = DVector::from_fn(n, |j, _| plain[j * m + i]);
                    let v = self.field.eval(t, &y) * coeff(t, &ys);
                    for j in 0..n {
                        out[j * m + i] = v[j];
                    }
                }
                let rhs = PeriodicMap::from_samples(n, &out)?.with_k_max(x.k_max());
                Ok(dx.sub(&rhs))
            }
        }
    }

    /// Vertical differential of the section at `(tau, x)` applied to `v`.
    ///
    /// Plain form: `dxhat/dt - dX(shift(x,tau)) . shift(xhat - T dx/dt, tau)`.
    pub fn linearize(&self, tau: f64, x: &PeriodicMap, v: &TangentVector) -> Result<PeriodicMap> {
        self.check_dims(x)?;
        self.check_dims(&v.dx)?;
        let n = self.dim();
        let m = field::dealiased_grid(x.k_max());
        // shift(xhat, tau) - T shift(dx/dt, tau) = shift(xhat - T dx/dt, tau)
        let shifted_dir = v.dx.sub(&x.derivative().scale(v.dtau)).shift(tau);
        let dir_samples = shifted_dir.to_samples(m);
        let shifted_orbit = x.shift(tau).to_samples(m);
        match &self.form {
            SectionForm::PlainDelay => {
                let mut out = vec![0.0; n * m];
                for i in 0..m {
                    let t = i as f64 / m as f64;
                    let ys = DVector::from_fn(n, |j, _| shifted_orbit[j * m + i]);
                    let w = DVector::from_fn(n, |j, _| dir_samples[j * m + i]);
                    let term = self.field.jac(t, &ys) * w;
                    for j in 0..n {
                        out[j * m + i] = term[j];
                    }
                }
                let term = PeriodicMap::from_samples(n, &out)?.with_k_max(x.k_max());
                Ok(v.dx.derivative().sub(&term))
            }
            SectionForm::DelayCoefficient { coeff, coeff_grad } => {
                let orbit = x.to_samples(m);
                let dir_plain = v.dx.to_samples(m);
                let mut out = vec![0.0; n * m];
                for i in 0..m {
                    let t = i as f64 / m as f64;
                    let ys = DVector::from_fn(n, |j, _| shifted_orbit[j * m + i]);
                    let y = DVector::from_fn(n, |j, _| orbit[j * m + i]);
                    let w = DVector::from_fn(n, |j, _| dir_samples[j * m + i]);
                    let xh = DVector::from_fn(n, |j, _| dir_plain[j * m + i]);
                    let f_val = coeff(t, &ys);
                    let df_dot = coeff_grad(t, &ys).dot(&w);
                    let term =
                        self.field.eval(t, &y) * df_dot + self.field.jac(t, &y) * xh * f_val;
                    for j in 0..n {
                        out[j * m + i] = term[j];
                    }
                }
                let term = PeriodicMap::from_samples(n, &out)?.with_k_max(x.k_max());
                Ok(v.dx.derivative().sub(&term))
            }
        }
    }

    /// The delay column of the differential: `linearize` at `(T, xhat) = (1, 0)`.
    pub fn tau_derivative(&self, tau: f64, x: &PeriodicMap) -> Result<PeriodicMap> {
        self.linearize(
            tau,
            x,
            &TangentVector { dtau: 1.0, dx: PeriodicMap::zero(self.dim(), x.k_max()) },
        )
    }

    /// Column `i` of the discretized orbit-direction Jacobian.
    fn jacobian_column(&self, tau: f64, x: &PeriodicMap, i: usize) -> Result<DVector<f64>> {
        let nn = self.real_dim();
        let mut e = vec![0.0; nn];
        e[i] = 1.0;
        let basis = PeriodicMap::from_real_coeffs(self.dim(), self.k_max, &e);
        let image = self.linearize(tau, x, &TangentVector { dtau: 0.0, dx: basis })?;
        Ok(DVector::from_vec(image.to_real_coeffs()))
    }

    /// Dense discretization of the orbit-direction differential in the real
    /// coefficient basis.
    pub fn assemble_jacobian_x(&self, tau: f64, x: &PeriodicMap) -> Result<DMatrix<f64>> {
        self.check_dims(x)?;
        let nn = self.real_dim();
        let columns = crate::par::try_map_indices(nn, |i| self.jacobian_column(tau, x, i))?;
        Ok(DMatrix::from_columns(&columns))
    }

    /// Sequential reference path for the same assembly; kept callable with the
    /// parallel feature enabled so the two can be benchmarked against each other.
    pub fn assemble_jacobian_x_seq(&self, tau: f64, x: &PeriodicMap) -> Result<DMatrix<f64>> {
        self.check_dims(x)?;
        let nn = self.real_dim();
        let columns = (0..nn)
            .map(|i| self.jacobian_column(tau, x, i))
            .collect::<Result<Vec<_>>>()?;
        Ok(DMatrix::from_columns(&columns))
    }

    /// Bordered `(nN) x (nN + 1)` Jacobian `[d_tau s | ds_x]`.
    pub fn bordered_jacobian(&self, tau: f64, x: &PeriodicMap) -> Result<DMatrix<f64>> {
        let tau_col = DVector::from_vec(self.tau_derivative(tau, x)?.to_real_coeffs());
        let jac = self.assemble_jacobian_x(tau, x)?;
        let mut out = DMatrix::zeros(jac.nrows(), jac.ncols() + 1);
        out.column_mut(0).copy_from(&tau_col);
        out.view_mut((0, 1), (jac.nrows(), jac.ncols())).copy_from(&jac);
        Ok(out)
    }

    /// Kernel dimensions of the bordered and square Jacobians by
    /// singular-value thresholding.
    pub fn index_diagnostic(&self, tau: f64, x: &PeriodicMap) -> Result<IndexReport> {
        let jac = self.assemble_jacobian_x(tau, x)?;
        let bordered = self.bordered_jacobian(tau, x)?;
        let sv_x = jac.svd(false, false).singular_values;
        let sv_full = bordered.svd(false, false).singular_values;
        let count = |sv: &nalgebra::DVector<f64>| -> usize {
            let max = sv.max();
            sv.iter().filter(|&&s| s < KERNEL_SV_THRESHOLD * max).count()
        };
        // The bordered map has domain one dimension larger than its range, so
        // its kernel dimension is the singular-value count plus one.
        let kernel_dim_full = count(&sv_full) + 1;
        let kernel_dim_x_only = count(&sv_x);
        let mut smallest: Vec<f64> = sv_x.iter().copied().collect();
        smallest.sort_by(|a, b| a.partial_cmp(b).unwrap());
        smallest.truncate(4);
        Ok(IndexReport { kernel_dim_full, kernel_dim_x_only, smallest_singular_values: smallest })
    }

    /// Unit vector spanning the bordered kernel (first entry is the delay
    /// component), from the right singular vector of the smallest singular value.
    pub fn bordered_kernel_vector(&self, tau: f64, x: &PeriodicMap) -> Result<DVector<f64>> {
        let bordered = self.bordered_jacobian(tau, x)?;
        // Pad with a zero row to make the matrix square; this adds a zero
        // singular value whose right singular vector spans the kernel.
        let n = bordered.ncols();
        let mut padded = DMatrix::zeros(n, n);
        padded
            .view_mut((0, 0), (bordered.nrows(), n))
            .copy_from(&bordered);
        let svd = padded.svd(false, true);
        let v_t = svd.v_t.expect("svd requested V^T");
        let sv = svd.singular_values;
        let mut min_idx = 0;
        for i in 0..sv.len() {
            if sv[i] < sv[min_idx] {
                min_idx = i;
            }
        }
        Ok(v_t.row(min_idx).transpose())
    }
}
