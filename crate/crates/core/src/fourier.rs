//! Truncated Fourier representation of 1-periodic maps `S^1 -> R^n`.
//!
//! A map is stored as complex coefficients `c_{j,k}` for component `j` and
//! wavenumber `k = -K..K`, so that `x_j(t) = sum_k c_{j,k} e^{2 pi i k t}`.
//! Real-valuedness is kept as the invariant `c_{j,-k} = conj(c_{j,k})`,
//! enforced on every construction path. The grid size is `N = 2K+1`; keeping
//! it odd avoids an unpaired Nyquist mode, so the shift operator stays
//! exactly unitary.

use num_complex::Complex64;
use std::f64::consts::PI;

use crate::error::{Error, Result};

/// Highest Sobolev level exposed for norm queries.
pub const MAX_SOBOLEV_LEVEL: usize = 6;

#[derive(Debug, Clone, PartialEq)]
pub struct PeriodicMap {
    dim: usize,
    k_max: usize,
    /// Row-major by component, then wavenumber `k = -K..K`.
    modes: Vec<Complex64>,
}

impl PeriodicMap {
    pub fn zero(dim: usize, k_max: usize) -> Self {
        Self {
            dim,
            k_max,
            modes: vec![Complex64::new(0.0, 0.0); dim * (2 * k_max + 1)],
        }
    }

    /// Build from a full spectrum; symmetrizes to enforce real-valuedness.
    pub fn from_modes(dim: usize, k_max: usize, modes: Vec<Complex64>) -> Self {
        let n = 2 * k_max + 1;
        assert_eq!(modes.len(), dim * n, "mode vector length");
        let mut map = Self { dim, k_max, modes };
        map.symmetrize();
        map
    }

    /// Trigonometric interpolation through `dim x N` samples (row-major by
    /// component) on the uniform grid `t_i = i/N`.
    pub fn from_samples(dim: usize, values: &[f64]) -> Result<Self> {
        assert_eq!(values.len() % dim, 0, "sample length divisible by dim");
        let n = values.len() / dim;
        if n < 3 {
            return Err(Error::TooFewSamples(n));
        }
        if n.is_multiple_of(2) {
            return Err(Error::EvenGridSize(n));
        }
        let k_max = (n - 1) / 2;
        let mut modes = vec![Complex64::new(0.0, 0.0); dim * n];
        for j in 0..dim {
            let row = &values[j * n..(j + 1) * n];
            for k in -(k_max as i64)..=(k_max as i64) {
                let mut acc = Complex64::new(0.0, 0.0);
                for (i, &v) in row.iter().enumerate() {
                    let angle = -2.0 * PI * (k as f64) * (i as f64) / (n as f64);
                    acc += v * Complex64::new(angle.cos(), angle.sin());
                }
                modes[j * n + (k + k_max as i64) as usize] = acc / (n as f64);
            }
        }
        Ok(Self::from_modes(dim, k_max, modes))
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn k_max(&self) -> usize {
        self.k_max
    }

    pub fn grid_size(&self) -> usize {
        2 * self.k_max + 1
    }

    pub fn mode(&self, component: usize, k: i64) -> Complex64 {
        let n = self.grid_size();
        self.modes[component * n + (k + self.k_max as i64) as usize]
    }

    pub fn set_mode(&mut self, component: usize, k: i64, value: Complex64) {
        let n = self.grid_size();
        self.modes[component * n + (k + self.k_max as i64) as usize] = value;
        let conj_idx = component * n + (-k + self.k_max as i64) as usize;
        self.modes[conj_idx] = value.conj();
    }

    fn symmetrize(&mut self) {
        let n = self.grid_size();
        let k_max = self.k_max as i64;
        for j in 0..self.dim {
            for k in 0..=k_max {
                let pos = j * n + (k + k_max) as usize;
                let neg = j * n + (-k + k_max) as usize;
                let avg = 0.5 * (self.modes[pos] + self.modes[neg].conj());
                self.modes[pos] = avg;
                self.modes[neg] = avg.conj();
            }
        }
    }

    /// Exact evaluation of the trigonometric series at time `t`.
    pub fn eval(&self, t: f64) -> Vec<f64> {
        let n = self.grid_size();
        let k_max = self.k_max as i64;
        let mut out = vec![0.0; self.dim];
        for (j, slot) in out.iter_mut().enumerate() {
            // k = 0 term plus conjugate pairs.
            let mut acc = self.modes[j * n + k_max as usize].re;
            for k in 1..=k_max {
                let c = self.modes[j * n + (k + k_max) as usize];
                let angle = 2.0 * PI * (k as f64) * t;
                acc += 2.0 * (c.re * angle.cos() - c.im * angle.sin());
            }
            *slot = acc;
        }
        out
    }

    /// Samples on the uniform grid with `points` nodes, row-major by component.
    pub fn to_samples(&self, points: usize) -> Vec<f64> {
        let mut out = vec![0.0; self.dim * points];
        for i in 0..points {
            let t = i as f64 / points as f64;
            let v = self.eval(t);
            for j in 0..self.dim {
                out[j * points + i] = v[j];
            }
        }
        out
    }

    /// The shift `x(. - tau)`: multiplies mode `k` by `e^{-2 pi i k tau}`.
    pub fn shift(&self, tau: f64) -> Self {
        let n = self.grid_size();
        let k_max = self.k_max as i64;
        let mut modes = self.modes.clone();
        for j in 0..self.dim {
            for k in -k_max..=k_max {
                let angle = -2.0 * PI * (k as f64) * tau;
                modes[j * n + (k + k_max) as usize] *= Complex64::new(angle.cos(), angle.sin());
            }
        }
        Self {
            dim: self.dim,
            k_max: self.k_max,
            modes,
        }
    }

    /// Exact time derivative: mode `k` times `2 pi i k`.
    pub fn derivative(&self) -> Self {
        let n = self.grid_size();
        let k_max = self.k_max as i64;
        let mut modes = self.modes.clone();
        for j in 0..self.dim {
            for k in -k_max..=k_max {
                modes[j * n + (k + k_max) as usize] *= Complex64::new(0.0, 2.0 * PI * k as f64);
            }
        }
        Self {
            dim: self.dim,
            k_max: self.k_max,
            modes,
        }
    }

    /// `||x||_m^2 = sum_{j,k} (1 + (2 pi k)^2)^m |c_{j,k}|^2`.
    pub fn sobolev_norm(&self, level: usize) -> Result<f64> {
        if level > MAX_SOBOLEV_LEVEL {
            return Err(Error::LevelTooHigh {
                requested: level,
                max: MAX_SOBOLEV_LEVEL,
            });
        }
        let n = self.grid_size();
        let k_max = self.k_max as i64;
        let mut acc = 0.0;
        for j in 0..self.dim {
            for k in -k_max..=k_max {
                let w = 1.0 + (2.0 * PI * k as f64).powi(2);
                acc += w.powi(level as i32) * self.modes[j * n + (k + k_max) as usize].norm_sqr();
            }
        }
        Ok(acc.sqrt())
    }

    /// L^2 norm, i.e. level 0.
    pub fn l2_norm(&self) -> f64 {
        self.modes.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt()
    }

    /// `|| (shift(x,T) - x)/T + derivative(x) ||_0`, the defect of the
    /// difference quotient against the exact derivative of the shift.
    pub fn difference_quotient_gap(&self, t_step: f64) -> Result<f64> {
        if t_step == 0.0 {
            return Err(Error::ZeroStep);
        }
        let quotient = self
            .shift(t_step)
            .sub(self)
            .scale(1.0 / t_step)
            .add(&self.derivative());
        Ok(quotient.l2_norm())
    }

    pub fn add(&self, other: &Self) -> Self {
        self.zip(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.zip(other, |a, b| a - b)
    }

    pub fn scale(&self, factor: f64) -> Self {
        let modes = self.modes.iter().map(|c| c * factor).collect();
        Self {
            dim: self.dim,
            k_max: self.k_max,
            modes,
        }
    }

    fn zip(&self, other: &Self, f: impl Fn(Complex64, Complex64) -> Complex64) -> Self {
        assert_eq!(self.dim, other.dim);
        assert_eq!(self.k_max, other.k_max);
        let modes = self
            .modes
            .iter()
            .zip(&other.modes)
            .map(|(&a, &b)| f(a, b))
            .collect();
        Self {
            dim: self.dim,
            k_max: self.k_max,
            modes,
        }
    }

    /// Restrict or zero-pad the spectrum to a new truncation.
    pub fn with_k_max(&self, k_max: usize) -> Self {
        let mut out = Self::zero(self.dim, k_max);
        let keep = self.k_max.min(k_max) as i64;
        let n_old = self.grid_size();
        let n_new = out.grid_size();
        for j in 0..self.dim {
            for k in -keep..=keep {
                out.modes[j * n_new + (k + k_max as i64) as usize] =
                    self.modes[j * n_old + (k + self.k_max as i64) as usize];
            }
        }
        out
    }

    /// Real coordinates per component: `[Re c_0, Re c_1, Im c_1, ..., Re c_K, Im c_K]`,
    /// components stacked. Length `dim * (2K+1)`.
    pub fn to_real_coeffs(&self) -> Vec<f64> {
        let n = self.grid_size();
        let k_max = self.k_max as i64;
        let mut out = Vec::with_capacity(self.dim * n);
        for j in 0..self.dim {
            out.push(self.modes[j * n + k_max as usize].re);
            for k in 1..=k_max {
                let c = self.modes[j * n + (k + k_max) as usize];
                out.push(c.re);
                out.push(c.im);
            }
        }
        out
    }

    pub fn from_real_coeffs(dim: usize, k_max: usize, coeffs: &[f64]) -> Self {
        let n = 2 * k_max + 1;
        assert_eq!(coeffs.len(), dim * n, "real coefficient length");
        let mut out = Self::zero(dim, k_max);
        for j in 0..dim {
            let row = &coeffs[j * n..(j + 1) * n];
            out.set_mode(j, 0, Complex64::new(row[0], 0.0));
            for k in 1..=k_max as i64 {
                let re = row[(2 * k - 1) as usize];
                let im = row[(2 * k) as usize];
                out.set_mode(j, k, Complex64::new(re, im));
            }
        }
        out
    }

    /// Energy fraction carried by wavenumbers `|k| > K/2` in the H^1 weight;
    /// small values certify spectral smoothness of a computed solution.
    pub fn tail_energy_fraction(&self) -> f64 {
        let n = self.grid_size();
        let k_max = self.k_max as i64;
        let cut = k_max / 2;
        let mut tail = 0.0;
        let mut total = 0.0;
        for j in 0..self.dim {
            for k in -k_max..=k_max {
                let w = 1.0 + (2.0 * PI * k as f64).powi(2);
                let e = w * self.modes[j * n + (k + k_max) as usize].norm_sqr();
                total += e;
                if k.abs() > cut {
                    tail += e;
                }
            }
        }
        if total == 0.0 {
            0.0
        } else {
            tail / total
        }
    }

    /// Interleaved `(re, im)` pairs, row-major by component then wavenumber
    /// `k = -K..K`; the on-disk layout used by the branch file.
    pub fn to_interleaved(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(2 * self.modes.len());
        for c in &self.modes {
            out.push(c.re);
            out.push(c.im);
        }
        out
    }

    pub fn from_interleaved(dim: usize, k_max: usize, data: &[f64]) -> Self {
        let n = 2 * k_max + 1;
        assert_eq!(data.len(), 2 * dim * n, "interleaved coefficient length");
        let modes = data
            .chunks_exact(2)
            .map(|p| Complex64::new(p[0], p[1]))
            .collect();
        Self::from_modes(dim, k_max, modes)
    }

    /// Random map with geometrically decaying spectrum, for property sweeps.
    pub fn random(dim: usize, k_max: usize, rng: &mut impl rand::Rng) -> Self {
        let mut out = Self::zero(dim, k_max);
        for j in 0..dim {
            out.set_mode(j, 0, Complex64::new(rng.gen_range(-1.0..1.0), 0.0));
            for k in 1..=k_max as i64 {
                let decay = 0.7_f64.powi(k as i32);
                let re = rng.gen_range(-1.0..1.0) * decay;
                let im = rng.gen_range(-1.0..1.0) * decay;
                out.set_mode(j, k, Complex64::new(re, im));
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn samples_of(f: impl Fn(f64) -> f64, n: usize) -> Vec<f64> {
        (0..n).map(|i| f(i as f64 / n as f64)).collect()
    }

    #[test]
    fn constant_samples_give_only_zero_mode() {
        let x = PeriodicMap::from_samples(1, &[3.5; 7]).unwrap();
        assert_abs_diff_eq!(x.mode(0, 0).re, 3.5, epsilon = 1e-13);
        for k in 1..=3 {
            assert!(x.mode(0, k).norm() < 1e-13);
        }
    }

    #[test]
    fn cosine_samples_split_into_conjugate_pair() {
        let v = samples_of(|t| (2.0 * PI * t).cos(), 5);
        let x = PeriodicMap::from_samples(1, &v).unwrap();
        assert_abs_diff_eq!(x.mode(0, 1).re, 0.5, epsilon = 1e-13);
        assert_abs_diff_eq!(x.mode(0, 1).im, 0.0, epsilon = 1e-13);
        assert_abs_diff_eq!(x.mode(0, -1).re, 0.5, epsilon = 1e-13);
        assert!(x.mode(0, 2).norm() < 1e-13);
    }

    #[test]
    fn sine_samples_are_imaginary_modes() {
        let v = samples_of(|t| (4.0 * PI * t).sin(), 5);
        let x = PeriodicMap::from_samples(1, &v).unwrap();
        assert_abs_diff_eq!(x.mode(0, 2).im, -0.5, epsilon = 1e-13);
        assert_abs_diff_eq!(x.mode(0, -2).im, 0.5, epsilon = 1e-13);
        assert!(x.mode(0, 1).norm() < 1e-13);
    }

    #[test]
    fn from_samples_rejects_bad_grids() {
        assert!(matches!(
            PeriodicMap::from_samples(1, &[0.0; 4]),
            Err(Error::EvenGridSize(4))
        ));
        assert!(matches!(
            PeriodicMap::from_samples(1, &[0.0; 2]),
            Err(Error::TooFewSamples(2))
        ));
    }

    #[test]
    fn samples_round_trip() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let x = PeriodicMap::random(2, 8, &mut rng);
        let n = x.grid_size();
        let samples = x.to_samples(n);
        let y = PeriodicMap::from_samples(2, &samples).unwrap();
        let rel = y.sub(&x).l2_norm() / x.l2_norm();
        assert!(rel < 1e-13, "round-trip defect {rel:.3e}");
    }

    #[test]
    fn quarter_period_shift_of_cosine_is_sine() {
        let v = samples_of(|t| (2.0 * PI * t).cos(), 9);
        let x = PeriodicMap::from_samples(1, &v).unwrap().shift(0.25);
        for i in 0..9 {
            let t = i as f64 / 9.0;
            assert_abs_diff_eq!(x.eval(t)[0], (2.0 * PI * t).sin(), epsilon = 1e-12);
        }
    }

    #[test]
    fn shift_is_an_isometry_on_all_levels() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let x = PeriodicMap::random(2, 10, &mut rng);
        let y = x.shift(0.37);
        for m in 0..=4 {
            let a = x.sobolev_norm(m).unwrap();
            let b = y.sobolev_norm(m).unwrap();
            assert!((a - b).abs() <= 1e-13 * a);
        }
    }

    #[test]
    fn shift_zero_is_identity() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let x = PeriodicMap::random(1, 6, &mut rng);
        assert!(x.shift(0.0).sub(&x).l2_norm() < 1e-15);
    }

    #[test]
    fn derivative_of_constant_is_zero() {
        let x = PeriodicMap::from_samples(1, &[2.0; 5]).unwrap();
        assert!(x.derivative().l2_norm() < 1e-14);
    }

    #[test]
    fn derivative_of_sine_is_scaled_cosine() {
        let v = samples_of(|t| (2.0 * PI * t).sin(), 9);
        let dx = PeriodicMap::from_samples(1, &v).unwrap().derivative();
        for i in 0..9 {
            let t = i as f64 / 9.0;
            assert_abs_diff_eq!(
                dx.eval(t)[0],
                2.0 * PI * (2.0 * PI * t).cos(),
                epsilon = 1e-11
            );
        }
    }

    #[test]
    fn derivative_of_double_cosine() {
        let v = samples_of(|t| (4.0 * PI * t).cos(), 9);
        let dx = PeriodicMap::from_samples(1, &v).unwrap().derivative();
        for i in 0..9 {
            let t = i as f64 / 9.0;
            assert_abs_diff_eq!(
                dx.eval(t)[0],
                -4.0 * PI * (4.0 * PI * t).sin(),
                epsilon = 1e-10
            );
        }
    }

    #[test]
    fn sobolev_norm_of_sine() {
        let v = samples_of(|t| (2.0 * PI * t).sin(), 9);
        let x = PeriodicMap::from_samples(1, &v).unwrap();
        assert_abs_diff_eq!(x.sobolev_norm(0).unwrap(), (0.5_f64).sqrt(), epsilon = 1e-13);
        let expect = ((1.0 + (2.0 * PI).powi(2)) / 2.0).sqrt();
        assert_abs_diff_eq!(x.sobolev_norm(1).unwrap(), expect, epsilon = 1e-12);
    }

    #[test]
    fn sobolev_norm_rejects_high_levels() {
        let x = PeriodicMap::zero(1, 4);
        assert!(matches!(
            x.sobolev_norm(7),
            Err(Error::LevelTooHigh { requested: 7, max: 6 })
        ));
    }

    #[test]
    fn difference_quotient_gap_cases() {
        let c = PeriodicMap::from_samples(1, &[1.0; 5]).unwrap();
        assert!(c.difference_quotient_gap(0.3).unwrap() < 1e-14);
        assert!(matches!(c.difference_quotient_gap(0.0), Err(Error::ZeroStep)));

        let v = samples_of(|t| (2.0 * PI * t).sin(), 9);
        let x = PeriodicMap::from_samples(1, &v).unwrap();
        assert!(x.difference_quotient_gap(1e-3).unwrap() < 0.05);

        // First-order convergence: gap(T)/gap(2T) -> 1/2.
        let g1 = x.difference_quotient_gap(1e-4).unwrap();
        let g2 = x.difference_quotient_gap(2e-4).unwrap();
        assert!((g1 / g2 - 0.5).abs() < 0.01, "ratio {}", g1 / g2);
    }

    #[test]
    fn real_coeff_round_trip() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let x = PeriodicMap::random(3, 7, &mut rng);
        let y = PeriodicMap::from_real_coeffs(3, 7, &x.to_real_coeffs());
        assert!(y.sub(&x).l2_norm() < 1e-15);
    }

    #[test]
    fn interleaved_round_trip() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let x = PeriodicMap::random(2, 5, &mut rng);
        let y = PeriodicMap::from_interleaved(2, 5, &x.to_interleaved());
        assert!(y.sub(&x).l2_norm() < 1e-15);
    }
}
