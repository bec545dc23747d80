//! Graph filters on the Laplacian, low-pass strength, and exact covariance.
//!
//! A filter is a scalar spectral response `h` applied to the Laplacian:
//! `H(L) = V diag(h(lambda_1), .., h(lambda_n)) V^T`. The heat kernel
//! `exp(-sigma L)` and the IIR response `(I + alpha L)^{-1}` are built
//! spectrally, which is exact in the eigenbasis rather than a truncation of
//! their series.

use ndarray::{Array1, Array2};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::partition::{IndicatorMatrix, Partition};
use crate::spectral::eig_sym;

/// Spectral generating function of a graph filter.
///
/// JSON form: `{"kind":"heat","sigma":..}`, `{"kind":"iir","alpha":..}`, or
/// `{"kind":"poly","coeffs":[..]}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum GraphFilter {
    /// `h(mu) = exp(-sigma * mu)`; strong low pass for large `sigma`.
    Heat { sigma: f64 },
    /// `h(mu) = 1 / (1 + alpha * mu)`; weak low pass for small `alpha`.
    Iir { alpha: f64 },
    /// `h(mu) = sum_t coeffs[t] * mu^t`.
    Poly { coeffs: Vec<f64> },
}

impl GraphFilter {
    pub fn heat(sigma: f64) -> Result<Self> {
        if !sigma.is_finite() || sigma < 0.0 {
            return Err(Error::Config(format!("heat filter needs sigma >= 0, got {sigma}")));
        }
        Ok(Self::Heat { sigma })
    }

    pub fn iir(alpha: f64) -> Result<Self> {
        if !alpha.is_finite() || alpha < 0.0 {
            return Err(Error::Config(format!("iir filter needs alpha >= 0, got {alpha}")));
        }
        Ok(Self::Iir { alpha })
    }

    pub fn poly(coeffs: Vec<f64>) -> Result<Self> {
        if coeffs.is_empty() || coeffs.iter().any(|c| !c.is_finite()) {
            return Err(Error::Config("poly filter needs finite, nonempty coefficients".into()));
        }
        Ok(Self::Poly { coeffs })
    }

    /// Check a deserialized filter spec.
    pub fn validate(&self) -> Result<()> {
        match self {
            Self::Heat { sigma } => Self::heat(*sigma).map(|_| ()),
            Self::Iir { alpha } => Self::iir(*alpha).map(|_| ()),
            Self::Poly { coeffs } => Self::poly(coeffs.clone()).map(|_| ()),
        }
    }

    /// Evaluate the generating function at `mu`.
    pub fn response(&self, mu: f64) -> f64 {
        match self {
            Self::Heat { sigma } => (-sigma * mu).exp(),
            Self::Iir { alpha } => 1.0 / (1.0 + alpha * mu),
            Self::Poly { coeffs } => {
                // Horner evaluation.
                coeffs.iter().rev().fold(0.0, |acc, &c| acc * mu + c)
            }
        }
    }

    /// Short identifier used in file names and CSV columns.
    pub fn key(&self) -> String {
        match self {
            Self::Heat { .. } => "heat".into(),
            Self::Iir { .. } => "iir".into(),
            Self::Poly { .. } => "poly".into(),
        }
    }

    /// Human-readable description with parameters.
    pub fn describe(&self) -> String {
        match self {
            Self::Heat { sigma } => format!("heat(sigma={sigma})"),
            Self::Iir { alpha } => format!("iir(alpha={alpha})"),
            Self::Poly { coeffs } => format!("poly(degree={})", coeffs.len().saturating_sub(1)),
        }
    }
}

/// Dense filter matrix `H(L)` together with the Laplacian spectrum it was
/// built from.
#[derive(Debug, Clone)]
pub struct FilterMatrix {
    /// `V diag(h(lambda)) V^T`; symmetric and commuting with `L`.
    pub matrix: Array2<f64>,
    /// `h(lambda_i)` in ascending-`lambda` order.
    pub response: Vec<f64>,
    /// Laplacian eigenvalues, ascending.
    pub laplacian_eigenvalues: Vec<f64>,
}

impl FilterMatrix {
    pub fn n(&self) -> usize {
        self.matrix.nrows()
    }
}

/// Build `H(L)` for `g` by spectral synthesis.
pub fn build_filter_matrix(filter: &GraphFilter, g: &Graph) -> Result<FilterMatrix> {
    let dec = eig_sym(&g.laplacian())?;
    filter_matrix_from_eig(filter, &dec)
}

/// Synthesize `H(L)` from an existing Laplacian eigendecomposition, so one
/// decomposition can serve several filters.
pub fn filter_matrix_from_eig(
    filter: &GraphFilter,
    dec: &crate::spectral::EigenDecomposition,
) -> Result<FilterMatrix> {
    filter.validate()?;
    let response: Vec<f64> = dec.values.iter().map(|&l| filter.response(l)).collect();
    let mut scaled = dec.vectors.clone();
    for (j, &h) in response.iter().enumerate() {
        scaled.column_mut(j).mapv_inplace(|x| x * h);
    }
    let matrix = scaled.dot(&dec.vectors.t());
    Ok(FilterMatrix {
        matrix,
        response,
        laplacian_eigenvalues: dec.values.clone(),
    })
}

/// Low-pass strength report for a filter against a Laplacian spectrum.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LowPassReport {
    /// `eta_r`: max high-band magnitude over min low-band magnitude.
    pub eta: f64,
    /// Whether `eta_r < 1`.
    pub is_low_pass: bool,
}

/// Low-pass ratio `eta_r` of a filter over the ascending Laplacian
/// eigenvalues. Fails with [`Error::DegenerateLowPass`] when the filter
/// vanishes somewhere on the low band (the ideal-or-degenerate case where
/// the ratio is undefined).
pub fn low_pass_ratio(filter: &GraphFilter, laplacian_eigs: &[f64], r: usize) -> Result<LowPassReport> {
    let n = laplacian_eigs.len();
    if r == 0 || r >= n {
        return Err(Error::DimensionMismatch(format!(
            "low_pass_ratio requires 1 <= r <= n-1, got r = {r}, n = {n}"
        )));
    }
    let mags: Vec<f64> = laplacian_eigs.iter().map(|&l| filter.response(l).abs()).collect();
    let low_min = mags[..r].iter().cloned().fold(f64::INFINITY, f64::min);
    let high_max = mags[r..].iter().cloned().fold(0.0f64, f64::max);
    if low_min == 0.0 {
        return Err(Error::DegenerateLowPass);
    }
    let eta = high_max / low_min;
    Ok(LowPassReport {
        eta,
        is_low_pass: eta < 1.0,
    })
}

/// Exact covariance of the observation model: `Sigma = H H^T + noise_var I`.
pub fn exact_covariance(fm: &FilterMatrix, noise_var: f64) -> Array2<f64> {
    let n = fm.n();
    let mut sigma = fm.matrix.dot(&fm.matrix.t());
    for i in 0..n {
        sigma[[i, i]] += noise_var;
    }
    // Symmetrize rounding noise from the product.
    let sym = 0.5 * (&sigma + &sigma.t());
    sym
}

/// Eigenvalues of the exact covariance, `h(lambda_i)^2 + noise_var`,
/// ascending-`lambda` order.
pub fn exact_covariance_spectrum(fm: &FilterMatrix, noise_var: f64) -> Vec<f64> {
    fm.response.iter().map(|&h| h * h + noise_var).collect()
}

/// The filtered quotient `H(L_q)` of an EEP, satisfying the commutation
/// `H(L) H = H H(L_q)` with the binary indicator.
///
/// `L_q` is similar to the symmetric compression `B = Hn^T L Hn` through the
/// cell-size scaling `S = diag(|C_k|)`: `L_q = S^{-1/2} B S^{1/2}`. Applying
/// `h` to `B`'s eigenvalues and undoing the similarity evaluates the filter
/// on `L_q` exactly, with no need to diagonalize the asymmetric `L_q`
/// itself.
pub fn quotient_filter_matrix(filter: &GraphFilter, g: &Graph, p: &Partition) -> Result<Array2<f64>> {
    filter.validate()?;
    let h = IndicatorMatrix::from_partition(p);
    let l = g.laplacian();
    let compressed = h.normalized().t().dot(&l).dot(h.normalized());
    let sym = 0.5 * (&compressed + &compressed.t());
    let dec = eig_sym(&sym)?;
    let r = p.r();
    let mut scaled = dec.vectors.clone();
    for j in 0..r {
        let hj = filter.response(dec.values[j]);
        scaled.column_mut(j).mapv_inplace(|x| x * hj);
    }
    let filtered_compressed = scaled.dot(&dec.vectors.t());
    let sizes = p.cell_sizes();
    let s_inv_sqrt = Array1::from_iter(sizes.iter().map(|&c| 1.0 / (c as f64).sqrt()));
    let s_sqrt = Array1::from_iter(sizes.iter().map(|&c| (c as f64).sqrt()));
    let mut out = filtered_compressed;
    for i in 0..r {
        for j in 0..r {
            out[[i, j]] *= s_inv_sqrt[i] * s_sqrt[j];
        }
    }
    Ok(out)
}
