//! Eigenmode precoding and mutual information.
//!
//! With the estimate decomposed as `H_hat = U D V^H`, the transmit covariance
//! `Q = V S V^H` reduces the link to parallel eigenmodes with gains `d_i^2`.
//! [`waterfill`] chooses the diagonal `S`, and the `mutual_info_*` functions
//! evaluate the log-determinant rates (in bits) for the three CSI regimes.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use std::f64::consts::LN_2;

use crate::channel::{ChannelMatrix, EffectiveSnr, Snr};
use crate::error::{Error, Result};

const PSD_TOL: f64 = 1e-12;
const TRACE_TOL: f64 = 1e-9;

#[derive(Debug, Clone)]
pub struct SvdFactors {
    /// `N x N` unitary.
    pub u: DMatrix<Complex64>,
    /// `min(M, N)` singular values, descending.
    pub singular_values: Vec<f64>,
    /// `M x M` unitary.
    pub v: DMatrix<Complex64>,
}

impl SvdFactors {
    pub fn mode_gains(&self) -> Vec<f64> {
        self.singular_values.iter().map(|d| d * d).collect()
    }

    pub fn reconstruct(&self) -> DMatrix<Complex64> {
        let (n, m) = (self.u.nrows(), self.v.nrows());
        let mut d = DMatrix::zeros(n, m);
        for (i, s) in self.singular_values.iter().enumerate() {
            d[(i, i)] = Complex64::new(*s, 0.0);
        }
        &self.u * d * self.v.adjoint()
    }
}

/// Extends orthonormal columns to a full unitary basis.
fn complete_unitary(partial: DMatrix<Complex64>) -> DMatrix<Complex64> {
    let dim = partial.nrows();
    let mut cols: Vec<DVector<Complex64>> = partial.column_iter().map(|c| c.into_owned()).collect();
    let mut e = 0;
    while cols.len() < dim && e < dim {
        let mut v = DVector::from_fn(dim, |i, _| {
            Complex64::new(if i == e { 1.0 } else { 0.0 }, 0.0)
        });
        // two Gram-Schmidt passes
        for _ in 0..2 {
            for c in &cols {
                let proj = c.dotc(&v);
                v -= c * proj;
            }
        }
        let norm = v.norm();
        if norm > 1e-6 {
            cols.push(v / Complex64::new(norm, 0.0));
        }
        e += 1;
    }
    DMatrix::from_columns(&cols)
}

pub fn svd(h: &ChannelMatrix) -> Result<SvdFactors> {
    let mat = h.as_matrix();
    if mat.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(Error::NonFinite("channel matrix"));
    }
    let dec = mat.clone().svd(true, true);
    let (thin_u, v_t) = match (dec.u, dec.v_t) {
        (Some(u), Some(v_t)) => (u, v_t),
        _ => return Err(Error::NonFinite("singular value decomposition")),
    };
    let k = dec.singular_values.len();
    let mut order: Vec<usize> = (0..k).collect();
    order.sort_by(|&a, &b| dec.singular_values[b].total_cmp(&dec.singular_values[a]));
    let singular_values = order.iter().map(|&i| dec.singular_values[i]).collect();
    let u_cols: Vec<_> = order.iter().map(|&i| thin_u.column(i).into_owned()).collect();
    let v_thin = v_t.adjoint();
    let v_cols: Vec<_> = order.iter().map(|&i| v_thin.column(i).into_owned()).collect();
    Ok(SvdFactors {
        u: complete_unitary(DMatrix::from_columns(&u_cols)),
        singular_values,
        v: complete_unitary(DMatrix::from_columns(&v_cols)),
    })
}

/// Diagonal eigenmode power weights `s_1..s_K`.
#[derive(Debug, Clone, PartialEq)]
pub struct PowerAllocation {
    pub weights: Vec<f64>,
    /// Water level `mu`; `None` for allocations not produced by water-filling.
    pub water_level: Option<f64>,
    /// Number of transmit antennas `M`, which normalises the weights.
    pub transmit: usize,
}

impl PowerAllocation {
    /// `Q = I_M`: unit weight on every eigenmode (and on the null space).
    pub fn identity(modes: usize, transmit: usize) -> Self {
        Self {
            weights: vec![1.0; modes],
            water_level: None,
            transmit,
        }
    }

    /// Total power `M` spread evenly over the `K` eigenmodes.
    pub fn uniform(modes: usize, transmit: usize) -> Self {
        Self {
            weights: vec![transmit as f64 / modes as f64; modes],
            water_level: None,
            transmit,
        }
    }

    pub fn active_modes(&self) -> usize {
        self.weights.iter().filter(|s| **s > 0.0).count()
    }
}

/// Iterative water-filling: `s_i = (mu - 1 / (gain * d_i^2))^+` with
/// `sum s_i = M`.
///
/// Maximises `sum log2(1 + gain * d_i^2 * s_i)`. For the mutual information
/// of `M` transmit antennas at SNR `rho` pass `gain = rho / M`.
///
/// Modes are dropped weakest-first and `mu` is recomputed exactly on the
/// remaining set, so the loop ends after at most `K` passes.
pub fn waterfill(d_squared: &[f64], gain: Snr, transmit: usize) -> Result<PowerAllocation> {
    let g = gain.value();
    if !(g > 0.0) || !g.is_finite() {
        return Err(Error::domain("water-filling SNR", g, "finite and > 0"));
    }
    if transmit == 0 {
        return Err(Error::ZeroDimension { rows: 1, cols: 0 });
    }
    if let Some(&d) = d_squared.iter().find(|d| !(**d >= 0.0) || !d.is_finite()) {
        return Err(Error::domain("mode gain", d, "finite and >= 0"));
    }
    let mut order: Vec<usize> = (0..d_squared.len()).filter(|&i| d_squared[i] > 0.0).collect();
    if order.is_empty() {
        return Err(Error::ZeroChannel);
    }
    order.sort_by(|&a, &b| d_squared[b].total_cmp(&d_squared[a]));

    let budget = transmit as f64;
    let floor = |i: usize| 1.0 / (g * d_squared[i]);
    let mut active = order.len();
    let mut mu;
    loop {
        let sum_floor: f64 = order[..active].iter().map(|&i| floor(i)).sum();
        mu = (budget + sum_floor) / active as f64;
        if mu - floor(order[active - 1]) >= 0.0 || active == 1 {
            break;
        }
        active -= 1;
    }
    let mut weights = vec![0.0; d_squared.len()];
    for &i in &order[..active] {
        weights[i] = (mu - floor(i)).max(0.0);
    }
    Ok(PowerAllocation {
        weights,
        water_level: Some(mu),
        transmit,
    })
}

/// Transmit covariance `Q`, Hermitian PSD with trace `M`.
#[derive(Debug, Clone, PartialEq)]
pub struct PrecodingMatrix(DMatrix<Complex64>);

impl PrecodingMatrix {
    pub fn new(q: DMatrix<Complex64>) -> Result<Self> {
        let m = q.nrows();
        if m == 0 || q.ncols() != m {
            return Err(Error::DimensionMismatch(format!(
                "precoding matrix must be square, got {}x{}",
                q.nrows(),
                q.ncols()
            )));
        }
        let herm_err = (&q - q.adjoint()).norm();
        if herm_err > 1e-9 * q.norm().max(1.0) {
            return Err(Error::domain("precoding Hermitian error", herm_err, "~0"));
        }
        let trace = q.trace().re;
        if (trace - m as f64).abs() > TRACE_TOL * m as f64 {
            return Err(Error::domain("precoding trace", trace, "= M"));
        }
        let min_eig = q.clone().symmetric_eigenvalues().min();
        if min_eig < -PSD_TOL * m as f64 {
            return Err(Error::domain("precoding eigenvalue", min_eig, ">= 0"));
        }
        Ok(Self(q))
    }

    pub fn identity(m: usize) -> Self {
        Self(DMatrix::identity(m, m))
    }

    /// `Q = V diag(s) V^H` with the weights placed on the leading columns of `V`.
    pub fn from_allocation(factors: &SvdFactors, alloc: &PowerAllocation) -> Result<Self> {
        let m = factors.v.nrows();
        if alloc.weights.len() > m || alloc.transmit != m {
            return Err(Error::DimensionMismatch(format!(
                "{} weights for {} transmit antennas (allocation built for M = {})",
                alloc.weights.len(),
                m,
                alloc.transmit
            )));
        }
        let mut s = DMatrix::zeros(m, m);
        for (i, w) in alloc.weights.iter().enumerate() {
            s[(i, i)] = Complex64::new(*w, 0.0);
        }
        Self::new(&factors.v * s * factors.v.adjoint())
    }

    pub fn as_matrix(&self) -> &DMatrix<Complex64> {
        &self.0
    }
}

/// Mutual information in bits per channel use.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct MutualInfo(f64);

impl MutualInfo {
    pub fn from_bits(bits: f64) -> Self {
        Self(bits)
    }

    pub fn bits(self) -> f64 {
        self.0
    }
}

/// `log2 det(I + A)` for Hermitian PSD `A`, from the eigenvalues of `A`.
pub(crate) fn log2_det_shifted(a: DMatrix<Complex64>) -> f64 {
    if a.nrows() == 1 {
        return a[(0, 0)].re.max(0.0).ln_1p() / LN_2;
    }
    a.symmetric_eigenvalues()
        .iter()
        .map(|l| l.max(0.0).ln_1p())
        .sum::<f64>()
        / LN_2
}

/// `log2 det(I + c H Q H^H)`, evaluated on the smaller Gram side.
fn log2_det_channel(c: f64, h: &DMatrix<Complex64>, q: Option<&DMatrix<Complex64>>) -> f64 {
    if c == 0.0 {
        return 0.0;
    }
    let a = match q {
        Some(q) => {
            // det(I_N + c H Q H^H) = det(I_M + c Q^{1/2} H^H H Q^{1/2}); stay on the N side
            // unless Q is the identity, where the M side is exact and cheaper.
            h * q * h.adjoint() * Complex64::new(c, 0.0)
        }
        None => {
            if h.nrows() <= h.ncols() {
                h * h.adjoint() * Complex64::new(c, 0.0)
            } else {
                h.adjoint() * h * Complex64::new(c, 0.0)
            }
        }
    };
    log2_det_shifted(a)
}

/// Perfect-CSI mutual information `log2 |I + P / (M sigma^2) H Q H^H|`.
pub fn mutual_info_csitr(
    p: f64,
    q: &PrecodingMatrix,
    h: &ChannelMatrix,
    sigma2: f64,
) -> Result<MutualInfo> {
    if p.is_nan() || p < 0.0 {
        return Err(Error::domain("P", p, ">= 0"));
    }
    if !(sigma2 > 0.0) {
        return Err(Error::domain("sigma2", sigma2, "> 0"));
    }
    let m = h.transmit();
    if q.as_matrix().nrows() != m {
        return Err(Error::DimensionMismatch(format!(
            "precoding is {0}x{0} but the channel has {m} transmit antennas",
            q.as_matrix().nrows()
        )));
    }
    let c = p / (m as f64 * sigma2);
    Ok(MutualInfo(log2_det_channel(c, h.as_matrix(), Some(q.as_matrix()))))
}

/// Imperfect-CSITR lower bound in eigenmode form:
/// `sum log2(1 + rho_eff / M * d_i^2 * s_i)`.
pub fn mutual_info_icsitr(
    rho_eff: EffectiveSnr,
    alloc: &PowerAllocation,
    d_squared: &[f64],
) -> Result<MutualInfo> {
    if alloc.weights.len() != d_squared.len() {
        return Err(Error::DimensionMismatch(format!(
            "{} weights for {} eigenmodes",
            alloc.weights.len(),
            d_squared.len()
        )));
    }
    Ok(MutualInfo(modal_rate(
        rho_eff.rho_eff / alloc.transmit as f64,
        &alloc.weights,
        d_squared,
    )))
}

pub(crate) fn modal_rate(gain: f64, weights: &[f64], d_squared: &[f64]) -> f64 {
    weights
        .iter()
        .zip(d_squared)
        .map(|(s, d)| (gain * d * s).ln_1p())
        .sum::<f64>()
        / LN_2
}

/// No-CSIT lower bound with `Q = I_M`: `log2 |I + rho_eff / M H_hat H_hat^H|`.
pub fn mutual_info_icsir(rho_eff: EffectiveSnr, h_hat: &ChannelMatrix, m: usize) -> Result<MutualInfo> {
    if h_hat.transmit() != m {
        return Err(Error::DimensionMismatch(format!(
            "estimate has {} transmit antennas, expected {m}",
            h_hat.transmit()
        )));
    }
    if rho_eff.rho_eff.is_nan() || rho_eff.rho_eff < 0.0 {
        return Err(Error::domain("rho_eff", rho_eff.rho_eff, ">= 0"));
    }
    let c = rho_eff.rho_eff / m as f64;
    Ok(MutualInfo(log2_det_channel(c, h_hat.as_matrix(), None)))
}
