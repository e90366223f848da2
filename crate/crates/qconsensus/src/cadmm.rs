//! Exact (unquantized) consensus-ADMM baseline for distributed averaging:
//! per-node update, fixed point, transition matrix, contraction-rate
//! diagnostics in the G-norm, and the rough convergence-time estimate.

use thiserror::Error;

use crate::graph::{Graph, GraphMatrices, SpectralInfo};
use crate::linalg::{norm2, sub, Mat, Pinv};
use crate::quantizer::{project, QuantizerSpec};

#[derive(Debug, Error, PartialEq)]
pub enum CadmmError {
    #[error("mu must be strictly greater than 1, got {0}")]
    BadMu(f64),
    #[error("dual vector lies outside the column space of the signed Laplacian (residual {0:.3e})")]
    DualOutsideColumnSpace(f64),
}

/// Primal/dual iterate of the baseline.
#[derive(Debug, Clone, PartialEq)]
pub struct CadmmState {
    pub x: Vec<f64>,
    pub alpha: Vec<f64>,
    pub k: u64,
}

impl CadmmState {
    pub fn zero(n: usize) -> Self {
        CadmmState {
            x: vec![0.0; n],
            alpha: vec![0.0; n],
            k: 0,
        }
    }
}

/// One CADMM step. The dual update uses the freshly computed primal,
/// matching the transition-matrix form and the quantized algorithm.
///
/// With `clamp_range = Some(L)` neighbor values pass through the projection
/// onto `[-L, L]` in both updates (the constrained least-squares form).
pub fn cadmm_step(
    s: &CadmmState,
    g: &Graph,
    rho: f64,
    r: &[f64],
    clamp_range: Option<f64>,
) -> CadmmState {
    assert!(rho > 0.0);
    let n = g.n();
    assert_eq!(s.x.len(), n);
    assert_eq!(r.len(), n);
    let tx = |v: f64| match clamp_range {
        Some(l) => project(v, l).expect("finite iterate"),
        None => v,
    };
    let mut x_new = vec![0.0; n];
    for i in 0..n {
        let deg = g.degree(i) as f64;
        let neighbor_sum: f64 = g.neighbors(i).iter().map(|&j| tx(s.x[j])).sum();
        x_new[i] =
            (rho * deg * tx(s.x[i]) + rho * neighbor_sum - s.alpha[i] + r[i]) / (1.0 + 2.0 * rho * deg);
    }
    let mut alpha_new = s.alpha.clone();
    for i in 0..n {
        let deg = g.degree(i) as f64;
        let neighbor_sum: f64 = g.neighbors(i).iter().map(|&j| tx(x_new[j])).sum();
        alpha_new[i] += rho * (deg * tx(x_new[i]) - neighbor_sum);
    }
    CadmmState {
        x: x_new,
        alpha: alpha_new,
        k: s.k + 1,
    }
}

/// Fixed point of the averaging iteration: `x* = mean(r) 1`, `alpha* = r - mean(r) 1`.
pub fn fixed_point(r: &[f64]) -> (Vec<f64>, Vec<f64>) {
    let mean = r.iter().sum::<f64>() / r.len() as f64;
    let x = vec![mean; r.len()];
    let alpha = r.iter().map(|&ri| ri - mean).collect();
    (x, alpha)
}

/// The 3n x 3n matrix advancing the stacked state `[x; alpha; r]` by one step.
pub fn transition_matrix(g: &Graph, rho: f64) -> Mat {
    assert!(rho > 0.0);
    let n = g.n();
    let m = g.matrices();
    let mut d0 = Mat::zeros(n, n);
    for i in 0..n {
        d0[(i, i)] = 1.0 / (1.0 + 2.0 * rho * g.degree(i) as f64);
    }
    let d0_lplus = d0.matmul(&m.lplus);
    let lminus_d0 = m.lminus.matmul(&d0);
    let lminus_d0_lplus = m.lminus.matmul(&d0_lplus);

    let mut d = Mat::zeros(3 * n, 3 * n);
    for i in 0..n {
        for j in 0..n {
            d[(i, j)] = rho * d0_lplus[(i, j)];
            d[(i, n + j)] = -d0[(i, j)];
            d[(i, 2 * n + j)] = d0[(i, j)];
            d[(n + i, j)] = rho * rho * lminus_d0_lplus[(i, j)];
            d[(n + i, n + j)] = (if i == j { 1.0 } else { 0.0 }) - rho * lminus_d0[(i, j)];
            d[(n + i, 2 * n + j)] = rho * lminus_d0[(i, j)];
        }
        d[(2 * n + i, 2 * n + i)] = 1.0;
    }
    d
}

/// Contraction constant of the Q-linear rate in the G-norm.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RateInfo {
    pub delta_rate: f64,
    pub mu: f64,
}

pub fn delta_rate(sp: &SpectralInfo, rho: f64, mu: f64) -> Result<RateInfo, CadmmError> {
    if mu <= 1.0 {
        return Err(CadmmError::BadMu(mu));
    }
    assert!(rho > 0.0);
    let first = (mu - 1.0) * sp.lambda2_minus / (mu * sp.lambdan_plus);
    let second =
        2.0 * rho * sp.lambda2_minus / (rho * rho * sp.lambdan_plus * sp.lambda2_minus + mu);
    Ok(RateInfo {
        delta_rate: first.min(second),
        mu,
    })
}

/// Best contraction constant over a small scan of `mu` values.
pub fn delta_rate_scan(sp: &SpectralInfo, rho: f64) -> RateInfo {
    [1.1, 1.5, 2.0, 4.0, 8.0]
        .iter()
        .map(|&mu| delta_rate(sp, rho, mu).unwrap())
        .max_by(|a, b| a.delta_rate.partial_cmp(&b.delta_rate).unwrap())
        .unwrap()
}

/// Precomputed machinery for recovering the arc-space pair `(z, beta)` from a
/// node-space state and measuring distances in the G-norm.
pub struct DualRecovery {
    matrices: GraphMatrices,
    pinv_2lminus: Pinv,
    col_space: Pinv,
}

/// Arc-space pair entering the G-norm: `z = M+^T x / 2` and the unique
/// row-space vector `beta` with `M- beta = alpha`.
#[derive(Debug, Clone, PartialEq)]
pub struct DualPair {
    pub z: Vec<f64>,
    pub beta: Vec<f64>,
}

impl DualRecovery {
    pub fn new(g: &Graph) -> Self {
        let matrices = g.matrices();
        let pinv_2lminus = Pinv::new(&matrices.lminus.scale(2.0));
        let col_space = Pinv::new(&matrices.lminus);
        DualRecovery {
            matrices,
            pinv_2lminus,
            col_space,
        }
    }

    /// Residual of `alpha` against the column space of the signed Laplacian.
    pub fn column_space_residual(&self, alpha: &[f64]) -> f64 {
        let proj = self.col_space.project_column_space(alpha);
        norm2(&sub(&proj, alpha))
    }

    pub fn dual_pair(&self, x: &[f64], alpha: &[f64]) -> Result<DualPair, CadmmError> {
        let res = self.column_space_residual(alpha);
        if res > 1e-8 * (1.0 + norm2(alpha)) {
            return Err(CadmmError::DualOutsideColumnSpace(res));
        }
        let z = self
            .matrices
            .mplus
            .transpose()
            .mat_vec(x)
            .iter()
            .map(|v| v / 2.0)
            .collect();
        let y = self.pinv_2lminus.apply(alpha);
        let beta = self.matrices.mminus.transpose().mat_vec(&y);
        Ok(DualPair { z, beta })
    }

    /// G-norm of the difference of two arc-space pairs:
    /// `sqrt(rho ||z1 - z2||^2 + ||b1 - b2||^2 / rho)`.
    pub fn g_norm_diff(&self, a: &DualPair, b: &DualPair, rho: f64) -> f64 {
        let dz = norm2(&sub(&a.z, &b.z));
        let db = norm2(&sub(&a.beta, &b.beta));
        (rho * dz * dz + db * db / rho).sqrt()
    }

    /// Distance of a state from the averaging fixed point in the G-norm.
    pub fn g_norm_error(
        &self,
        s: &CadmmState,
        rho: f64,
        r: &[f64],
    ) -> Result<f64, CadmmError> {
        let (x_star, alpha_star) = fixed_point(r);
        let u = self.dual_pair(&s.x, &s.alpha)?;
        let u_star = self.dual_pair(&x_star, &alpha_star)?;
        Ok(self.g_norm_diff(&u, &u_star, rho))
    }
}

/// Rough convergence-time estimate for the quantized algorithm under zero
/// initialization: `(n T_X(rbar)^2 + ||r - T_X(rbar) 1||^2 / (2 rho^2 lambda2)) / delta^2`.
pub fn rough_time_bound(
    sp: &SpectralInfo,
    rho: f64,
    r: &[f64],
    spec: &QuantizerSpec,
) -> f64 {
    let n = r.len() as f64;
    let rbar = r.iter().sum::<f64>() / n;
    let target = project(rbar, spec.range_l).expect("finite mean");
    let resid: f64 = r.iter().map(|&ri| (ri - target) * (ri - target)).sum();
    (n * target * target + resid / (2.0 * rho * rho * sp.lambda2_minus)) / (spec.delta * spec.delta)
}
