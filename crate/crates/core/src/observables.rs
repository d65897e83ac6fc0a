//! Yields, populations and the time-averaged singlet-triplet coherence.

use crate::error::{check_dim, Error, Result};
use crate::jump::EnsembleResult;
use crate::linalg::CMatrix;
use crate::master::{coherence_measure, EvolutionTrace};
use crate::scalar::{c, Real};
use crate::spin::{Operator, S, T};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum YieldMethod {
    OdeFluxIntegration,
    TrajectoryCounting,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct YieldReport<R> {
    pub singlet_yield: R,
    pub triplet_yield: R,
    pub survival: R,
    pub method: YieldMethod,
}

impl<R: Real> YieldReport<R> {
    pub fn total(&self) -> R {
        self.singlet_yield + self.triplet_yield + self.survival
    }
}

fn trapezoid<R: Real>(dt: R, values: &[R]) -> R {
    if values.len() < 2 {
        return R::zero();
    }
    let half = R::lit(0.5);
    let inner: R = values[1..values.len() - 1]
        .iter()
        .fold(R::zero(), |a, &v| a + v);
    dt * (inner + half * (values[0] + values[values.len() - 1]))
}

/// Integrates the recorded reaction fluxes with the trapezoid rule.
/// Survival is the trace at the last grid point.
pub fn yields_from_trace<R: Real>(trace: &EvolutionTrace<R>) -> Result<YieldReport<R>> {
    let last = trace
        .last()
        .ok_or_else(|| Error::Precondition("cannot compute yields from an empty trace".into()))?;
    Ok(YieldReport {
        singlet_yield: trapezoid(trace.dt, &trace.singlet_flux),
        triplet_yield: trapezoid(trace.dt, &trace.triplet_flux),
        survival: last.trace(),
        method: YieldMethod::OdeFluxIntegration,
    })
}

pub fn yields_from_ensemble<R: Real>(result: &EnsembleResult<R>) -> YieldReport<R> {
    YieldReport {
        singlet_yield: result.singlet_yield,
        triplet_yield: result.triplet_yield,
        survival: result.survival_fraction,
        method: YieldMethod::TrajectoryCounting,
    }
}

/// `(Tr{Q_S ρ}, Tr{Q_T ρ}, |⟨S|ρ|T⟩|)`
pub fn populations<R: Real>(
    rho: &CMatrix<R>,
    qs: &Operator<R>,
    qt: &Operator<R>,
) -> Result<(R, R, R)> {
    check_dim(rho.dim(), qs.dim())?;
    check_dim(rho.dim(), qt.dim())?;
    let p_s = qs.matmul(rho).trace().re;
    let p_t = qt.matmul(rho).trace().re;
    Ok((p_s, p_t, rho[(S, T)].norm()))
}

/// Default upper limit of the τ average: ten periods of the exchange
/// splitting.
pub fn default_tau_max<R: Real>(j: R) -> Result<R> {
    if j == R::zero() || !j.is_finite() {
        return Err(Error::InvalidParameter {
            name: "tau_max",
            reason: "no default when J = 0; pass tau_max explicitly".into(),
        });
    }
    Ok(R::lit(10.0) / j.abs())
}

pub const DEFAULT_TAU_SAMPLES: usize = 256;

fn unitary<R: Real>(h: &Operator<R>, tau: R) -> CMatrix<R> {
    h.scale(c(R::zero(), -tau)).expm()
}

fn check_tau<R: Real>(tau_max: R, n_samples: usize) -> Result<()> {
    if !(tau_max > R::zero()) || !tau_max.is_finite() {
        return Err(Error::InvalidParameter {
            name: "tau_max",
            reason: format!("must be positive, got {tau_max}"),
        });
    }
    if n_samples < 8 {
        return Err(Error::InvalidParameter {
            name: "n_samples",
            reason: format!("must be at least 8, got {n_samples}"),
        });
    }
    Ok(())
}

/// `⟨Tr{ρ_ST e^{-iHτ} ρ_TS e^{iHτ}}⟩_τ / (Tr ρ_SS · Tr ρ_TT)` with `τ`
/// sampled uniformly at `k·tau_max/n_samples`, `k = 0..n_samples`.
///
/// Returns the real part of the average; zero when either population is
/// negligible.
pub fn time_averaged_coherence<R: Real>(
    rho: &CMatrix<R>,
    h: &Operator<R>,
    tau_max: R,
    n_samples: usize,
    qs: &Operator<R>,
    qt: &Operator<R>,
) -> Result<R> {
    check_tau(tau_max, n_samples)?;
    check_dim(rho.dim(), h.dim())?;
    let (p_s, p_t, _) = populations(rho, qs, qt)?;
    if p_s <= R::EXTINCT || p_t <= R::EXTINCT {
        return Ok(R::zero());
    }
    let rho_st = qs.matmul(rho).matmul(qt);
    let rho_ts = qt.matmul(rho).matmul(qs);
    let step = tau_max / R::from_usize(n_samples).unwrap();
    let mut acc = c(R::zero(), R::zero());
    for k in 0..n_samples {
        let u = unitary(h, step * R::from_usize(k).unwrap());
        let rotated = u.matmul(&rho_ts).matmul(&u.adjoint());
        acc += rho_st.matmul(&rotated).trace();
    }
    Ok(acc.re / R::from_usize(n_samples).unwrap() / (p_s * p_t))
}

/// Largest entry-wise gap, over the same τ grid, between rotating the
/// off-diagonal block alone, `e^{-iHτ} (Q_T ρ Q_S) e^{iHτ}`, and taking the
/// off-diagonal block of the rotated state, `Q_T e^{-iHτ} ρ e^{iHτ} Q_S`.
///
/// Vanishes when `H` commutes with the projectors.
pub fn commutation_discrepancy<R: Real>(
    rho: &CMatrix<R>,
    h: &Operator<R>,
    tau_max: R,
    n_samples: usize,
    qs: &Operator<R>,
    qt: &Operator<R>,
) -> Result<R> {
    check_tau(tau_max, n_samples)?;
    check_dim(rho.dim(), h.dim())?;
    let rho_ts = qt.matmul(rho).matmul(qs);
    let step = tau_max / R::from_usize(n_samples).unwrap();
    let mut worst = R::zero();
    for k in 0..n_samples {
        let u = unitary(h, step * R::from_usize(k).unwrap());
        let block_first = u.matmul(&rho_ts).matmul(&u.adjoint());
        let rotate_first = qt.matmul(&u).matmul(rho).matmul(&u.adjoint()).matmul(qs);
        worst = worst.max((&block_first - &rotate_first).max_abs());
    }
    Ok(worst)
}

/// Instantaneous counterpart of [`time_averaged_coherence`].
pub fn instantaneous_coherence<R: Real>(rho: &CMatrix<R>, qs: &Operator<R>, qt: &Operator<R>) -> R {
    coherence_measure(rho, qs, qt)
}
