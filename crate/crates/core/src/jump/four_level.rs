//! The four-level `{S, T, S₀, T₀}` model in which reaction products are
//! kept as states and the dynamics is a trace-preserving Lindblad
//! equation with the two reaction jumps and the two measurement jumps.

use crate::error::{check_dim, Result};
use crate::linalg::CMatrix;
use crate::master::{integrate_with, DensityMatrix, EvolutionTrace, ModelSpec};
use crate::scalar::{c, Real};
use crate::spin::{
    measurement_lindblads, singlet_projector, triplet_projector, BasisKind, Operator, RatePair,
};

/// `-i[H,ρ] + Σ (LρL† - ½{L†L, ρ})`
pub fn lindblad_rhs<T: Real>(
    rho: &CMatrix<T>,
    h: &Operator<T>,
    lindblads: &[Operator<T>],
) -> Result<CMatrix<T>> {
    let n = rho.dim();
    check_dim(n, h.dim())?;
    let mut d = h.commutator(rho).scale(c(T::zero(), -T::one()));
    let half = T::lit(0.5);
    for l in lindblads {
        check_dim(n, l.dim())?;
        let ldl = l.adjoint().matmul(l);
        d += &l.matmul(rho).matmul(&l.adjoint());
        d -= &ldl.anticommutator(rho).scale_re(half);
    }
    Ok(d)
}

/// Four-level right-hand side with jump operators `√kS|S₀⟩⟨S|`,
/// `√kT|T₀⟩⟨T|`, `√kS|T⟩⟨T|` and `√kT|S⟩⟨S|`.
///
/// Its `{S, T}` block reproduces the Jones-Hore equation whenever `ρ` has
/// no coherence between the radical pair and the products.
pub fn four_level_rhs<T: Real>(
    rho4: &CMatrix<T>,
    h_sys: &Operator<T>,
    rates: RatePair<T>,
) -> Result<CMatrix<T>> {
    check_dim(4, rho4.dim())?;
    lindblad_rhs(rho4, h_sys, &measurement_lindblads(rates))
}

/// RK4 integration of [`four_level_rhs`] with the same grid, step guard
/// and flux bookkeeping as [`crate::master::integrate`].
pub fn integrate_four_level<T: Real>(
    model: &ModelSpec<T>,
    rho0: &DensityMatrix<T>,
    t_end: T,
    dt: T,
) -> Result<EvolutionTrace<T>> {
    integrate_lindblad(model, &measurement_lindblads(model.rates), rho0, t_end, dt)
}

/// RK4 integration of a four-level Lindblad equation with arbitrary jump
/// operators; fluxes are `kS Tr{Q_S ρ}` and `kT Tr{Q_T ρ}`.
pub fn integrate_lindblad<T: Real>(
    model: &ModelSpec<T>,
    lindblads: &[Operator<T>],
    rho0: &DensityMatrix<T>,
    t_end: T,
    dt: T,
) -> Result<EvolutionTrace<T>> {
    let model = model.with_basis(BasisKind::FourLevelSTProducts);
    let h = model.hamiltonian();
    let qs = singlet_projector(BasisKind::FourLevelSTProducts);
    let qt = triplet_projector(BasisKind::FourLevelSTProducts);
    integrate_with(
        rho0,
        t_end,
        dt,
        h.norm_inf() + model.rates.total(),
        model.rates,
        &qs,
        &qt,
        |rho| lindblad_rhs(rho, &h, lindblads),
    )
}
