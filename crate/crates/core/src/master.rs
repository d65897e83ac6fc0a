//! The four competing master equations for spin-selective recombination,
//! the scalar singlet-triplet coherence measure and a fixed-step RK4
//! integrator.
//!
//! Right-hand sides take raw matrices rather than [`DensityMatrix`] so the
//! integrator can evaluate them on intermediate Runge-Kutta stages.

use std::fmt;
use std::str::FromStr;

use crate::error::{check_dim, Error, Result};
use crate::linalg::CMatrix;
use crate::scalar::{c, Real};
use crate::spin::{
    build_hamiltonian, singlet_projector, triplet_projector, BasisKind, HamiltonianParams,
    Operator, RatePair,
};

/// Hermitian positive-semidefinite matrix with trace in `[0, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix<T: Real>(CMatrix<T>);

impl<T: Real> DensityMatrix<T> {
    pub fn new(m: CMatrix<T>) -> Result<Self> {
        if !m.is_finite() {
            return Err(Error::InvalidDensityMatrix("non-finite entries".into()));
        }
        let herm = m.hermiticity_error();
        if herm > T::HERMITIAN_TOL {
            return Err(Error::InvalidDensityMatrix(format!(
                "not Hermitian (max |ρ-ρ†| = {herm:e})"
            )));
        }
        let tr = m.trace().re;
        if tr < -T::TRACE_SLACK || tr > T::one() + T::TRACE_SLACK {
            return Err(Error::InvalidDensityMatrix(format!(
                "trace {tr} outside [0, 1]"
            )));
        }
        let min_ev = m.hermitian_eigenvalues()[0];
        if min_ev < -T::PSD_TOL {
            return Err(Error::InvalidDensityMatrix(format!(
                "negative eigenvalue {min_ev:e}"
            )));
        }
        Ok(Self(m))
    }

    /// `|ψ⟩⟨ψ|`; the amplitudes must have norm at most one.
    pub fn pure(psi: &[crate::scalar::C<T>]) -> Result<Self> {
        Self::new(CMatrix::outer(psi))
    }

    /// Wraps a matrix produced by the integrator without the eigenvalue check.
    pub(crate) fn from_trusted(m: CMatrix<T>) -> Self {
        Self(m)
    }

    pub fn matrix(&self) -> &CMatrix<T> {
        &self.0
    }

    pub fn into_matrix(self) -> CMatrix<T> {
        self.0
    }

    pub fn dim(&self) -> usize {
        self.0.dim()
    }

    pub fn trace(&self) -> T {
        self.0.trace().re
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Theory {
    /// Anticommutator decay of singlet and triplet populations.
    Haberkorn,
    /// Haberkorn plus singlet-triplet dephasing at `(kS + kT)/2`.
    JonesHore,
    /// Pure dephasing with no population loss.
    KominisNonReacting,
    /// Dephasing plus reaction loss interpolated by the coherence measure.
    KominisRevised,
}

impl Theory {
    pub const ALL: [Theory; 4] = [
        Theory::Haberkorn,
        Theory::JonesHore,
        Theory::KominisNonReacting,
        Theory::KominisRevised,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Theory::Haberkorn => "haberkorn",
            Theory::JonesHore => "jones_hore",
            Theory::KominisNonReacting => "kominis_nonreacting",
            Theory::KominisRevised => "kominis_revised",
        }
    }
}

impl fmt::Display for Theory {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Theory {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        Theory::ALL
            .into_iter()
            .find(|t| t.name() == s)
            .ok_or_else(|| format!("unknown theory `{s}` (expected one of haberkorn, jones_hore, kominis_nonreacting, kominis_revised)"))
    }
}

/// Everything that defines the physical system apart from the choice of
/// equation of motion.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModelSpec<T> {
    pub basis: BasisKind,
    pub hamiltonian: HamiltonianParams<T>,
    pub rates: RatePair<T>,
}

impl<T: Real> ModelSpec<T> {
    pub fn two_level(j: T, delta: T, k_s: T, k_t: T) -> Result<Self> {
        Ok(Self {
            basis: BasisKind::TwoLevelST,
            hamiltonian: HamiltonianParams::new(j, delta)?,
            rates: RatePair::new(k_s, k_t)?,
        })
    }

    pub fn with_basis(mut self, basis: BasisKind) -> Self {
        self.basis = basis;
        self
    }

    pub fn hamiltonian(&self) -> Operator<T> {
        build_hamiltonian(self.hamiltonian, self.basis)
    }

    pub fn projectors(&self) -> (Operator<T>, Operator<T>) {
        (singlet_projector(self.basis), triplet_projector(self.basis))
    }
}

/// Density-matrix time series on a uniform grid with instantaneous
/// reaction fluxes `kS Tr{Q_S ρ}` and `kT Tr{Q_T ρ}`.
#[derive(Debug, Clone, PartialEq)]
pub struct EvolutionTrace<T: Real> {
    pub dt: T,
    pub times: Vec<T>,
    pub states: Vec<DensityMatrix<T>>,
    pub singlet_flux: Vec<T>,
    pub triplet_flux: Vec<T>,
}

impl<T: Real> EvolutionTrace<T> {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn last(&self) -> Option<&DensityMatrix<T>> {
        self.states.last()
    }
}

fn check_all<T: Real>(rho: &CMatrix<T>, ops: &[&Operator<T>]) -> Result<()> {
    for op in ops {
        check_dim(rho.dim(), op.dim())?;
    }
    Ok(())
}

/// `ρQ_S + Q_Sρ - 2Q_SρQ_S`, the singlet-triplet dephasing superoperator.
/// It removes the `S`-`T` off-diagonal blocks and is traceless.
pub fn dephasing_term<T: Real>(rho: &CMatrix<T>, qs: &Operator<T>) -> CMatrix<T> {
    let qs_rho = qs.matmul(rho);
    let qs_rho_qs = qs_rho.matmul(qs);
    &(&rho.matmul(qs) + &qs_rho) - &qs_rho_qs.scale_re(T::lit(2.0))
}

fn unitary_part<T: Real>(rho: &CMatrix<T>, h: &Operator<T>) -> CMatrix<T> {
    h.commutator(rho).scale(c(T::zero(), -T::one()))
}

/// `-i[H,ρ] - (kS/2){Q_S,ρ} - (kT/2){Q_T,ρ}`
pub fn rhs_haberkorn<T: Real>(
    rho: &CMatrix<T>,
    h: &Operator<T>,
    rates: RatePair<T>,
    qs: &Operator<T>,
    qt: &Operator<T>,
) -> Result<CMatrix<T>> {
    check_all(rho, &[h, qs, qt])?;
    let half = T::lit(0.5);
    let mut d = unitary_part(rho, h);
    d -= &qs.anticommutator(rho).scale_re(rates.k_s * half);
    d -= &qt.anticommutator(rho).scale_re(rates.k_t * half);
    Ok(d)
}

/// Haberkorn's right-hand side plus `-((kS+kT)/2)(ρQ_S + Q_Sρ - 2Q_SρQ_S)`.
pub fn rhs_jones_hore<T: Real>(
    rho: &CMatrix<T>,
    h: &Operator<T>,
    rates: RatePair<T>,
    qs: &Operator<T>,
    qt: &Operator<T>,
) -> Result<CMatrix<T>> {
    let mut d = rhs_haberkorn(rho, h, rates, qs, qt)?;
    d -= &dephasing_term(rho, qs).scale_re(rates.total() * T::lit(0.5));
    Ok(d)
}

/// Evolution of the not-yet-reacted pairs: unitary motion plus dephasing,
/// trace preserving.
pub fn rhs_kominis_nonreacting<T: Real>(
    rho: &CMatrix<T>,
    h: &Operator<T>,
    rates: RatePair<T>,
    qs: &Operator<T>,
) -> Result<CMatrix<T>> {
    check_all(rho, &[h, qs])?;
    let mut d = unitary_part(rho, h);
    d -= &dephasing_term(rho, qs).scale_re(rates.total() * T::lit(0.5));
    Ok(d)
}

/// `Tr{ρ_ST ρ_TS} / (Tr{ρ_SS} Tr{ρ_TT})` with `ρ_XY = Q_X ρ Q_Y`.
///
/// Returns 0 when either population is below [`Real::EXTINCT`]: a state
/// with nothing in one subspace has no singlet-triplet coherence.
pub fn coherence_measure<T: Real>(rho: &CMatrix<T>, qs: &Operator<T>, qt: &Operator<T>) -> T {
    let rho_st = qs.matmul(rho).matmul(qt);
    let rho_ts = qt.matmul(rho).matmul(qs);
    let p_s = qs.matmul(rho).matmul(qs).trace().re;
    let p_t = qt.matmul(rho).matmul(qt).trace().re;
    if p_s <= T::EXTINCT || p_t <= T::EXTINCT {
        return T::zero();
    }
    rho_st.matmul(&rho_ts).trace().re / (p_s * p_t)
}

/// Revised Kominis equation: dephasing, then reaction loss split between an
/// incoherent channel `kS Q_SρQ_S + kT Q_TρQ_T` weighted by `1 - c` and a
/// whole-state removal `(kS Tr{Q_Sρ} + kT Tr{Q_Tρ}) ρ/Tr{ρ}` weighted by `c`,
/// where `c` is [`coherence_measure`] clamped to `[0, 1]`.
pub fn rhs_kominis_revised<T: Real>(
    rho: &CMatrix<T>,
    h: &Operator<T>,
    rates: RatePair<T>,
    qs: &Operator<T>,
    qt: &Operator<T>,
) -> Result<CMatrix<T>> {
    check_all(rho, &[h, qs, qt])?;
    let mut d = rhs_kominis_nonreacting(rho, h, rates, qs)?;
    let tr = rho.trace().re;
    if tr <= T::EXTINCT {
        return Ok(d);
    }
    let raw = coherence_measure(rho, qs, qt);
    let weight = raw.max(T::zero()).min(T::one());
    if weight != raw {
        log::debug!("coherence measure {raw:e} clamped to {weight}");
    }
    let rho_ss = qs.matmul(rho).matmul(qs);
    let rho_tt = qt.matmul(rho).matmul(qt);
    let incoherent = &rho_ss.scale_re(rates.k_s) + &rho_tt.scale_re(rates.k_t);
    d -= &incoherent.scale_re(T::one() - weight);
    let loss_rate = rates.k_s * rho_ss.trace().re + rates.k_t * rho_tt.trace().re;
    d -= &rho.scale_re(weight * loss_rate / tr);
    Ok(d)
}

/// Evaluates the selected equation of motion.
pub fn rhs<T: Real>(
    theory: Theory,
    rho: &CMatrix<T>,
    h: &Operator<T>,
    rates: RatePair<T>,
    qs: &Operator<T>,
    qt: &Operator<T>,
) -> Result<CMatrix<T>> {
    match theory {
        Theory::Haberkorn => rhs_haberkorn(rho, h, rates, qs, qt),
        Theory::JonesHore => rhs_jones_hore(rho, h, rates, qs, qt),
        Theory::KominisNonReacting => rhs_kominis_nonreacting(rho, h, rates, qs),
        Theory::KominisRevised => rhs_kominis_revised(rho, h, rates, qs, qt),
    }
}

/// Stability bound on `dt (‖H‖∞ + kS + kT)` enforced by [`integrate`].
pub const STABILITY_BOUND: f64 = 1e-2;

/// Number of grid steps for `t_end` at spacing `dt`, rounding to the
/// nearest whole step.
pub fn step_count<T: Real>(t_end: T, dt: T) -> usize {
    (t_end / dt).round().to_usize().unwrap_or(0)
}

/// Classical fixed-step RK4 of the selected master equation.
///
/// After every step the state is re-symmetrized to `(ρ + ρ†)/2`. The grid
/// is `t_n = n dt` for `n = 0..=round(t_end/dt)`; fluxes are recorded on
/// the post-step state at each grid point.
pub fn integrate<T: Real>(
    theory: Theory,
    model: &ModelSpec<T>,
    rho0: &DensityMatrix<T>,
    t_end: T,
    dt: T,
) -> Result<EvolutionTrace<T>> {
    let h = model.hamiltonian();
    let (qs, qt) = model.projectors();
    integrate_with(
        rho0,
        t_end,
        dt,
        h.norm_inf() + model.rates.total(),
        model.rates,
        &qs,
        &qt,
        |rho| rhs(theory, rho, &h, model.rates, &qs, &qt),
    )
}

/// RK4 driver shared by [`integrate`] and the four-level model.
#[allow(clippy::too_many_arguments)]
pub(crate) fn integrate_with<T: Real, F>(
    rho0: &DensityMatrix<T>,
    t_end: T,
    dt: T,
    generator_scale: T,
    rates: RatePair<T>,
    qs: &Operator<T>,
    qt: &Operator<T>,
    mut f: F,
) -> Result<EvolutionTrace<T>>
where
    F: FnMut(&CMatrix<T>) -> Result<CMatrix<T>>,
{
    if !(dt > T::zero()) || !dt.is_finite() {
        return Err(Error::Precondition(format!(
            "dt must be positive, got {dt}"
        )));
    }
    if !(t_end >= dt) || !t_end.is_finite() {
        return Err(Error::Precondition(format!(
            "t_end ({t_end}) must be finite and >= dt ({dt})"
        )));
    }
    let stiffness = dt * generator_scale;
    if stiffness > T::lit(STABILITY_BOUND) {
        return Err(Error::Precondition(format!(
            "dt*(|H| + kS + kT) = {stiffness:e} exceeds the stability bound {STABILITY_BOUND:e}; reduce dt"
        )));
    }
    check_dim(rho0.dim(), qs.dim())?;
    let n_steps = step_count(t_end, dt);
    let half = T::lit(0.5);
    let sixth = T::one() / T::lit(6.0);
    let flux = |rho: &CMatrix<T>| {
        (
            rates.k_s * qs.matmul(rho).trace().re,
            rates.k_t * qt.matmul(rho).trace().re,
        )
    };

    let mut trace = EvolutionTrace {
        dt,
        times: Vec::with_capacity(n_steps + 1),
        states: Vec::with_capacity(n_steps + 1),
        singlet_flux: Vec::with_capacity(n_steps + 1),
        triplet_flux: Vec::with_capacity(n_steps + 1),
    };
    let mut rho = rho0.matrix().clone();
    let record = |trace: &mut EvolutionTrace<T>, n: usize, rho: &CMatrix<T>| {
        let (fs, ft) = flux(rho);
        trace.times.push(T::from_usize(n).unwrap() * dt);
        trace.states.push(DensityMatrix::from_trusted(rho.clone()));
        trace.singlet_flux.push(fs);
        trace.triplet_flux.push(ft);
    };
    record(&mut trace, 0, &rho);
    for n in 1..=n_steps {
        let k1 = f(&rho)?;
        let k2 = f(&(&rho + &k1.scale_re(dt * half)))?;
        let k3 = f(&(&rho + &k2.scale_re(dt * half)))?;
        let k4 = f(&(&rho + &k3.scale_re(dt)))?;
        let mut incr = k1;
        incr += &k2.scale_re(T::lit(2.0));
        incr += &k3.scale_re(T::lit(2.0));
        incr += &k4;
        rho += &incr.scale_re(dt * sixth);
        rho = rho.hermitian_part();
        if !rho.is_finite() {
            return Err(Error::NonFinite {
                step: n,
                time: (T::from_usize(n).unwrap() * dt).to_f64_lossy(),
            });
        }
        record(&mut trace, n, &rho);
    }
    Ok(trace)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::{cr, C};
    use crate::spin::BasisKind::TwoLevelST;

    fn q() -> (Operator<f64>, Operator<f64>) {
        (singlet_projector(TwoLevelST), triplet_projector(TwoLevelST))
    }

    fn coherent() -> CMatrix<f64> {
        CMatrix::from_fn(2, |_, _| cr(0.5))
    }

    fn rates(k_s: f64, k_t: f64) -> RatePair<f64> {
        RatePair::new(k_s, k_t).unwrap()
    }

    fn assert_close(a: &CMatrix<f64>, b: &CMatrix<f64>, tol: f64) {
        let err = (a - b).max_abs();
        assert!(
            err <= tol,
            "max entry error {err:e} > {tol:e}\n{a:?}\n{b:?}"
        );
    }

    #[test]
    fn haberkorn_pure_singlet_decays_exponentially() {
        let (qs, qt) = q();
        let d = rhs_haberkorn(&qs, &CMatrix::zeros(2), rates(1.0, 0.0), &qs, &qt).unwrap();
        assert_close(&d, &qs.scale_re(-1.0), 0.0);
    }

    #[test]
    fn zero_rates_give_unitary_motion() {
        let (qs, qt) = q();
        let h = build_hamiltonian(HamiltonianParams { j: 0.7, delta: 0.4 }, TwoLevelST);
        let rho = CMatrix::from_row_major(vec![cr(0.6), c(0.1, 0.2), c(0.1, -0.2), cr(0.4)]);
        let unitary = h.commutator(&rho).scale(c(0.0, -1.0));
        for theory in Theory::ALL {
            let d = rhs(theory, &rho, &h, rates(0.0, 0.0), &qs, &qt).unwrap();
            // the revised equation keeps a c-weighted term that vanishes with the rates too
            assert_close(&d, &unitary, 1e-15);
        }
    }

    #[test]
    fn haberkorn_coherent_state_hand_expansion() {
        // -½{Q_S, ρ} with all entries ½: SS = -½, ST = -¼, TT = 0
        let (qs, qt) = q();
        let d = rhs_haberkorn(&coherent(), &CMatrix::zeros(2), rates(1.0, 0.0), &qs, &qt).unwrap();
        let expected = CMatrix::from_row_major(vec![cr(-0.5), cr(-0.25), cr(-0.25), cr(0.0)]);
        assert_close(&d, &expected, 1e-15);
    }

    #[test]
    fn jones_hore_coherent_state_hand_expansion() {
        // Haberkorn part plus -½·ρ_ST on the off-diagonals: ST = -¼ - ¼ = -½
        let (qs, qt) = q();
        let d = rhs_jones_hore(&coherent(), &CMatrix::zeros(2), rates(1.0, 0.0), &qs, &qt).unwrap();
        let expected = CMatrix::from_row_major(vec![cr(-0.5), cr(-0.5), cr(-0.5), cr(0.0)]);
        assert_close(&d, &expected, 1e-15);
    }

    #[test]
    fn jones_hore_dephasing_vanishes_on_singlet() {
        let (qs, qt) = q();
        let h = CMatrix::zeros(2);
        let jh = rhs_jones_hore(&qs, &h, rates(0.7, 0.2), &qs, &qt).unwrap();
        let hb = rhs_haberkorn(&qs, &h, rates(0.7, 0.2), &qs, &qt).unwrap();
        assert_eq!(dephasing_term(&qs, &qs), CMatrix::zeros(2));
        assert_close(&jh, &hb, 0.0);
    }

    #[test]
    fn nonreacting_diagonal_state_is_stationary() {
        let (qs, _) = q();
        let rho = CMatrix::from_real_diag(&[0.3, 0.6]);
        let h = CMatrix::from_real_diag(&[1.5, -0.2]);
        let d = rhs_kominis_nonreacting(&rho, &h, rates(1.0, 1.0), &qs).unwrap();
        assert_eq!(d.max_abs(), 0.0);
    }

    #[test]
    fn nonreacting_coherences_decay_at_total_half_rate() {
        let (qs, _) = q();
        let d =
            rhs_kominis_nonreacting(&coherent(), &CMatrix::zeros(2), rates(1.0, 1.0), &qs).unwrap();
        let expected = CMatrix::from_row_major(vec![cr(0.0), cr(-0.5), cr(-0.5), cr(0.0)]);
        assert_close(&d, &expected, 1e-15);
    }

    #[test]
    fn coherence_measure_examples() {
        let (qs, qt) = q();
        assert!((coherence_measure(&coherent(), &qs, &qt) - 1.0).abs() < 1e-15);
        assert_eq!(
            coherence_measure(&CMatrix::from_real_diag(&[0.5, 0.5]), &qs, &qt),
            0.0
        );
        assert_eq!(coherence_measure(&qs, &qs, &qt), 0.0);
    }

    #[test]
    fn revised_equation_at_t0_for_coherent_state() {
        // c = 1, kS = 1, kT = 0: -½ D(ρ) - ½ ρ
        let (qs, qt) = q();
        let d = rhs_kominis_revised(&coherent(), &CMatrix::zeros(2), rates(1.0, 0.0), &qs, &qt)
            .unwrap();
        let expected = CMatrix::from_row_major(vec![cr(-0.25), cr(-0.5), cr(-0.5), cr(-0.25)]);
        assert_close(&d, &expected, 1e-15);
    }

    #[test]
    fn revised_equation_extinct_state_keeps_only_dephasing() {
        let (qs, qt) = q();
        let rho = CMatrix::from_fn(2, |_, _| cr(1e-16));
        let h = CMatrix::from_real_diag(&[0.3, 0.0]);
        let d = rhs_kominis_revised(&rho, &h, rates(1.0, 0.5), &qs, &qt).unwrap();
        let expected = rhs_kominis_nonreacting(&rho, &h, rates(1.0, 0.5), &qs).unwrap();
        assert_eq!(d, expected);
    }

    #[test]
    fn rhs_rejects_dimension_mismatch() {
        let (qs, qt) = q();
        let rho = CMatrix::<f64>::zeros(4);
        assert!(matches!(
            rhs_haberkorn(&rho, &CMatrix::zeros(4), rates(1.0, 0.0), &qs, &qt),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn density_matrix_validation() {
        assert!(DensityMatrix::new(coherent()).is_ok());
        let not_herm = CMatrix::from_row_major(vec![cr(0.5), cr(0.1), cr(0.0), cr(0.5)]);
        assert!(DensityMatrix::new(not_herm).is_err());
        assert!(DensityMatrix::new(CMatrix::from_real_diag(&[0.8, 0.8])).is_err());
        assert!(DensityMatrix::new(CMatrix::from_real_diag(&[1.2, -0.3])).is_err());
        let psi = [C::new(0.6, 0.0), C::new(0.0, 0.8)];
        assert!(DensityMatrix::pure(&psi).is_ok());
    }

    #[test]
    fn integrate_rejects_bad_steps() {
        let model = ModelSpec::two_level(0.0, 0.0, 1.0, 0.0).unwrap();
        let rho0 = DensityMatrix::new(q().0).unwrap();
        assert!(matches!(
            integrate(Theory::Haberkorn, &model, &rho0, 1.0, 0.0),
            Err(Error::Precondition(_))
        ));
        assert!(matches!(
            integrate(Theory::Haberkorn, &model, &rho0, 1.0, 0.05),
            Err(Error::Precondition(_))
        ));
        assert!(matches!(
            integrate(Theory::Haberkorn, &model, &rho0, 1e-4, 1e-3),
            Err(Error::Precondition(_))
        ));
    }

    #[test]
    fn integrate_reports_non_finite_step() {
        let (qs, qt) = q();
        let rho0 = DensityMatrix::new(qs.clone()).unwrap();
        let mut calls = 0;
        let res = integrate_with(&rho0, 1.0, 1e-3, 1.0, rates(1.0, 0.0), &qs, &qt, |rho| {
            calls += 1;
            if calls > 8 {
                Ok(rho.scale_re(f64::NAN))
            } else {
                Ok(CMatrix::zeros(2))
            }
        });
        assert!(matches!(res, Err(Error::NonFinite { step: 3, .. })));
    }

    #[test]
    fn integrate_haberkorn_singlet_decay() {
        let model = ModelSpec::two_level(0.0, 0.0, 1.0, 0.0).unwrap();
        let rho0 = DensityMatrix::new(q().0).unwrap();
        let tr = integrate(Theory::Haberkorn, &model, &rho0, 5.0, 1e-3).unwrap();
        assert_eq!(tr.len(), 5001);
        for (t, s) in tr.times.iter().zip(&tr.states) {
            assert!((s.trace() - (-t).exp()).abs() < 1e-8);
        }
    }

    #[test]
    fn integrate_nonreacting_dephasing_closed_form() {
        let model = ModelSpec::two_level(0.0, 0.0, 1.0, 1.0).unwrap();
        let rho0 = DensityMatrix::new(coherent()).unwrap();
        let tr = integrate(Theory::KominisNonReacting, &model, &rho0, 5.0, 1e-3).unwrap();
        for (t, s) in tr.times.iter().zip(&tr.states) {
            let m = s.matrix();
            assert!((m[(0, 0)].re - 0.5).abs() < 1e-12);
            assert!((m[(1, 1)].re - 0.5).abs() < 1e-12);
            assert!((m[(crate::spin::S, crate::spin::T)].norm() - 0.5 * (-t).exp()).abs() < 1e-6);
        }
    }

    #[test]
    fn integrate_unitary_preserves_trace_and_spectrum() {
        let model = ModelSpec::<f64>::two_level(1.1, 0.6, 0.0, 0.0).unwrap();
        let rho0 = DensityMatrix::new(CMatrix::from_row_major(vec![
            cr(0.7),
            c(0.1, 0.2),
            c(0.1, -0.2),
            cr(0.3),
        ]))
        .unwrap();
        let ev0 = rho0.matrix().hermitian_eigenvalues();
        for theory in [Theory::Haberkorn, Theory::JonesHore, Theory::KominisRevised] {
            let tr = integrate(theory, &model, &rho0, 3.0, 1e-3).unwrap();
            for s in &tr.states {
                assert!((s.trace() - 1.0).abs() < 1e-10);
                let ev = s.matrix().hermitian_eigenvalues();
                for (a, b) in ev.iter().zip(&ev0) {
                    assert!((a - b).abs() < 1e-8);
                }
            }
        }
    }

    #[test]
    fn integrate_in_single_precision() {
        let model = ModelSpec::<f32>::two_level(0.0, 0.0, 1.0, 0.0).unwrap();
        let rho0 = DensityMatrix::new(singlet_projector(TwoLevelST)).unwrap();
        let tr = integrate(Theory::Haberkorn, &model, &rho0, 1.0, 1e-2).unwrap();
        assert!((tr.last().unwrap().trace() - (-1.0f32).exp()).abs() < 1e-5);
    }
}
