use crate::error::{Error, Result};
use crate::linalg::CMatrix;
use crate::scalar::{c, Real};
use crate::spin::Operator;

use super::PureState;

/// Largest `dt ‖H_eff‖∞` accepted by the truncated-series propagator.
pub const PROPAGATION_BOUND: f64 = 1e-2;

/// Fourth-order Taylor approximation of `exp(-i H dt)` for a fixed step.
///
/// Building the matrix once and reusing it is equivalent to applying the
/// series term by term to each state.
#[derive(Debug, Clone, PartialEq)]
pub struct Propagator<T: Real> {
    matrix: CMatrix<T>,
}

impl<T: Real> Propagator<T> {
    pub fn new(heff: &Operator<T>, dt: T) -> Result<Self> {
        if !(dt > T::zero()) || !dt.is_finite() {
            return Err(Error::Precondition(format!(
                "dt must be positive, got {dt}"
            )));
        }
        let scale = dt * heff.norm_inf();
        if scale > T::lit(PROPAGATION_BOUND) {
            return Err(Error::Precondition(format!(
                "dt*|H_eff| = {scale:e} exceeds {PROPAGATION_BOUND:e}; reduce dt"
            )));
        }
        let n = heff.dim();
        let generator = heff.scale(c(T::zero(), -dt));
        let mut sum = CMatrix::identity(n);
        let mut term = CMatrix::identity(n);
        for k in 1..=4 {
            term = term
                .matmul(&generator)
                .scale_re(T::one() / T::from_usize(k).unwrap());
            sum += &term;
        }
        Ok(Self { matrix: sum })
    }

    pub fn matrix(&self) -> &CMatrix<T> {
        &self.matrix
    }

    pub fn apply(&self, psi: &PureState<T>) -> PureState<T> {
        PureState::from_raw(self.matrix.apply(psi.amplitudes()))
    }

    /// Applies in place; `scratch` must have the state's dimension.
    pub(crate) fn apply_in_place(
        &self,
        psi: &mut PureState<T>,
        scratch: &mut Vec<crate::scalar::C<T>>,
    ) {
        let n = self.matrix.dim();
        let m = self.matrix.as_slice();
        let amps = psi.amplitudes_mut();
        scratch.clear();
        for i in 0..n {
            let mut acc = crate::scalar::cr(T::zero());
            for (j, a) in amps.iter().enumerate() {
                acc += m[i * n + j] * *a;
            }
            scratch.push(acc);
        }
        amps.copy_from_slice(scratch);
    }
}

/// One jump-free step `ψ → exp(-i H_eff dt) ψ` without renormalization.
///
/// Returns the propagated state and `δp = ‖ψ‖² - ‖ψ'‖²`, the norm lost to
/// jumps during the step (`1 - ‖ψ'‖²` for a normalized input).
pub fn no_jump_propagate<T: Real>(
    psi: &PureState<T>,
    heff: &Operator<T>,
    dt: T,
) -> Result<(PureState<T>, T)> {
    crate::error::check_dim(heff.dim(), psi.dim())?;
    let before = psi.norm_sqr();
    if !(before > T::zero()) {
        return Err(Error::InvalidState("zero norm".into()));
    }
    let out = Propagator::new(heff, dt)?.apply(psi);
    let delta_p = before - out.norm_sqr();
    Ok((out, delta_p))
}
