//! Quantum-jump unravelings of the radical-pair master equations.
//!
//! Three single-trajectory schemes are provided:
//!
//! * [`Scheme::Traditional`]: reaction jumps to `|S₀⟩`/`|T₀⟩` and no-jump
//!   evolution under `H - i(kS/2)Q_S - i(kT/2)Q_T`. Averages to the
//!   Haberkorn equation.
//! * [`Scheme::JonesHore`]: the reaction jumps plus two measurement jumps
//!   that project onto `|T⟩` (singlet channel) and `|S⟩` (triplet channel);
//!   no-jump evolution under `H - i(kS+kT)/2`. Averages to the Jones-Hore
//!   equation.
//! * [`Scheme::Kominis`]: whole-state removal with probability
//!   `kS⟨Q_S⟩dt`, projective measurement at rate `kS/2`, and no norm decay
//!   between events. This reproduces the 3/4 singlet yield of that scheme
//!   and is only defined for `kT = 0`.
//!
//! [`superop`] holds the vectorized Lindblad generator and the jump-count
//! (Dyson) expansion of its propagator; [`four_level`] the model that
//! keeps the product states explicitly.

mod ensemble;
pub mod four_level;
mod propagate;
mod schemes;
mod series;
pub mod superop;

use std::fmt;
use std::str::FromStr;

pub use ensemble::{run_ensemble, EnsembleResult, EnsembleSettings, ENSEMBLE_BLOCK};
pub use four_level::{four_level_rhs, integrate_four_level, integrate_lindblad, lindblad_rhs};
pub use propagate::{no_jump_propagate, Propagator, PROPAGATION_BOUND};
pub use schemes::{
    branch_probabilities, run_trajectory, step_jones_hore, step_kominis, step_traditional, Branch,
    Stepper, Trajectory,
};
pub use series::kominis_yield_series;
pub use superop::{dyson_expand, jump_superoperator, lindblad_superoperator, Superoperator};

use crate::error::{Error, Result};
use crate::linalg::norm_sqr;
use crate::scalar::{cr, Real, C};
use crate::spin::BasisKind;

/// Pure state of the radical pair, possibly unnormalized during no-jump
/// propagation.
#[derive(Debug, Clone, PartialEq)]
pub struct PureState<T: Real> {
    amplitudes: Vec<C<T>>,
}

impl<T: Real> PureState<T> {
    /// Accepts any amplitude vector with `0 < ‖ψ‖ ≤ 1`.
    pub fn new(amplitudes: Vec<C<T>>) -> Result<Self> {
        if amplitudes
            .iter()
            .any(|z| !z.re.is_finite() || !z.im.is_finite())
        {
            return Err(Error::InvalidState("non-finite amplitude".into()));
        }
        let n2 = norm_sqr(&amplitudes);
        if n2 <= T::zero() {
            return Err(Error::InvalidState("zero norm".into()));
        }
        if n2.sqrt() > T::one() + T::TRACE_SLACK {
            return Err(Error::InvalidState(format!("norm {} exceeds 1", n2.sqrt())));
        }
        Ok(Self { amplitudes })
    }

    /// Rescales arbitrary nonzero amplitudes to unit norm.
    pub fn normalized(amplitudes: Vec<C<T>>) -> Result<Self> {
        let n2 = norm_sqr(&amplitudes);
        if !(n2 > T::zero()) || !n2.is_finite() {
            return Err(Error::InvalidState(
                "cannot normalize a zero or non-finite vector".into(),
            ));
        }
        let inv = cr(T::one() / n2.sqrt());
        Ok(Self {
            amplitudes: amplitudes.into_iter().map(|z| z * inv).collect(),
        })
    }

    pub fn basis_state(basis: BasisKind, index: usize) -> Self {
        let mut amplitudes = vec![cr(T::zero()); basis.dim()];
        amplitudes[index] = cr(T::one());
        Self { amplitudes }
    }

    pub fn singlet(basis: BasisKind) -> Self {
        Self::basis_state(basis, crate::spin::S)
    }

    pub fn triplet(basis: BasisKind) -> Self {
        Self::basis_state(basis, crate::spin::T)
    }

    /// `(|S⟩ + |T⟩)/√2`
    pub fn coherent(basis: BasisKind) -> Self {
        let a = cr(T::FRAC_1_SQRT_2());
        let mut amplitudes = vec![cr(T::zero()); basis.dim()];
        amplitudes[crate::spin::S] = a;
        amplitudes[crate::spin::T] = a;
        Self { amplitudes }
    }

    pub fn amplitudes(&self) -> &[C<T>] {
        &self.amplitudes
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn norm_sqr(&self) -> T {
        norm_sqr(&self.amplitudes)
    }

    pub fn density_matrix(&self) -> crate::linalg::CMatrix<T> {
        crate::linalg::CMatrix::outer(&self.amplitudes)
    }

    pub(crate) fn from_raw(amplitudes: Vec<C<T>>) -> Self {
        Self { amplitudes }
    }

    pub(crate) fn amplitudes_mut(&mut self) -> &mut [C<T>] {
        &mut self.amplitudes
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum EventKind {
    NoJump,
    /// Reaction through the singlet channel into `|S₀⟩`. Terminal.
    SingletProduct,
    /// Reaction through the triplet channel into `|T₀⟩`. Terminal.
    TripletProduct,
    /// Measurement collapse onto `|S⟩`.
    ProjectS,
    /// Measurement collapse onto `|T⟩`.
    ProjectT,
    /// Whole-state removal of the Kominis scheme, counted as singlet
    /// product. Terminal.
    KominisRemove,
}

impl EventKind {
    pub fn is_terminal(self) -> bool {
        matches!(
            self,
            EventKind::SingletProduct | EventKind::TripletProduct | EventKind::KominisRemove
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrajectoryEvent<T> {
    pub kind: EventKind,
    pub time: T,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Scheme {
    Traditional,
    JonesHore,
    Kominis,
}

impl Scheme {
    pub const ALL: [Scheme; 3] = [Scheme::Traditional, Scheme::JonesHore, Scheme::Kominis];

    pub fn name(self) -> &'static str {
        match self {
            Scheme::Traditional => "traditional",
            Scheme::JonesHore => "jones_hore",
            Scheme::Kominis => "kominis",
        }
    }
}

impl fmt::Display for Scheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Scheme {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        Scheme::ALL
            .into_iter()
            .find(|t| t.name() == s)
            .ok_or_else(|| {
                format!("unknown scheme `{s}` (expected one of traditional, jones_hore, kominis)")
            })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::c;

    #[test]
    fn pure_state_validation() {
        assert!(PureState::<f64>::new(vec![cr(0.0), cr(0.0)]).is_err());
        assert!(PureState::<f64>::new(vec![cr(1.0), cr(0.5)]).is_err());
        assert!(PureState::<f64>::new(vec![c(0.6, 0.0), c(0.0, 0.8)]).is_ok());
        assert!(PureState::<f64>::new(vec![cr(0.3), cr(0.0)]).is_ok());
        let n = PureState::<f64>::normalized(vec![cr(3.0), cr(4.0)]).unwrap();
        assert!((n.norm_sqr() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn scheme_and_event_names() {
        for s in Scheme::ALL {
            assert_eq!(s.name().parse::<Scheme>().unwrap(), s);
        }
        assert!(EventKind::KominisRemove.is_terminal());
        assert!(!EventKind::ProjectT.is_terminal());
    }
}
