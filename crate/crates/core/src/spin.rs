//! Radical-pair Hilbert spaces, singlet/triplet projectors and Hamiltonians.
//!
//! Basis ordering is fixed: index 0 = |S⟩, 1 = |T⟩, 2 = |S₀⟩, 3 = |T₀⟩.
//! The two-level basis keeps only the first two states. |S₀⟩ and |T₀⟩ are
//! the singlet and triplet reaction products.

use crate::error::{check_dim, Error, Result};
use crate::linalg::CMatrix;
use crate::scalar::{c, cr, Real};

/// Dense operator on the radical-pair Hilbert space.
pub type Operator<T> = CMatrix<T>;

pub const S: usize = 0;
pub const T: usize = 1;
pub const S0: usize = 2;
pub const T0: usize = 3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BasisKind {
    /// `{|S⟩, |T⟩}`
    TwoLevelST,
    /// `{|S⟩, |T⟩, |S₀⟩, |T₀⟩}`
    FourLevelSTProducts,
}

impl BasisKind {
    pub fn dim(self) -> usize {
        match self {
            BasisKind::TwoLevelST => 2,
            BasisKind::FourLevelSTProducts => 4,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            BasisKind::TwoLevelST => "two_level",
            BasisKind::FourLevelSTProducts => "four_level",
        }
    }
}

/// Singlet and triplet recombination rates.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RatePair<R> {
    pub k_s: R,
    pub k_t: R,
}

impl<R: Real> RatePair<R> {
    pub fn new(k_s: R, k_t: R) -> Result<Self> {
        for (name, k) in [("kS", k_s), ("kT", k_t)] {
            if !k.is_finite() || k < R::zero() {
                return Err(Error::InvalidParameter {
                    name,
                    reason: format!("must be finite and >= 0, got {k}"),
                });
            }
        }
        Ok(Self { k_s, k_t })
    }

    pub fn total(&self) -> R {
        self.k_s + self.k_t
    }
}

/// Two-parameter Hamiltonian family `H = J|S⟩⟨S| + δ(|S⟩⟨T| + |T⟩⟨S|)`.
///
/// `delta = 0` gives an `H` commuting with both projectors; any other value
/// drives singlet-triplet interconversion.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HamiltonianParams<R> {
    pub j: R,
    pub delta: R,
}

impl<R: Real> HamiltonianParams<R> {
    pub fn new(j: R, delta: R) -> Result<Self> {
        for (name, v) in [("J", j), ("delta", delta)] {
            if !v.is_finite() {
                return Err(Error::InvalidParameter {
                    name,
                    reason: format!("must be finite, got {v}"),
                });
            }
        }
        Ok(Self { j, delta })
    }
}

pub fn singlet_projector<R: Real>(basis: BasisKind) -> Operator<R> {
    CMatrix::ket_bra(basis.dim(), S, S)
}

pub fn triplet_projector<R: Real>(basis: BasisKind) -> Operator<R> {
    CMatrix::ket_bra(basis.dim(), T, T)
}

/// Identity on the radical-pair `{S, T}` subspace.
pub fn radical_pair_identity<R: Real>(basis: BasisKind) -> Operator<R> {
    &singlet_projector(basis) + &triplet_projector(basis)
}

pub fn build_hamiltonian<R: Real>(params: HamiltonianParams<R>, basis: BasisKind) -> Operator<R> {
    let mut h = CMatrix::zeros(basis.dim());
    h[(S, S)] = cr(params.j);
    h[(S, T)] = cr(params.delta);
    h[(T, S)] = cr(params.delta);
    h
}

/// `H_eff = H - (i/2) Σ L†L`.
pub fn effective_hamiltonian<R: Real>(
    h: &Operator<R>,
    lindblads: &[Operator<R>],
) -> Result<Operator<R>> {
    let n = h.dim();
    let mut decay = CMatrix::zeros(n);
    for l in lindblads {
        check_dim(n, l.dim())?;
        decay += &l.adjoint().matmul(l);
    }
    Ok(h - &decay.scale(c(R::zero(), R::lit(0.5))))
}

/// Reaction jump operators `√kS|S₀⟩⟨S|` and `√kT|T₀⟩⟨T|` in the four-level
/// basis. Their effective Hamiltonian is `H - i(kS/2)Q_S - i(kT/2)Q_T`.
pub fn reaction_lindblads<R: Real>(rates: RatePair<R>) -> [Operator<R>; 2] {
    [
        CMatrix::ket_bra(4, S0, S).scale_re(rates.k_s.sqrt()),
        CMatrix::ket_bra(4, T0, T).scale_re(rates.k_t.sqrt()),
    ]
}

/// The four jump operators of the measurement-plus-reaction model, scaled by
/// the square roots of their rates: `√kS|S₀⟩⟨S|`, `√kT|T₀⟩⟨T|`,
/// `√kS|T⟩⟨T|`, `√kT|S⟩⟨S|`.
///
/// The last two are the singlet channel measuring the pair as triplet and
/// the triplet channel measuring it as singlet.
pub fn measurement_lindblads<R: Real>(rates: RatePair<R>) -> [Operator<R>; 4] {
    [
        CMatrix::ket_bra(4, S0, S).scale_re(rates.k_s.sqrt()),
        CMatrix::ket_bra(4, T0, T).scale_re(rates.k_t.sqrt()),
        CMatrix::ket_bra(4, T, T).scale_re(rates.k_s.sqrt()),
        CMatrix::ket_bra(4, S, S).scale_re(rates.k_t.sqrt()),
    ]
}

/// Restricts a four-level operator to the `{S, T}` block.
pub fn radical_pair_block<R: Real>(op: &Operator<R>) -> Result<Operator<R>> {
    check_dim(4, op.dim())?;
    Ok(CMatrix::from_fn(2, |i, j| op[(i, j)]))
}

/// Embeds a two-level operator into the four-level basis, zero on products.
pub fn embed_four_level<R: Real>(op: &Operator<R>) -> Result<Operator<R>> {
    check_dim(2, op.dim())?;
    Ok(CMatrix::from_fn(4, |i, j| {
        if i < 2 && j < 2 {
            op[(i, j)]
        } else {
            cr(R::zero())
        }
    }))
}
