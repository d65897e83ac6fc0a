//! Vectorized Lindblad generators and the jump-count expansion of their
//! propagators.
//!
//! Density matrices are vectorized by stacking columns, so
//! `vec(AρB) = (Bᵀ ⊗ A) vec(ρ)`.

use crate::error::{check_dim, Error, Result};
use crate::linalg::CMatrix;
use crate::scalar::{c, Real};
use crate::spin::Operator;

/// Linear map on `dim × dim` matrices stored as a `dim² × dim²` matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct Superoperator<T: Real> {
    op_dim: usize,
    matrix: CMatrix<T>,
}

impl<T: Real> Superoperator<T> {
    pub fn from_matrix(matrix: CMatrix<T>) -> Result<Self> {
        let n = matrix.dim();
        let op_dim = (n as f64).sqrt().round() as usize;
        if op_dim * op_dim != n {
            return Err(Error::Precondition(format!(
                "superoperator dimension {n} is not a perfect square"
            )));
        }
        Ok(Self { op_dim, matrix })
    }

    pub fn zeros(op_dim: usize) -> Self {
        Self {
            op_dim,
            matrix: CMatrix::zeros(op_dim * op_dim),
        }
    }

    pub fn identity(op_dim: usize) -> Self {
        Self {
            op_dim,
            matrix: CMatrix::identity(op_dim * op_dim),
        }
    }

    /// `ρ ↦ A ρ B`
    pub fn sandwich(a: &Operator<T>, b: &Operator<T>) -> Result<Self> {
        check_dim(a.dim(), b.dim())?;
        Ok(Self {
            op_dim: a.dim(),
            matrix: b.transpose().kron(a),
        })
    }

    pub fn op_dim(&self) -> usize {
        self.op_dim
    }

    pub fn matrix(&self) -> &CMatrix<T> {
        &self.matrix
    }

    pub fn apply(&self, rho: &CMatrix<T>) -> Result<CMatrix<T>> {
        check_dim(self.op_dim, rho.dim())?;
        Ok(CMatrix::unvectorize(&self.matrix.apply(&rho.vectorize())))
    }

    pub fn compose(&self, rhs: &Self) -> Result<Self> {
        check_dim(self.op_dim, rhs.op_dim)?;
        Ok(Self {
            op_dim: self.op_dim,
            matrix: self.matrix.matmul(&rhs.matrix),
        })
    }

    pub fn add(&self, rhs: &Self) -> Result<Self> {
        check_dim(self.op_dim, rhs.op_dim)?;
        Ok(Self {
            op_dim: self.op_dim,
            matrix: &self.matrix + &rhs.matrix,
        })
    }

    pub fn sub(&self, rhs: &Self) -> Result<Self> {
        check_dim(self.op_dim, rhs.op_dim)?;
        Ok(Self {
            op_dim: self.op_dim,
            matrix: &self.matrix - &rhs.matrix,
        })
    }

    pub fn scale(&self, s: T) -> Self {
        Self {
            op_dim: self.op_dim,
            matrix: self.matrix.scale_re(s),
        }
    }

    pub fn expm(&self) -> Self {
        Self {
            op_dim: self.op_dim,
            matrix: self.matrix.expm(),
        }
    }

    pub fn norm(&self) -> T {
        self.matrix.norm_inf()
    }

    /// Largest entry-wise difference.
    pub fn max_abs_diff(&self, other: &Self) -> T {
        (&self.matrix - &other.matrix).max_abs()
    }

    /// Action on the trace functional: `vec(I)† L`. Zero for generators
    /// that preserve the trace.
    pub fn trace_functional(&self) -> Vec<crate::scalar::C<T>> {
        let id = CMatrix::<T>::identity(self.op_dim).vectorize();
        let n = self.matrix.dim();
        (0..n)
            .map(|col| {
                (0..n).fold(crate::scalar::cr(T::zero()), |acc, row| {
                    acc + id[row].conj() * self.matrix[(row, col)]
                })
            })
            .collect()
    }
}

/// Generator of `dρ/dt = -i[H,ρ] + Σ (LρL† - ½{L†L, ρ})`.
pub fn lindblad_superoperator<T: Real>(
    h: &Operator<T>,
    lindblads: &[Operator<T>],
) -> Result<Superoperator<T>> {
    let n = h.dim();
    let id = CMatrix::identity(n);
    let minus_i = c(T::zero(), -T::one());
    let mut m = &id.kron(h) - &h.transpose().kron(&id);
    m = m.scale(minus_i);
    let half = T::lit(0.5);
    for l in lindblads {
        check_dim(n, l.dim())?;
        let ldl = l.adjoint().matmul(l);
        m += &l.conj().kron(l);
        m -= &id.kron(&ldl).scale_re(half);
        m -= &ldl.transpose().kron(&id).scale_re(half);
    }
    Ok(Superoperator {
        op_dim: n,
        matrix: m,
    })
}

/// `ρ ↦ Σ LρL†`, the part of the generator that is bilinear in the jump
/// operators.
pub fn jump_superoperator<T: Real>(
    dim: usize,
    lindblads: &[Operator<T>],
) -> Result<Superoperator<T>> {
    let mut m = CMatrix::zeros(dim * dim);
    for l in lindblads {
        check_dim(dim, l.dim())?;
        m += &l.conj().kron(l);
    }
    Ok(Superoperator {
        op_dim: dim,
        matrix: m,
    })
}

/// Largest `t ‖L‖∞` accepted by [`dyson_expand`].
pub const DYSON_BOUND: f64 = 2.0;

/// Truncated jump-count expansion of `exp(L t)`.
///
/// With `A = L - J` the no-jump generator and `J` the jump part,
///
/// `exp(L t) = Σ_k ∫_{0<t₁<…<t_k<t} e^{A(t-t_k)} J e^{A(t_k-t_{k-1})} J … J e^{A t₁}`.
///
/// The k-jump term obeys `P_k(t) = ∫₀ᵗ e^{A(t-s)} J P_{k-1}(s) ds` with
/// `P₀(t) = e^{At}`. Each `P_k` is tabulated on `quad_points + 1` uniform
/// nodes and the recursion is integrated interval by interval with
/// four-point Lagrange weights (fourth order in the node spacing). Terms
/// with up to `k_max` jumps are summed.
pub fn dyson_expand<T: Real>(
    l: &Superoperator<T>,
    jump: &Superoperator<T>,
    t: T,
    k_max: usize,
    quad_points: usize,
) -> Result<Superoperator<T>> {
    check_dim(l.op_dim, jump.op_dim)?;
    if !(t > T::zero()) || !t.is_finite() {
        return Err(Error::Precondition(format!("t must be positive, got {t}")));
    }
    let scale = t * l.norm();
    if scale > T::lit(DYSON_BOUND) {
        return Err(Error::Precondition(format!(
            "t*|L| = {scale} exceeds {DYSON_BOUND}; the truncated expansion would need more jump terms"
        )));
    }
    if quad_points < 16 {
        return Err(Error::Precondition(format!(
            "quad_points must be >= 16, got {quad_points}"
        )));
    }
    let m = quad_points;
    let n = l.matrix.dim();
    let no_jump = &l.matrix - &jump.matrix;
    let step = t / T::from_usize(m).unwrap();

    // powers E^p of E = exp(A h) for p = -2..=3
    let e1 = no_jump.scale_re(step).expm();
    let em1 = no_jump.scale_re(-step).expm();
    let pow = |p: i32| -> CMatrix<T> {
        match p {
            -2 => em1.matmul(&em1),
            -1 => em1.clone(),
            0 => CMatrix::identity(n),
            1 => e1.clone(),
            2 => e1.matmul(&e1),
            3 => e1.matmul(&e1).matmul(&e1),
            _ => unreachable!("stencil exponent out of range"),
        }
    };
    let powers: Vec<CMatrix<T>> = (-2..=3).map(pow).collect();
    let e_pow = |p: i64| &powers[(p + 2) as usize];

    let mut level: Vec<CMatrix<T>> = Vec::with_capacity(m + 1);
    level.push(CMatrix::identity(n));
    for j in 1..=m {
        let next = e1.matmul(&level[j - 1]);
        level.push(next);
    }
    let mut total = level[m].clone();

    let w24 = |w: f64| T::lit(w / 24.0) * step;
    let interior = [w24(-1.0), w24(13.0), w24(13.0), w24(-1.0)];
    let first = [w24(9.0), w24(19.0), w24(-5.0), w24(1.0)];
    let last = [w24(1.0), w24(-5.0), w24(19.0), w24(9.0)];

    for _k in 1..=k_max {
        let sourced: Vec<CMatrix<T>> = level.iter().map(|p| jump.matrix.matmul(p)).collect();
        let mut next = Vec::with_capacity(m + 1);
        next.push(CMatrix::zeros(n));
        for i in 0..m {
            // ∫_{t_i}^{t_{i+1}} e^{A(t_{i+1}-s)} J P(s) ds on a four-node stencil
            let (nodes, weights) = if i == 0 {
                (0..4, &first)
            } else if i == m - 1 {
                (m - 3..m + 1, &last)
            } else {
                (i - 1..i + 3, &interior)
            };
            let mut local = CMatrix::zeros(n);
            for (node, &w) in nodes.zip(weights.iter()) {
                let p = i as i64 + 1 - node as i64;
                local += &e_pow(p).matmul(&sourced[node]).scale_re(w);
            }
            let carried = e1.matmul(&next[i]);
            next.push(&carried + &local);
        }
        total += &next[m];
        level = next;
    }
    Ok(Superoperator {
        op_dim: l.op_dim,
        matrix: total,
    })
}
