use crate::error::{Error, Result};
use crate::scalar::Real;

/// Partial sum of the singlet yield claimed by the Kominis trajectory
/// argument for the coherent initial state with `kT = 0`:
///
/// `Y_S = Σ_{n<n_terms} (p_nr q_0)^n (p_r + p_nr q_S)`
///
/// with `p_r = kS dt/2`, `p_nr = 1 - p_r`, `q_S = kS dt/4` and
/// `q_0 = 1 - kS dt/2`. Tends to 3/4 as `kS dt → 0`.
pub fn kominis_yield_series<T: Real>(k_s: T, dt: T, n_terms: usize) -> Result<T> {
    let x = k_s * dt;
    if !(x > T::zero()) || !x.is_finite() || x > T::lit(0.1) {
        return Err(Error::Precondition(format!(
            "kS*dt must lie in (0, 0.1], got {x}"
        )));
    }
    if n_terms == 0 {
        return Err(Error::Precondition("n_terms must be at least 1".into()));
    }
    let half = T::lit(0.5);
    let p_r = x * half;
    let p_nr = T::one() - p_r;
    let q_s = x * T::lit(0.25);
    let q_0 = T::one() - x * half;
    let first = p_r + p_nr * q_s;
    let ratio = p_nr * q_0;
    let mut sum = T::zero();
    let mut weight = T::one();
    for _ in 0..n_terms {
        let next = sum + weight * first;
        if next == sum {
            break;
        }
        sum = next;
        weight *= ratio;
    }
    Ok(sum)
}
