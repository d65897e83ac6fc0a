use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{check_dim, Error, Result};
use crate::linalg::CMatrix;
use crate::master::{step_count, ModelSpec};
use crate::scalar::{Real, C};
use crate::spin::{S, T as T_IDX};

use super::{EventKind, PureState, Scheme, Stepper};

/// Trajectories per reduction block. Blocks are the unit of parallel work
/// and are combined in index order, so results do not depend on the
/// number of worker threads.
pub const ENSEMBLE_BLOCK: usize = 1024;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnsembleSettings<T> {
    pub n_traj: usize,
    pub t_end: T,
    pub dt: T,
    pub seed: u64,
    /// Record the ensemble mean every this many steps.
    pub record_every: usize,
}

/// Aggregated outcome of an ensemble of trajectories.
///
/// `mean_rho[k]` is the sum of `|ψ⟩⟨ψ|` over trajectories still on the
/// radical pair at `times[k]`, divided by `n_traj`; reacted trajectories
/// contribute zero, so its trace decays like the master-equation trace.
#[derive(Debug, Clone, PartialEq)]
pub struct EnsembleResult<T: Real> {
    pub scheme: Scheme,
    pub n_traj: usize,
    pub seed: u64,
    pub singlet_count: usize,
    pub triplet_count: usize,
    pub survivor_count: usize,
    pub singlet_yield: T,
    pub triplet_yield: T,
    pub survival_fraction: T,
    pub projections_to_singlet: u64,
    pub projections_to_triplet: u64,
    pub times: Vec<T>,
    pub mean_rho: Vec<CMatrix<T>>,
    pub singlet_population: Vec<T>,
    pub singlet_stderr: Vec<T>,
    pub triplet_population: Vec<T>,
    pub triplet_stderr: Vec<T>,
}

#[derive(Debug, Clone)]
struct Accumulator<T: Real> {
    rho: Vec<CMatrix<T>>,
    p_s: Vec<T>,
    p_s2: Vec<T>,
    p_t: Vec<T>,
    p_t2: Vec<T>,
    singlet: usize,
    triplet: usize,
    proj_s: u64,
    proj_t: u64,
}

impl<T: Real> Accumulator<T> {
    fn new(n_records: usize, dim: usize) -> Self {
        Self {
            rho: vec![CMatrix::zeros(dim); n_records],
            p_s: vec![T::zero(); n_records],
            p_s2: vec![T::zero(); n_records],
            p_t: vec![T::zero(); n_records],
            p_t2: vec![T::zero(); n_records],
            singlet: 0,
            triplet: 0,
            proj_s: 0,
            proj_t: 0,
        }
    }

    fn record(&mut self, k: usize, psi: &PureState<T>) {
        let a = psi.amplitudes();
        let m = &mut self.rho[k];
        let n = a.len();
        for i in 0..n {
            for j in 0..n {
                m[(i, j)] += a[i] * a[j].conj();
            }
        }
        let ps = a[S].norm_sqr();
        let pt = a[T_IDX].norm_sqr();
        self.p_s[k] += ps;
        self.p_s2[k] += ps * ps;
        self.p_t[k] += pt;
        self.p_t2[k] += pt * pt;
    }

    fn merge(&mut self, other: &Self) {
        for (a, b) in self.rho.iter_mut().zip(&other.rho) {
            *a += b;
        }
        for (dst, src) in [
            (&mut self.p_s, &other.p_s),
            (&mut self.p_s2, &other.p_s2),
            (&mut self.p_t, &other.p_t),
            (&mut self.p_t2, &other.p_t2),
        ] {
            for (a, &b) in dst.iter_mut().zip(src) {
                *a += b;
            }
        }
        self.singlet += other.singlet;
        self.triplet += other.triplet;
        self.proj_s += other.proj_s;
        self.proj_t += other.proj_t;
    }
}

/// Independent random stream for trajectory `index`: the ChaCha stream id
/// selects a disjoint substream of the seeded generator.
pub(crate) fn trajectory_rng(seed: u64, index: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index as u64);
    rng
}

fn run_block<T: Real>(
    stepper: &Stepper<T>,
    psi0: &PureState<T>,
    settings: &EnsembleSettings<T>,
    n_steps: usize,
    n_records: usize,
    range: std::ops::Range<usize>,
) -> Result<Accumulator<T>> {
    let mut acc = Accumulator::new(n_records, psi0.dim());
    let mut scratch: Vec<C<T>> = Vec::with_capacity(psi0.dim());
    let every = settings.record_every;
    for index in range {
        let mut rng = trajectory_rng(settings.seed, index);
        let mut psi = psi0.clone();
        acc.record(0, &psi);
        for n in 1..=n_steps {
            let u = T::lit(rng.gen::<f64>());
            match stepper.step(&mut psi, u, &mut scratch)? {
                EventKind::NoJump => {}
                EventKind::ProjectS => acc.proj_s += 1,
                EventKind::ProjectT => acc.proj_t += 1,
                EventKind::SingletProduct | EventKind::KominisRemove => {
                    acc.singlet += 1;
                    break;
                }
                EventKind::TripletProduct => {
                    acc.triplet += 1;
                    break;
                }
            }
            if n % every == 0 {
                acc.record(n / every, &psi);
            }
        }
    }
    Ok(acc)
}

/// Runs `settings.n_traj` independent trajectories of `scheme` from `psi0`.
///
/// Trajectory `i` draws from [`ChaCha8Rng`] seeded with `settings.seed` on
/// stream `i`, one uniform per step, so every trajectory is reproducible in
/// isolation. Blocks of [`ENSEMBLE_BLOCK`] trajectories run on the rayon
/// pool and are summed in block order.
pub fn run_ensemble<T: Real>(
    scheme: Scheme,
    model: &ModelSpec<T>,
    psi0: &PureState<T>,
    settings: &EnsembleSettings<T>,
) -> Result<EnsembleResult<T>> {
    if settings.n_traj == 0 {
        return Err(Error::InvalidParameter {
            name: "n_traj",
            reason: "must be at least 1".into(),
        });
    }
    if settings.record_every == 0 {
        return Err(Error::InvalidParameter {
            name: "record_every",
            reason: "must be at least 1".into(),
        });
    }
    if !(settings.t_end >= settings.dt) || !settings.t_end.is_finite() {
        return Err(Error::Precondition(format!(
            "t_end ({}) must be finite and >= dt ({})",
            settings.t_end, settings.dt
        )));
    }
    check_dim(model.basis.dim(), psi0.dim())?;
    if (psi0.norm_sqr() - T::one()).abs() > T::TRACE_SLACK {
        return Err(Error::InvalidState(
            "initial state must be normalized".into(),
        ));
    }
    let stepper = Stepper::new(scheme, model, settings.dt)?;
    let n_steps = step_count(settings.t_end, settings.dt);
    let n_records = n_steps / settings.record_every + 1;

    let n_blocks = settings.n_traj.div_ceil(ENSEMBLE_BLOCK);
    let blocks: Vec<Result<Accumulator<T>>> = (0..n_blocks)
        .into_par_iter()
        .map(|b| {
            let start = b * ENSEMBLE_BLOCK;
            let end = (start + ENSEMBLE_BLOCK).min(settings.n_traj);
            run_block(&stepper, psi0, settings, n_steps, n_records, start..end)
        })
        .collect();

    let mut total = Accumulator::new(n_records, psi0.dim());
    for block in blocks {
        total.merge(&block?);
    }

    let n = settings.n_traj;
    let n_t = T::from_usize(n).unwrap();
    let inv_n = T::one() / n_t;
    let stderr = |sum: T, sum2: T| {
        if n < 2 {
            return T::zero();
        }
        let mean = sum * inv_n;
        let var = ((sum2 - n_t * mean * mean) / (n_t - T::one())).max(T::zero());
        (var * inv_n).sqrt()
    };
    let survivors = n - total.singlet - total.triplet;
    Ok(EnsembleResult {
        scheme,
        n_traj: n,
        seed: settings.seed,
        singlet_count: total.singlet,
        triplet_count: total.triplet,
        survivor_count: survivors,
        singlet_yield: T::from_usize(total.singlet).unwrap() * inv_n,
        triplet_yield: T::from_usize(total.triplet).unwrap() * inv_n,
        survival_fraction: T::from_usize(survivors).unwrap() * inv_n,
        projections_to_singlet: total.proj_s,
        projections_to_triplet: total.proj_t,
        times: (0..n_records)
            .map(|k| T::from_usize(k * settings.record_every).unwrap() * settings.dt)
            .collect(),
        mean_rho: total.rho.iter().map(|m| m.scale_re(inv_n)).collect(),
        singlet_population: total.p_s.iter().map(|&s| s * inv_n).collect(),
        singlet_stderr: total
            .p_s
            .iter()
            .zip(&total.p_s2)
            .map(|(&s, &s2)| stderr(s, s2))
            .collect(),
        triplet_population: total.p_t.iter().map(|&s| s * inv_n).collect(),
        triplet_stderr: total
            .p_t
            .iter()
            .zip(&total.p_t2)
            .map(|(&s, &s2)| stderr(s, s2))
            .collect(),
    })
}
