use rand::Rng;

use crate::error::{Error, Result};
use crate::master::ModelSpec;
use crate::scalar::{cr, Real, C};
use crate::spin::{
    effective_hamiltonian, measurement_lindblads, reaction_lindblads, singlet_projector,
    triplet_projector, BasisKind, Operator, RatePair, S, T as T_IDX,
};

use super::{EventKind, Propagator, PureState, Scheme, TrajectoryEvent};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Branch<T> {
    pub kind: EventKind,
    pub probability: T,
}

fn branch<T>(kind: EventKind, probability: T) -> Branch<T> {
    Branch { kind, probability }
}

/// Jump operators whose `Σ L†L` generates the no-jump decay of `scheme`.
///
/// In the two-level basis the product states are absent, so each reaction
/// operator `√k|X₀⟩⟨X|` is replaced by `√k|X⟩⟨X|`, which has the same
/// `L†L`.
fn decay_lindblads<T: Real>(
    scheme: Scheme,
    basis: BasisKind,
    rates: RatePair<T>,
) -> Vec<Operator<T>> {
    match (scheme, basis) {
        (Scheme::Kominis, _) => Vec::new(),
        (Scheme::Traditional, BasisKind::FourLevelSTProducts) => reaction_lindblads(rates).to_vec(),
        (Scheme::JonesHore, BasisKind::FourLevelSTProducts) => {
            measurement_lindblads(rates).to_vec()
        }
        (Scheme::Traditional, BasisKind::TwoLevelST) => vec![
            singlet_projector(basis).scale_re(rates.k_s.sqrt()),
            triplet_projector(basis).scale_re(rates.k_t.sqrt()),
        ],
        (Scheme::JonesHore, BasisKind::TwoLevelST) => vec![
            singlet_projector(basis).scale_re(rates.k_s.sqrt()),
            triplet_projector(basis).scale_re(rates.k_t.sqrt()),
            triplet_projector(basis).scale_re(rates.k_s.sqrt()),
            singlet_projector(basis).scale_re(rates.k_t.sqrt()),
        ],
    }
}

/// Advances single trajectories of one scheme with a fixed step.
///
/// The no-jump generator is `H - i(kS/2)Q_S - i(kT/2)Q_T` for the
/// traditional scheme, `H - i(kS+kT)/2` on the radical pair for the
/// Jones-Hore scheme and plain `H` for the Kominis scheme.
#[derive(Debug, Clone)]
pub struct Stepper<T: Real> {
    scheme: Scheme,
    rates: RatePair<T>,
    dt: T,
    heff: Operator<T>,
    propagator: Propagator<T>,
}

impl<T: Real> Stepper<T> {
    pub fn new(scheme: Scheme, model: &ModelSpec<T>, dt: T) -> Result<Self> {
        if scheme == Scheme::Kominis && model.rates.k_t != T::zero() {
            return Err(Error::Unsupported("Kominis scheme requires kT=0".into()));
        }
        let h = model.hamiltonian();
        let heff = effective_hamiltonian(&h, &decay_lindblads(scheme, model.basis, model.rates))?;
        let propagator = Propagator::new(&heff, dt)?;
        Ok(Self {
            scheme,
            rates: model.rates,
            dt,
            heff,
            propagator,
        })
    }

    pub fn scheme(&self) -> Scheme {
        self.scheme
    }

    pub fn dt(&self) -> T {
        self.dt
    }

    pub fn effective_hamiltonian(&self) -> &Operator<T> {
        &self.heff
    }

    /// Branches of one step from a normalized state, in draw order.
    ///
    /// The Jones-Hore no-jump weight `1 - (kS+kT)dt` does not depend on the
    /// state while the traditional one, `1 - kS⟨Q_S⟩dt - kT⟨Q_T⟩dt`, does.
    /// Either way the list sums to one for a normalized state on `{S, T}`.
    pub fn branches(&self, psi: &PureState<T>) -> Vec<Branch<T>> {
        let (items, len) = self.branch_table(psi);
        items[..len].to_vec()
    }

    fn branch_table(&self, psi: &PureState<T>) -> ([Branch<T>; 5], usize) {
        let (p_s, p_t) = populations(psi);
        let RatePair { k_s, k_t } = self.rates;
        let dt = self.dt;
        let unused = branch(EventKind::NoJump, T::zero());
        match self.scheme {
            Scheme::Traditional => (
                [
                    branch(
                        EventKind::NoJump,
                        T::one() - k_s * p_s * dt - k_t * p_t * dt,
                    ),
                    branch(EventKind::SingletProduct, k_s * p_s * dt),
                    branch(EventKind::TripletProduct, k_t * p_t * dt),
                    unused,
                    unused,
                ],
                3,
            ),
            Scheme::JonesHore => (
                [
                    branch(EventKind::NoJump, T::one() - k_s * dt - k_t * dt),
                    branch(EventKind::SingletProduct, k_s * p_s * dt),
                    branch(EventKind::ProjectT, k_s * p_t * dt),
                    branch(EventKind::TripletProduct, k_t * p_t * dt),
                    branch(EventKind::ProjectS, k_t * p_s * dt),
                ],
                5,
            ),
            Scheme::Kominis => {
                let half = T::lit(0.5);
                let react = k_s * p_s * dt;
                let survive = T::one() - react;
                let q_s = k_s * p_s * dt * half;
                let q_t = k_s * p_t * dt * half;
                (
                    [
                        branch(EventKind::KominisRemove, react),
                        branch(EventKind::ProjectS, survive * q_s),
                        branch(EventKind::ProjectT, survive * q_t),
                        branch(EventKind::NoJump, survive * (T::one() - q_s - q_t)),
                        unused,
                    ],
                    4,
                )
            }
        }
    }

    fn select(&self, psi: &PureState<T>, u: T) -> EventKind {
        let (items, len) = self.branch_table(psi);
        let mut acc = T::zero();
        for b in &items[..len] {
            acc += b.probability;
            if u < acc {
                return b.kind;
            }
        }
        // only reachable through rounding in the cumulative sum
        EventKind::NoJump
    }

    /// Advances `psi` by one step using the uniform draw `u ∈ [0, 1)`.
    ///
    /// Terminal events leave `psi` untouched; the caller stops the
    /// trajectory.
    pub fn step(&self, psi: &mut PureState<T>, u: T, scratch: &mut Vec<C<T>>) -> Result<EventKind> {
        let kind = self.select(psi, u);
        match kind {
            EventKind::NoJump => {
                self.propagator.apply_in_place(psi, scratch);
                renormalize(psi)?;
            }
            EventKind::ProjectS => project(psi, S)?,
            EventKind::ProjectT => project(psi, T_IDX)?,
            EventKind::SingletProduct | EventKind::TripletProduct | EventKind::KominisRemove => {}
        }
        Ok(kind)
    }
}

/// `(⟨Q_S⟩, ⟨Q_T⟩)` of a normalized state.
fn populations<T: Real>(psi: &PureState<T>) -> (T, T) {
    let a = psi.amplitudes();
    (a[S].norm_sqr(), a[T_IDX].norm_sqr())
}

fn renormalize<T: Real>(psi: &mut PureState<T>) -> Result<()> {
    let n2 = psi.norm_sqr();
    if !(n2 > T::zero()) || !n2.is_finite() {
        return Err(Error::InvalidState(format!(
            "cannot renormalize state with squared norm {n2}"
        )));
    }
    let inv = cr(T::one() / n2.sqrt());
    for z in psi.amplitudes_mut() {
        *z *= inv;
    }
    Ok(())
}

/// Collapses onto basis state `index`, keeping the amplitude's phase.
fn project<T: Real>(psi: &mut PureState<T>, index: usize) -> Result<()> {
    let amp = psi.amplitudes()[index];
    let norm = amp.norm();
    if !(norm > T::zero()) {
        return Err(Error::InvalidState(
            "projection onto an unpopulated subspace".into(),
        ));
    }
    for (i, z) in psi.amplitudes_mut().iter_mut().enumerate() {
        *z = if i == index {
            amp / norm
        } else {
            cr(T::zero())
        };
    }
    Ok(())
}

pub fn branch_probabilities<T: Real>(
    scheme: Scheme,
    model: &ModelSpec<T>,
    psi: &PureState<T>,
    dt: T,
) -> Result<Vec<Branch<T>>> {
    Ok(Stepper::new(scheme, model, dt)?.branches(psi))
}

fn step_once<T: Real>(
    scheme: Scheme,
    psi: &PureState<T>,
    model: &ModelSpec<T>,
    t: T,
    dt: T,
    u: T,
) -> Result<(PureState<T>, TrajectoryEvent<T>)> {
    let stepper = Stepper::new(scheme, model, dt)?;
    crate::error::check_dim(model.basis.dim(), psi.dim())?;
    let mut next = psi.clone();
    let mut scratch = Vec::with_capacity(psi.dim());
    let kind = stepper.step(&mut next, u, &mut scratch)?;
    Ok((next, TrajectoryEvent { kind, time: t + dt }))
}

/// One step of the traditional unraveling from time `t`.
pub fn step_traditional<T: Real>(
    psi: &PureState<T>,
    model: &ModelSpec<T>,
    t: T,
    dt: T,
    u: T,
) -> Result<(PureState<T>, TrajectoryEvent<T>)> {
    step_once(Scheme::Traditional, psi, model, t, dt, u)
}

/// One step of the five-branch Jones-Hore unraveling from time `t`.
pub fn step_jones_hore<T: Real>(
    psi: &PureState<T>,
    model: &ModelSpec<T>,
    t: T,
    dt: T,
    u: T,
) -> Result<(PureState<T>, TrajectoryEvent<T>)> {
    step_once(Scheme::JonesHore, psi, model, t, dt, u)
}

/// One step of the Kominis single-molecule scheme from time `t`.
pub fn step_kominis<T: Real>(
    psi: &PureState<T>,
    model: &ModelSpec<T>,
    t: T,
    dt: T,
    u: T,
) -> Result<(PureState<T>, TrajectoryEvent<T>)> {
    step_once(Scheme::Kominis, psi, model, t, dt, u)
}

/// Outcome of a single simulated trajectory.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory<T: Real> {
    /// Every event other than [`EventKind::NoJump`], in order.
    pub events: Vec<TrajectoryEvent<T>>,
    pub final_state: PureState<T>,
    pub terminal: Option<EventKind>,
}

/// Runs one trajectory for `n_steps` steps or until a terminal event.
///
/// `observe` sees the state before every step together with the step's
/// outcome.
pub fn run_trajectory<T: Real, R: Rng>(
    stepper: &Stepper<T>,
    psi0: &PureState<T>,
    n_steps: usize,
    rng: &mut R,
    mut observe: impl FnMut(&PureState<T>, EventKind),
) -> Result<Trajectory<T>> {
    let mut psi = psi0.clone();
    let mut scratch = Vec::with_capacity(psi.dim());
    let mut events = Vec::new();
    let mut terminal = None;
    for n in 1..=n_steps {
        let u = T::lit(rng.gen::<f64>());
        let before = psi.clone();
        let kind = stepper.step(&mut psi, u, &mut scratch)?;
        observe(&before, kind);
        if kind != EventKind::NoJump {
            events.push(TrajectoryEvent {
                kind,
                time: T::from_usize(n).unwrap() * stepper.dt(),
            });
        }
        if kind.is_terminal() {
            terminal = Some(kind);
            break;
        }
    }
    Ok(Trajectory {
        events,
        final_state: psi,
        terminal,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::c;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn model(j: f64, delta: f64, k_s: f64, k_t: f64) -> ModelSpec<f64> {
        ModelSpec::two_level(j, delta, k_s, k_t).unwrap()
    }

    fn probs(
        scheme: Scheme,
        m: &ModelSpec<f64>,
        psi: &PureState<f64>,
        dt: f64,
    ) -> Vec<(EventKind, f64)> {
        branch_probabilities(scheme, m, psi, dt)
            .unwrap()
            .into_iter()
            .map(|b| (b.kind, b.probability))
            .collect()
    }

    #[test]
    fn traditional_branches_sum_to_one() {
        let m = model(0.4, 0.3, 0.8, 0.6);
        let psi = PureState::normalized(vec![c(0.3, 0.2), c(-0.5, 0.7)]).unwrap();
        let p = probs(Scheme::Traditional, &m, &psi, 1e-3);
        let total: f64 = p.iter().map(|x| x.1).sum();
        assert!((total - 1.0).abs() < 1e-15);
        assert_eq!(p[0].0, EventKind::NoJump);
    }

    #[test]
    fn jones_hore_branches_for_coherent_state() {
        let m = model(0.0, 0.0, 1.0, 0.0);
        let psi = PureState::coherent(BasisKind::TwoLevelST);
        let dt = 1e-3;
        let p = probs(Scheme::JonesHore, &m, &psi, dt);
        let expected = [
            (EventKind::NoJump, 1.0 - dt),
            (EventKind::SingletProduct, dt / 2.0),
            (EventKind::ProjectT, dt / 2.0),
            (EventKind::TripletProduct, 0.0),
            (EventKind::ProjectS, 0.0),
        ];
        for ((k, v), (ek, ev)) in p.iter().zip(expected) {
            assert_eq!(*k, ek);
            assert!((v - ev).abs() < 1e-15);
        }
    }

    #[test]
    fn jones_hore_no_jump_weight_is_state_independent_and_total_is_one() {
        let m = model(0.2, 0.5, 0.7, 0.4);
        let dt = 1e-3;
        for amps in [
            vec![cr(1.0), cr(0.0)],
            vec![c(0.6, 0.0), c(0.0, 0.8)],
            vec![cr(0.0), cr(1.0)],
        ] {
            let psi = PureState::normalized(amps).unwrap();
            let p = probs(Scheme::JonesHore, &m, &psi, dt);
            assert!((p[0].1 - (1.0 - 1.1 * dt)).abs() < 1e-15);
            let total: f64 = p.iter().map(|x| x.1).sum();
            assert!((total - 1.0).abs() < 1e-15);
            // the norm actually lost under H_eff differs from the jump weight at O(dt²)
            let (_, dp) = super::super::no_jump_propagate(
                &psi,
                Stepper::new(Scheme::JonesHore, &m, dt)
                    .unwrap()
                    .effective_hamiltonian(),
                dt,
            )
            .unwrap();
            assert!((dp - 1.1 * dt).abs() > 0.0);
            assert!((dp - 1.1 * dt).abs() < (1.1 * dt).powi(2));
        }
    }

    #[test]
    fn projection_onto_triplet_gives_pure_triplet() {
        let m = model(0.0, 0.0, 1.0, 0.0);
        let psi = PureState::coherent(BasisKind::TwoLevelST);
        let dt = 1e-3;
        // draw inside the ProjectT interval [1 - dt/2, 1)
        let (next, ev) = step_jones_hore(&psi, &m, 0.0, dt, 1.0 - dt / 4.0).unwrap();
        assert_eq!(ev.kind, EventKind::ProjectT);
        assert_eq!(next.amplitudes(), &[cr(0.0), cr(1.0)]);
        let (_, ev) = step_jones_hore(&psi, &m, 0.0, dt, 1.0 - 3.0 * dt / 4.0).unwrap();
        assert_eq!(ev.kind, EventKind::SingletProduct);
    }

    #[test]
    fn dark_triplet_never_jumps_in_traditional_scheme() {
        let m = model(0.0, 0.0, 1.0, 0.0);
        let psi = PureState::triplet(BasisKind::TwoLevelST);
        for u in [0.0, 0.5, 0.999_999] {
            let (next, ev) = step_traditional(&psi, &m, 0.0, 1e-3, u).unwrap();
            assert_eq!(ev.kind, EventKind::NoJump);
            assert_eq!(next, psi);
        }
    }

    #[test]
    fn kominis_triplet_never_reacts() {
        // Measurement of an already-triplet pair returns it unchanged.
        let m = model(0.0, 0.0, 1.0, 0.0);
        let stepper = Stepper::new(Scheme::Kominis, &m, 1e-3).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let psi = PureState::triplet(BasisKind::TwoLevelST);
        let traj = run_trajectory(&stepper, &psi, 20_000, &mut rng, |_, _| {}).unwrap();
        assert_eq!(traj.terminal, None);
        assert!(traj.events.iter().all(|e| e.kind == EventKind::ProjectT));
        assert_eq!(traj.final_state, psi);
    }

    #[test]
    fn kominis_branches_follow_conditioned_measurement() {
        let m = model(0.0, 0.0, 1.0, 0.0);
        let psi = PureState::coherent(BasisKind::TwoLevelST);
        let dt = 1e-3;
        let p = probs(Scheme::Kominis, &m, &psi, dt);
        let survive = 1.0 - dt / 2.0;
        assert_eq!(p[0].0, EventKind::KominisRemove);
        assert!((p[0].1 - dt / 2.0).abs() < 1e-16);
        assert!((p[1].1 - survive * dt / 4.0).abs() < 1e-16);
        assert!((p[2].1 - survive * dt / 4.0).abs() < 1e-16);
        assert!((p[3].1 - survive * (1.0 - dt / 2.0)).abs() < 1e-15);
    }

    #[test]
    fn kominis_rejects_triplet_rate() {
        let m = model(0.0, 0.0, 1.0, 0.5);
        assert!(matches!(
            Stepper::new(Scheme::Kominis, &m, 1e-3),
            Err(Error::Unsupported(_))
        ));
    }

    #[test]
    fn kominis_singlet_reacts_with_certainty() {
        let m = model(0.0, 0.0, 1.0, 0.0);
        let stepper = Stepper::new(Scheme::Kominis, &m, 1e-3).unwrap();
        let psi = PureState::singlet(BasisKind::TwoLevelST);
        for seed in 0..50 {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let traj = run_trajectory(&stepper, &psi, 100_000, &mut rng, |_, _| {}).unwrap();
            assert_eq!(traj.terminal, Some(EventKind::KominisRemove));
        }
    }

    #[test]
    fn spin_selectivity_over_many_trajectories() {
        // pure |T⟩ never yields singlet product, pure |S⟩ never triplet
        let m = model(0.0, 0.0, 1.0, 0.7);
        for scheme in [Scheme::Traditional, Scheme::JonesHore] {
            let stepper = Stepper::new(scheme, &m, 1e-3).unwrap();
            for (seed, psi) in [
                (1, PureState::singlet(BasisKind::TwoLevelST)),
                (2, PureState::triplet(BasisKind::TwoLevelST)),
            ] {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                for _ in 0..200 {
                    let mut violations = 0;
                    run_trajectory(&stepper, &psi, 20_000, &mut rng, |before, kind| {
                        let a = before.amplitudes();
                        let pure_t = a[S].norm() == 0.0;
                        let pure_s = a[T_IDX].norm() == 0.0;
                        if (pure_t && kind == EventKind::SingletProduct)
                            || (pure_s && kind == EventKind::TripletProduct)
                        {
                            violations += 1;
                        }
                    })
                    .unwrap();
                    assert_eq!(violations, 0);
                }
            }
        }
    }

    #[test]
    fn zero_norm_projection_is_an_error() {
        let mut psi = PureState::<f64>::triplet(BasisKind::TwoLevelST);
        assert!(project(&mut psi, S).is_err());
    }

    #[test]
    fn four_level_stepper_matches_two_level() {
        let m2 = model(0.3, 0.2, 0.9, 0.4);
        let m4 = m2.with_basis(BasisKind::FourLevelSTProducts);
        for scheme in [Scheme::Traditional, Scheme::JonesHore] {
            let s2 = Stepper::new(scheme, &m2, 1e-3).unwrap();
            let s4 = Stepper::new(scheme, &m4, 1e-3).unwrap();
            let h2 = s2.effective_hamiltonian();
            let h4 = s4.effective_hamiltonian();
            for i in 0..2 {
                for j in 0..2 {
                    assert!((h2[(i, j)] - h4[(i, j)]).norm() < 1e-15);
                }
            }
        }
    }
}
