//! Ensemble means of the trajectory schemes against their master equations.

use spinjump::jump::{run_ensemble, EnsembleSettings, PureState, Scheme};
use spinjump::master::{integrate, DensityMatrix, ModelSpec, Theory};
use spinjump::observables::{populations, yields_from_ensemble, yields_from_trace};
use spinjump::scalar::c;
use spinjump::spin::BasisKind;

const TWO: BasisKind = BasisKind::TwoLevelST;

struct Case {
    model: ModelSpec<f64>,
    psi0: PureState<f64>,
    seed: u64,
}

fn cases() -> Vec<Case> {
    vec![
        Case {
            model: ModelSpec::two_level(0.0, 0.3, 1.0, 0.5).unwrap(),
            psi0: PureState::singlet(TWO),
            seed: 1,
        },
        Case {
            model: ModelSpec::two_level(0.7, 0.5, 0.4, 1.2).unwrap(),
            psi0: PureState::coherent(TWO),
            seed: 2,
        },
        Case {
            model: ModelSpec::two_level(-0.4, 0.8, 2.0, 0.0).unwrap(),
            psi0: PureState::normalized(vec![c(0.3, 0.2), c(0.0, -0.9)]).unwrap(),
            seed: 3,
        },
    ]
}

#[test]
fn ensemble_means_track_master_equations() {
    let (t_end, dt, record_every) = (3.0, 1e-3, 100);
    for (i, case) in cases().iter().enumerate() {
        let (qs, qt) = case.model.projectors();
        let rho0 = DensityMatrix::new(case.psi0.density_matrix()).unwrap();
        let settings = EnsembleSettings {
            n_traj: 10_000,
            t_end,
            dt,
            seed: case.seed,
            record_every,
        };
        for (scheme, theory) in [
            (Scheme::Traditional, Theory::Haberkorn),
            (Scheme::JonesHore, Theory::JonesHore),
        ] {
            let ens = run_ensemble(scheme, &case.model, &case.psi0, &settings).unwrap();
            let trace = integrate(theory, &case.model, &rho0, t_end, dt).unwrap();
            // populations of one trajectory lie in [0, 1], so the binomial
            // error bounds the spread; the empirical one misses jumps too
            // rare to have occurred in the sample
            let n = settings.n_traj as f64;
            let se = |emp: f64, p: f64| emp.max((p * (1.0 - p) / n).sqrt()).max(1e-12);
            let mut z_scores = Vec::new();
            for (k, state) in trace.states.iter().step_by(record_every).enumerate() {
                let (p_s, p_t, _) = populations(state.matrix(), &qs, &qt).unwrap();
                z_scores
                    .push((ens.singlet_population[k] - p_s).abs() / se(ens.singlet_stderr[k], p_s));
                z_scores
                    .push((ens.triplet_population[k] - p_t).abs() / se(ens.triplet_stderr[k], p_t));
            }
            let within =
                z_scores.iter().filter(|&&z| z <= 3.0).count() as f64 / z_scores.len() as f64;
            let worst = z_scores.iter().cloned().fold(0.0, f64::max);
            assert!(
                within >= 0.95,
                "case {i} {scheme}: only {within} of points within 3 s.e."
            );
            assert!(
                worst <= 5.0,
                "case {i} {scheme}: worst deviation {worst} s.e."
            );

            let counted = yields_from_ensemble(&ens);
            let integrated = yields_from_trace(&trace).unwrap();
            let n = ens.n_traj as f64;
            for (got, want) in [
                (counted.singlet_yield, integrated.singlet_yield),
                (counted.triplet_yield, integrated.triplet_yield),
            ] {
                // twelve comparisons in all: 4 s.e. keeps the family-wise
                // false-alarm rate below 0.1%
                let se = (want * (1.0 - want) / n).sqrt().max(1e-12);
                assert!(
                    (got - want).abs() <= 4.0 * se,
                    "case {i} {scheme}: yield {got} vs {want}"
                );
            }
            assert_eq!(
                counted.singlet_yield + counted.triplet_yield + counted.survival,
                1.0
            );
        }
    }
}
