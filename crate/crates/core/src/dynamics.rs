//! Closed-form propagator of the two-photon interaction, applied to either
//! cavity, plus classical-field rotations of the atom.
//!
//! The interaction couples the doublet `(|e, n>, |g, n + 2>)` of each mode.
//! Writing `k_n = sqrt((n + 1)(n + 2))`, `Gamma_n = (delta + chi (n + 1)) / 2`
//! and `delta_n = sqrt(Gamma_n^2 + k_n^2)`, the block acting after a scaled
//! time `tau` is
//!
//! ```text
//! e^(i chi tau / 2) [  C_n              -i k_n S_n ]
//!                   [ -i k_n S_n         C_n^*     ]
//! ```
//!
//! with `C_n = cos(delta_n tau) - i (Gamma_n / delta_n) sin(delta_n tau)` and
//! `S_n = sin(delta_n tau) / delta_n`. The conjugate on the lower diagonal is
//! what makes each block unitary once `Gamma_n != 0`; at exact resonance both
//! diagonals reduce to `cos(k_n tau)`. Ground amplitudes at `n in {0, 1}`
//! have no doublet partner and only pick up the corresponding phase.
//!
//! `delta_n` vanishes exactly on those inert levels at resonance, so the
//! ratios are evaluated through `sinc` with a series switch near zero instead
//! of dividing by `delta_n`.

use ndarray::Array3;
use num_complex::Complex64;

use crate::fockspace::{CavityLabel, Error, JointState, Params};
use crate::LEAKAGE_TOL;

/// Block coefficients of the propagator at one Fock index.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PropagatorCoefficients {
    /// Diagonal coefficient on the excited branch, `C_n`.
    pub c_upper: Complex64,
    /// Diagonal coefficient on the ground branch at the same row index,
    /// i.e. the conjugated `C` evaluated with every index shifted by -2.
    pub c_lower: Complex64,
    /// `S_n = sin(delta_n tau) / delta_n`.
    pub s_val: f64,
    /// Overall phase `e^(i chi tau / 2)` carried by the whole operator.
    pub global_phase: Complex64,
}

/// `Gamma_n = (delta + chi (n + 1)) / 2` in units of the coupling constant.
///
/// Defined down to `n = -2` because the ground-branch coefficient evaluates
/// the same expression at indices shifted by -2.
pub fn gamma_n(n: i64, p: &Params) -> f64 {
    assert!(n >= -2, "gamma_n is only defined for n >= -2, got {n}");
    (p.delta + p.chi * (n + 1) as f64) / 2.0
}

/// Generalized Rabi rate `delta_n = sqrt(Gamma_n^2 + (n + 1)(n + 2))`.
pub fn delta_n(n: i64, p: &Params) -> f64 {
    assert!(n >= -2, "delta_n is only defined for n >= -2, got {n}");
    let gamma = gamma_n(n, p);
    let ladder = ((n + 1) * (n + 2)) as f64;
    let radicand = gamma * gamma + ladder;
    assert!(
        radicand >= 0.0,
        "negative radicand {radicand} at n = {n}; ladder weights cannot be negative here"
    );
    radicand.sqrt()
}

/// `sin(x) / x`, series-expanded below 1e-4 so the `delta_n -> 0` limits of
/// the block coefficients come out exact.
fn sinc(x: f64) -> f64 {
    if x.abs() < 1e-4 {
        let x2 = x * x;
        1.0 - x2 / 6.0 + x2 * x2 / 120.0
    } else {
        x.sin() / x
    }
}

/// The `C` coefficient at integer index `n >= -2`:
/// `cos(delta_n tau) - i Gamma_n tau sinc(delta_n tau)`.
fn c_coeff(n: i64, tau: f64, p: &Params) -> Complex64 {
    let gamma = gamma_n(n, p);
    let rate = delta_n(n, p);
    let x = rate * tau;
    Complex64::new(x.cos(), -gamma * tau * sinc(x))
}

/// Propagator coefficients for the doublet rooted at Fock index `n`.
pub fn coefficients(n: usize, tau: f64, p: &Params) -> PropagatorCoefficients {
    assert!(tau.is_finite(), "tau must be finite");
    let n = n as i64;
    let x = delta_n(n, p) * tau;
    PropagatorCoefficients {
        c_upper: c_coeff(n, tau, p),
        c_lower: c_coeff(n - 2, tau, p).conj(),
        s_val: tau * sinc(x),
        global_phase: Complex64::from_polar(1.0, 0.5 * p.chi * tau),
    }
}

/// Evolves the state through one cavity for a scaled time `tau`, leaving the
/// other mode untouched.
///
/// Requires less than [`LEAKAGE_TOL`] probability mass within two rungs of
/// the cutoff; the residual excited amplitude there, which has no doublet
/// partner inside the truncated basis, keeps only its diagonal coefficient
/// and the state is renormalized, so the returned norm is 1 by construction.
pub fn evolve_cavity(
    s: &JointState,
    cavity: CavityLabel,
    tau: f64,
    p: &Params,
) -> Result<JointState, Error> {
    let mass = s.boundary_leakage(2);
    if mass >= LEAKAGE_TOL {
        return Err(Error::BoundaryLeakage { cavity, mass });
    }

    let d = s.dim();
    let cutoff = s.cutoff();

    // Per-index tables: upper diagonal, lower diagonal, off-diagonal weight.
    let mut c_up = vec![Complex64::default(); d];
    let mut c_low = vec![Complex64::default(); d];
    let mut hop = vec![Complex64::default(); d];
    for n in 0..d {
        let coeff = coefficients(n, tau, p);
        c_up[n] = coeff.c_upper;
        c_low[n] = coeff.c_lower;
        let k = (((n + 1) * (n + 2)) as f64).sqrt();
        hop[n] = Complex64::new(0.0, -1.0) * k * coeff.s_val;
    }
    let phase = Complex64::from_polar(1.0, 0.5 * p.chi * tau);

    let mut amps = Array3::zeros((2, d, d));
    let e = 0;
    let g = 1;
    for spectator in 0..d {
        let get = |atom: usize, n: usize| -> Complex64 {
            match cavity {
                CavityLabel::A => s.amps[(atom, n, spectator)],
                CavityLabel::B => s.amps[(atom, spectator, n)],
            }
        };
        let put = |amps: &mut Array3<Complex64>, atom: usize, n: usize, v: Complex64| {
            match cavity {
                CavityLabel::A => amps[(atom, n, spectator)] = v,
                CavityLabel::B => amps[(atom, spectator, n)] = v,
            }
        };

        for n in 0..d {
            let new_e = if n + 2 <= cutoff {
                c_up[n] * get(e, n) + hop[n] * get(g, n + 2)
            } else {
                // Partner lies beyond the cutoff; guarded by the leakage
                // precondition above.
                c_up[n] * get(e, n)
            };
            put(&mut amps, e, n, phase * new_e);

            let new_g = if n >= 2 {
                hop[n - 2] * get(e, n - 2) + c_low[n] * get(g, n)
            } else {
                c_low[n] * get(g, n)
            };
            put(&mut amps, g, n, phase * new_g);
        }
    }

    let mut out = JointState { amps, cutoff };
    out.renormalize();
    Ok(out)
}

/// Rotates the atom by `theta` uniformly across all Fock indices:
/// `e -> cos(theta/2) e - sin(theta/2) g`, `g -> sin(theta/2) e + cos(theta/2) g`.
///
/// `theta = pi/2` splits a level ket into the (difference, sum) pair used to
/// steer the final detection; `theta = pi` swaps the levels up to a sign.
pub fn rotate_atom(s: &JointState, theta: f64) -> JointState {
    assert!(theta.is_finite(), "theta must be finite");
    let (sin, cos) = (0.5 * theta).sin_cos();
    let d = s.dim();
    let mut amps = Array3::zeros((2, d, d));
    for na in 0..d {
        for nb in 0..d {
            let e = s.amps[(0, na, nb)];
            let g = s.amps[(1, na, nb)];
            amps[(0, na, nb)] = cos * e - sin * g;
            amps[(1, na, nb)] = sin * e + cos * g;
        }
    }
    JointState {
        amps,
        cutoff: s.cutoff,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fockspace::AtomLevel;
    use ndarray::Array3;
    use rand::Rng;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn resonant() -> Params {
        Params::default()
    }

    fn max_diff(a: &JointState, b: &JointState) -> f64 {
        a.amps
            .iter()
            .zip(b.amps.iter())
            .map(|(x, y)| (x - y).norm())
            .fold(0.0, f64::max)
    }

    /// Random normalized state with support confined to `n <= max_n` on both
    /// modes, so the propagator acts exactly unitarily.
    fn random_state(rng: &mut ChaCha8Rng, cutoff: usize, max_n: usize) -> JointState {
        let d = cutoff + 1;
        let mut amps = Array3::zeros((2, d, d));
        for atom in 0..2 {
            for na in 0..=max_n {
                for nb in 0..=max_n {
                    amps[(atom, na, nb)] =
                        c(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
                }
            }
        }
        JointState::from_amplitudes(amps).unwrap()
    }

    #[test]
    fn gamma_matches_direct_evaluation() {
        let p = Params::new(0.0, 0.0, 20).unwrap();
        assert_eq!(gamma_n(0, &p), 0.0);

        let p = Params::new(0.0, -0.75, 20).unwrap();
        assert!((gamma_n(2, &p) - (-0.375)).abs() < 1e-15);

        let p = Params::new(0.5, 0.0, 20).unwrap();
        assert!((gamma_n(1, &p) - 0.5).abs() < 1e-15);
    }

    #[test]
    fn delta_matches_direct_evaluation() {
        let p = resonant();
        assert!((delta_n(2, &p) - 12.0f64.sqrt()).abs() < 1e-15);
        assert!((delta_n(0, &p) - 2.0f64.sqrt()).abs() < 1e-15);

        let p = Params::new(0.3, -0.9, 20).unwrap();
        assert!((delta_n(-1, &p) - (0.9f64 / 2.0).abs()).abs() < 1e-15);
    }

    #[test]
    fn coefficients_at_zero_time_are_the_identity() {
        let p = Params::new(0.7, -0.3, 20).unwrap();
        let k = coefficients(2, 0.0, &p);
        assert_eq!(k.c_upper, c(1.0, 0.0));
        assert_eq!(k.c_lower, c(1.0, 0.0));
        assert_eq!(k.s_val, 0.0);
        assert_eq!(k.global_phase, c(1.0, 0.0));
    }

    #[test]
    fn coefficients_at_the_quarter_period() {
        let p = resonant();
        let tau = std::f64::consts::FRAC_PI_2 / 12.0f64.sqrt();
        let k = coefficients(2, tau, &p);
        assert!(k.c_upper.norm() < 1e-12);
        assert!((k.s_val - 1.0 / 12.0f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn shifted_coefficient_hits_the_zero_rate_limit() {
        // At resonance the index-shifted block of n = 0 has Gamma = rate = 0.
        let k = coefficients(0, 1.0, &resonant());
        assert_eq!(k.c_lower, c(1.0, 0.0));
    }

    #[test]
    fn block_unitarity_across_indices_and_times() {
        let params = [
            resonant(),
            Params::new(0.5, 0.0, 20).unwrap(),
            Params::new(0.0, -0.75, 20).unwrap(),
            Params::new(-0.8, 0.6, 20).unwrap(),
        ];
        for p in &params {
            for n in 0..=40usize {
                for step in 0..=40 {
                    let tau = 0.25 * step as f64;
                    let k = coefficients(n, tau, p);
                    let ladder = ((n + 1) * (n + 2)) as f64;
                    let unit = k.c_upper.norm_sqr() + ladder * k.s_val * k.s_val;
                    assert!(
                        (unit - 1.0).abs() < 1e-12,
                        "block at n={n}, tau={tau} has |C|^2 + k^2 S^2 = {unit}"
                    );
                }
            }
        }
    }

    #[test]
    fn excited_vacuum_deposits_a_photon_pair() {
        let tau = std::f64::consts::FRAC_PI_2 / 2.0f64.sqrt();
        let s = JointState::basis(AtomLevel::Excited, 0, 0, 20).unwrap();
        let out = evolve_cavity(&s, CavityLabel::A, tau, &resonant()).unwrap();
        let expected = JointState::basis(AtomLevel::Ground, 2, 0, 20).unwrap();
        let overlap = expected.inner(&out).unwrap();
        assert!((overlap - c(0.0, -1.0)).norm() < 1e-12, "got {overlap}");
    }

    #[test]
    fn ground_vacuum_is_exactly_inert_at_resonance() {
        let s = JointState::basis(AtomLevel::Ground, 0, 0, 20).unwrap();
        for tau in [0.1, 1.0, 3.16, 9.7] {
            let out = evolve_cavity(&s, CavityLabel::A, tau, &resonant()).unwrap();
            assert_eq!(max_diff(&s, &out), 0.0);
        }
    }

    #[test]
    fn spectator_mode_factors_out() {
        let tau = 0.83;
        let p = Params::new(0.4, -0.2, 20).unwrap();

        let with_spectator = JointState::basis(AtomLevel::Excited, 0, 2, 20).unwrap();
        let evolved = evolve_cavity(&with_spectator, CavityLabel::A, tau, &p).unwrap();

        let bare = JointState::basis(AtomLevel::Excited, 0, 0, 20).unwrap();
        let bare_evolved = evolve_cavity(&bare, CavityLabel::A, tau, &p).unwrap();

        // Amplitudes at n_b = 2 must replicate the bare one-mode result.
        for atom in [AtomLevel::Excited, AtomLevel::Ground] {
            for na in 0..=20 {
                let got = evolved.amplitude(atom, na, 2);
                let want = bare_evolved.amplitude(atom, na, 0);
                assert!((got - want).norm() < 1e-12);
            }
        }
        // And nothing may appear at other n_b.
        for atom in 0..2 {
            for na in 0..=20 {
                for nb in 0..=20 {
                    if nb != 2 {
                        assert_eq!(evolved.amps[(atom, na, nb)], c(0.0, 0.0));
                    }
                }
            }
        }
    }

    #[test]
    fn spectator_photon_distribution_is_invariant() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let p = Params::new(-0.6, 0.35, 12).unwrap();
        let s = random_state(&mut rng, 12, 8);
        let out = evolve_cavity(&s, CavityLabel::A, 1.7, &p).unwrap();
        let dist_before = crate::observables::photon_distribution(&s, CavityLabel::B);
        let dist_after = crate::observables::photon_distribution(&out, CavityLabel::B);
        for (b, a) in dist_before.iter().zip(dist_after.iter()) {
            assert!((b - a).abs() < 1e-12);
        }
    }

    #[test]
    fn evolution_rejects_states_leaking_at_the_cutoff() {
        let s = JointState::basis(AtomLevel::Excited, 19, 0, 20).unwrap();
        let err = evolve_cavity(&s, CavityLabel::A, 1.0, &resonant()).unwrap_err();
        match err {
            Error::BoundaryLeakage { cavity, mass } => {
                assert_eq!(cavity, CavityLabel::A);
                assert!((mass - 1.0).abs() < 1e-12);
            }
            other => panic!("expected leakage rejection, got {other:?}"),
        }
    }

    #[test]
    fn norm_is_preserved_for_random_states_and_parameters() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..300 {
            let p = Params::new(
                rng.random_range(-1.0..1.0),
                rng.random_range(-1.0..1.0),
                12,
            )
            .unwrap();
            let s = random_state(&mut rng, 12, 10);
            let tau = rng.random_range(0.0..10.0);
            let cavity = if rng.random::<bool>() {
                CavityLabel::A
            } else {
                CavityLabel::B
            };
            let out = evolve_cavity(&s, cavity, tau, &p).unwrap();
            assert!((out.norm() - 1.0).abs() < 1e-10);
        }
    }

    #[test]
    fn propagation_composes_as_a_one_parameter_group() {
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        for _ in 0..100 {
            let p = Params::new(
                rng.random_range(-1.0..1.0),
                rng.random_range(-1.0..1.0),
                12,
            )
            .unwrap();
            let s = random_state(&mut rng, 12, 8);
            let (t1, t2) = (rng.random_range(0.0..5.0), rng.random_range(0.0..5.0));
            let step_a = evolve_cavity(&s, CavityLabel::A, t1, &p).unwrap();
            let two_steps = evolve_cavity(&step_a, CavityLabel::A, t2, &p).unwrap();
            let one_step = evolve_cavity(&s, CavityLabel::A, t1 + t2, &p).unwrap();
            assert!(max_diff(&two_steps, &one_step) < 1e-10);
        }
    }

    #[test]
    fn cavity_order_commutes_on_inert_ground_states() {
        // Ground amplitudes below the pair threshold only pick up phases, so
        // the two cavity propagators commute there; the protocol order A
        // then B is the normative one for general states.
        let p = Params::new(0.4, -0.7, 20).unwrap();
        let d = 21;
        let mut amps = Array3::zeros((2, d, d));
        amps[(1, 0, 0)] = c(0.5, 0.0);
        amps[(1, 0, 1)] = c(0.0, 0.5);
        amps[(1, 1, 0)] = c(-0.5, 0.0);
        amps[(1, 1, 1)] = c(0.0, -0.5);
        let s = JointState::from_amplitudes(amps).unwrap();
        let ab = evolve_cavity(
            &evolve_cavity(&s, CavityLabel::A, 2.3, &p).unwrap(),
            CavityLabel::B,
            2.3,
            &p,
        )
        .unwrap();
        let ba = evolve_cavity(
            &evolve_cavity(&s, CavityLabel::B, 2.3, &p).unwrap(),
            CavityLabel::A,
            2.3,
            &p,
        )
        .unwrap();
        assert!(max_diff(&ab, &ba) < 1e-12);
    }

    #[test]
    fn rotation_at_zero_is_the_identity() {
        let s = JointState::atom_superposition(2, 2, 20).unwrap();
        assert_eq!(max_diff(&s, &rotate_atom(&s, 0.0)), 0.0);
    }

    #[test]
    fn half_turn_reexcites_a_ground_atom_up_to_sign() {
        let s = JointState::basis(AtomLevel::Ground, 0, 0, 20).unwrap();
        let out = rotate_atom(&s, std::f64::consts::PI);
        // e <- -g under this convention.
        assert!((out.amplitude(AtomLevel::Excited, 0, 0) - c(-1.0, 0.0)).norm() < 1e-15);
        assert!(out.amplitude(AtomLevel::Ground, 0, 0).norm() < 1e-15);
    }

    #[test]
    fn quarter_turn_splits_the_entangled_pair_state() {
        // -(1/sqrt 2)(|e>|4,0> + |g>|0,4>) must rotate into
        // -(1/2)[|e>(|4,0> - |0,4>) + |g>(|0,4> + |4,0>)].
        let d = 21;
        let mut amps = Array3::zeros((2, d, d));
        let w = -std::f64::consts::FRAC_1_SQRT_2;
        amps[(0, 4, 0)] = c(w, 0.0);
        amps[(1, 0, 4)] = c(w, 0.0);
        let s = JointState::from_amplitudes(amps).unwrap();

        let out = rotate_atom(&s, std::f64::consts::FRAC_PI_2);
        assert!((out.amplitude(AtomLevel::Excited, 4, 0) - c(-0.5, 0.0)).norm() < 1e-12);
        assert!((out.amplitude(AtomLevel::Excited, 0, 4) - c(0.5, 0.0)).norm() < 1e-12);
        assert!((out.amplitude(AtomLevel::Ground, 4, 0) - c(-0.5, 0.0)).norm() < 1e-12);
        assert!((out.amplitude(AtomLevel::Ground, 0, 4) - c(-0.5, 0.0)).norm() < 1e-12);
    }

    #[test]
    fn rotation_followed_by_its_inverse_is_identity() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..50 {
            let s = random_state(&mut rng, 8, 8);
            let theta = rng.random_range(-7.0..7.0);
            let back = rotate_atom(&rotate_atom(&s, theta), -theta);
            assert!(max_diff(&s, &back) < 1e-12);
        }
    }
}
