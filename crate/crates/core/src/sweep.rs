//! Computational backends for the command-line tools: NOON branch reports,
//! Stark-shift sweeps, and the interaction-time optimizer. Sweep grids are
//! evaluated in parallel under the `parallel` feature; row order always
//! equals grid order.

use crate::fockspace::{AtomLevel, Error, Params};
use crate::observables::{noon_fidelity, NoonTarget, RelativeSign};
use crate::protocol::{self, RunError};
use crate::{par, search};

/// One record of a Stark-shift sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub chi: f64,
    pub delta: f64,
    pub fidelity: f64,
    pub p_ground: f64,
}

/// Both detection branches of the NOON sequence at one parameter point.
#[derive(Debug, Clone, PartialEq)]
pub struct NoonReport {
    pub tau: f64,
    pub chi: f64,
    pub delta: f64,
    pub fidelity_ground: f64,
    pub p_ground: f64,
    pub fidelity_excited: f64,
    pub p_excited: f64,
}

fn run_noon_branch(tau: f64, params: &Params, outcome: AtomLevel) -> (f64, f64) {
    let mut prog = protocol::noon_program_detecting(tau, outcome);
    prog.params = *params;
    match protocol::run(&prog) {
        Ok(result) => {
            let sign = match outcome {
                AtomLevel::Ground => RelativeSign::Plus,
                AtomLevel::Excited => RelativeSign::Minus,
            };
            let target = NoonTarget::new(4, sign);
            (
                noon_fidelity(&result.final_state, &target),
                result.joint_postselect_probability,
            )
        }
        // A branch whose detection probability vanishes contributes nothing.
        Err(RunError::Aborted {
            source: Error::ImpossibleOutcome { .. },
            ..
        }) => (0.0, 0.0),
        Err(other) => panic!("noon run cannot fail here: {other}"),
    }
}

/// Ground-branch fidelity of the NOON sequence; the optimizer's objective.
pub fn noon_ground_fidelity(tau: f64, params: &Params) -> f64 {
    run_noon_branch(tau, params, AtomLevel::Ground).0
}

/// Runs both detection branches of the NOON sequence.
pub fn noon_report(tau: f64, chi: f64, delta: f64) -> Result<NoonReport, Error> {
    let params = Params::new(chi, delta, Params::default().cutoff)?;
    let (fidelity_ground, p_ground) = run_noon_branch(tau, &params, AtomLevel::Ground);
    let (fidelity_excited, p_excited) = run_noon_branch(tau, &params, AtomLevel::Excited);
    Ok(NoonReport {
        tau,
        chi,
        delta,
        fidelity_ground,
        p_ground,
        fidelity_excited,
        p_excited,
    })
}

/// Ground-branch fidelity and detection probability over a uniform grid of
/// `steps` Stark-shift values spanning `[0, chi_max]`, at fixed detuning.
pub fn chi_sweep(tau: f64, chi_max: f64, steps: usize, delta: f64) -> Result<Vec<SweepRow>, Error> {
    assert!(steps >= 2, "need at least two grid points");
    // Validate the parameter envelope once up front.
    Params::new(chi_max, delta, Params::default().cutoff)?;
    let grid: Vec<f64> = (0..steps)
        .map(|k| chi_max * k as f64 / (steps - 1) as f64)
        .collect();
    Ok(par::map(&grid, |&chi| {
        let params = Params::new(chi, delta, Params::default().cutoff)
            .expect("validated envelope");
        let (fidelity, p_ground) = run_noon_branch(tau, &params, AtomLevel::Ground);
        SweepRow {
            chi,
            delta,
            fidelity,
            p_ground,
        }
    }))
}

/// Searches `[lo, hi]` for the interaction time maximizing the ground-branch
/// NOON fidelity at exact resonance: a coarse grid of at least 200 points,
/// then golden-section refinement to within `tol`.
pub fn find_optimal_tau(lo: f64, hi: f64, tol: f64) -> Result<(f64, f64), Error> {
    if !(lo.is_finite() && hi.is_finite() && lo > 0.0 && lo < hi && tol > 0.0) {
        return Err(Error::InvalidInterval { lo, hi });
    }
    let params = Params::default();
    let objective = |tau: f64| noon_ground_fidelity(tau, &params);
    Ok(search::grid_then_golden_max(objective, lo, hi, tol, 256))
}
