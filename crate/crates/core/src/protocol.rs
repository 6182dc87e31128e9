//! Ordered execution of preparation, interaction, rotation, and measurement
//! steps, plus the two built-in programs: the photon-pair deposit that takes
//! both cavities from vacuum to `|2,2>`, and the NOON entangling sequence.

use ndarray::Array3;
use num_complex::Complex64;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::dynamics;
use crate::fockspace::{AtomLevel, CavityLabel, Error as StateError, JointState, Params};

/// How the atom is prepared before entering the cavities.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AtomPrep {
    Level(AtomLevel),
    Superposition,
}

/// How an atomic measurement resolves its outcome.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MeasureMode {
    /// Condition on the named outcome and record its Born probability.
    PostSelect,
    /// Draw the outcome from the Born probabilities with a seeded generator;
    /// the level named in the step is ignored.
    Sample { seed: u64 },
}

/// One protocol instruction.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Step {
    PrepareAtom(AtomPrep),
    PrepareCavity { cavity: CavityLabel, n: usize },
    Rotate { theta: f64 },
    Interact { cavity: CavityLabel, tau: f64 },
    MeasureAtom { outcome: AtomLevel, mode: MeasureMode },
}

/// A parameter set plus an ordered step list.
///
/// Well-formedness: every preparation precedes the first `Interact`, at most
/// one `PrepareAtom` appears, interaction times are non-negative, prepared
/// occupations respect the cutoff, and measurements only follow at least one
/// interaction.
#[derive(Debug, Clone, PartialEq)]
pub struct Program {
    pub params: Params,
    pub steps: Vec<Step>,
}

/// Log entry for one executed step.
#[derive(Debug, Clone, PartialEq)]
pub struct Event {
    pub step: usize,
    pub description: String,
    /// Born probability for measurement steps.
    pub probability: Option<f64>,
}

/// Outcome of a full program run.
#[derive(Debug, Clone, PartialEq)]
pub struct RunResult {
    pub final_state: JointState,
    pub events: Vec<Event>,
    /// Product of all measurement probabilities along the realized path.
    pub joint_postselect_probability: f64,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum RunError {
    #[error("invalid program at step {step}: {reason}")]
    InvalidProgram { step: usize, reason: String },
    #[error("run aborted at step {step}: {source}")]
    Aborted { step: usize, source: StateError },
}

impl Program {
    /// Checks the well-formedness rules, returning the first offending step.
    pub fn validate(&self) -> Result<(), RunError> {
        let invalid = |step: usize, reason: &str| {
            Err(RunError::InvalidProgram {
                step,
                reason: reason.to_string(),
            })
        };
        let mut seen_interact = false;
        let mut seen_atom_prep = false;
        for (i, step) in self.steps.iter().enumerate() {
            match *step {
                Step::PrepareAtom(_) => {
                    if seen_interact {
                        return invalid(i, "atom preparation after an interaction");
                    }
                    if seen_atom_prep {
                        return invalid(i, "more than one atom preparation");
                    }
                    seen_atom_prep = true;
                }
                Step::PrepareCavity { n, .. } => {
                    if seen_interact {
                        return invalid(i, "cavity preparation after an interaction");
                    }
                    if n > self.params.cutoff {
                        return invalid(i, "prepared occupation exceeds the cutoff");
                    }
                }
                Step::Interact { tau, .. } => {
                    if !(tau.is_finite() && tau >= 0.0) {
                        return invalid(i, "interaction time must be finite and non-negative");
                    }
                    seen_interact = true;
                }
                Step::Rotate { theta } => {
                    if !theta.is_finite() {
                        return invalid(i, "rotation angle must be finite");
                    }
                }
                Step::MeasureAtom { .. } => {
                    if !seen_interact {
                        return invalid(i, "measurement before any interaction");
                    }
                }
            }
        }
        Ok(())
    }
}

/// Runs a program from the default `|g, 0, 0>` start.
///
/// Post-selected measurements collapse onto the named outcome and abort the
/// run if its probability falls below the collapse threshold; sampled
/// measurements draw the outcome from a generator seeded per step, so equal
/// programs and seeds give bit-identical results.
pub fn run(prog: &Program) -> Result<RunResult, RunError> {
    prog.validate()?;
    let p = &prog.params;

    // The preparation prefix (everything before the first interaction) acts
    // on a product state; track the three factors symbolically and
    // materialize at the first interaction.
    let mut atom_vec = [Complex64::new(0.0, 0.0), Complex64::new(1.0, 0.0)];
    let mut occupations = [0usize, 0usize];
    let mut state: Option<JointState> = None;
    let mut events = Vec::with_capacity(prog.steps.len());
    let mut joint_probability = 1.0;

    for (i, step) in prog.steps.iter().enumerate() {
        let fail = |source: StateError| RunError::Aborted { step: i, source };
        match *step {
            Step::PrepareAtom(prep) => {
                atom_vec = match prep {
                    AtomPrep::Level(AtomLevel::Excited) => {
                        [Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0)]
                    }
                    AtomPrep::Level(AtomLevel::Ground) => {
                        [Complex64::new(0.0, 0.0), Complex64::new(1.0, 0.0)]
                    }
                    AtomPrep::Superposition => {
                        let w = Complex64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
                        [w, w]
                    }
                };
                let what = match prep {
                    AtomPrep::Level(l) => l.to_string(),
                    AtomPrep::Superposition => "superposition".to_string(),
                };
                events.push(Event {
                    step: i,
                    description: format!("prepare atom {what}"),
                    probability: None,
                });
            }
            Step::PrepareCavity { cavity, n } => {
                occupations[match cavity {
                    CavityLabel::A => 0,
                    CavityLabel::B => 1,
                }] = n;
                events.push(Event {
                    step: i,
                    description: format!("prepare cavity {cavity} fock {n}"),
                    probability: None,
                });
            }
            Step::Rotate { theta } => {
                match state.as_mut() {
                    Some(s) => *s = dynamics::rotate_atom(s, theta),
                    None => {
                        // Still in the preparation prefix: rotate the atom
                        // factor directly.
                        let (sin, cos) = (0.5 * theta).sin_cos();
                        let [e, g] = atom_vec;
                        atom_vec = [cos * e - sin * g, sin * e + cos * g];
                    }
                }
                events.push(Event {
                    step: i,
                    description: format!("rotate {theta}"),
                    probability: None,
                });
            }
            Step::Interact { cavity, tau } => {
                let current = state.get_or_insert_with(|| {
                    materialize(&atom_vec, occupations, p.cutoff)
                });
                *current = dynamics::evolve_cavity(current, cavity, tau, p).map_err(fail)?;
                events.push(Event {
                    step: i,
                    description: format!("interact {cavity} tau={tau}"),
                    probability: None,
                });
            }
            Step::MeasureAtom { outcome, mode } => {
                let current = state.as_mut().expect("validated: interaction precedes");
                let (realized, label) = match mode {
                    MeasureMode::PostSelect => (outcome, "post-select".to_string()),
                    MeasureMode::Sample { seed } => {
                        let mut rng = ChaCha8Rng::seed_from_u64(seed);
                        let p_excited = current.atom_probability(AtomLevel::Excited);
                        let drawn = if rng.random::<f64>() < p_excited {
                            AtomLevel::Excited
                        } else {
                            AtomLevel::Ground
                        };
                        (drawn, format!("sampled seed={seed}"))
                    }
                };
                let (probability, collapsed) = current.project_atom(realized).map_err(fail)?;
                *current = collapsed;
                joint_probability *= probability;
                events.push(Event {
                    step: i,
                    description: format!("measure atom {realized} ({label})"),
                    probability: Some(probability),
                });
            }
        }
    }

    let final_state =
        state.unwrap_or_else(|| materialize(&atom_vec, occupations, p.cutoff));
    Ok(RunResult {
        final_state,
        events,
        joint_postselect_probability: joint_probability,
    })
}

fn materialize(atom_vec: &[Complex64; 2], occupations: [usize; 2], cutoff: usize) -> JointState {
    let d = cutoff + 1;
    let mut amps = Array3::zeros((2, d, d));
    amps[(0, occupations[0], occupations[1])] = atom_vec[0];
    amps[(1, occupations[0], occupations[1])] = atom_vec[1];
    JointState::from_amplitudes(amps).expect("atom factor has unit norm")
}

/// Built-in pair-deposit sequence: an excited atom feeds two photons into
/// each vacuum cavity in turn, conditioned on leaving in the ground state,
/// with a half-turn re-excitation in between. At resonance each
/// post-selection succeeds with probability `sin^2(sqrt(2) tau)` and the
/// conditional field is exactly `|2,2>`.
pub fn twotwo_program(tau: f64) -> Program {
    assert!(tau >= 0.0 && tau.is_finite(), "tau must be non-negative");
    Program {
        params: Params::default(),
        steps: vec![
            Step::PrepareAtom(AtomPrep::Level(AtomLevel::Excited)),
            Step::PrepareCavity {
                cavity: CavityLabel::A,
                n: 0,
            },
            Step::PrepareCavity {
                cavity: CavityLabel::B,
                n: 0,
            },
            Step::Interact {
                cavity: CavityLabel::A,
                tau,
            },
            Step::MeasureAtom {
                outcome: AtomLevel::Ground,
                mode: MeasureMode::PostSelect,
            },
            Step::Rotate {
                theta: std::f64::consts::PI,
            },
            Step::Interact {
                cavity: CavityLabel::B,
                tau,
            },
            Step::MeasureAtom {
                outcome: AtomLevel::Ground,
                mode: MeasureMode::PostSelect,
            },
        ],
    }
}

/// Built-in NOON sequence: both cavities hold `|2>`, the atom enters in an
/// equal superposition, crosses A then B, is rotated by a quarter turn and
/// detected. Ground detection leaves the fields near
/// `(|4,0> + |0,4>) / sqrt(2)`; excited detection flips the relative sign.
pub fn noon_program(tau: f64) -> Program {
    assert!(tau >= 0.0 && tau.is_finite(), "tau must be non-negative");
    Program {
        params: Params::default(),
        steps: vec![
            Step::PrepareCavity {
                cavity: CavityLabel::A,
                n: 2,
            },
            Step::PrepareCavity {
                cavity: CavityLabel::B,
                n: 2,
            },
            Step::PrepareAtom(AtomPrep::Superposition),
            Step::Interact {
                cavity: CavityLabel::A,
                tau,
            },
            Step::Interact {
                cavity: CavityLabel::B,
                tau,
            },
            Step::Rotate {
                theta: std::f64::consts::FRAC_PI_2,
            },
            Step::MeasureAtom {
                outcome: AtomLevel::Ground,
                mode: MeasureMode::PostSelect,
            },
        ],
    }
}

/// `noon_program` with the final detection flipped to the named outcome.
pub fn noon_program_detecting(tau: f64, outcome: AtomLevel) -> Program {
    let mut prog = noon_program(tau);
    if let Some(Step::MeasureAtom { outcome: o, .. }) = prog.steps.last_mut() {
        *o = outcome;
    }
    prog
}
