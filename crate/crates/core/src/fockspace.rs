//! Joint pure state of one two-level atom and two cavity modes in a
//! truncated Fock basis.
//!
//! Amplitudes are indexed `(atom level, n_a, n_b)` with the excited level
//! first, so a state prints naturally as the two-component column vector
//! `(e-block, g-block)`. The coupling constant of the two-photon interaction
//! is fixed to 1 internally; the Stark coefficient `chi` and detuning
//! `delta` are stored as ratios to it, and all times are scaled times
//! `tau = lambda * t`.

use ndarray::Array3;
use num_complex::Complex64;
use thiserror::Error;

use crate::{IMPOSSIBLE_OUTCOME_THRESHOLD, NORM_TOL};

/// Errors produced by state construction and the propagators.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("occupation {n} of cavity {cavity} exceeds the Fock cutoff {cutoff}")]
    OccupationOutOfRange {
        cavity: CavityLabel,
        n: usize,
        cutoff: usize,
    },
    #[error("cutoff mismatch: {left} vs {right}")]
    CutoffMismatch { left: usize, right: usize },
    #[error("outcome {outcome} has probability {probability:.3e}, below the collapse threshold")]
    ImpossibleOutcome {
        outcome: AtomLevel,
        probability: f64,
    },
    #[error(
        "cavity {cavity} carries probability mass {mass:.3e} within two rungs of the cutoff; \
         raise the cutoff before evolving"
    )]
    BoundaryLeakage { cavity: CavityLabel, mass: f64 },
    #[error("Fock cutoff {cutoff} is too small; the protocols need at least 6")]
    CutoffTooSmall { cutoff: usize },
    #[error("parameter {name} must be finite")]
    NonFiniteParam { name: &'static str },
    #[error("amplitude array has shape {got:?}, expected (2, d, d)")]
    BadShape { got: Vec<usize> },
    #[error("cannot normalize a state with zero norm")]
    ZeroNorm,
    #[error("search interval [{lo}, {hi}] is empty or not positive")]
    InvalidInterval { lo: f64, hi: f64 },
}

/// Physical parameters of the two-photon interaction, in units of the
/// coupling constant.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Params {
    /// Stark-shift coefficient `chi` (dimensionless ratio).
    pub chi: f64,
    /// Detuning `delta` between the atomic transition and twice the field
    /// frequency (dimensionless ratio).
    pub delta: f64,
    /// Largest photon number retained per mode.
    pub cutoff: usize,
}

impl Params {
    /// Smallest cutoff the protocols can run with: they reach `n = 4` and the
    /// propagator couples `n <-> n + 2`.
    pub const MIN_CUTOFF: usize = 6;

    pub fn new(chi: f64, delta: f64, cutoff: usize) -> Result<Self, Error> {
        if !chi.is_finite() {
            return Err(Error::NonFiniteParam { name: "chi" });
        }
        if !delta.is_finite() {
            return Err(Error::NonFiniteParam { name: "delta" });
        }
        if cutoff < Self::MIN_CUTOFF {
            return Err(Error::CutoffTooSmall { cutoff });
        }
        Ok(Self { chi, delta, cutoff })
    }

}

impl Default for Params {
    fn default() -> Self {
        Self {
            chi: 0.0,
            delta: 0.0,
            cutoff: 20,
        }
    }
}

/// The two atomic levels. `Excited` is the first basis row.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum AtomLevel {
    Excited,
    Ground,
}

impl AtomLevel {
    pub(crate) fn index(self) -> usize {
        match self {
            AtomLevel::Excited => 0,
            AtomLevel::Ground => 1,
        }
    }
}

impl std::fmt::Display for AtomLevel {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            AtomLevel::Excited => write!(f, "e"),
            AtomLevel::Ground => write!(f, "g"),
        }
    }
}

/// Which cavity an operation acts on. The atom crosses A first.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum CavityLabel {
    A,
    B,
}

impl std::fmt::Display for CavityLabel {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CavityLabel::A => write!(f, "A"),
            CavityLabel::B => write!(f, "B"),
        }
    }
}

/// Normalized pure state of the joint (atom, cavity A, cavity B) system.
///
/// Stored densely as `2 * (cutoff + 1)^2` complex amplitudes. The protocols
/// only ever populate `n <= 4`, so this is deliberately simple rather than
/// sparse.
#[derive(Debug, Clone, PartialEq)]
pub struct JointState {
    pub(crate) amps: Array3<Complex64>,
    pub(crate) cutoff: usize,
}

impl JointState {
    /// Single basis ket `|atom, n_a, n_b>`.
    pub fn basis(
        atom: AtomLevel,
        n_a: usize,
        n_b: usize,
        cutoff: usize,
    ) -> Result<Self, Error> {
        check_occupation(CavityLabel::A, n_a, cutoff)?;
        check_occupation(CavityLabel::B, n_b, cutoff)?;
        let d = cutoff + 1;
        let mut amps = Array3::zeros((2, d, d));
        amps[(atom.index(), n_a, n_b)] = Complex64::new(1.0, 0.0);
        Ok(Self { amps, cutoff })
    }

    /// `(|e> + |g>) |n_a, n_b> / sqrt(2)` - the atom in an equal
    /// superposition of its levels, the fields in number states.
    pub fn atom_superposition(n_a: usize, n_b: usize, cutoff: usize) -> Result<Self, Error> {
        check_occupation(CavityLabel::A, n_a, cutoff)?;
        check_occupation(CavityLabel::B, n_b, cutoff)?;
        let d = cutoff + 1;
        let mut amps = Array3::zeros((2, d, d));
        let w = Complex64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
        amps[(0, n_a, n_b)] = w;
        amps[(1, n_a, n_b)] = w;
        Ok(Self { amps, cutoff })
    }

    /// Builds a state from a raw `(2, d, d)` amplitude tensor, normalizing it.
    pub fn from_amplitudes(amps: Array3<Complex64>) -> Result<Self, Error> {
        let shape = amps.shape().to_vec();
        if shape.len() != 3 || shape[0] != 2 || shape[1] != shape[2] || shape[1] == 0 {
            return Err(Error::BadShape { got: shape });
        }
        if amps.iter().any(|a| !a.re.is_finite() || !a.im.is_finite()) {
            return Err(Error::NonFiniteParam { name: "amplitude" });
        }
        let cutoff = shape[1] - 1;
        let mut state = Self { amps, cutoff };
        let norm = state.norm();
        if norm <= 0.0 {
            return Err(Error::ZeroNorm);
        }
        state.scale(1.0 / norm);
        Ok(state)
    }

    pub fn cutoff(&self) -> usize {
        self.cutoff
    }

    /// Fock dimension per mode (`cutoff + 1`).
    pub fn dim(&self) -> usize {
        self.cutoff + 1
    }

    pub fn amplitude(&self, atom: AtomLevel, n_a: usize, n_b: usize) -> Complex64 {
        self.amps[(atom.index(), n_a, n_b)]
    }

    pub fn norm(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt()
    }

    pub(crate) fn scale(&mut self, factor: f64) {
        self.amps.mapv_inplace(|a| a * factor);
    }

    pub(crate) fn renormalize(&mut self) {
        let norm = self.norm();
        if norm > 0.0 {
            self.scale(1.0 / norm);
        }
    }

    /// Inner product `<self|other>`, conjugate-linear in `self`.
    pub fn inner(&self, other: &Self) -> Result<Complex64, Error> {
        if self.cutoff != other.cutoff {
            return Err(Error::CutoffMismatch {
                left: self.cutoff,
                right: other.cutoff,
            });
        }
        Ok(self
            .amps
            .iter()
            .zip(other.amps.iter())
            .map(|(a, b)| a.conj() * b)
            .sum())
    }

    /// Probability of finding the atom in `outcome`.
    pub fn atom_probability(&self, outcome: AtomLevel) -> f64 {
        self.amps
            .index_axis(ndarray::Axis(0), outcome.index())
            .iter()
            .map(|a| a.norm_sqr())
            .sum()
    }

    /// Measures the atom and collapses onto `outcome`.
    ///
    /// Returns the Born probability of the outcome together with the
    /// renormalized post-measurement state (the atom sits in `outcome`, the
    /// fields keep the surviving block). Outcomes below the collapse
    /// threshold are rejected instead of dividing by ~0.
    pub fn project_atom(&self, outcome: AtomLevel) -> Result<(f64, JointState), Error> {
        let probability = self.atom_probability(outcome);
        if probability < IMPOSSIBLE_OUTCOME_THRESHOLD {
            return Err(Error::ImpossibleOutcome {
                outcome,
                probability,
            });
        }
        let d = self.dim();
        let mut amps = Array3::zeros((2, d, d));
        let kept = self.amps.index_axis(ndarray::Axis(0), outcome.index());
        let scale = probability.sqrt().recip();
        amps.index_axis_mut(ndarray::Axis(0), outcome.index())
            .iter_mut()
            .zip(kept.iter())
            .for_each(|(dst, src)| *dst = src * scale);
        Ok((
            probability,
            JointState {
                amps,
                cutoff: self.cutoff,
            },
        ))
    }

    /// Total probability mass sitting within `margin` rungs of the cutoff,
    /// i.e. with `n_a > cutoff - margin` or `n_b > cutoff - margin`.
    pub fn boundary_leakage(&self, margin: usize) -> f64 {
        assert!(margin < self.cutoff, "margin must be below the cutoff");
        let lim = self.cutoff - margin;
        let mut mass = 0.0;
        for ((_, na, nb), a) in self.amps.indexed_iter() {
            if na > lim || nb > lim {
                mass += a.norm_sqr();
            }
        }
        mass
    }

    /// True when the norm sits within the documented tolerance of 1.
    pub fn is_normalized(&self) -> bool {
        (self.norm() - 1.0).abs() <= NORM_TOL
    }
}

fn check_occupation(cavity: CavityLabel, n: usize, cutoff: usize) -> Result<(), Error> {
    if n > cutoff {
        Err(Error::OccupationOutOfRange { cavity, n, cutoff })
    } else {
        Ok(())
    }
}
