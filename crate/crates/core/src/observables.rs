//! Physical quantities read off a [`JointState`]: atomic inversion, photon
//! number distributions, and fidelity against a NOON target.

use crate::dynamics::evolve_cavity;
use crate::fockspace::{AtomLevel, CavityLabel, JointState, Params};
use crate::par;
use num_complex::Complex64;

/// Atomic inversion `W = P_e - P_g`, in [-1, 1].
pub fn atomic_inversion(s: &JointState) -> f64 {
    s.atom_probability(AtomLevel::Excited) - s.atom_probability(AtomLevel::Ground)
}

/// Atomic inversion sampled on a uniform time grid.
#[derive(Debug, Clone, PartialEq)]
pub struct InversionSeries {
    pub taus: Vec<f64>,
    pub w: Vec<f64>,
}

/// Evolves `|atom0, n0>` of the selected cavity (the other mode empty) and
/// samples `W` on `steps` points spanning `[0, tau_max]` inclusive.
///
/// Grid points are independent - the propagator is a one-parameter group, so
/// each sample evolves the initial state directly to its time.
pub fn inversion_trace(
    atom0: AtomLevel,
    n0: usize,
    cavity: CavityLabel,
    p: &Params,
    tau_max: f64,
    steps: usize,
) -> InversionSeries {
    assert!(steps >= 2, "need at least two grid points");
    assert!(tau_max > 0.0, "tau_max must be positive");
    let (n_a, n_b) = match cavity {
        CavityLabel::A => (n0, 0),
        CavityLabel::B => (0, n0),
    };
    let initial = JointState::basis(atom0, n_a, n_b, p.cutoff)
        .expect("initial occupation exceeds the cutoff");
    let taus: Vec<f64> = (0..steps)
        .map(|k| tau_max * k as f64 / (steps - 1) as f64)
        .collect();
    let w = par::map(&taus, |&tau| {
        let evolved = evolve_cavity(&initial, cavity, tau, p)
            .expect("initial state cannot leak at the cutoff");
        atomic_inversion(&evolved)
    });
    InversionSeries { taus, w }
}

/// Marginal photon-number distribution of one mode.
pub fn photon_distribution(s: &JointState, cavity: CavityLabel) -> Vec<f64> {
    let d = s.dim();
    let mut probs = vec![0.0; d];
    for ((_, na, nb), a) in s.amps.indexed_iter() {
        let n = match cavity {
            CavityLabel::A => na,
            CavityLabel::B => nb,
        };
        probs[n] += a.norm_sqr();
    }
    probs
}

/// Sign between the two branches of a NOON target.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RelativeSign {
    Plus,
    Minus,
}

impl RelativeSign {
    pub fn factor(self) -> f64 {
        match self {
            RelativeSign::Plus => 1.0,
            RelativeSign::Minus => -1.0,
        }
    }

    pub fn flipped(self) -> Self {
        match self {
            RelativeSign::Plus => RelativeSign::Minus,
            RelativeSign::Minus => RelativeSign::Plus,
        }
    }
}

/// The two-mode target `(|N,0> + sign |0,N>) / sqrt(2)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct NoonTarget {
    pub n_photons: usize,
    pub relative_sign: RelativeSign,
}

impl NoonTarget {
    pub fn new(n_photons: usize, relative_sign: RelativeSign) -> Self {
        assert!(n_photons >= 1, "a NOON target needs at least one photon");
        Self {
            n_photons,
            relative_sign,
        }
    }

    /// The target embedded as a joint state with the atom parked in `atom`.
    pub fn embed(&self, atom: AtomLevel, cutoff: usize) -> JointState {
        assert!(self.n_photons <= cutoff, "target exceeds the cutoff");
        let d = cutoff + 1;
        let mut amps = ndarray::Array3::zeros((2, d, d));
        let w = std::f64::consts::FRAC_1_SQRT_2;
        amps[(atom.index(), self.n_photons, 0)] = Complex64::new(w, 0.0);
        amps[(atom.index(), 0, self.n_photons)] =
            Complex64::new(self.relative_sign.factor() * w, 0.0);
        JointState::from_amplitudes(amps).expect("target state is normalizable")
    }
}

/// Fidelity `|<NOON|psi>|^2` of a field state whose atom has already been
/// measured out.
///
/// Computed per atom block and summed, which for a post-measurement state
/// (a single occupied block) reduces to the plain squared overlap and is
/// insensitive to any global phase.
pub fn noon_fidelity(field_state: &JointState, target: &NoonTarget) -> f64 {
    let n = target.n_photons;
    assert!(
        n <= field_state.cutoff(),
        "target photon number exceeds the state cutoff"
    );
    let w = std::f64::consts::FRAC_1_SQRT_2;
    let sign = target.relative_sign.factor();
    let mut fidelity = 0.0;
    for atom in [AtomLevel::Excited, AtomLevel::Ground] {
        let overlap = w * field_state.amplitude(atom, n, 0)
            + sign * w * field_state.amplitude(atom, 0, n);
        fidelity += overlap.norm_sqr();
    }
    fidelity
}
