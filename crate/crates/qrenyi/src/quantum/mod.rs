//! Complex linear-algebra substrate: states, density matrices, spectra,
//! entropies, and the random sampling primitives everything else builds on.

mod rng;
mod sampling;
mod spectrum;
mod state;

pub use rng::RngStream;
pub use sampling::{
    haar_unitary, maximally_entangled, random_pure_state, sample_weights, WeightVector,
};
pub use spectrum::{eigenvalues, renyi_entropy, von_neumann_entropy, RenyiOrder, Spectrum};
pub use state::{DensityMatrix, PureState};
