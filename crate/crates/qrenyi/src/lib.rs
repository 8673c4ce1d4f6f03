//! Numerical laboratory for random unitary channels and their minimum output
//! p-Rényi entropy.
//!
//! The crate builds mixed-unitary channels E(ρ) = Σᵢ wᵢ Uᵢ†ρUᵢ from Haar
//! samples, estimates min_{|ψ⟩} H_p(E(|ψ⟩⟨ψ|)) by multistart projected
//! gradient descent on the unit sphere, evaluates the closed-form additivity
//! bound for the conjugate pair E ⊗ E̅ together with the critical exponent
//! p₀ ≈ 0.2847, and runs Monte Carlo experiments for the eigenvalue
//! concentration of conjugate-channel outputs.
//!
//! All entropies are in nats. Randomness is always drawn through an explicit
//! [`RngStream`], so every result is a pure function of its inputs and seed.

pub mod bounds;
pub mod channels;
pub mod error;
pub mod minimize;
pub mod montecarlo;
pub mod quantum;
pub mod tol;

pub use error::{Error, Result};
pub use quantum::{
    eigenvalues, haar_unitary, maximally_entangled, random_pure_state, renyi_entropy,
    sample_weights, von_neumann_entropy, DensityMatrix, PureState, RenyiOrder, RngStream,
    Spectrum, WeightVector,
};

pub use channels::{sample_channel, tensor_apply, ProductChannel, RandomUnitaryChannel};
pub use minimize::{
    brute_force_min, minimize_output_entropy, minimize_product_entropy, output_entropy,
    EntropyEstimate, MinimizationConfig,
};
