//! Symmetry reduction by a group Σ of signed permutations.
//!
//! Σ acts on the group by automorphisms fixing S, hence on balls, on the
//! constraint index set E⁻¹E (orbits) and on ℓ₂(E) (the permutation
//! representation ϱ_E). A minimal projection system of ℚΣ, computed in
//! exact arithmetic, splits ℓ₂(E) into isotypical blocks.

mod characters;
mod exact;
mod finite;
mod orbits;
mod projections;
mod wedderburn;

pub use characters::{cycle_type, partitions, sn_character, Partition};
pub use exact::ExactElem;
pub use finite::{FiniteGroup, SymmetryKind};
pub use orbits::{action_on_basis, basis_orbits, orbit_decompose, OrbitDecomposition};
pub use projections::{
    central_projection, epsilon, epsilon_character_value, minimal_projections, minimal_projections_sn,
    minimal_projections_wreath, parse_cycles, verify_projection_system, IrrepLabel, ProjectionSystem,
};
pub use wedderburn::{
    block_diagonalize, exact_multiplicity, isotypical_basis, wedderburn_blocks, IrrepBlock,
    PermRepresentation, RankTolerance,
};
