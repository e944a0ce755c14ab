//! Cocycle descent in towers of elementary abelian p-covers of 2-complexes.
//!
//! The crate builds presentation 2-complexes and their finite abelian
//! covers, constructs wedge cocycles `c1 ^ c2` on covers, shrinks the
//! support of subspaces of cochains with a subspace form of the Plotkin
//! bound, and chains these steps into a descent pipeline that tracks the
//! relative support of a fixed number of cohomology classes down a tower.
//! Homology-growth and Cheeger-constant diagnostics sit alongside.

pub mod complex;
pub mod covers;
pub mod error;
pub mod linalg;
pub mod reduce;
pub mod tau;
pub mod tower;
pub mod wedge;

pub use complex::{
    build_presentation_complex, evaluate_on_path, h1_cocycle_basis, homology_dim_p,
    parse_presentation_file, Cochain, EdgePath, GroupPresentation, Step, TwoComplex,
};
pub use covers::{
    build_abelian_p_cover, build_cyclic_cover, c_value_table, deck_orbit_representatives,
    CoveringMap,
};
pub use error::{Error, Result};
pub use linalg::{FpMatrix, FpSubspace, FpVector, PrimeModulus};
pub use reduce::{
    best_hyperplane, reduce_to_dimension, BoundFactor, HyperplaneChoice, HyperplaneSearch,
    Reduction,
};
pub use tau::{
    cheeger_constant, cheeger_relsize_check, relative_size, CheegerMode, CheegerValue,
    RelativeSize, RelsizeMode, SkeletonGraph,
};
pub use tower::{
    run_descent_pipeline, series_tower, DescentReport, SeriesKind, SeriesSpec, TowerRecord,
    Verdict,
};
pub use wedge::{wedge_cochain, wedge_cocycle_family, WedgeFamily};
