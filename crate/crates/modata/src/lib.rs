//! Exact and numerical tools for modular data.
//!
//! The crate builds the S and T matrices of a number of related modular
//! data families — doubles of finite and cyclic/dihedral groups with
//! cocycle twists, lattice doubles, the level-2 affine so(2m+1) series,
//! and the twisted Haagerup–Izumi series together with its Galois twists —
//! then verifies the modular-data axioms exactly, computes Verlinde fusion
//! rules, enumerates modular invariants, solves the Cuntz-algebra
//! polynomial systems that realize the subfactor side numerically, and
//! reconstructs character vectors through a vector-valued modular-function
//! engine.
//!
//! Layering, lowest first:
//!
//! * [`cyclotomic`], [`numeric`] — exact cyclotomic scalars and
//!   arbitrary-precision floating complex arithmetic;
//! * [`mdata`] — the `ModularData` container, axiom verification, fusion,
//!   Galois action, exactification of numerical S matrices;
//! * [`families`] — constructors for every family, the Z₂-lamination
//!   detector and the graft combinator;
//! * [`invariants`] — commutants, modular-invariant enumeration, monomial
//!   invariants and the block map between sibling families;
//! * [`izumi`] — the polynomial solver for the Cuntz-algebra equations,
//!   tube-algebra linear systems, and numerical S/T reconstruction;
//! * [`sectors`] — even/odd sector rings and induction tables;
//! * [`vvmf`] — q-series, modular forms, and the vector-valued
//!   modular-function machinery for character vectors.

pub mod cyclotomic;
pub mod families;
pub mod invariants;
pub mod izumi;
pub mod mdata;
pub mod mdjson;
pub mod numeric;
pub mod sectors;
pub(crate) mod raw;

pub use cyclotomic::{Cyc, ScalarError};
pub use families::{DiscriminantForm, FamilyError, LaminationBlocks, Sign};
pub use invariants::{
    enumerate_invariants, hg_dihedral_map, monomial_invariants, InvariantError, MapDirection,
    ModularInvariant, MonomialInvariant,
};
pub use izumi::{
    angles_to_matrix, cross_relation_defect, default_omega_candidates, match_and_exactify,
    modulus_defect, reconstruct_double, redundant_count, refine_angles, residual_norm,
    solve_matrices, solve_noncyclic, t_power_is_identity, tube_solve, AngleVector, IzumiError,
    IzumiMatrix, MatchVerdict, RawSolution, ReconstructedDouble, RootOfUnity, SolveConfig,
    SolvedClass, TubeCandidate, TubeSolution,
};
pub use mdata::{FusionTensor, MdataError, ModularData, VerifyMode};
pub use numeric::{default_precision, BigComplex, ToF64};
pub use sectors::{
    alpha_tables, build_systems, verify_ring, verify_tables, AlphaTables, BimoduleTables,
    FusionRing, RingReport, SectorError, SectorSystems, TableReport,
};
