//! Multi-level Construction C constellations `C_1 + 2C_2 + ... + 2^{L-1}C_L + 2^L Zⁿ`
//! built from binary codes.
//!
//! Every infinite constellation is represented exactly by its residues
//! modulo `2^L`. On top of that the crate decides lattice-ness four
//! independent ways, computes exact squared-distance spectra, certifies or
//! refutes geometric uniformity, and quantizes onto the point set.
//!
//! Integer lattice algebra is generic over the entry type (`i64`, `i128`,
//! [`num_bigint::BigInt`]); quantization is generic over `f32`/`f64`. The
//! aliases below fix the common choices.
//!
//! ```
//! use ccc_core::{eds_check, presets, theorem1_report, BigInt, BinaryCode, BitWord, CodeChain};
//!
//! let c1 = BinaryCode::span(2, &[BitWord::from_bits(&[1, 1])?])?;
//! let chain = CodeChain::new(vec![c1, BinaryCode::zero(2)?])?;
//! assert!(!theorem1_report::<i64>(&chain)?.is_lattice);
//!
//! let d6 = presets::dplus(6)?;
//! assert_eq!(theorem1_report::<BigInt>(&d6)?.verdicts(), [true; 4]);
//! assert!(eds_check(&d6, 64)?.holds);
//! # Ok::<(), ccc_core::Error>(())
//! ```

pub mod constellation;
pub mod error;
pub mod f2;
pub mod lattice;
pub mod presets;
pub mod quantizer;
pub mod spectrum;
pub mod uniformity;

pub use constellation::{
    decompose, points_in_box, residues, CodeChain, Decomposition, Point, ResidueSet,
};
pub use error::{Error, Result};
pub use f2::{is_nested, schur, schur_closed_chain, xor_add, BinaryCode, BitWord, SchurWitness};
pub use lattice::{
    construction_d, hnf, is_lattice_direct, select_nested_basis, smallest_lattice, theorem1_report,
    theorem1_unchecked, IntegerLattice, LatticeScalar, NestedBasis, Theorem1Report,
};
pub use num_bigint::BigInt;
pub use quantizer::{dplus_chain, nearest, nsm_estimate, Covolume, NsmEstimate, Quantizer};
pub use spectrum::{
    cw_count, cw_equidistant, eds_check, kissing_stats, spectrum_at, EdsResult, SpectrumTable,
};
pub use uniformity::{
    euclidean_partner_bruteforce, euclidean_partners, gu_check_two_level, gu_subgroup_search,
    partner_bruteforce, partner_lemma1, reflection_for, GuVerdict, PartnerTrace, ReflectionMap,
};

/// HNF lattice over machine integers.
pub type Lattice = IntegerLattice<i64>;
/// HNF lattice over 128-bit integers.
pub type WideLattice = IntegerLattice<i128>;
/// HNF lattice over arbitrary-precision integers.
pub type BigLattice = IntegerLattice<num_bigint::BigInt>;

/// Double-precision NSM estimate.
pub type NsmEstimate64 = NsmEstimate<f64>;
/// Single-precision NSM estimate.
pub type NsmEstimate32 = NsmEstimate<f32>;
