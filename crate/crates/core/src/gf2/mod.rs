//! GF(2) vectors, sparse matrices and the compound LDGM/LDPC codes built on them.

mod bits;
mod compound;
mod degree;
mod sparse;

pub use bits::BitSequence;
pub use compound::{
    build_code_pair, build_compound_code, random_codeword, resolve_full_syndrome, syndrome, CodePair, CodeParameters,
    CompoundCode,
};
pub use degree::{load_degree_distribution, DegreeDistribution};
pub use sparse::{matvec_gf2, SparseBitMatrix};
