//! Fusion center: syndrome decoding, joint decoding of both links and the
//! soft estimator.

mod estimate;
mod jsp;
mod sp;

pub use estimate::{
    empirical_distortion, empirical_distortion_by_type, log_loss, posterior_table, soft_reconstruct, PosteriorTable,
    SoftSequence, PROB_FLOOR,
};
pub use jsp::{jsp_decode, JspOutput, LinkEstimate, LinkInput, VirtualChannel};
pub use sp::{side_info_llr, sp_decode, SpOutput, SpParams, DEFAULT_LLR_CLIP};
