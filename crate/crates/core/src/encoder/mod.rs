//! Per-link encoders: BiP quantization, syndrome formation and rate allocation.

mod bip;
mod rates;

pub use bip::{bip_quantize, encode_link, BipParams, LinkEncoding};
pub use rates::{allocate_rates, default_check_degree, virtual_crossover, RateSplit};
