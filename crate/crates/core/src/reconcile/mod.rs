//! One-way syndrome reconciliation.
//!
//! Alice publishes the syndrome of each bit layer of her raw key under a
//! sparse parity-check code. Bob decodes every layer with belief propagation,
//! using his own bins (through an empirical channel model) as side
//! information and conditioning each layer on the layers already decoded.

mod bp;
mod code;
mod llr;
mod multilevel;
mod tag;

pub use bp::{bp_decode_syndrome, DecoderSettings, ReconciliationResult};
pub use code::{
    code_for_rate, compute_syndrome, make_regular_ldpc, make_regular_ldpc_report, LdpcConstruction,
    LinearCode, Syndrome,
};
pub use llr::{
    channel_llrs, layer_conditional_entropies, select_rate, ChannelModel, EFFICIENCY_MARGIN,
    LLR_MAX, RATE_LADDER, SMOOTHING_ALPHA,
};
pub use multilevel::{reconcile_multilevel, LayerReport};
pub use tag::{verification_tag, TAG_BITS};
