//! Rate analysis: empirical mutual information, the uniform-offset jitter
//! curve, downtime Markov chains and the bin-count sweep.
//!
//! All logarithms are base 2 and all rates are in bits.

mod histogram;
mod markov;
mod rate;
mod sweep;

pub use histogram::{
    binary_entropy, entropy_bits, joint_histogram, mutual_information, mutual_information_bias,
    mutual_information_with_stderr, JointHistogram,
};
pub use markov::{
    build_downtime_chain, downtime_entropy_ratio, entropy_rate, stationary_distribution,
    FrameState, MarkovChain, DENSE_SOLVE_LIMIT, MAX_CHAIN_BINS, MAX_DOWNTIME_BINS,
};
pub use rate::{analytic_rate_uniform_jitter, UniformOffsetChannel};
pub use sweep::{optimize_bins, select_best, Metric, SweepModel, SweepRow, SweepTable};
