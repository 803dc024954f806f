//! Analytic performance models for checked circuits.

pub mod bounds;
pub mod extended;
pub mod markov;
pub mod readout;
pub mod unfold;

pub use bounds::{depolarizing_upper_bound, payload_bounds, payload_bounds_ordered, summarize_payload, BoundOrder, ChannelSummary, SummaryOptions};
pub use markov::{asymptotic_error, asymptotic_postselect_factor, check_rates, cpc_curve, cpc_curve_with, markov_step, CheckRates, CpcState, CurvePoint};
pub use readout::{majority_curve, readout_asymptote, readout_curve, ReadoutParams, ReadoutPoint};
pub use unfold::{kkt_residual, project_simplex, unfold_readout};
pub use extended::{extended_model, nesting_order, CheckOutcome, DataErrorRule, ExtendedModel, ExtendedOptions, ExtendedState, PayloadError, SegmentState};
