// Reference values keep all published digits.
#![allow(clippy::excessive_precision)]

pub mod channel;
pub mod depth;
pub mod error;
pub mod geometry;
pub mod linalg;
pub mod power;
pub mod secrecy;
pub mod special_fn;
pub mod stats;

pub use channel::{build_channel, ChannelModel, ChannelVector};
pub use depth::{depth_closed, depth_scan, DepthInterval, DepthReport};
pub use error::{Error, Result};
pub use geometry::{ArrayGeometry, NodeGeometry};
pub use linalg::OracleMethod;
pub use power::{min_power_closed, min_power_eigen_oracle, PowerOutcome, PowerStatus};
pub use secrecy::{capacity_eigen_oracle, secrecy_capacity_closed, LinkBudget, SecrecyOutcome};
pub use special_fn::{chebyshev_gauss_nodes, erf_complex, QuadratureRule};
pub use stats::{closed_form_stats, rho_direct, FormVariant, LinkStats, Provenance};
