//! Identifiability toolkit for two-layer networks
//! `f(x) = Σ s_k σ(<a_k, x> + b_k) + c` with ReLU, sigmoid or tanh activation.
//!
//! * [`net`]: representation, evaluation, canonical hyperplanes, grouping.
//! * [`numerics`]: rank, affine fits, least squares.
//! * [`relu_structure`]: admissibility, reducibility with constructive
//!   reduction, equivalence certificates.
//! * [`relu_sampling`]: feasible lines, sample plans, exact reconstruction.
//! * [`relu_adversary`]: pairs of networks that agree on a given point set.
//! * [`analytic`]: sigmoid/tanh canonical forms, full spark frames, sample
//!   plans and exponential-sum expansions.
//! * [`cli`]: the `shallow-ident` command line.

pub mod analytic;
pub mod cli;
pub mod error;
pub mod net;
pub mod numerics;
pub mod relu_adversary;
pub mod relu_sampling;
pub mod relu_structure;

pub use error::{Error, Result};
pub use net::{group, Activation, GroupedReLU, Hyperplane, Neuron, PairedTerm, ShallowNet, SingleTerm};
pub use numerics::ToleranceConfig;
