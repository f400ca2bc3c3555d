//! Gevrey-type regularity for the sequences `M_p = p^{τ p^σ}`: sequence
//! audits, multi-index decompositions, Faà di Bruno evaluation, regularity
//! fitting, numerical wave-front tests and elliptic parametrices.

pub mod error;
pub mod faadibruno;
pub mod jets;
pub mod multiindex;
pub mod numerics;
pub mod parametrix;
pub mod regularity;
pub mod sequences;
pub mod wavefront;

pub use error::{GevreyError, Result};
pub use multiindex::{Decomposition, MultiIndex};
pub use numerics::{BigNat, BigRat, LogMagnitude};
pub use parametrix::{DiffOperator, NeumannSums};
pub use sequences::{DefiningSequence, SequenceAuditReport};
pub use wavefront::{GridField, WavefrontVerdict};
