//! Multipair amplify-and-forward massive-MIMO relaying with one-bit ADCs and
//! DACs: channel estimation, achievable rates, power scaling laws and power
//! allocation.

#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod channel;
pub mod closed_form;
pub mod error;
pub mod estimation;
pub mod experiments;
pub mod numerics;
pub mod power_alloc;
pub mod quantizer;
pub mod relay_mc;
pub mod report;

pub use error::{Error, Result};
