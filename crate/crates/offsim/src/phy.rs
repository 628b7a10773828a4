//! Theoretical link bitrate from physical-layer parameters.
//!
//! The peak rate is the plain product of allocated resource blocks,
//! subcarriers per block, bits per modulation symbol, modulation symbols per
//! subcarrier per second, and the code rate. The time normalization lives
//! entirely in `symbols_per_second` (e.g. 14 symbols/slot times the slot
//! rate of the chosen numerology), so the formula itself carries no hidden
//! unit assumptions.
//!
//! Effective transport-level rates sit well below this peak; the calculator
//! therefore only warns when a configured link rate *exceeds* it.

use thiserror::Error;

use crate::profiles::NetworkProfile;
use crate::scalar::{from_f64, Scalar};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum PhyError {
    #[error("code rate must lie in (0, 1]")]
    CodeRateOutOfRange,
}

/// Physical-layer parameters of one link direction.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhyConfig<T> {
    pub resource_blocks: u64,
    pub subcarriers_per_rb: u64,
    pub bits_per_symbol: u64,
    /// Modulation symbols per subcarrier per second.
    pub symbols_per_second: u64,
    pub code_rate: T,
}

impl<T: Scalar> PhyConfig<T> {
    pub fn validate(&self) -> Result<(), PhyError> {
        if !(self.code_rate > T::zero()) || self.code_rate > T::one() {
            return Err(PhyError::CodeRateOutOfRange);
        }
        Ok(())
    }
}

/// Peak link bitrate in bit/s.
pub fn link_bitrate<T: Scalar>(cfg: &PhyConfig<T>) -> T {
    from_f64::<T>(cfg.resource_blocks as f64)
        * from_f64(cfg.subcarriers_per_rb as f64)
        * from_f64(cfg.bits_per_symbol as f64)
        * from_f64(cfg.symbols_per_second as f64)
        * cfg.code_rate
}

/// Warnings for configured bitrates that exceed the PHY-derived peak.
pub fn rate_warnings<T: Scalar>(peak_bps: T, network: &NetworkProfile<T>) -> Vec<String> {
    let mut warnings = Vec::new();
    let peak_mbps = peak_bps / from_f64(1e6);
    if network.uplink_bps() > peak_bps {
        warnings.push(format!(
            "configured uplink rate {} Mbps exceeds the theoretical peak {} Mbps",
            network.uplink_mbps, peak_mbps
        ));
    }
    if network.downlink_bps() > peak_bps {
        warnings.push(format!(
            "configured downlink rate {} Mbps exceeds the theoretical peak {} Mbps",
            network.downlink_mbps, peak_mbps
        ));
    }
    warnings
}
