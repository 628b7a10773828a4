//! Token bucket used to shape socket-mode transmissions.
//!
//! The bucket starts empty and refills at the configured rate up to the
//! burst capacity, so over any window the delivered volume is bounded by
//! `rate * elapsed + burst`. The clock is supplied by the caller, which
//! keeps the arithmetic testable without real time.

#[derive(Debug, Clone)]
pub struct TokenBucket {
    rate_bps: f64,
    burst_bits: f64,
    tokens: f64,
    last_refill_s: f64,
}

impl TokenBucket {
    /// Creates an empty bucket. `rate_bps` and `burst_bits` must be positive.
    pub fn new(rate_bps: f64, burst_bits: f64) -> Self {
        assert!(rate_bps > 0.0, "shaping rate must be positive");
        assert!(burst_bits > 0.0, "burst must be positive");
        Self {
            rate_bps,
            burst_bits,
            tokens: 0.0,
            last_refill_s: 0.0,
        }
    }

    pub fn rate_bps(&self) -> f64 {
        self.rate_bps
    }

    pub fn burst_bits(&self) -> f64 {
        self.burst_bits
    }

    /// Refills to `now_s`, then tries to take `bits`. Returns 0 when the
    /// request is granted (tokens consumed), otherwise the seconds to wait
    /// before retrying. Requests larger than the burst are clamped to it.
    ///
    /// A shortfall below one part in 10^9 is granted (float rounding of the
    /// refill must not starve the caller), and positive waits are floored
    /// at one microsecond so a retry loop always advances its clock.
    pub fn request(&mut self, bits: f64, now_s: f64) -> f64 {
        const MIN_WAIT_S: f64 = 1e-6;
        let elapsed = (now_s - self.last_refill_s).max(0.0);
        self.tokens = (self.tokens + elapsed * self.rate_bps).min(self.burst_bits);
        self.last_refill_s = now_s;
        let need = bits.min(self.burst_bits);
        if self.tokens >= need - 1e-9 * need.max(1.0) {
            self.tokens = (self.tokens - need).max(0.0);
            0.0
        } else {
            ((need - self.tokens) / self.rate_bps).max(MIN_WAIT_S)
        }
    }
}
