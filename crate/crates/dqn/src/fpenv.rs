//! Flush-to-zero scope for training.
//!
//! Adam moments of units that stop receiving gradient decay geometrically
//! into the subnormal range, and subnormal arithmetic on x86 is two orders
//! of magnitude slower. Training flushes them to zero instead; results stay
//! deterministic for a given seed.

/// Sets the FTZ and DAZ bits of MXCSR while alive and restores the previous
/// value on drop. A no-op on other architectures.
pub struct FlushDenormals {
    #[cfg(all(target_arch = "x86_64", target_feature = "sse"))]
    saved: u32,
}

#[cfg(all(target_arch = "x86_64", target_feature = "sse"))]
impl FlushDenormals {
    const FTZ_DAZ: u32 = 0x8040;

    #[allow(deprecated)]
    pub fn new() -> Self {
        use std::arch::x86_64::{_mm_getcsr, _mm_setcsr};
        // SAFETY: SSE is available (checked by cfg); only the denormal
        // handling bits are changed and the old state is restored on drop.
        let saved = unsafe { _mm_getcsr() };
        unsafe { _mm_setcsr(saved | Self::FTZ_DAZ) };
        Self { saved }
    }
}

#[cfg(all(target_arch = "x86_64", target_feature = "sse"))]
impl Drop for FlushDenormals {
    #[allow(deprecated)]
    fn drop(&mut self) {
        // SAFETY: restores the value read in `new`.
        unsafe { std::arch::x86_64::_mm_setcsr(self.saved) };
    }
}

#[cfg(not(all(target_arch = "x86_64", target_feature = "sse")))]
impl FlushDenormals {
    pub fn new() -> Self {
        Self {}
    }
}

impl Default for FlushDenormals {
    fn default() -> Self {
        Self::new()
    }
}
