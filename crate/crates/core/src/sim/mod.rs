//! Deterministic event-level simulator of the aggregate and update kernels.

mod aggregate;
mod iteration;
mod update;

pub use aggregate::simulate_aggregate;
pub use iteration::{
    partition_across_dies, simulate_training_iteration, IterationTrace, LayerDieTrace,
};
pub use update::simulate_update;

use crate::error::{Error, Result};
use crate::perf::PlatformSpec;

/// Hardware shape of one die's kernels.
#[derive(Debug, Clone, PartialEq)]
pub struct AcceleratorConfig {
    /// Scatter PE count, equal to the gather PE count. Power of two.
    pub scatter_gather_pes: usize,
    /// Parallel MACs in the update kernel. Square of a power of two.
    pub macs: usize,
    /// Feature elements a PE consumes per cycle.
    pub lanes_per_pe: usize,
    /// RAW hazard window on the gather accumulate path, cycles.
    pub pipeline_depth: usize,
    pub dies: usize,
    pub freq_hz: f64,
    /// Fixed pipeline fill/drain cost per kernel launch, reported
    /// separately in the trace.
    pub fill_drain_cycles: u64,
    /// On-chip buffer for destination rows during aggregation.
    pub dest_buffer_bytes: usize,
    /// On-chip buffer for the update kernel's weight matrix.
    pub weight_buffer_bytes: usize,
    /// Source-vector register reuse across same-source edges. Disabling
    /// it reloads the source feature for every edge.
    pub reuse_enabled: bool,
}

impl AcceleratorConfig {
    pub fn new(scatter_gather_pes: usize, macs: usize) -> Result<Self> {
        let cfg = Self {
            scatter_gather_pes,
            macs,
            lanes_per_pe: 16,
            pipeline_depth: 8,
            dies: 1,
            freq_hz: 300.0e6,
            fill_drain_cycles: 64,
            dest_buffer_bytes: 14 << 20,
            weight_buffer_bytes: 4 << 20,
            reuse_enabled: true,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    /// Sizes the on-chip buffers from a platform's per-die BRAM/URAM
    /// totals and adopts its die count and frequency.
    pub fn for_platform(
        scatter_gather_pes: usize,
        macs: usize,
        platform: &PlatformSpec,
    ) -> Result<Self> {
        let mut cfg = Self::new(scatter_gather_pes, macs)?;
        cfg.dies = platform.dies;
        cfg.freq_hz = platform.freq_hz;
        let on_chip = platform.on_chip_bytes_per_die();
        cfg.dest_buffer_bytes = on_chip - on_chip / 4;
        cfg.weight_buffer_bytes = on_chip / 4;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if !self.scatter_gather_pes.is_power_of_two() {
            return Err(Error::InvalidConfig(format!(
                "scatter/gather PE count {} must be a power of two",
                self.scatter_gather_pes
            )));
        }
        if !is_square_of_power_of_two(self.macs) {
            return Err(Error::InvalidConfig(format!(
                "MAC count {} must be a square of a power of two",
                self.macs
            )));
        }
        if self.lanes_per_pe == 0 {
            return Err(Error::InvalidConfig("lanes_per_pe must be >= 1".into()));
        }
        if self.dies == 0 {
            return Err(Error::InvalidConfig("dies must be >= 1".into()));
        }
        if !self.freq_hz.is_finite() || self.freq_hz <= 0.0 {
            return Err(Error::InvalidConfig("freq must be positive".into()));
        }
        Ok(())
    }
}

/// True for m = (2^k)^2, i.e. 1, 4, 16, 64, 256, ...
pub fn is_square_of_power_of_two(m: usize) -> bool {
    m.is_power_of_two() && m.trailing_zeros().is_multiple_of(2)
}

/// Counters produced by one simulated kernel run.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct SimTrace {
    /// Total cycles including fill/drain.
    pub cycles: u64,
    /// The fixed fill/drain share of `cycles`.
    pub fill_drain_cycles: u64,
    /// Source feature vectors fetched from external memory.
    pub external_feature_loads: u64,
    /// Backward jumps in the external read streams (a monotone
    /// nondecreasing row sequence counts as sequential).
    pub random_accesses: u64,
    /// Cycles spent stalled on read-after-write hazards.
    pub raw_stalls: u64,
    /// Extra cycles from several same-cycle updates landing on one
    /// gather PE.
    pub routing_conflict_cycles: u64,
    /// Bytes read from external memory.
    pub bytes_loaded: u64,
}

impl SimTrace {
    /// Combines kernels that run one after the other.
    pub fn sequential(self, other: SimTrace) -> SimTrace {
        SimTrace {
            cycles: self.cycles + other.cycles,
            fill_drain_cycles: self.fill_drain_cycles + other.fill_drain_cycles,
            external_feature_loads: self.external_feature_loads + other.external_feature_loads,
            random_accesses: self.random_accesses + other.random_accesses,
            raw_stalls: self.raw_stalls + other.raw_stalls,
            routing_conflict_cycles: self.routing_conflict_cycles + other.routing_conflict_cycles,
            bytes_loaded: self.bytes_loaded + other.bytes_loaded,
        }
    }

    /// Combines kernels that run in parallel: cycles take the max, work
    /// counters add up.
    pub fn parallel(self, other: SimTrace) -> SimTrace {
        SimTrace {
            cycles: self.cycles.max(other.cycles),
            fill_drain_cycles: self.fill_drain_cycles.max(other.fill_drain_cycles),
            external_feature_loads: self.external_feature_loads + other.external_feature_loads,
            random_accesses: self.random_accesses + other.random_accesses,
            raw_stalls: self.raw_stalls + other.raw_stalls,
            routing_conflict_cycles: self.routing_conflict_cycles + other.routing_conflict_cycles,
            bytes_loaded: self.bytes_loaded + other.bytes_loaded,
        }
    }

    /// One stable-ordered record line for trace dumps.
    pub fn record(&self) -> String {
        format!(
            "cycles={} fill_drain={} loads={} random={} raw_stalls={} conflicts={} bytes={}",
            self.cycles,
            self.fill_drain_cycles,
            self.external_feature_loads,
            self.random_accesses,
            self.raw_stalls,
            self.routing_conflict_cycles,
            self.bytes_loaded
        )
    }
}
