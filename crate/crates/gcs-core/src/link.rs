//! Analytic models of the host-to-GPU interconnect.
//!
//! Three transfer mechanisms are covered: zero-copy reads issued by GPU
//! threads against mapped host memory, bulk DMA copies, and page migration.
//! Zero-copy throughput is the minimum of a latency bound (how many requests
//! the GPU can keep in flight across the link's round trip) and a wire bound
//! (payload bytes as a fraction of payload plus per-request header). DMA is
//! modeled as a setup latency plus a size-dependent efficiency curve. Page
//! migration pays a fault round trip per page.
//!
//! Bandwidth fields are bytes per second. The defaults describe a
//! generation-4 times-16 link with a nominal 25.8 binary-gigabytes-per-second
//! data rate; callers with decimal-gigabyte figures should pass them
//! explicitly.

use std::collections::BTreeMap;

use serde::Serialize;

/// Default sustained read bandwidth of the link, 25.8 * 2^30 bytes/s.
pub const DEFAULT_WIRE_BANDWIDTH: f64 = 25.8 * (1u64 << 30) as f64;

/// Default link round-trip time in seconds.
pub const DEFAULT_RTT: f64 = 1.5e-6;

/// Default per-request header-plus-framing overhead in bytes. Transaction
/// headers run 12 to 16 bytes on the wire; we charge the conservative end.
pub const DEFAULT_HEADER_BYTES: f64 = 16.0;

/// Default DMA engine setup latency per transfer, in seconds.
pub const DEFAULT_DMA_SETUP_LATENCY: f64 = 10e-6;

/// Link generation, which fixes how many read requests one device can keep
/// outstanding.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum PcieGeneration {
    Gen3,
    Gen4,
}

impl PcieGeneration {
    pub fn max_outstanding_reads(self) -> u64 {
        match self {
            PcieGeneration::Gen3 => 256,
            PcieGeneration::Gen4 => 768,
        }
    }
}

/// Link timing and capacity parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LinkParams {
    pub generation: PcieGeneration,
    /// Sustained wire bandwidth in bytes per second.
    pub wire_bandwidth: f64,
    /// Read requests the device can keep in flight.
    pub max_outstanding_reads: u64,
    /// Round-trip time of one read in seconds.
    pub rtt: f64,
    /// Per-request overhead charged against the wire, in bytes.
    pub header_bytes: f64,
    /// Fixed cost to launch one DMA transfer, in seconds.
    pub dma_setup_latency: f64,
}

impl LinkParams {
    pub fn gen3() -> Self {
        LinkParams {
            generation: PcieGeneration::Gen3,
            wire_bandwidth: DEFAULT_WIRE_BANDWIDTH,
            max_outstanding_reads: PcieGeneration::Gen3.max_outstanding_reads(),
            rtt: DEFAULT_RTT,
            header_bytes: DEFAULT_HEADER_BYTES,
            dma_setup_latency: DEFAULT_DMA_SETUP_LATENCY,
        }
    }

    pub fn gen4() -> Self {
        LinkParams {
            generation: PcieGeneration::Gen4,
            max_outstanding_reads: PcieGeneration::Gen4.max_outstanding_reads(),
            ..Self::gen3()
        }
    }
}

impl Default for LinkParams {
    fn default() -> Self {
        Self::gen4()
    }
}

/// Execution resources of one GPU, as far as this model cares: how many
/// warps can be resident, and how much memory the device has.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GpuSpec {
    pub num_sms: u32,
    pub threads_per_sm: u32,
    pub warp_size: u32,
    pub device_mem_capacity: u64,
}

impl GpuSpec {
    pub fn warps_per_sm(&self) -> u32 {
        self.threads_per_sm / self.warp_size
    }

    pub fn total_warps(&self) -> u64 {
        self.num_sms as u64 * self.warps_per_sm() as u64
    }
}

impl Default for GpuSpec {
    fn default() -> Self {
        GpuSpec {
            num_sms: 82,
            threads_per_sm: 1536,
            warp_size: 32,
            device_mem_capacity: 24 * (1 << 30),
        }
    }
}

/// Zero-copy throughput estimate, with the two bounds it came from.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ZeroCopyBandwidth {
    /// Achievable read bandwidth in bytes per second.
    pub bandwidth: f64,
    /// `bandwidth` over the wire bandwidth.
    pub efficiency: f64,
    /// Bandwidth ceiling from in-flight requests: warps times average
    /// payload over the round trip.
    pub latency_bound: f64,
    /// Bandwidth ceiling from header overhead on the wire.
    pub wire_bound: f64,
}

const ZERO_BANDWIDTH: ZeroCopyBandwidth = ZeroCopyBandwidth {
    bandwidth: 0.0,
    efficiency: 0.0,
    latency_bound: 0.0,
    wire_bound: 0.0,
};

/// Estimates zero-copy read bandwidth for a gather whose request mix is
/// `histogram` (payload size in bytes, keyed to request count) when
/// `warps_available` warps issue reads. Each warp keeps one request in
/// flight, capped by the link's outstanding-read limit.
pub fn zero_copy_bandwidth(
    histogram: &BTreeMap<u32, u64>,
    params: &LinkParams,
    warps_available: u64,
) -> ZeroCopyBandwidth {
    let requests: u64 = histogram.values().sum();
    if requests == 0 || warps_available == 0 {
        return ZERO_BANDWIDTH;
    }
    let payload: u64 = histogram.iter().map(|(&p, &c)| p as u64 * c).sum();
    let avg_payload = payload as f64 / requests as f64;
    let in_flight = warps_available.min(params.max_outstanding_reads) as f64;
    let latency_bound = in_flight * avg_payload / params.rtt;
    let wire_bound =
        params.wire_bandwidth * avg_payload / (avg_payload + params.header_bytes);
    let bandwidth = latency_bound.min(wire_bound);
    ZeroCopyBandwidth {
        bandwidth,
        efficiency: bandwidth / params.wire_bandwidth,
        latency_bound,
        wire_bound,
    }
}

/// How much of the GPU a zero-copy gather kernel needs.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ProvisioningBounds {
    /// Fraction of SMs beyond which added warps cannot issue: enough warps
    /// to own every outstanding-read slot, rounded up to whole SMs.
    pub upper_fraction: f64,
    /// Fraction of SMs needed to keep `required_outstanding` requests in
    /// flight, one per warp.
    pub lower_fraction: f64,
    /// Requests that must be in flight to sustain the target bandwidth.
    pub required_outstanding: f64,
}

/// Bounds the fraction of SMs worth dedicating to a zero-copy gather that
/// should sustain `target_bandwidth` with `payload_bytes` requests.
pub fn provisioning_bounds(
    target_bandwidth: f64,
    payload_bytes: f64,
    params: &LinkParams,
    gpu: &GpuSpec,
) -> ProvisioningBounds {
    let warps_per_sm = gpu.warps_per_sm() as f64;
    let num_sms = gpu.num_sms as f64;
    let sms_to_saturate = (params.max_outstanding_reads as f64 / warps_per_sm).ceil();
    let required_outstanding = target_bandwidth * params.rtt / payload_bytes;
    ProvisioningBounds {
        upper_fraction: (sms_to_saturate / num_sms).min(1.0),
        lower_fraction: (required_outstanding / (warps_per_sm * num_sms)).min(1.0),
        required_outstanding,
    }
}

/// Anchor points of the DMA efficiency curve: measured fraction of wire
/// bandwidth that transfers of a given size achieve once setup cost is
/// excluded. Interpolation is linear in log(size).
const DMA_EFFICIENCY_ANCHORS: [(f64, f64); 4] = [
    (4096.0, 0.05),
    (65536.0, 0.5),
    (262144.0, 0.9),
    (1048576.0, 0.95),
];

/// Fraction of wire bandwidth a DMA transfer of `bytes` achieves. Flat at
/// the outermost anchors.
pub fn dma_efficiency(bytes: u64) -> f64 {
    let (first, last) = (
        DMA_EFFICIENCY_ANCHORS[0],
        DMA_EFFICIENCY_ANCHORS[DMA_EFFICIENCY_ANCHORS.len() - 1],
    );
    let b = bytes as f64;
    if b <= first.0 {
        return first.1;
    }
    if b >= last.0 {
        return last.1;
    }
    let x = b.ln();
    for w in DMA_EFFICIENCY_ANCHORS.windows(2) {
        let (s0, e0) = w[0];
        let (s1, e1) = w[1];
        if b <= s1 {
            let t = (x - s0.ln()) / (s1.ln() - s0.ln());
            return e0 + t * (e1 - e0);
        }
    }
    last.1
}

/// Wall time for one DMA transfer of `bytes`: setup latency plus wire time
/// at the size-dependent efficiency.
pub fn dma_transfer_time(bytes: u64, params: &LinkParams) -> f64 {
    if bytes == 0 {
        return params.dma_setup_latency;
    }
    params.dma_setup_latency + bytes as f64 / (params.wire_bandwidth * dma_efficiency(bytes))
}

/// Wall time for CPU workers to gather `bytes` of feature rows into a
/// staging buffer. The copy reads and writes every byte, and concurrent
/// gathers split the host memory system: `active_workers` of them (capped at
/// `worker_share_cap`, past which the model stops charging additional
/// slowdown) stretch each gather proportionally.
pub fn cpu_gather_time(
    bytes: u64,
    mem_bandwidth: f64,
    gather_efficiency: f64,
    active_workers: u32,
    worker_share_cap: u32,
) -> f64 {
    assert!(active_workers > 0, "at least one worker must be active");
    let contention = active_workers.min(worker_share_cap).max(1) as f64;
    2.0 * bytes as f64 * contention / (mem_bandwidth * gather_efficiency)
}

/// Wall time to migrate `pages` pages: each pays a fault round trip plus its
/// wire time at full bandwidth.
pub fn uvm_migration_time(
    pages: u64,
    page_size: u64,
    fault_latency: f64,
    wire_bandwidth: f64,
) -> f64 {
    pages as f64 * (fault_latency + page_size as f64 / wire_bandwidth)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn provisioning_bounds_for_default_gen4_link() {
        let params = LinkParams::gen4();
        let gpu = GpuSpec::default();
        let b = provisioning_bounds(DEFAULT_WIRE_BANDWIDTH, 128.0, &params, &gpu);
        assert_abs_diff_eq!(b.upper_fraction, 16.0 / 82.0, epsilon = 1e-12);
        assert_abs_diff_eq!(b.upper_fraction, 0.19512, epsilon = 1e-3);
        assert_abs_diff_eq!(b.required_outstanding, 324.64, epsilon = 0.5);
        assert_abs_diff_eq!(b.lower_fraction, 0.08248, epsilon = 2e-3);
    }

    #[test]
    fn provisioning_fractions_clamp_at_one() {
        let params = LinkParams::gen3();
        let tiny = GpuSpec {
            num_sms: 1,
            threads_per_sm: 32,
            warp_size: 32,
            device_mem_capacity: 1 << 30,
        };
        let b = provisioning_bounds(1e12, 128.0, &params, &tiny);
        assert_eq!(b.upper_fraction, 1.0);
        assert_eq!(b.lower_fraction, 1.0);
        assert!(b.required_outstanding > 1.0);
    }

    #[test]
    fn full_line_requests_with_ample_warps_hit_the_wire_bound() {
        let params = LinkParams::gen4();
        let hist = BTreeMap::from([(128u32, 10_000u64)]);
        let zc = zero_copy_bandwidth(&hist, &params, GpuSpec::default().total_warps());
        assert_abs_diff_eq!(zc.wire_bound, params.wire_bandwidth * 128.0 / 144.0, epsilon = 1.0);
        assert_eq!(zc.bandwidth, zc.wire_bound.min(zc.latency_bound));
        assert_abs_diff_eq!(zc.efficiency, 128.0 / 144.0, epsilon = 1e-9);
    }

    #[test]
    fn single_warp_is_latency_bound() {
        let params = LinkParams::gen3();
        let hist = BTreeMap::from([(128u32, 100u64)]);
        let zc = zero_copy_bandwidth(&hist, &params, 1);
        assert_abs_diff_eq!(zc.latency_bound, 128.0 / params.rtt, epsilon = 1e-6);
        assert_eq!(zc.bandwidth, zc.latency_bound);
        assert!(zc.bandwidth < zc.wire_bound);
    }

    #[test]
    fn outstanding_read_cap_limits_in_flight_requests() {
        let params = LinkParams::gen3();
        let hist = BTreeMap::from([(32u32, 50u64)]);
        let capped = zero_copy_bandwidth(&hist, &params, 1 << 20);
        let exact = zero_copy_bandwidth(&hist, &params, params.max_outstanding_reads);
        assert_eq!(capped.bandwidth, exact.bandwidth);
    }

    #[test]
    fn mixed_histogram_uses_request_weighted_average_payload() {
        let params = LinkParams::gen3();
        // 4 + 1 + 3 requests moving 480 bytes: average payload 60.
        let hist = BTreeMap::from([(32u32, 4u64), (64, 1), (96, 3)]);
        let zc = zero_copy_bandwidth(&hist, &params, 10);
        assert_abs_diff_eq!(zc.latency_bound, 10.0 * 60.0 / params.rtt, epsilon = 1e-6);
        assert_abs_diff_eq!(
            zc.wire_bound,
            params.wire_bandwidth * 60.0 / 76.0,
            epsilon = 1e-3
        );
    }

    #[test]
    fn empty_histogram_or_no_warps_means_no_bandwidth() {
        let params = LinkParams::gen3();
        let empty = BTreeMap::new();
        assert_eq!(zero_copy_bandwidth(&empty, &params, 100).bandwidth, 0.0);
        let hist = BTreeMap::from([(128u32, 5u64)]);
        assert_eq!(zero_copy_bandwidth(&hist, &params, 0).bandwidth, 0.0);
    }

    #[test]
    fn bandwidth_never_decreases_with_more_warps() {
        let params = LinkParams::gen3();
        let hist = BTreeMap::from([(32u32, 7u64), (128, 3)]);
        let mut last = 0.0;
        for warps in [1u64, 2, 4, 16, 64, 256, 1024, 4096] {
            let zc = zero_copy_bandwidth(&hist, &params, warps);
            assert!(zc.bandwidth >= last, "warps {warps}");
            last = zc.bandwidth;
        }
    }

    #[test]
    fn dma_efficiency_hits_anchors_and_clips_outside() {
        assert_abs_diff_eq!(dma_efficiency(4096), 0.05, epsilon = 1e-12);
        assert_abs_diff_eq!(dma_efficiency(65536), 0.5, epsilon = 1e-12);
        assert_abs_diff_eq!(dma_efficiency(262144), 0.9, epsilon = 1e-12);
        assert_abs_diff_eq!(dma_efficiency(1048576), 0.95, epsilon = 1e-12);
        assert_eq!(dma_efficiency(0), 0.05);
        assert_eq!(dma_efficiency(512), 0.05);
        assert_eq!(dma_efficiency(16 << 20), 0.95);
    }

    #[test]
    fn dma_efficiency_is_continuous_and_nondecreasing() {
        let mut last = 0.0;
        let mut bytes = 1024u64;
        while bytes <= (4 << 20) {
            let e = dma_efficiency(bytes);
            assert!(e >= last, "bytes {bytes}");
            last = e;
            bytes += 1024;
        }
        for anchor in [4096u64, 65536, 262144, 1048576] {
            let below = dma_efficiency(anchor - 1);
            let at = dma_efficiency(anchor);
            let above = dma_efficiency(anchor + 1);
            assert!((at - below).abs() < 1e-4, "anchor {anchor}");
            assert!((above - at).abs() < 1e-4, "anchor {anchor}");
        }
    }

    #[test]
    fn dma_transfer_time_is_setup_plus_wire_time() {
        let params = LinkParams::gen3();
        assert_eq!(dma_transfer_time(0, &params), params.dma_setup_latency);
        let t = dma_transfer_time(1 << 20, &params);
        let want = 10e-6 + (1u64 << 20) as f64 / (params.wire_bandwidth * 0.95);
        assert_abs_diff_eq!(t, want, epsilon = 1e-12);
        assert!(dma_transfer_time(1 << 22, &params) > t);
    }

    #[test]
    fn cpu_gather_reads_and_writes_every_byte() {
        let t = cpu_gather_time(1 << 30, 50e9, 0.5, 1, 16);
        assert_abs_diff_eq!(t, 0.0859, epsilon = 1e-4);
    }

    #[test]
    fn concurrent_gathers_split_host_bandwidth_up_to_the_cap() {
        let one = cpu_gather_time(1 << 24, 100e9, 0.5, 1, 4);
        let two = cpu_gather_time(1 << 24, 100e9, 0.5, 2, 4);
        let eight = cpu_gather_time(1 << 24, 100e9, 0.5, 8, 4);
        let four = cpu_gather_time(1 << 24, 100e9, 0.5, 4, 4);
        assert_abs_diff_eq!(two, 2.0 * one, epsilon = 1e-12);
        assert_abs_diff_eq!(eight, four, epsilon = 1e-12);
    }

    #[test]
    fn page_migration_charges_fault_latency_per_page() {
        let t = uvm_migration_time(1000, 4096, 20e-6, 25.8e9);
        assert_abs_diff_eq!(t, 0.0201588, epsilon = 1e-6);
        assert_eq!(uvm_migration_time(0, 4096, 20e-6, 25.8e9), 0.0);
    }
}
