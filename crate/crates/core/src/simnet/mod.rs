//! Deterministic discrete-event simulation of sender, parallel paths and
//! receiver.
//!
//! Paths are lossless, FIFO and jitter free: the `k`-th packet sent on a path
//! leaves at `k * gap` and arrives `latency` later. All loss therefore comes
//! from the receive buffer. Events are ordered by time, then kind, then path
//! index, then sequence number, so a run is a pure function of its config.

mod graph;
mod timeline;

use std::cmp::Reverse;
use std::collections::BinaryHeap;

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::codec::{encode_generation, CodedPacket, EncodingMatrix};
use crate::error::{Error, Result};
use crate::framing::{frame_stream, FramedStream, PacketLayout};
use crate::gf256::Gf256;
use crate::rxbuffer::{Arrival, Delivered, Policy, RxBuffer, Summary};

pub use graph::{Edge, NetworkGraph, Route};
pub use timeline::{TickScenario, TickTable};

const NS_PER_MS: f64 = 1e6;
const NS_PER_S: u128 = 1_000_000_000;

/// One-way delay and line rate of one path.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PathConfig {
    pub delay_ms: f64,
    pub line_rate_bps: u64,
}

impl PathConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.delay_ms.is_finite() && self.delay_ms >= 0.0) {
            return Err(Error::config("path_delays", format!("delay {} ms must be >= 0", self.delay_ms)));
        }
        if self.line_rate_bps == 0 {
            return Err(Error::config("sending_rate", "line rate must be positive"));
        }
        Ok(())
    }

    /// Serialization time of `bits`, in nanoseconds, rounded to nearest.
    pub fn serialization_ns(&self, bits: usize) -> u64 {
        let r = self.line_rate_bps as u128;
        ((bits as u128 * NS_PER_S + r / 2) / r) as u64
    }

    /// Timing of this path for packets of `bits` bits: back-to-back at line
    /// rate, arriving after serialization plus propagation delay.
    pub fn timing(&self, bits: usize) -> PathTiming {
        let gap = self.serialization_ns(bits);
        PathTiming {
            gap,
            latency: gap + (self.delay_ms * NS_PER_MS).round() as u64,
        }
    }
}

/// Send spacing and end-to-end latency of a path, in simulation time units.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PathTiming {
    pub gap: u64,
    pub latency: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum EventKind {
    /// A delayed reorder release falls due.
    ReorderTick,
    PacketSent,
    PacketArrived,
}

/// Queue entry. Field order is the processing order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub struct SimEvent {
    pub time: u64,
    pub kind: EventKind,
    pub path: usize,
    /// Position of the packet on its path.
    pub seq: u64,
}

/// Everything one simulation run needs.
#[derive(Debug, Clone, PartialEq)]
pub struct SimConfig {
    pub policy: Policy,
    pub h: usize,
    pub packet_symbols: usize,
    pub buffer_m: usize,
    pub paths: Vec<PathConfig>,
    /// Packets carrying stream data. The last generation is padded with
    /// all-zero packets if this is not a multiple of `h`.
    pub packet_count: usize,
    /// Seeds the encoding matrices.
    pub seed: u64,
    /// Seeds the traffic bytes.
    pub payload_seed: u64,
    /// Reorder release latency, in nanoseconds.
    pub reorder_latency_ns: u64,
    /// Keep every (time, occupancy) sample.
    pub record_series: bool,
    /// Keep the delivered packets and the sent stream.
    pub keep_output: bool,
}

impl SimConfig {
    pub fn validate(&self) -> Result<()> {
        if self.h == 0 {
            return Err(Error::config("h", "lane count must be at least 1"));
        }
        if self.paths.len() != self.h {
            return Err(Error::config(
                "path_delays",
                format!("{} paths given for h={}", self.paths.len(), self.h),
            ));
        }
        for p in &self.paths {
            p.validate()?;
        }
        if self.buffer_m == 0 {
            return Err(Error::config("buffer_m", "must be at least 1"));
        }
        if self.packet_count < self.h {
            return Err(Error::config(
                "packet_count",
                format!("{} packets cannot fill one generation of {}", self.packet_count, self.h),
            ));
        }
        PacketLayout::new(self.packet_symbols, self.h)?;
        Ok(())
    }
}

/// Outcome of one run.
#[derive(Debug, Clone, PartialEq)]
pub struct RunMetrics {
    pub policy: Policy,
    pub summary: Summary,
    /// Packets put on the wire, synthetic padding included.
    pub sent: u64,
    /// Natives represented by the sent packets.
    pub natives: u64,
    /// Dropped over offered.
    pub coded_loss_ratio: f64,
    /// Natives that never reached the output, over natives sent.
    pub native_loss_ratio: f64,
    /// Time-weighted mean occupancy between first arrival and last event.
    pub occupancy_mean: f64,
    pub occupancy_max: usize,
    /// Mean time a released packet spent in the buffer, in time units.
    pub latency_mean: f64,
    pub first_arrival: u64,
    pub last_event: u64,
    pub series: Vec<(u64, usize)>,
    pub output: Option<RunOutput>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunOutput {
    pub stream: Vec<u8>,
    pub layout: PacketLayout,
    pub delivered: Vec<Delivered>,
}

impl RunOutput {
    /// Deframed receiver output, in sequence order, truncated to the stream
    /// length. Only meaningful when nothing was lost.
    pub fn received_bytes(&self) -> Result<Vec<u8>> {
        crate::framing::deframe(
            self.delivered.iter().map(|d| (d.seq, d.symbols.as_slice())),
            self.layout,
            self.stream.len(),
        )
    }
}

enum Payload {
    Coded(Vec<Vec<CodedPacket>>),
    Native(Vec<Vec<(u64, Vec<Gf256>)>>),
}

/// Generates traffic bytes for `packets` packets of `layout`.
pub fn traffic(layout: PacketLayout, packets: usize, seed: u64) -> Vec<u8> {
    let mut bytes = vec![0u8; packets * layout.payload_bytes()];
    ChaCha8Rng::seed_from_u64(seed).fill_bytes(&mut bytes);
    bytes
}

/// Coded sender: generation `g` of the stream goes out as `h` coded packets,
/// packet `r` on path `r`, each path sending its next packet one gap later.
pub fn sender_nc<R: RngCore + ?Sized>(stream: &FramedStream, h: usize, rng: &mut R) -> Result<Vec<Vec<CodedPacket>>> {
    let mut per_path: Vec<Vec<CodedPacket>> = vec![Vec::with_capacity(stream.packets.len() / h); h];
    for g in 0..(stream.packets.len() / h) as u64 {
        let natives = stream.generation(g, h)?;
        let matrix = EncodingMatrix::sample(h, rng)?;
        for (r, c) in encode_generation(&matrix, &natives)?.into_iter().enumerate() {
            per_path[r].push(c);
        }
    }
    Ok(per_path)
}

/// Baseline sender: packet `k` goes on path `k mod h`, uncoded.
pub fn sender_multipath(stream: &FramedStream, h: usize) -> Vec<Vec<(u64, Vec<Gf256>)>> {
    let mut per_path: Vec<Vec<(u64, Vec<Gf256>)>> = vec![Vec::new(); h];
    for (k, p) in stream.packets.iter().enumerate() {
        per_path[k % h].push((k as u64, p.symbols.clone()));
    }
    per_path
}

/// Runs one simulation to completion.
pub fn run_simulation(cfg: &SimConfig) -> Result<RunMetrics> {
    cfg.validate()?;
    let layout = PacketLayout::new(cfg.packet_symbols, cfg.h)?;
    let bytes = traffic(layout, cfg.packet_count, cfg.payload_seed);
    let mut stream = frame_stream(&bytes, layout);
    stream.pad_to_generation(cfg.h);
    let timings: Vec<PathTiming> = cfg.paths.iter().map(|p| p.timing(layout.bits())).collect();

    let mut engine = Engine::new(cfg.policy, cfg.buffer_m, cfg.h, layout, timings, cfg.reorder_latency_ns, cfg.seed, &stream)?;
    engine.record_series = cfg.record_series;
    engine.keep_output = cfg.keep_output;
    let mut metrics = engine.run()?;
    if let Some(out) = metrics.output.as_mut() {
        out.stream = bytes;
    }
    Ok(metrics)
}

pub(crate) struct Engine {
    policy: Policy,
    h: usize,
    layout: PacketLayout,
    timings: Vec<PathTiming>,
    payload: Payload,
    buffer: RxBuffer,
    sent: u64,
    natives: u64,
    pub(crate) record_series: bool,
    pub(crate) keep_output: bool,
}

impl Engine {
    #[allow(clippy::too_many_arguments)]
    pub(crate) fn new(
        policy: Policy,
        capacity: usize,
        h: usize,
        layout: PacketLayout,
        timings: Vec<PathTiming>,
        reorder_latency: u64,
        seed: u64,
        stream: &FramedStream,
    ) -> Result<Self> {
        let payload = match policy {
            Policy::NetworkCoded => {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                Payload::Coded(sender_nc(stream, h, &mut rng)?)
            }
            Policy::MultipathReorder => Payload::Native(sender_multipath(stream, h)),
        };
        let release_latency = match policy {
            Policy::NetworkCoded => 0,
            Policy::MultipathReorder => reorder_latency,
        };
        Ok(Engine {
            policy,
            h,
            layout,
            timings,
            payload,
            buffer: RxBuffer::new(policy, capacity, h, layout.symbols(), release_latency)?,
            sent: stream.packets.len() as u64,
            natives: stream.packets.len() as u64,
            record_series: false,
            keep_output: false,
        })
    }

    fn path_len(&self, path: usize) -> usize {
        match &self.payload {
            Payload::Coded(p) => p[path].len(),
            Payload::Native(p) => p[path].len(),
        }
    }

    fn arrival(&self, path: usize, seq: usize) -> Arrival {
        match &self.payload {
            Payload::Coded(p) => Arrival::Coded(p[path][seq].clone()),
            Payload::Native(p) => {
                let (k, symbols) = &p[path][seq];
                // FIFO path: the i-th arrival on path r is packet r + i*h.
                debug_assert_eq!(*k, (path + seq * self.h) as u64);
                debug_assert_eq!(
                    self.layout.decode(symbols).map(|(pid, _)| pid).ok(),
                    Some((*k % self.layout.pid_period() as u64) as u32)
                );
                Arrival::Native {
                    seq: *k,
                    symbols: symbols.clone(),
                }
            }
        }
    }

    pub(crate) fn run(mut self) -> Result<RunMetrics> {
        let mut queue: BinaryHeap<Reverse<SimEvent>> = BinaryHeap::new();
        for path in 0..self.h {
            if self.path_len(path) > 0 {
                queue.push(Reverse(SimEvent {
                    time: 0,
                    kind: EventKind::PacketSent,
                    path,
                    seq: 0,
                }));
            }
        }

        let mut series = Vec::new();
        let mut delivered = Vec::new();
        let mut first_arrival: Option<u64> = None;
        let mut last_event = 0u64;
        let mut area: u128 = 0;
        let mut last_occ = 0usize;
        let mut pending_tick: Option<u64> = None;

        while let Some(Reverse(ev)) = queue.pop() {
            debug_assert!(ev.time >= last_event);
            if first_arrival.is_some() {
                area += (ev.time - last_event) as u128 * last_occ as u128;
            }
            last_event = ev.time;
            match ev.kind {
                EventKind::PacketSent => {
                    let t = self.timings[ev.path];
                    queue.push(Reverse(SimEvent {
                        time: ev.time + t.latency,
                        kind: EventKind::PacketArrived,
                        ..ev
                    }));
                    if (ev.seq as usize + 1) < self.path_len(ev.path) {
                        queue.push(Reverse(SimEvent {
                            time: ev.time + t.gap,
                            seq: ev.seq + 1,
                            ..ev
                        }));
                    }
                    continue;
                }
                EventKind::PacketArrived => {
                    first_arrival.get_or_insert(ev.time);
                    let arrival = self.arrival(ev.path, ev.seq as usize);
                    let outcome = self.buffer.on_arrival(ev.time, arrival)?;
                    if self.keep_output {
                        delivered.extend(outcome.delivered);
                    }
                }
                EventKind::ReorderTick => {
                    pending_tick = None;
                    let out = self.buffer.release_due(ev.time);
                    if self.keep_output {
                        delivered.extend(out);
                    }
                }
            }
            if let Some(due) = self.buffer.next_release() {
                if pending_tick != Some(due) {
                    pending_tick = Some(due);
                    queue.push(Reverse(SimEvent {
                        time: due,
                        kind: EventKind::ReorderTick,
                        path: 0,
                        seq: 0,
                    }));
                }
            }
            last_occ = self.buffer.occupancy();
            if self.record_series {
                series.push((ev.time, last_occ));
            }
        }

        let summary = self.buffer.summary(self.natives);
        let c = summary.counters;
        let first = first_arrival.unwrap_or(0);
        let span = last_event.saturating_sub(first);
        Ok(RunMetrics {
            policy: self.policy,
            summary,
            sent: self.sent,
            natives: self.natives,
            coded_loss_ratio: self.buffer.loss_ratio(),
            native_loss_ratio: if self.natives == 0 {
                0.0
            } else {
                summary.lost_natives as f64 / self.natives as f64
            },
            occupancy_mean: if span == 0 { 0.0 } else { area as f64 / span as f64 },
            occupancy_max: c.max_occupancy,
            latency_mean: if c.released == 0 {
                0.0
            } else {
                c.residence_sum as f64 / c.released as f64
            },
            first_arrival: first,
            last_event,
            series,
            output: self.keep_output.then(|| RunOutput {
                stream: Vec::new(),
                layout: self.layout,
                delivered,
            }),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg(policy: Policy, delays: &[f64], m: usize) -> SimConfig {
        SimConfig {
            policy,
            h: delays.len(),
            packet_symbols: 9,
            buffer_m: m,
            paths: delays
                .iter()
                .map(|&d| PathConfig {
                    delay_ms: d,
                    line_rate_bps: 1_000_000,
                })
                .collect(),
            packet_count: 400,
            seed: 1,
            payload_seed: 2,
            reorder_latency_ns: 0,
            record_series: true,
            keep_output: true,
        }
    }

    #[test]
    fn serialization_gap() {
        let p = PathConfig {
            delay_ms: 0.0,
            line_rate_bps: 1_000_000,
        };
        assert_eq!(p.serialization_ns(72), 72_000);
        assert_eq!(p.timing(72), PathTiming { gap: 72_000, latency: 72_000 });
        let p = PathConfig {
            delay_ms: 300.0,
            line_rate_bps: 200_000,
        };
        assert_eq!(p.timing(72), PathTiming { gap: 360_000, latency: 300_360_000 });
    }

    #[test]
    fn zero_differential_delay_is_lossless() {
        for policy in [Policy::NetworkCoded, Policy::MultipathReorder] {
            let m = run_simulation(&cfg(policy, &[5.0; 4], 1_000_000)).unwrap();
            assert_eq!(m.coded_loss_ratio, 0.0);
            assert_eq!(m.native_loss_ratio, 0.0);
            assert_eq!(m.summary.held, 0);
            let out = m.output.unwrap();
            assert_eq!(out.received_bytes().unwrap(), out.stream);
        }
    }

    #[test]
    fn nc_decodes_on_hth_arrival_with_equal_delays() {
        let m = run_simulation(&cfg(Policy::NetworkCoded, &[5.0; 4], 1_000_000)).unwrap();
        // Equal delays: a generation's 4 packets arrive together, so the
        // buffer never holds more than 3 rows.
        assert_eq!(m.occupancy_max, 3);
        assert_eq!(m.latency_mean, 0.0);
    }

    #[test]
    fn runs_are_deterministic() {
        let c = cfg(Policy::NetworkCoded, &[1.0, 2.0, 3.0, 4.0], 50);
        assert_eq!(run_simulation(&c).unwrap(), run_simulation(&c).unwrap());
    }

    #[test]
    fn nc_tags_generations_and_uses_one_path_per_row() {
        let layout = PacketLayout::new(9, 4).unwrap();
        let stream = frame_stream(&traffic(layout, 16, 0), layout);
        let per_path = sender_nc(&stream, 4, &mut ChaCha8Rng::seed_from_u64(0)).unwrap();
        assert_eq!(per_path.len(), 4);
        for path in &per_path {
            let gens: Vec<u64> = path.iter().map(|c| c.generation).collect();
            assert_eq!(gens, vec![0, 1, 2, 3]);
        }
    }

    #[test]
    fn h1_nc_is_serial() {
        let layout = PacketLayout::new(9, 1).unwrap();
        let stream = frame_stream(&traffic(layout, 5, 0), layout);
        let per_path = sender_nc(&stream, 1, &mut ChaCha8Rng::seed_from_u64(0)).unwrap();
        assert_eq!(per_path.len(), 1);
        assert_eq!(per_path[0].len(), 5);
    }

    #[test]
    fn multipath_round_robin() {
        let layout = PacketLayout::new(9, 4).unwrap();
        let stream = frame_stream(&traffic(layout, 8, 0), layout);
        let per_path = sender_multipath(&stream, 4);
        for (r, path) in per_path.iter().enumerate() {
            let ks: Vec<u64> = path.iter().map(|(k, _)| *k).collect();
            assert_eq!(ks, vec![r as u64, r as u64 + 4]);
        }
        let single = sender_multipath(&stream, 1);
        let ks: Vec<u64> = single[0].iter().map(|(k, _)| *k).collect();
        assert_eq!(ks, (0..8).collect::<Vec<_>>());
    }

    #[test]
    fn conservation_holds_under_loss() {
        for policy in [Policy::NetworkCoded, Policy::MultipathReorder] {
            let m = run_simulation(&cfg(policy, &[0.0, 1.0, 2.0, 3.0], 20)).unwrap();
            let c = m.summary.counters;
            assert!(c.dropped > 0, "{policy:?} should overflow");
            assert_eq!(c.offered, m.sent);
            assert_eq!(c.offered, c.released + c.dropped + c.discarded + c.purged + m.summary.held as u64);
            assert!(m.series.iter().all(|&(_, o)| o <= 20));
        }
    }

    #[test]
    fn validation_names_the_field() {
        let mut c = cfg(Policy::NetworkCoded, &[1.0; 4], 10);
        c.paths.pop();
        assert!(matches!(run_simulation(&c), Err(Error::Config { field: "path_delays", .. })));
        let mut c = cfg(Policy::NetworkCoded, &[1.0; 4], 0);
        c.buffer_m = 0;
        assert!(matches!(run_simulation(&c), Err(Error::Config { field: "buffer_m", .. })));
        let mut c = cfg(Policy::NetworkCoded, &[1.0; 4], 10);
        c.packet_count = 3;
        assert!(matches!(run_simulation(&c), Err(Error::Config { field: "packet_count", .. })));
    }

    #[test]
    fn ragged_packet_count_is_padded() {
        let mut c = cfg(Policy::NetworkCoded, &[1.0; 4], 1000);
        c.packet_count = 10;
        let m = run_simulation(&c).unwrap();
        assert_eq!(m.sent, 12);
        let out = m.output.unwrap();
        assert_eq!(out.received_bytes().unwrap(), out.stream);
    }
}
