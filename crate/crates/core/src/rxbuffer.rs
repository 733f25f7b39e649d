//! Shared receive buffer with two release policies.
//!
//! Both policies count occupancy in packets against one capacity `m`, and
//! drop the arriving packet when the buffer is full (tail drop).
//!
//! * [`Policy::NetworkCoded`] keeps one decoder per generation. A generation
//!   leaves the buffer the moment it reaches rank `h`. A packet that would
//!   complete a generation is decoded in place even when the buffer is full.
//!   Once any packet of a generation is dropped the generation can never
//!   decode, so its stored rows are purged and later packets of it are
//!   discarded.
//! * [`Policy::MultipathReorder`] holds native packets until the in-order
//!   prefix starting at `next_expected` is contiguous. Sequence numbers the
//!   buffer itself dropped count as filled, since the receiver saw them go.
//!   Released packets may keep their slot for a fixed reordering latency.

use std::collections::{BTreeMap, BTreeSet, VecDeque};

use crate::codec::{CodedPacket, GenerationDecoder};
use crate::error::{Error, Result};
use crate::gf256::Gf256;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Policy {
    NetworkCoded,
    MultipathReorder,
}

impl Policy {
    pub fn name(self) -> &'static str {
        match self {
            Policy::NetworkCoded => "nc",
            Policy::MultipathReorder => "multipath",
        }
    }
}

/// What reaches the receiver.
#[derive(Debug, Clone)]
pub enum Arrival {
    Coded(CodedPacket),
    /// A native packet at absolute stream position `seq`.
    Native { seq: u64, symbols: Vec<Gf256> },
}

/// A native packet handed to the output stream.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Delivered {
    pub seq: u64,
    pub symbols: Vec<Gf256>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Disposition {
    /// Took a slot.
    Stored,
    /// Buffer overflow.
    Dropped,
    /// Carried no usable information: non-innovative, duplicate, or part of
    /// a generation that can no longer decode. Never takes a slot.
    Discarded,
    /// Completed a generation while the buffer was full and was eliminated
    /// without taking a slot.
    DecodedInPlace,
}

#[derive(Debug, Clone)]
pub struct ArrivalOutcome {
    pub disposition: Disposition,
    pub delivered: Vec<Delivered>,
}

/// Packet counters. `offered == released + dropped + discarded + purged +
/// occupancy` holds after every call.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct Counters {
    pub offered: u64,
    pub dropped: u64,
    pub discarded: u64,
    /// Rows freed because their generation lost a packet.
    pub purged: u64,
    /// Packets that left the buffer through decoding or in-order release.
    pub released: u64,
    pub delivered_natives: u64,
    pub max_occupancy: usize,
    /// Sum over released packets of (release time - arrival time).
    pub residence_sum: u128,
}

#[derive(Debug)]
struct PendingGeneration {
    decoder: GenerationDecoder,
    arrivals: Vec<u64>,
}

#[derive(Debug, Default)]
struct CodedState {
    pending: BTreeMap<u64, PendingGeneration>,
    dead: BTreeSet<u64>,
    decoded: BTreeSet<u64>,
}

#[derive(Debug, Default)]
struct ReorderState {
    next_expected: u64,
    pending: BTreeMap<u64, (Vec<Gf256>, u64)>,
    dropped_ahead: BTreeSet<u64>,
    releasing: VecDeque<(u64, Vec<(Delivered, u64)>)>,
    releasing_len: usize,
}

#[derive(Debug)]
enum State {
    Coded(CodedState),
    Reorder(ReorderState),
}

#[derive(Debug)]
pub struct RxBuffer {
    capacity: usize,
    h: usize,
    n: usize,
    release_latency: u64,
    occupancy: usize,
    counters: Counters,
    state: State,
}

/// End-of-run accounting.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Summary {
    pub counters: Counters,
    /// Packets still held when the run ended.
    pub held: usize,
    /// Natives that never reached the output.
    pub lost_natives: u64,
}

impl RxBuffer {
    /// `capacity` is `m`, in packets; `h` lanes of `n` symbols each.
    /// `release_latency` only applies to the reorder policy.
    pub fn new(policy: Policy, capacity: usize, h: usize, n: usize, release_latency: u64) -> Result<Self> {
        if capacity == 0 {
            return Err(Error::config("buffer_m", "buffer must hold at least one packet"));
        }
        if h == 0 {
            return Err(Error::config("h", "lane count must be at least 1"));
        }
        let state = match policy {
            Policy::NetworkCoded => State::Coded(CodedState::default()),
            Policy::MultipathReorder => State::Reorder(ReorderState::default()),
        };
        Ok(RxBuffer {
            capacity,
            h,
            n,
            release_latency,
            occupancy: 0,
            counters: Counters::default(),
            state,
        })
    }

    pub fn policy(&self) -> Policy {
        match self.state {
            State::Coded(_) => Policy::NetworkCoded,
            State::Reorder(_) => Policy::MultipathReorder,
        }
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    pub fn occupancy(&self) -> usize {
        self.occupancy
    }

    pub fn counters(&self) -> &Counters {
        &self.counters
    }

    /// Dropped over offered.
    pub fn loss_ratio(&self) -> f64 {
        if self.counters.offered == 0 {
            0.0
        } else {
            self.counters.dropped as f64 / self.counters.offered as f64
        }
    }

    /// Next sequence number the reorder policy waits for.
    pub fn next_expected(&self) -> Option<u64> {
        match &self.state {
            State::Reorder(s) => Some(s.next_expected),
            State::Coded(_) => None,
        }
    }

    pub fn on_arrival(&mut self, now: u64, arrival: Arrival) -> Result<ArrivalOutcome> {
        self.counters.offered += 1;
        let outcome = match arrival {
            Arrival::Coded(pkt) => self.arrive_coded(now, pkt)?,
            Arrival::Native { seq, symbols } => self.arrive_native(now, seq, symbols)?,
        };
        self.counters.max_occupancy = self.counters.max_occupancy.max(self.occupancy);
        assert!(self.occupancy <= self.capacity, "occupancy {} exceeds m={}", self.occupancy, self.capacity);
        Ok(outcome)
    }

    fn arrive_coded(&mut self, now: u64, pkt: CodedPacket) -> Result<ArrivalOutcome> {
        let (h, n, capacity, full) = (self.h, self.n, self.capacity, self.occupancy >= self.capacity);
        let State::Coded(st) = &mut self.state else {
            self.counters.offered -= 1;
            return Err(Error::config("arrival", "coded packet offered to a reorder buffer"));
        };
        let g = pkt.generation;
        let discard = ArrivalOutcome {
            disposition: Disposition::Discarded,
            delivered: Vec::new(),
        };
        if st.decoded.contains(&g) || st.dead.contains(&g) {
            self.counters.discarded += 1;
            return Ok(discard);
        }
        let entry = st.pending.entry(g).or_insert_with(|| PendingGeneration {
            decoder: GenerationDecoder::new(g, h, n),
            arrivals: Vec::with_capacity(h),
        });
        let innovative = match entry.decoder.is_innovative(&pkt) {
            Ok(v) => v,
            Err(e) => {
                if entry.decoder.rank() == 0 {
                    st.pending.remove(&g);
                }
                self.counters.offered -= 1;
                return Err(e);
            }
        };
        if !innovative {
            if entry.decoder.rank() == 0 {
                st.pending.remove(&g);
            }
            self.counters.discarded += 1;
            return Ok(discard);
        }
        let completes = entry.decoder.rank() + 1 == h;
        if full && !completes {
            let rank = entry.decoder.rank();
            st.pending.remove(&g);
            st.dead.insert(g);
            self.counters.dropped += 1;
            self.counters.purged += rank as u64;
            self.occupancy -= rank;
            return Ok(ArrivalOutcome {
                disposition: Disposition::Dropped,
                delivered: Vec::new(),
            });
        }
        entry.decoder.receive(&pkt)?;
        entry.arrivals.push(now);
        let disposition = if full {
            Disposition::DecodedInPlace
        } else {
            self.occupancy += 1;
            Disposition::Stored
        };
        debug_assert!(self.occupancy <= capacity);
        if !completes {
            return Ok(ArrivalOutcome {
                disposition,
                delivered: Vec::new(),
            });
        }
        let done = st.pending.remove(&g).expect("generation present");
        st.decoded.insert(g);
        let natives = done.decoder.decode()?;
        let stored = if full { h - 1 } else { h };
        self.occupancy -= stored;
        self.counters.released += h as u64;
        self.counters.residence_sum += done.arrivals.iter().map(|&t| (now - t) as u128).sum::<u128>();
        self.counters.delivered_natives += natives.len() as u64;
        let delivered = natives
            .into_iter()
            .map(|p| Delivered {
                seq: g * h as u64 + p.lane as u64,
                symbols: p.symbols,
            })
            .collect();
        Ok(ArrivalOutcome { disposition, delivered })
    }

    fn arrive_native(&mut self, now: u64, seq: u64, symbols: Vec<Gf256>) -> Result<ArrivalOutcome> {
        if symbols.len() != self.n {
            self.counters.offered -= 1;
            return Err(Error::DimensionMismatch {
                what: "symbol count",
                expected: self.n,
                got: symbols.len(),
            });
        }
        let full = self.occupancy >= self.capacity;
        let State::Reorder(st) = &mut self.state else {
            self.counters.offered -= 1;
            return Err(Error::config("arrival", "native packet offered to a network-coded buffer"));
        };
        if seq < st.next_expected || st.pending.contains_key(&seq) || st.dropped_ahead.contains(&seq) {
            self.counters.discarded += 1;
            return Ok(ArrivalOutcome {
                disposition: Disposition::Discarded,
                delivered: Vec::new(),
            });
        }
        let disposition = if full {
            st.dropped_ahead.insert(seq);
            self.counters.dropped += 1;
            Disposition::Dropped
        } else {
            st.pending.insert(seq, (symbols, now));
            self.occupancy += 1;
            Disposition::Stored
        };

        let mut ready = Vec::new();
        loop {
            let next = st.next_expected;
            if let Some((symbols, t)) = st.pending.remove(&next) {
                ready.push((Delivered { seq: next, symbols }, t));
            } else if !st.dropped_ahead.remove(&next) {
                break;
            }
            st.next_expected += 1;
        }

        if ready.is_empty() {
            return Ok(ArrivalOutcome {
                disposition,
                delivered: Vec::new(),
            });
        }
        if self.release_latency == 0 {
            let delivered = self.release(now, ready);
            return Ok(ArrivalOutcome { disposition, delivered });
        }
        st.releasing_len += ready.len();
        st.releasing.push_back((now + self.release_latency, ready));
        Ok(ArrivalOutcome {
            disposition,
            delivered: Vec::new(),
        })
    }

    fn release(&mut self, now: u64, ready: Vec<(Delivered, u64)>) -> Vec<Delivered> {
        self.occupancy -= ready.len();
        self.counters.released += ready.len() as u64;
        self.counters.delivered_natives += ready.len() as u64;
        ready
            .into_iter()
            .map(|(d, t)| {
                self.counters.residence_sum += (now - t) as u128;
                d
            })
            .collect()
    }

    /// Time at which the next delayed release falls due, if any.
    pub fn next_release(&self) -> Option<u64> {
        match &self.state {
            State::Reorder(st) => st.releasing.front().map(|(due, _)| *due),
            State::Coded(_) => None,
        }
    }

    /// Hands out every delayed release due at or before `now`.
    pub fn release_due(&mut self, now: u64) -> Vec<Delivered> {
        let State::Reorder(st) = &mut self.state else {
            return Vec::new();
        };
        let mut ready = Vec::new();
        while st.releasing.front().is_some_and(|(due, _)| *due <= now) {
            let (_, batch) = st.releasing.pop_front().unwrap();
            st.releasing_len -= batch.len();
            ready.extend(batch);
        }
        if ready.is_empty() {
            return Vec::new();
        }
        self.release(now, ready)
    }

    /// Closes the run. For the coded policy every generation that did not
    /// decode loses all `h` of its natives.
    pub fn summary(&self, total_natives: u64) -> Summary {
        Summary {
            counters: self.counters,
            held: self.occupancy,
            lost_natives: total_natives.saturating_sub(self.counters.delivered_natives),
        }
    }

    /// Generations of the coded policy still waiting for rows.
    pub fn undecoded_generations(&self) -> Vec<u64> {
        match &self.state {
            State::Coded(st) => st.pending.keys().copied().collect(),
            State::Reorder(_) => Vec::new(),
        }
    }
}
