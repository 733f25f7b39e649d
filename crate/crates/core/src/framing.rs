//! 66b blocks, packet identifiers and generation partitioning.
//!
//! A packet on the wire is, most significant bit first,
//! `[6-bit pid][2-bit sync][64-bit payload]` for the default nine-symbol
//! packet. Larger block-aligned packets repeat the `[sync][payload]` pair, so
//! five blocks give `6 + 5 * 66 = 336` bits, i.e. 42 symbols. Every symbol of
//! the packet, identifier included, is coded.
//!
//! The 6-bit identifier wraps every 64 packets. The sender knows absolute
//! packet indices; the receiver recovers the wrap count (`epoch`) with a
//! [`PidUnwrapper`].

use crate::codec::NativePacket;
use crate::error::{Error, Result};
use crate::gf256::Gf256;

/// Default packet size: one 66b block plus the identifier.
pub const DEFAULT_PACKET_SYMBOLS: usize = 9;

const NARROW_PERIOD: u32 = 64;
const WIDE_PERIOD: u32 = 1 << 16;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SyncHeader {
    Data,
    Control,
}

impl SyncHeader {
    pub fn bits(self) -> u8 {
        match self {
            SyncHeader::Data => 0b01,
            SyncHeader::Control => 0b10,
        }
    }

    pub fn from_bits(bits: u8) -> Result<Self> {
        match bits {
            0b01 => Ok(SyncHeader::Data),
            0b10 => Ok(SyncHeader::Control),
            other => Err(Error::InvalidSyncHeader(other)),
        }
    }
}

/// A 64b/66b block. Control blocks are carried opaquely.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Block66 {
    pub sync: SyncHeader,
    pub payload: u64,
}

impl Block66 {
    pub fn data(payload: u64) -> Self {
        Block66 {
            sync: SyncHeader::Data,
            payload,
        }
    }
}

/// Wire identifier plus the receiver-side wrap counter.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct PacketIdentifier {
    pub epoch: u64,
    pub pid: u32,
}

impl PacketIdentifier {
    /// Identifier of the `index`-th packet of a stream.
    pub fn from_index(index: u64, period: u32) -> Self {
        PacketIdentifier {
            epoch: index / period as u64,
            pid: (index % period as u64) as u32,
        }
    }

    /// Absolute position in the stream.
    pub fn sequence(self, period: u32) -> u64 {
        self.epoch * period as u64 + self.pid as u64
    }

    /// `epoch * ceil(period / h) + floor(pid / h)`.
    pub fn generation(self, h: usize, period: u32) -> u64 {
        let h = h as u64;
        self.epoch * (period as u64).div_ceil(h) + self.pid as u64 / h
    }
}

/// Generation index for a wire identifier under the default 64-packet period.
pub fn generation_of(id: PacketIdentifier, h: usize) -> u64 {
    id.generation(h, NARROW_PERIOD)
}

/// How a packet's `N` symbols are laid out.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PacketLayout {
    /// 6-bit pid followed by `blocks` 66b blocks. `N = (6 + 66 * blocks) / 8`.
    Blocks { blocks: usize },
    /// 6-bit pid, one data sync header, then `N - 1` raw payload bytes. Used
    /// for sizes that are not block aligned.
    Compact { symbols: usize },
    /// 16-bit pid and `N - 2` payload bytes, for lane counts that do not
    /// divide 64. The pid period is the largest multiple of `h` that fits.
    Wide { symbols: usize, period: u32 },
}

impl PacketLayout {
    /// Picks the layout for `n` symbols per packet and `h` lanes.
    pub fn new(n: usize, h: usize) -> Result<Self> {
        if h == 0 {
            return Err(Error::config("h", "lane count must be at least 1"));
        }
        if n < 2 {
            return Err(Error::config("packet_symbols", format!("need at least 2 symbols, got {n}")));
        }
        if (NARROW_PERIOD as usize).is_multiple_of(h) {
            let bits = 8 * n - 6;
            if bits.is_multiple_of(66) {
                return Ok(PacketLayout::Blocks { blocks: bits / 66 });
            }
            return Ok(PacketLayout::Compact { symbols: n });
        }
        if n < 3 {
            return Err(Error::config(
                "packet_symbols",
                format!("16-bit identifiers (h={h} does not divide 64) need at least 3 symbols, got {n}"),
            ));
        }
        if h > WIDE_PERIOD as usize {
            return Err(Error::config("h", format!("{h} lanes exceed the identifier space")));
        }
        let period = WIDE_PERIOD - WIDE_PERIOD % h as u32;
        Ok(PacketLayout::Wide { symbols: n, period })
    }

    pub fn symbols(&self) -> usize {
        match *self {
            PacketLayout::Blocks { blocks } => (6 + 66 * blocks) / 8,
            PacketLayout::Compact { symbols } | PacketLayout::Wide { symbols, .. } => symbols,
        }
    }

    pub fn payload_bytes(&self) -> usize {
        match *self {
            PacketLayout::Blocks { blocks } => 8 * blocks,
            PacketLayout::Compact { symbols } => symbols - 1,
            PacketLayout::Wide { symbols, .. } => symbols - 2,
        }
    }

    pub fn pid_period(&self) -> u32 {
        match *self {
            PacketLayout::Blocks { .. } | PacketLayout::Compact { .. } => NARROW_PERIOD,
            PacketLayout::Wide { period, .. } => period,
        }
    }

    pub fn bits(&self) -> usize {
        8 * self.symbols()
    }

    /// Serialises identifier and payload. `payload` must be exactly
    /// [`payload_bytes`](Self::payload_bytes) long.
    pub fn encode(&self, pid: u32, payload: &[u8]) -> Vec<Gf256> {
        debug_assert_eq!(payload.len(), self.payload_bytes());
        debug_assert!(pid < self.pid_period());
        match *self {
            PacketLayout::Blocks { blocks } => {
                let blocks: Vec<Block66> = payload
                    .chunks_exact(8)
                    .take(blocks)
                    .map(|c| Block66::data(u64::from_be_bytes(c.try_into().unwrap())))
                    .collect();
                encode_blocks(pid as u8, &blocks)
            }
            PacketLayout::Compact { .. } => {
                let mut out = Vec::with_capacity(payload.len() + 1);
                out.push(Gf256(((pid as u8) << 2) | SyncHeader::Data.bits()));
                out.extend(payload.iter().copied().map(Gf256));
                out
            }
            PacketLayout::Wide { .. } => {
                let mut out = Vec::with_capacity(payload.len() + 2);
                out.extend((pid as u16).to_be_bytes().map(Gf256));
                out.extend(payload.iter().copied().map(Gf256));
                out
            }
        }
    }

    /// Splits wire symbols back into `(pid, payload)`.
    pub fn decode(&self, symbols: &[Gf256]) -> Result<(u32, Vec<u8>)> {
        if symbols.len() != self.symbols() {
            return Err(Error::DimensionMismatch {
                what: "packet symbols",
                expected: self.symbols(),
                got: symbols.len(),
            });
        }
        match *self {
            PacketLayout::Blocks { blocks } => {
                let (pid, blocks) = decode_blocks(symbols, blocks)?;
                let payload = blocks.iter().flat_map(|b| b.payload.to_be_bytes()).collect();
                Ok((pid as u32, payload))
            }
            PacketLayout::Compact { .. } => {
                SyncHeader::from_bits(symbols[0].0 & 0b11)?;
                Ok(((symbols[0].0 >> 2) as u32, symbols[1..].iter().map(|s| s.0).collect()))
            }
            PacketLayout::Wide { .. } => {
                let pid = u16::from_be_bytes([symbols[0].0, symbols[1].0]) as u32;
                Ok((pid, symbols[2..].iter().map(|s| s.0).collect()))
            }
        }
    }
}

struct BitWriter {
    out: Vec<u8>,
    acc: u64,
    nbits: u32,
}

impl BitWriter {
    fn new(cap: usize) -> Self {
        BitWriter {
            out: Vec::with_capacity(cap),
            acc: 0,
            nbits: 0,
        }
    }

    fn put(&mut self, value: u64, width: u32) {
        debug_assert!(width <= 32);
        self.acc = (self.acc << width) | (value & ((1u64 << width) - 1));
        self.nbits += width;
        while self.nbits >= 8 {
            self.nbits -= 8;
            self.out.push((self.acc >> self.nbits) as u8);
        }
    }

    fn finish(self) -> Vec<u8> {
        debug_assert_eq!(self.nbits, 0);
        self.out
    }
}

struct BitReader<'a> {
    bytes: &'a [Gf256],
    pos: usize,
}

impl BitReader<'_> {
    fn take(&mut self, width: usize) -> u64 {
        let mut v = 0u64;
        for _ in 0..width {
            let byte = self.bytes[self.pos / 8].0;
            let bit = (byte >> (7 - self.pos % 8)) & 1;
            v = (v << 1) | bit as u64;
            self.pos += 1;
        }
        v
    }
}

/// Bit-exact `[pid:6]([sync:2][payload:64])*` encoding.
pub fn encode_blocks(pid: u8, blocks: &[Block66]) -> Vec<Gf256> {
    let mut w = BitWriter::new((6 + 66 * blocks.len()) / 8);
    w.put(pid as u64, 6);
    for b in blocks {
        w.put(b.sync.bits() as u64, 2);
        w.put(b.payload >> 32, 32);
        w.put(b.payload & 0xFFFF_FFFF, 32);
    }
    w.finish().into_iter().map(Gf256).collect()
}

pub fn decode_blocks(symbols: &[Gf256], blocks: usize) -> Result<(u8, Vec<Block66>)> {
    let mut r = BitReader { bytes: symbols, pos: 0 };
    let pid = r.take(6) as u8;
    let mut out = Vec::with_capacity(blocks);
    for _ in 0..blocks {
        let sync = SyncHeader::from_bits(r.take(2) as u8)?;
        let payload = r.take(64);
        out.push(Block66 { sync, payload });
    }
    Ok((pid, out))
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FramedPacket {
    pub id: PacketIdentifier,
    pub symbols: Vec<Gf256>,
}

/// A framed byte stream. `byte_len` is the true stream length, used to strip
/// the zero padding of the last packet; `synthetic` counts all-zero packets
/// appended to complete the final generation.
#[derive(Debug, Clone)]
pub struct FramedStream {
    pub layout: PacketLayout,
    pub packets: Vec<FramedPacket>,
    pub byte_len: usize,
    pub synthetic: usize,
}

impl FramedStream {
    /// Number of packets carrying stream bytes.
    pub fn data_packets(&self) -> usize {
        self.packets.len() - self.synthetic
    }

    /// Appends zero packets until the packet count is a multiple of `h`.
    pub fn pad_to_generation(&mut self, h: usize) {
        let period = self.layout.pid_period();
        let zeros = vec![0u8; self.layout.payload_bytes()];
        while !self.packets.len().is_multiple_of(h) {
            let id = PacketIdentifier::from_index(self.packets.len() as u64, period);
            self.packets.push(FramedPacket {
                id,
                symbols: self.layout.encode(id.pid, &zeros),
            });
            self.synthetic += 1;
        }
    }

    /// The `h` packets of generation `g`, as natives in lane order. Only
    /// valid after [`pad_to_generation`](Self::pad_to_generation) or when the
    /// generation is complete.
    pub fn generation(&self, g: u64, h: usize) -> Result<Vec<NativePacket>> {
        let start = (g as usize * h).min(self.packets.len());
        let end = (start + h).min(self.packets.len());
        group_generation(&self.packets[start..end], h, self.layout.pid_period())
    }

    /// Original payload bytes of packet `seq`, padding included.
    pub fn payload_of(&self, seq: usize) -> Result<Vec<u8>> {
        Ok(self.layout.decode(&self.packets[seq].symbols)?.1)
    }
}

/// Cuts `bytes` into packets with consecutive wrapping identifiers. The tail
/// packet is zero padded.
pub fn frame_stream(bytes: &[u8], layout: PacketLayout) -> FramedStream {
    let chunk = layout.payload_bytes();
    let period = layout.pid_period();
    let mut scratch = vec![0u8; chunk];
    let packets = bytes
        .chunks(chunk)
        .enumerate()
        .map(|(k, c)| {
            let id = PacketIdentifier::from_index(k as u64, period);
            scratch[..c.len()].copy_from_slice(c);
            scratch[c.len()..].fill(0);
            FramedPacket {
                id,
                symbols: layout.encode(id.pid, &scratch),
            }
        })
        .collect();
    FramedStream {
        layout,
        packets,
        byte_len: bytes.len(),
        synthetic: 0,
    }
}

/// Maps `h` packets of one generation onto lanes: lowest pid becomes lane 0.
pub fn group_generation(packets: &[FramedPacket], h: usize, period: u32) -> Result<Vec<NativePacket>> {
    if packets.len() != h {
        return Err(Error::IncompleteGeneration {
            have: packets.len(),
            need: h,
        });
    }
    let generation = packets[0].id.generation(h, period);
    let mut sorted: Vec<&FramedPacket> = packets.iter().collect();
    sorted.sort_by_key(|p| p.id);
    sorted
        .into_iter()
        .enumerate()
        .map(|(lane, p)| {
            let g = p.id.generation(h, period);
            if g != generation {
                return Err(Error::GenerationMismatch { expected: generation, got: g });
            }
            Ok(NativePacket {
                generation,
                lane,
                symbols: p.symbols.clone(),
            })
        })
        .collect()
}

/// Reassembles the byte stream from `(sequence, symbols)` pairs in any order.
/// Missing sequences are skipped; the result is truncated to `byte_len`.
pub fn deframe<'a, I>(packets: I, layout: PacketLayout, byte_len: usize) -> Result<Vec<u8>>
where
    I: IntoIterator<Item = (u64, &'a [Gf256])>,
{
    let mut items: Vec<(u64, &[Gf256])> = packets.into_iter().collect();
    items.sort_by_key(|(seq, _)| *seq);
    let mut out = Vec::with_capacity(items.len() * layout.payload_bytes());
    for (_, syms) in items {
        out.extend(layout.decode(syms)?.1);
    }
    out.truncate(byte_len);
    Ok(out)
}

/// Recovers epochs from wrapping identifiers.
///
/// A pid more than half a period below the running maximum starts a new
/// epoch; one more than half a period above it is a straggler from the
/// previous epoch. Exact as long as no packet is displaced by half a period
/// or more, which holds for the per-path FIFO streams the simulator feeds it.
#[derive(Debug, Clone)]
pub struct PidUnwrapper {
    period: u32,
    epoch: u64,
    max_pid: Option<u32>,
}

impl PidUnwrapper {
    pub fn new(period: u32) -> Self {
        PidUnwrapper {
            period,
            epoch: 0,
            max_pid: None,
        }
    }

    pub fn observe(&mut self, pid: u32) -> PacketIdentifier {
        let half = self.period / 2;
        let Some(max) = self.max_pid else {
            self.max_pid = Some(pid);
            return PacketIdentifier { epoch: self.epoch, pid };
        };
        if pid < max && max - pid > half {
            self.epoch += 1;
            self.max_pid = Some(pid);
            PacketIdentifier { epoch: self.epoch, pid }
        } else if pid > max && pid - max > half {
            PacketIdentifier {
                epoch: self.epoch.saturating_sub(1),
                pid,
            }
        } else {
            self.max_pid = Some(max.max(pid));
            PacketIdentifier { epoch: self.epoch, pid }
        }
    }
}
