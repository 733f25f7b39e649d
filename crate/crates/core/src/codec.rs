//! Generation-based random linear coding.
//!
//! The sender multiplies the `h` native packets of a generation by a random
//! full-rank `h x h` matrix; coded packet `r` carries row `r` of that matrix
//! as its coefficient vector, so
//! `coded[r][j] = sum_i matrix[r][i] * native[i][j]`.
//! The receiver keeps one [`GenerationDecoder`] per generation and runs
//! incremental Gauss-Jordan elimination on arrival.

use rand::RngCore;

use crate::error::{Error, Result};
use crate::gf256::{axpy, scale, Gf256};

/// Resampling cap for [`EncodingMatrix::sample`]. A singular draw has
/// probability < 1/255 per attempt for any h, so hitting this means the
/// random source is broken.
pub const SAMPLE_RETRY_CAP: usize = 64;

/// One uncoded packet taken from Ethernet lane `lane`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NativePacket {
    pub generation: u64,
    pub lane: usize,
    pub symbols: Vec<Gf256>,
}

/// A linear combination of the natives of one generation, tagged with the
/// global encoding vector that produced it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CodedPacket {
    pub generation: u64,
    pub coeffs: Vec<Gf256>,
    pub symbols: Vec<Gf256>,
}

/// Square coefficient matrix applied at the sender, stored row-major.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EncodingMatrix {
    h: usize,
    entries: Vec<Gf256>,
}

impl EncodingMatrix {
    pub fn identity(h: usize) -> Self {
        let mut entries = vec![Gf256::ZERO; h * h];
        for i in 0..h {
            entries[i * h + i] = Gf256::ONE;
        }
        EncodingMatrix { h, entries }
    }

    /// Builds a matrix from explicit rows. Rejects ragged or singular input.
    pub fn from_rows(rows: &[Vec<Gf256>]) -> Result<Self> {
        let h = rows.len();
        for row in rows {
            if row.len() != h {
                return Err(Error::DimensionMismatch {
                    what: "matrix row",
                    expected: h,
                    got: row.len(),
                });
            }
        }
        let entries: Vec<Gf256> = rows.iter().flatten().copied().collect();
        let m = EncodingMatrix { h, entries };
        let rank = m.rank();
        if rank != h {
            return Err(Error::InsufficientRank { rank, needed: h });
        }
        Ok(m)
    }

    /// Draws uniformly random entries until the matrix is full rank.
    pub fn sample<R: RngCore + ?Sized>(h: usize, rng: &mut R) -> Result<Self> {
        if h == 0 {
            return Err(Error::config("h", "lane count must be at least 1"));
        }
        let mut buf = vec![0u8; h * h];
        for _ in 0..SAMPLE_RETRY_CAP {
            rng.fill_bytes(&mut buf);
            let m = EncodingMatrix {
                h,
                entries: buf.iter().copied().map(Gf256).collect(),
            };
            if m.rank() == h {
                return Ok(m);
            }
        }
        Err(Error::SingularMatrix {
            h,
            attempts: SAMPLE_RETRY_CAP,
        })
    }

    pub fn h(&self) -> usize {
        self.h
    }

    pub fn row(&self, r: usize) -> &[Gf256] {
        &self.entries[r * self.h..(r + 1) * self.h]
    }

    pub fn get(&self, r: usize, c: usize) -> Gf256 {
        self.entries[r * self.h + c]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[Gf256]> {
        self.entries.chunks(self.h.max(1))
    }

    pub fn rank(&self) -> usize {
        rank(self.rows().map(<[Gf256]>::to_vec).collect())
    }
}

/// Rank of a set of row vectors, by forward elimination.
pub fn rank(mut rows: Vec<Vec<Gf256>>) -> usize {
    let cols = rows.first().map_or(0, Vec::len);
    let mut r = 0;
    for c in 0..cols {
        let Some(p) = (r..rows.len()).find(|&i| !rows[i][c].is_zero()) else {
            continue;
        };
        rows.swap(r, p);
        let inv = rows[r][c].inv().expect("pivot is nonzero");
        scale(&mut rows[r], inv);
        let pivot_row = rows[r].clone();
        for (i, row) in rows.iter_mut().enumerate() {
            if i != r {
                let f = row[c];
                axpy(row, f, &pivot_row);
            }
        }
        r += 1;
        if r == rows.len() {
            break;
        }
    }
    r
}

/// Encodes one generation. `natives` must be the generation's `h` packets in
/// lane order, all of the same length.
pub fn encode_generation(matrix: &EncodingMatrix, natives: &[NativePacket]) -> Result<Vec<CodedPacket>> {
    let h = matrix.h();
    if natives.len() != h {
        return Err(Error::DimensionMismatch {
            what: "native packet count",
            expected: h,
            got: natives.len(),
        });
    }
    let generation = natives[0].generation;
    let n = natives[0].symbols.len();
    for (lane, p) in natives.iter().enumerate() {
        if p.generation != generation {
            return Err(Error::GenerationMismatch {
                expected: generation,
                got: p.generation,
            });
        }
        if p.lane != lane {
            return Err(Error::DimensionMismatch {
                what: "lane order",
                expected: lane,
                got: p.lane,
            });
        }
        if p.symbols.len() != n {
            return Err(Error::DimensionMismatch {
                what: "symbol count",
                expected: n,
                got: p.symbols.len(),
            });
        }
    }

    Ok(matrix
        .rows()
        .map(|coeffs| {
            let mut symbols = vec![Gf256::ZERO; n];
            for (g, x) in coeffs.iter().zip(natives) {
                axpy(&mut symbols, *g, &x.symbols);
            }
            CodedPacket {
                generation,
                coeffs: coeffs.to_vec(),
                symbols,
            }
        })
        .collect())
}

#[derive(Debug, Clone)]
struct Row {
    pivot: usize,
    coeffs: Vec<Gf256>,
    symbols: Vec<Gf256>,
}

/// Receiver-side elimination state for one generation.
///
/// Rows are kept in reduced row-echelon form: each stored row has a unit
/// pivot, and every other stored row is zero in that pivot column. Once the
/// rank reaches `h` the symbol rows are the native packets.
#[derive(Debug, Clone)]
pub struct GenerationDecoder {
    generation: u64,
    h: usize,
    n: usize,
    rows: Vec<Row>,
}

impl GenerationDecoder {
    pub fn new(generation: u64, h: usize, n: usize) -> Self {
        GenerationDecoder {
            generation,
            h,
            n,
            rows: Vec::with_capacity(h),
        }
    }

    pub fn generation(&self) -> u64 {
        self.generation
    }

    pub fn h(&self) -> usize {
        self.h
    }

    pub fn rank(&self) -> usize {
        self.rows.len()
    }

    pub fn is_complete(&self) -> bool {
        self.rows.len() == self.h
    }

    fn check(&self, pkt: &CodedPacket) -> Result<()> {
        if pkt.generation != self.generation {
            return Err(Error::GenerationMismatch {
                expected: self.generation,
                got: pkt.generation,
            });
        }
        if pkt.coeffs.len() != self.h {
            return Err(Error::DimensionMismatch {
                what: "coefficient vector",
                expected: self.h,
                got: pkt.coeffs.len(),
            });
        }
        if pkt.symbols.len() != self.n {
            return Err(Error::DimensionMismatch {
                what: "symbol count",
                expected: self.n,
                got: pkt.symbols.len(),
            });
        }
        Ok(())
    }

    fn reduce_coeffs(&self, coeffs: &mut [Gf256]) {
        for row in &self.rows {
            let f = coeffs[row.pivot];
            axpy(coeffs, f, &row.coeffs);
        }
    }

    /// Whether `pkt` would raise the rank. Does not change state.
    pub fn is_innovative(&self, pkt: &CodedPacket) -> Result<bool> {
        self.check(pkt)?;
        if self.is_complete() {
            return Ok(false);
        }
        let mut coeffs = pkt.coeffs.clone();
        self.reduce_coeffs(&mut coeffs);
        Ok(coeffs.iter().any(|c| !c.is_zero()))
    }

    /// Feeds one coded packet. Returns `true` and stores the reduced row iff
    /// the packet is innovative; otherwise the decoder is left untouched.
    pub fn receive(&mut self, pkt: &CodedPacket) -> Result<bool> {
        self.check(pkt)?;
        if self.is_complete() {
            return Ok(false);
        }
        let mut coeffs = pkt.coeffs.clone();
        let mut symbols = pkt.symbols.clone();
        for row in &self.rows {
            let f = coeffs[row.pivot];
            if !f.is_zero() {
                axpy(&mut coeffs, f, &row.coeffs);
                axpy(&mut symbols, f, &row.symbols);
            }
        }
        let Some(pivot) = coeffs.iter().position(|c| !c.is_zero()) else {
            return Ok(false);
        };
        let inv = coeffs[pivot].inv()?;
        scale(&mut coeffs, inv);
        scale(&mut symbols, inv);
        for row in &mut self.rows {
            let f = row.coeffs[pivot];
            if !f.is_zero() {
                axpy(&mut row.coeffs, f, &coeffs);
                axpy(&mut row.symbols, f, &symbols);
            }
        }
        self.rows.push(Row {
            pivot,
            coeffs,
            symbols,
        });
        Ok(true)
    }

    /// Recovers the `h` natives, ordered by lane.
    pub fn decode(&self) -> Result<Vec<NativePacket>> {
        if !self.is_complete() {
            return Err(Error::InsufficientRank {
                rank: self.rank(),
                needed: self.h,
            });
        }
        let mut out: Vec<NativePacket> = self
            .rows
            .iter()
            .map(|r| NativePacket {
                generation: self.generation,
                lane: r.pivot,
                symbols: r.symbols.clone(),
            })
            .collect();
        out.sort_by_key(|p| p.lane);
        Ok(out)
    }
}
