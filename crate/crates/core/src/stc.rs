//! Binary syndrome-trellis code over pixel LSBs.
//!
//! The parity-check matrix is assembled from a small keyed submatrix of
//! `height` rows placed along the diagonal, one copy per message bit, each
//! copy shifted down one row — the construction of Filler, Judas &
//! Fridrich (2011). The embedder runs a Viterbi pass over the 2^height
//! trellis states and returns, among all stego bit-vectors whose syndrome
//! equals the message, one of minimal total cost. Extraction is a single
//! sparse matrix-vector product: no costs and no cover needed.
//!
//! Every submatrix column carries a 1 in its first and last rows; the
//! middle bits come from the keyed stream. The all-ones first row keeps
//! every message bit reachable regardless of costs, so a valid path always
//! exists.

use rand::Rng;

use crate::error::{Error, Result};

/// Code structure shared by embedder and extractor: column layout of the
/// parity-check matrix for a given cover length, message length, and
/// constraint height.
#[derive(Clone, Debug)]
pub struct TrellisCode {
    height: u32,
    cover_len: usize,
    msg_len: usize,
    /// Column bit-pattern per cover position, truncation already applied.
    cols: Vec<u16>,
    /// Start offset of each message block; length `msg_len + 1`.
    block_starts: Vec<usize>,
}

pub const MIN_CONSTRAINT_HEIGHT: u32 = 6;
pub const MAX_CONSTRAINT_HEIGHT: u32 = 12;

impl TrellisCode {
    /// Lay out the code. `rng` supplies the submatrix bits; both sides must
    /// derive it from the same key stream.
    pub fn new(
        cover_len: usize,
        msg_len: usize,
        height: u32,
        rng: &mut impl Rng,
    ) -> Result<Self> {
        if !(MIN_CONSTRAINT_HEIGHT..=MAX_CONSTRAINT_HEIGHT).contains(&height) {
            return Err(Error::InvalidParameter(format!(
                "constraint height {height} outside {MIN_CONSTRAINT_HEIGHT}..={MAX_CONSTRAINT_HEIGHT}"
            )));
        }
        if msg_len == 0 {
            return Err(Error::InvalidParameter(
                "message must hold at least one bit".into(),
            ));
        }
        if cover_len < 2 * msg_len {
            return Err(Error::InfeasiblePayload(format!(
                "{msg_len} message bits need at least {} cover pixels, have {cover_len}",
                2 * msg_len
            )));
        }

        // Message bit b consumes `base` columns, plus one more for the
        // first `extra` blocks so every cover position is used.
        let base = cover_len / msg_len;
        let extra = cover_len - base * msg_len;
        let widest = base + usize::from(extra > 0);

        let first = 1u16;
        let last = 1u16 << (height - 1);
        let middle_mask = ((1u16 << (height - 1)) - 1) & !1u16;
        let master: Vec<u16> = (0..widest)
            .map(|_| first | last | (rng.gen::<u16>() & middle_mask))
            .collect();

        let mut cols = Vec::with_capacity(cover_len);
        let mut block_starts = Vec::with_capacity(msg_len + 1);
        for b in 0..msg_len {
            block_starts.push(cols.len());
            let width = base + usize::from(b < extra);
            // Rows past the end of the message do not exist; drop their bits.
            let live = (msg_len - b).min(height as usize);
            let mask = if live >= 16 { u16::MAX } else { (1u16 << live) - 1 };
            for j in 0..width {
                cols.push(master[j] & mask);
            }
        }
        block_starts.push(cols.len());
        debug_assert_eq!(cols.len(), cover_len);

        Ok(TrellisCode {
            height,
            cover_len,
            msg_len,
            cols,
            block_starts,
        })
    }

    pub fn height(&self) -> u32 {
        self.height
    }

    pub fn cover_len(&self) -> usize {
        self.cover_len
    }

    pub fn msg_len(&self) -> usize {
        self.msg_len
    }

    /// Cover positions feeding message bit `b`.
    pub fn block_range(&self, b: usize) -> std::ops::Range<usize> {
        self.block_starts[b]..self.block_starts[b + 1]
    }

    /// Parity-check column for one cover position, bit k = row `block + k`.
    pub fn column_bits(&self, position: usize) -> u16 {
        self.cols[position]
    }

    /// Minimum-cost coset member: returns per-position flip indicators and
    /// the total cost paid. The syndrome of `cover ^ flips` equals `msg`.
    pub fn embed_min_cost(
        &self,
        cover_bits: &[u8],
        costs: &[f64],
        msg: &[u8],
    ) -> Result<(Vec<u8>, f64)> {
        if cover_bits.len() != self.cover_len || costs.len() != self.cover_len {
            return Err(Error::InvalidParameter(
                "cover bits and costs must match the code's cover length".into(),
            ));
        }
        if msg.len() != self.msg_len {
            return Err(Error::InvalidParameter(format!(
                "message length {} does not match the code's {}",
                msg.len(),
                self.msg_len
            )));
        }
        debug_assert!(cover_bits.iter().all(|&b| b <= 1));
        debug_assert!(msg.iter().all(|&b| b <= 1));

        let states = 1usize << self.height;
        let words_per_col = states / 64; // height >= 6 so states >= 64

        let mut cur = vec![f64::INFINITY; states];
        let mut next = vec![f64::INFINITY; states];
        cur[0] = 0.0;

        // One decision bit per (position, post-state): set when the
        // minimal path into the state flips the stego bit to 1.
        let mut decisions = vec![0u64; self.cover_len * words_per_col];

        for b in 0..self.msg_len {
            for i in self.block_range(b) {
                let hc = self.cols[i] as usize;
                let (cost_keep0, cost_keep1) = if cover_bits[i] == 0 {
                    (0.0, costs[i])
                } else {
                    (costs[i], 0.0)
                };
                let dwords = &mut decisions[i * words_per_col..(i + 1) * words_per_col];
                for s in 0..states {
                    let via_zero = cur[s] + cost_keep0;
                    let via_one = cur[s ^ hc] + cost_keep1;
                    if via_one < via_zero {
                        next[s] = via_one;
                        dwords[s / 64] |= 1u64 << (s % 64);
                    } else {
                        next[s] = via_zero;
                    }
                }
                std::mem::swap(&mut cur, &mut next);
            }
            // Row b is now fully determined: keep paths whose parity
            // matches the message bit, then slide the row window down.
            let want = msg[b] as usize;
            for s in 0..states / 2 {
                next[s] = cur[(s << 1) | want];
            }
            for s in states / 2..states {
                next[s] = f64::INFINITY;
            }
            std::mem::swap(&mut cur, &mut next);
        }

        let total = cur[0];
        if !total.is_finite() {
            return Err(Error::InfeasiblePayload(
                "no trellis path satisfies the requested syndrome".into(),
            ));
        }

        // Walk the decisions backwards from the unique terminal state.
        let mut flips = vec![0u8; self.cover_len];
        let mut state = 0usize;
        for b in (0..self.msg_len).rev() {
            state = (state << 1) | msg[b] as usize;
            for i in self.block_range(b).rev() {
                let dwords = &decisions[i * words_per_col..(i + 1) * words_per_col];
                let y = ((dwords[state / 64] >> (state % 64)) & 1) as u8;
                flips[i] = y ^ cover_bits[i];
                if y == 1 {
                    state ^= self.cols[i] as usize;
                }
            }
        }
        debug_assert_eq!(state, 0, "backtrack must close at the start state");

        Ok((flips, total))
    }

    /// Syndrome of a stego bit-vector: the extracted message.
    pub fn syndrome(&self, stego_bits: &[u8]) -> Result<Vec<u8>> {
        if stego_bits.len() != self.cover_len {
            return Err(Error::InvalidParameter(
                "stego bits must match the code's cover length".into(),
            ));
        }
        let mut register = 0usize;
        let mut out = Vec::with_capacity(self.msg_len);
        for b in 0..self.msg_len {
            for i in self.block_range(b) {
                if stego_bits[i] == 1 {
                    register ^= self.cols[i] as usize;
                }
            }
            out.push((register & 1) as u8);
            register >>= 1;
        }
        Ok(out)
    }
}
