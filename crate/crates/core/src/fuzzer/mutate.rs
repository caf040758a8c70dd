use rand::Rng;

pub const DEFAULT_MAX_INPUT_LEN: usize = 4096;

pub const INTERESTING_BYTES: [u8; 9] = [0x00, 0x01, 0x10, 0x20, 0x40, 0x64, 0x7f, 0x80, 0xff];

const MAX_ARITH: u8 = 35;
const MAX_CHUNK: usize = 32;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MutationOp {
    BitFlip,
    RandomByte,
    InterestingByte,
    AddSub,
    ChunkDelete,
    ChunkDuplicate,
    Splice,
}

impl MutationOp {
    pub const ALL: [MutationOp; 7] = [
        MutationOp::BitFlip,
        MutationOp::RandomByte,
        MutationOp::InterestingByte,
        MutationOp::AddSub,
        MutationOp::ChunkDelete,
        MutationOp::ChunkDuplicate,
        MutationOp::Splice,
    ];
}

/// Applies one operation in place. Returns `false` when the operation does
/// not apply (empty buffer, no splice partner) and nothing changed.
pub fn apply_op<R: Rng>(op: MutationOp, buf: &mut Vec<u8>, splice: Option<&[u8]>, rng: &mut R) -> bool {
    let len = buf.len();
    match op {
        MutationOp::BitFlip if len > 0 => {
            let i = rng.gen_range(0..len);
            buf[i] ^= 1 << rng.gen_range(0..8);
        }
        MutationOp::RandomByte if len > 0 => {
            let i = rng.gen_range(0..len);
            buf[i] = rng.gen();
        }
        // On an empty input a byte store grows it instead.
        MutationOp::RandomByte => buf.push(rng.gen()),
        MutationOp::InterestingByte if len > 0 => {
            let i = rng.gen_range(0..len);
            buf[i] = INTERESTING_BYTES[rng.gen_range(0..INTERESTING_BYTES.len())];
        }
        MutationOp::InterestingByte => {
            buf.push(INTERESTING_BYTES[rng.gen_range(0..INTERESTING_BYTES.len())])
        }
        MutationOp::AddSub if len > 0 => {
            let i = rng.gen_range(0..len);
            let d = rng.gen_range(1..=MAX_ARITH);
            buf[i] = if rng.gen() { buf[i].wrapping_add(d) } else { buf[i].wrapping_sub(d) };
        }
        MutationOp::ChunkDelete if len > 0 => {
            let n = rng.gen_range(1..=len.min(MAX_CHUNK));
            let start = rng.gen_range(0..=len - n);
            buf.drain(start..start + n);
        }
        MutationOp::ChunkDuplicate if len > 0 => {
            let n = rng.gen_range(1..=len.min(MAX_CHUNK));
            let start = rng.gen_range(0..=len - n);
            let at = rng.gen_range(0..=len);
            let chunk: Vec<u8> = buf[start..start + n].to_vec();
            buf.splice(at..at, chunk);
        }
        MutationOp::Splice => {
            let Some(other) = splice.filter(|o| !o.is_empty() || len > 0) else { return false };
            let cut = rng.gen_range(0..=len);
            let from = rng.gen_range(0..=other.len());
            buf.truncate(cut);
            buf.extend_from_slice(&other[from..]);
        }
        _ => return false,
    }
    true
}

/// Stacks `2^k` operations (`k` uniform in `0..=6`, so 1 to 64), each drawn
/// uniformly among those that apply. The result always differs from `input`
/// and is at most `max_len` bytes long.
pub fn mutate<R: Rng>(input: &[u8], splice: Option<&[u8]>, max_len: usize, rng: &mut R) -> Vec<u8> {
    let mut out = input.to_vec();
    let stack = 1usize << rng.gen_range(0..=6);
    for _ in 0..stack {
        loop {
            let op = MutationOp::ALL[rng.gen_range(0..MutationOp::ALL.len())];
            if apply_op(op, &mut out, splice, rng) {
                break;
            }
        }
        if out.len() > max_len {
            out.truncate(max_len);
        }
    }
    if out == input {
        if out.is_empty() || (out.len() < max_len && rng.gen_bool(0.5)) {
            out.push(rng.gen());
        } else {
            let i = rng.gen_range(0..out.len());
            out[i] ^= 1 << rng.gen_range(0..8);
        }
    }
    out
}
