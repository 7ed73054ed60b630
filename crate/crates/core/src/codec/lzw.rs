//! Variable-width LZW as used by GIF image data.

use std::collections::HashMap;

const MAX_BITS: u32 = 12;
const MAX_CODES: u32 = 1 << MAX_BITS;

struct BitWriter {
    out: Vec<u8>,
    acc: u32,
    nbits: u32,
}

impl BitWriter {
    fn write(&mut self, code: u32, width: u32) {
        self.acc |= code << self.nbits;
        self.nbits += width;
        while self.nbits >= 8 {
            self.out.push(self.acc as u8);
            self.acc >>= 8;
            self.nbits -= 8;
        }
    }

    fn finish(mut self) -> Vec<u8> {
        if self.nbits > 0 {
            self.out.push(self.acc as u8);
        }
        self.out
    }
}

/// Compress `indices` with the given minimum code size (2..=8). Every index
/// must be below `1 << min_code_size`.
pub fn compress(indices: &[u8], min_code_size: u32) -> Vec<u8> {
    debug_assert!((2..=8).contains(&min_code_size));
    let clear = 1u32 << min_code_size;
    let eoi = clear + 1;
    let mut w = BitWriter {
        out: Vec::new(),
        acc: 0,
        nbits: 0,
    };
    let mut dict: HashMap<(u32, u8), u32> = HashMap::new();
    let mut next = eoi + 1;
    let mut width = min_code_size + 1;
    w.write(clear, width);

    let Some((&first, rest)) = indices.split_first() else {
        w.write(eoi, width);
        return w.finish();
    };
    let mut prefix = first as u32;
    for &k in rest {
        if let Some(&code) = dict.get(&(prefix, k)) {
            prefix = code;
            continue;
        }
        w.write(prefix, width);
        dict.insert((prefix, k), next);
        next += 1;
        // the decoder lags one entry behind, so widen once it could see `next`
        if next > (1 << width) && width < MAX_BITS {
            width += 1;
        }
        if next == MAX_CODES {
            w.write(clear, width);
            dict.clear();
            next = eoi + 1;
            width = min_code_size + 1;
        }
        prefix = k as u32;
    }
    w.write(prefix, width);
    // the decoder adds one more entry after the final code
    if next == (1 << width) && width < MAX_BITS && next > eoi + 1 {
        width += 1;
    }
    w.write(eoi, width);
    w.finish()
}

/// Split `data` into GIF sub-blocks (length-prefixed, at most 255 bytes)
/// followed by the zero-length terminator.
pub fn sub_blocks(data: &[u8]) -> Vec<u8> {
    let mut out = Vec::with_capacity(data.len() + data.len() / 255 + 2);
    for chunk in data.chunks(255) {
        out.push(chunk.len() as u8);
        out.extend_from_slice(chunk);
    }
    out.push(0);
    out
}
