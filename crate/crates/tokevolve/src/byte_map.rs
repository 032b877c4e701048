//! Byte-to-unicode mapping for byte-level BPE.
//!
//! Every one of the 256 byte values is mapped to a distinct printable
//! unicode scalar so token strings stay readable and round-trippable.
//! Printable ASCII and two latin-1 ranges map to themselves; everything
//! else is shifted up by 256. The space byte (0x20) lands on 'Ġ' (U+0120),
//! which therefore acts as the word boundary marker inside tokens.

use std::collections::HashMap;

/// Bijective map between the 256 byte values and printable unicode chars.
#[derive(Debug, Clone)]
pub struct ByteUnicodeMap {
    forward: [char; 256],
    inverse: HashMap<char, u8>,
}

/// The printable stand-in for the space byte.
pub const BOUNDARY_CHAR: char = '\u{120}'; // Ġ

impl ByteUnicodeMap {
    pub fn byte_to_char(&self, b: u8) -> char {
        self.forward[b as usize]
    }

    pub fn char_to_byte(&self, c: char) -> Option<u8> {
        self.inverse.get(&c).copied()
    }

    /// Map a str to its symbol representation (one char per input byte).
    pub fn map_str(&self, s: &str) -> String {
        s.bytes().map(|b| self.byte_to_char(b)).collect()
    }

    /// Recover the original bytes from a symbol string. Returns `None` if a
    /// char is outside the image of the map.
    pub fn unmap_str(&self, symbols: &str) -> Option<Vec<u8>> {
        symbols.chars().map(|c| self.char_to_byte(c)).collect()
    }
}

impl PartialEq for ByteUnicodeMap {
    fn eq(&self, other: &Self) -> bool {
        self.forward == other.forward
    }
}

impl Default for ByteUnicodeMap {
    fn default() -> Self {
        build_byte_map()
    }
}

/// Build the standard byte-level BPE byte map: bytes in the printable
/// ranges 0x21..=0x7E, 0xA1..=0xAC and 0xAE..=0xFF map to themselves,
/// the rest are assigned 0x100 + n in byte order.
pub fn build_byte_map() -> ByteUnicodeMap {
    let mut forward = ['\0'; 256];
    let mut shifted = 0u32;
    for b in 0u16..256 {
        let printable = (0x21..=0x7E).contains(&b)
            || (0xA1..=0xAC).contains(&b)
            || (0xAE..=0xFF).contains(&b);
        let c = if printable {
            char::from_u32(b as u32).unwrap()
        } else {
            let c = char::from_u32(0x100 + shifted).unwrap();
            shifted += 1;
            c
        };
        forward[b as usize] = c;
    }
    let inverse = forward
        .iter()
        .enumerate()
        .map(|(b, &c)| (c, b as u8))
        .collect();
    ByteUnicodeMap { forward, inverse }
}

/// Split text into symbol-string words.
///
/// Splits on whitespace; a single space immediately before a word is folded
/// into that word as a leading Ġ. All other whitespace chars become their
/// own single-char words, so concatenating the outputs and inverting the
/// byte map reproduces the input bytes exactly.
pub fn pre_tokenize(text: &str, byte_map: &ByteUnicodeMap) -> Vec<String> {
    let mut words = Vec::new();
    let mut pending_ws: Vec<char> = Vec::new();
    let mut current = String::new();

    let flush_ws = |pending: &mut Vec<char>, words: &mut Vec<String>, map: &ByteUnicodeMap| {
        for &c in pending.iter() {
            let mut buf = [0u8; 4];
            words.push(map.map_str(c.encode_utf8(&mut buf)));
        }
        pending.clear();
    };

    for c in text.chars() {
        if c.is_whitespace() {
            if !current.is_empty() {
                words.push(std::mem::take(&mut current));
            }
            pending_ws.push(c);
        } else {
            if current.is_empty() {
                // fold exactly one preceding space into this word
                if pending_ws.last() == Some(&' ') {
                    pending_ws.pop();
                    flush_ws(&mut pending_ws, &mut words, byte_map);
                    current.push(BOUNDARY_CHAR);
                } else {
                    flush_ws(&mut pending_ws, &mut words, byte_map);
                }
            }
            let mut buf = [0u8; 4];
            current.push_str(&byte_map.map_str(c.encode_utf8(&mut buf)));
        }
    }
    if !current.is_empty() {
        words.push(current);
    }
    flush_ws(&mut pending_ws, &mut words, byte_map);
    words
}
