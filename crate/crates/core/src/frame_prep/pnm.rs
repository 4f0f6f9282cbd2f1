//! Binary PGM (P5) and PPM (P6) with maxval 255.

use std::fs;
use std::path::Path;

use super::{Frame, FramePrepError, Result};

struct Header {
    channels: u8,
    width: u32,
    height: u32,
    data_start: usize,
}

fn parse_header(bytes: &[u8]) -> Result<Header> {
    let err = |m: &str| FramePrepError::Pnm(m.to_string());
    let channels = match bytes.get(..2) {
        Some(b"P5") => 1,
        Some(b"P6") => 3,
        _ => return Err(err("expected P5 or P6 magic")),
    };
    let mut pos = 2;
    let mut fields = [0u32; 3];
    for field in fields.iter_mut() {
        // whitespace and comments
        loop {
            match bytes.get(pos) {
                Some(b) if b.is_ascii_whitespace() => pos += 1,
                Some(b'#') => {
                    while bytes.get(pos).is_some_and(|&b| b != b'\n') {
                        pos += 1;
                    }
                }
                Some(_) => break,
                None => return Err(err("truncated header")),
            }
        }
        let start = pos;
        while bytes.get(pos).is_some_and(u8::is_ascii_digit) {
            pos += 1;
        }
        if start == pos {
            return Err(err("expected a decimal header field"));
        }
        *field = std::str::from_utf8(&bytes[start..pos])
            .ok()
            .and_then(|s| s.parse().ok())
            .ok_or_else(|| err("header field out of range"))?;
    }
    match bytes.get(pos) {
        Some(b) if b.is_ascii_whitespace() => pos += 1,
        _ => return Err(err("missing whitespace after maxval")),
    }
    let [width, height, maxval] = fields;
    if maxval != 255 {
        return Err(FramePrepError::Pnm(format!("maxval {maxval} unsupported, need 255")));
    }
    Ok(Header {
        channels,
        width,
        height,
        data_start: pos,
    })
}

pub fn decode_pnm(bytes: &[u8], index: u64) -> Result<Frame> {
    let h = parse_header(bytes)?;
    let n = h.width as usize * h.height as usize * h.channels as usize;
    let data = bytes
        .get(h.data_start..h.data_start + n)
        .ok_or_else(|| FramePrepError::Pnm(format!("expected {n} sample bytes")))?;
    Frame::new(h.width, h.height, h.channels, data.to_vec(), index)
}

pub fn encode_pnm(frame: &Frame) -> Vec<u8> {
    let magic = if frame.channels() == 1 { "P5" } else { "P6" };
    let mut out = format!("{magic}\n{} {}\n255\n", frame.width(), frame.height()).into_bytes();
    out.extend_from_slice(frame.pixels());
    out
}

pub fn read_pnm(path: impl AsRef<Path>, index: u64) -> Result<Frame> {
    decode_pnm(&fs::read(path)?, index)
}

pub fn write_pnm(path: impl AsRef<Path>, frame: &Frame) -> Result<()> {
    fs::write(path, encode_pnm(frame))?;
    Ok(())
}
