//! Binary PGM (P5) input/output for 128x64 8-bit frames.

use std::fs;
use std::io::{Read, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::sensor::{GrayFrame, HEIGHT, PIXELS, WIDTH};

fn format_err(path: &Path, message: impl Into<String>) -> Error {
    Error::Format {
        path: path.display().to_string(),
        message: message.into(),
    }
}

/// Reads one P5 frame. Only 128x64 with maxval 255 is accepted.
pub fn read_pgm(path: &Path) -> Result<GrayFrame> {
    let mut bytes = Vec::new();
    fs::File::open(path)
        .and_then(|mut f| f.read_to_end(&mut bytes))
        .map_err(|e| Error::io(path.display().to_string(), e))?;
    parse_pgm(&bytes).map_err(|msg| format_err(path, msg))
}

fn parse_pgm(bytes: &[u8]) -> std::result::Result<GrayFrame, String> {
    let mut pos = 0usize;

    let next_token = |pos: &mut usize| -> std::result::Result<String, String> {
        // Skip whitespace and '#' comments between header fields.
        loop {
            while *pos < bytes.len() && bytes[*pos].is_ascii_whitespace() {
                *pos += 1;
            }
            if *pos < bytes.len() && bytes[*pos] == b'#' {
                while *pos < bytes.len() && bytes[*pos] != b'\n' {
                    *pos += 1;
                }
            } else {
                break;
            }
        }
        let start = *pos;
        while *pos < bytes.len() && !bytes[*pos].is_ascii_whitespace() {
            *pos += 1;
        }
        if start == *pos {
            return Err("unexpected end of header".into());
        }
        String::from_utf8(bytes[start..*pos].to_vec()).map_err(|_| "non-ASCII header".into())
    };

    let magic = next_token(&mut pos)?;
    if magic != "P5" {
        return Err(format!("not a binary PGM (magic '{magic}', expected 'P5')"));
    }
    let width: usize = next_token(&mut pos)?
        .parse()
        .map_err(|_| "bad width".to_string())?;
    let height: usize = next_token(&mut pos)?
        .parse()
        .map_err(|_| "bad height".to_string())?;
    let maxval: usize = next_token(&mut pos)?
        .parse()
        .map_err(|_| "bad maxval".to_string())?;
    if width != WIDTH || height != HEIGHT {
        return Err(format!(
            "frame is {width}x{height}, expected {WIDTH}x{HEIGHT}"
        ));
    }
    if maxval != 255 {
        return Err(format!("maxval {maxval}, expected 255"));
    }
    // Exactly one whitespace byte separates the header from the raster.
    if pos >= bytes.len() || !bytes[pos].is_ascii_whitespace() {
        return Err("missing raster separator".into());
    }
    pos += 1;
    let raster = &bytes[pos..];
    if raster.len() < PIXELS {
        return Err(format!(
            "raster has {} bytes, expected {PIXELS}",
            raster.len()
        ));
    }
    Ok(GrayFrame::new(raster[..PIXELS].to_vec()).expect("sized above"))
}

/// Writes one frame as binary P5.
pub fn write_pgm(path: &Path, frame: &GrayFrame) -> Result<()> {
    let mut out = Vec::with_capacity(PIXELS + 32);
    out.extend_from_slice(format!("P5\n{WIDTH} {HEIGHT}\n255\n").as_bytes());
    out.extend_from_slice(frame.pixels());
    fs::File::create(path)
        .and_then(|mut f| f.write_all(&out))
        .map_err(|e| Error::io(path.display().to_string(), e))
}

/// Reads every `*.pgm` file in a directory in lexicographic order.
pub fn read_frame_dir(dir: &Path) -> Result<Vec<GrayFrame>> {
    let mut paths: Vec<_> = fs::read_dir(dir)
        .map_err(|e| Error::io(dir.display().to_string(), e))?
        .filter_map(|entry| entry.ok().map(|e| e.path()))
        .filter(|p| p.extension().map(|e| e == "pgm").unwrap_or(false))
        .collect();
    paths.sort();
    if paths.is_empty() {
        return Err(format_err(dir, "no .pgm frames found"));
    }
    paths.iter().map(|p| read_pgm(p)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("frame.pgm");
        let mut frame = GrayFrame::filled(17);
        frame.set(10, 20, 200);
        write_pgm(&path, &frame).unwrap();
        let back = read_pgm(&path).unwrap();
        assert_eq!(back, frame);
    }

    #[test]
    fn rejects_wrong_dimensions() {
        let bytes = b"P5\n4 4\n255\n0000000000000000".to_vec();
        assert!(parse_pgm(&bytes).is_err());
    }

    #[test]
    fn accepts_comments_in_header() {
        let mut bytes = b"P5\n# generated\n128 64\n# depth\n255\n".to_vec();
        bytes.extend(vec![9u8; PIXELS]);
        let frame = parse_pgm(&bytes).unwrap();
        assert_eq!(frame.get(0, 0), 9);
    }
}
