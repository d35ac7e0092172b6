//! Behavioral model of the 128x64 spatial-contrast binary imager.
//!
//! The chip binarizes local spatial contrast on the focal plane, differences
//! successive binary frames, and reads the result out in one of two modes:
//! in `Idle` only the number of asserted pixels leaves the chip, in `Active`
//! every asserted pixel is dispatched as an 8-bit word (7-bit column plus
//! sign) in raster order, with an end-of-row pulse delimiting each of the
//! 64 rows.

use crate::error::ProtocolError;

/// Columns in the pixel array (the 7-bit readout coordinate).
pub const WIDTH: usize = 128;
/// Rows in the pixel array (recovered from end-of-row pulses).
pub const HEIGHT: usize = 64;
/// Total pixel count.
pub const PIXELS: usize = WIDTH * HEIGHT;

/// 8-bit grayscale input scene, row-major, fixed 128x64.
///
/// The real chip senses light directly; frames here stand in for the
/// illuminated scene.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GrayFrame {
    pixels: Vec<u8>,
}

impl GrayFrame {
    /// Wraps a row-major pixel buffer. The buffer length must be exactly
    /// `PIXELS`.
    pub fn new(pixels: Vec<u8>) -> Option<Self> {
        (pixels.len() == PIXELS).then_some(GrayFrame { pixels })
    }

    pub fn filled(value: u8) -> Self {
        GrayFrame {
            pixels: vec![value; PIXELS],
        }
    }

    #[inline]
    pub fn get(&self, row: usize, col: usize) -> u8 {
        self.pixels[row * WIDTH + col]
    }

    #[inline]
    pub fn set(&mut self, row: usize, col: usize, value: u8) {
        self.pixels[row * WIDTH + col] = value;
    }

    pub fn pixels(&self) -> &[u8] {
        &self.pixels
    }
}

/// One bit per pixel: asserted where local spatial contrast exceeds the
/// binarization threshold.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BinaryContrastMap {
    bits: Vec<bool>,
}

impl BinaryContrastMap {
    pub fn empty() -> Self {
        BinaryContrastMap {
            bits: vec![false; PIXELS],
        }
    }

    #[inline]
    pub fn get(&self, row: usize, col: usize) -> bool {
        self.bits[row * WIDTH + col]
    }

    #[inline]
    pub fn set(&mut self, row: usize, col: usize, value: bool) {
        self.bits[row * WIDTH + col] = value;
    }

    pub fn count(&self) -> u32 {
        self.bits.iter().filter(|b| **b).count() as u32
    }
}

/// Ternary frame difference: +1 where contrast appeared, -1 where it
/// vanished, 0 elsewhere. `count` caches the number of nonzero entries.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TernaryDiffMap {
    values: Vec<i8>,
    count: u32,
}

impl TernaryDiffMap {
    pub fn empty() -> Self {
        TernaryDiffMap {
            values: vec![0; PIXELS],
            count: 0,
        }
    }

    /// Builds a map from explicit (row, col, sign) entries. Later entries
    /// overwrite earlier ones at the same pixel.
    pub fn from_entries(entries: &[(usize, usize, i8)]) -> Self {
        let mut values = vec![0i8; PIXELS];
        for &(row, col, sign) in entries {
            assert!(row < HEIGHT && col < WIDTH, "entry outside the plane");
            assert!(sign == 1 || sign == -1, "sign must be +1 or -1");
            values[row * WIDTH + col] = sign;
        }
        let count = values.iter().filter(|v| **v != 0).count() as u32;
        TernaryDiffMap { values, count }
    }

    #[inline]
    pub fn get(&self, row: usize, col: usize) -> i8 {
        self.values[row * WIDTH + col]
    }

    pub fn count(&self) -> u32 {
        self.count
    }

    /// Nonzero entries in raster order.
    pub fn events(&self) -> Vec<AddressEvent> {
        let mut out = Vec::with_capacity(self.count as usize);
        for row in 0..HEIGHT {
            for col in 0..WIDTH {
                let v = self.values[row * WIDTH + col];
                if v != 0 {
                    out.push(AddressEvent {
                        row: row as u8,
                        col: col as u8,
                        sign: if v > 0 { Sign::Plus } else { Sign::Minus },
                    });
                }
            }
        }
        out
    }
}

/// Readout mode for one frame period.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SensorMode {
    /// Only the asserted-pixel counter leaves the chip.
    Idle,
    /// Every asserted pixel is dispatched in raster order.
    Active,
}

/// Polarity of an asserted pixel after the binary frame difference.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Sign {
    Plus,
    Minus,
}

impl Sign {
    pub fn as_i8(self) -> i8 {
        match self {
            Sign::Plus => 1,
            Sign::Minus => -1,
        }
    }
}

/// One asserted pixel in camera-plane coordinates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct AddressEvent {
    pub row: u8,
    pub col: u8,
    pub sign: Sign,
}

/// One 8-bit word on the sensor data bus: bit 7 is the sign (set for -1),
/// bits 6..0 are the column coordinate.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ReadoutWord(u8);

impl ReadoutWord {
    pub fn new(col: u8, sign: Sign) -> Self {
        assert!((col as usize) < WIDTH, "column out of range");
        let sign_bit = match sign {
            Sign::Plus => 0u8,
            Sign::Minus => 0x80,
        };
        ReadoutWord(sign_bit | col)
    }

    pub fn from_raw(raw: u8) -> Self {
        ReadoutWord(raw)
    }

    pub fn raw(self) -> u8 {
        self.0
    }

    pub fn col(self) -> u8 {
        self.0 & 0x7f
    }

    pub fn sign(self) -> Sign {
        if self.0 & 0x80 != 0 {
            Sign::Minus
        } else {
            Sign::Plus
        }
    }
}

/// One token on the native interface: a data word or an end-of-row pulse.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReadoutToken {
    Data(ReadoutWord),
    Eor,
}

/// Ordered token stream for one Active-mode frame. A well-formed stream
/// carries exactly 64 end-of-row pulses; the stream is terminated by the
/// 64th.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ReadoutStream {
    pub tokens: Vec<ReadoutToken>,
}

impl ReadoutStream {
    pub fn data_len(&self) -> usize {
        self.tokens
            .iter()
            .filter(|t| matches!(t, ReadoutToken::Data(_)))
            .count()
    }

    pub fn eor_count(&self) -> usize {
        self.tokens
            .iter()
            .filter(|t| matches!(t, ReadoutToken::Eor))
            .count()
    }
}

/// What leaves the chip in one frame period.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SensorOutput {
    IdleCount(u32),
    ActiveStream(ReadoutStream),
}

/// Binarizes local spatial contrast.
///
/// A pixel is asserted iff `max(|I(r,c)-I(r,c+1)|, |I(r,c)-I(r+1,c)|) / 255`
/// strictly exceeds `theta_c`. Missing neighbors (right and bottom edges)
/// contribute zero difference, so a uniform frame never asserts anything.
pub fn binarize_contrast(frame: &GrayFrame, theta_c: f64) -> BinaryContrastMap {
    assert!((0.0..=1.0).contains(&theta_c), "theta_c must be in [0,1]");
    let mut map = BinaryContrastMap::empty();
    for row in 0..HEIGHT {
        for col in 0..WIDTH {
            let here = frame.get(row, col) as i16;
            let east = if col + 1 < WIDTH {
                (here - frame.get(row, col + 1) as i16).unsigned_abs()
            } else {
                0
            };
            let south = if row + 1 < HEIGHT {
                (here - frame.get(row + 1, col) as i16).unsigned_abs()
            } else {
                0
            };
            let contrast = east.max(south) as f64 / 255.0;
            if contrast > theta_c {
                map.set(row, col, true);
            }
        }
    }
    map
}

/// Binary frame difference between successive contrast maps.
pub fn frame_difference(prev: &BinaryContrastMap, cur: &BinaryContrastMap) -> TernaryDiffMap {
    let mut values = vec![0i8; PIXELS];
    let mut count = 0u32;
    for ((value, &was), &is) in values.iter_mut().zip(&prev.bits).zip(&cur.bits) {
        *value = match (was, is) {
            (false, true) => 1,
            (true, false) => -1,
            _ => 0,
        };
        if *value != 0 {
            count += 1;
        }
    }
    TernaryDiffMap { values, count }
}

/// Serializes a diff map into the native raster-scan readout stream:
/// for each row, one data word per asserted pixel in ascending column
/// order, then one end-of-row pulse.
pub fn encode_readout(diff: &TernaryDiffMap) -> ReadoutStream {
    let mut tokens = Vec::with_capacity(diff.count as usize + HEIGHT);
    for row in 0..HEIGHT {
        for col in 0..WIDTH {
            match diff.get(row, col) {
                0 => {}
                v => tokens.push(ReadoutToken::Data(ReadoutWord::new(
                    col as u8,
                    if v > 0 { Sign::Plus } else { Sign::Minus },
                ))),
            }
        }
        tokens.push(ReadoutToken::Eor);
    }
    ReadoutStream { tokens }
}

/// Recovers address events from a readout stream. The row coordinate of an
/// event is the number of end-of-row pulses seen before its data word.
pub fn decode_readout(stream: &ReadoutStream) -> Result<Vec<AddressEvent>, ProtocolError> {
    let mut events = Vec::new();
    let mut rows_done = 0usize;
    for token in &stream.tokens {
        match token {
            ReadoutToken::Data(word) => {
                if rows_done >= HEIGHT {
                    return Err(ProtocolError::DataAfterLastRow);
                }
                events.push(AddressEvent {
                    row: rows_done as u8,
                    col: word.col(),
                    sign: word.sign(),
                });
            }
            ReadoutToken::Eor => {
                rows_done += 1;
                if rows_done > HEIGHT {
                    return Err(ProtocolError::TooManyRows(rows_done));
                }
            }
        }
    }
    if rows_done < HEIGHT {
        return Err(ProtocolError::TruncatedStream(rows_done));
    }
    Ok(events)
}

/// One full sensing step: binarize both frames, difference them, and read
/// the result out in the requested mode.
pub fn sensor_step(
    prev_gray: &GrayFrame,
    cur_gray: &GrayFrame,
    mode: SensorMode,
    theta_c: f64,
) -> SensorOutput {
    let prev = binarize_contrast(prev_gray, theta_c);
    let cur = binarize_contrast(cur_gray, theta_c);
    let diff = frame_difference(&prev, &cur);
    match mode {
        SensorMode::Idle => SensorOutput::IdleCount(diff.count()),
        SensorMode::Active => SensorOutput::ActiveStream(encode_readout(&diff)),
    }
}

/// Stateful convenience wrapper used by the harness: keeps the previous
/// contrast map in the internal pixel memory so each new frame yields one
/// diff map.
#[derive(Debug, Clone)]
pub struct ContrastSensor {
    theta_c: f64,
    prev: Option<BinaryContrastMap>,
}

impl ContrastSensor {
    pub fn new(theta_c: f64) -> Self {
        assert!((0.0..=1.0).contains(&theta_c), "theta_c must be in [0,1]");
        ContrastSensor {
            theta_c,
            prev: None,
        }
    }

    /// Feeds the next frame. The first frame primes the pixel memory and
    /// yields an all-zero diff map.
    pub fn advance(&mut self, frame: &GrayFrame) -> TernaryDiffMap {
        let cur = binarize_contrast(frame, self.theta_c);
        let diff = match &self.prev {
            Some(prev) => frame_difference(prev, &cur),
            None => TernaryDiffMap::empty(),
        };
        self.prev = Some(cur);
        diff
    }
}
