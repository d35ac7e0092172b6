//! Model of the FPGA camera interface.
//!
//! The Control Unit runs from the always-on 32 kHz domain: it reads the
//! asserted-pixel counter every frame and switches the imager to Active
//! mode when the count overcomes a user-defined threshold. The DataPath
//! runs from a gated ring-oscillator clock during the short readout
//! window, converts the native stream to (row, col) events, gathers them
//! in 4-pixel packets and stores at most 1024 of them for the processor
//! to fetch over SPI.

use crate::error::ProtocolError;
use crate::sensor::{decode_readout, AddressEvent, ReadoutStream, SensorMode, PIXELS};
use crate::time::Nanos;

/// Events gathered per push into the dual-clock FIFO.
pub const PACKET_SIZE: usize = 4;
/// Capacity of the storage memory, 12.5% of the theoretical maximum.
pub const STORAGE_CAPACITY: usize = 1024;
/// SPI bit clock used for processor data transfers.
pub const SPI_HZ: u64 = 5_000_000;
/// Bits per event word on the SPI link.
pub const SPI_BITS_PER_EVENT: u64 = 16;
/// Header bits per transfer (count and status).
pub const SPI_HEADER_BITS: u64 = 64;

/// Interface configuration.
#[derive(Debug, Clone, PartialEq)]
pub struct InterfaceConfig {
    /// Asserted-pixel count that must be overcome to go Active.
    pub wake_threshold: u32,
    /// Frame rate in frames per second.
    pub frame_rate: f64,
    /// Ring-oscillator on-time per Active readout.
    pub t_readout: Nanos,
}

impl InterfaceConfig {
    pub fn new(wake_threshold: u32) -> Self {
        InterfaceConfig {
            wake_threshold,
            frame_rate: 10.0,
            t_readout: Nanos::from_us(300),
        }
    }

    pub fn validate(&self) -> Result<(), String> {
        if self.wake_threshold as usize > PIXELS {
            return Err(format!(
                "wake_threshold {} exceeds the pixel total {PIXELS}",
                self.wake_threshold
            ));
        }
        if self.frame_rate.is_nan() || self.frame_rate <= 0.0 {
            return Err("frame_rate must be positive".into());
        }
        Ok(())
    }

    pub fn frame_period(&self) -> Nanos {
        Nanos((1e9 / self.frame_rate).round() as u64)
    }
}

/// Storage memory contents after one Active readout.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct StorageMemory {
    pub events: Vec<AddressEvent>,
    pub overflow: bool,
}

/// Per-component activity notes attached to a frame, consumed by the
/// energy model.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ActivityKind {
    RingOscillator,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ActivityWindow {
    pub kind: ActivityKind,
    pub duration: Nanos,
}

/// Everything the interface produced for one frame period.
#[derive(Debug, Clone, PartialEq)]
pub struct FrameRecord {
    pub frame_index: u64,
    pub mode: SensorMode,
    /// Asserted pixels in this frame's diff map (all of them, even those
    /// dropped on storage overflow).
    pub count: u32,
    /// Captured events; empty unless the frame was read in Active mode.
    pub events: Vec<AddressEvent>,
    pub wake: bool,
    pub overflow: bool,
    pub activity: Vec<ActivityWindow>,
}

impl FrameRecord {
    /// Number of events actually held in storage (what a wake-up transfers).
    pub fn stored(&self) -> u32 {
        self.events.len() as u32
    }
}

/// Control Unit mode policy: Active iff the count strictly overcomes the
/// threshold. Re-evaluated from scratch every frame; no hysteresis.
pub fn cu_decide_mode(count: u32, cfg: &InterfaceConfig) -> SensorMode {
    if count > cfg.wake_threshold {
        SensorMode::Active
    } else {
        SensorMode::Idle
    }
}

/// DataPath capture of one Active-mode stream.
///
/// Events are decoded, gathered into 4-pixel packets (a partial packet is
/// flushed at end of stream) and pushed to storage. Storage keeps the
/// first `STORAGE_CAPACITY` events; later ones are dropped and the
/// overflow flag is raised. The returned count covers every decoded
/// event, dropped or not.
pub fn dp_capture(stream: &ReadoutStream) -> Result<(StorageMemory, u32), ProtocolError> {
    let decoded = decode_readout(stream)?;
    let mut storage = StorageMemory::default();
    let mut packet: Vec<AddressEvent> = Vec::with_capacity(PACKET_SIZE);
    let push_packet = |packet: &mut Vec<AddressEvent>, storage: &mut StorageMemory| {
        for ev in packet.drain(..) {
            if storage.events.len() < STORAGE_CAPACITY {
                storage.events.push(ev);
            } else {
                storage.overflow = true;
            }
        }
    };
    for ev in &decoded {
        packet.push(*ev);
        if packet.len() == PACKET_SIZE {
            push_packet(&mut packet, &mut storage);
        }
    }
    push_packet(&mut packet, &mut storage); // flush the partial packet
    Ok((storage, decoded.len() as u32))
}

/// One frame period of the interface.
///
/// The mode for this frame is decided from this frame's count
/// (same-frame activation: the pixel memory still holds the data that
/// crossed the threshold). A wake-up is issued iff the frame went
/// Active, and the ring oscillator runs for the readout window.
/// `prev_mode` is accepted for policies with memory; the default policy
/// is memoryless.
pub fn interface_frame_step(
    frame_index: u64,
    count: u32,
    stream: Option<&ReadoutStream>,
    _prev_mode: SensorMode,
    cfg: &InterfaceConfig,
) -> Result<FrameRecord, ProtocolError> {
    let mode = cu_decide_mode(count, cfg);
    debug_assert_eq!(
        stream.is_some(),
        mode == SensorMode::Active,
        "stream must be present exactly when the frame reads out in Active mode"
    );
    match (mode, stream) {
        (SensorMode::Active, Some(stream)) => {
            let (storage, seen) = dp_capture(stream)?;
            debug_assert_eq!(seen, count, "stream must carry the counted events");
            Ok(FrameRecord {
                frame_index,
                mode,
                count,
                events: storage.events,
                wake: true,
                overflow: storage.overflow,
                activity: vec![ActivityWindow {
                    kind: ActivityKind::RingOscillator,
                    duration: cfg.t_readout,
                }],
            })
        }
        _ => Ok(FrameRecord {
            frame_index,
            mode: SensorMode::Idle,
            count,
            events: Vec::new(),
            wake: false,
            overflow: false,
            activity: Vec::new(),
        }),
    }
}

/// SPI transfer duration for one wake-up: a 64-bit header plus 16 bits
/// per stored event at 5 MHz.
pub fn spi_transfer_model(n_events: u32) -> Nanos {
    debug_assert!(n_events as usize <= STORAGE_CAPACITY);
    let bits = n_events as u64 * SPI_BITS_PER_EVENT + SPI_HEADER_BITS;
    // 5 MHz -> 200 ns per bit, exact in nanoseconds.
    Nanos(bits * (1_000_000_000 / SPI_HZ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sensor::{encode_readout, Sign, TernaryDiffMap};

    fn stream_of(n: usize) -> ReadoutStream {
        let entries: Vec<(usize, usize, i8)> = (0..n)
            .map(|i| (i / 128, i % 128, if i % 3 == 0 { -1 } else { 1 }))
            .collect();
        encode_readout(&TernaryDiffMap::from_entries(&entries))
    }

    #[test]
    fn mode_policy_is_strictly_greater() {
        let cfg = InterfaceConfig::new(100);
        assert_eq!(cu_decide_mode(150, &cfg), SensorMode::Active);
        assert_eq!(cu_decide_mode(100, &cfg), SensorMode::Idle);
        assert_eq!(cu_decide_mode(0, &cfg), SensorMode::Idle);
        let zero = InterfaceConfig::new(0);
        assert_eq!(cu_decide_mode(0, &zero), SensorMode::Idle);
    }

    #[test]
    fn capture_flushes_partial_packet() {
        let (storage, count) = dp_capture(&stream_of(6)).unwrap();
        assert_eq!(storage.events.len(), 6);
        assert_eq!(count, 6);
        assert!(!storage.overflow);
    }

    #[test]
    fn capture_overflows_past_1024() {
        let (storage, count) = dp_capture(&stream_of(2000)).unwrap();
        assert_eq!(storage.events.len(), STORAGE_CAPACITY);
        assert_eq!(count, 2000);
        assert!(storage.overflow);
    }

    #[test]
    fn capture_of_empty_stream() {
        let (storage, count) = dp_capture(&stream_of(0)).unwrap();
        assert!(storage.events.is_empty());
        assert_eq!(count, 0);
        assert!(!storage.overflow);
    }

    #[test]
    fn packing_is_semantics_free() {
        // Stored events equal the first min(count, 1024) decoded events for
        // counts around packet and capacity boundaries.
        for n in [1usize, 3, 4, 5, 1023, 1024, 1025, 1026, 1030] {
            let stream = stream_of(n);
            let decoded = decode_readout(&stream).unwrap();
            let (storage, count) = dp_capture(&stream).unwrap();
            let kept = n.min(STORAGE_CAPACITY);
            assert_eq!(count as usize, n);
            assert_eq!(storage.events, decoded[..kept], "n={n}");
            assert_eq!(storage.overflow, n > STORAGE_CAPACITY, "n={n}");
        }
    }

    #[test]
    fn idle_frame_record_has_no_activity() {
        let cfg = InterfaceConfig::new(100);
        let rec = interface_frame_step(7, 40, None, SensorMode::Idle, &cfg).unwrap();
        assert_eq!(rec.mode, SensorMode::Idle);
        assert!(!rec.wake);
        assert!(rec.events.is_empty());
        assert!(rec.activity.is_empty());
    }

    #[test]
    fn active_frame_record_wakes_with_readout_window() {
        let cfg = InterfaceConfig::new(100);
        let stream = stream_of(150);
        let rec = interface_frame_step(3, 150, Some(&stream), SensorMode::Idle, &cfg).unwrap();
        assert_eq!(rec.mode, SensorMode::Active);
        assert!(rec.wake);
        assert_eq!(rec.stored(), 150);
        assert_eq!(rec.activity.len(), 1);
        assert_eq!(rec.activity[0].duration, Nanos::from_us(300));
    }

    #[test]
    fn alternating_counts_alternate_modes() {
        let cfg = InterfaceConfig::new(100);
        let counts = [150u32, 50, 200, 10];
        let mut modes = Vec::new();
        let mut prev = SensorMode::Idle;
        for (i, &count) in counts.iter().enumerate() {
            let stream = (count > cfg.wake_threshold).then(|| stream_of(count as usize));
            let rec = interface_frame_step(i as u64, count, stream.as_ref(), prev, &cfg).unwrap();
            prev = rec.mode;
            modes.push(rec.mode);
        }
        assert_eq!(
            modes,
            vec![
                SensorMode::Active,
                SensorMode::Idle,
                SensorMode::Active,
                SensorMode::Idle
            ]
        );
    }

    #[test]
    fn spi_durations_match_the_wire_format() {
        assert_eq!(spi_transfer_model(0), Nanos(12_800)); // header only
        assert_eq!(spi_transfer_model(100), Nanos(332_800));
        assert_eq!(spi_transfer_model(1024), Nanos(3_289_600));
    }

    #[test]
    fn wake_monotone_in_count() {
        let cfg = InterfaceConfig::new(73);
        let mut active = false;
        for count in 0..=300u32 {
            let now = cu_decide_mode(count, &cfg) == SensorMode::Active;
            assert!(!active || now, "wake must be monotone in count");
            active = now;
        }
    }

    #[test]
    fn events_sign_survives_capture() {
        let diff = TernaryDiffMap::from_entries(&[(0, 0, -1), (0, 1, 1)]);
        let (storage, _) = dp_capture(&encode_readout(&diff)).unwrap();
        assert_eq!(storage.events[0].sign, Sign::Minus);
        assert_eq!(storage.events[1].sign, Sign::Plus);
    }
}
