//! Frame-based comparison detector.
//!
//! Mirrors a conventional grayscale pipeline: absolute frame difference,
//! binary thresholding, 3x3 morphological opening and closing, 8-connected
//! component labeling, and a minimum-size filter. The resulting blobs feed
//! the same tracker and trigger engine as the event pipeline, so metric
//! differences between the two domains isolate the sensing representation.

use crate::pipeline::{BBox, Blob};
use crate::sensor::{GrayFrame, HEIGHT, WIDTH};

/// What the current frame is differenced against.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ReferenceFrame {
    /// The previous frame (motion detector; stationary objects vanish).
    #[default]
    Previous,
    /// The first frame of the run (static-background subtraction).
    First,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BaselineParams {
    /// Absolute intensity difference that marks a pixel as foreground.
    pub intensity_threshold: u8,
    /// Components below this pixel count are dropped.
    pub min_blob_pixels: u32,
    /// Reference frame for the difference.
    pub reference: ReferenceFrame,
}

impl Default for BaselineParams {
    fn default() -> Self {
        BaselineParams {
            intensity_threshold: 25,
            min_blob_pixels: 40,
            reference: ReferenceFrame::Previous,
        }
    }
}

pub type Mask = Vec<bool>; // WIDTH * HEIGHT, row-major

fn mask_index(row: usize, col: usize) -> usize {
    row * WIDTH + col
}

/// Foreground mask from absolute frame differencing.
pub fn difference_mask(cur: &GrayFrame, prev: &GrayFrame, threshold: u8) -> Mask {
    let mut mask = vec![false; WIDTH * HEIGHT];
    for (idx, m) in mask.iter_mut().enumerate() {
        let a = cur.pixels()[idx] as i16;
        let b = prev.pixels()[idx] as i16;
        *m = (a - b).unsigned_abs() > threshold as u16;
    }
    mask
}

/// 3x3 erosion. Outside the frame counts as background, so border pixels
/// erode away unless fully surrounded.
pub fn erode3(mask: &Mask) -> Mask {
    let mut out = vec![false; WIDTH * HEIGHT];
    for row in 0..HEIGHT {
        for col in 0..WIDTH {
            let mut keep = true;
            'probe: for dr in -1i32..=1 {
                for dc in -1i32..=1 {
                    let r = row as i32 + dr;
                    let c = col as i32 + dc;
                    if r < 0 || c < 0 || r >= HEIGHT as i32 || c >= WIDTH as i32 {
                        keep = false;
                        break 'probe;
                    }
                    if !mask[mask_index(r as usize, c as usize)] {
                        keep = false;
                        break 'probe;
                    }
                }
            }
            out[mask_index(row, col)] = keep;
        }
    }
    out
}

/// 3x3 dilation.
pub fn dilate3(mask: &Mask) -> Mask {
    let mut out = vec![false; WIDTH * HEIGHT];
    for row in 0..HEIGHT {
        for col in 0..WIDTH {
            let mut hit = false;
            'probe: for dr in -1i32..=1 {
                for dc in -1i32..=1 {
                    let r = row as i32 + dr;
                    let c = col as i32 + dc;
                    if r >= 0
                        && c >= 0
                        && r < HEIGHT as i32
                        && c < WIDTH as i32
                        && mask[mask_index(r as usize, c as usize)]
                    {
                        hit = true;
                        break 'probe;
                    }
                }
            }
            out[mask_index(row, col)] = hit;
        }
    }
    out
}

pub fn opening3(mask: &Mask) -> Mask {
    dilate3(&erode3(mask))
}

pub fn closing3(mask: &Mask) -> Mask {
    erode3(&dilate3(mask))
}

/// 8-connected components in scan order; each component is a pixel list.
pub fn connected_components_8(mask: &Mask) -> Vec<Vec<(usize, usize)>> {
    let mut visited = vec![false; WIDTH * HEIGHT];
    let mut components = Vec::new();
    for row in 0..HEIGHT {
        for col in 0..WIDTH {
            let idx = mask_index(row, col);
            if !mask[idx] || visited[idx] {
                continue;
            }
            let mut component = Vec::new();
            let mut stack = vec![(row, col)];
            visited[idx] = true;
            while let Some((r, c)) = stack.pop() {
                component.push((r, c));
                for dr in -1i32..=1 {
                    for dc in -1i32..=1 {
                        if dr == 0 && dc == 0 {
                            continue;
                        }
                        let nr = r as i32 + dr;
                        let nc = c as i32 + dc;
                        if nr < 0 || nc < 0 || nr >= HEIGHT as i32 || nc >= WIDTH as i32 {
                            continue;
                        }
                        let nidx = mask_index(nr as usize, nc as usize);
                        if mask[nidx] && !visited[nidx] {
                            visited[nidx] = true;
                            stack.push((nr as usize, nc as usize));
                        }
                    }
                }
            }
            components.push(component);
        }
    }
    components
}

fn component_to_blob(component: &[(usize, usize)]) -> Blob {
    let mut bbox = BBox::at_point(component[0].0 as f64, component[0].1 as f64);
    let mut sum_row = 0.0;
    let mut sum_col = 0.0;
    for &(r, c) in component {
        bbox.include(r as f64, c as f64);
        sum_row += r as f64;
        sum_col += c as f64;
    }
    let n = component.len() as f64;
    Blob {
        centroid: (sum_row / n, sum_col / n),
        bbox,
        pixel_count: component.len() as u32,
    }
}

/// Frame-based object detection on two successive grayscale frames.
pub fn baseline_detect(cur: &GrayFrame, prev: &GrayFrame, params: &BaselineParams) -> Vec<Blob> {
    let mask = difference_mask(cur, prev, params.intensity_threshold);
    let cleaned = closing3(&opening3(&mask));
    connected_components_8(&cleaned)
        .iter()
        .filter(|c| c.len() as u32 >= params.min_blob_pixels)
        .map(|c| component_to_blob(c))
        .collect()
}
