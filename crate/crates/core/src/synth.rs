//! Synthetic layered images with planted ground-truth masks, and the
//! exhaustive oracle that anchors the optimizer tests.

use ndarray::Array3;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::image::{Image, Mask};
use crate::objective::{iem_objective, IemConfig};

/// Planted foreground shape, centered in the image.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ShapeSpec {
    Square { size: usize },
    Ellipse { semi_height: f64, semi_width: f64 },
    /// Smooth closed blob: a circle whose radius wobbles with a few
    /// random harmonics.
    Blob { mean_radius: f64, wobble: f64 },
}

/// Appearance model of one layer; values are clamped to `[0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum LayerModel {
    Constant { rgb: [f64; 3] },
    /// Linear ramp from `start` to `end`, horizontal or vertical.
    Gradient { start: [f64; 3], end: [f64; 3], vertical: bool },
    /// Blocky luminance noise around `rgb`: one offset per
    /// `grain` x `grain` cell, applied to all channels.
    Noise { rgb: [f64; 3], amplitude: f64, grain: usize },
}

impl LayerModel {
    pub fn is_textured(&self) -> bool {
        matches!(self, LayerModel::Noise { .. })
    }
}

/// Recipe for one synthetic instance; fully determined by `seed`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SynthSpec {
    pub side: usize,
    pub planted: ShapeSpec,
    pub fg: LayerModel,
    pub bg: LayerModel,
    pub seed: u64,
}

impl SynthSpec {
    /// True when either layer carries a noise texture.
    pub fn is_textured(&self) -> bool {
        self.fg.is_textured() || self.bg.is_textured()
    }
}

/// The canonical mixed test corpus: shapes cycle through squares,
/// ellipses, and blobs; indices with `i % 5 >= 3` get noise-textured
/// layers, the rest constant or gradient ones. Deterministic in
/// `(index, seed)`.
pub fn corpus_spec(index: usize, seed: u64, side: usize) -> SynthSpec {
    let palette = [
        ([0.85, 0.25, 0.20], [0.20, 0.50, 0.70]),
        ([0.90, 0.75, 0.30], [0.15, 0.25, 0.45]),
        ([0.70, 0.30, 0.60], [0.25, 0.60, 0.35]),
        ([0.80, 0.55, 0.20], [0.30, 0.35, 0.55]),
    ];
    let (fg_rgb, bg_rgb) = palette[index % 4];
    let scale = side as f64 / 128.0;
    let planted = match index % 3 {
        0 => ShapeSpec::Square {
            size: ((36 + 4 * (index % 4)) as f64 * scale) as usize,
        },
        1 => ShapeSpec::Ellipse {
            semi_height: (26.0 + (index % 5) as f64 * 3.0) * scale,
            semi_width: (20.0 + (index % 3) as f64 * 4.0) * scale,
        },
        _ => ShapeSpec::Blob {
            mean_radius: (24.0 + (index % 4) as f64 * 3.0) * scale,
            wobble: 0.3,
        },
    };
    let instance_seed = seed
        .wrapping_mul(0x9e37_79b9_7f4a_7c15)
        .wrapping_add(index as u64);
    let (fg, bg) = match index % 5 {
        0 => (
            LayerModel::Constant { rgb: fg_rgb },
            LayerModel::Constant { rgb: bg_rgb },
        ),
        1 => (
            LayerModel::Constant { rgb: fg_rgb },
            LayerModel::Gradient {
                start: bg_rgb,
                end: [
                    (bg_rgb[0] + 0.20).min(1.0),
                    (bg_rgb[1] + 0.15).min(1.0),
                    (bg_rgb[2] - 0.10).max(0.0),
                ],
                vertical: index % 2 == 0,
            },
        ),
        2 => (
            LayerModel::Gradient {
                start: fg_rgb,
                end: [
                    (fg_rgb[0] - 0.15).max(0.0),
                    (fg_rgb[1] + 0.10).min(1.0),
                    (fg_rgb[2] + 0.15).min(1.0),
                ],
                vertical: index % 2 == 1,
            },
            LayerModel::Constant { rgb: bg_rgb },
        ),
        3 => (
            LayerModel::Constant { rgb: fg_rgb },
            LayerModel::Noise { rgb: bg_rgb, amplitude: 0.5, grain: 1 },
        ),
        _ => (
            LayerModel::Noise { rgb: fg_rgb, amplitude: 0.5, grain: 1 },
            LayerModel::Noise { rgb: bg_rgb, amplitude: 0.4, grain: 1 },
        ),
    };
    SynthSpec { side, planted, fg, bg, seed: instance_seed }
}

fn planted_mask(spec: &SynthSpec, rng: &mut ChaCha8Rng) -> Result<Mask> {
    let side = spec.side;
    let center = (side as f64 - 1.0) / 2.0;
    match spec.planted {
        ShapeSpec::Square { size } => {
            if size == 0 || size >= side {
                return Err(Error::InvalidArgument(format!(
                    "planted square size {size} out of range for side {side}"
                )));
            }
            let off = (side - size) / 2;
            Ok(Mask::from_fn(side, side, |r, c| {
                (off..off + size).contains(&r) && (off..off + size).contains(&c)
            }))
        }
        ShapeSpec::Ellipse { semi_height, semi_width } => {
            if !(semi_height > 0.0) || !(semi_width > 0.0) {
                return Err(Error::InvalidArgument("ellipse semi-axes must be positive".into()));
            }
            Ok(Mask::from_fn(side, side, |r, c| {
                let dy = (r as f64 - center) / semi_height;
                let dx = (c as f64 - center) / semi_width;
                dy * dy + dx * dx <= 1.0
            }))
        }
        ShapeSpec::Blob { mean_radius, wobble } => {
            if !(mean_radius > 0.0) {
                return Err(Error::InvalidArgument("blob radius must be positive".into()));
            }
            // 2nd..5th harmonics with random phases and decaying weights.
            let harmonics: Vec<(f64, f64, f64)> = (2..=5)
                .map(|k| {
                    let amp: f64 = rng.gen_range(0.3..1.0) / k as f64;
                    let phase: f64 = rng.gen_range(0.0..std::f64::consts::TAU);
                    (k as f64, amp, phase)
                })
                .collect();
            Ok(Mask::from_fn(side, side, |r, c| {
                let dy = r as f64 - center;
                let dx = c as f64 - center;
                let theta = dy.atan2(dx);
                let mut radius = 1.0;
                for &(k, amp, phase) in &harmonics {
                    radius += wobble * amp * (k * theta + phase).sin();
                }
                (dy * dy + dx * dx).sqrt() <= mean_radius * radius
            }))
        }
    }
}

fn render_layer(model: &LayerModel, side: usize, rng: &mut ChaCha8Rng) -> Array3<f64> {
    match *model {
        LayerModel::Constant { rgb } => {
            Array3::from_shape_fn((3, side, side), |(ch, _, _)| rgb[ch].clamp(0.0, 1.0))
        }
        LayerModel::Gradient { start, end, vertical } => {
            Array3::from_shape_fn((3, side, side), |(ch, r, c)| {
                let t = if vertical {
                    r as f64 / (side - 1).max(1) as f64
                } else {
                    c as f64 / (side - 1).max(1) as f64
                };
                (start[ch] + t * (end[ch] - start[ch])).clamp(0.0, 1.0)
            })
        }
        LayerModel::Noise { rgb, amplitude, grain } => {
            let grain = grain.max(1);
            let cells = side.div_ceil(grain);
            let offsets: Vec<f64> = (0..cells * cells)
                .map(|_| amplitude * (2.0 * rng.gen::<f64>() - 1.0))
                .collect();
            Array3::from_shape_fn((3, side, side), |(ch, r, c)| {
                let cell = (r / grain) * cells + c / grain;
                (rgb[ch] + offsets[cell]).clamp(0.0, 1.0)
            })
        }
    }
}

/// Composes `fg (.) m + bg (.) (1 - m)` exactly, with both layers drawn
/// independently. Deterministic in `spec.seed`.
pub fn gen_layered(spec: &SynthSpec) -> Result<(Image, Mask)> {
    if spec.side < 2 {
        return Err(Error::InvalidArgument("side must be at least 2".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let mask = planted_mask(spec, &mut rng)?;
    let mut fg_rng = ChaCha8Rng::seed_from_u64(spec.seed.wrapping_add(0x9e37_79b9));
    let mut bg_rng = ChaCha8Rng::seed_from_u64(spec.seed.wrapping_add(0x7f4a_7c15));
    let fg = render_layer(&spec.fg, spec.side, &mut fg_rng);
    let bg = render_layer(&spec.bg, spec.side, &mut bg_rng);
    let data = Array3::from_shape_fn((3, spec.side, spec.side), |(ch, r, c)| {
        if mask.get(r, c) == 1 {
            fg[(ch, r, c)]
        } else {
            bg[(ch, r, c)]
        }
    });
    Ok((Image::new(data)?, mask))
}

/// Exhaustively maximizes the objective over every non-degenerate binary
/// mask of a tiny instance. Ties break toward the lexicographically
/// first mask in row-major order. The pixel cap keeps the `2^(H*W)`
/// search tractable.
pub fn brute_force_optimum(x: &Image, cfg: &IemConfig, max_pixels: usize) -> Result<(Mask, f64)> {
    if max_pixels > 16 {
        return Err(Error::InvalidArgument(format!(
            "exhaustive search capped at 16 pixels, got {max_pixels}"
        )));
    }
    let (h, w) = (x.height(), x.width());
    let n = h * w;
    if n > max_pixels {
        return Err(Error::InvalidArgument(format!(
            "instance has {n} pixels, exceeding the cap {max_pixels}"
        )));
    }
    let full: u32 = (1u32 << n) - 1;
    let mut best: Option<(Mask, f64)> = None;
    for code in 1..full {
        // Pixel (0,0) maps to the highest bit so integer order equals
        // lexicographic order on row-major mask strings.
        let mask = Mask::from_fn(h, w, |r, c| {
            let idx = r * w + c;
            code >> (n - 1 - idx) & 1 == 1
        });
        let value = iem_objective(x, &mask.relaxed(), cfg)?.value;
        match &best {
            Some((_, v)) if value <= *v => {}
            _ => best = Some((mask, value)),
        }
    }
    best.ok_or_else(|| Error::InvalidArgument("instance too small to enumerate".into()))
}
