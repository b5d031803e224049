//! Core raster types: real-valued images, binary masks, and the mask
//! morphology (boundary extraction, majority smoothing) the greedy
//! optimizer relies on.

use ndarray::{Array2, Array3};

use crate::error::{Error, Result};

/// A real-valued image stored channel-major as `(C, H, W)`.
///
/// Decoded images hold values in `[0, 1]`; derived tensors (shifted or
/// scaled test inputs, convolution outputs) may exceed that range, so
/// construction only enforces finiteness and positive dimensions.
#[derive(Debug, Clone, PartialEq)]
pub struct Image {
    data: Array3<f64>,
}

impl Image {
    pub fn new(data: Array3<f64>) -> Result<Self> {
        let (c, h, w) = data.dim();
        if c == 0 || h == 0 || w == 0 {
            return Err(Error::InvalidArgument(format!(
                "image dimensions must be positive, got {c}x{h}x{w}"
            )));
        }
        if !data.iter().all(|v| v.is_finite()) {
            return Err(Error::InvalidArgument(
                "image contains non-finite values".into(),
            ));
        }
        Ok(Self { data })
    }

    /// Builds an image from a per-(channel, row, col) function.
    pub fn from_fn(
        channels: usize,
        height: usize,
        width: usize,
        mut f: impl FnMut(usize, usize, usize) -> f64,
    ) -> Result<Self> {
        Self::new(Array3::from_shape_fn((channels, height, width), |(c, r, col)| {
            f(c, r, col)
        }))
    }

    pub fn constant(channels: usize, height: usize, width: usize, value: f64) -> Result<Self> {
        Self::new(Array3::from_elem((channels, height, width), value))
    }

    pub fn channels(&self) -> usize {
        self.data.dim().0
    }

    pub fn height(&self) -> usize {
        self.data.dim().1
    }

    pub fn width(&self) -> usize {
        self.data.dim().2
    }

    pub fn data(&self) -> &Array3<f64> {
        &self.data
    }

    pub fn into_data(self) -> Array3<f64> {
        self.data
    }

    /// Replicates a single-channel image to `channels`; multi-channel
    /// inputs must already match.
    pub fn to_channels(&self, channels: usize) -> Result<Self> {
        if self.channels() == channels {
            return Ok(self.clone());
        }
        if self.channels() != 1 {
            return Err(Error::ShapeMismatch(format!(
                "cannot broadcast {}-channel image to {channels} channels",
                self.channels()
            )));
        }
        let plane = self.data.index_axis(ndarray::Axis(0), 0);
        let mut out = Array3::zeros((channels, self.height(), self.width()));
        for c in 0..channels {
            out.index_axis_mut(ndarray::Axis(0), c).assign(&plane);
        }
        Self::new(out)
    }
}

/// A binary segmentation mask over `(H, W)`; 1 marks foreground.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Mask {
    data: Array2<u8>,
}

impl Mask {
    pub fn new(data: Array2<u8>) -> Result<Self> {
        let (h, w) = data.dim();
        if h == 0 || w == 0 {
            return Err(Error::InvalidArgument(format!(
                "mask dimensions must be positive, got {h}x{w}"
            )));
        }
        if !data.iter().all(|&v| v <= 1) {
            return Err(Error::InvalidArgument(
                "mask values must be exactly 0 or 1".into(),
            ));
        }
        Ok(Self { data })
    }

    pub fn zeros(height: usize, width: usize) -> Self {
        Self {
            data: Array2::zeros((height, width)),
        }
    }

    pub fn from_fn(height: usize, width: usize, mut f: impl FnMut(usize, usize) -> bool) -> Self {
        Self {
            data: Array2::from_shape_fn((height, width), |(r, c)| u8::from(f(r, c))),
        }
    }

    pub fn height(&self) -> usize {
        self.data.dim().0
    }

    pub fn width(&self) -> usize {
        self.data.dim().1
    }

    pub fn data(&self) -> &Array2<u8> {
        &self.data
    }

    pub fn get(&self, row: usize, col: usize) -> u8 {
        self.data[(row, col)]
    }

    pub fn set(&mut self, row: usize, col: usize, value: u8) {
        debug_assert!(value <= 1);
        self.data[(row, col)] = value;
    }

    pub fn count_ones(&self) -> usize {
        self.data.iter().map(|&v| v as usize).sum()
    }

    /// Empty or full masks make the normalized objective's denominators
    /// vanish; they cannot be scored or stepped.
    pub fn is_degenerate(&self) -> bool {
        let ones = self.count_ones();
        ones == 0 || ones == self.height() * self.width()
    }

    pub fn complement(&self) -> Mask {
        Mask {
            data: self.data.mapv(|v| 1 - v),
        }
    }

    /// Real-valued view used for gradient evaluation.
    pub fn relaxed(&self) -> RelaxedMask {
        RelaxedMask {
            data: self.data.mapv(f64::from),
        }
    }
}

/// A real-valued mask in `[0, 1]` used only where gradients are taken.
#[derive(Debug, Clone, PartialEq)]
pub struct RelaxedMask {
    data: Array2<f64>,
}

impl RelaxedMask {
    pub fn new(data: Array2<f64>) -> Result<Self> {
        let (h, w) = data.dim();
        if h == 0 || w == 0 {
            return Err(Error::InvalidArgument(format!(
                "mask dimensions must be positive, got {h}x{w}"
            )));
        }
        if !data.iter().all(|&v| v.is_finite() && (0.0..=1.0).contains(&v)) {
            return Err(Error::InvalidArgument(
                "relaxed mask values must lie in [0, 1]".into(),
            ));
        }
        Ok(Self { data })
    }

    pub fn height(&self) -> usize {
        self.data.dim().0
    }

    pub fn width(&self) -> usize {
        self.data.dim().1
    }

    pub fn data(&self) -> &Array2<f64> {
        &self.data
    }

    pub fn complement(&self) -> RelaxedMask {
        RelaxedMask {
            data: self.data.mapv(|v| 1.0 - v),
        }
    }
}

/// A duplicate-free set of in-bounds pixel coordinates in row-major order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PixelSet {
    coords: Vec<(usize, usize)>,
}

impl PixelSet {
    pub(crate) fn from_row_major(coords: Vec<(usize, usize)>) -> Self {
        Self { coords }
    }

    pub fn len(&self) -> usize {
        self.coords.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coords.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.coords.iter().copied()
    }

    pub fn as_slice(&self) -> &[(usize, usize)] {
        &self.coords
    }
}

/// Resizes the shorter side to `target` (bilinear, aspect preserved) and
/// center-crops to `target`x`target`. Fractional crop offsets round down.
pub fn preprocess(img: &Image, target: usize) -> Image {
    assert!(target >= 1, "target size must be positive");
    let (c, h, w) = img.data().dim();
    let (new_h, new_w) = if h <= w {
        let scaled = ((w as f64) * (target as f64) / (h as f64)).round() as usize;
        (target, scaled.max(target))
    } else {
        let scaled = ((h as f64) * (target as f64) / (w as f64)).round() as usize;
        (scaled.max(target), target)
    };
    let resized = if (new_h, new_w) == (h, w) {
        img.data().clone()
    } else {
        bilinear_resize(img.data(), new_h, new_w)
    };
    let off_r = (new_h - target) / 2;
    let off_c = (new_w - target) / 2;
    let cropped = resized
        .slice(ndarray::s![.., off_r..off_r + target, off_c..off_c + target])
        .to_owned();
    debug_assert_eq!(cropped.dim(), (c, target, target));
    Image { data: cropped }
}

fn bilinear_resize(data: &Array3<f64>, new_h: usize, new_w: usize) -> Array3<f64> {
    let (c, h, w) = data.dim();
    // Pixel centers at (i + 0.5) / scale - 0.5, clamped at the borders.
    let coords = |out_len: usize, in_len: usize| -> Vec<(usize, usize, f64)> {
        (0..out_len)
            .map(|i| {
                let src = ((i as f64 + 0.5) * in_len as f64 / out_len as f64 - 0.5)
                    .clamp(0.0, (in_len - 1) as f64);
                let lo = src.floor() as usize;
                let hi = (lo + 1).min(in_len - 1);
                (lo, hi, src - lo as f64)
            })
            .collect()
    };
    let rows = coords(new_h, h);
    let cols = coords(new_w, w);
    Array3::from_shape_fn((c, new_h, new_w), |(ch, i, j)| {
        let (r0, r1, fr) = rows[i];
        let (c0, c1, fc) = cols[j];
        let v00 = data[(ch, r0, c0)];
        let v01 = data[(ch, r0, c1)];
        let v10 = data[(ch, r1, c0)];
        let v11 = data[(ch, r1, c1)];
        (1.0 - fr) * ((1.0 - fc) * v00 + fc * v01) + fr * ((1.0 - fc) * v10 + fc * v11)
    })
}

/// Pixels with at least one in-bounds 4-neighbor of the opposite value.
/// Out-of-bounds positions never count as opposite, so a uniform mask has
/// an empty boundary even at the image border.
pub fn extract_boundary(mask: &Mask) -> PixelSet {
    let (h, w) = mask.data().dim();
    let data = mask.data();
    let mut coords = Vec::new();
    for r in 0..h {
        for c in 0..w {
            let v = data[(r, c)];
            let opposite = (r > 0 && data[(r - 1, c)] != v)
                || (r + 1 < h && data[(r + 1, c)] != v)
                || (c > 0 && data[(r, c - 1)] != v)
                || (c + 1 < w && data[(r, c + 1)] != v);
            if opposite {
                coords.push((r, c));
            }
        }
    }
    PixelSet::from_row_major(coords)
}

/// Majority smoothing: each pixel becomes 1 iff the sum of its 8
/// neighbors (center excluded, replicate padding) exceeds 4.
pub fn smooth_mask(mask: &Mask) -> Mask {
    let (h, w) = mask.data().dim();
    let data = mask.data();
    let out = Array2::from_shape_fn((h, w), |(r, c)| {
        let mut sum = 0u32;
        for dr in -1i64..=1 {
            for dc in -1i64..=1 {
                if dr == 0 && dc == 0 {
                    continue;
                }
                let rr = (r as i64 + dr).clamp(0, h as i64 - 1) as usize;
                let cc = (c as i64 + dc).clamp(0, w as i64 - 1) as usize;
                sum += u32::from(data[(rr, cc)]);
            }
        }
        u8::from(sum > 4)
    });
    Mask { data: out }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn mask_rejects_non_binary() {
        let arr = Array2::from_shape_vec((2, 2), vec![0u8, 1, 2, 1]).unwrap();
        assert!(Mask::new(arr).is_err());
    }

    #[test]
    fn complement_is_involutive() {
        let m = Mask::from_fn(5, 7, |r, c| (r * c) % 3 == 0);
        assert_eq!(m.complement().complement(), m);
    }

    #[test]
    fn preprocess_identity_on_target_sized_input() {
        let img = Image::from_fn(3, 128, 128, |c, r, col| {
            ((c + 3 * r + 7 * col) % 11) as f64 / 10.0
        })
        .unwrap();
        let out = preprocess(&img, 128);
        assert_eq!(out, img);
    }

    #[test]
    fn preprocess_pure_crop_keeps_center_columns() {
        // 128x256: no resize, crop offset (256-128)/2 = 64.
        let img = Image::from_fn(1, 128, 256, |_, _, col| col as f64 / 255.0).unwrap();
        let out = preprocess(&img, 128);
        assert_eq!(out.height(), 128);
        assert_eq!(out.width(), 128);
        for j in 0..128 {
            assert_eq!(out.data()[(0, 0, j)], (j + 64) as f64 / 255.0);
        }
    }

    #[test]
    fn preprocess_constant_stays_constant() {
        let img = Image::constant(3, 256, 256, 0.37).unwrap();
        let out = preprocess(&img, 128);
        assert_eq!(out.height(), 128);
        assert_eq!(out.width(), 128);
        for v in out.data().iter() {
            assert!((v - 0.37).abs() < 1e-12);
        }
    }

    #[test]
    fn preprocess_upscales_degenerate_input() {
        let img = Image::constant(1, 1, 1, 0.5).unwrap();
        let out = preprocess(&img, 16);
        assert_eq!(out.height(), 16);
        assert_eq!(out.width(), 16);
        assert!(out.data().iter().all(|&v| (v - 0.5).abs() < 1e-12));
    }

    #[test]
    fn boundary_of_uniform_mask_is_empty() {
        let ones = Mask::from_fn(6, 6, |_, _| true);
        assert!(extract_boundary(&ones).is_empty());
        let zeros = Mask::zeros(6, 6);
        assert!(extract_boundary(&zeros).is_empty());
    }

    #[test]
    fn boundary_of_single_pixel_is_cross() {
        let mut m = Mask::zeros(7, 7);
        m.set(3, 3, 1);
        let b = extract_boundary(&m);
        let expect = vec![(2, 3), (3, 2), (3, 3), (3, 4), (4, 3)];
        assert_eq!(b.as_slice(), expect.as_slice());
    }

    #[test]
    fn boundary_matches_definitional_scan() {
        // Centered 3x3 square of ones in 7x7 against a per-pixel scan.
        let m = Mask::from_fn(7, 7, |r, c| (2..5).contains(&r) && (2..5).contains(&c));
        let b = extract_boundary(&m);
        let mut expect = Vec::new();
        for r in 0..7usize {
            for c in 0..7usize {
                let v = m.get(r, c);
                let mut opp = false;
                for (dr, dc) in [(-1i64, 0i64), (1, 0), (0, -1), (0, 1)] {
                    let rr = r as i64 + dr;
                    let cc = c as i64 + dc;
                    if (0..7).contains(&rr) && (0..7).contains(&cc) {
                        opp |= m.get(rr as usize, cc as usize) != v;
                    }
                }
                if opp {
                    expect.push((r, c));
                }
            }
        }
        assert_eq!(b.as_slice(), expect.as_slice());
    }

    #[test]
    fn boundary_invariant_under_complement() {
        let m = Mask::from_fn(9, 9, |r, c| (r + 2 * c) % 5 < 2);
        assert_eq!(
            extract_boundary(&m).as_slice(),
            extract_boundary(&m.complement()).as_slice()
        );
    }

    #[test]
    fn smoothing_fixed_points() {
        let zeros = Mask::zeros(5, 5);
        assert_eq!(smooth_mask(&zeros), zeros);
        let ones = Mask::from_fn(5, 5, |_, _| true);
        assert_eq!(smooth_mask(&ones), ones);
    }

    #[test]
    fn smoothing_removes_isolated_pixel() {
        let mut m = Mask::zeros(5, 5);
        m.set(2, 2, 1);
        assert_eq!(smooth_mask(&m), Mask::zeros(5, 5));
    }
}
