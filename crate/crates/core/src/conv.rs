//! Zero-padded "same" 2D convolution and the kernel geometry shared by
//! the inpainter and its gradient.

use ndarray::{Array2, Array3};

use crate::error::{Error, Result};
use crate::image::Image;

/// Geometry of a Gaussian filter: odd size, scale, and whether it is
/// applied as two stacked passes of the half-size kernel.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KernelSpec {
    pub size: usize,
    pub sigma: f64,
    pub stacked: bool,
}

impl KernelSpec {
    pub fn new(size: usize, sigma: f64) -> Result<Self> {
        Self::build(size, sigma, false)
    }

    /// Two stacked passes of the `(size + 1) / 2` kernel with scale
    /// `sigma / sqrt(2)` each; variances add, so the composite matches
    /// the direct kernel away from borders.
    pub fn stacked(size: usize, sigma: f64) -> Result<Self> {
        Self::build(size, sigma, true)
    }

    fn build(size: usize, sigma: f64, stacked: bool) -> Result<Self> {
        if size == 0 || size % 2 == 0 {
            return Err(Error::InvalidArgument(format!(
                "kernel size must be odd and positive, got {size}"
            )));
        }
        if !(sigma > 0.0) || !sigma.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "kernel sigma must be positive, got {sigma}"
            )));
        }
        if stacked {
            let sub = (size + 1) / 2;
            if sub % 2 == 0 {
                return Err(Error::InvalidArgument(format!(
                    "stacked kernel of size {size} implies even sub-size {sub}"
                )));
            }
        }
        Ok(Self { size, sigma, stacked })
    }

    /// The single-pass spec applied twice when `stacked` is set.
    pub fn sub_spec(&self) -> KernelSpec {
        KernelSpec {
            size: (self.size + 1) / 2,
            sigma: self.sigma / std::f64::consts::SQRT_2,
            stacked: false,
        }
    }
}

/// Zero-padded same-shape convolution, applied independently per channel.
/// Kernel taps are laid over the window centered on each output pixel;
/// out-of-bounds input counts as zero.
pub fn convolve2d(img: &Image, kernel: &Array2<f64>) -> Result<Array3<f64>> {
    let (kh, kw) = kernel.dim();
    if kh % 2 == 0 || kw % 2 == 0 {
        return Err(Error::EvenKernel { rows: kh, cols: kw });
    }
    let (c, h, w) = img.data().dim();
    let mut out = Array3::zeros((c, h, w));
    for ch in 0..c {
        let plane = img.data().index_axis(ndarray::Axis(0), ch);
        let conv = conv2d_field(&plane.to_owned(), kernel);
        out.index_axis_mut(ndarray::Axis(0), ch).assign(&conv);
    }
    Ok(out)
}

/// Direct single-plane convolution; the definitional form.
pub(crate) fn conv2d_field(field: &Array2<f64>, kernel: &Array2<f64>) -> Array2<f64> {
    let (h, w) = field.dim();
    let (kh, kw) = kernel.dim();
    let (ch, cw) = (kh as i64 / 2, kw as i64 / 2);
    Array2::from_shape_fn((h, w), |(r, c)| {
        let mut acc = 0.0;
        for a in 0..kh {
            let rr = r as i64 + a as i64 - ch;
            if rr < 0 || rr >= h as i64 {
                continue;
            }
            for b in 0..kw {
                let cc = c as i64 + b as i64 - cw;
                if cc < 0 || cc >= w as i64 {
                    continue;
                }
                acc += kernel[(a, b)] * field[(rr as usize, cc as usize)];
            }
        }
        acc
    })
}

/// Separable same-shape pass: 1D taps across rows, then down columns,
/// zero-padded. Equals `conv2d_field` with the outer-product kernel.
pub(crate) fn sep_conv_field(field: &Array2<f64>, taps: &[f64]) -> Array2<f64> {
    let horizontal = sep_pass_rows(field, taps);
    sep_pass_cols(&horizontal, taps)
}

/// Adjoint of `sep_conv_field` under the standard inner product:
/// the same pass with reversed taps.
pub(crate) fn sep_conv_adjoint(field: &Array2<f64>, taps: &[f64]) -> Array2<f64> {
    let reversed: Vec<f64> = taps.iter().rev().copied().collect();
    sep_conv_field(field, &reversed)
}

fn sep_pass_rows(field: &Array2<f64>, taps: &[f64]) -> Array2<f64> {
    let (h, w) = field.dim();
    let half = taps.len() / 2;
    let mut out = Array2::zeros((h, w));
    for r in 0..h {
        let src = field.row(r);
        let src = src.as_slice().expect("row-major layout");
        let dst = out.row_mut(r);
        let dst = dst.into_slice().expect("row-major layout");
        for (t, &k) in taps.iter().enumerate() {
            if k == 0.0 {
                continue;
            }
            let shift = t as i64 - half as i64;
            // dst[j] += k * src[j + shift] over the in-bounds overlap
            let (dst_start, src_start) = if shift >= 0 {
                (0usize, shift as usize)
            } else {
                ((-shift) as usize, 0usize)
            };
            if dst_start.max(src_start) >= w {
                continue;
            }
            let len = w - dst_start.max(src_start);
            for (d, s) in dst[dst_start..dst_start + len]
                .iter_mut()
                .zip(&src[src_start..src_start + len])
            {
                *d += k * s;
            }
        }
    }
    out
}

fn sep_pass_cols(field: &Array2<f64>, taps: &[f64]) -> Array2<f64> {
    let (h, w) = field.dim();
    let half = taps.len() as i64 / 2;
    let mut out = Array2::zeros((h, w));
    // Accumulate each output row once: the row stays in L1 and is
    // stored a single time.
    for r in 0..h {
        let dst = out.row_mut(r);
        let dst = dst.into_slice().expect("row-major layout");
        for (t, &k) in taps.iter().enumerate() {
            let sr = r as i64 + t as i64 - half;
            if sr < 0 || sr >= h as i64 {
                continue;
            }
            let src = field.row(sr as usize);
            let src = src.as_slice().expect("row-major layout");
            for (d, s) in dst.iter_mut().zip(src) {
                *d += k * s;
            }
        }
    }
    out
}
