//! The mask-normalized Gaussian inpainter: predicts masked-out pixels as
//! the kernel-weighted average of kept pixels, `(K * X) / (K * M)`.

use ndarray::{Array2, Array3};

use crate::conv::{sep_conv_adjoint, sep_conv_field, KernelSpec};
use crate::error::{Error, Result};
use crate::image::{Image, Mask};

/// Denominator guard for vanishing kernel support.
pub const DEFAULT_EPSILON: f64 = 1e-8;

/// Truncated, renormalized 2D Gaussian; entries sum to one.
pub fn gaussian_kernel(spec: &KernelSpec) -> Result<Array2<f64>> {
    let taps = gaussian_taps(spec.size, spec.sigma)?;
    Ok(Array2::from_shape_fn((spec.size, spec.size), |(a, b)| {
        taps[a] * taps[b]
    }))
}

/// 1D factor of the (separable) Gaussian, normalized to sum one.
pub(crate) fn gaussian_taps(size: usize, sigma: f64) -> Result<Vec<f64>> {
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
    let center = (size / 2) as f64;
    let mut taps: Vec<f64> = (0..size)
        .map(|i| {
            let d = i as f64 - center;
            (-d * d / (2.0 * sigma * sigma)).exp()
        })
        .collect();
    let total: f64 = taps.iter().sum();
    for t in &mut taps {
        *t /= total;
    }
    Ok(taps)
}

/// A Gaussian smoothing operator resolved from a [`KernelSpec`]:
/// separable taps plus the number of stacked passes.
#[derive(Debug, Clone)]
pub(crate) struct GaussOp {
    taps: Vec<f64>,
    passes: usize,
}

impl GaussOp {
    pub fn new(spec: &KernelSpec) -> Result<Self> {
        let single = if spec.stacked { spec.sub_spec() } else { *spec };
        // Re-validate: specs are plain structs and may be hand-built.
        KernelSpec::new(single.size, single.sigma)?;
        if spec.stacked {
            KernelSpec::stacked(spec.size, spec.sigma)?;
        }
        Ok(Self {
            taps: gaussian_taps(single.size, single.sigma)?,
            passes: if spec.stacked { 2 } else { 1 },
        })
    }

    pub fn apply(&self, field: &Array2<f64>) -> Array2<f64> {
        let mut out = sep_conv_field(field, &self.taps);
        for _ in 1..self.passes {
            out = sep_conv_field(&out, &self.taps);
        }
        out
    }

    pub fn adjoint(&self, field: &Array2<f64>) -> Array2<f64> {
        let mut out = sep_conv_adjoint(field, &self.taps);
        for _ in 1..self.passes {
            out = sep_conv_adjoint(&out, &self.taps);
        }
        out
    }
}

/// Inpainted tensor plus the raw kernel support `K * M` before guarding.
#[derive(Debug, Clone)]
pub struct InpaintResult {
    pub inpainted: Array3<f64>,
    pub support: Array2<f64>,
}

/// Normalized-convolution inpainting. `x_masked` must already have
/// non-kept pixels zeroed (the caller supplies `X (.) M`); `m_keep` is
/// broadcast across channels. Where support is exactly zero the output
/// is zero; elsewhere the denominator is guarded at `1e-8`.
pub fn inpaint(x_masked: &Image, m_keep: &Mask, spec: &KernelSpec) -> Result<InpaintResult> {
    if (x_masked.height(), x_masked.width()) != (m_keep.height(), m_keep.width()) {
        return Err(Error::ShapeMismatch(format!(
            "image is {}x{}, mask is {}x{}",
            x_masked.height(),
            x_masked.width(),
            m_keep.height(),
            m_keep.width()
        )));
    }
    let op = GaussOp::new(spec)?;
    let kept = m_keep.data().mapv(f64::from);
    let (inpainted, support) =
        inpaint_field(x_masked.data(), &kept, &op, DEFAULT_EPSILON);
    Ok(InpaintResult { inpainted, support })
}

/// Field-level inpainting shared with the objective: `kept` may be a
/// relaxed (real-valued) mask.
pub(crate) fn inpaint_field(
    x_masked: &Array3<f64>,
    kept: &Array2<f64>,
    op: &GaussOp,
    eps: f64,
) -> (Array3<f64>, Array2<f64>) {
    let (c, h, w) = x_masked.dim();
    let support = op.apply(kept);
    let mut out = Array3::zeros((c, h, w));
    for ch in 0..c {
        let num = op.apply(&x_masked.index_axis(ndarray::Axis(0), ch).to_owned());
        let plane = out.index_axis_mut(ndarray::Axis(0), ch);
        ndarray::Zip::from(plane).and(&num).and(&support).for_each(|p, &n, &d| {
            *p = if d == 0.0 { 0.0 } else { n / d.max(eps) };
        });
    }
    (out, support)
}
