//! The normalized inpainting-error objective, the diversity regularizer,
//! and their exact gradient with respect to a relaxed mask.
//!
//! Each region is scored by how badly the opposite region inpaints it:
//! `term(M) = norm(M . (X - psi(X . M~, M~))) / denom(M)`, and the loss
//! is `term(M) + term(M~)`. The gradient differentiates through every
//! dependency on the mask: the outer factor, the masked input and the
//! kernel support inside the inpainter, the variant denominator, and the
//! regularizer mean. Guarded quantities are held constant where their
//! guard is active, and l1 terms use the sign subgradient with
//! `sign(0) = 0`.

use std::fmt;
use std::str::FromStr;

use ndarray::{Array2, Array3, Axis};

use crate::conv::KernelSpec;
use crate::error::{Error, Result};
use crate::image::{Image, RelaxedMask};
use crate::inpaint::{inpaint_field, GaussOp, DEFAULT_EPSILON};

/// Norm applied to the masked reconstruction residual.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NumeratorNorm {
    L1,
    L2,
}

/// Normalizer of each term: mask mass, or the norm of the masked image.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DenominatorKind {
    MaskCount,
    ImageL1,
    ImageL2,
}

/// One of the objective variants; the default pairs the l1 residual with
/// the mask-count denominator.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ObjectiveVariant {
    pub numerator: NumeratorNorm,
    pub denominator: DenominatorKind,
}

impl Default for ObjectiveVariant {
    fn default() -> Self {
        Self {
            numerator: NumeratorNorm::L1,
            denominator: DenominatorKind::MaskCount,
        }
    }
}

impl FromStr for ObjectiveVariant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let (numerator, denominator) = match s {
            "l1-mask" => (NumeratorNorm::L1, DenominatorKind::MaskCount),
            "l2-mask" => (NumeratorNorm::L2, DenominatorKind::MaskCount),
            "l1-imgl1" => (NumeratorNorm::L1, DenominatorKind::ImageL1),
            "l2-imgl2" => (NumeratorNorm::L2, DenominatorKind::ImageL2),
            other => {
                return Err(Error::InvalidArgument(format!(
                    "unknown objective variant '{other}' \
                     (expected l1-mask, l2-mask, l1-imgl1, or l2-imgl2)"
                )))
            }
        };
        Ok(Self { numerator, denominator })
    }
}

impl fmt::Display for ObjectiveVariant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match (self.numerator, self.denominator) {
            (NumeratorNorm::L1, DenominatorKind::MaskCount) => "l1-mask",
            (NumeratorNorm::L2, DenominatorKind::MaskCount) => "l2-mask",
            (NumeratorNorm::L1, DenominatorKind::ImageL1) => "l1-imgl1",
            (NumeratorNorm::L2, DenominatorKind::ImageL2) => "l2-imgl2",
            (NumeratorNorm::L1, DenominatorKind::ImageL2) => "l1-imgl2",
            (NumeratorNorm::L2, DenominatorKind::ImageL1) => "l2-imgl1",
        };
        f.write_str(s)
    }
}

/// Ablation switches.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Toggles {
    pub regularizer_on: bool,
    pub smoothing_on: bool,
    pub boundary_restricted: bool,
}

impl Default for Toggles {
    fn default() -> Self {
        Self {
            regularizer_on: true,
            smoothing_on: true,
            boundary_restricted: true,
        }
    }
}

/// All hyperparameters of the greedy maximization.
#[derive(Debug, Clone, PartialEq)]
pub struct IemConfig {
    pub kernel: KernelSpec,
    pub lambda: f64,
    pub variant: ObjectiveVariant,
    pub iterations: usize,
    pub init_sizes: Vec<usize>,
    pub toggles: Toggles,
    pub epsilon: f64,
    /// Run every requested iteration even after reaching a fixed point.
    pub strict_iterations: bool,
}

impl Default for IemConfig {
    fn default() -> Self {
        Self {
            kernel: KernelSpec::stacked(21, 5.0).expect("default kernel spec"),
            lambda: 0.001,
            variant: ObjectiveVariant::default(),
            iterations: 150,
            init_sizes: vec![44, 78, 92],
            toggles: Toggles::default(),
            epsilon: DEFAULT_EPSILON,
            strict_iterations: false,
        }
    }
}

impl IemConfig {
    pub fn validate(&self) -> Result<()> {
        if self.iterations < 1 {
            return Err(Error::InvalidArgument(
                "iterations must be at least 1".into(),
            ));
        }
        if self.init_sizes.is_empty() {
            return Err(Error::InvalidArgument("init_sizes must be non-empty".into()));
        }
        if self.init_sizes.iter().any(|&s| s == 0) {
            return Err(Error::InvalidArgument("init sizes must be positive".into()));
        }
        if !(self.lambda >= 0.0) || !self.lambda.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "lambda must be non-negative, got {}",
                self.lambda
            )));
        }
        if !(self.epsilon > 0.0) || !self.epsilon.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "epsilon must be positive, got {}",
                self.epsilon
            )));
        }
        GaussOp::new(&self.kernel).map(|_| ())
    }
}

/// One real value per mask pixel.
pub type GradientField = Array2<f64>;

/// Objective value plus the degeneracy flag raised when a denominator
/// collapses (empty or full mask).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LossEval {
    pub value: f64,
    pub degenerate: bool,
}

fn sgn(v: f64) -> f64 {
    if v > 0.0 {
        1.0
    } else if v < 0.0 {
        -1.0
    } else {
        0.0
    }
}

fn check_shapes(x: &Image, m: &RelaxedMask) -> Result<()> {
    if (x.height(), x.width()) != (m.height(), m.width()) {
        return Err(Error::ShapeMismatch(format!(
            "image is {}x{}, mask is {}x{}",
            x.height(),
            x.width(),
            m.height(),
            m.width()
        )));
    }
    Ok(())
}

/// Forward state of one objective term (one direction of inpainting).
struct TermData {
    psi: Array3<f64>,
    support: Array2<f64>,
    residual: Array3<f64>,
    n: f64,
    d: f64,
}

impl TermData {
    fn value(&self, eps: f64) -> f64 {
        self.n / self.d.max(eps)
    }
}

fn term_forward(
    x: &Array3<f64>,
    outer: &Array2<f64>,
    kept: &Array2<f64>,
    op: &GaussOp,
    eps: f64,
    variant: ObjectiveVariant,
) -> TermData {
    let (c, h, w) = x.dim();
    let mut masked = Array3::zeros((c, h, w));
    for ch in 0..c {
        let plane = x.index_axis(Axis(0), ch);
        let mut dst = masked.index_axis_mut(Axis(0), ch);
        ndarray::Zip::from(&mut dst).and(&plane).and(kept).for_each(|m, &v, &k| *m = v * k);
    }
    let (psi, support) = inpaint_field(&masked, kept, op, eps);
    let residual = x - &psi;

    let mut n = 0.0;
    match variant.numerator {
        NumeratorNorm::L1 => {
            for ch in 0..c {
                let res = residual.index_axis(Axis(0), ch);
                ndarray::Zip::from(&res).and(outer).for_each(|&r, &o| n += (o * r).abs());
            }
        }
        NumeratorNorm::L2 => {
            for ch in 0..c {
                let res = residual.index_axis(Axis(0), ch);
                ndarray::Zip::from(&res).and(outer).for_each(|&r, &o| {
                    let v = o * r;
                    n += v * v;
                });
            }
            n = n.sqrt();
        }
    }

    let d = match variant.denominator {
        DenominatorKind::MaskCount => outer.sum(),
        DenominatorKind::ImageL1 => {
            let mut acc = 0.0;
            for ch in 0..c {
                let plane = x.index_axis(Axis(0), ch);
                ndarray::Zip::from(&plane).and(outer).for_each(|&v, &o| acc += (v * o).abs());
            }
            acc
        }
        DenominatorKind::ImageL2 => {
            let mut acc = 0.0;
            for ch in 0..c {
                let plane = x.index_axis(Axis(0), ch);
                ndarray::Zip::from(&plane).and(outer).for_each(|&v, &o| {
                    let u = v * o;
                    acc += u * u;
                });
            }
            acc.sqrt()
        }
    };

    TermData { psi, support, residual, n, d }
}

/// Adds `d(term)/dm` to `grad`. `sign_outer` and `sign_kept` are the
/// derivatives of this term's outer and kept fields with respect to the
/// mask (+1 or -1 depending on which side of the partition they are).
#[allow(clippy::too_many_arguments)]
fn accumulate_term_gradient(
    x: &Array3<f64>,
    outer: &Array2<f64>,
    td: &TermData,
    sign_outer: f64,
    sign_kept: f64,
    op: &GaussOp,
    eps: f64,
    variant: ObjectiveVariant,
    grad: &mut Array2<f64>,
) {
    let (c, h, w) = x.dim();
    let d_guard = td.d.max(eps);

    // Numerator path.
    let upstream = |o: f64, rv: f64| -> f64 {
        match variant.numerator {
            NumeratorNorm::L1 => sgn(o * rv),
            NumeratorNorm::L2 => {
                if td.n > 0.0 {
                    o * rv / td.n
                } else {
                    0.0
                }
            }
        }
    };
    let mut grad_n: Array2<f64> = Array2::zeros((h, w));
    for ch in 0..c {
        let res = td.residual.index_axis(Axis(0), ch);
        let psi = td.psi.index_axis(Axis(0), ch);
        let mut h1: Array2<f64> = Array2::zeros((h, w));
        let mut h2: Array2<f64> = Array2::zeros((h, w));
        ndarray::Zip::from(&mut grad_n)
            .and(outer)
            .and(&res)
            .for_each(|g, &o, &rv| *g += sign_outer * upstream(o, rv) * rv);
        // No gradient flows through the inpainted value where its
        // support guard is active.
        ndarray::Zip::from(&mut h1)
            .and(&mut h2)
            .and(outer)
            .and(&res)
            .and(&psi)
            .and(&td.support)
            .for_each(|h1v, h2v, &o, &rv, &pv, &s| {
                if s >= eps {
                    let g = upstream(o, rv) * o / s;
                    *h1v = g;
                    *h2v = g * pv;
                }
            });
        let adj_h1 = op.adjoint(&h1);
        let adj_h2 = op.adjoint(&h2);
        let plane = x.index_axis(Axis(0), ch);
        // Residual is x - psi: the chain through the kept field enters
        // with the opposite sign.
        ndarray::Zip::from(&mut grad_n)
            .and(&plane)
            .and(&adj_h1)
            .and(&adj_h2)
            .for_each(|g, &xv, &a, &b| *g -= sign_kept * (xv * a - b));
    }

    // Denominator path; frozen while its guard is active.
    let n_over_d2 = td.n / (d_guard * d_guard);
    if td.d >= eps {
        match variant.denominator {
            DenominatorKind::MaskCount => {
                let delta = n_over_d2 * sign_outer;
                grad.mapv_inplace(|g| g - delta);
            }
            DenominatorKind::ImageL1 => {
                for ch in 0..c {
                    let plane = x.index_axis(Axis(0), ch);
                    ndarray::Zip::from(&mut *grad)
                        .and(&plane)
                        .and(outer)
                        .for_each(|g, &xv, &o| {
                            *g -= n_over_d2 * sign_outer * sgn(xv * o) * xv;
                        });
                }
            }
            DenominatorKind::ImageL2 => {
                for ch in 0..c {
                    let plane = x.index_axis(Axis(0), ch);
                    ndarray::Zip::from(&mut *grad)
                        .and(&plane)
                        .and(outer)
                        .for_each(|g, &xv, &o| {
                            *g -= n_over_d2 * sign_outer * xv * xv * o / d_guard;
                        });
                }
            }
        }
    }

    ndarray::Zip::from(grad).and(&grad_n).for_each(|g, &gn| *g += gn / d_guard);
}

/// Within-region deviation of one side: `|w . (X - mu(w))|_2^2` with a
/// per-channel mean over `w`-weighted pixels.
fn deviation_part(x: &Array3<f64>, weight: &Array2<f64>, eps: f64) -> f64 {
    let c = x.dim().0;
    let mass = weight.sum().max(eps);
    let mut total = 0.0;
    for ch in 0..c {
        let plane = x.index_axis(Axis(0), ch);
        let mut weighted = 0.0;
        ndarray::Zip::from(&plane).and(weight).for_each(|&v, &w| weighted += v * w);
        let mean = weighted / mass;
        ndarray::Zip::from(&plane).and(weight).for_each(|&v, &w| {
            let e = w * (v - mean);
            total += e * e;
        });
    }
    total
}

/// Adds `sign * d(sigma(w))/dw` to `grad` (chain through `w` handled by
/// the caller via `sign`).
fn accumulate_deviation_gradient(
    x: &Array3<f64>,
    weight: &Array2<f64>,
    sign: f64,
    eps: f64,
    grad: &mut Array2<f64>,
) {
    let (c, h, w) = x.dim();
    let mass_raw = weight.sum();
    let mass = mass_raw.max(eps);
    let live = if mass_raw >= eps { 1.0 } else { 0.0 };
    for ch in 0..c {
        let plane = x.index_axis(Axis(0), ch);
        let mut weighted = 0.0;
        ndarray::Zip::from(&plane).and(weight).for_each(|&v, &wv| weighted += v * wv);
        let mean = weighted / mass;
        // v_sum = sum_p w_p^2 (x_p - mean): couples every pixel through
        // the mean's dependence on the mask.
        let mut v_sum = 0.0;
        ndarray::Zip::from(&plane).and(weight).for_each(|&v, &wv| {
            v_sum += wv * wv * (v - mean);
        });
        ndarray::Zip::from(&mut *grad).and(&plane).and(weight).for_each(|g, &xv, &wv| {
            let dmu = (xv - mean * live) / mass;
            *g += sign * (2.0 * wv * (xv - mean) * (xv - mean) - 2.0 * dmu * v_sum);
        });
    }
}

pub(crate) struct FullEval {
    pub l_inp: f64,
    pub l_iem: f64,
    pub degenerate: bool,
    pub grad: Option<GradientField>,
}

pub(crate) fn evaluate_full(
    x: &Image,
    m: &RelaxedMask,
    cfg: &IemConfig,
    want_grad: bool,
) -> Result<FullEval> {
    check_shapes(x, m)?;
    let op = GaussOp::new(&cfg.kernel)?;
    let eps = cfg.epsilon;
    let variant = cfg.variant;
    let fg = m.data();
    let bg = m.complement();
    let bg = bg.data();
    let data = x.data();

    let term_a = term_forward(data, fg, bg, &op, eps, variant);
    let term_b = term_forward(data, bg, fg, &op, eps, variant);
    let l_inp = term_a.value(eps) + term_b.value(eps);
    let degenerate = term_a.d <= eps || term_b.d <= eps;

    let lambda = if cfg.toggles.regularizer_on { cfg.lambda } else { 0.0 };
    let penalty = if lambda != 0.0 || want_grad {
        deviation_part(data, fg, eps) + deviation_part(data, bg, eps)
    } else {
        0.0
    };
    let l_iem = l_inp - 0.5 * lambda * penalty;

    let grad = if want_grad {
        let mut g: Array2<f64> = Array2::zeros((m.height(), m.width()));
        accumulate_term_gradient(data, fg, &term_a, 1.0, -1.0, &op, eps, variant, &mut g);
        accumulate_term_gradient(data, bg, &term_b, -1.0, 1.0, &op, eps, variant, &mut g);
        if lambda != 0.0 {
            let mut pg: Array2<f64> = Array2::zeros((m.height(), m.width()));
            accumulate_deviation_gradient(data, fg, 1.0, eps, &mut pg);
            accumulate_deviation_gradient(data, bg, -1.0, eps, &mut pg);
            ndarray::Zip::from(&mut g).and(&pg).for_each(|g, &p| *g -= 0.5 * lambda * p);
        }
        Some(g)
    } else {
        None
    };

    Ok(FullEval { l_inp, l_iem, degenerate, grad })
}

/// Normalized inpainting error of the partition (both directions),
/// unregularized. Flags `degenerate` when either denominator collapses.
pub fn inpainting_loss(x: &Image, m: &RelaxedMask, cfg: &IemConfig) -> Result<LossEval> {
    let eval = evaluate_full(x, m, cfg, false)?;
    Ok(LossEval { value: eval.l_inp, degenerate: eval.degenerate })
}

/// Sum of within-region squared deviations from the per-channel,
/// per-region mean, for the mask and its complement.
pub fn diversity_penalty(x: &Image, m: &RelaxedMask) -> Result<f64> {
    check_shapes(x, m)?;
    let bg = m.complement();
    Ok(deviation_part(x.data(), m.data(), DEFAULT_EPSILON)
        + deviation_part(x.data(), bg.data(), DEFAULT_EPSILON))
}

/// The full maximization objective: inpainting loss minus
/// `lambda / 2` times the diversity penalty.
pub fn iem_objective(x: &Image, m: &RelaxedMask, cfg: &IemConfig) -> Result<LossEval> {
    let eval = evaluate_full(x, m, cfg, false)?;
    Ok(LossEval { value: eval.l_iem, degenerate: eval.degenerate })
}

/// Exact gradient of [`iem_objective`] with respect to the relaxed mask.
pub fn iem_gradient(x: &Image, m: &RelaxedMask, cfg: &IemConfig) -> Result<GradientField> {
    let eval = evaluate_full(x, m, cfg, true)?;
    Ok(eval.grad.expect("gradient requested"))
}

/// Gradient of [`diversity_penalty`] with respect to the relaxed mask.
pub fn diversity_penalty_gradient(x: &Image, m: &RelaxedMask) -> Result<GradientField> {
    check_shapes(x, m)?;
    let mut g: Array2<f64> = Array2::zeros((m.height(), m.width()));
    let bg = m.complement();
    accumulate_deviation_gradient(x.data(), m.data(), 1.0, DEFAULT_EPSILON, &mut g);
    accumulate_deviation_gradient(x.data(), bg.data(), -1.0, DEFAULT_EPSILON, &mut g);
    Ok(g)
}
