//! Greedy maximization of the inpainting-error objective: infinite-step
//! projected ascent restricted to the mask boundary, majority smoothing
//! after each update, and selection across square initializations.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::image::{extract_boundary, smooth_mask, Image, Mask};
use crate::objective::{evaluate_full, GradientField, IemConfig, ObjectiveVariant};

/// One recorded step of the objective trace.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TracePoint {
    pub iteration: usize,
    pub l_iem: f64,
    pub l_inp: f64,
}

/// Outcome of one greedy run.
#[derive(Debug, Clone)]
pub struct SegResult {
    pub mask: Mask,
    /// Side length of the square initialization (0 when the caller
    /// supplied an arbitrary mask directly).
    pub init_size: usize,
    /// One entry for the initial state plus one per executed iteration.
    pub objective_trace: Vec<TracePoint>,
    /// First iteration whose update left the mask unchanged.
    pub converged_at: Option<usize>,
    /// Set when an iterate became empty or full; `mask` is then the last
    /// valid iterate.
    pub degenerate: bool,
    /// Unregularized inpainting loss of the final mask under the default
    /// variant; the selection score across initializations.
    pub final_inpainting_loss: f64,
}

/// Centered `size` x `size` square of ones with top-left at
/// `floor((side - size) / 2)`.
pub fn init_square_mask(side: usize, size: usize) -> Result<Mask> {
    if size == 0 || size >= side {
        return Err(Error::InvalidArgument(format!(
            "init size {size} out of range for side {side}"
        )));
    }
    let off = (side - size) / 2;
    Ok(Mask::from_fn(side, side, |r, c| {
        (off..off + size).contains(&r) && (off..off + size).contains(&c)
    }))
}

/// Applies the sign rule to a gradient field: boundary pixels (or all
/// pixels when unrestricted) become 1 on positive gradient, 0 on
/// negative, and keep their value on exact zero; then smooths.
fn apply_step(mask: &Mask, grad: &GradientField, cfg: &IemConfig) -> Mask {
    let mut next = mask.clone();
    if cfg.toggles.boundary_restricted {
        for (r, c) in extract_boundary(mask).iter() {
            let g = grad[(r, c)];
            if g > 0.0 {
                next.set(r, c, 1);
            } else if g < 0.0 {
                next.set(r, c, 0);
            }
        }
    } else {
        for r in 0..mask.height() {
            for c in 0..mask.width() {
                let g = grad[(r, c)];
                if g > 0.0 {
                    next.set(r, c, 1);
                } else if g < 0.0 {
                    next.set(r, c, 0);
                }
            }
        }
    }
    if cfg.toggles.smoothing_on {
        next = smooth_mask(&next);
    }
    next
}

/// One projected-ascent update. Errors on an empty or full input mask.
pub fn iem_step(x: &Image, mask: &Mask, cfg: &IemConfig) -> Result<Mask> {
    cfg.validate()?;
    if mask.is_degenerate() {
        return Err(Error::DegenerateMask);
    }
    let eval = evaluate_full(x, &mask.relaxed(), cfg, true)?;
    Ok(apply_step(mask, &eval.grad.expect("gradient requested"), cfg))
}

fn default_variant_loss(x: &Image, mask: &Mask, cfg: &IemConfig) -> f64 {
    let scoring = IemConfig {
        variant: ObjectiveVariant::default(),
        ..cfg.clone()
    };
    evaluate_full(x, &mask.relaxed(), &scoring, false)
        .map(|e| e.l_inp)
        .unwrap_or(f64::NEG_INFINITY)
}

/// Runs the greedy loop from `init` for `cfg.iterations` updates,
/// recording the objective after every executed iteration. Stops early
/// at a fixed point unless `strict_iterations` is set, and stops (keeping
/// the last valid mask) if an iterate becomes empty or full.
pub fn run_iem(x: &Image, init: &Mask, cfg: &IemConfig) -> Result<SegResult> {
    cfg.validate()?;
    if (x.height(), x.width()) != (init.height(), init.width()) {
        return Err(Error::ShapeMismatch(format!(
            "image is {}x{}, init mask is {}x{}",
            x.height(),
            x.width(),
            init.height(),
            init.width()
        )));
    }
    let mut trace = Vec::with_capacity(cfg.iterations + 1);
    if init.is_degenerate() {
        return Ok(SegResult {
            mask: init.clone(),
            init_size: 0,
            objective_trace: trace,
            converged_at: None,
            degenerate: true,
            final_inpainting_loss: default_variant_loss(x, init, cfg),
        });
    }

    let mut mask = init.clone();
    let mut eval = evaluate_full(x, &mask.relaxed(), cfg, true)?;
    trace.push(TracePoint { iteration: 0, l_iem: eval.l_iem, l_inp: eval.l_inp });
    let mut converged_at = None;
    let mut degenerate = false;

    let mut t = 1;
    while t <= cfg.iterations {
        let next = apply_step(&mask, eval.grad.as_ref().expect("gradient requested"), cfg);
        if next == mask {
            converged_at = Some(t);
            // Further updates are no-ops; pad the trace in strict mode.
            let point = TracePoint { iteration: t, l_iem: eval.l_iem, l_inp: eval.l_inp };
            if cfg.strict_iterations {
                for pad in t..=cfg.iterations {
                    trace.push(TracePoint { iteration: pad, ..point });
                }
            } else {
                trace.push(point);
            }
            break;
        }
        if next.is_degenerate() {
            degenerate = true;
            break;
        }
        mask = next;
        let want_grad = t < cfg.iterations;
        eval = evaluate_full(x, &mask.relaxed(), cfg, want_grad)?;
        trace.push(TracePoint { iteration: t, l_iem: eval.l_iem, l_inp: eval.l_inp });
        t += 1;
    }

    Ok(SegResult {
        final_inpainting_loss: default_variant_loss(x, &mask, cfg),
        mask,
        init_size: 0,
        objective_trace: trace,
        converged_at,
        degenerate,
    })
}

/// Runs [`run_iem`] once per configured square size and keeps the result
/// with the highest final inpainting loss (ties toward the smaller
/// size). Degenerate runs are excluded unless every run is degenerate.
pub fn multi_init_run(x: &Image, cfg: &IemConfig) -> Result<SegResult> {
    cfg.validate()?;
    if x.height() != x.width() {
        return Err(Error::ShapeMismatch(format!(
            "multi-init expects a square image, got {}x{}",
            x.height(),
            x.width()
        )));
    }
    let side = x.height();
    for &size in &cfg.init_sizes {
        if size >= side {
            return Err(Error::InvalidArgument(format!(
                "init size {size} must be smaller than image side {side}"
            )));
        }
    }

    let results: Vec<SegResult> = cfg
        .init_sizes
        .par_iter()
        .map(|&size| {
            let init = init_square_mask(side, size)?;
            let mut res = run_iem(x, &init, cfg)?;
            res.init_size = size;
            Ok(res)
        })
        .collect::<Result<_>>()?;

    let pick = |candidates: &[&SegResult]| -> SegResult {
        let mut best: Option<&SegResult> = None;
        for &r in candidates {
            best = match best {
                None => Some(r),
                Some(b)
                    if r.final_inpainting_loss > b.final_inpainting_loss
                        || (r.final_inpainting_loss == b.final_inpainting_loss
                            && r.init_size < b.init_size) =>
                {
                    Some(r)
                }
                Some(b) => Some(b),
            };
        }
        (*best.expect("non-empty candidate list")).clone()
    };

    let valid: Vec<&SegResult> = results.iter().filter(|r| !r.degenerate).collect();
    if valid.is_empty() {
        let all: Vec<&SegResult> = results.iter().collect();
        Ok(pick(&all))
    } else {
        Ok(pick(&valid))
    }
}
