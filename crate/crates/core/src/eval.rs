//! Segmentation quality metrics (accuracy, IoU, DICE) and batch
//! aggregation with optional orientation flipping.

use crate::error::{Error, Result};
use crate::image::Mask;

/// Per-image (or aggregate) scores. `flipped` records whether the
/// complement of the prediction scored better when flip search is on.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Metrics {
    pub accuracy: f64,
    pub iou: f64,
    pub dice: f64,
    pub flipped: bool,
}

fn check_shapes(pred: &Mask, gt: &Mask) -> Result<()> {
    if (pred.height(), pred.width()) != (gt.height(), gt.width()) {
        return Err(Error::ShapeMismatch(format!(
            "prediction is {}x{}, ground truth is {}x{}",
            pred.height(),
            pred.width(),
            gt.height(),
            gt.width()
        )));
    }
    Ok(())
}

fn counts(pred: &Mask, gt: &Mask) -> (usize, usize, usize, usize) {
    let mut intersection = 0;
    let mut pred_fg = 0;
    let mut gt_fg = 0;
    let mut agree = 0;
    for (&p, &g) in pred.data().iter().zip(gt.data().iter()) {
        intersection += usize::from(p == 1 && g == 1);
        pred_fg += usize::from(p == 1);
        gt_fg += usize::from(g == 1);
        agree += usize::from(p == g);
    }
    (intersection, pred_fg, gt_fg, agree)
}

/// Fraction of pixels where the prediction equals the ground truth.
pub fn accuracy(pred: &Mask, gt: &Mask) -> Result<f64> {
    check_shapes(pred, gt)?;
    let (_, _, _, agree) = counts(pred, gt);
    Ok(agree as f64 / (pred.height() * pred.width()) as f64)
}

/// Foreground intersection over union; 1.0 when both masks are empty.
pub fn iou(pred: &Mask, gt: &Mask) -> Result<f64> {
    check_shapes(pred, gt)?;
    let (intersection, pred_fg, gt_fg, _) = counts(pred, gt);
    let union = pred_fg + gt_fg - intersection;
    Ok(if union == 0 {
        1.0
    } else {
        intersection as f64 / union as f64
    })
}

/// DICE score `2|A & B| / (|A| + |B|)`; 1.0 when both masks are empty.
pub fn dice(pred: &Mask, gt: &Mask) -> Result<f64> {
    check_shapes(pred, gt)?;
    let (intersection, pred_fg, gt_fg, _) = counts(pred, gt);
    Ok(if pred_fg + gt_fg == 0 {
        1.0
    } else {
        2.0 * intersection as f64 / (pred_fg + gt_fg) as f64
    })
}

fn score(pred: &Mask, gt: &Mask, flipped: bool) -> Result<Metrics> {
    Ok(Metrics {
        accuracy: accuracy(pred, gt)?,
        iou: iou(pred, gt)?,
        dice: dice(pred, gt)?,
        flipped,
    })
}

/// Per-image metrics plus their unweighted mean.
#[derive(Debug, Clone)]
pub struct BatchEval {
    pub per_image: Vec<Metrics>,
    pub aggregate: Metrics,
}

/// Scores every (prediction, ground-truth) pair. With `flip_search`, the
/// prediction and its complement are both scored and the orientation
/// with the higher IoU is kept (ties keep the original).
pub fn evaluate_batch(pairs: &[(Mask, Mask)], flip_search: bool) -> Result<BatchEval> {
    if pairs.is_empty() {
        return Err(Error::InvalidArgument("empty evaluation batch".into()));
    }
    let mut per_image = Vec::with_capacity(pairs.len());
    for (pred, gt) in pairs {
        let direct = score(pred, gt, false)?;
        let chosen = if flip_search {
            let flipped = score(&pred.complement(), gt, true)?;
            if flipped.iou > direct.iou {
                flipped
            } else {
                direct
            }
        } else {
            direct
        };
        per_image.push(chosen);
    }
    let n = per_image.len() as f64;
    let aggregate = Metrics {
        accuracy: per_image.iter().map(|m| m.accuracy).sum::<f64>() / n,
        iou: per_image.iter().map(|m| m.iou).sum::<f64>() / n,
        dice: per_image.iter().map(|m| m.dice).sum::<f64>() / n,
        flipped: false,
    };
    Ok(BatchEval { per_image, aggregate })
}

/// Header of the report CSV shared by the batch commands.
pub const CSV_HEADER: [&str; 8] = [
    "image_id",
    "init_size",
    "accuracy",
    "iou",
    "dice",
    "flipped",
    "final_L_inp",
    "degenerate",
];
