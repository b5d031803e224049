//! Learning-free foreground/background segmentation by inpainting error
//! maximization.
//!
//! An image is partitioned by greedily searching for the binary mask
//! whose two regions predict each other worst: each region is inpainted
//! from the other with a mask-normalized Gaussian filter, and the
//! normalized reconstruction error is pushed up by boundary-restricted
//! projected ascent. No training is involved; the procedure applies to a
//! single unlabeled image.
//!
//! ```no_run
//! use iem::{multi_init_run, preprocess, IemConfig};
//!
//! let img = iem::load_image("photo.jpg".as_ref())?;
//! let img = preprocess(&img, 128);
//! let result = multi_init_run(&img, &IemConfig::default())?;
//! iem::save_mask(&result.mask, "photo_mask.png".as_ref())?;
//! # Ok::<(), iem::Error>(())
//! ```

pub mod cli;
pub mod conv;
pub mod eval;
pub mod image;
pub mod inpaint;
pub mod io;
pub mod objective;
pub mod optimizer;
pub mod synth;

mod error;

pub use conv::{convolve2d, KernelSpec};
pub use error::{Error, Result};
pub use eval::{accuracy, dice, evaluate_batch, iou, BatchEval, Metrics};
pub use image::{extract_boundary, preprocess, smooth_mask, Image, Mask, PixelSet, RelaxedMask};
pub use inpaint::{gaussian_kernel, inpaint, InpaintResult, DEFAULT_EPSILON};
pub use io::{load_image, load_mask, save_image, save_mask};
pub use objective::{
    diversity_penalty, diversity_penalty_gradient, iem_gradient, iem_objective, inpainting_loss,
    GradientField, IemConfig, LossEval, ObjectiveVariant, Toggles,
};
pub use optimizer::{init_square_mask, iem_step, multi_init_run, run_iem, SegResult, TracePoint};
pub use synth::{brute_force_optimum, corpus_spec, gen_layered, LayerModel, ShapeSpec, SynthSpec};
