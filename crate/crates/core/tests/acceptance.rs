//! Acceptance suite: one test per release criterion, each printing a
//! PASS line with its measured numbers (run with `--nocapture` to see
//! them). Criteria needing external datasets or more hardware than a
//! desk machine are `#[ignore]`d with instructions.

use std::time::Instant;

use iem::cli::{cmd_evaluate, cmd_segment, cmd_synth, RunSettings};
use iem::{
    brute_force_optimum, corpus_spec, dice, diversity_penalty, gen_layered, iem_gradient,
    iem_objective, inpainting_loss, init_square_mask, iou, multi_init_run, run_iem, Image,
    IemConfig, KernelSpec, Mask, RelaxedMask, Toggles,
};
use ndarray::Array2;

fn lcg(seed: u64) -> impl FnMut() -> f64 {
    let mut state = seed.wrapping_mul(0x9e37_79b9_7f4a_7c15).wrapping_add(1);
    move || {
        state = state
            .wrapping_mul(6364136223846793005)
            .wrapping_add(1442695040888963407);
        ((state >> 33) as f64) / ((1u64 << 31) as f64)
    }
}

/// High-frequency image whose inpainting residuals stay bounded away
/// from zero (no l1 kinks near the finite-difference probes).
fn kink_free_image(channels: usize, side: usize, seed: u64) -> Image {
    let mut next = lcg(seed);
    let signs: Vec<f64> = (0..channels)
        .map(|_| if next() > 0.5 { 1.0 } else { -1.0 })
        .collect();
    Image::from_fn(channels, side, side, |c, r, col| {
        let checker = if (r + col) % 2 == 0 { 1.0 } else { -1.0 };
        0.5 + signs[c] * 0.35 * checker + 0.05 * (next() - 0.5)
    })
    .unwrap()
}

fn fd_gradient(x: &Image, m: &RelaxedMask, cfg: &IemConfig, h: f64) -> Array2<f64> {
    Array2::from_shape_fn((m.height(), m.width()), |(r, c)| {
        let mut plus = m.data().clone();
        plus[(r, c)] += h;
        let mut minus = m.data().clone();
        minus[(r, c)] -= h;
        let fp = iem_objective(x, &RelaxedMask::new(plus).unwrap(), cfg).unwrap().value;
        let fm = iem_objective(x, &RelaxedMask::new(minus).unwrap(), cfg).unwrap().value;
        (fp - fm) / (2.0 * h)
    })
}

/// Criterion 1: on 50 random 16x16 relaxed-mask instances with
/// kink-free residuals, the analytic gradient matches central finite
/// differences (h = 1e-4) with max relative error < 1e-3 per pixel,
/// in under 30 s.
#[test]
fn acceptance_1_gradient_matches_finite_differences() {
    let started = Instant::now();
    let variants = ["l1-mask", "l2-mask", "l1-imgl1", "l2-imgl2"];
    let mut worst: f64 = 0.0;
    for i in 0..50u64 {
        let x = kink_free_image(2, 16, 100 + i);
        let mut next = lcg(500 + i);
        let m = RelaxedMask::new(Array2::from_shape_fn((16, 16), |_| 0.2 + 0.6 * next())).unwrap();
        let kernel = if i % 5 == 4 {
            KernelSpec::stacked(5, 1.5).unwrap()
        } else {
            KernelSpec::new(5, 1.5).unwrap()
        };
        let cfg = IemConfig {
            kernel,
            variant: variants[(i % 4) as usize].parse().unwrap(),
            lambda: 0.001,
            init_sizes: vec![4],
            ..IemConfig::default()
        };
        let analytic = iem_gradient(&x, &m, &cfg).unwrap();
        let numeric = fd_gradient(&x, &m, &cfg, 1e-4);
        for (a, b) in analytic.iter().zip(numeric.iter()) {
            let rel = (a - b).abs() / b.abs().max(1e-4);
            worst = worst.max(rel);
            assert!(rel < 1e-3, "instance {i}: {a} vs {b} (rel {rel})");
        }
    }
    let elapsed = started.elapsed();
    assert!(elapsed.as_secs_f64() < 30.0, "took {elapsed:?}");
    eprintln!(
        "ACCEPTANCE 1 PASS: gradient vs finite differences, 50 instances, \
         max rel err {worst:.2e} (< 1e-3) in {elapsed:.2?}"
    );
}

/// Local truncated normalized Gaussian for the definitional oracles.
fn oracle_kernel(size: usize, sigma: f64) -> Vec<Vec<f64>> {
    let c = (size / 2) as f64;
    let mut k = vec![vec![0.0; size]; size];
    let mut total = 0.0;
    for (a, row) in k.iter_mut().enumerate() {
        for (b, v) in row.iter_mut().enumerate() {
            let d2 = (a as f64 - c).powi(2) + (b as f64 - c).powi(2);
            *v = (-d2 / (2.0 * sigma * sigma)).exp();
            total += *v;
        }
    }
    for row in &mut k {
        for v in row.iter_mut() {
            *v /= total;
        }
    }
    k
}

/// Criterion 2: inpaint, inpainting_loss, and diversity_penalty match
/// explicit-sum definitional oracles on 100 random instances of at most
/// 5x5 pixels, within 1e-10 absolute, in under 10 s.
#[test]
fn acceptance_2_definitional_oracles_agree() {
    let started = Instant::now();
    let variants = ["l1-mask", "l2-mask", "l1-imgl1", "l2-imgl2"];
    for i in 0..100u64 {
        let side = 3 + (i % 3) as usize; // 3..=5
        let channels = 1 + (i % 2) as usize * 2; // 1 or 3
        let mut next = lcg(7000 + i);
        let x = Image::from_fn(channels, side, side, |_, _, _| next()).unwrap();
        let mut mask = Mask::from_fn(side, side, |_, _| next() > 0.5);
        if mask.is_degenerate() {
            mask.set(0, 0, 1 - mask.get(0, 0));
        }
        let ksize = 3;
        let sigma = 0.8 + next();
        let kernel = oracle_kernel(ksize, sigma);
        let cfg = IemConfig {
            kernel: KernelSpec::new(ksize, sigma).unwrap(),
            variant: variants[(i % 4) as usize].parse().unwrap(),
            init_sizes: vec![2],
            ..IemConfig::default()
        };

        let fg = |r: usize, c: usize| f64::from(mask.get(r, c));
        let bg = |r: usize, c: usize| 1.0 - f64::from(mask.get(r, c));
        let half = ksize as i64 / 2;

        // definitional inpainting of `keep` at one pixel
        let psi_at = |keep: &dyn Fn(usize, usize) -> f64, ch: usize, r: i64, c: i64| -> f64 {
            let mut num = 0.0;
            let mut den = 0.0;
            for a in 0..ksize as i64 {
                for b in 0..ksize as i64 {
                    let rr = r + a - half;
                    let cc = c + b - half;
                    if rr < 0 || rr >= side as i64 || cc < 0 || cc >= side as i64 {
                        continue;
                    }
                    let kv = kernel[a as usize][b as usize];
                    let kp = keep(rr as usize, cc as usize);
                    num += kv * kp * x.data()[(ch, rr as usize, cc as usize)];
                    den += kv * kp;
                }
            }
            if den == 0.0 {
                0.0
            } else {
                num / den.max(1e-8)
            }
        };

        // inpaint oracle (masked input supplied, kept = mask)
        let masked = Image::from_fn(channels, side, side, |ch, r, c| {
            x.data()[(ch, r, c)] * fg(r, c)
        })
        .unwrap();
        let got = iem::inpaint(&masked, &mask, &cfg.kernel).unwrap();
        for ch in 0..channels {
            for r in 0..side {
                for c in 0..side {
                    let expect = psi_at(&fg, ch, r as i64, c as i64);
                    let v = got.inpainted[(ch, r, c)];
                    assert!((v - expect).abs() < 1e-10, "inpaint {i}: {v} vs {expect}");
                }
            }
        }

        // loss oracle
        let term = |outer: &dyn Fn(usize, usize) -> f64,
                    keep: &dyn Fn(usize, usize) -> f64|
         -> f64 {
            let mut num = 0.0;
            for ch in 0..channels {
                for r in 0..side {
                    for c in 0..side {
                        let res = x.data()[(ch, r, c)] - psi_at(keep, ch, r as i64, c as i64);
                        let v = outer(r, c) * res;
                        num += match cfg.variant.numerator {
                            iem::objective::NumeratorNorm::L1 => v.abs(),
                            iem::objective::NumeratorNorm::L2 => v * v,
                        };
                    }
                }
            }
            if cfg.variant.numerator == iem::objective::NumeratorNorm::L2 {
                num = num.sqrt();
            }
            let mut den = 0.0;
            for r in 0..side {
                for c in 0..side {
                    match cfg.variant.denominator {
                        iem::objective::DenominatorKind::MaskCount => den += outer(r, c),
                        iem::objective::DenominatorKind::ImageL1 => {
                            for ch in 0..channels {
                                den += (x.data()[(ch, r, c)] * outer(r, c)).abs();
                            }
                        }
                        iem::objective::DenominatorKind::ImageL2 => {
                            for ch in 0..channels {
                                let v = x.data()[(ch, r, c)] * outer(r, c);
                                den += v * v;
                            }
                        }
                    }
                }
            }
            if cfg.variant.denominator == iem::objective::DenominatorKind::ImageL2 {
                den = den.sqrt();
            }
            num / den.max(1e-8)
        };
        let expect_loss = term(&fg, &bg) + term(&bg, &fg);
        let got_loss = inpainting_loss(&x, &mask.relaxed(), &cfg).unwrap().value;
        assert!(
            (got_loss - expect_loss).abs() < 1e-10,
            "loss {i}: {got_loss} vs {expect_loss}"
        );

        // diversity oracle
        let mut expect_pen = 0.0;
        for w in [&fg as &dyn Fn(usize, usize) -> f64, &bg] {
            let mut mass = 0.0;
            for r in 0..side {
                for c in 0..side {
                    mass += w(r, c);
                }
            }
            for ch in 0..channels {
                let mut mean = 0.0;
                for r in 0..side {
                    for c in 0..side {
                        mean += w(r, c) * x.data()[(ch, r, c)];
                    }
                }
                mean /= mass.max(1e-8);
                for r in 0..side {
                    for c in 0..side {
                        let e = w(r, c) * (x.data()[(ch, r, c)] - mean);
                        expect_pen += e * e;
                    }
                }
            }
        }
        let got_pen = diversity_penalty(&x, &mask.relaxed()).unwrap();
        assert!(
            (got_pen - expect_pen).abs() < 1e-10,
            "penalty {i}: {got_pen} vs {expect_pen}"
        );
    }
    let elapsed = started.elapsed();
    assert!(elapsed.as_secs_f64() < 10.0, "took {elapsed:?}");
    eprintln!(
        "ACCEPTANCE 2 PASS: inpaint/loss/penalty vs definitional oracles, \
         100 instances within 1e-10 in {elapsed:.2?}"
    );
}

/// Criterion 3: on 20 random 4x4 instances with a 3x3 kernel the greedy
/// run never beats the exhaustive optimum, and on two-tone instances
/// the exhaustive optimum is one of the two tone halves. Under 2 min.
#[test]
fn acceptance_3_brute_force_bound_and_two_tone_optimum() {
    let started = Instant::now();
    let cfg = IemConfig {
        kernel: KernelSpec::new(3, 1.0).unwrap(),
        lambda: 0.0,
        iterations: 25,
        init_sizes: vec![2],
        ..IemConfig::default()
    };

    for i in 0..20u64 {
        let mut next = lcg(9000 + i);
        let x = Image::from_fn(3, 4, 4, |_, _, _| next()).unwrap();
        let (_, best) = brute_force_optimum(&x, &cfg, 16).unwrap();
        let init = init_square_mask(4, 2).unwrap();
        let run = run_iem(&x, &init, &cfg).unwrap();
        let greedy = iem_objective(&x, &run.mask.relaxed(), &cfg).unwrap().value;
        assert!(
            greedy <= best + 1e-12,
            "instance {i}: greedy {greedy} exceeds optimum {best}"
        );
    }

    // Two-tone instances: contrasting constant halves, split left/right.
    for (i, (lo, hi)) in [(0.1, 0.9), (0.2, 0.7), (0.05, 0.55)].iter().enumerate() {
        let x = Image::from_fn(3, 4, 4, |ch, _, c| {
            let v = if c < 2 { *lo } else { *hi };
            v + 0.03 * ch as f64
        })
        .unwrap();
        let (opt, value) = brute_force_optimum(&x, &cfg, 16).unwrap();
        let left = Mask::from_fn(4, 4, |_, c| c < 2);
        let right = left.complement();
        assert!(
            opt == left || opt == right,
            "two-tone {i}: optimum (value {value}) is not a tone half: {:?}",
            opt.data()
        );
    }

    let elapsed = started.elapsed();
    assert!(elapsed.as_secs_f64() < 120.0, "took {elapsed:?}");
    eprintln!(
        "ACCEPTANCE 3 PASS: greedy <= exhaustive optimum on 20 instances, \
         two-tone optima on tone boundary, in {elapsed:.2?}"
    );
}

/// Criterion 4: objective symmetry in M and its complement (exact),
/// bit-identical greedy trajectories under constant channel shifts,
/// positive homogeneity within 1e-9, and the DICE/IoU identity within
/// 1e-12.
#[test]
fn acceptance_4_invariance_suite() {
    let started = Instant::now();

    // exact symmetry, every variant
    for (i, variant) in ["l1-mask", "l2-mask", "l1-imgl1", "l2-imgl2"].iter().enumerate() {
        let mut next = lcg(400 + i as u64);
        let x = Image::from_fn(3, 6, 6, |_, _, _| next()).unwrap();
        for _ in 0..8 {
            let mut m = Mask::from_fn(6, 6, |_, _| next() > 0.5);
            if m.is_degenerate() {
                m.set(2, 3, 1 - m.get(2, 3));
            }
            let cfg = IemConfig {
                kernel: KernelSpec::new(5, 1.5).unwrap(),
                variant: variant.parse().unwrap(),
                init_sizes: vec![2],
                ..IemConfig::default()
            };
            let a = inpainting_loss(&x, &m.relaxed(), &cfg).unwrap();
            let b = inpainting_loss(&x, &m.complement().relaxed(), &cfg).unwrap();
            assert!(a.value == b.value, "variant {variant}: {} != {}", a.value, b.value);
        }
    }

    // trajectory shift invariance: the 21x21 window covers the whole
    // 16x16 image, so every mask keeps full support and the default
    // objective is exactly shift invariant.
    let base = kink_free_image(3, 16, 4242);
    let shift = [0.06, 0.02, 0.04];
    let shifted = Image::from_fn(3, 16, 16, |c, r, col| base.data()[(c, r, col)] + shift[c])
        .unwrap();
    let cfg = IemConfig { init_sizes: vec![6], ..IemConfig::default() };
    let init = init_square_mask(16, 6).unwrap();
    let run_a = run_iem(&base, &init, &cfg).unwrap();
    let run_b = run_iem(&shifted, &init, &cfg).unwrap();
    assert_eq!(run_a.mask, run_b.mask, "trajectories diverged under shift");
    assert_eq!(run_a.converged_at, run_b.converged_at);

    // positive homogeneity of the default loss
    let mut next = lcg(88);
    let x = Image::from_fn(2, 6, 6, |_, _, _| next()).unwrap();
    let m = Mask::from_fn(6, 6, |r, c| (r + c) % 3 != 0);
    let cfg_h = IemConfig {
        kernel: KernelSpec::new(5, 1.5).unwrap(),
        init_sizes: vec![2],
        ..IemConfig::default()
    };
    for a in [0.3, 1.9, 2.6] {
        let scaled = Image::new(x.data() * a).unwrap();
        let lhs = inpainting_loss(&scaled, &m.relaxed(), &cfg_h).unwrap().value;
        let rhs = a * inpainting_loss(&x, &m.relaxed(), &cfg_h).unwrap().value;
        assert!((lhs - rhs).abs() < 1e-9, "homogeneity: {lhs} vs {rhs}");
    }

    // dice = 2 iou / (1 + iou)
    let mut next = lcg(99);
    for _ in 0..50 {
        let p = Mask::from_fn(6, 6, |_, _| next() > 0.45);
        let g = Mask::from_fn(6, 6, |_, _| next() > 0.55);
        let i = iou(&p, &g).unwrap();
        let d = dice(&p, &g).unwrap();
        assert!((d - 2.0 * i / (1.0 + i)).abs() < 1e-12);
    }

    eprintln!(
        "ACCEPTANCE 4 PASS: symmetry exact, trajectory shift invariant, \
         homogeneity 1e-9, dice identity 1e-12, in {:.2?}",
        started.elapsed()
    );
}

/// Criterion 5: on the 50-image planted-shape corpus the default
/// configuration reaches mean IoU >= 0.9, and disabling either the
/// regularizer or smoothing strictly lowers mean IoU on the textured
/// subset. Under 15 min.
#[test]
fn acceptance_5_synthetic_recovery_and_ablations() {
    let started = Instant::now();
    let seed = 0u64;
    let indices: Vec<usize> = (0..50).collect();
    let textured: Vec<usize> = indices
        .iter()
        .copied()
        .filter(|i| corpus_spec(*i, seed, 128).is_textured())
        .collect();
    assert!(textured.len() >= 15, "corpus mix regressed: {}", textured.len());

    let mean_iou = |ids: &[usize], cfg: &IemConfig| -> f64 {
        let mut total = 0.0;
        for &i in ids {
            let (img, gt) = gen_layered(&corpus_spec(i, seed, 128)).unwrap();
            let res = multi_init_run(&img, cfg).unwrap();
            total += iou(&res.mask, &gt).unwrap();
        }
        total / ids.len() as f64
    };

    let default_cfg = IemConfig::default();
    let overall = mean_iou(&indices, &default_cfg);
    assert!(overall >= 0.9, "mean IoU {overall} below 0.9");

    let base_textured = mean_iou(&textured, &default_cfg);
    let no_reg = IemConfig {
        toggles: Toggles { regularizer_on: false, ..Default::default() },
        ..IemConfig::default()
    };
    let no_smooth = IemConfig {
        toggles: Toggles { smoothing_on: false, ..Default::default() },
        ..IemConfig::default()
    };
    let noreg_textured = mean_iou(&textured, &no_reg);
    let nosmooth_textured = mean_iou(&textured, &no_smooth);
    assert!(
        noreg_textured < base_textured,
        "regularizer ablation did not hurt: {noreg_textured} vs {base_textured}"
    );
    assert!(
        nosmooth_textured < base_textured,
        "smoothing ablation did not hurt: {nosmooth_textured} vs {base_textured}"
    );

    let elapsed = started.elapsed();
    assert!(elapsed.as_secs_f64() < 900.0, "took {elapsed:?}");
    eprintln!(
        "ACCEPTANCE 5 PASS: mean IoU {overall:.4} (>= 0.9); textured {base_textured:.4} vs \
         no-reg {noreg_textured:.4} / no-smooth {nosmooth_textured:.4}, in {elapsed:.2?}"
    );
}

/// Criterion 6 (optional; needs downloaded datasets): reproduce the
/// published numbers on CUB (IoU 52.2 +- 3.0, DICE 66.0 +- 3.0) and
/// Flowers (IoU 76.8 +- 3.0).
///
/// Set `IEM_CUB_IMAGES`/`IEM_CUB_MASKS` (and optionally
/// `IEM_CUB_SPLIT`, a stem list) or the `IEM_FLOWERS_*` equivalents,
/// then run `cargo test -p iem --test acceptance -- --ignored`.
#[test]
#[ignore = "requires downloaded CUB/Flowers datasets; see test doc comment"]
fn acceptance_6_dataset_reproduction() {
    let mut checked = false;
    for (name, img_var, mask_var, split_var, iou_target, dice_target) in [
        ("CUB", "IEM_CUB_IMAGES", "IEM_CUB_MASKS", "IEM_CUB_SPLIT", 0.522, Some(0.660)),
        ("Flowers", "IEM_FLOWERS_IMAGES", "IEM_FLOWERS_MASKS", "IEM_FLOWERS_SPLIT", 0.768, None),
    ] {
        let (Ok(images), Ok(masks)) = (std::env::var(img_var), std::env::var(mask_var)) else {
            eprintln!("{name}: {img_var}/{mask_var} not set, skipping");
            continue;
        };
        checked = true;
        let out = std::env::temp_dir().join(format!("iem-accept6-{name}"));
        let _ = std::fs::remove_dir_all(&out);
        let mut settings = RunSettings::default();
        settings.file_list = std::env::var(split_var).ok().map(Into::into);
        let summary = cmd_segment(std::path::Path::new(&images), &out, &settings).unwrap();
        eprintln!("{name}: segmented {} images", summary.processed);
        let eval = cmd_evaluate(
            &out,
            std::path::Path::new(&masks),
            false,
            settings.file_list.as_deref(),
            Some(&out.join("metrics.csv")),
        )
        .unwrap();
        eprintln!(
            "{name}: accuracy {:.4} IoU {:.4} DICE {:.4}",
            eval.mean_accuracy, eval.mean_iou, eval.mean_dice
        );
        assert!(
            (eval.mean_iou - iou_target).abs() <= 0.03,
            "{name} IoU {:.4} outside {iou_target} +- 0.03",
            eval.mean_iou
        );
        if let Some(d) = dice_target {
            assert!(
                (eval.mean_dice - d).abs() <= 0.03,
                "{name} DICE {:.4} outside {d} +- 0.03",
                eval.mean_dice
            );
        }
    }
    assert!(checked, "set IEM_CUB_* or IEM_FLOWERS_* to run this criterion");
    eprintln!("ACCEPTANCE 6 PASS: dataset reproduction within tolerance");
}

/// Criterion 7: a full 150-iteration default-configuration run on one
/// 128x128 image finishes within 5 s on one CPU core. (The 1,000-image
/// batch half lives in `acceptance_7b_batch_throughput`.)
#[test]
fn acceptance_7_single_image_throughput() {
    let (img, _) = gen_layered(&corpus_spec(3, 0, 128)).unwrap();
    let cfg = IemConfig { strict_iterations: true, ..IemConfig::default() };
    let pool = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
    let started = Instant::now();
    let res = pool.install(|| multi_init_run(&img, &cfg)).unwrap();
    let elapsed = started.elapsed();
    assert!(!res.mask.is_degenerate());
    assert!(
        elapsed.as_secs_f64() <= 5.0,
        "single-core 150-iteration run took {elapsed:?}"
    );
    eprintln!(
        "ACCEPTANCE 7 PASS: strict 150-iteration run (3 inits) on one core in {elapsed:.2?} \
         (~{:.1} images/min/core)",
        60.0 / elapsed.as_secs_f64()
    );
}

/// Criterion 7, batch half: a 1,000-image batch at 8-way parallelism in
/// under 20 min. This sandbox exposes 2 hardware threads, so the test
/// is opt-in: `cargo test -p iem --test acceptance -- --ignored`.
#[test]
#[ignore = "needs 8 hardware threads and tens of minutes; run with --ignored"]
fn acceptance_7b_batch_throughput() {
    let root = std::env::temp_dir().join("iem-accept7b");
    let _ = std::fs::remove_dir_all(&root);
    cmd_synth(&root, 1000, 1, 128).unwrap();
    let settings = RunSettings { jobs: 8, ..RunSettings::default() };
    let started = Instant::now();
    let summary = cmd_segment(&root.join("images"), &root.join("masks"), &settings).unwrap();
    let elapsed = started.elapsed();
    assert_eq!(summary.processed, 1000);
    assert!(
        elapsed.as_secs_f64() <= 1200.0,
        "1,000-image batch took {elapsed:?}"
    );
    eprintln!("ACCEPTANCE 7b PASS: 1,000 images at 8-way in {elapsed:.2?}");
}

/// Criterion 8: identical settings produce byte-identical mask PNGs and
/// CSVs across reruns and across worker counts.
#[test]
fn acceptance_8_batch_determinism() {
    let started = Instant::now();
    let root = std::env::temp_dir().join(format!("iem-accept8-{}", std::process::id()));
    let _ = std::fs::remove_dir_all(&root);
    cmd_synth(&root, 6, 21, 64).unwrap();

    let mut outputs = Vec::new();
    for (label, jobs) in [("j1", 1usize), ("j2", 2), ("j4", 4)] {
        let mut settings = RunSettings {
            jobs,
            target_size: 64,
            ..RunSettings::default()
        };
        settings.config.init_sizes = vec![22, 39, 46];
        let out = root.join(label);
        cmd_segment(&root.join("images"), &out, &settings).unwrap();
        outputs.push(out);
    }

    let reference: Vec<(String, Vec<u8>)> = {
        let mut files: Vec<_> = std::fs::read_dir(&outputs[0])
            .unwrap()
            .map(|e| e.unwrap().path())
            .filter(|p| {
                let name = p.file_name().unwrap().to_string_lossy();
                name.ends_with("_mask.png") || name.ends_with(".csv")
            })
            .collect();
        files.sort();
        files
            .into_iter()
            .map(|p| {
                (
                    p.file_name().unwrap().to_string_lossy().into_owned(),
                    std::fs::read(&p).unwrap(),
                )
            })
            .collect()
    };
    assert_eq!(reference.len(), 7, "six masks plus the CSV");

    for other in &outputs[1..] {
        for (name, bytes) in &reference {
            let theirs = std::fs::read(other.join(name)).unwrap();
            assert_eq!(&theirs, bytes, "{name} differs between worker counts");
        }
    }

    eprintln!(
        "ACCEPTANCE 8 PASS: byte-identical masks and CSV at jobs 1/2/4, in {:.2?}",
        started.elapsed()
    );
}
