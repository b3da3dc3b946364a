//! Boundary benchmarking against ground-truth masks and the
//! rotation/scale stability ratios.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::image::GrayImage;
use crate::matcher::{detect, ContourMap};
use crate::patterns::PatternPair;
use crate::transform::{rotate_image, rotate_mask, scale_image, scale_mask};

pub const DEFAULT_TOLERANCE: f64 = 2.0;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub precision: f64,
    pub recall: f64,
    pub f_measure: f64,
    pub tp: usize,
    pub fp: usize,
    #[serde(rename = "fn")]
    pub fn_: usize,
    pub tolerance: f64,
}

impl EvalReport {
    pub fn from_counts(tp: usize, fp: usize, fn_: usize, tolerance: f64) -> Self {
        let ratio = |num: usize, den: usize| if den == 0 { 1.0 } else { num as f64 / den as f64 };
        let precision = ratio(tp, tp + fp);
        let recall = ratio(tp, tp + fn_);
        Self {
            precision,
            recall,
            f_measure: f_measure(precision, recall),
            tp,
            fp,
            fn_,
            tolerance,
        }
    }

    /// Pools the counts of several reports (micro average).
    pub fn aggregate(reports: &[EvalReport], tolerance: f64) -> Self {
        let (tp, fp, fn_) = reports
            .iter()
            .fold((0, 0, 0), |(a, b, c), r| (a + r.tp, b + r.fp, c + r.fn_));
        Self::from_counts(tp, fp, fn_, tolerance)
    }
}

pub fn f_measure(precision: f64, recall: f64) -> f64 {
    if precision + recall > 0.0 {
        2.0 * precision * recall / (precision + recall)
    } else {
        0.0
    }
}

fn check_same(pred: &ContourMap, gt: &ContourMap) -> Result<()> {
    if pred.same_dims(gt) {
        Ok(())
    } else {
        Err(Error::DimensionMismatch(format!(
            "prediction {}x{} vs ground truth {}x{}",
            pred.width(),
            pred.height(),
            gt.width(),
            gt.height()
        )))
    }
}

/// Greedy one-to-one matching. Predictions are visited in row-major order;
/// each claims the nearest free ground-truth pixel within Euclidean
/// distance `tol`, the row-major first among equally near ones.
/// Returns `(tp, fp, fn)`.
pub fn match_boundaries(pred: &ContourMap, gt: &ContourMap, tol: f64) -> Result<(usize, usize, usize)> {
    check_same(pred, gt)?;
    if tol.is_nan() || tol < 0.0 {
        return Err(Error::InvalidArgument(format!("tolerance {tol}")));
    }
    let (w, h) = (gt.width() as isize, gt.height() as isize);
    let r = tol.floor() as isize;
    let tol2 = tol * tol;
    let mut taken = vec![false; gt.mask().len()];
    let mut tp = 0;
    for py in 0..h {
        for px in 0..w {
            if !pred.get(px as usize, py as usize) {
                continue;
            }
            let mut best: Option<(isize, usize)> = None;
            // Row-major scan, strict improvement only: ties keep the first.
            for gy in (py - r).max(0)..=(py + r).min(h - 1) {
                for gx in (px - r).max(0)..=(px + r).min(w - 1) {
                    let i = (gy * w + gx) as usize;
                    if taken[i] || !gt.mask()[i] {
                        continue;
                    }
                    let d2 = (gx - px).pow(2) + (gy - py).pow(2);
                    if d2 as f64 <= tol2 && best.is_none_or(|(b, _)| d2 < b) {
                        best = Some((d2, i));
                    }
                }
            }
            if let Some((_, i)) = best {
                taken[i] = true;
                tp += 1;
            }
        }
    }
    Ok((tp, pred.count() - tp, gt.count() - tp))
}

pub fn precision_recall_f(pred: &ContourMap, gt: &ContourMap, tol: f64) -> Result<EvalReport> {
    let (tp, fp, fn_) = match_boundaries(pred, gt, tol)?;
    Ok(EvalReport::from_counts(tp, fp, fn_, tol))
}

/// Share of reference contour pixels not found again after a transform.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct InvarianceRatio {
    pub ratio: f64,
    /// Contour pixels of the original, carried into the transformed frame.
    pub reference: usize,
    /// Reference pixels with no detection within one pixel.
    pub missed: usize,
    /// The reference set was empty; `ratio` is reported as 0.
    pub empty: bool,
}

impl InvarianceRatio {
    fn new(reference: &ContourMap, found: &ContourMap) -> Result<Self> {
        let missed = reference.difference(&found.dilate(1))?.count();
        let n = reference.count();
        Ok(Self {
            ratio: if n == 0 { 0.0 } else { missed as f64 / n as f64 },
            reference: n,
            missed,
            empty: n == 0,
        })
    }

    /// Pools several measurements into one ratio.
    pub fn pooled(parts: &[InvarianceRatio]) -> Self {
        let reference = parts.iter().map(|p| p.reference).sum();
        let missed = parts.iter().map(|p| p.missed).sum();
        Self {
            ratio: if reference == 0 { 0.0 } else { missed as f64 / reference as f64 },
            reference,
            missed,
            empty: reference == 0,
        }
    }
}

/// Compares the rotated contours of `img` with the contours of the rotated image.
pub fn rotation_invariance_ratio(img: &GrayImage, pattern: &PatternPair, angle: f64) -> Result<InvarianceRatio> {
    if !(angle > 0.0 && angle < 360.0) {
        return Err(Error::InvalidArgument(format!("angle {angle} outside (0, 360)")));
    }
    let reference = rotate_mask(&detect(img, pattern, 3)?, angle)?;
    let found = detect(&rotate_image(img, angle)?, pattern, 3)?;
    InvarianceRatio::new(&reference, &found)
}

/// Compares the downscaled contours of `img` with the contours of the downscaled image.
pub fn scale_invariance_ratio(img: &GrayImage, pattern: &PatternPair, factor: f64) -> Result<InvarianceRatio> {
    let reference = scale_mask(&detect(img, pattern, 3)?, factor)?;
    let found = detect(&scale_image(img, factor)?, pattern, 3)?;
    InvarianceRatio::new(&reference, &found)
}
