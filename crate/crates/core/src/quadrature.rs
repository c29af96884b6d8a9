//! Adaptive Gauss–Kronrod (7/15) quadrature by recursive bisection.

#![allow(clippy::excessive_precision)]

use crate::error::{Error, Result};

/// Maximum bisection depth before giving up.
pub const MAX_DEPTH: usize = 60;

const XGK: [f64; 8] = [
    0.991_455_371_120_812_639_206_854_697_526_329,
    0.949_107_912_342_758_524_526_189_684_047_851,
    0.864_864_423_359_769_072_789_712_788_640_926,
    0.741_531_185_599_394_439_863_864_773_280_788,
    0.586_087_235_467_691_130_294_144_845_693_013,
    0.405_845_151_377_397_166_906_606_412_076_961,
    0.207_784_955_007_898_467_600_689_403_773_245,
    0.0,
];

const WGK: [f64; 8] = [
    0.022_935_322_010_529_224_963_732_008_058_970,
    0.063_092_092_629_978_553_290_700_663_189_204,
    0.104_790_010_322_250_183_839_876_322_541_518,
    0.140_653_259_715_525_918_745_189_590_510_238,
    0.169_004_726_639_267_902_826_583_426_598_550,
    0.190_350_578_064_785_409_913_256_402_421_014,
    0.204_432_940_075_298_892_414_161_999_234_649,
    0.209_482_141_084_727_828_012_999_174_891_714,
];

// Gauss weights for the odd Kronrod nodes XGK[1], XGK[3], XGK[5], XGK[7].
const WG: [f64; 4] = [
    0.129_484_966_168_869_693_270_611_432_679_082,
    0.279_705_391_489_276_667_901_467_771_423_780,
    0.381_830_050_505_118_944_950_369_775_488_975,
    0.417_959_183_673_469_387_755_102_040_816_327,
];

/// One 15-point Kronrod estimate and its embedded 7-point Gauss difference.
fn kronrod<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> (f64, f64) {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center);
    let mut kron = fc * WGK[7];
    let mut gauss = fc * WG[3];
    for j in 0..7 {
        let dx = half * XGK[j];
        let pair = f(center - dx) + f(center + dx);
        kron += WGK[j] * pair;
        if j % 2 == 1 {
            gauss += WG[j / 2] * pair;
        }
    }
    (kron * half, ((kron - gauss) * half).abs())
}

/// ∫ₐᵇ f with absolute tolerance `tol`.
pub fn integrate<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, tol: f64) -> Result<f64> {
    if a == b {
        return Ok(0.0);
    }
    let (whole, err) = kronrod(&f, a, b);
    // pieces whose error is lost in the rounding of the total are accepted
    let floor = 16.0 * f64::EPSILON * whole.abs();
    refine(&f, a, b, whole, err, tol, floor, 0)
}

#[allow(clippy::too_many_arguments)]
fn refine<F: Fn(f64) -> f64>(
    f: &F,
    a: f64,
    b: f64,
    estimate: f64,
    err: f64,
    tol: f64,
    floor: f64,
    depth: usize,
) -> Result<f64> {
    if err <= tol || err <= 1e-15 * estimate.abs() || err <= floor {
        return Ok(estimate);
    }
    if depth >= MAX_DEPTH {
        return Err(Error::QuadratureDepth {
            depth: MAX_DEPTH,
            a,
            b,
        });
    }
    let mid = 0.5 * (a + b);
    let (left, left_err) = kronrod(f, a, mid);
    let (right, right_err) = kronrod(f, mid, b);
    // the sub-estimates are already better than the parent; stop early when
    // their combined error clears the tolerance
    if left_err + right_err <= tol {
        return Ok(left + right);
    }
    Ok(
        refine(f, a, mid, left, left_err, 0.5 * tol, floor, depth + 1)?
            + refine(f, mid, b, right, right_err, 0.5 * tol, floor, depth + 1)?,
    )
}
