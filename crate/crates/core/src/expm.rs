//! Matrix exponential by scaling and squaring with diagonal Padé
//! approximants (Higham 2005, "The Scaling and Squaring Method for the
//! Matrix Exponential Revisited").

use nalgebra::DMatrix;

use crate::error::{Error, Result};

const THETA_3: f64 = 1.495_585_217_958_292e-2;
const THETA_5: f64 = 2.539_398_330_063_23e-1;
const THETA_7: f64 = 9.504_178_996_162_932e-1;
const THETA_9: f64 = 2.097_847_961_257_068;
const THETA_13: f64 = 5.371_920_351_148_152;

const PADE_3: [f64; 4] = [120.0, 60.0, 12.0, 1.0];
const PADE_5: [f64; 6] = [30240.0, 15120.0, 3360.0, 420.0, 30.0, 1.0];
const PADE_7: [f64; 8] = [
    17_297_280.0,
    8_648_640.0,
    1_995_840.0,
    277_200.0,
    25_200.0,
    1512.0,
    56.0,
    1.0,
];
const PADE_9: [f64; 10] = [
    17_643_225_600.0,
    8_821_612_800.0,
    2_075_673_600.0,
    302_702_400.0,
    30_270_240.0,
    2_162_160.0,
    110_880.0,
    3960.0,
    90.0,
    1.0,
];
const PADE_13: [f64; 14] = [
    64_764_752_532_480_000.0,
    32_382_376_266_240_000.0,
    7_771_770_303_897_600.0,
    1_187_353_796_428_800.0,
    129_060_195_264_000.0,
    10_559_470_521_600.0,
    670_442_572_800.0,
    33_522_128_640.0,
    1_323_241_920.0,
    40_840_800.0,
    960_960.0,
    16_380.0,
    182.0,
    1.0,
];

fn norm_1(a: &DMatrix<f64>) -> f64 {
    a.column_iter()
        .map(|c| c.iter().map(|v| v.abs()).sum::<f64>())
        .fold(0.0, f64::max)
}

/// `(V - U)^{-1} (V + U)`.
fn pade_quotient(u: DMatrix<f64>, v: DMatrix<f64>) -> Result<DMatrix<f64>> {
    let p = &v + &u;
    let q = v - u;
    q.lu().solve(&p).ok_or(Error::SingularSystem)
}

/// Low-degree approximant `r_m` for `m` in {3, 5, 7, 9}.
fn pade_low(a: &DMatrix<f64>, b: &[f64]) -> Result<DMatrix<f64>> {
    let n = a.nrows();
    let ident = DMatrix::<f64>::identity(n, n);
    let a2 = a * a;
    let mut power = ident.clone();
    let mut u_inner = &ident * b[1];
    let mut v = &ident * b[0];
    for k in (2..b.len()).step_by(2) {
        power = &power * &a2;
        v += &power * b[k];
        if k + 1 < b.len() {
            u_inner += &power * b[k + 1];
        }
    }
    pade_quotient(a * u_inner, v)
}

fn pade_13(a: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let b = &PADE_13;
    let n = a.nrows();
    let ident = DMatrix::<f64>::identity(n, n);
    let a2 = a * a;
    let a4 = &a2 * &a2;
    let a6 = &a4 * &a2;
    let u_high = &a6 * b[13] + &a4 * b[11] + &a2 * b[9];
    let u_inner = &a6 * u_high + &a6 * b[7] + &a4 * b[5] + &a2 * b[3] + &ident * b[1];
    let u = a * u_inner;
    let v_high = &a6 * b[12] + &a4 * b[10] + &a2 * b[8];
    let v = &a6 * v_high + &a6 * b[6] + &a4 * b[4] + &a2 * b[2] + &ident * b[0];
    pade_quotient(u, v)
}

/// `exp(a)` for a square matrix.
pub fn expm(a: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    assert!(a.is_square(), "expm needs a square matrix");
    if a.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("matrix exponential input".into()));
    }
    let n = a.nrows();
    if n == 0 {
        return Ok(DMatrix::zeros(0, 0));
    }
    let norm = norm_1(a);
    let result = if norm <= THETA_3 {
        pade_low(a, &PADE_3)?
    } else if norm <= THETA_5 {
        pade_low(a, &PADE_5)?
    } else if norm <= THETA_7 {
        pade_low(a, &PADE_7)?
    } else if norm <= THETA_9 {
        pade_low(a, &PADE_9)?
    } else {
        let s = (norm / THETA_13).log2().ceil().max(0.0) as i32;
        let scaled = a * 2f64.powi(-s);
        let mut r = pade_13(&scaled)?;
        for _ in 0..s {
            r = &r * &r;
        }
        r
    };
    if result.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite(format!(
            "matrix exponential overflowed (1-norm {norm:e})"
        )));
    }
    Ok(result)
}
