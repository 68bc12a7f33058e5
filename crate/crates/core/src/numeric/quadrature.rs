//! Adaptive Gauss–Kronrod (7/15) integration with global error control.

use crate::error::{Error, Result};
use crate::numeric::CompensatedSum;

// Kronrod abscissae on [0, 1]; odd indices are the embedded Gauss nodes.
const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];

const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_18,
    0.140_653_259_715_525_92,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_83,
];

const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

/// Result of an adaptive integration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Integral {
    pub value: f64,
    pub error: f64,
    pub subdivisions: usize,
}

/// Adaptive Gauss–Kronrod integrator.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GaussKronrod {
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_subdivisions: usize,
    pub initial_subdivisions: usize,
}

impl Default for GaussKronrod {
    fn default() -> Self {
        Self {
            abs_tol: 1e-12,
            rel_tol: 0.0,
            max_subdivisions: 60,
            initial_subdivisions: 1,
        }
    }
}

#[derive(Debug, Clone, Copy)]
struct Segment {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
    /// Error floor set by rounding, `50 eps int |f|`.
    roundoff: f64,
}

impl GaussKronrod {
    pub fn with_abs_tol(abs_tol: f64) -> Self {
        Self {
            abs_tol,
            ..Self::default()
        }
    }

    pub fn integrate<F: Fn(f64) -> f64>(&self, f: F, a: f64, b: f64) -> Result<Integral> {
        if !(a.is_finite() && b.is_finite()) {
            return Err(Error::Domain(format!(
                "integration bounds must be finite, got [{a}, {b}]"
            )));
        }
        if a == b {
            return Ok(Integral {
                value: 0.0,
                error: 0.0,
                subdivisions: 0,
            });
        }
        let pieces = self.initial_subdivisions.max(1);
        let width = (b - a) / pieces as f64;
        let mut segments: Vec<Segment> = (0..pieces)
            .map(|i| {
                let lo = a + width * i as f64;
                let hi = if i + 1 == pieces { b } else { lo + width };
                kronrod_segment(&f, lo, hi)
            })
            .collect();

        loop {
            let value = segments
                .iter()
                .map(|s| s.value)
                .collect::<CompensatedSum>()
                .value();
            let error: f64 = segments.iter().map(|s| s.error).sum();
            let roundoff: f64 = segments.iter().map(|s| s.roundoff).sum();
            // Once every segment sits at its rounding floor, bisection cannot help.
            let target = self
                .abs_tol
                .max(self.rel_tol * value.abs())
                .max(2.0 * roundoff);
            if error <= target {
                return Ok(Integral {
                    value,
                    error,
                    subdivisions: segments.len(),
                });
            }
            if segments.len() >= self.max_subdivisions.max(pieces) {
                return Err(Error::Quadrature {
                    a,
                    b,
                    subdivisions: segments.len(),
                    error,
                });
            }
            let (worst, _) = segments
                .iter()
                .enumerate()
                .max_by(|x, y| x.1.error.total_cmp(&y.1.error))
                .expect("at least one segment");
            let seg = segments.swap_remove(worst);
            let mid = 0.5 * (seg.a + seg.b);
            if mid <= seg.a || mid >= seg.b {
                // Interval collapsed to adjacent floats; nothing left to refine.
                return Err(Error::Quadrature {
                    a,
                    b,
                    subdivisions: segments.len() + 1,
                    error,
                });
            }
            segments.push(kronrod_segment(&f, seg.a, mid));
            segments.push(kronrod_segment(&f, mid, seg.b));
            // Keep left-to-right order so the final reduction is deterministic.
            segments.sort_by(|x, y| x.a.total_cmp(&y.a));
        }
    }
}

fn kronrod_segment<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> Segment {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center);
    let mut kronrod = fc * WGK[7];
    let mut gauss = fc * WG[3];
    let mut abs_kronrod = kronrod.abs();
    let mut fv = [0.0f64; 14];
    for (j, (&x, &w)) in XGK.iter().zip(WGK.iter()).take(7).enumerate() {
        let dx = half * x;
        let f1 = f(center - dx);
        let f2 = f(center + dx);
        fv[2 * j] = f1;
        fv[2 * j + 1] = f2;
        kronrod += w * (f1 + f2);
        abs_kronrod += w * (f1.abs() + f2.abs());
        if j % 2 == 1 {
            gauss += WG[j / 2] * (f1 + f2);
        }
    }
    let mean = kronrod * 0.5;
    let mut asc = WGK[7] * (fc - mean).abs();
    for j in 0..7 {
        asc += WGK[j] * ((fv[2 * j] - mean).abs() + (fv[2 * j + 1] - mean).abs());
    }
    let value = kronrod * half;
    let res_abs = abs_kronrod * half.abs();
    let error = rescale_error((kronrod - gauss) * half, res_abs, asc * half.abs());
    Segment {
        a,
        b,
        value,
        error,
        roundoff: 50.0 * f64::EPSILON * res_abs,
    }
}

// Error rescaling as in QUADPACK's qk15.
fn rescale_error(err: f64, res_abs: f64, res_asc: f64) -> f64 {
    let mut scaled = err.abs();
    if res_asc != 0.0 && scaled != 0.0 {
        let scale = (200.0 * scaled / res_asc).powf(1.5);
        scaled = if scale < 1.0 {
            res_asc * scale
        } else {
            res_asc
        };
    }
    if res_abs > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) {
        let floor = 50.0 * f64::EPSILON * res_abs;
        if floor > scaled {
            scaled = floor;
        }
    }
    scaled
}
