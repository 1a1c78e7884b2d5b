//! Globally adaptive Gauss–Kronrod (7/15) quadrature.
//!
//! The interval with the largest error estimate is bisected until the summed
//! error estimate meets `max(abs_tol, rel_tol * |value|)`. Semi-infinite ranges
//! are mapped onto `[0, 1)` with `u = a + L s / (1 - s)`.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::error::QuadratureError;
use crate::stats::compensated_sum;

/// How outer semi-infinite integrals over a serving distance are closed off.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum TailRule {
    /// Cut the range where the nearest-neighbour tail mass `exp(-pi lambda x^2)`
    /// drops below `abs_tol`, then integrate the finite range.
    #[default]
    EnvelopeCutoff,
    /// Integrate the full half-line through the rational map.
    RationalMap,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureSpec {
    pub rel_tol: f64,
    pub abs_tol: f64,
    /// Maximum number of bisections applied to any subinterval.
    pub max_depth: u32,
    /// Cap on the number of live subintervals.
    pub max_intervals: usize,
    pub tail_rule: TailRule,
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        Self {
            rel_tol: 1e-6,
            abs_tol: 1e-10,
            max_depth: 40,
            max_intervals: 4000,
            tail_rule: TailRule::EnvelopeCutoff,
        }
    }
}

impl QuadratureSpec {
    pub fn validate(&self) -> Result<(), QuadratureError> {
        if !(self.rel_tol > 0.0) {
            return Err(QuadratureError::InvalidSpec("rel_tol must be positive"));
        }
        if !(self.abs_tol > 0.0) {
            return Err(QuadratureError::InvalidSpec("abs_tol must be positive"));
        }
        if self.max_depth < 1 {
            return Err(QuadratureError::InvalidSpec("max_depth must be at least 1"));
        }
        if self.max_intervals < 1 {
            return Err(QuadratureError::InvalidSpec(
                "max_intervals must be at least 1",
            ));
        }
        Ok(())
    }

    /// Same spec with both tolerances scaled by `factor`.
    pub fn tightened(&self, factor: f64) -> Self {
        Self {
            rel_tol: self.rel_tol * factor,
            abs_tol: self.abs_tol * factor,
            ..*self
        }
    }
}

/// Integral value with its error bound.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Quadrature {
    pub value: f64,
    pub error: f64,
}

// Gauss–Kronrod 15-point abscissae and weights (QUADPACK qk15), kept as published.
#[allow(clippy::excessive_precision)]
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
#[allow(clippy::excessive_precision)]
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
// Gauss 7-point weights for the odd Kronrod nodes XGK[1], XGK[3], XGK[5] and the centre.
#[allow(clippy::excessive_precision)]
const WG: [f64; 4] = [
    0.129_484_966_168_869_693_270_611_432_679_082,
    0.279_705_391_489_276_667_901_467_771_423_780,
    0.381_830_050_505_118_944_950_369_775_488_975,
    0.417_959_183_673_469_387_755_102_040_816_327,
];

struct Panel {
    lower: f64,
    upper: f64,
    value: f64,
    error: f64,
    depth: u32,
}

impl PartialEq for Panel {
    fn eq(&self, other: &Self) -> bool {
        self.error.total_cmp(&other.error) == Ordering::Equal
    }
}
impl Eq for Panel {}
impl PartialOrd for Panel {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Panel {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error.total_cmp(&other.error)
    }
}

fn gk15<F>(f: &mut F, a: f64, b: f64) -> Result<(f64, f64), QuadratureError>
where
    F: FnMut(f64) -> Result<f64, QuadratureError>,
{
    let centre = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let mut eval = |x: f64| -> Result<f64, QuadratureError> {
        let y = f(x)?;
        if y.is_finite() {
            Ok(y)
        } else {
            Err(QuadratureError::NonFinite { at: x })
        }
    };

    let fc = eval(centre)?;
    let mut res_g = fc * WG[3];
    let mut res_k = fc * WGK[7];
    let mut res_abs = res_k.abs();
    let mut fv1 = [0.0; 7];
    let mut fv2 = [0.0; 7];
    for j in 0..7 {
        let dx = half * XGK[j];
        let f1 = eval(centre - dx)?;
        let f2 = eval(centre + dx)?;
        fv1[j] = f1;
        fv2[j] = f2;
        res_k += WGK[j] * (f1 + f2);
        res_abs += WGK[j] * (f1.abs() + f2.abs());
        if j % 2 == 1 {
            res_g += WG[j / 2] * (f1 + f2);
        }
    }
    let mean = 0.5 * res_k;
    let mut res_asc = WGK[7] * (fc - mean).abs();
    for j in 0..7 {
        res_asc += WGK[j] * ((fv1[j] - mean).abs() + (fv2[j] - mean).abs());
    }
    let value = res_k * half;
    let res_abs = res_abs * half.abs();
    let res_asc = res_asc * half.abs();
    let mut err = ((res_k - res_g) * half).abs();
    if res_asc != 0.0 && err != 0.0 {
        err = res_asc * (200.0 * err / res_asc).powf(1.5).min(1.0);
    }
    if res_abs > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) {
        err = err.max(50.0 * f64::EPSILON * res_abs);
    }
    Ok((value, err))
}

fn adaptive<F>(
    mut f: F,
    lower: f64,
    upper: f64,
    spec: &QuadratureSpec,
) -> Result<Quadrature, QuadratureError>
where
    F: FnMut(f64) -> Result<f64, QuadratureError>,
{
    spec.validate()?;
    if lower == upper {
        return Ok(Quadrature {
            value: 0.0,
            error: 0.0,
        });
    }
    let (value, error) = gk15(&mut f, lower, upper)?;
    let mut heap = BinaryHeap::new();
    heap.push(Panel {
        lower,
        upper,
        value,
        error,
        depth: 0,
    });
    let mut frozen: Vec<Panel> = Vec::new();

    loop {
        let total = compensated_sum(heap.iter().chain(&frozen).map(|p| p.value));
        let err: f64 = heap.iter().chain(&frozen).map(|p| p.error).sum();
        let tol = spec.abs_tol.max(spec.rel_tol * total.abs());
        if err <= tol {
            return Ok(Quadrature {
                value: total,
                error: err,
            });
        }
        let stuck = heap.len() + frozen.len() >= spec.max_intervals;
        let Some(worst) = heap.pop().filter(|_| !stuck) else {
            return Err(QuadratureError::NonConvergence {
                lower,
                upper,
                value: total,
                error: err,
                tolerance: tol,
            });
        };
        if worst.depth >= spec.max_depth {
            frozen.push(worst);
            continue;
        }
        let mid = 0.5 * (worst.lower + worst.upper);
        for (a, b) in [(worst.lower, mid), (mid, worst.upper)] {
            let (value, error) = gk15(&mut f, a, b)?;
            heap.push(Panel {
                lower: a,
                upper: b,
                value,
                error,
                depth: worst.depth + 1,
            });
        }
    }
}

/// Integrates a fallible integrand over `[lower, upper]`; `upper` may be `+inf`.
pub fn try_integrate<F>(
    f: F,
    lower: f64,
    upper: f64,
    spec: &QuadratureSpec,
) -> Result<Quadrature, QuadratureError>
where
    F: FnMut(f64) -> Result<f64, QuadratureError>,
{
    if upper == f64::INFINITY {
        try_integrate_to_infinity(f, lower, 1.0, spec)
    } else {
        adaptive(f, lower, upper, spec)
    }
}

/// `int_lower^inf f(u) du` with `u = lower + scale * s / (1 - s)`.
///
/// `scale` should be the length over which `f` varies; any positive value gives
/// the right answer but a matched one needs fewer panels.
pub fn try_integrate_to_infinity<F>(
    mut f: F,
    lower: f64,
    scale: f64,
    spec: &QuadratureSpec,
) -> Result<Quadrature, QuadratureError>
where
    F: FnMut(f64) -> Result<f64, QuadratureError>,
{
    let mapped = move |s: f64| -> Result<f64, QuadratureError> {
        let one_minus = 1.0 - s;
        let u = lower + scale * s / one_minus;
        if !u.is_finite() {
            return Ok(0.0);
        }
        let y = f(u)?;
        if y == 0.0 {
            return Ok(0.0);
        }
        Ok(y * scale / (one_minus * one_minus))
    };
    adaptive(mapped, 0.0, 1.0, spec)
}

/// `int_lower^inf f(u) du` for `f` decaying like `u^-decay` with `decay > 1`.
///
/// Uses `u = lower + scale ((1 - s)^-p - 1)` with `p = max(1, 2 / (decay - 1))`,
/// which leaves a mapped integrand that vanishes linearly at `s = 1` instead
/// of the integrable singularity the plain rational map produces for slow tails.
pub fn try_integrate_algebraic_tail<F>(
    mut f: F,
    lower: f64,
    scale: f64,
    decay: f64,
    spec: &QuadratureSpec,
) -> Result<Quadrature, QuadratureError>
where
    F: FnMut(f64) -> Result<f64, QuadratureError>,
{
    if !(decay > 1.0) {
        return Err(QuadratureError::InvalidSpec("tail decay must exceed 1"));
    }
    let p = (2.0 / (decay - 1.0)).max(1.0);
    let mapped = move |s: f64| -> Result<f64, QuadratureError> {
        let stretch = (1.0 - s).powf(-p);
        let u = lower + scale * (stretch - 1.0);
        if !u.is_finite() || !stretch.is_finite() {
            return Ok(0.0);
        }
        let y = f(u)?;
        if y == 0.0 {
            return Ok(0.0);
        }
        Ok(y * scale * p * stretch / (1.0 - s))
    };
    adaptive(mapped, 0.0, 1.0, spec)
}

pub fn integrate<F>(
    mut f: F,
    lower: f64,
    upper: f64,
    spec: &QuadratureSpec,
) -> Result<Quadrature, QuadratureError>
where
    F: FnMut(f64) -> f64,
{
    try_integrate(|x| Ok(f(x)), lower, upper, spec)
}

pub fn integrate_to_infinity<F>(
    mut f: F,
    lower: f64,
    scale: f64,
    spec: &QuadratureSpec,
) -> Result<Quadrature, QuadratureError>
where
    F: FnMut(f64) -> f64,
{
    try_integrate_to_infinity(|x| Ok(f(x)), lower, scale, spec)
}
