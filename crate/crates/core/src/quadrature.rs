//! Globally adaptive Gauss–Kronrod (G10/K21) integration and Wynn's epsilon
//! extrapolation.
//!
//! The integrators work for both real and complex integrands through the
//! [`QuadValue`] trait. Breakpoints are honoured as fixed panel boundaries,
//! which is how callers pass singularities, kinks and scale changes.

use num_complex::Complex64;
use std::cell::RefCell;
use std::f64::consts::PI;
use std::ops::{Add, Mul, Sub};

use crate::error::{Error, Result};

/// Values that can be integrated: real or complex.
pub trait QuadValue: Copy + Add<Output = Self> + Sub<Output = Self> + Mul<f64, Output = Self> {
    fn zero() -> Self;
    fn norm(self) -> f64;
}

impl QuadValue for f64 {
    fn zero() -> Self {
        0.0
    }
    fn norm(self) -> f64 {
        self.abs()
    }
}

impl QuadValue for Complex64 {
    fn zero() -> Self {
        Complex64::new(0.0, 0.0)
    }
    fn norm(self) -> f64 {
        Complex64::norm(self)
    }
}

const XGK: [f64; 11] = [
    0.995_657_163_025_808_1,
    0.973_906_528_517_171_7,
    0.930_157_491_355_708_2,
    0.865_063_366_688_984_5,
    0.780_817_726_586_416_9,
    0.679_409_568_299_024_4,
    0.562_757_134_668_604_7,
    0.433_395_394_129_247_2,
    0.294_392_862_701_460_2,
    0.148_874_338_981_631_2,
    0.0,
];

const WGK: [f64; 11] = [
    0.011_694_638_867_371_874,
    0.032_558_162_307_964_73,
    0.054_755_896_574_352,
    0.075_039_674_810_919_95,
    0.093_125_454_583_697_6,
    0.109_387_158_802_297_64,
    0.123_491_976_262_065_85,
    0.134_709_217_311_473_33,
    0.142_775_938_577_060_08,
    0.147_739_104_901_338_49,
    0.149_445_554_002_916_9,
];

// Gauss weights for the odd-indexed Kronrod nodes (1, 3, 5, 7, 9).
const WG: [f64; 5] = [
    0.066_671_344_308_688_14,
    0.149_451_349_150_580_6,
    0.219_086_362_515_982_04,
    0.269_266_719_309_996_36,
    0.295_524_224_714_752_87,
];

/// Tolerances and limits for an adaptive integration.
#[derive(Debug, Clone, Copy)]
pub struct QuadOptions {
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_subdivisions: usize,
}

impl Default for QuadOptions {
    fn default() -> Self {
        Self { abs_tol: 1e-12, rel_tol: 1e-12, max_subdivisions: 2_000 }
    }
}

impl QuadOptions {
    pub fn with_abs_tol(abs_tol: f64) -> Self {
        Self { abs_tol, rel_tol: 0.0, ..Self::default() }
    }

    pub fn tolerances(abs_tol: f64, rel_tol: f64) -> Self {
        Self { abs_tol, rel_tol, ..Self::default() }
    }
}

/// Outcome of an adaptive integration.
#[derive(Debug, Clone, Copy)]
pub struct Quadrature<T> {
    pub value: T,
    pub abs_err: f64,
    pub evaluations: usize,
    pub converged: bool,
}

struct Segment<T> {
    a: f64,
    b: f64,
    value: T,
    err: f64,
}

/// One 21-point Kronrod panel with the QUADPACK error heuristic.
pub fn gauss_kronrod_21<T: QuadValue, F: Fn(f64) -> T>(f: &F, a: f64, b: f64) -> (T, f64) {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let f_center = f(center);
    let mut res_k = f_center * WGK[10];
    let mut res_g = T::zero();
    let mut res_abs = f_center.norm() * WGK[10];
    let mut fv1 = [T::zero(); 10];
    let mut fv2 = [T::zero(); 10];
    for j in 0..10 {
        let dx = half * XGK[j];
        let f1 = f(center - dx);
        let f2 = f(center + dx);
        fv1[j] = f1;
        fv2[j] = f2;
        res_k = res_k + (f1 + f2) * WGK[j];
        res_abs += WGK[j] * (f1.norm() + f2.norm());
        if j % 2 == 1 {
            res_g = res_g + (f1 + f2) * WG[j / 2];
        }
    }
    let mean = res_k * 0.5;
    let mut res_asc = WGK[10] * (f_center - mean).norm();
    for j in 0..10 {
        res_asc += WGK[j] * ((fv1[j] - mean).norm() + (fv2[j] - mean).norm());
    }
    let scale = half.abs();
    let value = res_k * half;
    res_abs *= scale;
    res_asc *= scale;
    let mut err = ((res_k - res_g) * half).norm();
    if res_asc != 0.0 && err != 0.0 {
        err = res_asc * (200.0 * err / res_asc).powf(1.5).min(1.0);
    }
    if res_abs > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) {
        err = err.max(50.0 * f64::EPSILON * res_abs);
    }
    (value, err)
}

/// Adaptive integral of `f` over `[a, b]`.
pub fn integrate<T: QuadValue, F: Fn(f64) -> T>(f: F, a: f64, b: f64, opts: QuadOptions) -> Quadrature<T> {
    integrate_with_breakpoints(f, &[a, b], opts)
}

/// Adaptive integral over consecutive panels `points[0]..points[n-1]`.
///
/// `points` must be sorted; duplicate points are skipped.
pub fn integrate_with_breakpoints<T: QuadValue, F: Fn(f64) -> T>(
    f: F,
    points: &[f64],
    opts: QuadOptions,
) -> Quadrature<T> {
    let mut segments: Vec<Segment<T>> = Vec::with_capacity(points.len() + 16);
    for w in points.windows(2) {
        let (a, b) = (w[0], w[1]);
        if b <= a {
            continue;
        }
        let (value, err) = gauss_kronrod_21(&f, a, b);
        segments.push(Segment { a, b, value, err });
    }
    let mut evaluations = 21 * segments.len();
    let total = |segs: &[Segment<T>]| segs.iter().fold((T::zero(), 0.0), |(v, e), s| (v + s.value, e + s.err));
    let (mut value, mut err) = total(&segments);
    let mut converged = true;
    let budget = opts.max_subdivisions.max(segments.len());
    while err > opts.abs_tol.max(opts.rel_tol * value.norm()) {
        if segments.len() >= budget {
            converged = false;
            break;
        }
        let (idx, _) =
            segments.iter().enumerate().fold((0, -1.0), |best, (i, s)| if s.err > best.1 { (i, s.err) } else { best });
        let seg = segments.swap_remove(idx);
        let mid = 0.5 * (seg.a + seg.b);
        if mid <= seg.a || mid >= seg.b {
            // interval cannot be split further in floating point
            segments.push(seg);
            converged = false;
            break;
        }
        let (v1, e1) = gauss_kronrod_21(&f, seg.a, mid);
        let (v2, e2) = gauss_kronrod_21(&f, mid, seg.b);
        evaluations += 42;
        segments.push(Segment { a: seg.a, b: mid, value: v1, err: e1 });
        segments.push(Segment { a: mid, b: seg.b, value: v2, err: e2 });
        // recompute totals from scratch to avoid drift from cancellation
        let t = total(&segments);
        value = t.0;
        err = t.1;
    }
    Quadrature { value, abs_err: err, evaluations, converged }
}

/// Geometric breakpoints `a, a + s, a + 2s, a + 4s, ...` up to `b` (inclusive).
pub fn geometric_breakpoints(a: f64, b: f64, first_step: f64) -> Vec<f64> {
    let mut pts = vec![a];
    let mut step = first_step.max(f64::MIN_POSITIVE);
    while a + step < b {
        pts.push(a + step);
        step *= 2.0;
    }
    pts.push(b);
    pts
}

/// Wynn's epsilon algorithm applied to a sequence of partial sums.
///
/// Returns the last extrapolated value together with a crude error estimate
/// (the distance between the two most recent even-column estimates).
pub fn wynn_epsilon(partial_sums: &[f64]) -> (f64, f64) {
    let n = partial_sums.len();
    let last = *partial_sums.last().unwrap_or(&0.0);
    if n < 3 {
        return (last, f64::INFINITY);
    }
    // columns e_{k-1} and e_k of the epsilon table; even columns are estimates
    let mut below: Vec<f64> = vec![0.0; n + 1];
    let mut current: Vec<f64> = partial_sums.to_vec();
    let mut best = last;
    let mut best_prev = partial_sums[n - 2];
    let mut k = 0usize;
    while current.len() > 1 {
        let mut next = Vec::with_capacity(current.len() - 1);
        for i in 0..current.len() - 1 {
            let diff = current[i + 1] - current[i];
            if diff == 0.0 || !diff.is_finite() {
                next.push(f64::NAN);
            } else {
                next.push(below[i + 1] + 1.0 / diff);
            }
        }
        k += 1;
        if next.iter().any(|v| !v.is_finite()) {
            break;
        }
        if k % 2 == 0 {
            let m = next.len();
            best = next[m - 1];
            best_prev = if m >= 2 { next[m - 2] } else { best_prev };
        }
        below = current;
        current = next;
    }
    (best, (best - best_prev).abs())
}

/// `∫ f` over consecutive panels, surfacing the first error `f` returns.
pub(crate) fn integrate_fallible<T: QuadValue>(
    f: impl Fn(f64) -> Result<T>,
    pts: &[f64],
    opts: QuadOptions,
    context: &str,
) -> Result<(T, f64)> {
    let failure = RefCell::new(None);
    let q = integrate_with_breakpoints(
        |x| match f(x) {
            Ok(v) => v,
            Err(e) => {
                failure.borrow_mut().get_or_insert(e);
                T::zero()
            }
        },
        pts,
        opts,
    );
    if let Some(e) = failure.into_inner() {
        return Err(e);
    }
    if !q.converged {
        return Err(Error::Numerical { context: context.into(), partial: q.value.norm(), abs_err: q.abs_err });
    }
    Ok((q.value, q.abs_err))
}

/// Chebyshev nodes per panel of [`ChebyshevPanels`].
const CHEB_NODES: usize = 32;

/// Piecewise Chebyshev interpolant of a smooth function, used to integrate
/// it over many short intervals after a fixed number of evaluations.
#[derive(Debug, Clone)]
pub struct ChebyshevPanels {
    edges: Vec<f64>,
    /// Antiderivative coefficients per panel, zero at the panel's left edge.
    antiderivative: Vec<Vec<f64>>,
}

fn clenshaw(c: &[f64], u: f64) -> f64 {
    let (mut b1, mut b2) = (0.0, 0.0);
    for &ck in c.iter().skip(1).rev() {
        let b0 = 2.0 * u * b1 - b2 + ck;
        b2 = b1;
        b1 = b0;
    }
    u * b1 - b2 + c[0]
}

impl ChebyshevPanels {
    /// Interpolates `f` on the panels given by `edges`, halving a panel while
    /// the tail of its Chebyshev series exceeds `rel_tol` of its integral
    /// (or `abs_tol` in absolute terms).
    pub fn new(f: impl Fn(f64) -> Result<f64>, edges: &[f64], abs_tol: f64, rel_tol: f64) -> Result<Self> {
        let n = CHEB_NODES;
        let nodes: Vec<f64> = (0..n).map(|i| (PI * (i as f64 + 0.5) / n as f64).cos()).collect();
        let mut stack: Vec<(f64, f64, u32)> =
            edges.windows(2).rev().filter(|w| w[1] > w[0]).map(|w| (w[0], w[1], 0)).collect();
        let mut out_edges = vec![];
        let mut antiderivative = vec![];
        while let Some((a, b, depth)) = stack.pop() {
            let (mid, half) = (0.5 * (a + b), 0.5 * (b - a));
            let values = nodes.iter().map(|u| f(mid + half * u)).collect::<Result<Vec<f64>>>()?;
            let c: Vec<f64> = (0..n)
                .map(|j| {
                    let s: f64 = values
                        .iter()
                        .enumerate()
                        .map(|(i, v)| v * (PI * j as f64 * (i as f64 + 0.5) / n as f64).cos())
                        .sum();
                    if j == 0 {
                        s / n as f64
                    } else {
                        2.0 * s / n as f64
                    }
                })
                .collect();
            let scale: f64 = c.iter().map(|v| v.abs()).sum::<f64>() * half;
            let tail: f64 = c[n - 4..].iter().map(|v| v.abs()).sum::<f64>() * half;
            if tail > abs_tol.max(rel_tol * scale) && depth < 40 {
                stack.push((mid, b, depth + 1));
                stack.push((a, mid, depth + 1));
                continue;
            }
            // ∫ Σ c_j T_j = Σ C_k T_k with C_1 = c_0 - c_2/2, C_k = (c_{k-1} - c_{k+1})/(2k)
            let coef = |j: usize| if j < n { c[j] } else { 0.0 };
            let mut big = vec![0.0; n + 1];
            for (k, slot) in big.iter_mut().enumerate().skip(1) {
                *slot = if k == 1 { c[0] - 0.5 * coef(2) } else { (coef(k - 1) - coef(k + 1)) / (2.0 * k as f64) };
            }
            for v in big.iter_mut() {
                *v *= half;
            }
            big[0] = -clenshaw(&big, -1.0);
            if out_edges.is_empty() {
                out_edges.push(a);
            }
            out_edges.push(b);
            antiderivative.push(big);
        }
        Ok(ChebyshevPanels { edges: out_edges, antiderivative })
    }

    pub fn start(&self) -> f64 {
        self.edges[0]
    }

    pub fn end(&self) -> f64 {
        *self.edges.last().expect("at least one panel")
    }

    /// `∫_a^x f` within panel `i`.
    fn partial(&self, i: usize, x: f64) -> f64 {
        let (a, b) = (self.edges[i], self.edges[i + 1]);
        let u = ((2.0 * x - a - b) / (b - a)).clamp(-1.0, 1.0);
        clenshaw(&self.antiderivative[i], u)
    }

    fn panel_of(&self, x: f64) -> usize {
        let i = self.edges.partition_point(|&e| e <= x);
        i.saturating_sub(1).min(self.antiderivative.len() - 1)
    }

    /// `∫_a^b f` for `start() <= a <= b <= end()`.
    pub fn integral(&self, a: f64, b: f64) -> f64 {
        let (i, j) = (self.panel_of(a), self.panel_of(b));
        if i == j {
            return self.partial(i, b) - self.partial(i, a);
        }
        let mut total = self.partial(i, self.edges[i + 1]) - self.partial(i, a);
        for k in i + 1..j {
            total += self.partial(k, self.edges[k + 1]);
        }
        total + self.partial(j, b)
    }
}
