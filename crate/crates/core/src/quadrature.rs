//! Numerical substrate shared by every other module: truncated rectangular
//! grids, trapezoid quadrature with a Richardson error estimate, centered
//! finite differences, the classical RK4 step and adaptive Gauss–Kronrod.

use std::ops::{Add, Mul, Sub};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// One axis of a [`GridSpec`]: `points` equally spaced nodes on
/// `[center - half_width, center + half_width]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Axis {
    pub center: f64,
    pub half_width: f64,
    pub points: usize,
}

impl Axis {
    pub fn new(center: f64, half_width: f64, points: usize) -> Result<Self> {
        if points < 3 || points.is_multiple_of(2) {
            return Err(Error::InvalidArgument(format!("axis point count must be odd and >= 3, got {points}")));
        }
        if !(half_width > 0.0) || !half_width.is_finite() || !center.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "axis needs a finite center and positive half-width, got ({center}, {half_width})"
            )));
        }
        Ok(Self { center, half_width, points })
    }

    /// Symmetric axis around zero.
    pub fn symmetric(half_width: f64, points: usize) -> Result<Self> {
        Self::new(0.0, half_width, points)
    }

    pub fn spacing(&self) -> f64 {
        2.0 * self.half_width / (self.points - 1) as f64
    }

    pub fn lo(&self) -> f64 {
        self.center - self.half_width
    }

    pub fn hi(&self) -> f64 {
        self.center + self.half_width
    }

    pub fn coord(&self, i: usize) -> f64 {
        if i == self.points - 1 {
            self.hi()
        } else {
            self.lo() + i as f64 * self.spacing()
        }
    }

    pub fn coords(&self) -> Vec<f64> {
        (0..self.points).map(|i| self.coord(i)).collect()
    }

    /// Same extent, every other node.
    pub fn coarsened(&self) -> Self {
        Self { points: (self.points - 1) / 2 + 1, ..*self }
    }
}

/// Rectangular grid with one [`Axis`] per dimension.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub axes: Vec<Axis>,
}

impl GridSpec {
    pub fn new(axes: Vec<Axis>) -> Result<Self> {
        if axes.is_empty() {
            return Err(Error::InvalidArgument("grid needs at least one axis".into()));
        }
        for a in &axes {
            Axis::new(a.center, a.half_width, a.points)?;
        }
        Ok(Self { axes })
    }

    pub fn line(axis: Axis) -> Self {
        Self { axes: vec![axis] }
    }

    pub fn plane(x: Axis, y: Axis) -> Self {
        Self { axes: vec![x, y] }
    }

    pub fn dim(&self) -> usize {
        self.axes.len()
    }

    pub fn len(&self) -> usize {
        self.axes.iter().map(|a| a.points).product()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Cell volume, the product of spacings.
    pub fn cell(&self) -> f64 {
        self.axes.iter().map(Axis::spacing).product()
    }

    /// Coordinates of the flat index `k` (last axis fastest).
    pub fn point(&self, mut k: usize) -> Vec<f64> {
        let mut out = vec![0.0; self.axes.len()];
        for (d, axis) in self.axes.iter().enumerate().rev() {
            out[d] = axis.coord(k % axis.points);
            k /= axis.points;
        }
        out
    }

    pub fn points(&self) -> impl Iterator<Item = Vec<f64>> + '_ {
        (0..self.len()).map(move |k| self.point(k))
    }
}

/// Result of [`integrate`]: trapezoid value on the full grid and
/// `|fine - coarse| / 3` against the every-other-node subgrid.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Integral {
    pub value: f64,
    pub error_estimate: f64,
}

/// Composite trapezoid over `grid` of an `n`-dimensional field.
///
/// Rows along the first axis are summed in parallel and then combined in
/// index order, so results are bitwise reproducible for any thread count.
pub fn integrate<F>(f: F, grid: &GridSpec) -> Result<Integral>
where
    F: Fn(&[f64]) -> f64 + Sync,
{
    let first = grid.axes[0];
    let rest = &grid.axes[1..];
    let inner: usize = rest.iter().map(|a| a.points).product();

    let rows: Vec<Result<(f64, f64)>> = (0..first.points)
        .into_par_iter()
        .map(|i| {
            let mut coord = vec![0.0; grid.axes.len()];
            coord[0] = first.coord(i);
            let (wf0, wc0) = weights(i, first.points);
            let mut fine = 0.0;
            let mut coarse = 0.0;
            let mut idx = vec![0usize; rest.len()];
            for _ in 0..inner {
                let mut wf = wf0;
                let mut wc = wc0;
                for (d, axis) in rest.iter().enumerate() {
                    coord[d + 1] = axis.coord(idx[d]);
                    let (a, b) = weights(idx[d], axis.points);
                    wf *= a;
                    wc *= b;
                }
                let v = f(&coord);
                if !v.is_finite() {
                    return Err(Error::Evaluation { coordinate: coord.clone() });
                }
                fine += wf * v;
                coarse += wc * v;
                for d in (0..rest.len()).rev() {
                    idx[d] += 1;
                    if idx[d] < rest[d].points {
                        break;
                    }
                    idx[d] = 0;
                }
            }
            Ok((fine, coarse))
        })
        .collect();

    let mut fine = 0.0;
    let mut coarse = 0.0;
    for row in rows {
        let (a, b) = row?;
        fine += a;
        coarse += b;
    }
    let cell = grid.cell();
    let fine = fine * cell;
    let coarse = coarse * cell * 2f64.powi(grid.dim() as i32);
    Ok(Integral { value: fine, error_estimate: (fine - coarse).abs() / 3.0 })
}

/// Convenience wrapper for a single axis.
pub fn integrate_line<F>(f: F, axis: Axis) -> Result<Integral>
where
    F: Fn(f64) -> f64 + Sync,
{
    integrate(|c: &[f64]| f(c[0]), &GridSpec::line(axis))
}

// Trapezoid weights (in units of the spacing) for node i on the fine grid
// and on the every-other-node coarse grid.
fn weights(i: usize, n: usize) -> (f64, f64) {
    let fine = if i == 0 || i == n - 1 { 0.5 } else { 1.0 };
    let coarse = if i % 2 == 1 {
        0.0
    } else if i == 0 || i == n - 1 {
        0.5
    } else {
        1.0
    };
    (fine, coarse)
}

/// Centered difference of order 1 or 2 with step `h`; the error is `O(h^2)`.
pub fn central_diff<T, F, E>(f: F, at: f64, h: f64, order: u8) -> std::result::Result<T, E>
where
    T: Copy + Add<Output = T> + Sub<Output = T> + Mul<f64, Output = T>,
    F: Fn(f64) -> std::result::Result<T, E>,
{
    match order {
        1 => {
            let plus = f(at + h)?;
            let minus = f(at - h)?;
            Ok((plus - minus) * (0.5 / h))
        }
        2 => {
            let plus = f(at + h)?;
            let mid = f(at)?;
            let minus = f(at - h)?;
            Ok((plus - mid * 2.0 + minus) * (1.0 / (h * h)))
        }
        _ => panic!("central_diff supports order 1 or 2, got {order}"),
    }
}

/// One classical fourth-order Runge–Kutta step of `y' = deriv(t, y)`.
pub fn rk4_step<F>(y: &[f64], deriv: F, t: f64, h: f64) -> Result<Vec<f64>>
where
    F: Fn(f64, &[f64], &mut [f64]) -> Result<()>,
{
    let n = y.len();
    let mut k1 = vec![0.0; n];
    let mut k2 = vec![0.0; n];
    let mut k3 = vec![0.0; n];
    let mut k4 = vec![0.0; n];
    let mut tmp = vec![0.0; n];

    let eval = |t: f64, y: &[f64], out: &mut [f64]| -> Result<()> {
        deriv(t, y, out)?;
        if out.iter().any(|v| !v.is_finite()) {
            return Err(Error::Integration { t });
        }
        Ok(())
    };

    eval(t, y, &mut k1)?;
    for i in 0..n {
        tmp[i] = y[i] + 0.5 * h * k1[i];
    }
    eval(t + 0.5 * h, &tmp, &mut k2)?;
    for i in 0..n {
        tmp[i] = y[i] + 0.5 * h * k2[i];
    }
    eval(t + 0.5 * h, &tmp, &mut k3)?;
    for i in 0..n {
        tmp[i] = y[i] + h * k3[i];
    }
    eval(t + h, &tmp, &mut k4)?;
    Ok((0..n).map(|i| y[i] + h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i])).collect())
}

// Kronrod 15-point nodes/weights with the embedded 7-point Gauss rule.
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
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];
const WG: [f64; 4] =
    [0.129_484_966_168_869_7, 0.279_705_391_489_276_7, 0.381_830_050_505_118_9, 0.417_959_183_673_469_4];

fn gk15<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> (f64, f64) {
    let c = 0.5 * (a + b);
    let hl = 0.5 * (b - a);
    let fc = f(c);
    let mut kronrod = fc * WGK[7];
    let mut gauss = fc * WG[3];
    for j in 0..7 {
        let dx = hl * XGK[j];
        let pair = f(c - dx) + f(c + dx);
        kronrod += WGK[j] * pair;
        if j % 2 == 1 {
            gauss += WG[j / 2] * pair;
        }
    }
    (kronrod * hl, ((kronrod - gauss) * hl).abs())
}

/// Globally adaptive Gauss–Kronrod (7/15) quadrature of `f` on `[a, b]`.
///
/// Returns `(value, error_estimate)`; `b < a` yields the negated integral.
pub fn adaptive_gauss_kronrod<F>(f: F, a: f64, b: f64, abs_tol: f64, rel_tol: f64) -> Result<(f64, f64)>
where
    F: Fn(f64) -> f64,
{
    if a == b {
        return Ok((0.0, 0.0));
    }
    if b < a {
        let (v, e) = adaptive_gauss_kronrod(f, b, a, abs_tol, rel_tol)?;
        return Ok((-v, e));
    }
    let mut segments = vec![{
        let (v, e) = gk15(&f, a, b);
        (a, b, v, e)
    }];
    for _ in 0..2000 {
        let total: f64 = segments.iter().map(|s| s.2).sum();
        let err: f64 = segments.iter().map(|s| s.3).sum();
        if !total.is_finite() {
            return Err(Error::Evaluation { coordinate: vec![a, b] });
        }
        if err <= abs_tol.max(rel_tol * total.abs()) {
            return Ok((total, err));
        }
        let worst = segments.iter().enumerate().max_by(|x, y| x.1 .3.total_cmp(&y.1 .3)).map(|(i, _)| i).unwrap_or(0);
        let (lo, hi, _, _) = segments.swap_remove(worst);
        let mid = 0.5 * (lo + hi);
        let (v1, e1) = gk15(&f, lo, mid);
        let (v2, e2) = gk15(&f, mid, hi);
        segments.push((lo, mid, v1, e1));
        segments.push((mid, hi, v2, e2));
    }
    let total: f64 = segments.iter().map(|s| s.2).sum();
    let err: f64 = segments.iter().map(|s| s.3).sum();
    Err(Error::Accuracy { estimate: err, tolerance: abs_tol.max(rel_tol * total.abs()) })
}

/// Cubic Hermite interpolation on `[t0, t1]` from end values and slopes.
pub fn cubic_hermite(t0: f64, t1: f64, y0: f64, y1: f64, d0: f64, d1: f64, t: f64) -> f64 {
    let h = t1 - t0;
    let s = (t - t0) / h;
    let s2 = s * s;
    let s3 = s2 * s;
    let h00 = 2.0 * s3 - 3.0 * s2 + 1.0;
    let h10 = s3 - 2.0 * s2 + s;
    let h01 = -2.0 * s3 + 3.0 * s2;
    let h11 = s3 - s2;
    h00 * y0 + h10 * h * d0 + h01 * y1 + h11 * h * d1
}

/// An antiderivative `F(t) = ∫_{t0}^{t} rate` sampled on a uniform grid by
/// RK4 (Simpson's rule for a pure quadrature) and read back by cubic Hermite
/// interpolation using the stored rates as slopes.
#[derive(Debug, Clone)]
pub struct SampledAntiderivative {
    t0: f64,
    step: f64,
    values: Vec<f64>,
    rates: Vec<f64>,
}

impl SampledAntiderivative {
    pub fn build<F>(rate: F, t0: f64, t_end: f64, max_step: f64) -> Result<Self>
    where
        F: Fn(f64) -> Result<f64>,
    {
        if !(t_end > t0) || !(max_step > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "antiderivative needs t_end > t0 and a positive step, got [{t0}, {t_end}] h={max_step}"
            )));
        }
        let steps = ((t_end - t0) / max_step).ceil().max(1.0) as usize;
        let step = (t_end - t0) / steps as f64;
        let mut values = Vec::with_capacity(steps + 1);
        let mut rates = Vec::with_capacity(steps + 1);
        let mut acc = 0.0;
        let mut r0 = rate(t0)?;
        values.push(0.0);
        rates.push(r0);
        for i in 0..steps {
            let ta = t0 + i as f64 * step;
            let rm = rate(ta + 0.5 * step)?;
            let r1 = rate(ta + step)?;
            acc += step / 6.0 * (r0 + 4.0 * rm + r1);
            if !acc.is_finite() {
                return Err(Error::Integration { t: ta });
            }
            values.push(acc);
            rates.push(r1);
            r0 = r1;
        }
        Ok(Self { t0, step, values, rates })
    }

    pub fn t_end(&self) -> f64 {
        self.t0 + self.step * (self.values.len() - 1) as f64
    }

    pub fn value(&self, t: f64) -> Result<f64> {
        let (i, ta, tb) = self.locate(t)?;
        Ok(cubic_hermite(ta, tb, self.values[i], self.values[i + 1], self.rates[i], self.rates[i + 1], t))
    }

    fn locate(&self, t: f64) -> Result<(usize, f64, f64)> {
        let hi = self.t_end();
        let slack = 1e-12 * self.step;
        if !(t >= self.t0 - slack && t <= hi + slack) {
            return Err(Error::OutOfRange { t, lo: self.t0, hi });
        }
        let last = self.values.len() - 2;
        let i = (((t - self.t0) / self.step).floor().max(0.0) as usize).min(last);
        let ta = self.t0 + i as f64 * self.step;
        Ok((i, ta, ta + self.step))
    }
}
