//! Adaptive Gauss–Kronrod (21-point) quadrature with graded initial meshes.

use alloc::collections::BinaryHeap;
use alloc::vec::Vec;
use core::cmp::Ordering;
use libm::fabs;

use crate::special::CompensatedSum;

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
    0.054_755_896_574_351_995,
    0.075_039_674_810_919_95,
    0.093_125_454_583_697_6,
    0.109_387_158_802_297_64,
    0.123_491_976_262_065_85,
    0.134_709_217_311_473_33,
    0.142_775_938_577_060_08,
    0.147_739_104_901_338_49,
    0.149_445_554_002_916_9,
];
const WG: [f64; 5] = [
    0.066_671_344_308_688_14,
    0.149_451_349_150_580_6,
    0.219_086_362_515_982_04,
    0.269_266_719_309_996_36,
    0.295_524_224_714_752_87,
];

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct QuadOptions {
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub max_intervals: usize,
    /// Geometric refinement levels added next to every breakpoint.
    pub grade_levels: u32,
}

impl Default for QuadOptions {
    fn default() -> Self {
        Self {
            rel_tol: 1e-10,
            abs_tol: 0.0,
            max_intervals: 4000,
            grade_levels: 0,
        }
    }
}

impl QuadOptions {
    pub fn rel(rel_tol: f64) -> Self {
        Self {
            rel_tol,
            ..Self::default()
        }
    }

    pub fn graded(mut self, levels: u32) -> Self {
        self.grade_levels = levels;
        self
    }

    pub fn with_abs(mut self, abs_tol: f64) -> Self {
        self.abs_tol = abs_tol;
        self
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Quadrature {
    pub value: f64,
    pub abs_err: f64,
    pub intervals: usize,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum QuadError {
    /// Error budget not met within `max_intervals`; carries the best estimate.
    NonConvergent { value: f64, abs_err: f64 },
    NonFinite { at: f64 },
}

struct Piece {
    a: f64,
    b: f64,
    value: f64,
    err: f64,
}

impl PartialEq for Piece {
    fn eq(&self, other: &Self) -> bool {
        self.err.total_cmp(&other.err) == Ordering::Equal
    }
}
impl Eq for Piece {}
impl PartialOrd for Piece {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Piece {
    fn cmp(&self, other: &Self) -> Ordering {
        self.err.total_cmp(&other.err)
    }
}

fn kronrod<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> Result<(f64, f64), QuadError> {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    if !fc.is_finite() {
        return Err(QuadError::NonFinite { at: c });
    }
    let mut k = WGK[10] * fc;
    let mut g = 0.0;
    for i in 0..10 {
        let dx = h * XGK[i];
        let f1 = f(c - dx);
        let f2 = f(c + dx);
        if !f1.is_finite() {
            return Err(QuadError::NonFinite { at: c - dx });
        }
        if !f2.is_finite() {
            return Err(QuadError::NonFinite { at: c + dx });
        }
        k += WGK[i] * (f1 + f2);
        if i % 2 == 1 {
            g += WG[i / 2] * (f1 + f2);
        }
    }
    Ok((k * h, fabs((k - g) * h)))
}

/// Integrate `f` over the finite range spanned by sorted `breaks`.
///
/// Each consecutive pair of breakpoints seeds the mesh; with
/// `grade_levels > 0` every segment is additionally split geometrically
/// toward both of its ends, which resolves endpoint singularities and
/// narrow peaks sitting on breakpoints.
pub fn integrate_breaks<F: Fn(f64) -> f64>(
    f: F,
    breaks: &[f64],
    opts: QuadOptions,
) -> Result<Quadrature, QuadError> {
    let mut mesh: Vec<f64> = Vec::new();
    for w in breaks.windows(2) {
        let (a, b) = (w[0], w[1]);
        if !(b > a) {
            continue;
        }
        push_segment(&mut mesh, a, b, opts.grade_levels);
    }
    if mesh.is_empty() {
        return Ok(Quadrature {
            value: 0.0,
            abs_err: 0.0,
            intervals: 0,
        });
    }
    mesh.push(breaks[breaks.len() - 1]);
    mesh.dedup();
    integrate_mesh(&f, &mesh, opts)
}

pub fn integrate<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, opts: QuadOptions) -> Result<Quadrature, QuadError> {
    if a.is_finite() && b.is_finite() {
        return integrate_breaks(f, &[a, b], opts);
    }
    // Map infinite ranges onto (0, 1).
    if a.is_finite() {
        let g = |t: f64| {
            if t >= 1.0 {
                return 0.0;
            }
            let s = 1.0 - t;
            f(a + t / s) / (s * s)
        };
        integrate_breaks(g, &[0.0, 1.0], opts)
    } else if b.is_finite() {
        let g = |t: f64| {
            if t >= 1.0 {
                return 0.0;
            }
            let s = 1.0 - t;
            f(b - t / s) / (s * s)
        };
        integrate_breaks(g, &[0.0, 1.0], opts)
    } else {
        let g = |t: f64| {
            let s = 1.0 - t * t;
            if s <= 0.0 {
                return 0.0;
            }
            f(t / s) * (1.0 + t * t) / (s * s)
        };
        integrate_breaks(g, &[-1.0, 0.0, 1.0], opts)
    }
}

/// Integrate a non-negative, essentially unimodal `f` over the finite range
/// `[a, b]` whose bulk location is unknown.
///
/// A uniform scan locates the region where `f` is non-negligible; scan
/// points inside that region and the supplied `kinks` become breakpoints.
pub fn integrate_scan<F: Fn(f64) -> f64>(
    f: F,
    a: f64,
    b: f64,
    kinks: &[f64],
    opts: QuadOptions,
) -> Result<Quadrature, QuadError> {
    const SCAN: usize = 256;
    let mut pts: Vec<f64> = (0..=SCAN).map(|i| a + (b - a) * (i as f64) / (SCAN as f64)).collect();
    pts.extend(kinks.iter().copied().filter(|k| *k > a && *k < b));
    pts.sort_by(|x, y| x.total_cmp(y));
    pts.dedup();
    let vals: Vec<f64> = pts.iter().map(|&t| f(t)).collect();
    if let Some(i) = vals.iter().position(|v| !v.is_finite()) {
        return Err(QuadError::NonFinite { at: pts[i] });
    }
    let peak = vals.iter().copied().fold(0.0, f64::max);
    let mut breaks: Vec<f64> = Vec::new();
    breaks.push(a);
    if peak > 0.0 {
        let floor = peak * 1e-40;
        let first = vals.iter().position(|&v| v > floor).unwrap_or(0);
        let last = vals.iter().rposition(|&v| v > floor).unwrap_or(pts.len() - 1);
        let lo = first.saturating_sub(1);
        let hi = (last + 1).min(pts.len() - 1);
        breaks.extend_from_slice(&pts[lo..=hi]);
    }
    breaks.extend(kinks.iter().copied().filter(|k| *k > a && *k < b));
    breaks.push(b);
    breaks.sort_by(|x, y| x.total_cmp(y));
    breaks.dedup();
    integrate_breaks(f, &breaks, opts)
}

fn push_segment(mesh: &mut Vec<f64>, a: f64, b: f64, levels: u32) {
    if levels == 0 {
        mesh.push(a);
        return;
    }
    let mid = 0.5 * (a + b);
    let half = mid - a;
    // toward a
    mesh.push(a);
    let mut pts: Vec<f64> = Vec::with_capacity(levels as usize);
    let mut h = half;
    for _ in 0..levels {
        h *= 0.5;
        pts.push(a + h);
    }
    pts.reverse();
    mesh.extend(pts.iter().copied().filter(|&p| p > a && p < mid));
    mesh.push(mid);
    let mut h = b - mid;
    let mut right: Vec<f64> = Vec::with_capacity(levels as usize);
    for _ in 0..levels {
        h *= 0.5;
        right.push(b - h);
    }
    mesh.extend(right.iter().copied().filter(|&p| p > mid && p < b));
}

fn integrate_mesh<F: Fn(f64) -> f64>(f: &F, mesh: &[f64], opts: QuadOptions) -> Result<Quadrature, QuadError> {
    let mut heap = BinaryHeap::with_capacity(mesh.len() * 2);
    let mut total = 0.0;
    let mut total_err = 0.0;
    for w in mesh.windows(2) {
        if !(w[1] > w[0]) {
            continue;
        }
        let (v, e) = kronrod(f, w[0], w[1])?;
        total += v;
        total_err += e;
        heap.push(Piece {
            a: w[0],
            b: w[1],
            value: v,
            err: e,
        });
    }
    let mut n = heap.len();
    let mut iter = 0usize;
    loop {
        let budget = opts.abs_tol.max(opts.rel_tol * fabs(total));
        if total_err <= budget {
            break;
        }
        if n >= opts.max_intervals {
            let (value, abs_err) = resum(&heap);
            if abs_err <= opts.abs_tol.max(opts.rel_tol * fabs(value)) {
                return Ok(Quadrature {
                    value,
                    abs_err,
                    intervals: n,
                });
            }
            return Err(QuadError::NonConvergent { value, abs_err });
        }
        let worst = match heap.pop() {
            Some(p) => p,
            None => break,
        };
        let mid = 0.5 * (worst.a + worst.b);
        if !(mid > worst.a && mid < worst.b) {
            // Interval exhausted at machine resolution; keep it as is.
            let (value, abs_err) = resum(&heap);
            let value = value + worst.value;
            let abs_err = abs_err + worst.err;
            if abs_err <= 10.0 * opts.abs_tol.max(opts.rel_tol * fabs(value)) {
                return Ok(Quadrature {
                    value,
                    abs_err,
                    intervals: n,
                });
            }
            return Err(QuadError::NonConvergent { value, abs_err });
        }
        let (v1, e1) = kronrod(f, worst.a, mid)?;
        let (v2, e2) = kronrod(f, mid, worst.b)?;
        total += v1 + v2 - worst.value;
        total_err += e1 + e2 - worst.err;
        heap.push(Piece {
            a: worst.a,
            b: mid,
            value: v1,
            err: e1,
        });
        heap.push(Piece {
            a: mid,
            b: worst.b,
            value: v2,
            err: e2,
        });
        n += 1;
        iter += 1;
        if iter.is_multiple_of(64) {
            let (v, e) = resum(&heap);
            total = v;
            total_err = e;
        }
    }
    let (value, abs_err) = resum(&heap);
    Ok(Quadrature {
        value,
        abs_err,
        intervals: n,
    })
}

fn resum(heap: &BinaryHeap<Piece>) -> (f64, f64) {
    let mut v = CompensatedSum::new();
    let mut e = CompensatedSum::new();
    for p in heap.iter() {
        v.add(p.value);
        e.add(p.err);
    }
    (v.value(), e.value())
}
