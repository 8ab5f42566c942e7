//! Adaptive one-dimensional quadrature used as the substrate for every
//! integral in the crate.
//!
//! The rule is the classic 15-point Kronrod extension of 7-point
//! Gauss-Legendre; the driver is a global strategy that keeps a worklist of
//! segments ordered by error estimate and bisects the worst one until the
//! summed error passes the tolerance or the subdivision budget is exhausted.
//! Everything is serial and the final sum is taken over segments sorted by
//! left endpoint, so results are bit-reproducible for fixed inputs.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

/// Tolerances and budget for one adaptive integration.
#[derive(Debug, Clone, Copy)]
pub struct QuadOpts {
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub max_subdivisions: usize,
}

impl QuadOpts {
    pub fn new(rel_tol: f64, abs_tol: f64) -> Self {
        QuadOpts {
            rel_tol,
            abs_tol,
            max_subdivisions: 4000,
        }
    }

    pub fn with_budget(mut self, max_subdivisions: usize) -> Self {
        self.max_subdivisions = max_subdivisions;
        self
    }
}

impl Default for QuadOpts {
    fn default() -> Self {
        QuadOpts::new(1e-10, 1e-14)
    }
}

/// Outcome of an adaptive integration.
#[derive(Debug, Clone, Copy)]
pub struct QuadResult {
    pub value: f64,
    pub abs_err: f64,
    pub subdivisions: usize,
    pub converged: bool,
}

impl QuadResult {
    fn zero() -> Self {
        QuadResult {
            value: 0.0,
            abs_err: 0.0,
            subdivisions: 0,
            converged: true,
        }
    }
}

// Abscissae of the 15-point Kronrod rule on [-1, 1]; even entries are the
// embedded 7-point Gauss nodes.
const XGK: [f64; 8] = [
    0.991455371120813,
    0.949107912342759,
    0.864864423359769,
    0.741531185599394,
    0.586087235467691,
    0.405845151377397,
    0.207784955007898,
    0.0,
];

const WGK: [f64; 8] = [
    0.022935322010529,
    0.063092092629979,
    0.104790010322250,
    0.140653259715525,
    0.169004726639267,
    0.190350578064785,
    0.204432940075298,
    0.209482141084728,
];

const WG: [f64; 4] = [
    0.129484966168870,
    0.279705391489277,
    0.381830050505119,
    0.417959183673469,
];

/// One application of the Gauss-Kronrod 7-15 pair on [a, b].
/// Returns (kronrod value, error estimate).
fn gk15<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> (f64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);

    let fc = f(c);
    let mut kron = WGK[7] * fc;
    let mut gauss = WG[3] * fc;
    let mut resabs = WGK[7] * fc.abs();

    for j in 0..7 {
        let x = h * XGK[j];
        let f1 = f(c - x);
        let f2 = f(c + x);
        kron += WGK[j] * (f1 + f2);
        resabs += WGK[j] * (f1.abs() + f2.abs());
        if j % 2 == 1 {
            gauss += WG[j / 2] * (f1 + f2);
        }
    }

    let value = kron * h;
    let raw = ((kron - gauss) * h).abs();
    // The (200 u)^{3/2} sharpening from QUADPACK; keeps the estimate from
    // being wildly pessimistic on smooth segments.
    let scale = resabs * h.abs();
    let err = if raw == 0.0 || scale == 0.0 {
        raw
    } else {
        let e = (200.0 * raw / scale).powf(1.5) * scale;
        e.min(raw).max(f64::EPSILON * 50.0 * scale)
    };
    (value, err)
}

#[derive(Debug, Clone, Copy)]
struct Segment {
    a: f64,
    b: f64,
    value: f64,
    err: f64,
}

impl PartialEq for Segment {
    fn eq(&self, other: &Self) -> bool {
        self.err == other.err && self.a == other.a && self.b == other.b
    }
}
impl Eq for Segment {}
impl PartialOrd for Segment {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Segment {
    fn cmp(&self, other: &Self) -> Ordering {
        // Max-heap on error; ties broken by left endpoint for determinism.
        self.err
            .total_cmp(&other.err)
            .then(other.a.total_cmp(&self.a))
            .then(other.b.total_cmp(&self.b))
    }
}

/// Adaptive integration of `f` over [a, b].
pub fn integrate<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, opts: QuadOpts) -> QuadResult {
    integrate_split(f, &[a, b], opts)
}

/// Adaptive integration over consecutive segments given by `points`
/// (strictly increasing). Extra interior points act as refinement hints for
/// integrands with known localized features.
pub fn integrate_split<F: Fn(f64) -> f64>(f: F, points: &[f64], opts: QuadOpts) -> QuadResult {
    assert!(points.len() >= 2, "need at least two breakpoints");
    if points.first() == points.last() {
        return QuadResult::zero();
    }

    let mut heap: BinaryHeap<Segment> = BinaryHeap::new();
    for w in points.windows(2) {
        let (a, b) = (w[0], w[1]);
        debug_assert!(b >= a, "breakpoints must be non-decreasing");
        if b > a {
            let (value, err) = gk15(&f, a, b);
            heap.push(Segment { a, b, value, err });
        }
    }

    let mut subdivisions = 0usize;
    loop {
        let total: f64 = heap.iter().map(|s| s.value).sum();
        let total_err: f64 = heap.iter().map(|s| s.err).sum();
        let tol = opts.abs_tol.max(opts.rel_tol * total.abs());
        if total_err <= tol || subdivisions >= opts.max_subdivisions {
            let mut segs: Vec<Segment> = heap.into_vec();
            segs.sort_by(|x, y| x.a.total_cmp(&y.a));
            let value: f64 = segs.iter().map(|s| s.value).sum();
            let abs_err: f64 = segs.iter().map(|s| s.err).sum();
            return QuadResult {
                value,
                abs_err,
                subdivisions,
                converged: abs_err <= opts.abs_tol.max(opts.rel_tol * value.abs()),
            };
        }
        let worst = heap.pop().expect("non-empty heap");
        let m = 0.5 * (worst.a + worst.b);
        if m <= worst.a || m >= worst.b {
            // Interval at floating-point resolution: keep as is, stop
            // refining it by pushing it back with zeroed error.
            heap.push(Segment {
                err: 0.0,
                ..worst
            });
            continue;
        }
        let (v1, e1) = gk15(&f, worst.a, m);
        let (v2, e2) = gk15(&f, m, worst.b);
        heap.push(Segment {
            a: worst.a,
            b: m,
            value: v1,
            err: e1,
        });
        heap.push(Segment {
            a: m,
            b: worst.b,
            value: v2,
            err: e2,
        });
        subdivisions += 1;
    }
}

/// Adaptive integration of `f` over [a, ∞) through the rational map
/// x = a + scale·u/(1−u), u ∈ [0,1).
///
/// `hints` are x-space locations of sharp features; they are mapped into
/// u-space and used as initial breakpoints together with a geometric ladder,
/// so distant narrow peaks are not missed by the global strategy.
pub fn integrate_semi_inf<F: Fn(f64) -> f64>(
    f: F,
    a: f64,
    scale: f64,
    hints: &[f64],
    opts: QuadOpts,
) -> QuadResult {
    assert!(scale > 0.0 && scale.is_finite());
    let to_u = |x: f64| (x - a) / (x - a + scale);
    let mut us: Vec<f64> = vec![0.0, 1.0];
    // Generic ladder resolving several decades on both sides of `scale`.
    for k in -3..=6 {
        us.push(to_u(a + scale * 10f64.powi(k)));
    }
    for &h in hints {
        if h > a && h.is_finite() {
            us.push(to_u(h));
            // Geometric bracket ladder in x-space so that features much
            // narrower than their distance from `a` are still resolved by
            // the initial breakpoints.
            let mut w = (h - a).abs().max(1.0) * 1e-7;
            while w <= (h - a) * 2.0 {
                for s in [-1.0, 1.0] {
                    let x = h + s * w;
                    if x > a {
                        us.push(to_u(x));
                    }
                }
                w *= 4.0;
            }
        }
    }
    us.retain(|u| u.is_finite() && (0.0..=1.0).contains(u));
    us.sort_by(f64::total_cmp);
    us.dedup();
    // Clip the u=1 endpoint: the Jacobian diverges there, but the integrand
    // must decay; stop at 1 - 1e-14 (x ~ scale * 1e14).
    let last = us.len() - 1;
    us[last] = 1.0 - 1e-14;
    us.retain(|&u| u <= 1.0 - 1e-14);
    if *us.last().unwrap() < 1.0 - 1e-14 {
        us.push(1.0 - 1e-14);
    }

    let g = |u: f64| {
        let om = 1.0 - u;
        let x = a + scale * u / om;
        let jac = scale / (om * om);
        f(x) * jac
    };
    integrate_split(g, &us, opts)
}

/// Geometric refinement ladder around `center`, from resolution `inner` out
/// to `outer`, clipped to [lo, hi]. Returned points are sorted and deduped;
/// use as breakpoints for `integrate_split` when an integrand has a narrow
/// feature of width ~`inner` at a known location.
pub fn geometric_ladder(center: f64, inner: f64, outer: f64, lo: f64, hi: f64) -> Vec<f64> {
    assert!(inner > 0.0 && outer >= inner);
    let mut pts = vec![lo, hi];
    let mut w = inner;
    while w <= outer {
        for s in [-1.0, 1.0] {
            let p = center + s * w;
            if p > lo && p < hi {
                pts.push(p);
            }
        }
        w *= 4.0;
    }
    if center > lo && center < hi {
        pts.push(center);
    }
    pts.sort_by(f64::total_cmp);
    pts.dedup();
    pts
}
