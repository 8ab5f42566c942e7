//! The exact dictionary between radial 5D waves and half-line 1D waves:
//! the substitution φ = r²∂rV + 3rV, its inverse V = r^{-3}∫₀^r sφ, the
//! double-integral representation of φ for a moving source, d'Alembert
//! evolution with Dirichlet reflection at r = 0, and spherical means of
//! axisymmetric solutions.

use crate::fields::{ClosureField, RadialField, RadialProfile};
use crate::quad::{self, QuadOpts};
use crate::{Error, Result};

// ---------------------------------------------------------------------------
// φ = r²V′ + 3rV and its inverse
// ---------------------------------------------------------------------------

/// φ(r) = r²V′(r) + 3rV(r), sampled on the grid of V with the interpolant's
/// derivative.
pub fn to_phi(v: &RadialProfile) -> Result<RadialProfile> {
    let grid = v.grid().to_vec();
    let values: Vec<f64> = grid
        .iter()
        .map(|&r| r * r * v.deriv(r) + 3.0 * r * v.eval(r))
        .collect();
    RadialProfile::new(grid, values)
}

/// Same map for closed-form data: r ↦ r²V′ + 3rV.
pub fn to_phi_fn<'a>(v: &'a dyn RadialField) -> impl Fn(f64) -> f64 + 'a {
    move |r: f64| r * r * v.deriv(r) + 3.0 * r * v.eval(r)
}

/// Inverse map V(r) = r^{-3} ∫₀^r s φ(s) ds, which picks the decaying branch
/// (the kernel of the forward map on r > 0 is spanned by r^{-3}).
pub fn from_phi(phi: &RadialProfile) -> Result<RadialProfile> {
    let scale = phi
        .values()
        .iter()
        .fold(0.0_f64, |m, v| m.max(v.abs()))
        .max(1e-300);
    if phi.r_min() > 1e-6 || phi.eval(phi.r_min()).abs() > 1e-8 * scale {
        return Err(Error::Precondition(
            "φ must be sampled from r = 0 with φ(0) = 0".into(),
        ));
    }
    let grid = phi.grid().to_vec();
    let opts = QuadOpts::new(1e-12, 1e-16);
    // cumulative ∫ s φ(s) ds over grid segments
    let mut cum = vec![0.0; grid.len()];
    for i in 1..grid.len() {
        cum[i] = cum[i - 1]
            + quad::integrate(|s| s * phi.eval(s), grid[i - 1], grid[i], opts).value;
    }
    let mut values = Vec::with_capacity(grid.len());
    let mut derivs = Vec::with_capacity(grid.len());
    for (i, &r) in grid.iter().enumerate() {
        if r == 0.0 {
            // φ ~ φ′(0) r near 0 gives V(0) = φ′(0)/3
            values.push(phi.deriv(0.0) / 3.0);
            derivs.push(0.0);
        } else {
            let v = cum[i] / r.powi(3);
            values.push(v);
            derivs.push(phi.eval(r) / (r * r) - 3.0 * v / r);
        }
    }
    RadialProfile::with_derivs(grid, values, derivs)
}

// ---------------------------------------------------------------------------
// φ from a moving 1D source
// ---------------------------------------------------------------------------

/// 1D reduced source h(t,a) with optional closed a-antiderivative and decay
/// metadata. `q` is the declared time decay h = O(t^{-q}); the representation
/// integral needs q > 2. `a_peak` maps τ to the location of a concentrated
/// feature of h(τ,·), used as a quadrature hint for moving sources.
pub struct SourceSpec1D<'a> {
    pub h: &'a dyn Fn(f64, f64) -> f64,
    /// A(t, a) = ∫₀^a h(t, s) ds when available in closed form.
    pub h_antideriv: Option<&'a dyn Fn(f64, f64) -> f64>,
    pub q: f64,
    pub a_peak: Option<&'a dyn Fn(f64) -> f64>,
    /// Width of the concentrated feature of h(τ,·) around `a_peak`; the
    /// refinement ladder starts at this resolution (default: 1e-6 of the
    /// peak location, for features of unknown width).
    pub a_peak_width: Option<f64>,
}

/// φ(t,r) = ½ ∫₀^∞ ∫_{|r−σ|}^{r+σ} h(t+σ, a) da dσ.
pub fn phi_from_source(src: &SourceSpec1D, t: f64, r: f64, opts: QuadOpts) -> Result<f64> {
    if src.q <= 2.0 {
        return Err(Error::Precondition(format!(
            "source decay q = {} gives a divergent σ-tail (need q > 2)",
            src.q
        )));
    }
    if r < 0.0 || t <= 0.0 {
        return Err(Error::Domain("need t > 0, r ≥ 0".into()));
    }
    let inner_opts = QuadOpts::new(opts.rel_tol * 0.1, opts.abs_tol * 0.1)
        .with_budget(opts.max_subdivisions);
    let inner = |sigma: f64| -> f64 {
        let tau = t + sigma;
        let lo = (r - sigma).abs();
        let hi = r + sigma;
        if hi <= lo {
            return 0.0;
        }
        match src.h_antideriv {
            Some(aa) => aa(tau, hi) - aa(tau, lo),
            None => {
                let mut pts = vec![lo, hi];
                if let Some(pk) = src.a_peak {
                    let a0 = pk(tau);
                    if a0 > lo && a0 < hi {
                        let inner = src
                            .a_peak_width
                            .map(|w| 0.25 * w)
                            .unwrap_or(1e-6 * a0.abs().max(1.0));
                        pts.extend(quad::geometric_ladder(
                            a0,
                            inner.min(hi - lo),
                            hi - lo,
                            lo,
                            hi,
                        ));
                    }
                }
                pts.sort_by(f64::total_cmp);
                pts.dedup();
                quad::integrate_split(|a| (src.h)(tau, a), &pts, inner_opts).value
            }
        }
    };
    // σ-hints: the kink at σ = r, and (for a moving source concentrated at
    // a ≈ ℓτ) the crossing where the peak enters the a-window.
    let mut hints = vec![r];
    if let Some(pk) = src.a_peak {
        for probe in [t, t + r] {
            let a0 = pk(probe);
            if a0.is_finite() && a0 > 0.0 {
                hints.push((a0 - r).abs());
                hints.push(a0 + r);
            }
        }
    }
    let res = quad::integrate_semi_inf(inner, 0.0, (t + r).max(1.0), &hints, opts);
    if !res.converged && res.abs_err > 1e-7 * res.value.abs() {
        return Err(Error::Convergence(format!(
            "phi_from_source: {} ± {} after {} subdivisions",
            res.value, res.abs_err, res.subdivisions
        )));
    }
    Ok(0.5 * res.value)
}

// ---------------------------------------------------------------------------
// d'Alembert evolution on the half line (Dirichlet at r = 0)
// ---------------------------------------------------------------------------

/// State (φ, ∂tφ) of the half-line wave equation with Dirichlet boundary.
#[derive(Debug, Clone)]
pub struct HalfLineWaveState {
    pub phi0: RadialProfile,
    pub phi1: RadialProfile,
}

impl HalfLineWaveState {
    pub fn new(phi0: RadialProfile, phi1: RadialProfile) -> Result<Self> {
        let s0 = phi0.values().iter().fold(0.0_f64, |m, v| m.max(v.abs()));
        let s1 = phi1.values().iter().fold(0.0_f64, |m, v| m.max(v.abs()));
        let scale = s0.max(s1).max(1e-300);
        if phi0.r_min() > 0.0
            || phi1.r_min() > 0.0
            || phi0.eval(0.0).abs() > 1e-10 * scale
            || phi1.eval(0.0).abs() > 1e-10 * scale
        {
            return Err(Error::Precondition(
                "half-line data must start at r = 0 with Dirichlet values".into(),
            ));
        }
        Ok(HalfLineWaveState { phi0, phi1 })
    }
}

/// Exact evaluator of the evolved state via odd extension:
/// φ(t,r) = ½[φ̃₀(r+t) + φ̃₀(r−t)] + ½[Φ̃₁(r+t) − Φ̃₁(r−t)],
/// with Φ̃₁ the (even) antiderivative of the odd extension of φ₁. The
/// antiderivative is taken segment-exactly on the Hermite interpolant, so
/// the evolution is exact for the interpolated data.
pub struct DalembertEvaluator<'a> {
    state: &'a HalfLineWaveState,
    cum: Vec<f64>,
}

impl<'a> DalembertEvaluator<'a> {
    pub fn new(state: &'a HalfLineWaveState) -> Self {
        let g = state.phi1.grid();
        let mut cum = vec![0.0; g.len()];
        for i in 1..g.len() {
            cum[i] = cum[i - 1] + hermite_segment_integral(&state.phi1, i - 1, g[i]);
        }
        DalembertEvaluator { state, cum }
    }

    /// Φ̃₁(x) = ∫₀^{|x|} φ₁ (even in x).
    fn big_phi1(&self, x: f64) -> f64 {
        let r = x.abs();
        let g = self.state.phi1.grid();
        if r >= *g.last().unwrap() {
            return *self.cum.last().unwrap();
        }
        let i = match g.binary_search_by(|p| p.total_cmp(&r)) {
            Ok(i) => i,
            Err(i) => i - 1,
        };
        let i = i.min(g.len() - 2);
        self.cum[i] + hermite_segment_integral(&self.state.phi1, i, r)
    }

    fn odd0(&self, x: f64) -> f64 {
        x.signum() * self.state.phi0.eval(x.abs())
    }
    fn odd0_deriv(&self, x: f64) -> f64 {
        self.state.phi0.deriv(x.abs())
    }
    fn odd1(&self, x: f64) -> f64 {
        x.signum() * self.state.phi1.eval(x.abs())
    }

    /// (φ, ∂tφ, ∂rφ) at time t, radius r.
    pub fn eval(&self, t: f64, r: f64) -> (f64, f64, f64) {
        let p = r + t;
        let m = r - t;
        let phi = 0.5 * (self.odd0(p) + self.odd0(m)) + 0.5 * (self.big_phi1(p) - self.big_phi1(m));
        let phi_t =
            0.5 * (self.odd0_deriv(p) - self.odd0_deriv(m)) + 0.5 * (self.odd1(p) + self.odd1(m));
        let phi_r =
            0.5 * (self.odd0_deriv(p) + self.odd0_deriv(m)) + 0.5 * (self.odd1(p) - self.odd1(m));
        (phi, phi_t, phi_r)
    }
}

/// ∫ of the Hermite interpolant of `prof` from grid node `i` up to x inside
/// segment [g_i, g_{i+1}] (closed form; the interpolant is cubic).
fn hermite_segment_integral(prof: &RadialProfile, i: usize, x: f64) -> f64 {
    let g = prof.grid();
    let (a, b) = (g[i], g[i + 1]);
    let t = b - a;
    let u = ((x - a) / t).clamp(0.0, 1.0);
    let u2 = u * u;
    let u3 = u2 * u;
    let u4 = u2 * u2;
    let i00 = 0.5 * u4 - u3 + u;
    let i01 = -0.5 * u4 + u3;
    let i10 = 0.25 * u4 - 2.0 / 3.0 * u3 + 0.5 * u2;
    let i11 = 0.25 * u4 - u3 / 3.0;
    let (v0, v1) = (prof.values()[i], prof.values()[i + 1]);
    let (d0, d1) = (prof.derivs()[i], prof.derivs()[i + 1]);
    t * (v0 * i00 + v1 * i01 + t * (d0 * i10 + d1 * i11))
}

/// Evolve the state by time t, resampling the exact evaluator on the union
/// of the original grid and its ±t translates.
pub fn dalembert_halfline(state: &HalfLineWaveState, t: f64) -> Result<HalfLineWaveState> {
    let ev = DalembertEvaluator::new(state);
    let r_old = state.phi0.r_max();
    let r_new = r_old + t.abs();
    let mut grid: Vec<f64> = Vec::new();
    for &g in state.phi0.grid() {
        for cand in [g, g + t.abs(), (g - t.abs()).abs()] {
            if cand <= r_new {
                grid.push(cand);
            }
        }
    }
    grid.push(0.0);
    grid.push(r_new);
    grid.sort_by(f64::total_cmp);
    grid.dedup_by(|a, b| (*a - *b).abs() < 1e-12 * r_new.max(1.0));
    if grid[0] != 0.0 {
        grid[0] = 0.0;
    }
    let mut v0 = Vec::with_capacity(grid.len());
    let mut d0 = Vec::with_capacity(grid.len());
    let mut v1 = Vec::with_capacity(grid.len());
    for &r in &grid {
        let (phi, phi_t, phi_r) = ev.eval(t, r);
        v0.push(phi);
        d0.push(phi_r);
        v1.push(phi_t);
    }
    let phi0 = RadialProfile::with_derivs(grid.clone(), v0, d0)?;
    let phi1 = RadialProfile::new(grid, v1)?;
    HalfLineWaveState::new(phi0, phi1)
}

/// Half-line energy ∫₀^∞ (∂tφ)² + (∂rφ)² dr of the evolved interpolated
/// data, by quadrature on the exact evaluator.
pub fn halfline_energy(state: &HalfLineWaveState, t: f64, opts: QuadOpts) -> f64 {
    let ev = DalembertEvaluator::new(state);
    let r_max = state.phi0.r_max() + t.abs() + 1.0;
    let pts = [0.0, t.abs(), state.phi0.r_max(), r_max];
    let mut p: Vec<f64> = pts.to_vec();
    p.sort_by(f64::total_cmp);
    p.dedup();
    quad::integrate_split(
        |r| {
            let (_, pt, pr) = ev.eval(t, r);
            pt * pt + pr * pr
        },
        &p,
        opts,
    )
    .value
}

// ---------------------------------------------------------------------------
// Spherical means of axisymmetric solutions
// ---------------------------------------------------------------------------

/// Spherical-mean reduction of a time-parametrized axisymmetric family:
/// returns U(t, r) = ⨍_{|y|=r} u(t, y) dω. If u solves the 5D wave equation,
/// so does U (now radial).
pub fn sphere_average_solution<'a>(
    u: &'a dyn Fn(f64, f64, f64) -> f64,
    support: f64,
) -> impl Fn(f64, f64) -> f64 + 'a {
    move |t: f64, r: f64| {
        if r <= 0.0 {
            return u(t, 0.0, 0.0);
        }
        let snap = ClosureField::new(move |x1: f64, rho: f64| u(t, x1, rho), support);
        crate::fields::spherical_mean_opts(&snap, r, QuadOpts::new(1e-11, 1e-15))
    }
}

/// Finite-difference residual of the radial 5D wave operator
/// ∂t²U − ∂r²U − (4/r)∂rU at (t, r), step h (2nd-order stencils). Used to
/// certify that a reduced family actually solves the radial wave equation.
pub fn radial_wave_residual(u: &dyn Fn(f64, f64) -> f64, t: f64, r: f64, h: f64) -> f64 {
    let dtt = (u(t + h, r) - 2.0 * u(t, r) + u(t - h, r)) / (h * h);
    let drr = (u(t, r + h) - 2.0 * u(t, r) + u(t, r - h)) / (h * h);
    let dr = (u(t, r + h) - u(t, r - h)) / (2.0 * h);
    dtt - drr - 4.0 / r * dr
}
