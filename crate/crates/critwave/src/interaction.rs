//! Two-soliton interaction algebra: the relative-velocity parameters
//! σ_{k,k'}, the interaction coefficients c_k and modulation drifts a_k, the
//! inelasticity functional Ψ, the nonlinear residual R_Σ with its t^{-4}
//! decay, the cross-term integrals ∫|W₁|^{r₁}|W₂|^{r₂}, the refined ansatz
//! (𝐖, 𝐗), and the scale-modulation ODE λ̇ = aλ^{1/2}/t².

use crate::fields::{
    fit_power_law, integrate_axisym_hinted, ClosureField, PowerLawFit, QuadratureSpec,
};
use crate::ground_state::{kappa, lambda_w, GroundConstants, SolitonParams};
use crate::quad::QuadOpts;
use crate::tail::model_correction_opts;
use crate::{Error, Result};

/// Two collinear solitons along e₁ in the normalized ordering ℓ₁ < ℓ₂.
#[derive(Debug, Clone, Copy)]
pub struct TwoSolitonConfig {
    pub s1: SolitonParams,
    pub s2: SolitonParams,
}

impl TwoSolitonConfig {
    pub fn new(s1: SolitonParams, s2: SolitonParams) -> Result<Self> {
        if !(s1.ell < s2.ell) {
            return Err(Error::Domain(format!(
                "two-soliton normalization requires ℓ₁ < ℓ₂ (got {} and {})",
                s1.ell, s2.ell
            )));
        }
        Ok(TwoSolitonConfig { s1, s2 })
    }

    /// The exceptional configuration (equal asymptotic scales, opposite
    /// signs) for which the inelasticity functional Ψ vanishes.
    pub fn is_dipole(&self) -> bool {
        self.s1.epsilon == -self.s2.epsilon && self.s1.lambda == self.s2.lambda
    }
}

/// The closed-form interaction coefficients of a two-soliton configuration.
#[derive(Debug, Clone, Copy, serde::Serialize)]
pub struct InteractionCoeffs {
    /// σ_{1,2} = (ℓ₁-ℓ₂)/(1-ℓ₂²)^{1/2} (component along e₁).
    pub sigma12: f64,
    /// σ_{2,1} = (ℓ₂-ℓ₁)/(1-ℓ₁²)^{1/2}.
    pub sigma21: f64,
    /// c₁ = (7/3)·15^{3/2}·ε₂ λ₂^{3/2} (1-ℓ₂²)^{3/2} / |ℓ₁-ℓ₂|³.
    pub c1: f64,
    pub c2: f64,
    /// a_k = -c_k κ_{ℓ_k} ε_k / 2, the scale-drift coefficients.
    pub a1: f64,
    pub a2: f64,
    /// Ψ = ((1-ℓ₁²)^{3/2}(1-ℓ₂²)^{3/2}/|ℓ₁-ℓ₂|³)·λ₁λ₂·(ε₁λ₁^{1/2}+ε₂λ₂^{1/2}).
    pub psi: f64,
}

/// The Lorentz-invariant kinematic factor (1-ℓ₁²)^{3/2}(1-ℓ₂²)^{3/2}/|ℓ₁-ℓ₂|³
/// shared by c_k and Ψ.
pub fn kinematic_factor(ell1: f64, ell2: f64) -> Result<f64> {
    if ell1.abs() >= 1.0 || ell2.abs() >= 1.0 {
        return Err(Error::Domain("speeds must lie in (−1, 1)".into()));
    }
    if ell1 == ell2 {
        return Err(Error::Domain("speeds must be distinct".into()));
    }
    let g1 = 1.0 - ell1 * ell1;
    let g2 = 1.0 - ell2 * ell2;
    Ok((g1 * g2).powf(1.5) / (ell1 - ell2).abs().powi(3))
}

/// Ψ for one (unordered) pair of solitons.
pub fn psi_pair(a: &SolitonParams, b: &SolitonParams) -> Result<f64> {
    let factor = kinematic_factor(a.ell, b.ell)?;
    Ok(factor
        * a.lambda
        * b.lambda
        * (a.epsilon * a.lambda.sqrt() + b.epsilon * b.lambda.sqrt()))
}

/// Σ_{j<k} Ψ_{j,k} over all pairs of a multi-soliton configuration.
pub fn psi_total(solitons: &[SolitonParams]) -> Result<f64> {
    if solitons.len() < 2 {
        return Err(Error::Domain("need at least two solitons".into()));
    }
    let mut total = 0.0;
    for (j, a) in solitons.iter().enumerate() {
        for b in solitons.iter().skip(j + 1) {
            total += psi_pair(a, b)?;
        }
    }
    Ok(total)
}

pub fn interaction_coeffs(cfg: &TwoSolitonConfig) -> Result<InteractionCoeffs> {
    let (s1, s2) = (&cfg.s1, &cfg.s2);
    let sigma12 = (s1.ell - s2.ell) / (1.0 - s2.ell * s2.ell).sqrt();
    let sigma21 = (s2.ell - s1.ell) / (1.0 - s1.ell * s1.ell).sqrt();
    let d3 = (s1.ell - s2.ell).abs().powi(3);
    let pref = 7.0 / 3.0 * 15.0_f64.powf(1.5);
    let c1 = pref * s2.epsilon * s2.lambda.powf(1.5) * (1.0 - s2.ell * s2.ell).powf(1.5) / d3;
    let c2 = pref * s1.epsilon * s1.lambda.powf(1.5) * (1.0 - s1.ell * s1.ell).powf(1.5) / d3;
    let consts = GroundConstants::compute();
    let k1 = kappa(&consts, s1.ell)?;
    let k2 = kappa(&consts, s2.ell)?;
    Ok(InteractionCoeffs {
        sigma12,
        sigma21,
        c1,
        c2,
        a1: -c1 * k1 * s1.epsilon / 2.0,
        a2: -c2 * k2 * s2.epsilon / 2.0,
        psi: psi_pair(s1, s2)?,
    })
}

// ---------------------------------------------------------------------------
// Pointwise soliton evaluation
// ---------------------------------------------------------------------------

/// W'(s)/s in closed form, regular at s = 0.
fn w_prime_over_r(s: f64) -> f64 {
    -(1.0 + s * s / 15.0).powf(-2.5) / 5.0
}

fn w_of(s: f64) -> f64 {
    (1.0 + s * s / 15.0).powf(-1.5)
}

/// The boosted, rescaled, translated, signed soliton
/// W_k(t,x) = ε λ^{-3/2} W_ℓ((x - ℓt e₁ - y)/λ), its spatial gradient, and
/// the scaling derivative Λ_kW_k, all in closed form on the axisymmetric
/// plane (centers must lie on the axis).
pub struct Soliton {
    pub params: SolitonParams,
    gamma: f64,
}

impl Soliton {
    pub fn new(params: SolitonParams) -> Result<Self> {
        if !params.is_on_axis() {
            return Err(Error::Precondition(
                "axisymmetric soliton evaluation needs an on-axis center".into(),
            ));
        }
        Ok(Soliton {
            params,
            gamma: (1.0 - params.ell * params.ell).sqrt(),
        })
    }

    /// Co-moving rest-frame coordinates (ž₁, ž_ρ) and their norm.
    fn rest_frame(&self, t: f64, x1: f64, rho: f64) -> (f64, f64, f64) {
        let p = &self.params;
        let z1 = (x1 - p.ell * t - p.y[0]) / p.lambda / self.gamma;
        let zr = rho / p.lambda;
        (z1, zr, (z1 * z1 + zr * zr).sqrt())
    }

    pub fn eval(&self, t: f64, x1: f64, rho: f64) -> f64 {
        let p = &self.params;
        let (_, _, s) = self.rest_frame(t, x1, rho);
        p.epsilon * p.lambda.powf(-1.5) * w_of(s)
    }

    pub fn dx1(&self, t: f64, x1: f64, rho: f64) -> f64 {
        let p = &self.params;
        let (z1, _, s) = self.rest_frame(t, x1, rho);
        p.epsilon * p.lambda.powf(-2.5) * w_prime_over_r(s) * z1 / self.gamma
    }

    pub fn drho(&self, t: f64, x1: f64, rho: f64) -> f64 {
        let p = &self.params;
        let (_, zr, s) = self.rest_frame(t, x1, rho);
        p.epsilon * p.lambda.powf(-2.5) * w_prime_over_r(s) * zr
    }

    /// X_k = -ℓ_k ∂x₁ W_k, the traveling-wave time derivative.
    pub fn x_component(&self, t: f64, x1: f64, rho: f64) -> f64 {
        -self.params.ell * self.dx1(t, x1, rho)
    }

    /// Λ_kW_k = ε λ^{-3/2} (ΛW)(ž) with Λ the Ḣ¹-scaling generator.
    pub fn scaling_mode(&self, t: f64, x1: f64, rho: f64) -> f64 {
        let p = &self.params;
        let (_, _, s) = self.rest_frame(t, x1, rho);
        p.epsilon * p.lambda.powf(-1.5) * lambda_w(s)
    }

    /// ⟨x - 𝓵t - y⟩ in the co-moving frame (used by decay envelopes).
    pub fn comoving_bracket(&self, t: f64, x1: f64, rho: f64) -> f64 {
        let p = &self.params;
        let d1 = x1 - p.ell * t - p.y[0];
        (1.0 + d1 * d1 + rho * rho).sqrt()
    }
}

// ---------------------------------------------------------------------------
// The nonlinear residual R_Σ
// ---------------------------------------------------------------------------

fn nonlin(u: f64) -> f64 {
    u.abs().powf(4.0 / 3.0) * u
}

/// d/du |u|^{4/3}u = (7/3)|u|^{4/3}.
fn nonlin_deriv(u: f64) -> f64 {
    7.0 / 3.0 * u.abs().powf(4.0 / 3.0)
}

/// |u|^{4/3} differentiated: (4/3)|u|^{1/3} sgn(u).
fn abs43_deriv(u: f64) -> f64 {
    4.0 / 3.0 * u.abs().powf(1.0 / 3.0) * u.signum()
}

/// ‖R_Σ(t)‖_{L²} and ‖R_Σ(t)‖_{H¹} where
/// R_Σ = |W₁+W₂|^{4/3}(W₁+W₂) − |W₁|^{4/3}W₁ − |W₂|^{4/3}W₂
///       − t^{-3}(c₁|W₁|^{4/3} + c₂|W₂|^{4/3}),
/// with parameters frozen at their asymptotic values. Passing
/// `with_counter_term = false` drops the t^{-3} subtraction and exposes the
/// uncorrected t^{-3} interaction.
pub fn residual_r_sigma(
    cfg: &TwoSolitonConfig,
    t: f64,
    with_counter_term: bool,
) -> Result<(f64, f64)> {
    let sep = (cfg.s2.ell - cfg.s1.ell).abs();
    if t < 10.0 / sep {
        return Err(Error::Precondition(format!(
            "solitons not separated: need t ≥ {}",
            10.0 / sep
        )));
    }
    let w1 = Soliton::new(cfg.s1)?;
    let w2 = Soliton::new(cfg.s2)?;
    let co = interaction_coeffs(cfg)?;
    let counter = if with_counter_term { t.powi(-3) } else { 0.0 };

    let value = |x1: f64, rho: f64| -> f64 {
        let a = w1.eval(t, x1, rho);
        let b = w2.eval(t, x1, rho);
        nonlin(a + b)
            - nonlin(a)
            - nonlin(b)
            - counter * (co.c1 * a.abs().powf(4.0 / 3.0) + co.c2 * b.abs().powf(4.0 / 3.0))
    };
    let grad_sq = |x1: f64, rho: f64| -> f64 {
        let a = w1.eval(t, x1, rho);
        let b = w2.eval(t, x1, rho);
        let (a1, ar) = (w1.dx1(t, x1, rho), w1.drho(t, x1, rho));
        let (b1, br) = (w2.dx1(t, x1, rho), w2.drho(t, x1, rho));
        let g1 = nonlin_deriv(a + b) * (a1 + b1)
            - nonlin_deriv(a) * a1
            - nonlin_deriv(b) * b1
            - counter * (co.c1 * abs43_deriv(a) * a1 + co.c2 * abs43_deriv(b) * b1);
        let gr = nonlin_deriv(a + b) * (ar + br)
            - nonlin_deriv(a) * ar
            - nonlin_deriv(b) * br
            - counter * (co.c1 * abs43_deriv(a) * ar + co.c2 * abs43_deriv(b) * br);
        g1 * g1 + gr * gr
    };

    let c1x = cfg.s1.ell * t + cfg.s1.y[0];
    let c2x = cfg.s2.ell * t + cfg.s2.y[0];
    let trunc = 60.0 * t.max(1.0) + c1x.abs().max(c2x.abs());
    let spec = QuadratureSpec::new(1e-7, 1e-280, trunc)?;
    let hints = [c1x, c2x];
    let sq = ClosureField::new(|x1: f64, rho: f64| value(x1, rho).powi(2), trunc);
    let l2_sq = integrate_axisym_hinted(&sq, &spec, &hints, &[])?;
    let gf = ClosureField::new(grad_sq, trunc);
    let grad_l2_sq = integrate_axisym_hinted(&gf, &spec, &hints, &[])?;
    if l2_sq < 0.0 || grad_l2_sq < 0.0 {
        return Err(Error::Convergence("negative squared norm".into()));
    }
    Ok((l2_sq.sqrt(), (l2_sq + grad_l2_sq).sqrt()))
}

// ---------------------------------------------------------------------------
// Cross-term integrals ∫|W₁|^{r₁}|W₂|^{r₂}
// ---------------------------------------------------------------------------

/// The cross-term integral I(t) = ∫_{ℝ⁵} |W₁|^{r₁}|W₂|^{r₂} dx across
/// `t_values`, with its fitted t-power. The expected exponent is −3r₂ when
/// r₁ > 5/3 (the second soliton sampled at the first one's center) and
/// 5 − 3(r₁+r₂) when r₁ ≤ 5/3 (bulk overlap).
pub fn cross_term_slope(
    cfg: &TwoSolitonConfig,
    r1: f64,
    r2: f64,
    t_values: &[f64],
) -> Result<PowerLawFit> {
    if !(r1 >= r2 && r2 > 0.0) {
        return Err(Error::Precondition("need r₁ ≥ r₂ > 0".into()));
    }
    if r1 + r2 <= 5.0 / 3.0 {
        return Err(Error::Precondition(
            "need r₁ + r₂ > 5/3 for a convergent integral".into(),
        ));
    }
    let w1 = Soliton::new(cfg.s1)?;
    let w2 = Soliton::new(cfg.s2)?;
    let mut samples = Vec::with_capacity(t_values.len());
    for &t in t_values {
        let c1x = cfg.s1.ell * t + cfg.s1.y[0];
        let c2x = cfg.s2.ell * t + cfg.s2.y[0];
        let trunc = 300.0 * t.max(1.0) + c1x.abs().max(c2x.abs());
        let spec = QuadratureSpec::new(1e-7, 1e-280, trunc)?;
        let f = ClosureField::new(
            |x1: f64, rho: f64| {
                w1.eval(t, x1, rho).abs().powf(r1) * w2.eval(t, x1, rho).abs().powf(r2)
            },
            trunc,
        );
        let v = integrate_axisym_hinted(&f, &spec, &[c1x, c2x], &[])?;
        samples.push((t, v));
    }
    fit_power_law(&samples)
}

// ---------------------------------------------------------------------------
// The refined ansatz (𝐖, 𝐗)
// ---------------------------------------------------------------------------

/// Pointwise value of the refined two-soliton ansatz.
#[derive(Debug, Clone, Copy)]
pub struct AnsatzPoint {
    /// 𝐖 = Σ_k (W_k + c_k v_k).
    pub w: f64,
    /// 𝐗 = Σ_k (X_k + c_k z_k) with X_k = -ℓ_k ∂x₁W_k.
    pub x: f64,
}

/// The rescaled correction v_k(t,x) = λ^{-3} v_ℓ(t/λ, (x-y)/λ), with v_ℓ
/// represented by its dispersive model (the Duhamel integral of the sharp
/// sources scaled by -3/2·15^{3/2}·κ_ℓ).
fn correction_vk(p: &SolitonParams, t: f64, x1: f64, rho: f64, opts: QuadOpts) -> Result<f64> {
    let lam = p.lambda;
    let v = model_correction_opts(p.ell, t / lam, (x1 - p.y[0]) / lam, rho / lam, opts)?;
    Ok(v / lam.powi(3))
}

/// z_k = λ^{-4} (∂t v_ℓ)(t/λ, (x-y)/λ) + κ_ℓ ε/(2λ^{1/2}t²)·Λ_kW_k, the
/// time-derivative partner of v_k; ∂t v_ℓ is taken by central differences of
/// the dispersive model.
fn correction_zk(
    p: &SolitonParams,
    sol: &Soliton,
    t: f64,
    x1: f64,
    rho: f64,
    opts: QuadOpts,
) -> Result<f64> {
    let lam = p.lambda;
    let (tl, z1, zr) = (t / lam, (x1 - p.y[0]) / lam, rho / lam);
    let h = 1e-3 * tl.max(1.0);
    let plus = model_correction_opts(p.ell, tl + h, z1, zr, opts)?;
    let minus = model_correction_opts(p.ell, tl - h, z1, zr, opts)?;
    let dv = (plus - minus) / (2.0 * h);
    let kl = kappa(&GroundConstants::compute(), p.ell)?;
    Ok(dv / lam.powi(4)
        + kl * p.epsilon / (2.0 * lam.sqrt() * t * t) * sol.scaling_mode(t, x1, rho))
}

/// 𝐖 alone (no time-derivative partner): much cheaper than
/// [`assemble_ansatz`] because the z_k finite differences are skipped.
pub fn ansatz_w(
    cfg: &TwoSolitonConfig,
    t: f64,
    x1: f64,
    rho: f64,
    c_override: Option<(f64, f64)>,
    opts: QuadOpts,
) -> Result<f64> {
    let (c1, c2) = match c_override {
        Some(pair) => pair,
        None => {
            let co = interaction_coeffs(cfg)?;
            (co.c1, co.c2)
        }
    };
    let w1 = Soliton::new(cfg.s1)?;
    let w2 = Soliton::new(cfg.s2)?;
    let mut w = w1.eval(t, x1, rho) + w2.eval(t, x1, rho);
    if c1 != 0.0 {
        w += c1 * correction_vk(&cfg.s1, t, x1, rho, opts)?;
    }
    if c2 != 0.0 {
        w += c2 * correction_vk(&cfg.s2, t, x1, rho, opts)?;
    }
    Ok(w)
}

/// Evaluate 𝐖 and 𝐗 at one point. `c_override` replaces the closed-form
/// (c₁, c₂); passing `Some((0.0, 0.0))` gives the bare two-soliton sum.
/// `opts` controls the Duhamel quadrature of the corrections.
pub fn assemble_ansatz(
    cfg: &TwoSolitonConfig,
    t: f64,
    x1: f64,
    rho: f64,
    c_override: Option<(f64, f64)>,
    opts: QuadOpts,
) -> Result<AnsatzPoint> {
    let (c1, c2) = match c_override {
        Some(pair) => pair,
        None => {
            let co = interaction_coeffs(cfg)?;
            (co.c1, co.c2)
        }
    };
    let w1 = Soliton::new(cfg.s1)?;
    let w2 = Soliton::new(cfg.s2)?;
    let mut w = w1.eval(t, x1, rho) + w2.eval(t, x1, rho);
    let mut x = w1.x_component(t, x1, rho) + w2.x_component(t, x1, rho);
    if c1 != 0.0 {
        w += c1 * correction_vk(&cfg.s1, t, x1, rho, opts)?;
        x += c1 * correction_zk(&cfg.s1, &w1, t, x1, rho, opts)?;
    }
    if c2 != 0.0 {
        w += c2 * correction_vk(&cfg.s2, t, x1, rho, opts)?;
        x += c2 * correction_zk(&cfg.s2, &w2, t, x1, rho, opts)?;
    }
    Ok(AnsatzPoint { w, x })
}

/// The decay envelope Σ_k (⟨x-𝓵_kt⟩^{-3} + t^{-1}⟨x-𝓵_kt⟩^{-3+δ}) that
/// bounds |𝐖| up to a constant.
pub fn ansatz_envelope(cfg: &TwoSolitonConfig, t: f64, x1: f64, rho: f64, delta: f64) -> f64 {
    let mut e = 0.0;
    for p in [&cfg.s1, &cfg.s2] {
        let d1 = x1 - p.ell * t - p.y[0];
        let br = (1.0 + d1 * d1 + rho * rho).sqrt();
        e += br.powi(-3) + br.powf(-3.0 + delta) / t;
    }
    e
}

// ---------------------------------------------------------------------------
// Modulation ODE
// ---------------------------------------------------------------------------

/// The closed-form solution of λ̇ = aλ^{1/2}/t² with λ(∞) = λ_inf:
/// λ^{1/2}(t) = λ_inf^{1/2} − a/(2t).
pub fn modulation_closed(lambda_inf: f64, a: f64, t: f64) -> Result<f64> {
    if !(lambda_inf > 0.0) || t <= 0.0 {
        return Err(Error::Domain("need λ_inf > 0 and t > 0".into()));
    }
    let root = lambda_inf.sqrt() - a / (2.0 * t);
    if root <= 0.0 {
        return Err(Error::Domain(
            "scale reaches zero before the requested time".into(),
        ));
    }
    Ok(root * root)
}

/// Integrate λ̇ = aλ^{1/2}/t² backward from λ(∞) = λ_inf and sample λ(t) at
/// `n` geometrically spaced times in [t0, t1]. The substitution s = 1/t
/// turns the problem into dλ/ds = -a√λ from s = 0, integrated by classical
/// fourth-order Runge-Kutta with fixed steps.
pub fn modulation_ode(
    lambda_inf: f64,
    a: f64,
    t0: f64,
    t1: f64,
    n: usize,
) -> Result<Vec<(f64, f64)>> {
    if !(lambda_inf > 0.0) {
        return Err(Error::Domain("need λ_inf > 0".into()));
    }
    if !(t0 >= 1.0 && t1 >= t0) {
        return Err(Error::Domain("need 1 ≤ t0 ≤ t1".into()));
    }
    if n < 1 {
        return Err(Error::Domain("need at least one sample".into()));
    }
    let times: Vec<f64> = if n == 1 {
        vec![t0]
    } else {
        (0..n)
            .map(|i| t0 * (t1 / t0).powf(i as f64 / (n - 1) as f64))
            .collect()
    };
    // Integrate once from s = 0 down to s_max = 1/t0, recording the requested
    // samples (largest t = smallest s first).
    let mut order: Vec<usize> = (0..times.len()).collect();
    order.sort_by(|&i, &j| times[j].total_cmp(&times[i]));
    let rhs = |lam: f64| -> Result<f64> {
        if lam <= 0.0 {
            return Err(Error::Domain(
                "scale reached zero during modulation integration".into(),
            ));
        }
        Ok(-a * lam.sqrt())
    };
    let mut out = vec![(0.0, 0.0); times.len()];
    let mut s = 0.0_f64;
    let mut lam = lambda_inf;
    let ds_base = 1e-4 / t0.max(1.0);
    for &idx in &order {
        let s_target = 1.0 / times[idx];
        while s < s_target {
            let ds = ds_base.min(s_target - s);
            let k1 = rhs(lam)?;
            let k2 = rhs(lam + 0.5 * ds * k1)?;
            let k3 = rhs(lam + 0.5 * ds * k2)?;
            let k4 = rhs(lam + ds * k3)?;
            lam += ds / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
            s += ds;
        }
        if lam <= 0.0 {
            return Err(Error::Domain(
                "scale reached zero during modulation integration".into(),
            ));
        }
        out[idx] = (times[idx], lam);
    }
    Ok(out)
}
