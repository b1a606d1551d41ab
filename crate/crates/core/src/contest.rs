//! Structural primitives of the single-surface contest and the breach function.
//!
//! Breach probability takes the Tullock contest form
//!
//! ```text
//! q(a, d, s) = q0 h(a) / (q0 h(a) + (1 - q0) (1 + delta(a) d s))
//! ```
//!
//! where `h` amplifies the attacker unconditionally and `delta` is the
//! defender effectiveness that attacker investment erodes.

use crate::error::{ModelError, Result};
use crate::scalar::Scalar;

pub(crate) fn check_nonneg<T: Scalar>(name: &'static str, x: T) -> Result<()> {
    if x >= T::zero() && x.is_finite() {
        Ok(())
    } else {
        Err(ModelError::Domain {
            name,
            value: x.to_f64_lossy(),
            requirement: "finite and >= 0",
        })
    }
}

fn check_range<T: Scalar>(
    name: &'static str,
    x: T,
    ok: bool,
    range: &'static str,
) -> Result<()> {
    if ok && x.is_finite() {
        Ok(())
    } else {
        Err(ModelError::InvalidParameter {
            name,
            value: x.to_f64_lossy(),
            range,
        })
    }
}

/// Shape of the attack amplification function.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum AmplificationFamily<T> {
    /// `h(a) = 1 + alpha ln(1 + a)`.
    Logarithmic,
    /// `h(a) = 1 + alpha a / (1 + saturation a)`, bounded by `1 + alpha / saturation`.
    Saturating { saturation: T },
}

/// Attack amplification `h` with `h(0) = 1`, `h' > 0`, `h'' < 0` and `h'(0) = alpha`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AmplificationSpec<T> {
    family: AmplificationFamily<T>,
    alpha: T,
}

impl<T: Scalar> AmplificationSpec<T> {
    pub fn logarithmic(alpha: T) -> Result<Self> {
        check_range("h.alpha", alpha, alpha > T::zero(), "(0, inf)")?;
        Ok(Self {
            family: AmplificationFamily::Logarithmic,
            alpha,
        })
    }

    pub fn saturating(alpha: T, saturation: T) -> Result<Self> {
        check_range("h.alpha", alpha, alpha > T::zero(), "(0, inf)")?;
        check_range(
            "h.saturation",
            saturation,
            saturation > T::zero(),
            "(0, inf)",
        )?;
        Ok(Self {
            family: AmplificationFamily::Saturating { saturation },
            alpha,
        })
    }

    pub fn family(&self) -> AmplificationFamily<T> {
        self.family
    }

    /// Marginal AI effectiveness for attack, `h'(0)`.
    pub fn alpha(&self) -> T {
        self.alpha
    }

    /// Same family with a different `alpha`.
    pub fn with_alpha(&self, alpha: T) -> Result<Self> {
        match self.family {
            AmplificationFamily::Logarithmic => Self::logarithmic(alpha),
            AmplificationFamily::Saturating { saturation } => Self::saturating(alpha, saturation),
        }
    }

    /// `h(a)`; `a` is assumed nonnegative.
    #[inline]
    pub fn value(&self, a: T) -> T {
        match self.family {
            AmplificationFamily::Logarithmic => T::one() + self.alpha * a.ln_1p(),
            AmplificationFamily::Saturating { saturation } => {
                T::one() + self.alpha * a / (T::one() + saturation * a)
            }
        }
    }

    #[inline]
    pub fn derivative(&self, a: T) -> T {
        match self.family {
            AmplificationFamily::Logarithmic => self.alpha / (T::one() + a),
            AmplificationFamily::Saturating { saturation } => {
                let u = T::one() + saturation * a;
                self.alpha / (u * u)
            }
        }
    }

    #[inline]
    pub fn second_derivative(&self, a: T) -> T {
        match self.family {
            AmplificationFamily::Logarithmic => {
                let u = T::one() + a;
                -self.alpha / (u * u)
            }
            AmplificationFamily::Saturating { saturation } => {
                let u = T::one() + saturation * a;
                -T::lit(2.0) * self.alpha * saturation / (u * u * u)
            }
        }
    }

    /// Both shipped families are strictly concave everywhere.
    pub fn is_strictly_concave(&self) -> bool {
        true
    }
}

/// Shape of the defender effectiveness function.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ErosionFamily<T> {
    /// `delta0 / (1 + beta a)`.
    Hyperbolic,
    /// `delta0 / (1 + beta a)^k`.
    PowerLaw { k: T },
    /// `delta0 exp(-beta a)`.
    Exponential,
}

/// Defender effectiveness `delta` with `delta(0) = delta0`, `delta' < 0`, `delta'' > 0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ErosionSpec<T> {
    family: ErosionFamily<T>,
    delta0: T,
    beta: T,
}

impl<T: Scalar> ErosionSpec<T> {
    fn checked(family: ErosionFamily<T>, delta0: T, beta: T) -> Result<Self> {
        check_range(
            "delta.delta0",
            delta0,
            delta0 > T::zero() && delta0 <= T::one(),
            "(0, 1]",
        )?;
        check_range("delta.beta", beta, beta > T::zero(), "(0, inf)")?;
        Ok(Self {
            family,
            delta0,
            beta,
        })
    }

    pub fn hyperbolic(delta0: T, beta: T) -> Result<Self> {
        Self::checked(ErosionFamily::Hyperbolic, delta0, beta)
    }

    /// Power-law erosion with exponent `k` in `(0, 1]`.
    pub fn power_law(delta0: T, beta: T, k: T) -> Result<Self> {
        check_range(
            "delta.k",
            k,
            k > T::zero() && k <= T::one(),
            "(0, 1] (use power_law_steep for k > 1)",
        )?;
        Self::checked(ErosionFamily::PowerLaw { k }, delta0, beta)
    }

    /// Power-law erosion allowing any `k > 0`. For `k > 1` the non-accelerating
    /// erosion condition fails and interior uniqueness is not guaranteed.
    pub fn power_law_steep(delta0: T, beta: T, k: T) -> Result<Self> {
        check_range("delta.k", k, k > T::zero(), "(0, inf)")?;
        Self::checked(ErosionFamily::PowerLaw { k }, delta0, beta)
    }

    /// Exponential erosion; outside the uniqueness guarantee.
    pub fn exponential(delta0: T, beta: T) -> Result<Self> {
        Self::checked(ErosionFamily::Exponential, delta0, beta)
    }

    pub fn family(&self) -> ErosionFamily<T> {
        self.family
    }

    pub fn delta0(&self) -> T {
        self.delta0
    }

    pub fn beta(&self) -> T {
        self.beta
    }

    pub fn with_beta(&self, beta: T) -> Result<Self> {
        Self::checked(self.family, self.delta0, beta)
    }

    pub fn with_delta0(&self, delta0: T) -> Result<Self> {
        Self::checked(self.family, delta0, self.beta)
    }

    #[inline]
    pub fn value(&self, a: T) -> T {
        match self.family {
            ErosionFamily::Hyperbolic => self.delta0 / (T::one() + self.beta * a),
            ErosionFamily::PowerLaw { k } => self.delta0 / (T::one() + self.beta * a).powf(k),
            ErosionFamily::Exponential => self.delta0 * (-self.beta * a).exp(),
        }
    }

    #[inline]
    pub fn derivative(&self, a: T) -> T {
        let b = self.beta;
        match self.family {
            ErosionFamily::Hyperbolic => {
                let u = T::one() + b * a;
                -self.delta0 * b / (u * u)
            }
            ErosionFamily::PowerLaw { k } => {
                let u = T::one() + b * a;
                -k * b * self.delta0 * u.powf(-k - T::one())
            }
            ErosionFamily::Exponential => -b * self.value(a),
        }
    }

    #[inline]
    pub fn second_derivative(&self, a: T) -> T {
        let b = self.beta;
        match self.family {
            ErosionFamily::Hyperbolic => {
                let u = T::one() + b * a;
                T::lit(2.0) * self.delta0 * b * b / (u * u * u)
            }
            ErosionFamily::PowerLaw { k } => {
                let u = T::one() + b * a;
                k * (k + T::one()) * b * b * self.delta0 * u.powf(-k - T::lit(2.0))
            }
            ErosionFamily::Exponential => b * b * self.value(a),
        }
    }

    /// Family-level check of the non-accelerating erosion rate
    /// `delta delta'' >= 2 delta'^2`: Hyperbolic (with equality), PowerLaw iff
    /// `k <= 1`, never for Exponential.
    pub fn erosion_rate_condition(&self) -> bool {
        match self.family {
            ErosionFamily::Hyperbolic => true,
            ErosionFamily::PowerLaw { k } => k <= T::one(),
            ErosionFamily::Exponential => false,
        }
    }

    /// Whether this family falls under the interior-uniqueness guarantee.
    pub fn uniqueness_guarantee(&self) -> bool {
        self.erosion_rate_condition()
    }
}

/// All structural primitives of the single-surface game.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModelParams<T> {
    q0: T,
    h: AmplificationSpec<T>,
    delta: ErosionSpec<T>,
    s: T,
    v: T,
    b: T,
    c_d: T,
    c_a: T,
    f: T,
}

/// Builder for [`ModelParams`]; `build` validates every field.
#[derive(Debug, Clone, Copy)]
pub struct ModelParamsBuilder<T> {
    pub q0: T,
    pub h: AmplificationSpec<T>,
    pub delta: ErosionSpec<T>,
    pub s: T,
    pub v: T,
    pub b: T,
    pub c_d: T,
    pub c_a: T,
    pub f: T,
}

impl<T: Scalar> Default for ModelParamsBuilder<T> {
    fn default() -> Self {
        Self {
            q0: T::lit(0.3),
            h: AmplificationSpec::logarithmic(T::lit(0.5)).expect("valid default"),
            delta: ErosionSpec::hyperbolic(T::one(), T::one()).expect("valid default"),
            s: T::one(),
            v: T::lit(10.0),
            b: T::lit(10.0),
            c_d: T::one(),
            c_a: T::one(),
            f: T::zero(),
        }
    }
}

impl<T: Scalar> ModelParamsBuilder<T> {
    pub fn q0(mut self, q0: T) -> Self {
        self.q0 = q0;
        self
    }
    pub fn h(mut self, h: AmplificationSpec<T>) -> Self {
        self.h = h;
        self
    }
    pub fn delta(mut self, delta: ErosionSpec<T>) -> Self {
        self.delta = delta;
        self
    }
    pub fn s(mut self, s: T) -> Self {
        self.s = s;
        self
    }
    pub fn v(mut self, v: T) -> Self {
        self.v = v;
        self
    }
    pub fn b(mut self, b: T) -> Self {
        self.b = b;
        self
    }
    pub fn c_d(mut self, c_d: T) -> Self {
        self.c_d = c_d;
        self
    }
    pub fn c_a(mut self, c_a: T) -> Self {
        self.c_a = c_a;
        self
    }
    pub fn f(mut self, f: T) -> Self {
        self.f = f;
        self
    }

    pub fn build(self) -> Result<ModelParams<T>> {
        let zero = T::zero();
        check_range("model.q0", self.q0, self.q0 > zero && self.q0 < T::one(), "(0, 1)")?;
        check_range("model.s", self.s, self.s >= zero, "[0, inf)")?;
        check_range("model.V", self.v, self.v >= zero, "[0, inf)")?;
        check_range("model.B", self.b, self.b >= zero, "[0, inf)")?;
        check_range("model.c_d", self.c_d, self.c_d > zero, "(0, inf)")?;
        check_range("model.c_a", self.c_a, self.c_a > zero, "(0, inf)")?;
        check_range("model.F", self.f, self.f >= zero, "[0, inf)")?;
        Ok(ModelParams {
            q0: self.q0,
            h: self.h,
            delta: self.delta,
            s: self.s,
            v: self.v,
            b: self.b,
            c_d: self.c_d,
            c_a: self.c_a,
            f: self.f,
        })
    }
}

impl<T: Scalar> ModelParams<T> {
    pub fn builder() -> ModelParamsBuilder<T> {
        ModelParamsBuilder::default()
    }

    /// Builder pre-filled with these parameters, for perturbations.
    pub fn to_builder(&self) -> ModelParamsBuilder<T> {
        ModelParamsBuilder {
            q0: self.q0,
            h: self.h,
            delta: self.delta,
            s: self.s,
            v: self.v,
            b: self.b,
            c_d: self.c_d,
            c_a: self.c_a,
            f: self.f,
        }
    }

    pub fn q0(&self) -> T {
        self.q0
    }
    pub fn h(&self) -> &AmplificationSpec<T> {
        &self.h
    }
    pub fn delta(&self) -> &ErosionSpec<T> {
        &self.delta
    }
    /// Signal scale (total signal budget in multi-surface settings).
    pub fn s(&self) -> T {
        self.s
    }
    /// Defender asset value.
    pub fn v(&self) -> T {
        self.v
    }
    /// Attacker benefit from a breach.
    pub fn b(&self) -> T {
        self.b
    }
    pub fn c_d(&self) -> T {
        self.c_d
    }
    pub fn c_a(&self) -> T {
        self.c_a
    }
    /// Fixed cost of AI adoption for the attacker.
    pub fn f(&self) -> T {
        self.f
    }

    /// Upper bound on any defender best response, `V / c_d`.
    pub fn defender_bound(&self) -> T {
        self.v / self.c_d
    }

    /// Upper bound on any attacker best response, `B / c_a`.
    pub fn attacker_bound(&self) -> T {
        self.b / self.c_a
    }

    #[inline]
    pub(crate) fn denominator_raw(&self, a: T, d: T, s_eff: T) -> T {
        self.q0 * self.h.value(a)
            + (T::one() - self.q0) * (T::one() + self.delta.value(a) * d * s_eff)
    }

    /// Breach probability without domain checks; arguments must be nonnegative.
    #[inline]
    pub(crate) fn breach_raw(&self, a: T, d: T, s_eff: T) -> T {
        if a == T::zero() && (d == T::zero() || s_eff == T::zero()) {
            return self.q0;
        }
        let num = self.q0 * self.h.value(a);
        num / (num + (T::one() - self.q0) * (T::one() + self.delta.value(a) * d * s_eff))
    }

    /// `dq/da` without domain checks.
    #[inline]
    pub(crate) fn dq_da_raw(&self, a: T, d: T, s_eff: T) -> T {
        let phi = self.denominator_raw(a, d, s_eff);
        let c = self.q0 * (T::one() - self.q0);
        let ds = d * s_eff;
        c * (self.h.derivative(a) * (T::one() + self.delta.value(a) * ds)
            - self.h.value(a) * self.delta.derivative(a) * ds)
            / (phi * phi)
    }

    /// `-dq/dd` without domain checks.
    #[inline]
    pub(crate) fn neg_dq_dd_raw(&self, a: T, d: T, s_eff: T) -> T {
        let phi = self.denominator_raw(a, d, s_eff);
        self.q0 * (T::one() - self.q0) * self.h.value(a) * self.delta.value(a) * s_eff
            / (phi * phi)
    }

    /// Attacker payoff without the fixed adoption cost, `B q - c_a a`.
    #[inline]
    pub(crate) fn attacker_variable_payoff(&self, a: T, d: T, s_eff: T) -> T {
        self.b * self.breach_raw(a, d, s_eff) - self.c_a * a
    }
}

fn check_inputs<T: Scalar>(a: T, d: T, s_eff: T) -> Result<()> {
    check_nonneg("a", a)?;
    check_nonneg("d", d)?;
    check_nonneg("s_eff", s_eff)
}

fn guarded_denominator<T: Scalar>(p: &ModelParams<T>, a: T, d: T, s_eff: T) -> Result<T> {
    let phi = p.denominator_raw(a, d, s_eff);
    if phi < T::denominator_floor() || !phi.is_finite() {
        return Err(ModelError::Computation(format!(
            "contest denominator {} out of range",
            phi.to_f64_lossy()
        )));
    }
    Ok(phi)
}

/// Evaluates the amplification `h(a)`.
pub fn eval_h<T: Scalar>(h: &AmplificationSpec<T>, a: T) -> Result<T> {
    check_nonneg("a", a)?;
    Ok(h.value(a))
}

/// Evaluates the defender effectiveness `delta(a)`.
pub fn eval_delta<T: Scalar>(delta: &ErosionSpec<T>, a: T) -> Result<T> {
    check_nonneg("a", a)?;
    Ok(delta.value(a))
}

/// Contest denominator `Phi = q0 h(a) + (1 - q0)(1 + delta(a) d s_eff)`.
pub fn contest_denominator<T: Scalar>(p: &ModelParams<T>, a: T, d: T, s_eff: T) -> Result<T> {
    check_inputs(a, d, s_eff)?;
    guarded_denominator(p, a, d, s_eff)
}

/// Breach probability on one surface. Returns `q0` exactly at the status quo.
pub fn breach_probability<T: Scalar>(p: &ModelParams<T>, a: T, d: T, s_eff: T) -> Result<T> {
    check_inputs(a, d, s_eff)?;
    guarded_denominator(p, a, d, s_eff)?;
    Ok(p.breach_raw(a, d, s_eff))
}

/// Fraction of defender effectiveness retained, `D(a) = delta(a) / delta0`.
/// The adversarial discount itself is `1 - D(a)`.
pub fn adversarial_discount<T: Scalar>(delta: &ErosionSpec<T>, a: T) -> Result<T> {
    check_nonneg("a", a)?;
    Ok(delta.value(a) / delta.delta0())
}

/// Adversarial leverage `h(a) / delta(a)`.
pub fn adversarial_leverage<T: Scalar>(p: &ModelParams<T>, a: T) -> Result<T> {
    check_nonneg("a", a)?;
    Ok(p.h.value(a) / p.delta.value(a))
}

/// `U_D = -V q - c_d d`.
pub fn payoff_defender<T: Scalar>(p: &ModelParams<T>, a: T, d: T, s_eff: T) -> Result<T> {
    let q = breach_probability(p, a, d, s_eff)?;
    Ok(-p.v * q - p.c_d * d)
}

/// `U_A = B q - c_a a - F [a > 0]`.
pub fn payoff_attacker<T: Scalar>(p: &ModelParams<T>, a: T, d: T, s_eff: T) -> Result<T> {
    let q = breach_probability(p, a, d, s_eff)?;
    let fixed = if a > T::zero() { p.f } else { T::zero() };
    Ok(p.b * q - p.c_a * a - fixed)
}

/// Attacker's marginal effect on breach probability split by channel.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChannelBreakdown<T> {
    pub amplification_term: T,
    pub erosion_term: T,
    pub total: T,
}

/// `dq/da` decomposed into the amplification and erosion channels.
pub fn attacker_marginal_breakdown<T: Scalar>(
    p: &ModelParams<T>,
    a: T,
    d: T,
    s_eff: T,
) -> Result<ChannelBreakdown<T>> {
    check_inputs(a, d, s_eff)?;
    let phi = guarded_denominator(p, a, d, s_eff)?;
    let scale = p.q0 * (T::one() - p.q0) / (phi * phi);
    let ds = d * s_eff;
    let amplification_term = scale * p.h.derivative(a) * (T::one() + p.delta.value(a) * ds);
    let erosion_term = scale * p.h.value(a) * p.delta.derivative(a).abs() * ds;
    Ok(ChannelBreakdown {
        amplification_term,
        erosion_term,
        total: amplification_term + erosion_term,
    })
}

/// Defender's marginal effect, `-dq/dd = q0 (1 - q0) h delta s / Phi^2`.
pub fn defender_marginal<T: Scalar>(p: &ModelParams<T>, a: T, d: T, s_eff: T) -> Result<T> {
    check_inputs(a, d, s_eff)?;
    guarded_denominator(p, a, d, s_eff)?;
    Ok(p.neg_dq_dd_raw(a, d, s_eff))
}
