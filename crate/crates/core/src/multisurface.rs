//! Symmetric multi-surface defense: signal dilution, cross-correlation and the
//! log-breach rate aggregate.

use crate::contest::{breach_probability, check_nonneg, ModelParams};
use crate::error::{ModelError, Result};
use crate::ratio::r0_multi;
use crate::scalar::Scalar;

/// Multi-surface structure: `n` symmetric surfaces sharing a signal budget `s`.
///
/// `n` is a real `>= 1` so that log-spaced experiment grids work; integer
/// surface counts are the usual case.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SurfaceConfig<T> {
    n: T,
    rho: T,
    gamma: T,
    s: T,
}

impl<T: Scalar> SurfaceConfig<T> {
    pub fn new(n: T, rho: T, gamma: T, s: T) -> Result<Self> {
        let bad = |name, value: T, range| ModelError::InvalidParameter {
            name,
            value: value.to_f64_lossy(),
            range,
        };
        if !(n >= T::one() && n.is_finite()) {
            return Err(bad("surfaces.N", n, "[1, inf)"));
        }
        if !(rho >= T::zero() && rho <= T::one()) {
            return Err(bad("surfaces.rho", rho, "[0, 1]"));
        }
        if !(gamma >= T::zero() && gamma <= T::one()) {
            return Err(bad("surfaces.gamma", gamma, "[0, 1]"));
        }
        if !(s >= T::zero() && s.is_finite()) {
            return Err(bad("surfaces.s", s, "[0, inf)"));
        }
        Ok(Self { n, rho, gamma, s })
    }

    pub fn n(&self) -> T {
        self.n
    }
    pub fn rho(&self) -> T {
        self.rho
    }
    pub fn gamma(&self) -> T {
        self.gamma
    }
    pub fn s(&self) -> T {
        self.s
    }

    pub fn with_n(&self, n: T) -> Result<Self> {
        Self::new(n, self.rho, self.gamma, self.s)
    }
    pub fn with_rho(&self, rho: T) -> Result<Self> {
        Self::new(self.n, rho, self.gamma, self.s)
    }
    pub fn with_gamma(&self, gamma: T) -> Result<Self> {
        Self::new(self.n, self.rho, gamma, self.s)
    }
    pub fn with_s(&self, s: T) -> Result<Self> {
        Self::new(self.n, self.rho, self.gamma, s)
    }
}

/// Effective per-surface signal `(s / N^rho) (1 + gamma (N - 1))`.
///
/// At `gamma = 1` this is `s N^(1 - rho)` exactly.
pub fn effective_signal<T: Scalar>(cfg: &SurfaceConfig<T>) -> T {
    let n = cfg.n;
    if cfg.gamma == T::one() {
        return cfg.s * n.powf(T::one() - cfg.rho);
    }
    let pooled = T::one() + cfg.gamma * (n - T::one());
    cfg.s * (pooled / n.powf(cfg.rho))
}

/// Log-breach rate `lambda = -N ln(1 - q)` for `N` symmetric surfaces.
pub fn log_breach_rate<T: Scalar>(q: T, n: T) -> T {
    -n * (-q).ln_1p()
}

/// Overall breach probability `P = 1 - exp(-lambda)`.
pub fn overall_breach<T: Scalar>(lambda: T) -> T {
    -(-lambda).exp_m1()
}

/// Per-surface and aggregate breach quantities.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MultiSurfaceState<T> {
    pub cfg: SurfaceConfig<T>,
    pub s_eff: T,
    pub q_per_surface: T,
    pub lambda: T,
    pub p_overall: T,
}

/// Breach state when a single attacker investment `a` hits every surface and
/// the defender invests `d` on each.
pub fn multi_surface_state<T: Scalar>(
    p: &ModelParams<T>,
    cfg: &SurfaceConfig<T>,
    a: T,
    d: T,
) -> Result<MultiSurfaceState<T>> {
    let s_eff = effective_signal(cfg);
    let q = breach_probability(p, a, d, s_eff)?;
    let lambda = log_breach_rate(q, cfg.n);
    Ok(MultiSurfaceState {
        cfg: *cfg,
        s_eff,
        q_per_surface: q,
        lambda,
        p_overall: overall_breach(lambda),
    })
}

/// Per-surface breach with no effective defense, `q0 h / (q0 h + 1 - q0)`.
pub fn asymptotic_breach<T: Scalar>(p: &ModelParams<T>, a: T) -> Result<T> {
    check_nonneg("a", a)?;
    let num = p.q0() * p.h().value(a);
    Ok(num / (num + (T::one() - p.q0())))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScalingRow<T> {
    pub n: T,
    pub s_eff: T,
    pub q: T,
    pub lambda: T,
    pub p_overall: T,
    pub r0: T,
}

/// Breach and ratio quantities along a grid of surface counts. The template's
/// own `n` is ignored.
pub fn scaling_experiment<T: Scalar>(
    p: &ModelParams<T>,
    template: &SurfaceConfig<T>,
    n_grid: &[T],
    a: T,
    d: T,
) -> Result<Vec<ScalingRow<T>>> {
    if n_grid.windows(2).any(|w| !(w[0] < w[1])) {
        return Err(ModelError::Computation(
            "scaling grid must be strictly ascending".into(),
        ));
    }
    n_grid
        .iter()
        .map(|&n| {
            let cfg = template.with_n(n)?;
            let st = multi_surface_state(p, &cfg, a, d)?;
            Ok(ScalingRow {
                n,
                s_eff: st.s_eff,
                q: st.q_per_surface,
                lambda: st.lambda,
                p_overall: st.p_overall,
                r0: r0_multi(p, &cfg)?,
            })
        })
        .collect()
}
