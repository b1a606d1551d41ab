//! Arms-race ratio: the attacker's marginal effect on breach probability
//! relative to the defender's, in single- and multi-surface settings.

use crate::contest::{check_nonneg, ModelParams};
use crate::error::{ModelError, Result};
use crate::multisurface::{effective_signal, SurfaceConfig};
use crate::scalar::Scalar;

/// Decomposition of `R(d, a)` at one point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RatioReport<T> {
    /// Status-quo ratio `alpha / (delta0 s_eff)` for the same signal.
    pub r0: T,
    pub r_general: T,
    pub amplification_component: T,
    pub erosion_premium: T,
}

/// `R0 = alpha / (delta0 s)` on a single surface.
pub fn r0_single<T: Scalar>(p: &ModelParams<T>) -> Result<T> {
    status_quo_ratio(p, p.s())
}

fn status_quo_ratio<T: Scalar>(p: &ModelParams<T>, s_eff: T) -> Result<T> {
    if s_eff <= T::zero() {
        return Err(ModelError::Singular("arms-race ratio undefined at zero signal"));
    }
    Ok(p.h().alpha() / (p.delta().delta0() * s_eff))
}

/// General ratio `R(d, a)` split into its amplification component and the
/// erosion premium `|delta'| d / delta`.
pub fn r_general<T: Scalar>(p: &ModelParams<T>, a: T, d: T, s_eff: T) -> Result<RatioReport<T>> {
    check_nonneg("a", a)?;
    check_nonneg("d", d)?;
    check_nonneg("s_eff", s_eff)?;
    let r0 = status_quo_ratio(p, s_eff)?;
    let h = p.h().value(a);
    let dh = p.h().derivative(a);
    let delta = p.delta().value(a);
    let ddelta = p.delta().derivative(a).abs();
    let amplification_component = dh * (T::one() + delta * d * s_eff) / (h * delta * s_eff);
    let erosion_premium = ddelta * d / delta;
    Ok(RatioReport {
        r0,
        r_general: amplification_component + erosion_premium,
        amplification_component,
        erosion_premium,
    })
}

/// Multi-surface status-quo ratio `alpha N^rho / (delta0 s (1 + gamma (N - 1)))`,
/// computed as `alpha / (delta0 s_e)` with `s_e` the effective per-surface signal.
pub fn r0_multi<T: Scalar>(p: &ModelParams<T>, cfg: &SurfaceConfig<T>) -> Result<T> {
    if cfg.s() <= T::zero() {
        return Err(ModelError::Singular("arms-race ratio undefined at zero signal"));
    }
    status_quo_ratio(p, effective_signal(cfg))
}

/// `dR0/dgamma` at `gamma = 0`: `-alpha N^rho (N - 1) / (delta0 s)`.
pub fn dgamma_sensitivity_at_zero<T: Scalar>(p: &ModelParams<T>, cfg: &SurfaceConfig<T>) -> Result<T> {
    if cfg.s() <= T::zero() {
        return Err(ModelError::Singular("arms-race ratio undefined at zero signal"));
    }
    let n = cfg.n();
    if n == T::one() {
        return Ok(T::zero());
    }
    Ok(-p.h().alpha() * n.powf(cfg.rho()) * (n - T::one()) / (p.delta().delta0() * cfg.s()))
}

/// Critical surface count at which `R0` reaches parity.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SurfaceThreshold<T> {
    /// Real root `N*` of `alpha N^rho = delta0 s (1 + gamma (N - 1))`.
    pub n_star: T,
    /// Smallest integer surface count at or beyond the root.
    pub n_integer: u64,
    /// `dN*/dgamma`, omitted when the threshold is degenerate.
    pub dn_dgamma: Option<T>,
    pub degenerate: bool,
    /// More than one sign change was seen on the scan grid.
    pub multiple_roots_possible: bool,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum CriticalSurfaceCount<T> {
    Threshold(SurfaceThreshold<T>),
    NoThreshold,
}

impl<T: Copy> CriticalSurfaceCount<T> {
    pub fn threshold(&self) -> Option<SurfaceThreshold<T>> {
        match self {
            Self::Threshold(t) => Some(*t),
            Self::NoThreshold => None,
        }
    }
}

const SURFACE_BRACKET_HI: f64 = 1e12;
const SURFACE_SCAN_POINTS: usize = 1024;
const SURFACE_BISECTIONS: usize = 200;

/// Smallest `N* >= 1` with `R0(N*) = 1`, using `cfg`'s `rho`, `gamma` and
/// `s` (its `n` is ignored).
pub fn critical_surface_count<T: Scalar>(
    p: &ModelParams<T>,
    cfg: &SurfaceConfig<T>,
) -> Result<CriticalSurfaceCount<T>> {
    let alpha = p.h().alpha();
    let ds = p.delta().delta0() * cfg.s();
    let (rho, gamma) = (cfg.rho(), cfg.gamma());
    let f = |n: T| alpha * n.powf(rho) - ds * (T::one() + gamma * (n - T::one()));

    let log_hi = T::lit(SURFACE_BRACKET_HI).ln();
    let last = SURFACE_SCAN_POINTS - 1;
    let grid: Vec<T> = (0..SURFACE_SCAN_POINTS)
        .map(|i| {
            if i == 0 {
                T::one()
            } else if i == last {
                T::lit(SURFACE_BRACKET_HI)
            } else {
                (log_hi * T::from_count(i) / T::from_count(last)).exp()
            }
        })
        .collect();
    let values: Vec<T> = grid.iter().map(|&n| f(n)).collect();

    let mut brackets = Vec::new();
    for i in 0..last {
        let (fa, fb) = (values[i], values[i + 1]);
        if fa == T::zero() {
            brackets.push((grid[i], grid[i]));
        } else if fa * fb < T::zero() {
            brackets.push((grid[i], grid[i + 1]));
        }
    }
    if values[last] == T::zero() {
        brackets.push((grid[last], grid[last]));
    }
    brackets.dedup();
    let Some(&(mut lo, mut hi)) = brackets.first() else {
        return Ok(CriticalSurfaceCount::NoThreshold);
    };

    if lo != hi {
        let mut f_lo = f(lo);
        for _ in 0..SURFACE_BISECTIONS {
            let mid = lo + (hi - lo) / T::lit(2.0);
            if mid <= lo || mid >= hi {
                break;
            }
            let f_mid = f(mid);
            if f_mid == T::zero() {
                lo = mid;
                hi = mid;
                break;
            }
            if f_mid * f_lo < T::zero() {
                hi = mid;
            } else {
                lo = mid;
                f_lo = f_mid;
            }
        }
    }
    let n_star = if f(lo).abs() <= f(hi).abs() { lo } else { hi };

    let den = alpha * rho * n_star.powf(rho - T::one()) - ds * gamma;
    let degenerate = den.abs() < T::lit(1e-12);
    let dn_dgamma = if degenerate {
        None
    } else {
        Some(ds * (n_star - T::one()) / den)
    };

    let rounded = n_star.round();
    let snapped = if (n_star - rounded).abs() <= T::lit(1e-9) * n_star {
        rounded
    } else {
        n_star.ceil()
    };
    Ok(CriticalSurfaceCount::Threshold(SurfaceThreshold {
        n_star,
        n_integer: snapped.to_u64().unwrap_or(u64::MAX),
        dn_dgamma,
        degenerate,
        multiple_roots_possible: brackets.len() > 1,
    }))
}

/// Which surface parameter a sweep varies.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepAxis {
    N,
    Gamma,
    Rho,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow<T> {
    pub value: T,
    /// Ratio at this grid point, or the reason it is undefined.
    pub r0: Result<T>,
}

/// `R0` along one axis of the surface configuration, in grid order.
pub fn sweep_r0<T: Scalar>(
    p: &ModelParams<T>,
    cfg: &SurfaceConfig<T>,
    axis: SweepAxis,
    grid: &[T],
) -> Vec<SweepRow<T>> {
    grid.iter()
        .map(|&value| {
            let point = match axis {
                SweepAxis::N => cfg.with_n(value),
                SweepAxis::Gamma => cfg.with_gamma(value),
                SweepAxis::Rho => cfg.with_rho(value),
            };
            SweepRow {
                value,
                r0: point.and_then(|c| r0_multi(p, &c)),
            }
        })
        .collect()
}
