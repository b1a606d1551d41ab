//! Attacker target selection across heterogeneous defenders.

use crate::contest::ModelParams;
use crate::error::{ModelError, Result};
use crate::multisurface::{multi_surface_state, SurfaceConfig};
use crate::optimize::maximize_bounded;
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DefenderProfile<T> {
    pub d_k: T,
    pub s_k: T,
    pub gamma_k: T,
    pub n_k: u32,
    pub b_k: T,
    pub v_k: T,
}

impl<T: Scalar> DefenderProfile<T> {
    pub fn new(d_k: T, s_k: T, gamma_k: T, n_k: u32, b_k: T, v_k: T) -> Result<Self> {
        let bad = |name, value: T, range| ModelError::InvalidParameter {
            name,
            value: value.to_f64_lossy(),
            range,
        };
        if !(d_k >= T::zero() && d_k.is_finite()) {
            return Err(bad("targeting.d", d_k, "[0, inf)"));
        }
        if !(s_k >= T::zero() && s_k.is_finite()) {
            return Err(bad("targeting.s", s_k, "[0, inf)"));
        }
        if !(gamma_k >= T::zero() && gamma_k <= T::one()) {
            return Err(bad("targeting.gamma", gamma_k, "[0, 1]"));
        }
        if n_k < 1 {
            return Err(bad("targeting.N", T::zero(), "{1, 2, ...}"));
        }
        if !(b_k > T::zero() && b_k.is_finite()) {
            return Err(bad("targeting.B", b_k, "(0, inf)"));
        }
        if !(v_k > T::zero() && v_k.is_finite()) {
            return Err(bad("targeting.V", v_k, "(0, inf)"));
        }
        Ok(Self {
            d_k,
            s_k,
            gamma_k,
            n_k,
            b_k,
            v_k,
        })
    }

    fn surfaces(&self, rho: T) -> Result<SurfaceConfig<T>> {
        SurfaceConfig::new(T::from_count(self.n_k as usize), rho, self.gamma_k, self.s_k)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TargetingMode<T> {
    /// Same attacker investment against every defender; rank by `B_k q_k`.
    FixedA(T),
    /// Attacker optimizes `B_k P_k - c_a a` per defender; rank by net payoff.
    BestResponsePerTarget,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TargetRow<T> {
    pub a_k: T,
    pub q_k: T,
    pub expected_value: T,
    pub net_payoff: T,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TargetSelection<T> {
    pub index: usize,
    pub rows: Vec<TargetRow<T>>,
}

fn overall_breach_for<T: Scalar>(p: &ModelParams<T>, cfg: &SurfaceConfig<T>, a: T, d: T) -> Result<T> {
    Ok(multi_surface_state(p, cfg, a, d)?.p_overall)
}

fn target_row<T: Scalar>(
    p: &ModelParams<T>,
    rho: T,
    prof: &DefenderProfile<T>,
    mode: TargetingMode<T>,
) -> Result<TargetRow<T>> {
    let cfg = prof.surfaces(rho)?;
    let a_k = match mode {
        TargetingMode::FixedA(a) => a,
        TargetingMode::BestResponsePerTarget => {
            let objective = |a: T| {
                overall_breach_for(p, &cfg, a, prof.d_k)
                    .map(|q| prof.b_k * q - p.c_a() * a)
                    .unwrap_or(T::neg_infinity())
            };
            maximize_bounded(objective, None::<fn(T) -> T>, T::zero(), prof.b_k / p.c_a()).x
        }
    };
    let q_k = overall_breach_for(p, &cfg, a_k, prof.d_k)?;
    let expected_value = prof.b_k * q_k;
    Ok(TargetRow {
        a_k,
        q_k,
        expected_value,
        net_payoff: expected_value - p.c_a() * a_k - p.f(),
    })
}

/// Picks the defender with the highest expected value (fixed investment) or
/// the highest net payoff (per-target best response). Ties go to the lowest
/// index. `p` supplies the contest form and the attacker's costs; `rho` is the
/// common signal dilution exponent.
pub fn select_target<T: Scalar>(
    p: &ModelParams<T>,
    rho: T,
    profiles: &[DefenderProfile<T>],
    mode: TargetingMode<T>,
) -> Result<TargetSelection<T>> {
    if profiles.is_empty() {
        return Err(ModelError::Computation("no defender profiles to choose from".into()));
    }
    if let TargetingMode::FixedA(a) = mode {
        if !(a >= T::zero() && a.is_finite()) {
            return Err(ModelError::InvalidParameter {
                name: "targeting.a",
                value: a.to_f64_lossy(),
                range: "[0, inf)",
            });
        }
    }
    let rows = profiles
        .iter()
        .map(|prof| target_row(p, rho, prof, mode))
        .collect::<Result<Vec<_>>>()?;
    let score = |r: &TargetRow<T>| match mode {
        TargetingMode::FixedA(_) => r.expected_value,
        TargetingMode::BestResponsePerTarget => r.net_payoff,
    };
    let mut index = 0;
    for (k, row) in rows.iter().enumerate().skip(1) {
        if score(row) > score(&rows[index]) {
            index = k;
        }
    }
    Ok(TargetSelection { index, rows })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TargetingChange {
    Gained,
    Lost,
    Unchanged,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RedirectionRow<T> {
    pub defender: usize,
    pub change: TargetingChange,
    pub expected_value_before: T,
    pub expected_value_after: T,
}

/// Effect of raising defender `k`'s investment by `d_step` on which defender
/// is targeted. Empty for a single defender.
pub fn redirection_effect<T: Scalar>(
    p: &ModelParams<T>,
    rho: T,
    profiles: &[DefenderProfile<T>],
    mode: TargetingMode<T>,
    k: usize,
    d_step: T,
) -> Result<Vec<RedirectionRow<T>>> {
    if k >= profiles.len() {
        return Err(ModelError::InvalidParameter {
            name: "targeting.k",
            value: k as f64,
            range: "[0, number of profiles)",
        });
    }
    if profiles.len() < 2 {
        return Ok(Vec::new());
    }
    let before = select_target(p, rho, profiles, mode)?;
    let mut raised = profiles.to_vec();
    raised[k] = DefenderProfile::new(
        raised[k].d_k + d_step,
        raised[k].s_k,
        raised[k].gamma_k,
        raised[k].n_k,
        raised[k].b_k,
        raised[k].v_k,
    )?;
    let after = select_target(p, rho, &raised, mode)?;
    Ok((0..profiles.len())
        .map(|j| RedirectionRow {
            defender: j,
            change: match (before.index == j, after.index == j) {
                (false, true) => TargetingChange::Gained,
                (true, false) => TargetingChange::Lost,
                _ => TargetingChange::Unchanged,
            },
            expected_value_before: before.rows[j].expected_value,
            expected_value_after: after.rows[j].expected_value,
        })
        .collect())
}
