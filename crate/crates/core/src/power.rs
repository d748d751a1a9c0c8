//! Minimum transmit power for a target secrecy rate R0.

use std::f64::consts::LN_2;

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::channel::ChannelModel;
use crate::error::{domain, Result};
use crate::geometry::{ArrayGeometry, NodeGeometry};
use crate::linalg::{self, OracleMethod, SpanBasis};
use crate::secrecy::RHO_SNAP;
use crate::stats::LinkStats;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PowerStatus {
    Achievable(f64),
    /// No finite power reaches the target rate.
    Unachievable,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PowerOutcome {
    pub status: PowerStatus,
    pub xi: f64,
    pub chi: f64,
    /// Unit-norm optimal direction, from the eigen oracle only.
    pub direction: Option<Vec<Complex64>>,
}

impl PowerOutcome {
    pub fn watts(&self) -> Option<f64> {
        match self.status {
            PowerStatus::Achievable(p) => Some(p),
            PowerStatus::Unachievable => None,
        }
    }
}

fn check_rate(r0: f64) -> Result<()> {
    if !(r0 > 0.0 && r0.is_finite()) {
        return domain(format!("target rate must be positive, got {r0}"));
    }
    Ok(())
}

/// Closed-form minimum power from link statistics.
pub fn min_power_closed(
    stats: &LinkStats,
    noise_bob: f64,
    noise_eve: f64,
    r0: f64,
) -> Result<PowerOutcome> {
    check_rate(r0)?;
    if !(noise_bob > 0.0 && noise_eve > 0.0) {
        return domain("noise powers must be positive");
    }
    let k = r0.exp2();
    let excess = (r0 * LN_2).exp_m1();
    let sb = stats.gain_bob / noise_bob;
    let se = stats.gain_eve / noise_eve;
    let omr = if 1.0 - stats.rho < RHO_SNAP {
        0.0
    } else {
        1.0 - stats.rho
    };
    let xi = sb - k * se;
    let chi = 4.0 * k * sb * se * omr;
    let status = if omr == 0.0 && xi <= 0.0 {
        PowerStatus::Unachievable
    } else {
        let root = xi.hypot(chi.sqrt());
        PowerStatus::Achievable(if xi >= 0.0 {
            2.0 * excess / (xi + root)
        } else {
            2.0 * excess * (root - xi) / chi
        })
    };
    Ok(PowerOutcome {
        status,
        xi,
        chi,
        direction: None,
    })
}

/// Minimum power from the principal eigenvalue of Θ = σ_b⁻²h_bh_bᴴ − 2^{R0}σ_e⁻²h_eh_eᴴ.
pub fn min_power_eigen_oracle(
    h_b: &[Complex64],
    h_e: &[Complex64],
    noise_bob: f64,
    noise_eve: f64,
    r0: f64,
    method: OracleMethod,
) -> Result<PowerOutcome> {
    check_rate(r0)?;
    let k = r0.exp2();
    let (cb, ce) = (1.0 / noise_bob, k / noise_eve);
    let basis = SpanBasis::new(h_b, h_e)?;
    let (nb2, ne2) = (basis.x * basis.x, basis.a.norm_sqr() + basis.b * basis.b);
    let xi = cb * nb2 - ce * ne2;
    let chi = 4.0 * cb * ce * nb2 * basis.b * basis.b;

    let (mu, v, scale) = match method {
        OracleMethod::SpanReduction => {
            let (a2, b2) = (basis.a.norm_sqr(), basis.b * basis.b);
            let t11 = cb * nb2 - ce * a2;
            let t22 = -ce * b2;
            let t12 = -basis.a * (ce * basis.b);
            let det = -cb * ce * nb2 * b2;
            let mu = linalg::top_root(1.0, t11 + t22, det);
            let c = |x: f64| Complex64::new(x, 0.0);
            let v = linalg::null_vector(c(t11 - mu), t12, t12.conj(), c(t22 - mu));
            (mu, basis.lift(v), t11.abs().max(t22.abs()).max(t12.norm()))
        }
        OracleMethod::DenseEigen | OracleMethod::PowerIteration => {
            let theta = linalg::dense_rank_sum(&[(cb, h_b), (-ce, h_e)]);
            let scale = linalg::norm_one(&theta);
            let (mu, v) = if method == OracleMethod::PowerIteration {
                linalg::power_top(&theta, scale + 1.0)?
            } else {
                linalg::dense_top(theta)
            };
            let n = v.norm();
            (mu, v.iter().map(|z| z / n).collect(), scale)
        }
    };
    let status = if mu <= RHO_SNAP * scale {
        PowerStatus::Unachievable
    } else {
        PowerStatus::Achievable((r0 * LN_2).exp_m1() / mu)
    };
    let direction = matches!(status, PowerStatus::Achievable(_)).then_some(v);
    Ok(PowerOutcome {
        status,
        xi,
        chi,
        direction,
    })
}

/// Dense Θ, exposed for diagnostics.
pub fn theta_matrix(
    h_b: &[Complex64],
    h_e: &[Complex64],
    noise_bob: f64,
    noise_eve: f64,
    r0: f64,
) -> DMatrix<Complex64> {
    linalg::dense_rank_sum(&[(1.0 / noise_bob, h_b), (-r0.exp2() / noise_eve, h_e)])
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PowerLimit {
    /// Required power vanishes as the array grows.
    Zero,
    /// Target unreachable at any array size.
    Infinite,
    /// Required power saturates at this many watts.
    Floor(f64),
}

/// Large-array limit of the minimum power, equal noise σ² on both links.
pub fn power_limit(
    model: ChannelModel,
    arr: &ArrayGeometry,
    nb: &NodeGeometry,
    ne: &NodeGeometry,
    noise: f64,
    r0: f64,
) -> PowerLimit {
    match model {
        ChannelModel::Upw
            if nb.same_direction(ne, 1e-12) && ne.range() <= (r0 / 2.0).exp2() * nb.range() =>
        {
            PowerLimit::Infinite
        }
        ChannelModel::Upw | ChannelModel::Usw => PowerLimit::Zero,
        ChannelModel::Nusw => {
            let d = arr.spacing();
            PowerLimit::Floor(2.0 * (r0 * LN_2).exp_m1() * d * d * noise / arr.element_area())
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::build_channel;
    use crate::secrecy::{achieved_rate, secrecy_capacity_closed, LinkBudget};
    use crate::stats::{rho_direct, Provenance};
    use approx::assert_relative_eq;
    use std::f64::consts::PI;

    fn stats(gb: f64, ge: f64, rho: f64) -> LinkStats {
        LinkStats::new(gb, ge, rho, ChannelModel::Nusw, Provenance::Direct).unwrap()
    }

    #[test]
    fn weak_eve_reduces_to_single_link() {
        let out = min_power_closed(&stats(0.4, 1e-300, 0.3), 0.1, 0.1, 1.5).unwrap();
        assert_relative_eq!(
            out.watts().unwrap(),
            (1.5f64.exp2() - 1.0) * 0.1 / 0.4,
            max_relative = 1e-12
        );
    }

    #[test]
    fn unachievable_iff_parallel_and_eve_dominates() {
        assert_eq!(
            min_power_closed(&stats(0.4, 0.3, 1.0), 1.0, 1.0, 1.0)
                .unwrap()
                .status,
            PowerStatus::Unachievable
        );
        assert!(min_power_closed(&stats(0.4, 0.1, 1.0), 1.0, 1.0, 1.0)
            .unwrap()
            .watts()
            .is_some());
        assert!(min_power_closed(&stats(0.4, 0.3, 0.999), 1.0, 1.0, 1.0)
            .unwrap()
            .watts()
            .is_some());
        assert!(min_power_closed(&stats(0.4, 0.3, 0.5), 1.0, 1.0, 0.0).is_err());
    }

    #[test]
    fn closed_loop_with_capacity() {
        for &(gb, ge, rho, r0) in &[
            (0.4, 0.9, 0.3, 1.0),
            (1.0, 0.1, 0.99, 3.0),
            (2e-3, 5e-3, 0.02, 0.5),
        ] {
            let s = stats(gb, ge, rho);
            let p = min_power_closed(&s, 0.1, 0.2, r0).unwrap().watts().unwrap();
            let at = |x: f64| {
                secrecy_capacity_closed(&s, &LinkBudget::new(x, 0.1, 0.2).unwrap()).capacity
            };
            assert!((at(p) - r0).abs() < 1e-9);
            assert!(at(0.99 * p) < r0);
        }
    }

    #[test]
    fn increasing_in_rate_and_rho() {
        let mut prev = 0.0;
        for i in 1..40 {
            let p = min_power_closed(&stats(0.5, 0.6, 0.4), 1.0, 1.0, i as f64 * 0.1)
                .unwrap()
                .watts()
                .unwrap();
            assert!(p > prev);
            prev = p;
        }
        prev = 0.0;
        for i in 0..40 {
            let p = min_power_closed(&stats(0.5, 0.6, i as f64 / 40.0), 1.0, 1.0, 1.0)
                .unwrap()
                .watts()
                .unwrap();
            assert!(p > prev);
            prev = p;
        }
    }

    #[test]
    fn oracles_agree() {
        let arr = ArrayGeometry::half_wavelength(5, 5, 0.125).unwrap();
        let nb = NodeGeometry::new(2.0, PI / 3.0, 2.0 * PI / 3.0).unwrap();
        let ne = NodeGeometry::new(4.0, 1.3, 1.7).unwrap();
        let hb = build_channel(ChannelModel::Usw, &arr, &nb).unwrap();
        let he = build_channel(ChannelModel::Usw, &arr, &ne).unwrap();
        let s = rho_direct(&hb, &he).unwrap();
        let closed = min_power_closed(&s, 1e-3, 2e-3, 2.0)
            .unwrap()
            .watts()
            .unwrap();
        for m in [
            OracleMethod::SpanReduction,
            OracleMethod::DenseEigen,
            OracleMethod::PowerIteration,
        ] {
            let o = min_power_eigen_oracle(hb.entries(), he.entries(), 1e-3, 2e-3, 2.0, m).unwrap();
            let p = o.watts().unwrap();
            assert_relative_eq!(p, closed, max_relative = 1e-9);
            let w: Vec<_> = o.direction.unwrap().iter().map(|z| z * p.sqrt()).collect();
            let bud = LinkBudget::new(p, 1e-3, 2e-3).unwrap();
            assert_relative_eq!(
                achieved_rate(hb.entries(), he.entries(), &w, &bud),
                2.0,
                max_relative = 1e-9
            );
        }
        let o = min_power_eigen_oracle(
            hb.entries(),
            hb.entries(),
            1.0,
            1.0,
            1.0,
            OracleMethod::DenseEigen,
        )
        .unwrap();
        assert_eq!(o.status, PowerStatus::Unachievable);
    }

    #[test]
    fn limits() {
        let arr = ArrayGeometry::baseline();
        let nb = NodeGeometry::new(10.0, PI / 3.0, 2.0 * PI / 3.0).unwrap();
        let ne = nb.with_range(20.0).unwrap();
        assert_eq!(
            power_limit(ChannelModel::Upw, &arr, &nb, &ne, 0.1, 2.0),
            PowerLimit::Infinite
        );
        assert_eq!(
            power_limit(ChannelModel::Upw, &arr, &nb, &ne, 0.1, 1.0),
            PowerLimit::Zero
        );
        assert_eq!(
            power_limit(ChannelModel::Usw, &arr, &nb, &ne, 0.1, 5.0),
            PowerLimit::Zero
        );
        match power_limit(ChannelModel::Nusw, &arr, &nb, &ne, 0.1, 1.0) {
            PowerLimit::Floor(p) => assert_relative_eq!(p, 0.2 * PI, max_relative = 1e-12),
            other => panic!("{other:?}"),
        }
    }
}
