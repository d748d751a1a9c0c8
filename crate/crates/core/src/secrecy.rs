//! Secrecy capacity of the MISO wiretap link.
//!
//! The closed form works from (G_b, G_e, ρ) alone. The eigen oracle works from
//! the channel vectors and solves max_w (1 + |h_bᴴw|²/σ_b²)/(1 + |h_eᴴw|²/σ_e²)
//! directly, either in the two-dimensional span of the channels or densely.

use std::f64::consts::LN_2;

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::channel::ChannelModel;
use crate::error::{domain, Error, Result};
use crate::geometry::{ArrayGeometry, NodeGeometry};
use crate::linalg::{self, OracleMethod, SpanBasis};
use crate::stats::LinkStats;

/// 1 − ρ below this is treated as exactly zero.
pub const RHO_SNAP: f64 = 1e-12;

/// Transmit power and the two receiver noise powers, all in watts.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinkBudget {
    power: f64,
    noise_bob: f64,
    noise_eve: f64,
}

impl LinkBudget {
    pub fn new(power: f64, noise_bob: f64, noise_eve: f64) -> Result<Self> {
        for (name, v) in [
            ("power", power),
            ("noise_bob", noise_bob),
            ("noise_eve", noise_eve),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                return domain(format!("{name} must be positive and finite, got {v}"));
            }
        }
        Ok(Self {
            power,
            noise_bob,
            noise_eve,
        })
    }

    pub fn with_power(&self, power: f64) -> Result<Self> {
        Self::new(power, self.noise_bob, self.noise_eve)
    }

    pub fn power(&self) -> f64 {
        self.power
    }
    pub fn noise_bob(&self) -> f64 {
        self.noise_bob
    }
    pub fn noise_eve(&self) -> f64 {
        self.noise_eve
    }
    /// Transmit SNR towards Bob, P/σ_b².
    pub fn gamma_b(&self) -> f64 {
        self.power / self.noise_bob
    }
    /// Transmit SNR towards Eve, P/σ_e².
    pub fn gamma_e(&self) -> f64 {
        self.power / self.noise_eve
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SolveMethod {
    ClosedForm,
    EigenOracle(OracleMethod),
}

#[derive(Debug, Clone, PartialEq)]
pub struct SecrecyOutcome {
    /// Bits per channel use, never negative.
    pub capacity: f64,
    pub alpha: f64,
    pub beta: f64,
    /// Capacity-achieving beamformer with ‖w‖² = P, when the solver produces one.
    pub beamformer: Option<Vec<Complex64>>,
    pub method: SolveMethod,
}

fn one_minus_rho(rho: f64) -> f64 {
    let v = 1.0 - rho;
    if v < RHO_SNAP {
        0.0
    } else {
        v
    }
}

/// Closed-form capacity from link statistics.
pub fn secrecy_capacity_closed(stats: &LinkStats, budget: &LinkBudget) -> SecrecyOutcome {
    let gb = budget.gamma_b() * stats.gain_bob;
    let ge = budget.gamma_e() * stats.gain_eve;
    let cross = gb * ge * one_minus_rho(stats.rho);
    let alpha = gb - ge + cross;
    let beta = (1.0 + ge) * cross;
    let root = alpha.hypot(2.0 * beta.sqrt());
    let num = if alpha >= 0.0 {
        alpha + root
    } else {
        4.0 * beta / (root - alpha)
    };
    let capacity = if num > 0.0 {
        (num / (2.0 * (1.0 + ge))).ln_1p() / LN_2
    } else {
        0.0
    };
    SecrecyOutcome {
        capacity,
        alpha,
        beta,
        beamformer: None,
        method: SolveMethod::ClosedForm,
    }
}

/// Capacity from explicit channel vectors by solving the generalized eigenproblem.
pub fn capacity_eigen_oracle(
    h_b: &[Complex64],
    h_e: &[Complex64],
    budget: &LinkBudget,
    method: OracleMethod,
) -> Result<SecrecyOutcome> {
    let (gb, ge) = (budget.gamma_b(), budget.gamma_e());
    let basis = SpanBasis::new(h_b, h_e)?;
    // intermediates reported for comparison with the closed form
    let (nb2, ne2) = (basis.x * basis.x, basis.a.norm_sqr() + basis.b * basis.b);
    let cross = gb * ge * nb2 * basis.b * basis.b;
    let alpha = gb * nb2 - ge * ne2 + cross;
    let beta = (1.0 + ge * ne2) * cross;

    let (nu, w) = match method {
        OracleMethod::SpanReduction => span_capacity(&basis, gb, ge),
        OracleMethod::DenseEigen | OracleMethod::PowerIteration => {
            dense_capacity(h_b, h_e, gb, ge, method)?
        }
    };
    let nu = nu.max(0.0);
    let capacity = nu.ln_1p() / LN_2;
    let beamformer = w.filter(|_| nu > 0.0).map(|w| {
        let s = budget.power().sqrt();
        w.into_iter().map(|z| z * s).collect()
    });
    Ok(SecrecyOutcome {
        capacity,
        alpha,
        beta,
        beamformer,
        method: SolveMethod::EigenOracle(method),
    })
}

/// Largest ν with det(D − νQ_e) = 0 in span coordinates, D = Q_b − Q_e.
fn span_capacity(s: &SpanBasis, gb: f64, ge: f64) -> (f64, Option<Vec<Complex64>>) {
    let (a2, b2) = (s.a.norm_sqr(), s.b * s.b);
    let q11 = 1.0 + ge * a2;
    let q22 = 1.0 + ge * b2;
    let q12 = s.a * (ge * s.b);
    let d11 = gb * s.x * s.x - ge * a2;
    let d22 = -ge * b2;
    let d12 = -q12;
    let det_q = 1.0 + ge * (a2 + b2);
    let t = d11 * q22 + d22 * q11 + 2.0 * ge * ge * a2 * b2;
    let det_d = -gb * ge * s.x * s.x * b2;
    let nu = linalg::top_root(det_q, t, det_d);
    let c = |v: f64| Complex64::new(v, 0.0);
    let v = linalg::null_vector(
        c(d11 - nu * q11),
        d12 - q12 * nu,
        (d12 - q12 * nu).conj(),
        c(d22 - nu * q22),
    );
    (nu, Some(s.lift(v)))
}

fn dense_capacity(
    h_b: &[Complex64],
    h_e: &[Complex64],
    gb: f64,
    ge: f64,
    method: OracleMethod,
) -> Result<(f64, Option<Vec<Complex64>>)> {
    let m = h_b.len();
    let mut qe = linalg::dense_rank_sum(&[(ge, h_e)]);
    qe += DMatrix::<Complex64>::identity(m, m);
    let root = linalg::dense_inv_sqrt(qe)?;
    let d = linalg::dense_rank_sum(&[(gb, h_b), (-ge, h_e)]);
    let b = &root * d * &root;
    let scale = linalg::norm_one(&b);
    let (nu, v) = if method == OracleMethod::PowerIteration {
        linalg::power_top(&b, scale)?
    } else {
        linalg::dense_top(b)
    };
    // eigenvalues at rounding level of ‖B‖ are zeros of the exact operator
    let nu = if nu <= RHO_SNAP * scale { 0.0 } else { nu };
    let w = root * v;
    let n = w.norm();
    Ok((nu, Some(w.iter().map(|z| z / n).collect())))
}

/// Rate log₂((1 + |h_bᴴw|²/σ_b²)/(1 + |h_eᴴw|²/σ_e²)) of a given beamformer; may be negative.
pub fn achieved_rate(
    h_b: &[Complex64],
    h_e: &[Complex64],
    w: &[Complex64],
    budget: &LinkBudget,
) -> f64 {
    let sb = linalg::dot(h_b, w).norm_sqr() / budget.noise_bob();
    let se = linalg::dot(h_e, w).norm_sqr() / budget.noise_eve();
    (sb.ln_1p() - se.ln_1p()) / LN_2
}

/// Maximal-ratio transmission √P·h_b/‖h_b‖.
pub fn mrt_beamformer(h_b: &[Complex64], power: f64) -> Result<Vec<Complex64>> {
    let n = linalg::norm(h_b);
    if n == 0.0 {
        return domain("MRT needs a nonzero channel");
    }
    let s = power.sqrt() / n;
    Ok(h_b.iter().map(|z| z * s).collect())
}

/// Projection of h_b onto the orthogonal complement of h_e, scaled to power P.
pub fn asymptotic_beamformer(
    h_b: &[Complex64],
    h_e: &[Complex64],
    power: f64,
) -> Result<Vec<Complex64>> {
    let basis = SpanBasis::new(h_b, h_e)?;
    let ne2 = basis.a.norm_sqr() + basis.b * basis.b;
    if basis.b * basis.b <= RHO_SNAP * ne2 {
        return Err(Error::Degenerate(
            "channels are parallel; no direction is orthogonal to Eve".into(),
        ));
    }
    let mut w = h_b.to_vec();
    // two passes keep |h_eᴴw| at rounding level
    for _ in 0..2 {
        let k = linalg::dot(h_e, &w) / ne2;
        w.iter_mut().zip(h_e).for_each(|(p, e)| *p -= k * e);
    }
    let s = power.sqrt() / linalg::norm(&w);
    Ok(w.into_iter().map(|z| z * s).collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Regime {
    LargeM,
    HighSnr,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Asymptote {
    Bits(f64),
    /// Grows without bound (logarithmically in M or in γ̄).
    Unbounded,
}

impl Asymptote {
    pub fn bits(self) -> Option<f64> {
        match self {
            Asymptote::Bits(b) => Some(b),
            Asymptote::Unbounded => None,
        }
    }
}

/// Limiting capacity for a common transmit SNR `gamma` = P/σ² on both links.
pub fn asymptotic_capacity(
    regime: Regime,
    arr: &ArrayGeometry,
    nb: &NodeGeometry,
    ne: &NodeGeometry,
    stats: &LinkStats,
    gamma: f64,
) -> Asymptote {
    let far_plateau = || Asymptote::Bits((2.0 * (ne.range() / nb.range()).log2()).max(0.0));
    let co_directional = nb.same_direction(ne, 1e-12);
    match (stats.model, regime) {
        (ChannelModel::Upw, _) if co_directional => far_plateau(),
        (ChannelModel::Upw | ChannelModel::Usw, Regime::LargeM) => Asymptote::Unbounded,
        (ChannelModel::Nusw, Regime::LargeM) => {
            let d = arr.spacing();
            Asymptote::Bits((gamma * arr.element_area() / (2.0 * d * d)).ln_1p() / LN_2)
        }
        (_, Regime::HighSnr) => {
            let omr = one_minus_rho(stats.rho);
            if omr > 0.0 {
                Asymptote::Bits((gamma * stats.gain_bob * omr).log2())
            } else {
                Asymptote::Bits((stats.gain_bob / stats.gain_eve).log2().max(0.0))
            }
        }
    }
}
