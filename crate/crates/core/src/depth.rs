//! Depth of insecurity: the range interval around Bob, along his own
//! direction, in which an eavesdropper keeps 1 − ρ ≤ Γ.

use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI};

use num_complex::Complex64;

use crate::channel::{build_channel, ChannelModel};
use crate::error::{domain, Error, Result};
use crate::geometry::{ArrayGeometry, NodeGeometry};
use crate::linalg;
use crate::secrecy::{asymptotic_beamformer, mrt_beamformer};
use crate::special_fn::erf_complex;
use crate::stats::rho_direct;

pub const SCAN_POINTS: usize = 400;
pub const SCAN_SPAN: f64 = 50.0;
pub const BISECT_STEPS: usize = 60;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DepthInterval {
    Finite { r_min: f64, r_max: f64 },
    RightInfinite { r_min: f64 },
}

impl DepthInterval {
    pub fn r_min(&self) -> f64 {
        match *self {
            DepthInterval::Finite { r_min, .. } | DepthInterval::RightInfinite { r_min } => r_min,
        }
    }
    pub fn r_max(&self) -> f64 {
        match *self {
            DepthInterval::Finite { r_max, .. } => r_max,
            DepthInterval::RightInfinite { .. } => f64::INFINITY,
        }
    }
    pub fn contains(&self, r: f64) -> bool {
        self.r_min() <= r && r <= self.r_max()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DepthReport {
    /// Security-region radius, closed form only.
    pub r_s: Option<f64>,
    pub interval: DepthInterval,
    /// r_max − r_min, or infinity.
    pub depth: f64,
    pub threshold: f64,
    pub upsilon: Option<f64>,
    /// Smallest antenna count with a finite depth, 4λΥ²r_b/d².
    pub m_s: Option<f64>,
    /// Same bound with Υ in place of Υ², as originally printed.
    pub m_s_literal: Option<f64>,
}

pub fn cos_psi(rho: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&rho) {
        return domain(format!("correlation factor {rho} outside [0, 1]"));
    }
    Ok(1.0 - rho)
}

/// Squared cosine of the angle between the MRT and the Eve-nulling beamformers.
pub fn cos_psi_numeric(h_b: &[Complex64], h_e: &[Complex64]) -> Result<f64> {
    let wm = mrt_beamformer(h_b, 1.0)?;
    let wa = asymptotic_beamformer(h_b, h_e, 1.0)?;
    let ip = linalg::dot(&wm, &wa).norm_sqr();
    Ok(ip / (linalg::norm(&wm).powi(2) * linalg::norm(&wa).powi(2)))
}

/// |erf(√π·e^{jπ/4}·Υ)/(2Υ)|⁴, the boresight correlation as a function of Υ.
pub fn boresight_correlation(upsilon: f64) -> Result<f64> {
    if upsilon == 0.0 {
        return Ok(1.0);
    }
    let z = Complex64::from_polar(PI.sqrt() * upsilon, FRAC_PI_4);
    Ok((erf_complex(z)?.norm() / (2.0 * upsilon)).powi(4))
}

/// Smallest Υ > 0 with [`boresight_correlation`] equal to `target`.
pub fn upsilon_threshold(target: f64) -> Result<f64> {
    if !(target > 0.0 && target < 1.0) {
        return domain(format!("target must lie in (0, 1), got {target}"));
    }
    const STEP: f64 = 1e-3;
    const LIMIT: f64 = 50.0;
    let mut lo = 0.0;
    let mut hi = STEP;
    while boresight_correlation(hi)? > target {
        lo = hi;
        hi += STEP;
        if hi > LIMIT {
            return Err(Error::Numerical {
                message: format!("no crossing of {target} below Υ = {LIMIT}"),
                residual: boresight_correlation(LIMIT)? - target,
            });
        }
    }
    for _ in 0..BISECT_STEPS {
        let mid = 0.5 * (lo + hi);
        if boresight_correlation(mid)? > target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

fn check_gamma(gamma: f64) -> Result<()> {
    if !(gamma > 0.0 && gamma < 1.0) {
        return domain(format!("threshold must lie in (0, 1), got {gamma}"));
    }
    Ok(())
}

/// Closed-form depth for a square array with Bob on boresight.
pub fn depth_closed(arr: &ArrayGeometry, node_b: &NodeGeometry, gamma: f64) -> Result<DepthReport> {
    check_gamma(gamma)?;
    let on_axis =
        (node_b.theta() - FRAC_PI_2).abs() < 1e-12 && (node_b.phi() - FRAC_PI_2).abs() < 1e-12;
    if arr.m_x() != arr.m_z() || !on_axis {
        return Err(Error::Scope(
            "closed-form depth needs a square array and a boresight user; use depth_scan".into(),
        ));
    }
    // the boundary sits where ρ falls to 1 − Γ
    let ups = upsilon_threshold(1.0 - gamma)?;
    let (lambda, d2, rb) = (arr.wavelength(), arr.spacing().powi(2), node_b.range());
    let r_s = arr.m_total() as f64 * d2 / (4.0 * lambda * ups * ups);
    let r_min = rb * r_s / (r_s + rb);
    let (interval, depth) = if rb < r_s {
        let r_max = rb * r_s / (r_s - rb);
        (
            DepthInterval::Finite { r_min, r_max },
            2.0 * rb * rb * r_s / (r_s * r_s - rb * rb),
        )
    } else {
        (DepthInterval::RightInfinite { r_min }, f64::INFINITY)
    };
    Ok(DepthReport {
        r_s: Some(r_s),
        interval,
        depth,
        threshold: gamma,
        upsilon: Some(ups),
        m_s: Some(4.0 * lambda * ups * ups * rb / d2),
        m_s_literal: Some(4.0 * lambda * ups * rb / d2),
    })
}

/// Numerical depth from direct correlations along Bob's direction.
///
/// Eve's range walks outward from r_b over a log grid on [r_b/50, 50·r_b];
/// the first point on each side with 1 − ρ > Γ is refined by bisection. No
/// crossing on the right means an unbounded interval; none on the left pins
/// r_min to the grid start.
pub fn depth_scan(
    arr: &ArrayGeometry,
    node_b: &NodeGeometry,
    gamma: f64,
    model: ChannelModel,
) -> Result<DepthReport> {
    check_gamma(gamma)?;
    let rb = node_b.range();
    let mut lo = rb / SCAN_SPAN;
    if model == ChannelModel::Nusw {
        // element-gain model needs r > 10√A
        lo = lo.max(10.5 * arr.element_area().sqrt());
    }
    let hi = rb * SCAN_SPAN;
    if lo >= rb {
        return Err(Error::Precondition(format!(
            "Bob at {rb} m is too close for the {model} model"
        )));
    }
    let h_b = build_channel(model, arr, node_b)?;
    let insecure = |r: f64| -> Result<bool> {
        let h_e = build_channel(model, arr, &node_b.with_range(r)?)?;
        Ok(1.0 - rho_direct(&h_b, &h_e)?.rho <= gamma)
    };
    let step = (hi / lo).ln() / (SCAN_POINTS - 1) as f64;
    let grid = |i: usize| lo * (step * i as f64).exp();
    let refine = |mut inside: f64, mut outside: f64| -> Result<f64> {
        for _ in 0..BISECT_STEPS {
            let mid = (inside * outside).sqrt();
            if insecure(mid)? {
                inside = mid;
            } else {
                outside = mid;
            }
        }
        Ok(0.5 * (inside + outside))
    };
    let split = ((rb / lo).ln() / step).floor() as usize;

    let mut r_min = lo;
    let mut inside = rb;
    for i in (0..=split.min(SCAN_POINTS - 1)).rev() {
        let r = grid(i);
        if r >= rb {
            continue;
        }
        if !insecure(r)? {
            r_min = refine(inside, r)?;
            break;
        }
        inside = r;
        r_min = r;
    }
    let mut inside = rb;
    let mut r_max = None;
    for i in split + 1..SCAN_POINTS {
        let r = grid(i);
        if r <= rb {
            continue;
        }
        if !insecure(r)? {
            r_max = Some(refine(inside, r)?);
            break;
        }
        inside = r;
    }
    let (interval, depth) = match r_max {
        Some(r_max) => (DepthInterval::Finite { r_min, r_max }, r_max - r_min),
        None => (DepthInterval::RightInfinite { r_min }, f64::INFINITY),
    };
    Ok(DepthReport {
        r_s: None,
        interval,
        depth,
        threshold: gamma,
        upsilon: None,
        m_s: None,
        m_s_literal: None,
    })
}
