//! Channel gains and the correlation factor ρ = |h_bᴴh_e|²/(‖h_b‖²‖h_e‖²).
//!
//! Every closed form here is checked against [`rho_direct`] on explicitly
//! built channel vectors. Where a printed formula disagrees with the direct
//! inner product, the corrected form is the default and the printed one is
//! still reachable through [`FormVariant::Uncorrected`] for side-by-side
//! output.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::channel::{ChannelModel, ChannelVector};
use crate::error::{domain, Error, Result};
use crate::geometry::{region_boundaries, ArrayGeometry, NodeGeometry};
use crate::special_fn::{erf_complex, QuadratureRule};

/// Below this magnitude a phase slope or curvature is treated as zero.
pub const PHASE_TOL: f64 = 1e-14;
/// Clamping ρ by more than this is reported as a numerical-quality warning.
pub const CLAMP_WARN: f64 = 1e-6;
/// Default Chebyshev–Gauss order for the near-field correlation integral.
pub const DEFAULT_ORDER: usize = 100;

/// Which printed form of a closed-form expression to evaluate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum FormVariant {
    /// Forms that agree with direct summation.
    #[default]
    Corrected,
    /// Expressions as originally printed, kept for comparison.
    Uncorrected,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Provenance {
    ClosedForm,
    Direct,
}

/// Everything the secrecy and power closed forms need about a link pair.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinkStats {
    pub gain_bob: f64,
    pub gain_eve: f64,
    pub rho: f64,
    pub model: ChannelModel,
    pub provenance: Provenance,
}

impl LinkStats {
    /// Validates the gains and clamps ρ into [0, 1].
    pub fn new(
        gain_bob: f64,
        gain_eve: f64,
        rho: f64,
        model: ChannelModel,
        provenance: Provenance,
    ) -> Result<Self> {
        if !(gain_bob > 0.0 && gain_bob.is_finite() && gain_eve > 0.0 && gain_eve.is_finite()) {
            return domain(format!(
                "channel gains must be positive, got G_b={gain_bob}, G_e={gain_eve}"
            ));
        }
        if !rho.is_finite() {
            return domain(format!("correlation factor is not finite ({rho})"));
        }
        Ok(Self {
            gain_bob,
            gain_eve,
            rho: clamp_rho(rho),
            model,
            provenance,
        })
    }
}

/// Clamps into [0, 1], warning when the correction is larger than rounding.
pub fn clamp_rho(raw: f64) -> f64 {
    let clamped = raw.clamp(0.0, 1.0);
    if (clamped - raw).abs() > CLAMP_WARN {
        log::warn!("correlation factor {raw:.9} clamped to {clamped}");
    }
    clamped
}

/// ρ from explicit channel vectors; this is the definition.
pub fn rho_direct(h_b: &ChannelVector, h_e: &ChannelVector) -> Result<LinkStats> {
    if h_b.model() != h_e.model() {
        return domain(format!(
            "model mismatch: {} vs {}",
            h_b.model(),
            h_e.model()
        ));
    }
    let ip = h_b.inner(h_e)?;
    let (gb, ge) = (h_b.gain(), h_e.gain());
    LinkStats::new(
        gb,
        ge,
        ip.norm_sqr() / (gb * ge),
        h_b.model(),
        Provenance::Direct,
    )
}

/// M·A·Ψ/(4πr²), shared by both uniform-amplitude models.
pub fn gain_uniform(arr: &ArrayGeometry, node: &NodeGeometry) -> f64 {
    arr.m_total() as f64 * arr.element_area() * node.psi() / (4.0 * PI * node.range().powi(2))
}

/// |Σ_{m} e^{jmξ}|² over a centred run of `m` indices, i.e.
/// (sin(mξ/2)/sin(ξ/2))², taking the limit m² at multiples of 2π.
pub fn dirichlet_kernel(m: usize, xi: f64) -> f64 {
    let r = xi - 2.0 * PI * (xi / (2.0 * PI)).round();
    if r.abs() < PHASE_TOL {
        return (m * m) as f64;
    }
    let v = (m as f64 * r / 2.0).sin() / (r / 2.0).sin();
    v * v
}

/// Linear-phase slopes Ξ_Φ and Ξ_Ω between the two directions.
fn xi_pair(arr: &ArrayGeometry, nb: &NodeGeometry, ne: &NodeGeometry) -> (f64, f64) {
    let s = 2.0 * PI * arr.spacing() / arr.wavelength();
    (
        s * (nb.big_phi() - ne.big_phi()),
        s * (nb.omega() - ne.omega()),
    )
}

/// Far-field (planar-wave) correlation factor.
pub fn rho_upw(
    arr: &ArrayGeometry,
    nb: &NodeGeometry,
    ne: &NodeGeometry,
    variant: FormVariant,
) -> f64 {
    let (xi_x, xi_z) = xi_pair(arr, nb, ne);
    let raw = match variant {
        FormVariant::Corrected => {
            let (mx, mz) = (arr.m_x(), arr.m_z());
            dirichlet_kernel(mx, xi_x) / (mx * mx) as f64
                * (dirichlet_kernel(mz, xi_z) / (mz * mz) as f64)
        }
        FormVariant::Uncorrected => {
            let m2 = (arr.m_total() as f64).powi(2);
            let one_minus_cos = |m: usize, xi: f64| 1.0 - (m as f64 * xi).cos();
            let zx = xi_x.abs() < PHASE_TOL;
            let zz = xi_z.abs() < PHASE_TOL;
            if arr.is_ula() {
                if zz {
                    1.0
                } else {
                    one_minus_cos(arr.m_z(), xi_z) / (m2 * (1.0 - xi_z.cos()))
                }
            } else if zx && zz {
                1.0
            } else if zz {
                one_minus_cos(arr.m_x(), xi_x) / (m2 * (1.0 - xi_x.cos()))
            } else if zx {
                one_minus_cos(arr.m_z(), xi_z) / (m2 * (1.0 - xi_z.cos()))
            } else {
                4.0 * one_minus_cos(arr.m_x(), xi_x) * one_minus_cos(arr.m_z(), xi_z)
                    / (m2 * (1.0 - xi_x.cos()) * (1.0 - xi_z.cos()))
            }
        }
    };
    clamp_rho(raw)
}

/// Per-axis kernel |Σ_m e^{j(a m² + b m)}|² in its continuous (erf) form.
pub fn usw_axis_kernel(m: usize, a: f64, b: f64) -> Result<f64> {
    if m == 1 {
        return Ok(1.0);
    }
    let mf = m as f64;
    if a.abs() < PHASE_TOL {
        return Ok(dirichlet_kernel(m, b));
    }
    let rot = Complex64::from_polar(1.0, PI / 4.0);
    let sa = a.abs().sqrt();
    if b.abs() < PHASE_TOL {
        let e = erf_complex(rot * (mf / 2.0 * sa))?;
        return Ok(PI / a.abs() * e.norm_sqr());
    }
    let e1 = erf_complex(rot * ((a * mf - b) / (2.0 * sa)))?;
    let e2 = erf_complex(rot * ((a * mf + b) / (2.0 * sa)))?;
    Ok(PI / (4.0 * a.abs()) * (e1 + e2).norm_sqr())
}

/// Quadratic and linear phase coefficients (a_x, b_x, a_z, b_z) of the
/// spherical-wave phase difference.
pub fn usw_coefficients(
    arr: &ArrayGeometry,
    nb: &NodeGeometry,
    ne: &NodeGeometry,
) -> (f64, f64, f64, f64) {
    let (d, lam) = (arr.spacing(), arr.wavelength());
    let (b_x, b_z) = xi_pair(arr, nb, ne);
    let c = PI * d * d / lam;
    let a_x =
        c * ((1.0 - nb.big_phi().powi(2)) / nb.range() - (1.0 - ne.big_phi().powi(2)) / ne.range());
    let a_z =
        c * ((1.0 - nb.omega().powi(2)) / nb.range() - (1.0 - ne.omega().powi(2)) / ne.range());
    (a_x, b_x, a_z, b_z)
}

/// Near-field (uniform spherical wave) correlation factor δ_xδ_z/M².
pub fn rho_usw(arr: &ArrayGeometry, nb: &NodeGeometry, ne: &NodeGeometry) -> Result<f64> {
    let (_, fresnel) = region_boundaries(arr);
    for (who, n) in [("Bob", nb), ("Eve", ne)] {
        if n.range() < fresnel {
            log::warn!(
                "{who} at {:.3} m is inside the Fresnel distance {fresnel:.3} m; the quadratic-phase model is inaccurate",
                n.range()
            );
        }
    }
    let (a_x, b_x, a_z, b_z) = usw_coefficients(arr, nb, ne);
    let (mx, mz) = (arr.m_x(), arr.m_z());
    let dx = usw_axis_kernel(mx, a_x, b_x)?;
    let dz = usw_axis_kernel(mz, a_z, b_z)?;
    Ok(clamp_rho(dx / (mx * mx) as f64 * (dz / (mz * mz) as f64)))
}

/// Near-field (non-uniform spherical wave) gain of a planar array.
pub fn gain_nusw(arr: &ArrayGeometry, node: &NodeGeometry, variant: FormVariant) -> Result<f64> {
    if arr.is_ula() {
        return Err(Error::Precondition(
            "planar-array gain needs m_x > 1; use gain_nusw_ula".into(),
        ));
    }
    let eps = node.epsilon(arr);
    let (phi, psi, omega) = (node.big_phi(), node.psi(), node.omega());
    let hx = arr.m_x() as f64 * eps / 2.0;
    let hz = arr.m_z() as f64 * eps / 2.0;
    let z_shift = match variant {
        FormVariant::Corrected => omega,
        FormVariant::Uncorrected => psi,
    };
    let xs = [hx + phi, hx - phi];
    let zs = [hz + z_shift, hz - z_shift];
    let mut sum = 0.0;
    for &x in &xs {
        for &z in &zs {
            sum += (x * z / (psi * (psi * psi + x * x + z * z).sqrt())).atan();
        }
    }
    Ok(arr.element_area() / (4.0 * PI * arr.spacing().powi(2)) * sum)
}

/// Near-field (non-uniform spherical wave) gain of a linear array along z.
pub fn gain_nusw_ula(
    arr: &ArrayGeometry,
    node: &NodeGeometry,
    variant: FormVariant,
) -> Result<f64> {
    if !arr.is_ula() {
        return Err(Error::Precondition(
            "linear-array gain needs m_x = 1".into(),
        ));
    }
    let m = arr.m_z() as f64;
    let eps = node.epsilon(arr);
    let pre = arr.element_area() * eps / (4.0 * PI * arr.spacing().powi(2));
    let (c, scale) = match variant {
        FormVariant::Corrected => (node.omega(), node.psi() / (1.0 - node.omega().powi(2))),
        FormVariant::Uncorrected => (node.theta().cos(), node.phi().sin() / node.theta().sin()),
    };
    let me = m * eps;
    let term = |s: f64| (me + 2.0 * s * c) / (me * me + 4.0 * s * m * c * eps + 4.0).sqrt();
    Ok(pre * scale * (term(-1.0) + term(1.0)))
}

/// Integrand factors of the near-field correlation integral for one user.
struct NearFieldKernel {
    wavenumber: f64,
    range: f64,
    big_phi: f64,
    omega: f64,
    /// Coordinate scaling: Eve's normalised coordinates are τ times Bob's.
    tau: f64,
    exponent: f64,
}

impl NearFieldKernel {
    /// e^{j·k·r·(√q − 1)} / q^{exponent}; the common e^{jkr} is dropped
    /// because only |Σ|² is used.
    fn eval(&self, x: f64, z: f64) -> Complex64 {
        let (x, z) = (self.tau * x, self.tau * z);
        let q_minus_1 = x * x + z * z - 2.0 * self.big_phi * x - 2.0 * self.omega * z;
        let q = 1.0 + q_minus_1;
        let excess = self.range * q_minus_1 / (q.sqrt() + 1.0);
        let phase = self.wavenumber * excess;
        Complex64::from_polar(q.powf(-self.exponent), phase)
    }
}

fn kernels(
    arr: &ArrayGeometry,
    nb: &NodeGeometry,
    ne: &NodeGeometry,
    exponent: f64,
) -> (NearFieldKernel, NearFieldKernel) {
    let k = arr.wavenumber();
    let g1 = NearFieldKernel {
        wavenumber: k,
        range: nb.range(),
        big_phi: nb.big_phi(),
        omega: nb.omega(),
        tau: 1.0,
        exponent,
    };
    let g2 = NearFieldKernel {
        wavenumber: -k,
        range: ne.range(),
        big_phi: ne.big_phi(),
        omega: ne.omega(),
        tau: nb.range() / ne.range(),
        exponent,
    };
    (g1, g2)
}

fn check_order(rule: &QuadratureRule) -> Result<()> {
    if rule.order() < 10 {
        return Err(Error::Precondition(format!(
            "quadrature order {} is below 10",
            rule.order()
        )));
    }
    Ok(())
}

/// Near-field correlation factor of a planar array by Chebyshev–Gauss
/// quadrature of the continuous inner-product integral.
pub fn rho_nusw(
    arr: &ArrayGeometry,
    nb: &NodeGeometry,
    ne: &NodeGeometry,
    rule: &QuadratureRule,
    variant: FormVariant,
) -> Result<f64> {
    check_order(rule)?;
    let gb = gain_nusw(arr, nb, variant)?;
    let ge = gain_nusw(arr, ne, variant)?;
    let eps_b = nb.epsilon(arr);
    let (mx, mz) = (arr.m_x() as f64, arr.m_z() as f64);
    let (exponent, half, denom) = match variant {
        FormVariant::Corrected => (0.75, 0.5, 256.0),
        FormVariant::Uncorrected => (1.5, 1.0, 16.0),
    };
    let (g1, g2) = kernels(arr, nb, ne, exponent);
    let nodes = rule.nodes();
    let weights: Vec<f64> = nodes.iter().map(|z| (1.0 - z * z).sqrt()).collect();
    let mut acc = Complex64::new(0.0, 0.0);
    for (t, &zt) in nodes.iter().enumerate() {
        let x = half * mx * eps_b * zt;
        let mut row = Complex64::new(0.0, 0.0);
        for (u, &zu) in nodes.iter().enumerate() {
            let z = half * mz * eps_b * zu;
            row += weights[u] * g1.eval(x, z) * g2.eval(x, z);
        }
        acc += weights[t] * row;
    }
    let m = arr.m_total() as f64;
    let a = arr.element_area();
    let t4 = (rule.order() as f64).powi(4);
    let pre = m * m * a * a * nb.psi() * ne.psi() * PI * PI
        / (denom * gb * ge * nb.range().powi(2) * ne.range().powi(2) * t4);
    Ok(clamp_rho(pre * acc.norm_sqr()))
}

/// Linear-array counterpart of [`rho_nusw`].
pub fn rho_nusw_ula(
    arr: &ArrayGeometry,
    nb: &NodeGeometry,
    ne: &NodeGeometry,
    rule: &QuadratureRule,
    variant: FormVariant,
) -> Result<f64> {
    check_order(rule)?;
    let gb = gain_nusw_ula(arr, nb, variant)?;
    let ge = gain_nusw_ula(arr, ne, variant)?;
    let eps_b = nb.epsilon(arr);
    let m = arr.m_z() as f64;
    let (exponent, half) = match variant {
        FormVariant::Corrected => (0.75, 0.5),
        FormVariant::Uncorrected => (1.5, 1.0),
    };
    let (g1, g2) = kernels(arr, nb, ne, exponent);
    let acc: Complex64 = rule
        .nodes()
        .iter()
        .map(|&zt| {
            let z = half * m * eps_b * zt;
            (1.0 - zt * zt).sqrt() * g1.eval(0.0, z) * g2.eval(0.0, z)
        })
        .sum();
    let a = arr.element_area();
    let t = rule.order() as f64;
    let base =
        a * a * nb.psi() * ne.psi() * m * m / (gb * ge * nb.range().powi(2) * ne.range().powi(2));
    let pre = match variant {
        FormVariant::Corrected => base / (64.0 * t * t),
        FormVariant::Uncorrected => base * PI * PI / (16.0 * t.powi(4)),
    };
    Ok(clamp_rho(pre * acc.norm_sqr()))
}

/// Gains and ρ for a Bob/Eve pair from the closed forms of `model`.
pub fn closed_form_stats(
    model: ChannelModel,
    arr: &ArrayGeometry,
    nb: &NodeGeometry,
    ne: &NodeGeometry,
    rule: &QuadratureRule,
    variant: FormVariant,
) -> Result<LinkStats> {
    let (gb, ge, rho) = match model {
        ChannelModel::Upw => (
            gain_uniform(arr, nb),
            gain_uniform(arr, ne),
            rho_upw(arr, nb, ne, variant),
        ),
        ChannelModel::Usw => (
            gain_uniform(arr, nb),
            gain_uniform(arr, ne),
            rho_usw(arr, nb, ne)?,
        ),
        ChannelModel::Nusw if arr.is_ula() => (
            gain_nusw_ula(arr, nb, variant)?,
            gain_nusw_ula(arr, ne, variant)?,
            rho_nusw_ula(arr, nb, ne, rule, variant)?,
        ),
        ChannelModel::Nusw => (
            gain_nusw(arr, nb, variant)?,
            gain_nusw(arr, ne, variant)?,
            rho_nusw(arr, nb, ne, rule, variant)?,
        ),
    };
    LinkStats::new(gb, ge, rho, model, Provenance::ClosedForm)
}
