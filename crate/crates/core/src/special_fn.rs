//! Complex error function and Chebyshev–Gauss quadrature nodes.
//!
//! `erf` is evaluated in the first quadrant and extended by the symmetries
//! erf(−z) = −erf(z) and erf(z̄) = conj(erf z). Inside |z| ≤ 6.3 the Maclaurin
//! series is summed in double-double arithmetic: its terms grow to about
//! e^{|z|²} before they cancel, which would cost up to 17 digits in plain f64.
//! Outside that disc erfc(z) = e^{−z²}·w(iz) with the Faddeeva function w
//! from a fixed-length Laplace continued fraction.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Error, Result};

const SERIES_RADIUS: f64 = 6.3;
const TWO_OVER_SQRT_PI: f64 = std::f64::consts::FRAC_2_SQRT_PI;
const LN_MAX: f64 = 709.782712893384;

/// Unevaluated sum hi + lo with |lo| ≤ ulp(hi)/2.
#[derive(Debug, Clone, Copy)]
struct Dd {
    hi: f64,
    lo: f64,
}

impl Dd {
    fn from(x: f64) -> Self {
        Dd { hi: x, lo: 0.0 }
    }

    fn two_sum(a: f64, b: f64) -> Dd {
        let s = a + b;
        let bb = s - a;
        Dd {
            hi: s,
            lo: (a - (s - bb)) + (b - bb),
        }
    }

    fn quick_two_sum(a: f64, b: f64) -> Dd {
        let s = a + b;
        Dd {
            hi: s,
            lo: b - (s - a),
        }
    }

    fn two_prod(a: f64, b: f64) -> Dd {
        let p = a * b;
        Dd {
            hi: p,
            lo: a.mul_add(b, -p),
        }
    }

    fn add(self, o: Dd) -> Dd {
        let s = Dd::two_sum(self.hi, o.hi);
        let t = Dd::two_sum(self.lo, o.lo);
        let u = Dd::quick_two_sum(s.hi, s.lo + t.hi);
        Dd::quick_two_sum(u.hi, u.lo + t.lo)
    }

    fn neg(self) -> Dd {
        Dd {
            hi: -self.hi,
            lo: -self.lo,
        }
    }

    fn sub(self, o: Dd) -> Dd {
        self.add(o.neg())
    }

    fn mul(self, o: Dd) -> Dd {
        let p = Dd::two_prod(self.hi, o.hi);
        Dd::quick_two_sum(p.hi, p.lo + (self.hi * o.lo + self.lo * o.hi))
    }

    fn div_f64(self, b: f64) -> Dd {
        let q1 = self.hi / b;
        let r = self.sub(Dd::two_prod(q1, b));
        let q2 = r.hi / b;
        let r = r.sub(Dd::two_prod(q2, b));
        let q3 = r.hi / b;
        Dd::quick_two_sum(q1, q2).add(Dd::from(q3))
    }

    fn to_f64(self) -> f64 {
        self.hi + self.lo
    }
}

#[derive(Debug, Clone, Copy)]
struct DdComplex {
    re: Dd,
    im: Dd,
}

impl DdComplex {
    fn add(self, o: DdComplex) -> DdComplex {
        DdComplex {
            re: self.re.add(o.re),
            im: self.im.add(o.im),
        }
    }
    fn mul(self, o: DdComplex) -> DdComplex {
        DdComplex {
            re: self.re.mul(o.re).sub(self.im.mul(o.im)),
            im: self.re.mul(o.im).add(self.im.mul(o.re)),
        }
    }
    fn div_f64(self, b: f64) -> DdComplex {
        DdComplex {
            re: self.re.div_f64(b),
            im: self.im.div_f64(b),
        }
    }
    fn magnitude_hint(&self) -> f64 {
        self.re.hi.abs() + self.im.hi.abs()
    }
}

/// erf(z) for complex z.
///
/// Accurate to about 1e−13 relative away from the zeros of erf. Fails with
/// [`Error::Overflow`] when |erf z| exceeds the f64 range, which happens
/// only well inside the sectors |arg z ∓ π/2| < π/4.
pub fn erf_complex(z: Complex64) -> Result<Complex64> {
    if !(z.re.is_finite() && z.im.is_finite()) {
        return Err(Error::Domain(format!("erf of non-finite argument {z}")));
    }
    let flip_re = z.re.is_sign_negative();
    let flip_im = z.im.is_sign_negative();
    let q = Complex64::new(z.re.abs(), z.im.abs());
    let mut w = if q.norm() <= SERIES_RADIUS {
        erf_series(q)
    } else {
        erf_far(q)?
    };
    if q.re == 0.0 {
        // erf is purely imaginary on the imaginary axis.
        w.re = 0.0;
    }
    if q.im == 0.0 {
        w.im = 0.0;
    }
    // erf(-z) = -erf(z), erf(conj z) = conj(erf z)
    if flip_re {
        w = -w.conj();
    }
    if flip_im {
        w = w.conj();
    }
    Ok(w)
}

/// (2/√π) Σ (−1)ⁿ z^{2n+1} / (n!(2n+1)) in double-double.
fn erf_series(z: Complex64) -> Complex64 {
    let zz = DdComplex {
        re: Dd::two_prod(z.re, z.re).sub(Dd::two_prod(z.im, z.im)),
        im: Dd::two_prod(z.re, z.im).mul(Dd::from(2.0)),
    };
    let neg_zz = DdComplex {
        re: zz.re.neg(),
        im: zz.im.neg(),
    };
    let mut term = DdComplex {
        re: Dd::from(z.re),
        im: Dd::from(z.im),
    };
    let mut sum = term;
    let mut n = 0u32;
    loop {
        n += 1;
        term = term.mul(neg_zz).div_f64(n as f64);
        let contrib = term.div_f64((2 * n + 1) as f64);
        sum = sum.add(contrib);
        let size = contrib.magnitude_hint();
        // Stop once the tail is below 1e-33 of the running magnitude and
        // the terms are past their peak.
        if n as f64 > z.norm_sqr() && size <= 1e-33 * sum.magnitude_hint().max(f64::MIN_POSITIVE) {
            break;
        }
        if n > 400 {
            break;
        }
    }
    let scale = Dd::from(TWO_OVER_SQRT_PI);
    Complex64::new(sum.re.mul(scale).to_f64(), sum.im.mul(scale).to_f64())
}

/// First-quadrant z with |z| > 6.3: erf = 1 − e^{−z²}·w(iz).
fn erf_far(z: Complex64) -> Result<Complex64> {
    let (x, y) = (z.re, z.im);
    // w(iz) with iz = −y + ix lies in the second quadrant;
    // w(−conj ζ) = conj w(ζ) maps it to ζ = y + ix.
    let wq = faddeeva_cf(y, x).conj();
    // −z² = (y² − x²) − 2ixy, exponent and phase carried in double-double.
    let re_exp = Dd::two_prod(y, y).sub(Dd::two_prod(x, x));
    let phase = Dd::two_prod(x, y).mul(Dd::from(-2.0));
    let log_mag = re_exp.hi + wq.norm().ln();
    if log_mag > LN_MAX {
        return Err(Error::Overflow(format!(
            "|erf({z})| exceeds f64 range (log magnitude {log_mag:.1})"
        )));
    }
    let erfc = if log_mag < -745.0 {
        Complex64::new(0.0, 0.0)
    } else {
        let mag = re_exp.hi.exp() * (1.0 + re_exp.lo);
        let (s, c) = reduce_phase(phase).sin_cos();
        Complex64::new(mag * c, mag * s) * wq
    };
    Ok(Complex64::new(1.0, 0.0) - erfc)
}

/// Reduces a double-double angle to (−π, π] in f64.
fn reduce_phase(a: Dd) -> f64 {
    const TWO_PI_HI: f64 = std::f64::consts::TAU;
    const TWO_PI_LO: f64 = 2.4492935982947064e-16;
    let k = (a.hi / TWO_PI_HI).round();
    let r = a
        .sub(Dd::two_prod(k, TWO_PI_HI))
        .sub(Dd::from(k * TWO_PI_LO));
    r.to_f64()
}

/// Faddeeva w(x + iy) for x, y ≥ 0 outside the ellipse (x/6.3)² + (y/4.4)² < 1,
/// by the Laplace continued fraction truncated after ν terms.
fn faddeeva_cf(x: f64, y: f64) -> Complex64 {
    let rho = ((x / 6.3).powi(2) + (y / 4.4).powi(2)).sqrt();
    let nu = (3.0 + 1442.0 / (26.0 * rho + 77.0)) as i32;
    let (mut rx, mut ry) = (0.0f64, 0.0f64);
    for n in (0..=nu).rev() {
        let np1 = (n + 1) as f64;
        let tx = y + np1 * rx;
        let ty = x - np1 * ry;
        let c = 0.5 / (tx * tx + ty * ty);
        rx = c * tx;
        ry = c * ty;
    }
    Complex64::new(TWO_OVER_SQRT_PI * rx, TWO_OVER_SQRT_PI * ry)
}

/// Gauss–Chebyshev rule of the first kind: T nodes ζ_t = cos((2t−1)π/(2T)).
#[derive(Debug, Clone, PartialEq)]
pub struct QuadratureRule {
    nodes: Vec<f64>,
}

impl QuadratureRule {
    pub fn order(&self) -> usize {
        self.nodes.len()
    }
    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }
    /// Common weight π/T.
    pub fn weight(&self) -> f64 {
        PI / self.nodes.len() as f64
    }
    /// ∫_{−1}^{1} f(x)/√(1−x²) dx.
    pub fn integrate(&self, f: impl Fn(f64) -> f64) -> f64 {
        self.weight() * self.nodes.iter().map(|&x| f(x)).sum::<f64>()
    }
}

pub fn chebyshev_gauss_nodes(order: usize) -> Result<QuadratureRule> {
    if order == 0 {
        return Err(Error::Domain("quadrature order must be at least 1".into()));
    }
    let t = order as f64;
    let half = order / 2;
    let mut nodes = vec![0.0; order];
    // Fill the upper half and mirror it, so the rule is exactly symmetric.
    for i in 0..half {
        let v = ((2 * i + 1) as f64 * PI / (2.0 * t)).cos();
        nodes[i] = v;
        nodes[order - 1 - i] = -v;
    }
    Ok(QuadratureRule { nodes })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn rel(a: Complex64, b: Complex64) -> f64 {
        (a - b).norm() / b.norm()
    }

    // 40-digit references from scripts/reference_values.py.
    const REFERENCE: &[(f64, f64, f64, f64)] = &[
        (0.5, 0.25, 0.54868936055376218415, 0.22199095428837334808),
        (1.5, 1.9, 0.11469904093055099976, 0.2119445119145365359),
        (
            3.0,
            -2.0,
            0.99896327885681726888,
            0.000011546724379290603406,
        ),
        (-0.1, 4.5, -61001767.043075615002, 50787389.952825786166),
        (5.5, 5.5, 0.99883360495636308142, -0.072513224904386832844),
        (6.2, 0.3, 1.0000000000000000016, -1.1626996310316830869e-18),
        (7.0, 1.0, 1.0, 1.1264786396212906775e-22),
        (
            2.0,
            8.0,
            2.5895591827653931468e+24,
            7.4263001997569091562e+24,
        ),
        (20.0, 19.0, 0.99999999999999999979, 1.119168378840450543e-19),
        (
            30.0,
            35.0,
            1.1122708251421459365e+139,
            1.3012732580005312748e+139,
        ),
        (
            1.0e-8,
            2.0e-8,
            1.1283791670955130112e-8,
            2.2567583341910252702e-8,
        ),
        (12.0, 0.0, 1.0, 0.0),
        (0.0, 6.0, 0.0, 411275145582823.87097),
        (25.0, 25.0, 0.98550248428016949538, 0.0066685638021394721631),
    ];

    #[test]
    fn matches_high_precision_reference() {
        for &(x, y, re, im) in REFERENCE {
            let got = erf_complex(c(x, y)).unwrap();
            let want = c(re, im);
            assert!(
                rel(got, want) <= 1e-13,
                "erf({x}+{y}i) = {got}, want {want}, rel {}",
                rel(got, want)
            );
        }
    }

    #[test]
    fn zero_and_symmetries() {
        assert_eq!(erf_complex(c(0.0, 0.0)).unwrap(), c(0.0, 0.0));
        for z in [c(0.3, 1.7), c(4.0, 3.0), c(6.0, 2.0), c(9.0, 5.0)] {
            let e = erf_complex(z).unwrap();
            assert_eq!(erf_complex(-z).unwrap(), -e);
            assert_eq!(erf_complex(z.conj()).unwrap(), e.conj());
        }
    }

    #[test]
    fn threshold_value_near_one_half() {
        let u = 0.79;
        let z = c(PI.sqrt() * u, 0.0) * Complex64::from_polar(1.0, PI / 4.0);
        let v = (erf_complex(z).unwrap() / (2.0 * u)).norm().powi(4);
        assert!((v - 0.5).abs() < 0.005, "{v}");
    }

    #[test]
    fn overflow_and_domain_errors() {
        assert!(matches!(erf_complex(c(0.5, 40.0)), Err(Error::Overflow(_))));
        assert!(matches!(
            erf_complex(c(f64::NAN, 0.0)),
            Err(Error::Domain(_))
        ));
        assert!(matches!(
            erf_complex(c(1.0, f64::INFINITY)),
            Err(Error::Domain(_))
        ));
    }

    #[test]
    fn branches_agree_across_switchover() {
        for k in 0..32 {
            let t = k as f64 * PI / 62.0;
            let inner = c(6.2999 * t.cos(), 6.2999 * t.sin());
            let outer = c(6.3001 * t.cos(), 6.3001 * t.sin());
            let a = erf_series(inner);
            let b = erf_far(inner).unwrap();
            assert!(
                rel(a, b) < 1e-12 || (a - b).norm() < 1e-15,
                "angle {t}: {a} vs {b}"
            );
            let a = erf_series(outer);
            let b = erf_far(outer).unwrap();
            assert!(
                rel(a, b) < 1e-12 || (a - b).norm() < 1e-15,
                "angle {t}: {a} vs {b}"
            );
        }
    }

    #[test]
    fn nodes_small_orders() {
        assert_eq!(chebyshev_gauss_nodes(1).unwrap().nodes(), &[0.0]);
        let r = chebyshev_gauss_nodes(2).unwrap();
        assert!((r.nodes()[0] - 0.5f64.sqrt()).abs() < 1e-15);
        assert!((r.nodes()[1] + 0.5f64.sqrt()).abs() < 1e-15);
        assert!(chebyshev_gauss_nodes(0).is_err());
    }

    #[test]
    fn rule_exact_for_low_degree() {
        let r = chebyshev_gauss_nodes(100).unwrap();
        assert!((r.integrate(|_| 1.0) - PI).abs() < 1e-12);
        assert!((r.integrate(|x| x * x) - PI / 2.0).abs() < 1e-12);
        let n = r.nodes();
        assert!(n.windows(2).all(|w| w[0] > w[1]));
        assert!(n.iter().all(|&x| x > -1.0 && x < 1.0));
        for t in 0..n.len() {
            assert!((n[t] + n[n.len() - 1 - t]).abs() <= 1e-15);
        }
    }
}
