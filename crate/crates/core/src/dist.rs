//! Product Student sampling measure.
//!
//! Each coordinate has density `c_mu (1 + (x - center)^2)^{-(mu+1)/2}`, the law
//! of `T / sqrt(mu)` for a Student variable `T` with `mu` degrees of freedom.
//! `mu = 1` (Cauchy) and `mu = 2` have closed-form CDFs and inverses; any other
//! `mu` goes through adaptive quadrature and a safeguarded Newton inversion.

use std::f64::consts::{FRAC_1_PI, PI};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quad::integrate;
use crate::rng::UniformSource;

/// Uniforms are clamped to `[GUARD, 1 - GUARD]` before inversion.
pub const GUARD: f64 = 1e-15;

#[derive(Clone, Copy, Debug, PartialEq)]
enum Family {
    Cauchy,
    Mu2,
    General,
}

/// Product law on `R^d` with identical Student marginals, optionally shifted.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "MeasureRepr", into = "MeasureRepr")]
pub struct SamplingMeasure {
    mu: f64,
    center: Vec<f64>,
    c_mu: f64,
    family: Family,
}

#[derive(Serialize, Deserialize)]
struct MeasureRepr {
    mu: f64,
    center: Vec<f64>,
}

impl TryFrom<MeasureRepr> for SamplingMeasure {
    type Error = Error;
    fn try_from(r: MeasureRepr) -> Result<Self> {
        Self::with_center(r.mu, r.center)
    }
}

impl From<SamplingMeasure> for MeasureRepr {
    fn from(m: SamplingMeasure) -> Self {
        MeasureRepr {
            mu: m.mu,
            center: m.center,
        }
    }
}

impl SamplingMeasure {
    /// Centred measure on `R^dim`.
    pub fn new(mu: f64, dim: usize) -> Result<Self> {
        Self::with_center(mu, vec![0.0; dim])
    }

    pub fn with_center(mu: f64, center: Vec<f64>) -> Result<Self> {
        if !(mu > 0.0 && mu.is_finite()) {
            return Err(Error::Domain(format!("student parameter must be positive, got {mu}")));
        }
        if center.is_empty() {
            return Err(Error::Domain("dimension must be at least 1".into()));
        }
        if center.iter().any(|c| !c.is_finite()) {
            return Err(Error::Domain("center must be finite".into()));
        }
        let family = if mu == 1.0 {
            Family::Cauchy
        } else if mu == 2.0 {
            Family::Mu2
        } else {
            Family::General
        };
        Ok(Self {
            mu,
            center,
            c_mu: student_constant(mu),
            family,
        })
    }

    pub fn mu(&self) -> f64 {
        self.mu
    }

    pub fn dim(&self) -> usize {
        self.center.len()
    }

    pub fn center(&self) -> &[f64] {
        &self.center
    }

    /// Normalising constant `Gamma((mu+1)/2) / (Gamma(mu/2) sqrt(pi))`.
    pub fn c_mu(&self) -> f64 {
        self.c_mu
    }

    /// Marginal density of coordinate `coord` at `x`.
    pub fn pdf(&self, coord: usize, x: f64) -> Result<f64> {
        if !x.is_finite() {
            return Err(Error::Domain(format!("pdf needs a finite argument, got {x}")));
        }
        Ok(self.std_pdf(x - self.center[coord]))
    }

    /// Marginal CDF of coordinate `coord` at `x`.
    pub fn cdf(&self, coord: usize, x: f64) -> f64 {
        self.std_cdf(x - self.center[coord])
    }

    /// Marginal quantile of coordinate `coord`; `u` must lie in `(0, 1)`.
    pub fn inv_cdf(&self, coord: usize, u: f64) -> Result<f64> {
        if !(u > 0.0 && u < 1.0) {
            return Err(Error::Domain(format!("inverse CDF needs u in (0,1), got {u}")));
        }
        Ok(self.center[coord] + self.std_inv_cdf(u))
    }

    /// Draws one point of `R^d` by inverse transform, one uniform per coordinate.
    pub fn sample<S: UniformSource + ?Sized>(&self, src: &mut S) -> Vec<f64> {
        let mut out = vec![0.0; self.dim()];
        self.sample_into(src, &mut out);
        out
    }

    pub fn sample_into<S: UniformSource + ?Sized>(&self, src: &mut S, out: &mut [f64]) {
        for (x, c) in out.iter_mut().zip(&self.center) {
            *x = c + self.std_inv_cdf(src.next_uniform());
        }
    }

    /// Density of the centred marginal.
    #[inline]
    pub fn std_pdf(&self, z: f64) -> f64 {
        match self.family {
            Family::Cauchy => FRAC_1_PI / (1.0 + z * z),
            Family::Mu2 => {
                let s = 1.0 + z * z;
                0.5 / (s * s.sqrt())
            }
            Family::General => self.c_mu * (1.0 + z * z).powf(-0.5 * (self.mu + 1.0)),
        }
    }

    /// CDF of the centred marginal.
    #[inline]
    pub fn std_cdf(&self, z: f64) -> f64 {
        if z.is_nan() {
            return f64::NAN;
        }
        if z < 0.0 {
            self.upper_tail(-z)
        } else {
            1.0 - self.upper_tail(z)
        }
    }

    /// `P(Z > z)` for `z >= 0`, computed without cancellation.
    fn upper_tail(&self, z: f64) -> f64 {
        match self.family {
            Family::Cauchy => {
                if z <= 1.0 {
                    0.5 - z.atan() * FRAC_1_PI
                } else {
                    (1.0 / z).atan() * FRAC_1_PI
                }
            }
            Family::Mu2 => {
                if z.is_infinite() {
                    return 0.0;
                }
                let r = z.hypot(1.0);
                0.5 / (r * (r + z))
            }
            Family::General => self.general_tail(z),
        }
    }

    /// With `x = cot(s)` the tail is `c_mu * int_0^{atan(1/z)} sin(s)^{mu-1} ds`;
    /// the further change `s = w^{1/mu}` removes the endpoint singularity.
    fn general_tail(&self, z: f64) -> f64 {
        if z.is_infinite() {
            return 0.0;
        }
        let mu = self.mu;
        let s_max = if z == 0.0 { 0.5 * PI } else { (1.0 / z).atan() };
        let w_max = s_max.powf(mu);
        let integrand = |w: f64| {
            if w <= 0.0 {
                return 1.0;
            }
            let s = w.powf(1.0 / mu);
            (s.sin() / s).powf(mu - 1.0)
        };
        self.c_mu / mu * integrate(integrand, 0.0, w_max, 1e-14, 0.0)
    }

    /// Quantile of the centred marginal; clamps `u` into the guard band.
    #[inline]
    pub fn std_inv_cdf(&self, u: f64) -> f64 {
        let u = u.clamp(GUARD, 1.0 - GUARD);
        match self.family {
            Family::Cauchy => {
                let v = u - 0.5;
                if v.abs() <= 0.25 {
                    (PI * v).tan()
                } else if v < 0.0 {
                    -1.0 / (PI * u).tan()
                } else {
                    1.0 / (PI * (1.0 - u)).tan()
                }
            }
            // (u - 1/2) / sqrt(u (1 - u)) is the closed form
            // sign(u - 1/2) sqrt((-u^2 + u - 1/4) / (u (u - 1))) rearranged.
            Family::Mu2 => (u - 0.5) / (u * (1.0 - u)).sqrt(),
            Family::General => self.general_inv(u),
        }
    }

    fn general_inv(&self, u: f64) -> f64 {
        if u == 0.5 {
            return 0.0;
        }
        let p = u.min(1.0 - u);
        let sign = if u < 0.5 { -1.0 } else { 1.0 };

        // Starting point: tail asymptotics far out, linearisation near the median.
        let far = (self.c_mu / (self.mu * p)).powf(1.0 / self.mu);
        let near = (0.5 - p) / self.c_mu;
        let mut z = if p < 0.1 { far } else { near.min(far) };

        let mut lo = 0.0;
        let mut hi = z.max(1.0);
        while self.upper_tail(hi) > p {
            lo = hi;
            hi *= 2.0;
        }
        if !(z > lo && z < hi) {
            z = 0.5 * (lo + hi);
        }
        for _ in 0..200 {
            let t = self.upper_tail(z);
            let resid = t - p;
            if resid.abs() <= 1e-14 * p {
                break;
            }
            if resid > 0.0 {
                lo = z;
            } else {
                hi = z;
            }
            let step = resid / self.std_pdf(z);
            let mut next = z + step;
            if !(next > lo && next < hi) {
                next = 0.5 * (lo + hi);
            }
            if (next - z).abs() <= 1e-15 * z.max(1.0) {
                z = next;
                break;
            }
            z = next;
        }
        sign * z
    }
}

fn student_constant(mu: f64) -> f64 {
    (libm::lgamma(0.5 * (mu + 1.0)) - libm::lgamma(0.5 * mu)).exp() / PI.sqrt()
}

/// Standard normal quantile: Acklam's rational approximation polished by one
/// Halley step against `erfc`, good to a few ulps over `(0, 1)`.
pub fn normal_inv_cdf(u: f64) -> f64 {
    const A: [f64; 6] = [
        -3.969_683_028_665_376e1,
        2.209_460_984_245_205e2,
        -2.759_285_104_469_687e2,
        1.383_577_518_672_69e2,
        -3.066_479_806_614_716e1,
        2.506_628_277_459_239,
    ];
    const B: [f64; 5] = [
        -5.447_609_879_822_406e1,
        1.615_858_368_580_409e2,
        -1.556_989_798_598_866e2,
        6.680_131_188_771_972e1,
        -1.328_068_155_288_572e1,
    ];
    const C: [f64; 6] = [
        -7.784_894_002_430_293e-3,
        -3.223_964_580_411_365e-1,
        -2.400_758_277_161_838,
        -2.549_732_539_343_734,
        4.374_664_141_464_968,
        2.938_163_982_698_783,
    ];
    const D: [f64; 4] = [
        7.784_695_709_041_462e-3,
        3.224_671_290_700_398e-1,
        2.445_134_137_142_996,
        3.754_408_661_907_416,
    ];
    const P_LOW: f64 = 0.024_25;

    let u = u.clamp(GUARD, 1.0 - GUARD);
    let x = if u < P_LOW {
        let q = (-2.0 * u.ln()).sqrt();
        (((((C[0] * q + C[1]) * q + C[2]) * q + C[3]) * q + C[4]) * q + C[5])
            / ((((D[0] * q + D[1]) * q + D[2]) * q + D[3]) * q + 1.0)
    } else if u <= 1.0 - P_LOW {
        let q = u - 0.5;
        let r = q * q;
        (((((A[0] * r + A[1]) * r + A[2]) * r + A[3]) * r + A[4]) * r + A[5]) * q
            / (((((B[0] * r + B[1]) * r + B[2]) * r + B[3]) * r + B[4]) * r + 1.0)
    } else {
        let q = (-2.0 * (1.0 - u).ln()).sqrt();
        -(((((C[0] * q + C[1]) * q + C[2]) * q + C[3]) * q + C[4]) * q + C[5])
            / ((((D[0] * q + D[1]) * q + D[2]) * q + D[3]) * q + 1.0)
    };
    // Halley refinement; work on the smaller tail to keep relative accuracy.
    let e = if x < 0.0 {
        0.5 * libm::erfc(-x / std::f64::consts::SQRT_2) - u
    } else {
        (1.0 - u) - 0.5 * libm::erfc(x / std::f64::consts::SQRT_2)
    };
    let g = e * (2.0 * PI).sqrt() * (0.5 * x * x).exp();
    x - g / (1.0 + 0.5 * x * g)
}

/// Standard normal CDF.
pub fn normal_cdf(x: f64) -> f64 {
    0.5 * libm::erfc(-x / std::f64::consts::SQRT_2)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::{ConstantSource, StreamFactory};

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    #[test]
    fn pdf_spot_values() {
        let m2 = SamplingMeasure::new(2.0, 1).unwrap();
        let m1 = SamplingMeasure::new(1.0, 1).unwrap();
        assert!(close(m2.pdf(0, 0.0).unwrap(), 0.5, 1e-15));
        assert!(close(m1.pdf(0, 0.0).unwrap(), FRAC_1_PI, 1e-15));
        assert!(close(m2.c_mu(), 0.5, 1e-14));
        assert!(close(m1.c_mu(), FRAC_1_PI, 1e-14));
        for mu in [0.7, 1.0, 2.0, 3.5] {
            let m = SamplingMeasure::new(mu, 1).unwrap();
            for x in [0.3, 1.0, 7.0] {
                assert_eq!(m.pdf(0, x).unwrap(), m.pdf(0, -x).unwrap());
            }
        }
    }

    #[test]
    fn general_family_agrees_with_closed_forms() {
        // mu values just off 1 and 2 exercise the quadrature path.
        for (mu, target) in [(2.0, 2.0 + 1e-12), (1.0, 1.0 + 1e-12)] {
            let exact = SamplingMeasure::new(mu, 1).unwrap();
            let numeric = SamplingMeasure::new(target, 1).unwrap();
            assert_eq!(numeric.family, Family::General);
            for x in [-50.0, -3.0, -0.2, 0.0, 0.4, 2.0, 1e4] {
                let a = exact.cdf(0, x);
                let b = numeric.cdf(0, x);
                assert!(close(a, b, 1e-11), "mu={mu} x={x}: {a} vs {b}");
            }
        }
    }

    #[test]
    fn pdf_rejects_non_finite() {
        let m = SamplingMeasure::new(2.0, 1).unwrap();
        assert!(m.pdf(0, f64::NAN).is_err());
        assert!(m.pdf(0, f64::INFINITY).is_err());
    }

    #[test]
    fn constructor_validates() {
        assert!(SamplingMeasure::new(0.0, 1).is_err());
        assert!(SamplingMeasure::new(-1.0, 1).is_err());
        assert!(SamplingMeasure::new(2.0, 0).is_err());
        assert!(SamplingMeasure::with_center(2.0, vec![f64::NAN]).is_err());
    }

    #[test]
    fn cdf_spot_values() {
        let m2 = SamplingMeasure::new(2.0, 1).unwrap();
        let m1 = SamplingMeasure::new(1.0, 1).unwrap();
        assert_eq!(m2.cdf(0, 0.0), 0.5);
        assert!(close(m2.cdf(0, 1.0), 0.853_553_390_593_273_8, 1e-15));
        assert!(close(m1.cdf(0, 1.0), 0.75, 1e-15));
    }

    #[test]
    fn inv_cdf_spot_values() {
        let m2 = SamplingMeasure::new(2.0, 1).unwrap();
        let m1 = SamplingMeasure::new(1.0, 1).unwrap();
        assert_eq!(m2.inv_cdf(0, 0.5).unwrap(), 0.0);
        assert!(close(m2.inv_cdf(0, 0.75).unwrap(), (1.0f64 / 3.0).sqrt(), 1e-15));
        assert!(close(m1.inv_cdf(0, 0.75).unwrap(), 1.0, 1e-15));
        assert!(m2.inv_cdf(0, 0.0).is_err());
        assert!(m2.inv_cdf(0, 1.0).is_err());
        assert!(m2.inv_cdf(0, f64::NAN).is_err());
    }

    #[test]
    fn general_mu_round_trip() {
        for mu in [0.5, 1.5, 3.0, 7.25] {
            let m = SamplingMeasure::new(mu, 1).unwrap();
            for u in [1e-9, 1e-4, 0.01, 0.2, 0.5, 0.63, 0.9, 0.999, 1.0 - 1e-7] {
                let x = m.inv_cdf(0, u).unwrap();
                let back = m.cdf(0, x);
                assert!(close(back, u, 1e-8), "mu={mu} u={u} x={x} back={back}");
            }
        }
    }

    #[test]
    fn shifted_measure() {
        let m = SamplingMeasure::with_center(2.0, vec![1.5, -2.0]).unwrap();
        assert_eq!(m.cdf(0, 1.5), 0.5);
        assert_eq!(m.inv_cdf(1, 0.5).unwrap(), -2.0);
        assert_eq!(m.sample(&mut ConstantSource(0.5)), vec![1.5, -2.0]);
    }

    #[test]
    fn median_of_samples() {
        let m = SamplingMeasure::with_center(2.0, vec![0.0, 3.0]).unwrap();
        let mut s = StreamFactory::new(5).stream(0);
        let n = 100_000;
        let mut cols = vec![Vec::with_capacity(n); 2];
        for _ in 0..n {
            let x = m.sample(&mut s);
            cols[0].push(x[0]);
            cols[1].push(x[1]);
        }
        for (l, mut c) in cols.into_iter().enumerate() {
            c.sort_by(f64::total_cmp);
            let med = c[n / 2];
            assert!((med - m.center()[l]).abs() < 0.02, "coord {l}: {med}");
        }
    }

    #[test]
    fn normal_quantile_round_trip() {
        for u in [1e-12, 1e-6, 0.01, 0.3, 0.5, 0.8, 0.975, 1.0 - 1e-9] {
            let x = normal_inv_cdf(u);
            let back = normal_cdf(x);
            let tol = 1e-14 * u.min(1.0 - u).max(1e-3);
            assert!((back - u).abs() <= tol.max(1e-16), "u={u} x={x} back={back}");
        }
        assert!(close(normal_inv_cdf(0.995), 2.575_829_303_548_901, 1e-13));
    }
}
