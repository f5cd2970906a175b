//! Beam profile beyond the tabulated range: pointwise values are exact, running integrals
//! use the large-t structure ω = ω∞ + Re(e^{iθt}g₀) + n₀, ∂ω/∂p₀ = ω̇∞ + Re(e^{iθt}g₁) + n₁.

use num_complex::Complex64;

use crate::deltakernel::{beam_asymptotes, beam_parts, BeamParts, DeltaParams};
use crate::quad::{cheb_nodes, Cheb};

const CHEB_DEGREE: usize = 48;
const DIFF_STEP: f64 = 1e-2;

/// Tail of a beam profile at unit density scale.
#[derive(Debug, Clone)]
pub struct BeamTail {
    p0: f64,
    r0: f64,
    dp: DeltaParams,
    t_tab: f64,
    pub omega_inf: f64,
    pub domega_inf: f64,
    theta: f64,
    /// lim t·J(t) of the non-oscillating part J of (∂ω/∂p₀)²/ω − ω̇∞²/ω∞.
    pub c0: f64,
    y_tab: f64,
    /// (tJ − c₀)/y on y = t^{−1/2} ∈ [0, y_tab].
    fit: Cheb,
    start: [f64; 3],
}

/// Increments of Ω, ∂Ω/∂p₀ and ∫(∂ω/∂p₀)²/ω over [t_tab, t], excluding the linear parts.
#[derive(Debug, Clone, Copy)]
pub(crate) struct TailIncrement {
    pub omega: f64,
    pub domega: f64,
    pub x: [f64; 3],
}

impl BeamTail {
    pub fn new(p0: f64, r0: f64, dp: DeltaParams, t_tab: f64) -> BeamTail {
        let q = p0.abs();
        let asy = beam_asymptotes(q, r0, &dp);
        let sign = if p0 < 0.0 { -1.0 } else { 1.0 };
        let al = dp.alpha();
        let w = dp.a * r0;
        let c0 = 4.0 * dp.m * w / (std::f64::consts::PI * q * q * al * al);
        let y_tab = t_tab.powf(-0.5);
        let mut tail = BeamTail {
            p0,
            r0,
            dp,
            t_tab,
            omega_inf: asy.omega_inf,
            domega_inf: sign * asy.domega_inf,
            theta: q * q / (2.0 * dp.m),
            c0,
            y_tab,
            fit: Cheb::fit(&[0.0, 0.0], 1.0),
            start: [0.0; 3],
        };
        let vals: Vec<f64> = cheb_nodes(0.0, y_tab, CHEB_DEGREE)
            .into_iter()
            .map(|y| {
                if y <= 0.0 {
                    return 0.0;
                }
                let t = 1.0 / (y * y);
                (t * tail.mean_rate(&tail.parts(t)) - c0) / y
            })
            .collect();
        tail.fit = Cheb::fit(&vals, 0.5 * y_tab);
        tail.start = tail.oscillating(&tail.parts(t_tab), t_tab);
        tail
    }

    pub fn t_tab(&self) -> f64 {
        self.t_tab
    }

    fn parts(&self, t: f64) -> BeamParts {
        beam_parts(t, self.p0, self.r0, &self.dp)
    }

    /// Non-oscillating part J of (∂ω/∂p₀)²/ω − ω̇∞²/ω∞.
    fn mean_rate(&self, b: &BeamParts) -> f64 {
        let (w, dw) = (self.omega_inf, self.domega_inf);
        let r = dw * dw / w;
        (0.5 * b.g1.norm_sqr() + 2.0 * dw * b.n1 + b.n1 * b.n1) / w - r * b.n0 / w - dw * (b.g1 * b.g0.conj()).re / (w * w)
            + 0.5 * r * b.g0.norm_sqr() / (w * w)
    }

    /// Antiderivatives of the oscillating parts at t, by two integrations by parts.
    fn oscillating(&self, b: &BeamParts, t: f64) -> [f64; 3] {
        let (w, dw) = (self.omega_inf, self.domega_inf);
        let r = dw * dw / w;
        let th = self.theta;
        let h = |b: &BeamParts| b.g1 * b.g1 / (2.0 * w) - b.g1 * b.g0 * (dw / (w * w));
        let step = DIFF_STEP * t;
        let (lo, hi) = (self.parts(t - step), self.parts(t + step));
        let slope = |f: &dyn Fn(&BeamParts) -> Complex64| (f(&hi) - f(&lo)) / (2.0 * step);
        let rot = Complex64::from_polar(1.0, b.phase);
        let i = Complex64::new(0.0, 1.0);
        let osc = |g: Complex64, dg: Complex64, k: f64| (rot.powf(k) * (g / (i * k * th) + dg / (k * k * th * th))).re;
        let o0 = osc(b.g0, slope(&|b| b.g0), 1.0);
        let o1 = osc(b.g1, slope(&|b| b.g1), 1.0);
        let osc2 = osc(h(b), slope(&h), 2.0);
        let c1 = |b: &BeamParts| -(b.g1.norm_sqr() * b.g0 * 0.5 + b.g1 * b.g1 * b.g0.conj() * 0.25) / (w * w);
        let c3 = |b: &BeamParts| -(b.g1 * b.g1 * b.g0 * 0.25) / (w * w);
        let cubic = osc(c1(b), slope(&c1), 1.0) + osc(c3(b), slope(&c3), 3.0);
        // n₀ and n₁ decay as t⁻³
        let p0 = -0.5 * b.n0 * t;
        let p1 = -0.5 * b.n1 * t;
        [o0 + p0, o1 + p1, 2.0 * dw / w * (o1 + p1) - r / w * (o0 + p0) + osc2 + cubic]
    }

    /// ∫_{t_tab}^{t} J.
    fn mean_integral(&self, t: f64) -> f64 {
        let y = t.powf(-0.5);
        let x = 2.0 * y / self.y_tab - 1.0;
        2.0 * self.c0 * (self.y_tab / y).ln() + 2.0 * (self.fit.integral(1.0) - self.fit.integral(x))
    }

    /// Increments with the bounded oscillating parts removed.
    pub(crate) fn secular_increment(&self, t: f64) -> [f64; 3] {
        [-self.start[0], -self.start[1], self.mean_integral(t) - self.start[2]]
    }

    pub(crate) fn increment(&self, t: f64) -> TailIncrement {
        let b = self.parts(t);
        let o = self.oscillating(&b, t);
        let mean = self.mean_integral(t);
        let rot = Complex64::from_polar(1.0, b.phase);
        TailIncrement {
            omega: self.omega_inf + (rot * b.g0).re + b.n0,
            domega: self.domega_inf + (rot * b.g1).re + b.n1,
            x: [o[0] - self.start[0], o[1] - self.start[1], o[2] - self.start[2] + mean],
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn leading_mean_rate_matches_closed_form() {
        let dp = DeltaParams::new(0.4, 1.3).unwrap();
        let tail = BeamTail::new(0.8, 2.0, dp, 3000.0);
        let t = 1e9;
        let c = t * tail.mean_rate(&tail.parts(t));
        assert!((c / tail.c0 - 1.0).abs() < 1e-5, "{c} vs {}", tail.c0);
    }

    #[test]
    fn increments_match_direct_integration() {
        use crate::quad::{integrate, QuadOpts};
        let dp = DeltaParams::new(0.4, 1.0).unwrap();
        let (p0, r0, t_tab) = (1.0, 1.0, 2000.0);
        let tail = BeamTail::new(p0, r0, dp, t_tab);
        let q = QuadOpts { abs_tol: 1e-13, rel_tol: 1e-12, max_segments: 200_000 };
        let f = |t: f64| crate::deltakernel::beam_intensity_and_dp(t, p0, r0, &dp);
        for &t in &[2100.0, 2600.0, 4000.0, 9000.0] {
            let inc = tail.increment(t);
            let d = t - t_tab;
            let brk: Vec<f64> = (0..=2000).map(|k| t_tab + d * k as f64 / 2000.0).collect();
            let direct = [
                integrate(|s| f(s).0, &brk, q).unwrap().value,
                integrate(|s| f(s).1, &brk, q).unwrap().value,
                integrate(|s| { let (a, b) = f(s); b * b / a }, &brk, q).unwrap().value,
            ];
            let r = tail.domega_inf * tail.domega_inf / tail.omega_inf;
            let model = [tail.omega_inf * d + inc.x[0], tail.domega_inf * d + inc.x[1], r * d + inc.x[2]];
            for c in 0..3 {
                assert!((model[c] - direct[c]).abs() < 1e-6 * direct[c].abs().max(1.0), "t={t} c={c} {} {}", model[c], direct[c]);
            }
            let (w, dw) = f(t);
            assert!((inc.omega - w).abs() < 1e-12 && (inc.domega - dw).abs() < 1e-12);
        }
    }
}
