//! Delta-detector solution: transmission and remainder amplitudes, the monochromatic
//! solution f_p(t), momentum superpositions and the beam intensity.

pub mod erfc;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::propagate::GaussianPacket;
use crate::quad::{integrate, CVec, QuadOpts};

pub use erfc::{erfc, erfc_c, erfcx, ErfcValue};

const SQRT_PI: f64 = 1.772_453_850_905_516;
const TWO_PI: f64 = std::f64::consts::TAU;

/// Detector strength and particle mass.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DeltaParams {
    pub a: f64,
    pub m: f64,
}

impl DeltaParams {
    pub fn new(a: f64, m: f64) -> Result<Self> {
        if !(a >= 0.0 && a.is_finite()) || !(m > 0.0 && m.is_finite()) {
            return Err(Error::Domain(format!("need a >= 0 and m > 0, got a={a}, m={m}")));
        }
        Ok(DeltaParams { a, m })
    }

    /// α̃ = am/2.
    pub fn alpha(&self) -> f64 {
        0.5 * self.a * self.m
    }

    /// d = (a√m/4)(1 − i).
    pub fn d(&self) -> Complex64 {
        let s = 0.25 * self.a * self.m.sqrt();
        Complex64::new(s, -s)
    }
}

/// T_p = |p|/(|p| + α̃).
pub fn transmission_t(p: f64, dp: &DeltaParams) -> f64 {
    let q = p.abs();
    if q == 0.0 {
        return 0.0;
    }
    q / (q + dp.alpha())
}

/// κ = √(t/2m)·e^{−iπ/4}; the erfc arguments are κ|p| and κα̃.
fn kappa(t: f64, m: f64) -> Complex64 {
    let r = (0.5 * t / m).sqrt();
    Complex64::new(r, -r) * std::f64::consts::FRAC_1_SQRT_2
}

const TAYLOR_BAND: f64 = 1e-3;
const TAYLOR_TERMS: usize = 8;
const ASYMPTOTIC_Z2: f64 = 40.0;

/// K(p) = (pX(κp) − α̃X(κα̃))/(p² − α̃²) with X = erfcx, and dK/dp. Here p ≥ 0.
fn bracket_k(p: f64, t: f64, dp: &DeltaParams) -> (Complex64, Complex64) {
    let al = dp.alpha();
    let m = dp.m;
    let zp2 = p * p * t / (2.0 * m);
    let za2 = al * al * t / (2.0 * m);
    if zp2.min(za2) >= ASYMPTOTIC_Z2 {
        return bracket_asymptotic(p, t, dp);
    }
    let kap = kappa(t, m);
    let delta = p - al;
    if delta.abs() < TAYLOR_BAND * al {
        return bracket_taylor(delta, kap, al);
    }
    let xp = erfcx(kap * p);
    let xa = erfcx(kap * al);
    let qp = xp * p;
    let qa = xa * al;
    let den = p * p - al * al;
    let k = (qp - qa) / den;
    let dx = 2.0 * kap * p * xp - 2.0 / SQRT_PI;
    let dq = xp + kap * p * dx;
    let dk = (dq - 2.0 * p * k) / den;
    (k, dk)
}

fn bracket_taylor(delta: f64, kap: Complex64, al: f64) -> (Complex64, Complex64) {
    let z = kap * al;
    let mut x = [Complex64::new(0.0, 0.0); TAYLOR_TERMS + 1];
    x[0] = erfcx(z);
    x[1] = 2.0 * z * x[0] - 2.0 / SQRT_PI;
    for k in 1..TAYLOR_TERMS {
        x[k + 1] = 2.0 * z * x[k] + 2.0 * k as f64 * x[k - 1];
    }
    // Q⁽ᵏ⁾(α̃) for Q(p) = pX(κp)
    let mut n = Complex64::new(0.0, 0.0);
    let mut dn = Complex64::new(0.0, 0.0);
    let mut kpow = Complex64::new(1.0, 0.0);
    let mut fact = 1.0;
    for k in 1..=TAYLOR_TERMS {
        let prev = kpow;
        kpow *= kap;
        fact *= k as f64;
        let q = al * kpow * x[k] + k as f64 * prev * x[k - 1];
        n += q * delta.powi(k as i32 - 1) / fact;
        if k >= 2 {
            dn += q * (k as f64 - 1.0) * delta.powi(k as i32 - 2) / fact;
        }
    }
    let den = 2.0 * al + delta;
    (n / den, dn / den - n / (den * den))
}

fn bracket_asymptotic(p: f64, t: f64, dp: &DeltaParams) -> (Complex64, Complex64) {
    let al = dp.alpha();
    let kap = kappa(t, dp.m);
    let s = Complex64::new(0.0, dp.m / t);
    let sp = s / (p * p);
    let sa = s / (al * al);
    let pref = -1.0 / (kap * SQRT_PI) / (al * al);
    // S̃ₖ = Σ_{j<k} (sP)^{k−j}(sA)^j and D̃ₖ = Σ_{j<k} (k−j)(sP)^{k−j}(sA)^j
    let mut sk = sp;
    let mut dk = sp;
    let mut sa_pow = Complex64::new(1.0, 0.0);
    let mut coef = -1.0;
    let mut sum = Complex64::new(0.0, 0.0);
    let mut dsum = Complex64::new(0.0, 0.0);
    let mut last = f64::INFINITY;
    for k in 1..200usize {
        let term = sk * coef;
        let mag = term.norm();
        if mag > last {
            break;
        }
        sum += term;
        dsum += dk * coef;
        if mag < 1e-17 * sum.norm() {
            break;
        }
        last = mag;
        sa_pow *= sa;
        let next_s = sp * sk + sp * sa_pow;
        dk = sp * (dk + sk) + sp * sa_pow;
        sk = next_s;
        coef *= -(2.0 * k as f64 + 1.0);
    }
    (pref * sum, pref * dsum * (-2.0 / p))
}

/// Rotated bracket U = T e^{−iφ} + α̃K = (T + R̃)e^{−iφ}, φ = tp²/2m, with U and its parts.
struct Rotated {
    t_amp: f64,
    k: Complex64,
    dk: Complex64,
    phase: f64,
}

impl Rotated {
    fn new(p: f64, t: f64, dp: &DeltaParams) -> Rotated {
        let q = p.abs();
        let phase = t * q * q / (2.0 * dp.m);
        if dp.alpha() == 0.0 {
            let z = Complex64::new(0.0, 0.0);
            return Rotated { t_amp: 1.0, k: z, dk: z, phase };
        }
        let (k, dk) = bracket_k(q, t, dp);
        Rotated { t_amp: transmission_t(q, dp), k, dk, phase }
    }

    fn u(&self, al: f64) -> Complex64 {
        Complex64::from_polar(self.t_amp, -self.phase) + self.k * al
    }
}

/// R̃_p(t); at t = 0 this is α̃/(|p| + α̃).
pub fn remainder_r(p: f64, t: f64, dp: &DeltaParams) -> Complex64 {
    if dp.alpha() == 0.0 {
        return Complex64::new(0.0, 0.0);
    }
    let r = Rotated::new(p, t, dp);
    r.k * dp.alpha() * Complex64::from_polar(1.0, r.phase)
}

/// f_p(t) = (2π)^{−1/2}(T_p + R̃_p(t))e^{−itp²/2m}.
pub fn f_p(p: f64, t: f64, dp: &DeltaParams) -> Complex64 {
    Rotated::new(p, t, dp).u(dp.alpha()) / TWO_PI.sqrt()
}

/// Kernel solution e^{d²t}erfc(d√t) of the constant-drive renewal equation.
pub fn kernel_g(t: f64, dp: &DeltaParams) -> Complex64 {
    erfcx(dp.d() * t.sqrt())
}

/// ω(t) = a r₀|T + R̃|² for a beam of momentum p₀.
pub fn beam_intensity(t: f64, p0: f64, r0: f64, dp: &DeltaParams) -> f64 {
    dp.a * r0 * Rotated::new(p0, t, dp).u(dp.alpha()).norm_sqr()
}

/// (ω, ∂ω/∂p₀) for a beam, the derivative taken analytically.
pub fn beam_intensity_and_dp(t: f64, p0: f64, r0: f64, dp: &DeltaParams) -> (f64, f64) {
    let al = dp.alpha();
    let r = Rotated::new(p0, t, dp);
    let u = r.u(al);
    let q = p0.abs();
    let d_t = if al == 0.0 { 0.0 } else { al / ((q + al) * (q + al)) };
    let d_phase = t * q / dp.m;
    let rot = Complex64::from_polar(1.0, -r.phase);
    let lin = (u.conj() * (rot * d_t + r.dk * al)).re;
    let cross = d_phase * r.t_amp * al * (r.k * rot.conj()).im;
    let w = dp.a * r0;
    let sign = if p0 < 0.0 { -1.0 } else { 1.0 };
    (w * u.norm_sqr(), sign * 2.0 * w * (lin - cross))
}

/// ∂ω/∂p₀ for a beam.
pub fn beam_intensity_dp(t: f64, p0: f64, r0: f64, dp: &DeltaParams) -> f64 {
    beam_intensity_and_dp(t, p0, r0, dp).1
}

/// Beam intensity split into stationary, oscillating and non-oscillating parts:
/// ω = ω∞ + Re(e^{iφ}g0) + n0 and ∂ω/∂p₀ = ω̇∞ + Re(e^{iφ}g1) + n1, with φ = tp₀²/2m.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BeamParts {
    pub phase: f64,
    pub g0: Complex64,
    pub g1: Complex64,
    pub n0: f64,
    pub n1: f64,
}

pub fn beam_parts(t: f64, p0: f64, r0: f64, dp: &DeltaParams) -> BeamParts {
    let al = dp.alpha();
    let r = Rotated::new(p0, t, dp);
    let q = p0.abs();
    let d_t = if al == 0.0 { 0.0 } else { al / ((q + al) * (q + al)) };
    let d_phase = t * q / dp.m;
    let w = dp.a * r0;
    let sign = if p0 < 0.0 { -1.0 } else { 1.0 };
    let tt = r.t_amp;
    let i = Complex64::new(0.0, 1.0);
    BeamParts {
        phase: r.phase,
        g0: r.k * (2.0 * w * tt * al),
        g1: (r.dk * tt + r.k * d_t + i * r.k * (d_phase * tt)) * (sign * 2.0 * w * al),
        n0: w * al * al * r.k.norm_sqr(),
        n1: sign * 2.0 * w * al * al * (r.k.conj() * r.dk).re,
    }
}

/// Stationary values and short-time coefficients of the beam intensity.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BeamAsymptotes {
    pub omega_inf: f64,
    pub domega_inf: f64,
    /// ω(t) ≈ c0 + c_half·√t for small t.
    pub c0: f64,
    pub c_half: f64,
    /// ∂ω/∂p₀ ≈ d_three_half·t^{3/2} for small t.
    pub d_three_half: f64,
}

pub fn beam_asymptotes(p0: f64, r0: f64, dp: &DeltaParams) -> BeamAsymptotes {
    let a = dp.a;
    let m = dp.m;
    let al = dp.alpha();
    let w = a * r0;
    let s = al + p0;
    BeamAsymptotes {
        omega_inf: w * p0 * p0 / (s * s),
        domega_inf: w * a * m * p0 / (s * s * s),
        c0: w,
        c_half: -w * a * m / (m * std::f64::consts::PI).sqrt(),
        d_three_half: -w * a * m * p0 / (3.0 * SQRT_PI * m.powf(1.5)),
    }
}

/// Free evolution of a Gaussian packet, evaluated at the origin: (2π)^{−1/2}∫e^{−itp²/2m}χ̂(p)dp.
pub fn gaussian_free_at_origin(pk: &GaussianPacket, t: f64, m: f64) -> Complex64 {
    let a = Complex64::new(0.25 / (pk.dp * pk.dp), 0.5 * t / m);
    gaussian_moment(pk, a) / TWO_PI.sqrt()
}

/// ∫e^{−Ap² + Bp + C}dp · normalization of χ̂, with B, C fixed by the packet.
pub(crate) fn gaussian_moment(pk: &GaussianPacket, a: Complex64) -> Complex64 {
    let b = Complex64::new(pk.p0 / (2.0 * pk.dp * pk.dp), -pk.x0);
    let c = -pk.p0 * pk.p0 / (4.0 * pk.dp * pk.dp);
    let norm = 1.0 / (pk.dp.sqrt() * TWO_PI.sqrt().sqrt());
    (Complex64::from(std::f64::consts::PI) / a).sqrt() * (b * b / (4.0 * a) + c).exp() * norm
}

/// Break points on [lo, hi] keeping the phase change per panel near 2π.
fn phase_breaks(lo: f64, hi: f64, x0: f64, t: f64, m: f64, extra: &[f64]) -> Vec<f64> {
    let mut pts = vec![lo];
    let mut p = lo;
    while p < hi {
        let rate = x0.abs() + t * p.abs().max((p + 1.0).abs().min(hi.abs())) / m + 1.0;
        let step = (TWO_PI / rate).min(hi - lo);
        p = (p + step).min(hi);
        pts.push(p);
    }
    for &e in extra {
        if e > lo && e < hi {
            pts.push(e);
        }
    }
    pts.sort_by(f64::total_cmp);
    pts.dedup();
    pts
}

/// f(t) = ∫f_p(t)χ̂(p)dp over [lo, hi] for a general momentum amplitude.
/// `x0` is the spatial offset that drives the e^{−ipx₀} oscillation of χ̂.
pub fn f_superposition<F: Fn(f64) -> Complex64>(
    chi_hat: F,
    lo: f64,
    hi: f64,
    x0: f64,
    t: f64,
    dp: &DeltaParams,
    opts: QuadOpts,
) -> Result<Complex64> {
    let al = dp.alpha();
    let breaks = phase_breaks(lo, hi, x0, t, dp.m, &[0.0, al, -al]);
    let r = integrate(|p| f_p(p, t, dp) * chi_hat(p), &breaks, opts)?;
    Ok(r.value)
}

/// Delta-detector solution for a Gaussian packet: closed-form free part plus the
/// quadrature of the detector correction on p₀ ± 10Δp.
pub fn f_gaussian(pk: &GaussianPacket, t: f64, dp: &DeltaParams, opts: QuadOpts) -> Result<Complex64> {
    Ok(f_gaussian_shifted(pk, t, dp, &[0.0], opts)?[0])
}

/// [`f_gaussian`] at momenta p₀ + s for each shift s, integrated on one shared partition.
pub fn f_gaussian_shifted<const K: usize>(
    pk: &GaussianPacket,
    t: f64,
    dp: &DeltaParams,
    shifts: &[f64; K],
    opts: QuadOpts,
) -> Result<[Complex64; K]> {
    let al = dp.alpha();
    let smin = shifts.iter().cloned().fold(f64::INFINITY, f64::min);
    let smax = shifts.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let lo = pk.p0 + smin - 10.0 * pk.dp;
    let hi = pk.p0 + smax + 10.0 * pk.dp;
    let packets: Vec<GaussianPacket> = shifts.iter().map(|s| GaussianPacket { p0: pk.p0 + s, ..*pk }).collect();
    let mut out = [Complex64::new(0.0, 0.0); K];
    if al > 0.0 {
        let breaks = phase_breaks(lo, hi, pk.x0, t, dp.m, &[0.0, al, -al]);
        let corr = integrate(
            |p| {
                let r = Rotated::new(p, t, dp);
                // U − e^{−iφ} = α̃K − α̃e^{−iφ}/(|p|+α̃)
                let c = (r.k - Complex64::from_polar(1.0 / (p.abs() + al), -r.phase)) * al;
                let mut v = CVec([Complex64::new(0.0, 0.0); K]);
                for (slot, q) in v.0.iter_mut().zip(&packets) {
                    *slot = c * q.chi_hat(p);
                }
                v
            },
            &breaks,
            opts,
        )?;
        for (o, c) in out.iter_mut().zip(corr.value.0) {
            *o = c / TWO_PI.sqrt();
        }
    }
    for (o, q) in out.iter_mut().zip(&packets) {
        *o += gaussian_free_at_origin(q, t, dp.m);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn dp01() -> DeltaParams {
        DeltaParams::new(0.1, 1.0).unwrap()
    }

    /// Direct evaluation of the printed remainder with plain erfc, valid away from |p| = α̃
    /// and for moderate t.
    fn remainder_oracle(p: f64, t: f64, dp: &DeltaParams) -> Complex64 {
        let al = dp.alpha();
        let m = dp.m;
        let i = Complex64::i();
        let w = Complex64::from_polar(1.0, -std::f64::consts::FRAC_PI_4) * (t / (2.0 * m)).sqrt();
        let ea = (-i * al * al * t / (2.0 * m)).exp() * erfc(w * al);
        let ep = (-i * p * p * t / (2.0 * m)).exp() * erfc(w * p);
        (al / (p * p - al * al)) * (p * ep - al * ea) * (i * p * p * t / (2.0 * m)).exp()
    }

    #[test]
    fn params() {
        let d = dp01();
        assert!((d.alpha() - 0.05).abs() < 1e-17);
        assert!((d.d().arg() + std::f64::consts::FRAC_PI_4).abs() < 1e-15);
        assert!(DeltaParams::new(0.1, 0.0).is_err());
    }

    #[test]
    fn transmission_values() {
        let d = dp01();
        assert!((transmission_t(0.05, &d) - 0.5).abs() < 1e-15);
        assert_eq!(transmission_t(0.0, &d), 0.0);
        assert!((transmission_t(1.0, &d) - 1.0 / 1.05).abs() < 1e-15);
        assert!((transmission_t(-1.0, &d) - 1.0 / 1.05).abs() < 1e-15);
    }

    #[test]
    fn remainder_at_zero_time() {
        let d = dp01();
        for p in [0.01, 0.05, 0.3, 1.0, 7.0] {
            let r = remainder_r(p, 0.0, &d);
            assert!((r - Complex64::new(0.05 / (p + 0.05), 0.0)).norm() < 1e-14);
            assert!((r.re + transmission_t(p, &d) - 1.0).abs() < 1e-14);
        }
    }

    #[test]
    fn remainder_matches_printed_form() {
        let d = dp01();
        for &p in &[0.02, 0.2, 1.0, 3.0] {
            for &t in &[0.01, 0.5, 3.0, 20.0, 60.0] {
                let got = remainder_r(p, t, &d);
                let want = remainder_oracle(p, t, &d);
                assert!((got - want).norm() < 1e-10 * want.norm().max(1e-3), "p={p} t={t}: {got} vs {want}");
            }
        }
    }

    #[test]
    fn remainder_removable_singularity() {
        let d = dp01();
        let al = d.alpha();
        for &t in &[0.0, 1.0, 50.0, 400.0] {
            let mid = remainder_r(al, t, &d);
            let lo = remainder_r(al * (1.0 - 1e-6), t, &d);
            let hi = remainder_r(al * (1.0 + 1e-6), t, &d);
            assert!((mid - 0.5 * (lo + hi)).norm() < 1e-9, "t={t}");
            assert!((mid - lo).norm() < 1e-6 && (mid - hi).norm() < 1e-6, "t={t}");
        }
        // Taylor and direct branches meet at the band edge
        for &t in &[0.3, 30.0] {
            for &rel in &[-0.999e-3, 0.999e-3] {
                let p = al * (1.0 + rel);
                let kap = kappa(t, d.m);
                let direct = (erfcx(kap * p) * p - erfcx(kap * al) * al) / (p * p - al * al);
                let (taylor, _) = bracket_taylor(p - al, kap, al);
                assert!((taylor - direct).norm() < 1e-9 * direct.norm(), "t={t}");
            }
        }
    }

    #[test]
    fn asymptotic_and_direct_branches_agree() {
        let d = DeltaParams::new(1.0, 1.0).unwrap();
        // α̃ = 0.5, switch at t = 80·m/α̃² = 320
        for &t in &[319.0, 321.0] {
            for &p in &[0.7, 2.0] {
                let (k, dk) = bracket_k(p, t, &d);
                let kap = kappa(t, d.m);
                let al = d.alpha();
                let k_direct = (erfcx(kap * p) * p - erfcx(kap * al) * al) / (p * p - al * al);
                assert!((k - k_direct).norm() < 1e-11 * k.norm(), "t={t} p={p}");
                let h = 1e-6;
                let fd = (bracket_k(p + h, t, &d).0 - bracket_k(p - h, t, &d).0) / (2.0 * h);
                assert!((dk - fd).norm() < 1e-6 * dk.norm(), "t={t} p={p}: {dk} vs {fd}");
            }
        }
    }

    #[test]
    fn remainder_decays_like_t_three_halves() {
        let d = DeltaParams::new(1.0, 1.0).unwrap();
        let ts: Vec<f64> = (0..=20).map(|i| 10f64.powf(2.0 + 0.1 * i as f64)).collect();
        let ys: Vec<f64> = ts.iter().map(|&t| remainder_r(1.0, t, &d).norm().ln()).collect();
        let xs: Vec<f64> = ts.iter().map(|t| t.ln()).collect();
        let n = xs.len() as f64;
        let mx = xs.iter().sum::<f64>() / n;
        let my = ys.iter().sum::<f64>() / n;
        let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
        let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
        let slope = sxy / sxx;
        assert!((slope + 1.5).abs() < 0.05, "slope {slope}");
    }

    #[test]
    fn f_p_limits() {
        let d = dp01();
        let f0 = f_p(1.3, 0.0, &d);
        assert!((f0 - Complex64::new(1.0 / TWO_PI.sqrt(), 0.0)).norm() < 1e-15);
        let d0 = DeltaParams::new(0.0, 1.0).unwrap();
        let t = 7.0;
        let free = Complex64::from_polar(1.0 / TWO_PI.sqrt(), -t * 0.5);
        assert!((f_p(1.0, t, &d0) - free).norm() < 1e-15);
        let tiny = DeltaParams::new(1e-9, 1.0).unwrap();
        assert!((f_p(1.0, t, &tiny) - free).norm() < 1e-8);
    }

    #[test]
    fn bracket_is_bounded() {
        let d = dp01();
        for &p in &[0.01, 0.05, 0.2, 1.0, 5.0] {
            for i in 0..200 {
                let t = 0.05 * (1.1f64).powi(i);
                let u = Rotated::new(p, t, &d).u(d.alpha()).norm();
                assert!(u <= 1.2, "p={p} t={t}: {u}");
            }
        }
    }

    #[test]
    fn beam_values() {
        let d = dp01();
        assert!((beam_intensity(0.0, 1.0, 56.42, &d) - 5.642).abs() < 1e-12);
        let asy = beam_asymptotes(1.0, 56.42, &d);
        assert!((asy.omega_inf - 5.642 / 1.1025).abs() < 1e-12);
        assert!((asy.omega_inf - 5.12).abs() < 0.01);
        let big = beam_asymptotes(1e6, 56.42, &d);
        assert!((big.omega_inf - 5.642).abs() < 1e-5);
        let far = beam_intensity(1e7, 1.0, 56.42, &d);
        assert!((far - asy.omega_inf).abs() < 1e-6);
    }

    #[test]
    fn beam_parts_reassemble() {
        let d = dp01();
        for &p in &[1.0f64, -0.7, 0.05] {
            let asy = beam_asymptotes(p.abs(), 2.0, &d);
            let sign = p.signum();
            for &t in &[0.01, 3.0, 250.0, 4e4] {
                let (w, dw) = beam_intensity_and_dp(t, p, 2.0, &d);
                let s = beam_parts(t, p, 2.0, &d);
                let rot = Complex64::from_polar(1.0, s.phase);
                let w2 = asy.omega_inf + (rot * s.g0).re + s.n0;
                let dw2 = sign * asy.domega_inf + (rot * s.g1).re + s.n1;
                assert!((w - w2).abs() < 1e-13 * w.abs().max(1.0), "p={p} t={t}");
                assert!((dw - dw2).abs() < 1e-12 * dw.abs().max(1.0), "p={p} t={t}");
            }
        }
    }

    #[test]
    fn beam_envelope() {
        let d = dp01();
        let asy = beam_asymptotes(1.0, 56.42, &d);
        let mut c: f64 = 0.0;
        for i in 0..=40 {
            let t = 10f64.powf(2.0 + 0.05 * i as f64);
            c = c.max((beam_intensity(t, 1.0, 56.42, &d) - asy.omega_inf).abs() * t.powf(1.5));
        }
        let t = 1e3;
        assert!((beam_intensity(t, 1.0, 56.42, &d) - asy.omega_inf).abs() <= c * t.powf(-1.5));
        assert!(c.is_finite() && c > 0.0);
    }

    #[test]
    fn beam_small_t_coefficients() {
        let d = dp01();
        let asy = beam_asymptotes(1.0, 56.42, &d);
        let t: f64 = 1e-8;
        let w = beam_intensity(t, 1.0, 56.42, &d);
        let c_half = (w - asy.c0) / t.sqrt();
        assert!((c_half - asy.c_half).abs() < 1e-3 * asy.c_half.abs());
        let dw = beam_intensity_dp(1e-6, 1.0, 56.42, &d);
        let lead = asy.d_three_half * 1e-9;
        assert!((dw - lead).abs() < 1e-2 * lead.abs(), "{dw} vs {lead}");
        assert!(beam_intensity_dp(0.0, 1.0, 56.42, &d).abs() < 1e-14);
    }

    #[test]
    fn derivative_matches_central_differences() {
        let d = dp01();
        let h = 1e-5;
        for i in 0..=60 {
            let t = 0.1 * 1000f64.powf(i as f64 / 60.0);
            let an = beam_intensity_dp(t, 1.0, 56.42, &d);
            let fd = (beam_intensity(t, 1.0 + h, 56.42, &d) - beam_intensity(t, 1.0 - h, 56.42, &d)) / (2.0 * h);
            assert!((an - fd).abs() <= 1e-6 * an.abs().max(1e-3), "t={t}: {an} vs {fd}");
        }
    }

    #[test]
    fn kernel_at_zero() {
        let d = dp01();
        assert!((kernel_g(0.0, &d) - Complex64::new(1.0, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn gaussian_free_matches_quadrature() {
        let pk = GaussianPacket { p0: 1.0, x0: -20.0, dp: 0.5f64.sqrt() };
        let t = 20.0;
        let opts = QuadOpts { abs_tol: 1e-15, rel_tol: 1e-13, max_segments: 20000 };
        let breaks = phase_breaks(-7.0, 9.0, -20.0, t, 1.0, &[]);
        let q = integrate(
            |p| Complex64::from_polar(1.0, -t * p * p / 2.0) * pk.chi_hat(p) / TWO_PI.sqrt(),
            &breaks,
            opts,
        )
        .unwrap();
        let cf = gaussian_free_at_origin(&pk, t, 1.0);
        assert!((q.value - cf).norm() < 1e-10 * cf.norm());
    }

    #[test]
    fn superposition_of_zero_is_zero() {
        let d = dp01();
        let v = f_superposition(|_| Complex64::new(0.0, 0.0), -1.0, 3.0, -20.0, 5.0, &d, QuadOpts::default()).unwrap();
        assert_eq!(v, Complex64::new(0.0, 0.0));
    }

    #[test]
    fn narrow_packet_is_monochromatic() {
        let d = dp01();
        let pk = GaussianPacket { p0: 1.0, x0: 0.0, dp: 1e-3 };
        let t = 20.0;
        let f = f_gaussian(&pk, t, &d, QuadOpts::default()).unwrap();
        // ∫χ̂ dp = √(4πΔp²)/(√Δp(2π)^{1/4})
        let mass = (4.0 * std::f64::consts::PI * pk.dp * pk.dp).sqrt() / (pk.dp.sqrt() * TWO_PI.sqrt().sqrt());
        let mono = f_p(1.0, t, &d) * mass;
        assert!((f - mono).norm() < 1e-3 * mono.norm(), "{f} vs {mono}");
    }

    #[test]
    fn split_quadrature_matches_plain_superposition() {
        let d = dp01();
        let pk = GaussianPacket { p0: 1.0, x0: -20.0, dp: 0.5f64.sqrt() };
        let opts = QuadOpts { abs_tol: 1e-14, rel_tol: 1e-11, max_segments: 20000 };
        for &t in &[5.0, 20.0, 40.0] {
            let a = f_gaussian(&pk, t, &d, opts).unwrap();
            let b = f_superposition(|p| pk.chi_hat(p), pk.p0 - 10.0 * pk.dp, pk.p0 + 10.0 * pk.dp, pk.x0, t, &d, opts)
                .unwrap();
            assert!((a - b).norm() < 1e-8 * a.norm(), "t={t}: {a} vs {b}");
        }
    }
}
