//! Fisher information of p₀ carried by n arrival times.

use std::io::Write;
use std::sync::atomic::{AtomicUsize, Ordering};

use rayon::prelude::*;

use crate::deltakernel::DeltaParams;
use crate::error::{Error, Result};
use crate::intensity::{build_profile, build_profile_with, IntensityProfile, ProfileOpts};
use crate::process::{
    log_joint_density, noevent_mass, record_rng, sample_record, total_prob_dp, ArrivalRecord,
};
use crate::quad::{integrate, integrate_to_infinity, QuadOpts};
use crate::scenario::{ln_factorial, FamilyKind, Scenario, StateFamily};

/// Fisher information I_n and its parts.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FisherReport {
    pub n: u32,
    pub i_n: f64,
    /// Integral over detection sequences.
    pub detection_part: f64,
    /// (dp_n^tot/dp₀)²/(1 − p_n^tot).
    pub noevent_part: f64,
    pub p_n_tot: f64,
    pub dp_n_tot: f64,
    /// 1 − p_n^tot evaluated directly.
    pub p_none: f64,
    pub i_n_conditional: f64,
    /// Quadrature error estimate of the detection part.
    pub error: f64,
    /// Integrand nodes where ω ≤ 0.
    pub warnings: usize,
}

impl FisherReport {
    /// I_n recomposed from the conditional information and the no-event term.
    pub fn recompose(&self) -> f64 {
        let p = self.p_n_tot;
        if self.p_none == 0.0 {
            return p * self.i_n_conditional;
        }
        p * self.i_n_conditional + self.dp_n_tot * self.dp_n_tot / (p * self.p_none)
    }
}

/// Quadrature controls for [`fisher_info_with`].
#[derive(Debug, Clone, Copy)]
pub struct FisherOpts {
    pub quad: QuadOpts,
}

impl Default for FisherOpts {
    fn default() -> Self {
        FisherOpts { quad: QuadOpts { abs_tol: 1e-300, rel_tol: 1e-9, max_segments: 20000 } }
    }
}

pub fn fisher_info(n: u32, family: &StateFamily, profile: &IntensityProfile) -> Result<FisherReport> {
    fisher_info_with(n, family, profile, FisherOpts::default())
}

/// I_n = (1/(n−1)!)∫du Fₙ(u)u^{n−1}Sₙ + (dp_n^tot/dp₀)²/(1 − p_n^tot), with u = Ω(t).
pub fn fisher_info_with(n: u32, family: &StateFamily, profile: &IntensityProfile, opts: FisherOpts) -> Result<FisherReport> {
    if n == 0 {
        return Err(Error::Domain("n must be >= 1".into()));
    }
    let upper = profile.omega_total();
    if upper > family.omega_domain() {
        return Err(Error::Unsupported("a Fock family needs Omega(inf) <= N".into()));
    }
    let warnings = AtomicUsize::new(0);
    let nf = n as f64;
    let lf = ln_factorial(n - 1);
    let integrand = |u: f64| -> f64 {
        if !(u > 0.0) || u >= upper {
            return 0.0;
        }
        let lw = family.log_f_n(n, u).unwrap_or(f64::NEG_INFINITY) + (nf - 1.0) * u.ln() - lf;
        if lw == f64::NEG_INFINITY {
            return 0.0;
        }
        let Ok(pt) = profile.point_at_u(u) else { return 0.0 };
        if !(pt.omega > 0.0) {
            warnings.fetch_add(1, Ordering::Relaxed);
            return 0.0;
        }
        let h = family.h_n(n, u).unwrap_or(0.0);
        let w = pt.big_omega;
        let lead = ((nf - 1.0) - u * h) * pt.dbig_omega / w + pt.domega / pt.omega;
        let s = lead * lead + (nf - 1.0) * pt.spread / (w * w);
        lw.exp() * s
    };
    // beyond the table of a beam, ∫g(∂ω/∂p₀/ω)²du and the cross term are integrated by parts
    // against the running integrals, with g = Fₙuⁿ⁻¹/(n−1)! and g'/g = A = (n−1)/u − Hₙ
    let end = profile.point(profile.t_tab());
    let secular_from = profile.secular_at_u(end.big_omega).map(|p| p.big_omega);
    let tail_integrand = |u: f64| -> f64 {
        let lw = family.log_f_n(n, u).unwrap_or(f64::NEG_INFINITY) + (nf - 1.0) * u.ln() - lf;
        if lw == f64::NEG_INFINITY {
            return 0.0;
        }
        let Some(pt) = profile.secular_at_u(u) else { return 0.0 };
        let start = &end;
        let h = family.h_n(n, u).unwrap_or(0.0);
        let h1 = family.h_n(n + 1, u).unwrap_or(0.0);
        let a = (nf - 1.0) / u - h;
        let da = -(nf - 1.0) / (u * u) - h * (h - h1);
        let (d0, dd) = (start.dbig_omega, pt.dbig_omega);
        let s = (a * a + da) * d0 * d0 - da * dd * dd - a * (pt.tilde - start.tilde) + (nf - 1.0) * pt.spread / (u * u);
        lw.exp() * s
    };
    let u_tab = profile.big_omega(profile.t_tab());
    let split = secular_from.unwrap_or(f64::INFINITY);
    let mut breaks: Vec<f64> = vec![0.0];
    let mut b = nf / 64.0;
    let stop = if upper.is_finite() { upper } else { u_tab.max(16.0 * nf) };
    while b < stop {
        breaks.push(b);
        b *= 2.0;
    }
    if u_tab > 0.0 && u_tab < stop {
        breaks.push(u_tab);
    }
    breaks.push(stop);
    breaks.sort_by(f64::total_cmp);
    breaks.dedup();
    let head_breaks: Vec<f64> = breaks.iter().copied().filter(|&x| x <= split).collect();
    let tail_breaks: Vec<f64> = breaks.iter().copied().filter(|&x| x >= split).collect();
    let (mut detection_part, mut error) = (0.0, 0.0);
    if head_breaks.len() >= 2 {
        let head = integrate(integrand, &head_breaks, opts.quad)?;
        detection_part += head.value;
        error += head.error;
    }
    if tail_breaks.len() >= 2 {
        let mid = integrate(tail_integrand, &tail_breaks, opts.quad)?;
        detection_part += mid.value;
        error += mid.error;
    }
    if upper.is_infinite() {
        let rest = if secular_from.is_some() {
            integrate_to_infinity(tail_integrand, stop, stop, opts.quad)?
        } else {
            integrate_to_infinity(integrand, stop, stop, opts.quad)?
        };
        detection_part += rest.value;
        error += rest.error;
    }
    let p_none = noevent_mass(n, family, upper)?;
    let p_n_tot = 1.0 - p_none;
    let dp_n_tot = total_prob_dp(n, family, profile)?;
    let noevent_part = if p_none > 0.0 { dp_n_tot * dp_n_tot / p_none } else { 0.0 };
    let i_n = detection_part + noevent_part;
    let mut rep = FisherReport {
        n,
        i_n,
        detection_part,
        noevent_part,
        p_n_tot,
        dp_n_tot,
        p_none,
        i_n_conditional: 0.0,
        error,
        warnings: warnings.into_inner(),
    };
    rep.i_n_conditional = fisher_conditional(&rep)?;
    Ok(rep)
}

/// I_n^(c) = (I_n − (dp_n^tot/dp₀)²/(p_n^tot(1 − p_n^tot)))/p_n^tot.
pub fn fisher_conditional(rep: &FisherReport) -> Result<f64> {
    let p = rep.p_n_tot;
    if !(p > 0.0) {
        return Err(Error::Domain("conditional information needs p_n_tot > 0".into()));
    }
    if rep.p_none == 0.0 {
        return Ok(rep.i_n / p);
    }
    Ok((rep.i_n - rep.dp_n_tot * rep.dp_n_tot / (p * rep.p_none)) / p)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StationaryConstants {
    pub n: u32,
    pub c_n: f64,
}

/// C⁽ⁿ⁾ = (1/(n−1)!)∫₀^∞ Fₙ(u)u^{n−1}[n − uHₙ(u)]²du by quadrature.
pub fn stationary_constant(n: u32, family: &StateFamily) -> Result<StationaryConstants> {
    if n == 0 {
        return Err(Error::Domain("n must be >= 1".into()));
    }
    let nf = n as f64;
    let lf = ln_factorial(n - 1);
    let top = family.omega_domain();
    let f = |u: f64| -> f64 {
        if !(u > 0.0) || u >= top {
            return 0.0;
        }
        let l = family.log_f_n(n, u).unwrap_or(f64::NEG_INFINITY);
        if l == f64::NEG_INFINITY {
            return 0.0;
        }
        let d = nf - u * family.h_n(n, u).unwrap_or(0.0);
        (l + (nf - 1.0) * u.ln() - lf).exp() * d * d
    };
    let opts = QuadOpts { abs_tol: 1e-300, rel_tol: 1e-13, max_segments: 4000 };
    let c_n = if top.is_finite() {
        integrate(f, &[0.0, 0.5 * nf.min(top), nf.min(top), top], opts)?.value
    } else {
        let head = integrate(f, &[0.0, 0.5 * nf, nf], opts)?.value;
        head + integrate_to_infinity(f, nf, nf + 2.0, opts)?.value
    };
    Ok(StationaryConstants { n, c_n })
}

/// Closed forms of C⁽ⁿ⁾: n (coherent) and n/(n+2) (quasi-free).
pub fn stationary_constant_closed(n: u32, kind: FamilyKind) -> Option<f64> {
    let nf = n as f64;
    match kind {
        FamilyKind::Coherent => Some(nf),
        FamilyKind::QuasiFree => Some(nf / (nf + 2.0)),
        FamilyKind::Fock => None,
    }
}

/// I_∞(p₀) = a²m²/(p₀²(p₀ + am/2)²).
pub fn i_inf(p0: f64, dp: &DeltaParams) -> f64 {
    let am = dp.a * dp.m;
    let s = p0 * (p0 + 0.5 * am);
    am * am / (s * s)
}

/// Sparse-beam limit C⁽ⁿ⁾·I_∞(p₀).
pub fn sparse_limit_i(n: u32, kind: FamilyKind, p0: f64, dp: &DeltaParams) -> Result<f64> {
    match stationary_constant_closed(n, kind) {
        Some(c) => Ok(c * i_inf(p0, dp)),
        None => Err(Error::Unsupported("the sparse-beam limit is derived for coherent and quasi-free sources".into())),
    }
}

/// Monte Carlo estimate of the score variance.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct McEstimate {
    pub variance: f64,
    /// Jackknife standard error of `variance`.
    pub std_error: f64,
    pub mean_score: f64,
    /// Standard error of `mean_score`.
    pub mean_std_error: f64,
    pub samples: usize,
    /// Records redrawn because a likelihood vanished.
    pub resampled: usize,
}

/// Controls for [`mc_score_variance`].
#[derive(Debug, Clone, Copy)]
pub struct McOpts {
    pub samples: usize,
    pub seed: u64,
    /// Step of the central difference in p₀.
    pub h: f64,
    pub profile: ProfileOpts,
}

impl Default for McOpts {
    fn default() -> Self {
        McOpts { samples: 100_000, seed: 1, h: 1e-3, profile: ProfileOpts::default() }
    }
}

/// Log-likelihood of one record: ln pₙ(t) for complete records, ln(1 − p_n^tot) for NO-events.
pub fn log_likelihood(rec: &ArrivalRecord, n: u32, family: &StateFamily, profile: &IntensityProfile) -> Result<f64> {
    if rec.terminated {
        Ok(noevent_mass(n, family, profile.omega_total())?.ln())
    } else {
        log_joint_density(&rec.times, family, profile)
    }
}

/// Sample variance of the central-difference score over records drawn at p₀, with its jackknife error.
pub fn mc_score_variance(n: u32, family: &StateFamily, scn: &Scenario, opts: McOpts) -> Result<McEstimate> {
    if opts.samples < 3 {
        return Err(Error::Domain("at least three samples are required".into()));
    }
    let h = opts.h;
    let profiles = [scn.p0, scn.p0 - h, scn.p0 + h]
        .par_iter()
        .map(|&p| build_profile_with(&scn.with_p0(p), &opts.profile))
        .collect::<Result<Vec<_>>>()?;
    let (base, lo, hi) = (&profiles[0], &profiles[1], &profiles[2]);
    let resampled = AtomicUsize::new(0);
    let count = opts.samples as u64;
    let scores = (0..count)
        .into_par_iter()
        .map(|i| -> Result<f64> {
            for attempt in 0..64u64 {
                let mut rng = record_rng(opts.seed, i + attempt * count);
                let rec = sample_record(n, family, base, &mut rng)?;
                let s = (log_likelihood(&rec, n, family, hi)? - log_likelihood(&rec, n, family, lo)?) / (2.0 * h);
                if s.is_finite() {
                    return Ok(s);
                }
                resampled.fetch_add(1, Ordering::Relaxed);
            }
            Err(Error::Domain("likelihood vanished on 64 consecutive draws".into()))
        })
        .collect::<Result<Vec<f64>>>()?;
    Ok(variance_with_jackknife(&scores, resampled.into_inner()))
}

/// Unbiased variance of `xs` with the leave-one-out jackknife error.
pub fn variance_with_jackknife(xs: &[f64], resampled: usize) -> McEstimate {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let ss: f64 = xs.iter().map(|x| (x - mean) * (x - mean)).sum();
    let variance = ss / (n - 1.0);
    // leave-one-out: ss_(i) = ss − (x_i − mean)²·n/(n−1)
    let loo: Vec<f64> = xs.iter().map(|x| (ss - (x - mean) * (x - mean) * n / (n - 1.0)) / (n - 2.0)).collect();
    let lbar = loo.iter().sum::<f64>() / n;
    let jk = (loo.iter().map(|v| (v - lbar) * (v - lbar)).sum::<f64>() * (n - 1.0) / n).sqrt();
    McEstimate {
        variance,
        std_error: jk,
        mean_score: mean,
        mean_std_error: (variance / n).sqrt(),
        samples: xs.len(),
        resampled,
    }
}

/// Fisher information on an (n, r₀) grid for a beam; r₀ = 0 entries use the sparse limit.
#[derive(Debug, Clone, PartialEq)]
pub struct DensitySweep {
    pub kind: FamilyKind,
    pub n_list: Vec<u32>,
    pub r0_list: Vec<f64>,
    /// values[i][j] = I_{n_i} at r0_j.
    pub values: Vec<Vec<f64>>,
}

impl DensitySweep {
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "family,n,r0,I_n")?;
        for (i, n) in self.n_list.iter().enumerate() {
            for (j, r0) in self.r0_list.iter().enumerate() {
                writeln!(w, "{},{},{:.10e},{:.16e}", self.kind, n, r0, self.values[i][j])?;
            }
        }
        Ok(())
    }
}

/// I_n(p₀; r₀) for a delta-detected beam with parameters (m, a, p₀) taken from `scn`.
pub fn density_sweep(n_list: &[u32], r0_list: &[f64], kind: FamilyKind, scn: &Scenario) -> Result<DensitySweep> {
    if !scn.is_beam() {
        return Err(Error::Mode("the density sweep needs beam mode".into()));
    }
    let family = StateFamily::from_kind(kind, 1.0)?;
    let dp = scn.delta_params()?;
    let unit = build_profile(&scn.with_r0(1.0))?;
    let cells: Vec<(usize, usize)> = (0..n_list.len()).flat_map(|i| (0..r0_list.len()).map(move |j| (i, j))).collect();
    let vals = cells
        .par_iter()
        .map(|&(i, j)| {
            let r0 = r0_list[j];
            if r0 == 0.0 {
                sparse_limit_i(n_list[i], kind, scn.p0, &dp)
            } else if r0 > 0.0 {
                Ok(fisher_info(n_list[i], &family, &unit.scaled(r0))?.i_n)
            } else {
                Err(Error::Domain(format!("r0 must be >= 0, got {r0}")))
            }
        })
        .collect::<Result<Vec<f64>>>()?;
    let mut values = vec![vec![0.0; r0_list.len()]; n_list.len()];
    for (&(i, j), v) in cells.iter().zip(vals) {
        values[i][j] = v;
    }
    Ok(DensitySweep { kind, n_list: n_list.to_vec(), r0_list: r0_list.to_vec(), values })
}

/// Maximum-likelihood estimates of p₀ from synthetic beam records, for a Cramér–Rao check.
#[derive(Debug, Clone, PartialEq)]
pub struct MleStudy {
    pub estimates: Vec<f64>,
    pub variance: f64,
    pub std_error: f64,
    /// 1/I_n at the true p₀.
    pub crb: f64,
    /// Estimates that ended on the bracket boundary.
    pub at_boundary: usize,
}

/// Controls for [`mle_study`].
#[derive(Debug, Clone, Copy)]
pub struct MleOpts {
    pub datasets: usize,
    pub seed: u64,
    /// Bracket half-width around the true p₀.
    pub half_width: f64,
    /// Likelihood nodes across the bracket.
    pub nodes: usize,
}

impl Default for MleOpts {
    fn default() -> Self {
        MleOpts { datasets: 10_000, seed: 7, half_width: 0.5, nodes: 81 }
    }
}

/// Draws `datasets` records of n arrivals at the true p₀ of a beam and maximizes each likelihood
/// over p₀ ± half_width by golden-section search on a piecewise-cubic interpolant.
pub fn mle_study(n: u32, family: &StateFamily, scn: &Scenario, opts: MleOpts) -> Result<MleStudy> {
    if !scn.is_beam() {
        return Err(Error::Mode("the likelihood study needs beam mode".into()));
    }
    let lo = scn.p0 - opts.half_width;
    let hi = scn.p0 + opts.half_width;
    if !(lo > 0.0) {
        return Err(Error::Domain("the p0 bracket must stay positive".into()));
    }
    let k = opts.nodes.max(8);
    let grid: Vec<f64> = (0..k).map(|i| lo + (hi - lo) * i as f64 / (k - 1) as f64).collect();
    let profiles = grid
        .par_iter()
        .map(|&p| build_profile(&scn.with_p0(p)))
        .collect::<Result<Vec<_>>>()?;
    let truth = build_profile(scn)?;
    let crb = 1.0 / fisher_info(n, family, &truth)?.i_n;
    let boundary = AtomicUsize::new(0);
    let estimates = (0..opts.datasets as u64)
        .into_par_iter()
        .map(|i| -> Result<f64> {
            let rec = sample_record(n, family, &truth, &mut record_rng(opts.seed, i))?;
            let ll = profiles
                .iter()
                .map(|p| log_likelihood(&rec, n, family, p))
                .collect::<Result<Vec<f64>>>()?;
            let est = maximize_interpolant(&grid, &ll);
            let tol = 1e-6 * (hi - lo);
            if est - lo < tol || hi - est < tol {
                boundary.fetch_add(1, Ordering::Relaxed);
            }
            Ok(est)
        })
        .collect::<Result<Vec<f64>>>()?;
    let jk = variance_with_jackknife(&estimates, 0);
    Ok(MleStudy {
        estimates,
        variance: jk.variance,
        std_error: jk.std_error,
        crb,
        at_boundary: boundary.into_inner(),
    })
}

/// Cubic Lagrange interpolation through the four nodes around x.
fn interp_cubic(xs: &[f64], ys: &[f64], x: f64) -> f64 {
    let n = xs.len();
    let step = (xs[n - 1] - xs[0]) / (n - 1) as f64;
    let i = (((x - xs[0]) / step).floor() as isize - 1).clamp(0, n as isize - 4) as usize;
    let mut s = 0.0;
    for a in i..i + 4 {
        let mut l = 1.0;
        for b in i..i + 4 {
            if a != b {
                l *= (x - xs[b]) / (xs[a] - xs[b]);
            }
        }
        s += ys[a] * l;
    }
    s
}

/// Argmax of the interpolant: golden-section search around the best node.
fn maximize_interpolant(xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len();
    let best = (0..n).max_by(|&a, &b| ys[a].total_cmp(&ys[b])).unwrap();
    let mut a = xs[best.saturating_sub(1)];
    let mut b = xs[(best + 1).min(n - 1)];
    let g = 0.5 * (5f64.sqrt() - 1.0);
    let f = |x: f64| interp_cubic(xs, ys, x);
    let mut c = b - g * (b - a);
    let mut d = a + g * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    while b - a > 1e-10 * (xs[n - 1] - xs[0]) {
        if fc > fd {
            b = d;
            d = c;
            fd = fc;
            c = b - g * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + g * (b - a);
            fd = f(d);
        }
    }
    let x = 0.5 * (a + b);
    // the interpolant can peak inside the bracket while the node at the edge is larger
    let (e0, e1) = (ys[0], ys[n - 1]);
    let fx = f(x);
    if e0 > fx && e0 >= e1 {
        xs[0]
    } else if e1 > fx {
        xs[n - 1]
    } else {
        x
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::deltakernel::beam_asymptotes;
    use crate::intensity::stationary_profile;

    fn dp() -> DeltaParams {
        DeltaParams::new(0.1, 1.0).unwrap()
    }

    #[test]
    fn i_inf_value_and_definition() {
        let v = i_inf(1.0, &dp());
        assert!((v - 0.0090702947845805).abs() < 1e-15);
        let asy = beam_asymptotes(1.0, 3.0, &dp());
        assert!(((asy.domega_inf / asy.omega_inf).powi(2) - v).abs() < 1e-15);
    }

    #[test]
    fn stationary_constants_closed_forms() {
        for n in 1..=10 {
            let c = stationary_constant(n, &StateFamily::coherent(1.0).unwrap()).unwrap().c_n;
            assert!((c - n as f64).abs() < 1e-8, "coherent n={n}: {c}");
            let q = stationary_constant(n, &StateFamily::quasi_free(1.0).unwrap()).unwrap().c_n;
            assert!((q - n as f64 / (n as f64 + 2.0)).abs() < 1e-8, "quasi-free n={n}: {q}");
        }
    }

    #[test]
    fn stationary_profile_information() {
        let (w, dw) = (0.8, 0.24);
        let p = stationary_profile(w, dw);
        let r2 = (dw / w) * (dw / w);
        for n in [1, 2, 4] {
            let c = fisher_info(n, &StateFamily::coherent(1.0).unwrap(), &p).unwrap();
            assert!((c.i_n - n as f64 * r2).abs() < 1e-8 * r2, "n={n} {}", c.i_n);
            let q = fisher_info(n, &StateFamily::quasi_free(1.0).unwrap(), &p).unwrap();
            assert!((q.i_n - n as f64 / (n as f64 + 2.0) * r2).abs() < 1e-8 * r2);
        }
    }

    #[test]
    fn beam_report_identities() {
        let p = build_profile(&Scenario::beam(1.0, 0.1, 1.0, 1.0).unwrap()).unwrap();
        let rep = fisher_info(2, &StateFamily::coherent(1.0).unwrap(), &p).unwrap();
        assert_eq!(rep.p_n_tot, 1.0);
        assert_eq!(rep.noevent_part, 0.0);
        assert_eq!(rep.i_n_conditional, rep.i_n);
        assert_eq!(rep.i_n, rep.detection_part + rep.noevent_part);
        assert!(rep.i_n > 0.0);
    }

    #[test]
    fn conditional_round_trip() {
        let rep = FisherReport {
            n: 3,
            i_n: 0.7,
            detection_part: 0.5,
            noevent_part: 0.2,
            p_n_tot: 0.6,
            dp_n_tot: 0.4 * 0.2f64.sqrt(),
            p_none: 0.4,
            i_n_conditional: 0.0,
            error: 0.0,
            warnings: 0,
        };
        let c = fisher_conditional(&rep).unwrap();
        let back = FisherReport { i_n_conditional: c, ..rep }.recompose();
        assert!((back - 0.7).abs() < 1e-14);
        assert!(fisher_conditional(&FisherReport { p_n_tot: 0.0, ..rep }).is_err());
    }

    #[test]
    fn sparse_limit_cases() {
        let d = dp();
        assert!((sparse_limit_i(1, FamilyKind::Coherent, 1.0, &d).unwrap() - 0.00907).abs() < 1e-5);
        assert!(sparse_limit_i(2, FamilyKind::Fock, 1.0, &d).is_err());
        let sat = sparse_limit_i(10_000, FamilyKind::QuasiFree, 1.0, &d).unwrap();
        assert!((sat / i_inf(1.0, &d) - 1.0).abs() < 1e-3);
        let weak = DeltaParams::new(1e-9, 1.0).unwrap();
        assert!(sparse_limit_i(3, FamilyKind::Coherent, 1.0, &weak).unwrap() < 1e-15);
    }

    #[test]
    fn jackknife_of_known_variance() {
        let xs: Vec<f64> = (0..1000).map(|i| if i % 2 == 0 { 1.0 } else { -1.0 }).collect();
        let e = variance_with_jackknife(&xs, 0);
        assert!((e.variance - 1000.0 / 999.0).abs() < 1e-12);
        assert!(e.std_error < 1e-3);
    }

    #[test]
    fn golden_section_on_parabola() {
        let xs: Vec<f64> = (0..21).map(|i| i as f64 * 0.1).collect();
        let ys: Vec<f64> = xs.iter().map(|x| -(x - 1.234) * (x - 1.234)).collect();
        assert!((maximize_interpolant(&xs, &ys) - 1.234).abs() < 1e-8);
        let edge: Vec<f64> = xs.iter().map(|x| *x).collect();
        assert_eq!(maximize_interpolant(&xs, &edge), 2.0);
    }

    #[test]
    fn stationary_mc_matches_constant() {
        // ω(p₀) = e^{0.3(p₀−1)}: ω̇/ω = 0.3, so I_4 = 4·0.09
        let n = 4;
        let fam = StateFamily::coherent(1.0).unwrap();
        let h = 1e-3;
        let prof = |p: f64| stationary_profile((0.3 * (p - 1.0)).exp(), 0.3 * (0.3 * (p - 1.0)).exp());
        let (base, lo, hi) = (prof(1.0), prof(1.0 - h), prof(1.0 + h));
        let scores: Vec<f64> = (0..20000u64)
            .map(|i| {
                let rec = sample_record(n, &fam, &base, &mut record_rng(3, i)).unwrap();
                (log_likelihood(&rec, n, &fam, &hi).unwrap() - log_likelihood(&rec, n, &fam, &lo).unwrap()) / (2.0 * h)
            })
            .collect();
        let e = variance_with_jackknife(&scores, 0);
        assert!((e.variance - 0.36).abs() < 3.0 * e.std_error, "{e:?}");
        assert!(e.mean_score.abs() < 3.0 * e.mean_std_error);
    }
}
