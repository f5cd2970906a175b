//! Joint arrival densities, detection probabilities, sampling and spatial counts.

use std::io::Write;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use statrs::function::erf::erfc;

use crate::error::{Error, Result};
use crate::intensity::IntensityProfile;
use crate::quad::{integrate, QuadOpts};
use crate::scenario::{ln_factorial, Scenario, StateFamily};

/// Detection times of one run; `terminated` marks a NO-event before the requested count.
#[derive(Debug, Clone, PartialEq)]
pub struct ArrivalRecord {
    pub times: Vec<f64>,
    pub terminated: bool,
}

impl ArrivalRecord {
    /// `k,t1,...,tk,terminated`
    pub fn to_line(&self) -> String {
        let mut s = self.times.len().to_string();
        for t in &self.times {
            s.push(',');
            s.push_str(&format!("{t:.17e}"));
        }
        s.push(',');
        s.push_str(if self.terminated { "1" } else { "0" });
        s
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SampleBatch {
    pub n: u32,
    pub seed: u64,
    pub scenario_hash: u64,
    pub records: Vec<ArrivalRecord>,
}

impl SampleBatch {
    pub fn write<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "# n={} seed={} scenario={:016x}", self.n, self.seed, self.scenario_hash)?;
        writeln!(w, "n_detected,times...,terminated")?;
        for r in &self.records {
            writeln!(w, "{}", r.to_line())?;
        }
        Ok(())
    }

    /// Fraction of records that reached the requested count.
    pub fn completed_fraction(&self) -> f64 {
        let done = self.records.iter().filter(|r| !r.terminated).count();
        done as f64 / self.records.len().max(1) as f64
    }
}

fn check_times(times: &[f64]) -> Result<()> {
    if times.is_empty() {
        return Err(Error::Domain("at least one arrival time is required".into()));
    }
    if !(times[0] > 0.0) {
        return Err(Error::Domain(format!("arrival times must be positive, got {}", times[0])));
    }
    if times.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::Domain("arrival times must be strictly increasing".into()));
    }
    Ok(())
}

/// ln pₙ(t₁,…,tₙ) = ln Fₙ(Ω(tₙ)) + Σ ln ω(tᵢ).
pub fn log_joint_density(times: &[f64], family: &StateFamily, profile: &IntensityProfile) -> Result<f64> {
    check_times(times)?;
    let n = times.len() as u32;
    let last = profile.point(*times.last().unwrap());
    let mut s = family.log_f_n(n, last.big_omega.max(0.0))?;
    for &t in times {
        s += profile.omega(t).ln();
    }
    Ok(s)
}

/// pₙ(t₁,…,tₙ) = Fₙ(Ω(tₙ))·∏ω(tᵢ).
pub fn joint_density(times: &[f64], family: &StateFamily, profile: &IntensityProfile) -> Result<f64> {
    Ok(log_joint_density(times, family, profile)?.exp())
}

/// Σ_{k<n} F_k(Ω)Ωᵏ/k!, the probability of fewer than n detections when Ω(∞) = Ω.
pub fn noevent_mass(n: u32, family: &StateFamily, omega_inf: f64) -> Result<f64> {
    if n == 0 {
        return Err(Error::Domain("n must be >= 1".into()));
    }
    if omega_inf.is_infinite() {
        return Ok(0.0);
    }
    let lw = omega_inf.ln();
    let mut s = 0.0;
    for k in 0..n {
        let lf = family.log_f_n(k, omega_inf)?;
        let term = if k == 0 { lf } else { lf + k as f64 * lw - ln_factorial(k) };
        s += term.exp();
    }
    Ok(s)
}

/// p_n^tot = 1 − Σ_{k<n} F_k(Ω(∞))Ω(∞)ᵏ/k!; exactly 1 for a beam.
pub fn total_prob(n: u32, family: &StateFamily, profile: &IntensityProfile) -> Result<f64> {
    total_prob_at(n, family, profile.omega_total())
}

pub fn total_prob_at(n: u32, family: &StateFamily, omega_inf: f64) -> Result<f64> {
    Ok(1.0 - noevent_mass(n, family, omega_inf)?)
}

/// (1/(n−1)!)∫₀^{Ω(∞)} Fₙ(u)u^{n−1}du by quadrature.
pub fn total_prob_direct(n: u32, family: &StateFamily, omega_inf: f64, opts: QuadOpts) -> Result<f64> {
    if n == 0 {
        return Err(Error::Domain("n must be >= 1".into()));
    }
    let lf = ln_factorial(n - 1);
    let dens = |u: f64| {
        if u <= 0.0 {
            return if n == 1 { family.f_n(1, 0.0).unwrap_or(0.0) } else { 0.0 };
        }
        let l = family.log_f_n(n, u).unwrap_or(f64::NEG_INFINITY);
        (l + (n - 1) as f64 * u.ln() - lf).exp()
    };
    let upper = omega_inf.min(family.omega_domain());
    if upper.is_finite() {
        let peak = (n as f64).min(upper);
        let mut breaks = vec![0.0, 0.5 * peak, peak];
        if upper > peak {
            breaks.push(upper);
        }
        breaks.dedup();
        Ok(integrate(dens, &breaks, opts)?.value)
    } else {
        let p = n as f64;
        let head = integrate(dens, &[0.0, 0.5 * p, p], opts)?.value;
        let tail = crate::quad::integrate_to_infinity(dens, p, p + 1.0, opts)?.value;
        Ok(head + tail)
    }
}

/// dp_n^tot/dp₀ = Ω̇(∞)Fₙ(Ω(∞))Ω(∞)^{n−1}/(n−1)!; zero for a beam.
pub fn total_prob_dp(n: u32, family: &StateFamily, profile: &IntensityProfile) -> Result<f64> {
    let w = profile.omega_total();
    if w.is_infinite() {
        return Ok(0.0);
    }
    total_prob_dp_at(n, family, w, profile.dbig_omega_total())
}

pub fn total_prob_dp_at(n: u32, family: &StateFamily, omega_inf: f64, domega_inf: f64) -> Result<f64> {
    if n == 0 {
        return Err(Error::Domain("n must be >= 1".into()));
    }
    let l = family.log_f_n(n, omega_inf)? + (n - 1) as f64 * omega_inf.ln() - ln_factorial(n - 1);
    Ok(domega_inf * if n == 1 { family.f_n(1, omega_inf)? } else { l.exp() })
}

/// Next arrival in the u = Ω domain after k arrivals at u_k, given uniform v ∈ (0, 1].
/// `None` when the survival F_k(u)/F_k(u_k) never drops to v (NO-event).
pub fn next_u(family: &StateFamily, k: u32, u_k: f64, v: f64, omega_inf: f64) -> Option<f64> {
    let u = match *family {
        StateFamily::Coherent { .. } => u_k - v.ln(),
        StateFamily::QuasiFree { .. } => (1.0 + u_k) * v.powf(-1.0 / (k as f64 + 1.0)) - 1.0,
        StateFamily::Fock { n } => {
            if k as u64 >= n {
                return None;
            }
            let nn = n as f64;
            nn * (1.0 - (1.0 - u_k / nn) * v.powf(1.0 / (nn - k as f64)))
        }
    };
    (u < omega_inf && u.is_finite()).then_some(u)
}

fn check_sampling(family: &StateFamily, profile: &IntensityProfile) -> Result<()> {
    if profile.omega_total() > family.omega_domain() {
        return Err(Error::Unsupported("a Fock family needs Omega(inf) <= N".into()));
    }
    Ok(())
}

/// One record of up to n arrivals drawn from `rng`.
pub fn sample_record<R: Rng>(n: u32, family: &StateFamily, profile: &IntensityProfile, rng: &mut R) -> Result<ArrivalRecord> {
    let omega_inf = profile.omega_total();
    let mut times = Vec::with_capacity(n as usize);
    let mut u = 0.0;
    for k in 0..n {
        let v = 1.0 - rng.random::<f64>();
        match next_u(family, k, u, v, omega_inf) {
            Some(next) => {
                u = next;
                let t = profile.invert_omega(u)?;
                if let Some(&prev) = times.last() {
                    if !(t > prev) {
                        // equal u up to rounding; keep the order strict
                        times.push(prev * (1.0 + f64::EPSILON) + f64::MIN_POSITIVE);
                        continue;
                    }
                }
                times.push(t);
            }
            None => return Ok(ArrivalRecord { times, terminated: true }),
        }
    }
    Ok(ArrivalRecord { times, terminated: false })
}

/// Generator for record `index` of a batch with the given seed.
pub fn record_rng(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

/// `count` independent records; record i uses stream i of the seeded generator.
pub fn sample_arrivals(
    n: u32,
    family: &StateFamily,
    profile: &IntensityProfile,
    count: usize,
    seed: u64,
    scenario_hash: u64,
) -> Result<SampleBatch> {
    if n == 0 {
        return Err(Error::Domain("n must be >= 1".into()));
    }
    check_sampling(family, profile)?;
    let records = (0..count)
        .into_par_iter()
        .map(|i| sample_record(n, family, profile, &mut record_rng(seed, i as u64)))
        .collect::<Result<Vec<_>>>()?;
    Ok(SampleBatch { n, seed, scenario_hash, records })
}

/// Interval I = [lo, hi] on the line.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
}

impl Interval {
    pub fn new(lo: f64, hi: f64) -> Result<Self> {
        if !(hi > lo) {
            return Err(Error::Domain(format!("interval needs hi > lo, got [{lo}, {hi}]")));
        }
        Ok(Interval { lo, hi })
    }

    pub fn len(&self) -> f64 {
        self.hi - self.lo
    }
}

/// Spatial particle density r(x).
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SpatialDensity {
    /// Uniform beam density r₀.
    Uniform(f64),
    /// ⟨N⟩|χ(x)|² for the Gaussian source of a finite scenario.
    Gaussian { navg: f64, x0: f64, dp: f64 },
}

impl SpatialDensity {
    pub fn from_scenario(scn: &Scenario) -> Self {
        if scn.is_beam() {
            SpatialDensity::Uniform(scn.r0)
        } else {
            SpatialDensity::Gaussian { navg: scn.navg, x0: scn.x0, dp: scn.dp }
        }
    }

    pub fn at(&self, x: f64) -> f64 {
        match *self {
            SpatialDensity::Uniform(r0) => r0,
            SpatialDensity::Gaussian { navg, x0, dp } => {
                let s = 0.5 / dp;
                navg * (-(x - x0) * (x - x0) / (2.0 * s * s)).exp() / (s * (2.0 * std::f64::consts::PI).sqrt())
            }
        }
    }

    /// ∫_I r(x)dx.
    pub fn mass(&self, i: Interval) -> f64 {
        match *self {
            SpatialDensity::Uniform(r0) => r0 * i.len(),
            SpatialDensity::Gaussian { navg, x0, dp } => {
                let z = |x: f64| (x - x0) * 2.0 * dp / std::f64::consts::SQRT_2;
                0.5 * navg * (erfc(z(i.lo)) - erfc(z(i.hi)))
            }
        }
    }
}

/// Characteristic function s ↦ E[e^{is·N(I)}] of the particle count in an interval.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CountCharFn {
    pub family: StateFamily,
    /// ∫_I r(x)dx.
    pub mass: f64,
}

impl CountCharFn {
    pub fn eval(&self, s: f64) -> Complex64 {
        let z = Complex64::new(0.0, s).exp() - 1.0;
        match self.family {
            StateFamily::Fock { n } => (1.0 + z * (self.mass / n as f64)).powu(n as u32),
            StateFamily::Coherent { .. } => (z * self.mass).exp(),
            StateFamily::QuasiFree { .. } => (1.0 - z * self.mass).inv(),
        }
    }

    /// E[N(I)] = −i·C′(0).
    pub fn mean(&self) -> f64 {
        self.mass
    }
}

/// Count statistics of N(I) for the family and density.
pub fn spatial_char(interval: Interval, family: &StateFamily, density: &SpatialDensity) -> Result<CountCharFn> {
    if let (StateFamily::Fock { .. }, SpatialDensity::Uniform(_)) = (family, density) {
        return Ok(CountCharFn { family: StateFamily::coherent(1.0)?, mass: density.mass(interval) });
    }
    Ok(CountCharFn { family: *family, mass: density.mass(interval) })
}
