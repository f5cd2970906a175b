//! Intensity profiles ω(t), Ω(t) and their p₀-derivatives for every scenario mode.

mod beamtail;
mod table;

use std::io::Write;

use num_complex::Complex64;
use rayon::prelude::*;

pub use beamtail::BeamTail;
pub use table::{GridTable, PanelOpts, PanelTable, TableValue};

use crate::deltakernel::{beam_asymptotes, beam_intensity_and_dp, f_gaussian_shifted, DeltaParams};
use crate::error::{Error, Result};
use crate::propagate::{gaussian_kernel_g, gaussian_overlap_h0, solve_volterra, GaussianPacket, TimeGrid};
use crate::quad::QuadOpts;
use crate::scenario::{Mode, Scenario};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ProfileKind {
    /// Gaussian detector of width ε > 0.
    FiniteWidth,
    /// Delta detector, finite ⟨N⟩.
    DeltaFinite,
    /// Delta detector, beam limit.
    Beam,
    /// Constant intensity.
    Stationary,
}

/// Model of the profile beyond the tabulated range.
#[derive(Debug, Clone)]
pub enum Tail {
    /// ω and ∂ω/∂p₀ constant; Ω grows linearly.
    Stationary { omega: f64, domega: f64 },
    /// Running integrals approach their limits as (t_tab/t)^β.
    PowerLaw { beta: f64, limit: [f64; 3] },
    /// Exact beam intensity with asymptotic running integrals.
    Beam(Box<BeamTail>),
}

/// ω, ∂ω/∂p₀, Ω, ∂Ω/∂p₀ and ∫(∂ω/∂p₀)²/ω at one time.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProfilePoint {
    pub t: f64,
    pub omega: f64,
    pub domega: f64,
    pub big_omega: f64,
    pub dbig_omega: f64,
    pub tilde: f64,
    /// Ω·tilde − (∂Ω/∂p₀)², evaluated without cancellation in the stationary tail.
    pub spread: f64,
}

#[derive(Debug, Clone)]
enum Table {
    Panels(PanelTable),
    Grid(GridTable),
    Empty,
}

impl Table {
    fn eval(&self, t: f64) -> TableValue {
        match self {
            Table::Panels(p) => p.eval(t),
            Table::Grid(g) => g.eval(t),
            Table::Empty => TableValue { val: [0.0; 3], cum: [0.0; 3] },
        }
    }

    fn end(&self) -> TableValue {
        match self {
            Table::Panels(p) => p.end(),
            Table::Grid(g) => g.end(),
            Table::Empty => TableValue { val: [0.0; 3], cum: [0.0; 3] },
        }
    }
}

/// Build diagnostics.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Diagnostics {
    pub evaluations: usize,
    pub panels: usize,
    /// Largest relative change of ∂ω/∂p₀ when the difference step is halved.
    pub fd_stability: Option<f64>,
}

/// Evaluable intensity with tabulated cumulative integrals and a tail model.
#[derive(Debug, Clone)]
pub struct IntensityProfile {
    pub kind: ProfileKind,
    table: Table,
    t_tab: f64,
    end: TableValue,
    tail: Tail,
    scale: f64,
    pub diagnostics: Diagnostics,
}

/// Numerical controls for [`build_profile_with`].
#[derive(Debug, Clone, Copy)]
pub struct ProfileOpts {
    /// Step of the Volterra grid (finite width).
    pub dt: f64,
    /// Tabulation end for finite sources; `None` picks a multiple of the classical arrival time.
    pub t_max: Option<f64>,
    /// Tabulation end in beam mode.
    pub t_tab_beam: f64,
    /// Step of the p₀ finite differences.
    pub fd_step: f64,
    pub quad: QuadOpts,
    pub panels: PanelOpts,
}

impl Default for ProfileOpts {
    fn default() -> Self {
        ProfileOpts {
            dt: 1e-3,
            t_max: None,
            t_tab_beam: 2000.0,
            fd_step: 1e-4,
            quad: QuadOpts { abs_tol: 1e-14, rel_tol: 1e-11, max_segments: 20000 },
            panels: PanelOpts::default(),
        }
    }
}

pub fn build_profile(scn: &Scenario) -> Result<IntensityProfile> {
    build_profile_with(scn, &ProfileOpts::default())
}

pub fn build_profile_with(scn: &Scenario, opts: &ProfileOpts) -> Result<IntensityProfile> {
    scn.validate()?;
    match (scn.mode, scn.is_delta()) {
        (Mode::Beam, true) => build_beam(scn, opts),
        (Mode::Beam, false) => Err(Error::Mode("beam mode needs the delta detector".into())),
        (Mode::Finite, true) => build_delta_finite(scn, opts),
        (Mode::Finite, false) => build_finite_width(scn, opts),
    }
}

/// Beam tabulation reaches at least this many radians of the phase tp₀²/2m.
const BEAM_PHASE_TAB: f64 = 400.0;
const BEAM_T_TAB_MAX: f64 = 2e5;
const NEWTON_ITERS: usize = 40;

fn default_t_max(scn: &Scenario) -> f64 {
    let t_c = scn.x0.abs() * scn.m / scn.p0.abs().max(1e-3);
    (4.0 * t_c).max(100.0)
}

fn build_beam(scn: &Scenario, opts: &ProfileOpts) -> Result<IntensityProfile> {
    let dp = scn.delta_params()?;
    let (p0, r0) = (scn.p0, scn.r0);
    let eval = move |t: f64| beam_intensity_and_dp(t, p0, r0, &dp);
    let period = 4.0 * std::f64::consts::PI * scn.m / (p0 * p0).max(1e-12);
    let theta = p0 * p0 / (2.0 * scn.m);
    let t_tab = opts.t_tab_beam.max(BEAM_PHASE_TAB / theta).min(BEAM_T_TAB_MAX.max(opts.t_tab_beam));
    let table = PanelTable::build(&eval, 1.0, 8, t_tab, (0.5 * period).min(5.0), opts.panels);
    let tail = if dp.alpha() > 0.0 {
        Tail::Beam(Box::new(BeamTail::new(p0, r0, dp, t_tab)))
    } else {
        let asy = beam_asymptotes(p0, r0, &dp);
        Tail::Stationary { omega: asy.omega_inf, domega: asy.domega_inf }
    };
    let diagnostics = Diagnostics { evaluations: table.evaluations, panels: table.panels.len(), fd_stability: None };
    let end = table.end();
    Ok(IntensityProfile {
        kind: ProfileKind::Beam,
        table: Table::Panels(table),
        t_tab,
        end,
        tail,
        scale: 1.0,
        diagnostics,
    })
}

fn build_delta_finite(scn: &Scenario, opts: &ProfileOpts) -> Result<IntensityProfile> {
    let dp = scn.delta_params()?;
    let pk = GaussianPacket::from_scenario(scn);
    let h = opts.fd_step;
    let w = dp.a * scn.navg;
    let q = opts.quad;
    let failure = std::sync::Mutex::new(None);
    let eval = |t: f64| match f_gaussian_shifted(&pk, t, &dp, &[-h, 0.0, h], q) {
        Ok(f) => (w * f[1].norm_sqr(), w * (f[2].norm_sqr() - f[0].norm_sqr()) / (2.0 * h)),
        Err(e) => {
            failure.lock().unwrap().get_or_insert(e);
            (0.0, 0.0)
        }
    };
    let t_max = opts.t_max.unwrap_or_else(|| default_t_max(scn));
    let t_c = scn.x0.abs() * scn.m / scn.p0.abs().max(1e-3);
    let popts = PanelOpts { rel_tol: opts.panels.rel_tol.max(1e-9), ..opts.panels };
    let table = PanelTable::build(&eval, 1.0, 4, t_max, (0.05 * t_c).clamp(0.5, 5.0), popts);
    if let Some(e) = failure.into_inner().unwrap() {
        return Err(e);
    }
    let fd = fd_stability(&table.knots(), |t, hh| {
        let f = f_gaussian_shifted(&pk, t, &dp, &[-hh, hh], q)?;
        Ok(w * (f[1].norm_sqr() - f[0].norm_sqr()) / (2.0 * hh))
    }, h)?;
    let tab = Table::Panels(table);
    finish_finite(ProfileKind::DeltaFinite, tab, t_max, Some(fd), scn.navg)
}

fn build_finite_width(scn: &Scenario, opts: &ProfileOpts) -> Result<IntensityProfile> {
    let t_max = opts.t_max.unwrap_or_else(|| default_t_max(scn));
    let grid = TimeGrid::new(t_max, opts.dt)?;
    let h = opts.fd_step;
    let gamma = scn.gamma_eps();
    let g = gaussian_kernel_g(scn, grid)?;
    let solve = |p0: f64| -> Result<Vec<f64>> {
        let s = scn.with_p0(p0);
        let h0 = gaussian_overlap_h0(&s, grid)?;
        let hs = solve_volterra(&h0, &g, gamma)?;
        Ok(hs.values.iter().map(|v| scn.navg * gamma * v.norm_sqr()).collect())
    };
    let runs: Vec<Result<Vec<f64>>> = [scn.p0, scn.p0 - h, scn.p0 + h].par_iter().map(|&p| solve(p)).collect();
    let mut runs = runs.into_iter();
    let omega = runs.next().unwrap()?;
    let lo = runs.next().unwrap()?;
    let hi = runs.next().unwrap()?;
    let domega: Vec<f64> = lo.iter().zip(&hi).map(|(a, b)| (b - a) / (2.0 * h)).collect();
    let n = omega.len();
    let t_end = (n - 1) as f64 * opts.dt;
    let table = GridTable::new(opts.dt, &omega, &domega);
    let diagnostics_evals = 3 * n;
    let tab = Table::Grid(table);
    let mut p = finish_finite(ProfileKind::FiniteWidth, tab, t_end, None, scn.navg)?;
    p.diagnostics.evaluations = diagnostics_evals;
    Ok(p)
}

/// Compares difference quotients at step h and h/2 on a few interior knots.
fn fd_stability<F: Fn(f64, f64) -> Result<f64>>(knots: &[f64], dq: F, h: f64) -> Result<f64> {
    let mut worst: f64 = 0.0;
    let picks = [knots.len() / 4, knots.len() / 2, 3 * knots.len() / 4];
    for &i in &picks {
        let t = knots[i.min(knots.len() - 1)];
        let a = dq(t, h)?;
        let b = dq(t, 0.5 * h)?;
        let s = a.abs().max(b.abs());
        if s > 0.0 {
            worst = worst.max((a - b).abs() / s);
        }
    }
    Ok(worst)
}

fn finish_finite(kind: ProfileKind, table: Table, t_tab: f64, fd: Option<f64>, navg: f64) -> Result<IntensityProfile> {
    let end = table.end();
    let q = [0.25 * t_tab, 0.5 * t_tab].map(|t| table.eval(t).cum);
    // Aitken extrapolation of Ω over t_tab/4, t_tab/2, t_tab
    let d1 = q[1][0] - q[0][0];
    let d2 = end.cum[0] - q[1][0];
    let ratio = if d1 > 0.0 { d2 / d1 } else { 0.0 };
    let tail = if ratio > 0.0 && ratio < 0.9 {
        let beta = -ratio.log2();
        let geo = ratio / (1.0 - ratio);
        let mut limit = [0.0; 3];
        for c in 0..3 {
            limit[c] = end.cum[c] + (end.cum[c] - q[1][c]) * geo;
        }
        limit[0] = limit[0].min(navg);
        Tail::PowerLaw { beta, limit }
    } else {
        Tail::PowerLaw { beta: 1.0, limit: end.cum }
    };
    let (evaluations, panels) = match &table {
        Table::Panels(p) => (p.evaluations, p.panels.len()),
        Table::Grid(g) => (g.val.len(), 0),
        Table::Empty => (0, 0),
    };
    Ok(IntensityProfile {
        kind,
        table,
        t_tab,
        end,
        tail,
        scale: 1.0,
        diagnostics: Diagnostics { evaluations, panels, fd_stability: fd },
    })
}

/// Profile with constant ω = `omega` and ∂ω/∂p₀ = `domega`.
pub fn stationary_profile(omega: f64, domega: f64) -> IntensityProfile {
    IntensityProfile {
        kind: ProfileKind::Stationary,
        table: Table::Empty,
        t_tab: 0.0,
        end: TableValue { val: [omega, domega, table::ratio(omega, domega)], cum: [0.0; 3] },
        tail: Tail::Stationary { omega, domega },
        scale: 1.0,
        diagnostics: Diagnostics::default(),
    }
}

/// Profile from an arbitrary (ω, ∂ω/∂p₀) evaluator tabulated on [0, t_tab], continued
/// by the stationary tail (ω∞, ∂ω∞).
pub fn profile_from_fn<E: Fn(f64) -> (f64, f64) + Sync>(
    eval: E,
    t_tab: f64,
    omega_inf: f64,
    domega_inf: f64,
    opts: PanelOpts,
) -> IntensityProfile {
    let table = PanelTable::build(&eval, 1.0f64.min(t_tab), 4, t_tab, 2.0, opts);
    let end = table.end();
    IntensityProfile {
        kind: ProfileKind::Beam,
        diagnostics: Diagnostics { evaluations: table.evaluations, panels: table.panels.len(), fd_stability: None },
        table: Table::Panels(table),
        t_tab,
        end,
        tail: Tail::Stationary { omega: omega_inf, domega: domega_inf },
        scale: 1.0,
    }
}

impl IntensityProfile {
    /// Tail model at unit scale; multiply intensities by [`Self::scale`].
    pub fn tail(&self) -> &Tail {
        &self.tail
    }

    pub fn scale(&self) -> f64 {
        self.scale
    }

    pub fn t_tab(&self) -> f64 {
        self.t_tab
    }

    pub fn is_stationary_tail(&self) -> bool {
        matches!(self.tail, Tail::Stationary { .. })
    }

    /// Copy with ω multiplied by `factor` (for a beam this is the density scaling r₀ → factor·r₀).
    pub fn scaled(&self, factor: f64) -> IntensityProfile {
        IntensityProfile { scale: self.scale * factor, ..self.clone() }
    }

    /// Ω(∞), infinite for stationary tails.
    pub fn omega_total(&self) -> f64 {
        match self.tail {
            Tail::Stationary { omega, .. } if omega > 0.0 => f64::INFINITY,
            Tail::Stationary { .. } => self.end.cum[0] * self.scale,
            Tail::PowerLaw { limit, .. } => limit[0] * self.scale,
            Tail::Beam(_) => f64::INFINITY,
        }
    }

    /// ∂Ω/∂p₀ at t = ∞ (finite sources).
    pub fn dbig_omega_total(&self) -> f64 {
        match self.tail {
            Tail::Stationary { domega, .. } => {
                if domega == 0.0 {
                    self.end.cum[1] * self.scale
                } else {
                    f64::INFINITY * domega.signum()
                }
            }
            Tail::PowerLaw { limit, .. } => limit[1] * self.scale,
            Tail::Beam(ref b) => f64::INFINITY * b.domega_inf.signum(),
        }
    }

    /// Break points of the tabulated range.
    pub fn knots(&self) -> Vec<f64> {
        match &self.table {
            Table::Panels(p) => p.knots(),
            Table::Grid(g) => g.knots(),
            Table::Empty => vec![],
        }
    }

    pub fn point(&self, t: f64) -> ProfilePoint {
        let s = self.scale;
        if t <= self.t_tab {
            let v = self.table.eval(t.max(0.0));
            let (w, dw, dbig) = (v.val[0] * s, v.val[1] * s, v.cum[1] * s);
            let (big, tilde) = ((v.cum[0] * s).max(0.0), (v.cum[2] * s).max(0.0));
            return ProfilePoint {
                t,
                omega: w.max(0.0),
                domega: dw,
                big_omega: big,
                dbig_omega: dbig,
                tilde,
                spread: big * tilde - dbig * dbig,
            };
        }
        let e = &self.end;
        let (b0, b1, b2) = (e.cum[0] * s, e.cum[1] * s, e.cum[2] * s);
        match &self.tail {
            &Tail::Stationary { omega, domega } => {
                let (w, dw) = (omega * s, domega * s);
                let r = table::ratio(w, dw);
                let d = t - self.t_tab;
                let big = b0 + w * d;
                let dbig = b1 + dw * d;
                let tilde = b2 + r * d;
                // the d² terms cancel exactly
                let spread = (b0 * b2 - b1 * b1) + d * (b2 * w + b0 * r - 2.0 * b1 * dw);
                ProfilePoint { t, omega: w, domega: dw, big_omega: big, dbig_omega: dbig, tilde, spread }
            }
            Tail::Beam(bt) => {
                let inc = bt.increment(t);
                let (w, dw) = (bt.omega_inf * s, bt.domega_inf * s);
                let r = table::ratio(w, dw);
                let d = t - self.t_tab;
                let (c0, c1, c2) = (b0 + inc.x[0] * s, b1 + inc.x[1] * s, b2 + inc.x[2] * s);
                let spread = (c0 * c2 - c1 * c1) + d * (c2 * w + c0 * r - 2.0 * c1 * dw);
                ProfilePoint {
                    t,
                    omega: (inc.omega * s).max(0.0),
                    domega: inc.domega * s,
                    big_omega: c0 + w * d,
                    dbig_omega: c1 + dw * d,
                    tilde: c2 + r * d,
                    spread,
                }
            }
            &Tail::PowerLaw { beta, limit } => {
                let lim = limit.map(|v| v * s);
                let x = (self.t_tab / t).powf(beta);
                let rem = [lim[0] - b0, lim[1] - b1, lim[2] - b2];
                let rate = beta * x / t;
                let big = lim[0] - rem[0] * x;
                let dbig = lim[1] - rem[1] * x;
                let tilde = lim[2] - rem[2] * x;
                ProfilePoint {
                    t,
                    omega: rem[0] * rate,
                    domega: rem[1] * rate,
                    big_omega: big,
                    dbig_omega: dbig,
                    tilde,
                    spread: big * tilde - dbig * dbig,
                }
            }
        }
    }

    pub fn omega(&self, t: f64) -> f64 {
        self.point(t).omega
    }

    pub fn domega(&self, t: f64) -> f64 {
        self.point(t).domega
    }

    pub fn big_omega(&self, t: f64) -> f64 {
        self.point(t).big_omega
    }

    pub fn dbig_omega(&self, t: f64) -> f64 {
        self.point(t).dbig_omega
    }

    /// t with Ω(t) = u; range error when u ≥ Ω(∞).
    pub fn invert_omega(&self, u: f64) -> Result<f64> {
        if !(u >= 0.0) {
            return Err(Error::Domain(format!("u must be >= 0, got {u}")));
        }
        let total = self.omega_total();
        if u >= total {
            return Err(Error::Range { u, omega_inf: total });
        }
        if u == 0.0 {
            return Ok(0.0);
        }
        let s = self.scale;
        let b0 = self.end.cum[0] * s;
        if u <= b0 {
            let v = u / s;
            return Ok(match &self.table {
                Table::Panels(p) => p.invert(v),
                Table::Grid(g) => g.invert(v),
                Table::Empty => 0.0,
            });
        }
        Ok(match &self.tail {
            &Tail::Stationary { omega, .. } => self.t_tab + (u - b0) / (omega * s),
            Tail::Beam(bt) => {
                let mut t = self.t_tab + (u - b0) / (bt.omega_inf * s);
                for _ in 0..NEWTON_ITERS {
                    let p = self.point(t);
                    let step = (p.big_omega - u) / p.omega.max(0.5 * bt.omega_inf * s);
                    t = (t - step).max(self.t_tab);
                    if step.abs() <= 4.0 * f64::EPSILON * t {
                        break;
                    }
                }
                t
            }
            &Tail::PowerLaw { beta, limit } => {
                let lim = limit[0] * s;
                let x = (lim - u) / (lim - b0);
                self.t_tab * x.powf(-1.0 / beta)
            }
        })
    }

    /// For beam tails: the point at Ω = u ≥ Ω(t_tab) of the running integrals with their
    /// bounded oscillating parts removed; ω and ∂ω/∂p₀ are the stationary values.
    pub fn secular_at_u(&self, u: f64) -> Option<ProfilePoint> {
        let Tail::Beam(bt) = &self.tail else { return None };
        let s = self.scale;
        let e = &self.end;
        let (b0, b1, b2) = (e.cum[0] * s, e.cum[1] * s, e.cum[2] * s);
        if !(u >= b0) {
            return None;
        }
        let (w, dw) = (bt.omega_inf * s, bt.domega_inf * s);
        let r = table::ratio(w, dw);
        let x0 = bt.secular_increment(self.t_tab)[0] * s;
        let d = ((u - b0 - x0) / w).max(0.0);
        let t = self.t_tab + d;
        let x = bt.secular_increment(t);
        let (c0, c1, c2) = (b0 + x0, b1 + x[1] * s, b2 + x[2] * s);
        let spread = (c0 * c2 - c1 * c1) + d * (c2 * w + c0 * r - 2.0 * c1 * dw);
        Some(ProfilePoint { t, omega: w, domega: dw, big_omega: u, dbig_omega: c1 + dw * d, tilde: c2 + r * d, spread })
    }

    /// Profile point at Ω = u (u < Ω(∞)).
    pub fn point_at_u(&self, u: f64) -> Result<ProfilePoint> {
        Ok(self.point(self.invert_omega(u)?))
    }

    /// CSV `t,omega,Omega,domega_dp0` at the given times.
    pub fn write_csv<W: Write>(&self, times: &[f64], mut w: W) -> Result<()> {
        writeln!(w, "t,omega,Omega,domega_dp0")?;
        for &t in times {
            let p = self.point(t);
            writeln!(w, "{:.10e},{:.16e},{:.16e},{:.16e}", t, p.omega, p.big_omega, p.domega)?;
        }
        Ok(())
    }
}

/// Delta-detector ω for a finite Gaussian source at a single time, a⟨N⟩|f(t)|².
pub fn delta_omega_at(scn: &Scenario, t: f64, quad: QuadOpts) -> Result<f64> {
    let dp: DeltaParams = scn.delta_params()?;
    let f: [Complex64; 1] = f_gaussian_shifted(&GaussianPacket::from_scenario(scn), t, &dp, &[0.0], quad)?;
    Ok(dp.a * scn.navg * f[0].norm_sqr())
}
