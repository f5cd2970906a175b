//! Subcommand implementations.

use std::fs;
use std::io::{self, BufWriter, Write};
use std::path::Path;

use clap::Args;

use arrival_core::fisher::{density_sweep, fisher_conditional, fisher_info_with, FisherOpts};
use arrival_core::intensity::{build_profile_with, IntensityProfile, ProfileOpts};
use arrival_core::process::{joint_density, sample_arrivals};
use arrival_core::quad::QuadOpts;
use arrival_core::{verify, FamilyKind, Mode, Scenario, StateFamily};

use crate::manifest::RunManifest;
use crate::{CliError, Common};

type CliResult = Result<(), CliError>;

/// Profile controls shared by the commands that build intensities.
#[derive(Args, Debug, Clone)]
pub struct Numerics {
    /// Volterra step for finite-width detectors.
    #[arg(long, default_value_t = 1e-3)]
    pub dt: f64,
    /// End of the tabulated range for finite sources.
    #[arg(long)]
    pub t_tab: Option<f64>,
    /// End of the tabulated range in beam mode.
    #[arg(long, default_value_t = 2000.0)]
    pub t_tab_beam: f64,
}

impl Numerics {
    fn opts(&self) -> Result<ProfileOpts, CliError> {
        if !(self.dt > 0.0) || !(self.t_tab_beam > 0.0) || self.t_tab.is_some_and(|t| !(t > 0.0)) {
            return Err(CliError::Config("dt, t-tab and t-tab-beam must be positive".into()));
        }
        Ok(ProfileOpts { dt: self.dt, t_max: self.t_tab, t_tab_beam: self.t_tab_beam, ..Default::default() })
    }

    fn record(&self, m: &mut RunManifest) {
        m.set("dt", self.dt).set("t_tab_beam", self.t_tab_beam);
        if let Some(t) = self.t_tab {
            m.set("t_tab", t);
        }
    }
}

fn load_scenario(common: &Common) -> Result<Scenario, CliError> {
    let path = common.config.as_ref().ok_or_else(|| CliError::Config("--config is required".into()))?;
    let text = fs::read_to_string(path).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
    Ok(Scenario::from_config_str(&text)?)
}

fn open_output(path: Option<&Path>) -> Result<Box<dyn Write>, CliError> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(fs::File::create(p)?)),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn finish(common: &Common, manifest: &RunManifest, mut out: Box<dyn Write>) -> CliResult {
    out.flush()?;
    if let Some(p) = &common.manifest {
        fs::write(p, manifest.render())?;
    }
    Ok(())
}

/// Parses `1,2,5` and inclusive ranges `1:4`.
pub fn parse_counts(s: &str) -> Result<Vec<u32>, String> {
    let mut out = vec![];
    for part in s.split(',').map(str::trim).filter(|p| !p.is_empty()) {
        let num = |x: &str| x.trim().parse::<u32>().map_err(|_| format!("invalid count '{x}'"));
        match part.split_once(':') {
            Some((a, b)) => {
                let (a, b) = (num(a)?, num(b)?);
                if a > b {
                    return Err(format!("empty range '{part}'"));
                }
                out.extend(a..=b);
            }
            None => out.push(num(part)?),
        }
    }
    if out.is_empty() || out.contains(&0) {
        return Err("counts must be a nonempty list of positive integers".into());
    }
    Ok(out)
}

fn parse_family(s: &str) -> Result<FamilyKind, String> {
    s.parse().map_err(|e: arrival_core::Error| e.to_string())
}

fn family_for(kind: FamilyKind, scn: &Scenario) -> Result<StateFamily, CliError> {
    let navg = if scn.is_beam() { 1.0 } else { scn.navg };
    Ok(StateFamily::from_kind(kind, navg)?)
}

fn uniform_times(t_max: f64, points: usize, include_zero: bool) -> Result<Vec<f64>, CliError> {
    if !(t_max > 0.0) || points < 2 {
        return Err(CliError::Config("need t-max > 0 and at least 2 points".into()));
    }
    let first = if include_zero { 0 } else { 1 };
    let last = if include_zero { points - 1 } else { points };
    Ok((first..=last).map(|i| t_max * i as f64 / last as f64).collect())
}

fn classical_time(scn: &Scenario) -> f64 {
    (scn.x0 * scn.m / scn.p0).abs()
}

/// Beam density matching a finite source: r₀ if given, else ⟨N⟩Δp/√(π/2).
fn matching_r0(scn: &Scenario) -> f64 {
    if scn.r0 > 0.0 {
        scn.r0
    } else {
        scn.navg * scn.dp / (std::f64::consts::PI / 2.0).sqrt()
    }
}

#[derive(Args, Debug)]
pub struct IntensityArgs {
    #[command(flatten)]
    pub common: Common,
    #[command(flatten)]
    pub numerics: Numerics,
    /// Additional finite detector widths ε.
    #[arg(long, value_delimiter = ',')]
    pub eps: Vec<f64>,
    /// Additional mean particle numbers for the delta detector.
    #[arg(long, value_delimiter = ',')]
    pub navg: Vec<f64>,
    /// Add the beam with matching density.
    #[arg(long)]
    pub beam: bool,
    /// Last output time; twice the classical arrival time by default (50 in beam mode).
    #[arg(long)]
    pub t_max: Option<f64>,
    /// Number of output times.
    #[arg(long, default_value_t = 401)]
    pub points: usize,
}

pub fn intensity(a: IntensityArgs) -> CliResult {
    let scn = load_scenario(&a.common)?;
    let opts = a.numerics.opts()?;
    let mut curves: Vec<(String, Scenario)> = vec![("config".into(), scn)];
    if !scn.is_beam() {
        for &e in &a.eps {
            curves.push((format!("eps={e}"), Scenario { eps: e, ..scn }));
        }
        for &n in &a.navg {
            curves.push((format!("navg={n}"), Scenario { eps: 0.0, navg: n, ..scn }));
        }
        if a.beam {
            curves.push(("beam".into(), Scenario::beam(scn.m, scn.a, scn.p0, matching_r0(&scn))?));
        }
    } else if !a.eps.is_empty() || !a.navg.is_empty() {
        return Err(CliError::Config("--eps and --navg need a finite-mode scenario".into()));
    }
    for (_, s) in &curves {
        s.validate()?;
    }
    let default_t = if scn.is_beam() { 50.0 } else { 2.0 * classical_time(&scn) };
    let t_max = a.t_max.unwrap_or(default_t);
    let times = uniform_times(t_max, a.points, true)?;
    let mut out = open_output(a.common.out.as_deref())?;
    writeln!(out, "curve,t,omega,Omega,domega_dp0")?;
    for (label, s) in &curves {
        let o = if s.mode == Mode::Finite { ProfileOpts { t_max: Some(opts.t_max.unwrap_or(t_max).max(t_max)), ..opts } } else { opts };
        let p = build_profile_with(s, &o)?;
        for &t in &times {
            let q = p.point(t);
            writeln!(out, "{label},{t:.10e},{:.16e},{:.16e},{:.16e}", q.omega, q.big_omega, q.domega)?;
        }
    }
    let mut m = RunManifest::new("intensity", Some(scn), a.common.out.as_deref());
    a.numerics.record(&mut m);
    m.set("t_max", t_max).set("points", a.points).set("curves", curves.iter().map(|c| c.0.as_str()).collect::<Vec<_>>().join(";"));
    finish(&a.common, &m, out)
}

#[derive(Args, Debug)]
pub struct DensityArgs {
    #[command(flatten)]
    pub common: Common,
    #[command(flatten)]
    pub numerics: Numerics,
    /// Beam densities; the scenario's r₀ by default.
    #[arg(long, value_delimiter = ',')]
    pub r0: Vec<f64>,
    #[arg(long, value_delimiter = ',', value_parser = parse_family, default_value = "coherent,quasi-free")]
    pub family: Vec<FamilyKind>,
    #[arg(long, default_value_t = 10.0)]
    pub t_max: f64,
    #[arg(long, default_value_t = 400)]
    pub points: usize,
    /// Emit p₂(t₁, t₂) on the grid t₁ < t₂ instead of p₁.
    #[arg(long)]
    pub p2: bool,
}

pub fn density(a: DensityArgs) -> CliResult {
    let scn = load_scenario(&a.common)?;
    let opts = a.numerics.opts()?;
    let r0s = if a.r0.is_empty() {
        vec![scn.r0]
    } else if scn.is_beam() {
        a.r0.clone()
    } else {
        return Err(CliError::Config("--r0 needs a beam-mode scenario".into()));
    };
    let times = uniform_times(a.t_max, a.points, false)?;
    let mut out = open_output(a.common.out.as_deref())?;
    if a.p2 {
        writeln!(out, "family,r0,t1,t2,p2")?;
    } else {
        writeln!(out, "family,r0,t,p1")?;
    }
    for &r0 in &r0s {
        let s = if scn.is_beam() { scn.with_r0(r0) } else { scn };
        let profile = build_profile_with(&s, &opts)?;
        for &kind in &a.family {
            let fam = family_for(kind, &s)?;
            if a.p2 {
                for (i, &t1) in times.iter().enumerate() {
                    for &t2 in &times[i + 1..] {
                        let v = joint_density(&[t1, t2], &fam, &profile)?;
                        writeln!(out, "{kind},{r0:.10e},{t1:.10e},{t2:.10e},{v:.16e}")?;
                    }
                }
            } else {
                for &t in &times {
                    let v = joint_density(&[t], &fam, &profile)?;
                    writeln!(out, "{kind},{r0:.10e},{t:.10e},{v:.16e}")?;
                }
            }
        }
    }
    let mut m = RunManifest::new("density", Some(scn), a.common.out.as_deref());
    a.numerics.record(&mut m);
    m.set("r0", join(&r0s)).set("family", join(&a.family)).set("t_max", a.t_max).set("points", a.points).set("p2", a.p2);
    finish(&a.common, &m, out)
}

fn join<T: ToString>(xs: &[T]) -> String {
    xs.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(",")
}

#[derive(Args, Debug)]
pub struct FisherArgs {
    #[command(flatten)]
    pub common: Common,
    #[command(flatten)]
    pub numerics: Numerics,
    /// Detection counts, e.g. `1,2,5` or `1:10`.
    #[arg(short, long, value_parser = parse_counts, default_value = "1")]
    pub n: std::vec::Vec<u32>,
    #[arg(long, value_parser = parse_family, default_value = "coherent")]
    pub family: FamilyKind,
    /// Beam densities; the scenario's r₀ by default.
    #[arg(long, value_delimiter = ',')]
    pub r0: Vec<f64>,
    /// Relative quadrature tolerance.
    #[arg(long, default_value_t = 1e-9)]
    pub tol: f64,
}

pub fn fisher(a: FisherArgs) -> CliResult {
    let scn = load_scenario(&a.common)?;
    let opts = a.numerics.opts()?;
    if !(a.tol > 0.0 && a.tol < 1.0) {
        return Err(CliError::Config("tol must lie in (0, 1)".into()));
    }
    let fopts = FisherOpts { quad: QuadOpts { rel_tol: a.tol, ..FisherOpts::default().quad } };
    let r0s = if a.r0.is_empty() {
        vec![scn.r0]
    } else if scn.is_beam() {
        a.r0.clone()
    } else {
        return Err(CliError::Config("--r0 needs a beam-mode scenario".into()));
    };
    let fam = family_for(a.family, &scn)?;
    let mut out = open_output(a.common.out.as_deref())?;
    writeln!(out, "n,r0,I_n,I_n_cond,p_n_tot,noevent_part")?;
    for &r0 in &r0s {
        let profile: IntensityProfile = build_profile_with(&if scn.is_beam() { scn.with_r0(r0) } else { scn }, &opts)?;
        for &n in &a.n {
            let rep = fisher_info_with(n, &fam, &profile, fopts)?;
            let cond = fisher_conditional(&rep).unwrap_or(f64::NAN);
            writeln!(
                out,
                "{n},{r0:.10e},{:.16e},{:.16e},{:.16e},{:.16e}",
                rep.i_n, cond, rep.p_n_tot, rep.noevent_part
            )?;
        }
    }
    let mut m = RunManifest::new("fisher", Some(scn), a.common.out.as_deref());
    a.numerics.record(&mut m);
    m.set("n", join(&a.n)).set("family", a.family).set("r0", join(&r0s)).set("tol", a.tol);
    finish(&a.common, &m, out)
}

#[derive(Args, Debug)]
pub struct SweepArgs {
    #[command(flatten)]
    pub common: Common,
    #[arg(short, long, value_parser = parse_counts, default_value = "1:5")]
    pub n: std::vec::Vec<u32>,
    /// Beam densities; 0 selects the sparse limit.
    #[arg(long, value_delimiter = ',', required = true)]
    pub r0: Vec<f64>,
    #[arg(long, value_parser = parse_family, default_value = "coherent")]
    pub family: FamilyKind,
}

pub fn sweep_density(a: SweepArgs) -> CliResult {
    let scn = load_scenario(&a.common)?;
    let sweep = density_sweep(&a.n, &a.r0, a.family, &scn)?;
    let mut out = open_output(a.common.out.as_deref())?;
    sweep.write_csv(&mut out)?;
    let mut m = RunManifest::new("sweep-density", Some(scn), a.common.out.as_deref());
    m.set("n", join(&a.n)).set("r0", join(&a.r0)).set("family", a.family);
    finish(&a.common, &m, out)
}

#[derive(Args, Debug)]
pub struct SampleArgs {
    #[command(flatten)]
    pub common: Common,
    #[command(flatten)]
    pub numerics: Numerics,
    /// Requested detections per record.
    #[arg(short, long)]
    pub n: u32,
    #[arg(long, value_parser = parse_family, default_value = "coherent")]
    pub family: FamilyKind,
    /// Number of records.
    #[arg(long, default_value_t = 1000)]
    pub count: usize,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
}

pub fn sample(a: SampleArgs) -> CliResult {
    let scn = load_scenario(&a.common)?;
    let profile = build_profile_with(&scn, &a.numerics.opts()?)?;
    let fam = family_for(a.family, &scn)?;
    let batch = sample_arrivals(a.n, &fam, &profile, a.count, a.seed, scn.fingerprint())?;
    let mut out = open_output(a.common.out.as_deref())?;
    batch.write(&mut out)?;
    let mut m = RunManifest::new("sample", Some(scn), a.common.out.as_deref());
    a.numerics.record(&mut m);
    m.set("n", a.n).set("family", a.family).set("count", a.count).set("seed", a.seed);
    finish(&a.common, &m, out)
}

#[derive(Args, Debug)]
pub struct VerifyArgs {
    /// Report file; standard output when omitted.
    #[arg(short, long)]
    pub out: Option<std::path::PathBuf>,
    /// Restrict to these criterion or invariant identifiers.
    #[arg(long, value_delimiter = ',')]
    pub only: Vec<String>,
    /// Run the acceptance criteria without the invariants.
    #[arg(long)]
    pub criteria_only: bool,
}

pub fn verify(a: VerifyArgs) -> CliResult {
    let checks = if !a.only.is_empty() {
        let mut v = vec![];
        for id in &a.only {
            v.push(verify::check(id).ok_or_else(|| CliError::Config(format!("unknown check '{id}'")))?);
        }
        v
    } else if a.criteria_only {
        verify::acceptance()
    } else {
        verify::run_all()
    };
    let mut out = open_output(a.out.as_deref())?;
    for c in &checks {
        writeln!(out, "{c}")?;
    }
    let failed = checks.iter().filter(|c| !c.passed).count();
    writeln!(out, "{} passed, {failed} failed", checks.len() - failed)?;
    out.flush()?;
    if failed > 0 {
        return Err(CliError::Verification(failed));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn counts_accept_lists_and_ranges() {
        assert_eq!(parse_counts("1,3:5,8").unwrap(), vec![1, 3, 4, 5, 8]);
        assert!(parse_counts("0").is_err());
        assert!(parse_counts("4:2").is_err());
        assert!(parse_counts("x").is_err());
    }

    #[test]
    fn matching_density_inverts_family_width() {
        let navg = 100.0;
        let dp = arrival_core::scenario::beam_family_dp(3.0, navg);
        let scn = Scenario::finite(1.0, 0.1, 0.0, 1.0, -20.0, dp, navg).unwrap();
        assert!((matching_r0(&scn) - 3.0).abs() < 1e-12);
    }

    #[test]
    fn uniform_grid_endpoints() {
        let t = uniform_times(2.0, 5, true).unwrap();
        assert_eq!((t.len(), t[0], t[4]), (5, 0.0, 2.0));
        let t = uniform_times(2.0, 4, false).unwrap();
        assert_eq!((t.len(), t[0], t[3]), (4, 0.5, 2.0));
    }
}
