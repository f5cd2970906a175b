//! Units, scenario parameters and the source-state families.

use std::fmt;
use std::str::FromStr;

use statrs::function::gamma::ln_gamma;

use crate::deltakernel::DeltaParams;
use crate::error::{Error, Result};

/// Unit convention: ħ = 1, lengths in `l`, times in `τ`, momenta in `p̄ = ħ/l`,
/// masses in `p̄τ/l`. Every number handled by the crate is dimensionless in these units.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Units;

impl Units {
    pub const HBAR: f64 = 1.0;
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Mode {
    /// Finite mean particle number.
    Finite,
    /// Uniform beam limit, ⟨N⟩ = ∞.
    Beam,
}

impl FromStr for Mode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "finite" => Ok(Mode::Finite),
            "beam" => Ok(Mode::Beam),
            other => Err(Error::Config(format!("unknown mode '{other}' (expected finite|beam)"))),
        }
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Mode::Finite => "finite",
            Mode::Beam => "beam",
        })
    }
}

/// Physical parameters of one experiment.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Scenario {
    pub m: f64,
    pub a: f64,
    /// Detector width; 0 selects the delta detector.
    pub eps: f64,
    pub p0: f64,
    pub x0: f64,
    pub dp: f64,
    /// Mean particle number; infinite in beam mode.
    pub navg: f64,
    pub r0: f64,
    pub mode: Mode,
}

const KEYS: [&str; 9] = ["m", "a", "eps", "p0", "x0", "dp", "navg", "r0", "mode"];

/// Momentum width along the family approaching a beam of density `r0`.
pub fn beam_family_dp(r0: f64, navg: f64) -> f64 {
    (std::f64::consts::PI / 2.0).sqrt() * r0 / navg
}

impl Scenario {
    /// Single Gaussian particle seen by a detector of width `eps`.
    pub fn finite(m: f64, a: f64, eps: f64, p0: f64, x0: f64, dp: f64, navg: f64) -> Result<Self> {
        let r0 = navg * dp * (2.0 / std::f64::consts::PI).sqrt();
        let s = Scenario { m, a, eps, p0, x0, dp, navg, r0, mode: Mode::Finite };
        s.validate()?;
        Ok(s)
    }

    /// Delta-detector beam of density `r0`.
    pub fn beam(m: f64, a: f64, p0: f64, r0: f64) -> Result<Self> {
        let s = Scenario {
            m,
            a,
            eps: 0.0,
            p0,
            x0: f64::NEG_INFINITY,
            dp: 0.0,
            navg: f64::INFINITY,
            r0,
            mode: Mode::Beam,
        };
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: &str| Err(Error::Config(msg.to_string()));
        if !(self.m > 0.0 && self.m.is_finite()) {
            return bad("m must be positive");
        }
        if !(self.a >= 0.0 && self.a.is_finite()) {
            return bad("a must be nonnegative");
        }
        if !(self.eps >= 0.0 && self.eps.is_finite()) {
            return bad("eps must be nonnegative");
        }
        if !self.p0.is_finite() {
            return bad("p0 must be finite");
        }
        match self.mode {
            Mode::Beam => {
                if self.eps != 0.0 {
                    return bad("beam mode requires the delta detector (eps = 0)");
                }
                if self.navg.is_finite() {
                    return bad("beam mode requires navg = inf");
                }
                if !(self.r0 > 0.0 && self.r0.is_finite()) {
                    return bad("beam mode requires r0 > 0");
                }
            }
            Mode::Finite => {
                if !(self.navg > 0.0 && self.navg.is_finite()) {
                    return bad("finite mode requires 0 < navg < inf");
                }
                if !(self.dp > 0.0 && self.dp.is_finite()) {
                    return bad("finite mode requires dp > 0");
                }
                if !self.x0.is_finite() {
                    return bad("finite mode requires a finite x0");
                }
            }
        }
        Ok(())
    }

    pub fn is_delta(&self) -> bool {
        self.eps == 0.0
    }

    pub fn is_beam(&self) -> bool {
        self.mode == Mode::Beam
    }

    /// Absorption rate of the Gaussian detector, γ_ε = a/(2ε√(2π)).
    pub fn gamma_eps(&self) -> f64 {
        self.a / (2.0 * self.eps * (2.0 * std::f64::consts::PI).sqrt())
    }

    pub fn delta_params(&self) -> Result<DeltaParams> {
        DeltaParams::new(self.a, self.m)
    }

    pub fn with_p0(&self, p0: f64) -> Scenario {
        Scenario { p0, ..*self }
    }

    pub fn with_r0(&self, r0: f64) -> Scenario {
        Scenario { r0, ..*self }
    }

    /// Parses the flat `key = value` format. Blank lines and `#` comments are ignored.
    /// In finite mode a missing `dp` is derived from `r0` and `navg`.
    pub fn from_config_str(text: &str) -> Result<Self> {
        let mut vals: [Option<String>; 9] = Default::default();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("line {}: expected key = value", lineno + 1)))?;
            let k = k.trim();
            let idx = KEYS
                .iter()
                .position(|&key| key == k)
                .ok_or_else(|| Error::Config(format!("line {}: unknown key '{k}'", lineno + 1)))?;
            if vals[idx].is_some() {
                return Err(Error::Config(format!("line {}: duplicate key '{k}'", lineno + 1)));
            }
            vals[idx] = Some(v.trim().to_string());
        }
        let num = |i: usize| -> Result<Option<f64>> {
            match &vals[i] {
                None => Ok(None),
                Some(s) => s
                    .parse::<f64>()
                    .map(Some)
                    .map_err(|_| Error::Config(format!("key '{}': cannot parse '{s}'", KEYS[i]))),
            }
        };
        let mode = match &vals[8] {
            Some(s) => s.parse()?,
            None => Mode::Finite,
        };
        let m = num(0)?.unwrap_or(1.0);
        let a = num(1)?.ok_or_else(|| Error::Config("missing key 'a'".into()))?;
        let eps = num(2)?.unwrap_or(0.0);
        let p0 = num(3)?.ok_or_else(|| Error::Config("missing key 'p0'".into()))?;
        let scn = match mode {
            Mode::Beam => {
                if let Some(n) = num(6)? {
                    if n.is_finite() {
                        return Err(Error::Config("beam mode requires navg = inf".into()));
                    }
                }
                let r0 = num(7)?.ok_or_else(|| Error::Config("beam mode needs 'r0'".into()))?;
                Scenario { eps, ..Scenario::beam(m, a, p0, r0)? }
            }
            Mode::Finite => {
                let x0 = num(4)?.ok_or_else(|| Error::Config("finite mode needs 'x0'".into()))?;
                let navg = num(6)?.unwrap_or(1.0);
                let dp = match (num(5)?, num(7)?) {
                    (Some(dp), _) => dp,
                    (None, Some(r0)) => beam_family_dp(r0, navg),
                    (None, None) => return Err(Error::Config("finite mode needs 'dp' or 'r0'".into())),
                };
                let mut s = Scenario::finite(m, a, eps, p0, x0, dp, navg)?;
                if let Some(r0) = num(7)? {
                    s.r0 = r0;
                }
                s
            }
        };
        scn.validate()?;
        Ok(scn)
    }

    pub fn to_config_string(&self) -> String {
        let mut out = String::new();
        let fmtf = |x: f64| if x.is_infinite() { "inf".to_string() } else { format!("{x:e}") };
        out.push_str(&format!("mode = {}\n", self.mode));
        out.push_str(&format!("m = {}\n", fmtf(self.m)));
        out.push_str(&format!("a = {}\n", fmtf(self.a)));
        out.push_str(&format!("eps = {}\n", fmtf(self.eps)));
        out.push_str(&format!("p0 = {}\n", fmtf(self.p0)));
        if self.mode == Mode::Finite {
            out.push_str(&format!("x0 = {}\n", fmtf(self.x0)));
            out.push_str(&format!("dp = {}\n", fmtf(self.dp)));
        }
        out.push_str(&format!("navg = {}\n", fmtf(self.navg)));
        out.push_str(&format!("r0 = {}\n", fmtf(self.r0)));
        out
    }

    /// Stable 64-bit fingerprint of the parameters (FNV-1a over the bit patterns).
    pub fn fingerprint(&self) -> u64 {
        let mut h: u64 = 0xcbf2_9ce4_8422_2325;
        let fields = [self.m, self.a, self.eps, self.p0, self.x0, self.dp, self.navg, self.r0];
        for x in fields {
            for b in x.to_bits().to_le_bytes() {
                h ^= b as u64;
                h = h.wrapping_mul(0x0100_0000_01b3);
            }
        }
        h ^ (self.mode == Mode::Beam) as u64
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum FamilyKind {
    Fock,
    Coherent,
    QuasiFree,
}

impl FromStr for FamilyKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "fock" => Ok(FamilyKind::Fock),
            "coherent" => Ok(FamilyKind::Coherent),
            "quasi-free" | "quasifree" | "quasi_free" => Ok(FamilyKind::QuasiFree),
            other => Err(Error::Config(format!("unknown family '{other}'"))),
        }
    }
}

impl fmt::Display for FamilyKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            FamilyKind::Fock => "fock",
            FamilyKind::Coherent => "coherent",
            FamilyKind::QuasiFree => "quasi-free",
        })
    }
}

/// Source state family and its generating function F(Ω).
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum StateFamily {
    Fock { n: u64 },
    Coherent { mean: f64 },
    QuasiFree { mean: f64 },
}

impl StateFamily {
    pub fn fock(n: u64) -> Result<Self> {
        if n == 0 {
            return Err(Error::Domain("Fock family needs N >= 1".into()));
        }
        Ok(StateFamily::Fock { n })
    }

    pub fn coherent(mean: f64) -> Result<Self> {
        if !(mean > 0.0) {
            return Err(Error::Domain("coherent family needs <N> > 0".into()));
        }
        Ok(StateFamily::Coherent { mean })
    }

    pub fn quasi_free(mean: f64) -> Result<Self> {
        if !(mean > 0.0) {
            return Err(Error::Domain("quasi-free family needs <N> > 0".into()));
        }
        Ok(StateFamily::QuasiFree { mean })
    }

    /// Family of the given kind with mean particle number `navg` (rounded for Fock).
    pub fn from_kind(kind: FamilyKind, navg: f64) -> Result<Self> {
        match kind {
            FamilyKind::Fock => {
                if !navg.is_finite() {
                    return Err(Error::Unsupported("Fock family needs a finite particle number".into()));
                }
                StateFamily::fock(navg.round().max(0.0) as u64)
            }
            FamilyKind::Coherent => StateFamily::coherent(navg),
            FamilyKind::QuasiFree => StateFamily::quasi_free(navg),
        }
    }

    pub fn kind(&self) -> FamilyKind {
        match self {
            StateFamily::Fock { .. } => FamilyKind::Fock,
            StateFamily::Coherent { .. } => FamilyKind::Coherent,
            StateFamily::QuasiFree { .. } => FamilyKind::QuasiFree,
        }
    }

    pub fn mean(&self) -> f64 {
        match *self {
            StateFamily::Fock { n } => n as f64,
            StateFamily::Coherent { mean } | StateFamily::QuasiFree { mean } => mean,
        }
    }

    /// Upper end of the analytic domain of F: N for Fock, ∞ otherwise.
    pub fn omega_domain(&self) -> f64 {
        match *self {
            StateFamily::Fock { n } => n as f64,
            _ => f64::INFINITY,
        }
    }

    fn check(omega: f64) -> Result<()> {
        if omega >= 0.0 {
            Ok(())
        } else {
            Err(Error::Domain(format!("Omega must be >= 0, got {omega}")))
        }
    }

    /// F(Ω).
    pub fn f(&self, omega: f64) -> Result<f64> {
        self.f_n(0, omega)
    }

    /// ln Fₙ(Ω); −∞ where Fₙ vanishes.
    pub fn log_f_n(&self, n: u32, omega: f64) -> Result<f64> {
        Self::check(omega)?;
        Ok(match *self {
            StateFamily::Coherent { .. } => -omega,
            StateFamily::QuasiFree { .. } => ln_factorial(n) - (n as f64 + 1.0) * omega.ln_1p(),
            StateFamily::Fock { n: big_n } => {
                let nn = big_n as f64;
                if n as u64 > big_n || omega > nn {
                    return Ok(f64::NEG_INFINITY);
                }
                // N!/(Nⁿ(N−n)!) = ∏_{j<n} (1 − j/N)
                let pre: f64 = (0..n).map(|j| (-(j as f64) / nn).ln_1p()).sum();
                if n as u64 == big_n {
                    pre
                } else if omega == nn {
                    f64::NEG_INFINITY
                } else {
                    pre + (nn - n as f64) * (-omega / nn).ln_1p()
                }
            }
        })
    }

    /// Fₙ(Ω) = (−1)ⁿ F⁽ⁿ⁾(Ω).
    pub fn f_n(&self, n: u32, omega: f64) -> Result<f64> {
        Ok(self.log_f_n(n, omega)?.exp())
    }

    /// Hₙ(Ω) = Fₙ₊₁(Ω)/Fₙ(Ω).
    pub fn h_n(&self, n: u32, omega: f64) -> Result<f64> {
        if self.log_f_n(n, omega)? == f64::NEG_INFINITY {
            return Err(Error::SingularFamily { n, omega });
        }
        Ok(match *self {
            StateFamily::Coherent { .. } => 1.0,
            StateFamily::QuasiFree { .. } => (n as f64 + 1.0) / (1.0 + omega),
            StateFamily::Fock { n: big_n } => (big_n as f64 - n as f64) / (big_n as f64 - omega),
        })
    }
}

/// ln n!
pub fn ln_factorial(n: u32) -> f64 {
    if n < 2 {
        0.0
    } else {
        ln_gamma(n as f64 + 1.0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn families() -> Vec<StateFamily> {
        vec![
            StateFamily::fock(10).unwrap(),
            StateFamily::fock(37).unwrap(),
            StateFamily::coherent(5.0).unwrap(),
            StateFamily::quasi_free(5.0).unwrap(),
        ]
    }

    #[test]
    fn f_table_values() {
        let c = StateFamily::coherent(3.0).unwrap();
        let q = StateFamily::quasi_free(3.0).unwrap();
        let f3 = StateFamily::fock(3).unwrap();
        assert_eq!(c.f(0.0).unwrap(), 1.0);
        assert!((q.f(1.0).unwrap() - 0.5).abs() < 1e-15);
        assert_eq!(f3.f(3.5).unwrap(), 0.0);
        assert!((f3.f(1.5).unwrap() - 0.125).abs() < 1e-15);
        assert!(c.f(-1.0).is_err());
    }

    #[test]
    fn f_n_values() {
        let q = StateFamily::quasi_free(1.0).unwrap();
        assert!((q.f_n(2, 0.0).unwrap() - 2.0).abs() < 1e-13);
        let f2 = StateFamily::fock(2).unwrap();
        assert_eq!(f2.f_n(3, 0.1).unwrap(), 0.0);
        let c = StateFamily::coherent(1.0).unwrap();
        assert!((c.f_n(5, 2f64.ln()).unwrap() - 0.5).abs() < 1e-15);
        // Fock n = N is the constant N!/N^N
        assert!((f2.f_n(2, 1.7).unwrap() - 0.5).abs() < 1e-15);
    }

    #[test]
    fn h_n_values() {
        let c = StateFamily::coherent(1.0).unwrap();
        assert_eq!(c.h_n(4, 3.3).unwrap(), 1.0);
        let q = StateFamily::quasi_free(1.0).unwrap();
        assert_eq!(q.h_n(1, 0.0).unwrap(), 2.0);
        let f = StateFamily::fock(10).unwrap();
        // F₃(0)/F₂(0) from the closed form: (1 − 2/10)
        let oracle = f.f_n(3, 0.0).unwrap() / f.f_n(2, 0.0).unwrap();
        assert!((f.h_n(2, 0.0).unwrap() - 0.8).abs() < 1e-15);
        assert!((oracle - 0.8).abs() < 1e-14);
        let f2 = StateFamily::fock(2).unwrap();
        assert!(matches!(f2.h_n(3, 0.5), Err(Error::SingularFamily { .. })));
    }

    #[test]
    fn h_n_matches_finite_difference_of_f() {
        // F₁(0) = −F'(0) by central differences of F on the Fock branch
        let f = StateFamily::fock(10).unwrap();
        let h = 1e-5;
        let d1 = -(f.f(0.5 + h).unwrap() - f.f(0.5 - h).unwrap()) / (2.0 * h);
        assert!((d1 - f.f_n(1, 0.5).unwrap()).abs() < 1e-9);
        let d2 = (f.f(0.5 + h).unwrap() - 2.0 * f.f(0.5).unwrap() + f.f(0.5 - h).unwrap()) / (h * h);
        let h2 = d2 / d1;
        assert!((h2 - f.h_n(1, 0.5).unwrap()).abs() < 1e-4);
    }

    #[test]
    fn derivative_ladder() {
        let h = 1e-5;
        for fam in families() {
            let top = fam.omega_domain().min(20.0);
            for n in 0..8u32 {
                let mut om = h;
                while om < top - h {
                    let fd = -(fam.f_n(n, om + h).unwrap() - fam.f_n(n, om - h).unwrap()) / (2.0 * h);
                    let exact = fam.f_n(n + 1, om).unwrap();
                    let scale = exact.abs().max(1.0);
                    assert!((fd - exact).abs() < 1e-8 * scale, "{fam:?} n={n} om={om}: {fd} vs {exact}");
                    om += 0.37;
                }
            }
        }
    }

    #[test]
    fn decay_at_large_omega() {
        for fam in [StateFamily::coherent(1.0).unwrap(), StateFamily::quasi_free(1.0).unwrap()] {
            for n in 0..6u32 {
                let v = fam.f_n(n, 1e3).unwrap() * 1e3f64.powi(n as i32);
                let bound = ln_factorial(n).exp() / 1e3;
                assert!(v < bound, "{fam:?} n={n}: {v}");
                let w = fam.f_n(n, 1e6).unwrap() * 1e6f64.powi(n as i32);
                assert!(w <= v);
            }
        }
    }

    #[test]
    fn large_fock_is_finite() {
        let f = StateFamily::fock(1_000_000).unwrap();
        let v = f.f_n(3, 2.0).unwrap();
        let approx = (-2.0f64).exp();
        assert!((v - approx).abs() < 1e-5);
    }

    #[test]
    fn config_round_trip() {
        let s = Scenario::finite(1.0, 0.1, 0.5, 1.0, -20.0, 0.5f64.sqrt(), 100.0).unwrap();
        let back = Scenario::from_config_str(&s.to_config_string()).unwrap();
        assert_eq!(s.mode, back.mode);
        for (x, y) in [(s.m, back.m), (s.a, back.a), (s.eps, back.eps), (s.x0, back.x0), (s.dp, back.dp)] {
            assert_eq!(x, y);
        }
        let b = Scenario::beam(1.0, 0.1, 1.0, 56.42).unwrap();
        let back = Scenario::from_config_str(&b.to_config_string()).unwrap();
        assert_eq!(b, back);
    }

    #[test]
    fn config_errors() {
        assert!(Scenario::from_config_str("a = 0.1\np0 = 1\nfoo = 2").is_err());
        assert!(Scenario::from_config_str("a = 0.1\np0 = x").is_err());
        assert!(Scenario::from_config_str("mode = beam\na = 0.1\np0 = 1").is_err());
        assert!(Scenario::from_config_str("mode = sideways\na = 0.1\np0 = 1").is_err());
    }

    #[test]
    fn config_derives_dp_from_r0() {
        let s = Scenario::from_config_str("a = 0.1\np0 = 1\nx0 = -20\nnavg = 100\nr0 = 10\n").unwrap();
        assert!((s.dp - beam_family_dp(10.0, 100.0)).abs() < 1e-15);
    }

    #[test]
    fn gamma_eps_value() {
        let s = Scenario::finite(1.0, 0.1, 1.0, 1.0, -20.0, 1.0, 1.0).unwrap();
        assert!((s.gamma_eps() - 0.1 / (2.0 * (2.0 * std::f64::consts::PI).sqrt())).abs() < 1e-16);
    }
}
