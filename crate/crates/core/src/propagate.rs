//! Single-particle absorbed evolution: the Volterra equation of a Gaussian detector and
//! the renewal equation of the delta detector, both solved by forward recursion.

use std::io::Write;

use num_complex::Complex64;

use crate::deltakernel::{gaussian_free_at_origin, gaussian_moment};
use crate::error::{Error, Result};
use crate::scenario::Scenario;

const TWO_PI: f64 = std::f64::consts::TAU;

/// Uniform time grid starting at t = 0.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimeGrid {
    pub t_max: f64,
    pub dt: f64,
}

impl TimeGrid {
    pub fn new(t_max: f64, dt: f64) -> Result<Self> {
        if !(t_max > 0.0 && dt > 0.0 && t_max.is_finite()) {
            return Err(Error::Domain(format!("bad grid t_max={t_max}, dt={dt}")));
        }
        Ok(TimeGrid { t_max, dt })
    }

    /// M = ⌈t_max/dt⌉ + 1.
    pub fn len(&self) -> usize {
        (self.t_max / self.dt - 1e-9).ceil() as usize + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn t(&self, i: usize) -> f64 {
        i as f64 * self.dt
    }

    pub fn times(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.len()).map(move |i| self.t(i))
    }
}

/// Complex samples on a [`TimeGrid`].
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexSeries {
    pub grid: TimeGrid,
    pub values: Vec<Complex64>,
}

impl ComplexSeries {
    pub fn new(grid: TimeGrid, values: Vec<Complex64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::GridMismatch(format!("{} values for {} nodes", values.len(), grid.len())));
        }
        Ok(ComplexSeries { grid, values })
    }

    pub fn from_fn<F: FnMut(f64) -> Complex64>(grid: TimeGrid, mut f: F) -> Self {
        let values = grid.times().map(&mut f).collect();
        ComplexSeries { grid, values }
    }

    /// CSV with header `t,re,im` preceded by a `# quantity` line.
    pub fn write_csv<W: Write>(&self, name: &str, mut w: W) -> Result<()> {
        writeln!(w, "# {name}")?;
        writeln!(w, "t,re,im")?;
        for (i, v) in self.values.iter().enumerate() {
            writeln!(w, "{:.10e},{:.16e},{:.16e}", self.grid.t(i), v.re, v.im)?;
        }
        Ok(())
    }
}

/// Gaussian one-particle state in momentum space.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GaussianPacket {
    pub p0: f64,
    pub x0: f64,
    pub dp: f64,
}

impl GaussianPacket {
    pub fn from_scenario(scn: &Scenario) -> Self {
        GaussianPacket { p0: scn.p0, x0: scn.x0, dp: scn.dp }
    }

    /// χ̂(p) = e^{−(p−p₀)²/4Δp² − ipx₀}/(Δp^{1/2}(2π)^{1/4}).
    pub fn chi_hat(&self, p: f64) -> Complex64 {
        let e = -(p - self.p0) * (p - self.p0) / (4.0 * self.dp * self.dp);
        Complex64::from_polar(e.exp(), -p * self.x0) / (self.dp.sqrt() * TWO_PI.sqrt().sqrt())
    }
}

fn require_width(scn: &Scenario) -> Result<()> {
    if scn.eps > 0.0 {
        Ok(())
    } else {
        Err(Error::Mode("a Gaussian detector needs eps > 0".into()))
    }
}

/// h₀(t) = ⟨φ_ε|e^{−itH}χ⟩ in closed form.
pub fn gaussian_overlap_h0_at(scn: &Scenario, t: f64) -> Result<Complex64> {
    require_width(scn)?;
    let pk = GaussianPacket::from_scenario(scn);
    let e = scn.eps;
    let a = Complex64::new(e * e + 0.25 / (pk.dp * pk.dp), 0.5 * t / scn.m);
    // φ̂_ε(p) = √(2ε)e^{−ε²p²}/(2π)^{1/4}
    Ok(gaussian_moment(&pk, a) * (2.0 * e).sqrt() / TWO_PI.sqrt().sqrt())
}

pub fn gaussian_overlap_h0(scn: &Scenario, grid: TimeGrid) -> Result<ComplexSeries> {
    require_width(scn)?;
    Ok(ComplexSeries::from_fn(grid, |t| gaussian_overlap_h0_at(scn, t).unwrap()))
}

/// g(t) = ⟨φ_ε|e^{−itH}φ_ε⟩ = (2ε/√(2π))·√(π/(2ε² + it/2m)).
pub fn gaussian_kernel_g_at(scn: &Scenario, t: f64) -> Result<Complex64> {
    require_width(scn)?;
    let e = scn.eps;
    let a = Complex64::new(2.0 * e * e, 0.5 * t / scn.m);
    Ok((Complex64::from(std::f64::consts::PI) / a).sqrt() * (2.0 * e / TWO_PI.sqrt()))
}

pub fn gaussian_kernel_g(scn: &Scenario, grid: TimeGrid) -> Result<ComplexSeries> {
    require_width(scn)?;
    Ok(ComplexSeries::from_fn(grid, |t| gaussian_kernel_g_at(scn, t).unwrap()))
}

/// Free packet at the origin, the drive of the renewal equation.
pub fn free_at_origin(scn: &Scenario, grid: TimeGrid) -> ComplexSeries {
    let pk = GaussianPacket::from_scenario(scn);
    ComplexSeries::from_fn(grid, |t| gaussian_free_at_origin(&pk, t, scn.m))
}

/// Solves h(t) = h₀(t) − (γ/2)∫₀ᵗ g(t−s)h(s)ds with the trapezoidal product rule.
pub fn solve_volterra(h0: &ComplexSeries, g: &ComplexSeries, gamma: f64) -> Result<ComplexSeries> {
    if h0.grid != g.grid || h0.values.len() != g.values.len() {
        return Err(Error::GridMismatch("h0 and g live on different grids".into()));
    }
    let dt = h0.grid.dt;
    let n = h0.values.len();
    let gv = &g.values;
    let mut h = Vec::with_capacity(n);
    h.push(h0.values[0]);
    let c = 0.5 * gamma * dt;
    let diag = 1.0 + 0.5 * c * gv[0];
    for i in 1..n {
        let mut s = 0.5 * gv[i] * h[0];
        for j in 1..i {
            s += gv[i - j] * h[j];
        }
        h.push((h0.values[i] - c * s) / diag);
    }
    ComplexSeries::new(h0.grid, h)
}

/// Product-integration weights for ∫ f(s)/√(tᵢ−s) ds with piecewise-linear f:
/// node j contributes √dt·(A_{i−j} + B_{i−j+1}).
struct AbelWeights {
    a: Vec<f64>,
    b: Vec<f64>,
}

impl AbelWeights {
    fn new(n: usize) -> Self {
        let mut a = vec![0.0; n + 1];
        let mut b = vec![0.0; n + 1];
        for k in 1..=n {
            let kf = k as f64;
            let (s1, s0) = (kf.sqrt(), (kf - 1.0).sqrt());
            let i_half = 2.0 / 3.0 * (kf * s1 - (kf - 1.0) * s0);
            let i_mhalf = 2.0 * (s1 - s0);
            a[k] = i_half - (kf - 1.0) * i_mhalf;
            b[k] = kf * i_mhalf - i_half;
        }
        AbelWeights { a, b }
    }

    /// ∫₀^{tᵢ} f(s)/√(tᵢ−s)ds / √dt over nodes 0..=i of `f`.
    fn apply(&self, f: &[Complex64], i: usize) -> Complex64 {
        let mut s = Complex64::new(0.0, 0.0);
        for j in 0..i {
            s += self.a[i - j] * f[j] + self.b[i - j] * f[j + 1];
        }
        s
    }
}

/// Solves f(t) = f_free(t) − (d/√π)∫₀ᵗ f(s)/√(t−s)ds by product integration.
pub fn solve_renewal(f_free: &ComplexSeries, d: Complex64) -> ComplexSeries {
    let n = f_free.values.len();
    let w = AbelWeights::new(n);
    let c = d / std::f64::consts::PI.sqrt() * f_free.grid.dt.sqrt();
    let mut f: Vec<Complex64> = Vec::with_capacity(n);
    f.push(f_free.values[0]);
    let diag = 1.0 + c * w.b[1];
    for i in 1..n {
        let mut s = Complex64::new(0.0, 0.0);
        for j in 0..i {
            s += w.a[i - j] * f[j];
        }
        for j in 0..i - 1 {
            s += w.b[i - j] * f[j + 1];
        }
        f.push((f_free.values[i] - c * s) / diag);
    }
    ComplexSeries { grid: f_free.grid, values: f }
}

/// Residual f(tᵢ) − f_free(tᵢ) + (d/√π)∫₀^{tᵢ} f/√(tᵢ−s) at every node, using the same
/// product rule as [`solve_renewal`].
pub fn renewal_residual(f: &ComplexSeries, f_free: &ComplexSeries, d: Complex64) -> Vec<Complex64> {
    let n = f.values.len();
    let w = AbelWeights::new(n);
    let c = d / std::f64::consts::PI.sqrt() * f.grid.dt.sqrt();
    (0..n)
        .map(|i| f.values[i] - f_free.values[i] + c * w.apply(&f.values, i))
        .collect()
}

/// Cumulative detection probability ∫₀ᵗ γ|h|² by the trapezoid rule.
pub fn detection_probability(h: &ComplexSeries, gamma: f64) -> Vec<f64> {
    let dt = h.grid.dt;
    let mut out = Vec::with_capacity(h.values.len());
    let mut acc = 0.0;
    out.push(0.0);
    for w in h.values.windows(2) {
        acc += 0.5 * dt * gamma * (w[0].norm_sqr() + w[1].norm_sqr());
        out.push(acc);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::deltakernel::{f_p, kernel_g, DeltaParams};
    use crate::quad::{integrate, QuadOpts};

    fn fig2(eps: f64) -> Scenario {
        Scenario::finite(1.0, 0.1, eps, 1.0, -20.0, 0.5f64.sqrt(), 1.0).unwrap()
    }

    #[test]
    fn grid_size() {
        let g = TimeGrid::new(1.0, 0.1).unwrap();
        assert_eq!(g.len(), 11);
        assert_eq!(TimeGrid::new(1.05, 0.1).unwrap().len(), 12);
        assert!(TimeGrid::new(0.0, 0.1).is_err());
    }

    #[test]
    fn series_length_checked() {
        let g = TimeGrid::new(1.0, 0.5).unwrap();
        assert!(ComplexSeries::new(g, vec![Complex64::new(0.0, 0.0); 2]).is_err());
    }

    #[test]
    fn h0_matched_widths_at_zero_time() {
        let eps = 0.7;
        let scn = Scenario::finite(1.0, 0.1, eps, 0.0, 0.0, 0.5 / eps, 1.0).unwrap();
        let h = gaussian_overlap_h0_at(&scn, 0.0).unwrap();
        // χ(x) with p₀ = x₀ = 0 is the position Gaussian of width 1/(2Δp) = ε, equal to φ_ε
        let phi = |x: f64| (-0.25 * x * x / (eps * eps)).exp() / (eps.sqrt() * TWO_PI.sqrt().sqrt());
        let chi = |x: f64| {
            let s = 0.5 / scn.dp;
            (-0.25 * x * x / (s * s)).exp() / (s.sqrt() * TWO_PI.sqrt().sqrt())
        };
        let r = integrate(|x| phi(x) * chi(x), &[-12.0, -3.0, 0.0, 3.0, 12.0], QuadOpts::default()).unwrap();
        assert!((h.norm() - r.value).abs() < 1e-12);
        assert!((h.norm() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn h0_vanishes_far_away() {
        let scn = Scenario::finite(1.0, 0.1, 1.0, 1.0, -200.0, 0.5f64.sqrt(), 1.0).unwrap();
        assert!(gaussian_overlap_h0_at(&scn, 0.0).unwrap().norm() < 1e-12);
    }

    #[test]
    fn h0_matches_momentum_quadrature() {
        let scn = fig2(1.0);
        let t = 20.0;
        let pk = GaussianPacket::from_scenario(&scn);
        let e = scn.eps;
        let phi_hat = |p: f64| (2.0 * e).sqrt() * (-e * e * p * p).exp() / TWO_PI.sqrt().sqrt();
        let breaks: Vec<f64> = (0..=160).map(|i| -7.0 + 0.1 * i as f64).collect();
        let opts = QuadOpts { abs_tol: 1e-15, rel_tol: 1e-13, max_segments: 20000 };
        let q = integrate(|p| phi_hat(p) * Complex64::from_polar(1.0, -t * p * p / 2.0) * pk.chi_hat(p), &breaks, opts)
            .unwrap();
        let h = gaussian_overlap_h0_at(&scn, t).unwrap();
        assert!((q.value - h).norm() < 1e-8 * h.norm().max(1e-3), "{} vs {}", q.value, h);
    }

    #[test]
    fn kernel_g_properties() {
        let scn = fig2(1.0);
        assert!((gaussian_kernel_g_at(&scn, 0.0).unwrap() - 1.0).norm() < 1e-15);
        for i in 0..100 {
            assert!(gaussian_kernel_g_at(&scn, 0.37 * i as f64).unwrap().norm() <= 1.0 + 1e-15);
        }
        let e = 1.0;
        let t = 2.0;
        let q = integrate(
            |p: f64| Complex64::from_polar(2.0 * e * (-2.0 * e * e * p * p).exp() / TWO_PI.sqrt(), -t * p * p / 2.0),
            &[-8.0, -2.0, 0.0, 2.0, 8.0],
            QuadOpts::default(),
        )
        .unwrap();
        assert!((q.value - gaussian_kernel_g_at(&scn, t).unwrap()).norm() < 1e-8);
        assert!(gaussian_kernel_g_at(&fig2(0.0), 1.0).is_err());
    }

    #[test]
    fn volterra_without_absorber() {
        let scn = fig2(0.5);
        let grid = TimeGrid::new(5.0, 0.05).unwrap();
        let h0 = gaussian_overlap_h0(&scn, grid).unwrap();
        let g = gaussian_kernel_g(&scn, grid).unwrap();
        assert_eq!(solve_volterra(&h0, &g, 0.0).unwrap(), h0);
    }

    #[test]
    fn volterra_constant_kernel() {
        let gamma = 0.8;
        let mut errs = Vec::new();
        for dt in [0.02, 0.01, 0.005] {
            let grid = TimeGrid::new(4.0, dt).unwrap();
            let one = ComplexSeries::from_fn(grid, |_| Complex64::new(1.0, 0.0));
            let h = solve_volterra(&one, &one, gamma).unwrap();
            let err = h
                .values
                .iter()
                .enumerate()
                .map(|(i, v)| (v - (-0.5 * gamma * grid.t(i)).exp()).norm())
                .fold(0.0, f64::max);
            errs.push(err);
        }
        assert!(errs[0] < 1e-4);
        let r = errs[0] / errs[1];
        assert!((3.5..4.5).contains(&r), "ratio {r}");
    }

    #[test]
    fn volterra_grid_mismatch() {
        let a = ComplexSeries::from_fn(TimeGrid::new(1.0, 0.1).unwrap(), |_| Complex64::new(1.0, 0.0));
        let b = ComplexSeries::from_fn(TimeGrid::new(1.0, 0.05).unwrap(), |_| Complex64::new(1.0, 0.0));
        assert!(matches!(solve_volterra(&a, &b, 1.0), Err(Error::GridMismatch(_))));
    }

    #[test]
    fn norm_loss_is_monotone_and_bounded() {
        let scn = fig2(0.5);
        let grid = TimeGrid::new(40.0, 0.02).unwrap();
        let h0 = gaussian_overlap_h0(&scn, grid).unwrap();
        let g = gaussian_kernel_g(&scn, grid).unwrap();
        let h = solve_volterra(&h0, &g, scn.gamma_eps()).unwrap();
        let p = detection_probability(&h, scn.gamma_eps());
        assert!(p.windows(2).all(|w| w[1] >= w[0]));
        assert!(*p.last().unwrap() <= 1.0);
        assert!(*p.last().unwrap() > 0.01, "{}", p.last().unwrap());
    }

    #[test]
    fn renewal_trivial_drive() {
        let grid = TimeGrid::new(2.0, 0.01).unwrap();
        let drive = ComplexSeries::from_fn(grid, |t| Complex64::new(t.cos(), t.sin()));
        assert_eq!(solve_renewal(&drive, Complex64::new(0.0, 0.0)), drive);
    }

    #[test]
    fn renewal_constant_drive_is_kernel() {
        let dp = DeltaParams::new(0.1, 1.0).unwrap();
        let grid = TimeGrid::new(10.0, 1e-3).unwrap();
        let one = ComplexSeries::from_fn(grid, |_| Complex64::new(1.0, 0.0));
        let f = solve_renewal(&one, dp.d());
        for i in (0..grid.len()).step_by(500) {
            let want = kernel_g(grid.t(i), &dp);
            assert!((f.values[i] - want).norm() < 1e-6, "t={}", grid.t(i));
        }
    }

    #[test]
    fn renewal_monochromatic_matches_analytic() {
        let dp = DeltaParams::new(0.1, 1.0).unwrap();
        let grid = TimeGrid::new(20.0, 1e-3).unwrap();
        let drive = ComplexSeries::from_fn(grid, |t| Complex64::from_polar(1.0 / TWO_PI.sqrt(), -t / 2.0));
        let f = solve_renewal(&drive, dp.d());
        for t in [1.0, 5.0, 20.0] {
            let i = (t / grid.dt).round() as usize;
            let want = f_p(1.0, t, &dp);
            assert!((f.values[i] - want).norm() < 1e-4 * want.norm());
        }
    }
}
