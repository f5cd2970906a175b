//! Tabulated intensity channels: adaptive Chebyshev panels or a uniform grid.

use rayon::prelude::*;

use crate::quad::{cheb_nodes, Cheb};

/// Channels carried by every table: ω, ∂ω/∂p₀ and (∂ω/∂p₀)²/ω.
pub const CHANNELS: usize = 3;

pub(crate) fn ratio(w: f64, dw: f64) -> f64 {
    if w > 1e-300 {
        dw * dw / w
    } else {
        0.0
    }
}

/// Values of the channels and of their running integrals at one time.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TableValue {
    pub val: [f64; CHANNELS],
    pub cum: [f64; CHANNELS],
}

#[derive(Debug, Clone)]
pub struct Panel {
    pub t_lo: f64,
    pub t_hi: f64,
    /// Panel variable is √t instead of t.
    pub sqrt_map: bool,
    val: [Cheb; CHANNELS],
    cum: [Cheb; CHANNELS],
    base: [f64; CHANNELS],
}

impl Panel {
    fn x_range(&self) -> (f64, f64) {
        if self.sqrt_map {
            (self.t_lo.sqrt(), self.t_hi.sqrt())
        } else {
            (self.t_lo, self.t_hi)
        }
    }

    fn local(&self, t: f64) -> f64 {
        let (lo, hi) = self.x_range();
        let x = if self.sqrt_map { t.max(0.0).sqrt() } else { t };
        ((2.0 * x - lo - hi) / (hi - lo)).clamp(-1.0, 1.0)
    }

    fn eval(&self, t: f64) -> TableValue {
        let x = self.local(t);
        let mut v = TableValue { val: [0.0; CHANNELS], cum: [0.0; CHANNELS] };
        for c in 0..CHANNELS {
            v.val[c] = self.val[c].eval(x);
            v.cum[c] = self.base[c] + self.cum[c].integral(x);
        }
        v
    }

    fn end_increment(&self) -> [f64; CHANNELS] {
        let mut out = [0.0; CHANNELS];
        for (o, c) in out.iter_mut().zip(&self.cum) {
            *o = c.integral(1.0);
        }
        out
    }
}

/// Adaptive Chebyshev panels on [0, t_end].
#[derive(Debug, Clone)]
pub struct PanelTable {
    pub panels: Vec<Panel>,
    pub evaluations: usize,
}

#[derive(Debug, Clone, Copy)]
pub struct PanelOpts {
    pub degree: usize,
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub min_width: f64,
}

impl Default for PanelOpts {
    fn default() -> Self {
        PanelOpts { degree: 16, rel_tol: 1e-11, abs_tol: 1e-14, min_width: 1e-9 }
    }
}

struct Seed {
    lo: f64,
    hi: f64,
    sqrt_map: bool,
}

type Fitted = (f64, f64, bool, [Cheb; CHANNELS], [Cheb; CHANNELS]);

fn fit_panel<E: Fn(f64) -> (f64, f64)>(eval: &E, lo: f64, hi: f64, sqrt_map: bool, deg: usize) -> ([Cheb; CHANNELS], [Cheb; CHANNELS]) {
    let (xl, xh) = if sqrt_map { (lo.sqrt(), hi.sqrt()) } else { (lo, hi) };
    let xs = cheb_nodes(xl, xh, deg);
    let mut vals = vec![[0.0; CHANNELS]; xs.len()];
    for (slot, &x) in vals.iter_mut().zip(&xs) {
        let t = if sqrt_map { x * x } else { x };
        let (w, dw) = eval(t);
        *slot = [w, dw, ratio(w, dw)];
    }
    let half = 0.5 * (xh - xl);
    let make = |c: usize, jac: bool| -> Cheb {
        let v: Vec<f64> = vals
            .iter()
            .zip(&xs)
            .map(|(row, &x)| if jac && sqrt_map { row[c] * 2.0 * x } else { row[c] })
            .collect();
        Cheb::fit(&v, half)
    };
    let val = [make(0, false), make(1, false), make(2, false)];
    let cum = if sqrt_map { [make(0, true), make(1, true), make(2, true)] } else { val.clone() };
    (val, cum)
}

fn refine<E: Fn(f64) -> (f64, f64)>(
    eval: &E,
    seed: Seed,
    opts: &PanelOpts,
    scale: &[f64; CHANNELS],
    out: &mut Vec<Fitted>,
    evals: &mut usize,
    depth: usize,
) {
    let (val, cum) = fit_panel(eval, seed.lo, seed.hi, seed.sqrt_map, opts.degree);
    *evals += opts.degree + 1;
    let ok = val.iter().zip(scale).all(|(c, &s)| {
        let (tail, head) = c.tail();
        tail <= opts.rel_tol * head.max(1e-3 * s) + opts.abs_tol * s.max(1e-300)
    });
    if ok || depth > 40 || seed.hi - seed.lo < opts.min_width {
        out.push((seed.lo, seed.hi, seed.sqrt_map, val, cum));
        return;
    }
    let mid = if seed.sqrt_map {
        let m = 0.5 * (seed.lo.sqrt() + seed.hi.sqrt());
        m * m
    } else {
        0.5 * (seed.lo + seed.hi)
    };
    refine(eval, Seed { lo: seed.lo, hi: mid, sqrt_map: seed.sqrt_map }, opts, scale, out, evals, depth + 1);
    refine(eval, Seed { lo: mid, hi: seed.hi, sqrt_map: seed.sqrt_map }, opts, scale, out, evals, depth + 1);
}

impl PanelTable {
    /// Builds panels on [0, t_end]: `n_sqrt` panels uniform in √t on [0, t_sqrt], then
    /// linear panels of width at most `width`, each refined until its Chebyshev tail is small.
    pub fn build<E: Fn(f64) -> (f64, f64) + Sync>(
        eval: &E,
        t_sqrt: f64,
        n_sqrt: usize,
        t_end: f64,
        width: f64,
        opts: PanelOpts,
    ) -> PanelTable {
        let mut seeds = Vec::new();
        let xs = t_sqrt.min(t_end).sqrt();
        for i in 0..n_sqrt {
            let a = xs * i as f64 / n_sqrt as f64;
            let b = xs * (i + 1) as f64 / n_sqrt as f64;
            seeds.push(Seed { lo: a * a, hi: b * b, sqrt_map: true });
        }
        let start = xs * xs;
        if t_end > start {
            let k = ((t_end - start) / width).ceil().max(1.0) as usize;
            for i in 0..k {
                let a = start + (t_end - start) * i as f64 / k as f64;
                let b = if i + 1 == k { t_end } else { start + (t_end - start) * (i + 1) as f64 / k as f64 };
                seeds.push(Seed { lo: a, hi: b, sqrt_map: false });
            }
        }
        // channel scales from a coarse pass over the seed end points
        let mut scale = [0.0f64; CHANNELS];
        for s in &seeds {
            for t in [s.lo, 0.5 * (s.lo + s.hi), s.hi] {
                let (w, dw) = eval(t);
                let row = [w, dw, ratio(w, dw)];
                for c in 0..CHANNELS {
                    scale[c] = scale[c].max(row[c].abs());
                }
            }
        }
        let pieces: Vec<(Vec<Fitted>, usize)> = seeds
            .into_par_iter()
            .map(|s| {
                let mut out = Vec::new();
                let mut evals = 0;
                refine(eval, s, &opts, &scale, &mut out, &mut evals, 0);
                (out, evals)
            })
            .collect();
        let mut panels = Vec::new();
        let mut evaluations = 0;
        let mut base = [0.0; CHANNELS];
        for (list, ev) in pieces {
            evaluations += ev;
            for (lo, hi, sqrt_map, val, cum) in list {
                let p = Panel { t_lo: lo, t_hi: hi, sqrt_map, val, cum, base };
                let inc = p.end_increment();
                for c in 0..CHANNELS {
                    base[c] += inc[c];
                }
                panels.push(p);
            }
        }
        PanelTable { panels, evaluations }
    }

    pub fn t_end(&self) -> f64 {
        self.panels.last().map_or(0.0, |p| p.t_hi)
    }

    fn find(&self, t: f64) -> &Panel {
        let i = self.panels.partition_point(|p| p.t_hi < t);
        &self.panels[i.min(self.panels.len() - 1)]
    }

    pub fn eval(&self, t: f64) -> TableValue {
        self.find(t).eval(t)
    }

    pub fn end(&self) -> TableValue {
        let p = self.panels.last().expect("empty table");
        p.eval(p.t_hi)
    }

    pub fn knots(&self) -> Vec<f64> {
        let mut k: Vec<f64> = self.panels.iter().map(|p| p.t_lo).collect();
        k.push(self.t_end());
        k
    }

    /// t with Ω(t) = u, for 0 ≤ u ≤ Ω(t_end).
    pub fn invert(&self, u: f64) -> f64 {
        let i = self.panels.partition_point(|p| p.base[0] + p.end_increment()[0] < u);
        let p = &self.panels[i.min(self.panels.len() - 1)];
        let (xl, xh) = p.x_range();
        let target = u - p.base[0];
        let to_t = |x: f64| if p.sqrt_map { x * x } else { x };
        let mut lo = -1.0;
        let mut hi = 1.0;
        let mut x = 0.0;
        let half = 0.5 * (xh - xl);
        for _ in 0..200 {
            let g = p.cum[0].integral(x) - target;
            if g.abs() <= 1e-13 * u.max(1.0) {
                break;
            }
            if g > 0.0 {
                hi = x;
            } else {
                lo = x;
            }
            let slope = p.cum[0].eval(x) * half;
            let mut next = if slope > 0.0 { x - g / slope } else { f64::NAN };
            if !(next > lo && next < hi) {
                next = 0.5 * (lo + hi);
            }
            if (next - x).abs() < 1e-16 {
                break;
            }
            x = next;
        }
        to_t(0.5 * (xl + xh) + half * x)
    }
}

/// Channels sampled on a uniform grid and interpolated linearly; the running integrals
/// are exact integrals of the interpolant.
#[derive(Debug, Clone)]
pub struct GridTable {
    pub dt: f64,
    pub val: Vec<[f64; CHANNELS]>,
    pub cum: Vec<[f64; CHANNELS]>,
}

impl GridTable {
    pub fn new(dt: f64, omega: &[f64], domega: &[f64]) -> GridTable {
        let val: Vec<[f64; CHANNELS]> =
            omega.iter().zip(domega).map(|(&w, &dw)| [w, dw, ratio(w, dw)]).collect();
        let mut cum = Vec::with_capacity(val.len());
        let mut acc = [0.0; CHANNELS];
        cum.push(acc);
        for w in val.windows(2) {
            for c in 0..CHANNELS {
                acc[c] += 0.5 * dt * (w[0][c] + w[1][c]);
            }
            cum.push(acc);
        }
        GridTable { dt, val, cum }
    }

    pub fn t_end(&self) -> f64 {
        (self.val.len() - 1) as f64 * self.dt
    }

    pub fn eval(&self, t: f64) -> TableValue {
        let last = self.val.len() - 1;
        let i = ((t / self.dt).floor().max(0.0) as usize).min(last.saturating_sub(1));
        let tau = (t - i as f64 * self.dt).clamp(0.0, self.dt);
        let mut v = TableValue { val: [0.0; CHANNELS], cum: [0.0; CHANNELS] };
        for c in 0..CHANNELS {
            let a = self.val[i][c];
            let b = self.val[(i + 1).min(last)][c];
            let slope = (b - a) / self.dt;
            v.val[c] = a + slope * tau;
            v.cum[c] = self.cum[i][c] + a * tau + 0.5 * slope * tau * tau;
        }
        v
    }

    pub fn end(&self) -> TableValue {
        let last = self.val.len() - 1;
        TableValue { val: self.val[last], cum: self.cum[last] }
    }

    pub fn knots(&self) -> Vec<f64> {
        // coarse break points for outer quadrature
        let n = self.val.len() - 1;
        let step = (n / 256).max(1);
        let mut k: Vec<f64> = (0..n).step_by(step).map(|i| i as f64 * self.dt).collect();
        k.push(self.t_end());
        k
    }

    pub fn invert(&self, u: f64) -> f64 {
        let n = self.cum.len();
        let j = self.cum.partition_point(|c| c[0] < u);
        if j == 0 {
            return 0.0;
        }
        let i = (j - 1).min(n - 2);
        let a = self.val[i][0];
        let b = self.val[i + 1][0];
        let slope = (b - a) / self.dt;
        let r = u - self.cum[i][0];
        // a τ + slope τ²/2 = r
        let tau = if slope.abs() * self.dt < 1e-12 * a.abs().max(1e-300) {
            r / a
        } else {
            let disc = (a * a + 2.0 * slope * r).max(0.0);
            2.0 * r / (a + disc.sqrt())
        };
        i as f64 * self.dt + tau.clamp(0.0, self.dt)
    }
}
