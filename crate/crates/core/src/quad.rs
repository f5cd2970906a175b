//! Adaptive Gauss–Kronrod quadrature and Chebyshev panels.

use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::ops::{Add, Mul, Sub};

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Values that can be integrated: a vector space with a norm.
pub trait QuadValue: Copy + Add<Output = Self> + Sub<Output = Self> + Mul<f64, Output = Self> {
    fn zero() -> Self;
    fn norm(&self) -> f64;
}

impl QuadValue for f64 {
    fn zero() -> Self {
        0.0
    }
    fn norm(&self) -> f64 {
        self.abs()
    }
}

impl QuadValue for Complex64 {
    fn zero() -> Self {
        Complex64::new(0.0, 0.0)
    }
    fn norm(&self) -> f64 {
        Complex64::norm(*self)
    }
}

/// Fixed-length complex vector, for integrating several integrands on one partition.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CVec<const K: usize>(pub [Complex64; K]);

impl<const K: usize> Add for CVec<K> {
    type Output = Self;
    fn add(mut self, o: Self) -> Self {
        for (x, y) in self.0.iter_mut().zip(o.0) {
            *x += y;
        }
        self
    }
}

impl<const K: usize> Sub for CVec<K> {
    type Output = Self;
    fn sub(mut self, o: Self) -> Self {
        for (x, y) in self.0.iter_mut().zip(o.0) {
            *x -= y;
        }
        self
    }
}

impl<const K: usize> Mul<f64> for CVec<K> {
    type Output = Self;
    fn mul(mut self, s: f64) -> Self {
        for x in self.0.iter_mut() {
            *x *= s;
        }
        self
    }
}

impl<const K: usize> QuadValue for CVec<K> {
    fn zero() -> Self {
        CVec([Complex64::new(0.0, 0.0); K])
    }
    fn norm(&self) -> f64 {
        self.0.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }
}

#[allow(clippy::excessive_precision)]
const XGK: [f64; 11] = [
    0.995657163025808080735527280689003,
    0.973906528517171720077964012084452,
    0.930157491355708226001207180059508,
    0.865063366688984510732096688423493,
    0.780817726586416897063717578345042,
    0.679409568299024406234327365114874,
    0.562757134668604683339000099272694,
    0.433395394129247190799265943165784,
    0.294392862701460198131126603103866,
    0.148874338981631210884826001129720,
    0.0,
];

#[allow(clippy::excessive_precision)]
const WG: [f64; 5] = [
    0.066671344308688137593568809893332,
    0.149451349150580593145776339657697,
    0.219086362515982043995534934228163,
    0.269266719309996355091226921569469,
    0.295524224714752870173892994651338,
];

#[allow(clippy::excessive_precision)]
const WGK: [f64; 11] = [
    0.011694638867371874278064396062192,
    0.032558162307964727478818972459390,
    0.054755896574351996031381300244580,
    0.075039674810919952767043140916190,
    0.093125454583697605535065465083366,
    0.109387158802297641899210590325805,
    0.123491976262065851077958109831074,
    0.134709217311473325928054001771707,
    0.142775938577060080797094273138717,
    0.147739104901338491374841515972068,
    0.149445554002916905664936468389821,
];

/// 21-point Kronrod estimate and its difference to the embedded 10-point Gauss rule.
pub fn gk21<V: QuadValue, F: FnMut(f64) -> V>(f: &mut F, a: f64, b: f64) -> (V, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut k = fc * WGK[10];
    let mut g = V::zero();
    for j in 0..10 {
        let x = h * XGK[j];
        let s = f(c - x) + f(c + x);
        k = k + s * WGK[j];
        if j % 2 == 1 {
            g = g + s * WG[j / 2];
        }
    }
    (k * h, (k - g).norm() * h.abs())
}

/// Result of an adaptive integration.
#[derive(Debug, Clone, Copy)]
pub struct Integral<V> {
    pub value: V,
    pub error: f64,
    pub evaluations: usize,
}

struct Seg<V> {
    a: f64,
    b: f64,
    value: V,
    error: f64,
}

impl<V> PartialEq for Seg<V> {
    fn eq(&self, o: &Self) -> bool {
        self.error == o.error
    }
}
impl<V> Eq for Seg<V> {}
impl<V> PartialOrd for Seg<V> {
    fn partial_cmp(&self, o: &Self) -> Option<Ordering> {
        Some(self.cmp(o))
    }
}
impl<V> Ord for Seg<V> {
    fn cmp(&self, o: &Self) -> Ordering {
        self.error.total_cmp(&o.error)
    }
}

/// Tolerances for [`integrate`].
#[derive(Debug, Clone, Copy)]
pub struct QuadOpts {
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_segments: usize,
}

impl Default for QuadOpts {
    fn default() -> Self {
        QuadOpts { abs_tol: 1e-14, rel_tol: 1e-11, max_segments: 4000 }
    }
}

/// Globally adaptive GK21 over the partition given by `breaks` (sorted, at least two points).
pub fn integrate<V: QuadValue, F: FnMut(f64) -> V>(
    mut f: F,
    breaks: &[f64],
    opts: QuadOpts,
) -> Result<Integral<V>> {
    if breaks.len() < 2 {
        return Err(Error::Domain("integration needs at least two break points".into()));
    }
    let mut heap = BinaryHeap::new();
    let mut total = V::zero();
    let mut err = 0.0;
    let mut evals = 0;
    for w in breaks.windows(2) {
        if w[1] == w[0] {
            continue;
        }
        let (v, e) = gk21(&mut f, w[0], w[1]);
        evals += 21;
        total = total + v;
        err += e;
        heap.push(Seg { a: w[0], b: w[1], value: v, error: e });
    }
    loop {
        let tol = opts.abs_tol.max(opts.rel_tol * total.norm());
        if err <= tol {
            break;
        }
        if heap.len() >= opts.max_segments {
            return Err(Error::Tolerance { estimate: total.norm(), error: err, tol });
        }
        let Some(s) = heap.pop() else { break };
        let mid = 0.5 * (s.a + s.b);
        if mid <= s.a || mid >= s.b {
            return Err(Error::Tolerance { estimate: total.norm(), error: err, tol });
        }
        let (v1, e1) = gk21(&mut f, s.a, mid);
        let (v2, e2) = gk21(&mut f, mid, s.b);
        evals += 42;
        total = total - s.value + v1 + v2;
        err += e1 + e2 - s.error;
        heap.push(Seg { a: s.a, b: mid, value: v1, error: e1 });
        heap.push(Seg { a: mid, b: s.b, value: v2, error: e2 });
    }
    // re-sum to shed the drift of the running total
    let value = heap.iter().fold(V::zero(), |acc, s| acc + s.value);
    let error = heap.iter().map(|s| s.error).sum();
    Ok(Integral { value, error, evaluations: evals })
}

/// Integral over [a, ∞) through x = a + L·y/(1−y).
pub fn integrate_to_infinity<V: QuadValue, F: FnMut(f64) -> V>(
    mut f: F,
    a: f64,
    scale: f64,
    opts: QuadOpts,
) -> Result<Integral<V>> {
    let g = move |y: f64| {
        if y >= 1.0 {
            return V::zero();
        }
        let om = 1.0 - y;
        let x = a + scale * y / om;
        let v = f(x);
        if v.norm() == 0.0 {
            v
        } else {
            v * (scale / (om * om))
        }
    };
    let breaks: Vec<f64> = (0..=8).map(|i| i as f64 / 8.0).collect();
    integrate(g, &breaks, opts)
}

/// Chebyshev–Lobatto interpolant on one panel, with its running antiderivative.
#[derive(Debug, Clone)]
pub struct Cheb {
    pub coef: Vec<f64>,
    pub integ: Vec<f64>,
}

/// Lobatto points cos(πj/N) mapped to [lo, hi], ordered from lo to hi.
pub fn cheb_nodes(lo: f64, hi: f64, degree: usize) -> Vec<f64> {
    (0..=degree)
        .map(|j| {
            let x = -(std::f64::consts::PI * j as f64 / degree as f64).cos();
            0.5 * (lo + hi) + 0.5 * (hi - lo) * x
        })
        .collect()
}

impl Cheb {
    /// Fit from samples at [`cheb_nodes`]; `half_width` scales the antiderivative.
    pub fn fit(values: &[f64], half_width: f64) -> Cheb {
        let n = values.len() - 1;
        let mut coef = vec![0.0; n + 1];
        // values are ordered from x = −1 to 1, i.e. node j ↔ cos(π(n−j)/n)
        for (k, c) in coef.iter_mut().enumerate() {
            let mut s = 0.0;
            for (j, &v) in values.iter().enumerate() {
                let jj = n - j;
                let w = if jj == 0 || jj == n { 0.5 } else { 1.0 };
                s += w * v * (std::f64::consts::PI * (k * jj) as f64 / n as f64).cos();
            }
            *c = 2.0 * s / n as f64;
        }
        coef[0] *= 0.5;
        coef[n] *= 0.5;
        let integ = antiderivative(&coef, half_width);
        Cheb { coef, integ }
    }

    pub fn eval(&self, x: f64) -> f64 {
        clenshaw(&self.coef, x)
    }

    /// ∫ from the panel start to x (x in [−1, 1]), in the panel's physical variable.
    pub fn integral(&self, x: f64) -> f64 {
        clenshaw(&self.integ, x)
    }

    /// Size of the trailing coefficients relative to the largest one.
    pub fn tail(&self) -> (f64, f64) {
        let n = self.coef.len();
        let tail = self.coef[n - 1].abs().max(self.coef[n - 2].abs()).max(self.coef[n - 3].abs());
        let head = self.coef.iter().fold(0.0f64, |m, c| m.max(c.abs()));
        (tail, head)
    }
}

fn antiderivative(c: &[f64], half_width: f64) -> Vec<f64> {
    let n = c.len();
    let mut b = vec![0.0; n + 1];
    let get = |k: usize| if k < n { c[k] } else { 0.0 };
    for k in 1..=n {
        let lower = if k == 1 { 2.0 * get(0) } else { get(k - 1) };
        b[k] = (lower - get(k + 1)) / (2.0 * k as f64);
    }
    // fix b[0] so that the antiderivative vanishes at x = −1
    let mut at_minus_one = 0.0;
    for (k, &bk) in b.iter().enumerate().skip(1) {
        at_minus_one += if k % 2 == 0 { bk } else { -bk };
    }
    b[0] = -at_minus_one;
    for v in b.iter_mut() {
        *v *= half_width;
    }
    b
}

fn clenshaw(c: &[f64], x: f64) -> f64 {
    let mut b1 = 0.0;
    let mut b2 = 0.0;
    for &ck in c.iter().skip(1).rev() {
        let b0 = 2.0 * x * b1 - b2 + ck;
        b2 = b1;
        b1 = b0;
    }
    x * b1 - b2 + c[0]
}
