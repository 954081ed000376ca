//! Approximation of orientation-preserving diffeomorphisms of the interval and the circle by
//! elements of F and T, and the distance between first derivatives.

use std::sync::Arc;

use crate::dyadic::{Dyadic, MAX_EXP};
use crate::error::{Error, Result};
use crate::thompson::{pl_to_element, GroupElement, PLMap};

/// Tolerance used when bracketing dyadic candidates in floating point.
const BRACKET_TOL: f64 = 1e-12;

/// Grid size for estimating `sup f'` when no bound is given.
const SLOPE_GRID: usize = 1 << 14;

/// Whether the target is a homeomorphism of `[0, 1]` or of the circle.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Mode {
    Interval,
    Circle,
}

pub type RealFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// A diffeomorphism given as an evaluation oracle. For circle maps `f` is the lift on `[0, 1]`.
#[derive(Clone)]
pub struct Diffeo {
    pub f: RealFn,
    pub fprime: Option<RealFn>,
    pub bound: Option<f64>,
    pub mode: Mode,
}

impl Diffeo {
    pub fn new(f: RealFn, mode: Mode) -> Self {
        Diffeo { f, fprime: None, bound: None, mode }
    }

    /// Named examples: `identity`, `quadratic` for `(x + x²)/2`, and `rotation:<p>`.
    pub fn builtin(name: &str) -> Result<Self> {
        if name == "identity" {
            return Ok(Diffeo {
                f: Arc::new(|x| x),
                fprime: Some(Arc::new(|_| 1.0)),
                bound: Some(1.0),
                mode: Mode::Interval,
            });
        }
        if name == "quadratic" {
            return Ok(Diffeo {
                f: Arc::new(|x| (x + x * x) / 2.0),
                fprime: Some(Arc::new(|x| (1.0 + 2.0 * x) / 2.0)),
                bound: Some(1.5),
                mode: Mode::Interval,
            });
        }
        if let Some(arg) = name.strip_prefix("rotation:") {
            let theta = parse_real(arg)?;
            return Ok(Diffeo {
                f: Arc::new(move |x| x + theta),
                fprime: Some(Arc::new(|_| 1.0)),
                bound: Some(1.0),
                mode: Mode::Circle,
            });
        }
        Err(Error::Parse(format!("unknown builtin function {name:?}")))
    }

    /// Monotone piecewise-linear interpolation of sampled `(x, f(x))` pairs.
    pub fn from_table(mut samples: Vec<(f64, f64)>, mode: Mode) -> Result<Self> {
        samples.sort_by(|a, b| a.0.total_cmp(&b.0));
        if samples.len() < 2 {
            return Err(Error::NotDiffeo("a table needs at least two samples".into()));
        }
        for w in samples.windows(2) {
            if w[1].0 <= w[0].0 || w[1].1 <= w[0].1 {
                return Err(Error::NotDiffeo(format!("samples are not strictly increasing near x = {}", w[0].0)));
            }
        }
        let s = Arc::new(samples);
        let t = s.clone();
        let f = move |x: f64| {
            let i = t.partition_point(|p| p.0 <= x).clamp(1, t.len() - 1);
            let (a, b) = (t[i - 1], t[i]);
            a.1 + (x - a.0) * (b.1 - a.1) / (b.0 - a.0)
        };
        let fp = move |x: f64| {
            let i = s.partition_point(|p| p.0 <= x).clamp(1, s.len() - 1);
            let (a, b) = (s[i - 1], s[i]);
            (b.1 - a.1) / (b.0 - a.0)
        };
        Ok(Diffeo { f: Arc::new(f), fprime: Some(Arc::new(fp)), bound: None, mode })
    }

    /// Parse CSV lines `x,f(x)`.
    pub fn from_csv(text: &str, mode: Mode) -> Result<Self> {
        let mut samples = Vec::new();
        for (n, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let mut it = line.split(',');
            let (Some(a), Some(b)) = (it.next(), it.next()) else {
                return Err(Error::Parse(format!("line {} is not an x,f(x) pair", n + 1)));
            };
            match (a.trim().parse::<f64>(), b.trim().parse::<f64>()) {
                (Ok(x), Ok(y)) => samples.push((x, y)),
                _ if n == 0 => continue,
                _ => return Err(Error::Parse(format!("line {} is not numeric", n + 1))),
            }
        }
        Diffeo::from_table(samples, mode)
    }

    pub fn eval(&self, x: f64) -> f64 {
        (self.f)(x)
    }

    /// `sup f'`, estimated by central differences when no bound was supplied.
    pub fn slope_bound(&self) -> f64 {
        if let Some(s) = self.bound {
            return s.max(1.0);
        }
        let h = 1.0 / SLOPE_GRID as f64;
        let mut s = 0.0f64;
        for i in 0..=SLOPE_GRID {
            let x = i as f64 * h;
            let (a, b) = ((x - h / 2.0).max(0.0), (x + h / 2.0).min(1.0));
            s = s.max((self.eval(b) - self.eval(a)) / (b - a));
        }
        (1.1 * s).max(1.0)
    }
}

fn parse_real(s: &str) -> Result<f64> {
    if let Some((a, b)) = s.split_once('/') {
        let (a, b): (f64, f64) = (
            a.trim().parse().map_err(|_| Error::Parse(format!("bad number {s:?}")))?,
            b.trim().parse().map_err(|_| Error::Parse(format!("bad number {s:?}")))?,
        );
        return Ok(a / b);
    }
    s.trim().parse().map_err(|_| Error::Parse(format!("bad number {s:?}")))
}

fn over_ceil(x: f64) -> f64 {
    x.floor() + 1.0
}

/// A dyadic rational strictly inside `(p, q)`.
///
/// Uses `k = max(0, ⌊-log₂(q - p)⌋ + 1)` and `m = ⌊2^k p⌋ + 1`, raising `k` if rounding
/// puts the candidate on the boundary.
pub fn dyadic_between(p: f64, q: f64) -> Result<Dyadic> {
    if !(p.is_finite() && q.is_finite()) || q <= p {
        return Err(Error::Interval(format!("({p}, {q}) is empty")));
    }
    let shift = p.floor();
    let (p0, q0) = (p - shift, q - shift);
    let mut k = over_ceil(-(q0 - p0).log2()).max(0.0) as u32;
    while k <= MAX_EXP.min(100) {
        let scale = (k as f64).exp2();
        let m = over_ceil(scale * p0);
        let v = m / scale;
        let margin = BRACKET_TOL * (q0 - p0);
        if v > p0 + margin && v < q0 - margin {
            return Ok(Dyadic::new(m as i128, k) + Dyadic::from_int(shift as i128));
        }
        k += 1;
    }
    Err(Error::Interval(format!("({p}, {q}) is too narrow")))
}

/// PL bijection from `p` to `q` with dyadic breakpoints and power-of-two slopes.
pub fn dyadic_interpolation(p: (Dyadic, Dyadic), q: (Dyadic, Dyadic)) -> Result<Vec<(Dyadic, Dyadic)>> {
    let r1 = q.0 - p.0;
    let r2 = q.1 - p.1;
    if !r1.is_positive() || !r2.is_positive() {
        return Err(Error::Interval(format!("points {p:?} and {q:?} are not increasing")));
    }
    let (m1, k1) = (r1.numerator(), r1.exponent());
    let (m2, k2) = (r2.numerator(), r2.exponent());
    let swap = m1 > m2;
    let ((ma, ka), (mb, kb)) = if swap { ((m2, k2), (m1, k1)) } else { ((m1, k1), (m2, k2)) };
    let d = mb - ma;
    let mut xa: Vec<Dyadic> = (0..=ma).map(|m| Dyadic::new(m, ka)).collect();
    let mut inserted = 0i128;
    let mut level = 1u32;
    while inserted < d {
        let avail = ma << (level - 1);
        let take = avail.min(d - inserted);
        for i in 1..=take {
            xa.push(Dyadic::new(2 * i - 1, ka + level));
        }
        inserted += take;
        level += 1;
    }
    xa.sort();
    let xb: Vec<Dyadic> = (0..=mb).map(|m| Dyadic::new(m, kb)).collect();
    let (xs, ys) = if swap { (xb, xa) } else { (xa, xb) };
    Ok(xs.into_iter().zip(ys).map(|(x, y)| (p.0 + x, p.1 + y)).collect())
}

fn check_monotone(values: &[f64]) -> Result<()> {
    for (i, w) in values.windows(2).enumerate() {
        if !(w[1] > w[0]) {
            return Err(Error::NotDiffeo(format!("samples are not increasing at grid index {i}")));
        }
    }
    Ok(())
}

/// The breakpoints of the approximating map, before conversion to a tree pair.
pub fn approximate_pl(f: &Diffeo, eps: f64) -> Result<PLMap> {
    if !(eps > 0.0 && eps < 1.0) {
        return Err(Error::Interval(format!("tolerance {eps} must lie in (0, 1)")));
    }
    let s = f.slope_bound();
    let delta_exp = (-(eps / (3.0 * s)).log2()).ceil().max(0.0) as u32;
    let n = 1usize << delta_exp;
    let xi: Vec<Dyadic> = (0..=n).map(|i| Dyadic::new(i as i128, delta_exp)).collect();
    let fx: Vec<f64> = xi.iter().map(|x| f.eval(x.to_f64())).collect();
    check_monotone(&fx)?;
    let fine: Vec<f64> = (0..=4096).map(|i| f.eval(i as f64 / 4096.0)).collect();
    check_monotone(&fine)?;
    if (fx[n] - fx[0] - 1.0).abs() > 1e-9 {
        return Err(Error::NotDiffeo(format!("f(1) - f(0) = {} instead of 1", fx[n] - fx[0])));
    }
    let mut eta = vec![Dyadic::ZERO; n + 1];
    let delta = match f.mode {
        Mode::Interval => {
            if fx[0].abs() > 1e-9 {
                return Err(Error::NotDiffeo(format!("f(0) = {} instead of 0", fx[0])));
            }
            eta[n] = Dyadic::ONE;
            (eps / 2.0).min((fx[n] - fx[n - 1]) / 2.0)
        }
        Mode::Circle => (eps / 2.0).min((fx[1] - fx[0]) / 2.0),
    };
    let mut offset = 0.0;
    if f.mode == Mode::Circle {
        let raw = dyadic_between(fx[0] + delta, fx[1])?;
        let shift = raw.floor();
        offset = shift as f64;
        eta[0] = raw - Dyadic::from_int(shift);
        eta[n] = eta[0] + Dyadic::ONE;
    }
    for i in 1..n {
        let lo = (fx[i - 1] + delta).max(fx[i]) - offset;
        let hi = fx[i] + delta - offset;
        eta[i] = dyadic_between(lo, hi)?;
    }
    let mut points = vec![(xi[0], eta[0])];
    for i in 0..n {
        let seg = dyadic_interpolation((xi[i], eta[i]), (xi[i + 1], eta[i + 1]))?;
        points.extend_from_slice(&seg[1..]);
    }
    let map = PLMap { circle: f.mode == Mode::Circle, points };
    map.validate()?;
    Ok(map.simplified())
}

/// An element of F (interval mode) or T (circle mode) within `eps` of `f` in sup norm.
pub fn approximate(f: &Diffeo, eps: f64) -> Result<GroupElement> {
    pl_to_element(&approximate_pl(f, eps)?)
}

/// `max |f(x) - g(x)|` over `grid + 1` equally spaced points, measured mod 1 in circle mode.
pub fn sup_error(f: &Diffeo, g: &PLMap, grid: usize) -> f64 {
    (0..=grid)
        .map(|i| {
            let x = i as f64 / grid as f64;
            let diff = f.eval(x) - g.eval_f64(x);
            match f.mode {
                Mode::Interval => diff.abs(),
                Mode::Circle => {
                    let r = diff - diff.round();
                    r.abs()
                }
            }
        })
        .fold(0.0, f64::max)
}

/// Sup of `|f'(x) - g'(x)|` over the grid `i / 10⁴` and the midpoints of `g`'s pieces, skipping
/// breakpoints of `g`.
pub fn derivative_distance(fprime: &dyn Fn(f64) -> f64, g: &GroupElement) -> f64 {
    let pl = g.to_pl();
    let breaks: Vec<f64> = pl.points.iter().map(|p| p.0.to_f64()).collect();
    let mut xs: Vec<f64> = (0..10_000).map(|i| i as f64 / 10_000.0).collect();
    xs.extend(breaks.windows(2).map(|w| (w[0] + w[1]) / 2.0));
    xs.into_iter()
        .filter(|x| !breaks.contains(x))
        .map(|x| (fprime(x) - pl.slope_at(x)).abs())
        .fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn d(s: &str) -> Dyadic {
        s.parse().unwrap()
    }

    #[test]
    fn between_examples() {
        assert_eq!(dyadic_between(0.3, 0.4).unwrap(), d("5/16"));
        assert_eq!(dyadic_between(0.25, 0.75).unwrap(), d("1/2"));
        assert!(dyadic_between(0.4, 0.3).is_err());
    }

    #[test]
    fn interpolation_figure_case() {
        let seg = dyadic_interpolation((d("0"), d("0")), (d("11/64"), d("2/8"))).unwrap();
        let ys: Vec<Dyadic> = seg.iter().map(|p| p.1).collect();
        let expect: Vec<Dyadic> =
            [0, 1, 2, 3, 4, 5, 6, 8, 10, 12, 14, 16].iter().map(|&m| Dyadic::new(m, 6)).collect();
        assert_eq!(ys, expect);
        let xs: Vec<Dyadic> = seg.iter().map(|p| p.0).collect();
        assert_eq!(xs, (0..=11).map(|m| Dyadic::new(m, 6)).collect::<Vec<_>>());
    }

    #[test]
    fn interpolation_single_segment() {
        let seg = dyadic_interpolation((d("0"), d("0")), (d("1/2"), d("1/4"))).unwrap();
        assert_eq!(seg, vec![(d("0"), d("0")), (d("1/2"), d("1/4"))]);
    }

    #[test]
    fn quadratic_approximation() {
        let f = Diffeo::builtin("quadratic").unwrap();
        let g = approximate(&f, 0.1).unwrap();
        assert!(g.in_f());
        assert!(sup_error(&f, &g.to_pl(), 10_000) < 0.1);
    }

    #[test]
    fn rotation_approximation() {
        let f = Diffeo::builtin("rotation:1/2").unwrap();
        let g = approximate(&f, 0.1).unwrap();
        assert!(sup_error(&f, &g.to_pl(), 10_000) < 0.1);
    }
}
