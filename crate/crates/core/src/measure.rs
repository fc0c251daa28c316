//! Surface measures of polynomial sublevel sets on ball-boxes, density
//! scans across radii and Monte Carlo checks of Haar volume scaling.
//!
//! For `E = {P <= 0}` with smooth boundary, `|Z 1_E| = |ZP| / |grad P|`
//! times the Euclidean surface measure on `{P = 0}`. The boundary is
//! written as a graph over the remaining coordinates and integrated by
//! tensor Gauss–Legendre quadrature.

use num_traits::{One, Signed, Zero};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::algebra::AlgVector;
use crate::error::{Error, Result};
use crate::fields::{apply_field, realize_left_invariant, SublevelSet};
use crate::group::Group;
use crate::interval::{self, Interval};
use crate::poly::{FloatPoly, Polynomial};
use crate::quadrature::{gauss_legendre, horner, pairwise_sum, real_roots};
use crate::ring::{rational_to_f64, Rational, Ring};

/// `center * Q_r` with `Q_r = prod [-r^{w_i}, r^{w_i}]` in chart
/// coordinates.
#[derive(Clone, Debug, PartialEq)]
pub struct BallBox {
    pub center: Vec<Rational>,
    pub r: f64,
    pub half_widths: Vec<f64>,
}

impl BallBox {
    pub fn new(g: &Group, center: Vec<Rational>, r: f64) -> Result<Self> {
        g.algebra().check_len(center.len())?;
        if !(r > 0.0 && r.is_finite()) {
            return Err(Error::Invalid(format!("box radius must be positive, got {r}")));
        }
        let half_widths = g.weights().iter().map(|&w| r.powi(w as i32)).collect();
        Ok(Self { center, r, half_widths })
    }

    pub fn at_identity(g: &Group, r: f64) -> Result<Self> {
        Self::new(g, vec![Rational::zero(); g.dim()], r)
    }

    fn is_centered_at_identity(&self) -> bool {
        self.center.iter().all(Zero::is_zero)
    }

    fn intervals(&self) -> Vec<Interval> {
        self.half_widths.iter().map(|&h| Interval::centered(0.0, h)).collect()
    }
}

/// What is being measured: `|Z 1_E|` for a single left-invariant `Z`, or
/// the horizontal perimeter `|D 1_E|`.
#[derive(Clone, Debug, PartialEq)]
pub enum Direction {
    Horizontal,
    Field(AlgVector),
}

impl Direction {
    pub fn label(&self) -> String {
        match self {
            Direction::Horizontal => "horizontal".into(),
            Direction::Field(v) => format!("[{}]", v.to_strings().join(",")),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct QuadratureSpec {
    /// Gauss–Legendre points per cell and axis.
    pub order: usize,
    /// Cells per axis on the coarse level; the fine level doubles it.
    pub subdiv: usize,
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        Self { order: 8, subdiv: 4 }
    }
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct MeasureOptions {
    pub quad: QuadratureSpec,
    /// Integrate only the part of the graph inside the box instead of
    /// failing when it leaves.
    pub clip: bool,
    /// Dependent variable override (zero based).
    pub dependent: Option<usize>,
}

/// `{y_d = g(y')}` describing the boundary of the left-translated set
/// `center^{-1} E` near the identity.
#[derive(Clone, Debug, PartialEq)]
pub struct GraphChart {
    pub dependent: usize,
    /// Coefficient of `y_d` in the pulled-back polynomial.
    pub coefficient: Rational,
    pub graph: Polynomial,
    /// `P(center * y)`.
    pub pulled_back: Polynomial,
    /// Interval bound on `|g|` over the base box.
    pub bound: f64,
    /// Half-width of the box in the dependent coordinate.
    pub width: f64,
}

impl GraphChart {
    pub fn contained(&self) -> bool {
        self.bound < self.width
    }
}

/// `P(center * y)` as a polynomial in `y`.
pub fn pull_back(e: &SublevelSet, center: &[Rational]) -> Result<Polynomial> {
    e.group.algebra().check_len(center.len())?;
    if center.iter().all(Zero::is_zero) {
        return Ok(e.poly.clone());
    }
    e.poly.substitute(&e.group.left_translation(center))
}

/// Variable in which `p` is affine with a constant nonzero coefficient,
/// preferring higher layers.
pub fn affine_variable(p: &Polynomial, weights: &[u32]) -> Option<usize> {
    let ok = |i: usize| p.degree_in(i) == 1 && p.coeff_of_power(i, 1).as_constant().is_some_and(|c| !c.is_zero());
    (0..weights.len())
        .filter(|&i| ok(i))
        .max_by(|&i, &j| weights[i].cmp(&weights[j]).then(j.cmp(&i)))
}

fn chart(e: &SublevelSet, bx: &BallBox, dependent: Option<usize>) -> Result<GraphChart> {
    let g = &e.group;
    let n = g.dim();
    let p = pull_back(e, &bx.center)?;
    let d = match dependent {
        Some(d) => {
            if d >= n {
                return Err(Error::NoAffineVariable);
            }
            let c = p.coeff_of_power(d, 1).as_constant();
            if p.degree_in(d) != 1 || c.is_none_or(|c| c.is_zero()) {
                return Err(Error::NoAffineVariable);
            }
            d
        }
        None => affine_variable(&p, g.weights()).ok_or(Error::NoAffineVariable)?,
    };
    let a = p.coeff_of_power(d, 1).as_constant().expect("affine variable");
    let rest = p.coeff_of_power(d, 0);
    let graph = rest.scale(&(-Rational::one() / &a)).with_nvars(n);
    let bound = interval::eval(&graph.to_float(), &bx.intervals()).mag();
    Ok(GraphChart {
        dependent: d,
        coefficient: a,
        graph,
        pulled_back: p,
        bound,
        width: bx.half_widths[d],
    })
}

/// Solves `P(center * y) = 0` for the dependent variable and checks by
/// interval arithmetic that the graph stays inside the box.
pub fn graph_boundary(e: &SublevelSet, bx: &BallBox, dependent: Option<usize>) -> Result<GraphChart> {
    let c = chart(e, bx, dependent)?;
    if !c.contained() {
        return Err(Error::GraphExitsBox {
            bound: c.bound,
            width: c.width,
        });
    }
    Ok(c)
}

#[derive(Clone, Debug, PartialEq)]
pub struct SurfaceEstimate {
    /// Fine-level value.
    pub estimate: f64,
    /// `|fine - coarse|`.
    pub error: f64,
    pub coarse: f64,
    pub dependent: usize,
    /// The graph left the box and was clipped.
    pub clipped: bool,
}

struct Integrand {
    n: usize,
    d: usize,
    numer: Vec<FloatPoly>,
    horizontal: bool,
    grad: Vec<FloatPoly>,
    graph: FloatPoly,
    graph_grad: Vec<FloatPoly>,
}

impl Integrand {
    /// Point on the graph above `y` (with `y[d]` ignored).
    fn lift(&self, y: &mut [f64]) {
        y[self.d] = 0.0;
        y[self.d] = self.graph.eval(y);
    }

    fn value(&self, y: &[f64]) -> f64 {
        let num = if self.horizontal {
            self.numer.iter().map(|q| q.eval(y).powi(2)).sum::<f64>().sqrt()
        } else {
            self.numer[0].eval(y).abs()
        };
        if num == 0.0 {
            return 0.0;
        }
        let grad = self.grad.iter().map(|q| q.eval(y).powi(2)).sum::<f64>().sqrt();
        let jac = (1.0 + self.graph_grad.iter().map(|q| q.eval(y).powi(2)).sum::<f64>()).sqrt();
        num / grad * jac
    }
}

/// `|Z 1_E|(center * Q_r)` (or `|D 1_E|` for [`Direction::Horizontal`]).
pub fn surface_measure(
    e: &SublevelSet,
    dir: &Direction,
    bx: &BallBox,
    opts: &MeasureOptions,
) -> Result<SurfaceEstimate> {
    let g = &e.group;
    let n = g.dim();
    let ch = chart(e, bx, opts.dependent)?;
    let clipped = !ch.contained();
    if clipped && !opts.clip {
        return Err(Error::GraphExitsBox {
            bound: ch.bound,
            width: ch.width,
        });
    }
    let p = &ch.pulled_back;
    let numer: Vec<Polynomial> = match dir {
        Direction::Horizontal => g
            .algebra()
            .layer_indices(1)
            .into_iter()
            .map(|i| Ok(apply_field(&realize_left_invariant(g, &g.algebra().basis(i))?, p)))
            .collect::<Result<_>>()?,
        Direction::Field(v) => vec![apply_field(&realize_left_invariant(g, v)?, p)],
    };
    let d = ch.dependent;
    let base: Vec<usize> = (0..n).filter(|&i| i != d).collect();
    let integrand = Integrand {
        n,
        d,
        numer: numer.iter().map(Polynomial::to_float).collect(),
        horizontal: matches!(dir, Direction::Horizontal),
        grad: (0..n).map(|i| p.derivative(i).to_float()).collect(),
        graph: ch.graph.to_float(),
        graph_grad: base.iter().map(|&i| ch.graph.derivative(i).to_float()).collect(),
    };
    if numer.iter().all(Polynomial::is_zero) {
        return Ok(SurfaceEstimate {
            estimate: 0.0,
            error: 0.0,
            coarse: 0.0,
            dependent: d,
            clipped,
        });
    }
    let inner = inner_axis(&ch, bx, &base);
    let clip = clipped.then(|| {
        let parts = ch.graph.collect_powers(inner);
        let deg = parts.keys().copied().max().unwrap_or(0) as usize;
        let mut coeffs = vec![FloatPoly::default(); deg + 1];
        for (k, q) in parts {
            coeffs[k as usize] = q.to_float();
        }
        coeffs
    });
    let q = opts.quad;
    let coarse = integrate(&integrand, bx, &base, inner, clip.as_deref(), q.order, q.subdiv);
    let fine = integrate(&integrand, bx, &base, inner, clip.as_deref(), q.order, 2 * q.subdiv);
    Ok(SurfaceEstimate {
        estimate: fine,
        error: (fine - coarse).abs(),
        coarse,
        dependent: d,
        clipped,
    })
}

/// Base axis along which the graph varies most; used as the inner axis so
/// that clipping reduces to univariate root finding.
fn inner_axis(ch: &GraphChart, bx: &BallBox, base: &[usize]) -> usize {
    let boxes = bx.intervals();
    let mut best = (base.first().copied().unwrap_or(0), -1.0);
    for &i in base {
        let v = interval::eval(&ch.graph.derivative(i).to_float(), &boxes).mag() * bx.half_widths[i];
        if v > best.1 {
            best = (i, v);
        }
    }
    best.0
}

/// Composite Gauss rule on `[lo, hi]` with `cells` equal cells.
fn rule(lo: f64, hi: f64, order: usize, cells: usize) -> Vec<(f64, f64)> {
    let (x, w) = gauss_legendre(order);
    let h = (hi - lo) / cells as f64;
    let mut out = Vec::with_capacity(order * cells);
    for c in 0..cells {
        let a = lo + h * c as f64;
        for (xi, wi) in x.iter().zip(&w) {
            out.push((a + 0.5 * h * (xi + 1.0), 0.5 * h * wi));
        }
    }
    out
}

fn integrate(
    f: &Integrand,
    bx: &BallBox,
    base: &[usize],
    inner: usize,
    clip: Option<&[FloatPoly]>,
    order: usize,
    cells: usize,
) -> f64 {
    if base.is_empty() {
        let mut y = vec![0.0; f.n];
        f.lift(&mut y);
        return if y[f.d].abs() <= bx.half_widths[f.d] {
            f.value(&y)
        } else {
            0.0
        };
    }
    let outer: Vec<usize> = base.iter().copied().filter(|&i| i != inner).collect();
    let rules: Vec<Vec<(f64, f64)>> = outer
        .iter()
        .map(|&i| rule(-bx.half_widths[i], bx.half_widths[i], order, cells))
        .collect();
    let total: usize = rules.iter().map(Vec::len).product();
    let hw = bx.half_widths[inner];
    let hd = bx.half_widths[f.d];
    let values: Vec<f64> = (0..total)
        .into_par_iter()
        .map(|idx| {
            let mut y = vec![0.0; f.n];
            let mut weight = 1.0;
            let mut k = idx;
            for (axis, r) in outer.iter().zip(&rules) {
                let (x, w) = r[k % r.len()];
                k /= r.len();
                y[*axis] = x;
                weight *= w;
            }
            let segments = match clip {
                None => vec![(-hw, hw)],
                Some(coeffs) => clip_segments(coeffs, &mut y, inner, hw, hd),
            };
            let mut parts = Vec::new();
            for (lo, hi) in segments {
                for (t, w) in rule(lo, hi, order, cells) {
                    y[inner] = t;
                    f.lift(&mut y);
                    parts.push(w * f.value(&y));
                }
            }
            weight * pairwise_sum(&parts)
        })
        .collect();
    pairwise_sum(&values)
}

/// Sub-intervals of `[-hw, hw]` in the inner variable where the graph
/// stays within `[-hd, hd]`.
fn clip_segments(coeffs: &[FloatPoly], y: &mut [f64], inner: usize, hw: f64, hd: f64) -> Vec<(f64, f64)> {
    y[inner] = 0.0;
    let c: Vec<f64> = coeffs.iter().map(|q| q.eval(y)).collect();
    let mut knots = vec![-hw];
    for shift in [hd, -hd] {
        let mut cs = c.clone();
        cs[0] -= shift;
        knots.extend(real_roots(&cs, -hw, hw));
    }
    knots.push(hw);
    knots.sort_by(f64::total_cmp);
    knots
        .windows(2)
        .filter(|w| w[1] > w[0] && horner(&c, 0.5 * (w[0] + w[1])).abs() <= hd)
        .map(|w| (w[0], w[1]))
        .collect()
}

#[derive(Clone, Debug, PartialEq)]
pub struct DensityRow {
    pub r: f64,
    pub estimate: f64,
    pub error: f64,
    /// `log2` slope against the previous radius.
    pub slope: Option<f64>,
    /// `estimate / r^slope`.
    pub constant: Option<f64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct DensitySeries {
    pub label: String,
    pub rows: Vec<DensityRow>,
    /// Least-squares slope of `log2 estimate` against `log2 r`.
    pub fitted_slope: Option<f64>,
    pub clipped: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct RatioRow {
    pub r: f64,
    pub ratio: f64,
    pub slope: Option<f64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct RatioSeries {
    pub numerator: String,
    pub denominator: String,
    pub rows: Vec<RatioRow>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct DensityReport {
    pub radii: Vec<f64>,
    pub series: Vec<DensitySeries>,
    /// Later directions over earlier ones.
    pub ratios: Vec<RatioSeries>,
}

fn slope(r0: f64, v0: f64, r1: f64, v1: f64) -> Option<f64> {
    let s = (v1 / v0).log2() / (r1 / r0).log2();
    (v0 > 0.0 && v1 > 0.0 && s.is_finite()).then_some(s)
}

/// Least-squares slope of `log2 v` against `log2 r` over positive values.
pub fn fit_slope(points: &[(f64, f64)]) -> Option<f64> {
    let pts: Vec<(f64, f64)> = points
        .iter()
        .filter(|(r, v)| *r > 0.0 && *v > 0.0)
        .map(|(r, v)| (r.log2(), v.log2()))
        .collect();
    if pts.len() < 2 {
        return None;
    }
    let k = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / k;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / k;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    (sxx > 0.0).then(|| sxy / sxx)
}

fn series_rows(radii: &[f64], values: &[(f64, f64)]) -> Vec<DensityRow> {
    radii
        .iter()
        .zip(values)
        .enumerate()
        .map(|(i, (&r, &(est, err)))| {
            let s = (i > 0).then(|| slope(radii[i - 1], values[i - 1].0, r, est)).flatten();
            DensityRow {
                r,
                estimate: est,
                error: err,
                slope: s,
                constant: s.map(|s| est / r.powf(s)),
            }
        })
        .collect()
}

pub fn density_scan(
    e: &SublevelSet,
    dirs: &[Direction],
    center: &[Rational],
    radii: &[f64],
    opts: &MeasureOptions,
) -> Result<DensityReport> {
    let mut series = Vec::new();
    let mut values: Vec<Vec<f64>> = Vec::new();
    for dir in dirs {
        let mut vals = Vec::new();
        let mut clipped = false;
        for &r in radii {
            let bx = BallBox::new(&e.group, center.to_vec(), r)?;
            let s = surface_measure(e, dir, &bx, opts)?;
            clipped |= s.clipped;
            vals.push((s.estimate, s.error));
        }
        let pts: Vec<(f64, f64)> = radii.iter().zip(&vals).map(|(&r, v)| (r, v.0)).collect();
        series.push(DensitySeries {
            label: dir.label(),
            rows: series_rows(radii, &vals),
            fitted_slope: fit_slope(&pts),
            clipped,
        });
        values.push(vals.iter().map(|v| v.0).collect());
    }
    let mut ratios = Vec::new();
    for i in 0..dirs.len() {
        for j in i + 1..dirs.len() {
            let q: Vec<f64> = values[j].iter().zip(&values[i]).map(|(a, b)| a / b).collect();
            let rows = radii
                .iter()
                .enumerate()
                .map(|(k, &r)| RatioRow {
                    r,
                    ratio: q[k],
                    slope: (k > 0).then(|| slope(radii[k - 1], q[k - 1], r, q[k])).flatten(),
                })
                .collect();
            ratios.push(RatioSeries {
                numerator: series[j].label.clone(),
                denominator: series[i].label.clone(),
                rows,
            });
        }
    }
    Ok(DensityReport {
        radii: radii.to_vec(),
        series,
        ratios,
    })
}

/// Dyadic radii `2^0, 2^-1, ..., 2^-k`.
pub fn dyadic_radii(k: u32) -> Vec<f64> {
    (0..=k).map(|i| 0.5f64.powi(i as i32)).collect()
}

#[derive(Clone, Debug, PartialEq)]
pub struct HaarReport {
    pub lambda: Rational,
    /// `lambda^Q`.
    pub expected: Rational,
    /// Exact ratio of the box volumes `vol(delta_lambda Q_r) / vol(Q_r)`.
    pub closed_form: Rational,
    pub volume: f64,
    pub volume_stderr: f64,
    pub dilated_volume: f64,
    pub dilated_stderr: f64,
    pub ratio: f64,
    pub stderr: f64,
    /// `(ratio - expected) / stderr`.
    pub z: f64,
    pub samples: usize,
    pub seed: u64,
}

impl HaarReport {
    pub fn within_sigma(&self, k: f64) -> bool {
        self.z.abs() <= k
    }
}

const MC_BATCH: usize = 1 << 14;

/// Hit count of `member` over uniform samples in `bbox`, in fixed batches
/// so the result does not depend on scheduling.
fn mc_hits<F>(bbox: &[Interval], samples: usize, seed: u64, stream: u64, member: F) -> usize
where
    F: Fn(&[f64]) -> bool + Sync,
{
    let batches = samples.div_ceil(MC_BATCH);
    (0..batches)
        .into_par_iter()
        .map(|b| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(stream * 1_000_003 + b as u64);
            let count = MC_BATCH.min(samples - b * MC_BATCH);
            let mut x = vec![0.0; bbox.len()];
            let mut hits = 0;
            for _ in 0..count {
                for (xi, iv) in x.iter_mut().zip(bbox) {
                    *xi = rng.gen_range(iv.lo..=iv.hi);
                }
                if member(&x) {
                    hits += 1;
                }
            }
            hits
        })
        .sum()
}

/// Monte Carlo comparison of `vol(delta_lambda A)` and `vol(A)` for the
/// left-translated box `A = center * Q_r`, against `lambda^Q`.
pub fn haar_scaling_check(
    g: &Group,
    lambda: &Rational,
    region: &BallBox,
    samples: usize,
    seed: u64,
) -> Result<HaarReport> {
    if !lambda.is_positive() {
        return Err(Error::Invalid("dilation factor must be positive".into()));
    }
    if samples == 0 {
        return Err(Error::Invalid("sample count must be positive".into()));
    }
    let a = g.algebra();
    let n = g.dim();
    let expected = Ring::pow(lambda, a.homogeneous_dim());
    let r = Rational::from_float(region.r).ok_or_else(|| Error::Invalid("radius is not finite".into()))?;
    let mut closed_form = Rational::one();
    for &w in g.weights() {
        let side = Ring::pow(&r, w);
        closed_form *= Ring::pow(&(lambda * &r), w) / side;
    }

    let forward = if region.is_centered_at_identity() {
        (0..n).map(|i| Polynomial::var(n, i)).collect()
    } else {
        g.left_translation(&region.center)
    };
    let back: Vec<FloatPoly> = g
        .left_translation(&g.inverse(&region.center))
        .iter()
        .map(Polynomial::to_float)
        .collect();
    let bbox: Vec<Interval> = forward
        .iter()
        .map(|q| interval::eval(&q.to_float(), &region.intervals()))
        .collect();
    let lam = rational_to_f64(lambda);
    let weights = g.weights().to_vec();
    let dbox: Vec<Interval> = bbox
        .iter()
        .zip(&weights)
        .map(|(iv, &w)| {
            let s = lam.powi(w as i32);
            Interval::new(iv.lo * s, iv.hi * s)
        })
        .collect();
    let in_region = |x: &[f64]| back.iter().zip(&region.half_widths).all(|(q, &h)| q.eval(x).abs() <= h);
    let in_dilated = |x: &[f64]| {
        let y: Vec<f64> = x.iter().zip(&weights).map(|(v, &w)| v / lam.powi(w as i32)).collect();
        in_region(&y)
    };
    let vol = |b: &[Interval]| b.iter().map(Interval::width).product::<f64>();
    let estimate = |b: &[Interval], hits: usize| {
        let p = hits as f64 / samples as f64;
        let v = vol(b);
        (v * p, v * (p * (1.0 - p) / samples as f64).sqrt())
    };
    let (v1, e1) = estimate(&bbox, mc_hits(&bbox, samples, seed, 0, in_region));
    let (v2, e2) = estimate(&dbox, mc_hits(&dbox, samples, seed, 1, in_dilated));
    let ratio = v2 / v1;
    let stderr = ratio * ((e1 / v1).powi(2) + (e2 / v2).powi(2)).sqrt();
    let z = if stderr > 0.0 {
        (ratio - rational_to_f64(&expected)) / stderr
    } else {
        0.0
    };
    Ok(HaarReport {
        lambda: lambda.clone(),
        expected,
        closed_form,
        volume: v1,
        volume_stderr: e1,
        dilated_volume: v2,
        dilated_stderr: e2,
        ratio,
        stderr,
        z,
        samples,
        seed,
    })
}
