//! Polynomial curves `phi : [a, b] -> R^k` with rational coefficients.
//!
//! Besides evaluation and the non-degeneracy test this module provides the
//! pointwise centralizer twist `z(s)` with `z(s) . phi'(s) = w0`, the
//! factorisation `psi = psi_- psi_0 u(phi)` and an exact check of the
//! sublevel growth inequality
//! `|{s in J : |f(s)| < r}| < C (r / sup_J |f|)^alpha |J|`.

mod poly;

use num_bigint::BigInt;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::groups::{centralizer_element, make_u, GroupElement};
use crate::linalg::{rank_of_rows, QMatrix};
use crate::rational::{self, Rational};

pub use poly::{simplest_between, Poly, RootEnclosure, Sturm};

/// `phi_i(s) = sum_j coeffs[i][j] s^j` on `[a, b]`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "CurveJson", into = "CurveJson")]
pub struct PolyCurve {
    coeffs: Vec<Vec<Rational>>,
    a: Rational,
    b: Rational,
}

#[derive(Serialize, Deserialize)]
struct CurveJson {
    k: usize,
    #[serde(with = "rational::serde_q::vec")]
    interval: Vec<Rational>,
    #[serde(with = "rational::serde_q::vec2")]
    coeffs: Vec<Vec<Rational>>,
}

impl TryFrom<CurveJson> for PolyCurve {
    type Error = Error;
    fn try_from(j: CurveJson) -> Result<Self> {
        if j.coeffs.len() != j.k {
            return Err(Error::Dimension(format!("k = {} but {} coefficient rows", j.k, j.coeffs.len())));
        }
        let [a, b]: [Rational; 2] =
            j.interval.try_into().map_err(|_| Error::Config("interval must have two endpoints".into()))?;
        PolyCurve::new(j.coeffs, a, b)
    }
}

impl From<PolyCurve> for CurveJson {
    fn from(c: PolyCurve) -> Self {
        CurveJson { k: c.k(), interval: vec![c.a, c.b], coeffs: c.coeffs }
    }
}

impl PolyCurve {
    /// Rows are padded with zeros to a common length.
    pub fn new(mut coeffs: Vec<Vec<Rational>>, a: Rational, b: Rational) -> Result<Self> {
        if coeffs.is_empty() {
            return Err(Error::Dimension("curve needs at least one coordinate".into()));
        }
        if a >= b {
            return Err(Error::Domain(format!("interval [{}, {}] is empty", rational::format(&a), rational::format(&b))));
        }
        let width = coeffs.iter().map(Vec::len).max().unwrap().max(1);
        for row in &mut coeffs {
            row.resize(width, Rational::zero());
        }
        Ok(PolyCurve { coeffs, a, b })
    }

    /// `(s, s^2, ..., s^k)` on `[a, b]`.
    pub fn moment(k: usize, a: Rational, b: Rational) -> Result<Self> {
        let coeffs = (1..=k)
            .map(|i| (0..=k).map(|j| if i == j { Rational::one() } else { Rational::zero() }).collect())
            .collect();
        PolyCurve::new(coeffs, a, b)
    }

    pub fn k(&self) -> usize {
        self.coeffs.len()
    }

    pub fn degree(&self) -> usize {
        self.coeffs
            .iter()
            .filter_map(|row| row.iter().rposition(|c| !c.is_zero()))
            .max()
            .unwrap_or(0)
    }

    pub fn coeffs(&self) -> &[Vec<Rational>] {
        &self.coeffs
    }

    pub fn interval(&self) -> (&Rational, &Rational) {
        (&self.a, &self.b)
    }

    pub fn component(&self, i: usize) -> Poly {
        Poly::new(self.coeffs[i].clone())
    }

    pub fn contains(&self, s: &Rational) -> bool {
        self.a <= *s && *s <= self.b
    }

    /// Same curve on a subinterval.
    pub fn restrict(&self, a: Rational, b: Rational) -> Result<Self> {
        if !self.contains(&a) || !self.contains(&b) {
            return Err(Error::Domain("subinterval leaves the parameter interval".into()));
        }
        PolyCurve::new(self.coeffs.clone(), a, b)
    }

    pub fn evaluate(&self, s: &Rational) -> Result<Vec<Rational>> {
        if !self.contains(s) {
            return Err(Error::Domain(format!(
                "s = {} outside [{}, {}]",
                rational::format(s),
                rational::format(&self.a),
                rational::format(&self.b)
            )));
        }
        Ok(self.coeffs.iter().map(|row| row.iter().rev().fold(Rational::zero(), |acc, c| acc * s + c)).collect())
    }

    /// Floating-point evaluation for statistics.
    pub fn evaluate_f64(&self, s: f64) -> Vec<f64> {
        self.coeffs
            .iter()
            .map(|row| row.iter().rev().fold(0.0, |acc, c| acc * s + rational::to_f64(c)))
            .collect()
    }

    pub fn derivative(&self) -> PolyCurve {
        let coeffs = self.coeffs.iter().map(|row| Poly::new(row.clone()).derivative().coeffs().to_vec()).collect();
        PolyCurve::new(coeffs, self.a.clone(), self.b.clone()).expect("same interval")
    }

    /// `1, phi_1, ..., phi_k` linearly independent, i.e. the image spans an
    /// affine space of full dimension.
    pub fn is_nondegenerate(&self) -> bool {
        let width = self.coeffs[0].len();
        let mut rows = vec![(0..width).map(|j| if j == 0 { Rational::one() } else { Rational::zero() }).collect()];
        rows.extend(self.coeffs.iter().cloned());
        rank_of_rows(&rows) == self.k() + 1
    }
}

/// The fixed direction `w0` of the twist.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TwistSpec {
    #[serde(with = "rational::serde_q::vec")]
    w0: Vec<Rational>,
}

impl TwistSpec {
    pub fn new(w0: Vec<Rational>) -> Result<Self> {
        if w0.is_empty() || w0.iter().all(Zero::is_zero) {
            return Err(Error::Domain("w0 must be a nonzero vector".into()));
        }
        Ok(TwistSpec { w0 })
    }

    /// `w0 = e_1`.
    pub fn first_axis(k: usize) -> Self {
        let mut w0 = vec![Rational::zero(); k];
        w0[0] = Rational::one();
        TwistSpec { w0 }
    }

    pub fn w0(&self) -> &[Rational] {
        &self.w0
    }
}

/// Index of the largest absolute entry, lowest index on ties.
fn pivot(v: &[Rational]) -> usize {
    let mut best = 0;
    for (i, x) in v.iter().enumerate() {
        if x.abs() > v[best].abs() {
            best = i;
        }
    }
    best
}

/// `v` followed by the standard vectors other than the pivot coordinate.
fn completion(v: &[Rational]) -> QMatrix {
    let k = v.len();
    let p = pivot(v);
    let mut rows = vec![v.to_vec()];
    for j in (0..k).filter(|&j| j != p) {
        let mut e = vec![Rational::zero(); k];
        e[j] = Rational::one();
        rows.push(e);
    }
    QMatrix::from_rows(rows)
}

fn rational_sqrt(q: &Rational) -> Option<Rational> {
    if q.is_negative() {
        return None;
    }
    let (n, d) = (q.numer().sqrt(), q.denom().sqrt());
    (&n * &n == *q.numer() && &d * &d == *q.denom()).then(|| Rational::new(n, d))
}

/// `z = diag(alpha, M)` with `alpha phi'(s) M^{-1} = w0` and `det z = 1`.
///
/// Both `phi'(s)` and `w0` are completed to bases by the pivot rule; for
/// `k >= 2` the second completion row absorbs the determinant and
/// `alpha = 1`. For `k = 1` the block is a scalar and `alpha^2 = w0 / phi'(s)`
/// must be the square of a positive rational.
pub fn twist(curve: &PolyCurve, s: &Rational, spec: &TwistSpec) -> Result<GroupElement> {
    let k = curve.k();
    if spec.w0.len() != k {
        return Err(Error::Dimension(format!("w0 has length {} for k = {k}", spec.w0.len())));
    }
    let v = curve.derivative().evaluate(s)?;
    if v.iter().all(Zero::is_zero) {
        return Err(Error::ZeroDerivative(rational::format(s)));
    }
    if k == 1 {
        let ratio = &spec.w0[0] / &v[0];
        let alpha = rational_sqrt(&ratio).ok_or_else(|| {
            Error::Domain(format!(
                "for n = 2 the twist needs w0 / phi'(s) = {} to be the square of a positive rational",
                rational::format(&ratio)
            ))
        })?;
        let m = QMatrix::diagonal(&[alpha.recip()]);
        return centralizer_element(&alpha, &m);
    }
    let b = completion(&v);
    let c = completion(&spec.w0);
    let lambda = b.det() / c.det();
    let mut s_inv = QMatrix::identity(k);
    s_inv[(1, 1)] = lambda.recip();
    let m = c.inverse().expect("completion is a basis").mul_mat(&s_inv).mul_mat(&b);
    centralizer_element(&Rational::one(), &m)
}

/// `psi = psi_minus psi_zero u(phi)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Decomposition {
    /// Identity plus the first column below the diagonal.
    pub psi_minus: GroupElement,
    /// `diag(psi_11, D)` in the centralizer of the diagonal flow.
    pub psi_zero: GroupElement,
    pub phi: Vec<Rational>,
}

impl Decomposition {
    pub fn reconstruct(&self) -> GroupElement {
        self.psi_minus.mul(&self.psi_zero).mul(&make_u(&self.phi))
    }
}

pub fn decompose(psi: &GroupElement) -> Result<Decomposition> {
    let n = psi.dim();
    let alpha = psi.entry(0, 0).clone();
    if alpha.is_zero() {
        return Err(Error::DecompositionUndefined);
    }
    let phi: Vec<Rational> = (1..n).map(|j| psi.entry(0, j) / &alpha).collect();
    let neg: Vec<Rational> = phi.iter().map(|x| -x).collect();
    let x = psi.mul(&make_u(&neg));
    let mut minus = QMatrix::identity(n);
    for i in 1..n {
        minus[(i, 0)] = x.entry(i, 0) / &alpha;
    }
    let idx: Vec<usize> = (1..n).collect();
    let block = x.matrix().submatrix(&idx, &idx);
    Ok(Decomposition {
        psi_minus: GroupElement::new(minus)?,
        psi_zero: centralizer_element(&alpha, &block)?,
        phi,
    })
}

/// A closed rational interval known to contain some real quantity.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Enclosure {
    pub lo: Rational,
    pub hi: Rational,
}

impl Enclosure {
    pub fn width(&self) -> Rational {
        &self.hi - &self.lo
    }

    pub fn midpoint_f64(&self) -> f64 {
        rational::to_f64(&((&self.lo + &self.hi) / Rational::from_integer(2.into())))
    }
}

fn half() -> Rational {
    Rational::new(1.into(), 2.into())
}

/// Boundary points of `{|f| < r}` in `[c, d]`: the endpoints and the roots
/// of `f - r` and `f + r`, kept pairwise separated.
struct Sublevel<'a> {
    f: &'a Poly,
    r: Rational,
    sturms: Vec<Sturm>,
    /// `(chain index or None for an endpoint, enclosure)`
    points: Vec<(Option<usize>, RootEnclosure)>,
}

impl<'a> Sublevel<'a> {
    fn new(f: &'a Poly, c: &Rational, d: &Rational, r: &Rational) -> Self {
        let mut sturms = Vec::new();
        let mut points = vec![
            (None, RootEnclosure { lo: c.clone(), hi: c.clone() }),
            (None, RootEnclosure { lo: d.clone(), hi: d.clone() }),
        ];
        for shift in [-r.clone(), r.clone()] {
            let g = f.add_constant(&shift);
            if g.degree().unwrap_or(0) == 0 {
                continue;
            }
            let st = Sturm::new(&g.square_free());
            points.extend(st.roots(c, d).into_iter().map(|e| (Some(sturms.len()), e)));
            sturms.push(st);
        }
        let mut s = Sublevel { f, r: r.clone(), sturms, points };
        s.separate();
        s
    }

    fn refine_point(&mut self, i: usize) {
        if let Some(j) = self.points[i].0 {
            self.points[i].1.refine(&self.sturms[j]);
        }
    }

    fn separate(&mut self) {
        loop {
            self.points.sort_by(|x, y| x.1.lo.cmp(&y.1.lo).then(x.1.hi.cmp(&y.1.hi)));
            let clash = (1..self.points.len()).find(|&i| {
                let (l, r) = (&self.points[i - 1].1, &self.points[i].1);
                l.hi >= r.lo && !(l.is_exact() && r.is_exact())
            });
            match clash {
                Some(i) => {
                    self.refine_point(i - 1);
                    self.refine_point(i);
                }
                None => return,
            }
        }
    }

    fn refine(&mut self) {
        for i in 0..self.points.len() {
            self.refine_point(i);
        }
        self.separate();
    }

    fn max_width(&self) -> Rational {
        self.points.iter().map(|p| p.1.width()).max().unwrap_or_else(Rational::zero)
    }

    fn measure(&self) -> Enclosure {
        let mut lo = Rational::zero();
        let mut hi = Rational::zero();
        for w in self.points.windows(2) {
            let (l, r) = (&w[0].1, &w[1].1);
            if l.hi == r.lo {
                // coincident exact points
                continue;
            }
            let x = (&l.hi + &r.lo) * half();
            if self.f.eval(&x).abs() < self.r {
                lo += &r.lo - &l.hi;
                hi += &r.hi - &l.lo;
            }
        }
        Enclosure { lo, hi }
    }
}

/// `sup_{[c, d]} |f|` through the critical points of `f`.
struct SupNorm<'a> {
    f: &'a Poly,
    sturm: Option<Sturm>,
    crit: Vec<RootEnclosure>,
    ends: Rational,
}

impl<'a> SupNorm<'a> {
    fn new(f: &'a Poly, c: &Rational, d: &Rational) -> Self {
        let ends = f.eval(c).abs().max(f.eval(d).abs());
        let df = f.derivative();
        if df.degree().unwrap_or(0) == 0 {
            return SupNorm { f, sturm: None, crit: Vec::new(), ends };
        }
        let st = Sturm::new(&df.square_free());
        let crit = st.roots(c, d);
        SupNorm { f, sturm: Some(st), crit, ends }
    }

    fn refine(&mut self) {
        if let Some(st) = &self.sturm {
            for r in &mut self.crit {
                r.refine(st);
            }
        }
    }

    fn enclosure(&self) -> Enclosure {
        let mut lo = self.ends.clone();
        let mut hi = self.ends.clone();
        for r in &self.crit {
            let (a, b) = self.f.eval_interval(&r.lo, &r.hi);
            let (a, b) = if a.is_negative() && b.is_positive() {
                (Rational::zero(), (-a).max(b))
            } else {
                let (x, y) = (a.abs(), b.abs());
                (x.clone().min(y.clone()), x.max(y))
            };
            lo = lo.max(a);
            hi = hi.max(b);
        }
        Enclosure { lo, hi }
    }

    fn max_width(&self) -> Rational {
        self.enclosure().width()
    }
}

fn check_interval(j: (&Rational, &Rational)) -> Result<()> {
    if j.0 >= j.1 {
        return Err(Error::Domain("interval J must have positive length".into()));
    }
    Ok(())
}

fn check_poly(f: &Poly) -> Result<()> {
    if f.is_zero() {
        return Err(Error::Domain("f vanishes identically".into()));
    }
    Ok(())
}

/// Enclosure of `|{s in J : |f(s)| < r}|` of width at most `tol`.
pub fn sublevel_measure(f: &Poly, j: (&Rational, &Rational), r: &Rational, tol: &Rational) -> Result<Enclosure> {
    check_interval(j)?;
    check_poly(f)?;
    if !r.is_positive() {
        return Err(Error::Domain("r must be positive".into()));
    }
    let mut s = Sublevel::new(f, j.0, j.1, r);
    loop {
        let m = s.measure();
        if m.width() <= *tol {
            return Ok(m);
        }
        s.refine();
    }
}

/// Enclosure of `sup_J |f|` of width at most `tol`.
pub fn sup_norm(f: &Poly, j: (&Rational, &Rational), tol: &Rational) -> Result<Enclosure> {
    check_interval(j)?;
    check_poly(f)?;
    let mut s = SupNorm::new(f, j.0, j.1);
    while s.max_width() > *tol {
        s.refine();
    }
    Ok(s.enclosure())
}

/// Bisection rounds after which a comparison that is still open is decided
/// by midpoints; only an exact tie between irrational quantities gets there.
const MAX_ROUNDS: usize = 256;

/// Exact test of `|{s in J : |f(s)| < r}| < C (r / sup_J |f|)^alpha |J|`.
///
/// With `alpha = p/q` this compares `m^q sup^p` against `C^q r^p |J|^q` on
/// rational enclosures refined until the answer is certain.
pub fn good_growth_check(f: &Poly, j: (&Rational, &Rational), r: &Rational, c: &Rational, alpha: &Rational) -> Result<bool> {
    check_interval(j)?;
    check_poly(f)?;
    if !r.is_positive() || !c.is_positive() || !alpha.is_positive() {
        return Err(Error::Domain("r, C and alpha must be positive".into()));
    }
    let p = alpha.numer().to_usize().ok_or_else(|| Error::Domain("alpha numerator too large".into()))?;
    let q = alpha.denom().to_usize().ok_or_else(|| Error::Domain("alpha denominator too large".into()))?;
    let len = j.1 - j.0;
    let rhs = num_traits::pow(c.clone(), q) * num_traits::pow(r.clone(), p) * num_traits::pow(len, q);
    let mut sub = Sublevel::new(f, j.0, j.1, r);
    let mut sup = SupNorm::new(f, j.0, j.1);
    let lhs = |m: &Rational, s: &Rational| num_traits::pow(m.clone(), q) * num_traits::pow(s.clone(), p);
    for _ in 0..MAX_ROUNDS {
        let (m, s) = (sub.measure(), sup.enclosure());
        if lhs(&m.hi, &s.hi) < rhs {
            return Ok(true);
        }
        if lhs(&m.lo, &s.lo) >= rhs {
            return Ok(false);
        }
        if sub.max_width().is_zero() && sup.max_width().is_zero() {
            break;
        }
        sub.refine();
        sup.refine();
    }
    let (m, s) = (sub.measure(), sup.enclosure());
    let mid = |e: &Enclosure| (&e.lo + &e.hi) * half();
    Ok(lhs(&mid(&m), &mid(&s)) < rhs)
}

/// Dyadic subintervals of `J` down to this depth form the panel of
/// [`fit_good_constants`].
pub const PANEL_DEPTH: u32 = 3;

/// Smallest `C` for which the growth inequality holds (up to the strict
/// sign) on the sampled data: the largest ratio
/// `|{|f| < rho sup_J' |f|}| / (rho^alpha |J'|)` over the levels `rho` of
/// `r_grid` and the dyadic subintervals `J'` of `J`.
///
/// Levels are relative to the sup norm on each subinterval, which makes the
/// estimate invariant under `f -> lambda f`.
pub fn fit_good_constants(f: &Poly, j: (&Rational, &Rational), alpha: &Rational, r_grid: &[Rational]) -> Result<f64> {
    check_interval(j)?;
    check_poly(f)?;
    if r_grid.iter().any(|r| !r.is_positive()) {
        return Err(Error::Domain("grid levels must be positive".into()));
    }
    let a = rational::to_f64(alpha);
    let mut best: f64 = 0.0;
    for depth in 0..=PANEL_DEPTH {
        let pieces = 1u32 << depth;
        let step = (j.1 - j.0) / Rational::from_integer(pieces.into());
        for i in 0..pieces {
            let lo = j.0 + &step * Rational::from_integer(i.into());
            let hi = &lo + &step;
            let tol = &step * Rational::new(BigInt::one(), BigInt::from(1u64 << 40));
            let sup = sup_norm(f, (&lo, &hi), &tol)?;
            let s = (&sup.lo + &sup.hi) * half();
            if s.is_zero() {
                continue;
            }
            for rho in r_grid {
                let m = sublevel_measure(f, (&lo, &hi), &(rho * &s), &tol)?;
                let ratio = m.midpoint_f64() / (rational::to_f64(rho).powf(a) * rational::to_f64(&step));
                best = best.max(ratio);
            }
        }
    }
    Ok(best)
}
