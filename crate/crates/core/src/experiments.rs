//! Sampling experiments over expanding translates `a_{log N} u(phi(s)) Z^n`.
//!
//! All lattice work is exact: the time grid is `t = log N` with `N` an
//! integer and the sample points are rationals. Floats appear only in the
//! aggregated statistics and in the shadowing window, whose width
//! `N^{-n e}` is irrational in general.
//!
//! Parallelism comes from whatever rayon pool is current; [`with_workers`]
//! installs a dedicated one. Results are collected in (s-index, N-index)
//! order, so reports do not depend on the worker count.

use std::fmt::Write as _;
use std::str::FromStr;

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::curves::PolyCurve;
use crate::diophantine::{self, ApproxTarget};
use crate::error::{Error, Result};
use crate::groups::make_u;
use crate::lattices::{BoxEnumerator, SupBox, DEFAULT_BUDGET};
use crate::rational::{self, Rational};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// Numerators of the seeded-uniform sampler are drawn below this.
pub const UNIFORM_DENOMINATOR_BITS: u32 = 20;

/// Numerator of the rotation `round((sqrt(5) - 1) / 2 * (2^61 - 1)) / (2^61 - 1)`.
///
/// Plain van der Corput points have dyadic denominators below `2 samples`;
/// at those rationals `u(phi(s)) Z^n` has vectors `(0, d e_i)`, which `a_t`
/// shrinks to length `d / N`, so small denominators sit deep in the cusp.
/// The rotation keeps every denominator above `2^61`.
pub const ROTATION_NUMERATOR: u64 = 1_425_089_352_415_399_810;

/// Default number of grid steps on each side of `s0` in [`shadowing_check`].
pub const SHADOW_GRID: usize = 64;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Sampler {
    /// Midpoints of `samples` equal cells.
    Grid,
    /// Base-2 van der Corput points from index 1, rotated mod 1 by
    /// [`ROTATION_NUMERATOR`]` / (2^61 - 1)`.
    #[serde(alias = "vdc")]
    LowDiscrepancy,
    /// ChaCha8 draws at denominator `2^20`.
    #[serde(alias = "uniform")]
    SeededUniform,
}

impl FromStr for Sampler {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "grid" => Ok(Sampler::Grid),
            "low-discrepancy" | "vdc" => Ok(Sampler::LowDiscrepancy),
            "seeded-uniform" | "uniform" => Ok(Sampler::SeededUniform),
            _ => Err(Error::Config(format!("unknown sampler {s:?} (grid, low-discrepancy, seeded-uniform)"))),
        }
    }
}

fn default_budget() -> u64 {
    DEFAULT_BUDGET
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub curve: PolyCurve,
    #[serde(rename = "N_list")]
    pub n_list: Vec<u64>,
    #[serde(with = "rational::serde_q")]
    pub mu: Rational,
    pub samples: usize,
    pub seed: u64,
    #[serde(with = "rational::serde_q")]
    pub box_radius: Rational,
    pub sampler: Sampler,
    #[serde(default = "default_budget")]
    pub budget: u64,
}

impl ExperimentConfig {
    pub fn new(
        curve: PolyCurve,
        n_list: Vec<u64>,
        mu: Rational,
        samples: usize,
        seed: u64,
        box_radius: Rational,
        sampler: Sampler,
    ) -> Result<Self> {
        let c = ExperimentConfig { curve, n_list, mu, samples, seed, box_radius, sampler, budget: DEFAULT_BUDGET };
        c.validate()?;
        Ok(c)
    }

    pub fn with_budget(mut self, budget: u64) -> Self {
        self.budget = budget;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_list.is_empty() || self.n_list[0] == 0 || self.n_list.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::Config("N_list must be a nonempty strictly increasing list of positive integers".into()));
        }
        if self.samples == 0 {
            return Err(Error::Config("samples must be at least 1".into()));
        }
        if !self.mu.is_positive() || self.mu >= Rational::one() {
            return Err(Error::Domain(format!("mu = {} must lie in (0, 1)", rational::format(&self.mu))));
        }
        if !self.box_radius.is_positive() {
            return Err(Error::Domain("box radius must be positive".into()));
        }
        Ok(())
    }

    /// Sample points in `[a, b]`, in sampling order.
    pub fn sample_points(&self) -> Vec<Rational> {
        let (a, b) = self.curve.interval();
        let width = b - a;
        let m = self.samples;
        let unit: Vec<Rational> = match self.sampler {
            Sampler::Grid => (0..m).map(|i| Rational::new(BigInt::from(2 * i + 1), BigInt::from(2 * m))).collect(),
            Sampler::LowDiscrepancy => {
                let p = (BigInt::one() << 61u32) - 1;
                let theta = Rational::new(BigInt::from(ROTATION_NUMERATOR), p);
                (1..=m as u64)
                    .map(|i| {
                        let x = van_der_corput(i) + &theta;
                        if x >= Rational::one() { x - Rational::one() } else { x }
                    })
                    .collect()
            }
            Sampler::SeededUniform => {
                let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
                let den = BigInt::one() << UNIFORM_DENOMINATOR_BITS;
                (0..m)
                    .map(|_| Rational::new(BigInt::from(rng.gen_range(0u64..1 << UNIFORM_DENOMINATOR_BITS)), den.clone()))
                    .collect()
            }
        };
        unit.into_iter().map(|x| a + &width * x).collect()
    }
}

/// Base-2 radical inverse of `i`.
fn van_der_corput(mut i: u64) -> Rational {
    let mut num = 0u64;
    let mut bits = 0u32;
    while i > 0 {
        num = (num << 1) | (i & 1);
        i >>= 1;
        bits += 1;
    }
    Rational::new(BigInt::from(num), BigInt::one() << bits)
}

/// Runs `f` inside a fresh pool of `threads` workers.
pub fn with_workers<T: Send>(threads: usize, f: impl FnOnce() -> T + Send) -> Result<T> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| Error::Config(format!("cannot start worker pool: {e}")))?;
    Ok(pool.install(f))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SampleRecord {
    #[serde(with = "rational::serde_q")]
    pub s: Rational,
    #[serde(rename = "N")]
    pub n: u64,
    #[serde(rename = "in_K_first")]
    pub in_k_first: bool,
    #[serde(rename = "in_K_both")]
    pub in_k_both: bool,
    /// Nonzero points of the first lattice in the closed box of radius `box_radius`.
    pub box_count: u64,
    /// Sup-norm of a shortest nonzero vector of the first lattice.
    pub shortest_len: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum SampleOutcome {
    Ok(SampleRecord),
    Aborted {
        #[serde(with = "rational::serde_q")]
        s: Rational,
        #[serde(rename = "N")]
        n: u64,
        reason: String,
    },
}

impl SampleOutcome {
    pub fn n(&self) -> u64 {
        match self {
            SampleOutcome::Ok(r) => r.n,
            SampleOutcome::Aborted { n, .. } => *n,
        }
    }
}

/// `(s, N, value or budget error text)`.
type PairResult<T> = (Rational, u64, std::result::Result<T, String>);

/// Evaluates `f` on every (s, N) pair, turning budget errors into aborts.
fn run_pairs<T: Send>(
    points: &[Rational],
    n_list: &[u64],
    f: impl Fn(&Rational, u64) -> Result<T> + Sync,
) -> Result<Vec<PairResult<T>>> {
    let pairs: Vec<(usize, usize)> = (0..points.len()).flat_map(|i| (0..n_list.len()).map(move |j| (i, j))).collect();
    pairs
        .par_iter()
        .map(|&(i, j)| {
            let (s, n) = (&points[i], n_list[j]);
            match f(s, n) {
                Ok(v) => Ok((s.clone(), n, Ok(v))),
                Err(e) if e.is_budget() => Ok((s.clone(), n, Err(e.to_string()))),
                Err(e) => Err(e),
            }
        })
        .collect()
}

fn sample_one(config: &ExperimentConfig, s: &Rational, n: u64) -> Result<SampleRecord> {
    let xi = ApproxTarget::new(config.curve.evaluate(s)?)?;
    let (first, second) = diophantine::criterion_lattices(&xi, n)?;
    let e1 = BoxEnumerator::with_budget(&first, config.budget);
    let mu_box = SupBox::new(config.mu.clone())?;
    let in_k_first = e1.avoids(&mu_box)?;
    let in_k_both = in_k_first && BoxEnumerator::with_budget(&second, config.budget).avoids(&mu_box)?;
    let box_count = e1.count(&SupBox::new(config.box_radius.clone())?)?;
    let (_, shortest) = e1.shortest()?;
    Ok(SampleRecord {
        s: s.clone(),
        n,
        in_k_first,
        in_k_both,
        box_count,
        shortest_len: rational::to_f64(&shortest),
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReportRow {
    #[serde(rename = "N")]
    pub n: u64,
    #[serde(rename = "K_fraction_first")]
    pub k_fraction_first: f64,
    #[serde(rename = "K_fraction_both")]
    pub k_fraction_both: f64,
    pub mean_box_count: f64,
    pub count_stddev: f64,
    pub samples_ok: usize,
    pub samples_aborted: usize,
}

pub const REPORT_COLUMNS: &str =
    "N,K_fraction_first,K_fraction_both,mean_box_count,count_stddev,samples_ok,samples_aborted";

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub config: ExperimentConfig,
    pub version: String,
    pub rows: Vec<ReportRow>,
    pub records: Vec<SampleOutcome>,
}

/// Mean and population standard deviation, NaN when empty.
fn mean_std(xs: &[f64]) -> (f64, f64) {
    if xs.is_empty() {
        return (f64::NAN, f64::NAN);
    }
    let m = xs.iter().sum::<f64>() / xs.len() as f64;
    let var = xs.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / xs.len() as f64;
    (m, var.sqrt())
}

fn fraction(k: usize, n: usize) -> f64 {
    if n == 0 {
        f64::NAN
    } else {
        k as f64 / n as f64
    }
}

impl Report {
    /// Per-N aggregates over the successful records, in `n_list` order.
    pub fn aggregate(n_list: &[u64], records: &[SampleOutcome]) -> Vec<ReportRow> {
        n_list
            .iter()
            .map(|&n| {
                let ok: Vec<&SampleRecord> = records
                    .iter()
                    .filter_map(|r| match r {
                        SampleOutcome::Ok(rec) if rec.n == n => Some(rec),
                        _ => None,
                    })
                    .collect();
                let aborted = records.iter().filter(|r| matches!(r, SampleOutcome::Aborted { n: m, .. } if *m == n)).count();
                let counts: Vec<f64> = ok.iter().map(|r| r.box_count as f64).collect();
                let (mean, std) = mean_std(&counts);
                ReportRow {
                    n,
                    k_fraction_first: fraction(ok.iter().filter(|r| r.in_k_first).count(), ok.len()),
                    k_fraction_both: fraction(ok.iter().filter(|r| r.in_k_both).count(), ok.len()),
                    mean_box_count: mean,
                    count_stddev: std,
                    samples_ok: ok.len(),
                    samples_aborted: aborted,
                }
            })
            .collect()
    }

    pub fn row(&self, n: u64) -> Option<&ReportRow> {
        self.rows.iter().find(|r| r.n == n)
    }

    pub fn to_csv(&self) -> String {
        let mut out = csv_header(&self.config);
        out.push_str(REPORT_COLUMNS);
        out.push('\n');
        for r in &self.rows {
            let _ = writeln!(
                out,
                "{},{},{},{},{},{},{}",
                r.n,
                rational::format_f64(r.k_fraction_first),
                rational::format_f64(r.k_fraction_both),
                rational::format_f64(r.mean_box_count),
                rational::format_f64(r.count_stddev),
                r.samples_ok,
                r.samples_aborted
            );
        }
        out
    }
}

fn csv_header(config: &ExperimentConfig) -> String {
    let json = serde_json::to_string(config).expect("config serializes");
    format!("# config: {json}\n# version: improv-core {VERSION}\n")
}

/// Records K_mu memberships, box counts and shortest vectors for every
/// sample point and every N.
pub fn equidistribution_run(config: &ExperimentConfig) -> Result<Report> {
    config.validate()?;
    if !config.curve.is_nondegenerate() {
        return Err(Error::DegenerateCurve);
    }
    let points = config.sample_points();
    let records = run_pairs(&points, &config.n_list, |s, n| sample_one(config, s, n))?
        .into_iter()
        .map(|(s, n, r)| match r {
            Ok(rec) => SampleOutcome::Ok(rec),
            Err(reason) => SampleOutcome::Aborted { s, n, reason },
        })
        .collect::<Vec<_>>();
    Ok(Report {
        config: config.clone(),
        version: VERSION.to_string(),
        rows: Report::aggregate(&config.n_list, &records),
        records,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SiegelRow {
    #[serde(rename = "N")]
    pub n: u64,
    pub mean_box_count: f64,
    pub count_stddev: f64,
    pub samples_ok: usize,
    pub samples_aborted: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SiegelReport {
    pub config: ExperimentConfig,
    pub version: String,
    #[serde(with = "rational::serde_q")]
    pub volume: Rational,
    pub rows: Vec<SiegelRow>,
}

impl SiegelReport {
    pub fn to_csv(&self) -> String {
        let mut out = csv_header(&self.config);
        let _ = writeln!(out, "# volume: {}", rational::format(&self.volume));
        out.push_str("N,mean_box_count,count_stddev,samples_ok,samples_aborted\n");
        for r in &self.rows {
            let _ = writeln!(
                out,
                "{},{},{},{},{}",
                r.n,
                rational::format_f64(r.mean_box_count),
                rational::format_f64(r.count_stddev),
                r.samples_ok,
                r.samples_aborted
            );
        }
        out
    }
}

/// Mean number of nonzero points of `a_{log N} u(phi(s)) Z^n` in the closed
/// box of radius `box_radius`, for comparison with the box volume.
pub fn siegel_calibration(config: &ExperimentConfig) -> Result<SiegelReport> {
    config.validate()?;
    let n = config.curve.k() + 1;
    let volume = SupBox::new(config.box_radius.clone())?.volume(n);
    if rational::to_f64(&volume) > config.budget as f64 {
        return Err(Error::Domain(format!(
            "box volume {} exceeds the enumeration budget {}",
            rational::format(&volume),
            config.budget
        )));
    }
    let points = config.sample_points();
    let radius = SupBox::new(config.box_radius.clone())?;
    let results = run_pairs(&points, &config.n_list, |s, big_n| {
        let xi = ApproxTarget::new(config.curve.evaluate(s)?)?;
        let (first, _) = diophantine::criterion_lattices(&xi, big_n)?;
        BoxEnumerator::with_budget(&first, config.budget).count(&radius)
    })?;
    let rows = config
        .n_list
        .iter()
        .map(|&big_n| {
            let of_n = results.iter().filter(|(_, m, _)| *m == big_n);
            let counts: Vec<f64> = of_n.clone().filter_map(|(_, _, r)| r.as_ref().ok().map(|&c| c as f64)).collect();
            let (mean, std) = mean_std(&counts);
            SiegelRow {
                n: big_n,
                mean_box_count: mean,
                count_stddev: std,
                samples_ok: counts.len(),
                samples_aborted: of_n.filter(|(_, _, r)| r.is_err()).count(),
            }
        })
        .collect();
    Ok(SiegelReport { config: config.clone(), version: VERSION.to_string(), volume, rows })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScanRow {
    #[serde(with = "rational::serde_q")]
    pub s: Rational,
    /// The N at which both systems are insoluble.
    pub insoluble: Vec<u64>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct HistogramBin {
    pub insoluble_count: usize,
    pub points: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScanReport {
    #[serde(with = "rational::serde_q")]
    pub mu: Rational,
    #[serde(rename = "N_set")]
    pub n_set: Vec<u64>,
    pub rows: Vec<ScanRow>,
    /// How many grid points have each number of insoluble N.
    pub histogram: Vec<HistogramBin>,
    pub fraction_with_insoluble: f64,
}

/// Per grid point, the N in `n_set` at which `phi(s)` is simultaneously
/// insoluble for both systems.
pub fn dirichlet_scan_run(curve: &PolyCurve, mu: &Rational, n_set: &[u64], s_grid: &[Rational]) -> Result<ScanReport> {
    dirichlet_scan_run_with_budget(curve, mu, n_set, s_grid, DEFAULT_BUDGET)
}

pub fn dirichlet_scan_run_with_budget(
    curve: &PolyCurve,
    mu: &Rational,
    n_set: &[u64],
    s_grid: &[Rational],
    budget: u64,
) -> Result<ScanReport> {
    if !mu.is_positive() || *mu >= Rational::one() {
        return Err(Error::Domain(format!("mu = {} must lie in (0, 1)", rational::format(mu))));
    }
    let rows: Vec<ScanRow> = s_grid
        .par_iter()
        .map(|s| {
            let xi = ApproxTarget::new(curve.evaluate(s)?)?;
            let insoluble = if n_set.is_empty() { Vec::new() } else { diophantine::dirichlet_scan_with_budget(&xi, n_set, mu, budget)? };
            Ok(ScanRow { s: s.clone(), insoluble })
        })
        .collect::<Result<_>>()?;
    let max = rows.iter().map(|r| r.insoluble.len()).max().unwrap_or(0);
    let histogram = (0..=max)
        .map(|c| HistogramBin { insoluble_count: c, points: rows.iter().filter(|r| r.insoluble.len() == c).count() })
        .filter(|b| b.points > 0)
        .collect();
    let hit = rows.iter().filter(|r| !r.insoluble.is_empty()).count();
    Ok(ScanReport {
        mu: mu.clone(),
        n_set: n_set.to_vec(),
        fraction_with_insoluble: fraction(hit, rows.len()),
        rows,
        histogram,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ShadowReport {
    #[serde(with = "rational::serde_q")]
    pub s0: Rational,
    #[serde(rename = "N")]
    pub n: u64,
    #[serde(with = "rational::serde_q")]
    pub exponent: Rational,
    pub delta: f64,
    pub deviation: f64,
    /// `N^{n (1 - 2 e)}`, the expected order of the deviation.
    pub predicted_order: f64,
}

/// Largest sup-norm distance between `u(N^n (phi(s) - phi(s0)))` and
/// `u(N^n (s - s0) phi'(s0))` over a grid of `|s - s0| <= N^{-n e}` inside
/// the curve's interval.
pub fn shadowing_check(curve: &PolyCurve, s0: &Rational, big_n: u64, exponent: &Rational, grid: usize) -> Result<ShadowReport> {
    let half = Rational::new(1.into(), 2.into());
    if *exponent <= half || *exponent >= Rational::one() {
        return Err(Error::Domain(format!("exponent {} must lie in (1/2, 1)", rational::format(exponent))));
    }
    if big_n == 0 || grid == 0 {
        return Err(Error::Domain("N and the grid size must be positive".into()));
    }
    let base = curve.evaluate(s0)?;
    let tangent = curve.derivative().evaluate(s0)?;
    if tangent.iter().all(Zero::is_zero) {
        return Err(Error::ZeroDerivative(rational::format(s0)));
    }
    let n = curve.k() + 1;
    let e = rational::to_f64(exponent);
    let delta = (big_n as f64).powf(-(n as f64) * e);
    let delta_q = rational::from_f64_exact(delta).filter(|d| d.is_positive()).ok_or_else(|| {
        Error::Domain(format!("window N^(-{n} e) underflows for N = {big_n}"))
    })?;
    let scale = Rational::from_integer(BigInt::from(big_n).pow(n as u32));
    let mut worst = Rational::zero();
    for j in -(grid as i64)..=grid as i64 {
        let s = s0 + &delta_q * Rational::new(j.into(), (grid as i64).into());
        if !curve.contains(&s) {
            continue;
        }
        let ds = &s - s0;
        let moved: Vec<Rational> = curve.evaluate(&s)?.iter().zip(&base).map(|(x, y)| &scale * (x - y)).collect();
        let linear: Vec<Rational> = tangent.iter().map(|t| &scale * &ds * t).collect();
        let d = make_u(&moved).matrix().sub(make_u(&linear).matrix()).max_abs();
        if d > worst {
            worst = d;
        }
    }
    Ok(ShadowReport {
        s0: s0.clone(),
        n: big_n,
        exponent: exponent.clone(),
        delta,
        deviation: rational::to_f64(&worst),
        predicted_order: (big_n as f64).powf(n as f64 * (1.0 - 2.0 * e)),
    })
}

/// Parses an N list: comma-separated integers, `a..b` for an inclusive run,
/// or `a,b,...,c`. The ellipsis continues geometrically when `b / a` is an
/// integer at least 2 and `c` is reached that way, arithmetically otherwise.
pub fn parse_n_list(text: &str) -> Result<Vec<u64>> {
    let bad = |why: &str| Error::Config(format!("bad N list {text:?}: {why}"));
    let num = |t: &str| t.trim().parse::<u64>().map_err(|_| bad(&format!("{:?} is not a nonnegative integer", t.trim())));
    let t = text.trim();
    if t.is_empty() {
        return Ok(Vec::new());
    }
    let out = if let Some((a, b)) = t.split_once("..").filter(|_| !t.contains(',')) {
        let (a, b) = (num(a)?, num(b)?);
        if a > b {
            return Err(bad("empty range"));
        }
        (a..=b).collect()
    } else {
        let parts: Vec<&str> = t.split(',').map(str::trim).collect();
        match parts.iter().position(|p| *p == "...") {
            None => parts.iter().map(|p| num(p)).collect::<Result<Vec<_>>>()?,
            Some(i) => {
                if i < 2 || i + 2 != parts.len() {
                    return Err(bad("an ellipsis needs two leading terms and one final term"));
                }
                let head: Vec<u64> = parts[..i].iter().map(|p| num(p)).collect::<Result<_>>()?;
                let last = num(parts[i + 1])?;
                let (a, b) = (head[i - 2], head[i - 1]);
                if b <= a {
                    return Err(bad("terms before the ellipsis must increase"));
                }
                let mut out = head[..i - 2].to_vec();
                let geometric = a > 0 && b % a == 0 && b / a >= 2 && {
                    let mut x = b;
                    while x < last {
                        x = x.saturating_mul(b / a);
                    }
                    x == last
                };
                let mut x = a;
                while x < last {
                    out.push(x);
                    x = if geometric { x * (b / a) } else { x + (b - a) };
                }
                if x != last {
                    return Err(bad("final term is not on the progression"));
                }
                out.push(last);
                out
            }
        }
    };
    if out.windows(2).any(|w| w[0] >= w[1]) {
        return Err(bad("values must be strictly increasing"));
    }
    Ok(out)
}

#[cfg(test)]
mod tests;
