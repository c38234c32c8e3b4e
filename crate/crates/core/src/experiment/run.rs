use std::path::{Path, PathBuf};

use num_complex::Complex64;
use num_traits::One;
use rayon::prelude::*;
use serde::Serialize;

use super::config::{BetaModeSpec, ExperimentConfig, ExperimentId, Params};
use crate::apfunctions::spec::{ComplexSpec, ConstSpec, FunctionSpec, TermSpec};
use crate::apfunctions::{self, ApFunction, TrigPolynomial};
use crate::averaging::{
    default_sobol_epsilon, running_averages, singular_exponent, sobol_criterion, write_trace_csv,
    RenyiParryDensity, SampleStats, TraceRow,
};
use crate::diophantine::{dio_scan, parse_set, DioScan, Verdict};
use crate::equidistribution::{
    digit_block_frequencies, discrepancy_report, max_weyl, ud_bound_check,
};
use crate::error::{invalid, AvgError, Result};
use crate::numeric::stats::fraction;
use crate::orbit::{
    beta_orbit, generate_orbit, FractionalOrbit, Multiplier, OrbitOptions, SeedPoint,
};
use crate::report::{complex17, float17, float17_vec};

/// Envelope exponent slack used for `C_hat` in `weyl-ud`.
const WEYL_UD_ENVELOPE_EPS: f64 = 0.1;

#[derive(Clone, Debug, Serialize)]
pub struct Summary {
    pub experiment: ExperimentId,
    pub statement: &'static str,
    pub seed: u64,
    pub samples: usize,
    pub schedule: Vec<usize>,
    pub pass: bool,
    pub groups: Vec<Group>,
}

/// Per-multiplier results.
#[derive(Clone, Debug, Serialize)]
#[serde(untagged)]
pub enum Group {
    Weyl(WeylGroup),
    Envelope(EnvelopeGroup),
    Average(AverageGroup),
    Dio(DioGroup),
    Renyi(RenyiGroup),
    Normality(NormalityGroup),
}

impl Group {
    pub fn pass(&self) -> bool {
        match self {
            Group::Weyl(g) => g.pass,
            Group::Envelope(g) => g.pass,
            Group::Average(g) => g.pass,
            Group::Dio(g) => g.pass,
            Group::Renyi(g) => g.pass,
            Group::Normality(g) => g.pass,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct WeylGroup {
    pub alpha: String,
    #[serde(rename = "N")]
    pub n: usize,
    pub star: SampleStats,
    pub extreme: SampleStats,
    pub max_weyl: SampleStats,
    pub c_hat: SampleStats,
    #[serde(serialize_with = "float17")]
    pub weyl_fraction: f64,
    #[serde(serialize_with = "float17")]
    pub star_max: f64,
    #[serde(serialize_with = "float17")]
    pub weyl_max: f64,
    pub kmax: i64,
    #[serde(serialize_with = "float17")]
    pub fraction: f64,
    pub pass: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct EnvelopeGroup {
    pub alpha: String,
    #[serde(serialize_with = "float17")]
    pub epsilon: f64,
    pub c_hat: SampleStats,
    /// Fraction of samples whose late envelope ratios stay within twice the early ones.
    #[serde(serialize_with = "float17")]
    pub envelope_fraction: f64,
    /// Fraction with `D*_N <= (ln N)^(3/2 + eps) / sqrt(N)` at every checkpoint.
    #[serde(serialize_with = "float17")]
    pub unit_constant_fraction: f64,
    #[serde(serialize_with = "float17")]
    pub fraction: f64,
    pub pass: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct SobolSummary {
    #[serde(serialize_with = "float17")]
    pub epsilon: f64,
    #[serde(serialize_with = "float17")]
    pub decreasing_fraction: f64,
    /// `D_N V_N` at the final checkpoint.
    pub product: SampleStats,
}

#[derive(Clone, Debug, Serialize)]
pub struct SandwichSummary {
    pub truncations: Vec<usize>,
    #[serde(serialize_with = "float17_vec")]
    pub tails: Vec<f64>,
    /// Count of `(sample, N, m)` with `|S_N(f) - S_N(g_m)| > tail(m)`.
    pub violations: usize,
    /// `|M(g_m) - M(f)|` per truncation.
    #[serde(serialize_with = "float17_vec")]
    pub mean_gaps: Vec<f64>,
}

#[derive(Clone, Debug, Serialize)]
pub struct AverageGroup {
    pub alpha: String,
    #[serde(rename = "N")]
    pub n: usize,
    #[serde(serialize_with = "complex17")]
    pub target: Complex64,
    pub abs_err: SampleStats,
    #[serde(serialize_with = "float17")]
    pub within_fraction: f64,
    #[serde(serialize_with = "float17")]
    pub tolerance: f64,
    #[serde(serialize_with = "float17")]
    pub fraction: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sobol: Option<SobolSummary>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sandwich: Option<SandwichSummary>,
    pub pass: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct DioGroup {
    pub alpha: String,
    pub set: String,
    #[serde(serialize_with = "float17")]
    pub epsilon: f64,
    #[serde(rename = "N")]
    pub n: usize,
    #[serde(serialize_with = "float17")]
    pub finite_fraction: f64,
    /// Verdict finite-violations and every violation at `n <= N/3`.
    #[serde(serialize_with = "float17")]
    pub clean_fraction: f64,
    #[serde(serialize_with = "float17")]
    pub budget: f64,
    #[serde(serialize_with = "float17")]
    pub fraction: f64,
    pub pass: bool,
    pub scans: Vec<DioScan>,
}

#[derive(Clone, Debug, Serialize)]
pub struct RenyiGroup {
    pub alpha: String,
    #[serde(rename = "N")]
    pub n: usize,
    pub beta_mode: BetaModeSpec,
    #[serde(serialize_with = "float17")]
    pub lebesgue_mean: f64,
    #[serde(serialize_with = "float17")]
    pub density_integral: f64,
    /// Density levels, for overlays.
    #[serde(serialize_with = "float17_vec")]
    pub density_breaks: Vec<f64>,
    #[serde(serialize_with = "float17_vec")]
    pub density_values: Vec<f64>,
    pub exp_orbit: SampleStats,
    pub beta_orbit: SampleStats,
    #[serde(serialize_with = "float17")]
    pub exp_tolerance: f64,
    #[serde(serialize_with = "float17")]
    pub beta_tolerance: f64,
    #[serde(serialize_with = "float17")]
    pub min_separation: f64,
    pub pass: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct BlockStats {
    pub block_length: u32,
    pub max_deviation: SampleStats,
}

#[derive(Clone, Debug, Serialize)]
pub struct NormalityGroup {
    pub base: u32,
    /// Number of digits.
    #[serde(rename = "N")]
    pub n: usize,
    pub blocks: Vec<BlockStats>,
    #[serde(serialize_with = "float17")]
    pub within_fraction: f64,
    #[serde(serialize_with = "float17")]
    pub tolerance: f64,
    #[serde(serialize_with = "float17")]
    pub fraction: f64,
    pub pass: bool,
}

/// Result of a run held in memory.
#[derive(Clone, Debug)]
pub struct Outcome {
    pub summary: Summary,
    pub trace: Vec<TraceRow>,
}

impl Outcome {
    pub fn pass(&self) -> bool {
        self.summary.pass
    }

    pub fn summary_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(&self.summary)? + "\n")
    }

    pub fn trace_csv(&self) -> Result<Vec<u8>> {
        let mut out = Vec::new();
        write_trace_csv(&mut out, &self.trace)?;
        Ok(out)
    }
}

/// Where a run wrote its files.
#[derive(Clone, Debug)]
pub struct Written {
    pub trace: PathBuf,
    pub summary: PathBuf,
    pub pass: bool,
}

/// Runs `cfg` and writes the trace CSV and summary JSON into `out_dir`.
pub fn run(
    cfg: &ExperimentConfig,
    out_dir: &Path,
    seed: Option<u64>,
    threads: Option<usize>,
) -> Result<Written> {
    let outcome = execute(cfg, seed, threads)?;
    std::fs::create_dir_all(out_dir)?;
    let trace = out_dir.join(&cfg.output.trace);
    let summary = out_dir.join(&cfg.output.summary);
    std::fs::write(&trace, outcome.trace_csv()?)?;
    std::fs::write(&summary, outcome.summary_json()?)?;
    Ok(Written {
        trace,
        summary,
        pass: outcome.pass(),
    })
}

/// Runs `cfg` without touching the file system. `seed` and `threads`
/// override the config.
pub fn execute(
    cfg: &ExperimentConfig,
    seed: Option<u64>,
    threads: Option<usize>,
) -> Result<Outcome> {
    cfg.validate()?;
    let seed = seed.unwrap_or(cfg.sampling.seed);
    let threads = threads.or(cfg.threads).unwrap_or(1);
    if threads == 0 {
        return Err(invalid("thread count must be positive"));
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| invalid(format!("cannot start {threads} threads: {e}")))?;
    let seeds = cfg.seeds(seed)?;
    let ctx = Ctx { cfg, seeds: &seeds };
    let (groups, mut trace) = pool.install(|| match cfg.experiment {
        ExperimentId::WeylUd => ctx.weyl_ud(),
        ExperimentId::DiscrepancyBound => ctx.discrepancy_bound(),
        ExperimentId::PeriodicAverage
        | ExperimentId::SobolSingular
        | ExperimentId::BohrAverage
        | ExperimentId::StepanovAverage => ctx.averages(),
        ExperimentId::DioScan => ctx.dio(),
        ExperimentId::RenyiParry => ctx.renyi(),
        ExperimentId::Normality => ctx.normality(),
    })?;
    trace.sort_by(|a, b| (&a.alpha, a.x_index, a.n).cmp(&(&b.alpha, b.x_index, b.n)));
    let pass = groups.iter().all(Group::pass);
    Ok(Outcome {
        summary: Summary {
            experiment: cfg.experiment,
            statement: cfg.experiment.statement(),
            seed,
            samples: seeds.len(),
            schedule: cfg.schedule.clone(),
            pass,
            groups,
        },
        trace,
    })
}

struct Ctx<'a> {
    cfg: &'a ExperimentConfig,
    seeds: &'a [SeedPoint],
}

type Groups = (Vec<Group>, Vec<TraceRow>);

/// Function used when the config has none.
pub fn default_function(id: ExperimentId) -> Option<FunctionSpec> {
    let c = |re: f64| ComplexSpec::Real(re);
    Some(match id {
        ExperimentId::PeriodicAverage => FunctionSpec::Trigpoly {
            a0: c(2.0),
            terms: vec![TermSpec {
                k: ConstSpec::Int(1),
                a: c(3.0),
            }],
        },
        ExperimentId::SobolSingular => FunctionSpec::FracPower { p: -0.25 },
        ExperimentId::BohrAverage => FunctionSpec::GeometricBohr { len: 12 },
        ExperimentId::StepanovAverage => FunctionSpec::Stepanov {
            set: "beatty:sqrt(2):1:0".into(),
            a: 0.25,
            c: 1.0,
            delta: 0.2,
            regular: None,
        },
        ExperimentId::RenyiParry => FunctionSpec::Indicator {
            lo: ConstSpec::Int(0),
            hi: ConstSpec::Text("1/tau".into()),
            period: ConstSpec::Int(1),
        },
        _ => return None,
    })
}

fn stats(values: Vec<f64>) -> Result<SampleStats> {
    SampleStats::of(values)
}

fn row(
    id: ExperimentId,
    alpha: &str,
    x_index: usize,
    n: usize,
    stat: impl Into<String>,
    value: Complex64,
    target: Complex64,
) -> TraceRow {
    TraceRow {
        experiment: id.name().to_string(),
        alpha: alpha.to_string(),
        x_index: x_index as u64,
        n,
        stat: stat.into(),
        value,
        target,
    }
}

fn real(v: f64) -> Complex64 {
    Complex64::new(v, 0.0)
}

/// Orbit options under which `f` can be averaged: reduced modulo its
/// period when it has one, unreduced values otherwise.
fn options_for(f: &ApFunction) -> OrbitOptions {
    match f.period() {
        Some(p) if p.is_one() => OrbitOptions::default(),
        Some(p) => OrbitOptions::default().with_modulus(p),
        None => OrbitOptions::default().retaining(),
    }
}

impl Ctx<'_> {
    fn params(&self) -> &Params {
        &self.cfg.params
    }

    fn fraction(&self, default: f64) -> f64 {
        self.params().fraction.unwrap_or(default)
    }

    fn function(&self) -> Result<ApFunction> {
        let spec = match &self.cfg.function {
            Some(f) => f.clone(),
            None => default_function(self.cfg.experiment).ok_or_else(|| AvgError::Config {
                path: "function".into(),
                message: format!("experiment {} needs a function", self.cfg.experiment),
            })?,
        };
        spec.build()
    }

    /// Applies `task` to every sample in parallel; results keep sample order.
    fn per_sample<T: Send>(
        &self,
        task: impl Fn(usize, &SeedPoint) -> Result<T> + Sync,
    ) -> Result<Vec<T>> {
        self.seeds
            .par_iter()
            .enumerate()
            .map(|(i, x)| task(i, x))
            .collect()
    }

    fn weyl_ud(&self) -> Result<Groups> {
        let id = self.cfg.experiment;
        let kmax = self.params().kmax.unwrap_or(5);
        if kmax < 1 {
            return Err(invalid("kmax must be at least 1"));
        }
        let star_max = self.params().star_max.unwrap_or(0.02);
        let weyl_max = self.params().weyl_max.unwrap_or(0.05);
        let frac = self.fraction(0.9);
        let n = self.cfg.final_n();
        let mut groups = Vec::new();
        let mut rows = Vec::new();
        for m in self.cfg.multipliers()? {
            let label = m.label().to_string();
            let per = self.per_sample(|i, x| {
                let o = generate_orbit(&m, x, n, &OrbitOptions::default())?;
                let rep = discrepancy_report(&o, kmax, &self.cfg.schedule)?;
                let fit = ud_bound_check(&rep.trace, WEYL_UD_ENVELOPE_EPS)?;
                let mut r = Vec::new();
                for t in &rep.trace {
                    r.push(row(id, &label, i, t.n, "star", real(t.star), real(0.0)));
                    r.push(row(
                        id,
                        &label,
                        i,
                        t.n,
                        "extreme",
                        real(t.extreme),
                        real(0.0),
                    ));
                }
                for w in rep.weyl.iter().filter(|w| w.k >= 1) {
                    let v = Complex64::new(w.re, w.im);
                    r.push(row(id, &label, i, n, format!("weyl_{}", w.k), v, real(0.0)));
                }
                Ok((
                    rep.star,
                    rep.extreme,
                    max_weyl(o.entries(), kmax),
                    fit.c_hat,
                    r,
                ))
            })?;
            let mut star = Vec::new();
            let mut extreme = Vec::new();
            let mut weyl = Vec::new();
            let mut c_hat = Vec::new();
            for (s, e, w, c, r) in per {
                star.push(s);
                extreme.push(e);
                weyl.push(w);
                c_hat.push(c);
                rows.extend(r);
            }
            let flags: Vec<bool> = weyl.iter().map(|&w| w <= weyl_max).collect();
            let weyl_fraction = fraction(&flags);
            let star = stats(star)?;
            let pass = star.median <= star_max && weyl_fraction >= frac;
            groups.push(Group::Weyl(WeylGroup {
                alpha: label,
                n,
                star,
                extreme: stats(extreme)?,
                max_weyl: stats(weyl)?,
                c_hat: stats(c_hat)?,
                weyl_fraction,
                star_max,
                weyl_max,
                kmax,
                fraction: frac,
                pass,
            }));
        }
        Ok((groups, rows))
    }

    fn discrepancy_bound(&self) -> Result<Groups> {
        let id = self.cfg.experiment;
        let eps = self.params().epsilon.unwrap_or(0.1);
        let frac = self.fraction(0.9);
        let n = self.cfg.final_n();
        let mut groups = Vec::new();
        let mut rows = Vec::new();
        for m in self.cfg.multipliers()? {
            let label = m.label().to_string();
            let per = self.per_sample(|i, x| {
                let o = generate_orbit(&m, x, n, &OrbitOptions::default())?;
                let rep = discrepancy_report(&o, 0, &self.cfg.schedule)?;
                let fit = ud_bound_check(&rep.trace, eps)?;
                let mut r = Vec::new();
                for (t, (_, ratio)) in rep.trace.iter().zip(&fit.ratios) {
                    r.push(row(id, &label, i, t.n, "star", real(t.star), real(0.0)));
                    r.push(row(
                        id,
                        &label,
                        i,
                        t.n,
                        "envelope_ratio",
                        real(*ratio),
                        real(0.0),
                    ));
                }
                Ok((fit.c_hat, fit.pass, fit.c_hat <= 1.0, r))
            })?;
            let mut c_hat = Vec::new();
            let mut env = Vec::new();
            let mut unit = Vec::new();
            for (c, p, u, r) in per {
                c_hat.push(c);
                env.push(p);
                unit.push(u);
                rows.extend(r);
            }
            let envelope_fraction = fraction(&env);
            groups.push(Group::Envelope(EnvelopeGroup {
                alpha: label,
                epsilon: eps,
                c_hat: stats(c_hat)?,
                envelope_fraction,
                unit_constant_fraction: fraction(&unit),
                fraction: frac,
                pass: envelope_fraction >= frac,
            }));
        }
        Ok((groups, rows))
    }

    fn averages(&self) -> Result<Groups> {
        let id = self.cfg.experiment;
        let f = self.function()?;
        let tol = self.params().tolerance.unwrap_or(0.05);
        let frac = self.fraction(0.9);
        let n = self.cfg.final_n();
        let schedule = &self.cfg.schedule;
        let target = apfunctions::mean(
            &f,
            apfunctions::DEFAULT_T_MAX,
            apfunctions::DEFAULT_TOLERANCE,
        )?
        .value;
        let sobol = match id {
            ExperimentId::SobolSingular => {
                let z = self.params().z.unwrap_or(0.0);
                let eps = match self.params().epsilon {
                    Some(e) => e,
                    None => default_sobol_epsilon(singular_exponent(&f, z)?),
                };
                Some((z, eps))
            }
            _ => None,
        };
        let sandwich = match (&f, id) {
            (ApFunction::Bohr(b), ExperimentId::BohrAverage) => {
                let orders = self
                    .params()
                    .truncations
                    .clone()
                    .unwrap_or_else(|| vec![1, 2, 4, 8]);
                let parts = orders
                    .iter()
                    .map(|&m| b.truncate(m))
                    .collect::<Result<Vec<(TrigPolynomial, f64)>>>()?;
                Some((orders, parts))
            }
            _ => None,
        };
        let opts = options_for(&f);
        let mut groups = Vec::new();
        let mut rows = Vec::new();
        for m in self.cfg.multipliers()? {
            let label = m.label().to_string();
            let per = self.per_sample(|i, x| {
                let o = generate_orbit(&m, x, n, &opts)?;
                let avgs = running_averages(&f, &o, schedule)?;
                let mut r: Vec<TraceRow> = avgs
                    .iter()
                    .map(|&(k, s)| row(id, &label, i, k, "S_N", s, target))
                    .collect();
                let err = (avgs.last().expect("nonempty schedule").1 - target).norm();
                let sob = match sobol {
                    Some((z, eps)) => {
                        let rep = sobol_criterion(&f, &o, z, eps, schedule)?;
                        for s in &rep.rows {
                            r.push(row(
                                id,
                                &label,
                                i,
                                s.n,
                                "sobol_product",
                                real(s.product),
                                real(0.0),
                            ));
                        }
                        let last = rep.rows.last().expect("nonempty schedule").product;
                        Some((rep.decreasing, last))
                    }
                    None => None,
                };
                let violations = match &sandwich {
                    Some((_, parts)) => sandwich_violations(&avgs, &o, schedule, parts)?,
                    None => 0,
                };
                Ok((err, sob, violations, r))
            })?;
            let mut errs = Vec::new();
            let mut decreasing = Vec::new();
            let mut products = Vec::new();
            let mut violations = 0;
            for (e, sob, v, r) in per {
                errs.push(e);
                if let Some((d, p)) = sob {
                    decreasing.push(d);
                    products.push(p);
                }
                violations += v;
                rows.extend(r);
            }
            let within: Vec<bool> = errs.iter().map(|&e| e <= tol).collect();
            let within_fraction = fraction(&within);
            let mut pass = within_fraction >= frac;
            let sobol_summary = match sobol {
                Some((_, eps)) => {
                    let decreasing_fraction = fraction(&decreasing);
                    pass &= decreasing_fraction >= frac;
                    Some(SobolSummary {
                        epsilon: eps,
                        decreasing_fraction,
                        product: stats(products)?,
                    })
                }
                None => None,
            };
            let sandwich_summary = match &sandwich {
                Some((orders, parts)) => {
                    pass &= violations == 0;
                    let mean_gaps = parts
                        .iter()
                        .map(|(g, _)| (g.a0() - target).norm())
                        .collect();
                    Some(SandwichSummary {
                        truncations: orders.clone(),
                        tails: parts.iter().map(|p| p.1).collect(),
                        violations,
                        mean_gaps,
                    })
                }
                None => None,
            };
            groups.push(Group::Average(AverageGroup {
                alpha: label,
                n,
                target,
                abs_err: stats(errs)?,
                within_fraction,
                tolerance: tol,
                fraction: frac,
                sobol: sobol_summary,
                sandwich: sandwich_summary,
                pass,
            }));
        }
        Ok((groups, rows))
    }

    fn dio(&self) -> Result<Groups> {
        let id = self.cfg.experiment;
        let set_text = self.params().set.clone().unwrap_or_else(|| "Z".into());
        let set = parse_set(&set_text)?;
        let eps = self.params().epsilon.unwrap_or(0.5);
        let frac = self.fraction(0.95);
        let n = self.cfg.final_n();
        let mut groups = Vec::new();
        let mut rows = Vec::new();
        for m in self.cfg.multipliers()? {
            let label = m.label().to_string();
            let scans =
                self.per_sample(|_, x| dio_scan(&m, x, &set, eps, n, &OrbitOptions::default()))?;
            let mut finite = Vec::new();
            let mut clean = Vec::new();
            for (i, s) in scans.iter().enumerate() {
                for &k in &self.cfg.schedule {
                    let count = s.violations.iter().filter(|&&v| v <= k).count();
                    rows.push(row(
                        id,
                        &label,
                        i,
                        k,
                        "violations",
                        real(count as f64),
                        real(0.0),
                    ));
                }
                let f = s.verdict == Verdict::FiniteViolations;
                finite.push(f);
                clean.push(f && s.violations.iter().all(|&v| 3 * v <= n));
            }
            let clean_fraction = fraction(&clean);
            groups.push(Group::Dio(DioGroup {
                alpha: label,
                set: set_text.clone(),
                epsilon: eps,
                n,
                finite_fraction: fraction(&finite),
                clean_fraction,
                budget: scans.first().map_or(0.0, |s| s.budget),
                fraction: frac,
                pass: clean_fraction >= frac,
                scans,
            }));
        }
        Ok((groups, rows))
    }

    fn renyi(&self) -> Result<Groups> {
        let id = self.cfg.experiment;
        let f = self.function()?;
        if !f.is_one_periodic() {
            return Err(invalid(
                "the Renyi-Parry comparison needs a 1-periodic function",
            ));
        }
        let mode = self.params().beta_mode.unwrap_or(BetaModeSpec::Certified);
        let exp_tol = self.params().exp_tolerance.unwrap_or(0.02);
        let beta_tol = self.params().beta_tolerance.unwrap_or(0.03);
        let min_sep = self.params().min_separation.unwrap_or(0.08);
        let n = self.cfg.final_n();
        let schedule = &self.cfg.schedule;
        let lebesgue = apfunctions::mean(
            &f,
            apfunctions::DEFAULT_T_MAX,
            apfunctions::DEFAULT_TOLERANCE,
        )?
        .value;
        let opts = OrbitOptions::default();
        let mut groups = Vec::new();
        let mut rows = Vec::new();
        for m in self.cfg.multipliers()? {
            let label = m.label().to_string();
            let h = RenyiParryDensity::for_multiplier(&m).ok_or_else(|| {
                invalid(format!("no built-in invariant density for alpha = {label}"))
            })?;
            let density = h.integrate(&f);
            let per = self.per_sample(|i, x| {
                let o = generate_orbit(&m, x, n, &opts)?;
                let e = running_averages(&f, &o, schedule)?;
                let b = beta_orbit(&m, &crate::averaging::unit_seed(x)?, n, mode.into(), &opts)?;
                let bt = running_averages(&f, &b, schedule)?;
                let mut r = Vec::new();
                for (&(k, s), &(_, t)) in e.iter().zip(&bt) {
                    r.push(row(id, &label, i, k, "exp_S_N", s, lebesgue));
                    r.push(row(id, &label, i, k, "beta_S_N", t, density));
                }
                Ok((
                    e.last().expect("nonempty").1.re,
                    bt.last().expect("nonempty").1.re,
                    r,
                ))
            })?;
            let mut exp = Vec::new();
            let mut beta = Vec::new();
            for (e, b, r) in per {
                exp.push(e);
                beta.push(b);
                rows.extend(r);
            }
            let exp = stats(exp)?;
            let beta = stats(beta)?;
            let pass = (exp.median - lebesgue.re).abs() <= exp_tol
                && (beta.median - density.re).abs() <= beta_tol
                && (exp.median - beta.median).abs() >= min_sep;
            groups.push(Group::Renyi(RenyiGroup {
                alpha: label,
                n,
                beta_mode: mode,
                lebesgue_mean: lebesgue.re,
                density_integral: density.re,
                density_breaks: h.breaks.iter().map(|b| b.to_f64()).collect(),
                density_values: h.values.iter().map(|v| v.to_f64()).collect(),
                exp_orbit: exp,
                beta_orbit: beta,
                exp_tolerance: exp_tol,
                beta_tolerance: beta_tol,
                min_separation: min_sep,
                pass,
            }));
        }
        Ok((groups, rows))
    }

    fn normality(&self) -> Result<Groups> {
        let id = self.cfg.experiment;
        let q = self.params().base.unwrap_or(2);
        let lengths = self
            .params()
            .block_lengths
            .clone()
            .unwrap_or_else(|| vec![1, 2]);
        if lengths.is_empty() {
            return Err(invalid("block_lengths must not be empty"));
        }
        let tol = self.params().tolerance.unwrap_or(0.02);
        let frac = self.fraction(0.9);
        let n = self.cfg.final_n();
        let label = format!("{q}");
        let per = self.per_sample(|i, x| {
            let mut r = Vec::new();
            let mut last = Vec::new();
            for &l in &lengths {
                for &k in &self.cfg.schedule {
                    let dev = digit_block_frequencies(x, q, l, k)?.max_deviation();
                    r.push(row(
                        id,
                        &label,
                        i,
                        k,
                        format!("block_dev_{l}"),
                        real(dev),
                        real(0.0),
                    ));
                    if k == n {
                        last.push(dev);
                    }
                }
            }
            Ok((last, r))
        })?;
        let mut devs = vec![Vec::new(); lengths.len()];
        let mut within = Vec::new();
        let mut rows = Vec::new();
        for (last, r) in per {
            within.push(last.iter().all(|&d| d <= tol));
            for (slot, d) in devs.iter_mut().zip(last) {
                slot.push(d);
            }
            rows.extend(r);
        }
        let blocks = lengths
            .iter()
            .zip(devs)
            .map(|(&l, d)| {
                Ok(BlockStats {
                    block_length: l,
                    max_deviation: stats(d)?,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        let within_fraction = fraction(&within);
        Ok((
            vec![Group::Normality(NormalityGroup {
                base: q,
                n,
                blocks,
                within_fraction,
                tolerance: tol,
                fraction: frac,
                pass: within_fraction >= frac,
            })],
            rows,
        ))
    }
}

/// Checkpoints where `|S_N(f) - S_N(g_m)|` exceeds the tail bound of `g_m`.
fn sandwich_violations(
    avgs: &[(usize, Complex64)],
    o: &FractionalOrbit,
    schedule: &[usize],
    parts: &[(TrigPolynomial, f64)],
) -> Result<usize> {
    let mut count = 0;
    for (g, tail) in parts {
        let g = ApFunction::Trig(g.clone());
        let ga = running_averages(&g, o, schedule)?;
        count += avgs
            .iter()
            .zip(&ga)
            .filter(|((_, s), (_, t))| (s - t).norm() > *tail)
            .count();
    }
    Ok(count)
}

/// Registry rows `(id, statement)` in a stable order.
pub fn list_experiments() -> Vec<(&'static str, &'static str)> {
    ExperimentId::ALL
        .iter()
        .map(|id| (id.name(), id.statement()))
        .collect()
}

/// Orbit dump: header `n,frac`, fractional parts with 18 significant digits.
pub fn write_orbit_csv<W: std::io::Write>(
    out: W,
    m: &Multiplier,
    x: &SeedPoint,
    n: usize,
) -> Result<()> {
    let o = generate_orbit(m, x, n, &OrbitOptions::default())?;
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["n", "frac"])?;
    for (i, e) in o.entries().iter().enumerate() {
        w.write_record([i.to_string(), format!("{e:.17e}")])?;
    }
    w.flush()?;
    Ok(())
}
