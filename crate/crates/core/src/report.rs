//! Per-network analysis reports, the four-regime comparison, and their
//! JSON/CSV serialisations.
//!
//! JSON reports carry `"schema": 1`. Keys appear in a fixed order and floats
//! use shortest round-trip formatting, so identical inputs give
//! byte-identical files.

use std::fmt::Write as _;
use std::fs::{File, OpenOptions};
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{DyadCensus, WeightedDigraph};
use crate::metrics::{
    all_concentration, all_reciprocity, degree_assortativity, reciprocity_distribution,
    AssortativityMode, DyadClass, HistogramBin, DEFAULT_BIN_WIDTH,
};
use crate::nullmodels::{four_regimes_with, Regime, RegimeConfig, RewireStats};

pub const REPORT_SCHEMA: u32 = 1;
pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");
pub const H_STAR_QUANTILES: [f64; 5] = [0.1, 0.25, 0.5, 0.75, 0.9];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ReportFormat {
    Json,
    Csv,
}

impl ReportFormat {
    pub fn extension(self) -> &'static str {
        match self {
            ReportFormat::Json => "json",
            ReportFormat::Csv => "csv",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportProvenance {
    pub regime: String,
    pub seed: Option<u64>,
    /// Digest of the graph the report was computed on.
    pub input_digest: String,
    pub tool_version: String,
    pub rewire: Option<RewireStats>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClassShares<T> {
    pub reciprocal: T,
    pub partially_reciprocal: T,
    pub non_reciprocal: T,
}

impl<T: Copy> ClassShares<T> {
    fn from_array(a: [T; 3]) -> Self {
        ClassShares {
            reciprocal: a[0],
            partially_reciprocal: a[1],
            non_reciprocal: a[2],
        }
    }

    pub fn get(&self, class: DyadClass) -> T {
        match class {
            DyadClass::Reciprocal => self.reciprocal,
            DyadClass::PartiallyReciprocal => self.partially_reciprocal,
            DyadClass::NonReciprocal => self.non_reciprocal,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HistogramSummary {
    pub bin_width: f64,
    pub bins: Vec<HistogramBin>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AssortativitySummary {
    pub mode: AssortativityMode,
    pub r: Option<f64>,
    pub pair_count: u64,
    /// Why `r` is missing, when it is.
    pub note: Option<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Quantile {
    pub q: f64,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConcentrationSummary {
    /// Vertices with out-degree >= 2.
    pub vertices: u64,
    pub mean: Option<f64>,
    pub quantiles: Vec<Quantile>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnalysisReport {
    pub schema: u32,
    pub provenance: ReportProvenance,
    pub vertices: u64,
    pub census: DyadCensus,
    pub class_counts: ClassShares<u64>,
    pub class_proportions: ClassShares<f64>,
    pub mean_r: Option<f64>,
    pub median_r: Option<f64>,
    pub histogram: HistogramSummary,
    pub assortativity: AssortativitySummary,
    pub h_star: ConcentrationSummary,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AnalysisOptions {
    pub bin_width: f64,
    pub assortativity_mode: AssortativityMode,
}

impl Default for AnalysisOptions {
    fn default() -> Self {
        AnalysisOptions {
            bin_width: DEFAULT_BIN_WIDTH,
            assortativity_mode: AssortativityMode::MutualBackbone,
        }
    }
}

/// Linear-interpolation quantile of sorted data.
fn quantile(sorted: &[f64], q: f64) -> f64 {
    let pos = q * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    sorted[lo] + (sorted[hi] - sorted[lo]) * (pos - lo as f64)
}

pub fn analyze(
    g: &WeightedDigraph,
    regime: &str,
    seed: Option<u64>,
    rewire: Option<RewireStats>,
    opts: &AnalysisOptions,
) -> Result<AnalysisReport> {
    let records = all_reciprocity(g);
    let hist = reciprocity_distribution(&records, opts.bin_width)?;
    let (mean_r, median_r) = if records.is_empty() {
        (None, None)
    } else {
        let mut rs: Vec<f64> = records.iter().map(|r| r.r_value).collect();
        let mean = rs.iter().sum::<f64>() / rs.len() as f64;
        rs.sort_unstable_by(f64::total_cmp);
        (Some(mean), Some(quantile(&rs, 0.5)))
    };

    let assortativity = match degree_assortativity(g, opts.assortativity_mode) {
        Ok(a) => AssortativitySummary {
            mode: opts.assortativity_mode,
            r: Some(a.r),
            pair_count: a.pair_count,
            note: None,
        },
        Err(e) if e.is_degenerate() => AssortativitySummary {
            mode: opts.assortativity_mode,
            r: None,
            pair_count: 0,
            note: Some(e.to_string()),
        },
        Err(e) => return Err(e),
    };

    let mut h: Vec<f64> = all_concentration(g).iter().map(|s| s.h_star).collect();
    let h_mean = (!h.is_empty()).then(|| h.iter().sum::<f64>() / h.len() as f64);
    h.sort_unstable_by(f64::total_cmp);
    let quantiles = if h.is_empty() {
        Vec::new()
    } else {
        H_STAR_QUANTILES
            .iter()
            .map(|&q| Quantile {
                q,
                value: quantile(&h, q),
            })
            .collect()
    };

    Ok(AnalysisReport {
        schema: REPORT_SCHEMA,
        provenance: ReportProvenance {
            regime: regime.to_string(),
            seed,
            input_digest: g.digest(),
            tool_version: TOOL_VERSION.to_string(),
            rewire,
        },
        vertices: g.vertex_count() as u64,
        census: g.dyad_census(),
        class_counts: ClassShares::from_array(hist.class_counts),
        class_proportions: ClassShares::from_array(hist.class_proportions()),
        mean_r,
        median_r,
        histogram: HistogramSummary {
            bin_width: hist.bin_width,
            bins: hist.bins,
        },
        assortativity,
        h_star: ConcentrationSummary {
            vertices: h.len() as u64,
            mean: h_mean,
            quantiles,
        },
    })
}

/// Whether mean reciprocity across the four cells follows the predicted
/// order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OrderingVerdict {
    pub mean_obs_equi: f64,
    pub mean_rw_equi: f64,
    pub mean_obs: f64,
    pub mean_rw: f64,
    /// `obs_equi < rw_equi < obs < rw`.
    pub strict_order: bool,
    /// `obs_equi < min(rw_equi, obs) <= max(rw_equi, obs) < rw`.
    pub partial_order: bool,
    /// Non-reciprocal share grows from `obs_equi` to `rw`.
    pub extreme_share_increases: bool,
    /// Reciprocal share shrinks from `obs_equi` to `rw`.
    pub reciprocal_share_decreases: bool,
    pub verdict: String,
}

impl OrderingVerdict {
    pub fn from_reports(reports: &[AnalysisReport]) -> Result<Self> {
        let find = |regime: Regime| -> Result<&AnalysisReport> {
            reports
                .iter()
                .find(|r| r.provenance.regime == regime.label())
                .ok_or_else(|| Error::Integrity(format!("no report for regime {regime}")))
        };
        let mean = |regime: Regime| -> Result<f64> {
            find(regime)?
                .mean_r
                .ok_or_else(|| Error::Degenerate(format!("regime {regime} has no mutual dyads")))
        };
        let (oe, re, o, r) = (
            mean(Regime::ObservedEquidispersed)?,
            mean(Regime::RewiredEquidispersed)?,
            mean(Regime::Observed)?,
            mean(Regime::Rewired)?,
        );
        let strict_order = oe < re && re < o && o < r;
        let partial_order = oe < re.min(o) && re.max(o) < r;
        let first = find(Regime::ObservedEquidispersed)?;
        let last = find(Regime::Rewired)?;
        let extreme_share_increases =
            first.class_proportions.non_reciprocal < last.class_proportions.non_reciprocal;
        let reciprocal_share_decreases =
            first.class_proportions.reciprocal > last.class_proportions.reciprocal;
        let verdict = if oe == re && re == o && o == r {
            "degenerate: ties"
        } else if strict_order {
            "confirmed"
        } else if partial_order {
            "partial order only"
        } else {
            "violated"
        };
        Ok(OrderingVerdict {
            mean_obs_equi: oe,
            mean_rw_equi: re,
            mean_obs: o,
            mean_rw: r,
            strict_order,
            partial_order,
            extreme_share_increases,
            reciprocal_share_decreases,
            verdict: verdict.to_string(),
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegimeComparison {
    pub schema: u32,
    pub seed: u64,
    pub swap_multiplier: u32,
    /// In [`Regime::ALL`] order.
    pub reports: Vec<AnalysisReport>,
    pub verdict: OrderingVerdict,
}

/// A comparison that stopped early, with the reports finished before the
/// failure.
#[derive(Debug, thiserror::Error)]
#[error("regime comparison failed after {} report(s): {error}", .completed.len())]
pub struct PartialComparison {
    pub completed: Vec<AnalysisReport>,
    #[source]
    pub error: Error,
}

/// Builds the four regime networks from `g` and reports on each.
pub fn run_regime_comparison(
    g: &WeightedDigraph,
    cfg: &RegimeConfig,
    opts: &AnalysisOptions,
) -> std::result::Result<RegimeComparison, PartialComparison> {
    let mut completed = Vec::with_capacity(4);
    let fail = |completed, error| PartialComparison { completed, error };
    if g.mutual_dyads().next().is_none() {
        return Err(fail(
            completed,
            Error::Degenerate("graph has no mutual dyads".into()),
        ));
    }
    let regimes = match four_regimes_with(g, cfg) {
        Ok(r) => r,
        Err(e) => {
            // the observed cell needs no construction, so report it anyway
            if let Ok(rep) = analyze(g, Regime::Observed.label(), Some(cfg.seed), None, opts) {
                completed.push(rep);
            }
            return Err(fail(completed, e));
        }
    };
    for regime in Regime::ALL {
        let rewire = regime.destroys_assortativity().then_some(regimes.rewire);
        match analyze(
            regimes.get(regime),
            regime.label(),
            Some(cfg.seed),
            rewire,
            opts,
        ) {
            Ok(rep) => completed.push(rep),
            Err(e) => return Err(fail(completed, e)),
        }
    }
    match OrderingVerdict::from_reports(&completed) {
        Ok(verdict) => Ok(RegimeComparison {
            schema: REPORT_SCHEMA,
            seed: cfg.seed,
            swap_multiplier: cfg.swap_multiplier,
            reports: completed,
            verdict,
        }),
        Err(e) => Err(fail(completed, e)),
    }
}

pub fn report_to_json(r: &AnalysisReport) -> Result<String> {
    let mut s = serde_json::to_string_pretty(r)?;
    s.push('\n');
    Ok(s)
}

pub fn report_from_json(s: &str) -> Result<AnalysisReport> {
    let r: AnalysisReport = serde_json::from_str(s)?;
    if r.schema != REPORT_SCHEMA {
        return Err(Error::Domain(format!(
            "unsupported report schema {}",
            r.schema
        )));
    }
    Ok(r)
}

fn opt<T: ToString>(v: Option<T>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

/// Key/value pairs emitted after the histogram rows in CSV output.
pub fn summary_rows(r: &AnalysisReport) -> Vec<(String, String)> {
    let mut rows = vec![
        ("schema".to_string(), r.schema.to_string()),
        ("regime".into(), r.provenance.regime.clone()),
        ("seed".into(), opt(r.provenance.seed)),
        ("input_digest".into(), r.provenance.input_digest.clone()),
        ("vertices".into(), r.vertices.to_string()),
        ("mutual".into(), r.census.mutual.to_string()),
        ("asymmetric".into(), r.census.asymmetric.to_string()),
        ("null_dyads".into(), r.census.null_dyads.to_string()),
        ("total_arcs".into(), r.census.total_arcs.to_string()),
        ("mean_r".into(), opt(r.mean_r)),
        ("median_r".into(), opt(r.median_r)),
        (
            "share_reciprocal".into(),
            r.class_proportions.reciprocal.to_string(),
        ),
        (
            "share_partially_reciprocal".into(),
            r.class_proportions.partially_reciprocal.to_string(),
        ),
        (
            "share_non_reciprocal".into(),
            r.class_proportions.non_reciprocal.to_string(),
        ),
        ("assortativity_r".into(), opt(r.assortativity.r)),
        ("h_star_vertices".into(), r.h_star.vertices.to_string()),
        ("h_star_mean".into(), opt(r.h_star.mean)),
    ];
    for q in &r.h_star.quantiles {
        rows.push((
            format!("h_star_q{}", (q.q * 100.0).round()),
            q.value.to_string(),
        ));
    }
    rows
}

/// Histogram rows `bin_low,bin_high,count` followed by
/// `summary,<key>,<value>` rows.
pub fn report_to_csv(r: &AnalysisReport) -> String {
    let mut s = String::from("bin_low,bin_high,count\n");
    for b in &r.histogram.bins {
        let _ = writeln!(s, "{},{},{}", b.low, b.high, b.count);
    }
    for (k, v) in summary_rows(r) {
        let _ = writeln!(s, "summary,{k},{v}");
    }
    s
}

pub fn render_report(r: &AnalysisReport, format: ReportFormat) -> Result<String> {
    match format {
        ReportFormat::Json => report_to_json(r),
        ReportFormat::Csv => Ok(report_to_csv(r)),
    }
}

fn write_file(path: &Path, body: &str) -> Result<()> {
    std::fs::write(path, body).map_err(|e| Error::io(path, e))
}

pub fn emit_report(r: &AnalysisReport, format: ReportFormat, path: &Path) -> Result<()> {
    write_file(path, &render_report(r, format)?)
}

/// Writes one report per regime plus `comparison.json` into `dir`.
pub fn emit_comparison(
    c: &RegimeComparison,
    format: ReportFormat,
    dir: &Path,
) -> Result<Vec<PathBuf>> {
    let mut written = Vec::new();
    for r in &c.reports {
        let p = dir.join(format!(
            "report_{}.{}",
            r.provenance.regime,
            format.extension()
        ));
        emit_report(r, format, &p)?;
        written.push(p);
    }
    let p = dir.join("comparison.json");
    #[derive(Serialize)]
    struct Summary<'a> {
        schema: u32,
        seed: u64,
        swap_multiplier: u32,
        verdict: &'a OrderingVerdict,
    }
    let mut body = serde_json::to_string_pretty(&Summary {
        schema: c.schema,
        seed: c.seed,
        swap_multiplier: c.swap_multiplier,
        verdict: &c.verdict,
    })?;
    body.push('\n');
    write_file(&p, &body)?;
    written.push(p);
    Ok(written)
}

/// Exclusive claim on an output directory, released on drop.
#[derive(Debug)]
pub struct OutputLock {
    path: PathBuf,
    _file: File,
}

impl OutputLock {
    pub const FILE_NAME: &'static str = ".dyadrec.lock";

    pub fn acquire(dir: &Path) -> Result<Self> {
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        let path = dir.join(Self::FILE_NAME);
        let mut file = OpenOptions::new()
            .write(true)
            .create_new(true)
            .open(&path)
            .map_err(|e| Error::io(&path, e))?;
        let _ = writeln!(file, "{}", std::process::id());
        Ok(OutputLock { path, _file: file })
    }
}

impl Drop for OutputLock {
    fn drop(&mut self) {
        let _ = std::fs::remove_file(&self.path);
    }
}
