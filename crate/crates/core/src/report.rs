//! Deterministic CSV writers for fits, intervals, and experiment reports.
//!
//! Rows are emitted in a fixed order and floats use the shortest
//! round-trip decimal form, so a run writes byte-identical files however it
//! was scheduled. Infinite endpoints appear as `inf`/`-inf`.

use std::path::{Path, PathBuf};

use crate::bootstrap::empirical_quantile;
use crate::error::Result;
use crate::interval::IntervalSet;
use crate::sim::{
    BiasReport, CorrPairReport, CoverageReport, ExactConjugateReport, HeatmapReport,
    RidgeCompareReport, StabilityReport,
};

fn open(path: &Path) -> Result<csv::Writer<std::fs::File>> {
    csv::Writer::from_path(path).map_err(Into::into)
}

fn f(v: f64) -> String {
    v.to_string()
}

/// Write per-coordinate intervals: one row per variable.
pub fn write_interval_csv(
    path: &Path,
    names: &[String],
    set: &IntervalSet,
) -> Result<()> {
    let mut w = open(path)?;
    w.write_record([
        "variable",
        "lasso_estimate",
        "beta_tilde",
        "lower",
        "upper",
        "selected",
        "n_tilde",
    ])?;
    for e in &set.entries {
        w.write_record([
            names[e.index].as_str(),
            &f(e.lasso_estimate),
            &f(e.beta_tilde),
            &f(e.lower),
            &f(e.upper),
            if e.selected { "true" } else { "false" },
            &f(e.n_tilde),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// Write point-estimate output: one row per variable.
pub fn write_fit_csv(
    path: &Path,
    names: &[String],
    coefficients: &[f64],
    intercept: f64,
    lambda: f64,
) -> Result<()> {
    let mut w = open(path)?;
    w.write_record(["variable", "coefficient", "selected", "lambda"])?;
    w.write_record(["(intercept)", &f(intercept), "", &f(lambda)])?;
    for (name, &c) in names.iter().zip(coefficients) {
        w.write_record([
            name.as_str(),
            &f(c),
            if c != 0.0 { "true" } else { "false" },
            &f(lambda),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// Write a coverage experiment: summary, per-bin table, and (optionally) one
/// row per (replication, variable).
pub fn write_coverage(
    dir: &Path,
    rep: &CoverageReport,
    detail: bool,
) -> Result<Vec<PathBuf>> {
    let mut out = Vec::new();

    let mut lambdas = rep.lambdas.clone();
    lambdas.sort_by(|a, b| a.partial_cmp(b).expect("NaN penalty"));
    let path = dir.join("coverage_summary.csv");
    let mut w = open(&path)?;
    w.write_record([
        "level",
        "reps_requested",
        "reps_done",
        "failures",
        "p",
        "average_coverage",
        "mc_se",
        "median_width",
        "infinite_widths",
        "lambda_median",
        "lambda_q125",
        "lambda_q875",
    ])?;
    w.write_record([
        f(rep.level),
        rep.reps_requested.to_string(),
        rep.reps_done.to_string(),
        rep.failures.to_string(),
        rep.p.to_string(),
        f(rep.average_coverage),
        f(rep.mc_se),
        f(rep.median_width),
        rep.infinite_widths.to_string(),
        f(empirical_quantile(&lambdas, 0.5)),
        f(empirical_quantile(&lambdas, 0.125)),
        f(empirical_quantile(&lambdas, 0.875)),
    ])?;
    w.flush()?;
    out.push(path);

    let path = dir.join("coverage_bins.csv");
    let mut w = open(&path)?;
    w.write_record([
        "bin",
        "abs_beta_lo",
        "abs_beta_hi",
        "mean_abs_beta",
        "members",
        "coverage",
        "se",
    ])?;
    for (i, b) in rep.bins.iter().enumerate() {
        w.write_record([
            i.to_string(),
            f(b.lo),
            f(b.hi),
            f(b.mean_abs_beta),
            b.members.to_string(),
            f(b.coverage),
            f(b.se),
        ])?;
    }
    w.flush()?;
    out.push(path);

    if detail {
        let path = dir.join("coverage_detail.csv");
        let mut w = open(&path)?;
        w.write_record([
            "rep", "variable", "beta_true", "lower", "upper", "covered", "selected",
        ])?;
        for d in &rep.detail {
            w.write_record([
                d.rep.to_string(),
                d.variable.to_string(),
                f(d.beta_true),
                f(d.lower),
                f(d.upper),
                (d.covered as u8).to_string(),
                (d.selected as u8).to_string(),
            ])?;
        }
        w.flush()?;
        out.push(path);
    }
    Ok(out)
}

/// Write a penalty-sweep experiment: the bin × penalty table plus a
/// per-penalty summary with the cross-validated penalty's location.
pub fn write_heatmap(dir: &Path, rep: &HeatmapReport) -> Result<Vec<PathBuf>> {
    let mut out = Vec::new();

    let path = dir.join("heatmap.csv");
    let mut w = open(&path)?;
    w.write_record([
        "bin",
        "abs_beta_lo",
        "abs_beta_hi",
        "grid_index",
        "mean_log10_lambda",
        "relative_coverage",
    ])?;
    for (b, bin) in rep.bins.iter().enumerate() {
        for g in 0..rep.grid_size {
            w.write_record([
                b.to_string(),
                f(bin.lo),
                f(bin.hi),
                g.to_string(),
                f(rep.mean_log10_lambda[g]),
                f(rep.rel_coverage[(b, g)]),
            ])?;
        }
    }
    w.flush()?;
    out.push(path);

    let path = dir.join("heatmap_summary.csv");
    let mut w = open(&path)?;
    w.write_record(["grid_index", "mean_log10_lambda", "avg_relative_coverage"])?;
    for g in 0..rep.grid_size {
        w.write_record([
            g.to_string(),
            f(rep.mean_log10_lambda[g]),
            f(rep.avg_rel_coverage[g]),
        ])?;
    }
    w.flush()?;
    out.push(path);

    let path = dir.join("heatmap_meta.csv");
    let mut w = open(&path)?;
    w.write_record([
        "level",
        "reps_done",
        "failures",
        "grid_size",
        "lambda_cv_median",
        "lambda_cv_q125",
        "lambda_cv_q875",
    ])?;
    w.write_record([
        f(rep.level),
        rep.reps_done.to_string(),
        rep.failures.to_string(),
        rep.grid_size.to_string(),
        f(rep.lambda_cv_median),
        f(rep.lambda_cv_lo),
        f(rep.lambda_cv_hi),
    ])?;
    w.flush()?;
    out.push(path);
    Ok(out)
}

/// Write the correlated-pair contrast: raw records, per-group summary, and
/// the example replication snapshot.
pub fn write_corr_pair(dir: &Path, rep: &CorrPairReport) -> Result<Vec<PathBuf>> {
    let mut out = Vec::new();

    let path = dir.join("corr_pair.csv");
    let mut w = open(&path)?;
    w.write_record([
        "rep", "method", "variable", "lower", "upper", "midpoint", "width", "covered",
    ])?;
    for r in &rep.records {
        w.write_record([
            r.rep.to_string(),
            r.method.to_string(),
            r.variable.to_string(),
            f(r.lower),
            f(r.upper),
            f(r.midpoint),
            f(r.width),
            (r.covered as u8).to_string(),
        ])?;
    }
    w.flush()?;
    out.push(path);

    let path = dir.join("corr_pair_summary.csv");
    let mut w = open(&path)?;
    w.write_record([
        "method",
        "variable",
        "mean_midpoint",
        "mean_width",
        "coverage",
        "reps",
    ])?;
    for method in ["ridge", "rlp"] {
        for variable in ["A", "B", "N1"] {
            let rows: Vec<_> = rep
                .records
                .iter()
                .filter(|r| r.method == method && r.variable == variable)
                .collect();
            let k = rows.len().max(1) as f64;
            let mid = rows.iter().map(|r| r.midpoint).sum::<f64>() / k;
            let width = rows.iter().map(|r| r.width).sum::<f64>() / k;
            let cov = rows.iter().filter(|r| r.covered).count() as f64 / k;
            w.write_record([
                method.to_string(),
                variable.to_string(),
                f(mid),
                f(width),
                f(cov),
                rows.len().to_string(),
            ])?;
        }
    }
    w.flush()?;
    out.push(path);

    let path = dir.join("corr_pair_example.csv");
    let mut w = open(&path)?;
    w.write_record(["method", "variable", "truth", "center", "lower", "upper"])?;
    for e in &rep.example {
        w.write_record([
            e.method.to_string(),
            e.variable.to_string(),
            f(e.truth),
            f(e.center),
            f(e.lower),
            f(e.upper),
        ])?;
    }
    w.flush()?;
    out.push(path);
    Ok(out)
}

/// Write the posterior-versus-bootstrap dimension sweep: one row per cell.
pub fn write_ridge_compare(dir: &Path, rep: &RidgeCompareReport) -> Result<Vec<PathBuf>> {
    let path = dir.join("ridge_compare.csv");
    let mut w = open(&path)?;
    w.write_record([
        "p",
        "n",
        "lambda",
        "sigma2",
        "tau2",
        "level",
        "boot_replicates",
        "reps_done",
        "failures",
        "posterior_coverage",
        "posterior_se",
        "bootstrap_coverage",
        "bootstrap_se",
    ])?;
    for c in &rep.cells {
        w.write_record([
            c.p.to_string(),
            rep.n.to_string(),
            f(rep.lambda),
            f(rep.sigma2),
            f(rep.tau2),
            f(rep.level),
            rep.boot_replicates.to_string(),
            c.reps_done.to_string(),
            c.failures.to_string(),
            f(c.posterior_coverage),
            f(c.posterior_se),
            f(c.bootstrap_coverage),
            f(c.bootstrap_se),
        ])?;
    }
    w.flush()?;
    Ok(vec![path])
}

/// Write the bias decomposition: one row per (replication, source) plus
/// source-level means.
pub fn write_bias(dir: &Path, rep: &BiasReport) -> Result<Vec<PathBuf>> {
    let mut out = Vec::new();

    let path = dir.join("bias_decomposition.csv");
    let mut w = open(&path)?;
    w.write_record([
        "rep",
        "source",
        "irreducible",
        "from_b",
        "from_n",
        "penalty",
        "total",
        "identity_gap",
    ])?;
    for r in &rep.records {
        w.write_record([
            r.rep.to_string(),
            r.source.to_string(),
            f(r.irreducible),
            f(r.from_b),
            f(r.from_n),
            f(r.penalty),
            f(r.total),
            f(r.identity_gap()),
        ])?;
    }
    w.flush()?;
    out.push(path);

    let path = dir.join("bias_summary.csv");
    let mut w = open(&path)?;
    w.write_record([
        "source",
        "mean_irreducible",
        "mean_from_b",
        "mean_from_n",
        "mean_penalty",
        "mean_total",
        "mean_abs_from_b",
        "mean_abs_from_n",
        "reps_done",
        "excluded_original",
        "mean_boot_excluded",
        "boot_replicates",
    ])?;
    for source in ["original", "bootstrap_mean"] {
        let rows: Vec<_> = rep.records.iter().filter(|r| r.source == source).collect();
        let k = rows.len().max(1) as f64;
        let m = |pick: fn(&&crate::sim::BiasRecord) -> f64| -> f64 {
            rows.iter().map(pick).sum::<f64>() / k
        };
        w.write_record([
            source.to_string(),
            f(m(|r| r.irreducible)),
            f(m(|r| r.from_b)),
            f(m(|r| r.from_n)),
            f(m(|r| r.penalty)),
            f(m(|r| r.total)),
            f(m(|r| r.from_b.abs())),
            f(m(|r| r.from_n.abs())),
            rep.reps_done.to_string(),
            rep.excluded_original.to_string(),
            f(rep.mean_boot_excluded),
            rep.boot_replicates.to_string(),
        ])?;
    }
    w.flush()?;
    out.push(path);
    Ok(out)
}

/// Write selection stability: per-variable original and bootstrap selection
/// rates.
pub fn write_stability(dir: &Path, rep: &StabilityReport) -> Result<Vec<PathBuf>> {
    let mut out = Vec::new();

    let path = dir.join("stability.csv");
    let mut w = open(&path)?;
    w.write_record(["variable", "original_rate", "bootstrap_rate"])?;
    for j in 0..rep.a_bar.len() {
        w.write_record([
            j.to_string(),
            f(rep.a_bar[j]),
            f(rep.a_star_bar[j]),
        ])?;
    }
    w.flush()?;
    out.push(path);

    let path = dir.join("stability_meta.csv");
    let mut w = open(&path)?;
    w.write_record(["reps_done", "failures", "boot_replicates", "dropped_total"])?;
    w.write_record([
        rep.reps_done.to_string(),
        rep.failures.to_string(),
        rep.boot_replicates.to_string(),
        rep.dropped_total.to_string(),
    ])?;
    w.flush()?;
    out.push(path);
    Ok(out)
}

/// Write the exact scalar conjugate check: the coverage curve and its
/// prior-weighted average.
pub fn write_exact_conjugate(dir: &Path, rep: &ExactConjugateReport) -> Result<Vec<PathBuf>> {
    let mut out = Vec::new();

    let path = dir.join("exact_conjugate.csv");
    let mut w = open(&path)?;
    w.write_record(["theta", "coverage"])?;
    for &(t, c) in &rep.curve {
        w.write_record([f(t), f(c)])?;
    }
    w.flush()?;
    out.push(path);

    let path = dir.join("exact_conjugate_summary.csv");
    let mut w = open(&path)?;
    w.write_record(["level", "tau2", "sigma2", "average_coverage"])?;
    w.write_record([f(rep.level), f(rep.tau2), f(rep.sigma2), f(rep.average)])?;
    w.flush()?;
    out.push(path);
    Ok(out)
}
