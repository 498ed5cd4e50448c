//! Parameter sweeps over epsilon grids, scaling-law fits, and CSV emission.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::construction::{excess_energy, plan, regime_envelope, Regime};
use crate::error::{Error, Result};
use crate::params::ModelParams;

/// Exact CSV header emitted by sweeps.
pub const CSV_HEADER: &str = "model,n,eps,a,ell,regime,K,w1,excess,envelope,ratio";

/// Geometric epsilon grid, traversed in decreasing order.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct EpsGrid {
    pub start: f64,
    pub stop: f64,
    pub points: usize,
}

impl EpsGrid {
    pub fn new(start: f64, stop: f64, points: usize) -> Result<Self> {
        if !(start > 0.0 && stop > 0.0) || points == 0 {
            return Err(Error::InvalidParameter(
                "grid needs positive endpoints and points".into(),
            ));
        }
        Ok(EpsGrid {
            start,
            stop,
            points,
        })
    }

    /// Grid values, strictly decreasing.
    pub fn values(&self) -> Vec<f64> {
        let hi = self.start.max(self.stop);
        let lo = self.start.min(self.stop);
        if self.points == 1 {
            return vec![hi];
        }
        let ratio = (lo / hi).ln() / (self.points as f64 - 1.0);
        (0..self.points)
            .map(|i| hi * (ratio * i as f64).exp())
            .collect()
    }
}

/// A sweep: one model, one dimension, a list of `a` values (ignored for
/// branched transport), and a geometric epsilon grid.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SweepConfig {
    /// "up" or "bt".
    pub model: String,
    pub n: usize,
    pub ell: f64,
    #[serde(default)]
    pub a: Vec<f64>,
    pub grid: EpsGrid,
    #[serde(default)]
    pub regime: Option<Regime>,
    #[serde(default)]
    pub seed: u64,
}

/// One evaluated sweep point.
#[derive(Debug, Clone, Serialize)]
pub struct SweepRow {
    pub model: String,
    pub n: usize,
    pub eps: f64,
    /// Off-network cost for urban planning; 0 for branched transport, where
    /// the column is meaningless.
    pub a: f64,
    pub ell: f64,
    pub regime: &'static str,
    pub k: u32,
    pub w1: f64,
    pub excess: f64,
    pub envelope: f64,
    pub ratio: f64,
}

/// A sweep point skipped for inadmissibility, with the violated condition.
#[derive(Debug, Clone, Serialize)]
pub struct SkippedPoint {
    pub eps: f64,
    pub a: f64,
    pub reason: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum FitLaw {
    /// `log excess` against `log eps` (2D and n > 3 urban planning).
    PowerLaw,
    /// `excess` against `eps |log eps|`, intercept forced to zero
    /// (branched transport).
    PowerTimesLog,
    /// `excess / sqrt(eps)` against `|log eps|` (3D urban planning).
    SqrtTimesLog,
}

/// Least-squares fit summary. Logarithms are natural throughout; power-law
/// exponents are base-invariant.
#[derive(Debug, Clone, Serialize)]
pub struct FitResult {
    pub law: FitLaw,
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
    pub residual_max: f64,
    pub points: usize,
    /// (min, max) of `excess / (eps |log eps|)` for the branched transport law.
    pub ratio_band: Option<(f64, f64)>,
}

/// Fit attached to one `a` value of the sweep.
#[derive(Debug, Clone, Serialize)]
pub struct FitSummary {
    pub a: f64,
    pub fit: Option<FitResult>,
    pub notice: Option<String>,
}

#[derive(Debug, Clone, Serialize)]
pub struct SweepOutcome {
    pub rows: Vec<SweepRow>,
    pub skipped: Vec<SkippedPoint>,
    pub fits: Vec<FitSummary>,
    /// Logarithm convention used by envelopes and fits.
    pub log_convention: &'static str,
}

fn point_params(cfg: &SweepConfig, eps: f64, a: f64) -> Result<ModelParams> {
    match cfg.model.as_str() {
        "up" => ModelParams::urban_planning(eps, a, cfg.n, cfg.ell),
        "bt" => ModelParams::branched_transport(eps, cfg.n, cfg.ell),
        other => Err(Error::InvalidParameter(format!("unknown model '{other}'"))),
    }
}

/// Run the sweep. Points are independent and evaluated in parallel; the
/// output ordering (grouped by `a` in input order, epsilon decreasing) and
/// every emitted value are identical to a serial run.
pub fn run_sweep(cfg: &SweepConfig) -> Result<SweepOutcome> {
    run_sweep_inner(cfg, true)
}

/// Serial twin of [`run_sweep`], kept for determinism checks.
pub fn run_sweep_serial(cfg: &SweepConfig) -> Result<SweepOutcome> {
    run_sweep_inner(cfg, false)
}

fn run_sweep_inner(cfg: &SweepConfig, parallel: bool) -> Result<SweepOutcome> {
    if cfg.model != "up" && cfg.model != "bt" {
        return Err(Error::InvalidParameter(format!(
            "unknown model '{}'",
            cfg.model
        )));
    }
    if cfg.model == "up" && cfg.a.is_empty() {
        return Err(Error::InvalidParameter(
            "urban planning sweep needs at least one a".into(),
        ));
    }
    let a_values: Vec<f64> = if cfg.model == "bt" {
        vec![0.0]
    } else {
        cfg.a.clone()
    };
    let eps_values = cfg.grid.values();
    let tasks: Vec<(f64, f64)> = a_values
        .iter()
        .flat_map(|&a| eps_values.iter().map(move |&eps| (a, eps)))
        .collect();

    let eval = |&(a, eps): &(f64, f64)| -> std::result::Result<SweepRow, SkippedPoint> {
        let params = point_params(cfg, eps, a).map_err(|e| SkippedPoint {
            eps,
            a,
            reason: e.to_string(),
        })?;
        let plan = plan(&params, cfg.regime).map_err(|e| SkippedPoint {
            eps,
            a,
            reason: e.to_string(),
        })?;
        let report = excess_energy(&plan);
        let envelope = regime_envelope(&params);
        Ok(SweepRow {
            model: cfg.model.clone(),
            n: cfg.n,
            eps,
            a,
            ell: cfg.ell,
            regime: plan.regime.tag(),
            k: plan.k,
            w1: plan.w1,
            excess: report.excess,
            envelope,
            ratio: report.excess / envelope,
        })
    };

    let results: Vec<std::result::Result<SweepRow, SkippedPoint>> = if parallel {
        tasks.par_iter().map(eval).collect()
    } else {
        tasks.iter().map(eval).collect()
    };

    let mut rows = Vec::new();
    let mut skipped = Vec::new();
    for r in results {
        match r {
            Ok(row) => rows.push(row),
            Err(s) => skipped.push(s),
        }
    }

    let mut fits = Vec::new();
    for &a in &a_values {
        let group: Vec<&SweepRow> = rows.iter().filter(|r| r.a == a).collect();
        fits.push(fit_group(cfg, a, &group));
    }

    Ok(SweepOutcome {
        rows,
        skipped,
        fits,
        log_convention: "natural",
    })
}

fn fit_group(cfg: &SweepConfig, a: f64, rows: &[&SweepRow]) -> FitSummary {
    if rows.len() < 4 {
        return FitSummary {
            a,
            fit: None,
            notice: Some(format!(
                "fit skipped: {} admissible points, need at least 4",
                rows.len()
            )),
        };
    }
    let law = match (cfg.model.as_str(), cfg.n) {
        ("bt", _) => FitLaw::PowerTimesLog,
        ("up", 3) => FitLaw::SqrtTimesLog,
        _ => FitLaw::PowerLaw,
    };
    let fit = match law {
        FitLaw::PowerLaw => {
            let pts: Vec<(f64, f64)> = rows.iter().map(|r| (r.eps.ln(), r.excess.ln())).collect();
            least_squares(law, &pts)
        }
        FitLaw::SqrtTimesLog => {
            let pts: Vec<(f64, f64)> = rows
                .iter()
                .map(|r| (r.eps.ln().abs(), r.excess / r.eps.sqrt()))
                .collect();
            least_squares(law, &pts)
        }
        FitLaw::PowerTimesLog => {
            let pts: Vec<(f64, f64)> = rows
                .iter()
                .map(|r| (r.eps * r.eps.ln().abs(), r.excess))
                .collect();
            through_origin(law, &pts)
        }
    };
    FitSummary {
        a,
        fit: Some(fit),
        notice: None,
    }
}

fn least_squares(law: FitLaw, pts: &[(f64, f64)]) -> FitResult {
    let n = pts.len() as f64;
    let sx: f64 = pts.iter().map(|p| p.0).sum();
    let sy: f64 = pts.iter().map(|p| p.1).sum();
    let sxx: f64 = pts.iter().map(|p| p.0 * p.0).sum();
    let sxy: f64 = pts.iter().map(|p| p.0 * p.1).sum();
    let slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
    let intercept = (sy - slope * sx) / n;
    let mean = sy / n;
    let ss_tot: f64 = pts.iter().map(|p| (p.1 - mean) * (p.1 - mean)).sum();
    let residuals: Vec<f64> = pts.iter().map(|p| p.1 - slope * p.0 - intercept).collect();
    let ss_res: f64 = residuals.iter().map(|r| r * r).sum();
    FitResult {
        law,
        slope,
        intercept,
        r_squared: (1.0 - ss_res / ss_tot).clamp(0.0, 1.0),
        residual_max: residuals.iter().fold(0.0f64, |m, r| m.max(r.abs())),
        points: pts.len(),
        ratio_band: None,
    }
}

fn through_origin(law: FitLaw, pts: &[(f64, f64)]) -> FitResult {
    let sxx: f64 = pts.iter().map(|p| p.0 * p.0).sum();
    let sxy: f64 = pts.iter().map(|p| p.0 * p.1).sum();
    let slope = sxy / sxx;
    let mean: f64 = pts.iter().map(|p| p.1).sum::<f64>() / pts.len() as f64;
    let ss_tot: f64 = pts.iter().map(|p| (p.1 - mean) * (p.1 - mean)).sum();
    let residuals: Vec<f64> = pts.iter().map(|p| p.1 - slope * p.0).collect();
    let ss_res: f64 = residuals.iter().map(|r| r * r).sum();
    let band = pts
        .iter()
        .map(|p| p.1 / p.0)
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), r| {
            (lo.min(r), hi.max(r))
        });
    FitResult {
        law,
        slope,
        intercept: 0.0,
        // forcing the origin can push the raw statistic below zero on a bad
        // fit; the reported value stays in [0, 1]
        r_squared: (1.0 - ss_res / ss_tot).clamp(0.0, 1.0),
        residual_max: residuals.iter().fold(0.0f64, |m, r| m.max(r.abs())),
        points: pts.len(),
        ratio_band: Some(band),
    }
}

/// Scientific notation with 17 significant digits, enough to round-trip f64.
pub fn fmt_sci17(x: f64) -> String {
    format!("{x:.16e}")
}

/// Render rows as CSV with the exact [`CSV_HEADER`] schema.
pub fn rows_to_csv(rows: &[SweepRow]) -> String {
    let mut out = String::from(CSV_HEADER);
    out.push('\n');
    for r in rows {
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{},{},{},{}\n",
            r.model,
            r.n,
            fmt_sci17(r.eps),
            fmt_sci17(r.a),
            fmt_sci17(r.ell),
            r.regime,
            r.k,
            fmt_sci17(r.w1),
            fmt_sci17(r.excess),
            fmt_sci17(r.envelope),
            fmt_sci17(r.ratio),
        ));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn up2d_config() -> SweepConfig {
        SweepConfig {
            model: "up".into(),
            n: 2,
            ell: 1.0,
            a: vec![2.0],
            grid: EpsGrid::new(1e-3, 1e-7, 17).unwrap(),
            regime: None,
            seed: 0,
        }
    }

    #[test]
    fn grid_is_decreasing_geometric() {
        let g = EpsGrid::new(1e-7, 1e-3, 17).unwrap();
        let v = g.values();
        assert_eq!(v.len(), 17);
        assert!((v[0] - 1e-3).abs() < 1e-18);
        assert!((v[16] - 1e-7).abs() < 1e-21);
        for pair in v.windows(2) {
            assert!(pair[1] < pair[0]);
            let r = pair[1] / pair[0];
            assert!((r - v[1] / v[0]).abs() < 1e-12);
        }
    }

    #[test]
    fn parallel_matches_serial() {
        let cfg = up2d_config();
        let par = run_sweep(&cfg).unwrap();
        let ser = run_sweep_serial(&cfg).unwrap();
        assert_eq!(rows_to_csv(&par.rows), rows_to_csv(&ser.rows));
        assert_eq!(
            serde_json::to_string(&par.fits).unwrap(),
            serde_json::to_string(&ser.fits).unwrap()
        );
    }

    #[test]
    fn csv_ratio_column_consistent() {
        let cfg = up2d_config();
        let out = run_sweep(&cfg).unwrap();
        let csv = rows_to_csv(&out.rows);
        let mut lines = csv.lines();
        assert_eq!(lines.next().unwrap(), CSV_HEADER);
        for line in lines {
            let cols: Vec<&str> = line.split(',').collect();
            assert_eq!(cols.len(), 11);
            let excess: f64 = cols[8].parse().unwrap();
            let envelope: f64 = cols[9].parse().unwrap();
            let ratio: f64 = cols[10].parse().unwrap();
            assert!((ratio - excess / envelope).abs() <= 1e-12 * ratio.abs());
        }
    }

    #[test]
    fn inadmissible_points_are_skipped_not_fatal() {
        let mut cfg = up2d_config();
        cfg.grid = EpsGrid::new(10.0, 1e-4, 5).unwrap(); // top points exceed eps < 1
        let out = run_sweep(&cfg).unwrap();
        assert!(!out.skipped.is_empty());
        assert!(!out.rows.is_empty());
        assert!(out
            .skipped
            .iter()
            .all(|s| s.reason.contains("min{1, ell^3}") || s.reason.contains("epsilon")));
    }

    #[test]
    fn small_grid_skips_fit() {
        let mut cfg = up2d_config();
        cfg.grid = EpsGrid::new(1e-3, 1e-4, 3).unwrap();
        let out = run_sweep(&cfg).unwrap();
        assert!(out.fits[0].fit.is_none());
        assert!(out.fits[0]
            .notice
            .as_ref()
            .unwrap()
            .contains("need at least 4"));
    }
}
