//! CSV datasets behind each published plot.

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::evolve::{
    dephase_propagate, initial_ground, propagate, Backend, DensityMatrix, ScanTrace, SweepConfig,
    DEFAULT_B0, DEFAULT_FIELD_STEP,
};
use crate::format::sig12;
use crate::kzm::{
    run_scaling_sweep, ScalingFit, ScalingSweep, DF_SAMPLE_FIELD, EXPERIMENTAL_FIELDS,
    EXPERIMENTAL_RATES, EXPERIMENTAL_T2, IDEAL_B0,
};
use crate::model::{relaxation_time, triplet_spectrum, ModelParams};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Figure {
    Fig1a,
    Fig1b,
    Fig1c,
    Fig3,
    Fig4,
    Fig5,
}

impl Figure {
    pub const ALL: [Figure; 6] = [
        Figure::Fig1a,
        Figure::Fig1b,
        Figure::Fig1c,
        Figure::Fig3,
        Figure::Fig4,
        Figure::Fig5,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Figure::Fig1a => "fig1a",
            Figure::Fig1b => "fig1b",
            Figure::Fig1c => "fig1c",
            Figure::Fig3 => "fig3",
            Figure::Fig4 => "fig4",
            Figure::Fig5 => "fig5",
        }
    }
}

impl fmt::Display for Figure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Figure {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Figure::ALL
            .into_iter()
            .find(|f| f.name() == s)
            .ok_or_else(|| Error::UnknownFigure(s.to_string()))
    }
}

/// A table with `#` comment lines naming the parameter set.
#[derive(Clone, Debug, PartialEq)]
pub struct Dataset {
    pub figure: Figure,
    pub comments: Vec<String>,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Dataset {
    fn new(figure: Figure, columns: &[&str]) -> Self {
        Self {
            figure,
            comments: Vec::new(),
            columns: columns.iter().map(|c| c.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    fn comment(&mut self, line: impl Into<String>) {
        self.comments.push(line.into());
    }

    fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    /// Index of a named column.
    pub fn column(&self, name: &str) -> Option<usize> {
        self.columns.iter().position(|c| c == name)
    }

    /// Values of a numeric column, parsed back from text.
    pub fn numeric(&self, name: &str) -> Option<Vec<f64>> {
        let i = self.column(name)?;
        self.rows.iter().map(|r| r[i].parse().ok()).collect()
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        for c in &self.comments {
            out.push_str("# ");
            out.push_str(c);
            out.push('\n');
        }
        out.push_str(&self.columns.join(","));
        out.push('\n');
        for r in &self.rows {
            out.push_str(&r.join(","));
            out.push('\n');
        }
        out
    }
}

const LEVEL_BX: f64 = 0.1;
const LEVEL_RANGE: (f64, f64) = (-2.0, 2.0);
const LEVEL_POINTS: usize = 401;
/// Field spacing at which continuous-model traces are recorded.
const TRACE_FIELD_STEP: f64 = 0.01;
const FIG1C_RATES: [(f64, &str); 2] = [(1.0, "1"), (0.05, "1/20")];
const FIG5_FIELDS: [f64; 2] = [0.1, 0.2];
const FIG5_RATES: [(f64, &str); 3] = [(1.0, "1"), (0.1, "1/10"), (1.0 / 30.0, "1/30")];
const RATE_LABELS: [&str; 4] = ["1", "1/2", "1/3", "1/4"];

fn level_fields() -> impl Iterator<Item = f64> {
    let (lo, hi) = LEVEL_RANGE;
    (0..LEVEL_POINTS).map(move |i| lo + (hi - lo) * i as f64 / (LEVEL_POINTS - 1) as f64)
}

fn fig1a() -> Result<Dataset> {
    let mut d = Dataset::new(Figure::Fig1a, &["bz", "e0", "e1", "e2"]);
    d.comment(format!(
        "fig1a: triplet energy levels, bx={}, bz in [{}, {}], {} points",
        LEVEL_BX, LEVEL_RANGE.0, LEVEL_RANGE.1, LEVEL_POINTS
    ));
    for bz in level_fields() {
        let s = triplet_spectrum(ModelParams::new(LEVEL_BX, bz)?);
        let mut row = vec![sig12(bz)];
        row.extend(s.eigenvalues.iter().map(|e| sig12(*e)));
        d.push(row);
    }
    Ok(d)
}

fn fig1b() -> Result<Dataset> {
    let mut d = Dataset::new(Figure::Fig1b, &["bz", "gap", "tau"]);
    d.comment(format!(
        "fig1b: relaxation time 1/gap, bx={}, bz in [{}, {}], {} points",
        LEVEL_BX, LEVEL_RANGE.0, LEVEL_RANGE.1, LEVEL_POINTS
    ));
    for bz in level_fields() {
        let p = ModelParams::new(LEVEL_BX, bz)?;
        let s = triplet_spectrum(p);
        d.push(vec![sig12(bz), sig12(s.gap), sig12(relaxation_time(p)?)]);
    }
    Ok(d)
}

fn continuous_trace(bx: f64, k: f64, b0: f64, bz_end: f64) -> Result<ScanTrace> {
    let cfg = SweepConfig::new(bx, k, b0, bz_end, TRACE_FIELD_STEP, Backend::Reference)?;
    propagate(&cfg, &initial_ground(&cfg)?)
}

fn push_trace(d: &mut Dataset, bx: f64, k_label: &str, series: Option<&str>, trace: &ScanTrace) {
    for p in &trace.points {
        let mut row = Vec::with_capacity(d.columns.len());
        if let Some(s) = series {
            row.push(s.to_string());
        }
        row.push(sig12(bx));
        row.push(k_label.to_string());
        row.extend(ScanTrace::csv_row(p).split(',').map(str::to_string));
        d.push(row);
    }
}

const TRACE_COLUMNS: [&str; 8] = ["t", "bz", "defect", "overlap", "a0", "a1", "a2", "concurrence"];

fn columns_with(prefix: &[&'static str]) -> Vec<&'static str> {
    prefix.iter().copied().chain(TRACE_COLUMNS).collect()
}

fn fig1c() -> Result<Dataset> {
    let mut d = Dataset::new(Figure::Fig1c, &columns_with(&["bx", "k"]));
    d.comment(format!(
        "fig1c: eigenpopulations, bx={}, k in {{1, 1/20}}, b0={}, bz_end={}, reference backend",
        LEVEL_BX, IDEAL_B0, LEVEL_RANGE.1
    ));
    let traces = FIG1C_RATES
        .par_iter()
        .map(|(k, _)| continuous_trace(LEVEL_BX, *k, IDEAL_B0, LEVEL_RANGE.1))
        .collect::<Result<Vec<_>>>()?;
    for ((_, label), trace) in FIG1C_RATES.iter().zip(&traces) {
        push_trace(&mut d, LEVEL_BX, label, None, trace);
    }
    Ok(d)
}

fn fig3() -> Result<Dataset> {
    let mut d = Dataset::new(Figure::Fig3, &columns_with(&["series", "bx", "k"]));
    d.comment(format!(
        "fig3: defect density, bx in {{0.1, 0.2}}, k in {{1, 1/2, 1/3, 1/4}}, b0={}, bz_end={}",
        DEFAULT_B0, DF_SAMPLE_FIELD
    ));
    d.comment(format!(
        "fig3: series ideal = reference backend recorded every {TRACE_FIELD_STEP}; \
         trotter = {DEFAULT_FIELD_STEP} field steps, delta = {DEFAULT_FIELD_STEP}/k; \
         trotter_t2 = trotter with T2 = ({} s, {} s) at k=1/4",
        EXPERIMENTAL_T2.0, EXPERIMENTAL_T2.1
    ));
    let mut jobs = Vec::new();
    for &bx in &EXPERIMENTAL_FIELDS {
        for (i, &k) in EXPERIMENTAL_RATES.iter().enumerate() {
            jobs.push(("ideal", bx, i, k));
            jobs.push(("trotter", bx, i, k));
            if i == EXPERIMENTAL_RATES.len() - 1 {
                jobs.push(("trotter_t2", bx, i, k));
            }
        }
    }
    let traces = jobs
        .par_iter()
        .map(|&(series, bx, _, k)| match series {
            "ideal" => continuous_trace(bx, k, DEFAULT_B0, DF_SAMPLE_FIELD),
            _ => {
                let mut cfg = SweepConfig::experimental(bx, k, Backend::Trotter)?;
                if series == "trotter_t2" {
                    cfg = cfg.with_t2(EXPERIMENTAL_T2.0, EXPERIMENTAL_T2.1)?;
                    dephase_propagate(&cfg, &DensityMatrix::pure(&initial_ground(&cfg)?))
                } else {
                    propagate(&cfg, &initial_ground(&cfg)?)
                }
            }
        })
        .collect::<Result<Vec<_>>>()?;
    for (&(series, bx, i, _), trace) in jobs.iter().zip(&traces) {
        push_trace(&mut d, bx, RATE_LABELS[i], Some(series), trace);
    }
    Ok(d)
}

fn push_fit(d: &mut Dataset, series: &str, fit: &ScalingFit) {
    d.comment(format!(
        "fig4: {series}: alpha_hat={} r={} n={}",
        sig12(fit.alpha_hat),
        sig12(fit.r),
        fit.points.len()
    ));
    for p in &fit.points {
        d.push(vec![
            series.to_string(),
            sig12(p.bx),
            sig12(p.k),
            sig12(p.x),
            sig12(p.d_f),
            sig12(p.d_f.ln()),
        ]);
    }
}

fn fig4() -> Result<Dataset> {
    let mut d = Dataset::new(Figure::Fig4, &["series", "bx", "k", "x", "d_f", "ln_d_f"]);
    d.comment(format!(
        "fig4: D_f at bz={DF_SAMPLE_FIELD} vs x = tau_Q/tau_0 = 4 bx^2/k; \
         ideal = reference backend, b0={IDEAL_B0}, 12 log-spaced k in [1/4, 1]; \
         experimental = trotter backend, b0={DEFAULT_B0}, k in {{1, 1/2, 1/3, 1/4}}"
    ));
    let sweeps = [
        ("ideal_bx0.1", ScalingSweep::ideal(0.1)),
        ("ideal_bx0.2", ScalingSweep::ideal(0.2)),
        ("experimental", ScalingSweep::experimental()),
        ("experimental_t2", ScalingSweep::experimental().with_t2(EXPERIMENTAL_T2)),
    ];
    let fits = sweeps
        .par_iter()
        .map(|(_, s)| run_scaling_sweep(s))
        .collect::<Result<Vec<_>>>()?;
    for ((name, _), fit) in sweeps.iter().zip(&fits) {
        push_fit(&mut d, name, fit);
    }
    Ok(d)
}

fn fig5() -> Result<Dataset> {
    let mut d = Dataset::new(Figure::Fig5, &columns_with(&["bx", "k"]));
    d.comment(format!(
        "fig5: concurrence, bx in {{0.1, 0.2}}, k in {{1, 1/10, 1/30}}, b0={}, bz_end={}, reference backend",
        IDEAL_B0, LEVEL_RANGE.1
    ));
    let jobs: Vec<(f64, f64, &str)> = FIG5_FIELDS
        .iter()
        .flat_map(|&bx| FIG5_RATES.iter().map(move |&(k, l)| (bx, k, l)))
        .collect();
    let traces = jobs
        .par_iter()
        .map(|&(bx, k, _)| continuous_trace(bx, k, IDEAL_B0, LEVEL_RANGE.1))
        .collect::<Result<Vec<_>>>()?;
    for (&(bx, _, label), trace) in jobs.iter().zip(&traces) {
        push_trace(&mut d, bx, label, None, trace);
    }
    Ok(d)
}

/// Regenerates the dataset of one figure.
pub fn reproduce_figure(figure: Figure) -> Result<Dataset> {
    match figure {
        Figure::Fig1a => fig1a(),
        Figure::Fig1b => fig1b(),
        Figure::Fig1c => fig1c(),
        Figure::Fig3 => fig3(),
        Figure::Fig4 => fig4(),
        Figure::Fig5 => fig5(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn figure_names_round_trip() {
        for f in Figure::ALL {
            assert_eq!(f.name().parse::<Figure>().unwrap(), f);
        }
        assert_eq!("fig2".parse::<Figure>(), Err(Error::UnknownFigure("fig2".into())));
    }

    #[test]
    fn level_dataset_shape() {
        let d = reproduce_figure(Figure::Fig1a).unwrap();
        assert_eq!(d.rows.len(), LEVEL_POINTS);
        assert!(d.to_csv().starts_with("# fig1a"));
        let e0 = d.numeric("e0").unwrap();
        let e1 = d.numeric("e1").unwrap();
        assert!(e0.iter().zip(&e1).all(|(a, b)| a < b));
    }

    #[test]
    fn relaxation_peaks_near_critical_fields() {
        let d = reproduce_figure(Figure::Fig1b).unwrap();
        let bz = d.numeric("bz").unwrap();
        let tau = d.numeric("tau").unwrap();
        let left = (0..bz.len() / 2).max_by(|&a, &b| tau[a].total_cmp(&tau[b])).unwrap();
        assert!((bz[left] + 1.0).abs() < 0.05, "{}", bz[left]);
    }
}
