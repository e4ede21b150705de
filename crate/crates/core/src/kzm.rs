//! Kibble-Zurek analysis: freeze-out, adiabatic-impulse defect estimate,
//! scaling sweeps and the fit of the freeze-out constant.

use std::f64::consts::{PI, SQRT_2};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::evolve::{
    dephase_propagate, initial_ground, propagate, Backend, DensityMatrix, SweepConfig,
    DEFAULT_B0, DEFAULT_FIELD_STEP, REFERENCE_SUBSTEP,
};
use crate::model::{effective_hamiltonian, ModelParams};
use crate::smallmat::{apply, hermitian_eig, inner, unitary_step, StateVector};

/// Field at which the "final" defect density is read, between the two critical points.
pub const DF_SAMPLE_FIELD: f64 = -0.2;
/// Start field of ideal-model sweeps.
pub const IDEAL_B0: f64 = -2.0;
/// Defect densities below this are dropped before taking logarithms.
pub const MIN_FIT_DEFECT: f64 = 1e-6;
/// Scan rates of the experiment; the segment time is `0.1 / k`.
pub const EXPERIMENTAL_RATES: [f64; 4] = [1.0, 0.5, 1.0 / 3.0, 0.25];
pub const EXPERIMENTAL_FIELDS: [f64; 2] = [0.1, 0.2];
/// T₂ of proton and carbon, seconds.
pub const EXPERIMENTAL_T2: (f64, f64) = (2.0, 0.2);

fn check_positive(name: &str, v: f64) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidParam(format!("{name} must be > 0, got {v}")))
    }
}

/// `τ_Q = √2 B_x / k`.
pub fn quench_time(bx: f64, k: f64) -> Result<f64> {
    check_positive("bx", bx)?;
    check_positive("k", k)?;
    Ok(SQRT_2 * bx / k)
}

/// `τ₀ = 1 / (2√2 B_x)`.
pub fn tau0(bx: f64) -> Result<f64> {
    check_positive("bx", bx)?;
    Ok(1.0 / (2.0 * SQRT_2 * bx))
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct KzmParams {
    pub tau_q: f64,
    pub tau_0: f64,
    pub alpha: f64,
}

impl KzmParams {
    pub fn new(tau_q: f64, tau_0: f64, alpha: f64) -> Result<Self> {
        check_positive("tau_q", tau_q)?;
        check_positive("tau_0", tau_0)?;
        check_positive("alpha", alpha)?;
        Ok(Self { tau_q, tau_0, alpha })
    }

    pub fn from_fields(bx: f64, k: f64, alpha: f64) -> Result<Self> {
        Self::new(quench_time(bx, k)?, tau0(bx)?, alpha)
    }

    /// Parameters with a prescribed `x_α = α τ_Q / τ₀` (τ₀ = 1).
    pub fn from_x_alpha(x_alpha: f64) -> Result<Self> {
        Self::new(x_alpha, 1.0, 1.0)
    }

    /// `α τ_Q / τ₀`.
    pub fn x_alpha(&self) -> f64 {
        self.alpha * self.tau_q / self.tau_0
    }

    /// `τ₀ / √(1 + (t/τ_Q)²)`, the relaxation time at distance `t` from the crossing.
    pub fn relaxation_time(&self, t: f64) -> f64 {
        let eps = t / self.tau_q;
        self.tau_0 / (1.0 + eps * eps).sqrt()
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FreezeOut {
    pub t_hat: f64,
    pub eps_hat: f64,
}

/// Closed-form solution of `τ(t̂) = α t̂`.
pub fn freeze_out(p: &KzmParams) -> FreezeOut {
    let x = p.x_alpha();
    // ε̂² = (√(1 + 4/x²) - 1)/2, rewritten to avoid cancellation at large x
    let q = 4.0 / (x * x);
    let eps_sq = 0.5 * q / ((1.0 + q).sqrt() + 1.0);
    let eps_hat = eps_sq.sqrt();
    FreezeOut { t_hat: eps_hat * p.tau_q, eps_hat }
}

/// Bisection root of `τ₀/√(1+(t/τ_Q)²) - α t` on `(0, 10 τ₀/α]`.
pub fn freeze_out_bisect(p: &KzmParams) -> FreezeOut {
    let f = |t: f64| p.relaxation_time(t) - p.alpha * t;
    let mut lo = 0.0f64;
    let mut hi = 10.0 * p.tau_0 / p.alpha;
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if f(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let t_hat = 0.5 * (lo + hi);
    FreezeOut { t_hat, eps_hat: t_hat / p.tau_q }
}

/// Adiabatic-impulse estimate of the final defect density, `ε̂²/(1+ε̂²)`.
pub fn predicted_defects(p: &KzmParams) -> f64 {
    let e2 = freeze_out(p).eps_hat.powi(2);
    e2 / (1.0 + e2)
}

/// One `(τ_Q/τ₀, D_f)` sample.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScalingPoint {
    pub bx: f64,
    pub k: f64,
    /// `τ_Q / τ₀ = 4 B_x² / k`.
    pub x: f64,
    pub d_f: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScalingFit {
    /// Sorted by `x`.
    pub points: Vec<ScalingPoint>,
    /// Least-squares `α` in `ln D_f = -α x`.
    pub alpha_hat: f64,
    /// Pearson correlation of `(x, -ln D_f)`.
    pub r: f64,
    pub backend: Backend,
    pub bx_values: Vec<f64>,
    pub with_t2: bool,
}

/// Summary record written by the `fit` command.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FitRecord {
    pub alpha_hat: f64,
    pub r: f64,
    pub n_points: usize,
    pub bx_values: Vec<f64>,
    pub backend: Backend,
}

impl ScalingFit {
    pub fn record(&self) -> FitRecord {
        FitRecord {
            alpha_hat: self.alpha_hat,
            r: self.r,
            n_points: self.points.iter().filter(|p| p.d_f >= MIN_FIT_DEFECT).count(),
            bx_values: self.bx_values.clone(),
            backend: self.backend,
        }
    }
}

/// Fits `ln D_f = -α x` by least squares through the origin.
///
/// Returns `(alpha_hat, r)`; points with `D_f < 1e-6` are ignored.
pub fn fit_decay(points: &[ScalingPoint]) -> Result<(f64, f64)> {
    let data: Vec<(f64, f64)> = points
        .iter()
        .filter(|p| p.d_f >= MIN_FIT_DEFECT)
        .map(|p| (p.x, -p.d_f.ln()))
        .collect();
    if data.len() < 2 {
        return Err(Error::InvalidParam(format!(
            "need at least two usable points, got {}",
            data.len()
        )));
    }
    let sxx: f64 = data.iter().map(|(x, _)| x * x).sum();
    let sxy: f64 = data.iter().map(|(x, y)| x * y).sum();
    let alpha_hat = sxy / sxx;

    let n = data.len() as f64;
    let mx = data.iter().map(|d| d.0).sum::<f64>() / n;
    let my = data.iter().map(|d| d.1).sum::<f64>() / n;
    let (mut cxy, mut cxx, mut cyy) = (0.0, 0.0, 0.0);
    for (x, y) in &data {
        cxy += (x - mx) * (y - my);
        cxx += (x - mx) * (x - mx);
        cyy += (y - my) * (y - my);
    }
    let r = if cxx > 0.0 && cyy > 0.0 {
        (cxy / (cxx * cyy).sqrt()).clamp(-1.0, 1.0)
    } else {
        0.0
    };
    Ok((alpha_hat, r))
}

/// Grid of scan rates and fields for one scaling study.
#[derive(Clone, Debug, PartialEq)]
pub struct ScalingSweep {
    pub bx_values: Vec<f64>,
    pub rates: Vec<f64>,
    pub backend: Backend,
    pub b0: f64,
    pub t2: Option<(f64, f64)>,
    pub j_hz: f64,
}

/// `n` log-spaced values from `lo` to `hi` inclusive.
pub fn log_spaced(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![lo];
    }
    let (a, b) = (lo.ln(), hi.ln());
    (0..n)
        .map(|i| (a + (b - a) * i as f64 / (n - 1) as f64).exp())
        .collect()
}

impl ScalingSweep {
    /// Ideal continuous model: 12 log-spaced rates in `[1/4, 1]`, starting at `B₀ = -2`.
    pub fn ideal(bx: f64) -> Self {
        Self {
            bx_values: vec![bx],
            rates: log_spaced(0.25, 1.0, 12),
            backend: Backend::Reference,
            b0: IDEAL_B0,
            t2: None,
            j_hz: crate::evolve::DEFAULT_J_HZ,
        }
    }

    /// Discretized experiment: both fields, four rates, start at `B₀ = -1.5`.
    pub fn experimental() -> Self {
        Self {
            bx_values: EXPERIMENTAL_FIELDS.to_vec(),
            rates: EXPERIMENTAL_RATES.to_vec(),
            backend: Backend::Trotter,
            b0: DEFAULT_B0,
            t2: None,
            j_hz: crate::evolve::DEFAULT_J_HZ,
        }
    }

    pub fn with_t2(mut self, t2: (f64, f64)) -> Self {
        self.t2 = Some(t2);
        self
    }

    fn config(&self, bx: f64, k: f64) -> Result<SweepConfig> {
        let mut cfg = SweepConfig::new(bx, k, self.b0, DF_SAMPLE_FIELD, DEFAULT_FIELD_STEP, self.backend)?
            .with_j_hz(self.j_hz)?;
        if let Some((a, b)) = self.t2 {
            cfg = cfg.with_t2(a, b)?;
        }
        Ok(cfg)
    }
}

/// Final defect density at `B_z = -0.2` of one scan.
pub fn final_defect(cfg: &SweepConfig) -> Result<f64> {
    let psi0 = initial_ground(cfg)?;
    let trace = match cfg.t2 {
        Some(_) => dephase_propagate(cfg, &DensityMatrix::pure(&psi0))?,
        None => propagate(cfg, &psi0)?,
    };
    Ok(trace.final_defect())
}

/// Runs every `(bx, k)` of the grid (in parallel) and fits the decay constant.
pub fn run_scaling_sweep(sweep: &ScalingSweep) -> Result<ScalingFit> {
    let jobs: Vec<(f64, f64)> = sweep
        .bx_values
        .iter()
        .flat_map(|&bx| sweep.rates.iter().map(move |&k| (bx, k)))
        .collect();
    let mut points = jobs
        .par_iter()
        .map(|&(bx, k)| {
            let cfg = sweep.config(bx, k)?;
            Ok(ScalingPoint { bx, k, x: 4.0 * bx * bx / k, d_f: final_defect(&cfg)? })
        })
        .collect::<Result<Vec<_>>>()?;
    points.sort_by(|a, b| {
        a.x.total_cmp(&b.x)
            .then(a.bx.total_cmp(&b.bx))
            .then(a.k.total_cmp(&b.k))
    });
    let (alpha_hat, r) = fit_decay(&points)?;
    Ok(ScalingFit {
        points,
        alpha_hat,
        r,
        backend: sweep.backend,
        bx_values: sweep.bx_values.clone(),
        with_t2: sweep.t2.is_some(),
    })
}

/// Extent of the two-level sweep in units of `√2 B_x` on each side of the crossing.
pub const LZ_HALF_WIDTH: f64 = 10.0;

/// Excited population after a long symmetric sweep of the two-level model,
/// next to the Landau-Zener value `exp(-2π B_x²/k)`.
pub fn lz_check(bx: f64, k: f64) -> Result<(f64, f64)> {
    check_positive("bx", bx)?;
    check_positive("k", k)?;
    let half = LZ_HALF_WIDTH * SQRT_2 * bx;
    let (b_start, b_stop) = (-1.0 - half, -1.0 + half);
    let duration = (b_stop - b_start) / k;
    let n = (duration / REFERENCE_SUBSTEP).ceil() as usize;
    let h = duration / n as f64;

    let start = hermitian_eig(&effective_hamiltonian(ModelParams { bx, bz: b_start }))?;
    let mut psi: StateVector = start.eigenvector(0);
    for i in 0..n {
        let bz = b_start + k * (i as f64 + 0.5) * h;
        let u = unitary_step(&effective_hamiltonian(ModelParams { bx, bz }), h)?;
        psi = apply(&u, &psi)?;
    }
    let stop = hermitian_eig(&effective_hamiltonian(ModelParams { bx, bz: b_stop }))?;
    let p_numeric = inner(&stop.eigenvector(1), &psi)?.norm_sqr();
    let p_formula = (-2.0 * PI * bx * bx / k).exp();
    Ok((p_numeric, p_formula))
}
