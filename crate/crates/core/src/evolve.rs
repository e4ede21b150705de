//! Time evolution along a linear field ramp `B_z(t) = B₀ + k t`.
//!
//! Two backends share one segment grid (`steps` segments of length `delta`):
//!
//! * `Reference` integrates the continuous ramp with midpoint substeps of at most
//!   `substep` time units inside every segment.
//! * `Trotter` replaces segment `m` (1-based) by the split propagator evaluated at
//!   the segment's end field `B₀ + m k δ`, which is how the pulse sequence labels
//!   its offsets.
//!
//! Observables are recorded at every segment boundary, including `t = 0`.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::format::sig12;
use crate::model::{
    driven_hamiltonian, ground_state, instantaneous_eigenstates, ModelParams,
};
use crate::smallmat::{
    apply, hermitian_eig, inner, pauli, unitary_step, ComplexMatrix, StateVector, C64,
};

pub const DEFAULT_B0: f64 = -1.5;
pub const DEFAULT_BZ_END: f64 = -0.2;
pub const DEFAULT_FIELD_STEP: f64 = 0.1;
pub const DEFAULT_J_HZ: f64 = 215.0;
pub const REFERENCE_SUBSTEP: f64 = 0.01;

/// Trace points with `|B_z|` below this are flagged as near the symmetric point.
pub const SYMMETRIC_POINT_WINDOW: f64 = 0.1;

const RAMP_TOL: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Backend {
    Reference,
    Trotter,
}

impl fmt::Display for Backend {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Backend::Reference => "reference",
            Backend::Trotter => "trotter",
        })
    }
}

impl FromStr for Backend {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "reference" => Ok(Backend::Reference),
            "trotter" => Ok(Backend::Trotter),
            other => Err(Error::InvalidParam(format!("unknown backend '{other}'"))),
        }
    }
}

/// Complete description of one scan.
#[derive(Clone, Debug, PartialEq)]
pub struct SweepConfig {
    pub bx: f64,
    pub b0: f64,
    /// Scan rate, `(Jπ/2)²`.
    pub k: f64,
    /// Segment duration, `1/(Jπ/2)`.
    pub delta: f64,
    pub steps: usize,
    pub backend: Backend,
    /// `(T₂ of qubit 1, T₂ of qubit 2)` in seconds.
    pub t2: Option<(f64, f64)>,
    /// Coupling in Hz, used only for conversion to physical time.
    pub j_hz: f64,
    pub bz_end: f64,
    /// Upper bound on the reference backend's integration substep.
    pub substep: f64,
}

impl SweepConfig {
    /// Builds a scan from `b0` to `bz_end` in field increments of `field_step`.
    /// The span must be an integer number of increments.
    pub fn new(bx: f64, k: f64, b0: f64, bz_end: f64, field_step: f64, backend: Backend) -> Result<Self> {
        if k.is_nan() || k <= 0.0 || !k.is_finite() {
            return Err(Error::InvalidParam(format!("scan rate k must be > 0, got {k}")));
        }
        if field_step.is_nan() || field_step <= 0.0 || !field_step.is_finite() {
            return Err(Error::InvalidParam(format!(
                "field step must be > 0, got {field_step}"
            )));
        }
        let span = bz_end - b0;
        let ratio = span / field_step;
        let steps = ratio.round();
        if span.is_nan() || span <= 0.0 || (ratio - steps).abs() > 1e-9 * ratio.abs().max(1.0) {
            return Err(Error::ConfigInconsistent(format!(
                "field span {b0} -> {bz_end} is not a positive multiple of {field_step}"
            )));
        }
        let cfg = Self {
            bx,
            b0,
            k,
            delta: field_step / k,
            steps: steps as usize,
            backend,
            t2: None,
            j_hz: DEFAULT_J_HZ,
            bz_end,
            substep: REFERENCE_SUBSTEP,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    /// Defaults of the experimental scan: `B₀ = -1.5` to `-0.2` in steps of 0.1.
    pub fn experimental(bx: f64, k: f64, backend: Backend) -> Result<Self> {
        Self::new(bx, k, DEFAULT_B0, DEFAULT_BZ_END, DEFAULT_FIELD_STEP, backend)
    }

    pub fn with_t2(mut self, t2_first: f64, t2_second: f64) -> Result<Self> {
        self.t2 = Some((t2_first, t2_second));
        self.validate()?;
        Ok(self)
    }

    pub fn with_j_hz(mut self, j_hz: f64) -> Result<Self> {
        self.j_hz = j_hz;
        self.validate()?;
        Ok(self)
    }

    pub fn with_substep(mut self, substep: f64) -> Result<Self> {
        self.substep = substep;
        self.validate()?;
        Ok(self)
    }

    pub fn with_backend(mut self, backend: Backend) -> Self {
        self.backend = backend;
        self
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [("bx", self.bx), ("b0", self.b0), ("bz_end", self.bz_end)] {
            if !v.is_finite() {
                return Err(Error::InvalidParam(format!("{name} must be finite")));
            }
        }
        if self.bx < 0.0 {
            return Err(Error::InvalidParam(format!("bx must be >= 0, got {}", self.bx)));
        }
        if !(self.k > 0.0 && self.k.is_finite()) {
            return Err(Error::InvalidParam(format!("k must be > 0, got {}", self.k)));
        }
        if !(self.delta > 0.0 && self.delta.is_finite()) {
            return Err(Error::InvalidParam(format!("delta must be > 0, got {}", self.delta)));
        }
        if self.steps == 0 {
            return Err(Error::ConfigInconsistent("steps must be >= 1".into()));
        }
        let span = self.bz_end - self.b0;
        let ramp = self.k * self.delta * self.steps as f64;
        if (ramp - span).abs() > RAMP_TOL * span.abs().max(1.0) {
            return Err(Error::ConfigInconsistent(format!(
                "k*delta*steps = {ramp} but bz_end - b0 = {span}"
            )));
        }
        if !(self.j_hz > 0.0 && self.j_hz.is_finite()) {
            return Err(Error::InvalidParam(format!("J must be > 0 Hz, got {}", self.j_hz)));
        }
        if !(self.substep > 0.0 && self.substep.is_finite()) {
            return Err(Error::InvalidParam(format!("substep must be > 0, got {}", self.substep)));
        }
        if let Some((a, b)) = self.t2 {
            if a.is_nan() || b.is_nan() || a <= 0.0 || b <= 0.0 {
                return Err(Error::InvalidT2(format!("T2 values must be > 0 s, got ({a}, {b})")));
            }
        }
        Ok(())
    }

    /// `δ_B = k δ`.
    pub fn field_step(&self) -> f64 {
        self.k * self.delta
    }

    pub fn time(&self, j: usize) -> f64 {
        j as f64 * self.delta
    }

    /// Field at segment boundary `j`.
    pub fn field(&self, j: usize) -> f64 {
        ramp(self.b0, self.k, self.time(j))
    }

    /// Physical duration of one segment in seconds, `2δ/(πJ)`.
    pub fn segment_seconds(&self) -> f64 {
        2.0 * self.delta / (PI * self.j_hz)
    }

    pub fn params(&self, j: usize) -> ModelParams {
        ModelParams { bx: self.bx, bz: self.field(j) }
    }
}

/// `B₀ + k t`.
pub fn ramp(b0: f64, k: f64, t: f64) -> f64 {
    b0 + k * t
}

/// Split propagator for one segment: the transverse rotation
/// `exp(-iδB_x(σ_x¹+σ_x²))` acts first, then the diagonal evolution
/// `exp(-iδ[B_z(σ_z¹+σ_z²) + σ_z¹σ_z²])`.
pub fn trotter_step(p: ModelParams, delta: f64) -> ComplexMatrix {
    diagonal_step(p.bz, delta) * transverse_step(p.bx, delta)
}

/// `exp(-iδB_x(σ_x¹+σ_x²))`, a product of two single-qubit x rotations.
pub fn transverse_step(bx: f64, delta: f64) -> ComplexMatrix {
    let r = pauli::rotation(&pauli::x(), 2.0 * delta * bx);
    pauli::pair(&r, &r)
}

/// `exp(-iδ[B_z(σ_z¹+σ_z²) + σ_z¹σ_z²])`, diagonal in the computational basis.
pub fn diagonal_step(bz: f64, delta: f64) -> ComplexMatrix {
    let energies = [1.0 + 2.0 * bz, -1.0, -1.0, 1.0 - 2.0 * bz];
    let phases: Vec<C64> = energies
        .iter()
        .map(|e| C64::from_polar(1.0, -delta * e))
        .collect();
    ComplexMatrix::diagonal(&phases)
}

/// `exp(-iδH)` of the full Hamiltonian at fixed fields.
pub fn exact_step(p: ModelParams, delta: f64) -> ComplexMatrix {
    unitary_step(&driven_hamiltonian(p), delta).expect("driven Hamiltonian is Hermitian")
}

/// Propagator over segment `m` (1-based) for the configured backend.
pub fn segment_propagator(cfg: &SweepConfig, m: usize) -> ComplexMatrix {
    assert!(m >= 1 && m <= cfg.steps);
    match cfg.backend {
        Backend::Trotter => trotter_step(cfg.params(m), cfg.delta),
        Backend::Reference => {
            let n = (cfg.delta / cfg.substep - 1e-9).ceil().max(1.0) as usize;
            let h = cfg.delta / n as f64;
            let t0 = cfg.time(m - 1);
            let mut u = ComplexMatrix::identity(4);
            for i in 0..n {
                let bz = ramp(cfg.b0, cfg.k, t0 + (i as f64 + 0.5) * h);
                u = exact_step(ModelParams { bx: cfg.bx, bz }, h) * u;
            }
            u
        }
    }
}

/// Ground state of the starting field, the usual initial condition.
pub fn initial_ground(cfg: &SweepConfig) -> Result<StateVector> {
    Ok(ground_state(cfg.params(0))?.to_state())
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TracePoint {
    pub t: f64,
    pub bz: f64,
    pub defect: f64,
    pub overlap: f64,
    pub populations: [f64; 3],
    pub concurrence: f64,
}

impl TracePoint {
    /// Observables next to `B_z = 0` are excluded from comparisons.
    pub fn near_symmetric_point(&self) -> bool {
        self.bz.abs() < SYMMETRIC_POINT_WINDOW
    }
}

/// Observables at every segment boundary of a scan.
#[derive(Clone, Debug, PartialEq)]
pub struct ScanTrace {
    pub points: Vec<TracePoint>,
}

impl ScanTrace {
    pub const CSV_HEADER: &'static str = "t,bz,defect,overlap,a0,a1,a2,concurrence";

    pub fn last(&self) -> &TracePoint {
        self.points.last().expect("trace is never empty")
    }

    /// Defect density at the last recorded point.
    pub fn final_defect(&self) -> f64 {
        self.last().defect
    }

    /// Point whose field is closest to `bz`.
    pub fn at_field(&self, bz: f64) -> &TracePoint {
        self.points
            .iter()
            .min_by(|a, b| (a.bz - bz).abs().total_cmp(&(b.bz - bz).abs()))
            .expect("trace is never empty")
    }

    pub fn csv_row(p: &TracePoint) -> String {
        [
            p.t,
            p.bz,
            p.defect,
            p.overlap,
            p.populations[0],
            p.populations[1],
            p.populations[2],
            p.concurrence,
        ]
        .iter()
        .map(|v| sig12(*v))
        .collect::<Vec<_>>()
        .join(",")
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::with_capacity(64 * (self.points.len() + 1));
        out.push_str(Self::CSV_HEADER);
        out.push('\n');
        for p in &self.points {
            out.push_str(&Self::csv_row(p));
            out.push('\n');
        }
        out
    }
}

/// Squared overlaps with the instantaneous triplet eigenstates.
pub fn eigenpopulations(psi: &StateVector, p: ModelParams) -> [f64; 3] {
    let states = instantaneous_eigenstates(p);
    let mut pops = [0.0; 3];
    for (pop, v) in pops.iter_mut().zip(&states) {
        *pop = inner(v, psi).expect("two-qubit state").norm_sqr();
    }
    pops
}

/// `1 - |⟨ψ_g|ψ⟩|²`.
pub fn defect_density(psi: &StateVector, p: ModelParams) -> f64 {
    let g = instantaneous_eigenstates(p)[0];
    (1.0 - inner(&g, psi).expect("two-qubit state").norm_sqr()).clamp(0.0, 1.0)
}

/// Pure-state concurrence `2|ad - bc|`.
pub fn concurrence(psi: &StateVector) -> f64 {
    assert_eq!(psi.dim(), 4, "concurrence needs a two-qubit state");
    let [a, b, c, d] = [psi.get(0), psi.get(1), psi.get(2), psi.get(3)];
    (2.0 * (a * d - b * c).norm()).clamp(0.0, 1.0)
}

fn pure_point(cfg: &SweepConfig, j: usize, psi: &StateVector) -> TracePoint {
    let p = cfg.params(j);
    let populations = eigenpopulations(psi, p);
    let overlap = populations[0];
    TracePoint {
        t: cfg.time(j),
        bz: p.bz,
        defect: 1.0 - overlap,
        overlap,
        populations,
        concurrence: concurrence(psi),
    }
}

fn check_normalized(psi: &StateVector) -> Result<()> {
    if psi.dim() != 4 {
        return Err(Error::DimensionMismatch { expected: 4, actual: psi.dim() });
    }
    if (psi.norm_sqr() - 1.0).abs() > 1e-10 {
        return Err(Error::InvalidParam(format!(
            "initial state not normalized (norm² = {})",
            psi.norm_sqr()
        )));
    }
    Ok(())
}

/// Pure-state scan.
pub fn propagate(cfg: &SweepConfig, initial: &StateVector) -> Result<ScanTrace> {
    cfg.validate()?;
    check_normalized(initial)?;
    let mut psi = *initial;
    let mut points = Vec::with_capacity(cfg.steps + 1);
    points.push(pure_point(cfg, 0, &psi));
    for m in 1..=cfg.steps {
        psi = apply(&segment_propagator(cfg, m), &psi)?;
        points.push(pure_point(cfg, m, &psi));
    }
    Ok(ScanTrace { points })
}

/// Final pure state of a scan (no observables).
pub fn final_state(cfg: &SweepConfig, initial: &StateVector) -> Result<StateVector> {
    cfg.validate()?;
    check_normalized(initial)?;
    let mut psi = *initial;
    for m in 1..=cfg.steps {
        psi = apply(&segment_propagator(cfg, m), &psi)?;
    }
    Ok(psi)
}

/// State fidelity of the split propagator against the exact segment
/// exponential at the same field, evaluated on the state reached by the split
/// evolution before each segment. One entry per segment.
pub fn trotter_fidelity_profile(cfg: &SweepConfig, initial: &StateVector) -> Result<Vec<f64>> {
    cfg.validate()?;
    check_normalized(initial)?;
    let mut psi = *initial;
    let mut out = Vec::with_capacity(cfg.steps);
    for m in 1..=cfg.steps {
        let p = cfg.params(m);
        let split = apply(&trotter_step(p, cfg.delta), &psi)?;
        let exact = apply(&exact_step(p, cfg.delta), &psi)?;
        out.push(inner(&exact, &split)?.norm_sqr());
        psi = split;
    }
    Ok(out)
}

/// Two-qubit density matrix.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DensityMatrix(ComplexMatrix);

impl DensityMatrix {
    pub fn new(m: ComplexMatrix) -> Result<Self> {
        if m.dim() != 4 {
            return Err(Error::DimensionMismatch { expected: 4, actual: m.dim() });
        }
        let rho = Self(m);
        let tr = m.trace();
        if (tr.re - 1.0).abs() > 1e-10 || tr.im.abs() > 1e-10 {
            return Err(Error::InvalidParam(format!("density matrix trace {tr} != 1")));
        }
        if rho.min_eigenvalue()? < -1e-10 {
            return Err(Error::InvalidParam("density matrix is not positive".into()));
        }
        Ok(rho)
    }

    pub fn pure(psi: &StateVector) -> Self {
        Self(ComplexMatrix::outer(psi))
    }

    pub fn maximally_mixed() -> Self {
        Self(ComplexMatrix::identity(4).scale(C64::new(0.25, 0.0)))
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.0
    }

    pub fn trace(&self) -> f64 {
        self.0.trace().re
    }

    pub fn min_eigenvalue(&self) -> Result<f64> {
        Ok(hermitian_eig(&self.0)?.eigenvalues[0])
    }

    /// `⟨ψ|ρ|ψ⟩`.
    pub fn population(&self, psi: &StateVector) -> f64 {
        self.0.sandwich(psi, psi).expect("two-qubit state").re
    }

    pub fn evolve(&self, u: &ComplexMatrix) -> Self {
        Self(self.0.conjugate_by(u))
    }

    /// Per-qubit phase damping: coherences between states that differ on
    /// qubit 1 are scaled by `keep_first`, on qubit 2 by `keep_second`.
    pub fn dephase(&self, keep_first: f64, keep_second: f64) -> Self {
        let mut m = self.0;
        for r in 0..4 {
            for c in 0..4 {
                let mut f = 1.0;
                if (r >> 1) != (c >> 1) {
                    f *= keep_first;
                }
                if (r & 1) != (c & 1) {
                    f *= keep_second;
                }
                if f != 1.0 {
                    m.set(r, c, m.get(r, c) * f);
                }
            }
        }
        Self(m)
    }

    /// Removes every off-diagonal element, as a pulsed field gradient does.
    pub fn crush(&self) -> Self {
        let d: Vec<C64> = (0..4).map(|i| self.0.get(i, i)).collect();
        Self(ComplexMatrix::diagonal(&d))
    }

    pub fn diagonal(&self) -> [f64; 4] {
        [0, 1, 2, 3].map(|i| self.0.get(i, i).re)
    }

    /// Wootters concurrence.
    pub fn concurrence(&self) -> f64 {
        let yy = pauli::pair(&pauli::y(), &pauli::y());
        let mut conj = self.0;
        for r in 0..4 {
            for c in 0..4 {
                conj.set(r, c, self.0.get(r, c).conj());
            }
        }
        let flipped = yy * conj * yy;
        let spec = hermitian_eig(&self.0).expect("density matrix is Hermitian");
        let sqrt_rho = spec.map(|l| C64::new(l.max(0.0).sqrt(), 0.0));
        let mut r = sqrt_rho * flipped * sqrt_rho;
        // remove rounding asymmetry before the Hermitian solve
        r = (r + r.adjoint()).scale(C64::new(0.5, 0.0));
        let mut lambdas: Vec<f64> = hermitian_eig(&r)
            .expect("symmetrized")
            .eigenvalues
            .iter()
            .map(|l| l.max(0.0).sqrt())
            .collect();
        lambdas.sort_by(|a, b| b.total_cmp(a));
        (lambdas[0] - lambdas[1] - lambdas[2] - lambdas[3]).clamp(0.0, 1.0)
    }
}

fn mixed_point(cfg: &SweepConfig, j: usize, rho: &DensityMatrix) -> TracePoint {
    let p = cfg.params(j);
    let states = instantaneous_eigenstates(p);
    let populations = [0, 1, 2].map(|i| rho.population(&states[i]).clamp(0.0, 1.0));
    let overlap = populations[0];
    TracePoint {
        t: cfg.time(j),
        bz: p.bz,
        defect: 1.0 - overlap,
        overlap,
        populations,
        concurrence: rho.concurrence(),
    }
}

/// Scan with transverse relaxation: each unitary segment is followed by
/// phase damping of both qubits over the segment's physical duration.
pub fn dephase_propagate(cfg: &SweepConfig, rho0: &DensityMatrix) -> Result<ScanTrace> {
    cfg.validate()?;
    let (t2_first, t2_second) = cfg
        .t2
        .ok_or_else(|| Error::InvalidT2("no T2 values configured".into()))?;
    let dt = cfg.segment_seconds();
    let keep_first = (-dt / t2_first).exp();
    let keep_second = (-dt / t2_second).exp();
    let mut rho = *rho0;
    let mut points = Vec::with_capacity(cfg.steps + 1);
    points.push(mixed_point(cfg, 0, &rho));
    for m in 1..=cfg.steps {
        rho = rho.evolve(&segment_propagator(cfg, m)).dephase(keep_first, keep_second);
        points.push(mixed_point(cfg, m, &rho));
    }
    Ok(ScanTrace { points })
}
