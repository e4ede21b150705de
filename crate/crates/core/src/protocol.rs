//! Emulation of the NMR implementation of a scan.
//!
//! The overlap with the instantaneous ground state is measured as
//! `F(t) = |⟨00| P†(t) U(t) P(0) |00⟩|²`, where `P(t)` rotates `|00⟩` onto the
//! ground state at field `B_z(t)`. After `P†(t)` a field gradient removes the
//! coherences and the `|00⟩` population is read out.

use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI, SQRT_2};
use std::fmt;

use crate::error::{Error, Result};
use crate::evolve::{trotter_step, DensityMatrix, SweepConfig};
use crate::format::sig12;
use crate::model::{ground_state, GroundState};
use crate::smallmat::{apply, inner, pauli, ComplexMatrix, StateVector, C64};

/// Required fidelity of `P|00⟩` with the target ground state when picking the
/// `β` branch.
pub const BRANCH_TOL: f64 = 1e-6;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PrepAngles {
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
}

fn wrap_angle(x: f64) -> f64 {
    let mut y = x % (2.0 * PI);
    if y <= -PI {
        y += 2.0 * PI;
    } else if y > PI {
        y -= 2.0 * PI;
    }
    y
}

/// Angles of the preparation operator for a ground state.
///
/// `cos α = c₀ + c₁`, `tan γ = √(1 - (c₀+c₁)²)` and
/// `sin(β+γ) = -√2 c₊ / √(2 - (c₀+c₁)²)`. Both arcsine branches are tried and
/// the one whose operator reproduces the ground state is kept.
pub fn prep_angles(g: &GroundState) -> Result<PrepAngles> {
    let amps = [g.c0, g.cplus, g.c1];
    if amps.iter().any(|a| a.im.abs() > 1e-9) {
        return Err(Error::InvalidParam(
            "preparation angles need real ground-state amplitudes".into(),
        ));
    }
    let sum = (g.c0.re + g.c1.re).clamp(-1.0, 1.0);
    let alpha = sum.acos();
    let gamma = (1.0 - sum * sum).max(0.0).sqrt().atan();
    let s = (-SQRT_2 * g.cplus.re / (2.0 - sum * sum).sqrt()).clamp(-1.0, 1.0);
    let asin = s.asin();
    let target = g.to_state();
    let candidates = [wrap_angle(asin - gamma), wrap_angle(PI - asin - gamma)];
    let mut best: Option<(PrepAngles, f64)> = None;
    for beta in candidates {
        let angles = PrepAngles { alpha, beta, gamma };
        let produced = apply(&prep_operator(&angles), &StateVector::basis(4, 0))?;
        let fidelity = inner(&target, &produced)?.norm_sqr();
        if best.is_none_or(|(_, f)| fidelity > f) {
            best = Some((angles, fidelity));
        }
    }
    let (angles, fidelity) = best.expect("two candidates");
    if 1.0 - fidelity > BRANCH_TOL {
        return Err(Error::NoValidBranch { infidelity: 1.0 - fidelity });
    }
    Ok(angles)
}

/// `exp(iβ(σ_y¹+σ_y²)/2) · exp(-i(π/4)σ_z¹σ_z²) · exp(iα(σ_x¹+σ_x²)/2)`.
pub fn prep_operator(a: &PrepAngles) -> ComplexMatrix {
    let rx = pauli::rotation(&pauli::x(), -a.alpha);
    let ry = pauli::rotation(&pauli::y(), -a.beta);
    pauli::pair(&ry, &ry) * zz_phase(FRAC_PI_4) * pauli::pair(&rx, &rx)
}

/// `exp(-iφ σ_z¹σ_z²)`.
fn zz_phase(phi: f64) -> ComplexMatrix {
    let minus = C64::from_polar(1.0, -phi);
    let plus = C64::from_polar(1.0, phi);
    ComplexMatrix::diagonal(&[minus, plus, plus, minus])
}

/// Preparation operator for the ground state at segment boundary `j`.
pub fn prep_operator_at(cfg: &SweepConfig, j: usize) -> Result<ComplexMatrix> {
    let g = ground_state(cfg.params(j))?;
    Ok(prep_operator(&prep_angles(&g)?))
}

fn crushed_readout(psi: &StateVector) -> f64 {
    DensityMatrix::pure(psi).crush().diagonal()[0]
}

/// Overlap `F(t_j)` measured by the protocol after `j` split segments.
pub fn protocol_overlap(cfg: &SweepConfig, j: usize) -> Result<f64> {
    cfg.validate()?;
    if j > cfg.steps {
        return Err(Error::IndexOutOfRange { index: j, max: cfg.steps });
    }
    let mut psi = apply(&prep_operator_at(cfg, 0)?, &StateVector::basis(4, 0))?;
    for m in 1..=j {
        psi = apply(&trotter_step(cfg.params(m), cfg.delta), &psi)?;
    }
    let back = apply(&prep_operator_at(cfg, j)?.adjoint(), &psi)?;
    Ok(crushed_readout(&back))
}

/// `F(t_j)` for every `j = 0..=steps` in one pass.
pub fn protocol_overlaps(cfg: &SweepConfig) -> Result<Vec<f64>> {
    cfg.validate()?;
    let mut psi = apply(&prep_operator_at(cfg, 0)?, &StateVector::basis(4, 0))?;
    let mut out = Vec::with_capacity(cfg.steps + 1);
    for j in 0..=cfg.steps {
        if j > 0 {
            psi = apply(&trotter_step(cfg.params(j), cfg.delta), &psi)?;
        }
        let back = apply(&prep_operator_at(cfg, j)?.adjoint(), &psi)?;
        out.push(crushed_readout(&back));
    }
    Ok(out)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Channel {
    /// Qubit 1.
    Proton,
    /// Qubit 2.
    Carbon,
}

impl Channel {
    pub const BOTH: [Channel; 2] = [Channel::Proton, Channel::Carbon];

    fn label(self) -> &'static str {
        match self {
            Channel::Proton => "1H",
            Channel::Carbon => "13C",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Axis {
    X,
    Y,
}

/// One line of a pulse program.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum ScheduleEntry {
    /// Ideal rotation `exp(-i flip σ_axis / 2)` on one channel.
    Pulse { channel: Channel, axis: Axis, flip: f64 },
    /// Free evolution, seconds.
    Delay(f64),
    /// Offset of both channels for subsequent delays, Hz.
    Offset(f64),
    Crush,
}

impl fmt::Display for ScheduleEntry {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ScheduleEntry::Pulse { channel, axis, flip } => {
                let axis = match axis {
                    Axis::X => "x",
                    Axis::Y => "y",
                };
                write!(f, "PULSE {} {} {}", channel.label(), axis, sig12(*flip))
            }
            ScheduleEntry::Delay(s) => write!(f, "DELAY {}", sig12(*s)),
            ScheduleEntry::Offset(hz) => write!(f, "OFFSET {}", sig12(*hz)),
            ScheduleEntry::Crush => f.write_str("CRUSH"),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SectionKind {
    Prepare,
    Segment(usize),
    Unprepare,
    Readout,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ScheduleSection {
    pub kind: SectionKind,
    pub entries: Vec<ScheduleEntry>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct PulseSchedule {
    pub j_hz: f64,
    pub sections: Vec<ScheduleSection>,
}

impl PulseSchedule {
    pub fn entries(&self) -> impl Iterator<Item = &ScheduleEntry> {
        self.sections.iter().flat_map(|s| s.entries.iter())
    }

    pub fn section(&self, kind: SectionKind) -> Option<&ScheduleSection> {
        self.sections.iter().find(|s| s.kind == kind)
    }

    /// Sum of all delays; pulses are treated as instantaneous.
    pub fn total_duration(&self) -> f64 {
        self.entries()
            .map(|e| match e {
                ScheduleEntry::Delay(s) => *s,
                _ => 0.0,
            })
            .sum()
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for e in self.entries() {
            out.push_str(&e.to_string());
            out.push('\n');
        }
        out
    }
}

fn pulse_pair(axis: Axis, flip: f64) -> [ScheduleEntry; 2] {
    Channel::BOTH.map(|channel| ScheduleEntry::Pulse { channel, axis, flip })
}

/// Offset (Hz) used during segment `m`, `(-1.5 + 0.1 m) J/2` for the default
/// scan; in general `B_z(t_m) J/2`.
pub fn segment_offset(cfg: &SweepConfig, m: usize) -> f64 {
    cfg.field(m) * cfg.j_hz / 2.0
}

/// Pulse program realizing `P†(t_j) U(t_j) P(0)` followed by gradient and read-out,
/// with `j = cfg.steps`.
pub fn nmr_schedule(cfg: &SweepConfig) -> Result<PulseSchedule> {
    cfg.validate()?;
    let j_hz = cfg.j_hz;
    // exp(-iπ/4 σzσz) takes 1/(2J) of on-resonance free evolution; its inverse
    // is realized as 3/(2J), equal up to a global phase.
    let quarter = 1.0 / (2.0 * j_hz);

    let start = prep_angles(&ground_state(cfg.params(0))?)?;
    let end = prep_angles(&ground_state(cfg.params(cfg.steps))?)?;

    let mut sections = Vec::with_capacity(cfg.steps + 3);
    let mut prep = Vec::new();
    prep.extend(pulse_pair(Axis::X, -start.alpha));
    prep.push(ScheduleEntry::Offset(0.0));
    prep.push(ScheduleEntry::Delay(quarter));
    prep.extend(pulse_pair(Axis::Y, -start.beta));
    sections.push(ScheduleSection { kind: SectionKind::Prepare, entries: prep });

    let theta = 2.0 * cfg.delta * cfg.bx;
    let d = cfg.segment_seconds();
    for m in 1..=cfg.steps {
        let mut seg = Vec::with_capacity(4);
        seg.extend(pulse_pair(Axis::X, theta));
        seg.push(ScheduleEntry::Offset(segment_offset(cfg, m)));
        seg.push(ScheduleEntry::Delay(d));
        sections.push(ScheduleSection { kind: SectionKind::Segment(m), entries: seg });
    }

    let mut unprep = Vec::new();
    unprep.extend(pulse_pair(Axis::Y, end.beta));
    unprep.push(ScheduleEntry::Offset(0.0));
    unprep.push(ScheduleEntry::Delay(3.0 * quarter));
    unprep.extend(pulse_pair(Axis::X, end.alpha));
    sections.push(ScheduleSection { kind: SectionKind::Unprepare, entries: unprep });

    sections.push(ScheduleSection {
        kind: SectionKind::Readout,
        entries: vec![
            ScheduleEntry::Crush,
            ScheduleEntry::Pulse { channel: Channel::Proton, axis: Axis::X, flip: FRAC_PI_2 },
        ],
    });
    Ok(PulseSchedule { j_hz, sections })
}

/// Free evolution for `seconds` in the doubly rotating frame at offset `nu` Hz:
/// `exp(-i t [πν(σ_z¹+σ_z²) + (πJ/2)σ_z¹σ_z²])`.
pub fn free_evolution(nu: f64, j_hz: f64, seconds: f64) -> ComplexMatrix {
    let zeeman = PI * nu * seconds;
    let coupling = PI * j_hz / 2.0 * seconds;
    let energies = [2.0 * zeeman + coupling, -coupling, -coupling, -2.0 * zeeman + coupling];
    ComplexMatrix::diagonal(&energies.map(|e| C64::from_polar(1.0, -e)))
}

/// Unitary of a run of coherent entries. The offset starts at zero.
///
/// Returns `InvalidParam` on a gradient crush, which is not unitary.
pub fn simulate_entries<'a>(
    entries: impl IntoIterator<Item = &'a ScheduleEntry>,
    j_hz: f64,
) -> Result<ComplexMatrix> {
    let mut u = ComplexMatrix::identity(4);
    let mut offset = 0.0;
    let id = pauli::identity();
    for e in entries {
        match *e {
            ScheduleEntry::Pulse { channel, axis, flip } => {
                let sigma = match axis {
                    Axis::X => pauli::x(),
                    Axis::Y => pauli::y(),
                };
                let r = pauli::rotation(&sigma, flip);
                let op = match channel {
                    Channel::Proton => pauli::pair(&r, &id),
                    Channel::Carbon => pauli::pair(&id, &r),
                };
                u = op * u;
            }
            ScheduleEntry::Delay(s) => u = free_evolution(offset, j_hz, s) * u,
            ScheduleEntry::Offset(hz) => offset = hz,
            ScheduleEntry::Crush => {
                return Err(Error::InvalidParam("gradient crush is not unitary".into()))
            }
        }
    }
    Ok(u)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::evolve::Backend;
    use crate::model::{triplet_basis, ModelParams};

    fn fidelity_up_to_phase(a: &ComplexMatrix, b: &ComplexMatrix) -> f64 {
        (a.adjoint() * *b).trace().norm() / a.dim() as f64
    }

    #[test]
    fn product_ground_gives_trivial_angles() {
        let g = ground_state(ModelParams { bx: 0.0, bz: -2.0 }).unwrap();
        let a = prep_angles(&g).unwrap();
        assert_eq!(a.alpha, 0.0);
        assert_eq!(a.gamma, 0.0);
        let out = apply(&prep_operator(&a), &StateVector::basis(4, 0)).unwrap();
        assert!((out.get(0).norm() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn bell_ground_angles() {
        let g = ground_state(ModelParams { bx: 0.0, bz: 0.0 }).unwrap();
        let a = prep_angles(&g).unwrap();
        assert!((a.alpha - FRAC_PI_2).abs() < 1e-12);
        assert!(((a.beta + a.gamma).sin() + 1.0).abs() < 1e-12);
        let out = apply(&prep_operator(&a), &StateVector::basis(4, 0)).unwrap();
        assert!((inner(&triplet_basis()[1], &out).unwrap().norm_sqr() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn zero_angles_give_diagonal_phase() {
        let p = prep_operator(&PrepAngles { alpha: 0.0, beta: 0.0, gamma: 0.0 });
        assert!(p.max_abs_diff(&zz_phase(FRAC_PI_4)) < 1e-15);
    }

    #[test]
    fn angles_reproduce_ground_states() {
        for &(bx, bz) in &[(0.1, -1.5), (0.1, -1.0), (0.2, -0.2), (0.1, 0.5), (0.2, 1.7), (0.05, -0.95)] {
            let g = ground_state(ModelParams { bx, bz }).unwrap();
            let a = prep_angles(&g).unwrap();
            assert!((a.alpha.cos() - (g.c0.re + g.c1.re)).abs() < 1e-9);
            assert!(a.beta > -PI && a.beta <= PI);
            let out = apply(&prep_operator(&a), &StateVector::basis(4, 0)).unwrap();
            let f = inner(&g.to_state(), &out).unwrap().norm_sqr();
            assert!(f >= 1.0 - 1e-9, "bx={bx} bz={bz} fidelity {f}");
        }
    }

    #[test]
    fn rejects_complex_amplitudes() {
        let mut g = ground_state(ModelParams { bx: 0.1, bz: -1.5 }).unwrap();
        g.cplus = C64::new(0.0, g.cplus.re);
        assert!(prep_angles(&g).is_err());
    }

    #[test]
    fn broken_phase_convention_is_detected() {
        // amplitudes that no P can produce: c0 and c1 with the wrong relative sign
        let g = GroundState {
            c0: C64::new(0.8, 0.0),
            cplus: C64::new(0.0, 0.0),
            c1: C64::new(0.6, 0.0),
            energy: 0.0,
        };
        assert!(matches!(prep_angles(&g), Err(Error::NoValidBranch { .. })));
    }

    #[test]
    fn overlap_starts_at_one_and_checks_index() {
        let cfg = SweepConfig::experimental(0.1, 1.0, Backend::Trotter).unwrap();
        assert!((protocol_overlap(&cfg, 0).unwrap() - 1.0).abs() < 1e-12);
        assert!(matches!(
            protocol_overlap(&cfg, cfg.steps + 1),
            Err(Error::IndexOutOfRange { index: 14, max: 13 })
        ));
    }

    #[test]
    fn batched_overlaps_match_single_calls() {
        let cfg = SweepConfig::experimental(0.2, 0.5, Backend::Trotter).unwrap();
        let all = protocol_overlaps(&cfg).unwrap();
        for j in [0, 3, 13] {
            assert!((all[j] - protocol_overlap(&cfg, j).unwrap()).abs() < 1e-14);
        }
    }

    #[test]
    fn schedule_constants() {
        let cfg = SweepConfig::experimental(0.1, 1.0, Backend::Trotter).unwrap();
        let s = nmr_schedule(&cfg).unwrap();
        let seg = &s.section(SectionKind::Segment(1)).unwrap().entries;
        assert_eq!(seg.len(), 4);
        match seg[0] {
            ScheduleEntry::Pulse { flip, .. } => assert!((flip - 0.02).abs() < 1e-15),
            other => panic!("unexpected {other:?}"),
        }
        assert_eq!(seg[2], ScheduleEntry::Offset(-150.5));
        match seg[3] {
            ScheduleEntry::Delay(d) => assert!((d - 2.961022197e-4).abs() < 1e-12),
            other => panic!("unexpected {other:?}"),
        }
        assert!((segment_offset(&cfg, 13) + 21.5).abs() < 1e-12);
    }

    #[test]
    fn prep_block_realizes_operator() {
        let cfg = SweepConfig::experimental(0.2, 0.25, Backend::Trotter).unwrap();
        let s = nmr_schedule(&cfg).unwrap();
        let prep = simulate_entries(&s.section(SectionKind::Prepare).unwrap().entries, cfg.j_hz).unwrap();
        let unprep =
            simulate_entries(&s.section(SectionKind::Unprepare).unwrap().entries, cfg.j_hz).unwrap();
        let p0 = prep_operator_at(&cfg, 0).unwrap();
        let pj = prep_operator_at(&cfg, cfg.steps).unwrap();
        assert!((fidelity_up_to_phase(&prep, &p0) - 1.0).abs() < 1e-12);
        assert!((fidelity_up_to_phase(&unprep, &pj.adjoint()) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn crush_cannot_be_simulated_coherently() {
        assert!(simulate_entries(&[ScheduleEntry::Crush], 215.0).is_err());
    }

    #[test]
    fn text_lines() {
        let e = ScheduleEntry::Pulse { channel: Channel::Carbon, axis: Axis::Y, flip: -0.5 };
        assert_eq!(e.to_string(), "PULSE 13C y -0.500000000000");
        assert_eq!(ScheduleEntry::Delay(0.001).to_string(), "DELAY 0.00100000000000");
        assert_eq!(ScheduleEntry::Offset(0.0).to_string(), "OFFSET 0");
        assert_eq!(ScheduleEntry::Crush.to_string(), "CRUSH");
    }
}
