//! Hamiltonians of the driven two-qubit Ising system and their instantaneous spectra.
//!
//! Energies are in units of `Jπ/2` (coupling set to one), fields likewise,
//! times in `1/(Jπ/2)`. The swap-symmetric triplet sector is spanned by
//! `{|00⟩, |φ⁺⟩, |11⟩}`; the singlet `|φ⁻⟩` decouples exactly.

use std::f64::consts::{FRAC_1_SQRT_2, SQRT_2};

use crate::error::{Error, Result};
use crate::smallmat::{hermitian_eig, pauli, ComplexMatrix, SpectralData, StateVector, C64};

/// Critical values of the control field at vanishing transverse field.
pub const CRITICAL_FIELDS: [f64; 2] = [-1.0, 1.0];

/// Below this gap the ground state is considered degenerate.
pub const DEGENERACY_GAP: f64 = 1e-12;
/// `relaxation_time` refuses gaps at or below this value.
pub const CLOSED_GAP: f64 = 1e-14;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ModelParams {
    /// Transverse field `B_x`.
    pub bx: f64,
    /// Control field `B_z`.
    pub bz: f64,
}

impl ModelParams {
    pub fn new(bx: f64, bz: f64) -> Result<Self> {
        if !bx.is_finite() || !bz.is_finite() {
            return Err(Error::InvalidParam(format!(
                "fields must be finite (bx={bx}, bz={bz})"
            )));
        }
        if bx < 0.0 {
            return Err(Error::InvalidParam(format!("bx must be >= 0, got {bx}")));
        }
        Ok(Self { bx, bz })
    }

    pub fn with_bz(self, bz: f64) -> Self {
        Self { bz, ..self }
    }
}

/// Ground state expanded over `{|00⟩, |φ⁺⟩, |11⟩}`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GroundState {
    pub c0: C64,
    pub cplus: C64,
    pub c1: C64,
    pub energy: f64,
}

impl GroundState {
    pub fn triplet_amplitudes(&self) -> [C64; 3] {
        [self.c0, self.cplus, self.c1]
    }

    /// Embeds the state in the four-dimensional computational basis.
    pub fn to_state(&self) -> StateVector {
        embed_triplet(&self.triplet_amplitudes())
    }
}

/// `σ_z¹σ_z² + B_z(σ_z¹ + σ_z²)`.
pub fn ising_hamiltonian(bz: f64) -> ComplexMatrix {
    let zz = pauli::pair(&pauli::z(), &pauli::z());
    zz + pauli::collective(&pauli::z()).scale(C64::new(bz, 0.0))
}

/// Ising Hamiltonian with an added transverse field `B_x(σ_x¹ + σ_x²)`.
pub fn driven_hamiltonian(p: ModelParams) -> ComplexMatrix {
    ising_hamiltonian(p.bz) + pauli::collective(&pauli::x()).scale(C64::new(p.bx, 0.0))
}

/// Restriction of [`driven_hamiltonian`] to the triplet sector.
pub fn triplet_block(p: ModelParams) -> ComplexMatrix {
    let off = SQRT_2 * p.bx;
    ComplexMatrix::from_real_rows(&[
        [1.0 + 2.0 * p.bz, off, 0.0],
        [off, -1.0, off],
        [0.0, off, 1.0 - 2.0 * p.bz],
    ])
    .expect("3x3 block")
}

/// Two-level reduction around the `B_z = -1` anticrossing:
/// `(B_z + 1)σ_z + √2 B_x σ_x`.
pub fn effective_hamiltonian(p: ModelParams) -> ComplexMatrix {
    pauli::z().scale(C64::new(p.bz + 1.0, 0.0)) + pauli::x().scale(C64::new(SQRT_2 * p.bx, 0.0))
}

/// Columns of the `4 x 3` isometry taking triplet coordinates to the computational basis.
pub fn triplet_basis() -> [StateVector; 3] {
    [
        StateVector::basis(4, 0),
        StateVector::from_real(&[0.0, FRAC_1_SQRT_2, FRAC_1_SQRT_2, 0.0]).unwrap(),
        StateVector::basis(4, 3),
    ]
}

pub fn singlet() -> StateVector {
    StateVector::from_real(&[0.0, FRAC_1_SQRT_2, -FRAC_1_SQRT_2, 0.0]).unwrap()
}

pub fn embed_triplet(amps: &[C64; 3]) -> StateVector {
    let s = amps[1] * FRAC_1_SQRT_2;
    StateVector::new(&[amps[0], s, s, amps[2]]).unwrap()
}

/// Triplet coordinates of a four-dimensional state (the singlet part is dropped).
pub fn project_triplet(psi: &StateVector) -> [C64; 3] {
    [
        psi.get(0),
        (psi.get(1) + psi.get(2)) * FRAC_1_SQRT_2,
        psi.get(3),
    ]
}

/// Spectrum of the triplet block.
pub fn triplet_spectrum(p: ModelParams) -> SpectralData {
    hermitian_eig(&triplet_block(p)).expect("triplet block is Hermitian")
}

/// Instantaneous triplet eigenvectors embedded in the four-dimensional space,
/// ordered by ascending energy.
pub fn instantaneous_eigenstates(p: ModelParams) -> [StateVector; 3] {
    let spec = triplet_spectrum(p);
    let lift = |i: usize| {
        let v = spec.eigenvector(i);
        embed_triplet(&[v.get(0), v.get(1), v.get(2)])
    };
    [lift(0), lift(1), lift(2)]
}

/// Lowest triplet eigenvector, phased so its first non-vanishing amplitude is real positive.
pub fn ground_state(p: ModelParams) -> Result<GroundState> {
    let spec = triplet_spectrum(p);
    if spec.gap < DEGENERACY_GAP {
        return Err(Error::DegenerateGround { gap: spec.gap });
    }
    let v = spec.eigenvector(0);
    let pivot = (0..3)
        .map(|i| v.get(i))
        .find(|z| z.norm() > 1e-12)
        .expect("normalized eigenvector");
    let v = v.scale(pivot.conj() / pivot.norm());
    let clean = |z: C64| if z.im.abs() < 1e-15 { C64::new(z.re, 0.0) } else { z };
    Ok(GroundState {
        c0: clean(v.get(0)),
        cplus: clean(v.get(1)),
        c1: clean(v.get(2)),
        energy: spec.eigenvalues[0],
    })
}

/// `1 / (E₁ - E₀)` of the triplet block.
pub fn relaxation_time(p: ModelParams) -> Result<f64> {
    let gap = triplet_spectrum(p).gap;
    if gap <= CLOSED_GAP {
        return Err(Error::GapClosed { gap });
    }
    Ok(1.0 / gap)
}

/// Maximum relaxation time of the two-level model, `1/(2√2 B_x)`.
pub fn effective_tau0(bx: f64) -> f64 {
    1.0 / (2.0 * SQRT_2 * bx)
}

/// Relaxation time of the two-level model in rescaled form,
/// `τ₀/√(1+ε²)` with `ε = |B_z+1|/(√2 B_x)`.
pub fn effective_relaxation_time(p: ModelParams) -> Result<f64> {
    if p.bx <= 0.0 {
        return Err(Error::GapClosed { gap: 2.0 * (p.bz + 1.0).abs() });
    }
    let eps = (p.bz + 1.0).abs() / (SQRT_2 * p.bx);
    Ok(effective_tau0(p.bx) / (1.0 + eps * eps).sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::smallmat::{apply, inner, overlap_sqr};

    fn sorted_triplet_levels(bz: f64) -> Vec<f64> {
        let mut v = vec![1.0 + 2.0 * bz, -1.0, 1.0 - 2.0 * bz];
        v.sort_by(f64::total_cmp);
        v
    }

    #[test]
    fn ising_levels() {
        for bz in [0.0, -1.0, 2.0, 0.37] {
            let spec = triplet_spectrum(ModelParams { bx: 0.0, bz });
            for (a, b) in spec.eigenvalues.iter().zip(sorted_triplet_levels(bz)) {
                assert!((a - b).abs() < 1e-14);
            }
        }
        let h = ising_hamiltonian(0.0);
        for (i, e) in [(0usize, 1.0), (3, 1.0)] {
            let v = StateVector::basis(4, i);
            assert!((h.sandwich(&v, &v).unwrap().re - e).abs() < 1e-15);
        }
        let phi = triplet_basis()[1];
        assert!((h.sandwich(&phi, &phi).unwrap().re + 1.0).abs() < 1e-15);
    }

    #[test]
    fn strong_field_ground_is_11() {
        let g = ground_state(ModelParams { bx: 0.0, bz: 2.0 }).unwrap();
        assert!((g.c1.norm() - 1.0).abs() < 1e-14);
        assert!((g.energy + 3.0).abs() < 1e-14);
    }

    #[test]
    fn bell_and_product_grounds() {
        let g = ground_state(ModelParams { bx: 0.0, bz: 0.0 }).unwrap();
        assert_eq!(g.c0, C64::new(0.0, 0.0));
        assert!((g.cplus - C64::new(1.0, 0.0)).norm() < 1e-15);
        assert_eq!(g.c1, C64::new(0.0, 0.0));

        let g = ground_state(ModelParams { bx: 0.0, bz: -2.0 }).unwrap();
        assert_eq!(g.c0, C64::new(1.0, 0.0));
        assert_eq!(g.cplus.norm(), 0.0);
    }

    #[test]
    fn initial_overlap_at_minus_two() {
        let g = ground_state(ModelParams { bx: 0.1, bz: -2.0 }).unwrap();
        assert!(g.c0.norm_sqr() > 0.995);
        let g = ground_state(ModelParams { bx: 0.1, bz: -1.5 }).unwrap();
        assert!(g.c0.norm_sqr() > 0.98);
    }

    #[test]
    fn degenerate_ground_at_exact_crossing() {
        assert!(matches!(
            ground_state(ModelParams { bx: 0.0, bz: -1.0 }),
            Err(Error::DegenerateGround { .. })
        ));
        assert!(matches!(
            relaxation_time(ModelParams { bx: 0.0, bz: 1.0 }),
            Err(Error::GapClosed { .. })
        ));
    }

    #[test]
    fn zero_transverse_field_limit() {
        for bz in [-1.7, 0.0, 0.4] {
            let h = driven_hamiltonian(ModelParams { bx: 0.0, bz });
            assert_eq!(h, ising_hamiltonian(bz));
        }
        assert_eq!(
            effective_hamiltonian(ModelParams { bx: 0.0, bz: -1.0 }),
            ComplexMatrix::zeros(2)
        );
        let t = triplet_block(ModelParams { bx: 0.0, bz: 0.3 });
        assert_eq!(t, ComplexMatrix::real_diagonal(&[1.6, -1.0, 0.4]));
    }

    #[test]
    fn triplet_block_matches_projection() {
        let p = ModelParams { bx: 0.23, bz: -0.8 };
        let h = driven_hamiltonian(p);
        let t = triplet_block(p);
        let basis = triplet_basis();
        for r in 0..3 {
            for c in 0..3 {
                let v = h.sandwich(&basis[r], &basis[c]).unwrap();
                assert!((v - t.get(r, c)).norm() < 1e-14);
            }
        }
        assert_eq!(t.get(0, 2), C64::new(0.0, 0.0));
    }

    #[test]
    fn singlet_is_exact_eigenvector() {
        let p = ModelParams { bx: 0.17, bz: -0.45 };
        let s = singlet();
        let hs = apply(&driven_hamiltonian(p), &s).unwrap();
        assert!((inner(&s, &hs).unwrap() + 1.0).norm() < 1e-14);
        assert!((hs.norm_sqr() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn crossing_gap_and_tau0() {
        let p = ModelParams { bx: 0.1, bz: -1.0 };
        let eff = hermitian_eig(&effective_hamiltonian(p)).unwrap();
        assert!((eff.gap - 2.0 * SQRT_2 * 0.1).abs() < 1e-14);
        assert!((effective_relaxation_time(p).unwrap() - 3.5355339059327378).abs() < 1e-12);

        // the full triplet gap agrees to leading order in bx
        let gap = triplet_spectrum(p).gap;
        assert!((gap - 0.2828427).abs() < 0.01, "gap {gap}");
    }

    #[test]
    fn rescaled_tau_at_unit_distance() {
        let bx = 0.1;
        let p = ModelParams { bx, bz: -1.0 + SQRT_2 * bx };
        let tau = effective_relaxation_time(p).unwrap();
        assert!((tau - effective_tau0(bx) / SQRT_2).abs() < 1e-12);
    }

    #[test]
    fn effective_tau_matches_effective_gap() {
        for &(bx, bz) in &[(0.1, -1.3), (0.2, -0.6), (0.05, -1.02), (0.3, 0.4)] {
            let p = ModelParams { bx, bz };
            let gap = hermitian_eig(&effective_hamiltonian(p)).unwrap().gap;
            let tau = effective_relaxation_time(p).unwrap();
            assert!((tau - 1.0 / gap).abs() <= 1e-12 * tau.max(1.0));
        }
    }

    #[test]
    fn avoided_crossings_near_critical_fields() {
        let bx = 0.1;
        let grid: Vec<f64> = (0..=400).map(|i| -2.0 + 0.01 * i as f64).collect();
        let taus: Vec<f64> = grid
            .iter()
            .map(|&bz| relaxation_time(ModelParams { bx, bz }).unwrap())
            .collect();
        let argmax = |lo: f64, hi: f64| {
            grid.iter()
                .zip(&taus)
                .filter(|(b, _)| **b > lo && **b < hi)
                .max_by(|a, b| a.1.total_cmp(b.1))
                .map(|(b, _)| *b)
                .unwrap()
        };
        assert!((argmax(-2.0, -0.5) + 1.0).abs() < 0.05);
        assert!((argmax(0.5, 2.0) - 1.0).abs() < 0.05);
        // and they are local maxima: larger than the values half a unit away
        let at = |bz: f64| relaxation_time(ModelParams { bx, bz }).unwrap();
        assert!(at(-1.0) > at(-1.5) && at(-1.0) > at(-0.5));
        assert!(at(1.0) > at(1.5) && at(1.0) > at(0.5));
    }

    #[test]
    fn ground_state_continuity() {
        for bx in [0.05, 0.1, 0.2] {
            let mut prev = ground_state(ModelParams { bx, bz: -2.0 }).unwrap().to_state();
            for i in 1..=400 {
                let bz = -2.0 + 0.01 * i as f64;
                let g = ground_state(ModelParams { bx, bz }).unwrap().to_state();
                assert!(overlap_sqr(&prev, &g).unwrap() >= 0.99, "bx={bx} bz={bz}");
                prev = g;
            }
        }
    }

    #[test]
    fn ground_state_normalized_and_phase_fixed() {
        for &(bx, bz) in &[(0.1, -1.5), (0.2, 0.0), (0.05, 1.3)] {
            let g = ground_state(ModelParams { bx, bz }).unwrap();
            let n = g.c0.norm_sqr() + g.cplus.norm_sqr() + g.c1.norm_sqr();
            assert!((n - 1.0).abs() < 1e-12);
            assert!(g.c0.im == 0.0 && g.c0.re >= 0.0);
            // no |φ⁻⟩ component in the embedded state
            assert!(overlap_sqr(&singlet(), &g.to_state()).unwrap() < 1e-30);
        }
    }

    #[test]
    fn rejects_bad_params() {
        assert!(ModelParams::new(f64::NAN, 0.0).is_err());
        assert!(ModelParams::new(-0.1, 0.0).is_err());
        assert!(ModelParams::new(0.1, -1.5).is_ok());
    }
}
