//! Few-photon linear optics in the Fock basis.
//!
//! Each spatial port carries an `H` and a `V` mode. States are stored as
//! sparse maps from occupation vectors to complex amplitudes, which is
//! plenty for the handful of photons the cross-checks need. Qubits are
//! dual-rail in polarization: `H` is `|0>` and `V` is `|1>`.
//!
//! Conventions:
//! - The PBS transmits `H` and reflects `V` with no reflection phase, so the
//!   `V` creation operators of the two ports are simply exchanged.
//! - The half-wave plate acts as a Hadamard: `H -> (H + V)/√2`,
//!   `V -> (H - V)/√2`.
//! - No mode holds more than two photons.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::pauli::{PauliString, StabilizerGroup};
use crate::planner::{Instruction, Schedule, ScheduleError};

pub const MAX_OCCUPANCY: u8 = 2;
pub const MAX_ORACLE_QUBITS: usize = 12;
const PRUNE: f64 = 1e-30;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum FockError {
    #[error("spatial port {0} is used twice")]
    DuplicateSpatial(usize),
    #[error("spatial port {0} is not part of the state")]
    UnknownSpatial(usize),
    #[error("states live on different modes")]
    ModeMismatch,
    #[error("state has zero norm")]
    ZeroNorm,
    #[error("mode occupancy would exceed {MAX_OCCUPANCY}")]
    OccupancyExceeded,
    #[error("{0} qubits exceed the dense-oracle limit of {MAX_ORACLE_QUBITS}")]
    TooManyQubits(usize),
    #[error("stabilizer projection vanished; generators are inconsistent")]
    Inconsistent,
    #[error(transparent)]
    Schedule(#[from] ScheduleError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Polarization {
    H,
    V,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ModeLabel {
    pub spatial: usize,
    pub polarization: Polarization,
}

impl ModeLabel {
    pub fn new(spatial: usize, polarization: Polarization) -> Self {
        Self {
            spatial,
            polarization,
        }
    }
}

type Occupation = Vec<u8>;

/// Pure (possibly subnormalized) state over a sorted list of modes.
#[derive(Debug, Clone, PartialEq)]
pub struct FockState {
    modes: Vec<ModeLabel>,
    amplitudes: BTreeMap<Occupation, Complex64>,
}

impl FockState {
    /// The vacuum on no modes.
    pub fn vacuum() -> Self {
        let mut amplitudes = BTreeMap::new();
        amplitudes.insert(Vec::new(), Complex64::new(1.0, 0.0));
        Self {
            modes: Vec::new(),
            amplitudes,
        }
    }

    /// One photon in the given mode, with the other polarization of the
    /// same port empty.
    pub fn single_photon(spatial: usize, polarization: Polarization) -> Self {
        let modes = vec![
            ModeLabel::new(spatial, Polarization::H),
            ModeLabel::new(spatial, Polarization::V),
        ];
        let occ = match polarization {
            Polarization::H => vec![1, 0],
            Polarization::V => vec![0, 1],
        };
        let mut amplitudes = BTreeMap::new();
        amplitudes.insert(occ, Complex64::new(1.0, 0.0));
        Self { modes, amplitudes }
    }

    /// `(|H_a H_b> + |V_a V_b>)/√2`.
    pub fn make_bell_pair(spatial_a: usize, spatial_b: usize) -> Result<Self, FockError> {
        if spatial_a == spatial_b {
            return Err(FockError::DuplicateSpatial(spatial_a));
        }
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let hh = Self::single_photon(spatial_a, Polarization::H)
            .tensor(&Self::single_photon(spatial_b, Polarization::H))?;
        let vv = Self::single_photon(spatial_a, Polarization::V)
            .tensor(&Self::single_photon(spatial_b, Polarization::V))?;
        let mut amplitudes = BTreeMap::new();
        for (occ, amp) in hh.amplitudes.into_iter().chain(vv.amplitudes) {
            amplitudes.insert(occ, amp * s);
        }
        Ok(Self {
            modes: hh.modes,
            amplitudes,
        })
    }

    /// Dual-rail encoding of an `n`-qubit vector; bit `q` of the basis index
    /// is qubit `q`, which lives on spatial port `q`.
    pub fn from_qubit_amplitudes(n: usize, amps: &[Complex64]) -> Result<Self, FockError> {
        if n > MAX_ORACLE_QUBITS {
            return Err(FockError::TooManyQubits(n));
        }
        assert_eq!(amps.len(), 1 << n, "amplitude vector must have 2^n entries");
        let modes = (0..n)
            .flat_map(|q| {
                [
                    ModeLabel::new(q, Polarization::H),
                    ModeLabel::new(q, Polarization::V),
                ]
            })
            .collect();
        let mut amplitudes = BTreeMap::new();
        for (k, &a) in amps.iter().enumerate() {
            if a.norm_sqr() <= PRUNE {
                continue;
            }
            let mut occ = vec![0u8; 2 * n];
            for q in 0..n {
                occ[2 * q + ((k >> q) & 1)] = 1;
            }
            amplitudes.insert(occ, a);
        }
        Ok(Self { modes, amplitudes })
    }

    pub fn modes(&self) -> &[ModeLabel] {
        &self.modes
    }

    pub fn amplitudes(&self) -> &BTreeMap<Vec<u8>, Complex64> {
        &self.amplitudes
    }

    pub fn spatial_ids(&self) -> BTreeSet<usize> {
        self.modes.iter().map(|m| m.spatial).collect()
    }

    pub fn amplitude(&self, occupation: &[u8]) -> Complex64 {
        self.amplitudes.get(occupation).copied().unwrap_or_default()
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes.values().map(|a| a.norm_sqr()).sum()
    }

    fn mode_index(&self, spatial: usize, polarization: Polarization) -> Result<usize, FockError> {
        self.modes
            .binary_search(&ModeLabel::new(spatial, polarization))
            .map_err(|_| FockError::UnknownSpatial(spatial))
    }

    /// Tensor product of states on disjoint ports.
    pub fn tensor(&self, other: &FockState) -> Result<FockState, FockError> {
        let mine = self.spatial_ids();
        if let Some(&dup) = other.spatial_ids().iter().find(|s| mine.contains(s)) {
            return Err(FockError::DuplicateSpatial(dup));
        }
        let mut modes: Vec<ModeLabel> = self.modes.iter().chain(&other.modes).copied().collect();
        modes.sort();
        let place = |m: &ModeLabel| modes.binary_search(m).expect("mode present");
        let left: Vec<usize> = self.modes.iter().map(place).collect();
        let right: Vec<usize> = other.modes.iter().map(place).collect();
        let mut amplitudes = BTreeMap::new();
        for (oa, aa) in &self.amplitudes {
            for (ob, ab) in &other.amplitudes {
                let mut occ = vec![0u8; modes.len()];
                for (i, &c) in oa.iter().enumerate() {
                    occ[left[i]] = c;
                }
                for (i, &c) in ob.iter().enumerate() {
                    occ[right[i]] = c;
                }
                amplitudes.insert(occ, aa * ab);
            }
        }
        Ok(FockState { modes, amplitudes })
    }

    /// PBS between two ports: `H` transmitted, `V` swapped between ports.
    pub fn apply_pbs(&self, spatial_a: usize, spatial_b: usize) -> Result<FockState, FockError> {
        if spatial_a == spatial_b {
            return Err(FockError::DuplicateSpatial(spatial_a));
        }
        let va = self.mode_index(spatial_a, Polarization::V)?;
        let vb = self.mode_index(spatial_b, Polarization::V)?;
        let amplitudes = self
            .amplitudes
            .iter()
            .map(|(occ, &amp)| {
                let mut out = occ.clone();
                out.swap(va, vb);
                (out, amp)
            })
            .collect();
        Ok(FockState {
            modes: self.modes.clone(),
            amplitudes,
        })
    }

    /// Half-wave plate acting as a Hadamard on one port.
    pub fn apply_hwp_hadamard(&self, spatial: usize) -> Result<FockState, FockError> {
        let ih = self.mode_index(spatial, Polarization::H)?;
        let iv = self.mode_index(spatial, Polarization::V)?;
        let mut amplitudes: BTreeMap<Occupation, Complex64> = BTreeMap::new();
        for (occ, &amp) in &self.amplitudes {
            let (nh, nv) = (occ[ih] as u32, occ[iv] as u32);
            let n = nh + nv;
            let norm = 1.0 / (factorial(nh) * factorial(nv)).sqrt() / 2f64.powf(n as f64 / 2.0);
            // (h + v)^nh (h - v)^nv expanded term by term.
            for j in 0..=nh {
                for k in 0..=nv {
                    let p = j + k;
                    let q = n - p;
                    if p > MAX_OCCUPANCY as u32 || q > MAX_OCCUPANCY as u32 {
                        return Err(FockError::OccupancyExceeded);
                    }
                    let sign = if (nv - k) % 2 == 0 { 1.0 } else { -1.0 };
                    let coeff = binomial(nh, j)
                        * binomial(nv, k)
                        * sign
                        * norm
                        * (factorial(p) * factorial(q)).sqrt();
                    let mut out = occ.clone();
                    out[ih] = p as u8;
                    out[iv] = q as u8;
                    *amplitudes.entry(out).or_default() += amp * coeff;
                }
            }
        }
        amplitudes.retain(|_, a| a.norm_sqr() > PRUNE);
        Ok(FockState {
            modes: self.modes.clone(),
            amplitudes,
        })
    }

    /// Keeps only configurations with exactly one photon in each listed port.
    /// Returns the success probability and the renormalized state (empty
    /// when the probability is zero).
    pub fn postselect_single_photon(
        &self,
        ports: &BTreeSet<usize>,
    ) -> Result<(f64, FockState), FockError> {
        let mut index = Vec::with_capacity(ports.len());
        for &p in ports {
            index.push((
                self.mode_index(p, Polarization::H)?,
                self.mode_index(p, Polarization::V)?,
            ));
        }
        let mut amplitudes: BTreeMap<Occupation, Complex64> = self
            .amplitudes
            .iter()
            .filter(|(occ, _)| index.iter().all(|&(h, v)| occ[h] + occ[v] == 1))
            .map(|(occ, &a)| (occ.clone(), a))
            .collect();
        let kept: f64 = amplitudes.values().map(|a| a.norm_sqr()).sum();
        let total = self.norm_sqr();
        let probability = if total > 0.0 { kept / total } else { 0.0 };
        if kept > 0.0 {
            let scale = 1.0 / kept.sqrt();
            for a in amplitudes.values_mut() {
                *a *= scale;
            }
        }
        Ok((
            probability,
            FockState {
                modes: self.modes.clone(),
                amplitudes,
            },
        ))
    }

    /// `<self|other>`.
    pub fn inner(&self, other: &FockState) -> Result<Complex64, FockError> {
        if self.modes != other.modes {
            return Err(FockError::ModeMismatch);
        }
        Ok(self
            .amplitudes
            .iter()
            .filter_map(|(occ, a)| other.amplitudes.get(occ).map(|b| a.conj() * b))
            .sum())
    }
}

/// `|<a|b>|^2 / (|a|^2 |b|^2)`.
pub fn fidelity(a: &FockState, b: &FockState) -> Result<f64, FockError> {
    let overlap = a.inner(b)?;
    let (na, nb) = (a.norm_sqr(), b.norm_sqr());
    if na <= PRUNE || nb <= PRUNE {
        return Err(FockError::ZeroNorm);
    }
    Ok((overlap.norm_sqr() / (na * nb)).clamp(0.0, 1.0))
}

fn factorial(n: u32) -> f64 {
    (1..=n).map(f64::from).product()
}

fn binomial(n: u32, k: u32) -> f64 {
    factorial(n) / (factorial(k) * factorial(n - k))
}

/// `out = g |v>` for a Pauli string on at most 64 qubits.
fn apply_pauli(g: &PauliString, v: &[Complex64]) -> Vec<Complex64> {
    let xm = g.x_words()[0];
    let zm = g.z_words()[0];
    let k0 = (g.phase() as u32 + (xm & zm).count_ones()) % 4;
    let base = Complex64::new(0.0, 1.0).powu(k0);
    let mut out = vec![Complex64::default(); v.len()];
    for (k, &a) in v.iter().enumerate() {
        let sign = if (zm & k as u64).count_ones().is_multiple_of(2) {
            1.0
        } else {
            -1.0
        };
        out[k ^ xm as usize] = base * a * sign;
    }
    out
}

/// Dense state vector of the stabilizer state, built by projecting a
/// generic vector with `Π (1 + g)/2`. The global phase is fixed so that the
/// first significant amplitude is real and positive.
pub fn qubit_amplitudes_from_stabilizers(s: &StabilizerGroup) -> Result<Vec<Complex64>, FockError> {
    let n = s.num_qubits();
    if n > MAX_ORACLE_QUBITS {
        return Err(FockError::TooManyQubits(n));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    let mut v: Vec<Complex64> = (0..1usize << n)
        .map(|_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
        .collect();
    for g in s.generators() {
        let gv = apply_pauli(g, &v);
        for (a, b) in v.iter_mut().zip(gv) {
            *a = (*a + b) * 0.5;
        }
    }
    let norm: f64 = v.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
    if norm < 1e-9 {
        return Err(FockError::Inconsistent);
    }
    let lead = v
        .iter()
        .find(|a| a.norm() > 1e-6 * norm)
        .copied()
        .ok_or(FockError::Inconsistent)?;
    let fix = lead.conj() / lead.norm() / norm;
    Ok(v.into_iter().map(|a| a * fix).collect())
}

/// The stabilizer state as a dual-rail `FockState` on ports `0..n`.
pub fn qubit_statevector_from_stabilizers(s: &StabilizerGroup) -> Result<FockState, FockError> {
    let amps = qubit_amplitudes_from_stabilizers(s)?;
    FockState::from_qubit_amplitudes(s.num_qubits(), &amps)
}

/// Runs a schedule optically: each pair is a Bell pair with a half-wave
/// plate on its second photon, each PBS gate is a PBS followed by
/// postselection on its two ports and a half-wave plate on `i2`.
/// Measurements are bookkeeping only. Ports are numbered like the tableau
/// qubits of [`crate::planner::execute_schedule`].
///
/// Returns the accumulated postselection probability and the final state;
/// qubits never created are left as `|+>` so the state matches the tableau.
pub fn run_schedule(schedule: &Schedule) -> Result<(f64, FockState), FockError> {
    let ids = schedule.qubit_ids()?;
    if ids.len() > MAX_ORACLE_QUBITS {
        return Err(FockError::TooManyQubits(ids.len()));
    }
    let port: HashMap<usize, usize> = ids.iter().enumerate().map(|(i, &q)| (q, i)).collect();
    let mut created: BTreeSet<usize> = BTreeSet::new();
    let mut state = FockState::vacuum();
    let mut pending: Vec<FockState> = Vec::new();
    let mut probability = 1.0;
    for ins in schedule.instructions() {
        match *ins {
            Instruction::CreatePair(a, b) => {
                let (pa, pb) = (port[&a], port[&b]);
                pending.push(FockState::make_bell_pair(pa, pb)?.apply_hwp_hadamard(pb)?);
                created.extend([pa, pb]);
            }
            Instruction::PbsGate(i1, i2) => {
                for p in pending.drain(..) {
                    state = state.tensor(&p)?;
                }
                let (p1, p2) = (port[&i1], port[&i2]);
                let ports: BTreeSet<usize> = [p1, p2].into();
                let (prob, kept) = state.apply_pbs(p1, p2)?.postselect_single_photon(&ports)?;
                probability *= prob;
                if prob == 0.0 {
                    return Ok((0.0, kept));
                }
                state = kept.apply_hwp_hadamard(p2)?;
            }
            Instruction::Hadamard(q) => {
                for p in pending.drain(..) {
                    state = state.tensor(&p)?;
                }
                state = state.apply_hwp_hadamard(port[&q])?;
            }
            Instruction::Measure(_) => {}
        }
    }
    for p in pending.drain(..) {
        state = state.tensor(&p)?;
    }
    for (i, _) in ids.iter().enumerate() {
        if !created.contains(&i) {
            let plus = FockState::single_photon(i, Polarization::H).apply_hwp_hadamard(i)?;
            state = state.tensor(&plus)?;
        }
    }
    Ok((probability, state))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{apply_pbs_gate, graph_to_stabilizers, Graph};

    const S: f64 = std::f64::consts::FRAC_1_SQRT_2;

    fn ports(ids: &[usize]) -> BTreeSet<usize> {
        ids.iter().copied().collect()
    }

    fn close(a: Complex64, b: f64) -> bool {
        (a - Complex64::new(b, 0.0)).norm() < 1e-12
    }

    #[test]
    fn bell_pair_amplitudes() {
        let bell = FockState::make_bell_pair(0, 1).unwrap();
        assert_eq!(bell.amplitudes().len(), 2);
        assert!(close(bell.amplitude(&[1, 0, 1, 0]), S));
        assert!(close(bell.amplitude(&[0, 1, 0, 1]), S));
        assert!(close(bell.inner(&bell).unwrap(), 1.0));
        let hv = FockState::single_photon(0, Polarization::H)
            .tensor(&FockState::single_photon(1, Polarization::V))
            .unwrap();
        assert!(close(bell.inner(&hv).unwrap(), 0.0));
        assert_eq!(
            FockState::make_bell_pair(3, 3),
            Err(FockError::DuplicateSpatial(3))
        );
    }

    #[test]
    fn pbs_routing() {
        let hh = FockState::single_photon(0, Polarization::H)
            .tensor(&FockState::single_photon(1, Polarization::H))
            .unwrap();
        assert_eq!(hh.apply_pbs(0, 1).unwrap(), hh);

        let hv = FockState::single_photon(0, Polarization::H)
            .tensor(&FockState::single_photon(1, Polarization::V))
            .unwrap();
        let out = hv.apply_pbs(0, 1).unwrap();
        // Both photons leave through port 0.
        assert!(close(out.amplitude(&[1, 1, 0, 0]), 1.0));
        let (p, _) = out.postselect_single_photon(&ports(&[0, 1])).unwrap();
        assert_eq!(p, 0.0);
        assert!(matches!(
            hv.apply_pbs(0, 9),
            Err(FockError::UnknownSpatial(9))
        ));
    }

    #[test]
    fn bell_pairs_through_pbs_succeed_half_the_time() {
        let state = FockState::make_bell_pair(1, 2)
            .unwrap()
            .tensor(&FockState::make_bell_pair(3, 4).unwrap())
            .unwrap();
        let out = state.apply_pbs(2, 3).unwrap();
        assert!((out.norm_sqr() - 1.0).abs() < 1e-12);
        let (p, kept) = out.postselect_single_photon(&ports(&[1, 2, 3, 4])).unwrap();
        assert!((p - 0.5).abs() < 1e-12);
        assert!((kept.norm_sqr() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn hwp_is_a_hadamard() {
        let h = FockState::single_photon(5, Polarization::H);
        let out = h.apply_hwp_hadamard(5).unwrap();
        assert!(close(out.amplitude(&[1, 0]), S));
        assert!(close(out.amplitude(&[0, 1]), S));
        let v = FockState::single_photon(5, Polarization::V)
            .apply_hwp_hadamard(5)
            .unwrap();
        assert!(close(v.amplitude(&[0, 1]), -S));
        let back = out.apply_hwp_hadamard(5).unwrap();
        assert!(close(back.amplitude(&[1, 0]), 1.0));
        assert_eq!(back.amplitudes().len(), 1);
        assert!(h.apply_hwp_hadamard(4).is_err());
    }

    #[test]
    fn hwp_on_two_photons_is_unitary() {
        // |1_H 1_V> -> (|2_H> - |2_V>)/√2 (Hong-Ou-Mandel-like bunching).
        let hv = FockState {
            modes: vec![
                ModeLabel::new(0, Polarization::H),
                ModeLabel::new(0, Polarization::V),
            ],
            amplitudes: [(vec![1, 1], Complex64::new(1.0, 0.0))].into(),
        };
        let out = hv.apply_hwp_hadamard(0).unwrap();
        assert!(close(out.amplitude(&[2, 0]), S));
        assert!(close(out.amplitude(&[0, 2]), -S));
        assert!(close(out.amplitude(&[1, 1]), 0.0));
        assert!((out.norm_sqr() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn bell_pair_with_hwp_is_two_qubit_graph_state() {
        let fock = FockState::make_bell_pair(0, 1)
            .unwrap()
            .apply_hwp_hadamard(1)
            .unwrap();
        let graph = Graph::from_edges(2, &[(0, 1)]).unwrap();
        let stab = qubit_statevector_from_stabilizers(&graph_to_stabilizers(&graph)).unwrap();
        assert!((fidelity(&fock, &stab).unwrap() - 1.0).abs() < 1e-12);
        // (|0+> + |1->)/√2 has amplitudes ±1/2 over the four basis states.
        for occ in [[1, 0, 1, 0], [1, 0, 0, 1], [0, 1, 1, 0]] {
            assert!(close(fock.amplitude(&occ), 0.5));
        }
        assert!(close(fock.amplitude(&[0, 1, 0, 1]), -0.5));
    }

    #[test]
    fn projector_identity_on_qubit_subspace() {
        // PBS + postselection maps |ab> to |ab> for a == b and to nothing otherwise.
        let pols = [Polarization::H, Polarization::V];
        for (i, &a) in pols.iter().enumerate() {
            for (j, &b) in pols.iter().enumerate() {
                let input = FockState::single_photon(0, a)
                    .tensor(&FockState::single_photon(1, b))
                    .unwrap();
                let out = input.apply_pbs(0, 1).unwrap();
                let (p, _) = out.postselect_single_photon(&ports(&[0, 1])).unwrap();
                let unnormalised: f64 = out
                    .amplitudes()
                    .iter()
                    .filter(|(o, _)| o[0] + o[1] == 1 && o[2] + o[3] == 1)
                    .map(|(_, a)| a.norm_sqr())
                    .sum();
                let expected = if i == j { 1.0 } else { 0.0 };
                assert_eq!(p, expected);
                assert_eq!(unnormalised, expected);
            }
        }
    }

    #[test]
    fn stabilizer_statevectors() {
        let plus = qubit_statevector_from_stabilizers(&StabilizerGroup::from_strs(&["X"]).unwrap())
            .unwrap();
        assert!(close(plus.amplitude(&[1, 0]), S));
        assert!(close(plus.amplitude(&[0, 1]), S));
        let zero = qubit_statevector_from_stabilizers(&StabilizerGroup::from_strs(&["Z"]).unwrap())
            .unwrap();
        assert!(close(zero.amplitude(&[1, 0]), 1.0));
        assert_eq!(zero.amplitudes().len(), 1);
        let minus_y =
            qubit_amplitudes_from_stabilizers(&StabilizerGroup::from_strs(&["-Y"]).unwrap())
                .unwrap();
        // -Y eigenstate (|0> - i|1>)/√2.
        assert!((minus_y[1] / minus_y[0] - Complex64::new(0.0, -1.0)).norm() < 1e-12);
    }

    #[test]
    fn star_from_optics_matches_stabilizers() {
        let mut state = FockState::make_bell_pair(0, 1)
            .unwrap()
            .apply_hwp_hadamard(1)
            .unwrap()
            .tensor(
                &FockState::make_bell_pair(2, 3)
                    .unwrap()
                    .apply_hwp_hadamard(3)
                    .unwrap(),
            )
            .unwrap();
        state = state.apply_pbs(1, 2).unwrap();
        let (p, kept) = state
            .postselect_single_photon(&ports(&[0, 1, 2, 3]))
            .unwrap();
        assert!((p - 0.5).abs() < 1e-12);
        let optical = kept.apply_hwp_hadamard(2).unwrap();

        let pairs = graph_to_stabilizers(&Graph::from_edges(4, &[(0, 1), (2, 3)]).unwrap());
        let out = apply_pbs_gate(&pairs, 1, 2).unwrap();
        let stab = qubit_statevector_from_stabilizers(out.group().unwrap()).unwrap();
        assert!(fidelity(&optical, &stab).unwrap() > 1.0 - 1e-10);
        let star =
            qubit_statevector_from_stabilizers(&graph_to_stabilizers(&Graph::star(4, 1).unwrap()))
                .unwrap();
        assert!(fidelity(&optical, &star).unwrap() > 1.0 - 1e-10);
    }

    #[test]
    fn fidelity_errors_and_bounds() {
        let h = FockState::single_photon(0, Polarization::H);
        let v = FockState::single_photon(0, Polarization::V);
        assert_eq!(fidelity(&h, &h).unwrap(), 1.0);
        assert_eq!(fidelity(&h, &v).unwrap(), 0.0);
        assert_eq!(
            fidelity(&h, &FockState::single_photon(1, Polarization::H)),
            Err(FockError::ModeMismatch)
        );
        let hv = h
            .tensor(&FockState::single_photon(1, Polarization::V))
            .unwrap();
        let (_, empty) = hv
            .apply_pbs(0, 1)
            .unwrap()
            .postselect_single_photon(&ports(&[0, 1]))
            .unwrap();
        assert_eq!(fidelity(&empty, &empty), Err(FockError::ZeroNorm));
    }

    #[test]
    fn too_many_qubits_rejected() {
        let big = StabilizerGroup::plus_state(13).unwrap();
        assert_eq!(
            qubit_statevector_from_stabilizers(&big),
            Err(FockError::TooManyQubits(13))
        );
    }
}
