use serde::{Deserialize, Serialize};

use super::propagator::SpectralPropagator;
use crate::error::{Error, Result};
use crate::operator::Operator;
use crate::scalar::Real;
use crate::system_model::PulseTag;

/// The 34 published coding timings, ns.
pub const PUBLISHED_TIMINGS: [f64; 34] = [
    3.9763, 6.4748, 4.2274, 3.6259, 2.8717, 3.6281, 7.2263, 6.4260, 4.8070, 5.0394, 6.5242, 4.8890, 4.2400, 7.3834,
    4.8653, 5.4799, 4.5341, 4.3099, 6.2959, 3.7346, 6.5293, 6.8586, 6.0749, 5.1213, 4.6806, 3.4985, 3.9909, 4.6701,
    4.5168, 6.4702, 4.7787, 5.3476, 3.4567, 3.8009,
];

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Pulse {
    pub tag: PulseTag,
    /// ns
    pub duration: f64,
}

/// Piecewise-constant control: an alternating list of A/B pulses.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PulseSequence {
    pulses: Vec<Pulse>,
}

impl PulseSequence {
    /// Validates positivity of durations and strict A/B alternation.
    pub fn new(pulses: Vec<Pulse>) -> Result<Self> {
        for (i, p) in pulses.iter().enumerate() {
            if !(p.duration.is_finite() && p.duration > 0.0) {
                return Err(Error::InvalidSequence(format!(
                    "pulse {} has non-positive duration {}",
                    i + 1,
                    p.duration
                )));
            }
        }
        if let Some(i) = pulses.windows(2).position(|w| w[0].tag == w[1].tag) {
            return Err(Error::InvalidSequence(format!("pulses {} and {} have the same tag", i + 1, i + 2)));
        }
        Ok(PulseSequence { pulses })
    }

    /// Alternating sequence beginning with `first`.
    pub fn alternating(first: PulseTag, durations: &[f64]) -> Result<Self> {
        let mut tag = first;
        let pulses = durations
            .iter()
            .map(|&duration| {
                let p = Pulse { tag, duration };
                tag = tag.other();
                p
            })
            .collect();
        PulseSequence::new(pulses)
    }

    /// Coding sequence: alternating, A first.
    pub fn coding(durations: &[f64]) -> Result<Self> {
        PulseSequence::alternating(PulseTag::A, durations)
    }

    /// The published 34-pulse coding sequence.
    pub fn published() -> Self {
        PulseSequence::coding(&PUBLISHED_TIMINGS).expect("valid timings")
    }

    pub fn pulses(&self) -> &[Pulse] {
        &self.pulses
    }

    pub fn len(&self) -> usize {
        self.pulses.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pulses.is_empty()
    }

    pub fn durations(&self) -> Vec<f64> {
        self.pulses.iter().map(|p| p.duration).collect()
    }

    pub fn total_duration(&self) -> f64 {
        self.pulses.iter().map(|p| p.duration).sum()
    }
}

/// A decoding recipe: pulses to apply in order, and whether the control
/// Hamiltonians must be negated (reversed B field and detunings).
#[derive(Clone, Debug, PartialEq)]
pub struct DecodedSequence {
    pub sequence: PulseSequence,
    pub negate_hamiltonians: bool,
}

/// Reverses a coding sequence. Each decoded pulse keeps the field geometry
/// of the forward pulse it undoes, so that with negated Hamiltonians the
/// product is exactly `U†`. For the A-first, B-last coding sequences the
/// decoded list therefore opens with the geometry of the last forward pulse,
/// run for `τ_n`.
pub fn decode_sequence(seq: &PulseSequence) -> DecodedSequence {
    let pulses = seq.pulses.iter().rev().copied().collect();
    DecodedSequence { sequence: PulseSequence { pulses }, negate_hamiltonians: true }
}

/// Ordered product `exp(-iH_{tag_n} τ_n) ... exp(-iH_{tag_1} τ_1)`.
pub fn sequence_propagator<T: Real>(seq: &PulseSequence, ha: &Operator<T>, hb: &Operator<T>) -> Result<Operator<T>> {
    ha.check_same_basis(hb)?;
    let pa = SpectralPropagator::new(ha)?;
    let pb = SpectralPropagator::new(hb)?;
    Ok(product_with(seq, &pa, &pb))
}

pub(crate) fn product_with<T: Real>(
    seq: &PulseSequence,
    pa: &SpectralPropagator<T>,
    pb: &SpectralPropagator<T>,
) -> Operator<T> {
    let mut u = Operator::identity(pa.basis()).into_matrix();
    for p in &seq.pulses {
        let step = match p.tag {
            PulseTag::A => pa.matrix_at(T::lit(p.duration)),
            PulseTag::B => pb.matrix_at(T::lit(p.duration)),
        };
        u = step * u;
    }
    Operator::new(pa.basis(), u).expect("same dimension")
}

/// Applies a decoded recipe: `sequence_propagator` with the Hamiltonians
/// negated when the recipe asks for it.
pub fn decoding_propagator<T: Real>(
    decoded: &DecodedSequence,
    ha: &Operator<T>,
    hb: &Operator<T>,
) -> Result<Operator<T>> {
    if decoded.negate_hamiltonians {
        sequence_propagator(&decoded.sequence, &-ha, &-hb)
    } else {
        sequence_propagator(&decoded.sequence, ha, hb)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::control::propagator::propagator;
    use crate::operator::Basis;

    fn pair() -> (Operator<f64>, Operator<f64>) {
        let ha = Operator::from_real_diagonal(Basis::Generic(2), &[0.3, -0.4]).unwrap();
        let m =
            nalgebra::DMatrix::from_row_slice(2, 2, &[0.0, 1.0, 1.0, 0.0].map(|x| num_complex::Complex::new(x, 0.0)));
        (ha, Operator::new(Basis::Generic(2), m).unwrap())
    }

    #[test]
    fn rejects_bad_sequences() {
        assert!(PulseSequence::coding(&[1.0, 0.0]).is_err());
        assert!(PulseSequence::coding(&[1.0, -2.0]).is_err());
        let same = vec![Pulse { tag: PulseTag::A, duration: 1.0 }, Pulse { tag: PulseTag::A, duration: 1.0 }];
        assert!(PulseSequence::new(same).is_err());
    }

    #[test]
    fn empty_and_single() {
        let (ha, hb) = pair();
        let e = sequence_propagator(&PulseSequence::coding(&[]).unwrap(), &ha, &hb).unwrap();
        assert!(e.max_distance(&Operator::identity(Basis::Generic(2))).unwrap() < 1e-15);
        let s = sequence_propagator(&PulseSequence::coding(&[0.9]).unwrap(), &ha, &hb).unwrap();
        assert!(s.max_distance(&propagator(&ha, 0.9).unwrap()).unwrap() < 1e-14);
    }

    #[test]
    fn single_pulse_decode() {
        let seq = PulseSequence::coding(&[2.5]).unwrap();
        let d = decode_sequence(&seq);
        assert_eq!(d.sequence.durations(), vec![2.5]);
        assert!(d.negate_hamiltonians);
    }

    #[test]
    fn published_decode_starts_with_last_timing() {
        let d = decode_sequence(&PulseSequence::published());
        assert_eq!(d.sequence.pulses()[0].duration, 3.8009);
        assert_eq!(d.sequence.len(), 34);
    }

    #[test]
    fn basis_mismatch_rejected() {
        let (ha, _) = pair();
        let hb = Operator::<f64>::identity(Basis::Multiplet { j: crate::spin_algebra::HalfInt::HALF });
        assert!(sequence_propagator(&PulseSequence::published(), &ha, &hb).is_err());
    }
}
