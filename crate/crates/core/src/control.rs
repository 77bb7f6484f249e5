use crate::error::{Error, Result};
use crate::scalar::{rabs, Real};

/// One constant piece of a control: `u(t) = values` for `duration` time units.
#[derive(Clone, Debug, PartialEq)]
pub struct Segment<T> {
    pub duration: T,
    pub values: Vec<T>,
}

/// Ordered sequence of constant pieces starting at `t = 0`.
#[derive(Clone, Debug, PartialEq, Default)]
pub struct PiecewiseConstantControl<T> {
    segments: Vec<Segment<T>>,
}

impl<T: Real> PiecewiseConstantControl<T> {
    /// Validates non-negative finite durations, finite values and a common
    /// channel count.
    pub fn new(segments: Vec<Segment<T>>) -> Result<Self> {
        let channels = segments.first().map(|s| s.values.len());
        for (i, s) in segments.iter().enumerate() {
            if !s.duration.is_finite() || s.duration < T::zero() {
                return Err(Error::InvalidControl(format!(
                    "segment {} has duration {}",
                    i + 1,
                    s.duration
                )));
            }
            if Some(s.values.len()) != channels || s.values.is_empty() {
                return Err(Error::InvalidControl(format!(
                    "segment {} has {} channel values, expected {}",
                    i + 1,
                    s.values.len(),
                    channels.unwrap_or(0)
                )));
            }
            if s.values.iter().any(|v| !v.is_finite()) {
                return Err(Error::InvalidControl(format!("segment {} has a non-finite value", i + 1)));
            }
        }
        Ok(Self { segments })
    }

    /// The zero control on `[0, 0]`.
    pub fn empty() -> Self {
        Self { segments: Vec::new() }
    }

    /// Single-channel control from `(duration, value)` pairs.
    pub fn scalar(pieces: &[(T, T)]) -> Result<Self> {
        Self::new(
            pieces
                .iter()
                .map(|&(duration, v)| Segment {
                    duration,
                    values: vec![v],
                })
                .collect(),
        )
    }

    pub fn segments(&self) -> &[Segment<T>] {
        &self.segments
    }

    pub fn is_empty(&self) -> bool {
        self.segments.is_empty()
    }

    /// Channel count, `None` for the empty control.
    pub fn channels(&self) -> Option<usize> {
        self.segments.first().map(|s| s.values.len())
    }

    pub fn total_duration(&self) -> T {
        self.segments.iter().fold(T::zero(), |acc, s| acc + s.duration)
    }

    /// `Σ_l ∫ |u_l|`.
    pub fn l1_norm(&self) -> T {
        self.segments.iter().fold(T::zero(), |acc, s| acc + segment_l1(s))
    }

    /// `Σ_l ∫_0^t |u_l|`.
    pub fn l1_norm_until(&self, t: T) -> T {
        let mut acc = T::zero();
        let mut start = T::zero();
        for s in &self.segments {
            if t <= start {
                break;
            }
            let end = start + s.duration;
            if t >= end {
                acc += segment_l1(s);
            } else {
                let rate = s.values.iter().fold(T::zero(), |a, v| a + rabs(*v));
                acc += rate * (t - start);
            }
            start = end;
        }
        acc
    }

    /// Segment order reversed, values unchanged.
    pub fn reversed(&self) -> Self {
        Self {
            segments: self.segments.iter().rev().cloned().collect(),
        }
    }

    pub fn push(&mut self, segment: Segment<T>) -> Result<()> {
        if let Some(c) = self.channels() {
            if segment.values.len() != c {
                return Err(Error::InvalidControl(format!(
                    "segment has {} channel values, expected {c}",
                    segment.values.len()
                )));
            }
        }
        if !segment.duration.is_finite() || segment.duration < T::zero() {
            return Err(Error::InvalidControl(format!("duration {}", segment.duration)));
        }
        self.segments.push(segment);
        Ok(())
    }
}

fn segment_l1<T: Real>(s: &Segment<T>) -> T {
    s.values.iter().fold(T::zero(), |a, v| a + s.duration * rabs(*v))
}
