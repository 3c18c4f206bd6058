use alloc::collections::VecDeque;
use alloc::vec::Vec;

use super::{PdResponse, SensingError};
use crate::lightfield::rem_euclid;

/// Timestamped ADC counts from one PD channel.
#[derive(Debug, Clone, PartialEq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ReadingTrace {
    pub timestamps: Vec<f64>,
    pub values: Vec<u32>,
}

impl ReadingTrace {
    pub fn new(timestamps: Vec<f64>, values: Vec<u32>) -> Result<Self, SensingError> {
        if timestamps.len() != values.len() {
            return Err(SensingError::Invalid(
                "timestamps and values differ in length",
            ));
        }
        if timestamps
            .windows(2)
            .any(|w| w[1].partial_cmp(&w[0]) != Some(core::cmp::Ordering::Greater))
        {
            return Err(SensingError::Invalid(
                "timestamps must be strictly increasing",
            ));
        }
        Ok(Self { timestamps, values })
    }

    /// Trace sampled at `t0 + i*dt`.
    pub fn uniform(t0: f64, dt: f64, values: Vec<u32>) -> Self {
        let timestamps = (0..values.len()).map(|i| t0 + i as f64 * dt).collect();
        Self { timestamps, values }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

/// Pulse period (s) of the reference height-sensor model. A placeholder: the
/// real sensor's pulse rate is not known.
pub const DEFAULT_INTERFERENCE_PERIOD: f64 = 0.1;

/// Rolling-min window (samples) spanning 1.5 interference periods, so every
/// window holds at least one pulse-off sample.
pub fn default_filter_window(period: f64, dt: f64) -> usize {
    (libm::ceil(1.5 * period / dt - 1e-9) as usize).max(1)
}

/// Square-pulse crosstalk from an onboard IR height sensor.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(deny_unknown_fields))]
pub struct InterferenceModel {
    /// Pulse height in au, converted to counts with the PD's ADC scale.
    pub amplitude: f64,
    pub period: f64,
    pub duty: f64,
    pub phase: f64,
}

impl InterferenceModel {
    /// 0.5 au pulses, 40 % duty, [`DEFAULT_INTERFERENCE_PERIOD`].
    pub fn reference() -> Self {
        Self {
            amplitude: 0.5,
            period: DEFAULT_INTERFERENCE_PERIOD,
            duty: 0.4,
            phase: 0.0,
        }
    }

    pub fn validate(&self) -> Result<(), SensingError> {
        if !(self.amplitude >= 0.0 && self.amplitude.is_finite()) {
            return Err(SensingError::Invalid("interference amplitude must be >= 0"));
        }
        if !(self.period > 0.0 && self.period.is_finite()) {
            return Err(SensingError::Invalid(
                "interference period must be positive",
            ));
        }
        if !(0.0..=1.0).contains(&self.duty) {
            return Err(SensingError::Invalid(
                "interference duty must lie in [0, 1]",
            ));
        }
        Ok(())
    }

    /// The pulse occupies the last `duty` fraction of each period.
    pub fn is_on(&self, t: f64) -> bool {
        if self.duty <= 0.0 {
            return false;
        }
        let frac = rem_euclid(t - self.phase, self.period) / self.period;
        frac >= 1.0 - self.duty - 1e-9
    }

    pub fn amplitude_counts(&self, resp: &PdResponse) -> u32 {
        resp.quantize(self.amplitude)
    }

    /// Additive offset in counts at time `t`.
    pub fn offset_counts(&self, t: f64, resp: &PdResponse) -> u32 {
        if self.is_on(t) {
            self.amplitude_counts(resp)
        } else {
            0
        }
    }
}

pub fn apply_interference(
    trace: &ReadingTrace,
    model: &InterferenceModel,
    resp: &PdResponse,
) -> ReadingTrace {
    let max = resp.max_count();
    let values = trace
        .timestamps
        .iter()
        .zip(&trace.values)
        .map(|(&t, &v)| v.saturating_add(model.offset_counts(t, resp)).min(max))
        .collect();
    ReadingTrace {
        timestamps: trace.timestamps.clone(),
        values,
    }
}

/// Trailing-window minimum: output `i` is the min of inputs `i+1-window ..= i`
/// (fewer at the start of the trace).
pub fn rolling_min_filter(
    trace: &ReadingTrace,
    window: usize,
) -> Result<ReadingTrace, SensingError> {
    let mut filt = RollingMin::new(window)?;
    let values = trace.values.iter().map(|&v| filt.push(v)).collect();
    Ok(ReadingTrace {
        timestamps: trace.timestamps.clone(),
        values,
    })
}

/// Streaming form of [`rolling_min_filter`], amortized O(1) per sample.
#[derive(Debug, Clone)]
pub struct RollingMin {
    window: usize,
    count: usize,
    // (sample index, value), values strictly increasing front to back
    queue: VecDeque<(usize, u32)>,
}

impl RollingMin {
    pub fn new(window: usize) -> Result<Self, SensingError> {
        if window == 0 {
            return Err(SensingError::ZeroWindow);
        }
        Ok(Self {
            window,
            count: 0,
            queue: VecDeque::with_capacity(window),
        })
    }

    pub fn window(&self) -> usize {
        self.window
    }

    pub fn push(&mut self, value: u32) -> u32 {
        while matches!(self.queue.back(), Some(&(_, v)) if v >= value) {
            self.queue.pop_back();
        }
        self.queue.push_back((self.count, value));
        self.count += 1;
        while let Some(&(i, _)) = self.queue.front() {
            if i + self.window < self.count {
                self.queue.pop_front();
            } else {
                break;
            }
        }
        self.queue.front().map_or(value, |&(_, v)| v)
    }

    /// True once a full window of samples has been seen since the last reset.
    pub fn is_warm(&self) -> bool {
        self.count >= self.window
    }

    pub fn reset(&mut self) {
        self.count = 0;
        self.queue.clear();
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    #[test]
    fn square_pulse_alternates() {
        let resp = PdResponse::default();
        let dt = 0.02;
        let model = InterferenceModel {
            amplitude: 50.0 / resp.counts_per_au(),
            period: 2.0 * dt,
            duty: 0.5,
            phase: 0.0,
        };
        let trace = ReadingTrace::uniform(0.0, dt, vec![100; 6]);
        let out = apply_interference(&trace, &model, &resp);
        assert_eq!(out.values, vec![100, 150, 100, 150, 100, 150]);
    }

    #[test]
    fn rolling_min_removes_spikes() {
        let trace = ReadingTrace::uniform(0.0, 0.02, vec![2, 9, 2, 2, 9, 2]);
        let out = rolling_min_filter(&trace, 2).unwrap();
        assert_eq!(out.values, vec![2; 6]);
    }

    #[test]
    fn zero_window_rejected() {
        let trace = ReadingTrace::uniform(0.0, 0.02, vec![1, 2]);
        assert_eq!(rolling_min_filter(&trace, 0), Err(SensingError::ZeroWindow));
    }

    #[test]
    fn streaming_matches_brute_force() {
        let data = [5u32, 3, 8, 1, 9, 9, 2, 7, 7, 4, 6, 0, 3];
        for w in 1..6 {
            let mut f = RollingMin::new(w).unwrap();
            for (i, &v) in data.iter().enumerate() {
                let lo = (i + 1).saturating_sub(w);
                assert_eq!(f.push(v), *data[lo..=i].iter().min().unwrap());
            }
        }
    }

    #[test]
    fn trace_rejects_non_monotonic_time() {
        assert!(ReadingTrace::new(vec![0.0, 0.0], vec![1, 1]).is_err());
        assert!(ReadingTrace::new(vec![0.0], vec![1, 1]).is_err());
    }
}
