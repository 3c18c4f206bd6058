use core::f64::consts::{FRAC_PI_2, TAU};
use core::fmt;

use alloc::collections::VecDeque;
use alloc::vec::Vec;

use super::{GuidanceParams, LayoutError, PdLayout};
use crate::lightfield::{rem_euclid, Vec3};

/// Largest angular gap a full yaw sweep may leave (350° coverage).
const MAX_SWEEP_GAP: f64 = TAU - 350.0 * core::f64::consts::PI / 180.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepError {
    TooFewSamples,
    InsufficientSpan,
    NoSignal,
}

impl fmt::Display for SweepError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SweepError::TooFewSamples => "too few sweep samples",
            SweepError::InsufficientSpan => "sweep does not cover the required angular span",
            SweepError::NoSignal => "no signal: sweep profile is flat",
        })
    }
}

#[cfg(feature = "std")]
impl std::error::Error for SweepError {}

/// Bounded (time, counts) history of one signal.
#[derive(Debug, Clone, PartialEq)]
pub struct IntensityHistory {
    capacity: usize,
    samples: VecDeque<(f64, f64)>,
}

impl IntensityHistory {
    pub const DEFAULT_CAPACITY: usize = 256;

    pub fn new(capacity: usize) -> Self {
        let capacity = capacity.max(2);
        Self {
            capacity,
            samples: VecDeque::with_capacity(capacity),
        }
    }

    /// Appends a sample; samples not later than the newest are ignored.
    pub fn push(&mut self, t: f64, counts: f64) -> bool {
        if matches!(self.samples.back(), Some(&(last, _)) if t <= last) {
            return false;
        }
        if self.samples.len() == self.capacity {
            self.samples.pop_front();
        }
        self.samples.push_back((t, counts));
        true
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn clear(&mut self) {
        self.samples.clear();
    }

    pub fn iter(&self) -> impl DoubleEndedIterator<Item = (f64, f64)> + ExactSizeIterator + '_ {
        self.samples.iter().copied()
    }

    pub fn latest(&self) -> Option<(f64, f64)> {
        self.samples.back().copied()
    }
}

impl Default for IntensityHistory {
    fn default() -> Self {
        Self::new(Self::DEFAULT_CAPACITY)
    }
}

/// Intensity-weighted sum of the PD bearing vectors, normalized.
///
/// Returns `Ok(None)` when the sum is below `min_signal` (balanced array).
/// Motorized mounts take part with their fixed offset.
pub fn arpd_direction(
    readings: &[f64],
    layout: &PdLayout,
    yaw: f64,
    min_signal: f64,
) -> Result<Option<Vec3>, LayoutError> {
    if readings.len() != layout.len() {
        return Err(LayoutError::LengthMismatch);
    }
    let mut v = Vec3::ZERO;
    let mut norms = 0.0;
    let mut count = 0usize;
    for (m, &r) in layout.mounts.iter().zip(readings) {
        if let Some(u) = m.offset.horizontal().try_normalized() {
            v += u.rotate_z(yaw) * r;
            norms += 1.0;
            count += 1;
        }
    }
    if count == 0 {
        return Ok(None);
    }
    let threshold = min_signal * norms / count as f64;
    if v.norm() < threshold {
        return Ok(None);
    }
    Ok(v.try_normalized())
}

/// |Σ rᵢ·uᵢ| / Σ rᵢ over the array's unit bearing vectors: 0 for a balanced
/// array, growing with the intensity gradient across it.
pub fn relative_imbalance(readings: &[f64], layout: &PdLayout) -> f64 {
    let mut v = Vec3::ZERO;
    let mut total = 0.0;
    for (m, &r) in layout.mounts.iter().zip(readings) {
        if let Some(u) = m.offset.horizontal().try_normalized() {
            v += u * r;
            total += r;
        }
    }
    if total > 0.0 {
        v.norm() / total
    } else {
        0.0
    }
}

/// |Σ rᵢ·uᵢ| / max rᵢ: the array's summed pull in units of its brightest
/// reading. Unlike [`relative_imbalance`] this grows with the PD count.
pub fn array_pull(readings: &[f64], layout: &PdLayout) -> f64 {
    let mut v = Vec3::ZERO;
    let mut peak = 0.0f64;
    for (m, &r) in layout.mounts.iter().zip(readings) {
        if let Some(u) = m.offset.horizontal().try_normalized() {
            v += u * r;
            peak = peak.max(r);
        }
    }
    if peak > 0.0 {
        v.norm() / peak
    } else {
        0.0
    }
}

/// Bearing (in [0, 2π)) of the strongest direction in a yaw sweep.
///
/// Samples are sorted by angle and smoothed with a 3-tap circular moving
/// mean. Equal smoothed maxima are split by the raw reading, then by the
/// smallest angle.
pub fn spd_sweep_direction(samples: &[(f64, f64)], min_signal: f64) -> Result<f64, SweepError> {
    if samples.len() < 8 {
        return Err(SweepError::TooFewSamples);
    }
    let mut sorted: Vec<(f64, f64)> = samples
        .iter()
        .map(|&(a, v)| (rem_euclid(a, TAU), v))
        .collect();
    sorted.sort_by(|a, b| a.0.total_cmp(&b.0));
    let n = sorted.len();
    let gap = (0..n)
        .map(|i| {
            if i + 1 < n {
                sorted[i + 1].0 - sorted[i].0
            } else {
                sorted[0].0 + TAU - sorted[i].0
            }
        })
        .fold(0.0, f64::max);
    if gap > MAX_SWEEP_GAP + 1e-9 {
        return Err(SweepError::InsufficientSpan);
    }
    let (lo, hi) = min_max(sorted.iter().map(|s| s.1));
    if hi - lo < min_signal {
        return Err(SweepError::NoSignal);
    }
    let smooth = |i: usize| (sorted[(i + n - 1) % n].1 + sorted[i].1 + sorted[(i + 1) % n].1) / 3.0;
    let mut best = 0;
    let mut best_val = smooth(0);
    for i in 1..n {
        let v = smooth(i);
        let tied = (v - best_val).abs() <= 1e-12 * best_val.abs();
        if (!tied && v > best_val) || (tied && sorted[i].1 > sorted[best].1) {
            best = i;
            best_val = v;
        }
    }
    Ok(sorted[best].0)
}

/// Tilt with the largest reading; ties go to the smaller (more side-facing) tilt.
pub fn polar_sweep_best_tilt(samples: &[(f64, f64)], min_signal: f64) -> Result<f64, SweepError> {
    if samples.len() < 5 {
        return Err(SweepError::TooFewSamples);
    }
    let (tmin, tmax) = min_max(samples.iter().map(|s| s.0));
    if tmin > 1e-6 || tmax < FRAC_PI_2 - 1e-6 {
        return Err(SweepError::InsufficientSpan);
    }
    let (lo, hi) = min_max(samples.iter().map(|s| s.1));
    if hi - lo < min_signal {
        return Err(SweepError::NoSignal);
    }
    let mut best = samples[0];
    for &s in &samples[1..] {
        if s.1 > best.1 || (s.1 == best.1 && s.0 < best.0) {
            best = s;
        }
    }
    Ok(best.0)
}

/// Raises the motorized tilt in proportion to the latest relative intensity
/// increase. The tilt never decreases here.
pub fn tilt_schedule(tilt: f64, history: &IntensityHistory, params: &GuidanceParams) -> f64 {
    let mut it = history.iter().rev();
    let (Some((_, now)), Some((_, prev))) = (it.next(), it.next()) else {
        return tilt;
    };
    let rise = if prev > 0.0 {
        ((now - prev) / prev).max(0.0)
    } else {
        0.0
    };
    (tilt + params.tilt_gain * rise).clamp(0.0, FRAC_PI_2)
}

/// True when both downward PDs beat the motorized one by the switch margin.
pub fn switch_check(motorized: f64, downward: [f64; 2], params: &GuidanceParams) -> bool {
    let low = downward[0].min(downward[1]);
    low >= params.min_signal && low > motorized * (1.0 + params.switch_margin)
}

/// (max − min) / max, or 0 for an all-dark array.
pub fn relative_spread(readings: &[f64]) -> f64 {
    let (lo, hi) = min_max(readings.iter().copied());
    if hi > 0.0 {
        (hi - lo) / hi
    } else {
        0.0
    }
}

pub fn equal_intensity_check(readings: &[f64], params: &GuidanceParams) -> bool {
    if readings.iter().filter(|&&r| r >= params.min_signal).count() < 2 {
        return false;
    }
    relative_spread(readings) <= params.equal_tol
}

/// Flags a step jump in intensity that a log-linear trend over the previous
/// `barrier_window` samples cannot explain.
pub fn detect_barrier(history: &IntensityHistory, params: &GuidanceParams) -> bool {
    let w = params.barrier_window;
    let n = history.len();
    if n < w + 2 {
        return false;
    }
    let Some((t_new, newest)) = history.latest() else {
        return false;
    };
    let fit: Vec<(f64, f64)> = history
        .iter()
        .skip(n - 1 - w)
        .take(w)
        .map(|(t, v)| (t, libm::log(v.max(1.0))))
        .collect();
    let wf = w as f64;
    let tm = fit.iter().map(|p| p.0).sum::<f64>() / wf;
    let ym = fit.iter().map(|p| p.1).sum::<f64>() / wf;
    let sxx: f64 = fit.iter().map(|p| (p.0 - tm) * (p.0 - tm)).sum();
    let sxy: f64 = fit.iter().map(|p| (p.0 - tm) * (p.1 - ym)).sum();
    let slope = if sxx > 0.0 { sxy / sxx } else { 0.0 };
    let predicted = libm::exp(ym + slope * (t_new - tm));
    newest > params.barrier_ratio * predicted && newest - predicted > params.min_signal
}

fn min_max(values: impl Iterator<Item = f64>) -> (f64, f64) {
    values.fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| {
        (lo.min(v), hi.max(v))
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lightfield::{Emitter, Environment, LightSource};
    use crate::sensing::{pd_signal, PdResponse, Pose};
    use alloc::vec;

    fn params() -> GuidanceParams {
        GuidanceParams {
            equal_tol: 0.05,
            ..GuidanceParams::default()
        }
    }

    fn history(values: &[f64]) -> IntensityHistory {
        let mut h = IntensityHistory::new(64);
        for (i, &v) in values.iter().enumerate() {
            h.push(i as f64 * 0.02, v);
        }
        h
    }

    #[test]
    fn balanced_arrays_cancel() {
        for n in [3, 6] {
            let layout = PdLayout::arpd(n, 0.04, PdResponse::default());
            let r = vec![500.0; n];
            assert_eq!(arpd_direction(&r, &layout, 0.7, 3.0).unwrap(), None);
        }
    }

    #[test]
    fn single_lit_pd_sets_direction() {
        let layout = PdLayout::arpd(6, 0.04, PdResponse::default());
        let mut r = vec![0.0; 6];
        r[3] = 1.0;
        let d = arpd_direction(&r, &layout, 0.0, 0.5).unwrap().unwrap();
        assert!((d - Vec3::new(-1.0, 0.0, 0.0)).norm() < 1e-12);
        assert!(arpd_direction(&r[..5], &layout, 0.0, 0.5).is_err());
    }

    #[test]
    fn arpd3_points_toward_bulb() {
        let env = Environment::open(Emitter::Bulb(
            LightSource::bulb(Vec3::ZERO, 1.0, 1.0).unwrap(),
        ));
        let resp = PdResponse::default();
        let layout = PdLayout::arpd(3, 0.04, resp);
        let pose = Pose {
            position: Vec3::new(0.3, 0.0, 1.0),
            yaw: 0.0,
        };
        let r: Vec<f64> = layout
            .mounts
            .iter()
            .map(|m| resp.quantize(pd_signal(m, &resp, &pose, &env)) as f64)
            .collect();
        let d = arpd_direction(&r, &layout, 0.0, 3.0).unwrap().unwrap();
        let g = env.field_gradient(pose.position).horizontal().normalized();
        let angle = libm::acos(d.dot(g).clamp(-1.0, 1.0));
        assert!(angle < 15f64.to_radians(), "{angle}");
        assert!(d.dot(Vec3::new(-1.0, 0.0, 0.0)) > libm::cos(15f64.to_radians()));
    }

    fn profile(n: usize, f: impl Fn(f64) -> f64) -> Vec<(f64, f64)> {
        (0..n)
            .map(|i| {
                let a = TAU * i as f64 / n as f64;
                (a, f(a))
            })
            .collect()
    }

    #[test]
    fn sweep_examples() {
        let impulse = profile(72, |a| {
            if (a - FRAC_PI_2).abs() < 1e-9 {
                100.0
            } else {
                0.0
            }
        });
        assert!((spd_sweep_direction(&impulse, 3.0).unwrap() - FRAC_PI_2).abs() < 1e-12);
        let peak = 237f64.to_radians();
        let cosine = profile(200, |a| 1000.0 * (1.0 + libm::cos(a - peak)));
        let got = spd_sweep_direction(&cosine, 3.0).unwrap();
        assert!((got - peak).abs() <= TAU / 200.0, "{got}");
        assert_eq!(
            spd_sweep_direction(&profile(72, |_| 7.0), 3.0),
            Err(SweepError::NoSignal)
        );
        let half: Vec<_> = profile(72, |a| a)
            .into_iter()
            .filter(|s| s.0 < 3.0)
            .collect();
        assert_eq!(
            spd_sweep_direction(&half, 3.0),
            Err(SweepError::InsufficientSpan)
        );
        assert_eq!(
            spd_sweep_direction(&impulse[..5], 3.0),
            Err(SweepError::TooFewSamples)
        );
    }

    #[test]
    fn polar_examples() {
        let tilts: Vec<f64> = GuidanceParams::default().polar_tilts().collect();
        let s: Vec<_> = tilts.iter().map(|&t| (t, 100.0 - 50.0 * t)).collect();
        assert_eq!(polar_sweep_best_tilt(&s, 3.0).unwrap(), 0.0);
        let tie: Vec<_> = tilts
            .iter()
            .map(|&t| (t, if t > 0.5 { 90.0 } else { 10.0 }))
            .collect();
        assert!((polar_sweep_best_tilt(&tie, 3.0).unwrap() - tilts[2]).abs() < 1e-12);
        let flat: Vec<_> = tilts.iter().map(|&t| (t, 5.0)).collect();
        assert_eq!(polar_sweep_best_tilt(&flat, 3.0), Err(SweepError::NoSignal));
    }

    #[test]
    fn tilt_schedule_examples() {
        let p = GuidanceParams {
            tilt_gain: 0.8,
            ..params()
        };
        assert_eq!(tilt_schedule(0.3, &history(&[100.0, 100.0]), &p), 0.3);
        assert!((tilt_schedule(0.3, &history(&[100.0, 110.0]), &p) - 0.38).abs() < 1e-12);
        assert_eq!(
            tilt_schedule(FRAC_PI_2, &history(&[100.0, 200.0]), &p),
            FRAC_PI_2
        );
        assert_eq!(tilt_schedule(0.3, &history(&[100.0, 50.0]), &p), 0.3);
    }

    #[test]
    fn switch_and_equal_examples() {
        let p = params();
        assert!(switch_check(100.0, [120.0, 130.0], &p));
        assert!(!switch_check(100.0, [105.0, 130.0], &p));
        assert!(!switch_check(0.0, [0.0, 0.0], &p));
        assert!(equal_intensity_check(&[1000.0, 1000.0, 1000.0], &p));
        assert!(equal_intensity_check(&[1000.0, 960.0, 980.0], &p));
        assert!(!equal_intensity_check(&[1000.0, 900.0, 980.0], &p));
    }

    #[test]
    fn barrier_examples() {
        let p = params();
        let ramp: Vec<f64> = (0..30).map(|i| 10.0 * libm::pow(1.1, i as f64)).collect();
        for k in p.barrier_window + 2..=ramp.len() {
            assert!(
                !detect_barrier(&history(&ramp[..k]), &p),
                "false positive at {k}"
            );
        }
        let mut spiked = ramp.clone();
        spiked[20] *= 5.0;
        assert!(detect_barrier(&history(&spiked[..21]), &p));
        assert!(!detect_barrier(&history(&[400.0; 30]), &p));
    }

    #[test]
    fn history_is_bounded_and_monotonic() {
        let mut h = IntensityHistory::new(4);
        for i in 0..10 {
            h.push(i as f64, i as f64);
        }
        assert_eq!(h.len(), 4);
        assert!(!h.push(5.0, 1.0));
        assert_eq!(h.latest(), Some((9.0, 9.0)));
    }
}
