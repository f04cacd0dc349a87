//! Voltage programs: preset pulses, triangular sweeps, steps and holds.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Segment {
    /// Rectangular pulse at `amplitude` for `width`.
    PresetPulse { amplitude: f64, width: f64 },
    /// `cycles` periods of a triangle 0 → +A → 0 → −A → 0.
    Triangle { amplitude: f64, period: f64, cycles: u32 },
    /// Constant `amplitude` for `width`.
    Step { amplitude: f64, width: f64 },
    /// Constant `level` for `width`.
    Hold { level: f64, width: f64 },
}

impl Segment {
    pub fn duration(&self) -> f64 {
        match *self {
            Segment::PresetPulse { width, .. } | Segment::Step { width, .. } | Segment::Hold { width, .. } => width,
            Segment::Triangle { period, cycles, .. } => period * cycles as f64,
        }
    }

    /// Shortest feature of the segment, used to check the sample interval.
    fn shortest_feature(&self) -> f64 {
        match *self {
            Segment::Triangle { period, .. } => period,
            _ => self.duration(),
        }
    }

    /// Value at `tau` seconds after the segment start.
    fn value(&self, tau: f64) -> f64 {
        match *self {
            Segment::PresetPulse { amplitude, .. } | Segment::Step { amplitude, .. } => amplitude,
            Segment::Hold { level, .. } => level,
            Segment::Triangle { amplitude, period, .. } => {
                let phase = (tau / period).fract();
                let x = 4.0 * phase;
                amplitude
                    * if x <= 1.0 {
                        x
                    } else if x <= 3.0 {
                        2.0 - x
                    } else {
                        x - 4.0
                    }
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WaveformSpec {
    pub segments: Vec<Segment>,
    /// Sample interval [s].
    pub sample_interval: f64,
}

impl WaveformSpec {
    pub fn total_duration(&self) -> f64 {
        self.segments.iter().map(Segment::duration).sum()
    }

    pub fn validate(&self) -> Result<()> {
        if self.segments.is_empty() {
            return Err(Error::Usage("waveform has no segments".into()));
        }
        if !(self.sample_interval > 0.0 && self.sample_interval.is_finite()) {
            return Err(Error::invariant("waveform.sample_interval", "sample_interval > 0", self.sample_interval));
        }
        for (i, seg) in self.segments.iter().enumerate() {
            let d = seg.shortest_feature();
            if !(d > 0.0 && d.is_finite()) {
                return Err(Error::invariant(format!("waveform.segments[{i}]"), "width/period > 0", d));
            }
            if let Segment::Triangle { cycles: 0, .. } = seg {
                return Err(Error::invariant(format!("waveform.segments[{i}].cycles"), "cycles >= 1", 0));
            }
            if !(self.sample_interval < d / 20.0) {
                return Err(Error::invariant(
                    "waveform.sample_interval",
                    "sample_interval < shortest segment / 20",
                    self.sample_interval,
                ));
            }
        }
        Ok(())
    }

    /// Negated copy of the program (every amplitude and level flipped).
    pub fn negated(&self) -> Self {
        let segments = self
            .segments
            .iter()
            .map(|s| match *s {
                Segment::PresetPulse { amplitude, width } => Segment::PresetPulse { amplitude: -amplitude, width },
                Segment::Triangle { amplitude, period, cycles } => Segment::Triangle { amplitude: -amplitude, period, cycles },
                Segment::Step { amplitude, width } => Segment::Step { amplitude: -amplitude, width },
                Segment::Hold { level, width } => Segment::Hold { level: -level, width },
            })
            .collect();
        WaveformSpec { segments, sample_interval: self.sample_interval }
    }
}

/// Uniformly sampled voltage program starting at t = 0.
#[derive(Debug, Clone, PartialEq)]
pub struct SampledWaveform {
    pub dt: f64,
    pub values: Vec<f64>,
}

impl SampledWaveform {
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn time(&self, k: usize) -> f64 {
        k as f64 * self.dt
    }

    pub fn duration(&self) -> f64 {
        self.time(self.values.len().saturating_sub(1))
    }

    /// Linear interpolation between samples; clamps outside the program.
    pub fn at(&self, t: f64) -> f64 {
        let x = t / self.dt;
        if x <= 0.0 {
            return self.values[0];
        }
        let k = x.floor() as usize;
        if k + 1 >= self.values.len() {
            return *self.values.last().unwrap();
        }
        let frac = x - k as f64;
        let (a, b) = (self.values[k], self.values[k + 1]);
        a + (b - a) * frac
    }
}

/// Sample a waveform program. Each segment occupies `round(duration/dt)`
/// intervals; the sample at a segment boundary belongs to the later segment.
pub fn make_waveform(spec: &WaveformSpec) -> Result<SampledWaveform> {
    spec.validate()?;
    let dt = spec.sample_interval;
    let mut values = Vec::new();
    for seg in &spec.segments {
        let n = (seg.duration() / dt).round() as usize;
        for j in 0..n {
            values.push(seg.value(j as f64 * dt));
        }
    }
    // Closing sample: a triangle ends at zero, flat segments at their level.
    let last = *spec.segments.last().unwrap();
    values.push(match last {
        Segment::Triangle { .. } => 0.0,
        s => s.value(0.0),
    });
    Ok(SampledWaveform { dt, values })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn triangle_geometry() {
        let spec = WaveformSpec {
            segments: vec![Segment::Triangle { amplitude: 1.0, period: 1e-3, cycles: 1 }],
            sample_interval: 1e-6,
        };
        let w = make_waveform(&spec).unwrap();
        assert_eq!(w.len(), 1001);
        assert_eq!(w.values[0], 0.0);
        assert!((w.values[250] - 1.0).abs() < 1e-12);
        assert!(w.values[500].abs() < 1e-12);
        assert!((w.values[750] + 1.0).abs() < 1e-12);
        assert_eq!(w.values[1000], 0.0);
        let (kmax, _) = w.values.iter().enumerate().fold((0, f64::MIN), |a, (k, &v)| if v > a.1 { (k, v) } else { a });
        assert_eq!(kmax, 250);
    }

    #[test]
    fn preset_then_triangle() {
        let spec = WaveformSpec {
            segments: vec![
                Segment::PresetPulse { amplitude: -3.0, width: 10e-6 },
                Segment::Triangle { amplitude: 2.0, period: 100e-6, cycles: 2 },
            ],
            sample_interval: 0.1e-6,
        };
        let w = make_waveform(&spec).unwrap();
        assert_eq!(w.len(), 100 + 2000 + 1);
        assert!(w.values[..100].iter().all(|&v| v == -3.0));
        assert_eq!(w.values[100], 0.0);
        assert!((w.values[100 + 250] - 2.0).abs() < 1e-12);
        assert_eq!(*w.values.last().unwrap(), 0.0);
    }

    #[test]
    fn hold_is_flat() {
        let spec = WaveformSpec { segments: vec![Segment::Hold { level: 0.0, width: 1e-6 }], sample_interval: 1e-8 };
        assert!(make_waveform(&spec).unwrap().values.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn invalid_specs() {
        let coarse = WaveformSpec { segments: vec![Segment::Step { amplitude: 1.0, width: 1e-6 }], sample_interval: 1e-7 };
        assert!(make_waveform(&coarse).is_err());
        let zero = WaveformSpec { segments: vec![Segment::Step { amplitude: 1.0, width: 0.0 }], sample_interval: 1e-9 };
        assert!(make_waveform(&zero).is_err());
        let empty = WaveformSpec { segments: vec![], sample_interval: 1e-9 };
        assert!(make_waveform(&empty).is_err());
    }

    #[test]
    fn interpolation() {
        let w = SampledWaveform { dt: 1.0, values: vec![0.0, 2.0, -2.0] };
        assert_eq!(w.at(0.5), 1.0);
        assert_eq!(w.at(1.5), 0.0);
        assert_eq!(w.at(10.0), -2.0);
        assert_eq!(w.at(-1.0), 0.0);
    }
}
