//! Butterworth IIR design via bilinear transform, realized as cascaded
//! second-order sections.
//!
//! The design path mirrors the classical analog-prototype route: normalized
//! Butterworth poles, lowpass/bandpass/bandstop transform in the analog
//! domain with pre-warped edge frequencies, bilinear transform to the z
//! plane, then pole/zero pairing into real-coefficient biquads.

use num_complex::Complex64;
use std::f64::consts::PI;
use std::io::Write;

use crate::error::{Error, Result};

/// Filter kind with its cutoff edge(s) in Hz.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum FilterKind {
    Lowpass { cutoff_hz: f64 },
    Bandpass { low_hz: f64, high_hz: f64 },
    Bandstop { low_hz: f64, high_hz: f64 },
}

impl FilterKind {
    pub fn edges(&self) -> Vec<f64> {
        match *self {
            FilterKind::Lowpass { cutoff_hz } => vec![cutoff_hz],
            FilterKind::Bandpass { low_hz, high_hz } | FilterKind::Bandstop { low_hz, high_hz } => {
                vec![low_hz, high_hz]
            }
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            FilterKind::Lowpass { .. } => "lowpass",
            FilterKind::Bandpass { .. } => "bandpass",
            FilterKind::Bandstop { .. } => "bandstop",
        }
    }
}

/// A filter design request.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FilterSpec {
    pub kind: FilterKind,
    /// Prototype order (pole count doubles for bandpass/bandstop).
    pub order: usize,
    pub rate: f64,
}

pub const MAX_ORDER: usize = 16;

impl FilterSpec {
    pub fn new(kind: FilterKind, order: usize, rate: f64) -> Self {
        FilterSpec { kind, order, rate }
    }

    pub fn validate(&self) -> Result<()> {
        if self.order == 0 || self.order > MAX_ORDER {
            return Err(Error::design(format!(
                "order must be in 1..={MAX_ORDER}, got {}",
                self.order
            )));
        }
        if !(self.rate > 0.0) || !self.rate.is_finite() {
            return Err(Error::design(format!("rate must be positive, got {}", self.rate)));
        }
        let nyquist = self.rate / 2.0;
        for edge in self.kind.edges() {
            if !edge.is_finite() || edge <= 0.0 || edge >= nyquist {
                return Err(Error::design(format!(
                    "edge {edge} Hz must lie strictly inside (0, {nyquist}) Hz"
                )));
            }
        }
        if let FilterKind::Bandpass { low_hz, high_hz } | FilterKind::Bandstop { low_hz, high_hz } =
            self.kind
        {
            if low_hz >= high_hz {
                return Err(Error::design(format!(
                    "band edges must satisfy low < high, got ({low_hz}, {high_hz})"
                )));
            }
        }
        Ok(())
    }
}

/// One second-order section, denominator normalized to `a[0] = 1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Sos {
    pub b: [f64; 3],
    pub a: [f64; 3],
}

impl Sos {
    /// Radii of this section's poles.
    pub fn pole_radii(&self) -> [f64; 2] {
        let (a1, a2) = (self.a[1], self.a[2]);
        let disc = a1 * a1 - 4.0 * a2;
        if disc >= 0.0 {
            let s = disc.sqrt();
            [((-a1 + s) / 2.0).abs(), ((-a1 - s) / 2.0).abs()]
        } else {
            let r = a2.sqrt(); // complex pair: |p|^2 = a2
            [r, r]
        }
    }

    /// Complex response at normalized angular frequency `w` (rad/sample).
    pub fn response(&self, w: f64) -> Complex64 {
        let z1 = Complex64::from_polar(1.0, -w);
        let z2 = Complex64::from_polar(1.0, -2.0 * w);
        let num = self.b[0] + self.b[1] * z1 + self.b[2] * z2;
        let den = self.a[0] + self.a[1] * z1 + self.a[2] * z2;
        num / den
    }
}

/// An IIR filter as a cascade of second-order sections.
#[derive(Debug, Clone, PartialEq)]
pub struct DesignedFilter {
    pub sections: Vec<Sos>,
    pub spec: FilterSpec,
}

impl DesignedFilter {
    /// Total pole count of the cascade (the effective filter order).
    pub fn order(&self) -> usize {
        self.sections
            .iter()
            .map(|s| if s.a[2] == 0.0 && s.b[2] == 0.0 { 1 } else { 2 })
            .sum()
    }

    /// Complex frequency response at `freq_hz`.
    pub fn response_at(&self, freq_hz: f64) -> Complex64 {
        let w = 2.0 * PI * freq_hz / self.spec.rate;
        self.sections
            .iter()
            .fold(Complex64::new(1.0, 0.0), |acc, s| acc * s.response(w))
    }

    /// Magnitude response at `freq_hz`.
    pub fn magnitude_at(&self, freq_hz: f64) -> f64 {
        self.response_at(freq_hz).norm()
    }

    /// Largest pole radius across all sections.
    pub fn max_pole_radius(&self) -> f64 {
        self.sections
            .iter()
            .flat_map(|s| s.pole_radii())
            .fold(0.0, f64::max)
    }

    /// Writes one section per line: six space-separated coefficients
    /// `b0 b1 b2 a0 a1 a2`, full decimal precision.
    pub fn write_coefficients<W: Write>(&self, mut out: W) -> Result<()> {
        for s in &self.sections {
            writeln!(
                out,
                "{} {} {} {} {} {}",
                s.b[0], s.b[1], s.b[2], s.a[0], s.a[1], s.a[2]
            )?;
        }
        Ok(())
    }
}

/// Designs a digital Butterworth filter for `spec`.
///
/// Passband edges sit at -3 dB by the Butterworth definition; frequency
/// pre-warping makes that exact for the digital filter.
pub fn design_butterworth(spec: &FilterSpec) -> Result<DesignedFilter> {
    spec.validate()?;

    // Internal sampling convention fs = 2 (edges normalized to (0, 1)).
    let fs = 2.0;
    let warp = |f_hz: f64| {
        let wn = 2.0 * f_hz / spec.rate;
        2.0 * fs * (PI * wn / fs).tan()
    };

    let (zeros, poles, gain) = {
        let poles = butterworth_poles(spec.order);
        let zeros: Vec<Complex64> = Vec::new();
        match spec.kind {
            FilterKind::Lowpass { cutoff_hz } => lp_to_lp(&zeros, &poles, 1.0, warp(cutoff_hz)),
            FilterKind::Bandpass { low_hz, high_hz } => {
                let (wl, wh) = (warp(low_hz), warp(high_hz));
                lp_to_bp(&zeros, &poles, 1.0, (wl * wh).sqrt(), wh - wl)
            }
            FilterKind::Bandstop { low_hz, high_hz } => {
                let (wl, wh) = (warp(low_hz), warp(high_hz));
                lp_to_bs(&zeros, &poles, 1.0, (wl * wh).sqrt(), wh - wl)
            }
        }
    };

    let (zeros, poles, gain) = bilinear(&zeros, &poles, gain, fs);
    let sections = pair_into_sections(&zeros, &poles, gain)?;

    let filter = DesignedFilter {
        sections,
        spec: *spec,
    };
    if filter.max_pole_radius() >= 1.0 - 1e-12 {
        return Err(Error::design(format!(
            "unstable design: pole radius {} for {:?}",
            filter.max_pole_radius(),
            spec
        )));
    }
    Ok(filter)
}

/// Poles of the normalized analog Butterworth prototype (cutoff 1 rad/s).
fn butterworth_poles(order: usize) -> Vec<Complex64> {
    (0..order)
        .map(|k| {
            let theta = PI * (2.0 * k as f64 + order as f64 + 1.0) / (2.0 * order as f64);
            Complex64::from_polar(1.0, theta)
        })
        .collect()
}

type Zpk = (Vec<Complex64>, Vec<Complex64>, f64);

fn lp_to_lp(zeros: &[Complex64], poles: &[Complex64], gain: f64, w0: f64) -> Zpk {
    let degree = poles.len() - zeros.len();
    let z: Vec<_> = zeros.iter().map(|v| v * w0).collect();
    let p: Vec<_> = poles.iter().map(|v| v * w0).collect();
    (z, p, gain * w0.powi(degree as i32))
}

fn lp_to_bp(zeros: &[Complex64], poles: &[Complex64], gain: f64, w0: f64, bw: f64) -> Zpk {
    let degree = poles.len() - zeros.len();
    let shift = |v: Complex64| {
        let scaled = v * (bw / 2.0);
        let disc = (scaled * scaled - w0 * w0).sqrt();
        (scaled + disc, scaled - disc)
    };
    let mut z = Vec::with_capacity(zeros.len() * 2 + degree);
    for &v in zeros {
        let (a, b) = shift(v);
        z.push(a);
        z.push(b);
    }
    z.extend(std::iter::repeat(Complex64::new(0.0, 0.0)).take(degree));
    let mut p = Vec::with_capacity(poles.len() * 2);
    for &v in poles {
        let (a, b) = shift(v);
        p.push(a);
        p.push(b);
    }
    (z, p, gain * bw.powi(degree as i32))
}

fn lp_to_bs(zeros: &[Complex64], poles: &[Complex64], gain: f64, w0: f64, bw: f64) -> Zpk {
    let degree = poles.len() - zeros.len();
    let invert = |v: Complex64| (bw / 2.0) / v;
    let shift = |v: Complex64| {
        let disc = (v * v - w0 * w0).sqrt();
        (v + disc, v - disc)
    };

    let z_hp: Vec<_> = zeros.iter().map(|&v| invert(v)).collect();
    let p_hp: Vec<_> = poles.iter().map(|&v| invert(v)).collect();

    let mut z = Vec::with_capacity(zeros.len() * 2 + 2 * degree);
    for &v in &z_hp {
        let (a, b) = shift(v);
        z.push(a);
        z.push(b);
    }
    z.extend(std::iter::repeat(Complex64::new(0.0, w0)).take(degree));
    z.extend(std::iter::repeat(Complex64::new(0.0, -w0)).take(degree));

    let mut p = Vec::with_capacity(poles.len() * 2);
    for &v in &p_hp {
        let (a, b) = shift(v);
        p.push(a);
        p.push(b);
    }

    let num: Complex64 = zeros.iter().map(|z| -z).product();
    let den: Complex64 = poles.iter().map(|p| -p).product();
    (z, p, gain * (num / den).re)
}

/// Bilinear transform `s = 2 fs (z-1)/(z+1)` applied to a zpk triple.
fn bilinear(zeros: &[Complex64], poles: &[Complex64], gain: f64, fs: f64) -> Zpk {
    let fs2 = Complex64::new(2.0 * fs, 0.0);
    let degree = poles.len() - zeros.len();

    let mut z: Vec<_> = zeros.iter().map(|v| (fs2 + v) / (fs2 - v)).collect();
    z.extend(std::iter::repeat(Complex64::new(-1.0, 0.0)).take(degree));
    let p: Vec<_> = poles.iter().map(|v| (fs2 + v) / (fs2 - v)).collect();

    let num: Complex64 = zeros.iter().map(|v| fs2 - v).product();
    let den: Complex64 = poles.iter().map(|v| fs2 - v).product();
    (z, p, gain * (num / den).re)
}

/// Splits a conjugate-symmetric root set into upper-half-plane
/// representatives and real roots.
fn split_roots(roots: &[Complex64]) -> Result<(Vec<Complex64>, Vec<f64>)> {
    let mut uppers = Vec::new();
    let mut lowers = 0usize;
    let mut reals = Vec::new();
    for &r in roots {
        let tol = 1e-8 * (1.0 + r.norm());
        if r.im.abs() <= tol {
            reals.push(r.re);
        } else if r.im > 0.0 {
            uppers.push(r);
        } else {
            lowers += 1;
        }
    }
    if uppers.len() != lowers {
        return Err(Error::design(
            "root set is not conjugate-symmetric; cannot build real-coefficient sections",
        ));
    }
    Ok((uppers, reals))
}

/// Quadratic with roots at a conjugate pair represented by `r` (im > 0).
fn conj_pair_poly(r: Complex64) -> [f64; 3] {
    [1.0, -2.0 * r.re, r.norm_sqr()]
}

/// Quadratic with two real roots.
fn real_pair_poly(r1: f64, r2: f64) -> [f64; 3] {
    [1.0, -(r1 + r2), r1 * r2]
}

/// Pairs poles and zeros into second-order sections with the overall gain
/// spread evenly across sections. Poles closest to the unit circle are
/// placed in the last sections.
fn pair_into_sections(zeros: &[Complex64], poles: &[Complex64], gain: f64) -> Result<Vec<Sos>> {
    if zeros.len() != poles.len() {
        return Err(Error::design(format!(
            "expected matched zero/pole counts, got {}/{}",
            zeros.len(),
            poles.len()
        )));
    }
    let (mut zero_pairs, mut zero_reals) = split_roots(zeros)?;
    let (mut pole_pairs, mut pole_reals) = split_roots(poles)?;

    // Closest-to-unit-circle poles last.
    pole_pairs.sort_by(|a, b| a.norm().total_cmp(&b.norm()));
    pole_reals.sort_by(|a, b| a.abs().total_cmp(&b.abs()));
    if pole_reals.len() % 2 == 1 && zero_reals.is_empty() {
        return Err(Error::design(
            "odd real pole count with no real zero available",
        ));
    }

    // (denominator, pole location, is_first_order) per section. A leftover
    // single real pole becomes a first-order section at the front.
    let mut sections_plan: Vec<([f64; 3], Complex64, bool)> = Vec::new();
    if pole_reals.len() % 2 == 1 {
        let r = pole_reals.remove(0);
        sections_plan.push(([1.0, -r, 0.0], Complex64::new(r, 0.0), true));
    }
    while pole_reals.len() >= 2 {
        let r1 = pole_reals.remove(0);
        let r2 = pole_reals.remove(0);
        sections_plan.push((
            real_pair_poly(r1, r2),
            Complex64::new((r1 + r2) / 2.0, 0.0),
            false,
        ));
    }
    for &p in &pole_pairs {
        sections_plan.push((conj_pair_poly(p), p, false));
    }
    pole_pairs.clear();

    // Assign zeros per section: a first-order section takes the single real
    // zero nearest its pole; a biquad takes the nearest conjugate zero pair
    // if any remain, otherwise the widest-spread two real zeros (so +1/-1
    // pairs join in one section).
    let n_sections = sections_plan.len();
    let mut numerators: Vec<[f64; 3]> = Vec::with_capacity(n_sections);
    for (_, anchor, first_order) in &sections_plan {
        if *first_order {
            if let Some(idx) = (!zero_reals.is_empty()).then(|| nearest_real(&zero_reals, anchor.re)) {
                let r = zero_reals.remove(idx);
                numerators.push([1.0, -r, 0.0]);
            } else {
                numerators.push([1.0, 0.0, 0.0]);
            }
            continue;
        }
        if !zero_pairs.is_empty() {
            let idx = zero_pairs
                .iter()
                .enumerate()
                .min_by(|(_, a), (_, b)| {
                    (*a - anchor).norm().total_cmp(&(*b - anchor).norm())
                })
                .map(|(i, _)| i)
                .unwrap();
            let z = zero_pairs.remove(idx);
            numerators.push(conj_pair_poly(z));
        } else if zero_reals.len() >= 2 {
            zero_reals.sort_by(f64::total_cmp);
            let lo = zero_reals.remove(0);
            let hi = zero_reals.pop().unwrap();
            numerators.push(real_pair_poly(lo, hi));
        } else if let Some(r) = zero_reals.pop() {
            numerators.push([1.0, -r, 0.0]);
        } else {
            numerators.push([1.0, 0.0, 0.0]);
        }
    }
    let denominators: Vec<[f64; 3]> = sections_plan.iter().map(|(d, _, _)| *d).collect();

    let magnitude = gain.abs().powf(1.0 / n_sections as f64);
    let mut sections = Vec::with_capacity(n_sections);
    for (i, (mut b, a)) in numerators.into_iter().zip(denominators).enumerate() {
        let scale = if i == 0 && gain < 0.0 { -magnitude } else { magnitude };
        for c in &mut b {
            *c *= scale;
        }
        sections.push(Sos { b, a });
    }
    Ok(sections)
}

fn nearest_real(candidates: &[f64], target: f64) -> usize {
    candidates
        .iter()
        .enumerate()
        .min_by(|(_, a), (_, b)| (*a - target).abs().total_cmp(&(*b - target).abs()))
        .map(|(i, _)| i)
        .unwrap()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn db(x: f64) -> f64 {
        20.0 * x.log10()
    }

    #[test]
    fn prototype_poles_are_left_half_plane_unit_circle() {
        for order in 1..=16 {
            let poles = butterworth_poles(order);
            assert_eq!(poles.len(), order);
            for p in &poles {
                assert!(p.re < 1e-12, "pole {p} not in left half-plane");
                assert_relative_eq!(p.norm(), 1.0, epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn lowpass_dc_gain_is_one() {
        let spec = FilterSpec::new(FilterKind::Lowpass { cutoff_hz: 60.0 }, 4, 256.0);
        let f = design_butterworth(&spec).unwrap();
        assert_relative_eq!(f.magnitude_at(0.0), 1.0, epsilon = 1e-9);
    }

    #[test]
    fn lowpass_edge_is_minus_3_db() {
        let spec = FilterSpec::new(FilterKind::Lowpass { cutoff_hz: 60.0 }, 4, 256.0);
        let f = design_butterworth(&spec).unwrap();
        assert!((db(f.magnitude_at(60.0)) - (-3.0103)).abs() < 0.01);
    }

    #[test]
    fn bandpass_edges_are_minus_3_db() {
        let spec = FilterSpec::new(
            FilterKind::Bandpass { low_hz: 2.0, high_hz: 36.0 },
            8,
            256.0,
        );
        let f = design_butterworth(&spec).unwrap();
        assert_eq!(f.order(), 16);
        for edge in [2.0, 36.0] {
            let got = db(f.magnitude_at(edge));
            assert!((got - (-3.0103)).abs() < 0.1, "edge {edge}: {got} dB");
        }
        // Mid-band is flat, stopband is deep.
        assert!(db(f.magnitude_at(10.0)) > -0.1);
        assert!(db(f.magnitude_at(0.5)) < -40.0);
        assert!(db(f.magnitude_at(60.0)) < -40.0);
    }

    #[test]
    fn bandstop_rejects_center() {
        let spec = FilterSpec::new(
            FilterKind::Bandstop { low_hz: 48.0, high_hz: 52.0 },
            4,
            256.0,
        );
        let f = design_butterworth(&spec).unwrap();
        assert!(db(f.magnitude_at(50.0)) < -20.0);
        assert!(db(f.magnitude_at(10.0)) > -0.5);
        assert!(db(f.magnitude_at(100.0)) > -0.5);
        assert_relative_eq!(f.magnitude_at(0.0), 1.0, epsilon = 1e-6);
    }

    #[test]
    fn designed_sections_are_stable() {
        let specs = [
            FilterSpec::new(FilterKind::Lowpass { cutoff_hz: 60.0 }, 4, 256.0),
            FilterSpec::new(FilterKind::Bandstop { low_hz: 48.0, high_hz: 52.0 }, 4, 256.0),
            FilterSpec::new(FilterKind::Bandpass { low_hz: 2.0, high_hz: 36.0 }, 8, 256.0),
        ];
        for spec in specs {
            let f = design_butterworth(&spec).unwrap();
            assert!(
                f.max_pole_radius() < 1.0 - 1e-9,
                "{spec:?}: max radius {}",
                f.max_pole_radius()
            );
        }
    }

    #[test]
    fn odd_order_designs_work() {
        for kind in [
            FilterKind::Lowpass { cutoff_hz: 30.0 },
            FilterKind::Bandpass { low_hz: 4.0, high_hz: 40.0 },
            FilterKind::Bandstop { low_hz: 45.0, high_hz: 55.0 },
        ] {
            let f = design_butterworth(&FilterSpec::new(kind, 5, 256.0)).unwrap();
            assert!(f.max_pole_radius() < 1.0 - 1e-9, "{kind:?}");
            let expected_order = match kind {
                FilterKind::Lowpass { .. } => 5,
                _ => 10,
            };
            assert_eq!(f.order(), expected_order, "{kind:?}");
        }
    }

    #[test]
    fn invalid_specs_are_rejected() {
        let nyq_edge = FilterSpec::new(FilterKind::Lowpass { cutoff_hz: 128.0 }, 4, 256.0);
        assert!(design_butterworth(&nyq_edge).is_err());
        let reversed = FilterSpec::new(FilterKind::Bandpass { low_hz: 36.0, high_hz: 2.0 }, 4, 256.0);
        assert!(design_butterworth(&reversed).is_err());
        let zero_order = FilterSpec::new(FilterKind::Lowpass { cutoff_hz: 10.0 }, 0, 256.0);
        assert!(design_butterworth(&zero_order).is_err());
        let huge_order = FilterSpec::new(FilterKind::Lowpass { cutoff_hz: 10.0 }, 17, 256.0);
        assert!(design_butterworth(&huge_order).is_err());
    }

    #[test]
    fn coefficient_dump_has_six_columns_per_section() {
        let spec = FilterSpec::new(FilterKind::Lowpass { cutoff_hz: 60.0 }, 4, 256.0);
        let f = design_butterworth(&spec).unwrap();
        let mut buf = Vec::new();
        f.write_coefficients(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines.len(), f.sections.len());
        for line in lines {
            let fields: Vec<&str> = line.split_whitespace().collect();
            assert_eq!(fields.len(), 6);
            // Round-trips at full precision.
            let vals: Vec<f64> = fields.iter().map(|s| s.parse().unwrap()).collect();
            assert_eq!(vals[3], 1.0);
        }
    }
}
