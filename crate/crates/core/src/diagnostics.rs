//! Monte-Carlo estimates of `mu(A_n^(q)) / mu(U_n)` and of short-return sums.
//!
//! Samples are drawn from the invariant measure conditioned on the exceedance
//! set `U_n = {phi > u_n}`. When the set is a thin tube around a segment or a
//! neighbourhood of a synchrony subspace it is sampled directly with its exact
//! mass; otherwise plain rejection from the invariant measure is used.
//!
//! The dynamics is run without additive noise: these quantities describe the
//! deterministic map.

use rand::Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::evt::quantile;
use crate::geometry::{segment_distance_xy, wrap_unit, LineSegment, TorusPoint};
use crate::observables::Observable;
use crate::parallel::try_map_indexed;
use crate::rng::{stream, StreamRng};
use crate::systems::{realization_series, StateVector, System};

pub const MIN_SAMPLES: usize = 10_000;
const BATCH: usize = 2_048;
const CALIBRATION_STREAM: u64 = u64::MAX - 1;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DiagnosticsOptions {
    /// `U_n = {phi > u_n(tau)}`.
    pub tau: f64,
    pub calibration_len: usize,
    pub burn_in: usize,
    /// Rejection sampling gives up after this many draws per requested sample.
    pub max_draws_per_sample: usize,
}

impl Default for DiagnosticsOptions {
    fn default() -> Self {
        DiagnosticsOptions { tau: 1.0, calibration_len: 1_000_000, burn_in: 1_000, max_draws_per_sample: 10_000 }
    }
}

/// How exceedance samples are produced.
#[derive(Debug, Clone, PartialEq)]
enum Sampler {
    /// Stadium `{d(x, L) < delta}` on `T^2`, area `2 delta l + pi delta^2`.
    Tube { seg: LineSegment, delta: f64 },
    /// Each block within `delta` of its own diagonal, other sites free.
    Sync { m: usize, blocks: Vec<Vec<usize>>, delta: f64 },
    Rejection,
}

impl Sampler {
    fn name(&self) -> &'static str {
        match self {
            Sampler::Tube { .. } => "tube",
            Sampler::Sync { .. } => "synchrony",
            Sampler::Rejection => "rejection",
        }
    }

    /// Exact `mu(U_n)` when known in closed form.
    fn mass(&self) -> Option<f64> {
        match self {
            Sampler::Tube { seg, delta } => {
                Some(2.0 * delta * seg.length() + std::f64::consts::PI * delta * delta)
            }
            Sampler::Sync { blocks, delta, .. } => Some(
                blocks
                    .iter()
                    .map(|b| {
                        let k = b.len();
                        k as f64 * (2.0 * delta).powi(k as i32 - 1) * box_acceptance(k - 1)
                    })
                    .product(),
            ),
            Sampler::Rejection => None,
        }
    }
}

/// Irwin-Hall CDF of the sum of `n` uniforms on `[0, 1]`.
fn irwin_hall_cdf(n: usize, x: f64) -> f64 {
    if x <= 0.0 {
        return 0.0;
    }
    if x >= n as f64 {
        return 1.0;
    }
    let mut s = 0.0;
    let mut binom = 1.0;
    let mut fact = 1.0;
    for i in 1..=n {
        fact *= i as f64;
    }
    for j in 0..=(x.floor() as usize) {
        if j > 0 {
            binom *= (n - j + 1) as f64 / j as f64;
        }
        let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
        s += sign * binom * (x - j as f64).powi(n as i32);
    }
    s / fact
}

/// `P(|p_1 + ... + p_n| < 1)` for `p_i` uniform on `(-1, 1)`.
fn box_acceptance(n: usize) -> f64 {
    if n == 0 {
        return 1.0;
    }
    let h = n as f64 / 2.0;
    irwin_hall_cdf(n, h + 0.5) - irwin_hall_cdf(n, h - 0.5)
}

fn parallel_segment_gap(seg: &LineSegment) -> f64 {
    // distance from the segment to its non-trivial lattice translates
    let (p1, p2) = (seg.p1(), seg.p2());
    let mut best = f64::INFINITY;
    for kx in -1i32..=1 {
        for ky in -1i32..=1 {
            if kx == 0 && ky == 0 {
                continue;
            }
            let k = [kx as f64, ky as f64];
            let shifted = LineSegment::new([p1[0] + k[0], p1[1] + k[1]], seg.direction(), seg.length())
                .expect("translate of a valid segment");
            for e in [p1, p2] {
                best = best.min(point_segment_plane(e, &shifted));
            }
            for e in [shifted.p1(), shifted.p2()] {
                best = best.min(point_segment_plane(e, seg));
            }
        }
    }
    best
}

fn point_segment_plane(x: [f64; 2], s: &LineSegment) -> f64 {
    let p = s.p1();
    let d = s.direction();
    let w = [x[0] - p[0], x[1] - p[1]];
    let t = (w[0] * d[0] + w[1] * d[1]).clamp(0.0, s.length());
    (w[0] - t * d[0]).hypot(w[1] - t * d[1])
}

fn choose_sampler(system: &System, obs: &Observable, delta: f64) -> Sampler {
    let on_t2 = matches!(system, System::Toral { .. } | System::Iid { dim: 2 });
    match obs {
        Observable::NegLogSegment(seg) | Observable::OneMinusSegment(seg)
            if on_t2 && seg.length() < 1.0 && parallel_segment_gap(seg) > 2.0 * delta =>
        {
            Sampler::Tube { seg: *seg, delta }
        }
        Observable::NegLogPerp if delta < 0.25 && !matches!(system, System::Billiard(_)) => Sampler::Sync {
            m: system.state_dim(),
            blocks: vec![(0..system.state_dim()).collect()],
            delta,
        },
        Observable::NegLogBlockPerp(blocks) if delta < 0.25 => {
            Sampler::Sync { m: system.state_dim(), blocks: blocks.clone(), delta }
        }
        _ => Sampler::Rejection,
    }
}

/// One exceedance sample and the number of invariant draws it cost.
fn draw_exceedance(
    sampler: &Sampler,
    system: &System,
    obs: &Observable,
    u: f64,
    budget: usize,
    rng: &mut StreamRng,
) -> Result<(StateVector, usize)> {
    match sampler {
        Sampler::Tube { seg, delta } => {
            let l = seg.length();
            let area = 2.0 * delta * l + std::f64::consts::PI * delta * delta;
            let d = seg.direction();
            let nrm = [-d[1], d[0]];
            loop {
                let xy = if rng.random::<f64>() * area < 2.0 * delta * l {
                    let t = rng.random::<f64>() * l;
                    let s = (2.0 * rng.random::<f64>() - 1.0) * delta;
                    let p = seg.point_at(t);
                    [p[0] + s * nrm[0], p[1] + s * nrm[1]]
                } else {
                    let (w, _) = uniform_disk(*delta, rng);
                    let base = if w[0] * d[0] + w[1] * d[1] < 0.0 { seg.p1() } else { seg.p2() };
                    [base[0] + w[0], base[1] + w[1]]
                };
                let x = [wrap_unit(xy[0]), wrap_unit(xy[1])];
                // measure-zero boundary cases
                if segment_distance_xy(x, seg) < *delta {
                    return Ok((StateVector::Torus(TorusPoint::new(x.to_vec())?), 1));
                }
            }
        }
        Sampler::Sync { m, blocks, delta } => {
            let mut x: Vec<f64> = (0..*m).map(|_| rng.random::<f64>()).collect();
            for b in blocks {
                let c: f64 = rng.random();
                let k = b.len();
                let p = loop {
                    let mut p: Vec<f64> = (0..k - 1).map(|_| (2.0 * rng.random::<f64>() - 1.0) * delta).collect();
                    let last = -p.iter().sum::<f64>();
                    if last.abs() < *delta {
                        p.push(last);
                        break p;
                    }
                };
                for (site, pk) in b.iter().zip(p) {
                    x[*site] = wrap_unit(c + pk);
                }
            }
            let s = StateVector::Torus(TorusPoint::new(x)?);
            debug_assert!(obs.eval(&s) > u || obs.distance(&s) >= *delta * (1.0 - 1e-12));
            Ok((s, 1))
        }
        Sampler::Rejection => {
            for k in 1..=budget {
                let s = system.sample_invariant(rng);
                if obs.eval(&s) > u {
                    return Ok((s, k));
                }
            }
            Err(Error::InsufficientSamples(format!(
                "no exceedance of {u} within {budget} draws from the invariant measure"
            )))
        }
    }
}

fn uniform_disk(r: f64, rng: &mut StreamRng) -> ([f64; 2], f64) {
    loop {
        let w = [2.0 * rng.random::<f64>() - 1.0, 2.0 * rng.random::<f64>() - 1.0];
        let n2 = w[0] * w[0] + w[1] * w[1];
        if n2 < 1.0 {
            return ([w[0] * r, w[1] * r], n2.sqrt() * r);
        }
    }
}

/// The calibrated threshold and exceedance set.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExceedanceSet {
    pub n: usize,
    pub tau: f64,
    pub threshold: f64,
    /// Distance to the extremal set at the threshold.
    pub delta: f64,
}

/// `u_n(tau)` as the `1 - tau/n` quantile of a noise-free orbit.
pub fn calibrate(system: &System, obs: &Observable, n: usize, seed: u64, opts: &DiagnosticsOptions) -> Result<ExceedanceSet> {
    if !(opts.tau > 0.0 && opts.tau < n as f64) {
        return Err(Error::Domain(format!("tau must lie in (0, n), got {}", opts.tau)));
    }
    let det = system.without_noise();
    let mut rng = stream(seed, CALIBRATION_STREAM);
    let series = realization_series(&det, obs, opts.calibration_len, opts.burn_in, &mut rng)?;
    let u = quantile(&series, 1.0 - opts.tau / n as f64)?;
    if !u.is_finite() {
        return Err(Error::InsufficientSamples("calibration orbit sits on the extremal set".into()));
    }
    Ok(ExceedanceSet { n, tau: opts.tau, threshold: u, delta: obs.distance_at(u) })
}

/// Exceedance samples with the flags `phi(T^j x) > u` for `j = 1..=horizon`.
struct Batch {
    flags: Vec<Vec<bool>>,
    draws: usize,
}

#[allow(clippy::too_many_arguments)]
fn run_batches(
    system: &System,
    obs: &Observable,
    set: &ExceedanceSet,
    sampler: &Sampler,
    horizon: usize,
    samples: usize,
    seed: u64,
    opts: &DiagnosticsOptions,
) -> Result<Vec<Batch>> {
    let det = system.without_noise();
    let n_batches = samples.div_ceil(BATCH);
    try_map_indexed(n_batches, |b| -> Result<Batch> {
        let mut rng = stream(seed, b as u64);
        let count = BATCH.min(samples - b * BATCH);
        let budget = opts.max_draws_per_sample.saturating_mul(count).max(1);
        let mut used = 0usize;
        let mut flags = Vec::with_capacity(count);
        for _ in 0..count {
            let (mut x, k) = draw_exceedance(sampler, &det, obs, set.threshold, budget - used.min(budget - 1), &mut rng)?;
            used += k;
            let mut f = Vec::with_capacity(horizon);
            for _ in 0..horizon {
                det.step(&mut x, &mut rng)?;
                f.push(obs.eval(&x) > set.threshold);
            }
            flags.push(f);
        }
        Ok(Batch { flags, draws: used })
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AqReport {
    pub q: usize,
    pub n: usize,
    pub threshold: f64,
    pub delta: f64,
    pub ratio: f64,
    pub stderr: f64,
    pub samples: usize,
    pub sampler: String,
}

/// `mu(phi > u_n, phi o T <= u_n, ..., phi o T^q <= u_n) / mu(phi > u_n)`.
pub fn aq_ratio(
    system: &System,
    obs: &Observable,
    q: usize,
    n: usize,
    samples: usize,
    seed: u64,
    opts: &DiagnosticsOptions,
) -> Result<AqReport> {
    let set = calibrate(system, obs, n, seed, opts)?;
    aq_ratio_at(system, obs, q, &set, samples, seed, opts)
}

/// As [`aq_ratio`] with a given exceedance set.
pub fn aq_ratio_at(
    system: &System,
    obs: &Observable,
    q: usize,
    set: &ExceedanceSet,
    samples: usize,
    seed: u64,
    opts: &DiagnosticsOptions,
) -> Result<AqReport> {
    let sampler = choose_sampler(system, obs, set.delta);
    let mut report = AqReport {
        q,
        n: set.n,
        threshold: set.threshold,
        delta: set.delta,
        ratio: 1.0,
        stderr: 0.0,
        samples: 0,
        sampler: sampler.name().to_string(),
    };
    if q == 0 {
        return Ok(report);
    }
    if samples < MIN_SAMPLES {
        return Err(Error::InsufficientSamples(format!(
            "{samples} exceedance samples requested, need at least {MIN_SAMPLES}"
        )));
    }
    let batches = run_batches(system, obs, set, &sampler, q, samples, seed, opts)?;
    let escaped = batches.iter().flat_map(|b| &b.flags).filter(|f| !f.iter().any(|e| *e)).count();
    let p = escaped as f64 / samples as f64;
    report.ratio = p;
    report.stderr = (p * (1.0 - p) / samples as f64).sqrt();
    report.samples = samples;
    Ok(report)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReturnEstimate {
    pub j: usize,
    pub estimate: f64,
    pub stderr: f64,
    pub count: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReturnSumReport {
    pub n: usize,
    /// 0 for `U_n`, otherwise the events are `A_n^(q)`.
    pub q: usize,
    pub j_range: (usize, usize),
    pub per_j_estimates: Vec<ReturnEstimate>,
    /// `n * sum_j estimate_j`.
    pub weighted_total: f64,
    pub weighted_total_stderr: f64,
    pub mu_u: f64,
    pub mu_u_stderr: f64,
    pub threshold: f64,
    pub delta: f64,
    pub samples: usize,
    pub sampler: String,
}

/// `mu(E ∩ T^-j E)` for `E = U_n` (q = 0) or `E = A_n^(q)`, `j` from `q + 1` to `j_max`.
#[allow(clippy::too_many_arguments)]
pub fn short_return_sum(
    system: &System,
    obs: &Observable,
    n: usize,
    j_max: usize,
    samples: usize,
    seed: u64,
    q: usize,
    opts: &DiagnosticsOptions,
) -> Result<ReturnSumReport> {
    let set = calibrate(system, obs, n, seed, opts)?;
    short_return_sum_at(system, obs, &set, j_max, samples, seed, q, opts)
}

#[allow(clippy::too_many_arguments)]
pub fn short_return_sum_at(
    system: &System,
    obs: &Observable,
    set: &ExceedanceSet,
    j_max: usize,
    samples: usize,
    seed: u64,
    q: usize,
    opts: &DiagnosticsOptions,
) -> Result<ReturnSumReport> {
    if samples < MIN_SAMPLES {
        return Err(Error::Domain(format!("short-return sums need at least {MIN_SAMPLES} samples")));
    }
    let j_min = q + 1;
    if j_max < j_min {
        return Err(Error::Domain(format!("j_max must be at least {j_min}")));
    }
    let sampler = choose_sampler(system, obs, set.delta);
    let horizon = j_max + q;
    let batches = run_batches(system, obs, set, &sampler, horizon, samples, seed, opts)?;
    let (mu_u, mu_se) = match sampler.mass() {
        Some(m) => (m, 0.0),
        None => {
            let draws: usize = batches.iter().map(|b| b.draws).sum();
            let p = samples as f64 / draws as f64;
            (p, (p * (1.0 - p) / draws as f64).sqrt())
        }
    };
    // flags[j - 1] is the exceedance at time j; in_a(j) asks whether T^j x is in A^(q)
    let in_a = |f: &[bool], j: usize| -> bool {
        let exceed = j == 0 || f[j - 1];
        exceed && (j + 1..=j + q).all(|i| !f[i - 1])
    };
    let mut counts = vec![0usize; j_max + 1];
    for f in batches.iter().flat_map(|b| &b.flags) {
        if !in_a(f, 0) {
            continue;
        }
        for (j, c) in counts.iter_mut().enumerate().skip(j_min) {
            if in_a(f, j) {
                *c += 1;
            }
        }
    }
    let ns = samples as f64;
    let per_j: Vec<ReturnEstimate> = (j_min..=j_max)
        .map(|j| {
            let p = counts[j] as f64 / ns;
            ReturnEstimate {
                j,
                estimate: mu_u * p,
                stderr: mu_u * (p * (1.0 - p) / ns).sqrt(),
                count: counts[j],
            }
        })
        .collect();
    let total: f64 = per_j.iter().map(|e| e.estimate).sum();
    // returns at different lags come from the same samples; bound with the summed count
    let hits: usize = counts.iter().sum();
    let pt = hits as f64 / ns;
    Ok(ReturnSumReport {
        n: set.n,
        q,
        j_range: (j_min, j_max),
        per_j_estimates: per_j,
        weighted_total: set.n as f64 * total,
        weighted_total_stderr: set.n as f64 * mu_u * (pt / ns).sqrt(),
        mu_u,
        mu_u_stderr: mu_se,
        threshold: set.threshold,
        delta: set.delta,
        samples,
        sampler: sampler.name().to_string(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::systems::SystemSpec;

    #[test]
    fn irwin_hall_values() {
        assert!((box_acceptance(1) - 1.0).abs() < 1e-15);
        // sum of two U(-1,1) has a triangular density on (-2, 2)
        assert!((box_acceptance(2) - 0.75).abs() < 1e-12);
        assert!((irwin_hall_cdf(3, 1.5) - 0.5).abs() < 1e-12);
    }

    #[test]
    fn tube_mass_and_membership() {
        let sys = System::cat_map();
        let seg = LineSegment::centered([0.2, 0.4], [0.3, 0.7], 0.5).unwrap();
        let obs = Observable::NegLogSegment(seg);
        let s = choose_sampler(&sys, &obs, 1e-3);
        assert_eq!(s.name(), "tube");
        let mut rng = stream(1, 1);
        for _ in 0..1000 {
            let (x, _) = draw_exceedance(&s, &sys, &obs, -(1e-3f64).ln(), 10, &mut rng).unwrap();
            assert!(obs.distance(&x) < 1e-3);
        }
        // mass check by rejection: a large tube so plain sampling sees it
        let big = Sampler::Tube { seg, delta: 0.05 };
        let m = big.mass().unwrap();
        let hits = (0..200_000)
            .filter(|_| {
                let x = [rng.random::<f64>(), rng.random::<f64>()];
                segment_distance_xy(x, &seg) < 0.05
            })
            .count() as f64
            / 200_000.0;
        assert!((hits - m).abs() < 4.0 * (m * (1.0 - m) / 200_000.0).sqrt(), "{hits} vs {m}");
        assert_eq!(
            choose_sampler(&sys, &Observable::NegLogSegment(LineSegment::new([0.0, 0.5], [1.0, 0.0], 0.999).unwrap()), 1e-3),
            Sampler::Rejection
        );
    }

    #[test]
    fn sync_mass_matches_rejection() {
        let sys = SystemSpec::Coupled { m: 3, gamma: 0.1, slope: 3.0, noise: 0.0 }.build().unwrap();
        let obs = Observable::NegLogPerp;
        let delta = 0.08;
        let s = choose_sampler(&sys, &obs, delta);
        let m = s.mass().unwrap();
        let mut rng = stream(2, 0);
        let n = 400_000;
        let hits = (0..n).filter(|_| obs.distance(&sys.sample_invariant(&mut rng)) < delta).count() as f64 / n as f64;
        assert!((hits - m).abs() < 4.0 * (m / n as f64).sqrt(), "{hits} vs {m}");
        for _ in 0..1000 {
            let (x, _) = draw_exceedance(&s, &sys, &obs, -delta.ln(), 1, &mut rng).unwrap();
            assert!(obs.distance(&x) < delta);
        }
    }

    #[test]
    fn q_zero_is_exactly_one() {
        let sys = SystemSpec::Coupled { m: 2, gamma: 0.1, slope: 3.0, noise: 0.01 }.build().unwrap();
        let o = DiagnosticsOptions { calibration_len: 100_000, ..Default::default() };
        let r = aq_ratio(&sys, &Observable::NegLogPerp, 0, 1000, 0, 1, &o).unwrap();
        assert_eq!(r.ratio, 1.0);
        assert!(matches!(
            aq_ratio(&sys, &Observable::NegLogPerp, 1, 1000, 100, 1, &o),
            Err(Error::InsufficientSamples(_))
        ));
    }

    #[test]
    fn iid_returns_are_product_measure() {
        let sys = SystemSpec::Iid { dim: 2 }.build().unwrap();
        let seg = LineSegment::centered([0.5, 0.5], [1.0, 0.0], 0.3).unwrap();
        let obs = Observable::NegLogSegment(seg);
        let o = DiagnosticsOptions { calibration_len: 200_000, burn_in: 0, ..Default::default() };
        // exceedance probability near 1/20 gives enough returns to resolve
        let r = short_return_sum(&sys, &obs, 20, 5, 40_000, 9, 0, &o).unwrap();
        for e in &r.per_j_estimates {
            let want = r.mu_u * r.mu_u;
            assert!((e.estimate - want).abs() < 3.0 * e.stderr, "{e:?} want {want}");
        }
        let want_total = 20.0 * 5.0 * r.mu_u * r.mu_u;
        assert!((r.weighted_total - want_total).abs() < 3.0 * r.weighted_total_stderr);
    }
}
