//! Ambiguity functions, correlation maxima and bound reports.

use std::collections::HashMap;
use std::fmt::Write as _;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::dft::Dft;
use crate::field::PrimeField;
use crate::heisenberg::line_contains;
use crate::oscillator::{axis_key, torus_index, TorusKind};
use crate::signal::{Signal, UNIT_NORM_TOL, ZERO};
use crate::spectral::RESIDUAL_TOL;
use crate::system::{SignalLabel, SignalSystem, SystemKind};
use crate::weil::WeilAction;

/// Slack added to every asserted bound.
pub const BOUND_SLACK: f64 = 1e-9;
/// Overlap required for a Fourier match.
pub const MATCH_TOL: f64 = 1e-8;
/// Random pairs sampled for extended systems.
pub const EXTENDED_SAMPLES: usize = 1000;

/// Computes rows of `⟨φ, M_w L_τ φ'⟩` with one batched FFT per table.
pub struct Correlator {
    p: usize,
    dft: Dft,
    buf: Vec<Complex64>,
    scratch: Vec<Complex64>,
}

impl Correlator {
    pub fn new(p: usize) -> Self {
        Self::with_dft(Dft::new(p))
    }

    pub fn with_dft(dft: Dft) -> Self {
        let p = dft.len();
        Self {
            p,
            dft,
            buf: vec![ZERO; p * p],
            scratch: Vec::new(),
        }
    }

    /// Fills the internal grid; entry `τ p + w` is `⟨φ, M_w L_τ φ'⟩`.
    pub fn compute(&mut self, phi: &[Complex64], phi2: &[Complex64]) -> &[Complex64] {
        let p = self.p;
        for tau in 0..p {
            let row = &mut self.buf[tau * p..(tau + 1) * p];
            for (t, slot) in row.iter_mut().enumerate() {
                *slot = phi[t].conj() * phi2[(t + tau) % p];
            }
        }
        self.dft.process(&mut self.buf, &mut self.scratch);
        &self.buf
    }

    /// `(max |m| over the grid, skipping the origin if asked, m(0,0))`.
    pub fn max_abs(&mut self, phi: &[Complex64], phi2: &[Complex64], skip_origin: bool) -> (f64, Complex64) {
        let grid = self.compute(phi, phi2);
        let start = usize::from(skip_origin);
        let m = grid[start..].iter().map(|z| z.norm_sqr()).fold(0.0, f64::max);
        (m.sqrt(), grid[0])
    }
}

#[derive(Clone, Debug)]
pub struct AmbiguityTable {
    pub p: usize,
    /// Row-major by `τ`, columns `w`.
    pub grid: Vec<Complex64>,
    /// `(τ, w, |value|)` of the first maximal entry.
    pub peak: (usize, usize, f64),
    /// Largest magnitude away from the origin.
    pub max_offcenter: f64,
}

impl AmbiguityTable {
    pub fn get(&self, tau: usize, w: usize) -> Complex64 {
        self.grid[tau * self.p + w]
    }

    /// Magnitudes as CSV, rows `τ`, columns `w`.
    pub fn magnitude_csv(&self) -> String {
        let mut out = String::new();
        for tau in 0..self.p {
            let row: Vec<String> = (0..self.p).map(|w| format!("{:?}", self.get(tau, w).norm())).collect();
            out.push_str(&row.join(","));
            out.push('\n');
        }
        out
    }
}

/// `⟨φ, M_w L_τ φ2⟩` over the whole time-frequency plane; `phi2` defaults to
/// `phi`.
pub fn ambiguity(phi: &Signal, phi2: Option<&Signal>) -> AmbiguityTable {
    let p = phi.len();
    let other = phi2.unwrap_or(phi);
    let grid = Correlator::new(p).compute(phi.values(), other.values()).to_vec();
    let mut peak = (0, 0, -1.0);
    for (i, z) in grid.iter().enumerate() {
        if z.norm() > peak.2 {
            peak = (i / p, i % p, z.norm());
        }
    }
    let max_offcenter = grid[1..].iter().map(|z| z.norm()).fold(0.0, f64::max);
    AmbiguityTable {
        p,
        grid,
        peak,
        max_offcenter,
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct BoundCheck {
    pub name: &'static str,
    pub bound: f64,
    pub observed: f64,
    pub passed: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct HeadlineCheck {
    pub name: &'static str,
    pub bound: f64,
    pub observed: f64,
}

impl HeadlineCheck {
    pub fn holds(&self) -> bool {
        self.observed <= self.bound
    }
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct BoundReport {
    pub p: u64,
    pub kind: Option<SystemKind>,
    pub signals: usize,
    /// Largest off-center auto-ambiguity per signal.
    pub auto: Vec<f64>,
    /// Largest cross-ambiguity per signal against any other signal.
    pub cross: Vec<f64>,
    /// `max_t |φ(t)|` per signal.
    pub supremum: Vec<f64>,
    pub checks: Vec<BoundCheck>,
    pub headline: Vec<HeadlineCheck>,
    pub failures: Vec<String>,
}

impl BoundReport {
    pub fn passed(&self) -> bool {
        self.failures.is_empty() && self.checks.iter().all(|c| c.passed)
    }

    pub fn check(&self, name: &str) -> Option<&BoundCheck> {
        self.checks.iter().find(|c| c.name == name)
    }

    fn push_check(&mut self, name: &'static str, bound: f64, observed: f64) {
        self.checks.push(BoundCheck {
            name,
            bound,
            observed,
            passed: observed <= bound,
        });
    }

    pub fn to_key_values(&self, headline: bool) -> String {
        let mut out = String::new();
        let kind = self.kind.map(|k| k.as_str()).unwrap_or("unknown");
        let _ = writeln!(out, "p={}", self.p);
        let _ = writeln!(out, "kind={kind}");
        let _ = writeln!(out, "signals={}", self.signals);
        for c in &self.checks {
            let _ = writeln!(out, "check.{}.bound={:?}", c.name, c.bound);
            let _ = writeln!(out, "check.{}.observed={:?}", c.name, c.observed);
            let _ = writeln!(out, "check.{}.pass={}", c.name, c.passed);
        }
        if headline {
            for h in &self.headline {
                let _ = writeln!(out, "headline.{}.bound={:?}", h.name, h.bound);
                let _ = writeln!(out, "headline.{}.observed={:?}", h.name, h.observed);
                let _ = writeln!(out, "headline.{}.holds={}", h.name, h.holds());
            }
        }
        let _ = writeln!(out, "failures={}", self.failures.len());
        for (i, f) in self.failures.iter().enumerate() {
            let _ = writeln!(out, "failure.{i}={f}");
        }
        let _ = writeln!(out, "pass={}", self.passed());
        out
    }
}

fn max_of(v: &[f64]) -> f64 {
    v.iter().copied().fold(0.0, f64::max)
}

fn unit_norm_failures(s: &SignalSystem, report: &mut BoundReport) {
    let mut worst: f64 = 0.0;
    for ls in &s.signals {
        let dev = (ls.signal.norm() - 1.0).abs();
        worst = worst.max(dev);
        if dev > UNIT_NORM_TOL || ls.signal.len() != s.p as usize {
            report
                .failures
                .push(format!("signal {} is not unit norm (|norm - 1| = {dev:.3e})", ls.label));
        }
    }
    report.push_check("unit_norm", UNIT_NORM_TOL, worst);
}

/// Bound report for any system kind.
///
/// Oscillator systems are checked against the constants of the correlation
/// proofs: off-center auto-ambiguity `≤ 2√p/#T`, cross-ambiguity
/// `≤ 4√p/#T` (and `≤ 2√p/#T` within one torus), supremum `≤ 2/√#T`, each
/// with slack [`BOUND_SLACK`]. Heisenberg systems are checked for the line
/// structure of their ambiguity functions, the `1/√p` cross bound between
/// different lines and unimodularity of the chirp bases. Extended systems are
/// checked on [`EXTENDED_SAMPLES`] random pairs.
pub fn system_report(f: &PrimeField, s: &SignalSystem) -> BoundReport {
    let mut report = BoundReport {
        p: s.p,
        kind: Some(s.kind),
        signals: s.len(),
        ..Default::default()
    };
    unit_norm_failures(s, &mut report);
    match s.kind {
        SystemKind::Split | SystemKind::NonSplit => oscillator_report(f, s, &mut report),
        SystemKind::Heisenberg => heisenberg_report(f, s, &mut report),
        SystemKind::Extended => extended_report(f, s, &mut report),
    }
    report
}

struct PairStats {
    auto: f64,
    sup: f64,
    /// `(j, max |m|, m(0,0))` for `j > i`.
    partners: Vec<(usize, f64, Complex64)>,
}

fn pairwise(s: &SignalSystem) -> Vec<PairStats> {
    let p = s.p as usize;
    let n = s.len();
    let dft = Dft::new(p);
    (0..n)
        .into_par_iter()
        .map_init(
            || Correlator::with_dft(dft.clone()),
            |c, i| {
                let phi = s.signals[i].signal.values();
                let (auto, _) = c.max_abs(phi, phi, true);
                let partners = (i + 1..n)
                    .map(|j| {
                        let (m, origin) = c.max_abs(phi, s.signals[j].signal.values(), false);
                        (j, m, origin)
                    })
                    .collect();
                PairStats {
                    auto,
                    sup: s.signals[i].signal.max_abs(),
                    partners,
                }
            },
        )
        .collect()
}

fn oscillator_report(f: &PrimeField, s: &SignalSystem, report: &mut BoundReport) {
    let p = s.p as f64;
    let n = s.len();
    let t = s.family_order() as f64;
    let stats = pairwise(s);

    report.auto = stats.iter().map(|x| x.auto).collect();
    report.supremum = stats.iter().map(|x| x.sup).collect();
    let mut cross = vec![0.0f64; n];
    let mut same_max: f64 = 0.0;
    let mut ortho_dev: f64 = 0.0;
    let mut cross_worst: Option<(f64, usize, usize)> = None;
    let mut same_worst: Option<(f64, usize, usize)> = None;
    for (i, st) in stats.iter().enumerate() {
        for &(j, m, origin) in &st.partners {
            cross[i] = cross[i].max(m);
            cross[j] = cross[j].max(m);
            if cross_worst.is_none_or(|w| m > w.0) {
                cross_worst = Some((m, i, j));
            }
            if s.signals[i].label.family == s.signals[j].label.family {
                same_max = same_max.max(m);
                ortho_dev = ortho_dev.max(origin.norm());
                if same_worst.is_none_or(|w| m > w.0) {
                    same_worst = Some((m, i, j));
                }
            }
        }
    }
    report.cross = cross;

    let auto_bound = 2.0 * p.sqrt() / t + BOUND_SLACK;
    let cross_bound = 4.0 * p.sqrt() / t + BOUND_SLACK;
    let same_bound = 2.0 * p.sqrt() / t + BOUND_SLACK;
    let sup_bound = 2.0 / t.sqrt() + BOUND_SLACK;

    for (i, &a) in report.auto.iter().enumerate() {
        if a > auto_bound {
            report.failures.push(format!(
                "auto: signal {} reaches {a:?} > {auto_bound:?}",
                s.signals[i].label
            ));
        }
    }
    for (i, &x) in report.supremum.iter().enumerate() {
        if x > sup_bound {
            report.failures.push(format!(
                "supremum: signal {} reaches {x:?} > {sup_bound:?}",
                s.signals[i].label
            ));
        }
    }
    if let Some((m, i, j)) = cross_worst.filter(|w| w.0 > cross_bound) {
        report.failures.push(format!(
            "cross: pair {} / {} reaches {m:?} > {cross_bound:?}",
            s.signals[i].label, s.signals[j].label
        ));
    }
    if let Some((m, i, j)) = same_worst.filter(|w| w.0 > same_bound) {
        report.failures.push(format!(
            "same_torus: pair {} / {} reaches {m:?} > {same_bound:?}",
            s.signals[i].label, s.signals[j].label
        ));
    }

    let residual = eigen_residuals(f, s, report);

    let auto_max = max_of(&report.auto);
    let cross_max = cross_worst.map_or(0.0, |w| w.0);
    let sup_max = max_of(&report.supremum);
    report.push_check("orthonormal", 1e-9, ortho_dev);
    report.push_check("eigen_residual", RESIDUAL_TOL, residual);
    report.push_check("auto", auto_bound, auto_max);
    report.push_check("cross", cross_bound, cross_max);
    report.push_check("same_torus", same_bound, same_max);
    report.push_check("supremum", sup_bound, sup_max);
    report.headline = vec![
        HeadlineCheck {
            name: "auto",
            bound: 2.0 / p.sqrt(),
            observed: auto_max,
        },
        HeadlineCheck {
            name: "cross",
            bound: 4.0 / p.sqrt(),
            observed: cross_max,
        },
        HeadlineCheck {
            name: "supremum",
            bound: 2.0 / p.sqrt(),
            observed: sup_max,
        },
    ];
}

/// Largest `|ρ(g_T) φ - ⟨φ, ρ(g_T) φ⟩ φ|` over the system, using the torus
/// descriptors stored with it.
fn eigen_residuals(f: &PrimeField, s: &SignalSystem, report: &mut BoundReport) -> f64 {
    let dft = Dft::new(f.size());
    let actions: Vec<WeilAction> = s.tori.iter().map(|t| WeilAction::new(f, &t.generator)).collect();
    let residuals: Vec<Option<f64>> = s
        .signals
        .par_iter()
        .map(|ls| {
            let action = actions.get(ls.label.family)?;
            let image = action.apply(f, &dft, &ls.signal);
            let lambda = ls.signal.inner(&image);
            Some(image.distance(&ls.signal.scale(lambda)))
        })
        .collect();
    let mut worst: f64 = 0.0;
    for (ls, r) in s.signals.iter().zip(residuals) {
        match r {
            Some(r) => {
                worst = worst.max(r);
                if r > RESIDUAL_TOL {
                    report
                        .failures
                        .push(format!("eigen_residual: signal {} has residual {r:.3e}", ls.label));
                }
            }
            None => report
                .failures
                .push(format!("signal {} refers to a missing torus", ls.label)),
        }
    }
    worst
}

fn heisenberg_report(f: &PrimeField, s: &SignalSystem, report: &mut BoundReport) {
    let p = f.size();
    let stats = pairwise(s);
    let dft = Dft::new(p);

    let line_dev: Vec<f64> = s
        .signals
        .par_iter()
        .map_init(
            || Correlator::with_dft(dft.clone()),
            |c, ls| {
                let grid = c.compute(ls.signal.values(), ls.signal.values());
                let mut dev: f64 = 0.0;
                for (i, z) in grid.iter().enumerate() {
                    let v = ((i / p) as u64, (i % p) as u64);
                    let target = if line_contains(f, ls.label.family, v) { 1.0 } else { 0.0 };
                    dev = dev.max((z.norm() - target).abs());
                }
                dev
            },
        )
        .collect();
    for (ls, &d) in s.signals.iter().zip(&line_dev) {
        if d > BOUND_SLACK {
            report.failures.push(format!(
                "line: signal {} deviates from its line indicator by {d:.3e}",
                ls.label
            ));
        }
    }

    let cross_bound = 1.0 / (p as f64).sqrt() + BOUND_SLACK;
    let mut cross = vec![0.0f64; s.len()];
    let mut cross_max: f64 = 0.0;
    for (i, st) in stats.iter().enumerate() {
        for &(j, m, _) in &st.partners {
            if s.signals[i].label.family != s.signals[j].label.family {
                cross[i] = cross[i].max(m);
                cross[j] = cross[j].max(m);
                cross_max = cross_max.max(m);
            }
        }
    }
    for (ls, &m) in s.signals.iter().zip(&cross) {
        if m > cross_bound {
            report
                .failures
                .push(format!("cross: signal {} reaches {m:?} > {cross_bound:?}", ls.label));
        }
    }

    // The vertical line carries the delta basis, which is not unimodular.
    let level = 1.0 / (p as f64).sqrt();
    let mut unimodular_dev: f64 = 0.0;
    for ls in s.signals.iter().filter(|ls| ls.label.family != p) {
        let d = ls
            .signal
            .values()
            .iter()
            .map(|z| (z.norm() - level).abs())
            .fold(0.0, f64::max);
        unimodular_dev = unimodular_dev.max(d);
        if d > UNIT_NORM_TOL {
            report
                .failures
                .push(format!("unimodular: signal {} deviates by {d:.3e}", ls.label));
        }
    }

    report.auto = stats.iter().map(|x| x.auto).collect();
    report.supremum = stats.iter().map(|x| x.sup).collect();
    report.cross = cross;
    report.push_check("line_structure", BOUND_SLACK, max_of(&line_dev));
    report.push_check("cross_basis", cross_bound, cross_max);
    report.push_check("unimodular_chirps", UNIT_NORM_TOL, unimodular_dev);
    report.headline = vec![HeadlineCheck {
        name: "supremum",
        bound: level,
        observed: max_of(&report.supremum),
    }];
}

fn extended_report(f: &PrimeField, s: &SignalSystem, report: &mut BoundReport) {
    let p = f.p() as f64;
    let t = s.family_order() as f64;
    let bound = 4.0 * p.sqrt() / t + BOUND_SLACK;
    let n = s.len();
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    let mut worst: f64 = 0.0;
    if n >= 2 {
        for _ in 0..EXTENDED_SAMPLES {
            let i = rng.random_range(0..n);
            let mut j = rng.random_range(0..n - 1);
            if j >= i {
                j += 1;
            }
            let m = s.signals[i].signal.inner(&s.signals[j].signal).norm();
            worst = worst.max(m);
            if m > bound {
                report.failures.push(format!(
                    "sampled: pair {} / {} reaches {m:?} > {bound:?}",
                    s.signals[i].label, s.signals[j].label
                ));
            }
        }
    }
    report.push_check("sampled_inner", bound, worst);
    report.headline = vec![HeadlineCheck {
        name: "sampled_inner",
        bound: 4.0 / p.sqrt(),
        observed: worst,
    }];
}

#[derive(Clone, Debug, PartialEq)]
pub struct FourierMatch {
    pub source: SignalLabel,
    pub target: Option<SignalLabel>,
    pub overlap: f64,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct FourierReport {
    pub matches: Vec<FourierMatch>,
    pub failures: Vec<String>,
}

impl FourierReport {
    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }

    pub fn min_overlap(&self) -> f64 {
        self.matches.iter().map(|m| m.overlap).fold(f64::INFINITY, f64::min)
    }
}

/// For every signal `φ` of torus `T`, finds the signal of `wTw^-1` closest to
/// the unitary DFT of `φ`; overlaps must reach `1 - MATCH_TOL` and the
/// matching must be a bijection per torus.
pub fn fourier_invariance_check(f: &PrimeField, s: &SignalSystem) -> FourierReport {
    let mut report = FourierReport::default();
    if let Err(e) = TorusKind::try_from(s.kind) {
        report.failures.push(e.to_string());
        return report;
    }
    let index = torus_index(f, &s.tori);
    let w = f.weyl();
    let dft = Dft::new(f.size());
    let scale = 1.0 / (f.p() as f64).sqrt();

    let mut by_family: HashMap<usize, Vec<usize>> = HashMap::new();
    for (i, ls) in s.signals.iter().enumerate() {
        by_family.entry(ls.label.family).or_default().push(i);
    }
    let mut families: Vec<usize> = by_family.keys().copied().collect();
    families.sort_unstable();

    for fam in families {
        let members = &by_family[&fam];
        let Some(torus) = s.tori.get(fam) else {
            report.failures.push(format!("family {fam} has no torus descriptor"));
            continue;
        };
        let image_key = axis_key(f, &w.conjugate(&torus.generator));
        let Some(&target_fam) = index.get(&image_key) else {
            report
                .failures
                .push(format!("torus {fam}: image under w is not in the system"));
            continue;
        };
        let targets = by_family.get(&target_fam).cloned().unwrap_or_default();
        let mut used = vec![false; targets.len()];
        for &i in members {
            let src = &s.signals[i];
            let ft = Signal::new(dft.transform(src.signal.values())).scale(Complex64::new(scale, 0.0));
            let best = targets
                .iter()
                .enumerate()
                .map(|(k, &j)| (k, s.signals[j].signal.inner(&ft).norm()))
                .fold(None, |acc: Option<(usize, f64)>, x| match acc {
                    Some(a) if a.1 >= x.1 => Some(a),
                    _ => Some(x),
                });
            match best {
                Some((k, overlap)) => {
                    let target = s.signals[targets[k]].label;
                    if overlap < 1.0 - MATCH_TOL {
                        report
                            .failures
                            .push(format!("fourier: signal {} best overlap {overlap:?}", src.label));
                    } else if used[k] {
                        report.failures.push(format!("fourier: signal {target} matched twice"));
                    }
                    used[k] = true;
                    report.matches.push(FourierMatch {
                        source: src.label,
                        target: Some(target),
                        overlap,
                    });
                }
                None => {
                    report
                        .failures
                        .push(format!("fourier: no candidates for signal {}", src.label));
                    report.matches.push(FourierMatch {
                        source: src.label,
                        target: None,
                        overlap: 0.0,
                    });
                }
            }
        }
    }
    report
}
