//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! nonzero if any criterion fails.

use std::path::Path;
use std::process::Command;
use std::time::{Duration, Instant};

use num_complex::Complex64;
use rand::seq::IndexedRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use oscillator_core::applications::{cdma_simulate, radar_simulate, ChannelMode, ChannelScenario};
use oscillator_core::heisenberg::{
    heisenberg_operator, heisenberg_system, line_contains, twisted_convolution, weyl_inverse, weyl_transform,
    HeisenbergElement,
};
use oscillator_core::metrics::{ambiguity, fourier_invariance_check, system_report, BOUND_SLACK};
use oscillator_core::oscillator::{
    build_system, check_spectral_structure, nonsplit_tori, split_tori, OscillatorFamily, TorusDescriptor, TorusKind,
};
use oscillator_core::signal::Operator;
use oscillator_core::spectral::diagonalize_unitary;
use oscillator_core::weil::{cayley, egorov_check, weil_bruhat, weil_kernel};
use oscillator_core::{PrimeField, Sl2};

struct Outcome {
    passed: bool,
    detail: String,
}

impl Outcome {
    fn new() -> Self {
        Self {
            passed: true,
            detail: String::new(),
        }
    }

    fn require(&mut self, ok: bool, what: impl Into<String>) {
        if !ok {
            self.passed = false;
            if !self.detail.is_empty() {
                self.detail.push_str("; ");
            }
            self.detail.push_str(&what.into());
        }
    }

    fn note(&mut self, what: impl Into<String>) {
        if !self.detail.is_empty() {
            self.detail.push_str("; ");
        }
        self.detail.push_str(&what.into());
    }

    fn within(&mut self, start: Instant, limit: Duration) {
        let took = start.elapsed();
        self.require(took <= limit, format!("took {took:.2?}, limit {limit:?}"));
    }
}

fn field(p: u64) -> PrimeField {
    PrimeField::new(p).unwrap()
}

fn counts() -> Outcome {
    let mut o = Outcome::new();
    let start = Instant::now();
    for p in [5u64, 7, 13] {
        let f = field(p);
        let split = split_tori(&f).len() as u64;
        let nonsplit = nonsplit_tori(&f).len() as u64;
        o.require(
            split == p * (p + 1) / 2,
            format!("p={p} split tori {split} != {}", p * (p + 1) / 2),
        );
        o.require(
            nonsplit == p * (p - 1),
            format!("p={p} non-split tori {nonsplit} != {}", p * (p - 1)),
        );
        let s = build_system(&f, TorusKind::Split).unwrap().len() as u64;
        let ns = build_system(&f, TorusKind::NonSplit).unwrap().len() as u64;
        o.require(
            s == p * (p + 1) * (p - 2) / 2,
            format!("p={p} split signals {s} != {}", p * (p + 1) * (p - 2) / 2),
        );
        o.require(
            ns == p * p * (p - 1),
            format!("p={p} non-split signals {ns} != {}", p * p * (p - 1)),
        );
        let h = heisenberg_system(&f);
        o.require(
            h.len() as u64 == p * (p + 1),
            format!("p={p} heisenberg signals {}", h.len()),
        );
        o.require(
            h.family_count() as u64 == p + 1,
            format!("p={p} heisenberg bases {}", h.family_count()),
        );
        for fam in 0..h.family_count() {
            let b = h.family(fam);
            let mut dev: f64 = 0.0;
            for (i, x) in b.iter().enumerate() {
                for (j, y) in b.iter().enumerate() {
                    let target = if i == j { 1.0 } else { 0.0 };
                    dev = dev.max((x.signal.inner(&y.signal).norm() - target).abs());
                }
            }
            o.require(
                b.len() as u64 == p && dev < 1e-10,
                format!("p={p} basis {fam} not orthonormal"),
            );
        }
    }
    o.within(start, Duration::from_secs(1));
    o
}

fn heisenberg_properties() -> Outcome {
    let mut o = Outcome::new();
    let start = Instant::now();
    for p in [5u64, 7] {
        let f = field(p);
        let s = heisenberg_system(&f);
        let n = p as usize;
        let mut line_dev: f64 = 0.0;
        let mut cross: f64 = 0.0;
        let mut unimodular_dev: f64 = 0.0;
        for a in &s.signals {
            let t = ambiguity(&a.signal, None);
            for tau in 0..n {
                for w in 0..n {
                    let on = line_contains(&f, a.label.family, (tau as u64, w as u64));
                    line_dev = line_dev.max((t.get(tau, w).norm() - if on { 1.0 } else { 0.0 }).abs());
                }
            }
            for b in &s.signals {
                if a.label.family != b.label.family {
                    let m = ambiguity(&a.signal, Some(&b.signal));
                    cross = cross.max(m.grid.iter().map(|z| z.norm()).fold(0.0, f64::max));
                }
            }
            for z in a.signal.values() {
                unimodular_dev = unimodular_dev.max((z.norm() - 1.0 / (p as f64).sqrt()).abs());
            }
        }
        o.require(
            line_dev <= 1e-9,
            format!("p={p} line indicator deviation {line_dev:.3e}"),
        );
        let bound = 1.0 / (p as f64).sqrt() + BOUND_SLACK;
        o.require(cross <= bound, format!("p={p} cross-basis {cross:?} > {bound:?}"));
        o.require(
            unimodular_dev <= 1e-10,
            format!("p={p} |phi(t)| deviates from 1/sqrt(p) by {unimodular_dev:.3e}"),
        );
    }
    o.within(start, Duration::from_secs(10));
    o
}

fn oscillator_bounds() -> Outcome {
    let mut o = Outcome::new();
    for p in [5u64, 7, 13, 17] {
        let f = field(p);
        for kind in [TorusKind::Split, TorusKind::NonSplit] {
            let s = build_system(&f, kind).unwrap();
            let r = system_report(&f, &s);
            for name in ["auto", "cross", "same_torus", "supremum"] {
                let c = r.check(name).unwrap();
                o.require(
                    c.passed,
                    format!("p={p} {kind:?} {name} {:?} > {:?}", c.observed, c.bound),
                );
            }
            o.require(
                r.failures.is_empty(),
                format!("p={p} {kind:?} failures {:?}", r.failures),
            );
            let headline: Vec<String> = r
                .headline
                .iter()
                .map(|h| {
                    format!(
                        "{}={:.4}{}{:.4}",
                        h.name,
                        h.observed,
                        if h.holds() { "<=" } else { ">" },
                        h.bound
                    )
                })
                .collect();
            o.note(format!("p={p} {kind:?} headline {}", headline.join(" ")));
        }
    }
    o
}

fn random_operator(n: usize, rng: &mut ChaCha8Rng) -> Operator {
    Operator::from_fn(n, |_, _| {
        Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
    })
}

fn representation_identities() -> Outcome {
    let mut o = Outcome::new();
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(2024);

    // π multiplicativity
    for (p, sampled) in [(5u64, false), (7, true)] {
        let f = field(p);
        let all: Vec<HeisenbergElement> = (0..p * p * p)
            .map(|i| HeisenbergElement::new(&f, i / (p * p), (i / p) % p, i % p))
            .collect();
        let ops: Vec<Operator> = all.iter().map(|h| heisenberg_operator(&f, h)).collect();
        let pairs: Vec<(usize, usize)> = if sampled {
            (0..500)
                .map(|_| (rng.random_range(0..all.len()), rng.random_range(0..all.len())))
                .collect()
        } else {
            (0..all.len())
                .flat_map(|i| (0..all.len()).map(move |j| (i, j)))
                .collect()
        };
        let mut dev: f64 = 0.0;
        for (i, j) in pairs {
            let prod = all[i].mul(&all[j], &f);
            let k = ((prod.tau * p + prod.w) * p + prod.z) as usize;
            dev = dev.max((&ops[i] * &ops[j]).max_abs_diff(&ops[k]));
        }
        o.require(dev <= 1e-10, format!("p={p} pi multiplicativity {dev:.3e}"));
    }

    // Egorov identity
    for (p, sample) in [(5u64, None), (7, Some(60))] {
        let f = field(p);
        let mut gs: Vec<Sl2> = f.sl2_elements().collect();
        if let Some(k) = sample {
            gs = gs.choose_multiple(&mut rng, k).copied().collect();
        }
        let mut dev: f64 = 0.0;
        for g in &gs {
            let rho = weil_bruhat(&f, g).op;
            for tau in 0..p {
                for w in 0..p {
                    dev = dev.max(egorov_check(&f, &rho, g, (tau, w)));
                }
            }
        }
        o.require(dev <= 1e-9, format!("p={p} Egorov {dev:.3e}"));
    }

    // kernel multiplicativity and agreement with the Bruhat operators
    for p in [5u64, 7] {
        let f = field(p);
        let admissible: Vec<Sl2> = f.sl2_elements().filter(|g| cayley(&f, g).is_some()).collect();
        let mut mul_dev: f64 = 0.0;
        let mut found = 0;
        while found < 100 {
            let g1 = *admissible.choose(&mut rng).unwrap();
            let g2 = *admissible.choose(&mut rng).unwrap();
            let g12 = g1 * g2;
            if cayley(&f, &g12).is_none() {
                continue;
            }
            found += 1;
            let lhs = &weil_kernel(&f, &g1).unwrap().op * &weil_kernel(&f, &g2).unwrap().op;
            mul_dev = mul_dev.max(lhs.max_abs_diff(&weil_kernel(&f, &g12).unwrap().op));
        }
        o.require(mul_dev <= 1e-9, format!("p={p} kernel multiplicativity {mul_dev:.3e}"));

        let checked: Vec<Sl2> = if p == 5 {
            admissible.clone()
        } else {
            admissible.choose_multiple(&mut rng, 60).copied().collect()
        };
        let mut agree_dev: f64 = 0.0;
        for g in &checked {
            let k = weil_kernel(&f, g).unwrap().op;
            let b = weil_bruhat(&f, g).op;
            let (lambda, residual) = k.scalar_ratio(&b);
            agree_dev = agree_dev.max(residual).max((lambda.norm() - 1.0).abs());
        }
        o.require(agree_dev <= 1e-9, format!("p={p} Bruhat vs kernel {agree_dev:.3e}"));
    }

    // Weyl transform round trip and twisted convolution
    for p in [5u64, 7] {
        let f = field(p);
        let mut round: f64 = 0.0;
        let mut conv: f64 = 0.0;
        for _ in 0..20 {
            let a = random_operator(p as usize, &mut rng);
            let b = random_operator(p as usize, &mut rng);
            let wa = weyl_transform(&f, &a);
            round = round.max(weyl_inverse(&f, &wa).max_abs_diff(&a));
            let lhs = weyl_transform(&f, &(&a * &b));
            let rhs = twisted_convolution(&f, &wa, &weyl_transform(&f, &b));
            conv = conv.max(lhs.max_abs_diff(&rhs));
        }
        o.require(round <= 1e-9, format!("p={p} Weyl round trip {round:.3e}"));
        o.require(conv <= 1e-9, format!("p={p} twisted convolution {conv:.3e}"));
    }
    o.within(start, Duration::from_secs(30));
    o
}

fn spectral_structure() -> Outcome {
    let mut o = Outcome::new();
    for p in [5u64, 7, 13] {
        let f = field(p);
        for kind in [TorusKind::Split, TorusKind::NonSplit] {
            let model = TorusDescriptor::model(&f, kind);
            match diagonalize_unitary(&weil_bruhat(&f, &model.generator).op) {
                Ok(spectrum) => {
                    if let Err(e) = check_spectral_structure(&f, kind, &spectrum) {
                        o.require(false, format!("p={p} {kind:?}: {e}"));
                    }
                    let rho = weil_bruhat(&f, &model.generator).op;
                    let res = spectrum
                        .pairs
                        .iter()
                        .map(|e| rho.apply(&e.vector).distance(&e.vector.scale(e.value)))
                        .fold(0.0, f64::max);
                    o.require(res <= 1e-8, format!("p={p} {kind:?} model residual {res:.3e}"));
                }
                Err(e) => o.require(false, format!("p={p} {kind:?}: {e}")),
            }
            let s = build_system(&f, kind).unwrap();
            let r = system_report(&f, &s);
            let c = r.check("eigen_residual").unwrap();
            o.require(c.passed, format!("p={p} {kind:?} signal residual {:.3e}", c.observed));
        }
    }
    o
}

fn fourier_invariance() -> Outcome {
    let mut o = Outcome::new();
    for p in [5u64, 7] {
        let f = field(p);
        for kind in [TorusKind::Split, TorusKind::NonSplit] {
            let s = build_system(&f, kind).unwrap();
            let r = fourier_invariance_check(&f, &s);
            o.require(r.passed(), format!("p={p} {kind:?}: {:?}", r.failures));
            o.require(
                r.matches.len() == s.len(),
                format!("p={p} {kind:?} matched {}", r.matches.len()),
            );
            o.require(
                r.min_overlap() >= 1.0 - 1e-8,
                format!("p={p} {kind:?} overlap {:?}", r.min_overlap()),
            );
        }
    }
    o
}

fn radar() -> Outcome {
    let mut o = Outcome::new();
    let f = field(13);
    let s = build_system(&f, TorusKind::NonSplit).unwrap();
    let sc = ChannelScenario::noiseless(ChannelMode::Full, 7, 500);
    let mut worst = 1.0f64;
    for ls in &s.signals {
        let r = radar_simulate(&ls.signal, &sc).unwrap();
        worst = worst.min(r.success_rate());
    }
    o.require(worst == 1.0, format!("p=13 worst recovery rate {worst:?}"));
    o.note(format!("p=13 all {} non-split signals recovered", s.len()));

    let fam = OscillatorFamily::new(&field(101), TorusKind::NonSplit).unwrap();
    let phi = fam.signal(0).unwrap().signal;
    let mut curve = Vec::new();
    for snr in [-20.0, -15.0, -10.0, 0.0] {
        let sc = ChannelScenario {
            mode: ChannelMode::Full,
            snr_db: Some(snr),
            seed: 7,
            trials: 1000,
        };
        curve.push(format!(
            "{snr}dB:{:.3}",
            radar_simulate(&phi, &sc).unwrap().success_rate()
        ));
    }
    o.note(format!("p=101 recovery (report only) {}", curve.join(" ")));
    o
}

fn cdma() -> Outcome {
    let mut o = Outcome::new();
    let start = Instant::now();
    let f = field(101);
    let q = 101f64;
    let union = 2.0 * 4.0 * q.sqrt() / (q - 1.0);
    o.require(union < 1.0, format!("union bound {union:?} >= 1"));
    for kind in [TorusKind::Split, TorusKind::NonSplit] {
        let fam = OscillatorFamily::new(&f, kind).unwrap();
        let sc = ChannelScenario::noiseless(ChannelMode::Full, 1, 1000);
        let r = cdma_simulate(&fam, 101, 3, true, &sc).unwrap();
        o.require(r.failures == 0, format!("{kind:?} k=3 ber {:?}", r.rate()));
    }
    o.within(start, Duration::from_secs(60));

    let fam = OscillatorFamily::new(&f, TorusKind::NonSplit).unwrap();
    let mut curve = Vec::new();
    for snr in [None, Some(0.0), Some(-5.0)] {
        let sc = ChannelScenario {
            mode: ChannelMode::Full,
            snr_db: snr,
            seed: 1,
            trials: 200,
        };
        let r = cdma_simulate(&fam, 101, 10, false, &sc).unwrap();
        let label = snr.map_or("noiseless".to_string(), |s| format!("{s}dB"));
        curve.push(format!("{label}:{:.4}", r.rate()));
    }
    o.note(format!(
        "p=101 k=10 estimated distortions ber (report only) {}",
        curve.join(" ")
    ));
    o
}

fn run_cli(args: &[&str], threads: &str) -> (Option<i32>, Vec<u8>) {
    let out = Command::new(env!("CARGO_BIN_EXE_oscsys"))
        .args(args)
        .env("RAYON_NUM_THREADS", threads)
        .output()
        .unwrap();
    (out.status.code(), out.stdout)
}

fn determinism() -> Outcome {
    let mut o = Outcome::new();
    let dir = tempfile::tempdir().unwrap();
    let path = |name: &str| dir.path().join(name).to_str().unwrap().to_string();
    let files = |a: &str, b: &str| std::fs::read(Path::new(a)).unwrap() == std::fs::read(Path::new(b)).unwrap();

    // `{out}` is replaced by a per-run output path.
    let runs: [(&str, &[&str]); 4] = [
        (
            "generate",
            &["generate", "--p", "7", "--kind", "nonsplit", "--out", "{out}"],
        ),
        (
            "generate extended",
            &["generate", "--p", "5", "--kind", "extended", "--out", "{out}"],
        ),
        (
            "radar",
            &["radar", "--p", "13", "--snr-db", "-5", "--trials", "300", "--seed", "9"],
        ),
        (
            "cdma",
            &[
                "cdma", "--p", "31", "--users", "5", "--snr-db", "0", "--trials", "200", "--seed", "4",
            ],
        ),
    ];
    for (r, (name, args)) in runs.iter().enumerate() {
        let writes = args.contains(&"{out}");
        let mut stdouts = Vec::new();
        let mut outputs = Vec::new();
        for threads in ["1", "3"] {
            let out = path(&format!("run{r}-{threads}.json"));
            let concrete: Vec<&str> = args
                .iter()
                .map(|a| if *a == "{out}" { out.as_str() } else { a })
                .collect();
            let (code, stdout) = run_cli(&concrete, threads);
            o.require(code == Some(0), format!("{name} exited with {code:?}"));
            stdouts.push(String::from_utf8_lossy(&stdout).replace(&out, "{out}"));
            outputs.push(out);
        }
        o.require(stdouts[0] == stdouts[1], format!("{name} stdout differs"));
        if writes {
            o.require(files(&outputs[0], &outputs[1]), format!("{name} files differ"));
        }
    }

    let gen = path("run0-1.json");
    let mut verify = Vec::new();
    let mut grids = Vec::new();
    for (k, threads) in ["1", "3"].iter().enumerate() {
        verify.push(run_cli(
            &["verify", "--file", &gen, "--report-headline-bounds"],
            threads,
        ));
        let csv = path(&format!("a{k}.csv"));
        let (code, _) = run_cli(
            &["ambiguity", "--file", &gen, "--signal", "3:2", "--out", &csv],
            threads,
        );
        o.require(code == Some(0), "ambiguity failed");
        grids.push(std::fs::read(&csv).unwrap());
    }
    o.require(
        verify[0] == verify[1] && verify[0].0 == Some(0),
        "verify output differs or failed",
    );
    o.require(grids[0] == grids[1], "ambiguity csv differs");
    o
}

fn main() {
    type Criterion = (&'static str, fn() -> Outcome);
    let criteria: [Criterion; 9] = [
        ("counts", counts),
        ("heisenberg system properties", heisenberg_properties),
        ("oscillator proof-constant bounds", oscillator_bounds),
        ("representation identities", representation_identities),
        ("spectral structure", spectral_structure),
        ("fourier invariance", fourier_invariance),
        ("radar", radar),
        ("cdma", cdma),
        ("determinism", determinism),
    ];
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let o = run();
        let status = if o.passed { "PASS" } else { "FAIL" };
        if !o.passed {
            failed += 1;
        }
        println!(
            "criterion {} ({name}): {status} [{:.1?}] {}",
            i + 1,
            start.elapsed(),
            o.detail
        );
    }
    println!(
        "acceptance: {} of {} criteria passed",
        criteria.len() - failed,
        criteria.len()
    );
    if failed > 0 {
        std::process::exit(1);
    }
}
