//! Maximal tori of SL2(F_p) and the oscillator systems built from the
//! eigenvectors of the Weil representation restricted to them.
//!
//! Split tori are the conjugates of the diagonal torus `A`; non-split tori are
//! the conjugates of `T_δ = {[[a, δb], [b, a]] : a² − δb² = 1}` where `δ` is the
//! field's smallest non-square. A torus is identified by its *axis*: the line
//! spanned by the traceless part of any non-central element. Two tori share
//! an axis exactly when they coincide.

use std::collections::{HashMap, HashSet};

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dft::Dft;
use crate::error::{Error, Result};
use crate::field::{prime_factors, PrimeField, Sl2};
use crate::heisenberg::time_frequency_shift;
use crate::signal::Signal;
use crate::spectral::{diagonalize_unitary, Spectrum, RESIDUAL_TOL};
use crate::system::{LabeledSignal, SignalLabel, SignalSystem, SystemKind};
use crate::weil::{weil_bruhat, WeilAction};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TorusKind {
    Split,
    NonSplit,
}

impl TorusKind {
    pub fn order(&self, p: u64) -> u64 {
        match self {
            TorusKind::Split => p - 1,
            TorusKind::NonSplit => p + 1,
        }
    }

    pub fn system_kind(&self) -> SystemKind {
        match self {
            TorusKind::Split => SystemKind::Split,
            TorusKind::NonSplit => SystemKind::NonSplit,
        }
    }
}

impl TryFrom<SystemKind> for TorusKind {
    type Error = Error;

    fn try_from(k: SystemKind) -> Result<Self> {
        match k {
            SystemKind::Split => Ok(TorusKind::Split),
            SystemKind::NonSplit => Ok(TorusKind::NonSplit),
            other => Err(Error::Format(format!("`{other}` is not a torus kind"))),
        }
    }
}

/// Projective class of a traceless 2x2 matrix `[[α, β], [γ, -α]]`, scaled so
/// that its first nonzero coordinate is 1.
pub type AxisKey = [u64; 3];

/// Axis of the torus containing the non-central element `x`.
pub fn axis_key(f: &PrimeField, x: &Sl2) -> AxisKey {
    let [a, b, c, d] = x.entries();
    let mid = f.mul(f.add(a, d), f.half());
    let raw = [f.sub(a, mid), b, c];
    let lead = raw
        .iter()
        .copied()
        .find(|&v| v != 0)
        .expect("central elements have no axis");
    let s = f.inv(lead).expect("nonzero");
    raw.map(|v| f.mul(v, s))
}

/// A maximal torus `T = g T0 g^-1`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TorusDescriptor {
    pub kind: TorusKind,
    /// `g` with `T = g T0 g^-1` for the model torus `T0` of this kind.
    pub conjugator: Sl2,
    /// Smallest element (row-major serialization) of full order.
    pub generator: Sl2,
    pub order: u64,
}

impl TorusDescriptor {
    pub fn model(f: &PrimeField, kind: TorusKind) -> Self {
        Self::conjugated(f, kind, f.identity())
    }

    pub fn conjugated(f: &PrimeField, kind: TorusKind, conjugator: Sl2) -> Self {
        Self::conjugate_model(f, kind, &model_elements(f, kind), conjugator)
    }

    fn conjugate_model(f: &PrimeField, kind: TorusKind, model: &[Sl2], conjugator: Sl2) -> Self {
        let elements: Vec<Sl2> = model.iter().map(|x| conjugator.conjugate(x)).collect();
        let order = kind.order(f.p());
        Self {
            kind,
            conjugator,
            generator: torus_generator(&elements, order),
            order,
        }
    }

    /// All elements, sorted.
    pub fn elements(&self) -> Vec<Sl2> {
        let mut out = Vec::with_capacity(self.order as usize);
        let mut x = Sl2::identity(self.generator.modulus());
        for _ in 0..self.order {
            out.push(x);
            x = x * self.generator;
        }
        out.sort();
        out
    }

    pub fn axis(&self, f: &PrimeField) -> AxisKey {
        axis_key(f, &self.generator)
    }
}

/// Elements of the model torus: `diag(a, a^-1)` or `T_δ`.
pub fn model_elements(f: &PrimeField, kind: TorusKind) -> Vec<Sl2> {
    let p = f.p();
    match kind {
        TorusKind::Split => (1..p).map(|a| f.diagonal(a).expect("nonzero")).collect(),
        TorusKind::NonSplit => {
            let delta = f.nonsquare();
            let mut out = Vec::with_capacity(p as usize + 1);
            for a in 0..p {
                for b in 0..p {
                    if f.sub(f.mul(a, a), f.mul(delta, f.mul(b, b))) == 1 {
                        out.push(Sl2::new(p, a, f.mul(delta, b), b, a).expect("norm one"));
                    }
                }
            }
            out
        }
    }
}

/// Smallest element (by `(a, b, c, d)`) of the cyclic group `elements` whose
/// order is `order`.
pub fn torus_generator(elements: &[Sl2], order: u64) -> Sl2 {
    let primes = prime_factors(order);
    let mut sorted = elements.to_vec();
    sorted.sort();
    sorted
        .into_iter()
        .find(|x| x.pow(order).is_identity() && primes.iter().all(|&q| !x.pow(order / q).is_identity()))
        .expect("tori are cyclic")
}

/// Conjugators `[[1, b], [c, 1 + bc]]` reaching each split torus exactly once.
///
/// The pairs `(b, c)` and `(-b, (1 + bc)/b)` give the same torus when `b ≠ 0`;
/// the lexicographically smaller pair is kept.
pub fn split_torus_reps(f: &PrimeField) -> Vec<Sl2> {
    let p = f.p();
    let mut out = Vec::with_capacity((p * (p + 1) / 2) as usize);
    for b in 0..p {
        for c in 0..p {
            if b != 0 {
                let partner = (f.neg(b), f.mul(f.add(1, f.mul(b, c)), f.inv(b).expect("nonzero")));
                if partner < (b, c) {
                    continue;
                }
            }
            out.push(Sl2::new(p, 1, b, c, f.add(1, f.mul(b, c))).expect("det one"));
        }
    }
    out
}

/// Split tori in the order of [`split_torus_reps`].
pub fn split_tori(f: &PrimeField) -> Vec<TorusDescriptor> {
    let model = model_elements(f, TorusKind::Split);
    split_torus_reps(f)
        .into_par_iter()
        .map(|g| TorusDescriptor::conjugate_model(f, TorusKind::Split, &model, g))
        .collect()
}

/// All distinct non-split tori, each with the lexicographically first
/// conjugator of SL2 that reaches it.
pub fn nonsplit_tori(f: &PrimeField) -> Vec<TorusDescriptor> {
    let model = TorusDescriptor::model(f, TorusKind::NonSplit);
    let target = (f.size() * (f.size() - 1)) / 2;
    let mut seen: HashSet<AxisKey> = HashSet::with_capacity(target);
    let mut out = Vec::with_capacity(target);
    for g in f.sl2_elements() {
        if seen.insert(axis_key(f, &g.conjugate(&model.generator))) {
            out.push(g);
            if out.len() == target {
                break;
            }
        }
    }
    let model_els = model_elements(f, TorusKind::NonSplit);
    out.into_par_iter()
        .map(|g| TorusDescriptor::conjugate_model(f, TorusKind::NonSplit, &model_els, g))
        .collect()
}

pub fn tori(f: &PrimeField, kind: TorusKind) -> Vec<TorusDescriptor> {
    match kind {
        TorusKind::Split => split_tori(f),
        TorusKind::NonSplit => nonsplit_tori(f),
    }
}

/// Maps each torus axis to its index in `tori`.
pub fn torus_index(f: &PrimeField, tori: &[TorusDescriptor]) -> HashMap<AxisKey, usize> {
    tori.iter().enumerate().map(|(i, t)| (t.axis(f), i)).collect()
}

/// Multiplies by the unit scalar that makes the first entry of magnitude at
/// least half the maximum real positive.
pub fn phase_normalize(s: &Signal) -> Result<Signal> {
    let max = s.max_abs();
    if max == 0.0 {
        return Err(Error::ZeroVector);
    }
    let pivot = s
        .values()
        .iter()
        .copied()
        .find(|z| z.norm() >= max / 2.0)
        .expect("the maximum itself qualifies");
    Ok(s.scale(pivot.conj() / pivot.norm()))
}

/// Orthonormal eigenvectors of `ρ(g_T0)` kept for the model torus, with their
/// eigenvalues, ordered by eigenvalue argument.
///
/// For the split torus the unique two-dimensional eigenspace is dropped.
pub fn model_basis(f: &PrimeField, kind: TorusKind) -> Result<Vec<(Signal, Complex64)>> {
    let model = TorusDescriptor::model(f, kind);
    let rho = weil_bruhat(f, &model.generator);
    let spectrum = diagonalize_unitary(&rho.op)?;
    check_spectral_structure(f, kind, &spectrum)?;

    let mut out: Vec<(Signal, Complex64)> = Vec::new();
    for c in 0..spectrum.cluster_values.len() {
        if spectrum.multiplicity(c) != 1 {
            continue;
        }
        let pair = spectrum.cluster(c).next().expect("simple cluster");
        out.push((phase_normalize(&pair.vector)?, pair.value));
    }
    out.sort_by(|a, b| a.1.arg().total_cmp(&b.1.arg()));
    Ok(out)
}

/// Split generators have one doubled eigenvalue and `p - 2` simple ones;
/// non-split generators have `p` simple eigenvalues.
pub fn check_spectral_structure(f: &PrimeField, kind: TorusKind, spectrum: &Spectrum) -> Result<()> {
    let p = f.size();
    let mut mults = spectrum.multiplicities();
    mults.sort_unstable();
    let expected: Vec<usize> = match kind {
        TorusKind::Split => {
            let mut v = vec![1; p - 2];
            v.push(2);
            v
        }
        TorusKind::NonSplit => vec![1; p],
    };
    if mults != expected {
        return Err(Error::Spectral(format!(
            "unexpected multiplicities {mults:?} for a {kind:?} torus generator"
        )));
    }
    Ok(())
}

/// The oscillator system of one kind, generated lazily signal by signal.
///
/// Signal `i` belongs to torus `i / basis_len` with character index
/// `i % basis_len`, and equals `ρ(g) φ` for the torus conjugator `g` and the
/// model eigenvector `φ`.
pub struct OscillatorFamily {
    field: PrimeField,
    kind: TorusKind,
    tori: Vec<TorusDescriptor>,
    basis: Vec<(Signal, Complex64)>,
    dft: Dft,
}

impl OscillatorFamily {
    pub fn new(f: &PrimeField, kind: TorusKind) -> Result<Self> {
        Ok(Self {
            field: f.clone(),
            kind,
            tori: tori(f, kind),
            basis: model_basis(f, kind)?,
            dft: Dft::new(f.size()),
        })
    }

    pub fn field(&self) -> &PrimeField {
        &self.field
    }

    pub fn kind(&self) -> TorusKind {
        self.kind
    }

    pub fn tori(&self) -> &[TorusDescriptor] {
        &self.tori
    }

    pub fn basis_len(&self) -> usize {
        self.basis.len()
    }

    pub fn len(&self) -> usize {
        self.tori.len() * self.basis.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn dft(&self) -> &Dft {
        &self.dft
    }

    /// Signals of torus `family`, with eigenvalues under the torus generator.
    pub fn torus_signals(&self, family: usize) -> Result<Vec<LabeledSignal>> {
        let f = &self.field;
        let torus = &self.tori[family];
        let conj = WeilAction::new(f, &torus.conjugator);
        let gen = WeilAction::new(f, &torus.generator);
        self.basis
            .iter()
            .enumerate()
            .map(|(index, (phi, _))| {
                let signal = conj.apply(f, &self.dft, phi);
                let image = gen.apply(f, &self.dft, &signal);
                let eigenvalue = signal.inner(&image);
                let residual = image.distance(&signal.scale(eigenvalue));
                if residual > RESIDUAL_TOL {
                    return Err(Error::Spectral(format!(
                        "signal {family}:{index} has eigenresidual {residual:.3e}"
                    )));
                }
                Ok(LabeledSignal {
                    label: SignalLabel::new(family, index),
                    signal,
                    eigenvalue: Some(eigenvalue),
                })
            })
            .collect()
    }

    /// Position of an unshifted label in signal order.
    pub fn index_of(&self, label: &SignalLabel) -> Option<usize> {
        (label.shift.is_none() && label.family < self.tori.len() && label.index < self.basis.len())
            .then(|| label.family * self.basis.len() + label.index)
    }

    pub fn signal(&self, i: usize) -> Result<LabeledSignal> {
        let (family, index) = (i / self.basis.len(), i % self.basis.len());
        let f = &self.field;
        let torus = &self.tori[family];
        let signal = WeilAction::new(f, &torus.conjugator).apply(f, &self.dft, &self.basis[index].0);
        let image = WeilAction::new(f, &torus.generator).apply(f, &self.dft, &signal);
        Ok(LabeledSignal {
            label: SignalLabel::new(family, index),
            eigenvalue: Some(signal.inner(&image)),
            signal,
        })
    }

    pub fn materialize(&self) -> Result<SignalSystem> {
        let per_torus: Vec<Vec<LabeledSignal>> = (0..self.tori.len())
            .into_par_iter()
            .map(|i| self.torus_signals(i))
            .collect::<Result<_>>()?;
        Ok(SignalSystem {
            p: self.field.p(),
            kind: self.kind.system_kind(),
            base_kind: None,
            tori: self.tori.clone(),
            signals: per_torus.into_iter().flatten().collect(),
        })
    }
}

/// Builds the full split or non-split oscillator system.
pub fn build_system(f: &PrimeField, kind: TorusKind) -> Result<SignalSystem> {
    OscillatorFamily::new(f, kind)?.materialize()
}

/// All time-frequency translates `M_w L_τ φ` of the signals of `s`.
pub fn extended_system(f: &PrimeField, s: &SignalSystem) -> SignalSystem {
    let p = f.p();
    let signals = s
        .signals
        .par_iter()
        .flat_map_iter(|ls| {
            (0..p).flat_map(move |tau| {
                (0..p).map(move |w| LabeledSignal {
                    label: SignalLabel {
                        shift: Some((tau, w)),
                        ..ls.label
                    },
                    signal: time_frequency_shift(f, tau, w, &ls.signal),
                    eigenvalue: None,
                })
            })
        })
        .collect();
    SignalSystem {
        p,
        kind: SystemKind::Extended,
        base_kind: Some(s.effective_kind()),
        tori: s.tori.clone(),
        signals,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::signal::ONE;
    use crate::weil::op_scaling;

    fn field(p: u64) -> PrimeField {
        PrimeField::new(p).unwrap()
    }

    /// Independent count: group all elements of SL2 that are not ±I by the
    /// centralizer they generate, keeping those of the requested order.
    fn brute_torus_count(f: &PrimeField, order: usize) -> usize {
        let els: Vec<Sl2> = f.sl2_elements().collect();
        let mut tori: Vec<Vec<Sl2>> = Vec::new();
        for x in &els {
            let [a, b, c, d] = x.entries();
            if b == 0 && c == 0 && a == d {
                continue;
            }
            let mut cent: Vec<Sl2> = els.iter().copied().filter(|y| *x * *y == *y * *x).collect();
            cent.sort();
            if cent.len() == order && !tori.contains(&cent) {
                tori.push(cent);
            }
        }
        tori.len()
    }

    #[test]
    fn torus_counts_match_brute_force() {
        for p in [5u64, 7] {
            let f = field(p);
            assert_eq!(split_tori(&f).len(), brute_torus_count(&f, p as usize - 1));
            assert_eq!(nonsplit_tori(&f).len(), brute_torus_count(&f, p as usize + 1));
        }
    }

    #[test]
    fn torus_counts() {
        for p in [5u64, 7, 13] {
            let f = field(p);
            assert_eq!(split_torus_reps(&f).len() as u64, p * (p + 1) / 2);
            assert_eq!(nonsplit_tori(&f).len() as u64, p * (p - 1) / 2);
        }
    }

    #[test]
    fn split_reps_are_distinct_and_paired() {
        let f = field(7);
        let reps = split_torus_reps(&f);
        let model = model_elements(&f, TorusKind::Split);
        let mut sets: Vec<Vec<Sl2>> = reps
            .iter()
            .map(|g| {
                let mut s: Vec<Sl2> = model.iter().map(|x| g.conjugate(x)).collect();
                s.sort();
                s
            })
            .collect();
        sets.sort();
        sets.dedup();
        assert_eq!(sets.len(), reps.len());
        assert_eq!(reps[0], f.identity());

        for b in 1..7u64 {
            for c in 0..7u64 {
                let c2 = f.mul(f.add(1, f.mul(b, c)), f.inv(b).unwrap());
                let b2 = f.neg(b);
                let g1 = Sl2::new(7, 1, b, c, f.add(1, f.mul(b, c))).unwrap();
                let g2 = Sl2::new(7, 1, b2, c2, f.add(1, f.mul(b2, c2))).unwrap();
                let t1 = TorusDescriptor::conjugated(&f, TorusKind::Split, g1);
                let t2 = TorusDescriptor::conjugated(&f, TorusKind::Split, g2);
                assert_eq!(t1.elements(), t2.elements());
            }
        }
    }

    #[test]
    fn model_nonsplit_torus() {
        let f = field(7);
        assert_eq!(f.nonsquare(), 3);
        let els = model_elements(&f, TorusKind::NonSplit);
        assert_eq!(els.len(), 8);
        let f5 = field(5);
        let t = nonsplit_tori(&f5);
        assert!(t.iter().all(|d| d.elements().len() == 6));
        for x in &els {
            for y in &els {
                assert_eq!(*x * *y, *y * *x);
            }
        }
    }

    #[test]
    fn generators_have_full_order() {
        let f = field(5);
        let a = TorusDescriptor::model(&f, TorusKind::Split);
        assert_eq!(a.generator, Sl2::new(5, 2, 0, 0, 3).unwrap());
        for kind in [TorusKind::Split, TorusKind::NonSplit] {
            for t in tori(&f, kind) {
                assert_eq!(t.generator.order(), t.order);
                let model = TorusDescriptor::model(&f, kind);
                let conj = t.conjugator.conjugate(&model.generator);
                assert_eq!(conj.order(), t.order);
                assert!(t.elements().binary_search(&conj).is_ok());
            }
        }
    }

    #[test]
    fn phase_normalization() {
        let s = Signal::new(vec![
            Complex64::new(0.1, 0.0),
            Complex64::new(0.0, 0.7),
            Complex64::new(-0.7, 0.1),
        ]);
        let n = phase_normalize(&s).unwrap();
        assert!(n[1].im.abs() < 1e-15 && n[1].re > 0.0);
        assert!(phase_normalize(&n).unwrap().distance(&n) < 1e-15);
        let rotated = s.scale(Complex64::from_polar(1.0, 1.234));
        assert!(phase_normalize(&rotated).unwrap().distance(&n) < 1e-14);
        let d3 = Signal::delta(5, 3);
        assert_eq!(phase_normalize(&d3).unwrap(), d3);
        assert!(matches!(phase_normalize(&Signal::zeros(4)), Err(Error::ZeroVector)));
    }

    #[test]
    fn system_sizes_at_5() {
        let f = field(5);
        assert_eq!(build_system(&f, TorusKind::Split).unwrap().len(), 45);
        assert_eq!(build_system(&f, TorusKind::NonSplit).unwrap().len(), 50);
    }

    #[test]
    fn split_model_basis_is_multiplicative_characters() {
        for p in [5u64, 7, 13] {
            let f = field(p);
            let basis = model_basis(&f, TorusKind::Split).unwrap();
            assert_eq!(basis.len(), p as usize - 2);
            let r = f.generator();
            let norm = 1.0 / ((p - 1) as f64).sqrt();
            // χ_k(r^j) = exp(2πi jk/(p-1)), k = 1..p-2
            let chars: Vec<Signal> = (1..p - 1)
                .map(|k| {
                    let mut v = vec![Complex64::new(0.0, 0.0); p as usize];
                    for j in 0..p - 1 {
                        let theta = 2.0 * std::f64::consts::PI * (j * k) as f64 / (p - 1) as f64;
                        v[f.pow(r, j) as usize] = Complex64::from_polar(norm, theta);
                    }
                    Signal::new(v)
                })
                .collect();
            for (phi, _) in &basis {
                assert!(phi[0].norm() < 1e-10);
                let best = chars.iter().map(|c| c.inner(phi).norm()).fold(0.0, f64::max);
                assert!(best > 1.0 - 1e-10);
            }
        }
    }

    #[test]
    fn nonsplit_generator_spectrum_is_simple() {
        let f = field(5);
        let model = TorusDescriptor::model(&f, TorusKind::NonSplit);
        let spectrum = diagonalize_unitary(&weil_bruhat(&f, &model.generator).op).unwrap();
        assert_eq!(spectrum.multiplicities(), vec![1; 5]);
        // all eigenvalues are (p+1)-th roots of a common phase
        let l0 = spectrum.cluster_values[0];
        for l in &spectrum.cluster_values {
            let ratio = (l / l0).powu(6);
            assert!((ratio - ONE).norm() < 1e-9);
        }
    }

    #[test]
    fn unnormalized_scaling_has_sigma_cluster() {
        let f = field(5);
        let spectrum = diagonalize_unitary(&op_scaling(&f, 2).unwrap()).unwrap();
        assert!(check_spectral_structure(&f, TorusKind::Split, &spectrum).is_ok());
        assert!(check_spectral_structure(&f, TorusKind::NonSplit, &spectrum).is_err());
    }

    #[test]
    fn lazy_signals_match_materialized() {
        let f = field(7);
        let fam = OscillatorFamily::new(&f, TorusKind::NonSplit).unwrap();
        let sys = fam.materialize().unwrap();
        for i in [0, 5, 17, sys.len() - 1] {
            let ls = fam.signal(i).unwrap();
            assert_eq!(ls.label, sys.signals[i].label);
            assert!(ls.signal.distance(&sys.signals[i].signal) < 1e-12);
        }
    }

    #[test]
    fn extended_system_shape() {
        let f = field(5);
        let s = build_system(&f, TorusKind::Split).unwrap();
        let e = extended_system(&f, &s);
        assert_eq!(e.len(), 1125);
        assert_eq!(e.signals[0].signal, s.signals[0].signal);
        assert!(e.signals.iter().all(|x| x.signal.is_unit()));
    }
}
