//! The Heisenberg group over F_p, its Schrödinger representation on signals,
//! the Weyl transform and its inverse, twisted convolution, and the chirp
//! system attached to lines through the origin.
//!
//! Conventions used throughout the crate:
//! * symplectic form `ω((τ, w), (τ', w')) = τw' − τ'w`;
//! * group law `(v, z)·(v', z') = (v + v', z + z' + ½ω(v, v'))`;
//! * `π(τ, w, z) = ψ(½τw + z) M_w L_τ` with `L_τ φ(t) = φ(t + τ)` and
//!   `M_w φ(t) = ψ(wt) φ(t)`.
//!
//! The sign of the `½τw` phase is the one for which `π` is a homomorphism for
//! the group law above.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::field::PrimeField;
use crate::signal::{Operator, PhaseSpaceFunction, Signal, ZERO};
use crate::system::{LabeledSignal, SignalLabel, SignalSystem, SystemKind};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct HeisenbergElement {
    pub tau: u64,
    pub w: u64,
    pub z: u64,
}

impl HeisenbergElement {
    pub fn new(f: &PrimeField, tau: u64, w: u64, z: u64) -> Self {
        let p = f.p();
        Self {
            tau: tau % p,
            w: w % p,
            z: z % p,
        }
    }

    /// Element `(v, 0)` of the plane section.
    pub fn plane(f: &PrimeField, v: (u64, u64)) -> Self {
        Self::new(f, v.0, v.1, 0)
    }

    pub fn identity() -> Self {
        Self { tau: 0, w: 0, z: 0 }
    }

    pub fn mul(&self, other: &Self, f: &PrimeField) -> Self {
        let om = omega(f, (self.tau, self.w), (other.tau, other.w));
        Self {
            tau: f.add(self.tau, other.tau),
            w: f.add(self.w, other.w),
            z: f.add(f.add(self.z, other.z), f.mul(f.half(), om)),
        }
    }

    /// `(v, z)^-1 = (-v, -z)` since `ω(v, -v) = 0`.
    pub fn inverse(&self, f: &PrimeField) -> Self {
        Self {
            tau: f.neg(self.tau),
            w: f.neg(self.w),
            z: f.neg(self.z),
        }
    }
}

/// Symplectic form on the time-frequency plane.
pub fn omega(f: &PrimeField, v1: (u64, u64), v2: (u64, u64)) -> u64 {
    f.sub(f.mul(v1.0, v2.1), f.mul(v2.0, v1.1))
}

/// Dense matrix of `π(h)`: the only nonzero entry of row `t` sits in column
/// `t + τ`.
pub fn heisenberg_operator(f: &PrimeField, h: &HeisenbergElement) -> Operator {
    let n = f.size();
    let phase = f.add(f.mul(f.half(), f.mul(h.tau, h.w)), h.z);
    let mut m = Operator::zeros(n).into_matrix();
    for t in 0..n as u64 {
        let col = f.add(t, h.tau) as usize;
        m[(t as usize, col)] = f.psi(f.add(phase, f.mul(h.w, t)));
    }
    Operator::from_matrix(m)
}

/// Applies `π(h)` to a signal in `O(p)`.
pub fn apply_heisenberg(f: &PrimeField, h: &HeisenbergElement, s: &Signal) -> Signal {
    let phase = f.psi(f.add(f.mul(f.half(), f.mul(h.tau, h.w)), h.z));
    let mut out = time_frequency_shift(f, h.tau, h.w, s);
    for z in out.values_mut() {
        *z *= phase;
    }
    out
}

/// `M_w L_τ φ`, i.e. `t ↦ ψ(wt) φ(t + τ)`.
pub fn time_frequency_shift(f: &PrimeField, tau: u64, w: u64, s: &Signal) -> Signal {
    let n = f.size();
    let mut out = Vec::with_capacity(n);
    for t in 0..n as u64 {
        out.push(f.psi(f.mul(w, t)) * s[f.add(t, tau) as usize]);
    }
    Signal::new(out)
}

/// `W_A(v) = (1/p) Tr(A π(-v))`, evaluated on the plane section `z = 0`.
pub fn weyl_transform(f: &PrimeField, a: &Operator) -> PhaseSpaceFunction {
    let n = f.size();
    assert_eq!(a.dim(), n);
    let inv_p = 1.0 / n as f64;
    PhaseSpaceFunction::from_fn(n, |tau, w| {
        let (tau, w) = (tau as u64, w as u64);
        // π(-v)[t, t - τ] = ψ(½τw - wt); the diagonal of A π(-v) at row s
        // picks A[s, s + τ] π(-v)[s + τ, s].
        let phase = f.mul(f.half(), f.mul(tau, w));
        let mut acc = ZERO;
        for s in 0..n as u64 {
            let t = f.add(s, tau);
            acc += a.get(s as usize, t as usize) * f.psi(f.sub(phase, f.mul(w, t)));
        }
        acc * inv_p
    })
}

/// Left inverse of the Weyl transform: `Π(f) = Σ_v f(v) π(v)`.
pub fn weyl_inverse(f: &PrimeField, func: &PhaseSpaceFunction) -> Operator {
    let n = f.size();
    assert_eq!(func.p(), n);
    let mut m = Operator::zeros(n).into_matrix();
    for tau in 0..n as u64 {
        for w in 0..n as u64 {
            let c = func.get(tau as usize, w as usize);
            if c == ZERO {
                continue;
            }
            let phase = f.mul(f.half(), f.mul(tau, w));
            for t in 0..n as u64 {
                let col = f.add(t, tau) as usize;
                m[(t as usize, col)] += c * f.psi(f.add(phase, f.mul(w, t)));
            }
        }
    }
    Operator::from_matrix(m)
}

/// Twisted convolution on `C(V)`:
/// `(F ∗ G)(v) = Σ_{v1 + v2 = v} ψ(½ω(v1, v2)) F(v1) G(v2)`,
/// which satisfies `W_{A∘B} = W_A ∗ W_B`.
pub fn twisted_convolution(f: &PrimeField, a: &PhaseSpaceFunction, b: &PhaseSpaceFunction) -> PhaseSpaceFunction {
    let n = f.size();
    PhaseSpaceFunction::from_fn(n, |tau, w| {
        let v = (tau as u64, w as u64);
        let mut acc = ZERO;
        for t1 in 0..n as u64 {
            for w1 in 0..n as u64 {
                let x = a.get(t1 as usize, w1 as usize);
                if x == ZERO {
                    continue;
                }
                let v2 = (f.sub(v.0, t1), f.sub(v.1, w1));
                let y = b.get(v2.0 as usize, v2.1 as usize);
                let tw = f.psi(f.mul(f.half(), omega(f, (t1, w1), v2)));
                acc += tw * x * y;
            }
        }
        acc
    })
}

/// Whether `v` lies on the line indexed by `family` (slope `family` for
/// `family < p`, the vertical line for `family == p`).
pub fn line_contains(f: &PrimeField, family: usize, v: (u64, u64)) -> bool {
    if family as u64 == f.p() {
        v.0.is_multiple_of(f.p())
    } else {
        v.1 % f.p() == f.mul(family as u64, v.0)
    }
}

/// Chirp `φ_c(t) = ψ(-(m/2) t² + c t) / √p`, an eigenvector of `π(τ, mτ, 0)`
/// with eigenvalue `ψ(cτ)`.
pub fn line_chirp(f: &PrimeField, slope: u64, c: u64) -> Signal {
    let n = f.size();
    let norm = 1.0 / (n as f64).sqrt();
    let half_m = f.mul(f.half(), slope);
    Signal::new(
        (0..n as u64)
            .map(|t| {
                let arg = f.add(f.neg(f.mul(half_m, f.mul(t, t))), f.mul(c, t));
                f.psi(arg) * norm
            })
            .collect(),
    )
}

/// The union of the `p + 1` line bases, `p(p + 1)` signals in total.
pub fn heisenberg_system(f: &PrimeField) -> SignalSystem {
    let n = f.size();
    let mut signals = Vec::with_capacity(n * (n + 1));
    for m in 0..n {
        for c in 0..n {
            signals.push(LabeledSignal {
                label: SignalLabel::new(m, c),
                signal: line_chirp(f, m as u64, c as u64),
                eigenvalue: None,
            });
        }
    }
    for a in 0..n {
        signals.push(LabeledSignal {
            label: SignalLabel::new(n, a),
            signal: Signal::delta(n, a),
            eigenvalue: None,
        });
    }
    SignalSystem {
        p: f.p(),
        kind: SystemKind::Heisenberg,
        base_kind: None,
        tori: Vec::new(),
        signals,
    }
}

/// Eigenvalue of `π(l)` on the basis vector `index` of the line `family`.
pub fn line_eigenvalue(f: &PrimeField, family: usize, index: usize, l: (u64, u64)) -> Complex64 {
    if family as u64 == f.p() {
        // π(0, w) δ_a = ψ(wa) δ_a
        f.psi(f.mul(l.1, index as u64))
    } else {
        f.psi(f.mul(index as u64, l.0))
    }
}
