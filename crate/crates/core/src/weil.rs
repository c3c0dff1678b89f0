//! The Weil representation `ρ` of SL2(F_p) on signals.
//!
//! Two independent constructions are provided:
//! * [`weil_bruhat`] composes chirp, scaling and Fourier operators along the
//!   Bruhat factorization of `g`; the result is fixed up to a unit scalar, which
//!   is pinned by making the first nonzero matrix entry (row-major) real
//!   positive.
//! * [`weil_kernel`] sums `K(g, v) π(v)` over the plane with the Cayley-transform
//!   kernel. It is defined on elements with `g - I` invertible and is exactly
//!   multiplicative there.
//!
//! Both satisfy the conjugation identity `ρ(g) π(v) ρ(g)^-1 = π(g v)`, with `g`
//! acting on column vectors `(τ, w)`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::dft::Dft;
use crate::error::{Error, Result};
use crate::field::{BruhatForm, PrimeField, Sl2};
use crate::heisenberg::{heisenberg_operator, omega, weyl_inverse, HeisenbergElement};
use crate::signal::{Operator, PhaseSpaceFunction, Signal};

/// `S_a f(t) = σ(a) f(a^-1 t)`.
pub fn op_scaling(f: &PrimeField, a: u64) -> Result<Operator> {
    let ai = f.inv(a).ok_or(Error::ZeroScaling)?;
    let n = f.size();
    let sign = Complex64::new(f.legendre(a) as f64, 0.0);
    let mut m = Operator::zeros(n).into_matrix();
    for t in 0..n as u64 {
        m[(t as usize, f.mul(ai, t) as usize)] = sign;
    }
    Ok(Operator::from_matrix(m))
}

fn chirp_diagonal(f: &PrimeField, u: u64) -> Vec<Complex64> {
    let c = f.neg(f.mul(u, f.half()));
    (0..f.p()).map(|t| f.psi(f.mul(c, f.mul(t, t)))).collect()
}

/// `M_u f(t) = ψ(-(u/2) t²) f(t)`.
pub fn op_chirp(f: &PrimeField, u: u64) -> Operator {
    Operator::diagonal(&chirp_diagonal(f, u))
}

/// Unitary DFT `F f(w) = p^{-1/2} Σ_t ψ(wt) f(t)`.
pub fn op_fourier(f: &PrimeField) -> Operator {
    let n = f.size();
    let norm = 1.0 / (n as f64).sqrt();
    Operator::from_fn(n, |w, t| f.psi(f.mul(w as u64, t as u64)) * norm)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum WeilSource {
    Bruhat,
    Kernel,
}

/// A materialized `ρ(g)`.
#[derive(Clone, Debug)]
pub struct WeilOperator {
    pub op: Operator,
    pub source: WeilSource,
    pub g: Sl2,
}

/// Multiplies by the unit scalar that makes the first nonzero entry real
/// positive.
pub fn phase_normalize_operator(op: &Operator) -> Operator {
    match op.first_nonzero(1e-9) {
        Some(z) => op.scale(z.conj() / z.norm()),
        None => op.clone(),
    }
}

fn bruhat_factors(f: &PrimeField, form: &BruhatForm) -> Operator {
    match *form {
        BruhatForm::TorusUnipotent { u, a } => &op_chirp(f, u) * &op_scaling(f, a).expect("torus parameter is nonzero"),
        BruhatForm::BigCell { u2, a, u1 } => {
            let left = &op_chirp(f, u2) * &op_scaling(f, a).expect("torus parameter is nonzero");
            &(&left * &op_fourier(f)) * &op_chirp(f, u1)
        }
    }
}

/// `ρ(g)` from the Bruhat factorization, phase-normalized.
pub fn weil_bruhat(f: &PrimeField, g: &Sl2) -> WeilOperator {
    let raw = bruhat_factors(f, &g.bruhat());
    WeilOperator {
        op: phase_normalize_operator(&raw),
        source: WeilSource::Bruhat,
        g: *g,
    }
}

/// A generic 2x2 matrix over F_p (row-major), used for the Cayley transform.
pub type Mat2 = [u64; 4];

/// `κ(g) = (g + I)(g - I)^-1`, or `None` when `g - I` is singular.
pub fn cayley(f: &PrimeField, g: &Sl2) -> Option<Mat2> {
    let [a, b, c, d] = g.entries();
    let (am, dm) = (f.sub(a, 1), f.sub(d, 1));
    let det = f.sub(f.mul(am, dm), f.mul(b, c));
    let di = f.inv(det)?;
    let inv = [f.mul(dm, di), f.mul(f.neg(b), di), f.mul(f.neg(c), di), f.mul(am, di)];
    let plus = [f.add(a, 1), b, c, f.add(d, 1)];
    Some(mat_mul(f, &plus, &inv))
}

fn mat_mul(f: &PrimeField, x: &Mat2, y: &Mat2) -> Mat2 {
    [
        f.add(f.mul(x[0], y[0]), f.mul(x[1], y[2])),
        f.add(f.mul(x[0], y[1]), f.mul(x[1], y[3])),
        f.add(f.mul(x[2], y[0]), f.mul(x[3], y[2])),
        f.add(f.mul(x[2], y[1]), f.mul(x[3], y[3])),
    ]
}

/// `μ(g) = σ(-det(κ(g) + I))`.
pub fn kernel_sign(f: &PrimeField, kappa: &Mat2) -> i8 {
    let det = f.sub(f.mul(f.add(kappa[0], 1), f.add(kappa[3], 1)), f.mul(kappa[1], kappa[2]));
    f.legendre(f.neg(det))
}

/// The kernel `K_g(v) = (1/p) μ(g) ψ(¼ ω(κ(g) v, v))` on the plane.
pub fn weil_kernel_function(f: &PrimeField, g: &Sl2) -> Result<PhaseSpaceFunction> {
    let kappa = cayley(f, g).ok_or(Error::OutsideCayleyDomain)?;
    let mu = kernel_sign(f, &kappa) as f64;
    let quarter = f.inv(4).expect("p is odd");
    let n = f.size();
    Ok(PhaseSpaceFunction::from_fn(n, |tau, w| {
        let v = (tau as u64, w as u64);
        let kv = (
            f.add(f.mul(kappa[0], v.0), f.mul(kappa[1], v.1)),
            f.add(f.mul(kappa[2], v.0), f.mul(kappa[3], v.1)),
        );
        f.psi(f.mul(quarter, omega(f, kv, v))) * (mu / n as f64)
    }))
}

/// `ρ(g) = Σ_v K_g(v) π(v)` for `g` with `g - I` invertible.
pub fn weil_kernel(f: &PrimeField, g: &Sl2) -> Result<WeilOperator> {
    let k = weil_kernel_function(f, g)?;
    Ok(WeilOperator {
        op: weyl_inverse(f, &k),
        source: WeilSource::Kernel,
        g: *g,
    })
}

/// `max |ρ π(v) ρ^-1 - π(g v)|` entrywise, with `ρ^-1 = ρ*`.
pub fn egorov_check(f: &PrimeField, rho: &Operator, g: &Sl2, v: (u64, u64)) -> f64 {
    let h = HeisenbergElement::plane(f, v);
    let lhs = &(rho * &heisenberg_operator(f, &h)) * &rho.adjoint();
    let rhs = heisenberg_operator(f, &HeisenbergElement::plane(f, g.act(v)));
    lhs.max_abs_diff(&rhs)
}

/// Matrix-free application of the phase-normalized Bruhat operator `ρ(g)`.
///
/// Chirps and scalings are `O(p)`; the Fourier factor goes through an FFT.
#[derive(Clone, Debug)]
pub struct WeilAction {
    form: BruhatForm,
    outer_chirp: Vec<Complex64>,
    inner_chirp: Option<Vec<Complex64>>,
    scale_inv: u64,
    fourier_norm: f64,
}

impl WeilAction {
    pub fn new(f: &PrimeField, g: &Sl2) -> Self {
        let form = g.bruhat();
        let (outer, inner, a) = match form {
            BruhatForm::TorusUnipotent { u, a } => (u, None, a),
            BruhatForm::BigCell { u2, a, u1 } => (u2, Some(u1), a),
        };
        Self {
            form,
            outer_chirp: chirp_diagonal(f, outer),
            inner_chirp: inner.map(|u| chirp_diagonal(f, u)),
            scale_inv: f.inv(a).expect("torus parameter is nonzero"),
            fourier_norm: 1.0 / (f.size() as f64).sqrt(),
        }
    }

    pub fn form(&self) -> BruhatForm {
        self.form
    }

    /// Applies `ρ(g)`; `dft` must have length `p`.
    pub fn apply(&self, f: &PrimeField, dft: &Dft, s: &Signal) -> Signal {
        let n = f.size();
        let x: Vec<Complex64> = match &self.inner_chirp {
            Some(inner) => {
                let pre: Vec<Complex64> = s.values().iter().zip(inner).map(|(v, c)| v * c).collect();
                dft.transform(&pre).into_iter().map(|z| z * self.fourier_norm).collect()
            }
            None => s.values().to_vec(),
        };
        // Entry (0, 0) of the raw product is σ(a) or σ(a)/√p, so the phase
        // normalization multiplies by σ(a), cancelling the sign of S_a.
        let y: Vec<Complex64> = (0..n as u64)
            .zip(&self.outer_chirp)
            .map(|(t, c)| x[f.mul(self.scale_inv, t) as usize] * c)
            .collect();
        Signal::new(y)
    }
}
