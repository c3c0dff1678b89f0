//! Labeled collections of signals.

use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::oscillator::TorusDescriptor;
use crate::signal::Signal;

/// Conventions tag embedded in exported files. Consumers compare it before
/// mixing signals from different builds.
pub const CONVENTIONS: &str =
    "omega=tau*w'-tau'*w;pi=psi(tau*w/2+z)M_w L_tau;rho_phase=first-nonzero-entry-real-positive;\
     vector_phase=first-entry-above-half-max-real-positive";

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SystemKind {
    Split,
    NonSplit,
    Heisenberg,
    Extended,
}

impl SystemKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            SystemKind::Split => "split",
            SystemKind::NonSplit => "nonsplit",
            SystemKind::Heisenberg => "heisenberg",
            SystemKind::Extended => "extended",
        }
    }

    pub fn is_oscillator(&self) -> bool {
        matches!(self, SystemKind::Split | SystemKind::NonSplit)
    }
}

impl fmt::Display for SystemKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for SystemKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "split" => Ok(SystemKind::Split),
            "nonsplit" | "non-split" => Ok(SystemKind::NonSplit),
            "heisenberg" => Ok(SystemKind::Heisenberg),
            "extended" => Ok(SystemKind::Extended),
            other => Err(Error::Format(format!("unknown system kind `{other}`"))),
        }
    }
}

/// Identifies a signal inside a system: the family (torus or line) it comes
/// from, its character index, and for extended systems the time-frequency
/// translate applied to it.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct SignalLabel {
    pub family: usize,
    pub index: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub shift: Option<(u64, u64)>,
}

impl SignalLabel {
    pub fn new(family: usize, index: usize) -> Self {
        Self {
            family,
            index,
            shift: None,
        }
    }
}

impl fmt::Display for SignalLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.family, self.index)?;
        if let Some((tau, w)) = self.shift {
            write!(f, "@{tau},{w}")?;
        }
        Ok(())
    }
}

impl FromStr for SignalLabel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::UnknownLabel(s.to_string());
        let (base, shift) = match s.split_once('@') {
            Some((b, sh)) => {
                let (t, w) = sh.split_once(',').ok_or_else(bad)?;
                (b, Some((t.parse().map_err(|_| bad())?, w.parse().map_err(|_| bad())?)))
            }
            None => (s, None),
        };
        let (fam, idx) = base.split_once(':').ok_or_else(bad)?;
        Ok(Self {
            family: fam.parse().map_err(|_| bad())?,
            index: idx.parse().map_err(|_| bad())?,
            shift,
        })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct LabeledSignal {
    pub label: SignalLabel,
    pub signal: Signal,
    /// Eigenvalue under the family's generator operator (oscillator systems).
    pub eigenvalue: Option<Complex64>,
}

/// A collection of labeled signals over F_p.
///
/// For oscillator systems `tori[label.family]` describes the torus a signal
/// belongs to. Heisenberg systems use family `m < p` for the line
/// `{(tau, m tau)}` and family `p` for the vertical line `{(0, w)}`.
#[derive(Clone, Debug, PartialEq)]
pub struct SignalSystem {
    pub p: u64,
    pub kind: SystemKind,
    /// Kind of the underlying system when `kind` is `Extended`.
    pub base_kind: Option<SystemKind>,
    pub tori: Vec<TorusDescriptor>,
    pub signals: Vec<LabeledSignal>,
}

impl SignalSystem {
    pub fn len(&self) -> usize {
        self.signals.len()
    }

    pub fn is_empty(&self) -> bool {
        self.signals.is_empty()
    }

    /// Kind of the signals before any time-frequency translation.
    pub fn effective_kind(&self) -> SystemKind {
        self.base_kind.unwrap_or(self.kind)
    }

    /// Size of the commutative group each family is attached to: `#T` for a
    /// torus, `p` for a line.
    pub fn family_order(&self) -> usize {
        let p = self.p as usize;
        match self.effective_kind() {
            SystemKind::Split => p - 1,
            SystemKind::NonSplit => p + 1,
            _ => p,
        }
    }

    pub fn family_count(&self) -> usize {
        let mut fams: Vec<usize> = self.signals.iter().map(|s| s.label.family).collect();
        fams.sort_unstable();
        fams.dedup();
        fams.len()
    }

    /// Signals of one family in index order.
    pub fn family(&self, family: usize) -> Vec<&LabeledSignal> {
        self.signals
            .iter()
            .filter(|s| s.label.family == family && s.label.shift.is_none())
            .collect()
    }

    pub fn find(&self, label: &SignalLabel) -> Option<&LabeledSignal> {
        self.signals.iter().find(|s| &s.label == label)
    }
}
