//! JSON signal-set files.
//!
//! Floats are written in shortest round-trip form, so `load(save(S)) == S`
//! bit for bit.

use std::fs;
use std::path::Path;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::{PrimeField, Sl2};
use crate::oscillator::TorusDescriptor;
use crate::signal::Signal;
use crate::system::{LabeledSignal, SignalSystem, SystemKind, CONVENTIONS};

pub const FORMAT_VERSION: u32 = 1;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FileHeader {
    pub format_version: u32,
    pub p: u64,
    pub kind: SystemKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub base_kind: Option<SystemKind>,
    pub conventions: String,
    /// Generator of the multiplicative group.
    pub generator: u64,
    /// Smallest quadratic non-residue.
    pub nonsquare: u64,
    pub tori: Vec<TorusDescriptor>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FileSignal {
    pub label: String,
    pub values: Vec<[f64; 2]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub eigenvalue: Option<[f64; 2]>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SignalSetFile {
    pub header: FileHeader,
    pub signals: Vec<FileSignal>,
}

fn pair(z: Complex64) -> [f64; 2] {
    [z.re, z.im]
}

fn complex(v: [f64; 2]) -> Complex64 {
    Complex64::new(v[0], v[1])
}

impl SignalSetFile {
    pub fn from_system(f: &PrimeField, s: &SignalSystem) -> Self {
        Self {
            header: FileHeader {
                format_version: FORMAT_VERSION,
                p: s.p,
                kind: s.kind,
                base_kind: s.base_kind,
                conventions: CONVENTIONS.to_string(),
                generator: f.generator(),
                nonsquare: f.nonsquare(),
                tori: s.tori.clone(),
            },
            signals: s
                .signals
                .iter()
                .map(|ls| FileSignal {
                    label: ls.label.to_string(),
                    values: ls.signal.values().iter().copied().map(pair).collect(),
                    eigenvalue: ls.eigenvalue.map(pair),
                })
                .collect(),
        }
    }

    /// Validates the header and rebuilds the system.
    pub fn into_system(self) -> Result<SignalSystem> {
        let h = self.header;
        if h.format_version != FORMAT_VERSION {
            return Err(Error::Format(format!(
                "unsupported format version {}",
                h.format_version
            )));
        }
        if h.conventions != CONVENTIONS {
            return Err(Error::Format(format!(
                "conventions tag `{}` does not match `{CONVENTIONS}`",
                h.conventions
            )));
        }
        let f = PrimeField::new(h.p)?;
        if h.generator != f.generator() || h.nonsquare != f.nonsquare() {
            return Err(Error::Format("generator or non-square disagrees with the field".into()));
        }
        for t in &h.tori {
            for g in [t.conjugator, t.generator] {
                let [a, b, c, d] = g.entries();
                Sl2::new(h.p, a, b, c, d)?;
            }
        }
        let signals = self
            .signals
            .into_iter()
            .map(|fs| {
                if fs.values.len() != h.p as usize {
                    return Err(Error::DimensionMismatch {
                        expected: h.p as usize,
                        found: fs.values.len(),
                    });
                }
                Ok(LabeledSignal {
                    label: fs.label.parse()?,
                    signal: Signal::new(fs.values.into_iter().map(complex).collect()),
                    eigenvalue: fs.eigenvalue.map(complex),
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(SignalSystem {
            p: h.p,
            kind: h.kind,
            base_kind: h.base_kind,
            tori: h.tori,
            signals,
        })
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string(self)?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }
}

pub fn save(path: &Path, f: &PrimeField, s: &SignalSystem) -> Result<()> {
    let mut text = SignalSetFile::from_system(f, s).to_json()?;
    text.push('\n');
    fs::write(path, text)?;
    Ok(())
}

pub fn load(path: &Path) -> Result<SignalSystem> {
    SignalSetFile::from_json(&fs::read_to_string(path)?)?.into_system()
}
