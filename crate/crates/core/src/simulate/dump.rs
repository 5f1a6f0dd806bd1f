//! Binary ensemble dump for cross-implementation comparison.
//!
//! Layout, all little-endian:
//!
//! ```text
//! u64 n | u64 P | u64 d | u64 seed
//! f64 states[P][n + 1][d]        (particle-major, row-major)
//! ```
//!
//! Increments are not written; they are a function of `seed`.

use std::io::{Read, Write};

use super::PathEnsemble;
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct EnsembleDump {
    pub n: usize,
    pub particles: usize,
    pub d: usize,
    pub seed: u64,
    /// `[p][k][i]`.
    pub states: Vec<f64>,
}

impl EnsembleDump {
    pub fn state(&self, p: usize, k: usize) -> &[f64] {
        let off = (p * (self.n + 1) + k) * self.d;
        &self.states[off..off + self.d]
    }
}

pub fn write_dump(ens: &PathEnsemble, mut w: impl Write) -> Result<()> {
    for v in [ens.n() as u64, ens.particles() as u64, ens.dim() as u64, ens.seed()] {
        w.write_all(&v.to_le_bytes())?;
    }
    let mut buf = Vec::with_capacity((ens.n() + 1) * ens.dim() * 8);
    for p in 0..ens.particles() {
        buf.clear();
        for k in 0..=ens.n() {
            for v in ens.state(p, k) {
                buf.extend_from_slice(&v.to_le_bytes());
            }
        }
        w.write_all(&buf)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_dump(mut r: impl Read) -> Result<EnsembleDump> {
    let mut word = [0u8; 8];
    let mut header = [0u64; 4];
    for h in header.iter_mut() {
        r.read_exact(&mut word)?;
        *h = u64::from_le_bytes(word);
    }
    let [n, particles, d, seed] = header;
    let count = particles
        .checked_mul(n + 1)
        .and_then(|v| v.checked_mul(d))
        .ok_or_else(|| Error::Overflow("dump header describes too many states".into()))?;
    let mut bytes = Vec::new();
    r.read_to_end(&mut bytes)?;
    if bytes.len() as u64 != count * 8 {
        return Err(Error::Problem(format!(
            "dump body has {} bytes, header implies {}",
            bytes.len(),
            count * 8
        )));
    }
    let states = bytes
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().expect("chunk of 8")))
        .collect();
    Ok(EnsembleDump {
        n: n as usize,
        particles: particles as usize,
        d: d as usize,
        seed,
        states,
    })
}
