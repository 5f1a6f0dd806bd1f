//! Euler ensembles of the forward diffusion.

pub mod dump;
pub mod rng;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::ProblemSpec;
use crate::par::CHUNK;
use rng::{NormalStream, Purpose};

/// `P` Euler paths on an `n`-step grid starting at the problem's `(t0, x0)`.
///
/// States are stored densely, step-major (`[k][p][i]`), so the particles of
/// one time step are contiguous for regression. Brownian increments are not
/// stored: they are regenerated bit-identically from the counter-based
/// stream whenever [`increment_into`](PathEnsemble::increment_into) is called.
#[derive(Debug, Clone)]
pub struct PathEnsemble {
    n: usize,
    particles: usize,
    d: usize,
    t0: f64,
    h: f64,
    seed: u64,
    states: Vec<f64>,
    stream: NormalStream,
}

/// Sample moments of the increments against their nominal law.
#[derive(Debug, Clone, Serialize)]
pub struct IncrementCheck {
    /// Largest |mean| / stderr over components.
    pub max_mean_score: f64,
    /// Largest |var - h| / stderr over components.
    pub max_var_score: f64,
    pub flagged: bool,
}

impl PathEnsemble {
    pub fn n(&self) -> usize {
        self.n
    }
    pub fn particles(&self) -> usize {
        self.particles
    }
    pub fn dim(&self) -> usize {
        self.d
    }
    pub fn h(&self) -> f64 {
        self.h
    }
    pub fn t0(&self) -> f64 {
        self.t0
    }
    pub fn seed(&self) -> u64 {
        self.seed
    }
    pub fn time(&self, k: usize) -> f64 {
        self.t0 + k as f64 * self.h
    }

    /// State of particle `p` at step `k`.
    pub fn state(&self, p: usize, k: usize) -> &[f64] {
        let off = (k * self.particles + p) * self.d;
        &self.states[off..off + self.d]
    }

    /// All particle states at step `k`, `P x d` row-major.
    pub fn step_states(&self, k: usize) -> &[f64] {
        let len = self.particles * self.d;
        &self.states[k * len..(k + 1) * len]
    }

    /// Brownian increment of particle `p` over `[t_k, t_{k+1}]`.
    pub fn increment_into(&self, p: usize, k: usize, out: &mut [f64]) {
        self.stream.fill(k as u64, p as u64, out);
        let s = self.h.sqrt();
        out.iter_mut().for_each(|v| *v *= s);
    }

    /// Compares the increments' sample mean and variance with `0` and `h`.
    /// Flags a score above five standard errors; never fails.
    pub fn increment_check(&self) -> IncrementCheck {
        let d = self.d;
        let total = (self.n * self.particles) as f64;
        let partials: Vec<Vec<(f64, f64)>> = crate::par::map_chunks(self.particles, |r| {
            let mut acc = vec![(0.0, 0.0); d];
            let mut dw = vec![0.0; d];
            for p in r {
                for k in 0..self.n {
                    self.increment_into(p, k, &mut dw);
                    for (a, v) in acc.iter_mut().zip(&dw) {
                        a.0 += v;
                        a.1 += v * v;
                    }
                }
            }
            acc
        });
        let (mut max_mean, mut max_var) = (0.0f64, 0.0f64);
        for i in 0..d {
            let (s1, s2) = partials
                .iter()
                .fold((0.0, 0.0), |acc, c| (acc.0 + c[i].0, acc.1 + c[i].1));
            let mean = s1 / total;
            let var = s2 / total - mean * mean;
            max_mean = max_mean.max(mean.abs() / (self.h / total).sqrt());
            max_var = max_var.max((var - self.h).abs() / (self.h * (2.0 / total).sqrt()));
        }
        IncrementCheck {
            max_mean_score: max_mean,
            max_var_score: max_var,
            flagged: max_mean > 5.0 || max_var > 5.0,
        }
    }

    /// All states, step-major: `[k][p][i]`.
    pub fn states(&self) -> &[f64] {
        &self.states
    }
}

struct StepScratch {
    b: Vec<f64>,
    s: Vec<f64>,
    dw: Vec<f64>,
}

impl StepScratch {
    fn new(d: usize) -> Self {
        StepScratch {
            b: vec![0.0; d],
            s: vec![0.0; d * d],
            dw: vec![0.0; d],
        }
    }
}

/// One Euler step; `dw` must already hold the increment.
fn euler_step(spec: &ProblemSpec, t: f64, h: f64, x: &[f64], sc: &mut StepScratch, out: &mut [f64]) -> Result<()> {
    let d = x.len();
    spec.drift_into(t, x, &mut sc.b)?;
    spec.sigma_into(t, x, &mut sc.s)?;
    for i in 0..d {
        let row = &sc.s[i * d..(i + 1) * d];
        let noise: f64 = row.iter().zip(&sc.dw).map(|(a, w)| a * w).sum();
        out[i] = x[i] + h * sc.b[i] + noise;
    }
    if out.iter().any(|v| !v.is_finite()) {
        return Err(Error::Domain {
            op: "euler step",
            detail: format!("non-finite state {out:?}"),
        });
    }
    Ok(())
}

fn check_sizes(n: usize, particles: usize) -> Result<()> {
    if n == 0 {
        return Err(Error::param("n", 0.0, "need at least one time step"));
    }
    if particles == 0 {
        return Err(Error::param("P", 0.0, "need at least one particle"));
    }
    if n > u32::MAX as usize {
        return Err(Error::param("n", n as f64, "too many steps for the counter layout"));
    }
    Ok(())
}

/// Simulates `particles` Euler paths of the forward equation with `n` steps.
pub fn euler_paths(spec: &ProblemSpec, n: usize, particles: usize, seed: u64) -> Result<PathEnsemble> {
    check_sizes(n, particles)?;
    let d = spec.dim();
    let h = (spec.horizon() - spec.t0()) / n as f64;
    if !(h > 0.0) {
        return Err(Error::Grid(format!("empty time interval [{}, {}]", spec.t0(), spec.horizon())));
    }
    let stride = particles * d;
    let mut states = Vec::new();
    states
        .try_reserve_exact(stride * (n + 1))
        .map_err(|_| Error::Overflow(format!("cannot allocate {} states", stride * (n + 1))))?;
    for _ in 0..particles {
        states.extend_from_slice(spec.x0());
    }
    states.resize(stride * (n + 1), 0.0);

    let stream = NormalStream::new(seed, Purpose::Increments);
    let sqrt_h = h.sqrt();
    for k in 0..n {
        let t = spec.t0() + k as f64 * h;
        let (done, rest) = states.split_at_mut((k + 1) * stride);
        let prev = &done[k * stride..];
        let next = &mut rest[..stride];
        let results: Vec<Result<()>> = next
            .par_chunks_mut(CHUNK * d)
            .enumerate()
            .map(|(c, out)| {
                let mut sc = StepScratch::new(d);
                for (local, o) in out.chunks_mut(d).enumerate() {
                    let p = c * CHUNK + local;
                    let x = &prev[p * d..(p + 1) * d];
                    stream.fill(k as u64, p as u64, &mut sc.dw);
                    sc.dw.iter_mut().for_each(|v| *v *= sqrt_h);
                    euler_step(spec, t, h, x, &mut sc, o).map_err(|e| Error::PathEvaluation {
                        particle: p,
                        step: k,
                        state: x.to_vec(),
                        source: Box::new(e),
                    })?;
                }
                Ok(())
            })
            .collect();
        results.into_iter().collect::<Result<Vec<()>>>()?;
    }
    Ok(PathEnsemble {
        n,
        particles,
        d,
        t0: spec.t0(),
        h,
        seed,
        states,
        stream,
    })
}

/// Terminal states only (`particles x d`), without storing the paths.
/// With `Purpose::Increments` the result equals the last step of
/// [`euler_paths`] for the same seed.
pub fn terminal_states(
    spec: &ProblemSpec,
    n: usize,
    particles: usize,
    seed: u64,
    purpose: Purpose,
) -> Result<Vec<f64>> {
    check_sizes(n, particles)?;
    let d = spec.dim();
    let h = (spec.horizon() - spec.t0()) / n as f64;
    let stream = NormalStream::new(seed, purpose);
    let sqrt_h = h.sqrt();
    let mut out = vec![0.0; particles * d];
    let results: Vec<Result<()>> = out
        .par_chunks_mut(CHUNK * d)
        .enumerate()
        .map(|(c, block)| {
            let mut sc = StepScratch::new(d);
            let mut x = spec.x0().to_vec();
            let mut y = vec![0.0; d];
            for (local, o) in block.chunks_mut(d).enumerate() {
                let p = c * CHUNK + local;
                x.copy_from_slice(spec.x0());
                for k in 0..n {
                    let t = spec.t0() + k as f64 * h;
                    stream.fill(k as u64, p as u64, &mut sc.dw);
                    sc.dw.iter_mut().for_each(|v| *v *= sqrt_h);
                    euler_step(spec, t, h, &x, &mut sc, &mut y).map_err(|e| Error::PathEvaluation {
                        particle: p,
                        step: k,
                        state: x.clone(),
                        source: Box::new(e),
                    })?;
                    std::mem::swap(&mut x, &mut y);
                }
                o.copy_from_slice(&x);
            }
            Ok(())
        })
        .collect();
    results.into_iter().collect::<Result<Vec<()>>>()?;
    Ok(out)
}
