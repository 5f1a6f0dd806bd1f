"""One-shot reference values for the Cole-Hopf oracle tests.

Y0 = log E[exp(sin(W_1))] for a standard Brownian motion W.

Run once; the printed numbers are frozen in crates/core/src/oracle.rs.
"""

import numpy as np
from scipy import integrate

SEED = 20240611
SAMPLES = 10_000_000
BATCH = 1_000_000


def monte_carlo():
    rng = np.random.default_rng(SEED)
    s1 = 0.0
    s2 = 0.0
    for _ in range(SAMPLES // BATCH):
        e = np.exp(np.sin(rng.standard_normal(BATCH)))
        s1 += e.sum()
        s2 += (e * e).sum()
    mean = s1 / SAMPLES
    var = s2 / SAMPLES - mean * mean
    y = np.log(mean)
    stderr = np.sqrt(var / SAMPLES) / mean
    return y, stderr


def quadrature():
    dens = lambda w: np.exp(np.sin(w) - 0.5 * w * w) / np.sqrt(2.0 * np.pi)
    val, err = integrate.quad(dens, -np.inf, np.inf, epsabs=1e-13, epsrel=1e-13, limit=200)
    return np.log(val), err / val


if __name__ == "__main__":
    y, se = monte_carlo()
    q, qe = quadrature()
    print(f"monte carlo  seed={SEED} samples={SAMPLES}: y = {y:.15f}  stderr = {se:.3e}")
    print(f"quadrature:                                   y = {q:.18f}  (est. rel err {qe:.1e})")
    print(f"difference / stderr = {(y - q) / se:+.2f}")
