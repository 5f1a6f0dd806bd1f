"""Reference table for the Lipschitz Z-bound.

|Z| <= exp((2 K_b + K_f_y) T) * sigma_sup * (K_g + T K_f_x)

Five parameter draws from a seeded generator, each evaluated at 50 digits
with mpmath and printed as Rust literals. The rows are frozen in the
acceptance test.
"""

import mpmath as mp
import numpy as np

mp.mp.dps = 50
rng = np.random.default_rng(20240612)

for _ in range(5):
    k_b, k_fy, sigma, k_g, k_fx, t = (float(v) for v in np.round(rng.uniform(0.0, 2.0, 6), 3))
    t = max(t, 0.1)
    bound = mp.e ** ((2 * mp.mpf(k_b) + mp.mpf(k_fy)) * mp.mpf(t)) * mp.mpf(sigma) * (
        mp.mpf(k_g) + mp.mpf(t) * mp.mpf(k_fx)
    )
    print(f"    ({k_b!r}, {k_fy!r}, {sigma!r}, {k_g!r}, {k_fx!r}, {t!r}, {mp.nstr(bound, 20)}),")
