"""Maximal norm of a family of spherical means versus the largest single norm.

For each ``p`` the ratio ``||sup+_r sigma_r f||_p / max_r ||sigma_r f||_p`` is
at least one; how much larger it gets is what the maximal inequality
controls.  Small grid, so this runs in seconds.
"""

# %%
from __future__ import annotations

import math

import numpy as np

from heisenlab.experiments import random_field
from heisenlab.heisenberg import GeometryConfig
from heisenlab.nc_lp import AlgebraElement, lp_norm, maximal_norm
from heisenlab.special import SpectralPoint
from heisenlab.spectral import spherical_mean

geometry = GeometryConfig.uniform(rho_max=3.0, step=1.0, center_samples=5, lambda_set=(-2, -1, 1, 2), k_max=2)
rng = np.random.default_rng(7)
points = [SpectralPoint.laguerre(float(lam), k) for lam in (-2, -1, 1, 2) for k in range(3)]
f = random_field(rng, geometry, points, 2)

radii = np.geomspace(0.05, 4.0, 6)
family = [AlgebraElement.from_field(spherical_mean(f, r).to_physical(), hermitian=True) for r in radii]

# %%
for p in (1.0, 2.0, math.inf):
    result = maximal_norm(family, p)
    single = max(lp_norm(x, p) for x in family)
    print(f"p = {p:>4}: maximal {result.value:.5f}  largest single {single:.5f}  ratio {result.value / single:.4f}"
          f"  ({result.iterations} barrier rounds)")

# %% the certificate a satisfies -a <= x_i <= a for every member of the family
a = result.certificate.values
slack = min(np.linalg.eigvalsh(a - s * x.values).min() for x in family for s in (1, -1))
print("smallest eigenvalue of a -+ x_i:", f"{slack:.2e}")
