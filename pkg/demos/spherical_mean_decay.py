"""How fast do spherical means forget a field?

Laguerre-supported fields (central frequency bounded away from zero) lose
their non-invariant part at a Gaussian rate in the radius; Bessel-supported
fields only decay like a power.  Run with ``python demos/spherical_mean_decay.py``.
"""

# %%
from __future__ import annotations

import numpy as np

from heisenlab import GeometryConfig, SpectralField, SpectralPoint, spherical_mean
from heisenlab.experiments import random_field
from heisenlab.nc_lp import fixed_point_part

geometry = GeometryConfig.uniform()
rng = np.random.default_rng(1)

laguerre = [SpectralPoint.laguerre(float(lam), k) for lam in (-2, -1, 1, 2) for k in range(6)]
bessel = [SpectralPoint.bessel(float(u)) for u in geometry.bessel_grid.nodes[:10]]

fields = {
    "laguerre": random_field(rng, geometry, laguerre, 2),
    "bessel": random_field(rng, geometry, bessel, 2),
}

# %% relative distance to the invariant part
# r = 16 is avoided: the Fourier-Bessel nodes are chosen so every mode vanishes at the ball radius
radii = np.array([0.01, 0.5, 1.0, 2.0, 4.0, 8.0, 12.0, 24.0])
print(f"{'r':>6} " + " ".join(f"{name:>12}" for name in fields))
for r in radii:
    gaps = [(spherical_mean(f, r) - fixed_point_part(f)).l2_norm() / f.l2_norm() for f in fields.values()]
    print(f"{r:6.2f} " + " ".join(f"{g:12.3e}" for g in gaps))

# %% a single mode is an eigenvector; its multiplier is the spherical function
zeta = SpectralPoint.laguerre(1.0, 3)
f = SpectralField(geometry, {zeta: np.eye(2)})
print("\nmultiplier of", zeta, "at r = 2:", spherical_mean(f, 2.0).coefficients[zeta][0, 0].real)
