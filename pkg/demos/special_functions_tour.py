"""Normalised Laguerre functions, spherical functions and fractional integrals.

A quick numerical tour: the contraction bound on spherical functions, the
Littlewood-Paley integral of their radial derivative, and Riemann-Liouville
integrals of an operator-valued path against their closed forms.
"""

# %%
from __future__ import annotations

import math

import numpy as np

from heisenlab.special import SpectralPoint, psi, spherical_fn
from heisenlab.spectral import OperatorPath, fractional_integral, spectral_derivative_integral

r = np.linspace(0.0, 30.0, 3001)
for k in (0, 5, 50):
    print(f"psi_{k}(r) with order 1: max |.| = {np.max(np.abs(psi(k, 1.0, r))):.6f}, value at 0 = {psi(k, 1.0, 0.0)}")

# %% spherical functions never exceed one in modulus
points = [SpectralPoint.laguerre(4.0, 10), SpectralPoint.bessel(2.5), SpectralPoint.trivial()]
for zeta in points:
    print(zeta, "sup |phi| =", f"{np.max(np.abs(spherical_fn(zeta, r, 2))):.6f}")

# %% integral of r |d/dr phi(r)|^2 dr: independent of the scale for Bessel points
for zeta in (SpectralPoint.laguerre(1.0, 0), SpectralPoint.laguerre(1.0, 8), SpectralPoint.bessel(0.3), SpectralPoint.bessel(3.0)):
    print(zeta, f"{spectral_derivative_integral(zeta, 2, 1):.6f}")

# %% I^a r^m = Gamma(m+1)/Gamma(m+a+1) r^(m+a)
X = np.array([[1.0, 0.5j], [-0.5j, 2.0]])
path = OperatorPath.from_function(lambda s: np.asarray(s)[..., None, None] ** 2 * X)
for a in (0.5, 1.0, 2.5):
    exact = math.gamma(3) / math.gamma(3 + a) * 2.0 ** (2 + a) * X
    err = np.linalg.norm(fractional_integral(path, a, 2.0) - exact) / np.linalg.norm(exact)
    print(f"a = {a}: relative error {err:.1e}")
