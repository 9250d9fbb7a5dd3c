"""Regenerate ``psi_oracle.npz``: normalised Laguerre functions from the
terminating confluent hypergeometric series at 60 digits.

    psi^a_k(r) = 1F1(-k; a+1; r^2/2) exp(-r^2/4)

Run from the repository root: ``python3 tests/data/make_psi_oracle.py``.
"""

from __future__ import annotations

from pathlib import Path

import mpmath as mp
import numpy as np

K_VALUES = (0, 1, 2, 3, 5, 8, 13, 20, 30, 40, 50)
ORDERS = (0.0, 0.5, 1.0, 1.0 + 2.0j)
RADII = np.concatenate([[1e-6, 1e-3, 0.1], np.linspace(0.25, 30.0, 120)])


def terminating_series(k: int, b, x):
    """``1F1(-k; b; x)`` summed term by term (it is a polynomial)."""
    term, total = mp.mpf(1), mp.mpf(1)
    for j in range(k):
        term *= (j - k) * x / ((b + j) * (j + 1))
        total += term
    return total


def main() -> None:
    mp.mp.dps = 60
    values = np.zeros((len(K_VALUES), len(ORDERS), RADII.size), dtype=complex)
    for i, k in enumerate(K_VALUES):
        for j, a in enumerate(ORDERS):
            aa = mp.mpc(a.real, a.imag) if isinstance(a, complex) else mp.mpf(a)
            for m, r in enumerate(RADII):
                x = mp.mpf(float(r)) ** 2 / 2
                values[i, j, m] = complex(terminating_series(k, aa + 1, x) * mp.exp(-x / 2))
    out = Path(__file__).with_name("psi_oracle.npz")
    np.savez_compressed(out, k=np.array(K_VALUES), orders=np.array(ORDERS, dtype=complex), r=RADII, values=values)
    print(f"wrote {out}")


if __name__ == "__main__":
    main()
