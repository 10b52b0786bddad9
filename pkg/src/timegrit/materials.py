"""Material laws: constant and field-dependent reluctivity, conductivity map.

The nonlinear reluctivity nu(B) is built from a B-H sample table by monotone
cubic (PCHIP) interpolation of nu = H/B; past the last sample it continues
linearly in B and is capped at the vacuum value 1/mu0.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.interpolate import PchipInterpolator

MU0 = 4.0e-7 * math.pi
VACUUM_RELUCTIVITY = 1.0 / MU0


class ConstantReluctivity:
    is_linear = True

    def __init__(self, nu: float):
        if not (0.0 < nu <= VACUUM_RELUCTIVITY * (1.0 + 1e-12)):
            raise ValueError(f"reluctivity must lie in (0, 1/mu0], got {nu}")
        self._nu = float(nu)

    def nu(self, b):
        return np.full_like(np.asarray(b, dtype=float), self._nu)

    def dnu_db(self, b):
        return np.zeros_like(np.asarray(b, dtype=float))


class SplineReluctivity:
    """Monotone C1 reluctivity curve from B-H samples."""

    is_linear = False

    def __init__(self, b_samples, h_samples):
        b = np.asarray(b_samples, dtype=float)
        h = np.asarray(h_samples, dtype=float)
        if b.ndim != 1 or b.shape != h.shape or b.size < 3:
            raise ValueError("need matching 1-D B and H sample arrays with >= 3 points")
        if b[0] != 0.0 or h[0] != 0.0:
            raise ValueError("B-H table must start at (0, 0)")
        if np.any(np.diff(b) <= 0.0) or np.any(np.diff(h) <= 0.0):
            raise ValueError("B-H table must be strictly increasing")
        nu = np.empty_like(b)
        nu[1:] = h[1:] / b[1:]
        nu[0] = nu[1]  # flat start keeps nu bounded and monotone at B = 0
        if np.any(np.diff(nu) < 0.0):
            raise ValueError("table yields non-monotone reluctivity")
        if nu[-1] > VACUUM_RELUCTIVITY:
            raise ValueError("table reluctivity exceeds the vacuum value 1/mu0")
        self.b_max = float(b[-1])
        self.nu_samples = nu
        self.b_samples = b
        self._spline = PchipInterpolator(b, nu, extrapolate=False)
        self._dspline = self._spline.derivative()
        self._end_slope = max(float(self._dspline(self.b_max)), 0.0)
        self._nu_end = float(nu[-1])

    def nu(self, b):
        b = np.abs(np.asarray(b, dtype=float))
        inside = b <= self.b_max
        out = np.empty_like(b)
        out[inside] = self._spline(b[inside])
        tail = self._nu_end + self._end_slope * (b[~inside] - self.b_max)
        out[~inside] = np.minimum(tail, VACUUM_RELUCTIVITY)
        return out

    def dnu_db(self, b):
        b = np.abs(np.asarray(b, dtype=float))
        inside = b <= self.b_max
        out = np.empty_like(b)
        out[inside] = self._dspline(b[inside])
        tail = self._nu_end + self._end_slope * (b[~inside] - self.b_max)
        out[~inside] = np.where(tail < VACUUM_RELUCTIVITY, self._end_slope, 0.0)
        return out


# Default B-H curve loosely shaped like electrical steel.  This is an artifact
# choice (values synthesised to be smooth, monotone and capped below 1/mu0),
# not measured data.
_DEFAULT_MU_R = np.array([2000.0, 2000.0, 1800.0, 1500.0, 1200.0, 900.0,
                          600.0, 350.0, 200.0, 120.0, 70.0, 40.0, 25.0])
_DEFAULT_B = np.array([0.0, 0.2, 0.4, 0.6, 0.8, 1.0,
                       1.2, 1.4, 1.5, 1.6, 1.7, 1.8, 2.0])


def default_bh_table() -> tuple[np.ndarray, np.ndarray]:
    """(B [T], H [A/m]) samples of the built-in saturation curve."""
    nu = 1.0 / (MU0 * _DEFAULT_MU_R)
    h = nu * _DEFAULT_B
    return _DEFAULT_B.copy(), h


def load_bh_table(path) -> tuple[np.ndarray, np.ndarray]:
    """Two-column text: B in tesla, H in A/m; lines starting with # ignored."""
    data = np.loadtxt(path, comments="#")
    if data.ndim != 2 or data.shape[1] != 2:
        raise ValueError(f"expected two columns in {path}")
    return data[:, 0], data[:, 1]


def save_bh_table(path, b_samples, h_samples) -> None:
    with open(path, "w") as fh:
        fh.write("# B[T]  H[A/m]\n")
        for b, h in zip(b_samples, h_samples):
            fh.write(f"{b:.17g} {h:.17g}\n")


@dataclass(frozen=True)
class MaterialMap:
    """Per-region conductivity [S/m] and reluctivity model.

    Conductivity is nonzero only in the shield; the wire and insulator are
    vacuum-like magnetically.
    """

    sigma: tuple[float, float, float] = (0.0, 0.0, 1.0e7)
    reluctivity: tuple = (
        ConstantReluctivity(VACUUM_RELUCTIVITY),
        ConstantReluctivity(VACUUM_RELUCTIVITY),
        SplineReluctivity(*default_bh_table()),
    )

    def __post_init__(self):
        if any(s < 0.0 for s in self.sigma):
            raise ValueError("conductivity must be nonnegative")
        if self.sigma[0] != 0.0 or self.sigma[1] != 0.0:
            raise ValueError("conductivity must vanish outside the shield region")

    @property
    def is_linear(self) -> bool:
        return all(model.is_linear for model in self.reluctivity)


def linear_materials(shield_mu_r: float = 1000.0, sigma: float = 1.0e7) -> MaterialMap:
    """Constant-reluctivity variant (one cached factorization per step size)."""
    return MaterialMap(
        sigma=(0.0, 0.0, float(sigma)),
        reluctivity=(
            ConstantReluctivity(VACUUM_RELUCTIVITY),
            ConstantReluctivity(VACUUM_RELUCTIVITY),
            ConstantReluctivity(1.0 / (MU0 * float(shield_mu_r))),
        ),
    )


def nonlinear_materials(sigma: float = 1.0e7, bh_table=None) -> MaterialMap:
    if bh_table is None:
        bh_table = default_bh_table()
    return MaterialMap(
        sigma=(0.0, 0.0, float(sigma)),
        reluctivity=(
            ConstantReluctivity(VACUUM_RELUCTIVITY),
            ConstantReluctivity(VACUUM_RELUCTIVITY),
            SplineReluctivity(*bh_table),
        ),
    )
