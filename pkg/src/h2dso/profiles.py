"""Synthetic two-week load and PV profiles.

The hourly shapes are deterministic functions of a seed: a double-peaked
residential/commercial load with lighter weekends, and a clear-sky solar
bell attenuated by a per-day cloud factor. Both are rescaled so the load
energy and the PV energy hit their targets exactly.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

HORIZON = 336
LOAD_ENERGY_MWH = 925.0
SUNRISE, SUNSET = 6.0, 19.0


@dataclass(frozen=True)
class ProfileSet:
    """``load``: per-hour multipliers on the base bus loads; ``pv``: per-unit PV availability.

    ``pv_scale_mw`` is the MW of availability per unit of ``pv`` at 100 %
    penetration, fixed on the full horizon so that windows keep the same
    absolute PV power.
    """

    load: np.ndarray
    pv: np.ndarray
    base_load_mw: float
    penetration: float
    seed: int | None
    pv_scale_mw: float

    @property
    def hours(self) -> int:
        return len(self.load)

    def load_mw(self) -> np.ndarray:
        return self.load * self.base_load_mw

    def bus_load(self, base: np.ndarray) -> np.ndarray:
        """Hour-by-bus array: base bus loads scaled by the hourly multiplier."""
        return np.outer(self.load, np.asarray(base, dtype=float))

    def pv_available_mw(self, penetration: float | None = None) -> np.ndarray:
        pen = self.penetration if penetration is None else penetration
        return self.pv * (pen * self.pv_scale_mw)

    def window(self, start: int, hours: int) -> "ProfileSet":
        return replace(self, load=self.load[start:start + hours].copy(),
                       pv=self.pv[start:start + hours].copy())


def _load_shape(hours: int, rng: np.random.Generator) -> np.ndarray:
    h = np.arange(hours)
    hod = h % 24
    day = h // 24
    morning = np.exp(-0.5 * ((hod - 8.5) / 2.0) ** 2)
    evening = np.exp(-0.5 * ((hod - 19.0) / 2.5) ** 2)
    midday = np.exp(-0.5 * ((hod - 13.5) / 3.5) ** 2)
    shape = 0.62 + 0.22 * morning + 0.35 * evening + 0.12 * midday
    weekend = (day % 7) >= 5
    shape = np.where(weekend, 0.9 * shape, shape)
    daily = 1.0 + 0.04 * rng.standard_normal(hours // 24 + 1)
    shape = shape * daily[day]
    shape *= 1.0 + 0.01 * rng.standard_normal(hours)
    return shape


def _pv_shape(hours: int, rng: np.random.Generator) -> np.ndarray:
    h = np.arange(hours)
    hod = (h % 24) + 0.5
    arg = (hod - SUNRISE) / (SUNSET - SUNRISE)
    bell = np.where((arg > 0) & (arg < 1), np.sin(np.pi * np.clip(arg, 0, 1)), 0.0) ** 1.3
    cloud = rng.uniform(0.55, 1.0, hours // 24 + 1)
    hourly = np.clip(1.0 - 0.08 * rng.random(hours), 0.0, 1.0)
    return bell * cloud[h // 24] * hourly


def gen_profiles(seed: int = 0, penetration: float = 1.2, hours: int = HORIZON,
                 base_load_mw: float = 3.715, load_energy: float = LOAD_ENERGY_MWH) -> ProfileSet:
    """Seeded synthetic profiles; load energy equals ``load_energy`` exactly.

    PV availability is normalised to a unit peak; its MW scaling is applied
    by :meth:`ProfileSet.pv_available_mw` so that the PV energy equals
    ``penetration * load_energy``.
    """
    if penetration <= 0:
        raise ValueError("penetration must be positive")
    rng = np.random.default_rng(seed)
    load = _load_shape(hours, rng)
    pv = _pv_shape(hours, rng)
    return profiles_from_series(load, pv, penetration, seed, base_load_mw, load_energy)


def profiles_from_series(load, pv, penetration: float = 1.2, seed: int | None = None,
                         base_load_mw: float = 3.715,
                         load_energy: float = LOAD_ENERGY_MWH) -> ProfileSet:
    """Rescale raw hourly shapes so they hit the same energy targets as the synthetic set."""
    load = np.asarray(load, dtype=float).copy()
    pv = np.asarray(pv, dtype=float).copy()
    if load.ndim != 1 or pv.shape != load.shape:
        raise ValueError("load and PV series must be one-dimensional and of equal length")
    if penetration <= 0:
        raise ValueError("penetration must be positive")
    if np.any(load < 0) or np.any(pv < 0) or not (np.all(np.isfinite(load)) and np.all(np.isfinite(pv))):
        raise ValueError("profile values must be finite and non-negative")
    if load.sum() <= 0 or pv.max() <= 0:
        raise ValueError("profiles must not be identically zero")
    load *= load_energy / (load.sum() * base_load_mw)
    pv /= pv.max()
    return ProfileSet(load=load, pv=pv, base_load_mw=base_load_mw, penetration=penetration,
                      seed=seed, pv_scale_mw=load_energy / pv.sum())
