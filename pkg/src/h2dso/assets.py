"""Asset parameters, storage dynamics and capital-cost annualisation.

Units: power in MW, energy in MWh, hydrogen in kg, prices in $/MWh, capital
costs in $/kW (or $/kg for tanks). Default values are the 2050 cost inputs
used for the case studies; values marked *placeholder* have no published
source and are meant to be overridden from the case configuration.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

HOURS_PER_YEAR = 8760.0


@dataclass(frozen=True)
class DgSpec:
    name: str
    bus: int
    capacity: float          # MW
    lcoe: float              # $/MWh at the reference capacity factor
    nrel_cf: float           # reference capacity factor (fraction)
    ramp: float | None = None        # MW/h; None -> 25 % of capacity (placeholder)
    no_load_cost: float | None = None  # $/h committed; None -> 2 % of lcoe*capacity (placeholder)
    min_output: float = 0.0  # MW

    def __post_init__(self):
        if not 0.0 < self.nrel_cf <= 1.0:
            raise ValueError(f"{self.name}: reference capacity factor must be in (0, 1]")
        if self.ramp is None:
            object.__setattr__(self, "ramp", 0.25 * self.capacity)
        if self.no_load_cost is None:
            object.__setattr__(self, "no_load_cost", 0.02 * self.lcoe * self.capacity)
        if self.ramp <= 0:
            raise ValueError(f"{self.name}: ramp must be positive")
        if not 0.0 <= self.min_output <= self.capacity:
            raise ValueError(f"{self.name}: min_output must lie in [0, capacity]")

    def with_lcoe(self, lcoe: float) -> "DgSpec":
        return replace(self, lcoe=lcoe)


@dataclass(frozen=True)
class PvSpec:
    buses: tuple[int, ...] = (10, 18, 19, 25, 28, 33)
    lcoe: float = 12.0
    penetration: float = 1.2

    def __post_init__(self):
        object.__setattr__(self, "buses", tuple(self.buses))
        if self.penetration <= 0:
            raise ValueError("PV penetration must be positive")


@dataclass(frozen=True)
class BatterySpec:
    name: str
    bus: int = 6
    duration: float = 4.0            # h
    rte: float = 0.81                # round trip
    capex_per_kw: float = 613.0      # $/kW of power rating (energy block included)
    power_rating: float | None = None  # MW; None -> sized by the optimiser
    lifetime_key: str = "battery"
    boundary_frac: float = 0.0       # SOC at start and end as a fraction of energy rating

    def __post_init__(self):
        if not 0.0 < self.rte <= 1.0:
            raise ValueError(f"{self.name}: round-trip efficiency must be in (0, 1]")
        if self.duration <= 0:
            raise ValueError(f"{self.name}: duration must be positive")

    @property
    def eta(self) -> float:
        """One-way efficiency, the symmetric split of the round trip."""
        return math.sqrt(self.rte)

    @property
    def energy_rating(self) -> float | None:
        if self.power_rating is None:
            return None
        return self.duration * self.power_rating


LI_ION = BatterySpec("li-ion-4h", duration=4.0, rte=0.81, capex_per_kw=613.0)
FLOW = BatterySpec("flow-10h", duration=10.0, rte=0.67, capex_per_kw=1370.0)


@dataclass(frozen=True)
class H2Spec:
    bus: int = 19
    eta_ez: float = 0.60
    eta_fc: float = 0.70
    e_spec: float = 57.5         # kWh of electricity per kg produced
    ez_capex: float = 100.0      # $/kW
    comp_capex: float = 148.0    # $/kW of electrolyser rating
    tank_capex: float = 240.0    # $/kg
    fc_capex: float = 500.0      # $/kW
    init_frac: float = 0.10
    final_frac: float = 0.10
    storage_cost: float = 0.02   # $/kg
    include_compressor: bool = True
    compression_kwh_per_kg: float = 0.0

    def __post_init__(self):
        for frac in (self.init_frac, self.final_frac):
            if not 0.0 <= frac <= 1.0:
                raise ValueError("tank boundary fractions must lie in [0, 1]")
        if self.e_spec <= 0:
            raise ValueError("e_spec must be positive")
        if not (0.0 < self.eta_ez <= 1.0 and 0.0 < self.eta_fc <= 1.0):
            raise ValueError("electrolyser and fuel-cell efficiencies must lie in (0, 1]")

    @property
    def rte(self) -> float:
        return self.eta_ez * self.eta_fc

    @property
    def kg_per_mwh_in(self) -> float:
        return 1000.0 / (self.e_spec + self.compression_kwh_per_kg)

    @property
    def kg_per_mwh_out(self) -> float:
        return 1000.0 / (self.e_spec * self.rte)

    @property
    def ez_capex_total(self) -> float:
        return self.ez_capex + (self.comp_capex if self.include_compressor else 0.0)


@dataclass(frozen=True)
class FinParams:
    """Financing assumptions (placeholders: 7 %/yr and typical asset lives)."""

    interest: float = 0.07
    lifetimes: dict = field(default_factory=lambda: {
        "battery": 15, "electrolyzer": 10, "fuel_cell": 10, "tank": 20, "compressor": 20})
    horizon_fraction: float = 14.0 / 365.0

    def __post_init__(self):
        if self.interest <= 0:
            raise ValueError("interest must be positive")
        if any(n < 1 for n in self.lifetimes.values()):
            raise ValueError("lifetimes must be at least one year")

    def crf(self, asset: str) -> float:
        return crf(self.interest, self.lifetimes[asset])


def default_dgs() -> tuple[DgSpec, ...]:
    return (
        DgSpec("DG8", bus=8, capacity=0.8, lcoe=36.0, nrel_cf=0.88),
        DgSpec("DG13", bus=13, capacity=2.4, lcoe=95.0, nrel_cf=0.12),
        DgSpec("DG30", bus=30, capacity=1.0, lcoe=98.0, nrel_cf=0.12),
    )


# -- finance -------------------------------------------------------------------
def crf(interest: float, lifetime: float) -> float:
    """Capital recovery factor i(1+i)^n / ((1+i)^n - 1)."""
    if lifetime < 1:
        raise ValueError("lifetime must be at least one year")
    if interest == 0:
        return 1.0 / lifetime
    g = (1.0 + interest) ** lifetime
    return interest * g / (g - 1.0)


def horizon_capex(capacity: float, capex: float, fin: FinParams, asset: str | None = None,
                  crf_value: float | None = None) -> float:
    """Capital charge attributed to the study horizon.

    ``capacity * capex * crf * horizon_fraction``; linear in capacity so the
    per-unit charge can be used directly as an objective coefficient. Pass
    either the asset class (to look up its lifetime) or an explicit CRF.
    """
    if capacity < 0:
        raise ValueError("capacity must be non-negative")
    if crf_value is None:
        crf_value = fin.crf(asset) if asset is not None else crf(fin.interest, 10)
    return capacity * capex * crf_value * fin.horizon_fraction


# -- dynamics --------------------------------------------------------------------
def soc_transition(soc: float, charge: float, discharge: float, spec: BatterySpec,
                   dt: float = 1.0) -> float:
    """Next state of charge in MWh; bounds are left to the optimiser."""
    return soc + spec.eta * charge * dt - discharge * dt / spec.eta


def tank_transition(mass: float, p_ez: float, p_fc: float, spec: H2Spec, dt: float = 1.0) -> float:
    """Next tank inventory in kg for electrolyser input ``p_ez`` and fuel-cell output ``p_fc``."""
    return mass + spec.kg_per_mwh_in * p_ez * dt - spec.kg_per_mwh_out * p_fc * dt
