"""Run manifests and parameter files.

A manifest names the inputs (network, profiles, cost parameters), the cases
to run, where to write results and the seed for synthetic profiles. The cost
parameter file overrides the packaged defaults section by section; see
``h2dso/data/defaults.yaml`` for the full key set.
"""

from __future__ import annotations

import copy
import csv
import io
from dataclasses import dataclass, fields, replace
from importlib import resources
from pathlib import Path

import numpy as np
import yaml

from ..assets import LI_ION, BatterySpec, DgSpec, FinParams, H2Spec, PvSpec
from ..network import Network, ieee33, parse_network
from ..optimizer import CASE_IDS, CaseConfig, case_config
from ..profiles import HORIZON, ProfileSet, gen_profiles, profiles_from_series

FULL_NETWORK_HORIZON = 72
MANIFEST_KEYS = {"network", "load_profile", "pv_profile", "costs", "cases", "out", "seed",
                 "network_mode", "horizon", "workers"}


class ConfigError(ValueError):
    """Bad manifest, parameter file or input data (CLI exit status 1)."""


@dataclass(frozen=True)
class RunManifest:
    network: Path | None = None
    load_profile: Path | None = None
    pv_profile: Path | None = None
    costs: Path | None = None
    cases: tuple[str, ...] = CASE_IDS
    out_dir: Path = Path("results")
    seed: int = 0
    network_mode: str = "copperplate"
    horizon: int | None = None     # None: 336 h copperplate, 72 h full network
    workers: int = 1

    def __post_init__(self):
        cases = tuple(str(c).lower() for c in self.cases)
        bad = [c for c in cases if c not in CASE_IDS]
        if bad:
            raise ConfigError(f"unknown case id(s) {bad}; expected some of {list(CASE_IDS)}")
        if not cases:
            raise ConfigError("no cases selected")
        object.__setattr__(self, "cases", tuple(dict.fromkeys(cases)))
        if self.network_mode not in ("copperplate", "full"):
            raise ConfigError(f"network_mode must be full or copperplate, not {self.network_mode!r}")
        if self.horizon is not None and not 1 <= int(self.horizon) <= HORIZON:
            raise ConfigError(f"horizon must lie in [1, {HORIZON}] hours")
        if int(self.workers) < 1:
            raise ConfigError("workers must be at least 1")
        if isinstance(self.seed, bool) or int(self.seed) != self.seed:
            raise ConfigError("seed must be an integer")

    @property
    def hours(self) -> int:
        if self.horizon is not None:
            return int(self.horizon)
        return FULL_NETWORK_HORIZON if self.network_mode == "full" else HORIZON

    def check_files(self) -> None:
        for name in ("network", "load_profile", "pv_profile", "costs"):
            path = getattr(self, name)
            if path is not None and not Path(path).is_file():
                raise ConfigError(f"{name} file not found: {path}")

    def to_dict(self) -> dict:
        d = {}
        for f in fields(self):
            v = getattr(self, f.name)
            d[f.name] = str(v) if isinstance(v, Path) else (list(v) if isinstance(v, tuple) else v)
        return d


def load_manifest(path: str | Path | None = None, **overrides) -> RunManifest:
    """Read a YAML manifest (or start from defaults) and apply non-None overrides.

    Relative paths inside the file are resolved against the file's directory.
    """
    raw: dict = {}
    base = Path.cwd()
    if path is not None:
        path = Path(path)
        if not path.is_file():
            raise ConfigError(f"manifest not found: {path}")
        raw = _read_yaml(path)
        base = path.parent
        unknown = set(raw) - MANIFEST_KEYS
        if unknown:
            raise ConfigError(f"unknown manifest key(s): {sorted(unknown)}")
    kw: dict = {}
    for key in ("network", "load_profile", "pv_profile", "costs"):
        if raw.get(key) is not None:
            kw[key] = _resolve(base, raw[key])
    if raw.get("out") is not None:
        kw["out_dir"] = _resolve(base, raw["out"])
    cases = raw.get("cases")
    if cases is not None:
        if isinstance(cases, (str, int)):
            cases = [cases]
        kw["cases"] = CASE_IDS if [str(c).lower() for c in cases] == ["all"] else tuple(map(str, cases))
    for key in ("seed", "network_mode", "horizon", "workers"):
        if raw.get(key) is not None:
            kw[key] = raw[key]
    for key, val in overrides.items():
        if val is None:
            continue
        if key == "out_dir":
            val = Path(val)
        kw[key] = val
    try:
        return RunManifest(**kw)
    except (TypeError, ValueError) as exc:
        raise ConfigError(str(exc)) from exc


def _resolve(base: Path, value) -> Path:
    p = Path(str(value))
    return p if p.is_absolute() else base / p


def _read_yaml(path: Path) -> dict:
    try:
        data = yaml.safe_load(Path(path).read_text())
    except (OSError, yaml.YAMLError) as exc:
        raise ConfigError(f"cannot read {path}: {exc}") from exc
    if data is None:
        return {}
    if not isinstance(data, dict):
        raise ConfigError(f"{path}: top level must be a mapping")
    return data


# -- cost parameters -----------------------------------------------------------------
def default_params() -> dict:
    text = resources.files("h2dso.data").joinpath("defaults.yaml").read_text()
    return yaml.safe_load(text)


def load_params(path: str | Path | None = None) -> dict:
    """Packaged defaults, overridden section by section by the file at ``path``."""
    params = default_params()
    if path is None:
        return params
    user = _read_yaml(Path(path))
    unknown = set(user) - set(params)
    if unknown:
        raise ConfigError(f"unknown parameter section(s): {sorted(unknown)}")
    return _merge(params, user, "")


# sections whose keys are open-ended (names chosen by the user)
OPEN_SECTIONS = {"batteries", "cases", "finance.lifetimes"}


def _merge(base: dict, over: dict, where: str) -> dict:
    out = copy.deepcopy(base)
    for key, val in over.items():
        path = where + key
        if isinstance(out.get(key), dict) and isinstance(val, dict):
            if path not in OPEN_SECTIONS and not set(val) <= set(out[key]):
                raise ConfigError(f"unknown key(s) in {path}: {sorted(set(val) - set(out[key]))}")
            out[key] = _merge(out[key], val, path + ".")
        else:
            out[key] = val
    return out


def _build(cls, data: dict, where: str):
    names = {f.name for f in fields(cls)}
    unknown = set(data) - names
    if unknown:
        raise ConfigError(f"unknown key(s) in {where}: {sorted(unknown)}")
    try:
        return cls(**data)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"{where}: {exc}") from exc


def _battery_key(spec: BatterySpec) -> str:
    return "li_ion" if spec is LI_ION else "flow"


def case_configs(params: dict, case_ids, network_mode: str = "copperplate",
                 horizon: int = HORIZON) -> list[CaseConfig]:
    """Case rosters with every numeric input taken from ``params``."""
    fin_raw = dict(params["finance"])
    fin = _build(FinParams, fin_raw, "finance")
    dgs = tuple(_build(DgSpec, dict(d), f"dgs[{k}]") for k, d in enumerate(params["dgs"]))
    batteries = {k: _build(BatterySpec, dict(v), f"batteries.{k}") for k, v in params["batteries"].items()}
    h2_base = _build(H2Spec, dict(params["h2"]), "h2")
    system = dict(params["system"])
    penalty = system.pop("curtail_penalty", 0.0)
    scalar_names = {f.name for f in fields(CaseConfig)}
    bad = set(system) - scalar_names
    if bad:
        raise ConfigError(f"unknown key(s) in system: {sorted(bad)}")
    out = []
    for cid in case_ids:
        roster = case_config(cid)
        kw: dict = dict(system)
        kw.update(dgs=dgs, fin=fin, network_mode=network_mode, horizon=horizon)
        if roster.pv is not None:
            kw["pv"] = _build(PvSpec, {**params["pv"], "penetration": roster.pv.penetration}, "pv")
        if roster.battery is not None:
            key = _battery_key(roster.battery)
            if key not in batteries:
                raise ConfigError(f"case {cid} needs battery parameters '{key}'")
            kw["battery"] = batteries[key]
        if roster.h2 is not None:
            kw["h2"] = replace(h2_base, init_frac=roster.h2.init_frac, final_frac=roster.h2.final_frac)
        if roster.curtail_penalty > 0:
            kw["curtail_penalty"] = penalty
        over = dict((params.get("cases") or {}).get(cid, (params.get("cases") or {}).get(_num(cid), {})) or {})
        for key in ("pv", "battery", "h2"):
            if key in over:
                current = kw.get(key) or getattr(roster, key)
                if current is None:
                    raise ConfigError(f"case {cid} has no {key} to override")
                kw[key] = _replace(current, over.pop(key), f"cases.{cid}.{key}")
        if "fin" in over:
            kw["fin"] = _replace(fin, over.pop("fin"), f"cases.{cid}.fin")
        bad = set(over) - scalar_names
        if bad:
            raise ConfigError(f"unknown key(s) in cases.{cid}: {sorted(bad)}")
        kw.update(over)
        try:
            out.append(case_config(cid, **kw))
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"case {cid}: {exc}") from exc
    return out


def _num(cid: str):
    try:
        return int(cid)
    except ValueError:
        return cid


def _replace(obj, changes: dict, where: str):
    names = {f.name for f in fields(obj)}
    bad = set(changes) - names
    if bad:
        raise ConfigError(f"unknown key(s) in {where}: {sorted(bad)}")
    try:
        return replace(obj, **changes)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"{where}: {exc}") from exc


# -- input data ------------------------------------------------------------------------
def read_series(path: str | Path) -> np.ndarray:
    """Hourly values from a CSV: the last column of each row; a header row is allowed."""
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read {path}: {exc}") from exc
    vals = []
    for k, row in enumerate(csv.reader(io.StringIO(text))):
        if not row or row[0].lstrip().startswith("#"):
            continue
        try:
            vals.append(float(row[-1]))
        except ValueError:
            if k == 0:
                continue
            raise ConfigError(f"{path}: non-numeric value on line {k + 1}") from None
    if not vals:
        raise ConfigError(f"{path}: no data")
    return np.array(vals)


def load_network(manifest: RunManifest) -> Network:
    if manifest.network is None:
        return ieee33()
    try:
        return parse_network(Path(manifest.network))
    except (OSError, ValueError) as exc:
        raise ConfigError(f"network file {manifest.network}: {exc}") from exc


def load_profiles(manifest: RunManifest, penetration: float, net: Network) -> ProfileSet:
    """Synthetic profiles from the seed, or the manifest's files rescaled the same way."""
    base = float(net.load_kw.sum()) / 1000.0
    if manifest.load_profile is None and manifest.pv_profile is None:
        return gen_profiles(manifest.seed, penetration, base_load_mw=base)
    synth = gen_profiles(manifest.seed, penetration, base_load_mw=base)
    load = read_series(manifest.load_profile) if manifest.load_profile else synth.load
    pv = read_series(manifest.pv_profile) if manifest.pv_profile else synth.pv
    if len(load) != len(pv):
        raise ConfigError("load and PV profiles differ in length")
    if len(load) < manifest.hours:
        raise ConfigError(f"profiles cover {len(load)} h, run needs {manifest.hours} h")
    try:
        return profiles_from_series(load, pv, penetration, manifest.seed, base)
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc

