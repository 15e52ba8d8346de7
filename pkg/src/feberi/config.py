"""Scenario configuration: TOML files with unit-suffixed quantities.

Example::

    [scenario]
    kind = "fig5_single_modulated"
    model = "both"
    seed = 7

    [beam]
    kinetic_energy = "200 keV"
    impact_parameter = "2 nm"
    sigma_over_period = 1.0        # or sigma_et = "2.07 fs"
    drift_length = "optimal"       # or e.g. "3 cm"

    [tls]
    transition_energy = "2 eV"
    dipole = "5 D"
    orientation = "perpendicular"

    [qew]
    kind = "pinem_modulated"
    g_L = 0.75
    omega_b = "resonant"           # omega21 / harmonic, or e.g. "3.0385 rad/fs"
    phi0 = "0 rad"
    t0 = "0 fs"
"""

from __future__ import annotations

import copy
import math
import sys
from dataclasses import dataclass, field, replace
from enum import Enum

from .analytic import ArrivalLaw, PhaseLaw, TlsAmplitudes
from .physical import BeamConfig, Orientation, ParameterError, TlsSpec, derive_kinematics
from .quantum.train import SolverOptions
from .rng import check_seed
from .units import UnitError, parse_quantity
from .wavepacket import QewKind, QewSpec, optimal_drift_length

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib


class ConfigError(ValueError):
    """Configuration is malformed; carries one message per offending field."""

    def __init__(self, problems):
        if isinstance(problems, str):
            problems = [problems]
        self.problems = list(problems)
        super().__init__("; ".join(self.problems))


class ScenarioKind(str, Enum):
    FIG2 = "fig2_kernel"
    FIG3 = "fig3_size_scan"
    FIG4 = "fig4_point_train"
    FIG5 = "fig5_single_modulated"
    FIG6 = "fig6_correlated_train"
    CUSTOM = "custom"


class Model(str, Enum):
    ANALYTIC = "analytic"
    QUANTUM = "quantum"
    BOTH = "both"

    def includes(self, other: "Model") -> bool:
        return self is Model.BOTH or self is other


PRESET_KINDS = {
    "fig2": ScenarioKind.FIG2,
    "fig3": ScenarioKind.FIG3,
    "fig4": ScenarioKind.FIG4,
    "fig5": ScenarioKind.FIG5,
    "fig6": ScenarioKind.FIG6,
}


@dataclass(frozen=True)
class QewParams:
    """Wavepacket description before the beam and TLS are known."""

    kind: QewKind = QewKind.GAUSSIAN
    g_L: float = 0.0
    omega_b: float | None = None  # rad/fs; None -> omega21 / harmonic
    phi0: float = 0.0
    t0: float = 0.0


@dataclass(frozen=True)
class TrainParams:
    n: int = 1
    arrival_law: ArrivalLaw = ArrivalLaw.IN_PHASE
    phase_law: PhaseLaw = PhaseLaw.COMMON
    harmonic: int = 1
    t00: float = 0.0
    arrival_times: tuple = ()
    ensemble: int = 20  # seeds for ensemble statistics


@dataclass(frozen=True)
class ScenarioConfig:
    kind: ScenarioKind
    beam: BeamConfig
    tls: TlsSpec
    qew: QewParams
    train: TrainParams
    model: Model
    seed: int
    solver: SolverOptions = field(default_factory=SolverOptions)
    initial_state: TlsAmplitudes = field(default_factory=TlsAmplitudes.ground)
    sigma_scan: tuple = ()
    sigma_bar_list: tuple = (0.5, 1.0, 2.0)
    drift_optimal: bool = False
    out: str | None = None
    raw: dict = field(default_factory=dict, compare=False)

    @property
    def omega_b(self) -> float:
        if self.qew.omega_b is not None:
            return self.qew.omega_b
        return self.tls.omega21 / self.train.harmonic

    def qew_spec(self, sigma_et: float | None = None) -> QewSpec:
        """Internal-unit QEW; drift converted from metres to nm."""
        return QewSpec(
            kind=self.qew.kind,
            sigma_et=self.beam.sigma_et if sigma_et is None else sigma_et,
            g_L=self.qew.g_L,
            omega_b=self.omega_b if self.qew.kind is QewKind.PINEM else self.qew.omega_b or 0.0,
            phi0=self.qew.phi0,
            t0=self.qew.t0,
            drift_length=self.beam.drift_length * 1e9,
        )


# ---------------------------------------------------------------- defaults

def table1_defaults(kind: ScenarioKind) -> dict:
    """Raw config tables binding the reference parameter set for each preset."""
    base = {
        "scenario": {"kind": kind.value, "model": "both"},
        "beam": {"kinetic_energy": "200 keV", "impact_parameter": "2 nm",
                 "sigma_over_period": 1.0, "drift_length": "0 m"},
        "tls": {"transition_energy": "2 eV", "dipole": "5 D", "orientation": "perpendicular"},
        "qew": {"kind": "gaussian"},
        "train": {"n": 1},
    }
    if kind is ScenarioKind.FIG2:
        base["scenario"]["model"] = "analytic"
        base["fig2"] = {"sigma_bar": [0.5, 1.0, 2.0]}
    elif kind is ScenarioKind.FIG3:
        base["fig3"] = {"sigma_over_period": [0.05, 0.25, 0.5, 1.0, 2.0]}
        base["initial_state"] = {"c1": "1", "c2": "2j"}
    elif kind is ScenarioKind.FIG4:
        base["beam"]["sigma_over_period"] = 0.05
        base["train"] = {"n": 20, "arrival_law": "in_phase", "ensemble": 20}
    elif kind is ScenarioKind.FIG5:
        base["beam"]["drift_length"] = "optimal"
        base["qew"] = {"kind": "pinem_modulated", "g_L": 0.75, "omega_b": "resonant"}
        s = math.sin(3 * math.pi / 8)
        c = math.cos(3 * math.pi / 8)
        base["initial_state"] = {"c1": repr(s), "c2": repr(c)}
    elif kind is ScenarioKind.FIG6:
        base["beam"]["drift_length"] = "optimal"
        base["qew"] = {"kind": "pinem_modulated", "g_L": 0.75, "omega_b": "resonant"}
        base["train"] = {"n": 20, "arrival_law": "uniform_random", "ensemble": 20}
    return base


def merge(base: dict, override: dict) -> dict:
    out = copy.deepcopy(base)
    for k, v in override.items():
        if isinstance(v, dict) and isinstance(out.get(k), dict):
            out[k] = merge(out[k], v)
        else:
            out[k] = copy.deepcopy(v)
    return out


def load_toml(path) -> dict:
    try:
        with open(path, "rb") as fh:
            return tomllib.load(fh)
    except FileNotFoundError:
        raise ConfigError(f"config file not found: {path}") from None
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"{path}: {exc}") from None


def set_dotted(raw: dict, key: str, value) -> dict:
    out = copy.deepcopy(raw)
    node = out
    parts = key.split(".")
    for p in parts[:-1]:
        node = node.setdefault(p, {})
    node[parts[-1]] = value
    return out


# ----------------------------------------------------------------- parsing

class _Collector:
    def __init__(self):
        self.problems = []

    def take(self, fn, *args, default=None):
        try:
            return fn(*args)
        except (UnitError, ParameterError, ValueError, TypeError, KeyError) as exc:
            self.problems.append(str(exc))
            return default


def _quantity(table: dict, key: str, kind: str, section: str, required=True, default=None):
    if key not in table:
        if required:
            raise ValueError(f"{section}.{key}: missing")
        return default
    return parse_quantity(table[key], kind, f"{section}.{key}")


def _number(table, key, section, default=None, kind=float):
    v = table.get(key, default)
    if v is None:
        raise ValueError(f"{section}.{key}: missing")
    if isinstance(v, bool) or not isinstance(v, (int, float)):
        raise ValueError(f"{section}.{key}: expected a number, got {v!r}")
    return kind(v)


def _complex(v, name):
    if isinstance(v, (int, float)) and not isinstance(v, bool):
        return complex(v)
    if isinstance(v, str):
        try:
            return complex(v.replace(" ", ""))
        except ValueError:
            pass
    raise ValueError(f"{name}: cannot read {v!r} as a complex number")


_KNOWN = {"scenario", "beam", "tls", "qew", "train", "solver", "initial_state", "fig2", "fig3", "sweep"}


def parse_config(raw: dict, seed_override: int | None = None, require_seed: bool = True) -> ScenarioConfig:
    """Validate ``raw`` and build a :class:`ScenarioConfig` (all problems reported at once)."""
    col = _Collector()
    unknown = sorted(set(raw) - _KNOWN)
    if unknown:
        col.problems.append(f"unknown section(s): {', '.join(unknown)}")
    sc = raw.get("scenario", {})
    kind = col.take(lambda: ScenarioKind(sc.get("kind", "custom")))
    model = col.take(lambda: Model(sc.get("model", "both")))
    seed = seed_override if seed_override is not None else sc.get("seed")
    if seed is None:
        if require_seed:
            col.problems.append("scenario.seed: missing (runs are never seeded from the clock)")
        seed = 0
    seed = col.take(check_seed, seed, default=0)

    b = raw.get("beam", {})
    ke = col.take(_quantity, b, "kinetic_energy", "energy", "beam")
    rp = col.take(_quantity, b, "impact_parameter", "length", "beam")
    t = raw.get("tls", {})
    e21 = col.take(_quantity, t, "transition_energy", "energy", "tls")
    mu = col.take(_quantity, t, "dipole", "dipole", "tls")
    orient = col.take(lambda: Orientation(t.get("orientation", "perpendicular")))
    tls = col.take(TlsSpec, e21, mu, orient) if None not in (e21, mu, orient) else None

    if "sigma_et" in b and "sigma_over_period" in b:
        col.problems.append("beam: give sigma_et or sigma_over_period, not both")
    sigma = None
    if "sigma_et" in b:
        sigma = col.take(_quantity, b, "sigma_et", "time", "beam")
    elif tls is not None:
        ratio = col.take(_number, b, "sigma_over_period", "beam", 1.0)
        sigma = None if ratio is None else ratio * tls.period

    q = raw.get("qew", {})
    qkind = col.take(lambda: QewKind(q.get("kind", "gaussian")))
    g_l = col.take(_number, q, "g_L", "qew", 0.0)
    wb_raw = q.get("omega_b", "resonant" if qkind is QewKind.PINEM else None)
    omega_b = None
    if wb_raw not in (None, "resonant"):
        omega_b = col.take(parse_quantity, wb_raw, "angular_frequency", "qew.omega_b")
    phi0 = col.take(_quantity, q, "phi0", "angle", "qew", False, 0.0)
    t0 = col.take(_quantity, q, "t0", "time", "qew", False, 0.0)
    qew = QewParams(qkind or QewKind.GAUSSIAN, g_l or 0.0, omega_b, phi0 or 0.0, t0 or 0.0)

    tr = raw.get("train", {})
    train = col.take(lambda: TrainParams(
        n=_number(tr, "n", "train", 1, int),
        arrival_law=ArrivalLaw(tr.get("arrival_law", "in_phase")),
        phase_law=PhaseLaw(tr.get("phase_law", "common_phi0")),
        harmonic=_number(tr, "harmonic", "train", 1, int),
        t00=_quantity(tr, "t00", "time", "train", False, 0.0),
        arrival_times=tuple(parse_quantity(x, "time", "train.arrival_times") for x in tr.get("arrival_times", [])),
        ensemble=_number(tr, "ensemble", "train", 20, int),
    ), default=TrainParams())
    if train.n < 1:
        col.problems.append("train.n: must be >= 1")
    if train.harmonic < 1:
        col.problems.append("train.harmonic: must be >= 1")
    if train.ensemble < 1:
        col.problems.append("train.ensemble: must be >= 1")

    drift_raw = b.get("drift_length", "0 m")
    drift_optimal = drift_raw == "optimal"
    drift = 0.0
    if not drift_optimal:
        d = col.take(parse_quantity, drift_raw, "length", "beam.drift_length")
        drift = (d or 0.0) / 1e9
    elif qkind is not QewKind.PINEM:
        col.problems.append("beam.drift_length = 'optimal' needs a pinem_modulated QEW")

    beam = None
    if None not in (ke, rp, sigma):
        beam = col.take(BeamConfig, ke, rp, sigma, 0.0)
    if beam is not None and tls is not None and drift_optimal and qkind is QewKind.PINEM:
        kin = col.take(derive_kinematics, beam)
        wb = omega_b if omega_b is not None else tls.omega21 / max(train.harmonic, 1)
        if kin is not None and g_l:
            drift = col.take(optimal_drift_length, g_l, wb, kin, train.harmonic, default=0.0) / 1e9
    if beam is not None:
        beam = col.take(lambda: replace(beam, drift_length=drift), default=beam)

    s = raw.get("solver", {})
    solver = col.take(lambda: SolverOptions(
        dz_scale=_number(s, "dz_scale", "solver", 1.0),
        dt_scale=_number(s, "dt_scale", "solver", 1.0),
        kinetic_interval=None if "kinetic_interval" not in s else parse_quantity(
            s["kinetic_interval"], "time", "solver.kinetic_interval"),
        samples=_number(s, "samples", "solver", 400, int),
        guard_sigmas=_number(s, "guard_sigmas", "solver", 8.0),
        max_points=_number(s, "max_points", "solver", 2**20, int),
    ), default=SolverOptions())

    init = raw.get("initial_state", "ground")
    state = TlsAmplitudes.ground()
    if isinstance(init, str):
        if init == "ground":
            state = TlsAmplitudes.ground()
        elif init == "excited":
            state = TlsAmplitudes.excited()
        else:
            col.problems.append(f"initial_state: unknown {init!r} (ground, excited or a c1/c2 table)")
    elif isinstance(init, dict):
        c1 = col.take(_complex, init.get("c1", 1), "initial_state.c1", default=1)
        c2 = col.take(_complex, init.get("c2", 0), "initial_state.c2", default=0)
        state = col.take(TlsAmplitudes.superposition, c1, c2, default=state)

    scan = tuple(raw.get("fig3", {}).get("sigma_over_period", ()))
    sbars = tuple(raw.get("fig2", {}).get("sigma_bar", (0.5, 1.0, 2.0)))
    for name, vals in (("fig3.sigma_over_period", scan), ("fig2.sigma_bar", sbars)):
        if any(isinstance(v, bool) or not isinstance(v, (int, float)) or v <= 0 for v in vals):
            col.problems.append(f"{name}: expected positive numbers")

    if qkind is QewKind.PINEM and omega_b is not None and omega_b <= 0:
        col.problems.append("qew.omega_b: must be > 0")

    if col.problems:
        raise ConfigError(col.problems)
    return ScenarioConfig(
        kind=kind, beam=beam, tls=tls, qew=qew, train=train, model=model, seed=seed,
        solver=solver, initial_state=state, sigma_scan=tuple(float(x) for x in scan),
        sigma_bar_list=tuple(float(x) for x in sbars), drift_optimal=drift_optimal,
        out=sc.get("out"), raw=copy.deepcopy(raw),
    )


def load_config(path, seed_override=None, require_seed=True) -> ScenarioConfig:
    raw = load_toml(path)
    kind = raw.get("scenario", {}).get("kind")
    if kind in {k.value for k in PRESET_KINDS.values()}:
        raw = merge(table1_defaults(ScenarioKind(kind)), raw)
    return parse_config(raw, seed_override, require_seed)
