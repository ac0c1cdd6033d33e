"""Scenario definitions, the scenario file format and seeded sampling.

A scenario fixes the network, target, initial phases, weights and horizon.
Any of ``omega``, ``x_des`` and ``theta0`` may instead be a sampler, in
which case the scenario carries a 64-bit seed.

Scenario file (JSON, ``"version": 1``)::

    {
      "version": 1,
      "name": "paper-scale-10",
      "params": {"n": 10, "coupling": 1.0,
                 "omega": {"uniform": {"low": 0.0, "high": 1.5707963267948966}}},
      "x_des": {"uniform": {"low": -0.785..., "high": 0.785...}},
      "theta0": {"uniform": {"low": -3.14..., "high": 3.14...}},
      "q_scale": 1000.0,
      "r_scale": 1.0,
      "sim": {"t_final": 2.0, "dt": 0.01, "record_every": 1, "control_update_every": 1},
      "seed": 0
    }

Explicit vectors are JSON arrays. Besides ``{"uniform": ...}``, ``theta0``
accepts ``{"near_target": {"uniform": {...}}}``: the initial error is drawn
componentwise from the uniform spec and phases are rebuilt from
``x_des + e0`` with the first phase at 0.

Random numbers come from SplitMix64 (Vigna, 2015), mapped to [0, 1) by
``(x >> 11) * 2**-53``. Each scenario seeds the generator with
``seed XOR fnv1a64(name)``; draws are taken in the order omega, x_des,
theta0, each in index order. Reference outputs::

    state 1234567 -> 6457827717110365317, 3203168211198807973, 9817491932198370423
    state 42      -> 13679457532755275413, 2949826092126892291, 5139283748462763858
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Any, Union

import numpy as np

from .controller import SdreWeights
from .kuramoto import NetworkParams, reconstruct_phases
from .linalg import FloatArray, as_vector
from .sim import SimConfig

__all__ = [
    "SCHEMA_VERSION",
    "ScenarioError",
    "SplitMix64",
    "Uniform",
    "NearTarget",
    "Scenario",
    "ResolvedScenario",
    "sample",
    "stream_seed",
    "builtin_scenarios",
    "builtin_names",
    "get_builtin",
    "load_scenario",
    "resolve_ref",
    "default_sweep_seeds",
]

SCHEMA_VERSION = 1
MASK64 = (1 << 64) - 1


class ScenarioError(ValueError):
    """Malformed scenario document, unknown scenario name or bad override."""


class SplitMix64:
    """SplitMix64 generator over a 64-bit state."""

    GOLDEN = 0x9E3779B97F4A7C15

    def __init__(self, state: int):
        self.state = state & MASK64

    def next_u64(self) -> int:
        self.state = (self.state + self.GOLDEN) & MASK64
        z = self.state
        z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
        z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK64
        return z ^ (z >> 31)

    def next_unit(self) -> float:
        """Uniform double in [0, 1) from the top 53 bits."""
        return (self.next_u64() >> 11) * 2.0**-53


def fnv1a64(text: str) -> int:
    h = 0xCBF29CE484222325
    for byte in text.encode("utf-8"):
        h = ((h ^ byte) * 0x100000001B3) & MASK64
    return h


def stream_seed(seed: int, name: str) -> int:
    """Generator state for scenario ``name`` under ``seed``."""
    return (seed & MASK64) ^ fnv1a64(name)


@dataclass(frozen=True)
class Uniform:
    low: float
    high: float

    def __post_init__(self) -> None:
        if not (math.isfinite(self.low) and math.isfinite(self.high) and self.low < self.high):
            raise ScenarioError(f"uniform sampler needs finite low < high, got [{self.low}, {self.high})")

    def to_json(self) -> dict:
        return {"uniform": {"low": self.low, "high": self.high}}


@dataclass(frozen=True)
class NearTarget:
    """Initial phases at the target configuration plus a uniform error per component."""

    error: Uniform

    def to_json(self) -> dict:
        return {"near_target": self.error.to_json()}


def sample(spec: Uniform, rng: SplitMix64) -> float:
    """One draw on ``[spec.low, spec.high)``."""
    v = spec.low + (spec.high - spec.low) * rng.next_unit()
    # rounding can land exactly on high
    return v if v < spec.high else math.nextafter(spec.high, spec.low)


def _sample_vector(spec: Uniform, size: int, rng: SplitMix64) -> FloatArray:
    return np.array([sample(spec, rng) for _ in range(size)])


Field = Union[FloatArray, Uniform]


@dataclass(frozen=True)
class ResolvedScenario:
    """A scenario with every sampler drawn; ready to simulate."""

    name: str
    params: NetworkParams
    x_des: FloatArray
    theta0: FloatArray
    weights: SdreWeights
    q_scale: float
    r_scale: float
    sim: SimConfig
    seed: int | None

    def as_scenario(self) -> Scenario:
        """Equivalent explicit scenario (no samplers), keeping the seed for provenance."""
        return Scenario(
            name=self.name, n=self.params.n, coupling=self.params.coupling,
            omega=self.params.omega, x_des=self.x_des, theta0=self.theta0,
            q_scale=self.q_scale, r_scale=self.r_scale, sim=self.sim, seed=self.seed,
        )


@dataclass(frozen=True)
class Scenario:
    name: str
    n: int
    coupling: float
    omega: Field
    x_des: Field
    theta0: Union[FloatArray, Uniform, NearTarget]
    q_scale: float = 1000.0
    r_scale: float = 1.0
    sim: SimConfig = field(default_factory=SimConfig)
    seed: int | None = None

    def __post_init__(self) -> None:
        if int(self.n) != self.n or self.n < 2:
            raise ScenarioError(f"n must be an integer >= 2, got {self.n}")
        if not self.q_scale >= 0:
            raise ScenarioError(f"q_scale must be >= 0, got {self.q_scale}")
        if not self.r_scale > 0:
            raise ScenarioError(f"r_scale must be > 0, got {self.r_scale}")
        lengths = {"omega": self.n, "x_des": self.n - 1, "theta0": self.n}
        for name, length in lengths.items():
            val = getattr(self, name)
            if not isinstance(val, (Uniform, NearTarget)):
                try:
                    object.__setattr__(self, name, as_vector(val, name, length))
                except ValueError as exc:
                    raise ScenarioError(str(exc)) from exc
        if isinstance(self.omega, NearTarget) or isinstance(self.x_des, NearTarget):
            raise ScenarioError("near_target is only valid for theta0")
        if self.uses_sampler and self.seed is None:
            raise ScenarioError(f"scenario {self.name!r} uses samplers and needs a seed")

    @property
    def uses_sampler(self) -> bool:
        return any(isinstance(v, (Uniform, NearTarget)) for v in (self.omega, self.x_des, self.theta0))

    def resolve(self, seed: int | None = None) -> ResolvedScenario:
        """Draw all samplers (``seed`` overrides the scenario's own)."""
        seed = self.seed if seed is None else int(seed)
        rng = SplitMix64(stream_seed(seed, self.name)) if self.uses_sampler else None

        def draw(val, size):
            if isinstance(val, Uniform):
                return _sample_vector(val, size, rng)
            return val

        omega = draw(self.omega, self.n)
        x_des = draw(self.x_des, self.n - 1)
        if isinstance(self.theta0, NearTarget):
            e0 = _sample_vector(self.theta0.error, self.n - 1, rng)
            theta0 = reconstruct_phases(e0, x_des)
        else:
            theta0 = draw(self.theta0, self.n)
        return ResolvedScenario(
            name=self.name,
            params=NetworkParams(self.n, self.coupling, omega),
            x_des=x_des,
            theta0=theta0,
            weights=SdreWeights.scaled_identity(self.n, self.q_scale, self.r_scale),
            q_scale=self.q_scale,
            r_scale=self.r_scale,
            sim=self.sim,
            seed=seed if self.uses_sampler or self.seed is not None else None,
        )

    # -- overrides ---------------------------------------------------------

    _SIM_KEYS = ("t_final", "dt", "record_every", "control_update_every")

    def with_overrides(self, overrides: dict[str, str]) -> Scenario:
        """Apply ``key=value`` overrides given as strings.

        Recognised keys: ``dt``, ``t_final``, ``record_every``,
        ``control_update_every`` (also with a ``sim.`` prefix), ``q_scale``,
        ``r_scale``, ``coupling``, ``seed`` and ``name``.
        """
        top: dict[str, Any] = {}
        sim_kw: dict[str, Any] = {}
        for key, raw in overrides.items():
            k = key.removeprefix("sim.")
            try:
                if k in self._SIM_KEYS:
                    sim_kw[k] = int(raw) if k.endswith("every") else float(raw)
                elif k in ("q_scale", "r_scale", "coupling"):
                    top[k] = float(raw)
                elif k == "seed":
                    top[k] = int(raw)
                elif k == "name":
                    top[k] = str(raw)
                else:
                    raise ScenarioError(f"unknown override key {key!r}")
            except ValueError as exc:
                if isinstance(exc, ScenarioError):
                    raise
                raise ScenarioError(f"bad value for {key!r}: {raw!r}") from exc
        try:
            if sim_kw:
                top["sim"] = replace(self.sim, **sim_kw)
            return replace(self, **top)
        except ScenarioError:
            raise
        except ValueError as exc:
            raise ScenarioError(str(exc)) from exc

    # -- serialization -----------------------------------------------------

    def to_json(self) -> dict:
        def enc(val):
            if isinstance(val, (Uniform, NearTarget)):
                return val.to_json()
            return [float(x) for x in val]

        return {
            "version": SCHEMA_VERSION,
            "name": self.name,
            "params": {"n": self.n, "coupling": self.coupling, "omega": enc(self.omega)},
            "x_des": enc(self.x_des),
            "theta0": enc(self.theta0),
            "q_scale": self.q_scale,
            "r_scale": self.r_scale,
            "sim": {
                "t_final": self.sim.t_final,
                "dt": self.sim.dt,
                "record_every": self.sim.record_every,
                "control_update_every": self.sim.control_update_every,
            },
            "seed": self.seed,
        }

    def dumps(self) -> str:
        return json.dumps(self.to_json(), indent=2)

    @classmethod
    def from_json(cls, doc: dict) -> Scenario:
        try:
            if doc.get("version") != SCHEMA_VERSION:
                raise ScenarioError(f"unsupported scenario version {doc.get('version')!r}")
            params = doc["params"]
            sim = doc.get("sim", {})
            return cls(
                name=str(doc["name"]),
                n=params["n"],
                coupling=float(params.get("coupling", 1.0)),
                omega=_decode_field(params["omega"]),
                x_des=_decode_field(doc["x_des"]),
                theta0=_decode_field(doc["theta0"], allow_near=True),
                q_scale=float(doc.get("q_scale", 1000.0)),
                r_scale=float(doc.get("r_scale", 1.0)),
                sim=SimConfig(**{k: sim[k] for k in cls._SIM_KEYS if k in sim}),
                seed=None if doc.get("seed") is None else int(doc["seed"]),
            )
        except ScenarioError:
            raise
        except (KeyError, TypeError, ValueError, AttributeError) as exc:
            raise ScenarioError(f"malformed scenario document: {exc!r}") from exc

    @classmethod
    def loads(cls, text: str) -> Scenario:
        try:
            doc = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ScenarioError(f"invalid JSON: {exc}") from exc
        if not isinstance(doc, dict):
            raise ScenarioError("scenario document must be a JSON object")
        return cls.from_json(doc)

    def same_as(self, other: Scenario) -> bool:
        """Structural equality (numpy fields compared elementwise)."""
        return self.to_json() == other.to_json()


def _decode_field(val: Any, allow_near: bool = False):
    if isinstance(val, list):
        return np.asarray(val, dtype=np.float64)
    if isinstance(val, dict) and set(val) == {"uniform"}:
        u = val["uniform"]
        return Uniform(float(u["low"]), float(u["high"]))
    if allow_near and isinstance(val, dict) and set(val) == {"near_target"}:
        inner = _decode_field(val["near_target"])
        if not isinstance(inner, Uniform):
            raise ScenarioError("near_target needs a uniform spec")
        return NearTarget(inner)
    raise ScenarioError(f"expected a number list or sampler spec, got {val!r}")


def load_scenario(path: str | Path) -> Scenario:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ScenarioError(f"cannot read {path}: {exc}") from exc
    return Scenario.loads(text)


# -- bundled scenarios -------------------------------------------------------

_PAPER_WEIGHTS = dict(q_scale=1000.0, r_scale=1.0)
_PAPER_SIM = SimConfig(t_final=2.0, dt=0.01)
_DISPERSION = dict(
    n=4,
    coupling=1.0,
    omega=np.array([0.0, math.pi / 3, 2 * math.pi / 3, math.pi]),
    x_des=np.array([-0.7, 1.2, -0.5]),
    theta0=np.array([2.75, -0.96, 1.97, 2.10]),
    sim=_PAPER_SIM,
)
# initial error radius for the large networks, which start near the target
NEAR_TARGET_RADIUS = 0.1
SCALE_SIZES = (10, 20, 50, 100)
SCALE_SEED = 0


def _scale_scenario(n: int) -> Scenario:
    if n <= 20:
        theta0: Union[Uniform, NearTarget] = Uniform(-math.pi, math.pi)
    else:
        theta0 = NearTarget(Uniform(-NEAR_TARGET_RADIUS, NEAR_TARGET_RADIUS))
    return Scenario(
        name=f"paper-scale-{n}",
        n=n,
        coupling=1.0,
        omega=Uniform(0.0, math.pi / 2),
        x_des=Uniform(-math.pi / 4, math.pi / 4),
        theta0=theta0,
        sim=_PAPER_SIM,
        seed=SCALE_SEED,
        **_PAPER_WEIGHTS,
    )


def builtin_scenarios() -> list[Scenario]:
    out = [
        Scenario(
            name="paper-4osc",
            n=4,
            coupling=1.0,
            omega=np.array([1.30, 1.39, 0.44, 1.28]),
            x_des=np.array([-0.74, 0.27, 0.15]),
            theta0=np.array([0.60, 0.86, 0.84, -0.13]),
            sim=_PAPER_SIM,
            **_PAPER_WEIGHTS,
        ),
        Scenario(name="paper-dispersion", **_DISPERSION, **_PAPER_WEIGHTS),
        Scenario(name="paper-lowq", **_DISPERSION, q_scale=0.001, r_scale=1.0),
    ]
    out.extend(_scale_scenario(n) for n in SCALE_SIZES)
    return out


def builtin_names() -> list[str]:
    return [s.name for s in builtin_scenarios()]


def get_builtin(name: str) -> Scenario:
    for s in builtin_scenarios():
        if s.name == name:
            return s
    raise ScenarioError(f"unknown scenario {name!r}; builtin: {', '.join(builtin_names())}")


def resolve_ref(ref: str) -> Scenario:
    """Builtin name, or path to a scenario file."""
    if ref in builtin_names():
        return get_builtin(ref)
    path = Path(ref)
    if path.suffix == ".json" or path.exists():
        return load_scenario(path)
    return get_builtin(ref)


def default_sweep_seeds(scenario: Scenario) -> list[int]:
    """Seeds run by the scaling study: 10 for n <= 20, 3 above, starting at the scenario seed."""
    count = 10 if scenario.n <= 20 else 3
    base = scenario.seed or 0
    return [base + i for i in range(count)]
