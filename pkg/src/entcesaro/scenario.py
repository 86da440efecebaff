"""JSON scenario files: the single input format of the command line tool.

A scenario bundles a unitary spec, a partition, operator specs, an optional
state (for correlation runs), the engine selection, the horizon list, and
tolerance overrides.  All randomness derives from one scenario seed through
named child generators, so runs are reproducible end to end.

Example::

    {
      "unitary": {"kind": "random", "dim": 4, "phaseMode": "rational",
                  "maxDenominator": 6},
      "partition": [1, 2, 1, 2],
      "operators": [{"kind": "random"}, {"kind": "random"}, {"kind": "random"}],
      "engine": "spectral",
      "Ns": [100, 1000, 10000],
      "seed": 7
    }
"""

from __future__ import annotations

import json
import zlib
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .engines import ENGINE_NAMES
from .linalg import gaussian_operator
from .partitions import Partition, canonicalize
from .spectral import (
    Phase,
    SpectralDecomposition,
    Tolerances,
    decompose,
    from_eigensystem,
    random_system,
)

__all__ = ["Scenario", "ScenarioError", "load_scenario", "scenario_from_dict", "rng_for"]


class ScenarioError(ValueError):
    """The scenario file is missing, malformed, or inconsistent."""


def rng_for(seed: int, *names) -> np.random.Generator:
    """Child generator named by a path of labels, derived from one seed."""
    entropy = [int(seed) & 0xFFFFFFFF] + [zlib.crc32(str(n).encode()) for n in names]
    return np.random.default_rng(entropy)


@dataclass
class Scenario:
    unitary_spec: dict
    partition: Partition | None
    operator_specs: list | None
    state_spec: dict | None
    engine: str
    horizons: list[int]
    tolerances: Tolerances
    seed: int
    out: str | None
    _system: tuple[np.ndarray, SpectralDecomposition] | None = field(default=None, repr=False)

    def system(self) -> tuple[np.ndarray, SpectralDecomposition]:
        if self._system is None:
            self._system = _build_unitary(self.unitary_spec, self.tolerances, self.seed)
        return self._system

    def operators(self, count: int) -> list[np.ndarray]:
        """Materialize ``count`` operator specs against the system dimension."""
        if self.operator_specs is None:
            raise ScenarioError("scenario has no 'operators' entry")
        if len(self.operator_specs) != count:
            raise ScenarioError(
                f"scenario provides {len(self.operator_specs)} operators, "
                f"this command needs {count}"
            )
        _, dec = self.system()
        return [
            _build_operator(spec, dec.dim, self.seed, j)
            for j, spec in enumerate(self.operator_specs)
        ]

    def state(self) -> np.ndarray:
        if self.state_spec is None:
            raise ScenarioError("scenario has no 'state' entry")
        _, dec = self.system()
        return _build_state(self.state_spec, dec.dim)


def _fail(msg: str) -> ScenarioError:
    return ScenarioError(f"malformed scenario: {msg}")


def _complexify(value, what: str) -> complex:
    if isinstance(value, (int, float)):
        return complex(value)
    if isinstance(value, list) and len(value) == 2 and all(isinstance(v, (int, float)) for v in value):
        return complex(value[0], value[1])
    raise _fail(f"{what} entries must be numbers or [re, im] pairs")


def _matrix_from_spec(spec: dict, what: str) -> np.ndarray:
    re = spec.get("re")
    if re is None:
        raise _fail(f"{what} of kind 'matrix' needs 're'")
    re_arr = np.asarray(re, dtype=float)
    if re_arr.ndim != 2:
        raise _fail(f"{what} 're' must be a 2-d array")
    im = spec.get("im")
    im_arr = np.zeros_like(re_arr) if im is None else np.asarray(im, dtype=float)
    if im_arr.shape != re_arr.shape:
        raise _fail(f"{what} 'im' shape differs from 're'")
    return re_arr + 1j * im_arr


def _parse_phase(text) -> Phase:
    try:
        return Phase.from_fraction(Fraction(str(text)))
    except (ValueError, ZeroDivisionError):
        raise _fail(f"bad phase {text!r}, expected a fraction like '1/3'") from None


def _build_unitary(spec, tol: Tolerances, seed: int):
    if not isinstance(spec, dict) or "kind" not in spec:
        raise _fail("'unitary' must be an object with a 'kind'")
    kind = spec["kind"]
    try:
        if kind == "diagonal-rational":
            phases = [_parse_phase(t) for t in spec.get("phases", [])]
            if not phases:
                raise _fail("'diagonal-rational' needs a nonempty 'phases' list")
            return from_eigensystem(phases, np.eye(len(phases)), tol)
        if kind == "matrix":
            u = _matrix_from_spec(spec, "unitary")
            return u, decompose(u, tol)
        if kind == "random":
            dim = spec.get("dim")
            if not isinstance(dim, int) or dim < 1:
                raise _fail("'random' unitary needs a positive integer 'dim'")
            mode = spec.get("phaseMode", "haar")
            u_seed = spec.get("seed")
            entropy = u_seed if u_seed is not None else [seed & 0xFFFFFFFF, zlib.crc32(b"unitary")]
            return random_system(entropy, dim, mode, spec.get("maxDenominator", 8), tol)
    except ScenarioError:
        raise
    except ValueError as exc:
        raise _fail(f"unitary spec rejected: {exc}") from exc
    raise _fail(f"unknown unitary kind {kind!r}")


def _build_operator(spec, dim: int, seed: int, index: int) -> np.ndarray:
    if not isinstance(spec, dict) or "kind" not in spec:
        raise _fail(f"operator {index} must be an object with a 'kind'")
    kind = spec["kind"]
    if kind == "identity":
        return np.eye(dim, dtype=np.complex128)
    if kind == "matrix":
        mat = _matrix_from_spec(spec, f"operator {index}")
        if mat.shape != (dim, dim):
            raise _fail(f"operator {index} has shape {mat.shape}, system dimension is {dim}")
        return mat
    if kind == "random":
        op_seed = spec.get("seed")
        rng = np.random.default_rng(op_seed) if op_seed is not None else rng_for(seed, "operator", index)
        norm = spec.get("norm", 1.0)
        if not isinstance(norm, (int, float)) or norm <= 0:
            raise _fail(f"operator {index} 'norm' must be positive")
        return gaussian_operator(rng, dim, op_norm=float(norm))
    raise _fail(f"unknown operator kind {kind!r}")


def _build_state(spec, dim: int) -> np.ndarray:
    if not isinstance(spec, dict) or "kind" not in spec:
        raise _fail("'state' must be an object with a 'kind'")
    kind = spec["kind"]
    if kind == "vector":
        omega = spec.get("omega")
        if not isinstance(omega, list) or len(omega) != dim:
            raise _fail(f"vector state needs 'omega' with {dim} entries")
        return np.array([_complexify(v, "omega") for v in omega])
    if kind == "trace":
        if "diag" in spec:
            diag = spec["diag"]
            if not isinstance(diag, list) or len(diag) != dim:
                raise _fail(f"trace state 'diag' needs {dim} entries")
            return np.diag([float(v) for v in diag]).astype(np.complex128)
        return _matrix_from_spec(spec, "trace state")
    raise _fail(f"unknown state kind {kind!r}")


def _parse_tolerances(spec) -> Tolerances:
    if spec is None:
        return Tolerances()
    if not isinstance(spec, dict):
        raise _fail("'tolerances' must be an object")
    known = {"unitarity", "cluster", "resonance"}
    unknown = set(spec) - known
    if unknown:
        raise _fail(f"unknown tolerance keys {sorted(unknown)}")
    values = {}
    for key in known & set(spec):
        v = spec[key]
        if not isinstance(v, (int, float)) or v <= 0:
            raise _fail(f"tolerance {key!r} must be a positive number")
        values[key] = float(v)
    return Tolerances(**values)


def load_scenario(path: str) -> Scenario:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            raw = json.load(fh)
    except OSError as exc:
        raise ScenarioError(f"cannot read scenario file: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ScenarioError(f"scenario file is not valid JSON: {exc}") from exc
    return scenario_from_dict(raw)


def scenario_from_dict(raw) -> Scenario:
    if not isinstance(raw, dict):
        raise _fail("top level must be an object")

    if "unitary" not in raw:
        raise _fail("missing 'unitary'")

    partition = None
    if "partition" in raw:
        labels = raw["partition"]
        if not isinstance(labels, list) or not labels:
            raise _fail("'partition' must be a nonempty integer array")
        try:
            partition = canonicalize(labels)
        except ValueError as exc:
            raise _fail(f"bad partition: {exc}") from exc

    engine = raw.get("engine", "spectral")
    if engine not in ENGINE_NAMES:
        raise _fail(f"unknown engine {engine!r}, expected one of {ENGINE_NAMES}")

    horizons = raw.get("Ns", [])
    if not isinstance(horizons, list) or not all(isinstance(n, int) and n >= 1 for n in horizons):
        raise _fail("'Ns' must be a list of positive integers")
    if any(b <= a for a, b in zip(horizons, horizons[1:])):
        raise _fail("'Ns' must be strictly increasing")

    seed = raw.get("seed", 0)
    if not isinstance(seed, int):
        raise _fail("'seed' must be an integer")

    out = raw.get("out")
    if out is not None and not isinstance(out, str):
        raise _fail("'out' must be a string path")

    operator_specs = raw.get("operators")
    if operator_specs is not None and not isinstance(operator_specs, list):
        raise _fail("'operators' must be a list")

    state_spec = raw.get("state")

    return Scenario(
        unitary_spec=raw["unitary"],
        partition=partition,
        operator_specs=operator_specs,
        state_spec=state_spec,
        engine=engine,
        horizons=list(horizons),
        tolerances=_parse_tolerances(raw.get("tolerances")),
        seed=seed,
        out=out,
    )
