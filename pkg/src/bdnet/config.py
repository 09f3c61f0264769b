"""Run configuration: a single JSON object, validated key by key.

Unknown keys are rejected rather than ignored so a typo cannot silently
run the wrong experiment. Every randomized command either takes a seed
here (or on the command line) or gets one synthesized and printed, so any
published number can be replayed.
"""

from __future__ import annotations

import json
import os
from dataclasses import dataclass, field
from pathlib import Path

from .dynamics import DriftParams, PayoffMatrix, SelectionParams
from .engine import CompleteInit, EdgeListInit, MECHANISMS, SimParams
from .experiments import DEFAULT_EVENT_LIMIT


class ConfigError(ValueError):
    """Malformed or out-of-range configuration, naming the offending key."""


_KNOWN_KEYS = {
    "lambda", "mu", "m", "mechanism", "dynamics", "alpha", "payoff", "delta",
    "initial", "initial_invaders", "replicates", "t_max", "burn_in",
    "sample_dt", "event_limit", "seed", "output_path",
}

_DEFAULTS = {
    "mechanism": "uniform",
    "dynamics": "none",
    "delta": 0.01,
    "initial": {"type": "complete", "n": 30},
    "initial_invaders": 1,
    "replicates": 1500,
    "t_max": 1.0e4,
    "burn_in": 1.0e3,
    "sample_dt": 1.0,
    "event_limit": DEFAULT_EVENT_LIMIT,
}


@dataclass(frozen=True)
class RunConfig:
    lam: float
    mu: float
    m: int
    mechanism: str = "uniform"
    dynamics: str = "none"                 # "none" | "drift" | "selection"
    alpha: float | None = None             # required iff dynamics == "drift"
    payoff: PayoffMatrix | None = None     # required iff dynamics == "selection"
    payoff_bc: tuple[float, float] | None = None   # (b, c) when given that way
    delta: float = 0.01
    initial: CompleteInit | EdgeListInit = field(
        default_factory=lambda: CompleteInit(30))
    initial_invaders: int = 1
    replicates: int = 1500
    t_max: float = 1.0e4
    burn_in: float = 1.0e3
    sample_dt: float = 1.0
    event_limit: int = DEFAULT_EVENT_LIMIT
    seed: int | None = None
    output_path: str | None = None

    def to_sim_params(self) -> SimParams:
        if self.dynamics == "none":
            dyn = None
        elif self.dynamics == "drift":
            dyn = DriftParams(alpha=self.alpha)
        else:
            dyn = SelectionParams(payoff=self.payoff, delta=self.delta)
        return SimParams(
            lam=self.lam, mu=self.mu, m=self.m, mechanism=self.mechanism,
            dynamics=dyn, initial=self.initial,
            initial_invaders=self.initial_invaders,
        )

    def to_json_dict(self) -> dict:
        """A dict that parses back to an equal RunConfig."""
        out: dict = {
            "lambda": self.lam, "mu": self.mu, "m": self.m,
            "mechanism": self.mechanism, "dynamics": self.dynamics,
            "initial_invaders": self.initial_invaders,
            "replicates": self.replicates, "t_max": self.t_max,
            "burn_in": self.burn_in, "sample_dt": self.sample_dt,
            "event_limit": self.event_limit,
        }
        if isinstance(self.initial, CompleteInit):
            out["initial"] = {"type": "complete", "n": self.initial.n}
        else:
            out["initial"] = {"type": "edge_list", "path": self.initial.path}
        if self.dynamics == "drift":
            out["alpha"] = self.alpha
        if self.dynamics == "selection":
            out["delta"] = self.delta
            if self.payoff_bc is not None:
                out["payoff"] = {"b": self.payoff_bc[0], "c": self.payoff_bc[1]}
            else:
                p = self.payoff
                out["payoff"] = {"R": p.R, "S": p.S, "T": p.T, "P": p.P}
        if self.seed is not None:
            out["seed"] = self.seed
        if self.output_path is not None:
            out["output_path"] = self.output_path
        return out


def _require_number(data: dict, key: str, lo=None, hi=None,
                    integer=False, lo_strict=False):
    value = data[key]
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(f"key {key!r}: expected a number, got {value!r}")
    if integer:
        if float(value) != int(value):
            raise ConfigError(f"key {key!r}: expected an integer, got {value!r}")
        value = int(value)
    if lo is not None and (value <= lo if lo_strict else value < lo):
        bound = "greater than" if lo_strict else "at least"
        raise ConfigError(f"key {key!r}: must be {bound} {lo}, got {value}")
    if hi is not None and value > hi:
        raise ConfigError(f"key {key!r}: must be at most {hi}, got {value}")
    return value


def _parse_payoff(spec) -> tuple[PayoffMatrix, tuple[float, float] | None]:
    if not isinstance(spec, dict):
        raise ConfigError(f"key 'payoff': expected an object, got {spec!r}")
    keys = set(spec)
    if keys == {"b", "c"}:
        b, c = spec["b"], spec["c"]
        try:
            return PayoffMatrix.prisoners_dilemma(float(b), float(c)), (float(b), float(c))
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"key 'payoff': {exc}") from exc
    if keys == {"R", "S", "T", "P"}:
        try:
            return PayoffMatrix(*(float(spec[k]) for k in ("R", "S", "T", "P"))), None
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"key 'payoff': {exc}") from exc
    raise ConfigError(
        "key 'payoff': expected keys {b, c} or {R, S, T, P}, "
        f"got {sorted(keys)}"
    )


def _parse_initial(spec) -> CompleteInit | EdgeListInit:
    if not isinstance(spec, dict) or "type" not in spec:
        raise ConfigError(f"key 'initial': expected an object with 'type', got {spec!r}")
    kind = spec["type"]
    if kind == "complete":
        if set(spec) != {"type", "n"}:
            raise ConfigError("key 'initial': complete form takes exactly {type, n}")
        n = _require_number(spec, "n", lo=1, integer=True)
        return CompleteInit(n)
    if kind == "edge_list":
        if set(spec) != {"type", "path"} or not isinstance(spec["path"], str):
            raise ConfigError("key 'initial': edge_list form takes exactly {type, path}")
        return EdgeListInit(spec["path"])
    raise ConfigError(f"key 'initial': unknown type {kind!r}")


def parse_config_data(data: dict) -> RunConfig:
    if not isinstance(data, dict):
        raise ConfigError(f"config must be a JSON object, got {type(data).__name__}")
    unknown = set(data) - _KNOWN_KEYS
    if unknown:
        raise ConfigError(f"unknown config key(s): {', '.join(sorted(unknown))}")
    for key in ("lambda", "mu", "m"):
        if key not in data:
            raise ConfigError(f"missing required key {key!r}")
    merged = {**_DEFAULTS, **data}

    lam = _require_number(merged, "lambda", lo=0, lo_strict=True)
    mu = _require_number(merged, "mu", lo=0, lo_strict=True)
    m = _require_number(merged, "m", lo=1, integer=True)
    mechanism = merged["mechanism"]
    if mechanism not in MECHANISMS:
        raise ConfigError(
            f"key 'mechanism': expected one of {MECHANISMS}, got {mechanism!r}"
        )
    dynamics = merged["dynamics"]
    if dynamics not in ("none", "drift", "selection"):
        raise ConfigError(
            f"key 'dynamics': expected none|drift|selection, got {dynamics!r}"
        )
    alpha = None
    payoff = None
    payoff_bc = None
    if dynamics == "drift":
        if "alpha" not in data:
            raise ConfigError("dynamics 'drift' requires key 'alpha'")
        alpha = _require_number(merged, "alpha", lo=0.0, hi=1.0)
    elif "alpha" in data:
        raise ConfigError("key 'alpha' only applies to drift dynamics")
    delta = _DEFAULTS["delta"]
    if dynamics == "selection":
        delta = _require_number(merged, "delta", lo=0.0)
        if delta >= 1.0:
            raise ConfigError(f"key 'delta': must be below 1, got {delta}")
        if "payoff" not in data:
            raise ConfigError("dynamics 'selection' requires key 'payoff'")
        payoff, payoff_bc = _parse_payoff(merged["payoff"])
    else:
        if "delta" in data:
            raise ConfigError("key 'delta' only applies to selection dynamics")
        if "payoff" in data:
            raise ConfigError("key 'payoff' only applies to selection dynamics")

    initial = _parse_initial(merged["initial"])
    invaders = _require_number(merged, "initial_invaders", lo=0, integer=True)
    if isinstance(initial, CompleteInit) and invaders > initial.n:
        raise ConfigError(
            f"key 'initial_invaders': {invaders} exceeds initial size {initial.n}"
        )
    replicates = _require_number(merged, "replicates", lo=1, integer=True)
    t_max = _require_number(merged, "t_max", lo=0.0)
    burn_in = _require_number(merged, "burn_in", lo=0.0)
    sample_dt = _require_number(merged, "sample_dt", lo=0, lo_strict=True)
    event_limit = _require_number(merged, "event_limit", lo=1, integer=True)
    seed = None
    if "seed" in data:
        seed = _require_number(merged, "seed", integer=True)
    output_path = None
    if "output_path" in data:
        if not isinstance(data["output_path"], str):
            raise ConfigError("key 'output_path': expected a string")
        output_path = data["output_path"]

    return RunConfig(
        lam=float(lam), mu=float(mu), m=m, mechanism=mechanism,
        dynamics=dynamics, alpha=alpha, payoff=payoff, payoff_bc=payoff_bc,
        delta=float(delta), initial=initial, initial_invaders=invaders,
        replicates=replicates, t_max=float(t_max), burn_in=float(burn_in),
        sample_dt=float(sample_dt), event_limit=event_limit,
        seed=seed, output_path=output_path,
    )


def parse_config(source: str | Path) -> RunConfig:
    """Parse a config from a file path or from inline JSON text."""
    text = None
    if isinstance(source, Path) or (isinstance(source, str)
                                    and not source.lstrip().startswith("{")):
        if not os.path.exists(source):
            raise ConfigError(f"config file not found: {source}")
        with open(source, "r", encoding="utf-8") as fh:
            text = fh.read()
    else:
        text = str(source)
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(
            f"invalid JSON at line {exc.lineno}, column {exc.colno}: {exc.msg}"
        ) from exc
    return parse_config_data(data)
