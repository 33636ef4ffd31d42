"""Run configuration: defaults, a flat key=value file format, and overrides.

Config files are plain text, one `key = value` per line, `#` comments.
Values are parsed as JSON where possible (numbers, booleans, lists, strings
in quotes) and fall back to the bare string, so `model = edge-flip` and
`p_grid = [0.2, 0.1]` both work.
"""

from __future__ import annotations

import dataclasses
import json
from dataclasses import dataclass
from typing import Sequence

MODELS = ("edge-flip", "edge-flip-planted", "graphon-jump")


@dataclass(frozen=True)
class RunConfig:
    model: str = "edge-flip"
    vertices: int = 64
    rate: float = 2.0
    init_density: float = 0.5
    horizon: float = 1.0
    seed: int = 0
    planted: bool = False
    boost_factor: float = 10.0
    p_grid: tuple[float, ...] = (0.2, 0.1, 0.05, 0.025)
    m_grid: tuple[int, ...] | None = None
    alphas: tuple[float, ...] = (2.5, 3.0)
    metric: str = "prefix"
    n_max: int = 3
    weight_family: str = "two_pow_neg_nsq"
    k_perm: int = 200
    k_inj: int = 100_000
    exact_budget: int = 10**7
    tol_rel: float = 1e-2

    def __post_init__(self) -> None:
        if self.model not in MODELS:
            raise ValueError(f"unknown model {self.model!r}; expected one of {MODELS}")
        if self.vertices < 2:
            raise ValueError("vertices must be at least 2")
        if self.rate < 0:
            raise ValueError("rate must be nonnegative")
        if not (0.0 <= self.init_density <= 1.0):
            raise ValueError("init_density must lie in [0, 1]")
        if self.horizon <= 0:
            raise ValueError("horizon must be positive")
        if not self.p_grid or any(not (0.0 < p < 1.0) for p in self.p_grid):
            raise ValueError("p_grid values must lie strictly between 0 and 1")
        if self.m_grid is not None and any(m < 2 for m in self.m_grid):
            raise ValueError("m_grid windows must be at least 2")
        if any(a <= 0 for a in self.alphas):
            raise ValueError("alphas must be positive")
        if self.metric != "prefix":
            raise ValueError(f"unknown metric {self.metric!r}; only 'prefix' is supported")
        if self.n_max < 1:
            raise ValueError("n_max must be at least 1")
        if self.k_perm < 2 or self.k_inj < 1:
            raise ValueError("sample sizes must be positive (k_perm >= 2)")
        if self.exact_budget < 1:
            raise ValueError("exact_budget must be positive")
        if self.tol_rel <= 0:
            raise ValueError("tol_rel must be positive")

    def windows(self) -> tuple[int, ...]:
        """Configured m_grid, defaulting to quarter/half/full truncation."""
        if self.m_grid is not None:
            return tuple(self.m_grid)
        n = self.vertices
        return tuple(sorted({max(2, n // 4), max(2, n // 2), n}))

    def to_dict(self) -> dict:
        d = dataclasses.asdict(self)
        for key in ("p_grid", "m_grid", "alphas"):
            if d[key] is not None:
                d[key] = list(d[key])
        return d


_FIELD_TYPES = {f.name: f for f in dataclasses.fields(RunConfig)}
_TUPLE_KEYS = {"p_grid", "m_grid", "alphas"}


def parse_config_text(text: str, source: str = "<config>") -> dict:
    """Parse `key = value` lines into a dict of RunConfig fields."""
    out: dict = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValueError(f"{source}: line {lineno}: expected 'key = value'")
        key, _, value = line.partition("=")
        key = key.strip()
        value = value.strip()
        if key not in _FIELD_TYPES:
            raise ValueError(
                f"{source}: line {lineno}: unknown key {key!r}; "
                f"known keys: {', '.join(sorted(_FIELD_TYPES))}"
            )
        try:
            parsed = json.loads(value)
        except json.JSONDecodeError:
            parsed = value  # bare string, e.g. model = edge-flip
        if key in _TUPLE_KEYS and isinstance(parsed, list):
            parsed = tuple(parsed)
        out[key] = parsed
    return out


def load_config(path) -> dict:
    with open(path, "r", encoding="utf-8") as fh:
        return parse_config_text(fh.read(), source=str(path))


def resolve_config(
    file: str | None = None, overrides: dict | None = None
) -> RunConfig:
    """Defaults, then config-file values, then non-None overrides."""
    merged: dict = {}
    if file is not None:
        merged.update(load_config(file))
    for key, value in (overrides or {}).items():
        if value is None:
            continue
        if key not in _FIELD_TYPES:
            raise ValueError(f"unknown config key {key!r}")
        if key in _TUPLE_KEYS and isinstance(value, (list, tuple)):
            value = tuple(value)
        merged[key] = value
    return RunConfig(**merged)


def parse_float_list(text: str) -> tuple[float, ...]:
    """Comma-separated floats from a CLI flag."""
    try:
        return tuple(float(v) for v in text.split(",") if v.strip())
    except ValueError:
        raise ValueError(f"expected comma-separated numbers, got {text!r}") from None


def parse_int_list(text: str) -> tuple[int, ...]:
    try:
        return tuple(int(v) for v in text.split(",") if v.strip())
    except ValueError:
        raise ValueError(f"expected comma-separated integers, got {text!r}") from None
