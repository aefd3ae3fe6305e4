"""Report serialization and run manifests.

Floats are written with 17 significant digits so that two runs with the same
manifest can be compared byte for byte.
"""

from __future__ import annotations

import json
import math
import sys
import time
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from . import __version__


def _encode(obj) -> str:
    if obj is None or isinstance(obj, (bool, np.bool_)):
        return json.dumps(bool(obj) if obj is not None else None)
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating, Fraction)):
        x = float(obj)
        return "null" if not math.isfinite(x) else format(x, ".17g")
    if isinstance(obj, str):
        return json.dumps(obj, ensure_ascii=False)
    if isinstance(obj, dict):
        return "{" + ", ".join(f"{json.dumps(str(k), ensure_ascii=False)}: {_encode(v)}" for k, v in obj.items()) + "}"
    if isinstance(obj, (list, tuple, np.ndarray)):
        return "[" + ", ".join(_encode(v) for v in obj) + "]"
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def dumps(obj) -> str:
    """Compact JSON with every float rendered as ``%.17g``."""
    return _encode(obj)


@dataclass
class RunManifest:
    command_line: list[str]
    seed: int | None = None
    config: dict = field(default_factory=dict)
    tool_version: str = __version__
    wall_time: float | None = None
    _started: float = field(default_factory=time.perf_counter, repr=False)

    @classmethod
    def capture(cls, seed=None, config=None, argv=None) -> "RunManifest":
        return cls(list(sys.argv if argv is None else argv), seed, dict(config or {}))

    def finish(self) -> "RunManifest":
        self.wall_time = time.perf_counter() - self._started
        return self

    def to_dict(self) -> dict:
        return {
            "command_line": self.command_line,
            "seed": self.seed,
            "config": self.config,
            "tool_version": self.tool_version,
            "wall_time": self.wall_time,
        }
