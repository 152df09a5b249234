"""Scenario configs: which kernel, which (N, d) sweep points, which knobs.

Scenario files are YAML mappings; the kernel is either an inline mapping or
a path relative to the scenario file.  Every sweep point is checked against
the state-space guard at load time and carries its d * log N diagnostic
(the small parameter of the whole condensation regime).
"""
from __future__ import annotations

import math
import os
from dataclasses import dataclass, field
from typing import Optional

import yaml

from .config_space import MAX_STATES, space_size
from .errors import ScenarioError
from .measure import DN_SCHEDULES
from .model import SiteKernel, kernel_from_config

_SCENARIO_KEYS = {
    "kernel", "n_values", "d_schedule", "d_values", "scale", "source",
    "targets", "trials", "seed", "horizon", "epsilon", "event_cap", "label",
}


@dataclass(frozen=True)
class Scenario:
    """One batch job: a kernel, sweep points, and command options."""

    kernel: SiteKernel
    points: tuple  # ((n, d), ...) ordered by (n, d)
    schedule: str  # schedule name or "explicit"
    source: Optional[object] = None  # site label of the source condensate
    targets: tuple = field(default=())  # site labels of target condensates
    scale: Optional[int] = None
    trials: int = 1000
    seed: int = 0
    horizon: float = 1.0
    epsilon: float = 0.05
    event_cap: int = 10**10
    label: str = "scenario"

    def source_index(self) -> int:
        if self.source is None:
            return self.kernel.s_star[0]
        return self.kernel.index(self.source)

    def target_indices(self) -> tuple:
        if not self.targets:
            idx = self.source_index()
            return tuple(x for x in self.kernel.s_star if x != idx)
        return tuple(self.kernel.index(t) for t in self.targets)


def _sweep_points(kernel: SiteKernel, n_values, schedule, d_values):
    if (schedule is None) == (d_values is None):
        raise ScenarioError("give exactly one of d_schedule or d_values")
    if schedule is not None:
        if schedule not in DN_SCHEDULES:
            known = ", ".join(sorted(DN_SCHEDULES))
            raise ScenarioError(f"unknown d_schedule {schedule!r} (known: {known})")
        fn = DN_SCHEDULES[schedule]
        points = [(int(n), float(fn(int(n)))) for n in n_values]
        name = schedule
    else:
        points = [(int(n), float(d)) for n in n_values for d in d_values]
        name = "explicit"
    for n, d in points:
        if n < 1:
            raise ScenarioError(f"N must be positive, got {n}")
        if d <= 0:
            raise ScenarioError(f"d must be positive, got {d} at N={n}")
        if space_size(n, kernel.kappa) > MAX_STATES:
            raise ScenarioError(
                f"N={n} with {kernel.kappa} sites exceeds the state-space guard"
            )
    return tuple(sorted(points)), name


def scenario_from_config(cfg: dict, base_dir: str = ".") -> Scenario:
    """Build a validated scenario from a parsed mapping (rejects unknown keys)."""
    if not isinstance(cfg, dict):
        raise ScenarioError("scenario config must be a mapping")
    unknown = set(cfg) - _SCENARIO_KEYS
    if unknown:
        raise ScenarioError(f"unknown scenario keys: {sorted(unknown)}")
    if "kernel" not in cfg:
        raise ScenarioError("scenario config missing key: 'kernel'")
    kspec = cfg["kernel"]
    if isinstance(kspec, str):
        path = os.path.join(base_dir, kspec)
        with open(path) as fh:
            kspec = yaml.safe_load(fh)
    kernel = kernel_from_config(kspec)

    n_values = cfg.get("n_values")
    if not n_values:
        raise ScenarioError("scenario needs a nonempty n_values list")
    points, schedule = _sweep_points(
        kernel, n_values, cfg.get("d_schedule"), cfg.get("d_values")
    )

    scale = cfg.get("scale")
    if scale is not None and scale not in (1, 2, 3):
        raise ScenarioError(f"scale must be 1, 2 or 3, got {scale!r}")
    targets = cfg.get("targets", ())
    return Scenario(
        kernel=kernel,
        points=points,
        schedule=schedule,
        source=cfg.get("source"),
        targets=tuple(targets) if targets else (),
        scale=scale,
        trials=int(cfg.get("trials", 1000)),
        seed=int(cfg.get("seed", 0)),
        horizon=float(cfg.get("horizon", 1.0)),
        epsilon=float(cfg.get("epsilon", 0.05)),
        event_cap=int(cfg.get("event_cap", 10**10)),
        label=str(cfg.get("label", "scenario")),
    )


def load_scenario(path) -> Scenario:
    with open(path) as fh:
        cfg = yaml.safe_load(fh)
    return scenario_from_config(cfg, base_dir=os.path.dirname(os.path.abspath(path)))


def d_log_n(n: int, d: float) -> float:
    """The regime diagnostic d * log N reported next to every sweep point."""
    return d * math.log(n)
