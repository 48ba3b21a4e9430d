"""The configuration as seen from the tagged particle.

A view re-keys occupancies by relative word z (group product: absolute
site = tag * z), which is exactly the "environment seen from the tagged
particle".  Its law started from the conditioned product measure is
time-invariant; `stationarity_check` turns sampled views into the
per-site frequency test of that statement.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Protocol, Sequence

from . import cayley_tree as _tree
from .cayley_tree import ROOT, Vertex
from .kernel import ModelParams, RateKernel, speed


class InsufficientRadiusError(ValueError):
    """View radius too small for the requested kernel-range computation."""


class OccupancySource(Protocol):
    def reveal(self, v: Vertex) -> int: ...


@dataclass(frozen=True)
class EnvironmentView:
    """Occupancies keyed by relative word, out to ``radius`` around ``center``.

    Relative sites whose absolute position falls outside the simulation
    ball are absent from ``occupancy``; the origin is always present and
    always occupied (it carries the tag).
    """

    center: Vertex
    radius: int
    occupancy: dict[Vertex, int]


def environment_view(
    source: OccupancySource,
    center: Vertex,
    radius: int,
    d: int,
    ball_radius: int | None = None,
) -> EnvironmentView:
    """Materialize the radius-``radius`` view around ``center``.

    ``source`` is anything with a ``reveal``: a live simulation (which keeps
    its proposal pool in sync) or a bare configuration.
    """
    if radius < 0:
        raise ValueError(f"radius must be >= 0, got {radius}")
    occupancy: dict[Vertex, int] = {}
    for z in _tree.ball_words(d, radius):
        y = _tree.add(center, z)
        if ball_radius is not None and len(y) > ball_radius:
            continue
        occupancy[z] = source.reveal(y)
    return EnvironmentView(center=center, radius=radius, occupancy=occupancy)


def tagged_view(sim, radius: int) -> EnvironmentView:
    """View around a live simulation's tagged particle."""
    return environment_view(sim, sim.tag, radius, sim.d, sim.L)


def local_drift(view: EnvironmentView, kernel: RateKernel, d: int) -> float:
    """Expected horodistance velocity computed in the tag's own frame.

    Sums rate * vacancy * busemann over relative targets within kernel
    range.  Distinct from the absolute-frame drift the simulator
    integrates: the two agree in distribution under the stationary
    environment law, not pathwise.
    """
    if view.radius < kernel.range:
        raise InsufficientRadiusError(
            f"view radius {view.radius} < kernel range {kernel.range}"
        )
    occ = view.occupancy
    total = 0.0
    for i, p in kernel.rates:
        for z in _tree.sphere(ROOT, i, d):
            bit = occ.get(z)
            if bit is not None and not bit:
                total += p * _tree.busemann(z)
    return total


def centered_drift(view: EnvironmentView, model: ModelParams) -> float:
    """Local drift minus the asymptotic speed; mean zero at stationarity."""
    return local_drift(view, model.kernel, model.d) - speed(model)


def stationarity_check(
    site_labels: Sequence[str],
    times: Sequence[float],
    counts: Sequence[Sequence[int]],
    n_replicas: int,
    rho: float,
) -> dict:
    """Frequency-vs-density test for sampled views.

    ``counts[k][j]`` is the number of replicas whose view at ``times[k]``
    had site ``site_labels[j]`` occupied.  The origin must be occupied in
    every view by construction; every other site is tested against rho at
    three standard errors (exactly, when rho is 0 or 1).
    """
    if n_replicas < 1:
        raise ValueError("need at least one replica")
    se0 = math.sqrt(rho * (1.0 - rho) / n_replicas)
    rows = []
    worst = 0.0
    all_pass = True
    for k, t in enumerate(times):
        for j, label in enumerate(site_labels):
            freq = counts[k][j] / n_replicas
            ref = 1.0 if label == "o" else rho
            se = 0.0 if label == "o" else se0
            dev = freq - ref
            if se > 0.0:
                z: float | None = dev / se
                ok = abs(z) <= 3.0
                worst = max(worst, abs(z))
            else:
                # degenerate reference (origin, or rho in {0, 1}): exact or fail
                z = 0.0 if dev == 0.0 else None
                ok = dev == 0.0
            all_pass = all_pass and ok
            rows.append(
                {
                    "t": t,
                    "site": label,
                    "freq": freq,
                    "reference": ref,
                    "se": se,
                    "zscore": z,
                    "pass": ok,
                }
            )
    return {"rows": rows, "max_abs_zscore": worst, "pass": all_pass}
