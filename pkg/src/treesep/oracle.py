"""Exact finite-state reference dynamics for certifying the event engine.

Builds dense generator matrices for exclusion on a truncated ball, both
the plain configuration chain (states = occupancy bitmasks) and the
tagged chain (states = tag position x bitmask with the tag's site
occupied, exclusion semantics: a tagged jump onto an occupied site is
blocked, never relabelled).  The finite ball with closed boundary is
exactly the system the event engine simulates, so Monte Carlo and matrix
exponential must agree to statistical precision with no modelling gap.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.sparse.linalg import expm_multiply

from .cayley_tree import ROOT, Vertex, ball_words, busemann, distance
from .kernel import RateKernel

MAX_PLAIN_VERTICES = 14
MAX_TAGGED_VERTICES = 12

GeneratorMatrix = np.ndarray


class TooManyVerticesError(ValueError):
    """State space would exceed the dense-matrix size cap."""


@dataclass(frozen=True)
class FiniteGraph:
    """Truncated ball with symmetric pair rates from a kernel."""

    d: int
    radius: int
    kernel: RateKernel
    vertices: tuple[Vertex, ...]
    pair_rates: tuple[tuple[int, int, float], ...]


def build_finite_graph(d: int, radius: int, kernel: RateKernel) -> FiniteGraph:
    """Ball of the given radius with rates p(distance) on qualifying pairs."""
    vertices = tuple(ball_words(d, radius))
    pairs: list[tuple[int, int, float]] = []
    for a in range(len(vertices)):
        for b in range(a + 1, len(vertices)):
            rate = kernel.rate(distance(vertices[a], vertices[b]))
            if rate > 0.0:
                pairs.append((a, b, rate))
    return FiniteGraph(d=d, radius=radius, kernel=kernel, vertices=vertices, pair_rates=tuple(pairs))


def build_exclusion_generator(graph: FiniteGraph) -> GeneratorMatrix:
    """Rate matrix over occupancy bitmasks; swap transitions only."""
    n = len(graph.vertices)
    if n > MAX_PLAIN_VERTICES:
        raise TooManyVerticesError(f"{n} vertices exceeds the cap of {MAX_PLAIN_VERTICES}")
    size = 1 << n
    states = np.arange(size)
    q = np.zeros((size, size))
    for a, b, rate in graph.pair_rates:
        ba, bb = 1 << a, 1 << b
        discordant = ((states & ba) != 0) != ((states & bb) != 0)
        src = states[discordant]
        q[src, src ^ ba ^ bb] += rate
    q[states, states] = -q.sum(axis=1)
    return q


def product_measure(n_vertices: int, rho: float) -> np.ndarray:
    """Bernoulli(rho) product law over occupancy bitmasks."""
    size = 1 << n_vertices
    states = np.arange(size)
    pop = np.zeros(size, dtype=np.int64)
    for k in range(n_vertices):
        pop += (states >> k) & 1
    with np.errstate(invalid="ignore"):
        out = np.power(rho, pop) * np.power(1.0 - rho, n_vertices - pop)
    return np.nan_to_num(out, nan=0.0)


def check_invariance(q: GeneratorMatrix, rho: float) -> float:
    """Sup-norm of nu^T Q for the Bernoulli(rho) product measure."""
    n_vertices = (q.shape[0] - 1).bit_length()
    nu = product_measure(n_vertices, rho)
    return float(np.abs(nu @ q).max())


def check_detailed_balance(q: GeneratorMatrix, rho: float) -> float:
    """Max over state pairs of |nu(s)q(s,s') - nu(s')q(s',s)|, in row blocks."""
    n_vertices = (q.shape[0] - 1).bit_length()
    nu = product_measure(n_vertices, rho)
    size = q.shape[0]
    worst = 0.0
    block = 2048
    for lo in range(0, size, block):
        hi = min(size, lo + block)
        resid = nu[lo:hi, None] * q[lo:hi, :] - nu[None, :] * q[:, lo:hi].T
        worst = max(worst, float(np.abs(resid).max()))
    return worst


def semigroup_marginals(q: GeneratorMatrix, initial_dist: np.ndarray, t: float) -> np.ndarray:
    """Distribution at time t: initial^T e^{tQ} (exact action, no time stepping)."""
    if t < 0:
        raise ValueError(f"time must be >= 0, got {t}")
    initial = np.asarray(initial_dist, dtype=float)
    if initial.shape != (q.shape[0],):
        raise ValueError(f"distribution shape {initial.shape} does not match {q.shape[0]} states")
    if abs(float(initial.sum()) - 1.0) > 1e-9:
        raise ValueError("initial distribution must sum to 1")
    if t == 0:
        return initial.copy()
    return expm_multiply(t * q.T, initial)


def tagged_states(graph: FiniteGraph) -> list[tuple[int, int]]:
    """(tag index, occupancy mask) states, mask-major; tag's bit always set."""
    n = len(graph.vertices)
    return [(k, mask) for mask in range(1 << n) for k in range(n) if (mask >> k) & 1]


def build_tagged_generator(graph: FiniteGraph) -> GeneratorMatrix:
    """Joint (tag, configuration) chain under exclusion.

    Untagged discordant pairs swap at their rate; the tag jumps with its
    particle when the partner site is vacant and blocks otherwise.  Rates
    do not depend on the density, so the graph alone determines the
    matrix (the density enters through the initial law).
    """
    n = len(graph.vertices)
    if n > MAX_TAGGED_VERTICES:
        raise TooManyVerticesError(f"{n} vertices exceeds the cap of {MAX_TAGGED_VERTICES}")
    states = tagged_states(graph)
    index = {state: i for i, state in enumerate(states)}
    m = len(states)
    q = np.zeros((m, m))
    for si, (k, mask) in enumerate(states):
        for a, b, rate in graph.pair_rates:
            if a == k or b == k:
                j = b if a == k else a
                if not (mask >> j) & 1:
                    q[si, index[(j, mask ^ (1 << k) ^ (1 << j))]] += rate
            else:
                if ((mask >> a) & 1) != ((mask >> b) & 1):
                    q[si, index[(k, mask ^ (1 << a) ^ (1 << b))]] += rate
    mi = np.arange(m)
    q[mi, mi] = -q.sum(axis=1)
    return q


def palm_tagged_distribution(graph: FiniteGraph, rho: float) -> np.ndarray:
    """Initial law: tag on an occupied root, Bernoulli(rho) elsewhere."""
    states = tagged_states(graph)
    root = graph.vertices.index(ROOT)
    n = len(graph.vertices)
    out = np.zeros(len(states))
    for i, (k, mask) in enumerate(states):
        if k != root:
            continue
        pop = bin(mask).count("1")
        weight = 1.0
        for _ in range(pop - 1):
            weight *= rho
        for _ in range(n - pop):
            weight *= 1.0 - rho
        out[i] = weight
    return out


def tagged_marginals(
    graph: FiniteGraph,
    rho: float,
    t: float,
    generator: GeneratorMatrix | None = None,
) -> np.ndarray:
    """Exact tagged-chain distribution at time t from the Palm initial law."""
    q = build_tagged_generator(graph) if generator is None else generator
    return semigroup_marginals(q, palm_tagged_distribution(graph, rho), t)


def expected_horodistance_exact(
    graph: FiniteGraph,
    rho: float,
    t: float,
    generator: GeneratorMatrix | None = None,
) -> float:
    """E[horodistance of the tag] at time t on the truncated ball."""
    dist = tagged_marginals(graph, rho, t, generator=generator)
    horos = np.array([busemann(graph.vertices[k]) for k, _ in tagged_states(graph)], dtype=float)
    return float(dist @ horos)
