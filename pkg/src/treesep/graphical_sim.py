"""Event-driven exclusion dynamics with a tagged particle, built lazily.

The process lives on the radius-L ball of the d-regular tree, started from
a Bernoulli(rho) product measure conditioned on a particle at the root
(which carries the tag).  Site occupancies outside the revealed set are
never materialized: conditionally on everything revealed so far they stay
i.i.d. Bernoulli(rho), and the engine resolves swap events against that
conditional law.

Scheduling works by directed proposals.  Each *revealed* site proposes at
rate W = sum_i p(i) * sphere_size(d, i); a proposal picks a jump length i
with weight p(i) * sphere_size(d, i) and then a uniform target on the
distance-i sphere, so every directed pair (x, y) carries intensity
p(distance).  Proposals are resolved exactly:

* target outside the ball: the swap is suppressed by the truncation, a
  genuine no-op of the truncated generator (counted, never silently lost);
* both endpoints revealed: accepted with probability 1/2, because the pair
  is proposed from both sides and an undirected ring must carry rate p(i);
* target unrevealed, and neither endpoint in the tag's kernel ball: the
  revealed value simply moves to the target and the source reverts to
  undecided.  Swapping a known value with an untouched Bernoulli(rho)
  unknown has exactly that conditional law, and nothing observable reads
  either site, so no draw is consumed;
* anything touching the tag's kernel ball: the unknown endpoint is
  revealed first and the swap is applied literally.

Pairs with both endpoints unrevealed never ring at all: exchanging two
i.i.d. unknowns is invisible, and deleting null points from a Poisson
stream leaves the law of the rest untouched.

The tagged particle obeys exclusion rather than stirring: a proposal onto
an occupied partner blocks, it never relabels which particle is tagged.
The tag's whole kernel ball is kept revealed at all times so the exact
local drift (the generator applied to the horodistance) is always
available; its time integral is the compensator that makes
``horo - drift_integral`` a mean-zero martingale, which is what the
martingale diagnostics test.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass

from . import cayley_tree as _tree
from .cayley_tree import ROOT, Vertex
from .kernel import ModelParams, total_rate_per_site
from .rng import derive_seed, occupancy_uniform

_GEN = [b""] + [bytes((g,)) for g in range(1, 256)]


class TruncationBreachError(RuntimeError):
    """Strict-boundary mode observed activity inside the safety margin."""


class LazyConfiguration:
    """Deferred Bernoulli(rho) occupancy field with per-vertex draw counters."""

    __slots__ = ("rho", "seed", "revealed", "_counters")

    def __init__(self, rho: float, seed: int) -> None:
        if not 0.0 <= rho <= 1.0:
            raise ValueError(f"density must lie in [0, 1], got {rho!r}")
        self.rho = float(rho)
        self.seed = seed
        self.revealed: dict[Vertex, int] = {}
        self._counters: dict[Vertex, int] = {}

    def reveal(self, v: Vertex) -> int:
        """Occupancy at ``v``, drawing and fixing it if still undecided."""
        bit = self.revealed.get(v)
        if bit is None:
            k = self._counters.get(v, 0)
            self._counters[v] = k + 1
            bit = 1 if occupancy_uniform(self.seed, v, k) < self.rho else 0
            self.revealed[v] = bit
        return bit

    def peek(self, v: Vertex) -> int | None:
        """Occupancy if already decided, else None (consumes nothing)."""
        return self.revealed.get(v)


def sample_palm_config(rho: float, seed: int) -> LazyConfiguration:
    """Product measure conditioned on a particle at the root."""
    config = LazyConfiguration(rho, seed)
    config.revealed[ROOT] = 1
    return config


def default_ball_radius(model: ModelParams, t_end: float) -> int:
    """Radius envelope sized so strict-boundary runs stay breach-free.

    Every revealed label (not just the tag) performs a free walk with
    radial drift (d - 2) * sum_i i * p(i), so the envelope must cover the
    maximum over the whole label population across a large replica farm,
    not one walk's typical fluctuation: hence eight root-t deviations
    rather than a per-walk allowance, plus fixed slack.  Laziness makes
    the radius free; only the breach monitor and reveal clipping see it.
    """
    r = model.kernel.range
    v_free = (model.d - 2) * model.kernel.mean_length()
    return max(r + 1, math.ceil(v_free * t_end + 8.0 * math.sqrt(t_end + 1.0) + r + 16))


def default_safety_margin(model: ModelParams, ball_radius: int) -> int:
    """Monitor band near the boundary; 0 when the ball is too small to carry one."""
    return min(ball_radius - 1, max(model.kernel.range, 10))


@dataclass(frozen=True)
class SimParams:
    """One replica's full specification; validation happens on construction."""

    model: ModelParams
    t_end: float
    sample_times: tuple[float, ...]
    ball_radius: int
    safety_margin: int
    seed: int
    strict_boundary: bool = False
    record_events: bool = False

    def __post_init__(self) -> None:
        if not (isinstance(self.t_end, (int, float)) and math.isfinite(self.t_end) and self.t_end >= 0):
            raise ValueError(f"t_end must be finite and >= 0, got {self.t_end!r}")
        object.__setattr__(self, "t_end", float(self.t_end))
        times = tuple(float(s) for s in self.sample_times)
        prev = 0.0
        for s in times:
            if not (0.0 <= s <= self.t_end):
                raise ValueError(f"sample time {s} outside [0, {self.t_end}]")
            if s < prev:
                raise ValueError("sample times must be nondecreasing")
            prev = s
        object.__setattr__(self, "sample_times", times)
        if not (isinstance(self.ball_radius, int) and self.ball_radius >= 1):
            raise ValueError(f"ball radius must be an integer >= 1, got {self.ball_radius!r}")
        m = self.safety_margin
        r = self.model.kernel.range
        # margin 0 disables the monitor; anything else must cover the kernel
        # range and leave room for the tag to live outside the band
        if not (isinstance(m, int) and (m == 0 or r <= m < self.ball_radius)):
            raise ValueError(
                f"safety margin must be 0 or satisfy {r} <= margin < {self.ball_radius}, got {m!r}"
            )
        if not isinstance(self.seed, int):
            raise ValueError(f"seed must be an integer, got {self.seed!r}")


@dataclass(frozen=True)
class TrajectorySample:
    """Snapshot of the tagged particle at one sample time."""

    t: float
    tag: Vertex
    horo: int
    depth: int
    drift_integral: float
    boundary_flag: bool


@dataclass(frozen=True)
class EventRecord:
    t: float
    source: Vertex
    target: Vertex
    effect: str


class Simulation:
    """Single-replica event loop; see the module docstring for the construction."""

    def __init__(self, params: SimParams) -> None:
        self.params = params
        model = params.model
        self.d = model.d
        self.rho = model.rho
        kern = model.kernel
        self.R = kern.range
        self.L = params.ball_radius
        self._depth_limit = self.L - params.safety_margin
        self.t_end = params.t_end
        self.config = sample_palm_config(model.rho, params.seed)
        self._rand = random.Random(derive_seed(params.seed))
        self._rates = kern.rate_by_distance()
        self.site_rate = total_rate_per_site(kern, self.d)
        acc = 0.0
        cum: list[tuple[float, int]] = []
        for i, p in kern.rates:
            acc += p * _tree.sphere_size(self.d, i)
            cum.append((acc / self.site_rate, i))
        cum[-1] = (1.0, cum[-1][1])
        self._class_cum = tuple(cum)
        self._single_class = kern.rates[0][0] if len(kern.rates) == 1 else 0

        self.t = 0.0
        self.tag: Vertex = ROOT
        self.horo = 0
        self.drift_integral = 0.0
        self.breached = False
        self.n_proposals = 0
        self.n_swaps = 0
        self.n_tag_jumps = 0
        self.n_tag_blocks = 0
        self.n_exchanges = 0
        self.n_boundary_rejects = 0
        self.events: list[EventRecord] | None = [] if params.record_events else None

        self._sites: list[Vertex] = []
        self._pos: dict[Vertex, int] = {}
        for v in self.config.revealed:
            self._pos[v] = len(self._sites)
            self._sites.append(v)
        self._near: set[Vertex] = set()
        self._phi = 0.0
        self._rebuild_tag_ball()
        self._recompute_drift()

    # -- revealed-set bookkeeping ------------------------------------------

    def reveal(self, v: Vertex) -> int:
        """Occupancy at ``v``; newly decided sites join the proposal pool."""
        occ = self.config.revealed
        bit = occ.get(v)
        if bit is None:
            bit = self.config.reveal(v)
            self._pos[v] = len(self._sites)
            self._sites.append(v)
        return bit

    def _rebuild_tag_ball(self) -> None:
        # keep every in-ball site within kernel range of the tag revealed
        tag = self.tag
        near = {tag}
        stack: list[tuple[Vertex, int, int]] = [(tag, self.R, 0)]
        d = self.d
        limit = self.L
        while stack:
            w, togo, forbidden = stack.pop()
            if togo == 0:
                continue
            last = w[-1] if w else 0
            for g in range(1, d + 1):
                if g == forbidden:
                    continue
                child = w[:-1] if g == last else w + _GEN[g]
                # geodesics to in-ball vertices stay in-ball, so pruning is safe
                if len(child) <= limit:
                    near.add(child)
                    self.reveal(child)
                    stack.append((child, togo - 1, g))
        self._near = near

    def _recompute_drift(self) -> None:
        # generator applied to the horodistance at the current state: sum of
        # rate * vacancy * increment over in-ball targets within kernel range
        tag = self.tag
        occ = self.config.revealed
        rates = self._rates
        d = self.d
        limit = self.L
        h0 = self.horo
        total = 0.0
        # carry the ray overlap so each increment costs O(1), not O(depth)
        stack: list[tuple[Vertex, int, int, int]] = [(tag, (len(tag) - h0) >> 1, self.R, 0)]
        while stack:
            w, overlap, togo, forbidden = stack.pop()
            if togo == 0:
                continue
            last = w[-1] if w else 0
            lw = len(w)
            for g in range(1, d + 1):
                if g == forbidden:
                    continue
                if g == last:
                    child = w[:-1]
                    c_overlap = lw - 1 if overlap == lw else overlap
                else:
                    child = w + _GEN[g]
                    c_overlap = overlap + 1 if (overlap == lw and g == _tree.ray_letter(lw)) else overlap
                if len(child) > limit:
                    continue
                r = rates[self.R - togo + 1]
                if r:
                    total += r * (1 - occ[child]) * ((len(child) - 2 * c_overlap) - h0)
                stack.append((child, c_overlap, togo - 1, g))
        self._phi = total

    @property
    def local_drift(self) -> float:
        """Instantaneous expected horodistance velocity at the current state."""
        return self._phi

    def _breach(self) -> None:
        self.breached = True
        if self.params.strict_boundary:
            raise TruncationBreachError(
                f"activity within {self.params.safety_margin} of the ball boundary "
                f"(radius {self.L}) at t={self.t:.6g}; rerun with ball_radius >= {2 * self.L}"
            )

    def _jump(self, target: Vertex) -> None:
        occ = self.config.revealed
        old = self.tag
        occ[old] = 0
        occ[target] = 1
        self.tag = target
        self.horo = _tree.busemann(target)
        self.n_tag_jumps += 1
        self.n_swaps += 1
        limit = self._depth_limit
        if len(target) > limit or len(old) > limit:
            self._breach()
        self._rebuild_tag_ball()
        self._recompute_drift()

    # -- event resolution ---------------------------------------------------

    def _apply_proposal(self, x: Vertex, y: Vertex) -> str:
        occ = self.config.revealed
        tag = self.tag
        vy = occ.get(y)
        if vy is not None:
            # proposed from both sides, so each side carries half the rate
            if self._rand.random() < 0.5:
                return "thinned"
            if x == tag:
                if vy:
                    self.n_tag_blocks += 1
                    return "tag-blocked"
                self._jump(y)
                return "tag-jump"
            if y == tag:
                if occ[x]:
                    self.n_tag_blocks += 1
                    return "tag-blocked"
                self._jump(x)
                return "tag-jump"
            vx = occ[x]
            if vx == vy:
                return "no-op"
            occ[x] = vy
            occ[y] = vx
            self.n_swaps += 1
            near = self._near
            if x in near or y in near:
                self._recompute_drift()
            limit = self._depth_limit
            if len(x) > limit or len(y) > limit:
                self._breach()
            return "swap"
        # target still undecided; x is revealed by construction, and an
        # unrevealed y is never inside the tag's kernel ball
        if x == tag:
            if self.reveal(y):
                self.n_tag_blocks += 1
                return "tag-blocked"
            self._jump(y)
            return "tag-jump"
        if x in self._near:
            bit = self.reveal(y)
            vx = occ[x]
            if vx == bit:
                return "no-op"
            occ[x] = bit
            occ[y] = vx
            self.n_swaps += 1
            self._recompute_drift()
            limit = self._depth_limit
            if len(x) > limit or len(y) > limit:
                self._breach()
            return "swap"
        # label move: carry the value, leave a fresh unknown behind
        pos = self._pos
        idx = pos.pop(x)
        pos[y] = idx
        self._sites[idx] = y
        occ[y] = occ.pop(x)
        self.n_exchanges += 1
        limit = self._depth_limit
        if len(x) > limit or len(y) > limit:
            self._breach()
        return "exchange"

    # -- time evolution -----------------------------------------------------

    def advance_to(self, T: float) -> None:
        """Process events up to time ``T``, integrating the drift compensator."""
        if T < self.t - 1e-12:
            raise ValueError(f"cannot advance backwards ({T} < {self.t})")
        if T > self.t_end + 1e-9:
            raise ValueError(f"advance target {T} beyond t_end {self.t_end}")
        rnd = self._rand.random
        sites = self._sites
        d = self.d
        gen = _GEN
        W = self.site_rate
        log = math.log
        limit = self.L
        single = self._single_class
        cum = self._class_cum
        apply_ = self._apply_proposal
        events = self.events
        t = self.t
        phi = self._phi
        drift = self.drift_integral
        proposals = 0
        rejects = 0
        while True:
            nt = t - log(1.0 - rnd()) / (len(sites) * W)
            if nt > T:
                drift += phi * (T - t)
                t = T
                break
            drift += phi * (nt - t)
            t = nt
            proposals += 1
            x = sites[int(rnd() * len(sites))]
            if single:
                i = single
            else:
                u = rnd()
                for frac, length in cum:
                    if u <= frac:
                        i = length
                        break
            g = 1 + int(rnd() * d)
            y = x[:-1] if (x and x[-1] == g) else x + gen[g]
            k = 1
            while k < i:
                u2 = 1 + int(rnd() * (d - 1))
                g = u2 if u2 < g else u2 + 1
                y = y[:-1] if (y and y[-1] == g) else y + gen[g]
                k += 1
            if len(y) > limit:
                rejects += 1
                if events is not None:
                    events.append(EventRecord(t, x, y, "boundary-reject"))
                continue
            try:
                effect = apply_(x, y)
            except TruncationBreachError:
                self.t = t
                self.drift_integral = drift
                self.n_proposals += proposals
                self.n_boundary_rejects += rejects
                raise
            phi = self._phi
            if events is not None:
                events.append(EventRecord(t, x, y, effect))
        self.t = t
        self.drift_integral = drift
        self.n_proposals += proposals
        self.n_boundary_rejects += rejects

    def step(self) -> EventRecord:
        """Process exactly one proposal event and return what it did.

        Audit-path twin of the loop in ``advance_to`` (kept inline there for
        speed); time advances past the event even when the effect is a no-op.
        """
        rnd = self._rand.random
        sites = self._sites
        d = self.d
        dt = -math.log(1.0 - rnd()) / (len(sites) * self.site_rate)
        self.drift_integral += self._phi * dt
        self.t += dt
        self.n_proposals += 1
        x = sites[int(rnd() * len(sites))]
        if self._single_class:
            i = self._single_class
        else:
            u = rnd()
            i = self._class_cum[-1][1]
            for frac, length in self._class_cum:
                if u <= frac:
                    i = length
                    break
        g = 1 + int(rnd() * d)
        y = x[:-1] if (x and x[-1] == g) else x + _GEN[g]
        for _ in range(i - 1):
            u2 = 1 + int(rnd() * (d - 1))
            g = u2 if u2 < g else u2 + 1
            y = y[:-1] if (y and y[-1] == g) else y + _GEN[g]
        if len(y) > self.L:
            self.n_boundary_rejects += 1
            record = EventRecord(self.t, x, y, "boundary-reject")
        else:
            record = EventRecord(self.t, x, y, self._apply_proposal(x, y))
        if self.events is not None:
            self.events.append(record)
        return record

    def sample(self) -> TrajectorySample:
        return TrajectorySample(
            t=self.t,
            tag=self.tag,
            horo=self.horo,
            depth=len(self.tag),
            drift_integral=self.drift_integral,
            boundary_flag=self.breached,
        )


def run(params: SimParams) -> list[TrajectorySample]:
    """Run one replica, returning a snapshot at each sample time."""
    sim = Simulation(params)
    out: list[TrajectorySample] = []
    for s in params.sample_times:
        sim.advance_to(s)
        out.append(sim.sample())
    if sim.t < params.t_end:
        sim.advance_to(params.t_end)
    return out
