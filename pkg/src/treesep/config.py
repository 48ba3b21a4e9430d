"""Key-value experiment configuration.

A config document is UTF-8 text with ``key = value`` pairs separated by
newlines or top-level commas (commas inside brackets belong to the value,
so kernels parse naturally).  ``#`` starts a comment.  Example::

    experiment = speed        # simulate | speed | clt | martingale
    d = 3                     #   | stationarity | oracle
    rho = 0.5
    kernel = [(1, 0.2), (2, 0.1)]   # or: sep
    t = [25, 100]             # sample-time grid, strictly increasing
    replicas = 1000
    seed = 7
    ball_radius = auto        # or an integer >= 1
    strict_boundary = on
    workers = 1
    plots = off
    out_dir = results

``experiment`` and ``d`` are required; everything else has the defaults
shown by :func:`default_times` and :data:`DEFAULTS`.  Unknown keys are
rejected by name so typos cannot silently fall back to defaults.
"""

from __future__ import annotations

import ast
from dataclasses import dataclass

from .kernel import ModelParams, RateKernel

EXPERIMENTS = ("simulate", "speed", "clt", "martingale", "stationarity", "oracle")

# per-experiment sample-time grids used when the document omits `t`
_DEFAULT_TIMES: dict[str, tuple[float, ...]] = {
    "simulate": tuple(float(5 * k) for k in range(21)),
    "speed": (100.0,),
    "clt": (25.0, 100.0),
    "martingale": (10.0,),
    "stationarity": (0.0, 5.0, 10.0),
    "oracle": (),
}

DEFAULTS = {
    "rho": 0.5,
    "kernel": "sep",
    "replicas": 1000,
    "seed": 0,
    "ball_radius": "auto",
    "strict_boundary": "on",
    "workers": 1,
    "plots": "off",
    "out_dir": None,
}


class ConfigError(ValueError):
    """Malformed config document: unknown key, bad value, or broken invariant."""


@dataclass(frozen=True)
class ExperimentConfig:
    """Validated experiment description; construct via :func:`parse_config`."""

    experiment: str
    model: ModelParams
    times: tuple[float, ...]
    replicas: int
    seed: int
    ball_radius: int | None  # None means auto per the engine's envelope formula
    strict_boundary: bool
    workers: int
    plots: bool
    out_dir: str | None

    def as_dict(self) -> dict:
        """JSON-ready echo of the fields that determine the results.

        Execution-environment fields (workers, plots, out_dir) are omitted
        on purpose: summaries must be byte-identical across worker counts
        and output locations.
        """
        return {
            "experiment": self.experiment,
            "d": self.model.d,
            "rho": self.model.rho,
            "kernel": [[i, p] for i, p in self.model.kernel.rates],
            "t": list(self.times),
            "replicas": self.replicas,
            "seed": self.seed,
            "ball_radius": "auto" if self.ball_radius is None else self.ball_radius,
            "strict_boundary": self.strict_boundary,
        }


def default_times(experiment: str) -> tuple[float, ...]:
    """Sample-time grid used when a document does not set ``t``."""
    if experiment not in _DEFAULT_TIMES:
        raise ConfigError(f"unknown experiment {experiment!r}; choose one of {', '.join(EXPERIMENTS)}")
    return _DEFAULT_TIMES[experiment]


def _split_pairs(text: str) -> list[tuple[str, str]]:
    # newlines always separate; commas separate only at bracket depth 0
    pairs: list[tuple[str, str]] = []
    for raw_line in text.splitlines():
        line = raw_line.split("#", 1)[0]
        depth = 0
        start = 0
        chunks: list[str] = []
        for k, ch in enumerate(line):
            if ch in "([{":
                depth += 1
            elif ch in ")]}":
                depth -= 1
            elif ch == "," and depth == 0:
                chunks.append(line[start:k])
                start = k + 1
        chunks.append(line[start:])
        for chunk in chunks:
            item = chunk.strip()
            if not item:
                continue
            if "=" not in item:
                raise ConfigError(f"expected 'key = value', got {item!r}")
            key, value = item.split("=", 1)
            pairs.append((key.strip().lower(), value.strip()))
    return pairs


def _parse_bool(key: str, value: str) -> bool:
    lowered = value.lower()
    if lowered in ("on", "true", "yes", "1"):
        return True
    if lowered in ("off", "false", "no", "0"):
        return False
    raise ConfigError(f"{key} must be on/off, got {value!r}")


def _parse_int(key: str, value: str) -> int:
    try:
        return int(value)
    except ValueError:
        raise ConfigError(f"{key} must be an integer, got {value!r}") from None


def _parse_kernel(value: str) -> RateKernel | None:
    if value.lower() == "sep":
        return None  # ModelParams substitutes the nearest-neighbour kernel
    try:
        literal = ast.literal_eval(value)
    except (ValueError, SyntaxError):
        raise ConfigError(f"kernel must be 'sep', a [(length, rate), ...] list, or a dict, got {value!r}") from None
    if isinstance(literal, dict):
        items = literal.items()
    elif isinstance(literal, (list, tuple)):
        items = literal
    else:
        raise ConfigError(f"kernel must be 'sep', a [(length, rate), ...] list, or a dict, got {value!r}")
    try:
        return RateKernel(tuple((i, p) for i, p in items))
    except (TypeError, ValueError) as exc:  # KernelValidationError is a ValueError
        raise ConfigError(f"invalid kernel {value!r}: {exc}") from None


def _parse_times(value: str) -> tuple[float, ...]:
    # in a document the list needs brackets (top-level commas separate pairs);
    # a CLI flag value arrives whole, so bare "10,20" works there too
    body = value.strip()
    if body[:1] in "([" and body[-1:] in ")]":
        body = body[1:-1]
    try:
        times = tuple(float(part) for part in body.split(",") if part.strip())
    except ValueError:
        raise ConfigError(f"t must be a number or a [t1, t2, ...] list, got {value!r}") from None
    if not times:
        raise ConfigError("t must contain at least one time")
    for s in times:
        if s < 0:
            raise ConfigError(f"t values must be >= 0, got {s}")
    if any(b <= a for a, b in zip(times, times[1:])):
        raise ConfigError(f"t grid must be strictly increasing, got {list(times)}")
    return times


def parse_config(text: str, overrides: dict[str, str] | None = None) -> ExperimentConfig:
    """Parse and validate a config document, applying defaults.

    ``overrides`` (already-split key/value strings, e.g. from CLI flags)
    are applied after the document and go through the same validation.
    """
    values: dict[str, str] = {}
    for key, value in _split_pairs(text):
        values[key] = value
    if overrides:
        for key, value in overrides.items():
            values[key.strip().lower()] = value

    known = {
        "experiment", "d", "rho", "kernel", "t", "replicas", "seed",
        "ball_radius", "strict_boundary", "workers", "plots", "out_dir",
    }
    for key in values:
        if key not in known:
            raise ConfigError(f"unknown config key {key!r}")

    if "experiment" not in values:
        raise ConfigError("missing required key 'experiment'")
    experiment = values["experiment"].lower()
    if experiment not in EXPERIMENTS:
        raise ConfigError(f"unknown experiment {experiment!r}; choose one of {', '.join(EXPERIMENTS)}")
    if "d" not in values:
        raise ConfigError("missing required key 'd'")
    d = _parse_int("d", values["d"])

    rho_text = values.get("rho", str(DEFAULTS["rho"]))
    try:
        rho = float(rho_text)
    except ValueError:
        raise ConfigError(f"rho must be a number, got {rho_text!r}") from None
    kernel = _parse_kernel(values.get("kernel", DEFAULTS["kernel"]))
    try:
        model = ModelParams(d=d, rho=rho, kernel=kernel)
    except ValueError as exc:
        raise ConfigError(str(exc)) from None

    times = _parse_times(values["t"]) if "t" in values else default_times(experiment)
    if experiment in ("speed", "clt", "martingale") and (not times or times[-1] <= 0.0):
        raise ConfigError(f"experiment {experiment!r} needs a final sample time > 0")

    replicas = _parse_int("replicas", values.get("replicas", str(DEFAULTS["replicas"])))
    if replicas < 1:
        raise ConfigError(f"replicas must be >= 1, got {replicas}")
    if experiment in ("speed", "clt", "martingale", "stationarity") and replicas < 2:
        raise ConfigError(f"experiment {experiment!r} needs replicas >= 2 for its statistics")
    if experiment == "clt" and replicas < 500:
        raise ConfigError("experiment 'clt' needs replicas >= 500 for a meaningful KS gate")
    seed = _parse_int("seed", values.get("seed", str(DEFAULTS["seed"])))
    if not 0 <= seed < 2**64:
        raise ConfigError(f"seed must lie in [0, 2^64), got {seed}")

    ball_text = values.get("ball_radius", DEFAULTS["ball_radius"])
    if ball_text.lower() == "auto":
        ball_radius: int | None = None
    else:
        ball_radius = _parse_int("ball_radius", ball_text)
        if ball_radius < 1:
            raise ConfigError(f"ball_radius must be >= 1 or 'auto', got {ball_radius}")
        if ball_radius < model.kernel.range:
            raise ConfigError(
                f"ball_radius {ball_radius} cannot hold the kernel range {model.kernel.range}"
            )

    strict = _parse_bool("strict_boundary", values.get("strict_boundary", DEFAULTS["strict_boundary"]))
    workers = _parse_int("workers", values.get("workers", str(DEFAULTS["workers"])))
    if workers < 1:
        raise ConfigError(f"workers must be >= 1, got {workers}")
    plots = _parse_bool("plots", values.get("plots", DEFAULTS["plots"]))
    out_dir = values.get("out_dir", DEFAULTS["out_dir"])

    return ExperimentConfig(
        experiment=experiment,
        model=model,
        times=times,
        replicas=replicas,
        seed=seed,
        ball_radius=ball_radius,
        strict_boundary=strict,
        workers=workers,
        plots=plots,
        out_dir=out_dir,
    )
