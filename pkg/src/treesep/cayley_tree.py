"""Word algebra of the rooted d-regular tree.

Vertices of the d-regular tree are the reduced words over d order-two
generators, one generator per byte (values 1..d), with the empty word as
the root.  "Reduced" means no two adjacent letters are equal; since every
generator is its own inverse, concatenation only ever cancels at the seam.

A distinguished geodesic ray (alternating generators 1, 2, 1, 2, ...)
fixes a boundary point; ``busemann`` measures signed progress toward it
and is the quantity whose law of large numbers the simulator reproduces.
"""

from __future__ import annotations

from typing import Iterable, Iterator

Vertex = bytes

ROOT: Vertex = b""


class InvalidGeneratorError(ValueError):
    """A word contains a letter outside 1..d (or d itself is invalid)."""


class VertexFormatError(ValueError):
    """A vertex string is not ``"o"`` or dot-separated generator indices."""


def check_degree(d: int) -> None:
    if not isinstance(d, int) or d < 2:
        raise InvalidGeneratorError(f"degree d must be an integer >= 2, got {d!r}")


def check_word(word: Vertex, d: int) -> None:
    """Validate that ``word`` is a reduced word over generators 1..d."""
    check_degree(d)
    prev = 0
    for g in word:
        if g < 1 or g > d:
            raise InvalidGeneratorError(f"letter {g} outside 1..{d}")
        if g == prev:
            raise InvalidGeneratorError(f"word {word!r} is not reduced")
        prev = g


def reduce_word(letters: Iterable[int], d: int) -> Vertex:
    """Reduce a letter sequence by cancelling adjacent equal generators."""
    check_degree(d)
    out: list[int] = []
    for g in letters:
        if g < 1 or g > d:
            raise InvalidGeneratorError(f"letter {g} outside 1..{d}")
        if out and out[-1] == g:
            out.pop()
        else:
            out.append(g)
    return bytes(out)


def add(x: Vertex, y: Vertex) -> Vertex:
    """Group product of two reduced words (cancellation happens at the seam)."""
    i = len(x)
    j = 0
    ny = len(y)
    while i > 0 and j < ny and x[i - 1] == y[j]:
        i -= 1
        j += 1
    return x[:i] + y[j:]


def invert(x: Vertex) -> Vertex:
    """Group inverse: generators are involutions, so reverse the word."""
    return x[::-1]


def depth(x: Vertex) -> int:
    return len(x)


def common_prefix_length(x: Vertex, y: Vertex) -> int:
    n = min(len(x), len(y))
    k = 0
    while k < n and x[k] == y[k]:
        k += 1
    return k


def distance(x: Vertex, y: Vertex) -> int:
    """Graph distance: both words descend from their longest common prefix."""
    k = common_prefix_length(x, y)
    return (len(x) - k) + (len(y) - k)


def ray_letter(j: int) -> int:
    """Letter j (0-based) of the distinguished ray 1, 2, 1, 2, ..."""
    return 1 if j % 2 == 0 else 2


def ray_prefix(n: int) -> Vertex:
    return bytes(ray_letter(j) for j in range(n))


def ray_overlap(x: Vertex) -> int:
    """Length of the longest common prefix of ``x`` with the distinguished ray."""
    k = 0
    for g in x:
        if g != ray_letter(k):
            break
        k += 1
    return k


def busemann(x: Vertex) -> int:
    """Horodistance of ``x`` relative to the root, toward the ray's boundary point.

    Equals lim_n (distance(x, ray_prefix(n)) - n): the geodesic from x to the
    boundary merges with the ray at the common-prefix vertex, so the value is
    depth minus twice the overlap.  Negative means progress toward the
    boundary point, positive means progress away from it.
    """
    return len(x) - 2 * ray_overlap(x)


def horo_increment(x: Vertex, y: Vertex) -> int:
    """Change of horodistance when stepping from ``x`` to ``y``."""
    return busemann(y) - busemann(x)


def sphere_size(d: int, i: int) -> int:
    check_degree(d)
    if i < 0:
        raise ValueError(f"radius must be >= 0, got {i}")
    if i == 0:
        return 1
    return d * (d - 1) ** (i - 1)


def _extensions_nb(x: Vertex, i: int, d: int, forbidden: int) -> Iterator[Vertex]:
    # Non-backtracking tree walk: never repeat the letter of the edge just
    # crossed, whether that step appended or cancelled.  Walks of length i
    # from x are then in bijection with the sphere of radius i.
    if i == 0:
        yield x
        return
    last = x[-1] if x else 0
    for g in range(1, d + 1):
        if g == forbidden:
            continue
        child = x[:-1] if g == last else x + bytes((g,))
        yield from _extensions_nb(child, i - 1, d, g)


def sphere(x: Vertex, i: int, d: int) -> list[Vertex]:
    """All vertices at graph distance exactly ``i`` from ``x``, in walk order."""
    check_word(x, d)
    if i < 0:
        raise ValueError(f"radius must be >= 0, got {i}")
    if i == 0:
        return [x]
    return list(_extensions_nb(x, i, d, 0))


def ball(x: Vertex, radius: int, d: int) -> list[Vertex]:
    """All vertices within distance ``radius`` of ``x``, spheres in order."""
    out: list[Vertex] = []
    for i in range(radius + 1):
        out.extend(sphere(x, i, d))
    return out


def ball_words(d: int, radius: int) -> list[Vertex]:
    """Canonically ordered (depth, then lexicographic) ball around the root."""
    return sorted(ball(ROOT, radius, d), key=lambda w: (len(w), w))


def render_vertex(x: Vertex) -> str:
    """Dot notation used by the CSV/JSON emitters: root is ``"o"``."""
    if not x:
        return "o"
    return ".".join(str(g) for g in x)


def parse_vertex(s: str, d: int) -> Vertex:
    check_degree(d)
    if s == "o":
        return ROOT
    parts = s.split(".")
    try:
        letters = [int(p) for p in parts]
    except ValueError as exc:
        raise VertexFormatError(f"malformed vertex string {s!r}") from exc
    word = bytes(letters) if all(1 <= g <= d for g in letters) else None
    if word is None:
        raise VertexFormatError(f"vertex {s!r} has letters outside 1..{d}")
    check_word(word, d)
    return word
