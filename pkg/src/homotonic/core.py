"""Carriers, elements and the pointwise structure shared by every algebra.

An :class:`Element` is a function on a finite carrier, stored as a read-only
numpy vector.  Real algebras use ``float64`` values, complex algebras use
``complex128``.  Addition, scaling, absolute value and order are pointwise;
multiplication is supplied separately by a product from
:mod:`homotonic.products`.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import TYPE_CHECKING, Iterable, Iterator, Sequence

import numpy as np

if TYPE_CHECKING:
    from homotonic.products import Product

DEFAULT_TOL = 1e-9

# rows per random block; see sample_blocks
BLOCK = 256

PLAIN = "plain"
MATRIX = "matrix-grid"
PERIODIC = "periodic-grid"


class CarrierMismatchError(ValueError):
    """Two operands live on different carriers."""


class OrderError(TypeError):
    """An order comparison was requested on complex-valued data."""


@dataclass(frozen=True)
class Carrier:
    """Finite index set on which algebra members are defined.

    ``kind`` is one of ``"plain"``, ``"matrix-grid"`` (``size == n**2``,
    row-major ``(j, k)`` indexing) or ``"periodic-grid"`` (``n`` equispaced
    nodes on ``[0, period)``).
    """

    kind: str
    size: int
    n: int | None = None
    period: float | None = None

    def __post_init__(self):
        if self.size < 1:
            raise ValueError(f"carrier size must be positive, got {self.size}")
        if self.kind == MATRIX:
            if self.n is None or self.n * self.n != self.size:
                raise ValueError("matrix-grid carrier needs size == n**2")
        elif self.kind == PERIODIC:
            if self.n != self.size:
                raise ValueError("periodic-grid carrier needs size == n")
            if self.period is None or not (self.period > 0 and np.isfinite(self.period)):
                raise ValueError("periodic-grid carrier needs a positive finite period")
        elif self.kind != PLAIN:
            raise ValueError(f"unknown carrier kind {self.kind!r}")

    @classmethod
    def plain(cls, size: int) -> "Carrier":
        return cls(PLAIN, int(size))

    @classmethod
    def matrix(cls, n: int) -> "Carrier":
        return cls(MATRIX, int(n) * int(n), n=int(n))

    @classmethod
    def periodic(cls, period: float, n: int) -> "Carrier":
        return cls(PERIODIC, int(n), n=int(n), period=float(period))

    @property
    def spacing(self) -> float:
        if self.kind != PERIODIC:
            raise AttributeError("only periodic-grid carriers have a spacing")
        return self.period / self.n

    def nodes(self) -> np.ndarray:
        """Grid abscissae ``t_i = i*h`` of a periodic carrier."""
        return np.arange(self.n) * self.spacing

    def label(self, index: int) -> str:
        """Human-readable name of a carrier point (1-based ``(j,k)`` for matrices)."""
        if self.kind == MATRIX:
            j, k = divmod(int(index), self.n)
            return f"({j + 1},{k + 1})"
        return str(int(index))


class Element:
    """A scalar-valued function on a :class:`Carrier`.

    Values are copied into a read-only array on construction; NaN and
    infinities are rejected.
    """

    __slots__ = ("carrier", "values")

    def __init__(self, carrier: Carrier, values):
        arr = np.array(values)
        if arr.dtype.kind == "c":
            arr = arr.astype(np.complex128)
        else:
            arr = arr.astype(np.float64)
        arr = arr.reshape(-1)
        if arr.shape[0] != carrier.size:
            raise ValueError(f"expected {carrier.size} values, got {arr.shape[0]}")
        if not np.all(np.isfinite(arr)):
            raise ValueError("element values must be finite")
        arr.flags.writeable = False
        object.__setattr__(self, "carrier", carrier)
        object.__setattr__(self, "values", arr)

    def __setattr__(self, name, value):
        raise AttributeError("Element is immutable")

    @property
    def is_complex(self) -> bool:
        return self.values.dtype.kind == "c"

    @property
    def size(self) -> int:
        return self.carrier.size

    def as_matrix(self) -> np.ndarray:
        if self.carrier.kind != MATRIX:
            raise CarrierMismatchError("element does not live on a matrix grid")
        return self.values.reshape(self.carrier.n, self.carrier.n)

    def sup(self) -> float:
        """Plain sup norm ``max_t |f(t)|``."""
        return float(np.max(np.abs(self.values)))

    def __add__(self, other: "Element") -> "Element":
        return add(self, other)

    def __sub__(self, other: "Element") -> "Element":
        return add(self, scale(-1.0, other))

    def __neg__(self) -> "Element":
        return scale(-1.0, self)

    def __rmul__(self, alpha) -> "Element":
        return scale(alpha, self)

    def __abs__(self) -> "Element":
        return absolute(self)

    def __repr__(self):
        return f"Element({self.carrier.kind}[{self.size}], {self.values.tolist()!r})"

    def __eq__(self, other):
        if not isinstance(other, Element):
            return NotImplemented
        return self.carrier == other.carrier and np.array_equal(self.values, other.values)

    __hash__ = None


@dataclass(frozen=True)
class OrderResult:
    """Outcome of ``f <= g``; truthy when the inequality holds everywhere."""

    holds: bool
    index: int
    violation: float

    def __bool__(self):
        return self.holds


def _same_carrier(f: Element, g: Element) -> None:
    if f.carrier != g.carrier:
        raise CarrierMismatchError(f"carrier mismatch: {f.carrier} vs {g.carrier}")


def element(carrier: Carrier, values) -> Element:
    return Element(carrier, values)


def zeros(carrier: Carrier, complex_: bool = False) -> Element:
    return Element(carrier, np.zeros(carrier.size, dtype=complex if complex_ else float))


def indicator(carrier: Carrier, index: int, complex_: bool = False) -> Element:
    """The function equal to 1 at ``index`` and 0 elsewhere."""
    v = np.zeros(carrier.size, dtype=complex if complex_ else float)
    v[index] = 1.0
    return Element(carrier, v)


def add(f: Element, g: Element) -> Element:
    _same_carrier(f, g)
    return Element(f.carrier, f.values + g.values)


def scale(alpha, f: Element) -> Element:
    return Element(f.carrier, alpha * f.values)


def absolute(f: Element) -> Element:
    """Pointwise modulus; always real-valued, even inside a complex algebra."""
    return Element(f.carrier, np.abs(f.values))


def _require_real(*fs: Element) -> None:
    for f in fs:
        if f.is_complex:
            raise OrderError("order is only defined for real-valued elements")


def leq(f: Element, g: Element, tol: float = DEFAULT_TOL) -> OrderResult:
    """Test ``f(t) <= g(t)`` for every carrier point.

    The comparison allows a slack of ``tol * max(1, |f|_inf, |g|_inf)``.
    On failure the result carries the point with the largest ``f - g`` and
    that excess.
    """
    _require_real(f, g)
    _same_carrier(f, g)
    diff = f.values - g.values
    slack = tol * max(1.0, f.sup(), g.sup())
    worst = int(np.argmax(diff))
    excess = float(diff[worst])
    if excess <= slack:
        return OrderResult(True, -1, 0.0)
    return OrderResult(False, worst, excess)


def pos_part(u: Element) -> Element:
    _require_real(u)
    return Element(u.carrier, 0.5 * (np.abs(u.values) + u.values))


def neg_part(u: Element) -> Element:
    _require_real(u)
    return Element(u.carrier, 0.5 * (np.abs(u.values) - u.values))


def power(f: Element, k: int, prod: "Product") -> Element:
    """``f**k`` accumulated from the left: ``(((f*f)*f)...)*f``.

    Non-associative products make the bracketing matter; only this one is
    ever used.
    """
    if int(k) != k or k < 1:
        raise ValueError(f"powers are defined for k >= 1, got {k}")
    result = f
    for _ in range(int(k) - 1):
        result = prod(result, f)
    return result


def element_to_json(f: Element) -> list:
    if f.is_complex:
        return [[float(z.real), float(z.imag)] for z in f.values]
    return [float(x) for x in f.values]


def element_from_json(carrier: Carrier, data: Sequence) -> Element:
    """Inverse of :func:`element_to_json`; ``[re, im]`` pairs mean a complex element."""
    if len(data) and isinstance(data[0], (list, tuple)):
        pairs = np.asarray(data, dtype=float)
        if pairs.ndim != 2 or pairs.shape[1] != 2:
            raise ValueError("complex element entries must be [re, im] pairs")
        return Element(carrier, pairs[:, 0] + 1j * pairs[:, 1])
    return Element(carrier, np.asarray(data, dtype=float))


def sample_rng(seed: int, index: int, stream: Iterable[int] = ()) -> np.random.Generator:
    """Independent generator for sample ``index`` under ``seed``.

    Every draw is derived from ``(seed, *stream, index)`` alone, so samples can
    be evaluated in any order or in parallel and still reproduce.
    """
    key = tuple(int(s) for s in stream) + (int(index),)
    return np.random.default_rng(np.random.SeedSequence(int(seed), spawn_key=key))


def sample_blocks(samples: int) -> Iterator[tuple[int, int, int]]:
    """Split ``samples`` draws into ``(block, first sample, rows used)``.

    Block ``b`` always draws ``BLOCK`` rows from ``sample_rng(seed, b, ...)``;
    sample ``i`` is row ``i % BLOCK`` of block ``i // BLOCK`` regardless of
    how many samples are requested.
    """
    for b in range((samples + BLOCK - 1) // BLOCK):
        yield b, b * BLOCK, min(BLOCK, samples - b * BLOCK)
