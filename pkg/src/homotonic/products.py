"""Bilinear products on finite carriers and the algebras they define.

Every product is an immutable descriptor that is called like a function,
``prod(f, g)``.  Concrete kinds:

* :class:`Pointwise` -- ``(f*g)(t) = f(t) g(t)``
* :class:`MatrixProduct` -- ordinary matrix product on a row-major n x n grid
* :class:`Jordan` -- symmetrised product ``(b(f,g) + b(g,f)) / 2`` of a base
* :class:`Convolution` -- periodic convolution ``kappa * int_0^p f(t-x) g(x) dx``
  discretised by the left-endpoint rectangle rule with wraparound
* :class:`TensorProduct` -- arbitrary structure constants ``c[u, s, v]``
* :class:`Dilation` -- ``(f*g)(t) = f(t) g(t) / t`` on functions ``f(t) = alpha t``,
  held by the coefficient ``alpha`` alone
* :class:`Plane` -- ``(a, b)(c, d) = (ac - bd, ad + bc)`` on R^2
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from typing import Callable, Optional

import numpy as np

from homotonic.core import (
    DEFAULT_TOL,
    Carrier,
    CarrierMismatchError,
    Element,
)

REAL = "real"
COMPLEX = "complex"


class Product:
    """Base class for bilinear products; subclasses implement ``_mul`` on arrays."""

    commutative = False

    @property
    def carrier(self) -> Carrier:
        raise NotImplementedError

    def _mul(self, a: np.ndarray, b: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def _mul_batch(self, A: np.ndarray, B: np.ndarray) -> np.ndarray:
        """Row-wise product of two ``(N, m)`` stacks."""
        return np.stack([self._mul(a, b) for a, b in zip(A, B)])

    def __call__(self, f: Element, g: Element) -> Element:
        return multiply(self, f, g)

    def to_json(self) -> dict:
        raise NotImplementedError

    def structure_tensor(self) -> np.ndarray:
        """Coefficients ``c[u, s, v] = (e_s * e_v)(u)`` in the indicator basis."""
        m = self.carrier.size
        eye = np.eye(m)
        c = None
        for s in range(m):
            for v in range(m):
                col = self._mul(eye[s], eye[v])
                if c is None:
                    c = np.zeros((m, m, m), dtype=col.dtype)
                c[:, s, v] = col
        return c

    def structure_min(self) -> tuple[float, tuple[int, int, int]]:
        """Smallest real structure constant and its ``(u, s, v)`` position.

        For complex constants the value reported is the worst of
        ``Re c`` and ``-|Im c|`` so that any non-real coefficient counts as a
        violation of nonnegativity.
        """
        c = self.structure_tensor()
        score = np.minimum(c.real, -np.abs(c.imag)) if np.iscomplexobj(c) else c
        pos = np.unravel_index(int(np.argmin(score)), score.shape)
        return float(score[pos]), tuple(int(i) for i in pos)


def multiply(prod: Product, f: Element, g: Element) -> Element:
    """``prod(f, g)`` with carrier validation."""
    if f.carrier != prod.carrier or g.carrier != prod.carrier:
        raise CarrierMismatchError(
            f"{type(prod).__name__} acts on {prod.carrier}, got {f.carrier} and {g.carrier}"
        )
    return Element(prod.carrier, prod._mul(f.values, g.values))


@dataclass(frozen=True)
class Pointwise(Product):
    size: int
    commutative = True

    @property
    def carrier(self):
        return Carrier.plain(self.size)

    def _mul(self, a, b):
        return a * b

    _mul_batch = _mul

    def structure_tensor(self):
        c = np.zeros((self.size,) * 3)
        i = np.arange(self.size)
        c[i, i, i] = 1.0
        return c

    def to_json(self):
        return {"kind": "pointwise", "size": self.size}


@dataclass(frozen=True)
class MatrixProduct(Product):
    n: int

    @property
    def carrier(self):
        return Carrier.matrix(self.n)

    def _mul(self, a, b):
        n = self.n
        return (a.reshape(n, n) @ b.reshape(n, n)).reshape(-1)

    def _mul_batch(self, A, B):
        n = self.n
        return (A.reshape(-1, n, n) @ B.reshape(-1, n, n)).reshape(len(A), n * n)

    def structure_tensor(self):
        # E_{jl} E_{lk} = E_{jk}
        n = self.n
        c = np.zeros((n * n,) * 3)
        for j in range(n):
            for l in range(n):
                for k in range(n):
                    c[j * n + k, j * n + l, l * n + k] = 1.0
        return c

    def structure_min(self):
        if self.n == 1:
            return 1.0, (0, 0, 0)
        # position of a zero: E_11 * E_11 has no (1,2) component
        return 0.0, (1, 0, 0)

    def to_json(self):
        return {"kind": "matrix", "n": self.n}


@dataclass(frozen=True)
class Jordan(Product):
    base: Product
    commutative = True

    @property
    def carrier(self):
        return self.base.carrier

    def _mul(self, a, b):
        return 0.5 * (self.base._mul(a, b) + self.base._mul(b, a))

    def _mul_batch(self, A, B):
        return 0.5 * (self.base._mul_batch(A, B) + self.base._mul_batch(B, A))

    def structure_tensor(self):
        c = self.base.structure_tensor()
        return 0.5 * (c + c.swapaxes(1, 2))

    def structure_min(self):
        if self.base.commutative:
            return self.base.structure_min()
        return super().structure_min()

    def to_json(self):
        return {"kind": "jordan", "base": self.base.to_json()}


def jordanize(base: Product) -> Jordan:
    """Replace ``base`` by its Jordan product ``(f*g + g*f) / 2``."""
    return Jordan(base)


@dataclass(frozen=True, eq=False)
class Convolution(Product):
    """Rectangle-rule periodic convolution on ``grid`` nodes of ``[0, p)``.

    ``(f*g)(t_i) = kappa * h * sum_j f(t_{(i-j) mod n}) g(t_j)`` with
    ``h = p / n``.  All nonzero structure constants equal ``kappa * h``.
    """

    kappa: float
    p: float
    grid: int
    commutative = True

    def __post_init__(self):
        if not (self.kappa > 0 and self.p > 0 and self.grid >= 1):
            raise ValueError("convolution needs kappa > 0, p > 0 and grid >= 1")

    @property
    def carrier(self):
        return Carrier.periodic(self.p, self.grid)

    @cached_property
    def _wrap(self) -> np.ndarray:
        i = np.arange(self.grid)
        return (i[:, None] - i[None, :]) % self.grid

    @property
    def weight(self) -> float:
        return self.kappa * (self.p / self.grid)

    def _mul(self, a, b):
        return self.weight * (a[self._wrap] @ b)

    def _mul_batch(self, A, B):
        out = np.empty(np.broadcast_shapes(A.shape, B.shape), dtype=np.result_type(A, B))
        step = max(1, 2**22 // (self.grid * self.grid))
        for i in range(0, len(A), step):
            a, b = A[i:i + step], B[i:i + step]
            out[i:i + step] = self.weight * (a[:, self._wrap] @ b[:, :, None])[:, :, 0]
        return out

    def structure_tensor(self):
        n = self.grid
        c = np.zeros((n, n, n))
        s, v = np.meshgrid(np.arange(n), np.arange(n), indexing="ij")
        c[(s + v) % n, s, v] = self.weight
        return c

    def structure_min(self):
        if self.grid == 1:
            return self.weight, (0, 0, 0)
        return 0.0, (1, 0, 0)

    def __eq__(self, other):
        return isinstance(other, Convolution) and (self.kappa, self.p, self.grid) == (
            other.kappa, other.p, other.grid)

    def __hash__(self):
        return hash((self.kappa, self.p, self.grid))

    def to_json(self):
        return {"kind": "convolution", "kappa": self.kappa, "p": self.p, "grid": self.grid}


@dataclass(frozen=True, eq=False)
class TensorProduct(Product):
    c: np.ndarray

    def __post_init__(self):
        c = np.array(self.c)
        c = c.astype(np.complex128 if np.iscomplexobj(c) else np.float64)
        if c.ndim != 3 or not (c.shape[0] == c.shape[1] == c.shape[2]) or c.shape[0] < 1:
            raise ValueError(f"structure tensor must have shape (m, m, m), got {c.shape}")
        if not np.all(np.isfinite(c)):
            raise ValueError("structure constants must be finite")
        c.flags.writeable = False
        object.__setattr__(self, "c", c)

    @property
    def size(self) -> int:
        return self.c.shape[0]

    @property
    def carrier(self):
        return Carrier.plain(self.size)

    def _mul(self, a, b):
        return np.einsum("usv,s,v->u", self.c, a, b)

    def _mul_batch(self, A, B):
        return np.einsum("usv,ns,nv->nu", self.c, A, B)

    def structure_tensor(self):
        return self.c

    def with_entry(self, pos: tuple[int, int, int], value) -> "TensorProduct":
        c = np.array(self.c)
        c[pos] = value
        return TensorProduct(c)

    def __eq__(self, other):
        return isinstance(other, TensorProduct) and np.array_equal(self.c, other.c)

    def __hash__(self):
        return hash(self.c.tobytes())

    def to_json(self):
        if np.iscomplexobj(self.c):
            data = np.stack([self.c.real, self.c.imag], axis=-1).tolist()
        else:
            data = self.c.tolist()
        return {"kind": "tensor", "size": self.size, "c": data}


@dataclass(frozen=True)
class Dilation(Product):
    """Functions ``f(t) = alpha t`` on ``(0, inf)`` with ``(f*g)(t) = f(t) g(t) / t``.

    The carrier holds the single coefficient ``alpha``; the product of
    ``alpha t`` and ``beta t`` is ``alpha beta t`` exactly.  Since ``t > 0``,
    sign, modulus and order of a member coincide with those of its
    coefficient.
    """

    commutative = True

    @property
    def carrier(self):
        return Carrier.plain(1)

    def _mul(self, a, b):
        return a * b

    _mul_batch = _mul

    def structure_min(self):
        return 1.0, (0, 0, 0)

    def to_json(self):
        return {"kind": "dilation"}


@dataclass(frozen=True)
class Plane(Product):
    """R^2 with ``(a, b) x (c, d) = (ac - bd, ad + bc)``, a copy of C over R."""

    commutative = True

    @property
    def carrier(self):
        return Carrier.plain(2)

    def _mul(self, x, y):
        a, b = x
        c, d = y
        return np.array([a * c - b * d, a * d + b * c])

    def _mul_batch(self, X, Y):
        a, b = X[:, 0], X[:, 1]
        c, d = Y[:, 0], Y[:, 1]
        return np.stack([a * c - b * d, a * d + b * c], axis=1)

    def to_json(self):
        return {"kind": "plane"}


def structure_tensor(prod: Product) -> np.ndarray:
    return prod.structure_tensor()


def membership_A2(f: Element, tol: float = DEFAULT_TOL) -> bool:
    """Whether a real 2x2 matrix has the form ``[[a, b], [-b, a]]``."""
    if f.carrier != Carrier.matrix(2):
        raise CarrierMismatchError("A2 membership is defined on 2x2 matrices")
    if f.is_complex:
        raise CarrierMismatchError("A2 is a real algebra")
    (a, b), (c, d) = f.as_matrix()
    slack = tol * max(1.0, f.sup())
    return abs(a - d) <= slack and abs(b + c) <= slack


@dataclass(frozen=True, eq=False)
class AlgebraSpec:
    """An algebra of functions: a product together with the set of members.

    ``full`` algebras contain every function on the carrier (so indicator
    functions are members and the structure tensor is meaningful).
    Otherwise ``basis`` spans the members and ``member`` decides membership;
    a non-full algebra without a basis (the dilation algebra) is full over
    its coefficient carrier but has no indicator-basis interpretation on
    the underlying set.
    """

    product: Product
    field: str = REAL
    full: bool = True
    basis: Optional[tuple[Element, ...]] = None
    member: Optional[Callable[[Element], bool]] = None
    name: str = ""

    def __post_init__(self):
        if self.field not in (REAL, COMPLEX):
            raise ValueError(f"field must be 'real' or 'complex', got {self.field!r}")
        if self.field == REAL and isinstance(self.product, TensorProduct) and np.iscomplexobj(
                self.product.c):
            raise ValueError("a real algebra needs real structure constants")
        if self.full and (self.basis is not None or isinstance(self.product, Dilation)):
            raise ValueError("full algebras have no basis restriction")
        if not self.name:
            object.__setattr__(self, "name", self.product.to_json()["kind"])

    @property
    def carrier(self) -> Carrier:
        return self.product.carrier

    @property
    def is_complex(self) -> bool:
        return self.field == COMPLEX

    def contains(self, f: Element) -> bool:
        if f.carrier != self.carrier:
            return False
        if f.is_complex and not self.is_complex and np.any(f.values.imag != 0):
            return False
        if self.member is not None:
            return bool(self.member(f))
        if self.basis is not None:
            return membership_residual(self, f)[1] <= DEFAULT_TOL * max(1.0, f.sup())
        return True

    def random_batch(self, rng: np.random.Generator, count: int,
                     nonnegative: bool = False) -> tuple[np.ndarray, np.ndarray]:
        """Draw ``count`` members as rows of an array, plus a validity mask.

        Components are uniform on [-1, 1], or on [0, 1] when ``nonnegative``;
        complex algebras draw real and imaginary parts independently.  A
        basis-restricted algebra draws basis coefficients instead, and its
        nonnegative draws are ``|f|`` for a random member ``f``, valid only
        where ``|f|`` is itself a member.
        """
        if self.basis is not None:
            k = len(self.basis)
            coef = rng.uniform(-1.0, 1.0, (count, k))
            if self.is_complex:
                coef = coef + 1j * rng.uniform(-1.0, 1.0, (count, k))
            rows = coef @ np.stack([b.values for b in self.basis])
            if not nonnegative:
                return rows, np.ones(count, dtype=bool)
            rows = np.abs(rows)
            valid = np.array([self.contains(Element(self.carrier, r)) for r in rows], dtype=bool)
            return rows, valid
        m = self.carrier.size
        if nonnegative:
            return rng.uniform(0.0, 1.0, (count, m)), np.ones(count, dtype=bool)
        rows = rng.uniform(-1.0, 1.0, (count, m))
        if self.is_complex:
            rows = rows + 1j * rng.uniform(-1.0, 1.0, (count, m))
        return rows, np.ones(count, dtype=bool)

    def contains_batch(self, rows: np.ndarray) -> np.ndarray:
        if self.basis is None and self.member is None:
            return np.ones(len(rows), dtype=bool)
        return np.array([self.contains(Element(self.carrier, r)) for r in rows], dtype=bool)

    def probes(self) -> list[Element]:
        """Deterministic members used before random draws by the sampled checks.

        Indicators for full algebras, the basis for restricted ones.  Empty
        when the carrier is too large for an all-pairs sweep.
        """
        if self.basis is not None:
            return list(self.basis)
        if self.carrier.size > MAX_PROBE_SIZE:
            return []
        eye = np.eye(self.carrier.size)
        return [Element(self.carrier, row) for row in eye]

    def to_json(self) -> dict:
        if self.name == "A2":
            out = {"kind": "A2"}
        elif self.name == "A2-diagonal":
            out = {"kind": "A2", "diagonal": True}
        else:
            out = dict(self.product.to_json())
        if self.is_complex:
            out["field"] = COMPLEX
        return out


MAX_PROBE_SIZE = 64


def membership_residual(alg: AlgebraSpec, f: Element) -> tuple[int, float]:
    """Distance of ``f`` from the span of ``alg.basis``: worst index and size."""
    B = np.stack([b.values for b in alg.basis], axis=1)
    coef, *_ = np.linalg.lstsq(B, f.values, rcond=None)
    resid = np.abs(f.values - B @ coef)
    i = int(np.argmax(resid))
    return i, float(resid[i])


def algebra(product: Product, field: str = REAL) -> AlgebraSpec:
    """The full algebra of all functions on ``product.carrier``."""
    if isinstance(product, Dilation):
        return dilation_algebra()
    return AlgebraSpec(product, field=field)


def dilation_algebra() -> AlgebraSpec:
    return AlgebraSpec(Dilation(), full=False, name="dilation")


def a2_algebra(diagonal_only: bool = False) -> AlgebraSpec:
    """``{[[a, b], [-b, a]]}`` inside the real 2x2 matrices.

    With ``diagonal_only`` the span is restricted to ``b = 0``.
    """
    carrier = Carrier.matrix(2)
    basis = [Element(carrier, [1.0, 0.0, 0.0, 1.0])]
    if not diagonal_only:
        basis.append(Element(carrier, [0.0, 1.0, -1.0, 0.0]))
    return AlgebraSpec(
        MatrixProduct(2),
        full=False,
        basis=tuple(basis),
        member=membership_A2,
        name="A2-diagonal" if diagonal_only else "A2",
    )


def product_from_json(obj: dict) -> Product:
    if not isinstance(obj, dict) or "kind" not in obj:
        raise ValueError("product description must be an object with a 'kind'")
    kind = obj["kind"]
    if kind == "pointwise":
        return Pointwise(_positive_int(obj, "size"))
    if kind == "matrix":
        return MatrixProduct(_positive_int(obj, "n"))
    if kind == "jordan":
        return Jordan(product_from_json(obj["base"]))
    if kind == "convolution":
        return Convolution(float(obj["kappa"]), float(obj["p"]), _positive_int(obj, "grid"))
    if kind == "tensor":
        c = np.asarray(obj["c"], dtype=float)
        if c.ndim == 4 and c.shape[-1] == 2:
            c = c[..., 0] + 1j * c[..., 1]
        prod = TensorProduct(c)
        if "size" in obj and int(obj["size"]) != prod.size:
            raise ValueError(f"tensor size {obj['size']} does not match c of size {prod.size}")
        return prod
    if kind == "dilation":
        return Dilation()
    if kind == "plane":
        return Plane()
    raise ValueError(f"unknown product kind {kind!r}")


def algebra_from_json(obj: dict) -> AlgebraSpec:
    """Parse an algebra file: a product description plus optional ``"field"``.

    ``{"kind": "A2"}`` (optionally ``"diagonal": true``) selects the
    restricted algebra of matrices ``[[a, b], [-b, a]]``.
    """
    if not isinstance(obj, dict):
        raise ValueError("algebra description must be a JSON object")
    field_ = obj.get("field", REAL)
    if obj.get("kind") == "A2":
        if field_ != REAL:
            raise ValueError("A2 is a real algebra")
        return a2_algebra(bool(obj.get("diagonal", False)))
    prod = product_from_json(obj)
    if isinstance(prod, (Dilation, Plane)) and field_ != REAL:
        raise ValueError(f"{obj['kind']} is a real algebra")
    return algebra(prod, field_)


def _positive_int(obj: dict, key: str) -> int:
    val = obj[key]
    if isinstance(val, bool) or int(val) != val or int(val) < 1:
        raise ValueError(f"{key!r} must be a positive integer, got {val!r}")
    return int(val)
