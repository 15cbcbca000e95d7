"""Numerical radius of complex square matrices.

``r(A) = max |<Ax, x>|`` over unit vectors is a norm on matrices that is
strongly stable, ``r(A^k) <= r(A)^k`` (Berger's inequality), yet is not
sub-multiplicative.  This module computes it and exhibits both facts.

The radius is evaluated via the rotated Hermitian part,

    r(A) = max_theta lambda_max((e^{i theta} A + e^{-i theta} A^*) / 2),

on a uniform grid of angles followed by golden-section refinement around
the best grid angle.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

_GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0


def as_square_matrix(A) -> np.ndarray:
    M = np.array(A, dtype=np.complex128)
    if M.ndim != 2 or M.shape[0] != M.shape[1] or M.shape[0] < 1:
        raise ValueError(f"expected a non-empty square matrix, got shape {M.shape}")
    if not np.all(np.isfinite(M)):
        raise ValueError("matrix entries must be finite")
    return M


def matrix_from_json(obj: dict) -> np.ndarray:
    """``{"n": n, "entries": [[re, im], ...]}`` in row-major order."""
    n = int(obj["n"])
    pairs = np.asarray(obj["entries"], dtype=float)
    if pairs.shape != (n * n, 2):
        raise ValueError(f"expected {n * n} [re, im] entries, got shape {pairs.shape}")
    return as_square_matrix((pairs[:, 0] + 1j * pairs[:, 1]).reshape(n, n))


def matrix_to_json(A) -> dict:
    M = as_square_matrix(A)
    flat = M.reshape(-1)
    return {"n": M.shape[0], "entries": [[float(z.real), float(z.imag)] for z in flat]}


def _rotated_lambda_max(A: np.ndarray, thetas: np.ndarray) -> np.ndarray:
    rot = np.exp(1j * np.asarray(thetas))[:, None, None] * A
    H = 0.5 * (rot + np.conj(rot.transpose(0, 2, 1)))
    return np.linalg.eigvalsh(H)[:, -1]


def numerical_radius(A, grid: int = 256, refine: int = 40) -> float:
    """``max |<Ax, x>|`` over unit ``x`` (standard inner product)."""
    if grid < 16:
        raise ValueError("angular grid needs at least 16 points")
    M = as_square_matrix(A)
    thetas = 2.0 * math.pi * np.arange(grid) / grid
    values = _rotated_lambda_max(M, thetas)
    k = int(np.argmax(values))
    best = float(values[k])
    step = 2.0 * math.pi / grid
    lo, hi = thetas[k] - step, thetas[k] + step

    def f(t):
        return float(_rotated_lambda_max(M, np.array([t]))[0])

    x1 = hi - _GOLDEN * (hi - lo)
    x2 = lo + _GOLDEN * (hi - lo)
    f1, f2 = f(x1), f(x2)
    for _ in range(refine):
        if f1 >= f2:
            hi, x2, f2 = x2, x1, f1
            x1 = hi - _GOLDEN * (hi - lo)
            f1 = f(x1)
        else:
            lo, x1, f1 = x1, x2, f2
            x2 = lo + _GOLDEN * (hi - lo)
            f2 = f(x2)
        best = max(best, f1, f2)
    return max(best, 0.0)


def sampled_radius(A, samples: int, rng: np.random.Generator) -> float:
    """Lower bound ``max |<Ax, x>|`` over random unit vectors."""
    M = as_square_matrix(A)
    n = M.shape[0]
    X = rng.standard_normal((samples, n)) + 1j * rng.standard_normal((samples, n))
    X /= np.linalg.norm(X, axis=1, keepdims=True)
    vals = np.einsum("si,ij,sj->s", np.conj(X), M, X)
    return float(np.max(np.abs(vals)))


class RadiusWitness(NamedTuple):
    A: np.ndarray
    B: np.ndarray
    r_A: float
    r_B: float
    r_AB: float


def radius_submult_witness() -> RadiusWitness:
    """Two nilpotent 2x2 matrices with ``r(AB) = 1 > 1/4 = r(A) r(B)``."""
    A = np.array([[0, 1], [0, 0]], dtype=complex)
    B = np.array([[0, 0], [1, 0]], dtype=complex)
    w = RadiusWitness(A, B, numerical_radius(A), numerical_radius(B), numerical_radius(A @ B))
    assert abs(w.r_A - 0.5) <= 1e-6 and abs(w.r_B - 0.5) <= 1e-6
    assert abs(w.r_AB - 1.0) <= 1e-6
    assert w.r_AB > w.r_A * w.r_B
    return w


@dataclass(frozen=True)
class BergerReport:
    radius: float
    powers: tuple[float, ...]  # r(A^k) for k = 2..K
    ratios: tuple[float, ...]
    holds: bool
    tol: float

    @property
    def worst_ratio(self) -> float:
        return max(self.ratios)

    def to_json(self) -> dict:
        return {"radius": self.radius, "power_radii": list(self.powers),
                "ratios": list(self.ratios), "worst_ratio": self.worst_ratio,
                "holds": self.holds, "tol": self.tol}


def berger_check(A, max_power: int = 5, tol: float = 1e-8) -> BergerReport:
    """Check ``r(A^k) <= r(A)^k (1 + tol)`` for ``k = 2..max_power``.

    Ratios are ``r(A^k) / r(A)^k``, taken as 0 when ``A = 0``.
    """
    if max_power < 2:
        raise ValueError("max_power must be at least 2")
    M = as_square_matrix(A)
    r = numerical_radius(M)
    powers, ratios = [], []
    P = M
    ok = True
    for k in range(2, max_power + 1):
        P = P @ M
        rk = numerical_radius(P)
        bound = r ** k
        powers.append(rk)
        ratios.append(rk / bound if bound > 0 else 0.0)
        ok &= rk <= bound * (1 + tol)
    return BergerReport(r, tuple(powers), tuple(ratios), bool(ok), tol)
