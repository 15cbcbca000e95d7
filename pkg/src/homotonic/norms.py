"""Weighted sup norms and the sub-multiplicativity certificate.

For a positive weight ``w`` with reciprocal ``winv = 1/w`` in a homotonic
algebra, ``||f||_w = max_t w(t)|f(t)|`` is sub-multiplicative, and also
strongly stable, exactly when ``winv * winv <= winv``.  :func:`certify`
evaluates that inequality.  When it fails, the pair ``(winv, winv)`` is
returned as a concrete counterexample.  The samplers here check the same
conclusions by brute force.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from homotonic.core import (
    BLOCK,
    DEFAULT_TOL,
    Carrier,
    CarrierMismatchError,
    Element,
    element_to_json,
    sample_blocks,
    sample_rng,
)
from homotonic.homotonicity import known_non_homotonic
from homotonic.products import AlgebraSpec, Dilation

CERTIFIED = "certified"
REFUTED = "refuted"

STREAM_LAMBDA = 11
STREAM_POWERS = 12


class NotHomotonicError(ValueError):
    """The algebra is known not to be homotonic, so the criterion is not decisive."""


@dataclass(frozen=True, eq=False)
class Weight:
    """Strictly positive weight on a carrier.

    ``Weight.dilation(nu)`` is the weight ``nu / t`` on ``(0, inf)``; it
    lives on the one-point coefficient carrier of the dilation algebra,
    where ``w(t)|alpha t| = nu |alpha|`` holds identically in ``t``.
    """

    carrier: Carrier
    values: np.ndarray
    dilation_form: bool = False

    def __post_init__(self):
        vals = np.array(self.values, dtype=float).reshape(-1)
        if vals.shape[0] != self.carrier.size:
            raise ValueError(f"weight needs {self.carrier.size} values, got {vals.shape[0]}")
        if not np.all(np.isfinite(vals)) or np.any(vals <= 0):
            raise ValueError("weights must be positive and finite")
        vals.flags.writeable = False
        object.__setattr__(self, "values", vals)

    @classmethod
    def uniform(cls, carrier: Carrier, mu: float) -> "Weight":
        return cls(carrier, np.full(carrier.size, float(mu)))

    @classmethod
    def dilation(cls, nu: float) -> "Weight":
        return cls(Carrier.plain(1), [float(nu)], dilation_form=True)

    @property
    def nu(self) -> float:
        if not self.dilation_form:
            raise AttributeError("only dilation weights have a nu parameter")
        return float(self.values[0])

    def scaled(self, mu: float) -> "Weight":
        return Weight(self.carrier, mu * self.values, self.dilation_form)

    def to_json(self):
        if self.dilation_form:
            return {"dilation_nu": self.nu}
        return [float(x) for x in self.values]


def weight_from_json(data, carrier: Carrier) -> Weight:
    """Parse ``[w_1, ...]``, ``{"uniform": mu}`` or ``{"dilation_nu": nu}``."""
    if isinstance(data, dict):
        if "uniform" in data:
            return Weight.uniform(carrier, float(data["uniform"]))
        if "dilation_nu" in data:
            return Weight.dilation(float(data["dilation_nu"]))
        raise ValueError("weight object needs 'uniform' or 'dilation_nu'")
    if isinstance(data, list):
        return Weight(carrier, np.asarray(data, dtype=float))
    raise ValueError("weight must be a list of positives or an object")


def _check_weight(alg: AlgebraSpec, w: Weight) -> None:
    dil = isinstance(alg.product, Dilation)
    if dil != w.dilation_form:
        raise CarrierMismatchError(
            "the dilation algebra takes exactly the weights nu/t" if dil
            else "dilation weights only apply to the dilation algebra")
    if w.carrier != alg.carrier:
        raise CarrierMismatchError(f"weight on {w.carrier}, algebra on {alg.carrier}")


def weighted_sup_norm(w: Weight, f: Element) -> float:
    """``max_t w(t)|f(t)|``; for a dilation weight this is ``nu |alpha|``."""
    if f.carrier != w.carrier:
        raise CarrierMismatchError(f"weight on {w.carrier}, element on {f.carrier}")
    return float(np.max(w.values * np.abs(f.values)))


def hadamard_inverse(w: Weight) -> Element:
    """The reciprocal ``1/w`` as a member of the algebra."""
    return Element(w.carrier, 1.0 / w.values)


def _norms(w: Weight, rows: np.ndarray) -> np.ndarray:
    return np.max(w.values * np.abs(rows), axis=-1)


@dataclass(frozen=True)
class Certificate:
    verdict: str
    margin: float
    index: int
    tol: float
    scale: float
    witness: Optional[tuple[Element, Element]] = None
    norms: dict = field(default_factory=dict)
    forced: bool = False
    note: str = ""

    @property
    def certified(self) -> bool:
        return self.verdict == CERTIFIED

    def to_json(self) -> dict:
        out = {
            "verdict": self.verdict,
            "margin": self.margin,
            "worst_index": self.index,
            "tol": self.tol,
            "norms": self.norms,
        }
        if self.witness is not None:
            out["witness"] = [element_to_json(f) for f in self.witness]
        if self.forced:
            out["criterion_only"] = True
            out["note"] = self.note
        return out


def certify(alg: AlgebraSpec, w: Weight, tol: float = DEFAULT_TOL,
            force: bool = False) -> Certificate:
    """Decide sub-multiplicativity (equivalently strong stability) of ``||.||_w``.

    The margin is ``max_t (winv*winv - winv)(t)``, signed; the norm is
    certified when it does not exceed ``tol * max(1, |winv*winv|, |winv|)``.
    A refutation carries the witness pair ``(winv, winv)``, both of unit
    norm, whose product has norm above one.

    Raises :class:`NotHomotonicError` for algebras known not to be
    homotonic unless ``force`` is set; a forced result is marked as
    criterion-only.
    """
    _check_weight(alg, w)
    reason = known_non_homotonic(alg, tol)
    if reason and not force:
        raise NotHomotonicError(reason)
    winv = hadamard_inverse(w)
    s = alg.product(winv, winv)
    sv = s.values
    if np.iscomplexobj(sv):
        if np.max(np.abs(sv.imag)) > tol * max(1.0, s.sup()) and not force:
            raise NotHomotonicError("winv*winv is not real-valued")
        sv = sv.real
    diff = sv - winv.values
    index = int(np.argmax(diff))
    margin = float(diff[index])
    scale = max(1.0, s.sup(), winv.sup())
    norm_f = weighted_sup_norm(w, winv)
    norms = {"f": norm_f, "g": norm_f, "product": weighted_sup_norm(w, s)}
    note = f"criterion only, equivalence not guaranteed: {reason}" if reason else ""
    if margin <= tol * scale:
        return Certificate(CERTIFIED, margin, index, tol, scale, norms=norms,
                           forced=bool(reason), note=note)
    return Certificate(REFUTED, margin, index, tol, scale, witness=(winv, winv), norms=norms,
                       forced=bool(reason), note=note)


@dataclass(frozen=True)
class LambdaEstimate:
    """Largest ``||f*g||_w`` found over unit-norm pairs."""

    value: float
    f: Element
    g: Element
    source: str
    samples: int
    seed: int

    def to_json(self) -> dict:
        return {"lambda": self.value, "source": self.source, "samples": self.samples,
                "seed": self.seed, "f": element_to_json(self.f), "g": element_to_json(self.g)}


def sample_lambda(alg: AlgebraSpec, w: Weight, samples: int = 1000,
                  seed: int = 0) -> LambdaEstimate:
    """Estimate ``sup { ||f*g||_w : ||f||_w = ||g||_w = 1 }`` from below.

    The pair ``(winv, winv)`` is always evaluated first.  Random pairs are
    normalised to unit norm; draws of norm zero are skipped.
    """
    _check_weight(alg, w)
    winv = hadamard_inverse(w)
    best = weighted_sup_norm(w, alg.product(winv, winv))
    best_pair = (winv.values, winv.values)
    source = "winv"
    mul = alg.product._mul_batch
    for b, start, used in sample_blocks(samples):
        rng = sample_rng(seed, b, (STREAM_LAMBDA,))
        F, vf = alg.random_batch(rng, BLOCK)
        G, vg = alg.random_batch(rng, BLOCK)
        F, G = F[:used], G[:used]
        nf, ng = _norms(w, F), _norms(w, G)
        ok = vf[:used] & vg[:used] & (nf > 0) & (ng > 0)
        if not ok.any():
            continue
        F, G = F[ok] / nf[ok, None], G[ok] / ng[ok, None]
        vals = _norms(w, mul(F, G))
        i = int(np.argmax(vals))
        if vals[i] > best:
            best = float(vals[i])
            best_pair = (F[i], G[i])
            source = f"sample {start + int(np.flatnonzero(ok)[i])}"
    f, g = (Element(alg.carrier, v) for v in best_pair)
    return LambdaEstimate(best, f, g, source, samples, seed)


@dataclass(frozen=True)
class StabilityReport:
    """Outcome of testing ``||f^k||_w <= ||f||_w^k`` for ``k = 2..max_power``."""

    holds: bool
    worst_ratio: float
    worst_power: int
    violator: Optional[Element]
    violator_power: Optional[int]
    violator_ratio: Optional[float]
    source: str
    samples: int
    max_power: int
    seed: int

    def to_json(self) -> dict:
        out = {"holds": self.holds, "worst_ratio": self.worst_ratio,
               "worst_power": self.worst_power, "samples": self.samples,
               "max_power": self.max_power, "seed": self.seed}
        if self.violator is not None:
            out.update(violator=element_to_json(self.violator), power=self.violator_power,
                       ratio=self.violator_ratio, source=self.source)
        return out


def _power_ratios(alg: AlgebraSpec, w: Weight, F: np.ndarray, max_power: int) -> np.ndarray:
    """``||f^k|| / ||f||^k`` for every row, ``k = 2..max_power`` (columns)."""
    mul = alg.product._mul_batch
    base = _norms(w, F)
    P = F
    out = np.empty((len(F), max_power - 1))
    for k in range(2, max_power + 1):
        P = mul(P, F)
        out[:, k - 2] = _norms(w, P) / base ** k
    return out


def check_strong_stability(alg: AlgebraSpec, w: Weight, samples: int = 1000,
                           max_power: int = 5, seed: int = 0,
                           tol: float = DEFAULT_TOL) -> StabilityReport:
    """Test strong stability on ``winv`` and on random unit-norm members.

    Powers accumulate from the left, ``f^k = f^(k-1) * f``.  The reported
    violator is the first one met: ``winv`` before any sample, lower
    sample index first, then lower power.
    """
    if max_power < 2:
        raise ValueError("max_power must be at least 2")
    _check_weight(alg, w)
    winv = hadamard_inverse(w)
    ratios = _power_ratios(alg, w, winv.values[None, :], max_power)[0]
    worst = float(ratios.max())
    worst_k = int(np.argmax(ratios)) + 2
    violator = None
    bad = np.flatnonzero(ratios > 1 + tol)
    if bad.size:
        k = int(bad[0])
        violator = (winv, k + 2, float(ratios[k]), "winv")
    for b, start, used in sample_blocks(samples):
        F, valid = alg.random_batch(sample_rng(seed, b, (STREAM_POWERS,)), BLOCK)
        F = F[:used]
        nf = _norms(w, F)
        ok = valid[:used] & (nf > 0)
        F, idx = F[ok] / nf[ok, None], np.flatnonzero(ok)
        if not len(F):
            continue
        R = _power_ratios(alg, w, F, max_power)
        r, c = np.unravel_index(int(np.argmax(R)), R.shape)
        if R[r, c] > worst:
            worst, worst_k = float(R[r, c]), int(c) + 2
        if violator is None:
            rows = np.flatnonzero((R > 1 + tol).any(axis=1))
            if rows.size:
                r = int(rows[0])
                k = int(np.flatnonzero(R[r] > 1 + tol)[0])
                violator = (Element(alg.carrier, F[r]), k + 2, float(R[r, k]),
                            f"sample {start + int(idx[r])}")
    if violator is None:
        return StabilityReport(True, worst, worst_k, None, None, None, "", samples,
                               max_power, seed)
    f, k, ratio, source = violator
    return StabilityReport(False, worst, worst_k, f, k, ratio, source, samples, max_power, seed)


def threshold_scale(alg: AlgebraSpec, w0: Weight, tol: float = DEFAULT_TOL) -> float:
    """Smallest ``mu`` for which ``mu * w0`` passes :func:`certify`.

    Scaling ``w0`` by ``mu`` scales ``winv`` by ``1/mu`` and ``winv*winv`` by
    ``1/mu**2``, so the criterion holds iff
    ``mu >= max_t (w0inv*w0inv)(t) / w0inv(t)``.  A result of ``0.0`` means
    ``w0inv*w0inv`` vanishes and every scale is certified.
    """
    _check_weight(alg, w0)
    reason = known_non_homotonic(alg, tol)
    if reason:
        raise NotHomotonicError(reason)
    winv = hadamard_inverse(w0)
    s = alg.product(winv, winv).values
    if np.iscomplexobj(s):
        s = s.real
    return max(0.0, float(np.max(s / winv.values)))


@dataclass(frozen=True)
class MarginReport:
    margin: float
    index: int
    certified: bool
    lhs: tuple[float, ...]

    def to_json(self) -> dict:
        return {"margin": self.margin, "worst_index": self.index, "certified": self.certified}


def convolution_weight_criterion(w: Weight, kappa: float, p: float,
                                 tol: float = DEFAULT_TOL) -> MarginReport:
    """Check ``kappa h sum_j 1/(w(t_(i-j)) w(t_j)) <= 1/w(t_i)`` on the grid.

    Evaluated term by term, independently of
    :class:`~homotonic.products.Convolution`; ``w`` must sit on the
    periodic grid of period ``p``.
    """
    c = w.carrier
    if c.kind != "periodic-grid" or not np.isclose(c.period, p, rtol=0, atol=1e-15 * p):
        raise CarrierMismatchError("weight must live on the periodic grid of period p")
    n = c.n
    h = p / n
    wv = [float(x) for x in w.values]
    lhs = []
    for i in range(n):
        acc = 0.0
        for j in range(n):
            acc += 1.0 / (wv[(i - j) % n] * wv[j])
        lhs.append(kappa * h * acc)
    rhs = [1.0 / x for x in wv]
    diffs = [a - b for a, b in zip(lhs, rhs)]
    index = max(range(n), key=diffs.__getitem__)
    scale = max(1.0, max(lhs), max(rhs))
    margin = diffs[index]
    return MarginReport(margin, index, margin <= tol * scale, tuple(lhs))
