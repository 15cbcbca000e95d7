"""Deciding and refuting homotonicity.

Four conditions are checked for an :class:`~homotonic.products.AlgebraSpec`:

``(i)``
    closure under absolute values, ``f in A  =>  |f| in A``;
``(ii)``
    ``|f*g| <= |f|*|g|`` for all members;
``(ii)_R``
    (real algebras) the product of nonnegative members is nonnegative;
``(ii)'``
    ``|f1| <= g1`` and ``|f2| <= g2`` imply ``|f1*f2| <= g1*g2``.

A condition is reported ``holds-exact`` only when it follows from the
structure constants or a closed form.  Otherwise the checkers sweep a
deterministic set of probe members (indicator pairs, or basis pairs) and then
``samples`` random draws; a pass is reported as ``holds-sampled`` and is not a
proof.  A failure always carries a witness that :func:`violation` reproduces.

Random draws come in blocks (see :func:`homotonic.core.sample_blocks`), so
sample ``i`` is the same whatever the sample count and whatever order blocks
are evaluated in.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from homotonic.core import (
    BLOCK,
    DEFAULT_TOL,
    Element,
    OrderError,
    element_to_json,
    indicator,
    sample_blocks,
    sample_rng,
)
from homotonic.products import AlgebraSpec, Dilation, membership_residual

HOLDS_EXACT = "holds-exact"
HOLDS_SAMPLED = "holds-sampled"
FAILS = "fails"

COND_I = "(i)"
COND_II = "(ii)"
COND_II_R = "(ii)_R"
COND_II_PRIME = "(ii)'"

# stream tags keep the draws of unrelated samplers independent
STREAM_SINGLE = 1
STREAM_PAIR = 2
STREAM_NONNEG = 3


@dataclass(frozen=True)
class CheckReport:
    condition: str
    verdict: str
    samples: int
    seed: int
    probes: int = 0
    effective: int = 0
    witness: Optional[tuple[Element, ...]] = None
    index: Optional[int] = None
    magnitude: Optional[float] = None
    sample: Optional[str] = None
    note: str = ""

    @property
    def holds(self) -> bool:
        return self.verdict != FAILS

    def describe(self) -> str:
        if self.verdict == HOLDS_EXACT:
            return f"{self.condition}: holds (exact; {self.note})"
        if self.verdict == HOLDS_SAMPLED:
            return (f"{self.condition}: holds on {self.probes} probes and {self.effective} "
                    f"of {self.samples} random samples (seed {self.seed}); not a proof")
        carrier = self.witness[0].carrier
        return (f"{self.condition}: FAILS at {self.sample}, carrier point "
                f"{carrier.label(self.index)}, violation {self.magnitude:.6g}")

    def to_json(self) -> dict:
        out = {
            "condition": self.condition,
            "verdict": self.verdict,
            "samples": self.samples,
            "probes": self.probes,
            "effective_samples": self.effective,
            "seed": self.seed,
            "note": self.note,
        }
        if self.witness is not None:
            out["witness"] = [element_to_json(f) for f in self.witness]
            out["violation_index"] = self.index
            out["violation"] = self.magnitude
            out["witness_sample"] = self.sample
        return out


def _slack(tol: float, *arrays: np.ndarray) -> np.ndarray:
    scale = np.ones(arrays[0].shape[:-1])
    for a in arrays:
        scale = np.maximum(scale, np.max(np.abs(a), axis=-1))
    return tol * scale


def _excess(lhs: np.ndarray, rhs: np.ndarray, tol: float) -> tuple[np.ndarray, np.ndarray]:
    """Per-row violation of ``lhs <= rhs`` as ``(index, magnitude)`` arrays.

    ``lhs`` is real.  A complex ``rhs`` must be real up to the slack for the
    inequality to make sense; a significant imaginary part is itself
    reported as a violation.  Magnitude ``<= 0`` means the row satisfies the
    inequality.
    """
    slack = _slack(tol, lhs, rhs)
    if np.iscomplexobj(rhs):
        imag = np.abs(rhs.imag)
        rhs = rhs.real
    else:
        imag = np.zeros_like(rhs)
    diff = np.maximum(lhs - rhs, imag)
    idx = np.argmax(diff, axis=-1)
    mag = np.take_along_axis(diff, idx[..., None], axis=-1)[..., 0]
    mag = np.where(mag > slack, mag, 0.0)
    return idx, mag


def _first(mag: np.ndarray, valid: np.ndarray | None = None) -> int:
    bad = mag > 0
    if valid is not None:
        bad &= valid
    hits = np.flatnonzero(bad)
    return int(hits[0]) if hits.size else -1


def violation(alg: AlgebraSpec, condition: str, witness: tuple[Element, ...],
              tol: float = DEFAULT_TOL) -> Optional[tuple[int, float]]:
    """Re-evaluate a witness from scratch.

    Returns ``(carrier index, magnitude)`` of the violation, or ``None`` when
    the witness satisfies the condition.
    """
    prod = alg.product
    if condition == COND_I:
        (f,) = witness
        g = abs(f)
        if alg.contains(g):
            return None
        if alg.basis is not None:
            return membership_residual(alg, g)
        return 0, float("inf")
    if condition == COND_II:
        f, g = witness
        lhs = abs(prod(f, g)).values
        rhs = prod(abs(f), abs(g)).values
    elif condition == COND_II_R:
        f, g = witness
        if np.any(f.values.real < 0) or np.any(g.values.real < 0):
            raise ValueError("(ii)_R witnesses must be nonnegative")
        # nonnegativity of f*g, phrased as 0 <= f*g
        lhs = np.zeros(f.size)
        rhs = prod(f, g).values
    elif condition == COND_II_PRIME:
        f1, f2, g1, g2 = witness
        for f, g in ((f1, g1), (f2, g2)):
            _, pre_mag = _excess(np.abs(f.values), g.values, tol)
            if pre_mag > 0:
                raise ValueError("(ii)' witness does not satisfy |f| <= g")
        lhs = abs(prod(f1, f2)).values
        rhs = prod(g1, g2).values
    else:
        raise ValueError(f"unknown condition {condition!r}")
    idx, mag = _excess(lhs, rhs, tol)
    return (int(idx), float(mag)) if mag > 0 else None


def _element(alg: AlgebraSpec, row: np.ndarray) -> Element:
    return Element(alg.carrier, row)


def _failure(alg, condition, witness, samples, seed, probes, effective, label, tol, note=""):
    idx, mag = violation(alg, condition, witness, tol)
    return CheckReport(condition, FAILS, samples, seed, probes, effective,
                       witness=tuple(witness), index=idx, magnitude=mag, sample=label, note=note)


def _probe_pairs(alg: AlgebraSpec) -> tuple[np.ndarray, np.ndarray, list[str]]:
    probes = alg.probes()
    if not probes:
        m = alg.carrier.size
        return np.empty((0, m)), np.empty((0, m)), []
    P = np.stack([p.values for p in probes])
    k = len(probes)
    s, v = np.meshgrid(np.arange(k), np.arange(k), indexing="ij")
    s, v = s.ravel(), v.ravel()
    return P[s], P[v], [f"probe({i},{j})" for i, j in zip(s, v)]


def check_abs_closed(alg: AlgebraSpec, samples: int = 1000, seed: int = 0,
                     tol: float = DEFAULT_TOL) -> CheckReport:
    """Condition (i): closure under absolute values."""
    if alg.basis is None:
        note = ("|alpha t| = |alpha| t on (0, inf)" if isinstance(alg.product, Dilation)
                else "the full function space contains every |f|")
        return CheckReport(COND_I, HOLDS_EXACT, samples, seed, note=note)
    probes = alg.probes()
    for k, p in enumerate(probes):
        if not alg.contains(abs(p)):
            return _failure(alg, COND_I, (p,), samples, seed, len(probes), 0,
                            f"probe({k})", tol)
    for b, start, used in sample_blocks(samples):
        rows, _ = alg.random_batch(sample_rng(seed, b, (STREAM_SINGLE,)), BLOCK)
        inside = alg.contains_batch(np.abs(rows[:used]))
        bad = np.flatnonzero(~inside)
        if bad.size:
            i = int(bad[0])
            return _failure(alg, COND_I, (_element(alg, rows[i]),), samples, seed,
                            len(probes), start + i + 1, f"sample {start + i}", tol)
    return CheckReport(COND_I, HOLDS_SAMPLED, samples, seed, len(probes), samples)


def _pair_block(alg: AlgebraSpec, seed: int, b: int):
    rng = sample_rng(seed, b, (STREAM_PAIR,))
    F, _ = alg.random_batch(rng, BLOCK)
    G, _ = alg.random_batch(rng, BLOCK)
    return rng, F, G


def check_ii(alg: AlgebraSpec, samples: int = 1000, seed: int = 0,
             tol: float = DEFAULT_TOL) -> CheckReport:
    """Condition (ii): ``|f*g| <= |f|*|g|`` on probe pairs and random pairs."""
    mul = alg.product._mul_batch
    F, G, labels = _probe_pairs(alg)
    if len(F):
        _, mag = _excess(np.abs(mul(F, G)), mul(np.abs(F), np.abs(G)), tol)
        i = _first(mag)
        if i >= 0:
            w = (_element(alg, F[i]), _element(alg, G[i]))
            return _failure(alg, COND_II, w, samples, seed, len(F), 0, labels[i], tol)
    for b, start, used in sample_blocks(samples):
        _, F_, G_ = _pair_block(alg, seed, b)
        F_, G_ = F_[:used], G_[:used]
        _, mag = _excess(np.abs(mul(F_, G_)), mul(np.abs(F_), np.abs(G_)), tol)
        i = _first(mag)
        if i >= 0:
            w = (_element(alg, F_[i]), _element(alg, G_[i]))
            return _failure(alg, COND_II, w, samples, seed, len(F), start + i + 1,
                            f"sample {start + i}", tol)
    return CheckReport(COND_II, HOLDS_SAMPLED, samples, seed, len(F), samples)


def _exact_structure(alg: AlgebraSpec):
    if isinstance(alg.product, Dilation):
        return alg.product.structure_min(), "closed form: alpha*beta >= 0 for alpha, beta >= 0"
    if alg.full:
        return alg.product.structure_min(), "all structure constants are nonnegative"
    return None, ""


def check_ii_R(alg: AlgebraSpec, samples: int = 1000, seed: int = 0,
               tol: float = DEFAULT_TOL) -> CheckReport:
    """Condition (ii)_R: nonnegative members have nonnegative products.

    Exact through the structure constants when they exist: a negative
    constant ``c[u, s, v]`` is witnessed by the indicator pair
    ``(e_s, e_v)``.
    """
    if alg.is_complex:
        raise OrderError("(ii)_R is a condition on real algebras")
    found, note = _exact_structure(alg)
    if found is not None:
        cmin, (u, s, v) = found
        if cmin >= -tol:
            return CheckReport(COND_II_R, HOLDS_EXACT, samples, seed, note=note)
        w = (indicator(alg.carrier, s), indicator(alg.carrier, v))
        return _failure(alg, COND_II_R, w, samples, seed, 0, 0,
                        f"structure constant c[{u},{s},{v}] = {cmin:.6g}", tol)

    mul = alg.product._mul_batch
    probes = [p for p in alg.probes() if np.all(p.values >= 0)]
    for i, f in enumerate(probes):
        for j, g in enumerate(probes):
            if violation(alg, COND_II_R, (f, g), tol) is not None:
                return _failure(alg, COND_II_R, (f, g), samples, seed, len(probes) ** 2, 0,
                                f"probe({i},{j})", tol)
    effective = 0
    for b, start, used in sample_blocks(samples):
        rng = sample_rng(seed, b, (STREAM_NONNEG,))
        F, vf = alg.random_batch(rng, BLOCK, nonnegative=True)
        G, vg = alg.random_batch(rng, BLOCK, nonnegative=True)
        F, G, valid = F[:used], G[:used], (vf & vg)[:used]
        _, mag = _excess(np.zeros(F.shape), mul(F, G), tol)
        i = _first(mag, valid)
        if i >= 0:
            effective += int(valid[:i + 1].sum())
            w = (_element(alg, F[i]), _element(alg, G[i]))
            return _failure(alg, COND_II_R, w, samples, seed, len(probes) ** 2, effective,
                            f"sample {start + i}", tol)
        effective += int(valid.sum())
    note = "" if effective else "no nonnegative members were drawn; vacuous"
    return CheckReport(COND_II_R, HOLDS_SAMPLED, samples, seed, len(probes) ** 2, effective,
                       note=note)


def check_ii_prime(alg: AlgebraSpec, samples: int = 1000, seed: int = 0,
                   tol: float = DEFAULT_TOL, padding: bool = True) -> CheckReport:
    """Condition (ii)': order preservation, ``|f1| <= g1, |f2| <= g2``.

    Each sample reuses the ``(f1, f2)`` pair that :func:`check_ii` draws under
    the same seed and sets ``gi = |fi| + ri`` with random nonnegative ``ri``
    (``ri = 0`` when ``padding`` is off, and always for probes).  For
    restricted algebras samples whose ``gi`` fall outside the algebra are
    skipped.
    """
    mul = alg.product._mul_batch
    F, G, labels = _probe_pairs(alg)
    if len(F):
        AF, AG = np.abs(F), np.abs(G)
        valid = alg.contains_batch(AF) & alg.contains_batch(AG)
        _, mag = _excess(np.abs(mul(F, G)), mul(AF, AG), tol)
        i = _first(mag, valid)
        if i >= 0:
            w = tuple(_element(alg, r) for r in (F[i], G[i], AF[i], AG[i]))
            return _failure(alg, COND_II_PRIME, w, samples, seed, len(F), 0, labels[i], tol)
    effective = 0
    for b, start, used in sample_blocks(samples):
        rng, F_, G_ = _pair_block(alg, seed, b)
        R1, v1 = alg.random_batch(rng, BLOCK, nonnegative=True)
        R2, v2 = alg.random_batch(rng, BLOCK, nonnegative=True)
        F_, G_ = F_[:used], G_[:used]
        if padding:
            G1 = np.abs(F_) + np.where(v1[:used, None], R1[:used], 0.0)
            G2 = np.abs(G_) + np.where(v2[:used, None], R2[:used], 0.0)
        else:
            G1, G2 = np.abs(F_), np.abs(G_)
        valid = alg.contains_batch(G1) & alg.contains_batch(G2)
        _, mag = _excess(np.abs(mul(F_, G_)), mul(G1, G2), tol)
        i = _first(mag, valid)
        if i >= 0:
            effective += int(valid[:i + 1].sum())
            w = tuple(_element(alg, r) for r in (F_[i], G_[i], G1[i], G2[i]))
            return _failure(alg, COND_II_PRIME, w, samples, seed, len(F), effective,
                            f"sample {start + i}", tol)
        effective += int(valid.sum())
    return CheckReport(COND_II_PRIME, HOLDS_SAMPLED, samples, seed, len(F), effective)


@dataclass(frozen=True)
class EquivalenceReport:
    """Verdicts of all checkers and of the three equivalent characterisations."""

    algebra: str
    reports: dict[str, CheckReport]
    legs: dict[str, bool] = field(default_factory=dict)

    @property
    def consistent(self) -> bool:
        return len(set(self.legs.values())) <= 1

    @property
    def homotonic(self) -> bool:
        return self.consistent and all(self.legs.values())

    def to_json(self) -> dict:
        return {
            "algebra": self.algebra,
            "checks": [r.to_json() for r in self.reports.values()],
            "legs": self.legs,
            "consistent": self.consistent,
            "homotonic": self.homotonic,
        }


def theorem_equivalence_suite(alg: AlgebraSpec, samples: int = 1000, seed: int = 0,
                              tol: float = DEFAULT_TOL) -> EquivalenceReport:
    """Run every checker and compare (i)&(ii), (i)&(ii)_R and (i)&(ii)'.

    The three conjunctions are equivalent characterisations of homotonicity,
    so disagreement points at a bug (or at a sampled check missing a
    violator).  The (ii)_R leg is omitted for complex algebras.
    """
    reports = {
        COND_I: check_abs_closed(alg, samples, seed, tol),
        COND_II: check_ii(alg, samples, seed, tol),
    }
    if not alg.is_complex:
        reports[COND_II_R] = check_ii_R(alg, samples, seed, tol)
    reports[COND_II_PRIME] = check_ii_prime(alg, samples, seed, tol)
    closed = reports[COND_I].holds
    legs = {f"(i)&{c}": closed and reports[c].holds for c in reports if c != COND_I}
    return EquivalenceReport(alg.name, reports, legs)


def known_non_homotonic(alg: AlgebraSpec, tol: float = DEFAULT_TOL) -> Optional[str]:
    """Cheap deterministic refutation, or ``None`` if none was found.

    Uses the structure constants (real algebras), the probe pairs for
    condition (ii), and absolute values of the basis for condition (i).
    """
    if alg.basis is not None:
        for b in alg.basis:
            if not alg.contains(abs(b)):
                return f"not closed under absolute values: |{element_to_json(b)}| is not a member"
    if not alg.is_complex:
        found, _ = _exact_structure(alg)
        if found is not None and found[0] < -tol:
            u, s, v = found[1]
            return f"negative structure constant c[{u},{s},{v}] = {found[0]:.6g}"
    report = check_ii(alg, samples=0, tol=tol)
    if not report.holds:
        return f"|f*g| <= |f|*|g| fails for {report.sample}"
    return None
