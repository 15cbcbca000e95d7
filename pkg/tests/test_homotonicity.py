import numpy as np
import pytest

from homotonic.core import Carrier, Element, OrderError, indicator
from homotonic.homotonicity import (
    COND_I,
    COND_II,
    COND_II_PRIME,
    COND_II_R,
    FAILS,
    HOLDS_EXACT,
    HOLDS_SAMPLED,
    check_abs_closed,
    check_ii,
    check_ii_prime,
    check_ii_R,
    known_non_homotonic,
    theorem_equivalence_suite,
    violation,
)
from homotonic.products import (
    Convolution,
    Jordan,
    MatrixProduct,
    Plane,
    Pointwise,
    TensorProduct,
    a2_algebra,
    algebra,
    dilation_algebra,
    jordanize,
)

TOL = 1e-9

HOMOTONIC = {
    "matrix3": algebra(MatrixProduct(3)),
    "jordan-matrix3": algebra(jordanize(MatrixProduct(3))),
    "convolution": algebra(Convolution(1.5, 2.0, 32)),
    "pointwise": algebra(Pointwise(5)),
    "dilation": dilation_algebra(),
    "complex-matrix2": algebra(MatrixProduct(2), "complex"),
    "nonneg-tensor": algebra(TensorProduct(np.random.default_rng(3).uniform(0, 1, (4, 4, 4)))),
}


def test_abs_closed_full_is_exact():
    r = check_abs_closed(algebra(MatrixProduct(3)))
    assert r.verdict == HOLDS_EXACT
    assert check_abs_closed(dilation_algebra()).verdict == HOLDS_EXACT


def test_abs_closed_fails_for_A2():
    alg = a2_algebra()
    r = check_abs_closed(alg, 100, seed=1)
    assert r.verdict == FAILS
    (f,) = r.witness
    assert alg.contains(f) and not alg.contains(abs(f))
    assert violation(alg, COND_I, r.witness) == (r.index, r.magnitude)
    # the explicit matrix [[1, 2], [-2, 1]]
    f = Element(Carrier.matrix(2), [1, 2, -2, 1])
    assert alg.contains(f)
    assert violation(alg, COND_I, (f,)) is not None


def test_abs_closed_diagonal_A2_holds():
    r = check_abs_closed(a2_algebra(diagonal_only=True), 500, seed=2)
    assert r.verdict == HOLDS_SAMPLED and r.effective == 500


@pytest.mark.parametrize("name", sorted(HOMOTONIC))
def test_ii_holds_on_homotonic_algebras(name):
    r = check_ii(HOMOTONIC[name], 1000, seed=11)
    assert r.verdict == HOLDS_SAMPLED
    assert r.samples == 1000 and r.effective == 1000


def test_ii_plane_witness_from_example():
    alg = algebra(Plane())
    f = Element(alg.carrier, [1, 2])
    # |f*f| = (3, 4) while |f|*|f| = (-3, 4)
    assert violation(alg, COND_II, (f, f)) == (0, 6.0)
    r = check_ii(alg, 1000, seed=0)
    assert r.verdict == FAILS
    assert violation(alg, COND_II, r.witness) == (r.index, r.magnitude)


def test_ii_R_exact_paths():
    assert check_ii_R(algebra(MatrixProduct(4))).verdict == HOLDS_EXACT
    assert check_ii_R(dilation_algebra()).verdict == HOLDS_EXACT
    assert check_ii_R(algebra(Convolution(1.0, 1.0, 512))).verdict == HOLDS_EXACT
    r = check_ii_R(algebra(Plane()))
    assert r.verdict == FAILS
    beta, delta = r.witness
    assert beta == indicator(Carrier.plain(2), 1) and delta == indicator(Carrier.plain(2), 1)
    assert (r.index, r.magnitude) == (0, 1.0)


def test_ii_R_rejects_complex():
    with pytest.raises(OrderError):
        check_ii_R(algebra(MatrixProduct(2), "complex"))


def test_ii_R_sampled_for_restricted_algebra():
    r = check_ii_R(a2_algebra(diagonal_only=True), 300, seed=4)
    assert r.verdict == HOLDS_SAMPLED and r.effective == 300
    vacuous = check_ii_R(a2_algebra(), 300, seed=4)
    assert vacuous.verdict == HOLDS_SAMPLED and vacuous.effective == 0
    assert "vacuous" in vacuous.note


@pytest.mark.parametrize("name", sorted(HOMOTONIC))
def test_ii_prime_holds_on_homotonic_algebras(name):
    assert check_ii_prime(HOMOTONIC[name], 1000, seed=5).verdict == HOLDS_SAMPLED


def test_ii_prime_plane_fails_with_padded_example():
    alg = algebra(Plane())
    f = Element(alg.carrier, [1, 2])
    assert violation(alg, COND_II_PRIME, (f, f, abs(f), abs(f))) == (0, 6.0)
    r = check_ii_prime(alg, 100, seed=0)
    assert r.verdict == FAILS
    assert violation(alg, COND_II_PRIME, r.witness) == (r.index, r.magnitude)


def test_ii_prime_rejects_invalid_witness():
    alg = algebra(Pointwise(2))
    f = Element(alg.carrier, [1, -3])
    with pytest.raises(ValueError):
        violation(alg, COND_II_PRIME, (f, f, f, f))


def _signed_tensor_algebra(seed):
    # random signed constants: (ii) fails, but only through carefully chosen pairs
    c = np.random.default_rng(seed).uniform(-1, 1, (3, 3, 3))
    return algebra(TensorProduct(c))


@pytest.mark.parametrize("seed", range(5))
def test_ii_prime_without_padding_matches_ii(seed):
    for alg in (_signed_tensor_algebra(seed), HOMOTONIC["matrix3"], algebra(Plane())):
        a = check_ii(alg, 500, seed=seed)
        b = check_ii_prime(alg, 500, seed=seed, padding=False)
        assert a.holds == b.holds
        if not a.holds:
            assert a.sample == b.sample
            assert a.witness[0] == b.witness[0] and a.witness[1] == b.witness[1]


def test_sampled_draws_catch_violations_without_probes(monkeypatch):
    # disable probes so the random stage alone has to find the violator
    from homotonic import products
    monkeypatch.setattr(products, "MAX_PROBE_SIZE", 0)
    alg = algebra(TensorProduct(np.random.default_rng(9).uniform(-1, 1, (3, 3, 3))))
    r = check_ii(alg, 1000, seed=1)
    assert r.verdict == FAILS and r.sample.startswith("sample")
    assert violation(alg, COND_II, r.witness) == (r.index, r.magnitude)


def test_witness_reproduction_is_deterministic():
    alg = _signed_tensor_algebra(2)
    a = check_ii(alg, 1000, seed=7)
    b = check_ii(alg, 1000, seed=7)
    assert a.to_json() == b.to_json()


def test_sample_prefix_stability():
    # a sample's draw depends on (seed, index) only, not on the sample count
    from homotonic import products
    alg = algebra(TensorProduct(np.random.default_rng(9).uniform(-1, 1, (3, 3, 3))))
    orig = products.MAX_PROBE_SIZE
    products.MAX_PROBE_SIZE = 0
    try:
        a = check_ii(alg, 1000, seed=3)
        b = check_ii(alg, 5000, seed=3)
    finally:
        products.MAX_PROBE_SIZE = orig
    assert a.sample == b.sample and a.witness[0] == b.witness[0]


@pytest.mark.parametrize("name", [n for n in sorted(HOMOTONIC) if not n.startswith("complex")])
def test_structure_verdict_equals_sampled_verdict(name):
    alg = HOMOTONIC[name]
    assert check_ii_R(alg).holds == check_ii(alg, 1000, seed=0).holds


@pytest.mark.parametrize("seed", range(10))
def test_structure_verdict_equals_sampled_verdict_signed(seed):
    alg = _signed_tensor_algebra(seed)
    assert check_ii_R(alg).holds == check_ii(alg, 1000, seed=seed).holds


@pytest.mark.parametrize("name", [n for n in sorted(HOMOTONIC) if HOMOTONIC[n].full])
def test_jordanization_preserves_homotonicity(name):
    alg = HOMOTONIC[name]
    j = algebra(jordanize(alg.product), alg.field)
    assert check_ii(alg, 500, seed=1).holds
    assert check_ii(j, 500, seed=1).holds


@pytest.mark.parametrize("alg", [
    algebra(MatrixProduct(3)),
    algebra(Jordan(MatrixProduct(3))),
    algebra(Convolution(1.0, 1.0, 32)),
    algebra(Pointwise(6)),
    dilation_algebra(),
], ids=["matrix", "jordan", "convolution", "pointwise", "dilation"])
def test_equivalence_suite_holds(alg):
    rep = theorem_equivalence_suite(alg, 1000, seed=8)
    assert rep.consistent and rep.homotonic
    assert set(rep.legs) == {"(i)&(ii)", "(i)&(ii)_R", "(i)&(ii)'"}


def test_equivalence_suite_plane_and_A2_fail():
    plane = theorem_equivalence_suite(algebra(Plane()), 1000, seed=8)
    assert plane.consistent and not plane.homotonic
    assert all(not r.holds for c, r in plane.reports.items() if c != COND_I)
    a2 = theorem_equivalence_suite(a2_algebra(), 1000, seed=8)
    assert a2.consistent and not a2.homotonic
    assert not a2.reports[COND_I].holds


def test_equivalence_suite_nonnegative_tensor_then_flip(rng):
    c = rng.uniform(0, 1, (4, 4, 4))
    good = theorem_equivalence_suite(algebra(TensorProduct(c)), 1000, seed=1)
    assert good.consistent and good.homotonic
    bad_prod = TensorProduct(c).with_entry((2, 1, 3), -1e-3)
    bad = theorem_equivalence_suite(algebra(bad_prod), 1000, seed=1)
    assert bad.consistent and not bad.homotonic
    assert bad.reports[COND_II_R].witness == (indicator(bad_prod.carrier, 1),
                                              indicator(bad_prod.carrier, 3))


def test_complex_algebra_with_nonreal_constants_fails():
    c = np.zeros((2, 2, 2), dtype=complex)
    c[0, 0, 0] = 1j
    c[1, 1, 1] = 1
    alg = algebra(TensorProduct(c), "complex")
    rep = theorem_equivalence_suite(alg, 200, seed=0)
    assert COND_II_R not in rep.reports
    assert rep.consistent and not rep.homotonic


def test_known_non_homotonic():
    assert known_non_homotonic(algebra(MatrixProduct(3))) is None
    assert known_non_homotonic(dilation_algebra()) is None
    assert "structure constant" in known_non_homotonic(algebra(Plane()))
    assert "absolute values" in known_non_homotonic(a2_algebra())


def test_report_json_shape():
    r = check_ii(algebra(Plane()), 10, seed=3)
    js = r.to_json()
    assert js["verdict"] == "fails" and js["seed"] == 3 and js["samples"] == 10
    assert js["witness"] == [[0.0, 1.0], [0.0, 1.0]]
    assert js["violation_index"] == 0 and js["violation"] == 2.0
