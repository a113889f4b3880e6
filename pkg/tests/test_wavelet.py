import math

import numpy as np
import pytest

from xsect.errors import NoWavelet, SelectorMiss
from xsect.wavelet import (
    BoxUnion,
    Lattice,
    build_order_infinity_set,
    coset_selector_U,
    dilation_count,
    dimension_function,
    is_multiwavelet_set,
    partition_multiwavelet_set,
    saturate,
    translation_count,
    translation_counts,
)

from conftest import ROT90, SHEAR

Z1 = Lattice.integers(1)
Z2 = Lattice.integers(2)
TWO_SIDED = BoxUnion.build([((-2.0,), (-1.0,)), ((1.0,), (2.0,))])
SHANNON = BoxUnion.build([((-1.0,), (-0.5,)), ((0.5,), (1.0,))])


def test_lattice_dual_and_domain():
    lat = Lattice(np.array([[2.0, 0.0], [0.0, 0.5]]))
    np.testing.assert_allclose(lat.dual_basis, np.diag([0.5, 2.0]))
    eta, z = lat.wrap(np.array([1.3, 4.5]))
    np.testing.assert_allclose(eta + z @ lat.dual_basis, [1.3, 4.5])
    assert (eta >= 0).all() and (eta < np.diag(lat.dual_basis)).all()


def test_fundamental_domain_tiles(rng):
    # sampled: every point wraps to exactly one translate of Y
    lat = Lattice(np.array([[1.0, 0.3], [0.0, 2.0]]))
    pts = rng.normal(size=(200, 2)) * 3
    for xi in pts:
        eta, z = lat.wrap(xi)
        np.testing.assert_allclose(eta + lat.dual_point(z), xi, atol=1e-9)


def test_dual_point_order_is_norm_then_lex():
    pts = Z2.ordered_dual_points(9)
    expected = [(0, 0), (-1, 0), (0, -1), (0, 1), (1, 0), (-1, -1), (-1, 1), (1, -1), (1, 1)]
    assert [tuple(int(v) for v in p) for p in pts] == expected


def test_translation_count_examples():
    assert translation_count(TWO_SIDED, Z1, [0.3]).value == 2
    assert translation_count(BoxUnion.build([((0.0,), (1.0,))]), Z1, [0.3]).value == 1
    assert translation_count(BoxUnion.build([]), Z1, [0.3]).value == 0


def test_translation_count_exact_for_boxes():
    tc = translation_count(TWO_SIDED, Z1, [0.3])
    assert not tc.truncated and tc == 2


def test_dilation_count_examples():
    assert dilation_count(TWO_SIDED, [[2.0]], [0.3]) == 1
    assert dilation_count(TWO_SIDED, [[2.0]], [1.5]) == 1
    assert dilation_count(BoxUnion.build([((1.0,), (2.0,))]), [[2.0]], [-0.3]) == 0


def test_saturate_examples():
    sat = saturate(BoxUnion.build([((0.0,), (0.5,))]), Z1)
    assert sat.contains([3.2]) and not sat.contains([3.7])
    assert not saturate(BoxUnion.build([]), Z1).contains([0.1])
    period = saturate(BoxUnion.build([((1.0,), (2.0,))]), Z1)
    assert period.contains([0.5])  # 0.5 + 1 lands in [1, 2)


def test_selector_two_sided():
    u = coset_selector_U(TWO_SIDED, Z1)
    assert u.to_json()["boxes"] == [{"lo": [1.0], "hi": [2.0]}]


def test_selector_of_fundamental_domain_is_identity():
    k = BoxUnion.build([((0.0,), (1.0,))])
    assert coset_selector_U(k, Z1).to_json()["boxes"] == [{"lo": [0.0], "hi": [1.0]}]


def test_selector_miss_on_gappy_region():
    # [0, 0.5) has translation count 0 on half of every period
    with pytest.raises(SelectorMiss):
        coset_selector_U(BoxUnion.build([((0.0,), (0.5,))]), Z1)


def test_multiwavelet_checks():
    assert is_multiwavelet_set(SHANNON, [[2.0]], Z1, 1, samples=400, seed=2).passed
    assert is_multiwavelet_set(TWO_SIDED, [[2.0]], Z1, 2, samples=400, seed=2).passed
    assert not is_multiwavelet_set(TWO_SIDED, [[2.0]], Z1, 1, samples=400, seed=2).passed


def test_partition_order_two():
    parts = partition_multiwavelet_set(TWO_SIDED, Z1, 2)
    assert parts[0].to_json()["boxes"] == [{"lo": [1.0], "hi": [2.0]}]
    assert parts[1].to_json()["boxes"] == [{"lo": [-2.0], "hi": [-1.0]}]


def test_partition_order_one_identity():
    k = BoxUnion.build([((0.0,), (1.0,))])
    parts = partition_multiwavelet_set(k, Z1, 1)
    assert parts[0].to_json()["boxes"] == [{"lo": [0.0], "hi": [1.0]}]


def test_partition_pieces_have_count_one(rng):
    parts = partition_multiwavelet_set(TWO_SIDED, Z1, 2)
    xis = rng.uniform(-0.5, 1.5, size=(200, 1))
    for p in parts:
        assert (translation_counts(p, Z1, xis, radius=20.0) == 1).all()


def test_dimension_function_examples():
    w = BoxUnion.build([((0.0,), (1.5,))])
    assert dimension_function(w, [0.25]).value == 2
    assert dimension_function(w, [0.75]).value == 1
    assert dimension_function(BoxUnion.build([]), [0.3]).value == 0
    assert dimension_function(TWO_SIDED, [0.33]).value == 2


def test_dimension_function_periodic(rng):
    w = BoxUnion.build([((-0.5, 0.0), (1.0, 2.0))])
    lat = Lattice.integers(2)
    for _ in range(30):
        xi = rng.normal(size=2)
        k = rng.integers(-3, 4, size=2).astype(float)
        assert dimension_function(w, xi).value == dimension_function(w, xi + k).value


def test_dimension_function_matches_bruteforce(rng):
    fixtures = [
        BoxUnion.build([((0.0,), (1.5,))]),
        TWO_SIDED,
        BoxUnion.build([((-0.5, -0.5), (0.5, 0.5)), ((1.5, 0.0), (2.5, 1.0))]),
    ]
    for w in fixtures:
        n = w.n
        for _ in range(50):
            xi = rng.normal(size=n) * 2
            brute = 0
            rng_box = range(-15, 16)
            for k in np.stack(np.meshgrid(*[list(rng_box)] * n), axis=-1).reshape(-1, n):
                member, _ = w.membership((xi + k).reshape(1, -1))
                brute += int(member[0])
            assert dimension_function(w, xi).value == brute


def test_order_infinity_dyadic():
    k = build_order_infinity_set([[2.0]], Z1, pieces=6)
    for i in range(1, 6):
        lo, hi = k.piece_boxes_1d(i)
        assert (lo, hi) == (2 ** (i + 2) - 4, 2 ** (i + 2) - 2)
    # certificates: Y + gamma_i inside piece i
    for i, power, gamma in k.certificates:
        lo, hi = k.piece_boxes_1d(i)
        g = gamma[0]
        assert (lo <= g and g + 1 <= hi) or (lo <= -(g + 1) and -g <= hi)


def test_order_infinity_counts(rng):
    k = build_order_infinity_set([[2.0]], Z1, pieces=8)
    for xi in rng.normal(size=(200, 1)):
        assert dilation_count(k, [[2.0]], xi, k_range=(-40, 40)) == 1
    tc = translation_count(k, Z1, [0.3], radius=100.0)
    assert tc.truncated and tc.value >= 10


def test_order_infinity_count_grows_with_radius():
    k = build_order_infinity_set([[2.0]], Z1, pieces=8)
    counts = [translation_count(k, Z1, [0.3], radius=r).value for r in (30.0, 100.0, 300.0)]
    assert counts[0] < counts[1] < counts[2]


def test_order_infinity_rotation_rejected():
    with pytest.raises(NoWavelet):
        build_order_infinity_set(ROT90, Z2)


def test_order_infinity_contracting_uses_inverse(rng):
    k = build_order_infinity_set([[0.5]], Z1, pieces=4)
    for xi in rng.normal(size=(100, 1)):
        assert dilation_count(k, [[0.5]], xi, k_range=(-40, 40)) == 1


def test_order_infinity_shear_cone():
    k = build_order_infinity_set(SHEAR, Z2, pieces=10)
    assert len(k.certificates) >= 10
    # each certificate: the unit box at gamma sits inside the cone
    for g in k.certificates:
        corners = np.array([[0, 0], [0, 1], [1, 0], [1, 1]], dtype=float) + np.asarray(g)
        x1, x2 = corners[:, 0], corners[:, 1]
        assert (x1 > 0).all() or (x1 < 0).all()
        ratios = x2 / x1
        assert ratios.min() >= 0.0 and ratios.max() <= 1.0


def test_order_infinity_spiral(rng):
    spiral = np.array([[0.0, 2.0], [-2.0, 0.0]])
    k = build_order_infinity_set(spiral, Z2, pieces=4)
    assert len(k.certificates) == 4
    bad = 0
    for xi in rng.normal(size=(150, 2)):
        if dilation_count(k, spiral, xi, k_range=(-50, 50)) != 1:
            bad += 1
    assert bad == 0


def test_infinite_partition_pieces(rng):
    k = build_order_infinity_set([[2.0]], Z1, pieces=8)
    parts = partition_multiwavelet_set(k, Z1, math.inf, pieces=3)
    grid = np.linspace(-40, 40, 401).reshape(-1, 1)
    members = [p.membership(grid)[0] for p in parts]
    in_k, _ = k.membership(grid)
    for i, m in enumerate(members):
        assert not np.any(m & ~in_k)
        for j in range(i + 1, 3):
            assert not np.any(m & members[j])
    xis = rng.uniform(-0.5, 0.5, size=(80, 1))
    for p in parts:
        assert (translation_counts(p, Z1, xis, radius=80.0) == 1).all()


def test_box_algebra():
    a = BoxUnion.build([((0.0, 0.0), (2.0, 2.0))])
    b = BoxUnion.build([((1.0, 1.0), (3.0, 3.0))])
    inter = a.intersect(b)
    assert abs(inter.measure() - 1.0) < 1e-12
    diff = a.difference(b)
    assert abs(diff.measure() - 3.0) < 1e-12
    union = a.union_disjoint(b)
    assert abs(union.measure() - 7.0) < 1e-12
    # difference pieces stay disjoint and half-open
    member, _ = diff.membership(np.array([[0.5, 0.5], [1.5, 1.5], [1.0, 1.0]]))
    assert member.tolist() == [True, False, False]


def test_order_infinity_search_budget_reported():
    from xsect.errors import SearchExhausted

    with pytest.raises(SearchExhausted) as info:
        build_order_infinity_set(SHEAR, Z2, pieces=10, search_radius=2.0)
    assert len(info.value.certificate) < 10


def test_order_infinity_general_lattice(rng):
    # dual lattice 2Z, fundamental domain [0, 2): pieces must be pushed
    # one extra power to swallow the wider domain translate
    lat = Lattice(np.array([[0.5]]))
    k = build_order_infinity_set([[2.0]], lat, pieces=4)
    assert [c[1] for c in k.certificates] == [3, 4, 5, 6]
    for xi in rng.normal(size=(150, 1)):
        assert dilation_count(k, [[2.0]], xi, k_range=(-40, 40)) == 1


def test_order_infinity_with_unit_modulus_block(rng):
    # diag(2, 1): the expanding part drives the slabs, the unit-modulus
    # direction contributes the free factor
    a = np.diag([2.0, 1.0])
    k = build_order_infinity_set(a, Z2, pieces=4)
    for xi in rng.normal(size=(150, 2)):
        assert dilation_count(k, a, xi, k_range=(-40, 40)) == 1
    assert translation_count(k, Z2, [0.3, 0.4], radius=50.0).value >= 10
