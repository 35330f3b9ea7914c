import warnings

import numpy as np
import pytest

from kahlerlab import tensor_core as tc
from kahlerlab.cones import mixed_defect
from kahlerlab.decomposition import (
    ProductStructure,
    Tag,
    block_min_hol_sec,
    classify_block,
    detect_blocks,
    theorem_case,
)
from kahlerlab.errors import DegeneracyWarning, PreconditionError
from kahlerlab.models import example_1_2, flat, fubini_study, product, riemann_surface


def random_product(rng, max_n=6):
    """Random factors from the model library, conjugated by a random unitary."""
    factors, tags = [], []
    n = 0
    while n < 2 or (n < max_n and rng.random() < 0.6):
        kind = rng.integers(3)
        room = max_n - n
        if kind == 0 and room >= 1:
            k = float(rng.choice([-1, 1]) * rng.uniform(0.5, 3))
            factors.append(riemann_surface(k)); tags.append(("Surface", 1))
        elif kind == 1 and room >= 2:
            m = int(rng.integers(2, min(room, 3) + 1))
            factors.append(fubini_study(m, float(rng.uniform(1, 6)))); tags.append(("FubiniStudyLike", m))
        else:
            factors.append(flat(1)); tags.append(("Flat", 1))
        n += factors[-1].n
        if n >= max_n:
            break
    T = factors[0] if len(factors) == 1 else product(*factors)
    U = tc.random_unitary(rng, T.n)
    return tc.conjugate_frame(T, U), sorted(tags)


def structure_tags(s):
    return sorted((b.tag.kind, b.size) for b in s.blocks)


def test_classify_block():
    assert classify_block(flat(2)) == Tag("Flat")
    assert classify_block(riemann_surface(-2.0)) == Tag("Surface", -2.0)
    tag = classify_block(fubini_study(3, 4.0))
    assert tag.kind == "FubiniStudyLike" and tag.value == pytest.approx(2.0)
    assert classify_block(product(fubini_study(1), fubini_study(1))).kind == "Unclassified"
    assert str(Tag("Surface", -1.0)) == "Surface(-1)"


def test_example_structure():
    s = detect_blocks(example_1_2(2))
    assert structure_tags(s) == [("FubiniStudyLike", 2), ("Surface", 1)]
    assert s.mixed_defect <= 1e-8 and not s.degenerate
    assert tc.is_unitary(s.change_of_frame)
    assert s.sizes == [1, 2]


def test_detect_recovers_random_products():
    rng = np.random.default_rng(77)
    for _ in range(60):
        T, tags = random_product(rng)
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", DegeneracyWarning)
            s = detect_blocks(T)
        assert structure_tags(s) == tags
        A = s.adapted(T)
        assert mixed_defect(A, [b.indices for b in s.blocks]) <= 1e-8
        assert tc.validate(A) == []


def test_irreducible_random_tensor_is_one_block():
    T = tc.random_tensor(np.random.default_rng(0), 3)
    s = detect_blocks(T)
    assert s.sizes == [3] and s.blocks[0].tag.kind == "Unclassified"


def test_flat_splits_fully():
    s = detect_blocks(flat(3))
    assert s.sizes == [1, 1, 1]
    assert all(b.tag.kind == "Flat" for b in s.blocks)


def test_equal_surfaces_split_without_warning():
    T = product(riemann_surface(2.0), riemann_surface(2.0))
    with warnings.catch_warnings():
        warnings.simplefilter("error", DegeneracyWarning)
        s = detect_blocks(T)
    assert s.sizes == [1, 1] and not s.degenerate


class _ZeroRng:
    def standard_normal(self, size):
        return np.zeros(size)


def test_clustered_spectrum_warns(monkeypatch):
    # a zero combination has one repeated eigenvalue inside the coupled FS block
    import kahlerlab.decomposition as dec

    monkeypatch.setattr(dec.np.random, "default_rng", lambda seed=None: _ZeroRng())
    with pytest.warns(DegeneracyWarning):
        s = dec.detect_blocks(fubini_study(2), attempts=2)
    assert s.degenerate and s.sizes == [2]
    assert s.mixed_defect <= 1e-8


def test_block_min_hol_sec():
    T = example_1_2(2)
    s = detect_blocks(T)
    vals = block_min_hol_sec(T, s)
    by_size = {b.size: v for b, v in zip(s.blocks, vals)}
    assert by_size[1] == pytest.approx(-4.0)
    assert by_size[2] == pytest.approx(4.0, abs=1e-9)


def _structure(sizes):
    from kahlerlab.decomposition import Block
    blocks, k = [], 0
    for m in sizes:
        blocks.append(Block(tuple(range(k, k + m)), Tag("Unclassified")))
        k += m
    return ProductStructure(blocks, np.eye(k))


def test_theorem_case_branches():
    s = _structure([1, 2])
    assert theorem_case(s, [1.0, 4.0]).case == 1
    rep = theorem_case(s, [-4.0, 4.0])
    assert rep.case == 2 and rep.negative_block == 0 and rep.negative_block_dim == 1
    rep = theorem_case(s, [-5.0, 4.0])
    assert rep.violation and rep.witness == (0, 1)
    rep = theorem_case(_structure([1, 1, 2]), [-1.0, -1.0, 4.0])
    assert rep.violation and rep.witness == (0, 1)
    rep = theorem_case(_structure([2, 1]), [-1.0, 2.0], compact_flags=[True, False])
    assert rep.case == 1 and rep.negative_block == 0
    assert theorem_case(_structure([1, 1]), [-1.0, 2.0], compact_flags=[True, False]).case == 2
    assert rep.to_dict()["violation"] is False
    with pytest.raises(PreconditionError):
        theorem_case(s, [1.0])


def test_theorem_case_on_example():
    T = example_1_2(2)
    s = detect_blocks(T)
    rep = theorem_case(s, block_min_hol_sec(T, s))
    assert rep.case == 2
