from fractions import Fraction
from itertools import combinations

import pytest

from arrsheaf.arrangement import (
    Arrangement,
    ArrangementError,
    Hyperplane,
    catalog,
    cofactor_forms,
    essentialize,
    parse_arrangement,
    serialize_arrangement,
)
from arrsheaf.linalg import GF, QQ, sparse_rank


BOOLEAN2_TEXT = """field Q
dim 2
hyperplane 1 0
hyperplane 0 1
"""


def test_parse_boolean2():
    arr = parse_arrangement(BOOLEAN2_TEXT)
    assert arr.ell == 2 and arr.size == 2
    assert arr.normal(0) == (1, 0)


def test_parse_duplicate_proportional():
    with pytest.raises(ArrangementError, match="proportional"):
        parse_arrangement(BOOLEAN2_TEXT + "hyperplane 2 0\n")


def test_parse_non_essential_reports_rank():
    text = "field Q\ndim 3\nhyperplane 1 0 0\nhyperplane 0 1 0\n"
    with pytest.raises(ArrangementError, match="rank 2 < 3"):
        parse_arrangement(text)


def test_parse_low_dimension():
    with pytest.raises(ArrangementError, match=">= 2"):
        parse_arrangement("field Q\ndim 1\nhyperplane 1\n")


def test_parse_malformed_line():
    with pytest.raises(ArrangementError, match="line 3"):
        parse_arrangement("field Q\ndim 2\nhyperplane 1 a\n")


def test_parse_non_prime_characteristic():
    with pytest.raises(ArrangementError, match="prime"):
        parse_arrangement("field Fp 6\ndim 2\nhyperplane 1 0\nhyperplane 0 1\n")


def test_parse_prime_field_and_rationals():
    arr = parse_arrangement(
        "field Fp 7\ndim 2\nhyperplane 1 3\nhyperplane 0 1/2\n"
    )
    assert arr.field == GF(7)
    assert arr.normal(1) == (0, 4)  # 1/2 = 4 mod 7
    arr_q = parse_arrangement("field Q\ndim 2\nhyperplane 1 -1/2\nhyperplane 0 1\n")
    assert arr_q.normal(0) == (1, Fraction(-1, 2))


@pytest.mark.parametrize(
    "name,params",
    [("boolean", (2,)), ("boolean", (4,)), ("braid", (3,)), ("generic", (3, 5)),
     ("near-pencil", (5,))],
)
def test_serialize_parse_round_trip(name, params):
    arr = catalog(name, *params)
    again = parse_arrangement(serialize_arrangement(arr))
    assert again == arr
    assert again.name == arr.name


def test_catalog_boolean3():
    arr = catalog("boolean", 3)
    assert [h.normal for h in arr.hyperplanes] == [(1, 0, 0), (0, 1, 0), (0, 0, 1)]


def test_catalog_braid3_size_and_essential():
    arr = catalog("braid", 3)
    assert arr.size == 6
    assert arr.normals_rank() == 3


def test_catalog_generic34_normals():
    arr = catalog("generic", 3, 4)
    assert [h.normal for h in arr.hyperplanes] == [
        (1, 0, 0), (0, 1, 0), (0, 0, 1), (1, 1, 1),
    ]


def test_catalog_generic_every_subset_invertible():
    arr = catalog("generic", 3, 6)
    for subset in combinations(range(arr.size), 3):
        rows = [
            {j: c for j, c in enumerate(arr.normal(i)) if c} for i in subset
        ]
        assert sparse_rank(QQ, rows) == 3


def test_catalog_unknown():
    with pytest.raises(ArrangementError, match="unknown"):
        catalog("pencil-of-doom", 3)
    with pytest.raises(ArrangementError):
        catalog("boolean", 1)


def test_cofactor_forms_partition(braid3, braid3_lattice):
    for el in braid3_lattice.elements:
        q = cofactor_forms(braid3, el.members)
        assert sorted(q.factors + el.members) == list(range(braid3.size))


def test_cofactor_forms_bottom_is_everything(boolean2):
    q = cofactor_forms(boolean2, ())
    assert q.factors == (0, 1)


def test_cofactor_forms_braid3_triple(braid3, braid3_lattice):
    triples = [e for e in braid3_lattice.elements if len(e.members) == 3]
    assert triples
    q = cofactor_forms(braid3, triples[0].members)
    assert q.degree == 3


def test_essentialize_braid_differences():
    # the difference forms on 4 coordinates are non-essential; restricting to
    # the pivot coordinates must reproduce the essential braid normals
    raw = []
    for i in range(4):
        for j in range(i + 1, 4):
            n = [0, 0, 0, 0]
            n[i], n[j] = 1, -1
            raw.append(tuple(n))
    arr = essentialize(QQ, raw, name="essentialized")
    assert arr.ell == 3 and arr.size == 6
    braid = catalog("braid", 3)
    assert sorted(
        tuple(c for c in h.normal) for h in arr.hyperplanes
    ) == sorted(tuple(c for c in h.normal) for h in braid.hyperplanes)


def test_hyperplane_zero_normal_rejected():
    with pytest.raises(ArrangementError):
        Hyperplane((0, 0))


def test_arrangement_equality_ignores_name(boolean2):
    other = Arrangement(QQ, 2, boolean2.hyperplanes, name="renamed")
    assert other == boolean2
