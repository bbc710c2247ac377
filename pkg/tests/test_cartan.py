import numpy as np
import pytest

from elliptic_hopf.cartan import CartanData, CartanError, cartan_matrix, parse_label, validate

# determinants of the simply-laced Cartan matrices, a classical oracle
DETERMINANTS = {"A1": 2, "A2": 3, "A3": 4, "A7": 8, "D4": 4, "D6": 4, "E6": 3, "E7": 2, "E8": 1}


@pytest.mark.parametrize("label,det", sorted(DETERMINANTS.items()))
def test_determinant_and_definiteness(label, det):
    cd = cartan_matrix(label)
    a = cd.as_array()
    assert round(np.linalg.det(a)) == det
    assert (np.linalg.eigvalsh(a) > 0).all()
    ok, problems = validate(cd)
    assert ok, problems


def test_a2_entries():
    cd = cartan_matrix("A", 2)
    assert cd.matrix == ((2, -1), (-1, 2))
    assert cd[0, 1] == -1 and cd.label == "A2"
    assert sorted({a for _, _, a in cd.pairs()}) == [-1, 2]


def test_a3_has_orthogonal_pair():
    assert cartan_matrix("A3")[0, 2] == 0


def test_d4_branch_node():
    a = cartan_matrix("D4").as_array()
    assert sorted((a[1] == -1).nonzero()[0].tolist()) == [0, 2, 3]


@pytest.mark.parametrize("label", ["a_3", " D 5 ", "e6"])
def test_label_forms(label):
    parse_label(label)


@pytest.mark.parametrize("label", ["B3", "D3", "E9", "A0", "A", "garbage"])
def test_bad_labels(label):
    with pytest.raises(CartanError):
        cartan_matrix(label)


def test_validate_flags_problems():
    bad = CartanData("A", 3, ((2, -1, 0), (-1, 2, 0), (0, 0, 2)))
    ok, problems = validate(bad)
    assert not ok and any("disconnected" in p for p in problems)
    asym = CartanData("A", 2, ((2, -1), (0, 2)))
    assert not validate(asym)[0]
    wrong_graph = CartanData("D", 4, cartan_matrix("A4").matrix)
    ok, problems = validate(wrong_graph)
    assert not ok and any("Dynkin" in p for p in problems)
