import pytest

from cohwb.fincat import FinCat, terminal_category
from cohwb.parser import parse_theory

T_TRANS_TEXT = """sort s.
rel R : s * s.
axiom [x:s] true => R(x, x).
axiom [x:s, y:s, z:s] R(x, y) & R(y, z) => R(x, z).
"""


@pytest.fixture(scope="session")
def ttrans():
    thy, _ = parse_theory(T_TRANS_TEXT)
    return thy


@pytest.fixture(scope="session")
def jiso():
    """The walking isomorphism: u ≅ v."""
    return FinCat(
        objects=("u", "v"),
        arrows=("id_u", "id_v", "i", "j"),
        src={"id_u": "u", "id_v": "v", "i": "u", "j": "v"},
        tgt={"id_u": "u", "id_v": "v", "i": "v", "j": "u"},
        identity={"u": "id_u", "v": "id_v"},
        comp={("id_u", "id_u"): "id_u", ("id_v", "id_v"): "id_v",
              ("i", "id_u"): "i", ("id_v", "i"): "i",
              ("j", "id_v"): "j", ("id_u", "j"): "j",
              ("j", "i"): "id_u", ("i", "j"): "id_v"},
    )


@pytest.fixture(scope="session")
def pt():
    return terminal_category()
