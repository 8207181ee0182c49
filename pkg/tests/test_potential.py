import json
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, strategies as st

from anharmonic.errors import ValidationError
from anharmonic.numeric import SqrtOf
from anharmonic.potential import PotentialSpec, dump_potential, harmonic, load_potential, sextic


def test_sextic_sugar():
    p = sextic("0.01")
    assert p.couplings == {4: Fraction(1, 200)}
    assert p.mass == p.omega == p.hbar == 1
    assert p.index_stride == 2 and p.degree == 6
    assert p.value(np.array([1.0]))[0] == pytest.approx(0.505)


def test_zero_couplings_dropped():
    a = PotentialSpec(couplings={"2": "0", "4": "1/2"})
    assert a == sextic(1)
    assert harmonic().is_harmonic and harmonic().degree == 2


def test_odd_couplings_set_stride():
    assert PotentialSpec(couplings={1: 1}).index_stride == 1


@pytest.mark.parametrize("kwargs", [
    dict(mass=0),
    dict(omega=-1),
    dict(omega=0),
    dict(hbar="-1/2"),
    dict(couplings={0: 1}),
    dict(couplings={"x": 1}),
    dict(couplings={1.5: 1}),
])
def test_validation(kwargs):
    with pytest.raises(ValidationError):
        PotentialSpec(**kwargs)


def test_from_mapping_rejects_unknown_keys():
    with pytest.raises(ValidationError):
        PotentialSpec.from_mapping({"m": 1, "lambda": 2})
    with pytest.raises(ValidationError):
        PotentialSpec.from_mapping([1, 2])


def test_file_round_trip(tmp_path):
    p = PotentialSpec(mass="1/2", omega="sqrt(24)", hbar=1, couplings={2: 6, 4: 1})
    path = tmp_path / "pot.json"
    dump_potential(p, path)
    assert json.loads(path.read_text())["omega"] == "sqrt(24)"
    assert load_potential(path) == p
    assert isinstance(load_potential(path).omega, SqrtOf)


def test_bad_json(tmp_path):
    path = tmp_path / "bad.json"
    path.write_text("{not json")
    with pytest.raises(ValidationError):
        load_potential(path)


positive = st.fractions(min_value=Fraction(1, 1000), max_value=1000, max_denominator=1000)


@given(positive, positive, positive,
       st.dictionaries(st.integers(1, 8), st.fractions(-100, 100, max_denominator=100), max_size=4))
def test_mapping_round_trip(m, w, hb, couplings):
    p = PotentialSpec(m, w, hb, couplings)
    assert PotentialSpec.from_mapping(json.loads(json.dumps(p.to_mapping()))) == p
