import math
from fractions import Fraction

import pytest
from hypothesis import given
from hypothesis import strategies as st

from vpe.field import PrimeModulus
from vpe.params import (
    ParamSelector,
    ParamsError,
    ProtocolParams,
    check_table_size,
    derive_params,
    select_eta,
)


def test_basic_example():
    prm = derive_params(97, 4, 2, 4)
    assert (prm.r, prm.m) == (2, 4)
    assert prm.L == (0, 1, 2, 3)
    assert prm.H == (0, 1)
    assert prm.c == 2
    assert prm.table_size == 16


def test_small_ratio_example():
    prm = derive_params(97, 4, 2, 3)
    assert prm.c == Fraction(3, 2)
    assert (prm.r, prm.m) == (2, 9)


def test_padding_example():
    prm = derive_params(97, 5, 2, 4)
    assert prm.r == 3
    assert prm.d_pad == 8


def test_single_term_gets_one_round():
    prm = derive_params(97, 1, 2, 4)
    assert prm.r == 1 and prm.d_pad == 2


@pytest.mark.parametrize(
    "args, code",
    [
        ((97, 0, 2, 4), "degree"),
        ((97, 4, 1, 4), "eta"),
        ((97, 4, 2, 2), "ceta"),
        ((97, 4, 4, 3), "ceta"),
        ((5, 4, 2, 8), "modulus"),
        ((91, 4, 2, 4), "modulus"),
    ],
)
def test_invalid_params(args, code):
    with pytest.raises(ParamsError) as info:
        derive_params(*args)
    assert info.value.code == code


@given(st.integers(1, 5000), st.integers(2, 20), st.integers(1, 30))
def test_round_count_and_amplification(d, eta, extra):
    c_eta = eta + extra
    prm = derive_params(PrimeModulus(1_000_003), d, eta, c_eta)
    assert eta**prm.r >= d
    if d > 1:
        assert eta ** (prm.r - 1) < d
    # m reaches the 1/2 target
    single = 1 - (1 - eta / c_eta) ** prm.r
    assert prm.m * math.log(single) < math.log(0.5)
    q = Fraction(c_eta, c_eta - eta) ** prm.r
    assert prm.m == math.ceil(q)


@given(st.integers(1, 10**6), st.integers(2, 64), st.integers(1, 64))
def test_text_round_trip(d, eta, extra):
    prm = derive_params((1 << 61) - 1, d, eta, eta + extra)
    back = ProtocolParams.from_text(prm.to_text())
    assert back == prm
    assert back.L == prm.L
    assert back.digest() == prm.digest()


def test_file_round_trip(tmp_path):
    prm = derive_params(97, 16, 2, 3)
    path = tmp_path / "params.txt"
    prm.save(path)
    assert path.read_text().splitlines() == [
        "VPE-PARAMS v1", "modulus=97", "d=16", "eta=2", "ceta=3", "r=4", "m=81",
    ]
    assert ProtocolParams.load(path) == prm


@pytest.mark.parametrize(
    "text",
    [
        "",
        "VPE-PARAMS v2\nmodulus=97\nd=4\neta=2\nceta=4\nr=2\nm=4\n",
        "VPE-PARAMS v1\nmodulus=97\nd=4\neta=2\nceta=4\nr=3\nm=4\n",
        "VPE-PARAMS v1\nmodulus=97\nd=04\neta=2\nceta=4\nr=2\nm=4\n",
        "VPE-PARAMS v1\nmodulus=97\neta=2\nd=4\nceta=4\nr=2\nm=4\n",
        "VPE-PARAMS v1\nmodulus=96\nd=4\neta=2\nceta=4\nr=2\nm=4\n",
    ],
)
def test_rejects_bad_params_text(text):
    with pytest.raises(ParamsError):
        ProtocolParams.from_text(text)


def test_table_size_guard():
    prm = derive_params(97, 2**16, 2, 4)
    with pytest.raises(ParamsError) as info:
        check_table_size(prm)
    assert info.value.code == "table-size"
    check_table_size(derive_params(97, 2**10, 2, 4))


def test_bounds():
    prm = derive_params(97, 4, 2, 4)
    assert prm.single_bound() == pytest.approx(0.75)
    assert prm.tight_single_bound() == pytest.approx(7 / 16)
    assert prm.amplified_bound() == pytest.approx(0.75**4)


def test_select_eta_examples():
    two = ParamSelector(1, Fraction(2))
    eta, c_eta = select_eta(2**16, two)
    assert (eta, c_eta) == (16, 32)
    prm = derive_params((1 << 61) - 1, 2**16, eta, c_eta)
    assert (prm.r, prm.m) == (4, 16)

    assert select_eta(4, two) == (2, 4)

    eta, c_eta = select_eta(2**16, ParamSelector(2, Fraction(2)))
    assert eta == 256
    prm = derive_params((1 << 61) - 1, 2**16, eta, c_eta)
    assert (prm.r, prm.m) == (2, 4)


def test_selector_validation():
    with pytest.raises(ParamsError):
        ParamSelector(0, Fraction(2))
    with pytest.raises(ParamsError):
        ParamSelector(1, Fraction(1))
