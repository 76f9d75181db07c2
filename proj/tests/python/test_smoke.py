import math
import os

import numpy as np
import pytest

import simcompose


def example():
    path = os.environ.get("SIMCOMPOSE_EXAMPLE")
    return simcompose.load(path) if path else simcompose.bundled_example()


def test_pipeline_values():
    pl = simcompose.build_pipeline(example())
    assert pl.small_gain_ok
    assert pl.spectral_radius < 1.0
    a1, a2 = pl.abstractions[0], pl.abstractions[1]
    assert a1.Ahat.shape == (1, 1)
    assert abs(a1.Ahat[0, 0]) < 1e-10
    assert a2.Ahat[0, 0] == pytest.approx(-2.0, abs=1e-10)
    assert a2.rho == pytest.approx(math.sqrt(2.0), abs=1e-10)


def test_compose_override():
    c = simcompose.compose(example(), eta=np.array([0.4, 0.6, 0.5, 0.6]), epsilon=4.0)
    assert c.overridden
    assert c.lambda_ == pytest.approx(0.8, abs=1e-12)
    assert c.alpha == pytest.approx(1.0, abs=1e-12)


def test_simulation_respects_bounds():
    r = simcompose.simulate(example(), t_final=4.0)
    assert r["min_margin"] >= -1e-6
    assert r["min_vector_margin"] >= -1e-6
    assert len(r["t"]) == len(r["mismatch"]) == 4001


def test_reproduce_example():
    code, text = simcompose.reproduce_example()
    assert code == 0
    assert "FAIL" not in text


def test_parse_error():
    with pytest.raises(simcompose.ParseError):
        simcompose.parse("{ not json")
