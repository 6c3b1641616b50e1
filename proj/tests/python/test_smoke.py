import math

import pytest

import mfilu


def test_directions():
    d = mfilu.directions()
    assert len(d) == 15
    assert d[7] == "c"


def test_rate_run():
    summary, history = mfilu.run({"geometry": "regular", "levels": "2:4", "smoother": "ilu"})
    assert len(summary) == 1
    rho = float(summary[0]["rho"])
    assert 0 < rho < 0.1
    assert len(history) == 20


def test_runs_are_reproducible():
    settings = {"geometry": "spade", "levels": "2:3", "permutation": "2134"}
    assert mfilu.run(settings) == mfilu.run(settings)


def test_stencil_and_lfa():
    a = mfilu.stencil("regular", 3)
    assert abs(sum(a)) < 1e-12
    l, d = mfilu.asymptotic_stencils(a)
    assert len(l) == 7
    assert d > 0
    d4 = mfilu.asymptotic_stencils(mfilu.stencil("regular", 4))[1]
    assert math.isclose(d4 / d, 0.5, rel_tol=1e-9)
    mu = mfilu.smoothing_factor(a)
    assert 0 < mu < 1
    best, perms, mus = mfilu.best_permutation("cap")
    assert len(perms) == 24
    assert mus[perms.index(best)] == min(mus)


def test_dump_single_point():
    rows = mfilu.dump_stencils({"geometry": "regular", "level": 2, "reorder": False}, "c")
    assert len(rows) == 1
    assert (rows[0]["x"], rows[0]["y"], rows[0]["z"]) == ("1", "1", "1")


def test_config_errors():
    with pytest.raises(mfilu.ConfigError):
        mfilu.run({"geometry": "banana"})
    with pytest.raises(ValueError):
        mfilu.run({"colour": "red"})


def test_surrogate_degrees_as_list():
    summary, _ = mfilu.run(
        {"geometry": "trirectangular", "levels": "2:4", "smoother": "surrogate_ilu", "degrees": [2, 2, 2]}
    )
    assert summary[0]["degrees"] == "2 2 2"
