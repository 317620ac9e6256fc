from __future__ import annotations

import json
import math

import numpy as np
import pytest
from numpy.polynomial import chebyshev as npcheb

from compactify.functions import (
    AffineImage,
    Cheb,
    Const,
    Cos,
    FunctionFamily,
    Interval,
    StereoX,
    StereoY,
    Tanh,
    chebyshev_expand,
    chebyshev_recurrence,
    descriptor_from_json,
    evaluate,
    range_interval,
)

ALL_KINDS = [
    Tanh(),
    Tanh(0.5, -2.0),
    Cos(),
    Cos(-3.0, 0.7),
    StereoX(),
    StereoY(),
    Const(0.25),
    Cheb(3, Cos()),
    Cheb(2, Tanh()),
    AffineImage(Tanh(), 0.5, 0.25),
    AffineImage(Cos(2.0, 0.0), -1.5, 0.0),
]


def test_pointwise_values_match_math_module():
    # independent scalar route through math.*
    assert Tanh().evaluate(0.0) == 0.0
    assert Tanh().evaluate(1.3) == pytest.approx(math.tanh(1.3), abs=1e-15)
    assert Cos(2.0, 0.5).evaluate(0.7) == pytest.approx(math.cos(2.0 * 0.7 + 0.5), abs=1e-15)
    assert StereoX().evaluate(0.0) == 0.0
    assert StereoY().evaluate(0.0) == -1.0
    assert StereoX().evaluate(1.0) == 1.0
    assert StereoY().evaluate(1.0) == 0.0
    assert Const(0.75).evaluate(123.0) == 0.75


def test_scalar_evaluate_returns_python_float():
    v = Tanh().evaluate(2.0)
    assert isinstance(v, float)
    arr = Tanh().evaluate(np.array([2.0]))
    assert isinstance(arr, np.ndarray)


def test_stereo_coordinates_stay_on_unit_circle():
    xs = np.linspace(-80.0, 80.0, 20001)
    sx = StereoX().evaluate(xs)
    sy = StereoY().evaluate(xs)
    assert np.max(np.abs(sx * sx + sy * sy - 1.0)) < 1e-12


def test_stereo_x_is_finite_for_huge_arguments():
    xs = np.array([1e300, -1e300, 1e15])
    vals = StereoX().evaluate(xs)
    assert np.all(np.isfinite(vals))
    # asymptotically 2/x
    assert vals[2] == pytest.approx(2.0 / 1e15, rel=1e-12)


def test_tanh_saturates_to_endpoints():
    assert Tanh().evaluate(1e308) == 1.0
    assert Tanh().evaluate(-1e308) == -1.0


def test_cosine_is_even_bitwise():
    xs = np.linspace(0.0, 40.0, 5001)
    d = Cos(math.sqrt(2.0), 0.0)
    assert np.array_equal(d.evaluate(xs), d.evaluate(-xs))


def test_chebyshev_recurrence_base_cases():
    assert chebyshev_recurrence(0, 0.3) == 1.0
    assert chebyshev_recurrence(1, 0.3) == 0.3
    ts = np.linspace(-1.0, 1.0, 101)
    assert np.max(np.abs(chebyshev_recurrence(2, ts) - (2 * ts * ts - 1))) == 0.0


def test_chebyshev_recurrence_matches_clenshaw():
    """Dual route: explicit recurrence against numpy's Clenshaw evaluation."""
    rng = np.random.default_rng(11)
    ts = rng.uniform(-1.0, 1.0, 4096)
    for n in (1, 2, 3, 5, 8, 11):
        ref = npcheb.chebval(ts, [0.0] * n + [1.0])
        assert np.max(np.abs(chebyshev_recurrence(n, ts) - ref)) < 1e-13


def test_cheb_descriptor_matches_clenshaw_through_cos():
    rng = np.random.default_rng(11)
    xs = rng.uniform(-20.0, 20.0, 4096)
    for n in (1, 2, 3, 5, 8, 11):
        mine = Cheb(n, Cos()).evaluate(xs)
        ref = npcheb.chebval(np.cos(xs), [0.0] * n + [1.0])
        assert np.max(np.abs(mine - ref)) < 1e-13


def test_cheb_identity_on_cosine():
    # T_n(cos x) == cos(n x)
    xs = np.linspace(-50.0, 50.0, 10001)
    for n in (2, 5, 9):
        got = Cheb(n, Cos()).evaluate(xs)
        assert np.max(np.abs(got - np.cos(n * xs))) < 1e-9


def test_chebyshev_expand_builds_the_wrapped_descriptor():
    d = chebyshev_expand(3)
    assert d == Cheb(3, Cos(1.0, 0.0))
    with pytest.raises(ValueError):
        chebyshev_expand(0)
    with pytest.raises(ValueError):
        Cheb(0, Cos())


def test_range_intervals():
    assert Tanh().range_interval() == Interval(-1.0, 1.0)
    assert Cos(5.0, -1.0).range_interval() == Interval(-1.0, 1.0)
    assert StereoX().range_interval() == Interval(-1.0, 1.0)
    assert StereoY().range_interval() == Interval(-1.0, 1.0)
    assert Const(0.3).range_interval() == Interval(0.3, 0.3)
    flipped = AffineImage(Tanh(), -2.0, 1.0)
    assert flipped.range_interval() == Interval(-1.0, 3.0)


def test_cheb_range_over_shifted_inner_interval():
    # frozen: T_3 over [0.25, 0.75] has one interior extremum at t = 1/2
    # giving -1; hull cross-checked against dense Clenshaw sampling
    inner = AffineImage(Cos(), 0.25, 0.5)
    assert inner.range_interval() == Interval(0.25, 0.75)
    d = Cheb(3, inner)
    assert d.range_interval() == Interval(-1.0, -0.5625)


def test_cheb_range_on_full_interval_is_unit():
    assert Cheb(7, Cos()).range_interval() == Interval(-1.0, 1.0)
    assert Cheb(4, Tanh()).range_interval() == Interval(-1.0, 1.0)


@pytest.mark.parametrize("desc", ALL_KINDS, ids=lambda d: type(d).__name__)
def test_values_always_land_in_declared_range(desc):
    """Containment is exact, not approximate: evaluate clips into range."""
    xs = np.linspace(-1000.0, 1000.0, 100001)
    vals = desc.evaluate(xs)
    iv = desc.range_interval()
    assert np.all(vals >= iv.lo)
    assert np.all(vals <= iv.hi)


@pytest.mark.parametrize("desc", ALL_KINDS, ids=lambda d: type(d).__name__)
def test_json_roundtrip_is_exact(desc):
    blob = json.dumps(desc.to_json())
    back = descriptor_from_json(json.loads(blob))
    assert back == desc


def test_json_kind_strings_are_stable():
    assert Tanh().to_json() == {"kind": "tanh", "a": 1.0, "b": 0.0}
    assert Cos(2.0, 0.5).to_json() == {"kind": "cos", "a": 2.0, "b": 0.5}
    assert Cheb(3, Cos()).to_json() == {
        "kind": "cheb",
        "n": 3,
        "inner": {"kind": "cos", "a": 1.0, "b": 0.0},
    }


def test_descriptor_from_json_rejects_unknown_kind():
    with pytest.raises(ValueError):
        descriptor_from_json({"kind": "sine", "a": 1.0})
    with pytest.raises(ValueError):
        descriptor_from_json("tanh")


def test_module_level_helpers_delegate():
    assert evaluate(Tanh(), 0.5) == Tanh().evaluate(0.5)
    assert range_interval(Cos()) == Interval(-1.0, 1.0)


def test_interval_validation():
    with pytest.raises(ValueError):
        Interval(2.0, 1.0)
    assert Interval(1.0, 1.0).width == 0.0
    assert Interval(-1.0, 1.0).contains(0.0)
    assert not Interval(-1.0, 1.0).contains(1.5)


def test_family_requires_an_injective_lead():
    FunctionFamily((Tanh(),))
    FunctionFamily((StereoX(), StereoY()))
    FunctionFamily((AffineImage(Tanh(), 0.5, 1.0), Cos()))
    with pytest.raises(ValueError):
        FunctionFamily((Cos(),))
    with pytest.raises(ValueError):
        FunctionFamily((StereoX(),))
    with pytest.raises(ValueError):
        FunctionFamily((Tanh(0.0, 1.0),))
    with pytest.raises(ValueError):
        FunctionFamily((AffineImage(Tanh(), 0.0, 1.0), Cos()))
    with pytest.raises(ValueError):
        FunctionFamily(())


def test_family_rejects_non_descriptors():
    with pytest.raises(TypeError):
        FunctionFamily((Tanh(), "cos"))


def test_family_space_and_iteration():
    fam = FunctionFamily((Tanh(), Cos(), Const(0.5)))
    assert len(fam) == 3
    assert fam[1] == Cos()
    assert fam.space() == (
        Interval(-1.0, 1.0),
        Interval(-1.0, 1.0),
        Interval(0.5, 0.5),
    )


def test_family_file_roundtrip(tmp_path):
    fam = FunctionFamily((Tanh(), Cheb(2, Cos())))
    p = tmp_path / "family.json"
    p.write_text(json.dumps(fam.to_json()))
    assert FunctionFamily.from_file(p) == fam
    # wrapped object form is accepted too
    p.write_text(json.dumps({"family": fam.to_json()}))
    assert FunctionFamily.from_file(p) == fam
    p.write_text(json.dumps({"other": 1}))
    with pytest.raises(ValueError):
        FunctionFamily.from_file(p)


def test_injective_leads_separate_sampled_pairs():
    # tanh collapses to exactly +-1.0 in float64 once |x| passes ~19, so
    # the numeric spot check stays inside the faithfully monotone window;
    # the structural whitelist is what guards the lead slot in general.
    rng = np.random.default_rng(23)
    xs = rng.uniform(-10.0, 10.0, size=10_000)
    ys = rng.uniform(-10.0, 10.0, size=10_000)
    keep = xs != ys
    assert np.all(Tanh().evaluate(xs[keep]) != Tanh().evaluate(ys[keep]))

    # the stereographic legs repeat individually (x and 1/x agree on the
    # first leg) but the pair separates jointly
    sx, sy = StereoX(), StereoY()
    assert sx.evaluate(2.0) == sx.evaluate(0.5)
    both = (sx.evaluate(xs[keep]) == sx.evaluate(ys[keep])) & (
        sy.evaluate(xs[keep]) == sy.evaluate(ys[keep])
    )
    assert not np.any(both)
