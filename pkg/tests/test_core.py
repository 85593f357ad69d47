import json
import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from specrecon.core import (
    AxisNormalization,
    EmptyCurve,
    SpectralCurve,
    SpectrumType,
    canonicalize,
    canonicalize_with_count,
    dump_curves,
    fit_unit_square,
    load_curves,
)

finite = st.floats(-1e6, 1e6, allow_nan=False, allow_infinity=False)
points = st.lists(st.tuples(finite, finite), min_size=1, max_size=40)


def pts(c):
    return [tuple(p) for p in c.points.tolist()]


def test_canonicalize_sorts_and_averages_duplicates():
    c = canonicalize(SpectralCurve.from_points([(2, 1), (1, 0), (1, 2)]))
    assert pts(c) == [(1, 1), (2, 1)]


def test_canonicalize_drops_nonfinite():
    c, dropped = canonicalize_with_count(SpectralCurve.from_points([(0, 0), (1, math.nan), (2, 4)]))
    assert pts(c) == [(0, 0), (2, 4)]
    assert dropped == 1


def test_canonicalize_identity_on_canonical():
    c = SpectralCurve.from_points([(0, 1), (1, 5), (3, -2)])
    assert canonicalize(c) == c


def test_canonicalize_all_nonfinite():
    with pytest.raises(EmptyCurve):
        canonicalize(SpectralCurve.from_points([(math.inf, 0), (1, math.nan)]))


@given(points)
def test_canonicalize_idempotent(p):
    c = canonicalize(SpectralCurve.from_points(p))
    assert canonicalize(c) == c
    assert c.is_canonical()


def test_unit_square_bbox():
    a = SpectralCurve.from_points([(0, 0), (10, 5)])
    m = fit_unit_square(a, a)
    assert m.x_scale == pytest.approx(1 / 10)
    assert m.y_scale == pytest.approx(1 / 5)


def test_unit_square_degenerate_axis():
    a = SpectralCurve.from_points([(0, 3), (4, 3)])
    b = SpectralCurve.from_points([(2, 3)])
    m = fit_unit_square(a, b)
    assert np.all(m.apply(a).y == 0.5)
    assert np.all(m.apply(b).y == 0.5)


def test_unit_square_affine_map():
    a = SpectralCurve.from_points([(2, -1), (3, 0)])
    b = SpectralCurve.from_points([(4, 1)])
    m = fit_unit_square(a, b)
    assert (m.x_offset, m.x_scale, m.y_offset, m.y_scale) == (2, 0.5, -1, 0.5)


@given(points, points)
def test_unit_square_bounds(p, q):
    a, b = SpectralCurve.from_points(p), SpectralCurve.from_points(q)
    m = fit_unit_square(a, b)
    for c in (m.apply(a), m.apply(b)):
        assert np.all(c.points >= -1e-12) and np.all(c.points <= 1 + 1e-12)


@given(points)
def test_normalization_inverts(p):
    c = SpectralCurve.from_points(p)
    m = fit_unit_square(c)
    back = m.invert(m.apply(c))
    np.testing.assert_allclose(back.points, c.points, rtol=1e-9, atol=1e-6)


def test_identity_map():
    c = SpectralCurve.from_points([(1, 2)])
    assert AxisNormalization.identity().apply(c) == c


def test_curve_is_immutable():
    c = SpectralCurve.from_points([(0, 1), (1, 2)])
    with pytest.raises(ValueError):
        c.x[0] = 5


def test_spectrum_type_parse():
    assert SpectrumType.parse("uv-vis") is SpectrumType.UVVIS
    assert SpectrumType.parse("raman") is SpectrumType.RAMAN
    assert SpectrumType.parse("XRD") is SpectrumType.XRD
    with pytest.raises(ValueError):
        SpectrumType.parse("EPR")


def test_json_round_trip(tmp_path):
    curves = [SpectralCurve.from_points([(0, 1), (1, 2.5)], name="a", x_label="x", y_label="y")]
    f = tmp_path / "c.json"
    f.write_text(dump_curves(curves))
    assert load_curves(f) == curves
    assert load_curves(f)[0].name == "a"
    # single-object and bare-list layouts
    f.write_text(json.dumps(curves[0].to_dict()))
    assert load_curves(f) == curves
    f.write_text(json.dumps([curves[0].to_dict()]))
    assert load_curves(f) == curves


def test_csv_with_header(tmp_path):
    f = tmp_path / "c.csv"
    f.write_text("wavenumber,absorbance\n400,0.1\n401,0.2\n")
    (c,) = load_curves(f)
    assert c.x_label == "wavenumber"
    assert pts(c) == [(400, 0.1), (401, 0.2)]


def test_csv_without_header(tmp_path):
    f = tmp_path / "c.csv"
    f.write_text("1,2\n3,4\n")
    assert pts(load_curves(f)[0]) == [(1, 2), (3, 4)]
