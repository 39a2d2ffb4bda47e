import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from rebo.config import double_layer_table, stiffness_points
from rebo.errors import ExtrapolationWarning, ReboError
from rebo.pattern import ReboParams
from rebo.stiffness import (REFERENCE_MODEL, ForceDisplacementTrace, StiffnessModel, effective_area,
                            estimate_stiffness, fit_affine, hysteresis_loss, predict_stiffness,
                            read_traces, stack_stiffness, stress_strain)


def line_trace(k_npm, travel_mm=40.0, n=81, rest=80.0, offset=0.0):
    x = np.linspace(0.0, travel_mm, n)
    return ForceDisplacementTrace(x, k_npm * x * 1e-3 + offset, rest)


def test_predict_published_endpoints():
    assert predict_stiffness(45) == pytest.approx(16.0571 * 45 - 43.7143, abs=1e-9)
    assert predict_stiffness(45) == pytest.approx(678.86, abs=5e-3)
    assert predict_stiffness(15) == pytest.approx(197.14, abs=5e-3)
    # the stated low end of the measured range is 210 N/m
    assert abs(predict_stiffness(15) - 210) / 210 < 0.10


def test_predict_rejects_root_of_law():
    with pytest.warns(ExtrapolationWarning), pytest.raises(ReboError, match="model invalid"):
        predict_stiffness(REFERENCE_MODEL.zero_angle())
    assert REFERENCE_MODEL.zero_angle() == pytest.approx(2.722, abs=1e-3)


def test_predict_is_increasing():
    ks = [predict_stiffness(b) for b in np.linspace(15, 45, 31)]
    assert np.all(np.diff(ks) > 0)


def test_fit_two_exact_points():
    m = fit_affine([(15, 16.0571 * 15 - 43.7143), (45, 16.0571 * 45 - 43.7143)])
    assert m.slope == pytest.approx(16.0571, abs=1e-9)
    assert m.intercept == pytest.approx(-43.7143, abs=1e-9)
    assert m.r_squared == pytest.approx(1.0)


def test_fit_fixture():
    m = fit_affine(stiffness_points())
    assert m.r_squared >= 0.9
    assert m.slope > 0


def test_fit_degenerate():
    with pytest.raises(ReboError, match="degenerate"):
        fit_affine([(30, 100), (30, 200), (30, 300)])


def test_model_positive_over_band():
    m = fit_affine(stiffness_points())
    for b in np.linspace(*m.valid_band, 13):
        assert predict_stiffness(b, m) > 0


def test_stack_table_rows():
    rows = {int(r["row"]): r for r in double_layer_table()}
    assert stack_stiffness([320, 725]) == 1045
    assert stack_stiffness([320, 540]) == 860
    dev1 = abs(860 - rows[1]["double_k_npm"]) / rows[1]["double_k_npm"]
    dev2 = abs(1045 - rows[2]["double_k_npm"]) / rows[2]["double_k_npm"]
    assert dev1 == pytest.approx(0.0315, abs=5e-5)
    assert dev2 == pytest.approx(0.0097, abs=5e-5)
    assert stack_stiffness([725.0]) == 725.0


def test_stack_empty():
    with pytest.raises(ReboError):
        stack_stiffness([])


@given(st.lists(st.floats(1.0, 5000.0), min_size=1, max_size=6), st.randoms(use_true_random=False))
def test_stack_commutative(ks, rnd):
    shuffled = list(ks)
    rnd.shuffle(shuffled)
    assert stack_stiffness(ks) == pytest.approx(stack_stiffness(shuffled), rel=1e-12)
    if len(ks) >= 2:
        nested = stack_stiffness([stack_stiffness(ks[:1]), stack_stiffness(ks[1:])])
        assert nested == pytest.approx(stack_stiffness(ks), rel=1e-12)


def test_estimate_exact_line():
    est = estimate_stiffness(line_trace(725.0))
    assert est.k == pytest.approx(725.0, rel=1e-12)
    assert est.r_squared == pytest.approx(1.0)
    assert est.fit_range == pytest.approx((0.0, 40.0 * 2 / 3))


def test_estimate_ignores_flat_stack_region():
    x = np.linspace(0.0, 60.0, 601)
    knee = 40.0
    f = 0.725 * x + np.where(x > knee, 50.0 * (x - knee) ** 2, 0.0)
    est = estimate_stiffness(ForceDisplacementTrace(x, f, 80.0), 2.0 / 3.0)
    assert abs(est.k - 725.0) / 725.0 < 0.01
    # including the stiff tail biases the slope upward
    assert estimate_stiffness(ForceDisplacementTrace(x, f, 80.0), 1.0).k > 800


def test_estimate_constant_force_rejected():
    x = np.linspace(0, 40, 50)
    with pytest.raises(ReboError, match="non-spring-like"):
        estimate_stiffness(ForceDisplacementTrace(x, np.full_like(x, 3.0), 80.0))


def test_estimate_needs_ten_samples():
    with pytest.raises(ReboError):
        estimate_stiffness(line_trace(500.0, n=9))


def test_estimate_recovers_noisy_stiffness():
    rng = np.random.default_rng(42)
    k = predict_stiffness(35)
    x = np.linspace(0.0, 45.0, 400)
    f = k * x * 1e-3 + rng.normal(0.0, 1.0, x.size)
    est = estimate_stiffness(ForceDisplacementTrace(x, f, 78.0))
    assert abs(est.k - k) < 3 * est.stderr


def test_effective_area_and_stress():
    p = ReboParams(20.0, 6.0, 10.0, 6, 8, 45.0)
    area = effective_area(p)
    assert area == pytest.approx(3 * math.sqrt(3) * 196, rel=1e-15)
    assert area == pytest.approx(1018.45, abs=5e-3)
    assert 40.0 / (area * 1e-6) == pytest.approx(39275, rel=1e-4)


def test_stress_strain_units_and_modulus():
    p = ReboParams(20.0, 6.0, 10.0, 6, 8, 45.0)
    tr = line_trace(725.0, travel_mm=76.0, rest=76.0)
    ss = stress_strain(tr, p)
    assert ss.strain[-1] == pytest.approx(1.0)
    i = 10
    assert ss.stress[i] == pytest.approx(tr.force[i] / (effective_area(p) * 1e-6))
    k = estimate_stiffness(tr).k
    assert ss.youngs_modulus == pytest.approx(k * 76.0e-3 / (effective_area(p) * 1e-6), rel=1e-9)


def test_stress_strain_needs_rest_length():
    p = ReboParams(20.0, 6.0, 10.0, 6, 8, 45.0)
    x = np.linspace(0, 40, 20)
    with pytest.raises(ReboError):
        stress_strain(ForceDisplacementTrace(x, x), p)


def test_hysteresis_identical_branches():
    tr = line_trace(1035.0)
    assert hysteresis_loss(tr, tr).energy == 0.0


def test_hysteresis_constant_offset():
    c, span = 2.0, 30.0
    load = line_trace(900.0, travel_mm=span)
    unload = line_trace(900.0, travel_mm=span, offset=-c)
    assert hysteresis_loss(load, unload).energy == pytest.approx(c * span * 1e-3, rel=1e-12)


def test_hysteresis_scaled_triangle():
    x = np.linspace(0, 17.2, 50)
    load = ForceDisplacementTrace(x, 1.035 * x)
    unload = ForceDisplacementTrace(x[::-1], 0.8 * 1.035 * x[::-1])
    loss = hysteresis_loss(load, unload)
    assert loss.energy == pytest.approx(0.2 * 0.5 * 1035 * 0.0172 ** 2, rel=1e-9)
    assert loss.energy == pytest.approx(0.031, abs=5e-4)


def test_hysteresis_negative_is_flagged_not_clamped():
    load = line_trace(500.0)
    unload = line_trace(500.0, offset=1.0)
    with pytest.warns(UserWarning):
        res = hysteresis_loss(load, unload)
    assert res.negative and res.energy < 0


def test_hysteresis_grid_refinement():
    def branches(n):
        x = np.linspace(0, 40, n)
        return (ForceDisplacementTrace(x, 0.02 * x ** 1.5),
                ForceDisplacementTrace(x, 0.02 * x ** 1.5 * (1 - 0.002 * x)))
    coarse = hysteresis_loss(*branches(201)).energy
    fine = hysteresis_loss(*branches(401)).energy
    assert abs(fine - coarse) / fine < 1e-3


def test_hysteresis_too_short():
    with pytest.raises(ReboError):
        hysteresis_loss(ForceDisplacementTrace([0.0], [1.0]), line_trace(100))


def test_read_traces_by_trial(tmp_path):
    path = tmp_path / "t.csv"
    rows = ["displacement_mm,force_n,trial"]
    for trial in ("a", "b"):
        rows += [f"{x},{0.5 * x},{trial}" for x in range(12)]
    path.write_text("\n".join(rows) + "\n")
    traces = read_traces(path, rest_length=70.0)
    assert [t.trial_id for t in traces] == ["a", "b"]
    assert estimate_stiffness(traces[1]).k == pytest.approx(500.0)


def test_read_traces_bad_header(tmp_path):
    path = tmp_path / "t.csv"
    path.write_text("x,y\n1,2\n")
    with pytest.raises(ReboError):
        read_traces(path)


def test_fitted_model_fields():
    m = StiffnessModel(10.0, 5.0)
    assert math.isnan(m.r_squared)
