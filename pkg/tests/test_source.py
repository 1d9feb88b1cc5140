import itertools
import random
from fractions import Fraction as F

import pytest
from hypothesis import assume, given, strategies as st

from conftest import fractions_in_unit, joint_tables, oracle_for
from symdyn import (
    BoundaryPoint,
    SourceModel,
    State,
    build_gauss,
    build_pm_dual,
    bsc_joint,
    evaluate,
    fundamental_measure,
    fundamental_set,
    step,
    theta_projections,
    trajectory,
)
from symdyn.intervals import OpenInterval, OpenRectangle


@pytest.mark.parametrize("d", [F(1, 4), F(1, 10), F(1, 3)])
def test_bsc_maps_follow_closed_form(d):
    model = build_pm_dual(bsc_joint(d))
    rng = random.Random(1)
    assert model.theta_partition.endpoints == (0, F(1, 2), 1)
    assert model.phi_partition.endpoints == (0, 1 - d, 1)
    for _ in range(50):
        t = F(rng.randrange(1, 1000), 1000)
        if t == F(1, 2):
            continue
        left = t < F(1, 2)
        assert evaluate(model.t0(0), t) == (2 * t * (1 - d) if left else 2 * d * t + 1 - 2 * d)
        assert evaluate(model.t0(1), t) == (2 * t * d if left else 2 * (1 - d) * t + 2 * d - 1)
        if t != 1 - d:
            expect = t / (1 - d) if t < 1 - d else (t - (1 - d)) / d
            assert evaluate(model.t1, t) == expect


def test_step_example(bsc_model):
    nxt, y, x, z = step(bsc_model, State(F(1, 4), F(1, 2)))
    assert (y, x, z) == (0, 0, 0)
    assert nxt == State(F(3, 8), F(2, 3))


def test_boundary_reports_step(bsc_model):
    # theta hits 1/2 after one step: 1/3 -> 2/3 * 3/4 = 1/2
    with pytest.raises(BoundaryPoint) as info:
        trajectory(bsc_model, State(F(1, 3), F(1, 2)), 3)
    assert info.value.step == 2


@given(joint_tables(3, 3), st.integers(1, 6), st.integers(0, 2 ** 20))
def test_trajectory_matches_oracle(pmf, n, seed):
    model = build_pm_dual(pmf)
    oracle = oracle_for(pmf)
    rng = random.Random(seed)
    theta, phi = F(rng.getrandbits(40) | 1, 2 ** 40), F(rng.getrandbits(40) | 1, 2 ** 40)
    expected = oracle.run(theta, phi, n)
    try:
        tr = trajectory(model, State(theta, phi), n)
    except BoundaryPoint:
        assert expected is None
        return
    assert (list(tr.x), list(tr.z), list(tr.y)) == expected


def test_fundamental_set_example(bsc_model):
    f = fundamental_set(bsc_model, (0,))
    assert set(f.rectangles) == {
        OpenRectangle(OpenInterval(0, F(1, 2)), OpenInterval(0, F(3, 4))),
        OpenRectangle(OpenInterval(F(1, 2), 1), OpenInterval(F(3, 4), 1)),
    }
    assert f.measure == F(1, 2)


@given(joint_tables(3, 3), st.data())
def test_fundamental_set_matches_enumeration(pmf, data):
    model = build_pm_dual(pmf)
    oracle = oracle_for(pmf)
    n = data.draw(st.integers(1, 4))
    y = tuple(data.draw(st.lists(st.integers(0, pmf.y_size - 1), min_size=n, max_size=n)))
    f = fundamental_set(model, y)
    cells = oracle.fundamental_cells(y)
    assert sorted((c.theta.lo, c.theta.hi) for c in f.cells) == sorted(iv for _, iv in cells)
    assert {c.x for c in f.cells} == {x for x, _ in cells}
    assert fundamental_measure(f) == oracle.word_probability(y)


@given(st.integers(1, 5), st.data())
def test_membership_matches_simulation(n, data):
    model = build_pm_dual(bsc_joint(F(1, 4)))
    oracle = oracle_for(bsc_joint(F(1, 4)))
    y = tuple(data.draw(st.lists(st.integers(0, 1), min_size=n, max_size=n)))
    theta, phi = data.draw(fractions_in_unit(200)), data.draw(fractions_in_unit(200))
    run = oracle.run(theta, phi, n)
    assume(run is not None)
    assert ((theta, phi) in fundamental_set(model, y)) == (run[2] == list(y))


@given(joint_tables(3, 3), st.data())
def test_fundamental_sets_partition_the_square(pmf, data):
    model = build_pm_dual(pmf)
    n = data.draw(st.integers(1, 3))
    total = sum(fundamental_measure(fundamental_set(model, y))
                for y in itertools.product(range(pmf.y_size), repeat=n))
    assert total == 1


@given(joint_tables(3, 3), st.data())
def test_theta_projection_count_bound(pmf, data):
    model = build_pm_dual(pmf)
    n = data.draw(st.integers(1, 8))
    y = data.draw(st.lists(st.integers(0, pmf.y_size - 1), min_size=n, max_size=n))
    assert len(theta_projections(fundamental_set(model, y))) <= n * (pmf.x_size - 1) + 1


def test_json_round_trip(three_z_model):
    again = SourceModel.from_json(three_z_model.to_json())
    assert again == three_z_model
    assert again.to_json() == three_z_model.to_json()


def test_gauss_model_has_no_finite_fundamental_set():
    with pytest.raises(ValueError):
        fundamental_set(build_gauss(), (1, 2))


def test_gauss_trajectory():
    tr = trajectory(build_gauss(), State(F(2, 5), F(1, 2)), 1)
    assert tr.y == (2,)
    assert tr.states[-1].theta == F(1, 2)
