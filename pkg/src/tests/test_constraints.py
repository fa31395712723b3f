import itertools
import math

import numpy as np
import pytest

from impulsive.mechanics.constraints import (
    ConstraintError,
    KineticConstraint,
    KineticKind,
    KineticRow,
    PositionalConstraint,
    Relation,
    Side,
    classify,
    classify_multiple,
    exit_direction,
    is_rest_frame,
    is_rest_frame_kinetic,
    normal_basis,
    on_constraint,
    sample_points,
    satisfies_kinetic,
    split_joint,
    split_kinetic,
    split_positional,
    projection_residual,
)
from impulsive.mechanics.geometry import (
    FrameField,
    MassMetric,
    ScalarField,
    SpacelikeVector,
    SpacetimePoint,
    TimelikeVelocity,
    metric_inner,
)


def linear_field(a: np.ndarray, c: float, d: float = 0.0) -> ScalarField:
    """The field `a · x + c t + d` with its exact gradient."""

    return ScalarField(lambda t, x: float(a @ x + c * t + d), lambda t, x: (c, a))


def rod(length: float = 1.0) -> PositionalConstraint:
    """A rod of the given length whose end touches the floor: `y - L sin θ` over `(x, y, θ)`."""

    return PositionalConstraint(
        "S",
        (
            ScalarField(
                lambda t, x: x[1] - length * math.sin(x[2]),
                lambda t, x: (0.0, np.array([0.0, 1.0, -length * math.cos(x[2])])),
            ),
        ),
        orientations=(1,),
    )


def random_spd(rng: np.random.Generator, n: int) -> np.ndarray:
    a = rng.normal(size=(n, n))
    return a @ a.T + n * np.eye(n)


def test__split_positional__agrees_with_a_least_squares_oracle() -> None:
    """The orthogonal part is the Φ-smallest correction that makes the velocity tangent. With `g = L Lᵀ` and
    `w = Lᵀ v`, it is the minimum norm solution of `fx L⁻ᵀ w = r`, which lstsq computes independently."""

    rng = np.random.default_rng(1234)
    for _ in range(1000):
        n, k = 4, int(rng.integers(1, 4))
        g = random_spd(rng, n)
        a = rng.normal(size=(k, n))
        while np.linalg.cond(a) > 100.0:
            a = rng.normal(size=(k, n))
        c = rng.normal(size=k)
        S = PositionalConstraint("S", tuple(linear_field(a[i], c[i]) for i in range(k)))
        pt = SpacetimePoint(rng.normal(), rng.normal(size=n))
        p = TimelikeVelocity(pt, rng.normal(size=n))
        metric = MassMetric.constant(g)

        split = split_positional(p, S, metric)

        L = np.linalg.cholesky(g)
        L_inv_T = np.linalg.inv(L.T)
        w = np.linalg.lstsq(a @ L_inv_T, c + a @ p.p, rcond=None)[0]
        assert split.vperp.V == pytest.approx(L_inv_T @ w, abs=1e-10)

        # Reconstruction and tangency of the parallel part.
        assert split.parallel.p + split.vperp.V == pytest.approx(p.p, abs=1e-12)
        assert c + a @ split.parallel.p == pytest.approx(np.zeros(k), abs=1e-10)

        # The orthogonal part is Φ-orthogonal to the kernel of the gradients.
        kernel = np.linalg.svd(a)[2][k:]
        for W in kernel:
            assert metric_inner(split.vperp, SpacelikeVector(pt, W), metric) == pytest.approx(0.0, abs=1e-10)

        # Projecting twice changes nothing.
        again = split_positional(split.parallel, S, metric)
        assert again.vperp.V == pytest.approx(np.zeros(n), abs=1e-10)


def test__split_positional__raises_for_dependent_rows() -> None:
    row = linear_field(np.array([1.0, 1.0]), 0.0)
    S = PositionalConstraint("S", (row, row))
    p = TimelikeVelocity(SpacetimePoint(0.0, [0.0, 0.0]), [1.0, 0.0])
    with pytest.raises(ConstraintError, match="linearly independent"):
        split_positional(p, S, MassMetric.diagonal([1.0, 1.0]))


def test__split_kinetic__rejects_inequality_rows() -> None:
    A = KineticConstraint("A", (KineticRow.constant([0.0, 1.0], relation=Relation.GE),))
    p = TimelikeVelocity(SpacetimePoint(0.0, [0.0, 0.0]), [1.0, -1.0])
    with pytest.raises(ConstraintError):
        split_kinetic(p, A, MassMetric.diagonal([1.0, 1.0]))


def test__split_kinetic__removes_the_violating_part() -> None:
    A = KineticConstraint("A", (KineticRow.constant([0.0, 1.0]),))
    p = TimelikeVelocity(SpacetimePoint(0.0, [0.0, 0.0]), [3.0, 2.0])
    split = split_kinetic(p, A, MassMetric.diagonal([1.0, 1.0]))
    assert split.vperp.V == pytest.approx([0.0, 2.0])
    assert split.parallel.p == pytest.approx([3.0, 0.0])

    admissible = split_kinetic(split.parallel, A, MassMetric.diagonal([1.0, 1.0]))
    assert admissible.vperp.V.tolist() == [0.0, 0.0]

    # A heavier `y` takes a smaller share of the correction in the mass metric, but the row still holds.
    weighted = split_kinetic(
        p, KineticConstraint("A", (KineticRow.constant([1.0, 1.0]),)), MassMetric.diagonal([1.0, 4.0])
    )
    assert weighted.vperp.V == pytest.approx([4.0, 1.0])
    assert weighted.parallel.p == pytest.approx([-1.0, 1.0])


def test__normal_basis__raises_the_gradients() -> None:
    m = 2.0
    plane = PositionalConstraint("S", (linear_field(np.array([0.0, 0.0, 1.0]), 0.0),))
    origin = SpacetimePoint(0.0, [0.0, 0.0, 0.0])
    [n] = normal_basis(origin, plane, MassMetric.diagonal([m, m, m]))
    assert n.V == pytest.approx([0.0, 0.0, 1.0 / m])
    assert n.base == origin

    M, inertia = 3.0, 0.25
    upright = SpacetimePoint(0.0, [0.0, 1.0, math.pi / 2])
    [n] = normal_basis(upright, rod(), MassMetric.diagonal([M, M, inertia]))
    assert n.V == pytest.approx([0.0, 1.0 / M, 0.0], abs=1e-15)

    corner = PositionalConstraint(
        "S", (linear_field(np.array([0.0, 1.0, 0.0]), 0.0), linear_field(np.array([0.0, 0.0, 1.0]), 0.0))
    )
    basis = normal_basis(origin, corner, MassMetric.diagonal([m, m, m]))
    assert len(basis) == 2
    assert basis[0].V == pytest.approx([0.0, 1.0 / m, 0.0])
    assert basis[1].V == pytest.approx([0.0, 0.0, 1.0 / m])

    twice = PositionalConstraint("S", (linear_field(np.array([0.0, 1.0, 0.0]), 0.0),) * 2)
    with pytest.raises(ConstraintError, match="linearly independent"):
        normal_basis(origin, twice, MassMetric.diagonal([m, m, m]))


def test__split_joint__projects_onto_the_intersection() -> None:
    # Disk against a wall: `S = W - x`, rolling `A: ẋ + R θ̇ = 0`. The intersection of the tangent space of S
    # with A is the zero velocity, so a rolling velocity is entirely orthogonal.
    R = 0.5
    S = PositionalConstraint("S", (linear_field(np.array([-1.0, 0.0]), 0.0, 1.0),), orientations=(1,))
    A = KineticConstraint("A", (KineticRow.constant([1.0, R]),))
    metric = MassMetric.diagonal([1.0, 0.125])
    p = TimelikeVelocity(SpacetimePoint(0.0, [1.0, 0.0]), [1.0, -2.0])
    split = split_joint(p, S, A, metric)
    assert split.parallel.p == pytest.approx([0.0, 0.0], abs=1e-12)
    assert split.vperp.V == pytest.approx([1.0, -2.0])


def test__classify__single_constraint() -> None:
    S = rod()
    metric = MassMetric.diagonal([1.0, 1.0, 1.0 / 3.0])
    pt = SpacetimePoint(0.0, [0.0, 1.0, math.pi / 2])
    assert classify(TimelikeVelocity(pt, [0.0, -1.0, 0.0]), S, metric, 1e-9).side is Side.LEFT
    assert classify(TimelikeVelocity(pt, [0.0, 1.0, 0.0]), S, metric, 1e-9).side is Side.RIGHT
    assert classify(TimelikeVelocity(pt, [1.0, 0.0, 0.0]), S, metric, 1e-9).side is Side.TANGENT


def test__classify__does_not_depend_on_the_scale_of_the_function() -> None:
    metric = MassMetric.diagonal([1.0, 2.0])
    pt = SpacetimePoint(0.0, [0.0, 0.0])
    p = TimelikeVelocity(pt, [0.3, -0.7])
    for scale in (1e-3, 1.0, 5.0, 1e3):
        S = PositionalConstraint("S", (linear_field(np.array([0.0, scale]), 0.0),), orientations=(1,))
        assert classify(p, S, metric, 1e-12).side is Side.LEFT
        flipped = PositionalConstraint("S", (linear_field(np.array([0.0, scale]), 0.0),), orientations=(-1,))
        assert classify(p, flipped, metric, 1e-12).side is Side.RIGHT


def test__classify_multiple__truth_table_on_the_sign_grid() -> None:
    metric = MassMetric.diagonal([1.0, 1.0, 1.0])
    pt = SpacetimePoint(0.0, [0.0, 0.0, 0.0])
    Sy = PositionalConstraint("Sy", (linear_field(np.array([0.0, 1.0, 0.0]), 0.0),), orientations=(1,))
    Sz = PositionalConstraint("Sz", (linear_field(np.array([0.0, 0.0, 1.0]), 0.0),), orientations=(1,))
    for sy, sz in itertools.product((-1.0, 0.0, 1.0), repeat=2):
        result = classify_multiple(TimelikeVelocity(pt, [0.5, sy, sz]), [Sy, Sz], metric, 1e-9)
        if sy < 0 or sz < 0:
            expected = Side.LEFT
        elif sy > 0 or sz > 0:
            expected = Side.RIGHT
        else:
            expected = Side.TANGENT
        assert result.side is expected, (sy, sz)
        assert result.margins == pytest.approx((sy, sz))


def test__classify_multiple__of_a_single_constraint_matches_classify() -> None:
    S = rod()
    metric = MassMetric.diagonal([1.0, 1.0, 1.0 / 3.0])
    pt = SpacetimePoint(0.0, [0.0, 1.0, math.pi / 2])
    for velocity in ([0.0, -1.0, 0.0], [0.0, 1.0, 2.0], [3.0, 0.0, 0.0]):
        p = TimelikeVelocity(pt, velocity)
        assert classify_multiple(p, [S], metric, 1e-9) == classify(p, S, metric, 1e-9)


def test__classify__unoriented_codimension_two_needs_a_side_rule() -> None:
    rows = (linear_field(np.array([1.0, 0.0]), 0.0), linear_field(np.array([0.0, 1.0]), 0.0))
    metric = MassMetric.diagonal([1.0, 1.0])
    p = TimelikeVelocity(SpacetimePoint(0.0, [0.0, 0.0]), [1.0, -1.0])
    with pytest.raises(ConstraintError, match="side rule"):
        classify(p, PositionalConstraint("S", rows), metric, 1e-9)
    ruled = PositionalConstraint("S", rows, side_rule=lambda margins: -1 if min(margins) < 0 else 1)
    assert classify(p, ruled, metric, 1e-9).side is Side.LEFT


def test__on_constraint__reports_the_rows_within_tolerance() -> None:
    S = PositionalConstraint(
        "S", (linear_field(np.array([1.0, 0.0]), 0.0), linear_field(np.array([0.0, 1.0]), 0.0)), orientations=(1, 1)
    )
    on, rows = on_constraint(SpacetimePoint(0.0, [0.0, 0.5]), S, 1e-9)
    assert not on
    assert rows.positional == frozenset({0})
    on, rows = on_constraint(SpacetimePoint(0.0, [1e-12, 0.0]), S, 1e-9)
    assert on
    with pytest.raises(ValueError):
        on_constraint(SpacetimePoint(0.0, [0.0, 0.0]), S, 0.0)


def test__exit_direction__is_the_raised_gradient_times_the_orientation() -> None:
    S = PositionalConstraint("S", (linear_field(np.array([-1.0, 0.0]), 0.0, 1.0),), orientations=(1,))
    U = exit_direction(SpacetimePoint(0.0, [1.0, 0.0]), S, MassMetric.diagonal([2.0, 1.0]))
    assert U.V == pytest.approx([-0.5, 0.0])


def test__is_rest_frame__for_the_rod() -> None:
    S = rod()
    rng = np.random.default_rng(0)
    points = sample_points(S, SpacetimePoint(0.0, [0.0, 1.0, math.pi / 2]), 16, rng)
    for pt in points:
        assert abs(S.values(pt)[0]) <= 1e-12
    assert is_rest_frame(FrameField.constant([0.5, 0.0, 0.0]), S, points, 1e-9)
    assert is_rest_frame(FrameField.static(3), S, points, 1e-9)
    assert not is_rest_frame(FrameField.constant([0.5, 1.0, 0.0]), S, points, 1e-9)


def test__projection_residual__vanishes_exactly_for_rest_frames() -> None:
    S = rod()
    M = 2.0
    metric = MassMetric.diagonal([M, M, M / 3.0])
    pt = SpacetimePoint(0.0, [0.0, 1.0, math.pi / 2])
    p = TimelikeVelocity(pt, [0.0, -1.0, 0.0])
    assert projection_residual(p, FrameField.constant([0.7, 0.0, 0.0]), S, metric) == pytest.approx(0.0, abs=1e-12)
    # The frame moving up with unit speed: the absolute orthogonal part is -1, the relative one -2.
    residual = projection_residual(p, FrameField.constant([0.0, 1.0, 0.0]), S, metric)
    assert residual == pytest.approx(math.sqrt(M))


def test__projection_residual__over_random_charts_and_metrics() -> None:
    """Rest frames solve `c + a H = 0`. Moving one off by `g⁻¹ aᵀ d` makes the two orthogonal parts differ by
    exactly that vector, whose Φ-norm is `√(dᵀ G d)` with the Gram matrix `G = a g⁻¹ aᵀ`."""

    rng = np.random.default_rng(99)
    for _ in range(50):
        n, k = 4, int(rng.integers(1, 3))
        g = random_spd(rng, n)
        a = rng.normal(size=(k, n))
        while np.linalg.cond(a) > 100.0:
            a = rng.normal(size=(k, n))
        c = rng.normal(size=k)
        S = PositionalConstraint("S", tuple(linear_field(a[i], c[i]) for i in range(k)))
        metric = MassMetric.constant(g)
        pt = SpacetimePoint(rng.normal(), rng.normal(size=n))
        p = TimelikeVelocity(pt, rng.normal(size=n))
        g_inv = np.linalg.inv(g)
        gram = a @ g_inv @ a.T
        kernel = np.linalg.svd(a)[2][k:]

        for _ in range(2):
            H_rest = np.linalg.lstsq(a, -c, rcond=None)[0] + rng.normal(size=n - k) @ kernel
            rest = FrameField.constant(H_rest)
            assert is_rest_frame(rest, S, [pt], 1e-10)
            assert projection_residual(p, rest, S, metric) <= 1e-10

            d = rng.uniform(0.5, 2.0, size=k) * rng.choice([-1.0, 1.0], size=k)
            moving = FrameField.constant(H_rest + g_inv @ a.T @ d)
            assert not is_rest_frame(moving, S, [pt], 1e-10)
            predicted = math.sqrt(d @ gram @ d)
            residual = projection_residual(p, moving, S, metric)
            assert residual >= 0.9 * predicted
            assert residual == pytest.approx(predicted, rel=1e-9)


def test__satisfies_kinetic__equalities_and_inequalities() -> None:
    A = KineticConstraint(
        "A",
        (
            KineticRow.constant([1.0, 0.0, 0.5]),
            KineticRow.constant([0.0, 0.0, 1.0], relation=Relation.GE),
        ),
    )
    pt = SpacetimePoint(0.0, [0.0, 0.0, 0.0])
    ok, margins = satisfies_kinetic(TimelikeVelocity(pt, [-0.5, 0.0, 1.0]), A, 1e-9)
    assert ok
    assert margins == pytest.approx((0.0, 1.0))
    ok, margins = satisfies_kinetic(TimelikeVelocity(pt, [0.5, 0.0, -1.0]), A, 1e-9)
    assert not ok
    assert margins == pytest.approx((0.0, -1.0))
    ok, _ = satisfies_kinetic(TimelikeVelocity(pt, [0.5, 0.0, 1.0]), A, 1e-9)
    assert not ok


def test__is_rest_frame_kinetic__only_checks_equality_rows() -> None:
    A = KineticConstraint(
        "A",
        (KineticRow.constant([1.0, 0.5]), KineticRow.constant([0.0, 1.0], relation=Relation.GE)),
    )
    points = [SpacetimePoint(0.0, [0.0, 0.0]), SpacetimePoint(1.0, [2.0, 3.0])]
    assert is_rest_frame_kinetic(FrameField.static(2), A, points, 1e-9)
    assert is_rest_frame_kinetic(FrameField.constant([1.0, -2.0]), A, points, 1e-9)
    assert not is_rest_frame_kinetic(FrameField.constant([0.0, 1.0]), A, points, 1e-9)


def test__kinetic_constraint__instantaneous_needs_an_owner() -> None:
    with pytest.raises(ConstraintError):
        KineticConstraint("B", (KineticRow.constant([1.0]),), kind=KineticKind.INSTANTANEOUS)
    with pytest.raises(ConstraintError):
        KineticConstraint("A", ())
