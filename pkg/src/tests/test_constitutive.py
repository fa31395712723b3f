import dataclasses
import math
from typing import ClassVar

import numpy as np
import pytest

from impulsive.mechanics.constitutive import (
    LAWS,
    ConstitutiveLaw,
    ImpactContext,
    ImpactResolution,
    InelasticClamp,
    LawContractError,
    LawError,
    NewtonRestitution,
    Parameter,
    RestFrameFriction,
    breakable_lowspeed,
    breakable_saturating,
    check_resolution,
    coulomb_with_active,
    create_law,
    disk_wall_breakable,
    energy_restitution_table,
    free_impulse,
    ideal_reflection,
    inelastic_clamp_kinetic,
    kinetic_ideal_with_active,
    lowspeed_factor,
    newton_restitution,
    resolve,
    saturating_factor,
    totally_inelastic,
)
from impulsive.mechanics.constraints import (
    KineticConstraint,
    KineticRow,
    PositionalConstraint,
    Relation,
    is_rest_frame,
    split_positional,
)
from impulsive.mechanics.geometry import (
    FrameField,
    MassMetric,
    ScalarField,
    SpacelikeVector,
    SpacetimePoint,
    TimelikeVelocity,
    kinetic_energy,
    metric_norm,
)


def linear_field(a: list[float], d: float = 0.0) -> ScalarField:
    covector = np.array(a)
    return ScalarField(lambda t, x: float(covector @ x + d), lambda t, x: (0.0, covector))


def rod_context(M: float = 1.0, L: float = 1.0) -> ImpactContext:
    """A rod of mass M and length L over `(x, y, θ)`, standing vertically with its end on the floor."""

    S = PositionalConstraint(
        "S",
        (
            ScalarField(
                lambda t, x: x[1] - L * math.sin(x[2]),
                lambda t, x: (0.0, np.array([0.0, 1.0, -L * math.cos(x[2])])),
            ),
        ),
        orientations=(1,),
    )
    metric = MassMetric.diagonal([M, M, M * L**2 / 3.0])
    return ImpactContext(point=SpacetimePoint(0.0, [0.0, L, math.pi / 2]), metric=metric, surface=S)


def floor_context(dim: int = 1, **kwargs: object) -> ImpactContext:
    """A unit point mass over `(…, z)` above the floor `z = 0`, at the floor."""

    S = PositionalConstraint("floor", (linear_field([0.0] * (dim - 1) + [1.0]),), orientations=(1,))
    return ImpactContext(
        point=SpacetimePoint(0.0, np.zeros(dim)),
        metric=MassMetric.diagonal(np.ones(dim)),
        surface=S,
        **kwargs,  # type: ignore[arg-type]
    )


def test__ideal_reflection__reverses_the_falling_rod() -> None:
    ctx = rod_context()
    p_left = TimelikeVelocity(ctx.point, [0.0, -1.0, 0.0])
    resolution = ideal_reflection(p_left, ctx)
    assert resolution.p_right.p == pytest.approx([0.0, 1.0, 0.0], abs=1e-12)
    assert resolution.impulse.V == pytest.approx([0.0, 2.0, 0.0], abs=1e-12)
    check_resolution(resolution, ctx)


def sliding_frame(c: np.ndarray, Hy: float = 0.0) -> FrameField:
    """A frame sliding along the floor with a speed `Hx(t, x, y, θ)` that varies over the configuration space."""

    return FrameField(
        lambda t, x: np.array([c[0] + c[1] * t + c[2] * x[0] + c[3] * x[1] + c[4] * math.sin(x[2]), Hy, 0.0]), 3
    )


def test__ideal_reflection__preserves_the_energy_in_every_rest_frame() -> None:
    rng = np.random.default_rng(7)
    L = 0.7
    ctx = rod_context(M=2.0, L=L)
    assert ctx.surface is not None
    p_left = TimelikeVelocity(ctx.point, [0.3, -1.3, 0.8])
    resolution = ideal_reflection(p_left, ctx)
    for _ in range(100):
        h = sliding_frame(rng.normal(size=5))
        samples = [
            SpacetimePoint(t, [x, L * math.sin(theta), theta])
            for t, x, theta in rng.uniform(-1.0, 1.0, size=(5, 3))
        ]
        assert is_rest_frame(h, ctx.surface, [ctx.point, *samples], 1e-12)
        table = energy_restitution_table(p_left, resolution.p_right, {"h": h}, ctx.metric)
        assert table["h"] == pytest.approx(1.0, abs=1e-10)


def test__ideal_reflection__energy_ratio_in_frames_that_move_across_the_floor() -> None:
    rng = np.random.default_rng(8)
    ctx = rod_context(M=2.0, L=0.7)
    ydot0 = 1.0
    p_left = TimelikeVelocity(ctx.point, [0.0, -ydot0, 0.0])
    p_right = ideal_reflection(p_left, ctx).p_right
    for _ in range(100):
        c = rng.normal(size=5)
        w = rng.uniform(-3.0, 3.0)
        h = sliding_frame(c, Hy=w)
        a = h.at(ctx.point)[0]
        table = energy_restitution_table(p_left, p_right, {"h": h}, ctx.metric)
        assert table["h"] == pytest.approx((a**2 + (ydot0 - w) ** 2) / (a**2 + (ydot0 + w) ** 2), rel=1e-9)


def test__ideal_reflection__energy_is_not_preserved_in_frames_that_move_against_the_floor() -> None:
    ctx = rod_context()
    p_left = TimelikeVelocity(ctx.point, [0.0, -1.0, 0.0])
    p_right = ideal_reflection(p_left, ctx).p_right
    frames = {
        "h0": FrameField.constant([0.0, 0.0, 0.0]),
        "h1": FrameField.constant([0.0, 1.0, 0.0]),
        "h2": FrameField.constant([0.0, -1.0, 0.0]),
    }
    table = energy_restitution_table(p_left, p_right, frames, ctx.metric)
    assert table["h0"] == pytest.approx(1.0)
    assert table["h1"] == pytest.approx(0.0, abs=1e-12)
    assert table["h2"] is None
    assert kinetic_energy(p_right, frames["h2"], ctx.metric) == pytest.approx(2.0)


def test__totally_inelastic__energy_restitution_depends_on_the_frame() -> None:
    ctx = rod_context()
    ydot0 = 1.0
    p_left = TimelikeVelocity(ctx.point, [0.0, -ydot0, 0.0])
    p_right = totally_inelastic(p_left, ctx).p_right
    assert p_right.p == pytest.approx([0.0, 0.0, 0.0], abs=1e-12)
    for Hx in np.linspace(0.1, 4.0, 20):
        table = energy_restitution_table(p_left, p_right, {"h": FrameField.constant([Hx, 0.0, 0.0])}, ctx.metric)
        assert table["h"] == pytest.approx(Hx**2 / (Hx**2 + ydot0**2), rel=1e-10)


def test__newton_restitution__bouncing_point() -> None:
    ctx = floor_context()
    resolution = newton_restitution(TimelikeVelocity(ctx.point, [-2.0]), ctx, 0.5)
    assert resolution.p_right.p == pytest.approx([1.0])
    assert resolution.diagnostics["epsilon"] == 0.5
    with pytest.raises(LawError):
        newton_restitution(TimelikeVelocity(ctx.point, [-2.0]), ctx, 1.5)


def test__newton_restitution__interpolates_between_the_inelastic_and_the_elastic_impact() -> None:
    rng = np.random.default_rng(3)
    ctx = rod_context(M=2.0, L=0.7)
    for _ in range(20):
        u, v, w = rng.normal(size=3)
        p_left = TimelikeVelocity(ctx.point, [u, -abs(v) - 0.1, w])
        inelastic = newton_restitution(p_left, ctx, 0.0)
        elastic = newton_restitution(p_left, ctx, 1.0)
        assert inelastic.p_right.p.tolist() == totally_inelastic(p_left, ctx).p_right.p.tolist()
        assert elastic.p_right.p.tolist() == ideal_reflection(p_left, ctx).p_right.p.tolist()


def test__newton_restitution__with_a_parameter_that_depends_on_the_impact_speed() -> None:
    ctx = floor_context()
    law = NewtonRestitution(epsilon=Parameter(lambda q: min(1.0, q["vperp"] / 4.0), "vperp/4"))
    assert law.resolve(TimelikeVelocity(ctx.point, [-2.0]), ctx).p_right.p == pytest.approx([1.0])
    assert law.resolve(TimelikeVelocity(ctx.point, [-1.0]), ctx).p_right.p == pytest.approx([0.25])


def test__laws__reject_exiting_left_velocities() -> None:
    ctx = rod_context()
    with pytest.raises(LawError, match="not entering"):
        ideal_reflection(TimelikeVelocity(ctx.point, [0.0, 1.0, 0.0]), ctx)


def test__impact_context__must_be_on_the_surface() -> None:
    ctx = rod_context()
    with pytest.raises(LawError, match="not on"):
        ImpactContext(point=SpacetimePoint(0.0, [0.0, 2.0, math.pi / 2]), metric=ctx.metric, surface=ctx.surface)


def test__breakable_factors__are_one_at_the_threshold() -> None:
    for xi in (0.3, 1.0, 2.0, 7.5):
        assert saturating_factor(xi, xi) == 1.0
        assert lowspeed_factor(xi, xi) == 1.0
    assert saturating_factor(0.0, 2.0) == 2.0
    assert lowspeed_factor(0.0, 2.0) == 0.0
    with pytest.raises(LawError):
        saturating_factor(1.0, 0.0)


def test__breakable_laws__break_on_the_right_side_of_the_threshold() -> None:
    rng = np.random.default_rng(42)
    ctx = floor_context()
    for _ in range(1000):
        n, xi = rng.uniform(0.05, 5.0, size=2)
        p_left = TimelikeVelocity(ctx.point, [-n])

        saturating = breakable_saturating(p_left, ctx, xi)
        factor = 2.0 * xi**2 / (xi**2 + n**2)
        assert saturating.broken == (frozenset({"floor"}) if n > xi else frozenset())
        assert saturating.diagnostics["factor"] == pytest.approx(factor, abs=1e-12)
        assert saturating.p_right.p == pytest.approx([n * (factor - 1.0)], abs=1e-12)
        check_resolution(saturating, ctx)

        lowspeed = breakable_lowspeed(p_left, ctx, xi)
        factor = 2.0 * n**2 / (xi**2 + n**2)
        assert lowspeed.broken == (frozenset({"floor"}) if n < xi else frozenset())
        assert lowspeed.diagnostics["factor"] == pytest.approx(factor, abs=1e-12)
        assert lowspeed.p_right.p == pytest.approx([n * (factor - 1.0)], abs=1e-12)
        check_resolution(lowspeed, ctx)


def test__breakable_laws__are_totally_inelastic_at_the_threshold() -> None:
    rng = np.random.default_rng(5)
    ctx = rod_context(M=2.0, L=0.7)
    assert ctx.surface is not None
    for _ in range(20):
        u, v, w = rng.normal(size=3)
        p_left = TimelikeVelocity(ctx.point, [u, -abs(v) - 0.1, w])
        xi = metric_norm(split_positional(p_left, ctx.surface, ctx.metric).vperp, ctx.metric)
        inelastic = totally_inelastic(p_left, ctx).p_right.p.tolist()
        for law in (breakable_saturating, breakable_lowspeed):
            resolution = law(p_left, ctx, xi)
            assert resolution.broken == frozenset()
            assert resolution.diagnostics["factor"] == 1.0
            assert resolution.p_right.p.tolist() == inelastic


def test__breakable_lowspeed__grazing_contact_breaks_nothing() -> None:
    ctx = floor_context(dim=2)
    resolution = breakable_lowspeed(TimelikeVelocity(ctx.point, [1.0, 0.0]), ctx, 1.0)
    assert resolution.broken == frozenset()
    assert resolution.p_right.p == pytest.approx([1.0, 0.0])


def disk_wall_context() -> ImpactContext:
    R, W = 0.5, 1.0
    S = PositionalConstraint("S", (linear_field([-1.0, 0.0], W),), orientations=(1,))
    A = KineticConstraint("A", (KineticRow.constant([1.0, R]),))
    return ImpactContext(
        point=SpacetimePoint(0.0, [W, 0.0]),
        metric=MassMetric.diagonal([1.0, 0.125]),
        surface=S,
        kinetic=A,
    )


def test__disk_wall_breakable__keeps_rolling_below_the_threshold() -> None:
    ctx = disk_wall_context()
    p_left = TimelikeVelocity(ctx.point, [1.0, -2.0])
    resolution = disk_wall_breakable(p_left, ctx, 1.0, 1.0, 2.0)
    assert resolution.broken == frozenset()
    assert resolution.p_right.p == pytest.approx([-1.0, 2.0])
    assert ctx.kinetic is not None
    assert ctx.kinetic.residuals(resolution.p_right) == pytest.approx([0.0], abs=1e-12)
    static = FrameField.static(2)
    assert kinetic_energy(resolution.p_right, static, ctx.metric) == pytest.approx(
        kinetic_energy(p_left, static, ctx.metric)
    )
    check_resolution(resolution, ctx)


def test__disk_wall_breakable__breaks_rolling_above_the_threshold() -> None:
    ctx = disk_wall_context()
    p_left = TimelikeVelocity(ctx.point, [1.0, -2.0])
    resolution = disk_wall_breakable(p_left, ctx, 1.0, 1.0, 0.5)
    assert resolution.broken == frozenset({"A"})
    assert resolution.p_right.p == pytest.approx([-1.0, -2.0])
    assert ctx.kinetic is not None
    assert ctx.kinetic.residuals(resolution.p_right) == pytest.approx([-2.0])
    check_resolution(resolution, ctx)


def test__rest_frame_friction__uses_the_velocity_relative_to_the_rest_frame() -> None:
    law = RestFrameFriction(epsilon=Parameter.of(0.5), mu=Parameter.of(0.2))

    ctx = floor_context(dim=2, rest_frame=FrameField.static(2))
    p_left = TimelikeVelocity(ctx.point, [1.0, -1.0])
    resolution = law.resolve(p_left, ctx)
    assert resolution.impulse.V == pytest.approx([-0.2, 1.5])
    assert resolution.p_right.p == pytest.approx([0.8, 0.5])

    moving = floor_context(dim=2, rest_frame=FrameField.constant([0.5, 0.0]))
    resolution = law.resolve(TimelikeVelocity(moving.point, [1.0, -1.0]), moving)
    assert resolution.p_right.p == pytest.approx([0.9, 0.5])


def test__rest_frame_friction__rejects_frames_that_are_not_at_rest() -> None:
    ctx = floor_context(dim=2, rest_frame=FrameField.constant([0.0, 1.0]))
    with pytest.raises(LawError, match="rest frames"):
        RestFrameFriction(alpha=Parameter.of(-1.0), beta=Parameter.of(0.0)).resolve(
            TimelikeVelocity(ctx.point, [1.0, -1.0]), ctx
        )
    with pytest.raises(LawError, match="rest frame"):
        RestFrameFriction(alpha=Parameter.of(-1.0), beta=Parameter.of(0.0)).resolve(
            TimelikeVelocity(ctx.point, [1.0, -1.0]), floor_context(dim=2)
        )
    with pytest.raises(LawError, match="exactly one"):
        RestFrameFriction(alpha=Parameter.of(-1.0), epsilon=Parameter.of(0.5), beta=Parameter.of(0.0))


def test__rest_frame_friction__scales_the_anisotropy_direction() -> None:
    S = PositionalConstraint(
        "floor", (linear_field([0.0, 0.0, 1.0]),), orientations=(1,), anisotropy=lambda t, x: [1.0, 0.0, 0.0]
    )
    ctx = ImpactContext(
        point=SpacetimePoint(0.0, [0.0, 0.0, 0.0]),
        metric=MassMetric.diagonal([1.0, 1.0, 1.0]),
        surface=S,
        rest_frame=FrameField.static(3),
    )
    law = RestFrameFriction(epsilon=Parameter.of(0.5), mu=Parameter.of(0.2), anisotropy_gain=Parameter.of(2.0))
    resolution = law.resolve(TimelikeVelocity(ctx.point, [1.0, 1.0, -1.0]), ctx)
    assert resolution.impulse.V == pytest.approx([-0.4, -0.2, 1.5])


def coaster_context(active: list[float]) -> ImpactContext:
    R = 0.5
    A = KineticConstraint(
        "A",
        (
            KineticRow.constant([1.0, 0.0, 0.0, R]),
            KineticRow.constant([0.0, 1.0, 0.0, 0.0]),
            KineticRow.constant([0.0, 0.0, 0.0, 1.0], relation=Relation.GE),
        ),
    )
    point = SpacetimePoint(0.5, [0.0, 0.0, 0.0, 0.0])
    return ImpactContext(
        point=point,
        metric=MassMetric.diagonal([1.0, 1.0, 0.0625, 0.125]),
        kinetic=A,
        active_impulse=SpacelikeVector(point, active),
    )


def test__kinetic_ideal_with_active__cancels_the_orthogonal_part_of_the_push() -> None:
    ctx = coaster_context([1.5, 0.0, 0.0, 0.0])
    p_left = TimelikeVelocity(ctx.point, [-0.5, 0.0, 0.0, 1.0])
    resolution = kinetic_ideal_with_active(p_left, ctx)
    assert resolution.impulse.V == pytest.approx([-0.5, 0.0, 0.0, -2.0])
    assert resolution.p_right.p == pytest.approx([0.5, 0.0, 0.0, -1.0])
    check_resolution(resolution, ctx)


def test__kinetic_ideal_with_active__ignores_the_orthogonal_part_of_the_push() -> None:
    rng = np.random.default_rng(11)
    ginv = 1.0 / np.array([1.0, 1.0, 0.0625, 0.125])
    rows = np.array([[1.0, 0.0, 0.0, 0.5], [0.0, 1.0, 0.0, 0.0]])
    for _ in range(50):
        active = rng.normal(size=4)
        orthogonal = ginv * (rows.T @ rng.normal(size=2))
        ctx = coaster_context(active.tolist())
        p_left = TimelikeVelocity(ctx.point, [-0.5, 0.0, 0.0, 1.0])
        pushed = kinetic_ideal_with_active(p_left, coaster_context((active + orthogonal).tolist()))
        assert pushed.p_right.p == pytest.approx(kinetic_ideal_with_active(p_left, ctx).p_right.p, abs=1e-12)
        assert ctx.kinetic is not None
        assert ctx.kinetic.equalities().residuals(pushed.p_right) == pytest.approx([0.0, 0.0], abs=1e-12)


def test__inelastic_clamp__brings_the_braked_disk_to_rest() -> None:
    ctx = coaster_context([0.0, 0.0, 0.0, 0.0])
    assert ctx.kinetic is not None
    p_left = TimelikeVelocity(ctx.point, [0.5, 0.0, 0.0, -1.0])
    resolution = inelastic_clamp_kinetic(p_left, ctx.kinetic, ctx.metric)
    assert resolution.p_right.p == pytest.approx([0.0, 0.0, 0.0, 0.0], abs=1e-12)
    assert resolution.diagnostics["clamped"] == 3.0

    admissible = TimelikeVelocity(ctx.point, [-0.5, 0.0, 0.0, 1.0])
    unchanged = inelastic_clamp_kinetic(admissible, ctx.kinetic, ctx.metric)
    assert unchanged.impulse.V.tolist() == [0.0, 0.0, 0.0, 0.0]

    with pytest.raises(LawError, match="active impulse"):
        InelasticClamp().resolve(p_left, ctx)


def test__coulomb_with_active__slides_or_sticks() -> None:
    S = PositionalConstraint("S", (linear_field([0.0, 1.0]),), unilateral=(False,))
    point = SpacetimePoint(0.0, [0.0, 0.0])
    ctx = ImpactContext(
        point=point,
        metric=MassMetric.diagonal([1.0, 1.0]),
        surface=S,
        active_impulse=SpacelikeVector(point, [1.0, -2.0]),
    )
    p_left = TimelikeVelocity(point, [1.0, 0.0])

    sliding = coulomb_with_active(p_left, ctx, 0.2)
    assert sliding.p_right.p == pytest.approx([1.6, 0.0])
    assert sliding.diagnostics["sticking"] == 0.0

    sticking = coulomb_with_active(p_left, ctx, 1.0)
    assert sticking.p_right.p == pytest.approx([1.0, 0.0])
    assert sticking.diagnostics["sticking"] == 1.0

    with pytest.raises(LawError):
        coulomb_with_active(p_left, ctx, -0.1)


def test__free_impulse__adds_the_push() -> None:
    point = SpacetimePoint(0.0, [0.0, 0.0])
    ctx = ImpactContext(
        point=point, metric=MassMetric.diagonal([1.0, 1.0]), active_impulse=SpacelikeVector(point, [1.0, 2.0])
    )
    resolution = free_impulse(TimelikeVelocity(point, [0.5, 0.5]), ctx)
    assert resolution.p_right.p == pytest.approx([1.5, 2.5])
    assert resolution.impulse.V.tolist() == [0.0, 0.0]


@dataclasses.dataclass(frozen=True)
class DoNothing(ConstitutiveLaw):
    tag: ClassVar[str] = "do_nothing"

    def resolve(self, p_left: TimelikeVelocity, ctx: ImpactContext) -> ImpactResolution:
        return resolve(self.tag, p_left, ctx, SpacelikeVector.zero(p_left.base))


def test__check_resolution__rejects_a_law_that_leaves_the_velocity_entering() -> None:
    ctx = floor_context()
    resolution = DoNothing().resolve(TimelikeVelocity(ctx.point, [-1.0]), ctx)
    with pytest.raises(LawContractError, match="do_nothing"):
        check_resolution(resolution, ctx)
    check_resolution(dataclasses.replace(resolution, broken=frozenset({"floor"})), ctx)


def test__create_law__from_the_registry() -> None:
    law = create_law("newton", {"epsilon": 0.5})
    assert isinstance(law, NewtonRestitution)
    assert law.epsilon({}) == 0.5
    assert law.target == "S"
    assert create_law("ideal_reflection", {"target": "S+A"}).target == "S+A"  # type: ignore[attr-defined]

    with pytest.raises(LawError) as excinfo:
        create_law("newtn", {})
    for tag in LAWS:
        assert tag in str(excinfo.value)

    with pytest.raises(LawError, match="no parameter"):
        create_law("newton", {"epsilon": 0.5, "mu": 0.1})
    with pytest.raises(LawError, match="must be a string"):
        create_law("ideal_reflection", {"target": 1.0})
    with pytest.raises(LawError):
        create_law("newton", {})
