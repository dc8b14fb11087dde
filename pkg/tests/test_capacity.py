"""Energies, capacities, parabolic dimension, hitting MC, image geometry."""

from __future__ import annotations

import math

import numpy as np
import pytest
from scipy import integrate

from landscape_lab.capacity import (
    CompactSetSpec,
    GridMeasure,
    bessel_riesz_energy,
    capacity,
    dilate,
    hitting_mc,
    image_geometry,
    parabolic_dim,
    projected_gradient_capacity,
    thermal_energy,
)
from landscape_lab.errors import DomainError
from landscape_lab.rng import RngStream


SEGMENT = CompactSetSpec.box(time=(0.0, 1.0), space=(0.0, 0.0))


# ---------------------------------------------------------------------------
# Set specs and measures
# ---------------------------------------------------------------------------


def test_spec_validation() -> None:
    with pytest.raises(DomainError):
        CompactSetSpec(kind="blob")
    with pytest.raises(DomainError):
        CompactSetSpec.box(time=(1.0, 0.0), space=(0.0, 0.0))
    with pytest.raises(DomainError):
        CompactSetSpec(kind="points")
    assert CompactSetSpec.empty().kind == "empty"


def test_dilate() -> None:
    d = dilate(SEGMENT, 4.0, 2.0)
    assert d.time == (0.0, 4.0)
    pts = CompactSetSpec(kind="points", points=((1.0, 2.0),))
    dp = dilate(pts, 4.0, 2.0)
    assert dp.points == ((4.0, 4.0),)
    assert dilate(CompactSetSpec.empty(), 2.0, 2.0).kind == "empty"
    with pytest.raises(DomainError):
        dilate(SEGMENT, 0.0, 1.0)


def test_measure_validation() -> None:
    with pytest.raises(DomainError):
        GridMeasure(t_lo=[0.0], t_hi=[1.0], x_lo=[0.0], x_hi=[1.0], weights=[0.5])
    with pytest.raises(DomainError):
        GridMeasure(t_lo=[0.0], t_hi=[-1.0], x_lo=[0.0], x_hi=[0.0], weights=[1.0])
    with pytest.raises(DomainError):
        GridMeasure(t_lo=[0.0, 0.5], t_hi=[0.5, 1.0], x_lo=[0.0, 0.0], x_hi=[0.0, 0.0], weights=[1.5, -0.5])
    with pytest.raises(DomainError):
        GridMeasure.uniform(SEGMENT, m=0)
    with pytest.raises(DomainError):
        GridMeasure.uniform(CompactSetSpec.empty())
    mu = GridMeasure.uniform(SEGMENT, m=8)
    assert mu.n_cells == 8
    assert float(mu.weights.sum()) == pytest.approx(1.0, abs=1e-12)


# ---------------------------------------------------------------------------
# Energies
# ---------------------------------------------------------------------------


def test_segment_energy_closed_form() -> None:
    # Uniform on the unit time segment: both kernels reduce to |t-s|^{-1/2},
    # whose double integral is 8/3.
    mu = GridMeasure.uniform(SEGMENT, m=64)
    assert thermal_energy(mu) == pytest.approx(8.0 / 3.0, rel=0.01)
    assert bessel_riesz_energy(mu) == pytest.approx(8.0 / 3.0, rel=0.01)


def test_atoms_have_infinite_energy() -> None:
    two = CompactSetSpec(kind="points", points=((0.0, 0.0), (0.5, 0.3)))
    mu = GridMeasure.uniform(two)
    assert thermal_energy(mu) == math.inf
    assert bessel_riesz_energy(mu) == math.inf


def test_thermal_energy_rejects_negative_gamma() -> None:
    mu = GridMeasure.uniform(SEGMENT, m=4)
    with pytest.raises(DomainError):
        thermal_energy(mu, gamma=-0.5)


def test_parabolic_scaling_halves_energy() -> None:
    # Dilating time by 4 and space by 2 is a parabolic dilation by r = 2;
    # both gamma = 0 kernels are parabolically -1 homogeneous.
    m = 48
    base = GridMeasure.uniform(SEGMENT, m=m)
    big = GridMeasure.uniform(dilate(SEGMENT, 4.0, 2.0), m=m)
    assert thermal_energy(big) == pytest.approx(thermal_energy(base) / 2.0, rel=1e-6)
    assert bessel_riesz_energy(big) == pytest.approx(bessel_riesz_energy(base) / 2.0, rel=1e-6)


@pytest.mark.filterwarnings("ignore::scipy.integrate.IntegrationWarning")
def test_square_energies_match_quadrature_oracle() -> None:
    # Independent oracle: reduce the 4-fold integral with triangular
    # difference densities, then substitute u = w^2 to kill the square-root
    # singularity before handing it to dblquad.
    square = CompactSetSpec.box(time=(0.0, 1.0), space=(0.0, 1.0))
    mu = GridMeasure.uniform(square, m=12)

    thermal_oracle, _ = integrate.dblquad(
        lambda v, w: 8.0 * math.exp(-v * v / (4.0 * w * w)) * (1.0 - w * w) * (1.0 - v),
        0.0, 1.0, 0.0, 1.0,
    )
    riesz_oracle, _ = integrate.dblquad(
        lambda v, w: 8.0 * w * (1.0 - w * w) * (1.0 - v) / (w + v),
        0.0, 1.0, 0.0, 1.0,
    )
    assert thermal_energy(mu) == pytest.approx(thermal_oracle, rel=0.02)
    assert bessel_riesz_energy(mu) == pytest.approx(riesz_oracle, rel=0.02)


def test_energy_invariant_under_cell_relabeling() -> None:
    mu = GridMeasure(
        t_lo=[0.0, 0.25, 0.5, 0.75],
        t_hi=[0.25, 0.5, 0.75, 1.0],
        x_lo=[0.0] * 4,
        x_hi=[0.0] * 4,
        weights=[0.4, 0.3, 0.2, 0.1],
    )
    perm = [2, 0, 3, 1]
    shuffled = GridMeasure(
        t_lo=mu.t_lo[perm], t_hi=mu.t_hi[perm], x_lo=mu.x_lo[perm], x_hi=mu.x_hi[perm],
        weights=mu.weights[perm],
    )
    assert thermal_energy(shuffled) == pytest.approx(thermal_energy(mu), rel=1e-12)


# ---------------------------------------------------------------------------
# Capacity
# ---------------------------------------------------------------------------


def test_segment_capacity_and_dual_route() -> None:
    rep = capacity(SEGMENT, kernel="thermal", m=48)
    assert rep.capacity == pytest.approx(3.0 / 8.0, rel=0.05)
    # The duality gap certifies how far the energy sits from optimal.
    assert rep.gap <= 1e-4 * rep.energy
    # Independent minimizer agrees.
    pg = projected_gradient_capacity(SEGMENT, kernel="thermal", m=48)
    assert pg.capacity == pytest.approx(rep.capacity, rel=5e-3)
    # Feasibility of the uniform measure bounds the minimum.
    uniform_energy = thermal_energy(GridMeasure.uniform(SEGMENT, m=48))
    assert rep.energy <= uniform_energy + 1e-9


def test_point_set_capacity_is_zero() -> None:
    rep = capacity(CompactSetSpec.point(0.3, 0.2))
    assert rep.capacity == 0.0 and rep.energy == math.inf
    pg = projected_gradient_capacity(CompactSetSpec.point(0.3, 0.2))
    assert pg.capacity == 0.0


def test_capacity_monotone_in_the_set() -> None:
    small = CompactSetSpec.box(time=(0.0, 0.5), space=(0.0, 0.0))
    c_small = capacity(small, kernel="thermal", m=32).capacity
    c_big = capacity(SEGMENT, kernel="thermal", m=32).capacity
    assert c_small <= c_big + 1e-3


def test_slice_capacities_hit_their_limits() -> None:
    # On a fixed-time slice the thermal kernel vanishes off the diagonal, so
    # every non-atomic measure has zero energy and the capacity is infinite;
    # the Bessel-Riesz kernel is |dx|^-(1+gamma) there, which no admissible
    # gamma makes integrable, so that capacity is zero.
    space_slice = CompactSetSpec.box(time=(0.0, 0.0), space=(0.0, 1.0))
    for g in (0.0, 0.5):
        rep = capacity(space_slice, kernel="thermal", gamma=g, m=16)
        assert rep.capacity == math.inf and rep.energy == 0.0
        rep = capacity(space_slice, kernel="riesz", gamma=g, m=16)
        assert rep.capacity == 0.0 and rep.energy == math.inf
    pg = projected_gradient_capacity(space_slice, kernel="thermal", m=16)
    assert pg.capacity == math.inf
    # The time segment loses Bessel-Riesz capacity once gamma reaches 1.
    assert capacity(SEGMENT, kernel="riesz", gamma=1.0, m=16).capacity == 0.0
    assert capacity(SEGMENT, kernel="riesz", gamma=0.5, m=16).capacity > 0.1


def test_capacity_validation() -> None:
    with pytest.raises(DomainError):
        capacity(CompactSetSpec.empty())
    with pytest.raises(DomainError):
        capacity(SEGMENT, kappa=0.5)
    with pytest.raises(DomainError):
        capacity(SEGMENT, kernel="coulomb")


# ---------------------------------------------------------------------------
# Parabolic dimension
# ---------------------------------------------------------------------------


def test_parabolic_dims_of_reference_sets() -> None:
    time_seg = SEGMENT
    space_seg = CompactSetSpec.box(time=(0.0, 0.0), space=(0.0, 1.0))
    square = CompactSetSpec.box(time=(0.0, 1.0), space=(0.0, 1.0))
    point = CompactSetSpec.point(0.0, 0.0)
    assert parabolic_dim(time_seg) == pytest.approx(2.0, abs=0.1)
    assert parabolic_dim(space_seg) == pytest.approx(1.0, abs=0.1)
    assert parabolic_dim(square) == pytest.approx(3.0, abs=0.1)
    assert parabolic_dim(point) == pytest.approx(0.0, abs=0.05)
    assert parabolic_dim(CompactSetSpec.empty()) == 0.0
    with pytest.raises(DomainError):
        parabolic_dim(SEGMENT, j_min=5, j_max=5)


def test_parabolic_dim_scale_consistency() -> None:
    # Doubling every scale moves the fitted slope by less than 0.05.
    a = parabolic_dim(SEGMENT, j_min=3, j_max=8)
    b = parabolic_dim(SEGMENT, j_min=4, j_max=9)
    assert abs(a - b) < 0.05


# ---------------------------------------------------------------------------
# Hitting probabilities
# ---------------------------------------------------------------------------


def test_hitting_zero_level_matches_arcsine_law() -> None:
    # P(BM has a zero in [1, 2]) = 1 - (2/pi) arcsin(sqrt(1/2)) = 1/2.
    spec = CompactSetSpec.box(time=(1.0, 2.0), space=(0.0, 0.0))
    rep = hitting_mc(spec, RngStream(51, stream_id=11), n_trials=10_000)
    assert rep.p_hat == pytest.approx(0.5, abs=0.02)
    assert rep.ci[0] < 0.5 < rep.ci[1]


def test_hitting_trivial_cases() -> None:
    assert hitting_mc(CompactSetSpec.empty(), RngStream(52, stream_id=11)).p_hat == 0.0
    pts = CompactSetSpec(kind="points", points=((1.0, 0.5),))
    assert hitting_mc(pts, RngStream(52, stream_id=11)).p_hat == 0.0
    past = CompactSetSpec.box(time=(-2.0, -1.0), space=(-1.0, 1.0))
    assert hitting_mc(past, RngStream(52, stream_id=11)).p_hat == 0.0
    wide = CompactSetSpec.box(time=(0.5, 1.0), space=(-1e3, 1e3))
    rep = hitting_mc(wide, RngStream(52, stream_id=11), n_trials=500)
    assert rep.p_hat == 1.0
    with pytest.raises(DomainError):
        hitting_mc(wide, RngStream(52, stream_id=11), n_trials=0)


def test_hitting_band_vs_level_consistency() -> None:
    # A thin band must hit at least as often as its centre level line.
    level = CompactSetSpec.box(time=(0.5, 1.5), space=(0.2, 0.2))
    band = CompactSetSpec.box(time=(0.5, 1.5), space=(0.15, 0.25))
    p_level = hitting_mc(level, RngStream(53, stream_id=11), n_trials=4_000).p_hat
    p_band = hitting_mc(band, RngStream(53, stream_id=11), n_trials=4_000).p_hat
    assert 0.0 < p_level < 1.0
    # Same stream key replays the same walks; the band can only add the
    # bridge-dip trials it shares, so compare with MC slack.
    assert p_band > p_level - 0.03


# ---------------------------------------------------------------------------
# Image geometry
# ---------------------------------------------------------------------------


def test_image_of_a_point_and_finite_sets() -> None:
    rep = image_geometry(np.array([0.7]))
    assert rep == type(rep)(box_dim=0.0, covering_length=0.0, n_distinct=1)
    seventeen = image_geometry(np.linspace(0.0, 1.0, 17))
    assert seventeen.box_dim == pytest.approx(0.0, abs=0.05)
    assert seventeen.n_distinct == 17
    with pytest.raises(DomainError):
        image_geometry(np.array([]))
    with pytest.raises(DomainError):
        image_geometry(np.array([0.0, np.nan]))


def test_image_of_an_interval_sample() -> None:
    vals = RngStream(54, stream_id=11).uniforms(4096)
    rep = image_geometry(vals)
    assert rep.box_dim == pytest.approx(1.0, abs=0.1)
    assert rep.covering_length == pytest.approx(float(vals.max() - vals.min()), rel=0.1)


def test_image_of_a_cantor_set() -> None:
    # Left endpoints of the level-8 middle-thirds construction; box dimension
    # log 2 / log 3.
    pts = np.array([0.0])
    for _ in range(8):
        pts = np.concatenate([pts / 3.0, pts / 3.0 + 2.0 / 3.0])
    rep = image_geometry(pts)
    assert rep.box_dim == pytest.approx(math.log(2) / math.log(3), abs=0.08)
