"""Unit tests for folded singularities, r_crit and region labels."""

import logging

import numpy as np
import pytest
from scipy.optimize import brentq

from reeftip.exceptions import NotBistableError, PreconditionError
from reeftip.folded import (
    ANCHOR_H_HAT,
    ANCHOR_H_I,
    classify_folded,
    critical_rate,
    discriminant,
    discriminant_slope_at_zero,
    find_folded_singularities,
    in_funnel,
    region_classify,
    relevant_singularity,
)
from reeftip.manifold import bistability_screen, threshold_set
from reeftip.model_core import f_function, fold_curve_alpha, rhs_desingularized
from reeftip.models import FoldedKind, ModelParams, Region

R_FIG = 4e-3

# Delta = 0 and the node eigenvalue ratio evaluated at 40 digits. The
# often-quoted values 4.6602e-6 and 20.4255 sit about 0.4% and 2% away.
R_CRIT_REF = 4.6768374e-6
QUOTED_R_CRIT = 4.6602e-6
MU_REF = 19.9791562
QUOTED_MU = 20.4255


def _separated_bistable(rng: np.random.Generator, n: int) -> list[ModelParams]:
    """Return n random bistable parameter sets away from the curve H_I = H_hat."""
    found: list[ModelParams] = []
    while len(found) < n:
        params = ModelParams(
            lam=rng.uniform(0.1, 0.8), beta=rng.uniform(0.05, 0.45), d=0.22
        )
        if not bistability_screen(params):
            continue
        ts = threshold_set(params)
        if abs(ts.H_I - ts.H_hat) > 0.05 * (1.0 + ts.H_hat):
            found.append(params)
    return found


class TestFindFoldedSingularities:
    """Test the roots of F on the fold curve."""

    def test_zero_rate_roots(self, region_ii_params: ModelParams) -> None:
        """Test r = 0 gives exactly H_hat and H_I."""
        ts = threshold_set(region_ii_params)
        found = find_folded_singularities(region_ii_params, 0.0)
        assert [p.H for p in found] == sorted([ts.H_hat, ts.H_I])
        assert {p.anchor for p in found} == {ANCHOR_H_HAT, ANCHOR_H_I}

    def test_small_rate_moves_roots_apart(self, region_ii_params: ModelParams) -> None:
        """Test the H_hat root moves down and the H_I root up as r grows."""
        ts = threshold_set(region_ii_params)
        first = find_folded_singularities(region_ii_params, 1e-6)
        second = find_folded_singularities(region_ii_params, 2e-6)
        assert len(first) == 2
        assert first[0].anchor == ANCHOR_H_HAT
        assert first[0].H < ts.H_hat
        assert first[1].H > ts.H_I
        assert second[0].H < first[0].H
        assert second[1].H > first[1].H

    def test_roots_are_equilibria(self, region_ii_params: ModelParams) -> None:
        """Test each singularity zeroes the desingularised field."""
        for p in find_folded_singularities(region_ii_params, R_FIG):
            dh, da = rhs_desingularized(p.H, p.alpha, region_ii_params, R_FIG)
            assert abs(dh) < 1e-10
            assert abs(da) < 1e-10
            assert p.alpha == pytest.approx(fold_curve_alpha(p.H, region_ii_params))

    def test_rate_out_of_range(self, region_ii_params: ModelParams) -> None:
        """Test ramp rates above 0.1 are refused."""
        with pytest.raises(PreconditionError, match=r"ramp rate must lie"):
            find_folded_singularities(region_ii_params, 0.5)


class TestClassifyFolded:
    """Test node / focus / saddle classification."""

    def test_folded_node(self) -> None:
        """Test beta = 0.15, lambda = 0.7 gives a folded node."""
        p = relevant_singularity(ModelParams(lam=0.7, beta=0.15, d=0.22), R_FIG)
        assert p is not None
        assert p.kind is FoldedKind.NODE
        assert p.relevant

    def test_folded_focus(self) -> None:
        """Test beta = lambda = 0.4 gives a folded focus."""
        p = relevant_singularity(ModelParams(lam=0.4, beta=0.4, d=0.22), R_FIG)
        assert p is not None
        assert p.kind is FoldedKind.FOCUS
        assert p.eigenvalues[0].imag != 0

    def test_eigenvalue_ratio(self, node_params: ModelParams) -> None:
        """Test mu and the sector count for beta = 0.15, lambda = 0.5."""
        p = relevant_singularity(node_params, R_FIG)
        assert p is not None
        assert p.kind is FoldedKind.NODE
        assert p.mu == pytest.approx(MU_REF, rel=1e-6)
        assert p.mu == pytest.approx(QUOTED_MU, abs=0.5)
        assert p.sectors == 9
        assert p.strong_direction is not None
        assert p.weak_direction is not None

    def test_off_singularity(self, region_ii_params: ModelParams) -> None:
        """Test a point off the fold is refused."""
        with pytest.raises(PreconditionError, match=r"not a folded singularity"):
            classify_folded(0.5, 0.3, region_ii_params, R_FIG)

    def test_zero_rate_hat_root_is_degenerate(
        self, region_ii_params: ModelParams
    ) -> None:
        """Test Delta vanishes at H_hat for r = 0."""
        found = find_folded_singularities(region_ii_params, 0.0)
        hat = next(p for p in found if p.anchor == ANCHOR_H_HAT)
        assert abs(hat.delta) < 1e-12


class TestDiscriminant:
    """Test Delta along the singularity branches."""

    def test_values_at_zero(self, region_ii_params: ModelParams) -> None:
        """Test Delta(0) = 0 at H_hat and tr**2 > 0 at H_I."""
        assert abs(discriminant(region_ii_params, 0.0, ANCHOR_H_HAT)) < 1e-20
        at_i = discriminant(region_ii_params, 0.0, ANCHOR_H_I)
        found = find_folded_singularities(region_ii_params, 0.0)
        p_i = next(p for p in found if p.anchor == ANCHOR_H_I)
        assert at_i > 0
        assert at_i == pytest.approx(p_i.trace**2, rel=1e-9)

    def test_slope_at_zero(self, region_ii_params: ModelParams) -> None:
        """Test the analytic slope against Delta(r) / r for tiny r."""
        slope = discriminant_slope_at_zero(region_ii_params)
        assert slope < 0
        r = 1e-10
        assert discriminant(region_ii_params, r) / r == pytest.approx(slope, rel=1e-4)


class TestCriticalRate:
    """Test the focus-to-node transition rate."""

    def test_reference_value(self, region_ii_params: ModelParams) -> None:
        """Test r_crit for beta = lambda = 0.2."""
        r_crit = critical_rate(region_ii_params)
        assert r_crit is not None
        assert r_crit == pytest.approx(R_CRIT_REF, rel=1e-6)
        assert r_crit == pytest.approx(QUOTED_R_CRIT, rel=5e-3)
        assert abs(discriminant(region_ii_params, r_crit)) < 1e-10

    def test_kind_changes_across_r_crit(self, region_ii_params: ModelParams) -> None:
        """Test focus below r_crit and node above it."""
        r_crit = critical_rate(region_ii_params)
        assert r_crit is not None
        below = relevant_singularity(region_ii_params, 0.5 * r_crit)
        above = relevant_singularity(region_ii_params, 2.0 * r_crit)
        assert below is not None
        assert above is not None
        assert below.kind is FoldedKind.FOCUS
        assert above.kind is FoldedKind.NODE

    def test_region_one_has_none(self, region_i_params: ModelParams) -> None:
        """Test node-for-all-small-r parameters have no critical rate."""
        assert critical_rate(region_i_params) is None


class TestRegionClassify:
    """Test the I / II / IIIa / IIIb labels."""

    @pytest.mark.parametrize(
        ("beta", "lam", "region"),
        [
            (0.18, 0.5, Region.I),
            (0.2, 0.2, Region.II),
            (0.3, 0.4, Region.IIIA),
        ],
    )
    def test_reference_labels(self, beta: float, lam: float, region: Region) -> None:
        """Test the labels of the reference parameter sets at r = 4e-3."""
        label = region_classify(beta, lam, 0.22, R_FIG)
        assert label.region is region

    def test_region_iiia_below_alpha_plus(
        self, region_iii_params: ModelParams
    ) -> None:
        """Test the focus sits below alpha_plus in IIIa."""
        label = region_classify(0.3, 0.4, 0.22, R_FIG)
        assert label.alpha_fs < label.alpha_plus
        assert label.small_r_kind is FoldedKind.FOCUS
        assert label.singularity is not None
        assert label.singularity.H == pytest.approx(
            relevant_singularity(region_iii_params, R_FIG).H
        )

    def test_region_ii_vanishes_as_rate_drops(self) -> None:
        """Test beta = lambda = 0.2 is IIIa or IIIb, not II, for tiny r."""
        label = region_classify(0.2, 0.2, 0.22, 1e-10)
        assert label.region in (Region.IIIA, Region.IIIB)

    def test_not_bistable(self) -> None:
        """Test monostable parameters are refused."""
        with pytest.raises(NotBistableError, match=r"not bistable"):
            region_classify(0.8, 0.2, 0.22, R_FIG)


class TestAttractingSingularity:
    """Test the relevant singularity attracts for small rates."""

    @pytest.mark.parametrize("r", [1e-8, 1e-6, 1e-4])
    def test_trace_and_determinant(self, r: float) -> None:
        """Test tr J < 0 and det J > 0 at random bistable points."""
        for params in _separated_bistable(np.random.default_rng(21), 20):
            p = relevant_singularity(params, r)
            assert p is not None
            assert p.trace < 0
            assert p.det > 0
            assert p.kind in (FoldedKind.NODE, FoldedKind.FOCUS)


class TestRootOracle:
    """Test folded singularities against a finer independent root scan."""

    def test_random_parameter_sets(self) -> None:
        """Test every root matches a dense-scan brentq root to 1e-10."""
        rng = np.random.default_rng(22)
        grid = np.geomspace(1e-10, 1e4, 20_000)
        for params in _separated_bistable(rng, 100):
            r = float(10.0 ** rng.uniform(-8.0, -4.0))
            values = f_function(grid, params, r)
            brackets = np.flatnonzero(np.sign(values[:-1]) * np.sign(values[1:]) < 0)
            oracle = [
                brentq(
                    lambda H: float(f_function(H, params, r)),
                    grid[k],
                    grid[k + 1],
                    xtol=1e-14,
                    rtol=1e-15,
                )
                for k in brackets
            ]
            found = [p.H for p in find_folded_singularities(params, r)]
            assert len(found) == len(oracle)
            np.testing.assert_allclose(found, oracle, rtol=0.0, atol=1e-10)


class TestFunnel:
    """Test membership of the folded-node funnel."""

    @pytest.fixture
    def node(self, node_params: ModelParams):  # noqa: ANN201
        """Return the governing folded node at r = 4e-3."""
        return relevant_singularity(node_params, R_FIG)

    def test_point_next_to_fold(self, node_params: ModelParams, node) -> None:  # noqa: ANN001
        """Test a point just on the attracting side below the node is inside."""
        H = node.H - 1e-3 * (1.0 + node.H)
        alpha = float(fold_curve_alpha(H, node_params)) - 1e-9
        assert in_funnel(H, alpha, node, node_params)

    def test_above_node(self, node_params: ModelParams, node) -> None:  # noqa: ANN001
        """Test points at or past the node's alpha are outside."""
        assert not in_funnel(node.H, node.alpha + 1e-3, node, node_params)

    def test_repelling_side(self, node_params: ModelParams, node) -> None:  # noqa: ANN001
        """Test points with Q <= 0 are outside."""
        H = 0.5 * node.H
        alpha = float(fold_curve_alpha(H, node_params)) + 0.01
        assert not in_funnel(H, min(alpha, node.alpha - 1e-3), node, node_params)

    def test_focus_has_no_funnel(self, region_ii_params: ModelParams) -> None:
        """Test a focus never reports funnel membership."""
        focus = relevant_singularity(region_ii_params, 1e-6)
        assert focus is not None
        assert not in_funnel(focus.H, focus.alpha - 0.01, focus, region_ii_params)


def test_boundary_warning_logged(caplog: pytest.LogCaptureFixture) -> None:
    """Test near-coincident thresholds log a boundary warning."""
    from reeftip.manifold import bifurcation_curve_lambda  # noqa: PLC0415

    lam_c = bifurcation_curve_lambda(0.15, 0.22)
    assert lam_c is not None
    with caplog.at_level(logging.WARNING):
        label = region_classify(0.15, lam_c, 0.22, R_FIG)
    if label.region is Region.BOUNDARY:
        assert any("boundary" in rec.getMessage() for rec in caplog.records)
    else:
        assert label.small_r_kind is FoldedKind.DEGENERATE or label.region in (
            Region.I,
            Region.II,
            Region.IIIA,
            Region.IIIB,
        )
