"""Forward invariance of the state domain under the fast field."""

import numpy as np
import pytest

from reeftip.integrate import integrate_stiff
from reeftip.model_core import fast_jacobian, rhs_fast
from reeftip.models import IntegratorConfig, ModelParams

pytestmark = [pytest.mark.integration, pytest.mark.timeout(600)]

SLACK = 1e-8


class TestDomainInvariance:
    """Test trajectories started in the domain stay in it."""

    def test_random_states(self) -> None:
        """Test 1000 random starts and parameters keep H >= 0 and A, C in [0, 1]."""
        rng = np.random.default_rng(2025)
        config = IntegratorConfig(rtol=1e-8, atol=1e-11)
        for _ in range(1000):
            params = ModelParams(
                lam=rng.uniform(0.05, 1.0),
                beta=rng.uniform(0.0, 0.9),
                d=rng.uniform(0.05, 0.5),
                epsilon=rng.uniform(2.5e-3, 0.05),
            )
            alpha = rng.uniform(0.01, 1.0)
            y0 = [rng.uniform(0.0, 5.0), rng.uniform(0.0, 1.0), rng.uniform(0.0, 1.0)]
            traj = integrate_stiff(
                lambda _t, y, p=params, a=alpha: rhs_fast(y, a, p),
                y0,
                (0.0, 20.0),
                config,
                jac=lambda _t, y, p=params, a=alpha: fast_jacobian(y, a, p),
            )
            H, A, C = traj.y[:, 0], traj.y[:, 1], traj.y[:, 2]
            assert np.all(H >= -SLACK), (params, alpha, y0)
            assert np.all((A >= -SLACK) & (A <= 1.0 + SLACK)), (params, alpha, y0)
            assert np.all((C >= -SLACK) & (C <= 1.0 + SLACK)), (params, alpha, y0)
