import numpy as np
import pytest

import steadypop as sp


@pytest.fixture(scope="session")
def ce_ctx():
    """Counterexample model on the graded high-accuracy grid."""
    model = sp.counterexample_model(1.0)
    grid = sp.build_grid(40.0, 4001, "graded_trapezoid")
    return sp.make_context(model, grid)


@pytest.fixture(scope="session")
def hier_ctx():
    model = sp.hierarchical_model(g_low=0.5, g_high=1.0, mu0=1.0, b0=2.0)
    grid = sp.build_grid(sp.default_x_max(model.bounds), 4001, "graded_trapezoid")
    return sp.make_context(model, grid)


@pytest.fixture()
def const_ctx_factory():
    def make(mu0, g0, beta0, n=4001, scheme="graded_trapezoid"):
        model = sp.constant_model(mu0=mu0, g0=g0, beta0=beta0)
        grid = sp.build_grid(sp.default_x_max(model.bounds), n, scheme)
        return sp.make_context(model, grid)

    return make


def exp_profile(grid, scale=1.0, decay=1.0):
    return sp.DensityProfile(grid, scale * np.exp(-decay * grid.nodes))


def write_config(path, text):
    path.write_text(text)
    return str(path)
