import dataclasses

import numpy as np
import pytest

from risauth.channel import ChannelState
from risauth.config import ScenarioGeometry, default_geometry, default_params


@pytest.fixture
def params():
    return default_params()


@pytest.fixture
def geom():
    return default_geometry()


@pytest.fixture
def unit_params():
    """P_s = 1 W, continuous phases."""
    return dataclasses.replace(default_params(), source_power_dbm=30.0, ris_phase_bits=0)


@pytest.fixture
def unit_geom():
    return ScenarioGeometry(1.0, 1.0, 1.0, 1.0, 1.0, 1.0)


def ones_state(n, h_rt=1.0, h_te=1.0, h_re=1.0):
    return ChannelState(h_rt, np.ones(n), np.ones(n), h_te, h_re, np.ones(n))


def random_state(rng, n):
    cn = lambda *s: (rng.standard_normal(s) + 1j * rng.standard_normal(s)) / np.sqrt(2)
    return ChannelState(cn()[()], cn(n), cn(n), cn()[()], cn()[()], cn(n))
