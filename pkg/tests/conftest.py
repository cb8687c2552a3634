"""Shared fixtures: one small simulated dataset per model, reused widely."""

import numpy as np
import pytest

from pairsaddle import Ar1Model, GeostatModel, MvnModel, RngStream, RobustTuning

MVN_THETA = np.array([0.2, 1.3, 0.4])
AR1_THETA = np.array([0.3, 0.5, 1.2])
GEO_THETA = np.array([1.0, 5.0])

BOUNDED = RobustTuning(1.3, 1.3, 1.3)


@pytest.fixture(scope="session")
def mvn_model():
    return MvnModel(q=4)


@pytest.fixture(scope="session")
def mvn_data(mvn_model):
    return mvn_model.simulate(MVN_THETA, 40, RngStream(101).child(0))


@pytest.fixture(scope="session")
def ar1_model():
    return Ar1Model()


@pytest.fixture(scope="session")
def ar1_bounded_model():
    return Ar1Model(tuning=BOUNDED)


@pytest.fixture(scope="session")
def ar1_series(ar1_model):
    return ar1_model.simulate(AR1_THETA, 60, RngStream(102).child(0))


@pytest.fixture(scope="session")
def geo_model():
    return GeostatModel(q=8, block_side=2)


@pytest.fixture(scope="session")
def geo_bounded_model():
    return GeostatModel(q=8, block_side=2, tuning=BOUNDED)


@pytest.fixture(scope="session")
def geo_field(geo_model):
    return geo_model.simulate(GEO_THETA, 8, RngStream(103).child(0))
