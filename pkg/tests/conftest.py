# -*- coding: UTF-8 -*-
#!/usr/bin/env python

import hypothesis
import numpy as np
import pytest

from tailfit.distributions import PowerLawModel, sample
from tailfit.histogram import SizeHistogram

np.seterr(all="warn")

hypothesis.settings.register_profile("fast", max_examples=10, deadline=None)
hypothesis.settings.register_profile("default", deadline=None)
hypothesis.settings.load_profile("default")


def pytest_addoption(parser):
    parser.addoption("--runslow", action="store_true", default=False, help="run statistical acceptance tests")


def pytest_collection_modifyitems(config, items):
    if config.getoption("--runslow"):
        return
    skip = pytest.mark.skip(reason="needs --runslow")
    for item in items:
        if "slow" in item.keywords:
            item.add_marker(skip)


def noiseless(model, k_hi, scale=1e15):
    """Histogram whose counts are the model pmf times ``scale``, rounded."""
    ks = np.arange(model.k_min, k_hi + 1)
    counts = np.rint(model.pmf_range(model.k_min, k_hi) * scale).astype(np.int64)
    return SizeHistogram.from_arrays(ks, counts)


def sampled(model, n, seed):
    return SizeHistogram.from_values(sample(model, n, seed))


@pytest.fixture
def powerlaw_hist():
    return sampled(PowerLawModel(2.5, 1), 20000, 11)
