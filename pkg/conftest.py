# Copyright (c) 2025, MBTLab and contributors
# For license information, please see license.txt

import numpy as np
import pytest

from mbtlab.mbtlab.lab_settings.lab_settings import LabSettings


@pytest.fixture
def rng():
	return np.random.default_rng(20250101)


@pytest.fixture
def quick_settings():
	"""Quick-scale settings with small tables and serial replicas."""
	return LabSettings({"scale": "quick", "workers": 1, "gw_table_cap": 256}).validate()
