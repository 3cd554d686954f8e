"""
Shared fixtures: the two reference configs and small sweep configs
"""

from pathlib import Path

import pytest

from pa_syntax import SemanticsConfig, load_config_file

ROOT = Path(__file__).resolve().parent


@pytest.fixture
def cfg0():
    return load_config_file(ROOT / "configs" / "cfg0.conf")


@pytest.fixture
def cfg_empty():
    return load_config_file(ROOT / "configs" / "cfg_empty.conf")


@pytest.fixture
def cfg0_forced(cfg0):
    return cfg0.with_overrides(policy="forced")


@pytest.fixture
def two_letters():
    return SemanticsConfig(alphabet=("a", "b"))


@pytest.fixture
def schema_dir():
    return ROOT / "schemas"
