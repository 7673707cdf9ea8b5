import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from morsejt.morse_core import MorseParams, derive_params  # noqa: E402


@pytest.fixture(scope="session")
def p6():
    # nu = 6, hbar*Omega = 0.5
    return derive_params(1.0, 4.5, 1.0, 1.0)


@pytest.fixture(scope="session")
def p_nu():
    cache = {}

    def make(nu, hbar_omega=0.5):
        key = (nu, hbar_omega)
        if key not in cache:
            cache[key] = MorseParams.from_reduced(nu, hbar_omega)
        return cache[key]

    return make
