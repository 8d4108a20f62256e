import math

import pytest

from ddmemory import HARD, NoiseSpectrum, load_preset

TWO_PI = 2.0 * math.pi


@pytest.fixture(scope="session")
def gaas() -> NoiseSpectrum:
    return load_preset("gaas")


@pytest.fixture(scope="session")
def gaas_hard(gaas) -> NoiseSpectrum:
    from dataclasses import replace

    return replace(gaas, rolloff=HARD)


@pytest.fixture(scope="session")
def yb() -> NoiseSpectrum:
    return load_preset("yb")
