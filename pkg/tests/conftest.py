import pytest

from sdlsim import NetworkSpec, LineModel, SwitchModel, SimConfig

DELTA = 10.5e-9


@pytest.fixture
def paper_spec() -> NetworkSpec:
    """4-port network with the measured prototype's switch values."""
    return NetworkSpec(
        n_lines=2,
        switch=SwitchModel(r_on=3.0, r_off=60e3, t_s=2e-9),
        line=LineModel(delay=DELTA, loss_db=1.0),
    )


@pytest.fixture
def ideal_spec() -> NetworkSpec:
    """4-port network with instantaneous, lossless switches."""
    return NetworkSpec(
        n_lines=2,
        switch=SwitchModel(r_on=0.0, r_off=1e12, t_s=0.0),
        line=LineModel(delay=DELTA, loss_db=0.0),
    )


@pytest.fixture
def simcfg() -> SimConfig:
    return SimConfig()


def ideal_spec_n(n_lines: int) -> NetworkSpec:
    return NetworkSpec(
        n_lines=n_lines,
        switch=SwitchModel(r_on=0.0, r_off=1e12, t_s=0.0),
        line=LineModel(delay=DELTA, loss_db=0.0),
    )
