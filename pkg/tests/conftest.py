import numpy as np
import pytest

from nccsim import DesignConfig, TrialDataset


def make_dataset(cells: dict[tuple[int, int], list[float]]) -> TrialDataset:
    """Hand-build a trial from per-cell response lists.

    Rows are laid out period 1 first, then period 2, cells in arm order,
    which is a valid recruitment ordering for everything that does not
    depend on the within-period interleaving.
    """
    arm, period, y = [], [], []
    for s in (1, 2):
        for k in (0, 1, 2):
            for value in cells.get((k, s), []):
                arm.append(k)
                period.append(s)
                y.append(float(value))
    n = len(y)
    return TrialDataset(
        patient=np.arange(1, n + 1, dtype=np.int64),
        arm=np.asarray(arm, dtype=np.int64),
        period=np.asarray(period, dtype=np.int64),
        y=np.asarray(y, dtype=float),
    )


def default_config(**overrides) -> DesignConfig:
    kwargs = dict(n01=150, n11=150, n02=150, n12=150, n22=150, alpha1=0.5)
    kwargs.update(overrides)
    return DesignConfig(**kwargs)


@pytest.fixture
def config():
    return default_config()
