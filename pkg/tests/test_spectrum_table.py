import numpy as np
import pytest

from lamespec import DIRICHLET, NEUMANN, ConfigError, RangeError, SpectrumTable
from lamespec.serialize import csv_preamble, strip_comments


def table():
    return SpectrumTable([2.0, 1.0, 1.0], [1, 1, 1], DIRICHLET, "exact", 3.0)


def test_sorted_and_counts():
    t = table()
    assert t.eigenvalues.tolist() == [1.0, 1.0, 2.0]
    assert t.count(1.5) == 2
    assert t.count(1.0) == 2  # right-continuous
    assert t.count(3.0) == t.total_count


def test_count_beyond_certified_range():
    with pytest.raises(RangeError):
        table().count(3.5)


def test_invalid_rows():
    with pytest.raises(ConfigError):
        SpectrumTable([1.0], [0], DIRICHLET, "exact", 1.0)
    with pytest.raises(ConfigError):
        SpectrumTable([1.0], [1], DIRICHLET, "guess", 1.0)


def test_csv_round_trip_with_preamble():
    t = SpectrumTable([0.0, 1.5, 4.25], [3, 2, 1], NEUMANN, "dispersion", 5.0, [-1, 1, 0], [-1, 1, 1])
    text = csv_preamble("abc", 1) + t.to_csv()
    back = SpectrumTable.from_csv(strip_comments(text), 5.0)
    assert np.array_equal(back.eigenvalues, t.eigenvalues)
    assert np.array_equal(back.multiplicities, t.multiplicities)
    assert back.bc == NEUMANN and back.source == "dispersion"


def test_json_is_stable():
    assert table().to_json() == table().to_json()
    assert '"eigenvalues": [1.000000000000e+00, 1.000000000000e+00, 2.000000000000e+00]' in table().to_json()


def test_clustered_merges_split_pairs():
    t = SpectrumTable([1.0, 1.0 + 1e-9, 2.0], [1, 1, 1], DIRICHLET, "fem", 2.0).clustered()
    assert t.multiplicities.tolist() == [2, 1]
