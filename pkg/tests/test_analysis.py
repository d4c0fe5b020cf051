import numpy as np
import pytest

from h2qse.analysis import error_report, find_peaks, gaussian_kernel, histogram_energies


def test_kernel_normalized_and_symmetric():
    k = gaussian_kernel(1.5e-3, 7.5e-3)
    assert k.sum() == pytest.approx(1.0)
    np.testing.assert_allclose(k, k[::-1])
    assert k.size == 41


def test_histogram_conserves_counts():
    e = np.random.default_rng(0).normal(-1.0, 0.01, size=500)
    h = histogram_energies(e)
    assert h.counts.sum() == 500
    assert h.smoothed.sum() == pytest.approx(500)
    np.testing.assert_allclose(np.diff(h.bin_centers), 1.5e-3)


def test_histogram_validation():
    with pytest.raises(ValueError):
        histogram_energies([])
    with pytest.raises(ValueError):
        histogram_energies([np.nan])
    with pytest.raises(ValueError):
        histogram_energies([1.0], bin_width=0)


def test_single_peak_location():
    h = histogram_energies([0.5] * 10)
    (e, height), = find_peaks(h)
    assert e == pytest.approx(0.5, abs=1e-3)


def test_two_close_levels_merge_under_smoothing():
    # 3 mHa apart is well below the 7.5 mHa smoothing width
    h = histogram_energies([0.0] * 10 + [0.003] * 10)
    assert len(find_peaks(h)) == 1


def test_small_bumps_filtered():
    rng = np.random.default_rng(1)
    e = np.concatenate([rng.normal(0, 0.003, 400), [0.2]])
    peaks = find_peaks(histogram_energies(e))
    assert len(peaks) == 1


def test_error_report(table):
    est = {(0.75, 0): -1.1371, (0.75, 3): 0.47, (1.55, 0): -0.99}
    rep = error_report(est, table)
    assert [r.within for r in rep.rows] == [True, False, True]
    assert rep.summary() == {0.75: (1, 2), 1.55: (1, 1)}
    assert rep.level_counts() == {0: 2, 3: 0}
    with pytest.raises(ValueError):
        error_report({(0.75, 4): 0.0}, table)
