import numpy as np
import pytest

from honeyspec.dataset import GeneratorSpec, SpectralDataset, WavelengthGrid, synth_generate

ACCEPTANCE_RESULTS: dict[str, str] = {}


@pytest.fixture
def small_ds():
    """3 origins x 5 levels x 4 images x 3 spectra, well separated."""
    return synth_generate(GeneratorSpec(origins=3, groups_per_class=4, records_per_group=3, band_count=32), seed=7)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def make_dataset(bands, origins, levels, groups, record_ids=None, grid=None, **kw):
    bands = np.asarray(bands, dtype=float)
    n = len(bands)
    return SpectralDataset(
        grid=grid or WavelengthGrid(band_count=bands.shape[1]),
        record_ids=np.array(record_ids or [f"r{i}" for i in range(n)], dtype=object),
        group_ids=np.array(groups, dtype=object),
        acquisition_ids=np.full(n, -1),
        origins=np.array(origins, dtype=object),
        levels=np.array(levels),
        bands=bands,
        **kw,
    )


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for name in sorted(ACCEPTANCE_RESULTS, key=lambda s: int(s.split(".")[0])):
        terminalreporter.write_line(f"{ACCEPTANCE_RESULTS[name]:4s}  {name}")
