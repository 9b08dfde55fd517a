import pytest

from gwdetect.simulate import attenuation_ladder, synth_dataset
from gwdetect.spectral import WelchConfig

BENCH_WELCH = WelchConfig(segment_length=100, overlap_fraction=0.5, nfft=2000,
                          window_kind="hamming")


@pytest.fixture(scope="session")
def ladder_dataset(tmp_path_factory):
    """20 healthy records plus a 6-step attenuation ladder at 40 dB SNR."""
    root = tmp_path_factory.mktemp("ladder")
    manifest = synth_dataset(root, n_baseline=20,
                             damage_specs=attenuation_ladder(6),
                             n_per_damage=5, seed=2024, snr_db=40.0,
                             n_samples=3000)
    return manifest


@pytest.fixture()
def bench_welch():
    return BENCH_WELCH
