import pytest

from derivekit.genalg import GenConfig, generate_dataset


@pytest.fixture(scope="session")
def small_dataset():
    """Shared 180-record dataset used by generator/perturbation/prompt tests."""
    cfg = GenConfig(seed=2024)
    records, summary = generate_dataset(cfg, 180)
    return cfg, records, summary
