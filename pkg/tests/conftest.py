from pathlib import Path

import pytest

FIXTURES = Path(__file__).resolve().parent.parent / "fixtures"


@pytest.fixture
def fixtures_dir() -> Path:
    return FIXTURES


@pytest.fixture
def timeline_paths() -> list[Path]:
    return sorted(FIXTURES.glob("tl_*.json"))
