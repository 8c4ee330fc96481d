from pathlib import Path

import pytest

ROOT = Path(__file__).resolve().parent.parent
CORPUS = ROOT / "corpus"
PRELUDE = CORPUS / "prelude.ma"
POSITIVE = sorted((CORPUS / "positive").glob("*.ma"))
NEGATIVE = sorted((CORPUS / "negative").glob("*.ma"))
ALL_SOURCES = [PRELUDE, *POSITIVE, *NEGATIVE]


@pytest.fixture(scope="session")
def prelude_text() -> str:
    return PRELUDE.read_text()
