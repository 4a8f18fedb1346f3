import pathlib

import pytest


@pytest.fixture
def published_csv():
    return pathlib.Path(__file__).resolve().parents[1] / "fixtures" / "published_table1.csv"
