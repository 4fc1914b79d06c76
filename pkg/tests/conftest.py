from __future__ import annotations

from pathlib import Path

import pytest

from taskmill import Dataset, Schema, load_dataset

DATA_DIR = Path(__file__).parent / "data"


@pytest.fixture(scope="session")
def toy_schema() -> Schema:
    return Schema.load(DATA_DIR / "toy_flights.schema.json")


@pytest.fixture(scope="session")
def toy_dataset(toy_schema: Schema) -> Dataset:
    return load_dataset(DATA_DIR / "toy_flights.csv", toy_schema)


@pytest.fixture(scope="session")
def flight_schema() -> Schema:
    return Schema.load(DATA_DIR / "flight_delay.schema.json")


@pytest.fixture()
def toy_csv_path() -> Path:
    return DATA_DIR / "toy_flights.csv"


@pytest.fixture()
def toy_schema_path() -> Path:
    return DATA_DIR / "toy_flights.schema.json"
