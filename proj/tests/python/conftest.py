import json
import os
import sqlite3
from pathlib import Path

import pytest

import clausewise

DATA = Path(os.environ.get("CLAUSEWISE_DATA_DIR", Path(__file__).resolve().parents[2] / "data"))


@pytest.fixture(scope="session")
def data_dir() -> Path:
    return DATA


@pytest.fixture(scope="session")
def schemas() -> dict:
    return {p.stem: clausewise.load_schema(str(p)) for p in (DATA / "schemas").glob("*.json")}


@pytest.fixture(scope="session")
def golden() -> list[dict]:
    with open(DATA / "corpus" / "golden.jsonl") as f:
        return [json.loads(line) for line in f if line.strip()]


def sqlite_db(schema_path: Path) -> sqlite3.Connection:
    """In-memory database with a few deterministic rows per table."""
    layout = json.loads(schema_path.read_text())
    db = sqlite3.connect(":memory:")
    words = ["France", "Main", "Math", "Love Song", "San Jose", "US", "Databases", "Lufthansa"]
    for table, columns in layout["tables"].items():
        names = ", ".join(c[0] for c in columns)
        db.execute(f"CREATE TABLE {table} ({names})")
        for r in range(8):
            row = [(r * 7 + i * 3) % 11 + 1 if t == "number" else words[(r + i) % len(words)]
                   for i, (_, t) in enumerate(columns)]
            db.execute(f"INSERT INTO {table} VALUES ({', '.join('?' * len(row))})", row)
    return db
