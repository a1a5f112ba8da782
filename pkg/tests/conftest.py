import hashlib
import os
import random

import pytest

import catalog

DEFAULT_SEED = 20240607

# pinned transcriptions; a change here must come with a re-derivation of the invariants
CATALOG_SHA256 = {
    "cn7.alg": "e40109b56b80ff6acd847b7084bf891503ab5e3ca69d9dd071ee17fd24e0b69b",
    "cn8.alg": "f65582d4c4287278eddd4f7338eea0f8de314a979faa5d2acb5629c9e3195b78",
    "cn9.alg": "031d2b4c6e35f8d18737f2189c215c1f9e99d2b254c30550aabeb032adacb874",
}


def file_sha256(path) -> str:
    return hashlib.sha256(path.read_bytes()).hexdigest()


@pytest.fixture
def seed() -> int:
    return int(os.getenv("COHOPF_SEED", DEFAULT_SEED))


@pytest.fixture
def rng(seed) -> random.Random:
    return random.Random(seed)


def require_entry(name: str):
    """Catalog algebra, or skip with an explicit notice when the slot is empty."""
    item = catalog.entry(name)
    if item.absent:
        pytest.skip(f"catalog slot {name} is absent: no transcription shipped in {catalog.CATALOG_DIR}")
    return item.algebra


def random_vector(rng: random.Random, n: int, low: int = -3, high: int = 3):
    return tuple(rng.randint(low, high) for _ in range(n))


def catalog_algebra(name: str, params=()):
    """Family members by parameter, transcriptions through require_entry."""
    if params:
        return catalog.get(name, tuple(params))
    return require_entry(name)


# one representative per family plus the transcription slots
CATALOG_ALGEBRAS = [
    ("abelian", (3,)),
    ("heisenberg_lattice", (1,)),
    ("heisenberg_lattice", (2,)),
    ("filiform", (4,)),
    ("filiform", (6,)),
    ("cn7", ()),
    ("cn8", ()),
    ("cn9", ()),
]
