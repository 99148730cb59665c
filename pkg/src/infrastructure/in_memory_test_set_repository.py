"""In-memory implementation of TestSetRepository for development/testing."""
from typing import Dict, Optional

from entities.testset import TestSet
from interactors.interfaces import TestSetRepository


class InMemoryTestSetRepository(TestSetRepository):
    """Keeps test sets by key; nothing is copied or quantized."""

    def __init__(self):
        self._sets: Dict[str, TestSet] = {}

    async def save_test_set(self, key: str, test_set: TestSet) -> None:
        self._sets[key] = test_set

    async def get_test_set(self, key: str) -> Optional[TestSet]:
        return self._sets.get(key)
