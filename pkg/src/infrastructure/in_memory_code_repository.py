"""In-memory implementation of CodeRepository for development/testing."""
from typing import Dict, Optional

from entities.code import PolarCodeSpec
from interactors.interfaces import CodeRepository


class InMemoryCodeRepository(CodeRepository):
    """In-memory storage for code specs - suitable for development and testing."""

    def __init__(self):
        self._codes: Dict[str, PolarCodeSpec] = {}

    async def save_code(self, key: str, spec: PolarCodeSpec) -> None:
        self._codes[key] = spec

    async def get_code(self, key: str) -> Optional[PolarCodeSpec]:
        return self._codes.get(key)
