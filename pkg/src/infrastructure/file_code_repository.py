"""File-based implementation of CodeRepository: one JSON document per code."""
import json
import logging
import os
from typing import Optional

from entities.code import Construction, PolarCodeSpec, ReliabilityProfile
from entities.errors import DataError, DigestMismatchError, ParameterError
from infrastructure.atomic_file import atomic_write
from interactors.interfaces import CodeRepository
from interactors.polar_core import spec_digest

logger = logging.getLogger(__name__)


class FileCodeRepository(CodeRepository):
    """Code specs stored as JSON files; keys are paths relative to ``base_dir``."""

    def __init__(self, base_dir: str = "."):
        self.base_dir = base_dir

    def _path(self, key: str) -> str:
        return os.path.join(self.base_dir, key)

    def _spec_to_dict(self, spec: PolarCodeSpec) -> dict:
        """Convert PolarCodeSpec to dictionary."""
        construction = spec.construction
        return {
            "n": spec.n,
            "N": spec.N,
            "k": spec.k,
            "design_esn0_db": spec.design_esn0_db,
            "construction": {
                "kind": construction.kind,
                "parent_digest": construction.parent_digest,
                "m": construction.m,
                "seed": construction.seed,
            },
            "info_set": list(spec.info_set),
            "digest": spec_digest(spec),
            "profile": list(spec.profile.z) if spec.profile is not None else None,
        }

    def _dict_to_spec(self, data: dict, key: str) -> PolarCodeSpec:
        """Convert dictionary to PolarCodeSpec, checking the stored digest."""
        try:
            profile = data.get("profile")
            spec = PolarCodeSpec(
                n=int(data["n"]),
                k=int(data["k"]),
                info_set=tuple(data["info_set"]),
                design_esn0_db=float(data.get("design_esn0_db", 0.0)),
                construction=Construction(**data.get("construction", {})),
                profile=ReliabilityProfile(z=tuple(profile)) if profile else None,
            )
        except (KeyError, TypeError, ParameterError) as e:
            raise DataError(f"Code file '{key}' is malformed: {e}") from e
        if data.get("N", spec.N) != spec.N:
            raise DataError(f"Code file '{key}' stores N={data['N']} but n={spec.n}")
        digest = spec_digest(spec)
        if data.get("digest") != digest:
            raise DigestMismatchError(f"Code file '{key}' digest {data.get('digest')} does not match {digest}")
        return spec

    async def save_code(self, key: str, spec: PolarCodeSpec) -> None:
        """Save a code spec to file storage."""
        payload = json.dumps(self._spec_to_dict(spec), indent=2)
        atomic_write(self._path(key), payload.encode("utf-8"))
        logger.debug("wrote code %s to %s", spec_digest(spec), self._path(key))

    async def get_code(self, key: str) -> Optional[PolarCodeSpec]:
        """Retrieve a code spec by its path."""
        path = self._path(key)
        if not os.path.exists(path):
            return None
        try:
            with open(path, "r", encoding="utf-8") as f:
                data = json.load(f)
        except (json.JSONDecodeError, UnicodeDecodeError, IOError) as e:
            raise DataError(f"Cannot read code file '{key}': {e}") from e
        return self._dict_to_spec(data, key)
