"""Binary test-set files.

Layout (little-endian): one fixed header record, then ``count`` fixed-size frame
records holding the frame id, the true u packed eight bits per byte, and y and the
channel LLRs as 32-bit reals. Writing the same TestSet always yields the same bytes.
"""
import logging
import os
from typing import Optional

import numpy as np

from entities.errors import ParameterError, TestSetFormatError
from entities.testset import MAGIC, VERSION, TestSet, TestSetHeader, TestSetRecord
from infrastructure.atomic_file import atomic_write
from interactors.interfaces import TestSetRepository

logger = logging.getLogger(__name__)

HEADER_DTYPE = np.dtype(
    [
        ("magic", "S8"),
        ("version", "<u8"),
        ("N", "<u8"),
        ("k", "<u8"),
        ("digest", "<u8"),
        ("sigma2", "<f4"),
        ("ebn0_db", "<f4"),
        ("llr_max_pass", "<f4"),
        ("llr_max_fail", "<f4"),
        ("seed", "<u8"),
        ("count", "<u8"),
        # replay settings and collection bookkeeping follow the record count
        ("max_iters", "<u8"),
        ("candidates", "<u8"),
        ("complete", "<u8"),
        ("boxplus_mode", "S16"),
        ("precision", "S8"),
    ]
)


def record_dtype(N: int) -> np.dtype:
    """Fixed-size frame record for block length N."""
    return np.dtype(
        [
            ("frame_id", "<u8"),
            ("u", "u1", ((N + 7) // 8,)),
            ("y", "<f4", (N,)),
            ("llr", "<f4", (N,)),
        ]
    )


def encode_test_set(test_set: TestSet) -> bytes:
    """Serialize a test set; equal sets give equal bytes."""
    h = test_set.header
    header = np.zeros(1, dtype=HEADER_DTYPE)
    header[0] = (
        MAGIC,
        h.version,
        h.N,
        h.k,
        int(h.digest, 16),
        h.sigma2,
        h.ebn0_db,
        h.llr_max_pass,
        h.llr_max_fail,
        h.seed,
        len(test_set.records),
        h.max_iters,
        h.candidates,
        int(test_set.complete),
        h.boxplus_mode.encode("ascii"),
        h.precision.encode("ascii"),
    )
    records = np.zeros(len(test_set.records), dtype=record_dtype(h.N))
    if test_set.records:
        records["frame_id"] = [r.frame_id for r in test_set.records]
        records["u"] = np.stack([np.packbits(np.asarray(r.u, dtype=np.uint8)) for r in test_set.records])
        records["y"] = np.stack([r.y for r in test_set.records])
        records["llr"] = np.stack([r.llr for r in test_set.records])
    return header.tobytes() + records.tobytes()


def decode_test_set(data: bytes, source: str = "<bytes>") -> TestSet:
    """Parse test-set bytes, raising TestSetFormatError on any layout problem."""
    if len(data) < HEADER_DTYPE.itemsize:
        raise TestSetFormatError(f"'{source}' is too short to hold a test-set header")
    raw = np.frombuffer(data, dtype=HEADER_DTYPE, count=1)[0]
    if bytes(raw["magic"]) != MAGIC:
        raise TestSetFormatError(f"'{source}' is not a test-set file")
    if int(raw["version"]) != VERSION:
        raise TestSetFormatError(f"'{source}' has unsupported version {int(raw['version'])}")
    N, count = int(raw["N"]), int(raw["count"])
    rec = record_dtype(N)
    expected = HEADER_DTYPE.itemsize + count * rec.itemsize
    if len(data) != expected:
        raise TestSetFormatError(f"'{source}' holds {len(data)} bytes, expected {expected} for {count} records")
    try:
        header = TestSetHeader(
            N=N,
            k=int(raw["k"]),
            digest=f"{int(raw['digest']):016x}",
            sigma2=float(raw["sigma2"]),
            ebn0_db=float(raw["ebn0_db"]),
            llr_max_pass=float(raw["llr_max_pass"]),
            llr_max_fail=float(raw["llr_max_fail"]),
            seed=int(raw["seed"]),
            max_iters=int(raw["max_iters"]),
            boxplus_mode=bytes(raw["boxplus_mode"]).decode("ascii"),
            precision=bytes(raw["precision"]).decode("ascii"),
            candidates=int(raw["candidates"]),
            version=int(raw["version"]),
        )
    except (ParameterError, UnicodeDecodeError) as e:
        raise TestSetFormatError(f"'{source}' has an invalid header: {e}") from e
    rows = np.frombuffer(data, dtype=rec, count=count, offset=HEADER_DTYPE.itemsize) if count else []
    records = [
        TestSetRecord(
            frame_id=int(row["frame_id"]),
            u=np.unpackbits(row["u"], count=N),
            y=np.array(row["y"], dtype=np.float32),
            llr=np.array(row["llr"], dtype=np.float32),
        )
        for row in rows
    ]
    return TestSet(header=header, records=records, complete=bool(raw["complete"]))


class FileTestSetRepository(TestSetRepository):
    """Test sets stored as binary files; keys are paths relative to ``base_dir``."""

    def __init__(self, base_dir: str = "."):
        self.base_dir = base_dir

    def _path(self, key: str) -> str:
        return os.path.join(self.base_dir, key)

    async def save_test_set(self, key: str, test_set: TestSet) -> None:
        """Write the binary file atomically."""
        atomic_write(self._path(key), encode_test_set(test_set))
        logger.debug("wrote %d records to %s", len(test_set), self._path(key))

    async def get_test_set(self, key: str) -> Optional[TestSet]:
        """Read and parse a test-set file, or None when absent."""
        path = self._path(key)
        if not os.path.exists(path):
            return None
        with open(path, "rb") as f:
            return decode_test_set(f.read(), key)
