"""CSV implementation of ReportWriter.

Each table starts with ``# key=value`` metadata lines, followed by a header row and
one row per point. Column order is fixed and nothing time-dependent is written, so
equal runs produce byte-identical files.
"""
import csv
import io
import logging
import os
from typing import Dict, List, Optional, Tuple

from entities.errors import DataError
from entities.mitigation import SuccessReport
from entities.reports import NeReport, SimReport, SnrPoint
from infrastructure.atomic_file import atomic_write
from interactors.interfaces import ReportWriter
from interactors.metrics import confidence_interval

logger = logging.getLogger(__name__)

SIM_FIELDS = [
    "ebn0_db",
    "frames",
    "bit_errors",
    "block_errors",
    "ber",
    "bler",
    "mean_iters",
    "ci_low",
    "ci_high",
    # trailing columns needed to reload a report
    "k",
    "iterations",
    "bler_ci_low",
    "bler_ci_high",
]
NE_FIELDS = ["ebn0_db", "ber", "ber_ref", "ratio"]
SUCCESS_FIELDS = ["strategy", "total", "recovered", "tau", "ci_low", "ci_high", "mean_extra_iterations"]
SWEEP_FIELDS = ["m", "ebn0_db", "rate", "ber", "bler", "ci_low", "ci_high"]

SETTING_PREFIX = "decoder."
SWEEP_NOTE = (
    "extra frozen bits select a subcode of the parent code, so its ML performance cannot be "
    "worse; any floor seen here comes from the iterative decoder"
)


def _fmt(value: float) -> str:
    return f"{value:.6e}"


def _interval(errors: int, trials: int) -> Tuple[str, str]:
    if trials == 0:
        return "", ""
    low, high = confidence_interval(errors, trials)
    return _fmt(low), _fmt(high)


def render_table(metadata: Dict[str, str], fields: List[str], rows: List[dict]) -> str:
    """Metadata comment lines, a header row, then one CSV row per dict."""
    out = io.StringIO()
    for key, value in metadata.items():
        out.write(f"# {key}={value}\n")
    writer = csv.DictWriter(out, fieldnames=fields, lineterminator="\n")
    writer.writeheader()
    for row in rows:
        writer.writerow({k: row.get(k, "") for k in fields})
    return out.getvalue()


def parse_table(text: str) -> Tuple[Dict[str, str], List[dict]]:
    """Split a table into its metadata and its rows."""
    metadata, body = {}, []
    for line in text.splitlines():
        if line.startswith("#"):
            key, sep, value = line[1:].strip().partition("=")
            if sep:
                metadata[key] = value
        elif line.strip():
            body.append(line)
    return metadata, list(csv.DictReader(body))


def sim_rows(report: SimReport) -> List[dict]:
    """One CSV row per SNR point, with confidence intervals."""
    rows = []
    for p in report.points:
        ber_low, ber_high = _interval(p.bit_errors, p.frames * p.k)
        bler_low, bler_high = _interval(p.block_errors, p.frames)
        rows.append(
            {
                "ebn0_db": repr(p.ebn0_db),
                "k": p.k,
                "frames": p.frames,
                "bit_errors": p.bit_errors,
                "block_errors": p.block_errors,
                "iterations": p.iterations,
                "ber": _fmt(p.ber),
                "ci_low": ber_low,
                "ci_high": ber_high,
                "bler": _fmt(p.bler),
                "bler_ci_low": bler_low,
                "bler_ci_high": bler_high,
                "mean_iters": _fmt(p.mean_iterations),
            }
        )
    return rows


class CsvReportWriter(ReportWriter):
    """Tables written atomically as CSV files; keys are paths relative to ``base_dir``."""

    def __init__(self, base_dir: str = "."):
        self.base_dir = base_dir

    def _path(self, key: str) -> str:
        return os.path.join(self.base_dir, key)

    def _write(self, key: str, text: str) -> None:
        atomic_write(self._path(key), text.encode("utf-8"))
        logger.debug("wrote %s", self._path(key))

    async def write_sim_report(self, key: str, report: SimReport) -> None:
        metadata = {"digest": report.digest, "seed": str(report.seed), "complete": str(report.complete)}
        metadata.update({SETTING_PREFIX + k: v for k, v in sorted(report.settings.items())})
        self._write(key, render_table(metadata, SIM_FIELDS, sim_rows(report)))

    async def read_sim_report(self, key: str) -> Optional[SimReport]:
        """Load a report written by write_sim_report, or None when absent."""
        path = self._path(key)
        if not os.path.exists(path):
            return None
        with open(path, "r", encoding="utf-8") as f:
            metadata, rows = parse_table(f.read())
        try:
            points = [
                SnrPoint(
                    ebn0_db=float(row["ebn0_db"]),
                    k=int(row["k"]),
                    frames=int(row["frames"]),
                    bit_errors=int(row["bit_errors"]),
                    block_errors=int(row["block_errors"]),
                    iterations=int(row["iterations"]),
                )
                for row in rows
            ]
            return SimReport(
                digest=metadata["digest"],
                settings={
                    k[len(SETTING_PREFIX):]: v for k, v in metadata.items() if k.startswith(SETTING_PREFIX)
                },
                seed=int(metadata["seed"]),
                points=points,
                complete=metadata.get("complete", "True") == "True",
            )
        except (KeyError, TypeError, ValueError) as e:
            raise DataError(f"Report '{key}' is malformed: {e}") from e

    async def write_ne_report(self, key: str, report: NeReport) -> None:
        metadata = {
            "llr_max": repr(report.llr_max),
            "llr_max_ref": repr(report.llr_max_ref),
            "ne": _fmt(report.ne),
        }
        rows = [
            {"ebn0_db": repr(p.ebn0_db), "ber": _fmt(p.ber), "ber_ref": _fmt(p.ber_ref), "ratio": _fmt(p.ratio)}
            for p in report.points
        ]
        self._write(key, render_table(metadata, NE_FIELDS, rows))

    async def write_success_report(self, key: str, report: SuccessReport) -> None:
        metadata = {f"stage.{stage}": str(count) for stage, count in sorted(report.per_stage.items())}
        ci_low, ci_high = _interval(report.recovered, report.total)
        row = {
            "strategy": report.strategy,
            "total": report.total,
            "recovered": report.recovered,
            "tau": _fmt(report.tau),
            "ci_low": ci_low,
            "ci_high": ci_high,
            "mean_extra_iterations": _fmt(report.mean_extra_iterations),
        }
        self._write(key, render_table(metadata, SUCCESS_FIELDS, [row]))

    async def write_frozen_sweep(self, key: str, reports: Dict[int, SimReport], rates: Dict[int, float]) -> None:
        rows = []
        for m in sorted(reports):
            for p in reports[m].points:
                ci_low, ci_high = _interval(p.bit_errors, p.frames * p.k)
                rows.append(
                    {
                        "m": m,
                        "ebn0_db": repr(p.ebn0_db),
                        "rate": _fmt(rates[m]),
                        "ber": _fmt(p.ber),
                        "bler": _fmt(p.bler),
                        "ci_low": ci_low,
                        "ci_high": ci_high,
                    }
                )
        self._write(key, render_table({"note": SWEEP_NOTE}, SWEEP_FIELDS, rows))
