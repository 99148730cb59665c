"""Main CLI entry point for polarfloor."""
import asyncio
import logging
import sys
from typing import List, Optional

import click
from dotenv import load_dotenv

from cli.config import parse_int_list, resolve_config
from entities.decoder import DecoderConfig
from entities.errors import DataError, InsufficientStatisticsError, ParameterError, PolarFloorError
from entities.mitigation import (
    GUESS_EXHAUSTIVE,
    GUESS_GENIE,
    STRATEGY_GUESS,
    STRATEGY_MULTI_TRELLIS,
    STRATEGY_NONE,
    STRATEGY_SCALED_BOXPLUS,
    STRATEGY_VIRTUAL_NOISE,
    MitigationConfig,
)
from infrastructure.csv_report_writer import CsvReportWriter
from infrastructure.file_code_repository import FileCodeRepository
from infrastructure.file_test_set_repository import FileTestSetRepository
from interactors.metrics import confidence_interval
from interactors.polar_core import spec_digest
from interactors.simulation_interactor import SimulationInteractor

# Load environment variables
load_dotenv()

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_DATA = 2
EXIT_BUDGET = 3

DEFAULT_COLLECT_SNR = 5.0
DEFAULT_COLLECT_FRAMES = 10_000_000
DEFAULT_SCALED_ALPHA = 0.9375
FROZEN_SWEEP_LLR_MAX = 100.0

STRATEGY_FLAGS = {
    "none": (STRATEGY_NONE, {}),
    "guess1": (STRATEGY_GUESS, {"max_bits": 1}),
    "guess2": (STRATEGY_GUESS, {"max_bits": 2}),
    "guess3": (STRATEGY_GUESS, {"max_bits": 3}),
    "vnoise": (STRATEGY_VIRTUAL_NOISE, {}),
    "scaled": (STRATEGY_SCALED_BOXPLUS, {}),
    "multitrellis": (STRATEGY_MULTI_TRELLIS, {}),
}

logger = logging.getLogger(__name__)


def get_dependencies(workers: int = 1, progress: bool = False) -> SimulationInteractor:
    """Wire file-backed repositories into the simulation interactor."""
    return SimulationInteractor(
        code_repository=FileCodeRepository(),
        test_set_repository=FileTestSetRepository(),
        report_writer=CsvReportWriter(),
        workers=workers,
        progress=progress,
    )


def decoder_options(fn):
    """Decoder and stop-rule flags shared by simulate and frozen-sweep."""
    options = [
        click.option("--decoder", type=click.Choice(["bp", "sc", "scl"]), help="Decoder family (default bp)"),
        click.option("--llr-max", type=float, help="Clipping magnitude for BP messages"),
        click.option("--iters", "max_iters", type=int, help="Maximum BP iterations (default 200)"),
        click.option("--boxplus", type=click.Choice(["exact", "min"]), help="Boxplus variant (default min)"),
        click.option("--alpha", type=float, help="Boxplus output scale in (0, 1]"),
        click.option("--stopping", type=click.Choice(["fixed", "gmatrix"]), help="Stopping rule (default gmatrix)"),
        click.option("--precision", type=click.Choice(["f32", "f64"]), help="Message precision (default f32)"),
        click.option("--list-size", type=int, help="SCL list size"),
        click.option("--path-metric", type=click.Choice(["exact", "approx"]), help="SCL path metric"),
        click.option("--min-frames", type=int, help="Frames simulated at least, per point"),
        click.option("--min-errors", "min_block_errors", type=int, help="Block errors required, per point"),
        click.option("--max-frames", type=int, help="Frame budget per point"),
        click.option("--chunk-frames", type=int, help="Frames per work unit"),
        click.option("--seed", type=int, help="Master seed (fallback: POLARFLOOR_SEED)"),
        click.option("--workers", type=int, help="Worker processes (fallback: POLARFLOOR_WORKERS)"),
        click.option("--config", "config_path", type=click.Path(exists=True, dir_okay=False), help="JSON config file"),
    ]
    for option in reversed(options):
        fn = option(fn)
    return fn


class PolarFloorGroup(click.Group):
    """Click group that maps failures onto the documented exit codes."""

    def main(self, args=None, prog_name=None, complete_var=None, standalone_mode=True, **extra):
        try:
            code = super().main(
                args=args, prog_name=prog_name, complete_var=complete_var, standalone_mode=False, **extra
            )
        except click.exceptions.Abort:
            click.echo("Aborted!", err=True)
            code = EXIT_USAGE
        except click.ClickException as e:
            e.show()
            code = EXIT_USAGE
        except ParameterError as e:
            click.echo(f"[!] Error: {e}", err=True)
            code = EXIT_USAGE
        except (DataError, InsufficientStatisticsError) as e:
            click.echo(f"[!] Error: {e}", err=True)
            code = EXIT_DATA
        except PolarFloorError as e:
            click.echo(f"[!] Error: {e}", err=True)
            code = EXIT_DATA
        sys.exit(code if isinstance(code, int) else EXIT_OK)


@click.group(cls=PolarFloorGroup)
@click.option("--verbose", "-v", is_flag=True, help="Debug logging")
@click.option("--quiet", "-q", is_flag=True, help="No progress bars")
@click.pass_context
def cli(ctx: click.Context, verbose: bool, quiet: bool):
    """polarfloor - error floors of clipped BP decoding of polar codes."""
    logging.basicConfig(
        level=logging.DEBUG if verbose else logging.WARNING,
        format="%(asctime)s %(levelname)s %(name)s: %(message)s",
    )
    ctx.obj = {"progress": not quiet and sys.stderr.isatty()}


@cli.command("construct")
@click.option("--n", "n", type=int, required=True, help="log2 of the block length")
@click.option("--k", "k", type=int, help="Number of information bits")
@click.option("--rate", type=float, help="Code rate, used when --k is not given")
@click.option("--design-esn0", type=float, default=0.0, show_default=True, help="Design Es/N0 in dB")
@click.option("--out", required=True, help="Path of the code file to write")
def construct(n: int, k: Optional[int], rate: Optional[float], design_esn0: float, out: str):
    """Construct a polar code from Bhattacharyya parameters."""
    if k is None:
        if rate is None:
            raise click.UsageError("Either --k or --rate is required")
        k = int(round(rate * (1 << n)))
    spec = asyncio.run(get_dependencies().construct(out, n, k, design_esn0))
    z = spec.profile.as_array()
    click.echo(f"[+] Code written to {out}")
    click.echo(f"N={spec.N} k={spec.k} rate={spec.rate:g} digest={spec_digest(spec)}")
    click.echo(f"worst information Z={z[spec.info_indices].max():.3e}")
    if spec.k < spec.N:
        click.echo(f"best frozen Z={z[spec.frozen_mask].min():.3e}")
    return EXIT_OK


@cli.command("show")
@click.argument("code")
def show(code: str):
    """Show a stored code spec."""
    spec = asyncio.run(get_dependencies().show(code))
    click.echo(f"\n[*] Code: {code}")
    click.echo(f"N={spec.N} n={spec.n} k={spec.k} rate={spec.rate:g}")
    click.echo(f"Digest: {spec_digest(spec)}")
    click.echo(f"Construction: {spec.construction.kind} (design Es/N0 {spec.design_esn0_db:g} dB)")
    if spec.construction.parent_digest:
        click.echo(f"Parent: {spec.construction.parent_digest} m={spec.construction.m} seed={spec.construction.seed}")
    if spec.profile is not None:
        z = spec.profile.as_array()
        click.echo(f"Information Z range: [{z[spec.info_indices].min():.3e}, {z[spec.info_indices].max():.3e}]")
    return EXIT_OK


@cli.command("simulate")
@click.option("--code", help="Code file")
@click.option("--snr", help="Eb/N0 grid start:step:stop in dB")
@click.option("--all-zero/--random-bits", default=None, help="Transmit the all-zero codeword")
@click.option("--out", help="CSV file to write")
@decoder_options
@click.pass_obj
def simulate(obj, config_path, **flags):
    """Estimate BER/BLER over an Eb/N0 grid."""
    cfg = resolve_config(config_path, **flags)
    if not cfg.code:
        raise click.UsageError("--code is required")
    interactor = get_dependencies(cfg.workers, obj["progress"])
    report = asyncio.run(
        interactor.simulate(
            cfg.code,
            cfg.decoder_config(),
            cfg.grid,
            cfg.stop_rule(),
            cfg.seed,
            out_key=cfg.out,
            all_zero=cfg.all_zero,
            chunk_frames=cfg.chunk_frames,
        )
    )
    for p in report.points:
        click.echo(f"{p.ebn0_db:6.2f} dB  BER {p.ber:.3e}  BLER {p.bler:.3e}  frames {p.frames}")
    if not report.complete:
        click.echo(f"[!] Some points hit the frame budget below {cfg.min_block_errors} block errors", err=True)
    if cfg.out:
        click.echo(f"[+] Report written to {cfg.out}")
    return EXIT_OK


@cli.command("ne")
@click.argument("curve")
@click.argument("reference")
@click.option("--out", help="CSV file to write")
def ne(curve: str, reference: str, out: Optional[str]):
    """Normalized error of CURVE against REFERENCE."""
    report = asyncio.run(get_dependencies().ne(curve, reference, out))
    for p in report.points:
        click.echo(f"{p.ebn0_db:6.2f} dB  ratio {p.ratio:.4g}")
    click.echo(f"[*] NE(llr_max={report.llr_max:g} vs {report.llr_max_ref:g}) = {report.ne:.4g}")
    return EXIT_OK


@cli.command("collect")
@click.option("--code", help="Code file")
@click.option("--snr", help="Collection Eb/N0 in dB (default 5)")
@click.option("--llr-max-pass", type=float, help="Clipping value that must decode (default 100)")
@click.option("--llr-max-fail", type=float, help="Clipping value that must fail (default 20)")
@click.option("--count", type=int, help="Records to capture")
@click.option("--max-frames", type=int, help="Candidate frame budget (default 10000000)")
@click.option("--iters", "max_iters", type=int, help="Maximum BP iterations (default 200)")
@click.option("--boxplus", type=click.Choice(["exact", "min"]), help="Boxplus variant (default min)")
@click.option("--precision", type=click.Choice(["f32", "f64"]), help="Message precision (default f32)")
@click.option("--chunk-frames", type=int, help="Frames per work unit")
@click.option("--seed", type=int, help="Master seed (fallback: POLARFLOOR_SEED)")
@click.option("--workers", type=int, help="Worker processes (fallback: POLARFLOOR_WORKERS)")
@click.option("--config", "config_path", type=click.Path(exists=True, dir_okay=False), help="JSON config file")
@click.option("--out", help="Test-set file to write")
@click.pass_obj
def collect(obj, config_path, **flags):
    """Capture frames that clipped BP fails and less-clipped BP decodes."""
    cfg = resolve_config(config_path, **flags)
    for key in ("code", "count", "out"):
        if getattr(cfg, key) is None:
            raise click.UsageError(f"--{key} is required")
    grid = cfg.grid if cfg.snr is not None else [DEFAULT_COLLECT_SNR]
    if len(grid) != 1:
        raise click.UsageError("collect takes a single --snr value")
    base = cfg.decoder_config(llr_max=cfg.llr_max_fail)
    test_set = asyncio.run(
        get_dependencies(cfg.workers, obj["progress"]).collect(
            cfg.code, cfg.out, grid[0], cfg.count, cfg.seed,
            llr_max_pass=cfg.llr_max_pass, llr_max_fail=cfg.llr_max_fail,
            max_frames=cfg.value_or("max_frames", DEFAULT_COLLECT_FRAMES),
            base=base, chunk_frames=cfg.chunk_frames,
        )
    )
    click.echo(f"[*] {len(test_set)} records from {test_set.header.candidates} frames "
               f"(acceptance {test_set.acceptance:.3e})")
    if not test_set.complete:
        click.echo(f"[!] Frame budget exhausted; partial test set written to {cfg.out}", err=True)
        return EXIT_BUDGET
    click.echo(f"[+] Test set written to {cfg.out}")
    return EXIT_OK


@cli.command("mitigate")
@click.option("--code", help="Code file")
@click.option("--testset", help="Test-set file")
@click.option("--strategy", type=click.Choice(sorted(STRATEGY_FLAGS)))
@click.option("--genie/--exhaustive", default=None, help="Guess with the transmitted bits (measurement only)")
@click.option("--sigma-v2", type=float, help="Virtual noise variance (default 0.36)")
@click.option("--attempts", type=int, help="Virtual noise retries (default 5)")
@click.option("--alpha", type=float, help="Boxplus scale for 'scaled' (default 0.9375)")
@click.option("--perms", type=int, help="Layer orders to try, identity included (default n)")
@click.option("--llr-max", type=float, help="Base clipping value (default: the test set's failing value)")
@click.option("--seed", type=int, help="Master seed (fallback: POLARFLOOR_SEED)")
@click.option("--workers", type=int, help="Worker processes (fallback: POLARFLOOR_WORKERS)")
@click.option("--config", "config_path", type=click.Path(exists=True, dir_okay=False), help="JSON config file")
@click.option("--out", help="CSV file to write")
@click.pass_obj
def mitigate(obj, config_path, **flags):
    """Success rate of one mitigation strategy on a test set."""
    cfg = resolve_config(config_path, **flags)
    for key in ("code", "testset", "strategy"):
        if getattr(cfg, key) is None:
            raise click.UsageError(f"--{key} is required")
    if cfg.strategy not in STRATEGY_FLAGS:
        raise click.UsageError(f"Unknown strategy '{cfg.strategy}'; choose from {', '.join(sorted(STRATEGY_FLAGS))}")
    kind, extra = STRATEGY_FLAGS[cfg.strategy]
    mcfg = MitigationConfig(
        strategy=kind,
        base=DecoderConfig(),
        guess_mode=GUESS_GENIE if cfg.genie else GUESS_EXHAUSTIVE,
        sigma_v2=cfg.sigma_v2,
        attempts=cfg.attempts,
        alpha=cfg.value_or("alpha", DEFAULT_SCALED_ALPHA),
        max_permutations=cfg.perms,
        **extra,
    )
    report = asyncio.run(
        get_dependencies(cfg.workers, obj["progress"]).mitigate(
            cfg.code, cfg.testset, mcfg, cfg.seed, cfg.out, cfg.value_or("llr_max", None)
        )
    )
    low, high = confidence_interval(report.recovered, report.total) if report.total else (float("nan"),) * 2
    click.echo(f"[*] {report.strategy}: tau = {report.tau:.4f} ({report.recovered}/{report.total}), "
               f"95% CI [{low:.4f}, {high:.4f}]")
    click.echo(f"mean extra iterations {report.mean_extra_iterations:.1f}")
    if cfg.out:
        click.echo(f"[+] Report written to {cfg.out}")
    return EXIT_OK


@cli.command("frozen-sweep")
@click.option("--code", help="Parent code file")
@click.option("--m", "m_values", default="0,16", show_default=True, help="Comma-separated extra frozen bit counts")
@click.option("--snr", help="Eb/N0 grid start:step:stop in dB")
@click.option("--out-prefix", "out", help="Prefix for the per-m and combined CSVs")
@decoder_options
@click.pass_obj
def frozen_sweep(obj, m_values, config_path, **flags):
    """Simulate codes with extra random frozen bits."""
    cfg = resolve_config(config_path, **flags)
    if not cfg.code:
        raise click.UsageError("--code is required")
    ms: List[int] = parse_int_list(m_values)
    decoder = cfg.decoder_config(llr_max=cfg.value_or("llr_max", FROZEN_SWEEP_LLR_MAX))
    reports = asyncio.run(
        get_dependencies(cfg.workers, obj["progress"]).frozen_sweep(
            cfg.code, ms, decoder, cfg.grid, cfg.stop_rule(), cfg.seed,
            out_prefix=cfg.out, chunk_frames=cfg.chunk_frames,
        )
    )
    for m, report in reports.items():
        bers = ", ".join(f"{p.ber:.2e}" for p in report.points)
        click.echo(f"m={m}: BER {bers}")
    if cfg.out:
        click.echo(f"[+] Reports written with prefix {cfg.out}")
    return EXIT_OK


@cli.command("validate")
@click.option("--code", required=True, help="Code file")
@click.option("--testset", required=True, help="Test-set file")
def validate(code: str, testset: str):
    """Replay every record of a test set against its capture predicate."""
    bad = asyncio.run(get_dependencies().validate(code, testset))
    if bad:
        click.echo(f"[!] {len(bad)} records fail replay: {bad[:20]}", err=True)
        return EXIT_DATA
    click.echo("[+] Every record replays as captured")
    return EXIT_OK


def main():
    """Main entry point."""
    cli()


if __name__ == "__main__":
    main()
