"""Latency and success-rate benchmark harness.

Runs a corpus of natural-language commands through a provider one at a
time (concurrency would distort the latency numbers), classifies each
response against the expected intent, and summarizes the results. Ships
the recorded 20-trial reference comparison (direct gpt-3.5/gpt-4 runs
vs the ROSGPT Flask-bridge baseline) as a checksummed data file.

The reference data is preserved exactly as its source printed it, which
means it carries internal inconsistencies: the printed gpt-3.5 summary
mean (1.18) does not match the mean of its own 20 values (1.0965), and
the claimed 7.01% average reduction is not reproducible from any pairing
of the published numbers. `reference_report` flags these instead of
correcting them.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass
from importlib import resources
from pathlib import Path
from typing import Sequence

from .core import Action, CommandIntent, intents_match
from .interpreter import DefaultsConfig, build_prompts, parse_response
from .llm_gateway import LatencyRecord, ProviderConfig, ProviderError, complete

REFERENCE_TABLE_RESOURCE = "reference_table.tsv"
CORPUS_RESOURCE = "corpus.tsv"

REFERENCE_TABLE_SHA256 = "535a02b5859a394490bef1497ba5b43b68d3f47619b9984ede63939ff7bdf230"
CORPUS_SHA256 = "7d5634ec63227d8ec8aabdfdd603216202df11612a01f4145870444520237b16"

INTENT_MATCH_TOLERANCE = 1e-9


class DatasetError(ValueError):
    """Bundled dataset failed validation (checksum, shape, or fields)."""


@dataclass(frozen=True)
class CommandCase:
    id: str
    transcript: str
    expected: CommandIntent


@dataclass(frozen=True)
class ReferenceTable:
    """The bundled 20-trial latency/success comparison."""

    gpt35: tuple[float, ...]
    gpt4: tuple[float, ...]
    rosgpt: tuple[float, ...]
    gpt35_success: tuple[bool, ...]
    gpt4_success: tuple[bool, ...]
    rosgpt_success: tuple[bool, ...]
    printed_means: dict[str, float]
    printed_successes: dict[str, int]
    claimed_reduction_percent: float
    prose_means: tuple[float, float]

    def __post_init__(self) -> None:
        for name in ("gpt35", "gpt4", "rosgpt"):
            if len(getattr(self, name)) != 20:
                raise DatasetError(f"column {name} must have exactly 20 rows")
            if len(getattr(self, f"{name}_success")) != 20:
                raise DatasetError(f"success column {name} must have exactly 20 rows")

    def column(self, name: str) -> tuple[float, ...]:
        try:
            return {"gpt35": self.gpt35, "gpt4": self.gpt4, "rosgpt": self.rosgpt}[name]
        except KeyError:
            raise KeyError(f"unknown reference column {name!r}") from None


@dataclass(frozen=True)
class Stats:
    mean: float  # arithmetic mean rounded to 4 decimals
    min: float
    max: float
    count: int
    successes: int | None = None


@dataclass(frozen=True)
class ComparisonReport:
    mean_a: float
    mean_b: float
    delta: float              # mean_b - mean_a; positive when a is faster
    percent_reduction: float  # of b's mean

    def describe(self) -> str:
        return (
            f"mean {self.mean_a:.4f} s vs {self.mean_b:.4f} s: "
            f"delta {self.delta:+.4f} s, reduction {self.percent_reduction:.2f}%"
        )


def _read_resource(name: str, expected_sha256: str, path: str | Path | None = None) -> str:
    if path is not None:
        text = Path(path).read_text()
        return text
    text = resources.files("nlteleop.data").joinpath(name).read_text()
    digest = hashlib.sha256(text.encode()).hexdigest()
    if digest != expected_sha256:
        raise DatasetError(
            f"bundled dataset {name} checksum mismatch: {digest} != {expected_sha256}"
        )
    return text


def _data_lines(text: str) -> tuple[dict[str, str], list[dict[str, str]]]:
    """Split a TSV resource into (commented key=value metadata, data rows)."""
    meta: dict[str, str] = {}
    raw_rows: list[list[str]] = []
    header: list[str] | None = None
    for line in text.splitlines():
        if not line.strip():
            continue
        if line.startswith("#"):
            stripped = line.lstrip("#").strip()
            if "=" in stripped and " " not in stripped.split("=", 1)[0]:
                key, _, value = stripped.partition("=")
                meta[key.strip()] = value.strip()
            continue
        cells = line.split("\t")
        if header is None:
            header = cells
            continue
        if len(cells) != len(header):
            raise DatasetError(f"bad row width: {line!r}")
        raw_rows.append(cells)
    if header is None:
        raise DatasetError("dataset has no header row")
    return meta, [dict(zip(header, row)) for row in raw_rows]


def load_reference_table(path: str | Path | None = None) -> ReferenceTable:
    """Load the bundled (or an external) reference comparison table."""
    text = _read_resource(REFERENCE_TABLE_RESOURCE, REFERENCE_TABLE_SHA256, path)
    meta, rows = _data_lines(text)
    if len(rows) != 20:
        raise DatasetError(f"reference table must have 20 rows, got {len(rows)}")

    def flag(cell: str) -> bool:
        if cell not in ("OK", "FAIL"):
            raise DatasetError(f"success flag must be OK or FAIL, got {cell!r}")
        return cell == "OK"

    return ReferenceTable(
        gpt35=tuple(float(r["gpt35_latency"]) for r in rows),
        gpt4=tuple(float(r["gpt4_latency"]) for r in rows),
        rosgpt=tuple(float(r["rosgpt_latency"]) for r in rows),
        gpt35_success=tuple(flag(r["gpt35_success"]) for r in rows),
        gpt4_success=tuple(flag(r["gpt4_success"]) for r in rows),
        rosgpt_success=tuple(flag(r["rosgpt_success"]) for r in rows),
        printed_means={
            "gpt35": float(meta["printed_mean_gpt35"]),
            "gpt4": float(meta["printed_mean_gpt4"]),
            "rosgpt": float(meta["printed_mean_rosgpt"]),
        },
        printed_successes={
            "gpt35": int(meta["printed_successes_gpt35"]),
            "gpt4": int(meta["printed_successes_gpt4"]),
            "rosgpt": int(meta["printed_successes_rosgpt"]),
        },
        claimed_reduction_percent=float(meta["claimed_mean_reduction_percent"]),
        prose_means=(float(meta["prose_mean_a"]), float(meta["prose_mean_b"])),
    )


def load_corpus(path: str | Path | None = None) -> list[CommandCase]:
    """Load the bundled (or an external) command corpus."""
    text = _read_resource(CORPUS_RESOURCE, CORPUS_SHA256, path)
    _, rows = _data_lines(text)
    cases = []
    for row in rows:
        action = Action(row["action"])
        cases.append(
            CommandCase(
                id=row["id"],
                transcript=row["transcript"],
                expected=CommandIntent(action, float(row["magnitude"]), float(row["speed"])),
            )
        )
    if not cases:
        raise DatasetError("corpus is empty")
    return cases


@dataclass(frozen=True)
class BenchPolicy:
    """Retry is opt-in and explicit so latency statistics stay honest;
    only the final attempt's timing is recorded."""

    retries: int = 0

    def __post_init__(self) -> None:
        if self.retries < 0:
            raise ValueError("retries must be >= 0")


def run_case(
    case: CommandCase,
    config: ProviderConfig,
    defaults: DefaultsConfig | None = None,
    policy: BenchPolicy | None = None,
) -> LatencyRecord:
    policy = policy or BenchPolicy()
    prompts = build_prompts(case.transcript, defaults)
    attempts = policy.retries + 1
    last_error: Exception | None = None
    for _ in range(attempts):
        try:
            content, timing = complete(config, prompts)
        except ProviderError as exc:
            last_error = exc
            continue
        intent: CommandIntent | None
        error: str | None
        try:
            intent = parse_response(content)
            error = None
        except ValueError as exc:
            intent = None
            error = type(exc).__name__
        success = intent is not None and intents_match(
            intent, case.expected, INTENT_MATCH_TOLERANCE
        )
        return LatencyRecord(
            command=case.transcript,
            provider=config.model,
            t_request=timing.t_request,
            t_response=timing.t_response,
            latency=timing.latency,
            intent=intent,
            error=error,
            success=success,
        )
    assert last_error is not None
    elapsed = getattr(last_error, "elapsed", 0.0)
    return LatencyRecord(
        command=case.transcript,
        provider=config.model,
        t_request=0.0,
        t_response=elapsed,
        latency=elapsed,
        intent=None,
        error=type(last_error).__name__,
        success=False,
    )


def run_bench(
    corpus: Sequence[CommandCase],
    config: ProviderConfig,
    defaults: DefaultsConfig | None = None,
    policy: BenchPolicy | None = None,
) -> list[LatencyRecord]:
    """Run every case sequentially, in corpus order; failures never stop
    the run, they are recorded as unsuccessful rows."""
    return [run_case(case, config, defaults, policy) for case in corpus]


def summarize(
    latencies: Sequence[float] | Sequence[LatencyRecord],
    successes: Sequence[bool] | None = None,
) -> Stats:
    """Stats over raw latency values or LatencyRecords."""
    if len(latencies) == 0:
        raise ValueError("cannot summarize an empty series")
    if latencies and isinstance(latencies[0], LatencyRecord):
        records: Sequence[LatencyRecord] = latencies  # type: ignore[assignment]
        values = [r.latency for r in records]
        success_count: int | None = sum(1 for r in records if r.success)
    else:
        values = [float(v) for v in latencies]  # type: ignore[arg-type]
        success_count = sum(bool(s) for s in successes) if successes is not None else None
    return Stats(
        mean=round(sum(values) / len(values), 4),
        min=min(values),
        max=max(values),
        count=len(values),
        successes=success_count,
    )


def compare(a: Stats, b: Stats) -> ComparisonReport:
    """Percent reduction of a's mean relative to b's mean."""
    if b.mean == 0:
        raise ValueError("comparison baseline mean is zero")
    delta = b.mean - a.mean
    return ComparisonReport(
        mean_a=a.mean,
        mean_b=b.mean,
        delta=delta,
        percent_reduction=delta / b.mean * 100.0,
    )


def reference_report(table: ReferenceTable | None = None) -> str:
    """Human-readable summary of the reference data, with every
    source-printed number that disagrees with the column arithmetic
    called out explicitly."""
    table = table or load_reference_table()
    gpt35 = summarize(table.gpt35, table.gpt35_success)
    gpt4 = summarize(table.gpt4, table.gpt4_success)
    rosgpt = summarize(table.rosgpt, table.rosgpt_success)
    col_cmp = compare(gpt35, rosgpt)
    prose_a, prose_b = table.prose_means
    prose_cmp = compare(
        Stats(mean=prose_b, min=prose_b, max=prose_b, count=1),
        Stats(mean=prose_a, min=prose_a, max=prose_a, count=1),
    )
    lines = [
        "Reference comparison (20 trials per provider)",
        f"  direct gpt-3.5-turbo: mean {gpt35.mean:.4f} s, "
        f"min {gpt35.min:.2f}, max {gpt35.max:.2f}, successes {gpt35.successes}/20",
        f"  direct gpt-4.0:       mean {gpt4.mean:.4f} s, "
        f"min {gpt4.min:.2f}, max {gpt4.max:.2f}, successes {gpt4.successes}/20",
        f"  rosgpt baseline:      mean {rosgpt.mean:.4f} s, "
        f"min {rosgpt.min:.2f}, max {rosgpt.max:.2f}, successes {rosgpt.successes}/20",
        f"  gpt-3.5 vs baseline (column arithmetic): {col_cmp.describe()}",
        "  discrepancies preserved from the source:",
        f"    - printed gpt-3.5 summary mean {table.printed_means['gpt35']:.2f} s "
        f"differs from the mean of its own 20 values ({gpt35.mean:.4f} s); "
        "both are kept as-is.",
        f"    - claimed average reduction {table.claimed_reduction_percent:.2f}% is not "
        f"reproducible: column means give {col_cmp.percent_reduction:.2f}%, the two "
        f"quoted means ({prose_a:.4f} s / {prose_b:.4f} s) give "
        f"{prose_cmp.percent_reduction:.2f}%.",
        f"    - the quoted means attribute {prose_a:.4f} s to the direct gpt-3.5 run "
        f"and {prose_b:.4f} s to the baseline, the reverse of the per-trial columns; "
        "reported, not adjudicated.",
    ]
    return "\n".join(lines)


def records_report(records: Sequence[LatencyRecord]) -> str:
    """Fixed-width per-case table plus a summary line."""
    stats = summarize(records)
    lines = [
        f"{'#':>3}  {'latency[s]':>10}  {'ok':>4}  command",
    ]
    for i, record in enumerate(records, start=1):
        ok = "OK" if record.success else "FAIL"
        lines.append(f"{i:>3}  {record.latency:>10.4f}  {ok:>4}  {record.command}")
    lines.append(
        f"total {stats.count}, successes {stats.successes}, "
        f"mean {stats.mean:.4f} s, min {stats.min:.4f}, max {stats.max:.4f}"
    )
    return "\n".join(lines)


def write_report_file(records: Sequence[LatencyRecord], path: str | Path) -> None:
    """Machine-readable report: one TSV row per case plus summary metadata."""
    stats = summarize(records)
    lines = [
        f"# mean={stats.mean}",
        f"# min={stats.min}",
        f"# max={stats.max}",
        f"# count={stats.count}",
        f"# successes={stats.successes}",
        "n\tcommand\tprovider\tlatency\tsuccess\terror",
    ]
    for i, r in enumerate(records, start=1):
        error = r.error or ""
        lines.append(
            f"{i}\t{r.command}\t{r.provider}\t{r.latency:.6f}\t"
            f"{'OK' if r.success else 'FAIL'}\t{error}"
        )
    Path(path).write_text("\n".join(lines) + "\n")
