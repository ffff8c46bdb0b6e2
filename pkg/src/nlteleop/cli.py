"""Command-line entry points: serve, repl, simulate, bench."""

from __future__ import annotations

import argparse
import os
import queue
import sys
from pathlib import Path

from .bench import (
    load_corpus,
    load_reference_table,
    records_report,
    reference_report,
    run_bench,
    summarize,
    write_report_file,
)
from .config import AppConfig, load_config
from .llm_gateway import MockServer, ProviderConfig
from .service import EventKind, Session, SessionEvent
from .service import serve as run_server

TERMINAL_KINDS = (EventKind.MOTION_COMPLETED, EventKind.ERROR)


def _app_config(args: argparse.Namespace) -> AppConfig:
    if getattr(args, "config", None):
        return load_config(args.config)
    return AppConfig()


def _resolve_schedule(spec: str | None) -> list[float]:
    """Schedule syntax: rosgpt|gpt35|gpt4 replay a reference column,
    fixed:<ms> repeats one delay, none/empty is immediate."""
    if not spec or spec == "none":
        return []
    if spec in ("rosgpt", "gpt35", "gpt4"):
        return list(load_reference_table().column(spec))
    if spec.startswith("fixed:"):
        millis = float(spec.split(":", 1)[1])
        if millis < 0:
            raise ValueError("fixed schedule must be >= 0 ms")
        return [millis / 1000.0]
    raise ValueError(f"unknown schedule {spec!r}")


def _provider_from_args(
    args: argparse.Namespace, config: AppConfig, mock: MockServer | None
) -> ProviderConfig:
    if mock is not None:
        return ProviderConfig(base_url=mock.base_url, model="mock")
    base_url = args.base_url or config.provider.base_url
    return ProviderConfig(
        base_url=base_url,
        model=args.model or config.provider.model,
        api_key=os.environ.get("OPENAI_API_KEY") or config.provider.api_key,
        timeout=config.provider.timeout,
        temperature=config.provider.temperature,
    )


def _print_events_until_done(session: Session, command_id: int) -> None:
    events: queue.Queue[SessionEvent] = queue.Queue()
    remove = session.add_listener(events.put)
    try:
        while True:
            event = events.get(timeout=120.0)
            if event.command_id != command_id:
                continue
            print(f"  [{event.kind.value}] {event.payload}")
            if event.kind in TERMINAL_KINDS:
                break
    finally:
        remove()


def cmd_serve(args: argparse.Namespace) -> int:
    config = _app_config(args)
    mock = None
    if args.provider == "mock":
        mock = MockServer(
            latency_schedule=_resolve_schedule(args.mock_latency),
            defaults=config.defaults,
        ).start()
    provider = _provider_from_args(args, config, mock)
    session = Session(
        provider=provider,
        defaults=config.defaults,
        sim_config=config.sim,
        controller_config=config.controller,
        realtime=not args.fast_sim,
    )
    console_dir = args.console if args.console and Path(args.console).is_dir() else None
    print(f"gateway on http://{args.host}:{args.port} (provider: {provider.model})")
    try:
        run_server(session, host=args.host, port=args.port, console_dir=console_dir)
    except KeyboardInterrupt:
        pass
    finally:
        session.shutdown()
        if mock is not None:
            mock.stop()
    return 0


def cmd_repl(args: argparse.Namespace) -> int:
    config = _app_config(args)
    mock = None
    if args.provider == "mock":
        mock = MockServer(defaults=config.defaults).start()
    provider = _provider_from_args(args, config, mock)
    session = Session(
        provider=provider,
        defaults=config.defaults,
        sim_config=config.sim,
        controller_config=config.controller,
        realtime=not args.fast_sim,
    )
    print("type a command ('/state' for pose, '/quit' to leave)")
    try:
        while True:
            try:
                line = input("> ").strip()
            except EOFError:
                break
            if not line:
                continue
            if line in ("/quit", "/exit"):
                break
            if line == "/state":
                print(session.state_snapshot())
                continue
            if line == "/metrics":
                print(session.metrics())
                continue
            command_id = session.submit_command(line)
            _print_events_until_done(session, command_id)
    except KeyboardInterrupt:
        print()
    finally:
        session.shutdown()
        if mock is not None:
            mock.stop()
    return 0


def cmd_simulate(args: argparse.Namespace) -> int:
    config = _app_config(args)
    mock = MockServer(defaults=config.defaults).start()
    session = Session(
        provider=ProviderConfig(base_url=mock.base_url, model="mock"),
        defaults=config.defaults,
        sim_config=config.sim,
        controller_config=config.controller,
        realtime=False,
    )
    try:
        for raw in Path(args.script).read_text().splitlines():
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            print(f"> {line}")
            command_id = session.submit_command(line)
            _print_events_until_done(session, command_id)
        print(f"final state: {session.state_snapshot()}")
    finally:
        session.shutdown()
        mock.stop()
    return 0


def cmd_bench(args: argparse.Namespace) -> int:
    config = _app_config(args)
    corpus = load_corpus(args.corpus) if args.corpus else load_corpus()
    mock = None
    if args.provider == "mock":
        mock = MockServer(
            latency_schedule=_resolve_schedule(args.schedule),
            defaults=config.defaults,
        ).start()
    provider = _provider_from_args(args, config, mock)
    try:
        records = run_bench(corpus, provider, config.defaults)
    finally:
        if mock is not None:
            mock.stop()

    print(records_report(records))
    print()
    print(reference_report())
    stats = summarize(records)
    baseline = summarize(
        load_reference_table().rosgpt, load_reference_table().rosgpt_success
    )
    from .bench import compare

    print()
    print(f"this run vs rosgpt baseline: {compare(stats, baseline).describe()}")
    if args.report:
        write_report_file(records, args.report)
        print(f"report written to {args.report}")
    return 0 if stats.successes == stats.count else 1


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="nlteleop",
        description="Natural-language teleoperation for a simulated robot",
    )
    parser.add_argument("--config", help="key=value config file", default=None)
    sub = parser.add_subparsers(dest="command", required=True)

    def add_provider_args(p: argparse.ArgumentParser) -> None:
        p.add_argument("--provider", choices=("mock", "http"), default="mock")
        p.add_argument("--base-url", default=None, help="http provider base URL")
        p.add_argument("--model", default=None, help="model name for http provider")

    p_serve = sub.add_parser("serve", help="run the HTTP/WebSocket gateway")
    add_provider_args(p_serve)
    p_serve.add_argument("--host", default="127.0.0.1")
    p_serve.add_argument("--port", type=int, default=8000)
    p_serve.add_argument(
        "--mock-latency", default=None,
        help="mock schedule: rosgpt|gpt35|gpt4|fixed:<ms>|none",
    )
    p_serve.add_argument(
        "--fast-sim", action="store_true",
        help="simulated time instead of wall-clock pacing",
    )
    p_serve.add_argument("--console", default=None, help="static console dir to serve")
    p_serve.set_defaults(func=cmd_serve)

    p_repl = sub.add_parser("repl", help="interactive command loop")
    add_provider_args(p_repl)
    p_repl.add_argument("--fast-sim", action="store_true")
    p_repl.set_defaults(func=cmd_repl)

    p_sim = sub.add_parser("simulate", help="run a script of commands")
    p_sim.add_argument("--script", required=True, help="text file, one command per line")
    p_sim.set_defaults(func=cmd_simulate)

    p_bench = sub.add_parser("bench", help="latency/success benchmark")
    add_provider_args(p_bench)
    p_bench.add_argument("--corpus", default=None, help="corpus TSV (default: bundled)")
    p_bench.add_argument(
        "--schedule", default=None,
        help="mock latency schedule: rosgpt|gpt35|gpt4|fixed:<ms>|none",
    )
    p_bench.add_argument("--report", default=None, help="write machine-readable report")
    p_bench.set_defaults(func=cmd_bench)

    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
