"""Command line entry points: ingest, serve, simulate, analyze."""

from __future__ import annotations

import argparse
import json
from pathlib import Path

from .catalog import Catalog, load_catalog, synthetic_corpus
from .report import analyze
from .session import SessionStore
from .sim import SimulationConfig, build_latent, run_simulation, \
    synthesize_session_eeg


def _load_or_generate_catalog(path: str | None, seed: int = 7) -> Catalog:
    if path is None:
        return synthetic_corpus(seed=seed)
    p = Path(path)
    if p.suffix == ".json":
        return Catalog.load(p)
    return load_catalog(p / "movies.csv",
                        p / "tags.csv" if (p / "tags.csv").exists() else None,
                        p / "ratings.csv" if (p / "ratings.csv").exists() else None)


def cmd_ingest(args) -> int:
    folder = Path(args.data_dir)
    catalog = load_catalog(
        folder / "movies.csv",
        folder / "tags.csv" if (folder / "tags.csv").exists() else None,
        folder / "ratings.csv" if (folder / "ratings.csv").exists() else None)
    catalog.save(args.out)
    print(f"ingested {len(catalog)} items "
          f"({catalog.skipped_featureless} skipped featureless) -> {args.out}")
    return 0


def cmd_serve(args) -> int:
    import uvicorn

    from .api import create_app
    catalog = _load_or_generate_catalog(args.catalog)
    print(f"training embedding on {len(catalog)} items...")
    latent = build_latent(catalog, seed=args.seed)
    store = SessionStore(catalog, latent, log_dir=args.log_dir)
    app = create_app(store)
    uvicorn.run(app, host=args.host, port=args.port)
    return 0


def cmd_simulate(args) -> int:
    catalog = _load_or_generate_catalog(args.catalog)
    out = Path(args.out)
    sessions_dir = out / "sessions"
    sessions_dir.mkdir(parents=True, exist_ok=True)

    def writer_factory(session_id: str):
        path = sessions_dir / f"{session_id}.jsonl"
        path.unlink(missing_ok=True)

        def write(event: dict) -> None:
            with path.open("a", encoding="utf-8") as fh:
                fh.write(json.dumps(event, sort_keys=True) + "\n")
        return write

    config = SimulationConfig(sessions_per_group=args.sessions,
                              trials=args.trials, seed=args.seed)
    result = run_simulation(catalog, config, log_writer_factory=writer_factory)
    (out / "summary.json").write_text(json.dumps(result.summary, indent=1))
    print(json.dumps(result.summary, indent=1))

    if args.eeg:
        eeg_dir = out / "eeg"
        eeg_dir.mkdir(exist_ok=True)
        from .eeg import save_session_eeg
        for group, sessions in result.per_group.items():
            for s in sessions:
                epochs = synthesize_session_eeg(
                    [t.xi for t in s.trials],
                    seed=hash(s.session_id) % (2 ** 31))
                save_session_eeg(eeg_dir / f"{s.session_id}.csv",
                                 eeg_dir / f"{s.session_id}.json", epochs)
        print(f"synthetic EEG written to {eeg_dir}")
    return 0


def cmd_analyze(args) -> int:
    manifest = analyze(args.sessions_dir, args.eeg_dir, args.out)
    print(json.dumps(manifest, indent=1))
    return 0


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="recloop",
        description="Interactive explainable recommendation loop tools")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("ingest", help="read MovieLens CSVs into a catalog file")
    p.add_argument("data_dir", help="folder with movies.csv (+ tags/ratings)")
    p.add_argument("--out", default="catalog.json")
    p.set_defaults(func=cmd_ingest)

    p = sub.add_parser("serve", help="run the HTTP API")
    p.add_argument("--port", type=int, default=8000)
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--catalog", default=None,
                   help="catalog.json or MovieLens folder; default synthetic")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--log-dir", default="session_logs")
    p.set_defaults(func=cmd_serve)

    p = sub.add_parser("simulate", help="run the simulated-user experiment")
    p.add_argument("--sessions", type=int, default=30, help="per group")
    p.add_argument("--trials", type=int, default=10)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--catalog", default=None)
    p.add_argument("--out", default="sim_out")
    p.add_argument("--eeg", action="store_true",
                   help="also synthesize per-session EEG recordings")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("analyze", help="build report tables from logs + EEG")
    p.add_argument("--sessions-dir", required=True)
    p.add_argument("--eeg-dir", default=None)
    p.add_argument("--out", default="report_out")
    p.set_defaults(func=cmd_analyze)

    args = parser.parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    raise SystemExit(main())
