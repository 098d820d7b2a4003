"""Command-line client for the deployment service.

Subcommands post to the HTTP endpoints and write the returned artifacts
locally. Without ``--server`` the service app runs in-process, so the CLI
works standalone; with it, the same requests go to a remote instance.

Exit codes: 0 success, 1 verification found violations, 2 parse failure,
3 validation failure, 4 metric/geometry mismatch, 5 runtime failure,
6 transport failure.
"""

from __future__ import annotations

import argparse
import asyncio
import json
import sys
from pathlib import Path

import httpx

EXIT_CODES = {
    "parse": 2,
    "validation": 3,
    "metric_mismatch": 4,
    "runtime": 5,
    "transport": 6,
}


class ServiceClient:
    """Thin POST wrapper; in-process ASGI by default, HTTP when given a URL."""

    def __init__(self, server: str | None):
        self.server = server.rstrip("/") if server else None

    @staticmethod
    async def _asgi_post(path: str, payload: dict) -> httpx.Response:
        from .service import app

        transport = httpx.ASGITransport(app=app)
        async with httpx.AsyncClient(transport=transport, base_url="http://service", timeout=600.0) as client:
            return await client.post(path, json=payload)

    def post(self, path: str, payload: dict) -> dict:
        try:
            if self.server:
                response = httpx.post(self.server + path, json=payload, timeout=600.0)
            else:
                response = asyncio.run(self._asgi_post(path, payload))
        except httpx.HTTPError as exc:
            _fail("transport", f"could not reach service: {exc}")
        body = response.json()
        if response.status_code != 200:
            error_class = body.get("error_class", "runtime")
            _fail(error_class, body.get("detail", str(body)))
        return body


def _fail(error_class: str, detail: str):
    print(f"error ({error_class}): {detail}", file=sys.stderr)
    sys.exit(EXIT_CODES.get(error_class, 5))


def _load_document(path: str) -> dict:
    p = Path(path)
    if not p.exists():
        _fail("parse", f"scenario file not found: {p}")
    try:
        return json.loads(p.read_text())
    except json.JSONDecodeError as exc:
        _fail("parse", f"scenario file {p} is not valid JSON: {exc}")


def _inline_heights(doc: dict, scenario_path: str) -> dict:
    """Resolve a CSV heights reference client-side so the request is
    self-contained for remote servers."""
    terrain = doc.get("terrain")
    if isinstance(terrain, dict) and isinstance(terrain.get("heights"), str):
        csv_path = Path(terrain["heights"])
        if not csv_path.is_absolute():
            csv_path = Path(scenario_path).parent / csv_path
        if not csv_path.exists():
            _fail("parse", f"terrain.heights CSV not found: {csv_path}")
        rows = []
        for line in csv_path.read_text().strip().splitlines():
            try:
                rows.append([float(v) for v in line.split(",")])
            except ValueError as exc:
                _fail("parse", f"terrain.heights CSV {csv_path} is malformed: {exc}")
        doc = dict(doc)
        doc["terrain"] = {**terrain, "heights": rows}
    return doc


def _write(out_dir: str, name: str, text: str) -> Path:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    target = out / name
    target.write_text(text)
    return target


def _report_json(report: dict) -> str:
    return json.dumps(report, indent=2, sort_keys=True) + "\n"


def _common_request(args, doc: dict) -> dict:
    payload = {"scenario": doc, "use_cache": not args.no_cache, "threads": args.threads}
    if args.cache_dir:
        payload["cache_dir"] = args.cache_dir
    if getattr(args, "seed", None) is not None:
        payload["seed"] = args.seed
    return payload


def cmd_deploy(args) -> int:
    doc = _inline_heights(_load_document(args.scenario), args.scenario)
    payload = _common_request(args, doc)
    payload["metric"] = args.metric
    if args.task:
        payload["task"] = args.task
    body = ServiceClient(args.server).post("/deploy", payload)
    report = body["report"]
    report_path = _write(args.out, "report.json", _report_json(report))
    svg_path = _write(args.out, "deploy.svg", body["svg"])
    print(f"selected sites: {report['result']['selected']}")
    print(f"utility value: {report['result']['value']:.6f} (guarantee {report['result']['guarantee']})")
    print(f"max target distance: {report['max_target_distance']:.6f}")
    for note in report["warnings"]:
        print(f"warning: {note}", file=sys.stderr)
    print(f"wrote {report_path} and {svg_path}")
    return 0


def cmd_matrix(args) -> int:
    doc = _inline_heights(_load_document(args.scenario), args.scenario)
    payload = _common_request(args, doc)
    payload["metric"] = args.metric
    body = ServiceClient(args.server).post("/matrix", payload)
    stem = f"{body['meta']['scenario_hash']}.{body['meta']['metric']}"
    csv_path = _write(args.out, f"{stem}.csv", body["csv"])
    meta_path = _write(args.out, f"{stem}.meta.json", _report_json(body["meta"]))
    print(f"wrote {csv_path} and {meta_path}")
    return 0


def cmd_terrain(args) -> int:
    doc = _inline_heights(_load_document(args.scenario), args.scenario)
    body = ServiceClient(args.server).post("/terrain", {"scenario": doc})
    paths = [
        _write(args.out, "tau.csv", body["csv"]),
        _write(args.out, "tau.pgm", body["pgm"]),
        _write(args.out, "tau.svg", body["svg"]),
    ]
    print("wrote " + ", ".join(str(p) for p in paths))
    return 0


def _parse_xy(text: str, flag: str) -> list[float]:
    try:
        x, y = text.split(",")
        return [float(x), float(y)]
    except ValueError:
        _fail("validation", f"{flag} must be 'x,y', got {text!r}")


def cmd_path(args) -> int:
    doc = _inline_heights(_load_document(args.scenario), args.scenario)
    payload = {
        "scenario": doc,
        "start": _parse_xy(getattr(args, "from"), "--from"),
        "end": _parse_xy(args.to, "--to"),
    }
    if args.metric:
        payload["metric"] = args.metric
    if args.seed is not None:
        payload["seed"] = args.seed
    body = ServiceClient(args.server).post("/path", payload)
    svg_path = _write(args.out, "path.svg", body["svg"])
    if body["reachable"]:
        print(f"distance: {body['distance']:.6f} ({len(body['polyline'])} waypoints)")
    else:
        print("unreachable")
    print(f"wrote {svg_path}")
    return 0


def cmd_verify(args) -> int:
    doc = _inline_heights(_load_document(args.scenario), args.scenario)
    payload = {"scenario": doc, "metric": args.metric, "trials": args.trials, "seed": args.seed}
    if args.task:
        payload["task"] = args.task
    body = ServiceClient(args.server).post("/verify", payload)
    print(_report_json(body), end="")
    return 0 if body["clean"] else 1


def cmd_serve(args) -> int:
    import uvicorn

    from .service import app

    uvicorn.run(app, host=args.host, port=args.port)
    return 0


def _add_common(parser: argparse.ArgumentParser, seed: bool = True) -> None:
    parser.add_argument("--server", default=None, help="service URL; default runs the service in-process")
    parser.add_argument("--out", default=".", help="output directory (default: current directory)")
    parser.add_argument("--cache-dir", default=None, help="matrix cache directory (or DEPLOYOPT_CACHE_DIR)")
    parser.add_argument("--no-cache", action="store_true", help="bypass the matrix cache")
    parser.add_argument("--threads", type=int, default=0, help="worker threads for matrix builds (0 = auto)")
    if seed:
        parser.add_argument("--seed", type=int, default=None, help="override the scenario seed")


METRIC_CHOICES = ["euclidean", "visgraph", "rrtstar", "rrtstar-unweighted"]


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="deployopt", description="Deployment optimization toolkit")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("deploy", help="run the full deployment pipeline")
    p.add_argument("scenario", help="scenario JSON file")
    p.add_argument("--metric", required=True, choices=METRIC_CHOICES)
    p.add_argument("--task", choices=["fair-access", "hotspot"], default=None)
    _add_common(p)
    p.set_defaults(func=cmd_deploy)

    p = sub.add_parser("matrix", help="build and cache the distance matrix only")
    p.add_argument("scenario")
    p.add_argument("--metric", required=True, choices=METRIC_CHOICES)
    _add_common(p)
    p.set_defaults(func=cmd_matrix)

    p = sub.add_parser("terrain", help="emit traversability CSV, PGM image, and SVG")
    p.add_argument("scenario")
    _add_common(p, seed=False)
    p.set_defaults(func=cmd_terrain)

    p = sub.add_parser("path", help="query one shortest path and render it")
    p.add_argument("scenario")
    p.add_argument("--from", required=True, help="start point 'x,y'")
    p.add_argument("--to", required=True, help="end point 'x,y'")
    p.add_argument("--metric", choices=METRIC_CHOICES, default=None)
    _add_common(p)
    p.set_defaults(func=cmd_path)

    p = sub.add_parser("verify", help="property checks and greedy-vs-brute-force audit")
    p.add_argument("scenario")
    p.add_argument("--metric", choices=METRIC_CHOICES, default="euclidean")
    p.add_argument("--task", choices=["fair-access", "hotspot"], default=None)
    p.add_argument("--trials", type=int, default=200)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--server", default=None)
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("serve", help="run the HTTP service")
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8000)
    p.set_defaults(func=cmd_serve)

    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
