"""Command-line client for the census service.

Every subcommand speaks HTTP to the service layer.  By default the requests
run against an in-process application instance (no socket, no server to
start); `--server URL` points them at a running instance instead.  Outputs
are deterministic: CSV on stdout, human-readable summaries on stderr.

Exit status: 0 on success, 1 when a requested verification fails, 2 on
input or capacity errors.
"""

from __future__ import annotations

import argparse
import asyncio
import sys

import httpx


def _request(server: str | None, method: str, path: str,
             payload: dict | None = None) -> httpx.Response:
    if server:
        with httpx.Client(base_url=server, timeout=None) as client:
            return client.request(method, path, json=payload)

    from .service.app import create_app

    async def go() -> httpx.Response:
        transport = httpx.ASGITransport(app=create_app())
        async with httpx.AsyncClient(transport=transport, timeout=None,
                                     base_url="http://service") as client:
            return await client.request(method, path, json=payload)

    return asyncio.run(go())


def _fetch(server: str | None, method: str, path: str,
           payload: dict | None = None) -> dict:
    """One service call; failures print the error detail and exit 2."""
    try:
        resp = _request(server, method, path, payload)
    except httpx.HTTPError as exc:
        print(f"error: cannot reach service: {exc}", file=sys.stderr)
        raise SystemExit(2)
    if resp.status_code != 200:
        try:
            detail = resp.json().get("detail")
        except ValueError:
            detail = resp.text
        print(f"error: {detail}", file=sys.stderr)
        raise SystemExit(2)
    return resp.json()


def _flag(value: bool) -> str:
    return "true" if value else "false"


def _cmd_census(args) -> int:
    payload = {"nmax": args.nmax, "budget": args.budget,
               "split": args.split, "symmetry": args.symmetry == "on"}
    body = _fetch(args.server, "POST", "/v1/census", payload)
    print("N,count,doubles,removed")
    for row in body["rows"]:
        print(f"{row['N']},{row['count']},"
              f"{_flag(row['doubles'])},{_flag(row['removed'])}")
    return 0


def _cmd_u_set(args) -> int:
    payload = {"source": args.source, "nmax": args.nmax,
               "certify": args.certify}
    body = _fetch(args.server, "POST", "/v1/doubling", payload)
    for m in body["members"]:
        print(m)
    if not args.certify:
        return 0
    for line in body["certificates"]:
        print(line)
    if not body["certified"]:
        print("error: certification cross-check failed", file=sys.stderr)
        return 1
    print("certification: pass", file=sys.stderr)
    return 0


def _cmd_bounds(args) -> int:
    body = _fetch(args.server, "POST", "/v1/bounds", {"checks": args.checks})
    print("check,point,lhs,rhs,pass")
    for rep in body["reports"]:
        for r in rep["rows"]:
            print(f"{r['check']},{r['point']},{r['lhs']!r},{r['rhs']!r},"
                  f"{_flag(r['passed'])}")
    for rep in body["reports"]:
        state = "pass" if rep["passed"] else "FAIL"
        print(f"{rep['name']} [{rep['checked_range']}]: "
              f"{len(rep['rows'])} points, {state}", file=sys.stderr)
    return 0 if body["passed"] else 1


def _cmd_report(args) -> int:
    if args.table1:
        body = _fetch(args.server, "GET", "/v1/report/histogram")
        print("n,D")
        for n, d in enumerate(body["bins"], start=1):
            print(f"{n},{d}")
        if body["flagged"]:
            print(f"edge cases resolved exactly at N = {body['flagged']}",
                  file=sys.stderr)
        return 0
    if args.figure:
        body = _fetch(args.server, "GET", "/v1/report/ratio")
        print("N,y")
        for p in body["points"]:
            print(f"{p['N']},{p['y']:.3f}")
        return 0
    body = _fetch(args.server, "POST", "/v1/report/verify",
                  {"nmax": args.nmax})
    rep = body["report"]
    print("check,point,lhs,rhs,pass")
    for r in rep["rows"]:
        print(f"{r['check']},{r['point']},{r['lhs']!r},{r['rhs']!r},"
              f"{_flag(r['passed'])}")
    state = "pass" if rep["passed"] else "FAIL"
    print(f"{rep['name']} [{rep['checked_range']}]: "
          f"{len(rep['rows'])} points, {state}", file=sys.stderr)
    return 0 if rep["passed"] else 1


def _cmd_serve(args) -> int:
    import uvicorn

    from .service.app import create_app

    uvicorn.run(create_app(), host=args.host, port=args.port)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="efcensus",
        description="Exact census of distinct unit-fraction subset sums.")
    parser.add_argument("--server", metavar="URL", default=None,
                        help="base URL of a running service "
                             "(default: run in process)")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("census", help="exact counts for N = 1..nmax")
    p.add_argument("--nmax", type=int, required=True)
    p.add_argument("--budget", type=int, default=None,
                   help="bitmap budget in bytes")
    p.add_argument("--split", default=None,
                   type=lambda s: s if s == "auto" else int(s),
                   help="splitting modulus: a prime or 'auto'")
    p.add_argument("--symmetry", choices=("on", "off"), default="off")
    p.set_defaults(func=_cmd_census)

    p = sub.add_parser("u-set", help="doubling indices, one per line")
    p.add_argument("--source", choices=("census", "table"), default="table")
    p.add_argument("--nmax", type=int, default=60,
                   help="census range when --source census")
    p.add_argument("--certify", action="store_true",
                   help="cross-check chains and identity certificates "
                        "on [1, 100] and print the identity lines")
    p.set_defaults(func=_cmd_u_set)

    p = sub.add_parser("bounds", help="numeric verification batteries")
    p.add_argument("--checks", default="all",
                   choices=("all", "3c", "6c", "7c", "9c", "t1"))
    p.set_defaults(func=_cmd_bounds)

    p = sub.add_parser("report", help="summary series from the count table")
    mode = p.add_mutually_exclusive_group(required=True)
    mode.add_argument("--table1", action="store_true",
                      help="ten-bin growth-ratio histogram as n,D")
    mode.add_argument("--figure", action="store_true",
                      help="density/entropy ratio series as N,y")
    mode.add_argument("--verify", action="store_true",
                      help="recompute counts and compare with the reference")
    p.add_argument("--nmax", type=int, default=60,
                   help="recomputation range for --verify")
    p.set_defaults(func=_cmd_report)

    p = sub.add_parser("serve", help="run the HTTP service")
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8000)
    p.set_defaults(func=_cmd_serve)

    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
