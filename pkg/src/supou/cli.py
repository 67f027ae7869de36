"""Command-line front end: a thin client of the HTTP service.

By default requests go to an in-process application instance; --server
points the same commands at a running remote service. Exit codes: 0 on
success, 1 on computation failure (or failed verify checks), 2 on
configuration errors.
"""

from __future__ import annotations

import csv
import json
import os
import sys
from pathlib import Path

import click

EXIT_COMPUTATION = 1
EXIT_CONFIG = 2


def _fmt(value):
    if isinstance(value, float):
        return "%.17g" % value
    if value is None:
        return ""
    return value


class Client:
    def __init__(self, server: str | None):
        if server:
            import httpx
            self._client = httpx.Client(base_url=server, timeout=600.0)
        else:
            from fastapi.testclient import TestClient
            from .service import create_app
            self._client = TestClient(create_app(), raise_server_exceptions=False)

    def request(self, method: str, path: str, payload: dict | None = None) -> dict:
        resp = self._client.request(method, path, json=payload)
        if resp.status_code == 422:
            detail = resp.json().get("detail", "invalid configuration")
            click.echo(f"configuration error: {detail}", err=True)
            sys.exit(EXIT_CONFIG)
        if resp.status_code != 200:
            try:
                detail = resp.json().get("detail", resp.text)
            except ValueError:
                detail = resp.text
            click.echo(f"computation failed ({resp.status_code}): {detail}", err=True)
            sys.exit(EXIT_COMPUTATION)
        return resp.json()


def _common(fn):
    fn = click.option("--config", "config_path", type=click.Path(), default=None,
                      help="JSON config file (whole payload, or keyed by subcommand).")(fn)
    fn = click.option("--out", "out_dir", type=click.Path(file_okay=False), default=None,
                      help="Output directory; stdout when omitted.")(fn)
    fn = click.option("--seed", type=int, default=None, help="Override the RNG seed.")(fn)
    fn = click.option("--threads", type=int, default=None,
                      help="Worker threads (falls back to SUPOU_THREADS).")(fn)
    fn = click.option("--format", "fmt", type=click.Choice(["csv", "json"]),
                      default="csv", help="Output format.")(fn)
    fn = click.option("--server", default=None,
                      help="Base URL of a running service; in-process by default.")(fn)
    return fn


def _load_payload(config_path: str | None, subcommand: str, seed, threads) -> dict:
    payload = {}
    if config_path:
        try:
            with open(config_path) as fh:
                data = json.load(fh)
        except (OSError, ValueError) as exc:
            click.echo(f"configuration error: cannot read {config_path}: {exc}", err=True)
            sys.exit(EXIT_CONFIG)
        if not isinstance(data, dict):
            click.echo("configuration error: config root must be an object", err=True)
            sys.exit(EXIT_CONFIG)
        payload = data.get(subcommand, data)
    if seed is not None:
        payload["seed"] = seed
    if threads is None:
        env = os.environ.get("SUPOU_THREADS")
        if env is not None:
            try:
                threads = int(env)
            except ValueError:
                click.echo(f"configuration error: SUPOU_THREADS={env!r} is not an integer",
                           err=True)
                sys.exit(EXIT_CONFIG)
    if threads is not None:
        payload["threads"] = threads
    return payload


def _emit(name: str, rows: list[dict], fieldnames: list[str],
          out_dir: str | None, fmt: str, full: dict | None = None):
    if fmt == "json":
        text = json.dumps(full if full is not None else rows, indent=2)
        if out_dir:
            Path(out_dir, f"{name}.json").write_text(text + "\n")
        else:
            click.echo(text)
        return
    target = open(Path(out_dir, f"{name}.csv"), "w", newline="") if out_dir else sys.stdout
    try:
        writer = csv.writer(target)
        writer.writerow(fieldnames)
        for row in rows:
            writer.writerow([_fmt(row.get(f)) for f in fieldnames])
    finally:
        if out_dir:
            target.close()


def _prepare_out(out_dir):
    if out_dir:
        Path(out_dir).mkdir(parents=True, exist_ok=True)


@click.group()
def main():
    """Cumulant growth of integrated and summed OU superpositions."""


@main.command()
@_common
def correlation(config_path, out_dir, seed, threads, fmt, server):
    """Correlation function of the superposition on a tau grid."""
    payload = _load_payload(config_path, "correlation", seed, None)
    payload.pop("threads", None)
    data = Client(server).request("POST", "/correlation", payload)
    _prepare_out(out_dir)
    _emit("correlation", data["rows"], ["tau", "quadrature", "closed_form"],
          out_dir, fmt, full=data)


@main.command()
@_common
def cumulants(config_path, out_dir, seed, threads, fmt, server):
    """Cumulants of the integrated or partial-sum aggregate on an (m, t) grid."""
    payload = _load_payload(config_path, "cumulants", seed, threads)
    data = Client(server).request("POST", "/cumulants", payload)
    rows = list(data["rows"])
    if data.get("cross_check_max_rel") is not None:
        rows.append({"kind": "cross-check", "m": None, "t": None, "factor": None,
                     "cumulant": data["cross_check_max_rel"],
                     "method": "max-relative-discrepancy"})
    _prepare_out(out_dir)
    _emit("cumulants", rows, ["kind", "m", "t", "factor", "cumulant", "method"],
          out_dir, fmt, full=data)


@main.command()
@_common
def scaling(config_path, out_dir, seed, threads, fmt, server):
    """Fitted scaling exponents and the intermittency verdict."""
    payload = _load_payload(config_path, "scaling", seed, threads)
    data = Client(server).request("POST", "/scaling", payload)
    rows = [dict(r, verdict=data["verdict"]) for r in data["rows"]]
    _prepare_out(out_dir)
    _emit("scaling", rows,
          ["exponent", "estimate", "stderr", "r2", "t_min", "t_max", "n_points",
           "theoretical", "guaranteed", "verdict"], out_dir, fmt, full=data)
    if out_dir:
        for exponent, pts in data["plot_data"].items():
            path = Path(out_dir, f"scaling_q{exponent}.dat")
            path.write_text("".join(f"{_fmt(x)} {_fmt(y)}\n" for x, y in pts))
    click.echo(f"verdict: {data['verdict']}", err=True)


@main.command()
@_common
def simulate(config_path, out_dir, seed, threads, fmt, server):
    """Monte Carlo ensemble summaries plus the seed ledger."""
    payload = _load_payload(config_path, "simulate", seed, None)
    payload.pop("threads", None)
    data = Client(server).request("POST", "/simulate", payload)
    _prepare_out(out_dir)
    if fmt == "json" and not out_dir:
        click.echo(json.dumps(data, indent=2))
        return
    _emit("simulate_cumulants", data["cumulants"],
          ["m", "t", "value", "se", "replicas", "analytic"], out_dir, fmt, full=data)
    if data["moments"]:
        _emit("simulate_moments", data["moments"],
              ["q", "t", "value", "se", "replicas", "mc_unreliable"], out_dir, fmt)
    if data["autocorrelations"]:
        _emit("simulate_autocorrelation", data["autocorrelations"],
              ["lag", "value", "se", "expected"], out_dir, fmt)
    ledger = json.dumps(data["seed_ledger"], indent=2)
    if out_dir:
        Path(out_dir, "seed_ledger.json").write_text(ledger + "\n")
    else:
        click.echo(ledger)


@main.command()
@_common
def verify(config_path, out_dir, seed, threads, fmt, server):
    """End-to-end check battery; exit 1 when any check fails."""
    payload = _load_payload(config_path, "verify", seed, threads)
    data = Client(server).request("POST", "/verify", payload)
    _prepare_out(out_dir)
    for c in data["checks"]:
        status = "PASS" if c["passed"] else "FAIL"
        click.echo(f"[{status}] {c['check_id']}: {c['description']} "
                   f"(expected {c['expected']}, observed {c['observed']}, "
                   f"tolerance {c['tolerance']})")
    verdict_json = json.dumps(
        {"checks": [{"check_id": c["check_id"], "description": c["description"],
                     "expected": c["expected"], "observed": c["observed"],
                     "tolerance": c["tolerance"], "pass": c["passed"]}
                    for c in data["checks"]],
         "passed": data["passed"]}, indent=2)
    if out_dir:
        Path(out_dir, "verify.json").write_text(verdict_json + "\n")
    elif fmt == "json":
        click.echo(verdict_json)
    click.echo("all checks passed" if data["passed"] else "some checks FAILED")
    if not data["passed"]:
        sys.exit(EXIT_COMPUTATION)


@main.command(name="print-config")
@_common
def print_config(config_path, out_dir, seed, threads, fmt, server):
    """Dump the default configuration for every subcommand."""
    data = Client(server).request("GET", "/config/default")
    text = json.dumps(data, indent=2)
    if out_dir:
        _prepare_out(out_dir)
        Path(out_dir, "config.json").write_text(text + "\n")
    else:
        click.echo(text)


if __name__ == "__main__":
    main()
