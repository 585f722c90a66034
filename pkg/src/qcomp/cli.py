"""Command line front end.

Subcommands parse JSON artifacts, dispatch the computation, and emit a
machine-readable report on stdout. By default everything runs in
process; with ``--url`` the same request body is POSTed to a running
service instead. Errors are written to stderr as one JSON object.
Exit codes: 0 success, 2 validation failure, 3 solver failure.
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import dataclass, field
from typing import Any, Sequence

import pydantic

from . import handlers
from .errors import QcompError, SolverError, ValidationError
from .schemas import (
    DiamondRequest,
    DualRequest,
    EnsembleFromMapRequest,
    EnsembleRecord,
    ExpDeficiencyRequest,
    ExperimentRecord,
    GenRequest,
    MapRecord,
    PairRequest,
    PsuccRequest,
    VerifyRequest,
)

DEFAULT_SOLVE_TOL = 1e-6

COMMANDS = (
    "diamond",
    "dual",
    "psucc",
    "ensemble-from-map",
    "deficiency",
    "lecam",
    "exp-deficiency",
    "lecam-classical",
    "verify",
    "exp-verify",
    "gen",
    "serve",
)


@dataclass(frozen=True)
class RunConfig:
    """Resolved invocation: command, input paths, and knobs."""

    command: str
    paths: dict[str, str] = field(default_factory=dict)
    tol: float | None = None
    trials: int | None = None
    seed: int = 0
    suite: str | None = None
    output: str | None = None
    url: str | None = None
    jsonl: bool = False
    gen_kind: str | None = None
    d_in: int = 2
    d_out: int = 2
    n: int = 2
    host: str = "127.0.0.1"
    port: int = 8000

    def __post_init__(self) -> None:
        if self.tol is not None and self.tol <= 0:
            raise ValidationError("tol must be positive")
        if self.trials is not None and self.trials < 1:
            raise ValidationError("trials must be at least 1")


class _Parser(argparse.ArgumentParser):
    def error(self, message: str) -> None:  # type: ignore[override]
        raise ValidationError(message)


def _build_parser() -> _Parser:
    parser = _Parser(prog="qcomp", description=__doc__)
    sub = parser.add_subparsers(dest="command", metavar="command")

    def add(name: str, **kwargs: Any) -> argparse.ArgumentParser:
        p = sub.add_parser(name, **kwargs)
        p.add_argument("--output", help="write the report here instead of stdout")
        p.add_argument("--url", help="POST to a running service instead of in-process")
        return p

    for name, flag in (("diamond", "--map"), ("dual", "--map")):
        p = add(name, help=f"{name} norm of a Hermitian-preserving map")
        p.add_argument(flag, required=True, dest="map", help="map JSON file")
        p.add_argument("--tol", type=float, help="SDP duality-gap tolerance")

    p = add("psucc", help="optimal guessing probability of an ensemble")
    p.add_argument("--ensemble", required=True, help="ensemble JSON file")
    p.add_argument("--tol", type=float)

    p = add("ensemble-from-map", help="canonical guessing ensemble of a CP map")
    p.add_argument("--map", required=True, help="map JSON file")

    for name in ("deficiency", "lecam"):
        p = add(name, help=f"{name} between two channels with one input space")
        p.add_argument("--phi", required=True, help="first channel JSON file")
        p.add_argument("--psi", required=True, help="second channel JSON file")
        p.add_argument("--tol", type=float)

    for name in ("exp-deficiency", "lecam-classical"):
        p = add(name, help=f"{name} between two experiments")
        p.add_argument("--s", required=True, help="target experiment JSON file")
        p.add_argument("--t", required=True, help="source experiment JSON file")
        if name == "exp-deficiency":
            p.add_argument("--tol", type=float)

    for name in ("verify", "exp-verify"):
        p = add(name, help="run a named verification suite")
        p.add_argument("--suite", required=True)
        p.add_argument("--trials", type=int)
        p.add_argument("--seed", type=int, default=0)
        p.add_argument("--tol", type=float)
        p.add_argument("--phi", help="optional channel JSON file (thm1/coro1)")
        p.add_argument("--psi", help="optional channel JSON file (thm1/coro1)")
        p.add_argument(
            "--jsonl", action="store_true", help="one JSON line per part, then summary"
        )

    p = add("gen", help="generate a seeded random artifact")
    p.add_argument("kind", choices=handlers.GEN_KINDS)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--d-in", type=int, default=2, dest="d_in")
    p.add_argument("--d-out", type=int, default=2, dest="d_out")
    p.add_argument("--n", type=int, default=2)

    p = sub.add_parser("serve", help="run the HTTP service")
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8000)
    return parser


def _load_json(path: str) -> Any:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            return json.load(fh)
    except OSError as exc:
        raise ValidationError(f"cannot read {path}: {exc}") from None
    except json.JSONDecodeError as exc:
        raise ValidationError(f"{path} is not valid JSON: {exc}") from None


def _load_map(path: str) -> MapRecord:
    return MapRecord.model_validate(_load_json(path))


def _solve_tol(ns: argparse.Namespace) -> float:
    tol = getattr(ns, "tol", None)
    return DEFAULT_SOLVE_TOL if tol is None else tol


def _request_body(cfg: RunConfig, ns: argparse.Namespace) -> tuple[str, dict[str, Any]]:
    """Route path and JSON body for the command (shared by both modes)."""
    cmd = cfg.command
    if cmd in ("diamond", "dual"):
        req: pydantic.BaseModel = (DiamondRequest if cmd == "diamond" else DualRequest)(
            map=_load_map(ns.map), tol=_solve_tol(ns)
        )
        return f"/{cmd}", req.model_dump()
    if cmd == "psucc":
        req = PsuccRequest(
            ensemble=EnsembleRecord.model_validate(_load_json(ns.ensemble)),
            tol=_solve_tol(ns),
        )
        return "/psucc", req.model_dump()
    if cmd == "ensemble-from-map":
        req = EnsembleFromMapRequest(map=_load_map(ns.map))
        return "/ensemble-from-map", req.model_dump()
    if cmd in ("deficiency", "lecam"):
        req = PairRequest(
            phi=_load_map(ns.phi), psi=_load_map(ns.psi), tol=_solve_tol(ns)
        )
        return f"/{cmd}", req.model_dump()
    if cmd in ("exp-deficiency", "lecam-classical"):
        req = ExpDeficiencyRequest(
            s=ExperimentRecord.model_validate(_load_json(ns.s)),
            t=ExperimentRecord.model_validate(_load_json(ns.t)),
            tol=getattr(ns, "tol", None),
        )
        return f"/{cmd}", req.model_dump()
    if cmd in ("verify", "exp-verify"):
        body = VerifyRequest(
            suite=ns.suite, trials=cfg.trials, seed=cfg.seed, tol=cfg.tol
        ).model_dump()
        body["phi"] = _load_map(ns.phi).model_dump() if ns.phi else None
        body["psi"] = _load_map(ns.psi).model_dump() if ns.psi else None
        return "/verify", body
    if cmd == "gen":
        req = GenRequest(
            kind=cfg.gen_kind or "", seed=cfg.seed, d_in=cfg.d_in, d_out=cfg.d_out, n=cfg.n
        )
        return "/gen", req.model_dump()
    raise ValidationError(f"unknown command {cmd!r}")


def _run_local(cfg: RunConfig, ns: argparse.Namespace) -> Any:
    cmd = cfg.command
    path, body = _request_body(cfg, ns)
    if cmd in ("diamond", "dual"):
        req = (DiamondRequest if cmd == "diamond" else DualRequest).model_validate(body)
        return (handlers.diamond if cmd == "diamond" else handlers.dual)(req)
    if cmd == "psucc":
        return handlers.psucc(PsuccRequest.model_validate(body))
    if cmd == "ensemble-from-map":
        return handlers.ensemble_from_map(EnsembleFromMapRequest.model_validate(body))
    if cmd == "deficiency":
        return handlers.deficiency_cmd(PairRequest.model_validate(body))
    if cmd == "lecam":
        return handlers.lecam(PairRequest.model_validate(body))
    if cmd == "exp-deficiency":
        return handlers.exp_deficiency(ExpDeficiencyRequest.model_validate(body))
    if cmd == "lecam-classical":
        return handlers.lecam_classical(ExpDeficiencyRequest.model_validate(body))
    if cmd in ("verify", "exp-verify"):
        phi = MapRecord.model_validate(body["phi"]) if body.get("phi") else None
        psi = MapRecord.model_validate(body["psi"]) if body.get("psi") else None
        req = VerifyRequest(
            suite=body["suite"], trials=body["trials"], seed=body["seed"], tol=body["tol"]
        )
        return handlers.verify_cmd(req, phi=phi, psi=psi)
    if cmd == "gen":
        return handlers.gen(GenRequest.model_validate(body))
    raise ValidationError(f"unknown command {cmd!r}")


def _run_remote(cfg: RunConfig, ns: argparse.Namespace) -> Any:
    import httpx

    path, body = _request_body(cfg, ns)
    url = (cfg.url or "").rstrip("/") + path
    resp = httpx.post(url, json=body, timeout=600.0)
    if resp.status_code >= 400:
        detail = resp.json() if "json" in resp.headers.get("content-type", "") else {}
        kind = detail.get("kind", "HTTPError")
        if resp.status_code in (400, 404, 422):
            raise ValidationError(f"{kind}: {detail.get('error', resp.text)}")
        raise SolverError(f"{kind}: {detail.get('error', resp.text)}")
    return resp.json()


def _emit(result: Any, cfg: RunConfig) -> None:
    if isinstance(result, pydantic.BaseModel):
        payload = result.model_dump(mode="json")
    else:
        payload = result
    lines: list[str]
    if cfg.jsonl and isinstance(payload, dict) and isinstance(payload.get("values"), dict):
        parts = payload["values"].get("parts", {})
        lines = [
            json.dumps({"part": name, **stats}, sort_keys=True)
            for name, stats in parts.items()
        ]
        lines.append(json.dumps(payload, sort_keys=True))
    else:
        lines = [json.dumps(payload, sort_keys=True)]
    text = "\n".join(lines) + "\n"
    if cfg.output:
        with open(cfg.output, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _config_from(ns: argparse.Namespace) -> RunConfig:
    paths = {
        key: getattr(ns, key)
        for key in ("map", "phi", "psi", "ensemble", "s", "t")
        if getattr(ns, key, None)
    }
    return RunConfig(
        command=ns.command,
        paths=paths,
        tol=getattr(ns, "tol", None),
        trials=getattr(ns, "trials", None),
        seed=getattr(ns, "seed", 0) or 0,
        suite=getattr(ns, "suite", None),
        output=getattr(ns, "output", None),
        url=getattr(ns, "url", None),
        jsonl=bool(getattr(ns, "jsonl", False)),
        gen_kind=getattr(ns, "kind", None),
        d_in=getattr(ns, "d_in", 2),
        d_out=getattr(ns, "d_out", 2),
        n=getattr(ns, "n", 2),
        host=getattr(ns, "host", "127.0.0.1"),
        port=getattr(ns, "port", 8000),
    )


def run(argv: Sequence[str] | None = None) -> int:
    """Parse arguments, run the command, and return the exit code."""
    parser = _build_parser()
    try:
        ns = parser.parse_args(argv)
        if not ns.command:
            raise ValidationError("a subcommand is required; see --help")
        cfg = _config_from(ns)
        if cfg.command == "serve":
            import uvicorn

            from .service import app

            uvicorn.run(app, host=cfg.host, port=cfg.port)
            return 0
        if cfg.url:
            result = _run_remote(cfg, ns)
        else:
            result = _run_local(cfg, ns)
        _emit(result, cfg)
        return 0
    except SolverError as exc:
        _report_error(exc)
        return 3
    except QcompError as exc:
        _report_error(exc)
        return 2
    except pydantic.ValidationError as exc:
        _report_error(ValidationError(str(exc)))
        return 2


def _report_error(exc: Exception) -> None:
    sys.stderr.write(
        json.dumps({"error": str(exc), "kind": type(exc).__name__}, sort_keys=True) + "\n"
    )


def main() -> None:
    raise SystemExit(run())


if __name__ == "__main__":
    main()
