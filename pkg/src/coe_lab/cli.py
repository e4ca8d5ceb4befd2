"""Command line entry point.

Every command writes JSON to stdout and diagnostics to stderr. Exit codes:
0 on success, 2 for malformed input, 3 when the requested estimand is
undefined or the inputs are infeasible.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import warnings
from pathlib import Path

import numpy as np

from . import __version__
from .bounds import (
    Margins,
    MediatorData,
    StratifiedData,
    pc_bounds_basic,
    pc_bounds_covariate,
    pc_bounds_mediator,
    pc_bounds_tian_pearl,
    risk_ratio,
    tau_rho,
)
from .cbn import Cbn, Query, intervene, joint_query
from .estimators import LATE, ACEBoundsIV, PCBounds, WaldIV
from .exceptions import EstimandError, ModelError
from .graph import d_separated
from .io import load_model, read_data
from .scm import mirror_name, pc_exact, scm_to_cbn, twin_network
from .synth import sample

EXIT_OK, EXIT_INPUT, EXIT_ESTIMAND = 0, 2, 3
SEED_ENV = "COE_LAB_SEED"


def _emit(obj) -> None:
    print(json.dumps(obj, indent=2, default=_json_default))


def _json_default(o):
    if isinstance(o, np.generic):
        return o.item()
    if isinstance(o, np.ndarray):
        return o.tolist()
    raise TypeError(f"not serializable: {type(o).__name__}")


def parse_assignment(text: str | None) -> dict[str, str]:
    """``"X=1,Y=yes"`` to ``{"X": "1", "Y": "yes"}``."""
    out: dict[str, str] = {}
    if not text:
        return out
    for part in text.split(","):
        part = part.strip()
        if not part:
            continue
        if "=" not in part:
            raise ModelError(f"expected NAME=VALUE, got {part!r}")
        k, v = (s.strip() for s in part.split("=", 1))
        if not k or not v:
            raise ModelError(f"expected NAME=VALUE, got {part!r}")
        out[k] = v
    return out


def parse_names(text: str | None) -> list[str]:
    return [s.strip() for s in (text or "").split(",") if s.strip()]


def _as_cbn(m) -> Cbn:
    return m if isinstance(m, Cbn) else scm_to_cbn(m)


def cmd_model_validate(args) -> int:
    m = load_model(args.model)
    kind = type(m).__name__
    if isinstance(m, Cbn):
        nodes, edges, regimes = list(m.stochastic), [list(e) for e in m.stochastic_edges()], m.regimes
    else:
        nodes, edges, regimes = list(m.graph.nodes), [list(e) for e in m.graph.edges], {}
    _emit({"ok": True, "type": kind, "nodes": nodes, "edges": edges, "regimes": regimes})
    return EXIT_OK


def cmd_query(args) -> int:
    m = _as_cbn(load_model(args.model))
    targets = parse_names(args.target)
    if not targets:
        raise ModelError("--target is required")
    do = parse_assignment(args.do)
    if do:
        m = intervene(m, do)
    dist = joint_query(m, Query(tuple(targets), evidence=parse_assignment(args.evidence)))
    rows = []
    for assignment, p in dist.assignments():
        labels = {k: dist.variable(k).state_labels[v] for k, v in assignment.items()}
        rows.append({"assignment": labels, "p": p})
    _emit({"targets": list(dist.names), "evidence": parse_assignment(args.evidence), "do": do,
           "distribution": rows})
    return EXIT_OK


def cmd_pc_exact(args) -> int:
    s = load_model(args.model)
    if isinstance(s, Cbn):
        raise ModelError("pc exact needs an scm or stcm model (a shared background is required)")
    factual = parse_assignment(args.factual)
    cf = parse_assignment(args.counterfactual)
    value = pc_exact(s, factual, cf, outcome=args.outcome)
    outcome = args.outcome or next(k for k in factual if k not in cf)
    twin = twin_network(s, factual, cf, keep=[outcome])
    _emit({"pc": value, "factual": factual, "counterfactual": cf, "outcome": mirror_name(outcome),
           "twin_nodes": list(twin.stochastic)})
    return EXIT_OK


def _load_json(path) -> dict:
    try:
        doc = json.loads(Path(path).read_text())
    except json.JSONDecodeError as e:
        raise ModelError(f"{path}: invalid JSON ({e})") from None
    except OSError as e:
        raise ModelError(f"{path}: {e.strerror}") from None
    if not isinstance(doc, dict):
        raise ModelError(f"{path}: expected a JSON object")
    return doc


def _require(doc: dict, key: str):
    if key not in doc:
        raise ModelError(f"missing key {key!r}")
    return doc[key]


def _experimental_margin(path, exposure, outcome, smooth) -> float:
    """P(Y=1 | X <- 0) from a JSON margin or from experimental CSV data."""
    if str(path).endswith(".json"):
        doc = _load_json(path)
        return float(_require(doc, "pY1_do_X0"))
    est = PCBounds(exposure=exposure, outcome=outcome, smooth=smooth).fit(read_data(path))
    return est.margins_.p_y1_x0


def _margins_diagnostics(m: Margins) -> dict:
    tau, rho = tau_rho(m)
    rr = risk_ratio(m.p_y1_x1, m.p_y1_x0)
    return {"rr": rr if np.isfinite(rr) else None, "tau": tau, "rho": rho}


def cmd_pc_bounds(args) -> int:
    regimes = [o for o in ("covariate", "experimental", "mediator") if getattr(args, o)]
    if len(regimes) > 1:
        raise ModelError(f"choose at most one of --covariate, --experimental, --mediator (got {regimes})")
    p_do = _experimental_margin(args.experimental, args.exposure, args.outcome, args.smooth) \
        if args.experimental else None
    source = str(args.data)
    if source.endswith(".json"):
        doc = _load_json(source)
        if args.covariate:
            strata = doc.get("strata")
            if not isinstance(strata, dict):
                raise ModelError("covariate bounds from JSON need a 'strata' object")
            d = StratifiedData(*(_require(strata, k) for k in ("pY1_given_X1", "pY1_given_X0", "pS_given_X1")))
            result = pc_bounds_covariate(d)
            diag = {}
        elif args.mediator:
            d = MediatorData(_require(doc, "pM1_given_X"), _require(doc, "pY1_given_M"))
            result = pc_bounds_mediator(d)
            margins = d.margins()
            diag = _margins_diagnostics(margins)
        else:
            margins = Margins.from_dict(doc)
            if p_do is not None:
                margins = Margins(margins.p_y1_x1, margins.p_y1_x0, margins.p_x1, p_do)
            if margins.p_y1_do_x0 is not None:
                result = pc_bounds_tian_pearl(margins)
            else:
                result = pc_bounds_basic(margins)
            diag = _margins_diagnostics(margins)
    else:
        est = PCBounds(exposure=args.exposure, outcome=args.outcome, covariate=args.covariate,
                       mediator=args.mediator, p_y1_do_x0=p_do, smooth=args.smooth)
        est.fit(read_data(source))
        result = est.bounds_
        diag = _margins_diagnostics(est.margins_)
    diag.update(result.diagnostics)
    diag.setdefault("per_stratum", None)
    _emit({"lower": result.lower, "upper": result.upper, "method": result.method, "diagnostics": diag})
    return EXIT_OK


def cmd_iv(args) -> int:
    frame = read_data(args.data)
    names = dict(instrument=args.instrument, exposure=args.exposure, outcome=args.outcome)
    flags = {"monotone": bool(args.monotone or args.availability), "availability": bool(args.availability)}
    if args.estimand == "wald":
        est = WaldIV(threshold=args.threshold, **names).fit(frame)
        out = {"estimate": est.coef_, "first_stage": est.first_stage_, "ols": est.ols_coef_}
    elif args.estimand == "late":
        est = LATE(monotone=flags["monotone"], availability=args.availability, threshold=args.threshold,
                   smooth=args.smooth, **names).fit(frame)
        out = {"estimate": est.estimate_, "ace_zx": est.data_.ace_zx, "ace_zy": est.data_.ace_zy}
    else:
        est = ACEBoundsIV(monotone=flags["monotone"], smooth=args.smooth, **names).fit(frame)
        out = {"lower": est.interval_.lower, "upper": est.interval_.upper}
    out["estimand"] = args.estimand
    out["assumptions"] = flags
    _emit(out)
    return EXIT_OK


def cmd_dsep(args) -> int:
    m = load_model(args.model)
    g = m.graph
    result = d_separated(g, set(parse_names(args.a)), set(parse_names(args.b)), set(parse_names(args.given)))
    print("true" if result else "false")
    return EXIT_OK


def default_seed() -> int:
    value = os.environ.get(SEED_ENV)
    if value is None:
        return 0
    try:
        return int(value)
    except ValueError:
        raise ModelError(f"{SEED_ENV} must be an integer, got {value!r}") from None


def cmd_simulate(args) -> int:
    m = load_model(args.model)
    seed = default_seed() if args.seed is None else args.seed
    frame = sample(m, args.n, seed=seed, labels=True)
    if args.output:
        frame.to_csv(args.output, index=False)
        _emit({"rows": len(frame), "seed": seed, "columns": list(frame.columns), "path": str(args.output)})
    else:
        frame.to_csv(sys.stdout, index=False)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="coe-lab", description="Causal queries and probability-of-causation bounds.")
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = p.add_subparsers(dest="command", required=True)

    model = sub.add_parser("model", help="model file utilities")
    msub = model.add_subparsers(dest="model_command", required=True)
    v = msub.add_parser("validate", help="check a model file")
    v.add_argument("model")
    v.set_defaults(func=cmd_model_validate)

    q = sub.add_parser("query", help="posterior or interventional distribution")
    q.add_argument("model")
    q.add_argument("--target", required=True, help="comma-separated target variables")
    q.add_argument("--evidence", help="NAME=VALUE,...")
    q.add_argument("--do", help="NAME=VALUE,... set through the regime nodes")
    q.set_defaults(func=cmd_query)

    pc = sub.add_parser("pc", help="probability of causation")
    pcsub = pc.add_subparsers(dest="pc_command", required=True)
    ex = pcsub.add_parser("exact", help="exact value from a structural model")
    ex.add_argument("model")
    ex.add_argument("--factual", required=True)
    ex.add_argument("--counterfactual", required=True)
    ex.add_argument("--outcome")
    ex.set_defaults(func=cmd_pc_exact)
    b = pcsub.add_parser("bounds", help="bounds from data or margins")
    b.add_argument("data", help="CSV data or JSON margins")
    b.add_argument("--covariate")
    b.add_argument("--experimental", help="JSON with pY1_do_X0 or experimental CSV")
    b.add_argument("--mediator")
    b.add_argument("--exposure", default="X")
    b.add_argument("--outcome", default="Y")
    b.add_argument("--smooth", type=float, default=0.0)
    b.set_defaults(func=cmd_pc_bounds)

    iv = sub.add_parser("iv", help="instrumental-variable estimands")
    iv.add_argument("estimand", choices=("late", "wald", "ace-bounds"))
    iv.add_argument("data")
    mono = iv.add_mutually_exclusive_group()
    mono.add_argument("--monotone", action="store_true", help="assume no defiers")
    mono.add_argument("--availability", action="store_true", help="exposure unavailable when z=0")
    iv.add_argument("--threshold", type=float, default=0.01)
    iv.add_argument("--smooth", type=float, default=0.0)
    iv.add_argument("--instrument", default="z")
    iv.add_argument("--exposure", default="x")
    iv.add_argument("--outcome", default="y")
    iv.set_defaults(func=cmd_iv)

    d = sub.add_parser("dsep", help="d-separation test")
    d.add_argument("model")
    d.add_argument("--a", required=True)
    d.add_argument("--b", required=True)
    d.add_argument("--given", default="")
    d.set_defaults(func=cmd_dsep)

    s = sub.add_parser("simulate", help="sample the observational distribution")
    s.add_argument("model")
    s.add_argument("-n", type=int, required=True)
    s.add_argument("--seed", type=int)
    s.add_argument("-o", "--output")
    s.set_defaults(func=cmd_simulate)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        with warnings.catch_warnings():
            warnings.simplefilter("default")
            return args.func(args)
    except ModelError as e:
        print(f"error: {e}", file=sys.stderr)
        _emit({"error": type(e).__name__, "message": str(e)})
        return EXIT_INPUT
    except EstimandError as e:
        print(f"error: {e}", file=sys.stderr)
        _emit({"error": type(e).__name__, "message": str(e)})
        return EXIT_ESTIMAND


if __name__ == "__main__":
    sys.exit(main())
