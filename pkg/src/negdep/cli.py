"""Batch command line: ``negdep check | reproduce | family | search``.

Reports are JSON with sorted keys.  Wall-clock times live under a single
top-level ``timing`` key so that everything else is reproducible from the
inputs, the seed and the budgets.
"""

from __future__ import annotations

import argparse
import json
import os
import re
import sys
import time
from importlib import resources
from pathlib import Path
from typing import Any, Callable

from ._exact import jsonable
from .errors import CapExceeded, NegDepError, ParseError, UnknownTarget
from .families import parse_family
from .inference import PROPERTIES, PropertyLedger
from .measure import Measure, load_measure
from .verdict import Budget, Status

EXIT_OK, EXIT_MISMATCH, EXIT_INPUT, EXIT_BUDGET = 0, 2, 3, 4

# cheap checks that let the rules reach a requested property
SUPPORT = {
    "NAplus": ("Exchangeable", "AlmostExchangeable", "NCplus"),
    "CNA": ("Exchangeable", "AlmostExchangeable", "CNC"),
    "FMplus": ("AlmostExchangeable",),
    "NMP": ("ProductRescaling",),
}

_ALIASES = {
    "rayleigh": "NCplus", "nc+": "NCplus", "na+": "NAplus", "fm+": "FMplus",
    "almostexch": "AlmostExchangeable", "exch": "Exchangeable", "hnlc+": "hNLCplus",
}


def resolve_property(name: str) -> str:
    key = name.strip().lower().replace("_", "").replace("-", "")
    m = re.fullmatch(r"lc(?:m)?[\[(](\d+)[\])]", key)
    if m:
        prop = f"LCm({m.group(1)})"
        if prop in PROPERTIES:
            return prop
        raise ParseError(f"LC[m] is available for m in 2..5, got {name!r}")
    if key in _ALIASES:
        return _ALIASES[key]
    for p in PROPERTIES:
        if p.lower() == key:
            return p
    raise ParseError(f"unknown property {name!r}")


def parse_props(text: str) -> list[str]:
    out: list[str] = []
    for part in re.split(r",(?![^()\[\]]*[)\]])", text):
        if part.strip():
            p = resolve_property(part)
            if p not in out:
                out.append(p)
    return out


def golden() -> dict:
    return json.loads(resources.files("negdep").joinpath("data/golden.json").read_text())


def _seed(args) -> int:
    if args.seed is not None:
        return args.seed
    env = os.environ.get("NEGDEP_SEED")
    if env is None:
        return 0
    try:
        return int(env)
    except ValueError as exc:
        raise ParseError(f"NEGDEP_SEED must be an integer, got {env!r}") from exc


def _budget(args) -> Budget:
    return Budget(samples=args.budget_samples, boxes=args.budget_boxes, seed=_seed(args))


def _load(args) -> tuple[Measure, dict]:
    if bool(args.measure) == bool(args.family):
        raise ParseError("give exactly one of --measure or --family")
    if args.measure:
        return load_measure(args.measure), {"source": "file", "path": str(args.measure)}
    return parse_family(args.family, base_dir=os.getcwd()), {"source": "family", "spec": args.family}


# -- check ---------------------------------------------------------------------------


def cmd_check(args) -> tuple[dict, dict, int]:
    mu, prov = _load(args)
    props = parse_props(args.props) if args.props else [p for p in PROPERTIES if not p.startswith("LCm")]
    budget = _budget(args)
    ledger = PropertyLedger(mu, budget)
    order: list[str] = []
    for p in props:
        for q in SUPPORT.get(p, ()) + (p,):
            if q not in order:
                order.append(q)
    timing = {}
    for p in order:
        t0 = time.perf_counter()
        ledger.run_direct([p])
        timing[p] = round(time.perf_counter() - t0, 6)
    ledger.deduce()
    body = ledger.to_dict()
    prov.update(n=mu.n, label=mu.label)
    report = {
        "command": "check", "measure": prov, "requested": props, "checked": order, "seed": budget.seed,
        "budget": budget.to_dict(), "properties": body["properties"], "audit": ledger.audit(),
    }
    if args.include_measure:
        report["measure"]["weights"] = mu.to_json_dict()["weights"]
    code = EXIT_OK
    if args.require_definite and any(ledger.status(p) in (None, Status.UNKNOWN) for p in props):
        code = EXIT_BUDGET
    return report, {"per_property_seconds": timing}, code


# -- reproduce -------------------------------------------------------------------------


def _rep_prop41(args, budget):
    from .experiments import prop41_table

    table = prop41_table(args.k, budget)
    observed = {"verdicts": {key: [v.status.value for v in row["verdicts"]] for key, row in table.items()}}
    details = {key: {"property": row["property"], "below": row["below"], "at_or_above": row["at_or_above"],
                     "verdicts": [v.to_dict() for v in row["verdicts"]]} for key, row in table.items()}
    return {"k": args.k}, observed, details


def _rep_lemma41(args, budget):
    from .experiments import lemma41_pool

    r = lemma41_pool(args.count, budget.seed)
    return {"count": args.count}, {"violations": len(r["violations"])}, r


def _rep_urn_lc(args, budget):
    from .experiments import example_urn_lc

    r = example_urn_lc()
    return {"eps": "1/100", "urns": 10_000, "balls": 3}, {"lc_fails": r["lc_fails"]}, r


def _rep_urn_rayleigh(args, budget):
    from .experiments import example_urn_rayleigh
    from .rayleigh import check_NCplus

    r = example_urn_rayleigh()
    v = check_NCplus(r.pop("measure"), budget)
    observed = {"strict_positive_correlation": r["strict_positive_correlation"], "ncplus": v.status.value}
    return {"eps": "1/100", "field": ["1/100", "1", "1"]}, observed, {**r, "ncplus": v.to_dict()}


def _rep_gadget(args, budget):
    from .dominance import check_NMP
    from .families import gadget_graph, spanning_forest_measure

    v = check_NMP(spanning_forest_measure(gadget_graph(args.k)))
    return {"k": args.k}, {"nmp": {str(args.k): v.status.value}}, v.to_dict()


def _rep_mason(args, budget):
    from .experiments import mason_sweep

    r = mason_sweep(5)
    return {"max_edges": 5}, {"graphs": r["graphs"], "failures": len(r["failures"])}, r


def _rep_urn_cna(args, budget):
    from .experiments import urn_cna_sweep

    r = urn_cna_sweep(args.count, budget.seed)
    observed = {"dp_mismatches": len(r["dp_mismatches"]), "cna_failures": len(r["cna_failures"])}
    return {"count": args.count}, observed, r


REPRODUCE: dict[str, Callable] = {
    "prop41": _rep_prop41, "lemma41": _rep_lemma41, "urn-lc": _rep_urn_lc, "urn-rayleigh": _rep_urn_rayleigh,
    "gadget-nmp": _rep_gadget, "mason": _rep_mason, "urn-cna": _rep_urn_cna,
}
_DEFAULT_COUNT = {"lemma41": 500, "urn-cna": 100}


def _compare(expected: Any, observed: Any, path: str = "") -> tuple[list[str], list[str]]:
    """Mismatching paths, and paths whose expectation is definite but whose observation is Unknown."""
    mism, unknown = [], []
    if isinstance(observed, dict):
        for key, val in observed.items():
            if not isinstance(expected, dict) or key not in expected:
                continue
            m, u = _compare(expected[key], val, f"{path}/{key}")
            mism += m
            unknown += u
    elif isinstance(observed, list) and isinstance(expected, list) and len(observed) == len(expected):
        for i, (e, o) in enumerate(zip(expected, observed)):
            m, u = _compare(e, o, f"{path}/{i}")
            mism += m
            unknown += u
    elif observed != expected:
        (unknown if observed == "Unknown" else mism).append(path or "/")
    return mism, unknown


def _merge(base: dict, extra: dict) -> dict:
    out = dict(base)
    for k, v in extra.items():
        out[k] = _merge(out[k], v) if isinstance(v, dict) and isinstance(out.get(k), dict) else v
    return out


def _pinned(expected: Any, observed: Any) -> Any:
    """The part of the golden entry that the observation speaks to."""
    if isinstance(observed, dict) and isinstance(expected, dict):
        return {k: _pinned(expected[k], v) for k, v in observed.items() if k in expected}
    return expected


def cmd_reproduce(args) -> tuple[dict, dict, int]:
    if args.target not in REPRODUCE:
        raise UnknownTarget(args.target)
    if args.count is None:
        args.count = _DEFAULT_COUNT.get(args.target, 0)
    if args.k is None:
        args.k = 4 if args.target == "prop41" else 5
    budget = _budget(args)
    t0 = time.perf_counter()
    params, observed, details = REPRODUCE[args.target](args, budget)
    elapsed = round(time.perf_counter() - t0, 6)
    gold = dict(golden().get(args.target, {}))
    notes = []
    override = gold.pop("by_k", {}).get(str(args.k), {}) if args.target == "prop41" else {}
    if override:
        gold = _merge(gold, {k: v for k, v in override.items() if k != "note"})
        notes.append(override.get("note", ""))
    expected = _pinned(gold, observed)
    mism, unknown = _compare(expected, observed)
    report = {
        "command": "reproduce", "target": args.target, "params": params, "seed": budget.seed,
        "budget": budget.to_dict(), "observed": observed, "expected": expected,
        "match": not mism and not unknown, "mismatches": mism, "undecided": unknown, "details": details,
    }
    if notes:
        report["notes"] = notes
    code = EXIT_MISMATCH if mism else EXIT_BUDGET if unknown else EXIT_OK
    return report, {"seconds": elapsed}, code


# -- family ------------------------------------------------------------------------------


def cmd_family(args) -> tuple[str, int]:
    return parse_family(args.spec, base_dir=os.getcwd()).dumps(zeros=not args.support_only), EXIT_OK


# -- search --------------------------------------------------------------------------------


def cmd_search(args) -> tuple[dict, dict, int]:
    from . import experiments as ex

    budget = _budget(args)
    t0 = time.perf_counter()
    if args.target == "lcm-gap":
        params = {"m": args.m, "count": args.count or 5, "fields": args.fields}
        result = ex.lcm_gap_search(args.m, params["count"], args.fields, budget.seed)
    elif args.target == "usf-rayleigh":
        params = {"edges": args.edges}
        result = ex.usf_rayleigh_search(args.edges, budget)
    elif args.target == "cnc-vs-cna":
        params = {"count": args.count or 2000, "n": args.n}
        result = ex.cnc_vs_cna_search(params["count"], budget.seed, args.n)
    elif args.target == "nlc-heredity":
        params = {"samples": args.count or 100_000}
        result = ex.nlc_heredity_search(params["samples"], budget.seed)
    else:
        raise UnknownTarget(args.target)
    report = {"command": "search", "target": args.target, "params": params, "seed": budget.seed,
              "budget": budget.to_dict(), "result": result}
    return report, {"seconds": round(time.perf_counter() - t0, 6)}, EXIT_OK


# -- plumbing ------------------------------------------------------------------------------


def _add_common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--budget-samples", type=int, default=Budget.samples, help="sampled fields per falsifier")
    p.add_argument("--budget-boxes", type=int, default=Budget.boxes, help="branch-and-bound box budget")
    p.add_argument("--seed", type=int, default=None, help="random seed (falls back to NEGDEP_SEED, then 0)")
    p.add_argument("--out", type=Path, default=None, help="write the report here instead of stdout")
    p.add_argument("--format", choices=("json",), default="json")
    p.add_argument("--no-timing", action="store_true", help="omit the timing block")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="negdep", description="Exact negative-dependence checks on the Boolean cube.")
    sub = ap.add_subparsers(dest="command", required=True)

    c = sub.add_parser("check", help="run property checks and the inference closure on one measure")
    c.add_argument("--measure", type=Path, help="measure JSON file")
    c.add_argument("--family", help="family spec, e.g. nu:k=6,beta=71/100")
    c.add_argument("--props", help="comma-separated properties (default: all except LC[m])")
    c.add_argument("--require-definite", action="store_true", help="exit 4 if a requested property stays Unknown")
    c.add_argument("--include-measure", action="store_true", help="embed the weights in the report")
    _add_common(c)

    r = sub.add_parser("reproduce", help="run a scripted experiment against pinned expectations")
    r.add_argument("target", help=", ".join(REPRODUCE))
    r.add_argument("--k", type=int, default=None)
    r.add_argument("--count", type=int, default=None)
    _add_common(r)

    f = sub.add_parser("family", help="expand a family spec into a measure file")
    f.add_argument("spec")
    f.add_argument("--support-only", action="store_true", help="omit zero-weight configurations")
    f.add_argument("--out", type=Path, default=None)

    s = sub.add_parser("search", help="randomized probes of open questions; logs only")
    s.add_argument("target", help="lcm-gap, usf-rayleigh, cnc-vs-cna, nlc-heredity")
    s.add_argument("--m", type=int, default=7)
    s.add_argument("--edges", type=int, default=5)
    s.add_argument("--n", type=int, default=4)
    s.add_argument("--count", type=int, default=None)
    s.add_argument("--fields", type=int, default=20)
    _add_common(s)
    return ap


def _emit(text: str, out: Path | None) -> None:
    if out is None:
        sys.stdout.write(text)
    else:
        out.write_text(text)


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "family":
            text, code = cmd_family(args)
            _emit(text, args.out)
            return code
        handler = {"check": cmd_check, "reproduce": cmd_reproduce, "search": cmd_search}[args.command]
        report, timing, code = handler(args)
    except (ParseError, UnknownTarget, OSError, json.JSONDecodeError) as exc:
        print(f"negdep: input error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except CapExceeded as exc:
        print(f"negdep: {exc}", file=sys.stderr)
        return EXIT_BUDGET
    except NegDepError as exc:
        print(f"negdep: input error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_INPUT
    if not args.no_timing:
        report["timing"] = timing
    _emit(json.dumps(jsonable(report), indent=1, sort_keys=True) + "\n", args.out)
    return code


if __name__ == "__main__":
    sys.exit(main())
