"""``capalloc`` command line: measures, allocations, ratios, suitability and games.

Every subcommand prints a human-readable table and, with ``--json PATH``,
writes a machine-readable report (``--json -`` prints the JSON instead of the
table). A report's ``config`` block can be fed back with ``--config`` to
reproduce it byte for byte.

Exit codes: 0 ok/satisfied, 1 usage, 2 data or validation error,
3 suitability violated, 4 vacuous.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from importlib import resources
from pathlib import Path

import numpy as np

from . import __version__
from . import allocations as al
from .axioms import check_reward_axioms, check_risk_axioms
from .distortions import DistortionError
from .game import (
    Coalition,
    GameError,
    GameInstance,
    admissible_coalitions,
    all_coalitions,
    check_allocation_properties,
    check_prop_4_2,
    marginal_contribution,
    verify_def_4_1,
)
from .measures import (
    Distorted,
    Distortion,
    DistortionExponential,
    Entropic,
    MeasureError,
    RewardMeasureSpec,
    parse_spec,
)
from .performance import classify_portfolio, rorac, rrr
from .scenario import ScenarioError, ScenarioSet, load_scenarios, parse_scenarios
from .suitability import (
    TAGS,
    HGrid,
    SuitabilityError,
    check_thm33_conditions,
    check_thm36_conditions,
    gradient_pair,
    gradient_uniqueness_counterexample,
    portfolio_functions,
    verify_def_3_2,
    verify_def_3_5,
    verify_def_3_7,
)

EXIT_OK, EXIT_USAGE, EXIT_DATA = 0, 1, 2
DEMOS = {"euler": "demo_euler.csv", "game": "demo_game.csv"}
COMMANDS = ("measure", "allocate", "performance", "suitability", "game", "axioms")
RISK_KINDS = ("individual", "with_without", "normalized_with_without", "subgradient", "gradient_fd",
              "gradient_analytic", "marginal_contribution")
REWARD_KINDS = ("supergradient", "reward_gradient")
DEFAULTS = {
    "risk": "es:0.25",
    "reward": "expectation",
    "grid": [1e-1, 1e-2, 1e-3, 1e-4, 1e-5, 1e-6],
    "step": 1e-4,
    "tol": 1e-9,
    "seed": 0,
    "measure": [],
    "kind": [],
    "perturb": [],
    "perturb_t": [],
    "definition": None,
    "coalition": "1",
    "coalition_list": None,
    "trials": 500,
    "levels": 3,
    "t_scale": [],
    "redecompositions": 0,
}
DATA_ERRORS = (ScenarioError, MeasureError, DistortionError, al.AllocationError, SuitabilityError, GameError)


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


# -- argument handling -------------------------------------------------------

def _common(p):
    g = p.add_argument_group("common options")
    src = g.add_mutually_exclusive_group()
    src.add_argument("--scenarios", metavar="PATH", help="scenario CSV: prob,<label_1>,...")
    src.add_argument("--demo", choices=sorted(DEMOS), help="use a bundled scenario file")
    g.add_argument("--risk", metavar="SPEC", help="risk measure, e.g. es:0.25, entropic:1, distortion:sqrt")
    g.add_argument("--reward", metavar="SPEC", help="reward measure, e.g. expectation, distorted:power:2")
    g.add_argument("--grid", metavar="CSV", help="descending perturbation sizes h")
    g.add_argument("--step", type=float, help="finite-difference step (default 1e-4)")
    g.add_argument("--tol", type=float, help="slack for inequalities (default 1e-9)")
    g.add_argument("--seed", type=int, help="random seed (default 0)")
    g.add_argument("--json", metavar="PATH", dest="json_out", help="write the JSON report ('-' for stdout)")
    g.add_argument("--config", metavar="PATH", help="JSON config or earlier report; flags win")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="capalloc", description="Capital allocation and performance measurement on scenario sets.")
    parser.add_argument("--version", action="version", version=f"capalloc {__version__}")
    sub = parser.add_subparsers(dest="command", parser_class=_Parser)

    p = sub.add_parser("measure", help="reward, risk and class of the aggregate and each position")
    _common(p)
    p.add_argument("--measure", action="append", metavar="SPEC", help="extra risk or reward measure (repeatable)")

    p = sub.add_parser("allocate", help="capital allocations with full-allocation residuals")
    _common(p)
    p.add_argument("--kind", action="append", choices=RISK_KINDS + REWARD_KINDS, help="allocation kind (repeatable)")

    p = sub.add_parser("performance", help="reward-risk ratio, RORAC and per-position signals")
    _common(p)
    p.add_argument("--kind", action="append", choices=RISK_KINDS, help="risk allocation for the signals")

    p = sub.add_parser("suitability", help="verify a suitability definition or sufficient condition")
    _common(p)
    p.add_argument("--definition", choices=TAGS, help="what to verify")
    p.add_argument("--kind", action="append", choices=RISK_KINDS, help="risk allocation to verify")
    p.add_argument("--perturb", action="append", metavar="I:DELTA", help="add DELTA to k_I (1-based, repeatable)")
    p.add_argument("--perturb-t", action="append", dest="perturb_t", metavar="I:DELTA", help="add DELTA to t_I")
    p.add_argument("--levels", type=int, help="grid levels below --step for def_3_7 (default 3)")
    p.add_argument("--t-scale", action="append", type=float, dest="t_scale",
                   help="def_3_7: refute perturbed k_i with reward t_scale * rho (repeatable)")
    p.add_argument("--redecompositions", type=int, help="def_3_2: also check N random decompositions")
    p.add_argument("--coalition", metavar="CSV", help="game_def_4_1: coalition S, 1-based (default 1)")

    p = sub.add_parser("game", help="coalition table, marginal-contribution suitability and properties")
    _common(p)
    p.add_argument("--coalition", metavar="CSV", help="coalition S as 1-based indices, 'none' for empty (default 1)")
    p.add_argument("--coalition-list", dest="coalition_list", metavar="LIST",
                   help="explicit coalitions separated by ';', required for n > 20")

    p = sub.add_parser("axioms", help="randomized audit of the measure axioms")
    _common(p)
    p.add_argument("--measure", action="append", metavar="SPEC", help="measure to audit (default: --risk)")
    p.add_argument("--trials", type=int, help="trials per axiom (default 500)")
    return parser


def _load_config(path) -> dict:
    try:
        obj = json.loads(Path(path).read_text(encoding="utf-8"))
    except OSError as exc:
        raise ScenarioError(f"cannot read config {path}: {exc.strerror}") from None
    except json.JSONDecodeError as exc:
        raise ScenarioError(f"config {path}: invalid JSON: {exc}") from None
    if not isinstance(obj, dict):
        raise ScenarioError(f"config {path}: expected a JSON object")
    if isinstance(obj.get("config"), dict):
        obj = obj["config"]
    return obj


def _prescan_config(argv):
    pre = argparse.ArgumentParser(add_help=False)
    pre.add_argument("--config")
    known, _ = pre.parse_known_args(argv)
    return known.config


def resolve(args, cfg: dict) -> dict:
    """Merge flags over config over defaults into the report's ``config`` block."""
    out = {"command": args.command}
    keys = ["scenarios", "demo", *DEFAULTS]
    for key in keys:
        flag = getattr(args, key, None)
        if isinstance(flag, list) and not flag:
            flag = None
        if flag is not None:
            out[key] = flag
        elif key in cfg:
            out[key] = cfg[key]
        elif key in DEFAULTS:
            out[key] = DEFAULTS[key]
    if args.scenarios is not None or args.demo is not None:
        # a source flag replaces whichever source the config named
        out.pop("demo" if args.scenarios is not None else "scenarios", None)
    if isinstance(out.get("grid"), str):
        out["grid"] = list(HGrid.parse(out["grid"]).steps)
    out["grid"] = list(HGrid(tuple(out["grid"])).steps)
    if not (out["tol"] > 0):
        raise UsageError(f"--tol must be > 0, got {out['tol']}")
    if not (0 < out["step"] <= 0.1):
        raise UsageError(f"--step must lie in (0, 0.1], got {out['step']}")
    if out.get("scenarios") is None and out.get("demo") is None:
        raise UsageError("one of --scenarios PATH or --demo NAME is required")
    keep = {"command", "scenarios", "demo", "risk", "reward", "grid", "step", "tol", "seed"}
    keep |= {
        "measure": {"measure"},
        "allocate": {"kind"},
        "performance": {"kind"},
        "suitability": {"definition", "kind", "perturb", "perturb_t", "levels", "t_scale", "redecompositions", "coalition"},
        "game": {"coalition", "coalition_list"},
        "axioms": {"measure", "trials"},
    }[args.command]
    return {k: v for k, v in out.items() if k in keep and v is not None}


def load_source(cfg) -> ScenarioSet:
    if cfg.get("demo") is not None:
        name = cfg["demo"]
        if name not in DEMOS:
            raise UsageError(f"unknown demo {name!r}; choose from {sorted(DEMOS)}")
        text = resources.files("capalloc").joinpath("data", DEMOS[name]).read_text(encoding="utf-8")
        return parse_scenarios(text, source=f"demo:{name}")
    return load_scenarios(cfg["scenarios"])


def _parse_perturb(items, n):
    delta = np.zeros(n)
    for item in items or []:
        idx, sep, val = str(item).partition(":")
        try:
            i, d = int(idx), float(val)
        except ValueError:
            raise UsageError(f"perturbation must look like I:DELTA, got {item!r}") from None
        if not sep or not 1 <= i <= n:
            raise UsageError(f"perturbation index must lie in 1..{n}, got {item!r}")
        delta[i - 1] += d
    return delta


def _parse_coalition(text, n) -> Coalition:
    text = str(text).strip()
    if text.lower() in ("", "none", "{}"):
        return Coalition()
    try:
        idx = [int(s) for s in text.strip("{}").split(",") if s.strip()]
    except ValueError:
        raise UsageError(f"coalition must be comma-separated 1-based indices, got {text!r}") from None
    bad = [i for i in idx if not 1 <= i <= n]
    if bad:
        raise UsageError(f"coalition index {bad[0]} outside 1..{n}")
    return Coalition(i - 1 for i in idx)


# -- JSON and text output ----------------------------------------------------

def _clean(obj):
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [_clean(v) for v in obj.tolist()]
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        v = float(obj)
        if math.isnan(v):
            return None
        if math.isinf(v):
            return "inf" if v > 0 else "-inf"
        return v
    return obj


def dumps(report) -> str:
    return json.dumps(_clean(report), indent=2, sort_keys=True) + "\n"


def _fmt(v) -> str:
    if isinstance(v, str):
        return v
    if v is None:
        return "-"
    v = float(v)
    if math.isinf(v):
        return "inf" if v > 0 else "-inf"
    return f"{v:.10g}"


def _table(header, rows) -> str:
    cells = [list(map(str, header))] + [[_fmt(c) for c in row] for row in rows]
    widths = [max(len(r[j]) for r in cells) for j in range(len(header))]
    lines = ["  ".join(c.rjust(w) for c, w in zip(r, widths)) for r in cells]
    lines.insert(1, "  ".join("-" * w for w in widths))
    return "\n".join(lines)


# -- allocation plumbing -----------------------------------------------------

def compute_allocation(kind, scn, rho, theta, step):
    if kind == "individual":
        return al.individual_allocation(rho, scn)
    if kind == "with_without":
        return al.with_without_allocation(rho, scn)
    if kind == "normalized_with_without":
        return al.normalized_with_without(rho, scn)
    if kind == "subgradient":
        return al.subgradient_allocation(al.subgradient_density(rho, scn.total(), scn), scn)
    if kind == "gradient_fd":
        return al.gradient_allocation_fd(rho, scn, step)
    if kind == "gradient_analytic":
        if isinstance(rho, Distortion):
            return al.analytic_gradient_distortion(rho.psi, scn)
        if isinstance(rho, DistortionExponential):
            return al.analytic_gradient_distortion_exponential(rho.psi, rho.a, scn)
        if isinstance(rho, Entropic):
            return al.entropic_gradient_allocation(rho.a, scn)
        raise MeasureError(
            f"no analytic gradient for risk measure {rho.kind!r}; use entropic, distortion or distortion_exponential"
        )
    if kind == "marginal_contribution":
        game = GameInstance(scn, theta, rho)
        vals = [marginal_contribution(game, game.grand().remove(i), i) for i in range(scn.n)]
        return al.AllocationVector(vals, "marginal_contribution", scn.labels, {"coalition": "N minus i"})
    if kind == "supergradient":
        return al.supergradient_allocation(al.supergradient_density(theta, scn.total(), scn), scn)
    if kind == "reward_gradient":
        if not isinstance(theta, Distorted):
            raise MeasureError(f"reward_gradient needs a distorted reward measure, got {theta.kind!r}")
        return al.gradient_reward_allocation_distorted(theta.phi, scn)
    raise UsageError(f"unknown allocation kind {kind!r}")


def _specs(cfg):
    rho = parse_spec(cfg["risk"])
    theta = parse_spec(cfg["reward"])
    if isinstance(rho, RewardMeasureSpec):
        raise MeasureError(f"--risk needs a risk measure, got {cfg['risk']!r}")
    if not isinstance(theta, RewardMeasureSpec):
        raise MeasureError(f"--reward needs a reward measure, got {cfg['reward']!r}")
    return rho, theta


def _scenario_block(scn, cfg):
    return {"source": cfg.get("scenarios") or f"demo:{cfg['demo']}", "m": scn.m, "n": scn.n, "labels": list(scn.labels)}


# -- commands ----------------------------------------------------------------

def cmd_measure(cfg, scn):
    rho, theta = _specs(cfg)
    x = scn.total()
    T, R = theta.evaluate(x, scn), rho.evaluate(x, scn)
    positions = [
        {"label": scn.labels[i], "theta": theta.evaluate(scn.positions[i], scn), "rho": rho.evaluate(scn.positions[i], scn)}
        for i in range(scn.n)
    ]
    extra = []
    for text in cfg.get("measure", []):
        spec = parse_spec(text)
        extra.append({
            "name": text,
            "spec": spec.to_json(),
            "aggregate": spec.evaluate(x, scn),
            "positions": [spec.evaluate(scn.positions[i], scn) for i in range(scn.n)],
        })
    report = {
        "aggregate": {"theta": T, "rho": R, "ratio": rrr(T, R).to_json(), "class": classify_portfolio(T, R).value},
        "positions": positions,
        "measures": extra,
    }
    header = ["position", "theta", "rho"] + [e["name"] for e in extra]
    rows = [[p["label"], p["theta"], p["rho"]] + [e["positions"][i] for e in extra] for i, p in enumerate(positions)]
    rows.append(["X", T, R] + [e["aggregate"] for e in extra])
    text = _table(header, rows) + f"\nclass: {report['aggregate']['class']}, ratio: {_fmt(rrr(T, R).value)}"
    return report, text, EXIT_OK


def cmd_allocate(cfg, scn):
    rho, theta = _specs(cfg)
    x = scn.total()
    T, R = theta.evaluate(x, scn), rho.evaluate(x, scn)
    kinds = cfg.get("kind") or ["subgradient"]
    entries, rows = [], []
    fd_cache = {}
    for kind in kinds:
        k = compute_allocation(kind, scn, rho, theta, cfg["step"])
        target, name = (T, "theta_X") if kind in REWARD_KINDS else (R, "rho_X")
        entry = k.to_json()
        entry["residual"] = al.check_full_allocation(k, target)
        entry["target"] = name
        if kind in ("gradient_analytic", "reward_gradient"):
            spec = theta if kind == "reward_gradient" else rho
            if name not in fd_cache:
                fd_cache[name] = al.gradient_allocation_fd(spec, scn, cfg["step"])
            entry["fd_delta"] = (k.values - fd_cache[name].values).tolist()
        entries.append(entry)
        rows.append([kind, *k.values.tolist(), k.total(), entry["residual"]])
    report = {"theta_X": T, "rho_X": R, "allocations": entries}
    text = _table(["kind", *scn.labels, "sum", "residual"], rows) + f"\nrho(X) = {_fmt(R)}, theta(X) = {_fmt(T)}"
    return report, text, EXIT_OK


def cmd_performance(cfg, scn):
    rho, theta = _specs(cfg)
    x = scn.total()
    T, R = theta.evaluate(x, scn), rho.evaluate(x, scn)
    kind = (cfg.get("kind") or ["subgradient"])[0]
    k = compute_allocation(kind, scn, rho, theta, cfg["step"])
    signals = []
    for i in range(scn.n):
        Ti = theta.evaluate(scn.positions[i], scn)
        d = Ti * R - k.values[i] * T
        signals.append({
            "label": scn.labels[i],
            "theta": Ti,
            "k": float(k.values[i]),
            "ratio": rrr(Ti, k.values[i]).to_json(),
            "cross_difference": d,
            "signal": "above" if d > 0 else "below" if d < 0 else "equal",
        })
    report = {
        "aggregate": {"theta": T, "rho": R, "ratio": rrr(T, R).to_json(), "class": classify_portfolio(T, R).value},
        "rorac": rorac(scn, np.ones(scn.n), rho).to_json(),
        "allocation": k.to_json(),
        "positions": signals,
    }
    rows = [[s["label"], s["theta"], s["k"], s["ratio"]["value"], s["signal"]] for s in signals]
    rows.append(["X", T, R, report["aggregate"]["ratio"]["value"], report["aggregate"]["class"]])
    text = _table(["position", "theta", "k", "ratio", "signal"], rows)
    text += f"\nRORAC: {_fmt(report['rorac']['value'])} ({report['rorac']['case']})"
    return report, text, EXIT_OK


def _verdict_text(verdict) -> str:
    rows = []
    for p in verdict.positions:
        detail = p.note or ""
        if p.witness:
            key = "h" if "h" in p.witness else "s"
            detail = f"{key}={_fmt(p.witness.get(key))} {p.witness.get('conclusion') or p.witness.get('required', '')}".strip()
        rows.append([p.label, p.status, detail])
    return _table(["position", "status", "detail"], rows) + f"\n{verdict.definition}: {verdict.status}"


def cmd_suitability(cfg, scn):
    rho, theta = _specs(cfg)
    tag = cfg.get("definition")
    if tag is None:
        raise UsageError("--definition is required")
    grid = HGrid(tuple(cfg["grid"]))
    tol, step = cfg["tol"], cfg["step"]
    dk = _parse_perturb(cfg.get("perturb"), scn.n)
    dt = _parse_perturb(cfg.get("perturb_t"), scn.n)
    kind = (cfg.get("kind") or ["subgradient"])[0]
    report = {}
    if tag == "game_def_4_1":
        game = GameInstance(scn, theta, rho)
        S = _parse_coalition(cfg.get("coalition", "1"), scn.n)
        verdict = verify_def_4_1(game, lambda S_, i: marginal_contribution(game, S_, i) + dk[i], S, tol)
        report["allocation"] = {"kind": "marginal_contribution", "coalition": list(S.members), "perturbation": dk.tolist()}
    elif tag == "def_3_7":
        tf, rf = portfolio_functions(theta, rho, scn)
        u = np.ones(scn.n)
        t, k = gradient_pair(tf, rf, u, step)
        t, k = t + dt, k + dk
        verdict = verify_def_3_7(t, k, tf, rf, u, step, cfg.get("levels", 3), tol, scn.labels)
        report["allocation"] = {"t": t.tolist(), "k": k.tolist(), "kind": "gradient_fd", "step": step}
        cex = []
        for ts in cfg.get("t_scale", []):
            for i in np.flatnonzero(dk):
                cex.append(gradient_uniqueness_counterexample(k, rf, u, int(i), ts, step, cfg.get("levels", 3)).to_json())
        if cex:
            report["counterexamples"] = cex
    else:
        alloc = compute_allocation(kind, scn, rho, theta, step)
        k = alloc.values + dk
        report["allocation"] = {**alloc.to_json(), "values": k.tolist(), "perturbation": dk.tolist()}
        if tag == "def_3_2":
            rule = None
            if cfg.get("redecompositions", 0) > 0:
                rule = lambda s: compute_allocation(kind, s, rho, theta, step)  # noqa: E731
            verdict = verify_def_3_2(k, theta, rho, scn, grid, tol, rule, cfg.get("redecompositions", 0), cfg["seed"])
        elif tag == "thm_3_3_conditions":
            verdict = check_thm33_conditions(k, rho, scn, grid, tol)
        else:
            t = al.supergradient_allocation(al.supergradient_density(theta, scn.total(), scn), scn).values + dt
            report["reward_allocation"] = {"kind": "supergradient", "values": t.tolist(), "perturbation": dt.tolist()}
            if tag == "def_3_5":
                verdict = verify_def_3_5(t, k, theta, rho, scn, grid, tol)
            else:
                verdict = check_thm36_conditions(t, k, theta, rho, scn, grid, tol)
    report["verdict"] = verdict.to_json()
    return report, _verdict_text(verdict), verdict.exit_code


def cmd_game(cfg, scn):
    rho, theta = _specs(cfg)
    game = GameInstance(scn, theta, rho)
    S = _parse_coalition(cfg.get("coalition", "1"), scn.n)
    if cfg.get("coalition_list"):
        listed = [_parse_coalition(part, scn.n) for part in str(cfg["coalition_list"]).split(";") if part.strip()]
    else:
        listed = all_coalitions(scn.n)
    admissible = {c.mask for c in admissible_coalitions(game, listed)}
    table = []
    for c in listed:
        th, cost = game.values(c)
        table.append({
            "mask": c.mask,
            "members": [i + 1 for i in c],
            "theta": th,
            "cost": cost,
            "gamma": th / cost if c.mask in admissible else None,
            "admissible": c.mask in admissible,
        })
    kappa = lambda S_, i: marginal_contribution(game, S_, i)  # noqa: E731
    verdict = verify_def_4_1(game, kappa, S, cfg["tol"])
    prop = check_prop_4_2(game, kappa, S)
    report = {"coalition": [i + 1 for i in S], "coalitions": table, "verdict": verdict.to_json(), "prop_bounds": prop.to_json()}
    if scn.n <= 20:
        ww = al.with_without_allocation(rho, scn)
        c_n = game.values(game.grand())[1]
        props = {"with_without": check_allocation_properties(game, ww).to_json()}
        headline = {
            "rho_N": c_n,
            "with_without": ww.values.tolist(),
            "with_without_efficiency_gap": ww.total() - c_n,
            "marginal_equals_with_without": all(
                marginal_contribution(game, game.grand().remove(i), i) == ww.values[i] for i in range(scn.n)
            ),
        }
        try:
            nw = al.normalized_with_without(rho, scn)
            props["normalized_with_without"] = check_allocation_properties(game, nw).to_json()
            headline["normalized_with_without"] = nw.values.tolist()
            headline["normalized_residual"] = al.check_full_allocation(nw, c_n)
        except al.AllocationError as exc:
            headline["normalized_with_without"] = None
            headline["normalized_error"] = str(exc)
        report["properties"] = props
        report["headline"] = headline
    rows = [[str(Coalition(i - 1 for i in r["members"])), r["theta"], r["cost"], r["gamma"], "yes" if r["admissible"] else "no"]
            for r in table]
    text = _table(["S", "theta", "cost", "gamma", "admissible"], rows) + "\n" + _verdict_text(verdict)
    if "headline" in report:
        text += f"\nwith-without efficiency gap: {_fmt(report['headline']['with_without_efficiency_gap'])}"
    return report, text, verdict.exit_code


def cmd_axioms(cfg, scn):
    specs = cfg.get("measure") or [cfg["risk"]]
    results, rows = [], []
    for text in specs:
        spec = parse_spec(text)
        if isinstance(spec, RewardMeasureSpec):
            rep = check_reward_axioms(spec, scn, cfg.get("trials", 500), cfg["seed"])
        else:
            rep = check_risk_axioms(spec, scn, cfg.get("trials", 500), cfg["seed"])
        results.append({"name": text, **rep.to_json()})
        rows.append([text] + [f"{k}:{v.status}" for k, v in rep.results.items()])
    width = max(len(r) for r in rows)
    rows = [r + [""] * (width - len(r)) for r in rows]
    return {"audits": results}, _table(["measure"] + [""] * (width - 1), rows), EXIT_OK


HANDLERS = {
    "measure": cmd_measure,
    "allocate": cmd_allocate,
    "performance": cmd_performance,
    "suitability": cmd_suitability,
    "game": cmd_game,
    "axioms": cmd_axioms,
}


def run(argv=None, stdout=None, stderr=None) -> int:
    stdout = stdout or sys.stdout
    stderr = stderr or sys.stderr
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        cfg_path = _prescan_config(argv)
        file_cfg = _load_config(cfg_path) if cfg_path else {}
    except DATA_ERRORS as exc:
        print(f"capalloc: error: {exc}", file=stderr)
        return EXIT_DATA
    if not any(a in COMMANDS for a in argv) and file_cfg.get("command") in COMMANDS:
        argv = [file_cfg["command"], *argv]
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:  # usage errors, --help and --version
        return int(exc.code or 0)
    if args.command is None:
        parser.print_usage(stderr)
        print("capalloc: error: a subcommand is required", file=stderr)
        return EXIT_USAGE
    try:
        cfg = resolve(args, file_cfg)
        scn = load_source(cfg)
        report, text, code = HANDLERS[args.command](cfg, scn)
    except UsageError as exc:
        print(f"capalloc: error: {exc}", file=stderr)
        return EXIT_USAGE
    except (ValueError, *DATA_ERRORS) as exc:
        print(f"capalloc: error: {exc}", file=stderr)
        return EXIT_DATA
    full = {"command": args.command, "version": __version__, "config": cfg, "scenario": _scenario_block(scn, cfg), **report}
    payload = dumps(full)
    if args.json_out == "-":
        stdout.write(payload)
    else:
        print(text, file=stdout)
        if args.json_out:
            Path(args.json_out).write_text(payload, encoding="utf-8")
    return code


def main(argv=None) -> None:
    sys.exit(run(argv))


if __name__ == "__main__":
    main()
