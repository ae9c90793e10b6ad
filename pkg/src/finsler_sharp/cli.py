"""Command line front end for the verification library.

Subcommands: constants, verify, sweep, pde, avr, repro.  Parameters come
from flags or a JSON config document (--config); flags override the
document, the merged config is schema-validated, and every emitted
report embeds the fully materialized config so a run can be reproduced
from its own output.

Reports are JSON with sorted keys and a null timestamp by default, so a
fixed seed gives byte-identical bytes; --timestamp opts into a real
clock value.  Exit codes: 0 all checks passed, 2 bad usage or config,
3 a numerical check failed.
"""

from __future__ import annotations

import argparse
import csv
import datetime
import json
import math
import os
import sys
import time
from typing import Optional

import jsonschema
import numpy as np

from . import constants as C
from . import verify as V
from ._util import ENV_THREADS, resolve_workers
from .manifold import avr as estimate_avr, instance_from_descriptor
from .pde import (
    OscillatoryNonlinearity,
    RadialBvp,
    eigen_quotient,
    first_eigenvalue,
    mountain_pass_solve,
    multiplicity_explore,
    weak_residual,
)
from .rearrange import morrey_extremal_profile, profile_from_descriptor
from .report import _plain

SCHEMA_VERSION = 1
EXIT_OK, EXIT_USAGE, EXIT_NUMERIC = 0, 2, 3

TASKS = ("constants", "verify", "sweep", "pde", "avr", "repro")

CONFIG_SCHEMA = {
    "type": "object",
    "additionalProperties": False,
    "required": ["task"],
    "properties": {
        "task": {"enum": list(TASKS)},
        "seed": {"type": "integer"},
        "threads": {"type": ["integer", "null"]},
        "out_dir": {"type": ["string", "null"]},
        "out": {"type": ["string", "null"]},
        "timestamp": {"type": "boolean"},
        "instance": {"type": ["object", "string", "null"]},
        "profile": {"type": ["object", "string", "null"]},
        "shape": {"type": ["object", "string", "null"]},
        "inequality": {"type": ["string", "null"]},
        "suite": {"type": ["integer", "null"]},
        "p": {"type": ["number", "null"]},
        "n": {"type": ["integer", "null"]},
        "mu": {"type": ["number", "null"]},
        "lam": {"type": ["number", "null"]},
        "avr": {"type": ["number", "null"]},
        "radius": {"type": ["number", "null"]},
        "k_max": {"type": ["integer", "null"]},
        "nodes": {"type": ["integer", "null"]},
        "problem": {"type": ["string", "null"]},
        "kind": {"type": ["string", "null"]},
        "sweep": {"type": ["string", "null"]},
        "method": {"type": ["string", "null"]},
        "samples": {"type": ["integer", "null"]},
        "radii": {"type": ["array", "string", "null"]},
    },
}


class ConfigError(Exception):
    pass


# ---------------------------------------------------------------------------
# config assembly


def _parse_scalar(text: str):
    low = text.lower()
    if low == "true":
        return True
    if low == "false":
        return False
    for cast in (int, float):
        try:
            return cast(text)
        except ValueError:
            continue
    return text


def parse_descriptor(spec) -> dict:
    """'name:k=v,k=v' -> {'kind': name, k: v, ...}; dicts pass through."""
    if isinstance(spec, dict):
        return dict(spec)
    if not isinstance(spec, str) or not spec.strip():
        raise ConfigError(f"bad descriptor: {spec!r}")
    head, _, rest = spec.partition(":")
    out = {"kind": head.strip()}
    if rest.strip():
        for item in rest.split(","):
            key, eq, val = item.partition("=")
            if not eq:
                raise ConfigError(f"descriptor item {item!r} is not key=value")
            out[key.strip()] = _parse_scalar(val.strip())
    return out


def _instance_from_config(spec):
    d = parse_descriptor(spec)
    if d.get("kind") == "lp":
        # shorthand: lp:n=2,p=4 builds the normalized Minkowski instance
        n = int(d.pop("n"))
        p = float(d.pop("p"))
        normalize = bool(d.pop("normalize", True))
        d.pop("kind")
        if d:
            raise ConfigError(f"unknown lp instance keys: {sorted(d)}")
        d = {
            "kind": "minkowski",
            "n": n,
            "norm": {"kind": "lp", "n": n, "p": p, "normalize": normalize},
        }
    try:
        return instance_from_descriptor(d)
    except (ValueError, KeyError) as ex:
        raise ConfigError(str(ex)) from ex


def _profile_from_config(spec, dim=None):
    d = parse_descriptor(spec)
    if dim is not None:
        d.setdefault("n", dim)
    try:
        return profile_from_descriptor(d)
    except (ValueError, KeyError) as ex:
        raise ConfigError(str(ex)) from ex


def parse_sweep_grid(spec) -> list:
    """'R=1:64:geometric[:factor]' or 'R=1:8:linear[:count]'."""
    if not isinstance(spec, str):
        raise ConfigError("sweep must be a string like R=1:64:geometric")
    name, eq, body = spec.partition("=")
    if not eq or name.strip() != "R":
        raise ConfigError(f"only R sweeps are supported, got {spec!r}")
    parts = body.split(":")
    if len(parts) not in (3, 4):
        raise ConfigError(f"sweep needs start:stop:mode[:k], got {body!r}")
    a, b, mode = float(parts[0]), float(parts[1]), parts[2]
    if mode == "geometric":
        factor = float(parts[3]) if len(parts) == 4 else 2.0
        if not (a > 0 and b >= a and factor > 1):
            raise ConfigError("geometric sweep needs 0 < start <= stop, factor > 1")
        grid, r = [], a
        while r <= b * (1.0 + 1e-12):
            grid.append(r)
            r *= factor
        return grid
    if mode == "linear":
        k = int(parts[3]) if len(parts) == 4 else 8
        if k < 1 or b < a:
            raise ConfigError("linear sweep needs count >= 1 and stop >= start")
        return [float(x) for x in np.linspace(a, b, k)]
    raise ConfigError(f"unknown sweep mode {mode!r}")


def _merge_config(args: argparse.Namespace) -> dict:
    cfg = {}
    if getattr(args, "config", None):
        try:
            with open(args.config, "r", encoding="utf-8") as fh:
                cfg = json.load(fh)
        except (OSError, json.JSONDecodeError) as ex:
            raise ConfigError(f"cannot read config {args.config}: {ex}") from ex
        if not isinstance(cfg, dict):
            raise ConfigError("config document must be a JSON object")
        if not cfg:
            raise ConfigError("config document is empty")
        unknown = set(cfg) - set(CONFIG_SCHEMA["properties"])
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        if "task" in cfg and cfg["task"] != args.task:
            raise ConfigError(
                f"config task {cfg['task']!r} does not match subcommand {args.task!r}"
            )
    for key, val in vars(args).items():
        if key == "config" or val is None:
            continue
        cfg[key] = val
    cfg.setdefault("seed", 0)
    cfg.setdefault("timestamp", False)
    try:
        jsonschema.validate(cfg, CONFIG_SCHEMA)
    except jsonschema.ValidationError as ex:
        raise ConfigError(f"config rejected: {ex.message}") from ex
    return cfg


# ---------------------------------------------------------------------------
# emission


def _timestamp(cfg) -> Optional[str]:
    if cfg.get("timestamp"):
        return datetime.datetime.now(datetime.timezone.utc).isoformat()
    return None


def _document(cfg: dict, payload: dict) -> dict:
    doc = {
        "schema": SCHEMA_VERSION,
        "task": cfg["task"],
        "seed": cfg.get("seed", 0),
        "threads": resolve_workers(cfg.get("threads")),
        "timestamp": _timestamp(cfg),
        "config": _plain({k: v for k, v in cfg.items() if k != "func"}),
    }
    doc.update(_plain(payload))
    return doc


def _resolve_out(cfg: dict, default_name: str):
    out = cfg.get("out")
    out_dir = cfg.get("out_dir")
    if out is None and out_dir is None:
        return None
    if out is None:
        return os.path.join(out_dir, default_name)
    if out_dir is not None and not os.path.isabs(out):
        return os.path.join(out_dir, out)
    return out


def _say(cfg: dict, msg: str) -> None:
    """Status lines go to stderr when the JSON document owns stdout."""
    to_file = cfg.get("out") is not None or cfg.get("out_dir") is not None
    print(msg, file=sys.stdout if to_file else sys.stderr)


def _emit(doc: dict, cfg: dict, default_name: str, path=None) -> None:
    text = json.dumps(doc, sort_keys=True, indent=2) + "\n"
    if path is None:
        path = _resolve_out(cfg, default_name)
    if path is None:
        sys.stdout.write(text)
        return
    os.makedirs(os.path.dirname(path) or ".", exist_ok=True)
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(text)
    print(f"wrote {path}")


def _write_csv(path: str, header, rows) -> None:
    os.makedirs(os.path.dirname(path) or ".", exist_ok=True)
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        for row in rows:
            writer.writerow([repr(float(v)) if isinstance(v, float) else v for v in row])


# ---------------------------------------------------------------------------
# tasks


def _task_constants(cfg: dict) -> int:
    if cfg.get("p") is None or cfg.get("n") is None:
        raise ConfigError("constants needs --p and --n")
    try:
        sc = C.sharp_constants(
            float(cfg["p"]), int(cfg["n"]), float(cfg.get("avr") or 1.0),
            float(cfg.get("mu") or 0.0),
        )
    except ValueError as ex:
        raise ConfigError(str(ex)) from ex
    vals = sc.as_dict()
    row = " ".join(
        f"{k}={vals[k]:.12g}" if isinstance(vals[k], float) else f"{k}={vals[k]}"
        for k in ("p", "n", "avr", "mu", "talenti_support", "morrey_support",
                  "talenti_l1", "morrey_l1", "eta", "hardy", "mu_bar", "bpv")
        if vals[k] is not None
    )
    print(row)
    if cfg.get("out") is not None or cfg.get("out_dir") is not None:
        _emit(_document(cfg, {"constants": vals}), cfg, "constants.json")
    return EXIT_OK


def _task_verify(cfg: dict) -> int:
    name = cfg.get("inequality")
    if not name:
        raise ConfigError("verify needs --inequality")
    key = name.replace("-", "_")
    if key not in V.INEQUALITIES:
        raise ConfigError(f"unknown inequality {name!r}")
    if cfg.get("instance") is None:
        raise ConfigError("verify needs --instance")
    m = _instance_from_config(cfg["instance"])
    suite = cfg.get("suite")
    if suite:
        reports = V.randomized_suite(
            m, key, n_draws=int(suite), seed=int(cfg.get("seed", 0)),
            workers=cfg.get("threads"), p=cfg.get("p"), mu=cfg.get("mu"),
        )
        n_pass = sum(r.passed for r in reports)
        _say(cfg, f"{key}: {n_pass}/{len(reports)} draws passed")
        doc = _document(cfg, {
            "suite": [r.as_dict() for r in reports],
            "passed": n_pass == len(reports),
        })
        _emit(doc, cfg, f"suite_{key}.json")
        return EXIT_OK if n_pass == len(reports) else EXIT_NUMERIC
    kwargs = {}
    shape = parse_descriptor(cfg["shape"]) if cfg.get("shape") else None
    u = _profile_from_config(cfg["profile"], m.dim) if cfg.get("profile") else None
    if key in ("morrey_support", "morrey_l1", "hardy", "polya_szego", "hlp"):
        p = cfg.get("p")
        if p is None and cfg.get("profile"):
            # inequality exponent defaults to the profile family's p
            p = parse_descriptor(cfg["profile"]).get("p")
        if p is None:
            raise ConfigError(f"{name} needs --p")
        kwargs["p"] = float(p)
        if u is None:
            raise ConfigError(f"{name} needs --profile")
    if key == "bpv":
        if u is None:
            raise ConfigError("bpv needs --profile")
        kwargs["mu"] = float(cfg.get("mu") or 0.0)
        if cfg.get("radius") is not None:
            shape = float(cfg["radius"])
    if key == "isoperimetric" and shape is None:
        raise ConfigError("isoperimetric needs --shape")
    try:
        rep = V.run_inequality(key, m, u=u, shape=shape, **kwargs)
    except ValueError as ex:
        raise ConfigError(str(ex)) from ex
    status = "PASS" if rep.passed else "FAIL"
    _say(cfg, f"{key}: lhs={rep.lhs:.10g} rhs={rep.rhs:.10g} ratio={rep.ratio:.10g} {status}")
    _emit(_document(cfg, {"report": rep.as_dict(), "passed": rep.passed}), cfg,
          f"verify_{key}.json")
    return EXIT_OK if rep.passed else EXIT_NUMERIC


def _task_sweep(cfg: dict) -> int:
    kind = cfg.get("kind")
    if kind not in ("support", "l1"):
        raise ConfigError("sweep needs --kind support|l1")
    if cfg.get("instance") is None or cfg.get("p") is None or cfg.get("sweep") is None:
        raise ConfigError("sweep needs --instance, --p and --sweep")
    m = _instance_from_config(cfg["instance"])
    grid = parse_sweep_grid(cfg["sweep"])
    p = float(cfg["p"])
    try:
        if kind == "support":
            sw = V.sharpness_sweep_support(m, p, grid)
            cols = [(r["R"], r["scaled_energy"], r["target"],
                     r["scaled_energy"] / r["target"], r["target"]) for r in sw.rows]
        else:
            sw = V.sharpness_sweep_l1(m, p, grid)
            cols = [(r["R"], r["constant_estimate"], sw.target,
                     r["constant_estimate"] / sw.target, sw.target) for r in sw.rows]
    except ValueError as ex:
        raise ConfigError(str(ex)) from ex
    _say(cfg, f"sweep {kind}: limit={sw.limit:.10g} target={sw.target:.10g} "
         f"{'PASS' if sw.passed else 'FAIL'}")
    csv_path = _resolve_out(cfg, f"sweep_{kind}.csv")
    json_path = None
    if csv_path is not None:
        _write_csv(csv_path, ("R", "lhs", "rhs", "ratio", "target"), cols)
        print(f"wrote {csv_path}")
        json_path = os.path.splitext(csv_path)[0] + ".json"
    _emit(_document(cfg, {"sweep": sw.as_dict(), "passed": sw.passed}), cfg,
          f"sweep_{kind}.json", path=json_path)
    return EXIT_OK if sw.passed else EXIT_NUMERIC


def _profile_csv(path: str, grid, values) -> None:
    du = np.gradient(values, grid, edge_order=2)
    _write_csv(path, ("rho", "u", "du"), zip(map(float, grid), map(float, values), map(float, du)))


def _task_pde(cfg: dict) -> int:
    problem = cfg.get("problem")
    if problem not in ("ep", "p-problem", "d-problem"):
        raise ConfigError("pde needs --problem ep|p-problem|d-problem")
    if cfg.get("n") is None:
        raise ConfigError("pde needs --n")
    n = int(cfg["n"])
    radius = float(cfg.get("radius") or 1.0)
    mu = float(cfg.get("mu") or 0.0)
    lam = float(cfg.get("lam") or 0.0)
    nodes = int(cfg.get("nodes") or 4096)
    out = _resolve_out(cfg, f"{problem.replace('-', '_')}.csv")

    try:
        if problem == "ep":
            bvp = RadialBvp(n=n, radius=radius, mu=mu, n_nodes=nodes)
            lam1, prof = first_eigenvalue(bvp)
            _, quotient, parts = eigen_quotient(bvp)
            payload = {
                "lambda1": lam1,
                "residual": abs(quotient - lam1) / lam1,
                "mu_bar": bvp.frobenius_exponent() + (n - 2.0) / 2.0,
                "rayleigh_quotient": quotient,
            }
            passed = payload["residual"] < 1e-6
            profiles = [(bvp.grid(), prof)]
        elif problem == "p-problem":
            if cfg.get("p") is None:
                raise ConfigError("p-problem needs --p")
            p = float(cfg["p"])
            bvp = RadialBvp(n=n, radius=radius, mu=mu, lam=lam,
                            nonlinearity=("power", p), n_nodes=nodes)
            sol = mountain_pass_solve(bvp, p=p)
            wres = weak_residual(sol.values, bvp, p)
            payload = {
                "energy_level": sol.level,
                "residual": sol.residual,
                "weak_residual": wres,
                "shooting_gap": sol.shooting_gap,
                "amplitude": sol.amplitude,
                "min_value": float(np.min(sol.values)),
            }
            passed = sol.residual < 1e-6 and sol.level > 0 and payload["min_value"] >= -1e-10
            profiles = [(sol.grid, sol.values)]
        else:
            if cfg.get("p") is None:
                raise ConfigError("d-problem needs --p")
            p = float(cfg["p"])
            k_max = int(cfg.get("k_max") or 3)
            nl = OscillatoryNonlinearity(p)
            bvp = RadialBvp(n=n, radius=radius, lam=lam,
                            nonlinearity=("general", nl), n_nodes=nodes)
            profs = multiplicity_explore(bvp, h=nl, lam=lam, k_max=k_max, p=p)
            payload = {
                "profiles": [
                    {"sup": c.sup, "level": c.level, "residual": c.residual,
                     "truncation": c.truncation}
                    for c in profs
                ],
                "distinct": len(profs),
            }
            passed = all(c.residual < 1e-6 for c in profs)
            profiles = [(c.grid, c.values) for c in profs]
    except ValueError as ex:
        raise ConfigError(str(ex)) from ex

    json_path = None
    if out:
        if len(profiles) == 1:
            _profile_csv(out, *profiles[0])
            print(f"wrote {out}")
        else:
            stem, ext = os.path.splitext(out)
            for i, (grid, values) in enumerate(profiles, start=1):
                path = f"{stem}_k{i}{ext or '.csv'}"
                _profile_csv(path, grid, values)
                print(f"wrote {path}")
        json_path = os.path.splitext(out)[0] + ".json"
    if "profiles" in payload:
        for c in payload["profiles"]:
            _say(cfg, f"pde {problem}: sup={c['sup']:.8g} level={c['level']:.8g} "
                 f"residual={c['residual']:.3g}")
    else:
        _say(cfg, f"pde {problem}: " + " ".join(f"{k}={v:.8g}" for k, v in payload.items()
                                                if isinstance(v, float)))
    _emit(_document(cfg, {"summary": payload, "passed": passed}), cfg,
          f"pde_{problem.replace('-', '_')}.json", path=json_path)
    return EXIT_OK if passed else EXIT_NUMERIC


def _task_avr(cfg: dict) -> int:
    if cfg.get("instance") is None:
        raise ConfigError("avr needs --instance")
    m = _instance_from_config(cfg["instance"])
    method = cfg.get("method") or "mc"
    radii = cfg.get("radii")
    if isinstance(radii, str):
        radii = [float(x) for x in radii.split(",")]
    try:
        est = estimate_avr(
            m, method=method, n_samples=int(cfg.get("samples") or 200_000),
            r_schedule=radii, seed=int(cfg.get("seed", 0)), workers=cfg.get("threads"),
        )
    except ValueError as ex:
        raise ConfigError(str(ex)) from ex
    inside = est.lo - 3.0 * est.stderr <= est.point <= est.hi + 3.0 * est.stderr
    passed = bool(inside and est.bg_ok)
    payload = {
        "point": est.point, "lo": est.lo, "hi": est.hi, "stderr": est.stderr,
        "method": est.method, "bishop_gromov_ok": est.bg_ok, "passed": passed,
    }
    if est.curve is not None:
        payload["curve"] = {
            "radii": list(map(float, est.curve.radii)),
            "ratios": list(map(float, est.curve.ratios(m.dim))),
            "ratio_stderrs": list(map(float, est.curve.ratio_stderrs(m.dim))),
        }
    _say(cfg, f"avr: point={est.point:.6f} interval=[{est.lo:.6f}, {est.hi:.6f}] "
         f"{'PASS' if passed else 'FAIL'}")
    _emit(_document(cfg, payload), cfg, "avr.json")
    return EXIT_OK if passed else EXIT_NUMERIC


def run(config: dict) -> int:
    """Execute one validated config; returns the process exit code."""
    task = config.get("task")
    handler = {
        "constants": _task_constants,
        "verify": _task_verify,
        "sweep": _task_sweep,
        "pde": _task_pde,
        "avr": _task_avr,
        "repro": _task_repro,
    }.get(task)
    if handler is None:
        raise ConfigError(f"unknown task {task!r}")
    return handler(config)


# ---------------------------------------------------------------------------
# repro: the full acceptance pipeline from one config


def _repro_criteria(seed: int, threads):
    """Yields (index, passed, payload), one entry per acceptance criterion.

    Payloads hold only deterministic numbers (no wall-clock), so a fixed
    seed reproduces the emitted reports byte for byte.
    """
    from .manifold import euclidean_instance, f_eps_instance, minkowski_instance
    from .norms import lp_norm, normalize
    from .rearrange import l1_extremal_profile
    from .constants import (
        bessel_first_zero, bpv_constant, l1_extremal_height, omega_n,
    )

    e2 = euclidean_instance(2)
    pn_cases = ((4.0, 2), (5.0, 3), (7.0, 4))
    instances = {}

    def inst(n, kind):
        key = (n, kind)
        if key not in instances:
            instances[key] = (
                euclidean_instance(n) if kind == "euclidean"
                else minkowski_instance(normalize(lp_norm(n, 4.0)))
            )
        return instances[key]

    # 1: support-bound extremal equality
    rows = []
    for p, n in pn_cases:
        for kind in ("euclidean", "l4"):
            rep = V.verify_morrey_support(inst(n, kind), morrey_extremal_profile(p, n), p)
            rows.append({"p": p, "n": n, "instance": kind, "ratio": rep.ratio})
    yield (1, all(abs(r["ratio"] - 1.0) <= 1e-3 for r in rows), {"cases": rows})

    # 2: support sweep limits and constant convergence
    rows = []
    for p, n in pn_cases:
        sw = V.sharpness_sweep_support(inst(n, "euclidean"), p, [1.0, 2.0, 4.0, 8.0])
        dev = max(abs(r["ratio"] - 1.0) for r in sw.rows)
        rows.append({"p": p, "n": n, "limit": sw.limit, "target": sw.target,
                     "constant_dev": dev, "passed": sw.passed and dev <= 1e-3})
    yield (2, all(r["passed"] for r in rows), {"sweeps": rows})

    # 3: L1 extremal equality, Beta-target limits, exact sup
    rows = []
    for p, n in pn_cases:
        rep = V.verify_morrey_l1(inst(n, "euclidean"), l1_extremal_profile(p, n), p)
        sw = V.sharpness_sweep_l1(inst(n, "euclidean"), p, [1.0, 2.0, 4.0])
        last = sw.rows[-1]
        rows.append({
            "p": p, "n": n, "ratio": rep.ratio,
            "l1_dev": abs(last["scaled_l1"] - last["l1_target"]) / last["l1_target"],
            "energy_dev": abs(last["scaled_energy"] - last["energy_target"]) / last["energy_target"],
            "sup_dev": max(r["sup_deviation"] for r in sw.rows),
            "height": l1_extremal_height(p, n),
        })
    ok3 = all(
        abs(r["ratio"] - 1.0) <= 1e-3 and r["l1_dev"] <= 1e-3
        and r["energy_dev"] <= 1e-3 and r["sup_dev"] <= 1e-9 * r["height"]
        for r in rows
    )
    yield (3, ok3, {"cases": rows})

    # 4: special-function spot values and Beta/Gamma identities
    refs = {0.0: 2.404825557695773, 0.5: math.pi, 1.0: 3.831705970207512}
    zero_devs = {str(nu): abs(bessel_first_zero(nu) - ref) for nu, ref in refs.items()}
    idev = 0.0
    for a in (0.5, 1.0, 1.7, 2.3, 3.0):
        for b in (0.4, 1.1, 2.6):
            beta = math.gamma(a) * math.gamma(b) / math.gamma(a + b)
            from scipy.special import beta as sbeta
            idev = max(idev, abs(sbeta(a, b) - beta) / beta)
        idev = max(idev, abs(math.gamma(a + 1.0) - a * math.gamma(a)) / math.gamma(a + 1.0))
    ok4 = all(d <= 1e-9 for d in zero_devs.values()) and idev <= 1e-12
    yield (4, ok4, {"zero_deviations": zero_devs, "identity_deviation": idev})

    # 5: eigenvalue solver vs closed form on a 12-case grid
    grid = [
        (2, 1.0, 0.0), (2, 0.5, 0.0), (2, 2.0, 0.0), (2, 1.7, 0.0),
        (3, 1.0, 0.0), (3, 1.0, 0.2), (3, 1.5, 0.1), (3, 0.7, 0.24),
        (4, 1.0, 0.0), (4, 1.0, 0.5), (4, 2.0, 0.9), (4, 1.3, 0.25),
    ]
    rows = []
    for n, radius, mu in grid:
        bvp = RadialBvp(n=n, radius=radius, mu=mu)
        lam1, _ = first_eigenvalue(bvp)
        mu_bar, _ = bpv_constant(mu, n, 1.0, omega_n(n))
        dev = abs(lam1 * radius**2 - bessel_first_zero(mu_bar) ** 2)
        rows.append({"n": n, "R": radius, "mu": mu, "lambda1": lam1, "dev": dev})
    yield (5, all(r["dev"] < 1e-4 for r in rows), {"cases": rows})

    # 6: BPV randomized suites + eigenprofile equality
    suites = {}
    for label, m in (("euclidean_2", e2), ("l4_2", inst(2, "l4"))):
        reps = V.randomized_suite(m, "bpv", n_draws=100, seed=seed, workers=threads)
        suites[label] = sum(r.passed for r in reps)
    eq_rows = []
    for n, radius, mu in ((2, 1.0, 0.0), (3, 1.0, 0.2)):
        bvp = RadialBvp(n=n, radius=radius, mu=mu)
        _, quotient, _ = eigen_quotient(bvp)
        _, s_const = bpv_constant(mu, n, 1.0, omega_n(n) * radius**n)
        eq_rows.append({"n": n, "mu": mu, "equality_dev": abs(quotient / s_const - 1.0)})
    ok6 = all(v == 100 for v in suites.values()) and all(
        r["equality_dev"] < 1e-4 for r in eq_rows
    )
    yield (6, ok6, {"suite_passes": suites, "eigen_equality": eq_rows})

    # 7: Hardy suites and near-extremal monotonicity
    from .manifold import euclidean_instance as _ei
    suites = {}
    for n, p in ((3, 2.0), (4, 2.0), (4, 3.0)):
        reps = V.randomized_suite(_ei(n), "hardy", n_draws=100, seed=seed, workers=threads, p=p)
        suites[f"n{n}_p{int(p)}"] = sum(r.passed for r in reps)
    mono = {}
    for n, p in ((3, 2.0), (4, 2.0)):
        ratios = []
        for delta in (0.2, 0.1, 0.05):
            rep = V.verify_hardy(_ei(n), V.hardy_test_family(p, n, delta), p)
            ratios.append(rep.rhs / rep.lhs)
        mono[f"n{n}_p{int(p)}"] = {"ratios": ratios,
                                   "monotone": ratios[0] < ratios[1] < ratios[2]}
    ok7 = all(v == 100 for v in suites.values()) and all(
        v["monotone"] for v in mono.values()
    )
    yield (7, ok7, {"suite_passes": suites, "near_extremal": mono})

    # 8: rearrangement property suites
    suites = {}
    for name in ("polya_szego", "hlp", "layer_cake", "equimeasurability"):
        reps = V.randomized_suite(e2, name, n_draws=100, seed=seed, workers=threads)
        suites[name] = sum(r.passed for r in reps)
    yield (8, all(v == 100 for v in suites.values()), {"suite_passes": suites})

    # 9: isoperimetric equality and strict cases
    fe = f_eps_instance(2, 1.0, normalize=True)
    rows = {
        "euclidean": V.verify_isoperimetric(e2, {"kind": "ball", "radius": 1.0}),
        "l4": V.verify_isoperimetric(inst(2, "l4"), {"kind": "wulff", "radius": 1.0}),
        "f_eps_1": V.verify_isoperimetric(fe, {"kind": "wulff", "radius": 1.0}),
    }
    rect = V.verify_isoperimetric(e2, {"kind": "rectangle", "a": 2.0, "b": 1.0})
    ell = V.verify_isoperimetric(e2, {"kind": "ellipse", "a": 2.0, "b": 1.0})
    ok9 = (
        all(abs(r.ratio - 1.0) <= 1e-3 for r in rows.values())
        and rect.ratio > 1.0 + 1e-6 and ell.ratio > 1.0 + 1e-6
        and rect.passed and ell.passed
    )
    yield (9, ok9, {
        "equality_ratios": {k: r.ratio for k, r in rows.items()},
        "rectangle_ratio": rect.ratio, "ellipse_ratio": ell.ratio,
    })

    # 10: Monte-Carlo AVR inside the sandwich interval, Bishop-Gromov ok
    rows = []
    for n in (2, 3):
        for eps in (0.5, 1.0, 2.0):
            m = f_eps_instance(n, eps)
            est = estimate_avr(m, method="mc", n_samples=150_000, seed=seed, workers=threads)
            inside = est.lo - 3.0 * est.stderr <= est.point <= est.hi + 3.0 * est.stderr
            rows.append({"n": n, "eps": eps, "point": est.point, "lo": est.lo,
                         "hi": est.hi, "stderr": est.stderr,
                         "inside": bool(inside), "bg_ok": est.bg_ok})
    yield (10, all(r["inside"] and r["bg_ok"] for r in rows), {"cases": rows})

    # 11: mountain-pass sets + multiplicity exploration
    mp_sets = [
        (3, 1.0, 0.0, 0.0, 3.0), (3, 1.0, 0.2, -5.0, 4.0), (2, 1.0, 0.0, 1.0, 4.0),
        (2, 1.5, 0.0, 2.0, 3.5), (4, 1.0, 0.5, 1.0, 2.5), (3, 1.2, 0.1, 3.0, 3.2),
    ]
    rows = []
    for n, radius, mu, lam, p in mp_sets:
        bvp = RadialBvp(n=n, radius=radius, mu=mu, lam=lam, nonlinearity=("power", p))
        sol = mountain_pass_solve(bvp, p=p)
        rows.append({"n": n, "R": radius, "mu": mu, "lam": lam, "p": p,
                     "residual": sol.residual, "level": sol.level,
                     "min_value": float(np.min(sol.values))})
    nl = OscillatoryNonlinearity(4.0)
    bvp = RadialBvp(n=2, radius=1.0, lam=50.0, nonlinearity=("general", nl))
    profs = multiplicity_explore(bvp, h=nl, lam=50.0, k_max=3, p=4.0)
    sups = [c.sup for c in profs]
    ok11 = (
        all(r["residual"] < 1e-6 and r["level"] > 0 and r["min_value"] >= -1e-10
            for r in rows)
        and all(c.residual < 1e-6 for c in profs)
    )
    yield (11, ok11, {
        "mountain_pass": rows,
        "multiplicity_sups": sups,
        "multiplicity_count": len(profs),
    })


def _task_repro(cfg: dict) -> int:
    seed = int(cfg.get("seed", 0))
    threads = cfg.get("threads")
    out_dir = cfg.get("out_dir") or "repro_out"
    os.makedirs(out_dir, exist_ok=True)
    t_start = time.time()
    results = []
    t_prev = t_start
    for index, passed, payload in _repro_criteria(seed, threads):
        doc = _document(
            dict(cfg, out_dir=out_dir),
            {"criterion": index, "passed": bool(passed), "detail": payload},
        )
        path = os.path.join(out_dir, f"criterion_{index:02d}.json")
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(json.dumps(doc, sort_keys=True, indent=2) + "\n")
        results.append((index, bool(passed)))
        now = time.time()
        print(f"criterion {index:2d}: {'PASS' if passed else 'FAIL'} ({now - t_prev:.1f}s)")
        t_prev = now
    _write_csv(os.path.join(out_dir, "summary.csv"), ("criterion", "passed"), results)
    all_ok = all(p for _, p in results)
    print(f"repro: {sum(p for _, p in results)}/{len(results)} criteria passed "
          f"in {time.time() - t_start:.1f}s")
    return EXIT_OK if all_ok else EXIT_NUMERIC


# ---------------------------------------------------------------------------
# argument parsing


def _add_common(sp: argparse.ArgumentParser) -> None:
    sp.add_argument("--config", help="JSON config document; flags override it")
    sp.add_argument("--seed", type=int, default=None)
    sp.add_argument("--threads", type=int, default=None,
                    help=f"worker count (default: ${ENV_THREADS} or 1)")
    sp.add_argument("--out-dir", dest="out_dir", default=None)
    sp.add_argument("--out", default=None, help="output file path")
    sp.add_argument("--timestamp", action="store_true", default=None,
                    help="stamp reports with wall-clock time (breaks byte-identity)")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="finsler-sharp",
        description="sharp-inequality verification on Minkowski instances",
    )
    sub = ap.add_subparsers(dest="task", required=True)

    sp = sub.add_parser("constants", help="evaluate sharp constants for (p, n, avr, mu)")
    _add_common(sp)
    sp.add_argument("--p", type=float)
    sp.add_argument("--n", type=int)
    sp.add_argument("--avr", type=float, default=None)
    sp.add_argument("--mu", type=float, default=None)

    sp = sub.add_parser("verify", help="run one inequality check or a randomized suite")
    _add_common(sp)
    sp.add_argument("--inequality", default=None)
    sp.add_argument("--instance", default=None)
    sp.add_argument("--profile", default=None)
    sp.add_argument("--shape", default=None)
    sp.add_argument("--p", type=float, default=None)
    sp.add_argument("--mu", type=float, default=None)
    sp.add_argument("--radius", type=float, default=None)
    sp.add_argument("--suite", type=int, default=None,
                    help="run a randomized suite with this many draws")

    sp = sub.add_parser("sweep", help="sharpness sweep over a radius schedule")
    _add_common(sp)
    sp.add_argument("--kind", choices=("support", "l1"), default=None)
    sp.add_argument("--instance", default=None)
    sp.add_argument("--p", type=float, default=None)
    sp.add_argument("--sweep", default=None, help="R=1:64:geometric")

    sp = sub.add_parser("pde", help="radial eigenvalue / mountain-pass / multiplicity")
    _add_common(sp)
    sp.add_argument("--problem", choices=("ep", "p-problem", "d-problem"), default=None)
    sp.add_argument("--n", type=int)
    sp.add_argument("--radius", type=float, default=None)
    sp.add_argument("--mu", type=float, default=None)
    sp.add_argument("--lam", type=float, default=None)
    sp.add_argument("--p", type=float, default=None)
    sp.add_argument("--k-max", dest="k_max", type=int, default=None)
    sp.add_argument("--nodes", type=int, default=None)

    sp = sub.add_parser("avr", help="asymptotic volume ratio estimate")
    _add_common(sp)
    sp.add_argument("--instance", default=None)
    sp.add_argument("--method", choices=("exact", "mc"), default=None)
    sp.add_argument("--samples", type=int, default=None)
    sp.add_argument("--radii", default=None, help="comma-separated radius schedule")

    sp = sub.add_parser("repro", help="rerun the acceptance pipeline from one config")
    _add_common(sp)

    return ap


def main(argv=None) -> int:
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as ex:
        return int(ex.code) if ex.code is not None else EXIT_USAGE
    try:
        cfg = _merge_config(args)
        return run(cfg)
    except ConfigError as ex:
        print(f"error: {ex}", file=sys.stderr)
        return EXIT_USAGE
    except (RuntimeError, FloatingPointError) as ex:
        print(f"numerical failure: {ex}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
