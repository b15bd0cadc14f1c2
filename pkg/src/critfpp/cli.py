"""Batch front-end: config parsing, subcommand dispatch, seed management,
CSV/JSON emission.

One invocation runs exactly one operation.  All randomness flows from a
single 64-bit root seed that is printed in every output, and the JSON
summary embeds the fully resolved configuration, so rerunning a summary's
config reproduces byte-identical CSV bodies.

Exit codes: 0 success (including statistically unresolved results, which
carry a status field), 2 invalid configuration, 3 resource budget exceeded.
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import dataclass

import numpy as np

from . import distributions as dist
from . import dynamics as dyn
from . import experiments as xp
from .lattice import Box
from .percolation import ArmSpec

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_BUDGET = 3

ARM_SPECS = {
    "open1": ArmSpec(("open",)),
    "closed1": ArmSpec(("closed",)),
    "poly2": ArmSpec(("open", "closed")),
    "mono2": ArmSpec(("open", "open")),
    "alt4": ArmSpec(("open", "closed", "open", "closed")),
    "half-open1": ArmSpec(("open",), halfplane=True),
}


class ConfigError(ValueError):
    pass


class BudgetError(RuntimeError):
    pass


def _parse_grid(text: str) -> list:
    """Numeric grids: comma lists and dyadic ranges.  '2^-3..2^-9' expands
    to powers of two, '8..64' doubles upward; entries may use '2^k'."""

    def one(tok: str) -> float:
        tok = tok.strip()
        if "^" in tok:
            base, _, e = tok.partition("^")
            return float(base) ** float(e)
        return float(tok)

    text = text.strip()
    if ".." in text:
        a, _, b = text.partition("..")
        lo, hi = one(a), one(b)
        out = [lo]
        if lo == 0:
            raise ConfigError("range endpoints must be nonzero")
        ratio = 2.0 if hi > lo else 0.5
        cur = lo
        while (hi > lo and cur < hi) or (hi < lo and cur > hi):
            cur *= ratio
            out.append(cur)
        return out
    return [one(t) for t in text.split(",") if t.strip()]


def _int_grid(text: str) -> list:
    return [int(round(v)) for v in _parse_grid(text)]


@dataclass
class RunConfig:
    """Validated parameters for one subcommand run."""

    subcommand: str
    params: dict
    seed: int
    samples: int
    threads: int
    out: str
    fmt: str
    budget_cells: int

    def to_dict(self) -> dict:
        return {
            "subcommand": self.subcommand,
            "params": self.params,
            "seed": self.seed,
            "samples": self.samples,
            "threads": self.threads,
            "out": self.out,
            "format": self.fmt,
            "budget_cells": self.budget_cells,
        }


# per-subcommand parameter schema: name -> (parser, default); None default = required
_SCHEMAS = {
    "classify": {"f0": (float, 0.5), "ak": (str, None)},
    "crossing": {"p": (float, 0.5), "n": (int, 32)},
    "corrlen": {"p": (float, None), "eps0": (float, 0.05), "nmax": (int, 512)},
    "pn": {"n_grid": (_int_grid, None), "eps0": (float, 0.05)},
    "arm": {"spec": (str, "open1"), "m": (int, 0), "n": (int, 32), "p": (float, 0.5)},
    "arm-exponent": {
        "spec": (str, "open1"),
        "n_grid": (_int_grid, None),
        "p": (float, 0.5),
        "m": (int, 0),
        "target_rel": (float, 0.10),
        "auto": (lambda s: s in ("1", "true", "yes"), False),
    },
    "qm": {"k": (int, 1), "triples": (str, None)},
    "growth": {"dist": (str, None), "exponents": (_int_grid, None)},
    "tail-profile": {
        "dist": (str, None),
        "n": (int, 4),
        "p": (float, 0.6),
        "lam_grid": (_parse_grid, [0.5, 1.0, 2.0, 4.0]),
        "eps": (float, 1.0 / 12.0),
    },
    "count-vn": {"n": (int, 2), "p": (float, 0.6), "lhat": (int, 2)},
    "dyn-scan": {"dist": (str, None), "n": (int, 16), "s": (float, 1.0)},
    "dyn-dim": {
        "dist": (str, None),
        "n": (int, 5),
        "x": (float, 0.0),
        "s": (float, 1.0),
        "eps": (_parse_grid, None),
    },
    "covering-survey": {
        "dist": (str, None),
        "n": (int, 4),
        "x": (float, 0.0),
        "s": (float, 1.0),
        "eps": (_parse_grid, None),
    },
    "interval-count": {"n": (int, 4), "M": (int, 64)},
    "hausdorff-cover": {"L": (int, 4), "n": (int, 2), "x": (float, 0.5)},
    "noise-decay": {"n": (int, 6), "t_grid": (_parse_grid, None)},
}

_DEFAULT_SAMPLES = {
    "crossing": 10000,
    "arm": 10000,
    "arm-exponent": 20000,
    "qm": 4000,
    "growth": 200,
    "tail-profile": 400,
    "count-vn": 100,
    "dyn-dim": 100,
    "covering-survey": 100,
    "interval-count": 200,
    "hausdorff-cover": 400,
    "noise-decay": 2000,
    "pn": 1500,
}


def load_config(subcommand: str, args: argparse.Namespace) -> RunConfig:
    """Merge config-file values and CLI flags (flags win), validate fully."""
    schema = _SCHEMAS[subcommand]
    file_vals = {}
    if args.config:
        try:
            with open(args.config, "r", encoding="utf-8") as fh:
                raw = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read config: {exc}") from exc
        if not isinstance(raw, dict):
            raise ConfigError("config must be a JSON object")
        if "subcommand" in raw and raw["subcommand"] != subcommand:
            raise ConfigError(
                f"config is for subcommand {raw['subcommand']!r}, not {subcommand!r}"
            )
        known_common = {"subcommand", "seed", "samples", "threads", "out", "format", "budget_cells"}
        params_raw = raw.get("params", {k: v for k, v in raw.items() if k not in known_common})
        for key in params_raw:
            if key not in schema:
                raise ConfigError(f"unknown config key {key!r} for {subcommand}")
        file_vals = dict(params_raw)
        for key in raw:
            if key not in known_common and key != "params" and key not in schema:
                raise ConfigError(f"unknown config key {key!r} for {subcommand}")
        for common in ("seed", "samples", "threads", "out", "format", "budget_cells"):
            if common in raw and getattr(args, common if common != "format" else "fmt", None) is None:
                setattr(args, common if common != "format" else "fmt", raw[common])
    params = {}
    for name, (parse, default) in schema.items():
        flag = name.replace("_", "-")
        cli_val = getattr(args, name, None)
        if cli_val is not None:
            params[name] = parse(cli_val) if isinstance(cli_val, str) else cli_val
        elif name in file_vals:
            v = file_vals[name]
            params[name] = parse(v) if isinstance(v, str) else v
        elif default is not None:
            params[name] = default
        else:
            raise ConfigError(f"missing required parameter --{flag}")
    seed = args.seed if args.seed is not None else 1
    samples = args.samples if args.samples is not None else _DEFAULT_SAMPLES.get(subcommand, 1000)
    threads = args.threads if args.threads is not None else 1
    fmt = args.fmt if args.fmt is not None else "json"
    if fmt not in ("csv", "json"):
        raise ConfigError("format must be csv or json")
    if samples < 1 or threads < 1:
        raise ConfigError("samples and threads must be positive")
    budget = args.budget_cells if args.budget_cells is not None else 2**33
    return RunConfig(subcommand, params, int(seed), int(samples), int(threads), args.out, fmt, int(budget))


def _check_budget(cfg: RunConfig, cells_per_sample: int) -> None:
    total = cells_per_sample * cfg.samples
    if total > cfg.budget_cells:
        raise BudgetError(
            f"estimated work {total} cells exceeds budget {cfg.budget_cells}; "
            "raise --budget-cells to proceed"
        )


def _fmt_num(v) -> str:
    if isinstance(v, bool):
        return "1" if v else "0"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if v is None:
        return ""
    if isinstance(v, float):
        return f"{v:.12g}"
    return str(v)


def write_csv(path, header, rows) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(",".join(header) + "\n")
        for row in rows:
            fh.write(",".join(_fmt_num(row.get(h)) for h in header) + "\n")


def csv_body(header, rows) -> str:
    lines = [",".join(header)]
    for row in rows:
        lines.append(",".join(_fmt_num(row.get(h)) for h in header))
    return "\n".join(lines) + "\n"


# -- runners: each returns (header, rows, summary_extras) ---------------------


def _run_classify(cfg: RunConfig):
    seq, k_max = dist.parse_ak_sequence(cfg.params["ak"])
    report = dist.classify_regime(cfg.params["f0"], seq)
    rows = [{"tag": c.tag, "statement": c.statement} for c in report.conclusions]
    return ["tag", "statement"], rows, {"report": report.to_dict(), "k_max": k_max}


def _run_crossing(cfg: RunConfig):
    p, n = cfg.params["p"], cfg.params["n"]
    _check_budget(cfg, (2 * n + 1) ** 2)
    r = xp.crossing_curve(p, n, cfg.samples, cfg.seed)
    rows = [{"p": p, "n": n, "estimate": r.estimate, "stderr": r.stderr, "n_samples": r.n_samples}]
    return ["p", "n", "estimate", "stderr", "n_samples"], rows, {"result": r.to_dict()}


def _run_corrlen(cfg: RunConfig):
    r = xp.correlation_length(
        cfg.params["p"], cfg.params["eps0"], cfg.params["nmax"], cfg.seed
    )
    rows = [{"n": pr["n"], "phat": pr["phat"], "se": pr["se"], "samples": pr["samples"]} for pr in r.probes]
    extras = {"result": r.to_dict(), "status": r.status}
    return ["n", "phat", "se", "samples"], rows, extras


def _run_pn(cfg: RunConfig):
    rows = []
    for n in cfg.params["n_grid"]:
        r = xp.pn_estimate(n, cfg.params["eps0"], cfg.samples, cfg.seed)
        rows.append(
            {
                "n": n,
                "p_hat": r.p_hat,
                "delta": r.p_hat - 0.5,
                "bracket_lo": r.bracket[0],
                "bracket_hi": r.bracket[1],
            }
        )
    extras = {}
    if len(rows) >= 2:
        x = np.log([row["n"] for row in rows])
        y = np.log([row["delta"] for row in rows])
        extras["loglog_slope"] = float(np.polyfit(x, y, 1)[0])
    return ["n", "p_hat", "delta", "bracket_lo", "bracket_hi"], rows, extras


def _arm_spec(cfg: RunConfig) -> ArmSpec:
    name = cfg.params["spec"]
    if name not in ARM_SPECS:
        raise ConfigError(f"unknown arm spec {name!r}; choose from {sorted(ARM_SPECS)}")
    return ARM_SPECS[name]


def _run_arm(cfg: RunConfig):
    spec = _arm_spec(cfg)
    m, n, p = cfg.params["m"], cfg.params["n"], cfg.params["p"]
    _check_budget(cfg, (2 * n + 1) ** 2)
    r = xp.arm_probability(spec, m, n, p, cfg.samples, cfg.seed)
    rows = [{"spec": cfg.params["spec"], "m": m, "n": n, "p": p, "estimate": r.estimate, "stderr": r.stderr}]
    return ["spec", "m", "n", "p", "estimate", "stderr"], rows, {"result": r.to_dict()}


def _run_arm_exponent(cfg: RunConfig):
    spec = _arm_spec(cfg)
    samples = None if cfg.params["auto"] else cfg.samples
    fit = xp.arm_exponent(
        spec,
        cfg.params["n_grid"],
        samples=samples,
        p=cfg.params["p"],
        m=cfg.params["m"],
        seed=cfg.seed,
        target_rel_stderr=cfg.params["target_rel"],
    )
    rows = [
        {"n": pt["n"], "estimate": pt["estimate"], "stderr": pt["stderr"], "samples": pt["samples"]}
        for pt in fit.points
    ]
    return ["n", "estimate", "stderr", "samples"], rows, {"fit": fit.to_dict()}


def _run_qm(cfg: RunConfig):
    triples = []
    for part in cfg.params["triples"].split(","):
        bits = part.split(":")
        if len(bits) != 3:
            raise ConfigError("triples must look like m:r:n,m:r:n,...")
        triples.append(tuple(int(b) for b in bits))
    rows = xp.quasimultiplicativity_check(cfg.params["k"], triples, cfg.samples, seed=cfg.seed)
    hdr = ["m", "r", "n", "pi_full", "pi_inner", "pi_outer", "ratio", "ratio_se"]
    return hdr, rows, {}


def _run_growth(cfg: RunConfig):
    F = dist.parse_distribution(cfg.params["dist"])
    exps = cfg.params["exponents"]
    _check_budget(cfg, (2 ** (max(exps) + 1) + 1) ** 2)
    rows = xp.growth_curve(F, exps, cfg.samples, cfg.seed)
    hdr = ["exponent", "n", "mean_T", "stderr", "samples", "ak_partial_sum", "ratio"]
    return hdr, rows, {"distribution": dist.format_distribution(F)}


def _run_tail_profile(cfg: RunConfig):
    F = dist.parse_distribution(cfg.params["dist"])
    out = xp.tail_profile(
        F, cfg.params["n"], cfg.params["p"], cfg.params["lam_grid"], cfg.samples, cfg.seed, cfg.params["eps"]
    )
    rows = out.pop("rows")
    return ["lambda", "survival", "stderr"], rows, out


def _run_count_vn(cfg: RunConfig):
    out = xp.count_vn_distribution(
        cfg.params["n"], cfg.params["p"], cfg.params["lhat"], cfg.samples, cfg.seed
    )
    rows = [
        {
            "n": out["n"],
            "p": out["p"],
            "Lhat": out["Lhat"],
            "mean": out["mean"],
            "stderr": out["stderr"],
            "q50": out["quantiles"]["q50"],
            "q90": out["quantiles"]["q90"],
            "q99": out["quantiles"]["q99"],
            "max": out["max"],
        }
    ]
    hdr = ["n", "p", "Lhat", "mean", "stderr", "q50", "q90", "q99", "max"]
    return hdr, rows, out


def _run_dyn_scan(cfg: RunConfig):
    F = dist.parse_distribution(cfg.params["dist"])
    n, s = cfg.params["n"], cfg.params["s"]
    _check_budget(cfg, int((2 * n + 1) ** 2 * max(s, 1.0)))
    dfield = dyn.generate(Box(n), s, F, cfg.seed)
    traj = dyn.scan_statistic(dfield, dyn.PassageStat(n), relevant=Box(n))
    rows = [{"t_start": a, "t_end": b, "value": v} for a, b, v in traj.intervals()]
    extras = {
        "breakpoints": len(traj.breakpoints),
        "events": dfield.total_events(),
        "statistic": traj.statistic,
    }
    return ["t_start", "t_end", "value"], rows, extras


def _run_dyn_dim(cfg: RunConfig):
    F = dist.parse_distribution(cfg.params["dist"])
    n, x, s = cfg.params["n"], cfg.params["x"], cfg.params["s"]
    eps_grid = sorted(cfg.params["eps"], reverse=True)
    ring = 2**n
    _check_budget(cfg, int((2 * ring + 1) ** 2 * max(s, 1.0)))
    counts = {e: [] for e in eps_grid}
    measures = []
    from . import rng as _rng

    for i in range(cfg.samples):
        dfield = dyn.generate(Box(ring), s, F, _rng.derive_seed(cfg.seed, 0xD1, i))
        traj = dyn.scan_statistic(dfield, dyn.PassageStat(ring), relevant=Box(ring))
        eset = dyn.exceptional_set(traj, x)
        measures.append(eset.measure())
        for e in eps_grid:
            counts[e].append(dyn.covering_number(eset, e, (0.0, s)))
    rows = []
    for e in eps_grid:
        r = xp.EstimatorResult.from_values(np.asarray(counts[e], dtype=float))
        rows.append({"eps": e, "mean_N": r.estimate, "stderr": r.stderr})
    means = np.asarray([row["mean_N"] for row in rows])
    ok = means > 0
    slope = float("nan")
    if ok.sum() >= 2:
        slope = float(
            np.polyfit(np.log(1.0 / np.asarray(eps_grid)[ok]), np.log(means[ok]), 1)[0]
        )
    extras = {
        "slope": slope,
        "mean_measure": float(np.mean(measures)),
        "ring": ring,
    }
    return ["eps", "mean_N", "stderr"], rows, extras


def _run_covering_survey(cfg: RunConfig):
    F = dist.parse_distribution(cfg.params["dist"])
    out = xp.covering_survey(
        F, cfg.params["n"], cfg.params["x"], cfg.params["s"], cfg.params["eps"], cfg.samples, cfg.seed
    )
    rows = out.pop("rows")
    hdr = ["eps", "mean_N", "stderr", "bound_shape", "fitted_C", "y", "L_hat_tilted", "regime"]
    return hdr, rows, out


def _run_interval_count(cfg: RunConfig):
    out = xp.interval_count_statistic(cfg.params["n"], cfg.params["M"], cfg.samples, cfg.seed)
    rows = out.pop("rows")
    out.pop("counts")
    return ["c", "prob", "stderr", "satisfies_c"], rows, out


def _run_hausdorff_cover(cfg: RunConfig):
    out = xp.hausdorff_cover_survey(
        cfg.params["L"], cfg.params["n"], cfg.params["x"], cfg.samples, cfg.seed
    )
    rows = out.pop("rows")
    hdr = ["k", "q_k", "interval_h", "P_Bk", "stderr", "pi1_annulus", "ratio"]
    return hdr, rows, out


def _run_noise_decay(cfg: RunConfig):
    out = xp.noise_decay(cfg.params["n"], cfg.params["t_grid"], cfg.samples, cfg.seed)
    rows = out.pop("rows")
    return ["t", "p_joint", "stderr", "ratio"], rows, out


_RUNNERS = {
    "classify": _run_classify,
    "crossing": _run_crossing,
    "corrlen": _run_corrlen,
    "pn": _run_pn,
    "arm": _run_arm,
    "arm-exponent": _run_arm_exponent,
    "qm": _run_qm,
    "growth": _run_growth,
    "tail-profile": _run_tail_profile,
    "count-vn": _run_count_vn,
    "dyn-scan": _run_dyn_scan,
    "dyn-dim": _run_dyn_dim,
    "covering-survey": _run_covering_survey,
    "interval-count": _run_interval_count,
    "hausdorff-cover": _run_hausdorff_cover,
    "noise-decay": _run_noise_decay,
}


def run(cfg: RunConfig) -> int:
    """Execute one operation; write CSV and JSON summary; return exit code."""
    header, rows, extras = _RUNNERS[cfg.subcommand](cfg)
    status = extras.pop("status", "ok")
    summary = {
        "operation": cfg.subcommand,
        "params": cfg.params,
        "seed": cfg.seed,
        "n_samples": cfg.samples,
        "status": status,
        "resolved_config": cfg.to_dict(),
    }
    if rows and "estimate" in rows[0]:
        summary["estimate"] = rows[0]["estimate"]
        summary["stderr"] = rows[0].get("stderr")
    summary.update(extras)
    body = csv_body(header, rows)
    if cfg.out:
        with open(cfg.out + ".csv", "w", encoding="utf-8", newline="\n") as fh:
            fh.write(body)
        with open(cfg.out + ".json", "w", encoding="utf-8") as fh:
            json.dump(summary, fh, indent=2, default=_json_default)
            fh.write("\n")
        print(f"seed={cfg.seed} wrote {cfg.out}.csv {cfg.out}.json")
    else:
        if cfg.fmt == "csv":
            sys.stdout.write(body)
            print(f"# seed={cfg.seed}")
        else:
            json.dump(summary, sys.stdout, indent=2, default=_json_default)
            print()
    return EXIT_OK


def _json_default(o):
    if isinstance(o, (np.integer,)):
        return int(o)
    if isinstance(o, (np.floating,)):
        return float(o)
    if isinstance(o, np.ndarray):
        return o.tolist()
    raise TypeError(f"not JSON serializable: {type(o)}")


_DESCRIPTIONS = {
    "classify": "symbolic regime report for (F(0), a_k): growth dichotomy and exceptional-set dimensions",
    "crossing": "left-right p-open crossing probability of B(n)",
    "corrlen": "finite-size correlation length L(p, eps0) by doubling and bisection",
    "pn": "near-critical thresholds p_n over a grid of scales, with the log-log slope",
    "arm": "arm-event probability across Ann(m, n)",
    "arm-exponent": "weighted log-log fit of arm probabilities over a scale grid",
    "qm": "quasimultiplicativity ratios pi(m,n)/(pi(m,r) pi(r,n))",
    "growth": "mean passage time to dyadic rings with the a_k partial-sum comparison",
    "tail-profile": "upper-tail shape of the rectangle crossing time against the near-critical scale",
    "count-vn": "distribution of the contributing-vertex count #V_n(p)",
    "dyn-scan": "one exact trajectory of T_t(0, ring n) exported as (t_start, t_end, value)",
    "dyn-dim": "covering numbers of the exceptional set {t : T_t <= x} with a dimension slope",
    "covering-survey": "expected covering numbers against the binomial reference with a fitted constant",
    "interval-count": "grid-time count of stable zero circuit-plus-connection structures",
    "hausdorff-cover": "multi-scale covering construction: per-level crossing probabilities and running means",
    "noise-decay": "joint zero-crossing probabilities at times 0 and t, with decay diagnostics",
}


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="critfpp",
        description="Static and dynamical critical first-passage percolation experiments "
        "on the triangular site lattice.",
    )
    sub = ap.add_subparsers(dest="subcommand", required=True)
    for name, schema in _SCHEMAS.items():
        p = sub.add_parser(name, description=_DESCRIPTIONS[name])
        for pname in schema:
            p.add_argument(f"--{pname.replace('_', '-')}", dest=pname, default=None)
        p.add_argument("--seed", type=int, default=None)
        p.add_argument("--samples", type=int, default=None)
        p.add_argument("--threads", type=int, default=None)
        p.add_argument("--out", default=None)
        p.add_argument("--format", dest="fmt", choices=["csv", "json"], default=None)
        p.add_argument("--config", default=None)
        p.add_argument("--budget-cells", dest="budget_cells", type=int, default=None)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = load_config(args.subcommand, args)
    except (ConfigError, dist.DistributionError, ValueError) as exc:
        json.dump({"error": "invalid-config", "message": str(exc)}, sys.stderr)
        sys.stderr.write("\n")
        return EXIT_CONFIG
    try:
        return run(cfg)
    except BudgetError as exc:
        json.dump({"error": "budget-exceeded", "message": str(exc)}, sys.stderr)
        sys.stderr.write("\n")
        return EXIT_BUDGET
    except (ConfigError, dist.DistributionError, xp.ExperimentError) as exc:
        json.dump({"error": "invalid-config", "message": str(exc)}, sys.stderr)
        sys.stderr.write("\n")
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
