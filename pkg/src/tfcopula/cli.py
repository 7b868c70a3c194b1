"""``tfcop`` command-line interface.

Exit codes: 0 success, 1 configuration error, 2 validation failure,
3 acceptance failure.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

import numpy as np

from tfcopula import __version__
from tfcopula import dependence as dep
from tfcopula import generators as gen
from tfcopula import transform as tr
from tfcopula.core import Copula, check_copula
from tfcopula.families import FAMILIES, make_family
from tfcopula.sampling import SampleBatch, empirical_marginals, sample

log = logging.getLogger("tfcop")

EXIT_OK, EXIT_CONFIG, EXIT_INVALID, EXIT_ACCEPTANCE = 0, 1, 2, 3
CONFIG_KEYS = {"base", "phi", "psi", "pair", "gate", "n", "seed", "grid", "tolerances", "other", "out", "svg"}
OTHER_KEYS = {"base", "phi", "psi", "pair"}
TOLERANCE_KEYS = {"grid", "quadrature", "tp2", "concordance"}
DEFAULT_TOLERANCES = {"grid": 1e-10, "quadrature": 1e-9, "tp2": 1e-12, "concordance": 1e-12}


class ConfigError(ValueError):
    pass


@dataclass
class JobConfig:
    base: dict
    phi: dict
    psi: dict
    gate: str = tr.THEOREM_GATE
    n: int = 10_000
    seed: int = 1
    grid: int = 200
    tolerances: dict = field(default_factory=lambda: dict(DEFAULT_TOLERANCES))
    other: dict | None = None
    out: str | None = None
    svg: str | None = None

    def echo(self) -> dict:
        d = {"base": self.base, "phi": self.phi, "psi": self.psi, "gate": self.gate, "n": self.n,
             "seed": self.seed, "grid": self.grid, "tolerances": self.tolerances}
        if self.other is not None:
            d["other"] = self.other
        return d


def _check_base(desc: Any) -> dict:
    if not isinstance(desc, dict) or "family" not in desc:
        raise ConfigError("base must be an object with a 'family' key")
    extra = set(desc) - {"family", "params"}
    if extra:
        raise ConfigError(f"unknown base keys: {sorted(extra)}")
    family = desc["family"]
    if family not in FAMILIES:
        raise ConfigError(f"unknown family {family!r}; choose from {sorted(FAMILIES)}")
    params = desc.get("params", {})
    if not isinstance(params, dict):
        raise ConfigError("base params must be an object")
    return {"family": family, "params": params}


def _pair_descriptors(doc: dict, where: str) -> tuple[dict, dict]:
    if "pair" in doc:
        if "phi" in doc or "psi" in doc:
            raise ConfigError(f"{where}: give either 'pair' or 'phi'/'psi', not both")
        key = doc["pair"]
        if key not in gen.PRESET_PAIRS:
            raise ConfigError(f"{where}: unknown preset pair {key!r}; choose from a, b, c, d")
        phi, psi = gen.PRESET_PAIRS[key]
        return dict(phi), dict(psi)
    if "phi" not in doc or "psi" not in doc:
        raise ConfigError(f"{where}: both 'phi' and 'psi' are required")
    for name in ("phi", "psi"):
        if not isinstance(doc[name], dict):
            raise ConfigError(f"{where}: {name} must be a generator descriptor object")
    return dict(doc["phi"]), dict(doc["psi"])


def parse_config(doc: Any) -> JobConfig:
    """Validate a decoded JSON document; raises :class:`ConfigError`."""
    if not isinstance(doc, dict):
        raise ConfigError("configuration must be a JSON object")
    extra = set(doc) - CONFIG_KEYS
    if extra:
        raise ConfigError(f"unknown configuration keys: {sorted(extra)}")
    if "base" not in doc:
        raise ConfigError("configuration needs a 'base' copula")
    base = _check_base(doc["base"])
    phi, psi = _pair_descriptors(doc, "config")
    tol = dict(DEFAULT_TOLERANCES)
    user_tol = doc.get("tolerances", {})
    if not isinstance(user_tol, dict) or set(user_tol) - TOLERANCE_KEYS:
        raise ConfigError(f"tolerances must be an object with keys from {sorted(TOLERANCE_KEYS)}")
    for k, v in user_tol.items():
        if not isinstance(v, (int, float)) or not v > 0:
            raise ConfigError(f"tolerance {k!r} must be a positive number")
        tol[k] = float(v)
    other = None
    if "other" in doc:
        o = doc["other"]
        if not isinstance(o, dict) or set(o) - OTHER_KEYS:
            raise ConfigError(f"'other' must be an object with keys from {sorted(OTHER_KEYS)}")
        ob = _check_base(o["base"]) if "base" in o else base
        if "pair" in o or "phi" in o or "psi" in o:
            ophi, opsi = _pair_descriptors(o, "other")
        else:
            ophi, opsi = phi, psi
        other = {"base": ob, "phi": ophi, "psi": opsi}
    gate = doc.get("gate", tr.THEOREM_GATE)
    if gate not in (tr.THEOREM_GATE, tr.DIRECT_GATE):
        raise ConfigError("gate must be 'theorem' or 'direct'")
    cfg = JobConfig(base, phi, psi, gate, tolerances=tol, other=other,
                    out=doc.get("out"), svg=doc.get("svg"))
    for key in ("n", "seed", "grid"):
        if key in doc:
            v = doc[key]
            if not isinstance(v, int) or isinstance(v, bool) or v < 0:
                raise ConfigError(f"{key} must be a nonnegative integer")
            setattr(cfg, key, v)
    if cfg.grid < 2:
        raise ConfigError("grid must be at least 2")
    if cfg.seed >= 2**64:
        raise ConfigError("seed must fit in 64 bits")
    return cfg


def load_config(path: str | None) -> dict:
    if path is None:
        raise ConfigError("--config is required for this command")
    try:
        with open(path) as fh:
            return json.load(fh)
    except OSError as e:
        raise ConfigError(f"cannot read config: {e}") from e
    except json.JSONDecodeError as e:
        raise ConfigError(f"malformed JSON: {e}") from e


def make_base(desc: dict) -> Copula:
    try:
        return make_family(desc["family"], **desc["params"])
    except (TypeError, ValueError) as e:
        raise ConfigError(f"base copula: {e}") from e


def make_pair(phi: dict, psi: dict) -> gen.GeneratorPair:
    try:
        return gen.GeneratorPair(gen.map_from_descriptor(phi), gen.map_from_descriptor(psi))
    except (TypeError, ValueError) as e:
        raise ConfigError(f"generator: {e}") from e


def build_from(cfg: JobConfig, which: dict | None = None) -> tr.TransformedCopula:
    which = which or {"base": cfg.base, "phi": cfg.phi, "psi": cfg.psi}
    return tr.build(make_base(which["base"]), make_pair(which["phi"], which["psi"]), cfg.gate, cfg.grid)


def _json_default(o):
    if isinstance(o, (np.floating, np.integer)):
        return o.item()
    if isinstance(o, np.bool_):
        return bool(o)
    if isinstance(o, (np.ndarray, tuple)):
        return list(o)
    raise TypeError(f"not serializable: {type(o).__name__}")


def dumps(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=True, default=_json_default, allow_nan=True) + "\n"


def emit(report: dict, out: str | None) -> None:
    text = dumps(report)
    if out:
        Path(out).parent.mkdir(parents=True, exist_ok=True)
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


def _header(cfg: JobConfig, command: str) -> dict:
    return {"command": command, "version": __version__, "config": cfg.echo()}


def render_svg(batch: SampleBatch, size: int = 800) -> str:
    """Static scatter: 1px marks, diagonal points in a distinct colour."""
    lines = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{size}" height="{size}" viewBox="0 0 {size} {size}">',
        f'<rect width="{size}" height="{size}" fill="white"/>',
        f'<rect x="0.5" y="0.5" width="{size - 1}" height="{size - 1}" fill="none" stroke="#888"/>',
    ]
    scale = size - 1
    for (u, v), d in zip(batch.pairs.tolist(), batch.on_diagonal.tolist()):
        colour = "#d62728" if d else "#1f4e9c"
        lines.append(f'<rect x="{u * scale:.2f}" y="{(1.0 - v) * scale:.2f}" width="1" height="1" fill="{colour}"/>')
    lines.append("</svg>")
    return "\n".join(lines) + "\n"


def tail_summary(tf: tr.TransformedCopula) -> dict:
    """Numeric tail coefficients plus closed forms when the hypotheses are detected."""
    import warnings

    with warnings.catch_warnings():
        warnings.simplefilter("ignore", dep.TailConvergenceWarning)
        rep = dep.tail_report(tf)
        closed = {}
        detected = {}
        for side, key in ((dep.UPPER, "lambda_U_numeric"), (dep.LOWER, "lambda_L_numeric")):
            try:
                inputs = dep.estimate_tail_inputs(tf.pair, side)
                detected[side] = {"alpha": inputs.alpha_exp, "a": inputs.a, "b": inputs.b,
                                  "case": inputs.case_tag}
                if tf.phi.f_at_0 != 0.0 and side == dep.LOWER:
                    raise dep.CaseMismatchError("phi(0) > 0")
                base_lam = getattr(dep.lambda_numeric(tf.base, side), key)
                closed[side] = dep.lambda_transformed_closed(base_lam, inputs)
            except (dep.CaseMismatchError, ValueError, FloatingPointError):
                closed[side] = None
    out = rep.to_dict()
    out["lambda_U_closed"] = closed.get(dep.UPPER)
    out["lambda_L_closed"] = closed.get(dep.LOWER)
    out["detected_cases"] = detected
    return out


def singular_summary(tf: tr.TransformedCopula, tol: float) -> dict:
    if tf.phi.f_at_0 != 0.0:
        return {"available": False, "reason": "phi(0) > 0"}
    d = tr.singular_mass(tf, tol)
    support = tr.singular_support_check(tf)
    return {"available": True, **d.to_dict(), "support": support.to_dict()}


def cmd_validate(cfg: JobConfig, args) -> int:
    report = _header(cfg, "validate")
    try:
        tf = build_from(cfg)
    except tr.ValidationError as e:
        report.update(certified=False, failed_condition=e.condition,
                      report=None if e.report is None else e.report.to_dict())
        emit(report, args.out)
        return EXIT_INVALID
    checks = check_copula(tf, cfg.grid, cfg.tolerances["grid"])
    ok = all(r.passed for r in checks.values())
    report.update(certified=ok, certificate=tf.validation.to_dict(),
                  grid_checks={k: r.to_dict() for k, r in checks.items()})
    emit(report, args.out)
    return EXIT_OK if ok else EXIT_INVALID


def _certified(cfg: JobConfig):
    try:
        return build_from(cfg), None
    except tr.ValidationError as e:
        return None, e


def cmd_sample(cfg: JobConfig, args) -> int:
    tf, err = _certified(cfg)
    if tf is None:
        log.error("%s", err)
        return EXIT_INVALID
    out = args.out or cfg.out
    if not out:
        raise ConfigError("sample needs --out for the CSV file")
    batch = sample(tf, cfg.n, cfg.seed)
    batch.to_csv(out)
    svg = args.svg or cfg.svg
    if svg:
        Path(svg).write_text(render_svg(batch))
    summary = {"rows": batch.n, "on_diagonal": int(batch.on_diagonal.sum()),
               "diagonal_fraction": batch.diagonal_fraction, "csv": out, "svg": svg}
    sys.stdout.write(dumps(summary))
    return EXIT_OK


def cmd_measure(cfg: JobConfig, args) -> int:
    tf, err = _certified(cfg)
    if tf is None:
        log.error("%s", err)
        return EXIT_INVALID
    batch = sample(tf, cfg.n, cfg.seed)
    report = _header(cfg, "measure")
    report["certificate"] = tf.validation.to_dict()
    try:
        tau, rho = dep.kendall_tau(batch), dep.spearman_rho(batch)
        report["rank"] = {"tau": tau, "tau_se": dep.kendall_tau_se(batch),
                          "rho": rho, "rho_se": dep.spearman_rho_se(rho, batch.n)}
    except ValueError as e:
        report["rank"] = {"error": str(e)}
    report["diagonal_fraction"] = batch.diagonal_fraction
    if batch.n >= 100:
        ks_u, ks_v = empirical_marginals(batch)
        report["marginals_ks"] = {"u": ks_u, "v": ks_v}
    report["singular"] = singular_summary(tf, cfg.tolerances["quadrature"])
    report["tail"] = tail_summary(tf)
    emit(report, args.out)
    return EXIT_OK


def cmd_singular(cfg: JobConfig, args) -> int:
    tf, err = _certified(cfg)
    if tf is None:
        log.error("%s", err)
        return EXIT_INVALID
    report = _header(cfg, "singular")
    report["singular"] = singular_summary(tf, cfg.tolerances["quadrature"])
    emit(report, args.out)
    return EXIT_OK


def cmd_taildep(cfg: JobConfig, args) -> int:
    tf, err = _certified(cfg)
    if tf is None:
        log.error("%s", err)
        return EXIT_INVALID
    report = _header(cfg, "taildep")
    report["tail"] = tail_summary(tf)
    emit(report, args.out)
    return EXIT_OK


def cmd_tp2(cfg: JobConfig, args) -> int:
    tf, err = _certified(cfg)
    if tf is None:
        log.error("%s", err)
        return EXIT_INVALID
    report = _header(cfg, "tp2")
    report["tp2"] = dep.tp2_check(tf, cfg.grid, cfg.tolerances["tp2"], seed=cfg.seed).to_dict()
    emit(report, args.out)
    return EXIT_OK


def cmd_concordance(cfg: JobConfig, args) -> int:
    if cfg.other is None:
        raise ConfigError("concordance needs an 'other' block describing the second copula")
    tf, err = _certified(cfg)
    other, err2 = _certified_other(cfg)
    if tf is None or other is None:
        log.error("%s", err or err2)
        return EXIT_INVALID
    report = _header(cfg, "concordance")
    report["concordance"] = dep.concordance_compare(tf, other, cfg.grid, cfg.tolerances["concordance"]).to_dict()
    emit(report, args.out)
    return EXIT_OK


def _certified_other(cfg: JobConfig):
    try:
        return build_from(cfg, cfg.other), None
    except tr.ValidationError as e:
        return None, e


def cmd_paper_suite(args) -> int:
    from tfcopula import suite

    seed = 1 if args.seed is None else args.seed
    settings = suite.Settings(seed=seed, quick=args.quick, grid=args.grid or 200)
    t0 = time.perf_counter()
    rows = suite.run(settings)
    log.info("paper-suite finished in %.1f s", time.perf_counter() - t0)
    out = Path(args.out or "paper-suite")
    out.mkdir(parents=True, exist_ok=True)
    for row in rows:
        (out / f"{row['name']}.json").write_text(dumps(row))
    failing = [r["name"] for r in rows if not r["passed"]]
    summary = {"version": __version__, "seed": seed, "quick": args.quick, "rows": len(rows),
               "passed": len(rows) - len(failing), "failing": failing,
               "table": [{"name": r["name"], "passed": r["passed"]} for r in rows]}
    (out / "summary.json").write_text(dumps(summary))
    for r in rows:
        sys.stdout.write(f"{'PASS' if r['passed'] else 'FAIL'}  {r['name']}\n")
    if failing:
        sys.stderr.write("failing rows: " + ", ".join(failing) + "\n")
        return EXIT_ACCEPTANCE
    return EXIT_OK


COMMANDS = {
    "validate": cmd_validate,
    "sample": cmd_sample,
    "measure": cmd_measure,
    "singular": cmd_singular,
    "taildep": cmd_taildep,
    "tp2": cmd_tp2,
    "concordance": cmd_concordance,
}


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="tfcop", description="Transformed copulas: validation, sampling, dependence.")
    p.add_argument("command", choices=[*COMMANDS, "paper-suite"])
    p.add_argument("--config", help="JSON job configuration")
    p.add_argument("--seed", type=int, help="64-bit RNG seed (overrides config)")
    p.add_argument("--n", type=int, help="sample size (overrides config)")
    p.add_argument("--grid", type=int, help="grid size for checks (overrides config)")
    p.add_argument("--out", help="output path (report JSON, CSV, or suite directory)")
    p.add_argument("--svg", help="scatter plot output for 'sample'")
    p.add_argument("--quick", action="store_true", help="smaller samples and wider tolerances")
    p.add_argument("-v", "--verbose", action="store_true")
    return p


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(name)s: %(message)s", stream=sys.stderr)
    threads = os.environ.get("TFCOP_THREADS")
    if threads is not None and (not threads.isdigit() or int(threads) < 1):
        sys.stderr.write("TFCOP_THREADS must be a positive integer\n")
        return EXIT_CONFIG
    t0 = time.perf_counter()
    try:
        if args.command == "paper-suite":
            return cmd_paper_suite(args)
        cfg = parse_config(load_config(args.config))
        for key in ("seed", "n", "grid"):
            val = getattr(args, key)
            if val is not None:
                if val < 0 or (key == "grid" and val < 2):
                    raise ConfigError(f"--{key} out of range")
                setattr(cfg, key, val)
        if args.quick:
            cfg.n = min(cfg.n, 2_000)
            cfg.grid = min(cfg.grid, 50)
        code = COMMANDS[args.command](cfg, args)
    except ConfigError as e:
        sys.stderr.write(f"config error: {e}\n")
        return EXIT_CONFIG
    log.info("%s finished in %.2f s", args.command, time.perf_counter() - t0)
    return code


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
