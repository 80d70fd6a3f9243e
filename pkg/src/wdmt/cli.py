"""Command-line front end.

Subcommands: ``curve`` (analytic corner points plus a dense sampling),
``simulate`` (Monte Carlo outage table), ``fit`` (slope fit and verdict
against the analytic curve), and ``validate`` (gain distribution checks).
Exit codes: 0 success, 2 invalid input, 3 statistical failure.

Flags may also be supplied through a ``key = value`` config file
(``--config PATH``); command-line flags override file entries. Weights
accept decimals or exact fractions such as ``3/5``.
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .core import (
    AntennaProfile,
    DmtError,
    Scenario,
    Weights,
    validate_weights,
)
from .dmt_analytic import curve_for_scenario
from .channel_sim import (
    OutageEstimate,
    outage_probability,
    validate_gain_distribution,
)
from .exponent_fit import compare, fit_slope

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_STAT_FAIL = 3

CSV_COLUMNS = (
    "scenario,K,M,weights,r,rho_db,n_samples,n_outages,p_hat,ci_low,ci_high,seed,shards"
)

CURVE_RESOLUTION = 0.01
DEFAULT_MEAN_TOL = 0.01
DEFAULT_VAR_TOL = 0.03


class CliError(DmtError):
    """Invalid command-line or config-file input."""


def _fmt(x: float) -> str:
    """Serialize a float with 17 significant digits (lossless round trip)."""
    return format(float(x), ".17g")


def _parse_fraction(token: str) -> Fraction:
    token = token.strip()
    try:
        if "/" in token:
            num, den = token.split("/")
            return Fraction(int(num), int(den))
        return Fraction(token)
    except (ValueError, ZeroDivisionError) as exc:
        raise CliError(f"cannot parse number {token!r}") from exc


def parse_weights(text: str) -> Weights:
    """Comma-separated weights, decimals or fractions, exactly normalized.

    Fractions are kept exact through normalization, so e.g. ``3/5,2/5``
    yields float weights whose sum is exactly 1.
    """
    parts = [_parse_fraction(tok) for tok in text.split(",") if tok.strip()]
    if not parts:
        raise CliError("empty weight list")
    total = sum(parts)
    if abs(total - 1) > Fraction(1, 10**9):
        raise CliError(f"weights sum to {float(total)}, expected 1 within 1e-9")
    return validate_weights([float(p / total) for p in parts])


def parse_profile(text: str) -> AntennaProfile:
    try:
        counts = tuple(int(tok) for tok in text.split(",") if tok.strip())
    except ValueError as exc:
        raise CliError(f"cannot parse profile {text!r}") from exc
    if not counts:
        raise CliError("empty antenna profile")
    try:
        return AntennaProfile(counts)
    except ValueError as exc:
        raise CliError(str(exc)) from exc


def parse_r_list(text: str) -> tuple[float, ...]:
    try:
        values = tuple(float(_parse_fraction(tok)) for tok in text.split(",") if tok.strip())
    except CliError:
        raise
    if not values:
        raise CliError("empty multiplexing-gain list")
    return values


def parse_snr_grid(text: str) -> tuple[float, ...]:
    """SNR grid in dB: a single value or ``start:stop:step`` with step > 0."""
    parts = text.split(":")
    try:
        if len(parts) == 1:
            return (float(parts[0]),)
        if len(parts) != 3:
            raise ValueError
        start, stop, step = (float(p) for p in parts)
    except ValueError as exc:
        raise CliError(f"SNR grid must be 'start:stop:step', got {text!r}") from exc
    if step <= 0:
        raise CliError(f"SNR step must be > 0, got {step}")
    if stop < start:
        raise CliError(f"SNR stop {stop} below start {start}")
    grid = []
    i = 0
    while True:
        value = start + i * step
        if value > stop + 1e-9:
            break
        grid.append(value)
        i += 1
    return tuple(grid)


def parse_window(text: str) -> tuple[float, float]:
    parts = text.split(":")
    if len(parts) != 2:
        raise CliError(f"window must be 'low:high' in dB, got {text!r}")
    try:
        low, high = float(parts[0]), float(parts[1])
    except ValueError as exc:
        raise CliError(f"cannot parse window {text!r}") from exc
    return low, high


@dataclass(frozen=True)
class RunConfig:
    """Validated bundle of everything one command run needs."""

    kind: str | None = None
    k: int | None = None
    m: int | None = None
    n_t: int | None = None
    profile: AntennaProfile | None = None
    weights: Weights | None = None
    r_list: tuple[float, ...] = ()
    snr_db: tuple[float, ...] = ()
    samples: int = 100_000
    seed: int = 0
    shards: int = 1
    out: str | None = None
    format: str = "csv"

    def scenario(self) -> Scenario:
        if self.kind is None:
            raise CliError("missing --scenario")
        if self.weights is None:
            raise CliError("missing --weights")
        return Scenario(
            kind=self.kind,
            weights=self.weights,
            n_t=self.n_t,
            profile=self.profile,
            m=self.m,
        )


def _read_config_file(path: str) -> dict[str, str]:
    entries: dict[str, str] = {}
    try:
        with open(path, encoding="utf-8") as fh:
            for lineno, raw in enumerate(fh, start=1):
                line = raw.split("#", 1)[0].strip()
                if not line:
                    continue
                if "=" not in line:
                    raise CliError(f"{path}:{lineno}: expected 'key = value'")
                key, value = line.split("=", 1)
                entries[key.strip().replace("-", "_")] = value.strip()
    except OSError as exc:
        raise CliError(f"cannot read config file {path}: {exc}") from exc
    return entries


def _merged(args: argparse.Namespace, key: str) -> str | None:
    """Command-line value if given, else config-file value, else None."""
    value = getattr(args, key, None)
    if value is not None:
        return value
    return getattr(args, "_config", {}).get(key)


def _to_int(value: str, name: str) -> int:
    try:
        return int(value)
    except ValueError as exc:
        raise CliError(f"--{name} expects an integer, got {value!r}") from exc


def build_config(args: argparse.Namespace) -> RunConfig:
    kind = _merged(args, "scenario")
    weights_text = _merged(args, "weights")
    profile_text = _merged(args, "profile")
    ints = {}
    for name in ("k", "m", "nt", "samples", "seed", "shards"):
        raw = _merged(args, name)
        ints[name] = None if raw is None else _to_int(raw, name)
    weights = parse_weights(weights_text) if weights_text is not None else None
    profile = parse_profile(profile_text) if profile_text is not None else None
    if weights is not None and ints["k"] is not None and len(weights) != ints["k"]:
        raise CliError(f"--k {ints['k']} but {len(weights)} weights given")
    r_text = _merged(args, "r")
    snr_text = _merged(args, "snr_db")
    return RunConfig(
        kind=kind,
        k=ints["k"] if ints["k"] is not None else (len(weights) if weights else None),
        m=ints["m"],
        n_t=ints["nt"],
        profile=profile,
        weights=weights,
        r_list=parse_r_list(r_text) if r_text is not None else (),
        snr_db=parse_snr_grid(snr_text) if snr_text is not None else (),
        samples=ints["samples"] if ints["samples"] is not None else 100_000,
        seed=ints["seed"] if ints["seed"] is not None else 0,
        shards=ints["shards"] if ints["shards"] is not None else 1,
        out=_merged(args, "out"),
        format=(_merged(args, "format") or "csv"),
    )


def _write_output(text: str, out: str | None) -> None:
    if out is None:
        sys.stdout.write(text)
    else:
        with open(out, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)


def _scenario_m_column(cfg: RunConfig) -> str:
    if cfg.kind in ("bc-zf", "bc-dpc"):
        return str(cfg.m)
    if cfg.kind == "parallel-identical":
        return str(cfg.n_t)
    return ";".join(str(n) for n in cfg.profile.n)


def cmd_curve(args: argparse.Namespace) -> int:
    cfg = build_config(args)
    scenario = cfg.scenario()
    curve = curve_for_scenario(scenario)
    k = scenario.k
    steps = round(k / CURVE_RESOLUTION)
    dense = [(i * k / steps, curve.evaluate(i * k / steps)) for i in range(steps + 1)]

    if cfg.format == "json":
        payload = {
            "scenario": scenario.kind,
            "K": k,
            "M": _scenario_m_column(cfg),
            "weights": list(scenario.weights.mu),
            "corners": [[r, d] for r, d in curve.corners],
            "dense": [[r, d] for r, d in dense],
        }
        text = json.dumps(payload, indent=2) + "\n"
    elif cfg.format == "csv":
        lines = ["section,r,d"]
        lines += [f"corner,{_fmt(r)},{_fmt(d)}" for r, d in curve.corners]
        lines += [f"dense,{_fmt(r)},{_fmt(d)}" for r, d in dense]
        text = "\n".join(lines) + "\n"
    else:
        raise CliError(f"unknown format {cfg.format!r}")

    _write_output(text, cfg.out)
    summary = " ".join(f"({r:g},{d:g})" for r, d in curve.corners)
    stream = sys.stdout if cfg.out else sys.stderr
    stream.write(f"corners: {summary}\n")
    return EXIT_OK


def cmd_simulate(args: argparse.Namespace) -> int:
    cfg = build_config(args)
    scenario = cfg.scenario()
    if not cfg.r_list:
        raise CliError("missing --r")
    if not cfg.snr_db:
        raise CliError("missing --snr-db")
    rows = []
    for i_r, r in enumerate(cfg.r_list):
        for i_db, db in enumerate(cfg.snr_db):
            est = outage_probability(
                scenario,
                r=r,
                rho=10.0 ** (db / 10.0),
                n_samples=cfg.samples,
                seed=np.random.SeedSequence((cfg.seed, i_r, i_db)),
                shards=cfg.shards,
            )
            rows.append((r, db, est))

    m_col = _scenario_m_column(cfg)
    w_col = ";".join(_fmt(w) for w in scenario.weights.mu)
    if cfg.format == "json":
        payload = [
            {
                "scenario": scenario.kind,
                "K": scenario.k,
                "M": m_col,
                "weights": w_col,
                "r": r,
                "rho_db": db,
                "n_samples": est.n_samples,
                "n_outages": est.n_outages,
                "p_hat": est.p_hat,
                "ci_low": est.ci_low,
                "ci_high": est.ci_high,
                "seed": cfg.seed,
                "shards": cfg.shards,
            }
            for r, db, est in rows
        ]
        text = json.dumps(payload, indent=2) + "\n"
    elif cfg.format == "csv":
        lines = [CSV_COLUMNS]
        for r, db, est in rows:
            lines.append(
                ",".join(
                    (
                        scenario.kind,
                        str(scenario.k),
                        m_col,
                        w_col,
                        _fmt(r),
                        _fmt(db),
                        str(est.n_samples),
                        str(est.n_outages),
                        _fmt(est.p_hat),
                        _fmt(est.ci_low),
                        _fmt(est.ci_high),
                        str(cfg.seed),
                        str(cfg.shards),
                    )
                )
            )
        text = "\n".join(lines) + "\n"
    else:
        raise CliError(f"unknown format {cfg.format!r}")
    _write_output(text, cfg.out)
    return EXIT_OK


def _scenario_from_row(row: dict[str, str]) -> Scenario:
    kind = row["scenario"]
    weights = validate_weights([float(w) for w in row["weights"].split(";")])
    if kind in ("bc-zf", "bc-dpc"):
        return Scenario(kind=kind, weights=weights, m=int(row["M"]))
    if kind == "parallel-identical":
        return Scenario(kind=kind, weights=weights, n_t=int(row["M"]))
    profile = AntennaProfile(tuple(int(n) for n in row["M"].split(";")))
    return Scenario(kind=kind, weights=weights, profile=profile)


def _read_table(path: str) -> list[dict[str, str]]:
    try:
        with open(path, encoding="utf-8") as fh:
            content = fh.read()
    except OSError as exc:
        raise CliError(f"cannot read {path}: {exc}") from exc
    stripped = content.strip()
    if not stripped:
        raise CliError(f"{path} is empty")
    if stripped.startswith("["):  # json table
        rows = json.loads(stripped)
        return [{k: str(v) for k, v in row.items()} for row in rows]
    lines = stripped.splitlines()
    header = lines[0].split(",")
    if header != CSV_COLUMNS.split(","):
        raise CliError(f"{path}: unexpected columns {lines[0]!r}")
    rows = []
    for line in lines[1:]:
        fields = line.split(",")
        if len(fields) != len(header):
            raise CliError(f"{path}: malformed row {line!r}")
        rows.append(dict(zip(header, fields)))
    return rows


def cmd_fit(args: argparse.Namespace) -> int:
    rows = _read_table(args.input)
    required = set(CSV_COLUMNS.split(","))
    if not rows or not required.issubset(rows[0].keys()):
        raise CliError(f"{args.input}: missing required columns")
    window = parse_window(args.window)
    tol = float(args.tol)
    scenario = _scenario_from_row(rows[0])
    curve = curve_for_scenario(scenario)

    by_r: dict[float, list[OutageEstimate]] = {}
    for row in rows:
        est = OutageEstimate(
            rho=10.0 ** (float(row["rho_db"]) / 10.0),
            r=float(row["r"]),
            n_samples=int(row["n_samples"]),
            n_outages=int(row["n_outages"]),
            ci_low=float(row["ci_low"]),
            ci_high=float(row["ci_high"]),
        )
        by_r.setdefault(float(row["r"]), []).append(est)

    all_passed = True
    for r in sorted(by_r):
        try:
            fit = fit_slope(by_r[r], window)
        except DmtError as exc:
            print(f"r={r:g}: FAIL ({exc})")
            all_passed = False
            continue
        report = compare(fit, curve, r, tol=tol)
        verdict = "pass" if report.passed else "FAIL"
        dropped = f" dropped={len(fit.dropped)}" if fit.dropped else ""
        print(
            f"r={r:g}: d_hat={fit.d_hat:.4f} stderr={fit.stderr:.4f} "
            f"d_analytic={report.d_analytic:.4f} rel_err={report.rel_error:.2%} "
            f"points={fit.points_used}{dropped} verdict={verdict}"
        )
        all_passed &= report.passed
    return EXIT_OK if all_passed else EXIT_STAT_FAIL


def cmd_validate(args: argparse.Namespace) -> int:
    cfg = build_config(args)
    scenario = cfg.scenario()
    mean_tol = float(args.mean_tol)
    var_tol = float(args.var_tol)
    all_passed = True
    for index in range(scenario.k):
        report = validate_gain_distribution(
            scenario,
            index,
            n_samples=cfg.samples,
            seed=np.random.SeedSequence((cfg.seed, index)),
        )
        ok = report.mean_rel_err <= mean_tol and report.var_rel_err <= var_tol
        all_passed &= ok
        print(
            f"gain[{index}] ~ Gamma({report.shape},1): mean={report.mean:.4f} "
            f"(err {report.mean_rel_err:.2%}) var={report.variance:.4f} "
            f"(err {report.var_rel_err:.2%}) ks={report.ks_stat:.5f} "
            f"{'pass' if ok else 'FAIL'}"
        )
    return EXIT_OK if all_passed else EXIT_STAT_FAIL


def _add_scenario_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--scenario", choices=list(("parallel-identical", "parallel-different", "bc-zf", "bc-dpc")))
    parser.add_argument("--k", help="number of channels / users")
    parser.add_argument("--m", help="transmit antennas (broadcast kinds)")
    parser.add_argument("--nt", help="antennas per channel (parallel-identical)")
    parser.add_argument("--profile", help="comma-separated antenna counts")
    parser.add_argument("--weights", help="comma-separated weights, decimals or fractions")
    parser.add_argument("--config", help="key = value file; flags override")


def _add_output_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--out", help="output path (stdout if omitted)")
    parser.add_argument("--format", choices=["csv", "json"])


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="wdmt",
        description="Diversity-multiplexing tradeoff curves and outage simulation "
        "for weighted parallel and broadcast fading channels.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_curve = sub.add_parser("curve", help="emit analytic DMT corner points and a dense sampling")
    _add_scenario_flags(p_curve)
    _add_output_flags(p_curve)
    p_curve.set_defaults(func=cmd_curve)

    p_sim = sub.add_parser("simulate", help="Monte Carlo outage probability table")
    _add_scenario_flags(p_sim)
    _add_output_flags(p_sim)
    p_sim.add_argument("--r", help="comma-separated multiplexing gains")
    p_sim.add_argument("--snr-db", dest="snr_db", help="SNR grid start:stop:step in dB")
    p_sim.add_argument("--samples", help="Monte Carlo samples per (r, SNR) point")
    p_sim.add_argument("--seed", help="base random seed")
    p_sim.add_argument("--shards", help="independent substreams per point")
    p_sim.set_defaults(func=cmd_simulate)

    p_fit = sub.add_parser("fit", help="fit diversity slopes from a simulate table")
    p_fit.add_argument("--input", required=True, help="table written by simulate")
    p_fit.add_argument("--window", required=True, help="fit window low:high in dB")
    p_fit.add_argument("--tol", default="0.15", help="relative tolerance on d (default 0.15)")
    p_fit.set_defaults(func=cmd_fit)

    p_val = sub.add_parser("validate", help="check effective gain distributions")
    _add_scenario_flags(p_val)
    p_val.add_argument("--samples", help="draws per gain index")
    p_val.add_argument("--seed", help="base random seed")
    p_val.add_argument("--mean-tol", dest="mean_tol", default="0.01")
    p_val.add_argument("--var-tol", dest="var_tol", default="0.03")
    p_val.set_defaults(func=cmd_validate)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        if getattr(args, "config", None):
            args._config = _read_config_file(args.config)
        else:
            args._config = {}
        return args.func(args)
    except DmtError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
