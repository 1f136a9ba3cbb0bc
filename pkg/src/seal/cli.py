"""``seal`` command line.

Exit status: 0 on success, 2 on invalid arguments or config, 3 on I/O
failures (missing, unreadable or corrupted files).
"""
from __future__ import annotations

import argparse
import json
import math
import os
import sys
from pathlib import Path

import numpy as np

from . import noisefield as nf
from .channel import DEFAULT_TAU, ChannelConfig, invert
from .detection import (
    DEFAULT_MATCH_COUNT,
    default_match_threshold,
    detection_probability,
    log_binomial_upper_tail,
    match_map,
    rho,
)
from .harness import EXPERIMENTS, ExperimentConfig, report_json, run_experiment
from .metrics import roc_auc
from .semantic import DEFAULT_DIM, ProviderSpec, embed_text, load_vector
from .simhash import DEFAULT_BITS, salt_from_hex
from .tamper import DEFAULT_MAX_CLUSTERS, heatmap, spatial_test, tamper_score

EXIT_OK = 0
EXIT_INVALID = 2
EXIT_IO = 3

ATTACK_EXPERIMENTS = {"cat": "cat", "forgery": "forgery", "steg": "steg", "erase": "erase"}


class InputError(Exception):
    """A file could not be read or parsed."""


def _layout(text: str) -> nf.Layout:
    try:
        parts = [int(x) for x in text.split(",")]
    except ValueError:
        raise argparse.ArgumentTypeError("layout is c,h,w,patch_rows,patch_cols") from None
    if len(parts) != 5:
        raise argparse.ArgumentTypeError("layout is c,h,w,patch_rows,patch_cols")
    try:
        return nf.Layout(*parts)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def _salt(args) -> bytes:
    text = args.salt_hex or os.environ.get("SEAL_SALT_HEX")
    if not text:
        raise ValueError("no salt: pass --salt-hex or set SEAL_SALT_HEX")
    return salt_from_hex(text)


def _vector(args) -> np.ndarray:
    if args.vector:
        try:
            return load_vector(args.vector, args.dim)
        except (OSError, json.JSONDecodeError) as exc:
            raise InputError(f"cannot read vector {args.vector}: {exc}") from None
    if args.text:
        spec = ProviderSpec("mock", args.mock_salt.encode("utf-8"), args.dim)
        return embed_text(args.text, spec)
    raise ValueError("pass --vector FILE or --text TEXT")


def _load_field(path) -> nf.NoiseField:
    try:
        return nf.load(path)
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc}") from None
    except nf.NoiseFieldFormatError as exc:
        raise InputError(f"{path}: {exc}") from None


def cmd_gen(args) -> int:
    salt = _salt(args)
    v = _vector(args)
    field = nf.generate_watermarked_noise(v, salt, args.layout, args.b)
    try:
        nf.save(field, args.out)
    except OSError as exc:
        raise InputError(f"cannot write {args.out}: {exc}") from None
    print(json.dumps({"out": args.out, "n": args.layout.n, "p": args.layout.p,
                      "b": args.b, "checksum": nf.checksum(field)}, sort_keys=True))
    return EXIT_OK


def _threshold(args, n: int) -> int:
    if args.theta_mid is not None:
        return default_match_threshold(n, args.b, args.theta_mid)
    return args.match_threshold


def cmd_detect(args) -> int:
    salt = _salt(args)
    v = _vector(args)
    field = _load_field(args.inverted)
    if args.sigma > 0:
        seed = bytes.fromhex(args.channel_seed) if args.channel_seed else bytes(32)
        field = invert(field, ChannelConfig(args.sigma, seed))
    m_match = _threshold(args, field.layout.n)
    mm = match_map(v, field, salt, args.b, args.tau)
    doc = {
        "match_count": mm.match_count,
        "m_match": m_match,
        "watermarked": mm.match_count >= m_match,
        "n": field.layout.n,
        "tau": args.tau,
    }
    if args.map:
        doc["match_map"] = mm.to_dict()
    print(json.dumps(doc, indent=2, sort_keys=True))
    return EXIT_OK


def cmd_inspect(args) -> int:
    salt = _salt(args)
    field = _load_field(args.inverted)
    h = heatmap(field, salt, args.b)
    report = spatial_test(h, args.max_clusters)
    if args.json:
        doc = {"heatmap": h.to_dict(), "report": report.to_dict(),
               "tamper_score": tamper_score(h)}
        print(json.dumps(doc, indent=2, sort_keys=True))
    else:
        print(h.render())
        print(json.dumps({**report.to_dict(), "tamper_score": tamper_score(h)}, sort_keys=True))
    return EXIT_OK


def cmd_prob(args) -> int:
    if not 0 <= args.theta <= 180 or not 0 <= args.theta_mid <= 180:
        raise ValueError("angles must lie in [0, 180]")
    if args.n < 1 or args.b < 1:
        raise ValueError("n and b must be positive")
    m = default_match_threshold(args.n, args.b, args.theta_mid)
    p = detection_probability(args.theta, args.theta_mid, args.n, args.b)
    if args.json:
        log_p = log_binomial_upper_tail(args.n, m, rho(args.theta, args.b))
        print(json.dumps({"theta": args.theta, "theta_mid": args.theta_mid, "n": args.n,
                          "b": args.b, "m_match": m, "rho": rho(args.theta, args.b),
                          "probability": p,
                          "log10_probability": log_p / math.log(10) if log_p > -math.inf else None},
                         sort_keys=True))
    else:
        print(repr(p))
    return EXIT_OK


def cmd_simulate(args) -> int:
    if args.config:
        try:
            doc = json.loads(Path(args.config).read_text(encoding="utf-8"))
        except (OSError, json.JSONDecodeError) as exc:
            raise InputError(f"cannot read config {args.config}: {exc}") from None
        config = ExperimentConfig.from_dict(doc)
    else:
        names = []
        if args.attack:
            names.append(ATTACK_EXPERIMENTS[args.attack])
        names.extend(args.experiment or [])
        if not names:
            raise ValueError("pass --attack, --experiment or --config")
        kwargs = {"experiments": tuple(names), "trials": args.trials}
        if args.seed:
            kwargs["rng_seed"] = bytes.fromhex(args.seed)
        salt_text = args.salt_hex or os.environ.get("SEAL_SALT_HEX")
        if salt_text:
            kwargs["salt"] = salt_from_hex(salt_text)
        config = ExperimentConfig(**kwargs)
    report = run_experiment(config)
    out = args.out or config.report_path
    text = report_json(report)
    if out:
        try:
            Path(out).write_text(text + "\n", encoding="utf-8")
        except OSError as exc:
            raise InputError(f"cannot write {out}: {exc}") from None
    else:
        print(text)
    return EXIT_OK


def _read_scores(path) -> np.ndarray:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc}") from None
    text = text.strip()
    try:
        values = json.loads(text) if text.startswith("[") else [float(x) for x in text.split()]
    except (ValueError, json.JSONDecodeError) as exc:
        raise InputError(f"{path}: not a list of numbers ({exc})") from None
    return np.asarray(values, dtype=np.float64)


def cmd_roc(args) -> int:
    auc = roc_auc(_read_scores(args.positive), _read_scores(args.negative))
    print(json.dumps({"auc": auc}))
    return EXIT_OK


def _add_key_args(p, need_vector: bool = True):
    p.add_argument("--salt-hex", help="64 hex characters; defaults to $SEAL_SALT_HEX")
    p.add_argument("--b", type=int, default=DEFAULT_BITS, help="bits per patch")
    if need_vector:
        src = p.add_mutually_exclusive_group()
        src.add_argument("--vector", help='semantic vector JSON {"dim": d, "values": [...]}')
        src.add_argument("--text", help="caption embedded with the mock provider")
        p.add_argument("--mock-salt", default="seal-mock-embedder")
        p.add_argument("--dim", type=int, default=DEFAULT_DIM)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="seal", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen", help="write a watermarked initial-noise field")
    _add_key_args(p)
    p.add_argument("--layout", type=_layout, default=nf.Layout(),
                   help="c,h,w,patch_rows,patch_cols (default 4,64,64,32,32)")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_gen)

    p = sub.add_parser("detect", help="count matching patches in an inverted field")
    _add_key_args(p)
    p.add_argument("--inverted", required=True, help=".nf field")
    p.add_argument("--tau", type=float, default=DEFAULT_TAU)
    thr = p.add_mutually_exclusive_group()
    thr.add_argument("--match-threshold", type=int, default=DEFAULT_MATCH_COUNT)
    thr.add_argument("--theta-mid", type=float, help="use floor(n * rho(theta_mid)) instead")
    p.add_argument("--sigma", type=float, default=0.0,
                   help="push the field through the simulated channel first")
    p.add_argument("--channel-seed", help="64 hex characters")
    p.add_argument("--map", action="store_true", help="include per-patch distances")
    p.set_defaults(func=cmd_detect)

    p = sub.add_parser("inspect", help="tamper heatmap and spatial test")
    _add_key_args(p, need_vector=False)
    p.add_argument("--inverted", required=True)
    p.add_argument("--max-clusters", type=int, default=DEFAULT_MAX_CLUSTERS)
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_inspect)

    p = sub.add_parser("prob", help="exact detection probability")
    p.add_argument("--theta", type=float, required=True)
    p.add_argument("--theta-mid", type=float, default=55.0)
    p.add_argument("--n", type=int, default=1024)
    p.add_argument("--b", type=int, default=DEFAULT_BITS)
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_prob)

    p = sub.add_parser("simulate", help="run Monte-Carlo experiments, print a JSON report")
    p.add_argument("--attack", choices=sorted(ATTACK_EXPERIMENTS))
    p.add_argument("--experiment", action="append", choices=EXPERIMENTS)
    p.add_argument("--trials", type=int, default=200)
    p.add_argument("--seed", help="64 hex characters")
    p.add_argument("--salt-hex")
    p.add_argument("--config", help="experiment config JSON")
    p.add_argument("--out")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("roc", help="ROC-AUC of two score lists")
    p.add_argument("--positive", required=True)
    p.add_argument("--negative", required=True)
    p.set_defaults(func=cmd_roc)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except InputError as exc:
        print(f"seal: {exc}", file=sys.stderr)
        return EXIT_IO
    except ValueError as exc:
        print(f"seal: {exc}", file=sys.stderr)
        return EXIT_INVALID


if __name__ == "__main__":
    sys.exit(main())
