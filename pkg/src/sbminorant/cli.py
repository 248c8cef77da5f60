"""Command-line front end.

Exit codes: 0 success, 1 a validation check failed, 2 bad configuration
(including refused heavy-tail requests), 3 IO error, 4 unknown identity,
5 enumeration too large.
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import io
import json
import math
import sys
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from . import identities as ids
from . import sb_engine as sb
from .errors import HeavyTail, InputError, SBError, TooLarge, UnknownIdentity, UnknownTail, UnsupportedModel
from .levy_models import Stable, model_to_dict, parse_model
from .mc_stats import TestReport, estimate_from_samples, independence_corr, poisson_dispersion
from .rng import RngStream
from .rw_3214 import enumerate_minorant_distribution, enumerate_sb_distribution, total_variation

__all__ = ["main", "build_parser", "IDENTITIES", "mean_measure_count"]

EXIT_OK, EXIT_FAIL, EXIT_CONFIG, EXIT_IO, EXIT_IDENTITY, EXIT_TOO_LARGE = 0, 1, 2, 3, 4, 5
CHUNK = 4096  # draws per RNG stream; fixed so output is independent of --workers
Z_MAX = 3.0

IDENTITIES = (
    "spitzer-time",
    "spitzer-sup",
    "laplace-sup",
    "wh-product",
    "rogozin",
    "vertex-laplace",
    "sup-infinity",
)


class ConfigError(Exception):
    pass


# ---------------------------------------------------------------------------
# configuration


def _complex(text):
    return complex(str(text).replace("i", "j"))


def _floats(text):
    return [float(s) for s in str(text).replace(",", " ").split()]


def _merge_config(args, keys):
    cfg = {}
    if getattr(args, "config", None):
        try:
            with open(args.config) as fh:
                cfg = json.load(fh)
        except OSError:
            raise
        except json.JSONDecodeError as exc:
            raise ConfigError(f"config file is not valid JSON: {exc}") from exc
        if not isinstance(cfg, dict):
            raise ConfigError("config file must hold a JSON object")
        unknown = set(cfg) - set(keys)
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
    for k in keys:
        v = getattr(args, k, None)
        if v is not None:
            cfg[k] = v
    return cfg


def _model(cfg):
    spec = cfg.get("model", "bm")
    return parse_model(json.dumps(spec) if isinstance(spec, dict) else spec)


def _config_hash(cfg, model):
    canon = {k: v for k, v in cfg.items() if k not in ("output", "config")}
    canon["model"] = model_to_dict(model)
    blob = json.dumps(canon, sort_keys=True, default=str).encode()
    return hashlib.sha256(blob).hexdigest()


def _require_seed(cfg):
    if cfg.get("seed") is None:
        raise ConfigError("--seed is required for sampling commands")
    seed = int(cfg["seed"])
    if not 0 <= seed < 2**64:
        raise ConfigError("seed must be a 64-bit unsigned integer")
    return seed


def _count(cfg, key, default):
    n = int(cfg.get(key, default))
    if n < 1:
        raise ConfigError(f"{key} must be at least 1")
    return n


def _horizon(cfg):
    T, theta = cfg.get("T"), cfg.get("theta")
    if T is not None and theta is not None:
        raise ConfigError("give either --T or --theta, not both")
    if theta is not None:
        if not float(theta) > 0:
            raise ConfigError("theta must be positive")
        return None, float(theta)
    T = 1.0 if T is None else float(T)
    if not T > 0:
        raise ConfigError("T must be positive")
    return T, None


def _header(fh, command, digest, seed, workers):
    fh.write(f"# sbminorant {command} config_sha256={digest} seed={seed} workers={workers}\n")


def _open_out(path):
    if path in (None, "-"):
        return sys.stdout, False
    return open(path, "w", newline=""), True


def _chunks(n):
    return [(c, min(CHUNK, n - c * CHUNK)) for c in range((n + CHUNK - 1) // CHUNK)]


def _map_chunks(fn, n, workers):
    jobs = _chunks(n)
    if workers <= 1:
        return [fn(c, m) for c, m in jobs]
    with ThreadPoolExecutor(max_workers=workers) as ex:
        return list(ex.map(lambda job: fn(*job), jobs))


# ---------------------------------------------------------------------------
# sample / minorant / vertex

SAMPLE_KEYS = ("model", "T", "theta", "n", "n_sticks", "seed", "output", "format", "workers", "stats")


def _sample_chunk(model, T, theta, n_sticks, seed):
    def run(c, m):
        gen = RngStream(seed, c).generator()
        if theta is None:
            final, sup, arg = sb.sample_triplets_batch(model, T, m, n_sticks, gen)
            hor = np.full(m, T)
        else:
            hor, lengths, heights = sb.sample_exp_horizon_faces_batch(model, theta, m, gen, n_max=n_sticks)
            final, sup, arg = sb.triplets_from_faces(lengths, heights, hor)
        return hor, final, sup, arg

    return run


def cmd_sample(args):
    cfg = _merge_config(args, SAMPLE_KEYS)
    model = _model(cfg)
    seed = _require_seed(cfg)
    T, theta = _horizon(cfg)
    n = _count(cfg, "n", 1000)
    n_sticks = _count(cfg, "n_sticks", sb.DEFAULT_N_STICKS)
    workers = _count(cfg, "workers", 1)
    fmt = cfg.get("format", "csv")
    if fmt not in ("csv", "json"):
        raise ConfigError("format must be csv or json")
    if cfg.get("stats") and isinstance(model, Stable) and model.alpha <= 1:
        raise HeavyTail(f"alpha={model.alpha}: the supremum has no finite mean, refusing --stats")
    digest = _config_hash(cfg, model)
    parts = _map_chunks(_sample_chunk(model, T, theta, n_sticks, seed), n, workers)
    hor, final, sup, arg = (np.concatenate([p[i] for p in parts]) for i in range(4))
    out, close = _open_out(cfg.get("output"))
    try:
        if fmt == "csv":
            _header(out, "sample", digest, seed, workers)
            w = csv.writer(out, lineterminator="\n")
            cols = ["sample_id", "final", "sup", "argmax"] + (["horizon"] if theta is not None else [])
            w.writerow(cols)
            for i in range(n):
                row = [i, repr(float(final[i])), repr(float(sup[i])), repr(float(arg[i]))]
                if theta is not None:
                    row.append(repr(float(hor[i])))
                w.writerow(row)
        else:
            rows = [
                {"sample_id": i, "final": float(final[i]), "sup": float(sup[i]), "argmax": float(arg[i]), "horizon": float(hor[i])}
                for i in range(n)
            ]
            json.dump({"config_sha256": digest, "seed": seed, "workers": workers, "samples": rows}, out)
            out.write("\n")
        if cfg.get("stats"):
            summary = {k: _est_dict(estimate_from_samples(v)) for k, v in (("final", final), ("sup", sup), ("argmax", arg))}
            sys.stderr.write(json.dumps(summary) + "\n")
    finally:
        if close:
            out.close()
    return EXIT_OK


def _est_dict(e):
    return {"mean": e.mean, "stderr": e.stderr, "n": e.n}


def cmd_minorant(args):
    cfg = _merge_config(args, SAMPLE_KEYS)
    model = _model(cfg)
    seed = _require_seed(cfg)
    T, theta = _horizon(cfg)
    n = _count(cfg, "n", 10)
    n_sticks = _count(cfg, "n_sticks", sb.DEFAULT_N_STICKS)
    workers = _count(cfg, "workers", 1)
    digest = _config_hash(cfg, model)

    def one(i):
        rs = RngStream(seed, i)
        if theta is None:
            return T, sb.sample_minorant(model, T, n_sticks, rs)
        return sb.sample_minorant_exp_horizon(model, theta, None, rs, n_max=n_sticks)

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as ex:
            samples = list(ex.map(one, range(n)))
    else:
        samples = [one(i) for i in range(n)]
    out, close = _open_out(cfg.get("output"))
    try:
        _header(out, "minorant", digest, seed, workers)
        w = csv.writer(out, lineterminator="\n")
        w.writerow(["sample_id", "horizon", "length", "height"])
        for i, (hor, s) in enumerate(samples):
            for f in s.minorant.faces:
                w.writerow([i, repr(float(hor)), repr(float(f.length)), repr(float(f.height))])
    finally:
        if close:
            out.close()
    return EXIT_OK


VERTEX_KEYS = ("model", "theta", "slopes", "n", "n_sticks", "seed", "output", "workers")


def cmd_vertex(args):
    cfg = _merge_config(args, VERTEX_KEYS)
    model = _model(cfg)
    seed = _require_seed(cfg)
    theta = float(cfg.get("theta", 1.0))
    if not theta > 0:
        raise ConfigError("theta must be positive")
    slopes = cfg.get("slopes", [0.0])
    slopes = _floats(slopes) if isinstance(slopes, str) else [float(s) for s in slopes]
    n = _count(cfg, "n", 1000)
    n_sticks = _count(cfg, "n_sticks", sb.DEFAULT_N_STICKS)
    workers = _count(cfg, "workers", 1)
    digest = _config_hash(cfg, model)

    def run(c, m):
        T, lengths, heights = sb.sample_exp_horizon_faces_batch(
            model, theta, m, RngStream(seed, c).generator(), n_max=n_sticks
        )
        return sb.vertex_process_batch(lengths, heights, slopes)

    parts = _map_chunks(run, n, workers)
    sigma = np.concatenate([p[0] for p in parts])
    eta = np.concatenate([p[1] for p in parts])
    out, close = _open_out(cfg.get("output"))
    try:
        _header(out, "vertex", digest, seed, workers)
        w = csv.writer(out, lineterminator="\n")
        w.writerow(["sample_id", "slope", "sigma", "eta", "infimum"])
        for i in range(n):
            for j, s in enumerate(slopes):
                sg, et = float(sigma[i, j]), float(eta[i, j])
                w.writerow([i, repr(s), repr(sg), repr(et), repr(et - s * sg)])
    finally:
        if close:
            out.close()
    return EXIT_OK


# ---------------------------------------------------------------------------
# validate

VALIDATE_KEYS = ("model", "t", "theta", "u", "v", "s", "n", "seed", "workers")


def _mc_triplets(model, T, n, seed):
    final, sup, arg = [], [], []
    for c, m in _chunks(n):
        f, s, a = sb.sample_triplets_batch(model, T, m, sb.DEFAULT_N_STICKS, RngStream(seed, c).generator())
        final.append(f), sup.append(s), arg.append(a)
    return np.concatenate(final), np.concatenate(sup), np.concatenate(arg)


def _mc_exp_faces(model, theta, n, seed):
    for c, m in _chunks(n):
        yield sb.sample_exp_horizon_faces_batch(model, theta, m, RngStream(seed, c).generator())


def _row(identity, params, quad, mc=None, residual=None, tol=None, extra=None):
    row = {"identity": identity, "params": params, "quadrature": quad}
    if mc is not None:
        z = mc.z(quad) if isinstance(quad, float) else float("nan")
        row.update({"mc": mc.mean, "se": mc.stderr, "n": mc.n, "z": z, "pass": bool(abs(z) <= Z_MAX)})
    if residual is not None:
        row.update({"residual": residual, "tol": tol, "pass": bool(residual < tol)})
    if extra:
        row.update(extra)
    row.setdefault("pass", True)
    return row


def _validate(identity, cfg):
    model = _model(cfg)
    n = _count(cfg, "n", 100_000)
    seed = int(cfg.get("seed", 0))
    t = float(cfg.get("t", 1.0))
    theta = float(cfg.get("theta", 1.0))
    u = _complex(cfg.get("u", 1.0))
    ur = u.real
    q = ids.QuadratureSpec(seed=seed)
    if identity == "spitzer-time":
        quad = ids.spitzer_time(model, t, q)
        _, _, arg = _mc_triplets(model, t, n, seed)
        return _row(identity, {"t": t}, float(quad), estimate_from_samples(arg))
    if identity == "spitzer-sup":
        quad = ids.spitzer_sup(model, t, q)
        _, sup, _ = _mc_triplets(model, t, n, seed)
        return _row(identity, {"t": t}, float(quad), estimate_from_samples(sup))
    if identity == "laplace-sup":
        quad = ids.laplace_sup_exp_horizon(model, theta, ur, q)
        vals = [np.exp(-ur * np.maximum(h, 0.0).sum(axis=1)) for _, _, h in _mc_exp_faces(model, theta, n, seed)]
        return _row(identity, {"theta": theta, "u": ur}, float(quad), estimate_from_samples(np.concatenate(vals)))
    if identity == "wh-product":
        v = _complex(cfg.get("v", 0.7j))
        analytic = ids._has(model, "restricted_mgf", 1.0, 0.0, "pos")
        res = ids.wh_product_check(model, theta, u, v, q)
        return _row(identity, {"theta": theta, "u": str(u), "v": str(v)}, None, residual=res, tol=1e-6 if analytic else 1e-3)
    if identity == "rogozin":
        rep = ids.rogozin_regularity(model, [1e-2, 1e-4, 1e-6], q)
        extra = {"epsilons": list(rep.epsilons), "partial_integrals": list(rep.partial_integrals), "verdict": rep.verdict, "reason": rep.reason}
        return _row(identity, {}, rep.partial_integrals[-1], extra=extra)
    if identity == "vertex-laplace":
        s = float(cfg.get("s", 0.0))
        quad = ids.vertex_sigma_laplace(model, theta, s, ur, q)
        vals = []
        for _, lengths, heights in _mc_exp_faces(model, theta, n, seed):
            sigma, _ = sb.vertex_process_batch(lengths, heights, [s])
            vals.append(np.exp(-ur * sigma[:, 0]))
        return _row(identity, {"theta": theta, "s": s, "u": ur}, float(quad), estimate_from_samples(np.concatenate(vals)))
    if identity == "sup-infinity":
        res = ids.laplace_sup_infinite_horizon(model, ur, q)
        extra = {"classification": res.classification, "evidence": {k: {str(T): v for T, v in d.items()} for k, d in res.evidence.items()}}
        return _row(identity, {"u": ur}, res.value, extra=extra)
    raise UnknownIdentity(identity)


def _print_table(row, out):
    keys = [k for k in ("identity", "params", "quadrature", "mc", "se", "z", "residual", "verdict", "classification", "pass") if k in row]
    width = max(len(k) for k in keys)
    for k in keys:
        v = row[k]
        if isinstance(v, float):
            v = f"{v:.8g}"
        elif isinstance(v, dict):
            v = ", ".join(f"{a}={b}" for a, b in v.items())
        out.write(f"{k:<{width}}  {v}\n")


def cmd_validate(args):
    if args.identity not in IDENTITIES:
        raise UnknownIdentity(f"unknown identity {args.identity!r}; choose from {', '.join(IDENTITIES)}")
    cfg = _merge_config(args, VALIDATE_KEYS)
    row = _validate(args.identity, cfg)
    out = sys.stdout
    if args.csv:
        flat = {k: (json.dumps(v) if isinstance(v, (dict, list)) else v) for k, v in row.items()}
        w = csv.DictWriter(out, fieldnames=list(flat), lineterminator="\n")
        w.writeheader()
        w.writerow(flat)
    elif args.table:
        _print_table(row, out)
    else:
        json.dump(row, out, default=str)
        out.write("\n")
    return EXIT_OK if row["pass"] else EXIT_FAIL


# ---------------------------------------------------------------------------
# rw-demo


def _fmt_faces(key):
    return "{" + ", ".join(f"({ln},{h})" for ln, h in key) + "}"


def cmd_rw_demo(args):
    from fractions import Fraction

    xs = [Fraction(s) for s in args.increments]
    T = Fraction(args.T)
    if len(xs) > 6:
        raise TooLarge(f"rw-demo enumerates at most 6 increments, got {len(xs)}")
    sbd = enumerate_sb_distribution(xs, T)
    mind = enumerate_minorant_distribution(xs, T)
    keys = sorted(set(sbd) | set(mind), key=lambda k: (len(k), [float(a) for f in k for a in f]))
    out = sys.stdout
    out.write(f"{'faces':<40} {'stick-breaking':>16} {'minorant':>16}\n")
    for k in keys:
        out.write(f"{_fmt_faces(k):<40} {str(sbd.get(k, 0)):>16} {str(mind.get(k, 0)):>16}\n")
    tv = total_variation(sbd, mind)
    out.write(f"total variation: {tv}\n")
    return EXIT_OK if tv <= Fraction(1, 10**12) else EXIT_FAIL


# ---------------------------------------------------------------------------
# ppp-check

PPP_KEYS = ("model", "theta", "window", "window2", "n", "seed", "positive", "workers")


def mean_measure_count(model, theta, a, b, positive=False, q=None):
    """Expected number of faces with length in ``[a, b]`` (and height > 0 if ``positive``)."""
    q = q or ids.QuadratureSpec()

    def f(y):
        t = math.exp(y)
        w = math.exp(-theta * t)
        return w * model.prob_positive(t) if positive else w

    return ids._quad_real(f, math.log(a), math.log(b), q)[0]


def _window(v, default):
    if v is None:
        return default
    w = _floats(v) if isinstance(v, str) else [float(x) for x in v]
    if len(w) != 2 or not 0 < w[0] < w[1]:
        raise ConfigError("a window is two increasing positive numbers")
    return tuple(w)


def ppp_counts(model, theta, n, seed, w1, w2, positive):
    c1, c2 = [], []
    for _, lengths, heights in _mc_exp_faces(model, theta, n, seed):
        keep = heights > 0 if positive else np.ones_like(heights, dtype=bool)
        c1.append(((lengths >= w1[0]) & (lengths <= w1[1]) & keep).sum(axis=1))
        c2.append(((lengths >= w2[0]) & (lengths < w2[1]) & keep).sum(axis=1))
    return np.concatenate(c1), np.concatenate(c2)


def cmd_ppp_check(args):
    cfg = _merge_config(args, PPP_KEYS)
    model = _model(cfg)
    seed = _require_seed(cfg)
    theta = float(cfg.get("theta", 1.0))
    n = _count(cfg, "n", 100_000)
    w1 = _window(cfg.get("window"), (0.5, 1.0))
    w2 = _window(cfg.get("window2"), (0.1, 0.5))
    if not (w2[1] <= w1[0] or w1[1] <= w2[0]):
        raise ConfigError("the two windows must be disjoint")
    positive = bool(cfg.get("positive", False))
    c1, c2 = ppp_counts(model, theta, n, seed, w1, w2, positive)
    target = mean_measure_count(model, theta, *w1, positive=positive)
    est = estimate_from_samples(c1)
    index, zd = poisson_dispersion(c1)
    r, zc = independence_corr(np.column_stack([c1, c2]))
    reports = [
        TestReport("mean-count", est.z(target), None, n, seed, "pass" if abs(est.z(target)) <= Z_MAX else "fail"),
        TestReport("dispersion", zd, None, n, seed, "pass" if abs(zd) <= Z_MAX else "fail"),
        TestReport("disjoint-correlation", zc, None, n, seed, "pass" if abs(zc) <= Z_MAX else "fail"),
    ]
    for rep in reports:
        sys.stdout.write(rep.to_json() + "\n")
    sys.stdout.write(json.dumps({"expected": target, "mean": est.mean, "se": est.stderr, "dispersion_index": index, "corr": r}) + "\n")
    return EXIT_OK if all(r.verdict == "pass" for r in reports) else EXIT_FAIL


# ---------------------------------------------------------------------------
# parser


def _sampling_args(p, exp_only=False):
    p.add_argument("--config", help="JSON file whose keys mirror the flags")
    p.add_argument("--model", help="preset name or model JSON")
    if not exp_only:
        p.add_argument("--T", type=float, help="fixed horizon")
    p.add_argument("--theta", type=float, help="rate of an exponential horizon")
    p.add_argument("--n", type=int, help="number of samples")
    p.add_argument("--n-sticks", dest="n_sticks", type=int, help="sticks before the residual face")
    p.add_argument("--seed", type=int, help="64-bit seed (required)")
    p.add_argument("--workers", type=int, help="worker threads (recorded in the header)")
    p.add_argument("--output", "-o", help="output path, '-' for stdout")


def build_parser():
    ap = argparse.ArgumentParser(prog="sbminorant", description="Stick-breaking samplers and fluctuation identities")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("sample", help="extremal triplets as CSV")
    _sampling_args(p)
    p.add_argument("--format", choices=("csv", "json"))
    p.add_argument("--stats", action="store_true", default=None, help="also print means with standard errors")
    p.set_defaults(func=cmd_sample)

    p = sub.add_parser("minorant", help="convex minorant faces as CSV")
    _sampling_args(p)
    p.set_defaults(func=cmd_minorant)

    p = sub.add_parser("vertex", help="vertex process on an exponential horizon")
    _sampling_args(p, exp_only=True)
    p.add_argument("--slopes", help="comma separated, strictly increasing")
    p.set_defaults(func=cmd_vertex)

    p = sub.add_parser("validate", help="quadrature against Monte Carlo for one identity")
    p.add_argument("identity", help=", ".join(IDENTITIES))
    p.add_argument("--config")
    p.add_argument("--model")
    p.add_argument("--t", type=float)
    p.add_argument("--theta", type=float)
    p.add_argument("--u")
    p.add_argument("--v")
    p.add_argument("--s", type=float)
    p.add_argument("--n", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--workers", type=int)
    fmt = p.add_mutually_exclusive_group()
    fmt.add_argument("--json", action="store_true", help="JSON report (the default)")
    fmt.add_argument("--csv", action="store_true")
    fmt.add_argument("--table", action="store_true", help="aligned key/value table")
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("rw-demo", help="exact random-walk laws side by side")
    p.add_argument("increments", nargs="+")
    p.add_argument("--T", default="1")
    p.set_defaults(func=cmd_rw_demo)

    p = sub.add_parser("ppp-check", help="Poisson structure of exponential-horizon faces")
    p.add_argument("--config")
    p.add_argument("--model")
    p.add_argument("--theta", type=float)
    p.add_argument("--window", help="'a,b' length window")
    p.add_argument("--window2", help="disjoint second window")
    p.add_argument("--positive", action="store_true", default=None, help="count only faces with positive height")
    p.add_argument("--n", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--workers", type=int)
    p.set_defaults(func=cmd_ppp_check)
    return ap


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except UnknownIdentity as exc:
        sys.stderr.write(f"error: {exc}\n")
        return EXIT_IDENTITY
    except TooLarge as exc:
        sys.stderr.write(f"error: {exc}\n")
        return EXIT_TOO_LARGE
    except (ConfigError, InputError, UnknownTail, UnsupportedModel, ValueError) as exc:
        sys.stderr.write(f"error: {exc}\n")
        return EXIT_CONFIG
    except OSError as exc:
        sys.stderr.write(f"io error: {exc}\n")
        return EXIT_IO
    except SBError as exc:
        sys.stderr.write(f"error: {exc}\n")
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
