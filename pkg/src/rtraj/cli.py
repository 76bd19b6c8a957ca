"""Command-line entry point: ``rtraj <subcommand> ...``.

Exit codes: 0 success, 2 invalid input, 3 numerical failure, 4 unreadable file.
"""

from __future__ import annotations

import argparse
import sys
from concurrent.futures import ThreadPoolExecutor

import numpy as np
from sklearn.metrics import adjusted_rand_score

from . import __version__
from .coding import decode, fit_codebook, shooting_set
from .elastic import (compute_tsrvf, default_reference, rate_invariant_distance, trajectory_mean,
                      tsrvf_distance)
from .errors import NumericalError, ParseError, RtrajError, ValidationError
from .experiments import (PIPELINES, LabeledDataset, eigen_decay, evaluate_classification,
                          evaluate_regression, kmedoids_cluster, perturb_trajectory, rate_varied_suite,
                          reference_stability, sampling_study, synth_dataset, unwarped_distance)
from .geometry import parse_manifold
from .io import (load_model, read_codes, read_dataset, read_point, save_model, write_codes, write_csv,
                 write_dataset, write_json, write_mean_result)

EXIT_OK, EXIT_VALIDATION, EXIT_NUMERICAL, EXIT_PARSE = 0, 2, 3, 4


def _floats(text):
    try:
        return [float(x) for x in text.split(",") if x.strip()]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from exc


def _names(text):
    return [x.strip() for x in text.split(",") if x.strip()]


def _pmap(fn, items, threads):
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            return list(pool.map(fn, items))
    return [fn(x) for x in items]


def _print(msg):
    print(msg, file=sys.stdout)


# --------------------------------------------------------------------------
# subcommands
# --------------------------------------------------------------------------

def cmd_synth(a):
    M = parse_manifold(a.manifold)
    if a.suite == "rate-varied":
        ds = rate_varied_suite(M, a.classes, a.per_class, a.samples, seed=a.seed, warp_strength=a.warp,
                               noise=a.noise)
    else:
        ds = synth_dataset(M, a.classes, a.per_class, a.samples, warp_strength=a.warp, noise=a.noise,
                           seed=a.seed)
    write_dataset(ds, a.out)
    _print(f"wrote {len(ds)} trajectories on {M} (T={ds.T}) to {a.out}")


def cmd_dist(a):
    ds = read_dataset(a.input)
    trajs = ds.trajectories
    N = len(trajs)
    c = default_reference(ds.manifold, trajs)
    if a.metric == "ds":
        def fn(ij):
            return rate_invariant_distance(trajs[ij[0]], trajs[ij[1]], c)
    elif a.metric == "tsrvf":
        hs = [compute_tsrvf(t, c) for t in trajs]

        def fn(ij):
            return tsrvf_distance(hs[ij[0]], hs[ij[1]])
    else:
        def fn(ij):
            return unwarped_distance(trajs[ij[0]], trajs[ij[1]])
    pairs = [(i, j) for i in range(N) for j in range(i + 1, N)]
    D = np.zeros((N, N))
    for (i, j), v in zip(pairs, _pmap(fn, pairs, a.threads)):
        D[i, j] = D[j, i] = v
    write_csv(D.tolist(), a.out)
    _print(f"wrote {N}x{N} {a.metric} distances to {a.out}")


def cmd_align(a):
    ds = read_dataset(a.input)
    c = None
    if a.ref != "default":
        M, c = read_point(a.ref)
        if M != ds.manifold:
            raise ValidationError(f"reference lives on {M}, data on {ds.manifold}")
    res = trajectory_mean(ds.trajectories, c=c, tol=a.tol, max_iter=a.max_iter, threads=a.threads)
    write_mean_result(res, a.out)
    _print(f"mean after {res.iterations} iterations, registration error {res.error_trace[-1]:.6g}, "
           f"converged={res.converged}")


def cmd_encode(a):
    ds = read_dataset(a.input)
    S = shooting_set(ds.trajectories, tol=a.tol, max_iter=a.max_iter, threads=a.threads)
    labels = ds.labels if a.method == "lcksvd" else None
    s = a.sparsity if a.method != "pca" else None
    cb, codes = fit_codebook(S, a.method, d=a.dim, s=s, labels=labels, seed=a.seed, max_iter=a.max_iter)
    cb.provenance.update({"seed": a.seed, "mean_tol": a.tol, "mean_max_iter": a.max_iter})
    save_model(cb, codes, a.model)
    write_codes(codes, a.codes, labels=ds.labels, method=a.method)
    _print(f"{a.method} codebook d={cb.d} over D={cb.D}; codes for {codes.shape[1]} trajectories")


def cmd_decode(a):
    cb, _ = load_model(a.model)
    codes, labels = read_codes(a.codes)
    if codes.shape[0] != cb.d:
        raise ValidationError(f"codes have length {codes.shape[0]}, model expects {cb.d}")
    trajs = [decode(cb, codes[:, i]) for i in range(codes.shape[1])]
    labels = list(range(len(trajs))) if labels is None else labels
    write_dataset(LabeledDataset(trajs, labels, {"decoded_from": cb.method}), a.out)
    _print(f"decoded {len(trajs)} trajectories to {a.out}")


def cmd_classify(a):
    ds = read_dataset(a.input)
    r = evaluate_classification(ds, a.pipeline, splits=a.splits, seed=a.seed, classifier=a.classifier,
                                d=a.dim, s=a.sparsity, d_frame=a.frame_dim)
    out = r.to_dict()
    out["params"] = {"pipeline": a.pipeline, "splits": a.splits, "seed": a.seed, "dim": a.dim,
                     "sparsity": a.sparsity, "frame_dim": a.frame_dim}
    write_json(out, a.report)
    _print(f"{r.method} ({r.classifier}): accuracy {r.accuracy:.4f} +/- {r.accuracy_std:.4f}, "
           f"dimension {r.dimension}")


def cmd_regress(a):
    ds = read_dataset(a.input)
    out = evaluate_regression(ds, a.pipeline, splits=a.splits, seed=a.seed, d=a.dim)
    out["params"] = {"pipeline": a.pipeline, "splits": a.splits, "seed": a.seed, "dim": a.dim}
    write_json(out, a.report)
    _print(f"{a.pipeline}: correlation {out['correlation']:.4f}")


def cmd_cluster(a):
    codes, labels = read_codes(a.codes)
    r = kmedoids_cluster(codes.T, a.k, seed=a.seed)
    out = {"k": a.k, "seed": a.seed, "assignments": r.assignments, "medoids": r.medoids,
           "cost": r.cost, "cost_trace": r.cost_trace}
    if labels is not None:
        out["adjusted_rand"] = float(adjusted_rand_score([str(x) for x in labels], r.assignments))
    write_json(out, a.report)
    _print(f"k-medoids k={a.k}: cost {r.cost:.6g}")


def cmd_eigendecay(a):
    ds = read_dataset(a.input)
    S = shooting_set(ds.trajectories, tol=a.tol, max_iter=a.max_iter, threads=a.threads)
    e = eigen_decay(S)
    write_csv([[i + 1, v, c] for i, (v, c) in enumerate(zip(e.eigenvalues, e.cumulative))], a.out,
              header=["index", "eigenvalue", "cumulative"])
    _print(f"knee at {e.knee}; 90% of variance in {e.n90} eigenvalues")


def cmd_perturb(a):
    ds = read_dataset(a.input)
    rng = np.random.default_rng(a.seed)
    noisy = ds.replace([perturb_trajectory(tr, a.kmax, seed=rng) for tr in ds.trajectories])
    noisy.metadata["perturbation"] = {"kmax": a.kmax, "seed": a.seed}
    write_dataset(noisy, a.out)
    _print(f"perturbed {len(ds)} trajectories with k_max={a.kmax}")


def cmd_stability(a):
    ds = read_dataset(a.input)
    trajs = ds.trajectories
    if a.bad_ref:
        r = reference_stability(trajs, iters=a.iters, factor=a.factor, seed=a.seed, repeats=a.repeats,
                                tol=a.tol)
        good, bad = r["good"]["error_trace"], r["bad_mean_trace"]
    else:
        good = trajectory_mean(trajs, tol=a.tol, max_iter=a.iters, threads=a.threads).error_trace
        bad = None
    n = max(len(good), len(bad) if bad else 0)
    rows = []
    for i in range(n):
        row = [i, good[min(i, len(good) - 1)]]
        if bad:
            row.append(bad[min(i, len(bad) - 1)])
        rows.append(row)
    write_csv(rows, a.out, header=["iteration", "default"] + (["adversarial"] if bad else []))
    msg = f"default reference: final error {good[-1]:.6g}"
    if bad:
        msg += f"; adversarial: {bad[-1]:.6g} (ratio {bad[-1] / good[-1] if good[-1] > 0 else np.inf:.3g})"
    _print(msg)


def cmd_sampling(a):
    ds = read_dataset(a.input)
    res = sampling_study(ds, factors=tuple(a.factors), pipelines=tuple(a.pipelines), mode=a.mode,
                         splits=a.splits, seed=a.seed, d=a.dim)
    out = {"mode": a.mode, "seed": a.seed, "splits": a.splits,
           "factors": {repr(float(f)): {p: r.to_dict() for p, r in per.items()} for f, per in res.items()},
           "spread": {p: float(max(per[p].accuracy for per in res.values())
                               - min(per[p].accuracy for per in res.values())) for p in a.pipelines}}
    write_json(out, a.report)
    for p in a.pipelines:
        accs = ", ".join(f"{f}: {res[f][p].accuracy:.3f}" for f in res)
        _print(f"{p}: {accs} (spread {out['spread'][p]:.3f})")


# --------------------------------------------------------------------------
# parser
# --------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=0, help="seed for every random choice (default 0)")
    common.add_argument("--threads", type=int, default=1, help="worker threads (default 1)")

    p = argparse.ArgumentParser(prog="rtraj", description="Rate-invariant analysis of manifold-valued trajectories")
    p.add_argument("--version", action="version", version=f"rtraj {__version__}")
    sub = p.add_subparsers(dest="command", required=True)

    def add(name, fn, help_):
        sp = sub.add_parser(name, parents=[common], help=help_)
        sp.set_defaults(func=fn)
        return sp

    def mean_opts(sp, max_iter=50):
        sp.add_argument("--tol", type=float, default=1e-6)
        sp.add_argument("--max-iter", type=int, default=max_iter)

    sp = add("synth", cmd_synth, "generate a labelled synthetic dataset")
    sp.add_argument("--manifold", required=True, help="se3:n | spd:d | grassmann:k,m | euclidean:n")
    sp.add_argument("--classes", type=int, default=3)
    sp.add_argument("--per-class", type=int, default=5)
    sp.add_argument("--samples", type=int, default=50)
    sp.add_argument("--warp", type=float, default=0.5)
    sp.add_argument("--noise", type=float, default=0.05)
    sp.add_argument("--suite", choices=["smooth", "rate-varied"], default="smooth")
    sp.add_argument("--out", required=True)

    sp = add("dist", cmd_dist, "pairwise distance matrix")
    sp.add_argument("--in", dest="input", required=True)
    sp.add_argument("--metric", choices=["ds", "tsrvf", "unwarped"], default="ds")
    sp.add_argument("--out", required=True)

    sp = add("align", cmd_align, "elastic mean; warps every trajectory to it")
    sp.add_argument("--in", dest="input", required=True)
    sp.add_argument("--ref", default="default", help="'default' or a point file")
    mean_opts(sp)
    sp.add_argument("--out", required=True)

    sp = add("encode", cmd_encode, "learn a codebook and code the dataset")
    sp.add_argument("--in", dest="input", required=True)
    sp.add_argument("--method", choices=["pca", "ksvd", "lcksvd"], default="pca")
    sp.add_argument("--dim", type=int, default=10)
    sp.add_argument("--sparsity", type=int, default=3)
    mean_opts(sp)
    sp.add_argument("--model", required=True)
    sp.add_argument("--codes", required=True)

    sp = add("decode", cmd_decode, "reconstruct trajectories from codes")
    sp.add_argument("--model", required=True)
    sp.add_argument("--codes", required=True)
    sp.add_argument("--out", required=True)

    sp = add("classify", cmd_classify, "split-averaged classification accuracy")
    sp.add_argument("--in", dest="input", required=True)
    sp.add_argument("--pipeline", choices=list(PIPELINES), default="tsrvf-nn")
    sp.add_argument("--classifier", choices=["nn", "svm"], default=None)
    sp.add_argument("--dim", type=int, default=10)
    sp.add_argument("--sparsity", type=int, default=3)
    sp.add_argument("--frame-dim", type=int, default=2, help="per-frame dimension for pga")
    sp.add_argument("--splits", type=int, default=5)
    sp.add_argument("--report", required=True)

    sp = add("regress", cmd_regress, "linear regression of scalar targets on codes")
    sp.add_argument("--in", dest="input", required=True)
    sp.add_argument("--pipeline", choices=["rfpca", "tsrvf-svm", "unwarped"], default="rfpca")
    sp.add_argument("--dim", type=int, default=10)
    sp.add_argument("--splits", type=int, default=5)
    sp.add_argument("--report", required=True)

    sp = add("cluster", cmd_cluster, "k-medoids on code vectors")
    sp.add_argument("--codes", required=True)
    sp.add_argument("--k", type=int, required=True)
    sp.add_argument("--report", required=True)

    sp = add("eigendecay", cmd_eigendecay, "spectrum of the shooting vectors")
    sp.add_argument("--in", dest="input", required=True)
    mean_opts(sp)
    sp.add_argument("--out", required=True)

    sp = add("perturb", cmd_perturb, "sensor-style random geodesic noise")
    sp.add_argument("--in", dest="input", required=True)
    sp.add_argument("--kmax", type=float, required=True)
    sp.add_argument("--out", required=True)

    sp = add("stability", cmd_stability, "registration-error traces under default/adversarial references")
    sp.add_argument("--in", dest="input", required=True)
    sp.add_argument("--bad-ref", action="store_true", help="also run adversarial references")
    sp.add_argument("--iters", type=int, default=80)
    sp.add_argument("--factor", type=float, default=5.0)
    sp.add_argument("--repeats", type=int, default=10)
    sp.add_argument("--tol", type=float, default=1e-6)
    sp.add_argument("--out", required=True)

    sp = add("sampling", cmd_sampling, "accuracy under re-recorded test sets")
    sp.add_argument("--in", dest="input", required=True)
    sp.add_argument("--factors", type=_floats, default=[0.5, 1.0, 2.0])
    sp.add_argument("--pipelines", type=_names, default=["tsrvf-nn", "unwarped"])
    sp.add_argument("--mode", choices=["rate", "endpoint"], default="rate")
    sp.add_argument("--dim", type=int, default=10)
    sp.add_argument("--splits", type=int, default=5)
    sp.add_argument("--report", required=True)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if args.threads < 1:
        print("error: --threads must be at least 1", file=sys.stderr)
        return EXIT_VALIDATION
    try:
        args.func(args)
    except ParseError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except NumericalError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except ValidationError as exc:
        extra = f" (indices: {exc.indices[:10]})" if getattr(exc, "indices", None) else ""
        print(f"error: {exc}{extra}", file=sys.stderr)
        return EXIT_VALIDATION
    except RtrajError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
