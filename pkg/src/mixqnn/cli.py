"""Command-line entry point ``mixqnn``.

Exit codes: 0 success, 2 usage error, 3 domain error, 4 transport or
protocol error. Every command writes a run manifest (argv with the seed
resolved, parameters, output digests, wall-clock) next to its main output;
``mixqnn replay MANIFEST`` re-runs it and checks the digests.
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import json
import logging
import math
import os
import sys
import time
from pathlib import Path

import numpy as np

from . import __version__
from .batching import make_batches, write_assignments_csv
from .classifier import LossKind, LossSpec, TrainConfig
from .datafile import export_genotypes_csv, load_dataset, save_dataset
from .datagen import (
    LabeledDataset,
    SnpModelParams,
    ToyParams,
    class_global_fidelity,
    gen_snp,
    gen_toy_mixed,
    gen_toy_pure,
    train_test_split,
)
from .errors import DomainError, MixQNNError, ProtocolError, TransportError
from .experiments import epsilon_for, run_training, scores
from .optim import OPTIMIZERS
from .privacy import (
    compare_with_oracle,
    loss_update_correlation,
    snp_basis,
    snp_composition_estimate,
    span_dimension,
)

EXIT_OK, EXIT_USAGE, EXIT_DOMAIN, EXIT_TRANSPORT = 0, 2, 3, 4
SEED_ENV = "MIXQNN_SEED"
TABLE1_GRID = (1.5, 2.0, 2.5, 3.0, 3.5, 4.0)
TABLE2_GRID = (0.25, 0.26, 0.27, 0.28, 0.29, 0.3)
EPS_BATCH_SIZES = (8, 16, 24, 32, 48, 65, 80)

log = logging.getLogger("mixqnn")


class UsageError(Exception):
    pass


def default_seed() -> int:
    raw = os.environ.get(SEED_ENV)
    if raw is None:
        return 1
    try:
        return int(raw)
    except ValueError:
        raise UsageError(f"{SEED_ENV}={raw!r} is not an integer") from None


# --- output helpers ---------------------------------------------------------


def _sha256(path) -> str:
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()


def write_json(path, obj) -> None:
    Path(path).parent.mkdir(parents=True, exist_ok=True)
    Path(path).write_text(json.dumps(obj, indent=2, sort_keys=True, default=_json_default) + "\n")


def _json_default(o):
    if isinstance(o, (np.integer,)):
        return int(o)
    if isinstance(o, (np.floating,)):
        return float(o)
    if isinstance(o, np.ndarray):
        return o.tolist()
    if isinstance(o, Path):
        return str(o)
    raise TypeError(f"not JSON serialisable: {type(o).__name__}")


def write_csv(path, header, rows) -> None:
    Path(path).parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(header)
        w.writerows(rows)


def _fmt(x: float) -> str:
    return f"{x:.6g}"


class Run:
    """Collects outputs of one command and writes its manifest."""

    def __init__(self, args, argv):
        self.args = args
        self.argv = argv
        self.outputs: list[str] = []
        self.inputs: list[str] = []
        self.started = time.time()
        self.result: dict = {}

    def output(self, path) -> str:
        self.outputs.append(str(path))
        return str(path)

    def input(self, path) -> str:
        self.inputs.append(str(path))
        return str(path)

    def manifest(self) -> dict:
        params = {k: v for k, v in vars(self.args).items() if k != "func"}
        return {
            "command": " ".join(self.argv[: _command_depth(self.argv)]),
            "argv": self.argv,
            "params": params,
            "seed": getattr(self.args, "seed", None),
            "inputs": {p: _sha256(p) for p in self.inputs if Path(p).is_file()},
            "outputs": {p: _sha256(p) for p in self.outputs if Path(p).is_file()},
            "version": __version__,
            "wall_clock_s": round(time.time() - self.started, 3),
        }

    def write_manifest(self) -> str | None:
        target = getattr(self.args, "manifest", None)
        if target is None:
            if not self.outputs:
                return None
            target = self.outputs[0] + ".manifest.json"
        write_json(target, self.manifest())
        return str(target)


def _command_depth(argv) -> int:
    depth = 0
    for tok in argv:
        if tok.startswith("-"):
            break
        depth += 1
    return depth


# --- gen --------------------------------------------------------------------


def cmd_gen(args, run: Run) -> None:
    if args.kind in ("toy-pure", "toy-mixed"):
        p = ToyParams(args.e_s, args.e_shift, args.n)
        ds = (gen_toy_pure if args.kind == "toy-pure" else gen_toy_mixed)(p, args.seed)
    else:
        p = SnpModelParams(
            n_snps=args.pool_snps,
            n_features=args.snps,
            n_cases=args.cases,
            n_controls=args.controls,
        )
        ds = gen_snp(p, args.seed)
    save_dataset(run.output(args.out), ds)
    summary = {"kind": ds.kind, "counts": ds.counts(), "out": args.out}
    if args.kind != "snp" or args.fidelity:
        summary["class_global_fidelity"] = class_global_fidelity(ds)
    if args.csv:
        export_genotypes_csv(run.output(args.csv), ds)
    run.result = summary


# --- train ------------------------------------------------------------------


def _train_config(args) -> TrainConfig:
    return TrainConfig(
        reps=args.layers,
        maxiter_per_epoch=args.maxiter,
        max_epochs=args.epochs,
        patience=args.patience,
        seed=args.seed,
        loss=LossSpec(args.loss, args.k),
        observable_qubit=args.observable_qubit,
        parity=args.parity,
        optimizer=args.optimizer,
    )


def _split(args, run: Run) -> tuple[LabeledDataset, LabeledDataset]:
    ds = load_dataset(run.input(args.input))
    if args.test_input:
        return ds, load_dataset(run.input(args.test_input))
    split_seed = args.seed if args.split_seed is None else args.split_seed
    return train_test_split(ds, args.test_fraction, split_seed)


def cmd_train(args, run: Run) -> None:
    train_ds, test_ds = _split(args, run)
    cfg = _train_config(args)
    metrics = run_training(train_ds, test_ds, cfg, args.mode, args.batches, args.batching)
    out = metrics.to_dict()
    out.update(
        n_train=len(train_ds),
        n_test=len(test_ds),
        config={"layers": cfg.reps, "loss": cfg.loss.kind.value, "k": cfg.loss.sigmoid_k, "seed": cfg.seed},
    )
    write_json(run.output(args.out), out)
    hist = args.history or str(Path(args.out).with_suffix(".history.csv"))
    per_epoch = metrics.eval_count // max(metrics.epochs, 1)
    write_csv(
        run.output(hist),
        ["epoch", "loss", "eval_count"],
        [[e + 1, _fmt(v), per_epoch * (e + 1)] for e, v in enumerate(metrics.history)],
    )
    if args.assignments and args.mode == "global":
        # same seed as run_training, so these are the batches it trained on
        batches = make_batches(train_ds.quantum_states(), train_ds.labels, args.batches, args.batching, cfg.seed)
        write_assignments_csv(run.output(args.assignments), batches)
    run.result = {k: out[k] for k in ("mode", "train_auc", "test_auc", "train_loss", "eval_count", "epochs")}


# --- audit ------------------------------------------------------------------


def cmd_audit_epsilon(args, run: Run) -> None:
    ds = load_dataset(run.input(args.input))
    report, samples = epsilon_for(ds, args.batch_size, args.scheme, args.seed, args.delta, args.n_eval)
    out = report.to_dict()
    out["epsilon_clamped"] = max(report.epsilon, 0.0)
    write_json(run.output(args.out), out)
    if args.samples_csv:
        rows = [["adjacent", _fmt(v)] for v in samples.adjacent] + [["including", _fmt(v)] for v in samples.including]
        write_csv(run.output(args.samples_csv), ["sample", "value"], rows)
    run.result = {"epsilon": out["epsilon"], "scheme": report.scheme, "n_excluded": report.n_excluded}


def cmd_audit_composition(args, run: Run) -> None:
    est = snp_composition_estimate(args.alphabet, args.n_snp, args.batch)
    _, dens = snp_basis(args.alphabet, args.n_snp)
    out = {
        "estimate": est.to_dict(),
        "estimate_count": math.exp(est.ln_B),
        "estimate_count_stirling": math.exp(est.ln_B_stirling),
        "density_span_rank": span_dimension(dens),
    }
    if args.oracle:
        cmp = compare_with_oracle(args.alphabet, args.n_snp, args.batch, args.instances, args.seed)
        out["oracle"] = cmp.to_dict()
        out["within_factor_10"] = cmp.max_factor <= 10.0
    write_json(run.output(args.out), out)
    run.result = {k: out[k] for k in ("estimate_count", "within_factor_10") if k in out}


def cmd_audit_correlation(args, run: Run) -> None:
    res = loss_update_correlation(args.batch, args.trials, LossSpec(args.loss, args.k), args.qubits, args.depth, args.seed)
    write_json(run.output(args.out), res.to_dict())
    run.result = res.to_dict()


# --- protocol ---------------------------------------------------------------


def _request_from_args(args, n_qubits: int):
    from .protocol.wire import TrainRequest

    return TrainRequest(
        n_qubits=n_qubits, reps=args.layers, loss=args.loss, sigmoid_k=args.k,
        maxiter_per_epoch=args.maxiter, max_epochs=args.epochs, patience=args.patience,
        seed=args.seed, observable_qubit=args.observable_qubit, parity=args.parity,
        optimizer=args.optimizer,
    )


def cmd_protocol_server(args, run: Run) -> None:
    from .protocol.server import ProtocolServer, ServerConfig

    request = _request_from_args(args, args.qubits) if args.qubits else None
    server = ProtocolServer(ServerConfig(args.clients, args.host, args.port, args.timeout, args.on_timeout, request))
    host, port = server.bind()
    log.info("listening on %s:%d", host, port)
    if args.port_file:
        Path(args.port_file).write_text(f"{port}\n")
    result = server.serve()
    write_json(run.output(args.out), {"result": vars(result), "sessions": server.transcript})
    run.result = {"loss": result.loss, "n_states": result.n_states, "eval_count": result.eval_count}


def cmd_protocol_client(args, run: Run) -> None:
    from .experiments import n_qubits_of
    from .protocol.client import ClientConfig, client_run

    ds = load_dataset(run.input(args.input))
    request = None if args.no_request else _request_from_args(args, n_qubits_of(ds.quantum_states()))
    cfg = ClientConfig(
        client_id=args.id, n_batches=args.batches, batching=args.batching, seed=args.seed,
        host=args.host, port=args.port, retries=args.retries, backoff=args.backoff,
        timeout=args.timeout, offline_dir=args.out if args.offline else None, request=request,
    )
    transcript = client_run(cfg, ds)
    # offline, the directory holds frames only; the transcript sits beside it
    target = args.transcript or (f"{Path(args.out)}.{args.id}.transcript.json" if args.offline else args.out)
    write_json(run.output(target), transcript.to_dict())
    for f in transcript.files:
        run.output(f)
    run.result = {"sent": dict(transcript.sent), "files": len(transcript.files)}


# --- repro ------------------------------------------------------------------


def _seeds(text: str) -> list[int]:
    out = []
    for part in text.split(","):
        if "-" in part[1:]:
            lo, hi = part.split("-", 1)
            out.extend(range(int(lo), int(hi) + 1))
        else:
            out.append(int(part))
    return out


def toy_cell(kind: str, e_s: float, e_shift: float, n: int, seed: int, cfg: TrainConfig) -> dict:
    """One seed of one table cell: 2n per class generated, split half/half."""
    gen = gen_toy_pure if kind == "pure" else gen_toy_mixed
    ds = gen(ToyParams(e_s, e_shift, 2 * n), seed)
    tr, te = train_test_split(ds, 0.5, seed)
    inst = run_training(tr, te, cfg, "instance")
    glob = run_training(tr, te, cfg, "global", n_batches=1)
    return {
        "e_shift": e_shift, "seed": seed, "fidelity": class_global_fidelity(ds),
        "instance_train_auc": inst.train_auc, "instance_test_auc": inst.test_auc,
        "global_train_auc": glob.train_auc, "global_test_auc": glob.test_auc,
        "n_train_per_class": n, "n_test_per_class": n,
    }


def toy_table(kind: str, grid, seeds, n: int, cfg_for_seed) -> list[dict]:
    e_s = 0.4 if kind == "pure" else 0.2
    return [toy_cell(kind, e_s, e, n, s, cfg_for_seed(s)) for e in grid for s in seeds]


def summarise_table(cells: list[dict]) -> list[list]:
    """Seed means in wide layout: one column per e_shift."""
    grid = sorted({c["e_shift"] for c in cells})
    mean = {}
    for e in grid:
        cs = [c for c in cells if c["e_shift"] == e]
        mean[e] = {k: float(np.mean([c[k] for c in cs])) for k in cs[0] if k not in ("seed", "e_shift")}
    return [
        ["e_shift", *grid],
        ["fidelity", *(f"{mean[e]['fidelity']:.3f}" for e in grid)],
        ["instance_auc", *(f"{mean[e]['instance_train_auc']:.3f}/{mean[e]['instance_test_auc']:.3f}" for e in grid)],
        ["global_auc", *(f"{mean[e]['global_train_auc']:.3f}/{mean[e]['global_test_auc']:.3f}" for e in grid)],
    ]


def cmd_repro(args, run: Run) -> None:
    seeds = _seeds(args.seeds)
    out = Path(args.out)

    def cfg_for(seed: int) -> TrainConfig:
        return TrainConfig(reps=args.layers, seed=seed, max_epochs=args.epochs, patience=args.patience)

    if args.what in ("table1", "table2"):
        kind, grid = ("pure", TABLE1_GRID) if args.what == "table1" else ("mixed", TABLE2_GRID)
        cells = toy_table(kind, grid, seeds, args.n, cfg_for)
        rows = summarise_table(cells)
        write_csv(run.output(out), rows[0], rows[1:])
        keys = list(cells[0])
        write_csv(run.output(out.with_suffix(".seeds.csv")), keys, [[c[k] for k in keys] for c in cells])
        run.result = {"table": rows}
    elif args.what == "fig3-toy":
        rows = []
        for kind, e_s, grid in (("toy-pure", 0.4, (1.5, 4.0)), ("toy-mixed", 0.2, (0.25, 0.3))):
            gen = gen_toy_pure if kind == "toy-pure" else gen_toy_mixed
            for e in grid:
                ds = gen(ToyParams(e_s, e, args.n), seeds[0])
                z = scores(TrainConfig(reps=1), np.zeros(4), ds.quantum_states())
                fid = class_global_fidelity(ds)
                rows.extend([kind, e, _fmt(fid), int(y), _fmt(v)] for y, v in zip(ds.labels, z))
        write_csv(run.output(out), ["dataset", "e_shift", "fidelity", "label", "z_expectation"], rows)
        run.result = {"rows": len(rows)}
    else:
        ds = gen_snp(SnpModelParams(n_snps=args.pool_snps, n_features=args.snps), seeds[0])
        rows = []
        for m in _seeds(args.batch_sizes):
            r, _ = epsilon_for(ds, m, "random", seeds[0])
            s, _ = epsilon_for(ds, m, "smart", seeds[0])
            rows.append([m, _fmt(r.epsilon), _fmt(s.epsilon), s.n_excluded])
        write_csv(run.output(out), ["batch_size", "epsilon_random", "epsilon_smart", "smart_singletons"], rows)
        run.result = {"rows": rows}


# --- replay -----------------------------------------------------------------


def cmd_replay(args, run: Run) -> int:
    manifest = json.loads(Path(args.manifest_file).read_text())
    code = main(manifest["argv"], _nested=True)
    if code != EXIT_OK:
        return code
    mismatched = [p for p, h in manifest["outputs"].items() if not Path(p).is_file() or _sha256(p) != h]
    run.result = {"replayed": manifest["command"], "mismatched": mismatched}
    if mismatched:
        print(f"outputs differ from the manifest: {mismatched}", file=sys.stderr)
        return EXIT_DOMAIN
    return EXIT_OK


# --- parser -----------------------------------------------------------------


def _add_train_options(p) -> None:
    p.add_argument("--loss", choices=[k.value for k in LossKind], default=LossKind.L1_RESCALED.value)
    p.add_argument("--k", type=float, default=10.0, help="sigmoid temperature")
    p.add_argument("--layers", type=int, default=1, help="ansatz repetitions")
    p.add_argument("--maxiter", type=int, default=200, help="objective evaluations per epoch")
    p.add_argument("--epochs", type=int, default=50)
    p.add_argument("--patience", type=int, default=10)
    p.add_argument("--optimizer", choices=sorted(OPTIMIZERS), default="cobyla")
    p.add_argument("--observable-qubit", type=int, default=None)
    p.add_argument("--parity", action="store_true", help="measure Z on every qubit")


def build_parser() -> argparse.ArgumentParser:
    seed = default_seed()
    parser = argparse.ArgumentParser(prog="mixqnn", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    parser.add_argument("-v", "--verbose", action="store_true")
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=seed, help=f"default from ${SEED_ENV} or 1")
    common.add_argument("--manifest", default=None, help="manifest path (default: <out>.manifest.json)")
    sub = parser.add_subparsers(dest="cmd", required=True)

    g = sub.add_parser("gen", parents=[common], help="generate a dataset file")
    g.add_argument("kind", choices=["toy-pure", "toy-mixed", "snp"])
    g.add_argument("--e-s", type=float, default=0.4)
    g.add_argument("--e-shift", type=float, default=1.5)
    g.add_argument("--n", type=int, default=200, help="samples per class (toy)")
    g.add_argument("--snps", type=int, default=128, help="features kept")
    g.add_argument("--pool-snps", type=int, default=10_000, help="loci simulated before selection")
    g.add_argument("--cases", type=int, default=465)
    g.add_argument("--controls", type=int, default=465)
    g.add_argument("--csv", default=None, help="also export genotypes as CSV")
    g.add_argument("--fidelity", action="store_true", help="report class-global fidelity for snp")
    g.add_argument("--out", required=True)
    g.set_defaults(func=cmd_gen)

    t = sub.add_parser("train", parents=[common], help="train and evaluate a classifier")
    t.add_argument("--input", required=True)
    t.add_argument("--test-input", default=None)
    t.add_argument("--test-fraction", type=float, default=0.3)
    t.add_argument("--split-seed", type=int, default=None)
    t.add_argument("--mode", choices=["instance", "global"], default="global")
    t.add_argument("--batches", type=int, default=1, help="batches per class")
    t.add_argument("--batching", choices=["random", "smart"], default="random")
    t.add_argument("--history", default=None, help="per-epoch CSV (default: <out>.history.csv)")
    t.add_argument("--assignments", default=None, help="batch assignment CSV, indices into the training split (global mode)")
    t.add_argument("--out", required=True)
    _add_train_options(t)
    t.set_defaults(func=cmd_train)

    a = sub.add_parser("audit", help="privacy audits")
    asub = a.add_subparsers(dest="audit", required=True)
    ae = asub.add_parser("epsilon", parents=[common])
    ae.add_argument("--input", required=True)
    ae.add_argument("--batch-size", type=int, required=True)
    ae.add_argument("--delta", type=float, default=0.05)
    ae.add_argument("--n-eval", type=int, default=10000)
    ae.add_argument("--scheme", choices=["random", "smart"], default="random")
    ae.add_argument("--samples-csv", default=None)
    ae.add_argument("--out", required=True)
    ae.set_defaults(func=cmd_audit_epsilon)
    ac = asub.add_parser("composition", parents=[common])
    ac.add_argument("--n-snp", type=int, required=True)
    ac.add_argument("--alphabet", type=int, default=3)
    ac.add_argument("--batch", type=int, required=True)
    ac.add_argument("--oracle", action="store_true", help="also count exactly on constructed instances")
    ac.add_argument("--instances", type=int, default=5)
    ac.add_argument("--out", required=True)
    ac.set_defaults(func=cmd_audit_composition)
    ar = asub.add_parser("correlation", parents=[common])
    ar.add_argument("--loss", choices=[k.value for k in LossKind], default=LossKind.L1_SIGMOID.value)
    ar.add_argument("--k", type=float, default=10.0)
    ar.add_argument("--trials", type=int, default=1000)
    ar.add_argument("--batch", type=int, required=True)
    ar.add_argument("--qubits", type=int, default=3)
    ar.add_argument("--depth", type=int, default=10)
    ar.add_argument("--out", required=True)
    ar.set_defaults(func=cmd_audit_correlation)

    pr = sub.add_parser("protocol", help="delegated or multi-party training over TCP")
    psub = pr.add_subparsers(dest="role", required=True)
    ps = psub.add_parser("server", parents=[common])
    ps.add_argument("--clients", type=int, required=True)
    ps.add_argument("--host", default="127.0.0.1")
    ps.add_argument("--port", type=int, default=0)
    ps.add_argument("--port-file", default=None, help="write the bound port here")
    ps.add_argument("--timeout", type=float, default=60.0)
    ps.add_argument("--on-timeout", choices=["abort", "proceed"], default="abort")
    ps.add_argument("--qubits", type=int, default=None, help="train with server-side settings on this register")
    ps.add_argument("--out", required=True)
    _add_train_options(ps)
    ps.set_defaults(func=cmd_protocol_server)
    pc = psub.add_parser("client", parents=[common])
    pc.add_argument("--input", required=True)
    pc.add_argument("--id", required=True)
    pc.add_argument("--batches", type=int, required=True, help="batches per class")
    pc.add_argument("--batching", choices=["random", "smart"], default="random")
    pc.add_argument("--host", default="127.0.0.1")
    pc.add_argument("--port", type=int, default=0)
    pc.add_argument("--retries", type=int, default=3)
    pc.add_argument("--backoff", type=float, default=0.2)
    pc.add_argument("--timeout", type=float, default=60.0)
    pc.add_argument("--offline", action="store_true", help="write .qgs files to --out instead of connecting")
    pc.add_argument("--no-request", action="store_true", help="leave training settings to the server")
    pc.add_argument("--transcript", default=None)
    pc.add_argument("--out", required=True)
    _add_train_options(pc)
    pc.set_defaults(func=cmd_protocol_client)

    rp = sub.add_parser("repro", parents=[common], help="desk-scale reproductions, CSV output")
    rp.add_argument("what", choices=["table1", "table2", "fig3-toy", "eps-curve"])
    rp.add_argument("--seeds", default="1-5")
    rp.add_argument("--n", type=int, default=200, help="train (and test) samples per class")
    rp.add_argument("--layers", type=int, default=1)
    rp.add_argument("--epochs", type=int, default=50)
    rp.add_argument("--patience", type=int, default=10)
    rp.add_argument("--snps", type=int, default=128)
    rp.add_argument("--pool-snps", type=int, default=10_000)
    rp.add_argument("--batch-sizes", default=",".join(map(str, EPS_BATCH_SIZES)))
    rp.add_argument("--out", required=True)
    rp.set_defaults(func=cmd_repro)

    rl = sub.add_parser("replay", help="re-run a manifest and verify its outputs")
    rl.add_argument("manifest_file")
    rl.set_defaults(func=cmd_replay)
    return parser


def _resolved_argv(argv: list[str], args) -> list[str]:
    """``argv`` with the effective seed made explicit so replays ignore the environment."""
    if not hasattr(args, "seed") or "--seed" in argv:
        return list(argv)
    return [*argv, "--seed", str(args.seed)]


def main(argv=None, _nested: bool = False) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    try:
        parser = build_parser()
    except UsageError as exc:
        print(f"mixqnn: {exc}", file=sys.stderr)
        return EXIT_USAGE
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(name)s: %(message)s")
    run = Run(args, _resolved_argv(argv, args))
    try:
        code = args.func(args, run)
    except TransportError as exc:
        print(f"mixqnn: transport error: {exc}", file=sys.stderr)
        return EXIT_TRANSPORT
    except ProtocolError as exc:
        print(f"mixqnn: protocol error: {exc}", file=sys.stderr)
        return EXIT_TRANSPORT
    except (MixQNNError, DomainError, OSError) as exc:
        print(f"mixqnn: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_DOMAIN
    if args.func is not cmd_replay:
        run.write_manifest()
    if run.result and not _nested:
        print(json.dumps(run.result, sort_keys=True, default=_json_default))
    return EXIT_OK if code is None else code


if __name__ == "__main__":
    sys.exit(main())
