"""End-to-end acceptance checks, one test per criterion.

Each test prints a single ``PASS``/``FAIL`` line before asserting. Criteria
that the faithful implementation does not meet are marked
``xfail(strict=True)``: the assertion keeps its stated tolerance, the line
still reads ``FAIL``, and an unexpected pass turns the suite red.
"""

import math
import socket
import struct
import threading
import time
import zlib

import numpy as np
import pytest

from mixqnn.batching import smart_batches
from mixqnn.classifier import LossKind, LossSpec, TrainConfig, loss_terms
from mixqnn.cli import TABLE1_GRID, TABLE2_GRID, toy_cell
from mixqnn.datagen import SnpModelParams, ToyParams, class_global_fidelity, gen_snp, gen_toy_mixed, gen_toy_pure
from mixqnn.errors import FrameError
from mixqnn.experiments import epsilon_for, fit_global, fit_instance
from mixqnn.batching import global_states
from mixqnn.protocol.client import ClientConfig, client_run, prepare_global_states
from mixqnn.protocol.server import ProtocolServer, ServerConfig
from mixqnn.protocol.wire import (
    MessageType,
    ModelResult,
    TrainRequest,
    deserialize_global_state,
    json_body,
    recv_message,
    send_message,
    serialize_global_state,
)
from mixqnn.privacy import (
    RandomScheme,
    SmartScheme,
    compare_with_oracle,
    loss_update_correlation,
    membership_projections,
)

from conftest import random_densities

SEEDS = (1, 2, 3, 4, 5)
TABLE2_FIDELITY = (0.816, 0.805, 0.797, 0.789, 0.78, 0.767)

pytestmark = pytest.mark.acceptance


@pytest.fixture
def report(capsys):
    def emit(n: int, ok: bool, detail: str) -> None:
        with capsys.disabled():
            print(f"\n{'PASS' if ok else 'FAIL'} criterion {n}: {detail}")

    return emit


@pytest.fixture(scope="module")
def table1():
    cells = {}
    for e in (1.5, 4.0):
        cells[e] = [toy_cell("pure", 0.4, e, 200, s, TrainConfig(seed=s)) for s in SEEDS]
    return cells


@pytest.fixture(scope="module")
def table2():
    cells = {}
    for e in (0.25, 0.3):
        cells[e] = [toy_cell("mixed", 0.2, e, 200, s, TrainConfig(seed=s)) for s in SEEDS]
    return cells


@pytest.fixture(scope="module")
def snp128():
    return gen_snp(SnpModelParams(), rng_seed=1)


def test_c1_exact_linearity(report):
    start = time.perf_counter()
    rng = np.random.default_rng(1)
    qnn = TrainConfig(reps=1).qnn(3)
    spec = LossSpec(LossKind.L1_RESCALED)
    worst_p = worst_loss = 0.0
    for _ in range(100):
        rhos = random_densities(rng, 32, 8)
        theta = rng.uniform(-np.pi, np.pi, qnn.n_params)
        y = float(rng.integers(2))
        p_inst = qnn.predict(theta, rhos)
        p_glob = qnn.predict(theta, rhos.mean(axis=0)[None])[0]
        worst_p = max(worst_p, abs(p_glob - p_inst.mean()))
        l_glob = float(loss_terms(p_glob, y, spec))
        l_inst = float(loss_terms(p_inst, np.full(32, y), spec).mean())
        worst_loss = max(worst_loss, abs(l_glob - l_inst))
    elapsed = time.perf_counter() - start
    ok = worst_p <= 1e-12 and worst_loss <= 1e-10 and elapsed < 10
    report(1, ok, f"max |dp|={worst_p:.2e}, max |dL|={worst_loss:.2e}, {elapsed:.2f}s")
    assert ok


@pytest.mark.xfail(
    strict=True,
    reason="toy-pure AUC at e_shift 1.5 and 4 exceeds the target bands; the linear loss separates the classes",
)
def test_c2_table1(report, table1):
    hi = float(np.mean([c["instance_test_auc"] for c in table1[4.0]]))
    lo = float(np.mean([c["instance_test_auc"] for c in table1[1.5]]))
    gap = max(abs(c["global_test_auc"] - c["instance_test_auc"]) for cs in table1.values() for c in cs)
    ok_hi, ok_lo, ok_gap = abs(hi - 0.81) <= 0.07, lo <= 0.60, gap <= 0.01
    detail = (
        f"AUC(e_shift=4)={hi:.3f} [{'ok' if ok_hi else 'want 0.81+-0.07'}], "
        f"AUC(e_shift=1.5)={lo:.3f} [{'ok' if ok_lo else 'want <=0.60'}], "
        f"max global/instance gap={gap:.4f} [{'ok' if ok_gap else 'want <=0.01'}]"
    )
    report(2, ok_hi and ok_lo and ok_gap, detail)
    assert ok_hi and ok_lo and ok_gap


@pytest.mark.xfail(
    strict=True,
    reason="toy-mixed classes stay separable at e_shift 0.25 and class-global fidelities sit near 0.87-0.91",
)
def test_c3_table2(report, table2):
    hi = float(np.mean([c["instance_test_auc"] for c in table2[0.3]]))
    lo = float(np.mean([c["instance_test_auc"] for c in table2[0.25]]))
    fids = [
        float(np.mean([class_global_fidelity(gen_toy_mixed(ToyParams(0.2, e, 400), s)) for s in SEEDS]))
        for e in TABLE2_GRID
    ]
    fid_err = max(abs(f - t) for f, t in zip(fids, TABLE2_FIDELITY))
    ok_hi, ok_lo, ok_fid = hi >= 0.95, lo <= 0.70, fid_err <= 0.03
    detail = (
        f"AUC(0.3)={hi:.3f} [{'ok' if ok_hi else 'want >=0.95'}], "
        f"AUC(0.25)={lo:.3f} [{'ok' if ok_lo else 'want <=0.70'}], "
        f"fidelity max error={fid_err:.3f} [{'ok' if ok_fid else 'want <=0.03'}]"
    )
    report(3, ok_hi and ok_lo and ok_fid, detail)
    assert ok_hi and ok_lo and ok_fid


def test_c4_fidelity_monotone(report):
    worst = -math.inf
    for gen, e_s, grid in ((gen_toy_pure, 0.4, TABLE1_GRID), (gen_toy_mixed, 0.2, TABLE2_GRID)):
        for s in SEEDS[:3]:
            fids = [class_global_fidelity(gen(ToyParams(e_s, e, 400), s)) for e in grid]
            worst = max(worst, float(np.max(np.diff(fids))))
    ok = worst < 0
    report(4, ok, f"largest step between neighbouring e_shift values={worst:.4f} (must be < 0)")
    assert ok


def test_c5_alpha_beta(report, snp128):
    states = snp128.quantum_states()
    worst, pairs = 0.0, 0
    for y in (0, 1):
        pos = np.flatnonzero(snp128.labels == y)
        for m in (2, 16, 65):
            s = membership_projections(states[pos], RandomScheme(m), rng_seed=y)
            worst = max(worst, float(np.max(np.abs(s.including - ((m - 1) * s.adjacent + 1) / m))))
            pairs += s.adjacent.size
        batches = smart_batches(states[pos], 8, rng_seed=y)
        smart = membership_projections(states[pos], SmartScheme(tuple(b.member_indices for b in batches)))
        sizes = np.concatenate([[b.size] * b.size for b in batches if b.size > 1])
        worst = max(worst, float(np.max(np.abs(smart.including - ((sizes - 1) * smart.adjacent + 1) / sizes))))
        pairs += smart.adjacent.size
    ok = worst <= 1e-12
    report(5, ok, f"{pairs} audited pairs, max deviation {worst:.2e}")
    assert ok


def test_c6_epsilon(report, snp128):
    start = time.perf_counter()
    eps = [epsilon_for(snp128, m, "random", 1)[0].epsilon for m in (16, 32, 65)]
    elapsed = time.perf_counter() - start
    ok = eps[2] < 1 and eps[0] > eps[1] > eps[2] and elapsed < 300
    report(6, ok, f"eps(16, 32, 65)=({eps[0]:.3f}, {eps[1]:.3f}, {eps[2]:.3f}), {elapsed:.1f}s")
    assert ok


@pytest.mark.xfail(
    strict=True,
    reason="the hyperplane-scaled balls-into-bins estimate overshoots exact counts by more than 10x on several cells",
)
def test_c7_composition(report):
    failures, witnesses, cells = [], True, 0
    for alphabet in (2, 3):
        for n_snp in (1, 2, 3):
            for n_i in (1, 2, 3):
                cmp = compare_with_oracle(alphabet, n_snp, n_i, instances=5, rng_seed=alphabet * 100 + n_snp * 10 + n_i)
                cells += 1
                witnesses &= min(cmp.exact) >= 1
                if cmp.max_factor > 10:
                    failures.append(f"({alphabet},{n_snp},{n_i}) est={cmp.estimate:.1f} exact={list(cmp.exact)}")
    ok = witnesses and not failures
    detail = f"{cells} cells, witnesses {'ok' if witnesses else 'missing'}, {len(failures)} beyond 10x"
    if failures:
        detail += ": " + "; ".join(failures)
    report(7, ok, detail)
    assert ok


def test_c8_correlation(report):
    start = time.perf_counter()
    rows, ok = [], True
    for spec in (LossSpec(LossKind.L1_SIGMOID, 10.0), LossSpec(LossKind.L2)):
        single = loss_update_correlation(1, 200, spec, 3, 10, rng_seed=0)
        ok &= single.pcc == pytest.approx(1.0, abs=1e-12) and single.sign_agreement == 1.0
        for b in (2, 8, 32):
            r = loss_update_correlation(b, 1000, spec, 3, 10, rng_seed=b)
            ok &= r.pcc > 0.8 and r.sign_agreement > 0.85
            rows.append(f"{spec.kind.value}/{b}: {r.pcc:.3f},{r.sign_agreement:.3f}")
    elapsed = time.perf_counter() - start
    ok &= elapsed < 300
    report(8, ok, "pcc,agreement " + " ".join(rows) + f"; batch 1 exact; {elapsed:.1f}s")
    assert ok


def _serve(n_clients, request):
    server = ProtocolServer(ServerConfig(n_clients, timeout=30.0, request=request))
    _, port = server.bind()
    box = {}
    t = threading.Thread(target=lambda: box.__setitem__("result", server.serve()), daemon=True)
    t.start()
    return port, t, box


def _send_frames(port, client_id, frames):
    with socket.create_connection(("127.0.0.1", port), timeout=30) as s:
        send_message(s, MessageType.HELLO, json_body({"client_id": client_id, "protocol_version": 1}))
        recv_message(s)
        for f in frames:
            send_message(s, MessageType.GLOBAL_STATE, f)
        send_message(s, MessageType.DONE)
        return ModelResult.from_json(recv_message(s)[1])


def test_c9_protocol(report):
    start = time.perf_counter()
    request = TrainRequest(n_qubits=2, maxiter_per_epoch=60, max_epochs=5, patience=2, seed=3)
    ds = gen_toy_pure(ToyParams(0.4, 4.0, 30), rng_seed=1)
    parts = {"a": ds.subset(np.r_[0:15, 30:45]), "b": ds.subset(np.r_[15:30, 45:60])}
    globs = {cid: prepare_global_states(p, 3, "random", 9) for cid, p in parts.items()}
    local = fit_global(globs["a"] + globs["b"], request.config(), 2).params.tolist()

    port, t, box = _serve(2, request)
    runs = [
        threading.Thread(target=client_run, args=(ClientConfig(cid, 3, seed=9, port=port, retries=0), p))
        for cid, p in parts.items()
    ]
    for r in runs:
        r.start()
    for r in (*runs, t):
        r.join(60)
    two = box["result"].params

    frames = [serialize_global_state(g) for g in globs["a"] + globs["b"]]
    port, t, box = _serve(1, request)
    one = _send_frames(port, "union", frames).params
    t.join(60)

    rng = np.random.default_rng(2)
    round_trips = rejected = 0
    for f in frames:
        round_trips += serialize_global_state(deserialize_global_state(f)) == f
        for pos in rng.choice(len(f), 20, replace=False):
            bad = bytearray(f)
            bad[pos] ^= 1 << int(rng.integers(8))
            try:
                deserialize_global_state(bytes(bad))
            except FrameError:
                rejected += 1
    # a forged CRC over a broken trace is still refused
    forged = bytearray(frames[0])
    struct.pack_into("<dd", forged, 24, 0.9 * struct.unpack_from("<d", forged, 24)[0], 0.0)
    body = bytes(forged[:-4])
    try:
        deserialize_global_state(body + struct.pack("<I", zlib.crc32(body)))
    except FrameError:
        rejected += 1
    elapsed = time.perf_counter() - start
    ok = (
        two == local and one == local and round_trips == len(frames)
        and rejected == 20 * len(frames) + 1 and elapsed < 60
    )
    report(
        9, ok,
        f"two-client==local {two == local}, one-client==local {one == local}, "
        f"round trips {round_trips}/{len(frames)}, rejected {rejected}/{20 * len(frames) + 1}, {elapsed:.1f}s",
    )
    assert ok


def test_c10_execution_count(report):
    ds = gen_toy_pure(ToyParams(0.4, 4.0, 325), rng_seed=1)
    cfg = TrainConfig(maxiter_per_epoch=50, max_epochs=2, patience=1)
    states = ds.quantum_states()
    _, globs = global_states(states, ds.labels, 10, "random", 1)
    inst = fit_instance(states, ds.labels, cfg)
    glob = fit_global(globs, cfg, 2)
    ratio = (inst.eval_count / inst.n_calls) / (glob.eval_count / glob.n_calls)
    ok = ratio == 32.5
    report(10, ok, f"circuit runs per objective call {inst.eval_count // inst.n_calls}:"
                   f"{glob.eval_count // glob.n_calls}, ratio {ratio}")
    assert ok
