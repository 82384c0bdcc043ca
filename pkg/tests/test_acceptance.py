"""Acceptance criteria, one test each; every test records a PASS/FAIL line via ``verdict``."""
import math
import struct
import time
from pathlib import Path

import numpy as np
import pytest

from gradcheck import check
from op_cases import all_op_errors
from snn_helpers import composite_check, hand_lif, one_neuron_net, ramp_lif_forward
from tmkt import kernels
from tmkt.autodiff import Tensor, cross_entropy, precision
from tmkt.cli import main
from tmkt.data import (
    BadMagic,
    DimensionOverflow,
    FrameSequence,
    TrailingData,
    Truncated,
    VersionMismatch,
    decode_sample,
    encode_sample,
    load_sample,
    save_sample,
)
from tmkt.losses import AlignmentGates, linear_cka, mag_loss, mrp_loss, rda_loss, tet_loss, total_loss
from tmkt.mixup import mix_batch, sample_replacement_points, solve_replacement_prob
from tmkt.snn import snn_forward
from tmkt.train import load_config, run_training
from tmkt.train.loop import load_training_data

CONFIGS = Path(__file__).resolve().parent.parent / "configs"


def test_sampler_expectation(verdict):
    T, n = 10, 100_000
    start = time.perf_counter()
    worst, means = 0.0, {}
    for i, r_m in enumerate((0.3, 0.4, 0.5, 0.6, 0.7)):
        p = solve_replacement_prob(T, r_m, "unconditional")
        t_star = sample_replacement_points(p, T, n, np.random.default_rng(100 + i))
        means[r_m] = float(np.mean((T + 1 - t_star) / T))
        worst = max(worst, abs(means[r_m] - r_m))
    elapsed = time.perf_counter() - start
    detail = ", ".join(f"{r}->{m:.4f}" for r, m in means.items())
    verdict("sampler expectation", worst <= 0.01 and elapsed < 5.0,
            f"max |mean - r_m| {worst:.4f} (tol 0.01), {elapsed:.2f}s (limit 5s); {detail}")


def test_conditional_feasibility(verdict, capsys):
    code = main(["solve-p", "--t", "10", "--ratio", "0.4", "--mode", "conditional"])
    out = capsys.readouterr().out
    infeasible_ok = code != 0 and out.startswith("infeasible: min ratio 0.55")
    bound_ok = math.isclose((10 + 1) / (2 * 10), 0.55)
    residuals = {}
    for ratio in (0.6, 0.65, 0.7, 0.8, 0.9, 0.95, 1.0):
        code_r = main(["solve-p", "--t", "10", "--ratio", str(ratio), "--mode", "conditional"])
        rep = dict(line.split("=", 1) for line in capsys.readouterr().out.strip().splitlines())
        residuals[ratio] = abs(float(rep["residual"])) if code_r == 0 else math.inf
    worst = max(residuals.values())
    verdict("conditional-mode feasibility", infeasible_ok and bound_ok and worst < 1e-9,
            f"r=0.4 -> {out.strip()!r}; worst residual over r in [0.6, 1] = {worst:.2e} (tol 1e-9)")


def test_truncation_structure(verdict):
    T, n, chunk = 10, 100_000, 10_000
    rng = np.random.default_rng(7)
    p = solve_replacement_prob(T, 0.4)
    # frame t of the appearance stream holds +(t+1), of the event stream -(t+1)
    steps = np.arange(1, T + 1, dtype=np.float32)[None, :, None, None, None]
    app = np.broadcast_to(steps, (chunk, T, 2, 1, 1))
    evt = -app
    order_violations = source_violations = label_violations = ratio_violations = 0
    for _ in range(n // chunk):
        t_star = sample_replacement_points(p, T, chunk, rng)
        frames, y_s, y_m = mix_batch(app, evt, t_star)
        is_app = frames[:, :, 0, 0, 0] > 0
        order_violations += int(np.sum(np.any(~is_app[:, :-1] & is_app[:, 1:], axis=1)))
        expected_app = np.arange(1, T + 1)[None] < t_star[:, None]
        source_violations += int(np.sum(np.any(is_app != expected_app, axis=1)))
        source_violations += int(np.sum(np.abs(frames[:, :, 0, 0, 0]) != steps[0, :, 0, 0, 0]))
        label_violations += int(np.sum(np.any(y_s != is_app, axis=1)))
        ratio_violations += int(np.sum(y_m != y_s.mean(axis=1)))
    total = order_violations + source_violations + label_violations + ratio_violations
    verdict("truncation structure", total == 0,
            f"{n} samples: {order_violations} order, {source_violations} source, {label_violations} y_s, "
            f"{ratio_violations} y_m != mean(y_s) violations")


def test_cka_suite(verdict):
    rng = np.random.default_rng(11)
    start = time.perf_counter()
    errs = dict(self=0.0, orthogonal=0.0, scale=0.0, symmetry=0.0)
    lo, hi = math.inf, -math.inf
    for _ in range(50):
        n, d1, d2 = rng.integers(5, 40), rng.integers(2, 16), rng.integers(2, 16)
        a = rng.normal(size=(n, d1)).astype(np.float32)
        b = rng.normal(size=(n, d2)).astype(np.float32)
        q, _ = np.linalg.qr(rng.normal(size=(d1, d1)))
        base = linear_cka(Tensor(a), Tensor(b)).item()
        errs["self"] = max(errs["self"], abs(linear_cka(Tensor(a), Tensor(a)).item() - 1.0))
        rotated = (a.astype(np.float64) @ q).astype(np.float32)
        errs["orthogonal"] = max(errs["orthogonal"], abs(linear_cka(Tensor(rotated), Tensor(b)).item() - base))
        scaled = a * np.float32(rng.uniform(0.1, 10.0))
        errs["scale"] = max(errs["scale"], abs(linear_cka(Tensor(scaled), Tensor(b)).item() - base))
        errs["symmetry"] = max(errs["symmetry"], abs(linear_cka(Tensor(b), Tensor(a)).item() - base))
        lo, hi = min(lo, base), max(hi, base)
    elapsed = time.perf_counter() - start
    ok = max(errs.values()) <= 1e-6 and 0.0 <= lo and hi <= 1.0 and elapsed < 5.0
    detail = ", ".join(f"{k} {v:.1e}" for k, v in errs.items())
    verdict("CKA suite", ok, f"50 instances: {detail} (tol 1e-6); range [{lo:.3f}, {hi:.3f}]; {elapsed:.2f}s")


def _loss_errors(rng):
    labels = np.array([0, 2, 1, 1])
    vm = [rng.normal(size=(4, 5)) for _ in range(2)]
    ve = [rng.normal(size=(4, 5)) for _ in range(2)]
    lg = [rng.normal(size=(4, 3)) for _ in range(2)]
    theta = rng.normal(size=2)
    y_s = np.array([[1, 0], [1, 1], [0, 0], [1, 0]])
    return {
        "linear_cka": check(linear_cka, [vm[0], ve[0]]),
        "tet_loss": check(lambda a, b: tet_loss([a, b], labels), lg),
        "rda_loss": check(lambda th, a0, a1, b0, b1, l0, l1: rda_loss(
            [a0, a1], [b0, b1], [l0, l1], labels, AlignmentGates(th)), [theta] + vm + ve + lg),
        "mag_loss": check(lambda a, b: mag_loss([a, b], y_s), [rng.normal(size=(4, 2)) for _ in range(2)]),
        "mrp_loss": check(lambda z: mrp_loss(z, [0.0, 0.5, 1.0, 0.25]), [rng.uniform(size=4)]),
    }


def test_gradient_fidelity(verdict, monkeypatch):
    with precision(np.float64):
        ops = all_op_errors(range(20))
        for s in range(5):
            for k, v in _loss_errors(np.random.default_rng(s)).items():
                ops[k] = max(ops.get(k, 0.0), v)
        worst_op = max(ops, key=ops.get)

        # route 1: binary spikes, surrogate window narrower than any potential's distance to threshold
        width = 1e-4
        charged = []
        fwd = kernels.lif_forward

        def spy(prev, current, tau, v_th):
            out = fwd(prev, current, tau, v_th)
            charged.append(out[2])
            return out

        monkeypatch.setattr(kernels, "lif_forward", spy)
        binary_err = composite_check(width, np.random.default_rng(3))
        margin = min(float(np.min(np.abs(u - 1.0))) for u in charged)

        # route 2: a spike ramp whose exact derivative is the rectangular surrogate
        monkeypatch.setattr(kernels, "lif_forward",
                            lambda p, c, tau, v_th: ramp_lif_forward(p, c, tau, v_th, 0.5))
        ramp_err = composite_check(0.5, np.random.default_rng(4))

    ok = ops[worst_op] < 1e-4 and margin > width and binary_err < 1e-3 and ramp_err < 1e-3
    verdict("gradient fidelity", ok,
            f"{len(ops)} ops, worst {worst_op} {ops[worst_op]:.1e} (tol 1e-4); composite binary-spike "
            f"{binary_err:.1e} (margin {margin:.1e} > width {width}), surrogate ramp {ramp_err:.1e} (tol 1e-3)")


def test_lif_oracle(verdict):
    traces = [[0.4, 0.4, 0.4], [0.8, 0.8, 0.8], [1.0, 0.2, 1.5]]
    mismatches = []
    fired = 0
    with precision(np.float64):
        for currents in traces:
            acts = snn_forward(one_neuron_net(), np.array(currents).reshape(1, 3, 1, 1, 1))
            spikes, post = hand_lif(currents, 0.5, 1.0)
            got_s = [float(s.data[0, 0]) for s in acts.spikes]
            got_v = [float(v.data[0, 0]) for v in acts.potentials]
            fired += int(sum(spikes))
            if got_s != spikes or got_v != post:
                mismatches.append((currents, got_s, got_v, spikes, post))
    verdict("LIF oracle", not mismatches and fired > 0,
            f"3 scripted traces, {fired} spike-and-reset events, {len(mismatches)} mismatches")


def test_loss_identities(verdict):
    rng = np.random.default_rng(5)
    with precision(np.float64):
        logits = Tensor(rng.normal(size=(6, 4)))
        labels = rng.integers(0, 4, 6)
        tet1 = tet_loss([logits], labels).item()
        ce = cross_entropy(logits, labels).item()
        uniform = tet_loss([Tensor(np.zeros((3, 7))) for _ in range(4)], [0, 3, 6]).item()
        mag = mag_loss([Tensor(np.zeros((2, 2))) for _ in range(3)], [[1, 1, 0], [1, 0, 0]]).item()
        mrp = mrp_loss(Tensor(np.array([0.3])), [0.5]).item()
        total = total_loss(1.0, 2.0, 3.0, 4.0, lam=0.5).total.item()
    checks = {
        "TET(T=1)==CE": tet1 == ce,
        "uniform TET==ln7": abs(uniform - math.log(7)) <= 1e-6,
        "uniform MAG==ln2": abs(mag - math.log(2)) <= 1e-6,
        "MRP(0.3,0.5)==0.04": abs(mrp - 0.04) <= 1e-9,
        "total(1,2,3,4)==9": total == 9.0,
    }
    failed = [k for k, v in checks.items() if not v]
    verdict("loss identities", not failed,
            f"TET1-CE {tet1 - ce:.1e}, ln7 err {uniform - math.log(7):.1e}, ln2 err {mag - math.log(2):.1e}, "
            f"MRP {mrp!r}, total {total!r}" + (f"; failed {failed}" if failed else ""))


DESK = ("desk_baseline", "desk_tsm", "desk_tsm_mag_mrp", "desk_full")


@pytest.mark.slow
def test_end_to_end_transfer(verdict):
    configs = {name: load_config(CONFIGS / f"{name}.cfg") for name in DESK}
    ds = load_training_data(configs["desk_full"])
    start = time.perf_counter()
    acc = {name: [] for name in DESK}
    for seed in (0, 1, 2):
        for name in DESK:
            cfg = configs[name].replace(seed=seed)
            acc[name].append(run_training(cfg, dataset=ds, write=False).metrics[-1].test_acc)
    elapsed = time.perf_counter() - start
    mean = {k: float(np.mean(v)) for k, v in acc.items()}
    chance = 1.0 / ds.n_classes
    conditions = {
        "full>=baseline": mean["desk_full"] >= mean["desk_baseline"],
        "tsm>=baseline": mean["desk_tsm"] >= mean["desk_baseline"],
        "tsm+mag+mrp>=tsm": mean["desk_tsm_mag_mrp"] >= mean["desk_tsm"],
        "full>chance": mean["desk_full"] > chance,
        "runtime<10min": elapsed < 600,
    }
    failed = [k for k, v in conditions.items() if not v]
    per_seed = "; ".join(f"{k.removeprefix('desk_')} {mean[k]:.3f} {acc[k]}" for k in DESK)
    verdict("end-to-end desk-scale transfer", not failed,
            f"seed-mean test acc: {per_seed}; {elapsed:.0f}s" + (f"; failed {failed}" if failed else ""))


def test_determinism(verdict, tmp_path):
    cfg = load_config(CONFIGS / "smoke.cfg")
    blobs = []
    for run in ("a", "b"):
        r = run_training(cfg.replace(out_dir=str(tmp_path / run)), write=True)
        blobs.append((r.metrics_path.read_bytes(), r.checkpoint_path.read_bytes()))
    same_metrics = blobs[0][0] == blobs[1][0]
    same_ckpt = blobs[0][1] == blobs[1][1]
    verdict("determinism", same_metrics and same_ckpt,
            f"metrics identical: {same_metrics}, checkpoint identical: {same_ckpt} "
            f"({len(blobs[0][0])} + {len(blobs[0][1])} bytes)")


def _expect(exc, buf):
    try:
        decode_sample(buf)
    except exc:
        return True
    except Exception:
        return False
    return False


def test_format_round_trip(verdict, tmp_path):
    rng = np.random.default_rng(13)
    failures = 0
    for i in range(1000):
        T, H, W = rng.integers(1, 8), rng.integers(1, 12), rng.integers(1, 12)
        seq = FrameSequence(rng.random((T, 2, H, W)).astype(np.float32), ("event", "appearance")[i % 2],
                            int(rng.integers(0, 2**32)))
        path = tmp_path / f"{i}.tms"
        save_sample(seq, path)
        back = load_sample(path)
        if not (back == seq and back.frames.tobytes() == seq.frames.tobytes()):
            failures += 1

    good = encode_sample(FrameSequence(rng.random((9, 2, 3, 3)).astype(np.float32), "event", 1))
    bad_magic = b"NOPE" + good[4:]
    bad_version = good[:4] + struct.pack("<H", 2) + good[6:]
    claims_ten = good[:11] + struct.pack("<H", 10) + good[13:]
    malformed = {
        "BadMagic": _expect(BadMagic, bad_magic),
        "VersionMismatch": _expect(VersionMismatch, bad_version),
        "Truncated(T=10 header, 9 frames)": _expect(Truncated, claims_ten),
        "Truncated(short header)": _expect(Truncated, good[:12]),
        "TrailingData": _expect(TrailingData, good + b"\x00\x00\x00\x00"),
    }
    try:
        encode_sample(FrameSequence(np.zeros((1, 2, 1, 65536), np.float32), "event", 0))
        malformed["DimensionOverflow"] = False
    except DimensionOverflow:
        malformed["DimensionOverflow"] = True
    wrong = [k for k, v in malformed.items() if not v]
    verdict("format round-trip", failures == 0 and not wrong,
            f"1000 files, {failures} round-trip failures; malformed cases raising the expected class: "
            f"{sum(malformed.values())}/{len(malformed)}" + (f"; wrong {wrong}" if wrong else ""))
