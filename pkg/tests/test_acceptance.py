"""End-to-end acceptance checks, one test per criterion.

A pass/fail line per criterion is printed in the pytest terminal summary
(section "acceptance criteria").
"""
import time

import numpy as np
import pytest

from cgebd import backtrace, cli, codec, evaluation, model, scam, synth, temporal, training
from cgebd.params import init_tensors, subtree
from cgebd.rng import SplitMix64
from helpers import moving_video, random_gop
from oracles import brute_matching, lstm as lstm_oracle


@pytest.mark.criterion(1, "codec lossless roundtrip, 50 videos")
def test_codec_roundtrip(record_property):
    t0 = time.perf_counter()
    corpus = [v for v, _ in synth.hard_cut_suite(25, seed=100)]
    corpus += [moving_video(5 + i % 20, 32 + 16 * (i % 3), 48, seed=i) for i in range(25)]
    bad = 0
    for v in corpus:
        s = codec.encode(v)
        back = codec.decode(codec.deserialize(codec.serialize(s)))
        bad += back != v
    elapsed = time.perf_counter() - t0
    record_property("detail", f"{len(corpus) - bad}/{len(corpus)} exact, {elapsed:.1f}s")
    assert bad == 0
    assert elapsed < 60


@pytest.mark.criterion(2, "backtrace reconstruction equals sequential decode")
def test_backtrace_oracle(record_property):
    checked = 0
    for seed in range(100):
        gop, video = random_gop(seed, size=64, pframes=11)
        for f in backtrace.accumulate(gop):
            assert np.array_equal(backtrace.reconstruct(gop.iframe, f), video.frames[f.source_index + 1])
            checked += 1
    record_property("detail", f"{checked} P-frames over 100 GOPs bit-exact")


@pytest.mark.criterion(3, "accumulation time linear in GOP length")
def test_linear_accumulation(record_property):
    t0 = time.perf_counter()
    lengths, times, r2 = cli.bench_accumulate([8, 16, 32, 64, 128], size=64, repeats=7)
    record_property("detail", f"R^2={r2:.4f}, " + ", ".join(f"{n}:{t * 1e3:.1f}ms" for n, t in zip(lengths, times)))
    assert r2 >= 0.98
    assert time.perf_counter() - t0 < 120


@pytest.mark.criterion(4, "SCAM range and convexity on 1000 inputs")
def test_scam_invariants(record_property):
    rng = np.random.default_rng(4)
    c = 8
    params = [subtree(init_tensors(SplitMix64(s), scam.param_specs("b", c, 2)), "b") for s in range(10)]
    worst = 0.0
    for i in range(1000):
        p = params[i % 10]
        h, w = rng.integers(1, 7, 2)
        scale = 10.0 ** rng.uniform(-2, 2)
        x_i, x_g = scale * rng.standard_normal((2, c, h, w))
        g = rng.standard_normal((2, h, w))
        z = scam.guidance_encode(p, x_i, x_g, g)
        wc = scam.channel_weight(p, z)
        assert ((wc > 0) & (wc < 1)).all()
        ws = scam.spatial_weight(p, z)
        assert (ws > 0).all()
        worst = max(worst, abs(ws.sum() - 1))
        assert abs(ws.sum() - 1) <= 1e-6
        xc = scam.apply_channel(x_i, wc)
        v = scam.attend(xc, ws)
        tol = 1e-9 * scale
        assert (v >= xc.min(axis=(1, 2)) - tol).all() and (v <= xc.max(axis=(1, 2)) + tol).all()
        r = scam.bidirectional_refine(p, x_g, x_i)
        assert (r >= x_g.min(axis=(1, 2)) - tol).all() and (r <= x_g.max(axis=(1, 2)) + tol).all()
    record_property("detail", f"max |sum W_spa - 1| = {worst:.1e}")


@pytest.mark.criterion(5, "LSTM batched forward equals literal gate equations")
def test_lstm_oracle(record_property):
    c = 8
    rng = np.random.default_rng(5)
    worst = 0.0
    for seed in range(5):
        p = subtree(init_tensors(SplitMix64(seed), temporal.lstm_specs("lstm", c, c)), "lstm")
        bags = rng.standard_normal((4, 17, c))
        out = temporal.lstm_forward(p, bags)
        for b in range(4):
            worst = max(worst, float(np.abs(out[b] - lstm_oracle(p, bags[b])).max()))
    zero = {k: np.zeros_like(v) for k, v in p.items()}
    assert not temporal.lstm_forward(zero, rng.standard_normal((3, 17, c))).any()
    record_property("detail", f"max abs diff {worst:.1e}")
    assert worst <= 1e-9


@pytest.mark.criterion(6, "group similarity symmetry, diagonal, range")
def test_group_similarity(record_property):
    rng = np.random.default_rng(6)
    cfg = model.ModelConfig()
    k, g = cfg.radius, cfg.groups
    bags = rng.standard_normal((1000, 2 * k + 1, cfg.channels)) * rng.uniform(1e-3, 1e3, (1000, 1, 1))
    s = temporal.group_similarity(bags, g)
    assert s.shape == (1000, g, 2 * k + 1, 2 * k + 1)
    asym = float(np.abs(s - s.transpose(0, 1, 3, 2)).max())
    diag = float(np.abs(np.diagonal(s, axis1=2, axis2=3) - 1).max())
    record_property("detail", f"shape G x 17 x 17, max asym {asym:.1e}, max |diag-1| {diag:.1e}")
    assert asym <= 1e-12 and diag <= 1e-9
    assert s.min() >= -1 and s.max() <= 1


@pytest.mark.criterion(7, "Gaussian soft labels")
def test_soft_labels(record_property):
    y = training.soft_labels([10], 21)
    assert y[10] == 1.0
    for d, ref in ((1, 0.606531), (2, 0.135335)):
        assert abs(y[10 - d] - ref) <= 1e-6 and abs(y[10 + d] - ref) <= 1e-6
    adj = training.soft_labels([10, 11], 21)
    assert adj[10] == adj[11] == 1.0 and adj.max() == 1.0
    record_property("detail", f"label[l+-1]={y[9]:.6f}, label[l+-2]={y[8]:.6f}")


@pytest.mark.criterion(8, "augmenting-path matching equals brute force")
def test_matching_oracle(record_property):
    rng = np.random.default_rng(8)
    for _ in range(1000):
        preds = sorted(rng.uniform(0, 1, rng.integers(0, 7)).round(2).tolist())
        gts = sorted(rng.uniform(0, 1, rng.integers(0, 7)).round(2).tolist())
        thr = float(rng.choice(evaluation.THRESHOLDS))
        assert evaluation.match_boundaries(preds, gts, thr) == brute_matching(preds, gts, thr)
    record_property("detail", "1000/1000 instances equal")


@pytest.mark.criterion(9, "pixel-difference baseline on 30-video hard-cut suite")
def test_harness_validation(record_property):
    suite = synth.hard_cut_suite(30, seed=0)
    preds = {a.video_id: synth.baseline_detector(v) for v, a in suite}
    rep = evaluation.f1_report(preds, [a for _, a in suite])
    record_property("detail", f"F1@0.25 = {rep.f1_at(0.25):.3f}")
    assert rep.f1_at(0.25) >= 0.95


@pytest.mark.criterion(10, "finite-difference micro-training on the tiny config")
def test_micro_training(record_property):
    cfg = model.TINY
    enc = codec.EncoderConfig()
    train = [(codec.encode(v, enc), a) for v, a in synth.hard_cut_suite(8, seed=1000)]
    held = [(codec.encode(v, enc), a) for v, a in synth.hard_cut_suite(8, seed=2000)]
    t0 = time.perf_counter()
    data = training.build_dataset(train, cfg)
    params = training.fit_standardization(model.init_model(cfg), data, cfg)
    n_train = sum(params[n].size for n in training.trainable_names(params))
    trained, trace = training.micro_train(params, data, cfg, steps=200, lr=1.0)
    elapsed = time.perf_counter() - t0
    preds = {a.video_id: model.detect(trained, s, cfg)["boundaries_s"] for s, a in held}
    f1 = evaluation.f1_report(preds, [a for _, a in held]).f1_at(0.25)
    ratio = trace[-1] / trace[0]
    record_property("detail", f"{n_train} trainable params, loss {trace[0]:.3f}->{trace[-1]:.3f} "
                              f"(x{ratio:.2f}), held-out F1@0.25 {f1:.3f}, {elapsed:.0f}s")
    assert n_train <= 2000
    assert ratio < 0.5
    assert f1 >= 0.8
    assert elapsed < 600


def _pipeline(root, threads):
    """Run every CLI stage; return the bytes of each artifact."""
    root.mkdir(parents=True)
    cfg = root / "tiny.ini"
    cfg.write_text("[model]\nchannels = 8\nradius = 2\ngroups = 2\ndescriptor = 8\n"
                   "backbone_hidden = 8\n[train]\nsteps = 3\n")
    base = ["--config", str(cfg), "--threads", str(threads)]
    d = root / "synth"
    assert cli.main(base + ["synth", "--suite", "3", "--seed", "11", "--out-dir", str(d)]) == 0
    raws = sorted(str(p) for p in d.glob("*.lcvr"))
    assert cli.main(base + ["encode", *raws, "--out-dir", str(root / "enc")]) == 0
    streams = sorted(str(p) for p in (root / "enc").glob("*.lcvs"))
    assert cli.main(base + ["decode", *streams, "--out-dir", str(root / "dec")]) == 0
    assert cli.main(base + ["accumulate", *streams, "--out-dir", str(root / "acc")]) == 0
    assert cli.main(base + ["train", *streams, "--annotations", str(d / "annotations.json"),
                            "--weights-out", str(root / "w.json"), "--loss-csv", str(root / "loss.csv"),
                            "--quiet"]) == 0
    assert cli.main(base + ["detect", *streams, "--weights", str(root / "w.json"),
                            "-o", str(root / "det.json")]) == 0
    assert cli.main(base + ["eval", str(root / "det.json"), str(d / "annotations.json"),
                            "--csv", str(root / "report.csv")]) == 0
    return {str(p.relative_to(root)): p.read_bytes() for p in sorted(root.rglob("*")) if p.is_file()}


@pytest.mark.criterion(11, "byte-identical outputs across runs and thread counts")
def test_determinism(tmp_path, record_property, capsys):
    runs = [_pipeline(tmp_path / name, th) for name, th in (("a", 1), ("b", 1), ("c", 3))]
    capsys.readouterr()
    assert runs[0].keys() == runs[1].keys() == runs[2].keys()
    diff = [k for k in runs[0] if not runs[0][k] == runs[1][k] == runs[2][k]]
    record_property("detail", f"{len(runs[0])} artifacts compared, {len(diff)} differ")
    assert not diff, diff
